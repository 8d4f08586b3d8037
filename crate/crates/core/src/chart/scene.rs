//! Resolution-independent display list shared by the SVG and PDF writers.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Color(pub u8, pub u8, pub u8);

impl Color {
    pub fn hex(s: &str) -> Color {
        let v = u32::from_str_radix(s.trim_start_matches('#'), 16).expect("valid hex color");
        Color((v >> 16) as u8, (v >> 8) as u8, v as u8)
    }

    pub fn to_hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

pub const BLACK: Color = Color(0x22, 0x22, 0x22);
pub const GREY: Color = Color(0x88, 0x88, 0x88);
pub const LIGHT: Color = Color(0xe4, 0xe4, 0xe4);
pub const WHITE: Color = Color(0xff, 0xff, 0xff);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathCmd {
    Move(f64, f64),
    Line(f64, f64),
    Cubic(f64, f64, f64, f64, f64, f64),
    Close,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Start,
    Middle,
    End,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prim {
    Rect {
        x: f64,
        y: f64,
        w: f64,
        h: f64,
        fill: Option<Color>,
        stroke: Option<Color>,
        class: &'static str,
    },
    Line {
        x1: f64,
        y1: f64,
        x2: f64,
        y2: f64,
        stroke: Color,
        width: f64,
    },
    Path {
        cmds: Vec<PathCmd>,
        fill: Option<Color>,
        stroke: Option<Color>,
        width: f64,
        class: &'static str,
    },
    Text {
        x: f64,
        y: f64,
        size: f64,
        anchor: Anchor,
        bold: bool,
        fill: Color,
        content: String,
    },
    /// Children drawn translated by (dx, dy) and scaled by `scale`.
    Group {
        dx: f64,
        dy: f64,
        scale: f64,
        class: &'static str,
        children: Vec<Prim>,
    },
}

/// Four cubic segments approximating a circle.
pub fn circle_path(cx: f64, cy: f64, r: f64) -> Vec<PathCmd> {
    const K: f64 = 0.552_284_749_830_793_4;
    let k = K * r;
    vec![
        PathCmd::Move(cx + r, cy),
        PathCmd::Cubic(cx + r, cy + k, cx + k, cy + r, cx, cy + r),
        PathCmd::Cubic(cx - k, cy + r, cx - r, cy + k, cx - r, cy),
        PathCmd::Cubic(cx - r, cy - k, cx - k, cy - r, cx, cy - r),
        PathCmd::Cubic(cx + k, cy - r, cx + r, cy - k, cx + r, cy),
        PathCmd::Close,
    ]
}

/// Arc from angle `a0` to `a1` (radians, clockwise from 12 o'clock in
/// screen coordinates) as cubic segments of at most a quarter turn each.
pub fn arc_cmds(cx: f64, cy: f64, r: f64, a0: f64, a1: f64) -> Vec<PathCmd> {
    let point = |a: f64| (cx + r * a.sin(), cy - r * a.cos());
    let segments = ((a1 - a0) / std::f64::consts::FRAC_PI_2).ceil().max(1.0) as usize;
    let step = (a1 - a0) / segments as f64;
    let mut out = Vec::with_capacity(segments);
    for i in 0..segments {
        let s = a0 + step * i as f64;
        let e = s + step;
        let k = 4.0 / 3.0 * (step / 4.0).tan() * r;
        let (x0, y0) = point(s);
        let (x3, y3) = point(e);
        // tangent direction at angle a is (cos a, sin a) for this param
        let c1 = (x0 + k * s.cos(), y0 + k * s.sin());
        let c2 = (x3 - k * e.cos(), y3 - k * e.sin());
        out.push(PathCmd::Cubic(c1.0, c1.1, c2.0, c2.1, x3, y3));
    }
    out
}

/// Compact fixed-precision number for vector output.
pub fn num(v: f64) -> String {
    let s = format!("{:.2}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && c != '\t' && c != '\n' => {}
            c => out.push(c),
        }
    }
    out
}

fn path_data(cmds: &[PathCmd]) -> String {
    let mut d = String::new();
    for (i, c) in cmds.iter().enumerate() {
        if i > 0 {
            d.push(' ');
        }
        match *c {
            PathCmd::Move(x, y) => write!(d, "M{} {}", num(x), num(y)),
            PathCmd::Line(x, y) => write!(d, "L{} {}", num(x), num(y)),
            PathCmd::Cubic(a, b, c, e, x, y) => write!(
                d,
                "C{} {} {} {} {} {}",
                num(a),
                num(b),
                num(c),
                num(e),
                num(x),
                num(y)
            ),
            PathCmd::Close => write!(d, "Z"),
        }
        .unwrap();
    }
    d
}

fn paint(fill: Option<Color>, stroke: Option<Color>, width: f64) -> String {
    let mut s = format!(
        " fill=\"{}\"",
        fill.map(Color::to_hex).unwrap_or_else(|| "none".into())
    );
    if let Some(c) = stroke {
        write!(s, " stroke=\"{}\" stroke-width=\"{}\"", c.to_hex(), num(width)).unwrap();
    }
    s
}

fn write_prim(out: &mut String, p: &Prim, indent: usize) {
    let pad = "  ".repeat(indent);
    match p {
        Prim::Rect {
            x,
            y,
            w,
            h,
            fill,
            stroke,
            class,
        } => {
            let class = if class.is_empty() {
                String::new()
            } else {
                format!(" class=\"{class}\"")
            };
            writeln!(
                out,
                "{pad}<rect{class} x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"{}/>",
                num(*x),
                num(*y),
                num(*w),
                num(*h),
                paint(*fill, *stroke, 1.0)
            )
        }
        Prim::Line {
            x1,
            y1,
            x2,
            y2,
            stroke,
            width,
        } => writeln!(
            out,
            "{pad}<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>",
            num(*x1),
            num(*y1),
            num(*x2),
            num(*y2),
            stroke.to_hex(),
            num(*width)
        ),
        Prim::Path {
            cmds,
            fill,
            stroke,
            width,
            class,
        } => {
            let class = if class.is_empty() {
                String::new()
            } else {
                format!(" class=\"{class}\"")
            };
            writeln!(
                out,
                "{pad}<path{class} d=\"{}\"{}/>",
                path_data(cmds),
                paint(*fill, *stroke, *width)
            )
        }
        Prim::Text {
            x,
            y,
            size,
            anchor,
            bold,
            fill,
            content,
        } => {
            let anchor = match anchor {
                Anchor::Start => "",
                Anchor::Middle => " text-anchor=\"middle\"",
                Anchor::End => " text-anchor=\"end\"",
            };
            let weight = if *bold { " font-weight=\"bold\"" } else { "" };
            writeln!(
                out,
                "{pad}<text x=\"{}\" y=\"{}\" font-size=\"{}\"{anchor}{weight} fill=\"{}\">{}</text>",
                num(*x),
                num(*y),
                num(*size),
                fill.to_hex(),
                xml_escape(content)
            )
        }
        Prim::Group {
            dx,
            dy,
            scale,
            class,
            children,
        } => {
            let class = if class.is_empty() {
                String::new()
            } else {
                format!(" class=\"{class}\"")
            };
            let scale = if (*scale - 1.0).abs() < 1e-12 {
                String::new()
            } else {
                format!(" scale({})", num_fine(*scale))
            };
            writeln!(
                out,
                "{pad}<g{class} transform=\"translate({} {}){scale}\">",
                num(*dx),
                num(*dy)
            )
            .unwrap();
            for c in children {
                write_prim(out, c, indent + 1);
            }
            writeln!(out, "{pad}</g>")
        }
    }
    .unwrap();
}

/// Four-decimal variant for scale factors.
pub fn num_fine(v: f64) -> String {
    let s = format!("{:.4}", v);
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Serializes a display list as a standalone SVG document.
pub fn to_svg(width: f64, height: f64, prims: &[Prim]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"Helvetica, Arial, sans-serif\">",
        w = num(width),
        h = num(height)
    )
    .unwrap();
    for p in prims {
        write_prim(&mut out, p, 1);
    }
    out.push_str("</svg>\n");
    out
}
