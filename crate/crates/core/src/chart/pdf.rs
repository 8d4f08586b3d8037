//! Minimal byte-stable PDF 1.4 writer for a display list: one page,
//! uncompressed content stream, the two standard Helvetica faces, no
//! timestamps or document ids.

use super::scene::{num, Anchor, Color, PathCmd, Prim};
use super::text::width;
use std::fmt::Write as _;

/// Color operator with three decimals per channel, enough for 8-bit input.
fn color_op(c: Color, op: &str) -> String {
    let f = |v: u8| {
        let s = format!("{:.3}", v as f64 / 255.0);
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s.is_empty() {
            "0".to_string()
        } else {
            s.to_string()
        }
    };
    format!("{} {} {} {op}", f(c.0), f(c.1), f(c.2))
}

/// WinAnsi bytes with PDF string escaping; unmappable characters become '?'.
fn pdf_string(s: &str) -> Vec<u8> {
    let mut out = vec![b'('];
    for c in s.chars() {
        let b = match c {
            '…' => 0x85,
            '–' => 0x96,
            '—' => 0x97,
            '‘' => 0x91,
            '’' => 0x92,
            '“' => 0x93,
            '”' => 0x94,
            '•' => 0x95,
            '€' => 0x80,
            c if (c as u32) < 0x20 => b' ',
            c if (c as u32) < 0x7f || (0xa0..=0xff).contains(&(c as u32)) => c as u32 as u8,
            _ => b'?',
        };
        if matches!(b, b'(' | b')' | b'\\') {
            out.push(b'\\');
        }
        out.push(b);
    }
    out.push(b')');
    out
}

fn path_ops(out: &mut Vec<u8>, cmds: &[PathCmd]) {
    let mut s = String::new();
    for c in cmds {
        match *c {
            PathCmd::Move(x, y) => writeln!(s, "{} {} m", num(x), num(y)),
            PathCmd::Line(x, y) => writeln!(s, "{} {} l", num(x), num(y)),
            PathCmd::Cubic(a, b, c, d, x, y) => writeln!(
                s,
                "{} {} {} {} {} {} c",
                num(a),
                num(b),
                num(c),
                num(d),
                num(x),
                num(y)
            ),
            PathCmd::Close => writeln!(s, "h"),
        }
        .unwrap();
    }
    out.extend_from_slice(s.as_bytes());
}

fn paint_op(fill: Option<Color>, stroke: Option<Color>, width: f64) -> Option<(String, &'static str)> {
    let mut setup = String::new();
    if let Some(c) = fill {
        writeln!(setup, "{}", color_op(c, "rg")).unwrap();
    }
    if let Some(c) = stroke {
        writeln!(setup, "{}\n{} w", color_op(c, "RG"), num(width)).unwrap();
    }
    let op = match (fill.is_some(), stroke.is_some()) {
        (true, true) => "B",
        (true, false) => "f",
        (false, true) => "S",
        (false, false) => return None,
    };
    Some((setup, op))
}

fn emit(out: &mut Vec<u8>, p: &Prim) {
    match p {
        Prim::Rect {
            x,
            y,
            w,
            h,
            fill,
            stroke,
            ..
        } => {
            if let Some((setup, op)) = paint_op(*fill, *stroke, 1.0) {
                out.extend_from_slice(setup.as_bytes());
                out.extend_from_slice(
                    format!("{} {} {} {} re {op}\n", num(*x), num(*y), num(*w), num(*h)).as_bytes(),
                );
            }
        }
        Prim::Line {
            x1,
            y1,
            x2,
            y2,
            stroke,
            width,
        } => {
            out.extend_from_slice(
                format!(
                    "{}\n{} w\n{} {} m\n{} {} l\nS\n",
                    color_op(*stroke, "RG"),
                    num(*width),
                    num(*x1),
                    num(*y1),
                    num(*x2),
                    num(*y2)
                )
                .as_bytes(),
            );
        }
        Prim::Path {
            cmds,
            fill,
            stroke,
            width,
            ..
        } => {
            if let Some((setup, op)) = paint_op(*fill, *stroke, *width) {
                out.extend_from_slice(setup.as_bytes());
                path_ops(out, cmds);
                out.extend_from_slice(format!("{op}\n").as_bytes());
            }
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
            let w = width(content, *size);
            let x = match anchor {
                Anchor::Start => *x,
                Anchor::Middle => x - w / 2.0,
                Anchor::End => x - w,
            };
            let font = if *bold { "F2" } else { "F1" };
            out.extend_from_slice(
                format!(
                    "{}\nBT\n/{font} {} Tf\n1 0 0 -1 {} {} Tm\n",
                    color_op(*fill, "rg"),
                    num(*size),
                    num(x),
                    num(*y)
                )
                .as_bytes(),
            );
            out.extend_from_slice(&pdf_string(content));
            out.extend_from_slice(b" Tj\nET\n");
        }
        Prim::Group {
            dx,
            dy,
            scale,
            children,
            ..
        } => {
            out.extend_from_slice(
                format!(
                    "q\n1 0 0 1 {} {} cm\n{s} 0 0 {s} 0 0 cm\n",
                    num(*dx),
                    num(*dy),
                    s = super::scene::num_fine(*scale)
                )
                .as_bytes(),
            );
            for c in children {
                emit(out, c);
            }
            out.extend_from_slice(b"Q\n");
        }
    }
}

/// Renders the display list onto a single `width` x `height` point page.
/// Scene coordinates are top-down like SVG; the page transform flips them.
pub fn to_pdf(width: f64, height: f64, prims: &[Prim]) -> Vec<u8> {
    let mut content = format!("1 0 0 -1 0 {} cm\n", num(height)).into_bytes();
    for p in prims {
        emit(&mut content, p);
    }

    let mut objects: Vec<Vec<u8>> = Vec::new();
    objects.push(b"<< /Type /Catalog /Pages 2 0 R >>".to_vec());
    objects.push(b"<< /Type /Pages /Kids [3 0 R] /Count 1 >>".to_vec());
    objects.push(
        format!(
            "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 {} {}] /Contents 4 0 R /Resources << /Font << /F1 5 0 R /F2 6 0 R >> >> >>",
            num(width),
            num(height)
        )
        .into_bytes(),
    );
    let mut stream = format!("<< /Length {} >>\nstream\n", content.len()).into_bytes();
    stream.extend_from_slice(&content);
    stream.extend_from_slice(b"endstream");
    objects.push(stream);
    for face in ["Helvetica", "Helvetica-Bold"] {
        objects.push(
            format!("<< /Type /Font /Subtype /Type1 /BaseFont /{face} /Encoding /WinAnsiEncoding >>")
                .into_bytes(),
        );
    }

    let mut out = b"%PDF-1.4\n%\xe2\xe3\xcf\xd3\n".to_vec();
    let mut offsets = Vec::with_capacity(objects.len());
    for (i, body) in objects.iter().enumerate() {
        offsets.push(out.len());
        out.extend_from_slice(format!("{} 0 obj\n", i + 1).as_bytes());
        out.extend_from_slice(body);
        out.extend_from_slice(b"\nendobj\n");
    }
    let xref = out.len();
    let mut table = format!("xref\n0 {}\n0000000000 65535 f \n", objects.len() + 1);
    for off in offsets {
        writeln!(table, "{off:010} 00000 n ").unwrap();
    }
    write!(
        table,
        "trailer\n<< /Size {} /Root 1 0 R >>\nstartxref\n{xref}\n%%EOF\n",
        objects.len() + 1
    )
    .unwrap();
    out.extend_from_slice(table.as_bytes());
    out
}
