//! Scene construction for each chart type. Inputs are already validated.

use super::palette::{colors, tint};
use super::scene::{arc_cmds, circle_path, Anchor, Color, PathCmd, Prim, BLACK, GREY, LIGHT, WHITE};
use super::text::{truncate, width};
use super::ticks::{nice_ticks, Ticks};
use super::{RenderError, CATEGORY_CAP, CHART_HEIGHT, CHART_WIDTH};
use crate::model::{ChartParams, ChartType};
use crate::query::{ResultTable, Value};
use indexmap::IndexMap;

const W: f64 = CHART_WIDTH as f64;
const H: f64 = CHART_HEIGHT as f64;
const TITLE_SIZE: f64 = 11.0;
const LABEL_SIZE: f64 = 8.0;
const TICK_SIZE: f64 = 7.5;
const PLOT_TOP: f64 = 36.0;
const PLOT_BOTTOM: f64 = 148.0;
const PLOT_RIGHT: f64 = W - 8.0;

fn label_of(v: &Value) -> Option<String> {
    match v {
        Value::Null => None,
        Value::Text(s) => Some(s.clone()),
        other => Some(other.to_string()),
    }
}

fn finite(v: &Value) -> Option<f64> {
    v.as_f64().filter(|f| f.is_finite())
}

fn text(x: f64, y: f64, size: f64, anchor: Anchor, fill: Color, content: String) -> Prim {
    Prim::Text {
        x,
        y,
        size,
        anchor,
        bold: false,
        fill,
        content,
    }
}

/// Category totals per series, summed over duplicate rows.
struct Bands {
    categories: Vec<String>,
    series: Vec<Option<String>>,
    values: Vec<Vec<Option<f64>>>,
    total_categories: usize,
}

fn bands(params: &ChartParams, table: &ResultTable) -> Result<Bands, RenderError> {
    let xi = table.column_index(&params.x_field).unwrap();
    let yi = table.column_index(&params.y_field).unwrap();
    let ci = params
        .color_field
        .as_deref()
        .filter(|c| *c != params.x_field)
        .and_then(|c| table.column_index(c));
    let mut cats: IndexMap<String, IndexMap<Option<String>, f64>> = IndexMap::new();
    let mut series: IndexMap<Option<String>, ()> = IndexMap::new();
    for row in &table.rows {
        let (Some(x), Some(y)) = (label_of(&row[xi]), finite(&row[yi])) else {
            continue;
        };
        let s = match ci {
            Some(c) => match label_of(&row[c]) {
                Some(s) => Some(s),
                None => continue,
            },
            None => None,
        };
        series.insert(s.clone(), ());
        *cats.entry(x).or_default().entry(s).or_insert(0.0) += y;
    }
    if cats.is_empty() {
        return Err(RenderError::NoData);
    }
    let total_categories = cats.len();
    let mut entries: Vec<(String, IndexMap<Option<String>, f64>)> = cats.into_iter().collect();
    if entries.len() > CATEGORY_CAP {
        let weight = |m: &IndexMap<Option<String>, f64>| m.values().map(|v| v.abs()).sum::<f64>();
        entries.sort_by(|a, b| weight(&b.1).total_cmp(&weight(&a.1)));
        entries.truncate(CATEGORY_CAP);
    }
    let series: Vec<Option<String>> = series.into_keys().collect();
    let values = entries
        .iter()
        .map(|(_, m)| series.iter().map(|s| m.get(s).copied()).collect())
        .collect();
    Ok(Bands {
        categories: entries.into_iter().map(|(c, _)| c).collect(),
        series,
        values,
        total_categories,
    })
}

struct Header {
    prims: Vec<Prim>,
}

/// Title, truncation note, y-axis caption and the series legend.
fn header(params: &ChartParams, note: Option<String>, legend: &[(String, Color)], y_label: bool) -> Header {
    let mut prims = Vec::new();
    let mut title_room = W - 8.0;
    if let Some(note) = note {
        title_room -= width(&note, LABEL_SIZE) + 8.0;
        prims.push(text(W - 4.0, 13.0, LABEL_SIZE, Anchor::End, GREY, note));
    }
    if !params.title.is_empty() {
        prims.push(Prim::Text {
            x: 4.0,
            y: 13.0,
            size: TITLE_SIZE,
            anchor: Anchor::Start,
            bold: true,
            fill: BLACK,
            content: truncate(&params.title, TITLE_SIZE, title_room),
        });
    }
    let mut x = 4.0;
    if y_label && !params.axis_labels.y.is_empty() {
        let label = truncate(&params.axis_labels.y, LABEL_SIZE, 140.0);
        x += width(&label, LABEL_SIZE) + 14.0;
        prims.push(text(4.0, 27.0, LABEL_SIZE, Anchor::Start, GREY, label));
    }
    for (i, (name, color)) in legend.iter().enumerate() {
        let label = truncate(name, LABEL_SIZE, 80.0);
        let advance = 10.0 + width(&label, LABEL_SIZE) + 8.0;
        if x + advance > W - 4.0 {
            if i > 0 {
                prims.push(text(x, 27.0, LABEL_SIZE, Anchor::Start, GREY, "…".into()));
            }
            break;
        }
        prims.push(Prim::Rect {
            x,
            y: 20.5,
            w: 7.0,
            h: 7.0,
            fill: Some(*color),
            stroke: None,
            class: "legend",
        });
        prims.push(text(x + 10.0, 27.0, LABEL_SIZE, Anchor::Start, BLACK, label));
        x += advance;
    }
    Header { prims }
}

struct Frame {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn y(&self, t: &Ticks, v: f64) -> f64 {
        self.bottom - (v - t.first()) / (t.last() - t.first()) * (self.bottom - self.top)
    }

    fn x(&self, t: &Ticks, v: f64) -> f64 {
        self.left + (v - t.first()) / (t.last() - t.first()) * (self.right - self.left)
    }
}

/// Y gridlines and tick labels; returns the plot frame sized to the labels.
fn y_axis(prims: &mut Vec<Prim>, ticks: &Ticks) -> Frame {
    let labels = ticks.labels();
    let widest = labels
        .iter()
        .map(|l| width(l, TICK_SIZE))
        .fold(0.0, f64::max);
    let frame = Frame {
        left: (widest + 10.0).clamp(24.0, 64.0),
        right: PLOT_RIGHT,
        top: PLOT_TOP,
        bottom: PLOT_BOTTOM,
    };
    for (v, label) in ticks.values.iter().zip(labels) {
        let y = frame.y(ticks, *v);
        prims.push(Prim::Line {
            x1: frame.left,
            y1: y,
            x2: frame.right,
            y2: y,
            stroke: LIGHT,
            width: 0.5,
        });
        prims.push(text(frame.left - 4.0, y + 2.5, TICK_SIZE, Anchor::End, GREY, label));
    }
    frame
}

fn x_caption(prims: &mut Vec<Prim>, params: &ChartParams, frame: &Frame) {
    prims.push(Prim::Line {
        x1: frame.left,
        y1: frame.bottom,
        x2: frame.right,
        y2: frame.bottom,
        stroke: GREY,
        width: 0.8,
    });
    if !params.axis_labels.x.is_empty() {
        prims.push(text(
            (frame.left + frame.right) / 2.0,
            H - 6.0,
            LABEL_SIZE,
            Anchor::Middle,
            GREY,
            truncate(&params.axis_labels.x, LABEL_SIZE, frame.right - frame.left),
        ));
    }
}

fn series_legend(series: &[Option<String>], palette: &[Color]) -> Vec<(String, Color)> {
    series
        .iter()
        .zip(palette)
        .filter_map(|(s, c)| s.clone().map(|s| (s, *c)))
        .collect()
}

fn truncation_note(shown: usize, total: usize) -> Option<String> {
    (total > shown).then(|| format!("top {shown} of {total}"))
}

fn bar(params: &ChartParams, table: &ResultTable) -> Result<Vec<Prim>, RenderError> {
    let b = bands(params, table)?;
    let palette = colors(params.color_scheme, b.series.len());
    let all: Vec<f64> = b.values.iter().flatten().flatten().copied().collect();
    let lo = all.iter().copied().fold(0.0, f64::min);
    let hi = all.iter().copied().fold(0.0, f64::max);
    let ticks = nice_ticks(lo, hi);
    let mut prims = header(
        params,
        truncation_note(b.categories.len(), b.total_categories),
        &series_legend(&b.series, &palette),
        true,
    )
    .prims;
    let frame = y_axis(&mut prims, &ticks);
    let band = (frame.right - frame.left) / b.categories.len() as f64;
    let inner = band * 0.8;
    let sub = inner / b.series.len() as f64;
    let base = frame.y(&ticks, 0.0);
    for (ci, cat) in b.categories.iter().enumerate() {
        let x0 = frame.left + band * ci as f64 + (band - inner) / 2.0;
        for (si, v) in b.values[ci].iter().enumerate() {
            let Some(v) = v else { continue };
            let y = frame.y(&ticks, *v);
            prims.push(Prim::Rect {
                x: x0 + sub * si as f64,
                y: y.min(base),
                w: sub,
                h: (y - base).abs(),
                fill: Some(palette[si]),
                stroke: None,
                class: "mark bar",
            });
        }
        prims.push(text(
            frame.left + band * (ci as f64 + 0.5),
            frame.bottom + 10.0,
            TICK_SIZE,
            Anchor::Middle,
            BLACK,
            truncate(cat, TICK_SIZE, band - 2.0),
        ));
    }
    x_caption(&mut prims, params, &frame);
    Ok(prims)
}

fn pie(params: &ChartParams, table: &ResultTable) -> Result<Vec<Prim>, RenderError> {
    let b = bands(params, table)?;
    let values: Vec<f64> = b.values.iter().map(|r| r[0].unwrap_or(0.0)).collect();
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(RenderError::NoData);
    }
    let palette = colors(params.color_scheme, values.len());
    let mut prims = header(
        params,
        truncation_note(b.categories.len(), b.total_categories),
        &[],
        false,
    )
    .prims;
    let (cx, cy, r) = (96.0, 96.0, 56.0);
    for (i, (a0, a1)) in super::pie_angles(&values).into_iter().enumerate() {
        let mut cmds = vec![
            PathCmd::Move(cx, cy),
            PathCmd::Line(cx + r * a0.sin(), cy - r * a0.cos()),
        ];
        if a1 > a0 {
            cmds.extend(arc_cmds(cx, cy, r, a0, a1));
        }
        cmds.push(PathCmd::Close);
        prims.push(Prim::Path {
            cmds,
            fill: Some(palette[i]),
            stroke: Some(WHITE),
            width: 0.8,
            class: "mark slice",
        });
    }
    for (i, cat) in b.categories.iter().enumerate() {
        let y = 40.0 + 11.0 * i as f64;
        prims.push(Prim::Rect {
            x: 180.0,
            y: y - 6.5,
            w: 7.0,
            h: 7.0,
            fill: Some(palette[i]),
            stroke: None,
            class: "legend",
        });
        let pct = format!(" ({:.1}%)", values[i] / total * 100.0);
        let name = truncate(cat, LABEL_SIZE, 166.0 - width(&pct, LABEL_SIZE));
        prims.push(text(190.0, y, LABEL_SIZE, Anchor::Start, BLACK, format!("{name}{pct}")));
    }
    Ok(prims)
}

#[derive(Clone)]
enum XKey {
    Num(f64),
    Text(String),
}

/// Points of each series sorted by x, summing duplicates for line/area.
struct SeriesSet {
    names: Vec<Option<String>>,
    points: Vec<Vec<(f64, f64)>>,
    /// Ordered text positions when x is a date/year text field.
    text_x: Option<Vec<String>>,
}

fn series(params: &ChartParams, table: &ResultTable, sum_duplicates: bool) -> Result<SeriesSet, RenderError> {
    let xi = table.column_index(&params.x_field).unwrap();
    let yi = table.column_index(&params.y_field).unwrap();
    let ci = params.color_field.as_deref().and_then(|c| table.column_index(c));
    let mut raw: IndexMap<Option<String>, Vec<(XKey, f64)>> = IndexMap::new();
    for row in &table.rows {
        let x = match &row[xi] {
            Value::Text(s) => XKey::Text(s.clone()),
            v => match finite(v) {
                Some(f) => XKey::Num(f),
                None => continue,
            },
        };
        let Some(y) = finite(&row[yi]) else { continue };
        let s = match ci {
            Some(c) => match label_of(&row[c]) {
                Some(s) => Some(s),
                None => continue,
            },
            None => None,
        };
        raw.entry(s).or_default().push((x, y));
    }
    if raw.is_empty() {
        return Err(RenderError::NoData);
    }
    let mut text_x: Vec<String> = raw
        .values()
        .flatten()
        .filter_map(|(x, _)| match x {
            XKey::Text(s) => Some(s.clone()),
            XKey::Num(_) => None,
        })
        .collect();
    text_x.sort();
    text_x.dedup();
    let position = |x: &XKey| match x {
        XKey::Num(f) => *f,
        XKey::Text(s) => text_x.binary_search(s).unwrap() as f64,
    };
    let mut names = Vec::new();
    let mut points = Vec::new();
    for (name, pts) in raw {
        let mut pts: Vec<(f64, f64)> = pts.iter().map(|(x, y)| (position(x), *y)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if sum_duplicates {
            let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
            for (x, y) in pts {
                match merged.last_mut() {
                    Some(last) if last.0 == x => last.1 += y,
                    _ => merged.push((x, y)),
                }
            }
            pts = merged;
        }
        names.push(name);
        points.push(pts);
    }
    Ok(SeriesSet {
        names,
        points,
        text_x: (!text_x.is_empty()).then_some(text_x),
    })
}

fn xy(params: &ChartParams, table: &ResultTable) -> Result<Vec<Prim>, RenderError> {
    let kind = params.chart_type;
    let set = series(params, table, kind != ChartType::Scatter)?;
    let palette = colors(params.color_scheme, set.names.len());
    let ys = set.points.iter().flatten().map(|p| p.1);
    let (mut lo, mut hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), y| (l.min(y), h.max(y)));
    if kind == ChartType::Area {
        lo = lo.min(0.0);
        hi = hi.max(0.0);
    }
    let yt = nice_ticks(lo, hi);
    let mut prims = header(params, None, &series_legend(&set.names, &palette), true).prims;
    let mut frame = y_axis(&mut prims, &yt);

    // x positions: linear over nice ticks, or evenly spaced ordered labels
    let x_of: Box<dyn Fn(f64) -> f64> = match &set.text_x {
        Some(labels) => {
            let n = labels.len();
            let (left, right) = (frame.left + 8.0, frame.right - 8.0);
            let step = if n > 1 { (right - left) / (n - 1) as f64 } else { 0.0 };
            let stride = n.div_ceil(8).max(1);
            for (i, l) in labels.iter().enumerate().step_by(stride) {
                let x = if n > 1 { left + step * i as f64 } else { (left + right) / 2.0 };
                prims.push(text(
                    x,
                    frame.bottom + 10.0,
                    TICK_SIZE,
                    Anchor::Middle,
                    BLACK,
                    truncate(l, TICK_SIZE, (step * stride as f64).max(30.0) - 2.0),
                ));
            }
            Box::new(move |p| if n > 1 { left + step * p } else { (left + right) / 2.0 })
        }
        None => {
            let xs = set.points.iter().flatten().map(|p| p.0);
            let (xl, xh) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
            let xt = nice_ticks(xl, xh);
            frame.right -= 6.0;
            for (v, label) in xt.values.iter().zip(xt.labels()) {
                prims.push(text(
                    frame.x(&xt, *v),
                    frame.bottom + 10.0,
                    TICK_SIZE,
                    Anchor::Middle,
                    BLACK,
                    label,
                ));
            }
            let (left, right) = (frame.left, frame.right);
            Box::new(move |v| left + (v - xt.first()) / (xt.last() - xt.first()) * (right - left))
        }
    };

    let base = frame.y(&yt, 0.0_f64.clamp(yt.first(), yt.last()));
    for (si, pts) in set.points.iter().enumerate() {
        let color = palette[si];
        let screen: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x_of(x), frame.y(&yt, y))).collect();
        match kind {
            ChartType::Scatter => {
                for &(x, y) in &screen {
                    prims.push(Prim::Path {
                        cmds: circle_path(x, y, 2.5),
                        fill: Some(color),
                        stroke: None,
                        width: 0.0,
                        class: "mark point",
                    });
                }
            }
            ChartType::Line | ChartType::Area => {
                if kind == ChartType::Area {
                    let mut cmds = vec![PathCmd::Move(screen[0].0, base)];
                    cmds.extend(screen.iter().map(|&(x, y)| PathCmd::Line(x, y)));
                    cmds.push(PathCmd::Line(screen[screen.len() - 1].0, base));
                    cmds.push(PathCmd::Close);
                    prims.push(Prim::Path {
                        cmds,
                        fill: Some(tint(color)),
                        stroke: None,
                        width: 0.0,
                        class: "mark area",
                    });
                }
                let mut cmds = vec![PathCmd::Move(screen[0].0, screen[0].1)];
                cmds.extend(screen[1..].iter().map(|&(x, y)| PathCmd::Line(x, y)));
                prims.push(Prim::Path {
                    cmds,
                    fill: None,
                    stroke: Some(color),
                    width: 1.6,
                    class: "mark line",
                });
                if screen.len() <= 24 {
                    for &(x, y) in &screen {
                        prims.push(Prim::Path {
                            cmds: circle_path(x, y, 1.8),
                            fill: Some(color),
                            stroke: None,
                            width: 0.0,
                            class: "marker",
                        });
                    }
                }
            }
            ChartType::Bar | ChartType::Pie => unreachable!(),
        }
    }
    x_caption(&mut prims, params, &frame);
    Ok(prims)
}

pub(super) fn draw(params: &ChartParams, table: &ResultTable) -> Result<Vec<Prim>, RenderError> {
    let mut prims = vec![Prim::Rect {
        x: 0.0,
        y: 0.0,
        w: W,
        h: H,
        fill: Some(WHITE),
        stroke: None,
        class: "",
    }];
    prims.extend(match params.chart_type {
        ChartType::Bar => bar(params, table)?,
        ChartType::Pie => pie(params, table)?,
        ChartType::Line | ChartType::Area | ChartType::Scatter => xy(params, table)?,
    });
    Ok(prims)
}
