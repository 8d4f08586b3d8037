//! Parameter-driven rendering of the five chart types to fixed-size vector
//! graphics.

mod draw;
pub mod palette;
pub mod pdf;
pub mod scene;
pub mod text;
pub mod ticks;

use crate::model::{ChartParams, ChartType};
use crate::query::{ResultTable, Value, ValueType};
use serde::{Deserialize, Serialize};

pub const CHART_WIDTH: u32 = 360;
pub const CHART_HEIGHT: u32 = 180;
pub const MAX_DIMENSIONS: usize = 3;
pub const CATEGORY_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedChart {
    pub svg_text: String,
    pub width: u32,
    pub height: u32,
    pub params: ChartParams,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("invalid chart parameters: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("no plottable rows: every row has a null or non-finite value in a plotted field")]
    NoData,
}

/// True for 4-digit years and ISO `YYYY-MM` / `YYYY-MM-DD` strings.
pub fn is_temporal_text(s: &str) -> bool {
    let b = s.as_bytes();
    let digits = |r: std::ops::Range<usize>| b[r].iter().all(u8::is_ascii_digit);
    match b.len() {
        4 => digits(0..4),
        7 => digits(0..4) && b[4] == b'-' && digits(5..7),
        10 => digits(0..4) && b[4] == b'-' && digits(5..7) && b[7] == b'-' && digits(8..10),
        _ => false,
    }
}

fn is_categorical(ty: ValueType) -> bool {
    matches!(ty, ValueType::Text | ValueType::Integer)
}

fn is_ordered(table: &ResultTable, idx: usize) -> bool {
    match table.columns[idx].ty {
        ValueType::Integer | ValueType::Real => true,
        ValueType::Text => table.column_values(idx).all(|v| match v {
            Value::Text(s) => is_temporal_text(s),
            _ => true,
        }),
        ValueType::Null => false,
    }
}

/// Checks the three-channel cap and the chart-type compatibility matrix.
/// Returns every violation found.
pub fn validate_params(params: &ChartParams, table: &ResultTable) -> Result<(), Vec<String>> {
    let mut v = Vec::new();
    let dims = params.encoded_dimensions();
    if dims > MAX_DIMENSIONS {
        v.push(format!(
            "{dims} encoded dimensions exceed the cap of {MAX_DIMENSIONS} (x, y and color)"
        ));
    }
    if table.rows.is_empty() {
        v.push("result table has no rows".into());
    }
    if params.x_field == params.y_field {
        v.push("x_field and y_field must differ".into());
    }
    let lookup = |role: &str, name: &str, v: &mut Vec<String>| {
        let idx = table.column_index(name);
        if idx.is_none() {
            v.push(format!("{role} {name:?} is not a column of the result table"));
        }
        idx
    };
    let x = lookup("x_field", &params.x_field, &mut v);
    let y = lookup("y_field", &params.y_field, &mut v);
    let color = params
        .color_field
        .as_deref()
        .map(|c| (c, lookup("color_field", c, &mut v)));
    for f in &params.extra_fields {
        lookup("extra field", f, &mut v);
    }
    let ty = |i: usize| table.columns[i].ty;
    let kind = params.chart_type;

    if let Some(x) = x {
        let ok = match kind {
            ChartType::Line | ChartType::Area => is_ordered(table, x),
            ChartType::Bar | ChartType::Pie => is_categorical(ty(x)),
            ChartType::Scatter => ty(x).is_numeric(),
        };
        if !ok {
            let need = match kind {
                ChartType::Line | ChartType::Area => "an ordered (numeric or date/year) field",
                ChartType::Bar | ChartType::Pie => "a categorical (TEXT or INTEGER) field",
                ChartType::Scatter => "a numeric field",
            };
            v.push(format!(
                "{kind} chart needs {need} on x; {:?} is {}",
                params.x_field,
                ty(x)
            ));
        }
    }
    if let Some(y) = y {
        if !ty(y).is_numeric() {
            v.push(format!(
                "{kind} chart needs a numeric field on y; {:?} is {}",
                params.y_field,
                ty(y)
            ));
        } else if kind == ChartType::Pie {
            let values: Vec<f64> = table.column_values(y).filter_map(Value::as_f64).collect();
            if let Some(neg) = values.iter().find(|&&f| f < 0.0) {
                v.push(format!("pie values must be non-negative (found {neg})"));
            } else if values.iter().sum::<f64>() <= 0.0 && !table.rows.is_empty() {
                v.push("pie values sum to zero".into());
            }
        }
    }
    if let Some((name, idx)) = color {
        if kind == ChartType::Pie {
            if name != params.x_field {
                v.push("pie admits no extra color channel".into());
            }
        } else if let Some(c) = idx {
            if !is_categorical(ty(c)) {
                v.push(format!(
                    "color field {name:?} must be categorical (TEXT or INTEGER), found {}",
                    ty(c)
                ));
            }
        }
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Start and end angle of each pie slice, clockwise from 12 o'clock.
/// The last slice ends at exactly a full turn.
pub fn pie_angles(values: &[f64]) -> Vec<(f64, f64)> {
    let full = std::f64::consts::TAU;
    let total: f64 = values.iter().sum();
    let mut out = Vec::with_capacity(values.len());
    let mut cum = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let start = full * cum / total;
        cum += v;
        let end = if i + 1 == values.len() {
            full
        } else {
            full * cum / total
        };
        out.push((start, end));
    }
    out
}

/// Display list of the chart on a `CHART_WIDTH` x `CHART_HEIGHT` canvas.
pub fn scene(
    params: &ChartParams,
    table: &ResultTable,
) -> Result<Vec<scene::Prim>, RenderError> {
    validate_params(params, table).map_err(RenderError::Invalid)?;
    draw::draw(params, table)
}

pub fn render(params: &ChartParams, table: &ResultTable) -> Result<RenderedChart, RenderError> {
    let prims = scene(params, table)?;
    Ok(RenderedChart {
        svg_text: scene::to_svg(CHART_WIDTH as f64, CHART_HEIGHT as f64, &prims),
        width: CHART_WIDTH,
        height: CHART_HEIGHT,
        params: params.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AxisLabels, ColorScheme};
    use crate::query::ResultColumn;

    fn table(cols: &[(&str, ValueType)], rows: Vec<Vec<Value>>) -> ResultTable {
        ResultTable {
            columns: cols
                .iter()
                .map(|(n, t)| ResultColumn {
                    name: n.to_string(),
                    ty: *t,
                })
                .collect(),
            rows,
        }
    }

    fn params(kind: ChartType, x: &str, y: &str) -> ChartParams {
        ChartParams {
            chart_type: kind,
            x_field: x.into(),
            y_field: y.into(),
            color_field: None,
            extra_fields: vec![],
            axis_labels: AxisLabels {
                x: x.into(),
                y: y.into(),
            },
            title: format!("{y} by {x}"),
            color_scheme: ColorScheme::Categorical,
        }
    }

    fn cat_table(n: usize) -> ResultTable {
        table(
            &[("Brand", ValueType::Text), ("Sale", ValueType::Integer)],
            (0..n)
                .map(|i| vec![Value::Text(format!("B{i:02}")), Value::Int(i as i64 + 1)])
                .collect(),
        )
    }

    fn marks(svg: &str, class: &str) -> usize {
        svg.matches(&format!("class=\"mark {class}\"")).count()
    }

    #[test]
    fn bar_ok_and_three_marks() {
        let t = cat_table(3);
        let p = params(ChartType::Bar, "Brand", "Sale");
        assert_eq!(validate_params(&p, &t), Ok(()));
        let r = render(&p, &t).unwrap();
        assert_eq!(marks(&r.svg_text, "bar"), 3);
        assert_eq!((r.width, r.height), (360, 180));
        assert!(r.svg_text.starts_with("<svg "));
        assert!(!r.svg_text.contains("top 12"));
    }

    #[test]
    fn bar_caps_at_twelve() {
        let t = cat_table(15);
        let r = render(&params(ChartType::Bar, "Brand", "Sale"), &t).unwrap();
        assert_eq!(marks(&r.svg_text, "bar"), 12);
        assert!(r.svg_text.contains("top 12 of 15"));
        // the three smallest categories are the ones dropped
        assert!(!r.svg_text.contains(">B00<") && r.svg_text.contains(">B14<"));
    }

    #[test]
    fn pie_color_channel_rejected() {
        let t = table(
            &[
                ("Type", ValueType::Text),
                ("Brand", ValueType::Text),
                ("n", ValueType::Integer),
            ],
            vec![vec![Value::Text("a".into()), Value::Text("b".into()), Value::Int(1)]],
        );
        let mut p = params(ChartType::Pie, "Type", "n");
        p.color_field = Some("Brand".into());
        let err = validate_params(&p, &t).unwrap_err();
        assert!(err.contains(&"pie admits no extra color channel".to_string()));
        p.color_field = Some("Type".into());
        assert_eq!(validate_params(&p, &t), Ok(()));
    }

    #[test]
    fn scatter_with_categorical_y_rejected() {
        let t = table(
            &[("a", ValueType::Real), ("b", ValueType::Text)],
            vec![vec![Value::Real(1.0), Value::Text("x".into())]],
        );
        let err = validate_params(&params(ChartType::Scatter, "a", "b"), &t).unwrap_err();
        assert_eq!(err.len(), 1);
        assert!(err[0].contains("numeric field on y"));
    }

    #[test]
    fn violations_are_collected() {
        let t = cat_table(2);
        let mut p = params(ChartType::Scatter, "Brand", "Nope");
        p.extra_fields = vec!["Sale".into(), "Brand".into()];
        let err = validate_params(&p, &t).unwrap_err();
        assert!(err.len() >= 3, "{err:?}");
        assert!(matches!(render(&p, &t), Err(RenderError::Invalid(_))));
    }

    #[test]
    fn pie_angles_proportional() {
        let a = pie_angles(&[1.0, 1.0, 2.0]);
        let tau = std::f64::consts::TAU;
        let sweeps: Vec<f64> = a.iter().map(|(s, e)| (e - s) / tau).collect();
        for (got, want) in sweeps.iter().zip([0.25, 0.25, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(a[2].1, tau);
    }

    #[test]
    fn negative_pie_rejected() {
        let t = table(
            &[("k", ValueType::Text), ("v", ValueType::Integer)],
            vec![
                vec![Value::Text("a".into()), Value::Int(3)],
                vec![Value::Text("b".into()), Value::Int(-1)],
            ],
        );
        let err = render(&params(ChartType::Pie, "k", "v"), &t).unwrap_err();
        assert!(err.to_string().contains("non-negative"));
    }

    #[test]
    fn all_types_render_deterministically() {
        let t = table(
            &[
                ("Year", ValueType::Integer),
                ("Sale", ValueType::Real),
                ("Type", ValueType::Text),
            ],
            (0..20)
                .map(|i| {
                    vec![
                        Value::Int(2000 + i / 2),
                        Value::Real((i * 7 % 11) as f64 * 1.5),
                        Value::Text(if i % 2 == 0 { "SUV" } else { "Sedan" }.into()),
                    ]
                })
                .collect(),
        );
        for kind in ChartType::ALL {
            let (x, y) = match kind {
                ChartType::Pie => ("Type", "Sale"),
                _ => ("Year", "Sale"),
            };
            let mut p = params(kind, x, y);
            if kind != ChartType::Pie {
                p.color_field = Some("Type".into());
            }
            let a = render(&p, &t).unwrap_or_else(|e| panic!("{kind}: {e}"));
            let b = render(&p, &t).unwrap();
            assert_eq!(a.svg_text, b.svg_text);
            assert!(a.svg_text.contains("class=\"mark "), "{kind}");
        }
    }

    #[test]
    fn temporal_text_x_for_line() {
        let t = table(
            &[("month", ValueType::Text), ("n", ValueType::Integer)],
            vec![
                vec![Value::Text("2020-02".into()), Value::Int(4)],
                vec![Value::Text("2020-01".into()), Value::Int(2)],
            ],
        );
        let r = render(&params(ChartType::Line, "month", "n"), &t).unwrap();
        let first = r.svg_text.find(">2020-01<").unwrap();
        let second = r.svg_text.find(">2020-02<").unwrap();
        assert!(first < second);
        let bad = table(
            &[("name", ValueType::Text), ("n", ValueType::Integer)],
            vec![vec![Value::Text("Ford".into()), Value::Int(1)]],
        );
        assert!(validate_params(&params(ChartType::Line, "name", "n"), &bad).is_err());
    }

    #[test]
    fn null_rows_skipped() {
        let t = table(
            &[("k", ValueType::Text), ("v", ValueType::Integer)],
            vec![
                vec![Value::Null, Value::Int(3)],
                vec![Value::Text("b".into()), Value::Null],
            ],
        );
        assert_eq!(
            render(&params(ChartType::Bar, "k", "v"), &t),
            Err(RenderError::NoData)
        );
    }
}
