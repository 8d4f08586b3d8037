//! Renders one query result as each chart type and writes the SVG files.
//!
//! cargo run --example render_chart -- /tmp/charts

use factflow::chart::{render, validate_params};
use factflow::datasets;
use factflow::model::{AxisLabels, ChartParams, ChartType, ColorScheme};
use factflow::query::run_sql;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/charts".into()));
    std::fs::create_dir_all(&out)?;
    let ds = datasets::carsales();
    let table = run_sql(
        r#"SELECT "Type", SUM("Sale") AS "Total Sale" FROM "CarSales" GROUP BY "Type" ORDER BY "Total Sale" DESC"#,
        &ds,
    )?;
    for ty in ChartType::ALL {
        let params = ChartParams {
            chart_type: ty,
            x_field: "Type".into(),
            y_field: "Total Sale".into(),
            color_field: None,
            extra_fields: vec![],
            axis_labels: AxisLabels { x: "Type".into(), y: "Units sold".into() },
            title: format!("Sales by type ({ty})"),
            color_scheme: ColorScheme::Categorical,
        };
        if let Err(problems) = validate_params(&params, &table) {
            println!("{ty}: rejected: {}", problems.join("; "));
            continue;
        }
        let chart = render(&params, &table)?;
        let path = out.join(format!("{ty}.svg"));
        std::fs::write(&path, &chart.svg_text)?;
        println!("{ty}: {}x{} -> {}", chart.width, chart.height, path.display());
    }
    Ok(())
}
