//! Whole-sheet export. One display list feeds both the SVG and the PDF
//! writer, so the two formats agree on geometry.

use super::{FactSheet, SheetError};
use crate::chart::scene::{Anchor, Prim, BLACK, GREY, LIGHT, WHITE};
use crate::chart::{scene, text, CHART_HEIGHT, CHART_WIDTH};
use crate::layout::{compose_page, CardKind, Rect, H_S};
use crate::model::FactCard;
use std::str::FromStr;

const TITLE_H: f64 = 56.0;
const BOTTOM_MARGIN: f64 = 8.0;
/// Chart box inside a fact card.
const CHART_BOX_W: f64 = 240.0;
const STATEMENT_X: f64 = 258.0;
const STATEMENT_W: f64 = 132.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Svg,
    Pdf,
}

impl ExportFormat {
    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::Svg => "image/svg+xml",
            ExportFormat::Pdf => "application/pdf",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = SheetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "svg" => Ok(ExportFormat::Svg),
            "pdf" => Ok(ExportFormat::Pdf),
            other => Err(SheetError::Validation(format!(
                "unknown export format {other:?}; use svg or pdf"
            ))),
        }
    }
}

fn text_at(x: f64, y: f64, size: f64, bold: bool, fill: scene::Color, content: String) -> Prim {
    Prim::Text {
        x,
        y,
        size,
        anchor: Anchor::Start,
        bold,
        fill,
        content,
    }
}

#[derive(Clone, Copy)]
struct Style {
    size: f64,
    leading: f64,
    bold: bool,
    fill: scene::Color,
}

const STATEMENT: Style = Style {
    size: 9.0,
    leading: 11.5,
    bold: false,
    fill: BLACK,
};
const NOTE: Style = Style {
    size: 10.0,
    leading: 14.0,
    bold: false,
    fill: BLACK,
};

/// Wrapped paragraph starting at baseline `y`.
fn paragraph(out: &mut Vec<Prim>, s: &str, (x, y): (f64, f64), max_w: f64, max_lines: usize, st: Style) {
    for (i, l) in text::wrap_lines(s, st.size, max_w, max_lines).into_iter().enumerate() {
        out.push(text_at(x, y + i as f64 * st.leading, st.size, st.bold, st.fill, l));
    }
}

fn card_frame(r: &Rect) -> Prim {
    Prim::Rect {
        x: r.x as f64 + 6.0,
        y: r.y as f64 + 4.0,
        w: r.w as f64 - 12.0,
        h: r.h as f64 - 8.0,
        fill: Some(WHITE),
        stroke: Some(LIGHT),
        class: "card",
    }
}

fn fact_card(out: &mut Vec<Prim>, r: &Rect, card: &FactCard) {
    let (x, y) = (r.x as f64, r.y as f64);
    out.push(card_frame(r));
    let scale = CHART_BOX_W / CHART_WIDTH as f64;
    let children = match crate::chart::scene(&card.chart, &card.table) {
        Ok(prims) => prims,
        Err(e) => vec![text_at(12.0, 24.0, 12.0, false, GREY, format!("chart unavailable: {e}"))],
    };
    out.push(Prim::Group {
        dx: x + 10.0,
        dy: y + 8.0,
        scale,
        class: "chart",
        children,
    });
    let chart_bottom = y + 8.0 + CHART_HEIGHT as f64 * scale;
    paragraph(out, &card.statement, (x + STATEMENT_X, y + 22.0), STATEMENT_W, 9, STATEMENT);
    let mut qy = chart_bottom + 12.0;
    for qa in &card.causal_qas {
        let w = r.w as f64 - 28.0;
        out.push(text_at(x + 14.0, qy, 8.0, true, BLACK, text::truncate(&qa.question, 8.0, w)));
        out.push(text_at(x + 14.0, qy + 10.0, 8.0, false, GREY, text::truncate(&qa.answer, 8.0, w)));
        qy += 20.0;
    }
}

/// Display list and page size for a sheet.
pub fn sheet_scene(sheet: &FactSheet) -> Result<(f64, f64, Vec<Prim>), SheetError> {
    let page = compose_page(&sheet.plan, &sheet.structure)?;
    let width = page.width as f64;
    let height = TITLE_H + page.height as f64 + BOTTOM_MARGIN;
    let mut out = vec![Prim::Rect {
        x: 0.0,
        y: 0.0,
        w: width,
        h: height,
        fill: Some(WHITE),
        stroke: None,
        class: "",
    }];
    out.push(text_at(16.0, 34.0, 20.0, true, BLACK, text::truncate(&sheet.structure.title, 20.0, width - 32.0)));
    out.push(Prim::Line {
        x1: 16.0,
        y1: TITLE_H - 8.0,
        x2: width - 16.0,
        y2: TITLE_H - 8.0,
        stroke: BLACK,
        width: 1.5,
    });
    let mut body = Vec::new();
    for sg in &page.sections {
        let section = sheet
            .structure
            .section(&sg.section_id)
            .expect("page geometry comes from the structure");
        let (x, y, w) = (sg.rect.x as f64, sg.rect.y as f64, sg.rect.w as f64);
        body.push(text_at(x + 12.0, y + 26.0, 13.0, true, BLACK, text::truncate(&section.topic, 13.0, w - 24.0)));
        body.push(Prim::Line {
            x1: x + 12.0,
            y1: y + H_S as f64 - 6.0,
            x2: x + w - 12.0,
            y2: y + H_S as f64 - 6.0,
            stroke: LIGHT,
            width: 1.0,
        });
        for c in &sg.cards {
            match &c.kind {
                CardKind::Note => {
                    body.push(card_frame(&c.rect));
                    let note = section.note.as_deref().unwrap_or_default();
                    let at = (c.rect.x as f64 + 16.0, c.rect.y as f64 + 24.0);
                    paragraph(&mut body, note, at, c.rect.w as f64 - 32.0, 11, NOTE);
                }
                CardKind::Fact(id) => {
                    let card = sheet
                        .facts
                        .get(id)
                        .ok_or_else(|| SheetError::Validation(format!("fact {id} has no card")))?;
                    fact_card(&mut body, &c.rect, card);
                }
            }
        }
    }
    out.push(Prim::Group {
        dx: 0.0,
        dy: TITLE_H,
        scale: 1.0,
        class: "",
        children: body,
    });
    Ok((width, height, out))
}

pub fn export_svg(sheet: &FactSheet) -> Result<String, SheetError> {
    let (w, h, prims) = sheet_scene(sheet)?;
    Ok(scene::to_svg(w, h, &prims))
}

pub fn export_pdf(sheet: &FactSheet) -> Result<Vec<u8>, SheetError> {
    let (w, h, prims) = sheet_scene(sheet)?;
    Ok(crate::chart::pdf::to_pdf(w, h, &prims))
}

pub fn export(sheet: &FactSheet, format: ExportFormat) -> Result<Vec<u8>, SheetError> {
    match format {
        ExportFormat::Svg => export_svg(sheet).map(String::into_bytes),
        ExportFormat::Pdf => export_pdf(sheet),
    }
}
