//! Named palettes; charts refer to them by `ColorScheme`, never raw colors.

use super::scene::Color;
use crate::model::ColorScheme;

pub const CATEGORICAL: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac", "#1f77b4", "#8c564b",
];

const SEQ_LIGHT: Color = Color(0xc6, 0xdb, 0xef);
const SEQ_DARK: Color = Color(0x08, 0x30, 0x6b);
const SEQ_SINGLE: Color = Color(0x21, 0x71, 0xb5);

fn lerp(a: Color, b: Color, t: f64) -> Color {
    let ch = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * t).round() as u8;
    Color(ch(a.0, b.0), ch(a.1, b.1), ch(a.2, b.2))
}

/// `n` colors from the named scheme; categorical colors cycle past 12.
pub fn colors(scheme: ColorScheme, n: usize) -> Vec<Color> {
    match scheme {
        ColorScheme::Categorical => (0..n)
            .map(|i| Color::hex(CATEGORICAL[i % CATEGORICAL.len()]))
            .collect(),
        ColorScheme::Sequential if n <= 1 => vec![SEQ_SINGLE; n],
        ColorScheme::Sequential => (0..n)
            .map(|i| lerp(SEQ_LIGHT, SEQ_DARK, i as f64 / (n - 1) as f64))
            .collect(),
    }
}

/// Washed-out variant used for area fills.
pub fn tint(c: Color) -> Color {
    lerp(c, Color(0xff, 0xff, 0xff), 0.6)
}
