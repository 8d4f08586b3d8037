//! Two-column page layout: the exhaustive section split and the page
//! geometry derived from it.

use crate::model::SheetStructure;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Section header height.
pub const H_S: u64 = 40;
/// Fixed fact-card height.
pub const H_F: u64 = 180;
pub const PAGE_WIDTH: u64 = 800;
pub const COLUMN_WIDTH: u64 = PAGE_WIDTH / 2;
/// Largest section count searched exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error("cannot lay out an empty section list")]
    Empty,
    #[error("layout plan does not match the sheet structure: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionBlock {
    pub section_ref: String,
    pub fact_count: usize,
    pub score: u64,
}

impl SectionBlock {
    pub fn new(section_ref: impl Into<String>, fact_count: usize) -> Self {
        Self {
            section_ref: section_ref.into(),
            fact_count,
            score: calculate_score(fact_count),
        }
    }
}

pub fn calculate_score(fact_count: usize) -> u64 {
    H_S + fact_count as u64 * H_F
}

/// Blocks for every section, in structure order. Cards (facts plus an
/// optional note) all count at the fixed fact height.
pub fn blocks_for(structure: &SheetStructure) -> Vec<SectionBlock> {
    structure
        .sections
        .iter()
        .map(|s| SectionBlock::new(s.id.clone(), s.card_count()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutMode {
    /// Search every permutation of the non-leading sections and every
    /// column subset.
    #[default]
    ExhaustivePermuting,
    /// Keep the given section order and search column subsets only.
    OrderPreserving,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutPlan {
    pub ordered_sections: Vec<SectionBlock>,
    /// `true` = left column, parallel to `ordered_sections`.
    pub column_flags: Vec<bool>,
    pub best_diff: u64,
}

impl LayoutPlan {
    pub fn column_heights(&self) -> (u64, u64) {
        let mut left = 0;
        let mut right = 0;
        for (s, &l) in self.ordered_sections.iter().zip(&self.column_flags) {
            if l {
                left += s.score;
            } else {
                right += s.score;
            }
        }
        (left, right)
    }
}

/// Rearranges `p` into the next lexicographic permutation; false when `p`
/// was the last one.
fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Advances `c` (strictly increasing indices drawn from `1..n`) to the
/// next combination of the same size; false after the last.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Calls `f` for every subset of positions `1..n`, by increasing size and
/// lexicographically within a size.
fn for_each_subset(n: usize, mut f: impl FnMut(&[usize])) {
    for size in 0..n {
        let mut comb: Vec<usize> = (1..=size).collect();
        loop {
            f(&comb);
            if size == 0 || !next_combination(&mut comb, n) {
                break;
            }
        }
    }
}

/// Splits sections over two columns, minimizing the height difference.
///
/// The first section stays first and on the left. For up to
/// [`EXHAUSTIVE_LIMIT`] sections every permutation of the rest and every
/// column subset is scored; the first strict improvement wins, so the plan
/// is unique. Larger inputs fall back to a greedy, order-preserving split.
pub fn split_columns(sections: &[SectionBlock], mode: LayoutMode) -> Result<LayoutPlan, LayoutError> {
    let n = sections.len();
    if n == 0 {
        return Err(LayoutError::Empty);
    }
    if n > EXHAUSTIVE_LIMIT {
        return Ok(greedy(sections));
    }

    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<(u64, Vec<usize>, Vec<usize>)> = None;
    loop {
        for_each_subset(n, |comb| {
            let mut left = sections[perm[0]].score;
            let mut right = 0;
            let mut ci = 0;
            for (i, &s) in perm.iter().enumerate().skip(1) {
                if ci < comb.len() && comb[ci] == i {
                    left += sections[s].score;
                    ci += 1;
                } else {
                    right += sections[s].score;
                }
            }
            let diff = left.abs_diff(right);
            if best.as_ref().is_none_or(|(d, _, _)| diff < *d) {
                best = Some((diff, perm.clone(), comb.to_vec()));
            }
        });
        if mode == LayoutMode::OrderPreserving || !next_permutation(&mut perm[1..]) {
            break;
        }
    }

    let (best_diff, perm, comb) = best.expect("at least one layout evaluated");
    Ok(LayoutPlan {
        ordered_sections: perm.iter().map(|&i| sections[i].clone()).collect(),
        column_flags: (0..n).map(|i| i == 0 || comb.contains(&i)).collect(),
        best_diff,
    })
}

fn greedy(sections: &[SectionBlock]) -> LayoutPlan {
    let mut left = 0;
    let mut right = 0;
    let mut flags = Vec::with_capacity(sections.len());
    for (i, s) in sections.iter().enumerate() {
        if i == 0 || left <= right {
            left += s.score;
            flags.push(true);
        } else {
            right += s.score;
            flags.push(false);
        }
    }
    LayoutPlan {
        ordered_sections: sections.to_vec(),
        column_flags: flags,
        best_diff: left.abs_diff(right),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: u64,
    pub y: u64,
    pub w: u64,
    pub h: u64,
}

impl Rect {
    pub fn contains(&self, o: &Rect) -> bool {
        o.x >= self.x && o.y >= self.y && o.x + o.w <= self.x + self.w && o.y + o.h <= self.y + self.h
    }

    pub fn overlaps(&self, o: &Rect) -> bool {
        self.x < o.x + o.w && o.x < self.x + self.w && self.y < o.y + o.h && o.y < self.y + self.h
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CardKind {
    Note,
    Fact(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardGeometry {
    pub kind: CardKind,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionGeometry {
    pub section_id: String,
    pub left: bool,
    pub rect: Rect,
    pub cards: Vec<CardGeometry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageGeometry {
    pub width: u64,
    pub height: u64,
    pub sections: Vec<SectionGeometry>,
}

/// Absolute rectangles for every section and card.
pub fn compose_page(plan: &LayoutPlan, structure: &SheetStructure) -> Result<PageGeometry, LayoutError> {
    if plan.ordered_sections.len() != structure.sections.len() {
        return Err(LayoutError::Mismatch(format!(
            "plan has {} sections, structure has {}",
            plan.ordered_sections.len(),
            structure.sections.len()
        )));
    }
    let mut y = [0u64; 2];
    let mut sections = Vec::with_capacity(plan.ordered_sections.len());
    for (block, &left) in plan.ordered_sections.iter().zip(&plan.column_flags) {
        let section = structure
            .section(&block.section_ref)
            .ok_or_else(|| LayoutError::Mismatch(format!("unknown section {:?}", block.section_ref)))?;
        if section.card_count() != block.fact_count {
            return Err(LayoutError::Mismatch(format!(
                "section {:?} has {} cards, plan expects {}",
                section.id,
                section.card_count(),
                block.fact_count
            )));
        }
        let col = usize::from(!left);
        let x = if left { 0 } else { COLUMN_WIDTH };
        let top = y[col];
        let mut kinds: Vec<CardKind> = Vec::new();
        if section.note.is_some() {
            kinds.push(CardKind::Note);
        }
        kinds.extend(section.fact_ids.iter().cloned().map(CardKind::Fact));
        let cards = kinds
            .into_iter()
            .enumerate()
            .map(|(i, kind)| CardGeometry {
                kind,
                rect: Rect {
                    x,
                    y: top + H_S + i as u64 * H_F,
                    w: COLUMN_WIDTH,
                    h: H_F,
                },
            })
            .collect();
        sections.push(SectionGeometry {
            section_id: section.id.clone(),
            left,
            rect: Rect {
                x,
                y: top,
                w: COLUMN_WIDTH,
                h: block.score,
            },
            cards,
        });
        y[col] += block.score;
    }
    Ok(PageGeometry {
        width: PAGE_WIDTH,
        height: y[0].max(y[1]),
        sections,
    })
}
