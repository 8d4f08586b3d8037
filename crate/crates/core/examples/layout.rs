//! Splits sections with the given fact counts into two balanced columns.
//!
//! cargo run --example layout -- 0 3 1 4 2

use factflow::layout::{calculate_score, split_columns, LayoutMode, SectionBlock};

fn main() {
    let counts: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let counts = if counts.is_empty() { vec![0, 2, 2, 3] } else { counts };
    // the first entry is the Introduction; its summary takes one card
    let blocks: Vec<SectionBlock> = counts
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let name = if i == 0 { "intro".to_string() } else { format!("s{i}") };
            SectionBlock::new(name, if i == 0 { n.max(1) } else { n })
        })
        .collect();
    for mode in [LayoutMode::ExhaustivePermuting, LayoutMode::OrderPreserving] {
        let plan = split_columns(&blocks, mode).expect("at most eight sections");
        let (l, r) = plan.column_heights();
        println!("{mode:?}: left {l}, right {r}, difference {}", plan.best_diff);
        for (s, left) in plan.ordered_sections.iter().zip(&plan.column_flags) {
            let side = if *left { "left " } else { "right" };
            println!("  {side} {:<6} {} fact(s), score {}", s.section_ref, s.fact_count, s.score);
        }
    }
    println!("card score for 1..=4 facts: {:?}", (1..=4).map(calculate_score).collect::<Vec<_>>());
}
