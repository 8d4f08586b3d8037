use super::EntityType;
use std::sync::OnceLock;

/// An ordered vocabulary that marks a string column as ordinal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownScale {
    pub name: &'static str,
    pub levels: Vec<&'static str>,
}

const SCALE_FILES: &[(&str, &str)] = &[
    ("letter_grades", include_str!("../../assets/scales/letter_grades.txt")),
    ("likert", include_str!("../../assets/scales/likert.txt")),
    ("months", include_str!("../../assets/scales/months.txt")),
    ("months_short", include_str!("../../assets/scales/months_short.txt")),
    ("tshirt_sizes", include_str!("../../assets/scales/tshirt_sizes.txt")),
    ("levels", include_str!("../../assets/scales/levels.txt")),
];

fn lines(text: &'static str) -> Vec<&'static str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).collect()
}

/// Bundled scales in match priority order.
pub fn known_scales() -> &'static [KnownScale] {
    static SCALES: OnceLock<Vec<KnownScale>> = OnceLock::new();
    SCALES.get_or_init(|| {
        SCALE_FILES
            .iter()
            .map(|(name, text)| KnownScale {
                name,
                levels: lines(text),
            })
            .collect()
    })
}

/// Substitution pool for an entity type; empty for generic tokens.
pub fn gazetteer(entity: EntityType) -> &'static [&'static str] {
    static COUNTRIES: OnceLock<Vec<&str>> = OnceLock::new();
    static CITIES: OnceLock<Vec<&str>> = OnceLock::new();
    static COMPANIES: OnceLock<Vec<&str>> = OnceLock::new();
    match entity {
        EntityType::Country => COUNTRIES
            .get_or_init(|| lines(include_str!("../../assets/gazetteers/countries.txt"))),
        EntityType::City => {
            CITIES.get_or_init(|| lines(include_str!("../../assets/gazetteers/cities.txt")))
        }
        EntityType::Company => COMPANIES
            .get_or_init(|| lines(include_str!("../../assets/gazetteers/companies.txt"))),
        EntityType::GenericToken => &[],
    }
}
