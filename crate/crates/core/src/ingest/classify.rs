use super::assets::{gazetteer, known_scales};
use super::{parse_int, parse_real, ClassOrigin, Column, DataClass, Dataset, EntityType, IngestError};
use regex::Regex;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::OnceLock;

pub type ClassOverrides = BTreeMap<String, DataClass>;

/// Assigns a data class to every column.
///
/// Overrides win over inference, and a column that was overridden in an
/// earlier call keeps its class, so classifying twice is a no-op.
pub fn classify_columns(
    ds: &Dataset,
    overrides: Option<&ClassOverrides>,
) -> Result<Dataset, IngestError> {
    if let Some(ov) = overrides {
        if let Some(missing) = ov.keys().find(|k| ds.column(k).is_none()) {
            return Err(IngestError::UnknownColumn(missing.clone()));
        }
    }
    let columns = ds
        .columns
        .iter()
        .map(|col| match overrides.and_then(|ov| ov.get(&col.name)) {
            Some(&class) => apply_override(col, class),
            None if col.origin == ClassOrigin::Override => Ok(col.clone()),
            None => Ok(infer(col)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset {
        name: ds.name.clone(),
        columns,
        row_count: ds.row_count,
    })
}

fn iso_date() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2})?)?$").unwrap())
}

fn with_class(col: &Column, class: DataClass, origin: ClassOrigin) -> Column {
    Column {
        name: col.name.clone(),
        data_class: class,
        origin,
        cells: col.cells.clone(),
        entity_type: None,
        ordinal_pool: None,
    }
}

fn infer(col: &Column) -> Column {
    let distinct = col.distinct_values();
    let origin = ClassOrigin::Inferred;
    if !distinct.is_empty() {
        if distinct.iter().all(|v| parse_int(v).is_some()) {
            return with_class(col, DataClass::Discrete, origin);
        }
        if distinct.iter().all(|v| parse_real(v).is_some()) {
            return with_class(col, DataClass::Continuous, origin);
        }
        if let Some(pool) = ordinal_pool_for(&distinct) {
            let mut out = with_class(col, DataClass::Ordinal, origin);
            out.ordinal_pool = Some(pool);
            return out;
        }
    }
    let mut out = with_class(col, DataClass::Nominal, origin);
    out.entity_type = Some(infer_entity(&col.name, &distinct));
    out
}

/// Known-scale levels if every value belongs to one scale, otherwise the
/// sorted observed values when they are all ISO dates.
fn ordinal_pool_for(distinct: &[&str]) -> Option<Vec<String>> {
    if let Some(scale) = matching_scale(distinct) {
        return Some(scale);
    }
    distinct
        .iter()
        .all(|v| iso_date().is_match(v.trim()))
        .then(|| sorted_distinct(distinct))
}

fn matching_scale(distinct: &[&str]) -> Option<Vec<String>> {
    known_scales()
        .iter()
        .find(|scale| distinct.iter().all(|v| scale.levels.contains(v)))
        .map(|scale| scale.levels.iter().map(|l| l.to_string()).collect())
}

fn sorted_distinct(distinct: &[&str]) -> Vec<String> {
    distinct
        .iter()
        .map(|v| v.to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

const COMPANY_SUFFIXES: &[&str] = &[
    " inc", " inc.", " ltd", " ltd.", " llc", " corp", " corp.", " co.", " gmbh", " plc",
    " group", " studios", " pictures", " entertainment", " motors",
];

fn infer_entity(name: &str, distinct: &[&str]) -> EntityType {
    let lname = name.to_lowercase();
    if lname.contains("country") || lname.contains("nation") {
        return EntityType::Country;
    }
    if lname.contains("city") || lname.contains("town") {
        return EntityType::City;
    }
    if ["studio", "company", "brand", "manufacturer", "publisher", "distributor"]
        .iter()
        .any(|k| lname.contains(k))
    {
        return EntityType::Company;
    }
    if distinct.is_empty() {
        return EntityType::GenericToken;
    }
    for entity in [EntityType::Country, EntityType::City] {
        let pool: HashSet<&str> = gazetteer(entity).iter().copied().collect();
        if distinct.iter().all(|v| pool.contains(v.trim())) {
            return entity;
        }
    }
    if distinct.iter().all(|v| {
        let l = v.to_lowercase();
        COMPANY_SUFFIXES.iter().any(|s| l.ends_with(s))
    }) {
        return EntityType::Company;
    }
    EntityType::GenericToken
}

fn apply_override(col: &Column, class: DataClass) -> Result<Column, IngestError> {
    let bad = |value: &str| IngestError::BadOverride {
        column: col.name.clone(),
        class,
        value: value.to_string(),
    };
    let distinct = col.distinct_values();
    let mut out = with_class(col, class, ClassOrigin::Override);
    match class {
        DataClass::Discrete => {
            if let Some(v) = distinct.iter().find(|v| parse_int(v).is_none()) {
                return Err(bad(v));
            }
        }
        DataClass::Continuous => {
            if let Some(v) = distinct.iter().find(|v| parse_real(v).is_none()) {
                return Err(bad(v));
            }
        }
        DataClass::Ordinal => {
            let pool = matching_scale(&distinct).unwrap_or_else(|| {
                // numeric levels sort by value, everything else lexically
                if distinct.iter().all(|v| parse_real(v).is_some()) {
                    let mut levels: Vec<String> = sorted_distinct(&distinct);
                    levels.sort_by(|a, b| {
                        parse_real(a).unwrap().total_cmp(&parse_real(b).unwrap())
                    });
                    levels
                } else {
                    sorted_distinct(&distinct)
                }
            });
            out.ordinal_pool = Some(pool);
        }
        DataClass::Nominal => {
            out.entity_type = Some(infer_entity(&col.name, &distinct));
        }
    }
    Ok(out)
}
