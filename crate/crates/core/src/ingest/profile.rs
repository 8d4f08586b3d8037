use super::{parse_real, Column, Dataset, IngestError};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnProfile {
    Numeric(NumericProfile),
    String(StringProfile),
}

impl ColumnProfile {
    pub fn null_count(&self) -> usize {
        match self {
            ColumnProfile::Numeric(p) => p.null_count,
            ColumnProfile::String(p) => p.null_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericProfile {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
    pub null_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StringProfile {
    pub count: usize,
    pub unique_count: usize,
    /// At most five entries, most frequent first, ties by value.
    pub top_values: Vec<(String, usize)>,
    pub null_count: usize,
}

pub const TOP_VALUES: usize = 5;

/// Linear interpolation between closest ranks over sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn profile_column(col: &Column) -> Result<ColumnProfile, IngestError> {
    if !col.is_classified() {
        return Err(IngestError::Unclassified(col.name.clone()));
    }
    let null_count = col.cells.iter().filter(|c| c.is_none()).count();
    if null_count == col.cells.len() {
        return Err(IngestError::AllNull(col.name.clone()));
    }

    if col.data_class.is_numeric() {
        let mut values: Vec<f64> = col.non_null().filter_map(parse_real).collect();
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        Ok(ColumnProfile::Numeric(NumericProfile {
            count: n,
            min: values[0],
            max: values[n - 1],
            mean,
            median: quantile_sorted(&values, 0.5),
            p25: quantile_sorted(&values, 0.25),
            p75: quantile_sorted(&values, 0.75),
            null_count,
        }))
    } else {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for v in col.non_null() {
            *counts.entry(v).or_default() += 1;
        }
        let unique_count = counts.len();
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(ColumnProfile::String(StringProfile {
            count: col.cells.len() - null_count,
            unique_count,
            top_values: ranked
                .into_iter()
                .take(TOP_VALUES)
                .map(|(v, c)| (v.to_string(), c))
                .collect(),
            null_count,
        }))
    }
}

/// Profiles of every column, in column order.
pub fn profile_dataset(ds: &Dataset) -> Result<Vec<ColumnProfile>, IngestError> {
    ds.columns.iter().map(profile_column).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ClassOrigin, DataClass};

    fn col(class: DataClass, values: &[&str]) -> Column {
        let mut c = Column::raw(
            "c",
            values
                .iter()
                .map(|v| (!v.is_empty()).then(|| v.to_string()))
                .collect(),
        );
        c.data_class = class;
        c.origin = ClassOrigin::Inferred;
        c
    }

    #[test]
    fn numeric_quartiles() {
        let ColumnProfile::Numeric(p) = profile_column(&col(DataClass::Discrete, &["4", "1", "3", "2"])).unwrap() else {
            panic!()
        };
        assert_eq!((p.min, p.max, p.mean, p.median), (1.0, 4.0, 2.5, 2.5));
        assert_eq!((p.p25, p.p75), (1.75, 3.25));
    }

    #[test]
    fn single_value() {
        let ColumnProfile::Numeric(p) = profile_column(&col(DataClass::Continuous, &["7"])).unwrap() else {
            panic!()
        };
        for v in [p.min, p.max, p.mean, p.median, p.p25, p.p75] {
            assert_eq!(v, 7.0);
        }
    }

    #[test]
    fn string_top_values() {
        let ColumnProfile::String(p) =
            profile_column(&col(DataClass::Nominal, &["a", "b", "a", "c", "a", "b", ""])).unwrap()
        else {
            panic!()
        };
        assert_eq!(p.unique_count, 3);
        assert_eq!(p.null_count, 1);
        assert_eq!(
            p.top_values,
            vec![("a".into(), 3), ("b".into(), 2), ("c".into(), 1)]
        );
    }

    #[test]
    fn top_values_capped_with_ties_by_value() {
        let ColumnProfile::String(p) =
            profile_column(&col(DataClass::Nominal, &["g", "f", "e", "d", "c", "b", "a", "a"])).unwrap()
        else {
            panic!()
        };
        let names: Vec<_> = p.top_values.iter().map(|(v, _)| v.as_str()).collect();
        assert_eq!(names, ["a", "b", "c", "d", "e"]);
    }

    #[test]
    fn nulls_excluded() {
        let ColumnProfile::Numeric(p) = profile_column(&col(DataClass::Discrete, &["1", "", "3"])).unwrap() else {
            panic!()
        };
        assert_eq!(p.mean, 2.0);
        assert_eq!(p.null_count, 1);
    }

    #[test]
    fn all_null_errors() {
        assert!(matches!(
            profile_column(&col(DataClass::Discrete, &["", ""])),
            Err(IngestError::AllNull(_))
        ));
    }
}
