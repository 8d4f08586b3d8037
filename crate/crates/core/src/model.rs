//! Types shared by the workers, the layout engine and the sheet service.

use crate::query::ResultTable;
use serde::{Deserialize, Serialize};
use std::fmt;

/// The eleven data-fact categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactType {
    Value,
    Difference,
    Proportion,
    Trend,
    Categorization,
    Distribution,
    Rank,
    Aggregation,
    Extreme,
    Outlier,
    Association,
}

impl FactType {
    pub const ALL: [FactType; 11] = [
        FactType::Value,
        FactType::Difference,
        FactType::Proportion,
        FactType::Trend,
        FactType::Categorization,
        FactType::Distribution,
        FactType::Rank,
        FactType::Aggregation,
        FactType::Extreme,
        FactType::Outlier,
        FactType::Association,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FactType::Value => "value",
            FactType::Difference => "difference",
            FactType::Proportion => "proportion",
            FactType::Trend => "trend",
            FactType::Categorization => "categorization",
            FactType::Distribution => "distribution",
            FactType::Rank => "rank",
            FactType::Aggregation => "aggregation",
            FactType::Extreme => "extreme",
            FactType::Outlier => "outlier",
            FactType::Association => "association",
        }
    }
}

impl fmt::Display for FactType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactIdea {
    pub id: String,
    pub fact_type: FactType,
    pub content: String,
    pub significance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartType {
    Line,
    Bar,
    Scatter,
    Pie,
    Area,
}

impl ChartType {
    pub const ALL: [ChartType; 5] = [
        ChartType::Line,
        ChartType::Bar,
        ChartType::Scatter,
        ChartType::Pie,
        ChartType::Area,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChartType::Line => "line",
            ChartType::Bar => "bar",
            ChartType::Scatter => "scatter",
            ChartType::Pie => "pie",
            ChartType::Area => "area",
        }
    }
}

impl fmt::Display for ChartType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Named palette; the agent picks a name, never raw colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorScheme {
    #[default]
    Categorical,
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AxisLabels {
    pub x: String,
    pub y: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartParams {
    pub chart_type: ChartType,
    pub x_field: String,
    pub y_field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_field: Option<String>,
    /// Further encoded fields (size, shape, ...) a proposal asked for. Any
    /// entry here pushes the chart past the three-channel cap.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_fields: Vec<String>,
    #[serde(default)]
    pub axis_labels: AxisLabels,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub color_scheme: ColorScheme,
}

impl ChartParams {
    pub fn encoded_dimensions(&self) -> usize {
        2 + usize::from(self.color_field.is_some()) + self.extra_fields.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalQa {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactCard {
    pub idea: FactIdea,
    pub sql: String,
    pub table: ResultTable,
    pub chart: ChartParams,
    /// Block-store path of the rendered chart SVG.
    pub chart_block: String,
    pub statement: String,
    #[serde(default)]
    pub causal_qas: Vec<CausalQa>,
}

impl FactCard {
    pub fn id(&self) -> &str {
        &self.idea.id
    }
}

pub const INTRODUCTION_ID: &str = "intro";
pub const INTRODUCTION_TOPIC: &str = "Introduction";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub id: String,
    pub topic: String,
    pub fact_ids: Vec<String>,
    /// Free text shown as the first card of the section (the Introduction
    /// summary).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Section {
    /// Number of fixed-height cards: the note (if any) plus every fact.
    pub fn card_count(&self) -> usize {
        usize::from(self.note.is_some()) + self.fact_ids.len()
    }

    pub fn is_introduction(&self) -> bool {
        self.id == INTRODUCTION_ID
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetStructure {
    pub title: String,
    pub sections: Vec<Section>,
}

impl SheetStructure {
    pub fn section(&self, id: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.id == id)
    }

    /// Fact ids in display order.
    pub fn fact_ids(&self) -> impl Iterator<Item = &str> {
        self.sections
            .iter()
            .flat_map(|s| s.fact_ids.iter().map(String::as_str))
    }
}
