use serde::{Deserialize, Serialize};

use super::{AnalyticFamily, Cell, StepFunction};
use crate::error::{Error, Result};
use crate::seqcore::IndexSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceRecord {
    pub k: i64,
    pub cells: Vec<Cell>,
}

/// On-disk form:
/// `{"index_set": "Z", "pieces": [{"k": 0, "cells": [{"width": 1.0, "value": 2.0}]}], "family": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    #[serde(default = "default_index_set")]
    pub index_set: IndexSet,
    #[serde(default)]
    pub pieces: Vec<PieceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<AnalyticFamily>,
}

fn default_index_set() -> IndexSet {
    IndexSet::Naturals
}

impl From<&StepFunction> for StepRecord {
    fn from(g: &StepFunction) -> Self {
        Self {
            index_set: g.index_set,
            pieces: g.pieces.iter().map(|(&k, cells)| PieceRecord { k, cells: cells.clone() }).collect(),
            family: g.family,
        }
    }
}

impl TryFrom<StepRecord> for StepFunction {
    type Error = Error;

    fn try_from(r: StepRecord) -> Result<Self> {
        let g = StepFunction::new(r.index_set, r.pieces.into_iter().map(|p| (p.k, p.cells)))?;
        match r.family {
            Some(f) => g.with_family(f),
            None => Ok(g),
        }
    }
}

impl Serialize for StepFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StepRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = StepRecord::deserialize(d)?;
        StepFunction::try_from(r).map_err(serde::de::Error::custom)
    }
}

impl StepFunction {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("step function serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_family() {
        let g = StepFunction::new(IndexSet::Naturals, [(1, vec![Cell::new(0.25, 2.0), Cell::new(0.75, -1.0)])])
            .unwrap()
            .with_family(AnalyticFamily::ShrinkingSupport { n0: 2, kappa: 0.5, gamma: 1.5 })
            .unwrap();
        let text = g.to_json();
        assert!(text.contains("\"kind\": \"shrinking_support\""));
        let back = StepFunction::from_json(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn family_only_defaults_to_naturals() {
        let g = StepFunction::from_json(
            r#"{"family": {"kind": "power_log_plateau", "params": {"n0": 1, "power": 0.5, "log_power": 0.0}}}"#,
        )
        .unwrap();
        assert_eq!(g.index_set(), IndexSet::Naturals);
        assert!(!g.is_finite());
    }

    #[test]
    fn rejects_malformed() {
        let bad_sum = r#"{"index_set": "Z", "pieces": [{"k": 0, "cells": [{"width": 0.5, "value": 1.0}]}]}"#;
        assert!(StepFunction::from_json(bad_sum).is_err());
        let zero_width = r#"{"index_set": "Z", "pieces": [{"k": 0, "cells": [{"width": 0.0, "value": 1.0}, {"width": 1.0, "value": 1.0}]}]}"#;
        assert!(StepFunction::from_json(zero_width).is_err());
        let unknown = r#"{"index_set": "Z", "pieces": [], "extra": 1}"#;
        assert!(StepFunction::from_json(unknown).is_err());
        let family_on_z = r#"{"index_set": "Z", "family": {"kind": "power_log_plateau", "params": {"n0": 1, "power": 1.0, "log_power": 0.0}}}"#;
        assert!(StepFunction::from_json(family_on_z).is_err());
    }
}
