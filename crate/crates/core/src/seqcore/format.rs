use serde::{Deserialize, Serialize};

use super::{GrandSequence, IndexSet, PowerLogTail};
use crate::error::{Error, Result};

/// On-disk form of a sequence: `{"index_set": "N", "entries": [[k, v], ...], "tail": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceRecord {
    pub index_set: IndexSet,
    #[serde(default)]
    pub entries: Vec<(i64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<PowerLogTail>,
}

impl From<&GrandSequence> for SequenceRecord {
    fn from(x: &GrandSequence) -> Self {
        Self { index_set: x.index_set, entries: x.entries().collect(), tail: x.tail }
    }
}

impl TryFrom<SequenceRecord> for GrandSequence {
    type Error = Error;

    fn try_from(r: SequenceRecord) -> Result<Self> {
        let seq = GrandSequence::finite(r.index_set, r.entries)?;
        match r.tail {
            Some(t) => seq.with_tail(t),
            None => Ok(seq),
        }
    }
}

impl Serialize for GrandSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SequenceRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GrandSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SequenceRecord::deserialize(d)?;
        GrandSequence::try_from(r).map_err(serde::de::Error::custom)
    }
}

impl GrandSequence {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let x = GrandSequence::from_values(IndexSet::Naturals, 1, &[0.5, -0.25])
            .unwrap()
            .with_tail(PowerLogTail::new(3, 1.0, 2.0).unwrap())
            .unwrap();
        let text = x.to_json();
        let back = GrandSequence::from_json(&text).unwrap();
        assert_eq!(back, x);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(GrandSequence::from_json(r#"{"index_set":"N","entries":[[0,1.0]]}"#).is_err());
        assert!(GrandSequence::from_json(r#"{"index_set":"Q","entries":[]}"#).is_err());
        assert!(GrandSequence::from_json(r#"{"index_set":"Z","entries":[],"tail":{"n0":1,"a":1.0,"b":0.0}}"#).is_err());
        let z = GrandSequence::from_json(r#"{"index_set":"Z","entries":[[-2,1.5]]}"#).unwrap();
        assert_eq!(z.get(-2), 1.5);
    }
}
