//! Verification records: bracket comparisons, per-case records and JSON-lines output.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::seqcore::NormBracket;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// Certified comparison `lhs <= rhs` with slack `tol * max(1, rhs.lower)`.
///
/// Passes when `lhs.upper <= rhs.lower + slack`, fails only on a certified
/// violation `lhs.lower > rhs.upper + slack`.
pub fn compare_le(lhs: &NormBracket, rhs: &NormBracket, tol: f64) -> (Status, f64) {
    let tol_abs = tol * rhs.lower().max(1.0);
    let margin = rhs.lower() - lhs.upper();
    let status = if lhs.upper() <= rhs.lower() + tol_abs {
        Status::Pass
    } else if lhs.lower() > rhs.upper() + tol_abs {
        Status::Fail
    } else {
        Status::Inconclusive
    };
    (status, margin)
}

/// `|lhs - rhs| <= tol * max(1, |rhs|)` for point values.
pub fn compare_eq(lhs: f64, rhs: f64, tol: f64) -> (Status, f64) {
    let gap = (lhs - rhs).abs();
    let status = if gap <= tol * rhs.abs().max(1.0) { Status::Pass } else { Status::Fail };
    (status, -gap)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case: usize,
    pub check: String,
    pub inputs_digest: String,
    pub lhs: NormBracket,
    pub rhs: NormBracket,
    pub status: Status,
    #[serde(with = "finite_or_null")]
    pub slack: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CaseRecord {
    pub fn le(check: &str, digest: &str, lhs: NormBracket, rhs: NormBracket, tol: f64) -> Self {
        let (status, slack) = compare_le(&lhs, &rhs, tol);
        Self {
            case: 0,
            check: check.to_string(),
            inputs_digest: digest.to_string(),
            lhs,
            rhs,
            status,
            slack,
            detail: None,
        }
    }

    pub fn eq(check: &str, digest: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let (status, slack) = compare_eq(lhs, rhs, tol);
        Self {
            case: 0,
            check: check.to_string(),
            inputs_digest: digest.to_string(),
            lhs: NormBracket::new_clamped(lhs, lhs),
            rhs: NormBracket::new_clamped(rhs, rhs),
            status,
            slack,
            detail: None,
        }
    }

    /// Boolean outcome with no numeric sides.
    pub fn flag(check: &str, digest: &str, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            case: 0,
            check: check.to_string(),
            inputs_digest: digest.to_string(),
            lhs: NormBracket::exact(0.0),
            rhs: NormBracket::exact(0.0),
            status: if ok { Status::Pass } else { Status::Fail },
            slack: 0.0,
            detail: Some(detail.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub records: Vec<CaseRecord>,
}

#[derive(Serialize)]
struct RecordLine<'a> {
    suite: &'a str,
    #[serde(flatten)]
    record: &'a CaseRecord,
}

#[derive(Serialize)]
struct SummaryLine<'a> {
    suite: &'a str,
    summary: Summary,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self { suite: suite.into(), records: Vec::new() }
    }

    pub fn push(&mut self, mut record: CaseRecord) {
        record.case = self.records.len();
        self.records.push(record);
    }

    /// Appends a record keeping the generator case index it came from.
    pub fn push_case(&mut self, case: usize, mut record: CaseRecord) {
        record.case = case;
        self.records.push(record);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        for r in other.records {
            self.push(r);
        }
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        for r in &self.records {
            match r.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Inconclusive => s.inconclusive += 1,
            }
        }
        s
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.status == Status::Pass)
    }

    pub fn has_failures(&self) -> bool {
        self.records.iter().any(|r| r.status == Status::Fail)
    }

    pub fn status(&self) -> Status {
        let s = self.summary();
        if s.fail > 0 {
            Status::Fail
        } else if s.inconclusive > 0 {
            Status::Inconclusive
        } else {
            Status::Pass
        }
    }

    /// One JSON object per record, then a summary line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let line = RecordLine { suite: &self.suite, record: r };
            out.push_str(&serde_json::to_string(&line).expect("record serializes"));
            out.push('\n');
        }
        let summary = SummaryLine { suite: &self.suite, summary: self.summary() };
        out.push_str(&serde_json::to_string(&summary).expect("summary serializes"));
        out.push('\n');
        out
    }
}

/// SHA-256 of the canonical JSON encoding, hex encoded.
pub fn digest<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("digest input serializes");
    hex::encode(Sha256::digest(&bytes))
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_outcomes() {
        let a = NormBracket::new(1.0, 1.1);
        let b = NormBracket::new(1.2, 1.3);
        assert_eq!(compare_le(&a, &b, 0.0).0, Status::Pass);
        assert_eq!(compare_le(&b, &a, 0.0).0, Status::Fail);
        let c = NormBracket::new(1.05, 1.15);
        assert_eq!(compare_le(&a, &c, 0.0).0, Status::Inconclusive);
        assert_eq!(compare_le(&c, &a, 1e-9).0, Status::Inconclusive);
        let inf = NormBracket::new(1.0, f64::INFINITY);
        assert_eq!(compare_le(&inf, &b, 0.0).0, Status::Inconclusive);
    }

    #[test]
    fn json_lines_are_stable() {
        let mut r = VerificationReport::new("demo");
        r.push(CaseRecord::le("x", "00", NormBracket::exact(1.0), NormBracket::exact(2.0), 1e-9));
        r.push(CaseRecord::flag("y", "01", false, "no"));
        let text = r.to_json_lines();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with(r#"{"suite":"demo","case":0,"check":"x""#), "{}", lines[0]);
        assert!(lines[2].contains(r#""fail":1"#));
        assert_eq!(text, r.clone().to_json_lines());
        assert_eq!(r.status(), Status::Fail);
    }

    #[test]
    fn digest_is_hex_sha256() {
        let d = digest(&[1, 2, 3]);
        assert_eq!(d.len(), 64);
        // sha256("[1,2,3]")
        assert_eq!(d, "a615eeaee21de5179de080de8c3052c8da901138406ba71c38c032845f7d54f4");
    }
}
