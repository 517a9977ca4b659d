//! Machine-readable verification reports.
//!
//! Reports must be byte-identical across runs for a fixed configuration and
//! seed, so serialization goes through a small canonical JSON writer: object
//! keys are emitted in sorted order and every float uses a fixed scientific
//! format with 17 significant digits. Timing is therefore logged to stderr,
//! never written into the report file.

use std::fmt::Write as _;

/// Canonical JSON value with deterministic serialization.
#[derive(Clone, Debug)]
pub enum Json {
    Bool(bool),
    UInt(u64),
    Int(i64),
    /// Fixed-format float, 17 significant digits.
    Float(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj(fields: Vec<(&str, Json)>) -> Json {
        Json::Obj(
            fields
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        )
    }

    fn write(&self, out: &mut String) {
        match self {
            Json::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            Json::UInt(u) => {
                let _ = write!(out, "{u}");
            }
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Float(x) => {
                let _ = write!(out, "{x:.16e}");
            }
            Json::Str(s) => write_escaped(out, s),
            Json::Arr(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write(out);
                }
                out.push(']');
            }
            Json::Obj(fields) => {
                let mut sorted: Vec<&(String, Json)> = fields.iter().collect();
                sorted.sort_by(|a, b| a.0.cmp(&b.0));
                out.push('{');
                for (i, (k, v)) in sorted.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_escaped(out, k);
                    out.push(':');
                    v.write(out);
                }
                out.push('}');
            }
        }
    }

    /// Canonical serialization (sorted keys, fixed float format).
    pub fn to_string_canonical(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out.push('\n');
        out
    }
}

fn write_escaped(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Record of one verification suite.
#[derive(Clone, Debug)]
pub struct SuiteRecord {
    /// Stable suite id, e.g. `mixed-bracket`.
    pub id: String,
    /// The audited relation, spelled out.
    pub claim: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Measured facts that are not failures (for instance a bracket scale
    /// different from 1 under the literal convention).
    pub findings: Vec<String>,
}

impl SuiteRecord {
    fn to_json(&self) -> Json {
        Json::obj(vec![
            ("id", Json::Str(self.id.clone())),
            ("claim", Json::Str(self.claim.clone())),
            ("samples", Json::UInt(self.samples as u64)),
            ("max_residual", Json::Float(self.max_residual)),
            ("tolerance", Json::Float(self.tolerance)),
            ("pass", Json::Bool(self.pass)),
            (
                "findings",
                Json::Arr(self.findings.iter().cloned().map(Json::Str).collect()),
            ),
        ])
    }
}

/// Echo of the effective configuration, so every report is self-describing.
#[derive(Clone, Debug)]
pub struct ConfigEcho {
    pub n: usize,
    pub chi: f64,
    pub convention: String,
    pub seed: u64,
    pub samples: usize,
    pub jobs: usize,
    pub gap_floor: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub drift_tol: f64,
    pub q_gap_range: (f64, f64),
    pub p_range: (f64, f64),
    pub q_center_range: (f64, f64),
    pub j_range: (i32, i32),
    pub k_range: (i32, i32),
    pub rng: String,
}

impl ConfigEcho {
    fn to_json(&self) -> Json {
        Json::obj(vec![
            ("n", Json::UInt(self.n as u64)),
            ("chi", Json::Float(self.chi)),
            ("convention", Json::Str(self.convention.clone())),
            ("seed", Json::UInt(self.seed)),
            ("samples", Json::UInt(self.samples as u64)),
            ("jobs", Json::UInt(self.jobs as u64)),
            ("gap_floor", Json::Float(self.gap_floor)),
            ("abs_tol", Json::Float(self.abs_tol)),
            ("rel_tol", Json::Float(self.rel_tol)),
            ("drift_tol", Json::Float(self.drift_tol)),
            (
                "q_gap_range",
                Json::Arr(vec![
                    Json::Float(self.q_gap_range.0),
                    Json::Float(self.q_gap_range.1),
                ]),
            ),
            (
                "p_range",
                Json::Arr(vec![Json::Float(self.p_range.0), Json::Float(self.p_range.1)]),
            ),
            (
                "q_center_range",
                Json::Arr(vec![
                    Json::Float(self.q_center_range.0),
                    Json::Float(self.q_center_range.1),
                ]),
            ),
            (
                "j_range",
                Json::Arr(vec![
                    Json::Int(self.j_range.0 as i64),
                    Json::Int(self.j_range.1 as i64),
                ]),
            ),
            (
                "k_range",
                Json::Arr(vec![
                    Json::Int(self.k_range.0 as i64),
                    Json::Int(self.k_range.1 as i64),
                ]),
            ),
            ("rng", Json::Str(self.rng.clone())),
        ])
    }
}

/// Result of the bracket-scale calibration.
#[derive(Clone, Debug)]
pub struct KappaRecord {
    pub kappa: f64,
    pub fit_residual: f64,
    pub expected: f64,
    pub rows: usize,
    pub consistent: bool,
}

impl KappaRecord {
    fn to_json(&self) -> Json {
        Json::obj(vec![
            ("kappa", Json::Float(self.kappa)),
            ("fit_residual", Json::Float(self.fit_residual)),
            ("expected", Json::Float(self.expected)),
            ("rows", Json::UInt(self.rows as u64)),
            ("consistent", Json::Bool(self.consistent)),
        ])
    }
}

/// Full verification report.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub config: ConfigEcho,
    pub suites: Vec<SuiteRecord>,
    pub kappa: KappaRecord,
    pub findings: Vec<String>,
    pub overall_pass: bool,
}

impl VerificationReport {
    /// Overall pass means every suite passed; findings never fail a run.
    pub fn finalize(mut self) -> Self {
        self.overall_pass = self.suites.iter().all(|s| s.pass);
        self.findings = self
            .suites
            .iter()
            .flat_map(|s| s.findings.iter().cloned())
            .collect();
        self
    }

    pub fn to_json(&self) -> Json {
        Json::obj(vec![
            ("config", self.config.to_json()),
            (
                "suites",
                Json::Arr(self.suites.iter().map(SuiteRecord::to_json).collect()),
            ),
            ("kappa_calibration", self.kappa.to_json()),
            (
                "findings",
                Json::Arr(self.findings.iter().cloned().map(Json::Str).collect()),
            ),
            ("overall_pass", Json::Bool(self.overall_pass)),
        ])
    }

    pub fn to_json_string(&self) -> String {
        self.to_json().to_string_canonical()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted_and_floats_fixed() {
        let j = Json::obj(vec![
            ("zeta", Json::Float(2.5)),
            ("alpha", Json::UInt(7)),
        ]);
        let s = j.to_string_canonical();
        assert_eq!(s, "{\"alpha\":7,\"zeta\":2.5000000000000000e0}\n");
    }

    #[test]
    fn serialization_is_valid_json() {
        let j = Json::obj(vec![
            ("values", Json::Arr(vec![Json::Float(1.0), Json::Float(-2.5e-11)])),
            ("name", Json::Str("line \"quoted\"\n".to_string())),
            ("flag", Json::Bool(true)),
            ("count", Json::Int(-3)),
        ]);
        let s = j.to_string_canonical();
        let parsed: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(parsed["count"], serde_json::json!(-3));
        assert_eq!(parsed["values"][0], serde_json::json!(1.0));
        assert!(parsed["flag"].as_bool().unwrap());
    }

    #[test]
    fn float_roundtrips_through_text() {
        for &x in &[
            2.236_067_977_499_79,
            1e-300,
            -3.14159e20,
            1.0 / 3.0,
            6.02e23,
        ] {
            let s = Json::Float(x).to_string_canonical();
            let back: f64 = s.trim().parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }
}
