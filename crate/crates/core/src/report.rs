//! Serializable run results. Everything except [`RunReport::timings`] is
//! deterministic for a given configuration, so two runs can be compared
//! byte for byte through [`RunReport::stable_json`].

use serde::{Deserialize, Serialize};

use crate::families::{CoeffCondition, ExponentChoice, FamilyParams};
use crate::field::FieldCtx;
use crate::perm::PermVerdict;
use crate::transform::DeltaMode;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldInfo {
    pub p: u32,
    pub n: u32,
    /// Defining modulus, constant term first.
    pub modulus: Vec<u32>,
}

impl From<&FieldCtx> for FieldInfo {
    fn from(f: &FieldCtx) -> Self {
        FieldInfo {
            p: f.characteristic(),
            n: f.degree(),
            modulus: f.modulus().to_vec(),
        }
    }
}

/// One (c, δ) instance; elements are canonical indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub c: u32,
    pub delta: Option<u32>,
    pub is_permutation: bool,
    pub witness: Option<(u32, u32)>,
    pub image_deficit: u64,
}

impl InstanceRecord {
    pub fn new(c: u32, delta: Option<u32>, verdict: PermVerdict) -> Self {
        InstanceRecord {
            c,
            delta,
            is_permutation: verdict.is_permutation,
            witness: verdict.witness,
            image_deficit: verdict.image_deficit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    pub fn tally(instances: &[InstanceRecord]) -> Self {
        let passed = instances.iter().filter(|i| i.is_permutation).count();
        Summary {
            total: instances.len(),
            passed,
            failed: instances.len() - passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub family: String,
    pub reference: String,
    pub variant: String,
    /// False when the variant is run only to report its outcome.
    pub asserted: bool,
    pub params: FamilyParams,
    pub q: u64,
    pub field: FieldInfo,
    pub step: u32,
    pub exponent: ExponentChoice,
    pub condition: CoeffCondition,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_mode: Option<DeltaMode>,
    pub instances: Vec<InstanceRecord>,
    pub summary: Summary,
    /// Coefficients outside the family's condition, run only when probing;
    /// never counted as failures.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outside: Vec<InstanceRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// Counts agree with the instance list and every failure has a witness
    /// or an image deficit.
    pub fn is_consistent(&self) -> bool {
        self.summary == Summary::tally(&self.instances)
            && self
                .instances
                .iter()
                .all(|i| i.is_permutation || i.witness.is_some())
    }
}

/// A permuting `(s, c)` pair found by a sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub s: u64,
    pub c: u32,
    /// Catalog ids explaining the pair, or `["unexplained"]`.
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub field: FieldInfo,
    pub q: u64,
    pub step: u32,
    pub s_range: (u64, u64),
    pub coefficients: usize,
    pub entries: Vec<SweepEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTiming {
    pub label: String,
    pub total_ms: f64,
    pub instance_us: Vec<u64>,
}

/// Echo of the configuration that produced a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub cap: u64,
    pub seed: u64,
    pub delta_samples: usize,
    pub exhaustive_threshold: u64,
    pub probe_outside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub config: ConfigEcho,
    #[serde(default)]
    pub reports: Vec<VerifyReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<ReportTiming>>,
}

impl RunReport {
    /// All asserted reports passed.
    pub fn passed(&self) -> bool {
        self.reports
            .iter()
            .filter(|r| r.asserted)
            .all(VerifyReport::passed)
    }

    pub fn without_timings(&self) -> RunReport {
        RunReport {
            timings: None,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report types serialize")
    }

    /// JSON of everything except timings.
    pub fn stable_json(&self) -> String {
        self.without_timings().to_json()
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// One row per instance (or per sweep entry); no timings.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if let Some(sweep) = &self.sweep {
            for e in &sweep.entries {
                w.serialize(SweepRow {
                    p: sweep.field.p,
                    n: sweep.field.n,
                    q: sweep.q,
                    step: sweep.step,
                    s: e.s,
                    c: e.c,
                    tags: e.tags.join(";"),
                })
                .expect("csv row");
            }
        } else {
            for r in &self.reports {
                for i in &r.instances {
                    w.serialize(InstanceRow {
                        family: &r.family,
                        variant: &r.variant,
                        asserted: r.asserted,
                        p: r.field.p,
                        n: r.field.n,
                        q: r.q,
                        k_prime: r.params.k_prime,
                        step: r.step,
                        s: r.exponent.s,
                        c: i.c,
                        delta: i.delta,
                        is_permutation: i.is_permutation,
                        witness_a: i.witness.map(|w| w.0),
                        witness_b: i.witness.map(|w| w.1),
                        image_deficit: i.image_deficit,
                    })
                    .expect("csv row");
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
    }
}

#[derive(Serialize)]
struct InstanceRow<'a> {
    family: &'a str,
    variant: &'a str,
    asserted: bool,
    p: u32,
    n: u32,
    q: u64,
    k_prime: Option<u32>,
    step: u32,
    s: u64,
    c: u32,
    delta: Option<u32>,
    is_permutation: bool,
    witness_a: Option<u32>,
    witness_b: Option<u32>,
    image_deficit: u64,
}

#[derive(Serialize)]
struct SweepRow {
    p: u32,
    n: u32,
    q: u64,
    step: u32,
    s: u64,
    c: u32,
    tags: String,
}
