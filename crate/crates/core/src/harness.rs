//! Verification runs over catalog families: instance enumeration, δ
//! policy, parallel execution with ordered results, and the trinomial
//! sweep.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::families::{
    default_params, family_field, lookup, registry, valid_coefficients_for, ExponentChoice,
    FamilyError, FamilyParams, FamilySpec, FieldShape, Form, Variant,
};
use crate::field::{canonical_positive, Element, FieldCtx, FieldError, DEFAULT_SIZE_CAP};
use crate::perm::{is_permutation, FnSpec, PermError};
use crate::report::{
    ConfigEcho, FieldInfo, InstanceRecord, ReportTiming, RunReport, Summary, SweepEntry,
    SweepReport, VerifyReport, SCHEMA_VERSION,
};
use crate::transform::DeltaPolicy;

/// Largest field the table reproduction uses by default.
pub const TABLE1_FIELD_CAP: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("family {id} does not apply to {params}")]
    NotApplicable { id: String, params: FamilyParams },
    #[error("family {id} has no applicable parameters within the size cap {cap}")]
    NoParams { id: String, cap: u64 },
    #[error("table row {0} does not exist (rows are 1..=13)")]
    UnknownRow(u32),
    #[error("invalid sweep request: {0}")]
    BadSweep(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Perm(#[from] PermError),
}

impl HarnessError {
    /// Whether the error means "these parameters are outside the family"
    /// rather than a configuration problem.
    pub fn is_inapplicable(&self) -> bool {
        matches!(
            self,
            HarnessError::NotApplicable { .. }
                | HarnessError::NoParams { .. }
                | HarnessError::Family(FamilyError::NotApplicable { .. })
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub cap: u64,
    pub delta: DeltaPolicy,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    /// How many parameter sets `verify` picks when none are given.
    pub params_count: usize,
    pub probe_outside: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            cap: DEFAULT_SIZE_CAP,
            delta: DeltaPolicy::default(),
            jobs: 0,
            params_count: 2,
            probe_outside: false,
        }
    }
}

impl RunConfig {
    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            cap: self.cap,
            seed: self.delta.seed,
            delta_samples: self.delta.samples,
            exhaustive_threshold: self.delta.exhaustive_threshold,
            probe_outside: self.probe_outside,
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool, HarnessError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| HarnessError::ThreadPool(e.to_string()))
    }
}

fn new_run(command: &str, cfg: &RunConfig) -> RunReport {
    RunReport {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        config: cfg.echo(),
        reports: Vec::new(),
        sweep: None,
        timings: Some(Vec::new()),
    }
}

fn push(run: &mut RunReport, items: Vec<(VerifyReport, ReportTiming)>) {
    for (report, timing) in items {
        run.reports.push(report);
        run.timings.get_or_insert_with(Vec::new).push(timing);
    }
}

fn run_instance(f: &FnSpec, c: Element, delta: Option<Element>) -> (InstanceRecord, u64) {
    let start = Instant::now();
    let verdict = is_permutation(f);
    let us = start.elapsed().as_micros() as u64;
    (
        InstanceRecord::new(c.index(), delta.map(Element::index), verdict),
        us,
    )
}

fn build(
    spec: &FamilySpec,
    params: &FamilyParams,
    variant: &Variant,
    s: u64,
    field: &Arc<FieldCtx>,
    c: Element,
    delta: Option<Element>,
) -> Result<FnSpec, HarnessError> {
    let tower = field.tower(params.e)?;
    Ok(match spec.form {
        Form::Trinomial => FnSpec::trinomial(field.clone(), tower, c, s, variant.step)?,
        Form::DeltaForm => FnSpec::delta_form(
            field.clone(),
            tower,
            c,
            s,
            variant.step,
            delta.unwrap_or_else(|| field.zero()),
        )?,
    })
}

fn expected_count_note(
    condition: &crate::families::CoeffCondition,
    field: &FieldCtx,
    found: usize,
) -> Option<String> {
    if let crate::families::CoeffCondition::PowerUnity { exponent, .. } = condition {
        if field.group_order().is_multiple_of(*exponent) && found as u64 != *exponent {
            return Some(format!(
                "expected {exponent} coefficients from the unity condition, found {found}"
            ));
        }
    }
    None
}

/// Runs one variant of a family at one parameter set: one report per
/// exponent choice, instances ordered by (c, δ).
pub fn verify_variant(
    spec: &FamilySpec,
    params: &FamilyParams,
    variant: &Variant,
    cfg: &RunConfig,
) -> Result<Vec<(VerifyReport, ReportTiming)>, HarnessError> {
    if !spec.is_applicable(params) || spec.degenerate_at(params) {
        return Err(HarnessError::NotApplicable {
            id: spec.id.to_string(),
            params: *params,
        });
    }
    let field = family_field(spec, params, cfg.cap)?;
    let (condition, _) = spec.condition(params, variant)?;
    let coeffs = valid_coefficients_for(spec, params, variant, &field)?;
    let (deltas, delta_mode) = match spec.form {
        Form::DeltaForm => {
            let (idx, mode) = cfg.delta.select(field.order());
            let elems = idx
                .into_iter()
                .map(|i| field.element_at(i as u64).map(Some))
                .collect::<Result<Vec<_>, _>>()?;
            (elems, Some(mode))
        }
        Form::Trinomial => (vec![None], None),
    };
    let pairs: Vec<(Element, Option<Element>)> = coeffs
        .iter()
        .flat_map(|&c| deltas.iter().map(move |&d| (c, d)))
        .collect();

    let mut out = Vec::new();
    for choice in spec.exponents(params)? {
        let start = Instant::now();
        let results = pairs
            .par_iter()
            .map(|&(c, d)| {
                let f = build(spec, params, variant, choice.s, &field, c, d)?;
                Ok(run_instance(&f, c, d))
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        let (instances, instance_us): (Vec<_>, Vec<_>) = results.into_iter().unzip();

        let outside = if cfg.probe_outside {
            probe_outside(spec, params, variant, &choice, &field, &coeffs)?
        } else {
            Vec::new()
        };
        let mut notes = Vec::new();
        notes.extend(expected_count_note(&condition, &field, coeffs.len()));
        if coeffs.is_empty() {
            notes.push("no coefficient satisfies the condition".to_string());
        }
        let summary = Summary::tally(&instances);
        let label = format!("{} {} {} {}", spec.id, variant.tag, params, choice.label);
        out.push((
            VerifyReport {
                family: spec.id.to_string(),
                reference: spec.reference.to_string(),
                variant: variant.tag.to_string(),
                asserted: variant.asserted,
                params: *params,
                q: params.q(),
                field: FieldInfo::from(&*field),
                step: variant.step,
                exponent: choice,
                condition,
                delta_mode,
                instances,
                summary,
                outside,
                notes,
            },
            ReportTiming {
                label,
                total_ms: start.elapsed().as_secs_f64() * 1e3,
                instance_us,
            },
        ));
    }
    Ok(out)
}

/// Coefficients outside the condition, with δ = 0 for delta forms.
fn probe_outside(
    spec: &FamilySpec,
    params: &FamilyParams,
    variant: &Variant,
    choice: &ExponentChoice,
    field: &Arc<FieldCtx>,
    valid: &[Element],
) -> Result<Vec<InstanceRecord>, HarnessError> {
    let (_, domain) = spec.condition(params, variant)?;
    let domain_elems = field.subfield_elements(domain.degree(params, spec.shape))?;
    let delta = (spec.form == Form::DeltaForm).then(|| field.zero());
    domain_elems
        .par_iter()
        .filter(|c| !c.is_zero() && valid.binary_search(c).is_err())
        .map(|&c| {
            let f = build(spec, params, variant, choice.s, field, c, delta)?;
            Ok(run_instance(&f, c, delta).0)
        })
        .collect()
}

/// Runs every variant of `spec` at `params`.
pub fn verify_params(
    spec: &FamilySpec,
    params: &FamilyParams,
    cfg: &RunConfig,
) -> Result<Vec<(VerifyReport, ReportTiming)>, HarnessError> {
    let mut out = Vec::new();
    for variant in &spec.variants {
        out.extend(verify_variant(spec, params, variant, cfg)?);
    }
    Ok(out)
}

/// `verify`: every variant at each parameter set, or at the smallest
/// `cfg.params_count` applicable ones when `params` is empty.
pub fn verify(
    id: &str,
    params: &[FamilyParams],
    cfg: &RunConfig,
) -> Result<RunReport, HarnessError> {
    let spec = lookup(id)?;
    let chosen = if params.is_empty() {
        let picked = default_params(spec, cfg.cap, cfg.params_count);
        if picked.is_empty() {
            return Err(HarnessError::NoParams {
                id: id.to_string(),
                cap: cfg.cap,
            });
        }
        picked
    } else {
        params.to_vec()
    };
    let pool = cfg.pool()?;
    let mut run = new_run("verify", cfg);
    for p in &chosen {
        let items = pool.install(|| verify_params(spec, p, cfg))?;
        push(&mut run, items);
    }
    Ok(run)
}

/// Parameters for a table row: the smallest admissible k with
/// q^2 ≤ min(cap, 2^16).
pub fn table1_default_params(row: u32, cap: u64) -> Result<FamilyParams, HarnessError> {
    let spec = table1_spec(row)?;
    default_params(spec, cap.min(TABLE1_FIELD_CAP), 1)
        .first()
        .copied()
        .ok_or(HarnessError::NoParams {
            id: spec.id.to_string(),
            cap,
        })
}

pub fn table1_spec(row: u32) -> Result<&'static FamilySpec, HarnessError> {
    if !(1..=13).contains(&row) {
        return Err(HarnessError::UnknownRow(row));
    }
    Ok(lookup(&format!("table1-r{row}"))?)
}

/// `table1`: the selected rows (all when empty), each at its override or
/// default parameters. Row 9 yields separate reports for its two
/// condition variants.
pub fn table1(
    rows: &[u32],
    overrides: &[(u32, FamilyParams)],
    cfg: &RunConfig,
) -> Result<RunReport, HarnessError> {
    let rows: Vec<u32> = if rows.is_empty() {
        (1..=13).collect()
    } else {
        rows.to_vec()
    };
    let pool = cfg.pool()?;
    let mut run = new_run("table1", cfg);
    for row in rows {
        let spec = table1_spec(row)?;
        let params = match overrides.iter().find(|(r, _)| *r == row) {
            Some((_, p)) => *p,
            None => table1_default_params(row, cfg.cap)?,
        };
        let items = pool.install(|| verify_params(spec, &params, cfg))?;
        push(&mut run, items);
    }
    Ok(run)
}

/// Which coefficients a sweep tries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoeffSelection {
    One,
    All,
    Indices(Vec<u32>),
}

struct Explainer {
    id: &'static str,
    exponents: Vec<u64>,
    coeffs: Vec<Element>,
}

/// Catalog trinomials over this field and step, with their exponents and
/// coefficient sets, used to tag sweep hits.
fn explainers(field: &FieldCtx, base_degree: u32, step: u32) -> Vec<Explainer> {
    let p = field.characteristic();
    let ext = field.degree() / base_degree;
    let shape = match ext {
        2 => FieldShape::Square,
        4 => FieldShape::Quartic,
        _ => return Vec::new(),
    };
    let group = field.group_order();
    let q = (p as u64).pow(base_degree);
    let mut out = Vec::new();
    for spec in registry()
        .iter()
        .filter(|s| s.form == Form::Trinomial && s.shape == shape)
    {
        let Some(variant) = spec.variants.iter().find(|v| v.step == step) else {
            continue;
        };
        let base = FamilyParams::new(p, base_degree);
        let candidates: Vec<FamilyParams> = if spec.needs_k_prime() {
            (1..=2 * base_degree + 2)
                .map(|kp| base.with_k_prime(kp))
                .collect()
        } else {
            vec![base]
        };
        for params in candidates {
            if !spec.is_applicable(&params) || spec.degenerate_at(&params) {
                continue;
            }
            let Ok(choices) = spec.exponents(&params) else {
                continue;
            };
            let Ok(coeffs) = valid_coefficients_for(spec, &params, variant, field) else {
                continue;
            };
            let mut exponents = Vec::new();
            for ch in choices {
                exponents.push(canonical_positive(ch.s, group));
                if p == 2 {
                    // i and 1 − i give the same map in characteristic two
                    let frob = crate::field::canonical_positive(
                        ((ch.s as u128 * q.pow(step) as u128) % group as u128) as u64,
                        group,
                    );
                    exponents.push(frob);
                }
            }
            out.push(Explainer {
                id: spec.id,
                exponents,
                coeffs,
            });
        }
    }
    out
}

/// `sweep`: every `(s, c)` in range whose trinomial `cx − x^s + x^(q^k·s)`
/// permutes GF(p^n), tagged with catalog ids that explain it.
pub fn sweep(
    p: u32,
    n: u32,
    base_degree: u32,
    step: u32,
    s_range: Option<(u64, u64)>,
    coeffs: &CoeffSelection,
    cfg: &RunConfig,
) -> Result<RunReport, HarnessError> {
    let field = Arc::new(FieldCtx::with_cap(p, n, cfg.cap)?);
    let tower = field.tower(base_degree)?;
    let group = field.group_order();
    let (lo, hi) = s_range.unwrap_or((1, group - 1));
    if lo == 0 || lo > hi {
        return Err(HarnessError::BadSweep(format!(
            "empty exponent range {lo}..={hi}"
        )));
    }
    let cs: Vec<Element> = match coeffs {
        CoeffSelection::One => vec![field.one()],
        CoeffSelection::All => field.nonzero_elements().collect(),
        CoeffSelection::Indices(ix) => ix
            .iter()
            .map(|&i| field.element_at(i as u64))
            .collect::<Result<_, _>>()?,
    };
    if cs.iter().any(|c| c.is_zero()) {
        return Err(HarnessError::BadSweep("c = 0 is not allowed".to_string()));
    }
    let known = explainers(&field, base_degree, step);
    let pool = cfg.pool()?;
    let hits: Vec<Vec<SweepEntry>> = pool.install(|| {
        (lo..=hi)
            .into_par_iter()
            .filter(|s| s % group != 0)
            .map(|s| {
                let mut found = Vec::new();
                for &c in &cs {
                    let f = FnSpec::trinomial(field.clone(), tower, c, s, step)?;
                    if is_permutation(&f).is_permutation {
                        let reduced = canonical_positive(s, group);
                        let mut tags: Vec<String> = known
                            .iter()
                            .filter(|e| {
                                e.exponents.contains(&reduced) && e.coeffs.binary_search(&c).is_ok()
                            })
                            .map(|e| e.id.to_string())
                            .collect();
                        tags.dedup();
                        if tags.is_empty() {
                            tags.push("unexplained".to_string());
                        }
                        found.push(SweepEntry {
                            s,
                            c: c.index(),
                            tags,
                        });
                    }
                }
                Ok(found)
            })
            .collect::<Result<_, HarnessError>>()
    })?;
    let mut run = new_run("sweep", cfg);
    run.sweep = Some(SweepReport {
        field: FieldInfo::from(&*field),
        q: tower.q,
        step,
        s_range: (lo, hi),
        coefficients: cs.len(),
        entries: hits.into_iter().flatten().collect(),
    });
    Ok(run)
}
