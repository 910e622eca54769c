//! One line per acceptance criterion. Runs without the libtest harness so
//! the lines always reach stdout.
//!
//! A criterion whose claim is false as stated prints FAIL. It only counts
//! as a known gap when the failure takes exactly the documented shape; any
//! other failure makes the target exit non-zero.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pplab::harness::{self, RunConfig};
use pplab::perm::{lemma1_assembled, lemma1_check};
use pplab::report::RunReport;
use pplab::transform::{
    compose_f, compose_h, invert_f, prop2_check, prop4_sweep, quadratic_form_solutions,
    quartic_structure, DeltaMode, HInverse, QuadSign,
};
use pplab::{is_permutation, DeltaPolicy, Element, FamilyParams, FieldCtx, FnSpec, GSpec, Term};

const SEED: u64 = 0x5eed;

struct Verdict {
    pass: bool,
    detail: String,
    /// Set when a failure matches the documented counterexample.
    known_gap: bool,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Verdict {
            pass,
            detail,
            known_gap: false,
        }
    }
}

fn params_for(q: u64) -> FamilyParams {
    let p = (2..=q).find(|d| q.is_multiple_of(*d)).unwrap();
    let mut e = 0;
    let mut rest = q;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    assert_eq!(rest, 1, "{q} is not a prime power");
    FamilyParams::new(p as u32, e)
}

fn run_family(id: &str, qs: &[u64], cfg: &RunConfig) -> RunReport {
    let params: Vec<FamilyParams> = qs.iter().map(|&q| params_for(q)).collect();
    harness::verify(id, &params, cfg).unwrap_or_else(|e| panic!("{id}: {e}"))
}

struct Tally {
    reports: usize,
    instances: usize,
    failures: usize,
    exhaustive: bool,
}

fn tally(run: &RunReport, asserted: bool) -> Tally {
    let reports: Vec<_> = run
        .reports
        .iter()
        .filter(|r| r.asserted == asserted)
        .collect();
    Tally {
        reports: reports.len(),
        instances: reports.iter().map(|r| r.summary.total).sum(),
        failures: reports.iter().map(|r| r.summary.failed).sum(),
        exhaustive: reports
            .iter()
            .all(|r| matches!(r.delta_mode, None | Some(DeltaMode::Exhaustive))),
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn secs(d: Duration) -> String {
    format!("{:.3} s", d.as_secs_f64())
}

fn criterion_1(cfg: &RunConfig) -> Verdict {
    let start = Instant::now();
    let run = run_family("thm5", &[9, 17, 5, 13], cfg);
    let elapsed = start.elapsed();
    let t = tally(&run, true);
    Verdict::new(
        t.failures == 0 && t.instances > 0 && within(elapsed, Duration::from_secs(5)),
        format!(
            "q in {{9, 17, 5, 13}}: {} coefficients, {} failures, {} (limit 5 s)",
            t.instances,
            t.failures,
            secs(elapsed)
        ),
    )
}

fn criterion_2(cfg: &RunConfig) -> Verdict {
    let run = run_family("thm6", &[9, 17, 5, 13], cfg);
    let t = tally(&run, true);
    Verdict::new(
        t.failures == 0 && t.instances > 0,
        format!(
            "q in {{9, 17, 5, 13}} with the stated case pairing: {} coefficients, {} failures",
            t.instances, t.failures
        ),
    )
}

/// x^e for any integer e on a nonzero x.
fn power(f: &FieldCtx, x: Element, e: i64) -> Element {
    f.pow(x, e.rem_euclid(f.group_order() as i64) as u64)
        .unwrap()
}

fn criterion_3(cfg: &RunConfig) -> Verdict {
    let run = run_family("thm7", &[7, 13, 25], cfg);
    let t = tally(&run, true);
    let mut checked = 0;
    let mut identity_failures = 0;
    for q in [7i64, 13, 25] {
        let params = params_for(q as u64);
        let f = FieldCtx::new(params.p, 2 * params.e).unwrap();
        let u = (q + 2) / 3;
        for x in f.mu_subgroup(q as u64 + 1).unwrap() {
            checked += 1;
            let inner = f.sub(f.add(f.one(), power(&f, x, 1 - u)), power(&f, x, u));
            if inner.is_zero() || f.mul(x, power(&f, inner, q - 1)) != power(&f, x, u) {
                identity_failures += 1;
            }
        }
    }
    Verdict::new(
        t.failures == 0 && t.reports == 3 && identity_failures == 0,
        format!(
            "q in {{7, 13, 25}}: {} permutation failures; proof identities on {} points of mu_(q+1), {} failures",
            t.failures, checked, identity_failures
        ),
    )
}

fn criterion_4(cfg: &RunConfig) -> Verdict {
    let start = Instant::now();
    let run = run_family("thm10", &[3, 5, 7], cfg);
    let t = tally(&run, true);
    let mut counts = Vec::new();
    for q in [3u64, 5, 7] {
        let field = Arc::new(FieldCtx::new(q as u32, 4).unwrap());
        let tower = field.tower(1).unwrap();
        let plus = quadratic_form_solutions(&field, tower, QuadSign::Plus)
            .unwrap()
            .len();
        let minus = quadratic_form_solutions(&field, tower, QuadSign::Minus)
            .unwrap()
            .len();
        counts.push((q, plus, minus));
    }
    let counts_ok = counts == [(3, 8, 8), (5, 0, 0), (7, 0, 0)];
    let f81 = Arc::new(FieldCtx::new(3, 4).unwrap());
    let st = quartic_structure(&f81, f81.tower(1).unwrap()).unwrap();
    let elapsed = start.elapsed();
    let attainable = t.failures == 0
        && t.reports == 3
        && counts_ok
        && st.fixes_plus
        && st.permutes_solution_sets
        && st.complement_closed
        && within(elapsed, Duration::from_secs(30));
    let pass = attainable && st.fixes_minus;
    let counts_text = counts
        .iter()
        .map(|(q, p, m)| format!("q={q}: {p}/{m}"))
        .collect::<Vec<_>>()
        .join(", ");
    let detail = format!(
        "permutation over GF(q^4) for q in {{3, 5, 7}}: {} failures; S+/S- sizes {counts_text}; \
         q=3: f fixes S+ {}, f fixes S- {}, f(a) = -a on S- {}, f(T) in T {}; {} (limit 30 s)",
        t.failures,
        st.fixes_plus,
        st.fixes_minus,
        st.negates_minus,
        st.complement_closed,
        secs(elapsed)
    );
    Verdict {
        pass,
        detail,
        known_gap: !pass && attainable && st.negates_minus,
    }
}

fn criterion_5(cfg: &RunConfig) -> Verdict {
    let runs = [
        ("thm11", run_family("thm11", &[9, 17, 5, 13], cfg)),
        ("thm12", run_family("thm12", &[9, 17, 5, 13], cfg)),
        ("thm13", run_family("thm13", &[7, 13, 25], cfg)),
        ("thm14", run_family("thm14", &[3, 5, 7], cfg)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (id, run) in &runs {
        let t = tally(run, true);
        pass &= t.failures == 0 && t.instances > 0 && t.exhaustive;
        parts.push(format!(
            "{id} {}/{} permute",
            t.instances - t.failures,
            t.instances
        ));
    }
    let thm14 = &runs[3].1;
    let printed = tally(thm14, false);
    let printed_text = if printed.failures == 0 {
        "printed q-step passes too".to_string()
    } else {
        format!(
            "printed q-step fails {}/{} (reported only)",
            printed.failures, printed.instances
        )
    };
    Verdict::new(
        pass && printed.reports > 0,
        format!(
            "all delta exhaustive; {}; thm14 q^2-step passes, {printed_text}",
            parts.join(", ")
        ),
    )
}

fn criterion_6(cfg: &RunConfig) -> (Verdict, RunReport) {
    let start = Instant::now();
    let run = harness::table1(&[], &[], cfg).unwrap();
    let elapsed = start.elapsed();
    let t = tally(&run, true);
    let mut rows: Vec<&str> = run.reports.iter().map(|r| r.family.as_str()).collect();
    rows.dedup();
    let policy_ok = run.reports.iter().all(|r| {
        let order = (r.field.p as u64).pow(r.field.n);
        match r.delta_mode {
            Some(DeltaMode::Exhaustive) => order <= 1 << 14,
            Some(DeltaMode::Sampled { count, .. }) => order > 1 << 14 && count == 64,
            None => false,
        }
    });
    let verdict = Verdict::new(
        t.failures == 0 && rows.len() == 13 && policy_ok && within(elapsed, Duration::from_secs(120)),
        format!(
            "{} rows, {} reports, {} instances, {} failures, delta policy respected {policy_ok}, {} (limit 120 s)",
            rows.len(),
            t.reports,
            t.instances,
            t.failures,
            secs(elapsed)
        ),
    );
    (verdict, run)
}

/// Prime powers up to 2^10.
const SMALL_FIELDS: &[(u32, u32)] = &[
    (2, 2),
    (2, 3),
    (2, 5),
    (2, 8),
    (2, 10),
    (3, 2),
    (3, 3),
    (3, 5),
    (5, 2),
    (5, 4),
    (7, 2),
    (7, 3),
    (11, 2),
    (13, 2),
    (19, 2),
    (31, 2),
    (101, 1),
    (509, 1),
];

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut agree = 0;
    let mut permuting = 0;
    for _ in 0..200 {
        let (p, n) = SMALL_FIELDS[rng.random_range(0..SMALL_FIELDS.len())];
        let field = Arc::new(FieldCtx::new(p, n).unwrap());
        let group = field.group_order();
        let divisors: Vec<u64> = (1..=group).filter(|d| group.is_multiple_of(*d)).collect();
        let d = divisors[rng.random_range(0..divisors.len())];
        let r = rng.random_range(1..=field.order());
        let h: Vec<Term> = (0..rng.random_range(1..=3))
            .map(|_| Term {
                coeff: field
                    .element_at(rng.random_range(0..field.order()))
                    .unwrap(),
                exponent: rng.random_range(0..=d),
            })
            .collect();
        let reduced = lemma1_check(&field, r, &h, d)
            .unwrap()
            .predicts_permutation();
        let brute =
            is_permutation(&lemma1_assembled(field.clone(), r, &h, d).unwrap()).is_permutation;
        agree += usize::from(reduced == brute);
        permuting += usize::from(brute);
    }
    Verdict::new(
        agree == 200,
        format!(
            "{agree}/200 seeded cases agree ({permuting} permutations, {} non-permutations)",
            200 - permuting
        ),
    )
}

fn random_gspec(rng: &mut ChaCha8Rng, field: &Arc<FieldCtx>) -> GSpec {
    let terms: Vec<Term> = (0..rng.random_range(1..=3))
        .map(|_| Term {
            coeff: field
                .element_at(rng.random_range(1..field.order()))
                .unwrap(),
            exponent: rng.random_range(1..field.order()),
        })
        .collect();
    GSpec::new(field.clone(), &terms).unwrap()
}

fn round_trips(g: &GSpec, h: &FnSpec, tower: pplab::Tower, c: Element, k: u32) -> usize {
    let field = g.field();
    let h_inv = HInverse::build(h).unwrap();
    let mut bad = 0;
    for delta in field.elements() {
        let f = compose_f(g, tower, c, delta, k).unwrap();
        for alpha in field.elements() {
            let x = invert_f(alpha, g, tower, c, delta, k, &h_inv).unwrap();
            bad += usize::from(f.evaluate(x) != alpha);
        }
    }
    bad
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    // (p, n, base degree)
    let towers = [
        (3u32, 2u32, 1u32),
        (5, 2, 1),
        (7, 2, 1),
        (2, 4, 2),
        (2, 6, 2),
    ];
    let policy = DeltaPolicy::default();
    let (mut cases, mut live, mut violations, mut inverse_checks, mut inverse_bad) =
        (0, 0, 0, 0, 0);
    for (p, n, b) in towers {
        let field = Arc::new(FieldCtx::new(p, n).unwrap());
        let tower = field.tower(b).unwrap();
        for _ in 0..100 {
            let g = random_gspec(&mut rng, &field);
            let k = rng.random_range(1..tower.ext_degree);
            let fixed = field
                .subfield_elements(num_integer::gcd(k, tower.ext_degree) * b)
                .unwrap();
            let c = fixed[rng.random_range(1..fixed.len())];
            let report = prop2_check(&g, tower, c, k, &policy).unwrap();
            cases += 1;
            violations += report.violations.len();
            if report.h_permutes {
                live += 1;
                let h = compose_h(&g, tower, c, k).unwrap();
                inverse_checks += 1;
                inverse_bad += round_trips(&g, &h, tower, c, k);
            }
        }
    }

    let (mut monomials, mut literal_bad, mut fiber_bad, mut all_delta_bad, mut wrong_direction) =
        (0, 0, 0, 0, 0);
    for (p, n) in [(3u32, 2u32), (5, 2)] {
        let field = Arc::new(FieldCtx::new(p, n).unwrap());
        let tower = field.tower(1).unwrap();
        for e in 1..field.group_order() {
            let g = GSpec::monomial(field.clone(), e).unwrap();
            let sweep = prop4_sweep(&g, tower).unwrap();
            monomials += 1;
            literal_bad += usize::from(!sweep.disagreements.is_empty());
            fiber_bad += usize::from(!sweep.fiber_disagreements.is_empty());
            all_delta_bad += usize::from(!sweep.all_delta_iff());
            // the only way to disagree is f permuting while h does not
            wrong_direction += usize::from(sweep.h_permutes && !sweep.disagreements.is_empty());
            if sweep.h_permutes {
                let h = compose_h(&g, tower, field.one(), 1).unwrap();
                inverse_checks += 1;
                inverse_bad += round_trips(&g, &h, tower, field.one(), 1);
            }
        }
    }
    let attainable = violations == 0
        && live > 0
        && inverse_bad == 0
        && fiber_bad == 0
        && all_delta_bad == 0
        && wrong_direction == 0;
    let pass = attainable && literal_bad == 0;
    Verdict {
        pass,
        detail: format!(
            "implication: {cases} cases, {live} with h permuting, {violations} violations; \
             per-delta iff over {monomials} monomials on GF(9), GF(25): {literal_bad} monomials with \
             some delta where f permutes but h does not; iff on the delta fiber and iff over all \
             delta: {} and {} failures; inverse round trips: {inverse_checks} maps, {inverse_bad} misses",
            fiber_bad, all_delta_bad
        ),
        known_gap: !pass && attainable,
    }
}

fn criterion_9(extra_fields: &[(u32, u32)]) -> Verdict {
    let f7 = Arc::new(FieldCtx::new(7, 1).unwrap());
    let cube = FnSpec::exponent_sum(
        f7.clone(),
        &[Term {
            coeff: f7.one(),
            exponent: 3,
        }],
    )
    .unwrap();
    let v = is_permutation(&cube);
    let cube_ok = !v.is_permutation && v.witness == Some((1, 2));
    let mut squares = 0;
    let mut square_ok = true;
    for &(p, n) in SMALL_FIELDS
        .iter()
        .chain(extra_fields)
        .filter(|(p, _)| *p != 2)
    {
        let field = Arc::new(FieldCtx::new(p, n).unwrap());
        let sq = FnSpec::exponent_sum(
            field.clone(),
            &[Term {
                coeff: field.one(),
                exponent: 2,
            }],
        )
        .unwrap();
        let v = is_permutation(&sq);
        squares += 1;
        square_ok &= match v.witness {
            Some((a, b)) if !v.is_permutation => {
                let a = field.element_at(a as u64).unwrap();
                let b = field.element_at(b as u64).unwrap();
                a != b && field.mul(a, a) == field.mul(b, b)
            }
            _ => false,
        };
    }
    Verdict::new(
        cube_ok && square_ok,
        format!(
            "x^3 on GF(7) rejected with witness {:?}; x^2 rejected with a colliding witness on {squares} odd fields: {square_ok}",
            v.witness
        ),
    )
}

fn criterion_10(cfg: &RunConfig, table: &RunReport) -> Verdict {
    let sampled = RunConfig {
        delta: DeltaPolicy {
            exhaustive_threshold: 0,
            ..DeltaPolicy::default()
        },
        ..cfg.clone()
    };
    let single = RunConfig {
        jobs: 1,
        ..sampled.clone()
    };
    let a = run_family("thm14", &[5], &sampled).stable_json();
    let b = run_family("thm14", &[5], &single).stable_json();
    let c = run_family("thm14", &[5], &sampled).stable_json();
    let sampled_ok = a == b && a == c && a.contains("\"sampled\"");
    let table_again = harness::table1(&[], &[], cfg).unwrap();
    let table_ok =
        table.stable_json() == table_again.stable_json() && table.to_csv() == table_again.to_csv();
    Verdict::new(
        sampled_ok && table_ok,
        format!(
            "seeded delta samples identical across 3 runs and job counts: {sampled_ok}; Table 1 stable JSON and CSV identical on rerun: {table_ok}"
        ),
    )
}

fn main() -> ExitCode {
    let cfg = RunConfig::default();
    let mut verdicts = vec![
        criterion_1(&cfg),
        criterion_2(&cfg),
        criterion_3(&cfg),
        criterion_4(&cfg),
        criterion_5(&cfg),
    ];
    let (table_verdict, table) = criterion_6(&cfg);
    verdicts.push(table_verdict);
    verdicts.push(criterion_7());
    verdicts.push(criterion_8());
    verdicts.push(criterion_9(&[(3, 4), (5, 4), (7, 4), (17, 2), (5, 6)]));
    verdicts.push(criterion_10(&cfg, &table));

    let mut unexpected = 0;
    for (i, v) in verdicts.iter().enumerate() {
        let status = match (v.pass, v.known_gap) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known gap, see README)",
            (false, false) => "FAIL",
        };
        println!("criterion {}: {status}: {}", i + 1, v.detail);
        unexpected += usize::from(!v.pass && !v.known_gap);
    }
    let passed = verdicts.iter().filter(|v| v.pass).count();
    let gaps = verdicts.iter().filter(|v| !v.pass && v.known_gap).count();
    println!(
        "acceptance: {passed}/{} pass, {gaps} fail as documented, {unexpected} unexpected failures",
        verdicts.len()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
