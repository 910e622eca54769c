use std::sync::{Arc, OnceLock};

use pplab::transform::{
    compose_f, compose_h, invert_f, prop2_check, prop4_check, prop4_sweep, trace_coset, HInverse,
};
use pplab::{is_permutation, DeltaPolicy, FieldCtx, GSpec, Term, Tower};
use proptest::prelude::*;

/// (p, n, base degree)
const TOWERS: &[(u32, u32, u32)] = &[(3, 2, 1), (5, 2, 1), (2, 4, 2), (2, 6, 2), (2, 3, 1)];

fn towers() -> &'static [(Arc<FieldCtx>, Tower)] {
    static CACHE: OnceLock<Vec<(Arc<FieldCtx>, Tower)>> = OnceLock::new();
    CACHE.get_or_init(|| {
        TOWERS
            .iter()
            .map(|&(p, n, b)| {
                let f = Arc::new(FieldCtx::new(p, n).unwrap());
                let t = f.tower(b).unwrap();
                (f, t)
            })
            .collect()
    })
}

#[derive(Debug, Clone)]
struct Case {
    tower: usize,
    terms: Vec<(u64, u64)>,
    step: u32,
    coeff: u64,
}

fn case() -> impl Strategy<Value = Case> {
    (
        0..TOWERS.len(),
        prop::collection::vec((any::<u64>(), any::<u64>()), 1..=3),
        any::<u32>(),
        any::<u64>(),
    )
        .prop_map(|(tower, terms, step, coeff)| Case {
            tower,
            terms,
            step,
            coeff,
        })
}

struct Built {
    field: Arc<FieldCtx>,
    tower: Tower,
    g: GSpec,
    k: u32,
    c: pplab::Element,
}

/// Materializes a case: `g` has arbitrary coefficients, `c` is a nonzero
/// element of GF(q^gcd(k, m)).
fn build(case: &Case) -> Built {
    let (field, tower) = towers()[case.tower].clone();
    let terms: Vec<Term> = case
        .terms
        .iter()
        .map(|&(c, e)| Term {
            coeff: field.element_at(c % field.order()).unwrap(),
            exponent: 1 + e % field.group_order(),
        })
        .collect();
    let g = GSpec::new(field.clone(), &terms).unwrap();
    let k = 1 + case.step % (tower.ext_degree - 1);
    let fixed_degree = num_integer::gcd(k, tower.ext_degree) * tower.base_degree;
    let fixed = field.subfield_elements(fixed_degree).unwrap();
    let c = fixed[1 + (case.coeff as usize % (fixed.len() - 1))];
    Built {
        field,
        tower,
        g,
        k,
        c,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn h_permuting_forces_f_permuting_for_every_delta(case in case()) {
        let b = build(&case);
        let report = prop2_check(&b.g, b.tower, b.c, b.k, &DeltaPolicy::default()).unwrap();
        prop_assert!(report.coefficient_fixed);
        prop_assert!(report.holds(), "violations at δ = {:?}", report.violations);
        if report.h_permutes {
            prop_assert_eq!(report.deltas_checked as u64, b.field.order());
        }
    }

    #[test]
    fn inverse_formula_round_trips(case in case(), delta in any::<u64>()) {
        let b = build(&case);
        let h = compose_h(&b.g, b.tower, b.c, b.k).unwrap();
        if !is_permutation(&h).is_permutation {
            prop_assert!(HInverse::build(&h).is_err());
            return Ok(());
        }
        let h_inv = HInverse::build(&h).unwrap();
        let delta = b.field.element_at(delta % b.field.order()).unwrap();
        let f = compose_f(&b.g, b.tower, b.c, delta, b.k).unwrap();
        for alpha in b.field.elements() {
            let x = invert_f(alpha, &b.g, b.tower, b.c, delta, b.k, &h_inv).unwrap();
            prop_assert_eq!(f.evaluate(x), alpha);
        }
    }

    #[test]
    fn composed_maps_match_direct_evaluation(case in case(), delta in any::<u64>(), x in any::<u64>()) {
        let b = build(&case);
        let field = &b.field;
        let delta = field.element_at(delta % field.order()).unwrap();
        let x = field.element_at(x % field.order()).unwrap();
        let qk = b.tower.frobenius_power(b.k);
        let f = compose_f(&b.g, b.tower, b.c, delta, b.k).unwrap();
        let h = compose_h(&b.g, b.tower, b.c, b.k).unwrap();
        let inner = field.add(field.sub(field.frobenius(x, qk), x), delta);
        let want_f = field.add(b.g.evaluate(inner), field.mul(b.c, x));
        let gx = b.g.evaluate(x);
        let want_h = field.add(field.sub(field.frobenius(gx, qk), gx), field.mul(b.c, x));
        prop_assert_eq!(f.evaluate(x), want_f);
        prop_assert_eq!(h.evaluate(x), want_h);
    }
}

#[test]
fn trace_cosets_partition_each_field() {
    for (field, tower) in towers() {
        let mut covered = vec![0u32; field.order() as usize];
        for alpha in field.subfield_elements(tower.base_degree).unwrap() {
            // any δ with trace α; the fiber is the same for all of them
            let delta = field
                .elements()
                .find(|&d| field.trace_to_subfield(d, tower.base_degree).unwrap() == *alpha)
                .unwrap();
            let coset = trace_coset(field, *tower, delta).unwrap();
            assert_eq!(coset.alpha, *alpha);
            for y in coset.members {
                covered[y.index() as usize] += 1;
            }
        }
        assert!(covered.iter().all(|&c| c == 1));
    }
}

#[test]
fn prop4_holds_for_base_coefficient_polynomials() {
    for (field, tower) in towers().iter().filter(|(_, t)| t.ext_degree >= 2) {
        let base = field.subfield_elements(tower.base_degree).unwrap();
        for e in 1..field.group_order().min(24) {
            for &coeff in base.iter().skip(1).take(3) {
                let g = GSpec::new(field.clone(), &[Term { coeff, exponent: e }]).unwrap();
                for delta in field.elements().step_by(5) {
                    let outcome = prop4_check(&g, *tower, delta).unwrap();
                    assert!(outcome.agrees_on_fiber(), "e = {e}, δ = {}", delta.index());
                }
                assert!(prop4_sweep(&g, *tower).unwrap().all_delta_iff());
            }
        }
    }
}

#[test]
fn inverse_formula_round_trips_for_every_permuting_monomial() {
    for (field, tower) in towers() {
        let one = field.one();
        let mut permuting = 0;
        for e in 1..field.group_order() {
            let g = GSpec::monomial(field.clone(), e).unwrap();
            let h = compose_h(&g, *tower, one, 1).unwrap();
            let Ok(h_inv) = HInverse::build(&h) else {
                continue;
            };
            permuting += 1;
            for delta in field.elements() {
                let f = compose_f(&g, *tower, one, delta, 1).unwrap();
                for alpha in field.elements() {
                    let x = invert_f(alpha, &g, *tower, one, delta, 1, &h_inv).unwrap();
                    assert_eq!(f.evaluate(x), alpha);
                }
            }
        }
        assert!(permuting > 0, "no permuting h over GF({})", field.order());
    }
}
