//! The link between trinomial-style maps `h(x) = g(x)^(q^k) − g(x) + cx`
//! and delta forms `f(x) = g(x^(q^k) − x + δ) + cx`: composition builders,
//! the explicit inverse of `f` through a table for `h⁻¹`, the trace-fiber
//! structure of `x^q − x + δ`, and the quadratic-form scans used by the
//! GF(q^4) trinomial.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Element, FieldCtx, FieldError, Tower};
use crate::perm::{
    eval_terms, frobenius_exponent, is_permutation, normalize_terms, Composition, FnKind, FnSpec,
    PermError, Term,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("coefficient c must be nonzero")]
    ZeroCoefficient,
    #[error("frobenius step {k} must lie in 1..{m}")]
    StepOutOfRange { k: u32, m: u32 },
    #[error("element does not belong to the map's field")]
    ForeignElement,
    #[error("h is not a permutation, so it has no inverse table")]
    NotInvertible,
    #[error("g has coefficients outside the base field GF(q)")]
    CoefficientsOutsideBase,
    #[error("the tower must have extension degree {expected}, found {found}")]
    WrongExtension { expected: u32, found: u32 },
    #[error("quadratic-form scan needs odd characteristic")]
    EvenCharacteristic,
    #[error("trace fiber check failed: {0}")]
    TraceMismatch(String),
    #[error("characterization violated: {0}")]
    CharacterizationViolated(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// A polynomial `g(x) = Σ c_j x^(e_j)` on a fixed field.
#[derive(Debug, Clone)]
pub struct GSpec {
    terms: Vec<Term>,
    field: Arc<FieldCtx>,
    coeff_subfield: u32,
}

impl GSpec {
    pub fn new(field: Arc<FieldCtx>, terms: &[Term]) -> Result<Self, TransformError> {
        if terms.iter().any(|t| !field.contains(t.coeff)) {
            return Err(TransformError::ForeignElement);
        }
        let terms = normalize_terms(&field, terms);
        let n = field.degree();
        let coeff_subfield = (1..=n)
            .filter(|m| n.is_multiple_of(*m))
            .find(|&m| {
                terms
                    .iter()
                    .all(|t| field.is_in_subfield(t.coeff, m).unwrap_or(false))
            })
            .unwrap_or(n);
        Ok(GSpec {
            terms,
            field,
            coeff_subfield,
        })
    }

    /// `g(x) = x^e`.
    pub fn monomial(field: Arc<FieldCtx>, e: u64) -> Result<Self, TransformError> {
        let one = field.one();
        Self::new(
            field,
            &[Term {
                coeff: one,
                exponent: e,
            }],
        )
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn field(&self) -> &Arc<FieldCtx> {
        &self.field
    }

    /// Smallest `m` with every coefficient in GF(p^m).
    pub fn coeff_subfield(&self) -> u32 {
        self.coeff_subfield
    }

    pub fn evaluate(&self, x: Element) -> Element {
        eval_terms(&self.field, &self.terms, x)
    }
}

fn check_step(tower: &Tower, k: u32) -> Result<(), TransformError> {
    if k == 0 || k >= tower.ext_degree {
        return Err(TransformError::StepOutOfRange {
            k,
            m: tower.ext_degree,
        });
    }
    Ok(())
}

fn check_member(field: &FieldCtx, a: Element) -> Result<(), TransformError> {
    if field.contains(a) {
        Ok(())
    } else {
        Err(TransformError::ForeignElement)
    }
}

/// `f(x) = g(x^(q^k) − x + δ) + c·x`.
pub fn compose_f(
    g: &GSpec,
    tower: Tower,
    c: Element,
    delta: Element,
    k: u32,
) -> Result<FnSpec, TransformError> {
    let field = g.field();
    check_member(field, c)?;
    check_member(field, delta)?;
    if c.is_zero() {
        return Err(TransformError::ZeroCoefficient);
    }
    check_step(&tower, k)?;
    Ok(FnSpec::from_parts(
        field.clone(),
        FnKind::Composed(Composition::Outer {
            g: g.terms.clone(),
            c,
            delta,
            frob: frobenius_exponent(field, &tower, k),
        }),
    ))
}

/// `h(x) = g(x)^(q^k) − g(x) + c·x`.
pub fn compose_h(g: &GSpec, tower: Tower, c: Element, k: u32) -> Result<FnSpec, TransformError> {
    let field = g.field();
    check_member(field, c)?;
    if c.is_zero() {
        return Err(TransformError::ZeroCoefficient);
    }
    check_step(&tower, k)?;
    Ok(FnSpec::from_parts(
        field.clone(),
        FnKind::Composed(Composition::Inner {
            g: g.terms.clone(),
            c,
            frob: frobenius_exponent(field, &tower, k),
        }),
    ))
}

/// Whether `c` lies in GF(q^gcd(k, m)), the subfield fixed by the q^k-power
/// map, which the implication from `h` to `f` needs.
pub fn coefficient_is_fixed(field: &FieldCtx, tower: Tower, c: Element, k: u32) -> bool {
    let l = num_integer::gcd(k, tower.ext_degree);
    field
        .is_in_subfield(c, l * tower.base_degree)
        .unwrap_or(false)
}

/// Which δ values a verification visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaPolicy {
    pub seed: u64,
    pub samples: usize,
    /// Fields with at most this many elements are scanned exhaustively.
    pub exhaustive_threshold: u64,
}

impl Default for DeltaPolicy {
    fn default() -> Self {
        DeltaPolicy {
            seed: 0x5eed,
            samples: 64,
            exhaustive_threshold: 1 << 14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DeltaMode {
    Exhaustive,
    Sampled { seed: u64, count: usize },
}

impl DeltaPolicy {
    /// Sorted element indices to use as δ, with the mode that produced them.
    pub fn select(&self, order: u64) -> (Vec<u32>, DeltaMode) {
        if order <= self.exhaustive_threshold || self.samples as u64 >= order {
            return ((0..order as u32).collect(), DeltaMode::Exhaustive);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut picked: Vec<u32> = rand::seq::index::sample(&mut rng, order as usize, self.samples)
            .into_iter()
            .map(|i| i as u32)
            .collect();
        picked.sort_unstable();
        (
            picked,
            DeltaMode::Sampled {
                seed: self.seed,
                count: self.samples,
            },
        )
    }
}

/// Outcome of checking "h permutes ⇒ f permutes for every δ".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop2Report {
    pub h_permutes: bool,
    pub coefficient_fixed: bool,
    pub delta_mode: DeltaMode,
    pub deltas_checked: usize,
    /// δ indices where h permutes but f does not.
    pub violations: Vec<u32>,
}

impl Prop2Report {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `h`; when it permutes, checks `f` for every selected δ.
pub fn prop2_check(
    g: &GSpec,
    tower: Tower,
    c: Element,
    k: u32,
    policy: &DeltaPolicy,
) -> Result<Prop2Report, TransformError> {
    let field = g.field();
    let h = compose_h(g, tower, c, k)?;
    let h_permutes = is_permutation(&h).is_permutation;
    let coefficient_fixed = coefficient_is_fixed(field, tower, c, k);
    let (deltas, delta_mode) = policy.select(field.order());
    if !h_permutes {
        return Ok(Prop2Report {
            h_permutes,
            coefficient_fixed,
            delta_mode,
            deltas_checked: 0,
            violations: Vec::new(),
        });
    }
    let violations = deltas
        .par_iter()
        .map(|&d| -> Result<Option<u32>, TransformError> {
            let delta = field.element_at(d as u64)?;
            let f = compose_f(g, tower, c, delta, k)?;
            Ok((!is_permutation(&f).is_permutation).then_some(d))
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(Prop2Report {
        h_permutes,
        coefficient_fixed,
        delta_mode,
        deltas_checked: deltas.len(),
        violations,
    })
}

/// Dense inverse table of a permutation, by element index.
#[derive(Debug, Clone)]
pub struct HInverse {
    field: Arc<FieldCtx>,
    table: Vec<u32>,
}

impl HInverse {
    pub fn build(h: &FnSpec) -> Result<Self, TransformError> {
        let field = h.field().clone();
        let mut table = vec![u32::MAX; field.order() as usize];
        for x in field.elements() {
            let slot = &mut table[h.evaluate(x).index() as usize];
            if *slot != u32::MAX {
                return Err(TransformError::NotInvertible);
            }
            *slot = x.index();
        }
        Ok(HInverse { field, table })
    }

    pub fn apply(&self, y: Element) -> Element {
        self.field
            .element_at(self.table[y.index() as usize] as u64)
            .expect("table entries are field indices")
    }
}

/// Solves `f(x) = α` for `f(x) = g(x^(q^k) − x + δ) + c·x` via
/// `x = c⁻¹(α − g(h⁻¹(α^(q^k) − α + c·δ)))`.
pub fn invert_f(
    alpha: Element,
    g: &GSpec,
    tower: Tower,
    c: Element,
    delta: Element,
    k: u32,
    h_inverse: &HInverse,
) -> Result<Element, TransformError> {
    let field = g.field();
    check_member(field, alpha)?;
    check_step(&tower, k)?;
    let frob = frobenius_exponent(field, &tower, k);
    let rhs = field.add(
        field.sub(field.monomial(alpha, frob), alpha),
        field.mul(c, delta),
    );
    let y = h_inverse.apply(rhs);
    let x = field.div(field.sub(alpha, g.evaluate(y)), c)?;
    Ok(x)
}

/// The image of `x ↦ x^q − x + δ`, which is the trace fiber over `alpha`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetSet {
    pub alpha: Element,
    pub members: Vec<Element>,
}

/// Computes the image of `x ↦ x^q − x + δ` and checks it is exactly
/// `{y : Tr(y) = Tr(δ)}` with `q^(m−1)` elements.
pub fn trace_coset(
    field: &FieldCtx,
    tower: Tower,
    delta: Element,
) -> Result<CosetSet, TransformError> {
    check_member(field, delta)?;
    if tower.ext_degree < 2 {
        return Err(TransformError::WrongExtension {
            expected: 2,
            found: tower.ext_degree,
        });
    }
    let frob = frobenius_exponent(field, &tower, 1);
    let mut members: Vec<Element> = field
        .elements()
        .map(|x| field.add(field.sub(field.monomial(x, frob), x), delta))
        .collect();
    members.sort();
    members.dedup();
    let alpha = field.trace_to_subfield(delta, tower.base_degree)?;
    let mut fiber = Vec::new();
    for y in field.elements() {
        if field.trace_to_subfield(y, tower.base_degree)? == alpha {
            fiber.push(y);
        }
    }
    let expected = tower.q.pow(tower.ext_degree - 1) as usize;
    if members.len() != expected {
        return Err(TransformError::TraceMismatch(format!(
            "image has {} elements, expected {expected}",
            members.len()
        )));
    }
    if members != fiber {
        return Err(TransformError::TraceMismatch(
            "image differs from the trace fiber".to_string(),
        ));
    }
    Ok(CosetSet { alpha, members })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop4Outcome {
    pub f_permutes: bool,
    pub h_permutes: bool,
    /// h maps the trace fiber of δ bijectively onto itself.
    pub h_permutes_fiber: bool,
    /// φ∘f = h∘φ pointwise, with φ(x) = x^q − x + δ.
    pub commutes: bool,
}

impl Prop4Outcome {
    /// f and h agree for this one δ. Not implied by the commuting square:
    /// f only sees h on the fiber of δ.
    pub fn agrees(&self) -> bool {
        self.f_permutes == self.h_permutes && self.commutes
    }

    /// f permutes exactly when h permutes the fiber of δ.
    pub fn agrees_on_fiber(&self) -> bool {
        self.f_permutes == self.h_permutes_fiber && self.commutes
    }
}

/// Verdicts for `f(x) = g(x^q − x + δ) + x` and `h(x) = g(x)^q − g(x) + x`
/// with `g` over GF(q), plus the commuting relation.
pub fn prop4_check(
    g: &GSpec,
    tower: Tower,
    delta: Element,
) -> Result<Prop4Outcome, TransformError> {
    if !tower.base_degree.is_multiple_of(g.coeff_subfield()) {
        return Err(TransformError::CoefficientsOutsideBase);
    }
    let field = g.field();
    let one = field.one();
    let f = compose_f(g, tower, one, delta, 1)?;
    let h = compose_h(g, tower, one, 1)?;
    let frob = frobenius_exponent(field, &tower, 1);
    let phi = |x: Element| field.add(field.sub(field.monomial(x, frob), x), delta);
    let commutes = field
        .elements()
        .all(|x| phi(f.evaluate(x)) == h.evaluate(phi(x)));
    let fiber = trace_coset(field, tower, delta)?.members;
    let mut image: Vec<Element> = fiber.iter().map(|&y| h.evaluate(y)).collect();
    image.sort();
    Ok(Prop4Outcome {
        f_permutes: is_permutation(&f).is_permutation,
        h_permutes: is_permutation(&h).is_permutation,
        h_permutes_fiber: image == fiber,
        commutes,
    })
}

/// [`prop4_check`] over every δ of the field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop4Sweep {
    pub h_permutes: bool,
    pub deltas: usize,
    /// δ indices for which f permutes.
    pub f_permuting: Vec<u32>,
    pub commutes: bool,
    /// δ indices where f and h disagree.
    pub disagreements: Vec<u32>,
    /// δ indices where f disagrees with h restricted to the fiber of δ.
    pub fiber_disagreements: Vec<u32>,
}

impl Prop4Sweep {
    /// h permutes iff f permutes for every δ.
    pub fn all_delta_iff(&self) -> bool {
        self.commutes && self.h_permutes == (self.f_permuting.len() == self.deltas)
    }
}

pub fn prop4_sweep(g: &GSpec, tower: Tower) -> Result<Prop4Sweep, TransformError> {
    let field = g.field();
    let outcomes = field
        .elements()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&d| prop4_check(g, tower, d).map(|o| (d.index(), o)))
        .collect::<Result<Vec<_>, _>>()?;
    let pick = |keep: &dyn Fn(&Prop4Outcome) -> bool| -> Vec<u32> {
        outcomes
            .iter()
            .filter(|(_, o)| keep(o))
            .map(|(d, _)| *d)
            .collect()
    };
    Ok(Prop4Sweep {
        h_permutes: outcomes.first().is_some_and(|(_, o)| o.h_permutes),
        deltas: outcomes.len(),
        f_permuting: pick(&|o| o.f_permutes),
        commutes: outcomes.iter().all(|(_, o)| o.commutes),
        disagreements: pick(&|o| !o.agrees()),
        fiber_disagreements: pick(&|o| !o.agrees_on_fiber()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadSign {
    Plus,
    Minus,
}

fn require_quartic(field: &FieldCtx, tower: &Tower) -> Result<(), TransformError> {
    if tower.ext_degree != 4 {
        return Err(TransformError::WrongExtension {
            expected: 4,
            found: tower.ext_degree,
        });
    }
    if field.characteristic() == 2 {
        return Err(TransformError::EvenCharacteristic);
    }
    Ok(())
}

/// Nonzero solutions of `x^(2q^2) ± x^(q^2+1) + x^2 = 0` in GF(q^4), by
/// exhaustive scan. Afterwards checks that solutions exist iff `3 | q` and
/// that each satisfies `x^(q^2−1) = ±1`.
pub fn quadratic_form_solutions(
    field: &FieldCtx,
    tower: Tower,
    sign: QuadSign,
) -> Result<Vec<Element>, TransformError> {
    require_quartic(field, &tower)?;
    let q = tower.q;
    let q2 = q * q;
    let group = field.group_order();
    let e_big = (2 * q2) % group;
    let e_mid = (q2 + 1) % group;
    let solutions: Vec<Element> = field
        .nonzero_elements()
        .filter(|&x| {
            let mid = field.monomial(x, e_mid);
            let mid = match sign {
                QuadSign::Plus => mid,
                QuadSign::Minus => field.neg(mid),
            };
            let total = field.add(
                field.add(field.monomial(x, e_big), mid),
                field.monomial(x, 2),
            );
            total.is_zero()
        })
        .collect();
    let divisible = q.is_multiple_of(3);
    if solutions.is_empty() == divisible {
        return Err(TransformError::CharacterizationViolated(format!(
            "q = {q}: {} solutions for sign {sign:?}",
            solutions.len()
        )));
    }
    let target = match sign {
        QuadSign::Plus => field.one(),
        QuadSign::Minus => field.neg(field.one()),
    };
    if let Some(bad) = solutions
        .iter()
        .find(|&&x| field.monomial(x, q2 - 1) != target)
    {
        return Err(TransformError::CharacterizationViolated(format!(
            "solution {bad} has x^(q^2-1) != {target}"
        )));
    }
    Ok(solutions)
}

/// How the GF(q^4) trinomial `x − x^s + x^(q^2·s)`, `s = q^3 + q^2 − q`,
/// acts on the solution sets S₊, S₋ and on T = GF(q^4)* minus S₊ ∪ S₋.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarticStructure {
    pub plus_solutions: usize,
    pub minus_solutions: usize,
    /// f(α) = α for every α in S₊
    pub fixes_plus: bool,
    /// f(α) = α for every α in S₋
    pub fixes_minus: bool,
    /// f(α) = −α for every α in S₋
    pub negates_minus: bool,
    /// f maps S₊ onto S₊ and S₋ onto S₋
    pub permutes_solution_sets: bool,
    /// f(T) ⊆ T
    pub complement_closed: bool,
}

impl QuarticStructure {
    /// f(α) = α on all of S₊ ∪ S₋.
    pub fn fixes_solutions(&self) -> bool {
        self.fixes_plus && self.fixes_minus
    }
}

pub fn quartic_structure(
    field: &Arc<FieldCtx>,
    tower: Tower,
) -> Result<QuarticStructure, TransformError> {
    require_quartic(field, &tower)?;
    let q = tower.q;
    let s = q * q * q + q * q - q;
    let f = FnSpec::trinomial(field.clone(), tower, field.one(), s, 2)?;
    let plus = quadratic_form_solutions(field, tower, QuadSign::Plus)?;
    let minus = quadratic_form_solutions(field, tower, QuadSign::Minus)?;
    let maps_onto = |set: &[Element]| {
        let mut image: Vec<Element> = set.iter().map(|&a| f.evaluate(a)).collect();
        image.sort();
        image == set
    };
    let mut special: Vec<Element> = plus.iter().chain(&minus).copied().collect();
    special.sort();
    let complement_closed = field
        .nonzero_elements()
        .filter(|x| special.binary_search(x).is_err())
        .all(|x| {
            let y = f.evaluate(x);
            !y.is_zero() && special.binary_search(&y).is_err()
        });
    Ok(QuarticStructure {
        plus_solutions: plus.len(),
        minus_solutions: minus.len(),
        fixes_plus: plus.iter().all(|&a| f.evaluate(a) == a),
        fixes_minus: minus.iter().all(|&a| f.evaluate(a) == a),
        negates_minus: minus.iter().all(|&a| f.evaluate(a) == field.neg(a)),
        permutes_solution_sets: maps_onto(&plus) && maps_onto(&minus),
        complement_closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    fn field(p: u32, n: u32) -> Arc<FieldCtx> {
        Arc::new(make_field(p, n).unwrap())
    }

    #[test]
    fn compose_f_with_identity_g_is_frobenius() {
        let f9 = field(3, 2);
        let t = f9.tower(1).unwrap();
        let g = GSpec::monomial(f9.clone(), 1).unwrap();
        let f = compose_f(&g, t, f9.one(), f9.zero(), 1).unwrap();
        for x in f9.elements() {
            assert_eq!(f.evaluate(x), f9.monomial(x, 3));
        }
    }

    #[test]
    fn compose_h_on_monomial_matches_trinomial() {
        for (p, n, b, s, k) in [
            (7, 2, 1, 19, 1),
            (3, 4, 1, 33, 2),
            (2, 4, 2, 7, 1),
            (5, 2, 1, 7, 1),
        ] {
            let fld = field(p, n);
            let t = fld.tower(b).unwrap();
            let g = GSpec::monomial(fld.clone(), s).unwrap();
            for c in fld.nonzero_elements().take(5) {
                let h = compose_h(&g, t, c, k).unwrap();
                let tri = FnSpec::trinomial(fld.clone(), t, c, s, k).unwrap();
                assert_eq!(h.table(), tri.table());
            }
        }
    }

    #[test]
    fn compose_h_square_over_gf9() {
        let f9 = field(3, 2);
        let t = f9.tower(1).unwrap();
        let g = GSpec::monomial(f9.clone(), 2).unwrap();
        let h = compose_h(&g, t, f9.one(), 1).unwrap();
        for x in f9.elements() {
            let expected = f9.add(f9.sub(f9.monomial(x, 6), f9.monomial(x, 2)), x);
            assert_eq!(h.evaluate(x), expected);
        }
    }

    #[test]
    fn compose_rejects_bad_arguments() {
        let f9 = field(3, 2);
        let t = f9.tower(1).unwrap();
        let g = GSpec::monomial(f9.clone(), 2).unwrap();
        assert_eq!(
            compose_h(&g, t, f9.zero(), 1).unwrap_err(),
            TransformError::ZeroCoefficient
        );
        assert!(matches!(
            compose_f(&g, t, f9.one(), f9.zero(), 2),
            Err(TransformError::StepOutOfRange { .. })
        ));
    }

    #[test]
    fn coeff_subfield_detection() {
        let f16 = field(2, 4);
        let g = GSpec::monomial(f16.clone(), 3).unwrap();
        assert_eq!(g.coeff_subfield(), 1);
        let gen = f16.generator();
        let g = GSpec::new(
            f16.clone(),
            &[Term {
                coeff: gen,
                exponent: 2,
            }],
        )
        .unwrap();
        assert_eq!(g.coeff_subfield(), 4);
        let w = f16.subfield_elements(2).unwrap()[2];
        let g = GSpec::new(
            f16,
            &[Term {
                coeff: w,
                exponent: 1,
            }],
        )
        .unwrap();
        assert_eq!(g.coeff_subfield(), 2);
    }

    #[test]
    fn prop2_on_thm5_instance() {
        let f81 = field(3, 4);
        let t = f81.tower(2).unwrap();
        let g = GSpec::monomial(f81.clone(), 65).unwrap();
        let minus_two = f81.from_int(-2);
        let c = f81
            .nonzero_elements()
            .find(|&c| f81.monomial(f81.div(minus_two, c).unwrap(), 5) == f81.one())
            .unwrap();
        let report = prop2_check(&g, t, c, 1, &DeltaPolicy::default()).unwrap();
        assert!(report.h_permutes);
        assert_eq!(report.deltas_checked, 81);
        assert!(report.holds());
    }

    #[test]
    fn prop2_identity_g() {
        let f25 = field(5, 2);
        let t = f25.tower(1).unwrap();
        let g = GSpec::monomial(f25.clone(), 1).unwrap();
        let report = prop2_check(&g, t, f25.one(), 1, &DeltaPolicy::default()).unwrap();
        assert!(report.h_permutes && report.holds());
        assert_eq!(report.delta_mode, DeltaMode::Exhaustive);
    }

    #[test]
    fn delta_sampling_is_seeded() {
        let policy = DeltaPolicy {
            seed: 7,
            samples: 64,
            exhaustive_threshold: 1 << 14,
        };
        let (a, mode) = policy.select(1 << 16);
        let (b, _) = policy.select(1 << 16);
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(mode, DeltaMode::Sampled { seed: 7, count: 64 });
        let other = DeltaPolicy { seed: 8, ..policy }.select(1 << 16).0;
        assert_ne!(a, other);
        assert_eq!(policy.select(49).0.len(), 49);
    }

    #[test]
    fn invert_f_round_trip_thm13() {
        let f49 = field(7, 2);
        let t = f49.tower(1).unwrap();
        let g = GSpec::monomial(f49.clone(), 19).unwrap();
        let one = f49.one();
        let h_inv = HInverse::build(&compose_h(&g, t, one, 1).unwrap()).unwrap();
        for delta in f49.elements() {
            let f = compose_f(&g, t, one, delta, 1).unwrap();
            for x in f49.elements() {
                let alpha = f.evaluate(x);
                assert_eq!(invert_f(alpha, &g, t, one, delta, 1, &h_inv).unwrap(), x);
            }
        }
    }

    #[test]
    fn inverse_table_requires_permutation() {
        let f9 = field(3, 2);
        let sq = FnSpec::exponent_sum(
            f9.clone(),
            &[Term {
                coeff: f9.one(),
                exponent: 2,
            }],
        )
        .unwrap();
        assert_eq!(
            HInverse::build(&sq).unwrap_err(),
            TransformError::NotInvertible
        );
    }

    #[test]
    fn trace_cosets() {
        let f9 = field(3, 2);
        let t = f9.tower(1).unwrap();
        let zero = trace_coset(&f9, t, f9.zero()).unwrap();
        assert_eq!(zero.members.len(), 3);
        assert!(zero.alpha.is_zero());

        let f49 = field(7, 2);
        let t = f49.tower(1).unwrap();
        let mut by_alpha = std::collections::BTreeMap::new();
        for d in f49.elements() {
            let set = trace_coset(&f49, t, d).unwrap();
            assert_eq!(set.members.len(), 7);
            let prev = by_alpha
                .entry(set.alpha)
                .or_insert_with(|| set.members.clone());
            assert_eq!(*prev, set.members);
        }
        assert_eq!(by_alpha.len(), 7);
        let mut all: Vec<Element> = by_alpha.into_values().flatten().collect();
        all.sort();
        assert_eq!(all, f49.elements().collect::<Vec<_>>());
    }

    #[test]
    fn prop4_examples() {
        let f49 = field(7, 2);
        let t = f49.tower(1).unwrap();
        let g = GSpec::monomial(f49.clone(), 19).unwrap();
        for d in f49.elements() {
            let out = prop4_check(&g, t, d).unwrap();
            assert!(out.f_permutes && out.h_permutes && out.h_permutes_fiber && out.commutes);
        }
        // g = x^2 over GF(9): h permutes two of the three trace fibers, so
        // f permutes for six δ while h does not permute the field
        let f9 = field(3, 2);
        let t9 = f9.tower(1).unwrap();
        let sweep = prop4_sweep(&GSpec::monomial(f9.clone(), 2).unwrap(), t9).unwrap();
        assert!(!sweep.h_permutes);
        assert_eq!(sweep.f_permuting.len(), 6);
        assert_eq!(sweep.disagreements.len(), 6);
        assert!(sweep.fiber_disagreements.is_empty());
        assert!(sweep.all_delta_iff());
        let zero_g = GSpec::new(f9.clone(), &[]).unwrap();
        let out = prop4_check(&zero_g, t9, f9.one()).unwrap();
        assert!(out.f_permutes && out.h_permutes);
        let outside = GSpec::new(
            f9.clone(),
            &[Term {
                coeff: f9.generator(),
                exponent: 2,
            }],
        )
        .unwrap();
        assert_eq!(
            prop4_check(&outside, t9, f9.zero()).unwrap_err(),
            TransformError::CoefficientsOutsideBase
        );
    }

    #[test]
    fn quadratic_forms() {
        let f81 = field(3, 4);
        let t = f81.tower(1).unwrap();
        let plus = quadratic_form_solutions(&f81, t, QuadSign::Plus).unwrap();
        assert_eq!(plus.len(), 8);
        let mut gf9: Vec<Element> = f81.subfield_elements(2).unwrap()[1..].to_vec();
        gf9.sort();
        assert_eq!(plus, gf9);
        let minus = quadratic_form_solutions(&f81, t, QuadSign::Minus).unwrap();
        assert_eq!(minus.len(), 8);
        let neg_one = f81.neg(f81.one());
        assert!(minus.iter().all(|&x| f81.monomial(x, 8) == neg_one));

        let f625 = field(5, 4);
        let t = f625.tower(1).unwrap();
        for sign in [QuadSign::Plus, QuadSign::Minus] {
            assert!(quadratic_form_solutions(&f625, t, sign).unwrap().is_empty());
        }
    }

    #[test]
    fn quartic_structure_q3() {
        let f81 = field(3, 4);
        let t = f81.tower(1).unwrap();
        let st = quartic_structure(&f81, t).unwrap();
        assert_eq!((st.plus_solutions, st.minus_solutions), (8, 8));
        assert!(st.fixes_plus && st.permutes_solution_sets && st.complement_closed);
        // on S₋ the map is α ↦ −α, so S₋ is permuted but not fixed
        assert!(st.negates_minus && !st.fixes_minus);
    }
}
