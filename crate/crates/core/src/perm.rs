//! Pointwise-evaluable maps on a field and exhaustive bijectivity checks.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{canonical_positive, gcd, Element, FieldCtx, FieldError, Tower};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("coefficient c must be nonzero")]
    ZeroCoefficient,
    #[error("exponent {s} is a multiple of the group order {group}")]
    DegenerateExponent { s: u64, group: u64 },
    #[error("frobenius step {k} must lie in 1..{m}")]
    StepOutOfRange { k: u32, m: u32 },
    #[error("element does not belong to the field of this map")]
    ForeignElement,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// One term `coeff · x^exponent` of an exponent sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub coeff: Element,
    pub exponent: u64,
}

/// Builds a tidy term list: exponents reduced into `[1, group]` (0 kept
/// for constants), equal exponents merged, zero coefficients dropped.
pub fn normalize_terms(field: &FieldCtx, terms: &[Term]) -> Vec<Term> {
    let group = field.group_order();
    let mut out: Vec<Term> = Vec::new();
    for t in terms {
        let e = canonical_positive(t.exponent, group);
        match out.iter_mut().find(|u| u.exponent == e) {
            Some(u) => u.coeff = field.add(u.coeff, t.coeff),
            None => out.push(Term {
                coeff: t.coeff,
                exponent: e,
            }),
        }
    }
    out.retain(|t| !t.coeff.is_zero());
    out.sort_by_key(|t| t.exponent);
    out
}

/// Σ coeff·x^exponent with `x^0 = 1`.
pub fn eval_terms(field: &FieldCtx, terms: &[Term], x: Element) -> Element {
    terms.iter().fold(field.zero(), |acc, t| {
        field.add(acc, field.mul(t.coeff, field.monomial(x, t.exponent)))
    })
}

/// How a composed map combines its inner polynomial `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Composition {
    /// x ↦ g(x^(q^k) − x + δ) + c·x
    Outer {
        g: Vec<Term>,
        c: Element,
        delta: Element,
        frob: u64,
    },
    /// x ↦ g(x)^(q^k) − g(x) + c·x
    Inner { g: Vec<Term>, c: Element, frob: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FnKind {
    /// x ↦ c·x − x^s + x^(q^k·s)
    Trinomial {
        c: Element,
        s: u64,
        step: u32,
        shifted: u64,
    },
    /// x ↦ (x^(q^k) − x + δ)^s + c·x
    DeltaForm {
        c: Element,
        s: u64,
        step: u32,
        delta: Element,
        frob: u64,
    },
    ExponentSum {
        terms: Vec<Term>,
    },
    Composed(Composition),
}

/// A map on a field, evaluated pointwise from its parameters.
#[derive(Debug, Clone)]
pub struct FnSpec {
    field: Arc<FieldCtx>,
    kind: FnKind,
}

fn checked_step(tower: &Tower, k: u32) -> Result<(), PermError> {
    if k == 0 || k >= tower.ext_degree {
        return Err(PermError::StepOutOfRange {
            k,
            m: tower.ext_degree,
        });
    }
    Ok(())
}

/// Exponent q^k = p^(b·k) reduced into `[1, group]`.
pub(crate) fn frobenius_exponent(field: &FieldCtx, tower: &Tower, k: u32) -> u64 {
    let group = field.group_order();
    let e = crate::field::pow_mod(
        field.characteristic() as u64,
        tower.frobenius_power(k),
        group,
    );
    canonical_positive(if e == 0 { group } else { e }, group)
}

impl FnSpec {
    pub(crate) fn from_parts(field: Arc<FieldCtx>, kind: FnKind) -> Self {
        FnSpec { field, kind }
    }

    /// x ↦ c·x − x^s + x^(q^k·s) on `field` viewed over GF(q) by `tower`.
    /// In characteristic two this is the `cx + x^s + x^(qs)` form.
    pub fn trinomial(
        field: Arc<FieldCtx>,
        tower: Tower,
        c: Element,
        s: u64,
        k: u32,
    ) -> Result<Self, PermError> {
        if !field.contains(c) {
            return Err(PermError::ForeignElement);
        }
        if c.is_zero() {
            return Err(PermError::ZeroCoefficient);
        }
        let group = field.group_order();
        if s == 0 || s.is_multiple_of(group) {
            return Err(PermError::DegenerateExponent { s, group });
        }
        checked_step(&tower, k)?;
        let frob = frobenius_exponent(&field, &tower, k);
        let s = canonical_positive(s, group);
        let shifted =
            canonical_positive(((s as u128 * frob as u128) % group as u128) as u64, group);
        let shifted = if shifted == 0 { group } else { shifted };
        Ok(FnSpec {
            field,
            kind: FnKind::Trinomial {
                c,
                s,
                step: k,
                shifted,
            },
        })
    }

    /// x ↦ (x^(q^k) − x + δ)^s + c·x.
    pub fn delta_form(
        field: Arc<FieldCtx>,
        tower: Tower,
        c: Element,
        s: u64,
        k: u32,
        delta: Element,
    ) -> Result<Self, PermError> {
        if !field.contains(c) || !field.contains(delta) {
            return Err(PermError::ForeignElement);
        }
        if c.is_zero() {
            return Err(PermError::ZeroCoefficient);
        }
        if s == 0 {
            return Err(PermError::DegenerateExponent {
                s,
                group: field.group_order(),
            });
        }
        checked_step(&tower, k)?;
        let frob = frobenius_exponent(&field, &tower, k);
        let s = canonical_positive(s, field.group_order());
        Ok(FnSpec {
            field,
            kind: FnKind::DeltaForm {
                c,
                s,
                step: k,
                delta,
                frob,
            },
        })
    }

    /// Σ coeff·x^exponent.
    pub fn exponent_sum(field: Arc<FieldCtx>, terms: &[Term]) -> Result<Self, PermError> {
        if terms.iter().any(|t| !field.contains(t.coeff)) {
            return Err(PermError::ForeignElement);
        }
        let terms = normalize_terms(&field, terms);
        Ok(FnSpec {
            field,
            kind: FnKind::ExponentSum { terms },
        })
    }

    /// x ↦ x.
    pub fn identity(field: Arc<FieldCtx>) -> Self {
        let one = field.one();
        FnSpec::exponent_sum(
            field,
            &[Term {
                coeff: one,
                exponent: 1,
            }],
        )
        .expect("identity is well-formed")
    }

    pub fn field(&self) -> &Arc<FieldCtx> {
        &self.field
    }

    pub fn kind(&self) -> &FnKind {
        &self.kind
    }

    /// The exponent `s` for trinomial and delta forms.
    pub fn exponent(&self) -> Option<u64> {
        match self.kind {
            FnKind::Trinomial { s, .. } | FnKind::DeltaForm { s, .. } => Some(s),
            _ => None,
        }
    }

    #[inline]
    pub fn evaluate(&self, x: Element) -> Element {
        let f = &*self.field;
        match &self.kind {
            FnKind::Trinomial { c, s, shifted, .. } => {
                let lin = f.mul(*c, x);
                f.add(f.sub(lin, f.monomial(x, *s)), f.monomial(x, *shifted))
            }
            FnKind::DeltaForm {
                c, s, delta, frob, ..
            } => {
                let inner = f.add(f.sub(f.monomial(x, *frob), x), *delta);
                f.add(f.monomial(inner, *s), f.mul(*c, x))
            }
            FnKind::ExponentSum { terms } => eval_terms(f, terms, x),
            FnKind::Composed(Composition::Outer { g, c, delta, frob }) => {
                let inner = f.add(f.sub(f.monomial(x, *frob), x), *delta);
                f.add(eval_terms(f, g, inner), f.mul(*c, x))
            }
            FnKind::Composed(Composition::Inner { g, c, frob }) => {
                let gx = eval_terms(f, g, x);
                f.add(f.sub(f.monomial(gx, *frob), gx), f.mul(*c, x))
            }
        }
    }

    /// Dense value table indexed by element index.
    pub fn table(&self) -> Vec<u32> {
        self.field
            .elements()
            .map(|x| self.evaluate(x).index())
            .collect()
    }
}

/// Outcome of an exhaustive bijectivity scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermVerdict {
    pub is_permutation: bool,
    /// Lexicographically-first pair `(a, b)`, `a < b`, with `f(a) = f(b)`,
    /// as element indices.
    pub witness: Option<(u32, u32)>,
    /// Number of field elements not in the image.
    pub image_deficit: u64,
}

struct BitSet(Vec<u64>);

impl BitSet {
    fn new(len: usize) -> Self {
        BitSet(vec![0; len.div_ceil(64)])
    }

    /// Sets bit `i`, returning whether it was already set.
    #[inline]
    fn insert(&mut self, i: u32) -> bool {
        let (w, b) = ((i / 64) as usize, i % 64);
        let was = self.0[w] >> b & 1 == 1;
        self.0[w] |= 1 << b;
        was
    }

    #[inline]
    fn contains(&self, i: u32) -> bool {
        self.0[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    fn count(&self) -> u64 {
        self.0.iter().map(|w| w.count_ones() as u64).sum()
    }
}

/// Exhaustive check that `f` is a bijection of its field.
pub fn is_permutation(f: &FnSpec) -> PermVerdict {
    let field = f.field();
    let order = field.order() as usize;
    let mut seen = BitSet::new(order);
    let mut repeated = BitSet::new(order);
    let mut any_repeat = false;
    for x in field.elements() {
        let y = f.evaluate(x).index();
        if seen.insert(y) {
            repeated.insert(y);
            any_repeat = true;
        }
    }
    let image_deficit = order as u64 - seen.count();
    let witness = if any_repeat {
        first_collision(f, &repeated)
    } else {
        None
    };
    PermVerdict {
        is_permutation: witness.is_none() && image_deficit == 0,
        witness,
        image_deficit,
    }
}

/// Smallest `a` whose image is hit twice, paired with the next preimage.
fn first_collision(f: &FnSpec, repeated: &BitSet) -> Option<(u32, u32)> {
    let field = f.field();
    let mut elems = field.elements();
    let (a, ya) = elems.find_map(|x| {
        let y = f.evaluate(x).index();
        repeated.contains(y).then_some((x.index(), y))
    })?;
    let b = elems.find(|&x| f.evaluate(x).index() == ya)?;
    Some((a, b.index()))
}

/// Both sides of the cyclotomic reduction for `x^r · h(x^((Q−1)/d))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma1Outcome {
    /// gcd(r, (Q−1)/d) = 1
    pub gcd_ok: bool,
    /// x ↦ x^r · h(x)^((Q−1)/d) permutes μ_d
    pub mu_permuted: bool,
}

impl Lemma1Outcome {
    pub fn predicts_permutation(&self) -> bool {
        self.gcd_ok && self.mu_permuted
    }
}

/// The map x ↦ x^r · h(x^((Q−1)/d)) on the whole field, as an exponent sum.
pub fn lemma1_assembled(
    field: Arc<FieldCtx>,
    r: u64,
    h: &[Term],
    d: u64,
) -> Result<FnSpec, PermError> {
    let group = field.group_order();
    if d == 0 || !group.is_multiple_of(d) {
        return Err(FieldError::BadSubgroupOrder { d, group }.into());
    }
    let stride = group / d;
    let terms: Vec<Term> = h
        .iter()
        .map(|t| Term {
            coeff: t.coeff,
            exponent: r + (t.exponent % group) * stride,
        })
        .collect();
    FnSpec::exponent_sum(field, &terms)
}

/// Evaluates the two conditions of the reduction. The μ_d condition is
/// decided by comparing image sets directly, not through any gcd shortcut.
pub fn lemma1_check(
    field: &FieldCtx,
    r: u64,
    h: &[Term],
    d: u64,
) -> Result<Lemma1Outcome, PermError> {
    if h.iter().any(|t| !field.contains(t.coeff)) {
        return Err(PermError::ForeignElement);
    }
    let mu = field.mu_subgroup(d)?;
    let stride = field.group_order() / d;
    let gcd_ok = gcd(r, stride) == 1;
    let mut image: Vec<Element> = mu
        .iter()
        .map(|&x| {
            let hx = eval_terms(field, h, x);
            field.mul(field.monomial(x, r), field.monomial(hx, stride))
        })
        .collect();
    image.sort();
    Ok(Lemma1Outcome {
        gcd_ok,
        mu_permuted: image == mu,
    })
}
