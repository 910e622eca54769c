//! Catalog of permutation-polynomial families, their applicability
//! predicates, coefficient conditions, and exponent canonicalization.
//!
//! Every family is one of two forms over GF(q^m):
//!
//! * trinomial: `c·x − x^s + x^(q^k·s)`
//! * delta form: `(x^(q^k) − x + δ)^s + c·x`
//!
//! Even-characteristic exponents are stored twice, as the closed formula
//! for `s` and as the value `i` in `s = i(q−1) + 1` (with `i` read modulo
//! `q + 1` when it is negative or fractional). Both routes must agree.

use std::fmt;
use std::sync::{Arc, LazyLock};

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Element, FieldCtx, FieldError};
use crate::perm::{FnSpec, PermError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("unknown family id `{0}`")]
    UnknownFamily(String),
    #[error("family {id} does not apply to {params}")]
    NotApplicable { id: String, params: FamilyParams },
    #[error("coefficient {0} fails the family's condition")]
    InvalidCoefficient(Element),
    #[error("delta form needs δ, trinomial must not have one")]
    DeltaMismatch,
    #[error("{den} is not invertible modulo {modulus}")]
    NonInvertible { den: i128, modulus: u64 },
    #[error("Ω is only defined in characteristic 2")]
    OddCharacteristic,
    #[error("field GF({p}^{n}) does not match the family's target field")]
    WrongField { p: u32, n: u32 },
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// An exact rational `num/den`, `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac {
    pub num: i128,
    pub den: i128,
}

impl Frac {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = num.gcd(&den).max(1);
        let sign = if den < 0 { -1 } else { 1 };
        Frac {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn int(v: i128) -> Self {
        Frac { num: v, den: 1 }
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    let eg = a.rem_euclid(m).extended_gcd(&m);
    (eg.gcd == 1).then(|| eg.x.rem_euclid(m))
}

/// `frac` as a residue modulo `modulus`: exact division when the fraction
/// is integral, otherwise multiplication by the inverse of the denominator.
pub fn reduce_fraction(frac: Frac, modulus: u64) -> Result<u64, FamilyError> {
    let f = Frac::new(frac.num, frac.den);
    let m = modulus as i128;
    if f.den == 1 {
        return Ok(f.num.rem_euclid(m) as u64);
    }
    let inv = mod_inverse(f.den, m).ok_or(FamilyError::NonInvertible {
        den: f.den,
        modulus,
    })?;
    Ok((f.num.rem_euclid(m) * inv).rem_euclid(m) as u64)
}

/// Exponent `s = i*(q − 1) + 1` for `i = i_num / i_den` read modulo `q + 1`.
/// The fraction is reduced to lowest terms first.
pub fn canonical_exponent(i_num: i128, i_den: i128, q: u64) -> Result<u64, FamilyError> {
    let i_star = reduce_fraction(Frac::new(i_num, i_den), q + 1)?;
    Ok(i_star * (q - 1) + 1)
}

/// Field parameters a family is instantiated at: `q = p^e`. In
/// characteristic two `e` is the `k` of `q = 2^k`; `k_prime` is the
/// auxiliary exponent some even-characteristic families carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyParams {
    pub p: u32,
    pub e: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_prime: Option<u32>,
}

impl FamilyParams {
    pub fn new(p: u32, e: u32) -> Self {
        FamilyParams {
            p,
            e,
            k_prime: None,
        }
    }

    pub fn with_k_prime(mut self, k_prime: u32) -> Self {
        self.k_prime = Some(k_prime);
        self
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.e)
    }

    /// Q = 2^(k/2) for even k.
    pub fn half_q(&self) -> u64 {
        (self.p as u64).pow(self.e / 2)
    }
}

impl fmt::Display for FamilyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q = {}^{}", self.p, self.e)?;
        if let Some(kp) = self.k_prime {
            write!(f, ", k' = {kp}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Trinomial,
    DeltaForm,
}

/// Target field GF(q^2) or GF(q^4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldShape {
    Square,
    Quartic,
}

impl FieldShape {
    pub fn ext_degree(self) -> u32 {
        match self {
            FieldShape::Square => 2,
            FieldShape::Quartic => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    OddCharacteristic,
    EvenCharacteristic,
    QMod {
        modulus: u64,
        residue: u64,
    },
    KEven,
    KOdd,
    /// gcd(2^k' − 1, 2^k + 1) = 1
    CoprimeMinus,
    /// gcd(2^k' + 1, 2^k + 1) = 1
    CoprimePlus,
}

impl Constraint {
    pub fn holds(&self, params: &FamilyParams) -> bool {
        let q = params.q();
        match *self {
            Constraint::OddCharacteristic => params.p != 2,
            Constraint::EvenCharacteristic => params.p == 2,
            Constraint::QMod { modulus, residue } => q % modulus == residue,
            Constraint::KEven => params.e.is_multiple_of(2),
            Constraint::KOdd => params.e % 2 == 1,
            Constraint::CoprimeMinus | Constraint::CoprimePlus => {
                let Some(kp) = params.k_prime.filter(|&kp| (1..63).contains(&kp)) else {
                    return false;
                };
                let a = if *self == Constraint::CoprimeMinus {
                    (1u64 << kp) - 1
                } else {
                    (1u64 << kp) + 1
                };
                a.gcd(&(q + 1)) == 1
            }
        }
    }

    pub fn needs_k_prime(&self) -> bool {
        matches!(self, Constraint::CoprimeMinus | Constraint::CoprimePlus)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::OddCharacteristic => write!(f, "q odd"),
            Constraint::EvenCharacteristic => write!(f, "q = 2^k"),
            Constraint::QMod { modulus, residue } => write!(f, "q ≡ {residue} (mod {modulus})"),
            Constraint::KEven => write!(f, "k even"),
            Constraint::KOdd => write!(f, "k odd"),
            Constraint::CoprimeMinus => write!(f, "gcd(2^k' - 1, 2^k + 1) = 1"),
            Constraint::CoprimePlus => write!(f, "gcd(2^k' + 1, 2^k + 1) = 1"),
        }
    }
}

/// Which subfield the coefficient `c` ranges over (always excluding 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// GF(q^m)*
    Full,
    /// GF(q)*
    Base,
    /// GF(Q)*, Q = 2^(k/2)
    HalfBase,
    /// (GF(2^k') ∩ GF(q))*
    KPrimeMeet,
}

impl Domain {
    /// Absolute degree over the prime field.
    pub fn degree(&self, params: &FamilyParams, shape: FieldShape) -> u32 {
        match self {
            Domain::Full => params.e * shape.ext_degree(),
            Domain::Base => params.e,
            Domain::HalfBase => params.e / 2,
            Domain::KPrimeMeet => params.e.gcd(&params.k_prime.unwrap_or(1)),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Full => "GF(q^m)*",
            Domain::Base => "GF(q)*",
            Domain::HalfBase => "GF(2^(k/2))*",
            Domain::KPrimeMeet => "GF(2^k')* ∩ GF(q)",
        })
    }
}

/// Exponent of a power-unity condition as a function of q.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnityExponent {
    /// (q + 1) / 2
    HalfQPlusOne,
    /// (q + 1) / 3
    ThirdQPlusOne,
}

impl UnityExponent {
    fn eval(self, q: u64) -> u64 {
        match self {
            UnityExponent::HalfQPlusOne => q.div_ceil(2),
            UnityExponent::ThirdQPlusOne => (q + 1) / 3,
        }
    }
}

/// Catalog-level condition on `c`; resolved against concrete parameters
/// into a [`CoeffCondition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CondRule {
    PowerUnity {
        numerator: i64,
        exponent: UnityExponent,
    },
    CubeUnity,
    Omega,
    Subfield,
    Fixed(i64),
    Trivial,
}

impl CondRule {
    pub fn resolve(&self, params: &FamilyParams) -> CoeffCondition {
        match *self {
            CondRule::PowerUnity {
                numerator,
                exponent,
            } => CoeffCondition::PowerUnity {
                numerator,
                exponent: exponent.eval(params.q()),
            },
            CondRule::CubeUnity => CoeffCondition::CubeUnity,
            CondRule::Omega => CoeffCondition::Omega,
            CondRule::Subfield => CoeffCondition::Subfield,
            CondRule::Fixed(v) => CoeffCondition::Fixed(v),
            CondRule::Trivial => CoeffCondition::Trivial,
        }
    }
}

impl fmt::Display for CondRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CondRule::PowerUnity {
                numerator,
                exponent,
            } => {
                let e = match exponent {
                    UnityExponent::HalfQPlusOne => "(q+1)/2",
                    UnityExponent::ThirdQPlusOne => "(q+1)/3",
                };
                if *numerator == 1 {
                    write!(f, "c^{e} = 1")
                } else {
                    write!(f, "({numerator}/c)^{e} = 1")
                }
            }
            CondRule::CubeUnity => write!(f, "c^3 = 1"),
            CondRule::Omega => write!(f, "c ∈ Ω"),
            CondRule::Subfield => write!(f, "any c in the domain"),
            CondRule::Fixed(v) => write!(f, "c = {v}"),
            CondRule::Trivial => write!(f, "c = 1"),
        }
    }
}

/// A condition on `c` with every parameter fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoeffCondition {
    /// (numerator / c)^exponent = 1
    PowerUnity {
        numerator: i64,
        exponent: u64,
    },
    CubeUnity,
    /// x^3 + x + c has no root in GF(q)
    Omega,
    Subfield,
    Fixed(i64),
    Trivial,
}

impl CoeffCondition {
    /// Evaluates the condition; `omega` is the precomputed Ω when needed.
    pub fn accepts(&self, field: &FieldCtx, c: Element, omega: &[Element]) -> bool {
        if c.is_zero() {
            return false;
        }
        match *self {
            CoeffCondition::PowerUnity {
                numerator,
                exponent,
            } => {
                let a = field.from_int(numerator);
                match field.div(a, c) {
                    Ok(r) if !r.is_zero() => field.monomial(r, exponent) == field.one(),
                    _ => false,
                }
            }
            CoeffCondition::CubeUnity => field.monomial(c, 3) == field.one(),
            CoeffCondition::Omega => omega.binary_search(&c).is_ok(),
            CoeffCondition::Subfield => true,
            CoeffCondition::Fixed(v) => c == field.from_int(v),
            CoeffCondition::Trivial => c == field.one(),
        }
    }
}

/// A closed formula in the family parameters.
#[derive(Clone, Copy)]
pub struct Formula {
    pub text: &'static str,
    pub eval: fn(&FamilyParams) -> Frac,
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text)
    }
}

/// One congruence branch of a family, e.g. "q ≡ 1 mod 8".
#[derive(Debug, Clone)]
pub struct Case {
    pub label: &'static str,
    pub when: Vec<Constraint>,
    pub condition: CondRule,
    pub domain: Domain,
}

/// A labeled variant run alongside (never merged with) the others.
#[derive(Debug, Clone)]
pub struct Variant {
    pub tag: &'static str,
    /// Frobenius step `k` of the inner `x^(q^k)`.
    pub step: u32,
    /// Replaces the case condition when present.
    pub condition: Option<(CondRule, Domain)>,
    /// False for variants run only to report their outcome.
    pub asserted: bool,
}

#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub id: &'static str,
    pub form: Form,
    pub shape: FieldShape,
    /// Theorem, lemma, or table row the family is taken from.
    pub reference: &'static str,
    pub requires: Vec<Constraint>,
    pub cases: Vec<Case>,
    pub closed_s: Option<Formula>,
    /// Values of `i` in `s = i(q − 1) + 1`.
    pub i_values: Vec<Formula>,
    pub variants: Vec<Variant>,
    pub related: Vec<&'static str>,
    pub note: Option<&'static str>,
}

/// A concrete exponent choice of a family at given parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentChoice {
    pub label: String,
    pub s: u64,
}

impl FamilySpec {
    pub fn needs_k_prime(&self) -> bool {
        self.requires.iter().any(Constraint::needs_k_prime)
    }

    pub fn is_even_characteristic(&self) -> bool {
        self.requires.contains(&Constraint::EvenCharacteristic)
    }

    pub fn field_degree(&self, params: &FamilyParams) -> u32 {
        params.e * self.shape.ext_degree()
    }

    /// First case whose constraints hold, if the base requirements do.
    pub fn active_case(&self, params: &FamilyParams) -> Option<&Case> {
        if params.e == 0 || !self.requires.iter().all(|c| c.holds(params)) {
            return None;
        }
        self.cases
            .iter()
            .find(|c| c.when.iter().all(|w| w.holds(params)))
    }

    pub fn is_applicable(&self, params: &FamilyParams) -> bool {
        self.active_case(params).is_some()
    }

    pub fn variant(&self, tag: &str) -> Result<&Variant, FamilyError> {
        self.variants
            .iter()
            .find(|v| v.tag == tag)
            .ok_or_else(|| FamilyError::UnknownVariant(tag.to_string()))
    }

    pub fn default_variant(&self) -> &Variant {
        &self.variants[0]
    }

    fn not_applicable(&self, params: &FamilyParams) -> FamilyError {
        FamilyError::NotApplicable {
            id: self.id.to_string(),
            params: *params,
        }
    }

    /// Condition and domain in force for `variant` at `params`.
    pub fn condition(
        &self,
        params: &FamilyParams,
        variant: &Variant,
    ) -> Result<(CoeffCondition, Domain), FamilyError> {
        let case = self
            .active_case(params)
            .ok_or_else(|| self.not_applicable(params))?;
        let (rule, domain) = variant.condition.unwrap_or((case.condition, case.domain));
        Ok((rule.resolve(params), domain))
    }

    /// Exponents to instantiate. Families listing `i` values use the
    /// `i mod (q + 1)` reading for each of them; the rest use the closed
    /// formula reduced modulo the group order.
    pub fn exponents(&self, params: &FamilyParams) -> Result<Vec<ExponentChoice>, FamilyError> {
        if !self.is_applicable(params) {
            return Err(self.not_applicable(params));
        }
        let q = params.q();
        if self.i_values.is_empty() {
            let s = self
                .closed_exponent(params)?
                .expect("family has an exponent rule");
            let text = self.closed_s.map_or("", |c| c.text);
            return Ok(vec![ExponentChoice {
                label: format!("s = {text}"),
                s,
            }]);
        }
        self.i_values
            .iter()
            .map(|i| {
                let f = (i.eval)(params);
                let value = Frac::new(f.num, f.den).to_string();
                let label = if value == i.text {
                    format!("i = {value}")
                } else {
                    format!("i = {} = {value}", i.text)
                };
                Ok(ExponentChoice {
                    label,
                    s: canonical_exponent(f.num, f.den, q)?,
                })
            })
            .collect()
    }

    /// The closed formula for `s` reduced into `[1, q^m − 1]`, by exact
    /// division when integral and modular inversion otherwise.
    pub fn closed_exponent(&self, params: &FamilyParams) -> Result<Option<u64>, FamilyError> {
        let Some(closed) = &self.closed_s else {
            return Ok(None);
        };
        let group = params.q().pow(self.shape.ext_degree()) - 1;
        let s = reduce_fraction((closed.eval)(params), group)?;
        Ok(Some(if s == 0 { group } else { s }))
    }

    /// True when a trinomial exponent is a multiple of the group order, so
    /// the map cannot be built (e.g. `s = 2q − 1` at q = 2).
    pub fn degenerate_at(&self, params: &FamilyParams) -> bool {
        let group = params.q().pow(self.shape.ext_degree()) - 1;
        match self.exponents(params) {
            Ok(choices) => self.form == Form::Trinomial && choices.iter().any(|c| c.s % group == 0),
            Err(_) => true,
        }
    }

    /// Exponents obtained from the `i` values, for cross-checking the
    /// closed formula.
    pub fn exponents_from_i(&self, params: &FamilyParams) -> Result<Vec<u64>, FamilyError> {
        let q = params.q();
        self.i_values
            .iter()
            .map(|i| {
                let f = (i.eval)(params);
                canonical_exponent(f.num, f.den, q)
            })
            .collect()
    }
}

// --- catalog ---------------------------------------------------------------

fn qi(p: &FamilyParams) -> i128 {
    p.q() as i128
}

fn big_q(p: &FamilyParams) -> i128 {
    p.half_q() as i128
}

fn two_kp(p: &FamilyParams) -> i128 {
    1i128 << p.k_prime.unwrap_or(1)
}

fn always(condition: CondRule, domain: Domain) -> Vec<Case> {
    vec![Case {
        label: "",
        when: vec![],
        condition,
        domain,
    }]
}

fn stated(step: u32) -> Vec<Variant> {
    vec![Variant {
        tag: "stated",
        step,
        condition: None,
        asserted: true,
    }]
}

macro_rules! formula {
    ($text:expr, |$p:ident| $body:expr) => {
        Formula {
            text: $text,
            eval: |$p: &FamilyParams| $body,
        }
    };
}

struct EvenEntry {
    closed: Formula,
    i: Formula,
    requires: Vec<Constraint>,
}

/// Closed formula and `i` for each case of the even-characteristic
/// trinomial lemmas; shared by the trinomial entries and their delta-form
/// restatements.
fn even_case(n: u32) -> EvenEntry {
    use Constraint::*;
    match n {
        1 => EvenEntry {
            closed: formula!("2q-1", |p| Frac::int(2 * qi(p) - 1)),
            i: formula!("2", |_p| Frac::int(2)),
            requires: vec![],
        },
        2 => EvenEntry {
            closed: formula!("(3q-2)(q^2+q+1)/3", |p| {
                let q = qi(p);
                Frac::new((3 * q - 2) * (q * q + q + 1), 3)
            }),
            i: formula!("-4/(q-2)", |p| Frac::new(-4, qi(p) - 2)),
            requires: vec![KEven],
        },
        3 => EvenEntry {
            closed: formula!("(q+4)/5", |p| Frac::new(qi(p) + 4, 5)),
            i: formula!("1/5", |_p| Frac::new(1, 5)),
            requires: vec![KOdd],
        },
        4 => EvenEntry {
            closed: formula!("(3q+1)/4", |p| Frac::new(3 * qi(p) + 1, 4)),
            i: formula!("3/4", |_p| Frac::new(3, 4)),
            requires: vec![],
        },
        5 => EvenEntry {
            closed: formula!("(q+6)/7", |p| Frac::new(qi(p) + 6, 7)),
            i: formula!("1/7", |_p| Frac::new(1, 7)),
            requires: vec![],
        },
        6 => EvenEntry {
            closed: formula!("(q^2+3q+2)/6", |p| {
                let q = qi(p);
                Frac::new(q * q + 3 * q + 2, 6)
            }),
            i: formula!("(q+4)/6", |p| Frac::new(qi(p) + 4, 6)),
            requires: vec![KOdd],
        },
        7 => EvenEntry {
            closed: formula!("(q^2-2q+4)/3", |p| {
                let q = qi(p);
                Frac::new(q * q - 2 * q + 4, 3)
            }),
            i: formula!("(q-1)/3", |p| Frac::new(qi(p) - 1, 3)),
            requires: vec![KEven],
        },
        8 => EvenEntry {
            closed: formula!("(Q^3+Q^2-Q+1)/2", |p| {
                let b = big_q(p);
                Frac::new(b * b * b + b * b - b + 1, 2)
            }),
            i: formula!("(Q+1)/2", |p| Frac::new(big_q(p) + 1, 2)),
            requires: vec![KEven],
        },
        // lem16-1: s = -(2^k - 1)/(2^k' - 1) + 1
        9 => EvenEntry {
            closed: formula!("-(q-1)/(2^k'-1)+1", |p| {
                let d = two_kp(p) - 1;
                Frac::new(-(qi(p) - 1) + d, d)
            }),
            i: formula!("-1/(2^k'-1)", |p| Frac::new(-1, two_kp(p) - 1)),
            requires: vec![CoprimeMinus],
        },
        // lem16-2: s = (2^k - 1)/(2^k' + 1) + 1
        10 => EvenEntry {
            closed: formula!("(q-1)/(2^k'+1)+1", |p| {
                let d = two_kp(p) + 1;
                Frac::new(qi(p) - 1 + d, d)
            }),
            i: formula!("1/(2^k'+1)", |p| Frac::new(1, two_kp(p) + 1)),
            requires: vec![CoprimePlus],
        },
        _ => unreachable!(),
    }
}

fn build_registry() -> Vec<FamilySpec> {
    use Constraint::*;
    use UnityExponent::*;

    let thm5_s = formula!("(3q^2+2q-1)/4", |p| {
        let q = qi(p);
        Frac::new(3 * q * q + 2 * q - 1, 4)
    });
    let thm6_s = formula!("(q+1)^2/4", |p| {
        let q = qi(p);
        Frac::new((q + 1) * (q + 1), 4)
    });
    let thm7_s = formula!("(q^2+q+1)/3", |p| {
        let q = qi(p);
        Frac::new(q * q + q + 1, 3)
    });
    let thm10_s = formula!("q^3+q^2-q", |p| {
        let q = qi(p);
        Frac::int(q * q * q + q * q - q)
    });
    let unity = |numerator: i64| CondRule::PowerUnity {
        numerator,
        exponent: HalfQPlusOne,
    };
    let case = |label, residue, condition, domain| Case {
        label,
        when: vec![QMod {
            modulus: 8,
            residue,
        }],
        condition,
        domain,
    };

    let mut reg = vec![
        FamilySpec {
            id: "thm5",
            form: Form::Trinomial,
            shape: FieldShape::Square,
            reference: "Theorem 5",
            requires: vec![OddCharacteristic],
            cases: vec![
                case("1", 1, unity(-2), Domain::Full),
                case("2", 5, unity(2), Domain::Full),
            ],
            closed_s: Some(thm5_s),
            i_values: vec![],
            variants: stated(1),
            related: vec!["thm11"],
            note: None,
        },
        FamilySpec {
            id: "thm6",
            form: Form::Trinomial,
            shape: FieldShape::Square,
            reference: "Theorem 6",
            requires: vec![OddCharacteristic],
            cases: vec![
                case("1", 5, unity(-2), Domain::Full),
                case("2", 1, unity(2), Domain::Full),
            ],
            closed_s: Some(thm6_s),
            i_values: vec![],
            variants: stated(1),
            related: vec!["thm12"],
            note: Some("case congruences are mirrored relative to thm5; encoded as stated"),
        },
        FamilySpec {
            id: "thm7",
            form: Form::Trinomial,
            shape: FieldShape::Square,
            reference: "Theorem 7",
            requires: vec![QMod {
                modulus: 3,
                residue: 1,
            }],
            cases: always(CondRule::Trivial, Domain::Full),
            closed_s: Some(thm7_s),
            i_values: vec![],
            variants: stated(1),
            related: vec!["thm13"],
            note: None,
        },
        FamilySpec {
            id: "thm10",
            form: Form::Trinomial,
            shape: FieldShape::Quartic,
            reference: "Theorem 10",
            requires: vec![OddCharacteristic],
            cases: always(CondRule::Trivial, Domain::Full),
            closed_s: Some(thm10_s),
            i_values: vec![],
            variants: stated(2),
            related: vec!["thm14"],
            note: None,
        },
        FamilySpec {
            id: "thm11",
            form: Form::DeltaForm,
            shape: FieldShape::Square,
            reference: "Theorem 11",
            requires: vec![OddCharacteristic],
            cases: vec![
                case("1", 1, CondRule::Fixed(-2), Domain::Base),
                case("2", 5, CondRule::Fixed(2), Domain::Base),
            ],
            closed_s: Some(thm5_s),
            i_values: vec![],
            variants: stated(1),
            related: vec!["thm5"],
            note: None,
        },
        FamilySpec {
            id: "thm12",
            form: Form::DeltaForm,
            shape: FieldShape::Square,
            reference: "Theorem 12",
            requires: vec![OddCharacteristic],
            cases: vec![
                case("1", 1, CondRule::Fixed(2), Domain::Base),
                case("2", 5, CondRule::Fixed(-2), Domain::Base),
            ],
            closed_s: Some(thm6_s),
            i_values: vec![],
            variants: stated(1),
            related: vec!["thm6"],
            note: None,
        },
        FamilySpec {
            id: "thm13",
            form: Form::DeltaForm,
            shape: FieldShape::Square,
            reference: "Theorem 13",
            requires: vec![QMod {
                modulus: 3,
                residue: 1,
            }],
            cases: always(CondRule::Trivial, Domain::Full),
            closed_s: Some(thm7_s),
            i_values: vec![],
            variants: stated(1),
            related: vec!["thm7"],
            note: None,
        },
        FamilySpec {
            id: "thm14",
            form: Form::DeltaForm,
            shape: FieldShape::Quartic,
            reference: "Theorem 14",
            requires: vec![OddCharacteristic],
            cases: always(CondRule::Trivial, Domain::Full),
            closed_s: Some(thm10_s),
            i_values: vec![],
            variants: vec![
                Variant {
                    tag: "step2",
                    step: 2,
                    condition: None,
                    asserted: true,
                },
                Variant {
                    tag: "printed-step1",
                    step: 1,
                    condition: None,
                    asserted: false,
                },
            ],
            related: vec!["thm10"],
            note: Some(
                "printed inner map is x^q - x + δ; composing with the thm10 trinomial \
                 (step q^2) gives x^(q^2) - x + δ; both are run, only step2 is asserted",
            ),
        },
    ];

    let lem15_conditions: [(Vec<Case>, &'static str); 8] = [
        (
            vec![
                Case {
                    label: "i",
                    when: vec![KEven],
                    condition: CondRule::Trivial,
                    domain: Domain::Full,
                },
                Case {
                    label: "ii",
                    when: vec![KOdd],
                    condition: CondRule::CubeUnity,
                    domain: Domain::Full,
                },
            ],
            "Lemma 15 (1)",
        ),
        (always(CondRule::CubeUnity, Domain::Full), "Lemma 15 (2)"),
        (always(CondRule::CubeUnity, Domain::Full), "Lemma 15 (3)"),
        (always(CondRule::Omega, Domain::Base), "Lemma 15 (4)"),
        (always(CondRule::Trivial, Domain::Full), "Lemma 15 (5)"),
        (
            always(
                CondRule::PowerUnity {
                    numerator: 1,
                    exponent: ThirdQPlusOne,
                },
                Domain::Full,
            ),
            "Lemma 15 (6)",
        ),
        (always(CondRule::Trivial, Domain::Full), "Lemma 15 (7)"),
        (always(CondRule::Subfield, Domain::HalfBase), "Lemma 15 (8)"),
    ];
    const LEM15_IDS: [&str; 8] = [
        "lem15-1", "lem15-2", "lem15-3", "lem15-4", "lem15-5", "lem15-6", "lem15-7", "lem15-8",
    ];
    const THM18_IDS: [&str; 10] = [
        "thm18-1", "thm18-2", "thm18-3", "thm18-4", "thm18-5", "thm18-6", "thm18-7", "thm18-8",
        "thm18-9", "thm18-10",
    ];
    const THM18_REFS: [&str; 10] = [
        "Theorem 18 (1)",
        "Theorem 18 (2)",
        "Theorem 18 (3)",
        "Theorem 18 (4)",
        "Theorem 18 (5)",
        "Theorem 18 (6)",
        "Theorem 18 (7)",
        "Theorem 18 (8)",
        "Theorem 18 (9)",
        "Theorem 18 (10)",
    ];

    for (n, (cases, reference)) in lem15_conditions.into_iter().enumerate() {
        let entry = even_case(n as u32 + 1);
        let mut requires = vec![EvenCharacteristic];
        requires.extend(entry.requires);
        reg.push(FamilySpec {
            id: LEM15_IDS[n],
            form: Form::Trinomial,
            shape: FieldShape::Square,
            reference,
            requires,
            cases,
            closed_s: Some(entry.closed),
            i_values: vec![entry.i],
            variants: stated(1),
            related: vec![THM18_IDS[n]],
            note: None,
        });
    }
    for (n, (id, reference, cases, note)) in [
        (
            "lem16-1",
            "Lemma 16 (1)",
            always(CondRule::Subfield, Domain::KPrimeMeet),
            None,
        ),
        (
            "lem16-2",
            "Lemma 16 (2)",
            always(CondRule::Subfield, Domain::KPrimeMeet),
            Some("c ranges over GF(2^k') ∩ GF(q) without a nonzero mark; c = 0 is excluded"),
        ),
    ]
    .into_iter()
    .enumerate()
    {
        let entry = even_case(n as u32 + 9);
        let mut requires = vec![EvenCharacteristic];
        requires.extend(entry.requires);
        reg.push(FamilySpec {
            id,
            form: Form::Trinomial,
            shape: FieldShape::Square,
            reference,
            requires,
            cases,
            closed_s: Some(entry.closed),
            i_values: vec![entry.i],
            variants: stated(1),
            related: vec![THM18_IDS[n + 8]],
            note,
        });
    }

    // thm18-*: delta forms with c restricted to GF(q)
    let thm18_conditions: [CondRule; 10] = [
        CondRule::Trivial,
        CondRule::CubeUnity,
        CondRule::Trivial,
        CondRule::Omega,
        CondRule::Trivial,
        CondRule::Trivial,
        CondRule::Trivial,
        CondRule::Subfield,
        CondRule::Subfield,
        CondRule::Subfield,
    ];
    for (n, condition) in thm18_conditions.into_iter().enumerate() {
        let entry = even_case(n as u32 + 1);
        let mut requires = vec![EvenCharacteristic];
        requires.extend(entry.requires);
        let domain = match n {
            7 => Domain::HalfBase,
            8 | 9 => Domain::KPrimeMeet,
            _ => Domain::Base,
        };
        let related = if n < 8 {
            vec![LEM15_IDS[n]]
        } else {
            vec![["lem16-1", "lem16-2"][n - 8]]
        };
        let note = match n {
            5 => Some("stated with c = 1; the matching table row lists c^((q+1)/3) = 1"),
            8 | 9 => Some("c = 0 is excluded although the statement omits the nonzero mark"),
            _ => None,
        };
        reg.push(FamilySpec {
            id: THM18_IDS[n],
            form: Form::DeltaForm,
            shape: FieldShape::Square,
            reference: THM18_REFS[n],
            requires,
            cases: always(condition, domain),
            closed_s: Some(entry.closed),
            i_values: vec![entry.i],
            variants: stated(1),
            related,
            note,
        });
    }

    reg.extend(table1_rows());
    reg
}

fn table1_rows() -> Vec<FamilySpec> {
    use Constraint::*;
    let row = |n: usize,
               requires: Vec<Constraint>,
               i_values: Vec<Formula>,
               condition: CondRule,
               domain: Domain,
               related: Vec<&'static str>| {
        const IDS: [&str; 13] = [
            "table1-r1",
            "table1-r2",
            "table1-r3",
            "table1-r4",
            "table1-r5",
            "table1-r6",
            "table1-r7",
            "table1-r8",
            "table1-r9",
            "table1-r10",
            "table1-r11",
            "table1-r12",
            "table1-r13",
        ];
        const REFS: [&str; 13] = [
            "Table 1 row 1",
            "Table 1 row 2",
            "Table 1 row 3",
            "Table 1 row 4",
            "Table 1 row 5",
            "Table 1 row 6",
            "Table 1 row 7",
            "Table 1 row 8",
            "Table 1 row 9",
            "Table 1 row 10",
            "Table 1 row 11",
            "Table 1 row 12",
            "Table 1 row 13",
        ];
        let mut req = vec![EvenCharacteristic];
        req.extend(requires);
        FamilySpec {
            id: IDS[n - 1],
            form: Form::DeltaForm,
            shape: FieldShape::Square,
            reference: REFS[n - 1],
            requires: req,
            cases: always(condition, domain),
            closed_s: None,
            i_values,
            variants: stated(1),
            related,
            note: None,
        }
    };
    let mut rows = vec![
        row(
            1,
            vec![KEven],
            vec![
                formula!("2", |_p| Frac::int(2)),
                formula!("-1", |_p| Frac::int(-1)),
            ],
            CondRule::Trivial,
            Domain::Base,
            vec!["thm18-1"],
        ),
        row(
            2,
            vec![],
            vec![
                formula!("0", |_p| Frac::int(0)),
                formula!("1", |_p| Frac::int(1)),
            ],
            CondRule::Trivial,
            Domain::Base,
            vec![],
        ),
        row(
            3,
            vec![],
            vec![formula!("1/2", |_p| Frac::new(1, 2))],
            CondRule::Trivial,
            Domain::Base,
            vec![],
        ),
        row(
            4,
            vec![KEven],
            vec![
                formula!("1/3", |_p| Frac::new(1, 3)),
                formula!("2/3", |_p| Frac::new(2, 3)),
            ],
            CondRule::Trivial,
            Domain::Base,
            vec![],
        ),
        row(
            5,
            vec![KOdd],
            vec![
                formula!("1/5", |_p| Frac::new(1, 5)),
                formula!("4/5", |_p| Frac::new(4, 5)),
            ],
            CondRule::Trivial,
            Domain::Base,
            vec!["thm18-3"],
        ),
        row(
            6,
            vec![],
            vec![
                formula!("1/4", |_p| Frac::new(1, 4)),
                formula!("3/4", |_p| Frac::new(3, 4)),
            ],
            CondRule::Omega,
            Domain::Base,
            vec!["thm18-4"],
        ),
        row(
            7,
            vec![KEven],
            vec![
                formula!("1/(2^k-2)", |p| Frac::new(1, qi(p) - 2)),
                formula!("-4/(2^k-2)", |p| Frac::new(-4, qi(p) - 2)),
            ],
            CondRule::CubeUnity,
            Domain::Base,
            vec!["thm18-2"],
        ),
        row(
            8,
            vec![],
            vec![
                formula!("1/7", |_p| Frac::new(1, 7)),
                formula!("6/7", |_p| Frac::new(6, 7)),
            ],
            CondRule::Trivial,
            Domain::Base,
            vec!["thm18-5"],
        ),
        row(
            9,
            vec![KOdd],
            vec![
                formula!("(2^k+4)/6", |p| Frac::new(qi(p) + 4, 6)),
                formula!("(2-2^k)/6", |p| Frac::new(2 - qi(p), 6)),
            ],
            CondRule::PowerUnity {
                numerator: 1,
                exponent: UnityExponent::ThirdQPlusOne,
            },
            Domain::Base,
            vec!["thm18-6"],
        ),
        row(
            10,
            vec![KEven],
            vec![
                formula!("(2^k-1)/3", |p| Frac::new(qi(p) - 1, 3)),
                formula!("(4-2^k)/3", |p| Frac::new(4 - qi(p), 3)),
            ],
            CondRule::Trivial,
            Domain::Base,
            vec!["thm18-7"],
        ),
        row(
            11,
            vec![KEven],
            vec![
                formula!("(2^(k/2)+1)/2", |p| Frac::new(big_q(p) + 1, 2)),
                formula!("(1-2^(k/2))/2", |p| Frac::new(1 - big_q(p), 2)),
            ],
            CondRule::Subfield,
            Domain::HalfBase,
            vec!["thm18-8"],
        ),
        row(
            12,
            vec![CoprimeMinus],
            vec![
                formula!("-1/(2^k'-1)", |p| Frac::new(-1, two_kp(p) - 1)),
                formula!("2^k'/(2^k'-1)", |p| Frac::new(two_kp(p), two_kp(p) - 1)),
            ],
            CondRule::Subfield,
            Domain::KPrimeMeet,
            vec!["thm18-9"],
        ),
        row(
            13,
            vec![CoprimePlus],
            vec![
                formula!("1/(2^k'+1)", |p| Frac::new(1, two_kp(p) + 1)),
                formula!("2^k'/(2^k'+1)", |p| Frac::new(two_kp(p), two_kp(p) + 1)),
            ],
            CondRule::Subfield,
            Domain::KPrimeMeet,
            vec!["thm18-10"],
        ),
    ];
    let r9 = &mut rows[8];
    r9.variants = vec![
        Variant {
            tag: "table",
            step: 1,
            condition: None,
            asserted: true,
        },
        Variant {
            tag: "thm18-6",
            step: 1,
            condition: Some((CondRule::Trivial, Domain::Base)),
            asserted: true,
        },
    ];
    r9.note = Some("row lists c^((q+1)/3) = 1 while the theorem states c = 1; both are run");
    rows
}

static REGISTRY: LazyLock<Vec<FamilySpec>> = LazyLock::new(build_registry);

/// The full, fixed catalog.
pub fn registry() -> &'static [FamilySpec] {
    &REGISTRY
}

pub fn lookup(id: &str) -> Result<&'static FamilySpec, FamilyError> {
    registry()
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| FamilyError::UnknownFamily(id.to_string()))
}

pub fn applicable(id: &str, params: &FamilyParams) -> Result<bool, FamilyError> {
    Ok(lookup(id)?.is_applicable(params))
}

/// Builds the target field GF(q^m) of `spec` at `params`.
pub fn family_field(
    spec: &FamilySpec,
    params: &FamilyParams,
    cap: u64,
) -> Result<Arc<FieldCtx>, FamilyError> {
    Ok(Arc::new(FieldCtx::with_cap(
        params.p,
        spec.field_degree(params),
        cap,
    )?))
}

fn check_field(
    spec: &FamilySpec,
    params: &FamilyParams,
    field: &FieldCtx,
) -> Result<(), FamilyError> {
    if field.characteristic() != params.p || field.degree() != spec.field_degree(params) {
        return Err(FamilyError::WrongField {
            p: field.characteristic(),
            n: field.degree(),
        });
    }
    Ok(())
}

/// Ω = { c ∈ GF(2^m) : x^3 + x + c has no root in GF(2^m) }, i.e. the
/// values missed by x ↦ x^3 + x on the subfield of degree `m`.
pub fn omega_set(field: &FieldCtx, m: u32) -> Result<Vec<Element>, FamilyError> {
    if field.characteristic() != 2 {
        return Err(FamilyError::OddCharacteristic);
    }
    let sub = field.subfield_elements(m)?;
    let mut image: Vec<Element> = sub
        .iter()
        .map(|&x| field.add(field.monomial(x, 3), x))
        .collect();
    image.sort();
    image.dedup();
    Ok(sub
        .iter()
        .copied()
        .filter(|c| image.binary_search(c).is_err())
        .collect())
}

/// The exact set of admissible `c` for `variant`, by exhaustive filtering
/// of the coefficient domain. Sorted by index.
pub fn valid_coefficients_for(
    spec: &FamilySpec,
    params: &FamilyParams,
    variant: &Variant,
    field: &FieldCtx,
) -> Result<Vec<Element>, FamilyError> {
    check_field(spec, params, field)?;
    let (condition, domain) = spec.condition(params, variant)?;
    let degree = domain.degree(params, spec.shape);
    let omega = if condition == CoeffCondition::Omega {
        omega_set(field, params.e)?
    } else {
        Vec::new()
    };
    Ok(field
        .subfield_elements(degree)?
        .iter()
        .copied()
        .filter(|&c| condition.accepts(field, c, &omega))
        .collect())
}

pub fn valid_coefficients(
    id: &str,
    params: &FamilyParams,
    field: &FieldCtx,
) -> Result<Vec<Element>, FamilyError> {
    let spec = lookup(id)?;
    valid_coefficients_for(spec, params, spec.default_variant(), field)
}

/// Builds the map of `spec` for one exponent choice, variant, `c`, and δ.
pub fn instantiate_with(
    spec: &FamilySpec,
    params: &FamilyParams,
    variant: &Variant,
    s: u64,
    field: &Arc<FieldCtx>,
    c: Element,
    delta: Option<Element>,
) -> Result<FnSpec, FamilyError> {
    check_field(spec, params, field)?;
    let valid = valid_coefficients_for(spec, params, variant, field)?;
    if valid.binary_search(&c).is_err() {
        return Err(FamilyError::InvalidCoefficient(c));
    }
    let tower = field.tower(params.e)?;
    Ok(match (spec.form, delta) {
        (Form::Trinomial, None) => FnSpec::trinomial(field.clone(), tower, c, s, variant.step)?,
        (Form::DeltaForm, Some(d)) => {
            FnSpec::delta_form(field.clone(), tower, c, s, variant.step, d)?
        }
        _ => return Err(FamilyError::DeltaMismatch),
    })
}

/// Instantiates the default variant with the family's first exponent.
pub fn instantiate(
    id: &str,
    params: &FamilyParams,
    field: &Arc<FieldCtx>,
    c: Element,
    delta: Option<Element>,
) -> Result<FnSpec, FamilyError> {
    let spec = lookup(id)?;
    let s = spec.exponents(params)?[0].s;
    instantiate_with(spec, params, spec.default_variant(), s, field, c, delta)
}

/// Smallest k' ≥ 1 satisfying the family's gcd side condition.
pub fn smallest_k_prime(spec: &FamilySpec, p: u32, e: u32) -> Option<u32> {
    (1..=4 * e + 4).find(|&kp| {
        spec.requires
            .iter()
            .filter(|c| c.needs_k_prime())
            .all(|c| c.holds(&FamilyParams::new(p, e).with_k_prime(kp)))
    })
}

/// The `count` smallest applicable parameter sets whose target field fits
/// under `cap`. Even-characteristic families range over k; others over
/// prime powers q.
pub fn default_params(spec: &FamilySpec, cap: u64, count: usize) -> Vec<FamilyParams> {
    let m = spec.shape.ext_degree();
    let fits = |p: u32, e: u32| {
        (p as u64)
            .checked_pow(e * m)
            .is_some_and(|order| order <= cap)
    };
    let mut out = Vec::new();
    let mut candidates: Vec<(u64, u32, u32)> = Vec::new();
    for p in (2u32..2048).filter(|&p| crate::field::is_prime(p)) {
        if spec.is_even_characteristic() && p != 2 {
            break;
        }
        let mut e = 1;
        while fits(p, e) {
            candidates.push(((p as u64).pow(e), p, e));
            e += 1;
        }
        if !fits(p, 1) {
            break;
        }
    }
    candidates.sort();
    for (_, p, e) in candidates {
        let mut params = FamilyParams::new(p, e);
        if spec.needs_k_prime() {
            match smallest_k_prime(spec, p, e) {
                Some(kp) => params = params.with_k_prime(kp),
                None => continue,
            }
        }
        if spec.is_applicable(&params) && !spec.degenerate_at(&params) {
            out.push(params);
            if out.len() == count {
                break;
            }
        }
    }
    out
}

/// Machine-readable catalog entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub form: Form,
    pub shape: FieldShape,
    pub requires: Vec<String>,
    pub cases: Vec<ManifestCase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_rule: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub i_rule: Vec<String>,
    pub variants: Vec<ManifestVariant>,
    pub reference: String,
    pub related: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestCase {
    pub label: String,
    pub when: Vec<String>,
    pub condition: String,
    pub domain: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestVariant {
    pub tag: String,
    pub step: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    pub asserted: bool,
}

pub fn manifest() -> Vec<ManifestEntry> {
    registry()
        .iter()
        .map(|f| ManifestEntry {
            id: f.id.to_string(),
            form: f.form,
            shape: f.shape,
            requires: f.requires.iter().map(ToString::to_string).collect(),
            cases: f
                .cases
                .iter()
                .map(|c| ManifestCase {
                    label: c.label.to_string(),
                    when: c.when.iter().map(ToString::to_string).collect(),
                    condition: c.condition.to_string(),
                    domain: c.domain.to_string(),
                })
                .collect(),
            s_rule: f.closed_s.map(|s| s.text.to_string()),
            i_rule: f.i_values.iter().map(|i| i.text.to_string()).collect(),
            variants: f
                .variants
                .iter()
                .map(|v| ManifestVariant {
                    tag: v.tag.to_string(),
                    step: v.step,
                    condition: v.condition.map(|(r, d)| format!("{r}, c ∈ {d}")),
                    asserted: v.asserted,
                })
                .collect(),
            reference: f.reference.to_string(),
            related: f.related.iter().map(ToString::to_string).collect(),
            note: f.note.map(str::to_string),
        })
        .collect()
}
