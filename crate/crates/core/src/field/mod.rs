//! Finite fields GF(p^n) with a deterministic defining modulus.
//!
//! Elements are stored by their canonical index `Σ coeffs[i]·p^i` in the
//! polynomial basis over the modulus. Multiplication runs through
//! log/antilog tables built from a primitive element; addition in odd
//! characteristic uses Zech logarithms, and in characteristic two is a
//! plain XOR of indices.

mod poly;

pub(crate) use poly::is_prime;

use std::fmt;
use std::sync::OnceLock;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field order constructed unless a caller raises the cap.
pub const DEFAULT_SIZE_CAP: u64 = 1 << 22;

const NO_LOG: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{n} exceeds the size cap {cap}")]
    TooLarge { p: u32, n: u32, cap: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("0^0 is undefined")]
    ZeroToZero,
    #[error("{m} does not divide the extension degree {n}")]
    NotADivisor { m: u32, n: u32 },
    #[error("{d} does not divide the multiplicative group order {group}")]
    BadSubgroupOrder { d: u64, group: u64 },
    #[error("index {index} out of range for a field of order {order}")]
    IndexOutOfRange { index: u64, order: u64 },
    #[error("coefficient vector must have {n} entries each below {p}")]
    BadCoefficients { p: u32, n: u32 },
}

/// Identifies the field an element belongs to; fields are determined by
/// `(p, n)` because the modulus choice is deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldId {
    p: u32,
    n: u32,
}

/// A field element. Cheap to copy; arithmetic goes through [`FieldCtx`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    field: FieldId,
    index: u32,
}

impl Element {
    pub fn index(self) -> u32 {
        self.index
    }

    pub fn field(self) -> FieldId {
        self.field
    }

    pub fn is_zero(self) -> bool {
        self.index == 0
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Viewing GF(p^n) as an extension GF(q^m) of GF(q), q = p^base_degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tower {
    pub q: u64,
    pub base_degree: u32,
    pub ext_degree: u32,
}

pub struct FieldCtx {
    id: FieldId,
    order: u32,
    modulus: Vec<u32>,
    /// exp[j] = index of g^j, j in 0..order-1
    exp: Vec<u32>,
    /// log[index] for nonzero indices; log[0] = NO_LOG
    log: Vec<u32>,
    /// zech[j] = log(1 + g^j), NO_LOG when 1 + g^j = 0
    zech: Vec<u32>,
    subfields: Vec<(u32, OnceLock<Vec<Element>>)>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.id.p)
            .field("n", &self.id.n)
            .field("modulus", &self.modulus)
            .finish()
    }
}

/// Builds GF(p^n) under the default size cap.
pub fn make_field(p: u32, n: u32) -> Result<FieldCtx, FieldError> {
    FieldCtx::with_cap(p, n, DEFAULT_SIZE_CAP)
}

impl FieldCtx {
    pub fn new(p: u32, n: u32) -> Result<Self, FieldError> {
        Self::with_cap(p, n, DEFAULT_SIZE_CAP)
    }

    pub fn with_cap(p: u32, n: u32, cap: u64) -> Result<Self, FieldError> {
        if n == 0 {
            return Err(FieldError::ZeroDegree);
        }
        if !poly::is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let cap = cap.min(u32::MAX as u64);
        let order = (p as u64)
            .checked_pow(n)
            .filter(|&o| o <= cap)
            .ok_or(FieldError::TooLarge { p, n, cap })?;
        let order = order as u32;
        let modulus = poly::first_irreducible(p, n);
        let group = order as u64 - 1;

        let generator = find_generator(p, n, &modulus, group);
        let mut exp = Vec::with_capacity(group as usize);
        let mut log = vec![NO_LOG; order as usize];
        let mut cur = poly::digits(1, p, n as usize);
        for j in 0..group {
            let idx = poly::from_digits(&cur, p) as u32;
            exp.push(idx);
            log[idx as usize] = j as u32;
            cur = poly::mul_mod(&cur, &generator, &modulus, p);
        }

        let mut zech = vec![NO_LOG; group as usize];
        if p != 2 {
            for (j, z) in zech.iter_mut().enumerate() {
                let sum = digit_add(exp[j], 1, p);
                if sum != 0 {
                    *z = log[sum as usize];
                }
            }
        }

        let subfields = divisors(n)
            .into_iter()
            .map(|m| (m, OnceLock::new()))
            .collect();

        Ok(FieldCtx {
            id: FieldId { p, n },
            order,
            modulus,
            exp,
            log,
            zech,
            subfields,
        })
    }

    pub fn id(&self) -> FieldId {
        self.id
    }

    pub fn characteristic(&self) -> u32 {
        self.id.p
    }

    pub fn degree(&self) -> u32 {
        self.id.n
    }

    pub fn order(&self) -> u64 {
        self.order as u64
    }

    /// Order of the multiplicative group, p^n - 1.
    pub fn group_order(&self) -> u64 {
        self.order as u64 - 1
    }

    /// Monic modulus, constant term first, `n + 1` entries.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> Element {
        self.raw(0)
    }

    pub fn one(&self) -> Element {
        self.raw(1)
    }

    /// The primitive element used to build the log tables.
    pub fn generator(&self) -> Element {
        self.raw(self.exp.get(1).copied().unwrap_or(1))
    }

    #[inline]
    fn raw(&self, index: u32) -> Element {
        Element {
            field: self.id,
            index,
        }
    }

    pub fn element_at(&self, index: u64) -> Result<Element, FieldError> {
        if index >= self.order as u64 {
            return Err(FieldError::IndexOutOfRange {
                index,
                order: self.order as u64,
            });
        }
        Ok(self.raw(index as u32))
    }

    pub fn index_of(&self, a: Element) -> u64 {
        debug_assert_eq!(a.field, self.id);
        a.index as u64
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.order).map(move |i| self.raw(i))
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Element> + '_ {
        (1..self.order).map(move |i| self.raw(i))
    }

    pub fn coeffs(&self, a: Element) -> Vec<u32> {
        poly::digits(a.index as u64, self.id.p, self.id.n as usize)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Element, FieldError> {
        if coeffs.len() != self.id.n as usize || coeffs.iter().any(|&c| c >= self.id.p) {
            return Err(FieldError::BadCoefficients {
                p: self.id.p,
                n: self.id.n,
            });
        }
        Ok(self.raw(poly::from_digits(coeffs, self.id.p) as u32))
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, v: i64) -> Element {
        self.raw(v.rem_euclid(self.id.p as i64) as u32)
    }

    pub fn contains(&self, a: Element) -> bool {
        a.field == self.id
    }

    pub fn log(&self, a: Element) -> Option<u64> {
        match self.log[a.index as usize] {
            NO_LOG => None,
            l => Some(l as u64),
        }
    }

    // --- arithmetic -------------------------------------------------------

    #[inline]
    pub fn add(&self, a: Element, b: Element) -> Element {
        debug_assert!(a.field == self.id && b.field == self.id);
        self.raw(self.add_idx(a.index, b.index))
    }

    #[inline]
    fn add_idx(&self, a: u32, b: u32) -> u32 {
        if self.id.p == 2 {
            return a ^ b;
        }
        if a == 0 {
            return b;
        }
        if b == 0 {
            return a;
        }
        let n = self.exp.len() as u32;
        let la = self.log[a as usize];
        let lb = self.log[b as usize];
        let d = if lb >= la { lb - la } else { lb + n - la };
        match self.zech[d as usize] {
            NO_LOG => 0,
            z => {
                let s = la as u64 + z as u64;
                self.exp[(s % n as u64) as usize]
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: Element) -> Element {
        debug_assert!(a.field == self.id);
        if self.id.p == 2 || a.index == 0 {
            return a;
        }
        let n = self.exp.len() as u64;
        let l = self.log[a.index as usize] as u64 + n / 2;
        self.raw(self.exp[(l % n) as usize])
    }

    #[inline]
    pub fn sub(&self, a: Element, b: Element) -> Element {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        debug_assert!(a.field == self.id && b.field == self.id);
        if a.index == 0 || b.index == 0 {
            return self.zero();
        }
        let n = self.exp.len() as u64;
        let s = self.log[a.index as usize] as u64 + self.log[b.index as usize] as u64;
        self.raw(self.exp[(s % n) as usize])
    }

    /// Multiplicative inverse as a^(p^n - 2).
    pub fn inv(&self, a: Element) -> Result<Element, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        self.pow(a, self.order as u64 - 2)
    }

    pub fn div(&self, a: Element, b: Element) -> Result<Element, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Checked binary operation: rejects mixed-field operands and division
    /// by zero.
    pub fn arith(&self, a: Element, b: Element, op: ArithOp) -> Result<Element, FieldError> {
        if a.field != self.id || b.field != self.id {
            return Err(FieldError::MixedFields);
        }
        match op {
            ArithOp::Add => Ok(self.add(a, b)),
            ArithOp::Sub => Ok(self.sub(a, b)),
            ArithOp::Mul => Ok(self.mul(a, b)),
            ArithOp::Div => self.div(a, b),
        }
    }

    /// `a^e` by square-and-multiply. For nonzero `a` the exponent is first
    /// reduced modulo p^n - 1.
    pub fn pow(&self, a: Element, e: u64) -> Result<Element, FieldError> {
        if a.is_zero() {
            return if e == 0 {
                Err(FieldError::ZeroToZero)
            } else {
                Ok(a)
            };
        }
        let mut e = e % self.group_order();
        let mut acc = self.one();
        let mut sq = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, sq);
            }
            e >>= 1;
            if e > 0 {
                sq = self.mul(sq, sq);
            }
        }
        Ok(acc)
    }

    /// `a^e` through the log table, with the polynomial convention
    /// `x^0 = 1` for every `x` (including zero). Used on hot paths.
    #[inline]
    pub fn monomial(&self, a: Element, e: u64) -> Element {
        if e == 0 {
            return self.one();
        }
        if a.index == 0 {
            return a;
        }
        let n = self.exp.len() as u64;
        let l = self.log[a.index as usize] as u64 * (e % n);
        self.raw(self.exp[(l % n) as usize])
    }

    /// `a^(p^i)`.
    pub fn frobenius(&self, a: Element, i: u64) -> Element {
        if a.is_zero() {
            return a;
        }
        let e = pow_mod(self.id.p as u64, i, self.group_order());
        // e == 0 only happens for the group of order 1, where a = 1
        self.pow(a, e.max(1)).expect("nonzero base")
    }

    fn check_divisor(&self, m: u32) -> Result<(), FieldError> {
        if m == 0 || !self.id.n.is_multiple_of(m) {
            return Err(FieldError::NotADivisor { m, n: self.id.n });
        }
        Ok(())
    }

    /// Relative trace down to GF(p^m): Σ_{i < n/m} a^(p^(i·m)).
    pub fn trace_to_subfield(&self, a: Element, m: u32) -> Result<Element, FieldError> {
        self.check_divisor(m)?;
        let mut acc = self.zero();
        for i in 0..self.id.n / m {
            acc = self.add(acc, self.frobenius(a, (i * m) as u64));
        }
        Ok(acc)
    }

    pub fn is_in_subfield(&self, a: Element, m: u32) -> Result<bool, FieldError> {
        self.check_divisor(m)?;
        Ok(self.frobenius(a, m as u64) == a)
    }

    /// Elements of GF(p^m) inside this field, sorted by index. Computed on
    /// first request and cached.
    pub fn subfield_elements(&self, m: u32) -> Result<&[Element], FieldError> {
        self.check_divisor(m)?;
        let slot = &self
            .subfields
            .iter()
            .find(|(d, _)| *d == m)
            .expect("every divisor has a slot")
            .1;
        Ok(slot.get_or_init(|| {
            let sub_group = (self.id.p as u64).pow(m) - 1;
            let stride = self.group_order() / sub_group;
            let mut out: Vec<Element> = std::iter::once(self.zero())
                .chain((0..sub_group).map(|j| self.raw(self.exp[(j * stride) as usize])))
                .collect();
            out.sort();
            out
        }))
    }

    /// μ_d = { x : x^d = 1 }, sorted by index.
    pub fn mu_subgroup(&self, d: u64) -> Result<Vec<Element>, FieldError> {
        let group = self.group_order();
        if d == 0 || !group.is_multiple_of(d) {
            return Err(FieldError::BadSubgroupOrder { d, group });
        }
        let stride = group / d;
        let mut out: Vec<Element> = (0..d)
            .map(|j| self.raw(self.exp[(j * stride) as usize]))
            .collect();
        out.sort();
        Ok(out)
    }

    /// Views this field as GF(q^m) over GF(q), q = p^base_degree.
    pub fn tower(&self, base_degree: u32) -> Result<Tower, FieldError> {
        self.check_divisor(base_degree)?;
        Ok(Tower {
            q: (self.id.p as u64).pow(base_degree),
            base_degree,
            ext_degree: self.id.n / base_degree,
        })
    }

    /// Digit-wise addition, independent of the Zech tables.
    pub fn add_by_coeffs(&self, a: Element, b: Element) -> Element {
        self.raw(digit_add(a.index, b.index, self.id.p))
    }

    /// Schoolbook polynomial multiplication modulo the modulus, independent
    /// of the log tables.
    pub fn mul_by_coeffs(&self, a: Element, b: Element) -> Element {
        let prod = poly::mul_mod(&self.coeffs(a), &self.coeffs(b), &self.modulus, self.id.p);
        self.raw(poly::from_digits(&prod, self.id.p) as u32)
    }
}

impl Tower {
    /// q^k as an absolute Frobenius power count (p-power steps).
    pub fn frobenius_power(&self, k: u32) -> u64 {
        (self.base_degree * k) as u64
    }
}

fn digit_add(mut a: u32, mut b: u32, p: u32) -> u32 {
    if p == 2 {
        return a ^ b;
    }
    let mut out = 0u32;
    let mut place = 1u32;
    while a > 0 || b > 0 {
        let d = (a % p + b % p) % p;
        out += d * place;
        a /= p;
        b /= p;
        place = place.wrapping_mul(p);
    }
    out
}

fn find_generator(p: u32, n: u32, modulus: &[u32], group: u64) -> Vec<u32> {
    let one = poly::digits(1, p, n as usize);
    if group == 1 {
        return one;
    }
    let factors = poly::prime_factors(group);
    for v in 2..=group {
        let cand = poly::digits(v, p, n as usize);
        let primitive = factors
            .iter()
            .all(|&r| poly::pow_mod(&cand, group / r, modulus, p) != one);
        if primitive {
            return cand;
        }
    }
    unreachable!("the multiplicative group of a finite field is cyclic")
}

pub(crate) fn pow_mod(base: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m = m as u128;
    let mut acc = 1u128;
    let mut b = base as u128 % m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc as u64
}

fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|&d| n.is_multiple_of(d)).collect()
}

/// `e` reduced modulo `group` into `[1, group]` when positive, 0 stays 0.
/// Keeps `0^e = 0` for positive exponents after reduction.
pub fn canonical_positive(e: u64, group: u64) -> u64 {
    if e == 0 {
        0
    } else {
        match e % group {
            0 => group,
            r => r,
        }
    }
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}
