//! Dense polynomials over Z_p, little-endian (constant term first).
//!
//! Only what field construction needs: remainder by a monic divisor,
//! multiplication modulo a monic modulus, and the trial-division
//! irreducibility test used to pick the defining modulus.

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let p = p as u64;
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors of `n`, ascending.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Digits of `value` in base `p`, exactly `len` of them.
pub(crate) fn digits(mut value: u64, p: u32, len: usize) -> Vec<u32> {
    let p = p as u64;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((value % p) as u32);
        value /= p;
    }
    out
}

pub(crate) fn from_digits(coeffs: &[u32], p: u32) -> u64 {
    coeffs
        .iter()
        .rev()
        .fold(0u64, |acc, &c| acc * p as u64 + c as u64)
}

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

/// Remainder of `a` modulo the monic polynomial `divisor`.
pub(crate) fn rem_monic(a: &[u32], divisor: &[u32], p: u32) -> Vec<u32> {
    let d = divisor.len() - 1;
    debug_assert_eq!(divisor[d], 1);
    let p64 = p as u64;
    let mut r = trim(a.to_vec());
    while r.len() > d {
        let lead = *r.last().unwrap() as u64;
        let shift = r.len() - 1 - d;
        for (i, &dc) in divisor.iter().enumerate() {
            let sub = lead * dc as u64 % p64;
            let slot = &mut r[shift + i];
            *slot = ((*slot as u64 + p64 - sub) % p64) as u32;
        }
        r = trim(r);
    }
    r
}

/// `a * b mod modulus`, result padded to `modulus.len() - 1` coefficients.
pub(crate) fn mul_mod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let n = modulus.len() - 1;
    let p64 = p as u64;
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|v| v as u32).collect();
    let mut r = rem_monic(&prod, modulus, p);
    r.resize(n, 0);
    r
}

pub(crate) fn pow_mod(base: &[u32], mut e: u64, modulus: &[u32], p: u32) -> Vec<u32> {
    let n = modulus.len() - 1;
    let mut acc = vec![0u32; n];
    acc[0] = 1;
    let mut sq = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(&acc, &sq, modulus, p);
        }
        e >>= 1;
        if e > 0 {
            sq = mul_mod(&sq, &sq, modulus, p);
        }
    }
    acc
}

/// Trial division by every monic polynomial of degree 1..=deg/2.
pub(crate) fn is_irreducible(f: &[u32], p: u32) -> bool {
    let n = f.len() - 1;
    for d in 1..=n / 2 {
        let count = (p as u64).pow(d as u32);
        for v in 0..count {
            let mut g = digits(v, p, d);
            g.push(1);
            if rem_monic(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically-first monic irreducible polynomial of degree `n`,
/// ordering the non-leading coefficients as a base-p integer with the
/// constant term least significant.
pub(crate) fn first_irreducible(p: u32, n: u32) -> Vec<u32> {
    let n = n as usize;
    let count = (p as u64).pow(n as u32);
    for v in 0..count {
        let mut f = digits(v, p, n);
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over a prime field")
}
