//! Arithmetic in F = GF(p^t) for odd primes p and small extension degree t,
//! in polynomial-basis representation modulo a monic irreducible polynomial.
//!
//! Fields here are tiny (desk scale, q <= a few hundred), so inversion is done
//! by exponentiation and irreducibility by trial division.

use std::fmt;
use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_EXT_DEGREE: usize = 4;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum FieldError {
    #[error("characteristic must be an odd prime, got {0}")]
    BadCharacteristic(u32),
    #[error("extension degree must be in 1..={max}, got {got}", max = MAX_EXT_DEGREE)]
    BadDegree { got: usize },
    #[error("modulus coefficient list must have length t with entries reduced mod p")]
    BadModulus,
    #[error("modulus is reducible over GF({p})")]
    ReducibleModulus { p: u32 },
    #[error("scalar from GF({found_p}^{found_t}) used with GF({expect_p}^{expect_t})")]
    MismatchedField {
        found_p: u32,
        found_t: usize,
        expect_p: u32,
        expect_t: usize,
    },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("coefficient list longer than extension degree")]
    TooManyCoefficients,
}

/// One element of GF(p^t): coefficients of the polynomial basis 1, a, ..., a^(t-1).
///
/// Scalars carry (p, t) so cross-field mixups are caught cheaply; all real
/// arithmetic goes through [`FieldParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldScalar {
    p: u16,
    t: u8,
    c: [u16; MAX_EXT_DEGREE],
}

impl FieldScalar {
    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn coeffs(&self) -> &[u16] {
        &self.c[..self.t as usize]
    }

    fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&x| x == 0)
    }

    /// Splits for display: constants above p/2 render as negated magnitudes,
    /// so that p-1 prints as `-1` rather than `p-1`.
    pub fn balanced_parts(&self) -> (bool, FieldScalar) {
        if self.c[1..].iter().all(|&x| x == 0) {
            let c0 = self.c[0];
            if 2 * c0 > self.p {
                let mut m = *self;
                m.c[0] = self.p - c0;
                return (true, m);
            }
        }
        (false, *self)
    }
}

impl fmt::Display for FieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.t == 1 || self.c[1..].iter().all(|&x| x == 0) {
            return write!(f, "{}", self.c[0]);
        }
        let mut first = true;
        for (i, &ci) in self.c[..self.t as usize].iter().enumerate().rev() {
            if ci == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, ci) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "a")?,
                (1, c) => write!(f, "{c}*a")?,
                (i, 1) => write!(f, "a^{i}")?,
                (i, c) => write!(f, "{c}*a^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Parameters of GF(p^t): p odd prime, monic degree-t modulus, q = p^t.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldParams {
    p: u32,
    t: usize,
    /// Non-leading coefficients of the monic modulus, constant first.
    modulus: [u32; MAX_EXT_DEGREE],
    q: u64,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Dense little-endian polynomial over Z_p, used only for modulus checking.
fn poly_mod_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    // b is monic. Returns a mod b.
    let mut r: Vec<u32> = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap();
        let dr = r.len() - 1;
        if lead != 0 {
            for i in 0..db {
                let idx = dr - db + i;
                r[idx] = (r[idx] + p - (lead * b[i]) % p) % p;
            }
        }
        r.pop();
        while r.len() > db && *r.last().unwrap() == 0 && r.len() > 1 {
            if r.len() <= db {
                break;
            }
            r.pop();
        }
    }
    r
}

fn poly_is_zero(a: &[u32]) -> bool {
    a.iter().all(|&x| x == 0)
}

/// Monic polynomials of degree d over Z_p, little-endian with implicit leading 1.
fn monic_polys(p: u32, d: usize) -> impl Iterator<Item = Vec<u32>> {
    let total = (p as u64).pow(d as u32);
    (0..total).map(move |mut n| {
        let mut coeffs = Vec::with_capacity(d + 1);
        for _ in 0..d {
            coeffs.push((n % p as u64) as u32);
            n /= p as u64;
        }
        coeffs.push(1);
        coeffs
    })
}

/// Trial-division irreducibility over Z_p; fine for t <= 4.
fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let t = modulus.len() - 1;
    if t == 1 {
        return true;
    }
    for d in 1..=t / 2 {
        for div in monic_polys(p, d) {
            if poly_is_zero(&poly_mod_rem(modulus, &div, p)) {
                return false;
            }
        }
    }
    true
}

impl FieldParams {
    /// Builds GF(p^t) with an explicit modulus (non-leading coefficients,
    /// constant first). Rejects composite or even p and reducible moduli.
    pub fn with_modulus(p: u32, t: usize, modulus: &[u32]) -> Result<Self, FieldError> {
        if p <= 2 || !is_prime(p) {
            return Err(FieldError::BadCharacteristic(p));
        }
        if t == 0 || t > MAX_EXT_DEGREE {
            return Err(FieldError::BadDegree { got: t });
        }
        if modulus.len() != t || modulus.iter().any(|&c| c >= p) {
            return Err(FieldError::BadModulus);
        }
        let mut full = modulus.to_vec();
        full.push(1);
        if !is_irreducible(&full, p) {
            return Err(FieldError::ReducibleModulus { p });
        }
        let mut m = [0u32; MAX_EXT_DEGREE];
        m[..t].copy_from_slice(modulus);
        Ok(FieldParams {
            p,
            t,
            modulus: m,
            q: (p as u64).pow(t as u32),
        })
    }

    /// Builds GF(p^t) with the default modulus: the lexicographically smallest
    /// irreducible coefficient list (constant coefficient most significant).
    pub fn new(p: u32, t: usize) -> Result<Self, FieldError> {
        if p <= 2 || !is_prime(p) {
            return Err(FieldError::BadCharacteristic(p));
        }
        if t == 0 || t > MAX_EXT_DEGREE {
            return Err(FieldError::BadDegree { got: t });
        }
        if t == 1 {
            return Self::with_modulus(p, 1, &[0]);
        }
        let total = (p as u64).pow(t as u32);
        for n in 0..total {
            // Digits with the constant coefficient as the most significant digit.
            let mut coeffs = vec![0u32; t];
            let mut m = n;
            for i in (0..t).rev() {
                coeffs[i] = (m % p as u64) as u32;
                m /= p as u64;
            }
            if let Ok(fp) = Self::with_modulus(p, t, &coeffs) {
                return Ok(fp);
            }
        }
        unreachable!("an irreducible polynomial of degree {t} exists over GF({p})")
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus[..self.t]
    }

    fn check(&self, a: &FieldScalar) -> Result<(), FieldError> {
        if a.p as u32 != self.p || a.t as usize != self.t {
            return Err(FieldError::MismatchedField {
                found_p: a.p as u32,
                found_t: a.t as usize,
                expect_p: self.p,
                expect_t: self.t,
            });
        }
        Ok(())
    }

    pub fn zero(&self) -> FieldScalar {
        FieldScalar {
            p: self.p as u16,
            t: self.t as u8,
            c: [0; MAX_EXT_DEGREE],
        }
    }

    pub fn one(&self) -> FieldScalar {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> FieldScalar {
        let mut s = self.zero();
        s.c[0] = n.rem_euclid(self.p as i64) as u16;
        s
    }

    /// Builds an element from up to t coefficients (constant first), reducing
    /// each one mod p. Errors if more than t coefficients are given.
    pub fn scalar(&self, coeffs: &[i64]) -> Result<FieldScalar, FieldError> {
        if coeffs.len() > self.t {
            return Err(FieldError::TooManyCoefficients);
        }
        let mut s = self.zero();
        for (i, &c) in coeffs.iter().enumerate() {
            s.c[i] = c.rem_euclid(self.p as i64) as u16;
        }
        Ok(s)
    }

    pub fn add(&self, a: FieldScalar, b: FieldScalar) -> FieldScalar {
        debug_assert!(self.check(&a).is_ok() && self.check(&b).is_ok());
        let p = self.p as u16;
        let mut out = a;
        for i in 0..self.t {
            let s = out.c[i] + b.c[i];
            out.c[i] = if s >= p { s - p } else { s };
        }
        out
    }

    pub fn sub(&self, a: FieldScalar, b: FieldScalar) -> FieldScalar {
        self.add(a, self.neg(b))
    }

    pub fn neg(&self, a: FieldScalar) -> FieldScalar {
        let p = self.p as u16;
        let mut out = a;
        for i in 0..self.t {
            out.c[i] = if a.c[i] == 0 { 0 } else { p - a.c[i] };
        }
        out
    }

    pub fn mul(&self, a: FieldScalar, b: FieldScalar) -> FieldScalar {
        debug_assert!(self.check(&a).is_ok() && self.check(&b).is_ok());
        let p = self.p as u64;
        let t = self.t;
        if t == 1 {
            let mut out = self.zero();
            out.c[0] = ((a.c[0] as u64 * b.c[0] as u64) % p) as u16;
            return out;
        }
        // Schoolbook product, then reduce degree-by-degree using the monic modulus.
        let mut prod = [0u64; 2 * MAX_EXT_DEGREE - 1];
        for i in 0..t {
            if a.c[i] == 0 {
                continue;
            }
            for j in 0..t {
                prod[i + j] += a.c[i] as u64 * b.c[j] as u64;
            }
        }
        for d in (t..2 * t - 1).rev() {
            let lead = prod[d] % p;
            prod[d] = 0;
            if lead == 0 {
                continue;
            }
            // a^d = a^(d-t) * (p - modulus) since a^t = -modulus(a).
            for i in 0..t {
                let m = self.modulus[i] as u64 % p;
                prod[d - t + i] += lead * ((p - m) % p);
            }
        }
        let mut out = self.zero();
        for i in 0..t {
            out.c[i] = (prod[i] % p) as u16;
        }
        out
    }

    pub fn pow(&self, a: FieldScalar, e: u64) -> FieldScalar {
        let mut base = a;
        let mut e = e;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via a^(q-2); errors on zero.
    pub fn inv(&self, a: FieldScalar) -> Result<FieldScalar, FieldError> {
        self.check(&a)?;
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// All q elements in a fixed order: zero first, then one, then the rest.
    pub fn enumerate(&self) -> impl Iterator<Item = FieldScalar> + '_ {
        let p = self.p as u64;
        (0..self.q).map(move |mut n| {
            let mut s = self.zero();
            for i in 0..self.t {
                s.c[i] = (n % p) as u16;
                n /= p;
            }
            s
        })
    }

    pub fn is_one(&self, a: &FieldScalar) -> bool {
        a.is_one()
    }

    /// 2^(-1), needed by the grading projectors.
    pub fn half(&self) -> FieldScalar {
        self.inv(self.from_int(2)).expect("p > 2")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32, t: usize) -> FieldParams {
        FieldParams::new(p, t).unwrap()
    }

    #[test]
    fn make_reduces_mod_p() {
        let f = gf(3, 1);
        assert_eq!(f.scalar(&[5]).unwrap(), f.from_int(2));
        let f5 = gf(5, 1);
        assert!(f5.scalar(&[0]).unwrap().is_zero());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(
            FieldParams::new(2, 1).unwrap_err(),
            FieldError::BadCharacteristic(2)
        );
        assert_eq!(
            FieldParams::new(9, 1).unwrap_err(),
            FieldError::BadCharacteristic(9)
        );
        assert_eq!(
            FieldParams::new(3, 0).unwrap_err(),
            FieldError::BadDegree { got: 0 }
        );
    }

    #[test]
    fn modulus_irreducibility_is_checked() {
        // x^2 + 1 has the root 2 over GF(5), so it must be rejected there...
        assert_eq!(
            FieldParams::with_modulus(5, 2, &[1, 0]).unwrap_err(),
            FieldError::ReducibleModulus { p: 5 }
        );
        // ...but -1 is a non-residue mod 3, so x^2 + 1 is a valid GF(9) modulus.
        assert!(FieldParams::with_modulus(3, 2, &[1, 0]).is_ok());
    }

    #[test]
    fn default_moduli_are_smallest_lex() {
        assert_eq!(gf(3, 2).modulus(), &[1, 0]);
        assert_eq!(gf(5, 2).modulus(), &[1, 1]);
        assert_eq!(gf(7, 1).modulus(), &[0]);
    }

    #[test]
    fn gf3_arithmetic() {
        let f = gf(3, 1);
        let two = f.from_int(2);
        assert_eq!(f.add(two, two), f.one());
        assert_eq!(f.mul(two, two), f.one());
        assert_eq!(f.inv(two).unwrap(), two);
        assert_eq!(f.pow(two, 3), two);
        assert_eq!(f.pow(two, 0), f.one());
    }

    #[test]
    fn gf5_inverse() {
        let f = gf(5, 1);
        assert_eq!(f.inv(f.from_int(2)).unwrap(), f.from_int(3));
    }

    #[test]
    fn gf9_generator_square() {
        // With modulus x^2 + 1, a * a = -1 = 2.
        let f = gf(3, 2);
        let a = f.scalar(&[0, 1]).unwrap();
        assert_eq!(f.mul(a, a), f.from_int(2));
    }

    #[test]
    fn gf9_inverses_exhaustive() {
        let f = gf(3, 2);
        let mut nonzero = 0;
        for x in f.enumerate() {
            if x.is_zero() {
                assert_eq!(f.inv(x).unwrap_err(), FieldError::ZeroInverse);
                continue;
            }
            nonzero += 1;
            assert!(f.is_one(&f.mul(x, f.inv(x).unwrap())));
        }
        assert_eq!(nonzero, 8);
    }

    #[test]
    fn enumerate_order_and_size() {
        let f = gf(5, 1);
        let all: Vec<_> = f.enumerate().collect();
        assert_eq!(all.len(), 5);
        assert!(all[0].is_zero());
        assert!(f.is_one(&all[1]));
        for i in 0..all.len() {
            for j in 0..i {
                assert_ne!(all[i], all[j]);
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for (p, t) in [(3, 1), (5, 1), (3, 2), (5, 2)] {
            let f = gf(p, t);
            if f.q() > 25 {
                continue;
            }
            let all: Vec<_> = f.enumerate().collect();
            for &x in &all {
                assert_eq!(f.add(x, f.neg(x)), f.zero());
                assert_eq!(f.mul(x, f.one()), x);
                for &y in &all {
                    assert_eq!(f.add(x, y), f.add(y, x));
                    assert_eq!(f.mul(x, y), f.mul(y, x));
                    for &z in &all {
                        assert_eq!(f.add(f.add(x, y), z), f.add(x, f.add(y, z)));
                        assert_eq!(f.mul(f.mul(x, y), z), f.mul(x, f.mul(y, z)));
                        assert_eq!(
                            f.mul(x, f.add(y, z)),
                            f.add(f.mul(x, y), f.mul(x, z))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_and_power_identities() {
        for (p, t) in [(3, 1), (3, 2), (5, 1)] {
            let f = gf(p, t);
            let q = f.q();
            let all: Vec<_> = f.enumerate().collect();
            for &x in &all {
                assert_eq!(f.pow(x, q), x, "x^q = x");
                assert_eq!(f.pow(x, p as u64 * q), f.pow(x, p as u64), "x^(pq) = x^p");
                for &y in &all {
                    assert_eq!(
                        f.pow(f.add(x, y), p as u64),
                        f.add(f.pow(x, p as u64), f.pow(y, p as u64)),
                        "Frobenius"
                    );
                }
            }
        }
    }

    #[test]
    fn closure_under_addition_gf9() {
        let f = gf(3, 2);
        let all: Vec<_> = f.enumerate().collect();
        for &x in &all {
            for &y in &all {
                assert!(all.contains(&f.add(x, y)));
            }
        }
    }
}
