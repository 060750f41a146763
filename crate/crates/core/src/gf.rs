//! Exact arithmetic in finite fields `GF(p^k)`.
//!
//! Elements are dense coefficient vectors in the polynomial basis over the
//! prime field; all prime-field arithmetic happens in machine integers mod p.
//! The modulus is the lexicographically least monic irreducible polynomial of
//! degree k, found by scanning constant-coefficient-first, so a `FieldSpec`
//! for given `(p, k)` is identical across runs.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1, got {0}")]
    BadDegree(u32),
    #[error("field cardinality p^k = {0} exceeds the supported limit 2^16")]
    TooLarge(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("squareness of zero is undefined")]
    ZeroSquareTest,
    #[error("element does not belong to this field")]
    WrongField,
}

/// Specification of `GF(p^k)`: characteristic, degree, and the reduction modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    p: u32,
    k: u32,
    q: u32,
    /// Monic modulus of degree k, stored low-to-high with `modulus[k] == 1`.
    modulus: Vec<u32>,
}

/// An element of `GF(p^k)` as a length-k coefficient vector (low degree first).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    coeffs: Vec<u32>,
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl FieldElement {
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Product of two polynomials over GF(p), reduced mod `modulus` when provided.
fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai as u64 * bj as u64;
        }
    }
    out.iter().map(|&c| (c % p as u64) as u32).collect()
}

/// Remainder of `a` modulo the monic polynomial `m` over GF(p).
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let deg_m = m.len() - 1;
    let mut r: Vec<u32> = a.to_vec();
    while r.len() > deg_m {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - deg_m;
        if lead != 0 {
            for i in 0..=deg_m {
                let sub = (lead as u64 * m[i] as u64) % p as u64;
                let idx = shift + i;
                r[idx] = ((r[idx] as u64 + p as u64 - sub) % p as u64) as u32;
            }
        }
        r.pop();
    }
    r.resize(deg_m.max(1), 0);
    r
}

fn poly_is_zero(a: &[u32]) -> bool {
    a.iter().all(|&c| c == 0)
}

/// Trial-division irreducibility test for a monic polynomial over GF(p).
/// Divisor candidates run over all monic polynomials of degree 1..=deg/2,
/// which is cheap for the q <= 2^16 fields in scope.
fn poly_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    if deg == 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        // monic divisor x^d + sum c_i x^i encoded by the integer v
        let count = (p as u64).pow(d as u32);
        for v in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut t = v;
            for _ in 0..d {
                g.push((t % p as u64) as u32);
                t /= p as u64;
            }
            g.push(1);
            if poly_is_zero(&poly_rem(f, &g, p)) {
                return false;
            }
        }
    }
    true
}

/// Builds `GF(p^k)` with the lexicographically least monic irreducible modulus.
pub fn ff_make(p: u32, k: u32) -> Result<FieldSpec, GfError> {
    if !is_prime(p as u64) {
        return Err(GfError::NotPrime(p as u64));
    }
    if k < 1 {
        return Err(GfError::BadDegree(k));
    }
    let q = (p as u64).checked_pow(k).filter(|&q| q <= 1 << 16);
    let q = q.ok_or(GfError::TooLarge((p as u64).saturating_pow(k)))? as u32;
    // scan monic degree-k polynomials by increasing coefficient encoding
    let mut modulus = None;
    for v in 0..q as u64 {
        let mut f = Vec::with_capacity(k as usize + 1);
        let mut t = v;
        for _ in 0..k {
            f.push((t % p as u64) as u32);
            t /= p as u64;
        }
        f.push(1);
        if poly_irreducible(&f, p) {
            modulus = Some(f);
            break;
        }
    }
    Ok(FieldSpec {
        p,
        k,
        q,
        modulus: modulus.expect("an irreducible polynomial of every degree exists"),
    })
}

impl FieldSpec {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            coeffs: vec![0; self.k as usize],
        }
    }

    pub fn one(&self) -> FieldElement {
        self.from_index(1)
    }

    /// The generator `x` of the polynomial basis (equals `p` as an index).
    pub fn gen_x(&self) -> FieldElement {
        if self.k == 1 {
            // in a prime field the basis "x" collapses; callers never need it
            self.from_index(1)
        } else {
            self.from_index(self.p as usize)
        }
    }

    /// Canonical index of an element: its coefficient vector read base p.
    pub fn index_of(&self, e: &FieldElement) -> usize {
        let mut v = 0usize;
        for &c in e.coeffs.iter().rev() {
            v = v * self.p as usize + c as usize;
        }
        v
    }

    pub fn from_index(&self, mut v: usize) -> FieldElement {
        debug_assert!(v < self.q as usize);
        let mut coeffs = Vec::with_capacity(self.k as usize);
        for _ in 0..self.k {
            coeffs.push((v % self.p as usize) as u32);
            v /= self.p as usize;
        }
        FieldElement { coeffs }
    }

    /// Embeds a prime-field residue as a constant.
    pub fn from_int(&self, v: i64) -> FieldElement {
        let r = v.rem_euclid(self.p as i64) as usize;
        self.from_index(r)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q as usize).map(|v| self.from_index(v))
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| (x + y) % self.p)
            .collect();
        FieldElement { coeffs }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        let coeffs = a.coeffs.iter().map(|&x| (self.p - x) % self.p).collect();
        FieldElement { coeffs }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let prod = poly_mul(&a.coeffs, &b.coeffs, self.p);
        let mut coeffs = poly_rem(&prod, &self.modulus, self.p);
        coeffs.resize(self.k as usize, 0);
        FieldElement { coeffs }
    }

    /// Square-and-multiply exponentiation; `e` may be any non-negative power.
    pub fn pow(&self, a: &FieldElement, e: u64) -> FieldElement {
        let mut base = a.clone();
        let mut acc = self.one();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement, GfError> {
        if a.is_zero() {
            return Err(GfError::ZeroInverse);
        }
        // a^(q-2); q <= 2^16 keeps this a handful of multiplications
        Ok(self.pow(a, self.q as u64 - 2))
    }

    /// True iff the nonzero element is a square. Every element of a
    /// characteristic-2 field is a square.
    pub fn is_square(&self, e: &FieldElement) -> Result<bool, GfError> {
        if e.is_zero() {
            return Err(GfError::ZeroSquareTest);
        }
        if self.p == 2 {
            return Ok(true);
        }
        let half = (self.q as u64 - 1) / 2;
        Ok(self.pow(e, half) == self.one())
    }

    /// The Frobenius power `e^(p^j)` for `0 <= j <= k`.
    pub fn frobenius(&self, e: &FieldElement, j: u32) -> FieldElement {
        debug_assert!(j <= self.k);
        if j == self.k {
            return e.clone();
        }
        let exp = (self.p as u64).pow(j);
        self.pow(e, exp)
    }

    /// Least element of multiplicative order q-1 in the canonical index order.
    pub fn primitive_root(&self) -> FieldElement {
        'outer: for v in 1..self.q as usize {
            let g = self.from_index(v);
            // the order of g divides q-1; g generates iff g^((q-1)/r) != 1
            // for every prime r dividing q-1
            let m = self.q as u64 - 1;
            let mut rem = m;
            let mut r = 2u64;
            while r * r <= rem {
                if rem % r == 0 {
                    if self.pow(&g, m / r) == self.one() {
                        continue 'outer;
                    }
                    while rem % r == 0 {
                        rem /= r;
                    }
                }
                r += 1;
            }
            if rem > 1 && self.pow(&g, m / rem) == self.one() {
                continue 'outer;
            }
            return g;
        }
        unreachable!("the multiplicative group of a finite field is cyclic")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_modulus_is_x() {
        let f = ff_make(2, 1).unwrap();
        assert_eq!(f.q(), 2);
        assert_eq!(f.modulus(), &[0, 1]);
    }

    #[test]
    fn gf16_has_16_elements() {
        let f = ff_make(2, 4).unwrap();
        assert_eq!(f.q(), 16);
        assert_eq!(f.elements().count(), 16);
    }

    #[test]
    fn gf9_modulus_is_x2_plus_1() {
        // lex scan over monic quadratics mod 3 hits x^2 + 1 first
        let f = ff_make(3, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 1]);
    }

    #[test]
    fn gf9_x_squared_is_minus_one() {
        let f = ff_make(3, 2).unwrap();
        let x = f.gen_x();
        let x2 = f.mul(&x, &x);
        assert_eq!(x2, f.from_int(2));
    }

    #[test]
    fn inverse_roundtrip_all_fields() {
        for (p, k) in [(2, 1), (2, 4), (3, 2), (5, 1), (7, 1), (13, 1)] {
            let f = ff_make(p, k).unwrap();
            for a in f.elements().skip(1) {
                let inv = f.inv(&a).unwrap();
                assert_eq!(f.mul(&a, &inv), f.one(), "GF({}) inv of {}", f.q(), a);
            }
        }
    }

    #[test]
    fn fermat_little_gf7() {
        let f = ff_make(7, 1).unwrap();
        let three = f.from_int(3);
        assert_eq!(f.pow(&three, 6), f.one());
    }

    #[test]
    fn minus_one_square_classification() {
        let f13 = ff_make(13, 1).unwrap();
        assert!(f13.is_square(&f13.from_int(-1)).unwrap());
        let f7 = ff_make(7, 1).unwrap();
        assert!(!f7.is_square(&f7.from_int(-1)).unwrap());
    }

    #[test]
    fn primitive_root_is_never_square() {
        let f = ff_make(3, 2).unwrap();
        let g = f.primitive_root();
        assert!(!f.is_square(&g).unwrap());
    }

    #[test]
    fn square_test_rejects_zero() {
        let f = ff_make(5, 1).unwrap();
        assert_eq!(f.is_square(&f.zero()), Err(GfError::ZeroSquareTest));
    }

    #[test]
    fn odd_fields_have_half_nonzero_squares() {
        for (p, k) in [(3, 2), (5, 1), (7, 1), (13, 1), (3, 3)] {
            let f = ff_make(p, k).unwrap();
            let squares = f
                .elements()
                .skip(1)
                .filter(|e| f.is_square(e).unwrap())
                .count();
            assert_eq!(squares as u32, (f.q() - 1) / 2);
        }
    }

    #[test]
    fn square_test_is_multiplicative() {
        let f = ff_make(3, 2).unwrap();
        for a in f.elements().skip(1) {
            for b in f.elements().skip(1) {
                let sa = f.is_square(&a).unwrap();
                let sb = f.is_square(&b).unwrap();
                let sab = f.is_square(&f.mul(&a, &b)).unwrap();
                assert_eq!(sab, sa == sb);
            }
        }
    }

    #[test]
    fn frobenius_is_automorphism_small_fields() {
        for (p, k) in [(2, 4), (3, 2), (2, 5), (5, 2)] {
            let f = ff_make(p, k).unwrap();
            for j in 0..=f.k() {
                for a in f.elements() {
                    for b in f.elements() {
                        let fa = f.frobenius(&a, j);
                        let fb = f.frobenius(&b, j);
                        assert_eq!(f.frobenius(&f.add(&a, &b), j), f.add(&fa, &fb));
                        assert_eq!(f.frobenius(&f.mul(&a, &b), j), f.mul(&fa, &fb));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_fixed_field_is_prime_subfield() {
        let f = ff_make(3, 2).unwrap();
        let fixed: Vec<_> = f
            .elements()
            .filter(|e| f.frobenius(e, 1) == *e)
            .map(|e| f.index_of(&e))
            .collect();
        assert_eq!(fixed, vec![0, 1, 2]);
    }

    #[test]
    fn frobenius_full_power_is_identity() {
        let f = ff_make(2, 4).unwrap();
        for e in f.elements() {
            assert_eq!(f.frobenius(&e, f.k()), e);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(ff_make(6, 1), Err(GfError::NotPrime(6)));
        assert_eq!(ff_make(3, 0), Err(GfError::BadDegree(0)));
        assert!(ff_make(2, 17).is_err());
    }
}
