//! Arithmetic in GF(q), q = p^e, on element indices `0..q`.
//!
//! Index `i` stands for the polynomial whose coefficients are the base-p digits
//! of `i` (least significant first), so for `e = 1` index arithmetic is plain
//! arithmetic mod p. Extension fields reduce modulo the lexicographically
//! smallest monic irreducible polynomial of degree `e`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{factorize, is_prime, mod_inverse};
use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 16;

/// An element of a finite field, identified by its index in `0..q`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FqElem(u32);

impl FqElem {
    pub const ZERO: FqElem = FqElem(0);
    pub const ONE: FqElem = FqElem(1);

    /// Wraps an index without checking it against a field.
    pub const fn from_index(index: u32) -> Self {
        FqElem(index)
    }

    pub const fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The finite field GF(p^e). Immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldSpec {
    p: u32,
    e: u32,
    q: u32,
    /// Monic modulus, coefficients low to high (length e + 1). `None` for prime fields.
    modulus: Option<Vec<u32>>,
    /// exp[k] = g^k for a primitive element g (extension fields only).
    exp: Vec<u32>,
    /// log[a] for a != 0 (extension fields only).
    log: Vec<u32>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec").field("p", &self.p).field("e", &self.e).field("modulus", &self.modulus).finish()
    }
}

impl FieldSpec {
    /// Builds GF(p^e).
    pub fn new(p: u32, e: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if e == 0 {
            return Err(Error::TooLarge { what: "exponent 0".into(), limit: "e >= 1".into() });
        }
        let q = (p as u64)
            .checked_pow(e)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or_else(|| Error::TooLarge { what: format!("{p}^{e}"), limit: MAX_ORDER.to_string() })?
            as u32;
        if e == 1 {
            return Ok(FieldSpec { p, e, q, modulus: None, exp: Vec::new(), log: Vec::new() });
        }
        let modulus = smallest_irreducible(p, e);
        let mut field = FieldSpec { p, e, q, modulus: Some(modulus), exp: Vec::new(), log: Vec::new() };
        field.build_log_tables();
        Ok(field)
    }

    /// Shorthand for a prime field GF(p).
    pub fn prime(p: u32) -> Result<Self> {
        Self::new(p, 1)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Reduction polynomial (low to high, monic) for extension fields.
    pub fn modulus(&self) -> Option<&[u32]> {
        self.modulus.as_deref()
    }

    pub fn elem(&self, index: u32) -> Result<FqElem> {
        if index < self.q {
            Ok(FqElem(index))
        } else {
            Err(Error::EntryOutOfRange { value: index, q: self.q })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FqElem> {
        (0..self.q).map(FqElem)
    }

    #[inline]
    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        if self.e == 1 {
            let s = a.0 + b.0;
            return FqElem(if s >= self.p { s - self.p } else { s });
        }
        self.digitwise(a.0, b.0, |x, y| (x + y) % self.p)
    }

    #[inline]
    pub fn neg(&self, a: FqElem) -> FqElem {
        if self.e == 1 {
            return FqElem(if a.0 == 0 { 0 } else { self.p - a.0 });
        }
        self.digitwise(a.0, 0, |x, _| (self.p - x) % self.p)
    }

    #[inline]
    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        if a.0 == 0 || b.0 == 0 {
            return FqElem::ZERO;
        }
        if self.e == 1 {
            return FqElem(((a.0 as u64 * b.0 as u64) % self.p as u64) as u32);
        }
        let k = (self.log[a.0 as usize] + self.log[b.0 as usize]) % (self.q - 1);
        FqElem(self.exp[k as usize])
    }

    pub fn inv(&self, a: FqElem) -> Result<FqElem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero(self.q));
        }
        if self.e == 1 {
            let inv = mod_inverse(a.0 as i128, self.p as i128).expect("nonzero mod prime is invertible");
            return Ok(FqElem(inv as u32));
        }
        let k = (self.q - 1 - self.log[a.0 as usize]) % (self.q - 1);
        Ok(FqElem(self.exp[k as usize]))
    }

    pub fn pow(&self, a: FqElem, mut k: u64) -> FqElem {
        let mut base = a;
        let mut acc = FqElem::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// Image of an integer under the canonical map Z -> GF(p) -> GF(q).
    pub fn from_int(&self, n: i64) -> FqElem {
        FqElem(n.rem_euclid(self.p as i64) as u32)
    }

    fn digitwise(&self, a: u32, b: u32, f: impl Fn(u32, u32) -> u32) -> FqElem {
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut scale = 1;
        for _ in 0..self.e {
            out += f(a % self.p, b % self.p) * scale;
            a /= self.p;
            b /= self.p;
            scale *= self.p;
        }
        FqElem(out)
    }

    /// Polynomial product of two indices reduced by the modulus (table-free path).
    fn poly_mul(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        let e = self.e as usize;
        let modulus = self.modulus.as_ref().expect("extension field");
        let da = to_digits(a, self.p, e);
        let db = to_digits(b, self.p, e);
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        for deg in (e..prod.len()).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            // x^e = -(m_0 + ... + m_{e-1} x^{e-1})
            for k in 0..e {
                let sub = c * modulus[k] as u64 % p;
                prod[deg - e + k] = (prod[deg - e + k] + p - sub) % p;
            }
            prod[deg] = 0;
        }
        from_digits(&prod[..e].iter().map(|&d| d as u32).collect::<Vec<_>>(), self.p)
    }

    fn build_log_tables(&mut self) {
        let order = (self.q - 1) as u64;
        let prime_factors: Vec<u64> = factorize(order).into_iter().map(|(l, _)| l).collect();
        let slow_pow = |field: &FieldSpec, g: u32, mut k: u64| {
            let (mut base, mut acc) = (g, 1u32);
            while k > 0 {
                if k & 1 == 1 {
                    acc = field.poly_mul(acc, base);
                }
                base = field.poly_mul(base, base);
                k >>= 1;
            }
            acc
        };
        let generator = (2..self.q)
            .find(|&g| prime_factors.iter().all(|&l| slow_pow(self, g, order / l) != 1))
            .expect("multiplicative group of a finite field is cyclic");
        let mut exp = vec![0u32; self.q as usize - 1];
        let mut log = vec![0u32; self.q as usize];
        let mut x = 1u32;
        for (k, slot) in exp.iter_mut().enumerate() {
            *slot = x;
            log[x as usize] = k as u32;
            x = self.poly_mul(x, generator);
        }
        self.exp = exp;
        self.log = log;
    }
}

fn to_digits(mut n: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = n % p;
        n /= p;
    }
    out
}

fn from_digits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &x| acc * p + x)
}

/// Remainder of `f` modulo the monic polynomial `g` over GF(p); coefficients low to high.
fn poly_rem(f: &[u32], g: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = f.iter().map(|&c| c as u64).collect();
    let dg = g.len() - 1;
    let p = p as u64;
    while r.len() > dg {
        let lead = r.pop().unwrap();
        if lead != 0 {
            let shift = r.len() - dg;
            for k in 0..dg {
                r[shift + k] = (r[shift + k] + p - lead * g[k] as u64 % p) % p;
            }
        }
    }
    r.into_iter().map(|c| c as u32).collect()
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let e = f.len() - 1;
    for d in 1..=e / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut g = to_digits(code as u32, p, d);
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Lexicographically smallest monic irreducible polynomial of degree `e` over GF(p),
/// ordering by the integer whose base-p digits are the lower coefficients.
pub fn smallest_irreducible(p: u32, e: u32) -> Vec<u32> {
    let count = (p as u64).pow(e);
    (0..count)
        .map(|code| {
            let mut f = to_digits(code as u32, p, e as usize);
            f.push(1);
            f
        })
        .find(|f| is_irreducible(f, p))
        .expect("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_fields() -> Vec<FieldSpec> {
        [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (11, 1), (13, 1), (2, 4)]
            .iter()
            .map(|&(p, e)| FieldSpec::new(p, e).unwrap())
            .collect()
    }

    #[test]
    fn gf2_characteristic() {
        let f = FieldSpec::new(2, 1).unwrap();
        assert_eq!(f.add(FqElem::ONE, FqElem::ONE), FqElem::ZERO);
    }

    #[test]
    fn gf5_mul_and_inverse() {
        let f = FieldSpec::prime(5).unwrap();
        assert_eq!(f.mul(FqElem(3), FqElem(4)), FqElem(2));
        assert_eq!(f.inv(FqElem(2)).unwrap(), FqElem(3));
        assert_eq!(f.inv(FqElem::ZERO), Err(Error::DivisionByZero(5)));
    }

    #[test]
    fn gf3_add() {
        let f = FieldSpec::prime(3).unwrap();
        assert_eq!(f.add(FqElem(2), FqElem(2)), FqElem(1));
    }

    #[test]
    fn gf4_modulus_and_square() {
        let f = FieldSpec::new(2, 2).unwrap();
        assert_eq!(f.modulus(), Some(&[1, 1, 1][..]));
        // x * x = x + 1 under x^2 + x + 1
        assert_eq!(f.mul(FqElem(2), FqElem(2)), FqElem(3));
        assert_eq!(f.poly_mul(2, 2), 3);
    }

    #[test]
    fn modulus_choice_is_lexicographic() {
        // x^3 + x + 1 precedes x^3 + x^2 + 1 over GF(2)
        assert_eq!(smallest_irreducible(2, 3), vec![1, 1, 0, 1]);
        // x^2 + 1 is irreducible over GF(3)
        assert_eq!(smallest_irreducible(3, 2), vec![1, 0, 1]);
        assert_eq!(smallest_irreducible(2, 4), vec![1, 1, 0, 0, 1]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(FieldSpec::new(4, 1), Err(Error::NotPrime(4)));
        assert!(matches!(FieldSpec::new(2, 17), Err(Error::TooLarge { .. })));
        assert!(FieldSpec::new(2, 16).is_ok());
        assert!(matches!(FieldSpec::new(257, 2), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn field_axioms_exhaustive() {
        for f in small_fields() {
            let els: Vec<FqElem> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, FqElem::ZERO), a);
                assert_eq!(f.mul(a, FqElem::ONE), a);
                assert_eq!(f.add(a, f.neg(a)), FqElem::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), FqElem::ONE);
                }
                // Frobenius
                assert_eq!(f.pow(a, f.order() as u64), a, "{f:?} a={a}");
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    if f.e() > 1 {
                        assert_eq!(f.mul(a, b).index(), f.poly_mul(a.index(), b.index()));
                    }
                    for &c in &els {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn large_extension_builds() {
        let f = FieldSpec::new(2, 16).unwrap();
        let a = f.elem(12345).unwrap();
        assert_eq!(f.mul(a, f.inv(a).unwrap()), FqElem::ONE);
        assert_eq!(f.pow(a, 1 << 16), a);
    }
}
