//! b-adic integers for an arbitrary base `b >= 2` as digit streams.
//!
//! Digits are indexed least significant first: digit `r` is the coefficient of
//! `b^r`. Rationals `u/v` with `gcd(v, b) = 1` (which includes all integers)
//! are held exactly as eventually periodic streams in canonical form; anything
//! else is a procedural stream whose digits are produced on demand and memoized.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{factorize, gcd, mod_inverse, valuation};
use crate::error::{Error, Result};

pub type Digit = u32;

/// A b-adic integer as a digit source.
#[derive(Clone)]
pub struct BAdicStream {
    base: u32,
    repr: Repr,
}

#[derive(Clone)]
enum Repr {
    Periodic { preperiod: Vec<Digit>, period: Vec<Digit> },
    Procedural(Arc<Procedural>),
}

struct Procedural {
    memo: Mutex<Memo>,
}

struct Memo {
    digits: Vec<Digit>,
    source: Box<dyn FnMut(usize) -> Digit + Send>,
}

impl Procedural {
    fn digit(&self, base: u32, r: usize) -> Digit {
        let mut memo = self.memo.lock().unwrap_or_else(|e| e.into_inner());
        while memo.digits.len() <= r {
            let next = memo.digits.len();
            let d = (memo.source)(next);
            assert!(d < base, "procedural digit {d} at index {next} is not below base {base}");
            memo.digits.push(d);
        }
        memo.digits[r]
    }
}

impl fmt::Debug for BAdicStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Periodic { preperiod, period } => f
                .debug_struct("BAdicStream")
                .field("base", &self.base)
                .field("preperiod", preperiod)
                .field("period", period)
                .finish(),
            Repr::Procedural(_) => f
                .debug_struct("BAdicStream")
                .field("base", &self.base)
                .field("prefix", &self.digits(8))
                .finish_non_exhaustive(),
        }
    }
}

fn check_base(b: u32) -> Result<()> {
    if b < 2 {
        return Err(Error::TooLarge { what: format!("base {b}"), limit: "b >= 2".into() });
    }
    Ok(())
}

/// Reduces an eventually periodic digit description to minimal period and preperiod.
fn canonicalize(mut preperiod: Vec<Digit>, mut period: Vec<Digit>) -> (Vec<Digit>, Vec<Digit>) {
    let len = period.len();
    if let Some(d) = (1..=len).find(|&d| len % d == 0 && (0..len).all(|i| period[i] == period[i % d])) {
        period.truncate(d);
    }
    while let (Some(&last), Some(&tail)) = (preperiod.last(), period.last()) {
        if last != tail {
            break;
        }
        preperiod.pop();
        period.rotate_right(1);
    }
    (preperiod, period)
}

/// `Σ ds[r] b^r`, splitting in halves so long digit strings use fast big multiplication.
fn digits_value(ds: &[Digit], base: u32) -> BigUint {
    if ds.len() <= 64 {
        return ds.iter().rev().fold(BigUint::zero(), |acc, &d| acc * base + d);
    }
    let mid = ds.len() / 2;
    digits_value(&ds[..mid], base) + digits_value(&ds[mid..], base) * num_traits::pow(BigUint::from(base), mid)
}

/// Digits of a state machine that enters a cycle once `in_cycle` holds, as (preperiod, period).
fn expand_periodic<S: Clone + PartialEq>(
    mut state: S,
    in_cycle: impl Fn(&S) -> bool,
    step: impl Fn(S) -> (Digit, S),
) -> (Vec<Digit>, Vec<Digit>) {
    let mut preperiod = Vec::new();
    while !in_cycle(&state) {
        let (d, next) = step(state);
        preperiod.push(d);
        state = next;
    }
    let start = state.clone();
    let mut period = Vec::new();
    loop {
        let (d, next) = step(state);
        period.push(d);
        state = next;
        if state == start {
            return (preperiod, period);
        }
    }
}

impl BAdicStream {
    /// Builds a canonical periodic stream from an arbitrary (preperiod, period) description.
    pub fn periodic(base: u32, preperiod: Vec<Digit>, period: Vec<Digit>) -> Result<Self> {
        check_base(base)?;
        if period.is_empty() {
            return Err(Error::SequenceSpec("period must be nonempty".into()));
        }
        if let Some(&d) = preperiod.iter().chain(&period).find(|&&d| d >= base) {
            return Err(Error::EntryOutOfRange { value: d, q: base });
        }
        let (preperiod, period) = canonicalize(preperiod, period);
        Ok(BAdicStream { base, repr: Repr::Periodic { preperiod, period } })
    }

    pub fn zero(base: u32) -> Self {
        BAdicStream { base, repr: Repr::Periodic { preperiod: Vec::new(), period: vec![0] } }
    }

    /// Base-b expansion of a nonnegative integer.
    pub fn integer_digits(n: u64, base: u32) -> Self {
        assert!(base >= 2, "base must be at least 2");
        let mut digits = Vec::new();
        let mut n = n;
        while n > 0 {
            digits.push((n % base as u64) as Digit);
            n /= base as u64;
        }
        BAdicStream { base, repr: Repr::Periodic { preperiod: digits, period: vec![0] } }
    }

    /// Any integer, negative values through their b-adic (complement) representation.
    pub fn from_int(n: i64, base: u32) -> Self {
        let magnitude = Self::integer_digits(n.unsigned_abs(), base);
        if n < 0 {
            magnitude.negate()
        } else {
            magnitude
        }
    }

    /// Exact digits of `u / v`; requires `gcd(v, b) = 1`.
    pub fn rational_digits(u: i64, v: u64, base: u32) -> Result<Self> {
        if v == 0 {
            return Err(Error::NotBAdicInteger { u: u.to_string(), v: "0".into(), base });
        }
        Self::from_ratio(&BigRational::new(BigInt::from(u), BigInt::from(v)), base)
    }

    /// Exact digits of a rational number lying in Z_b.
    pub fn from_ratio(x: &BigRational, base: u32) -> Result<Self> {
        check_base(base)?;
        let (num, den) = (x.numer(), x.denom());
        let b = BigInt::from(base);
        let den_mod_b = den.mod_floor(&b).to_i128().expect("reduced mod b");
        let den_inv = match mod_inverse(den_mod_b, base as i128) {
            Some(inv) if gcd(den_mod_b as u128, base as u128) == 1 => inv,
            _ => {
                return Err(Error::NotBAdicInteger { u: num.to_string(), v: den.to_string(), base });
            }
        };
        // The state is the numerator over the fixed denominator v. Once it lies in [-v, 0]
        // it stays there and the step map permutes that range, so the state returns to
        // its first value there and closes the period.
        let (preperiod, period) = match (num.to_i128(), den.to_i128()) {
            (Some(n), Some(d)) if n.unsigned_abs() < 1 << 100 && d < 1 << 100 => {
                let (b, inv) = (base as i128, den_inv);
                expand_periodic(
                    n,
                    |st| (-d..=0).contains(st),
                    |st| {
                        let digit = (st.rem_euclid(b) * inv).rem_euclid(b);
                        (digit as Digit, (st - digit * d) / b)
                    },
                )
            }
            _ => {
                let (inv, lo, zero) = (BigInt::from(den_inv), -den, BigInt::zero());
                expand_periodic(
                    num.clone(),
                    |st| *st >= lo && *st <= zero,
                    |st| {
                        let digit = (st.mod_floor(&b) * &inv).mod_floor(&b);
                        let next = (&st - &digit * den) / &b;
                        (digit.to_u32().expect("digit below base"), next)
                    },
                )
            }
        };
        let (preperiod, period) = canonicalize(preperiod, period);
        Ok(BAdicStream { base, repr: Repr::Periodic { preperiod, period } })
    }

    /// A procedural stream from a pure digit function `r -> a_r`.
    pub fn from_fn<F>(base: u32, f: F) -> Self
    where
        F: Fn(usize) -> Digit + Send + 'static,
    {
        Self::from_generator(base, f)
    }

    /// A procedural stream from a generator that is called with `r = 0, 1, 2, ...` in order.
    pub fn from_generator<F>(base: u32, source: F) -> Self
    where
        F: FnMut(usize) -> Digit + Send + 'static,
    {
        assert!(base >= 2, "base must be at least 2");
        let memo = Memo { digits: Vec::new(), source: Box::new(source) };
        BAdicStream { base, repr: Repr::Procedural(Arc::new(Procedural { memo: Mutex::new(memo) })) }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.repr, Repr::Periodic { .. })
    }

    /// `(preperiod, period)` of a periodic stream.
    pub fn periodic_parts(&self) -> Option<(&[Digit], &[Digit])> {
        match &self.repr {
            Repr::Periodic { preperiod, period } => Some((preperiod, period)),
            Repr::Procedural(_) => None,
        }
    }

    pub fn digit(&self, r: usize) -> Digit {
        match &self.repr {
            Repr::Periodic { preperiod, period } => {
                if r < preperiod.len() {
                    preperiod[r]
                } else {
                    period[(r - preperiod.len()) % period.len()]
                }
            }
            Repr::Procedural(p) => p.digit(self.base, r),
        }
    }

    /// The first `k` digits, least significant first.
    pub fn digits(&self, k: usize) -> Vec<Digit> {
        (0..k).map(|r| self.digit(r)).collect()
    }

    /// `τ_k(x) = Σ_{i<k} a_i b^i`.
    pub fn truncate(&self, k: usize) -> BigUint {
        let b = BigUint::from(self.base);
        (0..k).rev().fold(BigUint::zero(), |acc, r| acc * &b + BigUint::from(self.digit(r)))
    }

    /// `τ_k(x)` when it fits in 128 bits.
    pub fn truncate_u128(&self, k: usize) -> Option<u128> {
        let b = self.base as u128;
        (0..k).rev().try_fold(0u128, |acc, r| acc.checked_mul(b)?.checked_add(self.digit(r) as u128))
    }

    /// Whether the first `k` digits agree.
    pub fn prefix_eq(&self, other: &BAdicStream, k: usize) -> bool {
        self.base == other.base && (0..k).all(|r| self.digit(r) == other.digit(r))
    }

    /// Exact rational value of a periodic stream.
    pub fn to_rational(&self) -> Option<BigRational> {
        let (pre, per) = self.periodic_parts()?;
        let b = BigInt::from(self.base);
        let value = |ds: &[Digit]| BigInt::from(digits_value(ds, self.base));
        let head = BigRational::from_integer(value(pre));
        let shift = num_traits::pow(b.clone(), pre.len());
        let cycle = num_traits::pow(b.clone(), per.len());
        let tail = BigRational::new(value(per) * shift, BigInt::one() - cycle);
        Some(head + tail)
    }

    /// Additive inverse, digit by digit:
    /// `-n = (b - a_r) b^r + Σ_{i>r} (b - 1 - a_i) b^i` with `r` the first nonzero digit.
    pub fn negate(&self) -> BAdicStream {
        let b = self.base;
        match &self.repr {
            Repr::Periodic { preperiod, period } => {
                let horizon = preperiod.len() + period.len();
                let Some(first) = (0..horizon).find(|&r| self.digit(r) != 0) else {
                    return BAdicStream::zero(b);
                };
                let head: Vec<Digit> = (0..horizon)
                    .map(|i| {
                        let a = self.digit(i);
                        match i.cmp(&first) {
                            std::cmp::Ordering::Less => 0,
                            std::cmp::Ordering::Equal => b - a,
                            std::cmp::Ordering::Greater => b - 1 - a,
                        }
                    })
                    .collect();
                let tail = period.iter().map(|&a| b - 1 - a).collect();
                let (preperiod, period) = canonicalize(head, tail);
                BAdicStream { base: b, repr: Repr::Periodic { preperiod, period } }
            }
            Repr::Procedural(_) => {
                let src = self.clone();
                let mut seen_nonzero = false;
                BAdicStream::from_generator(b, move |r| {
                    let a = src.digit(r);
                    if seen_nonzero {
                        b - 1 - a
                    } else if a != 0 {
                        seen_nonzero = true;
                        b - a
                    } else {
                        0
                    }
                })
            }
        }
    }

    /// Carry-propagating sum.
    pub fn add(&self, other: &BAdicStream) -> Result<BAdicStream> {
        if self.base != other.base {
            return Err(Error::BaseMismatch(self.base, other.base));
        }
        let b = self.base as u64;
        let step = move |x: Digit, y: Digit, carry: u64| {
            let t = x as u64 + y as u64 + carry;
            ((t % b) as Digit, t / b)
        };
        match (&self.repr, &other.repr) {
            (Repr::Periodic { preperiod: p1, period: c1 }, Repr::Periodic { preperiod: p2, period: c2 }) => {
                let settle = p1.len().max(p2.len());
                let phase = |r: usize| ((r - p1.len()) % c1.len(), (r - p2.len()) % c2.len());
                Ok(self
                    .run_periodic_machine(settle, 0u64, phase, |r, carry| step(self.digit(r), other.digit(r), carry)))
            }
            _ => {
                let (x, y) = (self.clone(), other.clone());
                let mut carry = 0;
                Ok(BAdicStream::from_generator(self.base, move |r| {
                    let (d, c) = step(x.digit(r), y.digit(r), carry);
                    carry = c;
                    d
                }))
            }
        }
    }

    pub fn sub(&self, other: &BAdicStream) -> Result<BAdicStream> {
        self.add(&other.negate())
    }

    /// Multiplication by an ordinary integer.
    pub fn mul_small(&self, c: i64) -> BAdicStream {
        let b = self.base as i128;
        let step = move |x: Digit, carry: i128| {
            let t = x as i128 * c as i128 + carry;
            (t.rem_euclid(b) as Digit, t.div_euclid(b))
        };
        match &self.repr {
            Repr::Periodic { preperiod, period } => {
                let phase = |r: usize| (r - preperiod.len()) % period.len();
                self.run_periodic_machine(preperiod.len(), 0i128, phase, |r, carry| step(self.digit(r), carry))
            }
            Repr::Procedural(_) => {
                let x = self.clone();
                let mut carry = 0i128;
                BAdicStream::from_generator(self.base, move |r| {
                    let (d, nc) = step(x.digit(r), carry);
                    carry = nc;
                    d
                })
            }
        }
    }

    /// Runs a digit transducer over periodic inputs until its (phase, carry) state repeats.
    /// `step(r, carry) -> (digit, next carry)`; `phase(r)` is only queried for `r >= settle`.
    fn run_periodic_machine<C, P>(
        &self,
        settle: usize,
        init: C,
        phase: impl Fn(usize) -> P,
        mut step: impl FnMut(usize, C) -> (Digit, C),
    ) -> BAdicStream
    where
        C: Copy + Eq + std::hash::Hash,
        P: Eq + std::hash::Hash,
    {
        let mut out = Vec::new();
        let mut seen: HashMap<(P, C), usize> = HashMap::new();
        let mut carry = init;
        for r in 0.. {
            if r >= settle {
                let state = (phase(r), carry);
                if let Some(&start) = seen.get(&state) {
                    let period = out.split_off(start);
                    let (preperiod, period) = canonicalize(out, period);
                    return BAdicStream { base: self.base, repr: Repr::Periodic { preperiod, period } };
                }
                seen.insert(state, r);
            }
            let (d, next) = step(r, carry);
            out.push(d);
            carry = next;
        }
        unreachable!("state space is finite")
    }

    /// Units of Z_b are exactly the elements with `gcd(τ_1(a), b) = 1`.
    pub fn is_unit(&self) -> bool {
        gcd(self.digit(0) as u128, self.base as u128) == 1
    }

    /// Multiplicative inverse of a unit.
    pub fn unit_inverse(&self) -> Result<BAdicStream> {
        if !self.is_unit() {
            return Err(Error::NotAUnit(self.base));
        }
        if let Some(x) = self.to_rational() {
            return Self::from_ratio(&x.recip(), self.base);
        }
        // digit r of y solves τ_{r+1}(x)·(τ_r(y) + y_r b^r) ≡ 1 (mod b^{r+1})
        let b = BigUint::from(self.base);
        let a0_inv = mod_inverse(self.digit(0) as i128, self.base as i128).expect("unit") as u32;
        let x = self.clone();
        let mut y_trunc = BigUint::zero();
        let mut x_trunc = BigUint::zero();
        let mut scale = BigUint::one();
        Ok(BAdicStream::from_generator(self.base, move |r| {
            x_trunc += BigUint::from(x.digit(r)) * &scale;
            let next_scale = &scale * &b;
            let prod = (&x_trunc * &y_trunc) % &next_scale;
            let residual = (BigUint::one() + &next_scale - prod) % &next_scale;
            let top = (residual / &scale).to_u64().expect("digit-sized") as u128;
            let d = (top * a0_inv as u128 % x.base as u128) as Digit;
            y_trunc += BigUint::from(d) * &scale;
            scale = next_scale;
            d
        }))
    }
}

/// `|a|_b = b^κ` as an exact rational exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoValuation {
    pub exponent: Ratio<i64>,
    pub is_zero: bool,
}

impl PseudoValuation {
    /// Floating value of `|a|_b`, for display only.
    pub fn value(&self, base: u32) -> f64 {
        if self.is_zero {
            0.0
        } else {
            (base as f64).powf(*self.exponent.numer() as f64 / *self.exponent.denom() as f64)
        }
    }
}

impl fmt::Display for PseudoValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero {
            write!(f, "0")
        } else {
            write!(f, "b^({})", self.exponent)
        }
    }
}

/// Pseudo-valuation of the rational `u/v` in base `b`:
/// `κ = max over p | b of -(v_p(u) - v_p(v)) / β_p`, with `p^β_p` exactly dividing `b`.
pub fn pseudo_valuation(u: i64, v: u64, base: u32) -> PseudoValuation {
    assert!(v != 0, "denominator must be nonzero");
    if u == 0 {
        return PseudoValuation { exponent: Ratio::zero(), is_zero: true };
    }
    let exponent = factorize(base as u64)
        .into_iter()
        .map(|(p, beta)| {
            let alpha = valuation(u.unsigned_abs() as u128, p as u128) as i64 - valuation(v as u128, p as u128) as i64;
            Ratio::new(-alpha, beta as i64)
        })
        .max()
        .expect("b >= 2 has a prime factor");
    PseudoValuation { exponent, is_zero: false }
}

/// Checks the block structure of negated integers: over
/// `M = {-n : k b^l < n <= (k+1) b^l}` all digits from index `l` on agree,
/// and the first `l` digits run through `b^l` distinct vectors.
pub fn negative_block_check(k: u64, l: u32, base: u32) -> bool {
    let block = (base as u64).pow(l);
    let top = (k + 1) * block;
    let top_len = BAdicStream::integer_digits(top, base).periodic_parts().map_or(0, |(p, _)| p.len());
    let horizon = l as usize + top_len + 2;
    let mut tail: Option<Vec<Digit>> = None;
    let mut heads = std::collections::HashSet::new();
    for n in k * block + 1..=top {
        let neg = BAdicStream::integer_digits(n, base).negate();
        let digits = neg.digits(horizon);
        let (head, rest) = digits.split_at(l as usize);
        match &tail {
            None => tail = Some(rest.to_vec()),
            Some(t) if t.as_slice() != rest => return false,
            _ => {}
        }
        heads.insert(head.to_vec());
    }
    heads.len() as u64 == block
}

/// `num / den` as a rational with `den > 0`, handy for tests and parsers.
pub fn ratio(num: i64, den: i64) -> BigRational {
    let r = BigRational::new(BigInt::from(num), BigInt::from(den));
    if r.denom().is_negative() {
        -r
    } else {
        r
    }
}
