//! Exact star discrepancy of small point sets and the net-based discrepancy bounds.
//!
//! `D*_N` is the supremum of `|A(J)/N - vol(J)|` over boxes `J` anchored at the origin.
//! It is attained in the limit at corners built from point coordinates and 1, using the
//! count of points strictly inside (open box) for the volume excess and the count of points
//! in the closed box for the point excess. All arithmetic is exact.

use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::badic::BAdicStream;
use crate::engine::{generate_block, point_to_rational, BijectionFamily};
use crate::error::{Error, Result};
use crate::genmatrix::MatrixSet;
use crate::inputseq::IndexSequence;
use crate::quality::TProfile;

/// Point limits for [`star_discrepancy_exact`]; the sweep costs about `N^s` operations.
pub const MAX_POINTS_2D: usize = 4096;
pub const MAX_POINTS_3D: usize = 256;

fn as_string<T: ToString, S: Serializer>(x: &T, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&x.to_string())
}

fn as_strings<T: ToString, S: Serializer>(xs: &[T], ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_seq(xs.iter().map(ToString::to_string))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscrepancyResult {
    pub n: usize,
    #[serde(serialize_with = "as_string")]
    pub value: BigRational,
    /// Corner of the extremal box.
    #[serde(serialize_with = "as_strings")]
    pub witness: Vec<BigRational>,
    /// Whether the extremum uses the closed box (point excess) rather than the open one.
    pub closed: bool,
}

impl DiscrepancyResult {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

/// Coordinates as integers over a common denominator.
struct Scaled<T> {
    denom: T,
    coords: Vec<Vec<T>>,
}

fn scale(points: &[Vec<BigRational>]) -> Result<Scaled<BigInt>> {
    let s = points.first().map_or(0, Vec::len);
    if points.is_empty() || s == 0 {
        return Err(Error::SizeMismatch { expected: 1, got: 0 });
    }
    let (zero, one) = (BigRational::zero(), BigRational::one());
    let mut denom = BigInt::one();
    for p in points {
        if p.len() != s {
            return Err(Error::SizeMismatch { expected: s, got: p.len() });
        }
        for x in p {
            if *x < zero || *x > one {
                return Err(Error::OutOfRange(x.to_string()));
            }
            denom = denom.lcm(x.denom());
        }
    }
    let coords = points.iter().map(|p| p.iter().map(|x| x.numer() * (&denom / x.denom())).collect()).collect();
    Ok(Scaled { denom, coords })
}

/// Runs `f` on an `i128` copy when `(N + 1) D^s` leaves headroom, otherwise on big integers.
fn with_kernel<R>(
    scaled: &Scaled<BigInt>,
    n: usize,
    f128: impl FnOnce(&Scaled<i128>) -> R,
    fbig: impl FnOnce(&Scaled<BigInt>) -> R,
) -> R {
    let s = scaled.coords[0].len();
    let worst = BigInt::from(n + 1) * num_traits::pow(scaled.denom.clone(), s);
    if worst.bits() < 120 {
        let small = Scaled {
            denom: scaled.denom.to_i128().expect("checked"),
            coords: scaled.coords.iter().map(|p| p.iter().map(|x| x.to_i128().expect("checked")).collect()).collect(),
        };
        f128(&small)
    } else {
        fbig(scaled)
    }
}

trait Exact: Clone + Ord + Num + From<u32> + Into<BigInt> + Send + Sync {}
impl<T: Clone + Ord + Num + From<u32> + Into<BigInt> + Send + Sync> Exact for T {}

struct Extremum<T> {
    /// Numerator over `N D^s`.
    numer: T,
    corner: Vec<T>,
    closed: bool,
}

fn finish<T: Exact>(n: usize, denom: &T, s: usize, e: Extremum<T>) -> DiscrepancyResult {
    let d: BigInt = denom.clone().into();
    let value = BigRational::new(e.numer.into(), BigInt::from(n) * num_traits::pow(d.clone(), s));
    let witness = e.corner.into_iter().map(|c| BigRational::new(c.into(), d.clone())).collect();
    DiscrepancyResult { n, value, witness, closed: e.closed }
}

/// Sorted-order formula `max_i max(x_(i) - (i-1)/N, i/N - x_(i))`.
fn sorted_1d<T: Exact>(xs: &[T], denom: &T) -> Extremum<T> {
    let mut sorted: Vec<T> = xs.to_vec();
    sorted.sort();
    let n = T::from(sorted.len() as u32);
    let mut best: Option<Extremum<T>> = None;
    for (i, x) in sorted.iter().enumerate() {
        let below = n.clone() * x.clone() - T::from(i as u32) * denom.clone();
        let above = T::from(i as u32 + 1) * denom.clone() - n.clone() * x.clone();
        for (numer, closed) in [(below, false), (above, true)] {
            if best.as_ref().map_or(true, |b| numer > b.numer) {
                best = Some(Extremum { numer, corner: vec![x.clone()], closed });
            }
        }
    }
    best.expect("at least one point")
}

/// Inclusive prefix sums over a row-major array with the given axis sizes.
fn prefix_sums(a: &mut [u32], sizes: &[usize]) {
    let mut stride = 1;
    for &size in sizes.iter().rev() {
        for idx in 0..a.len() {
            if (idx / stride) % size > 0 {
                a[idx] += a[idx - stride];
            }
        }
        stride *= size;
    }
}

/// Sweep over the first coordinate's grid with prefix-summed counts on the others.
fn corner_sweep<T: Exact>(coords: &[Vec<T>], denom: &T) -> Extremum<T> {
    let s = coords[0].len();
    let n = T::from(coords.len() as u32);
    let grids: Vec<Vec<T>> = (0..s)
        .map(|k| {
            let mut g: Vec<T> = coords.iter().map(|p| p[k].clone()).chain([denom.clone()]).collect();
            g.sort();
            g.dedup();
            g
        })
        .collect();
    let ranks: Vec<Vec<usize>> = coords
        .iter()
        .map(|p| (0..s).map(|k| grids[k].binary_search(&p[k]).expect("coordinate is on its grid")).collect())
        .collect();
    let sizes: Vec<usize> = grids[1..].iter().map(Vec::len).collect();
    let inner: usize = sizes.iter().product();
    // per inner flat index: the multi-index, its volume factor, and the flat index of (c - 1)
    let mut multi = vec![vec![0usize; s - 1]; inner];
    for (idx, c) in multi.iter_mut().enumerate() {
        let mut rest = idx;
        for k in (0..s - 1).rev() {
            c[k] = rest % sizes[k];
            rest /= sizes[k];
        }
    }
    let volume: Vec<T> = multi
        .iter()
        .map(|c| c.iter().enumerate().fold(T::one(), |acc, (k, &ck)| acc * grids[k + 1][ck].clone()))
        .collect();
    let shifted: Vec<Option<usize>> = multi
        .iter()
        .map(|c| c.iter().zip(&sizes).try_fold(0usize, |acc, (&ck, &size)| ck.checked_sub(1).map(|x| acc * size + x)))
        .collect();
    let flat = |c: &[usize]| c.iter().zip(&sizes).fold(0usize, |acc, (&ck, &size)| acc * size + ck);
    let mut by_first: Vec<Vec<usize>> = vec![Vec::new(); grids[0].len()];
    for r in &ranks {
        by_first[r[0]].push(flat(&r[1..]));
    }

    let d_s = (0..s).fold(T::one(), |acc, _| acc * denom.clone());
    let mut counts = vec![0u32; inner];
    let mut best: Option<Extremum<T>> = None;
    let corner_at = |c0: usize, idx: usize| -> Vec<T> {
        std::iter::once(grids[0][c0].clone())
            .chain(multi[idx].iter().enumerate().map(|(k, &ck)| grids[k + 1][ck].clone()))
            .collect()
    };
    for (c0, g0) in grids[0].iter().enumerate() {
        let mut open = counts.clone();
        prefix_sums(&mut open, &sizes);
        for &idx in &by_first[c0] {
            counts[idx] += 1;
        }
        let mut closed = counts.clone();
        prefix_sums(&mut closed, &sizes);
        // each inner corner's best candidate, reduced in index order so ties keep the first
        let local = (0..inner)
            .into_par_iter()
            .map(|idx| {
                let nv = n.clone() * g0.clone() * volume[idx].clone();
                let open_count = shifted[idx].map_or(0, |j| open[j]);
                let below = nv.clone() - T::from(open_count) * d_s.clone();
                let above = T::from(closed[idx]) * d_s.clone() - nv;
                if above > below {
                    (above, idx, true)
                } else {
                    (below, idx, false)
                }
            })
            .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
        if let Some((numer, idx, is_closed)) = local {
            if best.as_ref().map_or(true, |b| numer > b.numer) {
                best = Some(Extremum { numer, corner: corner_at(c0, idx), closed: is_closed });
            }
        }
    }
    best.expect("grid is nonempty")
}

/// Exact `D*_N` of one-dimensional points via the sorted-order formula.
pub fn star_discrepancy_1d(points: &[BigRational]) -> Result<DiscrepancyResult> {
    let wrapped: Vec<Vec<BigRational>> = points.iter().map(|x| vec![x.clone()]).collect();
    let scaled = scale(&wrapped)?;
    let n = points.len();
    Ok(with_kernel(
        &scaled,
        n,
        |k| {
            let xs: Vec<i128> = k.coords.iter().map(|p| p[0]).collect();
            finish(n, &k.denom, 1, sorted_1d(&xs, &k.denom))
        },
        |k| {
            let xs: Vec<BigInt> = k.coords.iter().map(|p| p[0].clone()).collect();
            finish(n, &k.denom, 1, sorted_1d(&xs, &k.denom))
        },
    ))
}

/// Exact `D*_N` for `s <= 3` by sweeping the critical corners.
pub fn star_discrepancy_exact(points: &[Vec<BigRational>]) -> Result<DiscrepancyResult> {
    let s = points.first().map_or(0, Vec::len);
    let n = points.len();
    let limit = match s {
        1 => usize::MAX,
        2 => MAX_POINTS_2D,
        3 => MAX_POINTS_3D,
        _ => {
            return Err(Error::TooLarge { what: format!("dimension s = {s}"), limit: "3".into() });
        }
    };
    if n > limit {
        return Err(Error::TooLarge { what: format!("{n} points in dimension {s}"), limit: limit.to_string() });
    }
    let scaled = scale(points)?;
    Ok(with_kernel(
        &scaled,
        n,
        |k| finish(n, &k.denom, s, corner_sweep(&k.coords, &k.denom)),
        |k| finish(n, &k.denom, s, corner_sweep(&k.coords, &k.denom)),
    ))
}

/// `D*_N` of each prefix `points[..N]`, `N` in `ns` (one-dimensional).
pub fn star_discrepancy_prefixes_1d(points: &[BigRational], ns: &[usize]) -> Result<Vec<DiscrepancyResult>> {
    let wrapped: Vec<Vec<BigRational>> = points.iter().map(|x| vec![x.clone()]).collect();
    let scaled = scale(&wrapped)?;
    if let Some(&bad) = ns.iter().find(|&&n| n == 0 || n > points.len()) {
        return Err(Error::SizeMismatch { expected: points.len(), got: bad });
    }
    Ok(with_kernel(
        &scaled,
        points.len(),
        |k| {
            let xs: Vec<i128> = k.coords.iter().map(|p| p[0]).collect();
            ns.par_iter().map(|&n| finish(n, &k.denom, 1, sorted_1d(&xs[..n], &k.denom))).collect()
        },
        |k| {
            let xs: Vec<BigInt> = k.coords.iter().map(|p| p[0].clone()).collect();
            ns.par_iter().map(|&n| finish(n, &k.denom, 1, sorted_1d(&xs[..n], &k.denom))).collect()
        },
    ))
}

/// `Δ_b(t, m, s) = b^t Σ_{i<s} C(s-1, i) C(m-t, i) floor(b/2)^i`, a bound on `b^m D*` of any
/// (t,m,s)-net in base `b > 2`.
pub fn delta_bound(b: u32, t: u32, m: u32, s: usize) -> Result<BigUint> {
    if b <= 2 {
        return Err(Error::UnsupportedBase(b));
    }
    if t > m {
        return Err(Error::InvalidT { t, m });
    }
    let half = BigUint::from(b / 2);
    let sum = (0..s as u32).fold(BigUint::zero(), |acc, i| {
        let c1 = num_integer::binomial(BigUint::from(s as u32 - 1), BigUint::from(i));
        let c2 =
            if i <= m - t { num_integer::binomial(BigUint::from(m - t), BigUint::from(i)) } else { BigUint::zero() };
        acc + c1 * c2 * num_traits::pow(half.clone(), i as usize)
    });
    Ok(num_traits::pow(BigUint::from(b), t as usize) * sum)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundTerm {
    /// `"head"` for `(q - a_0) Δ(T(0), 0, s)`, `"middle"` for `(q - 1 - a_j) Δ(T(j), j, s)`,
    /// `"tail"` for `b_j Δ(T(j), j, s)`.
    pub part: &'static str,
    pub j: u32,
    pub coefficient: u64,
    #[serde(serialize_with = "as_string")]
    pub delta: BigUint,
    #[serde(serialize_with = "as_string")]
    pub contribution: BigUint,
}

/// The composite bound on `N D*_N` of the sequence driven by `s_n = n + α`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundBreakdown {
    pub n: u64,
    pub q: u32,
    pub s: usize,
    /// `floor(log_q N)`
    pub r: u32,
    /// Digits `a_0..a_r` of α.
    pub alpha_digits: Vec<u32>,
    /// `N' = N - q^r + Σ_{j<r} a_j q^j`
    pub n_prime: u128,
    /// Base-q digits `b_0..b_r` of `N'`.
    pub n_prime_digits: Vec<u32>,
    pub terms: Vec<BoundTerm>,
    #[serde(serialize_with = "as_string")]
    pub total: BigUint,
}

impl BoundBreakdown {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("breakdowns always serialize")
    }
}

/// Evaluates the composite bound term by term; `T` must cover `0..=floor(log_q N)`.
pub fn composite_bound(alpha: &BAdicStream, profile: &TProfile, q: u32, s: usize, n: u64) -> Result<BoundBreakdown> {
    if alpha.base() != q {
        return Err(Error::BaseMismatch(q, alpha.base()));
    }
    if q <= 2 {
        return Err(Error::UnsupportedBase(q));
    }
    if n == 0 {
        return Err(Error::SizeMismatch { expected: 1, got: 0 });
    }
    let qq = q as u128;
    let (mut r, mut power) = (0u32, 1u128);
    while power * qq <= n as u128 {
        power *= qq;
        r += 1;
    }
    if profile.m_max < r as usize {
        return Err(Error::ProfileTooShort { have: profile.m_max, need: r as usize });
    }
    let alpha_digits: Vec<u32> = (0..=r as usize).map(|j| alpha.digit(j)).collect();
    let shift: u128 = (0..r as usize).map(|j| alpha_digits[j] as u128 * qq.pow(j as u32)).sum();
    let n_prime = n as u128 - power + shift;
    let mut n_prime_digits = Vec::with_capacity(r as usize + 1);
    let mut rest = n_prime;
    for _ in 0..=r {
        n_prime_digits.push((rest % qq) as u32);
        rest /= qq;
    }
    debug_assert_eq!(rest, 0, "N' < q^(r+1)");

    let delta = |j: u32| delta_bound(q, profile.values[j as usize], j, s);
    let mut terms = Vec::new();
    let mut push = |part, j: u32, coefficient: u64| -> Result<()> {
        let delta = delta(j)?;
        let contribution = &delta * coefficient;
        terms.push(BoundTerm { part, j, coefficient, delta, contribution });
        Ok(())
    };
    push("head", 0, (q - alpha_digits[0]) as u64)?;
    for j in 1..r {
        push("middle", j, (q - 1 - alpha_digits[j as usize]) as u64)?;
    }
    for j in 0..=r {
        push("tail", j, n_prime_digits[j as usize] as u64)?;
    }
    let total = terms.iter().map(|t| &t.contribution).sum();
    Ok(BoundBreakdown { n, q, s, r, alpha_digits, n_prime, n_prime_digits, terms, total })
}

/// One row of an empirical-versus-bound table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundRow {
    pub n: u64,
    /// `N D*_N` of the points truncated to the working precision `M`.
    #[serde(serialize_with = "as_string")]
    pub nd_star: BigRational,
    /// `N s q^{-M}`: truncation moves each coordinate by less than `q^{-M}`,
    /// which changes `N D*_N` by at most this much.
    #[serde(serialize_with = "as_string")]
    pub margin: BigRational,
    #[serde(serialize_with = "as_string")]
    pub bound: BigUint,
    pub holds: bool,
}

impl BoundRow {
    /// `N D*_N / log N` (natural log), for `N >= 2`.
    pub fn log_ratio(&self) -> f64 {
        self.nd_star.to_f64().unwrap_or(f64::NAN) / (self.n as f64).ln()
    }
}

fn prefix_nd_star(points: &[Vec<BigRational>], ns: &[u64]) -> Result<Vec<BigRational>> {
    let s = points.first().map_or(0, Vec::len);
    let sizes: Vec<usize> = ns.iter().map(|&n| n as usize).collect();
    let results = if s == 1 {
        let xs: Vec<BigRational> = points.iter().map(|p| p[0].clone()).collect();
        star_discrepancy_prefixes_1d(&xs, &sizes)?
    } else {
        sizes.iter().map(|&n| star_discrepancy_exact(&points[..n])).collect::<Result<_>>()?
    };
    Ok(results.into_iter().map(|r| r.value * BigRational::from_integer(BigInt::from(r.n))).collect())
}

fn exact_points(
    set: &MatrixSet,
    bij: &BijectionFamily,
    seq: &IndexSequence,
    count: u64,
    precision: usize,
) -> Result<Vec<Vec<BigRational>>> {
    let block = generate_block(set, bij, seq, 0, count, precision)?;
    Ok(block.iter().map(|p| (1..=p.s()).map(|i| point_to_rational(p, i)).collect()).collect())
}

fn margin(n: u64, s: usize, q: u32, precision: usize) -> BigRational {
    BigRational::new(BigInt::from(n) * BigInt::from(s), num_traits::pow(BigInt::from(q), precision))
}

/// For `s_n = n + α`: exact `N D*_N` of the first `N` points (at precision `M`) next to the
/// composite bound, for each `N` in `ns`. A row holds when `N D*_N + margin <= bound`.
pub fn empirical_vs_bound(
    set: &MatrixSet,
    bij: &BijectionFamily,
    alpha: &BAdicStream,
    profile: &TProfile,
    ns: &[u64],
    precision: usize,
) -> Result<Vec<BoundRow>> {
    let q = set.field().order();
    let s = set.s();
    let seq = IndexSequence::affine(BAdicStream::from_int(1, q), alpha.clone())?;
    let max_n = ns.iter().copied().max().unwrap_or(0);
    let points = exact_points(set, bij, &seq, max_n, precision)?;
    let nd = prefix_nd_star(&points, ns)?;
    ns.iter()
        .zip(nd)
        .map(|(&n, nd_star)| {
            let bound = composite_bound(alpha, profile, q, s, n)?.total;
            let margin = margin(n, s, q, precision);
            let holds = &nd_star + &margin <= BigRational::from_integer(BigInt::from(bound.clone()));
            Ok(BoundRow { n, nd_star, margin, bound, holds })
        })
        .collect()
}

/// `s_n = n / v + α` split into the `v` subsequences `s_{vk+j} = k + (j / v + α)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitRow {
    pub n: u64,
    #[serde(serialize_with = "as_string")]
    pub nd_star: BigRational,
    #[serde(serialize_with = "as_string")]
    pub margin: BigRational,
    /// Subsequence `j`: its own table row at `N_j = ceil((N - j) / v)` points.
    pub parts: Vec<BoundRow>,
    /// Sum of the subsequence bounds, which also bounds `N D*_N` of the whole sequence.
    #[serde(serialize_with = "as_string")]
    pub bound: BigUint,
    pub holds: bool,
}

impl SplitRow {
    pub fn log_ratio(&self) -> f64 {
        self.nd_star.to_f64().unwrap_or(f64::NAN) / (self.n as f64).ln()
    }
}

pub fn split_vs_bound(
    set: &MatrixSet,
    bij: &BijectionFamily,
    v: u64,
    alpha: &BAdicStream,
    profile: &TProfile,
    ns: &[u64],
    precision: usize,
) -> Result<Vec<SplitRow>> {
    let q = set.field().order();
    let s = set.s();
    let seq = IndexSequence::rational_affine(v, alpha.clone())?;
    let max_n = ns.iter().copied().max().unwrap_or(0);
    let full = prefix_nd_star(&exact_points(set, bij, &seq, max_n, precision)?, ns)?;
    let mut parts_by_j = Vec::new();
    for j in 0..v {
        let alpha_j = BAdicStream::rational_digits(j as i64, v, q)?.add(alpha)?;
        let sizes: Vec<u64> = ns.iter().map(|&n| (n.saturating_sub(j)).div_ceil(v)).collect();
        let usable: Vec<u64> = sizes.iter().copied().filter(|&x| x > 0).collect();
        let mut rows = empirical_vs_bound(set, bij, &alpha_j, profile, &usable, precision)?.into_iter();
        let aligned: Vec<Option<BoundRow>> = sizes.iter().map(|&x| if x > 0 { rows.next() } else { None }).collect();
        parts_by_j.push(aligned);
    }
    ns.iter()
        .enumerate()
        .zip(full)
        .map(|((idx, &n), nd_star)| {
            let parts: Vec<BoundRow> = parts_by_j.iter().filter_map(|rows| rows[idx].clone()).collect();
            let bound: BigUint = parts.iter().map(|p| &p.bound).sum();
            let margin = margin(n, s, q, precision);
            let holds = &nd_star + &margin <= BigRational::from_integer(BigInt::from(bound.clone()))
                && parts.iter().all(|p| p.holds);
            Ok(SplitRow { n, nd_star, margin, parts, bound, holds })
        })
        .collect()
}

/// CSV with columns `N,ND*_N,ND*_N_float,bound,ratio` (ratio = `N D*_N / bound`).
pub fn write_bound_table_csv<W: Write>(out: &mut W, rows: &[BoundRow]) -> Result<()> {
    writeln!(out, "N,ND*_N,ND*_N_float,bound,ratio")?;
    for r in rows {
        let nd = r.nd_star.to_f64().unwrap_or(f64::NAN);
        let bound = r.bound.to_f64().unwrap_or(f64::NAN);
        writeln!(out, "{},{},{},{},{}", r.n, r.nd_star, nd, r.bound, nd / bound)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::badic::ratio;
    use crate::field::FieldSpec;
    use crate::genmatrix::identity_set;
    use num_traits::Signed;

    fn pts1(v: &[(i64, i64)]) -> Vec<BigRational> {
        v.iter().map(|&(a, b)| ratio(a, b)).collect()
    }

    /// Brute force over every corner of the coordinate grid, open and closed counts by direct scan.
    fn oracle(points: &[Vec<BigRational>]) -> BigRational {
        let s = points[0].len();
        let n = BigRational::from_integer(BigInt::from(points.len()));
        let mut grids: Vec<Vec<BigRational>> =
            (0..s).map(|k| points.iter().map(|p| p[k].clone()).chain([ratio(1, 1)]).collect()).collect();
        for g in &mut grids {
            g.sort();
            g.dedup();
        }
        let mut best = BigRational::zero();
        let mut idx = vec![0usize; s];
        loop {
            let corner: Vec<&BigRational> = (0..s).map(|k| &grids[k][idx[k]]).collect();
            let vol = corner.iter().fold(ratio(1, 1), |acc, &c| acc * c);
            let open = points.iter().filter(|p| (0..s).all(|k| p[k] < *corner[k])).count();
            let closed = points.iter().filter(|p| (0..s).all(|k| p[k] <= *corner[k])).count();
            let a = &vol - BigRational::from_integer(BigInt::from(open)) / &n;
            let b = BigRational::from_integer(BigInt::from(closed)) / &n - &vol;
            best = best.max(a).max(b);
            let mut k = 0;
            while k < s {
                idx[k] += 1;
                if idx[k] < grids[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == s {
                return best;
            }
        }
    }

    #[test]
    fn one_dimensional_examples() {
        assert_eq!(star_discrepancy_1d(&pts1(&[(0, 1)])).unwrap().value, ratio(1, 1));
        let r = star_discrepancy_1d(&pts1(&[(0, 1), (1, 2), (1, 4), (3, 4)])).unwrap();
        assert_eq!(r.value, ratio(1, 4));
        assert_eq!(star_discrepancy_1d(&pts1(&[(1, 2)])).unwrap().value, ratio(1, 2));
        assert!(matches!(star_discrepancy_1d(&pts1(&[(3, 2)])), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn witness_reproduces_value() {
        let pts = pts1(&[(1, 3), (1, 3), (5, 6)]);
        let r = star_discrepancy_1d(&pts).unwrap();
        let corner = &r.witness[0];
        let count = pts.iter().filter(|x| if r.closed { *x <= corner } else { *x < corner }).count() as i64;
        let recount = (ratio(count, 3) - corner).abs();
        assert_eq!(recount, r.value);
    }

    #[test]
    fn multi_dimensional_examples() {
        let origin = vec![vec![ratio(0, 1), ratio(0, 1)]];
        assert_eq!(star_discrepancy_exact(&origin).unwrap().value, ratio(1, 1));
        let set = identity_set(FieldSpec::prime(2).unwrap(), 2, 4).unwrap();
        let block = generate_block(&set, &BijectionFamily::identity(2), &IndexSequence::natural(2), 0, 4, 2).unwrap();
        let points: Vec<Vec<BigRational>> =
            block.iter().map(|p| vec![point_to_rational(p, 1), point_to_rational(p, 2)]).collect();
        assert_eq!(star_discrepancy_exact(&points).unwrap().value, oracle(&points));
        let wide = vec![vec![ratio(0, 1); 4]];
        assert!(matches!(star_discrepancy_exact(&wide), Err(Error::TooLarge { .. })));
        let many = vec![vec![ratio(0, 1); 3]; MAX_POINTS_3D + 1];
        assert!(matches!(star_discrepancy_exact(&many), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn big_integer_kernel_agrees() {
        // denominators 3^40 in two dimensions force the big-integer path
        let d = num_traits::pow(BigInt::from(3), 40);
        let points: Vec<Vec<BigRational>> = (1..6)
            .map(|k| {
                vec![
                    BigRational::new(BigInt::from(k) * &d / 7, d.clone()),
                    BigRational::new(BigInt::from(k * k) * &d / 31, d.clone()),
                ]
            })
            .collect();
        assert_eq!(star_discrepancy_exact(&points).unwrap().value, oracle(&points));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_bound(3, 0, 2, 2).unwrap(), BigUint::from(3u32));
        assert_eq!(delta_bound(5, 0, 2, 2).unwrap(), BigUint::from(5u32));
        assert_eq!(delta_bound(7, 2, 5, 1).unwrap(), BigUint::from(49u32));
        assert_eq!(delta_bound(2, 0, 2, 2).unwrap_err(), Error::UnsupportedBase(2));
        assert_eq!(delta_bound(3, 3, 2, 2).unwrap_err(), Error::InvalidT { t: 3, m: 2 });
        // i beyond m - t contributes nothing
        assert_eq!(delta_bound(5, 1, 1, 3).unwrap(), BigUint::from(5u32));
    }

    #[test]
    fn composite_bound_examples() {
        let zero = BAdicStream::zero(3);
        let t0 = TProfile::constant(0, 10);
        let b = composite_bound(&zero, &t0, 3, 1, 9).unwrap();
        assert_eq!((b.r, b.n_prime), (2, 0));
        assert_eq!(b.total, BigUint::from(5u32));
        let b = composite_bound(&zero, &t0, 3, 1, 10).unwrap();
        assert_eq!((b.n_prime, b.total.clone()), (1, BigUint::from(6u32)));
        let two = BAdicStream::from_int(2, 3);
        let b = composite_bound(&two, &t0, 3, 1, 3).unwrap();
        assert_eq!(b.terms[0].contribution, BigUint::from(1u32));
        let sum: BigUint = b.terms.iter().map(|t| &t.contribution).sum();
        assert_eq!(sum, b.total);
        assert_eq!(
            composite_bound(&zero, &TProfile::constant(0, 1), 3, 1, 9).unwrap_err(),
            Error::ProfileTooShort { have: 1, need: 2 }
        );
    }

    #[test]
    fn van_der_corput_within_bound() {
        let set = identity_set(FieldSpec::prime(3).unwrap(), 1, 12).unwrap();
        let ns: Vec<u64> = (1..=81).collect();
        let rows = empirical_vs_bound(
            &set,
            &BijectionFamily::identity(3),
            &BAdicStream::zero(3),
            &TProfile::constant(0, 12),
            &ns,
            12,
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.holds));
        assert!(rows[8].nd_star <= ratio(5, 1));
        let mut out = Vec::new();
        write_bound_table_csv(&mut out, &rows[..1]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "N,ND*_N,ND*_N_float,bound,ratio\n1,1,1,3,0.3333333333333333\n");
    }
}
