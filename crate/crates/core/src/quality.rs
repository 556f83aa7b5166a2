//! Rank conditions on generating matrices and exact (t,m,s)-net verification.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{generate_block, BijectionFamily, DigitalPoint};
use crate::error::{Error, Result};
use crate::field::{FieldSpec, FqElem};
use crate::genmatrix::MatrixSet;
use crate::inputseq::IndexSequence;

/// Rank over GF(q) of `rows`, each restricted (or zero-padded) to its first `cols` entries.
pub fn rank_gf(field: &FieldSpec, rows: &[&[FqElem]], cols: usize) -> usize {
    let mut a: Vec<Vec<FqElem>> =
        rows.iter().map(|row| (0..cols).map(|c| row.get(c).copied().unwrap_or(FqElem::ZERO)).collect()).collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(rank, pivot);
        let inv = field.inv(a[rank][col]).expect("pivot is nonzero");
        for c in col..cols {
            a[rank][c] = field.mul(a[rank][c], inv);
        }
        for r in 0..a.len() {
            if r != rank && !a[r][col].is_zero() {
                let f = a[r][col];
                for c in col..cols {
                    let t = field.mul(f, a[rank][c]);
                    a[r][c] = field.sub(a[r][c], t);
                }
            }
        }
        rank += 1;
        if rank == a.len() {
            break;
        }
    }
    rank
}

/// All `(d_1, .., d_s)` with `d_i >= 0` and `Σ d_i = k`, in lexicographic order.
pub fn compositions(k: u32, s: usize) -> Vec<Vec<u32>> {
    fn rec(k: u32, s: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if s == 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for d in 0..=k {
            prefix.push(d);
            rec(k - d, s - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if s > 0 {
        rec(k, s, &mut Vec::with_capacity(s), &mut out);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankCondition {
    pub holds: bool,
    /// First composition (lexicographically) whose stacked rows are dependent.
    pub witness: Option<Vec<u32>>,
}

/// Whether for every `Σ d_i = k` the first `d_i` rows of each `C^{(i)}`, cut to the first `m`
/// columns, are linearly independent. Smaller `k` follow since subfamilies of independent
/// families are independent.
pub fn check_rank_condition(set: &MatrixSet, m: usize, k: usize) -> Result<RankCondition> {
    if k > set.depth() {
        return Err(Error::DepthExceeded { requested: k, available: set.depth() });
    }
    let field = set.field();
    let witness = compositions(k as u32, set.s()).into_iter().find(|d| {
        let rows: Vec<&[FqElem]> = d
            .iter()
            .enumerate()
            .flat_map(|(i, &di)| set.matrices()[i].rows()[..di as usize].iter().map(Vec::as_slice))
            .collect();
        rank_gf(field, &rows, m) < k
    });
    Ok(RankCondition { holds: witness.is_none(), witness })
}

/// Quality function values `T(0..=m_max)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TProfile {
    #[serde(rename = "m")]
    pub m_max: usize,
    #[serde(rename = "T")]
    pub values: Vec<u32>,
    /// For each `m` with `T(m) > 0`, the dependent composition of size `m - T(m) + 1`.
    #[serde(rename = "witness")]
    pub witnesses: Vec<Option<Vec<u32>>>,
}

impl TProfile {
    /// Smallest constant `t` with `T(m) <= t` on the covered range.
    pub fn t(&self) -> u32 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    /// A profile `T(m) = min(t, m)` not derived from any matrices.
    pub fn constant(t: u32, m_max: usize) -> Self {
        TProfile { m_max, values: (0..=m_max as u32).map(|m| m.min(t)).collect(), witnesses: vec![None; m_max + 1] }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("profiles always serialize")
    }
}

/// `T(m) = m - max{k <= m : the rank condition holds for (m, k)}` for `m <= m_max`.
pub fn t_profile(set: &MatrixSet, m_max: usize) -> Result<TProfile> {
    if m_max > set.depth() {
        return Err(Error::DepthExceeded { requested: m_max, available: set.depth() });
    }
    let rows: Vec<(u32, Option<Vec<u32>>)> = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            for k in 1..=m {
                let c = check_rank_condition(set, m, k)?;
                if !c.holds {
                    return Ok(((m - (k - 1)) as u32, c.witness));
                }
            }
            Ok((0, None))
        })
        .collect::<Result<_>>()?;
    let (values, witnesses) = rows.into_iter().unzip();
    Ok(TProfile { m_max, values, witnesses })
}

/// Whether rows `1..=d_bounds[i]` of all matrices together are linearly independent.
pub fn check_full_rank_rows(set: &MatrixSet, d_bounds: &[usize]) -> Result<bool> {
    if d_bounds.len() != set.s() {
        return Err(Error::SizeMismatch { expected: set.s(), got: d_bounds.len() });
    }
    let mut rows: Vec<&[FqElem]> = Vec::new();
    for (c, &d) in set.matrices().iter().zip(d_bounds) {
        for j in 1..=d {
            rows.push(c.row(j)?);
        }
    }
    let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    Ok(rank_gf(set.field(), &rows, cols) == rows.len())
}

/// An elementary interval `Π [a_i b^{-d_i}, (a_i + 1) b^{-d_i})` with the wrong point count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NetFailure {
    pub d: Vec<u32>,
    pub a: Vec<u64>,
    pub count: u64,
    pub expected: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NetReport {
    pub t: u32,
    pub m: u32,
    pub s: usize,
    pub b: u32,
    /// Block index when the points are `x_n`, `k b^m <= n < (k + 1) b^m`.
    pub k: Option<u64>,
    pub pass: bool,
    /// `t = m`: the definition imposes no condition, nothing was counted.
    pub vacuous: bool,
    pub failure: Option<NetFailure>,
}

impl NetReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports always serialize")
    }
}

/// Largest point count the net check accepts.
pub const MAX_NET_POINTS: u64 = 1_000_000;

/// Exact check that every elementary interval of volume `b^{t-m}` holds `b^t` of the
/// points truncated to `m` digits. Intervals are enumerated by lexicographic `(d, a)`.
pub fn verify_net(points: &[DigitalPoint], t: u32, m: u32) -> Result<NetReport> {
    let first = points.first().ok_or(Error::SizeMismatch { expected: 1, got: 0 })?;
    let (b, s) = (first.base, first.s());
    if t > m {
        return Err(Error::InvalidT { t, m });
    }
    let expected_len = (b as u64)
        .checked_pow(m)
        .filter(|&n| n <= MAX_NET_POINTS)
        .ok_or_else(|| Error::TooLarge { what: format!("{b}^{m} points"), limit: MAX_NET_POINTS.to_string() })?;
    if points.len() as u64 != expected_len {
        return Err(Error::SizeMismatch { expected: expected_len as usize, got: points.len() });
    }
    if let Some(p) = points.iter().find(|p| p.base != b || p.s() != s || p.m() < m as usize) {
        if p.m() < m as usize {
            return Err(Error::DepthExceeded { requested: m as usize, available: p.m() });
        }
        return Err(Error::SizeMismatch { expected: s, got: p.s() });
    }
    let per_interval = (b as u64).pow(t);
    let cells = (b as u64).pow(m - t) as usize;
    let failures: Vec<Option<NetFailure>> = compositions(m - t, s)
        .into_par_iter()
        .map(|d| {
            let mut counts = vec![0u64; cells];
            for p in points {
                let key = d
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, &di)| acc * (b as u64).pow(di) + p.prefix(i + 1, di as usize));
                counts[key as usize] += 1;
            }
            counts.iter().position(|&c| c != per_interval).map(|key| {
                let mut rest = key as u64;
                let mut a = vec![0u64; s];
                for i in (0..s).rev() {
                    let w = (b as u64).pow(d[i]);
                    a[i] = rest % w;
                    rest /= w;
                }
                NetFailure { d: d.clone(), a, count: counts[key], expected: per_interval }
            })
        })
        .collect();
    let failure = failures.into_iter().flatten().next();
    Ok(NetReport { t, m, s, b, k: None, pass: failure.is_none(), vacuous: t == m, failure })
}

/// Smallest `t` for which the points form a `(t, m, s)`-net.
pub fn minimal_net_t(points: &[DigitalPoint], m: u32) -> Result<u32> {
    for t in 0..m {
        if verify_net(points, t, m)?.pass {
            return Ok(t);
        }
    }
    Ok(m)
}

/// Net checks of the blocks `k b^m <= n < (k + 1) b^m` at `t = T(m)`, with `T` from `profile`
/// or computed from the matrices. When `T(m) = m` the report is a vacuous pass.
pub fn verify_t_sequence(
    set: &MatrixSet,
    bij: &BijectionFamily,
    seq: &IndexSequence,
    m: u32,
    ks: impl IntoIterator<Item = u64>,
    profile: Option<&TProfile>,
) -> Result<Vec<NetReport>> {
    let computed;
    let profile = match profile {
        Some(p) => p,
        None => {
            computed = t_profile(set, m as usize)?;
            &computed
        }
    };
    let t = *profile.values.get(m as usize).ok_or(Error::ProfileTooShort { have: profile.m_max, need: m as usize })?;
    let b = set.field().order();
    let size = (b as u64).checked_pow(m).ok_or(Error::Overflow("block size b^m"))?;
    ks.into_iter()
        .map(|k| {
            if t >= m {
                return Ok(NetReport { t, m, s: set.s(), b, k: Some(k), pass: true, vacuous: true, failure: None });
            }
            let start = k.checked_mul(size).ok_or(Error::Overflow("block start k b^m"))?;
            let points = generate_block(set, bij, seq, start, size, m as usize)?;
            let mut report = verify_net(&points, t, m)?;
            report.k = Some(k);
            Ok(report)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmatrix::{identity_set, pairs_set, stirling_set, GeneratingMatrix};

    fn f2() -> FieldSpec {
        FieldSpec::prime(2).unwrap()
    }

    fn elems(v: &[u32]) -> Vec<FqElem> {
        v.iter().map(|&x| FqElem::from_index(x)).collect()
    }

    #[test]
    fn ranks() {
        let id: Vec<Vec<FqElem>> = vec![elems(&[1]), elems(&[0, 1]), elems(&[0, 0, 1])];
        let rows: Vec<&[FqElem]> = id.iter().map(Vec::as_slice).collect();
        assert_eq!(rank_gf(&f2(), &rows, 3), 3);
        let pairs = [elems(&[1, 1]), elems(&[0, 0, 1, 1])];
        let rows: Vec<&[FqElem]> = pairs.iter().map(Vec::as_slice).collect();
        assert_eq!(rank_gf(&f2(), &rows, 2), 1);
        let zero = [elems(&[0, 0]), elems(&[0])];
        let rows: Vec<&[FqElem]> = zero.iter().map(Vec::as_slice).collect();
        assert_eq!(rank_gf(&f2(), &rows, 2), 0);
        let f5 = FieldSpec::prime(5).unwrap();
        let dep = [elems(&[1, 2, 3]), elems(&[2, 4, 1])];
        let rows: Vec<&[FqElem]> = dep.iter().map(Vec::as_slice).collect();
        assert_eq!(rank_gf(&f5, &rows, 3), 1);
    }

    #[test]
    fn composition_order() {
        assert_eq!(compositions(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(compositions(3, 1), vec![vec![3]]);
        assert_eq!(compositions(4, 3).len(), 15);
    }

    #[test]
    fn rank_condition_examples() {
        let id = identity_set(f2(), 1, 8).unwrap();
        assert!(check_rank_condition(&id, 5, 5).unwrap().holds);
        let pairs = pairs_set(8).unwrap();
        assert_eq!(check_rank_condition(&pairs, 2, 2).unwrap(), RankCondition { holds: false, witness: Some(vec![2]) });
        assert!(check_rank_condition(&pairs, 2, 1).unwrap().holds);
    }

    #[test]
    fn profiles() {
        let id = identity_set(f2(), 1, 8).unwrap();
        assert_eq!(t_profile(&id, 8).unwrap().values, vec![0; 9]);
        let pairs = t_profile(&pairs_set(8).unwrap(), 8).unwrap();
        assert_eq!(pairs.values, (0..=8).map(|m| m / 2).collect::<Vec<u32>>());
        assert_eq!(pairs.t(), 4);
        let st = stirling_set(&FieldSpec::prime(5).unwrap(), 2, 6).unwrap();
        assert_eq!(t_profile(&st, 6).unwrap().values, vec![0; 7]);
        assert!(t_profile(&id, 9).is_err());
    }

    #[test]
    fn full_rank_rows_examples() {
        assert!(check_full_rank_rows(&identity_set(f2(), 1, 10).unwrap(), &[10]).unwrap());
        assert!(check_full_rank_rows(&pairs_set(10).unwrap(), &[10]).unwrap());
        let twice = identity_set(f2(), 2, 4).unwrap();
        assert!(!check_full_rank_rows(&twice, &[1, 1]).unwrap());
        assert!(check_full_rank_rows(&twice, &[3, 0]).unwrap());
    }

    fn vdc_points(n: u64, m: usize) -> Vec<DigitalPoint> {
        let set = identity_set(f2(), 1, m).unwrap();
        generate_block(&set, &BijectionFamily::identity(2), &IndexSequence::natural(2), 0, n, m).unwrap()
    }

    #[test]
    fn nets() {
        assert!(verify_net(&vdc_points(8, 3), 0, 3).unwrap().pass);
        let origin = vec![DigitalPoint { base: 2, digits: vec![vec![0, 0, 0]] }; 8];
        let r = verify_net(&origin, 0, 3).unwrap();
        assert!(!r.pass);
        assert_eq!(r.failure, Some(NetFailure { d: vec![3], a: vec![0], count: 8, expected: 1 }));
        let r = verify_net(&origin, 3, 3).unwrap();
        assert!(r.pass && r.vacuous);
        assert_eq!(verify_net(&vdc_points(4, 3), 0, 3).unwrap_err(), Error::SizeMismatch { expected: 8, got: 4 });
        assert_eq!(verify_net(&vdc_points(8, 3), 4, 3).unwrap_err(), Error::InvalidT { t: 4, m: 3 });
    }

    #[test]
    fn net_failure_in_second_coordinate() {
        // x = van der Corput, y = 0: the composition (0, 1) fails first at a = (0, 1)
        let points: Vec<DigitalPoint> = vdc_points(4, 2)
            .into_iter()
            .map(|p| DigitalPoint { base: 2, digits: vec![p.digits[0].clone(), vec![0, 0]] })
            .collect();
        let r = verify_net(&points, 0, 2).unwrap();
        assert_eq!(r.failure, Some(NetFailure { d: vec![0, 2], a: vec![0, 0], count: 4, expected: 1 }));
        assert_eq!(minimal_net_t(&points, 2).unwrap(), 2);
    }

    #[test]
    fn t_sequences() {
        let set = identity_set(f2(), 1, 6).unwrap();
        let id = BijectionFamily::identity(2);
        for seq in [
            IndexSequence::natural(2),
            IndexSequence::negative_shifted(2),
            IndexSequence::alternating(2).subsequence(2, 0),
        ] {
            let reports = verify_t_sequence(&set, &id, &seq, 4, 0..4, None).unwrap();
            assert!(reports.iter().all(|r| r.pass && !r.vacuous && r.t == 0), "{}", seq.spec());
        }
        let pairs = pairs_set(4).unwrap();
        let r = verify_t_sequence(&pairs, &id, &IndexSequence::natural(2), 1, [0], None).unwrap();
        assert!(r[0].pass);
        assert!(!r[0].vacuous);
        let flat = MatrixSet::new(f2(), vec![GeneratingMatrix::from_rows(vec![vec![]; 3])], None).unwrap();
        let r = verify_t_sequence(&flat, &id, &IndexSequence::natural(2), 2, [0, 1], None).unwrap();
        assert!(r.iter().all(|r| r.pass && r.vacuous && r.t == 2));
    }

    #[test]
    fn json_exports() {
        let p = t_profile(&pairs_set(3).unwrap(), 3).unwrap();
        assert_eq!(p.to_json(), r#"{"m":3,"T":[0,0,1,1],"witness":[null,null,[2],[3]]}"#);
        let r = verify_net(&vdc_points(2, 1), 0, 1).unwrap();
        assert_eq!(r.to_json(), r#"{"t":0,"m":1,"s":1,"b":2,"k":null,"pass":true,"vacuous":false,"failure":null}"#);
    }
}
