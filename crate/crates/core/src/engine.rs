//! The digital construction: index `n` -> point `x_n` as a matrix of output digits.
//!
//! With `a_r` the b-adic digits of `s_n` (least significant first), output digit `j`
//! of coordinate `i` is `λ_{i,j}(Σ_r c^{(i)}_{j,r} ψ_r(a_r))`. Here `b = q` and digits
//! are identified with field elements by index. Output digits are stored most
//! significant first, so `digits[i][0]` is the coefficient of `b^{-1}`.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FqElem;
use crate::genmatrix::MatrixSet;
use crate::inputseq::IndexSequence;

/// Per-column bijections `ψ_r: Z_b -> F_q` and per-digit bijections `λ_{i,j}: F_q -> Z_b`,
/// stored as permutation tables. Missing tables are the identity on indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BijectionFamily {
    pub q: u32,
    #[serde(default)]
    pub psi: Vec<Vec<u32>>,
    /// `lambda[i - 1][j - 1]`
    #[serde(default)]
    pub lambda: Vec<Vec<Vec<u32>>>,
}

fn check_permutation(table: &[u32], q: u32, what: &str) -> Result<()> {
    let mut seen = vec![false; q as usize];
    if table.len() != q as usize {
        return Err(Error::Bijection(format!("{what} has {} entries, expected {q}", table.len())));
    }
    for &v in table {
        if v >= q || std::mem::replace(&mut seen[v as usize], true) {
            return Err(Error::Bijection(format!("{what} is not a permutation of 0..{q}")));
        }
    }
    Ok(())
}

impl BijectionFamily {
    pub fn identity(q: u32) -> Self {
        BijectionFamily { q, psi: Vec::new(), lambda: Vec::new() }
    }

    pub fn new(q: u32, psi: Vec<Vec<u32>>, lambda: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        let family = BijectionFamily { q, psi, lambda };
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        for (r, t) in self.psi.iter().enumerate() {
            check_permutation(t, self.q, &format!("psi[{r}]"))?;
        }
        for (i, per_i) in self.lambda.iter().enumerate() {
            for (j, t) in per_i.iter().enumerate() {
                check_permutation(t, self.q, &format!("lambda[{}][{}]", i + 1, j + 1))?;
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let family: BijectionFamily = serde_json::from_str(text).map_err(|e| Error::Bijection(e.to_string()))?;
        family.validate()?;
        Ok(family)
    }

    pub fn is_identity(&self) -> bool {
        let id = |t: &Vec<u32>| t.iter().enumerate().all(|(k, &v)| v as usize == k);
        self.psi.iter().all(id) && self.lambda.iter().flatten().all(id)
    }

    #[inline]
    pub fn psi(&self, r: usize, digit: u32) -> FqElem {
        FqElem::from_index(self.psi.get(r).map_or(digit, |t| t[digit as usize]))
    }

    /// `i`, `j` 1-based.
    #[inline]
    pub fn lambda(&self, i: usize, j: usize, x: FqElem) -> u32 {
        self.lambda.get(i - 1).and_then(|per_i| per_i.get(j - 1)).map_or(x.index(), |t| t[x.index() as usize])
    }

    /// Smallest `R` with `ψ_r(0) = 0` for all `r >= R`.
    pub fn psi_zero_horizon(&self) -> usize {
        self.psi.iter().rposition(|t| t[0] != 0).map_or(0, |r| r + 1)
    }
}

/// The first `m` output digits of every coordinate of one point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitalPoint {
    pub base: u32,
    /// `digits[i][j]`: digit `j + 1` of coordinate `i + 1`, most significant first.
    pub digits: Vec<Vec<u32>>,
}

impl DigitalPoint {
    pub fn s(&self) -> usize {
        self.digits.len()
    }

    /// Precision m.
    pub fn m(&self) -> usize {
        self.digits.first().map_or(0, Vec::len)
    }

    /// `b^m [x^{(i)}]_{b,m}` for 1-based coordinate `i`, if it fits.
    pub fn numerator_u128(&self, i: usize) -> Option<u128> {
        let b = self.base as u128;
        self.digits[i - 1].iter().try_fold(0u128, |acc, &d| acc.checked_mul(b)?.checked_add(d as u128))
    }

    /// The first `d` digits of coordinate `i` (1-based) read as an integer.
    pub fn prefix(&self, i: usize, d: usize) -> u64 {
        let b = self.base as u64;
        self.digits[i - 1][..d].iter().fold(0, |acc, &x| acc * b + x as u64)
    }

    /// Keeps only the first `m` digits of each coordinate.
    pub fn truncated(&self, m: usize) -> DigitalPoint {
        DigitalPoint { base: self.base, digits: self.digits.iter().map(|d| d[..m].to_vec()).collect() }
    }
}

/// Exact value `Σ_j x_j b^{-j}` of coordinate `i` (1-based).
pub fn point_to_rational(p: &DigitalPoint, i: usize) -> BigRational {
    let b = BigInt::from(p.base);
    let numer = p.digits[i - 1].iter().fold(BigInt::from(0), |acc, &d| acc * &b + BigInt::from(d));
    BigRational::new(numer, num_traits::pow(b, p.m()))
}

/// Nearest double to coordinate `i` (1-based).
pub fn point_to_float(p: &DigitalPoint, i: usize) -> f64 {
    let denom = u32::try_from(p.m()).ok().and_then(|m| (p.base as u128).checked_pow(m));
    match (p.numerator_u128(i), denom) {
        // both integers are exact doubles, so the quotient is rounded once
        (Some(a), Some(d)) if d < (1u128 << 53) => a as f64 / d as f64,
        _ => point_to_rational(p, i).to_f64().expect("value lies in [0, 1]"),
    }
}

/// Per-run data shared by all points: the matrices, bijections and precision.
struct Plan<'a> {
    set: &'a MatrixSet,
    bij: &'a BijectionFamily,
    m: usize,
    /// `L_j^{(i)}` for `j <= m`
    lengths: Vec<Vec<usize>>,
    /// Digits of `s_n` needed: `max L_j^{(i)}`.
    width: usize,
}

impl<'a> Plan<'a> {
    fn new(set: &'a MatrixSet, bij: &'a BijectionFamily, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::OutOfRange("precision m must be at least 1".into()));
        }
        if m > set.depth() {
            return Err(Error::DepthExceeded { requested: m, available: set.depth() });
        }
        let q = set.field().order();
        if bij.q != q {
            return Err(Error::Bijection(format!("bijections are for q = {}, matrices for q = {q}", bij.q)));
        }
        let lengths: Vec<Vec<usize>> = set
            .matrices()
            .iter()
            .map(|c| (1..=m).map(|j| c.row_length(j)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let width = lengths.iter().flatten().copied().max().unwrap_or(0);
        Ok(Plan { set, bij, m, lengths, width })
    }

    /// Output digits from the already mapped column values `ψ_r(a_r)`.
    fn combine(&self, mapped: &[FqElem]) -> DigitalPoint {
        let field = self.set.field();
        let digits = self
            .set
            .matrices()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                (1..=self.m)
                    .map(|j| {
                        let row = &c.rows()[j - 1];
                        let mut acc = FqElem::ZERO;
                        for (r, &coef) in row.iter().enumerate().take(self.lengths[i][j - 1]) {
                            if !coef.is_zero() {
                                acc = field.add(acc, field.mul(coef, mapped[r]));
                            }
                        }
                        self.bij.lambda(i + 1, j, acc)
                    })
                    .collect()
            })
            .collect();
        DigitalPoint { base: field.order(), digits }
    }

    fn point(&self, seq: &IndexSequence, n: u64) -> Result<DigitalPoint> {
        let sn = seq.eval(n)?;
        let mapped: Vec<FqElem> = (0..self.width).map(|r| self.bij.psi(r, sn.digit(r))).collect();
        Ok(self.combine(&mapped))
    }
}

fn check_base(set: &MatrixSet, seq: &IndexSequence) -> Result<()> {
    let q = set.field().order();
    if seq.base() != q {
        return Err(Error::BaseMismatch(q, seq.base()));
    }
    Ok(())
}

/// Point `x_n` at precision `m`, reading exactly the `max L_j^{(i)}` digits of `s_n` it depends on.
pub fn generate_point(
    set: &MatrixSet,
    bij: &BijectionFamily,
    seq: &IndexSequence,
    n: u64,
    m: usize,
) -> Result<DigitalPoint> {
    check_base(set, seq)?;
    Plan::new(set, bij, m)?.point(seq, n)
}

/// Points `x_n` for `n_start <= n < n_start + count`, in index order.
pub fn generate_block(
    set: &MatrixSet,
    bij: &BijectionFamily,
    seq: &IndexSequence,
    n_start: u64,
    count: u64,
    m: usize,
) -> Result<Vec<DigitalPoint>> {
    check_base(set, seq)?;
    let plan = Plan::new(set, bij, m)?;
    let end = n_start.checked_add(count).ok_or(Error::Overflow("block index range"))?;
    (n_start..end).into_par_iter().map(|n| plan.point(seq, n)).collect()
}

/// Point `x_n` for the index sequence `s_n = n`, computed from the base-b expansion of `n`
/// directly: `ψ_r(a_r)` is summed over the digits of `n` and any column where `ψ_r(0) != 0`.
pub fn generate_point_natural(set: &MatrixSet, bij: &BijectionFamily, n: u64, m: usize) -> Result<DigitalPoint> {
    let plan = Plan::new(set, bij, m)?;
    let b = set.field().order() as u64;
    let mut digits = Vec::new();
    let mut rest = n;
    while rest > 0 {
        digits.push((rest % b) as u32);
        rest /= b;
    }
    let terms = digits.len().max(bij.psi_zero_horizon());
    let mapped: Vec<FqElem> = (0..plan.width)
        .map(|r| if r < terms { bij.psi(r, digits.get(r).copied().unwrap_or(0)) } else { FqElem::ZERO })
        .collect();
    Ok(plan.combine(&mapped))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportMode {
    /// `a/b^m` with the denominator left unreduced.
    Exact,
    Float,
}

/// CSV with header `n,x1,..,xs`, one row per point; `first_index` labels the first row.
pub fn write_points_csv<W: Write>(
    out: &mut W,
    points: &[DigitalPoint],
    first_index: u64,
    mode: ExportMode,
) -> Result<()> {
    let s = points.first().map_or(0, DigitalPoint::s);
    let header: Vec<String> = std::iter::once("n".to_string()).chain((1..=s).map(|i| format!("x{i}"))).collect();
    writeln!(out, "{}", header.join(","))?;
    for (k, p) in points.iter().enumerate() {
        let mut line = (first_index + k as u64).to_string();
        for i in 1..=p.s() {
            line.push(',');
            match mode {
                ExportMode::Exact => {
                    let r = point_to_rational(p, i);
                    let denom = num_traits::pow(BigInt::from(p.base), p.m());
                    let numer = r.numer() * (&denom / r.denom());
                    line.push_str(&format!("{numer}/{denom}"));
                }
                ExportMode::Float => line.push_str(&point_to_float(p, i).to_string()),
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct IndexedPoint<'a> {
    n: u64,
    digits: &'a [Vec<u32>],
}

/// JSON array of `{"n": .., "digits": [[..], ..]}` records.
pub fn points_to_json(points: &[DigitalPoint], first_index: u64) -> String {
    let records: Vec<IndexedPoint> =
        points.iter().enumerate().map(|(k, p)| IndexedPoint { n: first_index + k as u64, digits: &p.digits }).collect();
    serde_json::to_string(&records).expect("points always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::badic::ratio;
    use crate::field::FieldSpec;
    use crate::genmatrix::{identity_set, pairs_set};

    fn vdc(b: u32, depth: usize) -> MatrixSet {
        identity_set(FieldSpec::prime(b).unwrap(), 1, depth).unwrap()
    }

    #[test]
    fn van_der_corput_point() {
        let set = vdc(2, 4);
        let id = BijectionFamily::identity(2);
        let p = generate_point(&set, &id, &IndexSequence::natural(2), 3, 2).unwrap();
        assert_eq!(p.digits, vec![vec![1, 1]]);
        assert_eq!(point_to_rational(&p, 1), ratio(3, 4));
        let p = generate_point(&set, &id, &IndexSequence::negative_shifted(2), 0, 3).unwrap();
        assert_eq!(p.digits, vec![vec![1, 1, 1]]);
        assert_eq!(point_to_rational(&p, 1), ratio(7, 8));
    }

    #[test]
    fn pairs_point() {
        let set = pairs_set(2).unwrap();
        let p = generate_point(&set, &BijectionFamily::identity(2), &IndexSequence::natural(2), 3, 1).unwrap();
        assert_eq!(p.digits, vec![vec![0]]);
    }

    #[test]
    fn depth_guard() {
        let set = vdc(2, 4);
        let err = generate_point(&set, &BijectionFamily::identity(2), &IndexSequence::natural(2), 0, 5).unwrap_err();
        assert_eq!(err, Error::DepthExceeded { requested: 5, available: 4 });
        let err = generate_point(&set, &BijectionFamily::identity(2), &IndexSequence::natural(3), 0, 2).unwrap_err();
        assert_eq!(err, Error::BaseMismatch(2, 3));
    }

    #[test]
    fn blocks() {
        let set = vdc(2, 4);
        let id = BijectionFamily::identity(2);
        let block = generate_block(&set, &id, &IndexSequence::natural(2), 0, 4, 2).unwrap();
        let values: Vec<_> = block.iter().map(|p| point_to_rational(p, 1)).collect();
        assert_eq!(values, vec![ratio(0, 1), ratio(1, 2), ratio(1, 4), ratio(3, 4)]);
        let block = generate_block(&set, &id, &IndexSequence::natural(2), 2, 2, 2).unwrap();
        assert_eq!(block.iter().map(|p| p.digits[0].clone()).collect::<Vec<_>>(), vec![vec![0, 1], vec![1, 1]]);
        assert_eq!(generate_block(&set, &id, &IndexSequence::natural(2), 9, 1, 2).unwrap().len(), 1);
    }

    #[test]
    fn conversions() {
        let p = DigitalPoint { base: 5, digits: vec![vec![4, 4], vec![0, 0]] };
        assert_eq!(point_to_rational(&p, 1), ratio(24, 25));
        assert_eq!(point_to_rational(&p, 2), ratio(0, 1));
        assert_eq!(point_to_float(&p, 1), 0.96);
        let deep = DigitalPoint { base: 3, digits: vec![vec![2; 40]] };
        assert_eq!(point_to_float(&deep, 1), 1.0 - 3f64.powi(-40));
    }

    #[test]
    fn bijections_validated() {
        assert!(BijectionFamily::new(3, vec![vec![0, 2, 1]], vec![]).is_ok());
        assert!(matches!(BijectionFamily::new(3, vec![vec![0, 0, 1]], vec![]), Err(Error::Bijection(_))));
        assert!(matches!(BijectionFamily::from_json(r#"{"q":2,"psi":[[1]]}"#), Err(Error::Bijection(_))));
        let f = BijectionFamily::from_json(r#"{"q":3,"psi":[[1,0,2],[0,1,2],[2,1,0]]}"#).unwrap();
        assert_eq!(f.psi_zero_horizon(), 3);
        assert!(!f.is_identity());
    }

    #[test]
    fn bijections_applied() {
        // λ_{1,1} swaps 0 and 1 on the first digit of van der Corput
        let set = vdc(2, 3);
        let bij = BijectionFamily::new(2, vec![], vec![vec![vec![1, 0]]]).unwrap();
        let p = generate_point(&set, &bij, &IndexSequence::natural(2), 0, 2).unwrap();
        assert_eq!(p.digits, vec![vec![1, 0]]);
    }

    #[test]
    fn csv_export() {
        let points = vec![
            DigitalPoint { base: 2, digits: vec![vec![1, 1]] },
            DigitalPoint { base: 2, digits: vec![vec![0, 1]] },
        ];
        let mut out = Vec::new();
        write_points_csv(&mut out, &points, 3, ExportMode::Exact).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "n,x1\n3,3/4\n4,1/4\n");
        let mut out = Vec::new();
        write_points_csv(&mut out, &points, 0, ExportMode::Float).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "n,x1\n0,0.75\n1,0.25\n");
        assert_eq!(points_to_json(&points[..1], 7), r#"[{"n":7,"digits":[[1,1]]}]"#);
    }
}
