//! Finite-row generating matrices over GF(q).
//!
//! A matrix is stored as its rows `j = 1, 2, ..` (index `j - 1` in memory), each
//! row a dense coefficient vector over columns `r = 0, 1, ..` with trailing zeros
//! trimmed. Columns are never materialized beyond the last nonzero entry.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, FqElem};
use crate::quality;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratingMatrix {
    rows: Vec<Vec<FqElem>>,
}

impl GeneratingMatrix {
    /// Builds a matrix from explicit rows, trimming trailing zeros.
    pub fn from_rows(rows: Vec<Vec<FqElem>>) -> Self {
        let rows = rows
            .into_iter()
            .map(|mut row| {
                while row.last().is_some_and(|x| x.is_zero()) {
                    row.pop();
                }
                row
            })
            .collect();
        GeneratingMatrix { rows }
    }

    /// Number of materialized rows.
    pub fn depth(&self) -> usize {
        self.rows.len()
    }

    /// Row `j` (1-based).
    pub fn row(&self, j: usize) -> Result<&[FqElem]> {
        if j == 0 || j > self.rows.len() {
            return Err(Error::DepthExceeded { requested: j, available: self.rows.len() });
        }
        Ok(&self.rows[j - 1])
    }

    pub fn rows(&self) -> &[Vec<FqElem>] {
        &self.rows
    }

    /// `1 + max{r : c_{j,r} != 0}`, or 0 for a zero row.
    pub fn row_length(&self, j: usize) -> Result<usize> {
        self.row(j).map(<[FqElem]>::len)
    }

    /// Entry `c_{j,r}`; zero beyond the stored row.
    pub fn entry(&self, j: usize, r: usize) -> Result<FqElem> {
        Ok(self.row(j)?.get(r).copied().unwrap_or(FqElem::ZERO))
    }

    /// Longest of rows `1..=m`.
    pub fn max_row_length(&self, m: usize) -> Result<usize> {
        (1..=m).map(|j| self.row_length(j)).try_fold(0, |acc, l| Ok(acc.max(l?)))
    }
}

/// The `s` generating matrices of one construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixSet {
    field: FieldSpec,
    matrices: Vec<GeneratingMatrix>,
    convention: Option<String>,
}

impl MatrixSet {
    pub fn new(field: FieldSpec, matrices: Vec<GeneratingMatrix>, convention: Option<String>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::Schema("a matrix set needs s >= 1 matrices".into()));
        }
        let q = field.order();
        for m in &matrices {
            if let Some(bad) = m.rows.iter().flatten().find(|x| x.index() >= q) {
                return Err(Error::EntryOutOfRange { value: bad.index(), q });
            }
        }
        Ok(MatrixSet { field, matrices, convention })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    /// Dimension s.
    pub fn s(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[GeneratingMatrix] {
        &self.matrices
    }

    /// Matrix `C^{(i)}`, 1-based.
    pub fn matrix(&self, i: usize) -> &GeneratingMatrix {
        &self.matrices[i - 1]
    }

    pub fn convention(&self) -> Option<&str> {
        self.convention.as_deref()
    }

    /// Rows available in every matrix.
    pub fn depth(&self) -> usize {
        self.matrices.iter().map(GeneratingMatrix::depth).min().unwrap_or(0)
    }

    /// True iff `L_j^{(i)} <= s j` for all `i` and `j <= up_to_j`.
    pub fn has_optimal_row_lengths(&self, up_to_j: usize) -> Result<bool> {
        let s = self.s();
        for m in &self.matrices {
            for j in 1..=up_to_j {
                if m.row_length(j)? > s * j {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn to_file(&self) -> MatrixFile {
        MatrixFile {
            q: self.field.order(),
            p: self.field.p(),
            e: self.field.e(),
            s: self.s(),
            convention: self.convention.clone(),
            matrices: self
                .matrices
                .iter()
                .map(|m| m.rows.iter().map(|row| row.iter().map(|x| x.index()).collect()).collect())
                .collect(),
        }
    }

    pub fn from_file(file: MatrixFile) -> Result<Self> {
        let field = FieldSpec::new(file.p, file.e)?;
        if field.order() != file.q {
            return Err(Error::Schema(format!("q = {} but p^e = {}", file.q, field.order())));
        }
        if file.s != file.matrices.len() {
            return Err(Error::Schema(format!("s = {} but {} matrices given", file.s, file.matrices.len())));
        }
        let matrices = file
            .matrices
            .into_iter()
            .map(|rows| {
                let rows = rows
                    .into_iter()
                    .map(|row| {
                        row.into_iter()
                            .map(|v| {
                                if v < file.q {
                                    Ok(FqElem::from_index(v))
                                } else {
                                    Err(Error::EntryOutOfRange { value: v, q: file.q })
                                }
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(GeneratingMatrix::from_rows(rows))
            })
            .collect::<Result<Vec<_>>>()?;
        MatrixSet::new(field, matrices, file.convention)
    }

    /// Canonical JSON text (one line plus a trailing newline).
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string(&self.to_file()).expect("matrix files always serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        MatrixSet::from_file(file)
    }
}

/// On-disk matrix-set schema. Rows list column 0 first; entries are element indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub q: u32,
    pub p: u32,
    pub e: u32,
    pub s: usize,
    pub convention: Option<String>,
    pub matrices: Vec<Vec<Vec<u32>>>,
}

pub fn load_matrix_set(path: impl AsRef<Path>) -> Result<MatrixSet> {
    MatrixSet::from_json(&std::fs::read_to_string(path)?)
}

pub fn save_matrix_set(set: &MatrixSet, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, set.to_json())?;
    Ok(())
}

/// Row `j` is the unit vector at column `j - 1`.
pub fn identity_matrix(depth: usize) -> GeneratingMatrix {
    let rows = (0..depth)
        .map(|j| {
            let mut row = vec![FqElem::ZERO; j + 1];
            row[j] = FqElem::ONE;
            row
        })
        .collect();
    GeneratingMatrix { rows }
}

/// The GF(2) matrix with ones at columns `2j - 2` and `2j - 1` in row `j`.
pub fn pairs_matrix(depth: usize) -> GeneratingMatrix {
    let rows = (0..depth)
        .map(|j| {
            let mut row = vec![FqElem::ZERO; 2 * j + 2];
            row[2 * j] = FqElem::ONE;
            row[2 * j + 1] = FqElem::ONE;
            row
        })
        .collect();
    GeneratingMatrix { rows }
}

/// `s` identity matrices (for `s = 1`, the van der Corput construction).
pub fn identity_set(field: FieldSpec, s: usize, depth: usize) -> Result<MatrixSet> {
    MatrixSet::new(field, vec![identity_matrix(depth); s], Some("identity".into()))
}

pub fn pairs_set(depth: usize) -> Result<MatrixSet> {
    MatrixSet::new(FieldSpec::prime(2)?, vec![pairs_matrix(depth)], Some("pairs".into()))
}

/// Unsigned Stirling numbers of the first kind `c(n, k) mod p` for `n, k <= n_max`.
pub fn stirling_table(n_max: usize, p: u32) -> Vec<Vec<u32>> {
    let p = p as u64;
    let mut table = vec![vec![0u32; n_max + 1]; n_max + 1];
    table[0][0] = 1 % p as u32;
    for n in 1..=n_max {
        for k in 1..=n {
            let v = table[n - 1][k - 1] as u64 + (n as u64 - 1) % p * table[n - 1][k] as u64;
            table[n][k] = (v % p) as u32;
        }
    }
    table
}

/// Entry conventions for Stirling-number matrices, in the order the gate tries them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StirlingConvention {
    /// `c_{j,r} = c(r + 1, j)` for `r < s j`.
    Truncated,
    /// `c_{j,r} = c(j, j - r)`, lower triangular.
    Transposed,
    /// `c_{j,r} = c(r, j - 1) i^{r - j + 1}`, Faure-style scaling.
    PowerScaled,
    /// Row `j` of coordinate `i` holds the coefficients of `y^{j-1}` in
    /// `prod_{k<r} (y + k - (i - 1))`, i.e. the order-`(j-1)` Hasse derivative of the
    /// rising factorial at `-(i - 1)`. Coordinate 1 is exactly `c(r, j - 1)`.
    RisingFactorialHasse,
}

impl StirlingConvention {
    pub const ALL: [StirlingConvention; 4] = [
        StirlingConvention::Truncated,
        StirlingConvention::Transposed,
        StirlingConvention::PowerScaled,
        StirlingConvention::RisingFactorialHasse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StirlingConvention::Truncated => "stirling-truncated",
            StirlingConvention::Transposed => "stirling-transposed",
            StirlingConvention::PowerScaled => "stirling-power-scaled",
            StirlingConvention::RisingFactorialHasse => "stirling-rising-factorial-hasse",
        }
    }

    /// Matrix `C^{(i)}` of an `s`-dimensional set over GF(p).
    pub fn matrix(self, p: u32, s: usize, i: usize, depth: usize) -> GeneratingMatrix {
        let pp = p as u64;
        let rows = match self {
            StirlingConvention::Truncated => {
                let table = stirling_table(s * depth + 1, p);
                (1..=depth).map(|j| (0..s * j).map(|r| table[r + 1][j]).collect()).collect::<Vec<Vec<u32>>>()
            }
            StirlingConvention::Transposed => {
                let table = stirling_table(depth, p);
                (1..=depth).map(|j| (0..j).map(|r| table[j][j - r]).collect()).collect()
            }
            StirlingConvention::PowerScaled => {
                // c(r, j - 1) vanishes mod p once r >= p j
                let width = p as usize * depth;
                let table = stirling_table(width, p);
                (1..=depth)
                    .map(|j| {
                        (0..p as usize * j)
                            .map(|r| {
                                if r + 1 < j {
                                    return 0;
                                }
                                let scale = pow_mod(i as u64 % pp, (r + 1 - j) as u64, pp);
                                (table[r][j - 1] as u64 * scale % pp) as u32
                            })
                            .collect()
                    })
                    .collect()
            }
            StirlingConvention::RisingFactorialHasse => {
                // P_r(y) = prod_{k<r} (y + k - (i - 1)), kept to degree depth - 1;
                // (y^p - y) divides every p consecutive factors, so row j ends before r = p j.
                let width = p as usize * depth;
                let shift = (i as u64 - 1) % pp;
                let mut rows = vec![Vec::with_capacity(width); depth];
                let mut poly = vec![0u64; depth];
                poly[0] = 1 % pp;
                for r in 0..width {
                    for (j, row) in rows.iter_mut().enumerate() {
                        if r < p as usize * (j + 1) {
                            row.push(poly[j] as u32);
                        }
                    }
                    let c = (r as u64 % pp + pp - shift) % pp;
                    for d in (0..depth).rev() {
                        let lower = if d > 0 { poly[d - 1] } else { 0 };
                        poly[d] = (poly[d] * c + lower) % pp;
                    }
                }
                rows
            }
        };
        GeneratingMatrix::from_rows(
            rows.into_iter().map(|row| row.into_iter().map(FqElem::from_index).collect()).collect(),
        )
    }

    pub fn set(self, field: &FieldSpec, s: usize, depth: usize) -> Result<MatrixSet> {
        let matrices = (1..=s).map(|i| self.matrix(field.p(), s, i, depth)).collect();
        MatrixSet::new(field.clone(), matrices, Some(self.name().into()))
    }
}

fn pow_mod(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1 % modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

/// Depth up to which the Stirling gate verifies `T = 0`.
pub const STIRLING_SELF_CHECK_DEPTH: usize = 8;

/// Stirling matrix `C^{(i)}` of the convention selected by [`stirling_set`].
pub fn stirling_matrix(field: &FieldSpec, s: usize, i: usize, depth: usize) -> Result<GeneratingMatrix> {
    Ok(stirling_set(field, s, depth)?.matrix(i).clone())
}

/// The first Stirling convention whose `s` matrices pass `T(m) = 0` for all
/// `m <= min(depth, 8)`; refuses when none does.
pub fn stirling_set(field: &FieldSpec, s: usize, depth: usize) -> Result<MatrixSet> {
    if field.e() != 1 {
        return Err(Error::NotPrime(field.order() as u64));
    }
    if s == 0 || depth == 0 {
        return Err(Error::Schema("Stirling matrices need s >= 1 and depth >= 1".into()));
    }
    let check = depth.min(STIRLING_SELF_CHECK_DEPTH);
    let mut tried = Vec::new();
    for convention in StirlingConvention::ALL {
        let set = convention.set(field, s, depth)?;
        let profile = quality::t_profile(&set, check)?;
        if profile.values.iter().all(|&t| t == 0) {
            return Ok(set);
        }
        let m = profile.values.iter().position(|&t| t > 0).expect("some T(m) > 0");
        tried.push(format!("{} has T({m}) = {}", convention.name(), profile.values[m]));
    }
    Err(Error::ConventionRejected(format!("base {}, s = {s}: {}", field.p(), tried.join("; "))))
}

/// Built-in matrix sets by name: `identity`, `pairs`, `stirling`.
pub fn builtin_set(name: &str, field: &FieldSpec, s: usize, depth: usize) -> Result<MatrixSet> {
    match name {
        "identity" => identity_set(field.clone(), s, depth),
        "pairs" => {
            if field.order() != 2 || s != 1 {
                return Err(Error::Schema("the pairs matrix is defined for GF(2) and s = 1".into()));
            }
            pairs_set(depth)
        }
        "stirling" => stirling_set(field, s, depth),
        other => Err(Error::Schema(format!("unknown built-in matrix '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(row: &[FqElem]) -> Vec<u32> {
        row.iter().map(|x| x.index()).collect()
    }

    #[test]
    fn identity_rows() {
        let m = identity_matrix(5);
        assert_eq!(idx(m.row(1).unwrap()), vec![1]);
        assert_eq!(idx(m.row(2).unwrap()), vec![0, 1]);
        assert_eq!(idx(m.row(3).unwrap()), vec![0, 0, 1]);
        assert_eq!(m.row_length(5).unwrap(), 5);
        assert_eq!(m.row(6).unwrap_err(), Error::DepthExceeded { requested: 6, available: 5 });
        let set = identity_set(FieldSpec::prime(2).unwrap(), 1, 5).unwrap();
        assert!(set.has_optimal_row_lengths(5).unwrap());
    }

    #[test]
    fn pairs_rows() {
        let m = pairs_matrix(4);
        assert_eq!(idx(m.row(1).unwrap()), vec![1, 1]);
        assert_eq!(idx(m.row(3).unwrap()), vec![0, 0, 0, 0, 1, 1]);
        for j in 1..=4 {
            assert_eq!(m.row_length(j).unwrap(), 2 * j);
        }
        let set = pairs_set(4).unwrap();
        assert!(!set.has_optimal_row_lengths(4).unwrap());
    }

    #[test]
    fn stirling_numbers() {
        let t = stirling_table(6, 1000);
        assert_eq!(t[3][2], 3);
        assert_eq!(t[4][2], 11);
        assert_eq!(t[5][3], 35);
        assert_eq!(t[6][1], 120);
    }

    #[test]
    fn hasse_coordinate_one_is_stirling() {
        let table = stirling_table(60, 5);
        let m = StirlingConvention::RisingFactorialHasse.matrix(5, 2, 1, 10);
        for j in 1..=10 {
            for r in 0..60 {
                assert_eq!(m.entry(j, r).unwrap().index(), table[r][j - 1], "j={j} r={r}");
            }
        }
    }

    #[test]
    fn hasse_row_lengths() {
        for i in 1..=5 {
            let m = StirlingConvention::RisingFactorialHasse.matrix(5, 5, i, 12);
            for j in 1..=12 {
                assert_eq!(m.row_length(j).unwrap(), 5 * (j - 1) + i);
            }
        }
    }

    #[test]
    fn gate_picks_hasse_in_base_5() {
        let field = FieldSpec::prime(5).unwrap();
        let set = stirling_set(&field, 2, 10).unwrap();
        assert_eq!(set.convention(), Some("stirling-rising-factorial-hasse"));
        let full = stirling_set(&field, 5, 10).unwrap();
        assert!(full.has_optimal_row_lengths(10).unwrap());
        // a single row of Stirling numbers mod p is p(j - 1) + i long, so the pair exceeds 2j
        assert!(!set.has_optimal_row_lengths(10).unwrap());
    }

    #[test]
    fn gate_rejects_too_many_coordinates() {
        let field = FieldSpec::prime(3).unwrap();
        assert!(matches!(stirling_set(&field, 4, 6), Err(Error::ConventionRejected(_))));
        assert!(matches!(stirling_set(&FieldSpec::new(2, 2).unwrap(), 2, 4), Err(Error::NotPrime(4))));
    }

    #[test]
    fn json_round_trip() {
        let field = FieldSpec::prime(5).unwrap();
        for set in
            [identity_set(field.clone(), 1, 6).unwrap(), pairs_set(6).unwrap(), stirling_set(&field, 2, 6).unwrap()]
        {
            let text = set.to_json();
            let back = MatrixSet::from_json(&text).unwrap();
            assert_eq!(back, set);
            assert_eq!(back.to_json(), text);
        }
    }

    #[test]
    fn json_rejections() {
        let bad = r#"{"q":5,"p":5,"e":1,"s":1,"convention":null,"matrices":[[[1,7]]]}"#;
        assert_eq!(MatrixSet::from_json(bad).unwrap_err(), Error::EntryOutOfRange { value: 7, q: 5 });
        let bad = r#"{"q":4,"p":5,"e":1,"s":1,"convention":null,"matrices":[[[1]]]}"#;
        assert!(matches!(MatrixSet::from_json(bad), Err(Error::Schema(_))));
        assert!(matches!(MatrixSet::from_json("{\"q\":5}"), Err(Error::Schema(_))));
        let bad = r#"{"q":5,"p":5,"e":1,"s":2,"convention":null,"matrices":[[[1]]]}"#;
        assert!(matches!(MatrixSet::from_json(bad), Err(Error::Schema(_))));
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let m = GeneratingMatrix::from_rows(vec![vec![FqElem::ONE, FqElem::ZERO, FqElem::ZERO], vec![FqElem::ZERO]]);
        assert_eq!(m.row_length(1).unwrap(), 1);
        assert_eq!(m.row_length(2).unwrap(), 0);
    }
}
