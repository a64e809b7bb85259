//! Exact rational matrices: PSD testing, kernel bases, multi-right-hand-side solving.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ratio::{parse_rat, rat_to_string, Int, Rat};

/// Dense matrix of exact rationals, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

/// Result of an exact positive-semidefiniteness test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PsdOutcome {
    Psd {
        rank: usize,
    },
    /// `witness` is a direction with strictly negative quadratic form.
    NotPsd {
        witness: Vec<Rat>,
    },
}

impl PsdOutcome {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdOutcome::Psd { .. })
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Mat {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn outer(u: &[Rat], v: &[Rat]) -> Self {
        Mat::from_fn(u.len(), v.len(), |i, j| &u[i] * &v[j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if self.at(i, j) != self.at(j, i) {
                    return false;
                }
            }
        }
        true
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn trace(&self) -> Rat {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self.at(i, i)).sum()
    }

    pub fn max_abs_entry(&self) -> Rat {
        self.data
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn scale(&self, s: &Rat) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Result<Mat> {
        self.shape_check(other)?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat> {
        self.shape_check(other)?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add_scaled(&mut self, other: &Mat, s: &Rat) -> Result<()> {
        self.shape_check(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
        Ok(())
    }

    fn shape_check(&self, other: &Mat) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.at(i, k);
                if aik.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = aik * other.at(k, j);
                    out.data[i * other.cols + j] += v;
                }
            }
        }
        Ok(out)
    }

    /// t' * self * t.
    pub fn congruence(&self, t: &Mat) -> Result<Mat> {
        t.transpose().matmul(&self.matmul(t)?)
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Result<Vec<Rat>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * vec {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j) * &v[j]).sum())
            .collect())
    }

    pub fn quadratic_form(&self, v: &[Rat]) -> Result<Rat> {
        let av = self.mul_vec(v)?;
        Ok(dot(v, &av))
    }

    pub fn frob_inner(&self, other: &Mat) -> Result<Rat> {
        self.shape_check(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Exact PSD test by LDL' elimination with max-diagonal symmetric pivoting.
    ///
    /// On failure the returned witness v satisfies v' * self * v < 0 exactly.
    pub fn psd_check(&self) -> Result<PsdOutcome> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "psd test on {}x{}",
                self.rows, self.cols
            )));
        }
        if !self.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let n = self.rows;
        let idx = |i: usize, j: usize| i * n + j;
        let mut a = self.data.clone();
        let mut l = vec![Rat::zero(); n * n];
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rank = 0usize;

        for k in 0..n {
            let best = (k..n)
                .max_by(|&i, &j| a[idx(i, i)].cmp(&a[idx(j, j)]))
                .unwrap();
            if best != k {
                for j in 0..n {
                    a.swap(idx(k, j), idx(best, j));
                }
                for i in 0..n {
                    a.swap(idx(i, k), idx(i, best));
                }
                for j in 0..k {
                    l.swap(idx(k, j), idx(best, j));
                }
                perm.swap(k, best);
            }
            let d = a[idx(k, k)].clone();
            if d.is_positive() {
                rank += 1;
                for i in (k + 1)..n {
                    l[idx(i, k)] = &a[idx(i, k)] / &d;
                }
                for i in (k + 1)..n {
                    for j in (k + 1)..=i {
                        let upd = &(&l[idx(i, k)] * &l[idx(j, k)]) * &d;
                        a[idx(i, j)] -= &upd;
                        if i != j {
                            a[idx(j, i)] -= &upd;
                        }
                    }
                }
            } else if d.is_negative() {
                let mut w = vec![Rat::zero(); n];
                w[k] = Rat::one();
                return Ok(PsdOutcome::NotPsd {
                    witness: self.lift_witness(w, k, &l, &perm),
                });
            } else {
                // Max diagonal of the remaining block is zero. PSD now requires the
                // whole block to vanish; otherwise a 2x2 principal minor goes negative.
                for i in k..n {
                    if a[idx(i, i)].is_negative() {
                        let mut w = vec![Rat::zero(); n];
                        w[i] = Rat::one();
                        return Ok(PsdOutcome::NotPsd {
                            witness: self.lift_witness(w, k, &l, &perm),
                        });
                    }
                }
                for i in k..n {
                    for j in (i + 1)..n {
                        if !a[idx(i, j)].is_zero() {
                            let mut w = vec![Rat::zero(); n];
                            w[i] = Rat::one();
                            w[j] = if a[idx(i, j)].is_positive() {
                                -Rat::one()
                            } else {
                                Rat::one()
                            };
                            return Ok(PsdOutcome::NotPsd {
                                witness: self.lift_witness(w, k, &l, &perm),
                            });
                        }
                    }
                }
                break;
            }
        }
        Ok(PsdOutcome::Psd { rank })
    }

    /// Extend a negative direction of the step-k Schur complement to the full
    /// matrix: solve L1' v1 = -L21' w over the eliminated coordinates, then
    /// undo the pivoting permutation.
    fn lift_witness(&self, mut w: Vec<Rat>, k: usize, l: &[Rat], perm: &[usize]) -> Vec<Rat> {
        let n = self.rows;
        let idx = |i: usize, j: usize| i * n + j;
        for j in (0..k).rev() {
            let mut s = Rat::zero();
            for i in (j + 1)..n {
                if !w[i].is_zero() && !l[idx(i, j)].is_zero() {
                    s += &l[idx(i, j)] * &w[i];
                }
            }
            w[j] = -s;
        }
        let mut out = vec![Rat::zero(); n];
        for i in 0..n {
            out[perm[i]] = w[i].clone();
        }
        out
    }

    /// Basis of the right kernel over the rationals.
    ///
    /// Vectors are primitive integer, first nonzero entry positive, one per
    /// free column in column order.
    pub fn kernel_basis(&self) -> Vec<Vec<Rat>> {
        let (rows, cols) = (self.rows, self.cols);
        // Clearing row denominators preserves the kernel and keeps the
        // fraction-free elimination on integers.
        let mut m: Vec<Vec<Int>> = (0..rows)
            .map(|i| {
                let mut lcm = Int::one();
                for j in 0..cols {
                    lcm = num_integer::lcm(lcm, self.at(i, j).denom().clone());
                }
                (0..cols)
                    .map(|j| {
                        let v = self.at(i, j) * Rat::from_integer(lcm.clone());
                        debug_assert!(v.denom().is_one());
                        v.to_integer()
                    })
                    .collect()
            })
            .collect();

        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut prev = Int::one();
        let mut r = 0usize;
        for c in 0..cols {
            if r >= rows {
                break;
            }
            let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
                continue;
            };
            m.swap(r, pr);
            for i in (r + 1)..rows {
                for j in (c + 1)..cols {
                    let num = &m[i][j] * &m[r][c] - &m[i][c] * &m[r][j];
                    let (q, rem) = num_integer::Integer::div_rem(&num, &prev);
                    debug_assert!(rem.is_zero(), "fraction-free elimination inexact");
                    m[i][j] = q;
                }
                m[i][c] = Int::zero();
            }
            prev = m[r][c].clone();
            pivots.push((r, c));
            r += 1;
        }

        let pivot_cols: BTreeSet<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for f in (0..cols).filter(|c| !pivot_cols.contains(c)) {
            let mut x = vec![Rat::zero(); cols];
            x[f] = Rat::one();
            for &(pr, pc) in pivots.iter().rev() {
                if pc > f {
                    continue;
                }
                let mut s = Rat::zero();
                for j in (pc + 1)..cols {
                    if !x[j].is_zero() && !m[pr][j].is_zero() {
                        s += Rat::from_integer(m[pr][j].clone()) * &x[j];
                    }
                }
                x[pc] = -s / Rat::from_integer(m[pr][pc].clone());
            }
            basis.push(primitive_integer(&x));
        }
        basis
    }
}

/// Scale a rational vector to a primitive integer vector whose first nonzero
/// entry is positive.
pub fn primitive_integer(x: &[Rat]) -> Vec<Rat> {
    let mut lcm = Int::one();
    for v in x {
        lcm = num_integer::lcm(lcm, v.denom().clone());
    }
    let ints: Vec<Int> = x
        .iter()
        .map(|v| (v * Rat::from_integer(lcm.clone())).to_integer())
        .collect();
    let mut gcd = Int::zero();
    for v in &ints {
        gcd = num_integer::gcd(gcd, v.clone());
    }
    if gcd.is_zero() {
        return vec![Rat::zero(); x.len()];
    }
    let sign = ints
        .iter()
        .find(|v| !v.is_zero())
        .map_or(Int::one(), |v| v.signum());
    ints.into_iter()
        .map(|v| Rat::from_integer(v / (&gcd * &sign)))
        .collect()
}

pub fn dot(u: &[Rat], v: &[Rat]) -> Rat {
    assert_eq!(u.len(), v.len(), "dot of unequal lengths");
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| rat_to_string(self.at(i, j)))
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for Mat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let grid: Vec<Vec<String>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| rat_to_string(self.at(i, j))).collect())
            .collect();
        grid.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let grid = Vec::<Vec<String>>::deserialize(deserializer)?;
        let rows = grid.len();
        let cols = grid.first().map_or(0, Vec::len);
        if grid.iter().any(|r| r.len() != cols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for row in &grid {
            for s in row {
                data.push(parse_rat(s).map_err(D::Error::custom)?);
            }
        }
        Ok(Mat { rows, cols, data })
    }
}

/// Incremental exact solver for A x = b with several right-hand sides sharing
/// one coefficient matrix. Rows arrive sparse; reduction keeps a reduced
/// echelon set with pivots restricted to the unknown columns. Solutions set
/// every free variable to zero, which keeps multiplier supports minimal.
pub struct MultiRhsSolver {
    ncols: usize,
    nrhs: usize,
    /// (pivot column, row). Rows are fully reduced against each other.
    reduced: Vec<(usize, SparseRow)>,
    /// Rows whose unknown part vanished; any surviving right-hand-side entry
    /// marks that right-hand side as inconsistent.
    constraints: Vec<SparseRow>,
}

type SparseRow = Vec<(usize, Rat)>;

fn row_find(row: &SparseRow, col: usize) -> Option<&Rat> {
    row.binary_search_by_key(&col, |e| e.0)
        .ok()
        .map(|i| &row[i].1)
}

/// row += c * other, dropping cancellations.
fn row_axpy(row: &SparseRow, c: &Rat, other: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(row.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < other.len() {
        if j >= other.len() || (i < row.len() && row[i].0 < other[j].0) {
            out.push(row[i].clone());
            i += 1;
        } else if i >= row.len() || other[j].0 < row[i].0 {
            out.push((other[j].0, c * &other[j].1));
            j += 1;
        } else {
            let v = &row[i].1 + c * &other[j].1;
            if !v.is_zero() {
                out.push((row[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl MultiRhsSolver {
    pub fn new(ncols: usize, nrhs: usize) -> Self {
        MultiRhsSolver {
            ncols,
            nrhs,
            reduced: Vec::new(),
            constraints: Vec::new(),
        }
    }

    /// Add one equation. `coeffs` indexes unknowns, `rhs` indexes right-hand
    /// sides; duplicates within a call are summed.
    pub fn add_row(&mut self, coeffs: &[(usize, Rat)], rhs: &[(usize, Rat)]) {
        let mut row: SparseRow = Vec::with_capacity(coeffs.len() + rhs.len());
        for &(c, ref v) in coeffs {
            assert!(c < self.ncols, "unknown column out of range");
            row.push((c, v.clone()));
        }
        for &(r, ref v) in rhs {
            assert!(r < self.nrhs, "rhs column out of range");
            row.push((self.ncols + r, v.clone()));
        }
        row.sort_by_key(|e| e.0);
        row.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += std::mem::take(&mut b.1);
                true
            } else {
                false
            }
        });
        row.retain(|e| !e.1.is_zero());

        for (pc, prow) in &self.reduced {
            if let Some(v) = row_find(&row, *pc) {
                let c = -v.clone();
                row = row_axpy(&row, &c, prow);
            }
        }
        let Some(&(pivot, ref pval)) = row.iter().find(|e| e.0 < self.ncols) else {
            if !row.is_empty() {
                self.constraints.push(row);
            }
            return;
        };
        let inv = Rat::one() / pval;
        let row: SparseRow = row.iter().map(|(c, v)| (*c, v * &inv)).collect();
        for (_, prow) in self.reduced.iter_mut() {
            if let Some(v) = row_find(prow, pivot) {
                let c = -v.clone();
                *prow = row_axpy(prow, &c, &row);
            }
        }
        self.reduced.push((pivot, row));
    }

    /// Rank of the coefficient rows seen so far.
    pub fn rank(&self) -> usize {
        self.reduced.len()
    }

    /// One solution per right-hand side, or None where the system is
    /// inconsistent. Free variables are zero.
    pub fn solve(&self) -> Vec<Option<Vec<Rat>>> {
        (0..self.nrhs)
            .map(|r| {
                let col = self.ncols + r;
                if self
                    .constraints
                    .iter()
                    .any(|row| row_find(row, col).is_some())
                {
                    return None;
                }
                let mut x = vec![Rat::zero(); self.ncols];
                for (pc, prow) in &self.reduced {
                    if let Some(v) = row_find(prow, col) {
                        x[*pc] = v.clone();
                    }
                }
                Some(x)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{irat, rat};

    fn m(rows: Vec<Vec<i64>>) -> Mat {
        Mat::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(irat).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn psd_examples() {
        assert_eq!(
            m(vec![vec![2, 1], vec![1, 2]]).psd_check().unwrap(),
            PsdOutcome::Psd { rank: 2 }
        );
        assert_eq!(
            m(vec![vec![1, 1], vec![1, 1]]).psd_check().unwrap(),
            PsdOutcome::Psd { rank: 1 }
        );
        assert_eq!(
            Mat::zeros(3, 3).psd_check().unwrap(),
            PsdOutcome::Psd { rank: 0 }
        );

        let a = m(vec![vec![1, 2], vec![2, 1]]);
        match a.psd_check().unwrap() {
            PsdOutcome::NotPsd { witness } => {
                assert!(a.quadratic_form(&witness).unwrap().is_negative());
            }
            other => panic!("expected NotPsd, got {other:?}"),
        }

        let a = m(vec![vec![0, 1], vec![1, 0]]);
        match a.psd_check().unwrap() {
            PsdOutcome::NotPsd { witness } => {
                assert!(a.quadratic_form(&witness).unwrap().is_negative());
            }
            other => panic!("expected NotPsd, got {other:?}"),
        }

        assert!(matches!(
            m(vec![vec![0, 1], vec![2, 0]]).psd_check(),
            Err(Error::NotSymmetric)
        ));
    }

    #[test]
    fn kernel_examples() {
        let k = m(vec![vec![1, 1], vec![1, 1]]).kernel_basis();
        assert_eq!(k, vec![vec![irat(1), irat(-1)]]);

        let k = m(vec![vec![1, 2, 3]]).kernel_basis();
        assert_eq!(k.len(), 2);
        assert_eq!(k[0], vec![irat(2), irat(-1), irat(0)]);
        assert_eq!(k[1], vec![irat(3), irat(0), irat(-1)]);

        assert!(m(vec![vec![1, 0], vec![0, 1]]).kernel_basis().is_empty());

        let k = Mat::zeros(2, 2).kernel_basis();
        assert_eq!(k.len(), 2);

        // Rational entries: kernel of [1/2, 1/3] is the line through (2, -3).
        let a = Mat::from_rows(vec![vec![rat(1, 2), rat(1, 3)]]).unwrap();
        assert_eq!(a.kernel_basis(), vec![vec![irat(2), irat(-3)]]);
    }

    #[test]
    fn congruence_and_inner() {
        let a = m(vec![vec![1, 0], vec![0, 2]]);
        let t = m(vec![vec![1, 1], vec![0, 1]]);
        // t' a t = [[1,1],[1,3]]
        assert_eq!(a.congruence(&t).unwrap(), m(vec![vec![1, 1], vec![1, 3]]));
        assert_eq!(
            a.frob_inner(&m(vec![vec![3, 9], vec![9, 4]])).unwrap(),
            irat(11)
        );
        assert_eq!(a.trace(), irat(3));
    }

    #[test]
    fn multi_rhs_solver() {
        // x + y = b0 ; y = b1, rhs (3, 1) and an inconsistent one.
        let mut s = MultiRhsSolver::new(2, 2);
        s.add_row(&[(0, irat(1)), (1, irat(1))], &[(0, irat(3)), (1, irat(1))]);
        s.add_row(&[(1, irat(1))], &[(0, irat(1))]);
        // 0 = 0 for rhs 0, 0 = 1 for rhs 1.
        s.add_row(
            &[(0, irat(1)), (1, irat(1))],
            &[(0, irat(3)), (1, irat(2))],
        );
        let sols = s.solve();
        assert_eq!(sols[0], Some(vec![irat(2), irat(1)]));
        assert_eq!(sols[1], None);
    }

    #[test]
    fn multi_rhs_free_vars_are_zero() {
        // Single equation x + y + z = 6: pivot on x, free y, z.
        let mut s = MultiRhsSolver::new(3, 1);
        s.add_row(
            &[(0, irat(1)), (1, irat(1)), (2, irat(1))],
            &[(0, irat(6))],
        );
        assert_eq!(s.solve()[0], Some(vec![irat(6), irat(0), irat(0)]));
    }

    #[test]
    fn serde_grid() {
        let a = Mat::from_rows(vec![
            vec![rat(1, 2), irat(-3)],
            vec![irat(0), rat(22, 7)],
        ])
        .unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"[["1/2","-3"],["0","22/7"]]"#);
        let b: Mat = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        assert!(serde_json::from_str::<Mat>(r#"[["1"],["1","2"]]"#).is_err());
        assert!(serde_json::from_str::<Mat>(r#"[["1/0"]]"#).is_err());
    }
}
