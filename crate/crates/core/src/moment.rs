//! Moment matrices of solution sets, their kernels, and exact spectral
//! lower bounds on the smallest nonzero eigenvalue.

use num_traits::{One, Signed, Zero};

use crate::charpoly::charpoly_int;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::par::{self, Mode};
use crate::poly::{monomial_basis, Monomial, Polynomial};
use crate::ratio::{Int, Rat};
use crate::systems::{ConstraintSystem, SolutionKind, SolutionSet};

/// M_S(d): average of v(x) v(x)' over the solution set, where v lists all
/// monomials of degree at most d. `scale * mat` has integer entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    pub nvars: usize,
    pub degree: usize,
    pub basis: Vec<Monomial>,
    pub mat: Mat,
    pub scale: Int,
}

/// Charpoly-based sharp bounds are only attempted up to this dimension.
pub const SHARP_BOUND_DIM_CAP: usize = 200;

pub fn moment_matrix(sys: &ConstraintSystem, d: usize) -> Result<MomentMatrix> {
    moment_matrix_mode(Mode::Auto, sys, d)
}

#[doc(hidden)]
pub fn moment_matrix_seq(sys: &ConstraintSystem, d: usize) -> Result<MomentMatrix> {
    moment_matrix_mode(Mode::Seq, sys, d)
}

fn moment_matrix_mode(mode: Mode, sys: &ConstraintSystem, d: usize) -> Result<MomentMatrix> {
    match sys.solution_kind {
        SolutionKind::Enumerable => {
            let s = sys.enumerate_solutions()?;
            moment_matrix_of_points_mode(mode, &s, d)
        }
        SolutionKind::Sphere => Ok(sphere_moment_matrix(sys.nvars, d)),
    }
}

pub fn moment_matrix_of_points(s: &SolutionSet, d: usize) -> Result<MomentMatrix> {
    moment_matrix_of_points_mode(Mode::Auto, s, d)
}

fn moment_matrix_of_points_mode(mode: Mode, s: &SolutionSet, d: usize) -> Result<MomentMatrix> {
    if s.is_empty() {
        return Err(Error::EmptySolutionSet);
    }
    let basis = monomial_basis(s.nvars, d);
    let dim = basis.len();
    // On 0/1 points a monomial evaluates to 1 exactly when its support is
    // contained in the point's mask, so each entry is a containment count.
    let supports: Vec<u32> = basis
        .iter()
        .map(|m| {
            m.support()
                .into_iter()
                .fold(0u32, |acc, v| acc | (1 << v))
        })
        .collect();
    let entries = par::map_indexed(mode, dim * (dim + 1) / 2, |t| {
        let (i, j) = triangle_unrank(t);
        let need = supports[i] | supports[j];
        s.points.iter().filter(|&&p| p & need == need).count() as i64
    });
    let size = Int::from(s.len() as u64);
    let mut mat = Mat::zeros(dim, dim);
    for (t, &count) in entries.iter().enumerate() {
        let (i, j) = triangle_unrank(t);
        let v = Rat::new(Int::from(count), size.clone());
        mat.set(i, j, v.clone());
        if i != j {
            mat.set(j, i, v);
        }
    }
    Ok(MomentMatrix {
        nvars: s.nvars,
        degree: d,
        basis,
        mat,
        scale: size,
    })
}

/// Inverse of t = i(i+1)/2 + j for j <= i.
fn triangle_unrank(t: usize) -> (usize, usize) {
    let mut i = (((8 * t + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    while (i + 1) * (i + 2) / 2 <= t {
        i += 1;
    }
    (i, t - i * (i + 1) / 2)
}

/// Moment matrix of the uniform measure on the unit sphere, from the
/// closed-form moments. The scale Π_{j<d} (n + 2j) clears every entry to an
/// integer.
pub fn sphere_moment_matrix(n: usize, d: usize) -> MomentMatrix {
    let basis = monomial_basis(n, d);
    let dim = basis.len();
    let mat = Mat::from_fn(dim, dim, |i, j| {
        let prod = basis[i].mul(&basis[j]);
        sphere_moment(n, &prod.0)
    });
    let mut scale = Int::one();
    for j in 0..d {
        scale *= Int::from((n + 2 * j) as u64);
    }
    MomentMatrix {
        nvars: n,
        degree: d,
        basis,
        mat,
        scale,
    }
}

/// Exact expectation of a polynomial under the uniform sphere measure.
pub fn sphere_expectation(p: &Polynomial) -> Rat {
    p.terms()
        .map(|(m, c)| c * sphere_moment(p.nvars(), &m.0))
        .sum()
}

/// E[x^alpha] for the uniform measure on the unit sphere in n variables:
/// zero unless every exponent is even, otherwise
/// prod_i (alpha_i - 1)!! / prod_{j < t} (n + 2j) with 2t the total degree.
pub fn sphere_moment(n: usize, alpha: &[u32]) -> Rat {
    assert_eq!(alpha.len(), n, "exponent arity mismatch");
    if alpha.iter().any(|&a| a % 2 != 0) {
        return Rat::zero();
    }
    let t = alpha.iter().sum::<u32>() / 2;
    let mut num = Int::one();
    for &a in alpha {
        num *= odd_double_factorial(a);
    }
    let mut den = Int::one();
    for j in 0..t {
        den *= Int::from(n as u64 + 2 * j as u64);
    }
    Rat::new(num, den)
}

/// (a-1)!! for even a, with (-1)!! = 1.
fn odd_double_factorial(a: u32) -> Int {
    debug_assert!(a % 2 == 0);
    let mut out = Int::one();
    let mut k = 1u64;
    while k < a as u64 {
        out *= Int::from(k);
        k += 2;
    }
    out
}

/// Kernel vectors of the moment matrix read back as polynomials: exactly
/// the degree-at-most-d polynomials vanishing on the solution set.
pub fn kernel_polynomials(mm: &MomentMatrix) -> Vec<Polynomial> {
    mm.mat
        .kernel_basis()
        .into_iter()
        .map(|v| {
            let mut p = Polynomial::zero(mm.nvars);
            for (m, c) in mm.basis.iter().zip(v) {
                if !c.is_zero() {
                    p.add_term(m.clone(), c);
                }
            }
            p
        })
        .collect()
}

/// Any nonzero eigenvalue of a symmetric integer matrix with entries
/// bounded by b has absolute value at least (b n)^{-n}: the last nonzero
/// characteristic polynomial coefficient is a nonzero integer, and it is a
/// sum of products of the nonzero eigenvalues times others each at most
/// b n in absolute value.
pub fn integer_eig_lower_bound(b: &Int, n: usize) -> Result<Rat> {
    if !b.is_positive() || n == 0 {
        return Err(Error::Guard(format!(
            "eigenvalue bound needs b >= 1 and n >= 1, got b = {b}, n = {n}"
        )));
    }
    let base = Int::from(n as u64) * b;
    let mut pow = Int::one();
    for _ in 0..n {
        pow *= &base;
    }
    Ok(Rat::new(Int::one(), pow))
}

/// Two exact lower bounds on the least nonzero eigenvalue of the moment
/// matrix: the a priori bound from the integer scaling, and (for moderate
/// dimensions) the sharp ratio of the last two nonzero characteristic
/// polynomial coefficients. The moment matrix is PSD, which is what makes
/// the coefficient ratio a valid bound; the alternating-sign check below
/// rejects non-PSD input.
pub fn spectral_richness(mm: &MomentMatrix) -> Result<(Rat, Option<Rat>)> {
    let scaled = mm.mat.scale(&Rat::from_integer(mm.scale.clone()));
    let n = scaled.rows();
    let b = scaled.max_abs_entry();
    if !b.denom().is_one() {
        return Err(Error::Guard(
            "scale does not clear the moment matrix to integers".into(),
        ));
    }
    let b = b.numer().clone();
    if b.is_zero() {
        return Err(Error::Guard("zero moment matrix".into()));
    }
    let delta = integer_eig_lower_bound(&b, n)? / Rat::from_integer(mm.scale.clone());

    let sharp = if n <= SHARP_BOUND_DIM_CAP {
        let coeffs = charpoly_int(&scaled)?;
        let r = coeffs
            .iter()
            .rposition(|c| !c.is_zero())
            .expect("monic polynomial");
        for (k, c) in coeffs.iter().take(r + 1).enumerate() {
            let expected_positive = k % 2 == 0;
            if c.is_zero() || c.is_positive() != expected_positive {
                return Err(Error::Guard(
                    "moment matrix is not PSD: characteristic polynomial signs do not alternate"
                        .into(),
                ));
            }
        }
        if r == 0 {
            None
        } else {
            let ratio = Rat::new(coeffs[r].abs(), coeffs[r - 1].abs());
            Some(ratio / Rat::from_integer(mm.scale.clone()))
        }
    } else {
        None
    };
    Ok((delta, sharp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{irat, rat};
    use crate::systems;

    #[test]
    fn cube_moment_matrix() {
        let sys = systems::max_csp(1).unwrap();
        let mm = moment_matrix(&sys, 1).unwrap();
        assert_eq!(mm.basis.len(), 2);
        let expect = Mat::from_rows(vec![
            vec![irat(1), rat(1, 2)],
            vec![rat(1, 2), rat(1, 2)],
        ])
        .unwrap();
        assert_eq!(mm.mat, expect);
        assert_eq!(mm.scale, Int::from(2));
        assert!(kernel_polynomials(&mm).is_empty());
    }

    #[test]
    fn chain_moment_kernel() {
        let sys = systems::chain(2, &rat(1, 4)).unwrap();
        let mm = moment_matrix(&sys, 1).unwrap();
        // S = {origin}: only the constant monomial has nonzero moments.
        assert_eq!(mm.mat.at(0, 0), &irat(1));
        assert_eq!(mm.mat.at(1, 1), &irat(0));
        let kernel = kernel_polynomials(&mm);
        assert_eq!(kernel.len(), 2);
        assert_eq!(kernel[0], Polynomial::var(2, 0));
        assert_eq!(kernel[1], Polynomial::var(2, 1));
    }

    #[test]
    fn entries_match_averages() {
        let sys = systems::max_bisection(4).unwrap();
        let s = sys.enumerate_solutions().unwrap();
        let mm = moment_matrix(&sys, 2).unwrap();
        for (i, mi) in mm.basis.iter().enumerate() {
            for (j, mj) in mm.basis.iter().enumerate() {
                let p = Polynomial::from_monomial(4, mi.mul(mj), irat(1));
                assert_eq!(mm.mat.at(i, j), &s.average(&p).unwrap());
            }
        }
    }

    #[test]
    fn cube_spectral_bounds() {
        // 2-variable cube at degree 1: scaled matrix [[4,2,2],[2,2,1],[2,1,2]]
        // has characteristic polynomial x^3 - 8x^2 + 11x - 4, so the sharp
        // bound is (4/11)/4 and the a priori bound (4*3)^{-3}/4.
        let sys = systems::max_csp(2).unwrap();
        let mm = moment_matrix(&sys, 1).unwrap();
        let (delta, sharp) = spectral_richness(&mm).unwrap();
        assert_eq!(delta, rat(1, 6912));
        assert_eq!(sharp, Some(rat(1, 11)));
    }

    #[test]
    fn eig_bound_guards() {
        assert_eq!(
            integer_eig_lower_bound(&Int::from(4), 3).unwrap(),
            rat(1, 1728)
        );
        assert!(integer_eig_lower_bound(&Int::from(0), 3).is_err());
        assert!(integer_eig_lower_bound(&Int::from(2), 0).is_err());
    }

    #[test]
    fn non_psd_input_is_rejected() {
        let mm = MomentMatrix {
            nvars: 1,
            degree: 0,
            basis: monomial_basis(1, 0),
            mat: Mat::from_rows(vec![vec![irat(-1)]]).unwrap(),
            scale: Int::one(),
        };
        assert!(spectral_richness(&mm).is_err());
    }

    #[test]
    fn triangle_ranking() {
        let mut t = 0;
        for i in 0..40 {
            for j in 0..=i {
                assert_eq!(triangle_unrank(t), (i, j));
                t += 1;
            }
        }
    }

    #[test]
    fn seq_matches_auto() {
        let sys = systems::max_bisection(6).unwrap();
        assert_eq!(
            moment_matrix(&sys, 2).unwrap(),
            moment_matrix_seq(&sys, 2).unwrap()
        );
    }
}
