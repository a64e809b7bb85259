//! Sum-of-squares certificates and their exact verification.
//!
//! A certificate claims r - theta = <C, vv'> + sum_i <D_i, vv'> q_i
//! + sum_j lambda_j p_j over a constraint system with equalities p_j = 0 and
//! inequalities q_i >= 0, where v is a shared vector of monomials and C and
//! every D_i are PSD. On the solution set this pins r >= theta.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Mat, PsdOutcome};
use crate::par::{self, Mode};
use crate::poly::{CoefficientStats, Monomial, Polynomial};
use crate::ratio::{rat_string, Rat};
use crate::systems::ConstraintSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoSCertificate {
    pub nvars: usize,
    /// Total degree budget d; every summand of the identity must stay
    /// within it, and Gram basis monomials within ceil(d/2).
    pub degree: usize,
    pub target: Polynomial,
    #[serde(with = "rat_string")]
    pub shift: Rat,
    pub gram_basis: Vec<Monomial>,
    pub gram_c: Mat,
    /// One PSD block per system inequality, pairing with q_i.
    pub gram_d: Vec<Mat>,
    /// One polynomial multiplier per system equality, pairing with p_j.
    pub equality_multipliers: Vec<Polynomial>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyOutcome {
    Pass,
    Fail {
        reason: String,
        /// Leftover of the identity when the expansion does not cancel.
        residue: Option<Polynomial>,
    },
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, VerifyOutcome::Pass)
    }
}

/// Expand <G, vv'> as a polynomial, exploiting symmetry of G.
pub fn gram_expansion(basis: &[Monomial], g: &Mat, nvars: usize) -> Polynomial {
    gram_expansion_mode(Mode::Auto, basis, g, nvars)
}

#[doc(hidden)]
pub fn gram_expansion_seq(basis: &[Monomial], g: &Mat, nvars: usize) -> Polynomial {
    gram_expansion_mode(Mode::Seq, basis, g, nvars)
}

fn gram_expansion_mode(mode: Mode, basis: &[Monomial], g: &Mat, nvars: usize) -> Polynomial {
    let dim = basis.len();
    let parts = par::map_indexed(mode, dim, |a| {
        let mut acc = Polynomial::zero(nvars);
        for b in a..dim {
            let coeff = if a == b {
                g.at(a, b).clone()
            } else {
                g.at(a, b) + g.at(b, a)
            };
            if !coeff.is_zero() {
                acc.add_term(basis[a].mul(&basis[b]), coeff);
            }
        }
        acc
    });
    let mut out = Polynomial::zero(nvars);
    for p in parts {
        out = &out + &p;
    }
    out
}

impl SoSCertificate {
    /// Structural checks that are errors rather than verification failures:
    /// mismatched arities and dimensions, malformed Gram data.
    fn structural_check(&self, sys: &ConstraintSystem) -> Result<()> {
        if self.nvars != sys.nvars {
            return Err(Error::NvarsMismatch(self.nvars, sys.nvars));
        }
        if self.target.nvars() != self.nvars {
            return Err(Error::NvarsMismatch(self.target.nvars(), self.nvars));
        }
        let dim = self.gram_basis.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch("empty Gram basis".into()));
        }
        for m in &self.gram_basis {
            if m.nvars() > self.nvars {
                return Err(Error::DimensionMismatch(format!(
                    "basis monomial {m} uses more than {} variables",
                    self.nvars
                )));
            }
        }
        for w in self.gram_basis.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::DimensionMismatch(
                    "Gram basis monomials must be strictly increasing".into(),
                ));
            }
        }
        if self.gram_c.rows() != dim || self.gram_c.cols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "Gram block C is {}x{}, basis has {dim} monomials",
                self.gram_c.rows(),
                self.gram_c.cols()
            )));
        }
        if !self.gram_c.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if self.gram_d.len() != sys.inequalities.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} inequality blocks for {} inequalities",
                self.gram_d.len(),
                sys.inequalities.len()
            )));
        }
        for d in &self.gram_d {
            if d.rows() != dim || d.cols() != dim {
                return Err(Error::DimensionMismatch(
                    "inequality Gram block does not match basis".into(),
                ));
            }
            if !d.is_symmetric() {
                return Err(Error::NotSymmetric);
            }
        }
        if self.equality_multipliers.len() != sys.equalities.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} multipliers for {} equalities",
                self.equality_multipliers.len(),
                sys.equalities.len()
            )));
        }
        for lam in &self.equality_multipliers {
            if lam.nvars() != self.nvars {
                return Err(Error::NvarsMismatch(lam.nvars(), self.nvars));
            }
        }
        Ok(())
    }

    pub fn verify(&self, sys: &ConstraintSystem) -> Result<VerifyOutcome> {
        self.verify_mode(Mode::Auto, sys)
    }

    #[doc(hidden)]
    pub fn verify_seq(&self, sys: &ConstraintSystem) -> Result<VerifyOutcome> {
        self.verify_mode(Mode::Seq, sys)
    }

    fn verify_mode(&self, mode: Mode, sys: &ConstraintSystem) -> Result<VerifyOutcome> {
        self.structural_check(sys)?;
        let fail = |reason: String| {
            Ok(VerifyOutcome::Fail {
                reason,
                residue: None,
            })
        };

        let half = self.degree.div_ceil(2);
        for m in &self.gram_basis {
            if m.degree() > half {
                return fail(format!(
                    "basis monomial {m} exceeds Gram degree {half}"
                ));
            }
        }

        if let PsdOutcome::NotPsd { .. } = self.gram_c.psd_check()? {
            return fail("Gram block C is not PSD".into());
        }
        for (i, d) in self.gram_d.iter().enumerate() {
            if let PsdOutcome::NotPsd { .. } = d.psd_check()? {
                return fail(format!("inequality Gram block {i} is not PSD"));
            }
        }

        let sos = gram_expansion_mode(mode, &self.gram_basis, &self.gram_c, self.nvars);
        if sos.degree().is_some_and(|d| d > self.degree) {
            return fail(format!(
                "<C, vv'> has degree {}, budget is {}",
                sos.degree().unwrap(),
                self.degree
            ));
        }
        let mut expansion = sos;
        for (i, (d, q)) in self.gram_d.iter().zip(&sys.inequalities).enumerate() {
            let part = &gram_expansion_mode(mode, &self.gram_basis, d, self.nvars) * q;
            if part.degree().is_some_and(|deg| deg > self.degree) {
                return fail(format!(
                    "inequality term {i} has degree {}, budget is {}",
                    part.degree().unwrap(),
                    self.degree
                ));
            }
            expansion = &expansion + &part;
        }
        for (j, (lam, p)) in self
            .equality_multipliers
            .iter()
            .zip(&sys.equalities)
            .enumerate()
        {
            let part = lam * p;
            if part.degree().is_some_and(|deg| deg > self.degree) {
                return fail(format!(
                    "equality term {j} has degree {}, budget is {}",
                    part.degree().unwrap(),
                    self.degree
                ));
            }
            expansion = &expansion + &part;
        }

        let lhs = &self.target - &Polynomial::constant(self.nvars, self.shift.clone());
        let residue = &lhs - &expansion;
        if residue.is_zero() {
            Ok(VerifyOutcome::Pass)
        } else {
            Ok(VerifyOutcome::Fail {
                reason: "identity does not balance".into(),
                residue: Some(residue),
            })
        }
    }

    /// Coefficient statistics over the certificate data: Gram entries and
    /// equality multiplier coefficients. The target and shift are given,
    /// not produced, so they are not charged.
    pub fn stats(&self) -> CoefficientStats {
        let mut st = CoefficientStats::zero();
        for g in std::iter::once(&self.gram_c).chain(&self.gram_d) {
            for i in 0..g.rows() {
                for j in 0..g.cols() {
                    st.absorb(g.at(i, j));
                }
            }
        }
        for lam in &self.equality_multipliers {
            st.merge(&lam.coeff_stats());
        }
        st
    }
}

/// Build a Gram pair (basis, C) representing sum_i s_i^2 explicitly.
pub fn gram_from_squares(nvars: usize, squares: &[Polynomial]) -> Result<(Vec<Monomial>, Mat)> {
    let mut basis: Vec<Monomial> = Vec::new();
    for s in squares {
        if s.nvars() != nvars {
            return Err(Error::NvarsMismatch(s.nvars(), nvars));
        }
        for (m, _) in s.terms() {
            if !basis.contains(m) {
                basis.push(m.clone());
            }
        }
    }
    basis.sort();
    let dim = basis.len();
    let mut c = Mat::zeros(dim, dim);
    for s in squares {
        let vec: Vec<Rat> = basis.iter().map(|m| s.coeff(m)).collect();
        c.add_scaled(&Mat::outer(&vec, &vec), &Rat::one())?;
    }
    Ok((basis, c))
}
