//! Coefficient repair for certificates over rich solution sets: project
//! the Gram blocks off the moment kernel, re-derive the equality
//! multipliers, and bound the result's bit size from the richness data
//! alone.

use num_traits::{One, Signed, Zero};

use crate::certificate::{SoSCertificate, VerifyOutcome};
use crate::error::{Error, Result};
use crate::matrix::{Mat, MultiRhsSolver};
use crate::moment;
use crate::poly::{monomial_basis, CoefficientStats, Monomial, Polynomial};
use crate::ratio::{ceil_log2_rat, rat_bits, Int, Rat};
use crate::richness::RichnessReport;
use crate::systems::ConstraintSystem;

#[derive(Debug, Clone)]
pub struct RewriteOutcome {
    pub certificate: SoSCertificate,
    pub stats_before: CoefficientStats,
    pub stats_after: CoefficientStats,
    /// Bit-size ceiling the rewritten certificate is guaranteed to meet.
    pub bound_bits: Int,
}

/// Coefficient vector of a polynomial over the Gram basis; errors if the
/// polynomial leaves the basis span.
fn basis_vector(p: &Polynomial, basis: &[Monomial]) -> Result<Vec<Rat>> {
    let mut out = vec![Rat::zero(); basis.len()];
    'terms: for (m, c) in p.terms() {
        for (i, b) in basis.iter().enumerate() {
            if b == m {
                out[i] = c.clone();
                continue 'terms;
            }
        }
        return Err(Error::OutsideBasisSpan(format!(
            "kernel monomial {m} is not a Gram basis element"
        )));
    }
    Ok(out)
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sparse(v: &[Rat]) -> Vec<(usize, Rat)> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

fn span_rank(ncols: usize, rows: &[Vec<Rat>]) -> usize {
    let mut solver = MultiRhsSolver::new(ncols, 0);
    for r in rows {
        solver.add_row(&sparse(r), &[]);
    }
    solver.rank()
}

/// Orthogonal projector onto the span of the given vectors, built by
/// unnormalized Gram-Schmidt so everything stays rational.
fn projector(dim: usize, vecs: &[Vec<Rat>]) -> Mat {
    let mut ortho: Vec<Vec<Rat>> = Vec::new();
    for v in vecs {
        let mut w = v.clone();
        for o in &ortho {
            let scale = dot(&w, o) / dot(o, o);
            for (wi, oi) in w.iter_mut().zip(o) {
                *wi -= &scale * oi;
            }
        }
        if w.iter().any(|x| !x.is_zero()) {
            ortho.push(w);
        }
    }
    let mut pi = Mat::zeros(dim, dim);
    for o in &ortho {
        let norm = dot(o, o);
        for i in 0..dim {
            if o[i].is_zero() {
                continue;
            }
            for j in 0..dim {
                if !o[j].is_zero() {
                    let add = &(&o[i] * &o[j]) / &norm;
                    let cur = pi.at(i, j).clone();
                    pi.set(i, j, cur + add);
                }
            }
        }
    }
    pi
}

/// Bit-size ceiling for a rewritten certificate, computed from the
/// richness report and the shape of the inputs alone: a fixed constant
/// times n^k plus the bit sizes of the gap, the margin, the target, the
/// solution bound, and the constraint coefficients.
pub fn theoretical_bound(
    sys: &ConstraintSystem,
    report: &RichnessReport,
    cert: &SoSCertificate,
) -> Int {
    const C0: u32 = 1024;
    let n = Int::from(sys.nvars.max(2));
    let nk = n.pow(report.k as u32);
    let gap_bits = Int::from(ceil_log2_rat(&(Rat::one() / &report.delta)));
    let margin_bits = if report.epsilon.is_positive() {
        Int::from(ceil_log2_rat(&(Rat::one() / &report.epsilon)))
    } else {
        Int::zero()
    };
    let mut target_norm = cert.target.coeff_stats().max_abs_coeff;
    let shift_abs = cert.shift.abs();
    if shift_abs > target_norm {
        target_norm = shift_abs;
    }
    let target_bits = if target_norm.is_zero() {
        Int::one()
    } else {
        Int::from(rat_bits(&target_norm))
    };
    let solution_bits = Int::from(rat_bits(&sys.solution_norm_bound()));
    let constraint_bits = Int::from(rat_bits(&sys.constraint_coeff_bound()));
    (nk.clone() + gap_bits + margin_bits + target_bits + solution_bits + constraint_bits * nk)
        * Int::from(C0)
}

/// Rewrite a verified certificate over a rich solution set into one whose
/// coefficients are bounded in terms of the richness data: project the
/// Gram blocks orthogonally off the witnessed moment kernel and solve for
/// fresh equality multipliers within the derivation degree.
pub fn rewrite_bounded(
    cert: &SoSCertificate,
    sys: &ConstraintSystem,
    report: &RichnessReport,
) -> Result<RewriteOutcome> {
    match cert.verify(sys)? {
        VerifyOutcome::Pass => {}
        VerifyOutcome::Fail { reason, .. } => {
            return Err(Error::Precondition(format!(
                "input certificate does not verify: {reason}"
            )));
        }
    }
    if !report.rich_verdict {
        return Err(Error::Precondition(
            "richness report does not certify a rich solution set".into(),
        ));
    }
    if report.nvars != cert.nvars {
        return Err(Error::NvarsMismatch(report.nvars, cert.nvars));
    }
    if report.d != cert.degree.div_ceil(2) {
        return Err(Error::Precondition(format!(
            "report kernel degree {} does not match the Gram degree {}",
            report.d,
            cert.degree.div_ceil(2)
        )));
    }
    if report.k > cert.degree {
        return Err(Error::Precondition(format!(
            "derivation degree {} exceeds the certificate degree {}",
            report.k, cert.degree
        )));
    }

    // Staleness check: the witnessed kernel must span exactly the kernel
    // of a freshly assembled moment matrix, and every witness must be a
    // valid derivation within degree k.
    let mm = moment::moment_matrix(sys, report.d)?;
    let fresh = moment::kernel_polynomials(&mm);
    let witnessed: Vec<&Polynomial> = report.derived.iter().map(|(g, _)| g).collect();
    let basis = &cert.gram_basis;
    let fresh_vecs = fresh
        .iter()
        .map(|g| basis_vector(g, basis))
        .collect::<Result<Vec<_>>>()?;
    let witness_vecs = witnessed
        .iter()
        .map(|g| basis_vector(g, basis))
        .collect::<Result<Vec<_>>>()?;
    let dim = basis.len();
    let rank_fresh = span_rank(dim, &fresh_vecs);
    let rank_witness = span_rank(dim, &witness_vecs);
    let joint: Vec<Vec<Rat>> = fresh_vecs
        .iter()
        .chain(witness_vecs.iter())
        .cloned()
        .collect();
    if rank_fresh != rank_witness || span_rank(dim, &joint) != rank_fresh {
        return Err(Error::StaleReport(format!(
            "witnessed kernel (rank {rank_witness}) no longer spans the \
             moment kernel (rank {rank_fresh})"
        )));
    }
    for (g, der) in &report.derived {
        if der.degree > report.k {
            return Err(Error::StaleReport(format!(
                "witness for {g} has degree {} above k = {}",
                der.degree, report.k
            )));
        }
        if !der.verify(sys)?.is_valid() {
            return Err(Error::StaleReport(format!(
                "witness for {g} is not a valid derivation"
            )));
        }
    }

    let stats_before = cert.stats();

    // Project every Gram block off the kernel span.
    let pi = projector(dim, &witness_vecs);
    let mut pi_perp = Mat::identity(dim);
    pi_perp = pi_perp.sub(&pi)?;
    let c_new = cert.gram_c.congruence(&pi_perp)?;
    let d_new = cert
        .gram_d
        .iter()
        .map(|d| d.congruence(&pi_perp))
        .collect::<Result<Vec<_>>>()?;

    // Residual the fresh multipliers must account for.
    let expansion = crate::certificate::gram_expansion(basis, &c_new, cert.nvars);
    let mut residual = &(&cert.target - &Polynomial::constant(cert.nvars, cert.shift.clone()))
        - &expansion;
    for (dmat, q) in d_new.iter().zip(&sys.inequalities) {
        let part = crate::certificate::gram_expansion(basis, dmat, cert.nvars);
        residual = &residual - &(&part * q);
    }

    // Solve residual = sum_i lambda_i p_i with summand degrees <= k.
    let nv = cert.nvars;
    let mut columns: Vec<(usize, Monomial)> = Vec::new();
    let mut products: Vec<Polynomial> = Vec::new();
    for (i, p) in sys.equalities.iter().enumerate() {
        let Some(pdeg) = p.degree() else { continue };
        if pdeg > report.k {
            continue;
        }
        for mu in monomial_basis(nv, report.k - pdeg) {
            products.push(&Polynomial::from_monomial(nv, mu.clone(), Rat::one()) * p);
            columns.push((i, mu));
        }
    }
    use std::collections::BTreeMap;
    let mut rows: BTreeMap<Monomial, (Vec<(usize, Rat)>, Vec<(usize, Rat)>)> = BTreeMap::new();
    for (j, prod) in products.iter().enumerate() {
        for (m, c) in prod.terms() {
            rows.entry(m.clone()).or_default().0.push((j, c.clone()));
        }
    }
    for (m, c) in residual.terms() {
        rows.entry(m.clone()).or_default().1.push((0, c.clone()));
    }
    let mut solver = MultiRhsSolver::new(columns.len(), 1);
    for (coeffs, rhs) in rows.values() {
        solver.add_row(coeffs, rhs);
    }
    let solution = solver.solve().pop().flatten().ok_or_else(|| {
        Error::Infeasible(format!(
            "projected residual has no degree-{} derivation",
            report.k
        ))
    })?;
    let mut multipliers = vec![Polynomial::zero(nv); sys.equalities.len()];
    for (j, c) in solution.into_iter().enumerate() {
        if !c.is_zero() {
            let (i, ref mu) = columns[j];
            multipliers[i].add_term(mu.clone(), c);
        }
    }

    let rewritten = SoSCertificate {
        nvars: cert.nvars,
        degree: cert.degree,
        target: cert.target.clone(),
        shift: cert.shift.clone(),
        gram_basis: cert.gram_basis.clone(),
        gram_c: c_new,
        gram_d: d_new,
        equality_multipliers: multipliers,
    };
    match rewritten.verify(sys)? {
        VerifyOutcome::Pass => {}
        VerifyOutcome::Fail { reason, .. } => {
            return Err(Error::SelfCheck(format!(
                "rewritten certificate failed verification: {reason}"
            )));
        }
    }
    let stats_after = rewritten.stats();
    let bound_bits = theoretical_bound(sys, report, cert);
    Ok(RewriteOutcome {
        certificate: rewritten,
        stats_before,
        stats_after,
        bound_bits,
    })
}
