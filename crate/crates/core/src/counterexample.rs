//! Doubly-exponential coefficient growth: explicit certificates for the
//! chain systems, the dual functionals that force the growth, and the
//! lower-bound audit tying the two together.

use num_traits::{One, Signed, Zero};

use crate::certificate::SoSCertificate;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::poly::{monomial_basis, Monomial, Polynomial};
use crate::ratio::{irat, pow_rat, Rat};
use crate::systems::{self, ConstraintSystem};

/// Base of the chain growth: n / (4 eps).
fn chain_base(n: usize, eps: &Rat) -> Rat {
    irat(n as i64) / (eps * irat(4))
}

/// Guard for chain-family sizes: the certificates carry numbers with about
/// 2^n digits, so n is kept small enough to stay printable.
fn check_chain_n(n: usize) -> Result<()> {
    if n == 0 || n > 30 {
        return Err(Error::Guard(format!(
            "chain length must lie in 1..=30, got {n}"
        )));
    }
    Ok(())
}

/// The explicit degree-2 certificate of eps - y_1 >= 0 over the chain
/// system. On the Gram basis (1, y_1, ..., y_n) the block is an arrowhead:
///
///   C[0][0] = eps, C[0][i] = -(2 eps / n) b^{2^{i-1}}, C[i][i] = b^{2^i - 1}
///
/// with b = n/(4 eps), and the multiplier on the i-th chain equality is
/// -b^{2^i - 1}. The largest coefficient, b^{2^n - 1}, is doubly
/// exponential in n.
pub fn chain_certificate(n: usize, eps: &Rat) -> Result<(ConstraintSystem, SoSCertificate)> {
    check_chain_n(n)?;
    let sys = systems::chain(n, eps)?;
    let b = chain_base(n, eps);
    let dim = n + 1;
    let mut c = Mat::zeros(dim, dim);
    c.set(0, 0, eps.clone());
    let off_scale = -(eps * irat(2)) / irat(n as i64);
    for i in 1..=n {
        let corner = pow_rat(&b, 1u64 << (i - 1));
        c.set(0, i, &off_scale * &corner);
        c.set(i, 0, &off_scale * &corner);
        c.set(i, i, pow_rat(&b, (1u64 << i) - 1));
    }
    let multipliers = (1..=n)
        .map(|i| Polynomial::constant(n, -pow_rat(&b, (1u64 << i) - 1)))
        .collect();
    let target = &Polynomial::constant(n, eps.clone()) - &Polynomial::var(n, 0);
    let cert = SoSCertificate {
        nvars: n,
        degree: 2,
        target,
        shift: Rat::zero(),
        gram_basis: monomial_basis(n, 1),
        gram_c: c,
        gram_d: vec![],
        equality_multipliers: multipliers,
    };
    Ok((sys, cert))
}

/// Largest coefficient appearing in the chain certificate, in closed form.
pub fn chain_max_coeff(n: usize, eps: &Rat) -> Result<Rat> {
    check_chain_n(n)?;
    Ok(pow_rat(&chain_base(n, eps), (1u64 << n) - 1))
}

/// The chain certificate pushed through y_i = (sum of block i) - k: the
/// same identity over 2kn Boolean variables. The Gram block is the
/// congruence T' C T for the substitution T, the multipliers keep their
/// values on the chain-image equalities, and the Boolean equalities get
/// zero multipliers.
pub fn boolean_chain_certificate(
    n: usize,
    k: usize,
    eps: &Rat,
) -> Result<(ConstraintSystem, SoSCertificate)> {
    check_chain_n(n)?;
    let sys = systems::boolean_chain(n, k, eps)?;
    let nv = sys.nvars;
    let (_, chain_cert) = chain_certificate(n, eps)?;

    // Row i of T expresses the i-th chain basis monomial in the Boolean
    // basis (1, w_11, ..., w_n_2k).
    let mut t = Mat::zeros(n + 1, nv + 1);
    t.set(0, 0, Rat::one());
    for i in 1..=n {
        t.set(i, 0, irat(-(k as i64)));
        for j in 0..2 * k {
            t.set(i, 1 + (i - 1) * 2 * k + j, Rat::one());
        }
    }
    let c = chain_cert.gram_c.congruence(&t)?;

    let mut multipliers: Vec<Polynomial> = chain_cert
        .equality_multipliers
        .iter()
        .map(|lam| Polynomial::constant(nv, lam.coeff(&Monomial::one(n))))
        .collect();
    multipliers.extend(std::iter::repeat_with(|| Polynomial::zero(nv)).take(nv));

    let block_one = (0..2 * k).fold(Polynomial::zero(nv), |acc, j| {
        &acc + &Polynomial::var(nv, j)
    });
    let l1 = &block_one - &Polynomial::constant(nv, irat(k as i64));
    let target = &Polynomial::constant(nv, eps.clone()) - &l1;

    let cert = SoSCertificate {
        nvars: nv,
        degree: 2,
        target,
        shift: Rat::zero(),
        gram_basis: monomial_basis(nv, 1),
        gram_c: c,
        gram_d: vec![],
        equality_multipliers: multipliers,
    };
    Ok((sys, cert))
}

/// Every degree-d certificate of eps - y_1 >= 0 over chain(n) has some
/// coefficient of absolute value at least eps / (n^d (2 eps)^{2^n}).
pub fn coefficient_lower_bound(n: usize, eps: &Rat, d: usize) -> Result<Rat> {
    check_chain_n(n)?;
    if d < 2 {
        return Err(Error::Guard("certificates need degree at least 2".into()));
    }
    let two_eps = eps * irat(2);
    let denom = pow_rat(&irat(n as i64), d as u64) * pow_rat(&two_eps, 1u64 << n);
    Ok(eps / denom)
}

/// Boolean-variable version of the coefficient growth bound:
/// eps / ((n k)^d (2 eps)^{2^n}), valid in the regime 4d <= k where the
/// product functional below is a genuine degree-d obstruction.
pub fn boolean_coefficient_lower_bound(
    n: usize,
    k: usize,
    eps: &Rat,
    d: usize,
) -> Result<Rat> {
    check_chain_n(n)?;
    if d < 2 || 4 * d > k {
        return Err(Error::Guard(format!(
            "boolean bound needs 2 <= d and 4d <= k, got d = {d}, k = {k}"
        )));
    }
    let two_eps = eps * irat(2);
    let denom =
        pow_rat(&irat((n * k) as i64), d as u64) * pow_rat(&two_eps, 1u64 << n);
    Ok(eps / denom)
}

/// A linear functional on polynomials of degree at most `degree` standing
/// in for an expectation over solutions that need not exist.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoExpectation {
    pub nvars: usize,
    pub degree: usize,
    pub label: PseudoLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PseudoLabel {
    /// phi[y^beta] = (2 eps)^{sum_i 2^i beta_i} on the chain variables.
    Phi { n: usize, eps: Rat },
    /// Symmetric functional on 2k Boolean variables pretending the sum is
    /// k + r: multilinear moments depend only on the support size.
    Knapsack { k: usize, r: Rat },
    /// Product of n knapsack functionals with r_i = (2 eps)^{2^{i-1}}.
    Product { n: usize, k: usize, eps: Rat },
    /// Honest evaluation at a point; the degenerate case of the family.
    Evaluation { point: Vec<Rat> },
}

/// E_s = prod_{j < s} (k + r - j) / (2k - j): the value the knapsack
/// functional gives every multilinear monomial of support size s.
pub fn knapsack_level(k: usize, r: &Rat, s: usize) -> Rat {
    debug_assert!(s <= 2 * k);
    let mut out = Rat::one();
    for j in 0..s {
        let num = irat(k as i64) + r - irat(j as i64);
        let den = irat((2 * k - j) as i64);
        out *= num / den;
    }
    out
}

/// The defining constraint of the knapsack functional: sum w - (k + r).
pub fn knapsack_constraint(k: usize, r: &Rat) -> Polynomial {
    let nv = 2 * k;
    let sum = (0..nv).fold(Polynomial::zero(nv), |acc, i| {
        &acc + &Polynomial::var(nv, i)
    });
    &sum - &Polynomial::constant(nv, irat(k as i64) + r)
}

pub fn phi_pseudoexpectation(n: usize, eps: &Rat, degree: usize) -> Result<PseudoExpectation> {
    check_chain_n(n)?;
    systems::chain(n, eps)?; // reuse the eps guard
    if (degree as u64).saturating_mul(1 << (n - 1)) > 1_000_000 {
        return Err(Error::Guard(
            "phi values would need more than a megabit per moment".into(),
        ));
    }
    Ok(PseudoExpectation {
        nvars: n,
        degree,
        label: PseudoLabel::Phi {
            n,
            eps: eps.clone(),
        },
    })
}

pub fn knapsack_pseudoexpectation(k: usize, r: &Rat, degree: usize) -> Result<PseudoExpectation> {
    if k == 0 {
        return Err(Error::Guard("knapsack needs k >= 1".into()));
    }
    Ok(PseudoExpectation {
        nvars: 2 * k,
        degree,
        label: PseudoLabel::Knapsack { k, r: r.clone() },
    })
}

pub fn product_pseudoexpectation(
    n: usize,
    k: usize,
    eps: &Rat,
    degree: usize,
) -> Result<PseudoExpectation> {
    check_chain_n(n)?;
    if k == 0 {
        return Err(Error::Guard("product functional needs k >= 1".into()));
    }
    systems::chain(n, eps)?;
    Ok(PseudoExpectation {
        nvars: 2 * k * n,
        degree,
        label: PseudoLabel::Product {
            n,
            k,
            eps: eps.clone(),
        },
    })
}

pub fn evaluation_pseudoexpectation(point: Vec<Rat>, degree: usize) -> PseudoExpectation {
    PseudoExpectation {
        nvars: point.len(),
        degree,
        label: PseudoLabel::Evaluation { point },
    }
}

impl PseudoExpectation {
    pub fn eval_monomial(&self, m: &Monomial) -> Result<Rat> {
        if m.nvars() > self.nvars {
            return Err(Error::NvarsMismatch(m.nvars(), self.nvars));
        }
        if m.degree() > self.degree {
            return Err(Error::Guard(format!(
                "monomial degree {} exceeds functional degree {}",
                m.degree(),
                self.degree
            )));
        }
        Ok(match &self.label {
            PseudoLabel::Phi { eps, .. } => {
                let two_eps = eps * irat(2);
                let weight: u64 = m
                    .0
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| (b as u64) << i)
                    .sum();
                pow_rat(&two_eps, weight)
            }
            PseudoLabel::Knapsack { k, r } => {
                knapsack_level(*k, r, m.support().count())
            }
            PseudoLabel::Product { n, k, eps } => {
                let two_eps = eps * irat(2);
                let mut sizes = vec![0usize; *n];
                for v in m.support() {
                    sizes[v / (2 * k)] += 1;
                }
                let mut out = Rat::one();
                for (b, &s) in sizes.iter().enumerate() {
                    if s > 0 {
                        let r_b = pow_rat(&two_eps, 1u64 << b);
                        out *= knapsack_level(*k, &r_b, s);
                    }
                }
                out
            }
            PseudoLabel::Evaluation { point } => m.evaluate(point),
        })
    }

    pub fn eval(&self, p: &Polynomial) -> Result<Rat> {
        if p.nvars() != self.nvars {
            return Err(Error::NvarsMismatch(p.nvars(), self.nvars));
        }
        let mut out = Rat::zero();
        for (m, c) in p.terms() {
            out += c * self.eval_monomial(m)?;
        }
        Ok(out)
    }

    /// The pseudo-moment matrix at Gram degree d: entries E[m_a m_b] over
    /// the full monomial basis of degree at most d.
    pub fn pseudo_moment_matrix(&self, d: usize) -> Result<Mat> {
        if 2 * d > self.degree {
            return Err(Error::Guard(format!(
                "moment matrix at Gram degree {d} needs functional degree {}, have {}",
                2 * d,
                self.degree
            )));
        }
        let basis = monomial_basis(self.nvars, d);
        let mut mat = Mat::zeros(basis.len(), basis.len());
        for a in 0..basis.len() {
            for b in a..basis.len() {
                let v = self.eval_monomial(&basis[a].mul(&basis[b]))?;
                mat.set(a, b, v.clone());
                if a != b {
                    mat.set(b, a, v);
                }
            }
        }
        Ok(mat)
    }
}

/// Outcome of auditing a certificate against a dual functional.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditOutcome {
    /// Index of the single equality the functional fails to annihilate.
    pub leaky_equality: usize,
    /// Largest |E[m p_leaky]| over multipliers within the degree budget.
    pub leak: Rat,
    /// Value of the functional on target - shift (negative when the
    /// functional obstructs the certificate's conclusion).
    pub target_value: Rat,
    /// Implied lower bound on the certificate's largest coefficient; zero
    /// when the functional does not obstruct.
    pub implied_coeff_bound: Rat,
}

/// Play a pseudo-expectation against a verified certificate. If the
/// functional is negative on the target yet annihilates every equality
/// product except one small leak, every certificate of this degree must
/// carry a coefficient of size at least
///
///   |E[target - shift]| / (base^degree * leak),
///
/// where base bounds the count of candidate monomials per degree step.
pub fn audit_certificate_against_dual(
    cert: &SoSCertificate,
    pe: &PseudoExpectation,
    sys: &ConstraintSystem,
) -> Result<AuditOutcome> {
    if pe.nvars != cert.nvars || sys.nvars != cert.nvars {
        return Err(Error::NvarsMismatch(pe.nvars, cert.nvars));
    }
    if pe.degree < cert.degree {
        return Err(Error::Guard(format!(
            "functional degree {} below certificate degree {}",
            pe.degree, cert.degree
        )));
    }
    if !sys.inequalities.is_empty() {
        return Err(Error::Guard(
            "audit covers equality-constrained systems only".into(),
        ));
    }

    let shifted = &cert.target - &Polynomial::constant(cert.nvars, cert.shift.clone());
    let target_value = pe.eval(&shifted)?;

    // Per-equality leaks: the largest |E[m p_i]| over monomial multipliers
    // m keeping deg(m p_i) within the certificate degree.
    let mut leaks: Vec<(usize, Rat)> = Vec::new();
    for (i, p) in sys.equalities.iter().enumerate() {
        let pdeg = p.degree().unwrap_or(0);
        if pdeg > cert.degree {
            continue;
        }
        let mut worst = Rat::zero();
        for m in monomial_basis(cert.nvars, cert.degree - pdeg) {
            let shifted = Polynomial::from_monomial(cert.nvars, m, Rat::one());
            let v = pe.eval(&(&shifted * p))?.abs();
            if v > worst {
                worst = v;
            }
        }
        if !worst.is_zero() {
            leaks.push((i, worst));
        }
    }

    if !target_value.is_negative() {
        let (leaky_equality, leak) = leaks.into_iter().next().unwrap_or((0, Rat::zero()));
        return Ok(AuditOutcome {
            leaky_equality,
            leak,
            target_value,
            implied_coeff_bound: Rat::zero(),
        });
    }

    match leaks.len() {
        0 => Err(Error::Guard(
            "functional annihilates every constraint yet is negative on the \
             target: no certificate of this degree exists"
                .into(),
        )),
        1 => {
            let (leaky_equality, leak) = leaks.into_iter().next().unwrap();
            let base = match &pe.label {
                PseudoLabel::Phi { n, .. } => *n,
                PseudoLabel::Knapsack { k, .. } => 2 * k,
                PseudoLabel::Product { n, k, .. } => n * k,
                PseudoLabel::Evaluation { .. } => 1,
            };
            let denom = pow_rat(&irat(base as i64), cert.degree as u64) * &leak;
            let implied = target_value.abs() / denom;
            Ok(AuditOutcome {
                leaky_equality,
                leak,
                target_value,
                implied_coeff_bound: implied,
            })
        }
        _ => Err(Error::Guard(format!(
            "functional leaks through {} constraints; the single-leak \
             accounting does not apply",
            leaks.len()
        ))),
    }
}
