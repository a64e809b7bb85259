//! Richness of solution sets: a spectral gap for the moment matrix,
//! derivational completeness of its kernel, and robustness of the strict
//! inequalities, plus constructive derivation routines for the worked
//! example systems.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::MultiRhsSolver;
use crate::moment::{self, MomentMatrix};
use crate::poly::{monomial_basis, Monomial, Polynomial};
use crate::ratio::{self, irat, Rat};
use crate::systems::{ConstraintSystem, Graph};

/// A degree-bounded ideal membership witness: target = sum_i m_i * p_i
/// with every summand of degree at most `degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derivation {
    pub target: Polynomial,
    pub degree: usize,
    /// One multiplier per system equality, zero where unused.
    pub multipliers: Vec<Polynomial>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DerivationOutcome {
    Valid,
    /// Summand `index` has degree `found` above the claimed bound.
    DegreeExceeded { index: usize, found: usize },
    /// The multiplier combination misses the target by this much.
    Residue(Polynomial),
}

impl DerivationOutcome {
    pub fn is_valid(&self) -> bool {
        matches!(self, DerivationOutcome::Valid)
    }
}

impl Derivation {
    pub fn zero(sys: &ConstraintSystem, target: Polynomial, degree: usize) -> Self {
        Derivation {
            target,
            degree,
            multipliers: vec![Polynomial::zero(sys.nvars); sys.equalities.len()],
        }
    }

    pub fn verify(&self, sys: &ConstraintSystem) -> Result<DerivationOutcome> {
        if self.target.nvars() != sys.nvars {
            return Err(Error::NvarsMismatch(self.target.nvars(), sys.nvars));
        }
        if self.multipliers.len() != sys.equalities.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} multipliers for {} equalities",
                self.multipliers.len(),
                sys.equalities.len()
            )));
        }
        let mut sum = Polynomial::zero(sys.nvars);
        for (i, (m, p)) in self.multipliers.iter().zip(&sys.equalities).enumerate() {
            if m.nvars() != sys.nvars {
                return Err(Error::NvarsMismatch(m.nvars(), sys.nvars));
            }
            let summand = m * p;
            if let Some(d) = summand.degree() {
                if d > self.degree {
                    return Ok(DerivationOutcome::DegreeExceeded { index: i, found: d });
                }
            }
            sum = &sum + &summand;
        }
        let residue = &self.target - &sum;
        if residue.is_zero() {
            Ok(DerivationOutcome::Valid)
        } else {
            Ok(DerivationOutcome::Residue(residue))
        }
    }
}

/// Completeness of a system at kernel degree d and derivation degree k:
/// every kernel polynomial of the degree-d moment matrix should be
/// derivable from the equalities with summand degrees at most k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Completeness {
    pub d: usize,
    pub k: usize,
    pub kernel_dim: usize,
    pub derived: Vec<(Polynomial, Derivation)>,
    pub underived: Vec<Polynomial>,
}

impl Completeness {
    pub fn complete(&self) -> bool {
        self.underived.is_empty()
    }
}

pub fn check_completeness(sys: &ConstraintSystem, d: usize, k: usize) -> Result<Completeness> {
    let mm = moment::moment_matrix(sys, d)?;
    check_completeness_of(sys, &mm, k)
}

/// Completeness against an already-assembled moment matrix.
pub fn check_completeness_of(
    sys: &ConstraintSystem,
    mm: &MomentMatrix,
    k: usize,
) -> Result<Completeness> {
    let d = mm.degree;
    if k < d {
        return Err(Error::Guard(format!(
            "derivation degree k = {k} below kernel degree d = {d}"
        )));
    }
    let kernel = moment::kernel_polynomials(mm);
    let kernel_dim = kernel.len();
    if kernel.is_empty() {
        return Ok(Completeness {
            d,
            k,
            kernel_dim,
            derived: vec![],
            underived: vec![],
        });
    }

    // Unknowns: one column per (equality, multiplier monomial) pair whose
    // product stays within degree k. Equations: one row per monomial of
    // the products, with the kernel polynomials as right-hand sides.
    let nv = sys.nvars;
    let mut columns: Vec<(usize, Monomial)> = Vec::new();
    let mut column_products: Vec<Polynomial> = Vec::new();
    for (i, p) in sys.equalities.iter().enumerate() {
        let Some(pdeg) = p.degree() else { continue };
        if pdeg > k {
            continue;
        }
        for mu in monomial_basis(nv, k - pdeg) {
            let prod = &Polynomial::from_monomial(nv, mu.clone(), Rat::one()) * p;
            columns.push((i, mu));
            column_products.push(prod);
        }
    }

    use std::collections::BTreeMap;
    let mut rows: BTreeMap<Monomial, (Vec<(usize, Rat)>, Vec<(usize, Rat)>)> = BTreeMap::new();
    for (j, prod) in column_products.iter().enumerate() {
        for (m, c) in prod.terms() {
            rows.entry(m.clone()).or_default().0.push((j, c.clone()));
        }
    }
    for (r, g) in kernel.iter().enumerate() {
        for (m, c) in g.terms() {
            rows.entry(m.clone()).or_default().1.push((r, c.clone()));
        }
    }

    let mut solver = MultiRhsSolver::new(columns.len(), kernel.len());
    for (coeffs, rhs) in rows.values() {
        solver.add_row(coeffs, rhs);
    }
    let solutions = solver.solve();

    let mut derived = Vec::new();
    let mut underived = Vec::new();
    for (g, sol) in kernel.into_iter().zip(solutions) {
        match sol {
            None => underived.push(g),
            Some(x) => {
                let mut mults = vec![Polynomial::zero(nv); sys.equalities.len()];
                for (j, c) in x.into_iter().enumerate() {
                    if !c.is_zero() {
                        let (i, ref mu) = columns[j];
                        mults[i].add_term(mu.clone(), c);
                    }
                }
                let der = Derivation {
                    target: g,
                    degree: k,
                    multipliers: mults,
                };
                if !der.verify(sys)?.is_valid() {
                    return Err(Error::SelfCheck(
                        "solver produced an invalid derivation".into(),
                    ));
                }
                derived.push((der.target.clone(), der));
            }
        }
    }
    Ok(Completeness {
        d,
        k,
        kernel_dim,
        derived,
        underived,
    })
}

/// Robustness: the exact minimum of the strict inequalities over the
/// solution set. Vacuously 1 when there are no inequalities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Robustness {
    #[serde(with = "ratio::rat_string")]
    pub epsilon: Rat,
    pub epsilon_vacuous: bool,
    /// Argmin as (inequality index, solution mask), absent when vacuous.
    pub witness: Option<(usize, u32)>,
}

impl Robustness {
    pub fn robust(&self) -> bool {
        self.epsilon.is_positive()
    }
}

pub fn check_robustness(sys: &ConstraintSystem) -> Result<Robustness> {
    if sys.inequalities.is_empty() {
        return Ok(Robustness {
            epsilon: Rat::one(),
            epsilon_vacuous: true,
            witness: None,
        });
    }
    let sol = sys.enumerate_solutions()?;
    if sol.is_empty() {
        return Err(Error::EmptySolutionSet);
    }
    let mut best: Option<(Rat, usize, u32)> = None;
    for &point in &sol.points {
        for (qi, q) in sys.inequalities.iter().enumerate() {
            let v = q.evaluate_boolean(point as u64);
            if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                best = Some((v, qi, point));
            }
        }
    }
    let (epsilon, qi, point) = best.expect("nonempty solution set");
    Ok(Robustness {
        epsilon,
        epsilon_vacuous: false,
        witness: Some((qi, point)),
    })
}

/// The combined verdict at kernel degree d and derivation degree k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RichnessReport {
    pub label: String,
    pub nvars: usize,
    pub d: usize,
    pub k: usize,
    /// Certified spectral gap: every nonzero moment-matrix eigenvalue
    /// exceeds this.
    #[serde(with = "ratio::rat_string")]
    pub delta: Rat,
    /// Exact smallest nonzero eigenvalue bound from the characteristic
    /// polynomial, when the matrix is small enough to afford it.
    #[serde(default, with = "ratio::opt_rat_string")]
    pub sharp_delta: Option<Rat>,
    #[serde(with = "ratio::rat_string")]
    pub epsilon: Rat,
    pub epsilon_vacuous: bool,
    pub kernel_dim: usize,
    pub complete: bool,
    pub robust: bool,
    pub rich_verdict: bool,
    pub derived: Vec<(Polynomial, Derivation)>,
    pub underived: Vec<Polynomial>,
}

pub fn richness_report(sys: &ConstraintSystem, d: usize, k: usize) -> Result<RichnessReport> {
    let mm = moment::moment_matrix(sys, d)?;
    let (delta, sharp_delta) = moment::spectral_richness(&mm)?;
    let completeness = check_completeness_of(sys, &mm, k)?;
    let robustness = check_robustness(sys)?;
    let complete = completeness.complete();
    let robust = robustness.robust();
    Ok(RichnessReport {
        label: sys.label.clone(),
        nvars: sys.nvars,
        d,
        k,
        delta,
        sharp_delta,
        epsilon: robustness.epsilon,
        epsilon_vacuous: robustness.epsilon_vacuous,
        kernel_dim: completeness.kernel_dim,
        complete,
        robust,
        rich_verdict: complete && robust,
        derived: completeness.derived,
        underived: completeness.underived,
    })
}

// Helpers for the constructive routines.

/// Swap two variables throughout a polynomial.
fn swap_vars(p: &Polynomial, a: usize, b: usize) -> Polynomial {
    let nv = p.nvars();
    Polynomial::from_terms(
        nv,
        p.terms().map(|(m, c)| {
            let mut e = m.0.clone();
            let need = a.max(b) + 1;
            if e.len() < need {
                e.resize(need, 0);
            }
            e.swap(a, b);
            (Monomial(e), c.clone())
        }),
    )
}

/// Assign 0/1 values to two variables of a multilinear polynomial.
fn assign_pair(p: &Polynomial, a: usize, va: bool, b: usize, vb: bool) -> Polynomial {
    let nv = p.nvars();
    let get = |m: &Monomial, i: usize| m.0.get(i).copied().unwrap_or(0) > 0;
    Polynomial::from_terms(
        nv,
        p.terms().filter_map(|(m, c)| {
            if (!va && get(m, a)) || (!vb && get(m, b)) {
                return None;
            }
            let mut e = m.0.clone();
            if a < e.len() {
                e[a] = 0;
            }
            if b < e.len() {
                e[b] = 0;
            }
            Some((Monomial(e), c.clone()))
        }),
    )
}

/// Multiplier bundle at one recursion level of the bisection derivation:
/// coefficients on the Boolean equalities plus one on the level's own sum
/// constraint (sum over active variables minus the level weight).
struct LevelMults {
    bools: Vec<Polynomial>,
    sum: Polynomial,
}

impl LevelMults {
    fn zero(nvars: usize) -> Self {
        LevelMults {
            bools: vec![Polynomial::zero(nvars); nvars],
            sum: Polynomial::zero(nvars),
        }
    }
}

fn sum_minus(nvars: usize, active: &[usize], w: usize) -> Polynomial {
    let mut p = Polynomial::constant(nvars, irat(-(w as i64)));
    for &i in active {
        p = &p + &Polynomial::var(nvars, i);
    }
    p
}

/// Derive a multilinear polynomial that vanishes on every 0/1 assignment
/// of weight w to the active variables (other variables absent). The
/// polynomial is split into its symmetrization, handled by eliminating
/// elementary symmetric layers against powers of the sum constraint, and
/// staged transposition differences (x_t - x_m) u, where u inherits the
/// vanishing property two variables down and one weight lower.
fn derive_level(
    nvars: usize,
    active: &[usize],
    w: usize,
    s: &Polynomial,
) -> Result<LevelMults> {
    let mut out = LevelMults::zero(nvars);
    if s.is_zero() {
        return Ok(out);
    }

    // Staged symmetrization: after stage m the polynomial is invariant
    // under permutations of the first m+1 active variables; the discarded
    // parts are transposition differences.
    let mut diffs: Vec<(usize, usize, Polynomial)> = Vec::new();
    let mut current = s.clone();
    for m in 1..active.len() {
        let scale = irat(1) / irat((m + 1) as i64);
        let mut avg = current.clone();
        for i in 0..m {
            let swapped = swap_vars(&current, active[i], active[m]);
            let diff = &current - &swapped;
            if !diff.is_zero() {
                let hi = assign_pair(&diff, active[i], true, active[m], false);
                let u = Polynomial::from_terms(
                    nvars,
                    hi.terms().map(|(mm, c)| (mm.clone(), c * &scale)),
                );
                debug_assert!({
                    let xt = Polynomial::var(nvars, active[i]);
                    let xm = Polynomial::var(nvars, active[m]);
                    let half = &(&xt - &xm) * &u;
                    let scaled = Polynomial::from_terms(
                        nvars,
                        diff.terms().map(|(mm, c)| (mm.clone(), c * &scale)),
                    );
                    half == scaled
                });
                diffs.push((active[i], active[m], u));
            }
            avg = &avg + &swapped;
        }
        current = Polynomial::from_terms(
            nvars,
            avg.terms().map(|(mm, c)| (mm.clone(), c * &scale)),
        );
    }

    // current is now symmetric in the active variables; its degree-t layer
    // is a multiple of the elementary symmetric e_t. Eliminate layers top
    // down with M_t = multilinearization of (sum - w)^t, whose leading
    // layer is t! e_t.
    let constraint = sum_minus(nvars, active, w);
    let degree = current.degree().unwrap_or(0);
    let mut power = Polynomial::one(nvars);
    let mut powers = vec![power.clone()];
    for _ in 0..degree {
        power = &power * &constraint;
        powers.push(power.clone());
    }
    let mut factorial = vec![Rat::one(); degree + 1];
    for t in 1..=degree {
        factorial[t] = &factorial[t - 1] * irat(t as i64);
    }
    for t in (1..=degree).rev() {
        let lead: Monomial = {
            let mut e = vec![0u32; nvars];
            for &i in &active[..t] {
                e[i] = 1;
            }
            Monomial(e)
        };
        let c = current.coeff(&lead);
        if c.is_zero() {
            continue;
        }
        let scale = c / &factorial[t];
        let (mt, bool_corrections) = powers[t].reduce_boolean();
        let scaled_mt = Polynomial::from_terms(
            nvars,
            mt.terms().map(|(mm, cc)| (mm.clone(), cc * &scale)),
        );
        current = &current - &scaled_mt;
        // M_t = (sum - w)^{t-1} (sum - w) - sum_i b_i (x_i^2 - x_i).
        out.sum = &out.sum
            + &Polynomial::from_terms(
                nvars,
                powers[t - 1]
                    .terms()
                    .map(|(mm, cc)| (mm.clone(), cc * &scale)),
            );
        for (i, b) in bool_corrections.into_iter().enumerate() {
            if !b.is_zero() {
                let scaled = Polynomial::from_terms(
                    nvars,
                    b.terms().map(|(mm, cc)| (mm.clone(), cc * &scale)),
                );
                out.bools[i] = &out.bools[i] - &scaled;
            }
        }
    }
    if !current.is_zero() {
        return Err(Error::SelfCheck(format!(
            "symmetric remainder should vanish, got {current}"
        )));
    }

    // Transposition differences: (x_t - x_m) u with u vanishing on weight
    // w - 1 assignments of the remaining active variables.
    for (t, m, u) in diffs {
        if w == 0 {
            // Weight-0 vanishing already forces u = 0 on the child set;
            // the guard d <= n keeps recursion from reaching this point
            // with nonzero u.
            return Err(Error::SelfCheck(
                "difference terms survived at weight zero".into(),
            ));
        }
        let child_active: Vec<usize> =
            active.iter().copied().filter(|&i| i != t && i != m).collect();
        let child = derive_level(nvars, &child_active, w - 1, &u)?;
        let xdiff = &Polynomial::var(nvars, t) - &Polynomial::var(nvars, m);
        for i in 0..nvars {
            if !child.bools[i].is_zero() {
                out.bools[i] = &out.bools[i] + &(&xdiff * &child.bools[i]);
            }
        }
        if !child.sum.is_zero() {
            // (x_t - x_m)(child sum) = (x_t - x_m)(level sum)
            //   - (x_t^2 - x_t) + (x_m^2 - x_m).
            out.sum = &out.sum + &(&xdiff * &child.sum);
            out.bools[t] = &out.bools[t] - &child.sum;
            out.bools[m] = &out.bools[m] + &child.sum;
        }
    }
    Ok(out)
}

/// Constructive derivation for the bisection system: any polynomial that
/// vanishes on every balanced 0/1 string is a combination of the Boolean
/// equalities and the sum constraint with summand degrees bounded by the
/// degree of the input.
pub fn derive_bisection(two_n: usize, r: &Polynomial) -> Result<Derivation> {
    let sys = crate::systems::max_bisection(two_n)?;
    if r.nvars() != two_n {
        return Err(Error::NvarsMismatch(r.nvars(), two_n));
    }
    let n = two_n / 2;
    let Some(d) = r.degree() else {
        return Ok(Derivation::zero(&sys, r.clone(), 0));
    };
    if d > n {
        return Err(Error::Guard(format!(
            "derivation route needs degree <= {n}, got {d}"
        )));
    }
    // Precondition: r vanishes on the solution set.
    for mask in 0u64..(1 << two_n) {
        if mask.count_ones() as usize == n && !r.evaluate_boolean(mask).is_zero() {
            return Err(Error::Precondition(format!(
                "target does not vanish on the balanced string {mask:#b}"
            )));
        }
    }

    let (star, bool_mults) = r.reduce_boolean();
    let active: Vec<usize> = (0..two_n).collect();
    let level = derive_level(two_n, &active, n, &star)?;

    let mut multipliers = Vec::with_capacity(two_n + 1);
    for i in 0..two_n {
        multipliers.push(&bool_mults[i] + &level.bools[i]);
    }
    multipliers.push(level.sum);

    let mut degree = d.max(1);
    for (mult, p) in multipliers.iter().zip(&sys.equalities) {
        if let Some(sd) = (mult * p).degree() {
            degree = degree.max(sd);
        }
    }
    let der = Derivation {
        target: r.clone(),
        degree,
        multipliers,
    };
    if !der.verify(&sys)?.is_valid() {
        return Err(Error::SelfCheck(
            "bisection derivation failed its own verification".into(),
        ));
    }
    Ok(der)
}

/// Constructive derivation for the sphere system: decide membership in the
/// ideal of sum x_i^2 - 1 by absorbing the lowest homogeneous layer into
/// the next one until the polynomial collapses or escapes upward.
pub fn derive_unit_vector(n: usize, p: &Polynomial) -> Result<Derivation> {
    let sys = crate::systems::unit_vector(n)?;
    if p.nvars() != n {
        return Err(Error::NvarsMismatch(p.nvars(), n));
    }
    let sphere = &sys.equalities[0];
    let deg = p.degree().unwrap_or(0);
    let mut f = p.clone();
    let mut acc = Polynomial::zero(n);
    while let Some(low) = f.min_degree() {
        if low > deg {
            break;
        }
        let layer = f.homogeneous_component(low);
        // f + layer (sphere) replaces the layer by layer * sum x^2.
        f = &f + &(&layer * sphere);
        acc = &acc + &layer;
    }
    if !f.is_zero() {
        return Err(Error::NotInIdeal(format!(
            "residue after absorbing into the sphere ideal: {f}"
        )));
    }
    let lambda = Polynomial::from_terms(
        n,
        acc.terms().map(|(m, c)| (m.clone(), -c)),
    );
    let degree = deg.max((&lambda * sphere).degree().unwrap_or(0));
    let der = Derivation {
        target: p.clone(),
        degree,
        multipliers: vec![lambda],
    };
    if !der.verify(&sys)?.is_valid() {
        return Err(Error::SelfCheck(
            "sphere derivation failed its own verification".into(),
        ));
    }
    Ok(der)
}

/// Reduction modulo the clique constraints: Boolean powers collapse and
/// monomials touching a non-edge vanish. Returns the reduced polynomial,
/// supported on clique monomials, with multipliers aligned to the clique
/// system's equality order.
#[derive(Debug, Clone, PartialEq)]
pub struct CliqueReduction {
    pub reduced: Polynomial,
    pub multipliers: Vec<Polynomial>,
}

pub fn reduce_clique(graph: &Graph, p: &Polynomial) -> Result<CliqueReduction> {
    let sys = crate::systems::max_clique(graph)?;
    let nv = sys.nvars;
    if p.nvars() != nv {
        return Err(Error::NvarsMismatch(p.nvars(), nv));
    }
    let nonedges: Vec<(usize, usize)> = {
        let mut v = Vec::new();
        for i in 0..nv {
            for j in (i + 1)..nv {
                if !graph.has_edge(i, j) {
                    v.push((i, j));
                }
            }
        }
        v
    };
    let (star, bool_mults) = p.reduce_boolean();
    let mut multipliers = bool_mults;
    multipliers.extend(vec![Polynomial::zero(nv); nonedges.len()]);

    let mut reduced = Polynomial::zero(nv);
    for (m, c) in star.terms() {
        let support: Vec<usize> = m.support().collect();
        let hit = nonedges.iter().position(|&(i, j)| {
            support.contains(&i) && support.contains(&j)
        });
        match hit {
            None => reduced.add_term(m.clone(), c.clone()),
            Some(idx) => {
                let (i, j) = nonedges[idx];
                let mut rest = m.0.clone();
                rest[i] = 0;
                rest[j] = 0;
                multipliers[nv + idx].add_term(Monomial(rest), c.clone());
            }
        }
    }

    // Self-check: p == reduced + sum multipliers * equalities.
    let mut sum = reduced.clone();
    for (mult, eq) in multipliers.iter().zip(&sys.equalities) {
        sum = &sum + &(mult * eq);
    }
    if &sum != p {
        return Err(Error::SelfCheck(
            "clique reduction does not reassemble its input".into(),
        ));
    }
    Ok(CliqueReduction {
        reduced,
        multipliers,
    })
}
