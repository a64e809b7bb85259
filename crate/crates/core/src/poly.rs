//! Sparse multivariate polynomials over arbitrary-precision rationals.
//!
//! The monomial order is graded lexicographic: lower total degree first,
//! and within a degree the variable with the smaller index dominates, so
//! for two variables the basis reads 1, x1, x2, x1^2, x1*x2, x2^2. Every
//! ordered basis in the crate (moment matrices, Gram blocks, kernel
//! vectors) uses this order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ratio::{rat_bits, rat_to_string, Int, Rat};

/// Exponent vector of a monomial x^alpha. The length always equals the
/// owning polynomial's variable count.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    /// The constant monomial 1.
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    /// The single variable x_i (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range {nvars}");
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn is_multilinear(&self) -> bool {
        self.0.iter().all(|&e| e <= 1)
    }

    /// Entrywise exponent sum: the product monomial.
    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Indices of variables with positive exponent.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
    }

    /// Evaluate at a rational point.
    pub fn evaluate(&self, point: &[Rat]) -> Rat {
        let mut acc = Rat::one();
        for (x, &e) in point.iter().zip(&self.0) {
            if e > 0 {
                acc *= crate::ratio::pow_rat(x, e as u64);
            }
        }
        acc
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        // Graded lex: degree first; ties broken so that a higher exponent
        // on an earlier variable sorts earlier (x1^2 before x1*x2).
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "x{}", i + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// All monomials in `nvars` variables of total degree <= d, in the crate's
/// graded-lex order. Length C(nvars + d, d).
pub fn monomial_basis(nvars: usize, d: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut exps = vec![0u32; nvars];
    push_monomials(&mut out, &mut exps, 0, d);
    out.sort();
    out
}

fn push_monomials(out: &mut Vec<Monomial>, exps: &mut Vec<u32>, var: usize, left: usize) {
    if var == exps.len() {
        out.push(Monomial(exps.clone()));
        return;
    }
    for e in 0..=left {
        exps[var] = e as u32;
        push_monomials(out, exps, var + 1, left - e);
    }
    exps[var] = 0;
}

/// Coefficient norms: the max absolute coefficient and the total bit size
/// of all numerators and denominators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientStats {
    #[serde(
        serialize_with = "crate::poly::ser_rat",
        deserialize_with = "crate::poly::de_rat"
    )]
    pub max_abs_coeff: Rat,
    pub bit_size: u64,
}

impl CoefficientStats {
    pub fn zero() -> Self {
        CoefficientStats {
            max_abs_coeff: Rat::zero(),
            bit_size: 0,
        }
    }

    /// Fold another coefficient into the stats.
    pub fn absorb(&mut self, c: &Rat) {
        let a = c.abs();
        if a > self.max_abs_coeff {
            self.max_abs_coeff = a;
        }
        self.bit_size += rat_bits(c);
    }

    /// Merge two stat records (disjoint coefficient multisets).
    pub fn merge(&mut self, other: &CoefficientStats) {
        if other.max_abs_coeff > self.max_abs_coeff {
            self.max_abs_coeff = other.max_abs_coeff.clone();
        }
        self.bit_size += other.bit_size;
    }
}

pub(crate) fn ser_rat<S: Serializer>(q: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rat_to_string(q))
}

pub(crate) fn de_rat<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
    let s = String::deserialize(d)?;
    crate::ratio::parse_rat(&s).map_err(serde::de::Error::custom)
}

/// Sparse polynomial in canonical form: a map from monomials to nonzero
/// rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = Polynomial::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Polynomial::constant(nvars, Rat::one())
    }

    /// The single variable x_i (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Polynomial::zero(nvars);
        p.add_term(Monomial::var(nvars, i), Rat::one());
        p
    }

    /// c * x^m.
    pub fn from_monomial(nvars: usize, m: Monomial, c: Rat) -> Self {
        assert_eq!(m.nvars(), nvars);
        let mut p = Polynomial::zero(nvars);
        p.add_term(m, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rat)>>(nvars: usize, iter: I) -> Self {
        let mut p = Polynomial::zero(nvars);
        for (m, c) in iter {
            assert_eq!(m.nvars(), nvars);
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `None` for the zero polynomial (the -infinity
    /// sentinel, below every integer).
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    /// Add `c * x^m`, keeping canonical form.
    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn same_nvars(&self, other: &Polynomial) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::NvarsMismatch(self.nvars, other.nvars));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.same_nvars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.same_nvars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.same_nvars(other)?;
        let mut out = Polynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rat) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a * c))
                .collect(),
        }
    }

    /// Exact evaluation at a rational point.
    pub fn evaluate(&self, point: &[Rat]) -> Result<Rat> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, polynomial has {} variables",
                point.len(),
                self.nvars
            )));
        }
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            acc += c * m.evaluate(point);
        }
        Ok(acc)
    }

    /// Evaluation at a 0/1 point given as a bitmask (bit i = variable i).
    ///
    /// A monomial contributes exactly when its support lies in the mask, so
    /// this skips all exponent arithmetic during hypercube enumeration.
    pub fn evaluate_boolean(&self, mask: u64) -> Rat {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut inside = true;
            for i in m.support() {
                if mask & (1 << i) == 0 {
                    inside = false;
                    break;
                }
            }
            if inside {
                acc += c;
            }
        }
        acc
    }

    /// Multilinearize against the Boolean relations x_i^2 = x_i.
    ///
    /// Returns `(p_star, lambda)` with `p_star` multilinear and
    /// `p - p_star = sum_i lambda[i] * (x_i^2 - x_i)` exactly; every
    /// `deg(lambda[i]) + 2 <= deg(p)`.
    pub fn reduce_boolean(&self) -> (Polynomial, Vec<Polynomial>) {
        let mut mults = vec![Polynomial::zero(self.nvars); self.nvars];
        let mut out = Polynomial::zero(self.nvars);
        let mut work: Vec<(Monomial, Rat)> =
            self.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        while let Some((m, c)) = work.pop() {
            match m.0.iter().position(|&e| e >= 2) {
                None => out.add_term(m, c),
                Some(i) => {
                    // x_i^e R = x_i^{e-1} R + x_i^{e-2} R * (x_i^2 - x_i)
                    let mut lower = m.clone();
                    lower.0[i] -= 1;
                    let mut mult = m;
                    mult.0[i] -= 2;
                    mults[i].add_term(mult, c.clone());
                    work.push((lower, c));
                }
            }
        }
        (out, mults)
    }

    /// Average over all variable-label permutations. Guarded at 10
    /// variables to bound the factorial blowup.
    pub fn symmetrize(&self) -> Result<Polynomial> {
        use itertools::Itertools;
        if self.nvars > 10 {
            return Err(Error::Guard(format!(
                "symmetrize supports at most 10 variables, got {}",
                self.nvars
            )));
        }
        let n = self.nvars;
        if n <= 1 {
            return Ok(self.clone());
        }
        let mut acc = Polynomial::zero(n);
        let mut count: u64 = 0;
        for perm in (0..n).permutations(n) {
            count += 1;
            for (m, c) in &self.terms {
                let mut e = vec![0u32; n];
                for (i, &ei) in m.0.iter().enumerate() {
                    e[perm[i]] = ei;
                }
                acc.add_term(Monomial(e), c.clone());
            }
        }
        Ok(acc.scale(&Rat::new(Int::one(), Int::from(count))))
    }

    /// Exact coefficient norms in the monomial basis.
    pub fn coeff_stats(&self) -> CoefficientStats {
        let mut stats = CoefficientStats::zero();
        for c in self.terms.values() {
            stats.absorb(c);
        }
        stats
    }

    /// Substitute each variable by a polynomial (all over `new_nvars`
    /// variables). Exact ring homomorphism.
    pub fn substitute(&self, images: &[Polynomial], new_nvars: usize) -> Result<Polynomial> {
        if images.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "{} substitution images for {} variables",
                images.len(),
                self.nvars
            )));
        }
        for im in images {
            if im.nvars() != new_nvars {
                return Err(Error::NvarsMismatch(im.nvars(), new_nvars));
            }
        }
        let mut acc = Polynomial::zero(new_nvars);
        for (m, c) in &self.terms {
            let mut prod = Polynomial::constant(new_nvars, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    prod = prod.checked_mul(&images[i])?;
                }
            }
            acc = acc.checked_add(&prod)?;
        }
        Ok(acc)
    }

    /// The homogeneous component of total degree `k`.
    pub fn homogeneous_component(&self, k: usize) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Minimum total degree over the support; `None` for zero.
    pub fn min_degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.degree()).min()
    }
}

/// The checked three-way arithmetic entry point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Exact `p op q`; errors on a variable-count mismatch.
pub fn arith(p: &Polynomial, q: &Polynomial, op: ArithOp) -> Result<Polynomial> {
    match op {
        ArithOp::Add => p.checked_add(q),
        ArithOp::Sub => p.checked_sub(q),
        ArithOp::Mul => p.checked_mul(q),
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.checked_add(rhs).expect("nvars mismatch")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.checked_sub(rhs).expect("nvars mismatch")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.checked_mul(rhs).expect("nvars mismatch")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rat::one())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if m.degree() == 0 {
                write!(f, "{}", rat_to_string(&a))?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", rat_to_string(&a))?;
            }
        }
        Ok(())
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<TermJson> = self
            .terms
            .iter()
            .map(|(m, c)| TermJson {
                exps: m.0.clone(),
                num: c.numer().to_string(),
                den: c.denom().to_string(),
            })
            .collect();
        PolyJson {
            nvars: self.nvars,
            terms,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PolyJson::deserialize(d)?;
        let mut p = Polynomial::zero(raw.nvars);
        for t in raw.terms {
            if t.exps.len() != raw.nvars {
                return Err(D::Error::custom(format!(
                    "term has {} exponents, expected {}",
                    t.exps.len(),
                    raw.nvars
                )));
            }
            let num: Int = t
                .num
                .parse()
                .map_err(|_| D::Error::custom(format!("bad numerator {:?}", t.num)))?;
            let den: Int = t
                .den
                .parse()
                .map_err(|_| D::Error::custom(format!("bad denominator {:?}", t.den)))?;
            if !den.is_positive() {
                return Err(D::Error::custom("denominator must be positive"));
            }
            if num.is_zero() {
                return Err(D::Error::custom("zero coefficient stored"));
            }
            if num.gcd(&den) != Int::one() {
                return Err(D::Error::custom(format!(
                    "coefficient {}/{} is not reduced",
                    num, den
                )));
            }
            let m = Monomial(t.exps);
            if p.terms.contains_key(&m) {
                return Err(D::Error::custom(format!("duplicate monomial {m}")));
            }
            p.add_term(m, Rat::new(num, den));
        }
        Ok(p)
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exps: Vec<u32>,
    num: String,
    den: String,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    nvars: usize,
    terms: Vec<TermJson>,
}
