//! Constraint systems: equality/inequality descriptions of solution sets,
//! a registry of named families, and Boolean solution enumeration.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Mode};
use crate::poly::Polynomial;
use crate::ratio::{irat, opt_rat_string, rat, Rat};

/// How the solution set is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionKind {
    /// Finite subset of the Boolean cube; can be listed exhaustively.
    Enumerable,
    /// The unit sphere; moments come from the closed form instead.
    Sphere,
}

/// A polynomial system: equalities p = 0, inequalities q >= 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSystem {
    pub nvars: usize,
    pub equalities: Vec<Polynomial>,
    pub inequalities: Vec<Polynomial>,
    pub label: String,
    pub solution_kind: SolutionKind,
    /// Scale parameter of the chain families; carried so downstream
    /// commands can rebuild targets without re-parsing arguments.
    #[serde(default, with = "opt_rat_string")]
    pub chain_eps: Option<Rat>,
}

/// Solutions of an enumerable system, each point a bitmask over variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    pub nvars: usize,
    pub points: Vec<u32>,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Average of p over the solution set.
    pub fn average(&self, p: &Polynomial) -> Result<Rat> {
        if p.nvars() != self.nvars {
            return Err(Error::NvarsMismatch(p.nvars(), self.nvars));
        }
        if self.points.is_empty() {
            return Err(Error::EmptySolutionSet);
        }
        let sum: Rat = self
            .points
            .iter()
            .map(|&m| p.evaluate_boolean(m as u64))
            .sum();
        Ok(sum / irat(self.points.len() as i64))
    }
}

/// Variables appearing in any constraint must evaluate; enumeration walks
/// all 2^nvars masks, so the cube is capped at 24 variables.
pub const ENUMERATION_CAP: usize = 24;

impl ConstraintSystem {
    /// Does the Boolean point given by `mask` satisfy every constraint?
    pub fn is_solution(&self, mask: u64) -> bool {
        self.equalities
            .iter()
            .all(|p| p.evaluate_boolean(mask).is_zero())
            && self
                .inequalities
                .iter()
                .all(|q| !q.evaluate_boolean(mask).is_negative())
    }

    pub fn enumerate_solutions(&self) -> Result<SolutionSet> {
        self.enumerate_solutions_mode(Mode::Auto)
    }

    #[doc(hidden)]
    pub fn enumerate_solutions_seq(&self) -> Result<SolutionSet> {
        self.enumerate_solutions_mode(Mode::Seq)
    }

    fn enumerate_solutions_mode(&self, mode: Mode) -> Result<SolutionSet> {
        if self.solution_kind != SolutionKind::Enumerable {
            return Err(Error::NotEnumerable);
        }
        if self.nvars > ENUMERATION_CAP {
            return Err(Error::NotEnumerable);
        }
        let total: u64 = 1u64 << self.nvars;
        let chunks = 256.min(total) as usize;
        let per = total.div_ceil(chunks as u64);
        let found = par::map_indexed(mode, chunks, |c| {
            let lo = c as u64 * per;
            let hi = total.min(lo + per);
            (lo..hi)
                .filter(|&m| self.is_solution(m))
                .map(|m| m as u32)
                .collect::<Vec<u32>>()
        });
        Ok(SolutionSet {
            nvars: self.nvars,
            points: found.into_iter().flatten().collect(),
        })
    }

    /// Largest absolute value of any coordinate of any solution. Both the
    /// Boolean cube and the unit sphere sit inside the unit box.
    pub fn solution_norm_bound(&self) -> Rat {
        Rat::one()
    }

    /// Largest absolute coefficient across all constraints.
    pub fn constraint_coeff_bound(&self) -> Rat {
        self.equalities
            .iter()
            .chain(&self.inequalities)
            .map(|p| p.coeff_stats().max_abs_coeff)
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

fn var(n: usize, i: usize) -> Polynomial {
    Polynomial::var(n, i)
}

fn boolean_eq(n: usize, i: usize) -> Polynomial {
    let x = var(n, i);
    &(&x * &x) - &x
}

fn sum_of_vars(n: usize, vars: impl IntoIterator<Item = usize>) -> Polynomial {
    vars.into_iter()
        .fold(Polynomial::zero(n), |acc, i| &acc + &var(n, i))
}

fn check_eps(eps: &Rat) -> Result<()> {
    if !eps.is_positive() || *eps >= rat(1, 2) {
        return Err(Error::Guard(format!(
            "eps must lie in (0, 1/2), got {eps}"
        )));
    }
    Ok(())
}

/// y_i^2 = y_{i+1} for i < n, y_n^2 = 0. The only solution is the origin.
pub fn chain(n: usize, eps: &Rat) -> Result<ConstraintSystem> {
    if n == 0 {
        return Err(Error::Guard("chain needs at least one variable".into()));
    }
    check_eps(eps)?;
    let mut equalities = Vec::with_capacity(n);
    for i in 0..n {
        let sq = &var(n, i) * &var(n, i);
        equalities.push(if i + 1 < n {
            &sq - &var(n, i + 1)
        } else {
            sq
        });
    }
    Ok(ConstraintSystem {
        nvars: n,
        equalities,
        inequalities: vec![],
        label: "chain".into(),
        solution_kind: SolutionKind::Enumerable,
        chain_eps: Some(eps.clone()),
    })
}

/// Chain composed with block sums of Boolean variables: n blocks of 2k
/// variables, L_i = (sum of block i) - k, constraints L_i^2 = L_{i+1},
/// L_n^2 = 0, plus Booleanity. Chain images come first, then the Boolean
/// equalities in variable order.
pub fn boolean_chain(n: usize, k: usize, eps: &Rat) -> Result<ConstraintSystem> {
    if n == 0 || k == 0 {
        return Err(Error::Guard("boolean chain needs n, k >= 1".into()));
    }
    check_eps(eps)?;
    let nv = 2 * k * n;
    let block = |i: usize| {
        let s = sum_of_vars(nv, (0..2 * k).map(|j| i * 2 * k + j));
        &s - &Polynomial::constant(nv, irat(k as i64))
    };
    let mut equalities = Vec::with_capacity(n + nv);
    for i in 0..n {
        let l = block(i);
        let sq = &l * &l;
        equalities.push(if i + 1 < n { &sq - &block(i + 1) } else { sq });
    }
    for v in 0..nv {
        equalities.push(boolean_eq(nv, v));
    }
    Ok(ConstraintSystem {
        nvars: nv,
        equalities,
        inequalities: vec![],
        label: "boolean_chain".into(),
        solution_kind: SolutionKind::Enumerable,
        chain_eps: Some(eps.clone()),
    })
}

/// The full Boolean cube: Booleanity only.
pub fn max_csp(n: usize) -> Result<ConstraintSystem> {
    if n == 0 {
        return Err(Error::Guard("max_csp needs at least one variable".into()));
    }
    Ok(ConstraintSystem {
        nvars: n,
        equalities: (0..n).map(|i| boolean_eq(n, i)).collect(),
        inequalities: vec![],
        label: "max_csp".into(),
        solution_kind: SolutionKind::Enumerable,
        chain_eps: None,
    })
}

/// Undirected simple graph on vertices 0..nvertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub nvertices: usize,
    pub edges: BTreeSet<(u32, u32)>,
}

impl Graph {
    pub fn new(nvertices: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b || a as usize >= nvertices || b as usize >= nvertices {
                return Err(Error::Guard(format!("bad edge ({a}, {b})")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Graph {
            nvertices,
            edges: set,
        })
    }

    pub fn complete(nvertices: usize) -> Self {
        let edges = (0..nvertices as u32)
            .flat_map(|i| ((i + 1)..nvertices as u32).map(move |j| (i, j)))
            .collect();
        Graph { nvertices, edges }
    }

    pub fn empty(nvertices: usize) -> Self {
        Graph {
            nvertices,
            edges: BTreeSet::new(),
        }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let (a, b) = (i.min(j) as u32, i.max(j) as u32);
        self.edges.contains(&(a, b))
    }
}

/// Clique indicators: Booleanity, then x_i x_j = 0 for every non-edge
/// (lexicographic). Solutions are exactly the cliques of the graph.
pub fn max_clique(g: &Graph) -> Result<ConstraintSystem> {
    let n = g.nvertices;
    if n == 0 {
        return Err(Error::Guard("max_clique needs at least one vertex".into()));
    }
    let mut equalities: Vec<Polynomial> = (0..n).map(|i| boolean_eq(n, i)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if !g.has_edge(i, j) {
                equalities.push(&var(n, i) * &var(n, j));
            }
        }
    }
    Ok(ConstraintSystem {
        nvars: n,
        equalities,
        inequalities: vec![],
        label: "max_clique".into(),
        solution_kind: SolutionKind::Enumerable,
        chain_eps: None,
    })
}

/// Exact bisection of 2n vertices: Booleanity, then sum x - n = 0 last.
pub fn max_bisection(two_n: usize) -> Result<ConstraintSystem> {
    if two_n == 0 || two_n % 2 != 0 {
        return Err(Error::Guard(format!(
            "bisection needs a positive even variable count, got {two_n}"
        )));
    }
    let mut equalities: Vec<Polynomial> = (0..two_n).map(|i| boolean_eq(two_n, i)).collect();
    let sum = sum_of_vars(two_n, 0..two_n);
    equalities.push(&sum - &Polynomial::constant(two_n, irat((two_n / 2) as i64)));
    Ok(ConstraintSystem {
        nvars: two_n,
        equalities,
        inequalities: vec![],
        label: "max_bisection".into(),
        solution_kind: SolutionKind::Enumerable,
        chain_eps: None,
    })
}

/// Separator-size window: Booleanity plus the two threshold inequalities
/// 2n/3 + 1/2 - sum x >= 0 and sum x - n/3 + 1/2 >= 0.
pub fn balanced_separator(n: usize) -> Result<ConstraintSystem> {
    if n == 0 {
        return Err(Error::Guard(
            "balanced_separator needs at least one vertex".into(),
        ));
    }
    let sum = sum_of_vars(n, 0..n);
    let upper = &Polynomial::constant(n, rat(2 * n as i64, 3) + rat(1, 2)) - &sum;
    let lower = &sum - &Polynomial::constant(n, rat(n as i64, 3) - rat(1, 2));
    Ok(ConstraintSystem {
        nvars: n,
        equalities: (0..n).map(|i| boolean_eq(n, i)).collect(),
        inequalities: vec![upper, lower],
        label: "balanced_separator".into(),
        solution_kind: SolutionKind::Enumerable,
        chain_eps: None,
    })
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    // Pairs (0,1), (0,2), ..., (0,n-1), (1,2), ... in lexicographic order.
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Perfect matchings of K_n: one variable per unordered pair, Booleanity,
/// then products of pairs sharing an endpoint, then per-vertex degree sums.
pub fn matching(n: usize) -> Result<ConstraintSystem> {
    if n < 2 {
        return Err(Error::Guard("matching needs at least two vertices".into()));
    }
    let nv = n * (n - 1) / 2;
    if nv > ENUMERATION_CAP {
        return Err(Error::Guard(format!(
            "matching on {n} vertices needs {nv} variables, cap is {ENUMERATION_CAP}"
        )));
    }
    let mut equalities: Vec<Polynomial> = (0..nv).map(|i| boolean_eq(nv, i)).collect();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    for a in 0..pairs.len() {
        for b in (a + 1)..pairs.len() {
            let (i1, j1) = pairs[a];
            let (i2, j2) = pairs[b];
            if i1 == i2 || i1 == j2 || j1 == i2 || j1 == j2 {
                equalities.push(&var(nv, a) * &var(nv, b));
            }
        }
    }
    for v in 0..n {
        let incident = pairs
            .iter()
            .enumerate()
            .filter(|(_, &(i, j))| i == v || j == v)
            .map(|(idx, _)| idx);
        let s = sum_of_vars(nv, incident);
        equalities.push(&s - &Polynomial::one(nv));
    }
    debug_assert_eq!(pair_index(n, 0, 1), 0);
    Ok(ConstraintSystem {
        nvars: nv,
        equalities,
        inequalities: vec![],
        label: "matching".into(),
        solution_kind: SolutionKind::Enumerable,
        chain_eps: None,
    })
}

/// The unit sphere: sum x_i^2 = 1.
pub fn unit_vector(n: usize) -> Result<ConstraintSystem> {
    if n == 0 {
        return Err(Error::Guard("unit_vector needs at least one variable".into()));
    }
    let sq = (0..n).fold(Polynomial::zero(n), |acc, i| {
        &acc + &(&var(n, i) * &var(n, i))
    });
    Ok(ConstraintSystem {
        nvars: n,
        equalities: vec![&sq - &Polynomial::one(n)],
        inequalities: vec![],
        label: "unit_vector".into(),
        solution_kind: SolutionKind::Sphere,
        chain_eps: None,
    })
}

/// Build a registry system from a compact textual form:
///
/// - `chain:<n>:<eps>`
/// - `boolean_chain:<n>:<k>:<eps>`
/// - `max_csp:<n>`
/// - `max_clique:<v>:complete` | `max_clique:<v>:empty` | `max_clique:<v>:0-1,1-2`
/// - `max_bisection:<2n>`
/// - `balanced_separator:<n>`
/// - `matching:<n>`
/// - `unit_vector:<n>`
pub fn from_spec_string(s: &str) -> Result<ConstraintSystem> {
    let parts: Vec<&str> = s.split(':').collect();
    let usage = || Error::Parse(format!("unrecognized system spec '{s}'"));
    let num = |t: &str| -> Result<usize> { t.parse::<usize>().map_err(|_| usage()) };
    match parts.as_slice() {
        ["chain", n, eps] => chain(num(n)?, &crate::ratio::parse_rat(eps)?),
        ["boolean_chain", n, k, eps] => {
            boolean_chain(num(n)?, num(k)?, &crate::ratio::parse_rat(eps)?)
        }
        ["max_csp", n] => max_csp(num(n)?),
        ["max_clique", v, desc] => {
            let v = num(v)?;
            let g = match *desc {
                "complete" => Graph::complete(v),
                "empty" => Graph::empty(v),
                edges => {
                    let pairs: Result<Vec<(u32, u32)>> = edges
                        .split(',')
                        .map(|e| {
                            let (a, b) = e.split_once('-').ok_or_else(usage)?;
                            Ok((
                                a.parse().map_err(|_| usage())?,
                                b.parse().map_err(|_| usage())?,
                            ))
                        })
                        .collect();
                    Graph::new(v, pairs?)?
                }
            };
            max_clique(&g)
        }
        ["max_bisection", n] => max_bisection(num(n)?),
        ["balanced_separator", n] => balanced_separator(num(n)?),
        ["matching", n] => matching(num(n)?),
        ["unit_vector", n] => unit_vector(num(n)?),
        _ => Err(usage()),
    }
}
