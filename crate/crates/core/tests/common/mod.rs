//! Shared exact oracles for integration tests: a slow-but-simple
//! characteristic polynomial (Faddeev-LeVerrier) and Sturm-sequence real
//! root counting. These are independent reimplementations used to
//! cross-check the production code paths.

#![allow(dead_code)]

use num_traits::{One, Signed, Zero};
use soslab_core::matrix::Mat;
use soslab_core::ratio::{irat, Rat};

/// Characteristic polynomial by the Faddeev-LeVerrier recurrence,
/// coefficients in descending power order (monic).
pub fn charpoly_exact(a: &Mat) -> Vec<Rat> {
    assert!(a.is_square());
    let n = a.rows();
    let mut coeffs = vec![Rat::one()];
    let mut m = Mat::identity(n);
    for k in 1..=n {
        let am = a.matmul(&m).unwrap();
        let c = -am.trace() / irat(k as i64);
        coeffs.push(c.clone());
        m = am;
        for i in 0..n {
            let v = m.at(i, i) + &c;
            m.set(i, i, v);
        }
    }
    coeffs
}

fn poly_trim(p: &mut Vec<Rat>) {
    while p.first().is_some_and(Rat::is_zero) {
        p.remove(0);
    }
}

fn poly_eval(p: &[Rat], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in p {
        acc = acc * x + c;
    }
    acc
}

fn poly_derivative(p: &[Rat]) -> Vec<Rat> {
    let n = p.len();
    if n <= 1 {
        return vec![];
    }
    p[..n - 1]
        .iter()
        .enumerate()
        .map(|(i, c)| c * irat((n - 1 - i) as i64))
        .collect()
}

/// Remainder of a divided by b, descending coefficients.
fn poly_rem(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    assert!(!b.is_empty());
    let mut r: Vec<Rat> = a.to_vec();
    while r.len() >= b.len() {
        let lead = r[0].clone() / &b[0];
        if !lead.is_zero() {
            for (i, bc) in b.iter().enumerate() {
                let v = &r[i] - &(bc * &lead);
                r[i] = v;
            }
        }
        r.remove(0);
    }
    poly_trim(&mut r);
    r
}

/// Exact quotient a / b; panics if the division leaves a remainder.
fn poly_div_exact(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    assert!(!b.is_empty());
    let mut r: Vec<Rat> = a.to_vec();
    let mut q = Vec::new();
    while r.len() >= b.len() {
        let lead = r[0].clone() / &b[0];
        q.push(lead.clone());
        for (i, bc) in b.iter().enumerate() {
            let v = &r[i] - &(bc * &lead);
            r[i] = v;
        }
        r.remove(0);
    }
    poly_trim(&mut r);
    assert!(r.is_empty(), "inexact polynomial division");
    q
}

fn poly_gcd(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b);
        a = b;
        b = r;
    }
    // Normalize to a monic gcd so exact divisions stay clean.
    if let Some(lead) = a.first().cloned() {
        for c in a.iter_mut() {
            *c = c.clone() / &lead;
        }
    }
    a
}

/// Sturm chain of a square-free p (leading coefficient nonzero).
fn sturm_chain(p: &[Rat]) -> Vec<Vec<Rat>> {
    let mut chain = vec![p.to_vec(), poly_derivative(p)];
    poly_trim(&mut chain[0]);
    poly_trim(&mut chain[1]);
    loop {
        let k = chain.len();
        if chain[k - 1].is_empty() {
            chain.pop();
            break;
        }
        if chain[k - 1].len() == 1 {
            break;
        }
        let mut r = poly_rem(&chain[k - 2], &chain[k - 1]);
        for c in r.iter_mut() {
            *c = -c.clone();
        }
        chain.push(r);
    }
    chain
}

fn sign_variations(chain: &[Vec<Rat>], x: &Rat) -> usize {
    let mut signs = chain
        .iter()
        .map(|p| poly_eval(p, x))
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive());
    let mut count = 0;
    if let Some(mut prev) = signs.next() {
        for s in signs {
            if s != prev {
                count += 1;
            }
            prev = s;
        }
    }
    count
}

/// Number of distinct real roots of p in the open interval (lo, hi).
///
/// Works for repeated roots and for endpoints that are themselves roots:
/// the square-free part is taken first and rational endpoint roots are
/// divided out exactly, leaving the textbook Sturm setting.
pub fn distinct_roots_in_open(p: &[Rat], lo: &Rat, hi: &Rat) -> usize {
    assert!(lo < hi);
    let mut q = p.to_vec();
    poly_trim(&mut q);
    assert!(!q.is_empty(), "zero polynomial has no isolated roots");
    if q.len() == 1 {
        return 0;
    }
    let g = poly_gcd(&q, &poly_derivative(&q));
    if g.len() > 1 {
        q = poly_div_exact(&q, &g);
    }
    for endpoint in [lo, hi] {
        if poly_eval(&q, endpoint).is_zero() {
            q = poly_div_exact(&q, &[Rat::one(), -endpoint.clone()]);
        }
    }
    if q.len() == 1 {
        return 0;
    }
    let chain = sturm_chain(&q);
    sign_variations(&chain, lo) - sign_variations(&chain, hi)
}
