//! Exact characteristic polynomials of integer matrices.
//!
//! The computation runs modulo a set of word-sized primes (Hessenberg
//! reduction, then the Hessenberg determinant recurrence) and is recombined
//! by CRT with a symmetric lift. Reduction mod p commutes with taking the
//! characteristic polynomial, so every prime contributes a valid residue;
//! the prime set is sized from an a priori coefficient bound.

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::par::{self, Mode};
use crate::ratio::{ceil_log2_int, int_bits, Int};

/// Characteristic polynomial of a square integer matrix, coefficients in
/// descending power order: `out[0] = 1` is the coefficient of x^n.
pub fn charpoly_int(a: &Mat) -> Result<Vec<Int>> {
    charpoly_int_mode(Mode::Auto, a)
}

#[doc(hidden)]
pub fn charpoly_int_seq(a: &Mat) -> Result<Vec<Int>> {
    charpoly_int_mode(Mode::Seq, a)
}

fn charpoly_int_mode(mode: Mode, a: &Mat) -> Result<Vec<Int>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "characteristic polynomial of {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(vec![Int::one()]);
    }
    let entries: Vec<Int> = (0..n * n)
        .map(|i| {
            let v = a.at(i / n, i % n);
            if !v.denom().is_one() {
                return Err(Error::Guard("matrix entries must be integers".into()));
            }
            Ok(v.numer().clone())
        })
        .collect::<Result<_>>()?;

    // |c_k| = |sum of k x k principal minors| <= C(n,k) (B sqrt(k))^k, so
    // n + (n/2) log2(n) + n log2(B+1) bits covers every coefficient.
    let b = entries
        .iter()
        .map(Signed::abs)
        .max()
        .unwrap_or_else(Int::zero);
    let nn = n as u64;
    let bound_bits = nn + nn.div_ceil(2) * ceil_log2_int(&Int::from(n)) + nn * int_bits(&(b + 1)) + 2;

    let primes = primes_with_total_bits(bound_bits + 1);
    let residues = par::map_indexed(mode, primes.len(), |i| {
        let p = primes[i];
        let reduced: Vec<u64> = entries
            .iter()
            .map(|v| {
                num_integer::Integer::mod_floor(v, &Int::from(p))
                    .to_u64()
                    .expect("residue fits u64")
            })
            .collect();
        charpoly_mod_p(reduced, n, p)
    });

    // CRT per coefficient, then lift to the symmetric range.
    let mut modulus = Int::one();
    let mut coeffs = vec![Int::zero(); n + 1];
    for (res, &p) in residues.iter().zip(&primes) {
        let pi = Int::from(p);
        if modulus.is_one() {
            coeffs = res.iter().map(|&r| Int::from(r)).collect();
            modulus = pi;
            continue;
        }
        let m_mod_p = num_integer::Integer::mod_floor(&modulus, &pi)
            .to_u64()
            .unwrap();
        let m_inv = mod_inv(m_mod_p, p);
        for (c, &r) in coeffs.iter_mut().zip(res) {
            let c_mod_p = num_integer::Integer::mod_floor(&*c, &pi).to_u64().unwrap();
            let diff = mul_mod(sub_mod(r, c_mod_p, p), m_inv, p);
            *c += &modulus * Int::from(diff);
        }
        modulus *= pi;
    }
    let half = &modulus / 2;
    for c in coeffs.iter_mut() {
        if *c > half {
            *c -= &modulus;
        }
    }
    Ok(coeffs)
}

/// Characteristic polynomial mod p, descending powers, for the row-major
/// n x n matrix `data` with entries already reduced mod p.
fn charpoly_mod_p(mut data: Vec<u64>, n: usize, p: u64) -> Vec<u64> {
    hessenberg_mod_p(&mut data, n, p);
    let h = |i: usize, j: usize| data[i * n + j];

    // det(xI - H_k) expanded along the last column: subdiagonal entries chain
    // the minors, giving
    //   p_k = (x - h[k-1][k-1]) p_{k-1}
    //         - sum_i h[i-1][k-1] (prod_{j=i+1..=k} h[j-1][j-2]) p_{i-1}.
    let mut ps: Vec<Vec<u64>> = vec![vec![1]];
    for k in 1..=n {
        let prev = &ps[k - 1];
        let mut poly = vec![0u64; k + 1];
        let d = h(k - 1, k - 1);
        for (i, &c) in prev.iter().enumerate() {
            poly[i + 1] = add_mod(poly[i + 1], c, p);
            poly[i] = sub_mod(poly[i], mul_mod(d, c, p), p);
        }
        let mut prod = 1u64;
        for i in (1..k).rev() {
            prod = mul_mod(prod, h(i, i - 1), p);
            if prod == 0 {
                break;
            }
            let coef = mul_mod(h(i - 1, k - 1), prod, p);
            if coef == 0 {
                continue;
            }
            for (deg, &c) in ps[i - 1].iter().enumerate() {
                poly[deg] = sub_mod(poly[deg], mul_mod(coef, c, p), p);
            }
        }
        ps.push(poly);
    }
    let mut out = ps.pop().unwrap();
    out.reverse();
    out
}

/// Similarity reduction to upper Hessenberg form mod p.
fn hessenberg_mod_p(a: &mut [u64], n: usize, p: u64) {
    for k in 0..n.saturating_sub(2) {
        let Some(piv) = ((k + 1)..n).find(|&i| a[i * n + k] != 0) else {
            continue;
        };
        if piv != k + 1 {
            for j in 0..n {
                a.swap(piv * n + j, (k + 1) * n + j);
            }
            for i in 0..n {
                a.swap(i * n + piv, i * n + k + 1);
            }
        }
        let inv = mod_inv(a[(k + 1) * n + k], p);
        for i in (k + 2)..n {
            if a[i * n + k] == 0 {
                continue;
            }
            let m = mul_mod(a[i * n + k], inv, p);
            for j in k..n {
                let s = mul_mod(m, a[(k + 1) * n + j], p);
                a[i * n + j] = sub_mod(a[i * n + j], s, p);
            }
            for r in 0..n {
                let s = mul_mod(m, a[r * n + i], p);
                a[r * n + k + 1] = add_mod(a[r * n + k + 1], s, p);
            }
        }
    }
}

fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + p as u128 - b as u128) % p as u128) as u64
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn mod_inv(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller-Rabin; the witness set below decides primality for
/// every u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for w in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(w, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct primes just below 2^62 whose bit lengths sum past `bits`.
fn primes_with_total_bits(bits: u64) -> Vec<u64> {
    let mut primes = Vec::new();
    let mut total = 0u64;
    let mut candidate = (1u64 << 62) - 1;
    while total <= bits {
        while !is_prime_u64(candidate) {
            candidate -= 2;
        }
        primes.push(candidate);
        total += 61;
        candidate -= 2;
    }
    primes
}
