//! Polynomial arithmetic: frozen worked examples and algebraic properties.

use num_traits::{One, Zero};
use proptest::prelude::*;
use soslab_core::poly::{arith, monomial_basis, ArithOp, Monomial, Polynomial};
use soslab_core::ratio::{irat, rat, Rat};

fn x(nvars: usize, i: usize) -> Polynomial {
    Polynomial::var(nvars, i)
}

#[test]
fn difference_of_squares() {
    let n = 1;
    let p = &x(n, 0) + &Polynomial::one(n);
    let q = &x(n, 0) - &Polynomial::one(n);
    let prod = arith(&p, &q, ArithOp::Mul).unwrap();
    let mut expect = Polynomial::zero(n);
    expect.add_term(Monomial(vec![2]), irat(1));
    expect.add_term(Monomial(vec![0]), irat(-1));
    assert_eq!(prod, expect);
}

#[test]
fn add_zero_is_identity() {
    let n = 3;
    let p = &(&x(n, 0) * &x(n, 1)).scale(&rat(7, 3)) - &x(n, 2);
    assert_eq!(arith(&p, &Polynomial::zero(n), ArithOp::Add).unwrap(), p);
}

#[test]
fn binomial_square() {
    let n = 2;
    let s = &x(n, 0) + &x(n, 1);
    let sq = &s * &s;
    let mut expect = Polynomial::zero(n);
    expect.add_term(Monomial(vec![2, 0]), irat(1));
    expect.add_term(Monomial(vec![1, 1]), irat(2));
    expect.add_term(Monomial(vec![0, 2]), irat(1));
    assert_eq!(sq, expect);
}

#[test]
fn nvars_mismatch_is_an_error() {
    let p = Polynomial::one(2);
    let q = Polynomial::one(3);
    assert!(arith(&p, &q, ArithOp::Add).is_err());
}

#[test]
fn evaluate_examples() {
    let n = 1;
    let p = &(&x(n, 0) * &x(n, 0)) - &x(n, 0); // x^2 - x
    assert_eq!(p.evaluate(&[irat(1)]).unwrap(), Rat::zero());
    assert_eq!(p.evaluate(&[rat(1, 2)]).unwrap(), rat(-1, 4));
    assert!(p.evaluate(&[irat(0), irat(0)]).is_err());

    // Bisection constraint vanishes on every weight-n Boolean point.
    let m = 4;
    let sum = (0..m).fold(Polynomial::constant(m, irat(-2)), |acc, i| &acc + &x(m, i));
    assert_eq!(
        sum.evaluate(&[irat(1), irat(0), irat(1), irat(0)]).unwrap(),
        Rat::zero()
    );
    assert_eq!(sum.evaluate_boolean(0b0101), Rat::zero());
    assert_eq!(sum.evaluate_boolean(0b0111), Rat::one());
}

#[test]
fn basis_order_and_size() {
    let b = monomial_basis(2, 1);
    assert_eq!(
        b,
        vec![
            Monomial(vec![0, 0]),
            Monomial(vec![1, 0]),
            Monomial(vec![0, 1])
        ]
    );

    let b = monomial_basis(1, 2);
    assert_eq!(
        b,
        vec![Monomial(vec![0]), Monomial(vec![1]), Monomial(vec![2])]
    );

    assert_eq!(monomial_basis(3, 2).len(), 10);

    // Graded lex within degree 2 of two variables: x1^2, x1x2, x2^2.
    let b = monomial_basis(2, 2);
    assert_eq!(
        &b[3..],
        &[
            Monomial(vec![2, 0]),
            Monomial(vec![1, 1]),
            Monomial(vec![0, 2])
        ]
    );
}

#[test]
fn reduce_boolean_cube() {
    // x1^3 -> x1 with multiplier (x1 + 1) on x1^2 - x1.
    let n = 1;
    let p = Polynomial::from_monomial(n, Monomial(vec![3]), irat(1));
    let (star, mults) = p.reduce_boolean();
    assert_eq!(star, x(n, 0));
    assert_eq!(mults.len(), 1);
    assert_eq!(mults[0], &x(n, 0) + &Polynomial::one(n));
}

#[test]
fn reduce_boolean_fixed_point() {
    let n = 3;
    let p = &(&x(n, 0) * &x(n, 1)) + &x(n, 2);
    let (star, mults) = p.reduce_boolean();
    assert_eq!(star, p);
    assert!(mults.iter().all(|m| m.is_zero()));
}

#[test]
fn reduce_boolean_mixed() {
    // x1^2 x2 -> x1 x2 with multiplier x2.
    let n = 2;
    let p = Polynomial::from_monomial(n, Monomial(vec![2, 1]), irat(1));
    let (star, mults) = p.reduce_boolean();
    assert_eq!(star, &x(n, 0) * &x(n, 1));
    assert_eq!(mults[0], x(n, 1));
    assert!(mults[1].is_zero());
}

#[test]
fn symmetrize_examples() {
    let p = x(2, 0);
    let s = p.symmetrize().unwrap();
    assert_eq!(s, (&x(2, 0) + &x(2, 1)).scale(&rat(1, 2)));

    // Symmetric input is a fixed point.
    let q = &(&x(2, 0) * &x(2, 1)) + &(&x(2, 0) + &x(2, 1));
    assert_eq!(q.symmetrize().unwrap(), q);

    // x1 x2 over 3 vars -> (x1x2 + x1x3 + x2x3)/3.
    let p = &x(3, 0) * &x(3, 1);
    let expect = (&(&(&x(3, 0) * &x(3, 1)) + &(&x(3, 0) * &x(3, 2))) + &(&x(3, 1) * &x(3, 2)))
        .scale(&rat(1, 3));
    assert_eq!(p.symmetrize().unwrap(), expect);

    assert!(Polynomial::one(11).symmetrize().is_err());
}

#[test]
fn coeff_stats_examples() {
    let n = 1;
    let p = &x(n, 0).scale(&irat(3)) - &Polynomial::constant(n, irat(7));
    let st = p.coeff_stats();
    assert_eq!(st.max_abs_coeff, irat(7));

    let st = Polynomial::zero(2).coeff_stats();
    assert_eq!(st.max_abs_coeff, Rat::zero());
    assert_eq!(st.bit_size, 0);

    // bit measure: 3 -> 2 bits, -7 -> 3 bits.
    assert_eq!(p.coeff_stats().bit_size, 2 + 3);
}

#[test]
fn json_round_trip_is_bit_exact() {
    let n = 3;
    let mut p = Polynomial::zero(n);
    p.add_term(Monomial(vec![2, 0, 1]), rat(-22, 7));
    p.add_term(Monomial(vec![0, 0, 0]), rat(1, 1));
    p.add_term(Monomial(vec![1, 1, 1]), rat(5, 3));
    let s = serde_json::to_string(&p).unwrap();
    let q: Polynomial = serde_json::from_str(&s).unwrap();
    assert_eq!(p, q);
    let s2 = serde_json::to_string(&q).unwrap();
    assert_eq!(s, s2);
}

#[test]
fn json_rejects_malformed_input() {
    // Wrong exponent arity.
    let bad = r#"{"nvars":2,"terms":[{"exps":[1],"num":"1","den":"1"}]}"#;
    assert!(serde_json::from_str::<Polynomial>(bad).is_err());
    // Non-positive denominator.
    let bad = r#"{"nvars":1,"terms":[{"exps":[1],"num":"1","den":"-2"}]}"#;
    assert!(serde_json::from_str::<Polynomial>(bad).is_err());
    // Unreduced fraction.
    let bad = r#"{"nvars":1,"terms":[{"exps":[1],"num":"2","den":"4"}]}"#;
    assert!(serde_json::from_str::<Polynomial>(bad).is_err());
    // Stored zero coefficient.
    let bad = r#"{"nvars":1,"terms":[{"exps":[1],"num":"0","den":"1"}]}"#;
    assert!(serde_json::from_str::<Polynomial>(bad).is_err());
    // Duplicate monomial.
    let bad = r#"{"nvars":1,"terms":[{"exps":[1],"num":"1","den":"1"},{"exps":[1],"num":"2","den":"1"}]}"#;
    assert!(serde_json::from_str::<Polynomial>(bad).is_err());
}

fn arb_poly(nvars: usize, max_deg: u32, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    let term = (
        prop::collection::vec(0..=max_deg, nvars),
        -20i64..=20,
        1i64..=6,
    );
    prop::collection::vec(term, 0..=max_terms).prop_map(move |ts| {
        let mut p = Polynomial::zero(nvars);
        for (exps, num, den) in ts {
            p.add_term(Monomial(exps), rat(num, den));
        }
        p
    })
}

fn arb_point(nvars: usize) -> impl Strategy<Value = Vec<Rat>> {
    prop::collection::vec((-9i64..=9, 1i64..=4).prop_map(|(n, d)| rat(n, d)), nvars)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws((p, q, r) in (arb_poly(3, 2, 5), arb_poly(3, 2, 5), arb_poly(3, 2, 5))) {
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
    }

    #[test]
    fn evaluation_is_a_homomorphism(
        (p, q) in (arb_poly(3, 2, 5), arb_poly(3, 2, 5)),
        pt in arb_point(3),
    ) {
        let lhs = (&p * &q).evaluate(&pt).unwrap();
        let rhs = p.evaluate(&pt).unwrap() * q.evaluate(&pt).unwrap();
        prop_assert_eq!(lhs, rhs);
        let lhs = (&p + &q).evaluate(&pt).unwrap();
        let rhs = p.evaluate(&pt).unwrap() + q.evaluate(&pt).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn reduce_boolean_identity(p in arb_poly(3, 4, 6)) {
        let (star, mults) = p.reduce_boolean();
        prop_assert!(star.terms().all(|(m, _)| m.is_multilinear()));
        // Re-expand sum_i mults[i] * (x_i^2 - x_i) and compare.
        let n = p.nvars();
        let mut acc = star;
        for (i, lam) in mults.iter().enumerate() {
            let xi = Polynomial::var(n, i);
            let boolean = &(&xi * &xi) - &xi;
            acc = &acc + &(lam * &boolean);
            if let (Some(dl), Some(dp)) = ((lam * &boolean).degree(), p.degree()) {
                prop_assert!(dl <= dp);
            }
        }
        prop_assert_eq!(acc, p);
    }

    #[test]
    fn symmetrize_idempotent_and_degree_bounded(p in arb_poly(4, 3, 5)) {
        let s = p.symmetrize().unwrap();
        prop_assert_eq!(s.symmetrize().unwrap(), s.clone());
        match (s.degree(), p.degree()) {
            (Some(ds), Some(dp)) => prop_assert!(ds <= dp),
            (Some(_), None) => prop_assert!(false, "symmetrize created terms from zero"),
            _ => {}
        }
    }

    #[test]
    fn json_round_trip(p in arb_poly(3, 3, 6)) {
        let s = serde_json::to_string(&p).unwrap();
        let q: Polynomial = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(p, q);
    }
}
