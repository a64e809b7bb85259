//! Cross-checks the modular characteristic polynomial against an
//! independent exact Faddeev-LeVerrier implementation and Sturm counting.

mod common;

use common::{charpoly_exact, distinct_roots_in_open};
use proptest::prelude::*;
use soslab_core::charpoly::{charpoly_int, charpoly_int_seq};
use soslab_core::matrix::Mat;
use soslab_core::ratio::{irat, rat, Int, Rat};

fn as_rat(v: &[Int]) -> Vec<Rat> {
    v.iter().map(|c| Rat::from_integer(c.clone())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn matches_exact_recurrence(
        n in 1usize..=5,
        seed in prop::collection::vec(-9i64..=9, 25),
    ) {
        let a = Mat::from_fn(n, n, |i, j| irat(seed[i * 5 + j]));
        let fast = charpoly_int(&a).unwrap();
        prop_assert_eq!(as_rat(&fast), charpoly_exact(&a));
        prop_assert_eq!(charpoly_int_seq(&a).unwrap(), fast);
    }
}

#[test]
fn multi_prime_reconstruction() {
    // Large entries at dimension 12 force several CRT primes.
    let a = Mat::from_fn(12, 12, |i, j| {
        irat(((i * 37 + j * 91) % 199) as i64 - 99)
    });
    let fast = charpoly_int(&a).unwrap();
    assert_eq!(as_rat(&fast), charpoly_exact(&a));
}

#[test]
fn sturm_root_counts() {
    // (x-1)(x-2)(x-3): three roots in (0, 4), one in (0, 3/2).
    let p = vec![irat(1), irat(-6), irat(11), irat(-6)];
    assert_eq!(distinct_roots_in_open(&p, &irat(0), &irat(4)), 3);
    assert_eq!(distinct_roots_in_open(&p, &irat(0), &rat(3, 2)), 1);
    // Endpoint roots are excluded by the open interval.
    assert_eq!(distinct_roots_in_open(&p, &irat(1), &irat(3)), 1);
    // Repeated roots count once: x^2 (x - 1)^2.
    let q = vec![irat(1), irat(-2), irat(1), irat(0), irat(0)];
    assert_eq!(distinct_roots_in_open(&q, &irat(-1), &irat(2)), 2);
    assert_eq!(distinct_roots_in_open(&q, &rat(1, 2), &irat(2)), 1);
}
