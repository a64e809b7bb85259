//! Arbitrary-precision rational scalars and the bit measures used in
//! every coefficient-size report.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rat = BigRational;

/// `n` as a big integer.
pub fn int(n: i64) -> Int {
    Int::from(n)
}

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

/// `n` as an exact rational.
pub fn irat(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

/// Bits of the magnitude: ceil(log2(|x|+1)). Zero for x = 0.
pub fn int_bits(x: &Int) -> u64 {
    x.magnitude().bits()
}

/// Smallest t >= 0 with 2^t >= x, for integer x >= 1.
pub fn ceil_log2_int(x: &Int) -> u64 {
    debug_assert!(x.is_positive());
    (x - 1u8).magnitude().bits()
}

/// Bit size of a rational: bits(|num|) + ceil(log2(den)).
///
/// This is the representation measure every CSV/stats table uses; it is 0
/// exactly for the zero rational and 1 for ±1.
pub fn rat_bits(q: &Rat) -> u64 {
    int_bits(q.numer()) + ceil_log2_int(q.denom())
}

/// Smallest t >= 0 with 2^t >= q. Zero for q <= 1.
pub fn ceil_log2_rat(q: &Rat) -> u64 {
    if q <= &Rat::one() {
        return 0;
    }
    // 2^t * den >= num; start from the bit-length gap and correct by one.
    let num = q.numer();
    let den = q.denom();
    let guess = int_bits(num).saturating_sub(den.bits()).saturating_sub(1);
    let mut t = guess;
    let mut pow = den * (Int::one() << guess);
    while &pow < num {
        pow *= 2;
        t += 1;
    }
    t
}

/// q^e by repeated squaring, exact.
pub fn pow_rat(q: &Rat, e: u64) -> Rat {
    if e == 0 {
        return Rat::one();
    }
    let mut base = q.clone();
    let mut exp = e;
    let mut acc = Rat::one();
    while exp > 1 {
        if exp & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        exp >>= 1;
    }
    acc * base
}

/// Render as `"num"` or `"num/den"`, matching [`parse_rat`].
pub fn rat_to_string(q: &Rat) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parse `"num"` or `"num/den"` in decimal; the denominator must be
/// positive. The result is reduced.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = || Error::Parse(format!("bad rational literal {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: Int = num.trim().parse().map_err(|_| bad())?;
    let den: Int = den.trim().parse().map_err(|_| bad())?;
    if !den.is_positive() {
        return Err(Error::Parse(format!(
            "denominator must be positive in {s:?}"
        )));
    }
    Ok(Rat::new(num, den))
}

/// Exact check `q == 0`.
pub fn is_zero(q: &Rat) -> bool {
    q.numer().is_zero()
}

/// Serde adapter: `Rat` as a decimal string.
pub(crate) mod rat_string {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{parse_rat, rat_to_string, Rat};

    pub fn serialize<S: Serializer>(
        v: &Rat,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&rat_to_string(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: `Option<Rat>` as an optional decimal string.
pub(crate) mod opt_rat_string {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{parse_rat, rat_to_string, Rat};

    pub fn serialize<S: Serializer>(
        v: &Option<Rat>,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(q) => serializer.serialize_some(&rat_to_string(q)),
            None => serializer.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Option<Rat>, D::Error> {
        let s = Option::<String>::deserialize(deserializer)?;
        s.map(|s| parse_rat(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_measures() {
        assert_eq!(int_bits(&int(0)), 0);
        assert_eq!(int_bits(&int(1)), 1);
        assert_eq!(int_bits(&int(-8)), 4);
        assert_eq!(ceil_log2_int(&int(1)), 0);
        assert_eq!(ceil_log2_int(&int(2)), 1);
        assert_eq!(ceil_log2_int(&int(3)), 2);
        assert_eq!(ceil_log2_int(&int(9)), 4);

        assert_eq!(rat_bits(&rat(0, 1)), 0);
        assert_eq!(rat_bits(&rat(1, 1)), 1);
        assert_eq!(rat_bits(&rat(-3, 7)), 2 + 3);
        assert_eq!(rat_bits(&rat(8, 1)), 4);
    }

    #[test]
    fn ceil_log2_rational() {
        assert_eq!(ceil_log2_rat(&rat(1, 2)), 0);
        assert_eq!(ceil_log2_rat(&rat(1, 1)), 0);
        assert_eq!(ceil_log2_rat(&rat(3, 2)), 1);
        assert_eq!(ceil_log2_rat(&rat(4, 1)), 2);
        assert_eq!(ceil_log2_rat(&rat(9, 2)), 3);
        assert_eq!(ceil_log2_rat(&rat(4096, 1)), 12);
        assert_eq!(ceil_log2_rat(&rat(4097, 1)), 13);
    }

    #[test]
    fn pow_and_strings() {
        assert_eq!(pow_rat(&rat(1, 2), 4), rat(1, 16));
        assert_eq!(pow_rat(&rat(-2, 3), 3), rat(-8, 27));
        assert_eq!(pow_rat(&rat(7, 5), 0), rat(1, 1));

        for s in ["3", "-3", "3/7", "-22/7", "0"] {
            let q = parse_rat(s).unwrap();
            assert_eq!(rat_to_string(&q), s);
        }
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("1/-2").is_err());
        assert!(parse_rat("x").is_err());
        // Unreduced input parses to the reduced value.
        assert_eq!(parse_rat("2/4").unwrap(), rat(1, 2));
    }
}
