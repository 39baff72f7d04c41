//! Exact rational numbers.
//!
//! Every coefficient in the library is a [`Rational`]: an arbitrary-precision
//! fraction kept in lowest terms with a positive denominator. There is no
//! floating point in the core and no tolerance parameter anywhere.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub use num_rational::BigRational as Rational;

/// Builds `numer/denom`. Panics on a zero denominator.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational token `{0}`")]
pub struct RationalParseError(pub String);

/// Parses `"a/b"` or `"a"`. Signs are allowed on the numerator only.
pub fn parse_rational(token: &str) -> Result<Rational, RationalParseError> {
    let err = || RationalParseError(token.to_string());
    let (numer, denom) = match token.split_once('/') {
        Some((n, d)) => (n, d),
        None => (token, "1"),
    };
    if denom.starts_with(['-', '+']) {
        return Err(err());
    }
    let numer = BigInt::from_str(numer).map_err(|_| err())?;
    let denom = BigInt::from_str(denom).map_err(|_| err())?;
    if denom.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(numer, denom))
}

/// Renders as `"a/b"`, or `"a"` for integers.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

pub fn is_integer(value: &Rational) -> bool {
    value.is_integer()
}

pub fn is_positive(value: &Rational) -> bool {
    value.is_positive()
}

pub fn is_negative(value: &Rational) -> bool {
    value.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("4/8").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("-3/2").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational("0").unwrap(), zero());
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "a", "1/2/3", "1/-2", "1.5", "/2", "1/"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn formats_in_lowest_terms() {
        assert_eq!(format_rational(&ratio(2, 4)), "1/2");
        assert_eq!(format_rational(&ratio(6, 3)), "2");
        assert_eq!(format_rational(&ratio(3, -6)), "-1/2");
    }

    // Cross-multiplication over plain integers is the independent route.
    fn reduce(n: i64, d: i64) -> (i64, i64) {
        fn gcd(a: i64, b: i64) -> i64 {
            if b == 0 {
                a.abs()
            } else {
                gcd(b, a % b)
            }
        }
        let g = gcd(n, d).max(1);
        let (n, d) = (n / g, d / g);
        if d < 0 {
            (-n, -d)
        } else {
            (n, d)
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn addition_matches_cross_multiplication(
            a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 1i64..50
        ) {
            let sum = ratio(a, b) + ratio(c, d);
            let (n, dd) = reduce(a * d + c * b, b * d);
            prop_assert_eq!(sum.numer().clone(), BigInt::from(n));
            prop_assert_eq!(sum.denom().clone(), BigInt::from(dd));
            prop_assert!(sum.denom() > &BigInt::zero());
        }

        #[test]
        fn product_and_order_match_integers(
            a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 1i64..50
        ) {
            let (n, dd) = reduce(a * c, b * d);
            prop_assert_eq!(ratio(a, b) * ratio(c, d), ratio(n, dd));
            prop_assert_eq!(ratio(a, b) < ratio(c, d), a * d < c * b);
        }

        #[test]
        fn format_parse_round_trip(a in -1000i64..1000, b in 1i64..1000) {
            let r = ratio(a, b);
            prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}
