//! Exact rational scalars and their text form.
//!
//! Every mass, coordinate, and matrix cost in this crate is a
//! [`Rational`].  The text form accepted by [`parse_rational`] is either a
//! fraction `"-3/4"`, an integer `"12"`, or a finite decimal `"0.25"`;
//! all three are converted without rounding.  [`format_rational`] always
//! emits the reduced fraction (`"n"` when the denominator is one), so a
//! parse/format round trip is the identity on reduced fractions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Shorthand used pervasively in tests and examples.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

fn parse_bigint(text: &str, whole: &str) -> Result<BigInt> {
    whole
        .parse::<BigInt>()
        .map_err(|_| Error::Parse(format!("invalid rational literal {text:?}")))
}

/// Parses `"a/b"`, `"a"`, or a finite decimal such as `"-1.75"`.
///
/// Whitespace around the literal is ignored.  Exponents are not accepted:
/// inputs are meant to be exact, and `1e-3` style literals are a common
/// sign that a float snuck into a data file.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    if let Some((numer, denom)) = s.split_once('/') {
        let n = parse_bigint(text, numer.trim())?;
        let d = parse_bigint(text, denom.trim())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("invalid decimal literal {text:?}")));
        }
        let negative = int_part.starts_with('-');
        let int = if int_part == "-" || int_part == "+" || int_part.is_empty() {
            BigInt::zero()
        } else {
            parse_bigint(text, int_part)?
        };
        let scale = BigInt::from(10u8).pow(frac_part.len() as u32);
        let frac = parse_bigint(text, frac_part)?;
        let mut numer = int.abs() * &scale + frac;
        if negative {
            numer = -numer;
        }
        return Ok(Rational::new(numer, scale));
    }
    Ok(Rational::from(parse_bigint(text, s)?))
}

/// Reduced-fraction text form: `"n/d"` with positive `d`, or `"n"` for integers.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-3/4").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("3/-4").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("6/8").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("12").unwrap(), rat(12, 1));
        assert_eq!(parse_rational(" -12 ").unwrap(), rat(-12, 1));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.75").unwrap(), rat(-7, 4));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("2.").is_err());
        assert_eq!(parse_rational("0.1").unwrap(), rat(1, 10));
    }

    #[test]
    fn rejects_malformed_literals() {
        for bad in ["", "1/0", "a", "1e-3", "1.2.3", "1/ /2", "--1", "0x10", "1.-2"] {
            assert!(parse_rational(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn formats_reduced_fractions() {
        assert_eq!(format_rational(&rat(3, 4)), "3/4");
        assert_eq!(format_rational(&rat(-6, 8)), "-3/4");
        assert_eq!(format_rational(&rat(5, 1)), "5");
        assert_eq!(format_rational(&rat(0, 7)), "0");
    }

    #[test]
    fn round_trips_through_text() {
        for r in [rat(0, 1), rat(7, 3), rat(-22, 7), rat(1, 1000000), rat(45, 9)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}
