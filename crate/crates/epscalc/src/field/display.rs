//! Canonical text form for field elements.
//!
//! The syntax is a fraction of integer-coefficient Laurent polynomials in
//! `e`, e.g. `(2*e)/(1 - e)`. Printing then re-parsing yields an equal
//! element.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::element::FieldElement;
use super::poly::Poly;

struct IntLaurent {
    shift: i64,
    coeffs: Vec<BigInt>,
}

fn common_denominator(polys: &[&Poly]) -> BigInt {
    let mut l = BigInt::one();
    for p in polys {
        for c in p.coeffs() {
            l = l.lcm(c.denom());
        }
    }
    l
}

fn to_int_laurent(p: &Poly, shift: i64, scale: &BigInt) -> IntLaurent {
    let coeffs = p
        .coeffs()
        .iter()
        .map(|c| c.numer() * scale / c.denom())
        .collect();
    IntLaurent { shift, coeffs }
}

fn write_int_term(f: &mut fmt::Formatter<'_>, mag: &BigInt, exp: i64) -> fmt::Result {
    if exp == 0 {
        return write!(f, "{}", mag);
    }
    if !mag.is_one() {
        write!(f, "{}*", mag)?;
    }
    if exp == 1 {
        write!(f, "e")
    } else {
        write!(f, "e^{}", exp)
    }
}

fn write_laurent(f: &mut fmt::Formatter<'_>, p: &IntLaurent) -> fmt::Result {
    let mut first = true;
    for (k, c) in p.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let exp = p.shift + k as i64;
        let mag = c.abs();
        if first {
            if c.is_negative() {
                write!(f, "-")?;
            }
            write_int_term(f, &mag, exp)?;
            first = false;
        } else {
            write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
            write_int_term(f, &mag, exp)?;
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let scale = common_denominator(&[self.num(), self.den()]);
        let num = to_int_laurent(self.num(), self.shift(), &scale);
        let den = to_int_laurent(self.den(), 0, &scale);
        if den.coeffs.len() == 1 && den.coeffs[0].is_one() {
            write_laurent(f, &num)
        } else {
            write!(f, "(")?;
            write_laurent(f, &num)?;
            write!(f, ")/(")?;
            write_laurent(f, &den)?;
            write!(f, ")")
        }
    }
}
