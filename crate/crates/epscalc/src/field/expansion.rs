//! Truncated Laurent expansions, obtained from the exact representation
//! by long division of the numerator by the denominator.

use std::fmt;

use num_traits::{One, Signed, Zero};

use super::element::FieldElement;
use super::Rat;

/// Coefficients of an element for exponents `v0 .. precision-1`, all exact.
///
/// For a nonzero element with valuation below `precision`, `v0` is the
/// valuation and `coeffs[0]` is nonzero. Otherwise (zero, or everything
/// below `precision` vanishes) `coeffs` is empty and `v0 == precision`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    v0: i64,
    coeffs: Vec<Rat>,
    precision: i64,
}

impl Expansion {
    pub fn v0(&self) -> i64 {
        self.v0
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn precision(&self) -> i64 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `e^exp`; zero below `v0`, `None` at or above the
    /// precision bound where nothing is known.
    pub fn coeff_at(&self, exp: i64) -> Option<Rat> {
        if exp >= self.precision {
            return None;
        }
        if exp < self.v0 {
            return Some(Rat::zero());
        }
        Some(self.coeffs[(exp - self.v0) as usize].clone())
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.first()
    }
}

impl FieldElement {
    /// Expand to exact coefficients for all exponents below `precision`.
    pub fn expand(&self, precision: i64) -> Expansion {
        if self.is_zero() || self.shift() >= precision {
            return Expansion {
                v0: precision,
                coeffs: Vec::new(),
                precision,
            };
        }
        let v0 = self.shift();
        let len = (precision - v0) as usize;
        let den = self.den();
        let num = self.num();
        let mut coeffs = Vec::with_capacity(len);
        for k in 0..len {
            // den has constant term 1, so the series inverse recurrence is
            // c_k = num_k - sum_{t>=1} den_t * c_{k-t}.
            let mut c = num.coeff(k);
            let tmax = k.min(den.degree().unwrap_or(0));
            for t in 1..=tmax {
                let d = den.coeff(t);
                if !d.is_zero() {
                    c -= d * &coeffs[k - t];
                }
            }
            coeffs.push(c);
        }
        debug_assert!(!coeffs[0].is_zero());
        Expansion {
            v0,
            coeffs,
            precision,
        }
    }
}

fn write_rat(f: &mut fmt::Formatter<'_>, q: &Rat) -> fmt::Result {
    if q.denom().is_one() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, q: &Rat, exp: i64) -> fmt::Result {
    if exp == 0 {
        return write_rat(f, q);
    }
    if !q.is_one() {
        write_rat(f, q)?;
        write!(f, "*")?;
    }
    if exp == 1 {
        write!(f, "e")
    } else {
        write!(f, "e^{}", exp)
    }
}

impl fmt::Display for Expansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let exp = self.v0 + k as i64;
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                write_term(f, &mag, exp)?;
                first = false;
            } else {
                write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
                write_term(f, &mag, exp)?;
            }
        }
        if first {
            write!(f, "O(e^{})", self.precision)
        } else {
            write!(f, " + O(e^{})", self.precision)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    #[test]
    fn geometric_expansion() {
        // 2e/(1-e) = 2e + 2e^2 + 2e^3 + ...
        let e = FieldElement::epsilon();
        let x = FieldElement::from_int(2) * &e / (FieldElement::one() - &e);
        let exp = x.expand(4);
        assert_eq!(exp.v0(), 1);
        assert_eq!(exp.coeffs(), &[rat(2, 1), rat(2, 1), rat(2, 1)]);
    }

    #[test]
    fn constant_expansion_pads_zeros() {
        let exp = FieldElement::one().expand(3);
        assert_eq!(exp.v0(), 0);
        assert_eq!(exp.coeffs(), &[rat(1, 1), rat(0, 1), rat(0, 1)]);
    }

    #[test]
    fn squared_geometric() {
        // 1/(1-e)^2 = 1 + 2e + 3e^2 + 4e^3 + ...
        let e = FieldElement::epsilon();
        let x = (FieldElement::one() - &e).pow(-2);
        let exp = x.expand(4);
        assert_eq!(exp.coeffs(), &[rat(1, 1), rat(2, 1), rat(3, 1), rat(4, 1)]);
    }

    #[test]
    fn agreement_across_precisions() {
        let e = FieldElement::epsilon();
        let x = (FieldElement::one() + &e) / (FieldElement::one() - &e - e.pow(3));
        let small = x.expand(5);
        let large = x.expand(12);
        for k in -2..5 {
            assert_eq!(small.coeff_at(k), large.coeff_at(k));
        }
    }

    #[test]
    fn expansion_consistent_with_subtraction() {
        // a - (partial expansion) must have valuation >= P
        let e = FieldElement::epsilon();
        let x = FieldElement::from_int(3) / (FieldElement::one() - e.pow(2));
        let p = 9;
        let exp = x.expand(p);
        let mut partial = FieldElement::zero();
        for (k, c) in exp.coeffs().iter().enumerate() {
            partial = partial + FieldElement::monomial(c.clone(), exp.v0() + k as i64);
        }
        assert!((x - partial).valuation().at_least(p));
    }

    #[test]
    fn display_matches_cli_format() {
        let e = FieldElement::epsilon();
        let x = FieldElement::one() / (FieldElement::one() - &e);
        assert_eq!(x.expand(5).to_string(), "1 + e + e^2 + e^3 + e^4 + O(e^5)");
        assert_eq!(FieldElement::zero().expand(3).to_string(), "O(e^3)");
        let y = FieldElement::from_ratio(-3, 2) * e.pow(-2);
        assert_eq!(y.expand(1).to_string(), "-3/2*e^-2 + O(e^1)");
    }
}
