//! Exact elements of the field Q((e)): reduced rational functions in the
//! infinitesimal `e`, with integer exponents allowed in the numerator.
//!
//! Canonical form:
//! - zero is `shift = 0, num = 0, den = 1`;
//! - otherwise `num` has a nonzero constant term (all powers of `e` are
//!   factored into `shift`), `den` has constant term 1, and
//!   `gcd(num, den) = 1` as polynomials.
//!
//! Structural equality therefore coincides with mathematical equality,
//! and the total order of the field is decided by the sign of the lowest
//! expansion coefficient.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::poly::Poly;
use super::{rat, rat_int, Rat};
use crate::valuation::Valuation;

/// Errors from partial field operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldError {
    DivisionByZero,
    /// 0 raised to a negative power.
    ZeroToNegativePower,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::DivisionByZero => write!(f, "division by zero"),
            FieldError::ZeroToNegativePower => write!(f, "zero raised to a negative power"),
        }
    }
}

impl std::error::Error for FieldError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    /// Power of `e` factored out of the numerator.
    shift: i64,
    /// Numerator polynomial; nonzero constant term unless the element is zero.
    num: Poly,
    /// Denominator polynomial with constant term 1.
    den: Poly,
}

impl FieldElement {
    /// Build from `e^shift * num / den` and put into canonical form.
    /// Panics if `den` is the zero polynomial.
    pub fn from_parts(shift: i64, num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "field element with zero denominator");
        if num.is_zero() {
            return FieldElement {
                shift: 0,
                num: Poly::zero(),
                den: Poly::one(),
            };
        }
        let mut shift = shift;
        let mut num = num;
        let mut den = den;
        // Factor powers of e out of both polynomials.
        if let Some(k) = num.low_order() {
            if k > 0 {
                num = num.shift_down(k);
                shift += k as i64;
            }
        }
        if let Some(k) = den.low_order() {
            if k > 0 {
                den = den.shift_down(k);
                shift -= k as i64;
            }
        }
        // Reduce.
        if !den.is_one() {
            let g = num.gcd(&den);
            if !g.is_one() {
                num = num.exact_div(&g);
                den = den.exact_div(&g);
            }
        }
        // Normalize the denominator's constant term to 1.
        let c = den.eval_at_zero();
        debug_assert!(!c.is_zero());
        if !c.is_one() {
            let inv = Rat::one() / &c;
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        FieldElement { shift, num, den }
    }

    /// Canonicalize parts that are already known to be gcd-reduced:
    /// factor powers of `e` into the shift and scale the denominator's
    /// constant term to 1.
    fn reduced_parts(shift: i64, num: Poly, den: Poly) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return FieldElement::zero();
        }
        let mut shift = shift;
        let mut num = num;
        let mut den = den;
        if let Some(k) = num.low_order() {
            if k > 0 {
                num = num.shift_down(k);
                shift += k as i64;
            }
        }
        if let Some(k) = den.low_order() {
            if k > 0 {
                den = den.shift_down(k);
                shift -= k as i64;
            }
        }
        let c = den.eval_at_zero();
        if !c.is_one() {
            let inv = Rat::one() / &c;
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        FieldElement { shift, num, den }
    }

    pub fn zero() -> Self {
        FieldElement {
            shift: 0,
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        FieldElement {
            shift: 0,
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    /// Constant element from a rational.
    pub fn from_rational(q: Rat) -> Self {
        if q.is_zero() {
            FieldElement::zero()
        } else {
            FieldElement {
                shift: 0,
                num: Poly::constant(q),
                den: Poly::one(),
            }
        }
    }

    pub fn from_int(n: i64) -> Self {
        FieldElement::from_rational(rat_int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        FieldElement::from_rational(rat(num, den))
    }

    /// The infinitesimal generator `e`.
    pub fn epsilon() -> Self {
        FieldElement {
            shift: 1,
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    /// The infinite element `w = e^-1`.
    pub fn omega() -> Self {
        FieldElement {
            shift: -1,
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    /// `c * e^k`
    pub fn monomial(c: Rat, k: i64) -> Self {
        if c.is_zero() {
            return FieldElement::zero();
        }
        FieldElement {
            shift: k,
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn eps_pow(k: i64) -> Self {
        FieldElement::monomial(Rat::one(), k)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.shift == 0 && self.num.is_one() && self.den.is_one()
    }

    pub(crate) fn shift(&self) -> i64 {
        self.shift
    }

    pub(crate) fn num(&self) -> &Poly {
        &self.num
    }

    pub(crate) fn den(&self) -> &Poly {
        &self.den
    }

    /// Lowest `e`-exponent; `Infinite` for zero.
    pub fn valuation(&self) -> Valuation {
        if self.is_zero() {
            Valuation::Infinite
        } else {
            Valuation::Finite(self.shift)
        }
    }

    /// True iff powers of the element tend to zero, i.e. valuation >= 1.
    pub fn is_topologically_nilpotent(&self) -> bool {
        self.valuation().at_least(1)
    }

    pub fn checked_inv(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let c = self.num.eval_at_zero();
        let inv = Rat::one() / &c;
        Ok(FieldElement {
            shift: -self.shift,
            num: self.den.scale(&inv),
            den: self.num.scale(&inv),
        })
    }

    pub fn checked_div(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self * &other.checked_inv()?)
    }

    /// Integer power; negative exponents invert first.
    pub fn checked_pow(&self, exp: i64) -> Result<FieldElement, FieldError> {
        if exp < 0 {
            if self.is_zero() {
                return Err(FieldError::ZeroToNegativePower);
            }
            return self.checked_inv()?.checked_pow(-exp);
        }
        let mut result = FieldElement::one();
        let mut base = self.clone();
        let mut e = exp as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    pub fn pow(&self, exp: i64) -> FieldElement {
        self.checked_pow(exp).expect("invalid power")
    }

    /// Sign with respect to the field order: -1, 0, or 1.
    pub fn sign(&self) -> i32 {
        // den(0) = 1 > 0, so the sign near 0+ is the sign of the lowest
        // numerator coefficient.
        self.num.low_sign()
    }

    /// Total order of the ordered field (e is a positive infinitesimal).
    pub fn cmp_order(&self, other: &FieldElement) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        match (self - other).sign() {
            s if s > 0 => Ordering::Greater,
            s if s < 0 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign() < 0
    }

    /// Order-theoretic absolute value, an element of the field itself.
    pub fn abs(&self) -> FieldElement {
        if self.sign() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn min_order(a: &FieldElement, b: &FieldElement) -> FieldElement {
        if a.cmp_order(b) == Ordering::Greater {
            b.clone()
        } else {
            a.clone()
        }
    }

    pub fn max_order(a: &FieldElement, b: &FieldElement) -> FieldElement {
        if a.cmp_order(b) == Ordering::Less {
            b.clone()
        } else {
            a.clone()
        }
    }
}

impl Default for FieldElement {
    fn default() -> Self {
        FieldElement::zero()
    }
}

// Arithmetic keeps fractions reduced through cross-gcds against the
// (typically low-degree) denominators instead of one gcd of the full
// products, which avoids the coefficient blow-up of long Euclidean
// remainder sequences on large numerators.

fn add_elements(a: &FieldElement, b: &FieldElement) -> FieldElement {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    let s = a.shift.min(b.shift);
    let na = a.num.shift_up((a.shift - s) as usize);
    let nb = b.num.shift_up((b.shift - s) as usize);
    if a.den.is_one() && b.den.is_one() {
        return FieldElement::reduced_parts(s, na.add(&nb), Poly::one());
    }
    // With g = gcd of the denominators, the sum is t / (g * a' * b') and
    // t is automatically coprime to a' and b'; only gcd(t, g) remains.
    let g = a.den.gcd(&b.den);
    let (a_red, b_red) = if g.is_one() {
        (a.den.clone(), b.den.clone())
    } else {
        (a.den.exact_div(&g), b.den.exact_div(&g))
    };
    let t = na.mul(&b_red).add(&nb.mul(&a_red));
    if t.is_zero() {
        return FieldElement::zero();
    }
    let h = t.gcd(&g);
    let (t, g) = if h.is_one() {
        (t, g)
    } else {
        (t.exact_div(&h), g.exact_div(&h))
    };
    FieldElement::reduced_parts(s, t, g.mul(&a_red).mul(&b_red))
}

fn mul_elements(a: &FieldElement, b: &FieldElement) -> FieldElement {
    if a.is_zero() || b.is_zero() {
        return FieldElement::zero();
    }
    // Cross-reduce: with reduced inputs, gcd(an*bn, ad*bd) splits as
    // gcd(an, bd) * gcd(bn, ad).
    let g1 = a.num.gcd(&b.den);
    let g2 = b.num.gcd(&a.den);
    let (an, bd) = if g1.is_one() {
        (a.num.clone(), b.den.clone())
    } else {
        (a.num.exact_div(&g1), b.den.exact_div(&g1))
    };
    let (bn, ad) = if g2.is_one() {
        (b.num.clone(), a.den.clone())
    } else {
        (b.num.exact_div(&g2), a.den.exact_div(&g2))
    };
    FieldElement::reduced_parts(a.shift + b.shift, an.mul(&bn), ad.mul(&bd))
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            shift: self.shift,
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        add_elements(self, rhs)
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        add_elements(self, &-rhs)
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        mul_elements(self, rhs)
    }
}

impl Div for &FieldElement {
    type Output = FieldElement;
    fn div(self, rhs: &FieldElement) -> FieldElement {
        self.checked_div(rhs).expect("division by zero")
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                (&self).$method(rhs)
            }
        }
        impl $trait<FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);
forward_owned_binop!(Div, div);
