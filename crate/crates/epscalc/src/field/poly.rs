//! Dense polynomials over the rationals, the building block for field
//! elements. Coefficients are stored in ascending exponent order with no
//! trailing zeros; the empty vector is the zero polynomial.

use num_traits::{One, Signed, Zero};

use super::{rat_int, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Rat>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Poly::new(vec![c])
    }

    /// c * x^k
    pub fn monomial(c: Rat, k: usize) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rat::zero(); k + 1];
        coeffs[k] = c;
        Poly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree of a nonzero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Index of the lowest nonzero coefficient.
    pub fn low_order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    pub fn neg(&self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) + other.coeff(k));
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Multiply by x^k.
    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        let mut coeffs = vec![Rat::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    /// Divide by x^k; the k lowest coefficients must be zero.
    pub fn shift_down(&self, k: usize) -> Poly {
        if k == 0 {
            return self.clone();
        }
        debug_assert!(self.coeffs.iter().take(k).all(|c| c.is_zero()));
        Poly::new(self.coeffs.iter().skip(k).cloned().collect())
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn divrem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let dlead = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            if rem[k].is_zero() {
                continue;
            }
            let q = &rem[k] / &dlead;
            quot[k - dd] = q.clone();
            rem[k] = Rat::zero();
            for (t, c) in divisor.coeffs.iter().enumerate().take(dd) {
                if !c.is_zero() {
                    rem[k - dd + t] -= c * &q;
                }
            }
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Exact division; panics if the remainder is nonzero.
    pub fn exact_div(&self, divisor: &Poly) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        if divisor.is_one() {
            return self.clone();
        }
        let (q, r) = self.divrem(divisor);
        assert!(r.is_zero(), "exact_div with nonzero remainder");
        q
    }

    /// Scale so the leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(lead) if lead.is_one() => self.clone(),
            Some(lead) => {
                let inv = Rat::one() / lead;
                self.scale(&inv)
            }
        }
    }

    /// Monic gcd via the Euclidean algorithm.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        // Constants are units.
        if self.is_constant() || other.is_constant() {
            return Poly::one();
        }
        let mut a = self.monic();
        let mut b = other.monic();
        while !b.is_zero() {
            if b.is_constant() {
                return Poly::one();
            }
            let (_, r) = a.divrem(&b);
            a = b;
            b = r.monic();
        }
        a
    }

    pub fn eval_at_zero(&self) -> Rat {
        self.coeff(0)
    }

    /// Sign of the lowest nonzero coefficient: -1, 0, or 1.
    pub fn low_sign(&self) -> i32 {
        match self.low_order() {
            None => 0,
            Some(k) => {
                if self.coeffs[k].is_positive() {
                    1
                } else {
                    -1
                }
            }
        }
    }
}

/// Convenience constructor from integer coefficients, ascending order.
pub fn poly_from_ints(coeffs: &[i64]) -> Poly {
    Poly::new(coeffs.iter().map(|&c| rat_int(c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divrem_roundtrip() {
        // (1 - x)(1 + x + x^2) = 1 - x^3
        let d = poly_from_ints(&[1, -1]);
        let q = poly_from_ints(&[1, 1, 1]);
        let p = d.mul(&q);
        assert_eq!(p, poly_from_ints(&[1, 0, 0, -1]));
        let (q2, r) = p.divrem(&d);
        assert_eq!(q2, q);
        assert!(r.is_zero());
    }

    #[test]
    fn gcd_of_shared_factor() {
        let a = poly_from_ints(&[1, -1]).mul(&poly_from_ints(&[1, 1]));
        let b = poly_from_ints(&[1, -1]).mul(&poly_from_ints(&[2, 0, 5]));
        let g = a.gcd(&b);
        // monic form of (1 - x) is (x - 1) scaled: -1 + x -> monic -> x - 1
        assert_eq!(g, poly_from_ints(&[-1, 1]));
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let a = poly_from_ints(&[1, 1]);
        let b = poly_from_ints(&[1, 0, 1]);
        assert_eq!(a.gcd(&b), Poly::one());
    }

    #[test]
    fn trimming_and_low_order() {
        let p = Poly::new(vec![rat_int(0), rat_int(2), rat_int(0)]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(p.low_order(), Some(1));
        assert_eq!(p.shift_down(1), poly_from_ints(&[2]));
    }
}
