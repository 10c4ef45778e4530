//! Power-series invariants: the power-table recursion against iterated
//! Cauchy products, substitution soundness on certified instances, the
//! zero-constant-term shortcut against a polynomial-composition oracle,
//! coefficient-convergence propagation, and sign symmetry.

mod common;

use common::{
    mix, random_bounded_series, random_criterion_instance, random_zero_constant_series, rng,
    small_rational,
};
use epscalc::faa_di_bruno::faa_di_bruno;
use epscalc::field::{FieldElement, Rat};
use epscalc::power_series::{
    cauchy_product, expected_coefficients, power_table, substitution_criterion, PowerSeries,
};
use epscalc::series::SampleConfig;
use rand::Rng;

const P: i64 = 16;

#[test]
fn power_table_recursion_matches_iterated_cauchy_products() {
    for seed in 0..12u64 {
        let s = random_bounded_series(seed, 0, 0);
        let mut table = power_table(&s, 5, 16);
        let mut power = PowerSeries::from_coeffs(vec![FieldElement::one()]);
        for i in 0..=5usize {
            for j in 0..=16u64 {
                assert_eq!(
                    table.c(i, j as usize),
                    power.coeff(j),
                    "seed {}, c_{{{} {}}}",
                    seed,
                    i,
                    j
                );
            }
            // materialize the next power so coefficient reads stay O(1)
            let next = cauchy_product(&power, &s);
            let coeffs: Vec<FieldElement> = (0..=16u64).map(|j| next.coeff(j)).collect();
            power = PowerSeries::from_coeffs(coeffs);
        }
    }
}

#[test]
fn substitution_soundness_on_certified_instances() {
    let cfg = SampleConfig::default();
    for seed in 0..25u64 {
        let inst = random_criterion_instance(seed);
        let cert = substitution_criterion(&inst.outer, &inst.inner, &inst.x, P, &cfg)
            .unwrap_or_else(|e| panic!("seed {}: criterion failed: {}", seed, e));
        assert!(
            cert.via_composite.agrees_with(&cert.via_expected, P),
            "seed {}: routes disagree",
            seed
        );
    }
}

#[test]
fn coefficient_convergence_propagates_on_certified_instances() {
    // Once the criterion certifies, every expected coefficient converges.
    let cfg = SampleConfig::default();
    for seed in 40..55u64 {
        let inst = random_criterion_instance(seed);
        assert!(substitution_criterion(&inst.outer, &inst.inner, &inst.x, P, &cfg).is_ok());
        let d = expected_coefficients(&inst.outer, &inst.inner, 8, P, &cfg);
        for j in 0..=8u64 {
            assert!(
                d.at(j).verdict.converged().is_some(),
                "seed {}: d_{} did not converge",
                seed,
                j
            );
        }
    }
}

/// Independent oracle: compose truncated polynomials directly (vectors of
/// coefficients, plain convolution) and read off the scaled derivative.
fn poly_mul(a: &[FieldElement], b: &[FieldElement], len: usize) -> Vec<FieldElement> {
    let mut out = vec![FieldElement::zero(); len];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j < len {
                out[i + j] = &out[i + j] + &(x * y);
            }
        }
    }
    out
}

fn compose_truncated(
    outer: &[FieldElement],
    inner: &[FieldElement],
    len: usize,
) -> Vec<FieldElement> {
    let mut result = vec![FieldElement::zero(); len];
    let mut inner_power = vec![FieldElement::zero(); len];
    inner_power[0] = FieldElement::one();
    for b in outer {
        for (k, c) in inner_power.iter().enumerate() {
            result[k] = &result[k] + &(b * c);
        }
        inner_power = poly_mul(&inner_power, inner, len);
    }
    result
}

#[test]
fn zero_constant_shortcut_matches_composition_and_derivatives() {
    let cfg = SampleConfig::default();
    let nmax = 8usize;
    for seed in 0..8u64 {
        let inner = random_zero_constant_series(seed, 0, 0);
        let outer = random_bounded_series(seed ^ 0x9999, 0, 0);
        let d = expected_coefficients(&outer, &inner, nmax as u64, P, &cfg);

        // Oracle 1: direct truncated polynomial composition. With a zero
        // constant term only the first n outer coefficients contribute to
        // the coefficient of X^n.
        let outer_coeffs: Vec<FieldElement> = (0..=nmax as u64).map(|i| outer.coeff(i)).collect();
        let inner_coeffs: Vec<FieldElement> = (0..=nmax as u64).map(|j| inner.coeff(j)).collect();
        let composed = compose_truncated(&outer_coeffs, &inner_coeffs, nmax + 1);

        // Oracle 2: derivatives of the composite at 0 by the partition
        // formula, divided by n!.
        let mut f_derivs = Vec::with_capacity(nmax + 1);
        let mut g_derivs = Vec::with_capacity(nmax + 1);
        let mut factorial = Rat::from_integer(1.into());
        for m in 0..=nmax {
            if m > 0 {
                factorial *= Rat::from_integer((m as i64).into());
            }
            let scale = FieldElement::from_rational(factorial.clone());
            f_derivs.push(&scale * &outer_coeffs[m]);
            g_derivs.push(&scale * &inner_coeffs[m]);
        }

        let mut factorial = Rat::from_integer(1.into());
        for n in 0..=nmax {
            if n > 0 {
                factorial *= Rat::from_integer((n as i64).into());
            }
            let c = d.at(n as u64);
            assert!(
                c.exact,
                "seed {}: d_{} should be an exact finite sum",
                seed, n
            );
            let head = &c.verdict.converged().unwrap().head;
            assert_eq!(
                head, &composed[n],
                "seed {}: composition oracle at {}",
                seed, n
            );
            if n >= 1 {
                let derivative = faa_di_bruno(&f_derivs, &g_derivs, n).unwrap();
                let scaled = derivative
                    .checked_div(&FieldElement::from_rational(factorial.clone()))
                    .unwrap();
                assert_eq!(head, &scaled, "seed {}: derivative oracle at {}", seed, n);
            }
        }
    }
}

#[test]
fn sign_symmetry_of_the_criterion() {
    // Evaluating S at -x equals evaluating the sign-flipped series at x,
    // and the criterion certifies both with equal values.
    let cfg = SampleConfig::default();
    for seed in 70..80u64 {
        let inst = random_criterion_instance(seed);
        let flipped_src = inst.inner.clone();
        let flipped = PowerSeries::from_fn(move |j| {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            FieldElement::from_int(sign) * flipped_src.coeff(j)
        });
        let flipped = match inst.inner.bound() {
            Some(b) => flipped.with_bound(b.slope, b.offset),
            None => flipped,
        };
        let minus_x = -inst.x.clone();
        let a = substitution_criterion(&inst.outer, &inst.inner, &minus_x, P, &cfg)
            .unwrap_or_else(|e| panic!("seed {}: {}", seed, e));
        let b = substitution_criterion(&inst.outer, &flipped, &inst.x, P, &cfg)
            .unwrap_or_else(|e| panic!("seed {}: {}", seed, e));
        assert!(
            a.via_composite.agrees_with(&b.via_composite, P),
            "seed {}: composite values differ",
            seed
        );
        assert!(
            a.via_expected.agrees_with(&b.via_expected, P),
            "seed {}: expected-route values differ",
            seed
        );
    }
}

#[test]
fn faa_di_bruno_matches_symbolic_derivative_of_truncated_composition() {
    // General-purpose oracle with polynomial outer functions: compose the
    // truncated polynomials symbolically, differentiate, and compare.
    let mut r = rng(99);
    for _ in 0..6 {
        let nmax = 6usize;
        // random polynomial outer of degree <= nmax, arbitrary constant term
        let outer: Vec<FieldElement> = (0..=nmax)
            .map(|k| FieldElement::monomial(small_rational(mix(r.gen(), k as u64, 1)), 0))
            .collect();
        // random inner with zero constant term (derivatives at 0 only see
        // finitely many terms either way)
        let inner: Vec<FieldElement> = (0..=nmax)
            .map(|k| {
                if k == 0 {
                    FieldElement::zero()
                } else {
                    FieldElement::monomial(small_rational(mix(r.gen(), k as u64, 2)), 1)
                }
            })
            .collect();
        let composed = compose_truncated(&outer, &inner, nmax + 1);
        let mut f_derivs = Vec::new();
        let mut g_derivs = Vec::new();
        let mut factorial = Rat::from_integer(1.into());
        for m in 0..=nmax {
            if m > 0 {
                factorial *= Rat::from_integer((m as i64).into());
            }
            let scale = FieldElement::from_rational(factorial.clone());
            f_derivs.push(&scale * &outer[m]);
            g_derivs.push(&scale * &inner[m]);
        }
        let mut factorial = Rat::from_integer(1.into());
        for n in 1..=nmax {
            factorial *= Rat::from_integer((n as i64).into());
            // n-th derivative of the composition at 0 = n! * coefficient n
            let expected = FieldElement::from_rational(factorial.clone()) * &composed[n];
            let got = faa_di_bruno(&f_derivs, &g_derivs, n).unwrap();
            assert_eq!(got, expected, "derivative order {}", n);
        }
    }
}

#[test]
fn derivative_value_sequence_of_blowup_series() {
    // S = e - wX + w^2 X^2 + sum_{n>=3} e^n X^n has derivative values
    // (-w, 2w^2, 6e^3, ...) at 0.
    let e = FieldElement::epsilon();
    let w = FieldElement::omega();
    let s = PowerSeries::from_fn(move |n| match n {
        0 => FieldElement::epsilon(),
        1 => -FieldElement::omega(),
        2 => FieldElement::omega().pow(2),
        _ => FieldElement::epsilon().pow(n as i64),
    })
    .with_bound(1, -4);
    let expectations = [
        (-w.clone(), 1u64),
        (FieldElement::from_int(2) * w.pow(2), 2),
        (FieldElement::from_int(6) * e.pow(3), 3),
        (FieldElement::from_int(24) * e.pow(4), 4),
    ];
    for (expected, n) in expectations {
        let d = epscalc::power_series::formal_derivative(&s, n);
        assert_eq!(d.coeff(0), expected, "derivative order {}", n);
    }
}
