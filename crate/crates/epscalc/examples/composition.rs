//! Substituting one power series into another: expected coefficients,
//! the substitution criterion with its two hypotheses, composite
//! evaluation, and the neighbourhood threshold.
//!
//! The centrepiece is the pair where substitution fails: S converges to 0
//! at e and T(0) = 1, yet the formal coefficient d_0 of T(S(X)) is a
//! divergent series — exactly because T fails to converge at the
//! absolute-series value 2e/(1-e).
//!
//! Run with: cargo run --example composition

use epscalc::field::FieldElement;
use epscalc::power_series::{
    composite_eval, expected_coefficients, neighborhood_radius, substitution_criterion, PowerSeries,
};
use epscalc::series::SampleConfig;

fn main() {
    let cfg = SampleConfig::default();
    let p = 32;
    let e = FieldElement::epsilon();
    let one = FieldElement::one();

    // S: a_0 = e/(1-e), a_j = -1 for j >= 1. T: b_i = w^i.
    let a0 = &e / &(&one - &e);
    let s = {
        let a0 = a0.clone();
        PowerSeries::from_fn(move |j| {
            if j == 0 {
                a0.clone()
            } else {
                -FieldElement::one()
            }
        })
        .with_bound(0, 0)
    };
    let t = PowerSeries::from_fn(|i| FieldElement::omega().pow(i as i64)).with_bound(-1, 0);

    let inner = s.eval(&e, p, &cfg).converged().cloned().unwrap();
    println!("S(e)       = {} (zero at precision {})", inner, p);

    let abs_value = s
        .abs_series()
        .eval(&e, p, &cfg)
        .converged()
        .cloned()
        .unwrap();
    println!("S-bar(e)   = {}", abs_value);

    let d = expected_coefficients(&t, &s, 0, p, &cfg);
    println!("d_0        : {}", d.at(0).verdict.describe());

    println!(
        "T(S(e))    : {} (the composite function is fine)",
        composite_eval(&t, &s, &e, p, &cfg).describe()
    );

    match substitution_criterion(&t, &s, &e, p, &cfg) {
        Err(failure) => println!("criterion  : {}", failure),
        Ok(_) => unreachable!("the criterion must reject this pair"),
    }

    // A pair where the criterion certifies: S = eX into T = sum X^i at 1.
    let scaled = PowerSeries::from_fn(|j| {
        if j == 1 {
            FieldElement::epsilon()
        } else {
            FieldElement::zero()
        }
    })
    .with_bound(1, 0);
    let geometric = PowerSeries::geometric();
    let cert = substitution_criterion(&geometric, &scaled, &one, 16, &cfg).unwrap();
    println!("\ncertified pair S = eX, T = sum X^i, x = 1:");
    println!("  via composite       = {}", cert.via_composite);
    println!("  via expected coeffs = {}", cert.via_expected);

    // Neighbourhood threshold: a valuation V such that the criterion
    // holds whenever v(x) >= V.
    let shifted = PowerSeries::from_fn(|j| match j {
        0 => FieldElement::epsilon(),
        1 => FieldElement::one(),
        _ => FieldElement::zero(),
    })
    .with_bound(0, 0);
    let v = neighborhood_radius(&geometric, &shifted, &cfg).unwrap();
    println!(
        "\nneighbourhood threshold for S = e + X into sum X^i: v(x) >= {}",
        v
    );
    let witness = FieldElement::epsilon().pow(v);
    assert!(substitution_criterion(&geometric, &shifted, &witness, 12, &cfg).is_ok());
    println!("criterion certified at x = e^{}", v);
}
