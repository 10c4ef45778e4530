//! Power series over the field: evaluation with verdicts, Cauchy
//! products, the power table recursion, and formal derivatives.
//!
//! Run with: cargo run --example power_series_basics

use epscalc::field::FieldElement;
use epscalc::power_series::{cauchy_product, formal_derivative, power_table, PowerSeries};
use epscalc::series::SampleConfig;

fn main() {
    let cfg = SampleConfig::default();
    let e = FieldElement::epsilon();
    let one = FieldElement::one();

    // T(X) = sum X^n converges where the argument is infinitesimal.
    let t = PowerSeries::geometric();
    println!("T(e^2): {}", t.eval(&e.pow(2), 12, &cfg).describe());

    // At an argument of valuation 0 the terms never shrink.
    let x = FieldElement::from_int(2) / (&one - &e);
    println!("T(2/(1-e)): {}", t.eval(&x, 8, &cfg).describe());

    // Every series converges at 0, to its constant term.
    println!(
        "T(0): {}",
        t.eval(&FieldElement::zero(), 8, &cfg).describe()
    );

    // Cauchy product of the all-ones series with itself counts terms.
    let square = cauchy_product(&t, &t);
    let coeffs: Vec<String> = (0..8u64).map(|k| square.coeff(k).to_string()).collect();
    println!("(sum X^n)^2 coefficients: {}", coeffs.join(", "));

    // The power table c_ij = coefficient of X^j in S^i follows the
    // convolution recursion row by row.
    let mut table = power_table(&t, 3, 8);
    for i in 0..=3usize {
        let row: Vec<String> = (0..=8usize).map(|j| table.c(i, j).to_string()).collect();
        println!("S^{} coefficients: {}", i, row.join(", "));
    }

    // Formal derivatives: coefficient j of the n-th derivative is
    // (j+n)!/j! a_{j+n}.
    let s = PowerSeries::from_fn(|n| match n {
        0 => FieldElement::epsilon(),
        1 => -FieldElement::omega(),
        2 => FieldElement::omega().pow(2),
        _ => FieldElement::epsilon().pow(n as i64),
    })
    .with_bound(1, -4);
    for n in 0..=3u64 {
        println!("S^({})(0) = {}", n, formal_derivative(&s, n).coeff(0));
    }
}
