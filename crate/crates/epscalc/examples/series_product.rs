//! Product of two converging series: the double series of pairwise
//! products converges to the product of the sums.
//!
//! Run with: cargo run --example series_product

use epscalc::double_series::product_series;
use epscalc::field::FieldElement;
use epscalc::series::{sum_with, SampleConfig, TermStream};

fn main() {
    let cfg = SampleConfig::default();
    let p = 16;
    let e = FieldElement::epsilon();
    let one = FieldElement::one();

    let geometric = TermStream::geometric(e.clone());
    let alternating = TermStream::from_fn(|n| {
        let sign = if n % 2 == 0 { 1 } else { -1 };
        FieldElement::from_int(sign) * FieldElement::epsilon().pow(n as i64)
    })
    .with_affine_bound(1, 0);

    let sum_g = sum_with(&geometric, p, &cfg).converged().cloned().unwrap();
    let sum_a = sum_with(&alternating, p, &cfg)
        .converged()
        .cloned()
        .unwrap();
    println!("sum e^n        = {}", sum_g.head.expand(8));
    println!("sum (-e)^n     = {}", sum_a.head.expand(8));

    let square = product_series(&geometric, &geometric, p, &cfg).unwrap();
    println!("(sum e^n)^2    = {}", square.head.expand(8));
    println!(
        "  equals 1/(1-e)^2: {}",
        square.agrees_with_element(&(&one - &e).pow(-2), p)
    );

    let mixed = product_series(&alternating, &geometric, p, &cfg).unwrap();
    println!("mixed product  = {}", mixed.head.expand(8));
    println!(
        "  equals 1/(1-e^2): {}",
        mixed.agrees_with_element(&(&one - e.pow(2)).pow(-1), p)
    );

    // The product also equals the product of the two certified sums.
    let direct = &sum_a.head * &sum_g.head;
    println!(
        "  equals (sum a)(sum g) at precision {}: {}",
        p,
        mixed.agrees_with_element(&direct, p)
    );
}
