//! Reordering a converging series along a bijection leaves the sum
//! unchanged, and so does grouping consecutive terms; both are verified
//! here with certified sums.
//!
//! Run with: cargo run --example reordering

use epscalc::field::FieldElement;
use epscalc::series::{group_pairs, reorder, sum, Bijection, SampleConfig, TermStream};

fn main() {
    let cfg = SampleConfig::default();
    let stream = TermStream::from_fn(|n| {
        let sign = if n % 3 == 0 { 1 } else { -1 };
        FieldElement::from_ratio(sign * ((n % 5) as i64 + 1), 2)
            * FieldElement::epsilon().pow(n as i64)
    })
    .with_affine_bound(1, 0);

    let base = sum(&stream, 16).converged().cloned().unwrap();
    println!("original sum      : {}", base);

    for (name, bijection) in [
        ("identity", Bijection::identity()),
        ("pair swap", Bijection::pair_swap()),
        ("block reversal 4", Bijection::block_reversal(4)),
    ] {
        let reordered = reorder(&stream, &bijection, &cfg).expect("valid bijection");
        let value = sum(&reordered, 16).converged().cloned().unwrap();
        println!(
            "{:<17}: {} (agrees: {})",
            name,
            value,
            value.agrees_with(&base, 16)
        );
    }

    let grouped = group_pairs(&stream);
    let value = sum(&grouped, 16).converged().cloned().unwrap();
    println!(
        "pairs grouped     : {} (agrees: {})",
        value,
        value.agrees_with(&base, 16)
    );

    // A forward/inverse pair that disagrees is rejected with a witness.
    let broken = Bijection::new(|n| n + 1, |n| n + 1);
    match reorder(&stream, &broken, &cfg) {
        Err(e) => println!("broken bijection  : {}", e),
        Ok(_) => unreachable!(),
    }
}
