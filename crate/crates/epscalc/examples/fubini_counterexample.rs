//! Convergent rows are not enough for a double series: here every row
//! sums to zero while column 0 diverges, and the converse criterion
//! pinpoints the broken hypothesis (the iterated series of row absolute
//! sums, which is the constant 2e/(1-e) repeated forever).
//!
//! Run with: cargo run --example fubini_counterexample

use epscalc::double_series::{
    build_counterexample, column_sum, converse_criterion, row_sum, ConverseFailure,
};
use epscalc::series::{sum_with, SampleConfig};

fn main() {
    let cfg = SampleConfig::default();
    let p = 32;
    let ce = build_counterexample();

    println!("k_0        = {}", ce.k0);
    println!("k_1, k_2.. = e, e^2, ...");
    let k = sum_with(&ce.k_terms, p, &cfg).converged().cloned().unwrap();
    println!(
        "sum k_i    = {} (so the k's are a positive series summing to 1)",
        k
    );

    println!("\narray: entry(i, 0) = 1 - k_0, entry(i, j) = -k_j for j >= 1");
    for i in [0u64, 1, 7] {
        let v = row_sum(&ce.array, i, p, &cfg).converged().cloned().unwrap();
        println!("row {} sums to {}", i, v);
    }

    println!(
        "\ncolumn 0: {}",
        column_sum(&ce.array, 0, p, &cfg).describe()
    );

    match converse_criterion(&ce.array, 16, &cfg) {
        Err(ConverseFailure::IteratedAbs { verdict }) => {
            println!("converse criterion: iterated absolute-sum hypothesis fails");
            println!("  {}", verdict.describe());
        }
        other => println!("unexpected outcome: {:?}", other.map(|a| a.head)),
    }
}
