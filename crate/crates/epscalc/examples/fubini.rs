//! Double series over the grid: the linearized sum along a pairing, the
//! iterated sums by rows and by columns, Goursat exhaustion sums, and
//! partition sums all agree on certified arrays.
//!
//! Run with: cargo run --example fubini

use epscalc::double_series::{
    fubini_sum, goursat_sum, linearize, partition_sum, restricted_sum, DoubleArray, GoursatChain,
    Pairing, PartitionOfGrid,
};
use epscalc::field::FieldElement;
use epscalc::series::{sum_with, SampleConfig};

fn main() {
    let cfg = SampleConfig::default();
    let p = 8;

    // entries e^{i+j}; every entry on diagonal n has valuation n
    let array = DoubleArray::from_fn(|i, j| FieldElement::epsilon().pow((i + j) as i64))
        .with_affine_joint_bound(1, 0);
    let closed_form = (FieldElement::one() - FieldElement::epsilon()).pow(-2);
    println!("closed form 1/(1-e)^2 = {}", closed_form.expand(p));

    for pairing in [Pairing::cantor(), Pairing::boustrophedon()] {
        let v = sum_with(&linearize(&array, &pairing), p, &cfg)
            .converged()
            .cloned()
            .unwrap();
        println!(
            "linearized ({:<13}) = {} (agrees: {})",
            pairing.name(),
            v,
            v.agrees_with_element(&closed_form, p)
        );
    }

    let triple = fubini_sum(&array, p, &cfg).expect("certified array");
    println!("by rows               = {}", triple.by_rows);
    println!("by columns            = {}", triple.by_columns);

    for chain in [
        GoursatChain::squares(),
        GoursatChain::triangles(),
        GoursatChain::from_pairing(&Pairing::cantor()),
    ] {
        let v = goursat_sum(&array, &chain, p, &cfg).expect("valid chain");
        println!(
            "goursat ({:<18}) = {} (agrees: {})",
            chain.name(),
            v,
            v.agrees_with_element(&closed_form, p)
        );
    }

    for parts in [
        PartitionOfGrid::by_rows(),
        PartitionOfGrid::by_antidiagonals(),
        PartitionOfGrid::by_diagonal_parity(),
    ] {
        let v = partition_sum(&array, &parts, p, &cfg).expect("valid partition");
        println!(
            "partition ({:<15}) = {} (agrees: {})",
            parts.name(),
            v,
            v.agrees_with_element(&closed_form, p)
        );
    }

    // Restricting to the first row picks out the geometric series.
    let first_row = restricted_sum(&array, |i, _| i == 0, p, &cfg).unwrap();
    println!("restricted to row 0   = {}", first_row);
}
