//! Series over the field converge exactly when their terms tend to zero.
//! Sums carry certificates: a `Converges` verdict always rests on a
//! declared tail bound, while window sampling can witness divergence.
//!
//! Run with: cargo run --example certified_sums

use epscalc::field::FieldElement;
use epscalc::series::{
    dominated_convergence_check, partial_sum, split_pm, sum, SampleConfig, TermStream,
};

fn main() {
    let e = FieldElement::epsilon();
    let one = FieldElement::one();

    // Geometric stream e^n with tail bound n: certified convergence.
    let geometric = TermStream::geometric(e.clone());
    println!("partial sum N=2: {}", partial_sum(&geometric, 2));
    println!(
        "sum e^n at precision 10: {}",
        sum(&geometric, 10).describe()
    );

    // Terms of constant valuation never tend to zero.
    let ratio = &one / &(&one - &e);
    let divergent = TermStream::from_fn(move |n| ratio.pow(n as i64));
    println!("sum (1/(1-e))^n: {}", sum(&divergent, 8).describe());

    // Without a certificate the honest verdict is unknown.
    let uncertified = TermStream::from_fn(move |n| FieldElement::epsilon().pow(n as i64));
    println!("sum e^n, no bound: {}", sum(&uncertified, 8).describe());

    // Splitting into non-negative parts and recombining.
    let alternating = TermStream::from_fn(|n| {
        let sign = if n % 2 == 0 { 1 } else { -1 };
        FieldElement::from_int(sign) * FieldElement::epsilon().pow(n as i64)
    })
    .with_affine_bound(1, 0);
    let (plus, minus) = split_pm(&alternating);
    let vp = sum(&plus, 12).converged().cloned().unwrap();
    let vm = sum(&minus, 12).converged().cloned().unwrap();
    println!(
        "sum of (-e)^n          = {}",
        sum(&alternating, 12).describe()
    );
    println!("positive part          = {}", vp);
    println!("negative part          = {}", vm);
    println!("difference of parts    = {}", vp.head - vm.head);

    // Comparison test: |b_n| <= |a_n| lets b inherit a's certificate.
    let dominated = TermStream::from_fn(|n| FieldElement::epsilon().pow(n as i64 + 1));
    let verdict = dominated_convergence_check(&geometric, &dominated, 12, &SampleConfig::default())
        .expect("domination holds");
    println!("dominated sum e^(n+1): {}", verdict.describe());
}
