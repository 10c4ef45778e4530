//! Set partitions, the Faa di Bruno formula, and the derivative blow-up:
//! with S(X) = e - wX + w^2 X^2 + sum_{n>=3} e^n X^n and T(X) = sum X^n,
//! the derivatives D^n(T o S)(0) have valuation exactly -n, so the
//! would-be power series coefficients D^n/n! blow up like w^n even
//! though the composite function itself is defined.
//!
//! Run with: cargo run --example faa_di_bruno_blowup

use epscalc::faa_di_bruno::{blowup_example, set_partitions};

fn main() {
    // Partitions of a small set, enumerated canonically.
    for n in 1..=4usize {
        let parts = set_partitions(n).unwrap();
        let rendered: Vec<String> = parts.iter().take(5).map(|p| format!("{{{}}}", p)).collect();
        println!(
            "partitions of {{1..{}}}: {:>3} total, first few: {}",
            n,
            parts.len(),
            rendered.join(" ")
        );
    }

    println!();
    let records = blowup_example(6, 24).unwrap();
    for r in &records {
        println!(
            "D^{}(T o S)(0): valuation {} over {} partition terms",
            r.n,
            r.valuation,
            r.terms.len()
        );
        // The all-singletons term T^(n)(e) (S'(0))^n carries the largest
        // absolute value of all the terms.
        let singleton = r
            .terms
            .iter()
            .find(|t| t.partition.is_all_singletons())
            .unwrap();
        let dominated = r.terms.iter().all(|t| {
            t.partition.is_all_singletons()
                || singleton.value.abs().cmp_order(&t.value.abs()) == std::cmp::Ordering::Greater
        });
        println!(
            "  all-singletons term has valuation {}, strictly largest |.|: {}",
            singleton.value.valuation(),
            dominated
        );
    }
}
