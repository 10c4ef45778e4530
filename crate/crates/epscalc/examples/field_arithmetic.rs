//! Exact arithmetic in Q((e)): the infinitesimal `e`, its inverse `w`,
//! valuations, the field order, absolute values, and truncated
//! expansions.
//!
//! Run with: cargo run --example field_arithmetic

use epscalc::field::FieldElement;

fn main() {
    let e = FieldElement::epsilon();
    let w = FieldElement::omega();
    let one = FieldElement::one();

    println!("e * w               = {}", &e * &w);
    println!("valuation(e)        = {}", e.valuation());
    println!("valuation(w^2)      = {}", w.pow(2).valuation());
    println!("valuation(0)        = {}", FieldElement::zero().valuation());

    // Exact rational-function arithmetic: e/(1-e) is the sum of all e^n.
    let geometric_tail = &e / &(&one - &e);
    println!("e/(1-e)             = {}", geometric_tail);
    println!("  expanded          = {}", geometric_tail.expand(6));

    // The order: e is positive yet smaller than every positive rational.
    let tiny = FieldElement::from_ratio(1, 1_000_000);
    println!("e > 0               : {}", e.is_positive());
    println!(
        "e < 1/1000000       : {}",
        e.cmp_order(&tiny) == std::cmp::Ordering::Less
    );

    // Absolute values live in the field itself.
    let x = -&geometric_tail;
    println!("|{}| = {}", x, x.abs());

    // Topological nilpotence: powers of e shrink, powers of 1 - e do not.
    println!(
        "e topologically nilpotent      : {}",
        e.is_topologically_nilpotent()
    );
    println!(
        "1 - e topologically nilpotent  : {}",
        (&one - &e).is_topologically_nilpotent()
    );

    // Printing round-trips through the parser.
    let printed = geometric_tail.to_string();
    let reparsed = epscalc::parse::eval_element(&printed, &epscalc::parse::ExprContext::new())
        .expect("canonical text reparses");
    assert_eq!(reparsed, geometric_tail);
    println!("round-trip of `{}` ok", printed);
}
