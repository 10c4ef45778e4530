//! Shared generators for the integration and acceptance suites: random
//! field elements, certified streams, arrays, and power series whose
//! declared bounds hold by construction.

#![allow(dead_code)]

use epscalc::double_series::{DoubleArray, PartitionOfGrid};
use epscalc::field::{rat, FieldElement, Poly, Rat};
use epscalc::power_series::PowerSeries;
use epscalc::series::TermStream;
use epscalc::valuation::Valuation;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Deterministic per-position mixing, so array entries stay pure
/// functions of their indices.
pub fn mix(seed: u64, i: u64, j: u64) -> u64 {
    let mut z =
        seed ^ (i.wrapping_mul(0x9e37_79b9_7f4a_7c15)) ^ (j.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Small nonzero rational from mixed bits.
pub fn small_rational(bits: u64) -> Rat {
    let num = ((bits % 9) + 1) as i64;
    let den = (((bits >> 8) % 4) + 1) as i64;
    let sign = if (bits >> 16) % 2 == 0 { 1 } else { -1 };
    rat(sign * num, den)
}

pub fn random_small_rational(rng: &mut StdRng) -> Rat {
    small_rational(rng.gen())
}

/// Random nonzero polynomial with small integer coefficients.
pub fn random_poly(rng: &mut StdRng, max_degree: usize, nonzero_constant: bool) -> Poly {
    loop {
        let degree = rng.gen_range(0..=max_degree);
        let coeffs: Vec<Rat> = (0..=degree)
            .map(|k| {
                if k == 0 && nonzero_constant {
                    rat(
                        rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 },
                        1,
                    )
                } else {
                    rat(rng.gen_range(-4..=4), 1)
                }
            })
            .collect();
        let p = Poly::new(coeffs);
        if !p.is_zero() {
            return p;
        }
    }
}

/// Random element as a reduced ratio of small polynomials, with a random
/// power of `e` mixed in. May be zero when `allow_zero` is set.
pub fn random_element(rng: &mut StdRng, allow_zero: bool) -> FieldElement {
    if allow_zero && rng.gen_ratio(1, 12) {
        return FieldElement::zero();
    }
    let shift = rng.gen_range(-3..=3);
    let num = random_poly(rng, 3, false);
    let den = random_poly(rng, 2, true);
    FieldElement::from_parts(shift, num, den)
}

pub fn nonzero_element(rng: &mut StdRng) -> FieldElement {
    loop {
        let x = random_element(rng, false);
        if !x.is_zero() {
            return x;
        }
    }
}

/// Certified stream with terms `q_n e^{n + delta_n}`, tail bound n.
pub fn random_certified_stream(seed: u64) -> TermStream {
    TermStream::from_fn(move |n| {
        let bits = mix(seed, n, 0x5151);
        let q = small_rational(bits);
        let delta = (bits >> 24) % 3;
        FieldElement::monomial(q, (n + delta) as i64)
    })
    .with_affine_bound(1, 0)
}

/// Certified array with entries `q e^{i+j+delta}`, joint bound n.
pub fn random_certified_array(seed: u64) -> DoubleArray {
    DoubleArray::from_fn(move |i, j| {
        let bits = mix(seed, i, j);
        let q = small_rational(bits);
        let delta = (bits >> 24) % 3;
        FieldElement::monomial(q, (i + j + delta) as i64)
    })
    .with_affine_joint_bound(1, 0)
}

/// Random finite partition of the grid by hashing positions into `parts`
/// classes.
pub fn random_partition(seed: u64, parts: u64) -> PartitionOfGrid {
    PartitionOfGrid::new(
        move |i, j| mix(seed, i, j) % parts,
        Some(parts),
        "random-assignment",
    )
}

/// Random power series with declared bound `v(a_j) >= slope*j + offset`,
/// holding by construction: `a_j = q_j e^{slope*j + offset + delta_j}`.
pub fn random_bounded_series(seed: u64, slope: i64, offset: i64) -> PowerSeries {
    PowerSeries::from_fn(move |j| {
        let bits = mix(seed, j, 0xab1e);
        let q = small_rational(bits);
        let delta = ((bits >> 24) % 3) as i64;
        FieldElement::monomial(q, slope * j as i64 + offset + delta)
    })
    .with_bound(slope, offset)
}

/// Random series with `a_0 = 0` and the declared bound holding for the
/// rest of the coefficients.
pub fn random_zero_constant_series(seed: u64, slope: i64, offset: i64) -> PowerSeries {
    PowerSeries::from_fn(move |j| {
        if j == 0 {
            return FieldElement::zero();
        }
        let bits = mix(seed, j, 0xcafe);
        let q = small_rational(bits);
        let delta = ((bits >> 24) % 3) as i64;
        FieldElement::monomial(q, slope * j as i64 + offset + delta)
    })
    .with_bound(slope, offset)
}

/// A random instance on which the substitution criterion certifies:
/// inner series with constant-term valuation >= 1, outer with
/// non-negative slope, argument with valuation >= 1.
pub struct CriterionInstance {
    pub outer: PowerSeries,
    pub inner: PowerSeries,
    pub x: FieldElement,
}

pub fn random_criterion_instance(seed: u64) -> CriterionInstance {
    let mut r = rng(seed);
    let s_slope = r.gen_range(0..=1);
    let s_offset = r.gen_range(0..=1);
    let t_slope = r.gen_range(0..=1);
    let inner = random_bounded_series(seed ^ 0x1111, s_slope, s_offset.max(1));
    let outer = random_bounded_series(seed ^ 0x2222, t_slope, 0);
    let vx = r.gen_range(1..=2);
    let x = FieldElement::monomial(random_small_rational(&mut r), vx);
    CriterionInstance { outer, inner, x }
}

/// Valuation equality helper for asserts.
pub fn val(v: i64) -> Valuation {
    Valuation::Finite(v)
}
