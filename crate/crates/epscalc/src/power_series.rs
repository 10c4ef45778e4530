//! Power series over the field: evaluation with convergence verdicts,
//! Cauchy products, powers through the coefficient recursion, absolute
//! series, formal derivatives, expected coefficients of a composition,
//! the substitution criterion, and composite evaluation.
//!
//! Convergence certificates use affine coefficient bounds
//! `v(a_j) >= slope*j + offset`; evaluating at `x` turns such a bound
//! into a stream tail bound with slope `slope + v(x)`, which certifies
//! convergence exactly when that combined slope is at least 1.

use std::fmt;
use std::sync::Arc;

use crate::field::{FieldElement, Rat};
use crate::series::{
    sum_with, ApproxElement, ConvergenceVerdict, SampleConfig, TermStream, ValuationProfile,
};
use crate::valuation::Valuation;

/// Certified affine lower bound on coefficient valuations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AffineBound {
    pub slope: i64,
    pub offset: i64,
}

impl AffineBound {
    pub fn new(slope: i64, offset: i64) -> Self {
        AffineBound { slope, offset }
    }

    pub fn at(&self, j: u64) -> i64 {
        self.slope
            .saturating_mul(j as i64)
            .saturating_add(self.offset)
    }
}

/// A power series given by its coefficient stream, with an optional
/// certified affine bound on coefficient valuations.
#[derive(Clone)]
pub struct PowerSeries {
    coeff: Arc<dyn Fn(u64) -> FieldElement + Send + Sync>,
    bound: Option<AffineBound>,
}

impl PowerSeries {
    pub fn from_fn<F>(coeff: F) -> Self
    where
        F: Fn(u64) -> FieldElement + Send + Sync + 'static,
    {
        PowerSeries {
            coeff: Arc::new(coeff),
            bound: None,
        }
    }

    /// Declare `v(coeff(j)) >= slope*j + offset`. The contract is the
    /// caller's; consumers spot-check it on sampled windows.
    pub fn with_bound(mut self, slope: i64, offset: i64) -> Self {
        self.bound = Some(AffineBound::new(slope, offset));
        self
    }

    /// Polynomial series from explicit coefficients, with an exact bound.
    pub fn from_coeffs(coeffs: Vec<FieldElement>) -> Self {
        let offset = coeffs
            .iter()
            .filter_map(|c| c.valuation().finite())
            .min()
            .unwrap_or(0);
        let series = PowerSeries::from_fn(move |j| {
            coeffs
                .get(j as usize)
                .cloned()
                .unwrap_or_else(FieldElement::zero)
        });
        series.with_bound(0, offset)
    }

    /// The geometric series with all coefficients 1.
    pub fn geometric() -> Self {
        PowerSeries::from_fn(|_| FieldElement::one()).with_bound(0, 0)
    }

    /// The identity series X.
    pub fn identity() -> Self {
        PowerSeries::from_fn(|j| {
            if j == 1 {
                FieldElement::one()
            } else {
                FieldElement::zero()
            }
        })
        .with_bound(1, -1)
    }

    pub fn coeff(&self, j: u64) -> FieldElement {
        (self.coeff)(j)
    }

    pub fn bound(&self) -> Option<AffineBound> {
        self.bound
    }

    /// Series of absolute values of the coefficients; valuations are
    /// unchanged, so the bound carries over.
    pub fn abs_series(&self) -> PowerSeries {
        let coeff = self.coeff.clone();
        PowerSeries {
            coeff: Arc::new(move |j| coeff(j).abs()),
            bound: self.bound,
        }
    }

    /// Terms `a_j x^j` as a stream, certified when the combined slope
    /// `bound.slope + v(x)` reaches 1.
    pub fn term_stream(&self, x: &FieldElement) -> TermStream {
        let coeff = self.coeff.clone();
        let x = x.clone();
        let vx = x.valuation();
        let stream = TermStream::from_fn(move |j| coeff(j) * x.pow(j as i64));
        match (self.bound, vx) {
            (Some(b), Valuation::Finite(v)) if b.slope.saturating_add(v) >= 1 => {
                let slope = b.slope + v;
                let offset = b.offset;
                stream.with_bound(move |j| {
                    Valuation::Finite(slope.saturating_mul(j as i64).saturating_add(offset))
                })
            }
            (_, Valuation::Infinite) => {
                // x = 0: only the constant term survives.
                stream.with_bound(|j| {
                    if j == 0 {
                        Valuation::Finite(0)
                    } else {
                        Valuation::Infinite
                    }
                })
            }
            _ => stream,
        }
    }

    /// Evaluate at an exact point.
    pub fn eval(&self, x: &FieldElement, precision: i64, cfg: &SampleConfig) -> ConvergenceVerdict {
        if x.is_zero() {
            return ConvergenceVerdict::Converges(ApproxElement::exact(self.coeff(0)));
        }
        let stream = self.term_stream(x);
        if stream.tail_bound().is_some() {
            return sum_with(&stream, precision, cfg);
        }
        // No certificate: sample term valuations without building the
        // powers of x (valuations are multiplicative).
        self.valuation_sample(x.valuation().finite().expect("nonzero"), cfg)
    }

    /// Divergence sampling from exact term valuations
    /// `v(a_j) + j * v(x)`.
    fn valuation_sample(&self, vx: i64, cfg: &SampleConfig) -> ConvergenceVerdict {
        let w = cfg.window.max(4);
        let samples: Vec<(u64, Valuation)> = (0..w)
            .map(|j| {
                (
                    j,
                    self.coeff(j)
                        .valuation()
                        .add_i64(vx.saturating_mul(j as i64)),
                )
            })
            .collect();
        crate::series::stagnation_verdict(samples, w)
    }

    /// Evaluate at a value known only modulo its tail valuation.
    ///
    /// Certification needs the argument's certified valuation `m` to give
    /// a combined slope `bound.slope + m >= 1`; the head substitutes for
    /// the true argument, which costs `offset + slope + Q` of tail
    /// valuation when the head enters at power 1 and higher (`Q` being
    /// the argument's tail valuation).
    pub fn eval_at_approx(
        &self,
        k: &ApproxElement,
        precision: i64,
        cfg: &SampleConfig,
    ) -> ConvergenceVerdict {
        let q = match k.tail_valuation {
            Valuation::Infinite => return self.eval(&k.head, precision, cfg),
            Valuation::Finite(q) => q,
        };
        let vhead = k.head.valuation();
        // Lower bound on the valuation of the true argument.
        let m = vhead.min(Valuation::Finite(q));
        // The argument's valuation is exactly known when the head shows
        // it below the certified tail.
        let exact_vk = match vhead {
            Valuation::Finite(v) if v < q => Some(v),
            _ => None,
        };
        if let (Some(b), Valuation::Finite(mv)) = (self.bound, m) {
            let slope = b.slope.saturating_add(mv);
            if slope >= 1 {
                let mut n0 = 0u64;
                while b.offset.saturating_add(slope.saturating_mul(n0 as i64)) < precision {
                    n0 += 1;
                }
                let mut head = FieldElement::zero();
                let mut power = FieldElement::one();
                for j in 0..n0 {
                    if j > 0 {
                        power = power * &k.head;
                    }
                    head = head + self.coeff(j) * &power;
                }
                let mut tail =
                    Valuation::Finite(b.offset.saturating_add(slope.saturating_mul(n0 as i64)));
                if n0 >= 2 {
                    // Substitution error from using the head for powers >= 1.
                    tail = tail.min(Valuation::Finite(
                        b.offset.saturating_add(b.slope).saturating_add(q),
                    ));
                }
                return ConvergenceVerdict::Converges(ApproxElement::new(head, tail));
            }
        }
        match exact_vk {
            // The argument's valuation is exact, so term valuations of
            // the true series can be sampled arithmetically.
            Some(vk) => self.valuation_sample(vk, cfg),
            None => ConvergenceVerdict::Unknown(ValuationProfile {
                samples: Vec::new(),
            }),
        }
    }
}

impl fmt::Debug for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PowerSeries")
            .field("bound", &self.bound)
            .finish()
    }
}

/// Coefficient-convolution product of two power series.
pub fn cauchy_product(a: &PowerSeries, b: &PowerSeries) -> PowerSeries {
    let ac = a.coeff.clone();
    let bc = b.coeff.clone();
    let product = PowerSeries::from_fn(move |k| {
        let mut acc = FieldElement::zero();
        for i in 0..=k {
            acc = acc + ac(i) * bc(k - i);
        }
        acc
    });
    match (a.bound, b.bound) {
        (Some(ba), Some(bb)) => product.with_bound(ba.slope.min(bb.slope), ba.offset + bb.offset),
        _ => product,
    }
}

/// Table of the coefficients `c_ij` of `X^j` in `S(X)^i`, filled row by
/// row through the recursion
/// `c_{i+1, j} = c_{i0} a_j + c_{i1} a_{j-1} + ... + c_{ij} a_0`.
///
/// Rows extend lazily under `&mut self`; confine a table to one
/// evaluation context or wrap it in a lock to share it.
pub struct PowerTable {
    rows: Vec<Vec<FieldElement>>,
    jmax: usize,
    coeffs: Vec<FieldElement>,
}

impl PowerTable {
    fn base_row(jmax: usize) -> Vec<FieldElement> {
        let mut row = vec![FieldElement::zero(); jmax + 1];
        row[0] = FieldElement::one();
        row
    }

    pub fn new(series: &PowerSeries, jmax: usize) -> Self {
        let coeffs: Vec<FieldElement> = (0..=jmax as u64).map(|j| series.coeff(j)).collect();
        PowerTable {
            rows: vec![Self::base_row(jmax)],
            jmax,
            coeffs,
        }
    }

    pub fn jmax(&self) -> usize {
        self.jmax
    }

    pub fn computed_rows(&self) -> usize {
        self.rows.len()
    }

    /// Extend the table so rows `0..=imax` are available.
    pub fn ensure_rows(&mut self, imax: usize) {
        while self.rows.len() <= imax {
            let prev = self.rows.last().unwrap();
            let mut next = vec![FieldElement::zero(); self.jmax + 1];
            for (j, slot) in next.iter_mut().enumerate() {
                let mut acc = FieldElement::zero();
                for t in 0..=j {
                    acc = acc + &prev[t] * &self.coeffs[j - t];
                }
                *slot = acc;
            }
            self.rows.push(next);
        }
    }

    pub fn c(&mut self, i: usize, j: usize) -> FieldElement {
        assert!(
            j <= self.jmax,
            "column {} beyond table width {}",
            j,
            self.jmax
        );
        self.ensure_rows(i);
        self.rows[i][j].clone()
    }

    pub fn row(&mut self, i: usize) -> &[FieldElement] {
        self.ensure_rows(i);
        &self.rows[i]
    }
}

/// Eagerly build the power table for rows `0..=imax`, columns `0..=jmax`.
pub fn power_table(series: &PowerSeries, imax: usize, jmax: usize) -> PowerTable {
    let mut t = PowerTable::new(series, jmax);
    t.ensure_rows(imax);
    t
}

/// Formal n-th derivative: coefficient `j` is `(j+n)!/j! * a_{j+n}`.
pub fn formal_derivative(series: &PowerSeries, n: u64) -> PowerSeries {
    if n == 0 {
        return series.clone();
    }
    let coeff = series.coeff.clone();
    let derived = PowerSeries::from_fn(move |j| {
        let mut factor = Rat::from_integer(1.into());
        for t in 1..=n {
            factor *= Rat::from_integer((j + t).into());
        }
        FieldElement::from_rational(factor) * coeff(j + n)
    });
    match series.bound {
        Some(b) => derived.with_bound(
            b.slope,
            b.offset.saturating_add(b.slope.saturating_mul(n as i64)),
        ),
        None => derived,
    }
}

/// Valuation bookkeeping for the coefficients of a composition
/// `T(S(X))`: certified lower bounds on `v(c_ij)` and on the terms
/// `b_i c_ij` of the expected-coefficient series.
struct CompositionBounds {
    t: AffineBound,
    s: AffineBound,
    va0: Valuation,
}

impl CompositionBounds {
    /// Lower bound on `v(c_ij)` from the coefficient bounds: every
    /// product over a composition of j into i parts with z zero parts has
    /// valuation at least `z*v(a_0) + s.slope*j + (i-z)*s.offset`, and z
    /// ranges over an interval, so the minimum sits at an endpoint.
    fn c_bound(&self, i: u64, j: u64) -> Valuation {
        if i == 0 {
            return if j == 0 {
                Valuation::Finite(0)
            } else {
                Valuation::Infinite
            };
        }
        if j == 0 {
            return self.va0.scale(i as i64);
        }
        let eval = |z: u64| -> Valuation {
            self.va0.scale(z as i64).add_i64(
                self.s
                    .slope
                    .saturating_mul(j as i64)
                    .saturating_add(self.s.offset.saturating_mul((i - z) as i64)),
            )
        };
        let z_lo = i.saturating_sub(j);
        let z_hi = i - 1;
        eval(z_lo).min(eval(z_hi))
    }

    /// Lower bound on `v(b_i c_ij)`.
    fn term_bound(&self, i: u64, j: u64) -> Valuation {
        self.c_bound(i, j).add_i64(self.t.at(i))
    }

    /// Smallest i0 such that all terms with `i >= i0` have valuation at
    /// least `target`.
    fn series_cutoff(&self, j: u64, target: i64) -> u64 {
        let mut i0 = 0u64;
        let mut i = 0u64;
        loop {
            let b = self.term_bound(i, j);
            if !b.at_least(target) {
                i0 = i + 1;
            }
            // Beyond max(j, 1) the bounds are non-decreasing in i, so the
            // first satisfied index past that point is final.
            if i >= j.max(1) && b.at_least(target) {
                return i0;
            }
            i += 1;
            assert!(i < 1_000_000, "expected-coefficient cutoff scan diverged");
        }
    }

    /// Tail valuation actually achieved from cutoff `i0` at column j.
    fn tail_from(&self, i0: u64, j: u64) -> Valuation {
        let mut best = Valuation::Infinite;
        for i in i0..=i0.max(j.max(1)) + 1 {
            best = best.min(self.term_bound(i, j));
        }
        best
    }
}

/// One expected coefficient `d_j = sum_i b_i c_ij` of the composition.
#[derive(Clone, Debug)]
pub struct ExpectedCoefficient {
    pub index: u64,
    pub verdict: ConvergenceVerdict,
    /// True when the sum is a finite exact sum (the `a_0 = 0` shortcut).
    pub exact: bool,
}

/// Expected coefficients `d_0 ..= d_jmax` of `T(S(X))`.
#[derive(Debug)]
pub struct ExpectedCoefficients {
    pub coeffs: Vec<ExpectedCoefficient>,
}

impl ExpectedCoefficients {
    pub fn at(&self, j: u64) -> &ExpectedCoefficient {
        &self.coeffs[j as usize]
    }
}

/// Compute the expected coefficients of `T(S(X))` up to `jmax`, each as a
/// convergence verdict at the given precision.
///
/// With `a_0 = 0` each `d_j` is the exact finite sum over `i <= j`. With
/// `a_0 != 0` the series over i is certified through the affine bounds
/// whenever `T`'s slope plus `v(a_0)` reaches 1 (that is, T converges on
/// the valuation ball of `a_0`); otherwise the verdict falls back to the
/// sampled window, which is how a divergent `d_0` is witnessed.
pub fn expected_coefficients(
    t: &PowerSeries,
    s: &PowerSeries,
    jmax: u64,
    precision: i64,
    cfg: &SampleConfig,
) -> ExpectedCoefficients {
    expected_coefficients_scaled(t, s, jmax, |_| precision, cfg)
}

/// Same as [`expected_coefficients`] with a per-column precision, used by
/// the substitution criterion to keep outer truncation honest.
pub fn expected_coefficients_scaled<F>(
    t: &PowerSeries,
    s: &PowerSeries,
    jmax: u64,
    precision_for: F,
    cfg: &SampleConfig,
) -> ExpectedCoefficients
where
    F: Fn(u64) -> i64,
{
    let a0 = s.coeff(0);
    let mut table = PowerTable::new(s, jmax as usize);
    let mut coeffs = Vec::with_capacity(jmax as usize + 1);
    if a0.is_zero() {
        for j in 0..=jmax {
            let mut head = FieldElement::zero();
            for i in 0..=j {
                head = head + t.coeff(i) * table.c(i as usize, j as usize);
            }
            coeffs.push(ExpectedCoefficient {
                index: j,
                verdict: ConvergenceVerdict::Converges(ApproxElement::exact(head)),
                exact: true,
            });
        }
        return ExpectedCoefficients { coeffs };
    }

    let certified = match (t.bound, s.bound, a0.valuation()) {
        (Some(tb), Some(sb), Valuation::Finite(va0)) if tb.slope.saturating_add(va0) >= 1 => {
            Some(CompositionBounds {
                t: tb,
                s: sb,
                va0: Valuation::Finite(va0),
            })
        }
        _ => None,
    };

    for j in 0..=jmax {
        let target = precision_for(j);
        match &certified {
            Some(bounds) => {
                let i0 = bounds.series_cutoff(j, target);
                let mut head = FieldElement::zero();
                for i in 0..i0 {
                    head = head + t.coeff(i) * table.c(i as usize, j as usize);
                }
                let tail = bounds.tail_from(i0, j);
                coeffs.push(ExpectedCoefficient {
                    index: j,
                    verdict: ConvergenceVerdict::Converges(ApproxElement::new(head, tail)),
                    exact: false,
                });
            }
            None => {
                // No certificate: sample the exact term valuations.
                let window = cfg.window.max(4);
                let mut terms = Vec::with_capacity(window as usize);
                for i in 0..window {
                    terms.push(t.coeff(i) * table.c(i as usize, j as usize));
                }
                let stream = TermStream::from_fn(move |i| {
                    terms
                        .get(i as usize)
                        .cloned()
                        .unwrap_or_else(FieldElement::zero)
                });
                coeffs.push(ExpectedCoefficient {
                    index: j,
                    verdict: sum_with(&stream, target, cfg),
                    exact: false,
                });
            }
        }
    }
    ExpectedCoefficients { coeffs }
}

/// Outcome of the two-stage composite evaluation `x -> T(S(x))`.
#[derive(Clone, Debug)]
pub enum CompositeOutcome {
    Converges(ApproxElement),
    InnerFailed(ConvergenceVerdict),
    OuterFailed(ConvergenceVerdict),
}

impl CompositeOutcome {
    pub fn converged(&self) -> Option<&ApproxElement> {
        match self {
            CompositeOutcome::Converges(a) => Some(a),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            CompositeOutcome::Converges(a) => format!("converges: {}", a),
            CompositeOutcome::InnerFailed(v) => format!("inner series failed: {}", v.describe()),
            CompositeOutcome::OuterFailed(v) => format!("outer series failed: {}", v.describe()),
        }
    }
}

/// Inner precision that keeps an outer evaluation of `t` honest at
/// `precision`: enough for the substitution error and for the combined
/// slope to have a chance at certification.
fn inner_precision_for(t: &PowerSeries, precision: i64) -> i64 {
    match t.bound {
        Some(b) => (precision + 1)
            .max(precision - b.slope - b.offset)
            .max(1 - b.slope),
        None => precision + 1,
    }
}

/// Two-stage evaluation of the composite function: first `k = S(x)`, then
/// `T` at `k`. No formal reordering of coefficients is performed.
pub fn composite_eval(
    t: &PowerSeries,
    s: &PowerSeries,
    x: &FieldElement,
    precision: i64,
    cfg: &SampleConfig,
) -> CompositeOutcome {
    let q = inner_precision_for(t, precision);
    let inner = match s.eval(x, q, cfg) {
        ConvergenceVerdict::Converges(a) => a,
        v => return CompositeOutcome::InnerFailed(v),
    };
    match t.eval_at_approx(&inner, precision, cfg) {
        ConvergenceVerdict::Converges(a) => CompositeOutcome::Converges(a),
        v => CompositeOutcome::OuterFailed(v),
    }
}

/// Successful outcome of the substitution criterion: both hypotheses
/// verified, with the composed value computed through both routes.
#[derive(Clone, Debug)]
pub struct SubstitutionCertificate {
    /// k = S(x).
    pub inner_value: ApproxElement,
    /// k-bar = sum_j |a_j| |x|^j.
    pub abs_inner_value: ApproxElement,
    /// T(k) evaluated as a composite function.
    pub via_composite: ApproxElement,
    /// sum_j d_j x^j through the expected coefficients.
    pub via_expected: ApproxElement,
    pub precision: i64,
}

/// Why the substitution criterion could not certify.
#[derive(Clone, Debug)]
pub enum SubstitutionFailure {
    /// Both series need declared coefficient bounds.
    MissingBounds,
    /// Hypothesis (i): S does not converge at x.
    InnerNotConvergent { verdict: ConvergenceVerdict },
    /// Hypothesis (i): the absolute series does not converge at |x|.
    AbsNotConvergent { verdict: ConvergenceVerdict },
    /// Hypothesis (ii): T does not converge at k-bar.
    OuterAtAbsArgument {
        k_bar: ApproxElement,
        verdict: ConvergenceVerdict,
    },
    /// The outer truncation of the expected-coefficient route could not
    /// be certified from the declared bounds.
    OuterTruncationUncertified,
    /// An expected coefficient failed to converge (should be unreachable
    /// once the hypotheses hold).
    ExpectedCoefficientFailed { j: u64, verdict: ConvergenceVerdict },
    /// The composite route failed (should be unreachable once the
    /// hypotheses hold).
    CompositeFailed { verdict: ConvergenceVerdict },
}

impl fmt::Display for SubstitutionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubstitutionFailure::MissingBounds => {
                write!(f, "substitution criterion requires coefficient bounds")
            }
            SubstitutionFailure::InnerNotConvergent { verdict } => {
                write!(f, "hypothesis (i) failed, S(x): {}", verdict.describe())
            }
            SubstitutionFailure::AbsNotConvergent { verdict } => {
                write!(
                    f,
                    "hypothesis (i) failed, abs series: {}",
                    verdict.describe()
                )
            }
            SubstitutionFailure::OuterAtAbsArgument { k_bar, verdict } => write!(
                f,
                "hypothesis (ii) failed, T at k-bar = {}: {}",
                k_bar,
                verdict.describe()
            ),
            SubstitutionFailure::OuterTruncationUncertified => {
                write!(f, "outer truncation not certifiable from declared bounds")
            }
            SubstitutionFailure::ExpectedCoefficientFailed { j, verdict } => {
                write!(
                    f,
                    "expected coefficient d_{} failed: {}",
                    j,
                    verdict.describe()
                )
            }
            SubstitutionFailure::CompositeFailed { verdict } => {
                write!(f, "composite evaluation failed: {}", verdict.describe())
            }
        }
    }
}

/// The substitution criterion: evaluate `k = S(x)` and
/// `k-bar = abs_series(S)(|x|)`, check that T converges at `k-bar`, and on
/// success certify `T(k) = sum_j d_j x^j` by computing both sides to the
/// requested precision.
pub fn substitution_criterion(
    t: &PowerSeries,
    s: &PowerSeries,
    x: &FieldElement,
    precision: i64,
    cfg: &SampleConfig,
) -> Result<SubstitutionCertificate, Box<SubstitutionFailure>> {
    let (tb, sb) = match (t.bound, s.bound) {
        (Some(tb), Some(sb)) => (tb, sb),
        _ => return Err(Box::new(SubstitutionFailure::MissingBounds)),
    };
    let q = inner_precision_for(t, precision);
    let inner_value = match s.eval(x, q, cfg) {
        ConvergenceVerdict::Converges(a) => a,
        v => {
            return Err(Box::new(SubstitutionFailure::InnerNotConvergent {
                verdict: v,
            }))
        }
    };
    let abs_inner_value = match s.abs_series().eval(&x.abs(), q, cfg) {
        ConvergenceVerdict::Converges(a) => a,
        v => {
            return Err(Box::new(SubstitutionFailure::AbsNotConvergent {
                verdict: v,
            }))
        }
    };
    // Hypothesis (ii): T converges at k-bar.
    match t.eval_at_approx(&abs_inner_value, precision, cfg) {
        ConvergenceVerdict::Converges(_) => {}
        v => {
            return Err(Box::new(SubstitutionFailure::OuterAtAbsArgument {
                k_bar: abs_inner_value,
                verdict: v,
            }))
        }
    }
    // Composite route.
    let via_composite = match t.eval_at_approx(&inner_value, precision, cfg) {
        ConvergenceVerdict::Converges(a) => a,
        v => {
            return Err(Box::new(SubstitutionFailure::CompositeFailed {
                verdict: v,
            }))
        }
    };
    // Expected-coefficient route. Outer truncation: terms d_j x^j have
    // valuation at least d_value_bound(j) + j*v(x); a global affine
    // underestimate in j has slope s.slope + v(x) + min(0, t.slope + s.offset).
    let vx = match x.valuation() {
        Valuation::Finite(v) => v,
        Valuation::Infinite => {
            // x = 0: the composed value is d_0 alone.
            let d = expected_coefficients(t, s, 0, precision, cfg);
            let d0 = match d.at(0).verdict.converged() {
                Some(a) => a.clone(),
                None => {
                    return Err(Box::new(SubstitutionFailure::ExpectedCoefficientFailed {
                        j: 0,
                        verdict: d.at(0).verdict.clone(),
                    }))
                }
            };
            debug_assert!(via_composite.agrees_with(&d0, precision));
            return Ok(SubstitutionCertificate {
                inner_value,
                abs_inner_value,
                via_composite,
                via_expected: d0,
                precision,
            });
        }
    };
    let j_slope = sb
        .slope
        .saturating_add(vx)
        .saturating_add(0.min(tb.slope.saturating_add(sb.offset)));
    if j_slope < 1 {
        return Err(Box::new(SubstitutionFailure::OuterTruncationUncertified));
    }
    // Every branch of the composition bound gives
    // v(d_j x^j) >= t.offset + j * j_slope, so columns beyond the first
    // index where that reaches the precision can be dropped.
    let mut j_end = 0u64;
    while tb
        .offset
        .saturating_add(j_slope.saturating_mul(j_end as i64))
        < precision
    {
        j_end += 1;
        assert!(j_end < 1_000_000, "outer truncation scan diverged");
    }
    let mut head = FieldElement::zero();
    let mut tail = Valuation::Finite(
        tb.offset
            .saturating_add(j_slope.saturating_mul(j_end as i64)),
    );
    if j_end > 0 {
        let d = expected_coefficients_scaled(
            t,
            s,
            j_end - 1,
            |j| precision - vx.saturating_mul(j as i64),
            cfg,
        );
        for j in 0..j_end {
            match d.at(j).verdict.converged() {
                Some(a) => {
                    head = head + &a.head * x.pow(j as i64);
                    tail = tail.min(a.tail_valuation.add_i64(vx.saturating_mul(j as i64)));
                }
                None => {
                    return Err(Box::new(SubstitutionFailure::ExpectedCoefficientFailed {
                        j,
                        verdict: d.at(j).verdict.clone(),
                    }))
                }
            }
        }
    }
    let via_expected = ApproxElement::new(head, tail);
    debug_assert!(
        via_composite.agrees_with(&via_expected, precision),
        "substitution routes disagree at precision {}",
        precision
    );
    Ok(SubstitutionCertificate {
        inner_value,
        abs_inner_value,
        via_composite,
        via_expected,
        precision,
    })
}

/// Why no neighbourhood threshold could be produced.
#[derive(Clone, Debug)]
pub enum NeighborhoodFailure {
    MissingBounds,
    /// T does not converge at the constant coefficient `a_0` (or at the
    /// reference valuation for `a_0 = 0`).
    OuterNotConvergentAtConstant {
        verdict: ConvergenceVerdict,
    },
}

impl fmt::Display for NeighborhoodFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NeighborhoodFailure::MissingBounds => {
                write!(f, "neighbourhood threshold requires coefficient bounds")
            }
            NeighborhoodFailure::OuterNotConvergentAtConstant { verdict } => {
                write!(
                    f,
                    "outer series fails at the constant term: {}",
                    verdict.describe()
                )
            }
        }
    }
}

/// A valuation threshold `V` such that the substitution criterion holds
/// for every `x` with `v(x) >= V`. Balls in the field are valuation
/// balls, so the threshold is the natural neighbourhood radius.
pub fn neighborhood_radius(
    t: &PowerSeries,
    s: &PowerSeries,
    cfg: &SampleConfig,
) -> Result<i64, NeighborhoodFailure> {
    let (tb, sb) = match (t.bound, s.bound) {
        (Some(tb), Some(sb)) => (tb, sb),
        _ => return Err(NeighborhoodFailure::MissingBounds),
    };
    let a0 = s.coeff(0);
    // Keep the expected-coefficient truncation certifiable as well.
    let truncation_term = 1 - sb.slope - 0.min(tb.slope.saturating_add(sb.offset));
    match a0.valuation() {
        Valuation::Finite(va0) => {
            // Case a_0 != 0: T must converge on the valuation ball of a_0.
            if tb.slope.saturating_add(va0) < 1 {
                let terms = TermStream::from_fn({
                    let t = t.clone();
                    let a0 = a0.clone();
                    move |i| t.coeff(i) * a0.pow(i as i64)
                });
                let verdict = sum_with(&terms, 1, cfg);
                return Err(NeighborhoodFailure::OuterNotConvergentAtConstant { verdict });
            }
            // v(x) >= V keeps S convergent at x and every j >= 1 term of
            // the absolute series at or above v(a_0), so v(k-bar) = v(a_0).
            Ok((1 - sb.slope)
                .max(va0 - sb.offset - sb.slope)
                .max(truncation_term))
        }
        Valuation::Infinite => {
            // Case a_0 = 0: aim the inner value below the valuation where
            // T certifies, i.e. v(k-bar) >= 1 - t.slope.
            Ok((1 - sb.slope)
                .max(1 - tb.slope - sb.slope - sb.offset)
                .max(truncation_term))
        }
    }
}
