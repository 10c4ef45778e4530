//! Simple series over the field: partial sums, certified convergence
//! verdicts, splitting into non-negative parts, reordering along a
//! bijection, grouping, and the comparison test.
//!
//! A series converges exactly when its terms tend to zero, i.e. when the
//! term valuations tend to +infinity. Limits are not decidable from
//! finitely many terms, so `Converges` is only ever produced from a
//! caller-supplied certified tail bound; window sampling can produce a
//! witnessed `Diverges` or the honest `Unknown`, never a false
//! `Converges`.

use std::fmt;
use std::sync::Arc;

use crate::field::FieldElement;
use crate::valuation::Valuation;

/// Shared function type for stream terms.
pub type TermFn = Arc<dyn Fn(u64) -> FieldElement + Send + Sync>;
/// Certified tail bound: `bound(n)` is a lower bound on the valuation of
/// every term with index `>= n`; must be non-decreasing.
pub type BoundFn = Arc<dyn Fn(u64) -> Valuation + Send + Sync>;

/// Sampling parameters for verdicts that are not certificate-driven.
#[derive(Clone, Debug)]
pub struct SampleConfig {
    /// Number of leading terms inspected by the divergence heuristic.
    pub window: u64,
    /// How far the certificate scan searches for a tail bound that
    /// reaches the requested precision.
    pub certificate_scan: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            window: 64,
            certificate_scan: 65_536,
        }
    }
}

impl SampleConfig {
    pub fn with_window(window: u64) -> Self {
        SampleConfig {
            window,
            ..SampleConfig::default()
        }
    }
}

/// A countable sequence of field elements, optionally carrying a
/// certified lower bound on the valuations of its tail.
#[derive(Clone)]
pub struct TermStream {
    term: TermFn,
    tail_bound: Option<BoundFn>,
}

impl TermStream {
    pub fn from_fn<F>(term: F) -> Self
    where
        F: Fn(u64) -> FieldElement + Send + Sync + 'static,
    {
        TermStream {
            term: Arc::new(term),
            tail_bound: None,
        }
    }

    /// Attach a certified tail bound. The bound is a contract: for all
    /// `m >= n`, `valuation(term(m)) >= bound(n)`, and `bound` is
    /// non-decreasing. Consumers spot-check it on sampled windows.
    pub fn with_bound<B>(mut self, bound: B) -> Self
    where
        B: Fn(u64) -> Valuation + Send + Sync + 'static,
    {
        self.tail_bound = Some(Arc::new(bound));
        self
    }

    /// Affine tail bound `slope*n + offset`, only attached when it is
    /// genuinely non-decreasing.
    pub fn with_affine_bound(self, slope: i64, offset: i64) -> Self {
        if slope >= 0 {
            self.with_bound(move |n| Valuation::Finite(slope.saturating_mul(n as i64) + offset))
        } else {
            self
        }
    }

    /// The all-zero stream, certified exactly.
    pub fn zeros() -> Self {
        TermStream::from_fn(|_| FieldElement::zero()).with_bound(|_| Valuation::Infinite)
    }

    /// Geometric stream `x^n`, certified when v(x) >= 1.
    pub fn geometric(x: FieldElement) -> Self {
        let vx = x.valuation();
        let stream = TermStream::from_fn(move |n| x.pow(n as i64));
        match vx {
            Valuation::Finite(v) if v >= 1 => {
                stream.with_bound(move |n| Valuation::Finite(v.saturating_mul(n as i64)))
            }
            Valuation::Infinite => {
                // x = 0: only the n = 0 term survives.
                stream.with_bound(|n| {
                    if n == 0 {
                        Valuation::Finite(0)
                    } else {
                        Valuation::Infinite
                    }
                })
            }
            _ => stream,
        }
    }

    /// Finitely many terms followed by zeros; exact certificate.
    pub fn from_terms(terms: Vec<FieldElement>) -> Self {
        let vals: Vec<Valuation> = terms.iter().map(|t| t.valuation()).collect();
        let len = terms.len() as u64;
        let bound = move |n: u64| {
            vals.iter()
                .skip(n as usize)
                .fold(Valuation::Infinite, |acc, v| acc.min(*v))
        };
        TermStream::from_fn(move |n| {
            terms
                .get(n as usize)
                .cloned()
                .unwrap_or_else(FieldElement::zero)
        })
        .with_bound(move |n| {
            if n >= len {
                Valuation::Infinite
            } else {
                bound(n)
            }
        })
    }

    pub fn term(&self, n: u64) -> FieldElement {
        (self.term)(n)
    }

    pub fn tail_bound(&self) -> Option<&BoundFn> {
        self.tail_bound.as_ref()
    }

    pub fn bound_at(&self, n: u64) -> Option<Valuation> {
        self.tail_bound.as_ref().map(|b| b(n))
    }

    /// Map every term through `f`; the tail bound only survives when the
    /// map cannot lower valuations (caller's responsibility).
    fn map_keep_bound<F>(&self, f: F) -> TermStream
    where
        F: Fn(FieldElement) -> FieldElement + Send + Sync + 'static,
    {
        let term = self.term.clone();
        TermStream {
            term: Arc::new(move |n| f(term(n))),
            tail_bound: self.tail_bound.clone(),
        }
    }
}

impl fmt::Debug for TermStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TermStream")
            .field("certified", &self.tail_bound.is_some())
            .finish()
    }
}

/// A field value known modulo `e^P`: an exact head plus a certified lower
/// bound on the valuation of the difference from the true value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxElement {
    pub head: FieldElement,
    pub tail_valuation: Valuation,
}

impl ApproxElement {
    pub fn exact(head: FieldElement) -> Self {
        ApproxElement {
            head,
            tail_valuation: Valuation::Infinite,
        }
    }

    pub fn new(head: FieldElement, tail_valuation: Valuation) -> Self {
        ApproxElement {
            head,
            tail_valuation,
        }
    }

    /// Precision at which comparisons against this value are meaningful.
    pub fn effective_precision(&self, requested: i64) -> Valuation {
        self.tail_valuation.min(Valuation::Finite(requested))
    }

    /// Verified equality at precision `p`: the heads differ by an element
    /// of valuation at least `min(p, both tail bounds)`.
    pub fn agrees_with(&self, other: &ApproxElement, p: i64) -> bool {
        let cutoff = self
            .tail_valuation
            .min(other.tail_valuation)
            .min(Valuation::Finite(p));
        match cutoff {
            Valuation::Infinite => self.head == other.head,
            Valuation::Finite(c) => (&self.head - &other.head).valuation().at_least(c),
        }
    }

    pub fn agrees_with_element(&self, value: &FieldElement, p: i64) -> bool {
        self.agrees_with(&ApproxElement::exact(value.clone()), p)
    }
}

impl fmt::Display for ApproxElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tail_valuation {
            Valuation::Infinite => write!(f, "{}", self.head),
            Valuation::Finite(t) => write!(f, "{} + O(e^{})", self.head, t),
        }
    }
}

/// Sampled term valuations, kept as evidence in non-certified verdicts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuationProfile {
    pub samples: Vec<(u64, Valuation)>,
}

/// Witness that sampled terms do not tend to zero: within the window,
/// valuations never rose above `floor` in the late half.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivergenceWitness {
    /// First sampled index whose valuation is at most `floor`.
    pub first_index: u64,
    /// Valuation level the sampled terms keep returning to.
    pub floor: i64,
    /// Window length the witness was drawn from.
    pub window: u64,
    pub profile: ValuationProfile,
}

/// Outcome of summing a stream at a requested precision.
#[derive(Clone, Debug)]
pub enum ConvergenceVerdict {
    /// Certified: the head differs from the true sum by valuation >= the
    /// recorded tail bound (which meets the requested precision).
    Converges(ApproxElement),
    /// Witnessed within the sampled window: terms stagnate at a bounded
    /// valuation instead of tending to zero.
    Diverges(DivergenceWitness),
    /// No certificate and no stagnation pattern; honest fallback.
    Unknown(ValuationProfile),
}

impl ConvergenceVerdict {
    pub fn converged(&self) -> Option<&ApproxElement> {
        match self {
            ConvergenceVerdict::Converges(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_diverges(&self) -> bool {
        matches!(self, ConvergenceVerdict::Diverges(_))
    }

    pub fn divergence_witness(&self) -> Option<&DivergenceWitness> {
        match self {
            ConvergenceVerdict::Diverges(w) => Some(w),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ConvergenceVerdict::Converges(a) => format!("converges: {}", a),
            ConvergenceVerdict::Diverges(w) => format!(
                "diverges: sampled terms stagnate at valuation {} from index {} (window {})",
                w.floor, w.first_index, w.window
            ),
            ConvergenceVerdict::Unknown(p) => format!(
                "unknown: no certificate; sampled {} terms without a stagnation witness",
                p.samples.len()
            ),
        }
    }
}

/// Errors from series operations with explicit preconditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeriesError {
    /// forward/inverse of a bijection disagree at the given index.
    BijectionInconsistent { index: u64 },
    /// Declared backward displacement bound violated at the given index.
    DisplacementViolated { index: u64 },
    /// |b_n| <= |a_n| failed at the given index.
    DominationViolated { index: u64 },
    /// The operation needs a certified tail bound that is absent.
    MissingCertificate,
}

impl fmt::Display for SeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesError::BijectionInconsistent { index } => {
                write!(f, "bijection forward/inverse disagree at index {}", index)
            }
            SeriesError::DisplacementViolated { index } => {
                write!(
                    f,
                    "bijection displacement bound violated at index {}",
                    index
                )
            }
            SeriesError::DominationViolated { index } => {
                write!(f, "domination |b_n| <= |a_n| violated at index {}", index)
            }
            SeriesError::MissingCertificate => {
                write!(f, "operation requires a certified tail bound")
            }
        }
    }
}

impl std::error::Error for SeriesError {}

/// Exact partial sum of the first `n+1` terms; `n = -1` gives zero.
pub fn partial_sum(s: &TermStream, n: i64) -> FieldElement {
    let mut acc = FieldElement::zero();
    for k in 0..=n.max(-1) {
        if k >= 0 {
            acc = acc + s.term(k as u64);
        }
    }
    acc
}

/// Sum with default sampling configuration.
pub fn sum(s: &TermStream, precision: i64) -> ConvergenceVerdict {
    sum_with(s, precision, &SampleConfig::default())
}

/// Sum a stream at the requested precision.
///
/// With a tail bound, scans for the first index whose certified tail
/// reaches the precision and returns the exact partial sum before it.
/// Without one (or when the scan fails), falls back to window sampling:
/// stagnating valuations give a `Diverges` witness, anything else is
/// `Unknown`.
pub fn sum_with(s: &TermStream, precision: i64, cfg: &SampleConfig) -> ConvergenceVerdict {
    if let Some(bound) = s.tail_bound() {
        let mut n0 = None;
        for n in 0..=cfg.certificate_scan {
            if bound(n).at_least(precision) {
                n0 = Some(n);
                break;
            }
        }
        if let Some(n0) = n0 {
            #[cfg(debug_assertions)]
            {
                let check_to = n0 + cfg.window.min(16);
                for m in 0..check_to {
                    debug_assert!(
                        s.term(m).valuation() >= bound(m.min(n0)),
                        "tail bound certificate violated at index {}",
                        m
                    );
                }
            }
            let head = partial_sum(s, n0 as i64 - 1);
            return ConvergenceVerdict::Converges(ApproxElement::new(head, bound(n0)));
        }
    }
    sample_verdict(s, cfg)
}

fn sample_verdict(s: &TermStream, cfg: &SampleConfig) -> ConvergenceVerdict {
    let w = cfg.window.max(4);
    let samples: Vec<(u64, Valuation)> = (0..w).map(|n| (n, s.term(n).valuation())).collect();
    stagnation_verdict(samples, w)
}

/// The divergence heuristic on a sampled valuation profile: when the
/// finite valuations of the late half never rise above those of the early
/// half, the terms are not tending to zero and a witnessed `Diverges` is
/// returned; otherwise `Unknown`.
pub fn stagnation_verdict(samples: Vec<(u64, Valuation)>, window: u64) -> ConvergenceVerdict {
    let profile = ValuationProfile {
        samples: samples.clone(),
    };
    let half = samples.len() / 2;
    let finite_max = |range: &[(u64, Valuation)]| -> Option<i64> {
        range.iter().filter_map(|(_, v)| v.finite()).max()
    };
    let early = finite_max(&samples[..half]);
    let late = finite_max(&samples[half..]);
    match (early, late) {
        (Some(e), Some(l)) if l <= e => {
            // Valuations stopped rising: the sampled terms keep returning
            // to a bounded level instead of tending to zero.
            let floor = e.max(l);
            let first_index = samples
                .iter()
                .find(|(_, v)| match v {
                    Valuation::Finite(x) => *x <= floor,
                    Valuation::Infinite => false,
                })
                .map(|(n, _)| *n)
                .unwrap_or(0);
            ConvergenceVerdict::Diverges(DivergenceWitness {
                first_index,
                floor,
                window,
                profile,
            })
        }
        _ => ConvergenceVerdict::Unknown(profile),
    }
}

/// Split a stream into its non-negative positive and negative parts:
/// `c = plus - minus` with `plus = (|c|+c)/2`, `minus = (|c|-c)/2`.
/// Both parts inherit the tail bound (taking absolute values and halving
/// cannot lower a valuation).
pub fn split_pm(s: &TermStream) -> (TermStream, TermStream) {
    let half = FieldElement::from_ratio(1, 2);
    let h1 = half.clone();
    let plus = s.map_keep_bound(move |c| (c.abs() + &c) * &h1);
    let minus = s.map_keep_bound(move |c| (c.abs() - &c) * &half);
    (plus, minus)
}

/// Group consecutive pairs: term'(n) = c(2n) + c(2n+1).
pub fn group_pairs(s: &TermStream) -> TermStream {
    let term = s.term.clone();
    let grouped = TermStream::from_fn(move |n| term(2 * n) + term(2 * n + 1));
    match s.tail_bound() {
        Some(b) => {
            let b = b.clone();
            grouped.with_bound(move |n| b(2 * n))
        }
        None => grouped,
    }
}

/// A bijection of the index set, supplied as a forward/inverse pair
/// because inverting an arbitrary function on the naturals is not
/// computable. An optional certified displacement bound
/// (`forward(n) >= n - c`) lets tail bounds transport through the
/// reordering.
#[derive(Clone)]
pub struct Bijection {
    forward: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    inverse: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    max_backward_shift: Option<u64>,
}

impl Bijection {
    pub fn new<F, G>(forward: F, inverse: G) -> Self
    where
        F: Fn(u64) -> u64 + Send + Sync + 'static,
        G: Fn(u64) -> u64 + Send + Sync + 'static,
    {
        Bijection {
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
            max_backward_shift: None,
        }
    }

    /// Certify that `forward(n) >= n - c` for all n.
    pub fn with_backward_shift(mut self, c: u64) -> Self {
        self.max_backward_shift = Some(c);
        self
    }

    pub fn identity() -> Self {
        Bijection::new(|n| n, |n| n).with_backward_shift(0)
    }

    /// Swap each pair (2k, 2k+1).
    pub fn pair_swap() -> Self {
        let swap = |n: u64| if n % 2 == 0 { n + 1 } else { n - 1 };
        Bijection::new(swap, swap).with_backward_shift(1)
    }

    /// Reverse each block [k*len, (k+1)*len - 1].
    pub fn block_reversal(len: u64) -> Self {
        assert!(len >= 1);
        let rev = move |n: u64| {
            let block = n / len;
            block * len + (len - 1 - n % len)
        };
        Bijection::new(rev, rev).with_backward_shift(len - 1)
    }

    pub fn forward(&self, n: u64) -> u64 {
        (self.forward)(n)
    }

    pub fn inverse(&self, n: u64) -> u64 {
        (self.inverse)(n)
    }
}

/// Reorder a stream along a bijection. Verifies forward/inverse agree on
/// the sampled window and transports the tail bound through the declared
/// displacement bound when present.
pub fn reorder(
    s: &TermStream,
    f: &Bijection,
    cfg: &SampleConfig,
) -> Result<TermStream, SeriesError> {
    for n in 0..cfg.window {
        if f.inverse(f.forward(n)) != n || f.forward(f.inverse(n)) != n {
            return Err(SeriesError::BijectionInconsistent { index: n });
        }
        if let Some(c) = f.max_backward_shift {
            if f.forward(n) + c < n {
                return Err(SeriesError::DisplacementViolated { index: n });
            }
        }
    }
    let term = s.term.clone();
    let fwd = f.forward.clone();
    let reordered = TermStream::from_fn(move |n| term(fwd(n)));
    Ok(match (s.tail_bound(), f.max_backward_shift) {
        (Some(b), Some(c)) => {
            let b = b.clone();
            reordered.with_bound(move |n| b(n.saturating_sub(c)))
        }
        _ => reordered,
    })
}

/// Comparison test: if `a` converges with a certificate and
/// `|b_n| <= |a_n|`, then `b` converges and inherits the certificate.
/// The domination is verified on the sampled window and is the caller's
/// contract beyond it.
pub fn dominated_convergence_check(
    a: &TermStream,
    b: &TermStream,
    precision: i64,
    cfg: &SampleConfig,
) -> Result<ConvergenceVerdict, SeriesError> {
    let bound = a.tail_bound().ok_or(SeriesError::MissingCertificate)?;
    for n in 0..cfg.window {
        let ba = a.term(n).abs();
        let bb = b.term(n).abs();
        if bb.cmp_order(&ba) == std::cmp::Ordering::Greater {
            return Err(SeriesError::DominationViolated { index: n });
        }
    }
    let b2 = TermStream {
        term: b.term.clone(),
        tail_bound: Some(bound.clone()),
    };
    Ok(sum_with(&b2, precision, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps() -> FieldElement {
        FieldElement::epsilon()
    }

    fn geometric_closed_form() -> FieldElement {
        FieldElement::one() / (FieldElement::one() - eps())
    }

    #[test]
    fn streams_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<TermStream>();
        assert_send_sync::<ApproxElement>();
        assert_send_sync::<ConvergenceVerdict>();
    }

    #[test]
    fn partial_sums_are_exact() {
        let s = TermStream::geometric(eps());
        let p = partial_sum(&s, 2);
        assert_eq!(p, FieldElement::one() + eps() + eps().pow(2));
        assert_eq!(partial_sum(&TermStream::zeros(), 10), FieldElement::zero());
        assert_eq!(partial_sum(&s, -1), FieldElement::zero());
    }

    #[test]
    fn certified_geometric_sum() {
        let s = TermStream::geometric(eps());
        match sum(&s, 10) {
            ConvergenceVerdict::Converges(a) => {
                // head = (1 - e^10)/(1 - e), equal to 1/(1-e) at precision 10
                let expected =
                    (FieldElement::one() - eps().pow(10)) / (FieldElement::one() - eps());
                assert_eq!(a.head, expected);
                assert!(a.tail_valuation.at_least(10));
                assert!(a.agrees_with_element(&geometric_closed_form(), 10));
            }
            v => panic!("expected convergence, got {}", v.describe()),
        }
    }

    #[test]
    fn constant_valuation_terms_diverge() {
        // (1/(1-e))^n has valuation 0 for every n.
        let r = geometric_closed_form();
        let s = TermStream::from_fn(move |n| r.pow(n as i64));
        match sum(&s, 8) {
            ConvergenceVerdict::Diverges(w) => assert_eq!(w.floor, 0),
            v => panic!("expected divergence, got {}", v.describe()),
        }
    }

    #[test]
    fn zero_stream_converges_to_zero() {
        match sum(&TermStream::zeros(), 50) {
            ConvergenceVerdict::Converges(a) => {
                assert!(a.head.is_zero());
                assert_eq!(a.tail_valuation, Valuation::Infinite);
            }
            v => panic!("expected convergence, got {}", v.describe()),
        }
    }

    #[test]
    fn growing_valuations_without_certificate_are_unknown() {
        let s = TermStream::from_fn(|n| eps().pow(n as i64));
        assert!(matches!(sum(&s, 8), ConvergenceVerdict::Unknown(_)));
    }

    #[test]
    fn split_separates_signs() {
        // c_n = (-1)^n e^n
        let s = TermStream::from_fn(|n| {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            FieldElement::from_int(sign) * eps().pow(n as i64)
        })
        .with_affine_bound(1, 0);
        let (plus, minus) = split_pm(&s);
        for n in 0..6u64 {
            if n % 2 == 0 {
                assert_eq!(plus.term(n), eps().pow(n as i64));
                assert!(minus.term(n).is_zero());
            } else {
                assert!(plus.term(n).is_zero());
                assert_eq!(minus.term(n), eps().pow(n as i64));
            }
            assert_eq!(s.term(n), plus.term(n) - minus.term(n));
        }
        // an all-positive stream splits into (itself, zeros)
        let pos = TermStream::geometric(eps());
        let (pp, pm) = split_pm(&pos);
        for n in 0..6u64 {
            assert_eq!(pp.term(n), pos.term(n));
            assert!(pm.term(n).is_zero());
        }
        // negative first term goes entirely to the minus part
        let neg = TermStream::from_fn(|_| -FieldElement::one());
        let (p0, m0) = split_pm(&neg);
        assert!(p0.term(0).is_zero());
        assert!(m0.term(0).is_one());
        // splitting respects the certificate
        let vp = sum(&plus, 12).converged().cloned().unwrap();
        let vm = sum(&minus, 12).converged().cloned().unwrap();
        let vs = sum(&s, 12).converged().cloned().unwrap();
        let difference = ApproxElement::new(
            &vp.head - &vm.head,
            vp.tail_valuation.min(vm.tail_valuation),
        );
        assert!(difference.agrees_with(&vs, 12));
    }

    #[test]
    fn reorder_preserves_certified_sums() {
        let s = TermStream::geometric(eps());
        let cfg = SampleConfig::default();
        let base = sum(&s, 16).converged().cloned().unwrap();
        for bij in [
            Bijection::identity(),
            Bijection::pair_swap(),
            Bijection::block_reversal(4),
        ] {
            let r = reorder(&s, &bij, &cfg).unwrap();
            let v = sum(&r, 16).converged().cloned().unwrap();
            assert!(v.agrees_with(&base, 16));
        }
    }

    #[test]
    fn inconsistent_bijection_is_rejected() {
        let bad = Bijection::new(|n| n + 1, |n| n + 1);
        let s = TermStream::geometric(eps());
        assert_eq!(
            reorder(&s, &bad, &SampleConfig::default()).unwrap_err(),
            SeriesError::BijectionInconsistent { index: 0 }
        );
    }

    #[test]
    fn grouping_pairs_keeps_the_sum() {
        let s = TermStream::geometric(eps());
        let g = group_pairs(&s);
        let v1 = sum(&s, 16).converged().cloned().unwrap();
        let v2 = sum(&g, 16).converged().cloned().unwrap();
        assert!(v1.agrees_with(&v2, 16));
    }

    #[test]
    fn comparison_test_inherits_certificate() {
        let cfg = SampleConfig::default();
        let a = TermStream::geometric(eps());
        // |b_n| = |a_n|: alternating signs
        let b = TermStream::from_fn(|n| {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            FieldElement::from_int(sign) * eps().pow(n as i64)
        });
        let v = dominated_convergence_check(&a, &b, 12, &cfg).unwrap();
        let expected = FieldElement::one() / (FieldElement::one() + eps());
        assert!(v.converged().unwrap().agrees_with_element(&expected, 12));

        // strict domination b_n = a_{n+1}
        let c = TermStream::from_fn(|n| eps().pow(n as i64 + 1));
        assert!(dominated_convergence_check(&a, &c, 12, &cfg)
            .unwrap()
            .converged()
            .is_some());

        // constant 1 is not dominated
        let d = TermStream::from_fn(|_| FieldElement::one());
        assert_eq!(
            dominated_convergence_check(&a, &d, 12, &cfg).unwrap_err(),
            SeriesError::DominationViolated { index: 1 }
        );
    }

    #[test]
    fn example_partial_sums_telescope() {
        // a_0 = e/(1-e), a_n = -1 for n >= 1, evaluated termwise at x = e:
        // partial sums are e^{N+1}/(1-e).
        let one = FieldElement::one();
        let a0 = eps() / (&one - &eps());
        let s = TermStream::from_fn(move |n| {
            if n == 0 {
                a0.clone()
            } else {
                -eps().pow(n as i64)
            }
        })
        .with_affine_bound(1, 0);
        for n in 0..12i64 {
            let expected = eps().pow(n + 1) / (&one - &eps());
            assert_eq!(partial_sum(&s, n), expected);
        }
    }
}
