//! Double series over the grid of pairs of naturals: linearization along
//! a pairing bijection, row/column iterated sums, Fubini-type triple
//! equality, the converse criterion with its hypothesis checks, Goursat
//! exhaustion sums, partition sums, restricted sums, products of series,
//! and the counterexample array whose rows all vanish while column 0
//! diverges.
//!
//! The sum of a double series is defined through a bijection of the
//! naturals onto the grid; any two pairings give the same value, so all
//! verdicts here are produced by transporting certified tail bounds
//! through that linearization.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::field::FieldElement;
use crate::series::{
    sum_with, ApproxElement, BoundFn, ConvergenceVerdict, SampleConfig, TermStream,
};
use crate::valuation::Valuation;

/// Entry function type for double arrays.
pub type EntryFn = Arc<dyn Fn(u64, u64) -> FieldElement + Send + Sync>;
/// Per-line bound: `(line, n) -> valuation bound for indices >= n`.
pub type LineBoundFn = Arc<dyn Fn(u64, u64) -> Valuation + Send + Sync>;

/// Errors from double-series operations.
#[derive(Clone, Debug)]
pub enum DoubleSeriesError {
    /// The operation needs a certified joint bound that is absent.
    MissingCertificate,
    /// A required sub-sum did not produce a certified convergence.
    NotCertified {
        context: String,
        verdict: ConvergenceVerdict,
    },
    /// Goursat chain failed validation.
    ChainInvalid { reason: String },
    /// Partition failed validation.
    PartitionInvalid { reason: String },
    /// A certificate scan ran out of budget before reaching the target.
    ScanExhausted { context: String },
}

impl fmt::Display for DoubleSeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DoubleSeriesError::MissingCertificate => {
                write!(
                    f,
                    "double series operation requires a joint valuation bound"
                )
            }
            DoubleSeriesError::NotCertified { context, verdict } => {
                write!(f, "{}: {}", context, verdict.describe())
            }
            DoubleSeriesError::ChainInvalid { reason } => write!(f, "invalid chain: {}", reason),
            DoubleSeriesError::PartitionInvalid { reason } => {
                write!(f, "invalid partition: {}", reason)
            }
            DoubleSeriesError::ScanExhausted { context } => {
                write!(f, "certificate scan exhausted: {}", context)
            }
        }
    }
}

impl std::error::Error for DoubleSeriesError {}

/// Which hypothesis of the converse criterion failed.
#[derive(Clone, Debug)]
pub enum ConverseFailure {
    /// Some row series did not converge.
    Row {
        index: u64,
        verdict: ConvergenceVerdict,
    },
    /// The iterated series of row absolute sums did not converge.
    IteratedAbs { verdict: ConvergenceVerdict },
    /// Hypotheses held but the certified sum could not be assembled.
    Internal(DoubleSeriesError),
}

impl fmt::Display for ConverseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConverseFailure::Row { index, verdict } => {
                write!(f, "row {} hypothesis failed: {}", index, verdict.describe())
            }
            ConverseFailure::IteratedAbs { verdict } => write!(
                f,
                "iterated absolute-sum hypothesis failed: {}",
                verdict.describe()
            ),
            ConverseFailure::Internal(e) => write!(f, "{}", e),
        }
    }
}

/// A map from grid positions to field elements, with optional certified
/// valuation bounds.
///
/// `joint_bound(n)` lower-bounds the valuation of every entry with
/// `i + j >= n` and must be non-decreasing. Per-row and per-column bounds
/// allow certifying line sums of arrays whose double series diverges.
#[derive(Clone)]
pub struct DoubleArray {
    entry: EntryFn,
    joint_bound: Option<BoundFn>,
    row_bound: Option<LineBoundFn>,
    col_bound: Option<LineBoundFn>,
}

impl DoubleArray {
    pub fn from_fn<F>(entry: F) -> Self
    where
        F: Fn(u64, u64) -> FieldElement + Send + Sync + 'static,
    {
        DoubleArray {
            entry: Arc::new(entry),
            joint_bound: None,
            row_bound: None,
            col_bound: None,
        }
    }

    pub fn with_joint_bound<B>(mut self, bound: B) -> Self
    where
        B: Fn(u64) -> Valuation + Send + Sync + 'static,
    {
        self.joint_bound = Some(Arc::new(bound));
        self
    }

    /// Affine joint bound `slope*n + offset` (slope must be >= 0).
    pub fn with_affine_joint_bound(self, slope: i64, offset: i64) -> Self {
        assert!(slope >= 0);
        self.with_joint_bound(move |n| Valuation::Finite(slope.saturating_mul(n as i64) + offset))
    }

    pub fn with_row_bound<B>(mut self, bound: B) -> Self
    where
        B: Fn(u64, u64) -> Valuation + Send + Sync + 'static,
    {
        self.row_bound = Some(Arc::new(bound));
        self
    }

    pub fn with_col_bound<B>(mut self, bound: B) -> Self
    where
        B: Fn(u64, u64) -> Valuation + Send + Sync + 'static,
    {
        self.col_bound = Some(Arc::new(bound));
        self
    }

    /// Finitely supported array with an exact joint bound.
    pub fn from_finite(entries: Vec<(u64, u64, FieldElement)>) -> Self {
        let bound_data: Vec<(u64, Valuation)> = entries
            .iter()
            .map(|(i, j, v)| (i + j, v.valuation()))
            .collect();
        let map: std::collections::HashMap<(u64, u64), FieldElement> =
            entries.into_iter().map(|(i, j, v)| ((i, j), v)).collect();
        DoubleArray::from_fn(move |i, j| {
            map.get(&(i, j)).cloned().unwrap_or_else(FieldElement::zero)
        })
        .with_joint_bound(move |n| {
            bound_data
                .iter()
                .filter(|(d, _)| *d >= n)
                .fold(Valuation::Infinite, |acc, (_, v)| acc.min(*v))
        })
    }

    pub fn entry(&self, i: u64, j: u64) -> FieldElement {
        (self.entry)(i, j)
    }

    pub fn joint_bound(&self) -> Option<&BoundFn> {
        self.joint_bound.as_ref()
    }

    /// Entry-wise absolute values; valuations are unchanged so every
    /// bound carries over.
    pub fn abs(&self) -> DoubleArray {
        let entry = self.entry.clone();
        DoubleArray {
            entry: Arc::new(move |i, j| entry(i, j).abs()),
            joint_bound: self.joint_bound.clone(),
            row_bound: self.row_bound.clone(),
            col_bound: self.col_bound.clone(),
        }
    }

    /// Mask the array by a membership predicate; valuations can only
    /// rise, so bounds carry over.
    pub fn restrict<P>(&self, pred: P) -> DoubleArray
    where
        P: Fn(u64, u64) -> bool + Send + Sync + 'static,
    {
        let entry = self.entry.clone();
        DoubleArray {
            entry: Arc::new(move |i, j| {
                if pred(i, j) {
                    entry(i, j)
                } else {
                    FieldElement::zero()
                }
            }),
            joint_bound: self.joint_bound.clone(),
            row_bound: self.row_bound.clone(),
            col_bound: self.col_bound.clone(),
        }
    }

    /// The single-row stream `j -> entry(i, j)`, with the strongest
    /// available certificate (row bound, or joint bound shifted by i).
    pub fn row_stream(&self, i: u64) -> TermStream {
        let entry = self.entry.clone();
        let s = TermStream::from_fn(move |j| entry(i, j));
        match (self.row_bound.clone(), self.joint_bound.clone()) {
            (Some(rb), Some(jb)) => s.with_bound(move |n| {
                let a = rb(i, n);
                let b = jb(i + n);
                if a >= b {
                    a
                } else {
                    b
                }
            }),
            (Some(rb), None) => s.with_bound(move |n| rb(i, n)),
            (None, Some(jb)) => s.with_bound(move |n| jb(i + n)),
            (None, None) => s,
        }
    }

    pub fn column_stream(&self, j: u64) -> TermStream {
        let entry = self.entry.clone();
        let s = TermStream::from_fn(move |i| entry(i, j));
        match (self.col_bound.clone(), self.joint_bound.clone()) {
            (Some(cb), Some(jb)) => s.with_bound(move |n| {
                let a = cb(j, n);
                let b = jb(j + n);
                if a >= b {
                    a
                } else {
                    b
                }
            }),
            (Some(cb), None) => s.with_bound(move |n| cb(j, n)),
            (None, Some(jb)) => s.with_bound(move |n| jb(j + n)),
            (None, None) => s,
        }
    }
}

impl fmt::Debug for DoubleArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DoubleArray")
            .field("joint_certified", &self.joint_bound.is_some())
            .field("row_certified", &self.row_bound.is_some())
            .field("col_certified", &self.col_bound.is_some())
            .finish()
    }
}

/// A bijection between the naturals and the grid, with an explicit
/// exhaustion function: `exhaustion(k)` is the largest `n` such that all
/// pairs with `i + j < n` occur among the first `k` indices. This is what
/// lets a joint bound become a linearized tail bound.
#[derive(Clone)]
pub struct Pairing {
    to_pair: Arc<dyn Fn(u64) -> (u64, u64) + Send + Sync>,
    from_pair: Arc<dyn Fn(u64, u64) -> u64 + Send + Sync>,
    exhaustion: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    name: &'static str,
}

fn triangle(n: u64) -> u64 {
    n * (n + 1) / 2
}

fn diagonal_of_index(k: u64) -> (u64, u64) {
    // Largest d with d(d+1)/2 <= k, plus the offset on the diagonal.
    let mut d = (((8.0 * k as f64 + 1.0).sqrt() - 1.0) / 2.0) as u64;
    while triangle(d + 1) <= k {
        d += 1;
    }
    while triangle(d) > k {
        d -= 1;
    }
    (d, k - triangle(d))
}

impl Pairing {
    /// Cantor enumeration: diagonals in increasing order, each walked
    /// from (0, d) to (d, 0).
    pub fn cantor() -> Self {
        Pairing {
            to_pair: Arc::new(|k| {
                let (d, r) = diagonal_of_index(k);
                (r, d - r)
            }),
            from_pair: Arc::new(|i, j| triangle(i + j) + i),
            exhaustion: Arc::new(|k| diagonal_of_index(k).0),
            name: "cantor",
        }
    }

    /// Boustrophedon enumeration: diagonals in increasing order, walked
    /// in alternating directions.
    pub fn boustrophedon() -> Self {
        Pairing {
            to_pair: Arc::new(|k| {
                let (d, r) = diagonal_of_index(k);
                if d % 2 == 0 {
                    (d - r, r)
                } else {
                    (r, d - r)
                }
            }),
            from_pair: Arc::new(|i, j| {
                let d = i + j;
                let r = if d % 2 == 0 { j } else { i };
                triangle(d) + r
            }),
            exhaustion: Arc::new(|k| diagonal_of_index(k).0),
            name: "boustrophedon",
        }
    }

    pub fn to_pair(&self, k: u64) -> (u64, u64) {
        (self.to_pair)(k)
    }

    pub fn from_pair(&self, i: u64, j: u64) -> u64 {
        (self.from_pair)(i, j)
    }

    pub fn exhaustion(&self, k: u64) -> u64 {
        (self.exhaustion)(k)
    }

    pub fn name(&self) -> &'static str {
        self.name
    }
}

/// Turn the double series into a simple series along a pairing. The
/// joint bound transports through the pairing's exhaustion function.
pub fn linearize(d: &DoubleArray, p: &Pairing) -> TermStream {
    let entry = d.entry.clone();
    let to_pair = p.to_pair.clone();
    let s = TermStream::from_fn(move |k| {
        let (i, j) = to_pair(k);
        entry(i, j)
    });
    match d.joint_bound.clone() {
        Some(jb) => {
            let g = p.exhaustion.clone();
            s.with_bound(move |k| jb(g(k)))
        }
        None => s,
    }
}

/// Verdict for a single row, `j -> entry(i, j)`.
pub fn row_sum(d: &DoubleArray, i: u64, precision: i64, cfg: &SampleConfig) -> ConvergenceVerdict {
    sum_with(&d.row_stream(i), precision, cfg)
}

/// Verdict for a single column, `i -> entry(i, j)`.
pub fn column_sum(
    d: &DoubleArray,
    j: u64,
    precision: i64,
    cfg: &SampleConfig,
) -> ConvergenceVerdict {
    sum_with(&d.column_stream(j), precision, cfg)
}

fn scan_joint(
    jb: &BoundFn,
    precision: i64,
    cfg: &SampleConfig,
    context: &str,
) -> Result<u64, DoubleSeriesError> {
    for n in 0..=cfg.certificate_scan {
        if jb(n).at_least(precision) {
            return Ok(n);
        }
    }
    Err(DoubleSeriesError::ScanExhausted {
        context: context.to_string(),
    })
}

/// Iterated sum by rows: `sum_i (sum_j entry(i, j))`, certified through
/// the joint bound.
pub fn iterated_row_sum(
    d: &DoubleArray,
    precision: i64,
    cfg: &SampleConfig,
) -> Result<ApproxElement, DoubleSeriesError> {
    iterated_line_sum(d, precision, cfg, true)
}

/// Iterated sum by columns: `sum_j (sum_i entry(i, j))`.
pub fn iterated_column_sum(
    d: &DoubleArray,
    precision: i64,
    cfg: &SampleConfig,
) -> Result<ApproxElement, DoubleSeriesError> {
    iterated_line_sum(d, precision, cfg, false)
}

fn iterated_line_sum(
    d: &DoubleArray,
    precision: i64,
    cfg: &SampleConfig,
    by_rows: bool,
) -> Result<ApproxElement, DoubleSeriesError> {
    let jb = d
        .joint_bound
        .clone()
        .ok_or(DoubleSeriesError::MissingCertificate)?;
    // True line sums have valuation >= joint(line index): every entry of
    // line i sits on a diagonal >= i.
    let n0 = scan_joint(&jb, precision, cfg, "iterated line sum outer bound")?;
    let mut head = FieldElement::zero();
    let mut tail = jb(n0);
    for line in 0..n0 {
        let verdict = if by_rows {
            row_sum(d, line, precision, cfg)
        } else {
            column_sum(d, line, precision, cfg)
        };
        match verdict {
            ConvergenceVerdict::Converges(a) => {
                head = head + a.head;
                tail = tail.min(a.tail_valuation);
            }
            v => {
                return Err(DoubleSeriesError::NotCertified {
                    context: format!(
                        "{} {} of iterated sum",
                        if by_rows { "row" } else { "column" },
                        line
                    ),
                    verdict: v,
                })
            }
        }
    }
    Ok(ApproxElement::new(head, tail))
}

/// The three sums of the Fubini-type theorem: linearized, by rows, and by
/// columns. All three are certified and agree modulo `e^precision`.
#[derive(Clone, Debug)]
pub struct FubiniTriple {
    pub linearized: ApproxElement,
    pub by_rows: ApproxElement,
    pub by_columns: ApproxElement,
}

pub fn fubini_sum(
    d: &DoubleArray,
    precision: i64,
    cfg: &SampleConfig,
) -> Result<FubiniTriple, DoubleSeriesError> {
    if d.joint_bound.is_none() {
        return Err(DoubleSeriesError::MissingCertificate);
    }
    let lin = match sum_with(&linearize(d, &Pairing::cantor()), precision, cfg) {
        ConvergenceVerdict::Converges(a) => a,
        v => {
            return Err(DoubleSeriesError::NotCertified {
                context: "linearized sum".to_string(),
                verdict: v,
            })
        }
    };
    let by_rows = iterated_row_sum(d, precision, cfg)?;
    let by_columns = iterated_column_sum(d, precision, cfg)?;
    debug_assert!(lin.agrees_with(&by_rows, precision));
    debug_assert!(lin.agrees_with(&by_columns, precision));
    Ok(FubiniTriple {
        linearized: lin,
        by_rows,
        by_columns,
    })
}

/// The converse criterion: check that every sampled row converges and
/// that the iterated series of row absolute sums converges; on success
/// the double series converges and the certified iterated sum is
/// returned. On failure, report which hypothesis broke.
pub fn converse_criterion(
    d: &DoubleArray,
    precision: i64,
    cfg: &SampleConfig,
) -> Result<ApproxElement, ConverseFailure> {
    let rows_to_check = cfg.window.min(24);
    let abs = d.abs();
    for i in 0..rows_to_check {
        match row_sum(d, i, precision, cfg) {
            ConvergenceVerdict::Converges(_) => {}
            v => {
                return Err(ConverseFailure::Row {
                    index: i,
                    verdict: v,
                })
            }
        }
    }
    // Iterated series of row absolute sums. Heads computed at the working
    // precision stand in for the true row sums: the valuation of a head
    // is the true valuation whenever it is below the certified tail.
    let abs_for_stream = abs.clone();
    let outer_precision = precision;
    let inner_cfg = cfg.clone();
    // The zero fallback cannot corrupt a certified outcome: with a joint
    // bound every row certifies, and without one the outer stream has no
    // bound, so the sum below can only be Diverges or Unknown.
    let outer = TermStream::from_fn(move |i| {
        match row_sum(&abs_for_stream, i, outer_precision, &inner_cfg) {
            ConvergenceVerdict::Converges(a) => a.head,
            _ => FieldElement::zero(),
        }
    });
    let outer = match d.joint_bound.clone() {
        // True abs-row sums of row i have valuation >= joint(i); the
        // stream carries heads known modulo e^precision, so the bound is
        // capped there.
        Some(jb) => outer.with_bound(move |n| jb(n).min(Valuation::Finite(outer_precision))),
        None => outer,
    };
    match sum_with(&outer, precision, cfg) {
        ConvergenceVerdict::Converges(_) => {}
        v => return Err(ConverseFailure::IteratedAbs { verdict: v }),
    }
    iterated_row_sum(d, precision, cfg).map_err(ConverseFailure::Internal)
}

/// An increasing exhaustion of the grid by finite subsets.
#[derive(Clone)]
pub struct GoursatChain {
    subset: Arc<dyn Fn(u64) -> Vec<(u64, u64)> + Send + Sync>,
    name: &'static str,
}

impl GoursatChain {
    pub fn new<F>(subset: F, name: &'static str) -> Self
    where
        F: Fn(u64) -> Vec<(u64, u64)> + Send + Sync + 'static,
    {
        GoursatChain {
            subset: Arc::new(subset),
            name,
        }
    }

    /// Squares [0, n] x [0, n].
    pub fn squares() -> Self {
        GoursatChain::new(
            |n| {
                let mut v = Vec::new();
                for i in 0..=n {
                    for j in 0..=n {
                        v.push((i, j));
                    }
                }
                v
            },
            "squares",
        )
    }

    /// Triangles { i + j <= n }.
    pub fn triangles() -> Self {
        GoursatChain::new(
            |n| {
                let mut v = Vec::new();
                for d in 0..=n {
                    for i in 0..=d {
                        v.push((i, d - i));
                    }
                }
                v
            },
            "triangles",
        )
    }

    /// Singleton growth replaying a pairing: subset(n) is the first n+1
    /// indices of the enumeration, so the Goursat sums coincide with the
    /// partial sums of the linearization.
    pub fn from_pairing(p: &Pairing) -> Self {
        let p = p.clone();
        GoursatChain::new(
            move |n| (0..=n).map(|k| p.to_pair(k)).collect(),
            "pairing-singletons",
        )
    }

    pub fn subset(&self, n: u64) -> Vec<(u64, u64)> {
        (self.subset)(n)
    }

    pub fn name(&self) -> &'static str {
        self.name
    }
}

/// Limit of the exhaustion sums `S_k`, certified through the joint bound
/// by tracking how many full diagonals `subset(k)` already contains.
pub fn goursat_sum(
    d: &DoubleArray,
    chain: &GoursatChain,
    precision: i64,
    cfg: &SampleConfig,
) -> Result<ApproxElement, DoubleSeriesError> {
    let jb = d
        .joint_bound
        .clone()
        .ok_or(DoubleSeriesError::MissingCertificate)?;
    // Validate nesting on a sampled prefix.
    let validate_to = 8u64;
    let mut prev: HashSet<(u64, u64)> = HashSet::new();
    for n in 0..validate_to {
        let cur: HashSet<(u64, u64)> = chain.subset(n).into_iter().collect();
        if !prev.is_subset(&cur) {
            return Err(DoubleSeriesError::ChainInvalid {
                reason: format!("subset({}) does not contain subset({})", n, n - 1),
            });
        }
        prev = cur;
    }
    let scan_limit = cfg.certificate_scan.min(4096);
    for k in 0..scan_limit {
        let set: HashSet<(u64, u64)> = chain.subset(k).into_iter().collect();
        // Largest n such that every pair with i + j < n is present.
        let mut full_diagonals = 0u64;
        'diag: loop {
            for i in 0..=full_diagonals {
                if !set.contains(&(i, full_diagonals - i)) {
                    break 'diag;
                }
            }
            full_diagonals += 1;
        }
        let bound = jb(full_diagonals);
        if bound.at_least(precision) {
            let mut head = FieldElement::zero();
            for (i, j) in &set {
                head = head + d.entry(*i, *j);
            }
            return Ok(ApproxElement::new(head, bound));
        }
    }
    Err(DoubleSeriesError::ScanExhausted {
        context: format!(
            "goursat chain `{}` never exhausts enough diagonals",
            chain.name
        ),
    })
}

/// A partition of the grid given by the index of the part containing each
/// position. Parts are enumerated in the Cantor order of their members,
/// which keeps every certificate transportable.
#[derive(Clone)]
pub struct PartitionOfGrid {
    part_of: Arc<dyn Fn(u64, u64) -> u64 + Send + Sync>,
    /// Number of parts for finite partitions; countably many when None.
    part_count: Option<u64>,
    /// For countable partitions: a certified non-decreasing lower bound
    /// on the diagonal `i + j` of every member of part r.
    min_diagonal: Option<Arc<dyn Fn(u64) -> u64 + Send + Sync>>,
    name: String,
}

impl PartitionOfGrid {
    pub fn new<F>(part_of: F, part_count: Option<u64>, name: &str) -> Self
    where
        F: Fn(u64, u64) -> u64 + Send + Sync + 'static,
    {
        PartitionOfGrid {
            part_of: Arc::new(part_of),
            part_count,
            min_diagonal: None,
            name: name.to_string(),
        }
    }

    pub fn with_min_diagonal<G>(mut self, g: G) -> Self
    where
        G: Fn(u64) -> u64 + Send + Sync + 'static,
    {
        self.min_diagonal = Some(Arc::new(g));
        self
    }

    pub fn by_rows() -> Self {
        PartitionOfGrid::new(|i, _| i, None, "rows").with_min_diagonal(|r| r)
    }

    pub fn by_columns() -> Self {
        PartitionOfGrid::new(|_, j| j, None, "columns").with_min_diagonal(|r| r)
    }

    pub fn by_antidiagonals() -> Self {
        PartitionOfGrid::new(|i, j| i + j, None, "antidiagonals").with_min_diagonal(|r| r)
    }

    /// Two parts: even and odd values of i + j.
    pub fn by_diagonal_parity() -> Self {
        PartitionOfGrid::new(|i, j| (i + j) % 2, Some(2), "diagonal-parity")
    }

    pub fn part_of(&self, i: u64, j: u64) -> u64 {
        (self.part_of)(i, j)
    }

    pub fn part_count(&self) -> Option<u64> {
        self.part_count
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The idx-th member of part r in Cantor order, scanning at most
    /// `scan_limit` grid positions.
    pub fn enumerate_part(&self, r: u64, idx: u64, scan_limit: u64) -> Option<(u64, u64)> {
        let cantor = Pairing::cantor();
        let mut seen = 0u64;
        for k in 0..scan_limit {
            let (i, j) = cantor.to_pair(k);
            if self.part_of(i, j) == r {
                if seen == idx {
                    return Some((i, j));
                }
                seen += 1;
            }
        }
        None
    }
}

/// Restricted sum over one part, computed by a single Cantor scan that
/// stops once the joint bound certifies the requested precision.
fn part_sum(
    d: &DoubleArray,
    parts: &PartitionOfGrid,
    r: u64,
    precision: i64,
    cfg: &SampleConfig,
) -> Result<ApproxElement, DoubleSeriesError> {
    let jb = d
        .joint_bound
        .clone()
        .ok_or(DoubleSeriesError::MissingCertificate)?;
    let n0 = scan_joint(&jb, precision, cfg, "part sum bound")?;
    let cantor = Pairing::cantor();
    let k_limit = triangle(n0);
    let mut head = FieldElement::zero();
    for k in 0..k_limit {
        let (i, j) = cantor.to_pair(k);
        if parts.part_of(i, j) == r {
            if let Some(g) = &parts.min_diagonal {
                if i + j < g(r) {
                    return Err(DoubleSeriesError::PartitionInvalid {
                        reason: format!(
                            "member ({}, {}) of part {} lies below the declared diagonal bound",
                            i, j, r
                        ),
                    });
                }
            }
            head = head + d.entry(i, j);
        }
    }
    Ok(ApproxElement::new(head, jb(n0)))
}

/// Sum over a partition of the grid: the outer series over parts of the
/// restricted part sums, equal to the linearized sum at the requested
/// precision.
pub fn partition_sum(
    d: &DoubleArray,
    parts: &PartitionOfGrid,
    precision: i64,
    cfg: &SampleConfig,
) -> Result<ApproxElement, DoubleSeriesError> {
    let jb = d
        .joint_bound
        .clone()
        .ok_or(DoubleSeriesError::MissingCertificate)?;
    match parts.part_count {
        Some(m) => {
            let mut head = FieldElement::zero();
            let mut tail = Valuation::Infinite;
            for r in 0..m {
                let s = part_sum(d, parts, r, precision, cfg)?;
                head = head + s.head;
                tail = tail.min(s.tail_valuation);
            }
            Ok(ApproxElement::new(head, tail))
        }
        None => {
            let g =
                parts
                    .min_diagonal
                    .clone()
                    .ok_or_else(|| DoubleSeriesError::PartitionInvalid {
                        reason: format!(
                            "countable partition `{}` carries no diagonal bound for its parts",
                            parts.name
                        ),
                    })?;
            // True part sums have valuation >= joint(min diagonal of the
            // part), which gives the outer certificate.
            let mut r0 = None;
            for r in 0..=cfg.certificate_scan {
                if jb(g(r)).at_least(precision) {
                    r0 = Some(r);
                    break;
                }
            }
            let r0 = r0.ok_or(DoubleSeriesError::ScanExhausted {
                context: "partition outer bound".to_string(),
            })?;
            let mut head = FieldElement::zero();
            let mut tail = jb(g(r0));
            for r in 0..r0 {
                let s = part_sum(d, parts, r, precision, cfg)?;
                head = head + s.head;
                tail = tail.min(s.tail_valuation);
            }
            Ok(ApproxElement::new(head, tail))
        }
    }
}

/// Sum of the array masked to a membership predicate; convergence is
/// inherited because masking cannot lower valuations.
pub fn restricted_sum<P>(
    d: &DoubleArray,
    pred: P,
    precision: i64,
    cfg: &SampleConfig,
) -> Result<ApproxElement, DoubleSeriesError>
where
    P: Fn(u64, u64) -> bool + Send + Sync + 'static,
{
    let masked = d.restrict(pred);
    match sum_with(&linearize(&masked, &Pairing::cantor()), precision, cfg) {
        ConvergenceVerdict::Converges(a) => Ok(a),
        v => Err(DoubleSeriesError::NotCertified {
            context: "restricted sum".to_string(),
            verdict: v,
        }),
    }
}

/// Product of two certified series as a double series: the array
/// `entry(i, j) = b_i * c_j` converges to the product of the sums.
pub fn product_series(
    b: &TermStream,
    c: &TermStream,
    precision: i64,
    cfg: &SampleConfig,
) -> Result<ApproxElement, DoubleSeriesError> {
    let bb = b
        .tail_bound()
        .cloned()
        .ok_or(DoubleSeriesError::MissingCertificate)?;
    let cb = c
        .tail_bound()
        .cloned()
        .ok_or(DoubleSeriesError::MissingCertificate)?;
    let bt = b.clone();
    let ct = c.clone();
    let array =
        DoubleArray::from_fn(move |i, j| bt.term(i) * ct.term(j)).with_joint_bound(move |n| {
            // Minimum of B(i) + C(j) over the diagonal i + j = n; the
            // diagonal minima are non-decreasing because B and C are.
            let mut best = Valuation::Infinite;
            for i in 0..=n {
                best = best.min(bb(i).add(cb(n - i)));
            }
            best
        });
    match sum_with(&linearize(&array, &Pairing::cantor()), precision, cfg) {
        ConvergenceVerdict::Converges(a) => Ok(a),
        v => Err(DoubleSeriesError::NotCertified {
            context: "product series".to_string(),
            verdict: v,
        }),
    }
}

/// The counterexample array for the converse criterion, instantiated with
/// k_0 = (1-2e)/(1-e) and k_i = e^i: the k-series sums to 1 with positive
/// terms, every row sums to zero, yet column 0 diverges and the iterated
/// series of row absolute sums (constant 2(1-k_0)) diverges.
pub struct Counterexample {
    pub array: DoubleArray,
    pub k_terms: TermStream,
    pub k0: FieldElement,
}

pub fn build_counterexample() -> Counterexample {
    let one = FieldElement::one();
    let e = FieldElement::epsilon();
    let k0 = (&one - FieldElement::from_int(2) * &e) / (&one - &e);
    let a_col0 = &one - &k0; // = e/(1-e)
    let e2 = e.clone();
    let array = DoubleArray::from_fn(move |_i, j| {
        if j == 0 {
            a_col0.clone()
        } else {
            -e2.pow(j as i64)
        }
    })
    .with_joint_bound(|_| Valuation::Finite(1))
    .with_row_bound(|_, n| Valuation::Finite((n as i64).max(1)));
    let e3 = e.clone();
    let k0_for_stream = k0.clone();
    let k_terms = TermStream::from_fn(move |i| {
        if i == 0 {
            k0_for_stream.clone()
        } else {
            e3.pow(i as i64)
        }
    })
    .with_bound(|n| Valuation::Finite(n as i64));
    Counterexample { array, k_terms, k0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{partial_sum, sum};

    fn eps() -> FieldElement {
        FieldElement::epsilon()
    }

    fn geometric_array() -> DoubleArray {
        DoubleArray::from_fn(|i, j| eps().pow((i + j) as i64)).with_affine_joint_bound(1, 0)
    }

    fn inv_one_minus_e_sq() -> FieldElement {
        (FieldElement::one() - eps()).pow(-2)
    }

    #[test]
    fn pairings_are_bijective_on_a_window() {
        for p in [Pairing::cantor(), Pairing::boustrophedon()] {
            let mut seen = HashSet::new();
            for k in 0..300u64 {
                let (i, j) = p.to_pair(k);
                assert_eq!(p.from_pair(i, j), k, "{} pairing", p.name());
                assert!(seen.insert((i, j)));
            }
            // exhaustion: all pairs with i + j < g(k) occur among the first k.
            for k in [0u64, 1, 5, 20, 100] {
                let g = p.exhaustion(k);
                let prefix: HashSet<(u64, u64)> = (0..k).map(|t| p.to_pair(t)).collect();
                for d in 0..g {
                    for i in 0..=d {
                        assert!(prefix.contains(&(i, d - i)));
                    }
                }
            }
        }
    }

    #[test]
    fn linearized_geometric_array() {
        let d = geometric_array();
        let s = linearize(&d, &Pairing::cantor());
        let v = sum(&s, 8).converged().cloned().expect("certified");
        assert!(v.agrees_with_element(&inv_one_minus_e_sq(), 8));
        // A different pairing gives the same sum.
        let s2 = linearize(&d, &Pairing::boustrophedon());
        let v2 = sum(&s2, 8).converged().cloned().expect("certified");
        assert!(v.agrees_with(&v2, 8));
    }

    #[test]
    fn zero_array_linearizes_to_zero() {
        let d = DoubleArray::from_fn(|_, _| FieldElement::zero())
            .with_joint_bound(|_| Valuation::Infinite);
        let v = sum(&linearize(&d, &Pairing::cantor()), 16)
            .converged()
            .cloned()
            .unwrap();
        assert!(v.head.is_zero());
    }

    #[test]
    fn geometric_rows_and_columns() {
        let d = geometric_array();
        let cfg = SampleConfig::default();
        let row2 = row_sum(&d, 2, 10, &cfg).converged().cloned().unwrap();
        let expected = eps().pow(2) / (FieldElement::one() - eps());
        assert!(row2.agrees_with_element(&expected, 10));
        let col2 = column_sum(&d, 2, 10, &cfg).converged().cloned().unwrap();
        assert!(col2.agrees_with_element(&expected, 10));
    }

    #[test]
    fn fubini_triple_on_closed_forms() {
        let cfg = SampleConfig::default();
        let d = geometric_array();
        let t = fubini_sum(&d, 8, &cfg).unwrap();
        for part in [&t.linearized, &t.by_rows, &t.by_columns] {
            assert!(part.agrees_with_element(&inv_one_minus_e_sq(), 8));
        }

        // Alternating signs: sum is 1/(1+e)^2.
        let alt = DoubleArray::from_fn(|i, j| {
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            FieldElement::from_int(sign) * eps().pow((i + j) as i64)
        })
        .with_affine_joint_bound(1, 0);
        let expected = (FieldElement::one() + eps()).pow(-2);
        let t = fubini_sum(&alt, 8, &cfg).unwrap();
        for part in [&t.linearized, &t.by_rows, &t.by_columns] {
            assert!(part.agrees_with_element(&expected, 8));
        }

        // Finitely supported array sums exactly.
        let fin = DoubleArray::from_finite(vec![(0, 0, FieldElement::one()), (1, 1, eps())]);
        let t = fubini_sum(&fin, 8, &cfg).unwrap();
        let expected = FieldElement::one() + eps();
        assert_eq!(t.linearized.head, expected);
        assert_eq!(t.by_rows.head, expected);
        assert_eq!(t.by_columns.head, expected);
    }

    #[test]
    fn goursat_chains_agree() {
        let cfg = SampleConfig::default();
        let d = geometric_array();
        let expected = inv_one_minus_e_sq();
        let squares = goursat_sum(&d, &GoursatChain::squares(), 8, &cfg).unwrap();
        let triangles = goursat_sum(&d, &GoursatChain::triangles(), 8, &cfg).unwrap();
        assert!(squares.agrees_with_element(&expected, 8));
        assert!(triangles.agrees_with_element(&expected, 8));
        assert!(squares.agrees_with(&triangles, 8));
    }

    #[test]
    fn goursat_singleton_chain_replays_partial_sums() {
        let d = geometric_array();
        let p = Pairing::cantor();
        let chain = GoursatChain::from_pairing(&p);
        let s = linearize(&d, &p);
        for n in [0u64, 3, 7, 12] {
            let direct: FieldElement = chain
                .subset(n)
                .into_iter()
                .fold(FieldElement::zero(), |acc, (i, j)| acc + d.entry(i, j));
            assert_eq!(direct, partial_sum(&s, n as i64));
        }
    }

    #[test]
    fn partition_sums_match_linearization() {
        let cfg = SampleConfig::default();
        let d = geometric_array();
        let expected = inv_one_minus_e_sq();
        for parts in [
            PartitionOfGrid::by_rows(),
            PartitionOfGrid::by_columns(),
            PartitionOfGrid::by_antidiagonals(),
            PartitionOfGrid::by_diagonal_parity(),
        ] {
            let v = partition_sum(&d, &parts, 8, &cfg).unwrap();
            assert!(
                v.agrees_with_element(&expected, 8),
                "partition `{}` disagrees",
                parts.name()
            );
        }
    }

    #[test]
    fn antidiagonal_parts_count_terms() {
        // Against the closed form sum_r (r+1) e^r.
        let cfg = SampleConfig::default();
        let d = geometric_array();
        let mut expected = FieldElement::zero();
        for r in 0..8i64 {
            expected = expected + FieldElement::from_int(r + 1) * eps().pow(r);
        }
        let v = partition_sum(&d, &PartitionOfGrid::by_antidiagonals(), 8, &cfg).unwrap();
        assert!(v.agrees_with_element(&expected, 8));
    }

    #[test]
    fn restricted_sums() {
        let cfg = SampleConfig::default();
        let d = geometric_array();
        let full = restricted_sum(&d, |_, _| true, 8, &cfg).unwrap();
        assert!(full.agrees_with_element(&inv_one_minus_e_sq(), 8));
        let empty = restricted_sum(&d, |_, _| false, 8, &cfg).unwrap();
        assert!(empty.head.is_zero());
        let first_row = restricted_sum(&d, |i, _| i == 0, 8, &cfg).unwrap();
        let expected = FieldElement::one() / (FieldElement::one() - eps());
        assert!(first_row.agrees_with_element(&expected, 8));
    }

    #[test]
    fn product_of_geometric_streams() {
        let cfg = SampleConfig::default();
        let g = TermStream::geometric(eps());
        let v = product_series(&g, &g, 8, &cfg).unwrap();
        assert!(v.agrees_with_element(&inv_one_minus_e_sq(), 8));

        // One factor a single term {1}.
        let unit = TermStream::from_terms(vec![FieldElement::one()]);
        let v = product_series(&g, &unit, 8, &cfg).unwrap();
        let expected = FieldElement::one() / (FieldElement::one() - eps());
        assert!(v.agrees_with_element(&expected, 8));

        // Alternating times geometric: 1/(1-e^2).
        let alt = TermStream::from_fn(|n| {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            FieldElement::from_int(sign) * eps().pow(n as i64)
        })
        .with_affine_bound(1, 0);
        let v = product_series(&alt, &g, 8, &cfg).unwrap();
        let expected = (FieldElement::one() - eps().pow(2)).pow(-1);
        assert!(v.agrees_with_element(&expected, 8));
    }

    #[test]
    fn counterexample_k_series_sums_to_one() {
        let cfg = SampleConfig::default();
        let ce = build_counterexample();
        let v = sum_with(&ce.k_terms, 32, &cfg)
            .converged()
            .cloned()
            .unwrap();
        assert!(v.agrees_with_element(&FieldElement::one(), 32));
        // k_0 + e/(1-e) = 1 exactly.
        let tail = FieldElement::epsilon() / (FieldElement::one() - FieldElement::epsilon());
        assert_eq!(ce.k0.clone() + tail, FieldElement::one());
        // all terms positive
        for n in 0..10 {
            assert!(ce.k_terms.term(n).is_positive());
        }
    }

    #[test]
    fn counterexample_rows_vanish_column_diverges() {
        let cfg = SampleConfig::default();
        let ce = build_counterexample();
        for i in [0u64, 1, 7, 40] {
            let v = row_sum(&ce.array, i, 32, &cfg)
                .converged()
                .cloned()
                .unwrap();
            assert!(v.agrees_with_element(&FieldElement::zero(), 32));
        }
        match column_sum(&ce.array, 0, 32, &cfg) {
            ConvergenceVerdict::Diverges(w) => assert_eq!(w.floor, 1),
            v => panic!("expected divergence, got {}", v.describe()),
        }
    }

    #[test]
    fn counterexample_fails_iterated_abs_hypothesis() {
        let cfg = SampleConfig::default();
        let ce = build_counterexample();
        match converse_criterion(&ce.array, 16, &cfg) {
            Err(ConverseFailure::IteratedAbs { verdict }) => {
                // Row absolute sums are all 2(1-k_0) = 2e/(1-e), valuation 1.
                assert!(verdict.is_diverges());
                assert_eq!(verdict.divergence_witness().unwrap().floor, 1);
            }
            other => panic!(
                "expected iterated-abs failure, got {:?}",
                other.map(|a| a.head)
            ),
        }
    }

    #[test]
    fn converse_criterion_succeeds_on_certified_arrays() {
        let cfg = SampleConfig::default();
        let d = geometric_array();
        let v = converse_criterion(&d, 8, &cfg).unwrap();
        assert!(v.agrees_with_element(&inv_one_minus_e_sq(), 8));
        let zero = DoubleArray::from_fn(|_, _| FieldElement::zero())
            .with_joint_bound(|_| Valuation::Infinite);
        let v = converse_criterion(&zero, 16, &cfg).unwrap();
        assert!(v.head.is_zero());
    }
}
