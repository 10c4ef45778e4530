//! Set partitions and the Faa di Bruno formula for derivatives of a
//! composite function, including the example where the derivatives of a
//! composition blow up like powers of `w = e^-1` even though the
//! composite function itself is defined.

use std::fmt;

use crate::field::{FieldElement, Rat};
use crate::series::ApproxElement;
use crate::valuation::Valuation;

/// Largest partition size accepted; Bell numbers grow too fast beyond.
pub const MAX_PARTITION_SIZE: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaaDiBrunoError {
    SizeOutOfRange { n: usize, max: usize },
    InsufficientDerivatives { needed: usize, got: usize },
}

impl fmt::Display for FaaDiBrunoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaaDiBrunoError::SizeOutOfRange { n, max } => {
                write!(f, "partition size {} outside 1..={}", n, max)
            }
            FaaDiBrunoError::InsufficientDerivatives { needed, got } => {
                write!(f, "need derivatives up to order {}, got {}", needed, got)
            }
        }
    }
}

impl std::error::Error for FaaDiBrunoError {}

/// A partition of the set {1, ..., n} into disjoint non-empty blocks.
/// Blocks are ordered by their smallest element and each block is sorted,
/// which is the canonical duplicate-free form produced by
/// restricted-growth strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn ground_size(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    pub fn is_all_singletons(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    fn from_rgs(rgs: &[usize]) -> SetPartition {
        let block_count = rgs.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); block_count];
        for (pos, &b) in rgs.iter().enumerate() {
            blocks[b].push(pos + 1);
        }
        SetPartition { blocks }
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, block) in self.blocks.iter().enumerate() {
            if idx > 0 {
                write!(f, "|")?;
            }
            for (t, el) in block.iter().enumerate() {
                if t > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", el)?;
            }
        }
        Ok(())
    }
}

/// All partitions of {1, ..., n}, enumerated through restricted-growth
/// strings: `a_1 = 0` and `a_{k+1} <= max(a_1..a_k) + 1`.
pub fn set_partitions(n: usize) -> Result<Vec<SetPartition>, FaaDiBrunoError> {
    if !(1..=MAX_PARTITION_SIZE).contains(&n) {
        return Err(FaaDiBrunoError::SizeOutOfRange {
            n,
            max: MAX_PARTITION_SIZE,
        });
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn extend(rgs: &mut Vec<usize>, pos: usize, max_used: usize, out: &mut Vec<SetPartition>) {
        if pos == rgs.len() {
            out.push(SetPartition::from_rgs(rgs));
            return;
        }
        for b in 0..=max_used + 1 {
            rgs[pos] = b;
            extend(rgs, pos + 1, max_used.max(b), out);
        }
    }
    rgs[0] = 0;
    extend(&mut rgs, 1, 0, &mut out);
    Ok(out)
}

/// The n-th derivative of a composite `f o g` at a point, from the
/// derivatives of the factors:
/// `sum over partitions of f^(|blocks|)(g(x)) * prod g^(|block|)(x)`.
///
/// `f_derivs[m]` must hold the m-th derivative of f at g(x) and
/// `g_derivs[h]` the h-th derivative of g at x, both up to order n.
pub fn faa_di_bruno(
    f_derivs: &[FieldElement],
    g_derivs: &[FieldElement],
    n: usize,
) -> Result<FieldElement, FaaDiBrunoError> {
    if f_derivs.len() <= n || g_derivs.len() <= n {
        return Err(FaaDiBrunoError::InsufficientDerivatives {
            needed: n,
            got: f_derivs.len().min(g_derivs.len()).saturating_sub(1),
        });
    }
    if n == 0 {
        return Ok(f_derivs[0].clone());
    }
    let mut total = FieldElement::zero();
    for partition in set_partitions(n)? {
        total = total + partition_term(&partition, f_derivs, g_derivs);
    }
    Ok(total)
}

fn partition_term(
    partition: &SetPartition,
    f_derivs: &[FieldElement],
    g_derivs: &[FieldElement],
) -> FieldElement {
    // Accumulate the inner-derivative product first; it is typically much
    // smaller than the outer-derivative factor.
    let mut product = FieldElement::one();
    for block in &partition.blocks {
        product = product * &g_derivs[block.len()];
    }
    product * &f_derivs[partition.block_count()]
}

/// One Faa di Bruno term of the blow-up example.
#[derive(Clone, Debug)]
pub struct BlowupTerm {
    pub partition: SetPartition,
    pub value: FieldElement,
}

/// The n-th derivative of the blow-up composition, with its per-partition
/// terms for inspection.
#[derive(Clone, Debug)]
pub struct BlowupRecord {
    pub n: usize,
    /// D^n(T o S)(0), exact head plus certified tail.
    pub derivative: ApproxElement,
    /// Valuation of the derivative (expected: -n).
    pub valuation: Valuation,
    pub terms: Vec<BlowupTerm>,
}

/// The derivative blow-up example: with
/// `S(X) = e - wX + w^2 X^2 + sum_{n>=3} e^n X^n` and `T(X) = sum X^n`,
/// the composite `T o S` is defined near 0, yet the derivatives
/// `D^n(T o S)(0)` have valuation -n, so the expected coefficients
/// `d_n = D^n/n!` cannot tend to zero at argument 1.
///
/// T's derivatives at `S(0) = e` are genuinely infinite series; they are
/// computed as certified partial sums at `working_precision`, which keeps
/// every reported valuation exact as long as it stays well below the
/// certified tail (the guard below enforces that margin).
pub fn blowup_example(
    nmax: usize,
    working_precision: i64,
) -> Result<Vec<BlowupRecord>, FaaDiBrunoError> {
    if !(1..=8).contains(&nmax) {
        return Err(FaaDiBrunoError::SizeOutOfRange { n: nmax, max: 8 });
    }
    let e = FieldElement::epsilon();
    let w = FieldElement::omega();
    let precision = working_precision.max(2 * nmax as i64 + 4);

    // S^(h)(0): S(0) = e, S'(0) = -w, S''(0) = 2 w^2, S^(h)(0) = h! e^h.
    let mut g_derivs = vec![e.clone(), -w.clone(), FieldElement::from_int(2) * w.pow(2)];
    let mut h_factorial = Rat::from_integer(2.into());
    for h in 3..=nmax {
        h_factorial *= Rat::from_integer((h as i64).into());
        g_derivs.push(FieldElement::from_rational(h_factorial.clone()) * e.pow(h as i64));
    }

    // T^(m)(e) = sum_{k>=0} (k+m)!/k! e^k, summed to the working precision.
    let f_derivs: Vec<FieldElement> = (0..=nmax)
        .map(|m| t_derivative_head(m, precision))
        .collect();

    let mut records = Vec::with_capacity(nmax);
    for n in 1..=nmax {
        let mut terms = Vec::new();
        let mut total = FieldElement::zero();
        for partition in set_partitions(n)? {
            let value = partition_term(&partition, &f_derivs, &g_derivs);
            total = total + &value;
            terms.push(BlowupTerm { partition, value });
        }
        // Each term multiplies one truncated T-derivative (error beyond
        // e^precision) by derivatives of S no smaller than w^n.
        let tail = Valuation::Finite(precision - n as i64);
        let valuation = total.valuation();
        debug_assert!(
            valuation < tail,
            "working precision too small for n = {}",
            n
        );
        records.push(BlowupRecord {
            n,
            derivative: ApproxElement::new(total, tail),
            valuation,
            terms,
        });
    }
    Ok(records)
}

/// Exact partial sum of `T^(m)(e) = sum_k (k+m)!/k! e^k` below the given
/// precision; the omitted tail has valuation >= precision.
fn t_derivative_head(m: usize, precision: i64) -> FieldElement {
    let e = FieldElement::epsilon();
    let mut head = FieldElement::zero();
    for k in 0..precision.max(0) {
        let mut factor = Rat::from_integer(1.into());
        for t in 1..=m as i64 {
            factor *= Rat::from_integer((k + t).into());
        }
        head = head + FieldElement::from_rational(factor) * e.pow(k);
    }
    head
}
