//! The correlation measure of order `k`,
//!
//! ```text
//! C_k(R, q) = max_{1 ≤ M ≤ q, 0 ≤ d_1 < … < d_k ≤ q−1} | Σ_{n<M} f_R(n+d_1)···f_R(n+d_k) |
//! ```
//!
//! with `n + d_i` reduced mod `q`.
//!
//! For a fixed lag tuple the maximum over `M` is the largest absolute prefix
//! sum, so each tuple costs one `O(k·q)` pass. All arithmetic is on the
//! integers `q·f_R(n) ∈ {q − T, −T}`; the common denominator `q^k` is divided
//! out once at the end. Tuples are enumerated in colexicographic order and
//! split across rayon workers by their largest lag; merging keeps the first
//! maximizer in enumeration order, so results do not depend on the number of
//! workers.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{PrimInt, Signed};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::subsets::{BalancedIndicator, ResidueSet};

/// Default cap on `C(q, k)·q` elementary products.
pub const DEFAULT_WORK_BUDGET: u128 = 1_000_000_000;

const ORACLE_MAX_Q: u64 = 64;
const ORACLE_MAX_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrelationOptions {
    pub budget: u128,
    pub parallel: bool,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        CorrelationOptions {
            budget: DEFAULT_WORK_BUDGET,
            parallel: true,
        }
    }
}

/// Strictly increasing lags `0 ≤ d_1 < … < d_k ≤ q − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LagTuple(Vec<u64>);

impl LagTuple {
    pub fn new(lags: Vec<u64>, q: u64) -> Result<Self> {
        if lags.is_empty() || lags.len() as u64 > q {
            return Err(Error::OrderTooLarge { k: lags.len(), q });
        }
        if lags.windows(2).any(|w| w[0] >= w[1]) || lags.iter().any(|&d| d >= q) {
            return Err(Error::Config {
                path: "lags".into(),
                message: format!("lags must be strictly increasing in 0..{q}"),
            });
        }
        Ok(LagTuple(lags))
    }

    pub fn lags(&self) -> &[u64] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMode {
    Exact,
    /// Maximum over a subset of lag tuples: a lower bound on `C_k`.
    Sampled,
}

/// A correlation value together with a maximizing window and lag tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub k: usize,
    pub value: Fraction,
    pub window: u64,
    pub lags: LagTuple,
    pub mode: CorrelationMode,
    pub tuples: u128,
}

impl CorrelationResult {
    pub fn ratio(&self) -> Ratio<i128> {
        Ratio::new(self.value.num, self.value.den)
    }
}

/// `C(q, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        let num = (n - i) as u128;
        let den = (i + 1) as u128;
        // acc * num / den is exact at every step; divide by the gcd first
        let g = acc.gcd(&den);
        let (a, d) = (acc / g, den / g);
        let num = num / d;
        acc = match a.checked_mul(num) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    acc
}

fn check_order(k: usize, q: u64) -> Result<()> {
    if k == 0 || k as u64 > q {
        Err(Error::OrderTooLarge { k, q })
    } else {
        Ok(())
    }
}

/// Work estimate `C(q, k)·q` checked against the budget.
fn check_budget(q: u64, k: usize, budget: u128) -> Result<u128> {
    let tuples = binomial(q, k as u64);
    let estimate = tuples.saturating_mul(q as u128);
    if estimate > budget {
        return Err(Error::BudgetExceeded { estimate, budget });
    }
    Ok(tuples)
}

enum Width {
    Narrow,
    Wide,
}

/// Chooses an accumulator wide enough for `max(T, q−T)^k·q` and `q^k`.
fn accumulator_width(q: u64, t: u64, k: usize) -> Result<Width> {
    let peak = t.max(q - t).max(1) as u128;
    let bound = (0..k)
        .try_fold(q as u128, |acc, _| acc.checked_mul(peak))
        .and_then(|b| {
            (0..k)
                .try_fold(1u128, |acc, _| acc.checked_mul(q as u128))
                .map(|d| b.max(d))
        });
    match bound {
        Some(b) if b <= i64::MAX as u128 => Ok(Width::Narrow),
        Some(b) if b <= i128::MAX as u128 => Ok(Width::Wide),
        _ => Err(Error::TooLarge(format!(
            "order {k} products over Z_{q} overflow 128-bit accumulators"
        ))),
    }
}

/// Scaled indicator `q·f_R` laid out twice so `n + d` never needs a modulus.
fn doubled_values<A: From<i64>>(indicator: &BalancedIndicator) -> Vec<A> {
    let q = indicator.modulus();
    (0..2 * q).map(|n| A::from(indicator.scaled(n))).collect()
}

#[derive(Clone, Copy)]
struct TupleBest<A> {
    abs: A,
    window: usize,
}

/// Largest `|prefix sum|` of `Π_i w[n + d_i]` over `n < q`, first window on ties.
fn scan_tuple<A: PrimInt + Signed>(
    w: &[A],
    lags: &[usize],
    q: usize,
    buf: &mut [A],
) -> TupleBest<A> {
    let first = lags[0];
    buf.copy_from_slice(&w[first..first + q]);
    for &d in &lags[1..] {
        for (b, &x) in buf.iter_mut().zip(&w[d..d + q]) {
            *b = *b * x;
        }
    }
    let mut sum = A::zero();
    let mut best = TupleBest {
        abs: A::zero(),
        window: 1,
    };
    for (n, &b) in buf.iter().enumerate() {
        sum = sum + b;
        let a = sum.abs();
        if a > best.abs {
            best = TupleBest {
                abs: a,
                window: n + 1,
            };
        }
    }
    best
}

/// Advances `c` (strictly increasing, all `< top`) to its colex successor.
fn colex_next(c: &mut [usize], top: usize) -> bool {
    let j = c.len();
    for i in 0..j {
        let limit = if i + 1 < j { c[i + 1] } else { top };
        if c[i] + 1 < limit {
            c[i] += 1;
            for (t, slot) in c.iter_mut().enumerate().take(i) {
                *slot = t;
            }
            return true;
        }
    }
    false
}

struct ChunkBest<A> {
    abs: A,
    window: usize,
    lags: Vec<usize>,
}

/// Best tuple among those whose largest lag is `top`, in colex order.
fn best_with_top<A: PrimInt + Signed>(w: &[A], q: usize, k: usize, top: usize) -> ChunkBest<A> {
    let mut inner: Vec<usize> = (0..k - 1).collect();
    let mut lags = vec![0usize; k];
    let mut buf = vec![A::zero(); q];
    let mut best: Option<ChunkBest<A>> = None;
    loop {
        lags[..k - 1].copy_from_slice(&inner);
        lags[k - 1] = top;
        let r = scan_tuple(w, &lags, q, &mut buf);
        if best.as_ref().is_none_or(|b| r.abs > b.abs) {
            best = Some(ChunkBest {
                abs: r.abs,
                window: r.window,
                lags: lags.clone(),
            });
        }
        if k == 1 || !colex_next(&mut inner, top) {
            break;
        }
    }
    best.expect("at least one tuple")
}

fn merge_first_max<A: PrimInt>(chunks: impl IntoIterator<Item = ChunkBest<A>>) -> ChunkBest<A> {
    chunks
        .into_iter()
        .reduce(|acc, c| if c.abs > acc.abs { c } else { acc })
        .expect("nonempty")
}

fn exact_kernel<A>(
    indicator: &BalancedIndicator,
    k: usize,
    parallel: bool,
) -> (i128, usize, Vec<usize>)
where
    A: PrimInt + Signed + From<i64> + Into<i128> + Send + Sync,
{
    let q = indicator.modulus() as usize;
    let w: Vec<A> = doubled_values(indicator);
    let tops = k - 1..q;
    let best = if parallel {
        let chunks: Vec<ChunkBest<A>> = tops
            .into_par_iter()
            .map(|top| best_with_top(&w, q, k, top))
            .collect();
        merge_first_max(chunks)
    } else {
        merge_first_max(tops.map(|top| best_with_top(&w, q, k, top)))
    };
    (best.abs.into(), best.window, best.lags)
}

fn finish(
    abs_numer: i128,
    q: u64,
    k: usize,
    window: usize,
    lags: Vec<usize>,
    mode: CorrelationMode,
    tuples: u128,
) -> Result<CorrelationResult> {
    let den = (q as i128).pow(k as u32);
    Ok(CorrelationResult {
        k,
        value: Ratio::new(abs_numer, den).into(),
        window: window as u64,
        lags: LagTuple::new(lags.into_iter().map(|d| d as u64).collect(), q)?,
        mode,
        tuples,
    })
}

/// Exact `C_k(R, q)` with the default work budget.
pub fn correlation_exact(set: &ResidueSet, k: usize) -> Result<CorrelationResult> {
    correlation_exact_with(set, k, &CorrelationOptions::default())
}

pub fn correlation_exact_with(
    set: &ResidueSet,
    k: usize,
    opts: &CorrelationOptions,
) -> Result<CorrelationResult> {
    let q = set.modulus();
    check_order(k, q)?;
    let tuples = check_budget(q, k, opts.budget)?;
    let indicator = BalancedIndicator::new(set);
    let (abs, window, lags) = match accumulator_width(q, set.len() as u64, k)? {
        Width::Narrow => exact_kernel::<i64>(&indicator, k, opts.parallel),
        Width::Wide => exact_kernel::<i128>(&indicator, k, opts.parallel),
    };
    finish(abs, q, k, window, lags, CorrelationMode::Exact, tuples)
}

/// `C(R, q, s) = max_{1 ≤ k ≤ s} C_k(R, q)`; orders above `q` are skipped.
pub fn correlation_up_to(set: &ResidueSet, s: usize) -> Result<Ratio<i128>> {
    correlation_up_to_with(set, s, &CorrelationOptions::default())
}

pub fn correlation_up_to_with(
    set: &ResidueSet,
    s: usize,
    opts: &CorrelationOptions,
) -> Result<Ratio<i128>> {
    correlation_profile(set, s, opts).map(|all| {
        all.iter()
            .map(CorrelationResult::ratio)
            .max()
            .unwrap_or_else(|| Ratio::from_integer(0))
    })
}

/// `C_1, …, C_s` (capped at order `q`), each computed exactly.
pub fn correlation_profile(
    set: &ResidueSet,
    s: usize,
    opts: &CorrelationOptions,
) -> Result<Vec<CorrelationResult>> {
    if s == 0 {
        return Err(Error::OrderTooLarge {
            k: 0,
            q: set.modulus(),
        });
    }
    let top = s.min(set.modulus() as usize);
    // check every order's budget before doing any work
    for k in 1..=top {
        check_budget(set.modulus(), k, opts.budget)?;
    }
    (1..=top)
        .map(|k| correlation_exact_with(set, k, opts))
        .collect()
}

/// Literal reference implementation: loops over `M`, lag tuples in
/// lexicographic order and `n`, with no prefix-sum reuse. Limited to
/// `q ≤ 64`, `k ≤ 3`.
pub fn correlation_oracle(set: &ResidueSet, k: usize) -> Result<CorrelationResult> {
    let q = set.modulus();
    check_order(k, q)?;
    if q > ORACLE_MAX_Q || k > ORACLE_MAX_K {
        return Err(Error::TooLarge(format!(
            "oracle handles q <= {ORACLE_MAX_Q}, k <= {ORACLE_MAX_K}; got q = {q}, k = {k}"
        )));
    }
    let f = BalancedIndicator::new(set);
    let mut tuples = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn lex(start: u64, q: u64, k: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for d in start..q {
            cur.push(d);
            lex(d + 1, q, k, cur, out);
            cur.pop();
        }
    }
    lex(0, q, k, &mut current, &mut tuples);

    let mut best: Option<(i64, u64, Vec<u64>)> = None;
    for window in 1..=q {
        for lags in &tuples {
            let mut sum = 0i64;
            for n in 0..window {
                sum += lags.iter().map(|&d| f.scaled((n + d) % q)).product::<i64>();
            }
            if best.as_ref().is_none_or(|(b, _, _)| sum.abs() > *b) {
                best = Some((sum.abs(), window, lags.clone()));
            }
        }
    }
    let (abs, window, lags) = best.expect("q >= 1");
    Ok(CorrelationResult {
        k,
        value: Ratio::new(abs as i128, (q as i128).pow(k as u32)).into(),
        window,
        lags: LagTuple::new(lags, q)?,
        mode: CorrelationMode::Exact,
        tuples: tuples.len() as u128,
    })
}

/// Lower bound on `C_k` from `samples` uniformly drawn lag tuples.
///
/// Deterministic for a fixed `seed`. When `samples ≥ C(q, k)` every tuple is
/// examined instead, and the value equals the exact measure.
pub fn correlation_sampled(
    set: &ResidueSet,
    k: usize,
    samples: u64,
    seed: u64,
) -> Result<CorrelationResult> {
    correlation_sampled_with(set, k, samples, seed, &CorrelationOptions::default())
}

pub fn correlation_sampled_with(
    set: &ResidueSet,
    k: usize,
    samples: u64,
    seed: u64,
    opts: &CorrelationOptions,
) -> Result<CorrelationResult> {
    let q = set.modulus();
    check_order(k, q)?;
    if samples == 0 {
        return Err(Error::ParameterTooSmall {
            name: "samples",
            value: 0,
            min: 1,
        });
    }
    let total = binomial(q, k as u64);
    if samples as u128 >= total {
        let mut exhaustive = correlation_exact_with(set, k, opts)?;
        exhaustive.mode = CorrelationMode::Sampled;
        return Ok(exhaustive);
    }
    let estimate = (samples as u128).saturating_mul(q as u128);
    if estimate > opts.budget {
        return Err(Error::BudgetExceeded {
            estimate,
            budget: opts.budget,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<usize>> = (0..samples)
        .map(|_| {
            let mut lags = index::sample(&mut rng, q as usize, k).into_vec();
            lags.sort_unstable();
            lags
        })
        .collect();
    let indicator = BalancedIndicator::new(set);
    let (abs, window, lags) = match accumulator_width(q, set.len() as u64, k)? {
        Width::Narrow => sampled_kernel::<i64>(&indicator, &draws, opts.parallel),
        Width::Wide => sampled_kernel::<i128>(&indicator, &draws, opts.parallel),
    };
    finish(
        abs,
        q,
        k,
        window,
        lags,
        CorrelationMode::Sampled,
        samples as u128,
    )
}

fn sampled_kernel<A>(
    indicator: &BalancedIndicator,
    draws: &[Vec<usize>],
    parallel: bool,
) -> (i128, usize, Vec<usize>)
where
    A: PrimInt + Signed + From<i64> + Into<i128> + Send + Sync,
{
    let q = indicator.modulus() as usize;
    let w: Vec<A> = doubled_values(indicator);
    let eval = |lags: &Vec<usize>| {
        let mut buf = vec![A::zero(); q];
        let r = scan_tuple(&w, lags, q, &mut buf);
        ChunkBest {
            abs: r.abs,
            window: r.window,
            lags: lags.clone(),
        }
    };
    let best = if parallel {
        let all: Vec<ChunkBest<A>> = draws.par_iter().map(eval).collect();
        merge_first_max(all)
    } else {
        merge_first_max(draws.iter().map(eval))
    };
    (best.abs.into(), best.window, best.lags)
}
