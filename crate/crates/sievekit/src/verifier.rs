//! Exhaustive numerical verifications.
//!
//! Four scan families live here, all reporting through one [`ScanReport`]
//! shape:
//!
//! * [`verify_mertens`] — checks, at every prime `p <= limit`, that the
//!   Mertens product `I(x) = prod_{p <= x} (1 - 1/p)^{-1}` stays inside the
//!   band `e^gamma log p_next < I(p) < e^gamma log p + 2 e^gamma / sqrt(p)`.
//!   Checking the pair inequality at primes certifies the band at every real
//!   point in between: on `[p, p_next)` the product is constant while
//!   `e^gamma log x` peaks just below the right endpoint, and the upper
//!   envelope `e^gamma (log x + 2/sqrt(x))` is increasing, so the two
//!   endpoint comparisons dominate the whole interval.
//! * [`scan_epsilon_case1`] — bounded sweeps of the product-ratio quantity
//!   `I(z)/I(u) * log u / log z` that calibrates the sieve's relative-error
//!   allowance below `z = 12000`; [`check_epsilon_large_z`] covers the three
//!   closed-form regimes above.
//! * [`verify_interval`] — for every `n` in a range, finds the least
//!   `a` in `(n^2, (n+1)^2)` with at most `k` prime factors.
//! * [`verify_4p`] — for every `n`, finds a prime `p` making `4p` land
//!   strictly between `n^2` and `(n+1)^2`, giving a witness with exactly
//!   three prime factors.
//!
//! Float policy: scans accumulate in compensated double precision, and any
//! comparison that lands within [`ESCALATION_RELATIVE`] of its boundary is
//! re-evaluated at 192-bit precision before being classified as a pass, a
//! near-boundary pass, or a counterexample. Long scans are segmented; the
//! segment partition is fixed by the inputs alone, per-segment work is
//! independent, and partial results are merged in segment order, so reports
//! do not depend on how many worker threads ran the scan.

use std::path::{Path, PathBuf};

use num_integer::Roots;
use rayon::prelude::*;

use crate::checkpoint::{CheckpointFile, SegmentRecord};
use crate::primes::{next_prime_after, omega_at_most, primes_up_to, segment_primes, PrimeTable};
use crate::scalar::{HighPrec, NeumaierSum, Real, EULER_GAMMA};
use crate::{Error, Result};

/// Relative margin below which a comparison is re-run at extended precision
/// before being classified.
pub const ESCALATION_RELATIVE: f64 = 1e-9;

/// Default width of one Mertens-scan segment.
pub const DEFAULT_SEGMENT_WIDTH: u64 = 100_000_000;

/// Default number of completed segments per checkpoint rewrite.
pub const DEFAULT_CHECKPOINT_BATCH: usize = 4;

/// Every ratio in the bounded epsilon scan must stay below this.
pub const EPSILON_CASE1_BOUND: f64 = 1.0 + 1.97e-3;

/// Margin bound for `12000 <= z < 4e9`.
pub const MEDIUM_Z_MARGIN_BOUND: f64 = 1.95e-3;

/// Ratio bound for `z >= 4e9` when the companion point satisfies `u <= 4e9`.
pub const LARGE_Z_SMALL_U_BOUND: f64 = 1.0 + 1e-4;

/// Ratio bound for `z >= 4e9` when `u > 4e9` as well.
pub const LARGE_Z_LARGE_U_BOUND: f64 = 1.0 + 1.6e-4;

/// Largest `n_hi` accepted by the direct interval verifications. Beyond this
/// the per-interval trial division stops being a desk-scale computation.
pub const INTERVAL_N_MAX: u64 = 10_000_000;

const EPSILON_Z_MIN: usize = 3024;
const EPSILON_Z_END: usize = 12_000; // exclusive
const LARGE_Z_SPLIT: f64 = 4e9;
const BAND_NUMERATOR: f64 = 0.841;

/// One point where a scanned inequality failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    /// Scan-specific coordinates (for example `[p]` or `[u, z]`).
    pub location: Vec<u64>,
    pub detail: String,
}

/// A point that passed, but only by less than [`ESCALATION_RELATIVE`]
/// (confirmed at extended precision).
#[derive(Debug, Clone, PartialEq)]
pub struct NearBoundary {
    pub location: Vec<u64>,
    /// Relative distance from the failure boundary.
    pub margin: f64,
}

/// Outcome of one exhaustive scan.
///
/// `max_value` is the scan's extremal statistic — each scan documents what it
/// maximizes — and `argmax` is its first maximizer in the scan's fixed
/// iteration order (lexicographically smallest coordinates among ties).
/// `counterexamples` is empty exactly when the scanned inequality held at
/// every checked point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub scan_id: String,
    pub range: (u64, u64),
    pub max_value: f64,
    pub argmax: Vec<u64>,
    pub counterexamples: Vec<Counterexample>,
    pub checked_count: u64,
    pub near_boundary: Vec<NearBoundary>,
}

// ---------------------------------------------------------------------------
// Mertens band scan
// ---------------------------------------------------------------------------

/// Tuning knobs for [`verify_mertens_with`].
#[derive(Debug, Clone)]
pub struct MertensOptions {
    /// Width of one segment of the prime range.
    pub segment_width: u64,
    /// Checkpoint file to resume from and append to.
    pub checkpoint: Option<PathBuf>,
    /// Completed segments per checkpoint rewrite.
    pub batch: usize,
}

impl Default for MertensOptions {
    fn default() -> Self {
        MertensOptions {
            segment_width: DEFAULT_SEGMENT_WIDTH,
            checkpoint: None,
            batch: DEFAULT_CHECKPOINT_BATCH,
        }
    }
}

/// The `-log(1 - 1/p)` term a prime contributes to `log I`.
fn neg_log_term(p: u64) -> f64 {
    -(-1.0 / p as f64).ln_1p()
}

/// Scan bookkeeping for one segment (also reused as the merge accumulator).
#[derive(Debug, Clone)]
struct SegmentScan {
    max_ratio: f64,
    argmax: u64,
    counterexamples: Vec<Counterexample>,
    near: Vec<NearBoundary>,
    count: u64,
    final_sum: (f64, f64),
}

impl SegmentScan {
    fn new() -> Self {
        SegmentScan {
            max_ratio: f64::NEG_INFINITY,
            argmax: 0,
            counterexamples: Vec::new(),
            near: Vec::new(),
            count: 0,
            final_sum: (0.0, 0.0),
        }
    }
}

/// Re-evaluates both band margins at 192-bit precision.
///
/// The compensated pair in `running` is promoted exactly, so the reference
/// comparison is exact with respect to the accumulated value; the residual
/// uncertainty is the accumulated per-term rounding of the double-precision
/// logarithms, a few times `1e-16` in absolute terms over the full scan —
/// seven orders of magnitude below the `1e-9` escalation threshold.
fn escalated_margins(p: u64, succ: u64, running: &NeumaierSum) -> (f64, f64) {
    let s = running.to_high_prec();
    let gamma = <HighPrec as Real>::euler_gamma();
    let low_side = gamma.clone() + HighPrec::from_u64(succ).ln().ln();
    let p_hp = HighPrec::from_u64(p);
    let envelope = p_hp.ln() + HighPrec::from_f64(2.0) / p_hp.sqrt();
    let up_side = gamma + envelope.ln();
    let low = (s.clone() - low_side).to_f64();
    let up = (up_side - s).to_f64();
    (low, up)
}

/// Adds `p`'s term to the running sum, then classifies the band pair
/// `(p, succ)` into the accumulator.
fn classify_pair(p: u64, succ: u64, running: &mut NeumaierSum, out: &mut SegmentScan) {
    running.add(neg_log_term(p));
    let s = running.value();
    let pf = p as f64;
    // Both inequalities in log space: log I(p) must exceed
    // gamma + log log p_next and stay below gamma + log(log p + 2/sqrt(p)).
    let low_margin = s - (EULER_GAMMA + (succ as f64).ln().ln());
    let up_margin = (EULER_GAMMA + (pf.ln() + 2.0 / pf.sqrt()).ln()) - s;
    let margin = low_margin.min(up_margin);
    out.count += 1;

    // The log-space margin is the relative distance of the ratio from 1, so
    // `margin < 1e-9` is exactly "within 1e-9 relative of failing" — and it
    // also covers outright failures, which are therefore always confirmed at
    // extended precision before being reported.
    if margin < ESCALATION_RELATIVE {
        let (low_hp, up_hp) = escalated_margins(p, succ, running);
        let hp_margin = low_hp.min(up_hp);
        if hp_margin <= 0.0 {
            let side = if low_hp <= up_hp { "lower" } else { "upper" };
            out.counterexamples.push(Counterexample {
                location: vec![p],
                detail: format!(
                    "{side} band inequality fails at p = {p} (successor {succ}): \
                     log-space margin {hp_margin:.3e}"
                ),
            });
        } else {
            out.near.push(NearBoundary {
                location: vec![p],
                margin: hp_margin,
            });
        }
    }

    // Track the tighter side's ratio (= exp(-margin), < 1 iff the pair
    // passes); its maximum is the scan's closest approach to the band edge.
    let ratio = (-margin).exp();
    if ratio > out.max_ratio {
        out.max_ratio = ratio;
        out.argmax = p;
    }
}

/// Half-open subrange `[lo, hi)` of the scan.
#[derive(Debug, Clone, Copy)]
struct SegmentJob {
    lo: u64,
    hi: u64,
}

/// Per-segment accumulation pass: segment-local sum, count, endpoints.
#[derive(Debug, Clone, Copy)]
struct SegmentSummary {
    sum: (f64, f64),
    count: u64,
    first: Option<u64>,
    last: Option<u64>,
}

fn summarize_segment(job: SegmentJob, base: &PrimeTable) -> Result<SegmentSummary> {
    let mut sum = NeumaierSum::new();
    let mut count = 0u64;
    let mut first = None;
    let mut last = None;
    segment_primes(job.lo, job.hi, base, |p| {
        sum.add(neg_log_term(p));
        count += 1;
        if first.is_none() {
            first = Some(p);
        }
        last = Some(p);
    })?;
    Ok(SegmentSummary {
        sum: sum.parts(),
        count,
        first,
        last,
    })
}

/// Check pass over one segment: walks its primes in order, starting from the
/// prefix sum over all earlier primes, pairing each prime with its successor
/// (`succ_after` for the segment's last prime).
fn scan_segment(
    job: SegmentJob,
    base: &PrimeTable,
    prefix: NeumaierSum,
    succ_after: u64,
) -> Result<SegmentScan> {
    let mut running = prefix;
    let mut out = SegmentScan::new();
    let mut pending: Option<u64> = None;
    segment_primes(job.lo, job.hi, base, |p| {
        if let Some(prev) = pending.replace(p) {
            classify_pair(prev, p, &mut running, &mut out);
        }
    })?;
    if let Some(prev) = pending {
        classify_pair(prev, succ_after, &mut running, &mut out);
    }
    out.final_sum = running.parts();
    Ok(out)
}

/// Runs the Mertens band scan up to `limit` with default options (segment
/// width [`DEFAULT_SEGMENT_WIDTH`], optional checkpoint file).
pub fn verify_mertens(limit: u64, checkpoint: Option<&Path>) -> Result<ScanReport> {
    verify_mertens_with(
        limit,
        &MertensOptions {
            checkpoint: checkpoint.map(Path::to_path_buf),
            ..MertensOptions::default()
        },
    )
}

/// Mertens band scan with explicit options.
///
/// `max_value` is the largest band ratio observed (each side rearranged as a
/// ratio that must stay below 1); `argmax` is `[p]` at that prime. With a
/// checkpoint, completed segments are recorded in batches of `opts.batch`
/// and a later call with the same arguments resumes after the last record;
/// resumed runs report the extremal statistic over the freshly scanned
/// segments only, while `checked_count` stays cumulative.
pub fn verify_mertens_with(limit: u64, opts: &MertensOptions) -> Result<ScanReport> {
    if limit < 3 {
        return Err(Error::Domain {
            what: "limit",
            value: limit as f64,
            range: "[3, 2^63)",
        });
    }
    if opts.segment_width < 64 {
        return Err(Error::Domain {
            what: "segment_width",
            value: opts.segment_width as f64,
            range: "[64, 2^63)",
        });
    }
    if opts.batch == 0 {
        return Err(Error::Domain {
            what: "batch",
            value: 0.0,
            range: "[1, usize::MAX]",
        });
    }

    let width = opts.segment_width;
    let base = primes_up_to(limit.sqrt().max(2))?;
    let n_segments = (limit - 1).div_ceil(width);
    let jobs: Vec<SegmentJob> = (0..n_segments)
        .map(|k| SegmentJob {
            lo: 2 + k * width,
            hi: (2 + (k + 1) * width).min(limit + 1),
        })
        .collect();

    // Resume state. A record for segment k is only ever written after the
    // check pass of segment k completed, and that pass already paired the
    // segment's last prime with its successor — so resuming at k+1 re-checks
    // nothing and skips nothing.
    let mut cp = CheckpointFile::new("verify-mertens", limit, width);
    let mut start_index = 0usize;
    let mut prefix = NeumaierSum::new();
    let mut carried_checked = 0u64;
    let mut carried_last = 0u64;
    if let Some(path) = &opts.checkpoint {
        if let Some(found) = CheckpointFile::load(path)? {
            found.matches(path, "verify-mertens", limit, width)?;
            if let Some(rec) = found.records.last() {
                start_index = rec.index as usize + 1;
                prefix = rec.sum()?;
                carried_checked = rec.checked_count;
                carried_last = rec.last_prime;
            }
            cp = found;
        }
    }
    let remaining = &jobs[start_index.min(jobs.len())..];

    // Phase 1 (parallel): independent per-segment sums.
    let summaries: Vec<SegmentSummary> = remaining
        .par_iter()
        .map(|&j| summarize_segment(j, &base))
        .collect::<Result<_>>()?;

    // Ordered merge: prefix sum at the start of each remaining segment.
    let mut starts = Vec::with_capacity(summaries.len());
    let mut acc = prefix;
    for s in &summaries {
        starts.push(acc);
        acc.merge(&NeumaierSum::from_parts(s.sum.0, s.sum.1));
    }
    let merged_total = acc;

    // Successor of each segment's last prime: the first prime of the next
    // nonempty segment, or the first prime beyond the scan limit.
    let after_limit = next_prime_after(limit)?;
    let mut successors = vec![after_limit; summaries.len()];
    let mut next_known = after_limit;
    for i in (0..summaries.len()).rev() {
        successors[i] = next_known;
        if let Some(f) = summaries[i].first {
            next_known = f;
        }
    }

    // Cumulative record state after each remaining segment.
    let mut cum_checked = Vec::with_capacity(summaries.len());
    let mut cum_last = Vec::with_capacity(summaries.len());
    let mut run_checked = carried_checked;
    let mut run_last = carried_last;
    for s in &summaries {
        run_checked += s.count;
        run_last = s.last.unwrap_or(run_last);
        cum_checked.push(run_checked);
        cum_last.push(run_last);
    }

    // Phase 2: check passes, parallel within a batch, batches in order.
    // Without a checkpoint there is nothing to record incrementally, so the
    // whole range forms one batch.
    let batch = if opts.checkpoint.is_some() {
        opts.batch
    } else {
        summaries.len().max(1)
    };
    let mut scans: Vec<SegmentScan> = Vec::with_capacity(summaries.len());
    let mut done = 0usize;
    while done < summaries.len() {
        let end = (done + batch).min(summaries.len());
        let part: Vec<SegmentScan> = (done..end)
            .into_par_iter()
            .map(|i| scan_segment(remaining[i], &base, starts[i], successors[i]))
            .collect::<Result<_>>()?;
        scans.extend(part);
        if let Some(path) = &opts.checkpoint {
            for i in done..end {
                let after = if i + 1 < starts.len() {
                    starts[i + 1]
                } else {
                    merged_total
                };
                cp.records.push(SegmentRecord::from_state(
                    (start_index + i) as u64,
                    cum_last[i],
                    &after,
                    cum_checked[i],
                ));
            }
            cp.save(path)?;
        }
        done = end;
    }

    // Concurrency-model check: folding whole-segment sums must agree with
    // the sequential prefix chain threaded through the check pass.
    if let Some(last) = scans.last() {
        let chained = NeumaierSum::from_parts(last.final_sum.0, last.final_sum.1).value();
        let folded = merged_total.value();
        if (chained - folded).abs() > 1e-12 * folded.abs().max(1.0) {
            return Err(Error::Contract(format!(
                "segment-sum combination diverged from sequential accumulation: \
                 {folded} vs {chained}"
            )));
        }
    }

    let mut merged = SegmentScan::new();
    for sc in scans {
        if sc.max_ratio > merged.max_ratio {
            merged.max_ratio = sc.max_ratio;
            merged.argmax = sc.argmax;
        }
        merged.counterexamples.extend(sc.counterexamples);
        merged.near.extend(sc.near);
        merged.count += sc.count;
    }
    let (max_value, argmax) = if merged.count > 0 {
        (merged.max_ratio, vec![merged.argmax])
    } else {
        (0.0, Vec::new())
    };
    Ok(ScanReport {
        scan_id: "verify-mertens".into(),
        range: (2, limit),
        max_value,
        argmax,
        counterexamples: merged.counterexamples,
        checked_count: carried_checked + merged.count,
        near_boundary: merged.near,
    })
}

// ---------------------------------------------------------------------------
// Epsilon ratio scans
// ---------------------------------------------------------------------------

/// The two bounded epsilon scans: companion points `u` rounded to composites
/// and to primes.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonScans {
    pub composite: ScanReport,
    pub prime: ScanReport,
}

/// Compensated prefix of `log I(m) = sum_{p <= m} -log(1 - 1/p)` for every
/// integer `m <= m_max`, stored as the raw `(sum, compensation)` pairs so a
/// difference can be re-evaluated at extended precision.
fn mertens_log_prefix(m_max: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let table = primes_up_to(m_max as u64)?;
    let mut is_prime = vec![false; m_max + 1];
    for &p in table.primes() {
        is_prime[p as usize] = true;
    }
    let mut hi = vec![0.0f64; m_max + 1];
    let mut lo = vec![0.0f64; m_max + 1];
    let mut acc = NeumaierSum::new();
    for m in 2..=m_max {
        if is_prime[m] {
            acc.add(neg_log_term(m as u64));
        }
        let (h, l) = acc.parts();
        hi[m] = h;
        lo[m] = l;
    }
    Ok((hi, lo))
}

/// Shared chunk accumulator for the pair scans.
#[derive(Debug, Clone)]
struct PairChunk {
    best_lr: f64,
    best: (u64, u64),
    count: u64,
    counterexamples: Vec<Counterexample>,
    near: Vec<NearBoundary>,
}

impl PairChunk {
    fn new() -> Self {
        PairChunk {
            best_lr: f64::NEG_INFINITY,
            best: (0, 0),
            count: 0,
            counterexamples: Vec::new(),
            near: Vec::new(),
        }
    }

    /// Classifies one `(u, z)` pair given the log-ratio `lr` and the prefix
    /// indices `iu` (within `hi`/`lo`) backing an escalated re-evaluation.
    #[allow(clippy::too_many_arguments)]
    fn visit(
        &mut self,
        u: usize,
        z: usize,
        iu: usize,
        lr: f64,
        ln_bound: f64,
        hi: &[f64],
        lo: &[f64],
    ) {
        self.count += 1;
        if lr > self.best_lr {
            self.best_lr = lr;
            self.best = (u as u64, z as u64);
        }
        // `lr` and `ln_bound` are both log-scale, so their difference is the
        // relative distance of the ratio from the bound.
        if (lr - ln_bound).abs() < ESCALATION_RELATIVE {
            let lr_hp = HighPrec::from_f64(hi[z]) + HighPrec::from_f64(lo[z])
                - HighPrec::from_f64(hi[iu])
                - HighPrec::from_f64(lo[iu])
                + HighPrec::from_u64(u as u64).ln().ln()
                - HighPrec::from_u64(z as u64).ln().ln();
            let margin = (HighPrec::from_f64(ln_bound) - lr_hp).to_f64();
            if margin <= 0.0 {
                self.counterexamples.push(Counterexample {
                    location: vec![u as u64, z as u64],
                    detail: format!(
                        "ratio exceeds the epsilon bound at (u, z) = ({u}, {z}) \
                         by {:.3e} in log scale",
                        -margin
                    ),
                });
            } else {
                self.near.push(NearBoundary {
                    location: vec![u as u64, z as u64],
                    margin,
                });
            }
        } else if lr >= ln_bound {
            self.counterexamples.push(Counterexample {
                location: vec![u as u64, z as u64],
                detail: format!(
                    "ratio exceeds the epsilon bound at (u, z) = ({u}, {z}) \
                     by {:.3e} in log scale",
                    lr - ln_bound
                ),
            });
        }
    }

    fn merge(mut self, other: PairChunk) -> PairChunk {
        if other.best_lr > self.best_lr
            || (other.best_lr == self.best_lr && other.best < self.best)
        {
            self.best_lr = other.best_lr;
            self.best = other.best;
        }
        self.count += other.count;
        self.counterexamples.extend(other.counterexamples);
        self.near.extend(other.near);
        self
    }
}

fn pair_report(scan_id: &str, merged: PairChunk) -> ScanReport {
    ScanReport {
        scan_id: scan_id.into(),
        range: (EPSILON_Z_MIN as u64, (EPSILON_Z_END - 1) as u64),
        max_value: merged.best_lr.exp(),
        argmax: vec![merged.best.0, merged.best.1],
        counterexamples: merged.counterexamples,
        checked_count: merged.count,
        near_boundary: merged.near,
    }
}

/// Exhaustive ratio scan over the bounded region `3024 <= floor(z) < 12000`.
///
/// Composite rounding compares `I(Z)/I(U) * log U / log Z` over all integer
/// pairs `4 <= U <= Z`; prime rounding compares `I(Z)/I(u-1) * log u / log Z`
/// over primes `3 <= u < Z`. `max_value` is the largest ratio, `argmax` its
/// first `(u, z)` attainer in ascending `(u, z)` order; every ratio must stay
/// below [`EPSILON_CASE1_BOUND`]. About `6.7e7` pairs are evaluated, each a
/// constant-time prefix-array lookup; `u` ranges are chunked statically, so
/// the reports are independent of the worker count.
pub fn scan_epsilon_case1() -> Result<EpsilonScans> {
    let m_max = EPSILON_Z_END - 1;
    let (hi, lo) = mertens_log_prefix(m_max)?;
    let table = primes_up_to(m_max as u64)?;
    let mut lnln = vec![f64::NAN; m_max + 1];
    for (m, slot) in lnln.iter_mut().enumerate().skip(2) {
        *slot = (m as f64).ln().ln();
    }
    let ln_bound = EPSILON_CASE1_BOUND.ln();

    // Composite rounding: u itself indexes the prefix.
    let us: Vec<usize> = (4..=m_max).collect();
    let composite = us
        .par_chunks(256)
        .map(|chunk| {
            let mut c = PairChunk::new();
            for &u in chunk {
                for z in EPSILON_Z_MIN.max(u)..=m_max {
                    let lr = (hi[z] - hi[u]) + (lo[z] - lo[u]) + lnln[u] - lnln[z];
                    c.visit(u, z, u, lr, ln_bound, &hi, &lo);
                }
            }
            c
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(PairChunk::new(), PairChunk::merge);

    // Prime rounding: the prefix is evaluated one below the prime.
    let prime_us: Vec<usize> = table
        .primes()
        .iter()
        .map(|&p| p as usize)
        .filter(|&p| (3..m_max).contains(&p))
        .collect();
    let prime = prime_us
        .par_chunks(64)
        .map(|chunk| {
            let mut c = PairChunk::new();
            for &u in chunk {
                for z in EPSILON_Z_MIN.max(u + 1)..=m_max {
                    let lr = (hi[z] - hi[u - 1]) + (lo[z] - lo[u - 1]) + lnln[u] - lnln[z];
                    c.visit(u, z, u - 1, lr, ln_bound, &hi, &lo);
                }
            }
            c
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(PairChunk::new(), PairChunk::merge);

    Ok(EpsilonScans {
        composite: pair_report("epsilon-case1-composite", composite),
        prime: pair_report("epsilon-case1-prime", prime),
    })
}

/// Closed-form epsilon margin for `z >= 12000`.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeZMargin {
    /// `"medium-z"`, `"large-z-small-u"`, or `"large-z-large-u"`.
    pub case_id: &'static str,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Evaluates the closed-form epsilon margin at `(z, u)`.
///
/// * `12000 <= z < 4e9` — margin `2 / (sqrt(z) log z)`, bound
///   [`MEDIUM_Z_MARGIN_BOUND`]; independent of `u`.
/// * `z >= 4e9`, `u <= 4e9` — ratio `1 / (1 - 0.841/log^3 z)`, bound
///   [`LARGE_Z_SMALL_U_BOUND`].
/// * `z >= 4e9`, `u > 4e9` — ratio
///   `(1 + 0.841/log^3 u) / (1 - 0.841/log^3 z)`, bound
///   [`LARGE_Z_LARGE_U_BOUND`].
///
/// Below `z = 12000` the closed forms do not apply; use
/// [`scan_epsilon_case1`], which covers that region exhaustively.
pub fn check_epsilon_large_z(z: f64, u: f64) -> Result<LargeZMargin> {
    if !z.is_finite() || z < 12_000.0 {
        return Err(Error::Domain {
            what: "z",
            value: z,
            range: "[12000, inf); below 12000 run scan_epsilon_case1 instead",
        });
    }
    if !u.is_finite() || u < 3.0 {
        return Err(Error::Domain {
            what: "u",
            value: u,
            range: "[3, inf)",
        });
    }
    let report = if z < LARGE_Z_SPLIT {
        let value = 2.0 / (z.sqrt() * z.ln());
        LargeZMargin {
            case_id: "medium-z",
            value,
            bound: MEDIUM_Z_MARGIN_BOUND,
            pass: value < MEDIUM_Z_MARGIN_BOUND,
        }
    } else {
        let lz = z.ln();
        let denom = 1.0 - BAND_NUMERATOR / (lz * lz * lz);
        if u <= LARGE_Z_SPLIT {
            let value = 1.0 / denom;
            LargeZMargin {
                case_id: "large-z-small-u",
                value,
                bound: LARGE_Z_SMALL_U_BOUND,
                pass: value < LARGE_Z_SMALL_U_BOUND,
            }
        } else {
            let lu = u.ln();
            let value = (1.0 + BAND_NUMERATOR / (lu * lu * lu)) / denom;
            LargeZMargin {
                case_id: "large-z-large-u",
                value,
                bound: LARGE_Z_LARGE_U_BOUND,
                pass: value < LARGE_Z_LARGE_U_BOUND,
            }
        }
    };
    Ok(report)
}

// ---------------------------------------------------------------------------
// Direct interval verifications
// ---------------------------------------------------------------------------

/// Least almost-prime witness for one square interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalWitness {
    pub n: u64,
    /// Least `a` in `(n^2, (n+1)^2)` with at most `k` prime factors.
    pub witness: u64,
}

/// Outcome of [`verify_interval`]: the scan report plus every witness found.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalScan {
    pub report: ScanReport,
    pub witnesses: Vec<IntervalWitness>,
}

/// For every `n` in `[n_lo, n_hi]`, finds the least integer strictly between
/// `n^2` and `(n+1)^2` with at most `k` prime factors (with multiplicity).
///
/// Witnesses are re-verified as they are found: containment is by
/// construction of the candidate walk, and the factor count comes from a
/// full trial-division factorization. `max_value` is the largest offset
/// `witness - n^2` over the range (how deep any search had to go), `argmax`
/// is `[n]` at the first such `n`. A missing witness becomes a
/// counterexample. Ranges beyond [`INTERVAL_N_MAX`] are rejected as
/// infeasible for trial-division factorization.
pub fn verify_interval(n_lo: u64, n_hi: u64, k: u32) -> Result<IntervalScan> {
    if n_lo < 1 || n_lo > n_hi {
        return Err(Error::Precondition(format!(
            "verify_interval: need 1 <= n_lo <= n_hi, got [{n_lo}, {n_hi}]"
        )));
    }
    if n_hi > INTERVAL_N_MAX {
        return Err(Error::Precondition(format!(
            "verify_interval: n_hi = {n_hi} exceeds {INTERVAL_N_MAX}; factoring every \
             candidate in (n^2, (n+1)^2) by trial division is infeasible beyond that"
        )));
    }
    let table = primes_up_to((n_hi + 1).max(2))?;

    struct Chunk {
        witnesses: Vec<IntervalWitness>,
        counterexamples: Vec<Counterexample>,
        max_offset: u64,
        arg: u64,
    }
    let ns: Vec<u64> = (n_lo..=n_hi).collect();
    let chunks: Vec<Chunk> = ns
        .par_chunks(4096)
        .map(|chunk| {
            let mut out = Chunk {
                witnesses: Vec::with_capacity(chunk.len()),
                counterexamples: Vec::new(),
                max_offset: 0,
                arg: 0,
            };
            for &n in chunk {
                let square = n * n;
                let mut found = None;
                for a in square + 1..square + 2 * n + 1 {
                    if omega_at_most(a, k, &table)?.is_some() {
                        found = Some(a);
                        break;
                    }
                }
                match found {
                    Some(a) => {
                        out.witnesses.push(IntervalWitness { n, witness: a });
                        let offset = a - square;
                        if offset > out.max_offset {
                            out.max_offset = offset;
                            out.arg = n;
                        }
                    }
                    None => out.counterexamples.push(Counterexample {
                        location: vec![n],
                        detail: format!(
                            "no integer strictly between {n}^2 and {}^2 has at most \
                             {k} prime factors",
                            n + 1
                        ),
                    }),
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut witnesses = Vec::with_capacity(ns.len());
    let mut counterexamples = Vec::new();
    let mut max_offset = 0u64;
    let mut arg = None;
    for c in chunks {
        witnesses.extend(c.witnesses);
        counterexamples.extend(c.counterexamples);
        if c.max_offset > max_offset {
            max_offset = c.max_offset;
            arg = Some(c.arg);
        }
    }
    Ok(IntervalScan {
        report: ScanReport {
            scan_id: "verify-interval".into(),
            range: (n_lo, n_hi),
            max_value: max_offset as f64,
            argmax: arg.map(|n| vec![n]).unwrap_or_default(),
            counterexamples,
            checked_count: n_hi - n_lo + 1,
            near_boundary: Vec::new(),
        },
        witnesses,
    })
}

/// Witness prime for the `4p` construction at one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourPWitness {
    pub n: u64,
    /// Least prime making `4p` land strictly between `n^2` and `(n+1)^2`.
    pub p: u64,
}

/// Outcome of [`verify_4p`].
#[derive(Debug, Clone, PartialEq)]
pub struct FourPScan {
    pub report: ScanReport,
    pub witnesses: Vec<FourPWitness>,
}

/// Candidate primes for `n`: the integers `p` with `n^2 < 4p < (n+1)^2`
/// (for odd `n`, additionally `4p != n^2` is automatic since `n^2` is odd).
fn fourp_candidates(n: u64) -> (u64, u64) {
    if n % 2 == 0 {
        // n = 2m: p strictly between m^2 and m(m+1).
        let m = n / 2;
        (m * m + 1, m * m + m - 1)
    } else {
        // n = 2h - 1: p strictly between h^2 - h and h^2.
        let h = n.div_ceil(2);
        (h * h - h + 1, h * h - 1)
    }
}

/// For every `n` in `[n_lo, n_hi]`, finds the least prime `p` with
/// `n^2 < 4p < (n+1)^2`, certifying a witness `4p` with exactly three prime
/// factors in the square interval.
///
/// Each hit is confirmed independently of the candidate arithmetic: `4p` is
/// compared against both squares, its factor count is recomputed by trial
/// division, and for odd `n` the (automatic) `4p != n^2` is rechecked. A
/// half-interval containing no prime becomes a counterexample. `max_value`
/// is the deepest search `p - first_candidate`, `argmax` the first `[n]`
/// attaining it.
pub fn verify_4p(n_lo: u64, n_hi: u64) -> Result<FourPScan> {
    if n_lo < 3 || n_lo > n_hi {
        return Err(Error::Precondition(format!(
            "verify_4p: need 3 <= n_lo <= n_hi, got [{n_lo}, {n_hi}]"
        )));
    }
    if n_hi > INTERVAL_N_MAX {
        return Err(Error::Precondition(format!(
            "verify_4p: n_hi = {n_hi} exceeds {INTERVAL_N_MAX}; certifying candidate \
             primes by trial division is infeasible beyond that"
        )));
    }
    // Covers sqrt(4p) <= n + 2 for candidate certification and the factor
    // recount of 4p.
    let table = primes_up_to(n_hi + 2)?;
    let is_prime = |x: u64| -> bool {
        debug_assert!(table.limit() * table.limit() >= x);
        for &q in table.primes() {
            if q * q > x {
                break;
            }
            if x % q == 0 {
                return x == q;
            }
        }
        x >= 2
    };

    struct Chunk {
        witnesses: Vec<FourPWitness>,
        counterexamples: Vec<Counterexample>,
        max_depth: u64,
        arg: u64,
    }
    let ns: Vec<u64> = (n_lo..=n_hi).collect();
    let chunks: Vec<Chunk> = ns
        .par_chunks(4096)
        .map(|chunk| {
            let mut out = Chunk {
                witnesses: Vec::with_capacity(chunk.len()),
                counterexamples: Vec::new(),
                max_depth: 0,
                arg: 0,
            };
            for &n in chunk {
                let (c_lo, c_hi) = fourp_candidates(n);
                let found = (c_lo..=c_hi).find(|&c| is_prime(c));
                match found {
                    Some(p) => {
                        let w = 4 * p;
                        let sq = n * n;
                        let sq_next = (n + 1) * (n + 1);
                        let omega_ok =
                            matches!(omega_at_most(w, 3, &table)?, Some(om) if om == 3);
                        if !(sq < w && w < sq_next) || !omega_ok || (n % 2 == 1 && w == sq) {
                            return Err(Error::Contract(format!(
                                "4p confirmation failed at n = {n}, p = {p}: \
                                 4p = {w} against squares {sq}, {sq_next}"
                            )));
                        }
                        out.witnesses.push(FourPWitness { n, p });
                        let depth = p - c_lo;
                        if depth > out.max_depth {
                            out.max_depth = depth;
                            out.arg = n;
                        }
                    }
                    None => out.counterexamples.push(Counterexample {
                        location: vec![n],
                        detail: format!(
                            "no prime in [{c_lo}, {c_hi}], the candidate range for \
                             4p strictly between {n}^2 and {}^2",
                            n + 1
                        ),
                    }),
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut witnesses = Vec::with_capacity(ns.len());
    let mut counterexamples = Vec::new();
    let mut max_depth = 0u64;
    let mut arg = None;
    for c in chunks {
        witnesses.extend(c.witnesses);
        counterexamples.extend(c.counterexamples);
        if c.max_depth > max_depth {
            max_depth = c.max_depth;
            arg = Some(c.arg);
        }
    }
    Ok(FourPScan {
        report: ScanReport {
            scan_id: "verify-4p".into(),
            range: (n_lo, n_hi),
            max_value: max_depth as f64,
            argmax: arg.map(|n| vec![n]).unwrap_or_default(),
            counterexamples,
            checked_count: n_hi - n_lo + 1,
            near_boundary: Vec::new(),
        },
        witnesses,
    })
}
