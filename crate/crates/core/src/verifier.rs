//! Range verification: certify that every start in `[lo, hi]` reaches 1 and
//! collect record statistics along the way.
//!
//! The range is cut into fixed-size chunks that workers process
//! independently. Each chunk yields a partial [`VerifyReport`]; partials are
//! combined with [`merge_reports`], which is exact, associative and
//! commutative, so the result does not depend on chunk size or worker count.
//!
//! Two optimizations keep the per-start work short:
//!
//! * a dense cache of stopping times and peaks for every `n` below
//!   `cache_limit`, filled sequentially before the parallel phase and
//!   read-only afterwards;
//! * an optional cutoff: values below `assume_verified_below` are taken as
//!   already certified, so a trajectory no longer needs its step budget once
//!   it drops below the cutoff.
//!
//! Statistics are always exact. When a trajectory drops below the cutoff at
//! a value the cache does not cover, it is followed further until the cache
//! or 1 is reached.

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycles::{find_cycle, ClosedLoop};
use crate::dynamics::MapVariant;
use crate::nat::Nat;

pub const DEFAULT_STEP_BUDGET: u64 = 100_000;
pub const DEFAULT_CHUNK_SIZE: u64 = 1 << 16;
pub const DEFAULT_CACHE_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("range_lo must be at least 1")]
    ZeroStart,
    #[error("range_lo ({lo}) exceeds range_hi ({hi})")]
    EmptyRange { lo: u128, hi: u128 },
    #[error("step_budget must be at least 1")]
    ZeroStepBudget,
    #[error("chunk_size must be at least 1")]
    ZeroChunkSize,
    #[error("worker_count must be at least 1")]
    ZeroWorkers,
    #[error("assume_verified_below ({cutoff}) exceeds range_lo ({lo})")]
    CutoffAboveStart { cutoff: u128, lo: u128 },
    #[error("range splits into more than 2^64 chunks")]
    TooManyChunks,
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MergeError {
    #[error("ranges [{a_lo}, {a_hi}] and [{b_lo}, {b_hi}] overlap")]
    Overlap { a_lo: u128, a_hi: u128, b_lo: u128, b_hi: u128 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyConfig {
    pub range_lo: u128,
    pub range_hi: u128,
    pub step_budget: u64,
    /// Values strictly below this are treated as certified. 1 means no
    /// assumption.
    pub assume_verified_below: u128,
    pub chunk_size: u64,
    pub worker_count: usize,
    /// Size of the dense stopping-time cache; 0 disables it.
    pub cache_limit: usize,
}

impl VerifyConfig {
    pub fn new(range_lo: u128, range_hi: u128) -> Self {
        VerifyConfig {
            range_lo,
            range_hi,
            step_budget: DEFAULT_STEP_BUDGET,
            assume_verified_below: 1,
            chunk_size: DEFAULT_CHUNK_SIZE,
            worker_count: default_workers(),
            cache_limit: DEFAULT_CACHE_LIMIT,
        }
    }

    pub fn step_budget(mut self, budget: u64) -> Self {
        self.step_budget = budget;
        self
    }

    pub fn assume_verified_below(mut self, cutoff: u128) -> Self {
        self.assume_verified_below = cutoff;
        self
    }

    pub fn chunk_size(mut self, size: u64) -> Self {
        self.chunk_size = size;
        self
    }

    pub fn workers(mut self, count: usize) -> Self {
        self.worker_count = count;
        self
    }

    pub fn cache_limit(mut self, limit: usize) -> Self {
        self.cache_limit = limit;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.range_lo == 0 {
            return Err(ConfigError::ZeroStart);
        }
        if self.range_lo > self.range_hi {
            return Err(ConfigError::EmptyRange {
                lo: self.range_lo,
                hi: self.range_hi,
            });
        }
        if self.step_budget == 0 {
            return Err(ConfigError::ZeroStepBudget);
        }
        if self.chunk_size == 0 {
            return Err(ConfigError::ZeroChunkSize);
        }
        if self.worker_count == 0 {
            return Err(ConfigError::ZeroWorkers);
        }
        if self.assume_verified_below > self.range_lo {
            return Err(ConfigError::CutoffAboveStart {
                cutoff: self.assume_verified_below,
                lo: self.range_lo,
            });
        }
        if (self.range_hi - self.range_lo) / self.chunk_size as u128 >= u64::MAX as u128 {
            return Err(ConfigError::TooManyChunks);
        }
        Ok(())
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// A record statistic and the smallest start attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record<V> {
    pub value: V,
    pub argmax: u128,
}

impl<V: Ord> Record<V> {
    fn better(a: Option<Self>, b: Option<Self>) -> Option<Self> {
        match (a, b) {
            (None, r) | (r, None) => r,
            (Some(a), Some(b)) => {
                let a_wins = a.value > b.value || (a.value == b.value && a.argmax <= b.argmax);
                Some(if a_wins { a } else { b })
            }
        }
    }
}

/// Inclusive interval `[lo, hi]`, serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval(pub u128, pub u128);

impl Interval {
    pub fn len(&self) -> u128 {
        self.1 - self.0 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    /// Covered starts as sorted, coalesced intervals. Empty for the
    /// identity report.
    pub range: Vec<Interval>,
    pub verified_count: u128,
    pub unresolved: Vec<u128>,
    /// Loops found among unresolved starts, other than `(1, 4, 2, 1)`.
    pub cycles_found: Vec<ClosedLoop>,
    pub max_total_stopping_time: Option<Record<u64>>,
    pub max_excursion: Option<Record<Nat>>,
    /// Milliseconds.
    #[serde(with = "millis")]
    pub wall_time: Duration,
    /// Starts per second.
    pub throughput: f64,
}

mod millis {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64() * 1000.0)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let ms = f64::deserialize(d)?;
        Duration::try_from_secs_f64(ms / 1000.0).map_err(serde::de::Error::custom)
    }
}

impl VerifyReport {
    /// The identity element of [`merge_reports`].
    pub fn empty() -> Self {
        VerifyReport {
            range: Vec::new(),
            verified_count: 0,
            unresolved: Vec::new(),
            cycles_found: Vec::new(),
            max_total_stopping_time: None,
            max_excursion: None,
            wall_time: Duration::ZERO,
            throughput: 0.0,
        }
    }

    pub fn total_count(&self) -> u128 {
        self.range.iter().map(Interval::len).sum()
    }

    pub fn all_verified(&self) -> bool {
        self.unresolved.is_empty() && self.verified_count == self.total_count()
    }

    /// Drops the timing fields, which are the only nondeterministic part.
    pub fn without_timing(mut self) -> Self {
        self.wall_time = Duration::ZERO;
        self.throughput = 0.0;
        self
    }

    fn set_timing(&mut self, wall_time: Duration) {
        self.wall_time = wall_time;
        let secs = wall_time.as_secs_f64();
        self.throughput = if secs > 0.0 {
            self.total_count() as f64 / secs
        } else {
            0.0
        };
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// One row per statistic: `statistic,value,argmax`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut row = |name: &str, value: String, argmax: String| {
            w.write_record([name, value.as_str(), argmax.as_str()]).expect("in-memory write");
        };
        row("statistic", "value".into(), "argmax".into());
        for iv in &self.range {
            row("range_lo", iv.0.to_string(), String::new());
            row("range_hi", iv.1.to_string(), String::new());
        }
        row("verified_count", self.verified_count.to_string(), String::new());
        row("unresolved_count", self.unresolved.len().to_string(), String::new());
        row("cycles_found_count", self.cycles_found.len().to_string(), String::new());
        match &self.max_total_stopping_time {
            Some(r) => row("max_total_stopping_time", r.value.to_string(), r.argmax.to_string()),
            None => row("max_total_stopping_time", String::new(), String::new()),
        }
        match &self.max_excursion {
            Some(r) => row("max_excursion", r.value.to_string(), r.argmax.to_string()),
            None => row("max_excursion", String::new(), String::new()),
        }
        row("wall_time_ms", format!("{:.3}", self.wall_time.as_secs_f64() * 1000.0), String::new());
        row("throughput", format!("{:.1}", self.throughput), String::new());
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

fn coalesce(mut ranges: Vec<Interval>) -> Result<Vec<Interval>, MergeError> {
    ranges.sort_unstable();
    let mut out: Vec<Interval> = Vec::with_capacity(ranges.len());
    for iv in ranges {
        match out.last_mut() {
            Some(last) if iv.0 <= last.1 => {
                return Err(MergeError::Overlap {
                    a_lo: last.0,
                    a_hi: last.1,
                    b_lo: iv.0,
                    b_hi: iv.1,
                })
            }
            Some(last) if iv.0 == last.1 + 1 => last.1 = iv.1,
            _ => out.push(iv),
        }
    }
    Ok(out)
}

fn merge_sorted<T: Ord>(a: Vec<T>, b: Vec<T>) -> Vec<T> {
    let mut out = a;
    out.extend(b);
    out.sort_unstable();
    out.dedup();
    out
}

/// Combines reports over disjoint ranges. Timings add up.
pub fn merge_reports(a: VerifyReport, b: VerifyReport) -> Result<VerifyReport, MergeError> {
    let range = coalesce(a.range.into_iter().chain(b.range).collect())?;
    let mut out = VerifyReport {
        range,
        verified_count: a.verified_count + b.verified_count,
        unresolved: merge_sorted(a.unresolved, b.unresolved),
        cycles_found: merge_sorted(a.cycles_found, b.cycles_found),
        max_total_stopping_time: Record::better(a.max_total_stopping_time, b.max_total_stopping_time),
        max_excursion: Record::better(a.max_excursion, b.max_excursion),
        wall_time: Duration::ZERO,
        throughput: 0.0,
    };
    out.set_timing(a.wall_time + b.wall_time);
    Ok(out)
}

const UNKNOWN: u32 = u32::MAX;

/// Stopping times and peaks for every `n` below the limit. Entries that
/// could not be resolved within the step budget hold `UNKNOWN`.
struct DenseCache {
    times: Vec<u32>,
    peaks: Vec<u128>,
}

impl DenseCache {
    fn build(limit: usize, step_budget: u64) -> Self {
        let mut times = vec![UNKNOWN; limit];
        let mut peaks = vec![0u128; limit];
        if limit > 1 {
            times[1] = 0;
            peaks[1] = 1;
        }
        for n in 2..limit {
            let mut v = n as u128;
            let mut steps = 0u64;
            let mut peak = v;
            while steps < step_budget {
                v = match step_u128(v) {
                    Some(next) => next,
                    None => break,
                };
                steps += 1;
                peak = peak.max(v);
                if v < n as u128 && times[v as usize] != UNKNOWN {
                    let total = steps + times[v as usize] as u64;
                    if total < UNKNOWN as u64 {
                        times[n] = total as u32;
                        peaks[n] = peak.max(peaks[v as usize]);
                    }
                    break;
                }
            }
        }
        DenseCache { times, peaks }
    }

    #[inline]
    fn get(&self, v: u128) -> Option<(u64, u128)> {
        let i = usize::try_from(v).ok()?;
        match self.times.get(i) {
            Some(&t) if t != UNKNOWN => Some((t as u64, self.peaks[i])),
            _ => None,
        }
    }
}

#[inline]
fn step_u128(v: u128) -> Option<u128> {
    if v & 1 == 0 {
        Some(v >> 1)
    } else {
        v.checked_mul(3)?.checked_add(1)
    }
}

enum Resolution {
    Converged { time: u64, peak: Nat },
    Unresolved,
}

struct Sweep<'a> {
    cache: &'a DenseCache,
    cutoff: u128,
    step_budget: u64,
}

impl Sweep<'_> {
    fn resolve(&self, x: u128) -> Resolution {
        let mut v = x;
        let mut steps = 0u64;
        let mut peak = x;
        let mut certified = false;
        let mut tail_steps = 0u64;
        loop {
            if v == 1 {
                return Resolution::Converged {
                    time: steps,
                    peak: Nat::new(peak),
                };
            }
            if let Some((t, p)) = self.cache.get(v) {
                return Resolution::Converged {
                    time: steps + t,
                    peak: Nat::new(peak.max(p)),
                };
            }
            if !certified && v < self.cutoff {
                certified = true;
            }
            // Past the cutoff the budget restarts for the statistics tail; a
            // tail that still does not finish contradicts the assumption.
            let used = if certified { tail_steps } else { steps };
            if used >= self.step_budget {
                return Resolution::Unresolved;
            }
            match step_u128(v) {
                Some(next) => v = next,
                None => return self.resolve_wide(Nat::new(v), steps, tail_steps, Nat::new(peak), certified),
            }
            steps += 1;
            if certified {
                tail_steps += 1;
            }
            peak = peak.max(v);
        }
    }

    // Continuation once a value no longer fits in 128 bits.
    fn resolve_wide(&self, mut v: Nat, mut steps: u64, mut tail_steps: u64, mut peak: Nat, mut certified: bool) -> Resolution {
        let cutoff = Nat::new(self.cutoff);
        loop {
            if v.is_one() {
                return Resolution::Converged { time: steps, peak };
            }
            if let Some((t, p)) = v.to_u128().and_then(|small| self.cache.get(small)) {
                let p = Nat::new(p);
                return Resolution::Converged {
                    time: steps + t,
                    peak: peak.max(p),
                };
            }
            if !certified && v < cutoff {
                certified = true;
            }
            let used = if certified { tail_steps } else { steps };
            if used >= self.step_budget {
                return Resolution::Unresolved;
            }
            v = MapVariant::Standard.step(&v);
            steps += 1;
            if certified {
                tail_steps += 1;
            }
            if v > peak {
                peak = v.clone();
            }
        }
    }

    fn chunk(&self, lo: u128, hi: u128) -> VerifyReport {
        let mut report = VerifyReport::empty();
        report.range.push(Interval(lo, hi));
        let mut best_time: Option<Record<u64>> = None;
        let mut best_peak: Option<Record<Nat>> = None;
        for x in lo..=hi {
            match self.resolve(x) {
                Resolution::Converged { time, peak } => {
                    report.verified_count += 1;
                    if best_time.as_ref().is_none_or(|r| time > r.value) {
                        best_time = Some(Record { value: time, argmax: x });
                    }
                    if best_peak.as_ref().is_none_or(|r| peak > r.value) {
                        best_peak = Some(Record { value: peak, argmax: x });
                    }
                }
                Resolution::Unresolved => {
                    report.unresolved.push(x);
                    let start = Nat::new(x);
                    let budget = self.step_budget.saturating_mul(2);
                    if let Some(found) = find_cycle(&start, MapVariant::Standard, budget) {
                        if !found.is_trivial() && !report.cycles_found.contains(&found) {
                            report.cycles_found.push(found);
                        }
                    }
                }
            }
        }
        report.cycles_found.sort_unstable();
        report.max_total_stopping_time = best_time;
        report.max_excursion = best_peak;
        report
    }
}

/// Classifies every start in the configured range.
pub fn verify_range(config: &VerifyConfig) -> Result<VerifyReport, ConfigError> {
    config.validate()?;
    let started = Instant::now();

    let span = config.range_hi - config.range_lo;
    let cache_len = (config.cache_limit as u128).min(config.range_hi.saturating_add(1)) as usize;
    let cache = DenseCache::build(cache_len, config.step_budget);
    let sweep = Sweep {
        cache: &cache,
        cutoff: config.assume_verified_below,
        step_budget: config.step_budget,
    };

    let chunk = config.chunk_size as u128;
    let n_chunks = (span / chunk) as u64 + 1;
    let (lo, hi) = (config.range_lo, config.range_hi);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count)
        .build()
        .map_err(|e| ConfigError::Pool(e.to_string()))?;
    let mut report = pool.install(|| {
        (0..n_chunks)
            .into_par_iter()
            .map(|i| {
                let a = lo + i as u128 * chunk;
                let b = a.saturating_add(chunk - 1).min(hi);
                sweep.chunk(a, b)
            })
            .reduce(VerifyReport::empty, |a, b| {
                merge_reports(a, b).expect("chunks are disjoint")
            })
    });
    report.set_timing(started.elapsed());
    Ok(report)
}

/// Verifies `[lo, hi]` as consecutive stages of `stage_len` starts, each
/// stage assuming everything below its own start is certified by the stages
/// before it. The first stage uses the configured cutoff.
pub fn verify_staged(config: &VerifyConfig, stage_len: u128) -> Result<VerifyReport, ConfigError> {
    config.validate()?;
    let stage_len = stage_len.max(1);
    let mut report = VerifyReport::empty();
    let mut lo = config.range_lo;
    loop {
        let hi = lo.saturating_add(stage_len - 1).min(config.range_hi);
        let cutoff = if lo == config.range_lo {
            config.assume_verified_below
        } else {
            lo
        };
        let stage = VerifyConfig {
            range_lo: lo,
            range_hi: hi,
            assume_verified_below: cutoff,
            ..config.clone()
        };
        let part = verify_range(&stage)?;
        report = merge_reports(report, part).expect("stages are disjoint");
        if hi == config.range_hi {
            return Ok(report);
        }
        lo = hi + 1;
    }
}
