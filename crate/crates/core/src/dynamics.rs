//! The Collatz map, its fixed-point variant, iteration, preimages and
//! bounded trajectory classification.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cycles::ClosedLoop;
use crate::nat::Nat;

/// The trajectory state space is the positive integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("zero is outside the domain of the Collatz map")]
    Zero,
}

fn check_domain(x: &Nat) -> Result<(), DomainError> {
    if x.is_zero() {
        Err(DomainError::Zero)
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MapVariant {
    /// `x/2` on even inputs, `3x+1` on odd inputs.
    #[default]
    Standard,
    /// Same as `Standard` except that 1 is a fixed point.
    Star,
}

impl MapVariant {
    /// Applies one step of the map. `x` must be positive.
    #[inline]
    pub fn step(self, x: &Nat) -> Nat {
        debug_assert!(!x.is_zero());
        if x.is_even() {
            x.halve()
        } else if self == MapVariant::Star && x.is_one() {
            Nat::ONE
        } else {
            x.triple_plus_one()
        }
    }
}

impl fmt::Display for MapVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MapVariant::Standard => "standard",
            MapVariant::Star => "star",
        })
    }
}

impl FromStr for MapVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(MapVariant::Standard),
            "star" => Ok(MapVariant::Star),
            other => Err(format!("unknown map variant {other:?}")),
        }
    }
}

pub fn col(x: &Nat) -> Result<Nat, DomainError> {
    check_domain(x)?;
    Ok(MapVariant::Standard.step(x))
}

pub fn col_star(x: &Nat) -> Result<Nat, DomainError> {
    check_domain(x)?;
    Ok(MapVariant::Star.step(x))
}

/// The `k`-fold composition of the map applied to `x`.
pub fn iterate_k(x: &Nat, k: u64, variant: MapVariant) -> Result<Nat, DomainError> {
    check_domain(x)?;
    let mut value = x.clone();
    for _ in 0..k {
        value = variant.step(&value);
    }
    Ok(value)
}

/// Least `k` with `Col^k(x) = 1`, or `None` if it exceeds `budget`.
pub fn total_stopping_time(x: &Nat, budget: u64) -> Result<Option<u64>, DomainError> {
    check_domain(x)?;
    let mut value = x.clone();
    let mut steps = 0;
    while !value.is_one() {
        if steps == budget {
            return Ok(None);
        }
        value = MapVariant::Standard.step(&value);
        steps += 1;
    }
    Ok(Some(steps))
}

/// All `y` with `Col(y) = x`, ascending. Always contains `2x`; contains
/// `(x-1)/3` exactly when `x ≡ 4 (mod 6)`.
pub fn preimage(x: &Nat) -> Result<Vec<Nat>, DomainError> {
    check_domain(x)?;
    let mut out = vec![x.double()];
    if x.rem_u64(6) == 4 {
        out.insert(0, x.minus_one_div_three());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrajectoryOutcome {
    ReachesOne {
        steps: u64,
    },
    EntersCycle {
        #[serde(rename = "loop")]
        cycle: ClosedLoop,
        tail_length: u64,
    },
    Unresolved {
        steps_taken: u64,
        max_value_seen: Nat,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub start: Nat,
    /// The orbit, present only when requested. For cycles it stops at the
    /// first repeated value.
    pub values: Option<Vec<Nat>>,
    pub outcome: TrajectoryOutcome,
    pub max_excursion: Nat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifyOptions {
    pub variant: MapVariant,
    pub step_budget: u64,
    pub value_bound: Option<Nat>,
    pub keep_values: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            variant: MapVariant::Standard,
            step_budget: 100_000,
            value_bound: None,
            keep_values: false,
        }
    }
}

impl ClassifyOptions {
    pub fn new(variant: MapVariant, step_budget: u64) -> Self {
        ClassifyOptions {
            variant,
            step_budget,
            ..Default::default()
        }
    }

    pub fn with_value_bound(mut self, bound: Nat) -> Self {
        self.value_bound = Some(bound);
        self
    }

    pub fn keep_values(mut self, keep: bool) -> Self {
        self.keep_values = keep;
        self
    }
}

/// Outcome of Brent's search on a single orbit.
pub(crate) enum Search {
    /// The orbit hit 1 (only reported when the start is not 1).
    One { steps: u64 },
    Cycle { length: u64 },
    Exhausted { steps: u64 },
}

/// Walks the orbit of `start` with Brent's cycle finder, calling `visit` on
/// every new value. Stops early at 1 when `stop_at_one` is set, or when
/// `visit` returns `false`.
pub(crate) fn brent_search(
    start: &Nat,
    variant: MapVariant,
    step_budget: u64,
    stop_at_one: bool,
    mut visit: impl FnMut(&Nat) -> bool,
) -> Search {
    let mut power = 1u64;
    let mut length = 1u64;
    let mut tortoise = start.clone();
    let mut hare = start.clone();
    let mut steps = 0u64;
    loop {
        if steps == step_budget {
            return Search::Exhausted { steps };
        }
        hare = variant.step(&hare);
        steps += 1;
        if !visit(&hare) {
            return Search::Exhausted { steps };
        }
        if stop_at_one && hare.is_one() {
            return Search::One { steps };
        }
        if tortoise == hare {
            return Search::Cycle { length };
        }
        if power == length {
            tortoise = hare.clone();
            power *= 2;
            length = 0;
        }
        length += 1;
    }
}

/// Given a cycle length, returns the tail length and the first value on
/// the cycle.
pub(crate) fn cycle_entry(start: &Nat, variant: MapVariant, length: u64) -> (u64, Nat) {
    let mut tortoise = start.clone();
    let mut hare = start.clone();
    for _ in 0..length {
        hare = variant.step(&hare);
    }
    let mut tail = 0;
    while tortoise != hare {
        tortoise = variant.step(&tortoise);
        hare = variant.step(&hare);
        tail += 1;
    }
    (tail, tortoise)
}

/// Iterates `x` until it reaches 1, revisits a value, or runs out of
/// budget (steps or magnitude).
///
/// A start of 1 is treated as a return to the start rather than as
/// convergence, so `1` classifies as the `(1,4,2,1)` loop under `Standard`
/// and the `(1,1)` fixed point under `Star`.
pub fn classify_trajectory(x: &Nat, opts: &ClassifyOptions) -> Result<TrajectoryRecord, DomainError> {
    check_domain(x)?;
    let mut values = opts.keep_values.then(|| vec![x.clone()]);
    let mut max = x.clone();
    let mut bound_hit = false;
    let search = brent_search(x, opts.variant, opts.step_budget, !x.is_one(), |v| {
        if *v > max {
            max = v.clone();
        }
        if let Some(values) = values.as_mut() {
            values.push(v.clone());
        }
        match &opts.value_bound {
            Some(bound) if v > bound => {
                bound_hit = true;
                false
            }
            _ => true,
        }
    });

    let outcome = match search {
        Search::One { steps } => TrajectoryOutcome::ReachesOne { steps },
        Search::Exhausted { steps } => {
            debug_assert!(bound_hit || steps == opts.step_budget);
            TrajectoryOutcome::Unresolved {
                steps_taken: steps,
                max_value_seen: max.clone(),
            }
        }
        Search::Cycle { length } => {
            let (tail, entry) = cycle_entry(x, opts.variant, length);
            if let Some(values) = values.as_mut() {
                values.truncate((tail + length + 1) as usize);
            }
            TrajectoryOutcome::EntersCycle {
                cycle: ClosedLoop::from_orbit(&entry, length, opts.variant),
                tail_length: tail,
            }
        }
    };

    Ok(TrajectoryRecord {
        start: x.clone(),
        values,
        outcome,
        max_excursion: max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(v: u128) -> Nat {
        Nat::new(v)
    }

    // Plain u128 iteration, independent of `Nat` and `MapVariant`.
    fn oracle_orbit(mut x: u128, star: bool, limit: usize) -> Vec<u128> {
        let mut out = vec![x];
        for _ in 0..limit {
            x = if x % 2 == 0 {
                x / 2
            } else if star && x == 1 {
                1
            } else {
                3 * x + 1
            };
            out.push(x);
        }
        out
    }

    #[test]
    fn col_examples() {
        assert_eq!(col(&n(1)).unwrap(), n(4));
        assert_eq!(col(&n(10)).unwrap(), n(5));
        assert_eq!(col(&n(7)).unwrap(), n(22));
        assert_eq!(col(&n(0)), Err(DomainError::Zero));
    }

    #[test]
    fn col_star_examples() {
        assert_eq!(col_star(&n(1)).unwrap(), n(1));
        assert_eq!(col_star(&n(2)).unwrap(), n(1));
        assert_eq!(col_star(&n(5)).unwrap(), n(16));
        assert_eq!(col_star(&n(0)), Err(DomainError::Zero));
    }

    #[test]
    fn iterate_k_examples() {
        assert_eq!(iterate_k(&n(1), 3, MapVariant::Standard).unwrap(), n(1));
        assert_eq!(iterate_k(&n(77), 0, MapVariant::Star).unwrap(), n(77));
        let orbit = oracle_orbit(3, false, 2);
        assert_eq!(orbit, vec![3, 10, 5]);
        assert_eq!(iterate_k(&n(3), 2, MapVariant::Standard).unwrap(), n(orbit[2]));
        assert!(iterate_k(&n(0), 1, MapVariant::Standard).is_err());
    }

    #[test]
    fn total_stopping_time_examples() {
        assert_eq!(total_stopping_time(&n(1), 10).unwrap(), Some(0));
        let orbit = oracle_orbit(6, false, 8);
        assert_eq!(orbit, vec![6, 3, 10, 5, 16, 8, 4, 2, 1]);
        assert_eq!(total_stopping_time(&n(6), 100).unwrap(), Some(8));

        let orbit27 = oracle_orbit(27, false, 200);
        let k = orbit27.iter().position(|&v| v == 1).unwrap();
        let peak = *orbit27[..=k].iter().max().unwrap();
        assert_eq!((k, peak), (111, 9232));
        assert_eq!(total_stopping_time(&n(27), 1000).unwrap(), Some(111));
        assert_eq!(total_stopping_time(&n(27), 110).unwrap(), None);
        assert_eq!(total_stopping_time(&n(27), 111).unwrap(), Some(111));
    }

    #[test]
    fn preimage_examples() {
        assert_eq!(preimage(&n(4)).unwrap(), vec![n(1), n(8)]);
        assert_eq!(preimage(&n(5)).unwrap(), vec![n(10)]);
        let scan: Vec<u128> = (1..=100u128)
            .filter(|&y| oracle_orbit(y, false, 1)[1] == 16)
            .collect();
        assert_eq!(scan, vec![5, 32]);
        assert_eq!(preimage(&n(16)).unwrap(), vec![n(5), n(32)]);
        assert!(preimage(&n(0)).is_err());
    }

    #[test]
    fn preimage_exhaustive_small() {
        for x in 1..=300u128 {
            let pre = preimage(&n(x)).unwrap();
            for y in 1..=700u128 {
                let hit = oracle_orbit(y, false, 1)[1] == x;
                assert_eq!(pre.contains(&n(y)), hit, "x={x} y={y}");
            }
        }
    }

    #[test]
    fn classify_one_standard_is_the_trivial_loop() {
        let rec = classify_trajectory(&n(1), &ClassifyOptions::new(MapVariant::Standard, 100)).unwrap();
        match rec.outcome {
            TrajectoryOutcome::EntersCycle { cycle, tail_length } => {
                assert_eq!(cycle.values(), &[n(1), n(4), n(2), n(1)]);
                assert_eq!(tail_length, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(rec.max_excursion, n(4));
    }

    #[test]
    fn classify_one_star_is_a_fixed_point() {
        let opts = ClassifyOptions::new(MapVariant::Star, 100).keep_values(true);
        let rec = classify_trajectory(&n(1), &opts).unwrap();
        match &rec.outcome {
            TrajectoryOutcome::EntersCycle { cycle, tail_length } => {
                assert_eq!(cycle.values(), &[n(1), n(1)]);
                assert!(cycle.is_fixed_point());
                assert_eq!(*tail_length, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(rec.values.unwrap(), vec![n(1), n(1)]);
    }

    #[test]
    fn classify_budget_exhaustion() {
        let rec = classify_trajectory(&n(27), &ClassifyOptions::new(MapVariant::Standard, 50)).unwrap();
        match rec.outcome {
            TrajectoryOutcome::Unresolved { steps_taken, max_value_seen } => {
                assert_eq!(steps_taken, 50);
                let peak = *oracle_orbit(27, false, 50).iter().max().unwrap();
                assert_eq!(max_value_seen, n(peak));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn classify_value_bound() {
        let opts = ClassifyOptions::new(MapVariant::Standard, 1000).with_value_bound(n(1000));
        let rec = classify_trajectory(&n(27), &opts).unwrap();
        assert!(matches!(rec.outcome, TrajectoryOutcome::Unresolved { .. }));
        // 27 -> 82 -> 41 -> 124 -> ... first exceeds 1000 at 1186.
        let orbit = oracle_orbit(27, false, 200);
        let first = orbit.iter().position(|&v| v > 1000).unwrap();
        assert_eq!(
            rec.outcome,
            TrajectoryOutcome::Unresolved {
                steps_taken: first as u64,
                max_value_seen: n(orbit[first])
            }
        );
    }

    #[test]
    fn classify_27_records_excursion() {
        let opts = ClassifyOptions::new(MapVariant::Standard, 1000).keep_values(true);
        let rec = classify_trajectory(&n(27), &opts).unwrap();
        assert_eq!(rec.outcome, TrajectoryOutcome::ReachesOne { steps: 111 });
        assert_eq!(rec.max_excursion, n(9232));
        let values = rec.values.unwrap();
        let expected: Vec<Nat> = oracle_orbit(27, false, 111).into_iter().map(n).collect();
        assert_eq!(values, expected);
    }

    #[test]
    fn reaches_one_at_exact_budget() {
        let rec = classify_trajectory(&n(6), &ClassifyOptions::new(MapVariant::Standard, 8)).unwrap();
        assert_eq!(rec.outcome, TrajectoryOutcome::ReachesOne { steps: 8 });
    }

    #[test]
    fn classify_rejects_zero() {
        assert!(classify_trajectory(&n(0), &ClassifyOptions::default()).is_err());
    }

    #[test]
    fn escalation_past_128_bits() {
        // 2^128 - 1 is odd; 3x+1 overflows the fast path.
        let x = n(u128::MAX);
        let y = col(&x).unwrap();
        assert!(y.is_unbounded());
        let rec = classify_trajectory(&x, &ClassifyOptions::default()).unwrap();
        let forced = classify_trajectory(&x.clone().unbounded(), &ClassifyOptions::default()).unwrap();
        assert_eq!(rec, forced);
        assert!(matches!(rec.outcome, TrajectoryOutcome::ReachesOne { .. }));
    }

    proptest! {
        #[test]
        fn even_and_odd_branches(x in 1u128..1_000_000_000_000) {
            prop_assert_eq!(col(&n(2 * x)).unwrap(), n(x));
            prop_assert_eq!(col(&n(2 * x + 1)).unwrap(), n(6 * x + 4));
            prop_assert_eq!(col(&n(2 * x + 1)).unwrap().rem_u64(6), 4);
        }

        #[test]
        fn variants_agree_off_one(x in 2u128..1_000_000_000_000) {
            prop_assert_eq!(col(&n(x)).unwrap(), col_star(&n(x)).unwrap());
        }

        #[test]
        fn iterate_composes(x in 1u128..1_000_000, a in 0u64..=100, b in 0u64..=100, star: bool) {
            let v = if star { MapVariant::Star } else { MapVariant::Standard };
            let whole = iterate_k(&n(x), a + b, v).unwrap();
            let split = iterate_k(&iterate_k(&n(x), a, v).unwrap(), b, v).unwrap();
            prop_assert_eq!(whole, split);
        }

        #[test]
        fn unbounded_matches_fast_path(x in 1u128..=1_000_000) {
            let opts = ClassifyOptions::default().keep_values(true);
            let fast = classify_trajectory(&n(x), &opts).unwrap();
            let slow = classify_trajectory(&n(x).unbounded(), &opts).unwrap();
            prop_assert!(slow.values.as_ref().unwrap().iter().all(Nat::is_unbounded));
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn classification_matches_stopping_time(x in 2u128..100_000) {
            let rec = classify_trajectory(&n(x), &ClassifyOptions::default()).unwrap();
            let k = total_stopping_time(&n(x), 100_000).unwrap().unwrap();
            prop_assert_eq!(rec.outcome, TrajectoryOutcome::ReachesOne { steps: k });
        }
    }
}
