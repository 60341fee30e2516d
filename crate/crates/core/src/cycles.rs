//! Closed loops: finite orbit segments that return to their first value.

use serde::{Deserialize, Serialize};

use crate::dynamics::{brent_search, cycle_entry, MapVariant, Search};
use crate::nat::Nat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoopError {
    #[error("a closed loop needs at least one value")]
    EmptySequence,
    #[error("a closed loop needs at least one step (got a single value)")]
    TooShort,
    #[error("element {index} is zero")]
    ZeroElement { index: usize },
    #[error("loop does not close: starts at {first}, ends at {last}")]
    EndpointMismatch { first: Nat, last: Nat },
    #[error("step {index}: map gives {expected}, sequence has {found}")]
    StepMismatch { index: usize, expected: Nat, found: Nat },
    #[error("loop power must be at least 1")]
    ZeroPower,
}

/// A sequence `a_0, ..., a_k` with `k >= 1`, `a_k = a_0` and each entry the
/// image of the previous one under `variant`.
///
/// Loops are always stored rotated so that the smallest element comes
/// first, which makes equality a plain sequence comparison. A fixed point
/// `x` is the two-element loop `(x, x)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawLoop")]
pub struct ClosedLoop {
    values: Vec<Nat>,
    variant: MapVariant,
}

#[derive(Deserialize)]
struct RawLoop {
    values: Vec<Nat>,
    #[serde(default)]
    variant: MapVariant,
}

impl TryFrom<RawLoop> for ClosedLoop {
    type Error = LoopError;

    fn try_from(raw: RawLoop) -> Result<Self, Self::Error> {
        validate_loop(&raw.values, raw.variant)
    }
}

impl ClosedLoop {
    pub fn values(&self) -> &[Nat] {
        &self.values
    }

    pub fn variant(&self) -> MapVariant {
        self.variant
    }

    /// Number of map applications, `k`.
    pub fn period(&self) -> usize {
        self.values.len() - 1
    }

    pub fn min_element(&self) -> &Nat {
        &self.values[0]
    }

    pub fn is_fixed_point(&self) -> bool {
        self.period() == 1
    }

    pub fn contains(&self, x: &Nat) -> bool {
        self.values.contains(x)
    }

    /// The `(1, 4, 2, 1)` loop of the standard map.
    pub fn trivial() -> Self {
        ClosedLoop {
            values: [1u128, 4, 2, 1].into_iter().map(Nat::new).collect(),
            variant: MapVariant::Standard,
        }
    }

    pub fn is_trivial(&self) -> bool {
        *self == Self::trivial()
    }

    /// Builds the loop of `length` steps through `entry`, which must lie on
    /// a cycle of exactly that length.
    pub(crate) fn from_orbit(entry: &Nat, length: u64, variant: MapVariant) -> Self {
        let mut body = Vec::with_capacity(length as usize);
        let mut v = entry.clone();
        for _ in 0..length {
            body.push(v.clone());
            v = variant.step(&v);
        }
        debug_assert_eq!(&v, entry);
        ClosedLoop {
            values: canonical_rotation(&body),
            variant,
        }
    }
}

// `body` is one period without the closing repeat.
fn canonical_rotation(body: &[Nat]) -> Vec<Nat> {
    let start = body
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut out: Vec<Nat> = body[start..].iter().chain(&body[..start]).cloned().collect();
    out.push(out[0].clone());
    out
}

/// Checks `candidate` against the closed-loop rules and returns it in
/// canonical rotation.
pub fn validate_loop(candidate: &[Nat], variant: MapVariant) -> Result<ClosedLoop, LoopError> {
    let (first, last) = match (candidate.first(), candidate.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(LoopError::EmptySequence),
    };
    if let Some(index) = candidate.iter().position(Nat::is_zero) {
        return Err(LoopError::ZeroElement { index });
    }
    if candidate.len() == 1 {
        return Err(LoopError::TooShort);
    }
    if first != last {
        return Err(LoopError::EndpointMismatch {
            first: first.clone(),
            last: last.clone(),
        });
    }
    for (i, pair) in candidate.windows(2).enumerate() {
        let expected = variant.step(&pair[0]);
        if expected != pair[1] {
            return Err(LoopError::StepMismatch {
                index: i + 1,
                expected,
                found: pair[1].clone(),
            });
        }
    }
    Ok(ClosedLoop {
        values: canonical_rotation(&candidate[..candidate.len() - 1]),
        variant,
    })
}

/// `a^m`: the loop followed by `m - 1` further copies of its period.
pub fn loop_power(cycle: &ClosedLoop, m: usize) -> Result<ClosedLoop, LoopError> {
    if m == 0 {
        return Err(LoopError::ZeroPower);
    }
    let period = &cycle.values[1..];
    let mut values = Vec::with_capacity(m * period.len() + 1);
    values.push(cycle.values[0].clone());
    for _ in 0..m {
        values.extend_from_slice(period);
    }
    Ok(ClosedLoop {
        values,
        variant: cycle.variant,
    })
}

/// The canonical loop eventually entered by the orbit of `start`, if the
/// orbit closes within `step_budget` map applications. Does not stop at 1.
pub fn find_cycle(start: &Nat, variant: MapVariant, step_budget: u64) -> Option<ClosedLoop> {
    if start.is_zero() {
        return None;
    }
    match brent_search(start, variant, step_budget, false, |_| true) {
        Search::Cycle { length } => {
            let (_, entry) = cycle_entry(start, variant, length);
            Some(ClosedLoop::from_orbit(&entry, length, variant))
        }
        Search::Exhausted { .. } | Search::One { .. } => None,
    }
}
