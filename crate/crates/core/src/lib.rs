//! Collatz dynamics, closed loops, residue-class transition graphs and a
//! parallel range verifier.
//!
//! ```
//! use collatz_core::{dynamics, nat::Nat, residue};
//!
//! assert_eq!(dynamics::total_stopping_time(&Nat::new(27), 1000).unwrap(), Some(111));
//! assert_eq!(residue::build_graph(10).unwrap().edges().len(), 15);
//! ```

pub mod cli;
pub mod cycles;
pub mod dynamics;
pub mod nat;
pub mod residue;
pub mod verifier;

pub use cycles::{find_cycle, loop_power, validate_loop, ClosedLoop, LoopError};
pub use dynamics::{
    classify_trajectory, col, col_star, iterate_k, preimage, total_stopping_time, ClassifyOptions, DomainError,
    MapVariant, TrajectoryOutcome, TrajectoryRecord,
};
pub use nat::Nat;
pub use residue::{build_graph, class_of, transition_targets, BranchLabel, ResidueClass, ResidueError, TransitionGraph};
pub use verifier::{merge_reports, verify_range, verify_staged, VerifyConfig, VerifyReport};
