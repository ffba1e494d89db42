//! The joint objective, the constraint checker and exhaustive solvers.

mod brute;
mod certificate;
mod check;
mod energy;
mod objective;
mod oracle;

pub use brute::{brute_force_size, brute_force_solve, DEFAULT_BRUTE_BUDGET};
pub use certificate::Certificate;
pub use check::{
    accepted_requests, check_constraints, check_frame, exceeds, Constraint, ConstraintViolation,
    Entity, CAPACITY_SLACK,
};
pub use energy::{
    acceptance, frame_link_latencies, link_loads, movement_energy, request_latency, total_energy,
    validate_structure, EnergyBreakdown,
};
pub use objective::{objective, ObjectiveReport, DEFAULT_ALPHA};
pub use oracle::{oracle_solve, OracleLimits, OracleSolution};
