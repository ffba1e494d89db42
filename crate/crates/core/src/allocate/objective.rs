use serde::{Deserialize, Serialize};

use super::check::{accepted_requests, check_constraints};
use super::energy::{total_energy, EnergyBreakdown};
use crate::environment::World;
use crate::error::Result;
use crate::model::Allocation;

/// Default weight of energy against acceptance.
pub const DEFAULT_ALPHA: f64 = 0.001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveReport {
    pub accepted_count: usize,
    pub total_energy: f64,
    pub objective_value: f64,
    pub alpha: f64,
    pub energy: EnergyBreakdown,
    /// Number of constraint violations; the value is diagnostic when > 0.
    pub violations: usize,
}

impl ObjectiveReport {
    pub fn from_parts(accepted_count: usize, energy: EnergyBreakdown, alpha: f64, violations: usize) -> Self {
        let total_energy = energy.total();
        ObjectiveReport {
            accepted_count,
            total_energy,
            objective_value: accepted_count as f64 - alpha * total_energy,
            alpha,
            energy,
            violations,
        }
    }

    pub fn feasible(&self) -> bool {
        self.violations == 0
    }
}

/// Accepted requests minus `alpha` times total energy. Infeasible
/// allocations still receive a value, with the violation count attached.
pub fn objective(alloc: &Allocation, world: &World, alpha: f64) -> Result<ObjectiveReport> {
    let energy = total_energy(alloc, world)?;
    let violations = check_constraints(alloc, world)?.len();
    let accepted = accepted_requests(alloc, world).len();
    Ok(ObjectiveReport::from_parts(accepted, energy, alpha, violations))
}
