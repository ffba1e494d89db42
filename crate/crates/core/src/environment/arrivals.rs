use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Request, RequestRanges, ServiceSpec};
use crate::rng::SimRng;

use super::mobility::UeState;

/// Request arrival process: Poisson count per frame, uniform UE and service.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrivalConfig {
    /// Mean requests per frame.
    pub rate: f64,
    #[serde(default)]
    pub ranges: RequestRanges,
}

impl Default for ArrivalConfig {
    fn default() -> Self {
        ArrivalConfig {
            rate: 2.0,
            ranges: RequestRanges::default(),
        }
    }
}

/// Draws the requests entering at `frame`, numbered from `next_id`.
pub fn spawn_requests(
    frame: usize,
    ues: &[UeState],
    catalog: &[ServiceSpec],
    config: &ArrivalConfig,
    slots_per_frame: usize,
    next_id: usize,
    rng: &mut SimRng,
) -> Result<Vec<Request>> {
    if !(config.rate >= 0.0) || !config.rate.is_finite() {
        return Err(Error::Argument(format!("arrival rate {} must be >= 0", config.rate)));
    }
    if config.rate == 0.0 || ues.is_empty() || catalog.is_empty() {
        return Ok(Vec::new());
    }
    let poisson = Poisson::new(config.rate).map_err(|e| Error::Argument(e.to_string()))?;
    let count = poisson.sample(rng) as usize;
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let ue = ues[rng.random_range(0..ues.len())].ue;
        let service = &catalog[rng.random_range(0..catalog.len())];
        out.push(
            config
                .ranges
                .sample(rng, next_id + k, ue, service, frame, slots_per_frame),
        );
    }
    Ok(out)
}
