use crate::error::{Error, Result};
use crate::model::{AreaGrid, NodeSpec, UavParams, VelocityProfile};

fn params_of(node: &NodeSpec) -> Result<&UavParams> {
    node.uav_params
        .as_ref()
        .filter(|_| node.is_uav())
        .ok_or_else(|| Error::Argument(format!("node {} is not a UAV", node.id)))
}

/// `∫₀^Δ v(t)³ dt` for the given profile, evaluated exactly.
pub fn cubed_speed_integral(profile: &VelocityProfile, duration: f64) -> f64 {
    match profile {
        VelocityProfile::Constant(v) => v * v * v * duration,
        VelocityProfile::PiecewiseLinear(points) => {
            if points.is_empty() {
                return 0.0;
            }
            // Breakpoints clipped to [0, duration]; v is linear between them.
            let mut knots = vec![0.0];
            knots.extend(
                points
                    .iter()
                    .map(|p| p.0)
                    .filter(|t| *t > 0.0 && *t < duration),
            );
            knots.push(duration);
            knots
                .windows(2)
                .map(|w| {
                    let (a, b) = (profile.speed_at(w[0]), profile.speed_at(w[1]));
                    (w[1] - w[0]) * (a * a * a + a * a * b + a * b * b + b * b * b) / 4.0
                })
                .sum()
        }
    }
}

/// Hovering plus drag energy of a flight lasting `duration` seconds.
pub fn flight_energy(params: &UavParams, duration: f64) -> f64 {
    params.hover_power() * duration
        + params.drag_coefficient_term() * cubed_speed_integral(&params.velocity_profile, duration)
}

/// Energy (J) spent by `node` relocating from `a1` to `a2` over
/// `travel_time` seconds. Staying in place costs nothing.
pub fn uav_move_energy(node: &NodeSpec, a1: usize, a2: usize, travel_time: f64) -> Result<f64> {
    let params = params_of(node)?;
    if !(travel_time >= 0.0) {
        return Err(Error::Argument(format!(
            "travel time {travel_time} must be non-negative"
        )));
    }
    if a1 == a2 {
        return Ok(0.0);
    }
    Ok(flight_energy(params, travel_time))
}

/// Manhattan distance between area centers divided by the cruise speed.
pub fn travel_time(node: &NodeSpec, grid: &AreaGrid, a1: usize, a2: usize) -> Result<f64> {
    let params = params_of(node)?;
    let v = params.velocity_profile.cruise_speed();
    if !(v > 0.0) {
        return Err(Error::Argument(format!("UAV {} has no positive speed", node.id)));
    }
    Ok(grid.manhattan_m(a1, a2) / v)
}

/// Energy of moving `node` between two areas of `grid`.
pub fn relocation_energy(node: &NodeSpec, grid: &AreaGrid, a1: usize, a2: usize) -> Result<f64> {
    let dt = travel_time(node, grid, a1, a2)?;
    uav_move_energy(node, a1, a2, dt)
}
