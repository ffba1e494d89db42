//! Exogenous dynamics: UE mobility, request arrivals, weather, channel
//! quality, link latency and UAV flight energy.

mod arrivals;
mod channel;
mod energy;
mod latency;
mod mobility;
mod world;

pub use arrivals::{spawn_requests, ArrivalConfig};
pub use channel::{
    channel_gain, quality_from_snr, rayleigh_from_uniform, realize_channel, snr,
    ChannelRealization, WeatherState, SHADOWING_STD_DB, WEATHER_ATTENUATION_DB,
};
pub use energy::{
    cubed_speed_integral, flight_energy, relocation_energy, travel_time, uav_move_energy,
};
pub use latency::link_latency;
pub use mobility::{
    next_area_distribution, step_mobility, step_ue, MoveRecord, Turn, UeState,
    STRAIGHT_PROBABILITY, TURN_PROBABILITY,
};
pub use world::World;
