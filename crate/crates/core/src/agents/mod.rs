//! The decision agents: trajectory planning with attachment selection,
//! function placement with routing, and the information-gathering
//! predictor.

mod pl;
mod predictor;
mod tp;

pub use pl::{
    capacity_holds, cheapest, feasible_routes, function_demand, pl_mask, pl_reward, pl_route,
    pl_route_with, pl_state, place_functions, PlAgent, Placement, PlacementStep, RouteChoice,
    RouteDiagnostic, RouteRequest, ROUTING_PENALTY,
};
pub use predictor::{
    area_distribution_after, transition, LikelyRequest, PredictionReport, Predictor,
    PredictorMode, DEFAULT_DECAY,
};
pub use tp::{
    area_demand, select_poa, tp_encode, tp_reward, tp_state_len, TpAction, TpAgent, TpFrame,
    DEFAULT_HISTORY,
};
