use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{AreaGrid, Heading};
use crate::rng::SimRng;

/// Probability of continuing straight at an intersection.
pub const STRAIGHT_PROBABILITY: f64 = 0.5;
/// Probability of each of the two turns.
pub const TURN_PROBABILITY: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UeState {
    pub ue: usize,
    pub area: usize,
    pub heading: Heading,
}

impl UeState {
    /// One-hot area occupancy.
    pub fn occupancy(&self, grid: &AreaGrid) -> Vec<u8> {
        let mut v = vec![0; grid.len()];
        v[self.area] = 1;
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Turn {
    Straight,
    Left,
    Right,
    /// Dead end: no forward move exists, the UE reverses.
    Reverse,
    /// Single-area grid: no move exists at all.
    Stay,
}

/// Outcome of one UE move, kept for diagnostics and statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoveRecord {
    pub turn: Turn,
    /// Whether straight, left and right were all possible.
    pub unconstrained: bool,
}

fn draw_turn(rng: &mut SimRng) -> Turn {
    let u: f64 = rng.random();
    if u < STRAIGHT_PROBABILITY {
        Turn::Straight
    } else if u < STRAIGHT_PROBABILITY + TURN_PROBABILITY {
        Turn::Left
    } else {
        Turn::Right
    }
}

fn apply(turn: Turn, heading: Heading) -> Heading {
    match turn {
        Turn::Straight | Turn::Stay => heading,
        Turn::Left => heading.left(),
        Turn::Right => heading.right(),
        Turn::Reverse => heading.reverse(),
    }
}

/// Moves one UE by one area. A draw that would leave the grid is
/// re-sampled until a feasible forward move is found; with no forward move
/// the UE turns back, and on a single-area grid it stays.
pub fn step_ue(ue: &mut UeState, grid: &AreaGrid, rng: &mut SimRng) -> MoveRecord {
    let forward = [Turn::Straight, Turn::Left, Turn::Right];
    let feasible: Vec<Turn> = forward
        .into_iter()
        .filter(|t| grid.step(ue.area, apply(*t, ue.heading)).is_some())
        .collect();
    let unconstrained = feasible.len() == 3;
    let turn = if feasible.is_empty() {
        if grid.step(ue.area, ue.heading.reverse()).is_some() {
            Turn::Reverse
        } else {
            Turn::Stay
        }
    } else {
        loop {
            let t = draw_turn(rng);
            if feasible.contains(&t) {
                break t;
            }
        }
    };
    let heading = apply(turn, ue.heading);
    if let Some(next) = grid.step(ue.area, heading) {
        ue.area = next;
        ue.heading = heading;
    }
    MoveRecord {
        turn,
        unconstrained,
    }
}

/// Advances every UE across one frame boundary.
pub fn step_mobility(ues: &mut [UeState], grid: &AreaGrid, rng: &mut SimRng) -> Vec<MoveRecord> {
    ues.iter_mut().map(|u| step_ue(u, grid, rng)).collect()
}

/// Next-area distribution of a UE under the mobility law, indexed by area.
pub fn next_area_distribution(ue: &UeState, grid: &AreaGrid) -> Vec<f64> {
    let mut dist = vec![0.0; grid.len()];
    let weights = [
        (Turn::Straight, STRAIGHT_PROBABILITY),
        (Turn::Left, TURN_PROBABILITY),
        (Turn::Right, TURN_PROBABILITY),
    ];
    let feasible: Vec<(usize, f64)> = weights
        .iter()
        .filter_map(|(t, w)| grid.step(ue.area, apply(*t, ue.heading)).map(|a| (a, *w)))
        .collect();
    if feasible.is_empty() {
        let a = grid.step(ue.area, ue.heading.reverse()).unwrap_or(ue.area);
        dist[a] = 1.0;
        return dist;
    }
    let total: f64 = feasible.iter().map(|(_, w)| w).sum();
    for (a, w) in feasible {
        dist[a] += w / total;
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn single_area_never_moves() {
        let grid = AreaGrid::new(1, 1, vec![0.5]).unwrap();
        let mut rng = stream_rng(1, 7);
        let mut ue = UeState {
            ue: 0,
            area: 0,
            heading: Heading::N,
        };
        for _ in 0..50 {
            let rec = step_ue(&mut ue, &grid, &mut rng);
            assert_eq!(rec.turn, Turn::Stay);
            assert_eq!(ue.area, 0);
        }
    }

    #[test]
    fn corridor_reverses() {
        let grid = AreaGrid::new(1, 3, vec![0.5; 3]).unwrap();
        let mut rng = stream_rng(1, 7);
        let mut ue = UeState {
            ue: 0,
            area: 2,
            heading: Heading::E,
        };
        let rec = step_ue(&mut ue, &grid, &mut rng);
        assert_eq!(rec.turn, Turn::Reverse);
        assert_eq!((ue.area, ue.heading), (1, Heading::W));
    }

    #[test]
    fn distribution_is_proper() {
        let grid = AreaGrid::new(4, 4, vec![0.5; 16]).unwrap();
        for area in 0..16 {
            for heading in Heading::ALL {
                let d = next_area_distribution(&UeState { ue: 0, area, heading }, &grid);
                assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        let mid = UeState {
            ue: 0,
            area: grid.area_at(2, 1),
            heading: Heading::N,
        };
        let d = next_area_distribution(&mid, &grid);
        assert_eq!(d[grid.area_at(1, 1)], 0.5);
        assert_eq!(d[grid.area_at(2, 0)], 0.25);
        assert_eq!(d[grid.area_at(2, 2)], 0.25);
    }
}
