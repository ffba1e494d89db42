use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Side length of one square area, in meters.
pub const CELL_SIZE_M: f64 = 2000.0;

/// Travel direction of a vehicle on the Manhattan grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Heading {
    N,
    S,
    E,
    W,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::N, Heading::S, Heading::E, Heading::W];

    pub fn left(self) -> Heading {
        match self {
            Heading::N => Heading::W,
            Heading::W => Heading::S,
            Heading::S => Heading::E,
            Heading::E => Heading::N,
        }
    }

    pub fn right(self) -> Heading {
        match self {
            Heading::N => Heading::E,
            Heading::E => Heading::S,
            Heading::S => Heading::W,
            Heading::W => Heading::N,
        }
    }

    pub fn reverse(self) -> Heading {
        self.left().left()
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Rectangular grid of areas, numbered row-major from the north-west corner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaGrid {
    pub rows: usize,
    pub cols: usize,
    /// Probability of a line-of-sight link in each area.
    pub los_probability: Vec<f64>,
}

impl AreaGrid {
    pub fn new(rows: usize, cols: usize, los_probability: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("grid {rows}x{cols} has no areas")));
        }
        if los_probability.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "grid {rows}x{cols} needs {} LoS probabilities, got {}",
                rows * cols,
                los_probability.len()
            )));
        }
        if let Some(p) = los_probability.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Argument(format!("LoS probability {p} outside [0, 1]")));
        }
        Ok(AreaGrid {
            rows,
            cols,
            los_probability,
        })
    }

    /// Builds a grid whose LoS probabilities are drawn uniformly from
    /// `los_range` with a generator seeded by `rng_seed`.
    pub fn build(rows: usize, cols: usize, los_range: (f64, f64), rng_seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("grid {rows}x{cols} has no areas")));
        }
        let (lo, hi) = los_range;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::Argument(format!(
                "LoS range [{lo}, {hi}] is not a sub-interval of [0, 1]"
            )));
        }
        let mut rng = stream_rng(rng_seed, crate::rng::Stream::Grid as u64);
        let los = (0..rows * cols)
            .map(|_| if lo == hi { lo } else { rng.random_range(lo..=hi) })
            .collect();
        AreaGrid::new(rows, cols, los)
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn area_ids(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    pub fn contains(&self, area: usize) -> bool {
        area < self.len()
    }

    pub fn coords(&self, area: usize) -> (usize, usize) {
        (area / self.cols, area % self.cols)
    }

    pub fn area_at(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Neighbor reached by moving one cell towards `heading`, if inside the grid.
    pub fn step(&self, area: usize, heading: Heading) -> Option<usize> {
        let (r, c) = self.coords(area);
        match heading {
            Heading::N if r > 0 => Some(self.area_at(r - 1, c)),
            Heading::S if r + 1 < self.rows => Some(self.area_at(r + 1, c)),
            Heading::E if c + 1 < self.cols => Some(self.area_at(r, c + 1)),
            Heading::W if c > 0 => Some(self.area_at(r, c - 1)),
            _ => None,
        }
    }

    /// Four-neighborhood of an area, in N, S, E, W order.
    pub fn adjacency(&self, area: usize) -> Vec<usize> {
        Heading::ALL
            .iter()
            .filter_map(|h| self.step(area, *h))
            .collect()
    }

    pub fn center_m(&self, area: usize) -> (f64, f64) {
        let (r, c) = self.coords(area);
        (
            (c as f64 + 0.5) * CELL_SIZE_M,
            (r as f64 + 0.5) * CELL_SIZE_M,
        )
    }

    pub fn euclidean_m(&self, a1: usize, a2: usize) -> f64 {
        let (x1, y1) = self.center_m(a1);
        let (x2, y2) = self.center_m(a2);
        (x1 - x2).hypot(y1 - y2)
    }

    pub fn manhattan_m(&self, a1: usize, a2: usize) -> f64 {
        let (r1, c1) = self.coords(a1);
        let (r2, c2) = self.coords(a2);
        (r1.abs_diff(r2) + c1.abs_diff(c2)) as f64 * CELL_SIZE_M
    }
}
