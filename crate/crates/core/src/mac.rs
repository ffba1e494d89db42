//! Channel-quality beliefs, deadline-priority resource-block scheduling and
//! the MAC reward.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::environment::World;
use crate::error::{Error, Result};
use crate::model::Request;
use crate::rng::SimRng;

/// Default observation weight of the belief update.
pub const DEFAULT_LAMBDA: f64 = 0.3;

/// Prior assigned to every `(channel, area)` before any observation.
pub const INITIAL_BELIEF: f64 = 0.5;

/// One slot-averaged quality observation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub channel: usize,
    pub area: usize,
    pub value: f64,
}

/// Exponentially weighted estimate of each channel's quality per area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelBeliefTable {
    channels: usize,
    areas: usize,
    lambda: f64,
    belief: Vec<f64>,
}

impl ChannelBeliefTable {
    pub fn new(channels: usize, areas: usize, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Argument(format!("lambda {lambda} outside [0, 1]")));
        }
        Ok(ChannelBeliefTable {
            channels,
            areas,
            lambda,
            belief: vec![INITIAL_BELIEF; channels * areas],
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn areas(&self) -> usize {
        self.areas
    }

    pub fn get(&self, channel: usize, area: usize) -> f64 {
        self.belief[channel * self.areas + area]
    }

    /// Blends each observation into its entry; unobserved entries keep
    /// their value. Nothing is updated if any observation is invalid.
    pub fn observe_and_update(&mut self, observations: &[Observation]) -> Result<()> {
        for o in observations {
            if !(0.0..=1.0).contains(&o.value) {
                return Err(Error::Argument(format!("observation {} outside [0, 1]", o.value)));
            }
            if o.channel >= self.channels || o.area >= self.areas {
                return Err(Error::Argument(format!(
                    "observation for channel {} area {} outside the table",
                    o.channel, o.area
                )));
            }
        }
        for o in observations {
            let i = o.channel * self.areas + o.area;
            self.belief[i] = self.lambda * o.value + (1.0 - self.lambda) * self.belief[i];
        }
        Ok(())
    }

    /// Beliefs flattened as `[channel][area]`.
    pub fn as_slice(&self) -> &[f64] {
        &self.belief
    }
}

/// Slot-averaged observations of every channel in each of `areas` at
/// `frame`.
pub fn observations_at(world: &World, frame: usize, areas: &BTreeSet<usize>) -> Vec<Observation> {
    let mut out = Vec::new();
    for &area in areas {
        for channel in 0..world.instance.channels.len() {
            out.push(Observation {
                channel,
                area,
                value: world.observation(frame, channel, area),
            });
        }
    }
    out
}

/// A request's urgency in one frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Priority {
    pub request: usize,
    /// Frames left until the deadline; smaller is more urgent.
    pub remaining_frames: usize,
    pub required_slots: usize,
}

/// Requests ordered by urgency.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityOrder {
    pub priorities: Vec<Priority>,
}

impl PriorityOrder {
    pub fn requests(&self) -> impl Iterator<Item = usize> + '_ {
        self.priorities.iter().map(|p| p.request)
    }

    pub fn len(&self) -> usize {
        self.priorities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priorities.is_empty()
    }
}

/// Orders the requests by frames left in their window, then by required
/// slots, then by id.
pub fn compute_priorities<'a>(requests: impl IntoIterator<Item = &'a Request>, frame: usize) -> PriorityOrder {
    let mut priorities: Vec<Priority> = requests
        .into_iter()
        .map(|r| Priority {
            request: r.id,
            remaining_frames: r.active_window.1.saturating_sub(frame),
            required_slots: r.required_slots,
        })
        .collect();
    priorities.sort_by_key(|p| (p.remaining_frames, p.required_slots, p.request));
    PriorityOrder { priorities }
}

/// Resource blocks of one frame, keyed by `(node, channel, slot)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RbGrid {
    pub slots_per_frame: usize,
    cells: BTreeMap<(usize, usize, usize), usize>,
}

impl RbGrid {
    pub fn new(slots_per_frame: usize) -> Self {
        RbGrid {
            slots_per_frame,
            cells: BTreeMap::new(),
        }
    }

    pub fn occupant(&self, node: usize, channel: usize, slot: usize) -> Option<usize> {
        self.cells.get(&(node, channel, slot)).copied()
    }

    fn has_request(&self, request: usize) -> bool {
        self.cells.values().any(|&r| r == request)
    }

    /// `(slot, channel)` pairs held by `request`.
    pub fn blocks_of(&self, request: usize) -> Vec<(usize, usize)> {
        self.cells
            .iter()
            .filter(|(_, &r)| r == request)
            .map(|(&(_, c, s), _)| (s, c))
            .collect()
    }

    /// Occupied cells as `(node, channel, slot, request)`.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        self.cells.iter().map(|(&(n, c, s), &r)| (n, c, s, r))
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Resource-block decisions `(frame, slot, request, channel)`.
    pub fn to_decisions(&self, frame: usize) -> BTreeSet<(usize, usize, usize, usize)> {
        self.cells().map(|(_, c, s, r)| (frame, s, r, c)).collect()
    }

    /// Writes one CSV record per occupied cell.
    pub fn write_csv<W: Write>(&self, frame: usize, out: W, header: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        if header {
            w.write_record(["frame", "node", "channel", "slot", "request"]).map_err(ser)?;
        }
        for (n, c, s, r) in self.cells() {
            w.serialize((frame, n, c, s, r)).map_err(ser)?;
        }
        w.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

/// Splits channels among radio nodes sharing an area: the k-th channel
/// goes to the (k mod m)-th of the m co-located nodes in id order.
pub fn partition_channels(node_areas: &BTreeMap<usize, usize>, channels: usize) -> BTreeMap<usize, Vec<usize>> {
    let mut by_area: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (&n, &a) in node_areas {
        by_area.entry(a).or_default().push(n);
    }
    let mut out = BTreeMap::new();
    for nodes in by_area.values() {
        for (i, &n) in nodes.iter().enumerate() {
            let share = (0..channels).filter(|c| c % nodes.len() == i).collect();
            out.insert(n, share);
        }
    }
    out
}

/// Deadline-priority resource-block allocation.
///
/// `node_areas` maps each radio node to its area for the frame and
/// `attachment` maps each request to its attachment node. Per node, the
/// node's channels are visited best belief first; on each channel, slots
/// are handed out as contiguous blocks to requests without an allocation,
/// most urgent first.
pub fn allocate_channels(
    node_areas: &BTreeMap<usize, usize>,
    attachment: &BTreeMap<usize, usize>,
    priorities: &PriorityOrder,
    beliefs: &ChannelBeliefTable,
    slots: usize,
) -> RbGrid {
    allocate_with(node_areas, attachment, priorities, beliefs.channels(), slots, |_, area, chans| {
        chans.sort_by(|&a, &b| beliefs.get(b, area).total_cmp(&beliefs.get(a, area)).then(a.cmp(&b)));
    })
}

/// The same block mechanics with channels and requests visited in a
/// uniformly random order.
pub fn allocate_channels_random(
    node_areas: &BTreeMap<usize, usize>,
    attachment: &BTreeMap<usize, usize>,
    priorities: &PriorityOrder,
    channels: usize,
    slots: usize,
    rng: &mut SimRng,
) -> RbGrid {
    let mut shuffled = priorities.clone();
    shuffled.priorities.shuffle(rng);
    allocate_with(node_areas, attachment, &shuffled, channels, slots, |_, _, chans| chans.shuffle(rng))
}

fn allocate_with<F>(
    node_areas: &BTreeMap<usize, usize>,
    attachment: &BTreeMap<usize, usize>,
    priorities: &PriorityOrder,
    channels: usize,
    slots: usize,
    mut order: F,
) -> RbGrid
where
    F: FnMut(usize, usize, &mut Vec<usize>),
{
    let mut grid = RbGrid::new(slots);
    let shares = partition_channels(node_areas, channels);
    for (&node, &area) in node_areas {
        let mut channels = shares.get(&node).cloned().unwrap_or_default();
        order(node, area, &mut channels);
        let requests: Vec<&Priority> = priorities
            .priorities
            .iter()
            .filter(|p| attachment.get(&p.request) == Some(&node))
            .collect();
        for &c in &channels {
            let mut tau = 0;
            while tau < slots {
                let mut progress = false;
                for p in &requests {
                    if tau >= slots {
                        break;
                    }
                    if grid.has_request(p.request) {
                        continue;
                    }
                    let end = tau + p.required_slots.min(slots - tau);
                    for s in tau..end {
                        grid.cells.insert((node, c, s), p.request);
                    }
                    progress |= end > tau;
                    tau = end;
                }
                if !progress {
                    break;
                }
            }
        }
    }
    grid
}

/// Fraction of a request's slot quota met by quality slots among `blocks`.
pub fn quota_fraction(world: &World, frame: usize, request: usize, blocks: &[(usize, usize)]) -> f64 {
    let req = world.request(request);
    let area = world.ue_area(frame, req.ue);
    let good = blocks
        .iter()
        .filter(|&&(s, c)| world.quality(frame, s, c, area))
        .count();
    good.min(req.required_slots) as f64 / req.required_slots as f64
}

/// Mean fraction of each request's slot quota met by quality slots, over
/// `requests`. Zero when there are none.
pub fn mac_reward(grid: &RbGrid, world: &World, frame: usize, requests: &[usize]) -> f64 {
    if requests.is_empty() {
        return 0.0;
    }
    let total: f64 = requests
        .iter()
        .map(|&r| quota_fraction(world, frame, r, &grid.blocks_of(r)))
        .sum();
    total / requests.len() as f64
}
