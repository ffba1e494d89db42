use serde::{Deserialize, Serialize};

use super::arrivals::{spawn_requests, ArrivalConfig};
use super::channel::{realize_channel, WeatherState};
use super::mobility::{step_mobility, UeState};
use crate::error::{Error, Result};
use crate::model::{Instance, PathSet, Request};
use crate::rng::Stream;

/// Every exogenous quantity of an episode: UE positions, arrivals, weather
/// and channel qualities. Decisions never feed back into a `World`, so all
/// policies run against the same realization for a given seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct World {
    /// The instance, with spawned requests appended to its request list.
    pub instance: Instance,
    pub paths: PathSet,
    /// UE states per frame.
    pub ue_trace: Vec<Vec<UeState>>,
    pub weather: Vec<WeatherState>,
    quality: Vec<bool>,
}

impl World {
    /// Realizes the exogenous processes over the instance horizon. Scripted
    /// requests are kept; `arrivals`, if given, adds spawned ones.
    pub fn realize(instance: &Instance, arrivals: Option<&ArrivalConfig>) -> Result<World> {
        let report = instance.validate();
        if let Some(v) = report.violations.first() {
            return Err(Error::Config(format!(
                "invalid instance ({} problems), first: {v}",
                report.violations.len()
            )));
        }
        let frames = instance.time.total_frames;
        let seeds = instance.seeds;
        let grid = &instance.grid;
        let mut instance = instance.clone();

        let mut mobility = seeds.stream(Stream::Mobility);
        let mut arrival_rng = seeds.stream(Stream::Arrival);
        let mut weather_rng = seeds.stream(Stream::Weather);
        // One stream per channel, so adding channels leaves the existing
        // channels' realizations unchanged.
        let mut channel_rngs: Vec<_> = (0..instance.channels.len())
            .map(|c| seeds.substream(Stream::Channel, c as u64))
            .collect();

        let mut ues: Vec<UeState> = instance
            .ues
            .iter()
            .map(|u| UeState {
                ue: u.ue,
                area: u.area,
                heading: u.heading,
            })
            .collect();
        let mut ue_trace = Vec::with_capacity(frames);
        let mut weather = Vec::with_capacity(frames);
        let slots = instance.time.slots_per_frame;
        let (nc, na) = (instance.channels.len(), grid.len());
        let mut quality = Vec::with_capacity(frames * slots * nc * na);
        let mut spawned = Vec::new();
        let mut next_id = instance.requests.len();

        for t in 0..frames {
            if t > 0 {
                step_mobility(&mut ues, grid, &mut mobility);
            }
            if let Some(cfg) = arrivals {
                let new = spawn_requests(
                    t,
                    &ues,
                    &instance.services,
                    cfg,
                    slots,
                    next_id,
                    &mut arrival_rng,
                )?;
                next_id += new.len();
                spawned.extend(new);
            }
            let w = WeatherState::sample(&mut weather_rng);
            for _ in 0..slots {
                for c in &instance.channels {
                    for a in grid.area_ids() {
                        let r = realize_channel(
                            c,
                            grid.los_probability[a],
                            c.phys.intra_area_distance,
                            &w,
                            &mut channel_rngs[c.id],
                        )?;
                        quality.push(r.quality);
                    }
                }
            }
            weather.push(w);
            ue_trace.push(ues.clone());
        }
        instance.requests.extend(spawned);
        let paths = instance.paths();
        Ok(World {
            instance,
            paths,
            ue_trace,
            weather,
            quality,
        })
    }

    pub fn frames(&self) -> usize {
        self.instance.time.total_frames
    }

    pub fn slots(&self) -> usize {
        self.instance.time.slots_per_frame
    }

    fn quality_index(&self, frame: usize, slot: usize, channel: usize, area: usize) -> usize {
        let (nc, na) = (self.instance.channels.len(), self.instance.grid.len());
        ((frame * self.slots() + slot) * nc + channel) * na + area
    }

    /// Realized quality indicator of `channel` in `area` at a slot.
    pub fn quality(&self, frame: usize, slot: usize, channel: usize, area: usize) -> bool {
        self.quality[self.quality_index(frame, slot, channel, area)]
    }

    /// Overrides a realized quality, for scripted scenarios and tests.
    pub fn set_quality(&mut self, frame: usize, slot: usize, channel: usize, area: usize, q: bool) {
        let i = self.quality_index(frame, slot, channel, area);
        self.quality[i] = q;
    }

    /// Sets every slot quality to `q`.
    pub fn fill_quality(&mut self, q: bool) {
        self.quality.iter_mut().for_each(|v| *v = q);
    }

    /// Slot-averaged quality of `(channel, area)` over a frame.
    pub fn observation(&self, frame: usize, channel: usize, area: usize) -> f64 {
        let slots = self.slots();
        let good = (0..slots)
            .filter(|s| self.quality(frame, *s, channel, area))
            .count();
        good as f64 / slots as f64
    }

    pub fn ue_area(&self, frame: usize, ue: usize) -> usize {
        self.ue_trace[frame][ue].area
    }

    pub fn requests(&self) -> &[Request] {
        &self.instance.requests
    }

    pub fn request(&self, id: usize) -> &Request {
        &self.instance.requests[id]
    }

    /// Ids of requests whose window contains `frame`.
    pub fn active_requests(&self, frame: usize) -> Vec<usize> {
        self.instance
            .requests
            .iter()
            .filter(|r| r.is_active(frame))
            .map(|r| r.id)
            .collect()
    }

    /// Whether the request's whole window lies inside the horizon.
    pub fn fits_horizon(&self, request: &Request) -> bool {
        request.active_window.1 <= self.frames()
    }
}
