use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frame/slot clock of a simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeBase {
    pub total_frames: usize,
    pub slots_per_frame: usize,
    #[serde(default)]
    pub current_frame: usize,
    #[serde(default)]
    pub current_slot: usize,
}

impl TimeBase {
    pub fn new(total_frames: usize, slots_per_frame: usize) -> Result<Self> {
        if slots_per_frame == 0 {
            return Err(Error::Dimension("slots_per_frame must be at least 1".into()));
        }
        Ok(TimeBase {
            total_frames,
            slots_per_frame,
            current_frame: 0,
            current_slot: 0,
        })
    }

    pub fn is_finished(&self) -> bool {
        self.current_frame >= self.total_frames
    }

    /// Advances one slot, rolling over into the next frame.
    pub fn advance_slot(&mut self) {
        self.current_slot += 1;
        if self.current_slot == self.slots_per_frame {
            self.current_slot = 0;
            self.current_frame += 1;
        }
    }

    pub fn advance_frame(&mut self) {
        self.current_slot = 0;
        self.current_frame += 1;
    }

    /// Slot index counted from the start of the horizon.
    pub fn absolute_slot(&self) -> usize {
        self.current_frame * self.slots_per_frame + self.current_slot
    }
}
