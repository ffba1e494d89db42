use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// The joint decision state. Every map is a set of the index tuples whose
/// binary variable equals one.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Allocation {
    /// `(frame, request, function)`: function selected for the request.
    #[serde(default)]
    pub x_select: BTreeSet<(usize, usize, usize)>,
    /// `(frame, function, node)`: function instance deployed on the node.
    #[serde(default)]
    pub y_place: BTreeSet<(usize, usize, usize)>,
    /// `(frame, slot, request, channel)`: uplink resource block.
    #[serde(default)]
    pub z_channel: BTreeSet<(usize, usize, usize, usize)>,
    /// `(frame, node, area)`: node position.
    #[serde(default)]
    pub s_area: BTreeSet<(usize, usize, usize)>,
    /// `(frame, ue, node)`: point of attachment.
    #[serde(default)]
    pub b_poa: BTreeSet<(usize, usize, usize)>,
    /// `(frame, request, path)`: inquiry path.
    #[serde(default)]
    pub r_path: BTreeSet<(usize, usize, usize)>,
}

impl Allocation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.x_select.is_empty()
            && self.y_place.is_empty()
            && self.z_channel.is_empty()
            && self.s_area.is_empty()
            && self.b_poa.is_empty()
            && self.r_path.is_empty()
    }

    /// Moves `node` to `area` in `frame`, clearing any other area it held
    /// in that frame so the node occupies exactly one area.
    pub fn set_area(&mut self, frame: usize, node: usize, area: usize) {
        let stale: Vec<_> = self
            .s_area
            .range((frame, node, 0)..=(frame, node, usize::MAX))
            .copied()
            .collect();
        for key in stale {
            self.s_area.remove(&key);
        }
        self.s_area.insert((frame, node, area));
    }

    pub fn area_of(&self, frame: usize, node: usize) -> Option<usize> {
        self.s_area
            .range((frame, node, 0)..=(frame, node, usize::MAX))
            .next()
            .map(|k| k.2)
    }

    pub fn areas_of(&self, frame: usize, node: usize) -> Vec<usize> {
        self.s_area
            .range((frame, node, 0)..=(frame, node, usize::MAX))
            .map(|k| k.2)
            .collect()
    }

    /// Binds `ue` to `node` in `frame`, replacing any earlier binding.
    pub fn set_poa(&mut self, frame: usize, ue: usize, node: usize) {
        let stale: Vec<_> = self
            .b_poa
            .range((frame, ue, 0)..=(frame, ue, usize::MAX))
            .copied()
            .collect();
        for key in stale {
            self.b_poa.remove(&key);
        }
        self.b_poa.insert((frame, ue, node));
    }

    pub fn poa_of(&self, frame: usize, ue: usize) -> Option<usize> {
        self.b_poa
            .range((frame, ue, 0)..=(frame, ue, usize::MAX))
            .next()
            .map(|k| k.2)
    }

    pub fn poas_of(&self, frame: usize, ue: usize) -> Vec<usize> {
        self.b_poa
            .range((frame, ue, 0)..=(frame, ue, usize::MAX))
            .map(|k| k.2)
            .collect()
    }

    pub fn is_selected(&self, frame: usize, request: usize, function: usize) -> bool {
        self.x_select.contains(&(frame, request, function))
    }

    pub fn is_placed(&self, frame: usize, function: usize, node: usize) -> bool {
        self.y_place.contains(&(frame, function, node))
    }

    /// Nodes hosting `function` in `frame`, ascending.
    pub fn hosts(&self, frame: usize, function: usize) -> Vec<usize> {
        self.y_place
            .range((frame, function, 0)..=(frame, function, usize::MAX))
            .map(|k| k.2)
            .collect()
    }

    /// Paths chosen for `request` in `frame`.
    pub fn paths_of(&self, frame: usize, request: usize) -> Vec<usize> {
        self.r_path
            .range((frame, request, 0)..=(frame, request, usize::MAX))
            .map(|k| k.2)
            .collect()
    }

    /// `(slot, channel)` blocks granted to `request` in `frame`.
    pub fn blocks_of(&self, frame: usize, request: usize) -> Vec<(usize, usize)> {
        self.z_channel
            .range((frame, 0, 0, 0)..=(frame, usize::MAX, usize::MAX, usize::MAX))
            .filter(|k| k.2 == request)
            .map(|k| (k.1, k.3))
            .collect()
    }

    /// Copy of the decisions belonging to a single frame.
    pub fn frame_slice(&self, frame: usize) -> Allocation {
        fn pick3(set: &BTreeSet<(usize, usize, usize)>, t: usize) -> BTreeSet<(usize, usize, usize)> {
            set.range((t, 0, 0)..=(t, usize::MAX, usize::MAX)).copied().collect()
        }
        Allocation {
            x_select: pick3(&self.x_select, frame),
            y_place: pick3(&self.y_place, frame),
            z_channel: self
                .z_channel
                .range((frame, 0, 0, 0)..=(frame, usize::MAX, usize::MAX, usize::MAX))
                .copied()
                .collect(),
            s_area: pick3(&self.s_area, frame),
            b_poa: pick3(&self.b_poa, frame),
            r_path: pick3(&self.r_path, frame),
        }
    }

    /// Adds every decision of `other` to `self`.
    pub fn merge(&mut self, other: &Allocation) {
        self.x_select.extend(other.x_select.iter().copied());
        self.y_place.extend(other.y_place.iter().copied());
        self.z_channel.extend(other.z_channel.iter().copied());
        self.s_area.extend(other.s_area.iter().copied());
        self.b_poa.extend(other.b_poa.iter().copied());
        self.r_path.extend(other.r_path.iter().copied());
    }

    /// Removes every decision concerning `request` (selections, resource
    /// blocks and paths).
    pub fn drop_request(&mut self, request: usize) {
        self.x_select.retain(|k| k.1 != request);
        self.z_channel.retain(|k| k.2 != request);
        self.r_path.retain(|k| k.1 != request);
    }

    /// Removes `request`'s decisions in one frame only.
    pub fn drop_request_in_frame(&mut self, frame: usize, request: usize) {
        self.x_select.retain(|k| !(k.0 == frame && k.1 == request));
        self.z_channel.retain(|k| !(k.0 == frame && k.2 == request));
        self.r_path.retain(|k| !(k.0 == frame && k.1 == request));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_area_keeps_one_area() {
        let mut a = Allocation::new();
        a.set_area(0, 1, 3);
        a.set_area(0, 1, 5);
        a.set_area(1, 1, 2);
        assert_eq!(a.areas_of(0, 1), vec![5]);
        assert_eq!(a.area_of(1, 1), Some(2));
        assert_eq!(a.s_area.len(), 2);
    }

    #[test]
    fn queries_are_frame_local() {
        let mut a = Allocation::new();
        a.y_place.insert((0, 2, 1));
        a.y_place.insert((0, 2, 4));
        a.y_place.insert((1, 2, 3));
        a.z_channel.insert((0, 3, 7, 1));
        a.z_channel.insert((0, 4, 7, 1));
        a.z_channel.insert((0, 4, 8, 0));
        assert_eq!(a.hosts(0, 2), vec![1, 4]);
        assert_eq!(a.blocks_of(0, 7), vec![(3, 1), (4, 1)]);
        let s = a.frame_slice(1);
        assert_eq!(s.y_place.len(), 1);
        assert!(s.z_channel.is_empty());
    }

    #[test]
    fn drop_request_clears_its_decisions() {
        let mut a = Allocation::new();
        a.x_select.insert((0, 1, 0));
        a.x_select.insert((0, 2, 0));
        a.r_path.insert((0, 1, 5));
        a.z_channel.insert((0, 0, 1, 0));
        a.drop_request(1);
        assert_eq!(a.x_select.len(), 1);
        assert!(a.r_path.is_empty() && a.z_channel.is_empty());
    }
}
