use crate::model::LinkSpec;

/// Latency (ms) of a link carrying `load_fraction` of its capacity.
/// The fraction is clamped into `[0, 1]`.
pub fn link_latency(link: &LinkSpec, load_fraction: f64) -> f64 {
    link.base_latency * (1.0 + load_fraction.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link(base: f64) -> LinkSpec {
        LinkSpec {
            id: 0,
            endpoints: (0, 1),
            bandwidth_capacity: 10.0,
            transmit_energy: 5.0,
            base_latency: base,
        }
    }

    #[test]
    fn endpoints() {
        assert_eq!(link_latency(&link(7.0), 0.0), 7.0);
        assert_eq!(link_latency(&link(7.0), 1.0), 14.0);
        assert_eq!(link_latency(&link(7.0), 0.5), 10.5);
    }

    #[test]
    fn bounded_by_range() {
        for base in [4.0, 9.5, 16.0] {
            for load in [0.0, 0.3, 1.0] {
                let d = link_latency(&link(base), load);
                assert!((4.0..=32.0).contains(&d));
            }
        }
    }
}
