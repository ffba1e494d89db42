use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelPhys, ChannelSpec};
use crate::rng::SimRng;

/// Atmospheric attenuation per weather regime, dB.
pub const WEATHER_ATTENUATION_DB: [f64; 3] = [0.0, 2.5, 5.0];
/// Shadowing standard deviation per weather regime, dB.
pub const SHADOWING_STD_DB: [f64; 3] = [2.0, 3.0, 4.5];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeatherState {
    pub regime: usize,
    pub attenuation: f64,
    pub shadowing_std: f64,
}

impl WeatherState {
    pub fn from_regime(regime: usize) -> Result<Self> {
        if regime >= WEATHER_ATTENUATION_DB.len() {
            return Err(Error::Argument(format!("unknown weather regime {regime}")));
        }
        Ok(WeatherState {
            regime,
            attenuation: WEATHER_ATTENUATION_DB[regime],
            shadowing_std: SHADOWING_STD_DB[regime],
        })
    }

    pub fn clear() -> Self {
        WeatherState {
            regime: 0,
            attenuation: WEATHER_ATTENUATION_DB[0],
            shadowing_std: SHADOWING_STD_DB[0],
        }
    }

    /// Uniform draw over the regimes.
    pub fn sample(rng: &mut SimRng) -> Self {
        let regime = rng.random_range(0..WEATHER_ATTENUATION_DB.len());
        Self::from_regime(regime).expect("regime drawn in range")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub los: bool,
    pub gain: f64,
    pub rayleigh: f64,
    pub lognormal_shadow: f64,
    pub distance: f64,
    /// `None` when the line-of-sight draw succeeded.
    pub snr: Option<f64>,
    pub quality: bool,
}

/// Rayleigh amplitude by inverse transform of a uniform draw in `[0, 1)`.
pub fn rayleigh_from_uniform(scale: f64, u: f64) -> f64 {
    scale * (-2.0 * (1.0 - u).ln()).sqrt()
}

/// Instantaneous channel gain for given fading and shadowing draws.
pub fn channel_gain(
    phys: &ChannelPhys,
    rayleigh: f64,
    shadow: f64,
    weather: &WeatherState,
    distance: f64,
) -> f64 {
    rayleigh
        * 10f64.powf(shadow * weather.shadowing_std / 10.0)
        * (phys.reference_distance / distance).powf(phys.path_loss_exponent)
        * 10f64.powf(-weather.attenuation / 10.0)
}

pub fn snr(phys: &ChannelPhys, gain: f64) -> f64 {
    phys.transmit_power * gain / (phys.noise_density * phys.subcarrier_spacing)
}

pub fn quality_from_snr(phys: &ChannelPhys, snr: f64) -> bool {
    snr >= phys.quality_threshold
}

/// Draws one slot's channel state. Three values are consumed from `rng`
/// on every call (LoS, fading, shadowing) so that realizations stay aligned
/// across parameter changes.
pub fn realize_channel(
    channel: &ChannelSpec,
    los_probability: f64,
    distance: f64,
    weather: &WeatherState,
    rng: &mut SimRng,
) -> Result<ChannelRealization> {
    if !(distance > 0.0) {
        return Err(Error::Argument(format!("distance {distance} must be positive")));
    }
    let u_los: f64 = rng.random();
    let u_fade: f64 = rng.random();
    let shadow: f64 = rng.sample(StandardNormal);
    let phys = &channel.phys;
    let rayleigh = rayleigh_from_uniform(phys.rayleigh_scale, u_fade);
    let gain = channel_gain(phys, rayleigh, shadow, weather, distance);
    let los = u_los < los_probability;
    let (snr, quality) = if los {
        (None, true)
    } else {
        let g = snr(phys, gain);
        (Some(g), quality_from_snr(phys, g))
    };
    Ok(ChannelRealization {
        los,
        gain,
        rayleigh,
        lognormal_shadow: shadow,
        distance,
        snr,
        quality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn spec() -> ChannelSpec {
        ChannelSpec {
            id: 0,
            use_energy: 3.0,
            phys: ChannelPhys::default(),
        }
    }

    #[test]
    fn full_los_always_good() {
        let mut rng = stream_rng(3, 8);
        let c = spec();
        for _ in 0..1000 {
            let r = realize_channel(&c, 1.0, 1000.0, &WeatherState::clear(), &mut rng).unwrap();
            assert!(r.quality && r.los && r.snr.is_none());
        }
    }

    #[test]
    fn zero_gain_fails_threshold() {
        let phys = ChannelPhys::default();
        assert!(!quality_from_snr(&phys, snr(&phys, 0.0)));
    }

    #[test]
    fn nonpositive_distance_rejected() {
        let mut rng = stream_rng(3, 8);
        let err = realize_channel(&spec(), 0.5, 0.0, &WeatherState::clear(), &mut rng);
        assert!(matches!(err, Err(Error::Argument(_))));
    }

    #[test]
    fn more_power_never_hurts() {
        let mut rng = stream_rng(5, 8);
        let mut hi = spec();
        hi.phys.transmit_power *= 4.0;
        let w = WeatherState::from_regime(2).unwrap();
        for _ in 0..2000 {
            let mut r2 = rng.clone();
            let a = realize_channel(&spec(), 0.0, 1000.0, &w, &mut rng).unwrap();
            let b = realize_channel(&hi, 0.0, 1000.0, &w, &mut r2).unwrap();
            assert!(!a.quality || b.quality);
        }
    }

    #[test]
    fn weather_levels() {
        assert!(WeatherState::from_regime(3).is_err());
        let w = WeatherState::from_regime(1).unwrap();
        assert_eq!((w.attenuation, w.shadowing_std), (2.5, 3.0));
    }
}
