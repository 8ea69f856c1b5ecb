//! Uplink channel model: log-distance path loss with a fading term, linear
//! channel gain, SNR against a constant background noise, and the equal-share
//! Shannon rate.

use crate::error::ModelError;
use crate::scenario::ChannelParams;
use crate::units::dbm_to_watts;

/// Per-link quality snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkQuality {
    pub path_loss_db: f64,
    pub gain: f64,
    pub snr: f64,
    pub rate_bps: f64,
}

/// θ₀ + 10·φ·log10(d/d₀) + fading.
pub fn path_loss_db(distance: f64, channel: &ChannelParams, fading_db: f64) -> Result<f64, ModelError> {
    if !(distance > 0.0) {
        return Err(ModelError::NonPositive {
            what: "distance",
            value: distance,
        });
    }
    Ok(channel.pl_ref_db + 10.0 * channel.pl_exponent * (distance / channel.ref_distance).log10() + fading_db)
}

pub fn channel_gain(path_loss_db: f64) -> f64 {
    10f64.powf(-path_loss_db / 10.0)
}

pub fn snr(tx_power: f64, gain: f64, noise_power: f64) -> Result<f64, ModelError> {
    if !(noise_power > 0.0) {
        return Err(ModelError::NonPositive {
            what: "noise power",
            value: noise_power,
        });
    }
    Ok(tx_power * gain / noise_power)
}

/// Rate of an associated user when the server's band is split equally
/// among `n_associated` users. Zero for unassociated users.
pub fn uplink_rate(bandwidth: f64, n_associated: usize, snr: f64, associated: bool) -> Result<f64, ModelError> {
    if !associated {
        return Ok(0.0);
    }
    if n_associated == 0 {
        return Err(ModelError::EmptyServerShare);
    }
    Ok(bandwidth / n_associated as f64 * (1.0 + snr).log2())
}

/// Background noise power over `bandwidth` Hz: thermal PSD plus the optional
/// fixed interference term.
pub fn noise_power(channel: &ChannelParams, bandwidth: f64) -> f64 {
    let thermal = dbm_to_watts(channel.noise_psd_dbm_hz) * bandwidth;
    match channel.interference_dbm {
        Some(dbm) => thermal + dbm_to_watts(dbm),
        None => thermal,
    }
}

/// Full link evaluation for a user holding a `1/n_associated` share of the band.
pub fn link_quality(
    channel: &ChannelParams,
    path_loss_db: f64,
    tx_power: f64,
    bandwidth: f64,
    n_associated: usize,
) -> Result<LinkQuality, ModelError> {
    if n_associated == 0 {
        return Err(ModelError::EmptyServerShare);
    }
    let gain = channel_gain(path_loss_db);
    let share = bandwidth / n_associated as f64;
    let snr = snr(tx_power, gain, noise_power(channel, share))?;
    let rate_bps = uplink_rate(bandwidth, n_associated, snr, true)?;
    Ok(LinkQuality {
        path_loss_db,
        gain,
        snr,
        rate_bps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn channel(theta0: f64, exponent: f64) -> ChannelParams {
        ChannelParams {
            pl_ref_db: theta0,
            ref_distance: 1.0,
            pl_exponent: exponent,
            ..ChannelParams::default()
        }
    }

    #[test]
    fn path_loss_examples() {
        let ch = channel(30.0, 3.0);
        assert_eq!(path_loss_db(1.0, &ch, 0.0).unwrap(), 30.0);
        assert!((path_loss_db(10.0, &ch, 0.0).unwrap() - 60.0).abs() < 1e-12);
        let ch2 = channel(30.0, 2.0);
        assert!((path_loss_db(100.0, &ch2, 3.0).unwrap() - 73.0).abs() < 1e-12);
    }

    #[test]
    fn path_loss_rejects_nonpositive_distance() {
        let ch = channel(30.0, 3.0);
        assert!(path_loss_db(0.0, &ch, 0.0).is_err());
        assert!(path_loss_db(-5.0, &ch, 0.0).is_err());
    }

    #[test]
    fn gain_examples() {
        assert_eq!(channel_gain(0.0), 1.0);
        assert!((channel_gain(30.0) / 1e-3 - 1.0).abs() < 1e-12);
        assert!((channel_gain(60.0) / 1e-6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn snr_examples() {
        assert!((snr(1.0, 2e-10, 2e-10).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(snr(0.2, 0.0, 1e-9).unwrap(), 0.0);
        assert!((snr(0.2, 1e-6, 1e-7).unwrap() - 2.0).abs() < 1e-12);
        assert!(snr(0.2, 1e-6, 0.0).is_err());
    }

    #[test]
    fn rate_examples() {
        assert!((uplink_rate(20e6, 10, 3.0, true).unwrap() - 4e6).abs() < 1e-6);
        assert_eq!(uplink_rate(20e6, 10, 3.0, false).unwrap(), 0.0);
        assert_eq!(uplink_rate(20e6, 10, 0.0, true).unwrap(), 0.0);
        assert_eq!(uplink_rate(20e6, 0, 3.0, true), Err(ModelError::EmptyServerShare));
    }

    proptest! {
        #[test]
        fn rate_increases_with_snr(a in 0.0f64..1e6, b in 0.0f64..1e6, n in 1usize..200) {
            prop_assume!(a < b);
            let ra = uplink_rate(20e6, n, a, true).unwrap();
            let rb = uplink_rate(20e6, n, b, true).unwrap();
            prop_assert!(ra < rb);
        }

        #[test]
        fn rate_decreases_with_share_count(s in 1e-6f64..1e6, n in 1usize..500) {
            let r1 = uplink_rate(20e6, n, s, true).unwrap();
            let r2 = uplink_rate(20e6, n + 1, s, true).unwrap();
            prop_assert!(r2 < r1);
        }

        #[test]
        fn gain_decreases_with_distance(d in 1.0f64..1e4, step in 1e-3f64..1e3, fade in -20.0f64..20.0) {
            let ch = channel(30.0, 3.0);
            let g1 = channel_gain(path_loss_db(d, &ch, fade).unwrap());
            let g2 = channel_gain(path_loss_db(d + step, &ch, fade).unwrap());
            prop_assert!(g2 < g1);
        }

        #[test]
        fn gain_round_trip(d in 0.5f64..1e4, fade in -30.0f64..30.0) {
            let ch = channel(30.0, 3.0);
            let theta = path_loss_db(d, &ch, fade).unwrap();
            let g = channel_gain(theta);
            let expected = 10f64.powf(-theta / 10.0);
            prop_assert!(((g - expected) / expected).abs() <= 1e-12);
        }
    }
}
