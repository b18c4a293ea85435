//! Lambertian line-of-sight optical channel: gains, rates, and SINRs.
//!
//! A beam with directivity index `gamma` pointed with cosines
//! `(cos_phi, cos_theta)` at distance `d` has channel gain
//!
//! ```text
//! h = (gamma + 1) / (2 pi) * A_r * r * cos^gamma(phi) * cos(theta) / d^2
//! ```
//!
//! clamped to zero when either cosine is negative (no line of sight). With
//! optical intensity modulation the received electrical SNR is quadratic in
//! the optical power, so a link with gain `h` and transmit power `p`
//! achieves `R = B log2(1 + (p h)^2 / (N0 B))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{link_geometry, orientation_from_angles, SteeringAngles, Vec3};

/// Photodetector front-end parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverParams {
    /// Physical detector area in m^2.
    pub area_m2: f64,
    /// Responsivity in A/W.
    pub responsivity_a_per_w: f64,
}

/// One steerable beam: position, pointing, focus, and transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamState {
    pub position: Vec3,
    pub angles: SteeringAngles,
    /// Lambertian directivity index; larger focuses the beam more narrowly.
    pub gamma: f64,
    pub power_w: f64,
}

/// Receiver-side noise: single-sided current PSD and signal bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Noise power spectral density in A^2/Hz.
    pub n0_a2_per_hz: f64,
    /// Bandwidth in Hz.
    pub bandwidth_hz: f64,
}

impl NoiseModel {
    /// Total noise power `N0 * B`.
    pub fn power(&self) -> f64 {
        self.n0_a2_per_hz * self.bandwidth_hz
    }
}

/// SINRs of a NOMA pair: the weak user decodes directly, the strong user
/// first decodes the weak user's message (`cross`) and cancels it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NomaSinrs {
    pub weak: f64,
    pub strong: f64,
    /// SINR of the weak user's message at the strong user, before SIC.
    pub cross: f64,
}

/// Channel gain from raw link cosines; zero without line of sight.
pub fn los_gain_components(
    gamma: f64,
    rx: &ReceiverParams,
    cos_phi: f64,
    cos_theta: f64,
    distance_m: f64,
) -> f64 {
    if cos_phi < 0.0 || cos_theta < 0.0 {
        return 0.0;
    }
    (gamma + 1.0) / (2.0 * std::f64::consts::PI)
        * rx.area_m2
        * rx.responsivity_a_per_w
        * cos_phi.powf(gamma)
        * cos_theta
        / (distance_m * distance_m)
}

/// Channel gain of one beam/receiver link. `gamma >= 1` is validated;
/// coincident positions are a geometry error.
pub fn los_gain(
    beam: &BeamState,
    rx_pos: Vec3,
    rx_orientation: Vec3,
    rx: &ReceiverParams,
) -> Result<f64> {
    if !(beam.gamma.is_finite() && beam.gamma >= 1.0) {
        return Err(Error::invalid(format!("gamma {} must be >= 1", beam.gamma)));
    }
    let o = orientation_from_angles(beam.angles);
    let g = link_geometry(beam.position, o, rx_pos, rx_orientation)?;
    Ok(los_gain_components(
        beam.gamma,
        rx,
        g.cos_phi,
        g.cos_theta,
        g.distance_m,
    ))
}

/// Interference-free achievable rate in bit/s.
pub fn link_rate(gain: f64, power_w: f64, noise: &NoiseModel) -> f64 {
    let s = power_w * gain;
    noise.bandwidth_hz * (1.0 + s * s / noise.power()).log2()
}

/// SINR of the user served by beam `serving` when every other beam carries
/// an independent stream.
///
/// `gains[m]` is the user's channel gain to beam `m`; `powers[m]` that
/// beam's optical power.
pub fn sinr_multibeam(gains: &[f64], powers: &[f64], serving: usize, noise: &NoiseModel) -> f64 {
    debug_assert_eq!(gains.len(), powers.len());
    let mut interference = 0.0;
    for m in 0..gains.len() {
        if m != serving {
            let r = powers[m] * gains[m];
            interference += r * r;
        }
    }
    let s = powers[serving] * gains[serving];
    s * s / (noise.power() + interference)
}

/// SINRs of a NOMA pair sharing beam `serving` with power split
/// `eta = rho1^2` (weak user's share).
///
/// `gains_weak[m]` / `gains_strong[m]` are the two users' gains to beam `m`.
/// `eta` must lie in `[0, 1]`.
pub fn noma_sinrs(
    gains_weak: &[f64],
    gains_strong: &[f64],
    powers: &[f64],
    serving: usize,
    eta: f64,
    noise: &NoiseModel,
) -> Result<NomaSinrs> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid(format!("eta {eta} outside [0, 1]")));
    }
    let inter = |gains: &[f64]| -> f64 {
        let mut acc = 0.0;
        for m in 0..gains.len() {
            if m != serving {
                let r = powers[m] * gains[m];
                acc += r * r;
            }
        }
        acc
    };
    let pn = powers[serving];
    let rho1_sq = eta;
    let rho2_sq = 1.0 - eta;

    let s_weak = gains_weak[serving] * pn;
    let s_strong = gains_strong[serving] * pn;
    let noise_weak = noise.power() + inter(gains_weak);
    let noise_strong = noise.power() + inter(gains_strong);

    // Weak user decodes its own message; the strong user's superimposed
    // message is intra-beam interference.
    let weak = rho1_sq * s_weak * s_weak / (noise_weak + rho2_sq * s_weak * s_weak);
    // Strong user after SIC sees only inter-beam interference.
    let strong = rho2_sq * s_strong * s_strong / noise_strong;
    // Weak user's message observed at the strong user, before SIC.
    let cross = rho1_sq * s_strong * s_strong / (noise_strong + rho2_sq * s_strong * s_strong);

    Ok(NomaSinrs { weak, strong, cross })
}

// ── tests ───────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE_RX: ReceiverParams = ReceiverParams {
        area_m2: 1e-4,
        responsivity_a_per_w: 1.0,
    };
    const TABLE_NOISE: NoiseModel = NoiseModel {
        n0_a2_per_hz: 2.5e-20,
        bandwidth_hz: 2e7,
    };

    fn nadir_beam(gamma: f64) -> BeamState {
        BeamState {
            position: Vec3::new(4.0, 4.0, 4.0),
            angles: SteeringAngles {
                alpha_deg: 270.0,
                beta_deg: 0.0,
            },
            gamma,
            power_w: 1.0,
        }
    }

    const UP: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[test]
    fn nadir_gain_matches_reference() {
        // User straight below at distance 3.15 m, gamma = 5.
        let h = los_gain(&nadir_beam(5.0), Vec3::new(4.0, 4.0, 0.85), UP, &TABLE_RX).unwrap();
        assert!((h - 9.623881668444162e-6).abs() / h < 1e-12, "h = {h:e}");
    }

    #[test]
    fn rate_chain_matches_reference() {
        let h = 9.623881668444162e-6;
        let snr = (1.0 * h) * (1.0 * h) / TABLE_NOISE.power();
        assert!((snr - 185.23819673643118).abs() < 1e-9);
        let r = link_rate(h, 1.0, &TABLE_NOISE);
        assert!((r - 150_820_103.68423444).abs() < 1.0, "rate = {r}");
    }

    #[test]
    fn gain_at_45_degrees_matches_reference() {
        // tx at (0,0,4) pointing down, user at (3.15, 0, 0.85): both cosines
        // are exactly 1/sqrt(2).
        let beam = BeamState {
            position: Vec3::new(0.0, 0.0, 4.0),
            ..nadir_beam(5.0)
        };
        let h = los_gain(&beam, Vec3::new(3.15, 0.0, 0.85), UP, &TABLE_RX).unwrap();
        assert!((h - 6.014926042777597e-7).abs() / h < 1e-12, "h = {h:e}");
    }

    #[test]
    fn gain_clamps_to_zero_without_line_of_sight() {
        // Receiver above the beam plane, facing up: cos_theta < 0.
        let h = los_gain(&nadir_beam(5.0), Vec3::new(4.0, 4.0, 4.5), UP, &TABLE_RX).unwrap();
        assert_eq!(h, 0.0);
        // Receiver facing down (away from the transmitter): cos_theta < 0.
        let down = Vec3::new(0.0, 0.0, -1.0);
        let h2 = los_gain(&nadir_beam(5.0), Vec3::new(4.0, 4.0, 0.85), down, &TABLE_RX).unwrap();
        assert_eq!(h2, 0.0);
    }

    #[test]
    fn gain_decreases_with_gamma_off_axis() {
        // Off-axis users lose from focusing; on-axis users gain.
        let off = Vec3::new(6.0, 4.0, 0.85);
        let h_wide = los_gain(&nadir_beam(1.0), off, UP, &TABLE_RX).unwrap();
        let h_narrow = los_gain(&nadir_beam(15.0), off, UP, &TABLE_RX).unwrap();
        assert!(h_narrow < h_wide);

        let on = Vec3::new(4.0, 4.0, 0.85);
        let g_wide = los_gain(&nadir_beam(1.0), on, UP, &TABLE_RX).unwrap();
        let g_narrow = los_gain(&nadir_beam(15.0), on, UP, &TABLE_RX).unwrap();
        assert!(g_narrow > g_wide);
    }

    #[test]
    fn rate_is_monotone_in_gain_and_power() {
        let r1 = link_rate(1e-6, 1.0, &TABLE_NOISE);
        let r2 = link_rate(2e-6, 1.0, &TABLE_NOISE);
        let r3 = link_rate(1e-6, 2.0, &TABLE_NOISE);
        assert!(r2 > r1);
        assert!(r3 > r1);
        assert_eq!(link_rate(0.0, 1.0, &TABLE_NOISE), 0.0);
    }

    #[test]
    fn tenfold_interferer_cuts_sinr_hundredfold() {
        // Equal gains, interferer at 10x the serving power, noise negligible:
        // the squared-amplitude SINR drops by ~100x.
        let gains = [1e-5, 1e-5];
        let base = sinr_multibeam(&gains, &[1.0, 1.0], 0, &TABLE_NOISE);
        let loud = sinr_multibeam(&gains, &[1.0, 10.0], 0, &TABLE_NOISE);
        let ratio = base / loud;
        assert!((ratio - 99.507).abs() < 0.01, "ratio = {ratio}");
    }

    #[test]
    fn sinr_decreases_with_interferer_count() {
        let gains = [1e-5, 0.5e-5, 0.5e-5];
        let one = sinr_multibeam(&gains[..2], &[1.0, 1.0], 0, &TABLE_NOISE);
        let two = sinr_multibeam(&gains, &[1.0, 1.0, 1.0], 0, &TABLE_NOISE);
        assert!(two < one);
    }

    #[test]
    fn noma_sinr_boundary_cases() {
        let gw = [8e-6];
        let gs = [1.2e-5];
        let p = [1.0];
        // All power to the weak user: the strong user gets nothing and the
        // weak user sees no intra-beam interference.
        let s = noma_sinrs(&gw, &gs, &p, 0, 1.0, &TABLE_NOISE).unwrap();
        assert_eq!(s.strong, 0.0);
        let snr_weak = (gw[0] * p[0]).powi(2) / TABLE_NOISE.power();
        assert!((s.weak - snr_weak).abs() / snr_weak < 1e-12);
        // No power to the weak user.
        let z = noma_sinrs(&gw, &gs, &p, 0, 0.0, &TABLE_NOISE).unwrap();
        assert_eq!(z.weak, 0.0);
        assert_eq!(z.cross, 0.0);

        assert!(noma_sinrs(&gw, &gs, &p, 0, 1.5, &TABLE_NOISE).is_err());
    }

    #[test]
    fn noma_cross_equals_weak_for_identical_gains() {
        let g = [9.62e-6];
        let s = noma_sinrs(&g, &g, &[1.0], 0, 0.5, &TABLE_NOISE).unwrap();
        assert_eq!(s.cross, s.weak);
    }

    #[test]
    fn noma_cross_increases_and_strong_decreases_with_eta() {
        let gw = [8e-6, 2e-6];
        let gs = [1.2e-5, 1e-6];
        let p = [0.5, 0.5];
        let mut prev_cross = -1.0;
        let mut prev_strong = f64::INFINITY;
        for i in 0..=20 {
            let eta = 0.5 + 0.5 * i as f64 / 20.0;
            let s = noma_sinrs(&gw, &gs, &p, 0, eta, &TABLE_NOISE).unwrap();
            assert!(s.cross > prev_cross, "cross not increasing at eta = {eta}");
            assert!(s.strong < prev_strong, "strong not decreasing at eta = {eta}");
            prev_cross = s.cross;
            prev_strong = s.strong;
        }
    }
}
