//! Scenario configuration: room, device, and search parameters with
//! defaults, whole-document validation, and JSON round-tripping.
//!
//! Config units are human-facing: lengths in meters, angles in degrees, the
//! detector area in cm². Accessors convert to SI for the channel code.

use std::fs;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{NoiseModel, ReceiverParams};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Room, transmitter, receiver, and search-space description. Every field
/// has a default, so an empty document is a complete scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    /// Room extents `(x, y, z)` in meters; the floor is `z = 0`.
    pub room_m: (f64, f64, f64),
    /// Access-point (beam origin) position; must sit at the ceiling.
    pub ap_position_m: Vec3,
    /// Independently steerable beams at the access point.
    pub n_beams: usize,
    /// Receiver plane height in meters (receivers face straight up).
    pub user_height_m: f64,
    /// Polar steering range in degrees (270° points straight down).
    pub alpha_limits_deg: (f64, f64),
    /// Inclusive integer directivity-index range.
    pub gamma_limits: (u32, u32),
    /// Directivity index of an unsteered beam.
    pub gamma_def: f64,
    /// Detector area in cm².
    pub receiver_area_cm2: f64,
    pub responsivity_a_per_w: f64,
    pub bandwidth_hz: f64,
    /// Noise power spectral density in A²/Hz.
    pub noise_n0_a2_per_hz: f64,
    /// Optical power budget shared by all beams.
    pub total_power_w: f64,
    /// Angular grid step in degrees.
    pub delta_deg: f64,
    /// Master seed; per-trial seeds are derived from it.
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            room_m: (8.0, 8.0, 4.0),
            ap_position_m: Vec3::new(4.0, 4.0, 4.0),
            n_beams: 1,
            user_height_m: 0.85,
            alpha_limits_deg: (200.0, 340.0),
            gamma_limits: (1, 15),
            gamma_def: 5.0,
            receiver_area_cm2: 1.0,
            responsivity_a_per_w: 1.0,
            bandwidth_hz: 2e7,
            noise_n0_a2_per_hz: 2.5e-20,
            total_power_w: 1.0,
            delta_deg: 2.0,
            seed: 1,
        }
    }
}

impl Scenario {
    pub fn receiver(&self) -> ReceiverParams {
        ReceiverParams {
            area_m2: self.receiver_area_cm2 * 1e-4,
            responsivity_a_per_w: self.responsivity_a_per_w,
        }
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            n0_a2_per_hz: self.noise_n0_a2_per_hz,
            bandwidth_hz: self.bandwidth_hz,
        }
    }

    /// Receivers face straight up.
    pub fn rx_orientation(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, 1.0)
    }

    /// Directivity search values: every integer in `gamma_limits`.
    pub fn gammas(&self) -> Vec<f64> {
        (self.gamma_limits.0..=self.gamma_limits.1)
            .map(|g| g as f64)
            .collect()
    }

    /// Checks every field and reports all offenders together.
    pub fn validate(&self) -> Result<()> {
        let mut faults = Vec::new();
        let dim_ok = |v: f64| v.is_finite() && v > 0.0;
        if !(dim_ok(self.room_m.0) && dim_ok(self.room_m.1) && dim_ok(self.room_m.2)) {
            faults.push(format!("room_m {:?} must be positive and finite", self.room_m));
        }
        let ap = self.ap_position_m;
        let inside = (0.0..=self.room_m.0).contains(&ap.x) && (0.0..=self.room_m.1).contains(&ap.y);
        if !(inside && (ap.z - self.room_m.2).abs() <= 1e-9) {
            faults.push(format!(
                "ap_position_m ({}, {}, {}) must lie inside the room at ceiling height {}",
                ap.x, ap.y, ap.z, self.room_m.2
            ));
        }
        if self.n_beams == 0 {
            faults.push("n_beams must be at least 1".into());
        }
        if !(self.user_height_m.is_finite()
            && self.user_height_m >= 0.0
            && self.user_height_m < self.room_m.2)
        {
            faults.push(format!(
                "user_height_m {} must lie in [0, ceiling)",
                self.user_height_m
            ));
        }
        let (alo, ahi) = self.alpha_limits_deg;
        if !(alo.is_finite() && ahi.is_finite() && 180.0 <= alo && alo < ahi && ahi <= 360.0) {
            faults.push(format!(
                "alpha_limits_deg ({alo}, {ahi}) must satisfy 180 <= lo < hi <= 360"
            ));
        }
        let (glo, ghi) = self.gamma_limits;
        if !(1 <= glo && glo <= ghi) {
            faults.push(format!("gamma_limits ({glo}, {ghi}) must satisfy 1 <= lo <= hi"));
        }
        if !(self.gamma_def.is_finite()
            && self.gamma_def >= glo as f64
            && self.gamma_def <= ghi as f64)
        {
            faults.push(format!(
                "gamma_def {} must lie within gamma_limits [{glo}, {ghi}]",
                self.gamma_def
            ));
        }
        if !dim_ok(self.receiver_area_cm2) {
            faults.push(format!(
                "receiver_area_cm2 {} must be positive and finite",
                self.receiver_area_cm2
            ));
        }
        if !dim_ok(self.responsivity_a_per_w) {
            faults.push(format!(
                "responsivity_a_per_w {} must be positive and finite",
                self.responsivity_a_per_w
            ));
        }
        if !dim_ok(self.bandwidth_hz) {
            faults.push(format!("bandwidth_hz {} must be positive and finite", self.bandwidth_hz));
        }
        if !dim_ok(self.noise_n0_a2_per_hz) {
            faults.push(format!(
                "noise_n0_a2_per_hz {} must be positive and finite",
                self.noise_n0_a2_per_hz
            ));
        }
        if !dim_ok(self.total_power_w) {
            faults.push(format!(
                "total_power_w {} must be positive and finite",
                self.total_power_w
            ));
        }
        if !dim_ok(self.delta_deg) {
            faults.push(format!("delta_deg {} must be positive and finite", self.delta_deg));
        }
        if faults.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidScenario(faults))
        }
    }
}

/// Parses and validates a scenario document; an empty file means defaults.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let scenario = if text.trim().is_empty() {
        Scenario::default()
    } else {
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Writes the scenario as pretty JSON; `load_scenario` inverts it exactly.
pub fn emit_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(scenario)
        .map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Scrambles `(master, index)` into an independent per-trial seed.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer over golden-ratio-spaced states.
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Drops `k` receivers uniformly over the room footprint at the receiver
/// height, deterministically in `seed`.
pub fn sample_users(scenario: &Scenario, k: usize, seed: u64) -> Result<Vec<Vec3>> {
    if k == 0 {
        return Err(Error::invalid("a drop needs at least one user"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..k)
        .map(|_| {
            let x = rng.gen_range(0.0..scenario.room_m.0);
            let y = rng.gen_range(0.0..scenario.room_m.1);
            Vec3::new(x, y, scenario.user_height_m)
        })
        .collect())
}

// ── tests ───────────────────────────────────────────────────────────────────
