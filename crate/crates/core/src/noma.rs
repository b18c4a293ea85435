//! Power-domain NOMA within a beam: user pairing, interference-cancellation
//! feasibility, power-split optimization, and TDMA comparison schedules.
//!
//! A pair superimposes both users' signals on one beam with energy split
//! `eta = rho1^2` for the weak user. With squared electrical terms
//! `S_k = (p_n h_{k,n})^2` and inter-beam-plus-noise `I_k`, the SINRs are
//!
//! ```text
//! xi_1(eta)     = eta S_1 / (I_1 + (1-eta) S_1)        (weak user)
//! xi_2(eta)     = (1-eta) S_2 / I_2                    (strong user, after SIC)
//! xi_cross(eta) = eta S_2 / (I_2 + (1-eta) S_2)        (weak message at the strong user)
//! ```
//!
//! Cancellation needs `xi_cross >= xi_star`, which is the linear bound
//! `eta >= eta_lo`. The optimizer majorizes the weak user's nonlinear term by
//! expanding `eta / kappa_2`, `kappa_2(eta) = I_1 + (1-eta) S_1`, to first
//! order at `(a, b)` and re-expanding at each iterate; every other bound is
//! tight at the optimum, so each subproblem is one-dimensional in `eta`.

use crate::channel::{noma_sinrs, sinr_multibeam, NoiseModel};
use crate::error::{Error, Result};
use crate::optim::golden_section_max;

// ── types ───────────────────────────────────────────────────────────────────

/// Two users of one beam selected for superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NomaPair {
    /// User with the weaker serving gain.
    pub weak_user: usize,
    pub strong_user: usize,
    pub serving_beam: usize,
}

/// Energy split of a pair: the weak user's share is `eta = rho1^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NomaCoefficients {
    pub eta: f64,
}

impl NomaCoefficients {
    /// Requires `eta` in `[0.5, 1]` so the weak user's coefficient dominates.
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&eta) {
            return Err(Error::invalid(format!("eta {eta} outside [0.5, 1]")));
        }
        Ok(NomaCoefficients { eta })
    }

    pub fn rho1(&self) -> f64 {
        self.eta.sqrt()
    }

    pub fn rho2(&self) -> f64 {
        (1.0 - self.eta).sqrt()
    }
}

/// What the pair optimizer maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NomaObjective {
    /// `ln R_weak + ln R_strong`.
    LogRate,
    /// `R_weak + R_strong`.
    SumRate,
}

/// Optimized power split for one pair.
#[derive(Debug, Clone)]
pub struct NomaSolution {
    pub coefficients: NomaCoefficients,
    /// Full-slot rates `(weak, strong)` at the chosen split.
    pub rates_bps: (f64, f64),
    /// `xi_cross - xi_star` at the chosen split; never negative.
    pub sic_margin: f64,
    pub objective_mode: NomaObjective,
    /// Objective value at the chosen split.
    pub objective: f64,
    pub converged: bool,
}

/// Tolerances of the expansion loop.
#[derive(Debug, Clone)]
pub struct NomaMmConfig {
    /// Two consecutive steps below this end the loop.
    pub eta_tol: f64,
    pub max_iters: usize,
    /// Interval width for the inner line search.
    pub search_tol: f64,
}

impl Default for NomaMmConfig {
    fn default() -> Self {
        NomaMmConfig {
            eta_tol: 1e-6,
            max_iters: 50,
            search_tol: 1e-9,
        }
    }
}

// ── link terms ──────────────────────────────────────────────────────────────

/// Squared electrical signal and interference-plus-noise terms of a pair.
#[derive(Debug, Clone, Copy)]
struct PairLink {
    s1: f64,
    i1: f64,
    s2: f64,
    i2: f64,
}

fn pair_link(
    pair: &NomaPair,
    gains: &[Vec<f64>],
    powers: &[f64],
    noise: &NoiseModel,
) -> PairLink {
    let n = pair.serving_beam;
    let term = |k: usize| {
        let s = powers[n] * gains[k][n];
        let mut i = noise.power();
        for (m, (&p, &h)) in powers.iter().zip(&gains[k]).enumerate() {
            if m != n {
                let r = p * h;
                i += r * r;
            }
        }
        (s * s, i)
    };
    let (s1, i1) = term(pair.weak_user);
    let (s2, i2) = term(pair.strong_user);
    PairLink { s1, i1, s2, i2 }
}

/// Smallest split satisfying the cancellation bound, or `None` when even
/// `eta = 1` falls short.
fn eta_floor(link: &PairLink, xi_star: f64) -> Option<f64> {
    let bound = if xi_star <= 0.0 {
        0.0
    } else {
        if link.s2 <= 0.0 {
            return None;
        }
        xi_star * (link.i2 + link.s2) / (link.s2 * (1.0 + xi_star))
    };
    let lo = bound.max(0.5);
    if lo > 1.0 {
        None
    } else {
        Some(lo)
    }
}

fn true_rates(link: &PairLink, eta: f64, noise: &NoiseModel) -> (f64, f64) {
    let xi1 = eta * link.s1 / (link.i1 + (1.0 - eta) * link.s1);
    let xi2 = (1.0 - eta) * link.s2 / link.i2;
    (
        noise.bandwidth_hz * (1.0 + xi1).log2(),
        noise.bandwidth_hz * (1.0 + xi2).log2(),
    )
}

fn rate_objective(rates: (f64, f64), mode: NomaObjective) -> f64 {
    match mode {
        NomaObjective::SumRate => rates.0 + rates.1,
        NomaObjective::LogRate => {
            if rates.0 > 0.0 && rates.1 > 0.0 {
                rates.0.ln() + rates.1.ln()
            } else {
                f64::NEG_INFINITY
            }
        }
    }
}

fn cross_sinr(link: &PairLink, eta: f64) -> f64 {
    eta * link.s2 / (link.i2 + (1.0 - eta) * link.s2)
}

// ── operations ──────────────────────────────────────────────────────────────

/// Whether the strong user can decode (and cancel) the weak user's message at
/// split `eta`.
pub fn sic_feasible(
    pair: &NomaPair,
    eta: f64,
    gains: &[Vec<f64>],
    powers: &[f64],
    noise: &NoiseModel,
    xi_star: f64,
) -> Result<bool> {
    let sinrs = noma_sinrs(
        &gains[pair.weak_user],
        &gains[pair.strong_user],
        powers,
        pair.serving_beam,
        eta,
        noise,
    )?;
    Ok(sinrs.cross >= xi_star)
}

/// Pairs one beam's members by extreme serving gains, inward, keeping only
/// candidates that pass the cancellation gate at the most favorable split
/// (`eta = 1`); everyone else is served alone.
pub fn pair_users(
    members: &[usize],
    serving_beam: usize,
    gains: &[Vec<f64>],
    powers: &[f64],
    noise: &NoiseModel,
    xi_star: f64,
) -> Result<(Vec<NomaPair>, Vec<usize>)> {
    let mut order: Vec<usize> = members.to_vec();
    order.sort_by(|&a, &b| {
        gains[a][serving_beam]
            .partial_cmp(&gains[b][serving_beam])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut pairs = Vec::new();
    let mut singles = Vec::new();
    let (mut lo, mut hi) = (0usize, order.len());
    while hi - lo >= 2 {
        hi -= 1;
        let pair = NomaPair {
            weak_user: order[lo],
            strong_user: order[hi],
            serving_beam,
        };
        if sic_feasible(&pair, 1.0, gains, powers, noise, xi_star)? {
            pairs.push(pair);
        } else {
            singles.push(order[lo]);
            singles.push(order[hi]);
        }
        lo += 1;
    }
    if hi - lo == 1 {
        singles.push(order[lo]);
    }
    singles.sort_unstable();
    Ok((pairs, singles))
}

/// Maximizes the surrogate over `eta` in `[lo, 1]`. The clamped weak-user
/// term kinks where the expansion crosses zero, so each side of the
/// breakpoint is searched separately.
fn maximize_surrogate(
    link: &PairLink,
    a: f64,
    b: f64,
    lo: f64,
    mode: NomaObjective,
    noise: &NoiseModel,
    tol: f64,
) -> f64 {
    let surrogate = |eta: f64| {
        let kappa2 = link.i1 + (1.0 - eta) * link.s1;
        let zeta = (link.s1 * (eta / b - (a / (b * b)) * kappa2 + a / b)).max(0.0);
        let xi2 = (1.0 - eta) * link.s2 / link.i2;
        let r1 = noise.bandwidth_hz * (1.0 + zeta).log2();
        let r2 = noise.bandwidth_hz * (1.0 + xi2).log2();
        rate_objective((r1, r2), mode)
    };
    // zeta is affine in eta with positive slope; find its root.
    let slope = link.s1 * (1.0 / b + (a / (b * b)) * link.s1);
    let at_lo = link.s1 * (lo / b - (a / (b * b)) * (link.i1 + (1.0 - lo) * link.s1) + a / b);
    let breakpoint = if at_lo < 0.0 && slope > 0.0 {
        Some((lo - at_lo / slope).min(1.0))
    } else {
        None
    };
    match breakpoint {
        Some(z) if z > lo && z < 1.0 => {
            let left = golden_section_max(lo, z, tol, surrogate);
            let right = golden_section_max(z, 1.0, tol, surrogate);
            if right.1 > left.1 {
                right.0
            } else {
                left.0
            }
        }
        _ => golden_section_max(lo, 1.0, tol, surrogate).0,
    }
}

/// Optimizes the pair's split by successive first-order expansions of the
/// weak user's SINR term; returns `None` when no split can satisfy the
/// cancellation bound (or, in logarithmic mode, serve both users), signalling
/// a TDMA fallback.
pub fn optimize_coefficients(
    pair: &NomaPair,
    gains: &[Vec<f64>],
    powers: &[f64],
    noise: &NoiseModel,
    xi_star: f64,
    mode: NomaObjective,
    cfg: &NomaMmConfig,
) -> Result<Option<NomaSolution>> {
    let link = pair_link(pair, gains, powers, noise);
    let Some(lo) = eta_floor(&link, xi_star) else {
        return Ok(None);
    };

    // Interior expansion start.
    let mut a = 0.75;
    let mut b = link.i1 + 0.25 * link.s1;
    let mut eta = a;
    let mut small_steps = 0;
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        let next = maximize_surrogate(&link, a, b, lo, mode, noise, cfg.search_tol);
        let step = (next - eta).abs();
        eta = next;
        a = eta;
        b = link.i1 + (1.0 - eta) * link.s1;
        small_steps = if step <= cfg.eta_tol { small_steps + 1 } else { 0 };
        if small_steps >= 2 {
            converged = true;
            break;
        }
    }

    let mut eta = eta.clamp(lo, 1.0);
    let mut margin = cross_sinr(&link, eta) - xi_star;
    if margin < 0.0 {
        // The search can sit one rounding below the analytic floor.
        eta = (eta + 1e-12).min(1.0);
        margin = cross_sinr(&link, eta) - xi_star;
        if margin < 0.0 {
            return Ok(None);
        }
    }
    let rates = true_rates(&link, eta, noise);
    let objective = rate_objective(rates, mode);
    if !objective.is_finite() {
        return Ok(None);
    }
    Ok(Some(NomaSolution {
        coefficients: NomaCoefficients::new(eta)?,
        rates_bps: rates,
        sic_margin: margin,
        objective_mode: mode,
        objective,
        converged,
    }))
}

/// Exhaustive scan of `eta in {0.5, 0.5+step, ..., 1}` under the true rates,
/// keeping the best split that passes cancellation. `None` means no feasible
/// grid point (TDMA fallback).
pub fn oracle_1d(
    pair: &NomaPair,
    gains: &[Vec<f64>],
    powers: &[f64],
    noise: &NoiseModel,
    xi_star: f64,
    mode: NomaObjective,
    step: f64,
) -> Result<Option<NomaSolution>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid(format!("grid step {step} must be positive")));
    }
    let link = pair_link(pair, gains, powers, noise);
    let points = (0.5 / step).round() as usize;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..=points {
        let eta = (0.5 + i as f64 * step).min(1.0);
        if cross_sinr(&link, eta) < xi_star {
            continue;
        }
        let objective = rate_objective(true_rates(&link, eta, noise), mode);
        if objective.is_finite() && best.is_none_or(|(obj, _)| objective > obj) {
            best = Some((objective, eta));
        }
    }
    let Some((objective, eta)) = best else {
        return Ok(None);
    };
    let rates = true_rates(&link, eta, noise);
    Ok(Some(NomaSolution {
        coefficients: NomaCoefficients::new(eta)?,
        rates_bps: rates,
        sic_margin: cross_sinr(&link, eta) - xi_star,
        objective_mode: mode,
        objective,
        converged: true,
    }))
}

/// Slot fractions `(tau_pair, tau_single)` for a beam serving `n_pairs`
/// superposition pairs and `n_singles` solo users: a pair jointly occupies a
/// full slot, a solo user half of one.
pub fn tdma_slot_shares(n_pairs: usize, n_singles: usize) -> Result<(f64, f64)> {
    if n_pairs == 0 && n_singles == 0 {
        return Err(Error::invalid("slot shares for an empty schedule"));
    }
    let denom = n_pairs as f64 + n_singles as f64 / 2.0;
    Ok((1.0 / denom, 0.5 / denom))
}

/// Time-shared comparison rates for one beam's schedule: each paired user
/// gets half its pair's slot at full beam power; solo users get their
/// half-weight slot.
pub fn tdma_rates(
    pairs: &[NomaPair],
    singles: &[usize],
    gains: &[Vec<f64>],
    powers: &[f64],
    serving_beam: usize,
    noise: &NoiseModel,
) -> Result<Vec<(usize, f64)>> {
    let (tau_pair, tau_single) = tdma_slot_shares(pairs.len(), singles.len())?;
    let full = |k: usize| {
        let sinr = sinr_multibeam(&gains[k], powers, serving_beam, noise);
        noise.bandwidth_hz * (1.0 + sinr).log2()
    };
    let mut rates = Vec::with_capacity(2 * pairs.len() + singles.len());
    for pair in pairs {
        if pair.serving_beam != serving_beam {
            return Err(Error::invalid(format!(
                "pair on beam {} scheduled for beam {serving_beam}",
                pair.serving_beam
            )));
        }
        rates.push((pair.weak_user, 0.5 * tau_pair * full(pair.weak_user)));
        rates.push((pair.strong_user, 0.5 * tau_pair * full(pair.strong_user)));
    }
    for &k in singles {
        rates.push((k, tau_single * full(k)));
    }
    Ok(rates)
}

/// How a formed pair ends up being served.
#[derive(Debug, Clone)]
pub enum PairService {
    Noma(NomaSolution),
    /// The optimizer could not beat time-sharing; the pair splits its slot.
    Tdma,
}

/// Optimizes a pair and keeps superposition only when its sum rate reaches
/// the pair's time-shared sum rate.
pub fn serve_pair(
    pair: &NomaPair,
    gains: &[Vec<f64>],
    powers: &[f64],
    noise: &NoiseModel,
    xi_star: f64,
    mode: NomaObjective,
    cfg: &NomaMmConfig,
) -> Result<PairService> {
    let Some(solution) = optimize_coefficients(pair, gains, powers, noise, xi_star, mode, cfg)?
    else {
        return Ok(PairService::Tdma);
    };
    let full = |k: usize| {
        let sinr = sinr_multibeam(&gains[k], powers, pair.serving_beam, noise);
        noise.bandwidth_hz * (1.0 + sinr).log2()
    };
    let tdma_sum = 0.5 * (full(pair.weak_user) + full(pair.strong_user));
    if solution.rates_bps.0 + solution.rates_bps.1 >= tdma_sum {
        Ok(PairService::Noma(solution))
    } else {
        Ok(PairService::Tdma)
    }
}

// ── tests ───────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const NOISE: NoiseModel = NoiseModel {
        n0_a2_per_hz: 2.5e-20,
        bandwidth_hz: 2e7,
    };

    /// One beam, two users with the given serving gains (no interference).
    fn lone_beam(weak_gain: f64, strong_gain: f64) -> (NomaPair, Vec<Vec<f64>>, Vec<f64>) {
        let pair = NomaPair {
            weak_user: 0,
            strong_user: 1,
            serving_beam: 0,
        };
        (pair, vec![vec![weak_gain], vec![strong_gain]], vec![1.0])
    }

    /// Two beams; the pair rides beam 0 and sees beam 1 as interference.
    fn interfered_pair(rng: &mut ChaCha8Rng) -> (NomaPair, Vec<Vec<f64>>, Vec<f64>) {
        let pair = NomaPair {
            weak_user: 0,
            strong_user: 1,
            serving_beam: 0,
        };
        let weak_serving: f64 = rng.gen_range(0.1..0.5) * 1e-5;
        let strong_serving: f64 = rng.gen_range(2.0..10.0) * weak_serving;
        let gains = vec![
            vec![weak_serving, rng.gen_range(0.01..0.3) * weak_serving],
            vec![strong_serving, rng.gen_range(0.01..0.3) * strong_serving],
        ];
        (pair, gains, vec![0.6, 0.4])
    }

    #[test]
    fn energy_split_is_exact_in_the_upper_half() {
        for i in 0..=100 {
            let eta = 0.5 + 0.005 * i as f64;
            let c = NomaCoefficients::new(eta.min(1.0)).unwrap();
            // In [0.5, 1] the complement is exact, so the split sums to one.
            assert_eq!(c.eta + (1.0 - c.eta), 1.0);
            assert!((c.rho1() * c.rho1() - c.eta).abs() < 1e-15);
            assert!(c.rho1() >= c.rho2());
        }
        assert!(NomaCoefficients::new(0.3).is_err());
        assert!(NomaCoefficients::new(1.1).is_err());
    }

    #[test]
    fn cancellation_feasibility_is_monotone_in_eta() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (pair, gains, powers) = interfered_pair(&mut rng);
            let link = pair_link(&pair, &gains, &powers, &NOISE);
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=100 {
                let eta = i as f64 / 100.0;
                let cross = cross_sinr(&link, eta);
                assert!(cross >= prev, "cross SINR dipped at eta={eta}");
                prev = cross;
            }
        }
    }

    #[test]
    fn full_split_reduces_to_the_strong_user_snr() {
        let (pair, gains, powers) = lone_beam(2e-6, 8e-6);
        let s = powers[0] * gains[1][0];
        let snr = s * s / NOISE.power();
        // eta = 1 strips the intra-beam term, so the gate compares plain SNR.
        assert!(sic_feasible(&pair, 1.0, &gains, &powers, &NOISE, snr * 0.999).unwrap());
        assert!(!sic_feasible(&pair, 1.0, &gains, &powers, &NOISE, snr * 1.001).unwrap());
        // eta = 0 carries no pilot power at all.
        assert!(!sic_feasible(&pair, 0.0, &gains, &powers, &NOISE, 1e-9).unwrap());
    }

    #[test]
    fn equal_gains_make_cross_equal_weak_sinr() {
        let (pair, gains, powers) = lone_beam(5e-6, 5e-6);
        let link = pair_link(&pair, &gains, &powers, &NOISE);
        for i in 0..=20 {
            let eta = i as f64 / 20.0;
            let sinrs = noma_sinrs(&gains[0], &gains[1], &powers, 0, eta, &NOISE).unwrap();
            assert_eq!(sinrs.cross, sinrs.weak);
            let drift = (cross_sinr(&link, eta) - sinrs.cross).abs();
            assert!(drift <= 1e-12 * sinrs.cross.max(1.0));
        }
    }

    #[test]
    fn pairing_pairs_extremes_and_leaves_the_middle_single() {
        // Serving gains increase with the user index.
        let gains: Vec<Vec<f64>> = (1..=5).map(|k| vec![k as f64 * 2e-6]).collect();
        let members = [2usize, 0, 4, 1, 3];
        let powers = [1.0];
        let (pairs, singles) =
            pair_users(&members, 0, &gains, &powers, &NOISE, 3.0).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!((pairs[0].weak_user, pairs[0].strong_user), (0, 4));
        assert_eq!((pairs[1].weak_user, pairs[1].strong_user), (1, 3));
        assert_eq!(singles, vec![2]);

        let (pairs, singles) =
            pair_users(&members, 0, &gains, &powers, &NOISE, f64::INFINITY).unwrap();
        assert!(pairs.is_empty());
        assert_eq!(singles, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn gain_ties_fall_back_to_index_order() {
        let gains = vec![vec![4e-6], vec![4e-6]];
        let (pairs, _) = pair_users(&[1, 0], 0, &gains, &[1.0], &NOISE, 0.1).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!((pairs[0].weak_user, pairs[0].strong_user), (0, 1));
    }

    #[test]
    fn optimizer_tracks_the_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for mode in [NomaObjective::LogRate, NomaObjective::SumRate] {
            let mut checked = 0;
            while checked < 10 {
                let (pair, gains, powers) = interfered_pair(&mut rng);
                if !sic_feasible(&pair, 1.0, &gains, &powers, &NOISE, 3.0).unwrap() {
                    continue;
                }
                checked += 1;
                let mm = optimize_coefficients(
                    &pair,
                    &gains,
                    &powers,
                    &NOISE,
                    3.0,
                    mode,
                    &NomaMmConfig::default(),
                )
                .unwrap()
                .expect("gate passed, a split must exist");
                let oracle =
                    oracle_1d(&pair, &gains, &powers, &NOISE, 3.0, mode, 1e-4)
                        .unwrap()
                        .unwrap();
                let tol = 0.01 * oracle.objective.abs();
                assert!(
                    oracle.objective - mm.objective <= tol,
                    "{mode:?}: mm {} trails oracle {}",
                    mm.objective,
                    oracle.objective
                );
                assert!(mm.sic_margin >= 0.0);
                assert!(oracle.sic_margin >= 0.0);
            }
        }
    }

    #[test]
    fn oracle_dominates_the_optimizer_up_to_grid_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut checked = 0;
        while checked < 10 {
            let (pair, gains, powers) = interfered_pair(&mut rng);
            if !sic_feasible(&pair, 1.0, &gains, &powers, &NOISE, 3.0).unwrap() {
                continue;
            }
            checked += 1;
            let mm = optimize_coefficients(
                &pair,
                &gains,
                &powers,
                &NOISE,
                3.0,
                NomaObjective::LogRate,
                &NomaMmConfig::default(),
            )
            .unwrap()
            .unwrap();
            // A 1e-6 grid pins the continuous optimum far below the slack.
            let oracle = oracle_1d(
                &pair,
                &gains,
                &powers,
                &NOISE,
                3.0,
                NomaObjective::LogRate,
                1e-6,
            )
            .unwrap()
            .unwrap();
            assert!(oracle.objective >= mm.objective - 1e-9);
        }
    }

    #[test]
    fn resplitting_one_pair_leaves_other_beams_untouched() {
        // A bystander on beam 1 sees only the total power of beam 0.
        let gains = vec![
            vec![3e-6, 1e-6],
            vec![9e-6, 2e-6],
            vec![1e-6, 7e-6],
        ];
        let powers = [0.5, 0.5];
        let bystander = sinr_multibeam(&gains[2], &powers, 1, &NOISE);
        for eta in [0.5, 0.8, 1.0] {
            let sinrs = noma_sinrs(&gains[0], &gains[1], &powers, 0, eta, &NOISE).unwrap();
            assert!(sinrs.weak.is_finite());
            assert_eq!(sinr_multibeam(&gains[2], &powers, 1, &NOISE), bystander);
        }
    }

    #[test]
    fn slot_shares_match_the_schedule_arithmetic() {
        assert_eq!(tdma_slot_shares(1, 0).unwrap(), (1.0, 0.5));
        assert_eq!(tdma_slot_shares(1, 2).unwrap(), (0.5, 0.25));
        let (_, tau_single) = tdma_slot_shares(0, 4).unwrap();
        assert_eq!(tau_single, 0.25);
        assert!(tdma_slot_shares(0, 0).is_err());
    }

    #[test]
    fn tdma_rates_split_the_pair_slot() {
        let gains = vec![vec![4e-6], vec![8e-6], vec![6e-6]];
        let pair = NomaPair {
            weak_user: 0,
            strong_user: 1,
            serving_beam: 0,
        };
        let rows = tdma_rates(&[pair], &[2], &gains, &[1.0], 0, &NOISE).unwrap();
        // tau_pair = 2/3: the pair splits it, the single gets 1/3.
        let full = |k: usize| {
            let sinr = sinr_multibeam(&gains[k], &[1.0], 0, &NOISE);
            NOISE.bandwidth_hz * (1.0 + sinr).log2()
        };
        for (row, k) in rows.iter().zip([0usize, 1, 2]) {
            assert_eq!(row.0, k);
            assert!((row.1 - full(k) / 3.0).abs() <= 1e-9 * full(k));
        }
    }

    #[test]
    fn accepted_pairs_never_lose_to_time_sharing() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut served = 0;
        for _ in 0..40 {
            let (pair, gains, powers) = interfered_pair(&mut rng);
            if !sic_feasible(&pair, 1.0, &gains, &powers, &NOISE, 3.0).unwrap() {
                continue;
            }
            let service = serve_pair(
                &pair,
                &gains,
                &powers,
                &NOISE,
                3.0,
                NomaObjective::LogRate,
                &NomaMmConfig::default(),
            )
            .unwrap();
            if let PairService::Noma(sol) = service {
                served += 1;
                let full = |k: usize| {
                    let sinr = sinr_multibeam(&gains[k], &powers, 0, &NOISE);
                    NOISE.bandwidth_hz * (1.0 + sinr).log2()
                };
                let tdma_sum = 0.5 * (full(0) + full(1));
                assert!(sol.rates_bps.0 + sol.rates_bps.1 >= tdma_sum);
                assert!(sol.sic_margin >= 0.0);
            }
        }
        assert!(served > 0, "no pair ever beat time sharing");
    }
}
