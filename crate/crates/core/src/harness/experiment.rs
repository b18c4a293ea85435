//! Experiment orchestration: seeded Monte Carlo trials that compose the
//! steering, clustering, power, and NOMA solvers into named schemes and
//! emit figure-ready rate tables.
//!
//! Trials are independent: each derives its own seed from the master seed
//! and the `(K index, trial)` counter, so a sweep reuses the same user drops
//! across beam counts and schemes (paired comparisons), and the report is
//! byte-identical for any thread count. A trial in which any scheme fails is
//! excluded as a whole and counted in the metadata.
//!
//! Row conventions beyond the common per-user rows:
//! - `noma_coeff_sweep` emits one row per accepted pair: `user_id` is the
//!   weak user, `rate_bps` the pair's superposed sum rate, `sum_rate_bps`
//!   the same pair's time-shared sum rate, and `objective` the optimized
//!   split (0 when the pair fell back to time sharing).
//! - `noma_threshold_sweep` emits one row per trial per setting, the setting
//!   spelled in the experiment name (`.../xi_star=2`): `rate_bps` counts
//!   candidate pairs, `sum_rate_bps` the feasible ones, `objective` their
//!   ratio.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{link_rate, los_gain, sinr_multibeam, BeamState, ReceiverParams};
use crate::clustering::{vuc, MultiBeamSolution, VucConfig};
use crate::error::{Error, Result};
use crate::geometry::{search_grid_for_users, Vec3};
use crate::harness::report::{RateReport, RateRow, ReportMetadata};
use crate::harness::scenario::{sample_users, trial_seed, Scenario};
use crate::noma::{pair_users, serve_pair, sic_feasible, NomaMmConfig, NomaObjective, NomaPair,
    PairService};
use crate::power::{power_objective, sca_power_opt, PowerObjective, ScaConfig};
use crate::steering::{
    baseline_genie_fast, baseline_no_steering, build_gain_table, solve_enumeration,
};

// ── spec types ──────────────────────────────────────────────────────────────

/// The figure-shaped experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    SingleBeamSweep,
    MultiBeamSweep,
    BeamCountSweep,
    PowerOptSweep,
    NomaCoeffSweep,
    NomaThresholdSweep,
    CdfReport,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::SingleBeamSweep => "single_beam_sweep",
            ExperimentKind::MultiBeamSweep => "multi_beam_sweep",
            ExperimentKind::BeamCountSweep => "beam_count_sweep",
            ExperimentKind::PowerOptSweep => "power_opt_sweep",
            ExperimentKind::NomaCoeffSweep => "noma_coeff_sweep",
            ExperimentKind::NomaThresholdSweep => "noma_threshold_sweep",
            ExperimentKind::CdfReport => "cdf_report",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_beam_sweep" => Ok(ExperimentKind::SingleBeamSweep),
            "multi_beam_sweep" => Ok(ExperimentKind::MultiBeamSweep),
            "beam_count_sweep" => Ok(ExperimentKind::BeamCountSweep),
            "power_opt_sweep" => Ok(ExperimentKind::PowerOptSweep),
            "noma_coeff_sweep" => Ok(ExperimentKind::NomaCoeffSweep),
            "noma_threshold_sweep" => Ok(ExperimentKind::NomaThresholdSweep),
            "cdf_report" => Ok(ExperimentKind::CdfReport),
            other => Err(Error::invalid(format!("unknown experiment kind {other:?}"))),
        }
    }
}

/// Transmission schemes a trial can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// One fixed beam straight down at the default directivity.
    NoSteering,
    /// One beam, orientation optimized, directivity fixed.
    Sbs,
    /// One beam, orientation and directivity optimized.
    Sbsf,
    /// Idealized per-user re-pointing (upper bound).
    GaFbs,
    /// All beams carry the same stream; amplitudes add at the receiver.
    SingleStream,
    /// Each beam carries its own stream; other beams interfere.
    MultiStream,
    /// Multi-stream with the power budget reallocated for sum rate.
    PowerOptSum,
    /// Multi-stream with the power budget reallocated for log utility.
    PowerOptLog,
    /// Multi-stream with in-beam superposition pairs where feasible.
    Noma,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::NoSteering => "no_steering",
            Scheme::Sbs => "sbs",
            Scheme::Sbsf => "sbsf",
            Scheme::GaFbs => "ga_fbs",
            Scheme::SingleStream => "single_stream",
            Scheme::MultiStream => "multi_stream",
            Scheme::PowerOptSum => "power_opt_sum",
            Scheme::PowerOptLog => "power_opt_log",
            Scheme::Noma => "noma",
        }
    }

    fn needs_clustering(&self) -> bool {
        matches!(
            self,
            Scheme::SingleStream
                | Scheme::MultiStream
                | Scheme::PowerOptSum
                | Scheme::PowerOptLog
                | Scheme::Noma
        )
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no_steering" => Ok(Scheme::NoSteering),
            "sbs" => Ok(Scheme::Sbs),
            "sbsf" => Ok(Scheme::Sbsf),
            "ga_fbs" => Ok(Scheme::GaFbs),
            "single_stream" => Ok(Scheme::SingleStream),
            "multi_stream" => Ok(Scheme::MultiStream),
            "power_opt_sum" => Ok(Scheme::PowerOptSum),
            "power_opt_log" => Ok(Scheme::PowerOptLog),
            "noma" => Ok(Scheme::Noma),
            other => Err(Error::invalid(format!("unknown scheme {other:?}"))),
        }
    }
}

/// A full experiment description: what to sweep, how often, with which
/// schemes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub k_values: Vec<usize>,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub schemes: Vec<Scheme>,
    /// Cancellation threshold for pairing and pair optimization.
    pub xi_star: f64,
    /// What the pair split maximizes.
    pub noma_objective: NomaObjective,
    /// Thresholds swept by `noma_threshold_sweep`.
    pub xi_sweep: Vec<f64>,
    /// Strong-user coefficients swept by `noma_threshold_sweep`.
    pub rho2_sweep: Vec<f64>,
}

impl ExperimentSpec {
    /// The desk-scale default configuration for each experiment family.
    pub fn preset(kind: ExperimentKind) -> Self {
        let base = |k_values: Vec<usize>, n_values: Vec<usize>, trials, schemes| ExperimentSpec {
            kind,
            k_values,
            n_values,
            trials,
            schemes,
            xi_star: 3.0,
            noma_objective: NomaObjective::LogRate,
            xi_sweep: vec![1.0, 2.0, 3.0, 5.0, 10.0],
            rho2_sweep: vec![0.1, 0.2, 0.3],
        };
        match kind {
            ExperimentKind::SingleBeamSweep => base(
                (1..=10).collect(),
                vec![1],
                200,
                vec![Scheme::NoSteering, Scheme::Sbs, Scheme::Sbsf, Scheme::GaFbs],
            ),
            ExperimentKind::MultiBeamSweep => base(
                (3..=10).collect(),
                vec![3],
                200,
                vec![Scheme::NoSteering, Scheme::SingleStream, Scheme::MultiStream],
            ),
            ExperimentKind::BeamCountSweep => base(
                vec![10],
                (1..=5).collect(),
                100,
                vec![Scheme::NoSteering, Scheme::SingleStream, Scheme::MultiStream],
            ),
            ExperimentKind::PowerOptSweep => base(
                (6..=10).collect(),
                vec![3],
                100,
                vec![Scheme::MultiStream, Scheme::PowerOptSum, Scheme::PowerOptLog],
            ),
            ExperimentKind::NomaCoeffSweep => {
                base(vec![10], vec![3], 200, vec![Scheme::Noma])
            }
            ExperimentKind::NomaThresholdSweep => {
                base(vec![10], vec![3], 200, vec![Scheme::Noma])
            }
            ExperimentKind::CdfReport => base(
                vec![10],
                vec![3],
                500,
                vec![
                    Scheme::NoSteering,
                    Scheme::Sbsf,
                    Scheme::SingleStream,
                    Scheme::MultiStream,
                    Scheme::PowerOptSum,
                    Scheme::Noma,
                ],
            ),
        }
    }

    /// Rejects structurally unusable sweeps. Zero trials stay legal: they
    /// produce an empty (but well-formed) report.
    pub fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() || self.k_values.iter().any(|&k| k == 0) {
            return Err(Error::invalid("k_values must be non-empty positive counts"));
        }
        if self.n_values.is_empty() || self.n_values.iter().any(|&n| n == 0) {
            return Err(Error::invalid("n_values must be non-empty positive counts"));
        }
        if self.schemes.is_empty() {
            return Err(Error::invalid("at least one scheme is required"));
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return Err(Error::invalid(format!("scheme {s} listed twice")));
            }
        }
        if !(self.xi_star.is_finite() && self.xi_star >= 0.0) {
            return Err(Error::invalid(format!("xi_star {} must be >= 0", self.xi_star)));
        }
        if self.kind == ExperimentKind::NomaThresholdSweep {
            if self.xi_sweep.is_empty() || self.rho2_sweep.is_empty() {
                return Err(Error::invalid("threshold sweep needs xi and rho2 values"));
            }
            if self.rho2_sweep.iter().any(|&r| !(0.0 < r && r < 1.0)) {
                return Err(Error::invalid("rho2 sweep values must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

// ── scheme evaluation ───────────────────────────────────────────────────────

/// Per-user outcome of one scheme in one trial.
struct SchemeOutcome {
    /// `(user, beam, delivered_rate)` — beam < 0 when no single beam serves.
    per_user: Vec<(i64, i64, f64)>,
    sum_rate_bps: f64,
    objective: f64,
}

fn log_utility(delivered: impl Iterator<Item = f64>) -> f64 {
    let mut acc = 0.0;
    for d in delivered {
        if d <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += d.ln();
    }
    acc
}

fn gain_matrix(
    users: &[Vec3],
    rx_orientation: Vec3,
    rx: &ReceiverParams,
    beams: &[BeamState],
) -> Result<Vec<Vec<f64>>> {
    users
        .iter()
        .map(|&u| beams.iter().map(|b| los_gain(b, u, rx_orientation, rx)).collect())
        .collect()
}

/// Everything a trial computes once and shares across schemes.
struct TrialContext<'a> {
    scenario: &'a Scenario,
    users: Vec<Vec3>,
    n_beams: usize,
    /// Lazily built clustering solution plus its gain matrix.
    clustered: Option<(MultiBeamSolution, Vec<Vec<f64>>)>,
}

impl<'a> TrialContext<'a> {
    fn new(scenario: &'a Scenario, users: Vec<Vec3>, n_beams: usize) -> Self {
        TrialContext { scenario, users, n_beams, clustered: None }
    }

    fn vuc_config(&self) -> VucConfig {
        VucConfig {
            alpha_limits_deg: self.scenario.alpha_limits_deg,
            delta_deg: self.scenario.delta_deg,
            gammas: self.scenario.gammas(),
            max_iters: 20,
            solver: Default::default(),
        }
    }

    fn beam_powers(&self) -> Vec<f64> {
        vec![self.scenario.total_power_w / self.n_beams as f64; self.n_beams]
    }

    fn clustered(&mut self) -> Result<&(MultiBeamSolution, Vec<Vec<f64>>)> {
        if self.clustered.is_none() {
            let s = self.scenario;
            let solution = vuc(
                &self.users,
                s.rx_orientation(),
                &s.receiver(),
                s.ap_position_m,
                &self.beam_powers(),
                &s.noise(),
                &self.vuc_config(),
            )?;
            let gains =
                gain_matrix(&self.users, s.rx_orientation(), &s.receiver(), &solution.beams)?;
            self.clustered = Some((solution, gains));
        }
        Ok(self.clustered.as_ref().unwrap())
    }

    fn eval(&mut self, scheme: Scheme, xi_star: f64, noma_mode: NomaObjective) -> Result<SchemeOutcome> {
        let s = self.scenario;
        let (rx, noise, up, ap) = (s.receiver(), s.noise(), s.rx_orientation(), s.ap_position_m);
        let k = self.users.len();
        let kf = k as f64;
        match scheme {
            Scheme::NoSteering => {
                let sol = baseline_no_steering(
                    &self.users, up, &rx, ap, s.gamma_def, s.total_power_w, &noise,
                )?;
                let per_user = (0..k)
                    .map(|i| (i as i64, 0, sol.tau[i] * sol.per_user_rate_bps[i]))
                    .collect::<Vec<_>>();
                Ok(SchemeOutcome {
                    sum_rate_bps: sol.sum_rate_bps(),
                    objective: sol.objective,
                    per_user,
                })
            }
            Scheme::Sbs | Scheme::Sbsf => {
                let gammas = if scheme == Scheme::Sbs {
                    vec![s.gamma_def]
                } else {
                    s.gammas()
                };
                let grid =
                    search_grid_for_users(&self.users, ap, s.alpha_limits_deg, s.delta_deg, &gammas)?;
                let table = build_gain_table(&self.users, up, &rx, ap, grid)?;
                let sol = solve_enumeration(&table, s.total_power_w, &noise)?;
                let per_user = (0..k)
                    .map(|i| (i as i64, 0, sol.tau[i] * sol.per_user_rate_bps[i]))
                    .collect::<Vec<_>>();
                Ok(SchemeOutcome {
                    sum_rate_bps: sol.sum_rate_bps(),
                    objective: sol.objective,
                    per_user,
                })
            }
            Scheme::GaFbs => {
                let genie = baseline_genie_fast(
                    &self.users,
                    up,
                    &rx,
                    ap,
                    s.gamma_limits.1 as f64,
                    s.total_power_w,
                    &noise,
                )?;
                let per_user: Vec<_> = genie
                    .per_user_rate_bps
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| (i as i64, 0, r / kf))
                    .collect();
                Ok(SchemeOutcome {
                    sum_rate_bps: genie.sum_rate_bps,
                    objective: log_utility(per_user.iter().map(|&(_, _, d)| d)),
                    per_user,
                })
            }
            Scheme::SingleStream => {
                let per_beam_power = s.total_power_w / self.n_beams as f64;
                let tau = 1.0 / kf;
                let (_, gains) = self.clustered()?;
                let per_user: Vec<_> = gains
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        let coherent: f64 = row.iter().sum();
                        (i as i64, -1, tau * link_rate(coherent, per_beam_power, &noise))
                    })
                    .collect();
                Ok(SchemeOutcome {
                    sum_rate_bps: per_user.iter().map(|&(_, _, d)| d).sum(),
                    objective: log_utility(per_user.iter().map(|&(_, _, d)| d)),
                    per_user,
                })
            }
            Scheme::MultiStream => {
                let (solution, _) = self.clustered()?;
                let per_user: Vec<_> = (0..k)
                    .map(|i| {
                        (
                            i as i64,
                            solution.assignment.assignment[i] as i64,
                            solution.tau[i] * solution.per_user_rate_bps[i],
                        )
                    })
                    .collect();
                Ok(SchemeOutcome {
                    sum_rate_bps: solution.sum_rate_bps(),
                    objective: solution.objective,
                    per_user,
                })
            }
            Scheme::PowerOptSum | Scheme::PowerOptLog => {
                let objective = if scheme == Scheme::PowerOptSum {
                    PowerObjective::SumRate
                } else {
                    PowerObjective::LogRate
                };
                let p_max = s.total_power_w;
                let (solution, gains) = self.clustered()?;
                let assignment = solution.assignment.clone();
                let gains = gains.clone();
                let (alloc, _) = sca_power_opt(
                    &assignment,
                    &gains,
                    p_max,
                    &noise,
                    objective,
                    &ScaConfig::default(),
                )?;
                let tau = assignment.tau();
                let per_user: Vec<_> = (0..k)
                    .map(|i| {
                        let serving = assignment.assignment[i];
                        let sinr = sinr_multibeam(&gains[i], &alloc.powers, serving, &noise);
                        let rate = noise.bandwidth_hz * (1.0 + sinr).log2();
                        (i as i64, serving as i64, tau[i] * rate)
                    })
                    .collect();
                let value = power_objective(
                    &gains,
                    &assignment.assignment,
                    &tau,
                    &alloc.powers,
                    &noise,
                    objective,
                );
                Ok(SchemeOutcome {
                    sum_rate_bps: per_user.iter().map(|&(_, _, d)| d).sum(),
                    objective: value,
                    per_user,
                })
            }
            Scheme::Noma => {
                let (solution, gains) = self.clustered()?;
                let powers: Vec<f64> = solution.beams.iter().map(|b| b.power_w).collect();
                let members = solution.assignment.members.clone();
                let gains = gains.clone();
                let mut delivered = vec![0.0f64; k];
                let mut serving = vec![0i64; k];
                for (beam, beam_members) in members.iter().enumerate() {
                    if beam_members.is_empty() {
                        continue;
                    }
                    let (pairs, singles) = pair_users(
                        beam_members, beam, &gains, &powers, &noise, xi_star,
                    )?;
                    let shares = crate::noma::tdma_slot_shares(pairs.len(), singles.len())?;
                    let full = |u: usize| {
                        let sinr = sinr_multibeam(&gains[u], &powers, beam, &noise);
                        noise.bandwidth_hz * (1.0 + sinr).log2()
                    };
                    for pair in &pairs {
                        let service = serve_pair(
                            pair,
                            &gains,
                            &powers,
                            &noise,
                            xi_star,
                            noma_mode,
                            &NomaMmConfig::default(),
                        )?;
                        match service {
                            PairService::Noma(sol) => {
                                delivered[pair.weak_user] = shares.0 * sol.rates_bps.0;
                                delivered[pair.strong_user] = shares.0 * sol.rates_bps.1;
                            }
                            PairService::Tdma => {
                                delivered[pair.weak_user] = 0.5 * shares.0 * full(pair.weak_user);
                                delivered[pair.strong_user] =
                                    0.5 * shares.0 * full(pair.strong_user);
                            }
                        }
                        serving[pair.weak_user] = beam as i64;
                        serving[pair.strong_user] = beam as i64;
                    }
                    for &u in &singles {
                        delivered[u] = shares.1 * full(u);
                        serving[u] = beam as i64;
                    }
                }
                let per_user: Vec<_> = (0..k)
                    .map(|i| (i as i64, serving[i], delivered[i]))
                    .collect();
                Ok(SchemeOutcome {
                    sum_rate_bps: delivered.iter().sum(),
                    objective: log_utility(delivered.iter().copied()),
                    per_user,
                })
            }
        }
    }
}

// ── trial execution ─────────────────────────────────────────────────────────

fn standard_trial(
    scenario: &Scenario,
    spec: &ExperimentSpec,
    k: usize,
    n: usize,
    trial: i64,
    seed: u64,
) -> Result<Vec<RateRow>> {
    let users = sample_users(scenario, k, seed)?;
    let mut ctx = TrialContext::new(scenario, users, n);
    let mut rows = Vec::new();
    for &scheme in &spec.schemes {
        if scheme.needs_clustering() && k < n {
            return Err(Error::invalid(format!(
                "{k} users cannot populate {n} beams for scheme {scheme}"
            )));
        }
        let outcome = ctx.eval(scheme, spec.xi_star, spec.noma_objective)?;
        for &(user, beam, rate) in &outcome.per_user {
            rows.push(RateRow {
                experiment: spec.kind.name().into(),
                scheme: scheme.name().into(),
                trial,
                seed,
                k,
                n,
                user_id: user,
                beam_id: beam,
                rate_bps: rate,
                sum_rate_bps: outcome.sum_rate_bps,
                objective: outcome.objective,
            });
        }
    }
    Ok(rows)
}

/// Candidate pairs of one trial: extremes inward per beam, no feasibility
/// gate, so the same set is judged under every threshold setting.
fn candidate_pairs(solution: &MultiBeamSolution, gains: &[Vec<f64>]) -> Vec<NomaPair> {
    let mut out = Vec::new();
    for (beam, members) in solution.assignment.members.iter().enumerate() {
        let mut order = members.clone();
        order.sort_by(|&a, &b| {
            gains[a][beam].partial_cmp(&gains[b][beam]).unwrap().then(a.cmp(&b))
        });
        let (mut lo, mut hi) = (0usize, order.len());
        while hi - lo >= 2 {
            hi -= 1;
            out.push(NomaPair {
                weak_user: order[lo],
                strong_user: order[hi],
                serving_beam: beam,
            });
            lo += 1;
        }
    }
    out
}

fn threshold_trial(
    scenario: &Scenario,
    spec: &ExperimentSpec,
    k: usize,
    n: usize,
    trial: i64,
    seed: u64,
) -> Result<Vec<RateRow>> {
    let users = sample_users(scenario, k, seed)?;
    let mut ctx = TrialContext::new(scenario, users, n);
    let (solution, gains) = ctx.clustered()?;
    let powers: Vec<f64> = solution.beams.iter().map(|b| b.power_w).collect();
    let noise = scenario.noise();
    let candidates = candidate_pairs(solution, gains);
    let mut rows = Vec::new();
    let mut push = |label: String, feasible: usize| {
        let total = candidates.len();
        rows.push(RateRow {
            experiment: label,
            scheme: Scheme::Noma.name().into(),
            trial,
            seed,
            k,
            n,
            user_id: -1,
            beam_id: -1,
            rate_bps: total as f64,
            sum_rate_bps: feasible as f64,
            objective: if total == 0 { 0.0 } else { feasible as f64 / total as f64 },
        });
    };
    for &xi in &spec.xi_sweep {
        let mut feasible = 0;
        for pair in &candidates {
            if sic_feasible(pair, 1.0, gains, &powers, &noise, xi)? {
                feasible += 1;
            }
        }
        push(format!("{}/xi_star={xi}", spec.kind.name()), feasible);
    }
    for &rho2 in &spec.rho2_sweep {
        let eta = 1.0 - rho2 * rho2;
        let mut feasible = 0;
        for pair in &candidates {
            if sic_feasible(pair, eta, gains, &powers, &noise, spec.xi_star)? {
                feasible += 1;
            }
        }
        push(format!("{}/rho2={rho2}", spec.kind.name()), feasible);
    }
    Ok(rows)
}

fn coeff_trial(
    scenario: &Scenario,
    spec: &ExperimentSpec,
    k: usize,
    n: usize,
    trial: i64,
    seed: u64,
) -> Result<Vec<RateRow>> {
    let users = sample_users(scenario, k, seed)?;
    let mut ctx = TrialContext::new(scenario, users, n);
    let (solution, gains) = ctx.clustered()?;
    let powers: Vec<f64> = solution.beams.iter().map(|b| b.power_w).collect();
    let noise = scenario.noise();
    let mut rows = Vec::new();
    for (beam, members) in solution.assignment.members.iter().enumerate() {
        let (pairs, _) = pair_users(members, beam, gains, &powers, &noise, spec.xi_star)?;
        for pair in &pairs {
            let full = |u: usize| {
                let sinr = sinr_multibeam(&gains[u], &powers, beam, &noise);
                noise.bandwidth_hz * (1.0 + sinr).log2()
            };
            let tdma_sum = 0.5 * (full(pair.weak_user) + full(pair.strong_user));
            let service = serve_pair(
                pair,
                gains,
                &powers,
                &noise,
                spec.xi_star,
                spec.noma_objective,
                &NomaMmConfig::default(),
            )?;
            let (noma_sum, eta) = match service {
                PairService::Noma(sol) => {
                    (sol.rates_bps.0 + sol.rates_bps.1, sol.coefficients.eta)
                }
                PairService::Tdma => (tdma_sum, 0.0),
            };
            rows.push(RateRow {
                experiment: spec.kind.name().into(),
                scheme: Scheme::Noma.name().into(),
                trial,
                seed,
                k,
                n,
                user_id: pair.weak_user as i64,
                beam_id: pair.serving_beam as i64,
                rate_bps: noma_sum,
                sum_rate_bps: tdma_sum,
                objective: eta,
            });
        }
    }
    Ok(rows)
}

fn run_trial(
    scenario: &Scenario,
    spec: &ExperimentSpec,
    k: usize,
    n: usize,
    trial: i64,
    seed: u64,
) -> Result<Vec<RateRow>> {
    match spec.kind {
        ExperimentKind::NomaThresholdSweep => threshold_trial(scenario, spec, k, n, trial, seed),
        ExperimentKind::NomaCoeffSweep => coeff_trial(scenario, spec, k, n, trial, seed),
        _ => standard_trial(scenario, spec, k, n, trial, seed),
    }
}

// ── experiment driver ───────────────────────────────────────────────────────

/// Runs every `(K, N, trial)` cell of the spec and assembles the report:
/// user rows in trial order, then per-`(experiment, scheme)` aggregate rows
/// (`trial = -1`) carrying across-trial means.
pub fn run_experiment(scenario: &Scenario, spec: &ExperimentSpec) -> Result<RateReport> {
    scenario.validate()?;
    spec.validate()?;

    let mut rows: Vec<RateRow> = Vec::new();
    let mut exclusions: Vec<String> = Vec::new();
    for (ki, &k) in spec.k_values.iter().enumerate() {
        for &n in &spec.n_values {
            // Same drops for every N and scheme at a given K: the seed
            // counter ignores N.
            let outcomes: Vec<(u64, Result<Vec<RateRow>>)> = (0..spec.trials)
                .into_par_iter()
                .map(|t| {
                    let seed = trial_seed(scenario.seed, (ki * spec.trials + t) as u64);
                    (seed, run_trial(scenario, spec, k, n, t as i64, seed))
                })
                .collect();

            // Per-(experiment, scheme) trial summaries for the aggregates.
            let mut summaries: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
            for (t, (seed, outcome)) in outcomes.into_iter().enumerate() {
                match outcome {
                    Ok(trial_rows) => {
                        let mut seen: BTreeMap<(String, String), (f64, f64)> = BTreeMap::new();
                        for r in &trial_rows {
                            seen.entry((r.experiment.clone(), r.scheme.clone()))
                                .or_insert((r.sum_rate_bps, r.objective));
                        }
                        for (key, v) in seen {
                            summaries.entry(key).or_default().push(v);
                        }
                        rows.extend(trial_rows);
                    }
                    Err(e) => {
                        exclusions.push(format!("k={k} n={n} trial={t} seed={seed}: {e}"));
                    }
                }
            }
            for ((experiment, scheme), trials) in summaries {
                let c = trials.len() as f64;
                let mean_sum = trials.iter().map(|&(s, _)| s).sum::<f64>() / c;
                let mean_obj = trials.iter().map(|&(_, o)| o).sum::<f64>() / c;
                rows.push(RateRow {
                    experiment,
                    scheme,
                    trial: -1,
                    seed: scenario.seed,
                    k,
                    n,
                    user_id: -1,
                    beam_id: -1,
                    rate_bps: 0.0,
                    sum_rate_bps: mean_sum,
                    objective: mean_obj,
                });
            }
        }
    }

    let excluded_trials = exclusions.len();
    Ok(RateReport {
        metadata: ReportMetadata {
            master_seed: scenario.seed,
            delta_deg: scenario.delta_deg,
            trials_per_combination: spec.trials,
            excluded_trials,
            exclusions,
            solver_settings: vec![
                format!("delta_deg={}", scenario.delta_deg),
                format!("gamma_limits={}..={}", scenario.gamma_limits.0, scenario.gamma_limits.1),
                "vuc_max_iters=20".into(),
                "sca_ratio_tol=0.0001".into(),
                "sca_max_outer=50".into(),
                "noma_eta_tol=0.000001".into(),
                format!("xi_star={}", spec.xi_star),
            ],
        },
        rows,
    })
}

// ── tests ───────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;

    /// Coarse grid keeps unit-test enumerations quick.
    fn quick_scenario() -> Scenario {
        Scenario { delta_deg: 10.0, seed: 11, ..Scenario::default() }
    }

    fn quick_spec(kind: ExperimentKind) -> ExperimentSpec {
        let mut spec = ExperimentSpec::preset(kind);
        spec.trials = 4;
        spec
    }

    #[test]
    fn zero_trials_produce_an_empty_well_formed_report() {
        let mut spec = quick_spec(ExperimentKind::SingleBeamSweep);
        spec.trials = 0;
        spec.k_values = vec![2];
        let report = run_experiment(&quick_scenario(), &spec).unwrap();
        assert!(report.rows.is_empty());
        assert_eq!(report.metadata.excluded_trials, 0);
        let csv = report.to_csv_string();
        assert_eq!(csv.lines().count(), 1);
    }

    #[test]
    fn row_cardinality_is_trials_by_users_by_schemes() {
        let mut spec = quick_spec(ExperimentKind::SingleBeamSweep);
        spec.k_values = vec![2];
        spec.trials = 3;
        spec.schemes = vec![Scheme::NoSteering, Scheme::Sbsf];
        let report = run_experiment(&quick_scenario(), &spec).unwrap();
        let user_rows = report.rows.iter().filter(|r| r.trial >= 0).count();
        assert_eq!(user_rows, 3 * 2 * 2);
        let aggregates = report.rows.iter().filter(|r| r.trial == -1).count();
        assert_eq!(aggregates, 2);
        assert!(report.rows.iter().all(|r| r.k == 2 && r.n == 1));
    }

    #[test]
    fn reruns_are_byte_identical() {
        let mut spec = quick_spec(ExperimentKind::BeamCountSweep);
        spec.k_values = vec![4];
        spec.n_values = vec![2];
        spec.trials = 2;
        let a = run_experiment(&quick_scenario(), &spec).unwrap();
        let b = run_experiment(&quick_scenario(), &spec).unwrap();
        assert_eq!(a.to_csv_string(), b.to_csv_string());
        assert_eq!(a.to_json_string().unwrap(), b.to_json_string().unwrap());
    }

    #[test]
    fn genie_upper_bounds_every_single_beam_scheme_per_user() {
        let mut spec = quick_spec(ExperimentKind::SingleBeamSweep);
        spec.k_values = vec![3];
        spec.trials = 4;
        let report = run_experiment(&quick_scenario(), &spec).unwrap();
        for trial in 0..4 {
            for user in 0..3 {
                let rate = |scheme: &str| {
                    report
                        .rows
                        .iter()
                        .find(|r| {
                            r.trial == trial && r.user_id == user && r.scheme == scheme
                        })
                        .map(|r| r.rate_bps)
                        .unwrap()
                };
                let genie = rate("ga_fbs");
                for scheme in ["no_steering", "sbs", "sbsf"] {
                    assert!(
                        genie >= rate(scheme) - 1e-9,
                        "genie lost to {scheme} on trial {trial} user {user}"
                    );
                }
            }
        }
    }

    #[test]
    fn one_beam_single_stream_equals_multi_stream_exactly() {
        let mut spec = quick_spec(ExperimentKind::BeamCountSweep);
        spec.k_values = vec![3];
        spec.n_values = vec![1];
        spec.trials = 3;
        spec.schemes = vec![Scheme::SingleStream, Scheme::MultiStream];
        let report = run_experiment(&quick_scenario(), &spec).unwrap();
        for trial in 0..3 {
            for user in 0..3 {
                let pick = |scheme: &str| {
                    report
                        .rows
                        .iter()
                        .find(|r| {
                            r.trial == trial && r.user_id == user && r.scheme == scheme
                        })
                        .map(|r| r.rate_bps)
                        .unwrap()
                };
                // One beam: the coherent sum is that beam's gain, no
                // interference exists, and the same expressions run.
                assert_eq!(pick("single_stream"), pick("multi_stream"));
            }
        }
    }

    #[test]
    fn threshold_fractions_fall_as_the_bar_rises() {
        let mut spec = quick_spec(ExperimentKind::NomaThresholdSweep);
        spec.k_values = vec![8];
        spec.n_values = vec![2];
        spec.trials = 3;
        let report = run_experiment(&quick_scenario(), &spec).unwrap();
        let mean_fraction = |label: &str| {
            report
                .rows
                .iter()
                .find(|r| r.trial == -1 && r.experiment.ends_with(label))
                .map(|r| r.objective)
                .unwrap()
        };
        let xi: Vec<f64> = spec.xi_sweep.iter().map(|x| mean_fraction(&format!("xi_star={x}"))).collect();
        assert!(xi.windows(2).all(|w| w[1] <= w[0] + 1e-12), "xi sweep rose: {xi:?}");
        let rho: Vec<f64> =
            spec.rho2_sweep.iter().map(|r| mean_fraction(&format!("rho2={r}"))).collect();
        assert!(rho.windows(2).all(|w| w[1] <= w[0] + 1e-12), "rho sweep rose: {rho:?}");
    }

    #[test]
    fn pair_rows_record_gains_and_splits() {
        let mut spec = quick_spec(ExperimentKind::NomaCoeffSweep);
        spec.k_values = vec![8];
        spec.n_values = vec![2];
        spec.trials = 4;
        let report = run_experiment(&quick_scenario(), &spec).unwrap();
        let pair_rows: Vec<_> = report.rows.iter().filter(|r| r.trial >= 0).collect();
        assert!(!pair_rows.is_empty(), "no pair was ever accepted");
        for row in pair_rows {
            // Superposition only replaces time sharing when it wins.
            assert!(row.rate_bps >= row.sum_rate_bps - 1e-6);
            let eta = row.objective;
            assert!(eta == 0.0 || (0.5..=1.0).contains(&eta), "odd split {eta}");
        }
    }

    #[test]
    fn excluded_trials_are_counted_and_described() {
        // Three users cannot feed four beams: every trial fails.
        let mut spec = quick_spec(ExperimentKind::BeamCountSweep);
        spec.k_values = vec![3];
        spec.n_values = vec![4];
        spec.trials = 2;
        spec.schemes = vec![Scheme::MultiStream];
        let report = run_experiment(&quick_scenario(), &spec).unwrap();
        assert_eq!(report.metadata.excluded_trials, 2);
        assert_eq!(report.metadata.exclusions.len(), 2);
        assert!(report.metadata.exclusions[0].contains("trial=0"));
        assert!(report.rows.iter().all(|r| r.trial != 0 && r.trial != 1));
    }

    #[test]
    fn cdf_rate_column_sorts_monotonically() {
        let mut spec = quick_spec(ExperimentKind::CdfReport);
        spec.k_values = vec![4];
        spec.n_values = vec![2];
        spec.trials = 3;
        spec.schemes = vec![Scheme::Sbsf, Scheme::MultiStream];
        let report = run_experiment(&quick_scenario(), &spec).unwrap();
        for scheme in ["sbsf", "multi_stream"] {
            let mut rates: Vec<f64> = report
                .rows
                .iter()
                .filter(|r| r.trial >= 0 && r.scheme == scheme)
                .map(|r| r.rate_bps)
                .collect();
            assert_eq!(rates.len(), 3 * 4);
            rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert!(rates.windows(2).all(|w| w[0] <= w[1]));
            assert!(rates[0] > 0.0);
        }
    }

    #[test]
    fn aggregates_recompute_from_the_user_rows() {
        let mut spec = quick_spec(ExperimentKind::SingleBeamSweep);
        spec.k_values = vec![2];
        spec.trials = 3;
        spec.schemes = vec![Scheme::Sbs];
        let report = run_experiment(&quick_scenario(), &spec).unwrap();
        let per_trial = report.trial_sum_rates("sbs", 2, 1);
        assert_eq!(per_trial.len(), 3);
        let mean = per_trial.iter().sum::<f64>() / 3.0;
        assert_eq!(report.mean_sum_rate("sbs", 2, 1).unwrap(), mean);
    }

    #[test]
    fn presets_parse_and_validate() {
        for kind in [
            ExperimentKind::SingleBeamSweep,
            ExperimentKind::MultiBeamSweep,
            ExperimentKind::BeamCountSweep,
            ExperimentKind::PowerOptSweep,
            ExperimentKind::NomaCoeffSweep,
            ExperimentKind::NomaThresholdSweep,
            ExperimentKind::CdfReport,
        ] {
            let spec = ExperimentSpec::preset(kind);
            spec.validate().unwrap();
            assert_eq!(kind.name().parse::<ExperimentKind>().unwrap(), kind);
            for scheme in &spec.schemes {
                assert_eq!(scheme.name().parse::<Scheme>().unwrap(), *scheme);
            }
        }
        assert!("warp_drive".parse::<ExperimentKind>().is_err());
        assert!("telepathy".parse::<Scheme>().is_err());
    }
}
