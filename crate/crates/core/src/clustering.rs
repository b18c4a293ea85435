//! Multi-beam user clustering: alternating per-cluster beam steering and
//! gain-based user reassignment.
//!
//! [`vuc`] serves `K` users with `N` independently steerable beams. Each
//! iteration (a) re-steers every beam for its current member set with the
//! single-beam solver and (b) reassigns every user to the beam with the
//! strongest channel gain. The loop stops when the steering parameters of all
//! beams repeat for two consecutive iterations; oscillations are detected by
//! hashing iterates and resolved by returning the best one seen.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::channel::{los_gain, sinr_multibeam, BeamState, NoiseModel, ReceiverParams};
use crate::error::{Error, Result};
use crate::geometry::{search_grid_for_users, Vec3};
use crate::steering::{build_gain_table, solve_enumeration, solve_mm, MmConfig};

// ── types ───────────────────────────────────────────────────────────────────

/// Partition of users into per-beam clusters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClusterAssignment {
    /// `assignment[k]` is the beam serving user `k`.
    pub assignment: Vec<usize>,
    /// `members[n]` lists the users of beam `n` in ascending order.
    pub members: Vec<Vec<usize>>,
}

impl ClusterAssignment {
    /// Builds the partition from a per-user beam index vector.
    pub fn new(assignment: Vec<usize>, n_beams: usize) -> Result<Self> {
        let mut members = vec![Vec::new(); n_beams];
        for (k, &n) in assignment.iter().enumerate() {
            if n >= n_beams {
                return Err(Error::invalid(format!(
                    "user {k} assigned to beam {n}, but only {n_beams} beams exist"
                )));
            }
            members[n].push(k);
        }
        Ok(ClusterAssignment { assignment, members })
    }

    pub fn n_beams(&self) -> usize {
        self.members.len()
    }

    /// Equal time share within each cluster: `tau[k] = 1/|members[beam(k)]|`.
    pub fn tau(&self) -> Vec<f64> {
        self.assignment
            .iter()
            .map(|&n| 1.0 / self.members[n].len() as f64)
            .collect()
    }
}

/// Joint steering and clustering result for `N` beams.
#[derive(Debug, Clone)]
pub struct MultiBeamSolution {
    pub beams: Vec<BeamState>,
    pub assignment: ClusterAssignment,
    /// Time share of each user within its cluster.
    pub tau: Vec<f64>,
    /// Full-slot interference-limited rate of each user.
    pub per_user_rate_bps: Vec<f64>,
    /// `sum_k ln(tau_k * R_k)`; `-inf` when some user gets zero rate.
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl MultiBeamSolution {
    pub fn sum_rate_bps(&self) -> f64 {
        self.tau
            .iter()
            .zip(&self.per_user_rate_bps)
            .map(|(t, r)| t * r)
            .sum()
    }
}

/// Which single-beam solver steers each cluster.
#[derive(Debug, Clone, Default)]
pub enum SteeringSolver {
    /// Exact grid enumeration (deterministic; the default).
    #[default]
    Enumeration,
    /// Sparsity-driven continuous relaxation.
    Mm(MmConfig),
}

/// Knobs of the alternating loop.
#[derive(Debug, Clone)]
pub struct VucConfig {
    pub alpha_limits_deg: (f64, f64),
    pub delta_deg: f64,
    pub gammas: Vec<f64>,
    pub max_iters: usize,
    pub solver: SteeringSolver,
}

impl Default for VucConfig {
    fn default() -> Self {
        VucConfig {
            alpha_limits_deg: (200.0, 340.0),
            delta_deg: 2.0,
            gammas: (1..=15).map(|g| g as f64).collect(),
            max_iters: 20,
            solver: SteeringSolver::Enumeration,
        }
    }
}

// ── assignment ──────────────────────────────────────────────────────────────

/// Channel gain of every user to every beam: `matrix[k][n]`.
fn gain_matrix(
    users: &[Vec3],
    rx_orientation: Vec3,
    rx: &ReceiverParams,
    beams: &[BeamState],
) -> Result<Vec<Vec<f64>>> {
    users
        .iter()
        .map(|&u| {
            beams
                .iter()
                .map(|b| los_gain(b, u, rx_orientation, rx))
                .collect()
        })
        .collect()
}

fn argmax_gain(row: &[f64]) -> usize {
    let mut best = 0;
    for (n, &g) in row.iter().enumerate() {
        if g > row[best] {
            best = n;
        }
    }
    best
}

/// Assigns each user to the beam with the strongest channel gain; ties go to
/// the lowest beam index. Powers play no role (the gain is power-free).
pub fn assign_best_beam(
    users: &[Vec3],
    rx_orientation: Vec3,
    rx: &ReceiverParams,
    beams: &[BeamState],
) -> Result<ClusterAssignment> {
    if beams.is_empty() {
        return Err(Error::invalid("assignment with no beams"));
    }
    let gains = gain_matrix(users, rx_orientation, rx, beams)?;
    let assignment = gains.iter().map(|row| argmax_gain(row)).collect();
    ClusterAssignment::new(assignment, beams.len())
}

/// Fills empty clusters by moving in the worst-served user from a cluster
/// that still has at least two members (ties to the lowest user index).
fn repair_empty_clusters(assignment: &mut [usize], n_beams: usize, gains: &[Vec<f64>]) {
    loop {
        let mut sizes = vec![0usize; n_beams];
        for &n in assignment.iter() {
            sizes[n] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut worst: Option<(f64, usize)> = None;
        for (k, &n) in assignment.iter().enumerate() {
            if sizes[n] < 2 {
                continue;
            }
            let g = gains[k][n];
            if worst.is_none_or(|(wg, _)| g < wg) {
                worst = Some((g, k));
            }
        }
        // K >= N guarantees a donor cluster exists.
        let (_, mover) = worst.expect("no cluster with two members to donate from");
        assignment[mover] = empty;
    }
}

// ── the alternating loop ────────────────────────────────────────────────────

fn steer_cluster(
    users: &[Vec3],
    members: &[usize],
    rx_orientation: Vec3,
    rx: &ReceiverParams,
    beam_position: Vec3,
    power_w: f64,
    noise: &NoiseModel,
    cfg: &VucConfig,
) -> Result<BeamState> {
    let positions: Vec<Vec3> = members.iter().map(|&k| users[k]).collect();
    let grid = search_grid_for_users(
        &positions,
        beam_position,
        cfg.alpha_limits_deg,
        cfg.delta_deg,
        &cfg.gammas,
    )?;
    let table = build_gain_table(&positions, rx_orientation, rx, beam_position, grid)?;
    let sol = match &cfg.solver {
        SteeringSolver::Enumeration => solve_enumeration(&table, power_w, noise)?,
        SteeringSolver::Mm(mm) => solve_mm(&table, power_w, noise, mm)?.solution,
    };
    Ok(BeamState {
        position: beam_position,
        angles: sol.angles,
        gamma: sol.gamma,
        power_w,
    })
}

/// Rates and objective of a fixed (beams, assignment) pair under simultaneous
/// transmission: every other beam is interference.
fn evaluate(
    gains: &[Vec<f64>],
    powers: &[f64],
    assignment: &ClusterAssignment,
    noise: &NoiseModel,
) -> (Vec<f64>, Vec<f64>, f64) {
    let rates: Vec<f64> = gains
        .iter()
        .zip(&assignment.assignment)
        .map(|(row, &n)| {
            let sinr = sinr_multibeam(row, powers, n, noise);
            noise.bandwidth_hz * (1.0 + sinr).log2()
        })
        .collect();
    let tau = assignment.tau();
    let objective = rates
        .iter()
        .zip(&tau)
        .map(|(&r, &t)| if r > 0.0 { (t * r).ln() } else { f64::NEG_INFINITY })
        .sum();
    (rates, tau, objective)
}

fn beam_key(beams: &[BeamState]) -> Vec<(u64, u64, u64)> {
    beams
        .iter()
        .map(|b| {
            (
                b.angles.alpha_deg.to_bits(),
                b.angles.beta_deg.to_bits(),
                b.gamma.to_bits(),
            )
        })
        .collect()
}

/// Alternating user clustering for `N = powers.len()` beams sharing one
/// mounting point.
///
/// Starts from the one-user-per-beam seed (user `n` to beam `n`), then
/// alternates per-cluster steering and strongest-gain reassignment. Returns
/// the fixpoint, or the best iterate seen when the loop oscillates or the
/// iteration cap is hit (flagged via `converged`).
pub fn vuc(
    users: &[Vec3],
    rx_orientation: Vec3,
    rx: &ReceiverParams,
    beam_position: Vec3,
    powers: &[f64],
    noise: &NoiseModel,
    cfg: &VucConfig,
) -> Result<MultiBeamSolution> {
    let n_beams = powers.len();
    if n_beams == 0 {
        return Err(Error::invalid("clustering with no beams"));
    }
    if users.len() < n_beams {
        return Err(Error::invalid(format!(
            "{} users cannot populate {n_beams} beams",
            users.len()
        )));
    }
    if powers.iter().any(|&p| !(p.is_finite() && p > 0.0)) {
        return Err(Error::invalid("beam powers must be positive and finite"));
    }

    // Seed: user n to beam n; the rest join at the first reassignment.
    let mut members: Vec<Vec<usize>> = (0..n_beams).map(|n| vec![n]).collect();
    let mut prev_key: Option<Vec<(u64, u64, u64)>> = None;
    let mut seen: HashSet<(Vec<usize>, Vec<(u64, u64, u64)>)> = HashSet::new();
    let mut best: Option<MultiBeamSolution> = None;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;

        let beams: Vec<BeamState> = members
            .par_iter()
            .zip(powers.par_iter())
            .map(|(m, &p)| {
                steer_cluster(users, m, rx_orientation, rx, beam_position, p, noise, cfg)
            })
            .collect::<Result<_>>()?;

        let key = beam_key(&beams);
        if prev_key.as_ref() == Some(&key) {
            converged = true;
            break;
        }

        let gains = gain_matrix(users, rx_orientation, rx, &beams)?;
        let mut assignment: Vec<usize> = gains.iter().map(|row| argmax_gain(row)).collect();
        repair_empty_clusters(&mut assignment, n_beams, &gains);
        let assignment = ClusterAssignment::new(assignment, n_beams)?;

        let (rates, tau, objective) = evaluate(&gains, powers, &assignment, noise);
        if best.as_ref().is_none_or(|b| objective > b.objective) {
            best = Some(MultiBeamSolution {
                beams: beams.clone(),
                assignment: assignment.clone(),
                tau,
                per_user_rate_bps: rates,
                objective,
                converged: false,
                iterations,
            });
        }

        // A repeated (assignment, steering) state can only loop.
        if !seen.insert((assignment.assignment.clone(), key.clone())) {
            break;
        }

        members = assignment.members;
        prev_key = Some(key);
    }

    let mut sol =
        best.ok_or_else(|| Error::SolverFailure("clustering produced no iterate".into()))?;
    sol.converged = converged;
    sol.iterations = iterations;
    Ok(sol)
}

// ── tests ───────────────────────────────────────────────────────────────────
