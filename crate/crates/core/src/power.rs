//! Per-beam transmit-power allocation under a total budget by successive
//! convex approximation.
//!
//! With beam powers `p` the rate of user `k` served by beam `n` is
//! `B log2(1 + (p_n h_{k,n})^2 / kappa_k(p))` where
//! `kappa_k(p) = N0 B + sum_{m != n} (p_m h_{k,m})^2`. The coupling term
//! `p_n^2 / kappa` is jointly convex for `kappa > 0`, so its tangent plane at
//! an expansion point `(a_n, b_k)`,
//!
//! ```text
//! p_n^2 / kappa  >=  2 (a/b) p_n - (a/b)^2 kappa,   t = a/b,
//! ```
//!
//! minorizes it everywhere and is tight at the point itself. Substituting the
//! tangent (and the tight auxiliary bounds) yields a concave surrogate in `p`
//! alone, maximized by projected-gradient ascent over
//! `{p >= 0, sum p <= p_max}`; the outer loop re-expands at the new allocation
//! until the ratios `t` settle.

use crate::channel::{sinr_multibeam, NoiseModel};
use crate::clustering::ClusterAssignment;
use crate::error::{Error, Result};
use crate::optim::project_capped_simplex;

/// Rate floor (bit/s) standing in for zero inside logarithmic objectives, so
/// an unserved user penalizes the objective without collapsing it to `-inf`.
const RATE_FLOOR_BPS: f64 = 1e-6;

// ── types ───────────────────────────────────────────────────────────────────

/// Optical transmit power of every beam, in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
}

impl PowerAllocation {
    pub fn n_beams(&self) -> usize {
        self.powers.len()
    }

    pub fn total_w(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// What the allocator maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerObjective {
    /// `sum_k ln(tau_k R_k)` (proportional fairness; rates floored at
    /// [`RATE_FLOOR_BPS`]).
    LogRate,
    /// `sum_k tau_k R_k` (plain throughput; may leave users unserved).
    SumRate,
}

/// Auxiliary bounds certifying one inner solve: per user, a rate lower bound
/// `eta`, a SINR lower bound `zeta`, and an interference-plus-noise upper
/// bound `kappa`.
#[derive(Debug, Clone)]
pub struct AuxiliaryBounds {
    pub eta: Vec<f64>,
    pub zeta: Vec<f64>,
    pub kappa: Vec<f64>,
}

/// Progress of the outer expansion loop.
#[derive(Debug, Clone)]
pub struct ScaState {
    /// Final per-user expansion ratios `t_k = a_{n(k)} / b_k`.
    pub ratios: Vec<f64>,
    /// Outer iterations performed.
    pub iteration: usize,
    /// True objective after the start and after every outer iteration.
    pub objective_trace: Vec<f64>,
    /// Whether the ratios settled within tolerance before the cap.
    pub converged: bool,
}

/// One power-allocation problem instance over a fixed clustering.
#[derive(Debug, Clone)]
pub struct PowerProblem<'a> {
    /// `gains[k][n]`: channel gain of user `k` to beam `n`.
    pub gains: &'a [Vec<f64>],
    /// Serving beam of each user.
    pub serving: Vec<usize>,
    /// Time share of each user within its serving beam.
    pub tau: Vec<f64>,
    pub p_max: f64,
    pub noise: NoiseModel,
    pub objective: PowerObjective,
}

impl<'a> PowerProblem<'a> {
    pub fn new(
        assignment: &ClusterAssignment,
        gains: &'a [Vec<f64>],
        p_max: f64,
        noise: &NoiseModel,
        objective: PowerObjective,
    ) -> Result<Self> {
        let n_beams = assignment.n_beams();
        if gains.len() != assignment.assignment.len() {
            return Err(Error::invalid(format!(
                "{} gain rows for {} assigned users",
                gains.len(),
                assignment.assignment.len()
            )));
        }
        if gains.is_empty() {
            return Err(Error::invalid("power allocation for an empty user set"));
        }
        if let Some(row) = gains.iter().find(|row| row.len() != n_beams) {
            return Err(Error::invalid(format!(
                "gain row has {} entries for {n_beams} beams",
                row.len()
            )));
        }
        if !(p_max.is_finite() && p_max > 0.0) {
            return Err(Error::invalid(format!("power budget {p_max} must be positive")));
        }
        Ok(PowerProblem {
            gains,
            serving: assignment.assignment.clone(),
            tau: assignment.tau(),
            p_max,
            noise: *noise,
            objective,
        })
    }

    fn n_beams(&self) -> usize {
        self.gains[0].len()
    }

    /// True interference-plus-noise power seen by user `k` under `powers`.
    fn denominator(&self, k: usize, powers: &[f64]) -> f64 {
        let mut acc = self.noise.power();
        for (m, (&p, &h)) in powers.iter().zip(&self.gains[k]).enumerate() {
            if m != self.serving[k] {
                let r = p * h;
                acc += r * r;
            }
        }
        acc
    }

    /// Surrogate SINR bound of user `k` at expansion ratio `t`.
    fn zeta(&self, k: usize, t: f64, powers: &[f64]) -> f64 {
        let h = self.gains[k][self.serving[k]];
        let lin = h * h * (2.0 * t * powers[self.serving[k]] - t * t * self.denominator(k, powers));
        lin.max(0.0)
    }

    /// Surrogate objective at `powers` for fixed expansion ratios.
    fn surrogate(&self, ratios: &[f64], powers: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.gains.len() {
            let eta = self.noise.bandwidth_hz * (1.0 + self.zeta(k, ratios[k], powers)).log2();
            acc += match self.objective {
                PowerObjective::LogRate => (self.tau[k] * eta.max(RATE_FLOOR_BPS)).ln(),
                PowerObjective::SumRate => self.tau[k] * eta,
            };
        }
        acc
    }

    /// Gradient of the surrogate with respect to `powers`.
    fn surrogate_gradient(&self, ratios: &[f64], powers: &[f64], grad: &mut [f64]) {
        grad.fill(0.0);
        for k in 0..self.gains.len() {
            let n = self.serving[k];
            let h = self.gains[k][n];
            let t = ratios[k];
            let lin = h * h * (2.0 * t * powers[n] - t * t * self.denominator(k, powers));
            if lin <= 0.0 {
                continue;
            }
            let eta = self.noise.bandwidth_hz * (1.0 + lin).log2();
            let dobj_deta = match self.objective {
                PowerObjective::LogRate => {
                    if eta > RATE_FLOOR_BPS {
                        1.0 / eta
                    } else {
                        0.0
                    }
                }
                PowerObjective::SumRate => self.tau[k],
            };
            let deta_dzeta = self.noise.bandwidth_hz / ((1.0 + lin) * std::f64::consts::LN_2);
            let coef = dobj_deta * deta_dzeta * h * h;
            if !coef.is_finite() {
                continue;
            }
            grad[n] += coef * 2.0 * t;
            for (m, (&p, &g)) in powers.iter().zip(&self.gains[k]).enumerate() {
                if m != n {
                    grad[m] -= coef * t * t * 2.0 * p * g * g;
                }
            }
        }
    }
}

/// True objective value of an allocation, via exact SINRs.
pub fn power_objective(
    gains: &[Vec<f64>],
    serving: &[usize],
    tau: &[f64],
    powers: &[f64],
    noise: &NoiseModel,
    objective: PowerObjective,
) -> f64 {
    let mut acc = 0.0;
    for ((row, &n), &t) in gains.iter().zip(serving).zip(tau) {
        let sinr = sinr_multibeam(row, powers, n, noise);
        let rate = noise.bandwidth_hz * (1.0 + sinr).log2();
        acc += match objective {
            PowerObjective::LogRate => (t * rate.max(RATE_FLOOR_BPS)).ln(),
            PowerObjective::SumRate => t * rate,
        };
    }
    acc
}

// ── operations ──────────────────────────────────────────────────────────────

/// Splits the budget evenly: `p_n = p_max / N`.
pub fn equal_power(n_beams: usize, p_max: f64) -> Result<PowerAllocation> {
    if n_beams == 0 {
        return Err(Error::invalid("equal power split over zero beams"));
    }
    Ok(PowerAllocation {
        powers: vec![p_max / n_beams as f64; n_beams],
    })
}

/// Maximizes the concave surrogate at fixed expansion ratios by
/// projected-gradient ascent with backtracking over
/// `{p >= 0, sum p <= p_max}`. Deterministic for fixed inputs.
pub fn inner_convex_solve(
    problem: &PowerProblem,
    ratios: &[f64],
    start: &[f64],
    max_iters: usize,
) -> (PowerAllocation, AuxiliaryBounds, f64) {
    let mut p = Vec::new();
    project_capped_simplex(start, problem.p_max, &mut p);
    let mut f = problem.surrogate(ratios, &p);
    let mut grad = vec![0.0; problem.n_beams()];
    let mut step = 0.0;
    let mut trial = Vec::new();

    for _ in 0..max_iters {
        problem.surrogate_gradient(ratios, &p, &mut grad);
        let gmax = grad.iter().fold(0.0f64, |m, &g| m.max(g.abs()));
        if gmax == 0.0 {
            break;
        }
        if step == 0.0 {
            step = 0.25 * problem.p_max / gmax;
        }
        let mut improved = false;
        for _ in 0..60 {
            let moved: Vec<f64> = p.iter().zip(&grad).map(|(&x, &g)| x + step * g).collect();
            project_capped_simplex(&moved, problem.p_max, &mut trial);
            let ft = problem.surrogate(ratios, &trial);
            if ft > f {
                std::mem::swap(&mut p, &mut trial);
                f = ft;
                step *= 1.6;
                improved = true;
                break;
            }
            step *= 0.5;
            if step * gmax < 1e-18 * problem.p_max {
                break;
            }
        }
        if !improved {
            break;
        }
    }

    let n_users = problem.gains.len();
    let mut bounds = AuxiliaryBounds {
        eta: Vec::with_capacity(n_users),
        zeta: Vec::with_capacity(n_users),
        kappa: Vec::with_capacity(n_users),
    };
    for k in 0..n_users {
        let zeta = problem.zeta(k, ratios[k], &p);
        bounds.eta.push(problem.noise.bandwidth_hz * (1.0 + zeta).log2());
        bounds.zeta.push(zeta);
        bounds.kappa.push(problem.denominator(k, &p));
    }
    (PowerAllocation { powers: p }, bounds, f)
}

/// Knobs of the outer expansion loop.
#[derive(Debug, Clone)]
pub struct ScaConfig {
    /// Stop when the largest relative ratio change drops to this.
    pub ratio_tol: f64,
    pub max_outer: usize,
    pub inner_iters: usize,
}

impl Default for ScaConfig {
    fn default() -> Self {
        ScaConfig {
            ratio_tol: 1e-4,
            max_outer: 50,
            inner_iters: 2000,
        }
    }
}

fn refresh_ratios(problem: &PowerProblem, powers: &[f64]) -> Vec<f64> {
    (0..problem.gains.len())
        .map(|k| {
            // A floor on the expansion numerator keeps the ratio positive, so
            // a beam driven to zero power still carries a revival gradient.
            let a = powers[problem.serving[k]].max(1e-6 * problem.p_max);
            a / problem.denominator(k, powers)
        })
        .collect()
}

/// One expansion loop from a fixed starting allocation.
fn sca_from(problem: &PowerProblem, start: Vec<f64>, cfg: &ScaConfig) -> (PowerAllocation, ScaState) {
    let mut alloc = PowerAllocation { powers: start };
    let mut ratios = refresh_ratios(problem, &alloc.powers);
    let true_obj = |powers: &[f64]| {
        power_objective(
            problem.gains,
            &problem.serving,
            &problem.tau,
            powers,
            &problem.noise,
            problem.objective,
        )
    };
    let mut trace = vec![true_obj(&alloc.powers)];
    let mut converged = false;
    let mut iteration = 0;

    while iteration < cfg.max_outer {
        iteration += 1;
        let (next, _, _) = inner_convex_solve(problem, &ratios, &alloc.powers, cfg.inner_iters);
        alloc = next;
        trace.push(true_obj(&alloc.powers));
        let next_ratios = refresh_ratios(problem, &alloc.powers);
        let change = ratios
            .iter()
            .zip(&next_ratios)
            .map(|(&old, &new)| (new - old).abs() / old.abs().max(f64::MIN_POSITIVE))
            .fold(0.0f64, f64::max);
        ratios = next_ratios;
        if change <= cfg.ratio_tol {
            converged = true;
            break;
        }
    }

    (
        alloc,
        ScaState {
            ratios,
            iteration,
            objective_trace: trace,
            converged,
        },
    )
}

/// Full power optimization: successive tangent expansions maximized by
/// [`inner_convex_solve`].
///
/// The expansion loop only ascends, so a start deep in the wrong basin stays
/// there — with a sum-rate objective the optimum is often a near-vertex
/// allocation and the equal split can settle on the wrong beam. The loop
/// therefore runs once per deterministic start (equal split, every
/// single-beam vertex, every two-beam half split) and keeps the best true
/// objective; ties go to the earliest start.
pub fn sca_power_opt(
    assignment: &ClusterAssignment,
    gains: &[Vec<f64>],
    p_max: f64,
    noise: &NoiseModel,
    objective: PowerObjective,
    cfg: &ScaConfig,
) -> Result<(PowerAllocation, ScaState)> {
    let problem = PowerProblem::new(assignment, gains, p_max, noise, objective)?;
    let n = problem.n_beams();

    let mut starts: Vec<Vec<f64>> = vec![equal_power(n, p_max)?.powers];
    if n > 1 {
        for i in 0..n {
            let mut v = vec![0.0; n];
            v[i] = p_max;
            starts.push(v);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let mut v = vec![0.0; n];
                v[i] = 0.5 * p_max;
                v[j] = 0.5 * p_max;
                starts.push(v);
            }
        }
    }

    let mut best: Option<(PowerAllocation, ScaState)> = None;
    for start in starts {
        let (alloc, state) = sca_from(&problem, start, cfg);
        let reached = *state.objective_trace.last().unwrap();
        let incumbent = best
            .as_ref()
            .map(|(_, s)| *s.objective_trace.last().unwrap());
        if incumbent.is_none_or(|cur| reached > cur) {
            best = Some((alloc, state));
        }
    }
    Ok(best.unwrap())
}

/// Exhaustive scan of the step-`step` simplex grid `{p_n in {0, s, 2s, ...},
/// sum p <= p_max}` under the true objective. Refuses more than three beams.
pub fn brute_force_power_oracle(
    assignment: &ClusterAssignment,
    gains: &[Vec<f64>],
    p_max: f64,
    noise: &NoiseModel,
    objective: PowerObjective,
    step: f64,
) -> Result<PowerAllocation> {
    let problem = PowerProblem::new(assignment, gains, p_max, noise, objective)?;
    let n = problem.n_beams();
    if n > 3 {
        return Err(Error::invalid(format!(
            "brute-force power scan over {n} beams is intractable"
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid(format!("grid step {step} must be positive")));
    }
    let levels = (p_max / step + 1e-9).floor() as usize;
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let mut powers = vec![0.0; n];
    // Lexicographic scan; strict improvement keeps the earliest tie.
    let consider = |powers: &[f64], best: &mut (f64, Vec<f64>)| {
        let obj = power_objective(
            gains,
            &problem.serving,
            &problem.tau,
            powers,
            noise,
            objective,
        );
        if obj > best.0 {
            *best = (obj, powers.to_vec());
        }
    };
    match n {
        1 => {
            for i in 0..=levels {
                powers[0] = i as f64 * step;
                consider(&powers, &mut best);
            }
        }
        2 => {
            for i in 0..=levels {
                powers[0] = i as f64 * step;
                for j in 0..=(levels - i) {
                    powers[1] = j as f64 * step;
                    consider(&powers, &mut best);
                }
            }
        }
        _ => {
            for i in 0..=levels {
                powers[0] = i as f64 * step;
                for j in 0..=(levels - i) {
                    powers[1] = j as f64 * step;
                    for l in 0..=(levels - i - j) {
                        powers[2] = l as f64 * step;
                        consider(&powers, &mut best);
                    }
                }
            }
        }
    }
    Ok(PowerAllocation { powers: best.1 })
}

// ── tests ───────────────────────────────────────────────────────────────────
