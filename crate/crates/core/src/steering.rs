//! Single-beam slow beam steering over a discretized angle/focus grid.
//!
//! The search space is the grid of `(alpha, beta, gamma)` cells described by
//! an [`AngleGrid`] (optionally hull-reduced). [`build_gain_table`]
//! precomputes per-user channel gains for every cell; the steering problem
//! maximizes the proportional-fair objective
//!
//! ```text
//! sum_k ln(tau_k * R_k),   tau_k = 1/K
//! ```
//!
//! over cells. Two solvers are provided: [`solve_enumeration`] (exact,
//! deterministic tie-break towards the lowest flattened cell index) and
//! [`solve_mm`], a continuous relaxation that optimizes a selection weight
//! vector on the simplex and drives it towards a one-hot solution by
//! majorizing an l0 penalty with reweighted lq steps of growing strength.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::channel::{link_rate, los_gain_components, NoiseModel, ReceiverParams};
use crate::error::{Error, Result};
use crate::geometry::{orientation_from_angles, AngleGrid, SteeringAngles, Vec3};
use crate::optim::project_simplex;

// ── gain table ──────────────────────────────────────────────────────────────

/// Per-user channel gains for every `(alpha, beta, gamma)` grid cell.
///
/// `gains[k][cell]` uses the flattened cell index of [`AngleGrid`];
/// masked-out cells hold zero for every user.
#[derive(Debug, Clone)]
pub struct GainTable {
    pub grid: AngleGrid,
    pub gains: Vec<Vec<f64>>,
}

impl GainTable {
    pub fn n_users(&self) -> usize {
        self.gains.len()
    }
}

/// Precomputes the gain table for `users` (all sharing `rx_orientation`)
/// against a beam at `beam_position` over `grid`.
///
/// Errors when a user has no strictly positive cell (such a user could never
/// be served from this search space).
pub fn build_gain_table(
    users: &[Vec3],
    rx_orientation: Vec3,
    rx: &ReceiverParams,
    beam_position: Vec3,
    grid: AngleGrid,
) -> Result<GainTable> {
    if users.is_empty() {
        return Err(Error::invalid("gain table for an empty user set"));
    }
    let n_users = users.len();
    let sg = grid.gammas.len();
    // Per-user constants:  A_r * r * cos(theta) / d^2  and the direction.
    struct UserGeom {
        v: Vec3,
        inv_d: f64,
        scale: f64, // A_r * r * cos_theta / d^2, clamped at zero
    }
    let geoms: Vec<UserGeom> = users
        .iter()
        .map(|&u| {
            let v = u.sub(beam_position);
            let d = v.norm();
            if d == 0.0 {
                return Err(Error::invalid("user coincides with the beam position"));
            }
            let cos_theta = -v.dot(rx_orientation) / d;
            let scale = if cos_theta < 0.0 {
                0.0
            } else {
                rx.area_m2 * rx.responsivity_a_per_w * cos_theta / (d * d)
            };
            Ok(UserGeom { v, inv_d: 1.0 / d, scale })
        })
        .collect::<Result<_>>()?;

    let lead: Vec<f64> = grid
        .gammas
        .iter()
        .map(|g| (g + 1.0) / (2.0 * std::f64::consts::PI))
        .collect();
    let integral: Vec<Option<i32>> = grid
        .gammas
        .iter()
        .map(|&g| {
            if g.fract() == 0.0 && g <= 64.0 {
                Some(g as i32)
            } else {
                None
            }
        })
        .collect();

    let mut gains = vec![vec![0.0f64; grid.n_cells()]; n_users];
    for ia in 0..grid.alphas.len() {
        for ib in 0..grid.betas.len() {
            if !grid.mask[grid.ab_index(ia, ib)] {
                continue;
            }
            let o = orientation_from_angles(SteeringAngles {
                alpha_deg: grid.alphas[ia],
                beta_deg: grid.betas[ib],
            });
            let base = grid.cell_index(ia, ib, 0);
            for (k, geom) in geoms.iter().enumerate() {
                if geom.scale == 0.0 {
                    continue;
                }
                let cos_phi = geom.v.dot(o) * geom.inv_d;
                if cos_phi <= 0.0 {
                    continue;
                }
                let row = &mut gains[k][base..base + sg];
                for ig in 0..sg {
                    let powed = match integral[ig] {
                        Some(e) => cos_phi.powi(e),
                        None => cos_phi.powf(grid.gammas[ig]),
                    };
                    row[ig] = lead[ig] * geom.scale * powed;
                }
            }
        }
    }

    for (k, row) in gains.iter().enumerate() {
        if !row.iter().any(|&g| g > 0.0) {
            return Err(Error::EmptySearchSpace(format!(
                "user {k} has no positive-gain cell in the search space"
            )));
        }
    }
    Ok(GainTable { grid, gains })
}

// ── solutions ───────────────────────────────────────────────────────────────

/// A single-beam steering decision with its time shares and rates.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringSolution {
    pub angles: SteeringAngles,
    pub gamma: f64,
    /// Time share per user (equal `1/K` except in the best-user diagnostic).
    pub tau: Vec<f64>,
    /// Full-slot rate of each user at this pointing (before time sharing).
    pub per_user_rate_bps: Vec<f64>,
    /// `sum_k ln(tau_k * R_k)`; `-inf` when some user is unreachable.
    pub objective: f64,
    /// Flattened grid cell realizing the solution (`None` off-grid).
    pub cell: Option<usize>,
    /// False when some user has zero rate at the chosen pointing.
    pub feasible: bool,
}

impl SteeringSolution {
    /// Time-shared sum rate `sum_k tau_k R_k` in bit/s.
    pub fn sum_rate_bps(&self) -> f64 {
        self.tau
            .iter()
            .zip(&self.per_user_rate_bps)
            .map(|(t, r)| t * r)
            .sum()
    }
}

/// `sum_k ln R_k` over users at one cell; `-inf` if any rate is zero.
fn cell_log_rates(table: &GainTable, cell: usize, power_w: f64, noise: &NoiseModel) -> f64 {
    let mut acc = 0.0;
    for row in &table.gains {
        let r = link_rate(row[cell], power_w, noise);
        if r <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += r.ln();
    }
    acc
}

fn solution_at_cell(
    table: &GainTable,
    cell: usize,
    power_w: f64,
    noise: &NoiseModel,
) -> SteeringSolution {
    let k = table.n_users();
    let tau = vec![1.0 / k as f64; k];
    let rates: Vec<f64> = table
        .gains
        .iter()
        .map(|row| link_rate(row[cell], power_w, noise))
        .collect();
    let feasible = rates.iter().all(|&r| r > 0.0);
    let objective = if feasible {
        rates
            .iter()
            .zip(&tau)
            .map(|(r, t)| (t * r).ln())
            .sum::<f64>()
    } else {
        f64::NEG_INFINITY
    };
    let (angles, gamma) = table.grid.cell_params(cell);
    SteeringSolution {
        angles,
        gamma,
        tau,
        per_user_rate_bps: rates,
        objective,
        cell: Some(cell),
        feasible,
    }
}

// ── exact enumeration ───────────────────────────────────────────────────────

/// Exhaustive search over masked-in cells for the proportional-fair
/// objective. Ties break towards the lowest flattened cell index.
pub fn solve_enumeration(
    table: &GainTable,
    power_w: f64,
    noise: &NoiseModel,
) -> Result<SteeringSolution> {
    use rayon::prelude::*;
    let grid = &table.grid;
    if !grid.mask.iter().any(|&m| m) {
        return Err(Error::EmptySearchSpace("no unmasked grid cell".into()));
    }
    let sg = grid.gammas.len();
    // Row-parallel scan; per-cell objectives are bitwise identical however
    // the rows are partitioned, so the (objective desc, cell asc) reduction
    // is deterministic for any thread count.
    let best = (0..grid.alphas.len())
        .into_par_iter()
        .map(|ia| {
            let mut row_best = (f64::NEG_INFINITY, usize::MAX);
            for ib in 0..grid.betas.len() {
                if !grid.mask[grid.ab_index(ia, ib)] {
                    continue;
                }
                let base = grid.cell_index(ia, ib, 0);
                for cell in base..base + sg {
                    let obj = cell_log_rates(table, cell, power_w, noise);
                    if obj > row_best.0 {
                        row_best = (obj, cell);
                    }
                }
            }
            row_best
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    if best.1 == usize::MAX {
        return Err(Error::SolverFailure(
            "no grid cell reaches every user".into(),
        ));
    }
    Ok(solution_at_cell(table, best.1, power_w, noise))
}

/// Diagnostic variant without the logarithm: maximizing the plain sum rate
/// over both the cell and the time shares hands the whole slot to one user,
/// so the solution is the best single user's personal best cell.
pub fn solve_enumeration_sum_rate(
    table: &GainTable,
    power_w: f64,
    noise: &NoiseModel,
) -> Result<SteeringSolution> {
    let grid = &table.grid;
    let sg = grid.gammas.len();
    let mut best = (f64::NEG_INFINITY, usize::MAX, 0usize);
    for ia in 0..grid.alphas.len() {
        for ib in 0..grid.betas.len() {
            if !grid.mask[grid.ab_index(ia, ib)] {
                continue;
            }
            let base = grid.cell_index(ia, ib, 0);
            for cell in base..base + sg {
                for (k, row) in table.gains.iter().enumerate() {
                    let r = link_rate(row[cell], power_w, noise);
                    if r > best.0 {
                        best = (r, cell, k);
                    }
                }
            }
        }
    }
    if best.1 == usize::MAX {
        return Err(Error::SolverFailure("all gains are zero".into()));
    }
    let mut sol = solution_at_cell(table, best.1, power_w, noise);
    sol.tau = vec![0.0; table.n_users()];
    sol.tau[best.2] = 1.0;
    sol.objective = best.0;
    Ok(sol)
}

// ── relaxation solver ───────────────────────────────────────────────────────

/// Hyperparameters of the sparsity-relaxation solver.
#[derive(Debug, Clone, PartialEq)]
pub struct MmConfig {
    /// lq exponent of the sparsity surrogate.
    pub q: f64,
    /// Smoothing offset inside the surrogate.
    pub epsilon: f64,
    /// Initial penalty strength; doubled every outer iteration.
    pub lambda0: f64,
    pub lambda_growth: f64,
    /// Outer (reweighting) iteration cap.
    pub max_outer: usize,
    /// A selection weight this large counts as concentrated.
    pub concentration: f64,
    /// Random restarts for the first inner solve (plus the uniform start).
    pub restarts: usize,
    /// Projected-gradient iteration cap per inner solve.
    pub inner_iters: usize,
    /// Seed for the restart draws.
    pub seed: u64,
}

impl Default for MmConfig {
    fn default() -> Self {
        MmConfig {
            q: 0.5,
            epsilon: 1e-8,
            lambda0: 1e-3,
            lambda_growth: 2.0,
            max_outer: 100,
            concentration: 0.99,
            restarts: 5,
            inner_iters: 40,
            seed: 0x5eed,
        }
    }
}

/// Result of [`solve_mm`]: the relaxed selection weights, the rounded
/// steering solution, and convergence information.
#[derive(Debug, Clone)]
pub struct MmOutcome {
    /// Selection weights over all flattened cells (non-negative, sum 1).
    pub selection: Vec<f64>,
    pub solution: SteeringSolution,
    /// True when the weights concentrated past the configured threshold.
    pub converged: bool,
    pub outer_iterations: usize,
}

/// Scalar parameters of the relaxed problem.
#[derive(Clone, Copy)]
struct RelaxedProblem {
    power_w: f64,
    noise_pow: f64,
    bandwidth: f64,
}

impl RelaxedProblem {
    /// Smooth part: `sum_k ln(B log2(1 + (p d.g_k)^2 / N0B))`.
    fn smooth(&self, gains: &[Vec<f64>], d: &[f64]) -> f64 {
        let mut acc = 0.0;
        for g in gains {
            let s: f64 = d.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
            let u = self.power_w * s;
            let rate = self.bandwidth * (1.0 + u * u / self.noise_pow).log2();
            if rate <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += rate.ln();
        }
        acc
    }

    /// Gradient of the smooth part plus `-lambda * w` penalty gradient.
    fn gradient(&self, gains: &[Vec<f64>], d: &[f64], lambda: f64, w: &[f64], grad: &mut [f64]) {
        for (gi, wi) in grad.iter_mut().zip(w.iter()) {
            *gi = -lambda * wi;
        }
        let ln2 = std::f64::consts::LN_2;
        for g in gains {
            let s: f64 = d.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
            let u = self.power_w * s;
            let snr = u * u / self.noise_pow;
            let rate = self.bandwidth * (1.0 + snr).log2();
            if rate <= 0.0 {
                continue;
            }
            let coef = 2.0 * self.power_w * self.power_w * s * self.bandwidth
                / (rate * ln2 * (1.0 + snr) * self.noise_pow);
            // A vanishing rate makes the coefficient blow up; such a step
            // would be rejected by the line search anyway.
            if !coef.is_finite() {
                continue;
            }
            for (gi, &gk) in grad.iter_mut().zip(g.iter()) {
                *gi += coef * gk;
            }
        }
    }

    /// Penalized objective with the *linearized* penalty `lambda * w.d`.
    fn surrogate(&self, gains: &[Vec<f64>], d: &[f64], lambda: f64, w: &[f64]) -> f64 {
        let pen: f64 = d.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
        self.smooth(gains, d) - lambda * pen
    }
}

/// Projected-gradient ascent on the simplex with backtracking; accepts only
/// improving steps, so the surrogate objective never decreases.
fn pga_simplex(
    prob: &RelaxedProblem,
    gains: &[Vec<f64>],
    d0: &[f64],
    lambda: f64,
    w: &[f64],
    iters: usize,
) -> Vec<f64> {
    let mut d = d0.to_vec();
    let mut fd = prob.surrogate(gains, &d, lambda, w);
    let mut grad = vec![0.0; d.len()];
    let mut cand = Vec::with_capacity(d.len());
    let mut trial = vec![0.0; d.len()];
    let mut step = 1e-2;
    for _ in 0..iters {
        prob.gradient(gains, &d, lambda, w, &mut grad);
        // Keep trial points within a few orders of the simplex scale so the
        // projection arithmetic stays well conditioned.
        let gmax = grad.iter().fold(0.0f64, |m, &g| m.max(g.abs()));
        if gmax > 0.0 && step * gmax > 1e6 {
            step = 1e6 / gmax;
        }
        let mut improved = false;
        for _ in 0..40 {
            for i in 0..d.len() {
                trial[i] = d[i] + step * grad[i];
            }
            project_simplex(&trial, 1.0, &mut cand);
            let fc = prob.surrogate(gains, &cand, lambda, w);
            if fc > fd {
                std::mem::swap(&mut d, &mut cand);
                fd = fc;
                step *= 1.6;
                improved = true;
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    d
}

/// Steering by continuous relaxation: optimizes selection weights on the
/// grid simplex, majorizing an l0 sparsity target by reweighted lq penalties
/// of doubling strength until the weights concentrate, then rounds to the
/// heaviest cell.
///
/// The first inner solve runs from the uniform start plus seeded random
/// restarts; later reweighting iterations warm-start from the incumbent.
/// Because the relaxed landscape rewards mixtures of per-user beams, a raw
/// argmax rounding can land in a single user's basin; every rounding seen
/// along the path is therefore refined by neighborhood ascent on the true
/// discrete objective, and the best refined cell is returned.
/// Steepest-ascent refinement of a one-hot rounding: climb through the
/// 3x3x3 grid neighborhood (alpha clipped, beta wrapped, gamma clipped,
/// masked-out columns skipped) on the true discrete objective until no
/// neighbor improves. Returns `(objective, cell)`.
fn refine_rounding(
    table: &GainTable,
    start: usize,
    power_w: f64,
    noise: &NoiseModel,
) -> (f64, usize) {
    let grid = &table.grid;
    let (sa, sb, sg) = (grid.alphas.len(), grid.betas.len(), grid.gammas.len());
    let mut cur = start;
    let mut cur_obj = cell_log_rates(table, cur, power_w, noise);
    for _ in 0..500 {
        let (ia, ib, ig) = grid.cell_of(cur);
        let mut next = (cur_obj, cur);
        for da in -1i64..=1 {
            let ia2 = ia as i64 + da;
            if ia2 < 0 || ia2 >= sa as i64 {
                continue;
            }
            for db in -1i64..=1 {
                let ib2 = (ib as i64 + db).rem_euclid(sb as i64) as usize;
                if !grid.mask[grid.ab_index(ia2 as usize, ib2)] {
                    continue;
                }
                for dg in -1i64..=1 {
                    let ig2 = ig as i64 + dg;
                    if ig2 < 0 || ig2 >= sg as i64 {
                        continue;
                    }
                    let cell = grid.cell_index(ia2 as usize, ib2, ig2 as usize);
                    if cell == cur {
                        continue;
                    }
                    let obj = cell_log_rates(table, cell, power_w, noise);
                    if obj > next.0 || (obj == next.0 && cell < next.1) {
                        next = (obj, cell);
                    }
                }
            }
        }
        if next.1 == cur {
            break;
        }
        cur_obj = next.0;
        cur = next.1;
    }
    (cur_obj, cur)
}

pub fn solve_mm(
    table: &GainTable,
    power_w: f64,
    noise: &NoiseModel,
    config: &MmConfig,
) -> Result<MmOutcome> {
    let grid = &table.grid;
    let sg = grid.gammas.len();
    let mut active = Vec::new();
    for ia in 0..grid.alphas.len() {
        for ib in 0..grid.betas.len() {
            if grid.mask[grid.ab_index(ia, ib)] {
                let base = grid.cell_index(ia, ib, 0);
                active.extend(base..base + sg);
            }
        }
    }
    let m = active.len();
    if m == 0 {
        return Err(Error::EmptySearchSpace("no unmasked grid cell".into()));
    }
    let prob = RelaxedProblem {
        power_w,
        noise_pow: noise.power(),
        bandwidth: noise.bandwidth_hz,
    };
    let gains: Vec<Vec<f64>> = table
        .gains
        .iter()
        .map(|row| active.iter().map(|&c| row[c]).collect())
        .collect();

    let weights = |d: &[f64], w: &mut Vec<f64>| {
        w.clear();
        w.extend(
            d.iter()
                .map(|&x| config.q * (x + config.epsilon).powf(config.q - 1.0)),
        );
    };
    let argmax = |d: &[f64]| -> usize {
        let mut arg = 0;
        for (i, &x) in d.iter().enumerate() {
            if x > d[arg] {
                arg = i;
            }
        }
        arg
    };

    // One-hot roundings collected along the continuation path (plus each
    // user's personal-best cell); all are refined at the end.
    let mut roundings: Vec<usize> = Vec::new();
    let note = |roundings: &mut Vec<usize>, cell: usize| {
        if !roundings.contains(&cell) {
            roundings.push(cell);
        }
    };
    for g in &gains {
        let mut arg = 0;
        for (i, &x) in g.iter().enumerate() {
            if x > g[arg] {
                arg = i;
            }
        }
        note(&mut roundings, active[arg]);
    }

    // First subproblem (lambda0, weights at the uniform point): solved from
    // the uniform start plus seeded random restarts, judged by the shared
    // surrogate; later subproblems warm-start from the incumbent.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let uniform = vec![1.0 / m as f64; m];
    let mut w = Vec::with_capacity(m);
    weights(&uniform, &mut w);
    let mut starts: Vec<Vec<f64>> = vec![uniform];
    for _ in 0..config.restarts {
        let raw: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 1e-12).collect();
        let sum: f64 = raw.iter().sum();
        starts.push(raw.into_iter().map(|x| x / sum).collect());
    }
    let mut d: Option<(f64, Vec<f64>)> = None;
    for start in &starts {
        let sol = pga_simplex(&prob, &gains, start, config.lambda0, &w, config.inner_iters);
        let val = prob.surrogate(&gains, &sol, config.lambda0, &w);
        note(&mut roundings, active[argmax(&sol)]);
        if d.as_ref().is_none_or(|(best, _)| val > *best) {
            d = Some((val, sol));
        }
    }
    let (_, mut d) = d.unwrap();

    // Warm continuation on a shrinking working set: coordinates the
    // projection has zeroed stay out once the penalty dwarfs the smooth
    // gradient, so dropping them only removes dead weight.
    let mut live: Vec<usize> = (0..m).collect();
    let mut gains_live = gains.clone();
    let mut converged = false;
    let mut outer = 1;
    let mut lambda = config.lambda0;
    while outer < config.max_outer {
        if d.iter().any(|&x| x >= config.concentration) {
            converged = true;
            break;
        }
        if d.len() > 1 && d.iter().any(|&x| x == 0.0) {
            let keep: Vec<usize> = (0..d.len()).filter(|&i| d[i] > 0.0).collect();
            live = keep.iter().map(|&i| live[i]).collect();
            for row in gains_live.iter_mut() {
                *row = keep.iter().map(|&i| row[i]).collect();
            }
            d = keep.iter().map(|&i| d[i]).collect();
        }
        lambda *= config.lambda_growth;
        weights(&d, &mut w);
        let next = pga_simplex(&prob, &gains_live, &d, lambda, &w, config.inner_iters);
        note(&mut roundings, active[live[argmax(&next)]]);
        outer += 1;
        // Bitwise-tied cells can split mass forever (straight-down columns
        // share identical gains); a stalled iterate will never concentrate.
        let moved = d
            .iter()
            .zip(&next)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        d = next;
        if moved < 1e-15 {
            break;
        }
    }
    if d.iter().any(|&x| x >= config.concentration) {
        converged = true;
    }

    // Refine every distinct rounding on the discrete objective and keep the
    // best (ties to the lowest cell, matching enumeration).
    let mut best: (f64, usize) = (f64::NEG_INFINITY, usize::MAX);
    for &cell in &roundings {
        let (obj, refined) = refine_rounding(table, cell, power_w, noise);
        if obj > best.0 || (obj == best.0 && refined < best.1) {
            best = (obj, refined);
        }
    }

    let mut selection = vec![0.0; grid.n_cells()];
    for (i, &coord) in live.iter().enumerate() {
        selection[active[coord]] = d[i];
    }
    Ok(MmOutcome {
        selection,
        solution: solution_at_cell(table, best.1, power_w, noise),
        converged,
        outer_iterations: outer,
    })
}

// ── fixed baselines ─────────────────────────────────────────────────────────

/// Unsteered baseline: the beam faces straight down (`alpha=270`, `beta=0`)
/// with the default focus `gamma_def`, and users share time equally.
pub fn baseline_no_steering(
    users: &[Vec3],
    rx_orientation: Vec3,
    rx: &ReceiverParams,
    beam_position: Vec3,
    gamma_def: f64,
    power_w: f64,
    noise: &NoiseModel,
) -> Result<SteeringSolution> {
    if users.is_empty() {
        return Err(Error::invalid("baseline for an empty user set"));
    }
    let angles = SteeringAngles {
        alpha_deg: 270.0,
        beta_deg: 0.0,
    };
    let beam = crate::channel::BeamState {
        position: beam_position,
        angles,
        gamma: gamma_def,
        power_w,
    };
    let rates: Vec<f64> = users
        .iter()
        .map(|&u| {
            let h = crate::channel::los_gain(&beam, u, rx_orientation, rx)?;
            Ok(link_rate(h, power_w, noise))
        })
        .collect::<Result<_>>()?;
    let k = users.len() as f64;
    let tau = vec![1.0 / k; users.len()];
    let feasible = rates.iter().all(|&r| r > 0.0);
    let objective = if feasible {
        rates.iter().map(|&r| (r / k).ln()).sum()
    } else {
        f64::NEG_INFINITY
    };
    Ok(SteeringSolution {
        angles,
        gamma: gamma_def,
        tau,
        per_user_rate_bps: rates,
        objective,
        cell: None,
        feasible,
    })
}

// ── genie-aided fast beam steering ──────────────────────────────────────────

/// Rates of the genie baseline: each user is served for `1/K` of the time by
/// a beam pointed exactly at it with the on-axis-optimal focus `gamma_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenieRates {
    /// Full-slot rate of each user under perfect pointing.
    pub per_user_rate_bps: Vec<f64>,
    /// `sum_k R_k / K`.
    pub sum_rate_bps: f64,
}

/// Upper-bound baseline with idealized per-user pointing (no grid, no
/// steering delay). Dominates every grid-steered single-beam solution.
pub fn baseline_genie_fast(
    users: &[Vec3],
    rx_orientation: Vec3,
    rx: &ReceiverParams,
    beam_position: Vec3,
    gamma_max: f64,
    power_w: f64,
    noise: &NoiseModel,
) -> Result<GenieRates> {
    if users.is_empty() {
        return Err(Error::invalid("genie baseline for an empty user set"));
    }
    let mut rates = Vec::with_capacity(users.len());
    for &u in users {
        let v = u.sub(beam_position);
        let d = v.norm();
        if d == 0.0 {
            return Err(Error::invalid("user coincides with the beam position"));
        }
        let cos_theta = -v.dot(rx_orientation) / d;
        // Pointing straight at the user: cos(phi) = 1 exactly.
        let h = los_gain_components(gamma_max, rx, 1.0, cos_theta, d);
        rates.push(link_rate(h, power_w, noise));
    }
    let k = users.len() as f64;
    let sum = rates.iter().sum::<f64>() / k;
    Ok(GenieRates {
        per_user_rate_bps: rates,
        sum_rate_bps: sum,
    })
}

// ── tests ───────────────────────────────────────────────────────────────────
