//! Scratch probe for acceptance-scale statistics and timings.

use std::time::Instant;

use vlcbeam::harness::{run_experiment, ExperimentKind, ExperimentSpec, Scenario, Scheme};

fn main() {
    let which: Vec<String> = std::env::args().skip(1).collect();
    let has = |name: &str| which.is_empty() || which.iter().any(|w| w == name);
    let scenario = Scenario::default();

    if has("c11") {
        use vlcbeam::geometry::{
            convex_hull, orientation_from_angles, reduced_grid, AngleGrid, Point2,
        };
        use vlcbeam::harness::{sample_users, trial_seed};
        use vlcbeam::steering::{build_gain_table, solve_enumeration};
        let rx = scenario.receiver();
        let noise = scenario.noise();
        let gammas = scenario.gammas();
        let ap = scenario.ap_position_m;
        let plane_z = scenario.user_height_m;
        let t0 = Instant::now();
        let mut bad = 0usize;
        let total = 4000u64;
        for i in 0..total {
            let (master, j) = if i < 2000 { (0xacce11, i) } else { (0xba11ad, i - 2000) };
            let k = if j % 200 < 100 { 2 } else { 3 };
            let users = sample_users(&scenario, k, trial_seed(master, j)).unwrap();
            let points: Vec<Point2> = users.iter().map(|u| [u.x, u.y]).collect();
            let hull = convex_hull(&points).unwrap();
            let red = reduced_grid(
                &hull,
                ap,
                plane_z,
                scenario.alpha_limits_deg,
                scenario.delta_deg,
                &gammas,
            )
            .unwrap();
            let full =
                AngleGrid::full(scenario.alpha_limits_deg, scenario.delta_deg, &gammas).unwrap();
            let tf = build_gain_table(&users, scenario.rx_orientation(), &rx, ap, full).unwrap();
            let tr =
                build_gain_table(&users, scenario.rx_orientation(), &rx, ap, red.clone()).unwrap();
            let sf = solve_enumeration(&tf, scenario.total_power_w, &noise).unwrap();
            let sr = solve_enumeration(&tr, scenario.total_power_w, &noise).unwrap();
            let (ia, ib, _) = tf.grid.cell_of(sf.cell.unwrap());
            let masked_in = red.mask[red.ab_index(ia, ib)];
            if sf.cell != sr.cell || sf.objective != sr.objective || !masked_in {
                bad += 1;
                let o = orientation_from_angles(sf.angles);
                let step = (plane_z - ap.z) / o.z;
                let cross = [ap.x + step * o.x, ap.y + step * o.y];
                println!(
                    "i={i} k={k} kind={:?} users={:?}",
                    hull.kind,
                    users
                        .iter()
                        .map(|u| (u.x, u.y))
                        .collect::<Vec<_>>()
                );
                println!(
                    "  full: cell={:?} a={} b={} g={} obj={:.9e}",
                    sf.cell, sf.angles.alpha_deg, sf.angles.beta_deg, sf.gamma, sf.objective
                );
                println!(
                    "  red : cell={:?} a={} b={} g={} obj={:.9e} masked_in={masked_in}",
                    sr.cell, sr.angles.alpha_deg, sr.angles.beta_deg, sr.gamma, sr.objective
                );
                println!(
                    "  crossing=({:.4}, {:.4}) contains(1e-9)={} contains(0.15)={}",
                    cross[0],
                    cross[1],
                    hull.contains(cross, 1e-9),
                    hull.contains(cross, 0.15)
                );
                // Minimum angular Chebyshev distance (in half-steps) from the
                // winning cell to the angular image of any hull point.
                let half = scenario.delta_deg * 0.5;
                let mut best = f64::INFINITY;
                let verts = hull.vertices.clone();
                let edges: Vec<(Point2, Point2)> = match verts.len() {
                    1 => vec![(verts[0], verts[0])],
                    2 => vec![(verts[0], verts[1])],
                    _ => (0..verts.len())
                        .map(|j| (verts[j], verts[(j + 1) % verts.len()]))
                        .collect(),
                };
                for (a, b) in edges {
                    for s in 0..=4000 {
                        let t01 = s as f64 / 4000.0;
                        let q = [a[0] + t01 * (b[0] - a[0]), a[1] + t01 * (b[1] - a[1])];
                        let dx = q[0] - ap.x;
                        let dy = q[1] - ap.y;
                        let dz = plane_z - ap.z;
                        let n = (dx * dx + dy * dy + dz * dz).sqrt();
                        let (ux, uy, uz) = (dx / n, dy / n, dz / n);
                        let asin_deg = uz.clamp(-1.0, 1.0).asin().to_degrees();
                        let bet = uy.atan2(ux).to_degrees().rem_euclid(360.0);
                        for (aa, bb) in [
                            (360.0 + asin_deg, bet),
                            (180.0 - asin_deg, (bet + 180.0).rem_euclid(360.0)),
                        ] {
                            let da = (sf.angles.alpha_deg - aa).abs();
                            let w = (sf.angles.beta_deg - bb).rem_euclid(360.0);
                            let db = w.min(360.0 - w);
                            best = best.min(da.max(db) / half);
                        }
                    }
                }
                println!("  needed dilation: {best:.2} half-steps");
            }
        }
        println!(
            "c11: violations={bad}/{total} elapsed={:.1?}",
            t0.elapsed()
        );
    }

    if has("c1") {
        let t0 = Instant::now();
        let mut spec = ExperimentSpec::preset(ExperimentKind::SingleBeamSweep);
        spec.k_values = vec![1];
        spec.trials = 200;
        spec.schemes = vec![Scheme::NoSteering, Scheme::Sbsf];
        let report = run_experiment(&scenario, &spec).unwrap();
        let ns = report.mean_sum_rate("no_steering", 1, 1).unwrap();
        let sbsf = report.mean_sum_rate("sbsf", 1, 1).unwrap();
        println!(
            "c1: ratio={:.3} sbsf={:.3e} ns={:.3e} elapsed={:.1?}",
            sbsf / ns,
            sbsf,
            ns,
            t0.elapsed()
        );
    }

    if has("c2") {
        let t0 = Instant::now();
        let spec = ExperimentSpec::preset(ExperimentKind::SingleBeamSweep);
        let report = run_experiment(&scenario, &spec).unwrap();
        for k in 1..=10 {
            let m = |s: &str| report.mean_sum_rate(s, k, 1).unwrap();
            let (ns, sbs, sbsf, ga) = (m("no_steering"), m("sbs"), m("sbsf"), m("ga_fbs"));
            let ok = ga >= sbsf && sbsf >= sbs && sbs >= ns;
            println!(
                "c2 K={k}: ga={:.4e} sbsf={:.4e} sbs={:.4e} ns={:.4e} ordered={ok}",
                ga, sbsf, sbs, ns
            );
        }
        println!("c2 elapsed={:.1?} excl={}", t0.elapsed(), report.metadata.excluded_trials);
    }

    if has("c2diag") {
        use vlcbeam::geometry::search_grid_for_users;
        use vlcbeam::harness::{sample_users, trial_seed};
        use vlcbeam::steering::{build_gain_table, solve_enumeration};
        let rx = scenario.receiver();
        let noise = scenario.noise();
        let p = scenario.total_power_w;
        let solve = |users: &[vlcbeam::geometry::Vec3], gammas: &[f64]| {
            let grid = search_grid_for_users(
                users,
                scenario.ap_position_m,
                (scenario.alpha_limits_deg.0, scenario.alpha_limits_deg.1),
                scenario.delta_deg,
                gammas,
            )
            .unwrap();
            let table =
                build_gain_table(users, scenario.rx_orientation(), &rx, scenario.ap_position_m, grid)
                    .unwrap();
            solve_enumeration(&table, p, &noise).unwrap()
        };
        let full: Vec<f64> = scenario.gammas();
        let fixed = [f64::from(scenario.gamma_def)];
        for k in [2usize, 5, 8, 10] {
            let mut log_viol = 0usize;
            let mut sum_inv = 0usize;
            let (mut mean_sbs, mut mean_sbsf) = (0.0f64, 0.0f64);
            let mut hist = std::collections::BTreeMap::<u32, usize>::new();
            let trials = 100u64;
            for t in 0..trials {
                let users = sample_users(&scenario, k, trial_seed(scenario.seed, t)).unwrap();
                let sbs = solve(&users, &fixed);
                let sbsf = solve(&users, &full);
                if sbsf.objective < sbs.objective {
                    log_viol += 1;
                }
                let sum = |s: &vlcbeam::steering::SteeringSolution| -> f64 {
                    s.tau.iter().zip(&s.per_user_rate_bps).map(|(t, r)| t * r).sum()
                };
                let (ss, sf) = (sum(&sbs), sum(&sbsf));
                if sf < ss {
                    sum_inv += 1;
                }
                mean_sbs += ss;
                mean_sbsf += sf;
                *hist.entry(sbsf.gamma as u32).or_default() += 1;
            }
            mean_sbs /= trials as f64;
            mean_sbsf /= trials as f64;
            println!(
                "c2diag K={k}: log_viol={log_viol} sum_inversions={sum_inv}/{trials} mean_sbs={mean_sbs:.4e} mean_sbsf={mean_sbsf:.4e} gamma_hist={hist:?}"
            );
        }
    }

    if has("c3") {
        let t0 = Instant::now();
        let spec = ExperimentSpec::preset(ExperimentKind::BeamCountSweep);
        let report = run_experiment(&scenario, &spec).unwrap();
        let ns = report.mean_sum_rate("no_steering", 10, 1).unwrap();
        for n in 1..=5 {
            let ms = report.mean_sum_rate("multi_stream", 10, n).unwrap();
            println!("c3 N={n}: multi={:.4e} ratio={:.3}", ms, ms / ns);
        }
        println!("c3 elapsed={:.1?} excl={}", t0.elapsed(), report.metadata.excluded_trials);
    }

    if has("c4") {
        let t0 = Instant::now();
        let spec = ExperimentSpec::preset(ExperimentKind::PowerOptSweep);
        let report = run_experiment(&scenario, &spec).unwrap();
        for k in 6..=10 {
            let eq = report.mean_sum_rate("multi_stream", k, 3).unwrap();
            let opt = report.mean_sum_rate("power_opt_sum", k, 3).unwrap();
            println!("c4 K={k}: gain={:.2} Mbps (eq={:.1} opt={:.1})", (opt - eq) / 1e6, eq / 1e6, opt / 1e6);
        }
        println!("c4 elapsed={:.1?} excl={}", t0.elapsed(), report.metadata.excluded_trials);
    }

    if has("c5") {
        let t0 = Instant::now();
        let mut spec = ExperimentSpec::preset(ExperimentKind::BeamCountSweep);
        spec.k_values = vec![10];
        spec.n_values = vec![10];
        spec.trials = 50;
        spec.schemes = vec![Scheme::NoSteering, Scheme::PowerOptSum];
        let report = run_experiment(&scenario, &spec).unwrap();
        let ns = report.mean_sum_rate("no_steering", 10, 10).unwrap();
        let opt = report.mean_sum_rate("power_opt_sum", 10, 10).unwrap();
        println!("c5: ratio={:.3} opt={:.3e} ns={:.3e} elapsed={:.1?}", opt / ns, opt, ns, t0.elapsed());
    }

    if has("c6") {
        for mode in ["log", "sum"] {
            let t0 = Instant::now();
            let mut spec = ExperimentSpec::preset(ExperimentKind::NomaCoeffSweep);
            spec.trials = 70;
            spec.noma_objective = if mode == "log" {
                vlcbeam::noma::NomaObjective::LogRate
            } else {
                vlcbeam::noma::NomaObjective::SumRate
            };
            let report = run_experiment(&scenario, &spec).unwrap();
            let mut all: Vec<f64> = Vec::new();
            let mut served: Vec<f64> = Vec::new();
            for r in report.rows.iter().filter(|r| r.trial >= 0) {
                let gain = (r.rate_bps - r.sum_rate_bps) / 1e6;
                all.push(gain);
                if r.objective > 0.0 {
                    served.push(gain);
                }
            }
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            served.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let med = |v: &[f64]| v[v.len() / 2];
            println!(
                "c6[{mode}]: pairs={} served={} median_all={:.2} median_served={:.2} served_p10={:.2} served_p90={:.2} elapsed={:.1?}",
                all.len(),
                served.len(),
                med(&all),
                med(&served),
                served[served.len() / 10],
                served[served.len() * 9 / 10],
                t0.elapsed()
            );
        }
    }

    if has("c8") {
        use vlcbeam::geometry::search_grid_for_users;
        use vlcbeam::harness::{sample_users, trial_seed};
        use vlcbeam::steering::{build_gain_table, solve_enumeration, solve_mm, MmConfig};
        let t0 = Instant::now();
        let rx = scenario.receiver();
        let noise = scenario.noise();
        let gammas = scenario.gammas();
        let mut within = 0usize;
        let mut worst = 0.0f64;
        let trials = 200usize;
        for t in 0..trials {
            let k = 1 + t % 5;
            let users =
                sample_users(&scenario, k, trial_seed(0xacce97, t as u64)).unwrap();
            let grid = search_grid_for_users(
                &users,
                scenario.ap_position_m,
                scenario.alpha_limits_deg,
                2.0,
                &gammas,
            )
            .unwrap();
            let table = build_gain_table(
                &users,
                scenario.rx_orientation(),
                &rx,
                scenario.ap_position_m,
                grid,
            )
            .unwrap();
            let exact = solve_enumeration(&table, scenario.total_power_w, &noise).unwrap();
            let mm = solve_mm(&table, scenario.total_power_w, &noise, &MmConfig::default())
                .unwrap();
            let gap = (exact.objective - mm.solution.objective) / exact.objective.abs();
            worst = worst.max(gap);
            if gap <= 0.01 {
                within += 1;
            }
        }
        println!(
            "c8: within={within}/{trials} worst_gap={worst:.5} elapsed={:.1?}",
            t0.elapsed()
        );
    }

    if has("c9") {
        use vlcbeam::channel::los_gain;
        use vlcbeam::clustering::{vuc, VucConfig};
        use vlcbeam::harness::{sample_users, trial_seed};
        use vlcbeam::power::{
            brute_force_power_oracle, power_objective, sca_power_opt, PowerObjective, ScaConfig,
        };
        let t0 = Instant::now();
        let noise = scenario.noise();
        let rx = scenario.receiver();
        let p = scenario.total_power_w;
        let mut within = 0usize;
        let mut worst = 0.0f64;
        let mut trace_ok = true;
        let trials = 50usize;
        for t in 0..trials {
            let n = 2 + t % 2;
            let k = 4 + t % 5;
            let users = sample_users(&scenario, k, trial_seed(0xacce99, t as u64)).unwrap();
            let cfg = VucConfig {
                alpha_limits_deg: scenario.alpha_limits_deg,
                delta_deg: scenario.delta_deg,
                gammas: scenario.gammas(),
                max_iters: 20,
                solver: Default::default(),
            };
            let sol = vuc(
                &users,
                scenario.rx_orientation(),
                &rx,
                scenario.ap_position_m,
                &vec![p / n as f64; n],
                &noise,
                &cfg,
            )
            .unwrap();
            let gains: Vec<Vec<f64>> = users
                .iter()
                .map(|&u| {
                    sol.beams
                        .iter()
                        .map(|b| los_gain(b, u, scenario.rx_orientation(), &rx).unwrap())
                        .collect()
                })
                .collect();
            let objective = if t % 2 == 0 {
                PowerObjective::SumRate
            } else {
                PowerObjective::LogRate
            };
            let (alloc, state) = sca_power_opt(
                &sol.assignment,
                &gains,
                p,
                &noise,
                objective,
                &ScaConfig::default(),
            )
            .unwrap();
            for w in state.objective_trace.windows(2) {
                if w[1] < w[0] - 1e-6 {
                    trace_ok = false;
                }
            }
            let oracle = brute_force_power_oracle(
                &sol.assignment,
                &gains,
                p,
                &noise,
                objective,
                p / 200.0,
            )
            .unwrap();
            let tau = sol.assignment.tau();
            let sca_obj = power_objective(
                &gains,
                &sol.assignment.assignment,
                &tau,
                &alloc.powers,
                &noise,
                objective,
            );
            let oracle_obj = power_objective(
                &gains,
                &sol.assignment.assignment,
                &tau,
                &oracle.powers,
                &noise,
                objective,
            );
            let gap = (oracle_obj - sca_obj) / oracle_obj.abs();
            worst = worst.max(gap);
            if gap <= 0.02 {
                within += 1;
            }
        }
        println!(
            "c9: within={within}/{trials} worst_gap={worst:.5} trace_ok={trace_ok} elapsed={:.1?}",
            t0.elapsed()
        );
    }

    if has("c7") {
        let t0 = Instant::now();
        let mut spec = ExperimentSpec::preset(ExperimentKind::NomaThresholdSweep);
        spec.trials = 60;
        let report = run_experiment(&scenario, &spec).unwrap();
        for xi in &spec.xi_sweep {
            let f = report
                .rows
                .iter()
                .find(|r| r.trial == -1 && r.experiment.ends_with(&format!("xi_star={xi}")))
                .unwrap()
                .objective;
            println!("c7 xi={xi}: fraction={f:.4}");
        }
        for rho in &spec.rho2_sweep {
            let f = report
                .rows
                .iter()
                .find(|r| r.trial == -1 && r.experiment.ends_with(&format!("rho2={rho}")))
                .unwrap()
                .objective;
            println!("c7 rho2={rho}: fraction={f:.4}");
        }
        println!("c7 elapsed={:.1?}", t0.elapsed());
    }
}
