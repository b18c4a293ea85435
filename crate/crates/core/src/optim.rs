//! Small deterministic optimization utilities shared by the solvers:
//! Euclidean simplex projections and golden-section search.

/// Projects `v` onto the probability simplex `{ x >= 0, sum x = radius }`
/// (sort-based algorithm, O(n log n)).
pub fn project_simplex(v: &[f64], radius: f64, out: &mut Vec<f64>) {
    debug_assert!(radius > 0.0);
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut rho = 0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - radius) / (i + 1) as f64;
        if ui - t > 0.0 {
            rho = i + 1;
            theta = t;
        }
    }
    out.clear();
    if rho == 0 {
        // Magnitudes so large that `radius` is lost to rounding (or
        // non-finite input): the projection degenerates to the argmax vertex.
        let mut arg = 0;
        for (i, &x) in v.iter().enumerate() {
            if x > v[arg] {
                arg = i;
            }
        }
        out.extend((0..v.len()).map(|i| if i == arg { radius } else { 0.0 }));
        return;
    }
    out.extend(v.iter().map(|&x| (x - theta).max(0.0)));
}

/// Projects `v` onto `{ x >= 0, sum x <= budget }`: clip to the orthant and,
/// if the budget is exceeded, fall back to the simplex boundary.
pub fn project_capped_simplex(v: &[f64], budget: f64, out: &mut Vec<f64>) {
    let clipped_sum: f64 = v.iter().map(|&x| x.max(0.0)).sum();
    if clipped_sum <= budget {
        out.clear();
        out.extend(v.iter().map(|&x| x.max(0.0)));
    } else {
        project_simplex(v, budget, out);
    }
}

/// Maximizes a unimodal function on `[lo, hi]` by golden-section search to
/// an interval of width `tol`; returns the better of the interior estimate
/// and both endpoints.
pub fn golden_section_max(lo: f64, hi: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    debug_assert!(lo <= hi);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
        }
    }
    let xm = 0.5 * (a + b);
    let candidates = [(xm, f(xm)), (lo, f(lo)), (hi, f(hi))];
    candidates
        .into_iter()
        .fold((xm, f64::NEG_INFINITY), |best, (x, fx)| {
            if fx > best.1 {
                (x, fx)
            } else {
                best
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} != {b} (tol {tol})");
    }

    #[test]
    fn simplex_projection_reference_cases() {
        let mut out = Vec::new();
        // Already on the simplex: unchanged.
        project_simplex(&[0.2, 0.3, 0.5], 1.0, &mut out);
        for (a, b) in out.iter().zip([0.2, 0.3, 0.5]) {
            assert_close(*a, b, 1e-12);
        }
        // Uniform stays uniform.
        project_simplex(&[5.0, 5.0, 5.0, 5.0], 1.0, &mut out);
        for &x in &out {
            assert_close(x, 0.25, 1e-12);
        }
        // A dominant coordinate saturates.
        project_simplex(&[10.0, 0.0, 0.0], 1.0, &mut out);
        assert_close(out[0], 1.0, 1e-12);
        assert_close(out[1], 0.0, 1e-12);
    }

    #[test]
    fn simplex_projection_is_feasible_and_idempotent() {
        let v = [0.3, -2.0, 1.7, 0.01, -0.4, 2.2];
        let mut out = Vec::new();
        project_simplex(&v, 1.0, &mut out);
        assert!(out.iter().all(|&x| x >= 0.0));
        assert_close(out.iter().sum::<f64>(), 1.0, 1e-12);
        let mut twice = Vec::new();
        project_simplex(&out, 1.0, &mut twice);
        for (a, b) in out.iter().zip(&twice) {
            assert_close(*a, *b, 1e-12);
        }
    }

    #[test]
    fn capped_projection_keeps_interior_points() {
        let mut out = Vec::new();
        project_capped_simplex(&[0.1, 0.2, -0.3], 1.0, &mut out);
        assert_close(out[0], 0.1, 1e-15);
        assert_close(out[1], 0.2, 1e-15);
        assert_close(out[2], 0.0, 1e-15);

        project_capped_simplex(&[2.0, 2.0], 1.0, &mut out);
        assert_close(out.iter().sum::<f64>(), 1.0, 1e-12);
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(0.0, 10.0, 1e-10, |x| -(x - 3.7) * (x - 3.7));
        assert_close(x, 3.7, 1e-8);
        assert_close(fx, 0.0, 1e-15);
    }

    #[test]
    fn golden_section_handles_boundary_maxima() {
        let (x, _) = golden_section_max(0.0, 1.0, 1e-12, |x| x);
        assert_close(x, 1.0, 1e-9);
        let (x, _) = golden_section_max(0.0, 1.0, 1e-12, |x| -x);
        assert_close(x, 0.0, 1e-9);
    }
}
