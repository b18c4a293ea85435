//! Beam-pointing geometry: steering angles, link geometry, convex hulls of
//! user positions, and search-grid reduction.
//!
//! A beam orientation is parameterized by a polar angle `alpha` and an
//! azimuth `beta` (both in degrees):
//!
//! ```text
//! n_tx = [cos(beta) cos(alpha), sin(beta) cos(alpha), sin(alpha)]
//! ```
//!
//! `alpha = 270°` points straight down regardless of `beta`; trigonometry is
//! evaluated degree-exactly so that this identity holds bitwise (every
//! `(270°, beta)` cell maps to exactly `(0, 0, -1)`).
//!
//! The search-grid reducer exploits the fact that for users in a common
//! horizontal plane, an optimal beam axis crosses that plane inside the
//! convex hull of the user positions. Cells are masked out unless their
//! axis/plane crossing lies within one-step spatial reach of the hull —
//! discretization noise near a flat optimum can land the best cell one cell
//! past the hull, and what one cell means spatially varies over the grid,
//! shrinking to nothing near straight-down.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ── vectors and angles ──────────────────────────────────────────────────────

/// 3-D vector in meters (positions) or dimensionless (orientations).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        self.scale(1.0 / n)
    }
}

/// Cosine in degrees, exact at multiples of 90°.
pub(crate) fn cos_deg(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        1.0
    } else if r == 90.0 {
        0.0
    } else if r == 180.0 {
        -1.0
    } else if r == 270.0 {
        0.0
    } else {
        r.to_radians().cos()
    }
}

/// Sine in degrees, exact at multiples of 90°.
pub(crate) fn sin_deg(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        0.0
    } else if r == 90.0 {
        1.0
    } else if r == 180.0 {
        0.0
    } else if r == 270.0 {
        -1.0
    } else {
        r.to_radians().sin()
    }
}

/// Beam steering angles in degrees.
///
/// `alpha_deg` is the polar angle in `[180°, 360°]` (270° = straight down);
/// `beta_deg` is the azimuth, normalized to `[0°, 360°)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringAngles {
    pub alpha_deg: f64,
    pub beta_deg: f64,
}

impl SteeringAngles {
    /// Validates `alpha` and wraps `beta` into `[0°, 360°)`.
    pub fn new(alpha_deg: f64, beta_deg: f64) -> Result<Self> {
        if !(180.0..=360.0).contains(&alpha_deg) || !alpha_deg.is_finite() {
            return Err(Error::invalid(format!(
                "alpha_deg {alpha_deg} outside [180, 360]"
            )));
        }
        if !beta_deg.is_finite() {
            return Err(Error::invalid("beta_deg must be finite"));
        }
        Ok(SteeringAngles {
            alpha_deg,
            beta_deg: beta_deg.rem_euclid(360.0),
        })
    }
}

/// Unit orientation vector for the given steering angles.
pub fn orientation_from_angles(angles: SteeringAngles) -> Vec3 {
    let ca = cos_deg(angles.alpha_deg);
    let sa = sin_deg(angles.alpha_deg);
    let cb = cos_deg(angles.beta_deg);
    let sb = sin_deg(angles.beta_deg);
    Vec3::new(cb * ca, sb * ca, sa)
}

/// Raw link geometry between a transmitter and a receiver.
///
/// `cos_phi` is the cosine of the angle of irradiance (off the transmitter
/// orientation), `cos_theta` the cosine of the angle of incidence (off the
/// receiver orientation). Neither is clamped; negative values mean the link
/// points away.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub cos_phi: f64,
    pub cos_theta: f64,
    pub distance_m: f64,
}

/// Computes irradiance/incidence cosines and distance for one link.
///
/// Errors when the positions coincide (the geometry is undefined).
pub fn link_geometry(
    tx_pos: Vec3,
    tx_orientation: Vec3,
    rx_pos: Vec3,
    rx_orientation: Vec3,
) -> Result<LinkGeometry> {
    let v = rx_pos.sub(tx_pos);
    let d = v.norm();
    if d == 0.0 {
        return Err(Error::invalid("transmitter and receiver positions coincide"));
    }
    Ok(LinkGeometry {
        cos_phi: v.dot(tx_orientation) / d,
        cos_theta: -v.dot(rx_orientation) / d,
        distance_m: d,
    })
}

// ── convex hull ─────────────────────────────────────────────────────────────

/// 2-D point (meters) in the users' horizontal plane.
pub type Point2 = [f64; 2];

/// Shape class of a [`Hull2D`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HullKind {
    /// All input points coincide; one vertex.
    Point,
    /// All input points are collinear; two extreme vertices.
    Segment,
    /// Proper polygon; at least three counter-clockwise vertices.
    Polygon,
}

/// Convex hull of user positions in a common horizontal plane.
///
/// Vertices are counter-clockwise, start at the lexicographically smallest
/// vertex, and contain no collinear triples.
#[derive(Debug, Clone, PartialEq)]
pub struct Hull2D {
    pub vertices: Vec<Point2>,
    pub kind: HullKind,
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dist2(a: Point2, b: Point2) -> f64 {
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    dx * dx + dy * dy
}

/// Graham scan. Accepts duplicates and collinear inputs; empty input is an
/// error. Runs in O(n log n).
pub fn convex_hull(points: &[Point2]) -> Result<Hull2D> {
    if points.is_empty() {
        return Err(Error::invalid("convex hull of an empty point set"));
    }
    if points.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::invalid("convex hull input contains non-finite coordinates"));
    }

    // Deduplicate exactly equal points.
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();

    if pts.len() == 1 {
        return Ok(Hull2D {
            vertices: pts,
            kind: HullKind::Point,
        });
    }
    // pts is lexicographically sorted, so pts[0]/pts[last] are the extremes
    // of any collinear set.
    let all_collinear = pts
        .iter()
        .all(|&p| cross(pts[0], *pts.last().unwrap(), p) == 0.0);
    if all_collinear {
        return Ok(Hull2D {
            vertices: vec![pts[0], *pts.last().unwrap()],
            kind: HullKind::Segment,
        });
    }

    // Pivot: lowest y, then lowest x.
    let pivot = *pts
        .iter()
        .min_by(|a, b| (a[1], a[0]).partial_cmp(&(b[1], b[0])).unwrap())
        .unwrap();
    let mut rest: Vec<Point2> = pts.into_iter().filter(|&p| p != pivot).collect();
    rest.sort_by(|&a, &b| {
        let c = cross(pivot, a, b);
        if c > 0.0 {
            std::cmp::Ordering::Less
        } else if c < 0.0 {
            std::cmp::Ordering::Greater
        } else {
            dist2(pivot, a).partial_cmp(&dist2(pivot, b)).unwrap()
        }
    });
    // Points collinear with the pivot on the farthest ray must be scanned in
    // descending distance so the far endpoint survives.
    let last = *rest.last().unwrap();
    let tail_start = rest
        .iter()
        .rposition(|&p| cross(pivot, last, p) != 0.0)
        .map_or(0, |i| i + 1);
    rest[tail_start..].reverse();

    let mut stack: Vec<Point2> = vec![pivot];
    for p in rest {
        while stack.len() >= 2 && cross(stack[stack.len() - 2], stack[stack.len() - 1], p) <= 0.0 {
            stack.pop();
        }
        stack.push(p);
    }

    // Canonical start: rotate to the lexicographically smallest vertex.
    let start = stack
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    stack.rotate_left(start);
    Ok(Hull2D {
        vertices: stack,
        kind: HullKind::Polygon,
    })
}

fn point_segment_dist(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    dist2(p, q).sqrt()
}

impl Hull2D {
    /// Inside-or-on membership with a tolerance in meters.
    pub fn contains(&self, p: Point2, tol_m: f64) -> bool {
        match self.kind {
            HullKind::Point => dist2(p, self.vertices[0]).sqrt() <= tol_m,
            HullKind::Segment => {
                point_segment_dist(p, self.vertices[0], self.vertices[1]) <= tol_m
            }
            HullKind::Polygon => {
                let n = self.vertices.len();
                (0..n).all(|i| {
                    let a = self.vertices[i];
                    let b = self.vertices[(i + 1) % n];
                    // cross / |b - a| is the signed distance to edge ab.
                    cross(a, b, p) >= -tol_m * dist2(a, b).sqrt()
                })
            }
        }
    }

    /// Euclidean distance from `p` to the hull (zero on or inside it).
    fn distance(&self, p: Point2) -> f64 {
        match self.kind {
            HullKind::Point => dist2(p, self.vertices[0]).sqrt(),
            HullKind::Segment => point_segment_dist(p, self.vertices[0], self.vertices[1]),
            HullKind::Polygon => {
                if self.contains(p, 0.0) {
                    return 0.0;
                }
                let n = self.vertices.len();
                (0..n)
                    .map(|i| point_segment_dist(p, self.vertices[i], self.vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

// ── steering grids ──────────────────────────────────────────────────────────

/// Membership tolerance (meters) for axis/plane intersections against hulls.
const CONTAIN_TOL_M: f64 = 1e-9;

/// Discretized steering search space.
///
/// `alphas`, `betas`, `gammas` are strictly increasing axis values; `mask`
/// has one entry per `(alpha, beta)` cell (row-major over `alphas` then
/// `betas`) and marks cells that stay in the search space.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub mask: Vec<bool>,
}

fn axis_values(lo: f64, hi: f64, step: f64, closed: bool) -> Vec<f64> {
    let mut vals = Vec::new();
    let mut k = 0usize;
    loop {
        let v = lo + (k as f64) * step;
        let limit = if closed { hi + step * 1e-9 } else { hi - step * 1e-9 };
        if v > limit {
            break;
        }
        vals.push(v);
        k += 1;
    }
    vals
}

impl AngleGrid {
    /// Full (unmasked) grid over `alpha_limits` x `[0°, 360°)` with step
    /// `delta_deg` and the given `gammas`.
    pub fn full(alpha_limits: (f64, f64), delta_deg: f64, gammas: &[f64]) -> Result<Self> {
        let (lo, hi) = alpha_limits;
        if !(delta_deg.is_finite() && delta_deg > 0.0) {
            return Err(Error::invalid(format!("grid step {delta_deg} must be positive")));
        }
        if !(180.0 <= lo && lo <= hi && hi <= 360.0) {
            return Err(Error::invalid(format!(
                "alpha limits ({lo}, {hi}) outside [180, 360]"
            )));
        }
        if gammas.is_empty() || gammas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("gammas must be non-empty and strictly increasing"));
        }
        if gammas.iter().any(|&g| !(g.is_finite() && g >= 1.0)) {
            return Err(Error::invalid("gammas must be finite and >= 1"));
        }
        let alphas = axis_values(lo, hi, delta_deg, true);
        let betas = axis_values(0.0, 360.0, delta_deg, false);
        let mask = vec![true; alphas.len() * betas.len()];
        Ok(AngleGrid {
            alphas,
            betas,
            gammas: gammas.to_vec(),
            mask,
        })
    }

    /// Number of `(alpha, beta)` cells.
    pub fn n_ab(&self) -> usize {
        self.alphas.len() * self.betas.len()
    }

    /// Number of `(alpha, beta, gamma)` cells.
    pub fn n_cells(&self) -> usize {
        self.n_ab() * self.gammas.len()
    }

    /// Flattened `(alpha, beta)` index.
    pub fn ab_index(&self, ia: usize, ib: usize) -> usize {
        ia * self.betas.len() + ib
    }

    /// Flattened `(alpha, beta, gamma)` cell index; bijective with
    /// [`AngleGrid::cell_of`].
    pub fn cell_index(&self, ia: usize, ib: usize, ig: usize) -> usize {
        self.ab_index(ia, ib) * self.gammas.len() + ig
    }

    /// Inverse of [`AngleGrid::cell_index`].
    pub fn cell_of(&self, cell: usize) -> (usize, usize, usize) {
        let ig = cell % self.gammas.len();
        let ab = cell / self.gammas.len();
        (ab / self.betas.len(), ab % self.betas.len(), ig)
    }

    /// Steering angles and directivity index of a flattened cell.
    pub fn cell_params(&self, cell: usize) -> (SteeringAngles, f64) {
        let (ia, ib, ig) = self.cell_of(cell);
        (
            SteeringAngles {
                alpha_deg: self.alphas[ia],
                beta_deg: self.betas[ib],
            },
            self.gammas[ig],
        )
    }

    /// Fraction of `(alpha, beta)` cells still in the search space.
    pub fn mask_ratio(&self) -> f64 {
        self.mask.iter().filter(|&&m| m).count() as f64 / self.mask.len() as f64
    }

}

/// Search-space reduction: keeps `(alpha, beta)` cells whose beam axis
/// crosses the users' plane on the hull or within the cell's own one-step
/// spatial reach of it.
///
/// The reach is how far the crossing point moves when either angle changes
/// by one grid step: the radial shift of the neighboring alpha rows plus the
/// arc of one beta step. The band absorbs discretization noise — near a flat
/// optimum the full-grid argmax can sit one cell past the hull's image, and
/// close to straight-down a one-cell angular move is spatially microscopic,
/// so a fixed angular band has no safe width. A spatial band also keeps thin
/// and degenerate hulls from masking fewer cells than the hull of any subset
/// of their users (point and segment hulls use the same rule). The plane
/// must lie strictly below the transmitter.
pub fn reduced_grid(
    hull: &Hull2D,
    tx_pos: Vec3,
    plane_z: f64,
    alpha_limits: (f64, f64),
    delta_deg: f64,
    gammas: &[f64],
) -> Result<AngleGrid> {
    if plane_z >= tx_pos.z {
        return Err(Error::invalid(format!(
            "user plane z = {plane_z} is not below the transmitter z = {}",
            tx_pos.z
        )));
    }
    let mut grid = AngleGrid::full(alpha_limits, delta_deg, gammas)?;
    grid.mask.fill(false);

    // Signed radial offset of the axis/plane crossing for each alpha row at
    // beta = 0 (negative on the far side of straight-down); None when the
    // axis never reaches the plane. Rotating beta sweeps this offset around
    // the transmitter's ground point.
    let drop = plane_z - tx_pos.z;
    let radial: Vec<Option<f64>> = grid
        .alphas
        .iter()
        .map(|&a| {
            let o = orientation_from_angles(SteeringAngles {
                alpha_deg: a,
                beta_deg: 0.0,
            });
            (o.z < 0.0).then(|| (drop / o.z) * o.x)
        })
        .collect();

    for ia in 0..grid.alphas.len() {
        let Some(r) = radial[ia] else { continue };
        let mut reach = 0.0f64;
        if let Some(prev) = ia.checked_sub(1).and_then(|j| radial[j]) {
            reach = reach.max((r - prev).abs());
        }
        if let Some(next) = radial.get(ia + 1).copied().flatten() {
            reach = reach.max((next - r).abs());
        }
        let reach = reach + r.abs() * sin_deg(delta_deg).abs() + CONTAIN_TOL_M;
        for ib in 0..grid.betas.len() {
            let b = grid.betas[ib];
            let q = [tx_pos.x + r * cos_deg(b), tx_pos.y + r * sin_deg(b)];
            if hull.distance(q) <= reach {
                let idx = grid.ab_index(ia, ib);
                grid.mask[idx] = true;
            }
        }
    }

    if grid.mask.iter().all(|&m| !m) {
        return Err(Error::EmptySearchSpace(
            "search-space reduction masked out every cell".into(),
        ));
    }
    Ok(grid)
}

/// Height spread (meters) above which the hull reducer is bypassed.
const COMMON_PLANE_TOL_M: f64 = 0.01;

/// Builds the steering grid for a set of users: hull-reduced when they share
/// a horizontal plane (within 1 cm), the full grid otherwise.
pub fn search_grid_for_users(
    users: &[Vec3],
    tx_pos: Vec3,
    alpha_limits: (f64, f64),
    delta_deg: f64,
    gammas: &[f64],
) -> Result<AngleGrid> {
    if users.is_empty() {
        return Err(Error::invalid("search grid for an empty user set"));
    }
    let zmin = users.iter().map(|u| u.z).fold(f64::INFINITY, f64::min);
    let zmax = users.iter().map(|u| u.z).fold(f64::NEG_INFINITY, f64::max);
    if zmax - zmin > COMMON_PLANE_TOL_M {
        return AngleGrid::full(alpha_limits, delta_deg, gammas);
    }
    let plane_z = 0.5 * (zmin + zmax);
    let pts: Vec<Point2> = users.iter().map(|u| [u.x, u.y]).collect();
    let hull = convex_hull(&pts)?;
    reduced_grid(&hull, tx_pos, plane_z, alpha_limits, delta_deg, gammas)
}

// ── tests ───────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn angles(a: f64, b: f64) -> SteeringAngles {
        SteeringAngles::new(a, b).unwrap()
    }

    #[test]
    fn straight_down_is_exact_for_any_beta() {
        for beta in [0.0, 45.0, 90.0, 123.0, 180.0, 271.5, 359.0] {
            let o = orientation_from_angles(angles(270.0, beta));
            assert_eq!((o.x, o.y, o.z), (0.0, 0.0, -1.0), "beta = {beta}");
        }
    }

    #[test]
    fn orientation_340_90_matches_reference() {
        let o = orientation_from_angles(angles(340.0, 90.0));
        assert_eq!(o.x, 0.0);
        assert!((o.y - 0.9396926207859084).abs() < 1e-15, "y = {}", o.y);
        assert!((o.z - -0.3420201433256686).abs() < 1e-15, "z = {}", o.z);
    }

    #[test]
    fn orientations_are_unit_norm() {
        for ia in 0..71 {
            for ib in 0..45 {
                let o = orientation_from_angles(angles(200.0 + 2.0 * ia as f64, 8.0 * ib as f64));
                assert!((o.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn angles_validate_and_wrap() {
        assert!(SteeringAngles::new(179.0, 0.0).is_err());
        assert!(SteeringAngles::new(361.0, 0.0).is_err());
        assert!(SteeringAngles::new(f64::NAN, 0.0).is_err());
        assert_eq!(angles(200.0, 370.0).beta_deg, 10.0);
        assert_eq!(angles(200.0, -10.0).beta_deg, 350.0);
    }

    #[test]
    fn link_geometry_45_degree_reference() {
        let g = link_geometry(
            Vec3::new(0.0, 0.0, 4.0),
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::new(3.15, 0.0, 0.85),
            Vec3::new(0.0, 0.0, 1.0),
        )
        .unwrap();
        assert!((g.cos_phi - 0.7071067811865475).abs() < 1e-15);
        assert!((g.cos_theta - 0.7071067811865475).abs() < 1e-15);
        assert!((g.distance_m - 4.4547727214752495).abs() < 1e-12);
    }

    #[test]
    fn link_geometry_rejects_coincident_positions() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        let down = Vec3::new(0.0, 0.0, -1.0);
        assert!(link_geometry(p, down, p, down).is_err());
    }

    #[test]
    fn hull_of_square_with_interior_points() {
        let pts = vec![
            [0.0, 0.0],
            [2.0, 0.0],
            [2.0, 2.0],
            [0.0, 2.0],
            [1.0, 1.0],
            [0.5, 1.7],
            [1.0, 0.0], // collinear on an edge: must be dropped
        ];
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.kind, HullKind::Polygon);
        assert_eq!(
            hull.vertices,
            vec![[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]
        );
    }

    #[test]
    fn hull_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Point2> = (0..40)
            .map(|_| [rng.gen::<f64>() * 8.0, rng.gen::<f64>() * 8.0])
            .collect();
        let hull = convex_hull(&pts).unwrap();
        for _ in 0..10 {
            let mut shuffled = pts.clone();
            shuffled.shuffle(&mut rng);
            assert_eq!(convex_hull(&shuffled).unwrap(), hull);
        }
    }

    #[test]
    fn hull_degenerate_kinds() {
        let p = convex_hull(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(p.kind, HullKind::Point);
        assert_eq!(p.vertices, vec![[1.0, 1.0]]);

        let s = convex_hull(&[[2.0, 2.0], [0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert_eq!(s.kind, HullKind::Segment);
        assert_eq!(s.vertices, vec![[0.0, 0.0], [2.0, 2.0]]);

        assert!(convex_hull(&[]).is_err());
    }

    /// Half-plane oracle: a point is in the hull iff it is left of (or on)
    /// every CCW edge.
    fn oracle_contains(hull: &Hull2D, p: Point2) -> bool {
        hull.contains(p, 1e-9)
    }

    #[test]
    fn hull_contains_all_inputs_and_rejects_far_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let pts: Vec<Point2> = (0..rng.gen_range(3..30))
                .map(|_| [rng.gen::<f64>() * 8.0, rng.gen::<f64>() * 8.0])
                .collect();
            let hull = convex_hull(&pts).unwrap();
            for &p in &pts {
                assert!(oracle_contains(&hull, p), "input point {p:?} outside hull");
            }
            assert!(!oracle_contains(&hull, [100.0, 100.0]));
        }
    }

    #[test]
    fn full_grid_dimensions_match_defaults() {
        let gammas: Vec<f64> = (1..=15).map(|g| g as f64).collect();
        let grid = AngleGrid::full((200.0, 340.0), 2.0, &gammas).unwrap();
        assert_eq!(grid.alphas.len(), 71);
        assert_eq!(grid.betas.len(), 180);
        assert_eq!(grid.gammas.len(), 15);
        assert_eq!(grid.n_cells(), 191_700);
        assert_eq!(grid.mask_ratio(), 1.0);
    }

    #[test]
    fn cell_index_roundtrip_is_bijective() {
        let grid = AngleGrid::full((200.0, 340.0), 10.0, &[1.0, 5.0, 15.0]).unwrap();
        for cell in 0..grid.n_cells() {
            let (ia, ib, ig) = grid.cell_of(cell);
            assert_eq!(grid.cell_index(ia, ib, ig), cell);
        }
    }

    fn default_reduced(users: &[Vec3]) -> AngleGrid {
        search_grid_for_users(
            users,
            Vec3::new(4.0, 4.0, 4.0),
            (200.0, 340.0),
            2.0,
            &[1.0, 5.0, 15.0],
        )
        .unwrap()
    }

    #[test]
    fn reduced_grid_masks_strictly_between_zero_and_one() {
        let users = vec![
            Vec3::new(2.0, 2.0, 0.85),
            Vec3::new(6.0, 2.5, 0.85),
            Vec3::new(4.0, 6.0, 0.85),
        ];
        let grid = default_reduced(&users);
        let ratio = grid.mask_ratio();
        assert!(ratio > 0.0 && ratio < 1.0, "ratio = {ratio}");
    }

    #[test]
    fn reduced_grid_mask_grows_with_extra_users() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..30 {
            let mut users: Vec<Vec3> = (0..rng.gen_range(1..6))
                .map(|_| Vec3::new(rng.gen::<f64>() * 8.0, rng.gen::<f64>() * 8.0, 0.85))
                .collect();
            let before = default_reduced(&users).mask_ratio();
            users.push(Vec3::new(rng.gen::<f64>() * 8.0, rng.gen::<f64>() * 8.0, 0.85));
            let after = default_reduced(&users).mask_ratio();
            assert!(
                after >= before,
                "mask shrank after adding a user: {before} -> {after}"
            );
        }
    }

    #[test]
    fn single_user_mask_contains_exact_pointing_cell() {
        let user = Vec3::new(6.0, 3.0, 0.85);
        let tx = Vec3::new(4.0, 4.0, 4.0);
        let grid = default_reduced(&[user]);
        // Exact pointing cell: nearest grid cell to the true direction.
        let u = user.sub(tx).normalized();
        let mut best = (f64::NEG_INFINITY, 0usize);
        for ia in 0..grid.alphas.len() {
            for ib in 0..grid.betas.len() {
                let o = orientation_from_angles(angles(grid.alphas[ia], grid.betas[ib]));
                let d = o.dot(u);
                if d > best.0 {
                    best = (d, grid.ab_index(ia, ib));
                }
            }
        }
        assert!(grid.mask[best.1], "exact pointing cell not masked");
        // The mask is a tight patch: a sliver of the grid, and every kept
        // cell's axis crosses the user plane near the user.
        assert!(grid.mask_ratio() < 0.01, "mask too large: {}", grid.mask_ratio());
        let drop = 0.85 - tx.z;
        for ia in 0..grid.alphas.len() {
            for ib in 0..grid.betas.len() {
                if !grid.mask[grid.ab_index(ia, ib)] {
                    continue;
                }
                let o = orientation_from_angles(angles(grid.alphas[ia], grid.betas[ib]));
                let t = drop / o.z;
                let q = [tx.x + t * o.x, tx.y + t * o.y];
                let d = ((q[0] - user.x).powi(2) + (q[1] - user.y).powi(2)).sqrt();
                assert!(d < 0.5, "kept cell crosses {d:.3} m from the user");
            }
        }
    }

    #[test]
    fn nadir_user_keeps_straight_down_column_within_one_step() {
        let grid = default_reduced(&[Vec3::new(4.0, 4.0, 0.85)]);
        for ib in 0..grid.betas.len() {
            let ia = grid.alphas.iter().position(|&a| a == 270.0).unwrap();
            assert!(grid.mask[grid.ab_index(ia, ib)], "straight-down cell dropped");
        }
        for ia in 0..grid.alphas.len() {
            for ib in 0..grid.betas.len() {
                if grid.mask[grid.ab_index(ia, ib)] {
                    assert!(
                        (grid.alphas[ia] - 270.0).abs() <= 2.0,
                        "masked cell farther than one step from straight down"
                    );
                }
            }
        }
    }

    #[test]
    fn segment_mask_contains_endpoint_pointing_cells() {
        let a = Vec3::new(2.0, 2.0, 0.85);
        let b = Vec3::new(6.5, 5.0, 0.85);
        let grid = default_reduced(&[a, b]);
        assert!(grid.mask_ratio() > 0.0);
        // Both endpoints' nearest cells must survive the reduction.
        let tx = Vec3::new(4.0, 4.0, 4.0);
        for user in [a, b] {
            let u = user.sub(tx).normalized();
            let mut best = (f64::NEG_INFINITY, 0usize);
            for ia in 0..grid.alphas.len() {
                for ib in 0..grid.betas.len() {
                    let o = orientation_from_angles(angles(grid.alphas[ia], grid.betas[ib]));
                    let d = o.dot(u);
                    if d > best.0 {
                        best = (d, grid.ab_index(ia, ib));
                    }
                }
            }
            assert!(grid.mask[best.1]);
        }
    }

    #[test]
    fn reduced_grid_rejects_plane_above_transmitter() {
        let hull = convex_hull(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let err = reduced_grid(
            &hull,
            Vec3::new(4.0, 4.0, 4.0),
            4.5,
            (200.0, 340.0),
            2.0,
            &[5.0],
        );
        assert!(err.is_err());
    }

    #[test]
    fn height_spread_bypasses_reduction() {
        let users = vec![Vec3::new(2.0, 2.0, 0.85), Vec3::new(6.0, 6.0, 1.2)];
        let grid = search_grid_for_users(
            &users,
            Vec3::new(4.0, 4.0, 4.0),
            (200.0, 340.0),
            2.0,
            &[5.0],
        )
        .unwrap();
        assert_eq!(grid.mask_ratio(), 1.0, "mixed heights must fall back to the full grid");
    }
}
