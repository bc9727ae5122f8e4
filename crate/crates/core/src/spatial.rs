//! Spatial layer: point-process sampling, nearest-BS association, ordered
//! link distances, approximate interference-field models, and second-order
//! spatial statistics (pair correlation, Ripley K).
//!
//! All positions are in meters. The typical base station convention is index
//! 0 of the BS point set; origin-frame helpers translate so the typical BS
//! sits at (0, 0).

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::{B1, B2};

/// Default scheduled-user intensity multiplier: `lambda_ue = 20 N lambda_bs`,
/// high enough that the typical-cell discard rate stays below 1% at N = 2.
pub const DEFAULT_LAMBDA_UE_FACTOR: f64 = 20.0;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpatialError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("typical cell has {have} UEs, needs {need}; realization must be resampled")]
    TypicalCellDeficient { have: usize, need: usize },
    #[error("resampling budget of {attempts} attempts exhausted")]
    ResamplingExhausted { attempts: usize },
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Square observation window centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Window {
    /// Side length in meters.
    pub side_length: f64,
    /// Torus edge handling. When false, distances are plain Euclidean and
    /// samplers place the typical BS inside a 20% guard region instead of at
    /// the window center.
    pub wraparound: bool,
}

impl Window {
    pub fn new(side_length: f64, wraparound: bool) -> Result<Self, SpatialError> {
        if !(side_length > 0.0) || !side_length.is_finite() {
            return Err(SpatialError::InvalidParameter(
                "window side_length must be positive and finite".into(),
            ));
        }
        Ok(Self {
            side_length,
            wraparound,
        })
    }

    pub fn area(&self) -> f64 {
        self.side_length * self.side_length
    }

    /// Distance between two points under the window's edge rule.
    pub fn distance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        self.distance_sq(a, b).sqrt()
    }

    pub fn distance_sq(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let mut dx = (a[0] - b[0]).abs();
        let mut dy = (a[1] - b[1]).abs();
        if self.wraparound {
            dx = dx.min(self.side_length - dx);
            dy = dy.min(self.side_length - dy);
        }
        dx * dx + dy * dy
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        let h = self.side_length / 2.0;
        p[0] >= -h && p[0] < h && p[1] >= -h && p[1] < h
    }
}

impl Default for Window {
    fn default() -> Self {
        Self {
            side_length: 1000.0,
            wraparound: true,
        }
    }
}

/// A finite planar point pattern.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointSet {
    pub points: Vec<[f64; 2]>,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV dump with `x,y` columns, for debugging.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p[0], p[1]));
        }
        out
    }
}

/// Nearest-BS association plus the per-cell scheduled-user selection.
#[derive(Debug, Clone)]
pub struct CellAssignment {
    /// Index of the nearest BS, one entry per UE.
    pub nearest_bs: Vec<usize>,
    /// Selected UE indices per BS (up to `n_per_cell` each).
    pub selected: Vec<Vec<usize>>,
    /// Index of the typical BS (always 0 by convention).
    pub typical_bs: usize,
    /// Number of non-typical cells that held fewer than `n_per_cell` members;
    /// those cells scheduled every member they had.
    pub deficient_cells: usize,
}

/// Link distances seen from the typical BS.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceProfile {
    /// Ordered typical-cell link distances `R_1 <= ... <= R_N`.
    pub ordered_typical: Vec<f64>,
    /// Distances `D_x` to every scheduled out-of-cell interferer.
    pub interferer: Vec<f64>,
}

impl DistanceProfile {
    pub fn n_users(&self) -> usize {
        self.ordered_typical.len()
    }
}

// ---------------------------------------------------------------------------
// Point-process sampling
// ---------------------------------------------------------------------------

/// Sample a homogeneous Poisson point process on the window.
pub fn sample_homogeneous_ppp<R: Rng + ?Sized>(
    intensity: f64,
    window: &Window,
    rng: &mut R,
) -> Result<PointSet, SpatialError> {
    if !(intensity > 0.0) || !intensity.is_finite() {
        return Err(SpatialError::InvalidParameter(format!(
            "PPP intensity must be positive and finite, got {intensity}"
        )));
    }
    let mean = intensity * window.area();
    let count = Poisson::new(mean)
        .map_err(|e| SpatialError::InvalidParameter(format!("Poisson({mean}): {e}")))?
        .sample(rng) as usize;
    let h = window.side_length / 2.0;
    let points = (0..count)
        .map(|_| [rng.random_range(-h..h), rng.random_range(-h..h)])
        .collect();
    Ok(PointSet { points })
}

// ---------------------------------------------------------------------------
// Nearest-BS lookup grid
// ---------------------------------------------------------------------------

struct NearestGrid<'a> {
    points: &'a [[f64; 2]],
    buckets: Vec<Vec<u32>>,
    n: usize,
    cell: f64,
    window: &'a Window,
}

impl<'a> NearestGrid<'a> {
    fn new(points: &'a [[f64; 2]], window: &'a Window) -> Self {
        let n = ((points.len() as f64).sqrt().floor() as usize).max(1);
        let cell = window.side_length / n as f64;
        let mut buckets = vec![Vec::new(); n * n];
        for (i, p) in points.iter().enumerate() {
            buckets[Self::bucket_of(p, n, cell, window.side_length)].push(i as u32);
        }
        Self {
            points,
            buckets,
            n,
            cell,
            window,
        }
    }

    fn bucket_of(p: &[f64; 2], n: usize, cell: f64, side: f64) -> usize {
        let ix = (((p[0] + side / 2.0) / cell) as usize).min(n - 1);
        let iy = (((p[1] + side / 2.0) / cell) as usize).min(n - 1);
        iy * n + ix
    }

    fn scan_bucket(&self, ix: isize, iy: isize, p: [f64; 2], best: &mut (usize, f64)) {
        let n = self.n as isize;
        let (bx, by) = if self.window.wraparound {
            (ix.rem_euclid(n), iy.rem_euclid(n))
        } else {
            if ix < 0 || ix >= n || iy < 0 || iy >= n {
                return;
            }
            (ix, iy)
        };
        for &idx in &self.buckets[(by * n + bx) as usize] {
            let d = self.window.distance_sq(p, self.points[idx as usize]);
            if d < best.1 {
                *best = (idx as usize, d);
            }
        }
    }

    /// Index of and squared distance to the nearest stored point.
    fn nearest(&self, p: [f64; 2]) -> (usize, f64) {
        debug_assert!(!self.points.is_empty());
        let n = self.n as isize;
        let home = Self::bucket_of(&p, self.n, self.cell, self.window.side_length) as isize;
        let (hx, hy) = (home % n, home / n);
        let mut best = (usize::MAX, f64::INFINITY);
        for ring in 0..=n {
            if 2 * ring + 1 > n {
                // rings would wrap onto themselves; finish with a full scan
                for idx in 0..self.points.len() {
                    let d = self.window.distance_sq(p, self.points[idx]);
                    if d < best.1 {
                        best = (idx, d);
                    }
                }
                return best;
            }
            if ring == 0 {
                self.scan_bucket(hx, hy, p, &mut best);
            } else {
                for dx in -ring..=ring {
                    self.scan_bucket(hx + dx, hy - ring, p, &mut best);
                    self.scan_bucket(hx + dx, hy + ring, p, &mut best);
                }
                for dy in (-ring + 1)..ring {
                    self.scan_bucket(hx - ring, hy + dy, p, &mut best);
                    self.scan_bucket(hx + ring, hy + dy, p, &mut best);
                }
            }
            // unscanned buckets lie at least `ring * cell` away
            let reach = ring as f64 * self.cell;
            if best.1 <= reach * reach {
                return best;
            }
        }
        best
    }
}

// ---------------------------------------------------------------------------
// Association and selection
// ---------------------------------------------------------------------------

/// Associate every UE with its nearest BS and select `n_per_cell` scheduled
/// UEs per cell, uniformly without replacement.
///
/// BS index 0 is the typical BS. A deficient typical cell is an error (the
/// caller resamples the realization); a deficient non-typical cell schedules
/// all of its members and is counted in [`CellAssignment::deficient_cells`].
pub fn associate_and_select<R: Rng + ?Sized>(
    bs: &PointSet,
    ue: &PointSet,
    n_per_cell: usize,
    window: &Window,
    rng: &mut R,
) -> Result<CellAssignment, SpatialError> {
    if bs.is_empty() {
        return Err(SpatialError::InvalidParameter("no base stations".into()));
    }
    if n_per_cell == 0 {
        return Err(SpatialError::InvalidParameter(
            "n_per_cell must be at least 1".into(),
        ));
    }
    let grid = NearestGrid::new(&bs.points, window);
    let mut nearest_bs = Vec::with_capacity(ue.len());
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); bs.len()];
    for (u, p) in ue.points.iter().enumerate() {
        let (b, _) = grid.nearest(*p);
        nearest_bs.push(b);
        members[b].push(u);
    }

    if members[0].len() < n_per_cell {
        return Err(SpatialError::TypicalCellDeficient {
            have: members[0].len(),
            need: n_per_cell,
        });
    }

    let mut deficient_cells = 0;
    let mut selected = Vec::with_capacity(bs.len());
    for (b, cell) in members.iter().enumerate() {
        if cell.len() < n_per_cell {
            if b != 0 {
                deficient_cells += 1;
            }
            selected.push(cell.clone());
        } else {
            let picks = rand::seq::index::sample(rng, cell.len(), n_per_cell);
            selected.push(picks.iter().map(|i| cell[i]).collect());
        }
    }

    Ok(CellAssignment {
        nearest_bs,
        selected,
        typical_bs: 0,
        deficient_cells,
    })
}

/// Extract the ordered typical-cell distances and the interferer distances.
pub fn distance_profile(
    assignment: &CellAssignment,
    bs: &PointSet,
    ue: &PointSet,
    window: &Window,
) -> DistanceProfile {
    let typical = bs.points[assignment.typical_bs];
    let mut ordered_typical: Vec<f64> = assignment.selected[assignment.typical_bs]
        .iter()
        .map(|&u| window.distance(typical, ue.points[u]))
        .collect();
    ordered_typical.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut interferer = Vec::new();
    for (b, sel) in assignment.selected.iter().enumerate() {
        if b == assignment.typical_bs {
            continue;
        }
        for &u in sel {
            interferer.push(window.distance(typical, ue.points[u]));
        }
    }
    DistanceProfile {
        ordered_typical,
        interferer,
    }
}

// ---------------------------------------------------------------------------
// Whole-realization sampling
// ---------------------------------------------------------------------------

/// Parameters for sampling one network realization.
#[derive(Debug, Clone, Copy)]
pub struct TopologyOptions {
    pub lambda_bs: f64,
    /// Scheduled-user pool intensity; defaults to `20 N lambda_bs` via
    /// [`TopologyOptions::with_defaults`].
    pub lambda_ue: f64,
    pub n_per_cell: usize,
    pub window: Window,
    /// Resampling budget for deficient typical cells.
    pub max_attempts: usize,
}

impl TopologyOptions {
    pub fn with_defaults(lambda_bs: f64, n_per_cell: usize, window: Window) -> Self {
        Self {
            lambda_bs,
            lambda_ue: DEFAULT_LAMBDA_UE_FACTOR * n_per_cell as f64 * lambda_bs,
            n_per_cell,
            window,
            max_attempts: 1000,
        }
    }
}

/// One sampled network realization with the typical BS at `typical_pos`.
#[derive(Debug, Clone)]
pub struct Topology {
    pub bs: PointSet,
    pub ue: PointSet,
    pub assignment: CellAssignment,
    pub typical_pos: [f64; 2],
    pub window: Window,
    /// Realizations discarded for a deficient typical cell before this one.
    pub resamples: u32,
}

impl Topology {
    pub fn profile(&self) -> DistanceProfile {
        distance_profile(&self.assignment, &self.bs, &self.ue, &self.window)
    }

    /// Interferer distances to the typical BS. With `colocate` set, every
    /// interfering cell's scheduled UEs are moved to one shared parent
    /// location (the cell's first selected UE), so its distance appears with
    /// the cell's full multiplicity.
    pub fn interferer_distances(&self, colocate: bool) -> Vec<f64> {
        let typical = self.bs.points[self.assignment.typical_bs];
        let mut out = Vec::new();
        for (b, sel) in self.assignment.selected.iter().enumerate() {
            if b == self.assignment.typical_bs || sel.is_empty() {
                continue;
            }
            if colocate {
                let parent = self.ue.points[sel[0]];
                let d = self.window.distance(typical, parent);
                out.extend(std::iter::repeat(d).take(sel.len()));
            } else {
                for &u in sel {
                    out.push(self.window.distance(typical, self.ue.points[u]));
                }
            }
        }
        out
    }

    /// Interferer positions translated so the typical BS is at the origin.
    pub fn interferer_points(&self) -> PointSet {
        let t = self.bs.points[self.assignment.typical_bs];
        let mut points = Vec::new();
        for (b, sel) in self.assignment.selected.iter().enumerate() {
            if b == self.assignment.typical_bs {
                continue;
            }
            for &u in sel {
                let p = self.ue.points[u];
                points.push([p[0] - t[0], p[1] - t[1]]);
            }
        }
        PointSet { points }
    }
}

/// Sample one realization, redrawing until the typical cell can schedule
/// `n_per_cell` UEs.
///
/// In wraparound mode the typical BS is pinned at the window center; in guard
/// mode it is placed uniformly at least 20% of the side length away from
/// every border.
pub fn sample_typical_topology<R: Rng + ?Sized>(
    opts: &TopologyOptions,
    rng: &mut R,
) -> Result<Topology, SpatialError> {
    if opts.n_per_cell == 0 {
        return Err(SpatialError::InvalidParameter(
            "n_per_cell must be at least 1".into(),
        ));
    }
    let mut resamples = 0u32;
    for _ in 0..opts.max_attempts.max(1) {
        let typical_pos = if opts.window.wraparound {
            [0.0, 0.0]
        } else {
            let g = 0.3 * opts.window.side_length;
            [rng.random_range(-g..g), rng.random_range(-g..g)]
        };
        let mut bs = PointSet {
            points: vec![typical_pos],
        };
        bs.points
            .extend(sample_homogeneous_ppp(opts.lambda_bs, &opts.window, rng)?.points);
        let ue = sample_homogeneous_ppp(opts.lambda_ue, &opts.window, rng)?;
        match associate_and_select(&bs, &ue, opts.n_per_cell, &opts.window, rng) {
            Ok(assignment) => {
                return Ok(Topology {
                    bs,
                    ue,
                    assignment,
                    typical_pos,
                    window: opts.window,
                    resamples,
                })
            }
            Err(SpatialError::TypicalCellDeficient { .. }) => {
                resamples += 1;
                continue;
            }
            Err(e) => return Err(e),
        }
    }
    Err(SpatialError::ResamplingExhausted {
        attempts: opts.max_attempts,
    })
}

// ---------------------------------------------------------------------------
// Link-distance laws
// ---------------------------------------------------------------------------

pub(crate) fn unordered_pdf(r: f64, lambda: f64, b1: f64) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    let a = b1 * lambda * std::f64::consts::PI;
    2.0 * a * r * (-a * r * r).exp()
}

pub(crate) fn unordered_cdf(r: f64, lambda: f64, b1: f64) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    let a = b1 * lambda * std::f64::consts::PI;
    -(-a * r * r).exp_m1()
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

pub(crate) fn ordered_pdf_param(r: f64, n: usize, n_total: usize, lambda: f64, b1: f64) -> f64 {
    let a = b1 * lambda * std::f64::consts::PI;
    let e = (-a * r * r).exp();
    let beta_fn =
        factorial(n_total - n) * factorial(n - 1) / factorial(n_total);
    2.0 * a * r * (1.0 - e).powi(n as i32 - 1) * e.powi((n_total - n + 1) as i32) / beta_fn
}

/// Rayleigh-fit density of the unordered typical-cell link distance.
pub fn rayleigh_distance_pdf(r: f64, lambda: f64) -> f64 {
    unordered_pdf(r, lambda, B1)
}

/// CDF companion of [`rayleigh_distance_pdf`].
pub fn rayleigh_distance_cdf(r: f64, lambda: f64) -> f64 {
    unordered_cdf(r, lambda, B1)
}

/// Density of the n-th ordered link distance out of `n_total`.
pub fn ordered_distance_pdf(
    r: f64,
    n: usize,
    n_total: usize,
    lambda: f64,
) -> Result<f64, SpatialError> {
    if n == 0 || n > n_total {
        return Err(SpatialError::InvalidParameter(format!(
            "rank {n} outside 1..={n_total}"
        )));
    }
    if r < 0.0 {
        return Ok(0.0);
    }
    Ok(ordered_pdf_param(r, n, n_total, lambda, B1))
}

// ---------------------------------------------------------------------------
// Interference-field models
// ---------------------------------------------------------------------------

/// BS-UE pair correlation function `g(r) = 1 - exp(-B2 lambda pi r^2)`.
pub fn pair_correlation(r: f64, lambda: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    -(-B2 * lambda * std::f64::consts::PI * r * r).exp_m1()
}

/// Ripley K function of the interferer field:
/// `K(r) = pi r^2 + (exp(-B2 lambda pi r^2) - 1) / (B2 lambda)`.
pub fn k_function(r: f64, lambda: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let pi = std::f64::consts::PI;
    pi * r * r + (-B2 * lambda * pi * r * r).exp_m1() / (B2 * lambda)
}

/// Intensity measure of the parent process over a centered ball of radius
/// `r`: `Lambda(r) = lambda K(r)`.
pub fn parent_intensity_measure(r: f64, lambda: f64) -> f64 {
    lambda * k_function(r, lambda)
}

/// Sample the clustered interferer model: parents form an inhomogeneous PPP
/// of intensity `lambda g(r)` around the origin and each parent carries
/// `n_per_cell` co-located UEs.
pub fn sample_interferers_model_a<R: Rng + ?Sized>(
    lambda: f64,
    n_per_cell: usize,
    window: &Window,
    rng: &mut R,
) -> Result<PointSet, SpatialError> {
    if n_per_cell == 0 {
        return Err(SpatialError::InvalidParameter(
            "n_per_cell must be at least 1".into(),
        ));
    }
    let parents = thinned_by_pair_correlation(lambda, lambda, window, rng)?;
    let mut points = Vec::with_capacity(parents.len() * n_per_cell);
    for p in parents.points {
        for _ in 0..n_per_cell {
            points.push(p);
        }
    }
    Ok(PointSet { points })
}

/// Sample the independent interferer model: an inhomogeneous PPP of intensity
/// `n_per_cell * lambda * g(r)`.
pub fn sample_interferers_model_b<R: Rng + ?Sized>(
    lambda: f64,
    n_per_cell: usize,
    window: &Window,
    rng: &mut R,
) -> Result<PointSet, SpatialError> {
    if n_per_cell == 0 {
        return Err(SpatialError::InvalidParameter(
            "n_per_cell must be at least 1".into(),
        ));
    }
    thinned_by_pair_correlation(lambda * n_per_cell as f64, lambda, window, rng)
}

/// Homogeneous PPP of intensity `candidate_intensity` thinned by `g(|x|)`
/// with `g` parameterized by the BS intensity `lambda`. Distances to the
/// origin are Euclidean: the model is radial.
fn thinned_by_pair_correlation<R: Rng + ?Sized>(
    candidate_intensity: f64,
    lambda: f64,
    window: &Window,
    rng: &mut R,
) -> Result<PointSet, SpatialError> {
    let candidates = sample_homogeneous_ppp(candidate_intensity, window, rng)?;
    let points = candidates
        .points
        .into_iter()
        .filter(|p| {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            rng.random_range(0.0..1.0) < pair_correlation(r, lambda)
        })
        .collect();
    Ok(PointSet { points })
}

// ---------------------------------------------------------------------------
// K-function estimation
// ---------------------------------------------------------------------------

/// Default radial grid: 50 log-spaced points spanning `[0.01, 3] / sqrt(lambda pi)`.
pub fn default_r_grid(lambda: f64) -> Vec<f64> {
    let unit = 1.0 / (lambda * std::f64::consts::PI).sqrt();
    let (lo, hi) = (0.01, 3.0);
    (0..50)
        .map(|i| unit * lo * (hi / lo).powf(i as f64 / 49.0))
        .collect()
}

/// Count-based estimate of the interferer K function on `r_grid`.
///
/// Each realization holds the interferer positions in the origin frame (the
/// typical BS at (0, 0)); counting uses the window's edge rule.
pub fn estimate_k_function(
    realizations: &[PointSet],
    n_per_cell: usize,
    lambda: f64,
    r_grid: &[f64],
    window: &Window,
) -> Result<Vec<f64>, SpatialError> {
    if realizations.is_empty() {
        return Err(SpatialError::InvalidParameter(
            "need at least one realization".into(),
        ));
    }
    if n_per_cell == 0 || !(lambda > 0.0) {
        return Err(SpatialError::InvalidParameter(
            "n_per_cell and lambda must be positive".into(),
        ));
    }
    let origin = [0.0, 0.0];
    let mut dists: Vec<Vec<f64>> = realizations
        .iter()
        .map(|ps| {
            let mut d: Vec<f64> = ps
                .points
                .iter()
                .map(|&p| window.distance(origin, p))
                .collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            d
        })
        .collect();
    let denom = n_per_cell as f64 * lambda * realizations.len() as f64;
    Ok(r_grid
        .iter()
        .map(|&r| {
            let mut total = 0usize;
            for d in &mut dists {
                total += d.partition_point(|&x| x <= r);
            }
            total as f64 / denom
        })
        .collect())
}

/// Number of points within Euclidean distance `r` of the origin.
pub fn count_within_origin(ps: &PointSet, r: f64) -> usize {
    let r2 = r * r;
    ps.points
        .iter()
        .filter(|p| p[0] * p[0] + p[1] * p[1] <= r2)
        .count()
}
