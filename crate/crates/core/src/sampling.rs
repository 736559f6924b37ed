//! k-space sampling scheme generators: random Cartesian, radial, spiral and a
//! TSP-style variable-density trajectory.
//!
//! Trajectories are drawn in centered coordinates (DC in the middle of the
//! grid) and stored in DFT layout, so the centre maps to index `(0, 0)`.
//! Curves are rasterized with integer Bresenham lines.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::SamplingMask;

pub const DEFAULT_TOLERANCE: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskKind {
    Spiral,
    Radial,
    Random,
    Tsp,
}

impl fmt::Display for MaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskKind::Spiral => "spiral",
            MaskKind::Radial => "radial",
            MaskKind::Random => "random",
            MaskKind::Tsp => "tsp",
        })
    }
}

impl FromStr for MaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spiral" => Ok(MaskKind::Spiral),
            "radial" => Ok(MaskKind::Radial),
            "random" => Ok(MaskKind::Random),
            "tsp" => Ok(MaskKind::Tsp),
            other => Err(Error::Parameter(format!("unknown mask kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub kind: MaskKind,
    pub rows: usize,
    pub cols: usize,
    pub density: f64,
    pub seed: u64,
    pub tolerance: f64,
}

impl MaskSpec {
    pub fn new(kind: MaskKind, rows: usize, cols: usize, density: f64, seed: u64) -> Self {
        Self {
            kind,
            rows,
            cols,
            density,
            seed,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Parameter("mask dimensions must be positive".into()));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::Parameter(format!(
                "density must lie in (0, 1], got {}",
                self.density
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Parameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }

    fn within(&self, density: f64) -> bool {
        (density - self.density).abs() <= self.tolerance
    }

    fn unreachable(&self, closest: f64) -> Error {
        Error::DensityUnreachable {
            requested: self.density,
            tolerance: self.tolerance,
            closest,
        }
    }
}

/// Dispatches on `spec.kind`.
pub fn generate(spec: &MaskSpec) -> Result<SamplingMask> {
    match spec.kind {
        MaskKind::Random => random_mask(spec),
        MaskKind::Radial => radial_mask(spec),
        MaskKind::Spiral => spiral_mask(spec),
        MaskKind::Tsp => tsp_mask(spec),
    }
}

/// Canvas of bits addressed in centered coordinates.
struct Canvas {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
    count: usize,
}

impl Canvas {
    fn new(rows: usize, cols: usize) -> Self {
        let mut c = Self {
            rows,
            cols,
            bits: vec![false; rows * cols],
            count: 0,
        };
        c.plot(0, 0);
        c
    }

    /// Sets centered pixel `(x, y)`; points off the grid are dropped.
    fn plot(&mut self, x: i64, y: i64) {
        let (hc, hr) = ((self.cols / 2) as i64, (self.rows / 2) as i64);
        if x < -hc || x >= self.cols as i64 - hc || y < -hr || y >= self.rows as i64 - hr {
            return;
        }
        let c = x.rem_euclid(self.cols as i64) as usize;
        let r = y.rem_euclid(self.rows as i64) as usize;
        let i = r * self.cols + c;
        if !self.bits[i] {
            self.bits[i] = true;
            self.count += 1;
        }
    }

    fn line(&mut self, x0: i64, y0: i64, x1: i64, y1: i64) {
        bresenham(x0, y0, x1, y1, |x, y| self.plot(x, y));
    }

    fn density(&self) -> f64 {
        self.count as f64 / self.bits.len() as f64
    }

    fn into_mask(self) -> SamplingMask {
        SamplingMask::from_bits(self.rows, self.cols, self.bits).expect("DC is always plotted")
    }
}

/// Integer line rasterization including both endpoints.
pub fn bresenham(x0: i64, y0: i64, x1: i64, y1: i64, mut plot: impl FnMut(i64, i64)) {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let (mut x, mut y) = (x0, y0);
    let mut err = dx + dy;
    loop {
        plot(x, y);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Uniform random Cartesian mask with exactly `round(density * rows * cols)`
/// samples, DC always included.
pub fn random_mask(spec: &MaskSpec) -> Result<SamplingMask> {
    spec.validate()?;
    let n = spec.rows * spec.cols;
    let count = (spec.density * n as f64).round() as usize;
    if count < 1 {
        return Err(Error::EmptyMask { density: spec.density });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut picked = index::sample(&mut rng, n, count).into_vec();
    if !picked.contains(&0) {
        let k = rng.random_range(0..count);
        picked[k] = 0;
    }
    let mut bits = vec![false; n];
    for i in picked {
        bits[i] = true;
    }
    SamplingMask::from_bits(spec.rows, spec.cols, bits)
}

fn half_diagonal(rows: usize, cols: usize) -> f64 {
    0.5 * (rows as f64).hypot(cols as f64) + 1.0
}

/// Union of `spokes` equiangular digital diameters through DC.
pub fn radial_lines(rows: usize, cols: usize, spokes: usize) -> SamplingMask {
    rasterize_radial(rows, cols, spokes).into_mask()
}

fn rasterize_radial(rows: usize, cols: usize, spokes: usize) -> Canvas {
    let mut canvas = Canvas::new(rows, cols);
    let reach = half_diagonal(rows, cols);
    for k in 0..spokes {
        let t = k as f64 * std::f64::consts::PI / spokes as f64;
        let (x, y) = ((reach * t.cos()).round() as i64, (reach * t.sin()).round() as i64);
        canvas.line(-x, -y, x, y);
    }
    canvas
}

/// Radial mask whose spoke count is the smallest that meets the density.
pub fn radial_mask(spec: &MaskSpec) -> Result<SamplingMask> {
    spec.validate()?;
    let max_spokes = 4 * spec.rows.max(spec.cols);
    let mut closest = 0.0;
    for spokes in 1..=max_spokes {
        let canvas = rasterize_radial(spec.rows, spec.cols, spokes);
        let d = canvas.density();
        if (d - spec.density).abs() < (closest - spec.density).abs() {
            closest = d;
        }
        if spec.within(d) {
            return Ok(canvas.into_mask());
        }
        if d > spec.density + 0.25 {
            break;
        }
    }
    Err(spec.unreachable(closest))
}

/// Archimedean spiral arms `r = pitch * theta`, rotated evenly around DC.
pub fn spiral_arms(rows: usize, cols: usize, arms: usize, pitch: f64) -> SamplingMask {
    rasterize_spiral(rows, cols, arms, pitch).into_mask()
}

fn rasterize_spiral(rows: usize, cols: usize, arms: usize, pitch: f64) -> Canvas {
    let mut canvas = Canvas::new(rows, cols);
    let reach = half_diagonal(rows, cols);
    let theta_max = reach / pitch;
    for arm in 0..arms {
        let offset = arm as f64 * std::f64::consts::TAU / arms as f64;
        let (mut px, mut py) = (0i64, 0i64);
        let mut theta = 0.0;
        while theta < theta_max {
            // keep the arc step below half a pixel
            let r = pitch * theta;
            theta += (0.5 / r.max(pitch)).min(0.25);
            let r = pitch * theta;
            let (s, c) = (theta + offset).sin_cos();
            let (x, y) = ((r * c).round() as i64, (r * s).round() as i64);
            if (x, y) != (px, py) {
                canvas.line(px, py, x, y);
                px = x;
                py = y;
            }
        }
    }
    canvas
}

/// Spiral mask: for increasing arm counts, bisect the pitch on covered fraction.
pub fn spiral_mask(spec: &MaskSpec) -> Result<SamplingMask> {
    spec.validate()?;
    let reach = half_diagonal(spec.rows, spec.cols);
    let mut closest = 0.0;
    for arms in [1usize, 2, 3, 4, 6, 8] {
        // density decreases with pitch; bisect in log space
        let (mut lo, mut hi) = (0.01f64.ln(), reach.ln());
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let canvas = rasterize_spiral(spec.rows, spec.cols, arms, mid.exp());
            let d = canvas.density();
            if (d - spec.density).abs() < (closest - spec.density).abs() {
                closest = d;
            }
            if spec.within(d) {
                return Ok(canvas.into_mask());
            }
            if d > spec.density {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-9 {
                break;
            }
        }
    }
    Err(spec.unreachable(closest))
}

/// City positions in centered coordinates, center-weighted Gaussian.
fn draw_cities(rows: usize, cols: usize, count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gx = Normal::new(0.0, cols as f64 / 4.0).expect("positive sigma");
    let gy = Normal::new(0.0, rows as f64 / 4.0).expect("positive sigma");
    let (hc, hr) = ((cols / 2) as f64, (rows / 2) as f64);
    let mut cities = Vec::with_capacity(count);
    // the tour always passes through DC
    cities.push((0.0, 0.0));
    while cities.len() < count {
        let (x, y) = (gx.sample(&mut rng), gy.sample(&mut rng));
        if x >= -hc && x < cols as f64 - hc - 0.5 && y >= -hr && y < rows as f64 - hr - 0.5 {
            cities.push((x, y));
        }
    }
    cities
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Length of the closed tour visiting `cities` in `order`.
pub fn tour_length(cities: &[(f64, f64)], order: &[usize]) -> f64 {
    if order.len() < 2 {
        return 0.0;
    }
    (0..order.len())
        .map(|i| dist(cities[order[i]], cities[order[(i + 1) % order.len()]]))
        .sum()
}

/// Greedy nearest-neighbour tour starting at city 0.
pub fn nearest_neighbor_tour(cities: &[(f64, f64)]) -> Vec<usize> {
    let n = cities.len();
    if n == 0 {
        return Vec::new();
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = 0;
    visited[0] = true;
    order.push(0);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for (j, &v) in visited.iter().enumerate() {
            if !v {
                let d = dist(cities[cur], cities[j]);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
        }
        visited[best] = true;
        order.push(best);
        cur = best;
    }
    order
}

/// 2-opt segment reversal until no improving move or `max_passes`.
pub fn two_opt(cities: &[(f64, f64)], order: &mut [usize], max_passes: usize) {
    let n = order.len();
    if n < 4 {
        return;
    }
    for _ in 0..max_passes {
        let mut improved = false;
        for i in 0..n - 2 {
            let a = cities[order[i]];
            let b = cities[order[i + 1]];
            let d_ab = dist(a, b);
            // j = n-1 with i = 0 would reverse the whole tour
            let j_end = if i == 0 { n - 1 } else { n };
            for j in i + 2..j_end {
                let c = cities[order[j]];
                let d = cities[order[(j + 1) % n]];
                let delta = dist(a, c) + dist(b, d) - d_ab - dist(c, d);
                if delta < -1e-10 {
                    order[i + 1..=j].reverse();
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Rasterizes the closed tour through `cities` (centered coordinates).
pub fn tour_mask(rows: usize, cols: usize, cities: &[(f64, f64)], order: &[usize]) -> SamplingMask {
    rasterize_tour(rows, cols, cities, order).into_mask()
}

fn rasterize_tour(rows: usize, cols: usize, cities: &[(f64, f64)], order: &[usize]) -> Canvas {
    let mut canvas = Canvas::new(rows, cols);
    let n = order.len();
    for i in 0..n {
        let a = cities[order[i]];
        let b = cities[order[(i + 1) % n]];
        canvas.line(
            a.0.round() as i64,
            a.1.round() as i64,
            b.0.round() as i64,
            b.1.round() as i64,
        );
    }
    canvas
}

const TWO_OPT_PASSES: usize = 30;

fn tsp_canvas(spec: &MaskSpec, count: usize) -> Canvas {
    let cities = draw_cities(spec.rows, spec.cols, count, spec.seed);
    let mut order = nearest_neighbor_tour(&cities);
    two_opt(&cities, &mut order, TWO_OPT_PASSES);
    rasterize_tour(spec.rows, spec.cols, &cities, &order)
}

/// TSP-style variable-density trajectory: Gaussian-weighted cities joined by
/// a nearest-neighbour + 2-opt tour, city count chosen by bisection.
pub fn tsp_mask(spec: &MaskSpec) -> Result<SamplingMask> {
    spec.validate()?;
    let max_cities = spec.rows * spec.cols;
    let mut closest = 0.0;
    let mut consider = |d: f64| {
        if (d - spec.density).abs() < (closest - spec.density).abs() {
            closest = d;
        }
    };
    // bracket by doubling
    let mut lo = 2usize;
    let mut hi = 2usize;
    loop {
        let canvas = tsp_canvas(spec, hi);
        let d = canvas.density();
        consider(d);
        if spec.within(d) {
            return Ok(canvas.into_mask());
        }
        if d > spec.density || hi >= max_cities {
            break;
        }
        lo = hi;
        hi = (hi * 2).min(max_cities);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let canvas = tsp_canvas(spec, mid);
        let d = canvas.density();
        consider(d);
        if spec.within(d) {
            return Ok(canvas.into_mask());
        }
        if d > spec.density {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(spec.unreachable(closest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_mask_count_and_dc() {
        let spec = MaskSpec::new(MaskKind::Random, 64, 64, 0.10, 7);
        let m = random_mask(&spec).unwrap();
        assert_eq!(m.sample_count(), 410);
        assert!(m.is_set(0, 0));
        assert_eq!(m, random_mask(&spec).unwrap());
        let other = random_mask(&MaskSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(m, other);
    }

    #[test]
    fn random_mask_full_and_empty() {
        let full = random_mask(&MaskSpec::new(MaskKind::Random, 8, 8, 1.0, 1)).unwrap();
        assert_eq!(full.sample_count(), 64);
        assert!(matches!(
            random_mask(&MaskSpec::new(MaskKind::Random, 8, 8, 0.001, 1)),
            Err(Error::EmptyMask { .. })
        ));
        assert!(random_mask(&MaskSpec::new(MaskKind::Random, 8, 8, 0.0, 1)).is_err());
        assert!(random_mask(&MaskSpec::new(MaskKind::Random, 8, 8, 1.5, 1)).is_err());
    }

    #[test]
    fn single_spoke_is_one_diameter() {
        let m = radial_lines(64, 64, 1);
        // horizontal digital line through DC spans every column once
        assert_eq!(m.sample_count(), 64);
        for c in 0..64 {
            assert!(m.is_set(0, c));
        }
    }

    #[test]
    fn radial_density_within_tolerance() {
        let spec = MaskSpec::new(MaskKind::Radial, 128, 128, 0.10, 0);
        let m = radial_mask(&spec).unwrap();
        assert!((m.density() - 0.10).abs() <= spec.tolerance);
        assert!(m.is_set(0, 0));
    }

    #[test]
    fn radial_saturates() {
        let spec = MaskSpec::new(MaskKind::Radial, 32, 32, 1.0, 0);
        let m = radial_mask(&spec).unwrap();
        assert!(m.density() >= 1.0 - spec.tolerance);
    }

    #[test]
    fn spiral_includes_dc_and_hits_density() {
        let tight = spiral_arms(32, 32, 1, 0.5);
        assert!(tight.is_set(0, 0));
        let spec = MaskSpec::new(MaskKind::Spiral, 128, 128, 0.20, 0);
        let m = spiral_mask(&spec).unwrap();
        assert!((m.density() - 0.20).abs() <= spec.tolerance);
        assert_eq!(m, spiral_mask(&spec).unwrap());
    }

    #[test]
    fn two_city_tour_is_a_segment() {
        let cities = [(0.0, 0.0), (5.0, 3.0)];
        let m = tour_mask(32, 32, &cities, &[0, 1]);
        let mut expected = 0;
        bresenham(0, 0, 5, 3, |_, _| expected += 1);
        assert_eq!(m.sample_count(), expected);
        assert!(m.is_set(3, 5));
    }

    #[test]
    fn two_opt_never_lengthens() {
        for seed in 0..5 {
            let cities = draw_cities(64, 64, 80, seed);
            let nn = nearest_neighbor_tour(&cities);
            let mut opt = nn.clone();
            two_opt(&cities, &mut opt, 50);
            assert!(tour_length(&cities, &opt) <= tour_length(&cities, &nn) + 1e-9);
            let mut sorted = opt.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..80).collect::<Vec<_>>());
        }
    }

    #[test]
    fn tsp_density_within_tolerance() {
        let spec = MaskSpec::new(MaskKind::Tsp, 128, 128, 0.12, 3);
        let m = tsp_mask(&spec).unwrap();
        assert!((m.density() - 0.12).abs() <= spec.tolerance);
        assert!(m.is_set(0, 0));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("Spiral".parse::<MaskKind>().unwrap(), MaskKind::Spiral);
        assert!("zigzag".parse::<MaskKind>().is_err());
        assert_eq!(MaskKind::Tsp.to_string(), "tsp");
    }
}
