//! Karhunen-Loève eigensystem of Brownian motion on [0,T], path simulation
//! on uniform grids, coefficient extraction and piecewise-affine conditional
//! interpolation.

use crate::error::{FqError, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::{BufRead, Write};
use std::path::Path;

/// k-th eigenvalue (T / (π(k - 1/2)))² of the Brownian covariance operator, k >= 1.
#[inline]
pub fn eigenvalue(k: usize, horizon: f64) -> f64 {
    assert!(k >= 1 && horizon > 0.0);
    let x = horizon / (std::f64::consts::PI * (k as f64 - 0.5));
    x * x
}

/// Eigenfunction e_k(t) = sqrt(2/T) sin(t / sqrt(λ_k)).
#[inline]
pub fn basis_eval(k: usize, t: f64, horizon: f64) -> f64 {
    (2.0 / horizon).sqrt() * (t / eigenvalue(k, horizon).sqrt()).sin()
}

/// Truncated eigensystem descriptor.
#[derive(Debug, Clone)]
pub struct KLBasis {
    pub horizon: f64,
    pub truncation: usize,
}

impl KLBasis {
    pub fn new(horizon: f64, truncation: usize) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(FqError::Domain("horizon must be positive".into()));
        }
        if truncation == 0 {
            return Err(FqError::Domain("truncation must be >= 1".into()));
        }
        Ok(KLBasis { horizon, truncation })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (1..=self.truncation)
            .map(|k| eigenvalue(k, self.horizon))
            .collect()
    }
}

/// A d-dimensional path sampled on the uniform grid t_i = i T / n.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub horizon: f64,
    /// values[i] is the d-vector at t_i; length n + 1.
    pub values: Vec<Vec<f64>>,
    pub dim: usize,
}

impl GridPath {
    pub fn new(horizon: f64, values: Vec<Vec<f64>>, dim: usize) -> Result<Self> {
        if values.len() < 2 {
            return Err(FqError::Domain("grid needs at least 2 points".into()));
        }
        if values.iter().any(|v| v.len() != dim) {
            return Err(FqError::GridMismatch("row dimension mismatch".into()));
        }
        Ok(GridPath { horizon, values, dim })
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n() as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.horizon * i as f64 / self.n() as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n()).map(|i| self.time(i)).collect()
    }

    /// Squared L²([0,T], R^d) distance to another path, trapezoidal rule.
    pub fn l2_dist_sq(&self, other: &GridPath) -> Result<f64> {
        if self.n() != other.n() || self.dim != other.dim {
            return Err(FqError::GridMismatch("l2 distance needs equal grids".into()));
        }
        let dt = self.dt();
        let mut acc = 0.0;
        for i in 0..=self.n() {
            let d2: f64 = self.values[i]
                .iter()
                .zip(&other.values[i])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let w = if i == 0 || i == self.n() { 0.5 } else { 1.0 };
            acc += w * d2;
        }
        Ok(acc * dt)
    }

    /// CSV export: header `t,x1,...,xd`, one row per grid point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=self.dim).map(|j| format!("x{j}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for i in 0..=self.n() {
            let mut row = vec![format!("{:.16e}", self.time(i))];
            row.extend(self.values[i].iter().map(|v| format!("{v:.16e}")));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn save_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| FqError::Parse("empty csv".into()))??;
        let dim = header.split(',').count() - 1;
        if dim == 0 {
            return Err(FqError::Parse("csv needs t plus at least one component".into()));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim + 1 {
                return Err(FqError::Parse(format!("bad csv row: {line}")));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| FqError::Parse(format!("{e}: {s}")))
            };
            times.push(parse(fields[0])?);
            values.push(fields[1..].iter().map(|s| parse(s)).collect::<Result<Vec<f64>>>()?);
        }
        let horizon = *times
            .last()
            .ok_or_else(|| FqError::Parse("csv has no rows".into()))?;
        GridPath::new(horizon, values, dim)
    }

    pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// Standard d-dimensional Brownian motion by Gaussian increment summation.
///
/// Kept independent of the K-L basis code on purpose: it serves as the
/// simulation oracle against which basis reconstructions are tested.
pub fn simulate_brownian(n: usize, dim: usize, horizon: f64, seed: u64) -> GridPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_brownian_with(n, dim, horizon, &mut rng)
}

/// Same, from an externally managed RNG (for per-path sub-streams).
pub fn simulate_brownian_with<R: Rng>(n: usize, dim: usize, horizon: f64, rng: &mut R) -> GridPath {
    assert!(n >= 1 && dim >= 1);
    let sd = (horizon / n as f64).sqrt();
    let mut values = Vec::with_capacity(n + 1);
    values.push(vec![0.0; dim]);
    for i in 1..=n {
        let prev = values[i - 1].clone();
        let row: Vec<f64> = prev
            .iter()
            .map(|&x| x + sd * standard_normal(rng))
            .collect();
        values.push(row);
    }
    GridPath {
        horizon,
        values,
        dim,
    }
}

/// One N(0,1) draw (Box-Muller, cosine branch).
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u1: f64 = rng.gen();
        if u1 <= 0.0 {
            continue;
        }
        let u2: f64 = rng.gen();
        return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
    }
}

/// First K K-L coefficients per component: ξ_k = (W | e_k) / sqrt(λ_k),
/// trapezoidal quadrature on the grid. Requires n >= 2K.
pub fn kl_coefficients(path: &GridPath, k_max: usize) -> Result<Vec<Vec<f64>>> {
    let n = path.n();
    if n < 2 * k_max {
        return Err(FqError::Resolution {
            n,
            required: 2 * k_max,
        });
    }
    let t = path.horizon;
    let dt = path.dt();
    let norm = (2.0 / t).sqrt();
    let mut out = vec![vec![0.0; k_max]; path.dim];
    for k in 1..=k_max {
        let sqrt_l = eigenvalue(k, t).sqrt();
        for (i, row) in path.values.iter().enumerate() {
            let s = (path.time(i) / sqrt_l).sin();
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            for (c, &x) in row.iter().enumerate() {
                out[c][k - 1] += w * x * s;
            }
        }
        for c in 0..path.dim {
            out[c][k - 1] *= norm * dt / sqrt_l;
        }
    }
    Ok(out)
}

/// Piecewise-linear interpolation of the path through its values at the
/// given knots, resampled on the original grid. This is the conditional
/// expectation of a Brownian path given its knot values.
pub fn conditional_interpolation(path: &GridPath, knots: &[f64]) -> Result<GridPath> {
    let n = path.n();
    let dt = path.dt();
    let eps = 1e-9 * path.horizon.max(1.0);
    if knots.len() < 2
        || (knots[0]).abs() > eps
        || (knots[knots.len() - 1] - path.horizon).abs() > eps
    {
        return Err(FqError::Domain("knots must start at 0 and end at T".into()));
    }
    if knots.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FqError::Domain("knots must be strictly increasing".into()));
    }
    let mut knot_idx = Vec::with_capacity(knots.len());
    for &s in knots {
        let idx = (s / dt).round() as usize;
        if idx > n || (s - idx as f64 * dt).abs() > eps {
            return Err(FqError::GridAlignment { knot: s });
        }
        knot_idx.push(idx);
    }
    let mut values = vec![vec![0.0; path.dim]; n + 1];
    for w in knot_idx.windows(2) {
        let (i0, i1) = (w[0], w[1]);
        let span = (i1 - i0) as f64;
        for i in i0..=i1 {
            let theta = (i - i0) as f64 / span;
            for c in 0..path.dim {
                values[i][c] =
                    (1.0 - theta) * path.values[i0][c] + theta * path.values[i1][c];
            }
        }
    }
    GridPath::new(path.horizon, values, path.dim)
}
