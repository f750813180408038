//! Optimal quadratic quantizers of the scalar standard normal distribution,
//! and best-effort Lloyd codebooks for diagonal Gaussians in R^L.
//!
//! The normal distribution is log-concave, so for every size N there is a
//! unique stationary quadratic quantizer, which is therefore the optimal one.
//! We solve the stationarity system (each level equals the conditional mean
//! of its Voronoi cell) by Lloyd warm-up followed by Newton iteration with a
//! tridiagonal Jacobian.

use crate::error::{FqError, Result};
use crate::normal;
use crate::quad;
use once_cell::sync::Lazy;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Mutex;

/// Optimal N-level quadratic quantizer of N(0,1).
///
/// `levels` are strictly increasing and symmetric about 0; `weights[i]` is
/// the probability of the i-th Voronoi cell; `distortion` is the squared
/// quadratic error E min_i (Z - levels[i])^2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarQuantizer {
    pub size: usize,
    pub levels: Vec<f64>,
    pub weights: Vec<f64>,
    pub distortion: f64,
}

impl ScalarQuantizer {
    /// Voronoi cell boundaries m_1 < ... < m_{N-1} (midpoints of consecutive levels).
    pub fn midpoints(&self) -> Vec<f64> {
        self.levels
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    /// Max deviation of each level from its cell's conditional mean.
    pub fn stationarity_residual(&self) -> f64 {
        let mids = self.midpoints();
        let mut worst = 0.0f64;
        for i in 0..self.size {
            let a = if i == 0 { f64::NEG_INFINITY } else { mids[i - 1] };
            let b = if i == self.size - 1 { f64::INFINITY } else { mids[i] };
            worst = worst.max((self.levels[i] - cell_centroid(a, b)).abs());
        }
        worst
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "size": self.size,
            "levels": self.levels,
            "weights": self.weights,
            "distortion": self.distortion,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let q: ScalarQuantizer = serde_json::from_value(v.clone())?;
        Ok(q)
    }
}

#[inline]
fn phi_at(x: f64) -> f64 {
    if x.is_finite() {
        normal::pdf(x)
    } else {
        0.0
    }
}

#[inline]
fn cdf_at(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        0.0
    } else if x == f64::INFINITY {
        1.0
    } else {
        normal::cdf(x)
    }
}

#[inline]
fn sf_at(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        1.0
    } else if x == f64::INFINITY {
        0.0
    } else {
        normal::sf(x)
    }
}

/// P(a < Z <= b), evaluated on whichever side avoids cancellation: the
/// upper tail for cells right of 0, the lower for cells left of it.
fn mass_between(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        sf_at(a) - sf_at(b)
    } else {
        cdf_at(b) - cdf_at(a)
    }
}

/// E(Z | a < Z <= b) for Z ~ N(0,1).
fn cell_centroid(a: f64, b: f64) -> f64 {
    let mass = mass_between(a, b);
    (phi_at(a) - phi_at(b)) / mass
}

/// ∫_a^b (x - beta)^2 φ(x) dx, closed form.
fn cell_sq_error(beta: f64, a: f64, b: f64) -> f64 {
    let mass = mass_between(a, b);
    let m1 = phi_at(a) - phi_at(b);
    // ∫ x² φ = ΔΦ + a φ(a) - b φ(b)
    let xa = if a.is_finite() { a * phi_at(a) } else { 0.0 };
    let xb = if b.is_finite() { b * phi_at(b) } else { 0.0 };
    let m2 = mass + xa - xb;
    m2 - 2.0 * beta * m1 + beta * beta * mass
}

fn boundaries(levels: &[f64]) -> Vec<f64> {
    let n = levels.len();
    let mut bs = Vec::with_capacity(n + 1);
    bs.push(f64::NEG_INFINITY);
    for w in levels.windows(2) {
        bs.push(0.5 * (w[0] + w[1]));
    }
    bs.push(f64::INFINITY);
    bs
}

fn distortion_of(levels: &[f64]) -> f64 {
    let bs = boundaries(levels);
    levels
        .iter()
        .enumerate()
        .map(|(i, &beta)| cell_sq_error(beta, bs[i], bs[i + 1]))
        .sum()
}

fn lloyd_step(levels: &[f64]) -> Vec<f64> {
    let bs = boundaries(levels);
    (0..levels.len())
        .map(|i| cell_centroid(bs[i], bs[i + 1]))
        .collect()
}

fn residual_of(levels: &[f64]) -> f64 {
    let c = lloyd_step(levels);
    levels
        .iter()
        .zip(&c)
        .map(|(b, c)| (b - c).abs())
        .fold(0.0, f64::max)
}

/// One Newton step on G(β) = β - centroid(β); the Jacobian is tridiagonal.
fn newton_step(levels: &[f64]) -> Option<Vec<f64>> {
    let n = levels.len();
    let bs = boundaries(levels);
    // c_i depends on the boundaries m_{i-1}, m_i which are midpoints of
    // neighbouring levels, hence the tridiagonal structure.
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut g = vec![0.0; n];
    for i in 0..n {
        let (a, b) = (bs[i], bs[i + 1]);
        let mass = mass_between(a, b);
        let num = phi_at(a) - phi_at(b);
        let c = num / mass;
        g[i] = levels[i] - c;
        // ∂c/∂a and ∂c/∂b
        let dca = if a.is_finite() {
            (-a * phi_at(a) * mass + num * phi_at(a)) / (mass * mass)
        } else {
            0.0
        };
        let dcb = if b.is_finite() {
            (b * phi_at(b) * mass - num * phi_at(b)) / (mass * mass)
        } else {
            0.0
        };
        // m_{i-1} = (β_{i-1}+β_i)/2, m_i = (β_i+β_{i+1})/2
        if i > 0 {
            lower[i] = -0.5 * dca;
        }
        diag[i] = 1.0 - 0.5 * (dca + dcb);
        if i + 1 < n {
            upper[i] = -0.5 * dcb;
        }
    }
    // Thomas algorithm
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let mut den = diag[0];
    if den.abs() < 1e-300 {
        return None;
    }
    cp[0] = upper[0] / den;
    dp[0] = g[0] / den;
    for i in 1..n {
        den = diag[i] - lower[i] * cp[i - 1];
        if den.abs() < 1e-300 {
            return None;
        }
        cp[i] = upper[i] / den;
        dp[i] = (g[i] - lower[i] * dp[i - 1]) / den;
    }
    let mut delta = vec![0.0; n];
    delta[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        delta[i] = dp[i] - cp[i] * delta[i + 1];
    }
    Some(delta)
}

/// The unique stationary (hence optimal) N-level quadratic quantizer of N(0,1).
///
/// `tol` bounds the fixed-point residual of the centroid condition.
pub fn optimal_scalar_quantizer(n: usize, tol: f64) -> Result<ScalarQuantizer> {
    if n == 0 {
        return Err(FqError::Domain("quantizer size must be >= 1".into()));
    }
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(FqError::Domain(format!("tol {tol} outside (0, 1e-6]")));
    }
    if n == 1 {
        return Ok(ScalarQuantizer {
            size: 1,
            levels: vec![0.0],
            weights: vec![1.0],
            distortion: 1.0,
        });
    }

    // quantile start, then Lloyd warm-up
    let mut levels: Vec<f64> = (1..=n)
        .map(|i| normal::inv_cdf((i as f64 - 0.5) / n as f64))
        .collect();
    let mut res = residual_of(&levels);
    let mut warmup = 0usize;
    while res > 1e-4 && warmup < 500 {
        levels = lloyd_step(&levels);
        res = residual_of(&levels);
        warmup += 1;
    }

    // Newton with damping; fall back to Lloyd steps if a Newton step would
    // break the ordering or increase the residual.
    let cap = 400usize;
    let mut iters = 0usize;
    while res > tol && iters < cap {
        let mut advanced = false;
        if let Some(delta) = newton_step(&levels) {
            let mut t = 1.0;
            for _ in 0..30 {
                let cand: Vec<f64> = levels
                    .iter()
                    .zip(&delta)
                    .map(|(b, d)| b - t * d)
                    .collect();
                let ordered = cand.windows(2).all(|w| w[0] < w[1]);
                if ordered {
                    let r = residual_of(&cand);
                    if r < res {
                        levels = cand;
                        res = r;
                        advanced = true;
                        break;
                    }
                }
                t *= 0.5;
            }
        }
        if !advanced {
            levels = lloyd_step(&levels);
            res = residual_of(&levels);
        }
        iters += 1;
    }
    if res > tol {
        return Err(FqError::SolverFailure {
            residual: res,
            iterations: warmup + iters,
        });
    }

    // enforce exact symmetry
    let mut sym = levels.clone();
    for i in 0..n {
        sym[i] = 0.5 * (levels[i] - levels[n - 1 - i]);
    }
    if residual_of(&sym) <= res.max(tol) {
        levels = sym;
    }

    let bs = boundaries(&levels);
    let weights: Vec<f64> = (0..n).map(|i| mass_between(bs[i], bs[i + 1])).collect();
    let distortion = distortion_of(&levels);
    Ok(ScalarQuantizer {
        size: n,
        levels,
        weights,
        distortion,
    })
}

/// Nearest-level index; a tie at a cell boundary goes to the lower index.
pub fn quantize_scalar(x: f64, q: &ScalarQuantizer) -> usize {
    let mids = q.midpoints();
    mids.partition_point(|&m| m < x)
}

/// L^p quantization error ||Z - Ẑ||_p of the quantizer, by per-cell quadrature.
///
/// Interior cells are integrated directly; the two tail cells are mapped
/// through Φ so the integration interval is finite.
pub fn lp_error(q: &ScalarQuantizer, p: f64) -> f64 {
    assert!(p > 0.0 && p <= 16.0, "p must lie in (0, 16]");
    // The two unbounded cells are truncated at ±40; the discarded mass is
    // below e^{-800} and cannot affect any representable digit.
    const CUT: f64 = 40.0;
    let bs = boundaries(&q.levels);
    let mut total = 0.0;
    for (i, &beta) in q.levels.iter().enumerate() {
        let a = bs[i].max(-CUT);
        let b = bs[i + 1].min(CUT);
        if a < b {
            total += quad::integrate_adaptive(
                &|x: f64| (x - beta).abs().powf(p) * normal::pdf(x),
                a,
                b,
                1e-11,
            );
        }
    }
    total.powf(1.0 / p)
}

static DISTORTION_CACHE: Lazy<Mutex<HashMap<usize, f64>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Residual tolerance achievable at size n: round-off in the cell
/// centroids grows with the level count, while the distortion error is
/// only O(residual²), so a size-scaled tolerance loses nothing.
pub fn solver_tolerance(n: usize) -> f64 {
    (n as f64 * 5e-15).max(1e-12)
}

/// Distortion of the optimal N-level normal quantizer (cached).
pub fn normal_distortion(n: usize) -> f64 {
    if let Some(&d) = DISTORTION_CACHE.lock().unwrap().get(&n) {
        return d;
    }
    let d = optimal_scalar_quantizer(n, solver_tolerance(n))
        .expect("scalar quantizer solver failed")
        .distortion;
    DISTORTION_CACHE.lock().unwrap().insert(n, d);
    d
}

/// Best-effort codebook for N(0, Diag(λ)) from randomized Lloyd iterations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianDiagCodebook {
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub distortion: f64,
    pub distortion_se: f64,
}

const LLOYD_BATCH: usize = 100_000;

/// Randomized (Monte Carlo) Lloyd for N(0, Diag(λ)), initialized from the
/// optimal product codebook of size <= n. Deterministic given the seed.
pub fn lloyd_gaussian_diag(
    lambdas: &[f64],
    n: usize,
    seed: u64,
    iters: usize,
) -> Result<GaussianDiagCodebook> {
    if lambdas.is_empty() {
        return Err(FqError::Domain("eigenvalue list must be non-empty".into()));
    }
    if lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(FqError::Domain("eigenvalues must be positive".into()));
    }
    if n == 0 {
        return Err(FqError::Domain("codebook size must be >= 1".into()));
    }
    let dim = lambdas.len();

    // product initializer from the optimal bit allocation over these eigenvalues
    let alloc = crate::codebook::allocate_over(lambdas, n, 0.0);
    let mut sizes = alloc.0.clone();
    while sizes.len() < dim {
        sizes.push(1);
    }
    let scalars: Vec<ScalarQuantizer> = sizes
        .iter()
        .map(|&m| optimal_scalar_quantizer(m, 1e-12))
        .collect::<Result<_>>()?;
    let mut points: Vec<Vec<f64>> = vec![vec![0.0; dim]];
    for (k, sq) in scalars.iter().enumerate() {
        let mut next = Vec::with_capacity(points.len() * sq.size);
        for p in &points {
            for &lvl in &sq.levels {
                let mut q = p.clone();
                q[k] = lvl * lambdas[k].sqrt();
                next.push(q);
            }
        }
        points = next;
    }
    let m = points.len();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sds: Vec<f64> = lambdas.iter().map(|l| l.sqrt()).collect();
    let sample = |rng: &mut ChaCha8Rng, z: &mut [f64]| {
        for (k, zk) in z.iter_mut().enumerate() {
            // Box-Muller-free: rand's StandardNormal via ziggurat
            *zk = rng.sample::<f64, _>(rand_distr_standard_normal()) * sds[k];
        }
    };

    let nearest = |points: &[Vec<f64>], z: &[f64]| -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in points.iter().enumerate() {
            let d: f64 = p.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    };

    let mut z = vec![0.0; dim];
    for _ in 0..iters {
        let mut sums = vec![vec![0.0; dim]; m];
        let mut counts = vec![0usize; m];
        for _ in 0..LLOYD_BATCH {
            sample(&mut rng, &mut z);
            let i = nearest(&points, &z);
            counts[i] += 1;
            for (s, &zk) in sums[i].iter_mut().zip(z.iter()) {
                *s += zk;
            }
        }
        for i in 0..m {
            if counts[i] > 0 {
                for k in 0..dim {
                    points[i][k] = sums[i][k] / counts[i] as f64;
                }
            }
        }
    }

    // final estimation batch: weights, distortion and its standard error
    let mut counts = vec![0usize; m];
    let mut acc = 0.0;
    let mut acc2 = 0.0;
    for _ in 0..LLOYD_BATCH {
        sample(&mut rng, &mut z);
        let i = nearest(&points, &z);
        counts[i] += 1;
        let d: f64 = points[i].iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum();
        acc += d;
        acc2 += d * d;
    }
    let b = LLOYD_BATCH as f64;
    let mean = acc / b;
    let var = (acc2 / b - mean * mean).max(0.0);
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / b).collect();

    Ok(GaussianDiagCodebook {
        dim,
        eigenvalues: lambdas.to_vec(),
        points,
        weights,
        distortion: mean,
        distortion_se: (var / b).sqrt(),
    })
}

// Small inline standard-normal sampler distribution handle.
fn rand_distr_standard_normal() -> impl rand::distributions::Distribution<f64> {
    struct StdNormal;
    impl rand::distributions::Distribution<f64> for StdNormal {
        fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
            // Box-Muller on two uniforms; adequate here and dependency-free.
            loop {
                let u1: f64 = rng.gen::<f64>();
                if u1 <= 0.0 {
                    continue;
                }
                let u2: f64 = rng.gen::<f64>();
                let r = (-2.0 * u1.ln()).sqrt();
                return r * (2.0 * std::f64::consts::PI * u2).cos();
            }
        }
    }
    StdNormal
}
