//! Stratonovich SDE approximation by weighted ensembles of ODEs driven
//! by quantizer paths.
//!
//! Each codebook cell contributes one ordinary differential equation
//! dx/dt = b(x) + σ(x) α'(t), solved by classical RK4; expectations are
//! the cell-weight-weighted averages of the resulting functionals. A
//! predictor-corrector (Heun) scheme on Brownian grid paths serves as the
//! stochastic reference.

use crate::codebook::{cell_weight, elementary_path, ProductCodebook, QuantizerPath};
use crate::error::{FqError, Result};
use crate::kl::GridPath;
use std::sync::Arc;

/// Which stochastic integral the drift of a spec refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Calculus {
    Ito,
    Stratonovich,
}

type VecField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
/// state -> m x d diffusion matrix, row-major (state dim m, noise dim d)
type MatField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
/// state -> per-state-coordinate Jacobian of sigma: index [l][i*d + j] = ∂_l σ^{ij}
type SigmaJac = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;

/// A (possibly multidimensional) SDE dX = b dt + σ dW with `d` noise
/// components and `state_dim` state components.
#[derive(Clone)]
pub struct SdeSpec {
    pub name: String,
    pub state_dim: usize,
    pub noise_dim: usize,
    pub x0: Vec<f64>,
    pub calculus: Calculus,
    pub drift: VecField,
    pub diffusion: MatField,
    /// analytic ∂σ when available; otherwise finite differences are used
    pub sigma_jacobian: Option<SigmaJac>,
}

impl std::fmt::Debug for SdeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SdeSpec")
            .field("name", &self.name)
            .field("state_dim", &self.state_dim)
            .field("noise_dim", &self.noise_dim)
            .field("x0", &self.x0)
            .field("calculus", &self.calculus)
            .finish()
    }
}

fn sigma_jacobian_fd(sigma: &MatField, x: &[f64], d: usize) -> Vec<Vec<f64>> {
    let m = x.len();
    let mut out = Vec::with_capacity(m);
    for l in 0..m {
        let h = 1e-6 * (1.0 + x[l].abs());
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[l] += h;
        xm[l] -= h;
        let sp = sigma(&xp);
        let sm = sigma(&xm);
        out.push(
            (0..m * d)
                .map(|idx| (sp[idx] - sm[idx]) / (2.0 * h))
                .collect(),
        );
    }
    out
}

/// Stratonovich drift of a spec: for Itô specs applies the correction
/// b_S^i = b^i − ½ Σ_{j,l} (∂_l σ^{ij}) σ^{lj}; Stratonovich specs are
/// returned unchanged.
pub fn stratonovich_drift(spec: &SdeSpec) -> VecField {
    match spec.calculus {
        Calculus::Stratonovich => spec.drift.clone(),
        Calculus::Ito => corrected_drift(spec, -0.5),
    }
}

/// Itô drift of a spec (inverse correction, +½ Σ (∂_l σ^{ij}) σ^{lj}).
pub fn ito_drift(spec: &SdeSpec) -> VecField {
    match spec.calculus {
        Calculus::Ito => spec.drift.clone(),
        Calculus::Stratonovich => corrected_drift(spec, 0.5),
    }
}

fn corrected_drift(spec: &SdeSpec, sign_half: f64) -> VecField {
    let drift = spec.drift.clone();
    let sigma = spec.diffusion.clone();
    let jac = spec.sigma_jacobian.clone();
    let d = spec.noise_dim;
    Arc::new(move |x: &[f64]| {
        let m = x.len();
        let mut b = drift(x);
        let s = sigma(x);
        let ds = match &jac {
            Some(j) => j(x),
            None => sigma_jacobian_fd(&sigma, x, d),
        };
        for (i, bi) in b.iter_mut().enumerate().take(m) {
            let mut corr = 0.0;
            for j in 0..d {
                for (l, dsl) in ds.iter().enumerate().take(m) {
                    corr += dsl[i * d + j] * s[l * d + j];
                }
            }
            *bi += sign_half * corr;
        }
        b
    })
}

/// Solution of one cell ODE on the uniform grid: values is (n+1) x state_dim.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub horizon: f64,
    pub values: Vec<Vec<f64>>,
}

impl OdeSolution {
    pub fn terminal(&self) -> &[f64] {
        self.values.last().unwrap()
    }

    pub fn to_grid_path(&self) -> GridPath {
        GridPath {
            horizon: self.horizon,
            values: self.values.clone(),
            dim: self.values[0].len(),
        }
    }
}

const BLOW_UP_LIMIT: f64 = 1e12;

/// RK4 solve of dx/dt = b_S(x) + σ(x) α'(t) along one quantizer path.
/// The step count must resolve the fastest mode of the driver: at least
/// 32 steps per period of the highest active frequency.
pub fn solve_elementary_ode(
    spec: &SdeSpec,
    path: &QuantizerPath,
    n: usize,
) -> Result<OdeSolution> {
    if path.dim() != spec.noise_dim {
        return Err(FqError::GridMismatch(format!(
            "driver has {} components, spec {} expects {}",
            path.dim(),
            spec.name,
            spec.noise_dim
        )));
    }
    let required = 32 * path.max_frequency().max(1);
    if n < required {
        return Err(FqError::Resolution { n, required });
    }
    let t = path.horizon;
    let dt = t / n as f64;
    let b = stratonovich_drift(spec);
    let sigma = spec.diffusion.clone();
    let d = spec.noise_dim;
    let m = spec.state_dim;

    let field = |x: &[f64], u: f64| -> Vec<f64> {
        let mut v = b(x);
        let s = sigma(x);
        let da = path.derivative(u);
        for (i, vi) in v.iter_mut().enumerate() {
            for j in 0..d {
                *vi += s[i * d + j] * da[j];
            }
        }
        v
    };

    let mut values = Vec::with_capacity(n + 1);
    values.push(spec.x0.clone());
    let mut x = spec.x0.clone();
    for step in 0..n {
        let u = dt * step as f64;
        let k1 = field(&x, u);
        let x2: Vec<f64> = (0..m).map(|i| x[i] + 0.5 * dt * k1[i]).collect();
        let k2 = field(&x2, u + 0.5 * dt);
        let x3: Vec<f64> = (0..m).map(|i| x[i] + 0.5 * dt * k2[i]).collect();
        let k3 = field(&x3, u + 0.5 * dt);
        let x4: Vec<f64> = (0..m).map(|i| x[i] + dt * k3[i]).collect();
        let k4 = field(&x4, u + dt);
        for i in 0..m {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP_LIMIT) {
            return Err(FqError::BlowUp {
                time: u + dt,
                cell: Vec::new(),
            });
        }
        values.push(x.clone());
    }
    Ok(OdeSolution { horizon: t, values })
}

/// Heun predictor-corrector step along a Brownian grid path; converges to
/// the Stratonovich solution as the grid is refined.
pub fn solve_reference_sde(spec: &SdeSpec, driver: &GridPath) -> Result<OdeSolution> {
    if driver.dim != spec.noise_dim {
        return Err(FqError::GridMismatch(format!(
            "driver has {} components, spec {} expects {}",
            driver.dim, spec.name, spec.noise_dim
        )));
    }
    let n = driver.n();
    let dt = driver.dt();
    let b = stratonovich_drift(spec);
    let sigma = spec.diffusion.clone();
    let d = spec.noise_dim;
    let m = spec.state_dim;

    let mut values = Vec::with_capacity(n + 1);
    values.push(spec.x0.clone());
    let mut x = spec.x0.clone();
    for step in 0..n {
        let dw: Vec<f64> = (0..d)
            .map(|j| driver.values[step + 1][j] - driver.values[step][j])
            .collect();
        let bx = b(&x);
        let sx = sigma(&x);
        let mut pred = x.clone();
        for i in 0..m {
            pred[i] += bx[i] * dt;
            for j in 0..d {
                pred[i] += sx[i * d + j] * dw[j];
            }
        }
        let bp = b(&pred);
        let sp = sigma(&pred);
        for i in 0..m {
            x[i] += 0.5 * (bx[i] + bp[i]) * dt;
            for j in 0..d {
                x[i] += 0.5 * (sx[i * d + j] + sp[i * d + j]) * dw[j];
            }
        }
        if x.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP_LIMIT) {
            return Err(FqError::BlowUp {
                time: dt * (step + 1) as f64,
                cell: Vec::new(),
            });
        }
        values.push(x.clone());
    }
    Ok(OdeSolution {
        horizon: driver.horizon,
        values,
    })
}

/// The full cubature ensemble: one ODE solve per codebook cell with the
/// corresponding cell weight.
#[derive(Debug, Clone)]
pub struct QuantizedSolution {
    pub horizon: f64,
    pub cells: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
    pub solutions: Vec<OdeSolution>,
}

pub fn quantized_sde_ensemble(
    spec: &SdeSpec,
    codebook: &ProductCodebook,
    n: usize,
) -> Result<QuantizedSolution> {
    if codebook.dim != spec.noise_dim {
        return Err(FqError::GridMismatch(format!(
            "codebook is {}-dimensional, spec {} expects {}",
            codebook.dim, spec.name, spec.noise_dim
        )));
    }
    let mut cells = Vec::with_capacity(codebook.size());
    let mut weights = Vec::with_capacity(codebook.size());
    let mut solutions = Vec::with_capacity(codebook.size());
    for idx in codebook.cells() {
        let path = elementary_path(codebook, &idx)?;
        let sol = solve_elementary_ode(spec, &path, n).map_err(|e| match e {
            FqError::BlowUp { time, .. } => FqError::BlowUp {
                time,
                cell: idx.clone(),
            },
            other => other,
        })?;
        weights.push(cell_weight(codebook, &idx)?);
        cells.push(idx);
        solutions.push(sol);
    }
    Ok(QuantizedSolution {
        horizon: codebook.horizon,
        cells,
        weights,
        solutions,
    })
}

/// Weighted expectation of a path functional over the ensemble.
pub fn quantized_expectation<F: Fn(&OdeSolution) -> f64>(
    ensemble: &QuantizedSolution,
    functional: F,
) -> f64 {
    ensemble
        .weights
        .iter()
        .zip(&ensemble.solutions)
        .map(|(w, sol)| w * functional(sol))
        .sum()
}

/// Named scalar SDE specs usable from the command line and the examples.
pub fn spec_registry() -> Vec<SdeSpec> {
    vec![
        // geometric Brownian motion, sigma = 0.3, zero drift, Stratonovich
        SdeSpec {
            name: "gbm".into(),
            state_dim: 1,
            noise_dim: 1,
            x0: vec![1.0],
            calculus: Calculus::Stratonovich,
            drift: Arc::new(|_| vec![0.0]),
            diffusion: Arc::new(|x| vec![0.3 * x[0]]),
            sigma_jacobian: Some(Arc::new(|_| vec![vec![0.3]])),
        },
        // linear: pure diffusion sigma x, Stratonovich; solution x0 exp(sigma alpha(t))
        SdeSpec {
            name: "linear".into(),
            state_dim: 1,
            noise_dim: 1,
            x0: vec![1.0],
            calculus: Calculus::Stratonovich,
            drift: Arc::new(|_| vec![0.0]),
            diffusion: Arc::new(|x| vec![x[0]]),
            sigma_jacobian: Some(Arc::new(|_| vec![vec![1.0]])),
        },
        // zero diffusion: deterministic exponential decay
        SdeSpec {
            name: "zero-diffusion".into(),
            state_dim: 1,
            noise_dim: 1,
            x0: vec![1.0],
            calculus: Calculus::Stratonovich,
            drift: Arc::new(|x| vec![-x[0]]),
            diffusion: Arc::new(|_| vec![0.0]),
            sigma_jacobian: Some(Arc::new(|_| vec![vec![0.0]])),
        },
        // dissipative cubic drift with additive-plus-linear noise
        SdeSpec {
            name: "cubic".into(),
            state_dim: 1,
            noise_dim: 1,
            x0: vec![0.5],
            calculus: Calculus::Stratonovich,
            drift: Arc::new(|x| vec![x[0] - x[0].powi(3)]),
            diffusion: Arc::new(|x| vec![0.2 + 0.1 * x[0]]),
            sigma_jacobian: Some(Arc::new(|_| vec![vec![0.1]])),
        },
    ]
}

pub fn lookup_spec(name: &str) -> Result<SdeSpec> {
    spec_registry()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| {
            let names: Vec<String> = spec_registry().into_iter().map(|s| s.name).collect();
            FqError::Parse(format!(
                "unknown spec '{name}'; available: {}",
                names.join(", ")
            ))
        })
}

/// Named path functionals for the cubature command.
pub fn functional_registry() -> Vec<(&'static str, fn(&OdeSolution) -> f64)> {
    vec![
        ("terminal", |sol| sol.terminal()[0]),
        ("average", |sol| {
            // trapezoidal time average of the first state component
            let n = sol.values.len() - 1;
            let mut acc = 0.0;
            for i in 0..n {
                acc += 0.5 * (sol.values[i][0] + sol.values[i + 1][0]);
            }
            acc / n as f64
        }),
        ("sup", |sol| {
            sol.values.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max)
        }),
    ]
}

pub fn lookup_functional(name: &str) -> Result<fn(&OdeSolution) -> f64> {
    functional_registry()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, f)| f)
        .ok_or_else(|| {
            let names: Vec<&str> = functional_registry().into_iter().map(|(n, _)| n).collect();
            FqError::Parse(format!(
                "unknown functional '{name}'; available: {}",
                names.join(", ")
            ))
        })
}
