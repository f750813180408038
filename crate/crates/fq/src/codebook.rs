//! Optimal product quantizers of d-dimensional Brownian motion: integral bit
//! allocation over the K-L eigenvalues, elementary quantizer paths, Voronoi
//! projection, cell weights and the quantized Wiener integral.

use crate::error::{FqError, Result};
use crate::kl::{self, GridPath};
use crate::scalar_quant::{self, ScalarQuantizer};
use serde_json::json;

/// Levels-per-frequency N_1 >= ... >= N_L >= 2 with ∏ N_k <= budget,
/// followed implicitly by 1s. `distortion` is the exact squared quadratic
/// error of one Brownian component under this allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct BitAllocation {
    pub budget: usize,
    pub levels: Vec<usize>,
    pub distortion: f64,
}

impl BitAllocation {
    pub fn product(&self) -> usize {
        self.levels.iter().product()
    }
}

/// Exact distortion of an allocation over the supplied eigenvalues plus a
/// constant tail: Σ_k λ_k · dist(N_k) + tail (N_k = 1 has dist 1).
fn allocation_cost(lambdas: &[f64], sizes: &[usize], tail: f64) -> f64 {
    let mut acc = tail;
    for (k, &l) in lambdas.iter().enumerate() {
        let n = sizes.get(k).copied().unwrap_or(1);
        acc += l * if n == 1 { 1.0 } else { scalar_quant::normal_distortion(n) };
    }
    acc
}

/// Minimize Σ λ_k dist(N_k) + tail over ∏ N_k <= budget.
///
/// Water-filling relaxation (N_k ∝ sqrt(λ_k)) plus a greedy start, then
/// local search over ±1 moves and pairwise transfers until no move improves.
/// Returns the sizes (trimmed to entries >= 2) and the achieved cost.
pub fn allocate_over(lambdas: &[f64], budget: usize, tail: f64) -> (Vec<usize>, f64) {
    assert!(budget >= 1 && !lambdas.is_empty());
    let kmax = lambdas.len();
    let feasible = |sizes: &[usize]| -> bool {
        let mut p = 1usize;
        for &s in sizes {
            p = match p.checked_mul(s) {
                Some(v) => v,
                None => return false,
            };
            if p > budget {
                return false;
            }
        }
        true
    };

    let polish = |start: Vec<usize>| -> (Vec<usize>, f64) {
        let mut sizes = start;
        // keep non-increasing: with λ decreasing and dist decreasing this
        // rearrangement never hurts
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let mut cost = allocation_cost(lambdas, &sizes, tail);
        loop {
            let mut improved = false;
            // single increments
            for k in 0..kmax {
                let mut cand = sizes.clone();
                cand[k] += 1;
                cand.sort_unstable_by(|a, b| b.cmp(a));
                if feasible(&cand) {
                    let c = allocation_cost(lambdas, &cand, tail);
                    if c < cost - 1e-15 {
                        sizes = cand;
                        cost = c;
                        improved = true;
                    }
                }
            }
            // pairwise transfers (decrement j, increment k)
            for j in 0..kmax {
                if sizes[j] <= 1 {
                    continue;
                }
                for k in 0..kmax {
                    // sizes may have changed since the loop-top check
                    if j == k || sizes[j] <= 1 {
                        continue;
                    }
                    let mut cand = sizes.clone();
                    cand[j] -= 1;
                    cand[k] += 1;
                    cand.sort_unstable_by(|a, b| b.cmp(a));
                    if feasible(&cand) {
                        let c = allocation_cost(lambdas, &cand, tail);
                        if c < cost - 1e-15 {
                            sizes = cand;
                            cost = c;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
        (sizes, cost)
    };

    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut consider = |cand: (Vec<usize>, f64)| {
        if best.as_ref().map_or(true, |b| cand.1 < b.1) {
            best = Some(cand);
        }
    };

    // shrink to feasibility, cheapest-loss coordinate first
    let shrink = |sizes: &mut Vec<usize>, lock: usize| {
        while !feasible(sizes) {
            let mut best_k = None;
            let mut best_rise = f64::INFINITY;
            for k in lock..kmax {
                if sizes[k] <= 1 {
                    continue;
                }
                let rise = lambdas[k] * (dist_of(sizes[k] - 1) - dist_of(sizes[k]));
                if rise < best_rise {
                    best_rise = rise;
                    best_k = Some(k);
                }
            }
            match best_k {
                Some(k) => sizes[k] -= 1,
                None => break,
            }
        }
    };

    // water-filling over lambdas[lock..] with the given sub-budget, first
    // coordinates already fixed; one rounded candidate per active length
    let mut water_fill = |fixed: &[usize], sub_budget: usize| {
        let lock = fixed.len();
        let lmax = if sub_budget >= 2 {
            (sub_budget as f64).log2().floor() as usize
        } else {
            0
        };
        let base = {
            let mut s = vec![1usize; kmax];
            s[..lock].copy_from_slice(fixed);
            s
        };
        if feasible(&base) {
            consider(polish(base.clone()));
        }
        for l in 1..=lmax.min(kmax - lock) {
            let log_prod: f64 = lambdas[lock..lock + l].iter().map(|x| 0.5 * x.ln()).sum();
            let a = ((sub_budget as f64).ln() - log_prod) / l as f64;
            let mut sizes = base.clone();
            for k in lock..lock + l {
                let x = (a + 0.5 * lambdas[k].ln()).exp();
                sizes[k] = x.round().max(1.0) as usize;
            }
            shrink(&mut sizes, lock);
            if feasible(&sizes) {
                consider(polish(sizes));
            }
        }
    };

    // all-ones greedy start (the base of the unconstrained call), then
    // plain water-filling
    water_fill(&[], budget);

    // first-coordinate sweep: fix N_1, water-fill the remaining budget.
    // Local search cannot always reach the optimum from the rounded
    // relaxation alone (e.g. [10,2] vs a [7,3] basin at budget 21), but it
    // can from the best per-N_1 start. Only worthwhile at small budgets,
    // where integrality effects are large; sweeping large budgets would
    // cost thousands of scalar-quantizer solves for a negligible gain.
    const SWEEP_LIMIT: usize = 128;
    if budget <= SWEEP_LIMIT {
        for n1 in 2..=budget {
            water_fill(&[n1], budget / n1);
        }
    }

    let (mut sizes, cost) = best.expect("at least one candidate");
    sizes.truncate(sizes.iter().position(|&s| s < 2).unwrap_or(sizes.len()));
    (sizes, cost)
}

fn dist_of(n: usize) -> f64 {
    if n == 1 {
        1.0
    } else {
        scalar_quant::normal_distortion(n)
    }
}

/// Enough eigenvalues for any allocation of the given budget: active
/// coordinates all have N_k >= 2, so at most log2(budget) of them.
fn bm_lambdas(budget: usize, horizon: f64) -> Vec<f64> {
    let kmax = ((budget as f64).log2().floor() as usize + 2).max(4);
    (1..=kmax).map(|k| kl::eigenvalue(k, horizon)).collect()
}

/// Optimal integral bit allocation for one Brownian component on [0,T].
pub fn optimal_bit_allocation(budget: usize, horizon: f64) -> BitAllocation {
    assert!(budget >= 1 && horizon > 0.0);
    let lambdas = bm_lambdas(budget, horizon);
    let tail_total = horizon * horizon / 2.0;
    let tail = tail_total - lambdas.iter().sum::<f64>();
    let (levels, distortion) = allocate_over(&lambdas, budget, tail);
    BitAllocation {
        budget,
        levels,
        distortion,
    }
}

/// No single ±1 move or pairwise transfer within the budget improves the
/// allocation. Used by tests and diagnostics.
pub fn is_locally_optimal(alloc: &BitAllocation, horizon: f64) -> bool {
    let lambdas = bm_lambdas(alloc.budget, horizon);
    let tail_total = horizon * horizon / 2.0;
    let tail = tail_total - lambdas.iter().sum::<f64>();
    let mut sizes = vec![1usize; lambdas.len()];
    sizes[..alloc.levels.len()].copy_from_slice(&alloc.levels);
    let product = |s: &[usize]| s.iter().try_fold(1usize, |p, &x| p.checked_mul(x));
    let cost = allocation_cost(&lambdas, &sizes, tail);
    for j in 0..sizes.len() {
        for delta in [-1i64, 1] {
            let mut cand = sizes.clone();
            let v = cand[j] as i64 + delta;
            if v < 1 {
                continue;
            }
            cand[j] = v as usize;
            if product(&cand).map_or(false, |p| p <= alloc.budget)
                && allocation_cost(&lambdas, &cand, tail) < cost - 1e-15
            {
                return false;
            }
        }
        for k in 0..sizes.len() {
            if j == k || sizes[j] <= 1 {
                continue;
            }
            let mut cand = sizes.clone();
            cand[j] -= 1;
            cand[k] += 1;
            if product(&cand).map_or(false, |p| p <= alloc.budget)
                && allocation_cost(&lambdas, &cand, tail) < cost - 1e-15
            {
                return false;
            }
        }
    }
    true
}

/// Brute-force allocation minimum by exhaustive enumeration of non-increasing
/// factorizations with product <= budget. Feasible for budgets up to ~10^4.
pub fn brute_force_allocation(budget: usize, horizon: f64) -> f64 {
    let lambdas = bm_lambdas(budget, horizon);
    let tail_total = horizon * horizon / 2.0;
    let tail = tail_total - lambdas.iter().sum::<f64>();
    let mut best = f64::INFINITY;
    let mut sizes: Vec<usize> = Vec::new();
    fn rec(
        lambdas: &[f64],
        tail: f64,
        budget: usize,
        cap: usize,
        sizes: &mut Vec<usize>,
        best: &mut f64,
    ) {
        let cost = allocation_cost(lambdas, sizes, tail);
        if cost < *best {
            *best = cost;
        }
        if sizes.len() >= lambdas.len() {
            return;
        }
        let mut n = 2usize;
        while n <= cap && n <= budget {
            sizes.push(n);
            rec(lambdas, tail, budget / n, n, sizes, best);
            sizes.pop();
            n += 1;
        }
    }
    rec(&lambdas, tail, budget, budget, &mut sizes, &mut best);
    best
}

/// One codebook cell: a finite sine-series path per component, with an
/// analytic derivative. Component 0 of the rough-path lift (time) is kept
/// implicit; `eval`/`derivative` return only the d Brownian components.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerPath {
    pub horizon: f64,
    /// per component: (frequency k >= 1, coefficient c_k = β sqrt(λ_k))
    pub components: Vec<Vec<(usize, f64)>>,
}

impl QuantizerPath {
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn zero(dim: usize, horizon: f64) -> Self {
        QuantizerPath {
            horizon,
            components: vec![Vec::new(); dim],
        }
    }

    /// α(t): Σ_k c_k sqrt(2/T) sin(t / sqrt(λ_k)) per component.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let norm = (2.0 / self.horizon).sqrt();
        self.components
            .iter()
            .map(|comp| {
                comp.iter()
                    .map(|&(k, c)| c * norm * (t / kl::eigenvalue(k, self.horizon).sqrt()).sin())
                    .sum()
            })
            .collect()
    }

    /// α'(t): Σ_k (c_k / sqrt(λ_k)) sqrt(2/T) cos(t / sqrt(λ_k)) per component.
    pub fn derivative(&self, t: f64) -> Vec<f64> {
        let norm = (2.0 / self.horizon).sqrt();
        self.components
            .iter()
            .map(|comp| {
                comp.iter()
                    .map(|&(k, c)| {
                        let sl = kl::eigenvalue(k, self.horizon).sqrt();
                        c / sl * norm * (t / sl).cos()
                    })
                    .sum()
            })
            .collect()
    }

    /// Highest active frequency over all components (0 if the zero path).
    pub fn max_frequency(&self) -> usize {
        self.components
            .iter()
            .flat_map(|c| c.iter().map(|&(k, _)| k))
            .max()
            .unwrap_or(0)
    }

    /// Sample on the uniform n-grid.
    pub fn sample(&self, n: usize) -> GridPath {
        let values = (0..=n)
            .map(|i| self.eval(self.horizon * i as f64 / n as f64))
            .collect();
        GridPath::new(self.horizon, values, self.dim()).expect("n >= 1")
    }
}

/// Product codebook of d-dimensional Brownian motion at level N: the optimal
/// product quantization at level ⌊N^(1/d)⌋ of each component.
#[derive(Debug, Clone)]
pub struct ProductCodebook {
    pub dim: usize,
    pub horizon: f64,
    pub budget: usize,
    pub allocation: BitAllocation,
    pub quantizers: Vec<ScalarQuantizer>,
}

fn integer_root(n: usize, d: usize) -> usize {
    if d == 1 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / d as f64).floor() as usize;
    // fix float rounding on either side
    while r.checked_pow(d as u32).map_or(true, |p| p > n) {
        r -= 1;
    }
    while (r + 1).checked_pow(d as u32).map_or(false, |p| p <= n) {
        r += 1;
    }
    r.max(1)
}

pub fn build_product_codebook(budget: usize, dim: usize, horizon: f64) -> Result<ProductCodebook> {
    if budget == 0 || dim == 0 || !(horizon > 0.0) {
        return Err(FqError::Domain(
            "budget >= 1, dim >= 1 and T > 0 required".into(),
        ));
    }
    let per_component = integer_root(budget, dim);
    let allocation = optimal_bit_allocation(per_component, horizon);
    let quantizers = allocation
        .levels
        .iter()
        .map(|&m| scalar_quant::optimal_scalar_quantizer(m, scalar_quant::solver_tolerance(m)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProductCodebook {
        dim,
        horizon,
        budget,
        allocation,
        quantizers,
    })
}

impl ProductCodebook {
    /// Number of active frequencies per component.
    pub fn active(&self) -> usize {
        self.allocation.levels.len()
    }

    /// Total number of cells, (∏ N_k)^d.
    pub fn size(&self) -> usize {
        self.allocation.product().pow(self.dim as u32)
    }

    /// Decode a flat cell number into a multi-index, row-major over
    /// (component, frequency): idx[c * L + k] selects the level of
    /// frequency k+1 in component c.
    pub fn decode(&self, mut flat: usize) -> Vec<usize> {
        let l = self.active();
        let mut idx = vec![0usize; self.dim * l];
        for slot in (0..self.dim * l).rev() {
            let radix = self.allocation.levels[slot % l];
            idx[slot] = flat % radix;
            flat /= radix;
        }
        idx
    }

    pub fn check_index(&self, idx: &[usize]) -> Result<()> {
        let l = self.active();
        if idx.len() != self.dim * l {
            return Err(FqError::IndexOutOfRange(format!(
                "expected {} entries, got {}",
                self.dim * l,
                idx.len()
            )));
        }
        for (slot, &i) in idx.iter().enumerate() {
            if i >= self.allocation.levels[slot % l] {
                return Err(FqError::IndexOutOfRange(format!(
                    "slot {slot} value {i} >= {}",
                    self.allocation.levels[slot % l]
                )));
            }
        }
        Ok(())
    }

    /// Iterate all multi-indices.
    pub fn cells(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.size()).map(|f| self.decode(f))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "T": self.horizon,
            "d": self.dim,
            "budget": self.budget,
            "allocation": self.allocation.levels,
            "scalar_quantizers": self.quantizers.iter().map(|q| q.to_json()).collect::<Vec<_>>(),
            "distortion": codebook_distortion(self),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let horizon = v["T"]
            .as_f64()
            .ok_or_else(|| FqError::Parse("missing T".into()))?;
        let dim = v["d"]
            .as_u64()
            .ok_or_else(|| FqError::Parse("missing d".into()))? as usize;
        let budget = v["budget"]
            .as_u64()
            .ok_or_else(|| FqError::Parse("missing budget".into()))? as usize;
        let levels: Vec<usize> = v["allocation"]
            .as_array()
            .ok_or_else(|| FqError::Parse("missing allocation".into()))?
            .iter()
            .map(|x| x.as_u64().unwrap_or(0) as usize)
            .collect();
        let quantizers = v["scalar_quantizers"]
            .as_array()
            .ok_or_else(|| FqError::Parse("missing scalar_quantizers".into()))?
            .iter()
            .map(ScalarQuantizer::from_json)
            .collect::<Result<Vec<_>>>()?;
        let lambdas = bm_lambdas(budget.max(2), horizon);
        let tail = horizon * horizon / 2.0 - lambdas.iter().sum::<f64>();
        let distortion = allocation_cost(&lambdas, &levels, tail);
        Ok(ProductCodebook {
            dim,
            horizon,
            budget,
            allocation: BitAllocation {
                budget: integer_root(budget, dim),
                levels,
                distortion,
            },
            quantizers,
        })
    }
}

/// The elementary quantizer path of one cell.
pub fn elementary_path(cb: &ProductCodebook, idx: &[usize]) -> Result<QuantizerPath> {
    cb.check_index(idx)?;
    let l = cb.active();
    let mut components = Vec::with_capacity(cb.dim);
    for c in 0..cb.dim {
        let mut coeffs = Vec::with_capacity(l);
        for k in 0..l {
            let beta = cb.quantizers[k].levels[idx[c * l + k]];
            coeffs.push((k + 1, beta * kl::eigenvalue(k + 1, cb.horizon).sqrt()));
        }
        components.push(coeffs);
    }
    Ok(QuantizerPath {
        horizon: cb.horizon,
        components,
    })
}

/// Nearest-neighbour projection of a path onto the codebook. The basis is
/// orthonormal and the codebook a coordinate product, so the squared L²
/// distance separates across coordinates and the per-coordinate argmin is
/// the global argmin.
pub fn voronoi_project(path: &GridPath, cb: &ProductCodebook) -> Result<Vec<usize>> {
    if path.dim != cb.dim {
        return Err(FqError::GridMismatch(format!(
            "path dim {} vs codebook dim {}",
            path.dim, cb.dim
        )));
    }
    let l = cb.active();
    if l == 0 {
        return Ok(Vec::new());
    }
    let xi = kl::kl_coefficients(path, l)?;
    let mut idx = Vec::with_capacity(cb.dim * l);
    for comp in xi.iter().take(cb.dim) {
        for (k, &x) in comp.iter().enumerate() {
            idx.push(scalar_quant::quantize_scalar(x, &cb.quantizers[k]));
        }
    }
    Ok(idx)
}

/// P(W ∈ cell): product of the scalar cell weights across components and
/// frequencies (the K-L coefficients are independent).
pub fn cell_weight(cb: &ProductCodebook, idx: &[usize]) -> Result<f64> {
    cb.check_index(idx)?;
    let l = cb.active();
    let mut w = 1.0;
    for (slot, &i) in idx.iter().enumerate() {
        w *= cb.quantizers[slot % l].weights[i];
    }
    Ok(w)
}

/// Exact squared L²(P; L²_T) quantization error of the codebook,
/// d · (Σ_k λ_k dist(N_k) + T²/2 − Σ_k λ_k).
pub fn codebook_distortion(cb: &ProductCodebook) -> f64 {
    cb.dim as f64 * cb.allocation.distortion
}

/// ∫_0^t φ(s) dŴ_s per component for a deterministic integrand φ sampled on
/// the uniform grid: sqrt(2/T) Σ_k (c_k/sqrt(λ_k)) ∫_0^t φ(s) cos(s/sqrt(λ_k)) ds,
/// trapezoidal quadrature. `t_idx` selects the grid point t.
pub fn quantized_wiener_integral(
    cb: &ProductCodebook,
    idx: &[usize],
    phi: &[f64],
    t_idx: usize,
) -> Result<Vec<f64>> {
    let path = elementary_path(cb, idx)?;
    if t_idx >= phi.len() {
        return Err(FqError::Domain("t index beyond the integrand grid".into()));
    }
    let n = phi.len() - 1;
    let dt = cb.horizon / n as f64;
    let norm = (2.0 / cb.horizon).sqrt();
    let mut out = vec![0.0; cb.dim];
    for (c, comp) in path.components.iter().enumerate() {
        for &(k, coeff) in comp {
            let sl = kl::eigenvalue(k, cb.horizon).sqrt();
            let mut integral = 0.0;
            for i in 0..=t_idx {
                let s = i as f64 * dt;
                let w = if i == 0 || i == t_idx { 0.5 } else { 1.0 };
                integral += w * phi[i] * (s / sl).cos();
            }
            integral *= dt;
            out[c] += norm * coeff / sl * integral;
        }
    }
    Ok(out)
}
