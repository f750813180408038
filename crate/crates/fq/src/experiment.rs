//! Convergence experiments: quadratic rate tables, Hölder/rough-path
//! convergence of the quantizers, and pathwise SDE convergence of the
//! quantized ODE ensembles.
//!
//! All stochastic experiments draw one Brownian path per (seed, path
//! index) pair and reuse it across every quantization level N, so the
//! reported trends are common-random-number comparisons. Work is
//! parallel across paths; outputs are collected in path order, so tables
//! are bit-identical for a fixed seed regardless of worker count.

use crate::codebook::{build_product_codebook, elementary_path, voronoi_project, ProductCodebook};
use crate::error::{FqError, Result};
use crate::kl::{simulate_brownian, GridPath};
use crate::qsde::{
    quantized_expectation, quantized_sde_ensemble, solve_elementary_ode, solve_reference_sde,
    OdeSolution, SdeSpec,
};
use crate::roughpath::{enhance_brownian, enhance_quantizer, holder_level1, holder_level2, rho_q};
use rayon::prelude::*;
use std::io::Write;

/// A rectangular numeric result table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// CSV emission; `comments` become leading `# `-prefixed lines.
    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| {
                    if v.fract() == 0.0 && v.abs() < 1e15 {
                        format!("{}", *v as i64)
                    } else {
                        format!("{v:.10e}")
                    }
                })
                .collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// (q25, median, q75) of a sample, by linear interpolation on the sorted
/// order statistics.
pub fn quartiles(samples: &[f64]) -> (f64, f64, f64) {
    assert!(!samples.is_empty());
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let at = |p: f64| -> f64 {
        let pos = p * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        v[lo] * (1.0 - frac) + v[hi] * frac
    };
    (at(0.25), at(0.5), at(0.75))
}

/// Exact quadratic-rate table: per budget N the rows are
/// (N, √distortion, √distortion · (log N)^{1/2} / T). No Monte Carlo.
pub fn rate_quadratic(ns: &[usize], horizon: f64) -> Result<Table> {
    let mut table = Table::new(&["N", "quadratic_error", "rate_constant"]);
    for &n in ns {
        let cb = build_product_codebook(n, 1, horizon)?;
        let err = cb.allocation.distortion.sqrt();
        let constant = err * (n.max(1) as f64).ln().sqrt() / horizon;
        table.push(vec![n as f64, err, constant]);
    }
    Ok(table)
}

fn seed_for_path(seed: u64, path: usize) -> u64 {
    seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(path as u64 + 1))
}

struct HolderSample {
    level1: f64,
    level2: f64,
    rho: f64,
    sup: f64,
}

fn holder_sample(
    w: &GridPath,
    cb: &ProductCodebook,
    q: f64,
) -> Result<HolderSample> {
    let idx = voronoi_project(w, cb)?;
    let hat = elementary_path(cb, &idx)?;
    let n = w.n();
    let hat_grid = hat.sample(n);

    let diff: Vec<Vec<f64>> = (0..=n)
        .map(|i| {
            (0..w.dim)
                .map(|c| w.values[i][c] - hat_grid.values[i][c])
                .collect()
        })
        .collect();
    let level1 = holder_level1(w.horizon, &diff, q);
    let sup = diff
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);

    let ew = enhance_brownian(w);
    let ehat = enhance_quantizer(&hat, n);
    let level2 = holder_level2(&ew, Some(&ehat), q)?;
    // the time components of the two lifts coincide, so the level-1 part of
    // rho_q equals the Hölder distance of the Brownian components
    let rho = level1 + level2;
    Ok(HolderSample {
        level1,
        level2,
        rho,
        sup,
    })
}

/// Hölder-convergence experiment: per N, median and quartiles over
/// Monte Carlo paths of the level-1 Hölder distance ‖W − Ŵ^N‖, the
/// level-2 area-difference norm, and ρ_q; the sup-distance median is
/// included as a cross-check column.
pub fn rate_holder(
    ns: &[usize],
    dim: usize,
    horizon: f64,
    q: f64,
    grid: usize,
    paths: usize,
    seed: u64,
) -> Result<Table> {
    if !(2.0 < q && q < 3.0) {
        return Err(FqError::Domain(format!("q must lie in (2, 3), got {q}")));
    }
    let mut table = Table::new(&[
        "N",
        "holder1_q25",
        "holder1_median",
        "holder1_q75",
        "level2_q25",
        "level2_median",
        "level2_q75",
        "rho_q25",
        "rho_median",
        "rho_q75",
        "sup_median",
    ]);
    for &n in ns {
        let cb = build_product_codebook(n, dim, horizon)?;
        let samples: Result<Vec<HolderSample>> = (0..paths)
            .into_par_iter()
            .map(|p| {
                let w = simulate_brownian(grid, dim, horizon, seed_for_path(seed, p));
                holder_sample(&w, &cb, q)
            })
            .collect();
        let samples = samples?;
        let l1: Vec<f64> = samples.iter().map(|s| s.level1).collect();
        let l2: Vec<f64> = samples.iter().map(|s| s.level2).collect();
        let rh: Vec<f64> = samples.iter().map(|s| s.rho).collect();
        let sup: Vec<f64> = samples.iter().map(|s| s.sup).collect();
        let (a1, m1, b1) = quartiles(&l1);
        let (a2, m2, b2) = quartiles(&l2);
        let (ar, mr, br) = quartiles(&rh);
        let (_, ms, _) = quartiles(&sup);
        table.push(vec![n as f64, a1, m1, b1, a2, m2, b2, ar, mr, br, ms]);
    }
    Ok(table)
}

/// Pathwise SDE convergence: per N, simulate Brownian paths, project each
/// onto its codebook cell, solve the cell ODE and the reference SDE on
/// the same grid, lift both solutions and record ρ_q(X̃^N, X_ref) and the
/// level-1 sup-distance; report median and quartiles.
pub fn pathwise_convergence_experiment(
    spec: &SdeSpec,
    q: f64,
    ns: &[usize],
    horizon: f64,
    grid: usize,
    paths: usize,
    seed: u64,
) -> Result<Table> {
    if !(2.0 < q && q < 3.0) {
        return Err(FqError::Domain(format!("q must lie in (2, 3), got {q}")));
    }
    let mut table = Table::new(&[
        "N",
        "rho_q25",
        "rho_median",
        "rho_q75",
        "sup_median",
    ]);
    for &n in ns {
        let cb = build_product_codebook(n, spec.noise_dim, horizon)?;
        let samples: Result<Vec<(f64, f64)>> = (0..paths)
            .into_par_iter()
            .map(|p| {
                let w = simulate_brownian(grid, spec.noise_dim, horizon, seed_for_path(seed, p));
                let idx = voronoi_project(&w, &cb)?;
                let driver = elementary_path(&cb, &idx)?;
                let quantized = solve_elementary_ode(spec, &driver, grid)?;
                let reference = solve_reference_sde(spec, &w)?;
                let eq = enhance_brownian(&quantized.to_grid_path());
                let er = enhance_brownian(&reference.to_grid_path());
                let rho = rho_q(&eq, &er, q)?;
                let sup = quantized
                    .values
                    .iter()
                    .zip(&reference.values)
                    .map(|(a, b)| {
                        a.iter()
                            .zip(b)
                            .map(|(x, y)| (x - y) * (x - y))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .fold(0.0, f64::max);
                Ok((rho, sup))
            })
            .collect();
        let samples = samples?;
        let rho: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let sup: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let (a, m, b) = quartiles(&rho);
        let (_, ms, _) = quartiles(&sup);
        table.push(vec![n as f64, a, m, b, ms]);
    }
    Ok(table)
}

/// Cubature estimate: weighted expectation of a named functional over the
/// quantized ensemble at budget N.
pub fn cubature_estimate(
    spec: &SdeSpec,
    functional: fn(&OdeSolution) -> f64,
    budget: usize,
    horizon: f64,
    grid: usize,
) -> Result<f64> {
    let cb = build_product_codebook(budget, spec.noise_dim, horizon)?;
    let ens = quantized_sde_ensemble(spec, &cb, grid)?;
    Ok(quantized_expectation(&ens, functional))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsde::{lookup_functional, lookup_spec};

    #[test]
    fn quartiles_of_small_samples() {
        assert_eq!(quartiles(&[3.0]), (3.0, 3.0, 3.0));
        let (a, m, b) = quartiles(&[4.0, 1.0, 2.0, 3.0]);
        assert!((a - 1.75).abs() < 1e-12);
        assert!((m - 2.5).abs() < 1e-12);
        assert!((b - 3.25).abs() < 1e-12);
    }

    #[test]
    fn table_csv_shape() {
        let mut t = Table::new(&["N", "x"]);
        t.push(vec![10.0, 0.125]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf, &["invocation: demo".into()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# invocation: demo");
        assert_eq!(lines[1], "N,x");
        assert!(lines[2].starts_with("10,1.25"));
        assert_eq!(t.column("x").unwrap(), vec![0.125]);
        assert!(t.column("missing").is_none());
    }

    #[test]
    fn quadratic_rate_table_properties() {
        let t = rate_quadratic(&[10, 100, 1000], 1.0).unwrap();
        let err = t.column("quadratic_error").unwrap();
        assert!(err[0] > err[1] && err[1] > err[2]);
        let c = t.column("rate_constant").unwrap();
        for v in &c {
            assert!(*v > 0.40 && *v < 0.60, "constant {v}");
        }
        // doubling T doubles the quadratic error column (λ_k ∝ T²)
        let t2 = rate_quadratic(&[10, 100], 2.0).unwrap();
        let e1 = rate_quadratic(&[10, 100], 1.0).unwrap();
        for (a, b) in t2
            .column("quadratic_error")
            .unwrap()
            .iter()
            .zip(e1.column("quadratic_error").unwrap())
        {
            assert!((a - 2.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn holder_experiment_small_run() {
        let t = rate_holder(&[4, 64], 1, 1.0, 2.5, 512, 24, 7).unwrap();
        let rho = t.column("rho_median").unwrap();
        assert!(rho[0] > rho[1], "rho medians {rho:?}");
        // dominance: level-1 Hölder median >= sup median
        let l1 = t.column("holder1_median").unwrap();
        let sup = t.column("sup_median").unwrap();
        assert!(l1[0] >= sup[0] && l1[1] >= sup[1]);
        // determinism
        let t2 = rate_holder(&[4, 64], 1, 1.0, 2.5, 512, 24, 7).unwrap();
        assert_eq!(t, t2);
    }

    #[test]
    fn zero_diffusion_convergence_is_scheme_noise() {
        let spec = lookup_spec("zero-diffusion").unwrap();
        let t = pathwise_convergence_experiment(&spec, 2.5, &[2, 10], 1.0, 512, 8, 3).unwrap();
        for m in t.column("rho_median").unwrap() {
            assert!(m < 1e-4, "median {m}");
        }
    }

    #[test]
    fn gbm_convergence_small_run() {
        let spec = lookup_spec("gbm").unwrap();
        let t = pathwise_convergence_experiment(&spec, 2.5, &[4, 64], 1.0, 512, 24, 11).unwrap();
        let rho = t.column("rho_median").unwrap();
        assert!(rho[0] > rho[1], "rho medians {rho:?}");
        let sup = t.column("sup_median").unwrap();
        assert!(sup[0] > sup[1], "sup medians {sup:?}");
    }

    #[test]
    fn q_out_of_range_rejected() {
        assert!(rate_holder(&[4], 1, 1.0, 3.5, 256, 4, 0).is_err());
        let spec = lookup_spec("gbm").unwrap();
        assert!(pathwise_convergence_experiment(&spec, 1.5, &[4], 1.0, 256, 4, 0).is_err());
    }

    #[test]
    fn cubature_terminal_mean() {
        let spec = lookup_spec("gbm").unwrap();
        let f = lookup_functional("terminal").unwrap();
        let est = cubature_estimate(&spec, f, 100, 1.0, 512).unwrap();
        let exact = (0.5f64 * 0.09).exp();
        assert!((est - exact).abs() / exact < 0.10, "estimate {est}");
    }
}
