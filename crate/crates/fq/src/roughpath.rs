//! Level-2 enhancement of paths: increments plus running Lévy areas with
//! time as component 0, Chen reconstruction, Hölder and p-variation
//! semi-norms and the ρ_q / δ_p rough-path distances.
//!
//! Level-2 data is stored as prefix areas A_{0,t_i}; any A_{s,t} is then
//! reconstructed in O(1) through Chen's relation, which makes the tensor
//! multiplicative property hold identically.

use crate::codebook::QuantizerPath;
use crate::error::{FqError, Result};
use crate::kl::GridPath;
use crate::quad;
use std::io::Write;

/// Pair sups are exhaustive up to this grid size; beyond it the scan is
/// restricted to dyadic index gaps plus all gaps <= 64 (a lower bound of
/// the true sup, shared by both sides of every comparison we make).
pub const EXHAUSTIVE_PAIR_LIMIT: usize = 4096;

/// Grid paths lifted to level 2. Component 0 is time; `dim` is d + 1.
#[derive(Debug, Clone)]
pub struct EnhancedPath {
    pub horizon: f64,
    /// number of components D = d + 1 (component 0 is t)
    pub dim: usize,
    n: usize,
    /// level-1 values, row-major (n+1) x D
    level1: Vec<f64>,
    /// prefix areas A_{0,t_i}, row-major (n+1) x D x D
    area: Vec<f64>,
}

impl EnhancedPath {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n as f64
    }

    #[inline]
    pub fn x(&self, i: usize, comp: usize) -> f64 {
        self.level1[i * self.dim + comp]
    }

    #[inline]
    pub fn level1_row(&self, i: usize) -> &[f64] {
        &self.level1[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn prefix_area_row(&self, i: usize) -> &[f64] {
        let dd = self.dim * self.dim;
        &self.area[i * dd..(i + 1) * dd]
    }

    /// A_{t_i, t_j} reconstructed through Chen's relation:
    /// A_{s,t} = A_{0,t} − A_{0,s} − (x_s − x_0) ⊗ (x_t − x_s).
    pub fn chen_area_into(&self, i: usize, j: usize, out: &mut [f64]) {
        let d = self.dim;
        let ai = self.prefix_area_row(i);
        let aj = self.prefix_area_row(j);
        let xi = self.level1_row(i);
        let xj = self.level1_row(j);
        let x0 = self.level1_row(0);
        for k in 0..d {
            let dk = xi[k] - x0[k];
            for l in 0..d {
                out[k * d + l] = aj[k * d + l] - ai[k * d + l] - dk * (xj[l] - xi[l]);
            }
        }
    }

    pub fn chen_area(&self, i: usize, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim * self.dim];
        self.chen_area_into(i, j, &mut out);
        out
    }

    /// CSV export: `t, x0..x{D-1}, A00..A{D-1}{D-1}` with prefix areas row-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.dim;
        let mut header = vec!["t".to_string()];
        header.extend((0..d).map(|k| format!("x{k}")));
        for k in 0..d {
            for l in 0..d {
                header.push(format!("A{k}{l}"));
            }
        }
        writeln!(w, "{}", header.join(","))?;
        for i in 0..=self.n {
            let mut row = vec![format!("{:.16e}", self.dt() * i as f64)];
            row.extend(self.level1_row(i).iter().map(|v| format!("{v:.16e}")));
            row.extend(self.prefix_area_row(i).iter().map(|v| format!("{v:.16e}")));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Lift a quantizer path: level 1 by evaluation, per-interval Stieltjes
/// areas by Gauss-Legendre quadrature of order 8 with the analytic
/// derivative, prefix-accumulated through Chen's relation.
pub fn enhance_quantizer(path: &QuantizerPath, n: usize) -> EnhancedPath {
    assert!(n >= 2);
    let d_brown = path.dim();
    let d = d_brown + 1;
    let t = path.horizon;
    let dt = t / n as f64;

    let mut level1 = vec![0.0; (n + 1) * d];
    for i in 0..=n {
        let ti = dt * i as f64;
        level1[i * d] = ti;
        let v = path.eval(ti);
        level1[i * d + 1..(i + 1) * d].copy_from_slice(&v);
    }

    let (nodes, weights) = quad::gauss_legendre(8);
    let mut area = vec![0.0; (n + 1) * d * d];
    let mut interval = vec![0.0; d * d];
    for j in 0..n {
        let t0 = dt * j as f64;
        interval.iter_mut().for_each(|v| *v = 0.0);
        let start: Vec<f64> = {
            let mut s = vec![t0];
            s.extend(path.eval(t0));
            s
        };
        let c = 0.5 * dt;
        let mid = t0 + c;
        for (node, wt) in nodes.iter().zip(&weights) {
            let u = mid + c * node;
            let mut g = vec![u];
            g.extend(path.eval(u));
            let mut dg = vec![1.0];
            dg.extend(path.derivative(u));
            let w = wt * c;
            for k in 0..d {
                let inc = g[k] - start[k];
                for l in 0..d {
                    interval[k * d + l] += w * inc * dg[l];
                }
            }
        }
        // prefix accumulation via Chen
        let (head, tail) = area.split_at_mut((j + 1) * d * d);
        let prev = &head[j * d * d..];
        let next = &mut tail[..d * d];
        for k in 0..d {
            let dk = level1[j * d + k] - level1[k];
            for l in 0..d {
                let dl = level1[(j + 1) * d + l] - level1[j * d + l];
                next[k * d + l] = prev[k * d + l] + interval[k * d + l] + dk * dl;
            }
        }
    }

    EnhancedPath {
        horizon: t,
        dim: d,
        n,
        level1,
        area,
    }
}

/// Stratonovich lift of a Brownian grid path: off-diagonal areas between
/// Brownian components by left-point sums (Itô = Stratonovich a.s. for
/// independent components), diagonals by the exact ½(increment)², the time
/// row and column by trapezoidal sums.
pub fn enhance_brownian(path: &GridPath) -> EnhancedPath {
    let n = path.n();
    let d_brown = path.dim;
    let d = d_brown + 1;
    let t = path.horizon;
    let dt = path.dt();

    let mut level1 = vec![0.0; (n + 1) * d];
    for i in 0..=n {
        level1[i * d] = dt * i as f64;
        for c in 0..d_brown {
            level1[i * d + 1 + c] = path.values[i][c];
        }
    }

    let mut area = vec![0.0; (n + 1) * d * d];
    // areas are taken relative to the starting point: A_{0,t} = ∫ (x - x_0) ⊗ dx
    let base: Vec<f64> = level1[..d].to_vec();
    // running off-diagonal and time-row/column sums
    let mut run = vec![0.0; d * d];
    for i in 1..=n {
        let prev = &level1[(i - 1) * d..i * d];
        let cur = &level1[i * d..(i + 1) * d];
        let ti = dt * (i - 1) as f64;
        let tj = dt * i as f64;
        for k in 1..d {
            for l in 1..d {
                if k != l {
                    run[k * d + l] += (prev[k] - base[k]) * (cur[l] - prev[l]);
                }
            }
            // ∫ u dx^k and ∫ (x^k - x^k_0) du, trapezoid
            run[l_idx(d, 0, k)] += 0.5 * (ti + tj) * (cur[k] - prev[k]);
            run[l_idx(d, k, 0)] += 0.5 * (prev[k] + cur[k] - 2.0 * base[k]) * dt;
        }
        let row = &mut area[i * d * d..(i + 1) * d * d];
        row.copy_from_slice(&run);
        row[0] = 0.5 * tj * tj;
        for k in 1..d {
            let y = cur[k] - base[k];
            row[k * d + k] = 0.5 * y * y;
        }
    }

    EnhancedPath {
        horizon: t,
        dim: d,
        n,
        level1,
        area,
    }
}

#[inline]
fn l_idx(d: usize, k: usize, l: usize) -> usize {
    k * d + l
}

/// Index gaps scanned by the pair sup for grid size n.
fn pair_gaps(n: usize) -> Vec<usize> {
    if n <= EXHAUSTIVE_PAIR_LIMIT {
        (1..=n).collect()
    } else {
        let mut gaps: Vec<usize> = (1..=64.min(n)).collect();
        let mut g = 128usize;
        while g <= n {
            gaps.push(g);
            g *= 2;
        }
        if *gaps.last().unwrap() != n {
            gaps.push(n);
        }
        gaps
    }
}

/// max over scanned pairs of f(i, j) * (t_j - t_i)^(-exp), times T^exp.
fn pair_sup<F: FnMut(usize, usize) -> f64>(n: usize, horizon: f64, exp: f64, mut f: F) -> f64 {
    let dt = horizon / n as f64;
    let mut best = 0.0f64;
    for g in pair_gaps(n) {
        let inv = (g as f64 * dt).powf(-exp);
        for i in 0..=(n - g) {
            let v = f(i, i + g) * inv;
            if v > best {
                best = v;
            }
        }
    }
    best * horizon.powf(exp)
}

/// Level-1 1/q-Hölder semi-norm T^(1/q) sup |x_t - x_s| / (t-s)^(1/q) of a
/// multi-component grid function (Euclidean norm across components).
pub fn holder_level1(horizon: f64, values: &[Vec<f64>], q: f64) -> f64 {
    assert!(q >= 1.0);
    let n = values.len() - 1;
    pair_sup(n, horizon, 1.0 / q, |i, j| {
        values[i]
            .iter()
            .zip(&values[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    })
}

/// Level-2 2/q-Hölder semi-norm T^(2/q) sup |A_{s,t}| / (t-s)^(2/q), with
/// A_{s,t} Chen-reconstructed; when `other` is given the norm is taken of
/// the area difference (per pair, after reconstruction on each side).
pub fn holder_level2(x: &EnhancedPath, other: Option<&EnhancedPath>, q: f64) -> Result<f64> {
    if let Some(y) = other {
        check_compatible(x, y)?;
    }
    let d = x.dim;
    let n = x.n();
    let mut ax = vec![0.0; d * d];
    let mut ay = vec![0.0; d * d];
    Ok(pair_sup(n, x.horizon, 2.0 / q, |i, j| {
        let mut fx = 0.0;
        x.chen_area_into(i, j, &mut ax);
        match other {
            Some(y) => {
                y.chen_area_into(i, j, &mut ay);
                for (a, b) in ax.iter().zip(&ay) {
                    let di = a - b;
                    fx += di * di;
                }
            }
            None => {
                for a in &ax {
                    fx += a * a;
                }
            }
        }
        fx.sqrt()
    }))
}

fn check_compatible(x: &EnhancedPath, y: &EnhancedPath) -> Result<()> {
    if x.n() != y.n() || x.dim != y.dim || (x.horizon - y.horizon).abs() > 1e-12 {
        return Err(FqError::GridMismatch(format!(
            "enhanced paths differ: n {} vs {}, dim {} vs {}",
            x.n(),
            y.n(),
            x.dim,
            y.dim
        )));
    }
    Ok(())
}

/// ρ_q distance: level-1 1/q-Hölder of the difference plus level-2
/// q/2-Hölder of the area difference.
pub fn rho_q(x: &EnhancedPath, y: &EnhancedPath, q: f64) -> Result<f64> {
    check_compatible(x, y)?;
    let n = x.n();
    let d = x.dim;
    let lvl1 = pair_sup(n, x.horizon, 1.0 / q, |i, j| {
        let mut s = 0.0;
        for k in 0..d {
            let di = (x.x(j, k) - x.x(i, k)) - (y.x(j, k) - y.x(i, k));
            s += di * di;
        }
        s.sqrt()
    });
    let lvl2 = holder_level2(x, Some(y), q)?;
    Ok(lvl1 + lvl2)
}

const PVAR_LIMIT: usize = 4096;

/// Exact p-variation of a multi-component grid path over all grid
/// sub-partitions: sup (Σ |x(t_{l+1}) - x(t_l)|^p)^(1/p), by an O(n²)
/// dynamic program.
pub fn p_variation(values: &[Vec<f64>], p: f64) -> Result<f64> {
    assert!(p >= 1.0);
    let n = values.len() - 1;
    if n > PVAR_LIMIT {
        return Err(FqError::SizeLimit { n, limit: PVAR_LIMIT });
    }
    let dist = |i: usize, j: usize| -> f64 {
        values[i]
            .iter()
            .zip(&values[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let mut dp = vec![0.0f64; n + 1];
    for j in 1..=n {
        let mut best = 0.0f64;
        for i in 0..j {
            let v = dp[i] + dist(i, j).powf(p);
            if v > best {
                best = v;
            }
        }
        dp[j] = best;
    }
    Ok(dp[n].powf(1.0 / p))
}

/// δ_p distance: p-variation of the level-1 difference plus p/2-variation
/// of the Chen-reconstructed area difference.
pub fn delta_p(x: &EnhancedPath, y: &EnhancedPath, p: f64) -> Result<f64> {
    check_compatible(x, y)?;
    let n = x.n();
    if n > PVAR_LIMIT {
        return Err(FqError::SizeLimit { n, limit: PVAR_LIMIT });
    }
    let d = x.dim;
    let lvl1_vals: Vec<Vec<f64>> = (0..=n)
        .map(|i| (0..d).map(|k| x.x(i, k) - y.x(i, k)).collect())
        .collect();
    let lvl1 = p_variation(&lvl1_vals, p)?;

    let half = p / 2.0;
    let mut ax = vec![0.0; d * d];
    let mut ay = vec![0.0; d * d];
    let mut dp = vec![0.0f64; n + 1];
    for j in 1..=n {
        let mut best = 0.0f64;
        for i in 0..j {
            x.chen_area_into(i, j, &mut ax);
            y.chen_area_into(i, j, &mut ay);
            let mut s = 0.0;
            for (a, b) in ax.iter().zip(&ay) {
                let di = a - b;
                s += di * di;
            }
            let v = dp[i] + s.sqrt().powf(half);
            if v > best {
                best = v;
            }
        }
        dp[j] = best;
    }
    Ok(lvl1 + dp[n].powf(1.0 / half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{build_product_codebook, elementary_path};
    use crate::kl::simulate_brownian;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_quantizer_path(dim: usize, seed: u64) -> QuantizerPath {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let components = (0..dim)
            .map(|_| {
                (1..=4)
                    .map(|k| (k, rng.gen_range(-0.8..0.8)))
                    .collect::<Vec<_>>()
            })
            .collect();
        QuantizerPath {
            horizon: 1.0,
            components,
        }
    }

    fn max_chen_defect(e: &EnhancedPath, triples: &[(usize, usize, usize)]) -> f64 {
        let d = e.dim;
        let mut worst = 0.0f64;
        let (mut a_su, mut a_ut, mut a_st) = (vec![0.0; d * d], vec![0.0; d * d], vec![0.0; d * d]);
        for &(s, u, t) in triples {
            e.chen_area_into(s, u, &mut a_su);
            e.chen_area_into(u, t, &mut a_ut);
            e.chen_area_into(s, t, &mut a_st);
            for k in 0..d {
                let dk = e.x(u, k) - e.x(s, k);
                for l in 0..d {
                    let defect =
                        a_st[k * d + l] - a_su[k * d + l] - a_ut[k * d + l] - dk * (e.x(t, l) - e.x(u, l));
                    worst = worst.max(defect.abs());
                }
            }
        }
        worst
    }

    fn random_triples(n: usize, count: usize, seed: u64) -> Vec<(usize, usize, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let mut v = [
                    rng.gen_range(0..=n),
                    rng.gen_range(0..=n),
                    rng.gen_range(0..=n),
                ];
                v.sort_unstable();
                (v[0], v[1], v[2])
            })
            .collect()
    }

    #[test]
    fn zero_path_enhancement() {
        let e = enhance_quantizer(&QuantizerPath::zero(1, 1.0), 64);
        for i in 0..=64 {
            let a = e.prefix_area_row(i);
            let t = e.dt() * i as f64;
            assert!((a[0] - 0.5 * t * t).abs() < 1e-12); // A^{00} = t²/2
            assert!(a[3].abs() < 1e-15); // A^{11} = 0
        }
    }

    #[test]
    fn quantizer_diagonal_is_half_square() {
        let p = random_quantizer_path(1, 5);
        let e = enhance_quantizer(&p, 512);
        let end = p.eval(1.0)[0];
        let a = e.prefix_area_row(512);
        assert!((a[3] - 0.5 * end * end).abs() < 1e-9, "{} vs {}", a[3], 0.5 * end * end);
    }

    #[test]
    fn smooth_antisymmetry() {
        let p = random_quantizer_path(2, 7);
        let e = enhance_quantizer(&p, 512);
        let d = e.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut a = vec![0.0; d * d];
        for _ in 0..100 {
            let mut ij = [rng.gen_range(0..=512usize), rng.gen_range(0..=512usize)];
            ij.sort_unstable();
            if ij[0] == ij[1] {
                continue;
            }
            e.chen_area_into(ij[0], ij[1], &mut a);
            for k in 0..d {
                for l in 0..d {
                    let prod = (e.x(ij[1], k) - e.x(ij[0], k)) * (e.x(ij[1], l) - e.x(ij[0], l));
                    assert!(
                        (a[k * d + l] + a[l * d + k] - prod).abs() < 1e-9,
                        "k={k} l={l}"
                    );
                }
            }
        }
    }

    #[test]
    fn chen_defect_is_zero_both_constructions() {
        for seed in 0..5u64 {
            let e = enhance_quantizer(&random_quantizer_path(2, seed), 256);
            let triples = random_triples(256, 200, seed + 50);
            assert!(max_chen_defect(&e, &triples) < 1e-12);
        }
        for seed in 0..5u64 {
            let w = simulate_brownian(512, 2, 1.0, 777 + seed);
            let e = enhance_brownian(&w);
            let triples = random_triples(512, 200, seed + 90);
            assert!(max_chen_defect(&e, &triples) < 1e-12);
        }
    }

    #[test]
    fn brownian_diagonal_exact() {
        let w = simulate_brownian(128, 2, 1.0, 3);
        let e = enhance_brownian(&w);
        let a = e.prefix_area_row(128);
        let w1 = e.x(128, 1);
        assert_eq!(a[e.dim + 1], 0.5 * w1 * w1);
    }

    #[test]
    fn brownian_levy_area_moments() {
        let n = 1 << 10;
        let n_paths = 500;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for seed in 0..n_paths as u64 {
            let w = simulate_brownian(n, 2, 1.0, 50_000 + seed);
            let e = enhance_brownian(&w);
            // A^{12}_{0,T}: components 1 and 2 of the lift
            let v = e.prefix_area_row(n)[e.dim + 2];
            acc += v;
            acc2 += v * v;
        }
        let m = n_paths as f64;
        let mean = acc / m;
        let var = acc2 / m - mean * mean;
        let se_mean = (var / m).sqrt();
        assert!(mean.abs() < 3.0 * se_mean, "mean {mean}");
        let se_var = var * (2.0f64 / m).sqrt();
        assert!((var - 0.5).abs() < 3.0 * se_var + 0.02, "var {var}");
    }

    #[test]
    fn time_row_consistency() {
        // A^{0k} + A^{k0} = t W^k_t exactly for the trapezoidal choice
        let w = simulate_brownian(64, 1, 2.0, 9);
        let e = enhance_brownian(&w);
        for i in [16usize, 40, 64] {
            let a = e.prefix_area_row(i);
            let t = e.dt() * i as f64;
            assert!((a[1] + a[2] - t * e.x(i, 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn holder_level1_linear_path() {
        let c = 1.7;
        let t = 2.0;
        let n = 256;
        let values: Vec<Vec<f64>> = (0..=n).map(|i| vec![c * t * i as f64 / n as f64]).collect();
        for q in [2.2, 2.5, 2.9] {
            let h = holder_level1(t, &values, q);
            // sup attained at (0,T): c T^{1-1/q} · T^{1/q} = cT
            assert!((h - c * t).abs() < 1e-10, "q = {q}: {h}");
        }
    }

    #[test]
    fn holder_level1_constant_and_homogeneous() {
        let values = vec![vec![3.0]; 65];
        assert_eq!(holder_level1(1.0, &values, 2.5), 0.0);

        let w = simulate_brownian(128, 1, 1.0, 21);
        let doubled: Vec<Vec<f64>> = w.values.iter().map(|v| vec![2.0 * v[0]]).collect();
        let h1 = holder_level1(1.0, &w.values, 2.5);
        let h2 = holder_level1(1.0, &doubled, 2.5);
        assert!((h2 - 2.0 * h1).abs() < 1e-12);
    }

    #[test]
    fn holder_restricted_is_lower_bound() {
        let n = EXHAUSTIVE_PAIR_LIMIT * 2;
        let w = simulate_brownian(n, 1, 1.0, 4);
        let restricted = holder_level1(1.0, &w.values, 2.5);
        // exhaustive sup over all pairs, computed directly
        let q = 2.5;
        let dt = 1.0 / n as f64;
        let mut exhaustive = 0.0f64;
        for g in 1..=n {
            let inv = (g as f64 * dt).powf(-1.0 / q);
            for i in 0..=(n - g) {
                let v = (w.values[i + g][0] - w.values[i][0]).abs() * inv;
                exhaustive = exhaustive.max(v);
            }
        }
        assert!(restricted <= exhaustive + 1e-12);
        // the restricted scan covers all short gaps, where the Brownian
        // Hölder sup concentrates; it should not be far off
        assert!(restricted >= 0.5 * exhaustive, "{restricted} vs {exhaustive}");
    }

    #[test]
    fn p_variation_basics() {
        let n = 64;
        let mono: Vec<Vec<f64>> = (0..=n).map(|i| vec![(i as f64 / n as f64).powi(2) * 3.0]).collect();
        for p in [1.5, 2.0, 2.9] {
            let v = p_variation(&mono, p).unwrap();
            assert!((v - 3.0).abs() < 1e-12, "p = {p}: {v}");
        }
        // p = 1: total variation
        let w = simulate_brownian(64, 1, 1.0, 8);
        let tv: f64 = w
            .values
            .windows(2)
            .map(|ab| (ab[1][0] - ab[0][0]).abs())
            .sum();
        assert!((p_variation(&w.values, 1.0).unwrap() - tv).abs() < 1e-12);
    }

    #[test]
    fn p_variation_small_grid_oracle() {
        // exhaustive oracle over all sub-partitions of a 12-point grid
        let w = simulate_brownian(12, 1, 1.0, 99);
        let p = 2.3;
        let n = w.n();
        let mut best = 0.0f64;
        for mask in 0u32..(1 << (n - 1)) {
            let mut pts = vec![0usize];
            for b in 0..n - 1 {
                if mask & (1 << b) != 0 {
                    pts.push(b + 1);
                }
            }
            pts.push(n);
            let s: f64 = pts
                .windows(2)
                .map(|ij| (w.values[ij[1]][0] - w.values[ij[0]][0]).abs().powf(p))
                .sum();
            best = best.max(s);
        }
        let dp = p_variation(&w.values, p).unwrap();
        assert!((dp - best.powf(1.0 / p)).abs() < 1e-12);
    }

    #[test]
    fn p_variation_dominates_sup() {
        // Lemma: ||x - x(0)||_sup <= Var_p(x)
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let n = 32;
            let values: Vec<Vec<f64>> = (0..=n)
                .map(|_| vec![rng.gen_range(-1.0..1.0)])
                .collect();
            let base = values[0][0];
            let sup = values
                .iter()
                .map(|v| (v[0] - base).abs())
                .fold(0.0, f64::max);
            for p in [1.0, 2.0, 2.5] {
                assert!(sup <= p_variation(&values, p).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn p_variation_size_guard() {
        let values = vec![vec![0.0]; PVAR_LIMIT + 2];
        assert!(matches!(
            p_variation(&values, 2.0),
            Err(FqError::SizeLimit { .. })
        ));
    }

    #[test]
    fn rho_q_axioms() {
        let x = enhance_quantizer(&random_quantizer_path(2, 1), 128);
        let y = enhance_quantizer(&random_quantizer_path(2, 2), 128);
        assert_eq!(rho_q(&x, &x, 2.5).unwrap(), 0.0);
        let xy = rho_q(&x, &y, 2.5).unwrap();
        let yx = rho_q(&y, &x, 2.5).unwrap();
        assert!((xy - yx).abs() < 1e-12);
        assert!(xy > 0.0);

        // against the zero lift, rho is the path's own seminorms
        let zero = enhance_quantizer(&QuantizerPath::zero(2, 1.0), 128);
        let values: Vec<Vec<f64>> = (0..=128)
            .map(|i| x.level1_row(i).to_vec())
            .collect();
        // level-1 difference with the zero lift removes the time component
        let rho = rho_q(&x, &zero, 2.5).unwrap();
        let brownian_only: Vec<Vec<f64>> = values.iter().map(|v| v[1..].to_vec()).collect();
        let lvl1 = holder_level1(1.0, &brownian_only, 2.5);
        assert!(rho >= lvl1 - 1e-12);
    }

    #[test]
    fn rho_q_grid_mismatch() {
        let x = enhance_quantizer(&random_quantizer_path(1, 1), 64);
        let y = enhance_quantizer(&random_quantizer_path(1, 1), 128);
        assert!(rho_q(&x, &y, 2.5).is_err());
    }

    #[test]
    fn delta_p_axioms_and_smooth_d1() {
        let x = enhance_quantizer(&random_quantizer_path(1, 3), 64);
        assert_eq!(delta_p(&x, &x, 2.5).unwrap(), 0.0);

        // two d=1 smooth lifts with identical level 1 have identical areas
        let y = enhance_quantizer(&random_quantizer_path(1, 3), 64);
        assert!(delta_p(&x, &y, 2.5).unwrap() < 1e-12);
    }

    #[test]
    fn delta_p_dominates_sup_of_level1() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for seed in 0..50u64 {
            let x = enhance_quantizer(&random_quantizer_path(1, 100 + seed), 16);
            let y = enhance_quantizer(&random_quantizer_path(1, 200 + seed), 16);
            let p = rng.gen_range(2.0..2.9);
            let d = delta_p(&x, &y, p).unwrap();
            let mut sup = 0.0f64;
            for i in 0..=16 {
                let mut s = 0.0;
                for k in 0..x.dim {
                    let v = (x.x(i, k) - y.x(i, k)) - (x.x(0, k) - y.x(0, k));
                    s += v * v;
                }
                sup = sup.max(s.sqrt());
            }
            assert!(sup <= d + 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn holder_subadditive_and_interpolation() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let n = 48;
            let a: Vec<Vec<f64>> = (0..=n).map(|_| vec![rng.gen_range(-1.0..1.0)]).collect();
            let b: Vec<Vec<f64>> = (0..=n).map(|_| vec![rng.gen_range(-1.0..1.0)]).collect();
            let sum: Vec<Vec<f64>> = a.iter().zip(&b).map(|(x, y)| vec![x[0] + y[0]]).collect();
            for q in [2.2, 2.5, 2.9] {
                let ha = holder_level1(1.0, &a, q);
                let hb = holder_level1(1.0, &b, q);
                let hs = holder_level1(1.0, &sum, q);
                assert!(hs <= ha + hb + 1e-12);
            }
            // interpolation: ||x||_{q,Hol}^q <= (2 ||x||_sup)^{q-q'} ||x||_{q',Hol}^{q'}
            let (q, qp) = (2.9, 2.2);
            let sup = a.iter().map(|v| v[0].abs()).fold(0.0, f64::max);
            let lhs = holder_level1(1.0, &a, q).powf(q);
            let rhs = (2.0 * sup).powf(q - qp) * holder_level1(1.0, &a, qp).powf(qp);
            assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn scaling_of_enhancement() {
        let p = random_quantizer_path(2, 40);
        let c = 1.9;
        let scaled = QuantizerPath {
            horizon: p.horizon,
            components: p
                .components
                .iter()
                .map(|comp| comp.iter().map(|&(k, v)| (k, c * v)).collect())
                .collect(),
        };
        let e = enhance_quantizer(&p, 64);
        let es = enhance_quantizer(&scaled, 64);
        for i in 0..=64 {
            for k in 1..e.dim {
                assert!((es.x(i, k) - c * e.x(i, k)).abs() < 1e-12);
            }
        }
        let mut a = vec![0.0; e.dim * e.dim];
        let mut asr = vec![0.0; e.dim * e.dim];
        e.chen_area_into(10, 50, &mut a);
        es.chen_area_into(10, 50, &mut asr);
        for k in 1..e.dim {
            for l in 1..e.dim {
                assert!((asr[k * e.dim + l] - c * c * a[k * e.dim + l]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn enhance_from_codebook_cells() {
        let cb = build_product_codebook(4, 2, 1.0).unwrap();
        let idx = cb.decode(cb.size() - 1);
        let path = elementary_path(&cb, &idx).unwrap();
        let e = enhance_quantizer(&path, 128);
        assert_eq!(e.dim, 3);
        // d=2 quantizer paths: diagonal consistency per component
        let a = e.prefix_area_row(128);
        for k in 1..3 {
            let v = e.x(128, k);
            assert!((a[k * 3 + k] - 0.5 * v * v).abs() < 1e-9);
        }
    }

    #[test]
    fn enhanced_csv_has_expected_shape() {
        let e = enhance_quantizer(&random_quantizer_path(1, 1), 8);
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x0,x1,A00,A01,A10,A11");
        assert_eq!(lines.count(), 9);
    }
}
