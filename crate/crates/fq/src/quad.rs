//! Gauss-Legendre quadrature rules.

use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Computed by Newton iteration on the Legendre polynomial from the
/// Chebyshev initial guess; accurate to machine precision for the
/// orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    static CACHE: Lazy<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> =
        Lazy::new(|| Mutex::new(HashMap::new()));
    if let Some(rule) = CACHE.lock().unwrap().get(&n) {
        return rule.clone();
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            // Legendre P_n(x) and derivative by recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                // one polishing step
                let (mut q0, mut q1) = (1.0, x);
                for k in 2..=n {
                    let q2 = ((2 * k - 1) as f64 * x * q1 - (k - 1) as f64 * q0) / k as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (x * q1 - q0) / (x * x - 1.0);
                nodes[i] = -x;
                nodes[n - 1 - i] = x;
                let w = 2.0 / ((1.0 - x * x) * dq * dq);
                weights[i] = w;
                weights[n - 1 - i] = w;
                break;
            }
        }
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    CACHE
        .lock()
        .unwrap()
        .insert(n, (nodes.clone(), weights.clone()));
    (nodes, weights)
}

/// ∫_a^b f(x) dx with the n-point rule on a single panel.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let c = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        acc += w * f(mid + c * x);
    }
    acc * c
}

/// Composite rule: `panels` equal panels of the n-point rule.
pub fn integrate_composite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    n: usize,
    panels: usize,
) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| integrate(f, a + i as f64 * h, a + (i + 1) as f64 * h, n))
        .sum()
}

/// Adaptive composite rule: doubles the panel count until two successive
/// estimates agree to `rel_tol` (or `max_panels` is reached).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mut panels = 4;
    let mut prev = integrate_composite(f, a, b, 16, panels);
    loop {
        panels *= 2;
        let next = integrate_composite(f, a, b, 16, panels);
        let scale = next.abs().max(prev.abs()).max(1e-300);
        if (next - prev).abs() <= rel_tol * scale || panels >= 4096 {
            return next;
        }
        prev = next;
    }
}
