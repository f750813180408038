//! Level-2 lifts: Chen consistency, Lévy area statistics and the
//! rough-path distance between a Brownian path and its quantization.

use fquant::codebook::{build_product_codebook, elementary_path, voronoi_project};
use fquant::kl::simulate_brownian;
use fquant::roughpath::{enhance_brownian, enhance_quantizer, rho_q};

fn main() -> fquant::Result<()> {
    // Chen defect of a lifted Brownian path over random triples
    let w = simulate_brownian(512, 2, 1.0, 7);
    let e = enhance_brownian(&w);
    let d = e.dim;
    let mut worst = 0.0f64;
    let (mut a_su, mut a_ut, mut a_st) = (vec![0.0; d * d], vec![0.0; d * d], vec![0.0; d * d]);
    for (s, u, t) in [(0, 100, 400), (17, 130, 256), (64, 128, 512)] {
        e.chen_area_into(s, u, &mut a_su);
        e.chen_area_into(u, t, &mut a_ut);
        e.chen_area_into(s, t, &mut a_st);
        for k in 0..d {
            for l in 0..d {
                let defect = a_st[k * d + l]
                    - a_su[k * d + l]
                    - a_ut[k * d + l]
                    - (e.x(u, k) - e.x(s, k)) * (e.x(t, l) - e.x(u, l));
                worst = worst.max(defect.abs());
            }
        }
    }
    println!("max Chen defect over sample triples: {worst:.3e}");
    println!(
        "terminal Levy area A^(12) of this path: {:+.4}",
        e.prefix_area_row(512)[d + 2]
    );

    // rho_q between one Brownian path and its codebook cell, growing N
    let w1 = simulate_brownian(1024, 1, 1.0, 11);
    let ew = enhance_brownian(&w1);
    for n in [4usize, 16, 64, 256] {
        let cb = build_product_codebook(n, 1, 1.0)?;
        let idx = voronoi_project(&w1, &cb)?;
        let hat = elementary_path(&cb, &idx)?;
        let ehat = enhance_quantizer(&hat, 1024);
        println!("N = {n:>3}: rho_q(Ŵ, W) = {:.4}", rho_q(&ew, &ehat, 2.5)?);
    }
    Ok(())
}
