//! Build an optimal product codebook of Brownian motion and inspect its
//! allocation, cell weights and a few elementary paths.

use fquant::codebook::{build_product_codebook, cell_weight, codebook_distortion, elementary_path};

fn main() -> fquant::Result<()> {
    let budget = 64;
    let cb = build_product_codebook(budget, 1, 1.0)?;
    println!(
        "budget {budget}: allocation {:?}, {} cells, distortion {:.6}",
        cb.allocation.levels,
        cb.size(),
        codebook_distortion(&cb)
    );

    // the three most probable cells
    let mut cells: Vec<(f64, Vec<usize>)> = cb
        .cells()
        .map(|idx| (cell_weight(&cb, &idx).unwrap(), idx))
        .collect();
    cells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for (w, idx) in cells.iter().take(3) {
        let path = elementary_path(&cb, idx)?;
        println!(
            "cell {idx:?}: weight {w:.5}, value at T/2 = {:+.4}",
            path.eval(0.5)[0]
        );
    }

    let total: f64 = cells.iter().map(|c| c.0).sum();
    println!("total cell mass: {total:.12}");
    Ok(())
}
