//! Monte Carlo convergence of the quantizers to Brownian motion in the
//! 1/q-Hölder rough-path metric (small run; raise N, grid and paths for
//! sharper tables).

use fquant::experiment::rate_holder;

fn main() -> fquant::Result<()> {
    let table = rate_holder(&[4, 16, 64], 1, 1.0, 2.5, 1024, 50, 1)?;
    table.write_csv(
        std::io::stdout().lock(),
        &["Hölder convergence, q = 2.5, 50 paths, grid 1024, seed 1".into()],
    )?;
    Ok(())
}
