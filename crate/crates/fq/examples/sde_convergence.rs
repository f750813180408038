//! Pathwise rough-path convergence of the quantized ODE ensemble to the
//! Stratonovich SDE solution for geometric Brownian motion.

use fquant::experiment::pathwise_convergence_experiment;
use fquant::qsde::lookup_spec;

fn main() -> fquant::Result<()> {
    let spec = lookup_spec("gbm")?;
    let table = pathwise_convergence_experiment(&spec, 2.5, &[4, 16, 64], 1.0, 512, 50, 1)?;
    table.write_csv(
        std::io::stdout().lock(),
        &["GBM rho_q convergence, q = 2.5, 50 paths, grid 512, seed 1".into()],
    )?;
    Ok(())
}
