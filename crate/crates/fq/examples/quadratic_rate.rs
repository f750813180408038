//! Exact quadratic quantization error of the optimal product quantizers
//! and the normalized rate constant √distortion · (log N)^{1/2}.

use fquant::experiment::rate_quadratic;

fn main() -> fquant::Result<()> {
    let table = rate_quadratic(&[10, 100, 1_000, 10_000], 1.0)?;
    table.write_csv(std::io::stdout().lock(), &["quadratic rate, T = 1".into()])?;
    Ok(())
}
