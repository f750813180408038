//! Functional quantization of Brownian motion, rough-path lifts, and
//! quantized cubature for Stratonovich SDEs.
//!
//! The pipeline: the Karhunen-Loève expansion of d-dimensional Brownian
//! motion ([`kl`]) is truncated and each coefficient quantized by an
//! optimal scalar normal quantizer ([`scalar_quant`]); a product codebook
//! with a distortion-optimal size allocation ([`codebook`]) yields finite
//! weighted sets of smooth paths. Paths — true and quantized — are lifted
//! to level-2 rough paths with Lévy areas ([`roughpath`]), quantizer
//! cells drive ordinary differential equations approximating Stratonovich
//! SDE solutions ([`qsde`]), and the convergence behaviour is measured by
//! the experiment harness ([`experiment`]).

pub mod codebook;
pub mod error;
pub mod experiment;
pub mod kl;
pub mod normal;
pub mod qsde;
pub mod quad;
pub mod roughpath;
pub mod scalar_quant;

pub use codebook::{
    build_product_codebook, optimal_bit_allocation, voronoi_project, ProductCodebook,
    QuantizerPath,
};
pub use error::{FqError, Result};
pub use experiment::{pathwise_convergence_experiment, rate_holder, rate_quadratic, Table};
pub use kl::{simulate_brownian, GridPath, KLBasis};
pub use qsde::{
    quantized_expectation, quantized_sde_ensemble, solve_elementary_ode, solve_reference_sde,
    Calculus, SdeSpec,
};
pub use roughpath::{delta_p, enhance_brownian, enhance_quantizer, p_variation, rho_q, EnhancedPath};
pub use scalar_quant::{optimal_scalar_quantizer, ScalarQuantizer};

/// Library version, recorded in CSV output comments.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
