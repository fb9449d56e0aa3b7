//! Gray-Scott reaction-diffusion on a periodic lattice, in two variants:
//! fully local diffusion (isotropic 9-point Laplacian for both species) and
//! mixed diffusion, where `u` spreads through a normalized Gaussian
//! convolution `Γu = φ * u - u` evaluated spectrally.
//!
//! Every run is audited against the analytic estimates of the model:
//! componentwise nonnegativity, `‖u‖∞ ≤ max(‖u₀‖∞, 1)` for the mixed model,
//! the total-mass bound `∫(u + v) ≤ max(|Ω| / min(κ, 1), ∫(u₀ + v₀))`, and
//! exact discrete conservation of both diffusion operators.

pub mod cli;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod io;
pub mod kernel;
pub mod kinetics;
pub mod monitors;
pub mod operators;

pub use error::{Error, Result};
pub use grid::{Field, LatticeSpec};
pub use integrator::{
    run, seed, stability_check, step_local, step_mixed, RunObserver, RunOutcome, RunStatus, SeedMode, SeedSpec,
    SimState, StabilityReport, Variant,
};
pub use io::config::{parse_config, SimConfig};
pub use kernel::{build_gaussian_kernel, kernel_mass_bound, DiscreteKernel, KernelSpec};
pub use kinetics::{g1, g2, homogeneous_reference, ModelParams};
pub use monitors::{audit, compute_bounds, Bounds, InvariantReport, Violation};
pub use operators::{gamma_symbol_range, laplacian9, laplacian9_symbol_range, nonlocal_gamma, StencilSymbol};
