//! Heat-kernel parametrix for `D = -∂²_x + v(x)` on the circle: symbol
//! recursion, residue kernels, remainders, Volterra corrections and heat
//! coefficients.

mod analysis;
mod fourier;
mod kernel;
mod symbol;
mod volterra;

pub use fourier::{Fourier, Potential, MAX_DEGREE, QC};
pub use kernel::{
    apply_d_numeric, heat_coefficients, ApproximateHeatKernel, DiffOperator, HeatCoefficient, SpectralHeatOracle,
    SymbolKernel,
};
pub use symbol::{parametrix_symbols, LaurentSymbol, ParametrixSymbols, MAX_DEPTH};
pub use analysis::{circle_grid, diagonal_remainder_scaling, fit_power_law, log_spaced, parametrix_accuracy, remainder_scaling, AccuracyFit, PowerFit};
pub use volterra::{volterra_correct, VolterraSettings, VolterraValue, MAX_VOLTERRA_ORDER};
