//! Closed-orbit calculus for suspensions of hyperbolic toral automorphisms
//! and of subshifts of finite type: orbit catalogs, Guillemin trace combs,
//! truncated Euler products and their continuations.

mod catalog;
mod zeta;

pub use catalog::{
    cat_map_catalog, mobius, subshift_catalog, CatMap, ClosedOrbit, Generator, OrbitCatalog, PoincareData, Subshift,
};
pub use zeta::{
    f_k_dirichlet, f_k_s_derivative, guillemin_comb, orbit_log_sdet, ruelle_zeta_truncated, sdet_zeta_ratio,
    transfer_matrix, zeta_closed_form_cat, zeta_transfer_determinant, zeta_transfer_determinant_with,
    RoofConvention, Truncated, TruncatedZeta,
};

/// Truncated orbit sums require `Re λ > L + ABSCISSA_MARGIN` where `L` is the
/// orbit growth rate.
pub const ABSCISSA_MARGIN: f64 = 0.3;
