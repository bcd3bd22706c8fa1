//! Spectral zeta functions of graded operators and the Mellin route to
//! super determinants.

mod mellin;
mod spectrum;

pub use mellin::{
    circle_torsion, f_closed_form, f_cutoff, f_mellin, log_sdet_numeric, log_sdet_via_zeta, CutoffProfile,
    CutoffSequence, MellinSettings, MellinValue,
};
pub use spectrum::{degree_coefficient, DegreeJson, DegreeSpectrum, SpectrumByDegree, SpectrumJson, Tail};
