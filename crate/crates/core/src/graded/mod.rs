//! Finite graded complexes: differentials, codifferentials, characteristic
//! operators, splittings, restricted superdeterminants and inner variations.

pub mod checks;
pub mod duhamel;
pub mod io;
pub mod map;
pub mod random;
pub mod splitting;
pub mod variation;

pub use checks::{acyclicity_check, check_codifferential, AcyclicityReport, CodifferentialDiagnostic, PairingForm, PairingKind};
pub use duhamel::{duhamel_derivative, heat_semigroup, heat_semigroup_central_difference, OperatorFamily};
pub use map::{commutator, graded_commutator, GradedMap, GradedVectorSpace};
pub use splitting::{restricted_supertrace, sdet_restricted, split_complement, supertrace_pair, SdetValue, Splitting};
pub use variation::{constancy_report, inner_variation_path, ConjugatorPath, InnerVariation};
