//! Numerical analysis of Bessel operators `−d²/dx² + (α − ¼)/x²` on the
//! half-line with complex coupling `α = m²`.
//!
//! The crate builds the Green's operators and their `x^{−2}`-weighted
//! companions on log-uniform grids, estimates their norms, extracts boundary
//! coefficients at the origin, and checks the factorization and holomorphy
//! identities numerically.

pub mod config;
pub mod critical;
pub mod domain;
pub mod error;
pub mod forms;
pub mod grid;
pub mod holo;
pub mod kernels;
pub mod norm;
pub mod param;
pub mod quad;
pub mod stencil;
pub mod suite;

pub use error::{Error, Result};
pub use grid::{
    apply_bessel, dilation_transform, inverse_dilation, make_log_grid, CutoffSpec, GridFunction,
    GridProvenance, LineFunction, RadialGrid,
};
pub use param::{parse_complex, rpow, CouplingParameter};
pub use kernels::{
    apply_green, discretize, green_residual, kernel_eval, DiscretizedOperator, KernelKind,
    KernelSpec,
};
pub use norm::{
    multiplier_sup, norm_report, operator_norm_svd, parabola_distance, region_classify,
    NormEstimate, NormKind, NormMethod, NormReport, Region, RegionClass,
};
pub use domain::{
    boundary_coefficients, domain_decompose, h20_membership, BoundaryCoefficients, DomainClass,
    DomainReport, InequalityKind, InequalityRecord,
};
pub use critical::{
    divergence_profile, ellr1_residual, g_tau, g_tau_norm_sq, independence_gram, window_drift,
    DivergenceDiagnostic, TauFunction,
};
pub use forms::{
    apply_first_order, bilinear_pairing, factorization_check, positivity_check,
    two_factorizations_agree, Bump, FactorSign, FirstOrderSpec, FormResult, Realization,
};
pub use holo::{
    conjugation_symmetry, family_analyticity, kato_rellich_check, relative_bound, AnalyticityReport,
    KatoRellichReport, MatrixFamily,
};
pub use config::{OutputFormat, RunConfig};
pub use suite::{report_json, run_suite, run_suite_timed, CriterionResult, SuiteReport};
