//! Discrete exterior calculus on compact Cauchy surfaces.
//!
//! The crate builds, at desk scale, the full pipeline for Maxwell theory on
//! an ultrastatic background: simplicial surfaces with circumcentric metric
//! data ([`mesh`]), discrete forms and the Sobolev calculus ([`cochain`]),
//! Hodge Laplacians with exact spectral functional calculus ([`hodge`]),
//! Maxwell Cauchy data with constraint operators and radiation-gauge fixing
//! ([`maxwell`]), exact spectral wave evolution with Green operators
//! ([`evolution`]), and the frequency-split projectors whose pseudo-
//! covariances define a quasifree state on the constraint quotient
//! ([`hadamard`]).
//!
//! Everything is dense, deterministic and tolerance-checked: meshes are small
//! enough that complete eigendecompositions replace iterative solvers, which
//! turns the continuum statements into finite-dimensional identities that
//! hold to rounding.

pub mod cochain;
pub mod error;
pub mod evolution;
pub mod hadamard;
pub mod hodge;
pub mod io;
pub mod linalg;
pub mod maxwell;
pub mod mesh;
pub mod sampling;

pub use cochain::{inner_sobolev, mollify, norm_sobolev, Cochain};
pub use error::{Error, Result};
pub use evolution::{
    causal_propagator, energy, energy_maxwell, evolve, evolve_maxwell, green, maxwell_residual,
    EnergyEntry, EnergyRecord, GreenKind, TimeSeries,
};
pub use hadamard::{
    build_c_pm, build_pi_pm, build_sqrt, two_point_function, verify_state, CheckRow,
    HadamardSuite, SqrtOperator, TwoPoint, VerificationReport,
};
pub use hodge::{
    assemble_laplacian, coulomb_projector, hodge_decompose, solve_poisson, spectral_fn,
    HodgeSplit, SpectralCache, SpectralCacheSet, SpectralFn,
};
pub use maxwell::{
    check_constraints, gauge_fix, inner_v1, k_sigma, k_sigma_dagger, norm_v0, norm_v1, q0_sigma,
    q1_sigma, r_sigma, t_sigma, ConstraintReport, GaugeData, MaxwellData, CONSTRAINT_TOL,
};
pub use mesh::{ComplexId, SimplicialComplex, ValidationCheck, ValidationReport};
