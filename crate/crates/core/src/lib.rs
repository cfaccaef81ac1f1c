//! Generalized Collatz mappings on finite-rank lattices.
//!
//! A map `T(x) = (m_ω x + r_ω) / d` on `Z^e`, where `ω` is the residue class of
//! `x` modulo `d`, together with the geometry that certifies divergent
//! trajectories (separating hyperplanes, wild and tame cones) and the density
//! machinery for divergent points and points with finite stopping time.
//!
//! Everything is exact: lattice points and multipliers are arbitrary-precision
//! integers and all cone feasibility questions are decided over the rationals.
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod catalog;
pub mod density;
mod error;
pub mod feasibility;
pub mod geometry;
pub mod linalg;
pub mod mapcore;
pub mod trajectory;

pub use catalog::{
    build_section4_map, build_zsqrt2_map, section4_closed_form_bound, CatalogName,
    Section4Params,
};
pub use density::{
    ak_fraction, divergence_density_bound, empirical_divergence_fraction,
    empirical_stopping_fraction, exact_tame_lattice_density, lattice_points_in_ball,
    product_hypothesis, tame_measure_fraction, AkTable, DensityEstimate, EstimateKind,
    McConfig, ProductHypothesis,
};
pub use error::{Error, Result};
pub use geometry::{
    build_chambers, classify_wild, cone_contains, enumerate_separating_forms, is_directed,
    is_separating, min_nonzero_abs, Chamber, FinitelyGeneratedCone, IntegerForm, TameCone,
};
pub use mapcore::{
    is_relatively_prime_type, residue_of, shift_span_rank, strictly_positive_witness,
    validate_map, CollatzMap, LatticePoint, MapDescription, ResidueClass,
};
pub use trajectory::{
    closed_form_iterate, detect_cycle, guaranteed_stopping_radius, iterate, omega_map,
    residual_sequence, step, stopping_time, GuaranteedRadius, Norm, OmegaMap, StoppingResult,
    TrajectoryOutcome,
};
