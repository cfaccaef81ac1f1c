//! Exact cone geometry of a generalized Collatz map: integer linear forms,
//! separating hyperplanes, the cones `B_r^±` generated by `±S_r`, the chamber
//! decomposition of the separating arrangement and the wild/tame split.

mod chambers;
mod cone;
mod form;
mod tame;

pub(crate) use chambers::angle_cmp as chambers_angle_cmp;
pub use chambers::{angular_sectors, build_chambers, chambers_by_sign_vectors, classify_wild, Chamber, Sector, MAX_ARRANGEMENT_FORMS};
pub use cone::{cone_contains, cone_contains_rational, is_directed, ConeHRep, FinitelyGeneratedCone};
pub use form::{
    enumerate_separating_forms, is_separating, min_nonzero_abs, separating_forms_in_box,
    separating_search_box, IntegerForm,
};
pub use tame::TameCone;
