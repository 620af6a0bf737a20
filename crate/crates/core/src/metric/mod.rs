//! Computable metric spaces over exact rationals: Cauchy names and their
//! validation, the metric limit map and jump, moduli of continuity, and
//! unique-zero finding.
//!
//! Everything here computes with exact `BigRational` arithmetic; certified
//! verdicts (ball inclusion, sign of a function value, modulus acceptance)
//! come from strict rational inequalities on interval enclosures, so a
//! positive answer is a proof and a boundary case stays undecided.

mod cms;
mod names;
mod ops;

pub use cms::{
    cantor_dist, cms_library, index_of_rational, rational_of_index, simplest_rational_in,
    sup_abs_enclosure, Cms, Point,
};
pub use names::{cauchy_decode, lim_x, Ball, CauchyName};
pub use ops::{
    check_modulus, formal_relations, jump_on_generics_metric, jump_x, jump_x_inverse,
    metric_limit_normal_form, modulus, naive_translators, reconstruct_from_modulus,
    shifted_identity, uniform_modulus, unique_zero, CeOpen, Modulus, ModulusCheck, Relation,
};
