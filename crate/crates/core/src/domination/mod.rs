//! Extension domination, amalgam deciphering and the constructions around them.

mod extension;
mod preserve;
mod spaces;
mod witness;

pub use extension::{
    common_extension_check, common_extension_system, extend_with_value, extension_range, hull_condition,
    subset_scan, value_system, CommonExtension, EXTENDED_LEVEL,
};
pub use preserve::{
    convex_decipher_witness, invariant_extension, is_finitely_satisfiable, is_smooth_over, restriction_system,
    separating_set,
};
pub use spaces::{
    amalgam_space, deciphers, dominates, extension_space, point_charge, squeeze_check, AtomRange,
    DominationVerdict, SqueezeReport, SqueezeRow, REASON_EMPTY, REASON_MISMATCH,
};
pub use witness::{
    block_dirac, compose_witness, graph_set, lift_witness, search_witness, type_dominates, Candidate,
    Composition, Triple,
};
