//! Idempotent (max-plus) linear algebra on finite ground sets.
//!
//! The crate models b-complete semimodules over completed idempotent
//! semirings: spans and wedges of generators, integral-kernel
//! representations of b-linear operators, semimetrics with their star
//! closures and Lipschitz function spaces, nuclear decompositions, and the
//! δ-functional embedding that identifies a module with functions on its
//! own index set.  Everything is exact: scalars are max-plus reals (or
//! integers, or booleans) with `-inf` as zero and `+inf` as top, and every
//! check in the library compares for equality rather than up to
//! tolerance.
//!
//! The usual entry points are [`SemimoduleSpec`] for building modules,
//! [`max_kernel`] for canonical kernels, [`star_closure`] and
//! [`lipschitz_space`] for semimetrics, the `check_theorem_*` drivers in
//! [`nuclearity`], and [`instances::build_instance`] for the named
//! catalogue.

pub mod error;
pub mod exec;
pub mod instances;
pub mod io;
pub mod nuclearity;
pub mod operator;
pub mod sampling;
pub mod semimetric;
pub mod semimodule;
pub mod semiring;

pub use error::{Error, Result};
pub use instances::{build_instance, concave_oplus, parse_instance_name, BuiltInstance, ConcaveGrid, InstanceName};
pub use nuclearity::{
    canonical_delta_family, check_theorem_1, check_theorem_2, check_theorem_3, check_theorem_3a,
    check_theorem_4_semimetric, check_theorem_4_span, check_theorem_5, delta_functional_check,
    delta_value, functional_kernel, i_delta_embed, nuclear_decompose_identity, probe_kernel_bound,
    CheckLine, DeltaEmbedding, DeltaFamily, DeltaPair, Functional, FunctionalKernel,
    IdentityDecomposition, LinearityWitness, NuclearDecomposition, RankOneOperator, TheoremReport,
};
pub use operator::{
    is_integral, max_kernel, sup_operators, KernelMatrix, KernelWitness, LinearOperator, MaxKernel,
};
pub use sampling::ProbeConfig;
pub use semimetric::{
    lipschitz_space, lower_ideal_check, random_reflexive_semimetric, reflexive_lip_coincidence,
    satisfies_lipschitz_bound, star_closure, star_closure_serial, validate_semimetric,
    LowerIdealWitness, Semimetric,
};
pub use semimodule::{Closure, GroundSet, Membership, SemimoduleSpec, TropVector};
pub use semiring::{Scalar, SemiringKind};
