//! Disjunctive hierarchical secret sharing over `F_p[x]` via the polynomial
//! Chinese remainder theorem.
//!
//! Participants are split into levels of decreasing trust. A coalition is
//! authorized when, for some level `ℓ`, it holds at least `t_ℓ` members
//! among levels `1..=ℓ`. [`Scheme`] deals and reconstructs; [`yang`] holds
//! an earlier two-level construction together with an attack on it; and
//! [`oracle`] checks secrecy claims by exhaustive enumeration on tiny fields.

pub mod dhss;
pub mod field;
pub mod hashing;
pub mod moduli;
pub mod oracle;
pub mod params;
pub mod poly;
pub mod yang;

pub use dhss::{bulletin_index_set, Bulletin, Scheme, SchemeError, Secret, Share};
pub use field::{is_prime, FieldElement, FieldError, PrimeField};
pub use hashing::{HashBackend, HashError, HashFamily};
pub use moduli::{count_monic_irreducibles, generate_moduli, is_irreducible};
pub use oracle::{CoalitionView, EnumerationBudget, OracleError, ViewMode};
pub use params::{
    validate_params, AccessStructure, ParamsError, PublicParams, ValidationReport, Violation,
};
pub use poly::{crt_combine, gcd, inverse_mod, is_pairwise_coprime, xgcd, Poly, PolyError, Xgcd};
pub use yang::{yang_deal, AttackTranscript, YangError, YangPublic};
