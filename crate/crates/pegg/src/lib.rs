//! Search library for exponential Diophantine equations `d a^x + e b^y = f c^z`
//! that convert to resultant equations `A^x + B^y = C^z`, maximizing the
//! quotient min(A,B,C)/gcd(A,B,C).
//!
//! The pipeline: `equations` models originals/resultants and the conversion
//! multiplier algebra; `powerfilter` does residue-based perfect power testing;
//! `residue_tables` precomputes the per-residue elimination and skip-ahead
//! structures that drive the inner loop; `search` runs the coefficient, c-base
//! and a-base range scans and the record ladder.

pub mod equations;
pub mod numtheory;
pub mod powerfilter;
pub mod residue_tables;
pub mod search;

pub use equations::{
    convert_to_resultant, generate_identity, pegg_report, reassociate_min, smallest_multiplier,
    validate_original, ExponentTriple, OriginalEquation, PeggReport, Permutation,
    ResultantEquation,
};
