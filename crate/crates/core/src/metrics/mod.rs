//! Similarity functions: Tanimoto over bit fingerprints and affine-gap
//! global alignment with a log-length normalization.

mod alignment;
mod matrix;
mod tanimoto;

pub use alignment::{align_global, g_sim, normalized_similarity, AlignmentParams, LogBase};
pub use matrix::{SubstitutionMatrix, BLOSUM62_SHA256, BLOSUM62_TEXT};
pub use tanimoto::{tanimoto, Fingerprint, DEFAULT_FINGERPRINT_WIDTH};
