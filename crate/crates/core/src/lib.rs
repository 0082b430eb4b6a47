//! Parameter-level local theta correspondence for regular supercuspidal
//! representations of `Sp(W)` and `O(V)` in the equal-rank case.
//!
//! Arithmetic in the towers `L/L°/F` is exact: finite fields in
//! [`finitefield`], leading terms and truncated `p`-adic elements in
//! [`localfield`]. The finite-field Weil-representation oracle in
//! [`finitetheta`] is generic over the float scalar; the aliases below fix
//! it to `f64`.

pub mod finitefield;
pub mod finitetheta;
pub mod localfield;
pub mod quadform;
pub mod sample;
pub mod theta;
pub mod torusdata;

/// Weil representation of `SL_2(q) × O_2^±(q)` with `f64` entries.
pub type WeilRep = finitetheta::RepMatrixSet<f64>;
/// Class function with `f64` complex values.
pub type ClassFunction = finitetheta::ClassFunction<f64>;
/// Complex scalar used by the finite oracle.
pub type Complex = num_complex::Complex<f64>;
