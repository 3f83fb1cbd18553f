//! Module-LWE key reconciliation over nested lattice quantizers.
//!
//! The crate is organized around five subsystems:
//!
//! * [`ring`] — arithmetic in `Z_q[X]/(X^256+1)`, deterministic expansion and
//!   noise sampling, and the 1-dimensional compression quantizer.
//! * [`lattice`] — integer lattices with exact Smith/Hermite normal forms,
//!   exact closest-vector decoding (enumeration plus fixed-complexity coset
//!   decoders for E8, BW16 and Leech24), and the nested quantizer tower with
//!   its hint and message codecs.
//! * [`krm`] — the reconciliation scheme itself: key generation,
//!   encapsulation with rejection sampling, decapsulation, the shipped
//!   parameter sets and their wire formats.
//! * [`kyber`] — a compact Kyber.CPA baseline used for expansion-rate
//!   comparison and shared test infrastructure.
//! * [`analysis`] — the closed-form decryption-failure bound evaluated in
//!   arbitrary precision, the decoding-noise model, ciphertext expansion
//!   rates, and Monte Carlo validation.

pub mod analysis;
pub mod krm;
pub mod kyber;
pub mod lattice;
pub mod ring;
