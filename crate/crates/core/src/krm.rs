//! The key reconciliation scheme: key generation, encapsulation with
//! rejection sampling, decapsulation, shipped parameter sets, and wire
//! formats.
//!
//! Both parties quantize correlated M-LWE samples instead of encrypting a
//! chosen message: encapsulation publishes a compressed sample `u` plus a
//! reconciliation hint `v`, and the shared secret is the decision-lattice
//! coset of the sample. All randomness is derived from an explicit 32-byte
//! seed, so every operation is a pure function.

use std::sync::Arc;

use thiserror::Error;

use crate::lattice::tower::{help_rec, rec, CosetIndexV, MessageBits, QuantizerConfig};
use crate::lattice::{IntegerLattice, LatticeError};
use crate::ring::{
    self, cbd_sample, compress_poly, decompress_poly, expand_matrix, mat_vec_mul, pack_bits,
    pack_poly, unpack_bits, unpack_poly, vec_dot, RingElement, RingError, RingParams, RingVector,
    Seed, N,
};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("rejection sampling exceeded {0} iterations")]
    RejectionOverflow(u32),
    #[error("byte string has length {got}, expected {want}")]
    LengthMismatch { want: usize, got: usize },
    #[error("malformed ciphertext: {0}")]
    MalformedCiphertext(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Upper bound on rejection-sampling iterations. The per-iteration rejection
/// probability is about 0.074 at the shipped q = 3329 sets, so the cap is
/// unreachable in practice while still bounding the loop.
pub const REJECTION_CAP: u32 = 256;

/// A complete parameter set: ring, tower, and the compression width for u.
#[derive(Debug, Clone)]
pub struct SchemeParams {
    pub name: &'static str,
    pub ring: RingParams,
    pub cfg: QuantizerConfig,
    /// shortened-secret variant: quantize only the tower prefix and truncate
    /// the shared secret to 256 bits
    pub shortened: bool,
}

impl SchemeParams {
    pub fn new(
        name: &'static str,
        ring: RingParams,
        p: u32,
        shape: &[(Arc<IntegerLattice>, usize)],
        shortened: bool,
    ) -> Result<Self, SchemeError> {
        let cfg = QuantizerConfig::new(ring.q, p, shape)?;
        if !shortened {
            assert_eq!(cfg.quantized_coeffs, N, "standard sets cover all coefficients");
        }
        Ok(SchemeParams { name, ring, cfg, shortened })
    }

    /// Shared-secret length in bits.
    pub fn secret_bits(&self) -> usize {
        if self.shortened {
            256
        } else {
            self.cfg.message_bit_count()
        }
    }

    /// True when q = qhat and the rejection loop is disabled.
    pub fn rejection_free(&self) -> bool {
        self.cfg.qhat == self.ring.q
    }

    pub fn public_key_bytes(&self) -> usize {
        self.ring.k * N * ring::COEFF_BITS / 8 + 32
    }

    pub fn secret_key_bytes(&self) -> usize {
        self.ring.k * N * ring::COEFF_BITS / 8
    }

    pub fn ciphertext_bytes(&self) -> usize {
        (self.ring.k * N * self.ring.d_u as usize + self.cfg.hint_bits()).div_ceil(8)
    }

    pub fn shared_secret_bytes(&self) -> usize {
        self.secret_bits().div_ceil(8)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub t: RingVector,
    pub rho: Seed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    pub s: RingVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    /// compressed coefficients of u, k*256 values of d_u bits
    pub u: Vec<u32>,
    /// reconciliation hint
    pub v: CosetIndexV,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedSecret {
    pub m: MessageBits,
}

/// Deterministic key generation: rho and sigma are expanded from the coins,
/// A from rho, and (s, e) from sigma via the binomial sampler.
pub fn keygen(params: &SchemeParams, coins: &Seed) -> (PublicKey, SecretKey) {
    let transcript = keygen_transcript(params, coins);
    (transcript.pk, transcript.sk)
}

/// Full key-generation transcript; the noise vector is exposed for the
/// decoding-noise instrumentation in the analysis module.
pub struct KeygenTranscript {
    pub pk: PublicKey,
    pub sk: SecretKey,
    pub e: RingVector,
}

pub fn keygen_transcript(params: &SchemeParams, coins: &Seed) -> KeygenTranscript {
    let rp = &params.ring;
    let expanded: [u8; 64] = ring::xof::shake256_bytes(&coins.0, b"kg");
    let rho = Seed(expanded[..32].try_into().unwrap());
    let sigma = Seed(expanded[32..].try_into().unwrap());

    let a = expand_matrix(&rho, rp);
    let k = rp.k;
    let mut s = RingVector::zero(k);
    let mut e = RingVector::zero(k);
    for i in 0..k {
        s.elems[i] = cbd_sample(&sigma, i as u8, rp.eta1, rp.q);
        e.elems[i] = cbd_sample(&sigma, (k + i) as u8, rp.eta1, rp.q);
    }
    let t = mat_vec_mul(&a, &s, rp.q, false).add(&e, rp.q);
    KeygenTranscript {
        pk: PublicKey { t, rho },
        sk: SecretKey { s },
        e,
    }
}

/// Encapsulation transcript, exposed for noise instrumentation.
pub struct EncapsTranscript {
    pub ct: Ciphertext,
    pub ss: SharedSecret,
    pub r: RingVector,
    pub e1: RingVector,
    pub e2: RingElement,
    /// the reconciled sample t^T r + e2, canonical coefficients
    pub x: RingElement,
    /// rejection iterations consumed (0 = first sample accepted)
    pub rejections: u32,
}

/// Encapsulation: samples (r, e1, e2), rejects until the reconciled sample
/// lies in R_qhat, then compresses u and derives the hint and secret.
pub fn encaps(params: &SchemeParams, pk: &PublicKey, coins: &Seed) -> Result<(Ciphertext, SharedSecret), SchemeError> {
    encaps_transcript(params, pk, coins).map(|t| (t.ct, t.ss))
}

pub fn encaps_transcript(
    params: &SchemeParams,
    pk: &PublicKey,
    coins: &Seed,
) -> Result<EncapsTranscript, SchemeError> {
    let rp = &params.ring;
    let k = rp.k;
    let a = expand_matrix(&pk.rho, rp);
    let qhat = params.cfg.qhat;

    let mut iteration = 0u32;
    let (r, e1, e2, x) = loop {
        if iteration >= REJECTION_CAP {
            return Err(SchemeError::RejectionOverflow(REJECTION_CAP));
        }
        // fresh counter-extended seed per iteration keeps the loop
        // deterministic while resampling everything
        let noise_seed = Seed(ring::xof::shake256_bytes(&coins.0, &[b'e', iteration as u8]));
        let mut r = RingVector::zero(k);
        let mut e1 = RingVector::zero(k);
        for i in 0..k {
            r.elems[i] = cbd_sample(&noise_seed, i as u8, rp.eta1, rp.q);
            e1.elems[i] = cbd_sample(&noise_seed, (k + i) as u8, rp.eta2, rp.q);
        }
        let e2 = cbd_sample(&noise_seed, 2 * k as u8, rp.eta2, rp.q);
        let x = vec_dot(&pk.t, &r, rp.q).add(&e2, rp.q);
        // rejection test reads canonical representatives
        let accept = params.rejection_free() || x.coeffs.iter().all(|&c| c <= qhat - 1);
        if accept {
            break (r, e1, e2, x);
        }
        iteration += 1;
    };

    let u_full = mat_vec_mul(&a, &r, rp.q, true).add(&e1, rp.q);
    let u: Vec<u32> = u_full
        .elems
        .iter()
        .flat_map(|e| compress_poly(e, rp.d_u, rp.q).coeffs)
        .collect();

    let v = help_rec(&x.coeffs, &params.cfg);
    let m = rec(&x.coeffs, &v, &params.cfg)?;
    let m = if params.shortened { m.truncate(256) } else { m };

    Ok(EncapsTranscript {
        ct: Ciphertext { u, v },
        ss: SharedSecret { m },
        r,
        e1,
        e2,
        x,
        rejections: iteration,
    })
}

/// Decompresses the u half of a ciphertext back into a ring vector.
pub fn decompressed_u(params: &SchemeParams, ct: &Ciphertext) -> RingVector {
    let rp = &params.ring;
    let k = rp.k;
    let mut u_prime = RingVector::zero(k);
    for i in 0..k {
        let mut e = RingElement::zero();
        e.coeffs.copy_from_slice(&ct.u[i * N..(i + 1) * N]);
        u_prime.elems[i] = decompress_poly(&e, rp.d_u, rp.q);
    }
    u_prime
}

/// Decapsulation: decompress u, recompute the correlated sample s^T u', and
/// reconcile against the transmitted hint.
pub fn decaps(params: &SchemeParams, sk: &SecretKey, ct: &Ciphertext) -> Result<SharedSecret, SchemeError> {
    let rp = &params.ring;
    let k = rp.k;
    if ct.u.len() != k * N {
        return Err(SchemeError::MalformedCiphertext(format!(
            "u has {} coefficients, expected {}",
            ct.u.len(),
            k * N
        )));
    }
    let u_prime = decompressed_u(params, ct);
    let x = vec_dot(&sk.s, &u_prime, rp.q);
    let m = rec(&x.coeffs, &ct.v, &params.cfg)?;
    let m = if params.shortened { m.truncate(256) } else { m };
    Ok(SharedSecret { m })
}

// ---------------------------------------------------------------------------
// wire formats
// ---------------------------------------------------------------------------

impl PublicKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for e in &self.t.elems {
            out.extend_from_slice(&pack_poly(e));
        }
        out.extend_from_slice(&self.rho.0);
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &SchemeParams) -> Result<Self, SchemeError> {
        let want = params.public_key_bytes();
        if bytes.len() != want {
            return Err(SchemeError::LengthMismatch { want, got: bytes.len() });
        }
        let poly_len = N * ring::COEFF_BITS / 8;
        let mut t = RingVector::zero(params.ring.k);
        for i in 0..params.ring.k {
            t.elems[i] = unpack_poly(&bytes[i * poly_len..(i + 1) * poly_len], params.ring.q)?;
        }
        let rho = Seed::from_slice(&bytes[params.ring.k * poly_len..])?;
        Ok(PublicKey { t, rho })
    }
}

impl SecretKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        self.s.elems.iter().flat_map(|e| pack_poly(e)).collect()
    }

    pub fn from_bytes(bytes: &[u8], params: &SchemeParams) -> Result<Self, SchemeError> {
        let want = params.secret_key_bytes();
        if bytes.len() != want {
            return Err(SchemeError::LengthMismatch { want, got: bytes.len() });
        }
        let poly_len = N * ring::COEFF_BITS / 8;
        let mut s = RingVector::zero(params.ring.k);
        for i in 0..params.ring.k {
            s.elems[i] = unpack_poly(&bytes[i * poly_len..(i + 1) * poly_len], params.ring.q)?;
        }
        Ok(SecretKey { s })
    }
}

impl Ciphertext {
    pub fn to_bytes(&self, params: &SchemeParams) -> Vec<u8> {
        let mut out = pack_bits(&self.u, params.ring.d_u as usize);
        out.extend_from_slice(&self.v.to_bytes(&params.cfg));
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &SchemeParams) -> Result<Self, SchemeError> {
        let want = params.ciphertext_bytes();
        if bytes.len() != want {
            return Err(SchemeError::MalformedCiphertext(format!(
                "length {} != {}",
                bytes.len(),
                want
            )));
        }
        let u_bytes = params.ring.k * N * params.ring.d_u as usize / 8;
        let u = unpack_bits(&bytes[..u_bytes], params.ring.k * N, params.ring.d_u as usize)?;
        if u.iter().any(|&c| c >= (1 << params.ring.d_u)) {
            return Err(SchemeError::MalformedCiphertext("u coefficient out of range".into()));
        }
        let v = CosetIndexV::from_bytes(&bytes[u_bytes..], &params.cfg)?;
        Ok(Ciphertext { u, v })
    }
}

impl SharedSecret {
    pub fn to_bytes(&self) -> Vec<u8> {
        self.m.bits.clone()
    }

    pub fn from_bytes(bytes: &[u8], params: &SchemeParams) -> Result<Self, SchemeError> {
        let bit_len = params.secret_bits();
        let want = bit_len.div_ceil(8);
        if bytes.len() != want {
            return Err(SchemeError::LengthMismatch { want, got: bytes.len() });
        }
        for tail in bit_len..bytes.len() * 8 {
            if (bytes[tail / 8] >> (tail % 8)) & 1 == 1 {
                return Err(SchemeError::MalformedCiphertext("nonzero padding".into()));
            }
        }
        Ok(SharedSecret {
            m: MessageBits { bits: bytes.to_vec(), bit_len },
        })
    }
}

// ---------------------------------------------------------------------------
// shipped parameter sets
// ---------------------------------------------------------------------------

/// Names of every shipped reconciliation parameter set.
pub const PARAMETER_SETS: [&str; 5] = [
    "krm-e8-q2048",
    "krm-e8",
    "krm-bw16",
    "krm-leech24",
    "krm-bw16-short",
];

/// Builds a shipped parameter set by name.
pub fn by_name(name: &str) -> Option<SchemeParams> {
    let set = match name {
        // the even-modulus legacy set: d_u = log2(q) transmits u uncompressed
        "krm-e8-q2048" => SchemeParams::new(
            "krm-e8-q2048",
            RingParams::new(2048, 3, 2, 2, 11),
            5,
            &[(IntegerLattice::e8(), 32)],
            false,
        ),
        "krm-e8" => SchemeParams::new(
            "krm-e8",
            RingParams::new(3329, 3, 2, 2, 9),
            5,
            &[(IntegerLattice::e8(), 32)],
            false,
        ),
        "krm-bw16" => SchemeParams::new(
            "krm-bw16",
            RingParams::new(3329, 3, 2, 2, 10),
            5,
            &[(IntegerLattice::bw16(), 16)],
            false,
        ),
        // 256 = 10*24 + 16: ten Leech blocks plus one BW16 block
        "krm-leech24" => SchemeParams::new(
            "krm-leech24",
            RingParams::new(3329, 3, 2, 2, 10),
            5,
            &[(IntegerLattice::leech24(), 10), (IntegerLattice::bw16(), 1)],
            false,
        ),
        // shortened: kappa = ceil(256*16/320) = 13 BW16 blocks, secret
        // truncated to 256 bits
        "krm-bw16-short" => SchemeParams::new(
            "krm-bw16-short",
            RingParams::new(3329, 3, 2, 2, 10),
            5,
            &[(IntegerLattice::bw16(), 13)],
            true,
        ),
        _ => return None,
    };
    Some(set.expect("shipped parameter sets construct cleanly"))
}
