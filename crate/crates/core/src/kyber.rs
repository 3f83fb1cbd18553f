//! Kyber.CPA baseline: the comparison scheme that encrypts a chosen 256-bit
//! message with 1-dimensional compression quantizers.
//!
//! Key generation is shared bit-for-bit with the reconciliation scheme; only
//! encryption differs (the message is added to the M-LWE sample and both
//! ciphertext halves go through Compress).

use thiserror::Error;

use crate::krm::{PublicKey, SchemeParams, SecretKey};
use crate::ring::{
    self, cbd_sample, compress, compress_poly, decompress_poly, expand_matrix, mat_vec_mul,
    pack_bits, round_ties_up, unpack_bits, vec_dot, RingElement, RingParams, RingVector, Seed, N,
};

#[derive(Debug, Error)]
pub enum KyberError {
    #[error("malformed ciphertext: {0}")]
    MalformedCiphertext(String),
    #[error("message must be exactly 256 bits")]
    BadMessageLength,
}

/// KYBER768 parameters; d_v is the compression width of the second half.
#[derive(Debug, Clone)]
pub struct KyberParams {
    pub ring: RingParams,
    pub d_v: u32,
}

impl KyberParams {
    pub fn kyber768() -> Self {
        KyberParams { ring: RingParams::new(3329, 3, 2, 2, 10), d_v: 4 }
    }

    pub fn ciphertext_bytes(&self) -> usize {
        (self.ring.k * N * self.ring.d_u as usize + N * self.d_v as usize) / 8
    }

    /// Ciphertext expansion rate: ciphertext bits over the 256 message bits.
    pub fn cer_num_den(&self) -> (usize, usize) {
        (self.ring.k * N * self.ring.d_u as usize + N * self.d_v as usize, N)
    }

    /// Ring params packaged for the shared keygen path.
    fn scheme_view(&self) -> SchemeParams {
        // keygen only touches the ring half; reuse the E8 tower as a dummy
        // carrier (never consulted by keygen)
        crate::krm::by_name("krm-bw16")
            .map(|mut p| {
                p.ring = self.ring;
                p
            })
            .unwrap()
    }
}

/// A 256-bit message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message256(pub [u8; 32]);

impl Message256 {
    pub fn bit(&self, i: usize) -> u32 {
        ((self.0[i / 8] >> (i % 8)) & 1) as u32
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KyberCiphertext {
    pub u: Vec<u32>,
    pub v: Vec<u32>,
}

/// Identical to the reconciliation scheme's key generation: same coins give
/// byte-identical keys.
pub fn kyber_keygen(params: &KyberParams, coins: &Seed) -> (PublicKey, SecretKey) {
    crate::krm::keygen(&params.scheme_view(), coins)
}

/// Enc: u = Compress(A^T r + e1, d_u), v = Compress(t^T r + e2 + round(q/2) m, d_v).
pub fn kyber_enc(
    params: &KyberParams,
    pk: &PublicKey,
    m: &Message256,
    coins: &Seed,
) -> KyberCiphertext {
    let rp = &params.ring;
    let k = rp.k;
    let a = expand_matrix(&pk.rho, rp);
    let noise_seed = Seed(ring::xof::shake256_bytes(&coins.0, &[b'e', 0]));
    let mut r = RingVector::zero(k);
    let mut e1 = RingVector::zero(k);
    for i in 0..k {
        r.elems[i] = cbd_sample(&noise_seed, i as u8, rp.eta1, rp.q);
        e1.elems[i] = cbd_sample(&noise_seed, (k + i) as u8, rp.eta2, rp.q);
    }
    let e2 = cbd_sample(&noise_seed, 2 * k as u8, rp.eta2, rp.q);

    let u_full = mat_vec_mul(&a, &r, rp.q, true).add(&e1, rp.q);
    let u: Vec<u32> = u_full
        .elems
        .iter()
        .flat_map(|e| compress_poly(e, rp.d_u, rp.q).coeffs)
        .collect();

    let half_q = round_ties_up(rp.q as i64, 2) as u32;
    let mut shifted = vec_dot(&pk.t, &r, rp.q).add(&e2, rp.q);
    for (i, c) in shifted.coeffs.iter_mut().enumerate() {
        *c = (*c + half_q * m.bit(i)) % rp.q;
    }
    let v = compress_poly(&shifted, params.d_v, rp.q).coeffs.to_vec();

    KyberCiphertext { u, v }
}

/// Dec: m = Compress(v' - s^T u', 1).
pub fn kyber_dec(
    params: &KyberParams,
    sk: &SecretKey,
    ct: &KyberCiphertext,
) -> Result<Message256, KyberError> {
    let rp = &params.ring;
    let k = rp.k;
    if ct.u.len() != k * N || ct.v.len() != N {
        return Err(KyberError::MalformedCiphertext(format!(
            "u/v have {}/{} coefficients",
            ct.u.len(),
            ct.v.len()
        )));
    }
    let mut u_prime = RingVector::zero(k);
    for i in 0..k {
        let mut e = RingElement::zero();
        e.coeffs.copy_from_slice(&ct.u[i * N..(i + 1) * N]);
        u_prime.elems[i] = decompress_poly(&e, rp.d_u, rp.q);
    }
    let mut v_prime = RingElement::zero();
    v_prime.coeffs.copy_from_slice(&ct.v);
    let v_prime = decompress_poly(&v_prime, params.d_v, rp.q);

    let noisy = v_prime.sub(&vec_dot(&sk.s, &u_prime, rp.q), rp.q);
    let mut out = [0u8; 32];
    for (i, &c) in noisy.coeffs.iter().enumerate() {
        if compress(c, 1, rp.q) == 1 {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    Ok(Message256(out))
}

impl KyberCiphertext {
    pub fn to_bytes(&self, params: &KyberParams) -> Vec<u8> {
        let mut out = pack_bits(&self.u, params.ring.d_u as usize);
        out.extend_from_slice(&pack_bits(&self.v, params.d_v as usize));
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &KyberParams) -> Result<Self, KyberError> {
        let want = params.ciphertext_bytes();
        if bytes.len() != want {
            return Err(KyberError::MalformedCiphertext(format!(
                "length {} != {want}",
                bytes.len()
            )));
        }
        let u_bytes = params.ring.k * N * params.ring.d_u as usize / 8;
        let u = unpack_bits(&bytes[..u_bytes], params.ring.k * N, params.ring.d_u as usize)
            .map_err(|e| KyberError::MalformedCiphertext(e.to_string()))?;
        let v = unpack_bits(&bytes[u_bytes..], N, params.d_v as usize)
            .map_err(|e| KyberError::MalformedCiphertext(e.to_string()))?;
        Ok(KyberCiphertext { u, v })
    }
}
