//! Arithmetic in R_q = Z_q[X]/(X^256+1), deterministic sampling, and the
//! 1-dimensional compression quantizer.
//!
//! Coefficients are kept canonical in [0, q) at rest; the centered
//! representative exists only as a view for noise measurement. Every sampler
//! is a pure function of (seed, nonce, params).

pub mod ntt;
pub mod xof;

use sha3::digest::XofReader;
use thiserror::Error;

/// Ring degree, fixed for every shipped parameter set.
pub const N: usize = 256;

/// Bits used to pack one uncompressed coefficient (sufficient for q < 4096).
pub const COEFF_BITS: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("byte string has length {got}, expected {want}")]
    LengthMismatch { want: usize, got: usize },
    #[error("packed coefficient {value} is not reduced mod {q}")]
    NotCanonical { value: u32, q: u32 },
}

/// Static scheme-level ring parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RingParams {
    /// Coefficient modulus.
    pub q: u32,
    /// Module rank k (2, 3 or 4).
    pub k: usize,
    /// Binomial parameter for secrets and key noise.
    pub eta1: u32,
    /// Binomial parameter for encapsulation noise.
    pub eta2: u32,
    /// Compression width for the u part of a ciphertext.
    pub d_u: u32,
}

impl RingParams {
    pub fn new(q: u32, k: usize, eta1: u32, eta2: u32, d_u: u32) -> Self {
        assert!(matches!(k, 2..=4), "module rank must be 2, 3 or 4");
        assert!(q > 1 && q < (1 << COEFF_BITS));
        assert!(d_u > 0 && (1u32 << d_u) <= q, "d_u too large for q");
        Self { q, k, eta1, eta2, d_u }
    }

    /// True when 2^d_u = q, i.e. the u part is transmitted uncompressed.
    pub fn du_is_identity(&self) -> bool {
        1u32 << self.d_u == self.q
    }
}

/// 32-byte seed for all deterministic expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed(pub [u8; 32]);

impl Seed {
    pub fn from_slice(bytes: &[u8]) -> Result<Self, RingError> {
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| RingError::LengthMismatch { want: 32, got: bytes.len() })?;
        Ok(Seed(arr))
    }
}

/// Polynomial with 256 canonical coefficients in [0, q).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingElement {
    pub coeffs: [u32; N],
}

impl RingElement {
    pub fn zero() -> Self {
        RingElement { coeffs: [0; N] }
    }

    pub fn constant(c: u32, q: u32) -> Self {
        let mut e = Self::zero();
        e.coeffs[0] = c % q;
        e
    }

    /// Builds an element from centered values, reducing into [0, q).
    pub fn from_centered(vals: &[i64; N], q: u32) -> Self {
        let mut e = Self::zero();
        for (c, v) in e.coeffs.iter_mut().zip(vals.iter()) {
            *c = v.rem_euclid(q as i64) as u32;
        }
        e
    }

    pub fn add(&self, other: &Self, q: u32) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            out.coeffs[i] = (self.coeffs[i] + other.coeffs[i]) % q;
        }
        out
    }

    pub fn sub(&self, other: &Self, q: u32) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            out.coeffs[i] = (self.coeffs[i] + q - other.coeffs[i]) % q;
        }
        out
    }
}

/// Length-k vector of ring elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingVector {
    pub elems: Vec<RingElement>,
}

impl RingVector {
    pub fn zero(k: usize) -> Self {
        RingVector { elems: vec![RingElement::zero(); k] }
    }

    pub fn add(&self, other: &Self, q: u32) -> Self {
        assert_eq!(self.elems.len(), other.elems.len());
        RingVector {
            elems: self
                .elems
                .iter()
                .zip(&other.elems)
                .map(|(a, b)| a.add(b, q))
                .collect(),
        }
    }
}

/// Balanced representative in (-q/2, q/2].
pub fn centered_rep(x: u32, q: u32) -> i64 {
    debug_assert!(x < q);
    let x = x as i64;
    let q = q as i64;
    if 2 * x > q {
        x - q
    } else {
        x
    }
}

/// Rounds the rational num/den to the nearest integer, ties up. `den > 0`.
pub fn round_ties_up(num: i64, den: i64) -> i64 {
    debug_assert!(den > 0);
    (2 * num + den).div_euclid(2 * den)
}

/// Eq-style compression: round((2^d / q) x) mod 2^d, ties up.
/// When 2^d = q this degenerates to the identity.
pub fn compress(x: u32, d: u32, q: u32) -> u32 {
    debug_assert!(x < q);
    if 1u32 << d == q {
        return x;
    }
    let num = (x as u64) << d;
    let r = (2 * num + q as u64) / (2 * q as u64);
    (r as u32) & ((1 << d) - 1)
}

/// Inverse map: round((q / 2^d) y), ties up.
pub fn decompress(y: u32, d: u32, q: u32) -> u32 {
    debug_assert!(y < (1u32 << d));
    if 1u32 << d == q {
        return y;
    }
    let num = y as u64 * q as u64;
    ((2 * num + (1u64 << d)) >> (d + 1)) as u32
}

pub fn compress_poly(a: &RingElement, d: u32, q: u32) -> RingElement {
    let mut out = RingElement::zero();
    for i in 0..N {
        out.coeffs[i] = compress(a.coeffs[i], d, q);
    }
    out
}

pub fn decompress_poly(a: &RingElement, d: u32, q: u32) -> RingElement {
    let mut out = RingElement::zero();
    for i in 0..N {
        out.coeffs[i] = decompress(a.coeffs[i], d, q);
    }
    out
}

/// Schoolbook negacyclic product, the mandatory correctness path.
pub fn poly_mul_schoolbook(a: &RingElement, b: &RingElement, q: u32) -> RingElement {
    let mut acc = [0i64; N];
    let q64 = q as i64;
    for i in 0..N {
        if a.coeffs[i] == 0 {
            continue;
        }
        let ai = a.coeffs[i] as i64;
        // each reduced product is < q, so 256 of them stay far inside i64
        for j in 0..N {
            let prod = ai * b.coeffs[j] as i64 % q64;
            let idx = i + j;
            if idx < N {
                acc[idx] += prod;
            } else {
                acc[idx - N] -= prod;
            }
        }
    }
    let mut out = RingElement::zero();
    for i in 0..N {
        out.coeffs[i] = acc[i].rem_euclid(q64) as u32;
    }
    out
}

/// Negacyclic product; dispatches to the NTT when q = 3329.
pub fn poly_mul(a: &RingElement, b: &RingElement, q: u32) -> RingElement {
    if q == ntt::NTT_Q {
        let mut fa = a.coeffs;
        let mut fb = b.coeffs;
        ntt::ntt(&mut fa);
        ntt::ntt(&mut fb);
        let mut fc = ntt::base_mul(&fa, &fb);
        ntt::inv_ntt(&mut fc);
        RingElement { coeffs: fc }
    } else {
        poly_mul_schoolbook(a, b, q)
    }
}

/// Inner product of two ring vectors.
pub fn vec_dot(a: &RingVector, b: &RingVector, q: u32) -> RingElement {
    assert_eq!(a.elems.len(), b.elems.len());
    let mut acc = RingElement::zero();
    for (x, y) in a.elems.iter().zip(&b.elems) {
        acc = acc.add(&poly_mul(x, y, q), q);
    }
    acc
}

/// Matrix-vector product; `transpose` swaps the index order.
pub fn mat_vec_mul(
    mat: &[Vec<RingElement>],
    v: &RingVector,
    q: u32,
    transpose: bool,
) -> RingVector {
    let k = v.elems.len();
    let mut out = RingVector::zero(k);
    for i in 0..k {
        let mut acc = RingElement::zero();
        for (j, vj) in v.elems.iter().enumerate() {
            let entry = if transpose { &mat[j][i] } else { &mat[i][j] };
            acc = acc.add(&poly_mul(entry, vj, q), q);
        }
        out.elems[i] = acc;
    }
    out
}

/// Expands the public matrix A from rho. Each entry is sampled by rejecting
/// 12-bit values >= q out of SHAKE-128(rho || row || col).
pub fn expand_matrix(rho: &Seed, params: &RingParams) -> Vec<Vec<RingElement>> {
    let k = params.k;
    let mut mat = vec![vec![RingElement::zero(); k]; k];
    for (r, row) in mat.iter_mut().enumerate() {
        for (c, e) in row.iter_mut().enumerate() {
            *e = sample_uniform(&rho.0, &[r as u8, c as u8], params.q);
        }
    }
    mat
}

fn sample_uniform(seed: &[u8], domain: &[u8], q: u32) -> RingElement {
    let mut reader = xof::shake128(seed, domain);
    let mut out = RingElement::zero();
    let mut filled = 0;
    let mut buf = [0u8; 168]; // one SHAKE-128 rate block
    while filled < N {
        reader.read(&mut buf);
        for chunk in buf.chunks_exact(3) {
            let d1 = chunk[0] as u32 | ((chunk[1] as u32 & 0x0f) << 8);
            let d2 = (chunk[1] as u32 >> 4) | ((chunk[2] as u32) << 4);
            for d in [d1, d2] {
                if d < q && filled < N {
                    out.coeffs[filled] = d;
                    filled += 1;
                }
            }
            if filled == N {
                break;
            }
        }
    }
    out
}

/// Centered binomial sampler: each coefficient is (sum of eta bits) minus
/// (sum of eta bits) from SHAKE-256(seed || nonce), reduced into [0, q).
pub fn cbd_sample(seed: &Seed, nonce: u8, eta: u32, q: u32) -> RingElement {
    assert!(matches!(eta, 2 | 3), "eta must be 2 or 3");
    let mut reader = xof::shake256(&seed.0, &[nonce]);
    let mut bytes = vec![0u8; 64 * eta as usize];
    reader.read(&mut bytes);
    let mut out = RingElement::zero();
    let mut bitpos = 0usize;
    let mut take_bits = |n: u32| -> u32 {
        let mut acc = 0;
        for _ in 0..n {
            let bit = (bytes[bitpos / 8] >> (bitpos % 8)) & 1;
            acc += bit as u32;
            bitpos += 1;
        }
        acc
    };
    for c in out.coeffs.iter_mut() {
        let a = take_bits(eta);
        let b = take_bits(eta);
        *c = (a + q - b) % q;
    }
    out
}

/// Packs coefficients little-endian, `d` bits each: coefficient i occupies
/// bit positions [i*d, (i+1)*d) of the stream.
pub fn pack_bits(values: &[u32], d: usize) -> Vec<u8> {
    assert!(d > 0 && d <= 16);
    let total_bits = values.len() * d;
    let mut out = vec![0u8; total_bits.div_ceil(8)];
    for (i, &v) in values.iter().enumerate() {
        debug_assert!((v as u64) < (1u64 << d));
        let mut bit = i * d;
        for b in 0..d {
            if (v >> b) & 1 == 1 {
                out[bit / 8] |= 1 << (bit % 8);
            }
            bit += 1;
        }
    }
    out
}

/// Inverse of [`pack_bits`]; checks the byte length and that any padding
/// bits in the final byte are zero.
pub fn unpack_bits(bytes: &[u8], count: usize, d: usize) -> Result<Vec<u32>, RingError> {
    assert!(d > 0 && d <= 16);
    let total_bits = count * d;
    let want = total_bits.div_ceil(8);
    if bytes.len() != want {
        return Err(RingError::LengthMismatch { want, got: bytes.len() });
    }
    for tail_bit in total_bits..bytes.len() * 8 {
        if (bytes[tail_bit / 8] >> (tail_bit % 8)) & 1 == 1 {
            return Err(RingError::NotCanonical { value: 1, q: 0 });
        }
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut v = 0u32;
        for b in 0..d {
            let bit = i * d + b;
            if (bytes[bit / 8] >> (bit % 8)) & 1 == 1 {
                v |= 1 << b;
            }
        }
        out.push(v);
    }
    Ok(out)
}

/// Packs a polynomial at 12 bits per coefficient (public keys, secrets).
pub fn pack_poly(a: &RingElement) -> Vec<u8> {
    pack_bits(&a.coeffs, COEFF_BITS)
}

/// Unpacks a 12-bit polynomial and validates canonicity mod q.
pub fn unpack_poly(bytes: &[u8], q: u32) -> Result<RingElement, RingError> {
    let vals = unpack_bits(bytes, N, COEFF_BITS)?;
    let mut e = RingElement::zero();
    for (c, v) in e.coeffs.iter_mut().zip(vals) {
        if v >= q {
            return Err(RingError::NotCanonical { value: v, q });
        }
        *c = v;
    }
    Ok(e)
}
