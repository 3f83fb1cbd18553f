//! The nested quantizer tower and its codecs.
//!
//! Per block, three lattices are stacked:
//!
//! ```text
//!   L1 = s1 * Lambda^(n/l)          quantization lattice   (s1 = floor(q/2^p))
//!   L2 = 2^(p-t) * L1               decision lattice
//!   L3 = 2^p * s1 * Z^n = qhat Z^n  shaping lattice
//! ```
//!
//! The hint encodes Q_L1(x) mod L2 as canonical-basis digits mod 2^(p-t);
//! the shared secret encodes Q_L2(x - y) mod L3 through the Smith normal
//! form of the inclusion L3 in L2, a product of power-of-two cyclic groups.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};

use super::matrix::{self, IMat};
use super::{IntegerLattice, LatticeError};

/// Digit map for one block's message group L2/L3.
#[derive(Debug, Clone)]
struct MessageCodec {
    /// row-reduced U^-1 of the Smith form of B2^-1 B3: entry (i,j) is
    /// reduced mod digit modulus d_i, so products never overflow
    u_inv_mod: Vec<Vec<i64>>,
    /// U of the Smith form, for mapping digits back to a representative
    u: Vec<Vec<i64>>,
    /// cyclic group orders d_i (powers of two, possibly 1)
    moduli: Vec<i64>,
    /// bits per digit: log2(d_i)
    digit_bits: Vec<u32>,
}

impl MessageCodec {
    /// Builds the codec from the lattice alone: B2^-1 B3 = 2^t den B^-1,
    /// independent of the tower scales.
    fn for_lattice(lat: &IntegerLattice) -> Result<Self, LatticeError> {
        let t = lat.tower_t()?;
        let dim = lat.dim;
        let factor = BigInt::from(lat.den) << t;
        let b = IMat::from_i64_rows(&lat.basis);
        let inv = matrix::inverse_rational(&b);
        let mut m = IMat::zero(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                let scaled = inv[i][j].clone() * Ratio::from_integer(factor.clone());
                if !scaled.is_integer() {
                    // Lemma-1 guarantee failed; lattice unsuitable for the tower
                    return Err(LatticeError::NonPowerOfTwoIndex(format!(
                        "2^t den B^-1 not integral at ({i},{j})"
                    )));
                }
                m[(i, j)] = scaled.to_integer();
            }
        }
        let snf = matrix::smith_normal_form(&m).map_err(|_| LatticeError::SingularBasis)?;
        let mut moduli = Vec::with_capacity(dim);
        let mut digit_bits = Vec::with_capacity(dim);
        for d in &snf.diag {
            let d = d.abs().to_i64().ok_or(LatticeError::NonIntegerBits)?;
            if !d.is_positive() || d.count_ones() != 1 {
                return Err(LatticeError::NonIntegerBits);
            }
            moduli.push(d);
            digit_bits.push(d.trailing_zeros());
        }
        let mut u_inv_mod = vec![vec![0i64; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                let v = &snf.u_inv[(i, j)] % BigInt::from(moduli[i]);
                let mut v = v.to_i64().unwrap();
                v = v.rem_euclid(moduli[i]);
                u_inv_mod[i][j] = v;
            }
        }
        let u = snf.u.to_i64_rows();
        Ok(MessageCodec { u_inv_mod, u, moduli, digit_bits })
    }

    fn bits(&self) -> u32 {
        self.digit_bits.iter().sum()
    }

    /// Coset digits of a L2 point given by its canonical L2-basis coords.
    fn encode(&self, z2: &[i128]) -> Vec<u32> {
        let dim = self.moduli.len();
        let mut w = Vec::with_capacity(dim);
        for i in 0..dim {
            let m = self.moduli[i] as i128;
            let mut acc: i128 = 0;
            for j in 0..dim {
                let zj = z2[j].rem_euclid(m);
                acc += self.u_inv_mod[i][j] as i128 * zj;
            }
            w.push(acc.rem_euclid(m) as u32);
        }
        w
    }

    /// A representative's canonical coords for the given digits.
    fn decode(&self, w: &[u32]) -> Vec<i64> {
        let dim = self.moduli.len();
        (0..dim)
            .map(|i| {
                let mut acc: i128 = 0;
                for j in 0..dim {
                    acc += self.u[i][j] as i128 * w[j] as i128;
                }
                i64::try_from(acc).expect("representative coords exceed i64")
            })
            .collect()
    }
}

/// One block of the tower: a lattice instance covering `lat.dim` consecutive
/// ring coefficients.
#[derive(Debug, Clone)]
pub struct QuantizerBlock {
    pub lattice: Arc<IntegerLattice>,
    /// first coefficient index covered by this block
    pub offset: usize,
    /// storage-scale multiplier: L1 = sigma1 * L_storage
    pub sigma1: i64,
    /// tower exponent of the block lattice
    pub t: u32,
    /// hint digit width: d_v = p - t
    pub d_v: u32,
    codec: MessageCodec,
}

impl QuantizerBlock {
    pub fn dim(&self) -> usize {
        self.lattice.dim
    }

    /// message bits carried by this block
    pub fn message_bits(&self) -> u32 {
        self.codec.bits()
    }

    /// squared packing radius of L2, exact
    pub fn rpack_sq_l2(&self) -> Ratio<i64> {
        let scale = (1i64 << self.d_v) * self.sigma1 * self.lattice.den;
        self.lattice.rpack_sq_unit() * Ratio::from_integer(scale * scale)
    }
}

/// The full tower covering the quantized prefix of the 256 coefficients.
#[derive(Debug, Clone)]
pub struct QuantizerConfig {
    pub p: u32,
    pub s1: i64,
    pub qhat: u32,
    pub blocks: Vec<QuantizerBlock>,
    /// number of ring coefficients quantized (256, or kappa*l when shortened)
    pub quantized_coeffs: usize,
    /// total message bits N over all blocks
    pub message_bits: usize,
}

impl QuantizerConfig {
    /// Builds a tower over `shape` = [(lattice, copies), ...] blocks laid out
    /// in order. A standard config covers all 256 coefficients; a shortened
    /// one covers a prefix.
    pub fn new(q: u32, p: u32, shape: &[(Arc<IntegerLattice>, usize)]) -> Result<Self, LatticeError> {
        let s1 = (q >> p) as i64;
        if s1 < 1 {
            return Err(LatticeError::BadConstruction(format!("2^{p} exceeds q={q}")));
        }
        let qhat = (s1 as u32) << p;
        let mut blocks = Vec::new();
        let mut offset = 0usize;
        let mut message_bits = 0usize;
        for (lat, copies) in shape {
            let t = lat.tower_t()?;
            if t >= p {
                return Err(LatticeError::BadConstruction(format!(
                    "lattice {} needs t={t} < p={p}",
                    lat.name
                )));
            }
            if s1 % lat.den != 0 {
                return Err(LatticeError::BadConstruction(format!(
                    "floor(q/2^p)={s1} not divisible by storage denominator {}",
                    lat.den
                )));
            }
            let codec = MessageCodec::for_lattice(lat)?;
            for _ in 0..*copies {
                let block = QuantizerBlock {
                    lattice: lat.clone(),
                    offset,
                    sigma1: s1 / lat.den,
                    t,
                    d_v: p - t,
                    codec: codec.clone(),
                };
                offset += block.dim();
                message_bits += block.message_bits() as usize;
                blocks.push(block);
            }
        }
        if offset > crate::ring::N {
            return Err(LatticeError::BadConstruction(format!(
                "blocks cover {offset} > 256 coefficients"
            )));
        }
        Ok(QuantizerConfig {
            p,
            s1,
            qhat,
            blocks,
            quantized_coeffs: offset,
            message_bits,
        })
    }

    /// Exact message bit count N = log2(Vol(L3)/Vol(L2)).
    pub fn message_bit_count(&self) -> usize {
        self.message_bits
    }

    /// Total hint bits: sum of l_b * d_v over blocks.
    pub fn hint_bits(&self) -> usize {
        self.blocks.iter().map(|b| b.dim() * b.d_v as usize).sum()
    }

    /// Verifies the nesting L3 in L2 in L1 by membership of basis vectors.
    pub fn nesting_holds(&self) -> bool {
        for block in &self.blocks {
            let lat = &block.lattice;
            let dim = lat.dim;
            let s2 = block.sigma1 << block.d_v;
            // L2 basis vectors inside L1
            for j in 0..dim {
                let z: Vec<i64> = (0..dim).map(|i| if i == j { 1 } else { 0 }).collect();
                let b2 = lat.point_from_coords(&z, s2);
                if !lat.in_lattice(&b2, block.sigma1) {
                    return false;
                }
            }
            // L3 basis vectors (qhat e_i) inside L2
            for i in 0..dim {
                let mut e = vec![0i64; dim];
                e[i] = self.qhat as i64;
                if !lat.in_lattice(&e, s2) {
                    return false;
                }
            }
        }
        true
    }
}

/// Reconciliation hint: per block, dim digits of d_v bits each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetIndexV {
    /// per-block digit vectors, block order
    pub digits: Vec<Vec<u32>>,
}

impl CosetIndexV {
    pub fn to_bytes(&self, cfg: &QuantizerConfig) -> Vec<u8> {
        let mut all_bits: Vec<u8> = Vec::new();
        // pack per block with its own width, then concatenate at bit level
        let mut bitbuf: Vec<bool> = Vec::with_capacity(cfg.hint_bits());
        for (block, ds) in cfg.blocks.iter().zip(&self.digits) {
            for &d in ds {
                for b in 0..block.d_v {
                    bitbuf.push((d >> b) & 1 == 1);
                }
            }
        }
        let mut out = vec![0u8; bitbuf.len().div_ceil(8)];
        for (i, bit) in bitbuf.iter().enumerate() {
            if *bit {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        all_bits.clear();
        out
    }

    pub fn from_bytes(bytes: &[u8], cfg: &QuantizerConfig) -> Result<Self, LatticeError> {
        let total = cfg.hint_bits();
        if bytes.len() != total.div_ceil(8) {
            return Err(LatticeError::MalformedHint);
        }
        for tail in total..bytes.len() * 8 {
            if (bytes[tail / 8] >> (tail % 8)) & 1 == 1 {
                return Err(LatticeError::MalformedHint);
            }
        }
        let mut digits = Vec::with_capacity(cfg.blocks.len());
        let mut pos = 0usize;
        for block in &cfg.blocks {
            let mut ds = Vec::with_capacity(block.dim());
            for _ in 0..block.dim() {
                let mut v = 0u32;
                for b in 0..block.d_v {
                    if (bytes[pos / 8] >> (pos % 8)) & 1 == 1 {
                        v |= 1 << b;
                    }
                    pos += 1;
                }
                ds.push(v);
            }
            digits.push(ds);
        }
        Ok(CosetIndexV { digits })
    }
}

/// N message bits encoding a coset of L2/L3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageBits {
    pub bits: Vec<u8>,
    pub bit_len: usize,
}

impl MessageBits {
    pub fn zero(bit_len: usize) -> Self {
        MessageBits { bits: vec![0; bit_len.div_ceil(8)], bit_len }
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.bits[i / 8] >> (i % 8)) & 1 == 1
    }

    fn push_digit(&mut self, pos: &mut usize, v: u32, width: u32) {
        for b in 0..width {
            if (v >> b) & 1 == 1 {
                self.bits[*pos / 8] |= 1 << (*pos % 8);
            }
            *pos += 1;
        }
    }

    /// Truncates to the first `n` bits (shortened-secret variant).
    pub fn truncate(&self, n: usize) -> MessageBits {
        assert!(n <= self.bit_len);
        let mut out = MessageBits::zero(n);
        for i in 0..n {
            if self.bit(i) {
                out.bits[i / 8] |= 1 << (i % 8);
            }
        }
        out
    }
}

/// HelpRec: per block, Q_L1(x) reduced mod L2 as digits mod 2^(p-t).
pub fn help_rec(x: &[u32], cfg: &QuantizerConfig) -> CosetIndexV {
    let mut digits = Vec::with_capacity(cfg.blocks.len());
    for block in &cfg.blocks {
        let lat = &block.lattice;
        let xb: Vec<i64> = x[block.offset..block.offset + block.dim()]
            .iter()
            .map(|&v| v as i64)
            .collect();
        let q1 = lat.nearest(&xb, block.sigma1);
        let z = lat
            .coords(&q1, block.sigma1)
            .expect("quantizer output is a lattice point");
        let m = 1i128 << block.d_v;
        digits.push(z.iter().map(|&zi| zi.rem_euclid(m) as u32).collect());
    }
    CosetIndexV { digits }
}

/// Rec: decode the hint to a representative y, quantize x - y onto L2 and
/// encode the L2/L3 coset as message bits.
pub fn rec(x: &[u32], v: &CosetIndexV, cfg: &QuantizerConfig) -> Result<MessageBits, LatticeError> {
    if v.digits.len() != cfg.blocks.len() {
        return Err(LatticeError::MalformedHint);
    }
    let mut msg = MessageBits::zero(cfg.message_bits);
    let mut pos = 0usize;
    for (block, ds) in cfg.blocks.iter().zip(&v.digits) {
        if ds.len() != block.dim() {
            return Err(LatticeError::MalformedHint);
        }
        let lat = &block.lattice;
        let limit = 1u32 << block.d_v;
        if ds.iter().any(|&d| d >= limit) {
            return Err(LatticeError::MalformedHint);
        }
        let y = lat.point_from_coords(
            &ds.iter().map(|&d| d as i64).collect::<Vec<_>>(),
            block.sigma1,
        );
        let diff: Vec<i64> = x[block.offset..block.offset + block.dim()]
            .iter()
            .zip(&y)
            .map(|(&a, &b)| a as i64 - b)
            .collect();
        let s2 = block.sigma1 << block.d_v;
        let q2 = lat.nearest(&diff, s2);
        let z2 = lat
            .coords(&q2, s2)
            .expect("quantizer output is a lattice point");
        let digits = block.codec.encode(&z2);
        for (i, &w) in digits.iter().enumerate() {
            msg.push_digit(&mut pos, w, block.codec.digit_bits[i]);
        }
    }
    debug_assert_eq!(pos, cfg.message_bits);
    Ok(msg)
}

/// Test-support decode of message digits back to per-block representatives.
/// Returns, per block, a point of L2 whose coset equals the digits.
pub fn message_representative(msg_digits: &[Vec<u32>], cfg: &QuantizerConfig) -> Vec<Vec<i64>> {
    cfg.blocks
        .iter()
        .zip(msg_digits)
        .map(|(block, w)| {
            let z = block.codec.decode(w);
            let s2 = block.sigma1 << block.d_v;
            block.lattice.point_from_coords(&z, s2)
        })
        .collect()
}

/// Splits packed message bits back into per-block digit vectors.
pub fn message_digits(msg: &MessageBits, cfg: &QuantizerConfig) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity(cfg.blocks.len());
    let mut pos = 0usize;
    for block in &cfg.blocks {
        let mut ds = Vec::with_capacity(block.dim());
        for &w in &block.codec.digit_bits {
            let mut v = 0u32;
            for b in 0..w {
                if msg.bit(pos) {
                    v |= 1 << b;
                }
                pos += 1;
            }
            ds.push(v);
        }
        out.push(ds);
    }
    out
}

/// Re-encode digits to bits (inverse of [`message_digits`]).
pub fn digits_to_message(digits: &[Vec<u32>], cfg: &QuantizerConfig) -> MessageBits {
    let mut msg = MessageBits::zero(cfg.message_bits);
    let mut pos = 0usize;
    for (block, ds) in cfg.blocks.iter().zip(digits) {
        for (i, &d) in ds.iter().enumerate() {
            msg.push_digit(&mut pos, d, block.codec.digit_bits[i]);
        }
    }
    msg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e8_cfg() -> QuantizerConfig {
        QuantizerConfig::new(3329, 5, &[(IntegerLattice::e8(), 32)]).unwrap()
    }

    fn bw16_cfg() -> QuantizerConfig {
        QuantizerConfig::new(3329, 5, &[(IntegerLattice::bw16(), 16)]).unwrap()
    }

    fn leech_cfg() -> QuantizerConfig {
        QuantizerConfig::new(
            3329,
            5,
            &[(IntegerLattice::leech24(), 10), (IntegerLattice::bw16(), 1)],
        )
        .unwrap()
    }

    #[test]
    fn message_bit_counts() {
        assert_eq!(e8_cfg().message_bit_count(), 256);
        assert_eq!(bw16_cfg().message_bit_count(), 320);
        assert_eq!(leech_cfg().message_bit_count(), 380);
    }

    #[test]
    fn hint_bit_counts() {
        assert_eq!(e8_cfg().hint_bits(), 256 * 4);
        assert_eq!(bw16_cfg().hint_bits(), 256 * 3);
        assert_eq!(leech_cfg().hint_bits(), 10 * 24 * 2 + 16 * 3);
    }

    #[test]
    fn nesting_invariants() {
        assert!(e8_cfg().nesting_holds());
        assert!(bw16_cfg().nesting_holds());
        assert!(leech_cfg().nesting_holds());
        // the even-modulus legacy tower and the shortened prefix tower
        let q2048 = QuantizerConfig::new(2048, 5, &[(IntegerLattice::e8(), 32)]).unwrap();
        assert_eq!(q2048.qhat, 2048);
        assert!(q2048.nesting_holds());
        let short = QuantizerConfig::new(3329, 5, &[(IntegerLattice::bw16(), 13)]).unwrap();
        assert!(short.nesting_holds());
    }

    #[test]
    fn zero_input_gives_zero_hint_and_message() {
        let cfg = e8_cfg();
        let x = [0u32; 256];
        let v = help_rec(&x, &cfg);
        assert!(v.digits.iter().flatten().all(|&d| d == 0));
        let m = rec(&x, &v, &cfg).unwrap();
        assert!(m.bits.iter().all(|&b| b == 0));
    }

    #[test]
    fn l2_points_give_zero_hint() {
        // x in L2 blockwise quantizes to itself and reduces to digit 0
        let cfg = e8_cfg();
        let block = &cfg.blocks[0];
        let s2 = block.sigma1 << block.d_v;
        let pt = block.lattice.point_from_coords(&[1, 0, 2, 0, 0, 1, 0, 3], s2);
        let mut x = [0u32; 256];
        for (i, &p) in pt.iter().enumerate() {
            x[i] = p.rem_euclid(cfg.qhat as i64 * 16) as u32; // keep positive
        }
        // use the raw coords: all coordinates of an L2 point are multiples
        // of sigma1 * 2^dv in the L1 basis, so digits vanish
        let v = help_rec(&x[..], &cfg);
        assert!(v.digits[0].iter().all(|&d| d == 0), "{:?}", v.digits[0]);
    }

    #[test]
    fn hint_roundtrip_bytes() {
        let cfg = leech_cfg();
        let x: Vec<u32> = (0..256u32).map(|i| (i * 131 + 7) % 3328).collect();
        let v = help_rec(&x, &cfg);
        let bytes = v.to_bytes(&cfg);
        assert_eq!(bytes.len(), cfg.hint_bits() / 8);
        let back = CosetIndexV::from_bytes(&bytes, &cfg).unwrap();
        assert_eq!(v, back);
        // wrong length
        assert!(CosetIndexV::from_bytes(&bytes[1..], &cfg).is_err());
    }

    #[test]
    fn coset_codec_is_bijective() {
        // encode(decode(w)) == w for random digit vectors; 1e4 cosets across
        // the three shipped towers
        let mut state = 0xb17ec71fu64;
        let mut next = move |m: u32| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) as u32) % m
        };
        for cfg in [e8_cfg(), bw16_cfg(), leech_cfg()] {
            let mut checked = 0;
            'outer: loop {
                for block in &cfg.blocks {
                    let w: Vec<u32> = block
                        .codec
                        .moduli
                        .iter()
                        .map(|&d| next(d as u32))
                        .collect();
                    let z = block.codec.decode(&w);
                    let z128: Vec<i128> = z.iter().map(|&v| v as i128).collect();
                    assert_eq!(block.codec.encode(&z128), w);
                    // shifting by the shaping lattice leaves the digits fixed
                    let s2 = block.sigma1 << block.d_v;
                    let rep = block.lattice.point_from_coords(&z, s2);
                    let mut shifted = rep.clone();
                    shifted[0] += cfg.qhat as i64;
                    let z_shift = block.lattice.coords(&shifted, s2).unwrap();
                    assert_eq!(block.codec.encode(&z_shift), w);
                    checked += 1;
                    if checked >= 3400 {
                        break 'outer;
                    }
                }
            }
        }
    }

    #[test]
    fn message_digit_roundtrip() {
        let cfg = bw16_cfg();
        let x: Vec<u32> = (0..256u32).map(|i| (i * 997 + 13) % 3328).collect();
        let v = help_rec(&x, &cfg);
        let m = rec(&x, &v, &cfg).unwrap();
        let digits = message_digits(&m, &cfg);
        let back = digits_to_message(&digits, &cfg);
        assert_eq!(m, back);
    }

    #[test]
    fn reconciliation_with_small_noise_agrees() {
        // both parties reconcile identically when the residual noise stays
        // inside the packing radius of L2
        for cfg in [e8_cfg(), bw16_cfg(), leech_cfg()] {
            let mut state = 0xdeadbeefu64;
            let mut next = |m: u64| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 33) % m
            };
            for trial in 0..50 {
                let x: Vec<u32> = (0..256).map(|_| next(3328) as u32).collect();
                let v = help_rec(&x, &cfg);
                let m_alice = rec(&x, &v, &cfg).unwrap();
                // Bob sees x + eps with small per-coefficient noise; the
                // packing radius of L2 is sqrt(1384448) ~ 1176, so +-3 per
                // coefficient (block norm <= sqrt(24)*3 ~ 15) plus the
                // quantization offset stays comfortably inside on most
                // draws; only assert when the sufficient condition holds.
                let eps: Vec<i64> = (0..256).map(|_| next(7) as i64 - 3).collect();
                let xb: Vec<u32> = x
                    .iter()
                    .zip(&eps)
                    .map(|(&a, &e)| (a as i64 + e).rem_euclid(3329) as u32)
                    .collect();
                let m_bob = rec(&xb, &v, &cfg).unwrap();
                let mut condition = true;
                for block in &cfg.blocks {
                    let lat = &block.lattice;
                    let xs: Vec<i64> = x[block.offset..block.offset + block.dim()]
                        .iter()
                        .map(|&a| a as i64)
                        .collect();
                    let q1 = lat.nearest(&xs, block.sigma1);
                    let mut norm_sq: i128 = 0;
                    for i in 0..block.dim() {
                        let cv = xs[i] - q1[i] + eps[block.offset + i];
                        norm_sq += (cv as i128) * (cv as i128);
                    }
                    let rp = block.rpack_sq_l2();
                    assert!(rp.is_integer());
                    if norm_sq >= *rp.numer() as i128 {
                        condition = false;
                    }
                }
                if condition {
                    assert_eq!(m_alice, m_bob, "cfg block0={} trial={trial}", cfg.blocks[0].lattice.name);
                }
            }
        }
    }

    #[test]
    fn perturbed_hint_changes_message() {
        // A single corrupted digit translates the decoded representative by
        // digit_delta * sigma1 * basis_column. Reconciliation absorbs shifts
        // inside the L2 Voronoi cell (that tolerance is the whole point), and
        // a top-bit flip lands exactly on the cell boundary, so per trial the
        // message flips with probability about 1/2. Randomizing the whole
        // digit vector leaves the cell almost surely and must always flip.
        let cfg = e8_cfg();
        let mut state = 0x5ca1ab1eu64;
        let mut rng = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) as u32
        };
        let mut single_diffs = 0;
        let mut full_diffs = 0;
        let trials = 40u32;
        for t in 0..trials {
            let x: Vec<u32> = (0..256).map(|_| rng() % 3328).collect();
            let v = help_rec(&x, &cfg);
            let m = rec(&x, &v, &cfg).unwrap();
            let mut v2 = v.clone();
            let j = (t as usize * 3) % 8;
            v2.digits[0][j] = (v2.digits[0][j] + 8) % 16;
            if rec(&x, &v2, &cfg).unwrap() != m {
                single_diffs += 1;
            }
            let mut v3 = v.clone();
            for block in v3.digits.iter_mut() {
                for d in block.iter_mut() {
                    *d = rng() % 16;
                }
            }
            if rec(&x, &v3, &cfg).unwrap() != m {
                full_diffs += 1;
            }
        }
        // boundary coin flips: p = 1/2, so fewer than 10/40 has p < 0.001
        assert!(
            single_diffs >= 10,
            "only {single_diffs}/{trials} single-digit perturbations changed the message"
        );
        assert_eq!(full_diffs, trials, "a fully random hint must change the message");
    }

    #[test]
    fn rec_rejects_out_of_range_digits() {
        let cfg = e8_cfg();
        let x = [5u32; 256];
        let mut v = help_rec(&x, &cfg);
        v.digits[0][0] = 16; // d_v = 4 so digits must be < 16
        assert!(matches!(rec(&x, &v, &cfg), Err(LatticeError::MalformedHint)));
    }

    #[test]
    fn shortened_tower_shape() {
        let cfg = QuantizerConfig::new(3329, 5, &[(IntegerLattice::bw16(), 13)]).unwrap();
        assert_eq!(cfg.quantized_coeffs, 208);
        assert_eq!(cfg.message_bit_count(), 260);
        assert_eq!(cfg.hint_bits(), 13 * 16 * 3);
    }

    #[test]
    fn rejects_bad_shapes() {
        // t = p makes d_v = 0
        assert!(QuantizerConfig::new(3329, 3, &[(IntegerLattice::leech24(), 10)]).is_err());
        // more than 256 coefficients
        assert!(QuantizerConfig::new(3329, 5, &[(IntegerLattice::e8(), 33)]).is_err());
    }
}
