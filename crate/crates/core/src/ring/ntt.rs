//! Incomplete number-theoretic transform for q = 3329.
//!
//! 3329 = 13·256 + 1, so a primitive 256-th root of unity exists (17) and the
//! ring Z_q[X]/(X^256+1) splits into 128 quadratic factors X^2 - zeta^(2i+1).
//! Seven butterfly layers take a polynomial to that CRT form; products are
//! finished with a degree-1 base multiplication per factor pair.

pub const NTT_Q: u32 = 3329;
const ZETA: u64 = 17;
const INV_128: u64 = 3303; // 128^-1 mod 3329

fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1u64;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        exp >>= 1;
    }
    acc
}

fn bitrev7(x: u32) -> u32 {
    let mut r = 0;
    for b in 0..7 {
        r |= ((x >> b) & 1) << (6 - b);
    }
    r
}

/// zeta^bitrev7(i) for the layer butterflies.
fn zetas() -> [u32; 128] {
    let mut z = [0u32; 128];
    for (i, zi) in z.iter_mut().enumerate() {
        *zi = pow_mod(ZETA, bitrev7(i as u32) as u64, NTT_Q as u64) as u32;
    }
    z
}

fn zetas_cached() -> &'static [u32; 128] {
    use std::sync::OnceLock;
    static CACHE: OnceLock<[u32; 128]> = OnceLock::new();
    CACHE.get_or_init(zetas)
}

/// Forward transform, in place. Coefficients stay canonical in [0, q).
pub fn ntt(f: &mut [u32; 256]) {
    let q = NTT_Q as u64;
    let z = zetas_cached();
    let mut k = 1;
    let mut len = 128;
    while len >= 2 {
        let mut start = 0;
        while start < 256 {
            let zeta = z[k] as u64;
            k += 1;
            for j in start..start + len {
                let t = (zeta * f[j + len] as u64) % q;
                f[j + len] = ((f[j] as u64 + q - t) % q) as u32;
                f[j] = ((f[j] as u64 + t) % q) as u32;
            }
            start += 2 * len;
        }
        len >>= 1;
    }
}

/// Inverse transform, in place, including the 1/128 scaling.
pub fn inv_ntt(f: &mut [u32; 256]) {
    let q = NTT_Q as u64;
    let z = zetas_cached();
    let mut k = 127;
    let mut len = 2;
    while len <= 128 {
        let mut start = 0;
        while start < 256 {
            let zeta = z[k] as u64;
            k -= 1;
            for j in start..start + len {
                let t = f[j] as u64;
                f[j] = ((t + f[j + len] as u64) % q) as u32;
                let diff = (f[j + len] as u64 + q - t) % q;
                f[j + len] = (zeta * diff % q) as u32;
            }
            start += 2 * len;
        }
        len <<= 1;
    }
    for c in f.iter_mut() {
        *c = (*c as u64 * INV_128 % q) as u32;
    }
}

/// Pointwise product of two transformed polynomials: 128 products in
/// Z_q[X]/(X^2 - gamma_i) with gamma_i = zeta^(2*bitrev7(i)+1).
pub fn base_mul(a: &[u32; 256], b: &[u32; 256]) -> [u32; 256] {
    let q = NTT_Q as u64;
    let z = zetas_cached();
    let mut out = [0u32; 256];
    for i in 0..64 {
        // zeta^bitrev7(64+i) = zeta^(2*bitrev7(2i)+1), the modulus of the
        // CRT factor at positions 4i..4i+2; its negation serves 4i+2..4i+4.
        let gamma = z[64 + i] as u64;
        let pairs = [(4 * i, gamma), (4 * i + 2, q - gamma)];
        for (off, g) in pairs {
            let (a0, a1) = (a[off] as u64, a[off + 1] as u64);
            let (b0, b1) = (b[off] as u64, b[off + 1] as u64);
            out[off] = ((a0 * b0 + g * (a1 * b1 % q)) % q) as u32;
            out[off + 1] = ((a0 * b1 + a1 * b0) % q) as u32;
        }
    }
    out
}
