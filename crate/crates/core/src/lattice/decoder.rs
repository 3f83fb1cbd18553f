//! Fixed-complexity exact closest-vector decoders.
//!
//! Every shipped lattice decomposes into a small union of cosets of a scaled
//! D_n lattice (integer vectors with even coordinate sum):
//!
//! * doubled E8            = 2*D8  u (2*D8 + 1)                 (2 cosets)
//! * BW16 (integer scale)  = U_c (c + 2*D16), c in RM(1,4)      (32 cosets)
//! * Leech24 (int. scale)  = U_{m,c} (rep(m,c) + 4*D24)         (8192 cosets)
//!
//! D_n admits an exact nearest-point rule: round every coordinate, and if the
//! coordinate sum has the wrong parity, re-round the single coordinate where
//! the opposite rounding is cheapest. Scanning the cosets with exact integer
//! costs therefore yields the true closest vector of the union.

/// Generator rows of the [16,5,8] first-order Reed-Muller code RM(1,4).
fn rm14_generators() -> [[u8; 16]; 5] {
    let mut g = [[0u8; 16]; 5];
    g[0] = [1; 16];
    for b in 0..4 {
        for i in 0..16 {
            g[b + 1][i] = ((i >> b) & 1) as u8;
        }
    }
    g
}

/// All 32 codewords of RM(1,4) as 0/1 vectors.
pub fn rm14_codewords() -> Vec<Vec<i64>> {
    let g = rm14_generators();
    (0..32u32)
        .map(|m| {
            let mut cw = [0u8; 16];
            for (b, row) in g.iter().enumerate() {
                if (m >> b) & 1 == 1 {
                    for (c, r) in cw.iter_mut().zip(row) {
                        *c ^= r;
                    }
                }
            }
            cw.iter().map(|&x| x as i64).collect()
        })
        .collect()
}

/// Generator rows of the extended binary Golay code [24,12,8] in the
/// bordered quadratic-residue form [I12 | B].
fn golay_generators() -> [[u8; 24]; 12] {
    const QR11: [usize; 5] = [1, 3, 4, 5, 9];
    let mut b = [[0u8; 12]; 12];
    for j in 1..12 {
        b[0][j] = 1;
        b[j][0] = 1;
    }
    for i in 1..12 {
        for j in 1..12 {
            let d = (j + 11 - i) % 11;
            if d == 0 || QR11.contains(&d) {
                b[i][j] = 1;
            }
        }
    }
    let mut g = [[0u8; 24]; 12];
    for (r, row) in g.iter_mut().enumerate() {
        row[r] = 1;
        row[12..].copy_from_slice(&b[r]);
    }
    g
}

/// All 4096 Golay codewords as packed 24-bit masks.
pub fn golay_codewords() -> Vec<u32> {
    let g = golay_generators();
    let rows: Vec<u32> = g
        .iter()
        .map(|row| row.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | ((b as u32) << i)))
        .collect();
    (0..4096u32)
        .map(|m| {
            let mut w = 0u32;
            for (b, &row) in rows.iter().enumerate() {
                if (m >> b) & 1 == 1 {
                    w ^= row;
                }
            }
            w
        })
        .collect()
}

/// A union-of-cosets description: lattice = U_j (reps[j] + dn_scale * D_dim),
/// all in the storage coordinates of the owning [`IntegerLattice`].
#[derive(Debug, Clone)]
pub struct CosetDecoder {
    pub dim: usize,
    pub dn_scale: i64,
    pub reps: Vec<Vec<i64>>,
    /// reps flattened row-major with values compacted to u8, for the scan
    flat_reps: Vec<u8>,
}

impl CosetDecoder {
    fn new(dim: usize, dn_scale: i64, reps: Vec<Vec<i64>>) -> Self {
        let flat_reps = reps
            .iter()
            .flat_map(|r| r.iter().map(|&v| u8::try_from(v).expect("rep values are small")))
            .collect();
        CosetDecoder { dim, dn_scale, reps, flat_reps }
    }

    pub fn e8_doubled() -> Self {
        Self::new(8, 2, vec![vec![0; 8], vec![1; 8]])
    }

    pub fn bw16() -> Self {
        Self::new(16, 2, rm14_codewords())
    }

    pub fn leech24() -> Self {
        let mut reps = Vec::with_capacity(8192);
        for m in 0..2i64 {
            for &cw in &golay_codewords() {
                let mut rep = vec![0i64; 24];
                for (i, r) in rep.iter_mut().enumerate() {
                    *r = m + 2 * ((cw >> i) & 1) as i64;
                }
                // the odd coset needs coordinate sum = 4 mod 8
                rep[0] += 4 * m;
                reps.push(rep);
            }
        }
        Self::new(24, 4, reps)
    }

    /// Exact closest point of `sigma * lattice` to `x`, in storage-times-sigma
    /// coordinates. Ties are resolved deterministically (first coset in rep
    /// order, lowest coordinate index for the parity fix).
    pub fn nearest(&self, x: &[i64], sigma: i64) -> Vec<i64> {
        debug_assert_eq!(x.len(), self.dim);
        let s = self.dn_scale * sigma;
        debug_assert!(s > 0);

        // per-coordinate, per-rep-value rounding data
        #[derive(Clone, Copy, Default)]
        struct Cell {
            y: i64,       // chosen multiple of s, relative to the rep
            cost: i64,    // (x - rep - y)^2
            penalty: i64, // extra cost of flipping to the second-nearest
            flip: i64,    // +-s, direction of that flip
            parity: u8,   // parity of y/s
        }
        // distinct rep coordinate values are tiny non-negative integers
        let stride = self.flat_reps.iter().copied().max().unwrap_or(0) as usize + 1;
        let mut cells = vec![Cell::default(); self.dim * stride];
        for i in 0..self.dim {
            for rv in 0..stride {
                let rep = rv as i64 * sigma;
                let centered = x[i] - rep;
                // round ties up
                let z = (2 * centered + s).div_euclid(2 * s);
                let y = z * s;
                let delta = centered - y; // in [-s/2, s/2)
                let cost = delta * delta;
                let alt = if delta >= 0 { s } else { -s };
                let alt_delta = delta - alt;
                cells[i * stride + rv] = Cell {
                    y,
                    cost,
                    penalty: alt_delta * alt_delta - cost,
                    flip: alt,
                    parity: (z.rem_euclid(2)) as u8,
                };
            }
        }

        let materialize = |cells: &[Cell], ri: usize, flip: Option<usize>| -> Vec<i64> {
            let rep = &self.reps[ri];
            let mut out = vec![0i64; self.dim];
            for i in 0..self.dim {
                let c = &cells[i * stride + rep[i] as usize];
                out[i] = rep[i] * sigma + c.y;
                if flip == Some(i) {
                    out[i] += c.flip;
                }
            }
            out
        };

        let mut best_cost = i64::MAX;
        let mut best: Option<(usize, Option<usize>)> = None; // (rep index, flipped coord)
        for (ri, rep) in self.flat_reps.chunks_exact(self.dim).enumerate() {
            let mut cost = 0i64;
            let mut parity = 0u8;
            let mut min_pen = i64::MAX;
            let mut min_pen_at = 0usize;
            for (i, &rv) in rep.iter().enumerate() {
                let c = &cells[i * stride + rv as usize];
                cost += c.cost;
                parity ^= c.parity;
                if c.penalty < min_pen {
                    min_pen = c.penalty;
                    min_pen_at = i;
                }
            }
            let (total, flip) = if parity == 1 {
                (cost + min_pen, Some(min_pen_at))
            } else {
                (cost, None)
            };
            if total < best_cost {
                best_cost = total;
                best = Some((ri, flip));
            } else if total == best_cost {
                // exact cross-coset tie: keep the lexicographically smaller
                // point. A common translation preserves that order, so the
                // decode stays equivariant under lattice shifts.
                let (bri, bflip) = best.unwrap();
                let cur = materialize(&cells, ri, flip);
                let old = materialize(&cells, bri, bflip);
                if cur < old {
                    best = Some((ri, flip));
                }
            }
        }

        let (ri, flip) = best.expect("nonempty rep set");
        materialize(&cells, ri, flip)
    }
}

/// Coordinatewise rounding to `sigma * Z^dim`, ties up.
pub fn nearest_zn(x: &[i64], sigma: i64) -> Vec<i64> {
    x.iter()
        .map(|&xi| (2 * xi + sigma).div_euclid(2 * sigma) * sigma)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golay_weight_distribution() {
        let mut hist = [0u32; 25];
        for w in golay_codewords() {
            hist[w.count_ones() as usize] += 1;
        }
        assert_eq!(hist[0], 1);
        assert_eq!(hist[8], 759);
        assert_eq!(hist[12], 2576);
        assert_eq!(hist[16], 759);
        assert_eq!(hist[24], 1);
        assert_eq!(hist.iter().sum::<u32>(), 4096);
    }

    #[test]
    fn rm14_weights() {
        let words = rm14_codewords();
        assert_eq!(words.len(), 32);
        for w in &words {
            let wt: i64 = w.iter().sum();
            assert!(wt == 0 || wt == 8 || wt == 16, "weight {wt}");
        }
    }

    #[test]
    fn e8_decoder_fixes_lattice_points() {
        let dec = CosetDecoder::e8_doubled();
        // 2*D8 point
        let p = vec![2, 2, 0, 0, 0, 0, 0, 0];
        assert_eq!(dec.nearest(&p, 1), p);
        // glue coset point
        let g = vec![1, 1, 1, 1, 1, 1, 1, 1];
        assert_eq!(dec.nearest(&g, 1), g);
        // scaled
        let ps: Vec<i64> = p.iter().map(|v| v * 52).collect();
        assert_eq!(dec.nearest(&ps, 52), ps);
    }

    #[test]
    fn e8_decoder_small_perturbation() {
        let dec = CosetDecoder::e8_doubled();
        let p = vec![104, 104, 0, 0, 0, 0, 0, 0]; // 52 * (2,2,0,..)
        let mut x = p.clone();
        x[3] += 20;
        x[7] -= 13;
        assert_eq!(dec.nearest(&x, 52), p);
    }

    #[test]
    fn leech_decoder_fixes_minimal_vectors() {
        let dec = CosetDecoder::leech24();
        // type (+-4)^2 0^22
        let mut v = vec![0i64; 24];
        v[0] = 4;
        v[1] = 4;
        assert_eq!(dec.nearest(&v, 1), v);
        // type (-3)(+-1)^23
        let mut w = vec![1i64; 24];
        w[5] = -3;
        assert_eq!(dec.nearest(&w, 1), w);
        // type (+-2)^8 on a Golay octad, even sign count
        let octad = golay_codewords()
            .into_iter()
            .find(|c| c.count_ones() == 8)
            .unwrap();
        let o: Vec<i64> = (0..24).map(|i| 2 * ((octad >> i) & 1) as i64).collect();
        assert_eq!(dec.nearest(&o, 1), o);
        // a coset representative plus a 4*D24 point stays fixed
        let mut pt = dec.reps[1].clone();
        pt[0] += 4;
        pt[1] += 4;
        assert_eq!(dec.nearest(&pt, 1), pt);
    }

    #[test]
    fn zn_rounding_ties_up() {
        assert_eq!(nearest_zn(&[5, -5, 13], 10), vec![10, 0, 10]);
        assert_eq!(nearest_zn(&[-15], 10), vec![-10]);
    }
}
