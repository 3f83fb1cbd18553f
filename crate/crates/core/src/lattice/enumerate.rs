//! Depth-first closest-vector enumeration over an LLL-reduced basis.
//!
//! The search tree is guided by a floating-point Gram-Schmidt decomposition,
//! but every full candidate is scored in exact integer arithmetic and the
//! shrinking radius always comes from an exactly-scored point. The float
//! bound is inflated by 2^-20 relative so rounding in the guidance can only
//! admit extra candidates, never drop the true minimizer.

/// Relative slack applied to the pruning bound.
const SLACK: f64 = 1.0 + 9.5367431640625e-7; // 1 + 2^-20

#[derive(Debug, Clone)]
pub struct GsoData {
    /// basis columns (ambient coords)
    pub cols: Vec<Vec<i64>>,
    /// mu[i][j] = <b_i, b*_j> / <b*_j, b*_j>, j < i
    mu: Vec<Vec<f64>>,
    /// squared norms of the Gram-Schmidt vectors
    bstar_sq: Vec<f64>,
    /// orthogonalized basis vectors (for target projection)
    bstar: Vec<Vec<f64>>,
}

pub fn gso(cols: &[Vec<i64>]) -> GsoData {
    let n = cols.len();
    let dim = cols[0].len();
    let mut bstar: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut bstar_sq = vec![0.0; n];
    for i in 0..n {
        let mut v: Vec<f64> = cols[i].iter().map(|&x| x as f64).collect();
        for j in 0..i {
            let num: f64 = cols[i]
                .iter()
                .zip(&bstar[j])
                .map(|(&a, &b)| a as f64 * b)
                .sum();
            let m = num / bstar_sq[j];
            mu[i][j] = m;
            for d in 0..dim {
                v[d] -= m * bstar[j][d];
            }
        }
        bstar_sq[i] = v.iter().map(|x| x * x).sum();
        bstar.push(v);
    }
    GsoData { cols: cols.to_vec(), mu, bstar_sq, bstar }
}

fn exact_dist_sq(cols: &[Vec<i64>], scale: i64, z: &[i64], x: &[i64]) -> i128 {
    let dim = x.len();
    let mut acc: i128 = 0;
    for d in 0..dim {
        let mut y: i128 = 0;
        for (j, &zj) in z.iter().enumerate() {
            y += cols[j][d] as i128 * zj as i128;
        }
        y *= scale as i128;
        let diff = x[d] as i128 - y;
        acc += diff * diff;
    }
    acc
}

/// Babai nearest-plane point, used to seed the search radius.
fn babai(g: &GsoData, scale: i64, x: &[i64]) -> Vec<i64> {
    let n = g.cols.len();
    let mut z = vec![0i64; n];
    let mut t: Vec<f64> = x.iter().map(|&v| v as f64 / scale as f64).collect();
    for i in (0..n).rev() {
        let num: f64 = t.iter().zip(&g.bstar[i]).map(|(a, b)| a * b).sum();
        let c = num / g.bstar_sq[i];
        let zi = c.round();
        z[i] = zi as i64;
        for d in 0..t.len() {
            t[d] -= zi * g.cols[i][d] as f64;
        }
    }
    z
}

struct Search<'a> {
    g: &'a GsoData,
    scale: i64,
    scale_sq: f64,
    x: &'a [i64],
    /// t_i = <x/scale, b*_i> / ||b*_i||^2
    t: Vec<f64>,
    exclude_zero: bool,
    z: Vec<i64>,
    bound: f64,
    best_d: i128,
    best_z: Option<Vec<i64>>,
}

impl Search<'_> {
    fn record(&mut self) {
        if self.exclude_zero && self.z.iter().all(|&v| v == 0) {
            return;
        }
        let d = exact_dist_sq(&self.g.cols, self.scale, &self.z, self.x);
        let better = match &self.best_z {
            None => true,
            Some(bz) => d < self.best_d || (d == self.best_d && is_lex_smaller(&self.z, bz)),
        };
        if better {
            if d < self.best_d {
                self.bound = (d as f64) * SLACK + 1e-6;
            }
            self.best_d = d;
            self.best_z = Some(self.z.clone());
        }
    }

    /// Enumerate level `i`, with `partial` the accumulated cost of the levels
    /// above. Candidates are visited center-out (base, base+1, base-1, ...,
    /// signed toward the fractional part), which makes their distances to the
    /// center non-decreasing; the first bound violation ends the level.
    fn dfs(&mut self, i: usize, partial: f64) {
        let n = self.g.cols.len();
        let mut c = self.t[i];
        for j in i + 1..n {
            c -= self.g.mu[j][i] * self.z[j] as f64;
        }
        let base = c.round() as i64;
        let toward = if c - c.round() >= 0.0 { 1i64 } else { -1i64 };
        for step in 0u32.. {
            let offset = ((step + 1) / 2) as i64;
            let zi = if step % 2 == 1 {
                base + toward * offset
            } else {
                base - toward * offset
            };
            let diff = zi as f64 - c;
            let cost = partial + diff * diff * self.g.bstar_sq[i] * self.scale_sq;
            if cost > self.bound {
                break;
            }
            self.z[i] = zi;
            if i == 0 {
                self.record();
            } else {
                self.dfs(i - 1, cost);
            }
        }
        self.z[i] = 0;
    }
}

/// Exact closest vector of `scale * L(cols)` to `x`.
///
/// `init_bound_sq`, when given, must be an upper bound on the squared
/// distance from `x` to the scaled lattice (e.g. from a covering radius).
/// Returns the coefficient vector; ties in exact distance resolve to the
/// lexicographically smallest coefficient vector.
pub fn closest_vector(
    g: &GsoData,
    scale: i64,
    x: &[i64],
    init_bound_sq: Option<f64>,
    exclude_zero: bool,
) -> Vec<i64> {
    let n = g.cols.len();
    let xs: Vec<f64> = x.iter().map(|&v| v as f64 / scale as f64).collect();
    let t: Vec<f64> = (0..n)
        .map(|i| {
            let num: f64 = xs.iter().zip(&g.bstar[i]).map(|(a, b)| a * b).sum();
            num / g.bstar_sq[i]
        })
        .collect();

    let mut search = Search {
        g,
        scale,
        scale_sq: (scale as f64) * (scale as f64),
        x,
        t,
        exclude_zero,
        z: vec![0i64; n],
        bound: f64::INFINITY,
        best_d: i128::MAX,
        best_z: None,
    };

    // seed with the Babai point when admissible
    let seed = babai(g, scale, x);
    if !(exclude_zero && seed.iter().all(|&v| v == 0)) {
        search.z = seed;
        search.record();
        search.z = vec![0; n];
    }
    if let Some(b) = init_bound_sq {
        let b = b * SLACK + 1e-6;
        if b < search.bound {
            search.bound = b;
        }
    }
    debug_assert!(search.bound.is_finite() || search.best_z.is_some() || exclude_zero);
    if !search.bound.is_finite() {
        // no admissible seed (exclude_zero with Babai at origin): fall back
        // to the shortest basis column as the initial bound
        let ub = g
            .cols
            .iter()
            .map(|col| {
                col.iter()
                    .map(|&v| (v as i128 * v as i128) * (scale as i128 * scale as i128))
                    .sum::<i128>()
            })
            .min()
            .unwrap();
        search.bound = ub as f64 * SLACK + 1e-6;
    }

    search.dfs(n - 1, 0.0);
    search.best_z.expect("bounded search found no lattice point")
}

fn is_lex_smaller(a: &[i64], b: &[i64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x < y;
        }
    }
    false
}

/// Exact squared length of a shortest nonzero vector of `L(cols)`.
pub fn shortest_vector_sq(g: &GsoData) -> i128 {
    let dim = g.cols[0].len();
    let origin = vec![0i64; dim];
    let z = closest_vector(g, 1, &origin, None, true);
    exact_dist_sq(&g.cols, 1, &z, &origin)
}
