//! Exact integer matrix algebra for lattice construction: Hermite and Smith
//! normal forms with transform tracking, rational LLL reduction, and small
//! triangular solvers.
//!
//! Everything here runs once per lattice at construction time, so clarity
//! wins over speed: entries are `BigInt`, reductions are textbook.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

pub type BigRatio = Ratio<BigInt>;

/// Dense matrix over the integers, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BigInt>,
}

impl IMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = Self::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c);
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = BigInt::from(v);
            }
        }
        m
    }

    pub fn to_i64_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| {
                        i64::try_from(&self[(i, j)]).expect("matrix entry exceeds i64")
                    })
                    .collect()
            })
            .collect()
    }

    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.cols, other.rows);
        let mut out = IMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += f * row[src]
    fn add_row(&mut self, dst: usize, src: usize, f: &BigInt) {
        for j in 0..self.cols {
            let v = &self[(src, j)] * f;
            self[(dst, j)] += v;
        }
    }

    /// col[dst] += f * col[src]
    fn add_col(&mut self, dst: usize, src: usize, f: &BigInt) {
        for i in 0..self.rows {
            let v = &self[(i, src)] * f;
            self[(i, dst)] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -self[(r, j)].clone();
            self[(r, j)] = v;
        }
    }

    fn negate_col(&mut self, c: usize) {
        for i in 0..self.rows {
            let v = -self[(i, c)].clone();
            self[(i, c)] = v;
        }
    }

    /// Determinant by fraction-free Gaussian elimination (Bareiss).
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                let pivot = (k + 1..n).find(|&i| !m[(i, k)].is_zero());
                match pivot {
                    Some(i) => {
                        m.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)]) / &prev;
                    m[(i, j)] = v;
                }
                m[(i, k)] = BigInt::zero();
            }
            prev = m[(k, k)].clone();
        }
        sign * m[(n - 1, n - 1)].clone()
    }
}

impl std::ops::Index<(usize, usize)> for IMat {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// Column-style Hermite normal form of a generating set.
///
/// `gens` holds generator vectors (each of length `dim`, at least `dim` of
/// them spanning full rank). Returns the unique lower-triangular basis
/// matrix whose columns generate the same lattice, with positive diagonal
/// and off-diagonal row entries reduced into [0, diag).
pub fn hnf_lower(gens: &[Vec<i64>], dim: usize) -> Result<IMat, String> {
    // work matrix: columns are generators
    let mut m = IMat::zero(dim, gens.len());
    for (g, gen) in gens.iter().enumerate() {
        assert_eq!(gen.len(), dim);
        for (i, &v) in gen.iter().enumerate() {
            m[(i, g)] = BigInt::from(v);
        }
    }
    let cols = m.cols;
    for row in 0..dim {
        // clear row entries right of `row` using gcd column operations
        loop {
            let mut best: Option<usize> = None;
            for c in row..cols {
                if !m[(row, c)].is_zero() {
                    let better = match best {
                        None => true,
                        Some(b) => m[(row, c)].abs() < m[(row, b)].abs(),
                    };
                    if better {
                        best = Some(c);
                    }
                }
            }
            let pivot = best.ok_or_else(|| format!("generators are rank-deficient at row {row}"))?;
            m.swap_cols(row, pivot);
            if m[(row, row)].is_negative() {
                m.negate_col(row);
            }
            let mut done = true;
            for c in row + 1..cols {
                if m[(row, c)].is_zero() {
                    continue;
                }
                let f = -(&m[(row, c)] / &m[(row, row)]);
                m.add_col(c, row, &f);
                if !m[(row, c)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        // reduce earlier columns in this row into [0, diag)
        for c in 0..row {
            let f = -m[(row, c)].div_floor(&m[(row, row)]);
            if !f.is_zero() {
                m.add_col(c, row, &f);
            }
        }
    }
    // keep the square part
    let mut out = IMat::zero(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            out[(i, j)] = m[(i, j)].clone();
        }
    }
    Ok(out)
}

/// Smith normal form with transform tracking.
///
/// `b = u * diag * v` with `u`, `v` unimodular; `u_inv` and `v_inv` are the
/// tracked inverses. Diagonal entries are positive and each divides the next.
#[derive(Debug, Clone)]
pub struct Snf {
    pub u: IMat,
    pub u_inv: IMat,
    pub diag: Vec<BigInt>,
    pub v: IMat,
    pub v_inv: IMat,
}

pub fn smith_normal_form(b: &IMat) -> Result<Snf, String> {
    assert_eq!(b.rows, b.cols, "SNF of non-square matrices is not needed here");
    let n = b.rows;
    if b.det().is_zero() {
        return Err("singular basis".into());
    }
    let mut m = b.clone();
    // row ops accumulate into u_inv (m = u_inv * b * v_inv^-1 ... ), and their
    // inverses into u, so that b == u * m * v holds at every step.
    let mut u = IMat::identity(n);
    let mut u_inv = IMat::identity(n);
    let mut v = IMat::identity(n);
    let mut v_inv = IMat::identity(n);

    // elementary ops, applied to m and mirrored on the transforms
    macro_rules! row_add {
        ($dst:expr, $src:expr, $f:expr) => {{
            let f: BigInt = $f;
            m.add_row($dst, $src, &f);
            u_inv.add_row($dst, $src, &f);
            u.add_col($src, $dst, &(-&f));
        }};
    }
    macro_rules! col_add {
        ($dst:expr, $src:expr, $f:expr) => {{
            let f: BigInt = $f;
            m.add_col($dst, $src, &f);
            v_inv.add_col($dst, $src, &f);
            v.add_row($src, $dst, &(-&f));
        }};
    }

    for k in 0..n {
        loop {
            // move the absolutely smallest nonzero entry of the trailing
            // block to the pivot position
            let mut best: Option<(usize, usize)> = None;
            for i in k..n {
                for j in k..n {
                    if m[(i, j)].is_zero() {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some(p) => m[(i, j)].abs() < m[p].abs(),
                    };
                    if better {
                        best = Some((i, j));
                    }
                }
            }
            let (pi, pj) = best.expect("nonsingular matrix has a pivot");
            if pi != k {
                m.swap_rows(k, pi);
                u_inv.swap_rows(k, pi);
                u.swap_cols(k, pi);
            }
            if pj != k {
                m.swap_cols(k, pj);
                v_inv.swap_cols(k, pj);
                v.swap_rows(k, pj);
            }
            if m[(k, k)].is_negative() {
                m.negate_row(k);
                u_inv.negate_row(k);
                u.negate_col(k);
            }

            // eliminate the rest of column k and row k
            let mut clean = true;
            for i in k + 1..n {
                if !m[(i, k)].is_zero() {
                    let f = -(&m[(i, k)] / &m[(k, k)]);
                    row_add!(i, k, f);
                    if !m[(i, k)].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in k + 1..n {
                if !m[(k, j)].is_zero() {
                    let f = -(&m[(k, j)] / &m[(k, k)]);
                    col_add!(j, k, f);
                    if !m[(k, j)].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue;
            }

            // divisibility: pivot must divide every remaining entry
            let mut fixed = true;
            'scan: for i in k + 1..n {
                for j in k + 1..n {
                    if !(&m[(i, j)] % &m[(k, k)]).is_zero() {
                        // fold row i into row k and retry
                        row_add!(k, i, BigInt::one());
                        fixed = false;
                        break 'scan;
                    }
                }
            }
            if fixed {
                break;
            }
        }
    }

    let diag = (0..n).map(|i| m[(i, i)].clone()).collect();
    Ok(Snf { u, u_inv, diag, v, v_inv })
}

/// Exact inverse of a nonsingular square matrix, as a rational matrix.
pub fn inverse_rational(b: &IMat) -> Vec<Vec<BigRatio>> {
    let n = b.rows;
    assert_eq!(n, b.cols);
    let mut a: Vec<Vec<BigRatio>> = (0..n)
        .map(|i| (0..n).map(|j| BigRatio::from(b[(i, j)].clone())).collect())
        .collect();
    let mut inv: Vec<Vec<BigRatio>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRatio::one()
                    } else {
                        BigRatio::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .expect("nonsingular matrix");
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] /= p.clone();
            inv[col][j] /= p.clone();
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let av = a[col][j].clone() * f.clone();
                a[r][j] -= av;
                let iv = inv[col][j].clone() * f.clone();
                inv[r][j] -= iv;
            }
        }
    }
    inv
}

/// Solves `L z = y` for lower-triangular `L` with nonzero diagonal, requiring
/// an exact integer solution. Returns `None` when `y` is not in the column
/// span over the integers.
pub fn solve_lower_triangular_i128(l: &[Vec<i64>], y: &[i128]) -> Option<Vec<i128>> {
    let n = l.len();
    debug_assert_eq!(y.len(), n);
    let mut z = vec![0i128; n];
    for i in 0..n {
        let mut acc = y[i];
        for (j, &zj) in z.iter().enumerate().take(i) {
            acc -= l[i][j] as i128 * zj;
        }
        let d = l[i][i] as i128;
        if acc % d != 0 {
            return None;
        }
        z[i] = acc / d;
    }
    Some(z)
}

/// LLL reduction (delta = 3/4) over exact rationals. Columns of the returned
/// matrix are the reduced basis; the lattice is unchanged.
pub fn lll_reduce(basis_cols: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = basis_cols.len();
    let dim = basis_cols[0].len();
    let mut b: Vec<Vec<BigInt>> = basis_cols
        .iter()
        .map(|col| col.iter().map(|&v| BigInt::from(v)).collect())
        .collect();

    // Gram-Schmidt data as exact rationals
    let mut mu = vec![vec![BigRatio::zero(); n]; n];
    let mut bstar_sq = vec![BigRatio::zero(); n];

    let recompute = |b: &[Vec<BigInt>],
                     mu: &mut Vec<Vec<BigRatio>>,
                     bstar_sq: &mut Vec<BigRatio>| {
        // b*_i = b_i - sum_{j<i} mu_ij b*_j ; track via rational dot products
        let mut star: Vec<Vec<BigRatio>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut v: Vec<BigRatio> = b[i]
                .iter()
                .map(|x| BigRatio::from(x.clone()))
                .collect();
            for j in 0..i {
                let num: BigRatio = (0..dim)
                    .map(|d| BigRatio::from(b[i][d].clone()) * star[j][d].clone())
                    .sum();
                let m = num / bstar_sq[j].clone();
                mu[i][j] = m.clone();
                for d in 0..dim {
                    let sub = m.clone() * star[j][d].clone();
                    v[d] -= sub;
                }
            }
            bstar_sq[i] = v.iter().map(|x| x.clone() * x.clone()).sum();
            star.push(v);
        }
    };

    recompute(&b, &mut mu, &mut bstar_sq);
    let half = BigRatio::new(BigInt::one(), BigInt::from(2));
    let delta = BigRatio::new(BigInt::from(3), BigInt::from(4));

    let mut k = 1;
    while k < n {
        // size-reduce b_k against b_{k-1}..b_0
        for j in (0..k).rev() {
            if mu[k][j].clone().abs() > half {
                let r = mu[k][j].round().to_integer();
                for d in 0..dim {
                    let sub = &r * &b[j][d];
                    b[k][d] -= sub;
                }
                recompute(&b, &mut mu, &mut bstar_sq);
            }
        }
        // Lovasz condition
        let lhs = bstar_sq[k].clone();
        let rhs = (delta.clone() - mu[k][k - 1].clone() * mu[k][k - 1].clone())
            * bstar_sq[k - 1].clone();
        if lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            recompute(&b, &mut mu, &mut bstar_sq);
            k = k.max(2) - 1;
        }
    }

    b.iter()
        .map(|col| {
            col.iter()
                .map(|v| i64::try_from(v).expect("LLL output exceeds i64"))
                .collect()
        })
        .collect()
}
