//! Integer lattices with exact normal forms, exact closest-vector decoding,
//! and the nested quantizer tower.
//!
//! A lattice is stored at an integer "storage scale": `basis` generates
//! `den * Lambda` where `Lambda` is the unit-scale lattice the radii tables
//! refer to. E8 needs `den = 2` (its unit-scale basis has half-integer
//! entries); every other shipped lattice stores at unit scale. All decode
//! paths stay in exact integer arithmetic.

pub mod decoder;
pub mod enumerate;
pub mod matrix;
pub mod tower;

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use decoder::CosetDecoder;
use enumerate::GsoData;
use matrix::IMat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("basis is singular")]
    SingularBasis,
    #[error("{0}")]
    BadConstruction(String),
    #[error("invariant-factor lcm {0} is not den * 2^t, tower exponent undefined")]
    NonPowerOfTwoIndex(String),
    #[error("message group is not a product of power-of-two cyclic groups")]
    NonIntegerBits,
    #[error("reconciliation hint has wrong length or padding")]
    MalformedHint,
    #[error("malformed lattice file: {0}")]
    ParseError(String),
}

#[derive(Debug, Clone)]
enum FastDecoder {
    /// coordinatewise rounding (ties up)
    Zn,
    /// union-of-cosets of a scaled D_n
    Coset(CosetDecoder),
}

/// An integer lattice with its derived normal-form data and decoders.
#[derive(Debug)]
pub struct IntegerLattice {
    pub name: String,
    pub dim: usize,
    /// canonical basis, lower-triangular Hermite form; columns are basis
    /// vectors of `den * Lambda`
    pub basis: Vec<Vec<i64>>,
    /// storage denominator: the stored lattice is `den * Lambda`
    pub den: i64,
    /// Smith invariant factors of the canonical basis
    pub snf_diag: Vec<BigInt>,
    /// least common multiple of the invariant factors
    pub pi_lcm: BigInt,
    /// tower exponent t with pi_lcm = den * 2^t, when that holds
    tower_t: Option<u32>,
    /// squared minimum distance at unit scale (verified against enumeration)
    pub dmin_sq_unit: Ratio<i64>,
    /// squared covering radius at unit scale (tabulated, one-sided checked);
    /// absent for user-loaded lattices
    pub rcov_sq_unit: Option<Ratio<i64>>,
    lll_gso: GsoData,
    fast: Option<FastDecoder>,
    svp_cache: OnceLock<i128>,
}

impl IntegerLattice {
    fn from_generators(
        name: &str,
        gens: &[Vec<i64>],
        dim: usize,
        den: i64,
        dmin_sq_unit: Ratio<i64>,
        rcov_sq_unit: Option<Ratio<i64>>,
        fast: Option<FastDecoder>,
    ) -> Result<Self, LatticeError> {
        let hnf = matrix::hnf_lower(gens, dim).map_err(LatticeError::BadConstruction)?;
        let basis = hnf.to_i64_rows();
        let snf = matrix::smith_normal_form(&hnf).map_err(|_| LatticeError::SingularBasis)?;
        let pi_lcm = snf.diag.iter().fold(BigInt::one(), |acc, d| acc.lcm(d));
        let tower_t = tower_exponent(&pi_lcm, den);

        // columns of the canonical basis feed LLL, then the float GSO
        let cols: Vec<Vec<i64>> = (0..dim)
            .map(|j| (0..dim).map(|i| basis[i][j]).collect())
            .collect();
        let reduced = matrix::lll_reduce(&cols);
        let lll_gso = enumerate::gso(&reduced);

        Ok(IntegerLattice {
            name: name.to_string(),
            dim,
            basis,
            den,
            snf_diag: snf.diag,
            pi_lcm,
            tower_t,
            dmin_sq_unit,
            rcov_sq_unit,
            lll_gso,
            fast,
            svp_cache: OnceLock::new(),
        })
    }

    /// The 1-dimensional integer lattice.
    pub fn z1() -> Arc<Self> {
        static CACHE: OnceLock<Arc<IntegerLattice>> = OnceLock::new();
        CACHE
            .get_or_init(|| {
                Arc::new(
                    IntegerLattice::from_generators(
                        "Z",
                        &[vec![1]],
                        1,
                        1,
                        Ratio::one(),
                        Some(Ratio::new(1, 4)),
                        Some(FastDecoder::Zn),
                    )
                    .unwrap(),
                )
            })
            .clone()
    }

    /// E8, stored doubled so the basis is integral. Unit-scale data:
    /// dmin^2 = 2 (packing radius sqrt(2)/2), covering radius 1, t = 1.
    pub fn e8() -> Arc<Self> {
        static CACHE: OnceLock<Arc<IntegerLattice>> = OnceLock::new();
        CACHE
            .get_or_init(|| {
                // doubled standard basis: 2*D8 generators plus the glue vector
                // 2*(1/2,...,1/2) = (1,...,1)
                let mut gens: Vec<Vec<i64>> = Vec::new();
                let mut g0 = vec![0i64; 8];
                g0[0] = 4;
                gens.push(g0);
                for i in 0..7 {
                    let mut g = vec![0i64; 8];
                    g[i] = -2;
                    g[i + 1] = 2;
                    gens.push(g);
                }
                gens.push(vec![1; 8]);
                Arc::new(
                    IntegerLattice::from_generators(
                        "E8",
                        &gens,
                        8,
                        2,
                        Ratio::from_integer(2),
                        Some(Ratio::one()),
                        Some(FastDecoder::Coset(CosetDecoder::e8_doubled())),
                    )
                    .unwrap(),
                )
            })
            .clone()
    }

    /// Barnes-Wall BW16 at the integer scale with dmin^2 = 8 (packing radius
    /// sqrt(2)), covering radius sqrt(6), t = 2.
    pub fn bw16() -> Arc<Self> {
        static CACHE: OnceLock<Arc<IntegerLattice>> = OnceLock::new();
        CACHE
            .get_or_init(|| {
                // generators: RM(1,4) codewords lifted to Z^16, plus 2*D16
                let mut gens = decoder::rm14_codewords();
                for i in 0..15 {
                    let mut g = vec![0i64; 16];
                    g[i] = 2;
                    g[i + 1] = 2;
                    gens.push(g);
                }
                let mut g = vec![0i64; 16];
                g[0] = 2;
                g[1] = -2;
                gens.push(g);
                let mut g4 = vec![0i64; 16];
                g4[0] = 4;
                gens.push(g4);
                Arc::new(
                    IntegerLattice::from_generators(
                        "BW16",
                        &gens,
                        16,
                        1,
                        Ratio::from_integer(8),
                        Some(Ratio::from_integer(6)),
                        Some(FastDecoder::Coset(CosetDecoder::bw16())),
                    )
                    .unwrap(),
                )
            })
            .clone()
    }

    /// Leech lattice at the integer scale with dmin^2 = 32 (packing radius
    /// 2*sqrt(2)), covering radius 4, t = 3.
    pub fn leech24() -> Arc<Self> {
        static CACHE: OnceLock<Arc<IntegerLattice>> = OnceLock::new();
        CACHE
            .get_or_init(|| {
                // generators: doubled Golay generator rows, 4*D24, and the
                // odd-coset glue vector
                let words = decoder::golay_codewords();
                let mut gens: Vec<Vec<i64>> = Vec::new();
                for bit in 0..12u32 {
                    let row = words[1usize << bit];
                    let mut g = vec![0i64; 24];
                    for (i, gi) in g.iter_mut().enumerate() {
                        *gi = 2 * ((row >> i) & 1) as i64;
                    }
                    gens.push(g);
                }
                for i in 0..23 {
                    let mut g = vec![0i64; 24];
                    g[i] = 4;
                    g[i + 1] = 4;
                    gens.push(g);
                }
                let mut g = vec![0i64; 24];
                g[0] = 4;
                g[1] = -4;
                gens.push(g);
                let mut g8 = vec![0i64; 24];
                g8[0] = 8;
                gens.push(g8);
                let mut glue = vec![1i64; 24];
                glue[0] = 5; // (1,...,1) + 4 e_1: coordinate sum 28 = 4 mod 8
                gens.push(glue);
                Arc::new(
                    IntegerLattice::from_generators(
                        "Leech24",
                        &gens,
                        24,
                        1,
                        Ratio::from_integer(32),
                        Some(Ratio::from_integer(16)),
                        Some(FastDecoder::Coset(CosetDecoder::leech24())),
                    )
                    .unwrap(),
                )
            })
            .clone()
    }

    /// Loads a lattice from the plain-text format: a dimension header line,
    /// then the basis matrix row-major (columns are basis vectors).
    pub fn from_text(name: &str, src: &str) -> Result<Self, LatticeError> {
        let mut nums = src.split_whitespace().map(|tok| {
            tok.parse::<i64>()
                .map_err(|e| LatticeError::ParseError(format!("{tok:?}: {e}")))
        });
        let dim = match nums.next() {
            Some(Ok(d)) if (1..=24).contains(&d) => d as usize,
            Some(Ok(d)) => {
                return Err(LatticeError::ParseError(format!(
                    "dimension {d} out of range 1..=24"
                )))
            }
            Some(Err(e)) => return Err(e),
            None => return Err(LatticeError::ParseError("missing dimension header".into())),
        };
        let mut entries = Vec::with_capacity(dim * dim);
        for v in nums {
            entries.push(v?);
        }
        if entries.len() != dim * dim {
            return Err(LatticeError::ParseError(format!(
                "expected {} matrix entries, found {}",
                dim * dim,
                entries.len()
            )));
        }
        let rows: Vec<Vec<i64>> = (0..dim)
            .map(|i| (0..dim).map(|j| entries[i * dim + j]).collect())
            .collect();
        if IMat::from_i64_rows(&rows).det().is_zero() {
            return Err(LatticeError::SingularBasis);
        }
        // columns are basis vectors
        let cols: Vec<Vec<i64>> = (0..dim)
            .map(|j| (0..dim).map(|i| entries[i * dim + j]).collect())
            .collect();
        let mut lat = IntegerLattice::from_generators(
            name,
            &cols,
            dim,
            1,
            Ratio::zero(), // replaced below by the enumerated minimum
            None,
            None,
        )?;
        let dmin = lat.shortest_vector_sq_storage();
        lat.dmin_sq_unit = Ratio::from_integer(
            i64::try_from(dmin).map_err(|_| LatticeError::ParseError("dmin overflow".into()))?,
        );
        Ok(lat)
    }

    /// Tower exponent t: `2^t Z^dim` is a sublattice of the unit-scale
    /// lattice; defined whenever the invariant-factor lcm equals den * 2^t.
    pub fn tower_t(&self) -> Result<u32, LatticeError> {
        self.tower_t.ok_or_else(|| {
            LatticeError::NonPowerOfTwoIndex(format!("{}/{}", self.pi_lcm, self.den))
        })
    }

    /// Exact closest point of `sigma * L_storage` to `x`, via the fixed
    /// complexity decoder when one is shipped, else exact enumeration.
    pub fn nearest(&self, x: &[i64], sigma: i64) -> Vec<i64> {
        match &self.fast {
            Some(FastDecoder::Zn) => decoder::nearest_zn(x, sigma),
            Some(FastDecoder::Coset(c)) => c.nearest(x, sigma),
            None => self.nearest_enum(x, sigma),
        }
    }

    /// Exact closest point by branch-and-bound enumeration.
    pub fn nearest_enum(&self, x: &[i64], sigma: i64) -> Vec<i64> {
        let init = self.rcov_sq_unit.map(|r| {
            let scaled = r * Ratio::from_integer(self.den * self.den * sigma * sigma);
            scaled.to_f64().unwrap()
        });
        let z = enumerate::closest_vector(&self.lll_gso, sigma, x, init, false);
        self.point_from_lll_coords(&z, sigma)
    }

    fn point_from_lll_coords(&self, z: &[i64], sigma: i64) -> Vec<i64> {
        (0..self.dim)
            .map(|d| {
                let mut acc: i128 = 0;
                for (j, &zj) in z.iter().enumerate() {
                    acc += self.lll_gso.cols[j][d] as i128 * zj as i128;
                }
                i64::try_from(acc * sigma as i128).expect("decoded point exceeds i64")
            })
            .collect()
    }

    /// x - Q(x): the representative of x in the (tie-broken) Voronoi cell.
    pub fn mod_lattice(&self, x: &[i64], sigma: i64) -> Vec<i64> {
        let q = self.nearest(x, sigma);
        x.iter().zip(&q).map(|(a, b)| a - b).collect()
    }

    /// Coordinates of a point of `sigma * L_storage` in the canonical basis.
    /// `None` when the vector is not in the lattice.
    pub fn coords(&self, point: &[i64], sigma: i64) -> Option<Vec<i128>> {
        let s = sigma as i128;
        let mut y = Vec::with_capacity(self.dim);
        for &v in point {
            let v = v as i128;
            if v % s != 0 {
                return None;
            }
            y.push(v / s);
        }
        matrix::solve_lower_triangular_i128(&self.basis, &y)
    }

    /// Lattice point of `sigma * L_storage` with the given canonical coords.
    pub fn point_from_coords(&self, z: &[i64], sigma: i64) -> Vec<i64> {
        (0..self.dim)
            .map(|d| {
                let mut acc: i128 = 0;
                for (j, &zj) in z.iter().enumerate() {
                    acc += self.basis[d][j] as i128 * zj as i128;
                }
                i64::try_from(acc * sigma as i128).expect("point exceeds i64")
            })
            .collect()
    }

    pub fn in_lattice(&self, point: &[i64], sigma: i64) -> bool {
        self.coords(point, sigma).is_some()
    }

    /// Exact squared minimum distance of the storage-scale lattice.
    pub fn shortest_vector_sq_storage(&self) -> i128 {
        *self
            .svp_cache
            .get_or_init(|| enumerate::shortest_vector_sq(&self.lll_gso))
    }

    /// Exact squared minimum distance at unit scale.
    pub fn shortest_vector_sq_unit(&self) -> Ratio<i64> {
        let s = self.shortest_vector_sq_storage();
        Ratio::new(i64::try_from(s).expect("dmin overflow"), self.den * self.den)
    }

    /// Squared packing radius at unit scale: dmin^2 / 4.
    pub fn rpack_sq_unit(&self) -> Ratio<i64> {
        self.shortest_vector_sq_unit() / Ratio::from_integer(4)
    }

    /// Lemma-1 membership: pi_lcm * Z^dim is contained in the storage lattice.
    pub fn pi_lcm_membership_holds(&self) -> bool {
        let pl = match self.pi_lcm.to_i64() {
            Some(v) => v,
            None => return false,
        };
        for i in 0..self.dim {
            let mut e = vec![0i64; self.dim];
            e[i] = pl;
            if !self.in_lattice(&e, 1) {
                return false;
            }
        }
        true
    }
}

fn tower_exponent(pi_lcm: &BigInt, den: i64) -> Option<u32> {
    let den = BigInt::from(den);
    if !(pi_lcm % &den).is_zero() {
        return None;
    }
    let mut q = pi_lcm / &den;
    let mut t = 0u32;
    while (&q % 2u8).is_zero() {
        q /= 2u8;
        t += 1;
    }
    if q.is_one() {
        Some(t)
    } else {
        None
    }
}
