//! The analysis engine: decoding-noise model, closed-form failure-rate
//! bound, expansion-rate formulas, rejection probability, and Monte Carlo
//! validation of all of it.
//!
//! Failure probabilities live around 2^-170 .. 2^-263, so the bound is
//! evaluated in interval arithmetic at >= 512 bits and a result is accepted
//! only when the enclosure of log2(delta) is narrower than one bit.

pub mod marcum;
pub mod montecarlo;
pub mod real;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;

use crate::krm::{by_name, SchemeParams, PARAMETER_SETS};
use crate::kyber::KyberParams;
use crate::lattice::IntegerLattice;
use crate::ring::{centered_rep, compress, decompress, RingParams};
pub use marcum::marcum_q;
pub use montecarlo::{monte_carlo_noise, NoiseStats};
pub use real::{AnalysisError, Interval, Rat, RealCtx, MIN_DFR_PRECISION};

/// Per-coefficient decoding-noise model: the variance of the Gaussian part
/// and its three components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoiseModel {
    /// total per-coefficient variance of the Gaussian part
    pub sigma_g_sq: Rat,
    /// rounding-noise variance var(psi_du) used to build it
    pub var_psi: Rat,
    /// the three summands: k n eta1^2/4, k n eta1/2 (eta2/2 + var psi), eta2/2
    pub components: [Rat; 3],
}

/// sigma_G^2 = k n eta1^2/4 + k n eta1/2 (eta2/2 + var(psi_du)) + eta2/2.
pub fn sigma_g(ring: &RingParams, var_psi: Rat) -> NoiseModel {
    let k = ring.k as i128;
    let n = crate::ring::N as i128;
    let e1 = ring.eta1 as i128;
    let e2 = ring.eta2 as i128;
    let c0 = Rat::new(k * n * e1 * e1, 4);
    let c1 = Rat::new(k * n * e1, 2) * (Rat::new(e2, 2) + var_psi);
    let c2 = Rat::new(e2, 2);
    NoiseModel {
        sigma_g_sq: c0 + c1 + c2,
        var_psi,
        components: [c0, c1, c2],
    }
}

/// Tabulated rounding-noise variances for the Kyber modulus (two significant
/// figures, as used in the headline failure-rate numbers). Identity
/// compression has exactly zero rounding noise.
pub fn var_psi_tabulated(q: u32, d_u: u32) -> Option<Rat> {
    if 1u32 << d_u == q {
        return Some(Rat::new(0, 1));
    }
    if q != 3329 {
        return None;
    }
    match d_u {
        11 => Some(Rat::new(38, 100)),
        10 => Some(Rat::new(9, 10)),
        9 => Some(Rat::new(38, 10)),
        _ => None,
    }
}

/// Exhaustive rounding-noise variance: the exact variance of
/// centered(decompress(compress(x)) - x) over all q residues.
pub fn var_psi_empirical(q: u32, d_u: u32) -> Rat {
    let mut sum = 0i128;
    let mut sum_sq = 0i128;
    for x in 0..q {
        let e = centered_rep(
            (decompress(compress(x, d_u, q), d_u, q) + q - x) % q,
            q,
        ) as i128;
        sum += e;
        sum_sq += e * e;
    }
    let n = q as i128;
    Rat::new(sum_sq, n) - Rat::new(sum, n) * Rat::new(sum, n)
}

/// Noise model for a shipped set: tabulated variance when available (the
/// headline numbers are computed with the table), exhaustive otherwise.
pub fn noise_model_for(params: &SchemeParams) -> NoiseModel {
    let var = var_psi_tabulated(params.ring.q, params.ring.d_u)
        .unwrap_or_else(|| var_psi_empirical(params.ring.q, params.ring.d_u));
    sigma_g(&params.ring, var)
}

/// One distinct block shape inside a failure-rate report.
#[derive(Debug, Clone)]
pub struct DfrBlockReport {
    pub lattice: String,
    pub copies: u32,
    pub dim: usize,
    /// Marcum noncentrality argument a = r_cov(L1 block) / sigma_G
    pub a: f64,
    /// Marcum threshold argument b = r_pack(L2 block) / sigma_G
    pub b: f64,
    /// certified upper bound on log2 Q_{l/2}(a, b)
    pub log2_q: f64,
}

/// Evaluated failure-rate bound.
#[derive(Debug, Clone)]
pub struct DfrReport {
    pub set: String,
    pub precision: usize,
    pub sigma_g_sq: f64,
    pub blocks: Vec<DfrBlockReport>,
    /// certified upper bound on log2(delta)
    pub log2_delta: f64,
    /// lower end of the enclosure (None when it collapses to zero)
    pub log2_delta_lo: Option<f64>,
    /// width of the log2 enclosure in bits (None on the underflow path)
    pub interval_bits: Option<f64>,
    /// set when the bound was produced by the large-deviation fallback
    /// because the series arguments exceeded the exponent guard
    pub below_floor: bool,
}

/// Failure bound: delta <= 1 - prod_b (1 - Q_{l/2}(a_b, b_b))^m_b with
/// a_b = s1 r_cov(Lambda) / sigma_G and b_b = 2^(p-t) s1 r_pack(Lambda) /
/// sigma_G, taken per distinct block lattice (the single-lattice form is the
/// m-fold power; a mixed tower multiplies the independent block terms).
pub fn dfr_bound(
    params: &SchemeParams,
    noise: &NoiseModel,
    precision: usize,
) -> Result<DfrReport, AnalysisError> {
    let precision = precision.max(MIN_DFR_PRECISION);
    let mut ctx = RealCtx::new(precision);
    let s1 = params.cfg.s1 as i128;
    let p = params.cfg.p;

    // group identical blocks
    let mut groups: BTreeMap<String, (Arc<IntegerLattice>, u32, u32)> = BTreeMap::new();
    for block in &params.cfg.blocks {
        let e = groups
            .entry(block.lattice.name.clone())
            .or_insert_with(|| (block.lattice.clone(), block.t, 0));
        e.2 += 1;
    }

    let mut blocks = Vec::new();
    let mut product = ctx.one();
    let mut fallback_args: Vec<(f64, f64, usize, u32)> = Vec::new();
    let mut need_fallback = false;
    for (name, (lat, t, copies)) in &groups {
        let rcov = lat
            .rcov_sq_unit
            .ok_or_else(|| AnalysisError::BadArgument(format!("{name} has no covering radius")))?;
        let rcov_sq = Rat::new(*rcov.numer() as i128, *rcov.denom() as i128);
        let rpack = lat.rpack_sq_unit();
        let rpack_sq = Rat::new(*rpack.numer() as i128, *rpack.denom() as i128);
        let scale1 = Rat::new(s1 * s1, 1);
        let scale2 = Rat::new((s1 << (p - t)) * (s1 << (p - t)), 1);
        let a_sq = scale1 * rcov_sq / noise.sigma_g_sq;
        let b_sq = scale2 * rpack_sq / noise.sigma_g_sq;
        let a_f = rat_f64(a_sq).sqrt();
        let b_f = rat_f64(b_sq).sqrt();
        fallback_args.push((a_f, b_f, lat.dim, *copies));
        if need_fallback {
            continue;
        }

        match marcum_q(lat.dim as u32, a_sq, b_sq, &mut ctx) {
            Ok(q) => {
                let log2_q = q
                    .log2_hi()
                    .ok_or_else(|| AnalysisError::PrecisionExhausted("Q collapsed".into()))?;
                blocks.push(DfrBlockReport {
                    lattice: name.clone(),
                    copies: *copies,
                    dim: lat.dim,
                    a: a_f,
                    b: b_f,
                    log2_q,
                });
                let one = ctx.one();
                let complement = ctx.sub(&one, &q);
                let powed = ctx.pow_u32(&complement, *copies);
                product = ctx.mul(&product, &powed);
            }
            Err(AnalysisError::PrecisionExhausted(_)) => {
                // arguments too deep for the series: switch to the
                // large-deviation fallback over all blocks
                need_fallback = true;
            }
            Err(e) => return Err(e),
        }
    }
    if need_fallback {
        return chernoff_fallback(params, noise, precision, fallback_args, &groups);
    }

    let one = ctx.one();
    let delta = ctx.sub(&one, &product);
    let delta = ctx.clamp_unit(&delta);
    let log2_delta = delta
        .log2_hi()
        .ok_or_else(|| AnalysisError::PrecisionExhausted("bound collapsed to zero".into()))?;
    let log2_delta_lo = delta.log2_lo();
    let interval_bits = log2_delta_lo.map(|lo| log2_delta - lo);
    if interval_bits.map(|w| w >= 1.0).unwrap_or(true) {
        return Err(AnalysisError::PrecisionExhausted(format!(
            "log2(delta) enclosure is {interval_bits:?} bits wide"
        )));
    }
    Ok(DfrReport {
        set: params.name.to_string(),
        precision,
        sigma_g_sq: rat_f64(noise.sigma_g_sq),
        blocks,
        log2_delta,
        log2_delta_lo,
        interval_bits,
        below_floor: false,
    })
}

/// Large-deviation fallback for extreme arguments (e.g. the noiseless
/// limit): Q_{l/2}(a, b) <= Pr(chi2_l >= (b-a)^2) <= (u/l)^(l/2) e^{-(u-l)/2}
/// with u = (b-a)^2, all evaluated in log2 space.
fn chernoff_fallback(
    params: &SchemeParams,
    noise: &NoiseModel,
    precision: usize,
    args: Vec<(f64, f64, usize, u32)>,
    groups: &BTreeMap<String, (Arc<IntegerLattice>, u32, u32)>,
) -> Result<DfrReport, AnalysisError> {
    let mut per_block: Vec<f64> = Vec::new();
    let mut blocks = Vec::new();
    for ((a, b, dim, copies), name) in args.iter().zip(groups.keys()) {
        let u = (b - a) * (b - a);
        let l = *dim as f64;
        if *b <= *a || u <= l {
            return Err(AnalysisError::PrecisionExhausted(
                "arguments too deep for the series and outside the tail-bound regime".into(),
            ));
        }
        let log2_q = (l / 2.0) * (u / l).log2() - (u - l) / (2.0 * std::f64::consts::LN_2);
        blocks.push(DfrBlockReport {
            lattice: name.clone(),
            copies: *copies,
            dim: *dim,
            a: *a,
            b: *b,
            log2_q,
        });
        per_block.push(log2_q + (*copies as f64).log2());
    }
    // log2 of the union-bound sum
    let max = per_block.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = per_block.iter().map(|l| (l - max).exp2()).sum();
    Ok(DfrReport {
        set: params.name.to_string(),
        precision,
        sigma_g_sq: rat_f64(noise.sigma_g_sq),
        blocks,
        log2_delta: max + sum.log2(),
        log2_delta_lo: None,
        interval_bits: None,
        below_floor: true,
    })
}

fn rat_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact and linearized rejection probability: 1 - (qhat/q)^n and n(1 - qhat/q).
pub fn rejection_prob(q: u32, p: u32, n: u32) -> (Interval, f64) {
    let qhat = (q >> p) << p;
    let mut ctx = RealCtx::new(192);
    let ratio = ctx.interval_from_rat(Rat::new(qhat as i128, q as i128));
    let powed = ctx.pow_u32(&ratio, n);
    let one = ctx.one();
    let exact = ctx.sub(&one, &powed);
    let approx = n as f64 * (1.0 - qhat as f64 / q as f64);
    (exact, approx)
}

/// Exact ciphertext expansion rate: ciphertext bits over secret bits.
pub fn cer(params: &SchemeParams) -> Ratio<i64> {
    let ct_bits = params.ring.k as i64 * crate::ring::N as i64 * params.ring.d_u as i64
        + params.cfg.hint_bits() as i64;
    Ratio::new(ct_bits, params.secret_bits() as i64)
}

/// Expansion rate of the baseline scheme (256-bit messages).
pub fn cer_kyber(kp: &KyberParams) -> Ratio<i64> {
    let (num, den) = kp.cer_num_den();
    Ratio::new(num as i64, den as i64)
}

/// One comparison-table row.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub name: String,
    pub q: u32,
    pub d_u: u32,
    pub d_v: String,
    pub n_bits: usize,
    pub cer: Ratio<i64>,
    /// expansion reduction vs the baseline, in percent
    pub cer_r_percent: f64,
    pub log2_dfr: Option<f64>,
    /// true when the failure rate is the published reference value rather
    /// than one computed here (the baseline's rate comes from external
    /// tooling and is out of scope)
    pub dfr_is_reference: bool,
    pub rejection_exact: Option<f64>,
    pub rejection_approx: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub rows: Vec<TableRow>,
}

/// Builds the scheme-comparison table: the baseline plus every shipped
/// reconciliation set, with exact expansion rates and certified failure
/// bounds.
pub fn table5_report(precision: usize) -> Result<ComparisonTable, AnalysisError> {
    let kp = KyberParams::kyber768();
    let baseline_cer = cer_kyber(&kp);
    let mut rows = Vec::new();
    rows.push(TableRow {
        name: "kyber768-baseline".into(),
        q: kp.ring.q,
        d_u: kp.ring.d_u,
        d_v: kp.d_v.to_string(),
        n_bits: 256,
        cer: baseline_cer,
        cer_r_percent: 0.0,
        log2_dfr: Some(-164.0),
        dfr_is_reference: true,
        rejection_exact: None,
        rejection_approx: None,
    });
    for name in PARAMETER_SETS {
        let params = by_name(name).expect("shipped set");
        let noise = noise_model_for(&params);
        let report = dfr_bound(&params, &noise, precision)?;
        let c = cer(&params);
        let cer_r = Ratio::new(1, 1) - c / baseline_cer;
        let mut d_vs: Vec<String> = Vec::new();
        for b in &params.cfg.blocks {
            let s = b.d_v.to_string();
            if d_vs.last() != Some(&s) {
                d_vs.push(s);
            }
        }
        let (rej_exact, rej_approx) = if params.rejection_free() {
            (0.0, 0.0)
        } else {
            let (e, a) = rejection_prob(params.ring.q, params.cfg.p, crate::ring::N as u32);
            (e.to_f64(), a)
        };
        rows.push(TableRow {
            name: name.into(),
            q: params.ring.q,
            d_u: params.ring.d_u,
            d_v: d_vs.join("/"),
            n_bits: params.cfg.message_bit_count(),
            cer: c,
            cer_r_percent: 100.0 * rat64_f64(cer_r),
            log2_dfr: Some(report.log2_delta),
            dfr_is_reference: false,
            rejection_exact: Some(rej_exact),
            rejection_approx: Some(rej_approx),
        });
    }
    Ok(ComparisonTable { rows })
}

fn rat64_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<18} {:>5} {:>4} {:>5} {:>5} {:>8} {:>8} {:>10} {:>9} {:>9}",
            "set", "q", "d_u", "d_v", "N", "CER", "CER-R", "log2(dfr)", "P_rej", "P_rej~"
        )?;
        for r in &self.rows {
            let dfr = match (r.log2_dfr, r.dfr_is_reference) {
                (Some(v), false) => format!("{v:.1}"),
                (Some(v), true) => format!("{v:.0}*"),
                (None, _) => "-".into(),
            };
            writeln!(
                f,
                "{:<18} {:>5} {:>4} {:>5} {:>5} {:>8} {:>7.2}% {:>10} {:>9} {:>9}",
                r.name,
                r.q,
                r.d_u,
                r.d_v,
                r.n_bits,
                format_ratio(r.cer),
                r.cer_r_percent,
                dfr,
                r.rejection_exact
                    .map(|v| format!("{:.2}%", v * 100.0))
                    .unwrap_or_else(|| "-".into()),
                r.rejection_approx
                    .map(|v| format!("{:.2}%", v * 100.0))
                    .unwrap_or_else(|| "-".into()),
            )?;
        }
        writeln!(f, "(* published reference value, not computed here)")
    }
}

impl ComparisonTable {
    /// Machine-readable key=value lines, one row per set.
    pub fn to_kv_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!(
                "set={} q={} d_u={} d_v={} N={} cer={}/{} cer_decimal={} cer_r_percent={:.2} \
                 log2_dfr={} dfr_source={} rejection_exact={} rejection_approx={}\n",
                r.name,
                r.q,
                r.d_u,
                r.d_v,
                r.n_bits,
                r.cer.numer(),
                r.cer.denom(),
                rat64_f64(r.cer),
                r.cer_r_percent,
                r.log2_dfr.map(|v| format!("{v:.2}")).unwrap_or_else(|| "none".into()),
                if r.dfr_is_reference { "reference" } else { "computed" },
                r.rejection_exact.map(|v| format!("{v:.6}")).unwrap_or_else(|| "none".into()),
                r.rejection_approx.map(|v| format!("{v:.6}")).unwrap_or_else(|| "none".into()),
            ));
        }
        out
    }
}

fn format_ratio(r: Ratio<i64>) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{:.4}", rat64_f64(r))
    }
}
