//! Monte Carlo validation of the decoding-noise model.
//!
//! Each trial runs real key generation and encapsulation, reconstructs the
//! decapsulating party's correlated sample, and measures the actual decoding
//! noise n_e = (Gaussian part) + (quantization error), per block. Trials are
//! driven by per-trial seeds derived from one master seed, so runs are
//! deterministic and order-independent.

use num_traits::ToPrimitive;

use super::NoiseModel;
use crate::krm::{
    decompressed_u, encaps_transcript, keygen_transcript, EncapsTranscript, KeygenTranscript,
    SchemeParams,
};
use crate::ring::{self, centered_rep, vec_dot, Seed, N};

/// Measured noise of a single trial.
pub struct TrialNoise {
    /// centered Gaussian part per coefficient (noise minus quantization error)
    pub gaussian: Vec<i64>,
    /// per-block quantization error c_v
    pub cv_blocks: Vec<Vec<i64>>,
    /// per-block squared norm of the full decoding noise
    pub block_norm_sq: Vec<i128>,
}

/// Reconstructs the decoding noise from real transcripts: the Gaussian part
/// is the centered difference between the two parties' samples, and c_v is
/// the actual quantization error of the hint quantizer.
pub fn decoding_noise(
    params: &SchemeParams,
    kg: &KeygenTranscript,
    enc: &EncapsTranscript,
) -> TrialNoise {
    let q = params.ring.q;
    let u_prime = decompressed_u(params, &enc.ct);
    let x_b = vec_dot(&kg.sk.s, &u_prime, q);

    let gaussian: Vec<i64> = (0..N)
        .map(|i| centered_rep((x_b.coeffs[i] + q - enc.x.coeffs[i]) % q, q))
        .collect();

    let mut cv_blocks = Vec::with_capacity(params.cfg.blocks.len());
    let mut block_norm_sq = Vec::with_capacity(params.cfg.blocks.len());
    for block in &params.cfg.blocks {
        let dim = block.dim();
        let xs: Vec<i64> = enc.x.coeffs[block.offset..block.offset + dim]
            .iter()
            .map(|&v| v as i64)
            .collect();
        let q1 = block.lattice.nearest(&xs, block.sigma1);
        let cv: Vec<i64> = xs.iter().zip(&q1).map(|(a, b)| a - b).collect();
        let mut norm: i128 = 0;
        for i in 0..dim {
            let ne = cv[i] + gaussian[block.offset + i];
            norm += (ne as i128) * (ne as i128);
        }
        cv_blocks.push(cv);
        block_norm_sq.push(norm);
    }
    TrialNoise { gaussian, cv_blocks, block_norm_sq }
}

/// Aggregated Monte Carlo statistics.
#[derive(Debug, Clone)]
pub struct NoiseStats {
    pub trials: u32,
    pub coeff_samples: u64,
    /// empirical mean and variance of the Gaussian noise part
    pub gaussian_mean: f64,
    pub gaussian_variance: f64,
    /// empirical per-coefficient variance of the quantization error
    pub cv_variance: f64,
    /// the model's prediction for the Gaussian variance
    pub predicted_sigma_g_sq: f64,
    pub blocks_checked: u64,
    /// blocks whose noise left the decision cell's inscribed sphere
    pub failures: u64,
    /// min over blocks of r_pack(L2) - ||n_e||
    pub min_margin: f64,
    /// fraction of trials that needed at least one resample
    pub rejection_fraction: f64,
    /// histogram of ||n_e|| / r_pack(L2) in 21 buckets of width 0.05
    pub norm_histogram: Vec<u64>,
}

/// Runs `trials` independent keygen/encaps cycles with derived seeds and
/// aggregates the measured decoding noise.
pub fn monte_carlo_noise(
    params: &SchemeParams,
    noise: &NoiseModel,
    trials: u32,
    seed: &Seed,
) -> NoiseStats {
    let mut g_sum = 0i128;
    let mut g_sum_sq = 0i128;
    let mut cv_sum = 0i128;
    let mut cv_sum_sq = 0i128;
    let mut cv_count = 0u64;
    let mut blocks_checked = 0u64;
    let mut failures = 0u64;
    let mut min_margin = f64::INFINITY;
    let mut rejected_trials = 0u64;
    let mut hist = vec![0u64; 21];

    for trial in 0..trials {
        let mut domain = [0u8; 6];
        domain[..2].copy_from_slice(b"mc");
        domain[2..].copy_from_slice(&trial.to_le_bytes());
        let h: [u8; 64] = ring::xof::shake256_bytes(&seed.0, &domain);
        let kg_coins = Seed(h[..32].try_into().unwrap());
        let enc_coins = Seed(h[32..].try_into().unwrap());

        let kg = keygen_transcript(params, &kg_coins);
        let enc = encaps_transcript(params, &kg.pk, &enc_coins)
            .expect("rejection cap unreachable at shipped parameters");
        if enc.rejections > 0 {
            rejected_trials += 1;
        }

        let t = decoding_noise(params, &kg, &enc);
        for &g in &t.gaussian {
            g_sum += g as i128;
            g_sum_sq += (g as i128) * (g as i128);
        }
        for cv in &t.cv_blocks {
            for &c in cv {
                cv_sum += c as i128;
                cv_sum_sq += (c as i128) * (c as i128);
                cv_count += 1;
            }
        }
        for (block, &norm_sq) in params.cfg.blocks.iter().zip(&t.block_norm_sq) {
            blocks_checked += 1;
            let rp = block.rpack_sq_l2();
            // exact failure test: ||n_e||^2 >= r_pack^2
            let lhs = norm_sq * (*rp.denom() as i128);
            let rhs = *rp.numer() as i128;
            if lhs >= rhs {
                failures += 1;
            }
            let rp_f = (rp.to_f64().unwrap()).sqrt();
            let norm_f = (norm_sq as f64).sqrt();
            let margin = rp_f - norm_f;
            if margin < min_margin {
                min_margin = margin;
            }
            let bucket = ((norm_f / rp_f) * 20.0).floor() as usize;
            hist[bucket.min(20)] += 1;
        }
    }

    let n = (trials as u64 * N as u64) as f64;
    let g_mean = g_sum as f64 / n;
    let g_var = g_sum_sq as f64 / n - g_mean * g_mean;
    let cv_mean = cv_sum as f64 / cv_count.max(1) as f64;
    let cv_var = cv_sum_sq as f64 / cv_count.max(1) as f64 - cv_mean * cv_mean;

    NoiseStats {
        trials,
        coeff_samples: trials as u64 * N as u64,
        gaussian_mean: g_mean,
        gaussian_variance: g_var,
        cv_variance: cv_var,
        predicted_sigma_g_sq: *noise.sigma_g_sq.numer() as f64 / *noise.sigma_g_sq.denom() as f64,
        blocks_checked,
        failures,
        min_margin,
        rejection_fraction: rejected_trials as f64 / trials.max(1) as f64,
        norm_histogram: hist,
    }
}

impl NoiseStats {
    /// Human-readable summary block.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("trials                {}\n", self.trials));
        out.push_str(&format!("coefficient samples   {}\n", self.coeff_samples));
        out.push_str(&format!(
            "gaussian part         mean {:.4}, variance {:.2} (model {:.2}, ratio {:.4})\n",
            self.gaussian_mean,
            self.gaussian_variance,
            self.predicted_sigma_g_sq,
            self.gaussian_variance / self.predicted_sigma_g_sq
        ));
        out.push_str(&format!("quantization error    variance {:.2}\n", self.cv_variance));
        out.push_str(&format!(
            "blocks                {} checked, {} failures\n",
            self.blocks_checked, self.failures
        ));
        out.push_str(&format!("min margin            {:.2}\n", self.min_margin));
        out.push_str(&format!(
            "rejection fraction    {:.4}\n",
            self.rejection_fraction
        ));
        out.push_str("block-norm histogram  (||n_e||/r_pack, bucket width 0.05)\n");
        for (i, &c) in self.norm_histogram.iter().enumerate() {
            if c > 0 {
                out.push_str(&format!(
                    "  [{:.2}, {:.2})  {}\n",
                    i as f64 * 0.05,
                    (i + 1) as f64 * 0.05,
                    c
                ));
            }
        }
        out
    }
}
