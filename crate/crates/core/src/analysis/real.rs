//! Arbitrary-precision interval arithmetic for the failure-rate engine.
//!
//! Every operation rounds outward, so a true value contained in the input
//! intervals is contained in the output. Probabilities around 2^-300 are far
//! outside f64 range; the wide exponent of the backing floats carries them,
//! and the interval width certifies how many result bits are meaningful.

use astro_float::{BigFloat, Consts, RoundingMode};
use num_rational::Ratio;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("tail bound cannot reach the target precision: {0}")]
    PrecisionExhausted(String),
    #[error("invalid argument: {0}")]
    BadArgument(String),
}

/// Exact rational carried into the analysis layer.
pub type Rat = Ratio<i128>;

/// Minimum working precision for failure-rate computations.
pub const MIN_DFR_PRECISION: usize = 512;

/// Shared evaluation context: working precision plus the constants cache
/// the backing library needs for transcendental functions.
pub struct RealCtx {
    pub prec: usize,
    cc: Consts,
}

impl RealCtx {
    pub fn new(prec: usize) -> Self {
        RealCtx { prec, cc: Consts::new().expect("constants cache") }
    }

    fn rm_down(&self) -> RoundingMode {
        RoundingMode::Down
    }

    fn rm_up(&self) -> RoundingMode {
        RoundingMode::Up
    }

    pub fn interval_from_rat(&mut self, r: Rat) -> Interval {
        let num = BigFloat::from_i128(*r.numer(), self.prec);
        let den = BigFloat::from_i128(*r.denom(), self.prec);
        // i128 -> BigFloat is exact at >= 128 bits; only the division rounds
        let lo = num.div(&den, self.prec, self.rm_down());
        let hi = num.div(&den, self.prec, self.rm_up());
        Interval { lo, hi }
    }

    pub fn interval_from_i64(&mut self, v: i64) -> Interval {
        let x = BigFloat::from_i64(v, self.prec);
        Interval { lo: x.clone(), hi: x }
    }

    pub fn zero(&self) -> Interval {
        let z = BigFloat::from_i64(0, self.prec);
        Interval { lo: z.clone(), hi: z }
    }

    pub fn one(&self) -> Interval {
        let o = BigFloat::from_i64(1, self.prec);
        Interval { lo: o.clone(), hi: o }
    }

    pub fn add(&mut self, a: &Interval, b: &Interval) -> Interval {
        Interval {
            lo: a.lo.add(&b.lo, self.prec, self.rm_down()),
            hi: a.hi.add(&b.hi, self.prec, self.rm_up()),
        }
    }

    pub fn sub(&mut self, a: &Interval, b: &Interval) -> Interval {
        Interval {
            lo: a.lo.sub(&b.hi, self.prec, self.rm_down()),
            hi: a.hi.sub(&b.lo, self.prec, self.rm_up()),
        }
    }

    pub fn mul(&mut self, a: &Interval, b: &Interval) -> Interval {
        // general sign handling: outward-rounded min/max over the products
        let cands_lo = [
            a.lo.mul(&b.lo, self.prec, self.rm_down()),
            a.lo.mul(&b.hi, self.prec, self.rm_down()),
            a.hi.mul(&b.lo, self.prec, self.rm_down()),
            a.hi.mul(&b.hi, self.prec, self.rm_down()),
        ];
        let cands_hi = [
            a.lo.mul(&b.lo, self.prec, self.rm_up()),
            a.lo.mul(&b.hi, self.prec, self.rm_up()),
            a.hi.mul(&b.lo, self.prec, self.rm_up()),
            a.hi.mul(&b.hi, self.prec, self.rm_up()),
        ];
        let mut lo = cands_lo[0].clone();
        for c in &cands_lo[1..] {
            if c.cmp(&lo).map(|o| o < 0).unwrap_or(false) {
                lo = c.clone();
            }
        }
        let mut hi = cands_hi[0].clone();
        for c in &cands_hi[1..] {
            if c.cmp(&hi).map(|o| o > 0).unwrap_or(false) {
                hi = c.clone();
            }
        }
        Interval { lo, hi }
    }

    /// Division by a strictly positive interval.
    pub fn div_pos(&mut self, a: &Interval, b: &Interval) -> Interval {
        assert!(b.lo.is_positive(), "divisor interval must be positive");
        if a.lo.is_negative() {
            let lo = a.lo.div(&b.lo, self.prec, self.rm_down());
            let hi = if a.hi.is_negative() {
                a.hi.div(&b.hi, self.prec, self.rm_up())
            } else {
                a.hi.div(&b.lo, self.prec, self.rm_up())
            };
            return Interval { lo, hi };
        }
        Interval {
            lo: a.lo.div(&b.hi, self.prec, self.rm_down()),
            hi: a.hi.div(&b.lo, self.prec, self.rm_up()),
        }
    }

    pub fn neg(&self, a: &Interval) -> Interval {
        Interval { lo: a.hi.neg(), hi: a.lo.neg() }
    }

    /// e^a, monotone outward.
    pub fn exp(&mut self, a: &Interval) -> Interval {
        Interval {
            lo: a.lo.exp(self.prec, RoundingMode::Down, &mut self.cc),
            hi: a.hi.exp(self.prec, RoundingMode::Up, &mut self.cc),
        }
    }

    /// Natural log of a strictly positive interval.
    pub fn ln(&mut self, a: &Interval) -> Interval {
        assert!(a.lo.is_positive(), "ln needs a positive interval");
        Interval {
            lo: a.lo.ln(self.prec, RoundingMode::Down, &mut self.cc),
            hi: a.hi.ln(self.prec, RoundingMode::Up, &mut self.cc),
        }
    }

    /// Square root of a non-negative interval.
    pub fn sqrt(&mut self, a: &Interval) -> Interval {
        assert!(!a.lo.is_negative(), "sqrt needs a non-negative interval");
        Interval {
            lo: a.lo.sqrt(self.prec, RoundingMode::Down),
            hi: a.hi.sqrt(self.prec, RoundingMode::Up),
        }
    }

    /// a^n for a non-negative base by repeated squaring, outward.
    pub fn pow_u32(&mut self, a: &Interval, n: u32) -> Interval {
        assert!(!a.lo.is_negative(), "pow_u32 needs a non-negative base");
        let mut result = self.one();
        let mut base = a.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = self.mul(&result, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        result
    }

    /// pi as an interval.
    pub fn pi(&mut self) -> Interval {
        Interval {
            lo: self.cc.pi(self.prec, RoundingMode::Down),
            hi: self.cc.pi(self.prec, RoundingMode::Up),
        }
    }

    /// Intersects with [0, 1]; sound when the true value is known to be a
    /// probability.
    pub fn clamp_unit(&mut self, a: &Interval) -> Interval {
        let zero = BigFloat::from_i64(0, self.prec);
        let one = BigFloat::from_i64(1, self.prec);
        let lo = if a.lo.is_negative() { zero } else { a.lo.clone() };
        let hi = if a.hi.cmp(&one).map(|o| o > 0).unwrap_or(false) {
            one
        } else {
            a.hi.clone()
        };
        Interval { lo, hi }
    }
}

/// Closed interval of arbitrary-precision floats.
#[derive(Debug, Clone)]
pub struct Interval {
    pub lo: BigFloat,
    pub hi: BigFloat,
}

impl Interval {
    /// log2 of a float of any exponent, as f64 (for reporting).
    pub fn log2_f64(x: &BigFloat) -> Option<f64> {
        if x.is_zero() || x.is_negative() || x.is_nan() || x.is_inf() {
            return None;
        }
        let e = x.exponent()? as f64;
        let digits = x.mantissa_digits()?;
        let top = *digits.last()? as f64;
        let second = if digits.len() >= 2 {
            digits[digits.len() - 2] as f64
        } else {
            0.0
        };
        // value = frac * 2^e with frac in [1/2, 1)
        let frac = top / 2f64.powi(64) + second / 2f64.powi(128);
        Some(e + frac.log2())
    }

    pub fn log2_lo(&self) -> Option<f64> {
        Self::log2_f64(&self.lo)
    }

    pub fn log2_hi(&self) -> Option<f64> {
        Self::log2_f64(&self.hi)
    }

    /// Best-effort f64 midpoint-ish value (uses the upper endpoint).
    pub fn to_f64(&self) -> f64 {
        Self::bigfloat_to_f64(&self.hi)
    }

    pub fn bigfloat_to_f64(x: &BigFloat) -> f64 {
        if x.is_zero() {
            return 0.0;
        }
        if x.is_nan() {
            return f64::NAN;
        }
        if x.is_inf_pos() {
            return f64::INFINITY;
        }
        if x.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let sign = if x.is_negative() { -1.0 } else { 1.0 };
        match Self::log2_f64(&x.abs()) {
            Some(l2) => sign * 2f64.powf(l2),
            None => f64::NAN,
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// Width of the log2 image, i.e. how many leading bits of the value are
    /// pinned down. None when the interval touches zero.
    pub fn log2_width(&self) -> Option<f64> {
        Some(self.log2_hi()? - self.log2_lo()?)
    }
}
