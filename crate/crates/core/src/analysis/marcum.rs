//! Generalized Marcum Q-function in interval arithmetic.
//!
//! Q_M(a, b) is evaluated through the canonical series
//!
//! ```text
//!   Q_M(a,b) = e^(-a^2/2) * sum_{j>=0} (a^2/2)^j / j! * Q(M+j, b^2/2)
//! ```
//!
//! where Q(s, x) is the regularized upper incomplete gamma function. For
//! integer s that inner function is the finite sum e^-x sum_{k<s} x^k/k!,
//! updated incrementally across j; for half-integer s it climbs from
//! Q(1/2, x) = erfc(sqrt(x)). Since every term is a product of a Poisson
//! weight and a probability, the truncated tail is bounded by the Poisson
//! tail alone, which a geometric comparison pins rigorously.

use super::real::{AnalysisError, Interval, Rat, RealCtx};

/// Exponent guard: series arguments beyond this would push intermediate
/// exponents toward the backing library's limits.
const MAX_SERIES_ARG: f64 = 1.0e8;

/// Q_M(a, b) with M = m2/2 (so m2 = 1 means M = 1/2). Arguments enter as
/// exact squared rationals. The tail of the truncated series is added to the
/// upper endpoint, keeping the interval a rigorous enclosure.
pub fn marcum_q(m2: u32, a_sq: Rat, b_sq: Rat, ctx: &mut RealCtx) -> Result<Interval, AnalysisError> {
    if m2 == 0 {
        return Err(AnalysisError::BadArgument("order must be at least 1/2".into()));
    }
    if a_sq < Rat::new(0, 1) || b_sq < Rat::new(0, 1) {
        return Err(AnalysisError::BadArgument("arguments must be non-negative".into()));
    }
    if b_sq.numer() == &0 {
        return Ok(ctx.one()); // Q_M(a, 0) = 1
    }
    let arg_guard = |r: &Rat| *r.numer() as f64 / *r.denom() as f64 / 2.0 > MAX_SERIES_ARG;
    if arg_guard(&a_sq) || arg_guard(&b_sq) {
        return Err(AnalysisError::PrecisionExhausted(
            "series argument exceeds the exponent guard".into(),
        ));
    }

    let w = ctx.interval_from_rat(a_sq / Rat::new(2, 1));
    let x = ctx.interval_from_rat(b_sq / Rat::new(2, 1));
    let neg_x = ctx.neg(&x);
    let e_x = ctx.exp(&neg_x);

    // T = Q(M, x) and g = e^-x x^M / Gamma(M+1), the increment that advances
    // T to Q(M+1, x)
    let (mut t, mut g) = if m2 % 2 == 0 {
        let m = m2 / 2;
        let mut t = ctx.zero();
        let mut term = e_x.clone(); // e^-x x^k / k!
        for k in 0..m {
            t = ctx.add(&t, &term);
            let xk = ctx.mul(&term, &x);
            let k1 = ctx.interval_from_i64((k + 1) as i64);
            term = ctx.div_pos(&xk, &k1);
        }
        (t, term)
    } else {
        // half-integer order: climb from Q(1/2, x) = erfc(sqrt(x))
        let y = ctx.sqrt(&x);
        let mut t = erfc(&y, ctx)?;
        // term for s = 1/2 -> 3/2 step: e^-x x^(1/2) / Gamma(3/2),
        // Gamma(3/2) = sqrt(pi)/2
        let pi = ctx.pi();
        let sqrt_pi = ctx.sqrt(&pi);
        let two = ctx.interval_from_i64(2);
        let num = ctx.mul(&e_x, &y);
        let num2 = ctx.mul(&num, &two);
        let mut term = ctx.div_pos(&num2, &sqrt_pi);
        let steps = (m2 - 1) / 2;
        for k in 0..steps {
            t = ctx.add(&t, &term);
            // s = k + 1/2 -> term *= x / (s + 1) = x / ((2k+3)/2)
            let xk = ctx.mul(&term, &x);
            let s1 = ctx.interval_from_rat(Rat::new(2 * k as i128 + 3, 2));
            term = ctx.div_pos(&xk, &s1);
        }
        (t, term)
    };

    let neg_w = ctx.neg(&w);
    let mut pw = ctx.exp(&neg_w);
    let mut sum = ctx.zero();

    let w_hi_f64 = Interval::bigfloat_to_f64(&w.hi);
    // relative tail target: below the last 10 retained bits of the result
    let tail_bits = (ctx.prec as i64 - 10).max(64);

    let mut converged = false;
    for j in 0..200_000u32 {
        let term = ctx.mul(&pw, &t);
        sum = ctx.add(&sum, &term);
        // advance: T -> Q(M+j+1, x), g -> next increment, pw -> next weight
        t = ctx.add(&t, &g);
        let gx = ctx.mul(&g, &x);
        let denom = ctx.interval_from_rat(Rat::new(m2 as i128 + 2 * (j as i128) + 2, 2));
        g = ctx.div_pos(&gx, &denom);
        let pww = ctx.mul(&pw, &w);
        let j1 = ctx.interval_from_i64(j as i64 + 1);
        pw = ctx.div_pos(&pww, &j1);

        // Poisson tail: sum_{i>=j+1} pw_i <= pw_{j+1} * (j+2)/(j+2-w)
        let jnext = (j + 2) as f64;
        if jnext > w_hi_f64 + 1.0 {
            let tail_log2 = match Interval::log2_f64(&pw.hi) {
                Some(l) => l + (jnext / (jnext - w_hi_f64)).log2(),
                None => f64::NEG_INFINITY, // pw underflowed to zero: tail is zero
            };
            let sum_log2 = Interval::log2_f64(&sum.lo).ok_or_else(|| {
                AnalysisError::PrecisionExhausted("series sum collapsed to zero".into())
            })?;
            if tail_log2 < sum_log2 - tail_bits as f64 {
                // fold the tail into the upper endpoint
                let ratio = ctx.interval_from_rat(Rat::new(
                    (jnext as i128) * 1_000_001,
                    (jnext as i128 - w_hi_f64.ceil() as i128) * 1_000_000,
                ));
                let tail = ctx.mul(&pw, &ratio);
                let upper = ctx.add(&sum, &tail);
                sum = Interval { lo: sum.lo.clone(), hi: upper.hi };
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(AnalysisError::PrecisionExhausted(
            "series did not meet the tail target within the iteration budget".into(),
        ));
    }
    Ok(ctx.clamp_unit(&sum))
}

/// erfc on a non-negative interval argument, rigorous.
///
/// Small arguments use the alternating Taylor series of erf with guard
/// precision proportional to y^2 (the largest intermediate term is about
/// e^(y^2)); large arguments use the enveloping asymptotic series whose
/// remainder is bounded by the first omitted term.
pub fn erfc(y: &Interval, ctx: &mut RealCtx) -> Result<Interval, AnalysisError> {
    if y.lo.is_negative() {
        return Err(AnalysisError::BadArgument("erfc argument must be non-negative".into()));
    }
    if y.hi.is_zero() {
        return Ok(ctx.one());
    }
    let y_sq_hi = {
        let v = Interval::bigfloat_to_f64(&y.hi);
        v * v
    };

    if y_sq_hi <= ctx.prec as f64 {
        // Taylor branch. erfc(y) ~ e^(-y^2), so resolving it to prec bits
        // after the 1 - erf cancellation needs the tail pushed about
        // 1.443 y^2 bits below 1, and the working precision must clear both
        // that depth and the e^(y^2)-sized intermediate terms.
        let depth = (1.4427 * y_sq_hi) as usize;
        let guard = ctx.prec + 2 * depth + 128;
        let target = (ctx.prec + depth + 40) as i64;
        let mut gctx = RealCtx::new(guard);
        let y = y.clone();
        let y2 = gctx.mul(&y, &y);
        let mut term = y.clone(); // y^(2k+1) / k!
        let mut sum = gctx.zero();
        let mut k: i64 = 0;
        loop {
            let k21 = gctx.interval_from_i64(2 * k + 1);
            let c = gctx.div_pos(&term, &k21);
            let signed = if k % 2 == 0 { c.clone() } else { gctx.neg(&c) };
            sum = gctx.add(&sum, &signed);
            // next: term *= y^2 / (k+1)
            let ty = gctx.mul(&term, &y2);
            let k1 = gctx.interval_from_i64(k + 1);
            term = gctx.div_pos(&ty, &k1);
            k += 1;
            if (k as f64) > y_sq_hi {
                let c_log2 = Interval::log2_f64(&c.hi).unwrap_or(f64::NEG_INFINITY);
                if c_log2 < -(target as f64) {
                    // alternating series: tail bounded by the first omitted
                    // term; widen both endpoints by it
                    let widened = Interval {
                        lo: gctx.sub(&sum, &c).lo,
                        hi: gctx.add(&sum, &c).hi,
                    };
                    sum = widened;
                    break;
                }
            }
            if k > 1_000_000 {
                return Err(AnalysisError::PrecisionExhausted("erf series stalled".into()));
            }
        }
        let pi = gctx.pi();
        let sqrt_pi = gctx.sqrt(&pi);
        let two = gctx.interval_from_i64(2);
        let scaled = gctx.mul(&sum, &two);
        let erf = gctx.div_pos(&scaled, &sqrt_pi);
        let one = gctx.one();
        let out = gctx.sub(&one, &erf);
        Ok(ctx.clamp_unit(&out))
    } else {
        // asymptotic branch: erfc(y) = e^(-y^2)/(y sqrt(pi)) [sum_k (-1)^k
        // (2k-1)!!/(2y^2)^k + R], |R| <= first omitted term
        let y2 = ctx.mul(y, y);
        let neg_y2 = ctx.neg(&y2);
        let e = ctx.exp(&neg_y2);
        let pi = ctx.pi();
        let sqrt_pi = ctx.sqrt(&pi);
        let denom = ctx.mul(&sqrt_pi, y);
        let prefac = ctx.div_pos(&e, &denom);

        let two = ctx.interval_from_i64(2);
        let two_y2 = ctx.mul(&two, &y2);
        let mut term = ctx.one();
        let mut sum = ctx.zero();
        let target = ctx.prec as f64 + 10.0;
        let mut k: i64 = 0;
        loop {
            let signed = if k % 2 == 0 { term.clone() } else { ctx.neg(&term) };
            sum = ctx.add(&sum, &signed);
            let num = ctx.interval_from_i64(2 * k + 1);
            let tn = ctx.mul(&term, &num);
            term = ctx.div_pos(&tn, &two_y2);
            k += 1;
            let t_log2 = Interval::log2_f64(&term.hi).unwrap_or(f64::NEG_INFINITY);
            if t_log2 < -target {
                let widened = Interval {
                    lo: ctx.sub(&sum, &term).lo,
                    hi: ctx.add(&sum, &term).hi,
                };
                sum = widened;
                break;
            }
            if (k as f64) > y_sq_hi {
                return Err(AnalysisError::PrecisionExhausted(
                    "asymptotic erfc series cannot reach the target".into(),
                ));
            }
        }
        let out = ctx.mul(&prefac, &sum);
        Ok(ctx.clamp_unit(&out))
    }
}
