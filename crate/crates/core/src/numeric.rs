//! Special functions, log-space arithmetic and quadrature used by the core.

use alloc::vec::Vec;
use libm::{exp, expm1, fabs, lgamma, log, log1p};

pub(crate) const LN_2: f64 = core::f64::consts::LN_2;

pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    lgamma(a) + lgamma(b) - lgamma(a + b)
}

/// `log(exp(x) + exp(y))` without overflow.
pub(crate) fn log_add_exp(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x > y { (x, y) } else { (y, x) };
    hi + log1p(exp(lo - hi))
}

pub(crate) fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let mut acc = KahanSum::default();
    for v in &values {
        acc.add(exp(v - max));
    }
    max + log(acc.total())
}

/// `log(1 - exp(l))` for `l <= 0`.
pub(crate) fn ln_one_minus_exp(l: f64) -> f64 {
    if l > -LN_2 {
        log(-expm1(l))
    } else {
        log1p(-exp(l))
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if fabs(self.sum) >= fabs(x) {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

const CF_MAX_ITER: usize = 20_000;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fabs(d) < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fabs(d) < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fabs(d) < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < CF_EPS {
            break;
        }
    }
    h
}

/// Logarithms of the regularized incomplete beta function and its
/// complement, `(ln I_x(a,b), ln(1 - I_x(a,b)))`. The smaller tail is
/// evaluated directly so both stay accurate far into the tails.
pub(crate) fn ln_inc_beta(a: f64, b: f64, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if x >= 1.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    let ln_front = a * log(x) + b * log1p(-x) - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        let ln_lower = ln_front + log(beta_continued_fraction(a, b, x) / a);
        (ln_lower, ln_one_minus_exp(ln_lower))
    } else {
        let ln_upper = ln_front + log(beta_continued_fraction(b, a, 1.0 - x) / b);
        (ln_one_minus_exp(ln_upper), ln_upper)
    }
}

/// `ln(I_hi - I_lo)` given the outputs of [`ln_inc_beta`] at both ends,
/// choosing the representation with the least cancellation.
pub(crate) fn ln_inc_beta_difference(lo: (f64, f64), hi: (f64, f64)) -> f64 {
    let (lower_lo, upper_lo) = lo;
    let (lower_hi, upper_hi) = hi;
    let half = -LN_2;
    if lower_hi <= half {
        lower_hi + ln_one_minus_exp(lower_lo - lower_hi)
    } else if upper_lo <= half {
        upper_lo + ln_one_minus_exp(upper_hi - upper_lo)
    } else {
        log1p(-(exp(lower_lo) + exp(upper_hi)))
    }
}

/// Beta(a, b) density restricted to `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BetaSegment {
    pub a: f64,
    pub b: f64,
    pub lo: f64,
    pub hi: f64,
    ln_beta: f64,
    lo_tails: (f64, f64),
    hi_tails: (f64, f64),
    /// `ln ∫_lo^hi p^(a-1) (1-p)^(b-1) dp / B(a, b)`.
    pub ln_mass: f64,
}

impl BetaSegment {
    pub(crate) fn new(a: f64, b: f64, lo: f64, hi: f64) -> Self {
        let lo_tails = ln_inc_beta(a, b, lo);
        let hi_tails = ln_inc_beta(a, b, hi);
        Self {
            a,
            b,
            lo,
            hi,
            ln_beta: ln_beta(a, b),
            lo_tails,
            hi_tails,
            ln_mass: ln_inc_beta_difference(lo_tails, hi_tails),
        }
    }

    fn ln_density(&self, x: f64) -> f64 {
        (self.a - 1.0) * log(x) + (self.b - 1.0) * log1p(-x) - self.ln_beta
    }

    /// Inverse of the truncated distribution function: the point `x` in
    /// `[lo, hi]` with a fraction `u` of the segment's mass below it.
    pub(crate) fn quantile(&self, u: f64) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let u = u.clamp(0.0, 1.0);
        if u == 0.0 {
            return self.lo;
        }
        if u == 1.0 {
            return self.hi;
        }
        // Solve from whichever end keeps the target mass small.
        let from_below = u <= 0.5;
        let target = if from_below {
            self.ln_mass + log(u)
        } else {
            self.ln_mass + log1p(-u)
        };
        // g is increasing in x.
        let g = |x: f64| -> f64 {
            let tails = ln_inc_beta(self.a, self.b, x);
            if from_below {
                ln_inc_beta_difference(self.lo_tails, tails) - target
            } else {
                target - ln_inc_beta_difference(tails, self.hi_tails)
            }
        };
        let (mut left, mut right) = (self.lo, self.hi);
        let mut x = 0.5 * (left + right);
        for _ in 0..200 {
            let gx = g(x);
            if gx == 0.0 {
                return x;
            }
            if gx > 0.0 || gx.is_nan() {
                right = x;
            } else {
                left = x;
            }
            if right - left <= 1e-14 * right.max(1e-300) {
                break;
            }
            // d/dx of the log-mass is density / mass on the active side.
            let tails = ln_inc_beta(self.a, self.b, x);
            let ln_side = if from_below {
                ln_inc_beta_difference(self.lo_tails, tails)
            } else {
                ln_inc_beta_difference(tails, self.hi_tails)
            };
            let slope = exp(self.ln_density(x) - ln_side);
            let newton = x - gx / slope;
            let next = if newton.is_finite() && newton > left && newton < right {
                newton
            } else {
                0.5 * (left + right)
            };
            if fabs(next - x) <= 1e-15 * x.max(1e-300) {
                return next;
            }
            x = next;
        }
        x
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, fabs((kronrod - gauss) * half))
}

/// Globally adaptive Gauss–Kronrod integration of a smooth integrand.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (value, error) = gauss_kronrod_15(&f, a, b);
    let mut pieces: Vec<(f64, f64, f64, f64)> = alloc::vec![(a, b, value, error)];
    for _ in 0..4000 {
        let mut total = KahanSum::default();
        let mut total_error = 0.0;
        let mut worst = 0;
        for (i, piece) in pieces.iter().enumerate() {
            total.add(piece.2);
            total_error += piece.3;
            if piece.3 > pieces[worst].3 {
                worst = i;
            }
        }
        if total_error <= (rel_tol * fabs(total.total())).max(abs_tol) {
            return total.total();
        }
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gauss_kronrod_15(&f, lo, mid);
        let (v2, e2) = gauss_kronrod_15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    let mut total = KahanSum::default();
    for piece in &pieces {
        total.add(piece.2);
    }
    total.total()
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut sum = KahanSum::default();
    for v in values {
        sum.add(*v);
    }
    let mean = sum.total() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let mut sq = KahanSum::default();
    for v in values {
        sq.add((v - mean) * (v - mean));
    }
    let variance = sq.total() / (n - 1) as f64;
    (mean, libm::sqrt(variance / n as f64))
}
