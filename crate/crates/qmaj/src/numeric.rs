//! Shared numeric substrate: compensated summation, log-space
//! combinatorics, integer-argument incomplete beta functions, and the
//! negative-binomial weights and tails that control every truncation in the
//! crate.
//!
//! Conventions
//! - All spectra are parametrized by `z = lambda^2` with `0 <= z < 1`.
//! - `nb_weight(n, k, z) = binom(n+k, n) (1-z)^(k+1) z^n` is a probability
//!   over `n = 0, 1, ...` for fixed `k` (a negative-binomial law); its upper
//!   tails are exactly regularized incomplete beta values, which is what
//!   makes analytic truncation control possible.

use crate::{Error, Result};
use std::sync::OnceLock;

/// Neumaier-compensated accumulator. The running compensation keeps the
/// error of a length-n sum near one ulp of the result rather than n ulps,
/// which matters for majorization margins at the 1e-12 scale.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.total()
}

/// `x ln x` with the measure-zero convention `0 ln 0 = 0`.
pub fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

const LN_FACT_TABLE_LEN: usize = 8192;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LN_FACT_TABLE_LEN);
        let mut acc = CompensatedSum::new();
        table.push(0.0);
        for j in 1..LN_FACT_TABLE_LEN {
            acc.add((j as f64).ln());
            table.push(acc.total());
        }
        table
    })
}

/// `ln n!`, exact-table for n < 8192 and Stirling beyond (keeps large-n
/// binomials overflow-free in log space).
pub fn ln_factorial(n: usize) -> f64 {
    let table = ln_fact_table();
    if n < table.len() {
        return table[n];
    }
    // Stirling series with three correction terms: relative error far below
    // 1e-15 at this magnitude.
    let x = (n + 1) as f64;
    let inv = 1.0 / x;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv * inv * (1.0 / 360.0 - inv * inv / 1260.0))
}

/// `ln binom(n, k)`; returns negative infinity when `k > n` (empty choice).
pub fn ln_binom(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `binom(n, k)` through log space; exact to ~1e-14 relative and safe from
/// overflow until the log itself exceeds ~709.
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    ln_binom(n, k).exp()
}

/// Negative-binomial weight `binom(n+k, n) (1-z)^(k+1) z^n` for `0 <= z < 1`.
pub fn nb_weight(n: usize, k: usize, z: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&z));
    if z == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let ln_w = ln_binom(n + k, n) + (k as f64 + 1.0) * (-z).ln_1p() + n as f64 * z.ln();
    ln_w.exp()
}

/// Weights `nb_weight(0..=n_max, k, z)` computed in one pass by the ratio
/// recurrence `w_{n+1} = w_n z (n+k+1)/(n+1)`; all values stay in [0, 1].
pub fn nb_weights(k: usize, z: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    if z == 0.0 {
        out.push(1.0);
        out.resize(n_max + 1, 0.0);
        return out;
    }
    let mut w = ((k as f64 + 1.0) * (-z).ln_1p()).exp();
    for n in 0..=n_max {
        out.push(w);
        w *= z * (n + k + 1) as f64 / (n + 1) as f64;
    }
    out
}

/// Regularized incomplete beta `I_z(a, b)` for integer `a >= 0`, `b >= 1`,
/// evaluated as the all-positive binomial tail
/// `sum_{j=a}^{a+b-1} binom(a+b-1, j) z^j (1-z)^(a+b-1-j)`.
/// `I_z(0, b) = 1` for every z, the limit consistent with `a B(z; a, b) -> 1`.
pub fn reg_inc_beta(z: f64, a: usize, b: usize) -> f64 {
    debug_assert!((0.0..=1.0).contains(&z));
    debug_assert!(b >= 1);
    if a == 0 {
        return 1.0;
    }
    if z == 0.0 {
        return 0.0;
    }
    if z == 1.0 {
        return 1.0;
    }
    let big_n = a + b - 1;
    let ln_z = z.ln();
    let ln_1mz = (-z).ln_1p();
    let mut acc = CompensatedSum::new();
    for j in a..=big_n {
        let ln_t = ln_binom(big_n, j) + j as f64 * ln_z + (big_n - j) as f64 * ln_1mz;
        acc.add(ln_t.exp());
    }
    acc.total().min(1.0)
}

/// Complete beta `B(a, b) = (a-1)! (b-1)! / (a+b-1)!` for integer arguments;
/// infinite at `a = 0` (the integrand's `x^(-1)` divergence).
pub fn complete_beta(a: usize, b: usize) -> f64 {
    debug_assert!(b >= 1);
    if a == 0 {
        return f64::INFINITY;
    }
    (ln_factorial(a - 1) + ln_factorial(b - 1) - ln_factorial(a + b - 1)).exp()
}

/// Incomplete beta `B(z; a, b) = integral_0^z x^(a-1) (1-x)^(b-1) dx` for
/// integer `a >= 0`, `b >= 1`, via `B(a, b) I_z(a, b)`.
///
/// At `a = 0` the integral diverges for any `z > 0`; the returned infinity
/// is deliberate, and consumers that need the `a -> 0` limit use
/// [`reg_inc_beta`] (equal to `a B(z; a, b)` up to the complete-beta
/// normalization), which is exactly 1 there.
pub fn inc_beta(z: f64, a: usize, b: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) || !z.is_finite() {
        return Err(Error::InvalidParameter {
            name: "z",
            value: z,
            reason: "incomplete beta argument must lie in [0, 1]",
        });
    }
    if b == 0 {
        return Err(Error::InvalidParameter {
            name: "b",
            value: 0.0,
            reason: "incomplete beta requires b >= 1",
        });
    }
    if a == 0 {
        return Ok(if z == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(complete_beta(a, b) * reg_inc_beta(z, a, b))
}

/// Mass of the `nb_weight(., k, z)` law at indices `>= n_lo`:
/// exactly `I_z(n_lo, k+1)`.
pub fn nb_tail(n_lo: usize, k: usize, z: f64) -> f64 {
    reg_inc_beta(z, n_lo, k + 1)
}

/// Scaled tail `z^(-n) I_z(n, k+1) =
/// sum_{i=0}^{k} binom(n+k, n+i) z^i (1-z)^(k-i)`, finite and smooth down to
/// `n = 0` (where it equals 1 at `z > 0` ... exactly the `a -> 0` limit that
/// the coefficient formulas need).
pub fn scaled_nb_tail(n: usize, k: usize, z: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&z));
    let ln_z = if z > 0.0 { z.ln() } else { f64::NEG_INFINITY };
    let ln_1mz = (-z).ln_1p();
    let mut acc = CompensatedSum::new();
    for i in 0..=k {
        let ln_t = ln_binom(n + k, n + i)
            + if i == 0 { 0.0 } else { i as f64 * ln_z }
            + (k - i) as f64 * ln_1mz;
        acc.add(ln_t.exp());
    }
    acc.total()
}

/// Smallest `N` such that the analytic tail beyond index `N` (that is,
/// `nb_tail(N+1, k, z)`) drops below `eps`. Uses the geometric estimate
/// `ln eps / ln z` as a jump-ahead, then bisects on the exact tail.
pub fn nb_dim_for_tail(k: usize, z: f64, eps: f64) -> usize {
    debug_assert!((0.0..1.0).contains(&z));
    debug_assert!(eps > 0.0);
    if z == 0.0 {
        return 0;
    }
    let geometric = (eps.ln() / z.ln()).ceil().max(1.0) as usize;
    let mut hi = geometric.max(8);
    while nb_tail(hi + 1, k, z) >= eps {
        hi *= 2;
    }
    let mut lo = 0usize;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if nb_tail(mid + 1, k, z) < eps {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Uniform draw in [0, 1) from a 64-bit word (53 mantissa bits).
pub fn uniform01(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One pair of independent standard normals by Box-Muller from two 64-bit
/// words. Kept dependency-free so seeded streams stay bit-reproducible
/// across platforms and crate versions.
pub fn standard_normal_pair(w1: u64, w2: u64) -> (f64, f64) {
    let u1 = 1.0 - uniform01(w1); // (0, 1]
    let u2 = uniform01(w2);
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    (radius * angle.cos(), radius * angle.sin())
}
