//! Shared helpers for the integration suites: a generic adaptive-Simpson
//! quadrature used as an independent oracle for the special functions, and
//! small state-construction conveniences.

#![allow(dead_code)]

use qmaj::fock::FockState;
use qmaj::C64;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Build a normalized state from real amplitudes.
pub fn real_state(amps: &[f64]) -> FockState {
    let v: Vec<C64> = amps.iter().map(|&a| C64::new(a, 0.0)).collect();
    qmaj::fock::normalize(&v).expect("nonzero amplitude vector")
}

fn simpson(_f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(f, a, m, fa, flm, fm);
    let right = simpson(f, m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`. Entirely independent of the library's special-function code, so
/// it can serve as an oracle for it.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(&f, a, b, fa, fm, fb);
    adaptive(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// `integral_0^z t^(a-1) (1-t)^(b-1) dt` by quadrature (integer `a >= 1`).
pub fn beta_integral_oracle(z: f64, a: usize, b: usize) -> f64 {
    integrate(
        |t| t.powi(a as i32 - 1) * (1.0 - t).powi(b as i32 - 1),
        0.0,
        z,
        1e-15,
    )
}
