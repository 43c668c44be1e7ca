//! Phase-insensitive single-mode Gaussian channels: parameter validity,
//! the attenuator-then-amplifier decomposition, moment-level action, and
//! full Kraus-level simulation on truncated density matrices.
//!
//! A channel is `(tau, n)`: quadrature means scale by `sqrt(tau)` and the
//! covariance maps as `gamma -> tau gamma + n I` (vacuum convention
//! `gamma = I`). Complete positivity requires `n >= |tau - 1|`. Every CP
//! channel splits as a beam-splitter of transmissivity `T` followed by a
//! quantum-limited amplifier of gain `G`, with `tau = T G` and
//! `n = G(1-T) + (G-1)`, hence `G = (n + tau + 1) / 2`.

use crate::fock::DensityMatrix;
use crate::numeric::{ln_binom, nb_tail, nb_weights, CompensatedSum};
use crate::{C64, Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

const CP_TOL: f64 = 1e-12;

/// Channel parameters: gain/attenuation `tau > 0` and added noise variance
/// `noise >= 0`. Construction validates numeric sanity only; complete
/// positivity is checked where it is needed so that invalid channels can be
/// represented and reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub tau: f64,
    pub noise: f64,
}

impl ChannelParams {
    pub fn new(tau: f64, noise: f64) -> Result<Self> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: tau,
                reason: "transmissivity/gain must be positive and finite",
            });
        }
        if !noise.is_finite() || noise < 0.0 {
            return Err(Error::InvalidParameter {
                name: "noise",
                value: noise,
                reason: "added noise must be nonnegative and finite",
            });
        }
        Ok(Self { tau, noise })
    }

    /// `noise - |tau - 1|`; nonnegative exactly when the channel is a
    /// completely positive map.
    pub fn cp_margin(&self) -> f64 {
        self.noise - (self.tau - 1.0).abs()
    }

    pub fn ensure_cp(&self) -> Result<()> {
        let margin = self.cp_margin();
        if margin < -CP_TOL {
            return Err(Error::NotCompletelyPositive { deficit: -margin });
        }
        Ok(())
    }
}

/// The attenuator/amplifier split of a CP channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelDecomposition {
    /// Beam-splitter transmissivity in [0, 1].
    pub t: f64,
    /// Amplifier gain, >= 1.
    pub g: f64,
    /// Squeeze parameter of the amplifier's dilation, `g = cosh^2 r`.
    pub r: f64,
}

/// Split `(tau, noise)` into loss followed by amplification:
/// `G = (noise + tau + 1)/2`, `T = tau / G`, `r = arccosh(sqrt(G))`.
/// Both defining relations then hold to rounding.
pub fn decompose(params: &ChannelParams) -> Result<ChannelDecomposition> {
    params.ensure_cp()?;
    let g = (params.noise + params.tau + 1.0) / 2.0;
    let g = g.max(1.0); // CP guarantees g >= 1 up to rounding
    let t = params.tau / g;
    let r = g.sqrt().acosh();
    Ok(ChannelDecomposition { t, g, r })
}

/// First and second quadrature moments of a single-mode Gaussian state,
/// vacuum normalized (`cov = I` for vacuum). Physicality is checked as
/// `det(cov) >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMoments {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

const SYMMETRY_TOL: f64 = 1e-12;
const PHYSICALITY_TOL: f64 = 1e-9;

impl GaussianMoments {
    pub fn new(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Result<Self> {
        let asym = (cov[0][1] - cov[1][0]).abs();
        if asym > SYMMETRY_TOL {
            return Err(Error::InvalidParameter {
                name: "cov",
                value: asym,
                reason: "covariance matrix must be symmetric",
            });
        }
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        if det < 1.0 - PHYSICALITY_TOL {
            return Err(Error::InvalidParameter {
                name: "det(cov)",
                value: det,
                reason: "covariance must satisfy the uncertainty bound det >= 1",
            });
        }
        Ok(Self { mean, cov })
    }

    pub fn vacuum() -> Self {
        Self {
            mean: [0.0, 0.0],
            cov: [[1.0, 0.0], [0.0, 1.0]],
        }
    }
}

/// Moment-level channel action: `mean -> sqrt(tau) mean`,
/// `cov -> tau cov + noise I`.
pub fn moment_map(moments: &GaussianMoments, params: &ChannelParams) -> Result<GaussianMoments> {
    params.ensure_cp()?;
    let s = params.tau.sqrt();
    let mut cov = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            cov[i][j] = params.tau * moments.cov[i][j] + if i == j { params.noise } else { 0.0 };
        }
    }
    GaussianMoments::new([s * moments.mean[0], s * moments.mean[1]], cov)
}

/// Pure-loss channel of transmissivity `T` in Kraus form,
/// `A_m = sum_n sqrt(binom(n, m)) (sqrt T)^(n-m) (sqrt(1-T))^m |n-m><n|`.
/// The output keeps the input dimension and the trace exactly (each
/// diagonal redistributes along a finite binomial law).
pub fn apply_loss(rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "transmissivity must lie in [0, 1]",
        });
    }
    let dim = rho.dim();
    if t == 1.0 {
        return Ok(rho.clone());
    }
    // kraus_coef[x][m] = sqrt(binom(x+m, m) T^x (1-T)^m): the amplitude for
    // keeping x of x+m photons.
    let ln_t = if t > 0.0 { t.ln() } else { f64::NEG_INFINITY };
    let ln_1mt = (-t).ln_1p();
    let coef = |kept: usize, lost: usize| -> f64 {
        let ln_c = ln_binom(kept + lost, lost)
            + if kept == 0 { 0.0 } else { kept as f64 * ln_t }
            + lost as f64 * ln_1mt;
        (0.5 * ln_c).exp()
    };
    let mut out: DMatrix<C64> = DMatrix::zeros(dim, dim);
    for m in 0..dim {
        for a in 0..dim - m {
            let ca = coef(a, m);
            if ca == 0.0 {
                continue;
            }
            for b in 0..dim - m {
                let cb = coef(b, m);
                if cb != 0.0 {
                    out[(a, b)] += rho.entries()[(a + m, b + m)] * (ca * cb);
                }
            }
        }
    }
    DensityMatrix::new(out)
}

/// Omitted mass if the amplifier output is truncated at `out_dim` entries:
/// each diagonal weight `rho_aa` spreads along the `k = a` spectrum, whose
/// remainder is an exact incomplete-beta tail.
pub fn amp_omitted_mass(rho: &DensityMatrix, g: f64, out_dim: usize) -> f64 {
    let z = 1.0 - 1.0 / g;
    let mut acc = CompensatedSum::new();
    for (a, w) in rho.diagonal().iter().enumerate() {
        if *w > 0.0 {
            if out_dim <= a {
                acc.add(*w);
            } else {
                acc.add(*w * nb_tail(out_dim - a, a, z));
            }
        }
    }
    acc.total()
}

/// Smallest output dimension for which the amplifier truncation stays
/// within `eps`.
pub fn required_amp_dim(rho: &DensityMatrix, g: f64, eps: f64) -> usize {
    let mut hi = rho.dim().max(1);
    while amp_omitted_mass(rho, g, hi) >= eps {
        hi *= 2;
    }
    let mut lo = rho.dim().min(hi);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if amp_omitted_mass(rho, g, mid) < eps {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Quantum-limited amplifier of gain `G >= 1`:
/// `out[a+n, b+n] += rho[a, b] sqrt(p_n^(a) p_n^(b))` with
/// `lambda^2 = 1 - 1/G`, truncated at `out_dim` and renormalized. The
/// omitted mass must fit in `eps`, otherwise the error reports the
/// dimension that would suffice.
pub fn apply_amp(rho: &DensityMatrix, g: f64, out_dim: usize, eps: f64) -> Result<DensityMatrix> {
    if !g.is_finite() || g < 1.0 {
        return Err(Error::InvalidParameter {
            name: "g",
            value: g,
            reason: "amplifier gain must satisfy G >= 1",
        });
    }
    if out_dim < rho.dim() {
        return Err(Error::Truncation {
            dim: out_dim,
            required: required_amp_dim(rho, g, eps),
            eps,
        });
    }
    let z = 1.0 - 1.0 / g;
    if z == 0.0 {
        let mut out: DMatrix<C64> = DMatrix::zeros(out_dim, out_dim);
        out.view_mut((0, 0), (rho.dim(), rho.dim()))
            .copy_from(rho.entries());
        return DensityMatrix::new(out);
    }
    let omitted = amp_omitted_mass(rho, g, out_dim);
    if omitted >= eps {
        return Err(Error::Truncation {
            dim: out_dim,
            required: required_amp_dim(rho, g, eps),
            eps,
        });
    }
    let dim = rho.dim();
    let sqrt_weights: Vec<Vec<f64>> = (0..dim)
        .map(|k| {
            nb_weights(k, z, out_dim - 1)
                .into_iter()
                .map(f64::sqrt)
                .collect()
        })
        .collect();
    let mut out: DMatrix<C64> = DMatrix::zeros(out_dim, out_dim);
    for a in 0..dim {
        for b in 0..dim {
            let rho_ab = rho.entries()[(a, b)];
            if rho_ab.norm_sqr() == 0.0 {
                continue;
            }
            let reach = out_dim - a.max(b);
            for n in 0..reach {
                out[(a + n, b + n)] += rho_ab * (sqrt_weights[a][n] * sqrt_weights[b][n]);
            }
        }
    }
    let trace: f64 = out.diagonal().iter().map(|c| c.re).sum();
    out /= C64::new(trace, 0.0);
    DensityMatrix::new(out)
}

/// Full channel action `A_G ( L_T (rho) )` with `(T, G)` from
/// [`decompose`].
pub fn apply_channel(
    rho: &DensityMatrix,
    params: &ChannelParams,
    out_dim: usize,
    eps: f64,
) -> Result<DensityMatrix> {
    let split = decompose(params)?;
    let lossy = apply_loss(rho, split.t)?;
    apply_amp(&lossy, split.g, out_dim, eps)
}

/// [`apply_channel`] with the output dimension chosen automatically from
/// the exact amplifier tail of the post-loss state.
pub fn apply_channel_auto(
    rho: &DensityMatrix,
    params: &ChannelParams,
    eps: f64,
) -> Result<DensityMatrix> {
    let split = decompose(params)?;
    let lossy = apply_loss(rho, split.t)?;
    let out_dim = required_amp_dim(&lossy, split.g, eps);
    apply_amp(&lossy, split.g, out_dim, eps)
}

/// Entropy of a thermal state with mean photon number `x`:
/// `g(x) = (x+1) ln(x+1) - x ln x`, zero at `x <= 0`. The closed-form
/// output entropy of the channel on vacuum is `g((tau + noise - 1) / 2)`.
pub fn thermal_entropy(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (x + 1.0) * (x + 1.0).ln() - x * x.ln()
}
