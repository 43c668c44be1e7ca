//! Numerical exploration drivers: entropy tables over the resource family,
//! seeded randomized majorization scans, entropy-crossing localization, and
//! direct entanglement minimization over truncated input states.
//!
//! Everything here is deterministic given its inputs. Random drivers take a
//! `u64` seed and derive one counter-mode stream per sample (or per
//! restart), so results are independent of scheduling and, with the
//! `parallel` feature, of thread count.

use crate::fock::{
    entropy, normalize, schmidt_spectrum, state_moments, EntropyUnit, FockState,
};
use crate::numeric::{nb_dim_for_tail, standard_normal_pair, xlnx, CompensatedSum};
use crate::majorization::{majorizes, MajorizationVerdict};
use crate::squeezer::{
    auto_dim, output_state, required_b_dim, schmidt_vector, vacuum_entanglement, SqueezeParam,
};
use crate::{C64, Error, Result};
use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

// ---------------------------------------------------------------------------
// Entropy table over the resource family
// ---------------------------------------------------------------------------

/// Strictness resolution for the monotonicity verdicts.
pub const MONOTONE_TOL: f64 = 1e-10;

/// Entanglement entropy table `E[Psi^(k)(r)]` over a squeeze grid.
#[derive(Debug, Clone, Serialize)]
pub struct FockScanTable {
    pub k_max: usize,
    pub r_grid: Vec<f64>,
    /// `entropies[i][k]` is the output entanglement at `r_grid[i]`, input
    /// `|k>`, in nats.
    pub entropies: Vec<Vec<f64>>,
    /// Strictly increasing along `r` at every `k` (to [`MONOTONE_TOL`]).
    pub monotone_in_r: bool,
    /// Strictly increasing along `k` at every `r > 0`, and flat within
    /// tolerance at `r = 0` where every entry is zero.
    pub monotone_in_k: bool,
    /// Smallest consecutive increase along `r` (over strictly increasing
    /// grid pairs).
    pub min_r_gap: Option<f64>,
    /// Smallest consecutive increase along `k` over rows with `r > 0`.
    pub min_k_gap: Option<f64>,
}

impl FockScanTable {
    /// Flat `(r, k, entropy)` view, row-major.
    pub fn rows(&self) -> impl Iterator<Item = (f64, usize, f64)> + '_ {
        self.r_grid.iter().enumerate().flat_map(move |(i, &r)| {
            self.entropies[i]
                .iter()
                .enumerate()
                .map(move |(k, &e)| (r, k, e))
        })
    }
}

/// Tabulate `E[Psi^(k)(r)]` for `k = 0..=k_max` over an ascending squeeze
/// grid, with per-entry truncation chosen from the exact spectral tail.
pub fn fock_scan(k_max: usize, r_grid: &[f64], eps: f64) -> Result<FockScanTable> {
    if r_grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "r_grid",
            value: 0.0,
            reason: "the squeeze grid must be nonempty",
        });
    }
    for pair in r_grid.windows(2) {
        if !(pair[0] <= pair[1]) {
            return Err(Error::InvalidParameter {
                name: "r_grid",
                value: pair[1],
                reason: "the squeeze grid must be sorted ascending",
            });
        }
    }
    let mut entropies = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let sq = SqueezeParam::from_r(r)?;
        let mut row = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let spectrum = schmidt_vector(k, sq.lambda, auto_dim(k, sq.lambda, eps))?;
            row.push(entropy(&spectrum, EntropyUnit::Nats));
        }
        entropies.push(row);
    }

    let mut monotone_in_r = true;
    let mut min_r_gap: Option<f64> = None;
    for k in 0..=k_max {
        for i in 0..r_grid.len() - 1 {
            if r_grid[i + 1] > r_grid[i] {
                let gap = entropies[i + 1][k] - entropies[i][k];
                monotone_in_r &= gap > MONOTONE_TOL;
                min_r_gap = Some(min_r_gap.map_or(gap, |g: f64| g.min(gap)));
            }
        }
    }
    let mut monotone_in_k = true;
    let mut min_k_gap: Option<f64> = None;
    for (i, &r) in r_grid.iter().enumerate() {
        for k in 0..k_max {
            let gap = entropies[i][k + 1] - entropies[i][k];
            if r > 0.0 {
                monotone_in_k &= gap > MONOTONE_TOL;
                min_k_gap = Some(min_k_gap.map_or(gap, |g: f64| g.min(gap)));
            } else {
                // Zero squeezing: all entropies vanish identically.
                monotone_in_k &= gap.abs() <= MONOTONE_TOL;
            }
        }
    }
    Ok(FockScanTable {
        k_max,
        r_grid: r_grid.to_vec(),
        entropies,
        monotone_in_r,
        monotone_in_k,
        min_r_gap,
        min_k_gap,
    })
}

// ---------------------------------------------------------------------------
// Seeded randomized majorization scans
// ---------------------------------------------------------------------------

/// How sampled input states are conditioned on the zero-mean hypothesis
/// class (`<a> = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroMeanMode {
    /// Keep raw sphere-uniform samples.
    Off,
    /// Reject and redraw until `|<a>|` falls under a loose threshold
    /// ([`FILTER_THRESHOLD`]); samples are approximately zero-mean.
    Filter,
    /// Project each sample onto the zero-mean manifold by descending the
    /// penalty `|<a>|^2` along the unit sphere; samples are zero-mean to
    /// [`PROJECTION_TOL`].
    Penalty,
}

/// Acceptance threshold on `|<a>|` in [`ZeroMeanMode::Filter`]. Rejection
/// with a tight threshold is hopeless (a sphere-uniform sample has
/// `|<a>|` of order one), so the filter is loose by design; use
/// [`ZeroMeanMode::Penalty`] for exact conditioning.
pub const FILTER_THRESHOLD: f64 = 5e-2;
/// Residual `|<a>|` below which a projected sample counts as zero-mean.
pub const PROJECTION_TOL: f64 = 1e-10;

const FILTER_MAX_REDRAWS: usize = 200_000;
const PROJECTION_MAX_ITERS: usize = 2_000;

/// What a scan does with each sampled state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanMode {
    /// Check that the vacuum-input output spectrum majorizes the sample's
    /// output spectrum at fixed squeezing `r`.
    Vacuum { r: f64 },
    /// Check that output spectra weaken monotonically along an ascending
    /// squeeze grid: each grid point's spectrum majorizes the next one's.
    Chain { r_grid: Vec<f64> },
}

/// Configuration of a randomized majorization scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Input truncation: samples live on the unit sphere in `C^dim`.
    pub dim: usize,
    /// Number of samples.
    pub count: usize,
    /// Base seed; sample `i` reads stream `i` of the generator seeded here,
    /// so any subset of samples can be reproduced independently.
    pub seed: u64,
    /// Conclusiveness threshold handed to the majorization check.
    pub eta: f64,
    /// Truncation budget for output spectra.
    pub eps: f64,
    pub zero_mean: ZeroMeanMode,
    pub mode: ScanMode,
}

/// Per-sample scan record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleOutcome {
    pub index: usize,
    /// Mean photon number of the drawn input.
    pub mean_photon: f64,
    /// `|<a>|` of the drawn input after conditioning.
    pub mean_lowering_abs: f64,
    /// Redraws spent by the filter (zero in other modes).
    pub redraws: usize,
    /// Worst prefix-sum margin across the checks this sample ran.
    pub margin: f64,
    /// Whether every majorization check held.
    pub holds: bool,
    /// Set when conditioning failed or a check was inconclusive at `eta`;
    /// such samples are excluded from the verdict counts.
    pub inconclusive: bool,
}

/// Aggregate scan report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub config: ScanConfig,
    pub samples: usize,
    pub violations: usize,
    pub inconclusive: usize,
    /// Worst margin over conclusive samples (`+inf` if none).
    pub worst_margin: f64,
    /// Index of the sample attaining `worst_margin`.
    pub worst_sample: Option<usize>,
    pub mean_photon_avg: f64,
    pub mean_photon_max: f64,
    pub mean_lowering_abs_avg: f64,
    pub mean_lowering_abs_max: f64,
}

fn draw_amplitudes(rng: &mut ChaCha8Rng, dim: usize) -> Vec<C64> {
    (0..dim)
        .map(|_| {
            let (x, y) = standard_normal_pair(rng.next_u64(), rng.next_u64());
            C64::new(x, y)
        })
        .collect()
}

/// `<a>` of unit amplitudes together with the gradient of `|<a>|^2` in
/// interleaved real coordinates `[re c_0, im c_0, re c_1, ...]`.
fn lowering_and_grad(c: &[C64]) -> (C64, Vec<f64>) {
    let dim = c.len();
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for m in 0..dim.saturating_sub(1) {
        let term = ((m + 1) as f64).sqrt() * c[m].conj() * c[m + 1];
        re.add(term.re);
        im.add(term.im);
    }
    let a = C64::new(re.total(), im.total());
    let abar = a.conj();
    let mut grad = vec![0.0; 2 * dim];
    for m in 0..dim {
        let up = if m + 1 < dim {
            ((m + 1) as f64).sqrt() * c[m + 1]
        } else {
            C64::new(0.0, 0.0)
        };
        let down = if m > 0 {
            (m as f64).sqrt() * c[m - 1].conj()
        } else {
            C64::new(0.0, 0.0)
        };
        grad[2 * m] = 2.0 * (abar * (up + down)).re;
        grad[2 * m + 1] = 2.0 * (abar * (up - down)).im;
    }
    (a, grad)
}

fn project_tangent(x: &[f64], g: &mut [f64]) {
    let dot: f64 = x.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
    for (gi, xi) in g.iter_mut().zip(x.iter()) {
        *gi -= dot * xi;
    }
}

fn renormalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= norm;
    }
}

fn to_complex(x: &[f64]) -> Vec<C64> {
    x.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect()
}

fn to_real(c: &[C64]) -> Vec<f64> {
    c.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Descend `|<a>|^2` along the unit sphere until the mean-lowering residual
/// is below [`PROJECTION_TOL`]. Returns `None` when the descent stalls.
fn project_zero_mean(c: &[C64]) -> Option<Vec<C64>> {
    let mut x = to_real(c);
    renormalize(&mut x);
    for _ in 0..PROJECTION_MAX_ITERS {
        let cs = to_complex(&x);
        let (a, mut grad) = lowering_and_grad(&cs);
        let value = a.norm_sqr();
        if value.sqrt() <= PROJECTION_TOL {
            return Some(cs);
        }
        project_tangent(&x, &mut grad);
        let gnorm_sq: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm_sq == 0.0 {
            return None; // critical point off the manifold
        }
        let mut step = 1.0;
        let mut advanced = false;
        for _ in 0..60 {
            let mut trial = x.clone();
            for (t, g) in trial.iter_mut().zip(grad.iter()) {
                *t -= step * g;
            }
            renormalize(&mut trial);
            let (ta, _) = lowering_and_grad(&to_complex(&trial));
            if ta.norm_sqr() <= value - 1e-4 * step * gnorm_sq {
                x = trial;
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if !advanced {
            return None;
        }
    }
    let cs = to_complex(&x);
    let (a, _) = lowering_and_grad(&cs);
    if a.norm() <= PROJECTION_TOL {
        Some(cs)
    } else {
        None
    }
}

struct ConditionedSample {
    state: Option<FockState>,
    redraws: usize,
}

fn condition_sample(rng: &mut ChaCha8Rng, dim: usize, mode: ZeroMeanMode) -> ConditionedSample {
    match mode {
        ZeroMeanMode::Off => loop {
            if let Ok(state) = normalize(&draw_amplitudes(rng, dim)) {
                return ConditionedSample {
                    state: Some(state),
                    redraws: 0,
                };
            }
        },
        ZeroMeanMode::Filter => {
            let mut redraws = 0;
            loop {
                let Ok(state) = normalize(&draw_amplitudes(rng, dim)) else {
                    continue;
                };
                if state_moments(&state).mean_lowering().norm() <= FILTER_THRESHOLD {
                    return ConditionedSample {
                        state: Some(state),
                        redraws,
                    };
                }
                redraws += 1;
                if redraws >= FILTER_MAX_REDRAWS {
                    return ConditionedSample {
                        state: None,
                        redraws,
                    };
                }
            }
        }
        ZeroMeanMode::Penalty => loop {
            let Ok(state) = normalize(&draw_amplitudes(rng, dim)) else {
                continue;
            };
            let projected = project_zero_mean(state.amplitudes())
                .and_then(|c| normalize(&c).ok());
            return ConditionedSample {
                state: projected,
                redraws: 0,
            };
        },
    }
}

fn sample_checks(state: &FockState, cfg: &ScanConfig) -> Result<Vec<MajorizationVerdict>> {
    match &cfg.mode {
        ScanMode::Vacuum { r } => {
            let sq = SqueezeParam::from_r(*r)?;
            let b_dim = required_b_dim(state, sq.lambda, cfg.eps).max(1);
            let joint = output_state(state, *r, b_dim, cfg.eps)?;
            let sample_spec = schmidt_spectrum(&joint)?;
            let vacuum_spec = schmidt_vector(0, sq.lambda, b_dim - 1)?;
            Ok(vec![majorizes(&vacuum_spec, &sample_spec, cfg.eta)?])
        }
        ScanMode::Chain { r_grid } => {
            if r_grid.len() < 2 {
                return Err(Error::InvalidParameter {
                    name: "r_grid",
                    value: r_grid.len() as f64,
                    reason: "a chain scan needs at least two grid points",
                });
            }
            let mut spectra = Vec::with_capacity(r_grid.len());
            for &r in r_grid {
                let sq = SqueezeParam::from_r(r)?;
                let b_dim = required_b_dim(state, sq.lambda, cfg.eps).max(1);
                let joint = output_state(state, r, b_dim, cfg.eps)?;
                spectra.push(schmidt_spectrum(&joint)?);
            }
            let mut verdicts = Vec::with_capacity(spectra.len() - 1);
            for pair in spectra.windows(2) {
                verdicts.push(majorizes(&pair[0], &pair[1], cfg.eta)?);
            }
            Ok(verdicts)
        }
    }
}

/// Draw, condition, and check a single sample. Sample `index` is fully
/// determined by `(cfg.seed, index)` regardless of which other samples run.
pub fn scan_sample(cfg: &ScanConfig, index: usize) -> Result<SampleOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let conditioned = condition_sample(&mut rng, cfg.dim, cfg.zero_mean);
    let Some(state) = conditioned.state else {
        return Ok(SampleOutcome {
            index,
            mean_photon: f64::NAN,
            mean_lowering_abs: f64::NAN,
            redraws: conditioned.redraws,
            margin: f64::INFINITY,
            holds: false,
            inconclusive: true,
        });
    };
    let moments = state_moments(&state);
    let verdicts = match sample_checks(&state, cfg) {
        Ok(v) => v,
        Err(Error::InconclusiveTruncation { .. }) => {
            return Ok(SampleOutcome {
                index,
                mean_photon: moments.mean_photon,
                mean_lowering_abs: moments.mean_lowering().norm(),
                redraws: conditioned.redraws,
                margin: f64::INFINITY,
                holds: false,
                inconclusive: true,
            });
        }
        Err(e) => return Err(e),
    };
    let margin = verdicts
        .iter()
        .map(|v| v.margin)
        .fold(f64::INFINITY, f64::min);
    let holds = verdicts.iter().all(|v| v.holds);
    Ok(SampleOutcome {
        index,
        mean_photon: moments.mean_photon,
        mean_lowering_abs: moments.mean_lowering().norm(),
        redraws: conditioned.redraws,
        margin,
        holds,
        inconclusive: false,
    })
}

fn validate_scan_config(cfg: &ScanConfig) -> Result<()> {
    if cfg.dim == 0 {
        return Err(Error::InvalidParameter {
            name: "dim",
            value: 0.0,
            reason: "samples need at least one amplitude",
        });
    }
    if cfg.count == 0 {
        return Err(Error::InvalidParameter {
            name: "count",
            value: 0.0,
            reason: "a scan needs at least one sample",
        });
    }
    if !cfg.eta.is_finite() || cfg.eta <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "eta",
            value: cfg.eta,
            reason: "the conclusiveness threshold must be positive",
        });
    }
    if !cfg.eps.is_finite() || cfg.eps <= 0.0 || cfg.eps >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: cfg.eps,
            reason: "truncation budget must lie in (0, 1)",
        });
    }
    Ok(())
}

/// Run the configured scan over all samples and aggregate. With the
/// `parallel` feature samples run on the rayon pool; per-sample streams
/// make the result identical either way.
pub fn random_majorization_scan(cfg: &ScanConfig) -> Result<ScanReport> {
    validate_scan_config(cfg)?;
    #[cfg(feature = "parallel")]
    let outcomes: Vec<SampleOutcome> = (0..cfg.count)
        .into_par_iter()
        .map(|i| scan_sample(cfg, i))
        .collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<SampleOutcome> = (0..cfg.count)
        .map(|i| scan_sample(cfg, i))
        .collect::<Result<_>>()?;

    let mut violations = 0usize;
    let mut inconclusive = 0usize;
    let mut worst_margin = f64::INFINITY;
    let mut worst_sample = None;
    let mut photon_avg = CompensatedSum::new();
    let mut photon_max: f64 = 0.0;
    let mut lowering_avg = CompensatedSum::new();
    let mut lowering_max: f64 = 0.0;
    let mut measured = 0usize;
    for o in &outcomes {
        if o.inconclusive {
            inconclusive += 1;
            continue;
        }
        measured += 1;
        if !o.holds {
            violations += 1;
        }
        if o.margin < worst_margin {
            worst_margin = o.margin;
            worst_sample = Some(o.index);
        }
        photon_avg.add(o.mean_photon);
        photon_max = photon_max.max(o.mean_photon);
        lowering_avg.add(o.mean_lowering_abs);
        lowering_max = lowering_max.max(o.mean_lowering_abs);
    }
    let denom = measured.max(1) as f64;
    Ok(ScanReport {
        config: cfg.clone(),
        samples: outcomes.len(),
        violations,
        inconclusive,
        worst_margin,
        worst_sample,
        mean_photon_avg: photon_avg.total() / denom,
        mean_photon_max: photon_max,
        mean_lowering_abs_avg: lowering_avg.total() / denom,
        mean_lowering_abs_max: lowering_max,
    })
}

// ---------------------------------------------------------------------------
// Entropy crossing
// ---------------------------------------------------------------------------

/// Locate a sign change of `E_a(r) - E_b(r)` on `[r_lo, r_hi]` by bisection
/// to within `tol`. Both entropies are evaluated at the same Bob truncation
/// so the difference is not polluted by mismatched tails. Returns `None`
/// unless the endpoint differences have strictly opposite signs; in
/// particular equal states (difference identically zero) report no crossing.
pub fn crossing_finder(
    a: &FockState,
    b: &FockState,
    r_lo: f64,
    r_hi: f64,
    tol: f64,
    eps: f64,
) -> Result<Option<f64>> {
    if !(r_lo.is_finite() && r_hi.is_finite()) || r_lo < 0.0 || r_lo >= r_hi {
        return Err(Error::InvalidParameter {
            name: "r_lo",
            value: r_lo,
            reason: "need a finite bracket 0 <= r_lo < r_hi",
        });
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "the bracket tolerance must be positive",
        });
    }
    let diff = |r: f64| -> Result<f64> {
        let sq = SqueezeParam::from_r(r)?;
        let b_dim = required_b_dim(a, sq.lambda, eps)
            .max(required_b_dim(b, sq.lambda, eps))
            .max(1);
        let ea = entropy(
            &schmidt_spectrum(&output_state(a, r, b_dim, eps)?)?,
            EntropyUnit::Nats,
        );
        let eb = entropy(
            &schmidt_spectrum(&output_state(b, r, b_dim, eps)?)?,
            EntropyUnit::Nats,
        );
        Ok(ea - eb)
    };
    let mut lo = r_lo;
    let mut hi = r_hi;
    let mut f_lo = diff(lo)?;
    let f_hi = diff(hi)?;
    // Only a strict sign change counts: equal inputs give a difference that
    // is identically zero (up to rounding) with no crossing to report.
    if !(f_lo * f_hi < 0.0) {
        return Ok(None);
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = diff(mid)?;
        if f_mid == 0.0 {
            return Ok(Some(mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

// ---------------------------------------------------------------------------
// Entanglement minimization
// ---------------------------------------------------------------------------

/// Output-entanglement objective over unit input amplitudes at fixed
/// squeezing, with an optional mean-lowering penalty:
/// `f(c) = S(schmidt(M(c))) + penalty_weight * |<a>|^2`, where `M(c)` is
/// the truncated joint output. The Schmidt spectrum, objective, and its
/// analytic sphere gradient all come from one eigendecomposition of the
/// Bob-side Gram matrix.
pub struct EntropyObjective {
    dim: usize,
    b_dim: usize,
    penalty_weight: f64,
    /// `sqrt_weights[k][n] = sqrt(p^(k)_n)`.
    sqrt_weights: Vec<Vec<f64>>,
}

/// One objective evaluation: value, entropy part, and the interleaved
/// real gradient `[d/dRe c_0, d/dIm c_0, ...]` projected nowhere (ambient
/// coordinates).
pub struct ObjectiveEval {
    pub value: f64,
    pub entropy: f64,
    pub penalty: f64,
    pub gradient: Vec<f64>,
}

impl EntropyObjective {
    pub fn new(dim: usize, r: f64, penalty_weight: f64, eps: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                value: 0.0,
                reason: "the input needs at least one amplitude",
            });
        }
        if !(penalty_weight.is_finite() && penalty_weight >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "penalty_weight",
                value: penalty_weight,
                reason: "the penalty weight must be nonnegative",
            });
        }
        let sq = SqueezeParam::from_r(r)?;
        let z = sq.lambda * sq.lambda;
        let b_dim = nb_dim_for_tail(dim - 1, z, eps) + 1;
        let sqrt_weights = (0..dim)
            .map(|k| {
                crate::numeric::nb_weights(k, z, b_dim - 1)
                    .into_iter()
                    .map(f64::sqrt)
                    .collect()
            })
            .collect();
        Ok(Self {
            dim,
            b_dim,
            penalty_weight,
            sqrt_weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bob_dim(&self) -> usize {
        self.b_dim
    }

    /// Bob-side Gram matrix `M^dag M` assembled directly from the band
    /// structure: `M` has one diagonal band per input amplitude, so the
    /// Gram is Hermitian banded with bandwidth `dim - 1` and costs
    /// `O(dim^2 b_dim)` instead of a dense product.
    fn gram_of(&self, c: &[C64]) -> DMatrix<C64> {
        let mut gram: DMatrix<C64> = DMatrix::zeros(self.b_dim, self.b_dim);
        for d in 0..self.dim {
            for a in 0..self.b_dim.saturating_sub(d) {
                let b = a + d;
                let mut s = C64::new(0.0, 0.0);
                for k in 0..self.dim - d {
                    s += c[k + d].conj()
                        * c[k]
                        * (self.sqrt_weights[k + d][a] * self.sqrt_weights[k][b]);
                }
                gram[(a, b)] = s;
                if d > 0 {
                    gram[(b, a)] = s.conj();
                }
            }
        }
        gram
    }

    /// Schmidt spectrum of the truncated joint output (unnormalized; its
    /// total is `1 - omitted mass` for unit `c`).
    fn spectrum_of(&self, c: &[C64]) -> DVector<f64> {
        self.gram_of(c).symmetric_eigenvalues()
    }

    pub fn entropy_of(&self, c: &[C64]) -> f64 {
        debug_assert_eq!(c.len(), self.dim);
        let mut acc = CompensatedSum::new();
        for mu in self.spectrum_of(c).iter() {
            acc.add(-xlnx(mu.max(0.0)));
        }
        acc.total()
    }

    pub fn value(&self, c: &[C64]) -> f64 {
        let (a, _) = lowering_and_grad(c);
        self.entropy_of(c) + self.penalty_weight * a.norm_sqr()
    }

    /// Objective, parts, and analytic ambient gradient in one pass.
    pub fn eval(&self, c: &[C64]) -> ObjectiveEval {
        debug_assert_eq!(c.len(), self.dim);
        let eig = nalgebra::SymmetricEigen::new(self.gram_of(c));
        let mut entropy_acc = CompensatedSum::new();
        let mut grad = vec![0.0; 2 * self.dim];
        let a_dim = self.dim + self.b_dim - 1;
        let mut u = vec![C64::new(0.0, 0.0); a_dim];
        const SIGMA_FLOOR: f64 = 1e-18;
        for (i, &mu) in eig.eigenvalues.iter().enumerate() {
            let mu = mu.max(0.0);
            entropy_acc.add(-xlnx(mu));
            let sigma = mu.sqrt();
            if sigma <= SIGMA_FLOOR {
                continue;
            }
            // dH/dsigma_i, chain through mu = sigma^2.
            let alpha = -(mu.ln() + 1.0) * 2.0 * sigma;
            let v = eig.eigenvectors.column(i);
            // u = M v / sigma along the bands of the placement maps.
            u.fill(C64::new(0.0, 0.0));
            for (k, ck) in c.iter().enumerate() {
                if ck.norm_sqr() == 0.0 {
                    continue;
                }
                for n in 0..self.b_dim {
                    u[n + k] += ck * self.sqrt_weights[k][n] * v[(n, 0)];
                }
            }
            let inv_sigma = 1.0 / sigma;
            for k in 0..self.dim {
                // w = u_i^dag E_k v_i with E_k the per-mode placement map.
                let mut w = C64::new(0.0, 0.0);
                for n in 0..self.b_dim {
                    w += self.sqrt_weights[k][n] * u[n + k].conj() * v[(n, 0)];
                }
                grad[2 * k] += alpha * inv_sigma * w.re;
                grad[2 * k + 1] -= alpha * inv_sigma * w.im;
            }
        }
        let entropy = entropy_acc.total();
        let (a, pen_grad) = lowering_and_grad(c);
        let penalty = self.penalty_weight * a.norm_sqr();
        for (g, pg) in grad.iter_mut().zip(pen_grad.iter()) {
            *g += self.penalty_weight * pg;
        }
        ObjectiveEval {
            value: entropy + penalty,
            entropy,
            penalty,
            gradient: grad,
        }
    }
}

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartRecord {
    pub restart: usize,
    pub final_entropy: f64,
    pub final_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
}

/// Result of the restarted minimization.
#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub best_state: FockState,
    /// Entropy of the best restart's final point (no penalty term).
    pub best_entropy: f64,
    /// `best_entropy - E[vacuum]` at the same squeezing; the conjecture
    /// predicts this never drops below zero.
    pub vacuum_gap: f64,
    pub per_restart_history: Vec<RestartRecord>,
}

const DESCENT_MAX_ITERS: usize = 500;
const DESCENT_F_TOL: f64 = 1e-12;
const DESCENT_G_TOL: f64 = 1e-10;

fn descend(objective: &EntropyObjective, start: Vec<C64>) -> (Vec<C64>, f64, usize, bool, f64) {
    let mut x = to_real(&start);
    renormalize(&mut x);
    let mut eval = objective.eval(&to_complex(&x));
    let mut converged = false;
    let mut iters = 0;
    let mut grad_norm = 0.0;
    // Armijo backtracking warm-started from the last accepted step: near a
    // flat valley the accepted step is stable, so most iterations take the
    // first trial instead of halving down from 1 every time.
    let mut step = 1.0f64;
    for iter in 0..DESCENT_MAX_ITERS {
        iters = iter + 1;
        let mut g = eval.gradient.clone();
        project_tangent(&x, &mut g);
        let gnorm_sq: f64 = g.iter().map(|v| v * v).sum();
        grad_norm = gnorm_sq.sqrt();
        if grad_norm < DESCENT_G_TOL {
            converged = true;
            break;
        }
        step = (step * 2.0).min(1.0);
        let mut next: Option<Vec<f64>> = None;
        for _ in 0..40 {
            let mut trial = x.clone();
            for (t, gi) in trial.iter_mut().zip(g.iter()) {
                *t -= step * gi;
            }
            renormalize(&mut trial);
            // The sufficient-decrease test needs the value only, which the
            // eigenvalue-only path gives at a fraction of a full gradient
            // evaluation.
            let trial_value = objective.value(&to_complex(&trial));
            if trial_value <= eval.value - 1e-4 * step * gnorm_sq {
                next = Some(trial);
                break;
            }
            step *= 0.5;
        }
        let Some(trial) = next else {
            converged = true; // no descent direction left at this scale
            break;
        };
        let trial_eval = objective.eval(&to_complex(&trial));
        let improvement = eval.value - trial_eval.value;
        x = trial;
        eval = trial_eval;
        if improvement < DESCENT_F_TOL {
            converged = true;
            break;
        }
    }
    (to_complex(&x), eval.value, iters, converged, grad_norm)
}

/// Minimize output entanglement over unit inputs of dimension `dim` at
/// squeezing `r` by projected gradient descent with `restarts` seeded
/// starts. The best restart is the one with the lowest final objective;
/// its entropy and the gap to the vacuum input are reported alongside the
/// full restart history.
pub fn minimize_entropy(
    dim: usize,
    r: f64,
    restarts: usize,
    seed: u64,
    penalty_weight: f64,
    eps: f64,
) -> Result<SearchResult> {
    if restarts == 0 {
        return Err(Error::InvalidParameter {
            name: "restarts",
            value: 0.0,
            reason: "at least one restart is required",
        });
    }
    let objective = EntropyObjective::new(dim, r, penalty_weight, eps)?;
    let run_restart = |i: usize| -> (usize, Vec<C64>, f64, f64, usize, bool, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let start = loop {
            if let Ok(s) = normalize(&draw_amplitudes(&mut rng, dim)) {
                break s;
            }
        };
        let (c, value, iters, converged, grad_norm) = descend(&objective, start.amplitudes().to_vec());
        let entropy = objective.entropy_of(&c);
        (i, c, value, entropy, iters, converged, grad_norm)
    };
    #[cfg(feature = "parallel")]
    let runs: Vec<_> = (0..restarts).into_par_iter().map(run_restart).collect();
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<_> = (0..restarts).map(run_restart).collect();

    let mut per_restart_history = Vec::with_capacity(restarts);
    let mut best: Option<(f64, f64, &Vec<C64>)> = None;
    for (i, c, value, entropy, iters, converged, grad_norm) in &runs {
        per_restart_history.push(RestartRecord {
            restart: *i,
            final_entropy: *entropy,
            final_objective: *value,
            iterations: *iters,
            converged: *converged,
            grad_norm: *grad_norm,
        });
        if best.map_or(true, |(bv, _, _)| *value < bv) {
            best = Some((*value, *entropy, c));
        }
    }
    let (_, best_entropy, best_c) = best.expect("restarts >= 1");
    let best_state = normalize(best_c)?;
    let vacuum = vacuum_entanglement(r);
    Ok(SearchResult {
        best_state,
        best_entropy,
        vacuum_gap: best_entropy - vacuum,
        per_restart_history,
    })
}
