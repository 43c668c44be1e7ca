//! Fock-basis state containers and the spectral operations every other
//! module leans on: normalization, photon-number moments, Schmidt spectra of
//! bipartite pure states, von Neumann entropy, and density matrices.
//!
//! Two containers carry explicit truncation bookkeeping:
//! [`ProbabilityVector`] stores the analytic mass of the entries it does not
//! hold (`tail_mass`), and [`BipartiteAmplitudeMatrix`] is validated to unit
//! Frobenius norm so its squared singular values form a distribution.

use crate::numeric::{compensated_sum, xlnx, CompensatedSum};
use crate::{C64, Error, Result};
use nalgebra::DMatrix;
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

const NORM_TOL: f64 = 1e-12;
const JOINT_NORM_TOL: f64 = 1e-10;
const ENTRY_TOL: f64 = 1e-10;

/// Pure single-mode state as complex amplitudes over photon numbers
/// `0..dim`; amplitudes beyond `dim` are implicitly zero. Unit norm within
/// 1e-12 by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: Vec<C64>,
}

impl FockState {
    /// Validating constructor; the amplitudes must already be normalized.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DegenerateState);
        }
        let norm_sq: f64 = compensated_sum(&amplitudes.iter().map(|c| c.norm_sqr()).collect::<Vec<_>>());
        let deviation = (norm_sq - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(Error::InvalidState {
                reason: "amplitude sequence is not unit-norm",
                deviation,
            });
        }
        Ok(Self { amplitudes })
    }

    /// The photon-number eigenstate `|k>`.
    pub fn fock(k: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); k + 1];
        amplitudes[k] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }
}

/// Scale an arbitrary nonzero amplitude sequence to unit norm. The overall
/// scale factor is a positive real, so the phase of every amplitude (in
/// particular the first nonzero one) is preserved.
pub fn normalize(amplitudes: &[C64]) -> Result<FockState> {
    let norm_sq: f64 = compensated_sum(&amplitudes.iter().map(|c| c.norm_sqr()).collect::<Vec<_>>());
    if norm_sq == 0.0 || amplitudes.is_empty() {
        return Err(Error::DegenerateState);
    }
    let inv = norm_sq.sqrt().recip();
    Ok(FockState {
        amplitudes: amplitudes.iter().map(|c| c * inv).collect(),
    })
}

/// First moments of a state: mean photon number and the mean of the
/// lowering operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateMoments {
    pub mean_photon: f64,
    pub mean_lowering_re: f64,
    pub mean_lowering_im: f64,
}

impl StateMoments {
    pub fn mean_lowering(&self) -> C64 {
        C64::new(self.mean_lowering_re, self.mean_lowering_im)
    }
}

/// `mean_photon = sum_n n |c_n|^2`;
/// `mean_lowering = <a> = sum_n sqrt(n+1) conj(c_n) c_{n+1}`.
/// A state is "zero-mean" when `|mean_lowering|` vanishes within tolerance.
pub fn state_moments(state: &FockState) -> StateMoments {
    let c = state.amplitudes();
    let mut nbar = CompensatedSum::new();
    let mut low_re = CompensatedSum::new();
    let mut low_im = CompensatedSum::new();
    for (n, cn) in c.iter().enumerate() {
        nbar.add(n as f64 * cn.norm_sqr());
        if n + 1 < c.len() {
            let elem = ((n + 1) as f64).sqrt() * cn.conj() * c[n + 1];
            low_re.add(elem.re);
            low_im.add(elem.im);
        }
    }
    StateMoments {
        mean_photon: nbar.total(),
        mean_lowering_re: low_re.total(),
        mean_lowering_im: low_im.total(),
    }
}

/// Nonnegative weights plus the analytic (or bounded) mass of everything
/// beyond the stored entries. `sum(probs) + tail_mass = 1` within 1e-10.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
    tail_mass: f64,
}

impl ProbabilityVector {
    /// Validating constructor. Entries in `[-1e-10, 0)` are treated as
    /// spectral-rounding zeros and clamped; anything more negative is
    /// rejected.
    pub fn new(mut probs: Vec<f64>, tail_mass: f64) -> Result<Self> {
        for (index, p) in probs.iter_mut().enumerate() {
            if *p < 0.0 {
                if *p < -ENTRY_TOL {
                    return Err(Error::InvalidDistribution { index, value: *p });
                }
                *p = 0.0;
            }
        }
        if tail_mass < -ENTRY_TOL {
            return Err(Error::InvalidDistribution {
                index: probs.len(),
                value: tail_mass,
            });
        }
        let tail_mass = tail_mass.max(0.0);
        let total = compensated_sum(&probs) + tail_mass;
        if (total - 1.0).abs() > JOINT_NORM_TOL {
            return Err(Error::InvalidState {
                reason: "probabilities plus tail mass do not sum to one",
                deviation: (total - 1.0).abs(),
            });
        }
        Ok(Self { probs, tail_mass })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Entries sorted descending. The sort is stable, so ties keep their
    /// original index order and prefix sums are deterministic.
    pub fn sorted_descending(&self) -> Vec<f64> {
        let mut sorted = self.probs.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).expect("probabilities are finite"));
        sorted
    }

    /// Upper bound on the entropy contribution of the omitted tail when it
    /// is spread over at most `guard_dim` further outcomes:
    /// `-t ln t + t ln(guard_dim)`.
    pub fn entropy_tail_bound(&self, guard_dim: usize) -> f64 {
        let t = self.tail_mass;
        if t <= 0.0 {
            return 0.0;
        }
        -xlnx(t) + t * (guard_dim.max(1) as f64).ln()
    }
}

impl Serialize for ProbabilityVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ProbabilityVector", 2)?;
        s.serialize_field("probs", &self.probs)?;
        s.serialize_field("tail_mass", &self.tail_mass)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for ProbabilityVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            probs: Vec<f64>,
            #[serde(default)]
            tail_mass: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        ProbabilityVector::new(raw.probs, raw.tail_mass).map_err(serde::de::Error::custom)
    }
}

/// Joint pure state of two modes: `entries[(a, b)]` is the amplitude of
/// `|a>_A (x) |b>_B`. Unit Frobenius norm within 1e-10.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteAmplitudeMatrix {
    entries: DMatrix<C64>,
}

impl BipartiteAmplitudeMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let norm_sq: f64 = entries.iter().map(|c| c.norm_sqr()).sum();
        let deviation = (norm_sq - 1.0).abs();
        if deviation > JOINT_NORM_TOL {
            return Err(Error::InvalidState {
                reason: "joint amplitude matrix is not unit-norm",
                deviation,
            });
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn a_dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn b_dim(&self) -> usize {
        self.entries.ncols()
    }
}

/// Squared singular values of the joint amplitude matrix, descending: the
/// Schmidt coefficients, i.e. the eigenvalues of either reduced state.
///
/// Computed as eigenvalues of the Hermitian Gram matrix `M^dagger M` (the
/// smaller side), which yields the squared singular values directly.
pub fn schmidt_spectrum(m: &BipartiteAmplitudeMatrix) -> Result<ProbabilityVector> {
    let mat = m.entries();
    let spectrum = if mat.nrows() >= mat.ncols() {
        gram_eigenvalues(&(mat.adjoint() * mat))
    } else {
        gram_eigenvalues(&(mat * mat.adjoint()))
    };
    let mut probs: Vec<f64> = spectrum.into_iter().map(|x| x.max(0.0)).collect();
    probs.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    ProbabilityVector::new(probs, 0.0)
}

fn gram_eigenvalues(gram: &DMatrix<C64>) -> Vec<f64> {
    gram.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect()
}

/// Entropy units for [`entropy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyUnit {
    Nats,
    Bits,
}

/// `-sum_n p_n log p_n` with `0 log 0 = 0`, in the requested unit.
pub fn entropy(p: &ProbabilityVector, unit: EntropyUnit) -> f64 {
    let mut acc = CompensatedSum::new();
    for &x in p.probs() {
        acc.add(-xlnx(x));
    }
    let nats = acc.total();
    match unit {
        EntropyUnit::Nats => nats,
        EntropyUnit::Bits => nats / std::f64::consts::LN_2,
    }
}

/// Entropy together with the tail bound that accounts for the omitted mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyReport {
    pub value: f64,
    pub tail_bound: f64,
}

/// Entropy in nats plus the `-t ln t + t ln(guard_dim)` bound on what the
/// omitted tail could contribute.
pub fn entropy_report(p: &ProbabilityVector, guard_dim: usize) -> EntropyReport {
    EntropyReport {
        value: entropy(p, EntropyUnit::Nats),
        tail_bound: p.entropy_tail_bound(guard_dim),
    }
}

/// Hermitian, unit-trace matrix in the Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
}

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const EIGENVALUE_TOL: f64 = 1e-10;

impl DensityMatrix {
    /// Validates Hermiticity (1e-12) and unit trace (1e-10). The positivity
    /// invariant (eigenvalues >= -1e-10) is checked by [`Self::eigenvalues`]
    /// consumers and [`Self::validate_positive`], not on every construction,
    /// since it costs a full eigendecomposition.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.is_empty() {
            return Err(Error::InvalidState {
                reason: "density matrix must be square and nonempty",
                deviation: f64::NAN,
            });
        }
        let mut herm_dev = 0.0f64;
        for i in 0..entries.nrows() {
            for j in i..entries.ncols() {
                let dev = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                herm_dev = herm_dev.max(dev);
            }
        }
        if herm_dev > HERMITICITY_TOL {
            return Err(Error::InvalidState {
                reason: "density matrix is not Hermitian",
                deviation: herm_dev,
            });
        }
        let trace: C64 = entries.diagonal().iter().sum();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState {
                reason: "density matrix trace is not one",
                deviation: (trace - C64::new(1.0, 0.0)).norm(),
            });
        }
        Ok(Self { entries })
    }

    /// The pure state `|psi><psi|`.
    pub fn pure(state: &FockState) -> Self {
        let n = state.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, a) in state.amplitudes().iter().enumerate() {
            for (j, b) in state.amplitudes().iter().enumerate() {
                m[(i, j)] = a * b.conj();
            }
        }
        Self { entries: m }
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|c| c.re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.entries.diagonal().iter().map(|c| c.re).collect()
    }

    /// Real eigenvalues (ascending order as produced by the symmetric
    /// solver).
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect()
    }

    /// Full positivity check: every eigenvalue >= -1e-10.
    pub fn validate_positive(&self) -> Result<()> {
        let eigs = self.eigenvalues();
        for (index, &value) in eigs.iter().enumerate() {
            if value < -EIGENVALUE_TOL {
                return Err(Error::InvalidDistribution { index, value });
            }
        }
        Ok(())
    }

    /// Spectrum as a probability vector (descending, tiny negatives
    /// clamped), with `tail_mass` absorbing any trace deficit of a truncated
    /// simulation so the container invariant holds.
    pub fn spectrum(&self) -> Result<ProbabilityVector> {
        let mut eigs = self.eigenvalues();
        eigs.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        let deficit = 1.0 - compensated_sum(&eigs);
        ProbabilityVector::new(eigs, deficit.max(0.0))
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> Result<f64> {
        Ok(entropy(&self.spectrum()?, EntropyUnit::Nats))
    }
}

impl Serialize for FockState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.amplitudes.len()))?;
        for c in &self.amplitudes {
            seq.serialize_element(&[c.re, c.im])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for FockState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
        let amplitudes: Vec<C64> = pairs.iter().map(|p| C64::new(p[0], p[1])).collect();
        FockState::new(amplitudes).map_err(serde::de::Error::custom)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let row_major = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..n).map(|j| f(&self.entries[(i, j)])).collect())
                .collect()
        };
        let mut s = serializer.serialize_struct("DensityMatrix", 2)?;
        s.serialize_field("re", &row_major(|c| c.re))?;
        s.serialize_field("im", &row_major(|c| c.im))?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            re: Vec<Vec<f64>>,
            im: Vec<Vec<f64>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let n = raw.re.len();
        if raw.im.len() != n || raw.re.iter().chain(raw.im.iter()).any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("re/im must be square and equal-sized"));
        }
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = C64::new(raw.re[i][j], raw.im[i][j]);
            }
        }
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}
