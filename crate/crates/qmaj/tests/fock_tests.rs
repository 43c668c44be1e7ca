//! State plumbing, moments, Schmidt spectra, and entropy against closed
//! forms and structural invariants.

mod common;

use common::{c64, real_state};
use nalgebra::DMatrix;
use qmaj::fock::{
    entropy, normalize, schmidt_spectrum, state_moments, BipartiteAmplitudeMatrix, DensityMatrix,
    EntropyUnit, FockState, ProbabilityVector,
};
use qmaj::squeezer::{output_state, schmidt_vector};
use qmaj::{C64, Error};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[test]
fn normalize_scales_and_preserves_phase() {
    let s = normalize(&[c64(1.0, 0.0), c64(1.0, 0.0)]).unwrap();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    assert!((s.amplitudes()[0].re - inv_sqrt2).abs() < 1e-15);
    assert!((s.amplitudes()[1].re - inv_sqrt2).abs() < 1e-15);

    // (3, 4i) -> (0.6, 0.8i): the 3-4-5 norm with phases untouched.
    let s = normalize(&[c64(3.0, 0.0), c64(0.0, 4.0)]).unwrap();
    assert!((s.amplitudes()[0] - c64(0.6, 0.0)).norm() < 1e-15);
    assert!((s.amplitudes()[1] - c64(0.0, 0.8)).norm() < 1e-15);
}

#[test]
fn normalize_rejects_zero_and_is_idempotent() {
    assert!(matches!(
        normalize(&[c64(0.0, 0.0), c64(0.0, 0.0)]),
        Err(Error::DegenerateState)
    ));
    let once = normalize(&[c64(0.2, -0.3), c64(1.7, 0.4), c64(0.0, 2.0)]).unwrap();
    let twice = normalize(once.amplitudes()).unwrap();
    for (a, b) in once.amplitudes().iter().zip(twice.amplitudes()) {
        assert!((a - b).norm() < 1e-15);
    }
}

#[test]
fn moments_match_hand_values() {
    let vac = state_moments(&FockState::fock(0));
    assert_eq!(vac.mean_photon, 0.0);
    assert_eq!(vac.mean_lowering().norm(), 0.0);

    // sqrt(0.4)|1> + sqrt(0.6)|2>: mean photon 0.4 + 1.2 = 1.6.
    let s = real_state(&[0.0, 0.4f64.sqrt(), 0.6f64.sqrt()]);
    let m = state_moments(&s);
    assert!((m.mean_photon - 1.6).abs() < 1e-14);

    // (|0> + |1>)/sqrt(2): <a> = sqrt(1) * (1/sqrt2)(1/sqrt2) = 0.5.
    let s = real_state(&[1.0, 1.0]);
    let m = state_moments(&s);
    assert!((m.mean_lowering() - c64(0.5, 0.0)).norm() < 1e-15);
}

#[test]
fn fock_states_are_the_zero_mean_baseline() {
    for k in 0..12 {
        let m = state_moments(&FockState::fock(k));
        assert_eq!(m.mean_photon, k as f64);
        assert_eq!(m.mean_lowering().norm(), 0.0);
    }
}

#[test]
fn schmidt_spectrum_of_diagonal_and_rank_one() {
    let mut d = DMatrix::<C64>::zeros(2, 2);
    d[(0, 0)] = c64(0.75f64.sqrt(), 0.0);
    d[(1, 1)] = c64(0.25f64.sqrt(), 0.0);
    let p = schmidt_spectrum(&BipartiteAmplitudeMatrix::new(d).unwrap()).unwrap();
    assert!((p.probs()[0] - 0.75).abs() < 1e-14);
    assert!((p.probs()[1] - 0.25).abs() < 1e-14);

    // Rank-1 (product) state: single unit coefficient.
    let u = [c64(0.6, 0.0), c64(0.0, 0.8)];
    let v = [c64(0.5, 0.5), c64(0.5, -0.5)];
    let mut m = DMatrix::<C64>::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            m[(a, b)] = u[a] * v[b];
        }
    }
    let p = schmidt_spectrum(&BipartiteAmplitudeMatrix::new(m).unwrap()).unwrap();
    assert!((p.probs()[0] - 1.0).abs() < 1e-12);
    for &rest in &p.probs()[1..] {
        assert!(rest.abs() < 1e-12);
    }
}

#[test]
fn schmidt_spectrum_matches_squeezer_closed_form() {
    let lambda = 0.5f64;
    let r = lambda.atanh();
    let joint = output_state(&FockState::fock(1), r, 60, 1e-12).unwrap();
    let numeric = schmidt_spectrum(&joint).unwrap();
    let closed = schmidt_vector(1, lambda, 59).unwrap();
    let sorted_closed = closed.sorted_descending();
    for (i, &p) in numeric.probs().iter().enumerate() {
        let q = sorted_closed.get(i).copied().unwrap_or(0.0);
        assert!(
            (p - q).abs() < 1e-12,
            "entry {i}: SVD {p} vs closed form {q}"
        );
    }
}

fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let (x, y) =
            qmaj::numeric::standard_normal_pair(rng.next_u64(), rng.next_u64());
        C64::new(x, y)
    });
    let qr = g.qr();
    qr.q()
}

#[test]
fn schmidt_spectrum_is_unitarily_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dim = 6;
    // A random normalized joint state.
    let mut m = DMatrix::from_fn(dim, dim, |_, _| {
        let (x, y) =
            qmaj::numeric::standard_normal_pair(rng.next_u64(), rng.next_u64());
        C64::new(x, y)
    });
    let norm = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    m /= C64::new(norm, 0.0);
    let base = schmidt_spectrum(&BipartiteAmplitudeMatrix::new(m.clone()).unwrap()).unwrap();
    for trial in 0..4 {
        let u = random_unitary(dim, &mut rng);
        let v = random_unitary(dim, &mut rng);
        let rotated = &u * &m * &v;
        let p = schmidt_spectrum(&BipartiteAmplitudeMatrix::new(rotated).unwrap()).unwrap();
        for (i, (a, b)) in base.probs().iter().zip(p.probs()).enumerate() {
            assert!(
                (a - b).abs() < 1e-10,
                "trial {trial}, entry {i}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn entropy_closed_forms() {
    let pure = ProbabilityVector::new(vec![1.0, 0.0], 0.0).unwrap();
    assert_eq!(entropy(&pure, EntropyUnit::Nats), 0.0);

    let uniform = ProbabilityVector::new(vec![0.5, 0.5], 0.0).unwrap();
    assert!((entropy(&uniform, EntropyUnit::Nats) - std::f64::consts::LN_2).abs() < 1e-15);
    assert!((entropy(&uniform, EntropyUnit::Bits) - 1.0).abs() < 1e-15);

    // Geometric spectrum at lambda = 0.5: -ln(1-x) - x ln(x)/(1-x), x = 1/4.
    let x = 0.25f64;
    let closed = -(1.0 - x).ln() - x * x.ln() / (1.0 - x);
    let p = schmidt_vector(0, 0.5, 200).unwrap();
    let e = entropy(&p, EntropyUnit::Nats);
    assert!(
        (e - closed).abs() < 1e-13,
        "geometric entropy {e} vs closed {closed}"
    );
    assert!((closed - 0.7497801928250778).abs() < 1e-15);
}

#[test]
fn entropy_respects_dimension_bound() {
    let p = ProbabilityVector::new(vec![0.3, 0.25, 0.25, 0.2], 0.0).unwrap();
    let e = entropy(&p, EntropyUnit::Nats);
    assert!(e >= 0.0);
    assert!(e <= (p.len() as f64).ln() + 1e-15);
}

#[test]
fn probability_vector_polices_entries() {
    // Rounding dust is clamped...
    let p = ProbabilityVector::new(vec![0.6, 0.4 + 1e-11, -1e-11], 0.0).unwrap();
    assert_eq!(p.probs()[2], 0.0);
    // ...but genuinely negative entries are rejected with their index.
    match ProbabilityVector::new(vec![0.6, 0.5, -0.1], 0.0) {
        Err(Error::InvalidDistribution { index: 2, value }) => {
            assert!((value + 0.1).abs() < 1e-15)
        }
        other => panic!("expected InvalidDistribution, got {other:?}"),
    }
    // Totals off by more than the tolerance are rejected.
    assert!(matches!(
        ProbabilityVector::new(vec![0.6, 0.3], 0.0),
        Err(Error::InvalidState { .. })
    ));
}

#[test]
fn density_matrix_validation_and_entropy() {
    let s = real_state(&[1.0, 1.0]);
    let rho = DensityMatrix::pure(&s);
    assert!(rho.entropy().unwrap().abs() < 1e-12);

    // The even mixture of |0><0| and |1><1| has entropy ln 2.
    let mut half = DMatrix::<C64>::zeros(2, 2);
    half[(0, 0)] = c64(0.5, 0.0);
    half[(1, 1)] = c64(0.5, 0.0);
    let rho = DensityMatrix::new(half).unwrap();
    assert!((rho.entropy().unwrap() - std::f64::consts::LN_2).abs() < 1e-12);

    // Non-Hermitian and trace-deficient matrices are rejected.
    let mut bad = DMatrix::<C64>::zeros(2, 2);
    bad[(0, 1)] = c64(0.3, 0.0);
    bad[(0, 0)] = c64(1.0, 0.0);
    assert!(DensityMatrix::new(bad).is_err());
    let mut low_trace = DMatrix::<C64>::zeros(2, 2);
    low_trace[(0, 0)] = c64(0.9, 0.0);
    assert!(DensityMatrix::new(low_trace).is_err());
}

#[test]
fn serialization_shapes_are_stable() {
    // FockState: array of [re, im] pairs.
    let s = real_state(&[0.6, 0.8]);
    let js = serde_json::to_value(&s).unwrap();
    assert_eq!(js, serde_json::json!([[0.6, 0.0], [0.8, 0.0]]));
    let back: FockState = serde_json::from_value(js).unwrap();
    assert_eq!(back.amplitudes(), s.amplitudes());

    // ProbabilityVector: probs plus explicit tail mass.
    let p = ProbabilityVector::new(vec![0.7, 0.3], 0.0).unwrap();
    assert_eq!(
        serde_json::to_value(&p).unwrap(),
        serde_json::json!({"probs": [0.7, 0.3], "tail_mass": 0.0})
    );

    // Deserialization revalidates: an unnormalized state is refused.
    let bad: Result<FockState, _> = serde_json::from_str("[[0.9, 0.0], [0.1, 0.0]]");
    assert!(bad.is_err());
}
