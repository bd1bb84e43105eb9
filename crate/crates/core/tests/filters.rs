mod common;

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sparsekf::filters::{
    dense_ukf_cycle, enkf_cycle, ensemble_mean, progressive_ekf_cycle, repair_positive, sparse_ukf_cycle,
    EnkfParams, FilterError, FilterState, ProgressiveParams, UkfParams, GAMMA_MARGIN,
};
use sparsekf::models::{LinearModel, Lorenz96, Lorenz96Config, ObservationOperator};
use sparsekf::sparse::{SparseSymMatrix, SparsityPattern};

use common::{Dense, DenseKf};

fn to_dense(m: &DMatrix<f64>) -> Dense {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.5..0.5));
    &b * b.transpose() + DMatrix::identity(n, n) * 0.3
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

#[test]
fn ukfs_match_kalman_filter_on_linear_system() {
    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { 0.95 } else { rng.random_range(-0.2..0.2) });
    let model = LinearModel::from_matrix(m.clone()).unwrap();
    let obs = ObservationOperator::new(n, vec![0, 2], 0.4).unwrap();
    let p0 = random_spd(&mut rng, n);
    let full = Arc::new(SparsityPattern::full(n).unwrap());
    let q = 0.0;

    let mut kf = DenseKf {
        x: vec![0.5; n],
        p: to_dense(&p0),
    };
    let mut sparse = FilterState::new(vec![0.5; n], SparseSymMatrix::from_dense(full.clone(), &p0).unwrap());
    let mut dense = FilterState::new(vec![0.5; n], p0);
    let params = UkfParams {
        q,
        kappa: 1.0,
        ..UkfParams::new(full)
    };
    let h = to_dense(&obs.jacobian());
    let mut truth = vec![1.0; n];
    for _ in 0..20 {
        truth = common::matvec(&to_dense(&m), &truth);
        let y: Vec<f64> = [truth[0], truth[2]].iter().map(|v| v + 0.6 * normal(&mut rng)).collect();
        kf.forecast(&to_dense(&m), q);
        kf.update(&h, 0.4, &y);
        sparse = sparse_ukf_cycle(&sparse, Some(&y), &model, &obs, &params).unwrap();
        dense = dense_ukf_cycle(&dense, Some(&y), &model, &obs, 1.0, q).unwrap();
        assert!(common::max_abs_diff(&sparse.xa, &kf.x) < 1e-9);
        assert!(common::max_abs_diff(&dense.xa, &kf.x) < 1e-9);
        for i in 0..n {
            for j in 0..n {
                assert!((sparse.pa.get(i, j) - kf.p[i][j]).abs() < 1e-9);
                assert!((dense.pa[(i, j)] - kf.p[i][j]).abs() < 1e-9);
            }
        }
    }
}

/// Forecast-only progressive covariance against `M P Mᵀ` for `M = I + εA`.
fn progressive_forecast_error(eps: f64) -> f64 {
    let n = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let p0 = random_spd(&mut rng, n);
    let model = LinearModel::new(a, eps).unwrap();
    let obs = ObservationOperator::new(n, vec![0], 1.0).unwrap();
    let full = Arc::new(SparsityPattern::full(n).unwrap());
    let state = FilterState::new(vec![0.3; n], SparseSymMatrix::from_dense(full.clone(), &p0).unwrap());
    let next = progressive_ekf_cycle(&state, None, &model, &obs, &ProgressiveParams::new(full)).unwrap();
    let t = model.transition();
    let exact = &t * &p0 * t.transpose();
    (next.pa.to_dense() - exact).abs().max()
}

#[test]
fn progressive_propagation_is_second_order_accurate() {
    let (e1, e2) = (progressive_forecast_error(0.02), progressive_forecast_error(0.01));
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "errors {e1} {e2}, ratio {ratio}");
    assert!(e1 < 0.02 * 0.02 * 10.0);
}

#[test]
fn progressive_identity_model_adds_q() {
    let n = 12;
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let pat = Arc::new(SparsityPattern::with_nsp(n, 5).unwrap());
    let mut dense = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if pat.contains(i, j) && i < j {
                let v = rng.random_range(-0.1..0.1);
                dense[(i, j)] = v;
                dense[(j, i)] = v;
            }
        }
        dense[(i, i)] = 1.0;
    }
    let pa = SparseSymMatrix::from_dense(pat.clone(), &dense).unwrap();
    let model = LinearModel::new(DMatrix::zeros(n, n), 1.0).unwrap();
    let obs = ObservationOperator::strided(n, 3, 1.0).unwrap();
    let params = ProgressiveParams {
        q: 0.05,
        n_p: 2,
        ..ProgressiveParams::new(pat)
    };
    let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.1).collect();
    let next = progressive_ekf_cycle(&FilterState::new(x.clone(), pa.clone()), None, &model, &obs, &params).unwrap();
    assert_eq!(next.xa, x);
    let mut expect = pa.clone();
    expect.add_diagonal(0.05);
    assert!((next.pa.to_dense() - expect.to_dense()).abs().max() < 1e-10);
}

#[test]
fn progressive_matches_kalman_filter_for_random_walk() {
    let n = 6;
    let model = LinearModel::new(DMatrix::zeros(n, n), 1.0).unwrap();
    let obs = ObservationOperator::every_other(n, 0.5).unwrap();
    let pat = Arc::new(SparsityPattern::full(n).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let p0 = random_spd(&mut rng, n);
    let mut kf = DenseKf {
        x: vec![0.0; n],
        p: to_dense(&p0),
    };
    let mut state = FilterState::new(vec![0.0; n], SparseSymMatrix::from_dense(pat.clone(), &p0).unwrap());
    let params = ProgressiveParams {
        q: 0.1,
        ..ProgressiveParams::new(pat)
    };
    let h = to_dense(&obs.jacobian());
    for _ in 0..30 {
        let y: Vec<f64> = (0..3).map(|_| normal(&mut rng)).collect();
        kf.forecast(&common::identity(n), 0.1);
        kf.update(&h, 0.5, &y);
        state = progressive_ekf_cycle(&state, Some(&y), &model, &obs, &params).unwrap();
        assert!(common::max_abs_diff(&state.xa, &kf.x) < 1e-8);
    }
}

fn l96_setup(n: usize, seed: u64) -> (Lorenz96, Vec<f64>) {
    let model = Lorenz96::new(Lorenz96Config {
        n,
        ..Default::default()
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    for _ in 0..500 {
        x = common::l96_rk4(&x, 0.025, 8.0);
    }
    (model, x)
}

#[test]
fn huge_observation_noise_leaves_forecast_unchanged() {
    let (model, x) = l96_setup(40, 24);
    let weak = ObservationOperator::every_other(40, 1e12).unwrap();
    let y: Vec<f64> = weak.observe(&x).unwrap().iter().map(|v| v + 3.0).collect();
    let pat = Arc::new(SparsityPattern::with_nsp(40, 7).unwrap());
    let state = FilterState::new(x.clone(), SparseSymMatrix::scaled_identity(pat.clone(), 0.2));

    let up = UkfParams::new(pat.clone());
    let with = sparse_ukf_cycle(&state, Some(&y), &model, &weak, &up).unwrap();
    let without = sparse_ukf_cycle(&state, None, &model, &weak, &up).unwrap();
    assert!(common::max_abs_diff(&with.xa, &without.xa) < 1e-6 * 10.0);
    assert!((with.pa.to_dense() - without.pa.to_dense()).abs().max() < 1e-6 * 0.2);

    let pp = ProgressiveParams::new(pat);
    let with = progressive_ekf_cycle(&state, Some(&y), &model, &weak, &pp).unwrap();
    let without = progressive_ekf_cycle(&state, None, &model, &weak, &pp).unwrap();
    assert!(common::max_abs_diff(&with.xa, &without.xa) < 1e-6 * 10.0);
    assert!((with.pa.to_dense() - without.pa.to_dense()).abs().max() < 1e-6 * 0.2);

    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let members: Vec<Vec<f64>> = (0..10)
        .map(|_| x.iter().map(|v| v + 0.45 * normal(&mut rng)).collect())
        .collect();
    let params = EnkfParams::default();
    let (with, _) = enkf_cycle(&members, Some(&y), &model, &weak, &params, &mut rng).unwrap();
    let (without, _) = enkf_cycle(&members, None, &model, &weak, &params, &mut rng).unwrap();
    let scale = without.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in with.iter().zip(&without) {
        assert!(common::max_abs_diff(a, b) < 1e-6 * scale);
    }
}

#[test]
fn enkf_inflates_forecast_spread() {
    let (model, x) = l96_setup(40, 26);
    let obs = ObservationOperator::every_other(40, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let members: Vec<Vec<f64>> = (0..10)
        .map(|_| x.iter().map(|v| v + 0.3 * normal(&mut rng)).collect())
        .collect();
    let params = EnkfParams::default();
    let (out, diag) = enkf_cycle(&members, None, &model, &obs, &params, &mut rng).unwrap();
    assert_eq!(diag.evaluations, 400);
    let forecast: Vec<Vec<f64>> = members.iter().map(|m| common::l96_rk4(m, 0.025, 8.0)).collect();
    let mean = ensemble_mean(&forecast);
    for (o, f) in out.iter().zip(&forecast) {
        for i in 0..40 {
            let expect = mean[i] + 1.08f64.sqrt() * (f[i] - mean[i]);
            assert!((o[i] - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn large_ensemble_matches_kalman_filter() {
    let n = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { rng.random_range(-0.3..0.3) });
    let model = LinearModel::from_matrix(m.clone()).unwrap();
    let obs = ObservationOperator::new(n, vec![0, 2, 4], 0.5).unwrap();
    let x0 = vec![1.0, -0.5, 0.2, 0.8, -1.0];
    let p0 = common::identity(n);
    let members: Vec<Vec<f64>> = (0..10_000)
        .map(|_| x0.iter().map(|v| v + normal(&mut rng)).collect())
        .collect();
    let params = EnkfParams {
        n_ens: 10_000,
        radius: f64::INFINITY,
        inflation: 1.0,
    };
    let y = [2.0, 1.0, -2.0];
    let (out, _) = enkf_cycle(&members, Some(&y), &model, &obs, &params, &mut rng).unwrap();
    let xa = ensemble_mean(&out);

    let mut kf = DenseKf { x: x0, p: p0 };
    kf.forecast(&to_dense(&m), 0.0);
    let xb = kf.x.clone();
    kf.update(&to_dense(&obs.jacobian()), 0.5, &y);
    let inc_kf: Vec<f64> = kf.x.iter().zip(&xb).map(|(a, b)| a - b).collect();
    let err: f64 = xa.iter().zip(&kf.x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let size: f64 = inc_kf.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(err < 0.05 * size, "mean error {err} vs increment {size}");
}

#[test]
fn repair_restores_positive_definiteness() {
    let n = 10;
    let pat = Arc::new(SparsityPattern::new(n, 2).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut dense = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            if pat.contains(i, j) {
                let v = rng.random_range(-1.0..1.0);
                dense[(i, j)] = v;
                dense[(j, i)] = v;
            }
        }
    }
    let mut e = SparseSymMatrix::from_dense(pat.clone(), &dense).unwrap();
    let before = common::jacobi_eigenvalues(&to_dense(&e.to_dense()))[0];
    assert!(before < 0.0);
    let gamma = repair_positive(&mut e);
    assert!((gamma - (before.abs() + GAMMA_MARGIN)).abs() < 1e-10);
    let after = common::jacobi_eigenvalues(&to_dense(&e.to_dense()))[0];
    assert!((after - GAMMA_MARGIN).abs() < 1e-10, "min eigenvalue after repair {after}");

    let mut pd = SparseSymMatrix::scaled_identity(pat, 0.5);
    assert_eq!(repair_positive(&mut pd), 0.0);
    assert_eq!(pd.get(3, 3), 0.5);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let (model, x) = l96_setup(40, 30);
    let obs = ObservationOperator::every_other(40, 1.0).unwrap();
    let pat = Arc::new(SparsityPattern::with_nsp(40, 7).unwrap());
    let other = Arc::new(SparsityPattern::with_nsp(40, 11).unwrap());
    let state = FilterState::new(x.clone(), SparseSymMatrix::scaled_identity(pat.clone(), 0.2));
    let err = sparse_ukf_cycle(&state, None, &model, &obs, &UkfParams::new(other.clone())).unwrap_err();
    assert!(matches!(err, FilterError::Sparse(_)), "{err:?}");
    let short = FilterState::new(x[..39].to_vec(), SparseSymMatrix::scaled_identity(pat.clone(), 0.2));
    assert!(matches!(
        progressive_ekf_cycle(&short, None, &model, &obs, &ProgressiveParams::new(pat.clone())),
        Err(FilterError::DimensionMismatch { .. })
    ));
    let y = vec![0.0; 19];
    assert!(sparse_ukf_cycle(&state, Some(&y), &model, &obs, &UkfParams::new(pat)).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(enkf_cycle(&[x.clone()], None, &model, &obs, &EnkfParams::default(), &mut rng).is_err());
}
