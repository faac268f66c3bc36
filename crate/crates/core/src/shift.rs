//! Distribution-shift coefficients, lookahead covariances, and the policy
//! completeness checker.
//!
//! The shift coefficient `C_h` is the smallest constant with
//! `Lambda_bar_h ⪯ C_h Lambda_h`, where `Lambda_bar` is the feature
//! covariance of the one-step lookahead distribution under the evaluated
//! policy. The product of the `C_h` is exactly what multiplies the error
//! bound, and on the hard instances it grows geometrically in the horizon.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::features::FeatureMap;
use crate::linalg::{self, RANK_CUTOFF};
use crate::mdp::{DataDistribution, LayeredMdp, Policy};
use crate::Result;

/// Per-level feature covariances of the one-step lookahead distributions.
///
/// Entry `0` is the rank-one matrix of the initial state-action feature;
/// entry `h >= 1` averages `phi(s', pi(s')) phi(s', pi(s'))ᵀ` over
/// `(s, a) ~ mu_{h-1}` and `s' ~ P(s, a)`, exactly over the finite support.
pub fn lookahead_covariance(
    mdp: &LayeredMdp,
    mu: &DataDistribution,
    pi: &Policy,
    phi: &FeatureMap,
) -> Result<Vec<DMatrix<f64>>> {
    if !pi.is_deterministic() {
        return Err(Error::PolicyNotDeterministic);
    }
    let d = phi.dim();
    let horizon = mdp.horizon();
    let mut result = Vec::with_capacity(horizon);

    let s1 = mdp.initial_state();
    let a1 = pi
        .deterministic_action(0, s1)
        .ok_or(Error::PolicyNotDeterministic)?;
    result.push(linalg::outer(&phi.phi_vector(0, s1, a1)));

    for h in 0..horizon - 1 {
        let mut lambda_bar = DMatrix::zeros(d, d);
        for &(s, a, p) in mu.atoms(h) {
            for (s_next, &q) in mdp.transition(h, s, a).iter().enumerate() {
                if q == 0.0 {
                    continue;
                }
                let a_next = pi
                    .deterministic_action(h + 1, s_next)
                    .ok_or(Error::PolicyNotDeterministic)?;
                let x = phi.phi_vector(h + 1, s_next, a_next);
                lambda_bar.ger(p * q, &x, &x, 1.0);
            }
        }
        result.push(linalg::symmetrize(&lambda_bar));
    }
    Ok(result)
}

/// Smallest `C` with `lambda_bar ⪯ C * lambda`, or `+inf` when the range of
/// `lambda_bar` is not contained in the range of `lambda`.
///
/// Computed as the top eigenvalue of `L^{+/2} lambda_bar L^{+/2}` with a
/// relative rank cutoff on the spectrum of `lambda`. The result is not
/// floored at one: it scales exactly linearly in `lambda_bar`, and genuine
/// lookahead covariances on full-coverage data yield `C >= 1` on their own.
pub fn minimal_shift_coefficient(lambda: &DMatrix<f64>, lambda_bar: &DMatrix<f64>) -> Result<f64> {
    if !linalg::is_symmetric_psd(lambda) {
        return Err(Error::NotPsd("lambda"));
    }
    if !linalg::is_symmetric_psd(lambda_bar) {
        return Err(Error::NotPsd("lambda_bar"));
    }
    if lambda.nrows() != lambda_bar.nrows() {
        return Err(Error::NotPsd("dimension mismatch"));
    }

    let d = lambda.nrows();
    let eig = linalg::symmetrize(lambda).symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let bar_top = lambda_bar.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if bar_top == 0.0 {
        return Ok(0.0);
    }
    if top <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let cutoff = RANK_CUTOFF * top;

    // Any lookahead mass on the null space of lambda makes domination
    // impossible at every finite scale.
    let leak_tol = 1e-10 * bar_top;
    let mut inv_sqrt = DMatrix::zeros(d, d);
    for (i, &w) in eig.eigenvalues.iter().enumerate() {
        let u = eig.eigenvectors.column(i);
        if w > cutoff {
            inv_sqrt.ger(1.0 / w.sqrt(), &u, &u, 1.0);
        } else {
            let leak = (u.transpose() * lambda_bar * u)[(0, 0)];
            if leak > leak_tol {
                return Ok(f64::INFINITY);
            }
        }
    }

    let whitened = linalg::symmetrize(&(&inv_sqrt * lambda_bar * &inv_sqrt));
    let top_gen = linalg::symmetric_eigenvalues(&whitened)
        .last()
        .cloned()
        .unwrap_or(0.0);
    Ok(top_gen.max(0.0))
}

/// Sup-norm residuals of fitting the affine one-step backup family at one
/// level.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletenessReport {
    /// 0-based level of the backed-up weights; the fit happens at
    /// `level - 1`.
    pub level: usize,
    /// `residuals[0]` is the pure-reward offset (`theta = 0`), then one
    /// entry per basis direction.
    pub residuals: Vec<f64>,
    /// Norms of the fitted coefficient vectors, one per direction; the
    /// analysis budgets `H * sqrt(d)` for them, which is reported but not
    /// enforced.
    pub theta_norms: Vec<f64>,
    pub max_residual: f64,
    pub norm_budget: f64,
}

/// Exact completeness check of the Bellman backup at one level.
///
/// The backup `theta ↦ E[R(s, a)] + sum_{s'} P(s'|s, a) phi(s', pi(s'))ᵀ theta`
/// is affine in `theta`, so it maps every linear function back into the
/// span of the level-`(h-1)` features if and only if the `d` basis
/// directions and the pure-reward offset all fit with zero residual.
/// `level` is 0-based and must satisfy `1 <= level <= H - 1`.
pub fn completeness_residual(
    mdp: &LayeredMdp,
    pi: &Policy,
    phi: &FeatureMap,
    level: usize,
) -> Result<CompletenessReport> {
    let horizon = mdp.horizon();
    if level == 0 || level >= horizon {
        return Err(Error::LevelOutOfRange {
            level,
            min: 1,
            max: horizon - 1,
        });
    }
    if !pi.is_deterministic() {
        return Err(Error::PolicyNotDeterministic);
    }

    let d = phi.dim();
    let prev = level - 1;
    let n_rows = mdp.n_states(prev) * mdp.n_actions();

    // Design matrix at the previous level, plus the affine pieces of the
    // backup: offsets E[R(s,a)] and the lookahead map rows
    // sum_{s'} P(s'|s,a) phi(s', pi(s')).
    let mut design = DMatrix::zeros(n_rows, d);
    let mut offset = DVector::zeros(n_rows);
    let mut lookahead_map = DMatrix::zeros(n_rows, d);
    let mut row = 0;
    for s in 0..mdp.n_states(prev) {
        for a in 0..mdp.n_actions() {
            for (j, &x) in phi.phi(prev, s, a).iter().enumerate() {
                design[(row, j)] = x;
            }
            offset[row] = mdp.reward(prev, s, a).mean();
            for (s_next, &p) in mdp.transition(prev, s, a).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let a_next = pi
                    .deterministic_action(level, s_next)
                    .ok_or(Error::PolicyNotDeterministic)?;
                for (j, &x) in phi.phi(level, s_next, a_next).iter().enumerate() {
                    lookahead_map[(row, j)] += p * x;
                }
            }
            row += 1;
        }
    }

    let mut residuals = Vec::with_capacity(d + 1);
    let mut theta_norms = Vec::with_capacity(d + 1);
    let mut max_residual = 0.0_f64;
    for direction in 0..=d {
        let target = if direction == 0 {
            offset.clone()
        } else {
            &offset + lookahead_map.column(direction - 1)
        };
        let theta = linalg::min_norm_lstsq(&design, &target);
        let residual = (&design * &theta - &target)
            .iter()
            .fold(0.0_f64, |acc, r| acc.max(r.abs()));
        max_residual = max_residual.max(residual);
        residuals.push(residual);
        theta_norms.push(theta.norm());
    }

    Ok(CompletenessReport {
        level,
        residuals,
        theta_norms,
        max_residual,
        norm_budget: horizon as f64 * (d as f64).sqrt(),
    })
}

/// One level of the shift report.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelShift {
    pub lambda: DMatrix<f64>,
    pub lambda_bar: DMatrix<f64>,
    pub sigma_min: f64,
    /// Minimal `C_h`; `+inf` when domination is impossible.
    pub shift: f64,
    /// Backup completeness residual into the previous level; `None` at the
    /// first level.
    pub completeness_residual: Option<f64>,
}

/// Distribution-shift diagnostics for `(mdp, mu, pi, phi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftReport {
    pub levels: Vec<LevelShift>,
    /// `prod_h C_h`; infinite as soon as one level is infinite.
    pub shift_product: f64,
    pub any_infinite: bool,
}

/// Assembles covariances, lookahead covariances, minimal shift
/// coefficients, and completeness residuals for every level.
pub fn shift_report(
    mdp: &LayeredMdp,
    mu: &DataDistribution,
    pi: &Policy,
    phi: &FeatureMap,
) -> Result<ShiftReport> {
    let cov = crate::features::covariance(mu, phi);
    let lookahead = lookahead_covariance(mdp, mu, pi, phi)?;

    let mut levels = Vec::with_capacity(mdp.horizon());
    let mut shift_product = 1.0_f64;
    let mut any_infinite = false;
    for h in 0..mdp.horizon() {
        let shift = minimal_shift_coefficient(&cov.levels[h].lambda, &lookahead[h])?;
        if shift.is_infinite() {
            any_infinite = true;
        }
        shift_product *= shift;
        let completeness = if h == 0 {
            None
        } else {
            Some(completeness_residual(mdp, pi, phi, h)?.max_residual)
        };
        levels.push(LevelShift {
            lambda: cov.levels[h].lambda.clone(),
            lambda_bar: lookahead[h].clone(),
            sigma_min: cov.levels[h].sigma_min,
            shift,
            completeness_residual: completeness,
        });
    }

    Ok(ShiftReport {
        levels,
        shift_product,
        any_infinite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::build_det_instance;
    use crate::mdp::Reward;
    use approx::assert_relative_eq;

    fn dense_generalized_top_eigenvalue(lambda: &DMatrix<f64>, lambda_bar: &DMatrix<f64>) -> f64 {
        // Independent oracle for full-rank lambda: top eigenvalue of
        // lambda^{-1} lambda_bar via the general complex eigensolver.
        let inv = lambda.clone().try_inverse().expect("full rank");
        (inv * lambda_bar)
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn equal_matrices_give_coefficient_one() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 0.7]);
        let psd = &m * m.transpose();
        let c = minimal_shift_coefficient(&psd, &psd).unwrap();
        assert_relative_eq!(c, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn scaling_lookahead_scales_coefficient() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 0.5]);
        let lambda = &m * m.transpose();
        let b = DMatrix::from_row_slice(2, 2, &[0.4, 0.1, 0.2, 0.8]);
        let lambda_bar = &b * b.transpose();
        let c1 = minimal_shift_coefficient(&lambda, &lambda_bar).unwrap();
        let c2 = minimal_shift_coefficient(&lambda, &(3.5 * &lambda_bar)).unwrap();
        assert_relative_eq!(c2, 3.5 * c1, max_relative = 1e-10);
    }

    #[test]
    fn range_violation_is_infinite() {
        let lambda = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let lambda_bar = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        assert!(minimal_shift_coefficient(&lambda, &lambda_bar)
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn non_psd_inputs_are_rejected() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let ok = DMatrix::identity(2, 2);
        assert!(matches!(
            minimal_shift_coefficient(&bad, &ok),
            Err(Error::NotPsd("lambda"))
        ));
    }

    #[test]
    fn domination_holds_at_the_minimal_coefficient() {
        for seed in 0..12_u64 {
            let mut rng = crate::rng::substream_rng(41, &[seed]);
            let d = 3;
            let mut random_psd = || {
                let m = DMatrix::from_fn(d, d, |_, _| rand::Rng::random::<f64>(&mut rng) - 0.5);
                &m * m.transpose()
            };
            let lambda = random_psd() + DMatrix::identity(d, d) * 0.05;
            let lambda_bar = random_psd();
            let c = minimal_shift_coefficient(&lambda, &lambda_bar).unwrap();
            assert!(c.is_finite());
            let slack = linalg::min_eigenvalue(&(c * &lambda - &lambda_bar));
            assert!(slack >= -1e-9, "slack {slack}");
            assert_relative_eq!(
                c,
                dense_generalized_top_eigenvalue(&lambda, &lambda_bar),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn initial_lookahead_is_rank_one() {
        let bundle = build_det_instance(6, 3, 0.1).unwrap();
        let bars = lookahead_covariance(&bundle.mdp, &bundle.mu, &bundle.eval_policy, &bundle.phi)
            .unwrap();
        let eigenvalues = linalg::symmetric_eigenvalues(&bars[0]);
        let s1 = bundle.mdp.initial_state();
        let norm_sq = bundle.phi.phi_vector(0, s1, 0).norm_squared();
        assert_relative_eq!(eigenvalues[eigenvalues.len() - 1], norm_sq, epsilon = 1e-12);
        assert!(eigenvalues[eigenvalues.len() - 2].abs() < 1e-12);
    }

    #[test]
    fn hard_instance_lookahead_matches_enumeration_formula() {
        // Under the always-jump policy the lookahead at levels >= 2 puts
        // half its mass on the amplifier feature and spreads the rest
        // uniformly over the fan directions.
        let d = 4;
        let d_hat = 2;
        let bundle = build_det_instance(d, 4, 0.1).unwrap();
        let bars = lookahead_covariance(&bundle.mdp, &bundle.mu, &bundle.eval_policy, &bundle.phi)
            .unwrap();
        let mut expected = DMatrix::zeros(d, d);
        let v = DVector::from_fn(d, |i, _| {
            if i < d_hat {
                1.0 / (d_hat as f64).sqrt()
            } else {
                0.0
            }
        });
        expected.ger(0.5, &v, &v, 1.0);
        for c in 0..d_hat {
            let e = DVector::from_fn(d, |i, _| if i == c { 1.0 } else { 0.0 });
            expected.ger(0.5 / d_hat as f64, &e, &e, 1.0);
        }
        for bar in &bars[1..] {
            for i in 0..d {
                for j in 0..d {
                    assert_relative_eq!(bar[(i, j)], expected[(i, j)], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn hard_instance_shift_coefficient_is_three() {
        let bundle = build_det_instance(4, 3, 0.1).unwrap();
        let report =
            shift_report(&bundle.mdp, &bundle.mu, &bundle.eval_policy, &bundle.phi).unwrap();
        // Level 1 compares the rank-one initial matrix against I/d.
        assert_relative_eq!(report.levels[0].shift, 4.0, epsilon = 1e-9);
        for level in &report.levels[1..] {
            assert_relative_eq!(level.shift, 3.0, epsilon = 1e-9);
            let oracle = dense_generalized_top_eigenvalue(&level.lambda, &level.lambda_bar);
            assert_relative_eq!(level.shift, oracle, epsilon = 1e-9);
        }
    }

    #[test]
    fn shift_product_bridges_to_the_amplification_rate() {
        for (d, horizon) in [(4usize, 3usize), (4, 5), (6, 4)] {
            let bundle = build_det_instance(d, horizon, 0.0).unwrap();
            let report =
                shift_report(&bundle.mdp, &bundle.mu, &bundle.eval_policy, &bundle.phi).unwrap();
            let floor = ((d / 2) as f64).powi(horizon as i32 - 1);
            assert!(
                report.shift_product >= floor,
                "product {} below {floor}",
                report.shift_product
            );
        }
    }

    #[test]
    fn well_covered_levels_have_bounded_shift() {
        // Whenever sigma_min(Lambda) >= 1/C and features are unit-bounded,
        // the minimal coefficient is at most C.
        for seed in 0..10_u64 {
            let mut rng = crate::rng::substream_rng(53, &[seed]);
            let bundle = build_det_instance(4, 3, 0.05).unwrap();
            let pi = Policy::random_deterministic(&bundle.mdp, &mut rng);
            let report = shift_report(&bundle.mdp, &bundle.mu, &pi, &bundle.phi).unwrap();
            for level in &report.levels {
                if level.sigma_min > 0.0 {
                    assert!(level.shift <= 1.0 / level.sigma_min + 1e-9);
                }
            }
        }
    }

    #[test]
    fn tabular_features_are_complete() {
        // One-hot features per (s, a) fit any backup exactly.
        let n = 3;
        let mut transitions = vec![];
        let mut level = vec![];
        for s in 0..n {
            let mut row = vec![0.0; n];
            row[(s + 1) % n] = 0.5;
            row[s] = 0.5;
            level.push(vec![row.clone(), row]);
        }
        transitions.push(level);
        let rewards = vec![
            (0..n)
                .map(|s| {
                    vec![
                        Reward::Deterministic(0.1 * s as f64),
                        Reward::Deterministic(-0.2),
                    ]
                })
                .collect::<Vec<_>>(),
            (0..n)
                .map(|_| vec![Reward::Deterministic(0.5), Reward::Deterministic(0.3)])
                .collect(),
        ];
        let mdp = LayeredMdp::new(vec![n, n], 2, transitions, rewards, 0, None).unwrap();
        let d = 2 * n;
        let table = (0..2)
            .map(|_| {
                (0..n)
                    .map(|s| {
                        (0..2)
                            .map(|a| {
                                let mut v = vec![0.0; d];
                                v[2 * s + a] = 1.0;
                                v
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let phi = FeatureMap::new(&mdp, d, table).unwrap();
        let pi = Policy::constant(&mdp, 1).unwrap();
        let report = completeness_residual(&mdp, &pi, &phi, 1).unwrap();
        assert!(report.max_residual < 1e-12, "{report:?}");
    }

    #[test]
    fn one_shared_feature_with_two_backup_values_is_incomplete() {
        let transitions = vec![vec![vec![vec![1.0, 0.0]; 1], vec![vec![0.0, 1.0]; 1]]];
        let rewards = vec![
            vec![
                vec![Reward::Deterministic(1.0)],
                vec![Reward::Deterministic(-1.0)],
            ],
            vec![vec![Reward::Deterministic(0.0)]; 2],
        ];
        let mdp = LayeredMdp::new(vec![2, 2], 1, transitions, rewards, 0, None).unwrap();
        // Every pair shares the same feature vector.
        let table = vec![vec![vec![vec![1.0]]; 2], vec![vec![vec![1.0]]; 2]];
        let phi = FeatureMap::new(&mdp, 1, table).unwrap();
        let pi = Policy::constant(&mdp, 0).unwrap();
        let report = completeness_residual(&mdp, &pi, &phi, 1).unwrap();
        // The offset direction already fails: backups 1 and -1 cannot both
        // be matched by a single coefficient.
        assert!(report.residuals[0] > 0.5);
    }

    #[test]
    fn completeness_level_bounds_are_enforced() {
        let bundle = build_det_instance(4, 3, 0.0).unwrap();
        assert!(matches!(
            completeness_residual(&bundle.mdp, &bundle.eval_policy, &bundle.phi, 0),
            Err(Error::LevelOutOfRange { .. })
        ));
        assert!(matches!(
            completeness_residual(&bundle.mdp, &bundle.eval_policy, &bundle.phi, 3),
            Err(Error::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn hard_instance_completeness_matches_explicit_least_squares() {
        // The hard instance is deliberately incomplete; verify the reported
        // residuals against an independent pseudo-inverse solve, and that
        // directions orthogonal to the realized next-feature span fit
        // exactly when r0 = 0.
        let d = 4;
        let d_hat = 2;
        for r0 in [0.0, 0.2] {
            let bundle = build_det_instance(d, 3, r0).unwrap();
            let report =
                completeness_residual(&bundle.mdp, &bundle.eval_policy, &bundle.phi, 1).unwrap();

            // Oracle: explicit least squares over the (d_hat + 1) * 2 pairs.
            let mdp = &bundle.mdp;
            let phi = &bundle.phi;
            let n_rows = mdp.n_states(0) * mdp.n_actions();
            let mut design = DMatrix::zeros(n_rows, d);
            let mut row = 0;
            for s in 0..mdp.n_states(0) {
                for a in 0..mdp.n_actions() {
                    for j in 0..d {
                        design[(row, j)] = phi.phi(0, s, a)[j];
                    }
                    row += 1;
                }
            }
            let pinv = design.clone().pseudo_inverse(1e-12).unwrap();
            for direction in 0..=d {
                let mut target = DVector::zeros(n_rows);
                let mut row = 0;
                for s in 0..mdp.n_states(0) {
                    for a in 0..mdp.n_actions() {
                        let mut g = mdp.reward(0, s, a).mean();
                        if direction > 0 {
                            for (s_next, &p) in mdp.transition(0, s, a).iter().enumerate() {
                                g += p * phi.phi(1, s_next, 0)[direction - 1];
                            }
                        }
                        target[row] = g;
                        row += 1;
                    }
                }
                let theta = &pinv * &target;
                let oracle = (&design * theta - target)
                    .iter()
                    .fold(0.0_f64, |acc, r| acc.max(r.abs()));
                assert_relative_eq!(report.residuals[direction], oracle, epsilon = 1e-9);
            }

            if r0 == 0.0 {
                // Directions e_i with i >= d_hat never appear in realized
                // next features, so their backups vanish identically.
                for i in d_hat..d {
                    assert!(report.residuals[1 + i] < 1e-12);
                }
                // The fan directions hit the amplifier inconsistency.
                assert!(report.residuals[1] > 1e-3);
            } else {
                assert!(report.max_residual > 1e-3);
            }
        }
    }
}
