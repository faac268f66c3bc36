//! Least-squares policy evaluation (LSPE) and its exact error identity.
//!
//! LSPE runs one ridge regression per level, backwards, with plug-in
//! targets `r + Q̂_{h+1}(s', pi(s'))`. With `lambda = 0` and full-rank
//! designs it is an unbiased estimator of the policy value; its variance is
//! what the hard instances blow up geometrically.
//!
//! The identity check materializes both sides of the exact decomposition of
//! the estimation error into telescoped per-level noise and regularization
//! terms, which certifies the backward-induction algebra numerically.

use alloc::{format, vec, vec::Vec};

#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::features::{fit_linear_q, FeatureMap, REALIZABILITY_TOL};
use crate::linalg;
use crate::mdp::{exact_q_values, LayeredMdp, OfflineDataset, Policy};
use crate::Result;

/// Relative eigenvalue threshold below which an unregularized design is
/// reported singular instead of silently inverted.
const SINGULAR_REL_TOL: f64 = 1e-10;

/// One per-level linear system `Lambda_hat = Phiᵀ Phi + lambda I`, kept in
/// factored form so it can be applied repeatedly.
struct SpdSolver {
    eigenvectors: DMatrix<f64>,
    eigenvalues: DVector<f64>,
}

impl SpdSolver {
    /// Factors `m`; with `lambda = 0` the design must be numerically full
    /// rank relative to its trace.
    fn new(m: &DMatrix<f64>, lambda: f64, level: usize) -> Result<Self> {
        let eig = linalg::symmetrize(m).symmetric_eigen();
        let sigma_min = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let trace = eig.eigenvalues.sum();
        if lambda == 0.0 && sigma_min <= SINGULAR_REL_TOL * trace {
            return Err(Error::SingularDesign {
                level,
                sigma_min,
                trace,
            });
        }
        Ok(Self {
            eigenvectors: eig.eigenvectors,
            eigenvalues: eig.eigenvalues,
        })
    }

    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut coeffs = self.eigenvectors.transpose() * b;
        for (c, &w) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c /= w;
        }
        &self.eigenvectors * coeffs
    }

    fn condition_number(&self) -> f64 {
        let max = self
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let min = self
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min > 0.0 {
            max / min
        } else {
            f64::INFINITY
        }
    }
}

/// Output of one LSPE run: per-level weights and the design/lookahead
/// matrices needed by the identity diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearQEstimate {
    /// Per-level weight vectors, first level first.
    pub theta: Vec<DVector<f64>>,
    pub lambda: f64,
    /// `Lambda_hat_h = Phi_hᵀ Phi_h + lambda I`.
    pub design: Vec<DMatrix<f64>>,
    /// `Phi_h`: one `N x d` row per sampled pair.
    pub features: Vec<DMatrix<f64>>,
    /// `Phi_bar_{h+1}`: `N x d` rows `phi(s', pi(s'))`, one entry per level
    /// `h` in `0..H-1`.
    pub lookahead: Vec<DMatrix<f64>>,
    /// Per-level condition numbers of the design matrices.
    pub condition_numbers: Vec<f64>,
    /// `V_hat = phi(s_1, pi(s_1))ᵀ theta_1`.
    pub estimate: f64,
    pub n: usize,
}

/// Per-level sampled feature matrices `Phi_h` and lookahead matrices
/// `Phi_bar_{h+1}`.
type DesignMatrices = (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>);

fn feature_matrices(
    mdp: &LayeredMdp,
    dataset: &OfflineDataset,
    pi: &Policy,
    phi: &FeatureMap,
) -> Result<DesignMatrices> {
    let horizon = mdp.horizon();
    if dataset.horizon() != horizon {
        return Err(Error::InvalidDistribution(format!(
            "dataset has {} levels, MDP has {horizon}",
            dataset.horizon()
        )));
    }
    let d = phi.dim();
    let n = dataset.n_per_level();
    let mut features = Vec::with_capacity(horizon);
    let mut lookahead = Vec::with_capacity(horizon.saturating_sub(1));
    for h in 0..horizon {
        let samples = dataset.samples(h);
        let mut phi_mat = DMatrix::zeros(n, d);
        for (i, t) in samples.iter().enumerate() {
            for (j, &x) in phi.phi(h, t.state, t.action).iter().enumerate() {
                phi_mat[(i, j)] = x;
            }
        }
        features.push(phi_mat);
        if h + 1 < horizon {
            let mut bar = DMatrix::zeros(n, d);
            for (i, t) in samples.iter().enumerate() {
                let s_next = t.next_state.expect("inner levels carry successors");
                let a_next = pi
                    .deterministic_action(h + 1, s_next)
                    .ok_or(Error::PolicyNotDeterministic)?;
                for (j, &x) in phi.phi(h + 1, s_next, a_next).iter().enumerate() {
                    bar[(i, j)] = x;
                }
            }
            lookahead.push(bar);
        }
    }
    Ok((features, lookahead))
}

fn initial_feature(mdp: &LayeredMdp, pi: &Policy, phi: &FeatureMap) -> Result<DVector<f64>> {
    let s1 = mdp.initial_state();
    let a1 = pi
        .deterministic_action(0, s1)
        .ok_or(Error::PolicyNotDeterministic)?;
    Ok(phi.phi_vector(0, s1, a1))
}

/// Runs LSPE on an offline dataset for a deterministic policy.
///
/// `lambda = 0` is allowed (and reproduces the unbiasedness of plain
/// backward least squares) but requires every empirical design to be
/// numerically full rank; otherwise the offending level is reported.
pub fn run_lspe(
    mdp: &LayeredMdp,
    dataset: &OfflineDataset,
    pi: &Policy,
    phi: &FeatureMap,
    lambda: f64,
) -> Result<LinearQEstimate> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidLambda("lambda >= 0"));
    }
    if !pi.is_deterministic() {
        return Err(Error::PolicyNotDeterministic);
    }
    let (features, lookahead) = feature_matrices(mdp, dataset, pi, phi)?;

    let horizon = mdp.horizon();
    let d = phi.dim();
    let n = dataset.n_per_level();
    let mut design = Vec::with_capacity(horizon);
    let mut solvers = Vec::with_capacity(horizon);
    let mut condition_numbers = Vec::with_capacity(horizon);
    for (h, phi_mat) in features.iter().enumerate() {
        let mut gram = phi_mat.transpose() * phi_mat;
        for i in 0..d {
            gram[(i, i)] += lambda;
        }
        let solver = SpdSolver::new(&gram, lambda, h)?;
        condition_numbers.push(solver.condition_number());
        design.push(gram);
        solvers.push(solver);
    }

    let mut theta = vec![DVector::zeros(d); horizon];
    for h in (0..horizon).rev() {
        let rewards = DVector::from_iterator(n, dataset.samples(h).iter().map(|t| t.reward));
        let targets = if h + 1 < horizon {
            &rewards + &lookahead[h] * &theta[h + 1]
        } else {
            rewards
        };
        theta[h] = solvers[h].solve(&(features[h].transpose() * targets));
    }

    let estimate = initial_feature(mdp, pi, phi)?.dot(&theta[0]);

    Ok(LinearQEstimate {
        theta,
        lambda,
        design,
        features,
        lookahead,
        condition_numbers,
        estimate,
        n,
    })
}

/// Both sides of the exact error decomposition, evaluated on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    /// `(V^pi - V_hat)^2`.
    pub left: f64,
    /// Squared initial-feature norm of the telescoped noise and
    /// regularization terms.
    pub right: f64,
    /// `|left - right| / max(left, right)` (zero when both vanish).
    pub relative_discrepancy: f64,
    /// Per-level noise vectors `xi_h`, defined against the exact values.
    pub noise: Vec<DVector<f64>>,
    pub v_exact: f64,
    pub v_hat: f64,
}

/// Computes both sides of the error identity from the same dataset.
///
/// Requires `lambda > 0` and an (numerically) exactly realizable policy;
/// the per-level true weights are taken from the minimum-norm fit of the
/// exact `Q`-values. The noise `xi_h` is defined with respect to the true
/// value functions, not plug-in estimates.
pub fn check_error_identity(
    mdp: &LayeredMdp,
    dataset: &OfflineDataset,
    pi: &Policy,
    phi: &FeatureMap,
    lambda: f64,
) -> Result<IdentityReport> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidLambda("lambda > 0 for the identity"));
    }
    let fit = fit_linear_q(mdp, pi, phi);
    for (h, level) in fit.levels.iter().enumerate() {
        if level.sup_residual >= REALIZABILITY_TOL {
            return Err(Error::RealizabilityViolated {
                level: h,
                residual: level.sup_residual,
            });
        }
    }

    let estimate = run_lspe(mdp, dataset, pi, phi, lambda)?;
    let values = exact_q_values(mdp, pi);
    let horizon = mdp.horizon();
    let n = dataset.n_per_level();

    let mut noise = Vec::with_capacity(horizon);
    for h in 0..horizon {
        let mut xi = DVector::zeros(n);
        for (i, t) in dataset.samples(h).iter().enumerate() {
            let next_value = match t.next_state {
                Some(s_next) => values.v(h + 1, s_next),
                None => 0.0,
            };
            xi[i] = t.reward + next_value - values.q(h, t.state, t.action);
        }
        noise.push(xi);
    }

    // Accumulate the telescoped sum right-to-left as vectors:
    //   w_H = v_H,  w_h = v_h + Lambda_hat_h^{-1} Phi_hᵀ (Phi_bar_{h+1} w_{h+1}),
    // where v_h = Lambda_hat_h^{-1} (Phi_hᵀ xi_h - lambda theta_h). This
    // avoids ever forming an N x N or chained d x d product explicitly.
    let solvers: Vec<SpdSolver> = estimate
        .design
        .iter()
        .enumerate()
        .map(|(h, m)| SpdSolver::new(m, lambda, h))
        .collect::<Result<_>>()?;
    let mut accumulated = DVector::zeros(phi.dim());
    for h in (0..horizon).rev() {
        let base = solvers[h]
            .solve(&(estimate.features[h].transpose() * &noise[h] - lambda * fit.theta(h)));
        accumulated = if h + 1 < horizon {
            base + solvers[h]
                .solve(&(estimate.features[h].transpose() * (&estimate.lookahead[h] * accumulated)))
        } else {
            base
        };
    }

    let initial = initial_feature(mdp, pi, phi)?;
    let right = initial.dot(&accumulated).powi(2);
    let left = (values.value() - estimate.estimate).powi(2);
    let denom = left.max(right);
    let relative_discrepancy = if denom > 0.0 {
        (left - right).abs() / denom
    } else {
        0.0
    };

    Ok(IdentityReport {
        left,
        right,
        relative_discrepancy,
        noise,
        v_exact: values.value(),
        v_hat: estimate.estimate,
    })
}

/// The closed-form high-probability bound on the squared estimation error
/// under low distribution shift, with its two unspecified constants
/// exposed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// `c * prod(C_h) * d H^5 * sqrt(d log(dH/delta) / N)`.
    pub bound: f64,
    /// The prescribed regularization `C * H * sqrt(d log(dH/delta) * N)`.
    pub lambda: f64,
    /// Product of the shift coefficients; infinite shift makes the bound
    /// vacuous rather than an error.
    pub shift_product: f64,
    pub vacuous: bool,
}

/// Evaluates the error bound for given per-level shift coefficients.
///
/// `c` and `lambda_const` default to 1 in callers; the analysis leaves both
/// unspecified. Infinite coefficients propagate to a vacuous bound.
pub fn evaluate_theorem_bound(
    shift_coefficients: &[f64],
    d: usize,
    n: usize,
    delta: f64,
    c: f64,
    lambda_const: f64,
) -> Result<BoundReport> {
    let horizon = shift_coefficients.len();
    if horizon == 0 {
        return Err(Error::InvalidInstance("need at least one level".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInstance(
            "sample count must be positive".into(),
        ));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInstance(format!(
            "delta = {delta} outside (0, 1)"
        )));
    }
    if shift_coefficients.iter().any(|&x| x.is_nan() || x < 1.0) {
        return Err(Error::InvalidInstance(
            "shift coefficients must be at least 1".into(),
        ));
    }
    if !(c > 0.0 && lambda_const > 0.0) {
        return Err(Error::InvalidInstance("constants must be positive".into()));
    }

    let shift_product: f64 = shift_coefficients.iter().product();
    let d_f = d as f64;
    let h_f = horizon as f64;
    let log_term = (d_f * h_f / delta).ln();
    let bound = c * shift_product * d_f * h_f.powi(5) * (d_f * log_term / n as f64).sqrt();
    let lambda = lambda_const * h_f * (d_f * log_term * n as f64).sqrt();

    Ok(BoundReport {
        bound,
        lambda,
        shift_product,
        vacuous: !bound.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::build_det_instance;
    use crate::mdp::{sample_offline, DataDistribution, Reward};
    use crate::rng::substream_rng;
    use alloc::vec;
    use approx::assert_relative_eq;
    use rand::Rng;

    /// Single-level MDP whose deterministic rewards are exactly linear in
    /// two-dimensional features.
    fn linear_single_level(theta: [f64; 2]) -> (LayeredMdp, FeatureMap, DataDistribution) {
        let feats = [[0.8, 0.0], [0.0, 0.9], [0.6, 0.6], [-0.5, 0.4]];
        let rewards = vec![feats
            .iter()
            .map(|f| vec![Reward::Deterministic(f[0] * theta[0] + f[1] * theta[1])])
            .collect::<Vec<_>>()];
        let mdp = LayeredMdp::new(vec![4], 1, vec![], rewards, 0, None).unwrap();
        let table = vec![feats.iter().map(|f| vec![f.to_vec()]).collect::<Vec<_>>()];
        let phi = FeatureMap::new(&mdp, 2, table).unwrap();
        let mu = DataDistribution::uniform(&mdp, vec![(0..4).map(|s| (s, 0)).collect()]).unwrap();
        (mdp, phi, mu)
    }

    #[test]
    fn noiseless_ols_recovers_weights() {
        let theta_true = [0.31, -0.44];
        let (mdp, phi, mu) = linear_single_level(theta_true);
        let pi = Policy::constant(&mdp, 0).unwrap();
        let data = sample_offline(&mdp, &mu, 50, 7).unwrap();
        let est = run_lspe(&mdp, &data, &pi, &phi, 0.0).unwrap();
        assert_relative_eq!(est.theta[0][0], theta_true[0], epsilon = 1e-10);
        assert_relative_eq!(est.theta[0][1], theta_true[1], epsilon = 1e-10);
        assert_relative_eq!(
            est.estimate,
            exact_q_values(&mdp, &pi).value(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn lspe_is_deterministic_given_dataset_and_lambda() {
        let bundle = build_det_instance(4, 3, 0.2).unwrap();
        let data = sample_offline(&bundle.mdp, &bundle.mu, 40, 3).unwrap();
        let a = run_lspe(&bundle.mdp, &data, &bundle.eval_policy, &bundle.phi, 0.5).unwrap();
        let b = run_lspe(&bundle.mdp, &data, &bundle.eval_policy, &bundle.phi, 0.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rank_deficient_design_is_reported_at_lambda_zero() {
        let (mdp, phi, _) = linear_single_level([0.1, 0.2]);
        // Only state 0 is sampled: the design spans a single direction.
        let mu = DataDistribution::uniform(&mdp, vec![vec![(0, 0)]]).unwrap();
        let pi = Policy::constant(&mdp, 0).unwrap();
        let data = sample_offline(&mdp, &mu, 25, 9).unwrap();
        match run_lspe(&mdp, &data, &pi, &phi, 0.0) {
            Err(Error::SingularDesign { level: 0, .. }) => {}
            other => panic!("expected singular design, got {other:?}"),
        }
        // Any positive ridge makes the same system well-posed.
        assert!(run_lspe(&mdp, &data, &pi, &phi, 1e-6).is_ok());
    }

    #[test]
    fn stochastic_policy_is_rejected() {
        let bundle = build_det_instance(4, 2, 0.0).unwrap();
        let mut rng = substream_rng(1, &[2]);
        let pi = Policy::random_stochastic(&bundle.mdp, &mut rng);
        let data = sample_offline(&bundle.mdp, &bundle.mu, 10, 1).unwrap();
        assert!(matches!(
            run_lspe(&bundle.mdp, &data, &pi, &bundle.phi, 1.0),
            Err(Error::PolicyNotDeterministic)
        ));
    }

    #[test]
    fn identity_requires_positive_lambda() {
        let bundle = build_det_instance(4, 2, 0.1).unwrap();
        let data = sample_offline(&bundle.mdp, &bundle.mu, 10, 1).unwrap();
        assert!(matches!(
            check_error_identity(&bundle.mdp, &data, &bundle.eval_policy, &bundle.phi, 0.0),
            Err(Error::InvalidLambda(_))
        ));
    }

    #[test]
    fn identity_rejects_unrealizable_features() {
        // Two states with different rewards but identical features cannot
        // be realizable.
        let rewards = vec![vec![
            vec![Reward::Deterministic(0.5)],
            vec![Reward::Deterministic(-0.5)],
        ]];
        let mdp = LayeredMdp::new(vec![2], 1, vec![], rewards, 0, None).unwrap();
        let phi = FeatureMap::new(&mdp, 1, vec![vec![vec![vec![1.0]], vec![vec![1.0]]]]).unwrap();
        let mu = DataDistribution::uniform(&mdp, vec![vec![(0, 0), (1, 0)]]).unwrap();
        let pi = Policy::constant(&mdp, 0).unwrap();
        let data = sample_offline(&mdp, &mu, 10, 5).unwrap();
        assert!(matches!(
            check_error_identity(&mdp, &data, &pi, &phi, 1.0),
            Err(Error::RealizabilityViolated { .. })
        ));
    }

    #[test]
    fn noiseless_single_level_identity_reduces_to_ridge_shrinkage() {
        // With xi = 0 the right side collapses to the pure regularization
        // term; verify both against an explicitly computed value.
        let theta_true = [0.31, -0.44];
        let (mdp, phi, mu) = linear_single_level(theta_true);
        let pi = Policy::constant(&mdp, 0).unwrap();
        let data = sample_offline(&mdp, &mu, 30, 11).unwrap();
        let lambda = 0.7;
        let report = check_error_identity(&mdp, &data, &pi, &phi, lambda).unwrap();
        assert!(report.noise[0].amax() < 1e-12);
        assert!(report.relative_discrepancy < 1e-10);

        let est = run_lspe(&mdp, &data, &pi, &phi, lambda).unwrap();
        let theta = DVector::from_column_slice(&theta_true);
        let shrink = est.design[0]
            .clone()
            .cholesky()
            .unwrap()
            .solve(&(lambda * &theta));
        let initial = phi.phi_vector(0, 0, 0);
        let manual = initial.dot(&shrink).powi(2);
        assert_relative_eq!(report.right, manual, epsilon = 1e-12);
        assert_relative_eq!(report.left, manual, epsilon = 1e-12);
    }

    #[test]
    fn identity_matches_explicit_matrix_products() {
        // Independent oracle: materialize the telescoped products term by
        // term with dense matrix algebra and compare both sides.
        let d = 4;
        let horizon = 4;
        let bundle = build_det_instance(d, horizon, 0.25).unwrap();
        let data = sample_offline(&bundle.mdp, &bundle.mu, 100, 21).unwrap();
        let lambda = 1.0;
        let report =
            check_error_identity(&bundle.mdp, &data, &bundle.eval_policy, &bundle.phi, lambda)
                .unwrap();
        assert!(report.relative_discrepancy < 1e-8, "{report:?}");
        for xi in &report.noise {
            assert!(xi.amax() <= 2.0 * horizon as f64);
        }

        let est = run_lspe(&bundle.mdp, &data, &bundle.eval_policy, &bundle.phi, lambda).unwrap();
        let fit = fit_linear_q(&bundle.mdp, &bundle.eval_policy, &bundle.phi);
        let inverses: Vec<DMatrix<f64>> = est
            .design
            .iter()
            .map(|m| m.clone().cholesky().unwrap().inverse())
            .collect();
        let mut total = DVector::zeros(d);
        for h in 0..horizon {
            let term = &inverses[h]
                * (est.features[h].transpose() * &report.noise[h] - lambda * fit.theta(h));
            let mut prefixed = term;
            for hh in (0..h).rev() {
                prefixed = &inverses[hh]
                    * (est.features[hh].transpose() * (&est.lookahead[hh] * prefixed));
            }
            total += prefixed;
        }
        let s1 = bundle.mdp.initial_state();
        let a1 = bundle.eval_policy.deterministic_action(0, s1).unwrap();
        let initial = bundle.phi.phi_vector(0, s1, a1);
        let oracle_right = initial.dot(&total).powi(2);
        assert_relative_eq!(report.right, oracle_right, max_relative = 1e-9);
        assert_relative_eq!(report.left, oracle_right, max_relative = 1e-8);
    }

    #[test]
    fn zero_reward_world_is_driven_by_noise_terms_only() {
        // r0 = 0: all true weights vanish, so tiny lambda leaves only the
        // noise chain on the right side.
        let bundle = build_det_instance(4, 3, 0.0).unwrap();
        let data = sample_offline(&bundle.mdp, &bundle.mu, 60, 13).unwrap();
        let fit = fit_linear_q(&bundle.mdp, &bundle.eval_policy, &bundle.phi);
        for h in 0..3 {
            assert!(fit.theta(h).amax() < 1e-12);
        }
        let lambda = 1e-9;
        let report =
            check_error_identity(&bundle.mdp, &data, &bundle.eval_policy, &bundle.phi, lambda)
                .unwrap();
        assert!(report.relative_discrepancy < 1e-8);

        // Noise-only oracle with the lambda-theta terms dropped (they are
        // exactly zero here).
        let est = run_lspe(&bundle.mdp, &data, &bundle.eval_policy, &bundle.phi, lambda).unwrap();
        let inverses: Vec<DMatrix<f64>> = est
            .design
            .iter()
            .map(|m| m.clone().cholesky().unwrap().inverse())
            .collect();
        let mut total = DVector::zeros(4);
        for h in (0..3).rev() {
            let v = &inverses[h] * (est.features[h].transpose() * &report.noise[h]);
            total = if h + 1 < 3 {
                v + &inverses[h] * (est.features[h].transpose() * (&est.lookahead[h] * total))
            } else {
                v
            };
        }
        let initial = bundle.phi.phi_vector(0, bundle.mdp.initial_state(), 0);
        assert_relative_eq!(
            report.right,
            initial.dot(&total).powi(2),
            max_relative = 1e-9
        );
    }

    #[test]
    fn bound_formula_matches_frozen_arithmetic() {
        // Cross-checked against an independent high-precision evaluation
        // of the closed form.
        let report = evaluate_theorem_bound(&[3.0, 3.0, 3.0], 4, 10_000, 0.1, 1.0, 1.0).unwrap();
        assert_relative_eq!(report.bound, 1148.4551608942301, max_relative = 1e-12);
        assert_relative_eq!(report.lambda, 1312.8202570807386, max_relative = 1e-12);
        assert!(!report.vacuous);
    }

    #[test]
    fn bound_scales_as_expected() {
        let base = evaluate_theorem_bound(&[1.0], 1, 1000, 0.1, 1.0, 1.0).unwrap();
        let doubled_n = evaluate_theorem_bound(&[1.0], 1, 2000, 0.1, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            base.bound / doubled_n.bound,
            2.0_f64.sqrt(),
            epsilon = 1e-12
        );

        // Sixteen times the data quarters the squared-error bound, i.e.
        // halves the error bound (a fourth-root law in the error).
        let n16 = evaluate_theorem_bound(&[1.0], 1, 16_000, 0.1, 1.0, 1.0).unwrap();
        assert_relative_eq!(base.bound / n16.bound, 4.0, epsilon = 1e-12);

        let doubled_c = evaluate_theorem_bound(&[2.0], 1, 1000, 0.1, 1.0, 1.0).unwrap();
        assert_relative_eq!(doubled_c.bound, 2.0 * base.bound, epsilon = 1e-12);

        let vacuous = evaluate_theorem_bound(&[f64::INFINITY, 2.0], 4, 100, 0.1, 1.0, 1.0).unwrap();
        assert!(vacuous.vacuous);
    }

    #[test]
    fn bound_rejects_bad_preconditions() {
        assert!(evaluate_theorem_bound(&[0.5], 4, 100, 0.1, 1.0, 1.0).is_err());
        assert!(evaluate_theorem_bound(&[1.0], 4, 0, 0.1, 1.0, 1.0).is_err());
        assert!(evaluate_theorem_bound(&[1.0], 4, 100, 1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn condition_numbers_are_logged_per_level() {
        let bundle = build_det_instance(4, 3, 0.1).unwrap();
        let data = sample_offline(&bundle.mdp, &bundle.mu, 50, 2).unwrap();
        let est = run_lspe(&bundle.mdp, &data, &bundle.eval_policy, &bundle.phi, 0.5).unwrap();
        assert_eq!(est.condition_numbers.len(), 3);
        assert!(est
            .condition_numbers
            .iter()
            .all(|&c| c.is_finite() && c >= 1.0));
    }

    #[test]
    fn mean_estimate_is_centered_at_truth_without_ridge() {
        // A fast version of the unbiasedness check; the acceptance suite
        // runs the full-scale one.
        let bundle = build_det_instance(4, 3, max_r0_det(4, 3)).unwrap();
        let trials = 400;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for t in 0..trials {
            let seed = crate::rng::derive_seed(500, &[t]);
            let data = sample_offline(&bundle.mdp, &bundle.mu, 150, seed).unwrap();
            let est = run_lspe(&bundle.mdp, &data, &bundle.eval_policy, &bundle.phi, 0.0).unwrap();
            sum += est.estimate;
            sum_sq += est.estimate * est.estimate;
        }
        let mean = sum / trials as f64;
        let var = (sum_sq / trials as f64 - mean * mean).max(0.0);
        let se = (var / trials as f64).sqrt();
        assert!(
            (mean - bundle.ground_truth_value).abs() <= 4.0 * se,
            "mean {mean} vs truth {} (se {se})",
            bundle.ground_truth_value
        );
    }

    fn max_r0_det(d: usize, horizon: usize) -> f64 {
        crate::instances::max_r0(crate::instances::InstanceKind::Det, d, horizon)
    }

    #[test]
    fn variance_blows_up_geometrically_with_horizon() {
        // Monte Carlo oracle: the sample variance of the estimate at H = 6
        // must exceed the H = 2 variance by at least d_hat^{H-2}/4.
        let n = 100;
        let trials = 2000;
        let mut variances = Vec::new();
        for horizon in [2usize, 6] {
            let bundle = build_det_instance(4, horizon, max_r0_det(4, horizon)).unwrap();
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for t in 0..trials {
                let seed = crate::rng::derive_seed(900 + horizon as u64, &[t]);
                let data = sample_offline(&bundle.mdp, &bundle.mu, n, seed).unwrap();
                let est =
                    run_lspe(&bundle.mdp, &data, &bundle.eval_policy, &bundle.phi, 0.0).unwrap();
                sum += est.estimate;
                sum_sq += est.estimate * est.estimate;
            }
            let mean = sum / trials as f64;
            variances.push((sum_sq / trials as f64 - mean * mean).max(0.0));
        }
        let ratio = variances[1] / variances[0];
        let floor = 2.0_f64.powi(4) / 4.0;
        assert!(ratio >= floor, "variance ratio {ratio} below {floor}");
    }

    #[test]
    fn fresh_rng_sanity_for_tests() {
        let mut rng = substream_rng(77, &[0]);
        let x: f64 = rng.random();
        assert!((0.0..1.0).contains(&x));
    }
}
