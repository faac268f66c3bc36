//! Feature maps, linear-realizability fitting, and coverage spectra.
//!
//! A feature map assigns a `d`-dimensional vector to every state-action
//! pair, with all norms bounded by one. Realizability of a policy means its
//! exact `Q`-function is linear in those features at every level; coverage
//! of a data distribution is measured by the minimum eigenvalue of its
//! feature second-moment matrix, which can never exceed `1/d` under the
//! norm bound.

use alloc::{format, string::String, vec::Vec};

#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::Error;
use crate::linalg;
use crate::mdp::{exact_q_values, DataDistribution, LayeredMdp, Policy};
use crate::rng::substream_rng;
use crate::Result;

/// Slack allowed on the unit-norm bound, absorbing accumulated roundoff.
pub const NORM_TOL: f64 = 1e-12;

/// Residual below which a least-squares fit is treated as exact
/// realizability. Dynamic programming and the solver are both accurate to
/// roughly 1e-12; the slack covers conditioning.
pub const REALIZABILITY_TOL: f64 = 1e-8;

/// A table of `d`-dimensional feature vectors, one per state-action pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    dim: usize,
    /// `table[h][s][a]` is a length-`dim` vector.
    table: Vec<Vec<Vec<Vec<f64>>>>,
}

impl FeatureMap {
    /// Validates the table shape against `mdp` and the norm bound
    /// `‖phi(s, a)‖₂ ≤ 1`.
    pub fn new(mdp: &LayeredMdp, dim: usize, table: Vec<Vec<Vec<Vec<f64>>>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFeatureMap(
                "dimension must be positive".into(),
            ));
        }
        if table.len() != mdp.horizon() {
            return Err(Error::InvalidFeatureMap(format!(
                "expected {} levels, got {}",
                mdp.horizon(),
                table.len()
            )));
        }
        for (h, level) in table.iter().enumerate() {
            if level.len() != mdp.n_states(h) {
                return Err(Error::InvalidFeatureMap(format!(
                    "level {h} has {} states, expected {}",
                    level.len(),
                    mdp.n_states(h)
                )));
            }
            for (s, per_action) in level.iter().enumerate() {
                if per_action.len() != mdp.n_actions() {
                    return Err(Error::InvalidFeatureMap(format!(
                        "feature row count mismatch at level {h}, state {s}"
                    )));
                }
                for (a, phi) in per_action.iter().enumerate() {
                    if phi.len() != dim {
                        return Err(Error::InvalidFeatureMap(format!(
                            "feature length mismatch at level {h}, state {s}, action {a}"
                        )));
                    }
                    let norm_sq: f64 = phi.iter().map(|x| x * x).sum();
                    if !norm_sq.is_finite() || norm_sq.sqrt() > 1.0 + NORM_TOL {
                        return Err(Error::InvalidFeatureMap(format!(
                            "feature norm {} exceeds 1 at level {h}, state {s}, action {a}",
                            norm_sq.sqrt()
                        )));
                    }
                }
            }
        }
        Ok(Self { dim, table })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phi(&self, h: usize, s: usize, a: usize) -> &[f64] {
        &self.table[h][s][a]
    }

    pub fn phi_vector(&self, h: usize, s: usize, a: usize) -> DVector<f64> {
        DVector::from_column_slice(&self.table[h][s][a])
    }

    pub fn table(&self) -> &Vec<Vec<Vec<Vec<f64>>>> {
        &self.table
    }

    /// Re-bases every feature as `q * phi` for an orthonormal `q`.
    pub fn rotate(&self, mdp: &LayeredMdp, q: &DMatrix<f64>) -> Result<Self> {
        if q.nrows() != self.dim || q.ncols() != self.dim {
            return Err(Error::InvalidFeatureMap(format!(
                "rotation is {}x{}, features have dimension {}",
                q.nrows(),
                q.ncols(),
                self.dim
            )));
        }
        let table = self
            .table
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|per_action| {
                        per_action
                            .iter()
                            .map(|phi| {
                                let v = q * DVector::from_column_slice(phi);
                                v.iter().cloned().collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        FeatureMap::new(mdp, self.dim, table)
    }
}

/// A Haar-ish random orthogonal matrix: QR of a seeded Gaussian matrix with
/// the sign convention fixed by the diagonal of `R`.
pub fn random_rotation(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = substream_rng(seed, &[0x5157]);
    let mut gaussian = |_: usize, _: usize| {
        // Box-Muller; one draw per entry is plenty here.
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
    };
    let g = DMatrix::from_fn(dim, dim, &mut gaussian);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            for i in 0..dim {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Per-level least-squares fit of the exact `Q`-function in the features.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelFit {
    /// Minimum-norm solution of the level's least-squares problem.
    pub theta: DVector<f64>,
    /// `max_{(s,a)} |Q_h(s,a) - phi(s,a)ᵀ theta|`.
    pub sup_residual: f64,
    pub theta_norm: f64,
}

/// Result of fitting one policy's exact `Q`-values; realizability holds
/// when every level's sup-norm residual is (numerically) zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizabilityReport {
    pub levels: Vec<LevelFit>,
    pub max_residual: f64,
}

impl RealizabilityReport {
    pub fn theta(&self, h: usize) -> &DVector<f64> {
        &self.levels[h].theta
    }

    pub fn is_realizable(&self, tol: f64) -> bool {
        self.max_residual < tol
    }
}

/// Fits `Q_h^pi(s, a) ~ phi(s, a)ᵀ theta_h` per level over all state-action
/// pairs, by a rank-revealing factorization (minimum-norm solution on rank
/// deficiency), and reports the sup-norm residuals.
pub fn fit_linear_q(mdp: &LayeredMdp, pi: &Policy, phi: &FeatureMap) -> RealizabilityReport {
    let values = exact_q_values(mdp, pi);
    let d = phi.dim();
    let mut levels = Vec::with_capacity(mdp.horizon());
    let mut max_residual = 0.0_f64;

    for h in 0..mdp.horizon() {
        let n_rows = mdp.n_states(h) * mdp.n_actions();
        let mut a_mat = DMatrix::zeros(n_rows, d);
        let mut b = DVector::zeros(n_rows);
        let mut row = 0;
        for s in 0..mdp.n_states(h) {
            for a in 0..mdp.n_actions() {
                for (j, &x) in phi.phi(h, s, a).iter().enumerate() {
                    a_mat[(row, j)] = x;
                }
                b[row] = values.q(h, s, a);
                row += 1;
            }
        }
        let theta = linalg::min_norm_lstsq(&a_mat, &b);
        let residuals = &a_mat * &theta - &b;
        let sup_residual = residuals.iter().fold(0.0_f64, |acc, r| acc.max(r.abs()));
        max_residual = max_residual.max(sup_residual);
        levels.push(LevelFit {
            theta_norm: theta.norm(),
            theta,
            sup_residual,
        });
    }

    RealizabilityReport {
        levels,
        max_residual,
    }
}

/// Realizability spot check: all constant policies plus `n_random` seeded
/// random stochastic policies. Exhaustive policy enumeration is
/// exponential; for the instance families here a per-policy proof exists,
/// so a seeded sample is evidence enough.
#[derive(Debug, Clone)]
pub struct RealizabilitySpotCheck {
    /// One human-readable label per checked policy.
    pub policy_labels: Vec<String>,
    pub reports: Vec<RealizabilityReport>,
    pub worst_residual: f64,
}

pub fn spot_check_realizability(
    mdp: &LayeredMdp,
    phi: &FeatureMap,
    n_random: usize,
    seed: u64,
) -> Result<RealizabilitySpotCheck> {
    let mut policy_labels = Vec::new();
    let mut reports = Vec::new();
    let mut worst = 0.0_f64;

    for a in 0..mdp.n_actions() {
        let pi = Policy::constant(mdp, a)?;
        let report = fit_linear_q(mdp, &pi, phi);
        worst = worst.max(report.max_residual);
        policy_labels.push(format!("constant a{}", a + 1));
        reports.push(report);
    }
    for i in 0..n_random {
        let mut rng = substream_rng(seed, &[0x9019, i as u64]);
        let pi = Policy::random_stochastic(mdp, &mut rng);
        let report = fit_linear_q(mdp, &pi, phi);
        worst = worst.max(report.max_residual);
        policy_labels.push(format!("random {i}"));
        reports.push(report);
    }

    Ok(RealizabilitySpotCheck {
        policy_labels,
        reports,
        worst_residual: worst,
    })
}

/// Feature second-moment matrix of one level's data distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCovariance {
    /// `Lambda_h = E_{(s,a) ~ mu_h}[phi phiᵀ]`, exact over the support.
    pub lambda: DMatrix<f64>,
    /// Eigenvalues ascending.
    pub eigenvalues: Vec<f64>,
    pub sigma_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceReport {
    pub levels: Vec<LevelCovariance>,
}

/// Exact per-level feature covariance matrices `Lambda_h` of `mu` and their
/// spectra.
pub fn covariance(mu: &DataDistribution, phi: &FeatureMap) -> CovarianceReport {
    let d = phi.dim();
    let mut levels = Vec::with_capacity(mu.level_count());
    for h in 0..mu.level_count() {
        let mut lambda = DMatrix::zeros(d, d);
        for &(s, a, p) in mu.atoms(h) {
            let x = phi.phi_vector(h, s, a);
            lambda.ger(p, &x, &x, 1.0);
        }
        let lambda = linalg::symmetrize(&lambda);
        let eigenvalues = linalg::symmetric_eigenvalues(&lambda);
        levels.push(LevelCovariance {
            sigma_min: eigenvalues[0],
            eigenvalues,
            lambda,
        });
    }
    CovarianceReport { levels }
}

/// One coverage violation: either the spectrum dips below the requested
/// threshold, or it exceeds the `1/d` ceiling that unit-norm features
/// impose.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageViolation {
    pub level: usize,
    pub sigma_min: f64,
    pub reason: CoverageViolationReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageViolationReason {
    BelowThreshold,
    AboveTheoreticalMax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub pass: bool,
    pub threshold: f64,
    pub sigma_min: Vec<f64>,
    pub violations: Vec<CoverageViolation>,
}

/// Checks `sigma_min(Lambda_h) ≥ threshold` at every level, and that no
/// level exceeds the `1/d` ceiling. Violations are reported, not raised.
pub fn check_coverage(mu: &DataDistribution, phi: &FeatureMap, threshold: f64) -> CoverageReport {
    let cov = covariance(mu, phi);
    let ceiling = 1.0 / phi.dim() as f64 + 1e-12;
    let mut violations = Vec::new();
    let mut sigma_min = Vec::with_capacity(cov.levels.len());
    for (h, level) in cov.levels.iter().enumerate() {
        sigma_min.push(level.sigma_min);
        if level.sigma_min < threshold {
            violations.push(CoverageViolation {
                level: h,
                sigma_min: level.sigma_min,
                reason: CoverageViolationReason::BelowThreshold,
            });
        }
        if level.sigma_min > ceiling {
            violations.push(CoverageViolation {
                level: h,
                sigma_min: level.sigma_min,
                reason: CoverageViolationReason::AboveTheoreticalMax,
            });
        }
    }
    CoverageReport {
        pass: violations.is_empty(),
        threshold,
        sigma_min,
        violations,
    }
}
