//! JSON document formats for instances, datasets, and reports.
//!
//! The schema mirrors the in-memory types field by field but stays plain
//! (nested vectors, tagged enums) so documents are stable, diffable, and
//! readable outside this crate. Loading always goes through the validating
//! constructors, so a hand-edited document that violates an invariant is
//! rejected with the constructor's error.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use opelab_core::instances::{HardInstanceBundle, InstanceKind};
use opelab_core::lspe::{IdentityReport, LinearQEstimate};
use opelab_core::mdp::{DataDistribution, LayeredMdp, Policy, Reward};
use opelab_core::shift::ShiftReport;
use opelab_core::{FeatureMap, RealizabilityReport};

use crate::{CliError, Result};

pub const BUNDLE_FORMAT: &str = "opelab-bundle-v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RewardDoc {
    Deterministic { value: f64 },
    TwoPoint { p_plus: f64 },
}

impl From<&Reward> for RewardDoc {
    fn from(r: &Reward) -> Self {
        match *r {
            Reward::Deterministic(value) => RewardDoc::Deterministic { value },
            Reward::TwoPoint { p_plus } => RewardDoc::TwoPoint { p_plus },
        }
    }
}

impl From<&RewardDoc> for Reward {
    fn from(doc: &RewardDoc) -> Self {
        match *doc {
            RewardDoc::Deterministic { value } => Reward::Deterministic(value),
            RewardDoc::TwoPoint { p_plus } => Reward::TwoPoint { p_plus },
        }
    }
}

/// Serialized layered MDP: per-level state counts and labels, transition
/// rows, reward models, and the initial state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdpDoc {
    pub level_sizes: Vec<usize>,
    pub n_actions: usize,
    /// `transitions[h][s][a]` is a probability row over level `h + 1`.
    pub transitions: Vec<Vec<Vec<Vec<f64>>>>,
    /// `rewards[h][s][a]`.
    pub rewards: Vec<Vec<Vec<RewardDoc>>>,
    pub initial_state: usize,
    pub labels: Vec<Vec<String>>,
}

impl MdpDoc {
    pub fn from_core(mdp: &LayeredMdp) -> Self {
        Self {
            level_sizes: mdp.level_sizes().to_vec(),
            n_actions: mdp.n_actions(),
            transitions: mdp.transitions().clone(),
            rewards: mdp
                .rewards()
                .iter()
                .map(|level| {
                    level
                        .iter()
                        .map(|row| row.iter().map(RewardDoc::from).collect())
                        .collect()
                })
                .collect(),
            initial_state: mdp.initial_state(),
            labels: mdp.labels().clone(),
        }
    }

    pub fn to_core(&self) -> Result<LayeredMdp> {
        let rewards = self
            .rewards
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|row| row.iter().map(Reward::from).collect())
                    .collect()
            })
            .collect();
        Ok(LayeredMdp::new(
            self.level_sizes.clone(),
            self.n_actions,
            self.transitions.clone(),
            rewards,
            self.initial_state,
            Some(self.labels.clone()),
        )?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionDoc {
    /// `atoms[h]` lists `(state, action, probability)` triples.
    pub atoms: Vec<Vec<(usize, usize, f64)>>,
}

impl DistributionDoc {
    pub fn from_core(mu: &DataDistribution) -> Self {
        Self {
            atoms: mu.all_atoms().clone(),
        }
    }

    pub fn to_core(&self, mdp: &LayeredMdp) -> Result<DataDistribution> {
        Ok(DataDistribution::new(mdp, self.atoms.clone())?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyDoc {
    /// `probs[h][s][a]`.
    pub probs: Vec<Vec<Vec<f64>>>,
}

impl PolicyDoc {
    pub fn from_core(pi: &Policy) -> Self {
        Self {
            probs: pi.probs().clone(),
        }
    }

    pub fn to_core(&self, mdp: &LayeredMdp) -> Result<Policy> {
        Ok(Policy::new(mdp, self.probs.clone())?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureMapDoc {
    pub dim: usize,
    /// `table[h][s][a]` is a `dim`-vector.
    pub table: Vec<Vec<Vec<Vec<f64>>>>,
}

impl FeatureMapDoc {
    pub fn from_core(phi: &FeatureMap) -> Self {
        Self {
            dim: phi.dim(),
            table: phi.table().clone(),
        }
    }

    pub fn to_core(&self, mdp: &LayeredMdp) -> Result<FeatureMap> {
        Ok(FeatureMap::new(mdp, self.dim, self.table.clone())?)
    }
}

/// A hard-instance bundle: the MDP, features, data distributions, and
/// policies of one experiment world.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleDoc {
    pub format: String,
    pub kind: String,
    pub reduced: bool,
    pub r0: f64,
    pub d_hat: usize,
    pub ground_truth_value: f64,
    pub mdp: MdpDoc,
    pub features: FeatureMapDoc,
    pub mu: DistributionDoc,
    pub eval_policy: PolicyDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_data: Option<PolicyDoc>,
}

impl BundleDoc {
    pub fn from_core(bundle: &HardInstanceBundle) -> Self {
        Self {
            format: BUNDLE_FORMAT.to_string(),
            kind: bundle.kind.to_string(),
            reduced: bundle.reduced,
            r0: bundle.r0,
            d_hat: bundle.d_hat,
            ground_truth_value: bundle.ground_truth_value,
            mdp: MdpDoc::from_core(&bundle.mdp),
            features: FeatureMapDoc::from_core(&bundle.phi),
            mu: DistributionDoc::from_core(&bundle.mu),
            eval_policy: PolicyDoc::from_core(&bundle.eval_policy),
            pi_data: bundle.pi_data.as_ref().map(PolicyDoc::from_core),
        }
    }

    pub fn to_core(&self) -> Result<HardInstanceBundle> {
        if self.format != BUNDLE_FORMAT {
            return Err(CliError::usage(format!(
                "unsupported bundle format {:?} (expected {BUNDLE_FORMAT:?})",
                self.format
            )));
        }
        let kind = match self.kind.as_str() {
            "det" => InstanceKind::Det,
            "sparse" => InstanceKind::Sparse,
            other => {
                return Err(CliError::usage(format!("unknown instance kind {other:?}")));
            }
        };
        let mdp = self.mdp.to_core()?;
        let phi = self.features.to_core(&mdp)?;
        let mu = self.mu.to_core(&mdp)?;
        let eval_policy = self.eval_policy.to_core(&mdp)?;
        let pi_data = self
            .pi_data
            .as_ref()
            .map(|doc| doc.to_core(&mdp))
            .transpose()?;

        let recomputed = opelab_core::exact_policy_value(&mdp, &eval_policy);
        if (recomputed - self.ground_truth_value).abs() > 1e-10 {
            return Err(CliError::usage(format!(
                "bundle ground truth {} disagrees with the DP oracle {recomputed}",
                self.ground_truth_value
            )));
        }

        Ok(HardInstanceBundle {
            kind,
            mdp,
            phi,
            mu,
            eval_policy,
            pi_data,
            r0: self.r0,
            d_hat: self.d_hat,
            ground_truth_value: self.ground_truth_value,
            reduced: self.reduced,
        })
    }
}

/// Realizability report: per-level fitted weights and residuals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealizabilityDoc {
    pub levels: Vec<RealizabilityLevelDoc>,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealizabilityLevelDoc {
    pub theta: Vec<f64>,
    pub sup_residual: f64,
    pub theta_norm: f64,
}

impl RealizabilityDoc {
    pub fn from_core(report: &RealizabilityReport) -> Self {
        Self {
            levels: report
                .levels
                .iter()
                .map(|l| RealizabilityLevelDoc {
                    theta: l.theta.iter().cloned().collect(),
                    sup_residual: l.sup_residual,
                    theta_norm: l.theta_norm,
                })
                .collect(),
            max_residual: report.max_residual,
        }
    }
}

/// LSPE estimate: the weights and the value estimate (design matrices are
/// omitted; they are reproducible from the seed).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateDoc {
    pub lambda: f64,
    pub n_per_level: usize,
    pub theta: Vec<Vec<f64>>,
    pub condition_numbers: Vec<f64>,
    pub estimate: f64,
    pub ground_truth_value: f64,
}

impl EstimateDoc {
    pub fn from_core(est: &LinearQEstimate, ground_truth_value: f64) -> Self {
        Self {
            lambda: est.lambda,
            n_per_level: est.n,
            theta: est
                .theta
                .iter()
                .map(|t| t.iter().cloned().collect())
                .collect(),
            condition_numbers: est.condition_numbers.clone(),
            estimate: est.estimate,
            ground_truth_value,
        }
    }
}

/// Identity check: both sides and per-level noise summaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityDoc {
    pub left: f64,
    pub right: f64,
    pub relative_discrepancy: f64,
    pub v_exact: f64,
    pub v_hat: f64,
    /// Per-level max |xi| (the full vectors are dataset-sized).
    pub noise_sup: Vec<f64>,
}

impl IdentityDoc {
    pub fn from_core(report: &IdentityReport) -> Self {
        Self {
            left: report.left,
            right: report.right,
            relative_discrepancy: report.relative_discrepancy,
            v_exact: report.v_exact,
            v_hat: report.v_hat,
            noise_sup: report.noise.iter().map(|xi| xi.amax()).collect(),
        }
    }
}

/// Shift report: per-level covariance matrices and coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftDoc {
    pub levels: Vec<ShiftLevelDoc>,
    /// Serialized as a string so `inf` survives JSON.
    pub shift_product: String,
    pub any_infinite: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftLevelDoc {
    pub lambda: Vec<Vec<f64>>,
    pub lambda_bar: Vec<Vec<f64>>,
    pub sigma_min: f64,
    /// `"inf"` when domination is impossible.
    pub shift: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completeness_residual: Option<f64>,
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl ShiftDoc {
    pub fn from_core(report: &ShiftReport) -> Self {
        Self {
            levels: report
                .levels
                .iter()
                .map(|l| ShiftLevelDoc {
                    lambda: matrix_rows(&l.lambda),
                    lambda_bar: matrix_rows(&l.lambda_bar),
                    sigma_min: l.sigma_min,
                    shift: if l.shift.is_finite() {
                        l.shift.to_string()
                    } else {
                        "inf".to_string()
                    },
                    completeness_residual: l.completeness_residual,
                })
                .collect(),
            shift_product: if report.shift_product.is_finite() {
                report.shift_product.to_string()
            } else {
                "inf".to_string()
            },
            any_infinite: report.any_infinite,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|source| CliError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
    }
    let mut body = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    body.push('\n');
    fs::write(path, body).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let body = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&body).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_bundle(path: &Path) -> Result<HardInstanceBundle> {
    let doc: BundleDoc = read_json(path)?;
    doc.to_core()
}

pub fn save_bundle(path: &Path, bundle: &HardInstanceBundle) -> Result<()> {
    write_json(path, &BundleDoc::from_core(bundle))
}
