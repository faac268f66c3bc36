//! Parametric generators for two hard-instance families, plus a reduction
//! from policy optimization to policy evaluation.
//!
//! Both families share the same skeleton: an "amplifier" state per level
//! whose feature vector is a scaled sum of the data-covered directions, so
//! that its value is a `sqrt(d_hat)` blow-up of the per-coordinate values.
//! The amplifier is kept out of the data distributions, which still attain
//! the best possible coverage spectrum `sigma_min(Lambda_h) = 1/d`. The
//! only difference between the `r0 = 0` world and the `r0 = r0_max` world
//! is a reward distribution (deterministic family) or a transition
//! distribution (sparse family), and the policy value moves from 0 to 1.

use alloc::{format, string::String, vec, vec::Vec};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::features::random_rotation;
use crate::features::FeatureMap;
use crate::mdp::{
    exact_policy_value, DataDistribution, LayeredMdp, OfflineDataset, Policy, Reward,
};
use crate::Result;

/// Which hard-instance family a bundle came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    /// Deterministic transitions, stochastic last-level rewards.
    Det,
    /// Stochastic transitions, deterministic sparse rewards.
    Sparse,
}

impl core::fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            InstanceKind::Det => write!(f, "det"),
            InstanceKind::Sparse => write!(f, "sparse"),
        }
    }
}

/// The basis `e_1, ..., e_d` the feature tables are written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Standard basis vectors.
    Standard,
    /// A seeded random orthonormal basis; exercises the observation that
    /// the construction only needs the `e_c` to be (nearly) orthogonal.
    Rotated { seed: u64 },
}

/// A hard instance with everything needed to run evaluation experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct HardInstanceBundle {
    pub kind: InstanceKind,
    pub mdp: LayeredMdp,
    pub phi: FeatureMap,
    pub mu: DataDistribution,
    /// The policy to be evaluated (deterministic).
    pub eval_policy: Policy,
    /// For the sparse family: the fixed policy that induces `mu` at all
    /// levels but the last. Absent after a reduction.
    pub pi_data: Option<Policy>,
    pub r0: f64,
    pub d_hat: usize,
    /// Exact policy value of `eval_policy`, computed by the DP oracle
    /// (never by the closed form, so closed form vs oracle is testable).
    pub ground_truth_value: f64,
    /// Set when the bundle has been wrapped by the optimality reduction.
    pub reduced: bool,
}

/// Largest admissible `r0` for a family at the given size, i.e. the value
/// for which the policy value is exactly one.
pub fn max_r0(kind: InstanceKind, d: usize, horizon: usize) -> f64 {
    match kind {
        InstanceKind::Det => {
            let d_hat = (d / 2) as f64;
            d_hat.powf(-(horizon as f64) / 2.0)
        }
        InstanceKind::Sparse => {
            let d_hat = (d / 2 - 1) as f64;
            d_hat.powf(-((horizon as f64) - 2.0) / 2.0)
        }
    }
}

/// Index of the amplifier state at each level of the deterministic family.
pub fn det_amplifier_index(d_hat: usize) -> usize {
    d_hat
}

/// State indices of the sparse family at levels `h >= 1`:
/// `0..d_hat` are the fan states, then hub, `+`, `-`.
pub fn sparse_hub_index(d_hat: usize) -> usize {
    d_hat
}

pub fn sparse_plus_index(d_hat: usize) -> usize {
    d_hat + 1
}

pub fn sparse_minus_index(d_hat: usize) -> usize {
    d_hat + 2
}

fn basis_features(
    mdp: &LayeredMdp,
    dim: usize,
    table: Vec<Vec<Vec<Vec<f64>>>>,
    basis: Basis,
) -> Result<FeatureMap> {
    let phi = FeatureMap::new(mdp, dim, table)?;
    match basis {
        Basis::Standard => Ok(phi),
        Basis::Rotated { seed } => phi.rotate(mdp, &random_rotation(dim, seed)),
    }
}

/// Builds the deterministic-transition hard instance with the standard
/// basis and amplifier weights `w_c = 1/sqrt(d_hat)`.
pub fn build_det_instance(d: usize, horizon: usize, r0: f64) -> Result<HardInstanceBundle> {
    build_det_instance_with(d, horizon, r0, Basis::Standard, None)
}

/// Deterministic-transition hard instance.
///
/// Levels carry `d_hat = d/2` fan states plus one amplifier state. Action 0
/// moves to the next amplifier, action 1 stays on the same fan index. Fan
/// states pay zero until the last level, where they pay a `±1` coin with
/// mean `r0`; the amplifier chain pays the deterministic increments that
/// make every policy's value telescope to `r0 * W^H`, where `W` is the sum
/// of the amplifier weights (`sqrt(d_hat)` by default).
///
/// `weights` is an expert option for the amplifier feature `sum_c w_c e_c`;
/// it must satisfy `‖w‖₂ ≤ 1` and `W = sum_c w_c > 1`, and rescales the
/// admissible `r0` range to `[0, W^{-H}]`. How large `W` must be for the
/// instance to stay hard is not validated here.
pub fn build_det_instance_with(
    d: usize,
    horizon: usize,
    r0: f64,
    basis: Basis,
    weights: Option<&[f64]>,
) -> Result<HardInstanceBundle> {
    if d < 4 || d % 2 != 0 {
        return Err(Error::InvalidInstance(format!(
            "feature dimension must be even and at least 4, got {d}"
        )));
    }
    if horizon < 1 {
        return Err(Error::InvalidInstance("horizon must be at least 1".into()));
    }
    let d_hat = d / 2;

    let weights: Vec<f64> = match weights {
        Some(w) => {
            if w.len() != d_hat {
                return Err(Error::InvalidInstance(format!(
                    "expected {d_hat} amplifier weights, got {}",
                    w.len()
                )));
            }
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInstance(
                    "amplifier weights must be finite".into(),
                ));
            }
            if w.iter().map(|x| x * x).sum::<f64>().sqrt() > 1.0 + 1e-12 {
                return Err(Error::InvalidInstance(
                    "amplifier weight vector must have norm at most 1".into(),
                ));
            }
            w.to_vec()
        }
        None => vec![1.0 / (d_hat as f64).sqrt(); d_hat],
    };
    let amp_gain: f64 = weights.iter().sum();
    if amp_gain <= 1.0 {
        return Err(Error::InvalidInstance(format!(
            "amplifier weights must sum to more than 1, got {amp_gain}"
        )));
    }
    let r0_max = amp_gain.powi(-(horizon as i32));
    if !(r0.is_finite() && (0.0..=r0_max + 1e-12).contains(&r0)) {
        return Err(Error::InvalidInstance(format!(
            "r0 = {r0} outside [0, {r0_max}]"
        )));
    }

    let n_states = d_hat + 1;
    let amp = det_amplifier_index(d_hat);
    let level_sizes = vec![n_states; horizon];

    // Transitions: action 0 jumps to the amplifier, action 1 keeps the
    // index; from the amplifier both actions land on the next amplifier.
    let mut transitions = Vec::with_capacity(horizon.saturating_sub(1));
    for _ in 0..horizon.saturating_sub(1) {
        let mut level = Vec::with_capacity(n_states);
        for s in 0..n_states {
            let mut to_amp = vec![0.0; n_states];
            to_amp[amp] = 1.0;
            let mut stay = vec![0.0; n_states];
            stay[s] = 1.0;
            level.push(vec![to_amp, stay]);
        }
        transitions.push(level);
    }

    // Amplifier chain value at (1-based) level h is r0 * W^{H - h + 1}; the
    // per-level reward is the increment of that telescoping sum.
    let mut rewards = Vec::with_capacity(horizon);
    for h in 0..horizon {
        let mut level = Vec::with_capacity(n_states);
        let last = h + 1 == horizon;
        let fan_reward = if last {
            Reward::TwoPoint {
                p_plus: (1.0 + r0) / 2.0,
            }
        } else {
            Reward::Deterministic(0.0)
        };
        let amp_reward = if last {
            Reward::Deterministic(r0 * amp_gain)
        } else {
            let exponent = (horizon - h - 1) as i32;
            Reward::Deterministic(r0 * amp_gain.powi(exponent) * (amp_gain - 1.0))
        };
        for s in 0..n_states {
            let r = if s == amp {
                amp_reward.clone()
            } else {
                fan_reward.clone()
            };
            level.push(vec![r.clone(), r]);
        }
        rewards.push(level);
    }

    let labels = (0..horizon)
        .map(|h| {
            (0..n_states)
                .map(|s| format!("s{}^{}", h + 1, s + 1))
                .collect()
        })
        .collect();

    let mdp = LayeredMdp::new(level_sizes, 2, transitions, rewards, amp, Some(labels))?;

    let mut table = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mut level = Vec::with_capacity(n_states);
        for s in 0..n_states {
            if s == amp {
                let mut v = vec![0.0; d];
                v[..d_hat].copy_from_slice(&weights);
                level.push(vec![v.clone(), v]);
            } else {
                let mut a0 = vec![0.0; d];
                a0[s] = 1.0;
                let mut a1 = vec![0.0; d];
                a1[s + d_hat] = 1.0;
                level.push(vec![a0, a1]);
            }
        }
        table.push(level);
    }
    let phi = basis_features(&mdp, d, table, basis)?;

    let supports = (0..horizon)
        .map(|_| {
            (0..d_hat)
                .flat_map(|c| [(c, 0), (c, 1)])
                .collect::<Vec<_>>()
        })
        .collect();
    let mu = DataDistribution::uniform(&mdp, supports)?;

    let eval_policy = Policy::constant(&mdp, 0)?;
    let ground_truth_value = exact_policy_value(&mdp, &eval_policy);

    Ok(HardInstanceBundle {
        kind: InstanceKind::Det,
        mdp,
        phi,
        mu,
        eval_policy,
        pi_data: None,
        r0,
        d_hat,
        ground_truth_value,
        reduced: false,
    })
}

/// Builds the sparse-reward hard instance with the standard basis.
pub fn build_sparse_instance(d: usize, horizon: usize, r0: f64) -> Result<HardInstanceBundle> {
    build_sparse_instance_with(d, horizon, r0, Basis::Standard)
}

/// Sparse-reward hard instance: stochastic transitions, deterministic
/// rewards that are nonzero only at the two terminal states `s_H^+` and
/// `s_H^-`, and data distributions induced by a fixed logging policy at
/// every level except the last.
pub fn build_sparse_instance_with(
    d: usize,
    horizon: usize,
    r0: f64,
    basis: Basis,
) -> Result<HardInstanceBundle> {
    if d < 6 || d % 2 != 0 {
        return Err(Error::InvalidInstance(format!(
            "feature dimension must be even and at least 6, got {d}"
        )));
    }
    if horizon < 4 {
        return Err(Error::InvalidInstance(format!(
            "horizon must be at least 4, got {horizon}"
        )));
    }
    let d_hat = d / 2 - 1;
    let r0_max = max_r0(InstanceKind::Sparse, d, horizon);
    if !(r0.is_finite() && (0.0..=r0_max + 1e-12).contains(&r0)) {
        return Err(Error::InvalidInstance(format!(
            "r0 = {r0} outside [0, {r0_max}]"
        )));
    }

    let hub = sparse_hub_index(d_hat);
    let plus = sparse_plus_index(d_hat);
    let minus = sparse_minus_index(d_hat);
    let n_inner = d_hat + 3;
    let d_hat_f = d_hat as f64;

    let mut level_sizes = vec![n_inner; horizon];
    level_sizes[0] = 1;

    let point = |n: usize, to: usize| -> Vec<f64> {
        let mut row = vec![0.0; n];
        row[to] = 1.0;
        row
    };
    let coin = |n: usize, p_plus: f64| -> Vec<f64> {
        let mut row = vec![0.0; n];
        row[plus] = p_plus;
        row[minus] = 1.0 - p_plus;
        row
    };

    let mut transitions = Vec::with_capacity(horizon - 1);
    // Level 1 fan-out from the single initial state.
    {
        let mut per_action = Vec::with_capacity(d);
        for a in 0..d {
            let to = if a < d_hat {
                a
            } else if a == d_hat {
                plus
            } else if a == d_hat + 1 {
                minus
            } else {
                hub
            };
            per_action.push(point(n_inner, to));
        }
        transitions.push(vec![per_action]);
    }
    // Middle levels (1-based h in 2..=H-2) and the second-to-last level.
    for h in 1..horizon - 1 {
        let second_last = h == horizon - 2;
        let mut level = Vec::with_capacity(n_inner);
        for s in 0..n_inner {
            let mut per_action = Vec::with_capacity(d);
            for a in 0..d {
                let row = if s == plus {
                    point(n_inner, plus)
                } else if s == minus {
                    point(n_inner, minus)
                } else if s == hub {
                    if a < d_hat {
                        point(n_inner, a)
                    } else if second_last {
                        coin(n_inner, (1.0 + r0 * d_hat_f.sqrt()) / 2.0)
                    } else {
                        let exponent = (horizon - (h + 1)) as f64;
                        coin(n_inner, (1.0 + r0 * d_hat_f.powf(exponent / 2.0)) / 2.0)
                    }
                } else {
                    // Fan states: absorbed into the hub until the
                    // second-to-last level, where they flip the coin that
                    // carries the only information about r0 on-support.
                    if second_last {
                        coin(n_inner, (1.0 + r0) / 2.0)
                    } else {
                        point(n_inner, hub)
                    }
                };
                per_action.push(row);
            }
            level.push(per_action);
        }
        transitions.push(level);
    }

    let mut rewards = Vec::with_capacity(horizon);
    rewards.push(vec![vec![Reward::Deterministic(0.0); d]]);
    for h in 1..horizon {
        let last = h + 1 == horizon;
        let mut level = Vec::with_capacity(n_inner);
        for s in 0..n_inner {
            let value = if last && s == plus {
                1.0
            } else if last && s == minus {
                -1.0
            } else {
                0.0
            };
            level.push(vec![Reward::Deterministic(value); d]);
        }
        rewards.push(level);
    }

    let mut labels: Vec<Vec<String>> = Vec::with_capacity(horizon);
    labels.push(vec!["s1".into()]);
    for h in 1..horizon {
        let mut level = Vec::with_capacity(n_inner);
        for s in 0..n_inner {
            let name = if s == plus {
                format!("s{}^+", h + 1)
            } else if s == minus {
                format!("s{}^-", h + 1)
            } else {
                format!("s{}^{}", h + 1, s + 1)
            };
            level.push(name);
        }
        labels.push(level);
    }

    let mdp = LayeredMdp::new(level_sizes, d, transitions, rewards, 0, Some(labels))?;

    let unit = |i: usize| -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    };
    let spread: Vec<f64> = {
        let mut v = vec![0.0; d];
        for c in 0..d_hat {
            v[c] = 1.0 / d_hat_f.sqrt();
        }
        v
    };

    let mut table = Vec::with_capacity(horizon);
    table.push(vec![(0..d).map(unit).collect::<Vec<_>>()]);
    for _ in 1..horizon {
        let mut level = Vec::with_capacity(n_inner);
        for s in 0..n_inner {
            let per_action: Vec<Vec<f64>> = if s == plus {
                vec![unit(d_hat); d]
            } else if s == minus {
                vec![unit(d_hat + 1); d]
            } else if s == hub {
                (0..d)
                    .map(|a| {
                        if a < d_hat {
                            unit(d_hat + 2 + a)
                        } else {
                            spread.clone()
                        }
                    })
                    .collect()
            } else {
                vec![unit(s); d]
            };
            level.push(per_action);
        }
        table.push(level);
    }
    let phi = basis_features(&mdp, d, table, basis)?;

    let mut supports: Vec<Vec<(usize, usize)>> = Vec::with_capacity(horizon);
    supports.push((0..d).map(|a| (0, a)).collect());
    for _ in 1..horizon {
        let mut level: Vec<(usize, usize)> = (0..d_hat).map(|c| (c, 0)).collect();
        level.push((plus, 0));
        level.push((minus, 0));
        level.extend((0..d_hat).map(|a| (hub, a)));
        supports.push(level);
    }
    let mu = DataDistribution::uniform(&mdp, supports)?;

    let eval_policy = Policy::constant(&mdp, d - 1)?;

    let uniform_all = vec![1.0 / d as f64; d];
    let mut hub_row = vec![0.0; d];
    for a in 0..d_hat {
        hub_row[a] = 1.0 / d_hat_f;
    }
    let mut pi_data_probs: Vec<Vec<Vec<f64>>> = Vec::with_capacity(horizon);
    pi_data_probs.push(vec![uniform_all]);
    for _ in 1..horizon {
        let mut level = Vec::with_capacity(n_inner);
        for s in 0..n_inner {
            if s == hub {
                level.push(hub_row.clone());
            } else {
                let mut row = vec![0.0; d];
                row[0] = 1.0;
                level.push(row);
            }
        }
        pi_data_probs.push(level);
    }
    let pi_data = Policy::new(&mdp, pi_data_probs)?;

    let ground_truth_value = exact_policy_value(&mdp, &eval_policy);

    Ok(HardInstanceBundle {
        kind: InstanceKind::Sparse,
        mdp,
        phi,
        mu,
        eval_policy,
        pi_data: Some(pi_data),
        r0,
        d_hat,
        ground_truth_value,
        reduced: false,
    })
}

/// Wraps a bundle in the reduction from finding a near-optimal policy to
/// policy evaluation: a fresh initial state where action 0 pays a fixed 0.5
/// and falls into an absorbing zero-reward chain, while every other action
/// enters the original instance.
///
/// The chain state gets the all-zero feature vector and the new initial
/// state two fresh orthonormal directions, so the feature dimension grows
/// by two and linear realizability is preserved for any policy that was
/// realizable in the base instance. The data distributions are carried
/// over on the inner levels and are uniform over the new state's actions
/// at the first level.
pub fn build_optimality_reduction(bundle: &HardInstanceBundle) -> Result<HardInstanceBundle> {
    let inner = &bundle.mdp;
    let n_actions = inner.n_actions();
    let horizon = inner.horizon() + 1;
    let d = bundle.phi.dim() + 2;

    let mut level_sizes = Vec::with_capacity(horizon);
    level_sizes.push(1);
    // One extra absorbing chain state per inner level, appended last.
    for h in 0..inner.horizon() {
        level_sizes.push(inner.n_states(h) + 1);
    }

    let mut transitions = Vec::with_capacity(horizon - 1);
    {
        let n_next = level_sizes[1];
        let chain = n_next - 1;
        let mut per_action = Vec::with_capacity(n_actions);
        for a in 0..n_actions {
            let mut row = vec![0.0; n_next];
            if a == 0 {
                row[chain] = 1.0;
            } else {
                row[inner.initial_state()] = 1.0;
            }
            per_action.push(row);
        }
        transitions.push(vec![per_action]);
    }
    for h in 0..inner.horizon() - 1 {
        let n_here = level_sizes[h + 1];
        let n_next = level_sizes[h + 2];
        let chain_next = n_next - 1;
        let mut level = Vec::with_capacity(n_here);
        for s in 0..n_here {
            let mut per_action = Vec::with_capacity(n_actions);
            for a in 0..n_actions {
                let mut row = vec![0.0; n_next];
                if s == n_here - 1 {
                    row[chain_next] = 1.0;
                } else {
                    for (s_next, &p) in inner.transition(h, s, a).iter().enumerate() {
                        row[s_next] = p;
                    }
                }
                per_action.push(row);
            }
            level.push(per_action);
        }
        transitions.push(level);
    }

    let mut rewards = Vec::with_capacity(horizon);
    {
        let mut per_action = Vec::with_capacity(n_actions);
        for a in 0..n_actions {
            per_action.push(if a == 0 {
                Reward::Deterministic(0.5)
            } else {
                Reward::Deterministic(0.0)
            });
        }
        rewards.push(vec![per_action]);
    }
    for h in 0..inner.horizon() {
        let n_here = level_sizes[h + 1];
        let mut level = Vec::with_capacity(n_here);
        for s in 0..n_here {
            if s == n_here - 1 {
                level.push(vec![Reward::Deterministic(0.0); n_actions]);
            } else {
                level.push(
                    (0..n_actions)
                        .map(|a| inner.reward(h, s, a).clone())
                        .collect(),
                );
            }
        }
        rewards.push(level);
    }

    let mut labels: Vec<Vec<String>> = Vec::with_capacity(horizon);
    labels.push(vec!["s0".into()]);
    for h in 0..inner.horizon() {
        let mut level: Vec<String> = (0..inner.n_states(h))
            .map(|s| inner.label(h, s).into())
            .collect();
        level.push(format!("z{}", h + 2));
        labels.push(level);
    }

    let mdp = LayeredMdp::new(
        level_sizes.clone(),
        n_actions,
        transitions,
        rewards,
        0,
        Some(labels),
    )?;

    let mut table = Vec::with_capacity(horizon);
    {
        let mut per_action = Vec::with_capacity(n_actions);
        for a in 0..n_actions {
            let mut v = vec![0.0; d];
            v[if a == 0 { d - 2 } else { d - 1 }] = 1.0;
            per_action.push(v);
        }
        table.push(vec![per_action]);
    }
    for h in 0..inner.horizon() {
        let n_here = level_sizes[h + 1];
        let mut level = Vec::with_capacity(n_here);
        for s in 0..n_here {
            if s == n_here - 1 {
                level.push(vec![vec![0.0; d]; n_actions]);
            } else {
                level.push(
                    (0..n_actions)
                        .map(|a| {
                            let mut v = bundle.phi.phi(h, s, a).to_vec();
                            v.resize(d, 0.0);
                            v
                        })
                        .collect(),
                );
            }
        }
        table.push(level);
    }
    let phi = FeatureMap::new(&mdp, d, table)?;

    let mut atoms = Vec::with_capacity(horizon);
    atoms.push(
        (0..n_actions)
            .map(|a| (0, a, 1.0 / n_actions as f64))
            .collect(),
    );
    for h in 0..inner.horizon() {
        atoms.push(bundle.mu.atoms(h).to_vec());
    }
    let mu = DataDistribution::new(&mdp, atoms)?;

    // The evaluation policy enters the instance and then follows the
    // bundle's policy; the chain states play action 0.
    let enter_action = 1.min(n_actions - 1);
    let eval_policy = Policy::deterministic(&mdp, |h, s| {
        if h == 0 {
            enter_action
        } else if s == level_sizes[h] - 1 {
            0
        } else {
            bundle
                .eval_policy
                .deterministic_action(h - 1, s)
                .expect("hard-instance evaluation policies are deterministic")
        }
    })?;

    let ground_truth_value = exact_policy_value(&mdp, &eval_policy);

    Ok(HardInstanceBundle {
        kind: bundle.kind,
        mdp,
        phi,
        mu,
        eval_policy,
        pi_data: None,
        r0: bundle.r0,
        d_hat: bundle.d_hat,
        ground_truth_value,
        reduced: true,
    })
}

/// Sufficient statistic for the two-world distinguishing test: counts of
/// the `+`-ish and `-`-ish outcomes at the one place where the worlds
/// differ on the support of the data distributions.
///
/// For the deterministic family these are the `+1`/`-1` reward counts at
/// the last level; for the sparse family, the `s_H^+`/`s_H^-` successor
/// counts among second-to-last-level samples at fan states. Either way
/// the count pair is `Binomial(m, (1 ± r0)/2)`-distributed given its total.
pub fn sufficient_counts(
    bundle: &HardInstanceBundle,
    dataset: &OfflineDataset,
) -> Result<(u64, u64)> {
    if bundle.reduced {
        return Err(Error::InvalidInstance(
            "distinguishing statistic is defined on unreduced bundles".into(),
        ));
    }
    let horizon = bundle.mdp.horizon();
    match bundle.kind {
        InstanceKind::Det => {
            let mut plus = 0;
            let mut minus = 0;
            for t in dataset.samples(horizon - 1) {
                if t.reward > 0.0 {
                    plus += 1;
                } else {
                    minus += 1;
                }
            }
            Ok((plus, minus))
        }
        InstanceKind::Sparse => {
            let plus_state = sparse_plus_index(bundle.d_hat);
            let minus_state = sparse_minus_index(bundle.d_hat);
            let mut plus = 0;
            let mut minus = 0;
            for t in dataset.samples(horizon - 2) {
                if t.state < bundle.d_hat {
                    match t.next_state {
                        Some(s) if s == plus_state => plus += 1,
                        Some(s) if s == minus_state => minus += 1,
                        _ => {}
                    }
                }
            }
            Ok((plus, minus))
        }
    }
}
