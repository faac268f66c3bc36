//! Layered finite-horizon MDPs, exact value oracles, and offline sampling.
//!
//! States live in per-level sets that do not intersect; transitions from
//! level `h` land only in level `h + 1`. Levels are 0-based throughout the
//! API (`0..H`); display labels and CSV output use the 1-based convention.

use alloc::{format, string::String, vec, vec::Vec};

#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;

use crate::error::Error;
use crate::rng::substream_rng;
use crate::Result;

/// Tolerance for probability vectors summing to one.
pub const DIST_SUM_TOL: f64 = 1e-12;

/// A per-(state, action) reward model.
///
/// Both hard-instance families need only these two shapes, and restricting
/// to them keeps reward likelihoods exact.
#[derive(Debug, Clone, PartialEq)]
pub enum Reward {
    /// Always the given value, which must lie in `[-1, 1]`.
    Deterministic(f64),
    /// `+1` with probability `p_plus`, `-1` otherwise.
    TwoPoint { p_plus: f64 },
}

impl Reward {
    /// Expected reward.
    pub fn mean(&self) -> f64 {
        match *self {
            Reward::Deterministic(v) => v,
            Reward::TwoPoint { p_plus } => 2.0 * p_plus - 1.0,
        }
    }

    /// Draws a realization.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Reward::Deterministic(v) => v,
            Reward::TwoPoint { p_plus } => {
                if rng.random::<f64>() < p_plus {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    fn validate(&self, context: &str) -> Result<()> {
        match *self {
            Reward::Deterministic(v) => {
                if !(v.is_finite() && (-1.0..=1.0).contains(&v)) {
                    return Err(Error::InvalidMdp(format!(
                        "deterministic reward {v} outside [-1, 1] at {context}"
                    )));
                }
            }
            Reward::TwoPoint { p_plus } => {
                if !(p_plus.is_finite() && (0.0..=1.0).contains(&p_plus)) {
                    return Err(Error::InvalidMdp(format!(
                        "two-point probability {p_plus} outside [0, 1] at {context}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A layered episodic MDP with a fixed initial state.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredMdp {
    horizon: usize,
    n_actions: usize,
    level_sizes: Vec<usize>,
    /// `transitions[h][s][a]` is a probability row over level `h + 1`.
    transitions: Vec<Vec<Vec<Vec<f64>>>>,
    /// `rewards[h][s][a]`.
    rewards: Vec<Vec<Vec<Reward>>>,
    initial_state: usize,
    labels: Vec<Vec<String>>,
    /// Cumulative state counts; `offsets[h] + s` is the global state id.
    offsets: Vec<usize>,
}

impl LayeredMdp {
    /// Builds and validates an MDP. `labels` may be empty, in which case
    /// 1-based defaults `s{h}_{i}` are generated.
    pub fn new(
        level_sizes: Vec<usize>,
        n_actions: usize,
        transitions: Vec<Vec<Vec<Vec<f64>>>>,
        rewards: Vec<Vec<Vec<Reward>>>,
        initial_state: usize,
        labels: Option<Vec<Vec<String>>>,
    ) -> Result<Self> {
        let horizon = level_sizes.len();
        if horizon == 0 {
            return Err(Error::InvalidMdp("horizon must be at least 1".into()));
        }
        if n_actions == 0 {
            return Err(Error::InvalidMdp("need at least one action".into()));
        }
        if level_sizes.contains(&0) {
            return Err(Error::InvalidMdp(
                "every level needs at least one state".into(),
            ));
        }
        if initial_state >= level_sizes[0] {
            return Err(Error::InvalidMdp(format!(
                "initial state {initial_state} outside level 1 (size {})",
                level_sizes[0]
            )));
        }

        if transitions.len() != horizon - 1 {
            return Err(Error::InvalidMdp(format!(
                "expected {} transition levels, got {}",
                horizon - 1,
                transitions.len()
            )));
        }
        for (h, level) in transitions.iter().enumerate() {
            if level.len() != level_sizes[h] {
                return Err(Error::InvalidMdp(format!(
                    "transition level {h} has {} states, expected {}",
                    level.len(),
                    level_sizes[h]
                )));
            }
            for (s, per_action) in level.iter().enumerate() {
                if per_action.len() != n_actions {
                    return Err(Error::InvalidMdp(format!(
                        "transition row count mismatch at level {h}, state {s}"
                    )));
                }
                for (a, row) in per_action.iter().enumerate() {
                    if row.len() != level_sizes[h + 1] {
                        return Err(Error::InvalidMdp(format!(
                            "transition row length mismatch at level {h}, state {s}, action {a}"
                        )));
                    }
                    let mut sum = 0.0;
                    for &p in row {
                        if !(p.is_finite() && p >= 0.0) {
                            return Err(Error::InvalidMdp(format!(
                                "negative or non-finite transition probability at level {h}, state {s}, action {a}"
                            )));
                        }
                        sum += p;
                    }
                    if (sum - 1.0).abs() > DIST_SUM_TOL {
                        return Err(Error::InvalidMdp(format!(
                            "transition row sums to {sum} at level {h}, state {s}, action {a}"
                        )));
                    }
                }
            }
        }

        if rewards.len() != horizon {
            return Err(Error::InvalidMdp(format!(
                "expected {horizon} reward levels, got {}",
                rewards.len()
            )));
        }
        for (h, level) in rewards.iter().enumerate() {
            if level.len() != level_sizes[h] {
                return Err(Error::InvalidMdp(format!(
                    "reward level {h} has {} states, expected {}",
                    level.len(),
                    level_sizes[h]
                )));
            }
            for (s, per_action) in level.iter().enumerate() {
                if per_action.len() != n_actions {
                    return Err(Error::InvalidMdp(format!(
                        "reward row count mismatch at level {h}, state {s}"
                    )));
                }
                for (a, r) in per_action.iter().enumerate() {
                    r.validate(&format!("level {h}, state {s}, action {a}"))?;
                }
            }
        }

        let labels = match labels {
            Some(labels) => {
                if labels.len() != horizon
                    || labels.iter().zip(&level_sizes).any(|(l, &n)| l.len() != n)
                {
                    return Err(Error::InvalidMdp("label table shape mismatch".into()));
                }
                labels
            }
            None => level_sizes
                .iter()
                .enumerate()
                .map(|(h, &n)| (0..n).map(|s| format!("s{}_{}", h + 1, s + 1)).collect())
                .collect(),
        };

        let mut offsets = Vec::with_capacity(horizon);
        let mut acc = 0;
        for &n in &level_sizes {
            offsets.push(acc);
            acc += n;
        }

        Ok(Self {
            horizon,
            n_actions,
            level_sizes,
            transitions,
            rewards,
            initial_state,
            labels,
            offsets,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Number of states at level `h`.
    pub fn n_states(&self, h: usize) -> usize {
        self.level_sizes[h]
    }

    pub fn level_sizes(&self) -> &[usize] {
        &self.level_sizes
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    /// Transition probability row of `(s, a)` at level `h < H - 1`.
    pub fn transition(&self, h: usize, s: usize, a: usize) -> &[f64] {
        &self.transitions[h][s][a]
    }

    pub fn reward(&self, h: usize, s: usize, a: usize) -> &Reward {
        &self.rewards[h][s][a]
    }

    pub fn rewards(&self) -> &Vec<Vec<Vec<Reward>>> {
        &self.rewards
    }

    pub fn transitions(&self) -> &Vec<Vec<Vec<Vec<f64>>>> {
        &self.transitions
    }

    pub fn label(&self, h: usize, s: usize) -> &str {
        &self.labels[h][s]
    }

    pub fn labels(&self) -> &Vec<Vec<String>> {
        &self.labels
    }

    /// Stable level-major global id of state `s` at level `h`.
    pub fn global_id(&self, h: usize, s: usize) -> usize {
        self.offsets[h] + s
    }

    pub fn total_states(&self) -> usize {
        self.offsets[self.horizon - 1] + self.level_sizes[self.horizon - 1]
    }
}

/// A per-state action distribution; a deterministic policy is a
/// distribution with a single atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    /// `probs[h][s][a]`.
    probs: Vec<Vec<Vec<f64>>>,
}

impl Policy {
    /// Validates shape against `mdp` and that each row is a distribution.
    pub fn new(mdp: &LayeredMdp, probs: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if probs.len() != mdp.horizon() {
            return Err(Error::InvalidPolicy(format!(
                "expected {} levels, got {}",
                mdp.horizon(),
                probs.len()
            )));
        }
        for (h, level) in probs.iter().enumerate() {
            if level.len() != mdp.n_states(h) {
                return Err(Error::InvalidPolicy(format!(
                    "level {h} has {} states, expected {}",
                    level.len(),
                    mdp.n_states(h)
                )));
            }
            for (s, row) in level.iter().enumerate() {
                if row.len() != mdp.n_actions() {
                    return Err(Error::InvalidPolicy(format!(
                        "action row length mismatch at level {h}, state {s}"
                    )));
                }
                let mut sum = 0.0;
                for &p in row {
                    if !(p.is_finite() && p >= 0.0) {
                        return Err(Error::InvalidPolicy(format!(
                            "negative or non-finite probability at level {h}, state {s}"
                        )));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > DIST_SUM_TOL {
                    return Err(Error::InvalidPolicy(format!(
                        "action distribution sums to {sum} at level {h}, state {s}"
                    )));
                }
            }
        }
        Ok(Self { probs })
    }

    /// Deterministic policy from a chooser `(level, state) -> action`.
    pub fn deterministic(
        mdp: &LayeredMdp,
        mut chooser: impl FnMut(usize, usize) -> usize,
    ) -> Result<Self> {
        let mut probs = Vec::with_capacity(mdp.horizon());
        for h in 0..mdp.horizon() {
            let mut level = Vec::with_capacity(mdp.n_states(h));
            for s in 0..mdp.n_states(h) {
                let a = chooser(h, s);
                if a >= mdp.n_actions() {
                    return Err(Error::InvalidPolicy(format!(
                        "chosen action {a} out of range at level {h}, state {s}"
                    )));
                }
                let mut row = vec![0.0; mdp.n_actions()];
                row[a] = 1.0;
                level.push(row);
            }
            probs.push(level);
        }
        Ok(Self { probs })
    }

    /// The constant policy that always plays `action`.
    pub fn constant(mdp: &LayeredMdp, action: usize) -> Result<Self> {
        Self::deterministic(mdp, |_, _| action)
    }

    /// A seeded random stochastic policy (independent uniform weights,
    /// normalized per state).
    pub fn random_stochastic<R: Rng>(mdp: &LayeredMdp, rng: &mut R) -> Self {
        let probs = (0..mdp.horizon())
            .map(|h| {
                (0..mdp.n_states(h))
                    .map(|_| {
                        let mut row: Vec<f64> = (0..mdp.n_actions())
                            .map(|_| rng.random::<f64>() + 1e-3)
                            .collect();
                        let sum: f64 = row.iter().sum();
                        for p in &mut row {
                            *p /= sum;
                        }
                        // Nudge the last entry so the row sums to 1 exactly.
                        let partial: f64 = row[..row.len() - 1].iter().sum();
                        let last = row.len() - 1;
                        row[last] = 1.0 - partial;
                        row
                    })
                    .collect()
            })
            .collect();
        Self { probs }
    }

    /// A seeded random deterministic policy.
    pub fn random_deterministic<R: Rng>(mdp: &LayeredMdp, rng: &mut R) -> Self {
        let n_actions = mdp.n_actions();
        Self::deterministic(mdp, |_, _| rng.random_range(0..n_actions))
            .expect("actions drawn in range")
    }

    pub fn action_probs(&self, h: usize, s: usize) -> &[f64] {
        &self.probs[h][s]
    }

    pub fn prob(&self, h: usize, s: usize, a: usize) -> f64 {
        self.probs[h][s][a]
    }

    pub fn probs(&self) -> &Vec<Vec<Vec<f64>>> {
        &self.probs
    }

    /// `Some(a)` when the row at `(h, s)` is a single atom.
    pub fn deterministic_action(&self, h: usize, s: usize) -> Option<usize> {
        let row = &self.probs[h][s];
        let (argmax, &pmax) = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite probabilities"))?;
        ((pmax - 1.0).abs() <= DIST_SUM_TOL).then_some(argmax)
    }

    pub fn is_deterministic(&self) -> bool {
        self.probs
            .iter()
            .enumerate()
            .all(|(h, level)| (0..level.len()).all(|s| self.deterministic_action(h, s).is_some()))
    }

    /// Draws an action at `(h, s)` by inverse CDF.
    pub fn sample_action<R: Rng>(&self, h: usize, s: usize, rng: &mut R) -> usize {
        sample_index(&self.probs[h][s], rng)
    }
}

/// Per-level data distributions `mu_h` over state-action pairs, with the
/// support recorded explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct DataDistribution {
    /// `atoms[h]` lists `(state, action, probability)` with probability > 0.
    atoms: Vec<Vec<(usize, usize, f64)>>,
}

impl DataDistribution {
    /// Validates atom indices against `mdp` and per-level normalization.
    /// Zero-probability atoms are rejected so the support is explicit.
    pub fn new(mdp: &LayeredMdp, atoms: Vec<Vec<(usize, usize, f64)>>) -> Result<Self> {
        if atoms.len() != mdp.horizon() {
            return Err(Error::InvalidDistribution(format!(
                "expected {} levels, got {}",
                mdp.horizon(),
                atoms.len()
            )));
        }
        for (h, level) in atoms.iter().enumerate() {
            let mut sum = 0.0;
            for &(s, a, p) in level {
                if s >= mdp.n_states(h) || a >= mdp.n_actions() {
                    return Err(Error::SupportMismatch {
                        level: h,
                        state: s,
                        action: a,
                    });
                }
                if !(p.is_finite() && p > 0.0) {
                    return Err(Error::InvalidDistribution(format!(
                        "atom probability {p} at level {h} must be positive"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > DIST_SUM_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "level {h} sums to {sum}"
                )));
            }
        }
        Ok(Self { atoms })
    }

    /// The uniform distribution over the given per-level supports.
    pub fn uniform(mdp: &LayeredMdp, supports: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        let atoms = supports
            .into_iter()
            .map(|level| {
                let p = 1.0 / level.len() as f64;
                level.into_iter().map(|(s, a)| (s, a, p)).collect()
            })
            .collect();
        Self::new(mdp, atoms)
    }

    /// The on-policy distribution of `pi` mixed with an `epsilon`-uniform
    /// distribution over all state-action pairs of each level.
    ///
    /// With `epsilon > 0` every feature direction present at a level gets
    /// covered, which keeps the shift coefficients finite while the bulk of
    /// the mass stays on-policy.
    pub fn on_policy_mixture(mdp: &LayeredMdp, pi: &Policy, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidDistribution(format!(
                "mixture weight {epsilon} outside [0, 1]"
            )));
        }
        let occupancy = marginal_occupancy(mdp, pi);
        let mut atoms = Vec::with_capacity(mdp.horizon());
        for h in 0..mdp.horizon() {
            let n_pairs = (mdp.n_states(h) * mdp.n_actions()) as f64;
            let mut level = Vec::new();
            let mut sum = 0.0;
            for s in 0..mdp.n_states(h) {
                for a in 0..mdp.n_actions() {
                    let p =
                        (1.0 - epsilon) * occupancy[h][s] * pi.prob(h, s, a) + epsilon / n_pairs;
                    if p > 0.0 {
                        level.push((s, a, p));
                        sum += p;
                    }
                }
            }
            // Remove roundoff so the level is normalized exactly.
            for atom in &mut level {
                atom.2 /= sum;
            }
            atoms.push(level);
        }
        Self::new(mdp, atoms)
    }

    pub fn level_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self, h: usize) -> &[(usize, usize, f64)] {
        &self.atoms[h]
    }

    pub fn all_atoms(&self) -> &Vec<Vec<(usize, usize, f64)>> {
        &self.atoms
    }

    /// Probability of `(s, a)` at level `h` (zero off support).
    pub fn prob_of(&self, h: usize, s: usize, a: usize) -> f64 {
        self.atoms[h]
            .iter()
            .find(|&&(si, ai, _)| si == s && ai == a)
            .map_or(0.0, |&(_, _, p)| p)
    }

    pub fn supports(&self, h: usize, s: usize, a: usize) -> bool {
        self.prob_of(h, s, a) > 0.0
    }

    fn check_against(&self, mdp: &LayeredMdp) -> Result<()> {
        if self.atoms.len() != mdp.horizon() {
            return Err(Error::InvalidDistribution(format!(
                "distribution has {} levels, MDP has {}",
                self.atoms.len(),
                mdp.horizon()
            )));
        }
        for (h, level) in self.atoms.iter().enumerate() {
            for &(s, a, _) in level {
                if s >= mdp.n_states(h) || a >= mdp.n_actions() {
                    return Err(Error::SupportMismatch {
                        level: h,
                        state: s,
                        action: a,
                    });
                }
            }
        }
        Ok(())
    }
}

/// One offline tuple `(s, a, r, s')`; `next_state` is absent at the last
/// level.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: Option<usize>,
}

/// Per-level i.i.d. tuples drawn from data distributions, together with the
/// seed and distribution that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineDataset {
    levels: Vec<Vec<Transition>>,
    seed: u64,
    n_per_level: usize,
    mu: DataDistribution,
}

impl OfflineDataset {
    pub fn horizon(&self) -> usize {
        self.levels.len()
    }

    pub fn samples(&self, h: usize) -> &[Transition] {
        &self.levels[h]
    }

    pub fn n_per_level(&self) -> usize {
        self.n_per_level
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mu(&self) -> &DataDistribution {
        &self.mu
    }
}

/// Inverse-CDF draw from a probability slice. Deterministic given the rng
/// state; clamps to the last index against roundoff in the cumulative sum.
fn sample_index<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn sample_atom<R: Rng>(atoms: &[(usize, usize, f64)], rng: &mut R) -> (usize, usize) {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(s, a, p) in atoms {
        acc += p;
        if u < acc {
            return (s, a);
        }
    }
    let &(s, a, _) = atoms.last().expect("support is nonempty");
    (s, a)
}

/// Exact `Q`/`V` tables for a policy, computed by backward dynamic
/// programming, together with the scalar value at the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactValues {
    q: Vec<Vec<Vec<f64>>>,
    v: Vec<Vec<f64>>,
    value: f64,
}

impl ExactValues {
    pub fn q(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[h][s][a]
    }

    pub fn v(&self, h: usize, s: usize) -> f64 {
        self.v[h][s]
    }

    pub fn q_level(&self, h: usize) -> &Vec<Vec<f64>> {
        &self.q[h]
    }

    /// `V^pi = V_1^pi(s_1)`.
    pub fn value(&self) -> f64 {
        self.value
    }
}

/// Backward dynamic programming for `Q_h^pi` and `V_h^pi`.
pub fn exact_q_values(mdp: &LayeredMdp, pi: &Policy) -> ExactValues {
    let horizon = mdp.horizon();
    let mut q: Vec<Vec<Vec<f64>>> = Vec::with_capacity(horizon);
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(horizon);
    q.resize(horizon, Vec::new());
    v.resize(horizon, Vec::new());

    for h in (0..horizon).rev() {
        let mut q_level = Vec::with_capacity(mdp.n_states(h));
        let mut v_level = Vec::with_capacity(mdp.n_states(h));
        for s in 0..mdp.n_states(h) {
            let mut q_row = Vec::with_capacity(mdp.n_actions());
            for a in 0..mdp.n_actions() {
                let mut value = mdp.reward(h, s, a).mean();
                if h + 1 < horizon {
                    let row = mdp.transition(h, s, a);
                    for (s_next, &p) in row.iter().enumerate() {
                        if p > 0.0 {
                            value += p * v[h + 1][s_next];
                        }
                    }
                }
                q_row.push(value);
            }
            let v_s = q_row
                .iter()
                .zip(pi.action_probs(h, s))
                .map(|(&qv, &pp)| pp * qv)
                .sum();
            q_level.push(q_row);
            v_level.push(v_s);
        }
        q[h] = q_level;
        v[h] = v_level;
    }

    let value = v[0][mdp.initial_state()];
    ExactValues { q, v, value }
}

/// `V^pi = V_1^pi(s_1)`.
pub fn exact_policy_value(mdp: &LayeredMdp, pi: &Policy) -> f64 {
    exact_q_values(mdp, pi).value()
}

/// Forward state-marginal distributions `mu_h^pi(s) = Pr[s_h = s | pi]`.
pub fn marginal_occupancy(mdp: &LayeredMdp, pi: &Policy) -> Vec<Vec<f64>> {
    let horizon = mdp.horizon();
    let mut occupancy: Vec<Vec<f64>> = Vec::with_capacity(horizon);
    let mut first = vec![0.0; mdp.n_states(0)];
    first[mdp.initial_state()] = 1.0;
    occupancy.push(first);

    for h in 0..horizon - 1 {
        let mut next = vec![0.0; mdp.n_states(h + 1)];
        for s in 0..mdp.n_states(h) {
            let mass = occupancy[h][s];
            if mass == 0.0 {
                continue;
            }
            for a in 0..mdp.n_actions() {
                let pa = pi.prob(h, s, a);
                if pa == 0.0 {
                    continue;
                }
                for (s_next, &p) in mdp.transition(h, s, a).iter().enumerate() {
                    if p > 0.0 {
                        next[s_next] += mass * pa * p;
                    }
                }
            }
        }
        occupancy.push(next);
    }
    occupancy
}

/// Draws `n` i.i.d. tuples per level from `mu`. Level `h` uses the
/// substream `(seed, [h])`, so datasets are deterministic given the seed
/// and independent across levels.
pub fn sample_offline(
    mdp: &LayeredMdp,
    mu: &DataDistribution,
    n: usize,
    seed: u64,
) -> Result<OfflineDataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    mu.check_against(mdp)?;

    let horizon = mdp.horizon();
    let mut levels = Vec::with_capacity(horizon);
    for h in 0..horizon {
        let mut rng = substream_rng(seed, &[h as u64]);
        let mut tuples = Vec::with_capacity(n);
        for _ in 0..n {
            let (s, a) = sample_atom(mu.atoms(h), &mut rng);
            let r = mdp.reward(h, s, a).sample(&mut rng);
            let next_state =
                (h + 1 < horizon).then(|| sample_index(mdp.transition(h, s, a), &mut rng));
            tuples.push(Transition {
                state: s,
                action: a,
                reward: r,
                next_state,
            });
        }
        levels.push(tuples);
    }

    Ok(OfflineDataset {
        levels,
        seed,
        n_per_level: n,
        mu: mu.clone(),
    })
}

/// Simulates one trajectory from the initial state and returns the total
/// reward. Used by Monte Carlo cross-checks of the exact oracles.
pub fn sample_trajectory_return<R: Rng>(mdp: &LayeredMdp, pi: &Policy, rng: &mut R) -> f64 {
    let mut s = mdp.initial_state();
    let mut total = 0.0;
    for h in 0..mdp.horizon() {
        let a = pi.sample_action(h, s, rng);
        total += mdp.reward(h, s, a).sample(rng);
        if h + 1 < mdp.horizon() {
            s = sample_index(mdp.transition(h, s, a), rng);
        }
    }
    total
}
