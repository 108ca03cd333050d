//! Network limit-state functions over a margin sample.
//!
//! All functions share one failure domain — OD disconnection — but differ in
//! how much information they carry outside it. The binary function is 0/1;
//! the path-based reformulations return min-margin-over-path divided by the
//! path's random-node count, which is what lets subset simulation rank
//! samples by proximity to failure. Values are non-negative by construction
//! and the failure domain is exactly {g = 0}.

use serde::{Deserialize, Serialize};

use crate::gmpe::MarginDistribution;
use crate::netgraph::{Network, TerminalSpec, TraversalScratch};
use crate::normal;
use crate::{Error, Result};

/// Which per-pair limit-state function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LsKind {
    /// 1 if connected, 0 otherwise. Defeats subset simulation on its own;
    /// use with crude Monte Carlo only.
    Binary,
    /// Most reliable path (Dijkstra over −ln survival-probability weights).
    Rp,
    /// Shortest path by node count (BFS).
    Sp,
}

/// How per-pair values combine into a network-level value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Aggregation {
    /// A single origin-destination pair.
    SingleOd { origin: String, destination: String },
    /// All origins must reach all destinations (min over the O×D product).
    KTerminal(TerminalSpec),
    /// At least k of the listed OD pairs must be connected (k-th largest
    /// per-pair value).
    KOutOfN {
        pairs: Vec<(String, String)>,
        k: usize,
    },
}

/// Full specification of a network limit state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitStateSpec {
    pub kind: LsKind,
    pub aggregation: Aggregation,
}

impl LimitStateSpec {
    pub fn single(kind: LsKind, origin: impl Into<String>, destination: impl Into<String>) -> Self {
        Self {
            kind,
            aggregation: Aggregation::SingleOd {
                origin: origin.into(),
                destination: destination.into(),
            },
        }
    }

    pub fn k_terminal(kind: LsKind, terminals: TerminalSpec) -> Self {
        Self {
            kind,
            aggregation: Aggregation::KTerminal(terminals),
        }
    }

    pub fn k_out_of_n(kind: LsKind, pairs: Vec<(String, String)>, k: usize) -> Self {
        Self {
            kind,
            aggregation: Aggregation::KOutOfN { pairs, k },
        }
    }
}

/// Resolved, reusable evaluator with caller-owned scratch. One instance per
/// worker thread; the network stays shared.
///
/// The most reliable path is identified per sample: node weights are
/// −ln Φ(z_i/σ_i), the survival weight of the component at its current
/// margin, so the path tracks the realized damage state (a parallel system's
/// RP is its largest-margin branch). The independence assumption enters only
/// through summing per-node weights.
#[derive(Debug, Clone)]
pub struct NetworkLimitState<'n> {
    net: &'n Network,
    kind: LsKind,
    pairs: Vec<(usize, usize)>,
    /// Connected-pair count required for survival.
    k: usize,
    /// Margin standard deviations per slot (unit by default).
    margin_stds: Vec<f64>,
    weights: Vec<f64>,
    mask: Vec<bool>,
    path: Vec<usize>,
    pair_values: Vec<f64>,
    scratch: TraversalScratch,
}

impl<'n> NetworkLimitState<'n> {
    /// Evaluator with the margin standard deviations taken from a built
    /// distribution; required for `Rp` on networks with heterogeneous
    /// capacity dispersion.
    pub fn for_distribution(
        net: &'n Network,
        spec: &LimitStateSpec,
        dist: &MarginDistribution,
    ) -> Result<Self> {
        let mut ls = Self::new(net, spec)?;
        ls.set_margin_stds(dist.sigma.clone())?;
        Ok(ls)
    }

    pub fn new(net: &'n Network, spec: &LimitStateSpec) -> Result<Self> {
        let (pairs, k) = match &spec.aggregation {
            Aggregation::SingleOd {
                origin,
                destination,
            } => {
                let o = net.node_index(origin)?;
                let d = net.node_index(destination)?;
                (vec![(o, d)], 1)
            }
            Aggregation::KTerminal(terminals) => {
                let (os, ds) = terminals.resolve(net)?;
                let mut pairs = Vec::with_capacity(os.len() * ds.len());
                for &o in &os {
                    for &d in &ds {
                        pairs.push((o, d));
                    }
                }
                let k = pairs.len();
                (pairs, k)
            }
            Aggregation::KOutOfN { pairs, k } => {
                if pairs.is_empty() {
                    return Err(Error::EmptyTerminals);
                }
                if *k < 1 || *k > pairs.len() {
                    return Err(Error::KOutOfRange {
                        k: *k,
                        n: pairs.len(),
                    });
                }
                let mut resolved = Vec::with_capacity(pairs.len());
                for (a, b) in pairs {
                    resolved.push((net.node_index(a)?, net.node_index(b)?));
                }
                (resolved, *k)
            }
        };
        let n_pairs = pairs.len();
        Ok(Self {
            net,
            kind: spec.kind,
            pairs,
            k,
            margin_stds: vec![1.0; net.random_dim()],
            weights: vec![0.0; net.node_count()],
            mask: vec![false; net.node_count()],
            path: Vec::new(),
            pair_values: vec![0.0; n_pairs],
            scratch: TraversalScratch::new(),
        })
    }

    pub fn kind(&self) -> LsKind {
        self.kind
    }

    /// Margin standard deviations (slot order), used to standardize margins
    /// when scoring path reliability.
    pub fn set_margin_stds(&mut self, stds: Vec<f64>) -> Result<()> {
        if stds.len() != self.net.random_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.net.random_dim(),
                got: stds.len(),
            });
        }
        if stds.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidConfig(
                "margin standard deviations must be positive".into(),
            ));
        }
        self.margin_stds = stds;
        Ok(())
    }

    /// Survival weights of the surviving nodes at the current sample; the
    /// max(0) clamp only normalizes the -0.0 of saturated margins.
    fn fill_rp_weights(&mut self, z: &[f64]) {
        for node in 0..self.net.node_count() {
            self.weights[node] = match self.net.margin_slot(node) {
                Some(slot) if self.mask[node] => {
                    (-normal::cdf(z[slot] / self.margin_stds[slot]).ln()).max(0.0)
                }
                _ => 0.0,
            };
        }
    }

    /// Informative limit-state value of a margin sample. Zero exactly on the
    /// failure domain; +∞ when the governing pair is held by an all-perfect
    /// path (the system cannot fail through it).
    pub fn value(&mut self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.net.random_dim());
        self.net.fill_mask(z, &mut self.mask);
        if self.kind == LsKind::Rp {
            self.fill_rp_weights(z);
        }
        match self.k == self.pairs.len() {
            // single pair and k-terminal: min over pairs, exit at first zero
            true => {
                let mut min = f64::INFINITY;
                for idx in 0..self.pairs.len() {
                    let v = self.pair_value(idx, z);
                    if v == 0.0 {
                        return 0.0;
                    }
                    min = min.min(v);
                }
                min
            }
            false => {
                for idx in 0..self.pairs.len() {
                    self.pair_values[idx] = self.pair_value(idx, z);
                }
                kth_largest(&mut self.pair_values, self.k)
            }
        }
    }

    /// Failure indicator only: connectivity checks without path values.
    pub fn failed(&mut self, z: &[f64]) -> bool {
        debug_assert_eq!(z.len(), self.net.random_dim());
        self.net.fill_mask(z, &mut self.mask);
        self.failed_masked()
    }

    fn failed_masked(&mut self) -> bool {
        let needed = self.k;
        let n = self.pairs.len();
        let mut connected = 0;
        for idx in 0..n {
            let (o, d) = self.pairs[idx];
            if self.net.bfs_connected(&self.mask, o, d, &mut self.scratch) {
                connected += 1;
                if connected >= needed {
                    return false;
                }
            }
            // not enough pairs left to reach the quota
            if connected + (n - idx - 1) < needed {
                return true;
            }
        }
        true
    }

    fn pair_value(&mut self, idx: usize, z: &[f64]) -> f64 {
        let (o, d) = self.pairs[idx];
        if !self.mask[o] || !self.mask[d] {
            return 0.0;
        }
        let found = match self.kind {
            LsKind::Binary => {
                return if self.net.bfs_connected(&self.mask, o, d, &mut self.scratch) {
                    1.0
                } else {
                    0.0
                };
            }
            LsKind::Rp => self.net.most_reliable_path_into(
                &self.mask,
                o,
                d,
                &self.weights,
                &mut self.scratch,
                &mut self.path,
            ),
            LsKind::Sp => {
                self.net
                    .shortest_path_into(&self.mask, o, d, &mut self.scratch, &mut self.path)
            }
        };
        if !found {
            return 0.0;
        }
        let mut min = f64::INFINITY;
        let mut random_nodes = 0usize;
        for &node in &self.path {
            if let Some(slot) = self.net.margin_slot(node) {
                random_nodes += 1;
                min = min.min(z[slot]);
            }
        }
        if random_nodes == 0 {
            // connected through perfect nodes only
            f64::INFINITY
        } else {
            min / random_nodes as f64
        }
    }
}

/// k-th largest entry of `values` (1-based k). Reorders the slice.
pub(crate) fn kth_largest(values: &mut [f64], k: usize) -> f64 {
    debug_assert!(k >= 1 && k <= values.len());
    let idx = k - 1;
    let (_, v, _) = values.select_nth_unstable_by(idx, |a, b| b.total_cmp(a));
    *v
}

/// Binary two-terminal limit state (1 connected / 0 otherwise).
pub fn g_binary(net: &Network, z: &[f64], origin: &str, destination: &str) -> Result<f64> {
    eval_single(net, z, origin, destination, LsKind::Binary, None)
}

/// Most-reliable-path limit state for one OD pair. `margin_stds` standardize
/// the margins when ranking path reliability (pass the distribution sigmas).
pub fn g_rp(
    net: &Network,
    z: &[f64],
    origin: &str,
    destination: &str,
    margin_stds: &[f64],
) -> Result<f64> {
    eval_single(net, z, origin, destination, LsKind::Rp, Some(margin_stds))
}

/// Shortest-path limit state for one OD pair.
pub fn g_sp(net: &Network, z: &[f64], origin: &str, destination: &str) -> Result<f64> {
    eval_single(net, z, origin, destination, LsKind::Sp, None)
}

fn eval_single(
    net: &Network,
    z: &[f64],
    origin: &str,
    destination: &str,
    kind: LsKind,
    margin_stds: Option<&[f64]>,
) -> Result<f64> {
    check_dim(net, z)?;
    let spec = LimitStateSpec::single(kind, origin, destination);
    let mut ls = NetworkLimitState::new(net, &spec)?;
    if let Some(s) = margin_stds {
        ls.set_margin_stds(s.to_vec())?;
    }
    Ok(ls.value(z))
}

/// k-terminal limit state: min of the per-pair values over all
/// origin×destination pairs.
pub fn g_k_terminal(
    net: &Network,
    z: &[f64],
    terminals: &TerminalSpec,
    kind: LsKind,
    margin_stds: Option<&[f64]>,
) -> Result<f64> {
    check_dim(net, z)?;
    let spec = LimitStateSpec::k_terminal(kind, terminals.clone());
    let mut ls = NetworkLimitState::new(net, &spec)?;
    if let Some(s) = margin_stds {
        ls.set_margin_stds(s.to_vec())?;
    }
    Ok(ls.value(z))
}

/// k-out-of-N limit state: the k-th largest per-pair value; zero iff fewer
/// than k pairs are connected.
pub fn g_k_out_of_n(
    net: &Network,
    z: &[f64],
    pairs: &[(String, String)],
    k: usize,
    kind: LsKind,
    margin_stds: Option<&[f64]>,
) -> Result<f64> {
    check_dim(net, z)?;
    let spec = LimitStateSpec::k_out_of_n(kind, pairs.to_vec(), k);
    let mut ls = NetworkLimitState::new(net, &spec)?;
    if let Some(s) = margin_stds {
        ls.set_margin_stds(s.to_vec())?;
    }
    Ok(ls.value(z))
}

fn check_dim(net: &Network, z: &[f64]) -> Result<()> {
    if z.len() != net.random_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.random_dim(),
            got: z.len(),
        });
    }
    Ok(())
}
