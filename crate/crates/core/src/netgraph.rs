//! Graph representation of the lifeline network and the path/connectivity
//! primitives consumed by the limit-state functions.
//!
//! Nodes are physical components (possibly perfect); edges are perfectly
//! reliable conceptual connections. Networks with unreliable links are
//! first rewritten node-for-link via [`link_to_node_conversion`].

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::gmpe::{Component, Point};
use crate::{Error, Result};

/// Undirected network of components with an adjacency index.
///
/// Node order (and therefore the margin-vector order of the non-perfect
/// components) follows construction order; neighbor lists are kept sorted
/// ascending so traversals are deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<Component>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    id_index: HashMap<String, usize>,
    /// node index -> slot in the margin vector (None for perfect nodes)
    margin_slot: Vec<Option<usize>>,
    /// margin slot -> node index
    margin_nodes: Vec<usize>,
}

impl Network {
    pub fn new(nodes: Vec<Component>, edges: &[(String, String)]) -> Result<Self> {
        let mut id_index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if id_index.insert(node.id.clone(), i).is_some() {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate node id `{}`",
                    node.id
                )));
            }
            if !node.perfect {
                if !(node.capacity_median > 0.0) {
                    return Err(Error::InvalidNetwork(format!(
                        "node `{}` needs a positive capacity median",
                        node.id
                    )));
                }
                if node.capacity_log_std < 0.0 {
                    return Err(Error::InvalidNetwork(format!(
                        "node `{}` has negative capacity log-std",
                        node.id
                    )));
                }
            }
        }
        let mut resolved = Vec::with_capacity(edges.len());
        let mut seen = std::collections::HashSet::new();
        for (a, b) in edges {
            let ia = *id_index
                .get(a.as_str())
                .ok_or_else(|| Error::UnknownNode(a.clone()))?;
            let ib = *id_index
                .get(b.as_str())
                .ok_or_else(|| Error::UnknownNode(b.clone()))?;
            if ia == ib {
                return Err(Error::InvalidNetwork(format!("self-loop at `{a}`")));
            }
            let key = (ia.min(ib), ia.max(ib));
            if !seen.insert(key) {
                return Err(Error::InvalidNetwork(format!("duplicate edge `{a}`-`{b}`")));
            }
            resolved.push(key);
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(a, b) in &resolved {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let mut margin_slot = vec![None; nodes.len()];
        let mut margin_nodes = Vec::new();
        for (i, node) in nodes.iter().enumerate() {
            if !node.perfect {
                margin_slot[i] = Some(margin_nodes.len());
                margin_nodes.push(i);
            }
        }
        Ok(Self {
            nodes,
            edges: resolved,
            adjacency,
            id_index,
            margin_slot,
            margin_nodes,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Component] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node(&self, index: usize) -> &Component {
        &self.nodes[index]
    }

    pub fn neighbors(&self, index: usize) -> &[usize] {
        &self.adjacency[index]
    }

    pub fn node_index(&self, id: &str) -> Result<usize> {
        self.id_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// Number of random (non-perfect) components, i.e. the margin dimension.
    pub fn random_dim(&self) -> usize {
        self.margin_nodes.len()
    }

    /// Non-perfect components in margin-vector order.
    pub fn random_components(&self) -> impl Iterator<Item = &Component> {
        self.margin_nodes.iter().map(|&i| &self.nodes[i])
    }

    /// Margin-vector slot of a node, if it is random.
    pub fn margin_slot(&self, node: usize) -> Option<usize> {
        self.margin_slot[node]
    }

    /// Node index backing a margin-vector slot.
    pub fn margin_node(&self, slot: usize) -> usize {
        self.margin_nodes[slot]
    }

    /// Clone with every non-perfect component's capacity replaced; used for
    /// multi-state damage sweeps.
    pub fn with_capacities(&self, median: f64, log_std: f64) -> Network {
        let mut out = self.clone();
        for node in &mut out.nodes {
            if !node.perfect {
                node.capacity_median = median;
                node.capacity_log_std = log_std;
            }
        }
        out
    }

    /// Survival mask for a margin sample: a random node survives iff its
    /// margin is strictly positive (z ≤ 0 is failure); perfect nodes always
    /// survive.
    pub fn surviving_subgraph(&self, z: &[f64]) -> Result<Vec<bool>> {
        if z.len() != self.random_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.random_dim(),
                got: z.len(),
            });
        }
        let mut mask = vec![false; self.node_count()];
        self.fill_mask(z, &mut mask);
        Ok(mask)
    }

    /// Allocation-free mask fill; `mask` must have `node_count` entries.
    pub(crate) fn fill_mask(&self, z: &[f64], mask: &mut [bool]) {
        debug_assert_eq!(z.len(), self.random_dim());
        debug_assert_eq!(mask.len(), self.node_count());
        for (i, m) in mask.iter_mut().enumerate() {
            *m = match self.margin_slot[i] {
                Some(slot) => z[slot] > 0.0,
                None => true,
            };
        }
    }

    /// True iff a path of surviving nodes joins `o` and `d`. Breadth-first,
    /// touching each surviving node and edge at most once.
    pub fn bfs_connected(
        &self,
        mask: &[bool],
        o: usize,
        d: usize,
        scratch: &mut TraversalScratch,
    ) -> bool {
        if !mask[o] || !mask[d] {
            return false;
        }
        if o == d {
            return true;
        }
        scratch.begin(self.node_count());
        scratch.visit(o);
        scratch.queue.clear();
        scratch.queue.push(o);
        let mut head = 0;
        while head < scratch.queue.len() {
            let u = scratch.queue[head];
            head += 1;
            for &v in &self.adjacency[u] {
                if mask[v] && !scratch.visited(v) {
                    if v == d {
                        return true;
                    }
                    scratch.visit(v);
                    scratch.queue.push(v);
                }
            }
        }
        false
    }

    /// Shortest surviving path by node count (BFS). Ties broken by visiting
    /// neighbors in ascending node order; returns `None` when disconnected.
    pub fn shortest_path(
        &self,
        mask: &[bool],
        o: usize,
        d: usize,
        scratch: &mut TraversalScratch,
    ) -> Option<Vec<usize>> {
        let mut path = Vec::new();
        if self.shortest_path_into(mask, o, d, scratch, &mut path) {
            Some(path)
        } else {
            None
        }
    }

    pub(crate) fn shortest_path_into(
        &self,
        mask: &[bool],
        o: usize,
        d: usize,
        scratch: &mut TraversalScratch,
        path: &mut Vec<usize>,
    ) -> bool {
        path.clear();
        if !mask[o] || !mask[d] {
            return false;
        }
        if o == d {
            path.push(o);
            return true;
        }
        scratch.begin(self.node_count());
        scratch.visit(o);
        scratch.queue.clear();
        scratch.queue.push(o);
        let mut head = 0;
        let mut found = false;
        'outer: while head < scratch.queue.len() {
            let u = scratch.queue[head];
            head += 1;
            for &v in &self.adjacency[u] {
                if mask[v] && !scratch.visited(v) {
                    scratch.visit(v);
                    scratch.parent[v] = u;
                    if v == d {
                        found = true;
                        break 'outer;
                    }
                    scratch.queue.push(v);
                }
            }
        }
        if !found {
            return false;
        }
        let mut cur = d;
        loop {
            path.push(cur);
            if cur == o {
                break;
            }
            cur = scratch.parent[cur];
        }
        path.reverse();
        true
    }

    /// Most reliable surviving path: minimizes the sum of node weights
    /// (weights = −ln survival probability, so the product of survival
    /// probabilities is maximized). Dijkstra with a binary heap; equal-cost
    /// ties resolved toward smaller node ids. Endpoint weights are included
    /// in the path cost.
    pub fn most_reliable_path(
        &self,
        mask: &[bool],
        o: usize,
        d: usize,
        weights: &[f64],
        scratch: &mut TraversalScratch,
    ) -> Option<Vec<usize>> {
        self.checked_most_reliable_path(mask, o, d, weights, scratch)
            .expect("node weights must be non-negative")
    }

    /// As [`Self::most_reliable_path`] but validating the weights.
    pub fn checked_most_reliable_path(
        &self,
        mask: &[bool],
        o: usize,
        d: usize,
        weights: &[f64],
        scratch: &mut TraversalScratch,
    ) -> Result<Option<Vec<usize>>> {
        if let Some((node, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| **w < 0.0 || w.is_nan())
        {
            return Err(Error::NegativeWeight {
                node: self.nodes[node].id.clone(),
                weight: *w,
            });
        }
        let mut path = Vec::new();
        if self.most_reliable_path_into(mask, o, d, weights, scratch, &mut path) {
            Ok(Some(path))
        } else {
            Ok(None)
        }
    }

    pub(crate) fn most_reliable_path_into(
        &self,
        mask: &[bool],
        o: usize,
        d: usize,
        weights: &[f64],
        scratch: &mut TraversalScratch,
        path: &mut Vec<usize>,
    ) -> bool {
        debug_assert_eq!(weights.len(), self.node_count());
        path.clear();
        if !mask[o] || !mask[d] {
            return false;
        }
        if o == d {
            path.push(o);
            return true;
        }
        scratch.begin(self.node_count());
        scratch.heap.clear();
        scratch.dist[o] = weights[o];
        scratch.visit(o);
        scratch.heap.push(HeapEntry {
            cost: weights[o],
            node: o,
        });
        let mut settled_d = false;
        while let Some(HeapEntry { cost, node }) = scratch.heap.pop() {
            if cost > scratch.dist[node] {
                continue; // stale entry
            }
            if node == d {
                settled_d = true;
                break;
            }
            for &v in &self.adjacency[node] {
                if !mask[v] {
                    continue;
                }
                let cand = cost + weights[v];
                if !scratch.visited(v) || cand < scratch.dist[v] {
                    scratch.visit(v);
                    scratch.dist[v] = cand;
                    scratch.parent[v] = node;
                    scratch.heap.push(HeapEntry {
                        cost: cand,
                        node: v,
                    });
                }
            }
        }
        if !settled_d {
            return false;
        }
        let mut cur = d;
        loop {
            path.push(cur);
            if cur == o {
                break;
            }
            cur = scratch.parent[cur];
        }
        path.reverse();
        true
    }

    /// Total weight of a node path.
    pub fn path_weight(&self, path: &[usize], weights: &[f64]) -> f64 {
        path.iter().map(|&n| weights[n]).sum()
    }
}

/// Min-heap entry ordered by (cost, node id) ascending.
#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    cost: f64,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; reverse to pop the smallest (cost, node).
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Reused traversal state. One instance per worker thread; the network
/// itself stays shared and immutable.
#[derive(Debug, Default, Clone)]
pub struct TraversalScratch {
    epoch: u32,
    visited_epoch: Vec<u32>,
    parent: Vec<usize>,
    dist: Vec<f64>,
    queue: Vec<usize>,
    heap: BinaryHeap<HeapEntry>,
}

impl TraversalScratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn begin(&mut self, n: usize) {
        if self.visited_epoch.len() < n {
            self.visited_epoch.resize(n, 0);
            self.parent.resize(n, usize::MAX);
            self.dist.resize(n, f64::INFINITY);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.visited_epoch.fill(0);
            self.epoch = 1;
        }
    }

    #[inline]
    fn visit(&mut self, node: usize) {
        self.visited_epoch[node] = self.epoch;
    }

    #[inline]
    fn visited(&self, node: usize) -> bool {
        self.visited_epoch[node] == self.epoch
    }
}

/// Origin/destination node sets for k-terminal style reliability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminalSpec {
    pub origins: Vec<String>,
    pub destinations: Vec<String>,
}

impl TerminalSpec {
    pub fn new(origins: Vec<String>, destinations: Vec<String>) -> Self {
        Self {
            origins,
            destinations,
        }
    }

    /// Resolves ids against a network; both sets must be non-empty and exist.
    pub fn resolve(&self, net: &Network) -> Result<(Vec<usize>, Vec<usize>)> {
        if self.origins.is_empty() || self.destinations.is_empty() {
            return Err(Error::EmptyTerminals);
        }
        let origins = self
            .origins
            .iter()
            .map(|id| net.node_index(id))
            .collect::<Result<Vec<_>>>()?;
        let destinations = self
            .destinations
            .iter()
            .map(|id| net.node_index(id))
            .collect::<Result<Vec<_>>>()?;
        Ok((origins, destinations))
    }
}

/// Margin vector aligned to the network's non-perfect component order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginSample(Vec<f64>);

impl MarginSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "margin sample entries must be finite".into(),
            ));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Margin for a component id, or `None` for perfect nodes.
    pub fn value_for(&self, net: &Network, id: &str) -> Result<Option<f64>> {
        let node = net.node_index(id)?;
        Ok(net.margin_slot(node).map(|slot| self.0[slot]))
    }
}

/// An unreliable link with its own capacity, to be rewritten as a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnreliableLink {
    pub a: String,
    pub b: String,
    pub capacity_median: f64,
    pub capacity_log_std: f64,
}

/// Rewrites each unreliable link as a new non-perfect node placed at the
/// link midpoint, splitting the original edge in two. Grows |V| and |E| by
/// exactly the number of links; original endpoints are untouched.
pub fn link_to_node_conversion(net: &Network, links: &[UnreliableLink]) -> Result<Network> {
    if links.is_empty() {
        return Ok(net.clone());
    }
    let mut nodes = net.nodes().to_vec();
    let mut edges: Vec<(String, String)> = net
        .edges()
        .iter()
        .map(|&(a, b)| (net.node(a).id.clone(), net.node(b).id.clone()))
        .collect();
    let mut taken: std::collections::HashSet<String> = nodes.iter().map(|n| n.id.clone()).collect();
    for link in links {
        let ia = net.node_index(&link.a)?;
        let ib = net.node_index(&link.b)?;
        let key = |x: &str, y: &str| (x.min(y).to_string(), x.max(y).to_string());
        let target = key(&link.a, &link.b);
        let pos = edges
            .iter()
            .position(|(a, b)| key(a, b) == target)
            .ok_or_else(|| {
                Error::InvalidNetwork(format!(
                    "unreliable link `{}`-`{}` is not an edge of the network",
                    link.a, link.b
                ))
            })?;
        edges.swap_remove(pos);
        let mut id = format!("{}~{}", link.a, link.b);
        while taken.contains(&id) {
            id.push('\'');
        }
        taken.insert(id.clone());
        let pa = net.node(ia).position;
        let pb = net.node(ib).position;
        let mid = Point::new((pa.x_km + pb.x_km) / 2.0, (pa.y_km + pb.y_km) / 2.0);
        nodes.push(Component::new(
            id.clone(),
            mid,
            link.capacity_median,
            link.capacity_log_std,
        ));
        edges.push((link.a.clone(), id.clone()));
        edges.push((id, link.b.clone()));
    }
    Network::new(nodes, &edges)
}
