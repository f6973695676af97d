//! Action oracles: given one agent type and a nonnegative weight per
//! resource, return a feasible action whose total weight is within a factor
//! `rho` of the cheapest feasible action.
//!
//! Three oracles are provided: exact shortest path (`rho = 1`), metric
//! closure Steiner tree (`rho = 2`, undirected only), and explicit-list
//! argmin (`rho = 1`). Tie-breaking is deterministic everywhere so that
//! dynamics traces are reproducible: path searches order labels by
//! (weight, hop count, node sequence) and set oracles prefer the
//! lexicographically smallest sorted resource-id sequence.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::model::{Action, Graph, Instance, NodeId, Request, ResourceId};
use crate::{Error, Result};

/// Nonnegative weight per resource; the oracle-facing linearization of
/// expected cost shares. Total over the instance's resources.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    ids: Vec<ResourceId>,
    weights: Vec<f64>,
}

impl WeightVector {
    /// Builds a weight vector by evaluating `weight_of` on every resource
    /// of the instance, in resource-index order.
    pub fn from_fn<F: FnMut(usize, ResourceId) -> f64>(inst: &Instance, mut weight_of: F) -> Self {
        let ids: Vec<ResourceId> = inst.resources().iter().map(|r| r.id).collect();
        let weights = ids
            .iter()
            .enumerate()
            .map(|(k, &id)| {
                let w = weight_of(k, id);
                debug_assert!(w >= 0.0 && w.is_finite(), "weights must be finite and >= 0");
                w
            })
            .collect();
        WeightVector { ids, weights }
    }

    pub fn get(&self, id: ResourceId) -> Option<f64> {
        self.ids
            .binary_search(&id)
            .ok()
            .map(|k| self.weights[k])
    }

    pub fn by_index(&self, index: usize) -> f64 {
        self.weights[index]
    }

    /// Total weight of an action.
    pub fn action_weight(&self, action: &Action) -> f64 {
        action
            .ids()
            .iter()
            .map(|&id| self.get(id).unwrap_or(0.0))
            .sum()
    }
}

/// The oracle implementations this crate ships.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    ShortestPath,
    SteinerMst,
    Explicit,
}

impl OracleKind {
    pub fn name(self) -> &'static str {
        match self {
            OracleKind::ShortestPath => "shortest-path",
            OracleKind::SteinerMst => "steiner-mst",
            OracleKind::Explicit => "explicit",
        }
    }

    /// Approximation guarantee the oracle promises.
    pub fn rho(self) -> f64 {
        match self {
            OracleKind::ShortestPath | OracleKind::Explicit => 1.0,
            OracleKind::SteinerMst => 2.0,
        }
    }

    fn natural_for(req: &Request) -> OracleKind {
        match req {
            Request::Routing { .. } => OracleKind::ShortestPath,
            Request::SetConnectivity { .. } => OracleKind::SteinerMst,
            Request::Explicit { .. } => OracleKind::Explicit,
        }
    }
}

/// An oracle kind together with its guarantee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleDescriptor {
    pub kind: OracleKind,
    pub rho: f64,
}

impl OracleDescriptor {
    pub fn new(kind: OracleKind) -> Self {
        OracleDescriptor {
            kind,
            rho: kind.rho(),
        }
    }
}

/// Dispatcher used by the dynamics engine: picks the oracle matching each
/// request kind, or enforces a single forced kind across the instance.
#[derive(Debug, Clone, Copy, Default)]
pub struct Oracle {
    forced: Option<OracleKind>,
}

impl Oracle {
    /// Per-request dispatch: shortest path for routing, Steiner for
    /// undirected set connectivity, argmin for explicit lists.
    pub fn auto() -> Self {
        Oracle { forced: None }
    }

    /// Requires every request to be servable by `kind`.
    pub fn forced(kind: OracleKind) -> Self {
        Oracle { forced: Some(kind) }
    }

    /// The descriptor that will serve `req`, or a mismatch error when a
    /// forced kind cannot.
    pub fn descriptor_for(&self, req: &Request) -> Result<OracleDescriptor> {
        let natural = OracleKind::natural_for(req);
        match self.forced {
            None => Ok(OracleDescriptor::new(natural)),
            Some(kind) if kind == natural => Ok(OracleDescriptor::new(kind)),
            Some(kind) => Err(Error::OracleKindMismatch {
                forced: kind.name(),
                request: req.kind_name(),
            }),
        }
    }

    /// Worst-case `rho` over every (agent, type) request of the instance.
    /// Also rejects requests no shipped oracle can serve (set connectivity
    /// on directed graphs must be encoded explicitly).
    pub fn rho(&self, inst: &Instance) -> Result<f64> {
        let mut rho: f64 = 1.0;
        for agent in inst.agents() {
            for req in &agent.types {
                let descriptor = self.descriptor_for(req)?;
                if descriptor.kind == OracleKind::SteinerMst {
                    match inst.graph() {
                        None => return Err(Error::MissingGraph),
                        Some(g) if g.directed => return Err(Error::DirectedSteinerUnsupported),
                        Some(_) => {}
                    }
                }
                rho = rho.max(descriptor.rho);
            }
        }
        Ok(rho)
    }

    /// Feasible action for `req` within factor `rho` of minimum weight.
    /// Unsatisfiable requests are an explicit error, never an empty action.
    pub fn best_action(&self, inst: &Instance, req: &Request, w: &WeightVector) -> Result<Action> {
        self.descriptor_for(req)?;
        best_action(inst, req, w)
    }
}

/// Per-request-kind dispatch without any forced-kind policy.
pub fn best_action(inst: &Instance, req: &Request, w: &WeightVector) -> Result<Action> {
    match req {
        Request::Routing { source, target } => {
            let g = inst.graph().ok_or(Error::MissingGraph)?;
            shortest_path(g, *source, *target, w)
        }
        Request::SetConnectivity { terminals } => {
            let g = inst.graph().ok_or(Error::MissingGraph)?;
            steiner_mst(g, terminals, w)
        }
        Request::Explicit { actions } => explicit_best(actions, w),
    }
}

/// Cheapest action from an explicit list; ties go to the lexicographically
/// smallest sorted id sequence.
pub fn explicit_best(actions: &[Action], w: &WeightVector) -> Result<Action> {
    actions
        .iter()
        .min_by(|a, b| {
            w.action_weight(a)
                .total_cmp(&w.action_weight(b))
                .then_with(|| a.cmp(b))
        })
        .cloned()
        .ok_or(Error::InternalInvariant("explicit request with no actions"))
}

#[derive(Debug, Clone)]
struct Label {
    dist: f64,
    hops: u32,
    parent: Option<(NodeId, ResourceId)>,
}

struct HeapEntry {
    dist: f64,
    hops: u32,
    node: NodeId,
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
    // Reversed: BinaryHeap is a max-heap and we want smallest keys first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.hops.cmp(&self.hops))
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Forward node sequence of the path recorded in `labels` ending at `node`.
fn path_nodes(labels: &[Option<Label>], node: NodeId) -> Vec<NodeId> {
    let mut seq = vec![node];
    let mut current = node;
    while let Some((prev, _)) = labels[current as usize].as_ref().and_then(|l| l.parent) {
        seq.push(prev);
        current = prev;
    }
    seq.reverse();
    seq
}

/// Label-setting search from `source` over nonnegative weights. Labels are
/// ordered by (distance, hop count, node sequence); the hop count makes keys
/// strictly increase along every arc, so zero-weight edges terminate, and
/// within equal (distance, hops) the sequences have equal length, which
/// keeps the lexicographic tie-break stable under extension.
fn dijkstra(g: &Graph, w: &WeightVector, source: NodeId) -> Vec<Option<Label>> {
    let mut labels: Vec<Option<Label>> = vec![None; g.nodes as usize];
    let mut settled = vec![false; g.nodes as usize];
    labels[source as usize] = Some(Label {
        dist: 0.0,
        hops: 0,
        parent: None,
    });
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry {
        dist: 0.0,
        hops: 0,
        node: source,
    });

    while let Some(entry) = heap.pop() {
        let node = entry.node as usize;
        if settled[node] {
            continue;
        }
        match &labels[node] {
            Some(l) if l.dist == entry.dist && l.hops == entry.hops => {}
            _ => continue, // stale entry
        }
        settled[node] = true;
        let (base_dist, base_hops) = {
            let l = labels[node].as_ref().unwrap();
            (l.dist, l.hops)
        };

        for (next, rid) in g.arcs_from(entry.node) {
            if settled[next as usize] {
                continue;
            }
            let weight = w.get(rid).unwrap_or(0.0);
            let cand_dist = base_dist + weight;
            let cand_hops = base_hops + 1;
            let better = match &labels[next as usize] {
                None => true,
                Some(best) => match cand_dist
                    .total_cmp(&best.dist)
                    .then_with(|| cand_hops.cmp(&best.hops))
                {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        // Equal weight and hop count: prefer the smaller
                        // node sequence. Both parent chains are settled, so
                        // reconstruction is well defined.
                        let mut cand_seq = path_nodes(&labels, entry.node);
                        cand_seq.push(next);
                        cand_seq < path_nodes(&labels, next)
                    }
                },
            };
            if better {
                labels[next as usize] = Some(Label {
                    dist: cand_dist,
                    hops: cand_hops,
                    parent: Some((entry.node, rid)),
                });
                heap.push(HeapEntry {
                    dist: cand_dist,
                    hops: cand_hops,
                    node: next,
                });
            }
        }
    }
    labels
}

/// Edge set of a minimum-weight path from `source` to `target`.
pub fn shortest_path(
    g: &Graph,
    source: NodeId,
    target: NodeId,
    w: &WeightVector,
) -> Result<Action> {
    if source == target {
        return Ok(Action::empty());
    }
    let labels = dijkstra(g, w, source);
    if labels[target as usize].is_none() {
        return Err(Error::NoPath { source, target });
    }
    let mut edges = Vec::new();
    let mut current = target;
    while let Some((prev, rid)) = labels[current as usize].as_ref().and_then(|l| l.parent) {
        edges.push(rid);
        current = prev;
    }
    Ok(Action::from_ids(edges))
}

/// Metric-closure 2-approximate Steiner tree: shortest paths between all
/// terminal pairs, a minimum spanning tree of that closure, the union of the
/// expanded paths reduced to a spanning tree, then non-terminal leaves
/// pruned off. Total weight is at most twice the optimum Steiner tree.
pub fn steiner_mst(g: &Graph, terminals: &[NodeId], w: &WeightVector) -> Result<Action> {
    if g.directed {
        return Err(Error::DirectedSteinerUnsupported);
    }
    let terminals: Vec<NodeId> = {
        let set: BTreeSet<NodeId> = terminals.iter().copied().collect();
        set.into_iter().collect()
    };
    if terminals.len() <= 1 {
        return Ok(Action::empty());
    }

    let searches: Vec<Vec<Option<Label>>> = terminals
        .iter()
        .map(|&t| dijkstra(g, w, t))
        .collect();
    for labels in &searches {
        for &t in &terminals {
            if labels[t as usize].is_none() {
                return Err(Error::DisconnectedTerminals);
            }
        }
    }

    // Kruskal over the metric closure, pairs ordered by (distance, i, j).
    let k = terminals.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, search) in searches.iter().enumerate() {
        for j in (i + 1)..k {
            let dist = search[terminals[j] as usize].as_ref().unwrap().dist;
            pairs.push((dist, i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| (a.1, a.2).cmp(&(b.1, b.2))));

    let mut component: Vec<usize> = (0..k).collect();
    fn find(component: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while component[root] != root {
            root = component[root];
        }
        let mut cur = x;
        while component[cur] != root {
            let next = component[cur];
            component[cur] = root;
            cur = next;
        }
        root
    }

    let mut union_edges: BTreeSet<ResourceId> = BTreeSet::new();
    let mut chosen = 0;
    for (_, i, j) in pairs {
        let (ri, rj) = (find(&mut component, i), find(&mut component, j));
        if ri == rj {
            continue;
        }
        component[ri] = rj;
        chosen += 1;
        // expand the closure edge back into graph edges
        let mut current = terminals[j];
        while let Some((prev, rid)) = searches[i][current as usize]
            .as_ref()
            .and_then(|l| l.parent)
        {
            union_edges.insert(rid);
            current = prev;
        }
        if chosen == k - 1 {
            break;
        }
    }

    Ok(prune_to_steiner_tree(g, &terminals, union_edges, w))
}

/// Reduces a connected edge set to a tree and strips non-terminal leaves.
fn prune_to_steiner_tree(
    g: &Graph,
    terminals: &[NodeId],
    union_edges: BTreeSet<ResourceId>,
    w: &WeightVector,
) -> Action {
    let mut edges: Vec<&crate::model::Edge> = g
        .edges
        .iter()
        .filter(|e| union_edges.contains(&e.resource))
        .collect();
    edges.sort_by(|a, b| {
        let wa = w.get(a.resource).unwrap_or(0.0);
        let wb = w.get(b.resource).unwrap_or(0.0);
        wa.total_cmp(&wb).then_with(|| a.resource.cmp(&b.resource))
    });

    // spanning tree of the union subgraph
    let mut parent: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    fn root_of(parent: &mut BTreeMap<NodeId, NodeId>, x: NodeId) -> NodeId {
        let mut root = x;
        while let Some(&p) = parent.get(&root) {
            if p == root {
                break;
            }
            root = p;
        }
        let mut cur = x;
        while let Some(&p) = parent.get(&cur) {
            if p == cur {
                break;
            }
            parent.insert(cur, root);
            cur = p;
        }
        root
    }
    let mut tree: Vec<&crate::model::Edge> = Vec::new();
    for e in edges {
        parent.entry(e.from).or_insert(e.from);
        parent.entry(e.to).or_insert(e.to);
        let (ra, rb) = (root_of(&mut parent, e.from), root_of(&mut parent, e.to));
        if ra != rb {
            parent.insert(ra, rb);
            tree.push(e);
        }
    }

    // iteratively drop non-terminal leaves; only ever lowers the weight
    let terminal_set: BTreeSet<NodeId> = terminals.iter().copied().collect();
    loop {
        let mut degree: BTreeMap<NodeId, u32> = BTreeMap::new();
        for e in &tree {
            *degree.entry(e.from).or_insert(0) += 1;
            *degree.entry(e.to).or_insert(0) += 1;
        }
        let before = tree.len();
        tree.retain(|e| {
            let from_leaf = degree[&e.from] == 1 && !terminal_set.contains(&e.from);
            let to_leaf = degree[&e.to] == 1 && !terminal_set.contains(&e.to);
            !(from_leaf || to_leaf)
        });
        if tree.len() == before {
            break;
        }
    }

    Action::from_ids(tree.iter().map(|e| e.resource).collect())
}
