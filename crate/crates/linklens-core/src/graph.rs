//! Typed directed multigraph over dataset accounts, plus connected-component
//! partitions in two modes:
//!
//! * **weak** — direction-blind components, maintained by a union-find with
//!   path compression and union by size, so edges can also be inserted
//!   incrementally with a reported [`ComponentDelta`];
//! * **strong** — strongly connected components via an iterative Tarjan pass
//!   (batch only; incremental insertion is rejected).
//!
//! Nodes are indexed by canonical `(address, layer)` order, which makes node
//! ids — and everything derived from them — deterministic for a given
//! dataset. Failed transactions never become edges. Follow edges are
//! timeless: they are only included when no time window is requested.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::ingest::Dataset;
use crate::model::{Address, Layer, TxMethod};

/// Node index within a [`SocialGraph`].
pub type NodeId = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("empty time window: start {0} is not before end {1}")]
    EmptyWindow(i64, i64),
    #[error("incremental edge insertion requires a weak-mode partition")]
    UnsupportedMode,
}

/// Which edge kinds participate in a graph build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeFilter {
    pub transfer: bool,
    pub buy: bool,
    pub sell: bool,
    pub contract_other: bool,
    pub follows: bool,
}

impl EdgeFilter {
    /// The financial-interaction edge set: transfers plus share trades.
    pub fn financial() -> Self {
        EdgeFilter {
            transfer: true,
            buy: true,
            sell: true,
            contract_other: false,
            follows: false,
        }
    }

    /// Every edge kind, follows included.
    pub fn all() -> Self {
        EdgeFilter {
            transfer: true,
            buy: true,
            sell: true,
            contract_other: true,
            follows: true,
        }
    }

    pub fn includes_method(&self, method: &TxMethod) -> bool {
        match method {
            TxMethod::Transfer => self.transfer,
            TxMethod::BuyShare => self.buy,
            TxMethod::SellShare => self.sell,
            TxMethod::ContractOther(_) => self.contract_other,
        }
    }
}

impl Default for EdgeFilter {
    /// Defaults to the financial edge set.
    fn default() -> Self {
        EdgeFilter::financial()
    }
}

/// Edge kind tag carried on graph edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Transfer,
    Buy,
    Sell,
    ContractOther,
    Follow,
}

impl EdgeKind {
    fn of_method(method: &TxMethod) -> EdgeKind {
        match method {
            TxMethod::Transfer => EdgeKind::Transfer,
            TxMethod::BuyShare => EdgeKind::Buy,
            TxMethod::SellShare => EdgeKind::Sell,
            TxMethod::ContractOther(_) => EdgeKind::ContractOther,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EdgeKind::Transfer => "transfer",
            EdgeKind::Buy => "buy",
            EdgeKind::Sell => "sell",
            EdgeKind::ContractOther => "contract_other",
            EdgeKind::Follow => "follow",
        }
    }
}

/// A directed multi-edge. `timestamp` is `None` for follow edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphEdge {
    pub kind: EdgeKind,
    pub from: NodeId,
    pub to: NodeId,
    pub weight_wei: u128,
    pub timestamp: Option<i64>,
    /// Index into `Dataset::transactions` for transaction-derived edges.
    pub tx_index: Option<u32>,
}

/// Node payload: identity plus first-seen timestamp.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphNode {
    pub address: Address,
    pub layer: Layer,
    pub first_seen: Option<i64>,
}

/// Directed multigraph with per-node in/out adjacency (edge indices).
#[derive(Clone, Debug)]
pub struct SocialGraph {
    nodes: Vec<GraphNode>,
    edges: Vec<GraphEdge>,
    out_adj: Vec<Vec<u32>>,
    in_adj: Vec<Vec<u32>>,
}

impl SocialGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, id: NodeId) -> &GraphNode {
        &self.nodes[id as usize]
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    /// Node id for `(address, layer)` via binary search over canonical order.
    pub fn node_id(&self, address: Address, layer: Layer) -> Option<NodeId> {
        self.nodes
            .binary_search_by(|n| (n.address, n.layer).cmp(&(address, layer)))
            .ok()
            .map(|i| i as NodeId)
    }

    /// True when at least one edge runs `from → to`.
    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.out_adj[from as usize]
            .iter()
            .any(|&e| self.edges[e as usize].to == to)
    }

    pub fn out_edges(&self, node: NodeId) -> impl Iterator<Item = &GraphEdge> {
        self.out_adj[node as usize]
            .iter()
            .map(move |&e| &self.edges[e as usize])
    }

    pub fn in_edges(&self, node: NodeId) -> impl Iterator<Item = &GraphEdge> {
        self.in_adj[node as usize]
            .iter()
            .map(move |&e| &self.edges[e as usize])
    }

    /// Write an edge list as `from,to,kind,wei,timestamp` CSV. Transaction
    /// endpoints render as addresses; the layer travels with the node list.
    pub fn export_edges_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "from,to,kind,wei,timestamp")?;
        for edge in &self.edges {
            let from = &self.nodes[edge.from as usize];
            let to = &self.nodes[edge.to as usize];
            let ts = edge.timestamp.map(|t| t.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{}",
                from.address,
                to.address,
                edge.kind.label(),
                edge.weight_wei,
                ts
            )?;
        }
        Ok(())
    }

    /// Write the node list as `address,layer,first_seen` CSV.
    pub fn export_nodes_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "address,layer,first_seen")?;
        for node in &self.nodes {
            let ts = node.first_seen.map(|t| t.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{}", node.address, node.layer, ts)?;
        }
        Ok(())
    }
}

/// Build a graph over dataset accounts.
///
/// * `filter` selects edge kinds; follow edges join the graph after all
///   transaction edges, in `(follower, followee)` order.
/// * `window` keeps only transactions with `start <= ts < end` and drops
///   (timeless) follow edges entirely; an empty window is an error.
/// * `include_isolated` keeps accounts without any selected edge as isolated
///   nodes (the default everywhere); pass `false` to restrict the node set to
///   edge endpoints.
pub fn build_graph(
    dataset: &Dataset,
    filter: &EdgeFilter,
    window: Option<(i64, i64)>,
    include_isolated: bool,
) -> Result<SocialGraph, GraphError> {
    if let Some((start, end)) = window {
        if start >= end {
            return Err(GraphError::EmptyWindow(start, end));
        }
    }

    // Raw edges as (address, layer) endpoints, in deterministic order:
    // transactions first (dataset order = block, hash), then follows.
    struct RawEdge {
        kind: EdgeKind,
        from: (Address, Layer),
        to: (Address, Layer),
        weight_wei: u128,
        timestamp: Option<i64>,
        tx_index: Option<u32>,
    }
    let mut raw: Vec<RawEdge> = Vec::new();
    for (idx, tx) in dataset.transactions.iter().enumerate() {
        if !tx.is_ok() || !filter.includes_method(&tx.method) {
            continue;
        }
        if let Some((start, end)) = window {
            if tx.timestamp < start || tx.timestamp >= end {
                continue;
            }
        }
        raw.push(RawEdge {
            kind: EdgeKind::of_method(&tx.method),
            from: (tx.from, tx.layer),
            to: (tx.to, tx.layer),
            weight_wei: tx.value_wei(),
            timestamp: Some(tx.timestamp),
            tx_index: Some(idx as u32),
        });
    }
    if filter.follows && window.is_none() {
        for edge in &dataset.follows {
            raw.push(RawEdge {
                kind: EdgeKind::Follow,
                from: (edge.follower, Layer::L2),
                to: (edge.followee, Layer::L2),
                weight_wei: 0,
                timestamp: None,
                tx_index: None,
            });
        }
    }

    // Node set: all accounts, or just edge endpoints. Either way the ids
    // follow canonical (address, layer) order.
    let nodes: Vec<GraphNode> = if include_isolated {
        dataset
            .accounts
            .iter()
            .map(|a| GraphNode {
                address: a.address,
                layer: a.layer,
                first_seen: a.first_seen,
            })
            .collect()
    } else {
        let mut keys: Vec<(Address, Layer)> = raw
            .iter()
            .flat_map(|e| [e.from, e.to])
            .collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|(address, layer)| GraphNode {
                address,
                layer,
                first_seen: dataset.account(address, layer).and_then(|a| a.first_seen),
            })
            .collect()
    };

    let locate = |key: (Address, Layer)| -> NodeId {
        nodes
            .binary_search_by(|n| (n.address, n.layer).cmp(&key))
            .expect("edge endpoint missing from node set") as NodeId
    };

    let mut edges = Vec::with_capacity(raw.len());
    let mut out_adj = vec![Vec::new(); nodes.len()];
    let mut in_adj = vec![Vec::new(); nodes.len()];
    for e in raw {
        let from = locate(e.from);
        let to = locate(e.to);
        let idx = edges.len() as u32;
        edges.push(GraphEdge {
            kind: e.kind,
            from,
            to,
            weight_wei: e.weight_wei,
            timestamp: e.timestamp,
            tx_index: e.tx_index,
        });
        out_adj[from as usize].push(idx);
        in_adj[to as usize].push(idx);
    }

    Ok(SocialGraph {
        nodes,
        edges,
        out_adj,
        in_adj,
    })
}

// ---------------------------------------------------------------------------
// Union-find
// ---------------------------------------------------------------------------

/// Disjoint-set forest with union by size and path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    /// Append a fresh singleton node and return its index.
    pub fn push_node(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.size.push(1);
        self.components += 1;
        id
    }

    /// Root of `x`, compressing the path as it goes.
    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Root of `x` without mutating (no compression).
    pub fn root(&self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            x = self.parent[x as usize];
        }
        x
    }

    /// Union the sets of `a` and `b`. Returns `Some((kept, absorbed))` roots
    /// when two distinct components merged. The larger component's root is
    /// kept; equal sizes keep the smaller root index, deterministically.
    pub fn union(&mut self, a: u32, b: u32) -> Option<(u32, u32)> {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return None;
        }
        let (kept, absorbed) = match self.size[ra as usize].cmp(&self.size[rb as usize]) {
            std::cmp::Ordering::Greater => (ra, rb),
            std::cmp::Ordering::Less => (rb, ra),
            std::cmp::Ordering::Equal => (ra.min(rb), ra.max(rb)),
        };
        self.parent[absorbed as usize] = kept;
        self.size[kept as usize] += self.size[absorbed as usize];
        self.components -= 1;
        Some((kept, absorbed))
    }

    pub fn size_of_root(&self, root: u32) -> u64 {
        self.size[root as usize] as u64
    }

    /// `(root, size)` for every component, in ascending root order.
    pub fn components_iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter(|(i, &p)| p == *i as u32)
            .map(|(i, _)| (i as u32, self.size[i] as u64))
    }
}

// ---------------------------------------------------------------------------
// Component partitions
// ---------------------------------------------------------------------------

/// Partition flavour: direction-blind or strongly connected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionMode {
    Weak,
    Strong,
}

#[derive(Clone, Debug)]
enum PartitionRepr {
    Weak(UnionFind),
    Strong { assignment: Vec<u32>, sizes: Vec<u64> },
}

/// Assignment of nodes to components plus component sizes.
///
/// Weak partitions stay live: [`ComponentPartition::insert_edge_incremental`]
/// merges components in near-constant time. Strong partitions are snapshots.
#[derive(Clone, Debug)]
pub struct ComponentPartition {
    mode: PartitionMode,
    repr: PartitionRepr,
}

/// What a single incremental edge insertion changed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentDelta {
    /// Singleton nodes created because the edge referenced ids beyond the
    /// current node range.
    pub new_nodes: u32,
    /// Present when two distinct components merged.
    pub merged: Option<MergedComponents>,
}

/// Details of a merge: the surviving root, the absorbed root, and sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MergedComponents {
    pub kept: u32,
    pub kept_size_before: u64,
    pub absorbed: u32,
    pub absorbed_size: u64,
    pub merged_size: u64,
}

impl ComponentPartition {
    /// A weak partition of `n` isolated nodes.
    pub fn weak_singletons(n: usize) -> Self {
        ComponentPartition {
            mode: PartitionMode::Weak,
            repr: PartitionRepr::Weak(UnionFind::new(n)),
        }
    }

    pub fn mode(&self) -> PartitionMode {
        self.mode
    }

    pub fn total_nodes(&self) -> usize {
        match &self.repr {
            PartitionRepr::Weak(uf) => uf.len(),
            PartitionRepr::Strong { assignment, .. } => assignment.len(),
        }
    }

    pub fn component_count(&self) -> usize {
        match &self.repr {
            PartitionRepr::Weak(uf) => uf.component_count(),
            PartitionRepr::Strong { sizes, .. } => sizes.len(),
        }
    }

    /// Component id of a node. Weak ids are union-find roots (a merged
    /// component keeps its surviving root's id); strong ids are dense.
    pub fn component_of(&self, node: NodeId) -> u32 {
        match &self.repr {
            PartitionRepr::Weak(uf) => uf.root(node),
            PartitionRepr::Strong { assignment, .. } => assignment[node as usize],
        }
    }

    /// Component sizes in descending order (label-free multiset view).
    pub fn component_sizes(&self) -> Vec<u64> {
        let mut sizes: Vec<u64> = match &self.repr {
            PartitionRepr::Weak(uf) => uf.components_iter().map(|(_, s)| s).collect(),
            PartitionRepr::Strong { sizes, .. } => sizes.clone(),
        };
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    /// Append an isolated node (weak mode), returning its id.
    pub fn add_node(&mut self) -> Result<NodeId, GraphError> {
        match &mut self.repr {
            PartitionRepr::Weak(uf) => Ok(uf.push_node()),
            PartitionRepr::Strong { .. } => Err(GraphError::UnsupportedMode),
        }
    }

    /// Apply one edge incrementally (weak mode only). Endpoints beyond the
    /// current node range are created as singletons first, so an edge that
    /// introduces a brand-new node reads as "node count +1, then merge".
    pub fn insert_edge_incremental(
        &mut self,
        from: NodeId,
        to: NodeId,
    ) -> Result<ComponentDelta, GraphError> {
        let uf = match &mut self.repr {
            PartitionRepr::Weak(uf) => uf,
            PartitionRepr::Strong { .. } => return Err(GraphError::UnsupportedMode),
        };
        let mut new_nodes = 0u32;
        let needed = from.max(to) as usize + 1;
        while uf.len() < needed {
            uf.push_node();
            new_nodes += 1;
        }
        let before_a = uf.find(from);
        let before_b = uf.find(to);
        let merged = if before_a == before_b {
            None
        } else {
            let size_a = uf.size_of_root(before_a);
            let size_b = uf.size_of_root(before_b);
            let (kept, absorbed) = uf.union(from, to).expect("roots differ");
            let (kept_size_before, absorbed_size) = if kept == before_a {
                (size_a, size_b)
            } else {
                (size_b, size_a)
            };
            Some(MergedComponents {
                kept,
                kept_size_before,
                absorbed,
                absorbed_size,
                merged_size: uf.size_of_root(kept),
            })
        };
        Ok(ComponentDelta { new_nodes, merged })
    }
}

/// Compute the component partition of a graph in the requested mode.
pub fn components(graph: &SocialGraph, mode: PartitionMode) -> ComponentPartition {
    match mode {
        PartitionMode::Weak => {
            let mut uf = UnionFind::new(graph.node_count());
            for edge in graph.edges() {
                uf.union(edge.from, edge.to);
            }
            ComponentPartition {
                mode,
                repr: PartitionRepr::Weak(uf),
            }
        }
        PartitionMode::Strong => {
            let n = graph.node_count();
            let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
            for edge in graph.edges() {
                adj[edge.from as usize].push(edge.to);
            }
            let (assignment, sizes) = tarjan_scc(&adj);
            ComponentPartition {
                mode,
                repr: PartitionRepr::Strong { assignment, sizes },
            }
        }
    }
}

/// Iterative Tarjan strongly-connected components over an adjacency list.
/// Returns `(assignment, sizes)` with dense component ids.
pub(crate) fn tarjan_scc(adj: &[Vec<u32>]) -> (Vec<u32>, Vec<u64>) {
    let n = adj.len();
    const UNSET: u32 = u32::MAX;
    let mut index_of = vec![UNSET; n];
    let mut lowlink = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut assignment = vec![UNSET; n];
    let mut sizes: Vec<u64> = Vec::new();
    let mut stack: Vec<u32> = Vec::new();
    let mut next_index = 0u32;

    // Explicit DFS frames: (node, next child position).
    let mut frames: Vec<(u32, usize)> = Vec::new();
    for start in 0..n as u32 {
        if index_of[start as usize] != UNSET {
            continue;
        }
        frames.push((start, 0));
        index_of[start as usize] = next_index;
        lowlink[start as usize] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start as usize] = true;

        while let Some(&mut (v, ref mut child)) = frames.last_mut() {
            if *child < adj[v as usize].len() {
                let w = adj[v as usize][*child];
                *child += 1;
                if index_of[w as usize] == UNSET {
                    index_of[w as usize] = next_index;
                    lowlink[w as usize] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    frames.push((w, 0));
                } else if on_stack[w as usize] {
                    lowlink[v as usize] = lowlink[v as usize].min(index_of[w as usize]);
                }
            } else {
                frames.pop();
                if let Some(&mut (parent, _)) = frames.last_mut() {
                    lowlink[parent as usize] = lowlink[parent as usize].min(lowlink[v as usize]);
                }
                if lowlink[v as usize] == index_of[v as usize] {
                    let comp_id = sizes.len() as u32;
                    let mut size = 0u64;
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w as usize] = false;
                        assignment[w as usize] = comp_id;
                        size += 1;
                        if w == v {
                            break;
                        }
                    }
                    sizes.push(size);
                }
            }
        }
    }
    (assignment, sizes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::assemble;
    use crate::model::{Account, FollowEdge, FollowSource, Transaction, TxHash, TxStatus};

    fn addr(n: u8) -> Address {
        let mut bytes = [0u8; 20];
        bytes[19] = n;
        Address::from_bytes(bytes)
    }

    fn tx(hash: u8, from: Address, to: Address, method: TxMethod, ts: i64) -> Transaction {
        Transaction {
            tx_hash: TxHash::from_bytes([hash; 32]),
            block_no: ts as u64,
            timestamp: ts,
            from,
            to,
            value_in_wei: 5,
            value_out_wei: 0,
            fee_wei: 0,
            method,
            status: TxStatus::Ok,
            layer: Layer::L2,
        }
    }

    fn three_account_dataset() -> Dataset {
        let accounts = vec![
            Account::new(addr(1), Layer::L2),
            Account::new(addr(2), Layer::L2),
            Account::new(addr(3), Layer::L2),
        ];
        let txs = vec![tx(1, addr(1), addr(2), TxMethod::Transfer, 100)];
        assemble(accounts, txs, vec![])
    }

    #[test]
    fn build_keeps_isolated_nodes_by_default() {
        let dataset = three_account_dataset();
        let graph = build_graph(&dataset, &EdgeFilter::all(), None, true).unwrap();
        assert_eq!(graph.node_count(), 3);
        assert_eq!(graph.edge_count(), 1);
        let c = graph.node_id(addr(3), Layer::L2).unwrap();
        assert_eq!(graph.out_edges(c).count() + graph.in_edges(c).count(), 0);

        let trimmed = build_graph(&dataset, &EdgeFilter::all(), None, false).unwrap();
        assert_eq!(trimmed.node_count(), 2);
    }

    #[test]
    fn edge_filter_selects_kinds() {
        let accounts = vec![
            Account::new(addr(1), Layer::L2),
            Account::new(addr(2), Layer::L2),
        ];
        let txs = vec![
            tx(1, addr(1), addr(2), TxMethod::BuyShare, 100),
            tx(2, addr(1), addr(2), TxMethod::BuyShare, 110),
            tx(3, addr(1), addr(2), TxMethod::Transfer, 120),
        ];
        let dataset = assemble(accounts, txs, vec![]);
        let buys_only = EdgeFilter {
            transfer: false,
            buy: true,
            sell: false,
            contract_other: false,
            follows: false,
        };
        let graph = build_graph(&dataset, &buys_only, None, true).unwrap();
        assert_eq!(graph.edge_count(), 2);
        assert!(graph.edges().iter().all(|e| e.kind == EdgeKind::Buy));
    }

    #[test]
    fn window_excludes_transactions_and_rejects_empty_ranges() {
        let dataset = three_account_dataset();
        let graph = build_graph(&dataset, &EdgeFilter::all(), Some((200, 300)), true).unwrap();
        assert_eq!(graph.edge_count(), 0);
        assert_eq!(graph.node_count(), 3);
        assert_eq!(
            build_graph(&dataset, &EdgeFilter::all(), Some((300, 300)), true).unwrap_err(),
            GraphError::EmptyWindow(300, 300)
        );
    }

    #[test]
    fn failed_transactions_never_become_edges() {
        let mut failing = tx(4, addr(1), addr(3), TxMethod::Transfer, 130);
        failing.status = TxStatus::Error("reverted".into());
        let dataset = assemble(
            vec![Account::new(addr(1), Layer::L2), Account::new(addr(3), Layer::L2)],
            vec![failing],
            vec![],
        );
        let graph = build_graph(&dataset, &EdgeFilter::all(), None, true).unwrap();
        assert_eq!(graph.edge_count(), 0);
    }

    #[test]
    fn weak_components_merge_across_direction() {
        // a→b plus c isolated: components {a,b} and {c}, sizes {2,1}.
        let dataset = three_account_dataset();
        let graph = build_graph(&dataset, &EdgeFilter::all(), None, true).unwrap();
        let partition = components(&graph, PartitionMode::Weak);
        assert_eq!(partition.component_sizes(), vec![2, 1]);

        let a = graph.node_id(addr(1), Layer::L2).unwrap();
        let b = graph.node_id(addr(2), Layer::L2).unwrap();
        let c = graph.node_id(addr(3), Layer::L2).unwrap();
        assert_eq!(partition.component_of(a), partition.component_of(b));
        assert_ne!(partition.component_of(a), partition.component_of(c));
    }

    #[test]
    fn strong_components_need_mutual_reachability() {
        let accounts = vec![
            Account::new(addr(1), Layer::L2),
            Account::new(addr(2), Layer::L2),
        ];
        // One-way edge: two singleton SCCs.
        let one_way = assemble(
            accounts.clone(),
            vec![tx(1, addr(1), addr(2), TxMethod::Transfer, 100)],
            vec![],
        );
        let g = build_graph(&one_way, &EdgeFilter::all(), None, true).unwrap();
        assert_eq!(components(&g, PartitionMode::Strong).component_sizes(), vec![1, 1]);
        assert_eq!(components(&g, PartitionMode::Weak).component_sizes(), vec![2]);

        // Two-cycle: a single SCC of size 2.
        let cycle = assemble(
            accounts,
            vec![
                tx(1, addr(1), addr(2), TxMethod::Transfer, 100),
                tx(2, addr(2), addr(1), TxMethod::Transfer, 110),
            ],
            vec![],
        );
        let g = build_graph(&cycle, &EdgeFilter::all(), None, true).unwrap();
        assert_eq!(components(&g, PartitionMode::Strong).component_sizes(), vec![2]);
    }

    #[test]
    fn incremental_insert_reports_merges_and_new_nodes() {
        let mut partition = ComponentPartition::weak_singletons(3);
        // Merge 0-1: two singletons collapse.
        let delta = partition.insert_edge_incremental(0, 1).unwrap();
        assert_eq!(delta.new_nodes, 0);
        let merge = delta.merged.unwrap();
        assert_eq!(merge.merged_size, 2);
        assert_eq!(merge.kept_size_before, 1);

        // Internal edge within component: no merge.
        let delta = partition.insert_edge_incremental(1, 0).unwrap();
        assert!(delta.merged.is_none());
        assert_eq!(partition.component_sizes(), vec![2, 1]);

        // Bridge 1-2: sizes {2,1} collapse to {3}.
        let delta = partition.insert_edge_incremental(1, 2).unwrap();
        assert_eq!(delta.merged.unwrap().merged_size, 3);
        assert_eq!(partition.component_sizes(), vec![3]);

        // Edge referencing a brand-new node: count grows, then merges.
        let delta = partition.insert_edge_incremental(2, 3).unwrap();
        assert_eq!(delta.new_nodes, 1);
        assert_eq!(delta.merged.unwrap().merged_size, 4);
        assert_eq!(partition.total_nodes(), 4);
    }

    #[test]
    fn strong_partitions_reject_incremental_insertion() {
        let dataset = three_account_dataset();
        let graph = build_graph(&dataset, &EdgeFilter::all(), None, true).unwrap();
        let mut partition = components(&graph, PartitionMode::Strong);
        assert_eq!(
            partition.insert_edge_incremental(0, 1).unwrap_err(),
            GraphError::UnsupportedMode
        );
    }

    #[test]
    fn follow_edges_join_when_requested_and_skip_windows() {
        let follows = vec![FollowEdge {
            follower: addr(1),
            followee: addr(3),
            source: FollowSource::Holding,
        }];
        let dataset = assemble(
            vec![
                Account::new(addr(1), Layer::L2),
                Account::new(addr(3), Layer::L2),
            ],
            vec![],
            follows,
        );
        let graph = build_graph(&dataset, &EdgeFilter::all(), None, true).unwrap();
        assert_eq!(graph.edge_count(), 1);
        assert_eq!(graph.edges()[0].kind, EdgeKind::Follow);
        // Follows carry no timestamp, so a windowed build drops them.
        let windowed = build_graph(&dataset, &EdgeFilter::all(), Some((0, 10)), true).unwrap();
        assert_eq!(windowed.edge_count(), 0);
    }

    #[test]
    fn exports_are_deterministic_csv() {
        let dataset = three_account_dataset();
        let graph = build_graph(&dataset, &EdgeFilter::all(), None, true).unwrap();
        let mut edges = Vec::new();
        graph.export_edges_csv(&mut edges).unwrap();
        let text = String::from_utf8(edges).unwrap();
        assert!(text.starts_with("from,to,kind,wei,timestamp\n"));
        assert!(text.contains("transfer"));
        let mut nodes = Vec::new();
        graph.export_nodes_csv(&mut nodes).unwrap();
        assert_eq!(String::from_utf8(nodes).unwrap().lines().count(), 4);
    }
}
