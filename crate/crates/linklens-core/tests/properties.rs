//! Property-based invariants over graphs, entropy, ties, and serialization.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use linklens_core::entropy::{structural_entropy, IncrementalEntropy};
use linklens_core::graph::{
    build_graph, components, ComponentPartition, EdgeFilter, PartitionMode, UnionFind,
};
use linklens_core::ingest::{assemble, Dataset};
use linklens_core::synth::{generate, PlantKind, PlantSpec, ScenarioSpec, GENESIS_TS};
use linklens_core::ties::{classify_ties, HoldsRelation};
use linklens_core::wei::{eth_to_wei, wei_to_eth};
use linklens_core::{
    Account, Address, FollowEdge, FollowSource, Layer, Transaction, TxHash, TxMethod, TxStatus,
    WEI_PER_ETH,
};

fn addr(i: u32) -> Address {
    let mut bytes = [0u8; 20];
    bytes[16..].copy_from_slice(&i.to_be_bytes());
    Address::from_bytes(bytes)
}

fn hash(i: u64) -> TxHash {
    let mut bytes = [0u8; 32];
    bytes[24..].copy_from_slice(&i.to_be_bytes());
    TxHash::from_bytes(bytes)
}

fn transfer_dataset(n_nodes: u32, edges: &[(u32, u32)]) -> Dataset {
    let accounts = (0..n_nodes)
        .map(|i| Account::new(addr(i), Layer::L2))
        .collect();
    let transactions = edges
        .iter()
        .enumerate()
        .map(|(i, &(from, to))| Transaction {
            tx_hash: hash(i as u64 + 1),
            block_no: i as u64 + 1,
            timestamp: 1_000 + i as i64,
            from: addr(from),
            to: addr(to),
            value_in_wei: WEI_PER_ETH,
            value_out_wei: 0,
            fee_wei: 0,
            method: TxMethod::Transfer,
            status: TxStatus::Ok,
            layer: Layer::L2,
        })
        .collect();
    assemble(accounts, transactions, Vec::new())
}

fn edge_strategy(max_nodes: u32) -> impl Strategy<Value = (u32, Vec<(u32, u32)>)> {
    (2..max_nodes).prop_flat_map(|n| {
        let edges = prop::collection::vec((0..n, 0..n), 0..200);
        (Just(n), edges)
    })
}

proptest! {
    /// Incrementally inserted edges give the same partition and entropy as a
    /// from-scratch recomputation on the final edge set.
    #[test]
    fn incremental_matches_batch((n, edges) in edge_strategy(120)) {
        let mut partition = ComponentPartition::weak_singletons(n as usize);
        let mut inc = IncrementalEntropy::new();
        for _ in 0..n {
            inc.add_isolated_node();
        }
        for &(a, b) in &edges {
            let delta = partition.insert_edge_incremental(a, b).unwrap();
            if let Some(merge) = delta.merged {
                inc.merge(merge.kept_size_before, merge.absorbed_size);
            }
        }
        let mut batch = UnionFind::new(n as usize);
        for &(a, b) in &edges {
            batch.union(a, b);
        }
        let mut incremental_sizes = partition.component_sizes();
        let mut batch_sizes: Vec<u64> = batch.components_iter().map(|(_, s)| s).collect();
        incremental_sizes.sort_unstable();
        batch_sizes.sort_unstable();
        prop_assert_eq!(incremental_sizes, batch_sizes.clone());
        let batch_h = structural_entropy(&batch_sizes).h;
        prop_assert!((inc.h() - batch_h).abs() < 1e-9);
    }

    /// The weak partition does not depend on edge insertion order.
    #[test]
    fn edge_order_is_irrelevant((n, mut edges) in edge_strategy(80)) {
        let forward = {
            let mut uf = UnionFind::new(n as usize);
            for &(a, b) in &edges {
                uf.union(a, b);
            }
            let mut sizes: Vec<u64> = uf.components_iter().map(|(_, s)| s).collect();
            sizes.sort_unstable();
            sizes
        };
        edges.reverse();
        let third = edges.len() / 3;
        edges.rotate_left(third);
        let backward = {
            let mut uf = UnionFind::new(n as usize);
            for &(a, b) in &edges {
                uf.union(a, b);
            }
            let mut sizes: Vec<u64> = uf.components_iter().map(|(_, s)| s).collect();
            sizes.sort_unstable();
            sizes
        };
        prop_assert_eq!(forward, backward);
    }

    /// Every strongly connected component lies inside one weak component,
    /// and both partitions cover every node exactly once.
    #[test]
    fn strong_refines_weak((n, edges) in edge_strategy(60)) {
        let dataset = transfer_dataset(n, &edges);
        let graph = build_graph(&dataset, &EdgeFilter::financial(), None, true).unwrap();
        let weak = components(&graph, PartitionMode::Weak);
        let strong = components(&graph, PartitionMode::Strong);

        let nodes = graph.node_count();
        prop_assert_eq!(weak.component_sizes().iter().sum::<u64>(), nodes as u64);
        prop_assert_eq!(strong.component_sizes().iter().sum::<u64>(), nodes as u64);
        prop_assert!(strong.component_count() >= weak.component_count());

        // Nodes sharing a strong component share a weak component.
        let mut strong_to_weak: BTreeMap<u32, u32> = BTreeMap::new();
        for node in 0..nodes as u32 {
            let s = strong.component_of(node);
            let w = weak.component_of(node);
            match strong_to_weak.get(&s) {
                Some(&existing) => prop_assert_eq!(existing, w),
                None => {
                    strong_to_weak.insert(s, w);
                }
            }
        }
    }

    /// Entropy is non-negative, bounded by ln(component count), and depends
    /// only on the multiset of sizes.
    #[test]
    fn entropy_bounds_and_label_invariance(mut sizes in prop::collection::vec(1u64..1_000, 1..50)) {
        let report = structural_entropy(&sizes);
        let k = sizes.len() as f64;
        prop_assert!(report.h >= 0.0);
        prop_assert!(report.h <= k.ln() + 1e-12);
        sizes.reverse();
        let reversed = structural_entropy(&sizes);
        prop_assert_eq!(report.h, reversed.h);
    }

    /// A long random script of arrivals and merges stays in lockstep with
    /// from-scratch recomputation, and each event moves entropy strictly in
    /// the documented direction.
    #[test]
    fn incremental_entropy_tracks_scratch(script in prop::collection::vec(any::<u16>(), 1..300)) {
        let mut inc = IncrementalEntropy::new();
        let mut sizes: Vec<u64> = Vec::new();
        for step in script {
            let merge_possible = sizes.len() >= 2;
            if merge_possible && step % 3 == 0 {
                let i = (step as usize / 3) % sizes.len();
                let mut j = (step as usize / 7) % sizes.len();
                if i == j {
                    j = (j + 1) % sizes.len();
                }
                let (a, b) = (sizes[i], sizes[j]);
                let before = inc.h();
                inc.merge(a, b);
                prop_assert!(inc.h() < before);
                let (lo, hi) = (i.min(j), i.max(j));
                sizes[lo] = a + b;
                sizes.remove(hi);
            } else {
                let before = inc.h();
                let was_empty = sizes.is_empty();
                inc.add_isolated_node();
                sizes.push(1);
                if !was_empty {
                    prop_assert!(inc.h() > before);
                }
            }
            let scratch = structural_entropy(&sizes);
            prop_assert!((inc.h() - scratch.h).abs() < 1e-9);
            prop_assert_eq!(inc.n_nodes(), sizes.iter().sum::<u64>());
            prop_assert_eq!(inc.component_count(), sizes.len() as u64);
        }
    }

    /// Tie classification agrees with exhaustive pair enumeration.
    #[test]
    fn ties_match_brute_force(
        n in 2u32..14,
        raw in prop::collection::vec((0u32..14, 0u32..14), 0..60),
    ) {
        let holds_pairs: BTreeSet<(u32, u32)> = raw
            .into_iter()
            .filter(|&(a, b)| a != b && a < n && b < n)
            .collect();
        let follows: Vec<FollowEdge> = holds_pairs
            .iter()
            .map(|&(a, b)| FollowEdge {
                follower: addr(a),
                followee: addr(b),
                source: FollowSource::Holding,
            })
            .collect();
        let holds = HoldsRelation::from_follows(&follows);
        let report = classify_ties(&holds, 2).unwrap();

        let has = |a: u32, b: u32| holds_pairs.contains(&(a, b));
        let mut strong = BTreeSet::new();
        let mut weak = BTreeSet::new();
        let mut indirect = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                if a >= b {
                    continue;
                }
                if has(a, b) && has(b, a) {
                    strong.insert((addr(a), addr(b)));
                } else if has(a, b) || has(b, a) {
                    if has(a, b) {
                        weak.insert((addr(a), addr(b)));
                    }
                    if has(b, a) {
                        weak.insert((addr(b), addr(a)));
                    }
                } else {
                    let witness = (0..n)
                        .filter(|&c| {
                            c != a && c != b && ((has(a, c) && has(c, b)) || (has(b, c) && has(c, a)))
                        })
                        .map(addr)
                        .min();
                    if let Some(w) = witness {
                        indirect.insert((addr(a), addr(b)), w);
                    }
                }
            }
        }
        prop_assert_eq!(&report.strong_pairs, &strong);
        prop_assert_eq!(&report.weak_edges, &weak);
        prop_assert_eq!(&report.indirect_pairs, &indirect);
    }

    /// Exact decimal round trip between wei and the ether column format.
    #[test]
    fn wei_round_trips_through_eth_strings(value in any::<u64>().prop_map(|v| v as u128 * 7)) {
        let rendered = wei_to_eth(value);
        prop_assert_eq!(eth_to_wei(&rendered).unwrap(), value);
    }

    /// Addresses and hashes survive display/parse round trips.
    #[test]
    fn identifiers_round_trip(addr_bytes in any::<[u8; 20]>(), hash_bytes in any::<[u8; 32]>()) {
        let a = Address::from_bytes(addr_bytes);
        prop_assert_eq!(Address::parse(&a.to_string()).unwrap(), a);
        let h = TxHash::from_bytes(hash_bytes);
        prop_assert_eq!(TxHash::parse(&h.to_string()).unwrap(), h);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Generation is a pure function of the scenario spec.
    #[test]
    fn generation_is_pure(seed in any::<u64>()) {
        let spec = ScenarioSpec {
            seed,
            n_background_accounts: 16,
            n_days: 4,
            daily_tx_rate: 0.4,
            price_range_wei: (WEI_PER_ETH / 1_000, WEI_PER_ETH / 100),
            start_ts: GENESIS_TS,
            plants: vec![PlantSpec {
                id: "h".into(),
                kind: PlantKind::HunterCluster { size: 2, main: 0 },
            }],
        };
        let (d1, t1) = generate(&spec).unwrap();
        let (d2, t2) = generate(&spec).unwrap();
        prop_assert_eq!(d1.transactions, d2.transactions);
        prop_assert_eq!(d1.follows, d2.follows);
        prop_assert_eq!(t1, t2);
    }

    /// Detector output is deterministic and every cited transaction hash
    /// refers to a real transaction.
    #[test]
    fn findings_cite_real_transactions(seed in any::<u64>()) {
        let spec = ScenarioSpec {
            seed,
            n_background_accounts: 24,
            n_days: 5,
            daily_tx_rate: 0.5,
            price_range_wei: (WEI_PER_ETH / 1_000, WEI_PER_ETH / 100),
            start_ts: GENESIS_TS,
            plants: vec![PlantSpec {
                id: "h".into(),
                kind: PlantKind::HunterCluster { size: 3, main: 1 },
            }],
        };
        let (dataset, _) = generate(&spec).unwrap();
        let params = linklens_core::detect::DetectorParams::default();
        let first = linklens_core::detect::detect_bonus_hunters(&dataset, &params);
        let second = linklens_core::detect::detect_bonus_hunters(&dataset, &params);
        prop_assert_eq!(&first, &second);
        let known: BTreeSet<TxHash> = dataset.transactions.iter().map(|tx| tx.tx_hash).collect();
        for finding in &first {
            for h in finding.cited_tx_hashes() {
                prop_assert!(known.contains(&h));
            }
        }
    }
}
