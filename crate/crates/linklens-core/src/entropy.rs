//! Structural entropy of component-size distributions, and the time-bucketed
//! erosion series built on top of it.
//!
//! For a partition of `N` nodes into components of sizes `c_1..c_k`, the
//! structural entropy is `H = −Σ (c_i/N)·ln(c_i/N)` (natural log). The
//! equivalent incremental form `H = ln N − S/N` with `S = Σ c_i·ln c_i`
//! supports O(1) updates: a merge of components sized `a` and `b` adds
//! `(a+b)·ln(a+b) − a·ln a − b·ln b` to `S`, and an isolated node adds
//! nothing (`1·ln 1 = 0`). All accumulations are compensated (Kahan) so the
//! incremental and batch paths agree to ~1e-12 even over long histories.
//!
//! [`entropy_series`] replays transactions in fixed-length time buckets and
//! reports per-bucket entropy loss. Two node conventions are offered:
//!
//! * **post** (default) — `h_before` counts accounts first appearing in the
//!   current bucket as isolated singletons, so `loss` isolates the effect of
//!   linking and is always non-negative;
//! * **pre** — `h_before` is the state at the bucket boundary, so the series
//!   telescopes: cumulative loss equals `−H(final)` regardless of bucket
//!   length.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{tarjan_scc, EdgeFilter, PartitionMode, UnionFind};
use crate::ingest::Dataset;
use crate::model::{Address, Layer};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EntropyError {
    #[error("bucket length must be positive, got {0}")]
    BadBucket(i64),
}

/// Compensated (Kahan) accumulator.
#[derive(Clone, Copy, Debug, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// `c·ln c`, with the `c ∈ {0, 1}` cases pinned to exactly zero.
fn xlnx(c: u64) -> f64 {
    if c <= 1 {
        0.0
    } else {
        let x = c as f64;
        x * x.ln()
    }
}

/// Component-size distribution, sizes descending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbabilityVector {
    pub sizes: Vec<u64>,
    pub total: u64,
}

impl ProbabilityVector {
    pub fn from_sizes(mut sizes: Vec<u64>) -> Self {
        sizes.retain(|&c| c > 0);
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let total = sizes.iter().sum();
        ProbabilityVector { sizes, total }
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        let total = self.total as f64;
        self.sizes.iter().map(move |&c| c as f64 / total)
    }
}

/// Entropy of one partition snapshot.
#[derive(Clone, Debug, Serialize)]
pub struct EntropyReport {
    pub h: f64,
    pub n_components: usize,
    pub n_nodes: u64,
    pub vector: ProbabilityVector,
    /// True when the node set is empty, in which case `h` is pinned to zero.
    pub degenerate: bool,
}

/// Batch structural entropy of a component-size multiset.
pub fn structural_entropy(sizes: &[u64]) -> EntropyReport {
    let vector = ProbabilityVector::from_sizes(sizes.to_vec());
    let n = vector.total;
    if n == 0 {
        return EntropyReport {
            h: 0.0,
            n_components: 0,
            n_nodes: 0,
            vector,
            degenerate: true,
        };
    }
    let total = n as f64;
    let mut acc = Kahan::default();
    for &c in &vector.sizes {
        let p = c as f64 / total;
        acc.add(-(p * p.ln()));
    }
    // H is mathematically non-negative; clear rounding dust like -0.0.
    let h = acc.value().max(0.0);
    EntropyReport {
        h,
        n_components: vector.sizes.len(),
        n_nodes: n,
        vector,
        degenerate: false,
    }
}

/// Signed entropy drop from one snapshot to the next (positive = erosion).
pub fn entropy_loss(h_before: f64, h_after: f64) -> f64 {
    h_before - h_after
}

/// O(1)-update entropy state over a growing, merging partition.
#[derive(Clone, Debug, Default)]
pub struct IncrementalEntropy {
    n: u64,
    components: u64,
    s: Kahan,
}

impl IncrementalEntropy {
    pub fn new() -> Self {
        Self::default()
    }

    /// Seed from an existing size multiset.
    pub fn from_sizes(sizes: &[u64]) -> Self {
        let mut state = Self::new();
        for &c in sizes {
            if c == 0 {
                continue;
            }
            state.n += c;
            state.components += 1;
            state.s.add(xlnx(c));
        }
        state
    }

    pub fn n_nodes(&self) -> u64 {
        self.n
    }

    pub fn component_count(&self) -> u64 {
        self.components
    }

    /// Register one new singleton component.
    pub fn add_isolated_node(&mut self) {
        self.n += 1;
        self.components += 1;
        // 1·ln 1 contributes nothing to S.
    }

    /// Register the merge of two components with the given sizes.
    pub fn merge(&mut self, a: u64, b: u64) {
        debug_assert!(a > 0 && b > 0);
        self.s.add(xlnx(a + b));
        self.s.add(-xlnx(a));
        self.s.add(-xlnx(b));
        self.components -= 1;
    }

    /// Current entropy, `ln N − S/N`; zero on the empty partition.
    pub fn h(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let n = self.n as f64;
        (n.ln() - self.s.value() / n).max(0.0)
    }
}

/// Which accounts count toward `h_before` in a series bucket.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeConvention {
    /// Node set frozen at the bucket boundary; the series telescopes.
    Pre,
    /// Arrivals in the current bucket count as isolated singletons first,
    /// so per-bucket loss isolates linking and is non-negative.
    #[default]
    Post,
}

impl NodeConvention {
    pub fn label(&self) -> &'static str {
        match self {
            NodeConvention::Pre => "pre",
            NodeConvention::Post => "post",
        }
    }
}

/// One bucket of the erosion series.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SeriesPoint {
    pub bucket_index: u64,
    pub bucket_start_ts: i64,
    pub h_before: f64,
    pub h_after: f64,
    pub loss: f64,
    pub cumulative_loss: f64,
    pub new_users: u64,
}

/// Bucketed entropy-erosion series.
#[derive(Clone, Debug, Serialize)]
pub struct EntropySeries {
    pub bucket_seconds: i64,
    pub mode: PartitionMode,
    pub convention: NodeConvention,
    pub points: Vec<SeriesPoint>,
}

impl EntropySeries {
    pub fn total_loss(&self) -> f64 {
        self.points.last().map(|p| p.cumulative_loss).unwrap_or(0.0)
    }

    /// Final-state entropy (the `h_after` of the last bucket).
    pub fn final_entropy(&self) -> f64 {
        self.points.last().map(|p| p.h_after).unwrap_or(0.0)
    }

    /// CSV dump: one row per bucket, floats in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "bucket_index,bucket_start_ts,h_before,h_after,loss,cumulative_loss,new_users"
        )?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                p.bucket_index,
                p.bucket_start_ts,
                p.h_before,
                p.h_after,
                p.loss,
                p.cumulative_loss,
                p.new_users
            )?;
        }
        Ok(())
    }
}

/// Replay the dataset's successful transactions in time buckets and report
/// per-bucket entropy loss.
///
/// Only transaction edges participate (follow edges carry no timestamp and
/// are ignored here regardless of `filter.follows`). Accounts enter the node
/// universe at their first selected transaction. Buckets are aligned to the
/// first transaction's timestamp and cover the span contiguously, including
/// empty buckets.
pub fn entropy_series(
    dataset: &Dataset,
    filter: &EdgeFilter,
    bucket_seconds: i64,
    mode: PartitionMode,
    convention: NodeConvention,
) -> Result<EntropySeries, EntropyError> {
    if bucket_seconds <= 0 {
        return Err(EntropyError::BadBucket(bucket_seconds));
    }

    // Selected edges in time order. The dataset is already (block, hash)
    // sorted, so a stable sort by timestamp keeps that as the tie order.
    let mut picked: Vec<(i64, (Address, Layer), (Address, Layer))> = dataset
        .transactions
        .iter()
        .filter(|tx| tx.is_ok() && filter.includes_method(&tx.method))
        .map(|tx| (tx.timestamp, (tx.from, tx.layer), (tx.to, tx.layer)))
        .collect();
    picked.sort_by_key(|&(ts, _, _)| ts);

    let mut series = EntropySeries {
        bucket_seconds,
        mode,
        convention,
        points: Vec::new(),
    };
    let Some(&(t0, _, _)) = picked.first() else {
        return Ok(series);
    };
    let t_last = picked.last().map(|&(ts, _, _)| ts).unwrap_or(t0);
    let n_buckets = ((t_last - t0) / bucket_seconds) as u64 + 1;

    // Intern nodes in first-appearance order and index edges by bucket.
    let mut ids: std::collections::HashMap<(Address, Layer), u32> =
        std::collections::HashMap::new();
    let mut node_first_bucket: Vec<u64> = Vec::new();
    let mut edges: Vec<(u64, u32, u32)> = Vec::with_capacity(picked.len());
    for (ts, from_key, to_key) in picked {
        let bucket = ((ts - t0) / bucket_seconds) as u64;
        let mut intern = |key: (Address, Layer)| -> u32 {
            *ids.entry(key).or_insert_with(|| {
                node_first_bucket.push(bucket);
                (node_first_bucket.len() - 1) as u32
            })
        };
        let from = intern(from_key);
        let to = intern(to_key);
        edges.push((bucket, from, to));
    }

    let mut arrivals_per_bucket = vec![0u64; n_buckets as usize];
    for &b in &node_first_bucket {
        arrivals_per_bucket[b as usize] += 1;
    }

    let mut cumulative = Kahan::default();
    match mode {
        PartitionMode::Weak => {
            let mut uf = UnionFind::new(0);
            let mut inc = IncrementalEntropy::new();
            let mut edge_cursor = 0usize;
            let mut node_cursor = 0usize;
            for bucket in 0..n_buckets {
                let pre_h = inc.h();
                // Admit this bucket's arrivals as singletons.
                while node_cursor < node_first_bucket.len()
                    && node_first_bucket[node_cursor] == bucket
                {
                    uf.push_node();
                    inc.add_isolated_node();
                    node_cursor += 1;
                }
                let h_before = match convention {
                    NodeConvention::Pre => pre_h,
                    NodeConvention::Post => inc.h(),
                };
                while edge_cursor < edges.len() && edges[edge_cursor].0 == bucket {
                    let (_, from, to) = edges[edge_cursor];
                    edge_cursor += 1;
                    let ra = uf.find(from);
                    let rb = uf.find(to);
                    if ra != rb {
                        let sa = uf.size_of_root(ra);
                        let sb = uf.size_of_root(rb);
                        uf.union(from, to);
                        inc.merge(sa, sb);
                    }
                }
                let h_after = inc.h();
                let loss = entropy_loss(h_before, h_after);
                cumulative.add(loss);
                series.points.push(SeriesPoint {
                    bucket_index: bucket,
                    bucket_start_ts: t0 + bucket as i64 * bucket_seconds,
                    h_before,
                    h_after,
                    loss,
                    cumulative_loss: cumulative.value(),
                    new_users: arrivals_per_bucket[bucket as usize],
                });
            }
        }
        PartitionMode::Strong => {
            // Batch per bucket: nodes are prefix ranges in appearance order,
            // so a snapshot is (node prefix, edge prefix) fed to Tarjan.
            let scc_entropy = |node_count: usize, edge_prefix: usize| -> f64 {
                if node_count == 0 {
                    return 0.0;
                }
                let mut adj: Vec<Vec<u32>> = vec![Vec::new(); node_count];
                for &(_, from, to) in &edges[..edge_prefix] {
                    adj[from as usize].push(to);
                }
                let (_, sizes) = tarjan_scc(&adj);
                structural_entropy(&sizes).h
            };
            let mut nodes_before = 0usize;
            let mut edges_before = 0usize;
            for bucket in 0..n_buckets {
                let nodes_through = nodes_before + arrivals_per_bucket[bucket as usize] as usize;
                let edges_through = edges_before
                    + edges[edges_before..]
                        .iter()
                        .take_while(|&&(b, _, _)| b == bucket)
                        .count();
                let h_before = match convention {
                    NodeConvention::Pre => scc_entropy(nodes_before, edges_before),
                    NodeConvention::Post => scc_entropy(nodes_through, edges_before),
                };
                let h_after = scc_entropy(nodes_through, edges_through);
                let loss = entropy_loss(h_before, h_after);
                cumulative.add(loss);
                series.points.push(SeriesPoint {
                    bucket_index: bucket,
                    bucket_start_ts: t0 + bucket as i64 * bucket_seconds,
                    h_before,
                    h_after,
                    loss,
                    cumulative_loss: cumulative.value(),
                    new_users: arrivals_per_bucket[bucket as usize],
                });
                nodes_before = nodes_through;
                edges_before = edges_through;
            }
        }
    }
    Ok(series)
}

/// Least-squares line and Pearson correlation between two equal-length
/// observation vectors.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub r: f64,
    /// False when either input has zero variance (or fewer than two points),
    /// in which case `r` is reported as zero rather than NaN.
    pub r_defined: bool,
    pub n: usize,
}

/// Fit `ys ≈ slope·xs + intercept` and report the correlation coefficient.
pub fn growth_correlation(xs: &[f64], ys: &[f64]) -> GrowthFit {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return GrowthFit {
            slope: 0.0,
            intercept: 0.0,
            r: 0.0,
            r_defined: false,
            n,
        };
    }
    let mean = |vals: &[f64]| -> f64 {
        let mut acc = Kahan::default();
        for &v in vals.iter().take(n) {
            acc.add(v);
        }
        acc.value() / n as f64
    };
    let mx = mean(xs);
    let my = mean(ys);
    let (mut sxx, mut syy, mut sxy) = (Kahan::default(), Kahan::default(), Kahan::default());
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx.add(dx * dx);
        syy.add(dy * dy);
        sxy.add(dx * dy);
    }
    let (sxx, syy, sxy) = (sxx.value(), syy.value(), sxy.value());
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    if sxx > 0.0 && syy > 0.0 {
        GrowthFit {
            slope,
            intercept,
            r: (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0),
            r_defined: true,
            n,
        }
    } else {
        GrowthFit {
            slope,
            intercept,
            r: 0.0,
            r_defined: false,
            n,
        }
    }
}

/// Correlate per-bucket arrivals against per-bucket entropy loss.
pub fn series_growth_fit(series: &EntropySeries) -> GrowthFit {
    let xs: Vec<f64> = series.points.iter().map(|p| p.new_users as f64).collect();
    let ys: Vec<f64> = series.points.iter().map(|p| p.loss).collect();
    growth_correlation(&xs, &ys)
}
