//! Partition trees: the deterministic load-balancing structure behind
//! subgraph listing. A tree of p layers assigns every tree node a partition
//! of V; parts obey two edge-load certificates (Condition 1 against V,
//! Condition 2 against the ancestor chain), which cap what any listing node
//! must learn.
//!
//! Preliminary partitions are indexed by *multisets* of root part indices:
//! a tree chain whose ancestor parts fall twice into the same root part
//! needs the doubled counter budget for its Condition 2 to survive
//! from-scratch recomputation.

use crate::clique::net::{CliqueNet, RouteRequest, C_ROUTE};
use crate::engine::Word;
use crate::error::Fault;
use crate::graph::Graph;
use crate::pattern::SubgraphPattern;
use std::collections::BTreeMap;

/// Counter constants of the two conditions.
pub const C1: f64 = 8.0;
pub const C2: f64 = 32.0;

/// A partition of V into at most x parts; parts are sorted id intervals
/// produced by the greedy scan, kept as explicit vertex lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub parts: Vec<Vec<u32>>,
}

impl Partition {
    pub fn part_of(&self, v: u32) -> usize {
        self.parts
            .iter()
            .position(|p| p.binary_search(&v).is_ok())
            .expect("partition covers V")
    }

    fn covers_exactly(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for part in &self.parts {
            for &v in part {
                if seen[v as usize] {
                    return false;
                }
                seen[v as usize] = true;
            }
        }
        seen.into_iter().all(|b| b)
    }
}

#[derive(Clone, Debug)]
pub struct PartitionTree {
    pub p: usize,
    pub x: usize,
    pub m: usize,
    pub m_tilde: usize,
    pub root: Partition,
    /// Refinements keyed by sorted multisets of root part indices.
    pub refinements: BTreeMap<Vec<usize>, Partition>,
}

impl PartitionTree {
    pub fn threshold1(&self) -> f64 {
        C1 * self.m as f64 / self.x as f64 + self.root_n() as f64
    }

    pub fn threshold2(&self, weight: usize) -> f64 {
        C2 * weight as f64 * self.m_tilde as f64 / (self.x * self.x) as f64 + self.root_n() as f64
    }

    fn root_n(&self) -> usize {
        self.root.parts.iter().map(|p| p.len()).sum()
    }

    /// The partition at tree node `chain` (layer = chain length); the root
    /// partition for the empty chain.
    pub fn partition_for_chain(&self, chain: &[usize]) -> Result<&Partition, Fault> {
        if chain.is_empty() {
            return Ok(&self.root);
        }
        let key = self.chain_key(chain)?;
        self.refinements
            .get(&key)
            .ok_or_else(|| Fault::invariant(format!("missing refinement for multiset {key:?}")))
    }

    /// Ancestor parts U_0 .. U_{i-1} selected by the chain.
    pub fn chain_parts(&self, chain: &[usize]) -> Result<Vec<&Vec<u32>>, Fault> {
        let mut parts = Vec::with_capacity(chain.len());
        for i in 0..chain.len() {
            let partition = self.partition_for_chain(&chain[..i])?;
            let part = partition
                .parts
                .get(chain[i])
                .ok_or_else(|| Fault::invariant(format!("chain {chain:?} out of range at {i}")))?;
            parts.push(part);
        }
        Ok(parts)
    }

    /// Sorted multiset of root part indices containing the chain's parts.
    fn chain_key(&self, chain: &[usize]) -> Result<Vec<usize>, Fault> {
        let parts = self.chain_parts(chain)?;
        let mut key: Vec<usize> = parts.iter().map(|p| self.root.part_of(p[0])).collect();
        key.sort_unstable();
        Ok(key)
    }

    /// Every valid chain of length `len` (tree nodes at that layer).
    pub fn chains(&self, len: usize) -> Result<Vec<Vec<usize>>, Fault> {
        let mut acc = vec![Vec::new()];
        for _ in 0..len {
            let mut next = Vec::new();
            for chain in &acc {
                let parts = self.partition_for_chain(chain)?.parts.len();
                for j in 0..parts {
                    let mut c = chain.clone();
                    c.push(j);
                    next.push(c);
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    pub fn leaves(&self) -> Result<Vec<Vec<usize>>, Fault> {
        self.chains(self.p - 1)
    }

    /// From-scratch recomputation of every certificate on the real graph:
    /// cover/disjointness, part-count bounds, refinement containment,
    /// Condition 1 everywhere, Condition 2 along every tree chain of H.
    pub fn check_certificates(&self, g: &Graph, h: &SubgraphPattern) -> Result<(), Fault> {
        let n = g.n();
        let half_x = (self.x / 2).max(1);
        if self.root.parts.len() > half_x {
            return Err(Fault::invariant(format!(
                "root has {} parts > x/2 = {half_x}",
                self.root.parts.len()
            )));
        }
        if !self.root.covers_exactly(n) {
            return Err(Fault::invariant("root partition does not cover V exactly"));
        }
        for (key, partition) in &self.refinements {
            if partition.parts.len() > self.x {
                return Err(Fault::invariant(format!(
                    "refinement {key:?} has {} parts > x = {}",
                    partition.parts.len(),
                    self.x
                )));
            }
            if !partition.covers_exactly(n) {
                return Err(Fault::invariant(format!(
                    "refinement {key:?} does not cover V"
                )));
            }
            for part in &partition.parts {
                let root_idx = self.root.part_of(part[0]);
                if !part
                    .iter()
                    .all(|&v| self.root.parts[root_idx].binary_search(&v).is_ok())
                {
                    return Err(Fault::invariant(format!(
                        "refinement {key:?} has a part crossing root boundaries"
                    )));
                }
            }
        }

        // Condition 1 for every part of every partition in the tree.
        let cond1 = |part: &Vec<u32>| -> u64 { part.iter().map(|&v| g.degree(v) as u64).sum() };
        let t1 = self.threshold1();
        for partition in std::iter::once(&self.root).chain(self.refinements.values()) {
            for part in &partition.parts {
                let e_uv = edges_to_all(g, part);
                if (e_uv as f64) > t1 || (cond1(part) as f64) > t1 {
                    return Err(Fault::invariant(format!(
                        "condition 1 violated: |E(U,V)| = {e_uv} > {t1}"
                    )));
                }
            }
        }

        // Condition 2 along every chain, per the pattern's back edges.
        let d = h.back_degrees();
        for layer in 1..self.p {
            for chain in self.chains(layer + 1)? {
                let parts = self.chain_parts(&chain)?;
                let u_i = parts[layer];
                let mut sum = 0u64;
                for t in h.back_edges(layer) {
                    sum += edges_between(g, u_i, parts[t]);
                }
                let t2 = self.threshold2(d[layer]);
                if (sum as f64) > t2 {
                    return Err(Fault::invariant(format!(
                        "condition 2 violated at chain {chain:?}: {sum} > {t2}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// |E(U, V)|: edges with at least one endpoint in U.
pub fn edges_to_all(g: &Graph, part: &[u32]) -> u64 {
    let mut in_part = vec![false; g.n()];
    for &v in part {
        in_part[v as usize] = true;
    }
    let mut count = 0u64;
    for (u, v) in g.edges() {
        if in_part[u as usize] || in_part[v as usize] {
            count += 1;
        }
    }
    count
}

/// |E(A, B)| with double counting inside the intersection, matching the
/// paper's E(A,B) as ordered pairs restricted to u < v normalization: an
/// edge counts once if it meets both sides.
pub fn edges_between(g: &Graph, a: &[u32], b: &[u32]) -> u64 {
    let mut in_a = vec![false; g.n()];
    let mut in_b = vec![false; g.n()];
    for &v in a {
        in_a[v as usize] = true;
    }
    for &v in b {
        in_b[v as usize] = true;
    }
    let mut count = 0u64;
    for (u, v) in g.edges() {
        let (u, v) = (u as usize, v as usize);
        if (in_a[u] && in_b[v]) || (in_a[v] && in_b[u]) {
            count += 1;
        }
    }
    count
}

/// x = round(n^{1/p}), at least 2.
pub fn branching(n: usize, p: usize) -> usize {
    (((n as f64).ln() / p as f64).exp().round() as usize).max(2)
}

/// Greedy scan in ascending id order: close a part when adding the next
/// vertex would push the counter past its threshold.
fn greedy_scan(n: usize, w: &[f64], threshold: f64) -> Vec<Vec<u32>> {
    let mut parts: Vec<Vec<u32>> = Vec::new();
    let mut cur: Vec<u32> = Vec::new();
    let mut acc = 0.0f64;
    for v in 0..n as u32 {
        if !cur.is_empty() && acc + w[v as usize] > threshold {
            parts.push(std::mem::take(&mut cur));
            acc = 0.0;
        }
        cur.push(v);
        acc += w[v as usize];
    }
    if !cur.is_empty() {
        parts.push(cur);
    }
    parts
}

/// Two-counter variant used for refinements.
fn greedy_scan2(n: usize, w1: &[f64], t1: f64, w2: &[f64], t2: f64) -> Vec<Vec<u32>> {
    let mut parts: Vec<Vec<u32>> = Vec::new();
    let mut cur: Vec<u32> = Vec::new();
    let (mut a1, mut a2) = (0.0f64, 0.0f64);
    for v in 0..n as u32 {
        let i = v as usize;
        if !cur.is_empty() && (a1 + w1[i] > t1 || a2 + w2[i] > t2) {
            parts.push(std::mem::take(&mut cur));
            a1 = 0.0;
            a2 = 0.0;
        }
        cur.push(v);
        a1 += w1[i];
        a2 += w2[i];
    }
    if !cur.is_empty() {
        parts.push(cur);
    }
    parts
}

/// Splits a scanned partition at root part boundaries, preserving order.
fn refine_against(parts: Vec<Vec<u32>>, root: &Partition) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for part in parts {
        let mut cur: Vec<u32> = Vec::new();
        let mut cur_root = usize::MAX;
        for v in part {
            let r = root.part_of(v);
            if r != cur_root && !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            cur_root = r;
            cur.push(v);
        }
        if !cur.is_empty() {
            out.push(cur);
        }
    }
    out
}

/// Multisets of size 1..=cap over {0..r-1}, sorted ascending, lex order.
fn multisets(r: usize, cap: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(r: usize, cap: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == cap {
            return;
        }
        for i in start..r {
            cur.push(i);
            rec(r, cap, i, cur, out);
            cur.pop();
        }
    }
    rec(r, cap, 0, &mut cur, &mut out);
    out.sort();
    out
}

/// Builds the H-partition tree: degrees are broadcast (everyone replays the
/// root partition), per-multiset counter data is routed to builder blocks,
/// and each builder announces its part boundaries, after which every node
/// assembles the identical tree locally.
pub fn build_partition_tree(
    g: &Graph,
    h: &SubgraphPattern,
    net: &mut CliqueNet,
) -> Result<PartitionTree, Fault> {
    let n = g.n();
    let p = h.p();
    if p < 2 {
        return Err(Fault::precondition("pattern needs at least 2 nodes"));
    }
    let x = branching(n, p);
    let degs: Vec<Word> = (0..n as u32)
        .map(|v| Word::new(&[g.degree(v) as u64]))
        .collect();
    let known = net.broadcast_all(&degs)?;
    let m = (known.iter().map(|w| w.get(0)).sum::<u64>() / 2) as usize;
    let m_tilde = m.max(n * x);

    let t1 = C1 * m as f64 / x as f64 + n as f64;
    let deg_w: Vec<f64> = (0..n as u32).map(|v| g.degree(v) as f64).collect();
    let root = Partition {
        parts: greedy_scan(n, &deg_w, t1),
    };
    let r = root.parts.len();

    let keys = multisets(r, p - 1);
    if keys.len() > n {
        return Err(Fault::OutsideRegime(format!(
            "{} preliminary partitions exceed n = {n}",
            keys.len()
        )));
    }

    // Builder blocks: multiset rank -> x contiguous node ids, wrapping
    // modulo n when the blocks overflow tiny instances.
    let builders_of =
        |rank: usize| -> Vec<u32> { (0..x).map(|j| ((rank * x + j) % n) as u32).collect() };
    let mut served = vec![0u64; n];
    for rank in 0..keys.len() {
        for b in builders_of(rank) {
            served[b as usize] += 1;
        }
    }
    let max_served = served.iter().copied().max().unwrap_or(1).max(1);

    // Per-vertex degree into each root part, computed once from local edges
    // plus the broadcast root partition.
    let root_of: Vec<usize> = {
        let mut t = vec![0usize; n];
        for (q, part) in root.parts.iter().enumerate() {
            for &v in part {
                t[v as usize] = q;
            }
        }
        t
    };
    let mut deg_to_root = vec![vec![0u32; r]; n];
    for v in 0..n as u32 {
        for &u in g.neighbors(v) {
            deg_to_root[v as usize][root_of[u as usize]] += 1;
        }
    }

    // Each node routes (deg, weighted root-part degree sum) to the builders
    // of every multiset.
    let mut requests = Vec::new();
    for (rank, key) in keys.iter().enumerate() {
        for v in 0..n as u32 {
            let w2: u64 = key.iter().map(|&q| deg_to_root[v as usize][q] as u64).sum();
            for b in builders_of(rank) {
                requests.push(RouteRequest {
                    source: v,
                    target: b,
                    word: Word::new(&[rank as u64, g.degree(v) as u64, w2]),
                });
            }
        }
    }
    net.route_load_balanced(requests, n as u64 * max_served, n as u64)?;

    // Builder replay (identical at every builder of a block): greedy scan
    // under both counters, then the refinement split.
    let mut refinements = BTreeMap::new();
    let mut boundary_words: Vec<(u32, Vec<Word>)> = Vec::new();
    let deg1: Vec<f64> = (0..n as u32).map(|v| g.degree(v) as f64).collect();
    for (rank, key) in keys.iter().enumerate() {
        let t2 = C2 * key.len() as f64 * m_tilde as f64 / (x * x) as f64 + n as f64;
        let w2: Vec<f64> = (0..n)
            .map(|v| key.iter().map(|&q| deg_to_root[v][q] as f64).sum())
            .collect();
        let scanned = greedy_scan2(n, &deg1, t1, &w2, t2);
        let parts = refine_against(scanned, &root);
        if parts.len() > x {
            return Err(Fault::invariant(format!(
                "refinement {key:?} produced {} parts > x = {x}",
                parts.len()
            )));
        }
        // Part j's boundary is announced by builder j of the block: one
        // word (rank, first, last) each, all blocks concurrently.
        let builders = builders_of(rank);
        for (j, part) in parts.iter().enumerate() {
            boundary_words.push((
                builders[j % builders.len()],
                vec![Word::new(&[
                    rank as u64,
                    part[0] as u64,
                    *part.last().unwrap() as u64,
                ])],
            ));
        }
        refinements.insert(key.clone(), Partition { parts });
    }
    net.broadcast_concurrent(&boundary_words)?;

    let tree = PartitionTree {
        p,
        x,
        m,
        m_tilde,
        root,
        refinements,
    };
    // The leaf bound is what listing relies on.
    let leaves = tree.leaves()?;
    if leaves.len() * x > n.max(x) && leaves.len() > n / x {
        return Err(Fault::OutsideRegime(format!(
            "{} leaves exceed n/x = {}",
            leaves.len(),
            n / x
        )));
    }
    Ok(tree)
}

/// Listing charge constant: total charged rounds of build + list stay below
/// C_LIST * (k * m_tilde / n^{1+2/p} + p).
pub const C_LIST: u64 = 12 * (C_ROUTE + 1);
