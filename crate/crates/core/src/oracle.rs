//! Brute-force sequential oracles: exact girth, hop-neighborhoods, subgraph
//! enumeration, and degenerate-node pruning. Protocols are correct exactly
//! when they agree with these.

use crate::error::Fault;
use crate::graph::Graph;
use crate::pattern::{Instance, SubgraphPattern};
use crate::witness::CycleWitness;
use std::collections::{BTreeSet, HashMap, VecDeque};

/// Exact girth; `Infinite` iff the graph is a forest. Kept as a distinct
/// variant so a forest can never be confused with a large finite girth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Girth {
    Finite(usize),
    Infinite,
}

impl Girth {
    pub fn finite(self) -> Option<usize> {
        match self {
            Girth::Finite(g) => Some(g),
            Girth::Infinite => None,
        }
    }
}

impl std::fmt::Display for Girth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => write!(f, "inf"),
        }
    }
}

/// Exact girth by one BFS per start vertex: every non-tree edge (x, y) seen
/// from root v yields a closed walk of length dist(x) + dist(y) + 1, which
/// always contains a cycle that short, and for v on a shortest cycle the
/// walk realizes the girth exactly.
pub fn brute_girth(g: &Graph) -> Girth {
    match brute_girth_witness(g) {
        Some(w) => Girth::Finite(w.len()),
        None => Girth::Infinite,
    }
}

/// Exact girth together with a simple shortest cycle, if any.
pub fn brute_girth_witness(g: &Graph) -> Option<CycleWitness> {
    shortest_cycle_below(g, usize::MAX)
}

/// Shortest cycle strictly shorter than `cap`; None when no such cycle
/// exists. `cap = usize::MAX` computes the exact girth.
pub fn shortest_cycle_below(g: &Graph, cap: usize) -> Option<CycleWitness> {
    let n = g.n();
    let mut best: Option<(usize, u32, u32, u32)> = None; // (len, root, x, y)
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![u32::MAX; n];
    for root in 0..n as u32 {
        if g.degree(root) < 2 {
            continue;
        }
        for d in dist.iter_mut() {
            *d = usize::MAX;
        }
        dist[root as usize] = 0;
        parent[root as usize] = u32::MAX;
        let mut q = VecDeque::new();
        q.push_back(root);
        let bound = best.map_or(cap, |(l, ..)| l.min(cap));
        while let Some(x) = q.pop_front() {
            // Nothing beyond half the bound can improve on it.
            if bound != usize::MAX && dist[x as usize] * 2 >= bound {
                break;
            }
            for &y in g.neighbors(x) {
                if dist[y as usize] == usize::MAX {
                    dist[y as usize] = dist[x as usize] + 1;
                    parent[y as usize] = x;
                    q.push_back(y);
                } else if parent[x as usize] != y {
                    let len = dist[x as usize] + dist[y as usize] + 1;
                    if len < best.map_or(cap, |(l, ..)| l.min(cap)) {
                        best = Some((len, root, x, y));
                    }
                }
            }
        }
    }
    let (len, root, x, y) = best?;
    // Re-run BFS from the winning root to rebuild the two tree paths. For the
    // globally shortest candidate the paths are disjoint except at the root.
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![u32::MAX; n];
    dist[root as usize] = 0;
    let mut q = VecDeque::new();
    q.push_back(root);
    while let Some(u) = q.pop_front() {
        for &v in g.neighbors(u) {
            if dist[v as usize] == usize::MAX {
                dist[v as usize] = dist[u as usize] + 1;
                parent[v as usize] = u;
                q.push_back(v);
            }
        }
    }
    let path_to_root = |mut v: u32| -> Vec<u32> {
        let mut p = vec![v];
        while v != root {
            v = parent[v as usize];
            p.push(v);
        }
        p
    };
    let px = path_to_root(x); // x .. root
    let py = path_to_root(y); // y .. root
    let mut cycle: Vec<u32> = px.iter().rev().copied().collect(); // root .. x
    cycle.extend(py.iter().take(py.len() - 1)); // y .. (excl root)
    debug_assert_eq!(cycle.len(), len);
    Some(CycleWitness::new(cycle))
}

/// The graph N_i(v): all nodes of hop-distance at most `i` from `v`, plus
/// exactly the edges incident to nodes of hop-distance at most `i - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Neighborhood {
    pub center: u32,
    pub radius: usize,
    /// Hop distance of every member vertex.
    pub dist: HashMap<u32, usize>,
    /// Member edges, normalized (u < v).
    pub edges: BTreeSet<(u32, u32)>,
}

impl Neighborhood {
    pub fn vertex_count(&self) -> usize {
        self.dist.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertices at hop distance exactly `radius` (the front line).
    pub fn front_line(&self) -> Vec<u32> {
        let mut f: Vec<u32> = self
            .dist
            .iter()
            .filter(|&(_, &d)| d == self.radius)
            .map(|(&v, _)| v)
            .collect();
        f.sort_unstable();
        f
    }

    /// A connected neighborhood is a tree iff #edges = #vertices - 1.
    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.dist.len()
    }

    /// Restriction to a smaller radius (per the same definition).
    pub fn restrict(&self, radius: usize) -> Neighborhood {
        assert!(radius <= self.radius);
        let dist: HashMap<u32, usize> = self
            .dist
            .iter()
            .filter(|&(_, &d)| d <= radius)
            .map(|(&v, &d)| (v, d))
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| {
                let da = self.dist.get(&a).copied().unwrap_or(usize::MAX);
                let db = self.dist.get(&b).copied().unwrap_or(usize::MAX);
                da < radius || db < radius
            })
            .copied()
            .collect();
        Neighborhood {
            center: self.center,
            radius,
            dist,
            edges,
        }
    }
}

/// Oracle for N_i(v) by BFS expansion.
pub fn neighborhood(g: &Graph, v: u32, radius: usize) -> Neighborhood {
    assert!((v as usize) < g.n(), "vertex out of range");
    let mut dist = HashMap::new();
    dist.insert(v, 0usize);
    let mut q = VecDeque::new();
    q.push_back(v);
    while let Some(u) = q.pop_front() {
        let du = dist[&u];
        if du == radius {
            continue;
        }
        for &w in g.neighbors(u) {
            dist.entry(w).or_insert_with(|| {
                q.push_back(w);
                du + 1
            });
        }
    }
    let mut edges = BTreeSet::new();
    for (&u, &du) in &dist {
        if du + 1 > radius {
            continue;
        }
        for &w in g.neighbors(u) {
            edges.insert((u.min(w), u.max(w)));
        }
    }
    Neighborhood {
        center: v,
        radius,
        dist,
        edges,
    }
}

/// Iteratively removes degree < 2 vertices to a fixpoint. Removed vertices
/// stay in place as isolated ids, so vertex numbering is stable; the girth
/// is unchanged because a peeled vertex lies on no cycle.
pub fn prune_degenerate(g: &Graph) -> Graph {
    let survivors = degenerate_survivors(&g.vertices().map(|v| g.degree(v)).collect::<Vec<_>>(), g);
    let mut out = Graph::empty(g.n());
    for u in 0..g.n() as u32 {
        if !survivors[u as usize] {
            continue;
        }
        for &v in g.neighbors(u) {
            if u < v && survivors[v as usize] {
                out.add_edge(u, v);
            }
        }
    }
    out
}

fn degenerate_survivors(degrees: &[usize], g: &Graph) -> Vec<bool> {
    let n = g.n();
    let mut deg = degrees.to_vec();
    let mut alive = vec![true; n];
    let mut q: VecDeque<u32> = (0..n as u32).filter(|&v| deg[v as usize] < 2).collect();
    while let Some(v) = q.pop_front() {
        if !alive[v as usize] {
            continue;
        }
        alive[v as usize] = false;
        for &u in g.neighbors(v) {
            if alive[u as usize] {
                deg[u as usize] -= 1;
                if deg[u as usize] < 2 {
                    q.push_back(u);
                }
            }
        }
    }
    alive
}

/// Maximum pattern size the enumeration oracle accepts.
pub const ORACLE_PATTERN_CAP: usize = 10;

/// Backtracking enumeration of all (not necessarily induced) H-copies in g,
/// canonicalized by image edge set so automorphic duplicates collapse.
pub fn enumerate_subgraph(g: &Graph, h: &SubgraphPattern) -> Result<BTreeSet<Instance>, Fault> {
    if h.p() > ORACLE_PATTERN_CAP {
        return Err(Fault::precondition(format!(
            "pattern has {} nodes, oracle cap is {ORACLE_PATTERN_CAP}",
            h.p()
        )));
    }
    let mut out = BTreeSet::new();
    let mut mapping = vec![u32::MAX; h.p()];
    let mut used = vec![false; g.n()];
    backtrack(g, h, 0, &mut mapping, &mut used, &mut out);
    Ok(out)
}

fn backtrack(
    g: &Graph,
    h: &SubgraphPattern,
    i: usize,
    mapping: &mut Vec<u32>,
    used: &mut Vec<bool>,
    out: &mut BTreeSet<Instance>,
) {
    if i == h.p() {
        out.insert(Instance::from_mapping(h, mapping));
        return;
    }
    let back = h.back_edges(i);
    // Candidates: neighbors of an already-placed back-edge endpoint when one
    // exists, otherwise all vertices.
    let candidates: Vec<u32> = match back.first() {
        Some(&t) => g.neighbors(mapping[t]).to_vec(),
        None => (0..g.n() as u32).collect(),
    };
    'cand: for c in candidates {
        if used[c as usize] {
            continue;
        }
        for &t in &back {
            if !g.has_edge(c, mapping[t]) {
                continue 'cand;
            }
        }
        mapping[i] = c;
        used[c as usize] = true;
        backtrack(g, h, i + 1, mapping, used, out);
        used[c as usize] = false;
        mapping[i] = u32::MAX;
    }
}

/// Convenience: number of distinct H-copies.
pub fn count_subgraph(g: &Graph, h: &SubgraphPattern) -> Result<usize, Fault> {
    Ok(enumerate_subgraph(g, h)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    /// Independent shortest-cycle oracle: DFS over simple paths up to a
    /// length cap. Exponential, only for cross-checking small cases.
    fn shortest_cycle_exhaustive(g: &Graph, cap: usize) -> Option<usize> {
        fn dfs(
            g: &Graph,
            start: u32,
            v: u32,
            depth: usize,
            cap: usize,
            on_path: &mut Vec<bool>,
            best: &mut Option<usize>,
        ) {
            if depth >= cap {
                return;
            }
            for &w in g.neighbors(v) {
                if w == start && depth >= 3 {
                    *best = Some(best.map_or(depth, |b: usize| b.min(depth)));
                } else if w > start && !on_path[w as usize] {
                    on_path[w as usize] = true;
                    dfs(g, start, w, depth + 1, cap, on_path, best);
                    on_path[w as usize] = false;
                }
            }
        }
        let mut best = None;
        for start in 0..g.n() as u32 {
            let mut on_path = vec![false; g.n()];
            on_path[start as usize] = true;
            // Count edges: a path of e edges closing to start is an e+1 cycle.
            fn dfs2(
                g: &Graph,
                start: u32,
                v: u32,
                edges: usize,
                cap: usize,
                on_path: &mut Vec<bool>,
                best: &mut Option<usize>,
            ) {
                for &w in g.neighbors(v) {
                    if w == start && edges + 1 >= 3 {
                        let len = edges + 1;
                        if len <= cap {
                            *best = Some(best.map_or(len, |b: usize| b.min(len)));
                        }
                    } else if w > start && !on_path[w as usize] && edges + 1 < cap {
                        on_path[w as usize] = true;
                        dfs2(g, start, w, edges + 1, cap, on_path, best);
                        on_path[w as usize] = false;
                    }
                }
            }
            let _ = dfs;
            dfs2(g, start, start, 0, cap, &mut on_path, &mut best);
        }
        best
    }

    #[test]
    fn girth_basics() {
        assert_eq!(brute_girth(&gen::cycle_graph(5)), Girth::Finite(5));
        assert_eq!(brute_girth(&gen::complete_graph(4)), Girth::Finite(3));
        assert_eq!(brute_girth(&gen::path_graph(6)), Girth::Infinite);
    }

    #[test]
    fn girth_petersen_vs_exhaustive() {
        let g = gen::petersen();
        assert_eq!(shortest_cycle_exhaustive(&g, 5), Some(5));
        assert_eq!(brute_girth(&g), Girth::Finite(5));
    }

    #[test]
    fn girth_matches_exhaustive_on_random_graphs() {
        for seed in 0..60 {
            let g = gen::gen_random(14, 0.18, seed);
            let expect = shortest_cycle_exhaustive(&g, 14);
            let got = brute_girth(&g).finite();
            assert_eq!(got, expect, "seed {seed}");
        }
    }

    #[test]
    fn girth_witness_validates() {
        for seed in 0..40 {
            let g = gen::gen_random(24, 0.12, seed);
            if let Some(w) = brute_girth_witness(&g) {
                assert!(crate::witness::validate_witness(&g, &w, w.len()));
            }
        }
    }

    #[test]
    fn planted_cycle_on_c5_gives_girth_3() {
        let (g, _) = gen::plant_cycle(&gen::cycle_graph(5), 3, 11).unwrap();
        assert_eq!(brute_girth(&g), Girth::Finite(3));
    }

    #[test]
    fn neighborhood_c6() {
        let nb = neighborhood(&gen::cycle_graph(6), 0, 1);
        let verts: BTreeSet<u32> = nb.dist.keys().copied().collect();
        assert_eq!(verts, BTreeSet::from([0, 1, 5]));
        assert_eq!(nb.edges, BTreeSet::from([(0, 1), (0, 5)]));
        assert!(nb.is_tree());
    }

    #[test]
    fn neighborhood_star_center() {
        let g = gen::star_graph(4);
        let nb = neighborhood(&g, 0, 1);
        assert_eq!(nb.vertex_count(), 5);
        assert_eq!(nb.edge_count(), 4);
    }

    #[test]
    fn neighborhood_petersen_radius2() {
        // All 10 vertices are within 2 hops; edges incident to distance <= 1
        // nodes: 3 spokes at v plus 2 more per neighbor.
        let nb = neighborhood(&gen::petersen(), 0, 2);
        assert_eq!(nb.vertex_count(), 10);
        let recount: usize = {
            let g = gen::petersen();
            let close = neighborhood(&g, 0, 1);
            let mut es = BTreeSet::new();
            for (&u, &d) in &close.dist {
                if d <= 1 {
                    for &w in g.neighbors(u) {
                        es.insert((u.min(w), u.max(w)));
                    }
                }
            }
            es.len()
        };
        assert_eq!(nb.edge_count(), recount);
        assert_eq!(nb.edge_count(), 9);
    }

    #[test]
    fn neighborhood_is_tree_below_half_girth() {
        let g = gen::heawood(); // girth 6
        for v in g.vertices() {
            assert!(neighborhood(&g, v, 2).is_tree());
        }
    }

    #[test]
    fn prune_examples() {
        assert_eq!(prune_degenerate(&gen::path_graph(4)).m(), 0);
        let mut g = gen::cycle_graph(5);
        let mut g6 = Graph::empty(6);
        for (u, v) in g.edges() {
            g6.add_edge(u, v);
        }
        g6.add_edge(0, 5);
        g = g6;
        let pruned = prune_degenerate(&g);
        assert_eq!(pruned.m(), 5);
        assert_eq!(brute_girth(&pruned), Girth::Finite(5));
        // Any tree peels away completely.
        let tree = gen::star_graph(7);
        assert_eq!(prune_degenerate(&tree).m(), 0);
    }

    #[test]
    fn prune_preserves_girth_on_random_graphs() {
        for seed in 0..100 {
            let g = gen::gen_random(40, 0.05, seed);
            assert_eq!(
                brute_girth(&prune_degenerate(&g)),
                brute_girth(&g),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn enumerate_examples() {
        let k4 = gen::complete_graph(4);
        assert_eq!(count_subgraph(&k4, &SubgraphPattern::clique(3)).unwrap(), 4);
        assert_eq!(count_subgraph(&k4, &SubgraphPattern::cycle(4)).unwrap(), 3);
        let c6 = gen::cycle_graph(6);
        assert_eq!(count_subgraph(&c6, &SubgraphPattern::cycle(6)).unwrap(), 1);
    }

    #[test]
    fn enumerate_rejects_oversize_pattern() {
        let g = gen::complete_graph(12);
        assert!(enumerate_subgraph(&g, &SubgraphPattern::clique(11)).is_err());
    }

    #[test]
    fn k4_c4_instances_by_exhaustive_orderings() {
        // Independent count: all 4-vertex orderings of K4 that close a C4,
        // divided by the 8 automorphisms of C4.
        let g = gen::complete_graph(4);
        let mut count = 0usize;
        let ids = [0u32, 1, 2, 3];
        let mut perm = ids;
        // Heap's algorithm would be overkill; 24 permutations by index.
        fn perms(xs: &mut [u32; 4], k: usize, acc: &mut Vec<[u32; 4]>) {
            if k == 1 {
                acc.push(*xs);
                return;
            }
            for i in 0..k {
                perms(xs, k - 1, acc);
                if k.is_multiple_of(2) {
                    xs.swap(i, k - 1);
                } else {
                    xs.swap(0, k - 1);
                }
            }
        }
        let mut acc = Vec::new();
        perms(&mut perm, 4, &mut acc);
        for p in acc {
            if (0..4).all(|i| g.has_edge(p[i], p[(i + 1) % 4])) {
                count += 1;
            }
        }
        assert_eq!(count / 8, 3);
    }
}
