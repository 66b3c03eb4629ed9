//! Subgraph listing over a partition tree, plus the Turán-gated detection
//! wrappers and the sparse exact-girth algorithm.

use crate::clique::net::{CliqueNet, RouteRequest};
use crate::clique::partition::{build_partition_tree, PartitionTree, C2, C_LIST};
use crate::engine::Word;
use crate::error::Fault;
use crate::graph::Graph;
use crate::pattern::{Instance, SubgraphPattern};
use crate::turan::{girth_turan_k, turan_c2k_gate_with, TuranK, C2K_GATE_CONST};
use crate::witness::{validate_witness, CycleWitness};
use std::collections::{BTreeSet, HashSet};

/// Lists all H-copies given a valid H-partition tree known to all nodes.
/// Each leaf part is assigned to one node, which learns exactly the edge
/// sets between its ancestor-chain parts selected by H's back edges.
pub fn list_with_tree(
    g: &Graph,
    h: &SubgraphPattern,
    tree: &PartitionTree,
    net: &mut CliqueNet,
) -> Result<BTreeSet<Instance>, Fault> {
    let n = g.n();
    let p = h.p();
    let x = tree.x;
    let leaves = tree.leaves()?;
    if leaves.len() > n.div_ceil(x) {
        return Err(Fault::OutsideRegime(format!(
            "{} leaves exceed n/x = {}",
            leaves.len(),
            n / x
        )));
    }

    // Assignment: leaf rank * x + part index -> node id.
    struct Assigned<'a> {
        node: u32,
        chain_parts: Vec<&'a Vec<u32>>,
    }
    let mut assigned: Vec<Assigned<'_>> = Vec::new();
    for (rank, leaf) in leaves.iter().enumerate() {
        let partition = tree.partition_for_chain(leaf)?;
        for j in 0..partition.parts.len() {
            let node = (rank * x + j) as u32;
            if node as usize >= n {
                return Err(Fault::OutsideRegime(
                    "leaf part assignment exceeds n".into(),
                ));
            }
            let mut chain = leaf.clone();
            chain.push(j);
            assigned.push(Assigned {
                node,
                chain_parts: tree.chain_parts(&chain)?,
            });
        }
    }

    // Load bound from Condition 2: sum_i (c2 d_i m~/x^2 + n) = c2 k m~/x^2 + p n.
    let declared =
        (C2 * h.k() as f64 * tree.m_tilde as f64 / (x * x) as f64 + (p * n) as f64).ceil() as u64;

    // Membership tables: vertex -> part index per chain layer, per assignee.
    let mut requests = Vec::new();
    for a in &assigned {
        let mut member: Vec<Vec<bool>> = Vec::with_capacity(p);
        for part in &a.chain_parts {
            let mut mark = vec![false; n];
            for &v in part.iter() {
                mark[v as usize] = true;
            }
            member.push(mark);
        }
        let mut wanted: HashSet<(u32, u32)> = HashSet::new();
        for i in 0..p {
            for t in h.back_edges(i) {
                for &u in a.chain_parts[i].iter() {
                    for &v in g.neighbors(u) {
                        if member[t][v as usize] {
                            wanted.insert((u.min(v), u.max(v)));
                        }
                    }
                }
            }
        }
        for (u, v) in wanted {
            requests.push(RouteRequest {
                source: u,
                target: a.node,
                word: Word::new(&[u as u64, v as u64]),
            });
        }
    }
    let deliveries = net.route_load_balanced(requests, declared, n as u64)?;

    // Local enumeration at every assigned node over its delivered edges,
    // with z_i constrained to the i-th chain part.
    let mut out = BTreeSet::new();
    for a in &assigned {
        let edges: Vec<(u32, u32)> = deliveries[a.node as usize]
            .iter()
            .map(|(_, w)| (w.get(0) as u32, w.get(1) as u32))
            .collect();
        let local = Graph::from_edges(n, &edges);
        enumerate_constrained(&local, h, &a.chain_parts, &mut out);
    }
    Ok(out)
}

fn enumerate_constrained(
    local: &Graph,
    h: &SubgraphPattern,
    parts: &[&Vec<u32>],
    out: &mut BTreeSet<Instance>,
) {
    let p = h.p();
    let mut mapping = vec![u32::MAX; p];
    let mut used = HashSet::new();
    fn rec(
        local: &Graph,
        h: &SubgraphPattern,
        parts: &[&Vec<u32>],
        i: usize,
        mapping: &mut Vec<u32>,
        used: &mut HashSet<u32>,
        out: &mut BTreeSet<Instance>,
    ) {
        if i == h.p() {
            out.insert(Instance::from_mapping(h, mapping));
            return;
        }
        let back = h.back_edges(i);
        'cand: for &c in parts[i].iter() {
            if used.contains(&c) {
                continue;
            }
            for &t in &back {
                if !local.has_edge(c, mapping[t]) {
                    continue 'cand;
                }
            }
            mapping[i] = c;
            used.insert(c);
            rec(local, h, parts, i + 1, mapping, used, out);
            used.remove(&c);
            mapping[i] = u32::MAX;
        }
    }
    rec(local, h, parts, 0, &mut mapping, &mut used, out);
}

/// Builds the tree and lists; asserts the end-to-end charged-round bound.
pub fn list_subgraph(g: &Graph, h: &SubgraphPattern) -> Result<BTreeSet<Instance>, Fault> {
    let mut net = CliqueNet::new(g.n());
    list_subgraph_with(g, h, &mut net)
}

pub fn list_subgraph_with(
    g: &Graph,
    h: &SubgraphPattern,
    net: &mut CliqueNet,
) -> Result<BTreeSet<Instance>, Fault> {
    let before = net.metrics().rounds;
    let tree = build_partition_tree(g, h, net)?;
    let instances = list_with_tree(g, h, &tree, net)?;
    let spent = net.metrics().rounds - before;
    let n = g.n() as f64;
    let bound = C_LIST as f64
        * (h.k() as f64 * tree.m_tilde as f64 / (n.ln() * (1.0 + 2.0 / h.p() as f64)).exp()
            + h.p() as f64);
    if spent as f64 > bound {
        return Err(Fault::invariant(format!(
            "listing spent {spent} charged rounds, bound {bound:.1}"
        )));
    }
    Ok(instances)
}

/// C_{2k} detection result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Detect2k {
    Found(CycleWitness),
    /// The edge count alone certifies a C_{2k} exists.
    GuaranteedExists,
    Free,
}

/// Turán-gated detection: if m exceeds the gate bound a C_{2k} must exist;
/// otherwise the graph is sparse enough to list C_{2k} outright.
pub fn detect_c2k(g: &Graph, k: usize) -> Result<Detect2k, Fault> {
    detect_c2k_with(g, k, C2K_GATE_CONST, &mut CliqueNet::new(g.n()))
}

pub fn detect_c2k_with(
    g: &Graph,
    k: usize,
    gate_const: f64,
    net: &mut CliqueNet,
) -> Result<Detect2k, Fault> {
    if k < 2 {
        return Err(Fault::precondition("need k >= 2"));
    }
    let n = g.n();
    let degs: Vec<Word> = (0..n as u32)
        .map(|v| Word::new(&[g.degree(v) as u64]))
        .collect();
    let known = net.broadcast_all(&degs)?;
    let m = (known.iter().map(|w| w.get(0)).sum::<u64>() / 2) as usize;
    if turan_c2k_gate_with(n, m, k, gate_const) {
        return Ok(Detect2k::GuaranteedExists);
    }
    let instances = list_subgraph_with(g, &SubgraphPattern::cycle(2 * k), net)?;
    match instances.into_iter().next() {
        Some(inst) => {
            let w = CycleWitness::new(inst.mapping);
            if !validate_witness(g, &w, 2 * k) {
                return Err(Fault::invariant("listed C_2k instance failed validation"));
            }
            Ok(Detect2k::Found(w))
        }
        None => Ok(Detect2k::Free),
    }
}

/// Exact girth for graphs whose girth is known to exceed `ell`: list every
/// cycle length in (ell, 2k'], then settle 2k'+1 vs 2k'+2.
pub fn exact_girth_sparse(g: &Graph, ell: usize) -> Result<(usize, Option<CycleWitness>), Fault> {
    let mut net = CliqueNet::new(g.n());
    exact_girth_sparse_with(g, ell, &mut net)
}

pub fn exact_girth_sparse_with(
    g: &Graph,
    ell: usize,
    net: &mut CliqueNet,
) -> Result<(usize, Option<CycleWitness>), Fault> {
    let n = g.n();
    if ell < 2 {
        return Err(Fault::precondition("need ell >= 2"));
    }
    let degs: Vec<Word> = (0..n as u32)
        .map(|v| Word::new(&[g.degree(v) as u64]))
        .collect();
    let known = net.broadcast_all(&degs)?;
    let m = (known.iter().map(|w| w.get(0)).sum::<u64>() / 2) as usize;

    let k_prime = match girth_turan_k(n, m) {
        TuranK::Sparse => {
            // m = O(n): gather everywhere and read the girth off directly.
            let full = net.gather_graph(g)?;
            let w = crate::oracle::brute_girth_witness(&full)
                .ok_or_else(|| Fault::precondition("acyclic graph has no girth"))?;
            if w.len() <= ell {
                return Err(Fault::precondition(format!(
                    "caller certified girth > {ell} but a {}-cycle exists",
                    w.len()
                )));
            }
            let len = w.len();
            return Ok((len, Some(w)));
        }
        TuranK::K(k) => k,
    };

    let list_len = |net: &mut CliqueNet, len: usize| -> Result<Option<CycleWitness>, Fault> {
        let insts = list_subgraph_with(g, &SubgraphPattern::cycle(len), net)?;
        Ok(insts
            .into_iter()
            .next()
            .map(|i| CycleWitness::new(i.mapping)))
    };

    for len in 3..=(2 * k_prime) {
        if let Some(w) = list_len(net, len)? {
            if len <= ell {
                return Err(Fault::precondition(format!(
                    "caller certified girth > {ell} but a {len}-cycle exists"
                )));
            }
            if !validate_witness(g, &w, len) {
                return Err(Fault::invariant("listed cycle failed validation"));
            }
            return Ok((len, Some(w)));
        }
    }

    if let Some(w) = list_len(net, 2 * k_prime + 1)? {
        return Ok((2 * k_prime + 1, Some(w)));
    }
    // The Turán bound certifies a cycle of length <= 2k'+2 exists, so the
    // girth is exactly 2k'+2. Confirm by listing when the pattern still
    // fits the tree machinery comfortably.
    let confirm_len = 2 * k_prime + 2;
    if (confirm_len as f64) <= (n as f64).log2() {
        match list_len(net, confirm_len)? {
            Some(w) => return Ok((confirm_len, Some(w))),
            None => {
                return Err(Fault::invariant(format!(
                    "Turán certifies a C_{confirm_len} but listing found none"
                )))
            }
        }
    }
    Ok((confirm_len, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::oracle::{brute_girth, enumerate_subgraph, Girth};

    #[test]
    fn k4_triangles_match_oracle() {
        let g = gen::complete_graph(4);
        let h = SubgraphPattern::clique(3);
        let got = list_subgraph(&g, &h).unwrap();
        let want = enumerate_subgraph(&g, &h).unwrap();
        assert_eq!(got.len(), 4);
        assert_eq!(got, want);
    }

    #[test]
    fn c6_in_c6_single_instance() {
        let g = gen::cycle_graph(6);
        let h = SubgraphPattern::cycle(6);
        let got = list_subgraph(&g, &h).unwrap();
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn c4_free_bipartite_incidence_empty() {
        // Point-line incidence graph of AG(2,3): 9 points, 12 lines, any two
        // lines share at most one point, so the graph is C4-free.
        let mut g = Graph::empty(25);
        let mut line = 9u32;
        for slope in 0..3u32 {
            for intercept in 0..3u32 {
                for xcoord in 0..3u32 {
                    let ycoord = (slope * xcoord + intercept) % 3;
                    g.add_edge(xcoord * 3 + ycoord, line);
                }
                line += 1;
            }
        }
        for xcoord in 0..3u32 {
            for ycoord in 0..3u32 {
                g.add_edge(xcoord * 3 + ycoord, line);
            }
            line += 1;
        }
        let h = SubgraphPattern::cycle(4);
        assert!(enumerate_subgraph(&g, &h).unwrap().is_empty());
        assert!(list_subgraph(&g, &h).unwrap().is_empty());
    }

    #[test]
    fn random_graphs_match_oracle_small_patterns() {
        for seed in 0..8 {
            let g = gen::gen_random(32, 0.3, seed);
            for h in [SubgraphPattern::clique(3), SubgraphPattern::path(4)] {
                let got = list_subgraph(&g, &h).unwrap();
                let want = enumerate_subgraph(&g, &h).unwrap();
                assert_eq!(got, want, "seed {seed} pattern {}", h.name());
            }
        }
    }

    #[test]
    fn edgeless_any_pattern_empty() {
        let g = Graph::empty(32);
        for h in [
            SubgraphPattern::clique(3),
            SubgraphPattern::cycle(4),
            SubgraphPattern::path(4),
        ] {
            assert!(list_subgraph(&g, &h).unwrap().is_empty());
        }
    }

    #[test]
    fn large_split_tree_matches_oracle() {
        // Scale where the root partition genuinely splits.
        let g = gen::gen_random(1024, 0.02, 1);
        let h = SubgraphPattern::clique(3);
        let got = list_subgraph(&g, &h).unwrap();
        let want = enumerate_subgraph(&g, &h).unwrap();
        assert_eq!(got, want);
        assert!(!want.is_empty(), "instance should contain triangles");
    }

    #[test]
    fn detect_c6_found() {
        let g = gen::cycle_graph(6);
        match detect_c2k(&g, 3).unwrap() {
            Detect2k::Found(w) => assert!(validate_witness(&g, &w, 6)),
            other => panic!("expected Found, got {other:?}"),
        }
    }

    #[test]
    fn detect_c4_free_on_c5() {
        let g = gen::cycle_graph(5);
        assert_eq!(detect_c2k(&g, 2).unwrap(), Detect2k::Free);
    }

    #[test]
    fn gate_fires_with_test_scale_constant() {
        // The 17k gate bound exceeds every possible edge count for n <= 40
        // (17k n^{1+1/k} > n(n-1)/2), so graph-level gate tests use a small
        // gate constant; the gate's own arithmetic is covered in turan.rs.
        let g = gen::gen_random(32, 0.6, 2);
        let m = g.m();
        assert!(turan_c2k_gate_with(32, m, 2, 0.5));
        let mut net = CliqueNet::new(32);
        match detect_c2k_with(&g, 2, 0.5, &mut net).unwrap() {
            Detect2k::GuaranteedExists => {}
            other => panic!("expected gate to fire, got {other:?}"),
        }
        // Oracle confirms the guarantee.
        assert!(!enumerate_subgraph(&g, &SubgraphPattern::cycle(4))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn exact_girth_petersen() {
        let (girth, w) = exact_girth_sparse(&gen::petersen(), 3).unwrap();
        assert_eq!(girth, 5);
        if let Some(w) = w {
            assert!(validate_witness(&gen::petersen(), &w, 5));
        }
    }

    #[test]
    fn exact_girth_c9_sparse_path() {
        let (girth, _) = exact_girth_sparse(&gen::cycle_graph(9), 3).unwrap();
        assert_eq!(girth, 9);
    }

    #[test]
    fn exact_girth_bipartite_sweep() {
        for seed in 0..6 {
            let g = gen::gen_bipartite(20, 20, 0.12, seed);
            let oracle = brute_girth(&g);
            if let Girth::Finite(want) = oracle {
                if want <= 3 {
                    continue;
                }
                let (got, _) = exact_girth_sparse(&g, 3).unwrap();
                assert_eq!(got, want, "seed {seed}");
            }
        }
    }

    #[test]
    fn exact_girth_rejects_violated_precondition() {
        // K4 has girth 3; claiming girth > 3 must fault.
        let g = gen::complete_graph(4);
        assert!(exact_girth_sparse(&g, 3).is_err());
    }
}
