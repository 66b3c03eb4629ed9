//! Deterministic +1 girth approximation in the Congested Clique.
//!
//! The driver runs three stages: preprocessing (sparse whole-graph gather or
//! distributed 1-degenerate peeling), an initial neighborhood-learning phase
//! built on path listing over a hard-coded edge-segment partition, and a
//! neighborhood-doubling phase that repeatedly doubles the radius every node
//! knows until a cycle appears or growth saturates. Node-local state is one
//! `Neighborhood` view per vertex; every message travels through the charged
//! clique primitives.

use crate::clique::net::{CliqueNet, RouteRequest};
use crate::engine::{RunMetrics, Word, WORD_FIELDS};
use crate::error::Fault;
use crate::graph::Graph;
use crate::oracle::Neighborhood;
use crate::turan::{girth_turan_k, TuranK};
use crate::witness::{validate_witness, CycleWitness};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

/// Gather threshold: with m <= C_SPARSE * n the whole graph is collected at
/// every node in one charged routing call.
pub const C_SPARSE: usize = 8;

/// Girth estimate. `PlusOne(a)` means the girth is a or a + 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GirthEstimate {
    Acyclic,
    Exact(usize),
    PlusOne(usize),
}

impl GirthEstimate {
    /// Checks consistency against an oracle girth.
    pub fn consistent_with(&self, oracle: crate::oracle::Girth) -> bool {
        use crate::oracle::Girth;
        match (*self, oracle) {
            (GirthEstimate::Acyclic, Girth::Infinite) => true,
            (GirthEstimate::Exact(a), Girth::Finite(g)) => a == g,
            (GirthEstimate::PlusOne(a), Girth::Finite(g)) => g == a || g == a + 1,
            _ => false,
        }
    }
}

/// Result of one driver run.
#[derive(Clone, Debug)]
pub struct GirthRun {
    pub estimate: GirthEstimate,
    pub witness: Option<CycleWitness>,
    pub metrics: RunMetrics,
    /// Charged primitive invocations across the run.
    pub primitives: u64,
}

/// Per-node neighborhood knowledge of a common radius; all views are trees.
#[derive(Clone, Debug)]
pub struct NeighborhoodState {
    pub radius: usize,
    pub views: Vec<Neighborhood>,
}

/// Test-facing knobs for Phase I. The defaults follow the analysis; the
/// overrides force the segment machinery to run on instances small enough to
/// verify against the oracles (the covering property holds for any segment
/// count, only the round constants change).
#[derive(Clone, Copy, Debug, Default)]
pub struct Phase1Cfg {
    pub k_override: Option<usize>,
    pub segments_override: Option<usize>,
}

pub enum Preprocessed {
    Early {
        estimate: GirthEstimate,
        witness: Option<CycleWitness>,
    },
    /// Min degree >= 2, same girth as the input, same vertex ids.
    Pruned(Graph),
}

/// Preprocessing: every node broadcasts (deg, xor of neighbor ids). If the
/// graph is sparse the whole graph is gathered and solved locally; otherwise
/// all nodes replay the 1-degenerate peeling from the broadcast alone.
pub fn preprocess(g: &Graph, net: &mut CliqueNet) -> Result<Preprocessed, Fault> {
    let n = g.n();
    let words: Vec<Word> = (0..n as u32)
        .map(|v| {
            let xor = g.neighbors(v).iter().fold(0u64, |acc, &u| acc ^ u as u64);
            Word::new(&[g.degree(v) as u64, xor])
        })
        .collect();
    let known = net.broadcast_all(&words)?;
    let m: u64 = known.iter().map(|w| w.get(0)).sum::<u64>() / 2;

    if m as usize <= C_SPARSE * n {
        // Every node gathers the graph and solves locally; the computation is
        // identical at all nodes, so it runs once.
        let full = net.gather_graph(g)?;
        return Ok(match crate::oracle::brute_girth_witness(&full) {
            Some(w) => {
                let len = w.len();
                Preprocessed::Early {
                    estimate: GirthEstimate::Exact(len),
                    witness: Some(w),
                }
            }
            None => Preprocessed::Early {
                estimate: GirthEstimate::Acyclic,
                witness: None,
            },
        });
    }

    // Local replay of the peeling from (deg, xor): a degree-1 node's xor
    // field is exactly its only neighbor's id.
    let alive = peel_replay(
        &known
            .iter()
            .map(|w| (w.get(0) as usize, w.get(1)))
            .collect::<Vec<_>>(),
    );
    let mut pruned = Graph::empty(n);
    for u in 0..n as u32 {
        if !alive[u as usize] {
            continue;
        }
        for &v in g.neighbors(u) {
            if u < v && alive[v as usize] {
                pruned.add_edge(u, v);
            }
        }
    }
    debug_assert!(pruned.vertices().all(|v| {
        let d = pruned.degree(v);
        d == 0 || d >= 2
    }));
    Ok(Preprocessed::Pruned(pruned))
}

/// Replays the elimination: remove degree-0 nodes, and for a degree-1 node
/// use its xor field as the neighbor id, decrement that neighbor and fold
/// the removed id out of its xor.
fn peel_replay(records: &[(usize, u64)]) -> Vec<bool> {
    let n = records.len();
    let mut deg: Vec<usize> = records.iter().map(|r| r.0).collect();
    let mut xor: Vec<u64> = records.iter().map(|r| r.1).collect();
    let mut alive = vec![true; n];
    let mut q: VecDeque<u32> = (0..n as u32).filter(|&v| deg[v as usize] < 2).collect();
    while let Some(v) = q.pop_front() {
        if !alive[v as usize] {
            continue;
        }
        alive[v as usize] = false;
        if deg[v as usize] == 1 {
            let u = xor[v as usize] as usize;
            if alive[u] {
                deg[u] -= 1;
                xor[u] ^= v as u64;
                if deg[u] < 2 {
                    q.push_back(u as u32);
                }
            }
        }
        deg[v as usize] = 0;
    }
    alive
}

pub enum Phase1Outcome {
    /// The pruned graph became sparse; the driver gathers and finishes.
    SparseFallback,
    Exact(usize, CycleWitness),
    Knowledge(NeighborhoodState),
}

/// Phase I: either report the girth (some node witnessed a shortest cycle
/// inside its edge package) or leave every node knowing a tree neighborhood
/// of a common radius derived from the Turán exponent.
pub fn phase1_path_listing(
    pruned: &Graph,
    net: &mut CliqueNet,
    cfg: Phase1Cfg,
) -> Result<Phase1Outcome, Fault> {
    let n = pruned.n();
    // Broadcast (degree, owned-edge count) over the pruned graph; ownership
    // (the smaller endpoint owns an edge) makes the global edge numbering
    // computable by everyone.
    let words: Vec<Word> = (0..n as u32)
        .map(|v| {
            let own = pruned.neighbors(v).iter().filter(|&&u| u > v).count() as u64;
            Word::new(&[pruned.degree(v) as u64, own])
        })
        .collect();
    let known = net.broadcast_all(&words)?;
    let m = (known.iter().map(|w| w.get(0)).sum::<u64>() / 2) as usize;

    if m <= C_SPARSE * n && cfg.k_override.is_none() {
        return Ok(Phase1Outcome::SparseFallback);
    }

    let k = match cfg.k_override {
        Some(k) => k,
        None => match girth_turan_k(n, m) {
            TuranK::K(k) => k,
            // m > 8n rules the sparse marker out; guarded for completeness.
            TuranK::Sparse => return Ok(Phase1Outcome::SparseFallback),
        },
    };

    let subset_size = k / 4;
    if subset_size < 2 {
        // Radius floor(floor(k/4)/2) <= 0: the girth certificate makes the
        // target neighborhood radius-0; radius-1 knowledge (each node's own
        // edges) is local and always a tree.
        return Ok(Phase1Outcome::Knowledge(radius1_state(pruned)));
    }

    // Edge-index segments.
    let denom = 20.0 * std::f64::consts::E;
    let segments = match cfg.segments_override {
        Some(s) => s.max(1),
        None => {
            let nf = n as f64;
            ((k as f64 * (nf.ln() * 2.0 / k as f64).exp()) / denom)
                .ceil()
                .max(1.0) as usize
        }
    };
    let family_size = binomial(segments, subset_size);
    if family_size == 0 || family_size > n as u64 {
        return Err(Fault::OutsideRegime(format!(
            "subset family size C({segments},{subset_size}) = {family_size} not in [1, n={n}]"
        )));
    }
    let seg_cap = m.div_ceil(segments);
    if subset_size * seg_cap > n {
        return Err(Fault::OutsideRegime(format!(
            "edge package bound {subset_size}*{seg_cap} exceeds n={n}"
        )));
    }

    // Globally computable edge numbering: base(v) = sum of owned counts of
    // smaller ids; edge (u,v), u < v, gets base(u) + rank of v among u's
    // larger neighbors. Segment of index i is floor(i * segments / m).
    let own: Vec<usize> = known.iter().map(|w| w.get(1) as usize).collect();
    let mut base = vec![0usize; n + 1];
    for v in 0..n {
        base[v + 1] = base[v] + own[v];
    }
    debug_assert_eq!(base[n], m);
    let seg_of_index = |idx: usize| -> usize { idx * segments / m };
    let edge_index = |u: u32, v: u32| -> usize {
        debug_assert!(u < v);
        let rank = pruned
            .neighbors(u)
            .iter()
            .filter(|&&w| w > u && w < v)
            .count();
        base[u as usize] + rank
    };

    // Subsets of segments in lexicographic order; subset rank = node id.
    let subsets: Vec<Vec<usize>> = lex_subsets(segments, subset_size);
    debug_assert_eq!(subsets.len() as u64, family_size);
    let seg_to_nodes: Vec<Vec<u32>> = {
        let mut map = vec![Vec::new(); segments];
        for (i, sub) in subsets.iter().enumerate() {
            for &s in sub {
                map[s].push(i as u32);
            }
        }
        map
    };

    // Each owner routes its owned edges to every node whose subset covers
    // the edge's segment.
    let mut requests = Vec::new();
    for u in 0..n as u32 {
        for &v in pruned.neighbors(u) {
            if v <= u {
                continue;
            }
            let s = seg_of_index(edge_index(u, v));
            for &holder in &seg_to_nodes[s] {
                requests.push(RouteRequest {
                    source: u,
                    target: holder,
                    word: Word::new(&[u as u64, v as u64]),
                });
            }
        }
    }
    let packages = net.route_load_balanced(requests, n as u64, n as u64)?;

    // Every package holder reports the shortest cycle it witnesses, capped
    // at floor(k/4): only cycles that short are guaranteed to be fully
    // packed, so longer sightings prove nothing about the girth.
    let mut candidates: Vec<Word> = Vec::with_capacity(n);
    let mut local_witness: Vec<Option<CycleWitness>> = vec![None; n];
    for v in 0..n {
        let mut cand = u64::MAX;
        if v < subsets.len() {
            let edges: Vec<(u32, u32)> = packages[v]
                .iter()
                .map(|(_, w)| (w.get(0) as u32, w.get(1) as u32))
                .collect();
            if edges.len() > n {
                return Err(Fault::OutsideRegime(format!(
                    "edge package at node {v} holds {} edges > n",
                    edges.len()
                )));
            }
            let sub = Graph::from_edges(n, &edges);
            if let Some(w) = crate::oracle::shortest_cycle_below(&sub, subset_size + 1) {
                cand = w.len() as u64;
                local_witness[v] = Some(w);
            }
        }
        candidates.push(Word::new(&[cand]));
    }
    let reported = net.broadcast_all(&candidates)?;
    let best = reported
        .iter()
        .enumerate()
        .filter(|(_, w)| w.get(0) != u64::MAX)
        .min_by_key(|(v, w)| (w.get(0), *v));
    if let Some((winner, w)) = best {
        let len = w.get(0) as usize;
        let witness = local_witness[winner]
            .clone()
            .expect("winner holds its witness");
        broadcast_witness(net, winner as u32, &witness)?;
        if !validate_witness(pruned, &witness, len) {
            return Err(Fault::invariant("phase 1 witness failed validation"));
        }
        return Ok(Phase1Outcome::Exact(len, witness));
    }

    // No cycle of length <= floor(k/4) exists; redistribute so each node
    // learns a tree neighborhood of radius floor(floor(k/4)/2).
    let radius = subset_size / 2;
    debug_assert!(radius >= 1);

    // Step 2a: path owners inform endpoints of (node, hop distance). Owners
    // are the minimum-id holder whose package covers all path segments, a
    // choice every holder of the path can compute.
    let mut ball_info: Vec<BTreeMap<u32, usize>> = vec![BTreeMap::new(); n];
    let mut requests = Vec::new();
    for (holder, package) in packages.iter().enumerate().take(subsets.len()) {
        let edges: Vec<(u32, u32)> = package
            .iter()
            .map(|(_, w)| (w.get(0) as u32, w.get(1) as u32))
            .collect();
        let local = Graph::from_edges(n, &edges);
        for (x0, xl, len, segs) in enumerate_paths(&local, radius, |a, b| {
            seg_of_index(edge_index(a.min(b), a.max(b)))
        }) {
            let owner = subsets
                .iter()
                .position(|s| segs.iter().all(|sg| s.contains(sg)))
                .expect("covering subset exists");
            if owner != holder {
                continue;
            }
            requests.push(RouteRequest {
                source: holder as u32,
                target: x0,
                word: Word::new(&[xl as u64, len as u64]),
            });
            requests.push(RouteRequest {
                source: holder as u32,
                target: xl,
                word: Word::new(&[x0 as u64, len as u64]),
            });
        }
    }
    let deliveries = net.route_load_balanced(requests, n as u64, n as u64)?;
    for v in 0..n {
        ball_info[v].insert(v as u32, 0);
        for (_, w) in &deliveries[v] {
            let u = w.get(0) as u32;
            let d = w.get(1) as usize;
            let e = ball_info[v].entry(u).or_insert(d);
            *e = (*e).min(d);
        }
    }

    // Step 2b: each node asks every member at distance <= radius-1 for all
    // of its incident edges.
    let mut requests = Vec::new();
    for v in 0..n as u32 {
        for (&u, &d) in &ball_info[v as usize] {
            if u != v && d < radius {
                requests.push(RouteRequest {
                    source: v,
                    target: u,
                    word: Word::new(&[v as u64]),
                });
            }
        }
    }
    let asks = net.route_load_balanced(requests, n as u64, n as u64)?;
    let mut requests = Vec::new();
    for u in 0..n as u32 {
        for (_, w) in &asks[u as usize] {
            let v = w.get(0) as u32;
            for &x in pruned.neighbors(u) {
                requests.push(RouteRequest {
                    source: u,
                    target: v,
                    word: Word::new(&[u as u64, x as u64]),
                });
            }
        }
    }
    let edge_msgs = net.route_load_balanced(requests, 2 * n as u64, n as u64)?;

    let mut views = Vec::with_capacity(n);
    for v in 0..n as u32 {
        let mut edges: BTreeSet<(u32, u32)> = BTreeSet::new();
        for &x in pruned.neighbors(v) {
            edges.insert((v.min(x), v.max(x)));
        }
        for (_, w) in &edge_msgs[v as usize] {
            let (a, b) = (w.get(0) as u32, w.get(1) as u32);
            edges.insert((a.min(b), a.max(b)));
        }
        let dist: HashMap<u32, usize> = ball_info[v as usize]
            .iter()
            .map(|(&u, &d)| (u, d))
            .collect();
        let view = Neighborhood {
            center: v,
            radius,
            dist,
            edges,
        };
        if !view.is_tree() {
            return Err(Fault::invariant(format!(
                "phase 1 learned neighborhood of {v} is not a tree"
            )));
        }
        views.push(view);
    }
    Ok(Phase1Outcome::Knowledge(NeighborhoodState {
        radius,
        views,
    }))
}

/// Radius-1 views from local inputs only: a node, its neighbors, its
/// incident edges. Always a tree.
pub fn radius1_state(g: &Graph) -> NeighborhoodState {
    let views = (0..g.n() as u32)
        .map(|v| {
            let mut dist = HashMap::new();
            dist.insert(v, 0usize);
            let mut edges = BTreeSet::new();
            for &u in g.neighbors(v) {
                dist.insert(u, 1);
                edges.insert((v.min(u), v.max(u)));
            }
            Neighborhood {
                center: v,
                radius: 1,
                dist,
                edges,
            }
        })
        .collect();
    NeighborhoodState { radius: 1, views }
}

pub enum Phase2Outcome {
    Exact(usize, CycleWitness),
    /// Radius doubled; all views still trees.
    State1(NeighborhoodState),
    /// Saturated at radius b with the certificate g in {2b+1, 2b+2}.
    State2(NeighborhoodState, usize),
}

/// Phase II: one doubling attempt.
pub fn phase2_double(
    g: &Graph,
    state: &NeighborhoodState,
    net: &mut CliqueNet,
) -> Result<Phase2Outcome, Fault> {
    let n = g.n();
    let a = state.radius;
    for view in &state.views {
        if !view.is_tree() {
            return Err(Fault::precondition(format!(
                "phase 2 requires tree neighborhoods; node {} sees a cycle",
                view.center
            )));
        }
    }

    // u-side bookkeeping: for each ordered frontier pair (v, u at distance
    // exactly a), u prepares the part of its view that v cannot already
    // know. Everything u needs comes from its own tree.
    let parents: Vec<HashMap<u32, u32>> = state.views.iter().map(tree_parents).collect();

    // Pair list derived symmetrically: u is on v's front line iff v is on
    // u's front line.
    let mut pairs: Vec<(u32, u32)> = Vec::new(); // (v, u)
    for v in 0..n as u32 {
        for u in state.views[v as usize].front_line() {
            pairs.push((v, u));
        }
    }

    let diff = |u: u32, v: u32, radius_cap: usize| -> (usize, Vec<(u32, u32)>) {
        frontier_diff(
            &state.views[u as usize],
            &parents[u as usize],
            v,
            radius_cap,
        )
    };

    // Step 1: sizes. Word (u -> v): node-count of the radius-a difference.
    let mut requests = Vec::new();
    for &(v, u) in &pairs {
        let (nodes, _) = diff(u, v, a);
        requests.push(RouteRequest {
            source: u,
            target: v,
            word: Word::new(&[nodes as u64]),
        });
    }
    let sizes = net.route_load_balanced(requests, n as u64, n as u64)?;

    // Step 2: every node broadcasts (sum of sizes, frontier size).
    let announce: Vec<Word> = (0..n)
        .map(|v| {
            let sum: u64 = sizes[v].iter().map(|(_, w)| w.get(0)).sum();
            let f = state.views[v].front_line().len() as u64;
            Word::new(&[sum, f])
        })
        .collect();
    let announced = net.broadcast_all(&announce)?;
    let all_small = announced.iter().all(|w| w.get(0) < n as u64);

    if all_small {
        // State 1 path: ship the differences and double the radius.
        let mut requests = Vec::new();
        for &(v, u) in &pairs {
            let (_, edges) = diff(u, v, a);
            for (x, y) in edges {
                requests.push(RouteRequest {
                    source: u,
                    target: v,
                    word: Word::new(&[x as u64, y as u64]),
                });
            }
        }
        let shipped = net.route_load_balanced(requests, 2 * n as u64, n as u64)?;
        return finish_growth(g, state, net, shipped, 2 * a);
    }

    // State 2 path: find the largest prefix radius whose differences fit.
    let max_f = announced.iter().map(|w| w.get(1)).max().unwrap_or(0).max(1);
    let d = (n as u64 / max_f) as usize;
    let j_range = d.min(a.saturating_sub(1));
    if j_range == 0 {
        return Ok(Phase2Outcome::State2(state.clone(), a));
    }

    // Prefix size exchange: u -> v, one (j, count) word per j.
    let mut requests = Vec::new();
    for &(v, u) in &pairs {
        for j in 1..=j_range {
            let (nodes, _) = diff(u, v, j);
            requests.push(RouteRequest {
                source: u,
                target: v,
                word: Word::new(&[j as u64, nodes as u64]),
            });
        }
    }
    let prefix_sizes = net.route_load_balanced(requests, n as u64, n as u64)?;
    let feasible: Vec<Word> = (0..n)
        .map(|v| {
            let mut sums = vec![0u64; j_range + 1];
            for (_, w) in &prefix_sizes[v] {
                sums[w.get(0) as usize] += w.get(1);
            }
            let mut best = 0u64;
            for (j, &sum) in sums.iter().enumerate().skip(1) {
                if sum < n as u64 {
                    best = j as u64;
                } else {
                    break;
                }
            }
            Word::new(&[best])
        })
        .collect();
    let feasible = net.broadcast_all(&feasible)?;
    let grow = feasible.iter().map(|w| w.get(0)).min().unwrap_or(0) as usize;
    if grow == 0 {
        return Ok(Phase2Outcome::State2(state.clone(), a));
    }

    let mut requests = Vec::new();
    for &(v, u) in &pairs {
        let (_, edges) = diff(u, v, grow);
        for (x, y) in edges {
            requests.push(RouteRequest {
                source: u,
                target: v,
                word: Word::new(&[x as u64, y as u64]),
            });
        }
    }
    let shipped = net.route_load_balanced(requests, 2 * n as u64, n as u64)?;
    match finish_growth(g, state, net, shipped, a + grow)? {
        Phase2Outcome::Exact(len, w) => Ok(Phase2Outcome::Exact(len, w)),
        Phase2Outcome::State1(st) => Ok(Phase2Outcome::State2(st, a + grow)),
        other => Ok(other),
    }
}

/// Assembles each node's union graph, checks for cycles (reporting the
/// shortest seen network-wide), and otherwise clips to the new radius.
fn finish_growth(
    g: &Graph,
    state: &NeighborhoodState,
    net: &mut CliqueNet,
    shipped: Vec<Vec<(u32, Word)>>,
    new_radius: usize,
) -> Result<Phase2Outcome, Fault> {
    let n = g.n();
    let mut unions: Vec<Graph> = Vec::with_capacity(n);
    for (v, delivered) in shipped.iter().enumerate() {
        let mut edges: Vec<(u32, u32)> = state.views[v].edges.iter().copied().collect();
        for (_, w) in delivered {
            edges.push((w.get(0) as u32, w.get(1) as u32));
        }
        unions.push(Graph::from_edges(n, &edges));
    }

    // Each node reports the shortest cycle in its union. Only the running
    // minimum matters for the broadcast outcome, so the scan carries a
    // shrinking cap; reports that cannot improve the minimum are elided
    // without changing the winner or the output.
    let mut candidates = Vec::with_capacity(n);
    let mut witnesses: Vec<Option<CycleWitness>> = vec![None; n];
    let mut running_cap = usize::MAX;
    for v in 0..n {
        let cand = match crate::oracle::shortest_cycle_below(&unions[v], running_cap) {
            Some(w) => {
                let len = w.len() as u64;
                running_cap = w.len();
                witnesses[v] = Some(w);
                len
            }
            None => u64::MAX,
        };
        candidates.push(Word::new(&[cand]));
    }
    let reported = net.broadcast_all(&candidates)?;
    let best = reported
        .iter()
        .enumerate()
        .filter(|(_, w)| w.get(0) != u64::MAX)
        .min_by_key(|(v, w)| (w.get(0), *v));
    if let Some((winner, w)) = best {
        let len = w.get(0) as usize;
        let witness = witnesses[winner].clone().expect("winner holds its witness");
        broadcast_witness(net, winner as u32, &witness)?;
        if !validate_witness(g, &witness, len) {
            return Err(Fault::invariant("phase 2 witness failed validation"));
        }
        return Ok(Phase2Outcome::Exact(len, witness));
    }

    // No cycle anywhere: every union restricted to the new radius is exactly
    // the grown neighborhood, and a tree.
    let mut views = Vec::with_capacity(n);
    for v in 0..n as u32 {
        let view = clip_to_radius(&unions[v as usize], v, new_radius);
        if !view.is_tree() {
            return Err(Fault::invariant(format!(
                "grown neighborhood of {v} is cyclic but no cycle was reported"
            )));
        }
        views.push(view);
    }
    Ok(Phase2Outcome::State1(NeighborhoodState {
        radius: new_radius,
        views,
    }))
}

/// BFS over a node's known union graph, clipped per the neighborhood
/// definition (nodes within r, edges incident to nodes within r - 1).
fn clip_to_radius(union: &Graph, center: u32, radius: usize) -> Neighborhood {
    let mut dist = HashMap::new();
    dist.insert(center, 0usize);
    let mut q = VecDeque::new();
    q.push_back(center);
    while let Some(u) = q.pop_front() {
        let du = dist[&u];
        if du == radius {
            continue;
        }
        for &w in union.neighbors(u) {
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
        for &w in union.neighbors(u) {
            edges.insert((u.min(w), u.max(w)));
        }
    }
    Neighborhood {
        center,
        radius,
        dist,
        edges,
    }
}

/// Parent links of a tree view, rooted at its center.
fn tree_parents(view: &Neighborhood) -> HashMap<u32, u32> {
    let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
    for &(x, y) in &view.edges {
        adj.entry(x).or_default().push(y);
        adj.entry(y).or_default().push(x);
    }
    let mut parents = HashMap::new();
    let mut seen = std::collections::HashSet::new();
    seen.insert(view.center);
    let mut q = VecDeque::new();
    q.push_back(view.center);
    while let Some(u) = q.pop_front() {
        if let Some(nbrs) = adj.get(&u) {
            for &w in nbrs {
                if seen.insert(w) {
                    parents.insert(w, u);
                    q.push_back(w);
                }
            }
        }
    }
    parents
}

/// What frontier node u sends toward v: the nodes and edges of u's view
/// restricted to radius `cap`, minus the part v provably knows (the subtree
/// hanging below v's neighbor on the u-v tree path; for radius-1 views,
/// everything except v itself). Returns (node count, edges).
fn frontier_diff(
    view_u: &Neighborhood,
    parents_u: &HashMap<u32, u32>,
    v: u32,
    cap: usize,
) -> (usize, Vec<(u32, u32)>) {
    let u = view_u.center;
    let known_marker: Box<dyn Fn(u32) -> bool> = if view_u.radius == 1 || view_u.dist[&v] == 1 {
        Box::new(move |x: u32| x == v)
    } else {
        // v's neighbor on the tree path = parent of v in u's tree.
        let w = parents_u[&v];
        let mut in_subtree: std::collections::HashSet<u32> = std::collections::HashSet::new();
        in_subtree.insert(w);
        // Children lists are implicit; walk all nodes and climb.
        for &x in view_u.dist.keys() {
            let mut cur = x;
            loop {
                if in_subtree.contains(&cur) {
                    in_subtree.insert(x);
                    break;
                }
                match parents_u.get(&cur) {
                    Some(&p) => cur = p,
                    None => break,
                }
            }
        }
        Box::new(move |x: u32| in_subtree.contains(&x))
    };

    let mut nodes = 0usize;
    for (&x, &dx) in &view_u.dist {
        if dx <= cap && x != u && !known_marker(x) {
            nodes += 1;
        }
    }
    let mut edges = Vec::new();
    for &(x, y) in &view_u.edges {
        let dx = view_u.dist[&x];
        let dy = view_u.dist[&y];
        // Edge belongs to the radius-cap restriction if incident to a node
        // within cap - 1.
        if dx + 1 > cap && dy + 1 > cap {
            continue;
        }
        if known_marker(x) && known_marker(y) {
            continue;
        }
        edges.push((x, y));
    }
    (nodes, edges)
}

/// Simple paths of length 1..=cap in `local`, canonicalized by endpoint
/// order, with the set of segments their edges live in.
fn enumerate_paths(
    local: &Graph,
    cap: usize,
    seg: impl Fn(u32, u32) -> usize,
) -> Vec<(u32, u32, usize, Vec<usize>)> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut segs = Vec::new();
    for start in 0..local.n() as u32 {
        if local.degree(start) == 0 {
            continue;
        }
        path.push(start);
        walk(local, cap, &seg, &mut path, &mut segs, &mut out);
        path.pop();
    }
    out
}

fn walk(
    local: &Graph,
    cap: usize,
    seg: &impl Fn(u32, u32) -> usize,
    path: &mut Vec<u32>,
    segs: &mut Vec<usize>,
    out: &mut Vec<(u32, u32, usize, Vec<usize>)>,
) {
    let last = *path.last().unwrap();
    if path.len() > 1 {
        let first = path[0];
        if first < last {
            let mut s = segs.clone();
            s.sort_unstable();
            s.dedup();
            out.push((first, last, path.len() - 1, s));
        }
    }
    if path.len() == cap + 1 {
        return;
    }
    for &nxt in local.neighbors(last) {
        if path.contains(&nxt) {
            continue;
        }
        path.push(nxt);
        segs.push(seg(last, nxt));
        walk(local, cap, seg, path, segs, out);
        segs.pop();
        path.pop();
    }
}

fn broadcast_witness(net: &mut CliqueNet, winner: u32, w: &CycleWitness) -> Result<(), Fault> {
    let words: Vec<Word> = w
        .vertices
        .chunks(WORD_FIELDS)
        .map(|c| Word::new(&c.iter().map(|&v| v as u64).collect::<Vec<_>>()))
        .collect();
    net.broadcast_from(winner, &words)?;
    Ok(())
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u64) / (i as u64 + 1);
    }
    acc
}

/// All k-subsets of {0..n-1} in lexicographic order.
fn lex_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

/// Hard cap on doubling iterations; the analysis needs O(1) in regime, and
/// exceeding log2 n signals a bug.
fn iteration_cap(n: usize) -> usize {
    (n.max(2) as f64).log2().ceil() as usize + 2
}

/// The full +1 approximation driver.
pub fn girth_plus_one(g: &Graph) -> Result<GirthRun, Fault> {
    girth_plus_one_cfg(g, Phase1Cfg::default())
}

pub fn girth_plus_one_cfg(g: &Graph, cfg: Phase1Cfg) -> Result<GirthRun, Fault> {
    let mut net = CliqueNet::new(g.n());
    let pruned = match preprocess(g, &mut net)? {
        Preprocessed::Early { estimate, witness } => {
            return Ok(GirthRun {
                estimate,
                witness,
                metrics: net.metrics(),
                primitives: net.primitives(),
            })
        }
        Preprocessed::Pruned(p) => p,
    };

    let mut state = match phase1_path_listing(&pruned, &mut net, cfg)? {
        Phase1Outcome::SparseFallback => {
            let full = net.gather_graph(&pruned)?;
            let w = crate::oracle::brute_girth_witness(&full)
                .ok_or_else(|| Fault::invariant("pruned graph with min degree >= 2 is acyclic"))?;
            let len = w.len();
            return Ok(GirthRun {
                estimate: GirthEstimate::Exact(len),
                witness: Some(w),
                metrics: net.metrics(),
                primitives: net.primitives(),
            });
        }
        Phase1Outcome::Exact(len, w) => {
            return Ok(GirthRun {
                estimate: GirthEstimate::Exact(len),
                witness: Some(w),
                metrics: net.metrics(),
                primitives: net.primitives(),
            })
        }
        Phase1Outcome::Knowledge(state) => state,
    };

    for _ in 0..iteration_cap(g.n()) {
        match phase2_double(&pruned, &state, &mut net)? {
            Phase2Outcome::Exact(len, w) => {
                return Ok(GirthRun {
                    estimate: GirthEstimate::Exact(len),
                    witness: Some(w),
                    metrics: net.metrics(),
                    primitives: net.primitives(),
                })
            }
            Phase2Outcome::State1(next) => state = next,
            Phase2Outcome::State2(_, b) => {
                return Ok(GirthRun {
                    estimate: GirthEstimate::PlusOne(2 * b + 1),
                    witness: None,
                    metrics: net.metrics(),
                    primitives: net.primitives(),
                })
            }
        }
    }
    Err(Fault::invariant("phase 2 iteration cap exceeded"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::oracle::{brute_girth, neighborhood, prune_degenerate, Girth};

    #[test]
    fn preprocess_tree_is_acyclic() {
        let mut net = CliqueNet::new(20);
        let (tree, _) = random_tree(20, 5);
        match preprocess(&tree, &mut net).unwrap() {
            Preprocessed::Early {
                estimate: GirthEstimate::Acyclic,
                ..
            } => {}
            _ => panic!("expected acyclic"),
        }
    }

    fn random_tree(n: usize, seed: u64) -> (Graph, ()) {
        let mut s = crate::rng::Stream::derive(seed, &[0x7472]);
        let mut g = Graph::empty(n);
        for v in 1..n as u32 {
            let p = s.next_below(v as u64) as u32;
            g.add_edge(v, p);
        }
        (g, ())
    }

    #[test]
    fn preprocess_sparse_solves_exactly() {
        let mut g = gen::cycle_graph(5);
        let mut g8 = Graph::empty(8);
        for (u, v) in g.edges() {
            g8.add_edge(u, v);
        }
        g8.add_edge(0, 5);
        g8.add_edge(1, 6);
        g8.add_edge(2, 7);
        g = g8;
        let mut net = CliqueNet::new(8);
        match preprocess(&g, &mut net).unwrap() {
            Preprocessed::Early {
                estimate: GirthEstimate::Exact(5),
                witness: Some(w),
            } => {
                assert!(validate_witness(&g, &w, 5));
            }
            _ => panic!("expected Exact(5)"),
        }
    }

    #[test]
    fn peel_replay_matches_sequential_prune() {
        for seed in 0..50 {
            let g = gen::gen_random(48, 0.06, seed);
            let records: Vec<(usize, u64)> = (0..48u32)
                .map(|v| {
                    (
                        g.degree(v),
                        g.neighbors(v).iter().fold(0u64, |a, &u| a ^ u as u64),
                    )
                })
                .collect();
            let alive = peel_replay(&records);
            let pruned_seq = prune_degenerate(&g);
            // Survivors are exactly the nodes with positive pruned degree.
            for v in 0..48u32 {
                assert_eq!(
                    alive[v as usize],
                    pruned_seq.degree(v) > 0,
                    "node {v} seed {seed}"
                );
            }
        }
    }

    #[test]
    fn preprocess_dense_prunes_like_oracle() {
        let g = gen::gen_random(64, 0.5, 9);
        assert!(g.m() > C_SPARSE * 64);
        let mut net = CliqueNet::new(64);
        match preprocess(&g, &mut net).unwrap() {
            Preprocessed::Pruned(p) => {
                assert_eq!(p, prune_degenerate(&g));
                // Dense random graphs have no degree<2 vertices.
                assert_eq!(p, g);
            }
            _ => panic!("expected pruned graph"),
        }
    }

    #[test]
    fn phase1_trivial_branch_gives_radius1_trees() {
        let g = gen::gen_random(64, 0.5, 3);
        let mut net = CliqueNet::new(64);
        match phase1_path_listing(&g, &mut net, Phase1Cfg::default()).unwrap() {
            Phase1Outcome::Knowledge(state) => {
                assert_eq!(state.radius, 1);
                for v in 0..64u32 {
                    assert_eq!(state.views[v as usize], neighborhood(&g, v, 1));
                    assert!(state.views[v as usize].is_tree());
                }
            }
            _ => panic!("expected radius-1 knowledge"),
        }
    }

    #[test]
    fn phase1_segment_machinery_learns_exact_neighborhoods() {
        // The (4,8)-cage: girth 8, so paths up to length 4 close no cycle
        // and the learned radius is 2. Segment count forced to keep the
        // subset family within n at this scale.
        let g = gen::gq3_incidence();
        let mut net = CliqueNet::new(80);
        let cfg = Phase1Cfg {
            k_override: Some(16),
            segments_override: Some(8),
        };
        match phase1_path_listing(&g, &mut net, cfg).unwrap() {
            Phase1Outcome::Knowledge(state) => {
                assert_eq!(state.radius, 2);
                for v in 0..80u32 {
                    assert_eq!(
                        state.views[v as usize],
                        neighborhood(&g, v, 2),
                        "node {v} learned a wrong neighborhood"
                    );
                }
            }
            _ => panic!("expected radius-2 knowledge"),
        }
    }

    #[test]
    fn phase1_segment_machinery_reports_short_cycle() {
        // A triangle beside a long cycle: girth 3 <= floor(k/4), so the
        // triangle is fully packed in some package and gets reported.
        let mut g = gen::cycle_graph(27);
        let mut g30 = Graph::empty(30);
        for (u, v) in g.edges() {
            g30.add_edge(u, v);
        }
        g30.add_edge(27, 28);
        g30.add_edge(28, 29);
        g30.add_edge(27, 29);
        g = g30;
        let mut net = CliqueNet::new(30);
        let cfg = Phase1Cfg {
            k_override: Some(12),
            segments_override: Some(6),
        };
        match phase1_path_listing(&g, &mut net, cfg).unwrap() {
            Phase1Outcome::Exact(3, w) => assert!(validate_witness(&g, &w, 3)),
            _ => panic!("expected Exact(3)"),
        }
    }

    #[test]
    fn phase1_outside_regime_faults() {
        let g = gen::heawood();
        let mut net = CliqueNet::new(14);
        // One segment cannot host 4-subsets.
        let cfg = Phase1Cfg {
            k_override: Some(16),
            segments_override: Some(1),
        };
        assert!(matches!(
            phase1_path_listing(&g, &mut net, cfg),
            Err(Fault::OutsideRegime(_))
        ));
    }

    #[test]
    fn phase2_doubles_then_reports_c10() {
        let g = gen::cycle_graph(10);
        let mut net = CliqueNet::new(10);
        let mut state = radius1_state(&g);
        let mut exact = None;
        for _ in 0..6 {
            let before = net.primitives();
            let outcome = phase2_double(&g, &state, &mut net).unwrap();
            // Each invocation spends a bounded number of charged primitives.
            assert!(net.primitives() - before <= 8);
            match outcome {
                Phase2Outcome::Exact(len, w) => {
                    exact = Some((len, w));
                    break;
                }
                Phase2Outcome::State1(next) => {
                    for v in 0..10u32 {
                        assert_eq!(next.views[v as usize], neighborhood(&g, v, next.radius));
                    }
                    state = next;
                }
                Phase2Outcome::State2(_, b) => {
                    assert!(2 * b + 1 == 9 || 2 * b + 1 == 10);
                    return;
                }
            }
        }
        let (len, w) = exact.expect("cycle must be found");
        assert_eq!(len, 10);
        assert!(validate_witness(&g, &w, 10));
    }

    #[test]
    fn phase2_planted_c8_resolves() {
        // C8 in a degree-2 background: two extra disjoint C20+ cycles so the
        // graph is not sparse enough to shortcut when driven directly.
        let g = gen::cycle_graph(8);
        let mut net = CliqueNet::new(8);
        let mut state = radius1_state(&g);
        loop {
            match phase2_double(&g, &state, &mut net).unwrap() {
                Phase2Outcome::Exact(8, w) => {
                    assert!(validate_witness(&g, &w, 8));
                    return;
                }
                Phase2Outcome::Exact(len, _) => panic!("wrong length {len}"),
                Phase2Outcome::State1(next) => state = next,
                Phase2Outcome::State2(_, b) => {
                    assert!([7, 8].contains(&(2 * b + 1)) || [8, 9].contains(&(2 * b + 2)));
                    return;
                }
            }
        }
    }

    #[test]
    fn phase2_rejects_cyclic_views() {
        let g = gen::complete_graph(4);
        let mut views = Vec::new();
        for v in 0..4u32 {
            views.push(neighborhood(&g, v, 2)); // contains triangles
        }
        let state = NeighborhoodState { radius: 2, views };
        let mut net = CliqueNet::new(4);
        assert!(matches!(
            phase2_double(&g, &state, &mut net),
            Err(Fault::Precondition(_))
        ));
    }

    #[test]
    fn driver_petersen_consistent() {
        let run = girth_plus_one(&gen::petersen()).unwrap();
        assert!(run.estimate.consistent_with(Girth::Finite(5)));
    }

    #[test]
    fn driver_c7_exact_via_sparse_path() {
        let run = girth_plus_one(&gen::cycle_graph(7)).unwrap();
        assert_eq!(run.estimate, GirthEstimate::Exact(7));
        assert!(run.witness.is_some());
    }

    #[test]
    fn driver_planted_c11_exact() {
        let (g, _) = gen::plant_cycle(&Graph::empty(12), 11, 2).unwrap();
        let run = girth_plus_one(&g).unwrap();
        assert_eq!(run.estimate, GirthEstimate::Exact(11));
    }

    #[test]
    fn driver_dense_matches_oracle() {
        for seed in 0..20 {
            let g = gen::gen_random(60, 0.35, seed);
            let run = girth_plus_one(&g).unwrap();
            let oracle = brute_girth(&g);
            assert!(
                run.estimate.consistent_with(oracle),
                "seed {seed}: {:?} vs {oracle:?}",
                run.estimate
            );
            if let Some(w) = &run.witness {
                assert!(validate_witness(&g, w, w.len()));
            }
        }
    }

    #[test]
    fn driver_never_acyclic_on_cyclic_input() {
        for seed in 0..30 {
            let g = gen::gen_random(40, 0.08, seed);
            let run = girth_plus_one(&g).unwrap();
            if brute_girth(&g) != Girth::Infinite {
                assert_ne!(run.estimate, GirthEstimate::Acyclic, "seed {seed}");
            }
        }
    }
}
