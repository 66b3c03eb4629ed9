//! Reduction from C6 detection to directed triangle detection: after ruling
//! out heavy 6-cycles and deleting degree >= sqrt(n) nodes, color nodes in
//! [6] and connect u -> v whenever a bridge w satisfies
//! c(u)+2 = c(w)+1 = c(v) (mod 6). The colored graph then has a correctly
//! colored C6 exactly when the directed graph has a triangle.

use crate::engine::RunMetrics;
use crate::error::Fault;
use crate::graph::Graph;
use crate::pattern::SubgraphPattern;
use crate::rng::Stream;
use crate::witness::CycleWitness;

use super::heavy::{detect_heavy_c2k, HeavyCfg};

/// Directed graph over the same vertex ids, out-neighbor lists sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    out: Vec<Vec<u32>>,
}

impl DirectedGraph {
    pub fn empty(n: usize) -> Self {
        DirectedGraph {
            n,
            out: vec![Vec::new(); n],
        }
    }

    pub fn add_arc(&mut self, u: u32, v: u32) {
        assert!(u != v, "self-loop");
        if let Err(pos) = self.out[u as usize].binary_search(&v) {
            self.out[u as usize].insert(pos, v);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn out_neighbors(&self, v: u32) -> &[u32] {
        &self.out[v as usize]
    }

    pub fn has_arc(&self, u: u32, v: u32) -> bool {
        self.out[u as usize].binary_search(&v).is_ok()
    }

    pub fn arcs(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for u in 0..self.n as u32 {
            for &v in &self.out[u as usize] {
                out.push((u, v));
            }
        }
        out
    }

    /// All directed triangles (u, v, w) with u -> v -> w -> u, canonicalized
    /// to start at the smallest vertex.
    pub fn directed_triangles(&self) -> Vec<(u32, u32, u32)> {
        let mut found = Vec::new();
        for u in 0..self.n as u32 {
            for &v in &self.out[u as usize] {
                for &w in &self.out[v as usize] {
                    if w != u && self.has_arc(w, u) && u < v && u < w {
                        found.push((u, v, w));
                    }
                }
            }
        }
        found
    }
}

/// Per-node colors in [6] for one reduction round.
#[derive(Clone, Debug)]
pub struct ColorAssignment {
    pub colors: Vec<u8>,
}

impl ColorAssignment {
    pub fn draw(n: usize, seed: u64, round: u64) -> Self {
        let colors = (0..n as u64)
            .map(|v| Stream::derive(seed, &[0x726564, round, v]).next_below(6) as u8)
            .collect();
        ColorAssignment { colors }
    }
}

#[derive(Clone, Debug)]
pub enum ReduceOutcome {
    /// A heavy 6-cycle surfaced before the reduction was built.
    EarlyFound(CycleWitness),
    Reduced {
        /// The graph after deleting degree >= sqrt(n) nodes.
        truncated: Graph,
        colors: ColorAssignment,
        directed: DirectedGraph,
        metrics: RunMetrics,
    },
}

/// Builds the directed graph for a given coloring of (the truncated) g.
pub fn directed_from_coloring(g: &Graph, colors: &[u8]) -> DirectedGraph {
    let mut d = DirectedGraph::empty(g.n());
    for w in g.vertices() {
        let cw = colors[w as usize] as u32;
        for &u in g.neighbors(w) {
            if colors[u as usize] as u32 % 6 != (cw + 5) % 6 {
                continue; // need c(u) + 1 = c(w)
            }
            for &v in g.neighbors(w) {
                if v == u {
                    continue;
                }
                if colors[v as usize] as u32 % 6 == (cw + 1) % 6 {
                    d.add_arc(u, v);
                }
            }
        }
    }
    d
}

/// True iff the colored graph has a 6-cycle colored 0..5 consecutively in
/// some rotation/direction (exhaustive over all C6 copies).
pub fn well_colored_c6_exists(g: &Graph, colors: &[u8]) -> Result<bool, Fault> {
    let c6 = SubgraphPattern::cycle(6);
    let instances = crate::oracle::enumerate_subgraph(g, &c6)?;
    for inst in instances {
        let cyc = &inst.mapping;
        for dir in [1i64, -1] {
            'shift: for shift in 0..6i64 {
                for (i, &v) in cyc.iter().enumerate() {
                    let want = ((dir * i as i64 + shift).rem_euclid(6)) as u8;
                    if colors[v as usize] != want {
                        continue 'shift;
                    }
                }
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// The reduction: heavy-C6 iterations first, then degree truncation, one
/// color draw, and the directed graph.
pub fn reduce_c6_to_directed_triangles(
    g: &Graph,
    heavy_iterations: u64,
    seed: u64,
) -> Result<ReduceOutcome, Fault> {
    let mut metrics = RunMetrics::default();
    if heavy_iterations > 0 {
        let heavy = detect_heavy_c2k(g, 3, HeavyCfg::god(heavy_iterations), seed)?;
        metrics.absorb(&heavy.metrics);
        if let Some(w) = heavy.witness {
            return Ok(ReduceOutcome::EarlyFound(w));
        }
    }
    let n = g.n();
    let cap = (n as f64).sqrt();
    let mut truncated = Graph::empty(n);
    for (u, v) in g.edges() {
        if (g.degree(u) as f64) < cap && (g.degree(v) as f64) < cap {
            truncated.add_edge(u, v);
        }
    }
    // Every surviving node broadcasts its remaining neighbors and color;
    // each node then knows its directed arcs and bridges. The exchange is
    // degree-bounded by sqrt(n), charged accordingly.
    let deg_sum: u64 = truncated
        .vertices()
        .map(|v| truncated.degree(v) as u64)
        .sum();
    metrics.rounds += (cap.ceil() as u64).max(1);
    metrics.words_total += 2 * deg_sum;
    let colors = ColorAssignment::draw(n, seed, 0);
    let directed = directed_from_coloring(&truncated, &colors.colors);
    Ok(ReduceOutcome::Reduced {
        truncated,
        colors,
        directed,
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn c6_cycle_order_colors_give_two_triangles() {
        let g = gen::cycle_graph(6);
        let colors: Vec<u8> = (0..6).collect();
        let d = directed_from_coloring(&g, &colors);
        let tris = d.directed_triangles();
        assert_eq!(tris.len(), 2);
        assert!(tris.contains(&(0, 2, 4)));
        assert!(tris.contains(&(1, 3, 5)));
    }

    #[test]
    fn c6_free_never_produces_directed_triangle() {
        let g = gen::cycle_graph(5);
        for round in 0..100 {
            let colors = ColorAssignment::draw(5, 77, round);
            let d = directed_from_coloring(&g, &colors.colors);
            assert!(d.directed_triangles().is_empty(), "round {round}");
        }
    }

    #[test]
    fn equivalence_on_random_graphs() {
        for seed in 0..10 {
            let g = gen::gen_random(12, 0.25, seed);
            if g.max_degree() as f64 >= (12f64).sqrt() {
                continue;
            }
            for round in 0..20 {
                let colors = ColorAssignment::draw(12, seed * 31 + 7, round);
                let d = directed_from_coloring(&g, &colors.colors);
                let lhs = !d.directed_triangles().is_empty();
                let rhs = well_colored_c6_exists(&g, &colors.colors).unwrap();
                assert_eq!(lhs, rhs, "seed {seed} round {round}");
            }
        }
    }

    #[test]
    fn heavy_c6_shortcircuits() {
        let g = gen::hub_blooms(3, 4, 40);
        match reduce_c6_to_directed_triangles(&g, 40_000, 3).unwrap() {
            ReduceOutcome::EarlyFound(w) => {
                assert!(crate::witness::validate_witness(&g, &w, 6));
            }
            ReduceOutcome::Reduced { .. } => panic!("expected an early heavy detection"),
        }
    }

    #[test]
    fn truncation_removes_high_degree() {
        let g = gen::star_graph(20); // center degree 20 >= sqrt(21)
        match reduce_c6_to_directed_triangles(&g, 0, 1).unwrap() {
            ReduceOutcome::Reduced { truncated, .. } => {
                assert_eq!(truncated.m(), 0);
            }
            _ => panic!("no heavy cycle exists"),
        }
    }
}
