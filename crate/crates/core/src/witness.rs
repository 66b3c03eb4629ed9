//! Cycle certificates. Every detection protocol returns its claim as an
//! ordered vertex sequence that is checked against the host graph.

use crate::graph::Graph;

/// An ordered vertex sequence `v_0 .. v_{l-1}` claimed to be a simple cycle
/// (consecutive pairs and the closing pair are edges).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleWitness {
    pub vertices: Vec<u32>,
}

impl CycleWitness {
    pub fn new(vertices: Vec<u32>) -> Self {
        CycleWitness { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// True iff `w` is a simple cycle of exactly `expected_len` in `g`.
pub fn validate_witness(g: &Graph, w: &CycleWitness, expected_len: usize) -> bool {
    let l = w.vertices.len();
    if l != expected_len || l < 3 {
        return false;
    }
    let mut seen = std::collections::HashSet::with_capacity(l);
    for &v in &w.vertices {
        if (v as usize) >= g.n() || !seen.insert(v) {
            return false;
        }
    }
    (0..l).all(|i| g.has_edge(w.vertices[i], w.vertices[(i + 1) % l]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn c6_full_cycle_valid() {
        let g = gen::cycle_graph(6);
        assert!(validate_witness(
            &g,
            &CycleWitness::new(vec![0, 1, 2, 3, 4, 5]),
            6
        ));
    }

    #[test]
    fn missing_edge_rejected() {
        let g = gen::cycle_graph(6);
        assert!(!validate_witness(&g, &CycleWitness::new(vec![0, 1, 2]), 3));
    }

    #[test]
    fn k4_triangle_valid() {
        let g = gen::complete_graph(4);
        assert!(validate_witness(&g, &CycleWitness::new(vec![0, 1, 2]), 3));
    }

    #[test]
    fn repeats_and_length_mismatch_rejected() {
        let g = gen::complete_graph(5);
        assert!(!validate_witness(&g, &CycleWitness::new(vec![0, 1, 0]), 3));
        assert!(!validate_witness(&g, &CycleWitness::new(vec![0, 1, 2]), 4));
    }
}
