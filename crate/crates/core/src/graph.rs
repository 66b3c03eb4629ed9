//! Simple undirected graphs over vertex ids `0..n-1`, with sorted adjacency
//! lists. This is the common substrate of the sequential oracles, the
//! generators and the simulated topologies.

use crate::error::Fault;
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<u32>>,
}

impl Graph {
    /// An edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from an edge list. Self-loops are rejected; duplicate
    /// edges collapse.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Inserts edge {u, v} if not present. Panics on self-loops or
    /// out-of-range ids: those are construction bugs, not runtime inputs.
    pub fn add_edge(&mut self, u: u32, v: u32) {
        assert!(u != v, "self-loop {u}");
        assert!(
            (u as usize) < self.n && (v as usize) < self.n,
            "edge ({u},{v}) out of range"
        );
        if let Err(pos) = self.adj[u as usize].binary_search(&v) {
            self.adj[u as usize].insert(pos, v);
            let pos2 = self.adj[v as usize].binary_search(&u).unwrap_err();
            self.adj[v as usize].insert(pos2, u);
        }
    }

    /// Removes edge {u, v} if present.
    pub fn remove_edge(&mut self, u: u32, v: u32) {
        if let Ok(pos) = self.adj[u as usize].binary_search(&v) {
            self.adj[u as usize].remove(pos);
            let pos2 = self.adj[v as usize].binary_search(&u).unwrap();
            self.adj[v as usize].remove(pos2);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edge count m = (sum of degrees) / 2.
    pub fn m(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(|a| a.len()).max().unwrap_or(0)
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    /// Edges as (u, v) pairs with u < v, in lexicographic order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.m());
        for u in 0..self.n as u32 {
            for &v in &self.adj[u as usize] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn vertices(&self) -> impl Iterator<Item = u32> {
        0..self.n as u32
    }

    /// Checks the representation invariants: symmetry, sortedness, no loops.
    pub fn check_invariants(&self) -> Result<(), Fault> {
        for u in 0..self.n as u32 {
            let a = &self.adj[u as usize];
            if a.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Fault::invariant(format!(
                    "adjacency of {u} not strictly sorted"
                )));
            }
            for &v in a {
                if v == u {
                    return Err(Fault::invariant(format!("self-loop at {u}")));
                }
                if !self.has_edge(v, u) {
                    return Err(Fault::invariant(format!("asymmetric edge ({u},{v})")));
                }
            }
        }
        Ok(())
    }

    /// Serializes to the edge-list text format: first line `n m`, then one
    /// `u v` line per edge (0-based ids).
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.m());
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    /// Parses the edge-list text format. Lines starting with `#` are
    /// comments; tokens are whitespace-separated.
    pub fn parse_edge_list(text: &str) -> Result<Self, Fault> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Fault::precondition("empty graph file"))?;
        let mut it = header.split_whitespace();
        let n: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Fault::precondition("bad header: expected `n m`"))?;
        let m: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Fault::precondition("bad header: expected `n m`"))?;
        let mut g = Graph::empty(n);
        let mut seen = 0usize;
        for line in lines {
            let mut it = line.split_whitespace();
            let u: u32 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Fault::precondition(format!("bad edge line `{line}`")))?;
            let v: u32 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Fault::precondition(format!("bad edge line `{line}`")))?;
            if u == v || (u as usize) >= n || (v as usize) >= n {
                return Err(Fault::precondition(format!(
                    "invalid edge ({u},{v}) for n={n}"
                )));
            }
            g.add_edge(u, v);
            seen += 1;
        }
        if seen != m || g.m() != m {
            return Err(Fault::precondition(format!(
                "header claims m={m}, found {seen} lines / {} distinct edges",
                g.m()
            )));
        }
        Ok(g)
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n, self.m())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_edge_list() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (3, 4)]);
        let text = g.to_edge_list();
        let h = Graph::parse_edge_list(&text).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# a comment\n3 2\n\n0 1\n# another\n1 2\n";
        let g = Graph::parse_edge_list(text).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.m(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Graph::parse_edge_list("").is_err());
        assert!(Graph::parse_edge_list("2 1\n0 0\n").is_err());
        assert!(Graph::parse_edge_list("2 2\n0 1\n").is_err());
    }

    #[test]
    fn degree_sum_is_twice_m() {
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (4, 5)]);
        let sum: usize = g.vertices().map(|v| g.degree(v)).sum();
        assert_eq!(sum, 2 * g.m());
        g.check_invariants().unwrap();
    }
}
