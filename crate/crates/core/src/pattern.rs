//! Subgraph patterns H on nodes `z_0..z_{p-1}`, and the canonical form of a
//! listed instance.

use crate::error::Fault;
use std::collections::BTreeSet;

/// A small pattern graph H. `back_degrees()[i]` counts edges {z_i, z_t} with
/// t < i, so the back degrees sum to the edge count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphPattern {
    p: usize,
    edges: BTreeSet<(usize, usize)>,
    name: String,
}

impl SubgraphPattern {
    pub fn new(p: usize, edges: &[(usize, usize)], name: impl Into<String>) -> Result<Self, Fault> {
        if p == 0 {
            return Err(Fault::precondition("pattern needs at least one node"));
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b || a >= p || b >= p {
                return Err(Fault::precondition(format!(
                    "invalid pattern edge ({a},{b})"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(SubgraphPattern {
            p,
            edges: set,
            name: name.into(),
        })
    }

    /// Complete graph K_p.
    pub fn clique(p: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..p {
            for j in i + 1..p {
                edges.push((i, j));
            }
        }
        Self::new(p, &edges, format!("k{p}")).unwrap()
    }

    /// Cycle C_p (p >= 3).
    pub fn cycle(p: usize) -> Self {
        assert!(p >= 3);
        let edges: Vec<_> = (0..p).map(|i| (i, (i + 1) % p)).collect();
        Self::new(p, &edges, format!("c{p}")).unwrap()
    }

    /// Path on p nodes (p - 1 edges).
    pub fn path(p: usize) -> Self {
        let edges: Vec<_> = (0..p.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Self::new(p, &edges, format!("p{p}")).unwrap()
    }

    /// Single edge K_2.
    pub fn single_edge() -> Self {
        Self::new(2, &[(0, 1)], "k2").unwrap()
    }

    /// Parses a pattern name: `k3`, `c4`, `p4`, ... or `edges:p;a-b,c-d,...`.
    pub fn parse(spec: &str) -> Result<Self, Fault> {
        let s = spec.trim().to_ascii_lowercase();
        if let Some(rest) = s.strip_prefix("edges:") {
            let (p_str, list) = rest
                .split_once(';')
                .ok_or_else(|| Fault::precondition("edge spec is `edges:p;a-b,c-d`"))?;
            let p: usize = p_str
                .parse()
                .map_err(|_| Fault::precondition("bad node count in edge spec"))?;
            let mut edges = Vec::new();
            for tok in list.split(',').filter(|t| !t.is_empty()) {
                let (a, b) = tok
                    .split_once('-')
                    .ok_or_else(|| Fault::precondition(format!("bad edge token `{tok}`")))?;
                let a: usize = a.parse().map_err(|_| Fault::precondition("bad edge id"))?;
                let b: usize = b.parse().map_err(|_| Fault::precondition("bad edge id"))?;
                edges.push((a, b));
            }
            return Self::new(p, &edges, s.clone());
        }
        let (kind, num) = s.split_at(1);
        let p: usize = num
            .parse()
            .map_err(|_| Fault::precondition(format!("unknown pattern `{spec}`")))?;
        match kind {
            "k" => Ok(Self::clique(p)),
            "c" if p >= 3 => Ok(Self::cycle(p)),
            "p" if p >= 2 => Ok(Self::path(p)),
            _ => Err(Fault::precondition(format!("unknown pattern `{spec}`"))),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Edge count k.
    pub fn k(&self) -> usize {
        self.edges.len()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// d_i = |{ {z_i, z_t} in E_H : t < i }|.
    pub fn back_degrees(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.p];
        for &(a, b) in &self.edges {
            d[a.max(b)] += 1;
        }
        d
    }

    /// Back-edges of z_i: the t < i with {z_i, z_t} in E_H.
    pub fn back_edges(&self, i: usize) -> Vec<usize> {
        (0..i).filter(|&t| self.has_edge(i, t)).collect()
    }
}

/// One listed H-copy. Instances are identified by the edge set of the image:
/// two embeddings that differ only by an automorphism of H collapse, while
/// different edge subsets on the same vertex set stay distinct.
#[derive(Clone, Debug)]
pub struct Instance {
    /// Sorted vertex set of the image.
    pub vertices: Vec<u32>,
    /// Image edge set, normalized (u < v) and sorted; the canonical key.
    pub edges: Vec<(u32, u32)>,
    /// One witness mapping z_i -> vertex.
    pub mapping: Vec<u32>,
}

impl Instance {
    pub fn from_mapping(pattern: &SubgraphPattern, mapping: &[u32]) -> Self {
        let mut vertices: Vec<u32> = mapping.to_vec();
        vertices.sort_unstable();
        let mut edges: Vec<(u32, u32)> = pattern
            .edges()
            .map(|(a, b)| {
                let (x, y) = (mapping[a], mapping[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Instance {
            vertices,
            edges,
            mapping: mapping.to_vec(),
        }
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.edges == other.edges
    }
}
impl Eq for Instance {}
impl PartialOrd for Instance {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Instance {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.edges.cmp(&other.edges)
    }
}
