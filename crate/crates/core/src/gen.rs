//! Graph generators: seeded random instances, classic named graphs, and the
//! planted constructions used by the experiment sweeps.

use crate::error::Fault;
use crate::graph::Graph;
use crate::rng::Stream;
use crate::witness::CycleWitness;

/// Erdős–Rényi G(n, p), deterministic per seed.
pub fn gen_random(n: usize, edge_prob: f64, seed: u64) -> Graph {
    assert!(n >= 1, "need at least one vertex");
    assert!((0.0..=1.0).contains(&edge_prob), "probability out of range");
    let mut g = Graph::empty(n);
    if edge_prob == 0.0 {
        return g;
    }
    let mut s = Stream::derive(seed, &[0x6772_6170, n as u64]);
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if edge_prob >= 1.0 || s.next_f64() < edge_prob {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Adds the edges of a simple cycle of length `len` on uniformly chosen
/// vertices of `g`, returning the new graph and the planted witness.
pub fn plant_cycle(g: &Graph, len: usize, seed: u64) -> Result<(Graph, CycleWitness), Fault> {
    if len < 3 {
        return Err(Fault::precondition("cycle length must be at least 3"));
    }
    if len > g.n() {
        return Err(Fault::precondition(format!(
            "cycle length {len} exceeds vertex count {}",
            g.n()
        )));
    }
    let mut s = Stream::derive(seed, &[0x706c_616e, len as u64]);
    let verts: Vec<u32> = s
        .sample_distinct(g.n() as u64, len)
        .into_iter()
        .map(|v| v as u32)
        .collect();
    let mut out = g.clone();
    for i in 0..len {
        out.add_edge(verts[i], verts[(i + 1) % len]);
    }
    Ok((out, CycleWitness::new(verts)))
}

pub fn cycle_graph(n: usize) -> Graph {
    assert!(n >= 3);
    let edges: Vec<_> = (0..n as u32).map(|i| (i, (i + 1) % n as u32)).collect();
    Graph::from_edges(n, &edges)
}

pub fn path_graph(n: usize) -> Graph {
    let edges: Vec<_> = (0..n.saturating_sub(1) as u32)
        .map(|i| (i, i + 1))
        .collect();
    Graph::from_edges(n, &edges)
}

pub fn complete_graph(n: usize) -> Graph {
    let mut g = Graph::empty(n);
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            g.add_edge(u, v);
        }
    }
    g
}

/// Star K_{1,k}: vertex 0 is the center.
pub fn star_graph(leaves: usize) -> Graph {
    let edges: Vec<_> = (1..=leaves as u32).map(|v| (0, v)).collect();
    Graph::from_edges(leaves + 1, &edges)
}

/// K_{a,b} with left part `0..a` and right part `a..a+b`.
pub fn complete_bipartite(a: usize, b: usize) -> Graph {
    let mut g = Graph::empty(a + b);
    for u in 0..a as u32 {
        for v in 0..b as u32 {
            g.add_edge(u, a as u32 + v);
        }
    }
    g
}

/// Petersen graph: outer C5 on 0..4, inner pentagram on 5..9, spokes i-(i+5).
pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5u32 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((i + 5, (i + 2) % 5 + 5));
    }
    Graph::from_edges(10, &edges)
}

/// Heawood graph: the (3,6)-cage, 14 vertices, girth 6.
pub fn heawood() -> Graph {
    // Bipartite double of Z7 with chords {1, 2, 4} (quadratic residues mod 7).
    let mut g = Graph::empty(14);
    for i in 0..7u32 {
        for &r in &[1u32, 2, 4] {
            g.add_edge(i, 7 + (i + r) % 7);
        }
    }
    g
}

/// Incidence graph of the symplectic generalized quadrangle W(3): the
/// (4,8)-cage on 80 vertices, 4-regular, girth 8. Points of PG(3,3) are
/// vertices 0..39, totally isotropic lines are vertices 40..79.
pub fn gq3_incidence() -> Graph {
    // Canonical projective points: first nonzero coordinate equals 1.
    let mut points: Vec<[u8; 4]> = Vec::new();
    for a in 0..3u8 {
        for b in 0..3u8 {
            for c in 0..3u8 {
                for d in 0..3u8 {
                    let v = [a, b, c, d];
                    if v == [0, 0, 0, 0] {
                        continue;
                    }
                    let first = v.iter().copied().find(|&x| x != 0).unwrap();
                    if first == 1 {
                        points.push(v);
                    }
                }
            }
        }
    }
    assert_eq!(points.len(), 40);

    // Symplectic form over GF(3).
    let form = |x: &[u8; 4], y: &[u8; 4]| -> u8 {
        let t = x[0] as i32 * y[1] as i32 - x[1] as i32 * y[0] as i32 + x[2] as i32 * y[3] as i32
            - x[3] as i32 * y[2] as i32;
        t.rem_euclid(3) as u8
    };
    let normalize = |v: [i32; 4]| -> Option<usize> {
        let v: Vec<u8> = v.iter().map(|&x| x.rem_euclid(3) as u8).collect();
        if v == [0, 0, 0, 0] {
            return None;
        }
        let first = v.iter().copied().find(|&x| x != 0).unwrap();
        // Scale so the first nonzero coordinate is 1 (2 * 2 = 1 mod 3).
        let scale: u8 = if first == 1 { 1 } else { 2 };
        let canon: Vec<u8> = v.iter().map(|&x| (x * scale) % 3).collect();
        points.iter().position(|p| p.as_slice() == canon.as_slice())
    };

    // Totally isotropic lines: spans {x, y, x+y, x+2y} of isotropic pairs.
    let mut lines: Vec<Vec<usize>> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for i in 0..40 {
        for j in i + 1..40 {
            if form(&points[i], &points[j]) != 0 {
                continue;
            }
            let (x, y) = (points[i], points[j]);
            let mut line = vec![i, j];
            for lambda in 1..3i32 {
                let comb = [
                    x[0] as i32 + lambda * y[0] as i32,
                    x[1] as i32 + lambda * y[1] as i32,
                    x[2] as i32 + lambda * y[2] as i32,
                    x[3] as i32 + lambda * y[3] as i32,
                ];
                line.push(normalize(comb).expect("span point"));
            }
            line.sort_unstable();
            if seen.insert(line.clone()) {
                lines.push(line);
            }
        }
    }
    assert_eq!(lines.len(), 40, "W(3) has 40 totally isotropic lines");

    let mut g = Graph::empty(80);
    for (li, line) in lines.iter().enumerate() {
        for &pt in line {
            g.add_edge(pt as u32, 40 + li as u32);
        }
    }
    g
}

/// Disjoint copies of K_{side,side} padded with isolated vertices up to `n`.
/// Every Hamiltonian cycle of a block is a planted C_{2*side} all of whose
/// nodes have degree `side`.
pub fn biclique_blooms(n: usize, side: usize, blocks: usize) -> Graph {
    let mut g = Graph::empty(n);
    assert!(blocks * 2 * side <= n, "blocks do not fit");
    for b in 0..blocks {
        let base = (b * 2 * side) as u32;
        for u in 0..side as u32 {
            for v in 0..side as u32 {
                g.add_edge(base + u, base + side as u32 + v);
            }
        }
    }
    g
}

/// A hub vertex (id 0) sitting on `blocks` otherwise-disjoint K_{side,side}
/// copies (as a left vertex of each), plus `leaves` pendant neighbors.
/// Every block contributes C_{2*side} cycles through the hub, so the hub is
/// a high-degree cycle node and its leaves are cycle-free neighbors.
pub fn hub_blooms(side: usize, blocks: usize, leaves: usize) -> Graph {
    // Block b occupies vertices 1 + b*(2*side-1) .. +(2*side-1): side-1
    // further left vertices then side right vertices. Leaves follow.
    let block_sz = 2 * side - 1;
    let n = 1 + blocks * block_sz + leaves;
    let mut g = Graph::empty(n);
    for b in 0..blocks {
        let base = 1 + b * block_sz;
        let left: Vec<u32> = std::iter::once(0u32)
            .chain((0..side - 1).map(|i| (base + i) as u32))
            .collect();
        let right: Vec<u32> = (0..side).map(|i| (base + side - 1 + i) as u32).collect();
        for &u in &left {
            for &v in &right {
                g.add_edge(u, v);
            }
        }
    }
    let leaf_base = 1 + blocks * block_sz;
    for l in 0..leaves {
        g.add_edge(0, (leaf_base + l) as u32);
    }
    g
}

/// A cycle C_len on vertices 0..len-1 with `leaves` pendant neighbors on
/// vertex 0, padded with isolated vertices up to `n`. The girth stays `len`
/// and vertex 0 is a heavy cycle node.
pub fn pendant_hub_cycle(n: usize, len: usize, leaves: usize) -> Graph {
    assert!(len + leaves <= n);
    let mut g = Graph::empty(n);
    for i in 0..len as u32 {
        g.add_edge(i, (i + 1) % len as u32);
    }
    for l in 0..leaves as u32 {
        g.add_edge(0, len as u32 + l);
    }
    g
}

/// Random bipartite graph (odd-cycle free) on parts of size a and b.
pub fn gen_bipartite(a: usize, b: usize, edge_prob: f64, seed: u64) -> Graph {
    let mut g = Graph::empty(a + b);
    let mut s = Stream::derive(seed, &[0x0062_6970, a as u64, b as u64]);
    for u in 0..a as u32 {
        for v in 0..b as u32 {
            if s.next_f64() < edge_prob {
                g.add_edge(u, a as u32 + v);
            }
        }
    }
    g
}

/// Parses a generator spec like `er:n=64,p=0.2`, `cycle:n=9`, `petersen`.
pub fn parse_spec(spec: &str, seed: u64) -> Result<Graph, Fault> {
    let s = spec.trim().to_ascii_lowercase();
    let (kind, args) = match s.split_once(':') {
        Some((k, a)) => (k, a),
        None => (s.as_str(), ""),
    };
    let mut n: Option<usize> = None;
    let mut p: Option<f64> = None;
    let mut len: Option<usize> = None;
    let mut a: Option<usize> = None;
    let mut b: Option<usize> = None;
    for kv in args.split(',').filter(|t| !t.is_empty()) {
        let (key, val) = kv
            .split_once('=')
            .ok_or_else(|| Fault::precondition(format!("bad generator arg `{kv}`")))?;
        match key {
            "n" => n = Some(val.parse().map_err(|_| Fault::precondition("bad n"))?),
            "p" => p = Some(val.parse().map_err(|_| Fault::precondition("bad p"))?),
            "len" => len = Some(val.parse().map_err(|_| Fault::precondition("bad len"))?),
            "a" => a = Some(val.parse().map_err(|_| Fault::precondition("bad a"))?),
            "b" => b = Some(val.parse().map_err(|_| Fault::precondition("bad b"))?),
            _ => {
                return Err(Fault::precondition(format!(
                    "unknown generator arg `{key}`"
                )))
            }
        }
    }
    let need_n = || n.ok_or_else(|| Fault::precondition(format!("`{kind}` needs n=")));
    match kind {
        "er" => {
            let n = need_n()?;
            let p = p.ok_or_else(|| Fault::precondition("`er` needs p="))?;
            Ok(gen_random(n, p, seed))
        }
        "cycle" => Ok(cycle_graph(need_n()?)),
        "path" => Ok(path_graph(need_n()?)),
        "complete" => Ok(complete_graph(need_n()?)),
        "star" => Ok(star_graph(need_n()?)),
        "bipartite" => {
            let a = a.ok_or_else(|| Fault::precondition("`bipartite` needs a="))?;
            let b = b.ok_or_else(|| Fault::precondition("`bipartite` needs b="))?;
            match p {
                Some(p) => Ok(gen_bipartite(a, b, p, seed)),
                None => Ok(complete_bipartite(a, b)),
            }
        }
        "petersen" => Ok(petersen()),
        "heawood" => Ok(heawood()),
        "gq3" => Ok(gq3_incidence()),
        "planted" => {
            let n = need_n()?;
            let len = len.ok_or_else(|| Fault::precondition("`planted` needs len="))?;
            let base = gen_random(n, p.unwrap_or(0.0), seed);
            let (g, _) = plant_cycle(&base, len, seed ^ 0x9e37)?;
            Ok(g)
        }
        _ => Err(Fault::precondition(format!("unknown generator `{kind}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_extremes() {
        assert_eq!(gen_random(5, 0.0, 1).m(), 0);
        assert_eq!(gen_random(5, 1.0, 1).m(), 10);
    }

    #[test]
    fn er_deterministic_per_seed() {
        let a = gen_random(100, 0.1, 7);
        let b = gen_random(100, 0.1, 7);
        assert_eq!(a, b);
        let c = gen_random(100, 0.1, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn plant_cycle_on_edgeless() {
        let (g, w) = plant_cycle(&Graph::empty(6), 6, 3).unwrap();
        assert_eq!(g.m(), 6);
        assert!(crate::witness::validate_witness(&g, &w, 6));
        let (g4, w4) = plant_cycle(&Graph::empty(10), 4, 3).unwrap();
        assert_eq!(g4.m(), 4);
        assert!(crate::witness::validate_witness(&g4, &w4, 4));
        assert_eq!(
            crate::oracle::brute_girth(&g4),
            crate::oracle::Girth::Finite(4)
        );
    }

    #[test]
    fn plant_cycle_rejects_oversize() {
        assert!(plant_cycle(&Graph::empty(4), 5, 0).is_err());
    }

    #[test]
    fn named_graphs_shape() {
        assert_eq!(petersen().m(), 15);
        assert_eq!(heawood().m(), 21);
        let g = gq3_incidence();
        assert_eq!(g.n(), 80);
        assert_eq!(g.m(), 160);
        assert_eq!(g.max_degree(), 4);
        g.check_invariants().unwrap();
    }

    #[test]
    fn blooms_shape() {
        let g = biclique_blooms(256, 4, 32);
        assert_eq!(g.m(), 32 * 16);
        assert_eq!(g.max_degree(), 4);
        let h = hub_blooms(4, 3, 10);
        assert_eq!(h.degree(0), 3 * 4 + 10);
    }

    #[test]
    fn spec_grammar() {
        assert_eq!(parse_spec("er:n=64,p=0.2", 1).unwrap().n(), 64);
        assert_eq!(parse_spec("cycle:n=9", 1).unwrap().m(), 9);
        assert_eq!(parse_spec("petersen", 1).unwrap().n(), 10);
        assert!(parse_spec("warp:n=2", 1).is_err());
        assert!(parse_spec("er:n=4", 1).is_err());
    }
}
