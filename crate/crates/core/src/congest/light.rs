//! Light even-cycle detection: color-coded BFS over the subgraph of nodes
//! with degree at most n^(1/k). A 2k-cycle whose nodes draw consecutive
//! colors funnels the 0-colored node's token along both arcs to the
//! k-colored node, which then holds the same token from a (k-1)- and a
//! (k+1)-colored neighbor.

use crate::engine::{self, NodeProgram, RunEnd, RunMetrics, StepCtx, Topology, Word};
use crate::error::Fault;
use crate::graph::Graph;
use crate::witness::{validate_witness, CycleWitness};
use std::collections::HashMap;
use std::rc::Rc;

use super::{color_at, color_stream, degree_cap, TAG_TOKEN};

#[derive(Clone, Debug)]
pub struct LightOutcome {
    pub witness: Option<CycleWitness>,
    pub metrics: RunMetrics,
    pub trials_used: u64,
}

/// The paper's trial budget Theta((2k)^{2k}) with constant 3, saturating.
pub fn paper_light_budget(k: usize) -> u64 {
    let base = (2 * k) as u64;
    (0..2 * k).fold(3u64, |acc, _| acc.saturating_mul(base))
}

struct Receipt {
    pred: u32,
    from_minus: Option<u32>,
    from_plus: Option<u32>,
    forwarded: bool,
}

struct LightProgram {
    me: u32,
    color: u8,
    k: u8,
    low: bool,
    colors: Rc<Vec<u8>>,
    neighbors: Rc<Vec<Vec<u32>>>,
    receipts: HashMap<u32, Receipt>,
    token_words: u64,
    detection: Option<(u32, u32, u32)>, // (origin, sender_minus, sender_plus)
}

impl LightProgram {
    fn forward_color(&self) -> Option<u8> {
        let c = self.color as u32;
        let k = self.k as u32;
        if (1..k).contains(&c) {
            Some((c + 1) as u8)
        } else if c == 0 {
            None // origins handled at round 0
        } else if c > k && c < 2 * k {
            Some((c - 1) as u8)
        } else {
            None // the detector color k never forwards
        }
    }

    fn expected_sender_color(&self) -> Option<u8> {
        let c = self.color as u32;
        let k = self.k as u32;
        if (1..k).contains(&c) {
            Some((c - 1) as u8)
        } else if c > k && c < 2 * k {
            Some(((c + 1) % (2 * k)) as u8)
        } else {
            None
        }
    }
}

impl NodeProgram for LightProgram {
    type Output = ();

    fn step(&mut self, ctx: &mut StepCtx<'_>, inbox: &[(u32, Word)]) {
        let me = self.me;
        let two_k = 2 * self.k as u32;
        if ctx.round() == 0 {
            if self.color == 0 && self.low {
                for &v in &self.neighbors[me as usize] {
                    let c = self.colors[v as usize] as u32;
                    if c == 1 || c + 1 == two_k {
                        ctx.send(v, Word::new(&[TAG_TOKEN, me as u64, 1]));
                    }
                }
            }
            return;
        }
        for &(from, w) in inbox {
            debug_assert_eq!(w.get(0), TAG_TOKEN);
            let origin = w.get(1) as u32;
            let hops = w.get(2);
            self.token_words += 1;
            let from_color = self.colors[from as usize];
            if self.color as u32 == self.k as u32 {
                // Detector: needs the same origin from both sides.
                let entry = self.receipts.entry(origin).or_insert(Receipt {
                    pred: from,
                    from_minus: None,
                    from_plus: None,
                    forwarded: false,
                });
                if from_color as u32 + 1 == self.k as u32 {
                    entry.from_minus.get_or_insert(from);
                } else if from_color as u32 == self.k as u32 + 1 {
                    entry.from_plus.get_or_insert(from);
                }
                if self.detection.is_none() {
                    if let (Some(a), Some(b)) = (entry.from_minus, entry.from_plus) {
                        self.detection = Some((origin, a, b));
                    }
                }
                continue;
            }
            // Interior node: record the first receipt per origin, forward
            // once along the color gradient, low-degree nodes only.
            if Some(from_color) != self.expected_sender_color() {
                continue;
            }
            let first = !self.receipts.contains_key(&origin);
            let entry = self.receipts.entry(origin).or_insert(Receipt {
                pred: from,
                from_minus: None,
                from_plus: None,
                forwarded: false,
            });
            if first && self.low && !entry.forwarded {
                entry.forwarded = true;
                if let Some(next) = self.forward_color() {
                    for &v in &self.neighbors[me as usize] {
                        if self.colors[v as usize] == next {
                            ctx.send(v, Word::new(&[TAG_TOKEN, origin as u64, hops + 1]));
                        }
                    }
                }
            }
        }
    }

    fn output(&self) -> Option<()> {
        None
    }
}

/// Walks first-receipt predecessor links from `cur` back to `origin`.
fn walk_preds(programs: &[LightProgram], mut cur: u32, origin: u32) -> Option<Vec<u32>> {
    let mut path = vec![cur];
    while cur != origin {
        cur = programs[cur as usize].receipts.get(&origin)?.pred;
        path.push(cur);
        if path.len() > programs.len() {
            return None;
        }
    }
    Some(path)
}

/// One detection, reconstructed into an ordered cycle.
fn reconstruct(
    programs: &[LightProgram],
    detector: u32,
    origin: u32,
    s_minus: u32,
    s_plus: u32,
) -> Option<Vec<u32>> {
    let asc = walk_preds(programs, s_minus, origin)?; // s_minus .. origin
    let desc = walk_preds(programs, s_plus, origin)?; // s_plus .. origin
    let mut cycle: Vec<u32> = asc.iter().rev().copied().collect(); // origin .. s_minus
    cycle.push(detector);
    cycle.extend(desc.iter().take(desc.len() - 1)); // s_plus .. (excl origin)
    Some(cycle)
}

/// Runs up to `trials` independent color-coded trials, stopping at the
/// first validated witness. The per-trial color exchange with neighbors is
/// content-oblivious, so it is charged (one round, one word per directed
/// edge) rather than event-simulated.
pub fn detect_light_c2k(
    g: &Graph,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<LightOutcome, Fault> {
    if !(2..=5).contains(&k) {
        return Err(Fault::precondition("light detector supports k in 2..=5"));
    }
    let n = g.n();
    let cap = degree_cap(n, 1.0 / k as f64);
    // Compact the active subgraph: isolated vertices can never touch a
    // message, and their randomness comes from their original ids, so the
    // compaction is observationally equivalent.
    let active: Vec<u32> = g.vertices().filter(|&v| g.degree(v) > 0).collect();
    let compact: HashMap<u32, u32> = active
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as u32))
        .collect();
    let an = active.len();
    let mut cg = Graph::empty(an);
    for &v in &active {
        for &u in g.neighbors(v) {
            if v < u {
                cg.add_edge(compact[&v], compact[&u]);
            }
        }
    }
    let neighbors: Rc<Vec<Vec<u32>>> =
        Rc::new((0..an as u32).map(|v| cg.neighbors(v).to_vec()).collect());
    let low: Vec<bool> = active
        .iter()
        .map(|&v| (g.degree(v) as f64) <= cap)
        .collect();
    let assert_congestion = active.iter().all(|&v| (g.degree(v) as f64) <= cap);
    let topo = Topology::congest(cg);
    let exchange_words = 2 * topo.graph.m() as u64;
    let two_k = (2 * k) as u64;

    let mut metrics = RunMetrics::default();
    for trial in 0..trials {
        let cs = color_stream(seed, 0x6c69_6768, trial);
        let colors: Rc<Vec<u8>> =
            Rc::new(active.iter().map(|&v| color_at(&cs, v, two_k)).collect());
        metrics.rounds += 1;
        metrics.words_total += exchange_words;
        metrics.peak_link_load = metrics.peak_link_load.max(1);

        // A trial moves only if some low 0-colored node can emit a token.
        let viable = (0..an).any(|v| {
            colors[v] == 0
                && low[v]
                && neighbors[v].iter().any(|&u| {
                    let c = colors[u as usize] as u64;
                    c == 1 || c + 1 == two_k
                })
        });
        if !viable {
            continue;
        }

        let programs: Vec<LightProgram> = (0..an as u32)
            .map(|v| LightProgram {
                me: v,
                color: colors[v as usize],
                k: k as u8,
                low: low[v as usize],
                colors: Rc::clone(&colors),
                neighbors: Rc::clone(&neighbors),
                receipts: HashMap::new(),
                token_words: 0,
                detection: None,
            })
            .collect();
        let limit = 8 + 4 * (k as u64) * an as u64;
        let res = engine::run(&topo, programs, limit, seed ^ trial);
        if res.end == RunEnd::RoundLimit {
            return Err(Fault::Timeout {
                limit,
                rounds: res.metrics.rounds,
            });
        }
        metrics.absorb(&res.metrics);

        if assert_congestion {
            for (v, p) in res.programs.iter().enumerate() {
                let c = p.color as usize;
                let i = c.min(2 * k - c);
                if i >= 1 && i <= k {
                    let bound = ((n as f64).ln() * i as f64 / k as f64).exp().ceil() + 1e-6;
                    if (p.token_words as f64) > bound {
                        return Err(Fault::invariant(format!(
                            "light congestion: node {v} at color distance {i} queued {} > {bound}",
                            p.token_words
                        )));
                    }
                }
            }
        }

        let detection = res
            .programs
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.detection.map(|(o, a, b)| (v as u32, o, a, b)))
            .min_by_key(|&(v, o, ..)| (v, o));
        if let Some((det, origin, a, b)) = detection {
            let cycle = reconstruct(&res.programs, det, origin, a, b)
                .ok_or_else(|| Fault::invariant("predecessor walk broke"))?;
            let witness = CycleWitness::new(cycle.iter().map(|&v| active[v as usize]).collect());
            if !validate_witness(g, &witness, 2 * k) {
                return Err(Fault::invariant("light witness failed validation"));
            }
            return Ok(LightOutcome {
                witness: Some(witness),
                metrics,
                trials_used: trial + 1,
            });
        }
    }
    Ok(LightOutcome {
        witness: None,
        metrics,
        trials_used: trials,
    })
}
