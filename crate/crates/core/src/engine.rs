//! The round-synchronous execution substrate. Nodes run in lockstep; every
//! directed link carries at most one word per round (strict delivery), and a
//! node that enqueues q words on one link sees them drain over q consecutive
//! rounds, FIFO. Execution is event-driven: a node steps at round 0, when a
//! word arrives, or at a self-scheduled wake round, so large padded
//! topologies cost only what they touch.

use crate::error::Fault;
use crate::graph::Graph;
use crate::rng::Stream;
use std::collections::{BTreeMap, HashMap, VecDeque};

/// Word budget constant c_w: one word carries up to this many ids/counters
/// of ceil(log2 n) bits each.
pub const WORD_FIELDS: usize = 4;

/// One O(log n)-bit message.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Word {
    len: u8,
    f: [u64; WORD_FIELDS],
}

impl Word {
    pub fn new(fields: &[u64]) -> Self {
        assert!(
            fields.len() <= WORD_FIELDS,
            "word overflows {WORD_FIELDS} fields"
        );
        let mut f = [0u64; WORD_FIELDS];
        f[..fields.len()].copy_from_slice(fields);
        Word {
            len: fields.len() as u8,
            f,
        }
    }

    pub fn get(&self, i: usize) -> u64 {
        assert!(i < self.len as usize);
        self.f[i]
    }

    pub fn fields(&self) -> &[u64] {
        &self.f[..self.len as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopologyKind {
    Clique,
    Congest,
}

/// Communication topology. Under CONGEST the links are the edges of the
/// input graph; under the clique every ordered pair of distinct nodes is a
/// link regardless of the input graph.
#[derive(Clone, Debug)]
pub struct Topology {
    pub kind: TopologyKind,
    pub graph: Graph,
}

impl Topology {
    pub fn congest(graph: Graph) -> Self {
        Topology {
            kind: TopologyKind::Congest,
            graph,
        }
    }

    pub fn clique(graph: Graph) -> Self {
        Topology {
            kind: TopologyKind::Clique,
            graph,
        }
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn link_exists(&self, from: u32, to: u32) -> bool {
        match self.kind {
            TopologyKind::Clique => from != to,
            TopologyKind::Congest => self.graph.has_edge(from, to),
        }
    }

    /// Number of directed links.
    pub fn link_count(&self) -> usize {
        match self.kind {
            TopologyKind::Clique => self.n() * (self.n() - 1),
            TopologyKind::Congest => 2 * self.graph.m(),
        }
    }
}

/// Bandwidth and round accounting for one execution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunMetrics {
    pub rounds: u64,
    pub words_total: u64,
    pub peak_link_load: u64,
    pub charged_routing_rounds: u64,
}

impl RunMetrics {
    pub fn absorb(&mut self, other: &RunMetrics) {
        self.rounds += other.rounds;
        self.words_total += other.words_total;
        self.peak_link_load = self.peak_link_load.max(other.peak_link_load);
        self.charged_routing_rounds += other.charged_routing_rounds;
    }
}

/// Per-step interface handed to a node.
pub struct StepCtx<'a> {
    node: u32,
    round: u64,
    n: usize,
    seed: u64,
    outbox: &'a mut Vec<(u32, Word)>,
    wake: &'a mut Option<u64>,
    halted: &'a mut bool,
}

impl StepCtx<'_> {
    pub fn node(&self) -> u32 {
        self.node
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Enqueues a word on the link to `to`; it is delivered in FIFO order at
    /// one word per round.
    pub fn send(&mut self, to: u32, w: Word) {
        self.outbox.push((to, w));
    }

    /// Requests a step at `round` even if no word arrives.
    pub fn wake_at(&mut self, round: u64) {
        assert!(round > self.round, "wake must be in the future");
        *self.wake = Some(self.wake.map_or(round, |w| w.min(round)));
    }

    /// Halts this node. A halted node never steps or sends again.
    pub fn halt(&mut self) {
        *self.halted = true;
    }

    /// The node's private randomness for this round: a pure function of
    /// (root seed, node, round), independent of scheduling.
    pub fn rng(&self) -> Stream {
        Stream::derive(self.seed, &[0x6e6f_6465, self.node as u64, self.round])
    }
}

/// A per-node protocol: local state plus a step function from inbox to
/// outbox, with an optional terminal output.
pub trait NodeProgram {
    type Output: Clone;

    /// Called at round 0, whenever a word arrives, and at requested wakes.
    /// `inbox` holds (sender, word) pairs sorted by sender.
    fn step(&mut self, ctx: &mut StepCtx<'_>, inbox: &[(u32, Word)]);

    /// Terminal output, immutable once the node halts.
    fn output(&self) -> Option<Self::Output>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunEnd {
    /// Every node halted.
    AllHalted,
    /// No words in flight and no wakes pending.
    Quiescent,
    /// Round limit was reached; metrics are partial.
    RoundLimit,
}

pub struct RunResult<P: NodeProgram> {
    pub end: RunEnd,
    pub outputs: Vec<Option<P::Output>>,
    pub metrics: RunMetrics,
    /// Final program states, for artifact-level inspection (e.g. witness
    /// back-tracing over recorded predecessor links).
    pub programs: Vec<P>,
}

impl<P: NodeProgram> RunResult<P> {
    pub fn expect_completed(self) -> Result<Self, Fault> {
        match self.end {
            RunEnd::RoundLimit => Err(Fault::Timeout {
                limit: self.metrics.rounds,
                rounds: self.metrics.rounds,
            }),
            _ => Ok(self),
        }
    }
}

/// Executes one synchronous run. Fully deterministic for a given
/// (topology, programs, seed).
pub fn run<P: NodeProgram>(
    topology: &Topology,
    mut programs: Vec<P>,
    round_limit: u64,
    seed: u64,
) -> RunResult<P> {
    let n = topology.n();
    assert_eq!(programs.len(), n, "one program per vertex");

    let mut metrics = RunMetrics::default();
    let mut halted = vec![false; n];
    let mut wakes: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    let mut queues: HashMap<(u32, u32), VecDeque<Word>> = HashMap::new();
    let mut inboxes: HashMap<u32, Vec<(u32, Word)>> = HashMap::new();
    let mut outbox: Vec<(u32, Word)> = Vec::new();

    let mut round: u64 = 0;
    // Round 0: initial step of every node, before any delivery.
    let mut to_step: Vec<u32> = (0..n as u32).collect();

    loop {
        // Step phase.
        for &v in &to_step {
            if halted[v as usize] {
                continue;
            }
            let inbox = inboxes.remove(&v).unwrap_or_default();
            let mut wake = None;
            let mut halt_flag = false;
            outbox.clear();
            {
                let mut ctx = StepCtx {
                    node: v,
                    round,
                    n,
                    seed,
                    outbox: &mut outbox,
                    wake: &mut wake,
                    halted: &mut halt_flag,
                };
                programs[v as usize].step(&mut ctx, &inbox);
            }
            for &(to, w) in outbox.iter() {
                assert!(
                    topology.link_exists(v, to),
                    "node {v} sent on nonexistent link to {to}"
                );
                metrics.words_total += 1;
                let q = queues.entry((v, to)).or_default();
                q.push_back(w);
                metrics.peak_link_load = metrics.peak_link_load.max(q.len() as u64);
            }
            if halt_flag {
                halted[v as usize] = true;
            } else if let Some(r) = wake {
                wakes.entry(r).or_default().push(v);
            }
        }
        inboxes.clear();

        if halted.iter().all(|&h| h) {
            metrics.rounds = round;
            return RunResult {
                end: RunEnd::AllHalted,
                outputs: collect(&programs),
                metrics,
                programs,
            };
        }

        // Delivery phase: strict capacity of one word per link per round.
        let mut delivered_any = false;
        let mut links: Vec<(u32, u32)> = queues.keys().copied().collect();
        links.sort_unstable();
        for link in links {
            let q = queues.get_mut(&link).unwrap();
            let mut count = 0u32;
            if let Some(w) = q.pop_front() {
                count += 1;
                delivered_any = true;
                // Words addressed to a halted node are consumed unread.
                if !halted[link.1 as usize] {
                    inboxes.entry(link.1).or_default().push((link.0, w));
                }
            }
            assert!(count <= 1, "link capacity violated");
            if q.is_empty() {
                queues.remove(&link);
            }
        }

        let mut next_round = round + 1;
        let mut wake_now: Vec<u32> = Vec::new();
        let due: Vec<u64> = wakes.range(..=next_round).map(|(&r, _)| r).collect();
        for r in due {
            wake_now.extend(wakes.remove(&r).unwrap());
        }

        if !delivered_any && wake_now.is_empty() {
            // Nothing in flight: either fully quiescent, or idle lockstep
            // rounds elapse until the next scheduled wake.
            match wakes.iter().next().map(|(&r, _)| r) {
                None => {
                    metrics.rounds = round;
                    return RunResult {
                        end: RunEnd::Quiescent,
                        outputs: collect(&programs),
                        metrics,
                        programs,
                    };
                }
                Some(r) => {
                    next_round = r;
                    wake_now = wakes.remove(&r).unwrap();
                }
            }
        }

        round = next_round;
        if round > round_limit {
            metrics.rounds = round_limit;
            return RunResult {
                end: RunEnd::RoundLimit,
                outputs: collect(&programs),
                metrics,
                programs,
            };
        }

        to_step = inboxes.keys().copied().chain(wake_now).collect();
        to_step.sort_unstable();
        to_step.dedup();
        for inbox in inboxes.values_mut() {
            inbox.sort_by_key(|&(from, _)| from);
        }
    }
}

fn collect<P: NodeProgram>(programs: &[P]) -> Vec<Option<P::Output>> {
    programs.iter().map(|p| p.output()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    /// Halts immediately at round 0.
    struct Immediate;
    impl NodeProgram for Immediate {
        type Output = u64;
        fn step(&mut self, ctx: &mut StepCtx<'_>, _inbox: &[(u32, Word)]) {
            ctx.halt();
        }
        fn output(&self) -> Option<u64> {
            Some(0)
        }
    }

    #[test]
    fn immediate_halt_costs_zero_rounds() {
        let topo = Topology::congest(Graph::empty(1));
        let res = run(&topo, vec![Immediate], 10, 0);
        assert_eq!(res.end, RunEnd::AllHalted);
        assert_eq!(res.metrics.rounds, 0);
        assert_eq!(res.metrics.words_total, 0);
    }

    /// Floods a hop-counted token from node 0; nodes record the arrival
    /// round and halt once they have seen the token (origin halts after
    /// sending). Tokens stop at hop `max_hop`.
    struct Flood {
        neighbors: Vec<u32>,
        is_origin: bool,
        max_hop: u64,
        seen_at: Option<u64>,
    }
    impl NodeProgram for Flood {
        type Output = u64;
        fn step(&mut self, ctx: &mut StepCtx<'_>, inbox: &[(u32, Word)]) {
            if ctx.round() == 0 && self.is_origin {
                for &v in &self.neighbors {
                    ctx.send(v, Word::new(&[1]));
                }
                self.seen_at = Some(0);
                ctx.halt();
                return;
            }
            if let Some(&(from, w)) = inbox.first() {
                if self.seen_at.is_none() {
                    self.seen_at = Some(ctx.round());
                    let hop = w.get(0);
                    if hop < self.max_hop {
                        for &v in &self.neighbors {
                            if v != from {
                                ctx.send(v, Word::new(&[hop + 1]));
                            }
                        }
                    }
                    ctx.halt();
                }
            }
        }
        fn output(&self) -> Option<u64> {
            self.seen_at
        }
    }

    #[test]
    fn c6_flood_reaches_antipode_at_round_3() {
        let g = gen::cycle_graph(6);
        let programs: Vec<Flood> = (0..6)
            .map(|v| Flood {
                neighbors: g.neighbors(v as u32).to_vec(),
                is_origin: v == 0,
                max_hop: 3,
                seen_at: None,
            })
            .collect();
        let topo = Topology::congest(g);
        let res = run(&topo, programs, 100, 0);
        assert_eq!(res.end, RunEnd::AllHalted);
        assert_eq!(res.metrics.rounds, 3);
        assert_eq!(res.outputs[3], Some(3));
    }

    /// Node 0 sends `want` words on one link at round 0; node 1 counts
    /// arrivals and halts at the want-th.
    struct Sink {
        want: usize,
        got: usize,
        last_round: u64,
    }
    impl NodeProgram for Sink {
        type Output = u64;
        fn step(&mut self, ctx: &mut StepCtx<'_>, inbox: &[(u32, Word)]) {
            if ctx.node() == 0 {
                if ctx.round() == 0 {
                    for i in 0..self.want {
                        ctx.send(1, Word::new(&[i as u64]));
                    }
                    ctx.halt();
                }
                return;
            }
            self.got += inbox.len();
            self.last_round = ctx.round();
            if self.got >= self.want {
                ctx.halt();
            }
        }
        fn output(&self) -> Option<u64> {
            Some(self.last_round)
        }
    }

    #[test]
    fn five_words_drain_over_five_rounds() {
        let g = Graph::from_edges(2, &[(0, 1)]);
        let topo = Topology::congest(g);
        let programs = vec![
            Sink {
                want: 5,
                got: 0,
                last_round: 0,
            },
            Sink {
                want: 5,
                got: 0,
                last_round: 0,
            },
        ];
        let res = run(&topo, programs, 100, 0);
        assert_eq!(res.end, RunEnd::AllHalted);
        assert_eq!(res.metrics.rounds, 5);
        assert_eq!(res.outputs[1], Some(5));
        assert_eq!(res.metrics.peak_link_load, 5);
        assert_eq!(res.metrics.words_total, 5);
    }

    #[test]
    fn determinism_bit_identical() {
        let g = gen::cycle_graph(6);
        let make = || -> Vec<Flood> {
            (0..6)
                .map(|v| Flood {
                    neighbors: g.neighbors(v as u32).to_vec(),
                    is_origin: v == 0,
                    max_hop: 3,
                    seen_at: None,
                })
                .collect()
        };
        let topo = Topology::congest(g.clone());
        let a = run(&topo, make(), 100, 42);
        let b = run(&topo, make(), 100, 42);
        assert_eq!(a.outputs, b.outputs);
        assert_eq!(a.metrics, b.metrics);
    }

    #[test]
    fn round_limit_yields_partial_result() {
        let g = Graph::from_edges(2, &[(0, 1)]);
        let topo = Topology::congest(g);
        let programs = vec![
            Sink {
                want: 50,
                got: 0,
                last_round: 0,
            },
            Sink {
                want: 50,
                got: 0,
                last_round: 0,
            },
        ];
        let res = run(&topo, programs, 10, 0);
        assert_eq!(res.end, RunEnd::RoundLimit);
        assert_eq!(res.metrics.rounds, 10);
    }

    #[test]
    #[should_panic(expected = "nonexistent link")]
    fn congest_rejects_non_edge_sends() {
        struct Bad;
        impl NodeProgram for Bad {
            type Output = ();
            fn step(&mut self, ctx: &mut StepCtx<'_>, _inbox: &[(u32, Word)]) {
                if ctx.node() == 0 {
                    ctx.send(2, Word::new(&[0]));
                }
                ctx.halt();
            }
            fn output(&self) -> Option<()> {
                None
            }
        }
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        run(&Topology::congest(g), vec![Bad, Bad, Bad], 10, 0);
    }
}
