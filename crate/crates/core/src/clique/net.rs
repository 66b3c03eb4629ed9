//! Charged delivery primitives for Congested Clique protocols.
//!
//! Clique algorithms are sequences of global routing invocations, so instead
//! of pushing every word through per-link FIFOs the net charges rounds by
//! the load-balanced routing cost model: a routing instance in which every
//! node is the target of at most n*x words costs C_ROUTE * x rounds, after
//! the load precondition is validated. Violating a declared load bound is a
//! fault, never a silent slowdown.

use crate::engine::{RunMetrics, Word};
use crate::error::Fault;
use crate::graph::Graph;
use std::collections::HashMap;

/// Rounds charged per unit of normalized target load.
pub const C_ROUTE: u64 = 2;

/// Allowed local-input budget per source, in words of log n bits: sources
/// must compute their messages from O(n log n) bits.
pub const SOURCE_WORD_BUDGET_FACTOR: u64 = 8;

/// One requested delivery.
#[derive(Clone, Debug)]
pub struct RouteRequest {
    pub source: u32,
    pub target: u32,
    pub word: Word,
}

/// The all-to-all network with cost accounting.
#[derive(Clone, Debug)]
pub struct CliqueNet {
    n: usize,
    metrics: RunMetrics,
    /// Number of charged primitive invocations (broadcasts, routings,
    /// gathers) since construction.
    primitives: u64,
}

impl CliqueNet {
    pub fn new(n: usize) -> Self {
        CliqueNet {
            n,
            metrics: RunMetrics::default(),
            primitives: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn metrics(&self) -> RunMetrics {
        self.metrics
    }

    pub fn primitives(&self) -> u64 {
        self.primitives
    }

    /// Every node announces one word; afterwards every node knows all n of
    /// them. One round, n(n-1) words.
    pub fn broadcast_all(&mut self, values: &[Word]) -> Result<Vec<Word>, Fault> {
        if values.len() != self.n {
            return Err(Fault::precondition("broadcast_all needs one word per node"));
        }
        self.primitives += 1;
        if self.n > 1 {
            self.metrics.rounds += 1;
            self.metrics.words_total += (self.n * (self.n - 1)) as u64;
            self.metrics.peak_link_load = self.metrics.peak_link_load.max(1);
        }
        Ok(values.to_vec())
    }

    /// One node sends `words` to everybody: |words| rounds at link capacity
    /// one.
    pub fn broadcast_from(&mut self, _source: u32, words: &[Word]) -> Result<Vec<Word>, Fault> {
        self.primitives += 1;
        if self.n > 1 && !words.is_empty() {
            self.metrics.rounds += words.len() as u64;
            self.metrics.words_total += (words.len() * (self.n - 1)) as u64;
            self.metrics.peak_link_load = self.metrics.peak_link_load.max(words.len() as u64);
        }
        Ok(words.to_vec())
    }

    /// Disjoint sources broadcast concurrently: source s ships its words to
    /// everybody, all sources in parallel, so the round cost is the largest
    /// per-source word count.
    pub fn broadcast_concurrent(&mut self, words: &[(u32, Vec<Word>)]) -> Result<(), Fault> {
        self.primitives += 1;
        let mut per_source: HashMap<u32, u64> = HashMap::new();
        let mut total = 0u64;
        for (src, ws) in words {
            *per_source.entry(*src).or_default() += ws.len() as u64;
            total += ws.len() as u64;
        }
        let rounds = per_source.values().copied().max().unwrap_or(0);
        if self.n > 1 {
            self.metrics.rounds += rounds;
            self.metrics.words_total += total * (self.n as u64 - 1);
            self.metrics.peak_link_load = self.metrics.peak_link_load.max(rounds);
        }
        Ok(())
    }

    /// Load-balanced routing. `declared_load` is the analysis bound on the
    /// number of words any single target receives; exceeding it faults.
    /// `source_words` estimates the local input (in words) each source
    /// derives its messages from; it must stay within O(n log n) bits.
    /// Charges C_ROUTE * ceil(max_target_load / n) rounds.
    pub fn route_load_balanced(
        &mut self,
        requests: Vec<RouteRequest>,
        declared_load: u64,
        source_words: u64,
    ) -> Result<Vec<Vec<(u32, Word)>>, Fault> {
        self.primitives += 1;
        if requests.is_empty() {
            return Ok(vec![Vec::new(); self.n]);
        }
        let log_n = (self.n.max(2) as f64).log2().ceil() as u64;
        let allowed_words = SOURCE_WORD_BUDGET_FACTOR * self.n as u64 * log_n.max(1);
        if source_words > allowed_words {
            return Err(Fault::RouteSourceBits {
                actual: source_words * log_n,
                allowed: allowed_words * log_n,
            });
        }

        let mut deliveries: Vec<Vec<(u32, Word)>> = vec![Vec::new(); self.n];
        for r in requests {
            assert!((r.source as usize) < self.n && (r.target as usize) < self.n);
            deliveries[r.target as usize].push((r.source, r.word));
        }
        let max_load = deliveries.iter().map(|d| d.len() as u64).max().unwrap_or(0);
        if max_load > declared_load {
            let target = deliveries
                .iter()
                .position(|d| d.len() as u64 == max_load)
                .unwrap() as u32;
            return Err(Fault::RouteOverload {
                target,
                actual: max_load,
                declared: declared_load,
            });
        }
        let charge = C_ROUTE * max_load.div_ceil(self.n as u64);
        self.metrics.rounds += charge;
        self.metrics.charged_routing_rounds += charge;
        self.metrics.words_total += deliveries.iter().map(|d| d.len() as u64).sum::<u64>();
        self.metrics.peak_link_load = self
            .metrics
            .peak_link_load
            .max(max_load.div_ceil(self.n as u64));
        for d in deliveries.iter_mut() {
            d.sort_by_key(|&(src, _)| src);
        }
        Ok(deliveries)
    }

    /// Whole-graph gather: every node learns every edge. Used on sparse
    /// graphs (m = O(n)), where each node is the target of 2m words.
    pub fn gather_graph(&mut self, g: &Graph) -> Result<Graph, Fault> {
        assert_eq!(g.n(), self.n);
        self.primitives += 1;
        let m = g.m() as u64;
        let load = 2 * m; // every node receives each edge once per endpoint owner
        let charge = C_ROUTE * load.div_ceil(self.n as u64);
        self.metrics.rounds += charge;
        self.metrics.charged_routing_rounds += charge;
        self.metrics.words_total += load * (self.n as u64);
        // All nodes now hold an identical copy.
        Ok(g.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broadcast_costs_one_round() {
        let mut net = CliqueNet::new(4);
        let degs: Vec<Word> = [2u64, 2, 1, 1].iter().map(|&d| Word::new(&[d])).collect();
        let known = net.broadcast_all(&degs).unwrap();
        let m: u64 = known.iter().map(|w| w.get(0)).sum::<u64>() / 2;
        assert_eq!(m, 3);
        assert_eq!(net.metrics().rounds, 1);
        assert_eq!(net.metrics().words_total, 12);
    }

    #[test]
    fn single_node_broadcast_free() {
        let mut net = CliqueNet::new(1);
        net.broadcast_all(&[Word::new(&[5])]).unwrap();
        assert_eq!(net.metrics().words_total, 0);
        assert_eq!(net.metrics().rounds, 0);
    }

    #[test]
    fn two_broadcasts_two_rounds() {
        let mut net = CliqueNet::new(3);
        let w: Vec<Word> = (0..3).map(|i| Word::new(&[i])).collect();
        net.broadcast_all(&w).unwrap();
        net.broadcast_all(&w).unwrap();
        assert_eq!(net.metrics().rounds, 2);
        assert_eq!(net.metrics().words_total, 2 * 6);
    }

    #[test]
    fn route_unit_load() {
        let n = 50;
        let mut net = CliqueNet::new(n);
        let reqs: Vec<RouteRequest> = (0..n as u32)
            .map(|v| RouteRequest {
                source: v,
                target: 0,
                word: Word::new(&[v as u64]),
            })
            .collect();
        net.route_load_balanced(reqs, n as u64, 1).unwrap();
        assert_eq!(net.metrics().charged_routing_rounds, C_ROUTE);
    }

    #[test]
    fn route_triple_load() {
        let n = 20;
        let mut net = CliqueNet::new(n);
        let mut reqs = Vec::new();
        for i in 0..3 * n as u32 {
            reqs.push(RouteRequest {
                source: i % n as u32,
                target: 0,
                word: Word::new(&[i as u64]),
            });
        }
        net.route_load_balanced(reqs, 3 * n as u64, n as u64)
            .unwrap();
        assert_eq!(net.metrics().charged_routing_rounds, 3 * C_ROUTE);
    }

    #[test]
    fn empty_route_is_free() {
        let mut net = CliqueNet::new(8);
        net.route_load_balanced(Vec::new(), 0, 0).unwrap();
        assert_eq!(net.metrics().rounds, 0);
        assert_eq!(net.metrics().charged_routing_rounds, 0);
    }

    #[test]
    fn overload_faults() {
        let mut net = CliqueNet::new(4);
        let reqs: Vec<RouteRequest> = (0..4u32)
            .map(|v| RouteRequest {
                source: v,
                target: 1,
                word: Word::new(&[0]),
            })
            .collect();
        let err = net.route_load_balanced(reqs, 2, 1).unwrap_err();
        assert!(matches!(
            err,
            Fault::RouteOverload {
                target: 1,
                actual: 4,
                declared: 2
            }
        ));
    }

    #[test]
    fn words_delivered_bounded_by_charge() {
        let n = 16u64;
        let mut net = CliqueNet::new(n as usize);
        let mut reqs = Vec::new();
        for t in 0..n as u32 {
            for s in 0..5u32 {
                reqs.push(RouteRequest {
                    source: s,
                    target: t,
                    word: Word::new(&[0]),
                });
            }
        }
        let total = reqs.len() as u64;
        net.route_load_balanced(reqs, n, n).unwrap();
        let charged = net.metrics().charged_routing_rounds;
        assert!(total <= n * n * charged / C_ROUTE);
    }
}
