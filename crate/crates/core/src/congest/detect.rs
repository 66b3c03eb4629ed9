//! Combined C_{2k} detection: light trials, then heavy iterations. Budgets
//! default to the paper's asymptotic formulas with an explicit constant and
//! a configurable cap (the color-coding budget for k = 4, 5 is astronomical
//! at any feasible scale, so sweeps pin their own budgets).

use crate::engine::RunMetrics;
use crate::error::Fault;
use crate::graph::Graph;
use crate::witness::CycleWitness;

use super::heavy::{detect_heavy_c2k, paper_heavy_budget, HeavyCfg, SampleMode};
use super::light::{detect_light_c2k, paper_light_budget};

#[derive(Clone, Copy, Debug)]
pub struct DetectCfg {
    /// Light trial budget; None takes the paper formula, capped.
    pub light_trials: Option<u64>,
    /// Heavy iteration budget; None takes the paper formula, capped.
    pub heavy_iterations: Option<u64>,
    pub self_check_reps: u64,
    pub mode: SampleMode,
    /// Safety cap applied to the formula budgets.
    pub budget_cap: u64,
}

impl Default for DetectCfg {
    fn default() -> Self {
        DetectCfg {
            light_trials: None,
            heavy_iterations: None,
            self_check_reps: 2,
            mode: SampleMode::God,
            budget_cap: 500_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DetectOutcome {
    pub witness: Option<CycleWitness>,
    pub metrics: RunMetrics,
    pub light_trials: u64,
    pub heavy_iterations: u64,
}

/// Light then heavy detection of a 2k-cycle.
pub fn detect_c2k_congest(
    g: &Graph,
    k: usize,
    cfg: DetectCfg,
    seed: u64,
) -> Result<DetectOutcome, Fault> {
    if !(2..=5).contains(&k) {
        return Err(Fault::precondition("detection supports k in 2..=5"));
    }
    let light_budget = cfg
        .light_trials
        .unwrap_or_else(|| paper_light_budget(k).min(cfg.budget_cap));
    let heavy_budget = cfg
        .heavy_iterations
        .unwrap_or_else(|| paper_heavy_budget(g.n(), k).min(cfg.budget_cap));

    let mut metrics = RunMetrics::default();
    let light = detect_light_c2k(g, k, light_budget, seed)?;
    metrics.absorb(&light.metrics);
    if light.witness.is_some() {
        return Ok(DetectOutcome {
            witness: light.witness,
            metrics,
            light_trials: light.trials_used,
            heavy_iterations: 0,
        });
    }
    let heavy = detect_heavy_c2k(
        g,
        k,
        HeavyCfg {
            iterations: heavy_budget,
            self_check_reps: cfg.self_check_reps,
            mode: cfg.mode,
        },
        seed ^ 0x6865_6176,
    )?;
    metrics.absorb(&heavy.metrics);
    Ok(DetectOutcome {
        witness: heavy.witness,
        metrics,
        light_trials: light.trials_used,
        heavy_iterations: heavy.iterations_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::witness::validate_witness;

    #[test]
    fn no_c6_never_detects() {
        // C5 plus pendant trees is C6-free.
        let g = gen::pendant_hub_cycle(16, 5, 6);
        let cfg = DetectCfg {
            light_trials: Some(2000),
            heavy_iterations: Some(300),
            ..DetectCfg::default()
        };
        for seed in 0..5 {
            let out = detect_c2k_congest(&g, 3, cfg, seed).unwrap();
            assert!(out.witness.is_none(), "seed {seed}");
        }
    }

    #[test]
    fn k5_planted_bloom_found() {
        let g = gen::biclique_blooms(3125, 5, 8);
        let cfg = DetectCfg {
            light_trials: Some(400_000),
            heavy_iterations: Some(0),
            ..DetectCfg::default()
        };
        let out = detect_c2k_congest(&g, 5, cfg, 4).unwrap();
        let w = out.witness.expect("C10 should be found");
        assert!(validate_witness(&g, &w, 10));
    }

    #[test]
    fn k2_k5_on_k5_complete() {
        // K5 contains C4 (and the oracle agrees).
        let g = gen::complete_graph(5);
        let cfg = DetectCfg {
            light_trials: Some(4000),
            heavy_iterations: Some(200),
            ..DetectCfg::default()
        };
        let out = detect_c2k_congest(&g, 2, cfg, 9).unwrap();
        let w = out.witness.expect("C4 in K5");
        assert!(validate_witness(&g, &w, 4));
    }
}
