//! Command implementations.

use crate::{report::emit, CliError, CommonArgs, Detector, Mode};
use distcycle::clique::girth::{girth_plus_one, GirthEstimate};
use distcycle::clique::listing::{detect_c2k_with, Detect2k};
use distcycle::clique::net::CliqueNet;
use distcycle::congest::detect::{detect_c2k_congest, DetectCfg};
use distcycle::congest::girth::{exact_girth_congest, GirthCfg};
use distcycle::congest::heavy::SampleMode;
use distcycle::congest::reduce::{
    reduce_c6_to_directed_triangles, well_colored_c6_exists, ReduceOutcome,
};
use distcycle::oracle::{brute_girth, count_subgraph, Girth};
use distcycle::rng::Stream;
use distcycle::witness::validate_witness;
use distcycle::{gen, Graph, SubgraphPattern};
use serde::Serialize;

fn load_graph(common: &CommonArgs) -> Result<Graph, CliError> {
    match (&common.graph, &common.gen) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            Ok(Graph::parse_edge_list(&text)?)
        }
        (None, Some(spec)) => Ok(gen::parse_spec(spec, common.seed)?),
        _ => Err(CliError::Config(
            "provide exactly one of --graph or --gen".into(),
        )),
    }
}

fn girth_str(g: Girth) -> String {
    match g {
        Girth::Finite(v) => v.to_string(),
        Girth::Infinite => "inf".into(),
    }
}

fn estimate_str(e: GirthEstimate) -> String {
    match e {
        GirthEstimate::Acyclic => "acyclic".into(),
        GirthEstimate::Exact(g) => format!("exact:{g}"),
        GirthEstimate::PlusOne(a) => format!("plusone:{a}"),
    }
}

// ---- girth-approx ----

#[derive(Serialize)]
struct GirthApproxReport {
    seed: u64,
    n: usize,
    m: usize,
    estimate: String,
    oracle: String,
    consistent: bool,
    rounds: u64,
    words: u64,
    charged_routing_rounds: u64,
    primitives: u64,
}

pub fn girth_approx(common: &CommonArgs) -> Result<(), CliError> {
    let g = load_graph(common)?;
    let run = girth_plus_one(&g)?;
    let oracle = brute_girth(&g);
    let rep = GirthApproxReport {
        seed: common.seed,
        n: g.n(),
        m: g.m(),
        estimate: estimate_str(run.estimate),
        oracle: girth_str(oracle),
        consistent: run.estimate.consistent_with(oracle),
        rounds: run.metrics.rounds,
        words: run.metrics.words_total,
        charged_routing_rounds: run.metrics.charged_routing_rounds,
        primitives: run.primitives,
    };
    emit(common, &rep, || {
        (
            vec![
                "seed",
                "n",
                "m",
                "estimate",
                "oracle",
                "consistent",
                "rounds",
                "words",
            ],
            vec![vec![
                rep.seed.to_string(),
                rep.n.to_string(),
                rep.m.to_string(),
                rep.estimate.clone(),
                rep.oracle.clone(),
                rep.consistent.to_string(),
                rep.rounds.to_string(),
                rep.words.to_string(),
            ]],
        )
    })
}

// ---- list ----

#[derive(Serialize)]
struct ListReport {
    seed: u64,
    n: usize,
    m: usize,
    pattern: String,
    listed: usize,
    oracle: usize,
    matches: bool,
    rounds: u64,
    words: u64,
}

pub fn list(common: &CommonArgs, pattern: &str) -> Result<(), CliError> {
    let g = load_graph(common)?;
    let h = SubgraphPattern::parse(pattern)?;
    let mut net = CliqueNet::new(g.n());
    let listed = distcycle::clique::listing::list_subgraph_with(&g, &h, &mut net)?;
    let oracle = distcycle::oracle::enumerate_subgraph(&g, &h)?;
    let rep = ListReport {
        seed: common.seed,
        n: g.n(),
        m: g.m(),
        pattern: h.name().to_string(),
        listed: listed.len(),
        oracle: oracle.len(),
        matches: listed == oracle,
        rounds: net.metrics().rounds,
        words: net.metrics().words_total,
    };
    emit(common, &rep, || {
        (
            vec![
                "seed", "n", "m", "pattern", "listed", "oracle", "matches", "rounds",
            ],
            vec![vec![
                rep.seed.to_string(),
                rep.n.to_string(),
                rep.m.to_string(),
                rep.pattern.clone(),
                rep.listed.to_string(),
                rep.oracle.to_string(),
                rep.matches.to_string(),
                rep.rounds.to_string(),
            ]],
        )
    })
}

// ---- detect-clique ----

#[derive(Serialize)]
struct DetectCliqueReport {
    seed: u64,
    n: usize,
    m: usize,
    k: usize,
    outcome: String,
    witness: Option<Vec<u32>>,
    validated: Option<bool>,
    rounds: u64,
}

pub fn detect_clique(common: &CommonArgs, k: usize, gate_const: f64) -> Result<(), CliError> {
    let g = load_graph(common)?;
    let mut net = CliqueNet::new(g.n());
    let out = detect_c2k_with(&g, k, gate_const, &mut net)?;
    let (outcome, witness, validated) = match out {
        Detect2k::Found(w) => {
            let ok = validate_witness(&g, &w, 2 * k);
            ("found".to_string(), Some(w.vertices), Some(ok))
        }
        Detect2k::GuaranteedExists => ("guaranteed-exists".to_string(), None, None),
        Detect2k::Free => ("free".to_string(), None, None),
    };
    let rep = DetectCliqueReport {
        seed: common.seed,
        n: g.n(),
        m: g.m(),
        k,
        outcome,
        witness,
        validated,
        rounds: net.metrics().rounds,
    };
    emit(common, &rep, || {
        (
            vec!["seed", "n", "m", "k", "outcome", "validated", "rounds"],
            vec![vec![
                rep.seed.to_string(),
                rep.n.to_string(),
                rep.m.to_string(),
                rep.k.to_string(),
                rep.outcome.clone(),
                rep.validated.map(|b| b.to_string()).unwrap_or_default(),
                rep.rounds.to_string(),
            ]],
        )
    })
}

// ---- detect-congest ----

#[derive(Serialize, Clone)]
struct CongestTrial {
    trial: u64,
    seed: u64,
    found: bool,
    validated: bool,
    rounds: u64,
    words: u64,
}

#[derive(Serialize)]
struct DetectCongestReport {
    seed: u64,
    n: usize,
    m: usize,
    k: usize,
    detector: String,
    trials: Vec<CongestTrial>,
    found_count: u64,
    empirical_rate: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn detect_congest(
    common: &CommonArgs,
    k: usize,
    detector: Detector,
    trials: u64,
    mode: Mode,
    light_budget: Option<u64>,
    heavy_budget: Option<u64>,
) -> Result<(), CliError> {
    if !(2..=5).contains(&k) {
        return Err(CliError::Config(format!("k must be in 2..=5, got {k}")));
    }
    let g = load_graph(common)?;
    let sample_mode = match mode {
        Mode::God => SampleMode::God,
        Mode::Priority => SampleMode::Priority {
            flood_rounds: 2 * g.n() as u64,
        },
    };
    let cfg = DetectCfg {
        light_trials: match detector {
            Detector::Heavy => Some(0),
            _ => light_budget,
        },
        heavy_iterations: match detector {
            Detector::Light => Some(0),
            _ => heavy_budget,
        },
        mode: sample_mode,
        ..DetectCfg::default()
    };
    // Trial fan-out: one engine per worker, reports reassembled in order.
    let results = fan_out(trials, |trial| {
        let trial_seed = Stream::derive(common.seed, &[trial]).next_u64();
        let out = detect_c2k_congest(&g, k, cfg, trial_seed)?;
        let found = out.witness.is_some();
        let validated = out.witness.is_none_or(|w| validate_witness(&g, &w, 2 * k));
        Ok(CongestTrial {
            trial,
            seed: trial_seed,
            found,
            validated,
            rounds: out.metrics.rounds,
            words: out.metrics.words_total,
        })
    })?;
    let found_count = results.iter().filter(|t| t.found).count() as u64;
    let rep = DetectCongestReport {
        seed: common.seed,
        n: g.n(),
        m: g.m(),
        k,
        detector: match detector {
            Detector::Light => "light",
            Detector::Heavy => "heavy",
            Detector::Both => "both",
        }
        .to_string(),
        found_count,
        empirical_rate: found_count as f64 / trials.max(1) as f64,
        trials: results,
    };
    emit(common, &rep, || {
        (
            vec!["trial", "seed", "found", "validated", "rounds", "words"],
            rep.trials
                .iter()
                .map(|t| {
                    vec![
                        t.trial.to_string(),
                        t.seed.to_string(),
                        t.found.to_string(),
                        t.validated.to_string(),
                        t.rounds.to_string(),
                        t.words.to_string(),
                    ]
                })
                .collect(),
        )
    })
}

/// Runs `count` jobs across worker threads, one engine per worker, and
/// reassembles results in trial order.
type TrialSlot<T> = Option<Result<T, distcycle::Fault>>;

fn fan_out<T: Send>(
    count: u64,
    job: impl Fn(u64) -> Result<T, distcycle::Fault> + Sync,
) -> Result<Vec<T>, CliError> {
    let workers = std::thread::available_parallelism()
        .map_or(4, |p| p.get())
        .min(8);
    let mut results: Vec<TrialSlot<T>> = (0..count).map(|_| None).collect();
    let chunks: Vec<(u64, &mut [TrialSlot<T>])> = {
        let mut rest = results.as_mut_slice();
        let mut start = 0u64;
        let mut out = Vec::new();
        let per = (count as usize).div_ceil(workers.max(1)).max(1);
        while !rest.is_empty() {
            let take = per.min(rest.len());
            let (head, tail) = rest.split_at_mut(take);
            out.push((start, head));
            start += take as u64;
            rest = tail;
        }
        out
    };
    std::thread::scope(|scope| {
        for (start, chunk) in chunks {
            let job = &job;
            scope.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(job(start + i as u64));
                }
            });
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("every trial ran").map_err(CliError::from))
        .collect()
}

// ---- girth-congest ----

#[derive(Serialize)]
struct PhaseLine {
    phase: usize,
    light_detected: bool,
    heavy_detected: bool,
    heavy_samples: u64,
}

#[derive(Serialize)]
struct GirthCongestReport {
    seed: u64,
    n: usize,
    m: usize,
    girth: String,
    oracle: String,
    sound: bool,
    halted_phase: Option<usize>,
    rounds: u64,
    words: u64,
    trace: Vec<PhaseLine>,
}

pub fn girth_congest(common: &CommonArgs) -> Result<(), CliError> {
    let g = load_graph(common)?;
    let out = exact_girth_congest(&g, common.seed, GirthCfg::default())?;
    let oracle = brute_girth(&g);
    let rep = GirthCongestReport {
        seed: common.seed,
        n: g.n(),
        m: g.m(),
        girth: girth_str(out.girth),
        oracle: girth_str(oracle),
        sound: out.girth == oracle
            || matches!((out.girth, oracle), (Girth::Finite(a), Girth::Finite(b)) if a >= b),
        halted_phase: out.halted_phase,
        rounds: out.metrics.rounds,
        words: out.metrics.words_total,
        trace: out
            .trace
            .iter()
            .map(|r| PhaseLine {
                phase: r.phase,
                light_detected: r.light_detected,
                heavy_detected: r.heavy_detected,
                heavy_samples: r.heavy_samples,
            })
            .collect(),
    };
    emit(common, &rep, || {
        (
            vec![
                "seed",
                "n",
                "m",
                "girth",
                "oracle",
                "sound",
                "halted_phase",
                "rounds",
            ],
            vec![vec![
                rep.seed.to_string(),
                rep.n.to_string(),
                rep.m.to_string(),
                rep.girth.clone(),
                rep.oracle.clone(),
                rep.sound.to_string(),
                rep.halted_phase.map(|p| p.to_string()).unwrap_or_default(),
                rep.rounds.to_string(),
            ]],
        )
    })
}

// ---- reduce ----

#[derive(Serialize)]
struct ReduceReport {
    seed: u64,
    n: usize,
    m: usize,
    outcome: String,
    early_witness: Option<Vec<u32>>,
    colors: Option<Vec<u8>>,
    directed_arcs: Option<Vec<(u32, u32)>>,
    directed_triangles: Option<Vec<(u32, u32, u32)>>,
    well_colored_c6: Option<bool>,
    equivalence_holds: Option<bool>,
}

pub fn reduce(common: &CommonArgs, heavy_budget: u64) -> Result<(), CliError> {
    let g = load_graph(common)?;
    let rep = match reduce_c6_to_directed_triangles(&g, heavy_budget, common.seed)? {
        ReduceOutcome::EarlyFound(w) => ReduceReport {
            seed: common.seed,
            n: g.n(),
            m: g.m(),
            outcome: "early-found".into(),
            early_witness: Some(w.vertices),
            colors: None,
            directed_arcs: None,
            directed_triangles: None,
            well_colored_c6: None,
            equivalence_holds: None,
        },
        ReduceOutcome::Reduced {
            truncated,
            colors,
            directed,
            ..
        } => {
            let tris = directed.directed_triangles();
            let c6 = well_colored_c6_exists(&truncated, &colors.colors)?;
            ReduceReport {
                seed: common.seed,
                n: g.n(),
                m: g.m(),
                outcome: "reduced".into(),
                early_witness: None,
                colors: Some(colors.colors.clone()),
                directed_arcs: Some(directed.arcs()),
                well_colored_c6: Some(c6),
                equivalence_holds: Some(!tris.is_empty() == c6),
                directed_triangles: Some(tris),
            }
        }
    };
    emit(common, &rep, || {
        (
            vec![
                "seed",
                "n",
                "m",
                "outcome",
                "triangles",
                "well_colored_c6",
                "equivalence",
            ],
            vec![vec![
                rep.seed.to_string(),
                rep.n.to_string(),
                rep.m.to_string(),
                rep.outcome.clone(),
                rep.directed_triangles
                    .as_ref()
                    .map(|t| t.len().to_string())
                    .unwrap_or_default(),
                rep.well_colored_c6
                    .map(|b| b.to_string())
                    .unwrap_or_default(),
                rep.equivalence_holds
                    .map(|b| b.to_string())
                    .unwrap_or_default(),
            ]],
        )
    })
}

// ---- oracle ----

#[derive(Serialize)]
struct OracleReport {
    seed: u64,
    n: usize,
    m: usize,
    girth: String,
    pattern: Option<String>,
    pattern_count: Option<usize>,
}

pub fn oracle(common: &CommonArgs, pattern: Option<&str>) -> Result<(), CliError> {
    let g = load_graph(common)?;
    let (pattern, pattern_count) = match pattern {
        Some(p) => {
            let h = SubgraphPattern::parse(p)?;
            let count = count_subgraph(&g, &h)?;
            (Some(h.name().to_string()), Some(count))
        }
        None => (None, None),
    };
    let rep = OracleReport {
        seed: common.seed,
        n: g.n(),
        m: g.m(),
        girth: girth_str(brute_girth(&g)),
        pattern,
        pattern_count,
    };
    emit(common, &rep, || {
        (
            vec!["seed", "n", "m", "girth", "pattern", "count"],
            vec![vec![
                rep.seed.to_string(),
                rep.n.to_string(),
                rep.m.to_string(),
                rep.girth.clone(),
                rep.pattern.clone().unwrap_or_default(),
                rep.pattern_count.map(|c| c.to_string()).unwrap_or_default(),
            ]],
        )
    })
}
