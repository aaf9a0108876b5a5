//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! Run alone with `cargo test --release -p advice-loop-core --test acceptance`.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use advice_loop_core::advice::{RdrError, RdrTree};
use advice_loop_core::env::driving::{SdcObservation, OBSERVATION_COUNT};
use advice_loop_core::env::mountain_car::{self, McState, MAX_POSITION, MAX_SPEED, MIN_POSITION};
use advice_loop_core::env::EnvConfig;
use advice_loop_core::harness::combos::apply;
use advice_loop_core::harness::{run_experiment, Config, EpisodeMetrics, Totals};
use advice_loop_core::rl::{epsilon_greedy, LearningParams, QTable};
use advice_loop_core::rng::seeded;
use advice_loop_core::{ActionId, EnvKind, StateId};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use common::*;

type Check = fn() -> Result<String, String>;

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("rule-interaction-counts", rule_interaction_counts),
        ("persistence-interaction-share", persistence_interaction_share),
        ("ppr-ablation-direction", ppr_ablation_direction),
        ("learning-speed-ordering", learning_speed_ordering),
        ("rdr-oracle-equivalence", rdr_oracle_equivalence),
        ("q-learning-chain", q_learning_chain),
        ("state-space-counts", state_space_counts),
        ("reproducible-metrics-csv", reproducible_metrics_csv),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Err(format!("panicked: {}", panic_message(&e))));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn panic_message(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>()
        .cloned()
        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

fn combo(name: &str, runs: usize, episodes: usize) -> Config {
    let mut c = apply(name, &Config::default()).unwrap();
    c.experiment.runs = runs;
    c.experiment.episodes = episodes;
    c
}

fn per_run<F: Fn(&[EpisodeMetrics]) -> f64>(metrics: &[EpisodeMetrics], f: F) -> Vec<f64> {
    let mut runs: BTreeMap<usize, Vec<EpisodeMetrics>> = BTreeMap::new();
    for m in metrics {
        runs.entry(m.run).or_default().push(m.clone());
    }
    runs.values().map(|r| f(r)).collect()
}

fn mean_steps(episodes: &[EpisodeMetrics]) -> f64 {
    episodes.iter().map(|m| m.steps as f64).sum::<f64>() / episodes.len() as f64
}

/// Mean and the half-width of its two-sided 95% t interval.
fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = StudentsT::new(0.0, 1.0, n - 1.0).unwrap().inverse_cdf(0.975);
    (mean, t * (var / n).sqrt())
}

fn rule_interaction_counts() -> Result<String, String> {
    let expected = [
        ("MCRDR-FULL", 2),
        ("MCRDR-HALF", 3),
        ("MCRDR-QUAR", 3),
        ("MCRDR-MID", 3),
        ("SCRDR-AVOID", 2),
    ];
    let mut notes = Vec::new();
    let mut bad = Vec::new();
    for (name, want) in expected {
        let metrics = run_experiment(&combo(name, 100, 100), 1).map_err(|e| e.to_string())?;
        let counts: BTreeSet<usize> = per_run(&metrics, |r| r.iter().map(|m| m.interactions).sum::<usize>() as f64)
            .into_iter()
            .map(|x| x as usize)
            .collect();
        notes.push(format!("{name}={counts:?}"));
        if counts != BTreeSet::from([want]) {
            bad.push(format!("{name} expected {want} in every run"));
        }
    }
    if bad.is_empty() {
        Ok(notes.join(" "))
    } else {
        Err(format!("{}; got {}", bad.join(", "), notes.join(" ")))
    }
}

fn persistence_interaction_share() -> Result<String, String> {
    let mut notes = Vec::new();
    let mut bad = Vec::new();
    for name in ["PE-O", "PE-R", "PE-P", "PI-O", "PI-R", "PI-P"] {
        let metrics = run_experiment(&combo(name, 100, 200), 1).map_err(|e| e.to_string())?;
        let pct = Totals::of(&metrics).interaction_pct();
        notes.push(format!("{name}={pct:.3}%"));
        if pct >= 1.0 {
            bad.push(format!("{name} {pct:.3}% >= 1%"));
        }
    }
    for name in ["NPE-O", "NPE-R", "NPE-P", "NPI-O", "NPI-R", "NPI-P"] {
        let config = combo(name, 100, 100);
        let metrics = run_experiment(&config, 1).map_err(|e| e.to_string())?;
        let pct = Totals::of(&metrics).interaction_pct();
        let availability = 100.0 * config.user.reliability().availability;
        notes.push(format!("{name}={pct:.2}% (availability {availability:.2}%)"));
        if (pct - availability).abs() > 2.0 {
            bad.push(format!("{name} {pct:.2}% vs availability {availability:.2}%"));
        }
    }
    if bad.is_empty() {
        Ok(notes.join(" "))
    } else {
        Err(format!("{}; all: {}", bad.join(", "), notes.join(" ")))
    }
}

fn ppr_ablation_direction() -> Result<String, String> {
    let final20 = |name: &str| -> Result<(f64, f64), String> {
        let metrics = run_experiment(&combo(name, 30, 100), 1).map_err(|e| e.to_string())?;
        let tail: Vec<EpisodeMetrics> = metrics.into_iter().filter(|m| m.episode >= 80).collect();
        let cutoffs = tail.iter().filter(|m| m.steps >= 1000).count() as f64 / 30.0;
        Ok((mean_steps(&tail), cutoffs))
    };
    let (ppr, _) = final20("PI-R")?;
    let (no_ppr, cutoffs) = final20("PI-R-NOPPR")?;
    let detail = format!(
        "final-20 mean steps PPR={ppr:.1} No-PPR={no_ppr:.1}; No-PPR cut-offs per run={cutoffs:.2}"
    );
    if ppr < no_ppr && cutoffs >= 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn learning_speed_ordering() -> Result<String, String> {
    let mut ci = BTreeMap::new();
    for name in ["UQL", "PI-O", "NPI-O", "PI-R", "NPI-R", "PE-P", "NPE-P"] {
        let metrics = run_experiment(&combo(name, 30, 100), 1).map_err(|e| e.to_string())?;
        let early: Vec<EpisodeMetrics> = metrics.into_iter().filter(|m| m.episode < 10).collect();
        ci.insert(name, mean_ci(&per_run(&early, mean_steps)));
    }
    let below = |a: &str, b: &str| ci[a].0 + ci[a].1 < ci[b].0 - ci[b].1;
    let overlap = |a: &str, b: &str| !below(a, b) && !below(b, a);
    let checks = [
        ("PI-O ~ NPI-O", overlap("PI-O", "NPI-O")),
        ("PI-O < UQL", below("PI-O", "UQL")),
        ("NPI-O < UQL", below("NPI-O", "UQL")),
        ("PI-R < NPI-R", below("PI-R", "NPI-R")),
        ("NPI-R < UQL", below("NPI-R", "UQL")),
        ("PE-P does not beat UQL", !below("PE-P", "UQL")),
        ("NPE-P does not beat UQL", !below("NPE-P", "UQL")),
    ];
    let means = ci
        .iter()
        .map(|(n, (m, h))| format!("{n}={m:.1}±{h:.1}"))
        .collect::<Vec<_>>()
        .join(" ");
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    if failed.is_empty() {
        Ok(means)
    } else {
        Err(format!("violated: {}; episodes 1-10 means: {means}", failed.join(", ")))
    }
}

fn rdr_oracle_equivalence() -> Result<String, String> {
    let mut rng = seeded(0xacce);
    let mut deepest = 0;
    let mut largest = 0;
    let mut compared = 0;
    for _ in 0..20 {
        let tree = random_tree(&mut rng, 6, 63);
        deepest = deepest.max(tree.depth());
        largest = largest.max(tree.len());
        let paths = enumerate_paths(&tree);
        for _ in 0..10_000 {
            let case = random_case(&mut rng);
            let got = tree.classify(&case).map_err(|e| e.to_string())?.conclusion;
            let want = oracle_conclusion(&tree, &paths, &case);
            if got != want {
                return Err(format!("case {case:?}: tree says {got:?}, oracle {want:?}"));
            }
            compared += 1;
        }
    }
    if deepest > 6 {
        return Err(format!("generator built a tree of depth {deepest}"));
    }

    let mut tree = RdrTree::new();
    let mut accepted = 0;
    let mut conflicts = 0;
    for i in 0..1000 {
        let case = random_case(&mut rng);
        let at = tree.classify(&case).map_err(|e| e.to_string())?.insertion_node;
        let before: Vec<_> = cornerstone_conclusions(&tree);
        let rule = rule_true_on(&case, &mut rng);
        let action = ActionId(rng.random_range(0..5));
        match tree.insert(at, rule, action, case) {
            Ok(_) => accepted += 1,
            Err(RdrError::CornerstoneConflict(_)) => conflicts += 1,
            Err(e) => return Err(format!("insertion {i}: {e}")),
        }
        let after = cornerstone_conclusions(&tree);
        if after[..before.len()] != before[..] {
            return Err(format!("insertion {i} changed an earlier cornerstone's conclusion"));
        }
        if after.iter().any(|(id, c)| tree.node(*id).unwrap().conclusion != *c) {
            return Err(format!("after insertion {i} a cornerstone no longer reaches its own node's conclusion"));
        }
    }
    Ok(format!(
        "{compared} classifications over 20 trees (max depth {deepest}, max {largest} nodes); \
         fuzz {accepted} accepted, {conflicts} refused"
    ))
}

fn cornerstone_conclusions(tree: &RdrTree) -> Vec<(advice_loop_core::advice::NodeId, advice_loop_core::advice::Conclusion)> {
    tree.nodes()
        .filter_map(|(id, n)| n.cornerstone.as_ref().map(|c| (id, tree.classify(c).unwrap().conclusion)))
        .collect()
}

fn q_learning_chain() -> Result<String, String> {
    // States 0..4, goal 4. Left/right moves, -1 per step, +10 on reaching the goal.
    const N: usize = 5;
    const GOAL: usize = N - 1;
    let params = LearningParams {
        alpha: 0.5,
        gamma: 0.9,
        epsilon: 1.0,
    };
    let step = |s: usize, a: usize| -> (usize, f64) {
        let next = if a == 0 { s.saturating_sub(1) } else { s + 1 };
        (next, if next == GOAL { 10.0 } else { -1.0 })
    };

    let mut oracle = [[0.0f64; 2]; N];
    for _ in 0..1000 {
        let mut next_q = oracle;
        for s in 0..GOAL {
            for a in 0..2 {
                let (n, r) = step(s, a);
                let v = if n == GOAL { 0.0 } else { oracle[n][0].max(oracle[n][1]) };
                next_q[s][a] = r + params.gamma * v;
            }
        }
        oracle = next_q;
    }

    let mut q = QTable::new(N, 2);
    let mut rng = seeded(6);
    let mut s = rng.random_range(0..GOAL);
    for _ in 0..10_000 {
        let a = epsilon_greedy(&q, StateId(s), params.epsilon, &mut rng)
            .map_err(|e| e.to_string())?
            .action;
        let (n, r) = step(s, a.0);
        let next = (n != GOAL).then_some(StateId(n));
        q.update(StateId(s), a, r, next, &params).map_err(|e| e.to_string())?;
        s = if n == GOAL { rng.random_range(0..GOAL) } else { n };
    }

    let mut worst: f64 = 0.0;
    for s in 0..GOAL {
        for a in 0..2 {
            worst = worst.max((q.get(StateId(s), ActionId(a)).unwrap() - oracle[s][a]).abs());
        }
    }
    let detail = format!("max |Q - Q*| = {worst:.2e} after 10000 steps");
    if worst <= 1e-3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn state_space_counts() -> Result<String, String> {
    let mut mc = BTreeSet::new();
    let n = 1000;
    for i in 0..=n {
        for j in 0..=n {
            let position = MIN_POSITION + (MAX_POSITION - MIN_POSITION) * i as f64 / n as f64;
            let velocity = -MAX_SPEED + 2.0 * MAX_SPEED * j as f64 / n as f64;
            mc.insert(mountain_car::discretize(McState { position, velocity }, 20).unwrap());
        }
    }
    let mc_env = EnvConfig::default().build().map_err(|e| e.to_string())?;

    let mut sdc = BTreeSet::new();
    for mask in 0..256u32 {
        let sensors: [bool; 8] = std::array::from_fn(|k| mask >> k & 1 == 1);
        for level in 0..9 {
            let obs = SdcObservation::new(sensors, 1.0 + 0.5 * level as f64).map_err(|e| e.to_string())?;
            let id = obs.encode();
            if SdcObservation::decode(id).map_err(|e| e.to_string())? != obs {
                return Err(format!("driving observation {id} does not decode back"));
            }
            sdc.insert(id);
        }
    }
    let sdc_env = EnvConfig {
        kind: EnvKind::SelfDrivingCar,
        ..EnvConfig::default()
    }
    .build()
    .map_err(|e| e.to_string())?;
    let pairs = sdc.len() * sdc_env.actions().len();

    let detail = format!(
        "mountain car {} states (env reports {}), max id {:?}; driving {} observations x {} actions = {pairs} pairs (env reports {})",
        mc.len(),
        mc_env.state_count(),
        mc.last(),
        sdc.len(),
        sdc_env.actions().len(),
        sdc_env.state_count() * sdc_env.actions().len(),
    );
    let ok = mc.len() == 400
        && mc_env.state_count() == 400
        && mc.last() == Some(&StateId(399))
        && sdc.len() == OBSERVATION_COUNT
        && pairs == 11520
        && sdc_env.state_count() * sdc_env.actions().len() == 11520;
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reproducible_metrics_csv() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("config.toml");
    std::fs::write(&config, "[experiment]\nruns = 6\nepisodes = 30\n").map_err(|e| e.to_string())?;
    let run = |out: &str, parallel: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_advice-loop"))
            .args(["run", "--combo", "PI-R", "--seed", "1234", "--parallel", parallel])
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        std::fs::read(out.join("PI-R").join("metrics.csv")).map_err(|e| e.to_string())
    };
    let first = run("a", "1")?;
    let second = run("b", "1")?;
    let threaded = run("c", "2")?;
    let detail = format!("{} bytes of metrics.csv", first.len());
    if first != second {
        Err(format!("two serial executions differ; {detail}"))
    } else if first != threaded {
        Err(format!("serial and two-thread executions differ; {detail}"))
    } else if first.is_empty() {
        Err("metrics.csv is empty".into())
    } else {
        Ok(format!("{detail} identical across two serial runs and one two-thread run"))
    }
}
