//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use artgraph::embed::{node2vec, Node2VecConfig};
use artgraph::error::Error;
use artgraph::experiment::{
    assemble_dataset, embed_training_graph, generate_scale_graph, generate_synthetic, split, ScaleSpec,
    SyntheticSpec,
};
use artgraph::graph::NodeId;
use artgraph::model::Mode;
use serde_json::Value;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn artgraph(dir: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_artgraph"))
        .args(args)
        .current_dir(dir)
        .env_clear()
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("artgraph {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn within(limit: Duration, t: Instant) -> Result<f64, String> {
    let secs = t.elapsed().as_secs_f64();
    if t.elapsed() > limit {
        Err(format!("took {secs:.1}s, limit {}s", limit.as_secs()))
    } else {
        Ok(secs)
    }
}

fn gradient_oracle() -> Check {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for mode in Mode::ALL {
        for seed in 0..10 {
            let cfg = common::toy(mode, seed);
            let err = common::worst_gradient_error(&cfg, &common::batch(seed, 5));
            if err > 1e-4 {
                return Err(format!("{mode} seed {seed}: relative error {err:e}"));
            }
            worst = worst.max(err);
        }
    }
    let secs = within(Duration::from_secs(10), t)?;
    Ok(format!("worst relative error {worst:.2e} over 3 modes x 10 seeds in {secs:.2}s"))
}

fn loss_anchors() -> Check {
    common::loss_anchors()?;
    Ok("uniform logits give ln 4, equal vectors give 0, gamma 0 and 1 isolate each term".into())
}

fn transition_and_alias() -> Check {
    let worst = common::transition_rule_max_error(100)?;
    if worst > 1e-12 {
        return Err(format!("transition weights off by {worst:e}"));
    }
    let tv = common::alias_total_variation(1_000_000);
    if tv > 0.005 {
        return Err(format!("alias total variation {tv:.5}"));
    }
    Ok(format!("max weight error {worst:e} on 100 graphs, alias TV {tv:.5} at 1e6 draws"))
}

fn homophily() -> Check {
    let t = Instant::now();
    let (g, left, right) = common::barbell();
    let mut seps = Vec::new();
    for seed in 0..10 {
        let table = node2vec(&g, &Node2VecConfig { seed, ..Default::default() }).map_err(|e| e.to_string())?;
        seps.push(common::separation(&table, &left, &right));
    }
    let secs = within(Duration::from_secs(30), t)?;
    let passing = seps.iter().filter(|&&s| s >= 0.2).count();
    let min = seps.iter().copied().fold(f64::INFINITY, f64::min);
    if passing < 9 {
        return Err(format!("{passing}/10 seeds separate by 0.2 (min {min:.3})"));
    }
    Ok(format!("{passing}/10 seeds separate by >= 0.2 (min {min:.3}) in {secs:.1}s"))
}

fn planted_comparison() -> Check {
    let t = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let json = artgraph(dir.path(), &["compare", "--seed", "0", "--format", "json"])?;
    let secs = within(Duration::from_secs(300), t)?;
    let committed = std::fs::read_to_string(fixtures().join("compare_seed0.json")).map_err(|e| e.to_string())?;
    let report: Value = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    let style = |mode: &str| -> Result<f64, String> {
        report["rows"]
            .as_array()
            .and_then(|rows| rows.iter().find(|r| r["mode"] == mode))
            .and_then(|r| r["test"]["style"].as_f64())
            .ok_or_else(|| format!("no {mode} row"))
    };
    let (base, multi) = (style("visual_only")?, style("multimodal")?);
    let margin = multi - base;
    if margin < 0.05 {
        return Err(format!("multimodal style {multi:.4} vs visual_only {base:.4}"));
    }
    let note = if json == committed { "matches committed report" } else { "differs from committed report" };
    Ok(format!(
        "style accuracy multimodal {:.2}% vs visual_only {:.2}% (+{:.2} points) in {secs:.1}s, {note}",
        100.0 * multi,
        100.0 * base,
        100.0 * margin
    ))
}

fn leakage() -> Check {
    let spec = SyntheticSpec { num_artists: 6, artworks_per_artist: 20, ..Default::default() };
    let (g, features) = generate_synthetic(&spec).map_err(|e| e.to_string())?;
    let n2v = |seed| Node2VecConfig { dim: 16, walk_length: 20, walks_per_node: 4, epochs: 1, seed, ..Default::default() };
    for seed in 0..20 {
        let s = split(&g, seed).map_err(|e| e.to_string())?;
        let table = embed_training_graph(&g, &s, &n2v(seed)).map_err(|e| e.to_string())?;
        let ids: BTreeSet<NodeId> = table.ids().iter().copied().collect();
        let leaked = ids.intersection(&s.held_out().into_iter().collect()).count();
        if leaked > 0 {
            return Err(format!("split seed {seed}: {leaked} held-out artworks embedded"));
        }
    }
    let s = split(&g, 0).map_err(|e| e.to_string())?;
    let full = node2vec(&g, &n2v(0)).map_err(|e| e.to_string())?;
    match assemble_dataset(&g, &s, &full, &features) {
        Err(Error::Leakage(_)) => Ok("0 held-out ids over 20 split seeds; full-graph table rejected".into()),
        Err(e) => Err(format!("full-graph table failed with the wrong error: {e}")),
        Ok(_) => Err("full-graph table was accepted".into()),
    }
}

fn query_oracles() -> Check {
    let paths = common::check_influence_oracles(100)?;
    let joins = common::check_location_oracles(100)?;
    let g = generate_scale_graph(&ScaleSpec::default()).map_err(|e| e.to_string())?;
    let lat = common::scale_latencies(&g);
    let (name, worst) = lat.iter().copied().fold(("", 0.0), |a, b| if b.1 > a.1 { b } else { a });
    if worst >= 100.0 {
        return Err(format!("{name} took {worst:.1} ms"));
    }
    Ok(format!(
        "{paths} influence and {joins} location queries match on 100 graphs; slowest at {}k nodes / {}k edges: {name} {worst:.2} ms",
        g.node_count() / 1000,
        g.edge_count() / 1000
    ))
}

fn pipeline(dir: &Path) -> Result<String, String> {
    let f = fixtures().join("determinism");
    let path = |name: &str| f.join(name).to_string_lossy().into_owned();
    artgraph(dir, &["synth", "--spec", &path("spec.json"), "--seed", "42"])?;
    artgraph(dir, &["embed", "--config", &path("node2vec.json"), "--seed", "42", "--split-seed", "42"])?;
    artgraph(dir, &["train", "--config", &path("model.json"), "--seed", "42", "--split-seed", "42"])?;
    artgraph(dir, &["evaluate"])
}

fn determinism() -> Check {
    let committed = std::fs::read_to_string(fixtures().join("determinism/report.txt")).map_err(|e| e.to_string())?;
    for run in 1..=2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let report = pipeline(dir.path())?;
        if report != committed {
            return Err(format!("run {run} differs from the committed report:\n{report}"));
        }
    }
    Ok("synth, embed, train, evaluate at seed 42 match the committed report twice".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("gradient oracle", gradient_oracle),
        ("loss anchors", loss_anchors),
        ("walk transitions and alias sampling", transition_and_alias),
        ("embedding homophily", homophily),
        ("context beats the visual baseline", planted_comparison),
        ("no split leakage", leakage),
        ("query oracles and latency", query_oracles),
        ("pipeline determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let n = i + 1;
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("criterion {n} PASS {name}: {detail}"),
            Err(detail) => {
                println!("criterion {n} FAIL {name}: {detail}");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
