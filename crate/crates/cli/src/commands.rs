use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use obstacle_core::artifacts::{self, Check, StageArtifacts};
use obstacle_core::formats::{self, sha256_hex};
use obstacle_core::pairs::Pair;
use obstacle_core::pipeline::{self, OpHost, PipelineConfig, PipelineManifest, Source, StageManifest, StageName};
use obstacle_core::spanners::{self, Algorithm, Bound};
use obstacle_core::verify::{self, CertificateBitmap, Compressor, Scope, SearchMode, Stretch, SubgraphMask, UniversalHash};
use obstacle_core::{Graph, PipelineError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{
    Algo, CheckArg, CliError, CompressorArg, GenArgs, Host, IncompressArgs, ReportArgs, SpannerArgs, Stage,
    StressArgs, VerifyArgs,
};

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))
}

/// Writes `text` and returns its digest.
fn write(path: &Path, text: &str) -> Result<String> {
    formats::write_text(path, text)?;
    Ok(sha256_hex(text.as_bytes()))
}

fn write_json(path: &Path, value: &Value) -> Result<String> {
    write(path, &(serde_json::to_string_pretty(value).expect("json values serialise") + "\n"))
}

/// The run manifest: echoed flags plus digests of the files written.
fn write_run_manifest(dir: &Path, echo: &Value, outputs: BTreeMap<String, String>) -> Result<()> {
    write_json(&dir.join("run.json"), &json!({ "args": echo, "outputs": outputs }))?;
    Ok(())
}

fn config_for(a: &GenArgs) -> Result<PipelineConfig> {
    let last_stage = match a.stage {
        Stage::Base => StageName::Base,
        Stage::Compress => StageName::Compress,
        Stage::Op => StageName::Op,
    };
    let (source, epsilon) = if a.fixture {
        (Source::Fixture { k: a.k.unwrap_or(2) }, None)
    } else {
        let p = a.p.ok_or_else(|| usage("--p is required unless --fixture is given"))?;
        match a.eps {
            Some(eps) => {
                let plan = pipeline::plan(eps, p, a.k)?;
                let d = plan.params.d.expect("planned shell");
                println!(
                    "eps = {eps}: d = {d}, advisory k = {}{}, using k = {}",
                    plan.advisory_k,
                    if plan.advisory_flagged { " (degenerate at this scale)" } else { "" },
                    plan.params.k
                );
                if a.d.is_some_and(|x| x != d) {
                    return Err(usage(format!("--d conflicts with --eps (which implies d = {d})")));
                }
                (Source::Shell { p, d, k: plan.params.k, size_cap: a.size_cap }, Some(eps))
            }
            None => {
                let d = a.d.ok_or_else(|| usage("--d or --eps is required unless --fixture is given"))?;
                let k = a.k.ok_or_else(|| usage("--k is required with --d"))?;
                (Source::Shell { p, d, k, size_cap: a.size_cap }, None)
            }
        }
    };
    Ok(PipelineConfig {
        source,
        last_stage,
        op_host: match a.op_host {
            Host::Compressed => OpHost::Compressed,
            Host::Base => OpHost::Base,
        },
        node_ceiling: a.node_ceiling as u128,
        epsilon,
        seed: a.seed,
    })
}

pub fn gen(a: &GenArgs, echo: &Value) -> Result<()> {
    let config = config_for(a)?;
    let run = match pipeline::run_pipeline(&config) {
        Ok(run) => run,
        Err(PipelineError::AuditFailed { stage, report }) => {
            return Err(CliError::Findings(format!("{stage} stage: {report}")));
        }
        Err(e) => return Err(e.into()),
    };
    create_dir(&a.out)?;
    let manifest = run.write(&a.out)?;
    let outputs = manifest.stages.iter().map(|s| (format!("stage-{}", s.stage.as_str()), s.digest.clone())).collect();
    write_run_manifest(&a.out, echo, outputs)?;
    for s in &manifest.stages {
        let m = load_stage_manifest(&a.out.join(format!("stage-{}", s.stage.as_str())))?;
        println!(
            "{}: {} nodes, {} edges, {} pairs, digest {}",
            s.stage.as_str(),
            m.node_count,
            m.edge_count,
            m.pair_count,
            &s.digest[..16]
        );
    }
    Ok(())
}

fn load_stage_manifest(dir: &Path) -> Result<StageManifest> {
    let path = dir.join("manifest.json");
    serde_json::from_str(&formats::read_text(&path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_pipeline_manifest(dir: &Path) -> Result<PipelineManifest> {
    let path = dir.join("manifest.json");
    serde_json::from_str(&formats::read_text(&path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Stage directories under a pipeline output, or the directory itself.
fn stage_dirs(input: &Path) -> Result<Vec<PathBuf>> {
    if input.join("stage-base").is_dir() {
        let m = load_pipeline_manifest(input)?;
        Ok(m.stages.iter().map(|s| input.join(format!("stage-{}", s.stage.as_str()))).collect())
    } else {
        Ok(vec![input.to_path_buf()])
    }
}

pub fn verify(a: &VerifyArgs, echo: &Value) -> Result<()> {
    let mut reports = Vec::new();
    let mut dirty = Vec::new();
    for dir in stage_dirs(&a.input)? {
        let art = StageArtifacts::load(&dir)?;
        let mut checks: Vec<Check> = Vec::new();
        for c in &a.check {
            match c {
                CheckArg::All => checks.extend(Check::applicable(art.manifest.stage, art.pairs.len(), a.family_limit)),
                CheckArg::UniqueSp => checks.push(Check::UniqueSp),
                CheckArg::Disjoint => checks.push(Check::Disjoint),
                CheckArg::TwoPath => checks.push(Check::TwoPath),
                CheckArg::OpClaims => checks.push(Check::OpClaims),
                CheckArg::Family => checks.push(Check::Family),
            }
        }
        checks.sort();
        checks.dedup();
        let report = artifacts::verify_stage(&art, &checks);
        let names: Vec<&str> = report.findings.keys().map(String::as_str).collect();
        println!(
            "{}: {} ({})",
            dir.display(),
            if report.is_clean() { "clean" } else { "FINDINGS" },
            if names.is_empty() { "none".to_string() } else { names.join(", ") }
        );
        if !report.is_clean() {
            dirty.push(dir.display().to_string());
        }
        reports.push(report);
    }
    let path = a.report.clone().unwrap_or_else(|| a.input.join("verify-report.json"));
    write_json(&path, &json!({ "args": echo, "reports": reports }))?;
    if dirty.is_empty() {
        Ok(())
    } else {
        Err(CliError::Findings(format!("see {} ({})", path.display(), dirty.join(", "))))
    }
}

pub fn spanner(a: &SpannerArgs, echo: &Value) -> Result<()> {
    let (g, art): (Graph, Option<StageArtifacts>) = if a.input.is_dir() {
        let art = StageArtifacts::load(&a.input)?;
        (art.graph.clone(), Some(art))
    } else {
        let name = a.input.display().to_string();
        (formats::parse_edges(&name, &formats::read_text(&a.input)?)?, None)
    };
    if a.algo == Algo::Greedy && a.t == 0 {
        return Err(usage("--t must be at least 1"));
    }
    let sp = match a.algo {
        Algo::Plus2 => spanners::spanner_plus2(&g, a.threshold),
        Algo::Plus6 => spanners::spanner_plus6(&g),
        Algo::Greedy => spanners::spanner_greedy_mult(&g, a.t),
    };
    let extra: Vec<Pair> = art.as_ref().map(|x| x.pairs.clone()).unwrap_or_default();
    let result = spanners::audit_spanner(&g, &sp, &extra, a.seed);
    let within = match (result.algo, result.verified_bound) {
        (Algorithm::Plus2, Bound::Additive(s)) => s <= Stretch::Finite(2),
        (Algorithm::Plus6, Bound::Additive(s)) => s <= Stretch::Finite(6),
        (Algorithm::GreedyMult, Bound::Multiplicative(m)) => m <= (2 * a.t - 1) as f64,
        _ => false,
    };
    let mut pair_audit = Value::Null;
    let mut counting_ok = true;
    if let Some(art) = art.as_ref().filter(|x| x.manifest.stage == StageName::Op) {
        let og = art.obstacle();
        let report = verify::stretch_audit(&og, &SubgraphMask { kept: sp.kept.clone(), note: "spanner".into() }, Scope::AllPairs);
        // low stretch over the pairs forces one kept clique edge per pair
        if report.max_stretch < Stretch::Finite(og.k()) {
            counting_ok = report.kept_clique_edges >= og.pairs.len();
        }
        pair_audit = json!({
            "pairs": og.pairs.len(),
            "max_stretch": report.max_stretch,
            "witness": report.witness,
            "kept_clique_edges": report.kept_clique_edges,
            "counting_consistent": counting_ok,
        });
    }
    create_dir(&a.out)?;
    let mut outputs = BTreeMap::new();
    outputs.insert("spanner.edges".into(), write(&a.out.join("spanner.edges"), &formats::write_edges(&sp.graph(&g)))?);
    let manifest = json!({
        "algo": result.algo,
        "params": result.params,
        "n": result.n,
        "m_in": result.m_in,
        "m_out": result.m_out,
        "verified_bound": result.verified_bound,
        "audit_mode": result.audit_mode,
        "pairs_checked": result.pairs_checked,
        "pair_audit": pair_audit,
    });
    outputs.insert("spanner.json".into(), write_json(&a.out.join("spanner.json"), &manifest)?);
    write_run_manifest(&a.out, echo, outputs)?;
    println!(
        "{:?}: {} of {} edges kept, verified bound {}",
        result.algo,
        result.m_out,
        result.m_in,
        serde_json::to_string(&result.verified_bound).expect("json")
    );
    if within && counting_ok {
        Ok(())
    } else {
        Err(CliError::Findings("spanner exceeds its stretch contract or breaks the counting bound".into()))
    }
}

fn load_op(input: &Path) -> Result<obstacle_core::obstacle::ObstacleGraph> {
    let art = StageArtifacts::load(input)?;
    if art.manifest.stage != StageName::Op {
        return Err(usage(format!("{} is not an op stage", input.display())));
    }
    Ok(art.obstacle())
}

pub fn stress(a: &StressArgs, echo: &Value) -> Result<()> {
    let og = load_op(&a.input)?;
    let guaranteed = a.budget_clique_edges < og.pairs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut csv = String::from("trial,kept_certificate_edges,guaranteed,uncertified_pairs,witness_pair,stretch,ok\n");
    let mut failures = 0;
    for trial in 0..a.trials {
        let h = verify::random_certificate_mask(&og, a.budget_clique_edges, &mut rng);
        let uncertified = (0..og.pairs.len())
            .filter(|&i| {
                og.certificates[i].iter().all(|e| og.graph.edge_id(e.u(), e.v()).is_none_or(|id| !h.kept.contains(id)))
            })
            .count();
        let witness = verify::uncertified_pair(&og, &h);
        let ok = match witness {
            Some((_, s)) => s.at_least(og.k()),
            None => !guaranteed,
        };
        if guaranteed && !ok {
            failures += 1;
        }
        let (pair, stretch) = witness.map_or((String::new(), String::new()), |(p, s)| (p.to_string(), s.to_string()));
        csv.push_str(&format!(
            "{trial},{},{guaranteed},{uncertified},{pair},{stretch},{ok}\n",
            a.budget_clique_edges.min(og.certificates.iter().map(Vec::len).sum())
        ));
    }
    create_dir(&a.out)?;
    let mut outputs = BTreeMap::new();
    outputs.insert("stress.csv".into(), write(&a.out.join("stress.csv"), &csv)?);
    write_run_manifest(&a.out, echo, outputs)?;
    println!(
        "{} trials, budget {} of {} pairs ({}), {failures} failures",
        a.trials,
        a.budget_clique_edges,
        og.pairs.len(),
        if guaranteed { "guaranteed regime" } else { "exploratory" }
    );
    if failures == 0 {
        Ok(())
    } else {
        Err(CliError::Findings(format!("{failures} trials without a stretched witness")))
    }
}

pub fn incompress(a: &IncompressArgs, echo: &Value) -> Result<()> {
    let og = load_op(&a.input)?;
    if a.bits == 0 || a.bits > 64 {
        return Err(usage("--bits must lie in 1..=64"));
    }
    let compressor: Box<dyn Compressor> = match a.compressor {
        CompressorArg::Bitmap => Box::new(CertificateBitmap { bits: a.bits }),
        CompressorArg::Hash => Box::new(UniversalHash::new(og.graph.edge_count(), a.bits, a.seed)),
    };
    let mode = SearchMode::auto(og.pairs.len(), a.seed);
    create_dir(&a.out)?;
    let mut outputs = BTreeMap::new();
    let result = verify::pigeonhole_demo(&og, a.bits, compressor.as_ref(), mode);
    let outcome = match &result {
        Ok(w) => json!({ "witness": w, "k": og.k(), "gap_at_least_k_plus_1": w.gap.at_least(og.k() + 1) }),
        Err(e) => json!({ "inconclusive": e.to_string() }),
    };
    outputs.insert("collision.json".into(), write_json(&a.out.join("collision.json"), &outcome)?);
    write_run_manifest(&a.out, echo, outputs)?;
    match result {
        Ok(w) => {
            println!(
                "collision on code {:#x}: T1={:?} T2={:?}, pair {} at {:?} vs {:?} (gap {})",
                w.code, w.t1, w.t2, w.pair, w.dist_inside, w.dist_outside, w.gap
            );
            if w.gap.at_least(og.k() + 1) {
                Ok(())
            } else {
                Err(CliError::Findings(format!("distance gap {} is below k + 1 = {}", w.gap, og.k() + 1)))
            }
        }
        Err(obstacle_core::VerifyError::Inconclusive { searched }) => {
            Err(CliError::Findings(format!("inconclusive: no collision among {searched} members")))
        }
        Err(e) => Err(usage(e.to_string())),
    }
}

pub fn report(a: &ReportArgs) -> Result<()> {
    let m = load_pipeline_manifest(&a.input)?;
    let mut csv = String::from(
        "stage,node_count,edge_count,pair_count,k,pair_distance,ell,D,clique_edges,certificate_edges,digest,input_digest\n",
    );
    for s in &m.stages {
        let sm = load_stage_manifest(&a.input.join(format!("stage-{}", s.stage.as_str())))?;
        let opt = |x: Option<u32>| x.map_or(String::new(), |v| v.to_string());
        let (cliques, certs) = sm
            .counting
            .as_ref()
            .map_or((String::new(), String::new()), |c| (c.clique_edges.to_string(), c.certificate_edges.to_string()));
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            s.stage.as_str(),
            sm.node_count,
            sm.edge_count,
            sm.pair_count,
            sm.params.k,
            opt(sm.params.pair_distance),
            opt(sm.params.ell),
            opt(sm.params.op_distance),
            cliques,
            certs,
            s.digest,
            s.input_digest.clone().unwrap_or_default()
        ));
    }
    match &a.out {
        Some(path) => {
            write(path, &csv)?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}
