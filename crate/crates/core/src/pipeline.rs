//! Staged construction: average-free set, base graph, compression, obstacle
//! product. Each stage is audited before the next one runs, and artifacts
//! are written with a sha256 digest chain between stages.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::avgfree::{self, AvgFreeSet, VerifyMode};
use crate::base::{self, BaseAudit, LayeredGraph};
use crate::compress::{self, CompressedAudit, CompressedGraph};
use crate::error::{FormatError, PipelineError};
use crate::formats::{self, sha256_hex};
use crate::graph::{Edge, Graph};
use crate::labels::NodeLabelTable;
use crate::obstacle::{self, ObstacleAudit, ObstacleGraph};
use crate::pairs::{Pair, PairSet};
use crate::params::{self, ConstructionParams};

/// Default ceiling on the node count of any product stage.
pub const DEFAULT_NODE_CEILING: u128 = compress::DEFAULT_NODE_CEILING;

/// Parameters derived from `ε` and a shell scale `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub params: ConstructionParams,
    pub advisory_k: i64,
    /// The advisory `k` is below 1 and an explicit `k` is required.
    pub advisory_flagged: bool,
    /// `Δ` of the compressed graph, `2k`.
    pub compressed_delta: u32,
    pub ell: u32,
    #[serde(rename = "D")]
    pub op_distance: u32,
}

/// `d = ⌈3/ε⌉`, `δ = 1/(2d²)`, the advisory `k`, and the sizes of the full
/// pipeline with `k_override` (or the advisory `k` when it is usable).
pub fn plan(epsilon: f64, p: u64, k_override: Option<u32>) -> Result<Plan, PipelineError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(PipelineError::Config(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if p < 2 {
        return Err(PipelineError::Config(format!("p must be at least 2, got {p}")));
    }
    let d = params::dimension_for(epsilon);
    let advisory_k = params::advisory_k(p, d);
    let advisory_flagged = advisory_k < 1;
    let k = match (k_override, advisory_flagged) {
        (Some(k), _) => k,
        (None, false) => advisory_k as u32,
        (None, true) => {
            return Err(PipelineError::Config(format!(
                "advisory k = {advisory_k} for p={p}, d={d}; pass an explicit k"
            )));
        }
    };
    if k < 1 {
        return Err(PipelineError::Config("k must be at least 1".into()));
    }
    let q = (k as u64 + 1) * p;
    q.checked_pow(d).ok_or_else(|| PipelineError::Config(format!("universe ({q})^{d} overflows")))?;
    let mut params = ConstructionParams::shell(p, d, k);
    params.epsilon = Some(epsilon);
    params.delta = Some(params::shell_delta(d));
    params.pair_distance = Some(k);
    let compressed_delta = 2 * k;
    Ok(Plan {
        params,
        advisory_k,
        advisory_flagged,
        compressed_delta,
        ell: 3 * compressed_delta,
        op_distance: compressed_delta * 3 * compressed_delta + compressed_delta - 1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Source {
    Shell { p: u64, d: u32, k: u32, size_cap: Option<usize> },
    /// The handcrafted set `A = {1, 2}` in `[2]`.
    Fixture { k: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageName {
    Base,
    Compress,
    Op,
}

impl StageName {
    pub fn as_str(self) -> &'static str {
        match self {
            StageName::Base => "base",
            StageName::Compress => "compress",
            StageName::Op => "op",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpHost {
    Compressed,
    Base,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub source: Source,
    pub last_stage: StageName,
    pub op_host: OpHost,
    pub node_ceiling: u128,
    pub epsilon: Option<f64>,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn fixture(last_stage: StageName) -> Self {
        PipelineConfig {
            source: Source::Fixture { k: 2 },
            last_stage,
            op_host: OpHost::Compressed,
            node_ceiling: DEFAULT_NODE_CEILING,
            epsilon: None,
            seed: 0,
        }
    }

    pub fn shell(p: u64, d: u32, k: u32, last_stage: StageName) -> Self {
        PipelineConfig { source: Source::Shell { p, d, k, size_cap: None }, ..Self::fixture(last_stage) }
    }

    fn runs(&self, stage: StageName) -> bool {
        match stage {
            StageName::Base => true,
            StageName::Compress => {
                self.last_stage == StageName::Compress
                    || (self.last_stage == StageName::Op && self.op_host == OpHost::Compressed)
            }
            StageName::Op => self.last_stage == StageName::Op,
        }
    }
}

/// Stage outputs held in memory.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub config: PipelineConfig,
    pub avgfree: AvgFreeSet,
    pub base: LayeredGraph,
    pub base_pairs: PairSet,
    pub base_audit: BaseAudit,
    pub compressed: Option<(CompressedGraph, CompressedAudit)>,
    pub op: Option<(ObstacleGraph, ObstacleAudit)>,
}

fn failed<T: Serialize>(stage: &str, report: &T) -> PipelineError {
    PipelineError::AuditFailed {
        stage: stage.to_string(),
        report: serde_json::to_value(report).expect("audit reports serialise"),
    }
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineRun, PipelineError> {
    let a = match config.source {
        Source::Shell { p, d, k, size_cap } => avgfree::build_avgfree(p, d, k, size_cap)?,
        Source::Fixture { k } => AvgFreeSet::from_elements(2, k, vec![1, 2])?,
    };
    if config.last_stage == StageName::Op && a.k < 2 {
        return Err(PipelineError::Construction(crate::ConstructionError::Degenerate(format!(
            "k = {} gives a degenerate obstacle product; use k >= 2",
            a.k
        ))));
    }
    let violations = avgfree::verify_avgfree(&a, VerifyMode::exhaustive())?;
    if !violations.is_empty() {
        return Err(failed("avgfree", &violations));
    }

    let (mut base, base_pairs) = base::build_base(&a)?;
    base.params.epsilon = config.epsilon;
    if let (Some(eps), Some(d)) = (config.epsilon, base.params.d) {
        if params::dimension_for(eps) == d {
            base.params.delta = Some(params::shell_delta(d));
        }
    }
    let base_audit = base::audit_base(&base, &base_pairs);
    if !base_audit.is_clean() {
        return Err(failed("base", &base_audit));
    }

    let compressed = if config.runs(StageName::Compress) {
        let o = compress::orient(&base.graph, &base_pairs)?;
        let cg = compress::compress(&base.graph, &base_pairs, &o, &base.params, config.node_ceiling)?;
        let audit = compress::audit_compressed(&cg);
        if !audit.is_clean() {
            return Err(failed("compress", &audit));
        }
        Some((cg, audit))
    } else {
        None
    };

    let op = if config.runs(StageName::Op) {
        let (host, pairs, params) = match (&compressed, config.op_host) {
            (Some((cg, _)), OpHost::Compressed) => (&cg.graph, &cg.pairs, &cg.params),
            _ => (&base.graph, &base_pairs, &base.params),
        };
        let delta = params.pair_distance.expect("host stages record Δ");
        let og = obstacle::build_op(host, pairs, delta, params, config.node_ceiling)?;
        let audit = obstacle::audit_op(&og);
        if !audit.is_clean() {
            return Err(failed("op", &audit));
        }
        Some((og, audit))
    } else {
        None
    };

    Ok(PipelineRun { config: config.clone(), avgfree: a, base, base_pairs, base_audit, compressed, op })
}

/// The finite form of the counting argument: one certificate per pair,
/// pairwise disjoint, inside the clique-edge total.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingSummary {
    pub pairs: usize,
    pub certificate_edges: usize,
    pub clique_edges: usize,
    pub path_nodes: usize,
    pub clique_nodes: usize,
    pub node_count: usize,
    #[serde(rename = "D")]
    pub op_distance: u32,
    pub k: u32,
    pub host: OpHost,
    /// `|pairs| ≤ clique edges`, as the disjoint certificates require.
    pub pairs_within_clique_edges: bool,
}

impl CountingSummary {
    pub fn of(og: &ObstacleGraph, host: OpHost) -> Self {
        let clique_nodes = (og.graph.node_count() as u32 - og.clique_offset[0]) as usize;
        CountingSummary {
            pairs: og.pairs.len(),
            certificate_edges: og.certificates.iter().map(Vec::len).sum(),
            clique_edges: og.clique_edge_count(),
            path_nodes: og.clique_offset[0] as usize,
            clique_nodes,
            node_count: og.graph.node_count(),
            op_distance: og.op_distance(),
            k: og.k(),
            host,
            pairs_within_clique_edges: og.pairs.len() <= og.clique_edge_count(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageManifest {
    pub stage: StageName,
    pub params: ConstructionParams,
    pub node_count: usize,
    pub edge_count: usize,
    pub pair_count: usize,
    pub counts: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub host: Option<OpHost>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counting: Option<CountingSummary>,
    pub audit: serde_json::Value,
    pub warnings: Vec<String>,
    pub input_digest: Option<String>,
    /// sha256 of each artifact file.
    pub files: BTreeMap<String, String>,
    /// sha256 over the sorted `name digest` lines of `files`.
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub config: PipelineConfig,
    pub stages: Vec<StageSummary>,
    pub counting: Option<CountingSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: StageName,
    pub input_digest: Option<String>,
    pub digest: String,
}

fn chain_digest(files: &BTreeMap<String, String>) -> String {
    let joined: String = files.iter().map(|(k, v)| format!("{k} {v}\n")).collect();
    sha256_hex(joined.as_bytes())
}

struct StageFiles<'a> {
    graph: &'a Graph,
    labels: &'a NodeLabelTable,
    pairs: &'a [Pair],
    certificates: &'a [Vec<Edge>],
    extra: Vec<(&'static str, String)>,
}

fn write_stage(dir: &FsPath, files: StageFiles<'_>) -> Result<BTreeMap<String, String>, FormatError> {
    fs::create_dir_all(dir).map_err(|source| FormatError::Io { path: dir.display().to_string(), source })?;
    let mut contents = vec![
        ("graph.edges", formats::write_edges(files.graph)),
        ("labels.json", formats::write_labels(files.labels)),
        ("pairs.txt", formats::write_pairs(files.pairs)),
        ("certificates.txt", formats::write_certificates(files.certificates)),
    ];
    contents.extend(files.extra);
    let mut digests = BTreeMap::new();
    for (name, text) in contents {
        formats::write_text(&dir.join(name), &text)?;
        digests.insert(name.to_string(), sha256_hex(text.as_bytes()));
    }
    Ok(digests)
}

fn write_json<T: Serialize>(path: &FsPath, value: &T) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|source| FormatError::Json { file: path.display().to_string(), source })?;
    text.push('\n');
    formats::write_text(path, &text)
}

impl PipelineRun {
    /// Writes `<out>/stage-<name>/…` for every stage that ran and the
    /// pipeline manifest `<out>/manifest.json`.
    pub fn write(&self, out: &FsPath) -> Result<PipelineManifest, FormatError> {
        let mut stages = Vec::new();
        let audit_json = |v: serde_json::Result<serde_json::Value>| v.expect("audit reports serialise");

        let avgfree_json = serde_json::to_string_pretty(&self.avgfree.to_json()).expect("json") + "\n";
        let files = write_stage(
            &out.join("stage-base"),
            StageFiles {
                graph: &self.base.graph,
                labels: &self.base.labels,
                pairs: &self.base_pairs.pairs,
                certificates: &[],
                extra: vec![("avgfree.json", avgfree_json)],
            },
        )?;
        let digest = chain_digest(&files);
        let m = StageManifest {
            stage: StageName::Base,
            params: self.base.params.clone(),
            node_count: self.base.graph.node_count(),
            edge_count: self.base.graph.edge_count(),
            pair_count: self.base_pairs.len(),
            counts: BTreeMap::from([("A".into(), self.avgfree.len() as u64)]),
            host: None,
            counting: None,
            audit: audit_json(serde_json::to_value(&self.base_audit)),
            warnings: Vec::new(),
            input_digest: None,
            files,
            digest: digest.clone(),
        };
        write_json(&out.join("stage-base/manifest.json"), &m)?;
        stages.push(StageSummary { stage: StageName::Base, input_digest: None, digest: digest.clone() });
        let base_digest = digest;
        let mut host_digest = base_digest.clone();

        if let Some((cg, audit)) = &self.compressed {
            let files = write_stage(
                &out.join("stage-compress"),
                StageFiles {
                    graph: &cg.graph,
                    labels: &cg.labels,
                    pairs: &cg.pairs.pairs,
                    certificates: &[],
                    extra: Vec::new(),
                },
            )?;
            let digest = chain_digest(&files);
            let m = StageManifest {
                stage: StageName::Compress,
                params: cg.params.clone(),
                node_count: cg.graph.node_count(),
                edge_count: cg.graph.edge_count(),
                pair_count: cg.pairs.len(),
                counts: BTreeMap::from([
                    ("host_nodes".into(), cg.host_nodes as u64),
                    ("forward_edges".into(), cg.forward_edges as u64),
                    ("edge_bound_forward".into(), 2 * cg.host_nodes as u64 * cg.forward_edges as u64),
                    ("edge_bound_loose".into(), cg.loose_edge_bound() as u64),
                ]),
                host: None,
                counting: None,
                audit: audit_json(serde_json::to_value(audit)),
                warnings: Vec::new(),
                input_digest: Some(base_digest.clone()),
                files,
                digest: digest.clone(),
            };
            write_json(&out.join("stage-compress/manifest.json"), &m)?;
            stages.push(StageSummary { stage: StageName::Compress, input_digest: Some(base_digest.clone()), digest: digest.clone() });
            host_digest = digest;
        }

        let mut counting = None;
        if let Some((og, audit)) = &self.op {
            let host = if self.compressed.is_some() && self.config.op_host == OpHost::Compressed {
                OpHost::Compressed
            } else {
                host_digest = base_digest.clone();
                OpHost::Base
            };
            let files = write_stage(
                &out.join("stage-op"),
                StageFiles {
                    graph: &og.graph,
                    labels: &og.labels,
                    pairs: &og.pairs.pairs,
                    certificates: &og.certificates,
                    extra: Vec::new(),
                },
            )?;
            let digest = chain_digest(&files);
            let summary = CountingSummary::of(og, host);
            let m = StageManifest {
                stage: StageName::Op,
                params: og.params.clone(),
                node_count: og.graph.node_count(),
                edge_count: og.graph.edge_count(),
                pair_count: og.pairs.len(),
                counts: BTreeMap::from([
                    ("host_nodes".into(), og.host.node_count() as u64),
                    ("host_edges".into(), og.host.edge_count() as u64),
                ]),
                host: Some(host),
                counting: Some(summary.clone()),
                audit: audit_json(serde_json::to_value(audit)),
                warnings: og.warnings.clone(),
                input_digest: Some(host_digest.clone()),
                files,
                digest: digest.clone(),
            };
            write_json(&out.join("stage-op/manifest.json"), &m)?;
            stages.push(StageSummary { stage: StageName::Op, input_digest: Some(host_digest), digest });
            counting = Some(summary);
        }

        let manifest = PipelineManifest { config: self.config.clone(), stages, counting };
        write_json(&out.join("manifest.json"), &manifest)?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_examples() {
        let p = plan(1.0, 2, Some(2)).unwrap();
        assert!(p.advisory_flagged);
        assert_eq!(p.advisory_k, 0);
        assert_eq!((p.params.d, p.params.universe), (Some(3), 216));
        assert_eq!((p.compressed_delta, p.ell, p.op_distance), (4, 12, 51));
        assert_eq!(p.params.delta, Some(1.0 / 18.0));
        let p = plan(0.5, 2, Some(1)).unwrap();
        assert_eq!((p.params.d, p.params.delta), (Some(6), Some(1.0 / 72.0)));
        assert!(plan(1.0, 2, None).is_err());
        assert!(plan(0.0, 2, Some(1)).is_err());
        assert!(plan(1.5, 2, Some(1)).is_err());
    }

    #[test]
    fn base_only_shell() {
        let run = run_pipeline(&PipelineConfig::shell(2, 3, 2, StageName::Base)).unwrap();
        assert_eq!(run.base.graph.node_count(), 1944);
        assert_eq!(run.base_pairs.len(), 648);
        assert!(run.compressed.is_none() && run.op.is_none());
    }

    #[test]
    fn fixture_full_pipeline() {
        let run = run_pipeline(&PipelineConfig::fixture(StageName::Op)).unwrap();
        let (cg, _) = run.compressed.as_ref().unwrap();
        assert_eq!((cg.graph.node_count(), cg.pairs.len()), (648, 16));
        let (og, audit) = run.op.as_ref().unwrap();
        assert!(audit.is_clean());
        assert_eq!(og.op_distance(), 51);
        let c = CountingSummary::of(og, OpHost::Compressed);
        assert_eq!(c.certificate_edges, 48);
        assert_eq!(c.path_nodes + c.clique_nodes, c.node_count);
        assert!(c.pairs_within_clique_edges);
    }

    #[test]
    fn op_on_base_host() {
        let mut cfg = PipelineConfig::fixture(StageName::Op);
        cfg.op_host = OpHost::Base;
        let run = run_pipeline(&cfg).unwrap();
        assert!(run.compressed.is_none());
        assert_eq!(run.op.unwrap().0.op_distance(), 13);
    }

    #[test]
    fn degenerate_op_is_rejected() {
        let cfg = PipelineConfig { source: Source::Fixture { k: 1 }, ..PipelineConfig::fixture(StageName::Op) };
        assert!(matches!(run_pipeline(&cfg), Err(PipelineError::Construction(_))));
        let cfg = PipelineConfig { source: Source::Fixture { k: 1 }, ..PipelineConfig::fixture(StageName::Compress) };
        assert!(run_pipeline(&cfg).is_ok());
    }

    #[test]
    fn ceiling_stops_compression() {
        let mut cfg = PipelineConfig::shell(2, 3, 2, StageName::Compress);
        cfg.node_ceiling = 1_000_000;
        assert!(matches!(
            run_pipeline(&cfg),
            Err(PipelineError::Construction(crate::ConstructionError::TooLarge { .. }))
        ));
    }

    #[test]
    fn artifacts_chain_and_repeat() {
        let run = run_pipeline(&PipelineConfig::fixture(StageName::Op)).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ma = run.write(a.path()).unwrap();
        let mb = run_pipeline(&PipelineConfig::fixture(StageName::Op)).unwrap().write(b.path()).unwrap();
        assert_eq!(ma, mb);
        for w in ma.stages.windows(2) {
            assert_eq!(w[1].input_digest.as_ref(), Some(&w[0].digest));
        }
        for name in ["stage-op/graph.edges", "stage-op/certificates.txt", "manifest.json"] {
            assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
        }
    }
}
