//! Reading stage artifacts back from disk and auditing them without the
//! in-memory construction. Canonical paths are not stored; they are
//! recovered as the unique shortest path of each pair (or the first one
//! found, when a pair has several, which the uniqueness check reports).

use std::collections::BTreeMap;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::error::FormatError;
use crate::formats::{self, sha256_hex, PairKind};
use crate::graph::{Edge, Graph, NodeId, Path};
use crate::labels::{NodeLabelTable, NodeRole};
use crate::obstacle::{self, ObstacleGraph};
use crate::pairs::{self, Pair, PairSet};
use crate::params::ConstructionParams;
use crate::pipeline::{StageManifest, StageName};
use crate::shortest::Bfs;
use crate::verify;

#[derive(Clone, Debug)]
pub struct StageArtifacts {
    pub manifest: StageManifest,
    pub graph: Graph,
    pub labels: NodeLabelTable,
    pub pairs: Vec<Pair>,
    pub certificates: Vec<Vec<Edge>>,
    /// Files whose sha256 differs from the manifest.
    pub digest_mismatches: Vec<String>,
}

impl StageArtifacts {
    pub fn load(dir: &FsPath) -> Result<Self, FormatError> {
        let file = |name: &str| dir.join(name);
        let name = |p: &FsPath| p.display().to_string();
        let manifest_path = file("manifest.json");
        let manifest: StageManifest = serde_json::from_str(&formats::read_text(&manifest_path)?)
            .map_err(|source| FormatError::Json { file: name(&manifest_path), source })?;

        let mut texts = BTreeMap::new();
        for f in ["graph.edges", "labels.json", "pairs.txt", "certificates.txt"] {
            texts.insert(f, formats::read_text(&file(f))?);
        }
        let mut digest_mismatches = Vec::new();
        for (f, text) in &texts {
            if manifest.files.get(*f) != Some(&sha256_hex(text.as_bytes())) {
                digest_mismatches.push(f.to_string());
            }
        }
        let graph = formats::parse_edges(&name(&file("graph.edges")), &texts["graph.edges"])?;
        let labels = formats::parse_labels(&name(&file("labels.json")), &texts["labels.json"], graph.node_count())?;
        let kind = match manifest.stage {
            StageName::Base => PairKind::Base,
            StageName::Compress => PairKind::Product,
            StageName::Op => PairKind::Obstacle,
        };
        let pairs = formats::parse_pairs(&name(&file("pairs.txt")), &texts["pairs.txt"], kind)?;
        for (i, p) in pairs.iter().enumerate() {
            for v in [p.s, p.t] {
                if v as usize >= graph.node_count() {
                    return Err(FormatError::parse(&name(&file("pairs.txt")), i + 1, format!("node {v} out of range")));
                }
            }
        }
        let certificates = formats::parse_certificates(&name(&file("certificates.txt")), &texts["certificates.txt"])?;
        if manifest.stage == StageName::Op && certificates.len() != pairs.len() {
            return Err(FormatError::parse(
                &name(&file("certificates.txt")),
                certificates.len() + 1,
                format!("{} certificates for {} pairs", certificates.len(), pairs.len()),
            ));
        }
        Ok(StageArtifacts { manifest, graph, labels, pairs, certificates, digest_mismatches })
    }

    /// Distance every pair of this stage should have.
    pub fn expected_distance(&self) -> u32 {
        let p = &self.manifest.params;
        match self.manifest.stage {
            StageName::Op => p.op_distance.unwrap_or(0),
            _ => p.pair_distance.unwrap_or(0),
        }
    }

    /// Pairs with paths recovered by BFS.
    pub fn recovered_pairs(&self) -> PairSet {
        let groups = pairs::group_by_source(&self.pairs);
        let mut paths = vec![Path(Vec::new()); self.pairs.len()];
        let mut bfs = Bfs::new(self.graph.node_count());
        for (s, members) in groups {
            bfs.run_counting(&self.graph, s, None);
            for i in members {
                let t = self.pairs[i].t;
                paths[i] = bfs
                    .unique_path_to(&self.graph, t)
                    .or_else(|| bfs.path_to(t))
                    .unwrap_or_else(|| Path(vec![s]));
            }
        }
        PairSet { pairs: self.pairs.clone(), paths }
    }

    /// Rebuilds an obstacle graph from an op stage. The host graph is not
    /// stored, so [`ObstacleGraph::host`] is empty on the result.
    pub fn obstacle(&self) -> ObstacleGraph {
        from_parts(
            self.graph.clone(),
            self.labels.clone(),
            self.manifest.params.clone(),
            self.recovered_pairs(),
            self.certificates.clone(),
            self.manifest.warnings.clone(),
        )
    }
}

fn from_parts(
    graph: Graph,
    labels: NodeLabelTable,
    params: ConstructionParams,
    pairs: PairSet,
    certificates: Vec<Vec<Edge>>,
    warnings: Vec<String>,
) -> ObstacleGraph {
    let mut first: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut path_nodes = 0;
    for (id, role) in labels.roles().iter().enumerate() {
        match *role {
            NodeRole::Clique { node, .. } => {
                first.entry(node).or_insert(id as NodeId);
            }
            _ => path_nodes += 1,
        }
    }
    let host_nodes = first.keys().next_back().map_or(0, |&v| v as usize + 1);
    let mut clique_offset = vec![graph.node_count() as NodeId; host_nodes + 1];
    for v in (0..host_nodes).rev() {
        clique_offset[v] = first.get(&(v as NodeId)).copied().unwrap_or(clique_offset[v + 1]);
    }
    if host_nodes == 0 {
        clique_offset[0] = path_nodes;
    }
    ObstacleGraph {
        graph,
        labels,
        ell: params.ell.unwrap_or(1),
        params,
        host: Graph::empty(host_nodes),
        host_pairs: PairSet::default(),
        pairs,
        certificates,
        clique_offset,
        warnings,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    UniqueSp,
    Disjoint,
    TwoPath,
    OpClaims,
    Family,
}

impl Check {
    /// Checks that apply to a stage; `family` only when the family has at
    /// most `2^family_limit` members.
    pub fn applicable(stage: StageName, pairs: usize, family_limit: usize) -> Vec<Check> {
        match stage {
            StageName::Base => vec![Check::UniqueSp, Check::Disjoint],
            StageName::Compress => vec![Check::UniqueSp, Check::TwoPath],
            StageName::Op if pairs <= family_limit => vec![Check::OpClaims, Check::Family],
            StageName::Op => vec![Check::OpClaims],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub stage: StageName,
    pub checks: Vec<Check>,
    pub expected_distance: u32,
    /// Non-empty findings per check name.
    pub findings: BTreeMap<String, serde_json::Value>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

fn record<T: Serialize>(findings: &mut BTreeMap<String, serde_json::Value>, name: &str, items: &[T]) {
    if !items.is_empty() {
        findings.insert(name.to_string(), serde_json::to_value(items).expect("findings serialise"));
    }
}

/// Runs the requested checks. Family enumeration uses the separation
/// `D + k` that [`obstacle::audit_op`] also enforces.
pub fn verify_stage(art: &StageArtifacts, checks: &[Check]) -> VerifyReport {
    let expected = art.expected_distance();
    let mut findings = BTreeMap::new();
    record(&mut findings, "digest_mismatches", &art.digest_mismatches);
    let set = art.recovered_pairs();

    if checks.contains(&Check::UniqueSp) {
        let measured = pairs::measure_pairs(&art.graph, &set, &|_| expected);
        let (unique, distance) = pairs::classify(measured, true);
        record(&mut findings, "unique_sp_failures", &unique);
        record(&mut findings, "distance_failures", &distance);
    }
    if checks.contains(&Check::Disjoint) {
        record(&mut findings, "edge_disjointness_violations", &pairs::edge_overlaps(&set.paths));
    }
    if checks.contains(&Check::TwoPath) {
        record(&mut findings, "two_path_violations", &pairs::two_path_overlaps(&set.paths));
    }
    if art.manifest.stage == StageName::Op && (checks.contains(&Check::OpClaims) || checks.contains(&Check::Family)) {
        let og = art.obstacle();
        record(&mut findings, "missing_certificate_edges", &og.missing_certificate_edges());
        if checks.contains(&Check::OpClaims) {
            let audit = obstacle::audit_op(&og);
            record(&mut findings, "distance_failures", &audit.distance_failures);
            record(&mut findings, "certificate_disjointness_violations", &audit.certificate_disjointness_violations);
            record(&mut findings, "detour_failures", &audit.detour_failures);
            record(&mut findings, "collateral_failures", &audit.collateral_failures);
        }
        if checks.contains(&Check::Family) {
            match verify::audit_family(&og, og.op_distance() + og.k(), 24) {
                Ok(f) => {
                    record(&mut findings, "family_outside_failures", &f.outside_failures);
                    record(&mut findings, "family_inside_failures", &f.inside_failures);
                }
                Err(e) => record(&mut findings, "family", &[e.to_string()]),
            }
        }
    }
    VerifyReport { stage: art.manifest.stage, checks: checks.to_vec(), expected_distance: expected, findings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{run_pipeline, PipelineConfig};
    use std::fs;

    fn written(stage: StageName) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        run_pipeline(&PipelineConfig::fixture(stage)).unwrap().write(dir.path()).unwrap();
        dir
    }

    #[test]
    fn clean_stages_verify() {
        let dir = written(StageName::Op);
        for stage in [StageName::Base, StageName::Compress, StageName::Op] {
            let art = StageArtifacts::load(&dir.path().join(format!("stage-{}", stage.as_str()))).unwrap();
            let checks = Check::applicable(stage, art.pairs.len(), 4);
            let report = verify_stage(&art, &checks);
            assert!(report.is_clean(), "{stage:?}: {:?}", report.findings);
        }
    }

    #[test]
    fn recovered_op_matches_built() {
        let run = run_pipeline(&PipelineConfig::fixture(StageName::Op)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        run.write(dir.path()).unwrap();
        let art = StageArtifacts::load(&dir.path().join("stage-op")).unwrap();
        let og = art.obstacle();
        let (built, _) = run.op.as_ref().unwrap();
        assert_eq!(og.clique_offset, built.clique_offset);
        assert_eq!(og.pairs.paths, built.pairs.paths);
        assert_eq!(og.certificates, built.certificates);
    }

    #[test]
    fn removed_certificate_edge_is_found() {
        let dir = written(StageName::Op);
        let stage = dir.path().join("stage-op");
        let art = StageArtifacts::load(&stage).unwrap();
        let e = art.certificates[0][0];
        let text = fs::read_to_string(stage.join("graph.edges")).unwrap();
        let cut = text.replace(&format!("\n{} {}\n", e.u(), e.v()), "\n");
        fs::write(stage.join("graph.edges"), cut).unwrap();
        let art = StageArtifacts::load(&stage).unwrap();
        let report = verify_stage(&art, &[Check::OpClaims]);
        assert!(report.findings.contains_key("distance_failures"));
        assert!(report.findings.contains_key("missing_certificate_edges"));
        assert_eq!(report.findings["digest_mismatches"], serde_json::json!(["graph.edges"]));
    }

    #[test]
    fn missing_labels_is_an_io_error() {
        let dir = written(StageName::Base);
        fs::remove_file(dir.path().join("stage-base/labels.json")).unwrap();
        assert!(matches!(StageArtifacts::load(&dir.path().join("stage-base")), Err(FormatError::Io { .. })));
    }
}
