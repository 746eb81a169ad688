//! Browser bindings. Each exported function returns a JSON string; the
//! `*_json` functions hold the logic so they can be tested natively.

use obstacle_core::avgfree::{self, AvgFreeSet, VerifyMode};
use obstacle_core::base;
use obstacle_core::obstacle;
use obstacle_core::pipeline::{run_pipeline, OpHost, PipelineConfig, Source, StageName};
use obstacle_core::verify::Stretch;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest base graph the layout view will draw.
pub const MAX_LAYOUT_NODES: usize = 4000;

fn avgfree_set(p: u64, d: u32, k: u32) -> Result<AvgFreeSet, String> {
    if p == 0 {
        avgfree::AvgFreeSet::from_elements(2, k, vec![1, 2]).map_err(|e| e.to_string())
    } else {
        avgfree::build_avgfree(p, d, k, None).map_err(|e| e.to_string())
    }
}

/// Shell sizes of `[p]^d`, the chosen set and a sampled average-free check.
pub fn shell_json(p: u64, d: u32, k: u32) -> Result<Value, String> {
    let shell = avgfree::build_shell(p, d).map_err(|e| e.to_string())?;
    let a = avgfree::build_avgfree(p, d, k, None).map_err(|e| e.to_string())?;
    let violations = avgfree::verify_avgfree(&a, VerifyMode::Sampled { trials: 20_000, seed: 1 })
        .map_err(|e| e.to_string())?;
    Ok(json!({
        "p": p,
        "d": d,
        "k": k,
        "r_star": shell.r_star,
        "sizes": shell.sizes.iter().map(|(r, n)| json!([r, n])).collect::<Vec<_>>(),
        "N": a.universe,
        "size": a.len(),
        "elements": a.elements.iter().take(500).collect::<Vec<_>>(),
        "violations_found": violations.len(),
    }))
}

/// Node positions `(x, layer)`, edges and pairs of the base graph. `p = 0`
/// selects the handcrafted set {1, 2}.
pub fn base_json(p: u64, d: u32, k: u32) -> Result<Value, String> {
    let a = avgfree_set(p, d, k)?;
    let (g, set) = base::build_base(&a).map_err(|e| e.to_string())?;
    let n = g.graph.node_count();
    if n > MAX_LAYOUT_NODES {
        return Err(format!("{n} nodes is too many to draw (limit {MAX_LAYOUT_NODES})"));
    }
    let audit = base::audit_base(&g, &set);
    let nodes: Vec<Value> = (0..n as u32).map(|v| json!([g.position(v), g.layer(v)])).collect();
    let edges: Vec<Value> = g.graph.edges().iter().map(|e| json!([e.u(), e.v()])).collect();
    let pairs: Vec<Value> = set.paths.iter().map(|p| json!(p.0)).collect();
    Ok(json!({
        "k": k,
        "width": g.width(),
        "nodes": nodes,
        "edges": edges,
        "paths": pairs,
        "clean": audit.is_clean(),
    }))
}

/// Builds the obstacle product of the handcrafted instance and deletes the
/// certificates of `deleted`, reporting every pair's distance and stretch.
pub fn deletion_json(on_compressed: bool, deleted: &[usize]) -> Result<Value, String> {
    let config = PipelineConfig {
        source: Source::Fixture { k: 2 },
        op_host: if on_compressed { OpHost::Compressed } else { OpHost::Base },
        ..PipelineConfig::fixture(StageName::Op)
    };
    let run = run_pipeline(&config).map_err(|e| e.to_string())?;
    let (og, _) = run.op.ok_or("no obstacle stage")?;
    if let Some(&i) = deleted.iter().find(|&&i| i >= og.pairs.len()) {
        return Err(format!("pair {i} out of range (0..{})", og.pairs.len()));
    }
    let d = og.op_distance();
    let rows: Vec<Value> = (0..og.pairs.len())
        .map(|i| {
            let dist = obstacle::distance_without(&og, i, deleted, None);
            let stretch = dist.map_or(Stretch::Infinite, |x| Stretch::Finite(x - d));
            json!({ "pair": i, "deleted": deleted.contains(&i), "dist": dist, "stretch": stretch })
        })
        .collect();
    Ok(json!({
        "nodes": og.graph.node_count(),
        "edges": og.graph.edge_count(),
        "k": og.k(),
        "D": d,
        "pairs": og.pairs.len(),
        "rows": rows,
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn shell(p: u32, d: u32, k: u32) -> Result<String, JsError> {
    to_js(shell_json(p as u64, d, k))
}

#[wasm_bindgen]
pub fn base_layout(p: u32, d: u32, k: u32) -> Result<String, JsError> {
    to_js(base_json(p as u64, d, k))
}

#[wasm_bindgen]
pub fn delete_certificates(on_compressed: bool, deleted: Vec<u32>) -> Result<String, JsError> {
    let deleted: Vec<usize> = deleted.into_iter().map(|i| i as usize).collect();
    to_js(deletion_json(on_compressed, &deleted))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_summary() {
        let v = shell_json(2, 3, 2).unwrap();
        assert_eq!(v["violations_found"], 0);
        assert!(v["size"].as_u64().unwrap() > 0);
    }

    #[test]
    fn fixture_layout() {
        let v = base_json(0, 0, 2).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 18);
        assert_eq!(v["paths"].as_array().unwrap().len(), 4);
        assert_eq!(v["clean"], true);
        assert!(base_json(9, 9, 2).is_err());
    }

    #[test]
    fn deleting_one_certificate() {
        let v = deletion_json(false, &[1]).unwrap();
        let rows = v["rows"].as_array().unwrap();
        for r in rows {
            if r["deleted"] == true {
                assert_ne!(r["stretch"], 0);
            } else {
                assert_eq!(r["stretch"], 0);
            }
        }
        assert!(deletion_json(false, &[99]).is_err());
    }
}
