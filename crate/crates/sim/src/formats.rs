//! Output files: schema-tagged JSON documents, flat CSV tables, and the
//! run manifest.
//!
//! Everything written here is byte-deterministic for a given input. JSON
//! goes through `serde_json::Value`, whose object type keeps keys sorted,
//! and floats print in shortest round-trip form in both formats. The one
//! exception is the manifest's `created_unix` stamp, which is why replay
//! comparisons cover the data files and not the manifest itself.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use lilypond_core::analysis::Cluster;
use lilypond_core::{GrainStatus, HardCoreResult};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::experiments::TailCurve;
use crate::sampling::ScenarioSpec;
use crate::stats::{CltReport, CompareReport};

/// Serializes with a `schema` field injected at the top level, pretty
/// printed with a trailing newline.
pub fn to_schema_json<T: Serialize>(schema: &str, value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    if let Value::Object(map) = &mut v {
        map.insert("schema".to_owned(), Value::String(format!("{schema}/1")));
    }
    Ok(format!("{v:#}\n"))
}

pub fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    schema: &str,
    value: &T,
) -> io::Result<PathBuf> {
    let body = to_schema_json(schema, value).map_err(io::Error::other)?;
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

fn status_str(s: GrainStatus) -> &'static str {
    match s {
        GrainStatus::Stopped => "stopped",
        GrainStatus::Covered => "covered",
        GrainStatus::UnstoppedCapped => "unstopped-capped",
    }
}

/// One row per grain: id, coordinates, birth, growth, status, round.
pub fn grains_csv(result: &HardCoreResult) -> String {
    let d = result.dimension;
    let mut out = String::from("id");
    for i in 1..=d {
        out.push_str(&format!(",x{i}"));
    }
    out.push_str(",t,R,status,round\n");
    for g in &result.grains {
        out.push_str(&g.grain.id.to_string());
        for x in &g.grain.x {
            out.push_str(&format!(",{x}"));
        }
        out.push_str(&format!(
            ",{},{},{},{}\n",
            g.grain.t,
            g.r,
            status_str(g.status),
            g.round
        ));
    }
    out
}

pub fn clusters_csv(clusters: &[Cluster]) -> String {
    let mut out = String::from("cluster,size,has_doublet,touches_boundary,members\n");
    for (i, c) in clusters.iter().enumerate() {
        let members: Vec<String> = c.ids.iter().map(|id| id.to_string()).collect();
        out.push_str(&format!(
            "{i},{},{},{},{}\n",
            c.ids.len(),
            c.has_doublet,
            c.touches_boundary,
            members.join(" ")
        ));
    }
    out
}

pub fn tail_csv(curve: &TailCurve) -> String {
    let mut out = String::from("t,tail,stderr\n");
    for p in &curve.points {
        out.push_str(&format!("{},{},{}\n", p.t, p.tail, p.stderr));
    }
    out
}

/// One row per replicate per window: the raw functional samples behind the
/// normality summaries.
pub fn clt_samples_csv(report: &CltReport) -> String {
    let mut out = String::from("n,replicate,value\n");
    for slice in &report.slices {
        for (k, v) in slice.samples.iter().enumerate() {
            out.push_str(&format!("{},{k},{v}\n", slice.n));
        }
    }
    out
}

/// Long-format comparison table: one row per scenario, replicate, and
/// statistic, ready for external plotting.
pub fn compare_long_csv(report: &CompareReport) -> String {
    let mut out = String::from("scenario,replicate,statistic,value\n");
    for (k, v) in report.replicate_means_a.iter().enumerate() {
        out.push_str(&format!("a,{k},mean_r,{v}\n"));
    }
    for (k, v) in report.replicate_means_b.iter().enumerate() {
        out.push_str(&format!("b,{k},mean_r,{v}\n"));
    }
    for (k, v) in report.paired_diffs.iter().enumerate() {
        out.push_str(&format!("b-a,{k},mean_r_diff,{v}\n"));
    }
    out
}

/// Everything needed to reproduce a run byte for byte, plus the list of
/// files it produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub tool_version: String,
    pub created_unix: u64,
    pub command: String,
    pub spec: ScenarioSpec,
    /// Command-specific parameters, already resolved.
    pub params: Value,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, spec: &ScenarioSpec, params: Value, outputs: Vec<String>) -> Self {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            schema: "run-manifest/1".to_owned(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            created_unix,
            command: command.to_owned(),
            spec: spec.clone(),
            params,
            outputs,
        }
    }

    pub fn save(&self, dir: &Path) -> io::Result<PathBuf> {
        let body =
            serde_json::to_string_pretty(self).map_err(io::Error::other)? + "\n";
        let path = dir.join("manifest.json");
        fs::write(&path, body)?;
        Ok(path)
    }

    pub fn load(path: &Path) -> io::Result<RunManifest> {
        let body = fs::read_to_string(path)?;
        serde_json::from_str(&body).map_err(io::Error::other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{BirthLaw, GermLaw, ShapeLaw};
    use lilypond_core::{builder, Configuration, Grain, Shape, Window};

    fn two_ball_result() -> HardCoreResult {
        let w = Window::new(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap();
        let grains = vec![
            Grain::new(1, vec![2.0, 5.0], 0.0, Shape::ball(1.0).unwrap()),
            Grain::new(2, vec![8.0, 5.0], 0.0, Shape::ball(1.0).unwrap()),
        ];
        let cfg = Configuration::new(2, w, grains).unwrap();
        builder::build(&cfg).unwrap()
    }

    #[test]
    fn schema_field_lands_in_the_json() {
        let result = two_ball_result();
        let body = to_schema_json("hardcore-result", &result).unwrap();
        let v: Value = serde_json::from_str(&body).unwrap();
        assert_eq!(v["schema"], "hardcore-result/1");
        assert_eq!(v["engine"], "builder");
    }

    #[test]
    fn grains_csv_is_complete_and_parsable() {
        let result = two_ball_result();
        let csv = grains_csv(&result);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "id,x1,x2,t,R,status,round");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,2,5,0,3,stopped,"));
    }

    #[test]
    fn manifest_round_trips() {
        let spec = ScenarioSpec {
            dimension: 2,
            window: Window::new(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap(),
            germs: GermLaw::Poisson { intensity: 1.0 },
            births: BirthLaw::Constant,
            shapes: ShapeLaw::UnitBall,
            seed: 7,
        };
        let m = RunManifest::new(
            "simulate",
            &spec,
            serde_json::json!({"replicate": 0}),
            vec!["result.json".to_owned()],
        );
        let dir = tempfile::tempdir().unwrap();
        let path = m.save(dir.path()).unwrap();
        let back = RunManifest::load(&path).unwrap();
        assert_eq!(back.command, "simulate");
        assert_eq!(back.spec, spec);
        assert_eq!(back.outputs, vec!["result.json"]);
        assert_eq!(back.params["replicate"], 0);
    }

    #[test]
    fn json_bytes_are_stable_across_calls() {
        let result = two_ball_result();
        let a = to_schema_json("hardcore-result", &result).unwrap();
        let b = to_schema_json("hardcore-result", &result).unwrap();
        assert_eq!(a, b);
    }
}
