//! Deterministic report writers. No timestamps, no hash-map iteration:
//! identical runs must produce byte-identical files at any thread count.

use crate::config::{config_hash, config_map, CliConfig, ARTIFACT_DEFAULT_KEYS};
use anyhow::{Context, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;
use stresslab::evaluate::SweepTable;
use stresslab::pipeline::{dataset_to_csv, ClassifierRun, SchemeRun};
use stresslab::stats::significance_to_csv;

#[derive(Serialize)]
struct RunManifest<'a> {
    tool_version: &'a str,
    config_hash: String,
    /// Keys whose defaults are artifact choices, not published constants.
    artifact_default_keys: &'a [&'a str],
    config: &'a BTreeMap<String, String>,
    subject_ids: Vec<String>,
}

pub fn write(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, &text)
}

pub fn write_run_manifest(out: &Path, cfg: &CliConfig, subject_ids: Vec<String>) -> Result<()> {
    let map = config_map(cfg);
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        config_hash: config_hash(&map),
        artifact_default_keys: ARTIFACT_DEFAULT_KEYS,
        config: &map,
        subject_ids,
    };
    write_json(&out.join("run_manifest.json"), &manifest)
}

pub fn write_scheme_outputs(out: &Path, run: &SchemeRun) -> Result<()> {
    let s = run.scheme.name();
    write(
        &out.join(format!("features_{s}.csv")),
        &dataset_to_csv(&run.features.dataset),
    )?;
    write(
        &out.join(format!("significance_{s}.csv")),
        &significance_to_csv(&run.significance),
    )?;
    let mut txt = format!("significance analysis, {s}-class labels (sorted by p-value)\n");
    for row in &run.significance {
        txt.push_str(&format!(
            "  {:<22} p = {:<10.6}{}\n",
            row.measure,
            row.result.p_value,
            if row.significant { "  *" } else { "" }
        ));
    }
    write(&out.join(format!("significance_{s}.txt")), &txt)?;
    for cr in &run.runs {
        write_classifier_outputs(out, run, cr)?;
    }
    Ok(())
}

pub fn write_classifier_outputs(out: &Path, run: &SchemeRun, cr: &ClassifierRun) -> Result<()> {
    let s = run.scheme.name();
    let c = cr.classifier.name();
    write_json(&out.join(format!("band_selection_{s}_{c}.json")), &cr.band_selection)?;
    write_json(&out.join(format!("selection_{s}_{c}.json")), &cr.fusion.selections)?;
    write_json(&out.join(format!("evaluation_{s}_{c}.json")), &cr.evaluation)?;
    write(
        &out.join(format!("evaluation_{s}_{c}.txt")),
        &format!(
            "{s}-class, {c}, fused features: {}\nchosen bands: {}\n{}",
            cr.fusion
                .dataset
                .feature_defs
                .iter()
                .map(|d| d.name.as_str())
                .collect::<Vec<_>>()
                .join(", "),
            cr.chosen_bands
                .iter()
                .map(|b| b.name())
                .collect::<Vec<_>>()
                .join("+"),
            cr.evaluation.to_text()
        ),
    )?;
    write(
        &out.join(format!("confusion_{s}_{c}.csv")),
        &cr.evaluation.confusion.to_csv(),
    )?;
    Ok(())
}

pub fn write_sweep(out: &Path, sweep: &SweepTable) -> Result<()> {
    write(&out.join("sweep.csv"), &sweep.to_csv())?;
    write(&out.join("sweep.txt"), &sweep.to_text())?;
    write_json(&out.join("sweep.json"), sweep)
}
