//! Cohort directories on disk.
//!
//! A cohort directory holds one `manifest.csv` index plus two device-format
//! CSV files per subject:
//!
//! ```text
//! cohort/
//!   manifest.csv            subject_id,pss_score,label_two,label_three,muse_csv,shimmer_csv
//!   s000_muse.csv           timestamp,raw_tp9,raw_af7,raw_af8,raw_tp10
//!   s000_shimmer.csv        timestamp,gsr_kOhm (or gsr_uS),ppg_mV
//!   ...
//! ```
//!
//! `synth` additionally writes `synth.json` with the generator parameters.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;
use stresslab::data::{label_two_class, label_three_class, StressLevel, SubjectRecord};
use stresslab::ingest::synth::{generate_cohort, CohortSpec, SyntheticCohort};
use stresslab::ingest::{
    muse_csv_string, parse_muse_csv, parse_shimmer_csv, shimmer_csv_string, GsrUnit, IngestOptions,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestRow {
    pub subject_id: String,
    pub pss_score: u8,
    pub label_two: String,
    pub label_three: String,
    pub muse_csv: String,
    pub shimmer_csv: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthDetails {
    pub tool_version: String,
    pub seed: u64,
    pub n_subjects: usize,
    pub scheme: String,
    pub duration_seconds: f64,
    pub sample_rate: f64,
    pub effect_scale: f64,
    pub gsr_unit: String,
    pub planted_classes: Vec<String>,
}

/// Write a synthetic cohort to `dir`; returns the generated cohort.
pub fn write_synth_cohort(
    dir: &Path,
    spec: &CohortSpec,
    gsr_unit: GsrUnit,
) -> Result<SyntheticCohort> {
    let cohort = generate_cohort(spec).map_err(|e| anyhow!(e))?;
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;

    let mut manifest = String::from("subject_id,pss_score,label_two,label_three,muse_csv,shimmer_csv\n");
    for (i, record) in cohort.records.iter().enumerate() {
        let muse_name = format!("{}_muse.csv", record.subject_id);
        let shimmer_name = format!("{}_shimmer.csv", record.subject_id);
        std::fs::write(dir.join(&muse_name), muse_csv_string(&record.eeg))
            .with_context(|| format!("writing {muse_name}"))?;
        std::fs::write(
            dir.join(&shimmer_name),
            shimmer_csv_string(&record.gsr, &record.ppg, gsr_unit),
        )
        .with_context(|| format!("writing {shimmer_name}"))?;
        manifest.push_str(&format!(
            "{},{},{},{},{},{}\n",
            record.subject_id,
            record.pss_score,
            cohort.labels_two[i].name(),
            cohort.labels_three[i].name(),
            muse_name,
            shimmer_name
        ));
    }
    std::fs::write(dir.join("manifest.csv"), manifest).context("writing manifest.csv")?;

    let details = SynthDetails {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: spec.seed,
        n_subjects: spec.n_subjects,
        scheme: spec.scheme.name().to_string(),
        duration_seconds: spec.duration_seconds,
        sample_rate: spec.sample_rate,
        effect_scale: spec.effect_scale,
        gsr_unit: match gsr_unit {
            GsrUnit::MicroSiemens => "uS".into(),
            GsrUnit::KiloOhm => "kOhm".into(),
        },
        planted_classes: cohort.planted.iter().map(|c| c.name().to_string()).collect(),
    };
    std::fs::write(
        dir.join("synth.json"),
        serde_json::to_string_pretty(&details)?,
    )
    .context("writing synth.json")?;
    Ok(cohort)
}

#[derive(Debug)]
pub struct LoadedSubject {
    pub record: SubjectRecord,
    pub dropped_muse_rows: usize,
    pub dropped_shimmer_rows: usize,
    pub gsr_unit: GsrUnit,
}

/// Load every subject listed in a cohort directory's manifest.
pub fn load_cohort(dir: &Path) -> Result<Vec<LoadedSubject>> {
    let manifest_path = dir.join("manifest.csv");
    let text = std::fs::read_to_string(&manifest_path)
        .with_context(|| format!("cannot read {}", manifest_path.display()))?;
    let rows = parse_manifest(&text)?;
    if rows.is_empty() {
        bail!("{}: manifest lists no subjects", manifest_path.display());
    }

    let opts = IngestOptions::default();
    let mut subjects = Vec::with_capacity(rows.len());
    for row in rows {
        let muse = parse_muse_csv(dir.join(&row.muse_csv), &opts)
            .map_err(|e| anyhow!(e).context(format!("subject {}", row.subject_id)))?;
        let shimmer = parse_shimmer_csv(dir.join(&row.shimmer_csv), &opts)
            .map_err(|e| anyhow!(e).context(format!("subject {}", row.subject_id)))?;
        let record = SubjectRecord::new(
            row.subject_id.clone(),
            row.pss_score,
            muse.eeg,
            shimmer.gsr,
            shimmer.ppg,
        )
        .map_err(|e| anyhow!(e))?;
        subjects.push(LoadedSubject {
            record,
            dropped_muse_rows: muse.dropped_rows,
            dropped_shimmer_rows: shimmer.dropped_rows,
            gsr_unit: shimmer.unit,
        });
    }
    Ok(subjects)
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("manifest is empty"))?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let idx = |name: &str| -> Result<usize> {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| anyhow!("manifest missing column '{name}'"))
    };
    let (si, pi, mi, hi) = (
        idx("subject_id")?,
        idx("pss_score")?,
        idx("muse_csv")?,
        idx("shimmer_csv")?,
    );
    let l2 = cols.iter().position(|c| *c == "label_two");
    let l3 = cols.iter().position(|c| *c == "label_three");

    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let get = |i: usize| -> Result<&str> {
            cells
                .get(i)
                .copied()
                .ok_or_else(|| anyhow!("manifest line {}: too few cells", lineno + 2))
        };
        rows.push(ManifestRow {
            subject_id: get(si)?.to_string(),
            pss_score: get(pi)?
                .parse()
                .map_err(|_| anyhow!("manifest line {}: bad pss_score", lineno + 2))?,
            label_two: l2.and_then(|i| cells.get(i)).unwrap_or(&"").to_string(),
            label_three: l3.and_then(|i| cells.get(i)).unwrap_or(&"").to_string(),
            muse_csv: get(mi)?.to_string(),
            shimmer_csv: get(hi)?.to_string(),
        });
    }
    Ok(rows)
}

/// Manifest self-check: stored labels must match what the labeling rules
/// produce from the stored scores.
pub fn verify_manifest_labels(rows: &[ManifestRow]) -> Result<()> {
    let scores: Vec<u8> = rows.iter().map(|r| r.pss_score).collect();
    let two = label_two_class(&scores).map_err(|e| anyhow!(e))?;
    let three = label_three_class(&scores).map_err(|e| anyhow!(e))?;
    for (i, row) in rows.iter().enumerate() {
        if !row.label_two.is_empty() && row.label_two != two[i].name() {
            bail!(
                "subject {}: manifest label_two '{}' does not match recomputed '{}'",
                row.subject_id,
                row.label_two,
                two[i].name()
            );
        }
        if !row.label_three.is_empty() && row.label_three != three[i].name() {
            bail!(
                "subject {}: manifest label_three '{}' does not match recomputed '{}'",
                row.subject_id,
                row.label_three,
                three[i].name()
            );
        }
    }
    Ok(())
}

pub fn records(subjects: &[LoadedSubject]) -> Vec<SubjectRecord> {
    subjects.iter().map(|s| s.record.clone()).collect()
}

pub fn label_counts(labels: &[StressLevel]) -> String {
    let mut counts: Vec<(StressLevel, usize)> = Vec::new();
    for l in labels {
        match counts.iter_mut().find(|(c, _)| c == l) {
            Some((_, n)) => *n += 1,
            None => counts.push((*l, 1)),
        }
    }
    counts
        .iter()
        .map(|(c, n)| format!("{n} {c}"))
        .collect::<Vec<_>>()
        .join(", ")
}
