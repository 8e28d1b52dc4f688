//! EEG frequency-band selection, classifier-in-the-loop wrapper feature
//! selection, and early/late feature fusion.
//!
//! Both selectors score candidates by leave-one-out accuracy with the
//! classifier under evaluation. Candidate seeds derive from
//! `(master seed, candidate id, iteration)`, so selection results are
//! identical regardless of evaluation order or thread count, and any
//! reported objective can be reproduced by re-running LOOCV with the same
//! derived seed.

use crate::classify::ClassifierSpec;
use crate::data::{Band, LabeledDataset};
use crate::error::{Error, Result};
use crate::evaluate::loocv;
use crate::rng::derive_seed;
use serde::{Deserialize, Serialize};

/// Early fusion concatenates all modalities then selects once; late fusion
/// selects per modality and concatenates the survivors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FusionMode {
    Early,
    Late,
}

impl FusionMode {
    pub fn name(self) -> &'static str {
        match self {
            FusionMode::Early => "eff",
            FusionMode::Late => "lff",
        }
    }
}

impl std::fmt::Display for FusionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// What a selection run picked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SelectionChoice {
    Bands(Vec<Band>),
    Features(Vec<String>),
}

/// One evaluated candidate (band subset, or feature added at a greedy step).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub candidate: SelectionChoice,
    /// Greedy step for the wrapper; 0 for band subsets.
    pub step: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub chosen: SelectionChoice,
    /// Mean LOOCV accuracy of the chosen candidate.
    pub objective: f64,
    /// Every candidate evaluated, in evaluation order.
    pub trace: Vec<TraceEntry>,
    pub master_seed: u64,
    /// Id of the winning candidate for seed re-derivation.
    pub chosen_id: u64,
}

impl SelectionResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("selection report serialization cannot fail")
    }
}

/// Seed for one candidate evaluation.
pub fn candidate_seed(master_seed: u64, candidate_id: u64, iteration: u64) -> u64 {
    derive_seed(master_seed, &[candidate_id, iteration])
}

/// Candidate id of a wrapper evaluation (feature `feature_idx` tried at
/// greedy `step`).
pub fn wrapper_candidate_id(step: usize, feature_idx: usize) -> u64 {
    ((step as u64) << 32) | feature_idx as u64
}

fn bands_of_mask(mask: u8) -> Vec<Band> {
    Band::ALL
        .iter()
        .copied()
        .filter(|b| mask & (1 << b.index()) != 0)
        .collect()
}

/// Mean LOOCV accuracy of a dataset under a spec; stochastic classifiers are
/// re-trained `iterations` times with distinct derived seeds, deterministic
/// ones once.
fn candidate_accuracy(
    dataset: &LabeledDataset,
    spec: &ClassifierSpec,
    master_seed: u64,
    candidate_id: u64,
    iterations: usize,
) -> Result<f64> {
    let runs = if spec.is_stochastic() { iterations } else { 1 };
    let mut total = 0.0;
    for it in 0..runs {
        let seed = candidate_seed(master_seed, candidate_id, it as u64);
        total += loocv(dataset, spec, seed)?.metrics.accuracy;
    }
    Ok(total / runs as f64)
}

/// Exhaustive search over the 31 non-empty band subsets for the one that
/// maximizes LOOCV accuracy of the band-restricted EEG features. Ties go to
/// fewer bands, then to the lower-frequency subset.
pub fn band_selection(
    dataset: &LabeledDataset,
    spec: &ClassifierSpec,
    iterations: usize,
    master_seed: u64,
) -> Result<SelectionResult> {
    if dataset.n_subjects() == 0 || dataset.n_features() == 0 {
        return Err(Error::DatasetMismatch(
            "band selection needs a non-empty EEG dataset".into(),
        ));
    }
    if iterations < 1 {
        return Err(Error::Config("band selection needs iterations >= 1".into()));
    }

    let masks: Vec<u8> = (1u8..32).collect();
    let evaluated = crate::par_map(masks, |mask| {
        let bands = bands_of_mask(mask);
        let restricted =
            dataset.restrict(|def| def.band.is_some_and(|b| bands.contains(&b)));
        let accuracy = if restricted.n_features() == 0 {
            // dataset carries no features for these bands; candidate scores 0
            Ok(0.0)
        } else {
            candidate_accuracy(&restricted, spec, master_seed, mask as u64, iterations)
        };
        (mask, bands, accuracy)
    });

    let mut trace = Vec::with_capacity(31);
    let mut best: Option<(u8, Vec<Band>, f64)> = None;
    for (mask, bands, accuracy) in evaluated {
        let accuracy = accuracy?;
        trace.push(TraceEntry {
            candidate: SelectionChoice::Bands(bands.clone()),
            step: 0,
            accuracy,
        });
        let better = match &best {
            None => true,
            Some((best_mask, best_bands, best_acc)) => {
                accuracy > *best_acc
                    || (accuracy == *best_acc
                        && (bands.len() < best_bands.len()
                            || (bands.len() == best_bands.len() && mask < *best_mask)))
            }
        };
        if better {
            best = Some((mask, bands, accuracy));
        }
    }
    let (mask, bands, objective) = best.unwrap();
    Ok(SelectionResult {
        chosen: SelectionChoice::Bands(bands),
        objective,
        trace,
        master_seed,
        chosen_id: mask as u64,
    })
}

/// Greedy forward wrapper selection: repeatedly add the feature whose
/// inclusion maximizes LOOCV accuracy, stopping when nothing improves. The
/// empty set scores the majority-class rate. Ties pick the feature earliest
/// in canonical order.
pub fn wrapper_select(
    dataset: &LabeledDataset,
    spec: &ClassifierSpec,
    master_seed: u64,
) -> Result<SelectionResult> {
    if dataset.n_subjects() == 0 || dataset.n_features() == 0 {
        return Err(Error::DatasetMismatch(
            "wrapper selection needs a non-empty dataset".into(),
        ));
    }

    let n = dataset.n_subjects() as f64;
    let majority = dataset
        .scheme
        .classes()
        .iter()
        .map(|c| dataset.labels.iter().filter(|l| *l == c).count())
        .max()
        .unwrap_or(0) as f64
        / n;

    let mut selected: Vec<usize> = Vec::new();
    let mut objective = majority;
    let mut chosen_id = 0u64;
    let mut trace = Vec::new();

    for step in 0.. {
        let remaining: Vec<usize> = (0..dataset.n_features())
            .filter(|f| !selected.contains(f))
            .collect();
        if remaining.is_empty() {
            break;
        }
        let evaluated = crate::par_map(remaining, |f| {
            let mut cols = selected.clone();
            cols.push(f);
            let candidate = dataset.select_columns(&cols);
            let id = wrapper_candidate_id(step, f);
            let acc = candidate_accuracy(&candidate, spec, master_seed, id, 1);
            (f, acc)
        });

        let mut best: Option<(usize, f64)> = None;
        for (f, acc) in evaluated {
            let acc = acc?;
            trace.push(TraceEntry {
                candidate: SelectionChoice::Features(
                    selected
                        .iter()
                        .chain(std::iter::once(&f))
                        .map(|&i| dataset.feature_defs[i].name.clone())
                        .collect(),
                ),
                step,
                accuracy: acc,
            });
            // strict improvement on acc; ties between candidates resolve to
            // the lower feature index (evaluation order is canonical)
            if best.is_none_or(|(_, b)| acc > b) {
                best = Some((f, acc));
            }
        }
        match best {
            Some((f, acc)) if acc > objective => {
                selected.push(f);
                objective = acc;
                chosen_id = wrapper_candidate_id(step, f);
            }
            _ => break,
        }
    }

    Ok(SelectionResult {
        chosen: SelectionChoice::Features(
            selected
                .iter()
                .map(|&i| dataset.feature_defs[i].name.clone())
                .collect(),
        ),
        objective,
        trace,
        master_seed,
        chosen_id,
    })
}

/// A fused dataset plus the selection reports that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fusion {
    pub dataset: LabeledDataset,
    pub selections: Vec<SelectionResult>,
}

/// Late feature fusion: wrapper-select each modality independently, then
/// concatenate the selected columns in input (modality) order.
pub fn fuse_late(
    per_modality: &[&LabeledDataset],
    spec: &ClassifierSpec,
    master_seed: u64,
) -> Result<Fusion> {
    check_alignment(per_modality)?;
    let mut selected_parts = Vec::with_capacity(per_modality.len());
    let mut selections = Vec::with_capacity(per_modality.len());
    for (mi, part) in per_modality.iter().enumerate() {
        let result = wrapper_select(part, spec, derive_seed(master_seed, &[mi as u64]))?;
        let names = match &result.chosen {
            SelectionChoice::Features(names) => names.clone(),
            SelectionChoice::Bands(_) => unreachable!("wrapper_select returns features"),
        };
        let idx = part.column_indices(&names)?;
        selected_parts.push(part.select_columns(&idx));
        selections.push(result);
    }
    let refs: Vec<&LabeledDataset> = selected_parts.iter().collect();
    Ok(Fusion {
        dataset: LabeledDataset::concat(&refs)?,
        selections,
    })
}

/// Early feature fusion: concatenate all modalities, then one wrapper pass.
pub fn fuse_early(
    per_modality: &[&LabeledDataset],
    spec: &ClassifierSpec,
    master_seed: u64,
) -> Result<Fusion> {
    check_alignment(per_modality)?;
    let combined = LabeledDataset::concat(per_modality)?;
    let result = wrapper_select(&combined, spec, derive_seed(master_seed, &[b'e' as u64]))?;
    let names = match &result.chosen {
        SelectionChoice::Features(names) => names.clone(),
        SelectionChoice::Bands(_) => unreachable!(),
    };
    let idx = combined.column_indices(&names)?;
    Ok(Fusion {
        dataset: combined.select_columns(&idx),
        selections: vec![result],
    })
}

fn check_alignment(parts: &[&LabeledDataset]) -> Result<()> {
    let first = parts
        .first()
        .ok_or_else(|| Error::DatasetMismatch("fusion needs at least one modality".into()))?;
    for p in &parts[1..] {
        if p.subject_ids != first.subject_ids {
            return Err(Error::DatasetMismatch(
                "subject ids differ between modalities".into(),
            ));
        }
        if p.labels != first.labels {
            return Err(Error::DatasetMismatch(
                "labels differ between modalities".into(),
            ));
        }
    }
    Ok(())
}
