//! Device CSV ingestion.
//!
//! Both devices export UTF-8 comma-separated files with a header row and '.'
//! decimal separators. The canonical column names are documented in the
//! README; exports with different headers can be mapped via the `*Columns`
//! structs. Rows with a missing (blank) cell in any required column are
//! dropped and counted. Inputs are validated to run at 256 Hz; off-rate
//! recordings are rejected, never resampled.

pub mod synth;

use crate::data::{EegRecording, SignalChannel, DEVICE_SAMPLE_RATE_HZ, EEG_CHANNELS};
use crate::error::{Error, Result};
use std::io::{BufRead, BufReader};
use std::path::Path;

/// Column names of a headband export.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuseColumns {
    pub timestamp: String,
    pub tp9: String,
    pub af7: String,
    pub af8: String,
    pub tp10: String,
}

impl Default for MuseColumns {
    fn default() -> Self {
        MuseColumns {
            timestamp: "timestamp".into(),
            tp9: "raw_tp9".into(),
            af7: "raw_af7".into(),
            af8: "raw_af8".into(),
            tp10: "raw_tp10".into(),
        }
    }
}

/// Column names of a GSR+PPG module export. The GSR column name doubles as
/// the unit declaration: `gsr_uS` (microsiemens) or `gsr_kOhm` (kilo-ohms).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShimmerColumns {
    pub timestamp: String,
    pub gsr_microsiemens: String,
    pub gsr_kilo_ohm: String,
    pub ppg: String,
}

impl Default for ShimmerColumns {
    fn default() -> Self {
        ShimmerColumns {
            timestamp: "timestamp".into(),
            gsr_microsiemens: "gsr_uS".into(),
            gsr_kilo_ohm: "gsr_kOhm".into(),
            ppg: "ppg_mV".into(),
        }
    }
}

/// Unit the GSR column was declared in. Values are normalized to kilo-ohms
/// internally (R = 1000 / G for G in microsiemens).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsrUnit {
    MicroSiemens,
    KiloOhm,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub expected_rate: f64,
    /// Tolerance on the rate estimated from timestamps.
    pub rate_tolerance_hz: f64,
    /// When set, recordings outside `nominal ± tolerance` are rejected.
    /// Unset by default: the protocol's 3-minute nominal length is advisory
    /// for real exports and synthetic corpora use shorter recordings.
    pub nominal_duration_s: Option<f64>,
    pub duration_tolerance_s: f64,
    pub muse_columns: MuseColumns,
    pub shimmer_columns: ShimmerColumns,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            expected_rate: DEVICE_SAMPLE_RATE_HZ,
            rate_tolerance_hz: 0.5,
            nominal_duration_s: None,
            duration_tolerance_s: 2.0,
            muse_columns: MuseColumns::default(),
            shimmer_columns: ShimmerColumns::default(),
        }
    }
}

fn validate_duration(n_samples: usize, label: &str, opts: &IngestOptions) -> Result<()> {
    if let Some(nominal) = opts.nominal_duration_s {
        let duration = n_samples as f64 / opts.expected_rate;
        if (duration - nominal).abs() > opts.duration_tolerance_s {
            return Err(Error::InvalidSignal(format!(
                "{label}: recording is {duration:.1} s, expected {nominal:.1} ± {:.1} s",
                opts.duration_tolerance_s
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct MuseParse {
    pub eeg: EegRecording,
    pub dropped_rows: usize,
}

#[derive(Debug, Clone)]
pub struct ShimmerParse {
    /// Skin resistance in kilo-ohms.
    pub gsr: SignalChannel,
    pub ppg: SignalChannel,
    pub unit: GsrUnit,
    pub dropped_rows: usize,
}

/// Parse a headband CSV file into a four-channel recording.
pub fn parse_muse_csv(path: impl AsRef<Path>, opts: &IngestOptions) -> Result<MuseParse> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_muse_reader(BufReader::new(file), &path.display().to_string(), opts)
}

/// Parse headband CSV content from a string (used by in-memory callers).
pub fn parse_muse_str(content: &str, label: &str, opts: &IngestOptions) -> Result<MuseParse> {
    parse_muse_reader(content.as_bytes(), label, opts)
}

fn parse_muse_reader(reader: impl BufRead, label: &str, opts: &IngestOptions) -> Result<MuseParse> {
    let cols = &opts.muse_columns;
    let wanted = [
        cols.timestamp.as_str(),
        cols.tp9.as_str(),
        cols.af7.as_str(),
        cols.af8.as_str(),
        cols.tp10.as_str(),
    ];
    let table = CsvTable::read(reader, label, &wanted)?;
    let (timestamps, columns, dropped_rows) = table.numeric_rows();
    validate_timeline(&timestamps, label, opts)?;

    validate_duration(timestamps.len(), label, opts)?;
    let channels = EEG_CHANNELS
        .iter()
        .zip(columns)
        .map(|(name, samples)| SignalChannel::new(*name, opts.expected_rate, samples))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| relabel_empty(e, label))?;
    Ok(MuseParse {
        eeg: EegRecording::new(channels)?,
        dropped_rows,
    })
}

/// Parse a GSR/PPG module CSV file.
pub fn parse_shimmer_csv(path: impl AsRef<Path>, opts: &IngestOptions) -> Result<ShimmerParse> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_shimmer_reader(BufReader::new(file), &path.display().to_string(), opts)
}

pub fn parse_shimmer_str(content: &str, label: &str, opts: &IngestOptions) -> Result<ShimmerParse> {
    parse_shimmer_reader(content.as_bytes(), label, opts)
}

fn parse_shimmer_reader(
    reader: impl BufRead,
    label: &str,
    opts: &IngestOptions,
) -> Result<ShimmerParse> {
    let cols = &opts.shimmer_columns;
    // Peek the header to decide which GSR unit the file declares.
    let mut lines = reader.lines();
    let header_line = match lines.next() {
        Some(line) => line.map_err(|e| Error::CsvFormat {
            file: label.into(),
            message: e.to_string(),
        })?,
        None => return Err(Error::EmptyRecording(label.into())),
    };
    let header: Vec<&str> = header_line.trim_end_matches('\r').split(',').map(str::trim).collect();
    let unit = if header.iter().any(|h| *h == cols.gsr_microsiemens) {
        GsrUnit::MicroSiemens
    } else if header.iter().any(|h| *h == cols.gsr_kilo_ohm) {
        GsrUnit::KiloOhm
    } else {
        return Err(Error::MissingColumn {
            file: label.into(),
            column: format!("{} or {}", cols.gsr_microsiemens, cols.gsr_kilo_ohm),
        });
    };
    let gsr_col = match unit {
        GsrUnit::MicroSiemens => cols.gsr_microsiemens.as_str(),
        GsrUnit::KiloOhm => cols.gsr_kilo_ohm.as_str(),
    };
    let wanted = [cols.timestamp.as_str(), gsr_col, cols.ppg.as_str()];
    let table = CsvTable::read_with_header(&header, lines, label, &wanted)?;
    let (timestamps, mut columns, dropped_rows) = table.numeric_rows();
    validate_timeline(&timestamps, label, opts)?;

    validate_duration(timestamps.len(), label, opts)?;
    let ppg_samples = columns.pop().unwrap();
    let mut gsr_samples = columns.pop().unwrap();
    if unit == GsrUnit::MicroSiemens {
        for g in gsr_samples.iter_mut() {
            if *g <= 0.0 {
                return Err(Error::CsvFormat {
                    file: label.into(),
                    message: format!("non-positive conductance {g} µS cannot be converted"),
                });
            }
            *g = 1000.0 / *g; // µS -> kΩ
        }
    }

    let gsr = SignalChannel::new("GSR", opts.expected_rate, gsr_samples)
        .map_err(|e| relabel_empty(e, label))?;
    let ppg = SignalChannel::new("PPG", opts.expected_rate, ppg_samples)
        .map_err(|e| relabel_empty(e, label))?;
    Ok(ShimmerParse {
        gsr,
        ppg,
        unit,
        dropped_rows,
    })
}

fn relabel_empty(e: Error, label: &str) -> Error {
    match e {
        Error::EmptyRecording(_) => Error::EmptyRecording(label.into()),
        other => other,
    }
}

/// Timestamps must be strictly increasing and pace the expected rate (median
/// spacing is used, so occasional dropped rows do not skew the estimate).
fn validate_timeline(timestamps: &[f64], label: &str, opts: &IngestOptions) -> Result<()> {
    if timestamps.len() < 2 {
        return Err(Error::EmptyRecording(label.into()));
    }
    let mut deltas = Vec::with_capacity(timestamps.len() - 1);
    for w in timestamps.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::CsvFormat {
                file: label.into(),
                message: format!("timestamps not strictly increasing ({} after {})", w[1], w[0]),
            });
        }
        deltas.push(w[1] - w[0]);
    }
    deltas.sort_by(|a, b| a.total_cmp(b));
    let median = deltas[deltas.len() / 2];
    let rate = 1.0 / median;
    if (rate - opts.expected_rate).abs() > opts.rate_tolerance_hz {
        return Err(Error::SampleRateMismatch {
            context: label.into(),
            found: rate,
            expected: opts.expected_rate,
        });
    }
    Ok(())
}

/// Minimal CSV reader: header row, comma separators, no quoting. Cells are
/// trimmed; a blank cell marks the row as incomplete.
struct CsvTable {
    /// Parsed rows: timestamp followed by the requested value columns.
    rows: Vec<Vec<f64>>,
    dropped: usize,
}

impl CsvTable {
    fn read(mut reader: impl BufRead, label: &str, wanted: &[&str]) -> Result<CsvTable> {
        let mut header_line = String::new();
        let n = reader.read_line(&mut header_line).map_err(|e| Error::CsvFormat {
            file: label.into(),
            message: e.to_string(),
        })?;
        if n == 0 {
            return Err(Error::EmptyRecording(label.into()));
        }
        let header: Vec<&str> = header_line
            .trim_end_matches(['\n', '\r'])
            .split(',')
            .map(str::trim)
            .collect();
        Self::read_with_header(&header, reader.lines(), label, wanted)
    }

    fn read_with_header(
        header: &[&str],
        lines: impl Iterator<Item = std::io::Result<String>>,
        label: &str,
        wanted: &[&str],
    ) -> Result<CsvTable> {
        let indices: Vec<usize> = wanted
            .iter()
            .map(|w| {
                header.iter().position(|h| h == w).ok_or_else(|| Error::MissingColumn {
                    file: label.into(),
                    column: (*w).to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let mut rows = Vec::new();
        let mut dropped = 0usize;
        for (line_no, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::CsvFormat {
                file: label.into(),
                message: e.to_string(),
            })?;
            let trimmed = line.trim_end_matches('\r');
            if trimmed.is_empty() {
                continue;
            }
            let cells: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            let mut row = Vec::with_capacity(indices.len());
            let mut incomplete = false;
            for &idx in &indices {
                match cells.get(idx) {
                    None | Some(&"") => {
                        incomplete = true;
                        break;
                    }
                    Some(cell) => match cell.parse::<f64>() {
                        Ok(v) if v.is_finite() => row.push(v),
                        _ => {
                            return Err(Error::CsvFormat {
                                file: label.into(),
                                message: format!(
                                    "line {}: cell '{cell}' is not a number",
                                    line_no + 2
                                ),
                            })
                        }
                    },
                }
            }
            if incomplete {
                dropped += 1;
            } else {
                rows.push(row);
            }
        }
        Ok(CsvTable { rows, dropped })
    }

    /// Split into (timestamps, value columns, dropped count).
    fn numeric_rows(self) -> (Vec<f64>, Vec<Vec<f64>>, usize) {
        let n_cols = self.rows.first().map_or(0, |r| r.len());
        let mut timestamps = Vec::with_capacity(self.rows.len());
        let mut columns = vec![Vec::with_capacity(self.rows.len()); n_cols.saturating_sub(1)];
        for row in &self.rows {
            timestamps.push(row[0]);
            for (c, col) in columns.iter_mut().enumerate() {
                col.push(row[c + 1]);
            }
        }
        (timestamps, columns, self.dropped)
    }
}

/// Canonical CSV serialization of an EEG recording. Values use Rust's
/// shortest-round-trip float formatting, so a parse of the output restores
/// them bit-exactly.
pub fn muse_csv_string(eeg: &EegRecording) -> String {
    let cols = MuseColumns::default();
    let mut out = format!(
        "{},{},{},{},{}\n",
        cols.timestamp, cols.tp9, cols.af7, cols.af8, cols.tp10
    );
    let rate = eeg.sample_rate();
    let chans = eeg.channels();
    for i in 0..eeg.samples_per_channel() {
        let t = i as f64 / rate;
        out.push_str(&format!(
            "{t},{},{},{},{}\n",
            chans[0].samples[i], chans[1].samples[i], chans[2].samples[i], chans[3].samples[i]
        ));
    }
    out
}

/// Canonical CSV serialization of the GSR/PPG pair in the requested unit.
pub fn shimmer_csv_string(gsr: &SignalChannel, ppg: &SignalChannel, unit: GsrUnit) -> String {
    let cols = ShimmerColumns::default();
    let gsr_name = match unit {
        GsrUnit::MicroSiemens => &cols.gsr_microsiemens,
        GsrUnit::KiloOhm => &cols.gsr_kilo_ohm,
    };
    let mut out = format!("{},{},{}\n", cols.timestamp, gsr_name, cols.ppg);
    let rate = gsr.sample_rate;
    for i in 0..gsr.len().min(ppg.len()) {
        let t = i as f64 / rate;
        let g = match unit {
            GsrUnit::MicroSiemens => 1000.0 / gsr.samples[i],
            GsrUnit::KiloOhm => gsr.samples[i],
        };
        out.push_str(&format!("{t},{g},{}\n", ppg.samples[i]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> IngestOptions {
        IngestOptions::default()
    }

    fn muse_content(n: usize) -> String {
        let mut s = String::from("timestamp,raw_tp9,raw_af7,raw_af8,raw_tp10\n");
        for i in 0..n {
            let t = i as f64 / 256.0;
            s.push_str(&format!("{t},{},{},{},{}\n", 1.0 + i as f64, 2.0, 3.0, 4.0));
        }
        s
    }

    #[test]
    fn full_rate_file_parses_to_expected_duration() {
        let parsed = parse_muse_str(&muse_content(46080), "muse.csv", &opts()).unwrap();
        assert_eq!(parsed.eeg.samples_per_channel(), 46080);
        assert!((parsed.eeg.duration_seconds() - 180.0).abs() < 1e-9);
        assert_eq!(parsed.dropped_rows, 0);
    }

    #[test]
    fn missing_column_is_named_in_the_error() {
        let content = "timestamp,raw_tp9,raw_af8,raw_tp10\n0,1,2,3\n";
        let err = parse_muse_str(content, "muse.csv", &opts()).unwrap_err();
        match err {
            Error::MissingColumn { column, .. } => assert_eq!(column, "raw_af7"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn blank_cell_drops_exactly_that_row() {
        let mut content = String::from("timestamp,raw_tp9,raw_af7,raw_af8,raw_tp10\n");
        for i in 0..10 {
            let t = i as f64 / 256.0;
            if i == 4 {
                content.push_str(&format!("{t},1.0,,3.0,4.0\n"));
            } else {
                content.push_str(&format!("{t},1.0,2.0,3.0,4.0\n"));
            }
        }
        let parsed = parse_muse_str(&content, "muse.csv", &opts()).unwrap();
        assert_eq!(parsed.eeg.samples_per_channel(), 9);
        assert_eq!(parsed.dropped_rows, 1);
    }

    #[test]
    fn non_monotonic_timestamps_are_rejected() {
        let content =
            "timestamp,raw_tp9,raw_af7,raw_af8,raw_tp10\n0.0,1,1,1,1\n0.00390625,1,1,1,1\n0.001,1,1,1,1\n";
        let err = parse_muse_str(content, "muse.csv", &opts()).unwrap_err();
        assert!(matches!(err, Error::CsvFormat { .. }), "{err:?}");
    }

    #[test]
    fn off_rate_recording_is_rejected_not_resampled() {
        let mut content = String::from("timestamp,raw_tp9,raw_af7,raw_af8,raw_tp10\n");
        for i in 0..512 {
            let t = i as f64 / 128.0;
            content.push_str(&format!("{t},1,1,1,1\n"));
        }
        let err = parse_muse_str(&content, "muse.csv", &opts()).unwrap_err();
        assert!(matches!(err, Error::SampleRateMismatch { .. }), "{err:?}");
    }

    #[test]
    fn empty_file_is_an_empty_recording() {
        let err = parse_muse_str(
            "timestamp,raw_tp9,raw_af7,raw_af8,raw_tp10\n",
            "muse.csv",
            &opts(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyRecording(_)), "{err:?}");
    }

    #[test]
    fn nominal_duration_is_enforced_when_configured() {
        let strict = IngestOptions {
            nominal_duration_s: Some(180.0),
            ..IngestOptions::default()
        };
        let err = parse_muse_str(&muse_content(2560), "muse.csv", &strict).unwrap_err();
        assert!(matches!(err, Error::InvalidSignal(_)), "{err:?}");
        assert!(parse_muse_str(&muse_content(46080), "muse.csv", &strict).is_ok());
    }

    #[test]
    fn microsiemens_are_normalized_to_kilo_ohms() {
        let mut content = String::from("timestamp,gsr_uS,ppg_mV\n");
        for i in 0..256 {
            let t = i as f64 / 256.0;
            content.push_str(&format!("{t},10.0,900.0\n"));
        }
        let parsed = parse_shimmer_str(&content, "shimmer.csv", &opts()).unwrap();
        assert_eq!(parsed.unit, GsrUnit::MicroSiemens);
        // R = 1/G: 10 µS -> 100 kΩ
        assert!((parsed.gsr.samples[0] - 100.0).abs() < 1e-12);
        assert_eq!(parsed.gsr.len(), parsed.ppg.len());
    }

    #[test]
    fn missing_ppg_column_errors() {
        let content = "timestamp,gsr_uS\n0,10\n0.00390625,10\n";
        let err = parse_shimmer_str(content, "shimmer.csv", &opts()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn { .. }), "{err:?}");
    }

    #[test]
    fn csv_round_trip_preserves_samples() {
        let spec = synth::SynthSpec {
            duration_seconds: 4.0,
            ..synth::SynthSpec::new(41, crate::data::StressLevel::MildlyStressed)
        };
        let record = synth::generate_synthetic_subject(&spec).unwrap();

        let muse = muse_csv_string(&record.eeg);
        let parsed = parse_muse_str(&muse, "echo", &opts()).unwrap();
        assert_eq!(parsed.eeg, record.eeg); // shortest-round-trip floats: bit-exact

        for unit in [GsrUnit::KiloOhm, GsrUnit::MicroSiemens] {
            let shim = shimmer_csv_string(&record.gsr, &record.ppg, unit);
            let parsed = parse_shimmer_str(&shim, "echo", &opts()).unwrap();
            for (a, b) in parsed.gsr.samples.iter().zip(&record.gsr.samples) {
                assert!((a - b).abs() / b.abs().max(1.0) < 1e-9);
            }
            assert_eq!(parsed.ppg.samples, record.ppg.samples);
        }
    }
}
