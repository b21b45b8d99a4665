//! File schemas for trajectory datasets and coupling matrices.
//!
//! Datasets are plain CSV with the fixed header
//! `t,IX,IY,IZ,XI,XX,XY,XZ,YI,YX,YY,YZ,ZI,ZX,ZY,ZZ` and optional
//! `#`-prefixed `key=value` metadata comment lines before the header. This
//! is the boundary through which externally measured tomography time series
//! enter the trainer. Coupling matrices travel as a small JSON document.
//!
//! Floats are written in Rust's shortest round-trip representation, so a
//! write/read cycle reproduces every value bit-for-bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::pauli::{Preset, DIM, OBSERVABLE_BASIS};
use crate::sim::{
    CouplingMatrix, DatasetMetadata, DatasetSource, ObservableVector, TrajectoryDataset,
};
use crate::{Error, Result};

/// Values slightly beyond the physical bound are admitted: measured
/// expectation values from finite shot counts can overshoot ±1.
const VALUE_BOUND: f64 = 1.05;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// The exact dataset header.
pub fn dataset_header() -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend(OBSERVABLE_BASIS.iter().map(|p| p.label()));
    cols.join(",")
}

/// Write a dataset in the CSV schema, metadata as leading comments.
pub fn write_dataset_to<W: Write>(dataset: &TrajectoryDataset, mut w: W) -> std::io::Result<()> {
    let md = &dataset.metadata;
    let source = match md.source {
        DatasetSource::Synthetic => "synthetic",
        DatasetSource::External => "external",
    };
    writeln!(w, "# source={source}")?;
    if let Some(sigma) = md.sigma {
        writeln!(w, "# sigma={sigma}")?;
    }
    if let Some(seed) = md.seed {
        writeln!(w, "# seed={seed}")?;
    }
    if let Some(preset) = md.preset {
        writeln!(w, "# preset={}", preset.name())?;
    }
    if let Some(j) = md.true_couplings {
        writeln!(
            w,
            "# true_couplings={}",
            serde_json::to_string(j.as_array()).expect("arrays always serialize")
        )?;
    }
    for (key, value) in &md.extra {
        writeln!(w, "# {key}={value}")?;
    }
    writeln!(w, "{}", dataset_header())?;
    for (t, v) in dataset.times().iter().zip(dataset.values()) {
        write!(w, "{t}")?;
        for x in v.iter() {
            write!(w, ",{x}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_dataset(dataset: &TrajectoryDataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    write_dataset_to(dataset, BufWriter::new(file)).map_err(|e| io_err(path, e))
}

/// Parse a dataset from any reader, validating the schema.
pub fn read_dataset_from<R: Read>(r: R) -> Result<TrajectoryDataset> {
    let reader = BufReader::new(r);
    let mut metadata = DatasetMetadata::external();
    let mut header_seen = false;
    let mut times = Vec::new();
    let mut values: Vec<ObservableVector> = Vec::new();
    let mut data_row = 0usize;

    let expected: Vec<String> = dataset_header().split(',').map(str::to_string).collect();

    for (line_no, line) in reader.lines().enumerate() {
        let line_no = line_no + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if !header_seen {
                parse_metadata_line(comment.trim(), &mut metadata, line_no)?;
            }
            continue;
        }
        if !header_seen {
            let got: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            for (pos, exp) in expected.iter().enumerate() {
                let found = got.get(pos).copied().unwrap_or("");
                if found != exp {
                    return Err(Error::SchemaMismatch {
                        position: pos + 1,
                        expected: exp.clone(),
                        found: found.to_string(),
                    });
                }
            }
            if got.len() != expected.len() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 16 columns, found {}", got.len()),
                });
            }
            header_seen = true;
            continue;
        }

        data_row += 1;
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != DIM + 1 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 16 fields, found {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("cannot parse {what} value {s:?}"),
            })
        };
        let t = parse(fields[0], "time")?;
        if !t.is_finite() {
            return Err(Error::NonFiniteTime(t));
        }
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(Error::NonMonotoneTimes { row: data_row });
            }
        }
        let mut v = ObservableVector::zeros();
        for m in 0..DIM {
            let column = OBSERVABLE_BASIS[m].label();
            let x = parse(fields[m + 1], &column)?;
            if !x.is_finite() || x.abs() > VALUE_BOUND {
                return Err(Error::ValueOutOfRange {
                    row: data_row,
                    column,
                    value: x,
                });
            }
            v[m] = x;
        }
        times.push(t);
        values.push(v);
    }

    if !header_seen {
        return Err(Error::EmptyInput("no header line found".into()));
    }
    TrajectoryDataset::try_new(times, values, metadata)
}

pub fn read_dataset(path: &Path) -> Result<TrajectoryDataset> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_dataset_from(file)
}

fn parse_metadata_line(s: &str, metadata: &mut DatasetMetadata, line: usize) -> Result<()> {
    let Some((key, value)) = s.split_once('=') else {
        // Free-form comment, not metadata.
        return Ok(());
    };
    let (key, value) = (key.trim(), value.trim());
    let bad = |message: String| Error::Parse { line, message };
    match key {
        "source" => {
            metadata.source = match value {
                "synthetic" => DatasetSource::Synthetic,
                "external" => DatasetSource::External,
                other => return Err(bad(format!("unknown source {other:?}"))),
            };
        }
        "sigma" => {
            metadata.sigma =
                Some(value.parse().map_err(|_| bad(format!("bad sigma {value:?}")))?)
        }
        "seed" => {
            metadata.seed = Some(value.parse().map_err(|_| bad(format!("bad seed {value:?}")))?)
        }
        "preset" => metadata.preset = Some(Preset::from_name(value)?),
        "true_couplings" => {
            let arr: [[f64; 4]; 4] = serde_json::from_str(value)
                .map_err(|e| bad(format!("bad true_couplings: {e}")))?;
            metadata.true_couplings = Some(CouplingMatrix::try_new(arr)?);
        }
        other => metadata.extra.push((other.to_string(), value.to_string())),
    }
    Ok(())
}

/// JSON document for a coupling matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CouplingDocument {
    pub preset: Option<Preset>,
    /// Row-major 4×4 array; `j[0][0]` must be 0.
    pub couplings: [[f64; 4]; 4],
}

/// Result of reading a coupling file. Constraint repairs are reported as
/// warnings instead of failing the read.
#[derive(Clone, Debug)]
pub struct ReadCouplings {
    pub couplings: CouplingMatrix,
    pub preset: Option<Preset>,
    pub warnings: Vec<String>,
}

pub fn write_couplings_to<W: Write>(
    j: &CouplingMatrix,
    preset: Option<Preset>,
    w: W,
) -> Result<()> {
    let doc = CouplingDocument {
        preset,
        couplings: *j.as_array(),
    };
    serde_json::to_writer_pretty(w, &doc)?;
    Ok(())
}

pub fn write_couplings(j: &CouplingMatrix, preset: Option<Preset>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    write_couplings_to(j, preset, BufWriter::new(file))
}

pub fn read_couplings_from<R: Read>(r: R) -> Result<ReadCouplings> {
    let doc: CouplingDocument = serde_json::from_reader(r)?;
    let mut warnings = Vec::new();
    let mut arr = doc.couplings;
    if arr[0][0] != 0.0 {
        warnings.push(format!(
            "J[0][0] = {} in file; forced to 0 (energy reference)",
            arr[0][0]
        ));
        arr[0][0] = 0.0;
    }
    let couplings = CouplingMatrix::try_new(arr)?;
    if let Some(preset) = doc.preset {
        let active = preset.active_indices();
        for k in 0..4 {
            for l in 0..4 {
                if couplings.get(k, l) != 0.0
                    && !active.iter().any(|i| i.k == k && i.l == l)
                {
                    return Err(Error::PresetViolation {
                        preset: preset.name().to_string(),
                        k,
                        l,
                    });
                }
            }
        }
    }
    Ok(ReadCouplings {
        couplings,
        preset: doc.preset,
        warnings,
    })
}

pub fn read_couplings(path: &Path) -> Result<ReadCouplings> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_couplings_from(BufReader::new(file))
}
