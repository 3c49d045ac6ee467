//! File formats: trace/spectrum/profile CSV and JSON helpers.
//!
//! Floats are written with 17 significant digits so every file round-trips
//! bit-exactly; parse errors carry the file name and 1-based line number.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::LikelihoodProfile;
use crate::sampling::TimeGrid;
use crate::simulator::DataVector;
use crate::spectral::PowerSpectrum;

/// Lossless float formatting (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Quotes a CSV field when it contains a delimiter, quote, or newline.
pub(crate) fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders a measurement trace as `t,d[,shots]` CSV.
pub fn trace_to_csv(data: &DataVector) -> String {
    let mut out = String::new();
    match data.shots() {
        Some(shots) => {
            out.push_str("t,d,shots\n");
            for ((t, d), s) in data.times().iter().zip(data.values()).zip(shots) {
                out.push_str(&format!("{},{},{s}\n", fmt_f64(*t), fmt_f64(*d)));
            }
        }
        None => {
            out.push_str("t,d\n");
            for (t, d) in data.times().iter().zip(data.values()) {
                out.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(*d)));
            }
        }
    }
    out
}

fn parse_field<T: std::str::FromStr>(raw: &str, path: &str, line: usize, what: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::Parse {
        path: path.to_string(),
        line,
        msg: format!("cannot parse {what} from {raw:?}"),
    })
}

/// Parses `t,d[,shots]` CSV text; `path` labels error messages only.
pub fn parse_trace_csv(text: &str, path: &str) -> Result<DataVector> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: path.to_string(),
        line: 1,
        msg: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let with_shots = match cols.as_slice() {
        ["t", "d"] => false,
        ["t", "d", "shots"] => true,
        _ => {
            return Err(Error::Parse {
                path: path.to_string(),
                line: 1,
                msg: format!("expected header \"t,d\" or \"t,d,shots\", found {header:?}"),
            })
        }
    };
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut shots = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse {
                path: path.to_string(),
                line,
                msg: format!("expected {} fields, found {}", cols.len(), fields.len()),
            });
        }
        times.push(parse_field::<f64>(fields[0], path, line, "time")?);
        values.push(parse_field::<f64>(fields[1], path, line, "value")?);
        if with_shots {
            shots.push(parse_field::<u32>(fields[2], path, line, "shot count")?);
        }
    }
    let grid = TimeGrid::new(times)?;
    DataVector::new(grid, values, with_shots.then_some(shots))
}

/// Writes a trace CSV file.
pub fn write_trace_csv(path: impl AsRef<Path>, data: &DataVector) -> Result<()> {
    fs::write(path, trace_to_csv(data))?;
    Ok(())
}

/// Reads a trace CSV file.
pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<DataVector> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_trace_csv(&text, &path.display().to_string())
}

/// Renders a power spectrum as `omega,F` CSV.
pub fn spectrum_to_csv(spectrum: &PowerSpectrum) -> String {
    let mut out = String::from("omega,F\n");
    for (w, f) in spectrum.omegas().iter().zip(spectrum.values()) {
        out.push_str(&format!("{},{}\n", fmt_f64(*w), fmt_f64(*f)));
    }
    out
}

/// Writes a spectrum CSV file.
pub fn write_spectrum_csv(path: impl AsRef<Path>, spectrum: &PowerSpectrum) -> Result<()> {
    fs::write(path, spectrum_to_csv(spectrum))?;
    Ok(())
}

/// Renders a likelihood profile as `omega,logP` CSV.
pub fn profile_to_csv(profile: &LikelihoodProfile) -> String {
    let mut out = String::from("omega,logP\n");
    for (w, p) in profile.omegas.iter().zip(&profile.values) {
        out.push_str(&format!("{},{}\n", fmt_f64(*w), fmt_f64(*p)));
    }
    out
}

/// Writes a likelihood profile CSV file.
pub fn write_profile_csv(path: impl AsRef<Path>, profile: &LikelihoodProfile) -> Result<()> {
    fs::write(path, profile_to_csv(profile))?;
    Ok(())
}

/// Writes pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Reads and deserializes a JSON file.
pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path.as_ref())?;
    Ok(serde_json::from_str(&text)?)
}
