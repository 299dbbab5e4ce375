//! Batch runs, persistence and figures.

pub mod bundle;
pub mod config;
pub mod csv;
pub mod figures;
pub mod svg;

use std::path::{Path, PathBuf};

use num_complex::Complex64;

pub use bundle::{run, ResultBundle, Source, SpectrumRecord};
pub use config::{RunConfig, Task};
pub use figures::{emit_figures, parse_figure_list, render_figure, Figure};

use crate::error::{Error, Result};

/// Writes `bundle.json`, `spectra.csv`, `linear.csv`, `scaling.csv` and
/// `secular.csv` into `dir`, skipping tables without rows.
pub fn write_outputs(bundle: &ResultBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, text)?;
        written.push(path);
        Ok(())
    };
    put("bundle.json", bundle.to_json())?;
    if bundle.spectrum_records(Source::Shooting).next().is_some() {
        put("spectra.csv", csv::spectrum_csv(bundle.spectrum_records(Source::Shooting)))?;
    }
    if bundle.spectrum_records(Source::AiryDeterminant).next().is_some() {
        put("linear.csv", csv::spectrum_csv(bundle.spectrum_records(Source::AiryDeterminant)))?;
    }
    if !bundle.branches.is_empty() {
        put("scaling.csv", csv::scaling_csv(&bundle.branches))?;
    }
    if !bundle.secular.is_empty() {
        put("secular.csv", csv::secular_csv(&bundle.secular))?;
    }
    Ok(written)
}

/// Parses `a+bi`, `a-bi`, `bi` or `a` (spaces allowed, `j` accepted for `i`).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::InvalidParams(format!("cannot parse complex number `{s}`"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().replace('j', "i");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // the split is the last sign not belonging to an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    Ok(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
}
