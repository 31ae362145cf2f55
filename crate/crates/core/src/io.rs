//! Plot-ready files.
//!
//! A [`PhaseFunction`] is written as `<stem>.csv` with header `x,p,re,im`,
//! rows ordered x outer and p inner, plus a `<stem>.json` sidecar holding the
//! grid and tag. The JSON form is a single `<stem>.json` holding the grid,
//! tag and row-major `re`/`im` arrays. Floats use shortest round-trip
//! formatting, so output is byte-identical for identical input.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{PhaseFunction, PhaseGrid, C64};
use crate::report::ResidualReport;
use crate::wall::WallStudy;

/// File format for phase-space data and study tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Json,
}

/// Contents of the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMeta {
    pub tag: String,
    pub grid: PhaseGrid,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_phase_csv<W: Write>(f: &PhaseFunction, w: W) -> Result<()> {
    let g = f.grid();
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "p", "re", "im"]).map_err(csv_err)?;
    for i in 0..g.n_x {
        let x = g.x(i).to_string();
        for (j, v) in f.row(i).iter().enumerate() {
            out.write_record([x.as_str(), &g.p(j).to_string(), &v.re.to_string(), &v.im.to_string()])
                .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads values written by [`write_phase_csv`]; the node coordinates must match `grid`.
pub fn read_phase_csv<R: Read>(r: R, grid: &PhaseGrid, tag: &str) -> Result<PhaseFunction> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut values = Vec::with_capacity(grid.len());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let num = |c: usize| -> Result<f64> {
            rec.get(c)
                .ok_or_else(|| Error::Format(format!("row {k}: missing column {c}")))?
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("row {k}: {e}")))
        };
        if k >= grid.len() {
            return Err(Error::Format(format!("more than {} rows", grid.len())));
        }
        let (i, j) = (k / grid.n_p, k % grid.n_p);
        let (x, p) = (num(0)?, num(1)?);
        if (x - grid.x(i)).abs() > 1e-12 * (1.0 + x.abs()) || (p - grid.p(j)).abs() > 1e-12 * (1.0 + p.abs()) {
            return Err(Error::Format(format!("row {k}: node ({x}, {p}) does not match the grid")));
        }
        values.push(C64::new(num(2)?, num(3)?));
    }
    PhaseFunction::from_values(grid, values, tag)
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Writes `<stem>.csv` and `<stem>.json`; returns both paths.
pub fn save_phase_function(f: &PhaseFunction, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    let (csv_path, json_path) = (with_ext(stem, "csv"), with_ext(stem, "json"));
    write_phase_csv(f, BufWriter::new(File::create(&csv_path)?))?;
    let meta = PhaseMeta {
        tag: f.tag.clone(),
        grid: *f.grid(),
    };
    write_json(&meta, &json_path)?;
    Ok((csv_path, json_path))
}

pub fn load_phase_function(stem: &Path) -> Result<PhaseFunction> {
    let meta: PhaseMeta = serde_json::from_reader(File::open(with_ext(stem, "json"))?)?;
    read_phase_csv(File::open(with_ext(stem, "csv"))?, &meta.grid, &meta.tag)
}

#[derive(Serialize, Deserialize)]
struct PhaseJson {
    tag: String,
    grid: PhaseGrid,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Writes `f` in the requested format; returns the files written.
pub fn save_phase(f: &PhaseFunction, stem: &Path, format: DataFormat) -> Result<Vec<PathBuf>> {
    match format {
        DataFormat::Csv => {
            let (c, j) = save_phase_function(f, stem)?;
            Ok(vec![c, j])
        }
        DataFormat::Json => {
            let path = with_ext(stem, "json");
            let doc = PhaseJson {
                tag: f.tag.clone(),
                grid: *f.grid(),
                re: f.values().iter().map(|v| v.re).collect(),
                im: f.values().iter().map(|v| v.im).collect(),
            };
            write_json(&doc, &path)?;
            Ok(vec![path])
        }
    }
}

/// Reads a single-file JSON phase function written by [`save_phase`].
pub fn load_phase_json(path: &Path) -> Result<PhaseFunction> {
    let doc: PhaseJson = serde_json::from_reader(File::open(path)?)?;
    if doc.re.len() != doc.im.len() {
        return Err(Error::Format("re and im lengths differ".into()));
    }
    let values = doc.re.iter().zip(&doc.im).map(|(&a, &b)| C64::new(a, b)).collect();
    PhaseFunction::from_values(&doc.grid, values, doc.tag)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn save_reports(reports: &[ResidualReport], path: &Path) -> Result<()> {
    write_json(reports, path)
}

pub fn write_wall_study_csv<W: Write>(study: &WallStudy, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["alpha", "sup_distance", "phase_shift"]).map_err(csv_err)?;
    for r in &study.rows {
        out.write_record([r.alpha.to_string(), r.sup_distance.to_string(), r.phase_shift.to_string()])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the study table to `<dir>/wall_study.{csv,json}` and each `f_alpha` to `<dir>/wall_alpha_<alpha>`.
pub fn save_wall_study(study: &WallStudy, dir: &Path, format: DataFormat) -> Result<Vec<PathBuf>> {
    let table = match format {
        DataFormat::Csv => {
            let table = dir.join("wall_study.csv");
            write_wall_study_csv(study, BufWriter::new(File::create(&table)?))?;
            table
        }
        DataFormat::Json => {
            let table = dir.join("wall_study.json");
            write_json(&study.rows, &table)?;
            table
        }
    };
    let mut paths = vec![table];
    for (row, f) in study.rows.iter().zip(&study.fields) {
        paths.extend(save_phase(f, &dir.join(format!("wall_alpha_{}", row.alpha)), format)?);
    }
    Ok(paths)
}
