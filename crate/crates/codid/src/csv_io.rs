//! Panel CSV files.
//!
//! Panels use the header `group,time,category,count` with optional
//! `stratum,stratum_weight` columns; column order is free and extra columns
//! are ignored. Treatment timing lives in a sidecar `group,first_treated`
//! where `inf` marks a never-treated group.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use codid_core::panel::{PanelDataset, PanelOptions, Record};
use codid_core::simplex;

use crate::error::{CliError, Result};
use crate::json::fmt_f64;

pub const PANEL_COLUMNS: [&str; 4] = ["group", "time", "category", "count"];

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn required(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    column(headers, name).ok_or_else(|| CliError::MissingColumn(name.to_string()))
}

fn parse<T: std::str::FromStr>(row: &csv::StringRecord, idx: usize, what: &str) -> Result<T> {
    let raw = row.get(idx).unwrap_or("").trim();
    raw.parse().map_err(|_| CliError::Parse {
        line: row.position().map_or(0, |p| p.line()),
        message: format!("cannot parse {what} `{raw}`"),
    })
}

/// Rows of a panel CSV, unvalidated.
pub fn read_records<R: Read>(reader: R) -> Result<Vec<Record>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let [g, t, c, n] = PANEL_COLUMNS.map(|name| required(&headers, name));
    let (g, t, c, n) = (g?, t?, c?, n?);
    let stratum = column(&headers, "stratum");
    let weight = column(&headers, "stratum_weight");
    if weight.is_some() && stratum.is_none() {
        return Err(CliError::MissingColumn("stratum".to_string()));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let mut rec = Record::new(&row[g], parse(&row, t, "time")?, &row[c], parse(&row, n, "count")?);
        if let Some(si) = stratum {
            let w = match weight {
                Some(wi) if !row.get(wi).unwrap_or("").is_empty() => Some(parse(&row, wi, "stratum_weight")?),
                _ => None,
            };
            rec = rec.in_stratum(&row[si], w);
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn read_records_from(path: &Path) -> Result<Vec<Record>> {
    read_records(open(path)?)
}

/// Reads and validates a panel.
pub fn load_csv(path: &Path, options: &PanelOptions) -> Result<PanelDataset> {
    Ok(PanelDataset::from_records(&read_records_from(path)?, options)?)
}

/// `group,first_treated` rows; `inf` (or an empty field) means never treated.
pub fn read_cohorts<R: Read>(reader: R) -> Result<Vec<(String, Option<i64>)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let g = required(&headers, "group")?;
    let f = required(&headers, "first_treated")?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let raw = row.get(f).unwrap_or("");
        let when = match raw.to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "" => None,
            _ => Some(parse(&row, f, "first_treated")?),
        };
        out.push((row[g].to_string(), when));
    }
    Ok(out)
}

pub fn load_cohorts(path: &Path) -> Result<Vec<(String, Option<i64>)>> {
    read_cohorts(open(path)?)
}

/// Counts as written to CSV: integers stay integers, everything else gets
/// 17 significant digits.
fn fmt_count(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        fmt_f64(x)
    }
}

/// Writes the panel in the input schema; loading the output reproduces the
/// panel exactly.
pub fn write_panel<W: Write>(panel: &PanelDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let stratified = panel.is_stratified();
    let mut header: Vec<&str> = PANEL_COLUMNS.to_vec();
    if stratified {
        header.extend(["stratum", "stratum_weight"]);
    }
    w.write_record(&header)?;
    for r in panel.to_records() {
        let mut row = vec![r.group, r.period.to_string(), r.category, fmt_count(r.count)];
        if stratified {
            row.push(r.stratum.unwrap_or_default());
            row.push(r.stratum_weight.map(fmt_f64).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CliError::io("<output>", e))?;
    Ok(())
}

/// Long table of raw quantities, log-quantities, shares and log-odds against
/// `baseline`, one row per (group, period[, stratum], category).
pub fn write_plotdata<W: Write>(panel: &PanelDataset, baseline: usize, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "group",
        "time",
        "stratum",
        "category",
        "quantity",
        "log_quantity",
        "share",
        "log_odds",
    ])?;
    let labels = panel.categories().labels();
    for (addr, q) in panel.cells() {
        let pi = simplex::closure(q);
        let ls = pi.log_shares();
        for (k, label) in labels.iter().enumerate() {
            w.write_record([
                addr.group.clone(),
                addr.period.to_string(),
                addr.stratum.clone().unwrap_or_default(),
                label.clone(),
                fmt_f64(q.values()[k]),
                fmt_f64(q.values()[k].ln()),
                fmt_f64(pi.shares()[k]),
                fmt_f64(ls[k] - ls[baseline]),
            ])?;
        }
    }
    w.flush().map_err(|e| CliError::io("<output>", e))?;
    Ok(())
}
