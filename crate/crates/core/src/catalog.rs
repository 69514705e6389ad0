//! Built-in inequalities, reference thresholds and near-optimal measurements.
//!
//! Directory layout: `<name>.cg` inequality files, optional `<name>.meas`
//! measurement files and an optional `table1.tsv` with columns
//! `name alpha_max facet_serial facet_name`.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::analytic::alpha_max_chsh;
use crate::error::{Error, Result};
use crate::inequality::{parse_cg, BellInequality};
use crate::quantum::{alpha_crossing, parse_measurements, CrossingStatus, MeasurementSet};

/// Entries whose measurement files are shipped, in Table I order.
pub const APPENDIX_ENTRIES: [&str; 5] = ["A28", "A27", "A5", "A56", "A8"];

/// Local dimension the shipped measurements live in.
pub const APPENDIX_DIM: usize = 3;

const EMBEDDED: [(&str, &str, Option<&str>); 10] = [
    ("A1", include_str!("../catalog/A1.cg"), None),
    ("A2_CHSH", include_str!("../catalog/A2_CHSH.cg"), None),
    ("A3_I3322", include_str!("../catalog/A3_I3322.cg"), None),
    ("A5", include_str!("../catalog/A5.cg"), Some(include_str!("../catalog/A5.meas"))),
    ("A8", include_str!("../catalog/A8.cg"), Some(include_str!("../catalog/A8.meas"))),
    ("A27", include_str!("../catalog/A27.cg"), Some(include_str!("../catalog/A27.meas"))),
    ("A28", include_str!("../catalog/A28.cg"), Some(include_str!("../catalog/A28.meas"))),
    ("A56", include_str!("../catalog/A56.cg"), Some(include_str!("../catalog/A56.meas"))),
    ("I4422_1", include_str!("../catalog/I4422_1.cg"), None),
    ("I4422_2", include_str!("../catalog/I4422_2.cg"), None),
];

const EMBEDDED_TABLE: &str = include_str!("../catalog/table1.tsv");

const ALIASES: [(&str, &str); 4] = [("CHSH", "A2_CHSH"), ("A2", "A2_CHSH"), ("I3322", "A3_I3322"), ("A3", "A3_I3322")];

/// Reference row: reported upper bound on `α_max` (d = 3) and the
/// originating cut-polytope facet, kept as descriptive metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub alpha_max: f64,
    pub facet_serial: Option<u32>,
    pub facet_name: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub inequality: BellInequality,
    pub table: Option<TableRow>,
    pub appendix_measurements: Option<(MeasurementSet, MeasurementSet)>,
}

impl CatalogEntry {
    pub fn table_alpha_max(&self) -> Option<f64> {
        self.table.as_ref().map(|t| t.alpha_max)
    }
}

/// Canonical catalog name for `name` or one of its aliases (case-insensitive).
pub fn canonical_name(name: &str) -> Option<&'static str> {
    EMBEDDED
        .iter()
        .map(|e| e.0)
        .find(|n| n.eq_ignore_ascii_case(name))
        .or_else(|| ALIASES.iter().find(|a| a.0.eq_ignore_ascii_case(name)).map(|a| a.1))
}

fn parse_table(text: &str) -> Result<Vec<(String, TableRow)>> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 {
            return Err(Error::parse(n + 1, "expected at least name and alpha_max"));
        }
        let alpha_max = cols[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(n + 1, format!("bad alpha_max `{}`", cols[1])))?;
        let facet_serial = match cols.get(2).map(|s| s.trim()).filter(|s| !s.is_empty()) {
            Some(s) => Some(s.parse().map_err(|_| Error::parse(n + 1, format!("bad facet serial `{s}`")))?),
            None => None,
        };
        let facet_name = cols.get(3).map(|s| s.trim()).filter(|s| !s.is_empty()).map(str::to_owned);
        rows.push((
            cols[0].trim().to_owned(),
            TableRow {
                alpha_max,
                facet_serial,
                facet_name,
            },
        ));
    }
    Ok(rows)
}

fn build_entry(name: &str, cg: &str, meas: Option<&str>, table: &[(String, TableRow)]) -> Result<CatalogEntry> {
    let inequality = parse_cg(cg)?.with_name(name);
    let appendix_measurements = meas.map(parse_measurements).transpose()?;
    let table = table.iter().find(|(n, _)| n == name).map(|(_, r)| r.clone());
    Ok(CatalogEntry {
        name: name.to_owned(),
        inequality,
        table,
        appendix_measurements,
    })
}

/// The ten built-in entries.
pub fn load_catalog() -> Vec<CatalogEntry> {
    let table = parse_table(EMBEDDED_TABLE).expect("embedded table parses");
    EMBEDDED
        .iter()
        .map(|(name, cg, meas)| build_entry(name, cg, *meas, &table).expect("embedded catalog parses"))
        .collect()
}

/// All `.cg` files of `dir`, sorted by name, with their `.meas` files and
/// `table1.tsv` rows when present.
pub fn load_catalog_dir(dir: &Path) -> Result<Vec<CatalogEntry>> {
    let table_path = dir.join("table1.tsv");
    let table = if table_path.is_file() {
        parse_table(&fs::read_to_string(&table_path)?)?
    } else {
        Vec::new()
    };
    let mut names: Vec<String> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "cg"))
        .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .collect();
    names.sort();
    names
        .iter()
        .map(|name| {
            let cg = fs::read_to_string(dir.join(format!("{name}.cg")))?;
            let meas_path = dir.join(format!("{name}.meas"));
            let meas = if meas_path.is_file() {
                Some(fs::read_to_string(&meas_path)?)
            } else {
                None
            };
            build_entry(name, &cg, meas.as_deref(), &table).map_err(|e| match e {
                Error::Parse { line, msg } => Error::Parse {
                    line,
                    msg: format!("{name}: {msg}"),
                },
                other => other,
            })
        })
        .collect()
}

pub fn lookup(name: &str) -> Result<CatalogEntry> {
    let canonical = canonical_name(name).ok_or_else(|| Error::UnknownEntry(name.to_owned()))?;
    Ok(load_catalog()
        .into_iter()
        .find(|e| e.name == canonical)
        .expect("canonical names are catalog entries"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixReport {
    pub name: String,
    /// Violation at `α = 0`.
    pub v0: f64,
    /// Violation at `α = 1`.
    pub v1: f64,
    pub crossing: f64,
    pub status: CrossingStatus,
    pub table_value: Option<f64>,
    /// `|crossing - table_value|`.
    pub delta: Option<f64>,
}

/// Crossing point of an entry's shipped measurements at `d = 3`.
pub fn verify_entry(entry: &CatalogEntry) -> Result<AppendixReport> {
    let (a, b) = entry
        .appendix_measurements
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no measurement data", entry.name)))?;
    let c = alpha_crossing(&entry.inequality, APPENDIX_DIM, a, b)?;
    let table_value = entry.table_alpha_max();
    Ok(AppendixReport {
        name: entry.name.clone(),
        v0: c.v0,
        v1: c.v1,
        crossing: c.alpha,
        status: c.status,
        table_value,
        delta: table_value.map(|t| (c.alpha - t).abs()),
    })
}

pub fn verify_appendix(name: &str) -> Result<AppendixReport> {
    verify_entry(&lookup(name)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelevanceRow {
    pub name: String,
    pub crossing: f64,
    pub table_value: Option<f64>,
    /// `4/(3√2+1) - crossing`; positive means a qutrit isotropic state that
    /// satisfies CHSH violates this entry.
    pub margin: f64,
}

/// Margins of the five shipped crossings below the qutrit CHSH threshold,
/// followed by CHSH itself.
pub fn relevance_summary() -> Result<Vec<RelevanceRow>> {
    let chsh = alpha_max_chsh(APPENDIX_DIM)?;
    let mut rows = APPENDIX_ENTRIES
        .iter()
        .map(|name| {
            let r = verify_appendix(name)?;
            Ok(RelevanceRow {
                name: r.name,
                crossing: r.crossing,
                table_value: r.table_value,
                margin: chsh - r.crossing,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.push(RelevanceRow {
        name: "A2_CHSH".into(),
        crossing: chsh,
        table_value: lookup("CHSH")?.table_alpha_max(),
        margin: 0.0,
    });
    Ok(rows)
}
