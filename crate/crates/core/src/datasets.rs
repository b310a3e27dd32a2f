//! Bundled datasets and the CSV formats shared with user-supplied files.
//!
//! Files may carry `#` comment lines. Errors report 1-based file lines.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::angle::deg;
use crate::classicality::{Connective, MembershipTriple};
use crate::disjunction::ExemplarRow;
use crate::entanglement::CoincidenceTable;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}, column {column}: {message}")]
    Field { line: u64, column: String, message: String },
    #[error("unknown dataset {0:?}")]
    Unknown(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

struct Table {
    headers: Vec<String>,
    rows: Vec<(u64, Vec<String>)>,
}

fn read_table(text: &str, expected: &[&str], optional: &[&str]) -> Result<Table, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(&e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let header_line = reader.position().line();
    let wanted: Vec<&str> = expected.iter().chain(optional.iter().take(headers.len().saturating_sub(expected.len()))).copied().collect();
    if headers != wanted {
        return Err(DatasetError::Malformed {
            line: header_line.max(1),
            message: format!("expected header {:?}, found {:?}", wanted.join(","), headers.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push((line, record.iter().map(str::to_owned).collect()));
    }
    Ok(Table { headers, rows })
}

fn csv_error(e: &csv::Error) -> DatasetError {
    DatasetError::Malformed {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

fn field_error(line: u64, column: &str, message: impl Into<String>) -> DatasetError {
    DatasetError::Field {
        line,
        column: column.to_owned(),
        message: message.into(),
    }
}

fn number(line: u64, column: &str, raw: &str) -> Result<f64, DatasetError> {
    let value: f64 = raw
        .parse()
        .map_err(|_| field_error(line, column, format!("{raw:?} is not a number")))?;
    if !value.is_finite() {
        return Err(field_error(line, column, format!("{raw:?} is not finite")));
    }
    Ok(value)
}

fn probability(line: u64, column: &str, raw: &str) -> Result<f64, DatasetError> {
    let value = number(line, column, raw)?;
    if !(0.0..=1.0).contains(&value) {
        return Err(field_error(line, column, format!("{value} is outside [0, 1]")));
    }
    Ok(value)
}

fn read_file(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub const MEMBERSHIP_HEADER: [&str; 7] = ["exemplar", "conceptA", "conceptB", "muA", "muB", "muJoint", "connective"];

pub fn parse_membership_csv(text: &str) -> Result<Vec<MembershipTriple>, DatasetError> {
    let table = read_table(text, &MEMBERSHIP_HEADER, &[])?;
    table
        .rows
        .into_iter()
        .map(|(line, f)| {
            let connective: Connective = f[6].parse().map_err(|e: crate::classicality::ClassicalityError| field_error(line, "connective", e.to_string()))?;
            Ok(MembershipTriple {
                exemplar: f[0].clone(),
                concept_a: f[1].clone(),
                concept_b: f[2].clone(),
                mu_a: probability(line, "muA", &f[3])?,
                mu_b: probability(line, "muB", &f[4])?,
                mu_joint: probability(line, "muJoint", &f[5])?,
                connective,
            })
        })
        .collect()
}

pub fn load_membership_csv(path: impl AsRef<Path>) -> Result<Vec<MembershipTriple>, DatasetError> {
    parse_membership_csv(&read_file(path.as_ref())?)
}

pub const COINCIDENCE_HEADER: [&str; 5] = ["experiment", "outcome11", "outcome12", "outcome21", "outcome22"];

/// Reads probabilities or, when any value exceeds 1, integer counts.
pub fn parse_coincidence_csv(text: &str) -> Result<Vec<CoincidenceTable>, DatasetError> {
    let table = read_table(text, &COINCIDENCE_HEADER, &[])?;
    let mut parsed = Vec::with_capacity(table.rows.len());
    for (line, f) in &table.rows {
        let mut values = [0.0; 4];
        for (k, slot) in values.iter_mut().enumerate() {
            *slot = number(*line, COINCIDENCE_HEADER[k + 1], &f[k + 1])?;
            if *slot < 0.0 {
                return Err(field_error(*line, COINCIDENCE_HEADER[k + 1], "negative value"));
            }
        }
        parsed.push((*line, f[0].clone(), values));
    }
    let counts = parsed.iter().any(|(_, _, v)| v.iter().any(|&x| x > 1.0));
    parsed
        .into_iter()
        .map(|(line, label, v)| {
            let table = if counts {
                let mut c = [0u64; 4];
                for (k, (slot, &x)) in c.iter_mut().zip(&v).enumerate() {
                    if x.fract() != 0.0 {
                        return Err(field_error(line, COINCIDENCE_HEADER[k + 1], format!("count {x} is not an integer")));
                    }
                    *slot = x as u64;
                }
                CoincidenceTable::from_counts(label, c)
            } else {
                CoincidenceTable::new(label, v)
            };
            table.map_err(|e| DatasetError::Malformed {
                line,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn load_coincidence_csv(path: impl AsRef<Path>) -> Result<Vec<CoincidenceTable>, DatasetError> {
    parse_coincidence_csv(&read_file(path.as_ref())?)
}

pub const EXEMPLAR_HEADER: [&str; 5] = ["index", "name", "muA", "muB", "muAorB"];

/// `index,name,muA,muB,muAorB[,phi_deg]`; an empty `phi_deg` is allowed.
pub fn parse_exemplar_csv(text: &str) -> Result<Vec<ExemplarRow>, DatasetError> {
    let table = read_table(text, &EXEMPLAR_HEADER, &["phi_deg"])?;
    let with_phi = table.headers.len() == 6;
    table
        .rows
        .into_iter()
        .map(|(line, f)| {
            let index: usize = f[0]
                .parse()
                .map_err(|_| field_error(line, "index", format!("{:?} is not a positive integer", f[0])))?;
            if index == 0 {
                return Err(field_error(line, "index", "indices start at 1"));
            }
            let phi = match with_phi.then(|| f[5].as_str()) {
                None | Some("") => None,
                Some(raw) => {
                    let d = number(line, "phi_deg", raw)?;
                    if d.abs() > 180.0 {
                        return Err(field_error(line, "phi_deg", format!("|{d}| exceeds 180")));
                    }
                    Some(deg(d))
                }
            };
            Ok(ExemplarRow::new(
                index,
                f[1].clone(),
                probability(line, "muA", &f[2])?,
                probability(line, "muB", &f[3])?,
                probability(line, "muAorB", &f[4])?,
                phi,
            ))
        })
        .collect()
}

pub fn load_exemplar_csv(path: impl AsRef<Path>) -> Result<Vec<ExemplarRow>, DatasetError> {
    parse_exemplar_csv(&read_file(path.as_ref())?)
}

/// Published derived columns for a membership row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrintedDiagnostics {
    pub exemplar: String,
    pub connective: Connective,
    pub delta: f64,
    pub k: f64,
    pub f: f64,
}

fn parse_printed(text: &str) -> Result<Vec<PrintedDiagnostics>, DatasetError> {
    let table = read_table(text, &["exemplar", "connective", "delta", "k", "f"], &[])?;
    table
        .rows
        .into_iter()
        .map(|(line, f)| {
            Ok(PrintedDiagnostics {
                exemplar: f[0].clone(),
                connective: f[1].parse().map_err(|e: crate::classicality::ClassicalityError| field_error(line, "connective", e.to_string()))?,
                delta: number(line, "delta", &f[2])?,
                k: number(line, "k", &f[3])?,
                f: number(line, "f", &f[4])?,
            })
        })
        .collect()
}

/// One published model-vector component pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PublishedComponent {
    pub index: usize,
    pub name: String,
    pub a: f64,
    pub b_magnitude: f64,
    pub b_phase_deg: f64,
}

impl PublishedComponent {
    pub fn b(&self) -> Complex64 {
        Complex64::from_polar(self.b_magnitude, deg(self.b_phase_deg))
    }
}

fn parse_vectors(text: &str) -> Result<Vec<PublishedComponent>, DatasetError> {
    let table = read_table(text, &["index", "name", "a_mag", "b_mag", "b_phase_deg"], &[])?;
    table
        .rows
        .into_iter()
        .map(|(line, f)| {
            Ok(PublishedComponent {
                index: f[0].parse().map_err(|_| field_error(line, "index", "not an integer"))?,
                name: f[1].clone(),
                a: number(line, "a_mag", &f[2])?,
                b_magnitude: number(line, "b_mag", &f[3])?,
                b_phase_deg: number(line, "b_phase_deg", &f[4])?,
            })
        })
        .collect()
}

const HAMPTON_TABLE3: &str = include_str!("../data/hampton-table3.csv");
const HAMPTON_TABLE3_PRINTED: &str = include_str!("../data/hampton-table3-printed.csv");
const ANIMAL_ACTS: &str = include_str!("../data/animal-acts-table1.csv");
const ANIMAL_ACTS_COUNTS: &str = include_str!("../data/animal-acts-table1-counts.csv");
const FRUITS_VEGETABLES: &str = include_str!("../data/fruits-vegetables-table2.csv");
const FRUITS_VEGETABLES_VECTORS: &str = include_str!("../data/fruits-vegetables-vectors.csv");

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "rows", rename_all = "snake_case")]
pub enum DatasetRows {
    Membership(Vec<MembershipTriple>),
    Coincidence(Vec<CoincidenceTable>),
    Exemplars(Vec<ExemplarRow>),
    PrintedDiagnostics(Vec<PrintedDiagnostics>),
    PublishedVectors(Vec<PublishedComponent>),
}

impl DatasetRows {
    pub fn len(&self) -> usize {
        match self {
            Self::Membership(r) => r.len(),
            Self::Coincidence(r) => r.len(),
            Self::Exemplars(r) => r.len(),
            Self::PrintedDiagnostics(r) => r.len(),
            Self::PublishedVectors(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Membership(_) => "membership",
            Self::Coincidence(_) => "coincidence",
            Self::Exemplars(_) => "exemplars",
            Self::PrintedDiagnostics(_) => "printed_diagnostics",
            Self::PublishedVectors(_) => "published_vectors",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub id: &'static str,
    pub provenance: &'static str,
    pub notes: Vec<&'static str>,
    #[serde(flatten)]
    pub rows: DatasetRows,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub kind: &'static str,
    pub rows: usize,
    pub provenance: &'static str,
    pub notes: Vec<&'static str>,
}

struct Spec {
    id: &'static str,
    provenance: &'static str,
    notes: &'static [&'static str],
}

const HAMPTON_PROVENANCE: &str = "Membership weights from Hampton (1988a, 1988b), selected exemplars";
const HAMPTON_NOTES: &[&str] = &[
    "comma decimals in the source (1,05 and 0,6) normalized to dot decimals",
    "labels Underwater and Appartment Block kept verbatim",
    "39 rows: 25 disjunction and 14 conjunction",
    "printed derived columns differ from recomputation by up to 0.01 for several rows",
];

const SPECS: &[Spec] = &[
    Spec {
        id: "animal-acts-table1",
        provenance: "Coincidence experiments on The Animal Acts, 81 participants, published probabilities",
        notes: &["probabilities printed to three decimals; totals within 0.001 of 1"],
    },
    Spec {
        id: "animal-acts-table1-counts",
        provenance: "Coincidence experiments on The Animal Acts, counts inferred as round(p * 81)",
        notes: &["counts are back-inferred, not original records"],
    },
    Spec {
        id: "fruits-vegetables-table2",
        provenance: "Choose-one frequencies for Fruits, Vegetables and Fruits or Vegetables, derived from Hampton (1988b)",
        notes: &[
            "weight columns sum to 1.0001, 1.0001 and 0.9999",
            "Tomato's muAorB equals Apple's (0.0688) and is inconsistent with its published angle",
        ],
    },
    Spec {
        id: "fruits-vegetables-vectors",
        provenance: "Published 25-component model vectors for Fruits and Vegetables",
        notes: &["the compensating B component 0.1565 is inconsistent with the weights"],
    },
    Spec {
        id: "hampton-table3",
        provenance: HAMPTON_PROVENANCE,
        notes: HAMPTON_NOTES,
    },
    Spec {
        id: "hampton-table3-conjunction",
        provenance: HAMPTON_PROVENANCE,
        notes: HAMPTON_NOTES,
    },
    Spec {
        id: "hampton-table3-disjunction",
        provenance: HAMPTON_PROVENANCE,
        notes: HAMPTON_NOTES,
    },
    Spec {
        id: "hampton-table3-printed",
        provenance: "Derived columns (delta, k, f) as published next to the Hampton weights",
        notes: &["computed from unrounded data; compare with tolerance only"],
    },
];

fn rows_for(id: &str) -> Result<DatasetRows, DatasetError> {
    let membership = |keep: Option<Connective>| -> Result<DatasetRows, DatasetError> {
        let rows = parse_membership_csv(HAMPTON_TABLE3)?;
        Ok(DatasetRows::Membership(
            rows.into_iter().filter(|r| keep.is_none_or(|c| r.connective == c)).collect(),
        ))
    };
    match id {
        "animal-acts-table1" => Ok(DatasetRows::Coincidence(parse_coincidence_csv(ANIMAL_ACTS)?)),
        "animal-acts-table1-counts" => Ok(DatasetRows::Coincidence(parse_coincidence_csv(ANIMAL_ACTS_COUNTS)?)),
        "fruits-vegetables-table2" => Ok(DatasetRows::Exemplars(parse_exemplar_csv(FRUITS_VEGETABLES)?)),
        "fruits-vegetables-vectors" => Ok(DatasetRows::PublishedVectors(parse_vectors(FRUITS_VEGETABLES_VECTORS)?)),
        "hampton-table3" => membership(None),
        "hampton-table3-conjunction" => membership(Some(Connective::And)),
        "hampton-table3-disjunction" => membership(Some(Connective::Or)),
        "hampton-table3-printed" => Ok(DatasetRows::PrintedDiagnostics(parse_printed(HAMPTON_TABLE3_PRINTED)?)),
        other => Err(DatasetError::Unknown(other.to_owned())),
    }
}

/// The CSV text a bundled dataset is parsed from. The hampton-table3 subsets share
/// one file.
pub fn source(id: &str) -> Result<&'static str, DatasetError> {
    Ok(match id {
        "animal-acts-table1" => ANIMAL_ACTS,
        "animal-acts-table1-counts" => ANIMAL_ACTS_COUNTS,
        "fruits-vegetables-table2" => FRUITS_VEGETABLES,
        "fruits-vegetables-vectors" => FRUITS_VEGETABLES_VECTORS,
        "hampton-table3" | "hampton-table3-conjunction" | "hampton-table3-disjunction" => HAMPTON_TABLE3,
        "hampton-table3-printed" => HAMPTON_TABLE3_PRINTED,
        other => return Err(DatasetError::Unknown(other.to_owned())),
    })
}

pub fn load(id: &str) -> Result<Dataset, DatasetError> {
    let spec = SPECS
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| DatasetError::Unknown(id.to_owned()))?;
    Ok(Dataset {
        id: spec.id,
        provenance: spec.provenance,
        notes: spec.notes.to_vec(),
        rows: rows_for(id)?,
    })
}

/// Every bundled dataset, sorted by id.
pub fn catalog() -> Vec<CatalogEntry> {
    SPECS
        .iter()
        .map(|s| {
            let rows = rows_for(s.id).expect("bundled datasets parse");
            CatalogEntry {
                id: s.id,
                kind: rows.kind(),
                rows: rows.len(),
                provenance: s.provenance,
                notes: s.notes.to_vec(),
            }
        })
        .collect()
}

/// The bundled exemplar table with the published angles.
pub fn fruits_vegetables() -> Vec<ExemplarRow> {
    parse_exemplar_csv(FRUITS_VEGETABLES).expect("bundled dataset parses")
}

pub fn animal_acts() -> Vec<CoincidenceTable> {
    let names = [
        ["Horse Growls", "Horse Whinnies", "Bear Growls", "Bear Whinnies"],
        ["Tiger Growls", "Tiger Whinnies", "Cat Growls", "Cat Whinnies"],
        ["Horse Snorts", "Horse Meows", "Bear Snorts", "Bear Meows"],
        ["Tiger Snorts", "Tiger Meows", "Cat Snorts", "Cat Meows"],
    ];
    parse_coincidence_csv(ANIMAL_ACTS)
        .expect("bundled dataset parses")
        .into_iter()
        .zip(names)
        .map(|(t, n)| t.with_outcome_names(n.map(String::from)))
        .collect()
}

pub fn hampton_table3() -> Vec<MembershipTriple> {
    parse_membership_csv(HAMPTON_TABLE3).expect("bundled dataset parses")
}

pub fn hampton_table3_printed() -> Vec<PrintedDiagnostics> {
    parse_printed(HAMPTON_TABLE3_PRINTED).expect("bundled dataset parses")
}

pub fn published_vectors() -> Vec<PublishedComponent> {
    parse_vectors(FRUITS_VEGETABLES_VECTORS).expect("bundled dataset parses")
}
