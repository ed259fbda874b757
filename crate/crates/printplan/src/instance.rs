//! Problem data: parts, machines, penalty coefficients and the job budget,
//! plus JSON / CSV-pair parsing and validation.
//!
//! Units are fixed throughout the crate: millimetres for lengths, mm² for
//! areas, mm³ for volumes and hours for time.

use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry;

/// A cuboid part to be printed, described by its enclosing box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub id: String,
    pub width_mm: f64,
    pub length_mm: f64,
    pub height_mm: f64,
    pub due_h: f64,
}

impl Part {
    pub fn new(id: impl Into<String>, width_mm: f64, length_mm: f64, height_mm: f64, due_h: f64) -> Self {
        Self { id: id.into(), width_mm, length_mm, height_mm, due_h }
    }
}

/// A powder-bed printer. The build-plate area is always `width_mm * length_mm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineSpec {
    pub id: String,
    pub width_mm: f64,
    pub length_mm: f64,
    pub height_mm: f64,
    /// Hours per millimetre of build height, charged once per job on its tallest part.
    pub layer_time_h_per_mm: f64,
    /// Hours per cubic millimetre of printed material.
    pub volumetric_time_h_per_mm3: f64,
}

impl MachineSpec {
    pub fn new(
        id: impl Into<String>,
        width_mm: f64,
        length_mm: f64,
        height_mm: f64,
        layer_time_h_per_mm: f64,
        volumetric_time_h_per_mm3: f64,
    ) -> Self {
        Self {
            id: id.into(),
            width_mm,
            length_mm,
            height_mm,
            layer_time_h_per_mm,
            volumetric_time_h_per_mm3,
        }
    }

    pub fn area_mm2(&self) -> f64 {
        self.width_mm * self.length_mm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyCoefficients {
    pub earliness: f64,
    pub tardiness: f64,
}

impl Default for PenaltyCoefficients {
    fn default() -> Self {
        Self { earliness: 1.0, tardiness: 1.0 }
    }
}

/// The immutable universe every solve reads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemInstance {
    parts: Vec<Part>,
    machines: Vec<MachineSpec>,
    penalties: PenaltyCoefficients,
    jobs_per_machine: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{file}: record {record}, field `{field}`: {message}")]
    Field { file: String, record: usize, field: String, message: String },
    #[error("missing required field `{0}`")]
    MissingField(String),
    #[error("empty part set")]
    EmptyPartSet,
    #[error("empty machine set")]
    EmptyMachineSet,
    #[error("nonpositive dimension: {subject} {field} = {value}")]
    NonpositiveDimension { subject: String, field: &'static str, value: f64 },
    #[error("invalid value: {subject} {field} = {value}")]
    InvalidValue { subject: String, field: &'static str, value: f64 },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("jobs_per_machine must be at least 1")]
    ZeroJobs,
    #[error("i/o error: {0}")]
    Io(String),
}

fn check_positive(subject: &str, field: &'static str, value: f64) -> Result<(), InstanceError> {
    if !value.is_finite() {
        return Err(InstanceError::InvalidValue { subject: subject.to_string(), field, value });
    }
    if value <= 0.0 {
        return Err(InstanceError::NonpositiveDimension { subject: subject.to_string(), field, value });
    }
    Ok(())
}

fn check_nonnegative(subject: &str, field: &'static str, value: f64) -> Result<(), InstanceError> {
    if !value.is_finite() || value < 0.0 {
        return Err(InstanceError::InvalidValue { subject: subject.to_string(), field, value });
    }
    Ok(())
}

impl ProblemInstance {
    /// Builds an instance, checking field-level invariants. An empty part
    /// list is accepted here (the vacuous instance); the file parsers reject it.
    pub fn new(
        parts: Vec<Part>,
        machines: Vec<MachineSpec>,
        penalties: PenaltyCoefficients,
        jobs_per_machine: usize,
    ) -> Result<Self, InstanceError> {
        if machines.is_empty() {
            return Err(InstanceError::EmptyMachineSet);
        }
        if jobs_per_machine == 0 {
            return Err(InstanceError::ZeroJobs);
        }
        let mut seen = std::collections::HashSet::new();
        for p in &parts {
            let who = format!("part {}", p.id);
            check_positive(&who, "width_mm", p.width_mm)?;
            check_positive(&who, "length_mm", p.length_mm)?;
            check_positive(&who, "height_mm", p.height_mm)?;
            check_nonnegative(&who, "due_h", p.due_h)?;
            if !seen.insert(format!("p:{}", p.id)) {
                return Err(InstanceError::DuplicateId(p.id.clone()));
            }
        }
        for m in &machines {
            let who = format!("machine {}", m.id);
            check_positive(&who, "width_mm", m.width_mm)?;
            check_positive(&who, "length_mm", m.length_mm)?;
            check_positive(&who, "height_mm", m.height_mm)?;
            check_nonnegative(&who, "layer_time_h_per_mm", m.layer_time_h_per_mm)?;
            check_nonnegative(&who, "volumetric_time_h_per_mm3", m.volumetric_time_h_per_mm3)?;
            if !seen.insert(format!("m:{}", m.id)) {
                return Err(InstanceError::DuplicateId(m.id.clone()));
            }
        }
        check_nonnegative("penalties", "earliness", penalties.earliness)?;
        check_nonnegative("penalties", "tardiness", penalties.tardiness)?;
        Ok(Self { parts, machines, penalties, jobs_per_machine })
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn machines(&self) -> &[MachineSpec] {
        &self.machines
    }

    pub fn penalties(&self) -> PenaltyCoefficients {
        self.penalties
    }

    pub fn jobs_per_machine(&self) -> usize {
        self.jobs_per_machine
    }

    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    pub fn machine_count(&self) -> usize {
        self.machines.len()
    }

    /// True when every machine has the same dimensions and time coefficients.
    pub fn machines_identical(&self) -> bool {
        let first = &self.machines[0];
        self.machines.iter().all(|m| {
            m.width_mm == first.width_mm
                && m.length_mm == first.length_mm
                && m.height_mm == first.height_mm
                && m.layer_time_h_per_mm == first.layer_time_h_per_mm
                && m.volumetric_time_h_per_mm3 == first.volumetric_time_h_per_mm3
        })
    }

    pub fn with_jobs_per_machine(&self, jobs: usize) -> Result<Self, InstanceError> {
        Self::new(self.parts.clone(), self.machines.clone(), self.penalties, jobs)
    }

    pub fn with_penalties(&self, penalties: PenaltyCoefficients) -> Result<Self, InstanceError> {
        Self::new(self.parts.clone(), self.machines.clone(), penalties, self.jobs_per_machine)
    }

    pub fn with_machines(&self, machines: Vec<MachineSpec>) -> Result<Self, InstanceError> {
        Self::new(self.parts.clone(), machines, self.penalties, self.jobs_per_machine)
    }

    /// Keeps the first `n` parts. The job budget is left untouched.
    pub fn with_part_prefix(&self, n: usize) -> Result<Self, InstanceError> {
        let n = n.min(self.parts.len());
        Self::new(self.parts[..n].to_vec(), self.machines.clone(), self.penalties, self.jobs_per_machine)
    }

    /// Uses `count` machines: the first `count` if available, otherwise the
    /// existing list padded with copies of the first machine.
    pub fn with_machine_count(&self, count: usize) -> Result<Self, InstanceError> {
        let mut machines: Vec<MachineSpec> = self.machines.iter().take(count).cloned().collect();
        let template = self.machines[0].clone();
        while machines.len() < count {
            let mut m = template.clone();
            m.id = format!("{}-copy{}", template.id, machines.len() + 1);
            machines.push(m);
        }
        self.with_machines(machines)
    }

    /// Stable SHA-256 of the canonical JSON encoding, used in output provenance lines.
    pub fn content_hash(&self) -> String {
        let json = self.to_json();
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceDocument::from(self)).expect("instance serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDocument {
    machines: Vec<MachineSpec>,
    parts: Vec<Part>,
    #[serde(default)]
    penalties: Option<PenaltyCoefficients>,
    #[serde(default)]
    jobs_per_machine: Option<usize>,
}

impl From<&ProblemInstance> for InstanceDocument {
    fn from(inst: &ProblemInstance) -> Self {
        Self {
            machines: inst.machines.clone(),
            parts: inst.parts.clone(),
            penalties: Some(inst.penalties),
            jobs_per_machine: Some(inst.jobs_per_machine),
        }
    }
}

/// Input formats accepted by [`parse_instance`].
#[derive(Debug, Clone, Copy)]
pub enum Format<'a> {
    Json,
    /// The document passed to `parse_instance` is `parts.csv`; the machines
    /// table is supplied here.
    CsvPair { machines_csv: &'a str },
}

/// Parses an instance document. Missing `penalties` default to unit
/// coefficients and a missing `jobs_per_machine` defaults to the part count.
pub fn parse_instance(document: &str, format: Format<'_>) -> Result<ProblemInstance, InstanceError> {
    match format {
        Format::Json => parse_json(document),
        Format::CsvPair { machines_csv } => {
            let machines = parse_machines_csv(machines_csv)?;
            let parts = parse_parts_csv(document)?;
            finish(parts, machines, None, None)
        }
    }
}

pub fn parse_json(document: &str) -> Result<ProblemInstance, InstanceError> {
    let doc: InstanceDocument = serde_json::from_str(document).map_err(|e| {
        let message = e.to_string();
        if let Some(field) = message
            .strip_prefix("missing field `")
            .and_then(|rest| rest.split('`').next())
        {
            return InstanceError::MissingField(field.to_string());
        }
        InstanceError::Syntax { line: e.line(), column: e.column(), message }
    })?;
    finish(doc.parts, doc.machines, doc.penalties, doc.jobs_per_machine)
}

fn finish(
    parts: Vec<Part>,
    machines: Vec<MachineSpec>,
    penalties: Option<PenaltyCoefficients>,
    jobs: Option<usize>,
) -> Result<ProblemInstance, InstanceError> {
    if parts.is_empty() {
        return Err(InstanceError::EmptyPartSet);
    }
    let jobs = jobs.unwrap_or(parts.len());
    ProblemInstance::new(parts, machines, penalties.unwrap_or_default(), jobs)
}

/// Reads an instance file, choosing the format from the extension. A `.csv`
/// path is taken to be `parts.csv` with a sibling `machines.csv`.
pub fn load_instance(path: &std::path::Path) -> Result<ProblemInstance, InstanceError> {
    let read = |p: &std::path::Path| -> Result<String, InstanceError> {
        let mut s = String::new();
        std::fs::File::open(p)
            .and_then(|mut f| f.read_to_string(&mut s))
            .map_err(|e| InstanceError::Io(format!("{}: {e}", p.display())))?;
        Ok(s)
    };
    let is_csv = path.extension().map(|e| e.eq_ignore_ascii_case("csv")).unwrap_or(false);
    if is_csv {
        let machines_path = path.with_file_name("machines.csv");
        let machines = read(&machines_path)?;
        let parts = read(path)?;
        parse_instance(&parts, Format::CsvPair { machines_csv: &machines })
    } else {
        parse_json(&read(path)?)
    }
}

fn normalize_header(h: &str) -> String {
    h.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(|c| c.to_lowercase())
        .collect()
}

struct CsvTable {
    file: &'static str,
    headers: Vec<String>,
    records: Vec<csv::StringRecord>,
}

impl CsvTable {
    fn read(file: &'static str, text: &str) -> Result<Self, InstanceError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| csv_error(file, e))?
            .iter()
            .map(normalize_header)
            .collect();
        let records = reader
            .records()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| csv_error(file, e))?;
        Ok(Self { file, headers, records })
    }

    fn column(&self, names: &[&str]) -> Result<usize, InstanceError> {
        names
            .iter()
            .find_map(|n| {
                let n = normalize_header(n);
                self.headers.iter().position(|h| *h == n)
            })
            .ok_or_else(|| InstanceError::MissingField(format!("{}: {}", self.file, names[0])))
    }

    fn number(&self, record: usize, col: usize, field: &str) -> Result<f64, InstanceError> {
        let raw = self.text(record, col, field)?;
        raw.parse::<f64>().map_err(|_| InstanceError::Field {
            file: self.file.to_string(),
            record: record + 1,
            field: field.to_string(),
            message: format!("not a number: `{raw}`"),
        })
    }

    fn text(&self, record: usize, col: usize, field: &str) -> Result<&str, InstanceError> {
        self.records[record].get(col).ok_or_else(|| InstanceError::Field {
            file: self.file.to_string(),
            record: record + 1,
            field: field.to_string(),
            message: "missing value".into(),
        })
    }
}

fn csv_error(file: &str, e: csv::Error) -> InstanceError {
    match e.position() {
        Some(pos) => InstanceError::Syntax {
            line: pos.line() as usize,
            column: 0,
            message: format!("{file}: {e}"),
        },
        None => InstanceError::Io(format!("{file}: {e}")),
    }
}

const PART_HEADERS: [&str; 5] = ["Part", "Width (mm)", "Length (mm)", "Height (mm)", "Delivery Deadline (h)"];
const MACHINE_HEADERS: [&str; 4] = [
    "Machine",
    "Layer Production Time (h/mm)",
    "Volumetric Production Time (h/mm^3)",
    "Dimensions (h×w×l)",
];

fn parse_parts_csv(text: &str) -> Result<Vec<Part>, InstanceError> {
    let table = CsvTable::read("parts.csv", text)?;
    let id = table.column(&["Part", "id"])?;
    let w = table.column(&["Width (mm)", "width_mm"])?;
    let l = table.column(&["Length (mm)", "length_mm"])?;
    let h = table.column(&["Height (mm)", "height_mm"])?;
    let d = table.column(&["Delivery Deadline (h)", "due_h"])?;
    (0..table.records.len())
        .map(|r| {
            Ok(Part {
                id: table.text(r, id, PART_HEADERS[0])?.to_string(),
                width_mm: table.number(r, w, PART_HEADERS[1])?,
                length_mm: table.number(r, l, PART_HEADERS[2])?,
                height_mm: table.number(r, h, PART_HEADERS[3])?,
                due_h: table.number(r, d, PART_HEADERS[4])?,
            })
        })
        .collect()
}

fn parse_machines_csv(text: &str) -> Result<Vec<MachineSpec>, InstanceError> {
    let table = CsvTable::read("machines.csv", text)?;
    let id = table.column(&["Machine", "id"])?;
    let ht = table.column(&["Layer Production Time (h/mm)", "layer_time_h_per_mm"])?;
    let vt = table.column(&[
        "Volumetric Production Time (h/mm^3)",
        "Volumetric Production Time (h/mm3)",
        "volumetric_time_h_per_mm3",
    ])?;
    let dims = table.column(&["Dimensions (h×w×l)", "Dimensions (hxwxl)", "Dimensions"])?;
    (0..table.records.len())
        .map(|r| {
            let raw = table.text(r, dims, MACHINE_HEADERS[3])?;
            let values: Vec<&str> = raw.split(['×', 'x', 'X', '*']).map(str::trim).collect();
            let bad = || InstanceError::Field {
                file: table.file.to_string(),
                record: r + 1,
                field: MACHINE_HEADERS[3].to_string(),
                message: format!("expected `h × w × l`, got `{raw}`"),
            };
            if values.len() != 3 {
                return Err(bad());
            }
            let nums: Vec<f64> = values
                .iter()
                .map(|v| v.parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_, _>>()?;
            Ok(MachineSpec {
                id: table.text(r, id, MACHINE_HEADERS[0])?.to_string(),
                height_mm: nums[0],
                width_mm: nums[1],
                length_mm: nums[2],
                layer_time_h_per_mm: table.number(r, ht, MACHINE_HEADERS[1])?,
                volumetric_time_h_per_mm3: table.number(r, vt, MACHINE_HEADERS[2])?,
            })
        })
        .collect()
}

/// Writes the CSV pair (`machines.csv`, `parts.csv`) using the table headers.
pub fn to_csv_pair(instance: &ProblemInstance) -> (String, String) {
    let mut machines = csv::Writer::from_writer(Vec::new());
    machines.write_record(MACHINE_HEADERS).unwrap();
    for m in instance.machines() {
        machines
            .write_record([
                m.id.clone(),
                m.layer_time_h_per_mm.to_string(),
                m.volumetric_time_h_per_mm3.to_string(),
                format!("{} × {} × {}", m.height_mm, m.width_mm, m.length_mm),
            ])
            .unwrap();
    }
    let mut parts = csv::Writer::from_writer(Vec::new());
    parts.write_record(PART_HEADERS).unwrap();
    for p in instance.parts() {
        parts
            .write_record([
                p.id.clone(),
                p.width_mm.to_string(),
                p.length_mm.to_string(),
                p.height_mm.to_string(),
                p.due_h.to_string(),
            ])
            .unwrap();
    }
    (
        String::from_utf8(machines.into_inner().unwrap()).unwrap(),
        String::from_utf8(parts.into_inner().unwrap()).unwrap(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FindingCode {
    NoFeasibleOrientation,
    DegenerateTimeObjective,
    CapacityInsufficient,
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FindingCode::NoFeasibleOrientation => "no feasible orientation",
            FindingCode::DegenerateTimeObjective => "degenerate time objective",
            FindingCode::CapacityInsufficient => "capacity certainly insufficient",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub code: FindingCode,
    pub message: String,
    pub subject: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {} ({}): {}", e.code, e.subject, e.message)?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {} ({}): {}", w.code, w.subject, w.message)?;
        }
        Ok(())
    }
}

pub fn validate(instance: &ProblemInstance) -> ValidationReport {
    let mut report = ValidationReport::default();
    for part in instance.parts() {
        let placeable = instance
            .machines()
            .iter()
            .any(|m| !geometry::feasible_orientations(part, m).is_empty());
        if !placeable {
            report.errors.push(Finding {
                code: FindingCode::NoFeasibleOrientation,
                message: format!(
                    "part {} ({} × {} × {}) exceeds every machine in height or area in all orientations",
                    part.id, part.width_mm, part.length_mm, part.height_mm
                ),
                subject: part.id.clone(),
            });
        }
    }
    let pen = instance.penalties();
    if pen.earliness == 0.0 && pen.tardiness == 0.0 {
        report.warnings.push(Finding {
            code: FindingCode::DegenerateTimeObjective,
            message: "earliness and tardiness coefficients are both zero".into(),
            subject: "penalties".into(),
        });
    }
    let plate: f64 = instance.machines().iter().map(MachineSpec::area_mm2).sum::<f64>()
        * instance.jobs_per_machine() as f64;
    let needed: f64 = instance
        .parts()
        .iter()
        .map(|p| geometry::orientations(p).iter().map(|o| o.base_area_mm2).fold(f64::INFINITY, f64::min))
        .sum();
    if plate < needed {
        report.warnings.push(Finding {
            code: FindingCode::CapacityInsufficient,
            message: format!("total plate area {plate} mm² over all jobs is below the minimum footprint sum {needed} mm²"),
            subject: "instance".into(),
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;

    #[test]
    fn table2_json_parses() {
        let inst = datasets::table2();
        assert_eq!(inst.machine_count(), 2);
        assert_eq!(inst.part_count(), 9);
        for m in inst.machines() {
            assert_eq!(m.area_mm2(), 62500.0);
            assert_eq!(m.height_mm, 200.0);
            assert_eq!(m.layer_time_h_per_mm, 0.00006);
            assert_eq!(m.volumetric_time_h_per_mm3, 0.000003);
        }
        assert_eq!(inst.parts()[0].id, "1");
        assert_eq!(inst.parts()[8].due_h, 22.0);
    }

    #[test]
    fn empty_part_set_rejected() {
        let doc = r#"{"machines":[{"id":"1","width_mm":250,"length_mm":250,"height_mm":200,
            "layer_time_h_per_mm":0.00006,"volumetric_time_h_per_mm3":0.000003}],"parts":[]}"#;
        let err = parse_json(doc).unwrap_err();
        assert_eq!(err, InstanceError::EmptyPartSet);
        assert_eq!(err.to_string(), "empty part set");
    }

    #[test]
    fn negative_width_rejected() {
        let doc = r#"{"machines":[{"id":"1","width_mm":250,"length_mm":250,"height_mm":200,
            "layer_time_h_per_mm":0.00006,"volumetric_time_h_per_mm3":0.000003}],
            "parts":[{"id":"a","width_mm":-5,"length_mm":1,"height_mm":1,"due_h":1}]}"#;
        let err = parse_json(doc).unwrap_err();
        assert!(err.to_string().starts_with("nonpositive dimension"), "{err}");
    }

    #[test]
    fn syntax_error_has_locus() {
        let err = parse_json("{\n  \"machines\": [,]\n}").unwrap_err();
        match err {
            InstanceError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_field_named() {
        let doc = r#"{"machines":[{"id":"1","width_mm":250,"length_mm":250,"height_mm":200,
            "layer_time_h_per_mm":0.00006}],"parts":[{"id":"a","width_mm":1,"length_mm":1,"height_mm":1,"due_h":1}]}"#;
        assert_eq!(
            parse_json(doc).unwrap_err(),
            InstanceError::MissingField("volumetric_time_h_per_mm3".into())
        );
    }

    #[test]
    fn defaults_applied() {
        let doc = r#"{"machines":[{"id":"1","width_mm":10,"length_mm":10,"height_mm":10,
            "layer_time_h_per_mm":0,"volumetric_time_h_per_mm3":0}],
            "parts":[{"id":"a","width_mm":1,"length_mm":1,"height_mm":1,"due_h":1},
                     {"id":"b","width_mm":1,"length_mm":1,"height_mm":1,"due_h":1}]}"#;
        let inst = parse_json(doc).unwrap();
        assert_eq!(inst.jobs_per_machine(), 2);
        assert_eq!(inst.penalties(), PenaltyCoefficients { earliness: 1.0, tardiness: 1.0 });
    }

    #[test]
    fn csv_pair_matches_json() {
        let inst = datasets::table2();
        let (machines, parts) = to_csv_pair(&inst);
        assert!(machines.starts_with("Machine,Layer Production Time (h/mm)"));
        let back = parse_instance(&parts, Format::CsvPair { machines_csv: &machines }).unwrap();
        assert_eq!(back.parts(), inst.parts());
        assert_eq!(back.machines(), inst.machines());
    }

    #[test]
    fn csv_bad_number_reports_record() {
        let machines = "Machine,Layer Production Time (h/mm),Volumetric Production Time (h/mm^3),Dimensions (h×w×l)\n1,0.00006,0.000003,200 × 250 × 250\n";
        let parts = "Part,Width (mm),Length (mm),Height (mm),Delivery Deadline (h)\n1,5,1O0,14,24\n";
        let err = parse_instance(parts, Format::CsvPair { machines_csv: machines }).unwrap_err();
        match err {
            InstanceError::Field { record, field, .. } => {
                assert_eq!(record, 1);
                assert_eq!(field, "Length (mm)");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn table2_validates_clean() {
        let report = validate(&datasets::table2());
        assert!(report.errors.is_empty(), "{report}");
        assert!(report.warnings.is_empty(), "{report}");
    }

    #[test]
    fn oversized_part_flagged() {
        let inst = ProblemInstance::new(
            vec![Part::new("big", 190.0, 190.0, 180.0, 10.0)],
            vec![MachineSpec::new("small", 40.0, 100.0, 500.0, 0.0, 0.0)],
            PenaltyCoefficients::default(),
            1,
        )
        .unwrap();
        let report = validate(&inst);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].code, FindingCode::NoFeasibleOrientation);
        assert_eq!(report.errors[0].code.to_string(), "no feasible orientation");
        // min footprint 34200 > 4000 also trips the capacity warning
        assert!(report.warnings.iter().any(|w| w.code == FindingCode::CapacityInsufficient));
    }

    #[test]
    fn zero_penalties_warn() {
        let inst = datasets::table2()
            .with_penalties(PenaltyCoefficients { earliness: 0.0, tardiness: 0.0 })
            .unwrap();
        let report = validate(&inst);
        assert!(report.is_ok());
        assert_eq!(report.warnings[0].code.to_string(), "degenerate time objective");
    }

    #[test]
    fn machine_count_padding() {
        let inst = datasets::table2().with_machine_count(3).unwrap();
        assert_eq!(inst.machine_count(), 3);
        assert!(inst.machines_identical());
        let one = datasets::table2().with_machine_count(1).unwrap();
        assert_eq!(one.machines()[0].id, "1");
    }
}
