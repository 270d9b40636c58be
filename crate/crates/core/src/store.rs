//! Snapshot persistence, canonical JSON, allocation export and CSV import.
//!
//! A semester lives in one JSON file. Output is canonical: object keys are
//! sorted and every collection is an ordered map or a sorted list, so equal
//! states serialize to equal bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::advisors::{Advisor, AdvisorMap};
use crate::allocator::{Allocation, AllocationFlag, ConflictFlag, MoveRecord, ObjectiveBreakdown};
use crate::ballots::Ballot;
use crate::error::{Error, Result};
use crate::intake::{check_student, Proposal};
use crate::model::{
    validate_config, AdvisorId, ExperienceEntry, ExperienceKind, ExperienceStatus, InterestArea,
    OrgId, Organization, Program, ProposalId, SemesterConfig, Student, StudentId,
};
use crate::surveys::SurveyStore;
use crate::workflow::{Phase, PhaseSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemesterSnapshot {
    pub version: u64,
    pub phase: Phase,
    pub config: SemesterConfig,
    #[serde(default)]
    pub schedule: PhaseSchedule,
    #[serde(default)]
    pub students: BTreeMap<StudentId, Student>,
    #[serde(default)]
    pub organizations: BTreeMap<OrgId, Organization>,
    #[serde(default)]
    pub proposals: BTreeMap<ProposalId, Proposal>,
    #[serde(default)]
    pub ballots: BTreeMap<StudentId, Ballot>,
    #[serde(default)]
    pub advisors: BTreeMap<AdvisorId, Advisor>,
    #[serde(default)]
    pub allocation: Option<Allocation>,
    #[serde(default)]
    pub advisor_map: Option<AdvisorMap>,
    #[serde(default)]
    pub surveys: SurveyStore,
}

impl SemesterSnapshot {
    pub fn new(config: SemesterConfig) -> Self {
        SemesterSnapshot {
            version: 0,
            phase: Phase::InterestCollection,
            config,
            schedule: PhaseSchedule::default(),
            students: BTreeMap::new(),
            organizations: BTreeMap::new(),
            proposals: BTreeMap::new(),
            ballots: BTreeMap::new(),
            advisors: BTreeMap::new(),
            allocation: None,
            advisor_map: None,
            surveys: SurveyStore::default(),
        }
    }

    /// Referential integrity across every collection.
    pub fn validate(&self) -> Result<()> {
        let report = validate_config(&self.config);
        if !report.is_valid() {
            return Err(Error::Integrity(format!(
                "config: {}",
                report.violations.join("; ")
            )));
        }
        self.schedule.validate()?;
        let bad = |m: String| Err(Error::Integrity(m));
        for (k, s) in &self.students {
            if k != &s.id {
                return bad(format!("student key {k} holds record {}", s.id));
            }
            check_student(s, &self.config)
                .map_err(|e| Error::Integrity(format!("student {k}: {e}")))?;
        }
        for (k, o) in &self.organizations {
            if k != &o.id {
                return bad(format!("organization key {k} holds record {}", o.id));
            }
        }
        for (k, p) in &self.proposals {
            if k != &p.id {
                return bad(format!("proposal key {k} holds record {}", p.id));
            }
            if !self.organizations.contains_key(&p.form.org_id) {
                return bad(format!(
                    "proposal {k} names unknown organization {}",
                    p.form.org_id
                ));
            }
            if p.is_approved()
                && !(p.checklist.as_ref().is_some_and(|c| c.passes()) && p.seat_profile.is_some())
            {
                return bad(format!(
                    "proposal {k} is approved without a passing checklist and seat profile"
                ));
            }
        }
        for (k, b) in &self.ballots {
            if k != &b.student_id {
                return bad(format!("ballot key {k} holds ballot of {}", b.student_id));
            }
            if !self.students.contains_key(k) {
                return bad(format!("ballot of unknown student {k}"));
            }
            if let Some(c) = b.choices.iter().find(|c| !self.proposals.contains_key(c)) {
                return bad(format!("ballot of {k} references unknown proposal {c}"));
            }
        }
        for (k, a) in &self.advisors {
            if k != &a.id {
                return bad(format!("advisor key {k} holds record {}", a.id));
            }
        }
        if let Some(alloc) = &self.allocation {
            let mut seen = BTreeSet::new();
            for (p, members) in &alloc.groups {
                if !self.proposals.contains_key(p) {
                    return bad(format!("allocation group for unknown proposal {p}"));
                }
                for s in members.iter().chain([].iter()) {
                    if !seen.insert(s) {
                        return bad(format!("student {s} appears twice in allocation"));
                    }
                }
            }
            for s in &alloc.unassigned {
                if !seen.insert(s) {
                    return bad(format!("student {s} appears twice in allocation"));
                }
            }
            if let Some(s) = seen.iter().find(|s| !self.students.contains_key(s)) {
                return bad(format!("allocation names unknown student {s}"));
            }
        }
        if let Some(map) = &self.advisor_map {
            for (g, a) in map {
                if !self.proposals.contains_key(g) {
                    return bad(format!("advisor map names unknown group {g}"));
                }
                if !self.advisors.contains_key(a) {
                    return bad(format!("advisor map names unknown advisor {a}"));
                }
            }
        }
        for s in self.surveys.partner.values() {
            if !self.proposals.contains_key(&s.proposal_id)
                || !self.organizations.contains_key(&s.org_id)
            {
                return bad(format!(
                    "partner survey for unknown proposal {}",
                    s.proposal_id
                ));
            }
        }
        for s in self.surveys.student.values() {
            if !self.students.contains_key(&s.student_id)
                || !self.proposals.contains_key(&s.proposal_id)
            {
                return bad(format!(
                    "student survey from unknown student {}",
                    s.student_id
                ));
            }
        }
        Ok(())
    }
}

/// Pretty JSON with sorted object keys and a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json::Map is ordered by key unless `preserve_order` is enabled
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<SemesterSnapshot> {
    let snapshot: SemesterSnapshot = serde_json::from_str(text)?;
    snapshot.validate()?;
    Ok(snapshot)
}

pub fn load(path: impl AsRef<Path>) -> Result<SemesterSnapshot> {
    from_json(&fs::read_to_string(path)?)
}

/// Writes the snapshot, refusing to overwrite a file holding a newer version.
pub fn save(snapshot: &SemesterSnapshot, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if path.exists() {
        let existing: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
        let found = existing
            .get("version")
            .and_then(|v| v.as_u64())
            .unwrap_or(0);
        if found > snapshot.version {
            return Err(Error::VersionConflict {
                expected: snapshot.version,
                found,
            });
        }
    }
    let text = to_canonical_json(snapshot)?;
    let tmp = path.with_extension("json.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationExport {
    pub groups: BTreeMap<ProposalId, BTreeSet<StudentId>>,
    pub unassigned: BTreeSet<StudentId>,
    pub provenance: BTreeMap<StudentId, Vec<MoveRecord>>,
    pub objective: ObjectiveBreakdown,
    pub conflicts: Vec<ConflictFlag>,
    pub flags: Vec<AllocationFlag>,
    pub finalized: bool,
    pub advisors: Option<AdvisorMap>,
}

pub fn export_allocation(snapshot: &SemesterSnapshot) -> Result<String> {
    let a = snapshot.allocation.as_ref().ok_or(Error::NoAllocation)?;
    to_canonical_json(&AllocationExport {
        groups: a.groups.clone(),
        unassigned: a.unassigned.clone(),
        provenance: a.provenance.clone(),
        objective: a.objective,
        conflicts: a.conflicts.clone(),
        flags: a.flags.clone(),
        finalized: a.finalized,
        advisors: snapshot.advisor_map.clone(),
    })
}

/// Column reference for student CSV import. List cells use `;` between
/// items; work history items are `organization|job or internship|past or current`.
pub const STUDENT_CSV_COLUMNS: [&str; 11] = [
    "id",
    "name",
    "program",
    "gpa",
    "interests",
    "other_interest",
    "work_history",
    "family_ties",
    "extracurriculars",
    "social_activities",
    "linkedin",
];

pub const STUDENT_CSV_REQUIRED: [&str; 4] = ["id", "name", "program", "gpa"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImportMode {
    /// Keep valid rows and report the rest.
    #[default]
    Permissive,
    /// Any row error discards every row.
    AllOrNothing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvImport {
    pub students: Vec<Student>,
    pub errors: Vec<RowError>,
}

fn split_list(cell: &str) -> impl Iterator<Item = &str> {
    cell.split(';').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_experience(item: &str) -> std::result::Result<ExperienceEntry, String> {
    let parts: Vec<&str> = item.split('|').map(str::trim).collect();
    let [org, kind, status] = parts[..] else {
        return Err(format!(
            "work history item {item:?} is not organization|kind|status"
        ));
    };
    let kind = match kind.to_ascii_lowercase().as_str() {
        "job" => ExperienceKind::Job,
        "internship" => ExperienceKind::Internship,
        other => return Err(format!("unknown experience kind {other:?}")),
    };
    let status = match status.to_ascii_lowercase().as_str() {
        "past" => ExperienceStatus::Past,
        "current" => ExperienceStatus::Current,
        other => return Err(format!("unknown experience status {other:?}")),
    };
    Ok(ExperienceEntry {
        organization: org.to_owned(),
        kind,
        status,
    })
}

fn optional(cell: Option<&str>) -> Option<String> {
    cell.map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
}

pub fn import_students_csv<R: Read>(
    reader: R,
    config: &SemesterConfig,
    mode: ImportMode,
) -> Result<CsvImport> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col: BTreeMap<&str, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim(), i))
        .collect();
    let missing: Vec<&str> = STUDENT_CSV_REQUIRED
        .iter()
        .copied()
        .filter(|c| !col.contains_key(c))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Invalid(format!(
            "missing mandatory columns: {}",
            missing.join(", ")
        )));
    }

    let mut students = Vec::new();
    let mut errors = Vec::new();
    let mut seen = BTreeSet::new();
    for rec in rdr.records() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                errors.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = rec.position().map_or(0, |p| p.line());
        let cell = |name: &str| col.get(name).and_then(|&i| rec.get(i));
        let row = || -> std::result::Result<Student, String> {
            let gpa_text = cell("gpa").unwrap_or("").trim();
            let gpa: f64 = gpa_text
                .parse()
                .map_err(|_| format!("gpa {gpa_text:?} is not a number"))?;
            let mut interests = BTreeSet::new();
            for item in split_list(cell("interests").unwrap_or("")) {
                interests.insert(
                    InterestArea::parse(item)
                        .ok_or_else(|| format!("unknown interest area {item:?}"))?,
                );
            }
            let work_history = split_list(cell("work_history").unwrap_or(""))
                .map(parse_experience)
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let list = |name: &str| {
                split_list(cell(name).unwrap_or(""))
                    .map(str::to_owned)
                    .collect::<Vec<_>>()
            };
            let student = Student {
                id: StudentId::new(cell("id").unwrap_or("").trim()),
                name: cell("name").unwrap_or("").trim().to_owned(),
                program: Program::new(cell("program").unwrap_or("").trim()),
                gpa,
                interests,
                other_interest: optional(cell("other_interest")),
                work_history,
                family_ties: list("family_ties"),
                extracurriculars: list("extracurriculars"),
                social_activities: list("social_activities"),
                linkedin: optional(cell("linkedin")),
            };
            check_student(&student, config).map_err(|e| e.to_string())?;
            Ok(student)
        };
        match row() {
            Ok(s) if !seen.insert(s.id.clone()) => errors.push(RowError {
                line,
                message: format!("duplicate id {}", s.id),
            }),
            Ok(s) => students.push(s),
            Err(message) => errors.push(RowError { line, message }),
        }
    }
    if mode == ImportMode::AllOrNothing && !errors.is_empty() {
        students.clear();
    }
    Ok(CsvImport { students, errors })
}
