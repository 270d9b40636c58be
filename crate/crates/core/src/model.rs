//! Shared domain types and semester configuration.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

id_newtype!(StudentId);
id_newtype!(ProposalId);
id_newtype!(OrgId);
id_newtype!(AdvisorId);
id_newtype!(
    /// Academic program code, e.g. `EC` or `CS`.
    Program
);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramDef {
    pub code: Program,
    pub name: String,
}

pub fn default_programs() -> Vec<ProgramDef> {
    [
        ("EC", "Computer Engineering"),
        ("EX", "Mechatronics Engineering"),
        ("EM", "Mechanical Engineering"),
        ("CS", "Computer Science"),
    ]
    .into_iter()
    .map(|(code, name)| ProgramDef {
        code: Program::new(code),
        name: name.to_owned(),
    })
    .collect()
}

/// The fixed table of interest areas students tick and proposals declare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterestArea {
    ComputationalSimulation,
    IndustrialAutomation,
    EmbeddedSystems,
    DataScience,
    SocialInnovation,
    InteractiveSystems,
    InformationSystems,
    Bioengineering,
    MobilityEngineering,
    DynamicSystemsControl,
    AdvancedManufacturing,
    AdministrationEconomicsFinance,
    EnergyEfficiency,
    Robotics,
    CloudComputing,
}

impl InterestArea {
    pub const ALL: [InterestArea; 15] = [
        InterestArea::ComputationalSimulation,
        InterestArea::IndustrialAutomation,
        InterestArea::EmbeddedSystems,
        InterestArea::DataScience,
        InterestArea::SocialInnovation,
        InterestArea::InteractiveSystems,
        InterestArea::InformationSystems,
        InterestArea::Bioengineering,
        InterestArea::MobilityEngineering,
        InterestArea::DynamicSystemsControl,
        InterestArea::AdvancedManufacturing,
        InterestArea::AdministrationEconomicsFinance,
        InterestArea::EnergyEfficiency,
        InterestArea::Robotics,
        InterestArea::CloudComputing,
    ];

    pub fn label(self) -> &'static str {
        match self {
            InterestArea::ComputationalSimulation => "Computational Simulation",
            InterestArea::IndustrialAutomation => "Industrial Automation",
            InterestArea::EmbeddedSystems => "Embedded Systems",
            InterestArea::DataScience => "Data Science",
            InterestArea::SocialInnovation => "Social Innovation",
            InterestArea::InteractiveSystems => "Interactive Systems",
            InterestArea::InformationSystems => "Information Systems",
            InterestArea::Bioengineering => "Bioengineering",
            InterestArea::MobilityEngineering => "Mobility Engineering",
            InterestArea::DynamicSystemsControl => "Dynamic Systems Control",
            InterestArea::AdvancedManufacturing => "Advanced Manufacturing",
            InterestArea::AdministrationEconomicsFinance => {
                "Administration, Economics, and Finance"
            }
            InterestArea::EnergyEfficiency => "Energy Efficiency",
            InterestArea::Robotics => "Robotics",
            InterestArea::CloudComputing => "Cloud Computing",
        }
    }

    /// Accepts either the snake_case key or the display label (case-insensitive).
    pub fn parse(s: &str) -> Option<InterestArea> {
        let t = s.trim();
        Self::ALL.into_iter().find(|a| {
            a.label().eq_ignore_ascii_case(t)
                || serde_json::to_value(a)
                    .ok()
                    .and_then(|v| v.as_str().map(|k| k.eq_ignore_ascii_case(t)))
                    .unwrap_or(false)
        })
    }
}

impl fmt::Display for InterestArea {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Objective weights for group formation. All must be non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightSet {
    pub w_rank: f64,
    pub w_size: f64,
    pub w_gpa: f64,
    pub w_interest: f64,
    pub w_seat: f64,
    pub unlisted_rank_penalty: f64,
}

impl Default for WeightSet {
    fn default() -> Self {
        WeightSet {
            w_rank: 1.0,
            w_size: 3.0,
            w_gpa: 2.0,
            w_interest: 2.0,
            w_seat: 5.0,
            unlisted_rank_penalty: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SemesterConfig {
    pub team_size_max: usize,
    pub team_size_min: usize,
    pub min_ballot_choices: usize,
    pub weekly_hours: u32,
    pub total_hours: u32,
    pub advisor_weekly_hours: u32,
    pub gpa_scale_max: f64,
    pub objective_weights: WeightSet,
    pub rng_seed: u64,
    pub programs: Vec<ProgramDef>,
}

impl Default for SemesterConfig {
    fn default() -> Self {
        SemesterConfig {
            team_size_max: 4,
            team_size_min: 3,
            min_ballot_choices: 5,
            weekly_hours: 24,
            total_hours: 360,
            advisor_weekly_hours: 2,
            gpa_scale_max: 10.0,
            objective_weights: WeightSet::default(),
            rng_seed: 0,
            programs: default_programs(),
        }
    }
}

impl SemesterConfig {
    pub fn has_program(&self, code: &Program) -> bool {
        self.programs.iter().any(|p| &p.code == code)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_config(config: &SemesterConfig) -> ValidationReport {
    let mut v = Vec::new();
    if config.team_size_min < 1 {
        v.push("team_size_min must be at least 1".to_owned());
    }
    if config.team_size_min > config.team_size_max {
        v.push(format!(
            "team_size_min {} exceeds team_size_max {} (min exceeds max)",
            config.team_size_min, config.team_size_max
        ));
    }
    if config.team_size_max > 64 {
        v.push(format!(
            "team_size_max {} above supported 64",
            config.team_size_max
        ));
    }
    if config.min_ballot_choices < 1 {
        v.push("min_ballot_choices must be at least 1".to_owned());
    }
    if !(config.gpa_scale_max.is_finite() && config.gpa_scale_max > 0.0) {
        v.push(format!(
            "gpa_scale_max must be positive, got {}",
            config.gpa_scale_max
        ));
    }
    let w = &config.objective_weights;
    for (name, value) in [
        ("w_rank", w.w_rank),
        ("w_size", w.w_size),
        ("w_gpa", w.w_gpa),
        ("w_interest", w.w_interest),
        ("w_seat", w.w_seat),
        ("unlisted_rank_penalty", w.unlisted_rank_penalty),
    ] {
        if !(value.is_finite() && value >= 0.0) {
            v.push(format!(
                "weight {name} must be a non-negative number, got {value}"
            ));
        }
    }
    if config.programs.is_empty() {
        v.push("at least one program must be defined".to_owned());
    }
    let mut seen = BTreeSet::new();
    for p in &config.programs {
        if p.code.as_str().trim().is_empty() {
            v.push("program code must be nonempty".to_owned());
        }
        if !seen.insert(&p.code) {
            v.push(format!("program code {} defined twice", p.code));
        }
    }
    ValidationReport { violations: v }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperienceKind {
    Job,
    Internship,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperienceStatus {
    Past,
    Current,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperienceEntry {
    pub organization: String,
    pub kind: ExperienceKind,
    pub status: ExperienceStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Student {
    pub id: StudentId,
    pub name: String,
    pub program: Program,
    pub gpa: f64,
    #[serde(default)]
    pub interests: BTreeSet<InterestArea>,
    #[serde(default)]
    pub other_interest: Option<String>,
    #[serde(default)]
    pub work_history: Vec<ExperienceEntry>,
    #[serde(default)]
    pub family_ties: Vec<String>,
    #[serde(default)]
    pub extracurriculars: Vec<String>,
    #[serde(default)]
    pub social_activities: Vec<String>,
    #[serde(default)]
    pub linkedin: Option<String>,
}

impl Student {
    /// Minimal record; the remaining fields start empty.
    pub fn new(id: impl Into<String>, program: &str, gpa: f64) -> Student {
        let id = id.into();
        Student {
            name: id.clone(),
            id: StudentId(id),
            program: Program::new(program),
            gpa,
            interests: BTreeSet::new(),
            other_interest: None,
            work_history: Vec::new(),
            family_ties: Vec::new(),
            extracurriculars: Vec::new(),
            social_activities: Vec::new(),
            linkedin: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrgCategory {
    Company,
    ResearchCenter,
    TechOrg,
    Ngo,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Organization {
    pub id: OrgId,
    pub name: String,
    pub category: OrgCategory,
}

/// Trim, collapse internal whitespace and case-fold.
pub fn normalize_org_name(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}
