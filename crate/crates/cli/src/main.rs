//! `capstone`: batch front end for semester snapshots.

use std::fmt::Write as _;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use capstone_core::allocator::{exact_allocate, Allocation, ExactLimits};
use capstone_core::balance::{BalanceReport, ProgramBalance};
use capstone_core::model::{ProposalId, StudentId};
use capstone_core::store::{
    self, export_allocation, import_students_csv, to_canonical_json, ImportMode,
};
use capstone_core::{Error, Semester};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "capstone", version, about = "Capstone semester management")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check schema and referential integrity.
    Validate { snapshot: PathBuf },
    /// Supply and demand of seats per academic program.
    Balance {
        snapshot: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Ballot counts per approved proposal.
    Demand {
        snapshot: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run group formation on the current ballots.
    Allocate {
        snapshot: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Store the result in the snapshot file.
        #[arg(long)]
        write: bool,
        #[arg(long)]
        json: bool,
    },
    /// Preview moving one student against the stored allocation.
    Whatif {
        snapshot: PathBuf,
        #[arg(long)]
        student: String,
        /// Target proposal.
        #[arg(long, required_unless_present = "unassign")]
        to: Option<String>,
        /// Preview taking the student out of every group instead.
        #[arg(long, conflicts_with = "to")]
        unassign: bool,
    },
    /// Compare the heuristic with the exact optimum (small cohorts only).
    Oracle {
        snapshot: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write the canonical allocation export.
    Export {
        snapshot: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Import students from CSV.
    Import {
        snapshot: PathBuf,
        csv: PathBuf,
        /// Reject the whole file when any row is invalid.
        #[arg(long)]
        all_or_nothing: bool,
        #[arg(long)]
        write: bool,
    },
    /// Serve the HTTP API.
    Serve {
        snapshot: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
}

fn open(path: &Path) -> Result<Semester, Error> {
    Semester::from_snapshot(store::load(path)?)
}

fn ratio(r: Option<f64>) -> String {
    r.map_or_else(|| "n/a".to_owned(), |r| format!("{:.1}%", r * 100.0))
}

fn balance_table(report: &BalanceReport) -> String {
    let mut out = format!(
        "{:<8} {:>8} {:>18} {:>14} {:>9}\n",
        "program", "enrolled", "necessary projects", "supplied seats", "coverage"
    );
    let row = |out: &mut String, name: &str, b: &ProgramBalance| {
        let _ = writeln!(
            out,
            "{:<8} {:>8} {:>18} {:>14} {:>9}",
            name,
            b.enrolled_students,
            b.necessary_projects,
            b.supplied_seats,
            ratio(b.coverage_ratio)
        );
    };
    for (program, b) in &report.per_program {
        row(&mut out, program.as_str(), b);
    }
    row(&mut out, "total", &report.total);
    let _ = writeln!(
        out,
        "\nstudents: {}, necessary projects: {}, supplied seats: {}",
        report.total.enrolled_students,
        report.total.necessary_projects,
        report.total.supplied_seats
    );
    out
}

fn allocation_table(a: &Allocation) -> String {
    let mut out = String::new();
    for (p, members) in &a.groups {
        let names: Vec<&str> = members.iter().map(StudentId::as_str).collect();
        let _ = writeln!(
            out,
            "{:<10} {:>2}  {}",
            p.as_str(),
            members.len(),
            names.join(" ")
        );
    }
    if !a.unassigned.is_empty() {
        let names: Vec<&str> = a.unassigned.iter().map(StudentId::as_str).collect();
        let _ = writeln!(
            out,
            "{:<10} {:>2}  {}",
            "unassigned",
            a.unassigned.len(),
            names.join(" ")
        );
    }
    let o = &a.objective;
    let _ = writeln!(
        out,
        "\nobjective {:.4} (rank {:.4}, size {:.4}, gpa spread {:.4}, interest {:.4}, seats {:.4})",
        o.total, o.rank_cost, o.size_cost, o.gpa_spread_cost, o.interest_cost, o.seat_cost
    );
    for f in &a.flags {
        let _ = writeln!(out, "flag: {}", f.message);
    }
    for c in &a.conflicts {
        let _ = writeln!(
            out,
            "conflict: {} with {} ({:?}, {:?}, {})",
            c.student_id, c.proposal_id, c.kind, c.status, c.matched_org
        );
    }
    out
}

fn run(cli: Cli) -> Result<String, Error> {
    match cli.command {
        Command::Validate { snapshot } => {
            let sem = open(&snapshot)?;
            let s = sem.snapshot();
            Ok(format!(
                "valid: version {}, phase {:?}, {} students, {} proposals, {} ballots\n",
                s.version,
                s.phase,
                s.students.len(),
                s.proposals.len(),
                s.ballots.len()
            ))
        }
        Command::Balance { snapshot, json } => {
            let report = open(&snapshot)?.balance();
            if json {
                to_canonical_json(&report)
            } else {
                Ok(balance_table(&report))
            }
        }
        Command::Demand { snapshot, json } => {
            let stats = open(&snapshot)?.demand();
            if json {
                return to_canonical_json(&stats);
            }
            let mut out = format!(
                "{:<10} {:>6} {:>6} {:>8}\n",
                "proposal", "first", "top3", "mentions"
            );
            for d in &stats {
                let _ = writeln!(
                    out,
                    "{:<10} {:>6} {:>6} {:>8}",
                    d.proposal_id.as_str(),
                    d.first_choice_count,
                    d.top3_count,
                    d.total_mentions
                );
            }
            Ok(out)
        }
        Command::Allocate {
            snapshot,
            seed,
            write,
            json,
        } => {
            let mut sem = open(&snapshot)?;
            let a = sem.allocate(seed)?;
            if write {
                store::save(sem.snapshot(), &snapshot)?;
            }
            if json {
                to_canonical_json(&a)
            } else {
                Ok(allocation_table(&a))
            }
        }
        Command::Whatif {
            snapshot,
            student,
            to,
            unassign: _,
        } => {
            let sem = open(&snapshot)?;
            let target = to.map(ProposalId);
            let preview = sem.what_if(&StudentId(student), target.as_ref())?;
            to_canonical_json(&preview)
        }
        Command::Oracle { snapshot, json } => {
            let sem = open(&snapshot)?;
            let instance = sem.instance();
            let exact = exact_allocate(&instance, sem.config(), ExactLimits::default())?;
            let heuristic = capstone_core::allocator::allocate(&instance, sem.config())?;
            let h = heuristic.objective.total;
            let ratio = if exact.cost > 0.0 {
                h / exact.cost
            } else {
                1.0
            };
            if json {
                return to_canonical_json(&serde_json::json!({
                    "exact_cost": exact.cost,
                    "heuristic_cost": h,
                    "ratio": ratio,
                    "nodes": exact.nodes,
                    "exact": exact.allocation,
                }));
            }
            Ok(format!(
                "exact cost {:.4}\nheuristic cost {h:.4}\nratio {ratio:.4}\nnodes {}\n\n{}",
                exact.cost,
                exact.nodes,
                allocation_table(&exact.allocation)
            ))
        }
        Command::Export { snapshot, out } => {
            let text = export_allocation(&store::load(&snapshot)?)?;
            fs::write(&out, text)?;
            Ok(format!("wrote {}\n", out.display()))
        }
        Command::Import {
            snapshot,
            csv,
            all_or_nothing,
            write,
        } => {
            let mut sem = open(&snapshot)?;
            let mode = if all_or_nothing {
                ImportMode::AllOrNothing
            } else {
                ImportMode::Permissive
            };
            let report = import_students_csv(fs::File::open(&csv)?, sem.config(), mode)?;
            let mut out = String::new();
            let mut added = 0;
            for s in report.students {
                let id = s.id.clone();
                match sem.register_student(s) {
                    Ok(_) => added += 1,
                    Err(e) => {
                        let _ = writeln!(out, "{id}: {e}");
                    }
                }
            }
            for e in &report.errors {
                let _ = writeln!(out, "line {}: {}", e.line, e.message);
            }
            let _ = writeln!(
                out,
                "imported {added} students, {} row errors",
                report.errors.len()
            );
            if write {
                store::save(sem.snapshot(), &snapshot)?;
            }
            Ok(out)
        }
        Command::Serve { .. } => unreachable!("handled in main"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Serve { snapshot, bind } = &cli.command {
        let rt = match tokio::runtime::Runtime::new() {
            Ok(rt) => rt,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        };
        eprintln!("serving {} on http://{bind}", snapshot.display());
        return match rt.block_on(capstone_api::serve(snapshot, *bind)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        };
    }
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
