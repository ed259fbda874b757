//! Reads solution files written by an external MILP solver.
//!
//! Format: a header line `STATUS objective` (status one of OPTIMAL, FEASIBLE,
//! INFEASIBLE, TIMELIMIT; the objective may be left out for the last two
//! when there is no incumbent), then one whitespace-separated `name value` pair per
//! line using the column names of the LP export. Blank lines and lines
//! starting with `#` are ignored. Columns not mentioned are taken as 0.
//!
//! [`ExternalSolver`] runs a command as `CMD LP_PATH SOL_PATH --time-limit S
//! --gap G --threads N` and reads back the file it wrote; the bundled
//! `scripts/highs_solve.py` follows this protocol.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use thiserror::Error;

use super::bnb::{MilpSolution, MilpStatus};
use crate::model::{write_lp, MilpModel};

/// Environment variable naming the external solver command line.
pub const EXTERNAL_CMD_ENV: &str = "PRINTPLAN_EXTERNAL_CMD";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExternalError {
    #[error("missing header")]
    MissingHeader,
    #[error("line {line}: unknown status token {token:?}")]
    BadStatus { line: usize, token: String },
    #[error("line {line}: unknown variable {name:?}")]
    UnknownVariable { line: usize, name: String },
    #[error("line {line}: unparsable number {text:?}")]
    BadNumber { line: usize, text: String },
    #[error("line {line}: expected `name value`")]
    Malformed { line: usize },
    #[error("external solver i/o: {0}")]
    Io(String),
    #[error("external solver `{command}` failed ({status}): {stderr}")]
    Command { command: String, status: String, stderr: String },
}

#[derive(Debug, Clone)]
pub struct ExternalSolver {
    /// Program followed by its leading arguments.
    pub command: Vec<String>,
    pub time_limit_s: f64,
    pub gap: f64,
    pub threads: usize,
    /// Keeps the exchanged files here instead of a temporary directory.
    pub workdir: Option<PathBuf>,
}

impl ExternalSolver {
    /// Splits `command_line` on whitespace.
    pub fn new(command_line: &str) -> Self {
        Self {
            command: command_line.split_whitespace().map(str::to_string).collect(),
            time_limit_s: 600.0,
            gap: 1e-9,
            threads: 1,
            workdir: None,
        }
    }

    /// The command from [`EXTERNAL_CMD_ENV`], else the bundled HiGHS script.
    pub fn from_env() -> Self {
        match std::env::var(EXTERNAL_CMD_ENV) {
            Ok(cmd) if !cmd.trim().is_empty() => Self::new(&cmd),
            _ => Self::new(&format!("python3 {}/scripts/highs_solve.py", env!("CARGO_MANIFEST_DIR"))),
        }
    }

    pub fn solve(&self, model: &MilpModel) -> Result<MilpSolution, ExternalError> {
        let io = |e: std::io::Error| ExternalError::Io(e.to_string());
        let (program, args) = self.command.split_first().ok_or_else(|| ExternalError::Io("empty command".into()))?;
        let tmp;
        let dir = match &self.workdir {
            Some(d) => {
                std::fs::create_dir_all(d).map_err(io)?;
                d.clone()
            }
            None => {
                tmp = tempfile::tempdir().map_err(io)?;
                tmp.path().to_path_buf()
            }
        };
        let lp_path = dir.join("model.lp");
        let sol_path = dir.join("model.sol");
        std::fs::write(&lp_path, write_lp(model)).map_err(io)?;
        let _ = std::fs::remove_file(&sol_path);
        let start = Instant::now();
        let out = Command::new(program)
            .args(args)
            .arg(&lp_path)
            .arg(&sol_path)
            .args(["--time-limit", &self.time_limit_s.to_string()])
            .args(["--gap", &self.gap.to_string()])
            .args(["--threads", &self.threads.to_string()])
            .output()
            .map_err(io)?;
        if !out.status.success() {
            return Err(ExternalError::Command {
                command: self.command.join(" "),
                status: out.status.to_string(),
                stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
            });
        }
        let text = std::fs::read_to_string(&sol_path).map_err(io)?;
        let mut sol = parse_external_solution(&text, model)?;
        sol.wall_time = start.elapsed();
        Ok(sol)
    }
}

fn number(line: usize, text: &str) -> Result<f64, ExternalError> {
    text.parse::<f64>()
        .ok()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| ExternalError::BadNumber { line, text: text.to_string() })
}

pub fn parse_external_solution(text: &str, model: &MilpModel) -> Result<MilpSolution, ExternalError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(ExternalError::MissingHeader)?;
    let mut head = header.split_whitespace();
    let token = head.next().ok_or(ExternalError::MissingHeader)?;
    let status =
        MilpStatus::parse(token).ok_or_else(|| ExternalError::BadStatus { line: hline, token: token.to_string() })?;
    let objective = match head.next() {
        Some(t) => number(hline, t)?,
        // no incumbent to report
        None if matches!(status, MilpStatus::Infeasible | MilpStatus::TimeLimit) => f64::NAN,
        None => return Err(ExternalError::Malformed { line: hline }),
    };

    let reg = &model.registry;
    let mut values = vec![0.0; reg.len()];
    let mut seen = false;
    for (line, l) in lines {
        let mut it = l.split_whitespace();
        let (Some(name), Some(v), None) = (it.next(), it.next(), it.next()) else {
            return Err(ExternalError::Malformed { line });
        };
        let k = reg.lookup(name).ok_or_else(|| ExternalError::UnknownVariable { line, name: name.to_string() })?;
        values[k] = number(line, v)?;
        seen = true;
    }
    if objective.is_nan() && !seen {
        values.clear();
    }
    let bound = if status == MilpStatus::Optimal { objective } else { f64::NAN };
    Ok(MilpSolution { status, objective, values, bound, gap: 0.0, nodes: 0, wall_time: Duration::ZERO })
}
