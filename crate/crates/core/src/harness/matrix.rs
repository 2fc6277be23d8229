use std::collections::HashSet;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;

use super::mission::{run_mission, InitialConfig, MissionMetrics, MissionOptions, Mode, TestCase, INITIAL_CONFIGS};
use super::summary::{parse_runs, SummaryError};
use crate::navsim::Clutter;

pub const CSV_HEADER: &str = "config,clutter,power,seed,mode,outcome,mission_time,t_safety_viol,t_energy_viol,reconfig_count";

/// The treatments to run: every combination of config, clutter level,
/// power increase (percent) and seed, in both modes.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSpec {
    pub configs: Vec<InitialConfig>,
    pub clutter_levels: Vec<Clutter>,
    pub power_levels: Vec<u32>,
    pub seeds: Vec<u64>,
    pub modes: Vec<Mode>,
}

impl Default for MatrixSpec {
    fn default() -> Self {
        Self::with_seeds(1, 0)
    }
}

impl MatrixSpec {
    /// Full 7 × 4 × 3 matrix with seeds `base..base + count`.
    pub fn with_seeds(count: u64, base: u64) -> Self {
        Self {
            configs: INITIAL_CONFIGS.to_vec(),
            clutter_levels: Clutter::ALL.to_vec(),
            power_levels: vec![10, 30, 50],
            seeds: (base..base + count).collect(),
            modes: vec![Mode::Base, Mode::Mros],
        }
    }

    /// Test cases in output order: config, clutter, power, seed, mode.
    pub fn cases(&self) -> Vec<TestCase> {
        let mut out = Vec::new();
        for &config in &self.configs {
            for &clutter in &self.clutter_levels {
                for &power in &self.power_levels {
                    for &seed in &self.seeds {
                        for &mode in &self.modes {
                            out.push(TestCase::new(config, clutter, power, mode, seed));
                        }
                    }
                }
            }
        }
        out
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: String,
    pub clutter: Clutter,
    pub power: u32,
    pub seed: u64,
    pub mode: Mode,
    pub metrics: MissionMetrics,
}

impl RunRecord {
    pub fn from_case(case: &TestCase, metrics: MissionMetrics) -> Self {
        Self {
            config: case.config.label.to_string(),
            clutter: case.contingency.clutter,
            power: (case.contingency.power_increase * 100.0).round() as u32,
            seed: case.seed,
            mode: case.mode,
            metrics,
        }
    }

    pub(crate) fn key(&self) -> (String, Clutter, u32, u64, Mode) {
        (self.config.clone(), self.clutter, self.power, self.seed, self.mode)
    }

    pub fn to_csv_line(&self) -> String {
        let m = &self.metrics;
        format!(
            "{},{},{},{},{},{},{:.3},{:.3},{:.3},{}",
            self.config,
            self.clutter,
            self.power,
            self.seed,
            self.mode,
            m.outcome,
            m.mission_time,
            m.t_safety_viol,
            m.t_energy_viol,
            m.reconfig_count
        )
    }
}

fn case_key(case: &TestCase) -> (String, Clutter, u32, u64, Mode) {
    (
        case.config.label.to_string(),
        case.contingency.clutter,
        (case.contingency.power_increase * 100.0).round() as u32,
        case.seed,
        case.mode,
    )
}

/// Runs every case of `spec` not already in `done`, in parallel. The result
/// keeps the order of [`MatrixSpec::cases`].
pub fn run_matrix(spec: &MatrixSpec, done: &[RunRecord]) -> Vec<RunRecord> {
    let have: HashSet<_> = done.iter().map(RunRecord::key).collect();
    let todo: Vec<TestCase> = spec.cases().into_iter().filter(|c| !have.contains(&case_key(c))).collect();
    todo.par_iter()
        .map(|case| RunRecord::from_case(case, run_mission(case, MissionOptions::default()).metrics))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixFileReport {
    pub existing: usize,
    pub written: usize,
}

/// Runs the matrix against a CSV file, appending only missing rows. An
/// absent or empty file is created with the header.
pub fn run_matrix_to_file(spec: &MatrixSpec, path: &Path) -> Result<MatrixFileReport, SummaryError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(SummaryError::Io(e.to_string())),
    };
    let existing = if text.trim().is_empty() { vec![] } else { parse_runs(&text)? };
    let rows = run_matrix(spec, &existing);
    let io_err = |e: io::Error| SummaryError::Io(e.to_string());
    let mut file = fs::OpenOptions::new().create(true).append(true).open(path).map_err(io_err)?;
    if text.trim().is_empty() {
        writeln!(file, "{CSV_HEADER}").map_err(io_err)?;
    } else if !text.ends_with('\n') {
        writeln!(file).map_err(io_err)?;
    }
    for r in &rows {
        writeln!(file, "{}", r.to_csv_line()).map_err(io_err)?;
    }
    Ok(MatrixFileReport {
        existing: existing.len(),
        written: rows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_matrix_has_84_cells_per_mode() {
        let cases = MatrixSpec::default().cases();
        assert_eq!(cases.len(), 168);
        assert_eq!(cases.iter().filter(|c| c.mode == Mode::Mros).count(), 84);
    }

    #[test]
    fn small_matrix_counts_and_resumes() {
        let spec = MatrixSpec {
            configs: vec![INITIAL_CONFIGS[3]],
            clutter_levels: vec![Clutter::None],
            power_levels: vec![10],
            seeds: vec![1, 2],
            modes: vec![Mode::Base, Mode::Mros],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.csv");
        let first = run_matrix_to_file(&spec, &path).unwrap();
        assert_eq!(first, MatrixFileReport { existing: 0, written: 4 });
        let again = run_matrix_to_file(&spec, &path).unwrap();
        assert_eq!(again, MatrixFileReport { existing: 4, written: 0 });
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    }
}
