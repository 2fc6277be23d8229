use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::matrix::{RunRecord, CSV_HEADER};
use super::mission::{MissionMetrics, Mode};
use crate::navsim::{Clutter, Outcome};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SummaryError {
    #[error("malformed CSV: {0}")]
    MalformedCsv(String),
    #[error("i/o error: {0}")]
    Io(String),
}

fn malformed(msg: impl Into<String>) -> SummaryError {
    SummaryError::MalformedCsv(msg.into())
}

/// Parses a run CSV. The header must match [`CSV_HEADER`] and at least one
/// row must follow.
pub fn parse_runs(text: &str) -> Result<Vec<RunRecord>, SummaryError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| malformed(e.to_string()))?.clone();
    let expected: Vec<&str> = CSV_HEADER.split(',').collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(malformed(format!("expected header `{CSV_HEADER}`")));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| malformed(format!("line {line}: {e}")))?;
        let field = |k: usize| rec.get(k).unwrap_or_default();
        let num = |k: usize| -> Result<f64, SummaryError> {
            field(k)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| malformed(format!("line {line}: bad `{}` value `{}`", expected[k], field(k))))
        };
        let bad = |k: usize| malformed(format!("line {line}: bad `{}` value `{}`", expected[k], field(k)));
        out.push(RunRecord {
            config: field(0).to_string(),
            clutter: field(1).parse().map_err(|_| bad(1))?,
            power: field(2).parse().map_err(|_| bad(2))?,
            seed: field(3).parse().map_err(|_| bad(3))?,
            mode: field(4).parse().map_err(|_| bad(4))?,
            metrics: MissionMetrics {
                outcome: field(5).parse().map_err(|_| bad(5))?,
                mission_time: num(6)?,
                t_safety_viol: num(7)?,
                t_energy_viol: num(8)?,
                reconfig_count: field(9).parse().map_err(|_| bad(9))?,
            },
        });
    }
    if out.is_empty() {
        return Err(malformed("no rows"));
    }
    Ok(out)
}

/// Mean of a metric for each mode.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModeMeans {
    pub base: Option<f64>,
    pub mros: Option<f64>,
}

impl ModeMeans {
    pub fn get(&self, mode: Mode) -> Option<f64> {
        match mode {
            Mode::Base => self.base,
            Mode::Mros => self.mros,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: usize,
    pub safety_by_clutter: Vec<(Clutter, ModeMeans)>,
    pub energy_by_power: Vec<(u32, ModeMeans)>,
    pub time_by_config: Vec<(String, ModeMeans)>,
    pub overall_time: ModeMeans,
    pub outcomes: BTreeMap<(Mode, Outcome), usize>,
}

fn means<K: Ord + Clone>(rows: &[RunRecord], key: impl Fn(&RunRecord) -> K, metric: impl Fn(&RunRecord) -> f64) -> Vec<(K, ModeMeans)> {
    let mut acc: BTreeMap<K, [(f64, usize); 2]> = BTreeMap::new();
    for r in rows {
        let slot = &mut acc.entry(key(r)).or_default()[r.mode as usize];
        slot.0 += metric(r);
        slot.1 += 1;
    }
    let mean = |(s, n): (f64, usize)| (n > 0).then(|| s / n as f64);
    acc.into_iter()
        .map(|(k, [b, m])| (k, ModeMeans { base: mean(b), mros: mean(m) }))
        .collect()
}

/// Aggregates a run table into the three figure tables.
pub fn summarize(rows: &[RunRecord]) -> Summary {
    let mut outcomes = BTreeMap::new();
    for r in rows {
        *outcomes.entry((r.mode, r.metrics.outcome)).or_insert(0) += 1;
    }
    Summary {
        rows: rows.len(),
        safety_by_clutter: means(rows, |r| r.clutter, |r| r.metrics.t_safety_viol),
        energy_by_power: means(rows, |r| r.power, |r| r.metrics.t_energy_viol),
        time_by_config: means(rows, |r| r.config.clone(), |r| r.metrics.mission_time),
        overall_time: means(rows, |_| (), |r| r.metrics.mission_time)
            .pop()
            .map(|(_, m)| m)
            .unwrap_or_default(),
        outcomes,
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into())
}

impl Summary {
    /// Aligned text tables with a header describing the configuration set.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        s.push_str("# configurations: C6 uses cf 25, max_vel 0.5, inflation 0.8 in place of the out-of-range published row\n");
        s.push_str("# configurations: C4 and C5 are identical, kept as published\n");
        let _ = writeln!(s, "# rows: {}", self.rows);
        for ((mode, outcome), n) in &self.outcomes {
            let _ = writeln!(s, "# {mode} {outcome}: {n}");
        }
        let table = |s: &mut String, title: &str, key: &str, rows: Vec<(String, ModeMeans)>| {
            let _ = writeln!(s, "\n{title}");
            let _ = writeln!(s, "{key:<10} {:>10} {:>10}", "base", "mros");
            for (k, m) in rows {
                let _ = writeln!(s, "{k:<10} {:>10} {:>10}", cell(m.base), cell(m.mros));
            }
        };
        table(
            &mut s,
            "mean time below safety threshold (s) by clutter",
            "clutter",
            self.safety_by_clutter.iter().map(|(k, m)| (k.to_string(), *m)).collect(),
        );
        table(
            &mut s,
            "mean time above energy threshold (s) by power increase",
            "power",
            self.energy_by_power.iter().map(|(k, m)| (format!("{k}%"), *m)).collect(),
        );
        let mut times: Vec<(String, ModeMeans)> = self.time_by_config.clone();
        times.push(("all".into(), self.overall_time));
        table(&mut s, "mean mission time (s) by initial configuration", "config", times);
        s
    }

    /// `(file name, contents)` for the three figure data files.
    pub fn figure_csvs(&self) -> Vec<(String, String)> {
        let render = |key: &str, rows: Vec<(String, ModeMeans)>| {
            let mut s = format!("{key},base,mros\n");
            for (k, m) in rows {
                let _ = writeln!(s, "{k},{},{}", cell(m.base), cell(m.mros));
            }
            s
        };
        vec![
            (
                "fig6_safety_violation.csv".into(),
                render("clutter", self.safety_by_clutter.iter().map(|(k, m)| (k.to_string(), *m)).collect()),
            ),
            (
                "fig7_energy_violation.csv".into(),
                render("power", self.energy_by_power.iter().map(|(k, m)| (k.to_string(), *m)).collect()),
            ),
            ("fig8_mission_time.csv".into(), render("config", self.time_by_config.clone())),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PER_CELL: &str = "config,clutter,power,seed,mode,outcome,mission_time,t_safety_viol,t_energy_viol,reconfig_count
C1,high,10,0,base,complete,80.000,2.000,0.000,0
C1,high,10,1,base,complete,90.000,1.000,0.000,0
C1,high,10,0,mros,complete,84.000,0.500,0.000,1
C1,high,10,1,mros,complete,86.000,0.000,0.000,2
";

    #[test]
    fn means_match_hand_averages() {
        let rows = parse_runs(TWO_PER_CELL).unwrap();
        let s = summarize(&rows);
        assert_eq!(s.safety_by_clutter, vec![(Clutter::High, ModeMeans { base: Some(1.5), mros: Some(0.25) })]);
        assert_eq!(s.time_by_config[0].1, ModeMeans { base: Some(85.0), mros: Some(85.0) });
        assert_eq!(s.energy_by_power[0].1, ModeMeans { base: Some(0.0), mros: Some(0.0) });
        assert!(s.render_text().contains("C4 and C5"));
        assert_eq!(s.figure_csvs()[0].1, "clutter,base,mros\nhigh,1.500,0.250\n");
    }

    #[test]
    fn empty_and_broken_inputs() {
        assert!(matches!(parse_runs(""), Err(SummaryError::MalformedCsv(_))));
        assert!(matches!(parse_runs(CSV_HEADER), Err(SummaryError::MalformedCsv(_))));
        let bad = TWO_PER_CELL.replace("80.000", "soon");
        assert!(matches!(parse_runs(&bad), Err(SummaryError::MalformedCsv(m)) if m.contains("line 2")));
        assert!(parse_runs("a,b\n1,2\n").is_err());
    }

    #[test]
    fn records_round_trip_through_csv() {
        let rows = parse_runs(TWO_PER_CELL).unwrap();
        let text: String = std::iter::once(CSV_HEADER.to_string())
            .chain(rows.iter().map(RunRecord::to_csv_line))
            .map(|l| l + "\n")
            .collect();
        assert_eq!(text, TWO_PER_CELL);
    }
}
