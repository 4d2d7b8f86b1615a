use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// |measured - expected| <= tolerance
    Absolute,
    /// |measured - expected| <= tolerance * |expected|
    Relative,
    /// measured <= tolerance
    Bound,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub mode: Mode,
    pub pass: bool,
}

impl Check {
    fn make(name: &str, measured: f64, expected: f64, tolerance: f64, mode: Mode) -> Self {
        let pass = match mode {
            Mode::Absolute => (measured - expected).abs() <= tolerance,
            Mode::Relative => (measured - expected).abs() <= tolerance * expected.abs(),
            Mode::Bound => measured <= tolerance,
        };
        Check {
            name: name.to_string(),
            measured,
            expected,
            tolerance,
            mode,
            pass,
        }
    }

    pub fn abs(name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self::make(name, measured, expected, tolerance, Mode::Absolute)
    }

    pub fn rel(name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self::make(name, measured, expected, tolerance, Mode::Relative)
    }

    pub fn below(name: &str, measured: f64, bound: f64) -> Self {
        Self::make(name, measured, 0.0, bound, Mode::Bound)
    }
}

/// Wall time is left out so that reruns are byte-identical.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub scenario: String,
    pub params: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn new(scenario: &str, params: BTreeMap<String, Value>, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Report {
            scenario: scenario.to_string(),
            params,
            checks,
            pass,
        }
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(dir.join("report.json"), text)?;
        Ok(())
    }
}

/// Writes a CSV with a header row.
pub fn write_series(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes() {
        assert!(Check::abs("a", 1.0, 1.05, 0.1).pass);
        assert!(!Check::rel("r", 1.0, 2.0, 0.1).pass);
        assert!(Check::below("b", 0.0, 1e-12).pass);
        assert!(!Check::below("b", f64::NAN, 1.0).pass);
        let r = Report::new("x", BTreeMap::new(), vec![Check::below("b", 2.0, 1.0), Check::below("c", 0.0, 1.0)]);
        assert!(!r.pass);
    }
}
