use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::ScenarioConfig;
use crate::error::Result;

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "TORUS_CM_OUT";

/// Bumped whenever a scenario's column layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }
}

pub fn fmt_opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// One CSV file: comment lines with the schema, the parameters and any
/// warnings, then the table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub scenario: String,
    pub params: String,
    pub warnings: Vec<String>,
    pub table: Table,
}

impl ScenarioOutput {
    pub fn new(scenario: &str, config: &ScenarioConfig, table: Table) -> Self {
        ScenarioOutput {
            scenario: scenario.into(),
            params: serde_json::to_string(config).expect("config serializes"),
            warnings: Vec::new(),
            table,
        }
    }

    pub fn with_warnings(mut self, warnings: &[String]) -> Self {
        self.warnings.extend_from_slice(warnings);
        self
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# schema torus-cm/{} v{}: {}", self.scenario, SCHEMA_VERSION, self.table.columns.join(","))?;
        writeln!(w, "# params {}", self.params)?;
        for warning in &self.warnings {
            writeln!(w, "# warning {warning}")?;
        }
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&self.table.columns)?;
        for row in &self.table.rows {
            csv.write_record(row)?;
        }
        csv.flush()?;
        Ok(())
    }

    /// Writes `<dir>/<scenario>.csv` and returns the path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.csv", self.scenario));
        let file = std::fs::File::create(&path)?;
        self.write(std::io::BufWriter::new(file))?;
        Ok(path)
    }
}

/// `--out` if given, else `$TORUS_CM_OUT`, else `results`.
pub fn output_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree_model::DistributionLiteral;

    #[test]
    fn csv_layout() {
        let literal: DistributionLiteral = serde_json::from_str(r#"{"pmf": {"2": 1.0}}"#).unwrap();
        let config = ScenarioConfig::new(literal);
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        let out = ScenarioOutput::new("demo", &config, t).with_warnings(&["careful".into()]);
        let mut buf = Vec::new();
        out.write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# schema torus-cm/demo v1: a,b");
        assert!(lines[1].starts_with("# params {"));
        assert_eq!(lines[2], "# warning careful");
        assert_eq!(lines[3], "a,b");
        assert_eq!(lines[4], "1,\"x,y\"");
    }

    #[test]
    fn flag_beats_environment() {
        assert_eq!(output_dir(Some(Path::new("here"))), PathBuf::from("here"));
    }
}
