//! CSV tables and JSON summaries.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use sdoal_core::dynamics::ObservableSeries;
use sdoal_core::fock::WignerMap;
use serde::Serialize;

/// Column-oriented table whose first column is `time`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub times: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl Table {
    pub fn new(times: Vec<f64>) -> Self {
        Self {
            times,
            columns: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) {
        assert_eq!(values.len(), self.times.len(), "column length");
        self.columns.push((name.into(), values));
    }

    /// All observable columns, followed by `<name>_stderr` columns when the
    /// series carries standard errors.
    pub fn from_series(series: &ObservableSeries) -> Self {
        let mut table = Table::new(series.times.clone());
        for col in &series.columns {
            table.push(col.name, col.values.clone());
        }
        for col in &series.columns {
            if let Some(se) = &col.stderr {
                table.push(format!("{}_stderr", col.name), se.clone());
            }
        }
        table
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["time".to_string()];
        header.extend(self.columns.iter().map(|(n, _)| n.clone()));
        w.write_record(&header)?;
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(self.columns.iter().map(|(_, v)| v[i].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes a Wigner map with `x` values across the first row and `y` values
/// down the first column.
pub fn write_wigner_csv(map: &WignerMap, path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["y\\x".to_string()];
    header.extend(map.xs.iter().map(|x| x.to_string()));
    w.write_record(&header)?;
    for (iy, y) in map.ys.iter().enumerate() {
        let mut row = vec![y.to_string()];
        row.extend((0..map.xs.len()).map(|ix| map.values[(iy, ix)].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()
}
