use alloc::vec::Vec;

use crate::observables::Moments;

/// Column names, in output order.
pub const COLUMNS: [&str; 8] = [
    "mean_photon",
    "p1",
    "p2",
    "p3",
    "inversion",
    "entropy",
    "q",
    "norm_drift",
];

/// One named observable over the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: &'static str,
    pub values: Vec<f64>,
    /// Standard error of the mean, present for ensembles.
    pub stderr: Option<Vec<f64>>,
}

/// Time grid plus named observable columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub columns: Vec<Column>,
}

impl ObservableSeries {
    /// Single-run series from per-record moments.
    pub fn from_moments(times: Vec<f64>, records: &[Moments]) -> Self {
        let columns = COLUMNS
            .iter()
            .enumerate()
            .map(|(k, &name)| Column {
                name,
                values: records.iter().map(|m| linear_value(m, k)).collect(),
                stderr: None,
            })
            .collect();
        Self { times, columns }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Values of a named column; panics on an unknown name.
    pub fn get(&self, name: &str) -> &[f64] {
        &self
            .column(name)
            .unwrap_or_else(|| panic!("unknown column {name}"))
            .values
    }

    pub fn stderr(&self, name: &str) -> Option<&[f64]> {
        self.column(name).and_then(|c| c.stderr.as_deref())
    }

    pub fn has_stderr(&self) -> bool {
        self.columns.iter().any(|c| c.stderr.is_some())
    }
}

// Value of column `k` for one record. Entropy and q are nonlinear in the
// state; ensembles recompute them from averaged moments.
pub(crate) fn linear_value(m: &Moments, k: usize) -> f64 {
    match k {
        0 => m.mean_photon,
        1 => m.population(1),
        2 => m.population(2),
        3 => m.population(3),
        4 => m.inversion(),
        5 => m.entropy_bits(),
        6 => m.q(),
        7 => libm::fabs(m.norm - 1.0),
        _ => unreachable!(),
    }
}
