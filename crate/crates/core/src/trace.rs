//! Time series of flow diagnostics and their CSV form.

use serde::Serialize;

/// Decimal form with 15 significant digits.
pub fn csv_number(x: f64) -> String {
    format!("{x:.14e}")
}

/// Table with a header line and rows of numbers.
pub fn csv_table(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(csv_number).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub trait CsvRecord {
    const HEADER: &'static str;
    fn values(&self) -> Vec<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SdSample {
    pub t: f64,
    pub length: f64,
    pub area: f64,
    pub k_osc: f64,
    pub iso_ratio: f64,
}

impl CsvRecord for SdSample {
    const HEADER: &'static str = "t,length,area,k_osc,iso_ratio";
    fn values(&self) -> Vec<f64> {
        vec![self.t, self.length, self.area, self.k_osc, self.iso_ratio]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DqopSample {
    pub t: f64,
    pub energy: f64,
    pub entropy: f64,
    pub u_bar: f64,
}

impl CsvRecord for DqopSample {
    const HEADER: &'static str = "t,E,Ent,ubar";
    fn values(&self) -> Vec<f64> {
        vec![self.t, self.energy, self.entropy, self.u_bar]
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct FlowTrace<S> {
    pub samples: Vec<S>,
}

impl<S: CsvRecord> FlowTrace<S> {
    pub fn new() -> Self {
        FlowTrace { samples: Vec::new() }
    }

    pub fn push(&mut self, s: S) {
        self.samples.push(s);
    }

    pub fn to_csv(&self) -> String {
        csv_table(S::HEADER, self.samples.iter().map(|s| s.values()))
    }
}
