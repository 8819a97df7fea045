//! Solution-quality and timing metrics, and the benchmark table.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this magnitude a reference optimum is treated as zero.
pub const ZERO_OPTIMUM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approximation {
    /// `h_star / h_min`; for negative optima 1 means optimal.
    Ratio(f64),
    /// `h_star - h_min`, reported when the optimum is (numerically) zero.
    Gap(f64),
}

impl Approximation {
    pub fn ratio(self) -> Option<f64> {
        match self {
            Approximation::Ratio(r) => Some(r),
            Approximation::Gap(_) => None,
        }
    }

    pub fn gap(self) -> Option<f64> {
        match self {
            Approximation::Ratio(_) => None,
            Approximation::Gap(g) => Some(g),
        }
    }
}

pub fn approximation_ratio(h_star: f64, h_min: f64) -> Approximation {
    if h_min.abs() <= ZERO_OPTIMUM_TOL {
        Approximation::Gap(h_star - h_min)
    } else {
        Approximation::Ratio(h_star / h_min)
    }
}

/// `tts_ref / tts_split`.
pub fn speedup(tts_ref: f64, tts_split: f64) -> Result<f64> {
    if !(tts_ref > 0.0 && tts_split > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "times must be positive, got {tts_ref} and {tts_split}"
        )));
    }
    Ok(tts_ref / tts_split)
}

/// One row of the benchmark table. Serialized field order is the CSV column
/// order: `instance,n,k,method,best_cost,cut_value,feasible,tts_seconds,
/// iterations,alpha,alpha_cut,gap,speedup`.
///
/// `alpha` is the cost ratio against the reference; `alpha_cut` the ratio of
/// cut values (MaxCut only); `gap` replaces `alpha` when the reference
/// optimum is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub instance: String,
    pub n: usize,
    pub k: usize,
    pub method: String,
    pub best_cost: f64,
    pub cut_value: Option<f64>,
    pub feasible: bool,
    pub tts_seconds: f64,
    pub iterations: usize,
    pub alpha: Option<f64>,
    pub alpha_cut: Option<f64>,
    pub gap: Option<f64>,
    pub speedup: Option<f64>,
}

pub const CSV_COLUMNS: [&str; 13] = [
    "instance",
    "n",
    "k",
    "method",
    "best_cost",
    "cut_value",
    "feasible",
    "tts_seconds",
    "iterations",
    "alpha",
    "alpha_cut",
    "gap",
    "speedup",
];

impl BenchmarkRecord {
    /// Fills `alpha`/`gap` (and `alpha_cut` when both cut values are known)
    /// from a reference run.
    pub fn compare_to(&mut self, reference_cost: f64, reference_cut: Option<f64>) {
        match approximation_ratio(self.best_cost, reference_cost) {
            Approximation::Ratio(r) => self.alpha = Some(r),
            Approximation::Gap(g) => self.gap = Some(g),
        }
        if let (Some(cut), Some(best)) = (self.cut_value, reference_cut) {
            if best.abs() > ZERO_OPTIMUM_TOL {
                self.alpha_cut = Some(cut / best);
            }
        }
    }
}

/// Writes a header row even when `records` is empty.
pub fn write_csv<W: Write>(out: W, records: &[BenchmarkRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<BenchmarkRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Io(e.to_string())))
        .collect()
}
