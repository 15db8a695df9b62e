//! RMS tracking metrics and CSV logs.

mod csv_log;

pub use csv_log::{
    format_sig9, read_log_csv, read_log_from, write_log_csv, write_log_to, write_reference_csv, LogRow, CSV_HEADER,
};

use nalgebra::Vector3;
use thiserror::Error;

use crate::control::ControllerKind;
use crate::sim::SimLog;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("series lengths differ ({actual} actual vs {reference} reference samples)")]
    LengthMismatch { actual: usize, reference: usize },
    #[error("empty series")]
    Empty,
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed log: {0}")]
    Malformed(String),
}

/// Per-axis root-mean-square of `actual - reference`.
pub fn rms_error(actual: &[Vector3<f64>], reference: &[Vector3<f64>]) -> Result<[f64; 3], MetricsError> {
    if actual.len() != reference.len() {
        return Err(MetricsError::LengthMismatch {
            actual: actual.len(),
            reference: reference.len(),
        });
    }
    if actual.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut sum = [0.0; 3];
    for (a, r) in actual.iter().zip(reference) {
        let d = a - r;
        for k in 0..3 {
            sum[k] += d[k] * d[k];
        }
    }
    let n = actual.len() as f64;
    Ok(sum.map(|s| (s / n).sqrt()))
}

/// Whole-mission tracking summary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RmsReport {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub payload: bool,
    /// Unknown when recomputed from a bare CSV log.
    pub controller: Option<ControllerKind>,
}

impl RmsReport {
    pub fn from_log(log: &SimLog) -> Result<Self, MetricsError> {
        let [x, y, z] = rms_error(&log.positions(), &log.references())?;
        Ok(Self {
            x,
            y,
            z,
            payload: log.payload_enabled,
            controller: Some(log.controller),
        })
    }

    /// The payload flag is set when any row has the payload attached.
    pub fn from_rows(rows: &[LogRow]) -> Result<Self, MetricsError> {
        let actual: Vec<_> = rows.iter().map(|r| r.position).collect();
        let reference: Vec<_> = rows.iter().map(|r| r.reference).collect();
        let [x, y, z] = rms_error(&actual, &reference)?;
        Ok(Self {
            x,
            y,
            z,
            payload: rows.iter().any(|r| r.payload_attached),
            controller: None,
        })
    }

    pub fn axes(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl std::fmt::Display for RmsReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let controller = self.controller.map_or("unknown", |c| c.name());
        write!(
            f,
            "controller={controller} payload={} rms_x={} rms_y={} rms_z={}",
            if self.payload { "on" } else { "off" },
            format_sig9(self.x),
            format_sig9(self.y),
            format_sig9(self.z)
        )
    }
}
