//! Time-series records, CSV output and tracking metrics.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One logged sample. Column names carry their units; the order is stable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
    pub phi_deg: f64,
    pub theta_deg: f64,
    pub psi_deg: f64,
    pub u_mps: f64,
    pub v_mps: f64,
    pub w_mps: f64,
    pub p_degps: f64,
    pub q_degps: f64,
    pub r_degps: f64,
    pub shaft_rpm: f64,
    pub u_p_mps: f64,
    pub u_ref_mps: f64,
    pub z_ref_m: f64,
    pub y_ref_m: f64,
    pub phi_ref_deg: f64,
    pub theta_ref_deg: f64,
    pub psi_ref_deg: f64,
    pub n_cmd_rpm: f64,
    pub delta_s_deg: f64,
    pub delta_r_deg: f64,
    pub delta_a_deg: f64,
    pub delta_s1_deg: f64,
    pub delta_s2_deg: f64,
    pub delta_r1_deg: f64,
    pub delta_r2_deg: f64,
    pub s_pitch: f64,
    pub s_yaw: f64,
    pub current_mps: f64,
}

/// Uniformly sampled simulation log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeriesLog {
    pub dt: f64,
    pub records: Vec<Record>,
}

impl TimeSeriesLog {
    pub fn new(dt: f64) -> Self {
        TimeSeriesLog {
            dt,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    /// Extracts one channel.
    pub fn column(&self, f: impl Fn(&Record) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    /// Writes the header row and every record.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        wtr.write_record(Self::header())?;
        for r in &self.records {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Column names in output order.
    pub fn header() -> Vec<&'static str> {
        vec![
            "t_s",
            "x_m",
            "y_m",
            "z_m",
            "phi_deg",
            "theta_deg",
            "psi_deg",
            "u_mps",
            "v_mps",
            "w_mps",
            "p_degps",
            "q_degps",
            "r_degps",
            "shaft_rpm",
            "u_p_mps",
            "u_ref_mps",
            "z_ref_m",
            "y_ref_m",
            "phi_ref_deg",
            "theta_ref_deg",
            "psi_ref_deg",
            "n_cmd_rpm",
            "delta_s_deg",
            "delta_r_deg",
            "delta_a_deg",
            "delta_s1_deg",
            "delta_s2_deg",
            "delta_r1_deg",
            "delta_r2_deg",
            "s_pitch",
            "s_yaw",
            "current_mps",
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("rmse needs at least one sample")]
    Empty,
}

/// √(Σ(ref − actual)²/N).
pub fn rmse(reference: &[f64], actual: &[f64]) -> Result<f64, MetricError> {
    if reference.len() != actual.len() {
        return Err(MetricError::LengthMismatch(reference.len(), actual.len()));
    }
    if reference.is_empty() {
        return Err(MetricError::Empty);
    }
    let ss: f64 = reference
        .iter()
        .zip(actual)
        .map(|(r, a)| (r - a).powi(2))
        .sum();
    Ok((ss / reference.len() as f64).sqrt())
}

/// Tracking summary over a whole run. Errors are measured against the filtered references.
/// Undefined entries (empty run, never settled) are NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub samples: usize,
    pub rmse_y: f64,
    pub rmse_z: f64,
    pub rmse_u: f64,
    pub peak_error_y: f64,
    pub peak_error_z: f64,
    pub peak_error_u: f64,
    /// Time after which |z − z_ref| stays within 0.5 m, s.
    pub settling_time_z: f64,
    /// Time after which |u − u_ref| stays within 2 % of u_ref, s.
    pub settling_time_u: f64,
    /// Mean errors over the final 10 % of the run.
    pub final_error_y: f64,
    pub final_error_z: f64,
    pub final_error_u: f64,
    pub final_phi_deg: f64,
}

fn settling_time(log: &TimeSeriesLog, within: impl Fn(&Record) -> bool) -> f64 {
    match log.records.iter().rposition(|r| !within(r)) {
        None => log.records.first().map_or(f64::NAN, |r| r.t_s),
        Some(i) if i + 1 < log.len() => log.records[i + 1].t_s,
        Some(_) => f64::NAN,
    }
}

impl Metrics {
    pub fn from_log(log: &TimeSeriesLog) -> Self {
        let n = log.len();
        let pair = |r: fn(&Record) -> f64, a: fn(&Record) -> f64| (log.column(r), log.column(a));
        let (yr, y) = pair(|r| r.y_ref_m, |r| r.y_m);
        let (zr, z) = pair(|r| r.z_ref_m, |r| r.z_m);
        let (ur, u) = pair(|r| r.u_ref_mps, |r| r.u_mps);
        let peak = |a: &[f64], b: &[f64]| {
            if a.is_empty() {
                f64::NAN
            } else {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max)
            }
        };
        let tail = (n / 10).max(1).min(n);
        let tail_mean = |a: &[f64], b: &[f64]| {
            if n == 0 {
                return f64::NAN;
            }
            let s: f64 = a[n - tail..]
                .iter()
                .zip(&b[n - tail..])
                .map(|(x, y)| y - x)
                .sum();
            s / tail as f64
        };
        Metrics {
            samples: n,
            rmse_y: rmse(&yr, &y).unwrap_or(f64::NAN),
            rmse_z: rmse(&zr, &z).unwrap_or(f64::NAN),
            rmse_u: rmse(&ur, &u).unwrap_or(f64::NAN),
            peak_error_y: peak(&yr, &y),
            peak_error_z: peak(&zr, &z),
            peak_error_u: peak(&ur, &u),
            settling_time_z: settling_time(log, |r| (r.z_m - r.z_ref_m).abs() <= 0.5),
            settling_time_u: settling_time(log, |r| {
                (r.u_mps - r.u_ref_mps).abs() <= 0.02 * r.u_ref_mps.abs()
            }),
            final_error_y: tail_mean(&yr, &y),
            final_error_z: tail_mean(&zr, &z),
            final_error_u: tail_mean(&ur, &u),
            final_phi_deg: if n == 0 {
                f64::NAN
            } else {
                log.records[n - tail..]
                    .iter()
                    .map(|r| r.phi_deg)
                    .sum::<f64>()
                    / tail as f64
            },
        }
    }
}
