//! Single-schedule estimates of `lim` and `limsup` along `F -> G`.
//!
//! The estimates read one Følner schedule only; they are not the infimum over
//! all invariance levels and the reports say so in their `label`.

use std::io::Write;

use serde::Serialize;

use super::{FiniteSubset, FolnerSchedule};
use crate::linalg::extrapolate_scalar;
use crate::{Error, Result};

pub const SINGLE_SCHEDULE_LABEL: &str = "single-schedule estimate";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub n: usize,
    pub size: usize,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Constant,
    Decreasing,
    Increasing,
    Oscillating,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitOptions {
    /// Fraction of the window (from the end) used for tail statistics.
    pub tail_fraction: f64,
    /// Oscillation below which a non-monotone tail still counts as settled.
    pub stabilization_tol: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            tail_fraction: 0.25,
            stabilization_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub label: &'static str,
    pub series: Vec<SeriesPoint>,
    /// Index into `series` where the tail starts.
    pub tail_start: usize,
    pub tail_sup: f64,
    pub tail_inf: f64,
    /// Intercept at `|F|^{-1/d} = 0` of a low-degree fit over the tail.
    pub extrapolated_limit: Option<f64>,
    pub trend: Trend,
    pub stabilized: bool,
}

impl ConvergenceReport {
    /// Builds the report from a series already ordered by `n`.
    pub fn from_series(series: Vec<SeriesPoint>, dim: usize, opts: &LimitOptions) -> Result<Self> {
        if series.len() < 3 {
            return Err(Error::InsufficientData(format!(
                "limit estimation needs at least 3 points, got {}",
                series.len()
            )));
        }
        let len = series.len();
        let tail_len = ((len as f64 * opts.tail_fraction).ceil() as usize).clamp(2, len);
        let tail_start = len - tail_len;
        let tail = &series[tail_start..];
        let tail_sup = tail.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
        let tail_inf = tail.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
        let scale = tail.iter().map(|p| p.value.abs()).fold(0.0, f64::max).max(1e-300);
        let osc = tail_sup - tail_inf;

        let trend = if osc <= 1e-12 * scale.max(1.0) {
            Trend::Constant
        } else {
            let slack = 1e-14 * scale;
            let diffs: Vec<f64> = tail.windows(2).map(|w| w[1].value - w[0].value).collect();
            if diffs.iter().all(|&d| d <= slack) {
                Trend::Decreasing
            } else if diffs.iter().all(|&d| d >= -slack) {
                Trend::Increasing
            } else {
                Trend::Oscillating
            }
        };
        let stabilized = match trend {
            Trend::Constant | Trend::Decreasing | Trend::Increasing => true,
            Trend::Oscillating => osc <= opts.stabilization_tol,
        };
        let extrapolated_limit = if trend == Trend::Constant {
            Some(tail[tail.len() - 1].value)
        } else {
            let ts: Vec<f64> = tail.iter().map(|p| (p.size as f64).powf(-1.0 / dim as f64)).collect();
            let ys: Vec<f64> = tail.iter().map(|p| p.value).collect();
            extrapolate_scalar(&ts, &ys).map(|(c, _)| c)
        };
        Ok(ConvergenceReport {
            label: SINGLE_SCHEDULE_LABEL,
            series,
            tail_start,
            tail_sup,
            tail_inf,
            extrapolated_limit,
            trend,
            stabilized,
        })
    }

    pub fn last_value(&self) -> f64 {
        self.series.last().map(|p| p.value).unwrap_or(f64::NAN)
    }

    pub fn min_value(&self) -> f64 {
        self.series.iter().map(|p| p.value).fold(f64::INFINITY, f64::min)
    }

    /// Best point estimate of the limit: the extrapolation when the tail
    /// settled, else the tail supremum.
    pub fn limit_estimate(&self) -> f64 {
        match (self.stabilized, self.extrapolated_limit) {
            (true, Some(x)) => x,
            _ => self.tail_sup,
        }
    }

    /// Writes `n,size,value` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W, value_column: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Config(format!("csv output failed: {e}"));
        w.write_record(["n", "size", value_column]).map_err(io)?;
        for p in &self.series {
            w.write_record([p.n.to_string(), p.size.to_string(), format!("{:?}", p.value)])
                .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::Config(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

/// Estimates `limsup` of values attached to the schedule's window.
///
/// `values` must list exactly the sets of the window in increasing `n`.
pub fn limsup_along(
    values: &[(FiniteSubset, f64)],
    schedule: &FolnerSchedule,
    opts: &LimitOptions,
) -> Result<ConvergenceReport> {
    if values.len() != schedule.len() {
        return Err(Error::InsufficientData(format!(
            "{} values for a window of {} sets",
            values.len(),
            schedule.len()
        )));
    }
    let series = schedule
        .indices()
        .zip(values)
        .map(|(n, (f, v))| SeriesPoint {
            n,
            size: f.len(),
            value: *v,
        })
        .collect();
    ConvergenceReport::from_series(series, schedule.dim(), opts)
}
