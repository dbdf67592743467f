use serde::Serialize;

use crate::group::{folner_window, ConvergenceReport, FolnerSchedule, LimitOptions, SeriesPoint};
use crate::setmaps::{realize, RealizationResult, RealizeOptions, Rule, SetMap};
use crate::subshift::{count_patterns, LocalFunction, Subshift, DEFAULT_CAP};
use crate::{Error, Result};

use super::partition::log_partition_function;
use super::transfer::TransferMatrix;

/// Methods and transfer results agree to this many units per site.
pub const AGREEMENT_TOL: f64 = 1e-9;

pub const CONVENTION: &str = "cylinder supremum over admissible collar completions";
pub const LABEL_EXACT: &str = "exact";
pub const LABEL_UPPER_BOUND: &str = "locally admissible upper bound";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureMethod {
    Enumeration,
    TransferMatrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct PressurePoint {
    pub n: usize,
    pub size: usize,
    /// `log Ẑ_{F_n} / |F_n|`.
    pub value: f64,
    pub method: PressureMethod,
}

/// Both methods on one set.
#[derive(Clone, Debug, Serialize)]
pub struct MethodComparison {
    pub n: usize,
    pub enumeration: f64,
    pub transfer_matrix: f64,
    pub difference: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PressureEstimate {
    pub series: Vec<PressurePoint>,
    #[serde(rename = "limit")]
    pub limit_estimate: f64,
    /// How `limit_estimate` was obtained.
    pub method: PressureMethod,
    pub stabilized: bool,
    /// `log λ` of the transfer matrix when it applies.
    pub log_spectral_radius: Option<f64>,
    /// Limit diagnostics of the enumerated values.
    pub enumeration: Option<ConvergenceReport>,
    pub comparisons: Vec<MethodComparison>,
    pub max_disagreement: f64,
    /// Sets whose enumeration exceeded the cap and were covered by the
    /// transfer matrix instead.
    pub skipped_enumeration: Vec<usize>,
    pub label: &'static str,
    pub convention: &'static str,
}

impl PressureEstimate {
    pub fn agrees(&self) -> bool {
        self.max_disagreement <= AGREEMENT_TOL
    }

    pub fn values(&self) -> Vec<f64> {
        self.series.iter().map(|p| p.value).collect()
    }

    /// Writes `n,size,value,method` rows with a header.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Config(format!("csv output failed: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "size", "log_z_per_site", "method"]).map_err(io)?;
        for p in &self.series {
            let m = match p.method {
                PressureMethod::Enumeration => "enumeration",
                PressureMethod::TransferMatrix => "transfer_matrix",
            };
            w.write_record([p.n.to_string(), p.size.to_string(), format!("{:?}", p.value), m.into()])
                .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::Config(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

/// `P̂(φ)` along a schedule with the default pattern cap.
pub fn pressure(x: &Subshift, phi: &SetMap<LocalFunction>, schedule: &FolnerSchedule) -> Result<PressureEstimate> {
    pressure_with_cap(x, phi, schedule, DEFAULT_CAP)
}

/// `P̂(φ)` along a schedule.
///
/// Every set is enumerated when its pattern count is within `cap`. For an
/// additive map whose generator has window inside `{0, 1}` on a
/// one-dimensional subshift, interval sets are also evaluated exactly through
/// the transfer matrix, which covers sets past the cap, and the limit is
/// `log λ`.
pub fn pressure_with_cap(
    x: &Subshift,
    phi: &SetMap<LocalFunction>,
    schedule: &FolnerSchedule,
    cap: u128,
) -> Result<PressureEstimate> {
    if schedule.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: schedule.dim(),
        });
    }
    let transfer = match phi.rule() {
        Rule::Additive(v) if TransferMatrix::applicable(x, v) => Some(TransferMatrix::new(x, v)?),
        _ => None,
    };
    let log_lambda = transfer.as_ref().and_then(|t| t.perron().ok()).map(|p| p.lambda.ln());

    let mut series = Vec::new();
    let mut enumerated = Vec::new();
    let mut comparisons = Vec::new();
    let mut skipped = Vec::new();
    for (n, f) in schedule.indices().zip(folner_window(schedule)?) {
        let size = f.len();
        let exact = transfer
            .as_ref()
            .filter(|_| f.is_interval())
            .map(|t| t.log_partition(size) / size as f64);
        let count = count_patterns(x, &f);
        let enumerated_value = if count <= cap {
            match log_partition_function(x, phi, &f) {
                Ok(z) => Some(z / size as f64),
                Err(Error::ResourceCap { .. }) if exact.is_some() => None,
                Err(e) => return Err(e),
            }
        } else if exact.is_some() {
            None
        } else {
            return Err(Error::ResourceCap {
                what: format!("patterns on F_{n}"),
                count,
                cap,
            });
        };
        match (enumerated_value, exact) {
            (Some(e), t) => {
                if let Some(t) = t {
                    comparisons.push(MethodComparison {
                        n,
                        enumeration: e,
                        transfer_matrix: t,
                        difference: (e - t).abs(),
                    });
                }
                enumerated.push(SeriesPoint { n, size, value: e });
                series.push(PressurePoint {
                    n,
                    size,
                    value: e,
                    method: PressureMethod::Enumeration,
                });
            }
            (None, Some(t)) => {
                skipped.push(n);
                series.push(PressurePoint {
                    n,
                    size,
                    value: t,
                    method: PressureMethod::TransferMatrix,
                });
            }
            (None, None) => unreachable!("handled above"),
        }
    }

    let opts = LimitOptions::default();
    let enumeration = if enumerated.len() >= 3 {
        Some(ConvergenceReport::from_series(enumerated, x.dim(), &opts)?)
    } else {
        None
    };
    let (limit_estimate, method, stabilized) = match log_lambda {
        Some(l) => (l, PressureMethod::TransferMatrix, true),
        None => {
            let pts = series
                .iter()
                .map(|p| SeriesPoint {
                    n: p.n,
                    size: p.size,
                    value: p.value,
                })
                .collect();
            let report = ConvergenceReport::from_series(pts, x.dim(), &opts)?;
            (report.limit_estimate(), PressureMethod::Enumeration, report.stabilized)
        }
    };
    let max_disagreement = comparisons.iter().map(|c| c.difference).fold(0.0, f64::max);
    let label = if x.dim() >= 2 && !x.is_full() {
        LABEL_UPPER_BOUND
    } else {
        LABEL_EXACT
    };
    Ok(PressureEstimate {
        series,
        limit_estimate,
        method,
        stabilized,
        log_spectral_radius: log_lambda,
        enumeration,
        comparisons,
        max_disagreement,
        skipped_enumeration: skipped,
        label,
        convention: CONVENTION,
    })
}

/// One set of the pressure sandwich.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichPoint {
    pub n: usize,
    pub size: usize,
    pub log_z_phi: f64,
    pub log_z_realized: f64,
    /// `|log Ẑ_F(φ) - log Z_F(ψ)| / |F|`.
    pub gap: f64,
    /// `‖φ(F)/|F| - A_F ψ‖_∞`.
    pub eps_f: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RealizationPressure {
    pub phi: PressureEstimate,
    pub realized: PressureEstimate,
    pub points: Vec<SandwichPoint>,
    pub violations: usize,
    pub gap_series: ConvergenceReport,
    pub realization: RealizationResult<LocalFunction>,
}

/// Realizes `φ` in its locally constant space and compares the pressure of
/// `φ` with that of `S(ψ)` for the realization `ψ`, set by set.
pub fn pressure_of_realization(
    x: &Subshift,
    phi: &SetMap<LocalFunction>,
    schedule: &FolnerSchedule,
    opts: &RealizeOptions,
) -> Result<RealizationPressure> {
    let realization = realize(phi, schedule, opts)?;
    let rep = phi.rep().clone();
    let psi = SetMap::additive(rep.clone(), realization.v.clone());
    let phi_pressure = pressure(x, phi, schedule)?;
    let realized = pressure(x, &psi, schedule)?;

    let mut points = Vec::new();
    for (n, f) in schedule.indices().zip(folner_window(schedule)?) {
        let size = f.len() as f64;
        let a = log_partition_function(x, phi, &f)?;
        let b = log_partition_function(x, &psi, &f)?;
        let diff = rep.sub(&phi.eval_normalized(&f)?, &rep.ergodic_average(&f, &realization.v)?)?;
        let eps_f = rep.norm(&diff)?;
        let gap = (a - b).abs() / size;
        let slack = 1e-12 * (1.0 + a.abs() / size);
        points.push(SandwichPoint {
            n,
            size: f.len(),
            log_z_phi: a,
            log_z_realized: b,
            gap,
            eps_f,
            holds: gap <= eps_f + slack,
        });
    }
    let violations = points.iter().filter(|p| !p.holds).count();
    let gap_series = ConvergenceReport::from_series(
        points
            .iter()
            .map(|p| SeriesPoint {
                n: p.n,
                size: p.size,
                value: p.gap,
            })
            .collect(),
        x.dim(),
        &LimitOptions::default(),
    )?;
    Ok(RealizationPressure {
        phi: phi_pressure,
        realized,
        points,
        violations,
        gap_series,
        realization,
    })
}
