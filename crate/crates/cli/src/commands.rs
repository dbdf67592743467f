use std::fmt::Debug;

use amenable_core::config::{BuiltSetMap, RunConfig, Space, SCHEMA_VERSION};
use amenable_core::group::{
    folner_window, invariance_defect, ConvergenceReport, FiniteSubset, FolnerSchedule, LimitOptions, SeriesPoint, Trend,
};
use amenable_core::setmaps::{
    check_equivariance, dichotomy_classify, test_asymptotically_additive, test_relative_aa, vert_g, vert_sup,
    Constraint, Dichotomy, SetMap,
};
use amenable_core::thermo::{pressure_of_realization, variational_certificate, VariationalOptions};
use amenable_core::{setmaps, thermo, Error as CoreError};
use serde_json::{json, Value};

/// A computation that ran but whose hypothesis failed; the report is still
/// printed.
#[derive(Debug)]
pub struct Precondition {
    pub message: String,
    pub report: Value,
}

impl std::fmt::Display for Precondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Precondition {}

pub struct Output {
    pub name: &'static str,
    pub json: Value,
    pub csv: Vec<(String, Vec<u8>)>,
    pub summary: String,
}

fn envelope(command: &str, body: Value) -> Value {
    let mut v = json!({ "schema": SCHEMA_VERSION, "command": command });
    if let (Some(obj), Value::Object(extra)) = (v.as_object_mut(), body) {
        obj.extend(extra);
    }
    v
}

fn schedule_json(s: &FolnerSchedule) -> Value {
    let (a, b) = s.range();
    json!({ "description": format!("{s:?}"), "dim": s.dim(), "n_min": a, "n_max": b })
}

fn report_csv(r: &ConvergenceReport, column: &str) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    r.write_csv(&mut buf, column)?;
    Ok(buf)
}

pub fn folner(cfg: &RunConfig) -> anyhow::Result<Output> {
    let schedule = cfg.schedule()?;
    let window = folner_window(&schedule)?;
    let gens = cfg.defect_generators();
    let mut columns = Vec::new();
    let mut reports = Vec::new();
    let mut decreasing = true;
    for g in &gens {
        let k = FiniteSubset::singleton(g);
        let pts: Vec<SeriesPoint> = schedule
            .indices()
            .zip(&window)
            .map(|(n, f)| SeriesPoint {
                n,
                size: f.len(),
                value: invariance_defect(&k, f),
            })
            .collect();
        columns.push(pts.iter().map(|p| p.value).collect::<Vec<f64>>());
        let report = ConvergenceReport::from_series(pts, cfg.group.dim, &LimitOptions::default())?;
        decreasing &= matches!(report.trend, Trend::Decreasing | Trend::Constant);
        reports.push(json!({ "g": g.coords(), "report": report }));
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n".to_string(), "size".to_string()];
    header.extend(gens.iter().map(|g| format!("defect{:?}", g.coords())));
    w.write_record(&header)?;
    for (i, (n, f)) in schedule.indices().zip(&window).enumerate() {
        let mut row = vec![n.to_string(), f.len().to_string()];
        row.extend(columns.iter().map(|c| format!("{:?}", c[i])));
        w.write_record(&row)?;
    }
    let csv_bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv output failed: {e}"))?;

    let json = envelope(
        "folner",
        json!({ "schedule": schedule_json(&schedule), "generators": reports, "decreasing": decreasing }),
    );
    if !decreasing {
        return Err(Precondition {
            message: "invariance defects did not decrease along the schedule".into(),
            report: json,
        }
        .into());
    }
    Ok(Output {
        name: "folner",
        json,
        csv: vec![("folner.csv".into(), csv_bytes)],
        summary: format!("folner: {} sets, defects decreasing", window.len()),
    })
}

fn analyze_map<V>(phi: &SetMap<V>, cfg: &RunConfig, schedule: &FolnerSchedule) -> anyhow::Result<Value>
where
    V: Clone + Debug + Send + Sync + 'static,
{
    let eq = check_equivariance(phi, cfg.options.samples.unwrap_or(64), cfg.seed())?;
    let sup = vert_sup(phi, schedule)?;
    let vg = vert_g(phi, schedule)?;
    let (aa, aa_report) = if eq.passes {
        let r = test_asymptotically_additive(phi, schedule, cfg.tol())?;
        let v = phi.rep().to_params(&r.v)?;
        let mut body = serde_json::to_value(&r)?;
        body["v"] = json!(v.as_slice());
        (json!(r.is_aa), body)
    } else {
        (Value::Null, Value::Null)
    };
    Ok(json!({
        "equivariant": eq.passes,
        "equivariance": eq,
        "vert_sup": sup,
        "vert_g": vg,
        "aa": aa,
        "aa_report": aa_report,
    }))
}

pub fn analyze(cfg: &RunConfig) -> anyhow::Result<Output> {
    let schedule = cfg.schedule()?;
    let space = cfg.space()?;
    let body = match cfg.setmap(&space)? {
        BuiltSetMap::Matrix(phi) => analyze_map(&phi, cfg, &schedule)?,
        BuiltSetMap::Koopman(phi) => analyze_map(&phi, cfg, &schedule)?,
    };
    let summary = format!("analyze: equivariant={} aa={}", body["equivariant"], body["aa"]);
    let mut body = body;
    body["schedule"] = schedule_json(&schedule);
    Ok(Output {
        name: "analyze",
        json: envelope("analyze", body),
        csv: Vec::new(),
        summary,
    })
}

fn realize_map<V>(phi: &SetMap<V>, cfg: &RunConfig, schedule: &FolnerSchedule) -> anyhow::Result<(Value, Vec<u8>)>
where
    V: Clone + Debug + Send + Sync + 'static,
{
    let r = setmaps::realize(phi, schedule, &cfg.realize_options())?;
    let mut body = json!({ "realization": r, "v": r.params });
    body["schedule"] = schedule_json(schedule);
    Ok((body, report_csv(&r.residual_series, "residual")?))
}

pub fn realize(cfg: &RunConfig) -> anyhow::Result<Output> {
    let schedule = cfg.schedule()?;
    let space = cfg.space()?;
    let target = cfg.target_basis(&space)?;
    let (mut body, csv) = match cfg.setmap(&space)? {
        BuiltSetMap::Matrix(phi) => {
            let relative = match &target {
                Some(basis) => {
                    let rel = test_relative_aa(&phi, &Constraint::Subspace(basis.clone()), &schedule, cfg.tol())?;
                    let class = dichotomy_classify(&phi, basis, &schedule, cfg.tol(), &cfg.realize_options())?;
                    if let Dichotomy::OutOfHypothesis { gap } = class {
                        let report = envelope("realize", json!({ "relative": rel, "dichotomy": class }));
                        return Err(Precondition {
                            message: format!("not asymptotically additive relative to the target: gap {gap:e}"),
                            report,
                        }
                        .into());
                    }
                    Some(json!({ "relative": rel, "dichotomy": class }))
                }
                None => None,
            };
            let (mut body, csv) = realize_map(&phi, cfg, &schedule)?;
            if let Some(rel) = relative {
                body["relative"] = rel;
            }
            (body, csv)
        }
        BuiltSetMap::Koopman(phi) => realize_map(&phi, cfg, &schedule)?,
    };
    let summary = format!(
        "realize: residual estimate {:e}",
        body["realization"]["residual_estimate"].as_f64().unwrap_or(f64::NAN)
    );
    if body.get("relative").is_none() {
        body["relative"] = Value::Null;
    }
    Ok(Output {
        name: "realize",
        json: envelope("realize", body),
        csv: vec![("realize_residuals.csv".into(), csv)],
        summary,
    })
}

fn koopman(
    cfg: &RunConfig,
) -> anyhow::Result<(
    Space,
    std::sync::Arc<amenable_core::subshift::Subshift>,
    SetMap<amenable_core::subshift::LocalFunction>,
)> {
    let space = cfg.space()?;
    let Space::Koopman { x, .. } = &space else {
        return Err(CoreError::Config("this command needs a `subshift` block".into()).into());
    };
    let x = x.clone();
    let BuiltSetMap::Koopman(phi) = cfg.setmap(&space)? else {
        unreachable!("subshift spaces build Koopman maps")
    };
    Ok((space, x, phi))
}

pub fn pressure(cfg: &RunConfig) -> anyhow::Result<Output> {
    let schedule = cfg.schedule()?;
    let (_, x, phi) = koopman(cfg)?;
    let p = thermo::pressure(&x, &phi, &schedule)?;
    let mut csv = Vec::new();
    let mut buf = Vec::new();
    p.write_csv(&mut buf)?;
    csv.push(("pressure.csv".to_string(), buf));

    let with_gap = cfg.setmap.is_some() && cfg.options.realization_gap.unwrap_or(true);
    let realization = if with_gap {
        let r = pressure_of_realization(&x, &phi, &schedule, &cfg.realize_options())?;
        csv.push(("pressure_gap.csv".to_string(), report_csv(&r.gap_series, "gap")?));
        json!({
            "violations": r.violations,
            "points": r.points,
            "gap_series": r.gap_series,
            "realized_pressure": { "limit": r.realized.limit_estimate, "method": r.realized.method },
            "realized_v": r.realization.params,
        })
    } else {
        Value::Null
    };
    let summary = format!("pressure: {:.12} ({:?}, {})", p.limit_estimate, p.method, p.label);
    let json = envelope(
        "pressure",
        json!({ "schedule": schedule_json(&schedule), "pressure": p, "realization": realization }),
    );
    Ok(Output {
        name: "pressure",
        json,
        csv,
        summary,
    })
}

pub fn varprin(cfg: &RunConfig) -> anyhow::Result<Output> {
    let schedule = cfg.schedule()?;
    let (_, x, phi) = koopman(cfg)?;
    let opts = VariationalOptions {
        tol: cfg.tol(),
        realize: cfg.realize_options(),
        ..VariationalOptions::default()
    };
    let cert = variational_certificate(&x, &phi, &cfg.family(), &schedule, &opts)?;
    let summary = format!(
        "varprin: pressure {:.12}, family sup {:.12}, gap {:e}",
        cert.pressure, cert.family_sup, cert.gap
    );
    let json = envelope(
        "varprin",
        json!({
            "schedule": schedule_json(&schedule),
            "pressure": { "limit": cert.pressure, "method": cert.pressure_method },
            "certificate": cert,
        }),
    );
    Ok(Output {
        name: "varprin",
        json,
        csv: Vec::new(),
        summary,
    })
}
