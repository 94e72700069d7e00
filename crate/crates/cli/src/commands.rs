//! One function per analysis; each returns a [`Report`].

use std::f64::consts::PI;

use optomech::decoherence::{apply_phase_noise, pointer_distribution, visibility_decay};
use optomech::feasibility::{derive, testability};
use optomech::measurement::{correlations, visibility_pipeline, CorrelationResult, Route};
use optomech::oracle::{oracle_correlations, sample_correlations, validate, OracleConfig};
use optomech::witness::evaluate;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{set_param, RunConfig, Target};
use crate::output::{Cell, Report};
use crate::CliError;

/// Oracle deviations above this count as a failed constraint.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

/// Largest `β` for which `decay --channel` evaluates the exact channel.
pub const CHANNEL_BETA_LIMIT: f64 = 2000.0;

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

pub fn run_target(target: Target, cfg: &RunConfig, channel: bool) -> Result<Report, CliError> {
    match target {
        Target::Correlations => correlations_report(cfg),
        Target::Visibility => visibility_report(cfg),
        Target::Decay => decay_report(cfg, channel),
        Target::Witness => witness_report(cfg),
        Target::Feasibility => feasibility_report(cfg),
        Target::Validate => validate_report(cfg),
    }
}

fn correlation_row(source: &str, c: &CorrelationResult) -> Vec<Cell> {
    vec![
        source.into(),
        c.p_pp.into(),
        c.p_pm.into(),
        c.p_mp.into(),
        c.p_mm.into(),
        c.correlation.into(),
        to_json(&c.method).as_str().unwrap_or_default().into(),
    ]
}

pub fn correlations_report(cfg: &RunConfig) -> Result<Report, CliError> {
    let engine = correlations(&cfg.params, cfg.method)?;
    let mut json = json!({ "engine": engine });
    let mut rows = vec![correlation_row("engine", &engine)];
    if cfg.oracle.enabled {
        let oc = OracleConfig::new(cfg.oracle.fock_cutoff)?;
        let o = oracle_correlations(&cfg.params, &oc)?;
        rows.push(correlation_row("oracle", &o));
        json["oracle"] = to_json(&o);
        if cfg.oracle.shots > 0 {
            let s = sample_correlations(&cfg.params, &oc, cfg.oracle.shots, cfg.seed)?;
            rows.push(correlation_row("sampled", &s));
            json["sampled"] = to_json(&s);
        }
    }
    let mut r = Report::new(&["source", "p_pp", "p_pm", "p_mp", "p_mm", "correlation", "method"], json);
    rows.into_iter().for_each(|row| r.push(row));
    Ok(r)
}

pub fn visibility_report(cfg: &RunConfig) -> Result<Report, CliError> {
    let i = visibility_pipeline(&cfg.params, None)?;
    let mut r = Report::new(
        &[
            "visibility",
            "fringe_visibility",
            "phase_tracked_visibility",
            "p00",
            "p01",
            "p10",
            "p11",
            "subspace_probability",
            "negativity_lb",
            "phase_std",
            "uncertainty",
        ],
        to_json(&i),
    );
    r.push(vec![
        i.visibility.into(),
        i.fringe_visibility.into(),
        i.phase_tracked_visibility.into(),
        i.p00.into(),
        i.p01.into(),
        i.p10.into(),
        i.p11.into(),
        i.subspace_probability.into(),
        i.negativity_lb.into(),
        i.phase_std.into(),
        i.uncertainty.into(),
    ]);
    Ok(r)
}

/// Closed-form `1 − V` after `n = 1..n_max` half periods for each model;
/// with `channel`, also the exact channel value and its error bar.
pub fn decay_report(cfg: &RunConfig, channel: bool) -> Result<Report, CliError> {
    let p = &cfg.params;
    if channel && p.beta > CHANNEL_BETA_LIMIT {
        return Err(CliError::Config(format!(
            "--channel needs beta <= {CHANNEL_BETA_LIMIT}, got {}",
            p.beta
        )));
    }
    let mut r = Report::new(
        &[
            "model",
            "n",
            "time",
            "one_minus_v",
            "valid",
            "channel_one_minus_v",
            "channel_uncertainty",
        ],
        Value::Null,
    );
    let mut curves = Vec::new();
    for name in &cfg.models {
        let model = name.build(p, cfg.constants);
        let rows: Vec<_> = (1..=cfg.n_max)
            .into_par_iter()
            .map(|n| -> Result<_, CliError> {
                let d = visibility_decay(&model, p, n)?;
                let ch = if channel {
                    let ptr = pointer_distribution(&model, p, n)?;
                    Some(apply_phase_noise(&ptr, p.beta, Route::XSpace)?)
                } else {
                    None
                };
                Ok((d, ch))
            })
            .collect::<Result<_, _>>()?;
        let mut points = Vec::new();
        for (d, ch) in rows {
            r.constraint_failed |= !d.valid;
            r.push(vec![
                model.name().into(),
                d.n_half_periods.into(),
                (d.n_half_periods as f64 * PI / p.omega_m).into(),
                d.deficit.into(),
                d.valid.into(),
                ch.map_or(Cell::Empty, |c| (1.0 - c.visibility).into()),
                ch.map_or(Cell::Empty, |c| (0.5 * (c.upper - c.lower)).into()),
            ]);
            points.push(json!({ "estimate": d, "channel": ch }));
        }
        curves.push(json!({ "model": model, "points": points }));
    }
    r.json = Value::Array(curves);
    Ok(r)
}

pub fn witness_report(cfg: &RunConfig) -> Result<Report, CliError> {
    let w = evaluate(&cfg.params, cfg.method)?;
    let mut r = Report::new(
        &["negativity_lb", "o_bm", "refined_bound", "verdict", "correlation", "visibility"],
        to_json(&w),
    );
    r.push(vec![
        w.negativity_lb.into(),
        w.o_bm.into(),
        w.refined_bound.into(),
        to_json(&w.verdict).as_str().unwrap_or_default().into(),
        w.correlations.correlation.into(),
        w.interference.visibility.into(),
    ]);
    Ok(r)
}

/// Scalars first, then one row per constraint flag and per model.
pub fn feasibility_report(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = &cfg.params;
    let f = derive(p, &cfg.feasibility)?;
    let models: Vec<_> = cfg.models.iter().map(|m| m.build(p, cfg.constants)).collect();
    let probe = f64::from(cfg.feasibility.n_half_periods) * PI / p.omega_m;
    let t = testability(p, &models, probe)?;
    let mut r = Report::new(
        &["quantity", "value", "threshold", "passed"],
        json!({ "feasibility": f, "testability": t }),
    );
    let scalars = [
        ("g0", f.g0),
        ("tau", f.tau),
        ("x0", f.x0),
        ("p0", f.p0),
        ("g0_over_omega_m", f.g0_over_omega_m),
        ("macroscopicity", f.macroscopicity),
        ("correlation_target", f.correlation_target),
        ("epsilon_nl", f.epsilon_nl),
        ("epsilon_bar", f.epsilon_bar),
        ("dx_over_x0", f.dx_over_x0),
        ("n_eff", f.n_eff),
        ("np_max", f.np_max),
        ("eid_condition_t_max", f.eid_condition_t_max),
    ];
    for (name, v) in scalars {
        r.push(vec![name.into(), v.into(), Cell::Empty, Cell::Empty]);
    }
    for (name, v) in &f.timescales {
        r.push(vec![format!("timescale.{name}").into(), (*v).into(), Cell::Empty, Cell::Empty]);
    }
    for m in &t.models {
        r.push(vec![
            format!("deficit.{}", m.model).into(),
            m.deficit.into(),
            Cell::Empty,
            m.deficit_valid.into(),
        ]);
    }
    for flag in &f.constraint_flags {
        r.push(vec![
            format!("flag.{}", flag.name).into(),
            flag.value.into(),
            flag.threshold.into(),
            flag.passed.into(),
        ]);
    }
    r.constraint_failed = !f.all_passed();
    Ok(r)
}

pub fn validate_report(cfg: &RunConfig) -> Result<Report, CliError> {
    let v = validate(&cfg.params, &OracleConfig::new(cfg.oracle.fock_cutoff)?)?;
    let mut r = Report::new(
        &[
            "beta",
            "coupling",
            "fock_cutoff",
            "state_overlap",
            "family_overlap",
            "correlations",
            "visibility",
            "probabilities",
            "negativity",
            "max_deviation",
        ],
        to_json(&v),
    );
    r.push(vec![
        v.beta.into(),
        v.coupling.into(),
        v.fock_cutoff.into(),
        v.state_overlap.into(),
        v.family_overlap.into(),
        v.correlations.into(),
        v.visibility.into(),
        v.probabilities.into(),
        v.negativity.into(),
        v.max_deviation().into(),
    ]);
    r.constraint_failed = v.max_deviation() >= ORACLE_TOLERANCE;
    Ok(r)
}

/// Cartesian grid over the configured axes, last axis fastest. Points run
/// in parallel; rows keep grid order. Each point gets seed `seed + index`.
pub fn sweep_report(cfg: &RunConfig, target: Target, channel: bool) -> Result<Report, CliError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .filter(|s| !s.axes.is_empty())
        .ok_or_else(|| CliError::Config("sweep needs at least one `[[sweep.axes]]` entry".into()))?;
    let values: Vec<Vec<f64>> = sweep.axes.iter().map(|a| a.values()).collect();
    let total: usize = values.iter().map(Vec::len).product();
    let point = |mut i: usize| -> Vec<f64> {
        let mut out = vec![0.0; values.len()];
        for (slot, v) in out.iter_mut().zip(&values).rev() {
            *slot = v[i % v.len()];
            i /= v.len();
        }
        out
    };
    let results: Vec<Result<Report, CliError>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut c = cfg.clone();
            for (axis, v) in sweep.axes.iter().zip(point(i)) {
                set_param(&mut c.params, &axis.name, v);
            }
            c.seed = cfg.seed.wrapping_add(i as u64);
            c.params.validate()?;
            run_target(target, &c, channel)
        })
        .collect();
    let mut header: Vec<String> = vec!["index".into()];
    header.extend(sweep.axes.iter().map(|a| a.name.clone()));
    let mut out = Report {
        header,
        rows: Vec::new(),
        json: Value::Null,
        constraint_failed: false,
    };
    let mut points = Vec::with_capacity(total);
    for (i, res) in results.into_iter().enumerate() {
        let rep = res?;
        if i == 0 {
            out.header.extend(rep.header.iter().cloned());
        }
        out.constraint_failed |= rep.constraint_failed;
        let coords = point(i);
        for row in rep.rows {
            let mut full: Vec<Cell> = vec![i.into()];
            full.extend(coords.iter().map(|&v| Cell::Float(v)));
            full.extend(row);
            out.rows.push(full);
        }
        let at: serde_json::Map<String, Value> = sweep
            .axes
            .iter()
            .zip(&coords)
            .map(|(a, v)| (a.name.clone(), json!(v)))
            .collect();
        points.push(json!({ "index": i, "point": at, "result": rep.json }));
    }
    out.json = json!({ "target": target, "points": points });
    Ok(out)
}
