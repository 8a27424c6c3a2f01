//! Sweep drivers. Rows are computed in parallel and collected in input order.

use std::sync::Arc;

use crackwave_core::dispersion::trace_curve;
use crackwave_core::energy::{build_split, evaluate};
use crackwave_core::fields::log_grid;
use crackwave_core::material::{classify_regime, critical_speed, h0_star, upsilon, Rayleigh, Sonic};
use crackwave_core::{Axis, FieldKind, FieldSolver};
use rayon::prelude::*;

use crate::config::{RunConfig, Tuple};
use crate::table::{num, Table};
use crate::CliError;

pub const PARAM_HEADER: [&str; 9] = ["G", "rho", "ell", "eta", "h0", "T0", "L_over_ell", "p", "m_v_over_cs"];

/// Cells echoing the full parameter tuple of a row.
pub fn param_cells(cfg: &RunConfig, t: &Tuple, m: f64) -> Vec<String> {
    vec![
        num(cfg.g),
        num(cfg.rho),
        num(cfg.ell),
        num(t.eta),
        num(t.h0),
        num(cfg.t0),
        num(t.l_over_ell),
        t.p.to_string(),
        num(m),
    ]
}

pub fn describe(t: &Tuple, m: f64) -> String {
    format!("eta = {}, h0 = {}, p = {}, L/ell = {}, m = {}", t.eta, t.h0, t.p, t.l_over_ell, m)
}

/// Maps a solver error on one row to the CLI error classes.
pub fn row_error(row: String, e: crackwave_core::Error) -> CliError {
    if e.is_regime() {
        CliError::Regime { row, message: e.to_string() }
    } else {
        CliError::Numerical { row, message: e.to_string() }
    }
}

/// Crack speed of a tuple, resolving relative speeds and rejecting
/// anything outside the sub-Rayleigh, subsonic range.
pub fn resolve_speed(cfg: &RunConfig, t: &Tuple) -> Result<f64, CliError> {
    let limit = critical_speed(t.eta, t.h0).map_err(|e| row_error(describe(t, t.m_input), e))?.min(1.0);
    let m = if cfg.m_relative { t.m_input * limit } else { t.m_input };
    let regime = classify_regime(t.eta, t.h0, m).map_err(|e| row_error(describe(t, m), e))?;
    if regime.rayleigh != Rayleigh::SubRayleigh || regime.sonic != Sonic::Subsonic {
        return Err(CliError::Regime {
            row: describe(t, m),
            message: format!("m = {m} is not below the limit speed {limit}"),
        });
    }
    Ok(m)
}

/// Resolves every speed up front so that regime violations are reported
/// before any expensive work.
fn speeds(cfg: &RunConfig, tuples: &[Tuple]) -> Result<Vec<f64>, CliError> {
    tuples.iter().map(|t| resolve_speed(cfg, t)).collect()
}

fn run_rows<F>(tuples: &[Tuple], ms: &[f64], f: F) -> Result<Vec<Vec<String>>, CliError>
where
    F: Fn(&Tuple, f64) -> Result<Vec<Vec<String>>, CliError> + Sync,
{
    let chunks: Vec<Result<Vec<Vec<String>>, CliError>> =
        tuples.par_iter().zip(ms.par_iter()).map(|(t, &m)| f(t, m)).collect();
    let mut rows = Vec::new();
    for c in chunks {
        rows.extend(c?);
    }
    Ok(rows)
}

fn pairs(cfg: &RunConfig) -> Vec<(f64, f64)> {
    let eta = cfg.axis("eta", &cfg.eta);
    let h0 = cfg.axis("h0", &cfg.h0);
    eta.iter().flat_map(|&e| h0.iter().map(move |&h| (e, h))).collect()
}

pub fn dispersion(cfg: &RunConfig) -> Result<Table, CliError> {
    cfg.require_sweep("dispersion", &["omega_ell_over_cs", "k_ell", "eta", "h0"])?;
    let (axis, grid) = match &cfg.sweep {
        Some(s) if s.variable == "k_ell" => (Axis::Wavenumber, s.grid.clone()),
        Some(s) if s.variable == "omega_ell_over_cs" => (Axis::Frequency, s.grid.clone()),
        _ => (Axis::Frequency, log_grid(1e-2, 1e3, 200)),
    };
    if grid.iter().any(|&x| !(x > 0.0)) {
        return Err(CliError::Config("dispersion grid must be positive".into()));
    }
    let mut table = Table::new(&["eta", "h0", "omega_ell_over_cs", "k_ell", "m_R_vR_over_cs", "jump_over_5pct"]);
    let curves: Vec<_> = pairs(cfg)
        .par_iter()
        .map(|&(eta, h0)| {
            trace_curve(&grid, axis, eta, h0).map_err(|e| CliError::Numerical {
                row: format!("eta = {eta}, h0 = {h0}"),
                message: e.to_string(),
            })
        })
        .collect();
    for ((eta, h0), curve) in pairs(cfg).into_iter().zip(curves) {
        let curve = curve?;
        for (i, pt) in curve.points.iter().enumerate() {
            table.push(vec![
                num(eta),
                num(h0),
                num(pt.omega_norm),
                num(pt.k_norm),
                num(pt.m_r),
                curve.jumps.contains(&i).to_string(),
            ]);
        }
    }
    Ok(table)
}

pub fn regime_map(cfg: &RunConfig) -> Result<Table, CliError> {
    cfg.require_sweep("regime-map", &["m", "eta", "h0"])?;
    let ms = cfg.axis("m", &cfg.m);
    let mut table = Table::new(&[
        "eta",
        "h0",
        "m_v_over_cs",
        "upsilon",
        "sub_rayleigh",
        "subsonic",
        "m_c",
        "h0_star",
    ]);
    let blocks: Vec<Result<Vec<Vec<String>>, CliError>> = pairs(cfg)
        .par_iter()
        .map(|&(eta, h0)| {
            let row = || format!("eta = {eta}, h0 = {h0}");
            let mc = critical_speed(eta, h0).map_err(|e| row_error(row(), e))?;
            let hs = h0_star(eta).map_err(|e| row_error(row(), e))?;
            ms.iter()
                .map(|&m| {
                    let r = classify_regime(eta, h0, m).map_err(|e| row_error(format!("{}, m = {m}", row()), e))?;
                    // Υ is undefined once 2h₀²m² > 1.
                    let u = upsilon(eta, h0, m).map(num).unwrap_or_default();
                    Ok(vec![
                        num(eta),
                        num(h0),
                        num(m),
                        u,
                        (r.rayleigh == Rayleigh::SubRayleigh).to_string(),
                        (r.sonic == Sonic::Subsonic).to_string(),
                        num(mc),
                        num(hs),
                    ])
                })
                .collect()
        })
        .collect();
    for b in blocks {
        for row in b? {
            table.push(row);
        }
    }
    Ok(table)
}

fn solver(cfg: &RunConfig, t: &Tuple, m: f64) -> Result<FieldSolver, CliError> {
    let err = |e| row_error(describe(t, m), e);
    let mat = cfg.material(t.eta, t.h0).map_err(err)?;
    let split = build_split(&mat, m, cfg.profile(t).map_err(err)?).map_err(err)?;
    FieldSolver::new(&mat, Arc::new(split)).map_err(err)
}

fn normalization(kind: FieldKind) -> &'static str {
    match kind {
        FieldKind::Opening => "w*G/T0",
        FieldKind::CoupleStress => "mu22/T0",
        _ => "value*ell/T0",
    }
}

fn normalize(cfg: &RunConfig, kind: FieldKind, v: f64) -> f64 {
    match kind {
        FieldKind::Opening => v * cfg.g / cfg.t0,
        FieldKind::CoupleStress => v / cfg.t0,
        _ => v * cfg.ell / cfg.t0,
    }
}

pub fn fields(cfg: &RunConfig) -> Result<Table, CliError> {
    cfg.require_sweep("fields", &["X_over_ell", "eta", "h0", "p", "L_over_ell", "m"])?;
    let user_grid = match &cfg.sweep {
        Some(s) if s.variable == "X_over_ell" => {
            if s.grid.iter().any(|&x| !(x > 0.0)) {
                return Err(CliError::Config("X_over_ell grid holds distances |X|/ell and must be positive".into()));
            }
            Some(s.grid.clone())
        }
        _ => None,
    };
    let tuples = cfg.tuples();
    let ms = speeds(cfg, &tuples)?;
    let mut header = PARAM_HEADER.to_vec();
    header.extend(["kind", "X", "X_over_ell", "value", "value_normalized", "normalization"]);
    let rows = run_rows(&tuples, &ms, |t, m| {
        let s = solver(cfg, t, m)?;
        let grid = user_grid.clone().unwrap_or_else(|| log_grid(1e-5, 1e2 * t.l_over_ell.max(1.0), 400));
        let mut rows = Vec::new();
        for &kind in &cfg.kinds {
            let sign = if kind.behind_tip() { -1.0 } else { 1.0 };
            let xs: Vec<f64> = grid.iter().map(|&x| sign * x * cfg.ell).collect();
            let prof = s.profile(kind, &xs).map_err(|e| row_error(format!("{}, field {}", describe(t, m), kind.name()), e))?;
            for (x, v) in prof.x_grid.iter().zip(&prof.values) {
                let mut row = param_cells(cfg, t, m);
                row.extend([
                    kind.name().to_string(),
                    num(*x),
                    num(x / cfg.ell),
                    num(*v),
                    num(normalize(cfg, kind, *v)),
                    normalization(kind).to_string(),
                ]);
                rows.push(row);
            }
        }
        Ok(rows)
    })?;
    let mut table = Table::new(&header);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

pub fn tmax_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    cfg.require_sweep("tmax-sweep", &["eta", "h0", "p", "L_over_ell", "m"])?;
    let tuples = cfg.tuples();
    let ms = speeds(cfg, &tuples)?;
    let mut header = PARAM_HEADER.to_vec();
    header.extend(["x_min_over_ell", "x_max_over_ell", "t23max", "t23max_ell_over_T0", "X_at_over_ell"]);
    let rows = run_rows(&tuples, &ms, |t, m| {
        let s = solver(cfg, t, m)?;
        let x_max = cfg.x_max_over_ell.unwrap_or(100.0 * t.l_over_ell.max(1.0));
        let r = s
            .max_total_shear(cfg.x_min_over_ell * cfg.ell, x_max * cfg.ell)
            .map_err(|e| row_error(describe(t, m), e))?;
        let mut row = param_cells(cfg, t, m);
        row.extend([
            num(cfg.x_min_over_ell),
            num(x_max),
            num(r.t23max),
            num(r.t23max * cfg.ell / cfg.t0),
            num(r.x_at / cfg.ell),
        ]);
        Ok(vec![row])
    })?;
    let mut table = Table::new(&header);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

const ERR_COLUMNS: [&str; 5] = ["E", "E_G_ell_over_T0sq", "E_cl", "E_cl_G_ell_over_T0sq", "E_over_E_cl"];

fn err_cells(cfg: &RunConfig, t: &Tuple, m: f64) -> Result<Vec<String>, CliError> {
    let err = |e| row_error(describe(t, m), e);
    let mat = cfg.material(t.eta, t.h0).map_err(err)?;
    let r = evaluate(&mat, m, cfg.profile(t).map_err(err)?).map_err(err)?;
    let scale = cfg.g * cfg.ell / (cfg.t0 * cfg.t0);
    Ok(vec![num(r.e), num(r.e * scale), num(r.e_cl), num(r.e_cl * scale), num(r.ratio)])
}

pub fn err_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    cfg.require_sweep("err-sweep", &["eta", "h0", "p", "L_over_ell", "m"])?;
    let tuples = cfg.tuples();
    let ms = speeds(cfg, &tuples)?;
    let mut header = PARAM_HEADER.to_vec();
    header.extend(ERR_COLUMNS);
    let rows = run_rows(&tuples, &ms, |t, m| {
        let mut row = param_cells(cfg, t, m);
        row.extend(err_cells(cfg, t, m)?);
        Ok(vec![row])
    })?;
    let mut table = Table::new(&header);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// `𝓔` at the limit-speed proxy `factor·min(1, m_c)`; `crack.m` is ignored.
pub fn limit_study(cfg: &RunConfig) -> Result<Table, CliError> {
    cfg.require_sweep("limit-study", &["eta", "h0", "p", "L_over_ell"])?;
    let tuples = cfg.tuples();
    let mut ms = Vec::with_capacity(tuples.len());
    for t in &tuples {
        let mc = critical_speed(t.eta, t.h0).map_err(|e| row_error(describe(t, f64::NAN), e))?;
        ms.push(cfg.limit_factor * mc.min(1.0));
    }
    let mut header = PARAM_HEADER.to_vec();
    header.extend(["m_c", "limit_factor"]);
    header.extend(ERR_COLUMNS);
    let rows = run_rows(&tuples, &ms, |t, m| {
        let mc = critical_speed(t.eta, t.h0).map_err(|e| row_error(describe(t, m), e))?;
        let mut row = param_cells(cfg, t, m);
        row.extend([num(mc), num(cfg.limit_factor)]);
        row.extend(err_cells(cfg, t, m)?);
        Ok(vec![row])
    })?;
    let mut table = Table::new(&header);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}
