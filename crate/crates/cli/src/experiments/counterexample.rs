use anyhow::{bail, Result};
use schro_maxlab::counterexample::{
    calibrate_floor, growth_experiment, stationary_phase_check, BumpSpec, GrowthConfig,
    GrowthTable, FLOOR_SAFETY,
};
use schro_maxlab::ExponentParams;
use serde::Deserialize;

use super::{relative_error, ExperimentResult};
use crate::cells;
use crate::config::{ExperimentConfig, Tolerances};
use crate::output::{Check, Table};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CounterexampleOptions {
    nu_min: u32,
    nu_max: u32,
    c_lower: f64,
    mesh: usize,
    period: f64,
    sensitivity: Vec<f64>,
    /// Outer radius `A` of the bump annulus; derived from `a` when absent.
    annulus: Option<f64>,
    /// Also run the other dimension and compare ratios; defaults to `a = 2`.
    tensor: Option<bool>,
    /// Rerun `nu_max` with this many times the x-mesh; 0 disables.
    refine_factor: usize,
    /// Oscillatory integrals are evaluated at every `(nu, x)` pair.
    stationary_nus: Vec<u32>,
    stationary_x: Vec<f64>,
    calibration_nus: Vec<u32>,
    calibration_mesh: usize,
}

impl Default for CounterexampleOptions {
    fn default() -> Self {
        let growth = GrowthConfig::default();
        Self {
            nu_min: growth.nu_min,
            nu_max: growth.nu_max,
            c_lower: growth.c_lower,
            mesh: growth.mesh,
            period: growth.period,
            sensitivity: growth.sensitivity,
            annulus: None,
            tensor: None,
            refine_factor: 4,
            // 2^ν x ≥ 128 throughout: below that the integral has not reached its asymptotic size
            stationary_nus: vec![8, 10, 12],
            stationary_x: vec![0.5, 1.0],
            calibration_nus: vec![4, 5, 6],
            calibration_mesh: 64,
        }
    }
}

impl CounterexampleOptions {
    fn growth(&self, dim: usize) -> GrowthConfig {
        GrowthConfig {
            nu_min: self.nu_min,
            nu_max: self.nu_max,
            c_lower: self.c_lower,
            mesh: self.mesh,
            period: self.period,
            dim,
            sensitivity: self.sensitivity.clone(),
        }
    }
}

fn growth_table(table: &GrowthTable) -> Table {
    let mut out = Table::new(
        "",
        &[
            "nu",
            "modes",
            "norm_f",
            "lower_bound_maximal",
            "ratio",
            "fit_residual",
            "substitution_error_bound",
            "substitution_relative",
            "enumerated_samples",
        ],
    );
    for r in &table.rows {
        out.push(cells![
            r.nu,
            r.modes,
            r.norm_f,
            r.lower_bound_maximal,
            r.ratio,
            r.fit_residual,
            r.substitution_error_bound,
            r.substitution_relative,
            r.enumerated_samples
        ]);
    }
    out
}

pub fn counterexample(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let params = config.require_params()?;
    let opts: CounterexampleOptions = config.options()?;
    let tol = Tolerances::resolve(
        &[
            ("exponent_min", 0.35),
            ("exponent_max", 0.65),
            ("substitution", 1e-6),
            ("tensor", 0.05),
            ("scaling", 0.15),
            ("refinement", 0.02),
        ],
        &config.tolerances,
    )?;
    let spec = match opts.annulus {
        Some(a) => BumpSpec::new(params.a(), a)?,
        None => BumpSpec::for_exponent(params.a())?,
    };
    let tensor = opts.tensor.unwrap_or(params.a() == 2.0);
    let x_ok = |x: f64| x.is_finite() && x > 0.0 && x <= 1.0;
    if !opts.stationary_x.iter().all(|&x| x_ok(x)) {
        bail!("config field `options.stationary_x` values must lie in (0, 1]");
    }
    let growth = opts.growth(params.n());
    let table = growth_experiment(&params, &spec, &growth)?;
    let ratios: Vec<f64> = table.rows.iter().map(|r| r.ratio).collect();

    let mut out = ExperimentResult::default();
    out.metric("exponent", table.exponent);
    out.metric("fit_intercept", table.fit.intercept);
    out.metric("square_slope", table.square_fit.slope);
    out.metric("square_offset", table.square_offset);
    out.metric("ratios", &ratios);
    out.checks.push(Check::holds(
        "increasing",
        table.strictly_increasing,
        "ratio strictly increasing in nu",
    ));
    out.checks.push(Check::within(
        "exponent_window",
        table.exponent,
        tol.get("exponent_min"),
        tol.get("exponent_max"),
        "least-squares slope of log ratio against log nu",
    ));
    let substitution = table
        .rows
        .iter()
        .map(|r| r.substitution_relative)
        .fold(0.0, f64::max);
    out.checks.push(Check::at_most(
        "substitution",
        substitution,
        tol.get("substitution"),
        "time-substitution error relative to |S_tau f_nu(x)|",
    ));

    let mut sensitivity = Table::new("sensitivity", &["c_lower", "nu", "ratio", "exponent"]);
    for (nu, r) in table.rows.iter().map(|r| r.nu).zip(&ratios) {
        sensitivity.push(cells![opts.c_lower, nu, *r, table.exponent]);
    }
    for row in &table.sensitivity {
        for (nu, r) in table.rows.iter().map(|r| r.nu).zip(&row.ratios) {
            sensitivity.push(cells![row.c_lower, nu, *r, row.exponent]);
        }
    }

    let mut extra = Vec::new();
    if tensor {
        let other_dim = 3 - params.n();
        let other_params = ExponentParams::new(params.a(), params.s(), other_dim)?;
        let mut other = opts.growth(other_dim);
        other.sensitivity.clear();
        let other = growth_experiment(&other_params, &spec, &other)?;
        let mut t = Table::new("tensor", &["nu", "ratio_n1", "ratio_n2", "quotient"]);
        let (one, two) = if params.n() == 1 {
            (&table, &other)
        } else {
            (&other, &table)
        };
        let quotients: Vec<f64> = one
            .rows
            .iter()
            .zip(&two.rows)
            .map(|(a, b)| b.ratio / a.ratio)
            .collect();
        for ((a, b), q) in one.rows.iter().zip(&two.rows).zip(&quotients) {
            t.push(cells![a.nu, a.ratio, b.ratio, *q]);
        }
        let (lo, hi) = quotients
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, h), &q| (l.min(q), h.max(q)));
        out.metric("tensor_quotient_min", lo);
        out.metric("tensor_quotient_max", hi);
        out.checks.push(Check::at_most(
            "tensor_factor",
            hi / lo - 1.0,
            tol.get("tensor"),
            "spread of n=2 ratio / n=1 ratio across nu",
        ));
        extra.push(t);
    }

    if opts.refine_factor > 1 {
        let mut fine = opts.growth(params.n());
        fine.nu_min = opts.nu_max - 1;
        fine.mesh = opts.mesh * opts.refine_factor;
        fine.sensitivity.clear();
        let fine = growth_experiment(&params, &spec, &fine)?;
        let coarse = table.rows.last().expect("nonempty").lower_bound_maximal;
        let refined = fine.rows.last().expect("nonempty").lower_bound_maximal;
        // an upward move is always acceptable
        let drop = if refined >= coarse {
            0.0
        } else {
            relative_error(refined, coarse)
        };
        out.metric("refined_lower_bound", refined);
        out.checks.push(Check::at_most(
            "mesh_refinement",
            drop,
            tol.get("refinement"),
            format!("relative decrease of the lower bound at nu_max with {}x x-mesh", opts.refine_factor),
        ));
    }

    if !opts.stationary_nus.is_empty() && !opts.stationary_x.is_empty() {
        let floor = calibrate_floor(&spec, &opts.calibration_nus, opts.c_lower, opts.calibration_mesh)?;
        out.metric("floor_constant", floor);
        let mut st = Table::new(
            "stationary",
            &["nu", "x", "lambda", "integral_abs", "predicted_floor", "scaled", "quadrature_points"],
        );
        let mut nus = opts.stationary_nus.clone();
        nus.sort_unstable();
        nus.dedup();
        let mut above = true;
        let mut worst_scaling = 0.0f64;
        for &x in &opts.stationary_x {
            let mut values = Vec::new();
            for &nu in &nus {
                let sp = stationary_phase_check(nu, x, &spec, opts.c_lower, floor)?;
                let lambda = 2f64.powi(nu as i32) * x;
                above &= sp.integral_abs >= sp.predicted_floor;
                st.push(cells![
                    nu,
                    x,
                    lambda,
                    sp.integral_abs,
                    sp.predicted_floor,
                    sp.integral_abs * lambda.sqrt(),
                    sp.quadrature_points
                ]);
                values.push((nu, sp.integral_abs));
            }
            for (i, &(nu, v)) in values.iter().enumerate() {
                if let Some(&(_, w)) = values[i..].iter().find(|(m, _)| *m == nu + 2) {
                    worst_scaling = worst_scaling.max(relative_error(w / v, 0.5));
                }
            }
        }
        out.checks.push(Check::holds(
            "stationary_floor",
            above,
            "integral_abs >= c 2^(-nu/2) x^(-1/2) at every tested (nu, x)",
        ));
        out.checks.push(Check::at_most(
            "stationary_scaling",
            worst_scaling,
            tol.get("scaling"),
            "relative deviation of integral_abs(nu+2)/integral_abs(nu) from 1/2",
        ));
        out.provenance("floor_safety", FLOOR_SAFETY);
        out.provenance("calibration_nus", &opts.calibration_nus);
        extra.push(st);
    }

    out.provenance("growth", &table.config);
    out.provenance("bump", spec);
    out.provenance("modes", table.rows.iter().map(|r| r.modes).collect::<Vec<_>>());
    out.provenance("transverse_norm_sq", table.transverse_norm_sq);
    out.provenance("tolerances", tol.as_map());
    out.tables.push(growth_table(&table));
    out.tables.push(sensitivity);
    out.tables.extend(extra);
    Ok(out)
}
