use anyhow::{bail, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schro_maxlab::spectral::delta_multiplier_sup;
use schro_maxlab::{SpectralSampler, SpectrumKind};
use serde::Deserialize;

use super::{relative_error, ExperimentResult};
use crate::cells;
use crate::config::{ExperimentConfig, Tolerances};
use crate::output::{Check, Table};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PropagateOptions {
    times: Vec<f64>,
    s_values: Vec<f64>,
    spectrum: SpectrumKind,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            times: vec![0.0, 0.1, -0.3, 0.5, 1.0],
            s_values: vec![-1.0, 0.0, 0.5, 1.0, 2.0],
            spectrum: SpectrumKind::default(),
        }
    }
}

pub fn propagate(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let params = config.require_params()?;
    let grid = config.require_grid()?;
    let trials = config.trials_or(1)?;
    let opts: PropagateOptions = config.options()?;
    let tol = Tolerances::resolve(
        &[("identity", 0.0), ("unitarity", 1e-12), ("semigroup", 1e-12)],
        &config.tolerances,
    )?;
    if opts.times.is_empty() || opts.s_values.is_empty() {
        bail!("config field `options.times` and `options.s_values` must be nonempty");
    }
    if let Some(t) = opts.times.iter().chain(&opts.s_values).find(|t| !t.is_finite()) {
        bail!("config field `options`: non-finite value {t}");
    }
    if grid.dim() != params.n() {
        bail!("config field `grid.dim` ({}) must equal `params.n` ({})", grid.dim(), params.n());
    }

    let sampler = SpectralSampler::new(grid, opts.spectrum);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed_or_zero());
    let mut table = Table::new(
        "",
        &["trial", "t", "u", "unitarity_rel_err", "semigroup_rel_err"],
    );
    let (mut identity, mut unitarity, mut semigroup) = (0.0f64, 0.0f64, 0.0f64);
    for trial in 0..trials {
        let f = sampler.sample(&mut rng);
        let scale = f.h_s_norm(0.0);
        let zero = f.propagate(0.0, &params)?;
        identity = identity.max(zero.sub(&f)?.h_s_norm(0.0) / scale.max(f64::MIN_POSITIVE));
        for &t in &opts.times {
            let ft = f.propagate(t, &params)?;
            let unit = opts
                .s_values
                .iter()
                .map(|&s| relative_error(ft.h_s_norm(s), f.h_s_norm(s)))
                .fold(0.0, f64::max);
            unitarity = unitarity.max(unit);
            for &u in &opts.times {
                let two_step = ft.propagate(u, &params)?;
                let one_step = f.propagate(t + u, &params)?;
                let err = two_step.sub(&one_step)?.h_s_norm(0.0) / scale.max(f64::MIN_POSITIVE);
                semigroup = semigroup.max(err);
                table.push(cells![trial, t, u, unit, err]);
            }
        }
    }

    let mut out = ExperimentResult::default();
    out.metric("trials", trials);
    out.metric("identity_max_rel_err", identity);
    out.metric("unitarity_max_rel_err", unitarity);
    out.metric("semigroup_max_rel_err", semigroup);
    out.checks.push(Check::at_most("identity", identity, tol.get("identity"), "S_0 f = f"));
    out.checks.push(Check::at_most(
        "unitarity",
        unitarity,
        tol.get("unitarity"),
        "max relative change of ||S_t f||_{H_s} over t and s",
    ));
    out.checks.push(Check::at_most(
        "semigroup",
        semigroup,
        tol.get("semigroup"),
        "||S_t S_u f - S_{t+u} f|| / ||f||",
    ));
    out.provenance("modes", grid.len());
    out.provenance("tolerances", tol.as_map());
    out.tables.push(table);
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MultiplierOptions {
    deltas: Vec<f64>,
}

impl Default for MultiplierOptions {
    fn default() -> Self {
        Self {
            deltas: (1..=8).map(|k| 2f64.powi(-2 * k)).collect(),
        }
    }
}

pub fn multiplier(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let params = config.require_params()?;
    let grid = config.require_grid()?;
    let opts: MultiplierOptions = config.options()?;
    let tol = Tolerances::resolve(&[("variation", 2.0)], &config.tolerances)?;
    params.require_dispersive()?;
    params.require_s_below_a()?;
    if opts.deltas.is_empty() {
        bail!("config field `options.deltas` must be nonempty");
    }
    if let Some(d) = opts.deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        bail!("config field `options.deltas`: {d} outside (0, 1)");
    }

    let exponent = params.s() / params.a();
    let mut table = Table::new("", &["delta", "sup", "at_norm", "at_boundary", "normalized"]);
    let mut normalized = Vec::new();
    let mut boundary = false;
    for &delta in &opts.deltas {
        let est = delta_multiplier_sup(&grid, delta, &params)?;
        let norm = est.value / delta.powf(exponent);
        boundary |= est.at_boundary;
        normalized.push(norm);
        table.push(cells![delta, est.value, est.at_norm, est.at_boundary, norm]);
    }
    let max = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = normalized.iter().copied().fold(f64::INFINITY, f64::min);

    let mut out = ExperimentResult::default();
    out.metric("normalized_max", max);
    out.metric("normalized_min", min);
    out.metric("variation", max / min);
    out.checks.push(Check::holds(
        "resolved",
        !boundary,
        "no maximizer on the outermost lattice shell",
    ));
    out.checks.push(Check::at_most(
        "variation",
        max / min,
        tol.get("variation"),
        "max/min of sup|m_delta| / delta^(s/a)",
    ));
    out.provenance("modes", grid.len());
    out.provenance("band", grid.max_norm());
    out.provenance("tolerances", tol.as_map());
    out.tables.push(table);
    Ok(out)
}
