use anyhow::{bail, Result};
use schro_maxlab::timesets::{
    cantor_admissible, cantor_dimension, covering_number, exponents as derived_exponents,
    lemma6_check, sufficiency_sum, Flagged, SetGeometry,
};
use schro_maxlab::{SetDescriptor, Verdict};
use serde::Deserialize;
use serde_json::json;

use super::{relative_error, ExperimentResult};
use crate::cells;
use crate::config::{ExperimentConfig, Tolerances};
use crate::output::{Check, Table};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CovernumOptions {
    /// Explicit radii; overrides `base`/`k_max`.
    radii: Option<Vec<f64>>,
    base: f64,
    k_max: u32,
}

impl Default for CovernumOptions {
    fn default() -> Self {
        Self {
            radii: None,
            base: 2.0,
            k_max: 20,
        }
    }
}

pub fn covernum(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let set = config.require_set()?;
    let opts: CovernumOptions = config.options()?;
    Tolerances::resolve(&[], &config.tolerances)?;
    let geometry = set.geometry()?;
    let radii: Vec<(Option<u32>, f64)> = match &opts.radii {
        Some(r) => r.iter().map(|&r| (None, r)).collect(),
        None => {
            if !(opts.base > 1.0 && opts.base.is_finite()) {
                bail!("config field `options.base` must be > 1");
            }
            (0..=opts.k_max).map(|k| (Some(k), opts.base.powi(-(k as i32)))).collect()
        }
    };
    let min = geometry.min_valid_radius();
    if let Some((_, r)) = radii.iter().find(|(_, r)| r.is_nan() || *r <= 0.0 || *r < min * (1.0 - 1e-9)) {
        bail!("config field `options`: radius {r:e} outside the valid range (> 0 and >= {min:e})");
    }

    let mut table = Table::new("", &["k", "r", "covering"]);
    let mut counts = Vec::with_capacity(radii.len());
    for &(k, r) in &radii {
        let n = covering_number(&geometry, r)?;
        counts.push((r, n));
        let k = k.map(|k| k.to_string()).unwrap_or_default();
        table.push(cells![k, r, n]);
    }
    let mut sorted = counts.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = sorted.windows(2).all(|w| w[1].1 <= w[0].1);

    let mut out = ExperimentResult::default();
    out.checks.push(Check::holds("monotone", monotone, "N_E(r) is non-increasing in r"));
    if let SetGeometry::Cantor(c) = &geometry {
        // exact self-similar counts at the construction scales
        let mismatch = (0..=c.level().min(20))
            .find(|&k| covering_number(&geometry, c.lambda().powi(k as i32)).ok() != Some(1u64 << k));
        out.checks.push(Check::holds(
            "cantor_scales",
            mismatch.is_none(),
            match mismatch {
                Some(k) => format!("N(lambda^{k}) != 2^{k}"),
                None => "N(lambda^k) = 2^k for every level k".into(),
            },
        ));
        out.metric("dimension", c.dimension());
    }
    out.metric("points", radii.len());
    out.provenance("min_valid_radius", min);
    out.tables.push(table);
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SuffsumOptions {
    m_max: usize,
    expect: Option<Verdict>,
}

impl Default for SuffsumOptions {
    fn default() -> Self {
        Self {
            m_max: 40,
            expect: None,
        }
    }
}

pub fn suffsum(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let params = config.require_params()?;
    let set = config.require_set()?;
    let opts: SuffsumOptions = config.options()?;
    let tol = Tolerances::resolve(&[("closed_form", 1e-9)], &config.tolerances)?;
    let geometry = set.geometry()?;
    let (s, a) = (params.s(), params.a());
    let rep = sufficiency_sum(&geometry, s, a, opts.m_max)?;

    let mut table = Table::new("", &["m", "r", "covering", "term", "partial_sum"]);
    for m in 0..=rep.m_max {
        table.push(cells![
            m,
            2f64.powi(-(m as i32)),
            rep.covering[m],
            rep.terms[m],
            rep.partial_sums[m]
        ]);
    }

    let mut out = ExperimentResult::default();
    out.metric("verdict", rep.verdict);
    out.metric("density_exponent", 2.0 * s / a);
    out.metric("tail_ratio", rep.tail_ratio);
    out.metric("partial_sum", rep.partial_sums[rep.m_max]);
    out.metric("tail_estimate", rep.tail_estimate);
    out.metric("total_estimate", rep.total_estimate);
    out.metric("saturation_index", rep.saturation_index);
    if let SetGeometry::Cantor(c) = &geometry {
        out.metric("dimension", c.dimension());
    }
    if let Some(expect) = opts.expect {
        out.checks.push(Check::equals(
            "verdict",
            json!(rep.verdict),
            json!(expect),
            "classification of the tail",
        ));
    }
    if let (SetGeometry::Interval { lo, hi }, Some(total)) = (&geometry, rep.total_estimate) {
        if hi - lo == 1.0 {
            // N(2^{-m}) = 2^m on a unit interval
            let closed = 1.0 / (1.0 - 2f64.powf(1.0 - 2.0 * s / a));
            out.metric("closed_form", closed);
            out.checks.push(Check::at_most(
                "closed_form",
                relative_error(total, closed),
                tol.get("closed_form"),
                "tail-corrected sum against sum_m 2^(m(1-2s/a))",
            ));
        }
    }
    out.provenance("m_max_requested", opts.m_max);
    out.provenance("m_max", rep.m_max);
    out.provenance("clamped", rep.clamped);
    out.provenance("tolerances", tol.as_map());
    out.tables.push(table);
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ExponentsOptions {
    lambdas: Vec<f64>,
    /// Class-growth exponent for the covering check on `set`; defaults to `gamma`.
    b: Option<f64>,
    m_max: usize,
}

impl Default for ExponentsOptions {
    fn default() -> Self {
        Self {
            lambdas: vec![0.2, 0.25, 1.0 / 3.0, 0.4, 0.45],
            b: None,
            m_max: 20,
        }
    }
}

fn flagged_text<T: std::fmt::Debug + Copy>(f: &Flagged<T>) -> String {
    match f {
        Flagged::Defined(v) => format!("{v:?}"),
        Flagged::Unbounded => "unbounded".into(),
        Flagged::Undefined(why) => format!("undefined ({why})"),
    }
}

pub fn exponents(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let params = config.require_params()?;
    let opts: ExponentsOptions = config.options()?;
    Tolerances::resolve(&[], &config.tolerances)?;
    let e = derived_exponents(&params);

    let mut table = Table::new("", &["quantity", "value"]);
    table.push(cells!["gamma", flagged_text(&e.gamma)]);
    table.push(cells!["baseline_gamma", format!("{:?}", e.baseline_gamma)]);
    table.push(cells!["p0", format!("{:?}", e.p0)]);
    let interval = match &e.interval_i {
        Flagged::Defined(i) => format!(
            "{}{:?}, {:?}]",
            if i.lower_closed { "[" } else { "(" },
            i.lower,
            i.upper
        ),
        Flagged::Unbounded => "unbounded".into(),
        Flagged::Undefined(why) => format!("undefined ({why})"),
    };
    table.push(cells!["interval_i", interval]);
    table.push(cells!["cantor_threshold", format!("{:?}", e.cantor_threshold)]);
    table.push(cells!["b_max", flagged_text(&e.b_max)]);
    table.push(cells!["cor7_gamma_bound", flagged_text(&e.cor7_gamma_bound)]);

    let mut out = ExperimentResult::default();
    if let Some(g) = e.gamma.value() {
        out.checks.push(Check::holds(
            "gamma_improves",
            g > e.baseline_gamma,
            "2s/(a-s) exceeds 2s/a",
        ));
    }
    let mut cantor = Table::new("cantor", &["lambda", "dimension", "admissible"]);
    let mut consistent = true;
    for &lambda in &opts.lambdas {
        let kappa = cantor_dimension(lambda)?;
        let ok = cantor_admissible(lambda, &params)?;
        consistent &= ok == (kappa < e.cantor_threshold);
        cantor.push(cells![lambda, kappa, ok]);
    }
    out.checks.push(Check::holds("cantor_threshold", consistent, "admissible iff kappa < 2s/a"));

    if let Some(set) = &config.set {
        let ts = set.to_time_set()?;
        let b = match opts.b.or(e.gamma.value()) {
            Some(b) => b,
            None => bail!("config field `options.b` is required when gamma is undefined"),
        };
        let rep = lemma6_check(&ts, b, opts.m_max)?;
        out.metric("covering_constant", rep.empirical_c);
        out.metric("covering_growth", rep.growth);
        out.metric("profile_constant", rep.profile_constant);
        out.checks.push(Check::holds(
            "covering_law",
            rep.bounded,
            format!("N_E(2^-m) / 2^(bm/(b+1)) stays bounded for b = {b}"),
        ));
        if matches!(set, SetDescriptor::Cantor { .. } | SetDescriptor::Interval { .. }) {
            out.provenance("set_note", "covering law evaluated on the finite point set");
        }
    }
    out.metric("exponents", &e);
    out.tables.push(table);
    out.tables.push(cantor);
    Ok(out)
}
