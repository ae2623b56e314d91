//! Command implementations behind the `codid` binary.
//!
//! Each command takes a [`RunConfig`], fills in the defaults it resolved, and
//! returns the text to print together with an exit status. The resolved
//! configuration is embedded in every JSON document.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use codid_core::bootstrap::{BootstrapConfig, EffectEstimate, Target, ZeroPolicy};
use codid_core::bounds::{estimate_bounds, WeightScheme};
use codid_core::estimator::{
    estimate_cells, estimate_stratified, linear_pt_counterfactual_shares, CodidResult, StratifiedResult, TwoByTwo,
};
use codid_core::panel::{validate_common_support, PanelDataset, PanelOptions};
use codid_core::simplex::{closure, log_odds, Categories, Composition, QuantityVector};
use codid_core::staggered::{cohort_effects, AggregateEffect, ControlStrategy, ControlUsed, StaggeredResult};
use codid_core::synthetic::{synthetic_effects, SimplexFit, SolverOptions, SyntheticResult};

use crate::csv_io;
use crate::error::{CliError, Result};
use crate::json::{self, intervals, num, nums, quantities, shares};
use crate::parallel;
use crate::spec_file::SpecFile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Validate,
    Estimate,
    Bounds,
    Staggered,
    Synthetic,
    Simulate,
    Plotdata,
    DemoFig1,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Estimate => "estimate",
            Command::Bounds => "bounds",
            Command::Staggered => "staggered",
            Command::Synthetic => "synthetic",
            Command::Simulate => "simulate",
            Command::Plotdata => "plotdata",
            Command::DemoFig1 => "demo-fig1",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub replicates: usize,
    pub seed: u64,
    pub ci_level: f64,
    /// `redraw`, `redraw:N` or `smooth:X`.
    pub zero_policy: String,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        let d = BootstrapConfig::default();
        Self {
            replicates: d.replicates,
            seed: d.seed,
            ci_level: d.ci_level,
            zero_policy: "redraw:100".into(),
        }
    }
}

impl BootstrapSettings {
    pub fn to_config(&self) -> Result<BootstrapConfig> {
        let bad = || CliError::Usage(format!("bad zero policy `{}`", self.zero_policy));
        let zero_policy = match self.zero_policy.split_once(':') {
            None if self.zero_policy == "redraw" => ZeroPolicy::default(),
            Some(("redraw", n)) => ZeroPolicy::Redraw {
                max_attempts: n.parse().map_err(|_| bad())?,
            },
            Some(("smooth", x)) => ZeroPolicy::Smooth(x.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        let config = BootstrapConfig {
            replicates: self.replicates,
            seed: self.seed,
            ci_level: self.ci_level,
            zero_policy,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub ridge: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            max_iterations: d.max_iterations,
            tolerance: d.tolerance,
            ridge: d.ridge,
        }
    }
}

/// Everything a run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub inputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub treated: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<f64>,
    /// `explicit` (from the CSV) or `treated-totals`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strata_weights: Option<String>,
    /// `uniform`, `uniform:P`, `decay:RHO` or `explicit:T=W,...`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,
    /// `never`, `notyet` or `pooled`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapSettings>,
    /// `population` or `sampled`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Where `simulate` writes the untreated (held-out) population panel.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<String>,
}

impl RunConfig {
    pub fn new(command: Command, inputs: Vec<String>) -> Self {
        Self {
            command,
            inputs,
            output: None,
            format: Format::Json,
            treated: None,
            baseline: None,
            smoothing: None,
            strata_weights: None,
            weights: None,
            strategy: None,
            t0: None,
            solver: None,
            bootstrap: None,
            mode: None,
            seed: None,
            truth: None,
        }
    }

    fn input(&self, i: usize, what: &str) -> Result<&Path> {
        self.inputs
            .get(i)
            .map(Path::new)
            .ok_or_else(|| CliError::Usage(format!("missing {what} path")))
    }

    fn panel_options(&self) -> PanelOptions {
        PanelOptions {
            smoothing: self.smoothing,
            category_order: None,
        }
    }
}

/// What a command produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub body: String,
    pub exit_code: i32,
    /// Lines for stderr.
    pub messages: Vec<String>,
    /// Extra files to write, as (path, contents).
    pub files: Vec<(String, String)>,
}

impl Output {
    fn ok(body: String) -> Self {
        Self {
            body,
            exit_code: 0,
            messages: Vec::new(),
            files: Vec::new(),
        }
    }
}

pub fn run(config: &RunConfig) -> Result<Output> {
    match config.command {
        Command::Validate => validate(config),
        Command::Estimate => estimate(config),
        Command::Bounds => bounds(config),
        Command::Staggered => staggered(config),
        Command::Synthetic => synthetic(config),
        Command::Simulate => simulate(config),
        Command::Plotdata => plotdata(config),
        Command::DemoFig1 => demo_fig1(config),
    }
}

fn render(config: &RunConfig, warnings: &[String], result: Value) -> Result<Output> {
    let body = match config.format {
        Format::Csv => json::flatten_to_csv(&result),
        Format::Json | Format::Text => {
            let cfg = serde_json::to_value(config)?;
            json::to_text(&json::document(config.command.name(), cfg, warnings, result))
        }
    };
    let mut out = Output::ok(body);
    out.messages = warnings.iter().map(|w| format!("warning: {w}")).collect();
    Ok(out)
}

fn resolve_treated(panel: &PanelDataset, config: &mut RunConfig) -> Result<String> {
    if let Some(t) = &config.treated {
        panel.group_index(t)?;
        return Ok(t.clone());
    }
    if panel.group_index("treated").is_ok() {
        config.treated = Some("treated".into());
        return Ok("treated".into());
    }
    Err(CliError::Usage("no group named `treated`; pass --treated".into()))
}

fn resolve_baseline(categories: &Categories, config: &mut RunConfig) -> Result<usize> {
    match &config.baseline {
        Some(label) => categories
            .index_of(label)
            .ok_or_else(|| codid_core::Error::UnknownCategory(label.clone()).into()),
        None => {
            let k = categories.last_index();
            config.baseline = Some(categories.labels()[k].clone());
            Ok(k)
        }
    }
}

fn labels(c: &Categories) -> Value {
    c.labels().into()
}

fn ctt_log_odds(ctt: &Composition, baseline: usize) -> Result<Value> {
    let lo = log_odds(ctt, baseline)?;
    let names: Vec<&str> = lo.coordinate_labels().collect();
    Ok(json!({"coordinates": names, "values": nums(lo.values())}))
}

fn effect_json(r: &CodidResult, baseline: usize) -> Result<Value> {
    Ok(json!({
        "q_counterfactual": quantities(&r.counterfactual_q),
        "S_counterfactual": num(r.counterfactual_total),
        "pi_counterfactual": shares(&r.counterfactual_shares),
        "gtt": nums(&r.gtt_per_category),
        "gtt_total": num(r.gtt_total),
        "ctt": shares(&r.ctt),
        "ctt_log_odds": ctt_log_odds(&r.ctt, baseline)?,
    }))
}

fn observed_json(q: &QuantityVector) -> Value {
    json!({
        "q_observed": quantities(q),
        "S_observed": num(q.total()),
        "pi_observed": shares(&closure(q)),
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(x), Value::Object(y)) = (&mut a, b) {
        x.extend(y);
    }
    a
}

fn bootstrap_json(e: &EffectEstimate, settings: &BootstrapSettings) -> Value {
    json!({
        "estimator": e.estimator,
        "replicates": e.config.replicates,
        "seed": e.config.seed,
        "ci_level": num(e.config.ci_level),
        "zero_policy": settings.zero_policy,
        "rounded_totals": e.rounded_totals,
        "names": e.names,
        "point": nums(&e.point),
        "lower": nums(&e.lower),
        "upper": nums(&e.upper),
    })
}

fn rounding_warning(e: &EffectEstimate, warnings: &mut Vec<String>) {
    if e.rounded_totals {
        warnings.push("non-integer cell totals were rounded for multinomial resampling".into());
    }
}

fn validate(config: &RunConfig) -> Result<Output> {
    let records = csv_io::read_records_from(config.input(0, "panel")?)?;
    let issues: Vec<Value> = validate_common_support(&records)
        .iter()
        .map(|i| {
            json!({
                "group": i.group,
                "time": i.period,
                "stratum": i.stratum,
                "category": i.category,
                "reason": i.kind.reason(),
            })
        })
        .collect();
    let mut built = PanelDataset::from_records(&records, &config.panel_options());
    if let (Ok(panel), Some(path)) = (&built, config.inputs.get(1)) {
        let timing = csv_io::load_cohorts(Path::new(path))?;
        built = panel.with_timing(&timing);
    }
    let (summary, error) = match &built {
        Ok(p) => (
            json!({
                "groups": p.groups().iter().map(|g| json!({"group": g.id, "first_treated": g.first_treated})).collect::<Vec<_>>(),
                "periods": p.periods(),
                "categories": labels(p.categories()),
                "strata": p.strata().iter().map(|s| json!({"stratum": s.id, "weight": s.weight.map(num)})).collect::<Vec<_>>(),
                "smoothing": p.smoothing().map(num),
                "smoothed_cells": p.smoothed_cells().iter().map(|a| json!({"group": a.group, "time": a.period, "stratum": a.stratum})).collect::<Vec<_>>(),
            }),
            Value::Null,
        ),
        Err(e) => (Value::Null, json!({"code": e.code(), "message": e.to_string()})),
    };
    let result = json!({
        "valid": built.is_ok(),
        "error": error,
        "issues": issues,
        "panel": summary,
    });
    let mut out = render(config, &[], result)?;
    if let Err(e) = built {
        let e = CliError::from(e);
        out.exit_code = e.exit_code();
        out.messages.push(format!("error[{}]: {e}", e.code()));
    }
    Ok(out)
}

/// Fills in stratum weights per the configured source.
fn prepare_strata(panel: PanelDataset, treated: &str, config: &mut RunConfig) -> Result<(PanelDataset, &'static str)> {
    let explicit = panel.stratum_weights().is_ok();
    let source = config
        .strata_weights
        .clone()
        .unwrap_or_else(|| if explicit { "explicit" } else { "treated-totals" }.to_string());
    config.strata_weights = Some(source.clone());
    match source.as_str() {
        "explicit" => {
            panel.stratum_weights()?;
            Ok((panel, "explicit"))
        }
        "treated-totals" => {
            let first_post = 1;
            let pre = panel
                .periods()
                .iter()
                .copied()
                .filter(|&t| t < first_post)
                .max()
                .ok_or(codid_core::Error::NoPrePeriods)?;
            Ok((panel.with_weights_from_totals(treated, pre)?, "treated group totals at period 0"))
        }
        other => Err(CliError::Usage(format!("unknown strata weight source `{other}`"))),
    }
}

fn stratified_json(r: &StratifiedResult, baseline: usize, source: &str) -> Result<Value> {
    let strata = r
        .strata
        .iter()
        .map(|s| Ok(merge(json!({"stratum": s.stratum, "weight": num(s.weight)}), effect_json(&s.result, baseline)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "strata_weight_source": source,
        "q_counterfactual": quantities(&r.counterfactual_q),
        "S_counterfactual": num(r.counterfactual_total),
        "pi_counterfactual": shares(&r.counterfactual_shares),
        "pi_counterfactual_quantity_consistent": shares(&r.counterfactual_shares_quantity_consistent),
        "gtt": nums(&r.gtt_per_category),
        "gtt_total": num(r.gtt_total),
        "ctt": shares(&r.ctt),
        "ctt_log_odds": ctt_log_odds(&r.ctt, baseline)?,
        "ctt_quantity_consistent": shares(&r.ctt_quantity_consistent),
        "strata": strata,
    }))
}

fn estimate(config: &RunConfig) -> Result<Output> {
    let mut config = config.clone();
    let panel = csv_io::load_csv(config.input(0, "panel")?, &config.panel_options())?;
    let treated = resolve_treated(&panel, &mut config)?;
    let baseline = resolve_baseline(panel.categories(), &mut config)?;
    let mut warnings = Vec::new();
    if !panel.smoothed_cells().is_empty() {
        warnings.push(format!("{} cells were smoothed", panel.smoothed_cells().len()));
    }
    let (result, target, panel) = if panel.is_stratified() {
        let (panel, source) = prepare_strata(panel, &treated, &mut config)?;
        let panel = panel.with_treated(&treated, 1)?;
        let r = estimate_stratified(&panel)?;
        (stratified_json(&r, baseline, source)?, Target::Stratified, panel)
    } else {
        let panel = panel.with_treated(&treated, 1)?;
        let cells = TwoByTwo::from_panel(&panel)?;
        let r = estimate_cells(&cells)?;
        let lin = linear_pt_counterfactual_shares(
            &closure(&cells.treated_pre),
            &closure(&cells.control_pre),
            &closure(&cells.control_post),
        )?;
        let head = json!({
            "q_treated_pre": quantities(&cells.treated_pre),
            "q_treated_post": quantities(&cells.treated_post),
            "q_control_pre": quantities(&cells.control_pre),
            "q_control_post": quantities(&cells.control_post),
        });
        let body = merge(merge(head, observed_json(&cells.treated_post)), effect_json(&r, baseline)?);
        let body = merge(
            body,
            json!({"linear_pt": {"pi_counterfactual": nums(&lin.values), "valid": lin.in_simplex}}),
        );
        (body, Target::TwoByTwo, panel)
    };
    let mut result = merge(
        json!({
            "categories": labels(panel.categories()),
            "baseline": panel.categories().labels()[baseline],
            "treated": treated,
        }),
        result,
    );
    if let Some(settings) = &config.bootstrap {
        let e = parallel::bootstrap(&panel, &target, settings.to_config()?)?;
        rounding_warning(&e, &mut warnings);
        result = merge(result, json!({"bootstrap": bootstrap_json(&e, settings)}));
    }
    render(&config, &warnings, result)
}

/// Parses `uniform`, `uniform:P`, `decay:RHO` or `explicit:T=W,T=W`.
pub fn parse_weights(spec: &str) -> Result<WeightScheme> {
    let bad = || CliError::Usage(format!("bad weight scheme `{spec}`"));
    Ok(match spec.split_once(':') {
        None if spec == "uniform" => WeightScheme::Uniform { last: None },
        Some(("uniform", p)) => WeightScheme::Uniform {
            last: Some(p.parse().map_err(|_| bad())?),
        },
        Some(("decay", rho)) => WeightScheme::Decay {
            rho: rho.parse().map_err(|_| bad())?,
        },
        Some(("explicit", list)) => WeightScheme::Explicit(
            list.split(',')
                .map(|kv| {
                    let (t, w) = kv.split_once('=').ok_or_else(bad)?;
                    Ok((t.trim().parse().map_err(|_| bad())?, w.trim().parse().map_err(|_| bad())?))
                })
                .collect::<Result<_>>()?,
        ),
        _ => return Err(bad()),
    })
}

fn bounds(config: &RunConfig) -> Result<Output> {
    let mut config = config.clone();
    let panel = csv_io::load_csv(config.input(0, "panel")?, &config.panel_options())?;
    let treated = resolve_treated(&panel, &mut config)?;
    let baseline = resolve_baseline(panel.categories(), &mut config)?;
    let spec = config.weights.clone().unwrap_or_else(|| "uniform".into());
    config.weights = Some(spec.clone());
    let scheme = parse_weights(&spec)?;
    let panel = panel.with_treated(&treated, 1)?;
    let r = estimate_bounds(&panel, &scheme)?;
    let omega: Vec<Value> = r.bounds.weights.iter().map(|&(t, w)| json!({"t": t, "omega": num(w)})).collect();
    let lo_odds = r.ctt_set.log_odds_ranges(baseline)?;
    let coords: Vec<&str> = panel
        .categories()
        .labels()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != baseline)
        .map(|(_, c)| c.as_str())
        .collect();
    let result = merge(
        json!({
            "categories": labels(panel.categories()),
            "baseline": panel.categories().labels()[baseline],
            "treated": treated,
            "omega": omega,
            "b_min": nums(&r.bounds.b_min),
            "b_max": nums(&r.bounds.b_max),
        }),
        merge(
            observed_json(&r.observed),
            json!({
                "gtt_intervals": intervals(&r.gtt_category_intervals),
                "gtt_total_interval": intervals(&[r.gtt_total_interval])[0],
                "pi_counterfactual_envelopes": intervals(&r.share_envelopes()),
                "ctt_envelopes": intervals(&r.ctt_set.ctt_envelopes()),
                "ctt_log_box": intervals(&r.ctt_set.log_box()),
                "ctt_log_odds_ranges": {"coordinates": coords, "values": intervals(&lo_odds)},
            }),
        ),
    );
    render(&config, &[], result)
}

/// `never`, `notyet` or `pooled`.
pub fn parse_strategy(s: &str) -> Result<ControlStrategy> {
    match s {
        "never" => Ok(ControlStrategy::NeverTreated),
        "notyet" => Ok(ControlStrategy::NotYetTreatedEach),
        "pooled" => Ok(ControlStrategy::NotYetTreatedPooled),
        other => Err(CliError::Usage(format!("unknown strategy `{other}` (never, notyet, pooled)"))),
    }
}

fn control_json(c: &ControlUsed) -> Value {
    match c {
        ControlUsed::NeverTreated => json!({"kind": "never_treated"}),
        ControlUsed::NotYetTreated(s) => json!({"kind": "not_yet_treated", "cohorts": [s]}),
        ControlUsed::Pooled(s) => json!({"kind": "pooled", "cohorts": s}),
    }
}

fn aggregate_json(a: &AggregateEffect, key: &str) -> Value {
    json!({
        key: a.key,
        "cohorts": a.cohorts,
        "weight": num(a.weight),
        "gtt": nums(&a.gtt_per_category),
        "gtt_total": num(a.gtt_total),
        "ctt": shares(&a.ctt),
    })
}

fn staggered_json(r: &StaggeredResult, baseline: usize, boots: &[Option<Value>]) -> Result<Value> {
    let effects = r
        .effects
        .iter()
        .zip(boots)
        .map(|(e, b)| {
            let mut v = merge(
                json!({
                    "g": e.cohort,
                    "t": e.period,
                    "event_time": e.event_time,
                    "control": control_json(&e.control),
                    "weight": num(e.weight),
                }),
                merge(observed_json(&e.observed_q), effect_json(&e.effect, baseline)?),
            );
            if let Some(b) = b {
                v = merge(v, json!({"bootstrap": b}));
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "strategy": r.strategy.name(),
        "effects": effects,
        "event_time": r.event_time.iter().map(|a| aggregate_json(a, "e")).collect::<Vec<_>>(),
        "calendar_time": r.calendar_time.iter().map(|a| aggregate_json(a, "t")).collect::<Vec<_>>(),
    }))
}

fn staggered(config: &RunConfig) -> Result<Output> {
    let mut config = config.clone();
    let panel = csv_io::load_csv(config.input(0, "panel")?, &config.panel_options())?;
    let timing = csv_io::load_cohorts(config.input(1, "cohorts")?)?;
    let panel = panel.with_timing(&timing)?;
    let baseline = resolve_baseline(panel.categories(), &mut config)?;
    let name = config.strategy.clone().unwrap_or_else(|| "pooled".into());
    config.strategy = Some(name.clone());
    let strategy = parse_strategy(&name)?;
    let r = cohort_effects(&panel, strategy)?;
    let mut warnings = Vec::new();
    let boots = match &config.bootstrap {
        None => vec![None; r.effects.len()],
        Some(settings) => {
            let bc = settings.to_config()?;
            if strategy == ControlStrategy::NotYetTreatedEach {
                warnings.push("bootstrap intervals for not-yet-treated cells use the pooled control".into());
            }
            r.effects
                .iter()
                .map(|e| {
                    let target = Target::StaggeredCell {
                        cohort: e.cohort,
                        period: e.period,
                        strategy,
                    };
                    let est = parallel::bootstrap(&panel, &target, bc)?;
                    rounding_warning(&est, &mut warnings);
                    Ok(Some(bootstrap_json(&est, settings)))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    warnings.dedup();
    let result = merge(
        json!({
            "categories": labels(panel.categories()),
            "baseline": panel.categories().labels()[baseline],
        }),
        staggered_json(&r, baseline, &boots)?,
    );
    render(&config, &warnings, result)
}

fn fit_json(f: &SimplexFit) -> Value {
    json!({
        "objective": num(f.objective),
        "iterations": f.iterations,
        "gradient_mapping_norm": num(f.gradient_mapping_norm),
        "converged": f.converged,
    })
}

fn synthetic_json(r: &SyntheticResult, baseline: usize) -> Result<Value> {
    Ok(json!({
        "treated": r.treated,
        "controls": r.controls,
        "pre_periods": r.pre_periods,
        "post_periods": r.post_periods,
        "omega": nums(&r.unit_weights.weights),
        "lambda": nums(&r.time_weights.weights),
        "solver": {"omega": fit_json(&r.unit_weights), "lambda": fit_json(&r.time_weights)},
        "q_treated_pre": quantities(&r.q_treated_pre),
        "q_treated_post": quantities(&r.q_treated_post),
        "q_control_pre": quantities(&r.q_control_pre),
        "q_control_post": quantities(&r.q_control_post),
        "gtt": nums(&r.gtt_per_category),
        "gtt_total": num(r.gtt_total),
        "gtt_multiplicative": nums(&r.gtt_per_category_multiplicative),
        "pi_treated_pre": shares(&r.pi_treated_pre),
        "pi_treated_post": shares(&r.pi_treated_post),
        "pi_control_pre": shares(&r.pi_control_pre),
        "pi_control_post": shares(&r.pi_control_post),
        "ctt": shares(&r.ctt),
        "ctt_log_odds": ctt_log_odds(&r.ctt, baseline)?,
        "ctt_difference": shares(&r.ctt_difference),
    }))
}

fn synthetic(config: &RunConfig) -> Result<Output> {
    let mut config = config.clone();
    let panel = csv_io::load_csv(config.input(0, "panel")?, &config.panel_options())?;
    let treated = resolve_treated(&panel, &mut config)?;
    let baseline = resolve_baseline(panel.categories(), &mut config)?;
    let t0 = config.t0.ok_or_else(|| CliError::Usage("--t0 is required".into()))?;
    let first_post = panel
        .periods()
        .iter()
        .copied()
        .find(|&t| t > t0)
        .ok_or_else(|| codid_core::Error::BadPeriod(format!("no period after t0 = {t0}")))?;
    let solver = config.solver.clone().unwrap_or_default();
    config.solver = Some(solver.clone());
    let options = SolverOptions {
        max_iterations: solver.max_iterations,
        tolerance: solver.tolerance,
        ridge: solver.ridge,
    };
    let panel = panel.with_treated(&treated, first_post)?;
    let r = synthetic_effects(&panel, t0, &options)?;
    let mut warnings = Vec::new();
    for (what, fit) in [("omega", &r.unit_weights), ("lambda", &r.time_weights)] {
        if !fit.converged {
            warnings.push(format!(
                "{what} solver stopped after {} iterations (gradient mapping norm {})",
                fit.iterations,
                json::fmt_f64(fit.gradient_mapping_norm)
            ));
        }
    }
    let result = merge(
        json!({"categories": labels(panel.categories()), "baseline": panel.categories().labels()[baseline], "t0": t0}),
        synthetic_json(&r, baseline)?,
    );
    render(&config, &warnings, result)
}

fn simulate(config: &RunConfig) -> Result<Output> {
    let mut config = config.clone();
    let path = config.input(0, "spec")?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let spec = SpecFile::from_json(&text)?.into_spec()?;
    let mode = config.mode.clone().unwrap_or_else(|| "population".into());
    config.mode = Some(mode.clone());
    let panel = match mode.as_str() {
        "population" => spec.population_panel()?,
        "sampled" => {
            let seed = config
                .seed
                .ok_or_else(|| CliError::Usage("sampled mode needs --seed".into()))?;
            spec.sampled_panel(seed)?
        }
        other => return Err(CliError::Usage(format!("unknown mode `{other}` (population, sampled)"))),
    };
    let mut buf = Vec::new();
    csv_io::write_panel(&panel, &mut buf)?;
    let mut out = Output::ok(String::from_utf8(buf).expect("csv is utf-8"));
    if let Some(truth) = &config.truth {
        let untreated = codid_core::rum::UtilitySpec {
            treatment: None,
            ..spec
        };
        let mut buf = Vec::new();
        csv_io::write_panel(&untreated.population_panel()?, &mut buf)?;
        out.files.push((truth.clone(), String::from_utf8(buf).expect("csv is utf-8")));
    }
    Ok(out)
}

fn plotdata(config: &RunConfig) -> Result<Output> {
    let mut config = config.clone();
    let panel = csv_io::load_csv(config.input(0, "panel")?, &config.panel_options())?;
    let baseline = resolve_baseline(panel.categories(), &mut config)?;
    let mut buf = Vec::new();
    csv_io::write_plotdata(&panel, baseline, &mut buf)?;
    Ok(Output::ok(String::from_utf8(buf).expect("csv is utf-8")))
}

/// Shares of the three-category illustration: control before, control
/// after, treated before.
pub const FIG1_SHARES: [[f64; 3]; 3] = [[0.7, 0.2, 0.1], [0.3, 0.3, 0.4], [0.2, 0.3, 0.5]];

fn demo_fig1(config: &RunConfig) -> Result<Output> {
    let cats = Categories::numbered(3)?;
    let [c0, c1, t0] = FIG1_SHARES.map(|s| Composition::new(cats.clone(), s.to_vec()));
    let (c0, c1, t0) = (c0?, c1?, t0?);
    let linear = linear_pt_counterfactual_shares(&t0, &c0, &c1)?;
    let codid = codid_core::estimator::counterfactual_shares_log_odds(&t0, &c0, &c1, cats.last_index())?;
    if config.format == Format::Text {
        let row = |xs: &[f64]| xs.iter().map(|x| format!("{x:>9.5}")).collect::<Vec<_>>().join(" ");
        let body = format!(
            "control before   {}\ncontrol after    {}\ntreated before   {}\n\
             linear PT        {}   {}\nCoDiD            {}   valid\n",
            row(c0.shares()),
            row(c1.shares()),
            row(t0.shares()),
            row(&linear.values),
            if linear.in_simplex { "valid" } else { "INVALID (outside the simplex)" },
            row(codid.shares()),
        );
        return Ok(Output::ok(body));
    }
    let result = json!({
        "categories": labels(&cats),
        "pi_control_pre": shares(&c0),
        "pi_control_post": shares(&c1),
        "pi_treated_pre": shares(&t0),
        "linear_pt": {"pi_counterfactual": nums(&linear.values), "valid": linear.in_simplex},
        "codid": {"pi_counterfactual": shares(&codid), "valid": true},
    });
    render(config, &[], result)
}
