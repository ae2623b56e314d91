//! Parametric bootstrap: every cell is redrawn from a multinomial with the
//! observed total and shares, the estimator is rerun, and percentile
//! intervals are read off the replicates.
//!
//! Randomness is keyed by position, never by evaluation order: replicate `b`,
//! cell `c` draws from the ChaCha8 stream `(b << 32) | c` of the master seed,
//! so any scheduling of replicates gives bit-identical output.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::estimator;
use crate::panel::PanelDataset;
use crate::simplex::{self, Composition, QuantityVector};
use crate::staggered::{ControlStrategy, StaggeredPanel};

/// What to do when a redrawn cell has an empty category.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroPolicy {
    /// Redraw the whole replicate, at most this many times.
    Redraw { max_attempts: usize },
    /// Add this pseudo-count to every category of an affected cell.
    Smooth(f64),
}

impl Default for ZeroPolicy {
    fn default() -> Self {
        ZeroPolicy::Redraw { max_attempts: 100 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub ci_level: f64,
    pub zero_policy: ZeroPolicy,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 999,
            seed: 0,
            ci_level: 0.95,
            zero_policy: ZeroPolicy::default(),
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("need at least one replicate".to_string()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidConfig(alloc::format!("ci level {} outside (0, 1)", self.ci_level)));
        }
        match self.zero_policy {
            ZeroPolicy::Redraw { max_attempts: 0 } => {
                Err(Error::InvalidConfig("redraw policy needs at least one attempt".to_string()))
            }
            ZeroPolicy::Smooth(s) if !(s.is_finite() && s > 0.0) => {
                Err(Error::InvalidConfig(alloc::format!("smoothing {s} must be positive")))
            }
            _ => Ok(()),
        }
    }

    /// `(1 - level) / 2` and `1 - (1 - level) / 2`.
    pub fn quantiles(&self) -> (f64, f64) {
        let a = (1.0 - self.ci_level) / 2.0;
        (a, 1.0 - a)
    }
}

/// Generator for replicate `replicate`, cell `cell`.
pub fn cell_rng(seed: u64, replicate: u64, cell: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((replicate << 32) | (cell & 0xffff_ffff));
    rng
}

/// `Multinomial(n, shares)` by sequential conditional binomials.
pub fn draw_multinomial<R: rand::Rng + ?Sized>(rng: &mut R, n: u64, shares: &[f64]) -> Vec<u64> {
    let mut out = alloc::vec![0u64; shares.len()];
    let mut left = n;
    let mut mass = 1.0f64;
    let last = shares.len() - 1;
    for (k, &p) in shares.iter().enumerate() {
        if k == last || left == 0 {
            out[k] = left;
            left = 0;
            continue;
        }
        let cond = (p / mass).clamp(0.0, 1.0);
        let x = Binomial::new(left, cond).expect("probability clamped to [0, 1]").sample(rng);
        out[k] = x;
        left -= x;
        mass -= p;
    }
    out
}

/// Linear interpolation between order statistics at position `q·(n-1)`.
pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidConfig(alloc::format!("quantile {q} outside [0, 1]")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(percentile_sorted(&v, q))
}

fn percentile_sorted(v: &[f64], q: f64) -> f64 {
    let h = q * (v.len() - 1) as f64;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Draws replicate panels from a fitted panel.
#[derive(Clone, Debug)]
pub struct Resampler<'a> {
    panel: &'a PanelDataset,
    shares: Vec<Composition>,
    totals: Vec<u64>,
    rounded: bool,
    config: BootstrapConfig,
}

impl<'a> Resampler<'a> {
    pub fn new(panel: &'a PanelDataset, config: BootstrapConfig) -> Result<Self> {
        config.validate()?;
        let mut rounded = false;
        let mut totals = Vec::with_capacity(panel.cell_count());
        let mut shares = Vec::with_capacity(panel.cell_count());
        for (addr, q) in panel.cells() {
            let s = q.total();
            let n = libm::round(s);
            if n < 1.0 {
                return Err(Error::InvalidConfig(alloc::format!(
                    "cell ({}, {}) has total {s}, which rounds to zero",
                    addr.group, addr.period
                )));
            }
            rounded |= n != s;
            totals.push(n as u64);
            shares.push(simplex::closure(q));
        }
        Ok(Self {
            panel,
            shares,
            totals,
            rounded,
            config,
        })
    }

    /// Whether any observed total was not an integer.
    pub fn rounded_totals(&self) -> bool {
        self.rounded
    }

    pub fn config(&self) -> &BootstrapConfig {
        &self.config
    }

    /// Replicate panel `b`.
    pub fn replicate(&self, b: usize) -> Result<PanelDataset> {
        let mut rngs: Vec<ChaCha8Rng> = (0..self.shares.len())
            .map(|c| cell_rng(self.config.seed, b as u64, c as u64))
            .collect();
        let cats = self.panel.categories();
        let attempts = match self.config.zero_policy {
            ZeroPolicy::Redraw { max_attempts } => max_attempts + 1,
            ZeroPolicy::Smooth(_) => 1,
        };
        'attempt: for _ in 0..attempts {
            let mut cells = Vec::with_capacity(self.shares.len());
            for ((rng, pi), &n) in rngs.iter_mut().zip(&self.shares).zip(&self.totals) {
                let draw = draw_multinomial(rng, n, pi.shares());
                let mut values: Vec<f64> = draw.iter().map(|&x| x as f64).collect();
                if values.contains(&0.0) {
                    match self.config.zero_policy {
                        ZeroPolicy::Redraw { .. } => continue 'attempt,
                        ZeroPolicy::Smooth(s) => values.iter_mut().for_each(|v| *v += s),
                    }
                }
                cells.push(QuantityVector::new(cats.clone(), values)?);
            }
            return self.panel.with_cells(cells);
        }
        Err(Error::ZeroReplicateFailure {
            replicate: b,
            attempts: attempts - 1,
        })
    }

    /// Scalars of replicate `b` under `estimate`.
    pub fn replicate_scalars<F>(&self, b: usize, estimate: &F) -> Result<Vec<f64>>
    where
        F: Fn(&PanelDataset) -> Result<Vec<f64>>,
    {
        estimate(&self.replicate(b)?)
    }
}

/// Point estimate with percentile intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectEstimate {
    pub estimator: String,
    pub names: Vec<String>,
    pub point: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub config: BootstrapConfig,
    pub rounded_totals: bool,
    /// One row per replicate, in replicate order.
    pub replicates: Vec<Vec<f64>>,
}

/// Per-scalar percentile intervals over replicate rows.
pub fn percentile_intervals(replicates: &[Vec<f64>], level: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let first = replicates.first().ok_or(Error::EmptySample)?;
    let a = (1.0 - level) / 2.0;
    let mut lower = Vec::with_capacity(first.len());
    let mut upper = Vec::with_capacity(first.len());
    for j in 0..first.len() {
        let mut col: Vec<f64> = replicates.iter().map(|r| r[j]).collect();
        col.sort_by(f64::total_cmp);
        lower.push(percentile_sorted(&col, a));
        upper.push(percentile_sorted(&col, 1.0 - a));
    }
    Ok((lower, upper))
}

/// Assembles the estimate once replicate rows are available, however they
/// were computed.
pub fn summarize(
    target: &Target,
    names: Vec<String>,
    point: Vec<f64>,
    replicates: Vec<Vec<f64>>,
    resampler: &Resampler<'_>,
) -> Result<EffectEstimate> {
    let (lower, upper) = percentile_intervals(&replicates, resampler.config.ci_level)?;
    Ok(EffectEstimate {
        estimator: target.name(),
        names,
        point,
        lower,
        upper,
        config: resampler.config,
        rounded_totals: resampler.rounded,
        replicates,
    })
}

/// Estimators the bootstrap can wrap.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    TwoByTwo,
    /// Weighted-share aggregation; quantity-based GTTs.
    Stratified,
    StaggeredCell {
        cohort: i64,
        period: i64,
        strategy: ControlStrategy,
    },
}

impl Target {
    pub fn name(&self) -> String {
        match self {
            Target::TwoByTwo => "2x2".to_string(),
            Target::Stratified => "stratified".to_string(),
            Target::StaggeredCell { cohort, period, strategy } => {
                alloc::format!("staggered(g={cohort}, t={period}, {})", strategy.name())
            }
        }
    }

    /// Scalar labels: `gtt[c]` per category, `gtt_total`, `ctt[c]` per category.
    pub fn names(&self, panel: &PanelDataset) -> Vec<String> {
        let labels = panel.categories().labels();
        let mut out: Vec<String> = labels.iter().map(|c| alloc::format!("gtt[{c}]")).collect();
        out.push("gtt_total".to_string());
        out.extend(labels.iter().map(|c| alloc::format!("ctt[{c}]")));
        out
    }

    pub fn scalars(&self, panel: &PanelDataset) -> Result<Vec<f64>> {
        match self {
            Target::TwoByTwo => Ok(estimator::estimate_2x2(panel)?.scalars()),
            Target::Stratified => Ok(estimator::estimate_stratified(panel)?.scalars()),
            Target::StaggeredCell { cohort, period, strategy } => {
                let sp = StaggeredPanel::from_panel(panel)?;
                let cf = match strategy {
                    ControlStrategy::NeverTreated => sp.counterfactual_never_treated(*cohort, *period)?,
                    ControlStrategy::NotYetTreatedPooled | ControlStrategy::NotYetTreatedEach => sp
                        .counterfactual_not_yet_treated(
                            *cohort,
                            *period,
                            &crate::staggered::NotYetControl::Pooled,
                        )?,
                };
                let observed = sp.quantities(Some(*cohort), *period)?;
                Ok(estimator::effects(observed, cf)?.scalars())
            }
        }
    }
}

/// Sequential bootstrap.
pub fn bootstrap(panel: &PanelDataset, target: &Target, config: BootstrapConfig) -> Result<EffectEstimate> {
    let point = target.scalars(panel)?;
    let resampler = Resampler::new(panel, config)?;
    let estimate = |p: &PanelDataset| target.scalars(p);
    let replicates = (0..config.replicates)
        .map(|b| resampler.replicate_scalars(b, &estimate))
        .collect::<Result<Vec<_>>>()?;
    summarize(target, target.names(panel), point, replicates, &resampler)
}
