//! Partial identification when parallel growths hold only approximately.
//!
//! The post-period log-gap between treated and control in each category is
//! assumed to lie between the smallest and largest weighted pre-period
//! log-gaps, `ω_t · log(q_{1,t}/q_{0,t})` for `t ≤ 0`. That yields per-category
//! bounds `[b_min, b_max]` on the counterfactual quantities, from which GTT
//! intervals and the CTT identified set follow.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimator::treated_and_control;
use crate::math::{exp, ln, pow};
use crate::panel::PanelDataset;
use crate::simplex::{self, Categories, Composition, QuantityVector};

/// Which pre-periods enter the hull and with what weight.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightScheme {
    /// `ω_t = 1` for the `last` most recent pre-periods (all when `None`).
    Uniform { last: Option<usize> },
    /// `ω_t = rho^|t|`, `rho ∈ (0, 1]`.
    Decay { rho: f64 },
    /// Listed periods only.
    Explicit(Vec<(i64, f64)>),
}

impl Default for WeightScheme {
    fn default() -> Self {
        WeightScheme::Uniform { last: None }
    }
}

impl WeightScheme {
    /// Resolves the scheme against the available pre-periods (ascending).
    /// Excluded periods are dropped rather than given a zero weight.
    pub fn resolve(&self, pre_periods: &[i64]) -> Result<Vec<(i64, f64)>> {
        if pre_periods.is_empty() {
            return Err(Error::NoPrePeriods);
        }
        let out: Vec<(i64, f64)> = match self {
            WeightScheme::Uniform { last } => {
                let n = last.unwrap_or(pre_periods.len());
                if n == 0 {
                    return Err(Error::InvalidWeights("uniform(last=0) selects no period".to_string()));
                }
                let skip = pre_periods.len().saturating_sub(n);
                pre_periods[skip..].iter().map(|&t| (t, 1.0)).collect()
            }
            WeightScheme::Decay { rho } => {
                if !(*rho > 0.0 && *rho <= 1.0) {
                    return Err(Error::InvalidWeights(alloc::format!("decay rate {rho} outside (0, 1]")));
                }
                pre_periods
                    .iter()
                    .map(|&t| (t, pow(*rho, t.unsigned_abs() as f64)))
                    .collect()
            }
            WeightScheme::Explicit(list) => {
                let mut out = Vec::with_capacity(list.len());
                for &(t, w) in list {
                    if !pre_periods.contains(&t) {
                        return Err(Error::InvalidWeights(alloc::format!("period {t} is not a pre-period")));
                    }
                    if !(w.is_finite() && w > 0.0) {
                        return Err(Error::InvalidWeights(alloc::format!("weight {w} for period {t} must be positive")));
                    }
                    if out.iter().any(|&(s, _)| s == t) {
                        return Err(Error::InvalidWeights(alloc::format!("period {t} listed twice")));
                    }
                    out.push((t, w));
                }
                out.sort_by_key(|&(t, _)| t);
                out
            }
        };
        if out.is_empty() {
            return Err(Error::NoPrePeriods);
        }
        Ok(out)
    }
}

/// Per-category counterfactual bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct CategoryBounds {
    pub categories: Categories,
    /// Periods and weights that entered the min/max.
    pub weights: Vec<(i64, f64)>,
    pub b_min: Vec<f64>,
    pub b_max: Vec<f64>,
}

struct Design {
    treated: usize,
    control: usize,
    pre_periods: Vec<i64>,
    post: usize,
}

fn design(panel: &PanelDataset) -> Result<Design> {
    if panel.is_stratified() {
        return Err(Error::BadLayout("bounds need an unstratified panel".to_string()));
    }
    let (treated, control) = treated_and_control(panel)?;
    let post = panel
        .period_index(1)
        .ok_or_else(|| Error::BadLayout("period 1 missing".to_string()))?;
    let pre_periods: Vec<i64> = panel.periods().iter().copied().filter(|&t| t <= 0).collect();
    if pre_periods.is_empty() {
        return Err(Error::NoPrePeriods);
    }
    Ok(Design {
        treated,
        control,
        pre_periods,
        post,
    })
}

/// `b_min(c_k) = exp(min_t ω_t log(q_{1,t}/q_{0,t}) + log q_{0,1})`, and the
/// same with `max` for `b_max`.
pub fn category_bounds(panel: &PanelDataset, scheme: &WeightScheme) -> Result<CategoryBounds> {
    let d = design(panel)?;
    let weights = scheme.resolve(&d.pre_periods)?;
    let p = panel.categories().len();
    let mut lo = alloc::vec![f64::INFINITY; p];
    let mut hi = alloc::vec![f64::NEG_INFINITY; p];
    for &(t, w) in &weights {
        let ti = panel.period_index(t).expect("resolved period exists");
        let q1 = panel.cell(d.treated, ti, 0).values();
        let q0 = panel.cell(d.control, ti, 0).values();
        for k in 0..p {
            let gap = w * (ln(q1[k]) - ln(q0[k]));
            lo[k] = lo[k].min(gap);
            hi[k] = hi[k].max(gap);
        }
    }
    let anchor = panel.cell(d.control, d.post, 0).values();
    let b_min = (0..p).map(|k| exp(lo[k] + ln(anchor[k]))).collect();
    let b_max = (0..p).map(|k| exp(hi[k] + ln(anchor[k]))).collect();
    Ok(CategoryBounds {
        categories: panel.categories().clone(),
        weights,
        b_min,
        b_max,
    })
}

/// The set of CTTs compatible with the bounds.
///
/// Counterfactual quantities range over the box `∏_k [b_min_k, b_max_k]`;
/// their closure `s` ranges over its image in the simplex and the CTT is
/// `π^I ⊖ s`. In log-odds coordinates against a baseline `b` the image is
/// `r_k = x_k - x_b` with `x` in the log box, so the baseline coordinate
/// acts as a free anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct CttIdentifiedSet {
    observed_shares: Composition,
    log_lower: Vec<f64>,
    log_upper: Vec<f64>,
}

impl CttIdentifiedSet {
    pub fn new(observed_shares: Composition, bounds: &CategoryBounds) -> Result<Self> {
        observed_shares.categories().ensure_same(&bounds.categories)?;
        Ok(Self {
            observed_shares,
            log_lower: bounds.b_min.iter().map(|&b| ln(b)).collect(),
            log_upper: bounds.b_max.iter().map(|&b| ln(b)).collect(),
        })
    }

    pub fn categories(&self) -> &Categories {
        self.observed_shares.categories()
    }

    /// `[log b_min(c_k), log b_max(c_k)]` for every category.
    pub fn log_box(&self) -> Vec<(f64, f64)> {
        self.log_lower.iter().copied().zip(self.log_upper.iter().copied()).collect()
    }

    /// Range of each log-odds coordinate `r_k = x_k - x_b` over the box.
    pub fn log_odds_ranges(&self, baseline: usize) -> Result<Vec<(f64, f64)>> {
        let p = self.log_lower.len();
        if baseline >= p {
            return Err(Error::BadBaseline { index: baseline, len: p });
        }
        Ok((0..p)
            .filter(|&k| k != baseline)
            .map(|k| {
                (
                    self.log_lower[k] - self.log_upper[baseline],
                    self.log_upper[k] - self.log_lower[baseline],
                )
            })
            .collect())
    }

    /// Whether `ctt` is in the set, allowing `tol` slack in log space.
    ///
    /// `s = π^I ⊖ ctt` is attainable iff some shift `u` puts `log s + u`
    /// inside the log box.
    pub fn contains(&self, ctt: &Composition, tol: f64) -> Result<bool> {
        let s = simplex::comp_diff(&self.observed_shares, ctt)?;
        let ls = s.log_shares();
        let lo = ls
            .iter()
            .zip(&self.log_lower)
            .map(|(x, l)| l - x)
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = ls
            .iter()
            .zip(&self.log_upper)
            .map(|(x, h)| h - x)
            .fold(f64::INFINITY, f64::min);
        Ok(lo <= hi + tol)
    }

    /// `[min, max]` of each counterfactual share over the box. Share `k` is
    /// largest with `q_k` at its upper bound and all others at their lower
    /// bounds, and smallest at the opposite corner.
    pub fn share_envelopes(&self) -> Vec<(f64, f64)> {
        corner_envelopes(&self.log_lower, &self.log_upper)
    }

    /// `[min, max]` of each CTT share. Dividing by the counterfactual flips
    /// which corner is extreme.
    pub fn ctt_envelopes(&self) -> Vec<(f64, f64)> {
        let obs = self.observed_shares.log_shares();
        let lo: Vec<f64> = obs.iter().zip(&self.log_upper).map(|(o, u)| o - u).collect();
        let hi: Vec<f64> = obs.iter().zip(&self.log_lower).map(|(o, l)| o - l).collect();
        corner_envelopes(&lo, &hi)
    }
}

/// Share extremes of `closure(exp(x))` over the box `lo ≤ x ≤ hi`.
fn corner_envelopes(lo: &[f64], hi: &[f64]) -> Vec<(f64, f64)> {
    let p = lo.len();
    let share_at = |k: usize, own: &[f64], rest: &[f64]| {
        let mut xs: Vec<f64> = rest.to_vec();
        xs[k] = own[k];
        let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = xs.iter().map(|&x| exp(x - m)).sum();
        exp(xs[k] - m) / denom
    };
    (0..p).map(|k| (share_at(k, lo, hi), share_at(k, hi, lo))).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsResult {
    pub bounds: CategoryBounds,
    /// `q^I_{1,1}`
    pub observed: QuantityVector,
    pub gtt_category_intervals: Vec<(f64, f64)>,
    pub gtt_total_interval: (f64, f64),
    pub ctt_set: CttIdentifiedSet,
}

impl BoundsResult {
    pub fn share_envelopes(&self) -> Vec<(f64, f64)> {
        self.ctt_set.share_envelopes()
    }
}

/// `GTT(c_k) ∈ [q^I/b_max - 1, q^I/b_min - 1]` per category and
/// `[Σ q^I / Σ b_max - 1, Σ q^I / Σ b_min - 1]` in total.
pub fn gtt_intervals(observed: &QuantityVector, bounds: &CategoryBounds) -> Result<(Vec<(f64, f64)>, (f64, f64))> {
    observed.categories().ensure_same(&bounds.categories)?;
    let per = observed
        .values()
        .iter()
        .zip(bounds.b_min.iter().zip(&bounds.b_max))
        .map(|(qi, (lo, hi))| (qi / hi - 1.0, qi / lo - 1.0))
        .collect();
    let s = observed.total();
    let smin: f64 = bounds.b_min.iter().sum();
    let smax: f64 = bounds.b_max.iter().sum();
    Ok((per, (s / smax - 1.0, s / smin - 1.0)))
}

/// Bounds, GTT intervals and the CTT identified set in one pass.
pub fn estimate_bounds(panel: &PanelDataset, scheme: &WeightScheme) -> Result<BoundsResult> {
    let bounds = category_bounds(panel, scheme)?;
    let d = design(panel)?;
    let observed = panel.cell(d.treated, d.post, 0).clone();
    let (gtt_category_intervals, gtt_total_interval) = gtt_intervals(&observed, &bounds)?;
    let ctt_set = CttIdentifiedSet::new(simplex::closure(&observed), &bounds)?;
    Ok(BoundsResult {
        bounds,
        observed,
        gtt_category_intervals,
        gtt_total_interval,
        ctt_set,
    })
}
