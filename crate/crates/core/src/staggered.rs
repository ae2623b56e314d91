//! Staggered adoption: groups enter treatment at different periods and stay
//! treated.
//!
//! Groups sharing a first-treatment period form a cohort whose quantities are
//! the sums over its members. Counterfactuals for cohort `g` at `t ≥ g` carry
//! the cohort's last untreated quantities `q_{g,g-1}` forward along a control
//! growth path: the never-treated pool, or a not-yet-treated cohort `s` with
//! `t < s ≤ ḡ`, where `ḡ` is the last first-treatment period.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimator::{counterfactual_quantities, effects, CodidResult};
use crate::math::{exp, ln};
use crate::panel::PanelDataset;
use crate::simplex::{Categories, Composition, QuantityVector};

/// How not-yet-treated controls enter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ControlStrategy {
    NeverTreated,
    /// One row per valid control cohort `s`; no aggregation.
    NotYetTreatedEach,
    /// Mean log-growth over all valid `s`.
    #[default]
    NotYetTreatedPooled,
}

impl ControlStrategy {
    pub fn name(self) -> &'static str {
        match self {
            ControlStrategy::NeverTreated => "never_treated",
            ControlStrategy::NotYetTreatedEach => "not_yet_treated",
            ControlStrategy::NotYetTreatedPooled => "pooled",
        }
    }
}

/// Control used for a single not-yet-treated counterfactual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotYetControl {
    Cohort(i64),
    Pooled,
}

/// Control actually used in a row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ControlUsed {
    NeverTreated,
    NotYetTreated(i64),
    Pooled(Vec<i64>),
}

/// Cohort-level view of a staggered panel.
#[derive(Clone, Debug)]
pub struct StaggeredPanel {
    categories: Categories,
    periods: Vec<i64>,
    /// cohort → quantities per period
    cohorts: BTreeMap<i64, Vec<QuantityVector>>,
    never: Option<Vec<QuantityVector>>,
}

fn sum_groups(panel: &PanelDataset, members: &[usize], ti: usize) -> Result<QuantityVector> {
    let p = panel.categories().len();
    let mut acc = alloc::vec![0.0; p];
    for &g in members {
        for (a, v) in acc.iter_mut().zip(panel.cell(g, ti, 0).values()) {
            *a += v;
        }
    }
    QuantityVector::new(panel.categories().clone(), acc)
}

impl StaggeredPanel {
    pub fn from_panel(panel: &PanelDataset) -> Result<Self> {
        if panel.is_stratified() {
            return Err(Error::BadLayout("staggered estimation needs an unstratified panel".to_string()));
        }
        let mut members: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        let mut never = Vec::new();
        for (i, g) in panel.groups().iter().enumerate() {
            match g.first_treated {
                Some(t) => members.entry(t).or_default().push(i),
                None => never.push(i),
            }
        }
        if members.is_empty() {
            return Err(Error::BadLayout("no treated cohort".to_string()));
        }
        let path = |m: &[usize]| -> Result<Vec<QuantityVector>> {
            (0..panel.periods().len()).map(|ti| sum_groups(panel, m, ti)).collect()
        };
        let cohorts = members
            .iter()
            .map(|(&g, m)| Ok((g, path(m)?)))
            .collect::<Result<_>>()?;
        let never = if never.is_empty() { None } else { Some(path(&never)?) };
        Ok(Self {
            categories: panel.categories().clone(),
            periods: panel.periods().to_vec(),
            cohorts,
            never,
        })
    }

    pub fn categories(&self) -> &Categories {
        &self.categories
    }

    pub fn periods(&self) -> &[i64] {
        &self.periods
    }

    /// First-treatment periods, ascending.
    pub fn cohorts(&self) -> impl Iterator<Item = i64> + '_ {
        self.cohorts.keys().copied()
    }

    /// `ḡ`, the last first-treatment period.
    pub fn last_cohort(&self) -> i64 {
        *self.cohorts.keys().next_back().expect("at least one cohort")
    }

    pub fn has_never_treated(&self) -> bool {
        self.never.is_some()
    }

    fn period_index(&self, t: i64) -> Result<usize> {
        self.periods
            .binary_search(&t)
            .map_err(|_| Error::BadPeriod(alloc::format!("period {t} not in panel")))
    }

    fn path(&self, g: i64) -> Result<&[QuantityVector]> {
        self.cohorts.get(&g).map(Vec::as_slice).ok_or(Error::UnknownCohort(g))
    }

    /// Cohort (or never-treated pool when `None`) quantities at period `t`.
    pub fn quantities(&self, cohort: Option<i64>, t: i64) -> Result<&QuantityVector> {
        let ti = self.period_index(t)?;
        match cohort {
            Some(g) => Ok(&self.path(g)?[ti]),
            None => Ok(&self.never.as_ref().ok_or(Error::NoNeverTreatedGroup)?[ti]),
        }
    }

    /// `(index of g-1, index of t)` after checking `t ≥ g`.
    fn pre_and_post(&self, g: i64, t: i64) -> Result<(usize, usize)> {
        self.path(g)?;
        if t < g {
            return Err(Error::BadPeriod(alloc::format!("period {t} precedes cohort {g}")));
        }
        let pre = self
            .period_index(g - 1)
            .map_err(|_| Error::BadPeriod(alloc::format!("period {} (before cohort {g}) not in panel", g - 1)))?;
        Ok((pre, self.period_index(t)?))
    }

    /// `q_{g,g-1} · q_{∞,t} / q_{∞,g-1}`.
    pub fn counterfactual_never_treated(&self, g: i64, t: i64) -> Result<QuantityVector> {
        let never = self.never.as_ref().ok_or(Error::NoNeverTreatedGroup)?;
        let (pre, post) = self.pre_and_post(g, t)?;
        counterfactual_quantities(&self.cohorts[&g][pre], &never[pre], &never[post])
    }

    /// Cohorts `s` with `t < s ≤ ḡ`, available only for `g < ḡ`.
    pub fn valid_controls(&self, g: i64, t: i64) -> Vec<i64> {
        let last = self.last_cohort();
        if g >= last {
            return Vec::new();
        }
        self.cohorts.keys().copied().filter(|&s| t < s && s <= last).collect()
    }

    /// `q_{g,g-1} · q_{s,t} / q_{s,g-1}` for one `s`, or with the log-growth
    /// averaged over every valid `s`.
    pub fn counterfactual_not_yet_treated(&self, g: i64, t: i64, control: &NotYetControl) -> Result<QuantityVector> {
        let (pre, post) = self.pre_and_post(g, t)?;
        let valid = self.valid_controls(g, t);
        let used: Vec<i64> = match control {
            NotYetControl::Cohort(s) if valid.contains(s) => alloc::vec![*s],
            NotYetControl::Pooled if !valid.is_empty() => valid,
            _ => return Err(Error::NoValidControlCohort { cohort: g, period: t }),
        };
        let p = self.categories.len();
        let mut growth = alloc::vec![0.0; p];
        for s in &used {
            let path = &self.cohorts[s];
            for (k, gr) in growth.iter_mut().enumerate() {
                *gr += ln(path[post].values()[k]) - ln(path[pre].values()[k]);
            }
        }
        let n = used.len() as f64;
        let base = self.cohorts[&g][pre].values();
        let values = (0..p).map(|k| exp(ln(base[k]) + growth[k] / n)).collect();
        QuantityVector::new(self.categories.clone(), values)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CohortEffect {
    pub cohort: i64,
    pub period: i64,
    pub event_time: i64,
    pub control: ControlUsed,
    pub observed_q: QuantityVector,
    /// Cohort total at `g - 1`, used as aggregation weight.
    pub weight: f64,
    pub effect: CodidResult,
}

/// Cohort-weighted average of per-(g,t) effects sharing a key.
///
/// GTTs are averaged as `log(1 + GTT)` and mapped back; CTTs are averaged in
/// log-ratio coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateEffect {
    /// Event time `t - g` or calendar period `t`.
    pub key: i64,
    pub cohorts: Vec<i64>,
    pub weight: f64,
    pub gtt_per_category: Vec<f64>,
    pub gtt_total: f64,
    pub ctt: Composition,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaggeredResult {
    pub strategy: ControlStrategy,
    pub effects: Vec<CohortEffect>,
    /// Empty for [`ControlStrategy::NotYetTreatedEach`].
    pub event_time: Vec<AggregateEffect>,
    pub calendar_time: Vec<AggregateEffect>,
}

fn aggregate<'a>(key: i64, rows: impl Iterator<Item = &'a CohortEffect>) -> Result<AggregateEffect> {
    let rows: Vec<&CohortEffect> = rows.collect();
    let first = rows.first().ok_or(Error::EmptySample)?;
    let cats = first.effect.ctt.categories().clone();
    let p = cats.len();
    let mut weight = 0.0;
    let mut gtt = alloc::vec![0.0; p];
    let mut total = 0.0;
    let mut ctt = alloc::vec![0.0; p];
    for r in &rows {
        let w = r.weight;
        weight += w;
        for k in 0..p {
            gtt[k] += w * ln(1.0 + r.effect.gtt_per_category[k]);
            ctt[k] += w * ln(r.effect.ctt.shares()[k]);
        }
        total += w * ln(1.0 + r.effect.gtt_total);
    }
    let mut cohorts: Vec<i64> = rows.iter().map(|r| r.cohort).collect();
    cohorts.dedup();
    Ok(AggregateEffect {
        key,
        cohorts,
        weight,
        gtt_per_category: gtt.iter().map(|g| exp(g / weight) - 1.0).collect(),
        gtt_total: exp(total / weight) - 1.0,
        ctt: Composition::from_log_weights(cats, &ctt.iter().map(|c| c / weight).collect::<Vec<_>>())?,
    })
}

fn aggregate_by(effects: &[CohortEffect], key: impl Fn(&CohortEffect) -> i64) -> Result<Vec<AggregateEffect>> {
    let mut keys: Vec<i64> = effects.iter().map(&key).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.into_iter()
        .map(|k| aggregate(k, effects.iter().filter(|e| key(e) == k)))
        .collect()
}

/// Every estimable `(g, t)` effect with `t ≥ g`, plus event-time and
/// calendar-time aggregates.
///
/// With not-yet-treated controls, `(g, t)` pairs without a valid control are
/// skipped; the last cohort never has one.
pub fn cohort_effects(panel: &PanelDataset, strategy: ControlStrategy) -> Result<StaggeredResult> {
    let sp = StaggeredPanel::from_panel(panel)?;
    cohort_effects_on(&sp, strategy)
}

pub fn cohort_effects_on(sp: &StaggeredPanel, strategy: ControlStrategy) -> Result<StaggeredResult> {
    if strategy == ControlStrategy::NeverTreated && !sp.has_never_treated() {
        return Err(Error::NoNeverTreatedGroup);
    }
    let mut rows = Vec::new();
    for g in sp.cohorts() {
        let pre = sp.period_index(g - 1).map_err(|_| {
            Error::BadPeriod(alloc::format!("period {} (before cohort {g}) not in panel", g - 1))
        })?;
        let weight = sp.cohorts[&g][pre].total();
        for &t in sp.periods.iter().filter(|&&t| t >= g) {
            let observed = sp.quantities(Some(g), t)?.clone();
            let mut push = |control: ControlUsed, cf: QuantityVector| -> Result<()> {
                rows.push(CohortEffect {
                    cohort: g,
                    period: t,
                    event_time: t - g,
                    control,
                    effect: effects(&observed, cf)?,
                    observed_q: observed.clone(),
                    weight,
                });
                Ok(())
            };
            match strategy {
                ControlStrategy::NeverTreated => {
                    push(ControlUsed::NeverTreated, sp.counterfactual_never_treated(g, t)?)?;
                }
                ControlStrategy::NotYetTreatedEach => {
                    for s in sp.valid_controls(g, t) {
                        let cf = sp.counterfactual_not_yet_treated(g, t, &NotYetControl::Cohort(s))?;
                        push(ControlUsed::NotYetTreated(s), cf)?;
                    }
                }
                ControlStrategy::NotYetTreatedPooled => {
                    let valid = sp.valid_controls(g, t);
                    if !valid.is_empty() {
                        let cf = sp.counterfactual_not_yet_treated(g, t, &NotYetControl::Pooled)?;
                        push(ControlUsed::Pooled(valid), cf)?;
                    }
                }
            }
        }
    }
    let (event_time, calendar_time) = if strategy == ControlStrategy::NotYetTreatedEach {
        (Vec::new(), Vec::new())
    } else {
        (aggregate_by(&rows, |e| e.event_time)?, aggregate_by(&rows, |e| e.period)?)
    };
    Ok(StaggeredResult {
        strategy,
        effects: rows,
        event_time,
        calendar_time,
    })
}
