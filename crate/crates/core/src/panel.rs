//! Group × period × category (× stratum) count panels.
//!
//! A [`PanelDataset`] is built from long-format [`Record`]s and is always
//! balanced, strictly positive (or explicitly smoothed) and canonically
//! ordered: groups and strata sort by id, periods ascending, categories by
//! label unless an explicit order is supplied. Two record sets that differ
//! only in row order therefore produce equal datasets.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::simplex::{Categories, QuantityVector};

/// Tolerance on `Σ P(X=x) = 1`.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// One long-format row: `group,time,category,count[,stratum,stratum_weight]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub group: String,
    pub period: i64,
    pub category: String,
    pub count: f64,
    pub stratum: Option<String>,
    pub stratum_weight: Option<f64>,
}

impl Record {
    pub fn new(group: impl Into<String>, period: i64, category: impl Into<String>, count: f64) -> Self {
        Self {
            group: group.into(),
            period,
            category: category.into(),
            count,
            stratum: None,
            stratum_weight: None,
        }
    }

    pub fn in_stratum(mut self, stratum: impl Into<String>, weight: Option<f64>) -> Self {
        self.stratum = Some(stratum.into());
        self.stratum_weight = weight;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PanelOptions {
    /// Pseudo-count added to every category of a cell containing a zero.
    pub smoothing: Option<f64>,
    /// Explicit category order; defaults to lexicographic.
    pub category_order: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Group {
    pub id: String,
    /// First treated period; `None` for never-treated (or plain control) groups.
    pub first_treated: Option<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stratum {
    pub id: String,
    /// `P(X = x)`, when known.
    pub weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CellAddress {
    pub group: String,
    pub period: i64,
    pub stratum: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IssueKind {
    Missing,
    NonPositive(f64),
    Duplicate,
}

impl IssueKind {
    pub fn reason(&self) -> &'static str {
        match self {
            IssueKind::Missing => "missing",
            IssueKind::NonPositive(_) => "non-positive",
            IssueKind::Duplicate => "duplicate",
        }
    }
}

/// A common-support violation at a specific `(group, period, category)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportIssue {
    pub group: String,
    pub period: i64,
    pub stratum: Option<String>,
    pub category: String,
    pub kind: IssueKind,
}

type Key = (String, i64, Option<String>, String);

/// Lists every cell that breaks positivity or category consistency.
///
/// The report is empty iff [`PanelDataset::from_records`] would accept the
/// rows without smoothing.
pub fn validate_common_support(records: &[Record]) -> Vec<SupportIssue> {
    let mut issues = Vec::new();
    let mut seen: BTreeMap<Key, usize> = BTreeMap::new();
    for r in records {
        let key = (r.group.clone(), r.period, r.stratum.clone(), r.category.clone());
        *seen.entry(key).or_default() += 1;
        if r.count.is_nan() || r.count <= 0.0 {
            issues.push(SupportIssue {
                group: r.group.clone(),
                period: r.period,
                stratum: r.stratum.clone(),
                category: r.category.clone(),
                kind: IssueKind::NonPositive(r.count),
            });
        }
    }
    for ((group, period, stratum, category), n) in &seen {
        if *n > 1 {
            issues.push(SupportIssue {
                group: group.clone(),
                period: *period,
                stratum: stratum.clone(),
                category: category.clone(),
                kind: IssueKind::Duplicate,
            });
        }
    }
    let groups: BTreeSet<&String> = records.iter().map(|r| &r.group).collect();
    let periods: BTreeSet<i64> = records.iter().map(|r| r.period).collect();
    let strata: BTreeSet<&Option<String>> = records.iter().map(|r| &r.stratum).collect();
    let categories: BTreeSet<&String> = records.iter().map(|r| &r.category).collect();
    for g in &groups {
        for &t in &periods {
            for s in &strata {
                for c in &categories {
                    let key = ((*g).clone(), t, (*s).clone(), (*c).clone());
                    if !seen.contains_key(&key) {
                        issues.push(SupportIssue {
                            group: (*g).clone(),
                            period: t,
                            stratum: (*s).clone(),
                            category: (*c).clone(),
                            kind: IssueKind::Missing,
                        });
                    }
                }
            }
        }
    }
    issues
}

/// Validated, balanced count panel.
#[derive(Clone, Debug, PartialEq)]
pub struct PanelDataset {
    categories: Categories,
    periods: Vec<i64>,
    groups: Vec<Group>,
    strata: Vec<Stratum>,
    // dense, indexed by (group, period, stratum)
    cells: Vec<QuantityVector>,
    smoothed: Vec<CellAddress>,
    smoothing: Option<f64>,
}

impl PanelDataset {
    pub fn from_records(records: &[Record], options: &PanelOptions) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyPanel);
        }
        let stratified = records[0].stratum.is_some();
        if records.iter().any(|r| r.stratum.is_some() != stratified) {
            return Err(Error::BadLayout(
                "stratum column must be filled on every row or on none".to_string(),
            ));
        }

        let mut table: BTreeMap<Key, f64> = BTreeMap::new();
        for r in records {
            let key = (r.group.clone(), r.period, r.stratum.clone(), r.category.clone());
            if table.insert(key, r.count).is_some() {
                return Err(Error::DuplicateCell {
                    group: r.group.clone(),
                    period: r.period,
                    category: r.category.clone(),
                    stratum: r.stratum.clone(),
                });
            }
        }

        let data_categories: BTreeSet<&String> = records.iter().map(|r| &r.category).collect();
        let labels: Vec<String> = match &options.category_order {
            Some(order) => {
                let wanted: BTreeSet<&String> = order.iter().collect();
                if wanted != data_categories || wanted.len() != order.len() {
                    return Err(Error::InconsistentCategories(alloc::format!(
                        "declared order {order:?} does not match data categories {data_categories:?}"
                    )));
                }
                order.clone()
            }
            None => data_categories.iter().map(|c| (*c).clone()).collect(),
        };
        let categories = Categories::new(labels)?;

        let group_ids: BTreeSet<&String> = records.iter().map(|r| &r.group).collect();
        let periods: Vec<i64> = records
            .iter()
            .map(|r| r.period)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let stratum_ids: Vec<Option<String>> = records
            .iter()
            .map(|r| r.stratum.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();

        if let Some(c) = options.smoothing {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "smoothing pseudo-count must be positive, got {c}"
                )));
            }
        }

        let mut cells = Vec::with_capacity(group_ids.len() * periods.len() * stratum_ids.len());
        let mut smoothed = Vec::new();
        for g in &group_ids {
            for &t in &periods {
                for s in &stratum_ids {
                    let mut values = Vec::with_capacity(categories.len());
                    for c in categories.labels() {
                        let key = ((*g).clone(), t, s.clone(), c.clone());
                        match table.get(&key) {
                            Some(&v) => values.push(v),
                            None => {
                                return Err(Error::UnbalancedPanel {
                                    group: (*g).clone(),
                                    period: t,
                                    category: c.clone(),
                                    stratum: s.clone(),
                                })
                            }
                        }
                    }
                    let offending = values
                        .iter()
                        .position(|&v| !(v > 0.0 && v.is_finite()))
                        .map(|k| (k, values[k]));
                    if let Some((k, v)) = offending {
                        match options.smoothing {
                            Some(c) if v == 0.0 && values.iter().all(|&x| x >= 0.0 && x.is_finite()) => {
                                values.iter_mut().for_each(|x| *x += c);
                                smoothed.push(CellAddress {
                                    group: (*g).clone(),
                                    period: t,
                                    stratum: s.clone(),
                                });
                            }
                            _ => {
                                return Err(Error::NonPositiveCount {
                                    group: (*g).clone(),
                                    period: t,
                                    category: categories.labels()[k].clone(),
                                    value: v,
                                })
                            }
                        }
                    }
                    cells.push(QuantityVector::new(categories.clone(), values)?);
                }
            }
        }

        let strata = if stratified {
            let mut strata = Vec::new();
            for s in stratum_ids.iter().flatten() {
                let mut weight: Option<f64> = None;
                let mut any_missing = false;
                for r in records.iter().filter(|r| r.stratum.as_ref() == Some(s)) {
                    match (r.stratum_weight, weight) {
                        (None, _) => any_missing = true,
                        (Some(w), None) => weight = Some(w),
                        (Some(w), Some(prev)) if w != prev => {
                            return Err(Error::InvalidStratumWeights(alloc::format!(
                                "stratum `{s}` has conflicting weights {prev} and {w}"
                            )))
                        }
                        _ => {}
                    }
                }
                if any_missing && weight.is_some() {
                    return Err(Error::MissingStratumWeight(s.clone()));
                }
                strata.push(Stratum {
                    id: s.clone(),
                    weight,
                });
            }
            let given = strata.iter().filter(|s| s.weight.is_some()).count();
            if given > 0 && given < strata.len() {
                let missing = strata.iter().find(|s| s.weight.is_none()).unwrap();
                return Err(Error::MissingStratumWeight(missing.id.clone()));
            }
            if given == strata.len() {
                check_weights(strata.iter().map(|s| s.weight.unwrap()))?;
            }
            strata
        } else {
            Vec::new()
        };

        Ok(Self {
            categories,
            periods,
            groups: group_ids
                .into_iter()
                .map(|id| Group {
                    id: id.clone(),
                    first_treated: None,
                })
                .collect(),
            strata,
            cells,
            smoothed,
            smoothing: options.smoothing,
        })
    }

    /// Flattens back into long-format records (canonical order).
    pub fn to_records(&self) -> Vec<Record> {
        let mut out = Vec::with_capacity(self.cells.len() * self.categories.len());
        for (gi, g) in self.groups.iter().enumerate() {
            for (ti, &t) in self.periods.iter().enumerate() {
                for si in 0..self.stratum_slots() {
                    let q = self.cell(gi, ti, si);
                    for (c, &v) in self.categories.labels().iter().zip(q.values()) {
                        let mut r = Record::new(g.id.clone(), t, c.clone(), v);
                        if let Some(s) = self.strata.get(si) {
                            r = r.in_stratum(s.id.clone(), s.weight);
                        }
                        out.push(r);
                    }
                }
            }
        }
        out
    }

    pub fn categories(&self) -> &Categories {
        &self.categories
    }

    pub fn periods(&self) -> &[i64] {
        &self.periods
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn is_stratified(&self) -> bool {
        !self.strata.is_empty()
    }

    /// Cells that received the smoothing pseudo-count.
    pub fn smoothed_cells(&self) -> &[CellAddress] {
        &self.smoothed
    }

    pub fn smoothing(&self) -> Option<f64> {
        self.smoothing
    }

    pub(crate) fn stratum_slots(&self) -> usize {
        self.strata.len().max(1)
    }

    pub fn group_index(&self, id: &str) -> Result<usize> {
        self.groups
            .iter()
            .position(|g| g.id == id)
            .ok_or_else(|| Error::UnknownGroup(id.to_string()))
    }

    pub fn period_index(&self, period: i64) -> Option<usize> {
        self.periods.binary_search(&period).ok()
    }

    pub fn stratum_index(&self, id: &str) -> Result<usize> {
        self.strata
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| Error::UnknownStratum(id.to_string()))
    }

    fn slot(&self, group: usize, period: usize, stratum: usize) -> usize {
        (group * self.periods.len() + period) * self.stratum_slots() + stratum
    }

    /// Cell by dense indices; `stratum` is 0 for unstratified panels.
    pub fn cell(&self, group: usize, period: usize, stratum: usize) -> &QuantityVector {
        &self.cells[self.slot(group, period, stratum)]
    }

    /// Cell of an unstratified panel by group id and period value.
    pub fn quantities(&self, group: &str, period: i64) -> Result<&QuantityVector> {
        self.cell_at(&CellAddress {
            group: group.to_string(),
            period,
            stratum: None,
        })
    }

    pub fn cell_at(&self, address: &CellAddress) -> Result<&QuantityVector> {
        let g = self.group_index(&address.group)?;
        let t = self
            .period_index(address.period)
            .ok_or_else(|| Error::BadPeriod(alloc::format!("period {} not in panel", address.period)))?;
        let s = match (&address.stratum, self.is_stratified()) {
            (Some(id), true) => self.stratum_index(id)?,
            (None, false) => 0,
            (Some(id), false) => return Err(Error::UnknownStratum(id.clone())),
            (None, true) => {
                return Err(Error::BadLayout(
                    "stratified panel needs a stratum in the cell address".to_string(),
                ))
            }
        };
        Ok(self.cell(g, t, s))
    }

    /// All cells with their addresses, in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (CellAddress, &QuantityVector)> + '_ {
        let slots = self.stratum_slots();
        let np = self.periods.len();
        self.cells.iter().enumerate().map(move |(i, q)| {
            let s = i % slots;
            let t = (i / slots) % np;
            let g = i / (slots * np);
            (
                CellAddress {
                    group: self.groups[g].id.clone(),
                    period: self.periods[t],
                    stratum: self.strata.get(s).map(|s| s.id.clone()),
                },
                q,
            )
        })
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Same layout, new cell contents (storage order as in [`Self::cells`]).
    pub fn with_cells(&self, cells: Vec<QuantityVector>) -> Result<Self> {
        if cells.len() != self.cells.len() {
            return Err(Error::LengthMismatch {
                expected: self.cells.len(),
                found: cells.len(),
            });
        }
        for c in &cells {
            c.categories().ensure_same(&self.categories)?;
        }
        Ok(Self {
            cells,
            ..self.clone()
        })
    }

    /// Assigns first-treatment periods; groups not listed are never treated.
    ///
    /// Treatment is absorbing, so a group is treated exactly on the suffix of
    /// periods `>= first_treated`. Nobody may be treated in the first period.
    pub fn with_timing(&self, timing: &[(String, Option<i64>)]) -> Result<Self> {
        let mut groups = self.groups.clone();
        for g in &mut groups {
            g.first_treated = None;
        }
        let first = self.periods[0];
        let last = *self.periods.last().unwrap();
        for (id, when) in timing {
            let gi = self.group_index(id)?;
            if let Some(w) = *when {
                if w <= first {
                    return Err(Error::InvalidTiming(alloc::format!(
                        "group `{id}` is treated at or before the first period {first}"
                    )));
                }
                if w > last {
                    return Err(Error::InvalidTiming(alloc::format!(
                        "group `{id}` first treated at {w}, after the last period {last}"
                    )));
                }
            }
            groups[gi].first_treated = *when;
        }
        Ok(Self {
            groups,
            ..self.clone()
        })
    }

    /// Marks a single group as treated from `first_treated` onward.
    pub fn with_treated(&self, group: &str, first_treated: i64) -> Result<Self> {
        self.with_timing(&[(group.to_string(), Some(first_treated))])
    }

    pub fn is_treated(&self, group: usize, period: i64) -> bool {
        self.groups[group].first_treated.is_some_and(|g| period >= g)
    }

    /// Groups with a finite first-treatment period.
    pub fn treated_groups(&self) -> impl Iterator<Item = (usize, &Group)> {
        self.groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.first_treated.is_some())
    }

    pub fn stratum_weights(&self) -> Result<Vec<f64>> {
        self.strata
            .iter()
            .map(|s| s.weight.ok_or_else(|| Error::MissingStratumWeight(s.id.clone())))
            .collect()
    }

    /// Replaces `P(X = x)` with explicit weights, in stratum order.
    pub fn with_stratum_weights(&self, weights: &[f64]) -> Result<Self> {
        if !self.is_stratified() {
            return Err(Error::BadLayout("panel has no strata".to_string()));
        }
        if weights.len() != self.strata.len() {
            return Err(Error::InvalidStratumWeights(alloc::format!(
                "expected {} weights, got {}",
                self.strata.len(),
                weights.len()
            )));
        }
        check_weights(weights.iter().copied())?;
        let mut out = self.clone();
        for (s, &w) in out.strata.iter_mut().zip(weights) {
            s.weight = Some(w);
        }
        Ok(out)
    }

    /// Weights proportional to each stratum's total in the given group and
    /// period (typically the treated group before treatment).
    pub fn with_weights_from_totals(&self, group: &str, period: i64) -> Result<Self> {
        if !self.is_stratified() {
            return Err(Error::BadLayout("panel has no strata".to_string()));
        }
        let gi = self.group_index(group)?;
        let ti = self
            .period_index(period)
            .ok_or_else(|| Error::BadPeriod(alloc::format!("period {period} not in panel")))?;
        let totals: Vec<f64> = (0..self.strata.len())
            .map(|si| self.cell(gi, ti, si).total())
            .collect();
        let sum: f64 = totals.iter().sum();
        let weights: Vec<f64> = totals.iter().map(|t| t / sum).collect();
        self.with_stratum_weights(&weights)
    }

    /// Sub-panel for one covariate level.
    pub fn stratify(&self, stratum: &str) -> Result<Self> {
        let si = self.stratum_index(stratum)?;
        let slots = self.stratum_slots();
        let cells = self
            .cells
            .iter()
            .enumerate()
            .filter(|(i, _)| i % slots == si)
            .map(|(_, q)| q.clone())
            .collect();
        let smoothed = self
            .smoothed
            .iter()
            .filter(|a| a.stratum.as_deref() == Some(stratum))
            .map(|a| CellAddress {
                stratum: None,
                ..a.clone()
            })
            .collect();
        Ok(Self {
            categories: self.categories.clone(),
            periods: self.periods.clone(),
            groups: self.groups.clone(),
            strata: Vec::new(),
            cells,
            smoothed,
            smoothing: self.smoothing,
        })
    }

    /// `Σ_x P(X=x) · q_x` per group and period.
    pub fn weighted_aggregate(&self) -> Result<Self> {
        let weights = self.stratum_weights()?;
        self.combine_strata(|si| weights[si])
    }

    /// Plain sum over strata.
    pub fn pooled(&self) -> Result<Self> {
        self.combine_strata(|_| 1.0)
    }

    fn combine_strata(&self, weight: impl Fn(usize) -> f64) -> Result<Self> {
        if !self.is_stratified() {
            return Ok(self.clone());
        }
        let p = self.categories.len();
        let mut cells = Vec::with_capacity(self.groups.len() * self.periods.len());
        for gi in 0..self.groups.len() {
            for ti in 0..self.periods.len() {
                let mut acc = alloc::vec![0.0; p];
                for si in 0..self.strata.len() {
                    let w = weight(si);
                    for (a, v) in acc.iter_mut().zip(self.cell(gi, ti, si).values()) {
                        *a += w * v;
                    }
                }
                cells.push(QuantityVector::new(self.categories.clone(), acc)?);
            }
        }
        let smoothed = self
            .smoothed
            .iter()
            .map(|a| CellAddress {
                stratum: None,
                ..a.clone()
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(Self {
            categories: self.categories.clone(),
            periods: self.periods.clone(),
            groups: self.groups.clone(),
            strata: Vec::new(),
            cells,
            smoothed,
            smoothing: self.smoothing,
        })
    }
}

fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut sum = 0.0;
    for w in weights {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidStratumWeights(alloc::format!(
                "weight {w} is not positive"
            )));
        }
        sum += w;
    }
    if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(Error::InvalidStratumWeights(alloc::format!(
            "weights sum to {sum}, not 1"
        )));
    }
    Ok(())
}
