//! Random-utility data generator and certifier.
//!
//! Utility of category `k` for group `g` at period `t` is
//! `U = μ_k + log G_k(e^μ) - log G(e^μ) + log S + ε_k` with GEV shocks `ε`
//! generated by `G`, so shares are `e^{μ_k} G_k(e^μ) / G(e^μ)` and
//! `E[U_k] - γ = log q_k` holds exactly. The generator builds population or
//! sampled panels from such specifications; the certifier checks the
//! equivalences between parallel growths, parallel expected utilities and
//! parallel log-odds numerically.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::bootstrap::{cell_rng, draw_multinomial};
use crate::error::{Error, Result};
use crate::math::{exp, ln, log_sum_exp, sqrt};
use crate::panel::{PanelDataset, PanelOptions, Record};
use crate::simplex::{Categories, Composition, QuantityVector};

/// Euler–Mascheroni constant, the mean of a standard Gumbel variable.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// A GEV generating function `G`, homogeneous of degree one, evaluated in
/// logs at `y = e^μ`.
pub trait GeneratingFunction {
    /// `log G(e^μ)`
    fn log_g(&self, mu: &[f64]) -> f64;
    /// `log(y_k G_k(y))` at `y = e^μ`.
    fn log_weighted_partial(&self, mu: &[f64], k: usize) -> f64;
}

/// Choice probabilities `y_k G_k(y) / G(y)`.
pub fn shares_from<G: GeneratingFunction + ?Sized>(g: &G, categories: Categories, mu: &[f64]) -> Result<Composition> {
    if mu.len() != categories.len() {
        return Err(Error::LengthMismatch { expected: categories.len(), found: mu.len() });
    }
    if mu.iter().any(|m| !m.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let lg = g.log_g(mu);
    let shares = (0..mu.len()).map(|k| exp(g.log_weighted_partial(mu, k) - lg)).collect();
    Composition::new(categories, shares)
}

/// Max-shifted softmax.
pub fn logit_shares(categories: Categories, mu: &[f64]) -> Result<Composition> {
    shares_from(&GevFamily::Logit, categories, mu)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Nest {
    pub members: Vec<usize>,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GnlNest {
    /// Allocation `α_jm` of every category to this nest (0 = absent).
    pub alpha: Vec<f64>,
    pub lambda: f64,
}

/// The four closed-form families.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum GevFamily {
    #[default]
    Logit,
    NestedLogit(Vec<Nest>),
    /// Symmetric `λ_rs` for every pair `r < s`; the diagonal is ignored.
    PairedCombinatorial(Vec<Vec<f64>>),
    GeneralizedNested(Vec<GnlNest>),
}

fn check_lambda(l: f64, what: &str) -> Result<()> {
    if l > 0.0 && l <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidNestStructure(alloc::format!("{what} λ = {l} outside (0, 1]")))
    }
}

impl GevFamily {
    pub fn name(&self) -> &'static str {
        match self {
            GevFamily::Logit => "logit",
            GevFamily::NestedLogit(_) => "nested_logit",
            GevFamily::PairedCombinatorial(_) => "pcl",
            GevFamily::GeneralizedNested(_) => "gnl",
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            GevFamily::Logit => Ok(()),
            GevFamily::NestedLogit(nests) => {
                let mut seen = alloc::vec![0usize; p];
                for (m, n) in nests.iter().enumerate() {
                    check_lambda(n.lambda, &alloc::format!("nest {m}"))?;
                    if n.members.is_empty() {
                        return Err(Error::InvalidNestStructure(alloc::format!("nest {m} is empty")));
                    }
                    for &k in &n.members {
                        *seen.get_mut(k).ok_or_else(|| {
                            Error::InvalidNestStructure(alloc::format!("nest {m} names category index {k}"))
                        })? += 1;
                    }
                }
                match seen.iter().position(|&c| c != 1) {
                    Some(k) => Err(Error::InvalidNestStructure(alloc::format!(
                        "category {k} belongs to {} nests, expected exactly one",
                        seen[k]
                    ))),
                    None => Ok(()),
                }
            }
            GevFamily::PairedCombinatorial(lambda) => {
                if lambda.len() != p || lambda.iter().any(|r| r.len() != p) {
                    return Err(Error::InvalidNestStructure(alloc::format!("pair parameters must be {p}×{p}")));
                }
                for r in 0..p {
                    for s in r + 1..p {
                        check_lambda(lambda[r][s], &alloc::format!("pair ({r}, {s})"))?;
                        if lambda[r][s] != lambda[s][r] {
                            return Err(Error::InvalidNestStructure(alloc::format!("pair ({r}, {s}) is not symmetric")));
                        }
                    }
                }
                Ok(())
            }
            GevFamily::GeneralizedNested(nests) => {
                if nests.is_empty() {
                    return Err(Error::InvalidNestStructure("no nests".to_string()));
                }
                for (m, n) in nests.iter().enumerate() {
                    check_lambda(n.lambda, &alloc::format!("nest {m}"))?;
                    if n.alpha.len() != p {
                        return Err(Error::InvalidNestStructure(alloc::format!("nest {m} needs {p} allocations")));
                    }
                    if n.alpha.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
                        return Err(Error::InvalidNestStructure(alloc::format!("nest {m} has a negative allocation")));
                    }
                }
                for k in 0..p {
                    let total: f64 = nests.iter().map(|n| n.alpha[k]).sum();
                    if (total - 1.0).abs() > 1e-9 {
                        return Err(Error::InvalidNestStructure(alloc::format!(
                            "allocations of category {k} sum to {total}, not 1"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn shares(&self, categories: Categories, mu: &[f64]) -> Result<Composition> {
        self.validate(categories.len())?;
        shares_from(self, categories, mu)
    }
}

/// `log Σ_{j ∈ nest} (α_j e^{μ_j})^{1/λ}`, skipping zero allocations.
fn gnl_log_inclusive(n: &GnlNest, mu: &[f64]) -> Option<f64> {
    let terms: Vec<f64> = mu
        .iter()
        .zip(&n.alpha)
        .filter(|(_, a)| **a > 0.0)
        .map(|(m, a)| (ln(*a) + m) / n.lambda)
        .collect();
    (!terms.is_empty()).then(|| log_sum_exp(&terms))
}

fn nl_log_inclusive(n: &Nest, mu: &[f64]) -> f64 {
    let terms: Vec<f64> = n.members.iter().map(|&j| mu[j] / n.lambda).collect();
    log_sum_exp(&terms)
}

/// `log(e^{a/λ} + e^{b/λ})`
fn pair_log_inclusive(a: f64, b: f64, lambda: f64) -> f64 {
    log_sum_exp(&[a / lambda, b / lambda])
}

impl GeneratingFunction for GevFamily {
    fn log_g(&self, mu: &[f64]) -> f64 {
        match self {
            GevFamily::Logit => log_sum_exp(mu),
            GevFamily::NestedLogit(nests) => {
                let t: Vec<f64> = nests.iter().map(|n| n.lambda * nl_log_inclusive(n, mu)).collect();
                log_sum_exp(&t)
            }
            GevFamily::PairedCombinatorial(lambda) => {
                let p = mu.len();
                let mut t = Vec::with_capacity(p * (p - 1) / 2);
                for r in 0..p {
                    for s in r + 1..p {
                        let l = lambda[r][s];
                        t.push(l * pair_log_inclusive(mu[r], mu[s], l));
                    }
                }
                log_sum_exp(&t)
            }
            GevFamily::GeneralizedNested(nests) => {
                let t: Vec<f64> = nests
                    .iter()
                    .filter_map(|n| gnl_log_inclusive(n, mu).map(|i| n.lambda * i))
                    .collect();
                log_sum_exp(&t)
            }
        }
    }

    fn log_weighted_partial(&self, mu: &[f64], k: usize) -> f64 {
        match self {
            GevFamily::Logit => mu[k],
            GevFamily::NestedLogit(nests) => {
                let n = nests.iter().find(|n| n.members.contains(&k)).expect("validated nest structure");
                mu[k] / n.lambda + (n.lambda - 1.0) * nl_log_inclusive(n, mu)
            }
            GevFamily::PairedCombinatorial(lambda) => {
                let t: Vec<f64> = (0..mu.len())
                    .filter(|&j| j != k)
                    .map(|j| {
                        let l = lambda[k][j];
                        mu[k] / l + (l - 1.0) * pair_log_inclusive(mu[k], mu[j], l)
                    })
                    .collect();
                log_sum_exp(&t)
            }
            GevFamily::GeneralizedNested(nests) => {
                // sums over every nest holding k
                let t: Vec<f64> = nests
                    .iter()
                    .filter(|n| n.alpha[k] > 0.0)
                    .map(|n| {
                        let inc = gnl_log_inclusive(n, mu).expect("nest holds k");
                        (ln(n.alpha[k]) + mu[k]) / n.lambda + (n.lambda - 1.0) * inc
                    })
                    .collect();
                log_sum_exp(&t)
            }
        }
    }
}

/// Multiplicative treatment on one group from `first_treated` onward.
#[derive(Clone, Debug, PartialEq)]
pub struct Treatment {
    pub group: String,
    pub first_treated: i64,
    /// Added to `μ` in treated cells.
    pub mu_shift: Vec<f64>,
    /// Multiplies `S` in treated cells.
    pub total_factor: f64,
}

/// Utilities and totals for every (group, period).
#[derive(Clone, Debug, PartialEq)]
pub struct UtilitySpec {
    pub categories: Categories,
    pub groups: Vec<String>,
    pub periods: Vec<i64>,
    /// `mu[g][t][k]`
    pub mu: Vec<Vec<Vec<f64>>>,
    /// `totals[g][t]`
    pub totals: Vec<Vec<f64>>,
    pub family: GevFamily,
    pub treatment: Option<Treatment>,
}

impl UtilitySpec {
    /// Logit specification whose untreated expected utilities are exactly
    /// `eu[g][t][k]`: `μ = eu` and `S = Σ_k e^{eu_k - γ}`.
    pub fn logit_from_expected_utilities(
        categories: Categories,
        groups: Vec<String>,
        periods: Vec<i64>,
        eu: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let totals = eu
            .iter()
            .map(|g| g.iter().map(|v| exp(log_sum_exp(v) - EULER_GAMMA)).collect())
            .collect();
        let spec = Self {
            categories,
            groups,
            periods,
            mu: eu,
            totals,
            family: GevFamily::Logit,
            treatment: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.categories.len();
        let (ng, nt) = (self.groups.len(), self.periods.len());
        if ng == 0 || nt == 0 {
            return Err(Error::EmptyPanel);
        }
        if self.periods.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadPeriod("periods must be strictly increasing".to_string()));
        }
        if self.mu.len() != ng || self.totals.len() != ng {
            return Err(Error::LengthMismatch { expected: ng, found: self.mu.len().min(self.totals.len()) });
        }
        for (m, s) in self.mu.iter().zip(&self.totals) {
            if m.len() != nt || s.len() != nt {
                return Err(Error::LengthMismatch { expected: nt, found: m.len().min(s.len()) });
            }
            for v in m {
                if v.len() != p {
                    return Err(Error::LengthMismatch { expected: p, found: v.len() });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFiniteInput);
                }
            }
            if let Some(&bad) = s.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return Err(Error::NonPositiveEntry { index: 0, value: bad });
            }
        }
        self.family.validate(p)?;
        if let Some(tr) = &self.treatment {
            if !self.groups.contains(&tr.group) {
                return Err(Error::UnknownGroup(tr.group.clone()));
            }
            if tr.mu_shift.len() != p {
                return Err(Error::LengthMismatch { expected: p, found: tr.mu_shift.len() });
            }
            if !(tr.total_factor.is_finite() && tr.total_factor > 0.0) {
                return Err(Error::NonPositiveEntry { index: 0, value: tr.total_factor });
            }
        }
        Ok(())
    }

    fn treated(&self, g: usize, t: usize) -> Option<&Treatment> {
        self.treatment
            .as_ref()
            .filter(|tr| tr.group == self.groups[g] && self.periods[t] >= tr.first_treated)
    }

    /// `log q = μ + log(G_k) - log G + log S`, untreated.
    pub fn untreated_log_quantities(&self, g: usize, t: usize) -> Vec<f64> {
        let mu = &self.mu[g][t];
        log_quantities(&self.family, mu, self.totals[g][t])
    }

    pub fn untreated_quantities(&self, g: usize, t: usize) -> Result<QuantityVector> {
        QuantityVector::from_logs(self.categories.clone(), &self.untreated_log_quantities(g, t))
    }

    /// Quantities as observed: treated cells carry the treatment.
    pub fn observed_quantities(&self, g: usize, t: usize) -> Result<QuantityVector> {
        match self.treated(g, t) {
            None => self.untreated_quantities(g, t),
            Some(tr) => {
                let mu: Vec<f64> = self.mu[g][t].iter().zip(&tr.mu_shift).map(|(m, d)| m + d).collect();
                let logs = log_quantities(&self.family, &mu, self.totals[g][t] * tr.total_factor);
                QuantityVector::from_logs(self.categories.clone(), &logs)
            }
        }
    }

    /// `E[U_k] = log q_k + γ` through the utility decomposition.
    pub fn expected_utilities(&self, g: usize, t: usize) -> Vec<f64> {
        let mu = &self.mu[g][t];
        let lg = self.family.log_g(mu);
        let ls = ln(self.totals[g][t]);
        (0..mu.len())
            .map(|k| {
                // V = μ + log G_k - log G + log S, with log G_k = log(y_k G_k) - μ_k
                let log_gk = self.family.log_weighted_partial(mu, k) - mu[k];
                mu[k] + log_gk - lg + ls + EULER_GAMMA
            })
            .collect()
    }

    fn records(&self, cells: impl Fn(usize, usize, usize) -> Result<Vec<f64>>) -> Result<Vec<Record>> {
        let mut rows = Vec::new();
        let mut cell = 0;
        for (g, id) in self.groups.iter().enumerate() {
            for (t, &period) in self.periods.iter().enumerate() {
                let q = cells(g, t, cell)?;
                cell += 1;
                for (label, x) in self.categories.labels().iter().zip(q) {
                    rows.push(Record::new(id.clone(), period, label.clone(), x));
                }
            }
        }
        Ok(rows)
    }

    fn finish(&self, rows: &[Record]) -> Result<PanelDataset> {
        let options = PanelOptions {
            category_order: Some(self.categories.labels().to_vec()),
            ..PanelOptions::default()
        };
        let panel = PanelDataset::from_records(rows, &options)?;
        match &self.treatment {
            Some(tr) => panel.with_treated(&tr.group, tr.first_treated),
            None => Ok(panel),
        }
    }

    /// Exact expected quantities `π · S`.
    pub fn population_panel(&self) -> Result<PanelDataset> {
        self.validate()?;
        let rows = self.records(|g, t, _| Ok(self.observed_quantities(g, t)?.values().to_vec()))?;
        self.finish(&rows)
    }

    /// `Multinomial(round(S), π)` in every cell; cell `c` (groups outer,
    /// periods inner) draws from stream `c` of `seed`.
    pub fn sampled_panel(&self, seed: u64) -> Result<PanelDataset> {
        self.validate()?;
        let rows = self.records(|g, t, c| {
            let q = self.observed_quantities(g, t)?;
            let shares = crate::simplex::closure(&q);
            let n = libm::round(q.total()).max(0.0) as u64;
            let mut rng = cell_rng(seed, 0, c as u64);
            Ok(draw_multinomial(&mut rng, n, shares.shares())
                .into_iter()
                .map(|x| x as f64)
                .collect())
        })?;
        self.finish(&rows)
    }
}

fn log_quantities(family: &GevFamily, mu: &[f64], total: f64) -> Vec<f64> {
    let lg = family.log_g(mu);
    let ls = ln(total);
    (0..mu.len()).map(|k| family.log_weighted_partial(mu, k) - lg + ls).collect()
}

/// Numerical check of the random-utility equivalences, relative to group 0
/// and period 0 of the specification.
#[derive(Clone, Debug, PartialEq)]
pub struct Prop1Report {
    /// `max |(E[U_{g,t}] - E[U_{g,0}]) - (log q_{g,t} - log q_{g,0})|` with
    /// `q` from the generated population panel.
    pub identity_gap: f64,
    /// Largest difference-in-differences of expected utilities.
    pub utility_residual: f64,
    /// Largest difference-in-differences of `μ`.
    pub mu_residual: f64,
    /// Largest difference-in-differences of `log q` (parallel growths).
    pub log_quantity_residual: f64,
    /// Largest difference-in-differences of log-odds against the last category.
    pub log_odds_residual: f64,
    /// Largest difference-in-differences of pairwise utility gaps.
    pub pairwise_utility_residual: f64,
    /// Largest gap between the pairwise utility and log-odds
    /// difference-in-differences for pairs `(k, last)`.
    pub log_odds_identity_gap: f64,
    /// Size of the bump added to `μ` of the first category in the last
    /// (group, period) cell for the two residuals below; both must move
    /// together for the equivalence to hold.
    pub perturbation: f64,
    pub perturbed_utility_residual: f64,
    pub perturbed_log_quantity_residual: f64,
}

/// `x[g][t][k] - x[g][0][k] - x[0][t][k] + x[0][0][k]` for all cells.
fn did(x: &[Vec<Vec<f64>>]) -> Vec<f64> {
    let mut out = Vec::new();
    for g in 0..x.len() {
        for t in 0..x[g].len() {
            for k in 0..x[g][t].len() {
                out.push(x[g][t][k] - x[g][0][k] - x[0][t][k] + x[0][0][k]);
            }
        }
    }
    out
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Untreated comparison of the three notions of parallel evolution.
pub fn certify_prop1(spec: &UtilitySpec) -> Result<Prop1Report> {
    let untreated = UtilitySpec {
        treatment: None,
        ..spec.clone()
    };
    let panel = untreated.population_panel()?;
    let (ng, nt, p) = (spec.groups.len(), spec.periods.len(), spec.categories.len());
    let grid = |f: &dyn Fn(usize, usize) -> Vec<f64>| -> Vec<Vec<Vec<f64>>> {
        (0..ng).map(|g| (0..nt).map(|t| f(g, t)).collect()).collect()
    };
    let eu = grid(&|g, t| spec.expected_utilities(g, t));
    let logq = grid(&|g, t| panel.cell(g, t, 0).log_values());
    let mu = grid(&|g, t| spec.mu[g][t].clone());

    let mut identity_gap: f64 = 0.0;
    for g in 0..ng {
        for t in 0..nt {
            for k in 0..p {
                let a = eu[g][t][k] - eu[g][0][k];
                let b = logq[g][t][k] - logq[g][0][k];
                identity_gap = identity_gap.max((a - b).abs());
            }
        }
    }
    let pairwise = |x: &[Vec<Vec<f64>>], l: usize| -> Vec<Vec<Vec<f64>>> {
        x.iter()
            .map(|g| g.iter().map(|v| v.iter().map(|a| a - v[l]).collect()).collect())
            .collect()
    };
    let mut pairwise_utility_residual: f64 = 0.0;
    for l in 0..p {
        pairwise_utility_residual = pairwise_utility_residual.max(max_abs(did(&pairwise(&eu, l))));
    }
    let log_odds = grid(&|g, t| {
        let s = crate::simplex::closure(panel.cell(g, t, 0)).log_shares();
        s.iter().map(|x| x - s[p - 1]).collect()
    });
    let lo_did = did(&log_odds);
    let pw_did = did(&pairwise(&eu, p - 1));
    let log_odds_identity_gap = max_abs(lo_did.iter().zip(&pw_did).map(|(a, b)| a - b));

    let perturbation = 1e-2;
    let mut bumped = untreated.clone();
    bumped.mu[ng - 1][nt - 1][0] += perturbation;
    let bumped_panel = bumped.population_panel()?;
    let perturbed_utility_residual = max_abs(did(&grid(&|g, t| bumped.expected_utilities(g, t))));
    let perturbed_log_quantity_residual = max_abs(did(&grid(&|g, t| bumped_panel.cell(g, t, 0).log_values())));

    Ok(Prop1Report {
        identity_gap,
        utility_residual: max_abs(did(&eu)),
        mu_residual: max_abs(did(&mu)),
        log_quantity_residual: max_abs(did(&logq)),
        log_odds_residual: max_abs(lo_did),
        pairwise_utility_residual,
        log_odds_identity_gap,
        perturbation,
        perturbed_utility_residual,
        perturbed_log_quantity_residual,
    })
}

/// Closed-form shares against simulated argmax frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloCheck {
    pub method: &'static str,
    pub draws: u64,
    pub shares: Vec<f64>,
    pub frequencies: Vec<f64>,
    /// `|f - π| / sqrt(π (1 - π) / n)` per category.
    pub z_scores: Vec<f64>,
}

impl MonteCarloCheck {
    pub fn max_z(&self) -> f64 {
        self.z_scores.iter().copied().fold(0.0, f64::max)
    }
}

/// Uniform on the open interval `(0, 1)`.
fn open_unit<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

fn gumbel<R: RngCore>(rng: &mut R) -> f64 {
    -ln(-ln(open_unit(rng)))
}

fn argmax(v: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, x) in v.enumerate() {
        if x > best.1 {
            best = (i, x);
        }
    }
    best.0
}

/// Simulates `draws` choices. Logit draws iid Gumbel shocks; nested logit
/// draws a Gumbel shock per nest on the inclusive values, then Gumbel shocks
/// scaled within the chosen nest. Paired combinatorial and generalized nested
/// logit draw from the closed-form shares by inversion, which checks internal
/// consistency only.
pub fn monte_carlo_check(family: &GevFamily, categories: Categories, mu: &[f64], draws: u64, seed: u64) -> Result<MonteCarloCheck> {
    let shares = family.shares(categories, mu)?;
    let p = mu.len();
    let mut counts = alloc::vec![0u64; p];
    let mut rng = cell_rng(seed, u32::MAX as u64, 0);
    let method = match family {
        GevFamily::Logit => {
            for _ in 0..draws {
                counts[argmax(mu.iter().map(|m| m + gumbel(&mut rng)))] += 1;
            }
            "iid Gumbel shocks"
        }
        GevFamily::NestedLogit(nests) => {
            let inclusive: Vec<f64> = nests.iter().map(|n| n.lambda * nl_log_inclusive(n, mu)).collect();
            for _ in 0..draws {
                let m = argmax(inclusive.iter().map(|v| v + gumbel(&mut rng)));
                let nest = &nests[m];
                let j = argmax(nest.members.iter().map(|&k| mu[k] / nest.lambda + gumbel(&mut rng)));
                counts[nest.members[j]] += 1;
            }
            "two-stage Gumbel: nest on inclusive values, then within nest"
        }
        GevFamily::PairedCombinatorial(_) | GevFamily::GeneralizedNested(_) => {
            let mut cdf = Vec::with_capacity(p);
            let mut acc = 0.0;
            for s in shares.shares() {
                acc += s;
                cdf.push(acc);
            }
            for _ in 0..draws {
                let u: f64 = rng.random::<f64>() * acc;
                let k = cdf.iter().position(|&c| u < c).unwrap_or(p - 1);
                counts[k] += 1;
            }
            "inverse sampling from closed-form shares"
        }
    };
    let n = draws as f64;
    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let z_scores = frequencies
        .iter()
        .zip(shares.shares())
        .map(|(f, s)| (f - s).abs() / sqrt(s * (1.0 - s) / n))
        .collect();
    Ok(MonteCarloCheck {
        method,
        draws,
        shares: shares.shares().to_vec(),
        frequencies,
        z_scores,
    })
}
