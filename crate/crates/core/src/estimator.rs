//! Point identification in the canonical two-group, two-period design.
//!
//! Under parallel growths the untreated treated-group quantities in the
//! post period are `q10 · q01 / q00` componentwise. Everything else (the
//! counterfactual total and shares, GTT, CTT) follows from that vector.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp, ln};
use crate::panel::PanelDataset;
use crate::simplex::{self, Composition, LogOdds, QuantityVector};

/// The four observed cells of a 2×2 design.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoByTwo {
    pub control_pre: QuantityVector,
    pub control_post: QuantityVector,
    pub treated_pre: QuantityVector,
    pub treated_post: QuantityVector,
}

impl TwoByTwo {
    pub fn new(
        control_pre: QuantityVector,
        control_post: QuantityVector,
        treated_pre: QuantityVector,
        treated_post: QuantityVector,
    ) -> Result<Self> {
        let c = control_pre.categories();
        for q in [&control_post, &treated_pre, &treated_post] {
            c.ensure_same(q.categories())?;
        }
        Ok(Self {
            control_pre,
            control_post,
            treated_pre,
            treated_post,
        })
    }

    /// Extracts the cells from an unstratified panel with periods `{0, 1}`,
    /// one group treated from period 1 and one never-treated group.
    pub fn from_panel(panel: &PanelDataset) -> Result<Self> {
        if panel.is_stratified() {
            return Err(Error::BadLayout(
                "stratified panel: use the stratified estimator".to_string(),
            ));
        }
        if panel.periods() != [0, 1] {
            return Err(Error::BadLayout(alloc::format!(
                "2x2 design needs periods {{0, 1}}, found {:?}",
                panel.periods()
            )));
        }
        let (treated, control) = treated_and_control(panel)?;
        Ok(Self {
            control_pre: panel.cell(control, 0, 0).clone(),
            control_post: panel.cell(control, 1, 0).clone(),
            treated_pre: panel.cell(treated, 0, 0).clone(),
            treated_post: panel.cell(treated, 1, 0).clone(),
        })
    }
}

/// Indices of the single treated group (first treated at period 1) and the
/// single control group.
pub(crate) fn treated_and_control(panel: &PanelDataset) -> Result<(usize, usize)> {
    if panel.groups().len() != 2 {
        return Err(Error::BadLayout(alloc::format!(
            "expected exactly two groups, found {}",
            panel.groups().len()
        )));
    }
    let treated: Vec<usize> = panel.treated_groups().map(|(i, _)| i).collect();
    match treated.as_slice() {
        [t] if panel.groups()[*t].first_treated == Some(1) => Ok((*t, 1 - *t)),
        [t] => Err(Error::BadLayout(alloc::format!(
            "treated group `{}` must be first treated in period 1",
            panel.groups()[*t].id
        ))),
        _ => Err(Error::BadLayout(
            "exactly one group must be marked treated".to_string(),
        )),
    }
}

/// `exp(log q10 + log q01 - log q00)` componentwise.
pub fn counterfactual_quantities(
    treated_pre: &QuantityVector,
    control_pre: &QuantityVector,
    control_post: &QuantityVector,
) -> Result<QuantityVector> {
    let cats = treated_pre.categories();
    cats.ensure_same(control_pre.categories())?;
    cats.ensure_same(control_post.categories())?;
    let values = treated_pre
        .values()
        .iter()
        .zip(control_pre.values())
        .zip(control_post.values())
        .map(|((&q10, &q00), &q01)| exp(ln(q10) + ln(q01) - ln(q00)))
        .collect();
    QuantityVector::new(cats.clone(), values)
}

/// Counterfactual shares via log-odds:
/// `ℓ⁻¹(ℓ(π10) + ℓ(π01) - ℓ(π00))`.
pub fn counterfactual_shares_log_odds(
    treated_pre: &Composition,
    control_pre: &Composition,
    control_post: &Composition,
    baseline: usize,
) -> Result<Composition> {
    let l10 = simplex::log_odds(treated_pre, baseline)?;
    let l00 = simplex::log_odds(control_pre, baseline)?;
    let l01 = simplex::log_odds(control_post, baseline)?;
    simplex::inv_log_odds(&l10.add(&l01)?.sub(&l00)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodidResult {
    /// `q^N_{1,1}`
    pub counterfactual_q: QuantityVector,
    /// `S^N_{1,1}`
    pub counterfactual_total: f64,
    /// `π^N_{1,1}`
    pub counterfactual_shares: Composition,
    pub gtt_per_category: Vec<f64>,
    pub gtt_total: f64,
    /// `π^I_{1,1} ⊖ π^N_{1,1}`
    pub ctt: Composition,
}

impl CodidResult {
    /// CTT in log-odds coordinates.
    pub fn ctt_log_odds(&self, baseline: usize) -> Result<LogOdds> {
        simplex::log_odds(&self.ctt, baseline)
    }

    /// Scalars in a fixed order: per-category GTT, total GTT, CTT shares.
    pub fn scalars(&self) -> Vec<f64> {
        let mut v = self.gtt_per_category.clone();
        v.push(self.gtt_total);
        v.extend_from_slice(self.ctt.shares());
        v
    }
}

/// Effects of observed treated quantities against a counterfactual.
pub fn effects(observed: &QuantityVector, counterfactual: QuantityVector) -> Result<CodidResult> {
    observed.categories().ensure_same(counterfactual.categories())?;
    let counterfactual_total = counterfactual.total();
    let counterfactual_shares = simplex::closure(&counterfactual);
    let gtt_per_category = observed
        .values()
        .iter()
        .zip(counterfactual.values())
        .map(|(qi, qn)| qi / qn - 1.0)
        .collect();
    let gtt_total = observed.total() / counterfactual_total - 1.0;
    let ctt = simplex::comp_diff(&simplex::closure(observed), &counterfactual_shares)?;
    Ok(CodidResult {
        counterfactual_q: counterfactual,
        counterfactual_total,
        counterfactual_shares,
        gtt_per_category,
        gtt_total,
        ctt,
    })
}

pub fn estimate_cells(cells: &TwoByTwo) -> Result<CodidResult> {
    let cf = counterfactual_quantities(&cells.treated_pre, &cells.control_pre, &cells.control_post)?;
    effects(&cells.treated_post, cf)
}

/// Full 2×2 estimate from a panel (see [`TwoByTwo::from_panel`]).
pub fn estimate_2x2(panel: &PanelDataset) -> Result<CodidResult> {
    estimate_cells(&TwoByTwo::from_panel(panel)?)
}

/// Linear parallel trends on shares, `π10 + π01 - π00`, unnormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearPtDiagnostic {
    pub values: Vec<f64>,
    /// Whether the vector is a valid point of the open simplex.
    pub in_simplex: bool,
}

pub fn linear_pt_counterfactual_shares(
    treated_pre: &Composition,
    control_pre: &Composition,
    control_post: &Composition,
) -> Result<LinearPtDiagnostic> {
    let cats = treated_pre.categories();
    cats.ensure_same(control_pre.categories())?;
    cats.ensure_same(control_post.categories())?;
    let values: Vec<f64> = treated_pre
        .shares()
        .iter()
        .zip(control_pre.shares())
        .zip(control_post.shares())
        .map(|((a, b), c)| a + c - b)
        .collect();
    let sum: f64 = values.iter().sum();
    let in_simplex =
        values.iter().all(|&v| v > 0.0 && v < 1.0) && (sum - 1.0).abs() <= simplex::SUM_TOLERANCE;
    Ok(LinearPtDiagnostic { values, in_simplex })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StratumEstimate {
    pub stratum: alloc::string::String,
    pub weight: f64,
    pub result: CodidResult,
}

/// Covariate-stratified estimate.
///
/// Quantities aggregate as `Σ_x P(x) q_x`. Shares are reported two ways:
/// the weighted average of per-stratum shares, `Σ_x P(x) π_x`, and the
/// closure of the aggregated quantities. They agree only when stratum totals
/// coincide.
#[derive(Clone, Debug, PartialEq)]
pub struct StratifiedResult {
    pub counterfactual_q: QuantityVector,
    pub counterfactual_total: f64,
    /// `Σ_x P(x) π^N_x`
    pub counterfactual_shares: Composition,
    /// `closure(Σ_x P(x) q^N_x)`
    pub counterfactual_shares_quantity_consistent: Composition,
    pub gtt_per_category: Vec<f64>,
    pub gtt_total: f64,
    /// `(Σ_x P(x) π^I_x) ⊖ (Σ_x P(x) π^N_x)`
    pub ctt: Composition,
    /// `closure(Σ_x P(x) q^I_x) ⊖ closure(Σ_x P(x) q^N_x)`
    pub ctt_quantity_consistent: Composition,
    pub strata: Vec<StratumEstimate>,
}

impl StratifiedResult {
    pub fn scalars(&self) -> Vec<f64> {
        let mut v = self.gtt_per_category.clone();
        v.push(self.gtt_total);
        v.extend_from_slice(self.ctt.shares());
        v
    }
}

pub fn estimate_stratified(panel: &PanelDataset) -> Result<StratifiedResult> {
    if !panel.is_stratified() {
        return Err(Error::BadLayout("panel has no strata".to_string()));
    }
    let weights = panel.stratum_weights()?;
    let cats = panel.categories().clone();
    let p = cats.len();

    let mut strata = Vec::with_capacity(weights.len());
    let mut q_n = alloc::vec![0.0; p];
    let mut q_i = alloc::vec![0.0; p];
    let mut pi_n = alloc::vec![0.0; p];
    let mut pi_i = alloc::vec![0.0; p];
    for (s, &w) in panel.strata().iter().zip(&weights) {
        let cells = TwoByTwo::from_panel(&panel.stratify(&s.id)?)?;
        let result = estimate_cells(&cells)?;
        let observed_shares = simplex::closure(&cells.treated_post);
        for k in 0..p {
            q_n[k] += w * result.counterfactual_q.values()[k];
            q_i[k] += w * cells.treated_post.values()[k];
            pi_n[k] += w * result.counterfactual_shares.shares()[k];
            pi_i[k] += w * observed_shares.shares()[k];
        }
        strata.push(StratumEstimate {
            stratum: s.id.clone(),
            weight: w,
            result,
        });
    }

    let q_n = QuantityVector::new(cats.clone(), q_n)?;
    let q_i = QuantityVector::new(cats.clone(), q_i)?;
    let pi_n = Composition::new(cats.clone(), pi_n)?;
    let pi_i = Composition::new(cats, pi_i)?;
    let qc_shares = simplex::closure(&q_n);
    let ctt_qc = simplex::comp_diff(&simplex::closure(&q_i), &qc_shares)?;
    let gtt_per_category = q_i
        .values()
        .iter()
        .zip(q_n.values())
        .map(|(a, b)| a / b - 1.0)
        .collect();
    Ok(StratifiedResult {
        counterfactual_total: q_n.total(),
        gtt_total: q_i.total() / q_n.total() - 1.0,
        ctt: simplex::comp_diff(&pi_i, &pi_n)?,
        counterfactual_q: q_n,
        counterfactual_shares: pi_n,
        counterfactual_shares_quantity_consistent: qc_shares,
        gtt_per_category,
        ctt_quantity_consistent: ctt_qc,
        strata,
    })
}

/// Saturated two-way multinomial logit reading of the 2×2 design.
#[derive(Clone, Debug, PartialEq)]
pub struct SaturatedLogit {
    /// Interaction coefficients: the log-odds difference-in-differences.
    pub beta: LogOdds,
    /// `ℓ⁻¹(β)`
    pub ctt: Composition,
}

/// `β = ℓ(π11) - ℓ(π10) - ℓ(π01) + ℓ(π00)` and `CTT = ℓ⁻¹(β)`.
pub fn saturated_logit_cells(cells: &TwoByTwo, baseline: usize) -> Result<SaturatedLogit> {
    let l = |q: &QuantityVector| simplex::log_odds(&simplex::closure(q), baseline);
    let beta = l(&cells.treated_post)?
        .sub(&l(&cells.treated_pre)?)?
        .sub(&l(&cells.control_post)?)?
        .add(&l(&cells.control_pre)?)?;
    let ctt = simplex::inv_log_odds(&beta)?;
    Ok(SaturatedLogit { beta, ctt })
}

pub fn saturated_logit_ctt(panel: &PanelDataset, baseline: usize) -> Result<SaturatedLogit> {
    saturated_logit_cells(&TwoByTwo::from_panel(panel)?, baseline)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::tests::{minimal_records, stratified_records};
    use crate::panel::{PanelOptions, Record};
    use crate::simplex::Categories;
    use alloc::vec;
    use proptest::prelude::*;

    fn q(v: &[f64]) -> QuantityVector {
        QuantityVector::new(Categories::numbered(v.len()).unwrap(), v.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn minimal_panel() -> PanelDataset {
        PanelDataset::from_records(&minimal_records(), &PanelOptions::default())
            .unwrap()
            .with_treated("treated", 1)
            .unwrap()
    }

    #[test]
    fn counterfactual_examples() {
        let q00 = q(&[10.0, 20.0, 40.0]);
        let q01 = q(&[20.0, 10.0, 40.0]);
        let q10 = q(&[30.0, 40.0, 10.0]);
        let cf = counterfactual_quantities(&q10, &q00, &q01).unwrap();
        assert!(close(cf.values(), &[60.0, 20.0, 10.0], 1e-12));
        // flat control trend returns the treated baseline; identical groups
        // return the control post period
        assert!(close(counterfactual_quantities(&q10, &q00, &q00).unwrap().values(), q10.values(), 1e-12));
        assert!(close(counterfactual_quantities(&q00, &q00, &q01).unwrap().values(), q01.values(), 1e-12));

        let other = QuantityVector::new(Categories::new(["x", "y", "z"]).unwrap(), vec![1.0; 3]).unwrap();
        assert_eq!(counterfactual_quantities(&q10, &q00, &other).unwrap_err(), Error::LabelMismatch);
    }

    #[test]
    fn estimate_minimal_panel() {
        let r = estimate_2x2(&minimal_panel()).unwrap();
        assert!(close(r.counterfactual_q.values(), &[60.0, 20.0, 10.0], 1e-12));
        assert!((r.counterfactual_total - 90.0).abs() < 1e-12);
        assert!(close(r.counterfactual_shares.shares(), &[2.0 / 3.0, 2.0 / 9.0, 1.0 / 9.0], 1e-14));
        assert!(close(&r.gtt_per_category, &[0.1, 0.1, 0.1], 1e-12));
        assert!((r.gtt_total - 0.1).abs() < 1e-12);
        assert!(close(r.ctt.shares(), &[1.0 / 3.0; 3], 1e-12));
        assert_eq!(r.counterfactual_q.categories().labels(), ["a", "b", "c"]);
    }

    #[test]
    fn null_effect_is_exact() {
        let cells = TwoByTwo::from_panel(&minimal_panel()).unwrap();
        let cf = counterfactual_quantities(&cells.treated_pre, &cells.control_pre, &cells.control_post).unwrap();
        let r = effects(&cf, cf.clone()).unwrap();
        assert!(r.gtt_per_category.iter().all(|&g| g == 0.0));
        assert_eq!(r.gtt_total, 0.0);
        assert_eq!(r.ctt, Composition::uniform(cf.categories().clone()));
    }

    #[test]
    fn layout_errors() {
        let unmarked = PanelDataset::from_records(&minimal_records(), &PanelOptions::default()).unwrap();
        assert!(matches!(estimate_2x2(&unmarked), Err(Error::BadLayout(_))));
        let strat = PanelDataset::from_records(&stratified_records(), &PanelOptions::default()).unwrap();
        assert!(matches!(estimate_2x2(&strat), Err(Error::BadLayout(_))));
        assert!(matches!(estimate_stratified(&minimal_panel()), Err(Error::BadLayout(_))));
    }

    fn fig1() -> (Composition, Composition, Composition) {
        let c = Categories::numbered(3).unwrap();
        (
            Composition::new(c.clone(), vec![0.7, 0.2, 0.1]).unwrap(),
            Composition::new(c.clone(), vec![0.3, 0.3, 0.4]).unwrap(),
            Composition::new(c, vec![0.2, 0.3, 0.5]).unwrap(),
        )
    }

    #[test]
    fn figure_one_shares() {
        let (pi00, pi01, pi10) = fig1();
        let codid = counterfactual_shares_log_odds(&pi10, &pi00, &pi01, 2).unwrap();
        // exps (0.2/0.5 · 0.3/0.4 · 0.1/0.7, 0.3/0.5 · 0.3/0.4 · 0.1/0.2, 1)
        let w = [0.4 * 0.75 / 7.0, 0.6 * 0.75 / 2.0, 1.0];
        let s: f64 = w.iter().sum();
        assert!(close(codid.shares(), &[w[0] / s, w[1] / s, w[2] / s], 1e-14));
        assert!(close(codid.shares(), &[0.03380, 0.17747, 0.78873], 1e-4));

        let lin = linear_pt_counterfactual_shares(&pi10, &pi00, &pi01).unwrap();
        assert!(close(&lin.values, &[-0.2, 0.4, 0.8], 1e-15));
        assert!(!lin.in_simplex);

        let same = linear_pt_counterfactual_shares(&pi10, &pi00, &pi00).unwrap();
        assert!(close(&same.values, pi10.shares(), 1e-15));
        assert!(same.in_simplex);
        let u = Composition::uniform(pi00.categories().clone());
        let uu = linear_pt_counterfactual_shares(&u, &u, &u).unwrap();
        assert!(close(&uu.values, u.shares(), 1e-15) && uu.in_simplex);
    }

    #[test]
    fn saturated_logit_examples() {
        let cells = TwoByTwo::from_panel(&minimal_panel()).unwrap();
        let cf = counterfactual_quantities(&cells.treated_pre, &cells.control_pre, &cells.control_post).unwrap();
        let null = TwoByTwo { treated_post: cf, ..cells.clone() };
        let s = saturated_logit_cells(&null, 2).unwrap();
        assert!(s.beta.values().iter().all(|b| b.abs() < 1e-12));
        assert!(close(s.ctt.shares(), &[1.0 / 3.0; 3], 1e-12));

        let s = saturated_logit_ctt(&minimal_panel(), 0).unwrap();
        let r = estimate_2x2(&minimal_panel()).unwrap();
        assert!(s.ctt.max_abs_diff(&r.ctt) < 1e-10);
    }

    #[test]
    fn stratified_reductions() {
        let rows: Vec<Record> = minimal_records().into_iter().map(|r| r.in_stratum("only", Some(1.0))).collect();
        let p = PanelDataset::from_records(&rows, &PanelOptions::default())
            .unwrap()
            .with_treated("treated", 1)
            .unwrap();
        let s = estimate_stratified(&p).unwrap();
        let r = estimate_2x2(&minimal_panel()).unwrap();
        assert_eq!(s.counterfactual_q, r.counterfactual_q);
        assert_eq!(s.counterfactual_shares.shares(), r.counterfactual_shares.shares());
        assert_eq!(s.gtt_per_category, r.gtt_per_category);
        assert_eq!(s.gtt_total, r.gtt_total);
        assert!(s.ctt.max_abs_diff(&r.ctt) < 1e-15);

        // two identical strata at 0.5/0.5
        let rows: Vec<Record> = ["x1", "x2"]
            .iter()
            .flat_map(|s| minimal_records().into_iter().map(move |r| r.in_stratum(*s, Some(0.5))))
            .collect();
        let p = PanelDataset::from_records(&rows, &PanelOptions::default())
            .unwrap()
            .with_treated("treated", 1)
            .unwrap();
        let s = estimate_stratified(&p).unwrap();
        assert!(close(s.counterfactual_q.values(), r.counterfactual_q.values(), 1e-12));
        assert!(s.counterfactual_shares.max_abs_diff(&r.counterfactual_shares) < 1e-15);
        assert!(close(&s.gtt_per_category, &r.gtt_per_category, 1e-12));
        assert!(s.ctt.max_abs_diff(&r.ctt) < 1e-12);
    }

    #[test]
    fn stratified_hand_computed() {
        // x1: q00=(1,1) q01=(2,1) q10=(1,2) → qN=(2,2), πN=(1/2,1/2)
        // x2: q00=(1,1) q01=(1,1) q10=(6,2) → qN=(6,2), πN=(3/4,1/4)
        // weighted shares (0.625, 0.375); aggregated quantities (4, 2) → (2/3, 1/3)
        let mut rows = Vec::new();
        let cells: [(&str, [[f64; 2]; 4]); 2] = [
            ("x1", [[1.0, 1.0], [2.0, 1.0], [1.0, 2.0], [4.0, 1.0]]),
            ("x2", [[1.0, 1.0], [1.0, 1.0], [6.0, 2.0], [6.0, 4.0]]),
        ];
        for (s, [c0, c1, t0, t1]) in cells {
            for (g, t, v) in [("c", 0, c0), ("c", 1, c1), ("t", 0, t0), ("t", 1, t1)] {
                for (k, x) in ["u", "v"].iter().zip(v) {
                    rows.push(Record::new(g, t, *k, x).in_stratum(s, Some(0.5)));
                }
            }
        }
        let p = PanelDataset::from_records(&rows, &PanelOptions::default())
            .unwrap()
            .with_treated("t", 1)
            .unwrap();
        let s = estimate_stratified(&p).unwrap();
        assert!(close(s.counterfactual_q.values(), &[4.0, 2.0], 1e-12));
        assert!(close(s.counterfactual_shares.shares(), &[0.625, 0.375], 1e-12));
        assert!(close(s.counterfactual_shares_quantity_consistent.shares(), &[2.0 / 3.0, 1.0 / 3.0], 1e-12));
        // observed: q^I = 0.5·(4,1) + 0.5·(6,4) = (5, 2.5); π^I = 0.5·(0.8,0.2) + 0.5·(0.6,0.4) = (0.7,0.3)
        assert!(close(&s.gtt_per_category, &[0.25, 0.25], 1e-12));
        assert!((s.gtt_total - 0.25).abs() < 1e-12);
        let r = [0.7 / 0.625, 0.3 / 0.375];
        assert!(close(s.ctt.shares(), &[r[0] / (r[0] + r[1]), r[1] / (r[0] + r[1])], 1e-12));
        assert!(close(s.ctt_quantity_consistent.shares(), &[0.5, 0.5], 1e-12));
        assert_eq!(s.strata.len(), 2);
    }

    #[test]
    fn stratified_needs_weights() {
        let mut rows = stratified_records();
        rows.iter_mut().for_each(|r| r.stratum_weight = None);
        let p = PanelDataset::from_records(&rows, &PanelOptions::default())
            .unwrap()
            .with_treated("treated", 1)
            .unwrap();
        assert!(matches!(estimate_stratified(&p), Err(Error::MissingStratumWeight(_))));
    }

    fn random_cells(p: usize) -> impl Strategy<Value = TwoByTwo> {
        proptest::collection::vec(0.0f64..12.0, 4 * p).prop_map(move |logs| {
            let v: Vec<QuantityVector> = logs
                .chunks(p)
                .map(|c| QuantityVector::from_logs(Categories::numbered(p).unwrap(), c).unwrap())
                .collect();
            TwoByTwo::new(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn identification_paths_agree(cells in (2usize..=6).prop_flat_map(random_cells)) {
            let r = estimate_cells(&cells).unwrap();
            let p = cells.control_pre.len();
            // residual of parallel growths
            for k in 0..p {
                let res = ln(r.counterfactual_q.values()[k]) - ln(cells.treated_pre.values()[k])
                    - ln(cells.control_post.values()[k]) + ln(cells.control_pre.values()[k]);
                prop_assert!(res.abs() < 1e-12);
                let direct = cells.treated_pre.values()[k] * cells.control_post.values()[k] / cells.control_pre.values()[k];
                prop_assert!((direct - r.counterfactual_q.values()[k]).abs() <= 1e-12 * direct);
            }
            prop_assert!((r.counterfactual_total - r.counterfactual_q.total()).abs() <= 1e-9 * r.counterfactual_total);

            let pi = |q: &QuantityVector| simplex::closure(q);
            for baseline in [0, p - 1] {
                let via_logit = counterfactual_shares_log_odds(&pi(&cells.treated_pre), &pi(&cells.control_pre), &pi(&cells.control_post), baseline).unwrap();
                prop_assert!(via_logit.max_abs_diff(&r.counterfactual_shares) < 1e-10);
                let sat = saturated_logit_cells(&cells, baseline).unwrap();
                prop_assert!(sat.ctt.max_abs_diff(&r.ctt) < 1e-10);
            }
            // equal compositional differences in both groups
            let lhs = simplex::comp_diff(&r.counterfactual_shares, &pi(&cells.treated_pre)).unwrap();
            let rhs = simplex::comp_diff(&pi(&cells.control_post), &pi(&cells.control_pre)).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
            // CTT = π^I ⊖ (π10 ⊕ (π01 ⊖ π00))
            let shifted = simplex::perturb(&pi(&cells.treated_pre), &rhs).unwrap();
            let ctt = simplex::comp_diff(&pi(&cells.treated_post), &shifted).unwrap();
            prop_assert!(ctt.max_abs_diff(&r.ctt) < 1e-10);
        }

        #[test]
        fn control_scale_invariance(cells in random_cells(3), c in 0.01f64..100.0) {
            let base = estimate_cells(&cells).unwrap();
            let both = TwoByTwo {
                control_pre: cells.control_pre.scaled(c).unwrap(),
                control_post: cells.control_post.scaled(c).unwrap(),
                ..cells.clone()
            };
            let r = estimate_cells(&both).unwrap();
            for (a, b) in r.counterfactual_q.values().iter().zip(base.counterfactual_q.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * b);
            }
            let post_only = TwoByTwo {
                control_post: cells.control_post.scaled(c).unwrap(),
                ..cells.clone()
            };
            let r = estimate_cells(&post_only).unwrap();
            for (a, b) in r.counterfactual_q.values().iter().zip(base.counterfactual_q.values()) {
                prop_assert!((a - c * b).abs() <= 1e-12 * c * b);
            }
        }
    }
}
