//! Synthetic CoDiD: one treated group, several never-treated controls and
//! many periods.
//!
//! Unit weights `ω` make the weighted control log-path track the treated
//! log-path before treatment; time weights `λ` make the weighted pre-period
//! control log-quantities match their post-period mean. Both solve a least
//! squares problem over the probability simplex.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp, ln, sqrt};
use crate::panel::PanelDataset;
use crate::simplex::{self, Categories, Composition, QuantityVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop once the gradient-mapping norm falls to this level.
    pub tolerance: f64,
    /// Optional `ζ‖w‖²` penalty.
    pub ridge: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            tolerance: 1e-8,
            ridge: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexFit {
    pub weights: Vec<f64>,
    /// `‖A w - b‖²` (plus the ridge term, if any).
    pub objective: f64,
    pub iterations: usize,
    pub gradient_mapping_norm: f64,
    pub converged: bool,
}

/// Euclidean projection onto `{w ≥ 0, Σ w = 1}`.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// `min ‖A w - b‖² + ζ‖w‖²` over the simplex, `A` given by its columns.
///
/// Accelerated projected gradient with fixed step `1/L`, where `L` bounds the
/// largest eigenvalue of the Hessian by Gershgorin, and a restart whenever
/// the objective increases. Starts from uniform weights.
pub fn simplex_least_squares(columns: &[Vec<f64>], target: &[f64], options: &SolverOptions) -> Result<SimplexFit> {
    let n = columns.len();
    if n == 0 {
        return Err(Error::NoControls);
    }
    let m = target.len();
    if let Some(c) = columns.iter().find(|c| c.len() != m) {
        return Err(Error::LengthMismatch { expected: m, found: c.len() });
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gram: Vec<Vec<f64>> = columns
        .iter()
        .map(|a| columns.iter().map(|b| dot(a, b)).collect())
        .collect();
    let lin: Vec<f64> = columns.iter().map(|a| dot(a, target)).collect();
    let zeta = options.ridge;
    let objective = |w: &[f64]| {
        let mut sq = 0.0;
        for i in 0..m {
            let r: f64 = columns.iter().zip(w).map(|(c, wj)| c[i] * wj).sum::<f64>() - target[i];
            sq += r * r;
        }
        sq + zeta * dot(w, w)
    };
    let gradient = |w: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| 2.0 * (dot(&gram[i], w) - lin[i] + zeta * w[i]))
            .collect()
    };
    let lipschitz = 2.0
        * (gram
            .iter()
            .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
            + zeta);

    let uniform = alloc::vec![1.0 / n as f64; n];
    if n == 1 || lipschitz == 0.0 {
        return Ok(SimplexFit {
            objective: objective(&uniform),
            weights: uniform,
            iterations: 0,
            gradient_mapping_norm: 0.0,
            converged: true,
        });
    }
    let step = 1.0 / lipschitz;
    let mapping_norm = |w: &[f64], g: &[f64]| {
        let moved: Vec<f64> = w.iter().zip(g).map(|(x, gi)| x - step * gi).collect();
        let p = project_to_simplex(&moved);
        lipschitz * sqrt(w.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
    };

    let mut x = uniform.clone();
    let mut y = uniform;
    let mut t = 1.0f64;
    let mut fx = objective(&x);
    let mut iterations = 0;
    let mut norm = mapping_norm(&x, &gradient(&x));
    while norm > options.tolerance && iterations < options.max_iterations {
        iterations += 1;
        let gy = gradient(&y);
        let moved: Vec<f64> = y.iter().zip(&gy).map(|(a, g)| a - step * g).collect();
        let next = project_to_simplex(&moved);
        let f_next = objective(&next);
        // restart momentum from the last accepted point; a plain projected
        // step is always accepted so rounding noise cannot stall the loop
        if f_next > fx && t > 1.0 {
            y = x.clone();
            t = 1.0;
            continue;
        }
        let t_next = (1.0 + sqrt(1.0 + 4.0 * t * t)) / 2.0;
        let beta = (t - 1.0) / t_next;
        y = next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + beta * (a - b))
            .collect();
        x = next;
        fx = f_next;
        t = t_next;
        norm = mapping_norm(&x, &gradient(&x));
    }
    Ok(SimplexFit {
        weights: x,
        objective: fx,
        iterations,
        gradient_mapping_norm: norm,
        converged: norm <= options.tolerance,
    })
}

/// Treated group, control groups and the pre/post split of a panel.
#[derive(Clone, Debug)]
pub struct SyntheticDesign {
    categories: Categories,
    treated: String,
    controls: Vec<String>,
    pre: Vec<i64>,
    post: Vec<i64>,
    /// log q per group (treated first), period, category
    logs: Vec<Vec<Vec<f64>>>,
}

impl SyntheticDesign {
    /// Periods `≤ t0` are pre-treatment. The panel must have exactly one
    /// treated group, first treated in the first period after `t0`; every
    /// other group is a control.
    pub fn new(panel: &PanelDataset, t0: i64) -> Result<Self> {
        if panel.is_stratified() {
            return Err(Error::BadLayout("synthetic estimation needs an unstratified panel".to_string()));
        }
        let treated: Vec<usize> = panel.treated_groups().map(|(i, _)| i).collect();
        let [tr] = treated.as_slice() else {
            return Err(Error::BadLayout("exactly one group must be marked treated".to_string()));
        };
        let pre: Vec<i64> = panel.periods().iter().copied().filter(|&t| t <= t0).collect();
        let post: Vec<i64> = panel.periods().iter().copied().filter(|&t| t > t0).collect();
        if pre.is_empty() || post.is_empty() {
            return Err(Error::BadPeriod(alloc::format!(
                "t0 = {t0} must leave at least one pre- and one post-treatment period"
            )));
        }
        if panel.groups()[*tr].first_treated != Some(post[0]) {
            return Err(Error::BadLayout(alloc::format!(
                "treated group `{}` must be first treated in period {}",
                panel.groups()[*tr].id,
                post[0]
            )));
        }
        let controls: Vec<usize> = (0..panel.groups().len()).filter(|i| i != tr).collect();
        if controls.is_empty() {
            return Err(Error::NoControls);
        }
        let order: Vec<usize> = core::iter::once(*tr).chain(controls.iter().copied()).collect();
        let logs = order
            .iter()
            .map(|&g| {
                (0..panel.periods().len())
                    .map(|ti| panel.cell(g, ti, 0).log_values())
                    .collect()
            })
            .collect();
        Ok(Self {
            categories: panel.categories().clone(),
            treated: panel.groups()[*tr].id.clone(),
            controls: controls.iter().map(|&i| panel.groups()[i].id.clone()).collect(),
            pre,
            post,
            logs,
        })
    }

    pub fn treated(&self) -> &str {
        &self.treated
    }

    pub fn controls(&self) -> &[String] {
        &self.controls
    }

    pub fn pre_periods(&self) -> &[i64] {
        &self.pre
    }

    pub fn post_periods(&self) -> &[i64] {
        &self.post
    }

    // log q of group `g` (0 = treated) at the i-th period of the panel
    fn log_at(&self, g: usize, ti: usize) -> &[f64] {
        &self.logs[g][ti]
    }

    fn post_indices(&self) -> core::ops::Range<usize> {
        self.pre.len()..self.pre.len() + self.post.len()
    }

    fn post_mean(&self, g: usize) -> Vec<f64> {
        let p = self.categories.len();
        let n = self.post.len() as f64;
        (0..p)
            .map(|k| self.post_indices().map(|ti| self.log_at(g, ti)[k]).sum::<f64>() / n)
            .collect()
    }

    /// `argmin_ω Σ_{t ≤ t0} ‖log q_{1,t} - Σ_j ω_j log q_{j,t}‖²`.
    pub fn solve_unit_weights(&self, options: &SolverOptions) -> Result<SimplexFit> {
        let rows = |g: usize| -> Vec<f64> { (0..self.pre.len()).flat_map(|ti| self.log_at(g, ti).to_vec()).collect() };
        let columns: Vec<Vec<f64>> = (1..=self.controls.len()).map(rows).collect();
        simplex_least_squares(&columns, &rows(0), options)
    }

    /// `argmin_λ Σ_j ‖mean_{t > t0} log q_{j,t} - Σ_{t ≤ t0} λ_t log q_{j,t}‖²`.
    pub fn solve_time_weights(&self, options: &SolverOptions) -> Result<SimplexFit> {
        let controls = 1..=self.controls.len();
        let columns: Vec<Vec<f64>> = (0..self.pre.len())
            .map(|ti| controls.clone().flat_map(|g| self.log_at(g, ti).to_vec()).collect())
            .collect();
        let target: Vec<f64> = controls.flat_map(|g| self.post_mean(g)).collect();
        simplex_least_squares(&columns, &target, options)
    }

    /// The four aggregates and effects for given weights.
    pub fn effects(&self, unit: &SimplexFit, time: &SimplexFit) -> Result<SyntheticResult> {
        let p = self.categories.len();
        let lam = &time.weights;
        let om = &unit.weights;
        let pre_avg = |g: usize| -> Vec<f64> {
            (0..p)
                .map(|k| lam.iter().enumerate().map(|(ti, l)| l * self.log_at(g, ti)[k]).sum())
                .collect()
        };
        let synth = |per_group: &dyn Fn(usize) -> Vec<f64>| -> Vec<f64> {
            let mut acc = alloc::vec![0.0; p];
            for (j, w) in om.iter().enumerate() {
                for (a, v) in acc.iter_mut().zip(per_group(j + 1)) {
                    *a += w * v;
                }
            }
            acc
        };
        let q = |logs: Vec<f64>| QuantityVector::new(self.categories.clone(), logs.into_iter().map(exp).collect());
        let q_treated_pre = q(pre_avg(0))?;
        let q_treated_post = q(self.post_mean(0))?;
        let q_control_pre = q(synth(&pre_avg))?;
        let q_control_post = q(synth(&|g| self.post_mean(g)))?;

        let denominators: Vec<f64> = (0..p)
            .map(|k| q_treated_pre.values()[k] + q_control_post.values()[k] - q_control_pre.values()[k])
            .collect();
        let bad: Vec<String> = denominators
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_nan() || **d <= 0.0)
            .map(|(k, _)| self.categories.labels()[k].clone())
            .collect();
        if !bad.is_empty() {
            return Err(Error::NonPositiveDenominator(bad));
        }
        let gtt_per_category = q_treated_post
            .values()
            .iter()
            .zip(&denominators)
            .map(|(n, d)| n / d - 1.0)
            .collect();
        let gtt_total = q_treated_post.total() / denominators.iter().sum::<f64>() - 1.0;
        let gtt_per_category_multiplicative = (0..p)
            .map(|k| {
                exp(ln(q_treated_post.values()[k]) - ln(q_treated_pre.values()[k]) - ln(q_control_post.values()[k])
                    + ln(q_control_pre.values()[k]))
                    - 1.0
            })
            .collect();

        let pi_treated_pre = simplex::closure(&q_treated_pre);
        let pi_treated_post = simplex::closure(&q_treated_post);
        let pi_control_pre = simplex::closure(&q_control_pre);
        let pi_control_post = simplex::closure(&q_control_post);
        let post_gap = simplex::comp_diff(&pi_treated_post, &pi_control_post)?;
        let pre_gap = simplex::comp_diff(&pi_treated_pre, &pi_control_pre)?;
        Ok(SyntheticResult {
            treated: self.treated.clone(),
            controls: self.controls.clone(),
            pre_periods: self.pre.clone(),
            post_periods: self.post.clone(),
            unit_weights: unit.clone(),
            time_weights: time.clone(),
            ctt: simplex::perturb(&post_gap, &pre_gap)?,
            ctt_difference: simplex::comp_diff(&post_gap, &pre_gap)?,
            q_treated_pre,
            q_treated_post,
            q_control_pre,
            q_control_post,
            gtt_per_category,
            gtt_total,
            gtt_per_category_multiplicative,
            pi_treated_pre,
            pi_treated_post,
            pi_control_pre,
            pi_control_post,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticResult {
    pub treated: String,
    pub controls: Vec<String>,
    pub pre_periods: Vec<i64>,
    pub post_periods: Vec<i64>,
    pub unit_weights: SimplexFit,
    pub time_weights: SimplexFit,
    pub q_treated_pre: QuantityVector,
    pub q_treated_post: QuantityVector,
    pub q_control_pre: QuantityVector,
    pub q_control_post: QuantityVector,
    /// `q_tr,post / (q_tr,pre + q_ctl,post - q_ctl,pre) - 1`
    pub gtt_per_category: Vec<f64>,
    /// Same ratio on category sums.
    pub gtt_total: f64,
    /// `q_tr,post · q_ctl,pre / (q_tr,pre · q_ctl,post) - 1`
    pub gtt_per_category_multiplicative: Vec<f64>,
    pub pi_treated_pre: Composition,
    pub pi_treated_post: Composition,
    pub pi_control_pre: Composition,
    pub pi_control_post: Composition,
    /// `(π_tr,post ⊖ π_ctl,post) ⊕ (π_tr,pre ⊖ π_ctl,pre)`
    pub ctt: Composition,
    /// `(π_tr,post ⊖ π_ctl,post) ⊖ (π_tr,pre ⊖ π_ctl,pre)`
    pub ctt_difference: Composition,
}

/// Solves both weight problems and evaluates the effects.
pub fn synthetic_effects(panel: &PanelDataset, t0: i64, options: &SolverOptions) -> Result<SyntheticResult> {
    let design = SyntheticDesign::new(panel, t0)?;
    let unit = design.solve_unit_weights(options)?;
    let time = design.solve_time_weights(options)?;
    design.effects(&unit, &time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{PanelOptions, Record};
    use alloc::vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `paths[g][t]` are quantity vectors; group 0 is treated from `t0 + 1`.
    fn panel(paths: &[Vec<Vec<f64>>], t0: i64) -> PanelDataset {
        let mut rows = Vec::new();
        for (g, path) in paths.iter().enumerate() {
            for (t, v) in path.iter().enumerate() {
                for (k, &x) in v.iter().enumerate() {
                    rows.push(Record::new(alloc::format!("g{g}"), t as i64 + 1, alloc::format!("c{k}"), x));
                }
            }
        }
        PanelDataset::from_records(&rows, &PanelOptions::default())
            .unwrap()
            .with_treated("g0", t0 + 1)
            .unwrap()
    }

    fn objective(columns: &[Vec<f64>], target: &[f64], w: &[f64]) -> f64 {
        (0..target.len())
            .map(|i| {
                let r: f64 = columns.iter().zip(w).map(|(c, x)| c[i] * x).sum::<f64>() - target[i];
                r * r
            })
            .sum()
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_to_simplex(&[0.2, 0.3, 0.5]), [0.2, 0.3, 0.5]);
        assert_eq!(project_to_simplex(&[5.0, 0.0, 0.0]), [1.0, 0.0, 0.0]);
        let p = project_to_simplex(&[1.0, 1.0]);
        assert_eq!(p, [0.5, 0.5]);
        let p = project_to_simplex(&[-3.0, 0.4, 0.9]);
        assert!((p[0]).abs() < 1e-15 && (p[1] - 0.25).abs() < 1e-15 && (p[2] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn single_control_and_single_period() {
        let paths = vec![
            vec![vec![3.0, 4.0], vec![6.0, 2.0]],
            vec![vec![2.0, 5.0], vec![3.0, 7.0]],
        ];
        let p = panel(&paths, 1);
        let r = synthetic_effects(&p, 1, &SolverOptions::default()).unwrap();
        assert_eq!(r.unit_weights.weights, [1.0]);
        assert_eq!(r.time_weights.weights, [1.0]);
        // q_1,post / (q_1,pre + q_0,post - q_0,pre) - 1
        let want = [6.0 / (3.0 + 3.0 - 2.0) - 1.0, 2.0 / (4.0 + 7.0 - 5.0) - 1.0];
        for (g, w) in r.gtt_per_category.iter().zip(want) {
            assert!((g - w).abs() < 1e-12);
        }
        assert!((r.gtt_total - (8.0 / 10.0 - 1.0)).abs() < 1e-12);
        let mult = [6.0 * 2.0 / (3.0 * 3.0) - 1.0, 2.0 * 5.0 / (4.0 * 7.0) - 1.0];
        for (g, w) in r.gtt_per_category_multiplicative.iter().zip(mult) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn treated_equal_to_controls_is_null() {
        let path = vec![vec![3.0, 4.0, 1.0], vec![5.0, 2.0, 2.0], vec![4.0, 4.0, 3.0], vec![6.0, 1.0, 2.0]];
        let p = panel(&[path.clone(), path.clone(), path], 2);
        let r = synthetic_effects(&p, 2, &SolverOptions::default()).unwrap();
        assert!(r.gtt_per_category.iter().all(|g| g.abs() < 1e-12));
        assert!(r.ctt.shares().iter().all(|s| (s - 1.0 / 3.0).abs() < 1e-12));
        assert!(r.ctt_difference.shares().iter().all(|s| (s - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn flat_controls_accept_any_time_weights() {
        let flat = vec![vec![2.0, 3.0]; 4];
        let p = panel(&[vec![vec![1.0, 1.0], vec![2.0, 1.0], vec![3.0, 1.0], vec![9.0, 1.0]], flat.clone(), flat], 3);
        let d = SyntheticDesign::new(&p, 3).unwrap();
        let time = d.solve_time_weights(&SolverOptions::default()).unwrap();
        assert!(time.objective < 1e-20);
        assert!((time.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(time.weights.iter().all(|&w| w >= 0.0));
        assert!(time.converged);
    }

    #[test]
    fn zero_residual_unit_weights_concentrate() {
        let treated = vec![vec![3.0, 4.0, 1.0], vec![5.0, 2.0, 2.0], vec![4.0, 4.0, 3.0], vec![9.0, 9.0, 9.0]];
        let mut other = treated.clone();
        other.iter_mut().for_each(|v| v[0] *= 3.0);
        let mut third = treated.clone();
        third.iter_mut().for_each(|v| v[2] /= 2.0);
        let p = panel(&[treated.clone(), other, treated, third], 3);
        let d = SyntheticDesign::new(&p, 3).unwrap();
        let fit = d.solve_unit_weights(&SolverOptions::default()).unwrap();
        assert!(fit.objective <= 1e-12, "{fit:?}");
        assert!(fit.weights[1] >= 1.0 - 1e-6, "{fit:?}");
    }

    #[test]
    fn averaging_controls_reach_zero() {
        // log-paths of the two controls average exactly to the treated path
        let treated = vec![vec![4.0, 9.0], vec![2.0, 8.0], vec![1.0, 1.0]];
        let a = vec![vec![2.0, 3.0], vec![1.0, 4.0], vec![1.0, 1.0]];
        let b = vec![vec![8.0, 27.0], vec![4.0, 16.0], vec![1.0, 1.0]];
        let p = panel(&[treated, a, b], 2);
        let d = SyntheticDesign::new(&p, 2).unwrap();
        let fit = d.solve_unit_weights(&SolverOptions::default()).unwrap();
        assert!(fit.objective <= 1e-12);
        assert!((fit.weights[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn time_weights_concentrate_on_matching_period() {
        // pre-period 2 of each control equals its post-period mean
        let c1 = vec![vec![1.0, 2.0], vec![3.0, 5.0], vec![7.0, 1.0], vec![1.0, 25.0], vec![9.0, 1.0]];
        let c2 = vec![vec![2.0, 2.0], vec![1.0, 9.0], vec![5.0, 5.0], vec![1.0, 9.0], vec![1.0, 9.0]];
        let treated = vec![vec![1.0, 1.0]; 5];
        let p = panel(&[treated, c1, c2], 3);
        let d = SyntheticDesign::new(&p, 3).unwrap();
        let fit = d.solve_time_weights(&SolverOptions::default()).unwrap();
        assert!(fit.objective <= 1e-12, "{fit:?}");
        assert!(fit.weights[1] >= 1.0 - 1e-6);
    }

    #[test]
    fn design_errors() {
        let path = vec![vec![1.0, 2.0], vec![2.0, 3.0], vec![3.0, 4.0]];
        let p = panel(&[path.clone(), path.clone()], 1);
        assert!(matches!(SyntheticDesign::new(&p, 0), Err(Error::BadPeriod(_))));
        assert!(matches!(SyntheticDesign::new(&p, 3), Err(Error::BadPeriod(_))));
        assert!(matches!(SyntheticDesign::new(&p, 2), Err(Error::BadLayout(_))));
        assert!(simplex_least_squares(&[], &[1.0], &SolverOptions::default()).is_err());
    }

    #[test]
    fn non_positive_denominator_is_reported() {
        // control falls sharply while treated stays low: q_tr,pre + q_ctl,post - q_ctl,pre < 0 for c0
        let p = panel(
            &[
                vec![vec![1.0, 5.0], vec![1.0, 5.0]],
                vec![vec![100.0, 5.0], vec![1.0, 5.0]],
            ],
            1,
        );
        assert_eq!(
            synthetic_effects(&p, 1, &SolverOptions::default()).unwrap_err(),
            Error::NonPositiveDenominator(vec!["c0".into()])
        );
    }

    #[test]
    fn beats_random_simplex_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            // p = 3, four controls, five pre-periods
            let columns: Vec<Vec<f64>> = (0..4).map(|_| (0..15).map(|_| rng.random_range(0.0..5.0)).collect()).collect();
            let target: Vec<f64> = (0..15).map(|_| rng.random_range(0.0..5.0)).collect();
            let fit = simplex_least_squares(&columns, &target, &SolverOptions::default()).unwrap();
            assert!(fit.converged);
            assert!((fit.objective - objective(&columns, &target, &fit.weights)).abs() < 1e-9);
            for j in 0..4 {
                let mut v = vec![0.0; 4];
                v[j] = 1.0;
                assert!(fit.objective <= objective(&columns, &target, &v) + 1e-12);
            }
            for _ in 0..10_000 {
                let e: Vec<f64> = (0..4).map(|_| -ln(1.0 - rng.random::<f64>())).collect();
                let s: f64 = e.iter().sum();
                let w: Vec<f64> = e.iter().map(|x| x / s).collect();
                assert!(fit.objective <= objective(&columns, &target, &w) + 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn permuting_controls_permutes_weights(
            data in proptest::collection::vec(0.0f64..5.0, 4 * 12 + 12),
            shift in 1usize..4,
        ) {
            let columns: Vec<Vec<f64>> = data[..48].chunks(12).map(<[f64]>::to_vec).collect();
            let target = &data[48..];
            let a = simplex_least_squares(&columns, target, &SolverOptions::default()).unwrap();
            let mut rotated = columns.clone();
            rotated.rotate_left(shift);
            let b = simplex_least_squares(&rotated, target, &SolverOptions::default()).unwrap();
            prop_assert!((a.objective - b.objective).abs() <= 1e-9 * (1.0 + a.objective));
            prop_assert!((a.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for j in 0..4 {
                prop_assert!((a.weights[(j + shift) % 4] - b.weights[j]).abs() < 1e-5);
            }
        }
    }
}
