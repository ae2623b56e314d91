//! Aitchison geometry on the open probability simplex.
//!
//! Compositions form a real vector space under perturbation ([`perturb`]) and
//! powering ([`power`]), with the uniform composition as the zero element.
//! The log-odds map ([`log_odds`]) is a linear isomorphism onto `R^(p-1)`, so
//! every operation here is evaluated on log-shares and mapped back with a
//! max-shifted softmax.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::{exp, ln};

/// Tolerance on `Σ shares = 1` accepted when constructing a [`Composition`].
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Ordered category labels `c_1..c_p`, shared cheaply between vectors.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Categories(Arc<[String]>);

impl Categories {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::TooFewCategories(labels.len()));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::InconsistentCategories(alloc::format!(
                    "duplicate category `{a}`"
                )));
            }
        }
        Ok(Self(labels.into()))
    }

    /// Anonymous labels `c1..cp`.
    pub fn numbered(p: usize) -> Result<Self> {
        Self::new((1..=p).map(|k| alloc::format!("c{k}")))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.iter().position(|l| l == label)
    }

    /// Index of the default baseline (the last category).
    pub fn last_index(&self) -> usize {
        self.0.len() - 1
    }

    pub(crate) fn same_as(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }

    pub(crate) fn ensure_same(&self, other: &Self) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::LabelMismatch)
        }
    }
}

impl fmt::Debug for Categories {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Strictly positive quantities per category for one group-time cell.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantityVector {
    categories: Categories,
    values: Vec<f64>,
}

impl QuantityVector {
    pub fn new(categories: Categories, values: Vec<f64>) -> Result<Self> {
        check_len(&categories, values.len())?;
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteInput);
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveEntry { index, value });
            }
        }
        Ok(Self { categories, values })
    }

    pub fn categories(&self) -> &Categories {
        &self.categories
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn log_values(&self) -> Vec<f64> {
        self.values.iter().map(|&v| ln(v)).collect()
    }

    /// Builds a vector from componentwise log-quantities.
    pub fn from_logs(categories: Categories, logs: &[f64]) -> Result<Self> {
        check_len(&categories, logs.len())?;
        Self::new(categories, logs.iter().map(|&l| exp(l)).collect())
    }

    /// Multiplies every entry by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.categories.clone(),
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

/// A point in the open simplex: positive shares summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Composition {
    categories: Categories,
    shares: Vec<f64>,
}

impl Composition {
    /// Validates positivity and `|Σ - 1| <= 1e-9`, then stores the shares
    /// renormalized.
    pub fn new(categories: Categories, shares: Vec<f64>) -> Result<Self> {
        check_len(&categories, shares.len())?;
        for (index, &value) in shares.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteInput);
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveEntry { index, value });
            }
        }
        let sum: f64 = shares.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::NotNormalized(sum));
        }
        let shares = shares.into_iter().map(|s| s / sum).collect();
        Ok(Self { categories, shares })
    }

    pub fn uniform(categories: Categories) -> Self {
        let p = categories.len();
        Self {
            categories,
            shares: alloc::vec![1.0 / p as f64; p],
        }
    }

    /// Softmax of unnormalized log-weights, max-shifted.
    pub fn from_log_weights(categories: Categories, logs: &[f64]) -> Result<Self> {
        check_len(&categories, logs.len())?;
        if logs.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|&l| exp(l - m)).collect();
        let s: f64 = w.iter().sum();
        let shares: Vec<f64> = w.into_iter().map(|x| x / s).collect();
        if let Some((index, &value)) = shares.iter().enumerate().find(|(_, &v)| v <= 0.0) {
            // underflow: the composition left the open simplex numerically
            return Err(Error::NonPositiveEntry { index, value });
        }
        Ok(Self { categories, shares })
    }

    pub fn categories(&self) -> &Categories {
        &self.categories
    }

    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }

    pub fn log_shares(&self) -> Vec<f64> {
        self.shares.iter().map(|&s| ln(s)).collect()
    }

    /// Reinterprets the shares as quantities.
    pub fn as_quantities(&self) -> QuantityVector {
        QuantityVector {
            categories: self.categories.clone(),
            values: self.shares.clone(),
        }
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.shares
            .iter()
            .zip(&other.shares)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Log-odds coordinates against a baseline category.
///
/// `values` lists `ln(π_k / π_baseline)` for every non-baseline `k`, in the
/// original category order.
#[derive(Clone, Debug, PartialEq)]
pub struct LogOdds {
    categories: Categories,
    baseline: usize,
    values: Vec<f64>,
}

impl LogOdds {
    pub fn new(categories: Categories, baseline: usize, values: Vec<f64>) -> Result<Self> {
        if baseline >= categories.len() {
            return Err(Error::BadBaseline {
                index: baseline,
                len: categories.len(),
            });
        }
        if values.len() + 1 != categories.len() {
            return Err(Error::LengthMismatch {
                expected: categories.len() - 1,
                found: values.len(),
            });
        }
        Ok(Self {
            categories,
            baseline,
            values,
        })
    }

    pub fn zeros(categories: Categories, baseline: usize) -> Result<Self> {
        let n = categories.len() - 1;
        Self::new(categories, baseline, alloc::vec![0.0; n])
    }

    pub fn categories(&self) -> &Categories {
        &self.categories
    }

    pub fn baseline(&self) -> usize {
        self.baseline
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Labels of the non-baseline coordinates, aligned with `values`.
    pub fn coordinate_labels(&self) -> impl Iterator<Item = &str> {
        let b = self.baseline;
        self.categories
            .labels()
            .iter()
            .enumerate()
            .filter(move |(k, _)| *k != b)
            .map(|(_, l)| l.as_str())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.categories.ensure_same(&other.categories)?;
        if self.baseline != other.baseline {
            return Err(Error::BadBaseline {
                index: other.baseline,
                len: self.categories.len(),
            });
        }
        Ok(Self {
            categories: self.categories.clone(),
            baseline: self.baseline,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            categories: self.categories.clone(),
            baseline: self.baseline,
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_len(categories: &Categories, n: usize) -> Result<()> {
    if n != categories.len() {
        return Err(Error::LengthMismatch {
            expected: categories.len(),
            found: n,
        });
    }
    Ok(())
}

/// Normalizes positive quantities to shares.
pub fn closure(q: &QuantityVector) -> Composition {
    let total = q.total();
    Composition {
        categories: q.categories.clone(),
        shares: q.values.iter().map(|v| v / total).collect(),
    }
}

/// Perturbation `a ⊕ b`.
pub fn perturb(a: &Composition, b: &Composition) -> Result<Composition> {
    a.categories.ensure_same(&b.categories)?;
    let logs: Vec<f64> = a
        .shares
        .iter()
        .zip(&b.shares)
        .map(|(&x, &y)| ln(x) + ln(y))
        .collect();
    Composition::from_log_weights(a.categories.clone(), &logs)
}

/// Powering `alpha ⊙ a`.
pub fn power(alpha: f64, a: &Composition) -> Result<Composition> {
    if !alpha.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let logs: Vec<f64> = a.shares.iter().map(|&x| alpha * ln(x)).collect();
    Composition::from_log_weights(a.categories.clone(), &logs)
}

/// Compositional difference `a ⊖ b = a ⊕ (-1 ⊙ b)`.
pub fn comp_diff(a: &Composition, b: &Composition) -> Result<Composition> {
    a.categories.ensure_same(&b.categories)?;
    let logs: Vec<f64> = a
        .shares
        .iter()
        .zip(&b.shares)
        .map(|(&x, &y)| ln(x) - ln(y))
        .collect();
    Composition::from_log_weights(a.categories.clone(), &logs)
}

/// Log-odds transform against the category at `baseline`.
pub fn log_odds(a: &Composition, baseline: usize) -> Result<LogOdds> {
    let p = a.len();
    if baseline >= p {
        return Err(Error::BadBaseline {
            index: baseline,
            len: p,
        });
    }
    let lb = ln(a.shares[baseline]);
    let values = a
        .shares
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != baseline)
        .map(|(_, &s)| ln(s) - lb)
        .collect();
    Ok(LogOdds {
        categories: a.categories.clone(),
        baseline,
        values,
    })
}

/// Inverse log-odds (softmax with the baseline pinned at zero).
pub fn inv_log_odds(v: &LogOdds) -> Result<Composition> {
    let mut logs = Vec::with_capacity(v.categories.len());
    let mut it = v.values.iter();
    for k in 0..v.categories.len() {
        if k == v.baseline {
            logs.push(0.0);
        } else {
            logs.push(*it.next().expect("length checked on construction"));
        }
    }
    Composition::from_log_weights(v.categories.clone(), &logs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn abc() -> Categories {
        Categories::new(["a", "b", "c"]).unwrap()
    }

    fn comp(v: &[f64]) -> Composition {
        Composition::new(Categories::numbered(v.len()).unwrap(), v.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn closure_examples() {
        let q = QuantityVector::new(abc(), vec![10.0, 20.0, 40.0]).unwrap();
        let c = closure(&q);
        assert!(close(c.shares(), &[1.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0], 1e-15));
        assert_eq!(c.categories(), &abc());

        let u = closure(&QuantityVector::new(abc(), vec![1.0, 1.0, 1.0]).unwrap());
        assert!(close(u.shares(), &[1.0 / 3.0; 3], 1e-15));

        let err = QuantityVector::new(abc(), vec![5.0, 0.0, 5.0]).unwrap_err();
        assert_eq!(err, Error::NonPositiveEntry { index: 1, value: 0.0 });
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Categories::new(["only"]).unwrap_err(), Error::TooFewCategories(1));
        assert!(Categories::new(["a", "a"]).is_err());
        assert!(matches!(
            Composition::new(abc(), vec![0.5, 0.3, 0.3]),
            Err(Error::NotNormalized(_))
        ));
        assert!(matches!(
            Composition::new(abc(), vec![0.5, 0.5]),
            Err(Error::LengthMismatch { .. })
        ));
        assert_eq!(
            QuantityVector::new(abc(), vec![1.0, f64::NAN, 1.0]).unwrap_err(),
            Error::NonFiniteInput
        );
        // within tolerance: stored renormalized
        let c = Composition::new(abc(), vec![0.5, 0.3, 0.2 + 5e-10]).unwrap();
        assert!((c.shares().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn perturb_examples() {
        let a = comp(&[0.5, 0.3, 0.2]);
        let b = comp(&[0.2, 0.3, 0.5]);
        let r = perturb(&a, &b).unwrap();
        assert!(close(r.shares(), &[0.1 / 0.29, 0.09 / 0.29, 0.1 / 0.29], 1e-12));
        assert!(close(r.shares(), &[0.34483, 0.31034, 0.34483], 1e-5));

        let u = Composition::uniform(a.categories().clone());
        assert!(perturb(&u, &a).unwrap().max_abs_diff(&a) < 1e-15);
        let inv = power(-1.0, &a).unwrap();
        assert!(perturb(&a, &inv).unwrap().max_abs_diff(&u) < 1e-15);

        let other = Composition::uniform(abc());
        assert_eq!(perturb(&a, &other).unwrap_err(), Error::LabelMismatch);
    }

    #[test]
    fn power_examples() {
        let a = comp(&[0.5, 0.3, 0.2]);
        assert!(power(1.0, &a).unwrap().max_abs_diff(&a) < 1e-15);
        let z = power(0.0, &a).unwrap();
        assert!(close(z.shares(), &[1.0 / 3.0; 3], 1e-15));
        let sq = power(2.0, &a).unwrap();
        assert!(close(sq.shares(), &[0.25 / 0.38, 0.09 / 0.38, 0.04 / 0.38], 1e-12));
        assert!(close(sq.shares(), &[0.65789, 0.23684, 0.10526], 1e-5));
        assert_eq!(power(f64::INFINITY, &a).unwrap_err(), Error::NonFiniteInput);
    }

    #[test]
    fn comp_diff_examples() {
        let a = comp(&[0.5, 0.3, 0.2]);
        let b = comp(&[0.25, 0.25, 0.5]);
        assert!(close(comp_diff(&a, &a).unwrap().shares(), &[1.0 / 3.0; 3], 1e-15));
        let d = comp_diff(&a, &b).unwrap();
        assert!(close(d.shares(), &[2.0 / 3.6, 1.2 / 3.6, 0.4 / 3.6], 1e-12));
        assert!(close(d.shares(), &[0.55556, 0.33333, 0.11111], 1e-5));
        let back = comp_diff(&perturb(&a, &b).unwrap(), &b).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-15);
        let via_power = perturb(&a, &power(-1.0, &b).unwrap()).unwrap();
        assert!(via_power.max_abs_diff(&d) < 1e-15);
    }

    #[test]
    #[allow(clippy::approx_constant)] // rounded worked-example values
    fn log_odds_examples() {
        let a = comp(&[0.7, 0.2, 0.1]);
        let l = log_odds(&a, 2).unwrap();
        assert!(close(l.values(), &[7.0f64.ln(), 2.0f64.ln()], 1e-14));
        assert!(close(l.values(), &[1.94591, 0.69315], 1e-5));
        let names: Vec<&str> = l.coordinate_labels().collect();
        assert_eq!(names, ["c1", "c2"]);

        let u = Composition::uniform(abc());
        assert!(log_odds(&u, 2).unwrap().values().iter().all(|v| v.abs() < 1e-15));
        assert_eq!(
            log_odds(&a, 3).unwrap_err(),
            Error::BadBaseline { index: 3, len: 3 }
        );
    }

    #[test]
    fn inv_log_odds_examples() {
        let cats = abc();
        let z = LogOdds::zeros(cats.clone(), 2).unwrap();
        assert!(close(inv_log_odds(&z).unwrap().shares(), &[1.0 / 3.0; 3], 1e-15));

        let v = LogOdds::new(cats.clone(), 2, vec![-3.14988, -1.49166]).unwrap();
        let c = inv_log_odds(&v).unwrap();
        assert!(close(c.shares(), &[0.03380, 0.17747, 0.78873], 1e-4));

        let bad = LogOdds::new(cats, 2, vec![f64::NAN, 0.0]).unwrap();
        assert_eq!(inv_log_odds(&bad).unwrap_err(), Error::NonFiniteInput);
    }

    #[test]
    fn inv_log_odds_is_overflow_safe() {
        let v = LogOdds::new(abc(), 2, vec![700.0, 699.0]).unwrap();
        let c = inv_log_odds(&v).unwrap();
        let e = core::f64::consts::E;
        assert!((c.shares()[0] - e / (1.0 + e)).abs() < 1e-12);
        assert!(c.shares()[2] > 0.0);
        // beyond the representable range the result leaves the open simplex
        let v = LogOdds::new(abc(), 2, vec![800.0, 0.0]).unwrap();
        assert!(matches!(inv_log_odds(&v), Err(Error::NonPositiveEntry { .. })));
    }

    fn composition_strategy(p: usize) -> impl Strategy<Value = Composition> {
        proptest::collection::vec(-4.0f64..4.0, p).prop_map(move |logs| {
            Composition::from_log_weights(Categories::numbered(p).unwrap(), &logs).unwrap()
        })
    }

    fn sized_pair() -> impl Strategy<Value = (Composition, Composition, Composition, f64, f64)> {
        (2usize..=8).prop_flat_map(|p| {
            (
                composition_strategy(p),
                composition_strategy(p),
                composition_strategy(p),
                -3.0f64..3.0,
                -3.0f64..3.0,
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn vector_space_axioms((a, b, c, alpha, beta) in sized_pair()) {
            let tol = 1e-10;
            let u = Composition::uniform(a.categories().clone());
            // associativity and commutativity of perturbation
            let l = perturb(&perturb(&a, &b).unwrap(), &c).unwrap();
            let r = perturb(&a, &perturb(&b, &c).unwrap()).unwrap();
            prop_assert!(l.max_abs_diff(&r) < tol);
            prop_assert!(perturb(&a, &b).unwrap().max_abs_diff(&perturb(&b, &a).unwrap()) < tol);
            // neutral element and inverses
            prop_assert!(perturb(&a, &u).unwrap().max_abs_diff(&a) < tol);
            prop_assert!(perturb(&a, &power(-1.0, &a).unwrap()).unwrap().max_abs_diff(&u) < tol);
            // distributivity both ways and compatibility
            let l = power(alpha, &perturb(&a, &b).unwrap()).unwrap();
            let r = perturb(&power(alpha, &a).unwrap(), &power(alpha, &b).unwrap()).unwrap();
            prop_assert!(l.max_abs_diff(&r) < tol);
            let l = power(alpha + beta, &a).unwrap();
            let r = perturb(&power(alpha, &a).unwrap(), &power(beta, &a).unwrap()).unwrap();
            prop_assert!(l.max_abs_diff(&r) < tol);
            let l = power(alpha * beta, &a).unwrap();
            let r = power(alpha, &power(beta, &a).unwrap()).unwrap();
            prop_assert!(l.max_abs_diff(&r) < tol);
            prop_assert!(power(1.0, &a).unwrap().max_abs_diff(&a) < tol);
        }

        #[test]
        fn log_odds_is_linear_isomorphism((a, b, _c, alpha, _beta) in sized_pair()) {
            let tol = 1e-10;
            let base = a.len() - 1;
            let la = log_odds(&a, base).unwrap();
            let lb = log_odds(&b, base).unwrap();
            let sum = log_odds(&perturb(&a, &b).unwrap(), base).unwrap();
            prop_assert!(sum.max_abs_diff(&la.add(&lb).unwrap()) < tol);
            let scaled = log_odds(&power(alpha, &a).unwrap(), base).unwrap();
            prop_assert!(scaled.max_abs_diff(&la.scale(alpha)) < tol);
            let diff = log_odds(&comp_diff(&a, &b).unwrap(), base).unwrap();
            prop_assert!(diff.max_abs_diff(&la.sub(&lb).unwrap()) < tol);
            prop_assert!(inv_log_odds(&la).unwrap().max_abs_diff(&a) < 1e-12);
        }

        #[test]
        fn baseline_choice_is_immaterial(a in (2usize..=8).prop_flat_map(composition_strategy), i in 0usize..8, j in 0usize..8) {
            let p = a.len();
            let (i, j) = (i % p, j % p);
            let ri = inv_log_odds(&log_odds(&a, i).unwrap()).unwrap();
            let rj = inv_log_odds(&log_odds(&a, j).unwrap()).unwrap();
            prop_assert!(ri.max_abs_diff(&rj) < 1e-12);
            prop_assert!(ri.max_abs_diff(&a) < 1e-12);
        }

        #[test]
        fn closure_is_idempotent(a in (2usize..=8).prop_flat_map(composition_strategy)) {
            prop_assert!(closure(&a.as_quantities()).max_abs_diff(&a) < 1e-15);
        }
    }
}
