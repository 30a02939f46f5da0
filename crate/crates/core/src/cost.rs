//! Resource cost parameterizations.
//!
//! Four families are supported: an explicit per-load table, step functions
//! with fixed integer break points, sparse polynomials of bounded degree, and
//! fair cost sharing of a fixed resource cost. Each maps a load `ℓ ∈ 1..=n`
//! to a nonnegative cost.

use crate::error::{Error, Result, Subject, Violation};
use crate::scalar::{max_of, min_of, Scalar};

/// Highest polynomial degree accepted by validation.
pub const MAX_POLYNOMIAL_DEGREE: usize = 8;

/// Explicit costs `c_r(1..=n)`, no monotonicity required.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularCosts<S> {
    /// `table[r][ℓ - 1] = c_r(ℓ)`.
    pub table: Vec<Vec<S>>,
}

/// `c_r(ℓ)` is the sum of the jumps whose break point is at most `ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunctionCosts<S> {
    /// Strictly increasing per resource, starting at 1.
    pub breaks: Vec<Vec<usize>>,
    /// One jump per break point, each in `(0, 1]`.
    pub jumps: Vec<Vec<S>>,
}

/// `c_r(ℓ) = Σ_j a_{r,j} ℓ^j` with dense coefficient vectors of length
/// `degree + 1`. Zero entries are outside the support and never perturbed.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialCosts<S> {
    pub degree: usize,
    pub coefficients: Vec<Vec<S>>,
}

/// `c_r(ℓ) = a_r / ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSharingCosts<S> {
    pub fixed: Vec<S>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Tabular,
    StepFunction,
    Polynomial,
    CostSharing,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Tabular,
        ModelKind::StepFunction,
        ModelKind::Polynomial,
        ModelKind::CostSharing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Tabular => "tabular",
            ModelKind::StepFunction => "step_function",
            ModelKind::Polynomial => "polynomial",
            ModelKind::CostSharing => "cost_sharing",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostModel<S> {
    Tabular(TabularCosts<S>),
    StepFunction(StepFunctionCosts<S>),
    Polynomial(PolynomialCosts<S>),
    CostSharing(CostSharingCosts<S>),
}

impl<S> CostModel<S> {
    pub fn kind(&self) -> ModelKind {
        match self {
            CostModel::Tabular(_) => ModelKind::Tabular,
            CostModel::StepFunction(_) => ModelKind::StepFunction,
            CostModel::Polynomial(_) => ModelKind::Polynomial,
            CostModel::CostSharing(_) => ModelKind::CostSharing,
        }
    }

    /// Number of resources the parameters describe.
    pub fn resource_count(&self) -> usize {
        match self {
            CostModel::Tabular(t) => t.table.len(),
            CostModel::StepFunction(s) => s.breaks.len(),
            CostModel::Polynomial(p) => p.coefficients.len(),
            CostModel::CostSharing(c) => c.fixed.len(),
        }
    }
}

impl<S: Scalar> PolynomialCosts<S> {
    /// Exponents with a nonzero coefficient on resource `r`.
    pub fn support(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        self.coefficients[r]
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != S::zero())
            .map(|(j, _)| j)
    }

    /// Total number of nonzero coefficients over all resources.
    pub fn support_size(&self) -> usize {
        (0..self.coefficients.len())
            .map(|r| self.support(r).count())
            .sum()
    }
}

impl<S> StepFunctionCosts<S> {
    /// Total number of break points over all resources.
    pub fn total_breaks(&self) -> usize {
        self.breaks.iter().map(Vec::len).sum()
    }
}

impl<S: Scalar> CostModel<S> {
    /// Cost of resource `r` when `load` players use it, evaluated directly
    /// from the parameters.
    pub fn resource_cost(&self, r: usize, load: usize, n: usize) -> Result<S> {
        if load == 0 || load > n {
            return Err(Error::LoadOutOfRange { load, n });
        }
        Ok(match self {
            CostModel::Tabular(t) => t.table[r][load - 1],
            CostModel::StepFunction(s) => s.breaks[r]
                .iter()
                .zip(&s.jumps[r])
                .take_while(|(b, _)| **b <= load)
                .fold(S::zero(), |acc, (_, a)| acc + *a),
            CostModel::Polynomial(p) => {
                let x = S::from_usize(load);
                p.coefficients[r]
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| **a != S::zero())
                    .fold(S::zero(), |acc, (j, a)| acc + *a * x.powi(j as u32))
            }
            CostModel::CostSharing(c) => c.fixed[r] / S::from_usize(load),
        })
    }

    /// All the designated parameters in canonical order (resource-major).
    pub fn parameters(&self) -> Vec<S> {
        match self {
            CostModel::Tabular(t) => t.table.iter().flatten().copied().collect(),
            CostModel::StepFunction(s) => s.jumps.iter().flatten().copied().collect(),
            CostModel::Polynomial(p) => p
                .coefficients
                .iter()
                .flatten()
                .copied()
                .filter(|a| *a != S::zero())
                .collect(),
            CostModel::CostSharing(c) => c.fixed.clone(),
        }
    }

    /// Checks the parameters against `n` players and `m` resources.
    pub fn validate(&self, n: usize, m: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.resource_count() != m {
            out.push(Violation::new(
                Subject::Game,
                format!(
                    "cost model describes {} resources, game has {m}",
                    self.resource_count()
                ),
            ));
            return out;
        }
        let unit = |x: S| x >= S::zero() && x <= S::one() && x.to_f64().is_finite();
        let positive_unit = |x: S| unit(x) && x > S::zero();
        match self {
            CostModel::Tabular(t) => {
                for (r, row) in t.table.iter().enumerate() {
                    if row.len() != n {
                        out.push(Violation::new(
                            Subject::Resource(r),
                            format!(
                                "cost table has {} entries, expected one per load 1..={n}",
                                row.len()
                            ),
                        ));
                    }
                    if let Some((l, c)) = row.iter().enumerate().find(|(_, c)| !unit(**c)) {
                        out.push(Violation::new(
                            Subject::Resource(r),
                            format!("cost at load {} is {c}, outside [0, 1]", l + 1),
                        ));
                    }
                }
            }
            CostModel::StepFunction(s) => {
                if s.jumps.len() != s.breaks.len() {
                    out.push(Violation::new(
                        Subject::Game,
                        "break and jump lists differ in length",
                    ));
                    return out;
                }
                for (r, (breaks, jumps)) in s.breaks.iter().zip(&s.jumps).enumerate() {
                    let res = Subject::Resource(r);
                    if breaks.is_empty() {
                        out.push(Violation::new(
                            res,
                            "no break points (b_{r,1} = 1 is required)",
                        ));
                        continue;
                    }
                    if breaks[0] != 1 {
                        out.push(Violation::new(
                            res,
                            format!("first break point is {}, must be b_{{r,1}} = 1", breaks[0]),
                        ));
                    }
                    if breaks.windows(2).any(|w| w[0] >= w[1]) {
                        out.push(Violation::new(
                            res,
                            "break points are not strictly increasing",
                        ));
                    }
                    if let Some(&last) = breaks.last() {
                        if last > n {
                            out.push(Violation::new(
                                res,
                                format!("break point {last} exceeds n = {n}"),
                            ));
                        }
                    }
                    if jumps.len() != breaks.len() {
                        out.push(Violation::new(
                            res,
                            format!("{} jumps for {} break points", jumps.len(), breaks.len()),
                        ));
                    }
                    if let Some(a) = jumps.iter().find(|a| !positive_unit(**a)) {
                        out.push(Violation::new(res, format!("jump {a} outside (0, 1]")));
                    }
                }
            }
            CostModel::Polynomial(p) => {
                if p.degree > MAX_POLYNOMIAL_DEGREE {
                    out.push(Violation::new(
                        Subject::Game,
                        format!(
                            "degree {} exceeds the cap of {MAX_POLYNOMIAL_DEGREE}",
                            p.degree
                        ),
                    ));
                }
                for (r, coef) in p.coefficients.iter().enumerate() {
                    let res = Subject::Resource(r);
                    if coef.len() != p.degree + 1 {
                        out.push(Violation::new(
                            res,
                            format!(
                                "{} coefficients, expected degree + 1 = {}",
                                coef.len(),
                                p.degree + 1
                            ),
                        ));
                    }
                    if let Some(a) = coef.iter().find(|a| !unit(**a)) {
                        out.push(Violation::new(
                            res,
                            format!("coefficient {a} outside [0, 1]"),
                        ));
                    }
                    if coef.iter().all(|a| *a == S::zero()) {
                        out.push(Violation::new(res, "all coefficients are zero"));
                    }
                }
            }
            CostModel::CostSharing(c) => {
                for (r, a) in c.fixed.iter().enumerate() {
                    if !positive_unit(*a) {
                        out.push(Violation::new(
                            Subject::Resource(r),
                            format!("fixed cost {a} outside (0, 1]"),
                        ));
                    }
                }
            }
        }
        out
    }

    /// Upper bound on the Rosenthal potential of any profile.
    ///
    /// Tabular: `n m c_max`. Step: `n d a_max`. Polynomial: `d̃ n^{d+1} a_max`.
    /// Cost sharing: `m H_n a_max`.
    pub fn potential_upper_bound(&self, n: usize, m: usize) -> S {
        let max = max_of(self.parameters()).unwrap_or_else(S::zero);
        let nn = S::from_usize(n);
        match self {
            CostModel::Tabular(_) => nn * S::from_usize(m) * max,
            CostModel::StepFunction(s) => nn * S::from_usize(s.total_breaks()) * max,
            CostModel::Polynomial(p) => {
                S::from_usize(p.support_size()) * nn.powi(p.degree as u32 + 1) * max
            }
            CostModel::CostSharing(_) => S::from_usize(m) * harmonic::<S>(n) * max,
        }
    }

    /// Lower bound on any player's cost at any profile.
    ///
    /// Tabular: `c_min`. Step and polynomial: smallest jump or nonzero
    /// coefficient. Cost sharing: `a_min / n`.
    pub fn min_cost_lower_bound(&self, n: usize) -> Result<S> {
        let min = min_of(self.parameters())
            .ok_or_else(|| Error::Degenerate("cost model has no parameters".into()))?;
        let bound = match self {
            CostModel::CostSharing(_) => min / S::from_usize(n),
            _ => min,
        };
        if bound > S::zero() {
            Ok(bound)
        } else {
            Err(Error::Degenerate(format!(
                "smallest {} cost parameter is zero; player costs are not bounded away from 0",
                self.kind()
            )))
        }
    }
}

/// `H_n = Σ_{j=1}^n 1/j` by direct summation.
pub fn harmonic<S: Scalar>(n: usize) -> S {
    (1..=n).fold(S::zero(), |acc, j| acc + S::one() / S::from_usize(j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_rational::Rational64;

    fn step() -> CostModel<f64> {
        CostModel::StepFunction(StepFunctionCosts {
            breaks: vec![vec![1, 3]],
            jumps: vec![vec![0.2, 0.3]],
        })
    }

    #[test]
    fn step_function_sums_jumps_up_to_load() {
        let c = step();
        assert_abs_diff_eq!(c.resource_cost(0, 1, 3).unwrap(), 0.2, epsilon = 1e-9);
        assert_abs_diff_eq!(c.resource_cost(0, 2, 3).unwrap(), 0.2, epsilon = 1e-9);
        assert_abs_diff_eq!(c.resource_cost(0, 3, 3).unwrap(), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn polynomial_uses_support_only() {
        let c = CostModel::Polynomial(PolynomialCosts {
            degree: 2,
            coefficients: vec![vec![0.1, 0.0, 0.2]],
        });
        // 0.1 + 0.2 * 2^2
        assert_abs_diff_eq!(c.resource_cost(0, 2, 2).unwrap(), 0.9, epsilon = 1e-9);
        if let CostModel::Polynomial(p) = &c {
            assert_eq!(p.support(0).collect::<Vec<_>>(), vec![0, 2]);
            assert_eq!(p.support_size(), 2);
        }
    }

    #[test]
    fn cost_sharing_splits_evenly() {
        let c = CostModel::CostSharing(CostSharingCosts { fixed: vec![0.6] });
        assert_abs_diff_eq!(c.resource_cost(0, 3, 3).unwrap(), 0.2, epsilon = 1e-9);
    }

    #[test]
    fn load_out_of_range() {
        let c = step();
        assert_eq!(
            c.resource_cost(0, 0, 3),
            Err(Error::LoadOutOfRange { load: 0, n: 3 })
        );
        assert_eq!(
            c.resource_cost(0, 4, 3),
            Err(Error::LoadOutOfRange { load: 4, n: 3 })
        );
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic::<Rational64>(3), Rational64::new(11, 6));
        assert_abs_diff_eq!(harmonic::<f64>(2), 1.5, epsilon = 1e-12);
        assert_eq!(harmonic::<f64>(0), 0.0);
    }

    #[test]
    fn cost_sharing_bounds() {
        let c = CostModel::CostSharing(CostSharingCosts { fixed: vec![0.6] });
        assert_abs_diff_eq!(c.potential_upper_bound(2, 1), 0.9, epsilon = 1e-9);
        let c = CostModel::CostSharing(CostSharingCosts {
            fixed: vec![0.6, 0.9],
        });
        assert_abs_diff_eq!(c.min_cost_lower_bound(3).unwrap(), 0.2, epsilon = 1e-9);
    }

    #[test]
    fn step_lower_bound_is_min_jump() {
        assert_abs_diff_eq!(
            step().min_cost_lower_bound(3).unwrap(),
            0.2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_table_is_degenerate() {
        let c = CostModel::Tabular(TabularCosts {
            table: vec![vec![0.0, 0.0]],
        });
        assert!(matches!(
            c.min_cost_lower_bound(2),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn validation_findings() {
        let bad_first = CostModel::StepFunction(StepFunctionCosts {
            breaks: vec![vec![2]],
            jumps: vec![vec![0.5]],
        });
        let v = bad_first.validate(3, 1);
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("b_{r,1} = 1"), "{}", v[0]);

        let zero_jump = CostModel::StepFunction(StepFunctionCosts {
            breaks: vec![vec![1]],
            jumps: vec![vec![0.0]],
        });
        assert_eq!(zero_jump.validate(3, 1).len(), 1);

        let high = CostModel::Polynomial(PolynomialCosts {
            degree: 9,
            coefficients: vec![vec![0.1; 10]],
        });
        assert!(high
            .validate(2, 1)
            .iter()
            .any(|v| v.message.contains("cap")));

        let short = CostModel::Tabular(TabularCosts {
            table: vec![vec![0.1, 0.2], vec![0.1]],
        });
        let v = short.validate(2, 2);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].subject, Subject::Resource(1));
        assert!(v[0].to_string().starts_with("resource 2"));
    }

    #[test]
    fn model_kind_parses_its_name() {
        for k in ModelKind::ALL {
            assert_eq!(k.name().parse::<ModelKind>().unwrap(), k);
        }
        assert!("linear".parse::<ModelKind>().is_err());
    }
}
