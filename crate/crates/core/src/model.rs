//! Fund data model and the closed-form cost algebra.
//!
//! Administration cost is a fixed base share of the fund plus a discretionary
//! spend `y` on every funded project, while the projects are paid from what
//! is left over. Solving the two relations together gives
//! `AR = (B·V_i + y) / (V_i + y)`, which everything else builds on.

use std::collections::BTreeMap;

use crate::response::ResponseModel;
use crate::{Error, Result, Scalar};

/// Fixed ZAR to USD conversion rate used for the reference cost schedule.
pub const ZAR_TO_USD: f64 = 0.07;

/// Funder-defined inputs of a funding instrument.
#[derive(Debug, Clone, PartialEq)]
pub struct FundSpec<T> {
    /// Total fund value `V_p` per period.
    pub total_fund_value: T,
    /// Average project value `V_i`.
    pub project_value: T,
    /// Non-discretionary cost `B` as a fraction of `V_p`.
    pub base_cost_fraction: T,
    /// Intrinsic project success rate for the domain and RDI focus.
    pub intrinsic_success_rate: T,
    pub money_unit: String,
}

impl<T: Scalar> FundSpec<T> {
    pub fn new(
        total_fund_value: T,
        project_value: T,
        base_cost_fraction: T,
        intrinsic_success_rate: T,
    ) -> Result<Self> {
        let spec = Self {
            total_fund_value,
            project_value,
            base_cost_fraction,
            intrinsic_success_rate,
            money_unit: String::from("money units"),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_money_unit(mut self, unit: impl Into<String>) -> Self {
        self.money_unit = unit.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let vp = self.total_fund_value;
        let vi = self.project_value;
        let b = self.base_cost_fraction;
        let psr = self.intrinsic_success_rate;
        ensure(
            vp.is_finite() && vp > T::zero(),
            "total_fund_value",
            vp,
            "must be positive",
        )?;
        ensure(
            vi.is_finite() && vi > T::zero(),
            "project_value",
            vi,
            "must be positive",
        )?;
        ensure(
            b >= T::zero() && b < T::one(),
            "base_cost_fraction",
            b,
            "must lie in [0, 1)",
        )?;
        ensure(
            psr >= T::zero() && psr <= T::one(),
            "intrinsic_success_rate",
            psr,
            "must lie in [0, 1]",
        )?;
        ensure(
            vi <= vp * (T::one() - b),
            "project_value",
            vi,
            "exceeds the fund left after base costs; not even one project is fundable",
        )
    }

    /// Theoretical maximum number of projects, `V_p / V_i`.
    pub fn max_projects(&self) -> T {
        self.total_fund_value / self.project_value
    }

    /// Returns a copy with every money-denominated field multiplied by `rate`.
    pub fn convert_money(&self, rate: T, unit: impl Into<String>) -> Self {
        Self {
            total_fund_value: self.total_fund_value * rate,
            project_value: self.project_value * rate,
            money_unit: unit.into(),
            ..self.clone()
        }
    }
}

pub(crate) fn ensure<T: Scalar>(
    cond: bool,
    name: &'static str,
    value: T,
    reason: &'static str,
) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Invalid {
            name,
            value: value.as_f64(),
            reason,
        })
    }
}

pub(crate) fn ensure_nonnegative<T: Scalar>(name: &'static str, value: T) -> Result<()> {
    ensure(
        value.is_finite() && value >= T::zero(),
        name,
        value,
        "must be finite and non-negative",
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretionaryTask<T> {
    pub name: String,
    /// Cost per project, over the project's lifetime.
    pub cost_per_project: T,
}

/// Menu of administration tasks: a base share of the fund plus optional
/// per-project tasks whose summed cost is `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSchedule<T> {
    pub base_fraction: T,
    pub discretionary_tasks: Vec<DiscretionaryTask<T>>,
}

impl<T: Scalar> CostSchedule<T> {
    pub fn new(base_fraction: T, tasks: Vec<DiscretionaryTask<T>>) -> Result<Self> {
        ensure(
            base_fraction >= T::zero() && base_fraction < T::one(),
            "base_fraction",
            base_fraction,
            "must lie in [0, 1)",
        )?;
        for task in &tasks {
            ensure_nonnegative("cost_per_project", task.cost_per_project)?;
        }
        Ok(Self {
            base_fraction,
            discretionary_tasks: tasks,
        })
    }

    /// Indicative agency task costs in thousands of ZAR per project.
    pub fn reference() -> Self {
        let tasks = [
            ("detailed internal ex-ante evaluation", 50.0),
            ("external ex-ante evaluation", 400.0),
            ("life cycle project monitoring", 300.0),
            ("internal ex-post evaluation", 150.0),
            ("external ex-post evaluation", 600.0),
            ("awardee training", 200.0),
        ]
        .into_iter()
        .map(|(name, cost)| DiscretionaryTask {
            name: name.to_string(),
            cost_per_project: T::lit(cost),
        })
        .collect();
        Self {
            base_fraction: T::lit(0.05),
            discretionary_tasks: tasks,
        }
    }

    /// `y` when every discretionary task is performed.
    pub fn max_discretionary(&self) -> T {
        self.discretionary_tasks
            .iter()
            .fold(T::zero(), |acc, t| acc + t.cost_per_project)
    }

    /// `y` for a selection of task names. Unknown names are an error.
    pub fn discretionary_cost<S: AsRef<str>>(&self, selected: &[S]) -> Result<T> {
        selected.iter().try_fold(T::zero(), |acc, name| {
            let name = name.as_ref();
            self.discretionary_tasks
                .iter()
                .find(|t| t.name == name)
                .map(|t| acc + t.cost_per_project)
                .ok_or_else(|| Error::Series(format!("unknown administration task `{name}`")))
        })
    }

    /// Scales every per-project cost, e.g. by [`ZAR_TO_USD`].
    pub fn convert_money(&self, rate: T) -> Self {
        Self {
            base_fraction: self.base_fraction,
            discretionary_tasks: self
                .discretionary_tasks
                .iter()
                .map(|t| DiscretionaryTask {
                    name: t.name.clone(),
                    cost_per_project: t.cost_per_project * rate,
                })
                .collect(),
        }
    }
}

/// One evaluated operating point of the fund.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortfolioPoint<T> {
    /// Discretionary administration spend per project.
    pub y: T,
    /// Administration ratio.
    pub ar: T,
    /// Number of funded projects.
    pub np: T,
    /// Project success rate, clamped to 1.
    pub psr: T,
    /// Expected number of successful projects.
    pub nsp: T,
    /// Portfolio success rate, `nsp` over `V_p / V_i`.
    pub port_sr: T,
}

/// How the project count is treated when evaluating a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectCountMode {
    #[default]
    Continuous,
    /// Whole projects only; unspent remainder is counted as administration.
    Integer,
}

/// Administration ratio reached when spending `y` per project.
pub fn ar_from_y<T: Scalar>(spec: &FundSpec<T>, y: T) -> Result<T> {
    spec.validate()?;
    ensure_nonnegative("y", y)?;
    Ok(ar_unchecked(spec, y))
}

pub(crate) fn ar_unchecked<T: Scalar>(spec: &FundSpec<T>, y: T) -> T {
    // same as (B·V_i + y)/(V_i + y), but exact at y = 0
    let b = spec.base_cost_fraction;
    b + y * (T::one() - b) / (spec.project_value + y)
}

/// Per-project spend that produces administration ratio `ar`.
pub fn y_from_ar<T: Scalar>(spec: &FundSpec<T>, ar: T) -> Result<T> {
    spec.validate()?;
    ensure(ar.is_finite() && ar < T::one(), "ar", ar, "must be below 1")?;
    let b = spec.base_cost_fraction;
    if ar < b {
        return Err(Error::Infeasible {
            name: "ar",
            value: ar.as_f64(),
            reason: "below the base cost fraction; would need negative per-project spend",
        });
    }
    Ok(spec.project_value * (ar - b) / (T::one() - ar))
}

/// Number of projects the fund can pay for at administration ratio `ar`.
pub fn project_count<T: Scalar>(spec: &FundSpec<T>, ar: T) -> Result<T> {
    spec.validate()?;
    ensure(
        ar.is_finite() && ar <= T::one(),
        "ar",
        ar,
        "must not exceed 1",
    )?;
    if ar < spec.base_cost_fraction {
        return Err(Error::Infeasible {
            name: "ar",
            value: ar.as_f64(),
            reason: "below the base cost fraction",
        });
    }
    Ok(np_unchecked(spec, ar))
}

fn np_unchecked<T: Scalar>(spec: &FundSpec<T>, ar: T) -> T {
    spec.total_fund_value * (T::one() - ar) / spec.project_value
}

/// Evaluates the fund at per-project spend `y` with a continuous project count.
pub fn evaluate_point<T: Scalar>(
    spec: &FundSpec<T>,
    response: &ResponseModel<T>,
    y: T,
) -> Result<PortfolioPoint<T>> {
    evaluate_point_with(spec, response, y, ProjectCountMode::Continuous)
}

pub fn evaluate_point_with<T: Scalar>(
    spec: &FundSpec<T>,
    response: &ResponseModel<T>,
    y: T,
    mode: ProjectCountMode,
) -> Result<PortfolioPoint<T>> {
    spec.validate()?;
    response.validate()?;
    ensure_nonnegative("y", y)?;
    Ok(point_unchecked(spec, response, y, mode))
}

pub(crate) fn point_unchecked<T: Scalar>(
    spec: &FundSpec<T>,
    response: &ResponseModel<T>,
    y: T,
    mode: ProjectCountMode,
) -> PortfolioPoint<T> {
    let mut ar = ar_unchecked(spec, y);
    let mut np = np_unchecked(spec, ar);
    if mode == ProjectCountMode::Integer {
        // absorb rounding noise such as 18.999999999999996
        let slack = T::epsilon() * T::lit(64.0) * np.max(T::one());
        np = (np + slack).floor();
        ar = T::one() - np * spec.project_value / spec.total_fund_value;
    }
    let psr = (spec.intrinsic_success_rate + response.delta_unchecked(y)).min(T::one());
    let nsp = np * psr;
    PortfolioPoint {
        y,
        ar,
        np,
        psr,
        nsp,
        port_sr: nsp / spec.max_projects(),
    }
}

/// Intrinsic success rates keyed by technology domain and RDI focus.
///
/// Keys are matched case-insensitively after trimming.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMatrix<T> {
    entries: BTreeMap<(String, String), T>,
}

impl<T: Scalar> Default for DomainMatrix<T> {
    /// Holds the single published entry: biotechnology at the
    /// experimental development stage, 54%.
    fn default() -> Self {
        let mut m = Self::empty();
        m.entries.insert(
            key("biotechnology", "experimental development"),
            T::lit(0.54),
        );
        m
    }
}

fn key(domain: &str, rdi: &str) -> (String, String) {
    (domain.trim().to_lowercase(), rdi.trim().to_lowercase())
}

impl<T: Scalar> DomainMatrix<T> {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, domain: &str, rdi: &str, psr_in: T) -> Result<Option<T>> {
        ensure(
            psr_in >= T::zero() && psr_in <= T::one(),
            "psr_in",
            psr_in,
            "must lie in [0, 1]",
        )?;
        Ok(self.entries.insert(key(domain, rdi), psr_in))
    }

    pub fn lookup(&self, domain: &str, rdi: &str) -> Result<T> {
        self.entries
            .get(&key(domain, rdi))
            .copied()
            .ok_or_else(|| Error::MissingDomainEntry {
                domain: domain.to_string(),
                rdi: rdi.to_string(),
            })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, T)> {
        self.entries
            .iter()
            .map(|((d, r), v)| (d.as_str(), r.as_str(), *v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(vp: f64, vi: f64, b: f64, psr: f64) -> FundSpec<f64> {
        FundSpec::new(vp, vi, b, psr).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn ar_examples() {
        let s = spec(50_000.0, 5_000.0, 0.05, 0.54);
        assert_eq!(ar_from_y(&s, 0.0).unwrap(), 0.05);
        let s0 = spec(50_000.0, 5_000.0, 0.0, 0.54);
        assert_eq!(ar_from_y(&s0, 5_000.0).unwrap(), 0.5);
        assert!(rel(ar_from_y(&s, 1_700.0).unwrap(), 1950.0 / 6700.0) < 1e-15);
        assert!(matches!(
            ar_from_y(&s, -1.0),
            Err(Error::Invalid { name: "y", .. })
        ));
    }

    #[test]
    fn ar_matches_fixed_point_iteration() {
        // iterate AdminCost = B·V_p + NP·y with NP = (V_p − AdminCost)/V_i
        let s = spec(50_000.0, 5_000.0, 0.05, 0.54);
        let y = 1_700.0;
        let mut cost = 0.0;
        for _ in 0..500 {
            let np = (s.total_fund_value - cost) / s.project_value;
            cost = s.base_cost_fraction * s.total_fund_value + np * y;
        }
        let ar = ar_from_y(&s, y).unwrap();
        assert!(rel(ar, cost / s.total_fund_value) < 1e-12);
        assert!(rel(ar, 0.291_045) < 1e-6);
    }

    #[test]
    fn y_from_ar_examples() {
        let s = spec(50_000.0, 5_000.0, 0.05, 0.54);
        assert_eq!(y_from_ar(&s, 0.05).unwrap(), 0.0);
        let y = y_from_ar(&s, 1950.0 / 6700.0).unwrap();
        assert!(rel(y, 1_700.0) < 1e-12);
        assert!((y_from_ar(&s, 0.291_045).unwrap() - 1_700.0).abs() < 0.01);
        assert!(matches!(y_from_ar(&s, 0.04), Err(Error::Infeasible { .. })));
        assert!(matches!(y_from_ar(&s, 1.0), Err(Error::Invalid { .. })));
    }

    #[test]
    fn project_count_examples() {
        let s = spec(15_000.0, 1_500.0, 0.05, 0.54);
        assert!(rel(project_count(&s, 0.1).unwrap(), 9.0) < 1e-14);
        assert_eq!(project_count(&s, 1.0).unwrap(), 0.0);
        let s = spec(10_000.0, 500.0, 0.05, 0.54);
        assert!(rel(project_count(&s, 0.05).unwrap(), 19.0) < 1e-14);
        assert!(project_count(&s, 0.01).is_err());
    }

    #[test]
    fn evaluate_reference_point() {
        let s = spec(50_000.0, 5_000.0, 0.05, 0.54);
        let r = ResponseModel::saturating(0.3, 0.002).unwrap();
        let p = evaluate_point(&s, &r, 500.0).unwrap();
        assert!(rel(p.ar, 0.136_364) < 1e-5);
        assert!(rel(p.psr, 0.729_636) < 1e-6);
        assert!(rel(p.nsp, 6.301_403) < 1e-6);
        assert!(rel(p.port_sr, 0.630_140) < 1e-6);

        let base = evaluate_point(&s, &r, 0.0).unwrap();
        assert!(rel(base.port_sr, 0.513) < 1e-14);
        let lin = ResponseModel::linear(2e-4, 0.3).unwrap();
        assert!(rel(evaluate_point(&s, &lin, 0.0).unwrap().port_sr, 0.513) < 1e-14);

        let far = evaluate_point(&s, &r, 1e12).unwrap();
        assert!(far.port_sr < 1e-8);
    }

    #[test]
    fn psr_is_clamped() {
        let s = spec(50_000.0, 5_000.0, 0.05, 0.9);
        let r = ResponseModel::saturating(0.3, 0.002).unwrap();
        let p = evaluate_point(&s, &r, 5_000.0).unwrap();
        assert_eq!(p.psr, 1.0);
        assert!(p.port_sr <= p.psr);
    }

    #[test]
    fn integer_mode_floors_projects() {
        let s = spec(10_000.0, 500.0, 0.05, 0.54);
        let r = ResponseModel::linear(0.0, 0.0).unwrap();
        let p = evaluate_point_with(&s, &r, 0.0, ProjectCountMode::Integer).unwrap();
        assert_eq!(p.np, 19.0);
        let p = evaluate_point_with(&s, &r, 10.0, ProjectCountMode::Integer).unwrap();
        assert_eq!(p.np, 18.0);
        assert!(rel(p.np * 500.0 + p.ar * 10_000.0, 10_000.0) < 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(FundSpec::new(0.0, 1.0, 0.0, 0.5).is_err());
        assert!(FundSpec::new(10.0, 1.0, 1.0, 0.5).is_err());
        assert!(FundSpec::new(10.0, 1.0, 0.1, 1.5).is_err());
        assert!(FundSpec::new(10.0, 9.5, 0.1, 0.5).is_err());
        assert!(FundSpec::new(10.0, 9.0, 0.1, 0.5).is_ok());
    }

    #[test]
    fn reference_schedule() {
        let s = CostSchedule::<f64>::reference();
        assert_eq!(s.max_discretionary(), 1_700.0);
        assert_eq!(s.base_fraction, 0.05);
        let y = s
            .discretionary_cost(&[
                "external ex-ante evaluation",
                "life cycle project monitoring",
            ])
            .unwrap();
        assert_eq!(y, 700.0);
        assert!(s.discretionary_cost(&["site visits"]).is_err());
        let usd = s.convert_money(ZAR_TO_USD);
        assert!(rel(usd.max_discretionary(), 119.0) < 1e-12);
        let bad = vec![DiscretionaryTask {
            name: "x".into(),
            cost_per_project: -1.0,
        }];
        assert!(CostSchedule::new(0.05, bad).is_err());
    }

    #[test]
    fn domain_matrix_lookup() {
        let m = DomainMatrix::<f64>::default();
        assert_eq!(
            m.lookup("biotechnology", "experimental development")
                .unwrap(),
            0.54
        );
        assert_eq!(
            m.lookup(" Biotechnology", "Experimental Development")
                .unwrap(),
            0.54
        );
        let err = m.lookup("software", "unknown-stage").unwrap_err();
        assert!(err.to_string().contains("software"));
        assert!(err.to_string().contains("unknown-stage"));

        let mut m = DomainMatrix::empty();
        m.insert("x", "y", 0.0).unwrap();
        assert_eq!(m.lookup("x", "y").unwrap(), 0.0);
        assert!(m.insert("x", "z", 1.2).is_err());
    }

    #[test]
    fn works_in_f32() {
        let s = FundSpec::<f32>::new(50_000.0, 5_000.0, 0.05, 0.54).unwrap();
        let r = ResponseModel::saturating(0.3f32, 0.002).unwrap();
        let p = evaluate_point(&s, &r, 500.0).unwrap();
        assert!((p.port_sr - 0.630_14).abs() < 1e-5);
    }
}
