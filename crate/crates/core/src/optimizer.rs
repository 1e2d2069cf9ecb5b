//! Optimum administration ratio and related operating-point searches.

use crate::model::{
    ar_unchecked, ensure, point_unchecked, FundSpec, PortfolioPoint, ProjectCountMode,
};
use crate::response::ResponseModel;
use crate::search::{bisect_increasing, scan_then_refine_max, SearchOutcome};
use crate::{y_from_ar, Error, Result, Scalar};

/// Administration ratios above this are flagged as atypically high.
pub const TYPICAL_AR_CEILING: f64 = 0.2;

const SCAN_POINTS: usize = 1000;
const SEARCH_REL_TOL: f64 = 1e-9;
const SEARCH_MAX_ITER: usize = 200;

/// What the funder asks the agency to deliver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiskPreference<T> {
    /// Pick the administration ratio with the highest portfolio success rate.
    MaximizePortSr,
    /// Spend just enough to guarantee this project success rate.
    MinPsr(T),
}

impl<T: Scalar> RiskPreference<T> {
    pub fn min_psr(psr_min: T) -> Result<Self> {
        ensure(
            psr_min >= T::zero() && psr_min <= T::one(),
            "psr_min",
            psr_min,
            "must lie in [0, 1]",
        )?;
        Ok(Self::MinPsr(psr_min))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryFlag {
    Interior,
    /// No discretionary spend; AR equals the base fraction.
    AtBase,
    /// Linear cap reached, or the upper end of the search interval.
    AtCap,
}

impl BoundaryFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Interior => "interior",
            Self::AtBase => "at_base",
            Self::AtCap => "at_cap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumResult<T> {
    pub point: PortfolioPoint<T>,
    pub boundary: BoundaryFlag,
    /// Objective evaluations spent; zero for closed-form answers.
    pub evaluations: usize,
    /// Set when the optimum AR exceeds [`TYPICAL_AR_CEILING`].
    pub exceeds_typical_ar: bool,
}

/// Maximizes the portfolio success rate over the per-project spend.
///
/// The linear response has a constant slope `C·V_i − PSR_in` with respect to
/// AR, so its optimum sits either at the base fraction or at the point where
/// the uplift stops growing. The saturating response is searched in `y` on
/// `[0, max(10/k, 10·V_i)]` with a coarse scan followed by golden-section
/// refinement.
pub fn optimize_ar<T: Scalar>(
    spec: &FundSpec<T>,
    response: &ResponseModel<T>,
) -> Result<OptimumResult<T>> {
    spec.validate()?;
    response.validate()?;
    let eval = |y: T| point_unchecked(spec, response, y, ProjectCountMode::Continuous);
    let psr_in = spec.intrinsic_success_rate;

    let (point, boundary, evaluations) = match *response {
        ResponseModel::Linear { slope, cap } => {
            let gradient = slope * spec.project_value - psr_in;
            let reachable = cap.min(T::one() - psr_in);
            if gradient > T::zero() && reachable > T::zero() {
                (eval(reachable / slope), BoundaryFlag::AtCap, 0)
            } else {
                (eval(T::zero()), BoundaryFlag::AtBase, 0)
            }
        }
        ResponseModel::Saturating { rate, .. } => {
            let y_max = (T::lit(10.0) / rate).max(T::lit(10.0) * spec.project_value);
            let found = scan_then_refine_max(
                |y| eval(y).port_sr,
                T::zero(),
                y_max,
                SCAN_POINTS,
                T::lit(SEARCH_REL_TOL),
                SEARCH_MAX_ITER,
            );
            // ties within rounding go to the cheaper base point
            let base_value = eval(T::zero()).port_sr;
            let tie = T::epsilon() * T::lit(8.0) * found.value.abs();
            let found = if base_value >= found.value - tie {
                SearchOutcome {
                    x: T::zero(),
                    value: base_value,
                    evaluations: found.evaluations + 1,
                }
            } else {
                SearchOutcome {
                    evaluations: found.evaluations + 1,
                    ..found
                }
            };
            let boundary = if found.x == T::zero() {
                BoundaryFlag::AtBase
            } else if found.x >= y_max {
                BoundaryFlag::AtCap
            } else {
                BoundaryFlag::Interior
            };
            (eval(found.x), boundary, found.evaluations)
        }
    };

    Ok(OptimumResult {
        point,
        boundary,
        evaluations,
        exceeds_typical_ar: point.ar > T::lit(TYPICAL_AR_CEILING),
    })
}

/// Cheapest operating point whose project success rate reaches `psr_min`.
pub fn required_ar_for_min_psr<T: Scalar>(
    spec: &FundSpec<T>,
    response: &ResponseModel<T>,
    psr_min: T,
) -> Result<PortfolioPoint<T>> {
    spec.validate()?;
    response.validate()?;
    RiskPreference::min_psr(psr_min)?;
    let eval = |y: T| point_unchecked(spec, response, y, ProjectCountMode::Continuous);
    let psr_in = spec.intrinsic_success_rate;
    if psr_min <= psr_in {
        return Ok(eval(T::zero()));
    }
    let mut y = response.invert_delta(psr_min - psr_in)?;
    let mut point = eval(y);
    // the closed-form inverse can land an ulp short of the target
    for _ in 0..64 {
        if point.psr >= psr_min {
            break;
        }
        y = y + (y * T::epsilon()).max(T::min_positive_value());
        point = eval(y);
    }
    Ok(point)
}

/// Evaluates the fund at each administration ratio of `ar_grid`, in order.
pub fn sweep<T: Scalar>(
    spec: &FundSpec<T>,
    response: &ResponseModel<T>,
    ar_grid: &[T],
) -> Result<Vec<PortfolioPoint<T>>> {
    spec.validate()?;
    response.validate()?;
    ar_grid
        .iter()
        .map(|&ar| {
            let y = y_from_ar(spec, ar)?;
            Ok(point_unchecked(
                spec,
                response,
                y,
                ProjectCountMode::Continuous,
            ))
        })
        .collect()
}

/// Benchmark of an agency against the administration frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyEstimate<T> {
    /// Frontier administration cost over observed administration cost, in (0, 1].
    pub efficiency: T,
    /// Cheapest operating point achieving the observed portfolio success rate.
    pub frontier: PortfolioPoint<T>,
    pub frontier_admin_cost: T,
}

/// Organisational efficiency: the administration cost an efficient agency
/// would need for the observed portfolio success rate, divided by what was
/// actually spent.
pub fn efficiency_estimate<T: Scalar>(
    spec: &FundSpec<T>,
    response: &ResponseModel<T>,
    observed_admin_cost: T,
    observed_port_sr: T,
) -> Result<EfficiencyEstimate<T>> {
    ensure(
        observed_admin_cost.is_finite() && observed_admin_cost > T::zero(),
        "observed_admin_cost",
        observed_admin_cost,
        "must be positive",
    )?;
    ensure(
        observed_port_sr > T::zero() && observed_port_sr <= T::one(),
        "observed_port_sr",
        observed_port_sr,
        "must lie in (0, 1]",
    )?;
    let best = optimize_ar(spec, response)?;
    let peak = best.point.port_sr;
    let slack = T::epsilon() * T::lit(16.0) * peak;
    if observed_port_sr > peak + slack {
        return Err(Error::Unreachable {
            name: "observed_port_sr",
            target: observed_port_sr.as_f64(),
            limit: peak.as_f64(),
        });
    }

    let port_sr = |y: T| point_unchecked(spec, response, y, ProjectCountMode::Continuous).port_sr;
    let frontier_y = if observed_port_sr <= port_sr(T::zero()) {
        T::zero()
    } else if observed_port_sr >= peak {
        best.point.y
    } else {
        // PortSR rises monotonically from y = 0 up to the optimum
        bisect_increasing(port_sr, T::zero(), best.point.y, observed_port_sr, 200)
    };
    let frontier = point_unchecked(spec, response, frontier_y, ProjectCountMode::Continuous);
    let frontier_admin_cost = ar_unchecked(spec, frontier_y) * spec.total_fund_value;
    if frontier_admin_cost == T::zero() {
        return Err(Error::DegenerateData(
            "frontier administration cost is zero; efficiency is undefined",
        ));
    }
    Ok(EfficiencyEstimate {
        efficiency: (frontier_admin_cost / observed_admin_cost).min(T::one()),
        frontier,
        frontier_admin_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_spec() -> FundSpec<f64> {
        FundSpec::new(50_000.0, 5_000.0, 0.05, 0.54).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn linear_optimum_at_cap() {
        let r = ResponseModel::linear(2e-4, 0.3).unwrap();
        let opt = optimize_ar(&reference_spec(), &r).unwrap();
        assert_eq!(opt.boundary, BoundaryFlag::AtCap);
        assert!(rel(opt.point.y, 1500.0) < 1e-12);
        assert!(rel(opt.point.ar, 1750.0 / 6500.0) < 1e-12);
        assert!(rel(opt.point.port_sr, 0.613_846_153_846) < 1e-9);
        assert!(opt.exceeds_typical_ar);
    }

    #[test]
    fn linear_optimum_at_base() {
        let r = ResponseModel::linear(5e-5, 0.3).unwrap();
        let opt = optimize_ar(&reference_spec(), &r).unwrap();
        assert_eq!(opt.boundary, BoundaryFlag::AtBase);
        assert_eq!(opt.point.ar, 0.05);
        assert!(rel(opt.point.port_sr, 0.513) < 1e-14);
        assert!(!opt.exceeds_typical_ar);
    }

    #[test]
    fn linear_cap_limited_by_psr_clamp() {
        let spec = FundSpec::new(50_000.0, 5_000.0, 0.05, 0.9).unwrap();
        let r = ResponseModel::linear(2e-4, 0.3).unwrap();
        let opt = optimize_ar(&spec, &r).unwrap();
        assert!(rel(opt.point.y, 500.0) < 1e-12);
        assert!((opt.point.psr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn saturating_reference_optimum() {
        let r = ResponseModel::saturating(0.3, 0.002).unwrap();
        let opt = optimize_ar(&reference_spec(), &r).unwrap();
        assert_eq!(opt.boundary, BoundaryFlag::Interior);
        assert!((opt.point.ar - 0.173).abs() < 0.005);
        assert!((opt.point.port_sr - 0.639).abs() < 0.002);
        assert!(!opt.exceeds_typical_ar);
        assert!(opt.evaluations > 0);
    }

    #[test]
    fn saturating_optimum_at_base_when_uplift_too_dear() {
        // C·k·V_i = 0.3·1e-5·5000 = 0.015 < PSR_in
        let r = ResponseModel::saturating(0.3, 1e-5).unwrap();
        let opt = optimize_ar(&reference_spec(), &r).unwrap();
        assert_eq!(opt.boundary, BoundaryFlag::AtBase);
        assert_eq!(opt.point.y, 0.0);
    }

    #[test]
    fn min_psr_examples() {
        let spec = reference_spec();
        let r = ResponseModel::saturating(0.3, 0.002).unwrap();
        let p = required_ar_for_min_psr(&spec, &r, 0.5).unwrap();
        assert_eq!(p.y, 0.0);
        assert_eq!(p.ar, 0.05);

        let p = required_ar_for_min_psr(&spec, &r, 0.7).unwrap();
        let y = -(1.0f64 - 0.16 / 0.3).ln() / 0.002;
        assert!(rel(p.y, y) < 1e-12);
        assert!(rel(p.y, 381.07) < 1e-4);
        assert!(rel(p.ar, 0.117_276) < 1e-5);
        assert!(p.psr >= 0.7);

        assert!(matches!(
            required_ar_for_min_psr(&spec, &r, 0.9),
            Err(Error::Unreachable { .. })
        ));
        assert!(required_ar_for_min_psr(&spec, &r, 1.1).is_err());
    }

    #[test]
    fn min_psr_linear_exactly_at_cap() {
        let spec = reference_spec();
        let r = ResponseModel::linear(2e-4, 0.3).unwrap();
        let p = required_ar_for_min_psr(&spec, &r, 0.84).unwrap();
        assert!(p.psr >= 0.84);
    }

    #[test]
    fn sweep_examples() {
        let spec = reference_spec();
        let r = ResponseModel::saturating(0.3, 0.002).unwrap();
        let pts = sweep(&spec, &r, &[0.05]).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].y, 0.0);
        assert!(rel(pts[0].port_sr, 0.95 * 0.54) < 1e-14);

        let grid: Vec<f64> = (1..=10).map(|i| 0.05 * i as f64).collect();
        let pts = sweep(&spec, &r, &grid).unwrap();
        let peak = pts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.port_sr.partial_cmp(&b.1.port_sr).unwrap())
            .unwrap()
            .0;
        assert!((grid[peak] - 0.173).abs() < 0.05);
        assert!(pts[..=peak].windows(2).all(|w| w[0].port_sr < w[1].port_sr));
        assert!(pts[peak..].windows(2).all(|w| w[0].port_sr > w[1].port_sr));

        let err = sweep(&spec, &r, &[0.1, 0.04]).unwrap_err();
        assert!(err.to_string().contains("0.04"), "{err}");
    }

    #[test]
    fn efficiency_examples() {
        let spec = reference_spec();
        let r = ResponseModel::saturating(0.3, 0.002).unwrap();
        let e = efficiency_estimate(&spec, &r, 1.0, 0.6).unwrap();
        // frontier point reproduces the observed PortSR on the rising branch
        assert!((e.frontier.port_sr - 0.6).abs() < 1e-12);
        let opt = optimize_ar(&spec, &r).unwrap();
        assert!(e.frontier.y < opt.point.y);

        let on = efficiency_estimate(&spec, &r, e.frontier_admin_cost, 0.6).unwrap();
        assert_eq!(on.efficiency, 1.0);
        let half = efficiency_estimate(&spec, &r, 2.0 * e.frontier_admin_cost, 0.6).unwrap();
        assert!(rel(half.efficiency, 0.5) < 1e-15);

        assert!(matches!(
            efficiency_estimate(&spec, &r, 10_000.0, 0.7),
            Err(Error::Unreachable { .. })
        ));
        assert!(efficiency_estimate(&spec, &r, 0.0, 0.6).is_err());
    }
}
