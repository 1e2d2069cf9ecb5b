//! Success-rate uplift bought by discretionary administration spend.
//!
//! Two curve families are supported: a capped linear ramp
//! `min(slope·y, cap)` and a saturating exponential `C·(1 − exp(−k·y))`
//! that approaches its ceiling `C` asymptotically.

use crate::model::{ensure, ensure_nonnegative, y_from_ar, FundSpec};
use crate::search::golden_section_max;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResponseModel<T> {
    /// `ΔPSR = min(slope·y, cap)`.
    Linear { slope: T, cap: T },
    /// `ΔPSR = ceiling·(1 − exp(−rate·y))`.
    Saturating { ceiling: T, rate: T },
}

impl<T: Scalar> ResponseModel<T> {
    pub fn linear(slope: T, cap: T) -> Result<Self> {
        let m = Self::Linear { slope, cap };
        m.validate()?;
        Ok(m)
    }

    pub fn saturating(ceiling: T, rate: T) -> Result<Self> {
        let m = Self::Saturating { ceiling, rate };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Linear { slope, cap } => {
                ensure_nonnegative("slope", slope)?;
                ensure(
                    cap >= T::zero() && cap <= T::one(),
                    "cap",
                    cap,
                    "must lie in [0, 1]",
                )
            }
            Self::Saturating { ceiling, rate } => {
                ensure(
                    ceiling >= T::zero() && ceiling <= T::one(),
                    "ceiling",
                    ceiling,
                    "must lie in [0, 1]",
                )?;
                ensure(
                    rate.is_finite() && rate > T::zero(),
                    "rate",
                    rate,
                    "must be positive",
                )
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Linear { .. } => "linear",
            Self::Saturating { .. } => "saturating",
        }
    }

    /// Largest uplift the curve can approach: the cap or the ceiling.
    pub fn max_delta(&self) -> T {
        match *self {
            Self::Linear { cap, .. } => cap,
            Self::Saturating { ceiling, .. } => ceiling,
        }
    }

    /// Derivative of the uplift at `y = 0`.
    pub fn initial_slope(&self) -> T {
        match *self {
            Self::Linear { slope, cap } if cap > T::zero() => slope,
            Self::Linear { .. } => T::zero(),
            Self::Saturating { ceiling, rate } => ceiling * rate,
        }
    }

    pub fn delta_psr(&self, y: T) -> Result<T> {
        self.validate()?;
        ensure_nonnegative("y", y)?;
        Ok(self.delta_unchecked(y))
    }

    pub(crate) fn delta_unchecked(&self, y: T) -> T {
        match *self {
            Self::Linear { slope, cap } => (slope * y).min(cap),
            Self::Saturating { ceiling, rate } => -ceiling * (-rate * y).exp_m1(),
        }
    }

    /// Smallest spend per project that buys an uplift of `target`.
    pub fn invert_delta(&self, target: T) -> Result<T> {
        self.validate()?;
        ensure_nonnegative("target delta_psr", target)?;
        if target == T::zero() {
            return Ok(T::zero());
        }
        let unreachable = |limit: T| Error::Unreachable {
            name: "delta_psr",
            target: target.as_f64(),
            limit: limit.as_f64(),
        };
        match *self {
            Self::Linear { slope, cap } => {
                if target > cap {
                    Err(unreachable(cap))
                } else if slope == T::zero() {
                    Err(unreachable(T::zero()))
                } else {
                    Ok(target / slope)
                }
            }
            Self::Saturating { ceiling, rate } => {
                if target >= ceiling {
                    Err(unreachable(ceiling))
                } else {
                    Ok(-(-target / ceiling).ln_1p() / rate)
                }
            }
        }
    }
}

/// One observation of spend per project against the uplift it bought.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSample<T> {
    pub y: T,
    pub delta_psr: T,
}

impl<T: Scalar> CalibrationSample<T> {
    pub fn new(y: T, delta_psr: T) -> Result<Self> {
        ensure_nonnegative("y", y)?;
        ensure(
            delta_psr >= T::zero() && delta_psr <= T::one(),
            "delta_psr",
            delta_psr,
            "must lie in [0, 1]",
        )?;
        Ok(Self { y, delta_psr })
    }

    /// Converts an observed (administration ratio, portfolio success rate)
    /// pair into spend per project and uplift over the intrinsic rate.
    pub fn from_observed(spec: &FundSpec<T>, ar: T, port_sr: T) -> Result<Self> {
        let y = y_from_ar(spec, ar)?;
        let psr = port_sr / (T::one() - ar);
        let mut delta = psr - spec.intrinsic_success_rate;
        if delta < T::zero() && delta > -T::epsilon() * T::lit(64.0) {
            delta = T::zero();
        }
        Self::new(y, delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitKind<T> {
    /// Least squares through the origin; `cap` defaults to 1.
    Linear {
        cap: Option<T>,
    },
    Saturating,
}

/// A calibrated model together with its residual sum of squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedResponse<T> {
    pub model: ResponseModel<T>,
    pub sse: T,
    pub samples: usize,
}

pub fn sum_squared_residuals<T: Scalar>(
    model: &ResponseModel<T>,
    samples: &[CalibrationSample<T>],
) -> T {
    samples.iter().fold(T::zero(), |acc, s| {
        let r = s.delta_psr - model.delta_unchecked(s.y);
        acc + r * r
    })
}

const RATE_GRID_MIN: f64 = 1e-6;
const RATE_GRID_MAX: f64 = 1.0;
const RATE_GRID_POINTS: usize = 200;

/// Least-squares calibration of a response curve.
pub fn fit_response<T: Scalar>(
    samples: &[CalibrationSample<T>],
    kind: FitKind<T>,
) -> Result<FittedResponse<T>> {
    for s in samples {
        CalibrationSample::new(s.y, s.delta_psr)?;
    }
    let model = match kind {
        FitKind::Linear { cap } => fit_linear(samples, cap.unwrap_or_else(T::one))?,
        FitKind::Saturating => fit_saturating(samples)?,
    };
    Ok(FittedResponse {
        model,
        sse: sum_squared_residuals(&model, samples),
        samples: samples.len(),
    })
}

fn fit_linear<T: Scalar>(samples: &[CalibrationSample<T>], cap: T) -> Result<ResponseModel<T>> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let (sxy, sxx) = samples
        .iter()
        .fold((T::zero(), T::zero()), |(sxy, sxx), s| {
            (sxy + s.y * s.delta_psr, sxx + s.y * s.y)
        });
    if sxx == T::zero() {
        return Err(Error::DegenerateData(
            "every sample has zero spend; slope is undetermined",
        ));
    }
    ResponseModel::linear((sxy / sxx).max(T::zero()), cap)
}

/// Optimal ceiling for a fixed rate, and the resulting residual sum of squares.
fn profile<T: Scalar>(samples: &[CalibrationSample<T>], rate: T) -> (T, T) {
    let (sgd, sgg) = samples
        .iter()
        .fold((T::zero(), T::zero()), |(sgd, sgg), s| {
            let g = -(-rate * s.y).exp_m1();
            (sgd + g * s.delta_psr, sgg + g * g)
        });
    let ceiling = if sgg > T::zero() {
        (sgd / sgg).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    let sse = samples.iter().fold(T::zero(), |acc, s| {
        let r = s.delta_psr + ceiling * (-rate * s.y).exp_m1();
        acc + r * r
    });
    (ceiling, sse)
}

fn fit_saturating<T: Scalar>(samples: &[CalibrationSample<T>]) -> Result<ResponseModel<T>> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    let mut positive: Vec<T> = samples
        .iter()
        .map(|s| s.y)
        .filter(|y| *y > T::zero())
        .collect();
    positive.sort_by(|a, b| a.partial_cmp(b).expect("finite spend"));
    positive.dedup();
    if positive.len() < 2 {
        return Err(Error::DegenerateData(
            "saturating fit needs at least two distinct positive spend levels",
        ));
    }

    // coarse log-spaced scan over the rate, then golden-section in log-rate
    let log_lo = T::lit(RATE_GRID_MIN.ln());
    let log_hi = T::lit(RATE_GRID_MAX.ln());
    let step = (log_hi - log_lo) / T::lit((RATE_GRID_POINTS - 1) as f64);
    let log_rate = |i: usize| log_lo + step * T::lit(i as f64);
    let (best_i, _) = (0..RATE_GRID_POINTS)
        .map(|i| (i, profile(samples, log_rate(i).exp()).1))
        .fold((0, T::infinity()), |best, (i, sse)| {
            if sse < best.1 {
                (i, sse)
            } else {
                best
            }
        });
    let lo = log_rate(best_i.saturating_sub(1));
    let hi = log_rate((best_i + 1).min(RATE_GRID_POINTS - 1));
    let refined = golden_section_max(
        |lr: T| -profile(samples, lr.exp()).1,
        lo,
        hi,
        T::epsilon(),
        T::epsilon() * T::lit(4.0),
        400,
    );
    let rate = refined.x.exp();
    let (ceiling, _) = profile(samples, rate);
    ResponseModel::saturating(ceiling, rate)
}
