//! Administration-cost model for research funding agencies.
//!
//! The model relates the discretionary evaluation and monitoring spend per
//! project (`y`) to the administration ratio, the number of funded projects
//! and the expected portfolio success rate. On top of that algebra sit:
//!
//! - [`response`]: the success-rate uplift curves and their calibration,
//! - [`optimizer`]: the optimum administration ratio, the minimum-PSR
//!   inversion, AR sweeps and the organisational efficiency estimate,
//! - [`analytics`]: case-study reporting over annual agency records.
//!
//! Everything is generic over the floating point type through [`Scalar`];
//! the `*F64` aliases below cover the common case.

pub mod analytics;
mod error;
pub mod model;
pub mod optimizer;
pub mod response;
mod scalar;
pub mod search;

pub use analytics::{
    case_study_report, composite_output, deflate_series, incremental_admin_cost, roi, AnnualRecord,
    OutputWeights, ReportRow,
};
pub use error::{Error, Result};
pub use model::{
    ar_from_y, evaluate_point, evaluate_point_with, project_count, y_from_ar, CostSchedule,
    DiscretionaryTask, DomainMatrix, FundSpec, PortfolioPoint, ProjectCountMode, ZAR_TO_USD,
};
pub use optimizer::{
    efficiency_estimate, optimize_ar, required_ar_for_min_psr, sweep, BoundaryFlag,
    EfficiencyEstimate, OptimumResult, RiskPreference, TYPICAL_AR_CEILING,
};
pub use response::{
    fit_response, sum_squared_residuals, CalibrationSample, FitKind, FittedResponse, ResponseModel,
};
pub use scalar::Scalar;

pub type FundSpecF64 = FundSpec<f64>;
pub type FundSpecF32 = FundSpec<f32>;
pub type CostScheduleF64 = CostSchedule<f64>;
pub type DomainMatrixF64 = DomainMatrix<f64>;
pub type PortfolioPointF64 = PortfolioPoint<f64>;
pub type PortfolioPointF32 = PortfolioPoint<f32>;
pub type ResponseModelF64 = ResponseModel<f64>;
pub type ResponseModelF32 = ResponseModel<f32>;
pub type CalibrationSampleF64 = CalibrationSample<f64>;
pub type OptimumResultF64 = OptimumResult<f64>;
pub type RiskPreferenceF64 = RiskPreference<f64>;
pub type AnnualRecordF64 = AnnualRecord<f64>;
pub type OutputWeightsF64 = OutputWeights<f64>;
pub type ReportRowF64 = ReportRow<f64>;
