//! Case-study analytics over an agency's annual records.

use crate::model::{ensure, ensure_nonnegative};
use crate::{Error, Result, Scalar};

/// One year of programme history.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualRecord<T> {
    pub year: i32,
    /// Funds transferred to projects.
    pub disbursed: T,
    pub admin_cost: T,
    pub projects: u64,
    pub publications: u64,
    pub masters: u64,
    pub doctorates: u64,
    pub patents: u64,
    /// Price index relative to some base year.
    pub deflator: Option<T>,
}

impl<T: Scalar> AnnualRecord<T> {
    pub fn validate(&self) -> Result<()> {
        ensure_nonnegative("disbursed", self.disbursed)?;
        ensure_nonnegative("admin_cost", self.admin_cost)?;
        if let Some(d) = self.deflator {
            ensure(
                d.is_finite() && d > T::zero(),
                "deflator",
                d,
                "must be positive",
            )?;
        }
        Ok(())
    }

    pub fn total_expenditure(&self) -> T {
        self.disbursed + self.admin_cost
    }
}

/// Relative value of each output type, in publication equivalents, and the
/// money value of one publication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputWeights<T> {
    pub publication: T,
    pub masters: T,
    pub doctorate: T,
    pub patent: T,
    pub base_publication_value: T,
}

impl<T: Scalar> Default for OutputWeights<T> {
    fn default() -> Self {
        Self {
            publication: T::one(),
            masters: T::lit(2.0),
            doctorate: T::lit(5.0),
            patent: T::lit(30.0),
            base_publication_value: T::lit(12_000.0),
        }
    }
}

impl<T: Scalar> OutputWeights<T> {
    pub fn validate(&self) -> Result<()> {
        ensure_nonnegative("publication weight", self.publication)?;
        ensure_nonnegative("masters weight", self.masters)?;
        ensure_nonnegative("doctorate weight", self.doctorate)?;
        ensure_nonnegative("patent weight", self.patent)?;
        ensure_nonnegative("base_publication_value", self.base_publication_value)
    }
}

fn count<T: Scalar>(n: u64) -> T {
    T::from_u64(n).expect("count representable")
}

/// Weighted output in publication equivalents.
pub fn composite_output<T: Scalar>(record: &AnnualRecord<T>, weights: &OutputWeights<T>) -> T {
    count::<T>(record.publications) * weights.publication
        + count::<T>(record.masters) * weights.masters
        + count::<T>(record.doctorates) * weights.doctorate
        + count::<T>(record.patents) * weights.patent
}

/// Money value of the year's outputs over total programme expenditure.
pub fn roi<T: Scalar>(record: &AnnualRecord<T>, weights: &OutputWeights<T>) -> Result<T> {
    record.validate()?;
    weights.validate()?;
    let spend = record.total_expenditure();
    if spend == T::zero() {
        return Err(Error::DivisionByZero("total expenditure is zero"));
    }
    Ok(composite_output(record, weights) * weights.base_publication_value / spend)
}

/// Ordinary least-squares slope of administration cost against project
/// count, with a fitted intercept.
pub fn incremental_admin_cost<T: Scalar>(series: &[AnnualRecord<T>]) -> Result<T> {
    if series.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: series.len(),
        });
    }
    for r in series {
        r.validate()?;
    }
    let n = T::from_usize(series.len()).expect("series length");
    let mean_x = series
        .iter()
        .fold(T::zero(), |a, r| a + count::<T>(r.projects))
        / n;
    let mean_y = series.iter().fold(T::zero(), |a, r| a + r.admin_cost) / n;
    let (sxy, sxx) = series.iter().fold((T::zero(), T::zero()), |(sxy, sxx), r| {
        let dx = count::<T>(r.projects) - mean_x;
        (sxy + dx * (r.admin_cost - mean_y), sxx + dx * dx)
    });
    if sxx == T::zero() {
        return Err(Error::DegenerateData(
            "every record has the same project count; slope is undetermined",
        ));
    }
    Ok(sxy / sxx)
}

fn check_years<T>(series: &[AnnualRecord<T>]) -> Result<()> {
    match series.windows(2).find(|w| w[1].year <= w[0].year) {
        Some(w) => Err(Error::Series(format!(
            "years must be strictly increasing, found {} after {}",
            w[1].year, w[0].year
        ))),
        None => Ok(()),
    }
}

fn base_index<T>(series: &[AnnualRecord<T>], base_year: i32) -> Result<usize> {
    series
        .iter()
        .position(|r| r.year == base_year)
        .ok_or_else(|| Error::Series(format!("base year {base_year} is not in the series")))
}

/// Expresses every money field in base-year terms.
///
/// Each record's money is divided by `deflator / deflator_base`; the returned
/// records carry the base deflator, so deflating again is a no-op.
pub fn deflate_series<T: Scalar>(
    series: &[AnnualRecord<T>],
    base_year: i32,
) -> Result<Vec<AnnualRecord<T>>> {
    check_years(series)?;
    for r in series {
        r.validate()?;
        if r.deflator.is_none() {
            return Err(Error::Series(format!("year {} has no deflator", r.year)));
        }
    }
    let base = series[base_index(series, base_year)?]
        .deflator
        .expect("checked above");
    Ok(series
        .iter()
        .map(|r| {
            let ratio = r.deflator.expect("checked above") / base;
            AnnualRecord {
                disbursed: r.disbursed / ratio,
                admin_cost: r.admin_cost / ratio,
                deflator: Some(base),
                ..r.clone()
            }
        })
        .collect())
}

/// One year of the case-study report; `*_index` fields are normalised to 1
/// at the base year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow<T> {
    pub year: i32,
    pub funding_per_project: T,
    /// Administration cost over total programme revenue.
    pub admin_ratio: T,
    pub composite: T,
    pub roi: T,
    pub funding_per_project_index: T,
    pub admin_ratio_index: T,
    pub composite_index: T,
    pub roi_index: T,
}

pub fn case_study_report<T: Scalar>(
    series: &[AnnualRecord<T>],
    weights: &OutputWeights<T>,
    base_year: i32,
) -> Result<Vec<ReportRow<T>>> {
    check_years(series)?;
    weights.validate()?;
    let base_i = base_index(series, base_year)?;

    let raw = series
        .iter()
        .map(|r| {
            r.validate()?;
            if r.projects == 0 {
                return Err(Error::Series(format!("year {} has zero projects", r.year)));
            }
            let revenue = r.total_expenditure();
            if revenue == T::zero() {
                return Err(Error::Series(format!(
                    "year {} has zero expenditure",
                    r.year
                )));
            }
            Ok((
                r.year,
                r.disbursed / count::<T>(r.projects),
                r.admin_cost / revenue,
                composite_output(r, weights),
                roi(r, weights)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let (_, base_fpp, base_ar, base_comp, base_roi) = raw[base_i];
    let index = |v: T, base: T, what: &'static str| -> Result<T> {
        if base == T::zero() {
            Err(Error::DivisionByZero(what))
        } else {
            Ok(v / base)
        }
    };
    raw.into_iter()
        .map(|(year, fpp, ar, comp, roi)| {
            Ok(ReportRow {
                year,
                funding_per_project: fpp,
                admin_ratio: ar,
                composite: comp,
                roi,
                funding_per_project_index: index(
                    fpp,
                    base_fpp,
                    "base-year funding per project is zero",
                )?,
                admin_ratio_index: index(ar, base_ar, "base-year administration ratio is zero")?,
                composite_index: index(comp, base_comp, "base-year composite output is zero")?,
                roi_index: index(roi, base_roi, "base-year return on investment is zero")?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(year: i32, projects: u64, admin: f64) -> AnnualRecord<f64> {
        AnnualRecord {
            year,
            disbursed: 1_000_000.0,
            admin_cost: admin,
            projects,
            publications: 10,
            masters: 5,
            doctorates: 2,
            patents: 1,
            deflator: None,
        }
    }

    #[test]
    fn composite_examples() {
        let w = OutputWeights::default();
        let mut r = record(2010, 10, 0.0);
        assert_eq!(composite_output(&r, &w), 60.0);
        r.publications = 0;
        r.masters = 0;
        r.doctorates = 0;
        r.patents = 0;
        assert_eq!(composite_output(&r, &w), 0.0);
        r.publications = 1;
        assert_eq!(composite_output(&r, &w), 1.0);
    }

    #[test]
    fn roi_examples() {
        let w = OutputWeights::default();
        let mut r = record(2010, 10, 440_000.0);
        assert_eq!(roi(&r, &w).unwrap(), 0.5);
        r.publications = 0;
        r.masters = 0;
        r.doctorates = 0;
        r.patents = 0;
        assert_eq!(roi(&r, &w).unwrap(), 0.0);
        r.disbursed = 0.0;
        r.admin_cost = 0.0;
        assert!(matches!(roi(&r, &w), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn incremental_cost_examples() {
        let s = [record(2010, 10, 100_000.0), record(2011, 20, 132_400.0)];
        assert!((incremental_admin_cost(&s).unwrap() - 3_240.0).abs() < 1e-9);
        let flat = [
            record(2010, 10, 5.0),
            record(2011, 20, 5.0),
            record(2012, 25, 5.0),
        ];
        assert_eq!(incremental_admin_cost(&flat).unwrap(), 0.0);
        assert!(matches!(
            incremental_admin_cost(&s[..1]),
            Err(Error::InsufficientData { .. })
        ));
        let same = [record(2010, 10, 1.0), record(2011, 10, 2.0)];
        assert!(matches!(
            incremental_admin_cost(&same),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn deflation_examples() {
        let mut a = record(2010, 10, 100.0);
        a.deflator = Some(1.0);
        let mut b = record(2011, 10, 110.0);
        b.disbursed = 110.0;
        b.deflator = Some(1.1);
        let out = deflate_series(&[a.clone(), b.clone()], 2010).unwrap();
        assert_eq!(out[0], a);
        assert!((out[1].admin_cost - 100.0).abs() < 1e-12);
        assert!((out[1].disbursed - 100.0).abs() < 1e-12);
        // idempotent
        assert_eq!(deflate_series(&out, 2010).unwrap(), out);

        let mut c = b.clone();
        c.deflator = None;
        assert!(deflate_series(&[a.clone(), c], 2010).is_err());
        assert!(deflate_series(&[a, b], 2009).is_err());
    }

    #[test]
    fn report_examples() {
        let w = OutputWeights::default();
        let one = case_study_report(&[record(2010, 10, 50_000.0)], &w, 2010).unwrap();
        let r = one[0];
        assert_eq!(
            (
                r.funding_per_project_index,
                r.admin_ratio_index,
                r.composite_index,
                r.roi_index
            ),
            (1.0, 1.0, 1.0, 1.0)
        );

        let two = case_study_report(
            &[record(2010, 100, 50_000.0), record(2011, 130, 50_000.0)],
            &w,
            2010,
        )
        .unwrap();
        assert!((two[1].funding_per_project_index - 1.0 / 1.3).abs() < 1e-12);
        assert!((two[1].funding_per_project_index - 0.769).abs() < 1e-3);
        assert!((two[0].admin_ratio - 50_000.0 / 1_050_000.0).abs() < 1e-15);

        let err = case_study_report(&[record(2010, 10, 1.0), record(2011, 0, 1.0)], &w, 2010)
            .unwrap_err();
        assert!(err.to_string().contains("2011"));

        assert!(
            case_study_report(&[record(2011, 1, 1.0), record(2010, 1, 1.0)], &w, 2010).is_err()
        );
    }
}
