//! CSV ingestion of annual records and calibration samples, and CSV
//! emission of sweep curves and case-study reports.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use fundadmin::{AnnualRecord, CalibrationSample, FundSpec, PortfolioPoint, ReportRow};
use thiserror::Error;

use crate::format::fixed;

pub const ANNUAL_HEADER: &[&str] = &[
    "year",
    "disbursed",
    "admin_cost",
    "projects",
    "publications",
    "masters",
    "doctorates",
    "patents",
];
pub const SWEEP_HEADER: &str = "ar,y,np,psr,nsp,port_sr";
pub const REPORT_HEADER: &str = "year,funding_per_project,admin_ratio,composite,roi,\
funding_per_project_index,admin_ratio_index,composite_index,roi_index";

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: bad header; expected `{expected}`, found `{found}`", path.display())]
    Format {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{}: row {row}, column `{column}`: cannot parse `{value}`", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{}: malformed CSV: {message}", path.display())]
    Malformed { path: PathBuf, message: String },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
}

impl CsvError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Invalid { .. } => 1,
            _ => 2,
        }
    }
}

struct Table {
    path: PathBuf,
    header: Vec<String>,
    /// (line number, cells)
    rows: Vec<(usize, Vec<String>)>,
}

fn load(path: &Path) -> Result<Table, CsvError> {
    let io_err = |source| CsvError::Io {
        path: path.to_path_buf(),
        source,
    };
    let text = std::fs::read_to_string(path).map_err(io_err)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CsvError::Format {
            path: path.to_path_buf(),
            expected: String::new(),
            found: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CsvError::Malformed {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        rows.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(Table {
        path: path.to_path_buf(),
        header,
        rows,
    })
}

impl Table {
    fn cell<T: std::str::FromStr>(
        &self,
        line: usize,
        cells: &[String],
        col: usize,
    ) -> Result<T, CsvError> {
        let value = cells.get(col).map(String::as_str).unwrap_or("");
        value.parse().map_err(|_| CsvError::Parse {
            path: self.path.clone(),
            row: line,
            column: self.header[col].clone(),
            value: value.to_string(),
        })
    }

    fn money(&self, line: usize, cells: &[String], col: usize) -> Result<f64, CsvError> {
        let v: f64 = self.cell(line, cells, col)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CsvError::Parse {
                path: self.path.clone(),
                row: line,
                column: self.header[col].clone(),
                value: cells[col].clone(),
            })
        }
    }

    fn invalid(&self, message: String) -> CsvError {
        CsvError::Invalid {
            path: self.path.clone(),
            message,
        }
    }
}

/// Reads annual agency records, sorted by year.
///
/// The header must be exactly
/// `year,disbursed,admin_cost,projects,publications,masters,doctorates,patents`
/// with an optional trailing `deflator` column.
pub fn read_annual_csv(path: impl AsRef<Path>) -> Result<Vec<AnnualRecord<f64>>, CsvError> {
    let table = load(path.as_ref())?;
    let with_deflator: Vec<&str> = ANNUAL_HEADER.iter().copied().chain(["deflator"]).collect();
    let has_deflator = if table.header == with_deflator {
        true
    } else if table.header == ANNUAL_HEADER {
        false
    } else {
        return Err(CsvError::Format {
            path: table.path.clone(),
            expected: format!("{}[,deflator]", ANNUAL_HEADER.join(",")),
            found: table.header.join(","),
        });
    };

    let mut records = table
        .rows
        .iter()
        .map(|(line, cells)| {
            let line = *line;
            let deflator = if has_deflator && !cells[8].is_empty() {
                Some(table.money(line, cells, 8)?)
            } else {
                None
            };
            let record = AnnualRecord {
                year: table.cell(line, cells, 0)?,
                disbursed: table.money(line, cells, 1)?,
                admin_cost: table.money(line, cells, 2)?,
                projects: table.cell(line, cells, 3)?,
                publications: table.cell(line, cells, 4)?,
                masters: table.cell(line, cells, 5)?,
                doctorates: table.cell(line, cells, 6)?,
                patents: table.cell(line, cells, 7)?,
                deflator,
            };
            record
                .validate()
                .map_err(|e| table.invalid(format!("row {line}: {e}")))?;
            Ok(record)
        })
        .collect::<Result<Vec<_>, CsvError>>()?;

    records.sort_by_key(|r| r.year);
    if let Some(w) = records.windows(2).find(|w| w[0].year == w[1].year) {
        return Err(table.invalid(format!("duplicate year {}", w[0].year)));
    }
    Ok(records)
}

/// Reads calibration samples from either a `y,delta_psr` table or an
/// `ar,port_sr` table; the latter is converted through `spec`.
///
/// `money_rate` scales the `y` column into the spec's money unit.
pub fn read_calibration_csv(
    path: impl AsRef<Path>,
    spec: &FundSpec<f64>,
    money_rate: f64,
) -> Result<Vec<CalibrationSample<f64>>, CsvError> {
    let table = load(path.as_ref())?;
    let observed = match table.header.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["y", "delta_psr"] => false,
        ["ar", "port_sr"] => true,
        _ => {
            return Err(CsvError::Format {
                path: table.path.clone(),
                expected: "y,delta_psr or ar,port_sr".into(),
                found: table.header.join(","),
            })
        }
    };
    table
        .rows
        .iter()
        .map(|(line, cells)| {
            let a = table.money(*line, cells, 0)?;
            let b = table.money(*line, cells, 1)?;
            let sample = if observed {
                CalibrationSample::from_observed(spec, a, b)
            } else {
                CalibrationSample::new(a * money_rate, b)
            };
            sample.map_err(|e| table.invalid(format!("row {line}: {e}")))
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum WriteError {
    #[error("nothing to write: {0}")]
    Empty(&'static str),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Writes sweep points as CSV with `precision` significant digits.
pub fn write_sweep_csv<W: Write>(
    points: &[PortfolioPoint<f64>],
    sink: &mut W,
    precision: usize,
) -> Result<(), WriteError> {
    if points.is_empty() {
        return Err(WriteError::Empty("sweep produced no points"));
    }
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for p in points {
        let cells = [p.ar, p.y, p.np, p.psr, p.nsp, p.port_sr].map(|v| fixed(v, precision));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    sink.write_all(out.as_bytes())?;
    Ok(())
}

pub fn write_report_csv<W: Write>(
    rows: &[ReportRow<f64>],
    sink: &mut W,
    precision: usize,
) -> Result<(), WriteError> {
    if rows.is_empty() {
        return Err(WriteError::Empty("report has no rows"));
    }
    let mut out = String::new();
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [
            r.funding_per_project,
            r.admin_ratio,
            r.composite,
            r.roi,
            r.funding_per_project_index,
            r.admin_ratio_index,
            r.composite_index,
            r.roi_index,
        ]
        .map(|v| fixed(v, precision));
        out.push_str(&r.year.to_string());
        for c in cells {
            out.push(',');
            out.push_str(&c);
        }
        out.push('\n');
    }
    sink.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_csv(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    const HEADER: &str =
        "year,disbursed,admin_cost,projects,publications,masters,doctorates,patents";

    #[test]
    fn reads_and_sorts_records() {
        let f = temp_csv(&format!(
            "{HEADER}\n2011,100,10,12,5,4,3,1\n2010,90,9,10,4,3,2,0\n"
        ));
        let recs = read_annual_csv(f.path()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].year, 2010);
        assert_eq!(recs[1].projects, 12);
        assert_eq!(recs[1].deflator, None);
    }

    #[test]
    fn optional_deflator_column() {
        let f = temp_csv(&format!(
            "{HEADER},deflator\n2010,90,9,10,4,3,2,0,1.05\n2011,90,9,10,4,3,2,0,\n"
        ));
        let recs = read_annual_csv(f.path()).unwrap();
        assert_eq!(recs[0].deflator, Some(1.05));
        assert_eq!(recs[1].deflator, None);
    }

    #[test]
    fn duplicate_year_is_invalid() {
        let f = temp_csv(&format!(
            "{HEADER}\n2010,1,1,1,1,1,1,1\n2010,2,2,2,2,2,2,2\n"
        ));
        let err = read_annual_csv(f.path()).unwrap_err();
        assert!(matches!(err, CsvError::Invalid { .. }), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn missing_column_lists_expected_header() {
        let f = temp_csv("year,disbursed,admin_cost,projects,publications,doctorates,patents\n");
        let err = read_annual_csv(f.path()).unwrap_err();
        assert!(matches!(err, CsvError::Format { .. }));
        assert!(err.to_string().contains(HEADER), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn parse_error_names_row_and_column() {
        let f = temp_csv(&format!(
            "{HEADER}\n2010,1,1,1,1,1,1,1\n2011,1,x,1,1,1,1,1\n"
        ));
        match read_annual_csv(f.path()).unwrap_err() {
            CsvError::Parse { row, column, .. } => {
                assert_eq!(row, 3);
                assert_eq!(column, "admin_cost");
            }
            other => panic!("{other}"),
        }
        let f = temp_csv(&format!("{HEADER}\n2010,1,1,1.5,1,1,1,1\n"));
        assert!(matches!(
            read_annual_csv(f.path()),
            Err(CsvError::Parse { .. })
        ));
    }

    #[test]
    fn missing_file_is_io() {
        let err = read_annual_csv("/nonexistent/annual.csv").unwrap_err();
        assert!(matches!(err, CsvError::Io { .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn calibration_tables() {
        let spec = FundSpec::new(50_000.0, 5_000.0, 0.05, 0.54).unwrap();
        let f = temp_csv("y,delta_psr\n100,0.05\n200,0.09\n");
        let s = read_calibration_csv(f.path(), &spec, 1.0).unwrap();
        assert_eq!(s[1].y, 200.0);
        let f = temp_csv("ar,port_sr\n0.05,0.513\n");
        let s = read_calibration_csv(f.path(), &spec, 1.0).unwrap();
        assert_eq!(s[0].y, 0.0);
        assert!(s[0].delta_psr.abs() < 1e-12);
        let f = temp_csv("y,psr\n1,1\n");
        assert!(matches!(
            read_calibration_csv(f.path(), &spec, 1.0),
            Err(CsvError::Format { .. })
        ));
    }

    #[test]
    fn sweep_csv_layout() {
        let p = PortfolioPoint {
            y: 0.0,
            ar: 0.05,
            np: 9.5,
            psr: 0.54,
            nsp: 5.13,
            port_sr: 0.513,
        };
        let mut buf = Vec::new();
        write_sweep_csv(&[p], &mut buf, 6).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "ar,y,np,psr,nsp,port_sr\n0.0500000,0.00000,9.50000,0.540000,5.13000,0.513000\n"
        );
        let mut buf = Vec::new();
        assert!(matches!(
            write_sweep_csv(&[], &mut buf, 6),
            Err(WriteError::Empty(_))
        ));
        assert!(buf.is_empty());
    }
}
