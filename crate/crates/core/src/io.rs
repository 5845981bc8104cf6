//! File formats: CSV readers and writers for rate tables, incidence curves,
//! cohort results and trajectories.
//!
//! Dialect: comma separated, `.` decimal point, `\n` line endings, UTF-8,
//! header row required, `#` comment lines skipped.

use std::io::{Read, Write};
use std::path::Path;

use crate::cohort::CohortResult;
use crate::error::{Error, Result};
use crate::incidence::IncidenceCurve;
use crate::process::EventTrajectory;
use crate::rate::RateModel;

/// Stable scientific format used for probabilities and times,
/// e.g. `1.024000000e-2`.
pub fn fmt_sci(x: f64) -> String {
    format!("{x:.9e}")
}

/// Ages: rounded to 6 significant digits, printed in shortest form (`80`, `0.5`).
pub fn fmt_age(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    format!("{rounded}")
}

/// Fixed notation with `digits` significant digits (`0.500488759`).
/// Zero prints with `digits` decimals.
pub fn fmt_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.digits$}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// A data row with its 1-based line number in the source.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub line: u64,
    pub fields: Vec<String>,
}

/// Reads a CSV with exactly the given header. Blank lines and lines starting
/// with `#` are skipped; reported line numbers count them.
pub fn read_rows<R: Read>(mut reader: R, header: &[&str]) -> Result<Vec<Row>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut kept = String::with_capacity(text.len());
    let mut physical = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        kept.push_str(line);
        kept.push('\n');
        physical.push(i as u64 + 1);
    }
    // csv positions are 1-based over the kept lines.
    let source_line = |csv_line: u64| -> u64 {
        physical
            .get(csv_line.saturating_sub(1) as usize)
            .copied()
            .unwrap_or(text.lines().count() as u64 + 1)
    };

    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .has_headers(true)
        .flexible(true)
        .from_reader(kept.as_bytes());
    let record = csv.headers().map_err(|e| csv_error(&e, source_line))?.clone();
    let found: Vec<&str> = record.iter().collect();
    if found != header {
        return Err(Error::Parse {
            line: source_line(1),
            message: format!("expected header `{}`, found `{}`", header.join(","), found.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| csv_error(&e, source_line))?;
        let line = source_line(record.position().map_or(0, |p| p.line()));
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        rows.push(Row {
            line,
            fields: record.iter().map(str::to_owned).collect(),
        });
    }
    Ok(rows)
}

fn csv_error(e: &csv::Error, source_line: impl Fn(u64) -> u64) -> Error {
    let line = source_line(e.position().map_or(1, |p| p.line()));
    match e.kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        _ => Error::Parse {
            line,
            message: e.to_string(),
        },
    }
}

impl Row {
    pub fn number(&self, column: usize) -> Result<f64> {
        let raw = &self.fields[column];
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Parse {
                line: self.line,
                message: format!("`{raw}` is not a finite number"),
            }),
        }
    }

    fn integer(&self, column: usize) -> Result<u64> {
        let raw = &self.fields[column];
        raw.parse::<u64>().map_err(|_| Error::Parse {
            line: self.line,
            message: format!("`{raw}` is not a nonnegative integer"),
        })
    }
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Tabulated rate from an `age,rate` CSV.
pub fn read_rate_table<R: Read>(reader: R) -> Result<RateModel> {
    let rows = read_rows(reader, &["age", "rate"])?;
    let mut ages = Vec::with_capacity(rows.len());
    let mut rates = Vec::with_capacity(rows.len());
    let mut prev = f64::NEG_INFINITY;
    for row in &rows {
        let (age, rate) = (row.number(0)?, row.number(1)?);
        if age < 0.0 || age <= prev {
            return Err(Error::Parse {
                line: row.line,
                message: "ages must be nonnegative and strictly increasing".into(),
            });
        }
        if rate < 0.0 {
            return Err(Error::Parse {
                line: row.line,
                message: "rates must be nonnegative".into(),
            });
        }
        prev = age;
        ages.push(age);
        rates.push(rate);
    }
    RateModel::tabulated(ages, rates)
}

pub fn read_rate_table_file(path: &Path) -> Result<RateModel> {
    read_rate_table(open(path)?)
}

pub fn write_rate_table<W: Write>(rate: &RateModel, mut out: W) -> Result<()> {
    let RateModel::Tabulated(tab) = rate else {
        return Err(Error::Domain("only tabulated rates serialize as tables".into()));
    };
    writeln!(out, "age,rate")?;
    for (a, r) in tab.ages().iter().zip(tab.rates()) {
        writeln!(out, "{},{}", fmt_age(*a), fmt_sci(*r))?;
    }
    Ok(())
}

/// `(age, incidence)` points from an `age,incidence` CSV.
pub fn read_incidence<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    read_rows(reader, &["age", "incidence"])?
        .iter()
        .map(|row| Ok((row.number(0)?, row.number(1)?)))
        .collect()
}

pub fn read_incidence_file(path: &Path) -> Result<Vec<(f64, f64)>> {
    read_incidence(open(path)?)
}

pub fn write_incidence<W: Write>(curve: &IncidenceCurve, mut out: W) -> Result<()> {
    writeln!(out, "age,incidence")?;
    for (a, v) in curve.points() {
        writeln!(out, "{},{}", fmt_age(a), fmt_sci(v))?;
    }
    Ok(())
}

pub const COHORT_HEADER: [&str; 4] = ["age", "empirical_incidence", "std_err", "analytic_incidence"];

/// Cohort result CSV. `comments` are written first, each prefixed by `# `.
pub fn write_cohort<W: Write>(result: &CohortResult, comments: &[String], mut out: W) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let analytic = result.analytic_curve()?;
    writeln!(out, "{}", COHORT_HEADER.join(","))?;
    for (i, (a, v)) in result.empirical_curve.points().enumerate() {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_age(a),
            fmt_sci(v),
            fmt_sci(result.std_errors[i]),
            fmt_sci(analytic.values()[i])
        )?;
    }
    Ok(())
}

/// One parsed row of a cohort CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CohortRow {
    pub age: f64,
    pub empirical_incidence: f64,
    pub std_err: f64,
    pub analytic_incidence: f64,
}

pub fn read_cohort<R: Read>(reader: R) -> Result<Vec<CohortRow>> {
    read_rows(reader, &COHORT_HEADER)?
        .iter()
        .map(|row| {
            Ok(CohortRow {
                age: row.number(0)?,
                empirical_incidence: row.number(1)?,
                std_err: row.number(2)?,
                analytic_incidence: row.number(3)?,
            })
        })
        .collect()
}

/// Trajectory CSV: one row per event. Unmarked events leave `successful` empty.
pub fn write_trajectories<'a, W, I>(trajectories: I, mut out: W) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (u64, &'a EventTrajectory)>,
{
    writeln!(out, "individual,event_time,successful")?;
    for (individual, traj) in trajectories {
        let flags = traj.success_flags();
        for (k, &t) in traj.mutation_times().iter().enumerate() {
            let mark = flags.map_or("", |f| if f[k] { "true" } else { "false" });
            writeln!(out, "{individual},{:.8e},{mark}", t)?;
        }
    }
    Ok(())
}

/// One parsed row of a trajectory CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRow {
    pub individual: u64,
    pub event_time: f64,
    pub successful: Option<bool>,
}

pub fn read_trajectories<R: Read>(reader: R) -> Result<Vec<EventRow>> {
    read_rows(reader, &["individual", "event_time", "successful"])?
        .iter()
        .map(|row| {
            let successful = match row.fields[2].as_str() {
                "" => None,
                "true" => Some(true),
                "false" => Some(false),
                other => {
                    return Err(Error::Parse {
                        line: row.line,
                        message: format!("`{other}` is not true/false"),
                    })
                }
            };
            Ok(EventRow {
                individual: row.integer(0)?,
                event_time: row.number(1)?,
                successful,
            })
        })
        .collect()
}
