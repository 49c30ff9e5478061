//! CSV input and output.
//!
//! Two layouts carry a functional time series:
//!
//! * dataset: first column holds ages (or any grid labels), first row holds
//!   years, each cell is a rate. This is the wide export shape of demographic
//!   tables. Selected ages are rescaled affinely onto `[0,1]`.
//! * path: header row of node positions in `[0,1]`, then one row per time
//!   index. This is what `simulate` writes.
//!
//! Plain tables with a header of column names feed the scalar tests.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use funroot_core::funcspace::{FunctionSeries, GridDomain};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Cell spellings read as missing.
const MISSING: [&str; 6] = ["", "NA", "N/A", "NaN", ".", "-"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// Ages down the first column, years across the first row.
    #[default]
    Dataset,
    /// Node positions in the header, one row per time index.
    Path,
}

/// A wide age × year table as read from disk. Missing cells are kept as NaN
/// and only rejected if they fall inside a selection.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetCsv {
    pub row_labels: Vec<f64>,
    pub column_labels: Vec<i64>,
    /// `matrix[i][j]` is the cell at row label `i`, column label `j`.
    pub matrix: Vec<Vec<f64>>,
    /// 1-based file line of each data row, for messages.
    lines: Vec<u64>,
}

/// Age and year window plus the log flag. Unset bounds mean the full range.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct IngestOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub age_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub age_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub year_min: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub year_max: Option<i64>,
    pub log: bool,
}

/// A selected block, ready for analysis.
#[derive(Debug, Clone)]
pub struct Selection {
    pub series: FunctionSeries<f64>,
    pub ages: Vec<f64>,
    pub years: Vec<i64>,
}

fn reader(path: &Path) -> CliResult<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))
}

fn records(path: &Path) -> CliResult<Vec<(u64, Vec<String>)>> {
    let mut out = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(out)
}

fn parse_real(cell: &str, path: &Path, line: u64, col: usize) -> CliResult<f64> {
    cell.parse::<f64>().map_err(|_| {
        CliError::data(format!("{}: line {line}, column {col}: cannot parse '{cell}' as a number", path.display()))
    })
}

/// Accepts an open-ended top label such as `110+`.
fn parse_age(cell: &str, path: &Path, line: u64) -> CliResult<f64> {
    parse_real(cell.trim_end_matches('+'), path, line, 1)
}

impl DatasetCsv {
    pub fn read(path: &Path) -> CliResult<Self> {
        let recs = records(path)?;
        let Some(((_, header), rows)) = recs.split_first() else {
            return Err(CliError::data(format!("{}: file is empty", path.display())));
        };
        if header.len() < 2 {
            return Err(CliError::data(format!("{}: header needs at least one year column", path.display())));
        }
        let column_labels = header[1..]
            .iter()
            .enumerate()
            .map(|(j, c)| {
                c.parse::<i64>().map_err(|_| {
                    CliError::data(format!("{}: line 1, column {}: year label '{c}' is not an integer", path.display(), j + 2))
                })
            })
            .collect::<CliResult<Vec<i64>>>()?;
        if column_labels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::data(format!("{}: year labels must be strictly increasing", path.display())));
        }
        let mut row_labels = Vec::with_capacity(rows.len());
        let mut matrix = Vec::with_capacity(rows.len());
        let mut lines = Vec::with_capacity(rows.len());
        for (line, rec) in rows {
            row_labels.push(parse_age(&rec[0], path, *line)?);
            let cells = rec[1..]
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    if MISSING.contains(&c.as_str()) {
                        Ok(f64::NAN)
                    } else {
                        parse_real(c, path, *line, j + 2)
                    }
                })
                .collect::<CliResult<Vec<f64>>>()?;
            matrix.push(cells);
            lines.push(*line);
        }
        if row_labels.is_empty() {
            return Err(CliError::data(format!("{}: no data rows", path.display())));
        }
        if let Some(k) = row_labels.windows(2).position(|w| w[1] <= w[0]) {
            return Err(CliError::data(format!(
                "{}: line {}: age labels must be strictly increasing",
                path.display(),
                lines[k + 1]
            )));
        }
        Ok(Self { row_labels, column_labels, matrix, lines })
    }

    /// The block inside the window, one function per year on the ages
    /// rescaled to `[0,1]`. With `log` the natural log is taken first.
    pub fn select(&self, opts: &IngestOptions) -> CliResult<Selection> {
        let (a_lo, a_hi) = (self.row_labels[0], *self.row_labels.last().unwrap());
        let (y_lo, y_hi) = (self.column_labels[0], *self.column_labels.last().unwrap());
        let age_min = opts.age_min.unwrap_or(a_lo);
        let age_max = opts.age_max.unwrap_or(a_hi);
        let year_min = opts.year_min.unwrap_or(y_lo);
        let year_max = opts.year_max.unwrap_or(y_hi);
        if age_min < a_lo || age_max > a_hi || age_min >= age_max {
            return Err(CliError::data(format!(
                "age range [{age_min}, {age_max}] is not inside the file's [{a_lo}, {a_hi}]"
            )));
        }
        if year_min < y_lo || year_max > y_hi || year_min > year_max {
            return Err(CliError::data(format!(
                "year range [{year_min}, {year_max}] is not inside the file's [{y_lo}, {y_hi}]"
            )));
        }
        let rows: Vec<usize> = (0..self.row_labels.len())
            .filter(|&i| (age_min..=age_max).contains(&self.row_labels[i]))
            .collect();
        let cols: Vec<usize> = (0..self.column_labels.len())
            .filter(|&j| (year_min..=year_max).contains(&self.column_labels[j]))
            .collect();
        if rows.len() < 3 {
            return Err(CliError::data(format!("only {} ages in the selected range, need at least 3", rows.len())));
        }
        if cols.is_empty() {
            return Err(CliError::data("no years in the selected range"));
        }
        let ages: Vec<f64> = rows.iter().map(|&i| self.row_labels[i]).collect();
        let domain = Arc::new(GridDomain::trapezoid(rescale(&ages))?);
        let mut frames = Vec::with_capacity(cols.len());
        for &j in &cols {
            let mut values = Vec::with_capacity(rows.len());
            for &i in &rows {
                let raw = self.matrix[i][j];
                let v = if opts.log { raw.ln() } else { raw };
                if !v.is_finite() {
                    let what = if raw.is_finite() { "has no finite logarithm" } else { "is missing or not finite" };
                    return Err(CliError::data(format!(
                        "cell at age {} (line {}), year {} (column {}) {what}: {raw}",
                        self.row_labels[i],
                        self.lines[i],
                        self.column_labels[j],
                        j + 2
                    )));
                }
                values.push(v);
            }
            frames.push(values);
        }
        Ok(Selection {
            series: FunctionSeries::from_rows(domain, frames)?,
            ages,
            years: cols.iter().map(|&j| self.column_labels[j]).collect(),
        })
    }
}

/// `(a − a₀)/(a₁ − a₀)` with both end points pinned.
fn rescale(ages: &[f64]) -> Vec<f64> {
    let (lo, hi) = (ages[0], ages[ages.len() - 1]);
    let mut nodes: Vec<f64> = ages.iter().map(|a| (a - lo) / (hi - lo)).collect();
    let n = nodes.len();
    nodes[0] = 0.0;
    nodes[n - 1] = 1.0;
    nodes
}

/// Reads a dataset-layout CSV and returns the selected functional series.
pub fn ingest_csv(path: &Path, opts: &IngestOptions) -> CliResult<FunctionSeries<f64>> {
    Ok(DatasetCsv::read(path)?.select(opts)?.series)
}

/// Writes a series in the path layout. Values use the shortest decimal form
/// that parses back to the same `f64`.
pub fn write_series_csv(series: &FunctionSeries<f64>, out: impl Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = series.domain().nodes().iter().map(f64::to_string).collect();
    w.write_record(&header).map_err(csv_err)?;
    for f in series.frames() {
        w.write_record(f.values().iter().map(f64::to_string)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::data(e.to_string())
}

/// Reads a path-layout CSV.
pub fn read_series_csv(path: &Path) -> CliResult<FunctionSeries<f64>> {
    let recs = records(path)?;
    let Some(((hline, header), rows)) = recs.split_first() else {
        return Err(CliError::data(format!("{}: file is empty", path.display())));
    };
    let nodes = header
        .iter()
        .enumerate()
        .map(|(j, c)| parse_real(c, path, *hline, j + 1))
        .collect::<CliResult<Vec<f64>>>()?;
    let domain = Arc::new(
        GridDomain::trapezoid(nodes).map_err(|e| CliError::data(format!("{}: header: {e}", path.display())))?,
    );
    let mut frames = Vec::with_capacity(rows.len());
    for (line, rec) in rows {
        let values = rec
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let v = parse_real(c, path, *line, j + 1)?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(CliError::data(format!("{}: line {line}, column {}: value is not finite", path.display(), j + 1)))
                }
            })
            .collect::<CliResult<Vec<f64>>>()?;
        frames.push(values);
    }
    if frames.is_empty() {
        return Err(CliError::data(format!("{}: no data rows", path.display())));
    }
    Ok(FunctionSeries::from_rows(domain, frames)?)
}

/// Loads a functional series in either layout. The window only applies to
/// the dataset layout.
pub fn load_series(path: &Path, layout: Layout, opts: &IngestOptions) -> CliResult<FunctionSeries<f64>> {
    match layout {
        Layout::Dataset => ingest_csv(path, opts),
        Layout::Path => {
            if opts.age_min.is_some() || opts.age_max.is_some() || opts.year_min.is_some() || opts.year_max.is_some() {
                return Err(CliError::usage("age and year windows apply to the dataset layout only"));
            }
            let s = read_series_csv(path)?;
            if opts.log {
                let rows = s
                    .frames()
                    .iter()
                    .map(|f| f.values().iter().map(|v| v.ln()).collect())
                    .collect::<Vec<Vec<f64>>>();
                if rows.iter().flatten().any(|v: &f64| !v.is_finite()) {
                    return Err(CliError::data(format!("{}: log of a non-positive value", path.display())));
                }
                Ok(FunctionSeries::from_rows(s.domain().clone(), rows)?)
            } else {
                Ok(s)
            }
        }
    }
}

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> CliResult<Self> {
        let recs = records(path)?;
        let Some(((_, header), rows)) = recs.split_first() else {
            return Err(CliError::data(format!("{}: file is empty", path.display())));
        };
        let mut columns = vec![Vec::with_capacity(rows.len()); header.len()];
        for (line, rec) in rows {
            for (j, c) in rec.iter().enumerate() {
                if MISSING.contains(&c.as_str()) {
                    return Err(CliError::data(format!(
                        "{}: line {line}, column {} ('{}'): missing value",
                        path.display(),
                        j + 1,
                        header[j]
                    )));
                }
                columns[j].push(parse_real(c, path, *line, j + 1)?);
            }
        }
        if rows.is_empty() {
            return Err(CliError::data(format!("{}: no data rows", path.display())));
        }
        Ok(Self { names: header.clone(), columns })
    }

    /// Column by name, or by 1-based position when `key` is a number.
    pub fn column(&self, key: &str) -> CliResult<(&str, &[f64])> {
        let idx = match self.names.iter().position(|n| n == key) {
            Some(i) => i,
            None => match key.parse::<usize>() {
                Ok(k) if (1..=self.names.len()).contains(&k) => k - 1,
                _ => return Err(CliError::usage(format!("no column '{key}' (have {})", self.names.join(", ")))),
            },
        };
        Ok((&self.names[idx], &self.columns[idx]))
    }
}
