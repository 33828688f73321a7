//! SER records and their CSV and plot-data files.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::config::SimScheme;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 7] = ["scheme", "snr_db", "D", "trials", "errors", "ser", "seed"];

/// One Monte Carlo point. `d` is the discard depth for prefix-free schemes
/// and 0 otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SerRecord {
    pub scheme: SimScheme,
    pub snr_db: f64,
    pub d: usize,
    pub trials: u64,
    pub errors: u64,
    pub ser: f64,
    pub seed: u64,
}

impl SerRecord {
    pub fn new(scheme: SimScheme, snr_db: f64, d: usize, trials: u64, errors: u64, seed: u64) -> Result<Self> {
        if trials == 0 || errors > trials {
            return Err(Error::Parse(format!("{errors} errors in {trials} trials")));
        }
        Ok(Self {
            scheme,
            snr_db,
            d,
            trials,
            errors,
            ser: errors as f64 / trials as f64,
            seed,
        })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// SER printed with 15 significant digits.
fn format_ser(ser: f64) -> String {
    format!("{ser:.14e}")
}

pub fn write_csv<W: Write>(records: &[SerRecord], out: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.scheme.name().to_string(),
            r.snr_db.to_string(),
            r.d.to_string(),
            r.trials.to_string(),
            r.errors.to_string(),
            format_ser(r.ser),
            r.seed.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn csv_string(records: &[SerRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

/// Write the CSV file; nothing is created for an empty record list.
pub fn emit_csv(records: &[SerRecord], path: &Path) -> Result<()> {
    let text = csv_string(records)?;
    std::fs::write(path, text).map_err(io_err(path))
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let raw = row.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {} value {raw:?}", CSV_HEADER[i])))
}

/// Parse SER CSV text, checking the header and that each `ser` value matches
/// `errors/trials` to its printed precision.
pub fn parse_csv(text: &str) -> Result<Vec<SerRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut rows = reader.records();
    let header = rows
        .next()
        .ok_or_else(|| Error::Parse("missing header".into()))?
        .map_err(|e| Error::Parse(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for row in rows {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != CSV_HEADER.len() {
            return Err(Error::Parse(format!(
                "line {line}: expected {} fields",
                CSV_HEADER.len()
            )));
        }
        let scheme: SimScheme = row[0].parse()?;
        let snr_db: f64 = field(&row, 1, line)?;
        if snr_db.is_nan() {
            return Err(Error::Parse(format!("line {line}: snr_db is NaN")));
        }
        let rec = SerRecord::new(
            scheme,
            snr_db,
            field(&row, 2, line)?,
            field(&row, 3, line)?,
            field(&row, 4, line)?,
            field(&row, 6, line)?,
        )
        .map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
        let printed: f64 = field(&row, 5, line)?;
        if format_ser(printed) != format_ser(rec.ser) {
            return Err(Error::Parse(format!(
                "line {line}: ser {printed} is not errors/trials = {}",
                rec.ser
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Gnuplot data: one block per `(scheme, D)` series in first-seen order,
/// blocks separated by two blank lines so `index` selects a series.
pub fn plot_data_string(records: &[SerRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    let mut keys: Vec<(SimScheme, usize)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.scheme, r.d)) {
            keys.push((r.scheme, r.d));
        }
    }
    let mut s = String::from("# symbol error rate versus SNR\n# columns: snr_db ser errors trials\n");
    for (i, (scheme, d)) in keys.iter().enumerate() {
        if i > 0 {
            s.push_str("\n\n");
        }
        let label = if scheme.uses_discard() {
            format!("{scheme} D={d}")
        } else {
            scheme.to_string()
        };
        writeln!(s, "# index {i}: {label}").unwrap();
        let mut pts: Vec<&SerRecord> = records.iter().filter(|r| r.scheme == *scheme && r.d == *d).collect();
        pts.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
        for r in pts {
            writeln!(s, "{} {} {} {}", r.snr_db, format_ser(r.ser), r.errors, r.trials).unwrap();
        }
    }
    Ok(s)
}

pub fn emit_plot_data(records: &[SerRecord], path: &Path) -> Result<()> {
    let text = plot_data_string(records)?;
    std::fs::write(path, text).map_err(io_err(path))
}
