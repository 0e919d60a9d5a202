//! CSV, JSON and field outputs.
//!
//! Reals are written in shortest round-trip exponent form (`1.048e-2`);
//! undefined values (the step fields of the final record, wall times when
//! timing is off) are left empty.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{ExperimentError, RunLog};
use crate::accel::IterationRecord;
use crate::grid::{io as field_io, MacGrid};

pub const CSV_HEADER: [&str; 10] = [
    "k",
    "g_vprime",
    "g_l2",
    "picard_resid_h1",
    "theta",
    "gamma",
    "kappa_hat",
    "max_abs_alpha",
    "alpha_json",
    "wall_ms",
];

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}

fn write_rows<W: Write>(
    w: &mut csv::Writer<W>,
    prefix: &[String],
    records: &[IterationRecord],
    timing: bool,
) -> Result<(), ExperimentError> {
    for r in records {
        let mut row: Vec<String> = prefix.to_vec();
        row.push(r.k.to_string());
        for x in [r.g_vprime, r.g_l2, r.picard_resid_h1, r.theta, r.gamma, r.kappa_hat, r.max_abs_alpha] {
            row.push(num(x));
        }
        row.push(if r.alpha.is_empty() {
            String::new()
        } else {
            serde_json::to_string(&r.alpha)?
        });
        row.push(if timing { num(r.wall_time_ms) } else { String::new() });
        w.write_record(&row)?;
    }
    Ok(())
}

fn header_with(prefix: &[&str]) -> Vec<String> {
    prefix.iter().chain(CSV_HEADER.iter()).map(|s| s.to_string()).collect()
}

/// Per-iteration CSV of one run.
pub fn write_records_csv<W: Write>(log: &RunLog, out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    write_rows(&mut w, &[], &log.records, log.config.timing)?;
    w.flush()?;
    Ok(())
}

/// [`write_records_csv`] into a string.
pub fn records_csv(log: &RunLog) -> Result<String, ExperimentError> {
    let mut buf = Vec::new();
    write_records_csv(log, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

/// Combined CSV of a mesh sweep, keyed by a leading `nx` column.
pub fn write_sweep_csv<W: Write>(logs: &[RunLog], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header_with(&["nx"]))?;
    for log in logs {
        write_rows(&mut w, &[log.config.nx.to_string()], &log.records, log.config.timing)?;
    }
    w.flush()?;
    Ok(())
}

/// Combined CSV of a norm comparison, keyed by a leading `norm` column.
pub fn write_compare_csv<W: Write>(logs: &[&RunLog], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header_with(&["norm"]))?;
    for log in logs {
        write_rows(&mut w, &[log.config.norm.to_string()], &log.records, log.config.timing)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a run CSV, or a sweep/comparison CSV with one leading key column.
/// Returns `(key, records)` groups in file order; the key is empty for a
/// plain run CSV. Diagnostics not stored in the CSV are left at defaults.
pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<(String, Vec<IterationRecord>)>, ExperimentError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let offset = match headers.len() {
        10 => 0,
        11 => 1,
        n => return Err(ExperimentError::Parse(format!("expected 10 or 11 CSV columns, found {n}"))),
    };
    if headers.iter().skip(offset).ne(CSV_HEADER.iter().copied()) {
        return Err(ExperimentError::Parse("CSV header does not match the run schema".into()));
    }
    let real = |s: &str| -> Result<f64, ExperimentError> {
        if s.is_empty() {
            Ok(f64::NAN)
        } else {
            s.parse().map_err(|_| ExperimentError::Parse(format!("invalid number '{s}'")))
        }
    };
    let mut groups: Vec<(String, Vec<IterationRecord>)> = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let key = if offset == 1 { row[0].to_string() } else { String::new() };
        let f = |i: usize| &row[offset + i];
        let alpha: Vec<f64> = if f(8).is_empty() {
            Vec::new()
        } else {
            serde_json::from_str::<Vec<Option<f64>>>(f(8))?
                .into_iter()
                .map(|a| a.unwrap_or(f64::NAN))
                .collect()
        };
        let record = IterationRecord {
            k: f(0).parse().map_err(|_| ExperimentError::Parse(format!("invalid iteration '{}'", f(0))))?,
            g_vprime: real(f(1))?,
            g_l2: real(f(2))?,
            picard_resid_h1: real(f(3))?,
            theta: real(f(4))?,
            gamma: real(f(5))?,
            kappa_hat: real(f(6))?,
            max_abs_alpha: real(f(7))?,
            depth_used: alpha.len().saturating_sub(2),
            alpha,
            wall_time_ms: real(f(9))?,
            dropped: 0,
            fallback: false,
            step_bound: None,
            beta_gap: None,
            div_max: f64::NAN,
        };
        match groups.last_mut() {
            Some((k, recs)) if *k == key => recs.push(record),
            _ => groups.push((key, vec![record])),
        }
    }
    Ok(groups)
}

/// Write `bytes` to a temporary sibling of `path`, then rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Write `<stem>.csv` and `<stem>.json` for one run into `dir`, plus the
/// final fields under `dir/fields` when `dump_fields` is set. Returns the
/// paths written.
pub fn write_run(log: &RunLog, dir: &Path, stem: &str, dump_fields: bool) -> Result<Vec<PathBuf>, ExperimentError> {
    let mut written = Vec::new();
    let csv_path = dir.join(format!("{stem}.csv"));
    write_atomic(&csv_path, records_csv(log)?.as_bytes())?;
    written.push(csv_path);
    let json_path = dir.join(format!("{stem}.json"));
    write_atomic(&json_path, serde_json::to_string_pretty(log)?.as_bytes())?;
    written.push(json_path);
    if dump_fields {
        if let Some((u, p)) = &log.solution {
            let g = MacGrid::new(log.config.nx).expect("validated grid size");
            let fields = dir.join("fields");
            let mut buf = Vec::new();
            field_io::write_u_csv(&g, u, &mut buf)?;
            write_atomic(&fields.join("u.csv"), &buf)?;
            buf.clear();
            field_io::write_v_csv(&g, u, &mut buf)?;
            write_atomic(&fields.join("v.csv"), &buf)?;
            buf.clear();
            field_io::write_p_csv(&g, p, &mut buf)?;
            write_atomic(&fields.join("p.csv"), &buf)?;
            written.extend(["u.csv", "v.csv", "p.csv"].map(|f| fields.join(f)));
        }
    }
    Ok(written)
}
