//! CSV reading and writing for snapshots, Tracy–Widom tables, tracking
//! traces and sweep summaries.
//!
//! Every number is written with 10 significant digits in a
//! locale-independent form, so files are byte-reproducible and parse back
//! to the same values.

use std::io::{Read, Write};

use crate::beta::Beta;
use crate::doa::{SweepRow, TrackingTrace};
use crate::error::{Error, Result};
use crate::linalg::{Snapshot, C64};
use crate::tracy_widom::{tw_cdf, tw_pdf};

/// Round to 10 significant digits.
pub fn round_sig10(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.9e}").parse().expect("formatted float parses")
}

/// `x` at 10 significant digits, shortest form.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig10(x);
    if r == 0.0 {
        return "0".into();
    }
    if r.is_finite() && r.fract() == 0.0 && r.abs() < 1e15 {
        return format!("{}", r as i64);
    }
    format!("{r:?}")
}

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidParameter(format!("I/O error: {e}"))
}

fn write_row<W: Write>(w: &mut W, fields: &[String]) -> Result<()> {
    writeln!(w, "{}", fields.join(",")).map_err(io_err)
}

/// Snapshots read from a CSV file, with their time stamps.
#[derive(Debug, Clone)]
pub struct SnapshotFile {
    pub beta: Beta,
    pub times: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

impl SnapshotFile {
    pub fn dim(&self) -> usize {
        self.snapshots.first().map_or(0, |s| s.dim())
    }
}

/// Column names for an `n`-dimensional snapshot file.
pub fn snapshot_header(n: usize, beta: Beta) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for i in 0..n {
        match beta {
            Beta::Real => h.push(format!("x_{i}")),
            Beta::Complex => {
                h.push(format!("re_{i}"));
                h.push(format!("im_{i}"));
            }
        }
    }
    h
}

/// Parse a snapshot file: header `t,x_0,…` (real) or `t,re_0,im_0,…`
/// (complex), one row per snapshot, strictly increasing `t`.
pub fn read_snapshots<R: Read>(reader: R) -> Result<SnapshotFile> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    let parse_err = |message: String| Error::Parse { line: 1, message };
    if header.first().map(String::as_str) != Some("t") {
        return Err(parse_err("first column must be `t`".into()));
    }
    let beta = match header.get(1).map(String::as_str) {
        Some("x_0") => Beta::Real,
        Some("re_0") => Beta::Complex,
        _ => return Err(parse_err("second column must be `x_0` or `re_0`".into())),
    };
    let n = match beta {
        Beta::Real => header.len() - 1,
        Beta::Complex if (header.len() - 1) % 2 == 0 => (header.len() - 1) / 2,
        Beta::Complex => return Err(parse_err("complex snapshot files need re/im column pairs".into())),
    };
    if header != snapshot_header(n, beta) {
        return Err(parse_err(format!("header does not match {}", snapshot_header(n, beta).join(","))));
    }

    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let row = row + 1;
        let record = record.map_err(|e| Error::Parse { line: row + 1, message: format!("row {row}: {e}") })?;
        let line = record.position().map_or(row + 1, |p| p.line() as usize);
        let err = |message: String| Error::Parse { line, message: format!("row {row}: {message}") };
        if record.len() != header.len() {
            return Err(err(format!("expected {} fields, found {}", header.len(), record.len())));
        }
        let mut values = Vec::with_capacity(record.len());
        for (field, name) in record.iter().zip(&header) {
            let v: f64 = field.parse().map_err(|_| err(format!("column {name}: {field:?} is not a number")))?;
            if !v.is_finite() {
                return Err(err(format!("column {name} is not finite")));
            }
            values.push(v);
        }
        let t = values[0];
        if let Some(&prev) = times.last() {
            if !(t > prev) {
                return Err(err(format!("t = {t} does not increase (previous {prev})")));
            }
        }
        let idx = row as i64 - 1;
        let snap = match beta {
            Beta::Real => Snapshot::real(idx, &values[1..]),
            Beta::Complex => Snapshot::complex(idx, values[1..].chunks(2).map(|p| C64::new(p[0], p[1])).collect()),
        }
        .map_err(|e| err(e.to_string()))?;
        times.push(t);
        snapshots.push(snap);
    }
    if snapshots.is_empty() {
        return Err(Error::Parse { line: 2, message: "no snapshot rows".into() });
    }
    Ok(SnapshotFile { beta, times, snapshots })
}

pub fn write_snapshots<W: Write>(mut w: W, times: &[f64], snapshots: &[Snapshot]) -> Result<()> {
    let first = snapshots.first().ok_or(Error::EmptyWindow)?;
    if times.len() != snapshots.len() {
        return Err(Error::DimensionMismatch { expected: snapshots.len(), got: times.len() });
    }
    let (n, beta) = (first.dim(), first.beta());
    write_row(&mut w, &snapshot_header(n, beta))?;
    for (&t, s) in times.iter().zip(snapshots) {
        if s.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: s.dim() });
        }
        let mut row = vec![fmt_num(t)];
        for z in s.values() {
            row.push(fmt_num(z.re));
            if beta == Beta::Complex {
                row.push(fmt_num(z.im));
            }
        }
        write_row(&mut w, &row)?;
    }
    Ok(())
}

/// Grid points from `from` to `to` inclusive in steps of `step`.
pub fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && to >= from && step > 0.0) {
        return Err(Error::InvalidParameter(format!("bad range [{from}, {to}] with step {step}")));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| from + k as f64 * step).collect())
}

/// Tracy–Widom table `s,F1,f1,F2,f2`.
pub fn write_tw_table<W: Write>(mut w: W, points: &[f64]) -> Result<()> {
    write_row(&mut w, &["s", "F1", "f1", "F2", "f2"].map(String::from))?;
    for &s in points {
        let row = [s, tw_cdf(Beta::Real, s), tw_pdf(Beta::Real, s), tw_cdf(Beta::Complex, s), tw_pdf(Beta::Complex, s)];
        write_row(&mut w, &row.map(fmt_num))?;
    }
    Ok(())
}

pub const TRACE_HEADER: [&str; 8] = ["t", "r", "rhat_mm", "rhat_kn", "sigma2_hat", "err_r", "err_rhat_mm", "err_rhat_kn"];
pub const SWEEP_HEADER: [&str; 5] = ["rate", "mm_mean", "mm_sd", "kn_mean", "kn_sd"];

pub fn write_trace<W: Write>(mut w: W, trace: &TrackingTrace) -> Result<()> {
    write_row(&mut w, &TRACE_HEADER.map(String::from))?;
    for r in &trace.records {
        let row = [
            fmt_num(r.t),
            r.r.to_string(),
            r.rhat_mm.to_string(),
            r.rhat_kn.to_string(),
            fmt_num(r.sigma2_hat),
            fmt_num(r.err_r),
            fmt_num(r.err_rhat_mm),
            fmt_num(r.err_rhat_kn),
        ];
        write_row(&mut w, &row)?;
    }
    Ok(())
}

pub fn write_sweep<W: Write>(mut w: W, rows: &[SweepRow]) -> Result<()> {
    write_row(&mut w, &SWEEP_HEADER.map(String::from))?;
    for r in rows {
        write_row(&mut w, &[r.rate, r.mm_mean, r.mm_sd, r.kn_mean, r.kn_sd].map(fmt_num))?;
    }
    Ok(())
}

/// A numeric CSV table: header and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::Parse { line, message: format!("{f:?} is not a number") }))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(3.0), "3");
        assert_eq!(fmt_num(-42.0), "-42");
        assert_eq!(fmt_num(0.1), "0.1");
        assert_eq!(fmt_num(1.0 / 3.0), "0.3333333333");
        assert_eq!(fmt_num(2.0f64.sqrt() * 1e-12), "1.414213562e-12");
        assert_eq!(fmt_num(6.02214076e23), "6.02214076e23");
    }

    proptest! {
        #[test]
        fn format_round_trips(x in prop::num::f64::NORMAL) {
            let s = fmt_num(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(fmt_num(back), s);
            prop_assert!((back - x).abs() <= 5e-10 * x.abs());
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let snaps = vec![
            Snapshot::complex(0, vec![C64::new(1.5, -0.25), C64::new(1.0 / 3.0, 2e-9)]).unwrap(),
            Snapshot::complex(1, vec![C64::new(-4.0, 0.0), C64::new(0.0, 7.0)]).unwrap(),
        ];
        let mut buf = Vec::new();
        write_snapshots(&mut buf, &[0.0, 1.0], &snaps).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,re_0,im_0,re_1,im_1\n"));
        let file = read_snapshots(buf.as_slice()).unwrap();
        assert_eq!(file.beta, Beta::Complex);
        assert_eq!(file.times, vec![0.0, 1.0]);
        for (a, b) in file.snapshots.iter().zip(&snaps) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert_eq!(x.re, round_sig10(y.re));
                assert_eq!(x.im, round_sig10(y.im));
            }
        }
    }

    #[test]
    fn real_snapshots() {
        let file = read_snapshots("t,x_0,x_1\n0,1,2\n1,3,4\n".as_bytes()).unwrap();
        assert_eq!(file.beta, Beta::Real);
        assert_eq!(file.dim(), 2);
        assert_eq!(file.snapshots[1].values()[1], C64::new(4.0, 0.0));
    }

    #[test]
    fn snapshot_errors_name_the_row() {
        let err = read_snapshots("t,x_0,x_1\n0,1,2\n1,3\n2,5,6\n".as_bytes()).unwrap_err();
        assert!(matches!(&err, Error::Parse { line: 3, message } if message.starts_with("row 2")), "{err}");
        let err = read_snapshots("t,x_0\n0,1\n0,2\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        let err = read_snapshots("t,x_0\n0,abc\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("row 1") && err.to_string().contains("x_0"), "{err}");
        assert!(read_snapshots("s,x_0\n0,1\n".as_bytes()).is_err());
        assert!(read_snapshots("t,re_0,im_0,re_1\n".as_bytes()).is_err());
        assert!(read_snapshots("t,x_0\n".as_bytes()).is_err());
    }

    #[test]
    fn tw_table_rows() {
        let pts = grid(-5.0, 3.0, 0.01).unwrap();
        assert_eq!(pts.len(), 801);
        let mut buf = Vec::new();
        write_tw_table(&mut buf, &pts).unwrap();
        let table = read_table(buf.as_slice()).unwrap();
        assert_eq!(table.header, ["s", "F1", "f1", "F2", "f2"]);
        assert_eq!(table.rows.len(), 801);
        assert!(table.rows.iter().all(|r| r[2] >= 0.0 && r[4] >= 0.0));
        let mut again = Vec::new();
        write_tw_table(&mut again, &pts).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn grid_rejects_bad_ranges() {
        assert!(grid(1.0, 0.0, 0.1).is_err());
        assert!(grid(0.0, 1.0, 0.0).is_err());
        assert_eq!(grid(0.0, 0.0, 0.5).unwrap(), vec![0.0]);
    }

    #[test]
    fn sweep_round_trip() {
        let rows = [SweepRow { rate: 2.0, mm_mean: 0.123456789012, mm_sd: 0.0, kn_mean: 1.0 / 7.0, kn_sd: 3e-5 }];
        let mut buf = Vec::new();
        write_sweep(&mut buf, &rows).unwrap();
        let t = read_table(buf.as_slice()).unwrap();
        assert_eq!(t.header, SWEEP_HEADER);
        let r = &rows[0];
        assert_eq!(t.rows[0], [r.rate, r.mm_mean, r.mm_sd, r.kn_mean, r.kn_sd].map(round_sig10));
    }
}
