//! Persistence: norm-series CSV, verdict tables and `FNS1` snapshots.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::decay::NormSeries;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"FNS1";

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn series_header(m_list: &[u32]) -> Vec<String> {
    let mut h: Vec<String> = ["t", "l2_sq", "diss_integral", "shell_energy", "g_t"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend(m_list.iter().map(|m| format!("deriv{m}_sq")));
    h
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io { path: "<csv>".into(), source: io },
        other => Error::Config(format!("csv: {other:?}")),
    }
}

pub fn write_series_csv<W: Write>(out: W, series: &NormSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(series_header(&series.m_list)).map_err(csv_err)?;
    for i in 0..series.len() {
        let mut row = vec![
            fmt_f64(series.times[i]),
            fmt_f64(series.l2_sq[i]),
            fmt_f64(series.diss_integral[i]),
            fmt_f64(series.shell_energy[i]),
            fmt_f64(series.g_t[i]),
        ];
        row.extend(series.deriv_sq.iter().map(|d| fmt_f64(d[i])));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn series_csv_string(series: &NormSeries) -> String {
    let mut buf = Vec::new();
    write_series_csv(&mut buf, series).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn read_series_csv<R: Read>(input: R) -> Result<NormSeries> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let bad = |msg: String| Error::Config(format!("series csv: {msg}"));
    if header.len() < 5 || header[..5] != series_header(&[])[..] {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let m_list = header[5..]
        .iter()
        .map(|h| {
            h.strip_prefix("deriv")
                .and_then(|s| s.strip_suffix("_sq"))
                .and_then(|s| s.parse::<u32>().ok())
                .ok_or_else(|| bad(format!("bad column {h}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut series = NormSeries::new(m_list);
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let v = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| bad(format!("{s}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != header.len() {
            return Err(bad(format!("row has {} fields, header {}", v.len(), header.len())));
        }
        series.push(crate::decay::NormSample {
            t: v[0],
            l2_sq: v[1],
            diss_integral: v[2],
            shell_energy: v[3],
            g_t: v[4],
            deriv_sq: v[5..].to_vec(),
        })?;
    }
    Ok(series)
}

/// Writes any table of pre-formatted cells.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Field state stored in a snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub alpha: f64,
    pub t: f64,
    pub u: SpectralField,
}

/// Layout: `FNS1`, `n` as u64, then `L`, `alpha`, `t` as f64, then the
/// coefficients component by component as `(re, im)` f64 pairs. All little-endian.
pub fn encode_snapshot(s: &Snapshot) -> Vec<u8> {
    let g = s.u.grid();
    let mut out = Vec::with_capacity(36 + 48 * g.len());
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&(g.n() as u64).to_le_bytes());
    for x in [g.box_length(), s.alpha, s.t] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for c in s.u.components() {
        for z in c {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<Snapshot> {
    if bytes.len() < 36 || &bytes[..4] != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("missing FNS1 header".into()));
    }
    let word = |i: usize| -> [u8; 8] { bytes[i..i + 8].try_into().unwrap() };
    let n = u64::from_le_bytes(word(4));
    let n = usize::try_from(n).map_err(|_| Error::Snapshot(format!("grid size {n} too large")))?;
    let (l, alpha, t) = (
        f64::from_le_bytes(word(12)),
        f64::from_le_bytes(word(20)),
        f64::from_le_bytes(word(28)),
    );
    let grid = Grid::new(n, l).map_err(|e| Error::Snapshot(e.to_string()))?;
    let expected = 36 + 48 * grid.len();
    if bytes.len() != expected {
        return Err(Error::Snapshot(format!(
            "expected {expected} bytes for n={n}, found {}",
            bytes.len()
        )));
    }
    let mut comps: [Vec<Complex64>; 3] = Default::default();
    let mut pos = 36;
    for c in comps.iter_mut() {
        c.reserve_exact(grid.len());
        for _ in 0..grid.len() {
            c.push(Complex64::new(f64::from_le_bytes(word(pos)), f64::from_le_bytes(word(pos + 8))));
            pos += 16;
        }
    }
    Ok(Snapshot {
        alpha,
        t,
        u: SpectralField::from_components(grid, comps)?,
    })
}

pub fn write_snapshot(path: &Path, s: &Snapshot) -> Result<()> {
    fs::write(path, encode_snapshot(s)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&bytes)
}
