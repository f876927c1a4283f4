//! File formats: volatility-index CSV input, simulated path output and
//! fixed-precision JSON numbers.
//!
//! Binary path files are little-endian:
//!
//! ```text
//! magic   8 bytes  "FVPATH01"
//! paths   u64
//! points  u64
//! grid    points × f64
//! then per path, column-major: s, x, sigma_sq, z  (4 × points × f64)
//! ```

use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use fracvol_core::backtest::{Date, VixSeries};
use fracvol_core::montecarlo::ModelPath;
use serde::Serializer;
use serde_json::value::RawValue;

use crate::error::{AppError, AppResult};

pub const PATH_MAGIC: &[u8; 8] = b"FVPATH01";

/// `x` with 17 significant digits, or `null` when not finite.
pub fn json_number(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { format!("{x:.16e}") } else { "null".to_string() };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

/// `serialize_with` adapter for `f64` fields.
pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&json_number(*x), s)
}

/// `serialize_with` adapter for `Vec<f64>` fields.
pub fn ser_f64_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let raw: Vec<Box<RawValue>> = xs.iter().map(|x| json_number(*x)).collect();
    serde::Serialize::serialize(&raw, s)
}

/// `serialize_with` adapter for `Option<f64>` fields.
pub fn ser_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser_f64(v, s),
        None => s.serialize_none(),
    }
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    ["%Y-%m-%d", "%m/%d/%Y", "%Y/%m/%d"].iter().find_map(|f| NaiveDate::parse_from_str(s, f).ok())
}

/// Reads a daily close series. Columns are found by name (`date`, `close`,
/// any case), so vendor files with extra OHLC columns load unchanged.
/// Dates may be ISO or `MM/DD/YYYY`.
pub fn load_vix_csv(path: &Path) -> AppResult<VixSeries> {
    let file =
        std::fs::File::open(path).map_err(|e| AppError::Config(format!("cannot open {}: {e}", path.display())))?;
    read_vix_csv(file).map_err(|e| match e {
        AppError::Config(m) => AppError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn read_vix_csv<R: Read>(reader: R) -> AppResult<VixSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| AppError::Config(e.to_string()))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h.eq_ignore_ascii_case(name)).ok_or_else(|| {
            AppError::Config(format!("missing column {name:?} in header {:?}", headers.iter().collect::<Vec<_>>()))
        })
    };
    let (di, ci) = (col("date")?, col("close")?);
    let mut dates = Vec::new();
    let mut close = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| AppError::Config(e.to_string()))?;
        let line = k + 2;
        let d = rec.get(di).and_then(parse_date).ok_or_else(|| AppError::Config(format!("line {line}: bad date")))?;
        let c: f64 = rec
            .get(ci)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| AppError::Config(format!("line {line}: bad close")))?;
        dates.push(Date::new(d.year(), d.month() as u8, d.day() as u8)?);
        close.push(c);
    }
    Ok(VixSeries::new(dates, close)?)
}

/// Output format for simulated paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathFormat {
    Csv,
    Binary,
}

impl PathFormat {
    /// `.bin` selects binary, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => PathFormat::Binary,
            _ => PathFormat::Csv,
        }
    }
}

/// Streaming writer for simulated paths.
pub struct PathWriter<W: Write> {
    out: W,
    format: PathFormat,
    index: u64,
}

impl<W: Write> PathWriter<W> {
    pub fn new(mut out: W, format: PathFormat, n_paths: u64, grid: &[f64]) -> AppResult<Self> {
        match format {
            PathFormat::Csv => writeln!(out, "path,time,s,x,sigma_sq,z")?,
            PathFormat::Binary => {
                out.write_all(PATH_MAGIC)?;
                out.write_all(&n_paths.to_le_bytes())?;
                out.write_all(&(grid.len() as u64).to_le_bytes())?;
                for t in grid {
                    out.write_all(&t.to_le_bytes())?;
                }
            }
        }
        Ok(Self { out, format, index: 0 })
    }

    pub fn write(&mut self, path: &ModelPath) -> AppResult<()> {
        let cols = [&path.s.values, &path.x.values, &path.sigma_sq.values, &path.z.values];
        match self.format {
            PathFormat::Csv => {
                for (i, t) in path.grid.points().iter().enumerate() {
                    writeln!(
                        self.out,
                        "{},{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                        self.index, cols[0][i], cols[1][i], cols[2][i], cols[3][i]
                    )?;
                }
            }
            PathFormat::Binary => {
                for c in cols {
                    for v in c.iter() {
                        self.out.write_all(&v.to_le_bytes())?;
                    }
                }
            }
        }
        self.index += 1;
        Ok(())
    }

    pub fn finish(mut self) -> AppResult<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Contents of a binary path file.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryPaths {
    pub grid: Vec<f64>,
    /// `paths[k] = [s, x, sigma_sq, z]`.
    pub paths: Vec<[Vec<f64>; 4]>,
}

pub fn read_binary_paths<R: Read>(mut r: R) -> AppResult<BinaryPaths> {
    let bad = |m: &str| AppError::Config(format!("binary path file: {m}"));
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != PATH_MAGIC {
        return Err(bad("wrong magic"));
    }
    let mut word = [0u8; 8];
    let mut next_u64 = |r: &mut R| -> AppResult<u64> {
        r.read_exact(&mut word)?;
        Ok(u64::from_le_bytes(word))
    };
    let n_paths = next_u64(&mut r)? as usize;
    let n_points = next_u64(&mut r)? as usize;
    let read_vec = |r: &mut R| -> AppResult<Vec<f64>> {
        let mut buf = vec![0u8; 8 * n_points];
        r.read_exact(&mut buf)?;
        Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect())
    };
    let grid = read_vec(&mut r)?;
    let mut paths = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        paths.push([read_vec(&mut r)?, read_vec(&mut r)?, read_vec(&mut r)?, read_vec(&mut r)?]);
    }
    Ok(BinaryPaths { grid, paths })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(json_number(0.1).get(), "1.0000000000000001e-1");
        assert_eq!(json_number(f64::NAN).get(), "null");
        let back: f64 = serde_json::from_str(json_number(1.0 / 3.0).get()).unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }

    #[test]
    fn csv_formats() {
        let iso = "date,close\n2008-01-02,23.17\n2008-01-03,22.49\n2008-01-04,23.94\n";
        assert_eq!(read_vix_csv(iso.as_bytes()).unwrap().len(), 3);
        let vendor =
            "DATE,OPEN,HIGH,LOW,CLOSE\n01/02/2008,22.58,23.36,21.54,23.17\n01/03/2008,23.20,23.35,22.19,22.49\n";
        let s = read_vix_csv(vendor.as_bytes()).unwrap();
        assert_eq!(s.close(), &[23.17, 22.49]);
        let dup = "date,close\n2008-01-02,23.17\n2008-01-02,22.49\n";
        assert!(read_vix_csv(dup.as_bytes()).is_err());
        assert!(read_vix_csv("day,close\n2008-01-02,1\n".as_bytes()).is_err());
    }
}
