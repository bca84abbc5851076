//! CSV and JSON writers. Floats use Rust's shortest round-trip formatting, so
//! identical values always give identical bytes.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use aloha_core::dynamic::DelayRecord;
use aloha_core::PointSet;
use serde::Serialize;

/// Row writer over `csv::Writer` with a fixed header.
pub struct CsvWriter<W: Write> {
    out: csv::Writer<W>,
}

impl CsvWriter<File> {
    pub fn create(path: &Path, header: &[&str]) -> io::Result<Self> {
        CsvWriter::new(File::create(path)?, header)
    }
}

impl<W: Write> CsvWriter<W> {
    pub fn new(out: W, header: &[&str]) -> io::Result<Self> {
        let mut out = csv::Writer::from_writer(out);
        out.write_record(header)?;
        Ok(Self { out })
    }

    pub fn row(&mut self, fields: &[String]) -> io::Result<()> {
        Ok(self.out.write_record(fields)?)
    }

    pub fn finish(self) -> io::Result<W> {
        self.out.into_inner().map_err(|e| e.into_error())
    }
}

/// `f64` cell; NaN (an empty group) is written as an empty field.
pub fn cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v}")
    }
}

pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const RAW_DELAY_HEADER: [&str; 6] = ["sweep_value", "replication", "distance", "delay", "hops", "censored"];

pub fn delay_row(sweep_value: &str, r: &DelayRecord) -> Vec<String> {
    vec![
        sweep_value.to_string(),
        r.replication.to_string(),
        cell(r.target),
        opt(r.delay),
        opt(r.hops),
        u8::from(r.censored()).to_string(),
    ]
}

/// Writes `index,x,y`.
pub fn write_points<W: Write>(out: W, ps: &PointSet) -> io::Result<W> {
    let mut w = CsvWriter::new(out, &["index", "x", "y"])?;
    for (i, p) in ps.positions().iter().enumerate() {
        w.row(&[i.to_string(), cell(p.x), cell(p.y)])?;
    }
    w.finish()
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use aloha_core::{Boundary, Point};

    #[test]
    fn delay_rows() {
        let r = DelayRecord {
            replication: 3,
            target: 10.0,
            distance: 9.7,
            delay: Some(41),
            hops: Some(7),
            path_length: Some(12.5),
        };
        assert_eq!(delay_row("0.2", &r).join(","), "0.2,3,10,41,7,0");
        let c = DelayRecord { delay: None, hops: None, path_length: None, ..r };
        assert_eq!(delay_row("0.2", &c).join(","), "0.2,3,10,,,1");
    }

    #[test]
    fn point_csv() {
        let pts = vec![Point::new(0.5, -1.0), Point::new(2.0, 0.25)];
        let ps = PointSet::from_positions(pts, 5.0, Boundary::Window, 1.0).unwrap();
        let bytes = write_points(Vec::new(), &ps).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "index,x,y\n0,0.5,-1\n1,2,0.25\n");
    }

    #[test]
    fn cells() {
        assert_eq!(cell(f64::NAN), "");
        assert_eq!(cell(f64::INFINITY), "inf");
        assert_eq!(cell(0.1), "0.1");
    }
}
