//! Trajectory CSV output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use poincare_vi::integrators::StepRecord;

use crate::error::{HarnessError, Result};

/// Header for an `n` degree-of-freedom trajectory.
pub fn header(n: usize) -> String {
    let mut cols = vec!["step".to_string(), "tau".into(), "t".into(), "h_fictive".into(), "h_physical".into()];
    cols.extend((1..=n).map(|i| format!("q{i}")));
    cols.extend((1..=n).map(|i| format!("p{i}")));
    cols.push("pt".into());
    cols.push("energy_error".into());
    cols.join(",")
}

/// One data line, without the newline.
pub fn format_record(rec: &StepRecord) -> String {
    let mut line = format!(
        "{},{:.16e},{:.16e},{:.16e},{:.16e}",
        rec.step, rec.tau, rec.t, rec.h_fictive, rec.h_physical
    );
    for v in rec.q.iter().chain(&rec.p).chain([&rec.pt, &rec.energy_error]) {
        line.push_str(&format!(",{v:.16e}"));
    }
    line
}

/// Streams records to a writer, emitting the header up front.
pub struct CsvWriter<W: Write> {
    out: W,
    rows: u64,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, n: usize) -> io::Result<Self> {
        writeln!(out, "{}", header(n))?;
        Ok(Self { out, rows: 0 })
    }

    pub fn write(&mut self, rec: &StepRecord) -> io::Result<()> {
        self.rows += 1;
        writeln!(self.out, "{}", format_record(rec))
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// CSV file writer that remembers its path for error reports.
pub struct CsvFile {
    path: PathBuf,
    writer: CsvWriter<BufWriter<File>>,
}

impl CsvFile {
    pub fn create(path: &Path, n: usize) -> Result<Self> {
        let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
        let writer = CsvWriter::new(BufWriter::new(file), n).map_err(|e| HarnessError::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            writer,
        })
    }

    pub fn write(&mut self, rec: &StepRecord) -> Result<()> {
        self.writer.write(rec).map_err(|e| HarnessError::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<u64> {
        self.writer.flush().map_err(|e| HarnessError::io(&self.path, e))?;
        Ok(self.writer.rows())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Writes a collected trajectory; `n` fixes the header when `records` is empty.
pub fn write_csv(records: &[StepRecord], n: usize, path: &Path) -> Result<()> {
    let mut file = CsvFile::create(path, n)?;
    for rec in records {
        file.write(rec)?;
    }
    file.finish().map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(step: u64) -> StepRecord {
        StepRecord {
            step,
            tau: 0.1 * step as f64,
            t: 0.0,
            h_fictive: 0.1,
            h_physical: 0.05,
            q: vec![1.0, 0.0],
            p: vec![0.0, 1.0],
            pt: 0.5,
            energy_error: 0.0,
            monitor_value: f64::NAN,
            newton_iterations: 0,
            finishing: false,
        }
    }

    #[test]
    fn header_layout() {
        assert_eq!(header(2), "step,tau,t,h_fictive,h_physical,q1,q2,p1,p2,pt,energy_error");
        assert_eq!(header(1), "step,tau,t,h_fictive,h_physical,q1,p1,pt,energy_error");
    }

    #[test]
    fn rows_round_trip_exactly() {
        let mut rec = record(3);
        rec.q[0] = 0.1 + 0.2;
        rec.energy_error = -1.234_567_890_123_456_7e-9;
        let line = format_record(&rec);
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 11);
        assert_eq!(fields[0], "3");
        assert_eq!(fields[5].parse::<f64>().unwrap(), rec.q[0]);
        assert_eq!(fields[10].parse::<f64>().unwrap(), rec.energy_error);
    }

    #[test]
    fn streaming_counts_rows() {
        let mut w = CsvWriter::new(Vec::new(), 2).unwrap();
        w.write(&record(0)).unwrap();
        w.write(&record(1)).unwrap();
        assert_eq!(w.rows(), 2);
        let text = String::from_utf8(w.into_inner()).unwrap();
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn empty_trajectory_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        write_csv(&[], 3, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{}\n", header(3)));
    }
}
