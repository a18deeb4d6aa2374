use std::io::{Read, Write};
use std::path::Path;

use super::{Controls, ScheduleError};

/// Piecewise-linear schedule through tabulated knots `(s, x_1..x_L)`.
///
/// Used for externally supplied reference paths and for exporting optimized
/// schedules. CSV layout: header `s,x1,...,xL`, one row per knot.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSchedule {
    knots: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl TabulatedSchedule {
    pub fn new(knots: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self, ScheduleError> {
        if knots.len() < 2 || knots.len() != rows.len() {
            return Err(ScheduleError::Table(format!(
                "need at least two rows and one value row per knot ({} knots, {} rows)",
                knots.len(),
                rows.len()
            )));
        }
        if knots[0] != 0.0 || *knots.last().unwrap() != 1.0 {
            return Err(ScheduleError::Table(
                "first knot must be s = 0 and last knot s = 1".into(),
            ));
        }
        if let Some(w) = knots.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(ScheduleError::Table(format!(
                "knots must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let width = rows[0].len();
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(ScheduleError::Table(
                "every row needs the same positive number of channels".into(),
            ));
        }
        Ok(Self { knots, rows })
    }

    /// Samples any control source on a uniform grid of `points` knots.
    pub fn sample<C: Controls + ?Sized>(controls: &C, points: usize) -> Self {
        let points = points.max(2);
        let knots: Vec<f64> = (0..points)
            .map(|i| i as f64 / (points - 1) as f64)
            .collect();
        let rows = knots.iter().map(|&s| controls.values_at(s)).collect();
        Self { knots, rows }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, ScheduleError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0).map(str::trim) != Some("s") || headers.len() < 2 {
            return Err(ScheduleError::Table("header must be `s,x1,...,xL`".into()));
        }
        let mut knots = Vec::new();
        let mut rows = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let parsed: Result<Vec<f64>, _> =
                record.iter().map(|f| f.trim().parse::<f64>()).collect();
            let parsed =
                parsed.map_err(|e| ScheduleError::Table(format!("row {}: {e}", line + 2)))?;
            if parsed.len() != headers.len() {
                return Err(ScheduleError::Table(format!(
                    "row {} has {} fields, header has {}",
                    line + 2,
                    parsed.len(),
                    headers.len()
                )));
            }
            knots.push(parsed[0]);
            rows.push(parsed[1..].to_vec());
        }
        Self::new(knots, rows)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ScheduleError> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["s".to_string()];
        header.extend((1..=self.channel_count()).map(|i| format!("x{i}")));
        wtr.write_record(&header)?;
        for (s, row) in self.knots.iter().zip(&self.rows) {
            let mut rec = vec![format_f64(*s)];
            rec.extend(row.iter().map(|v| format_f64(*v)));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ScheduleError> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), ScheduleError> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Shortest decimal that round-trips exactly.
fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

impl Controls for TabulatedSchedule {
    fn channel_count(&self) -> usize {
        self.rows[0].len()
    }

    fn values_into(&self, s: f64, out: &mut [f64]) {
        let s = s.clamp(0.0, 1.0);
        let hi = self
            .knots
            .partition_point(|&k| k < s)
            .clamp(1, self.knots.len() - 1);
        let lo = hi - 1;
        if self.knots[hi] == s {
            out.copy_from_slice(&self.rows[hi]);
            return;
        }
        let t = (s - self.knots[lo]) / (self.knots[hi] - self.knots[lo]);
        for (o, (a, b)) in out.iter_mut().zip(self.rows[lo].iter().zip(&self.rows[hi])) {
            *o = a + t * (b - a);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> TabulatedSchedule {
        TabulatedSchedule::new(
            vec![0.0, 0.1, 0.55, 1.0],
            vec![
                vec![1.0, 0.0],
                vec![0.93, 0.2],
                vec![0.4, 0.5],
                vec![0.0, 1.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn knots_reproduce_exactly() {
        let t = table();
        for (s, row) in t.knots().iter().zip(t.rows()) {
            assert_eq!(&t.values_at(*s), row);
        }
    }

    #[test]
    fn interpolates_between_knots() {
        let t = table();
        let v = t.values_at(0.05);
        assert!((v[0] - 0.965).abs() < 1e-15);
        assert!((v[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = TabulatedSchedule::new(
            vec![0.0, 1.0 / 3.0, 1.0],
            vec![vec![0.1 + 0.2], vec![std::f64::consts::PI], vec![-1e-300]],
        )
        .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("s,x1\n"));
        assert_eq!(TabulatedSchedule::read_csv(&buf[..]).unwrap(), t);
    }

    #[test]
    fn rejects_malformed_tables() {
        assert!(TabulatedSchedule::new(vec![0.0, 0.5], vec![vec![1.0], vec![1.0]]).is_err());
        assert!(TabulatedSchedule::new(vec![0.0, 0.5, 0.5, 1.0], vec![vec![1.0]; 4]).is_err());
        assert!(TabulatedSchedule::read_csv("t,x1\n0,1\n1,0\n".as_bytes()).is_err());
        assert!(TabulatedSchedule::read_csv("s,x1\n0,1\n1\n".as_bytes()).is_err());
    }
}
