use std::io::Write;
use std::path::Path;

use super::ExperimentResult;
use crate::error::HarnessError;

pub const CSV_HEADER: [&str; 6] = ["preset", "swept_param", "swept_value", "replication", "metric", "value"];

/// Formats with nine significant digits, `%.9g` style: fixed notation for
/// decimal exponents in [-5, 9), scientific otherwise, trailing zeros dropped.
pub fn format_sig9(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    // Rounding to nine digits first fixes the exponent (9.9999999995 → 1e1).
    let sci = format!("{value:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{value:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Writes the result as CSV to any sink. Returns the number of bytes.
pub fn write_csv<W: Write>(result: &ExperimentResult, sink: W) -> Result<usize, HarnessError> {
    let mut counter = CountingWriter { inner: sink, bytes: 0 };
    {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut counter);
        writer.write_record(CSV_HEADER)?;
        for row in &result.rows {
            writer.write_record([
                result.preset.as_str(),
                result.swept_param.as_str(),
                &format_sig9(row.swept_value),
                &row.replication.to_string(),
                row.metric.as_str(),
                &format_sig9(row.value),
            ])?;
        }
        writer.flush().map_err(csv::Error::from)?;
    }
    Ok(counter.bytes)
}

/// Writes the result to `destination`. Returns the number of bytes written.
pub fn emit_csv(result: &ExperimentResult, destination: &Path) -> Result<usize, HarnessError> {
    let io_err = |source| HarnessError::Io {
        path: destination.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(destination).map_err(io_err)?;
    let mut buffered = std::io::BufWriter::new(file);
    let bytes = write_csv(result, &mut buffered)?;
    buffered.flush().map_err(io_err)?;
    Ok(bytes)
}

struct CountingWriter<W> {
    inner: W,
    bytes: usize,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.bytes += n;
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Row;

    fn result(rows: Vec<Row>) -> ExperimentResult {
        ExperimentResult::new("custom".into(), "users".into(), rows)
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(100.0), "100");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(2.0 / 3.0 * 1e5), "66666.6667");
        assert_eq!(format_sig9(123456789.0), "123456789");
        assert_eq!(format_sig9(1234567890.0), "1.23456789e9");
        assert_eq!(format_sig9(-4.0e-12), "-4e-12");
        assert_eq!(format_sig9(0.000123456789123), "0.000123456789");
        assert_eq!(format_sig9(9.9999999996), "10");
        assert_eq!(format_sig9(0.367879441171442), "0.367879441");
    }

    #[test]
    fn empty_result_is_header_only() {
        let mut buf = Vec::new();
        let n = write_csv(&result(vec![]), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "preset,swept_param,swept_value,replication,metric,value\n");
        assert_eq!(n, text.len());
        assert_eq!(n, 56);
    }

    #[test]
    fn single_row_round_trips_through_a_csv_reader() {
        let rows = vec![Row {
            swept_value: 0.5,
            replication: 3,
            metric: "admitted_fraction_proposed".into(),
            value: 200.0 / 3.0,
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.csv");
        let n = emit_csv(&result(rows), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(n, text.len());
        assert_eq!(text.lines().count(), 2);
        let mut reader = csv::Reader::from_path(&path).unwrap();
        let record = reader.records().next().unwrap().unwrap();
        assert_eq!(&record[0], "custom");
        assert_eq!(&record[2], "0.5");
        assert_eq!(&record[3], "3");
        assert_eq!(&record[5], "66.6666667");
    }

    #[test]
    fn unwritable_destination_reports_path() {
        let err = emit_csv(&result(vec![]), Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
