//! File formats: count-table CSV (`label,count` header), sample files (one
//! label per line, UTF-8), and distribution JSON
//! (`{"support": [...], "probs": [...]}`).

use std::io::{BufRead, Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::pmf::{CountTable, ProbabilityVector, Support};
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct DistributionDoc {
    support: Vec<String>,
    probs: Vec<f64>,
}

/// Reads a distribution JSON document.
pub fn read_distribution_json<R: Read>(reader: R) -> Result<ProbabilityVector> {
    let doc: DistributionDoc = serde_json::from_reader(reader)?;
    let support = Arc::new(Support::new(doc.support)?);
    ProbabilityVector::new(support, doc.probs)
}

pub fn read_distribution_json_path(path: &Path) -> Result<ProbabilityVector> {
    read_distribution_json(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// Writes a distribution JSON document.
pub fn write_distribution_json<W: Write>(v: &ProbabilityVector, mut writer: W) -> Result<()> {
    let doc = DistributionDoc {
        support: v.support().labels().to_vec(),
        probs: v.probs().to_vec(),
    };
    serde_json::to_writer_pretty(&mut writer, &doc)?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Reads a count-table CSV with header `label,count`; the row order fixes
/// the support ordering.
pub fn read_count_csv<R: Read>(reader: R) -> Result<CountTable> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    {
        let headers = csv_reader.headers()?;
        if headers.len() != 2 || &headers[0] != "label" || &headers[1] != "count" {
            return Err(Error::Parse(format!(
                "count CSV must start with the header \"label,count\", got \"{}\"",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
    }
    let mut labels = Vec::new();
    let mut counts = Vec::new();
    for record in csv_reader.records() {
        let record = record?;
        if record.len() != 2 {
            return Err(Error::Parse(format!(
                "count CSV row has {} fields, expected 2",
                record.len()
            )));
        }
        labels.push(record[0].to_string());
        counts.push(record[1].trim().parse::<u64>().map_err(|_| {
            Error::Parse(format!(
                "count for label \"{}\" is not a nonnegative integer: \"{}\"",
                &record[0], &record[1]
            ))
        })?);
    }
    let support = Arc::new(Support::new(labels)?);
    CountTable::new(support, counts)
}

pub fn read_count_csv_path(path: &Path) -> Result<CountTable> {
    read_count_csv(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// Writes a count table as CSV with header `label,count`.
pub fn write_count_csv<W: Write>(table: &CountTable, writer: W) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(["label", "count"])?;
    for (label, count) in table.support().labels().iter().zip(table.counts()) {
        csv_writer.write_record([label.as_str(), &count.to_string()])?;
    }
    csv_writer.flush()?;
    Ok(())
}

/// Reads a sample file: one label per line, blank lines ignored.
pub fn read_sample_lines<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut labels = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if !trimmed.is_empty() {
            labels.push(trimmed.to_string());
        }
    }
    Ok(labels)
}

pub fn read_sample_lines_path(path: &Path) -> Result<Vec<String>> {
    read_sample_lines(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_json_round_trip() {
        let json = r#"{"support": ["c1", "c2", "c3"], "probs": [0.4, 0.25, 0.35]}"#;
        let v = read_distribution_json(json.as_bytes()).unwrap();
        assert_eq!(v.support().labels(), ["c1", "c2", "c3"]);
        assert_eq!(v.probs(), &[0.4, 0.25, 0.35]);

        let mut bytes = Vec::new();
        write_distribution_json(&v, &mut bytes).unwrap();
        let back = read_distribution_json(bytes.as_slice()).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn distribution_json_rejects_bad_simplex() {
        let json = r#"{"support": ["c1", "c2"], "probs": [0.4, 0.4]}"#;
        assert!(read_distribution_json(json.as_bytes()).is_err());
        let json = r#"{"support": ["c1", "c2"], "probs": [0.4]}"#;
        assert!(read_distribution_json(json.as_bytes()).is_err());
    }

    #[test]
    fn count_csv_round_trip() {
        let csv = "label,count\nc1,4\nc2,0\nc3,6\n";
        let table = read_count_csv(csv.as_bytes()).unwrap();
        assert_eq!(table.counts(), &[4, 0, 6]);
        assert_eq!(table.total(), 10);

        let mut bytes = Vec::new();
        write_count_csv(&table, &mut bytes).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), csv);
    }

    #[test]
    fn count_csv_rejects_bad_input() {
        assert!(read_count_csv("frequency,count\nc1,4\n".as_bytes()).is_err());
        assert!(read_count_csv("label,count\nc1,-2\n".as_bytes()).is_err());
        assert!(read_count_csv("label,count\nc1,two\n".as_bytes()).is_err());
        assert!(read_count_csv("label,count\nc1,1\nc1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn sample_lines_skip_blanks() {
        let text = "c1\nc2\n\n  c1  \n";
        let labels = read_sample_lines(text.as_bytes()).unwrap();
        assert_eq!(labels, ["c1", "c2", "c1"]);
    }
}
