//! Keystroke timing CSV: `subject,sessionIndex,rep` followed by the 31
//! hold (`H.`), down-down (`DD.`) and up-down (`UD.`) timings of the fixed
//! password phrase.

use super::{IngestError, KeystrokeSample};

pub const KEYSTROKE_FEATURE_COUNT: usize = 31;

pub const KEYSTROKE_FEATURE_NAMES: [&str; KEYSTROKE_FEATURE_COUNT] = [
    "H.period",
    "DD.period.t",
    "UD.period.t",
    "H.t",
    "DD.t.i",
    "UD.t.i",
    "H.i",
    "DD.i.e",
    "UD.i.e",
    "H.e",
    "DD.e.five",
    "UD.e.five",
    "H.five",
    "DD.five.Shift.r",
    "UD.five.Shift.r",
    "H.Shift.r",
    "DD.Shift.r.o",
    "UD.Shift.r.o",
    "H.o",
    "DD.o.a",
    "UD.o.a",
    "H.a",
    "DD.a.n",
    "UD.a.n",
    "H.n",
    "DD.n.l",
    "UD.n.l",
    "H.l",
    "DD.l.Return",
    "UD.l.Return",
    "H.Return",
];

const ID_COLUMNS: usize = 3;

fn csv_err(e: csv::Error) -> IngestError {
    IngestError::Csv(e.to_string())
}

/// Parses a keystroke CSV into one sample per data row, in file order.
///
/// Up-down latencies (columns whose header starts with `UD`) may be negative
/// when keys overlap; every other timing must be non-negative.
pub fn parse_keystroke_csv(text: &str) -> Result<Vec<KeystrokeSample>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let expected = ID_COLUMNS + KEYSTROKE_FEATURE_COUNT;
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() != expected {
        return Err(IngestError::ColumnCountError {
            row: 0,
            expected,
            found: header.len(),
        });
    }

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(csv_err)?;
        if record.len() != expected {
            return Err(IngestError::ColumnCountError {
                row,
                expected,
                found: record.len(),
            });
        }
        let parse_id = |value: &str| {
            value.parse::<u32>().map_err(|_| IngestError::InvalidId {
                row,
                value: value.to_string(),
            })
        };
        let user_id = record[0].to_string();
        if user_id.is_empty() {
            return Err(IngestError::InvalidId {
                row,
                value: user_id,
            });
        }
        let session_id = parse_id(&record[1])?;
        let rep = parse_id(&record[2])?;

        let mut features = Vec::with_capacity(KEYSTROKE_FEATURE_COUNT);
        for (column, value) in header.iter().zip(record.iter()).skip(ID_COLUMNS) {
            let v: f64 = value.parse().map_err(|_| IngestError::NonNumericTiming {
                row,
                column: column.clone(),
                value: value.to_string(),
            })?;
            if !v.is_finite() || (v < 0.0 && !column.starts_with("UD")) {
                return Err(IngestError::InvalidTiming {
                    row,
                    column: column.clone(),
                    value: v,
                });
            }
            features.push(v);
        }
        samples.push(KeystrokeSample {
            user_id,
            session_id,
            rep,
            features,
        });
    }
    Ok(samples)
}

/// Writes samples with the standard column names.
pub fn render_keystroke_csv(samples: &[KeystrokeSample]) -> Result<String, IngestError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["subject", "sessionIndex", "rep"];
    header.extend(KEYSTROKE_FEATURE_NAMES);
    writer.write_record(&header).map_err(csv_err)?;
    for s in samples {
        if s.features.len() != KEYSTROKE_FEATURE_COUNT {
            return Err(IngestError::ColumnCountError {
                row: 0,
                expected: KEYSTROKE_FEATURE_COUNT,
                found: s.features.len(),
            });
        }
        let mut row = vec![
            s.user_id.clone(),
            s.session_id.to_string(),
            s.rep.to_string(),
        ];
        row.extend(s.features.iter().map(|v| v.to_string()));
        writer.write_record(&row).map_err(csv_err)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| IngestError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| IngestError::Csv(e.to_string()))
}
