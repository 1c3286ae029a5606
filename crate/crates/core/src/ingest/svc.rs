//! SVC-style pen text: a point count followed by one row per point,
//! `X Y T BUTTON` or `X Y T BUTTON AZIMUTH ALTITUDE PRESSURE`.

use std::fmt::Write as _;

use super::{IngestError, PenPoint, SampleLabel, SignatureSample};

/// Parses one SVC file. The returned sample carries an empty user id,
/// session 1 and the genuine label; loaders attach the real identity with
/// [`SignatureSample::with_identity`].
pub fn parse_svc(text: &str) -> Result<SignatureSample, IngestError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (_, header) = lines
        .next()
        .ok_or_else(|| IngestError::MalformedHeader(String::new()))?;
    let declared: usize = header
        .parse()
        .map_err(|_| IngestError::MalformedHeader(header.to_string()))?;

    let mut points = Vec::with_capacity(declared);
    for (line, row) in lines {
        let fields: Vec<&str> = row.split_whitespace().collect();
        if fields.len() != 4 && fields.len() != 7 {
            return Err(IngestError::RowArityError {
                line,
                found: fields.len(),
            });
        }
        let mut values = [0i64; 7];
        for (slot, field) in values.iter_mut().zip(&fields) {
            *slot = field.parse().map_err(|_| IngestError::NonIntegerField {
                line,
                field: field.to_string(),
            })?;
        }
        // azimuth and altitude (values[4], values[5]) are not used downstream
        points.push(PenPoint {
            x: values[0],
            y: values[1],
            t: values[2],
            pen_down: values[3] != 0,
            pressure: (fields.len() == 7).then_some(values[6]),
        });
    }

    if points.len() != declared {
        return Err(IngestError::CountMismatch {
            declared,
            found: points.len(),
        });
    }
    SignatureSample::new(points, "", 1, SampleLabel::Genuine)
}

/// Writes a sample in the form [`parse_svc`] reads. Samples with pressure use
/// the 7-column layout with zero azimuth and altitude.
pub fn render_svc(sample: &SignatureSample) -> String {
    let points = sample.points();
    let mut out = String::with_capacity(points.len() * 24);
    let _ = writeln!(out, "{}", points.len());
    for p in points {
        let button = u8::from(p.pen_down);
        match p.pressure {
            Some(pr) => {
                let _ = writeln!(out, "{} {} {} {} 0 0 {}", p.x, p.y, p.t, button, pr);
            }
            None => {
                let _ = writeln!(out, "{} {} {} {}", p.x, p.y, p.t, button);
            }
        }
    }
    out
}
