//! CSV serialization of convergence tables.
//!
//! Schema: `h,eps,E1,eoc1,E2,eoc2,E3,eoc3,E4,eoc4`. Reals are written as
//! `d.ddde±XX`, orders with two decimals, and the first row's orders as `-`.

use phasefield::analysis::{ConvergenceRow, ConvergenceTable};
use thiserror::Error;

pub const HEADER: &str = "h,eps,E1,eoc1,E2,eoc2,E3,eoc3,E4,eoc4";

#[derive(Debug, Error, PartialEq)]
pub enum CsvError {
    #[error("expected header `{HEADER}`")]
    Header,
    #[error("line {line}: {reason}")]
    Row { line: usize, reason: String },
}

/// Scientific notation with three fractional digits and a signed two-digit exponent.
pub fn format_sci(x: f64) -> String {
    let s = format!("{x:.3e}");
    let (mantissa, exponent) = s.split_once('e').expect("LowerExp output has an exponent");
    let exponent: i32 = exponent.parse().expect("LowerExp exponent is an integer");
    let sign = if exponent < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exponent.abs())
}

pub fn format_eoc(x: f64) -> String {
    format!("{x:.2}")
}

pub fn write_csv(table: &ConvergenceTable) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for row in &table.rows {
        out.push_str(&format_sci(row.h));
        out.push(',');
        out.push_str(&format_sci(row.epsilon));
        for j in 0..4 {
            out.push(',');
            out.push_str(&format_sci(row.errors[j]));
            out.push(',');
            match row.eocs {
                Some(e) => out.push_str(&format_eoc(e[j])),
                None => out.push('-'),
            }
        }
        out.push('\n');
    }
    out
}

/// Parse rows written by [`write_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<ConvergenceRow>, CsvError> {
    let mut lines = text.lines();
    if lines.next() != Some(HEADER) {
        return Err(CsvError::Header);
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let fail = |reason: String| CsvError::Row {
            line: line_no,
            reason,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(fail(format!("expected 10 fields, found {}", fields.len())));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| fail(format!("`{s}` is not a number")))
        };
        let mut errors = [0.0; 4];
        let mut eocs = [0.0; 4];
        let mut dashes = 0;
        for j in 0..4 {
            errors[j] = num(fields[2 + 2 * j])?;
            match fields[3 + 2 * j] {
                "-" => dashes += 1,
                s => eocs[j] = num(s)?,
            }
        }
        let eocs = match dashes {
            0 => Some(eocs),
            4 => None,
            _ => return Err(fail("eoc columns must be all numbers or all `-`".into())),
        };
        rows.push(ConvergenceRow {
            h: num(fields[0])?,
            epsilon: num(fields[1])?,
            errors,
            eocs,
        });
    }
    Ok(rows)
}
