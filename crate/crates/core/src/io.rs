//! Plain-text matrix format.
//!
//! Line 1 is a header `rows cols field` with field `real` or `complex`;
//! the next `rows` lines carry `cols` entries each, one number per entry in
//! the real case and two (`re im`) in the complex case. Lines starting with
//! `#` are comments and blank lines are skipped. Numbers are written with
//! the shortest representation that parses back to the identical value.

use crate::error::{Error, Result};
use crate::numkern::{C64, DenseMatrix};

/// Scalar field tag in the header line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumberField {
    Real,
    Complex,
}

/// Formats one value with round-trip fidelity, using exponent notation only
/// where positional notation would be unwieldy.
fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && (a < 1e-4 || a >= 1e16) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Serializes a matrix, choosing the `real` field exactly when every entry
/// has zero imaginary part.
pub fn format_matrix(m: &DenseMatrix) -> String {
    let field = if m.is_real() {
        NumberField::Real
    } else {
        NumberField::Complex
    };
    format_matrix_as(m, field).expect("field chosen to fit the data")
}

/// Serializes with an explicit field tag; requesting `real` for a matrix
/// with nonzero imaginary parts is an error.
pub fn format_matrix_as(m: &DenseMatrix, field: NumberField) -> Result<String> {
    if field == NumberField::Real && !m.is_real() {
        return Err(Error::Contract(
            "cannot format a complex-valued matrix with the real field".into(),
        ));
    }
    let mut out = String::new();
    let tag = match field {
        NumberField::Real => "real",
        NumberField::Complex => "complex",
    };
    out.push_str(&format!("{} {} {}\n", m.rows(), m.cols(), tag));
    for i in 0..m.rows() {
        let mut parts = Vec::with_capacity(m.cols() * 2);
        for j in 0..m.cols() {
            let z = m.entry(i, j);
            match field {
                NumberField::Real => parts.push(fmt_f64(z.re)),
                NumberField::Complex => {
                    parts.push(fmt_f64(z.re));
                    parts.push(fmt_f64(z.im));
                }
            }
        }
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    Ok(out)
}

fn parse_number(token: &str, line: usize) -> Result<f64> {
    let value: f64 = token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid number {token:?}"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value {token:?}"),
        });
    }
    Ok(value)
}

/// Parses the text format; errors carry 1-based line numbers.
pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header line `rows cols field`".into(),
    })?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::Parse {
            line: header_line,
            message: format!("expected header `rows cols field`, got {header:?}"),
        });
    }
    let rows: usize = parts[0].parse().map_err(|_| Error::Parse {
        line: header_line,
        message: format!("invalid row count {:?}", parts[0]),
    })?;
    let cols: usize = parts[1].parse().map_err(|_| Error::Parse {
        line: header_line,
        message: format!("invalid column count {:?}", parts[1]),
    })?;
    let field = match parts[2] {
        "real" => NumberField::Real,
        "complex" => NumberField::Complex,
        other => {
            return Err(Error::Parse {
                line: header_line,
                message: format!("field must be `real` or `complex`, got {other:?}"),
            })
        }
    };
    if rows == 0 || cols == 0 {
        return Err(Error::Parse {
            line: header_line,
            message: "rows and cols must be at least 1".into(),
        });
    }

    let per_entry = match field {
        NumberField::Real => 1,
        NumberField::Complex => 2,
    };
    let mut entries: Vec<C64> = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let (line_no, line) = lines.next().ok_or(Error::Parse {
            line: header_line,
            message: format!("expected {rows} data rows, found {r}"),
        })?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != cols * per_entry {
            return Err(Error::Parse {
                line: line_no,
                message: format!(
                    "expected {} numbers on this row, found {}",
                    cols * per_entry,
                    tokens.len()
                ),
            });
        }
        for chunk in tokens.chunks(per_entry) {
            let re = parse_number(chunk[0], line_no)?;
            let im = if per_entry == 2 {
                parse_number(chunk[1], line_no)?
            } else {
                0.0
            };
            entries.push(C64::new(re, im));
        }
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(Error::Parse {
            line: line_no,
            message: "unexpected content after the last data row".into(),
        });
    }
    DenseMatrix::new(rows, cols, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_real_matrix() {
        let m = DenseMatrix::from_real(2, 3, &[1.0, -0.5, 3.25, 0.0, 1e-7, 12345.678]).unwrap();
        let text = format_matrix(&m);
        assert!(text.starts_with("2 3 real\n"));
        let back = parse_matrix(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn round_trips_complex_matrix() {
        let m = DenseMatrix::new(
            1,
            2,
            vec![C64::new(0.1, -2.0), C64::new(3.0, 4.0e-19)],
        )
        .unwrap();
        let text = format_matrix(&m);
        assert!(text.starts_with("1 2 complex\n"));
        let back = parse_matrix(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let text = "# a comment\n\n2 2 real\n# rows follow\n1 2\n\n3 4\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m.entry(1, 0), C64::new(3.0, 0.0));
    }

    #[test]
    fn reports_line_numbers() {
        let text = "2 2 real\n1 2\n3 oops\n";
        match parse_matrix(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("oops"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_entry_count() {
        let text = "1 3 real\n1 2\n";
        match parse_matrix(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_trailing_rows() {
        let text = "1 1 real\n1\n2\n";
        assert!(matches!(parse_matrix(text), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn rejects_real_format_for_complex_data() {
        let m = DenseMatrix::new(1, 1, vec![C64::new(0.0, 1.0)]).unwrap();
        assert!(format_matrix_as(&m, NumberField::Real).is_err());
    }
}
