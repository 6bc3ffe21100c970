//! Text and JSON formats for matrices, tuples and pinch chains.
//!
//! Matrix text: first line `m`, then `m` lines of `m` whitespace-separated
//! decimals. Matrix JSON: `{"rows": m, "data": [[...], ...]}`.
//! Tuple text: whitespace-separated positive decimals. Tuple JSON:
//! `{"values": [...]}`. Inputs starting with `{` are read as JSON.
//!
//! Floats are written with 17 significant digits.

use std::io;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::pinch::{PinchChain, PositiveTuple};
use crate::spd::{validate_spd, SpdMatrix};

fn parse_f64(tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Parse(format!("invalid number {tok:?}")))
}

/// `{:.16e}`: 17 significant digits, always enough to round-trip an `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Deserialize)]
struct MatrixJson {
    rows: usize,
    data: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
struct TupleJson {
    values: Vec<f64>,
}

fn looks_like_json(s: &str) -> bool {
    s.trim_start().starts_with('{')
}

/// Parses a square matrix without validating definiteness.
pub fn parse_matrix(s: &str) -> Result<DMatrix<f64>> {
    if looks_like_json(s) {
        let parsed: MatrixJson =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if parsed.data.len() != parsed.rows {
            return Err(Error::Parse(format!(
                "declared {} rows, found {}",
                parsed.rows,
                parsed.data.len()
            )));
        }
        return rows_to_matrix(parsed.rows, &parsed.data);
    }
    let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty input".into()))?;
    let m: usize = header
        .parse()
        .map_err(|_| Error::Parse(format!("invalid dimension line {header:?}")))?;
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split_whitespace().map(parse_f64).collect())
        .collect::<Result<_>>()?;
    if rows.len() != m {
        return Err(Error::Parse(format!("expected {m} rows, found {}", rows.len())));
    }
    rows_to_matrix(m, &rows)
}

fn rows_to_matrix(m: usize, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if m == 0 {
        return Err(Error::Empty);
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != m {
            return Err(Error::Parse(format!(
                "row {} has {} entries, expected {m}",
                i + 1,
                r.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
}

pub fn parse_spd(s: &str) -> Result<SpdMatrix> {
    validate_spd(parse_matrix(s)?)
}

pub fn format_matrix_text(m: &DMatrix<f64>) -> String {
    let mut out = format!("{}\n", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|&v| format_f64(v)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn matrix_to_json(m: &DMatrix<f64>) -> Value {
    let data: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect();
    json!({ "rows": m.nrows(), "data": data })
}

pub fn parse_tuple(s: &str) -> Result<PositiveTuple> {
    let values = if looks_like_json(s) {
        let parsed: TupleJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        parsed.values
    } else {
        s.split_whitespace().map(parse_f64).collect::<Result<Vec<_>>>()?
    };
    PositiveTuple::new(values)
}

pub fn format_tuple_text(t: &PositiveTuple) -> String {
    let v: Vec<String> = t.values().iter().map(|&x| format_f64(x)).collect();
    format!("{}\n", v.join(" "))
}

#[derive(Debug, Serialize)]
struct StepJson {
    i: usize,
    j: usize,
    t: f64,
    kind: crate::pinch::PinchKind,
}

/// Chain JSON with 1-based coordinate indices.
pub fn chain_to_json(chain: &PinchChain) -> Value {
    let steps: Vec<StepJson> = chain
        .steps
        .iter()
        .map(|s| StepJson {
            i: s.i + 1,
            j: s.j + 1,
            t: s.t,
            kind: s.kind,
        })
        .collect();
    json!({
        "source": chain.source.values(),
        "target": chain.target.values(),
        "steps": steps,
    })
}

/// Pretty JSON formatter writing every float with 17 significant digits.
pub struct SigDigitsFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for SigDigitsFormatter<'_> {
    fn default() -> Self {
        SigDigitsFormatter {
            inner: PrettyFormatter::new(),
        }
    }
}

impl Formatter for SigDigitsFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(format_f64(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serializes `value` as pretty JSON with 17-significant-digit floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigitsFormatter::default());
    value
        .serialize(&mut ser)
        .expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pinch::build_pinch_chain;
    use proptest::prelude::*;

    #[test]
    fn text_matrix() {
        let m = parse_matrix("2\n12.9638 8.0820\n8.0820 10.9249\n").unwrap();
        assert_eq!(m[(0, 1)], 8.0820);
        assert_eq!(m[(1, 1)], 10.9249);
        assert!(parse_spd("2\n1 0\n0 -1\n").is_err());
        assert!(matches!(parse_matrix("2\n1 2\n3\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("3\n1 0 0\n0 1 0\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("x\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix(""), Err(Error::Parse(_))));
    }

    #[test]
    fn json_matrix() {
        let m = parse_matrix(r#"{"rows": 2, "data": [[2, 1], [1, 2]]}"#).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]));
        assert!(parse_matrix(r#"{"rows": 3, "data": [[2, 1], [1, 2]]}"#).is_err());
        let v = matrix_to_json(&m);
        assert_eq!(v["rows"], 2);
    }

    #[test]
    fn tuples() {
        assert_eq!(parse_tuple("4 1\n").unwrap().values(), &[4.0, 1.0]);
        assert_eq!(parse_tuple(r#"{"values": [8, 2, 1]}"#).unwrap().values(), &[8.0, 2.0, 1.0]);
        assert!(matches!(parse_tuple("1 -2"), Err(Error::NonpositiveEntry(_))));
        assert!(matches!(parse_tuple("1 a"), Err(Error::Parse(_))));
    }

    #[test]
    fn chain_json_is_one_based() {
        let a = PositiveTuple::new(vec![4.0, 1.0]).unwrap();
        let b = PositiveTuple::new(vec![2.0, 2.0]).unwrap();
        let v = chain_to_json(&build_pinch_chain(&a, &b).unwrap());
        assert_eq!(v["steps"][0]["i"], 1);
        assert_eq!(v["steps"][0]["j"], 2);
        assert_eq!(v["steps"][0]["kind"], "multiplicative");
    }

    #[test]
    fn seventeen_digit_output() {
        let s = to_json_string(&json!({ "x": 0.1, "y": [1.0, f64::NAN] }));
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("null"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), 0.1);
    }

    proptest! {
        #[test]
        fn matrix_text_round_trip(vals in prop::collection::vec(-1e6f64..1e6, 9)) {
            let m = DMatrix::from_row_slice(3, 3, &vals);
            let back = parse_matrix(&format_matrix_text(&m)).unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn tuple_round_trip(vals in prop::collection::vec(1e-8f64..1e8, 1..12)) {
            let t = PositiveTuple::new(vals).unwrap();
            prop_assert_eq!(parse_tuple(&format_tuple_text(&t)).unwrap(), t);
        }

        #[test]
        fn json_float_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            let s = to_json_string(&json!([v]));
            let back: Vec<f64> = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back[0], v);
        }
    }
}
