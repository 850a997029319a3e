//! Deterministic text rendering. Every float is written with 17 significant
//! digits, so equal results always produce identical bytes and a decimal
//! round-trip recovers the exact value.

use std::io;

use ndarray::Array2;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};
use serde_json::{Number, Value};

/// Renders a float with 17 significant digits in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Wraps a float as a JSON value. JSON numbers cannot carry non-finite
/// values, so those degrade to their string spelling.
pub fn jnum(v: f64) -> Value {
    Number::from_f64(v).map(Value::Number).unwrap_or_else(|| Value::String(num(v)))
}

/// An array of [`jnum`] values.
pub fn jvec(values: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(values.into_iter().map(jnum).collect())
}

/// A matrix as nested row arrays.
pub fn jmatrix(m: &Array2<f64>) -> Value {
    Value::Array(m.rows().into_iter().map(|row| jvec(row.iter().copied())).collect())
}

/// Pretty-prints a JSON value with [`num`] applied to every float, followed
/// by a trailing newline. Object keys serialize in sorted order.
pub fn to_json_text(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SciFormatter::new());
    value.serialize(&mut ser).expect("a json value always serializes");
    let mut text = String::from_utf8(buf).expect("the serializer writes utf-8");
    text.push('\n');
    text
}

/// A comma-separated table with [`num`]-rendered cells under a fixed header.
pub fn csv_table(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::with_capacity(rows.len() * 32);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| num(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// A header-less row-major matrix as CSV.
pub fn matrix_csv(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|&v| num(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// One-line machine-readable failure report.
pub fn error_json(kind: &str, message: &str, exit_code: u8) -> String {
    serde_json::json!({
        "error": { "kind": kind, "message": message, "exit_code": exit_code }
    })
    .to_string()
}

struct SciFormatter {
    inner: PrettyFormatter<'static>,
}

impl SciFormatter {
    fn new() -> Self {
        Self { inner: PrettyFormatter::new() }
    }
}

impl Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object_value(writer)
    }
}

#[cfg(test)]
mod tests {
    use ndarray::array;
    use serde_json::json;

    use super::*;

    #[test]
    fn floats_carry_seventeen_significant_digits() {
        assert_eq!(num(17.0 / 360.0), "4.7222222222222221e-2");
        assert_eq!(num(0.0), "0.0000000000000000e0");
        assert_eq!(num(-1.5), "-1.5000000000000000e0");
        let third: f64 = num(1.0 / 3.0).parse().expect("rendered floats parse back");
        assert_eq!(third, 1.0 / 3.0);
    }

    #[test]
    fn json_text_renders_floats_scientifically_and_integers_plainly() {
        let value = json!({ "b": 0.5, "a": 3, "c": [1.0, 2.5] });
        let text = to_json_text(&value);
        assert!(text.contains("5.0000000000000000e-1"));
        assert!(text.contains("\"a\": 3"));
        assert!(text.ends_with("}\n"));
        let index_a = text.find("\"a\"").expect("key a present");
        let index_b = text.find("\"b\"").expect("key b present");
        assert!(index_a < index_b, "keys serialize sorted");
        let back: Value = serde_json::from_str(&text).expect("output is valid json");
        assert_eq!(back["c"][1].as_f64(), Some(2.5));
    }

    #[test]
    fn tables_have_one_line_per_row() {
        let text = csv_table("p,rmse,crb", &[vec![0.5, 1.0, 2.0]]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "p,rmse,crb");
        assert_eq!(lines[1].split(',').count(), 3);

        let m = matrix_csv(&array![[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.lines().count(), 2);
    }

    #[test]
    fn non_finite_values_degrade_to_strings_in_json() {
        assert_eq!(jnum(f64::INFINITY), Value::String("inf".into()));
        assert_eq!(jnum(0.25), json!(0.25));
    }
}
