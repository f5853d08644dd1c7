//! Output records and their human, JSON-lines and CSV renderings.

use std::io::{self, Write};

use serde_json::{Map, Value as Json};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    UInt(u64),
    Real(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::UInt(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::UInt(v as u64)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(i64::from(v))
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

impl Value {
    fn to_json(&self) -> Json {
        match self {
            Value::Int(i) => Json::from(*i),
            Value::UInt(u) => Json::from(*u),
            Value::Real(r) => serde_json::Number::from_f64(*r).map_or(Json::Null, Json::Number),
            Value::Text(s) => Json::from(s.as_str()),
            Value::Bool(b) => Json::from(*b),
        }
    }

    fn to_field(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::UInt(u) => u.to_string(),
            Value::Real(r) => format_g17(*r),
            Value::Text(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
        }
    }
}

/// A flat record: `schema_version`, `command`, then the payload fields in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub command: String,
    pub fields: Vec<(&'static str, Value)>,
}

impl Record {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            fields: Vec::new(),
        }
    }

    pub fn field(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.fields.push((key, value.into()));
        self
    }

    pub fn to_json_line(&self) -> String {
        let mut map = Map::new();
        map.insert("schema_version".into(), Json::from(SCHEMA_VERSION));
        map.insert("command".into(), Json::from(self.command.as_str()));
        for (k, v) in &self.fields {
            map.insert((*k).into(), v.to_json());
        }
        Json::Object(map).to_string()
    }

    pub fn csv_header(&self) -> String {
        self.fields
            .iter()
            .map(|(k, _)| *k)
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn csv_row(&self) -> String {
        self.fields
            .iter()
            .map(|(_, v)| csv_escape(&v.to_field()))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn write_human<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.fields {
            writeln!(out, "{k:<width$}  {}", v.to_field())?;
        }
        Ok(())
    }

    /// Single record in the given format.
    pub fn emit<W: Write>(&self, format: Format, out: &mut W) -> io::Result<()> {
        match format {
            Format::Json => writeln!(out, "{}", self.to_json_line()),
            Format::Csv => {
                writeln!(out, "{}", self.csv_header())?;
                writeln!(out, "{}", self.csv_row())
            }
            Format::Human => self.write_human(out),
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Rows sharing one set of columns, rendered as a table.
pub fn emit_table<W: Write>(rows: &[Record], format: Format, out: &mut W) -> io::Result<()> {
    match format {
        Format::Json => {
            for r in rows {
                writeln!(out, "{}", r.to_json_line())?;
            }
        }
        Format::Csv | Format::Human => {
            let Some(first) = rows.first() else {
                return Ok(());
            };
            if format == Format::Csv {
                writeln!(out, "{}", first.csv_header())?;
                for r in rows {
                    writeln!(out, "{}", r.csv_row())?;
                }
            } else {
                let cells: Vec<Vec<String>> = rows
                    .iter()
                    .map(|r| r.fields.iter().map(|(_, v)| v.to_field()).collect())
                    .collect();
                let widths: Vec<usize> = first
                    .fields
                    .iter()
                    .enumerate()
                    .map(|(c, (k, _))| {
                        cells
                            .iter()
                            .map(|row| row[c].len())
                            .max()
                            .unwrap_or(0)
                            .max(k.len())
                    })
                    .collect();
                let header: Vec<String> = first
                    .fields
                    .iter()
                    .zip(&widths)
                    .map(|((k, _), w)| format!("{k:>w$}"))
                    .collect();
                writeln!(out, "{}", header.join("  "))?;
                for row in &cells {
                    let line: Vec<String> = row
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:>w$}"))
                        .collect();
                    writeln!(out, "{}", line.join("  "))?;
                }
            }
        }
    }
    Ok(())
}

/// C `%.17g`: 17 significant digits, fixed notation for decimal exponents in
/// `[-4, 17)`, trailing zeros removed. Independent of locale.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_owned()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_c_printf() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.10000000000000001"),
            (1.5957691216057308, "1.5957691216057308"),
            (-2.5, "-2.5"),
            (1e-5, "1.0000000000000001e-05"),
            (1.25e-4, "0.000125"),
            (123456789012345680.0, "1.2345678901234568e+17"),
            (1e100, "1e+100"),
            (std::f64::consts::E, "2.7182818284590451"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g17(x), want, "{x}");
        }
    }

    #[test]
    fn g17_round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.6908801791904327, 1e-300, 6.02e23, -7.5e-7] {
            assert_eq!(format_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_record_is_flat() {
        let r = Record::new("bounds")
            .field("t", 2u32)
            .field("bar_x", 2.5)
            .field("ok", true);
        let v: Json = serde_json::from_str(&r.to_json_line()).unwrap();
        assert_eq!(v["schema_version"], "1");
        assert_eq!(v["command"], "bounds");
        assert_eq!(v["t"], 2);
        assert_eq!(v["bar_x"], 2.5);
        assert_eq!(v["ok"], true);
    }

    #[test]
    fn csv_rendering() {
        let r = Record::new("scan").field("x", 0.5).field("label", "a,b");
        assert_eq!(r.csv_header(), "x,label");
        assert_eq!(r.csv_row(), "0.5,\"a,b\"");
    }
}
