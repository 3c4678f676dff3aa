//! Matrix documents (JSON, Matrix Market) and deterministic JSON output.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{OpError, Result};
use crate::kernel::{c64, ComplexMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Json,
    MatrixMarket,
}

impl MatrixFormat {
    /// `.mtx` files are Matrix Market, anything else JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("mtx") => MatrixFormat::MatrixMarket,
            _ => MatrixFormat::Json,
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = OpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(MatrixFormat::Json),
            "mtx" | "matrix_market" => Ok(MatrixFormat::MatrixMarket),
            _ => Err(OpError::InvalidArgument(format!("unknown matrix format `{s}`"))),
        }
    }
}

/// A matrix entry. Reads `[re, im]` pairs or a bare real, where each part is
/// a JSON number or a string holding a decimal (`"-0.25"`, `"1e-3"`) or a
/// fraction of decimals (`"1/3"`). Writes `[re, im]` as shortest round-trip
/// decimal strings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry(pub C64);

/// Parses a decimal or `a/b`; integer and finite-binary inputs are exact.
pub fn parse_scalar(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let one = |t: &str| -> std::result::Result<f64, String> {
        let t = t.trim();
        let ok = !t.is_empty()
            && t.chars().all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'))
            && t.chars().any(|c| c.is_ascii_digit());
        let v: f64 = if ok { t.parse().map_err(|_| format!("invalid number `{t}`"))? } else {
            return Err(format!("invalid number `{t}`"));
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("number `{t}` out of range"))
        }
    };
    match s.split_once('/') {
        None => one(s),
        Some((a, b)) => {
            let (a, b) = (one(a)?, one(b)?);
            if b == 0.0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            Ok(a / b)
        }
    }
}

struct Scalar(f64);

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Scalar;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a decimal / fraction string")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Scalar, E> {
                Ok(Scalar(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Scalar, E> {
                Ok(Scalar(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Scalar, E> {
                Ok(Scalar(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Scalar, E> {
                parse_scalar(v).map(Scalar).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Entry;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an entry [re, im] or a real number")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Entry, A::Error> {
                let re: Scalar = seq.next_element()?.ok_or_else(|| de::Error::custom("entry pair is empty"))?;
                let im: Scalar = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::custom("entry pair needs an imaginary part"))?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::custom("entry pair has more than two parts"));
                }
                Ok(Entry(c64(re.0, im.0)))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Entry, E> {
                Ok(Entry(c64(v, 0.0)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Entry, E> {
                Ok(Entry(c64(v as f64, 0.0)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Entry, E> {
                Ok(Entry(c64(v as f64, 0.0)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Entry, E> {
                parse_scalar(v).map(|x| Entry(c64(x, 0.0))).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&decimal(self.0.re))?;
        t.serialize_element(&decimal(self.0.im))?;
        t.end()
    }
}

/// Shortest round-trip decimal, in exponent form for very large or small magnitudes.
fn decimal(x: f64) -> String {
    if x == 0.0 || (1e-5..1e16).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// Claimed value of a property in a matrix document: a boolean for yes/no
/// properties, or an exact complex symmetry verdict kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Claim {
    Holds(bool),
    Verdict(crate::symmetry::VerdictKind),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    #[serde(default)]
    pub name: String,
    pub n: usize,
    /// Row-major.
    pub entries: Vec<Entry>,
    /// Property name (with optional `sq.` / `al.` / `du.` prefix) → claim.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expected: BTreeMap<String, Claim>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl MatrixDocument {
    pub fn from_matrix(name: &str, m: &ComplexMatrix) -> Self {
        Self {
            name: name.to_string(),
            n: m.n(),
            entries: m.entries().iter().map(|&z| Entry(z)).collect(),
            expected: BTreeMap::new(),
            provenance: None,
        }
    }

    pub fn matrix(&self) -> Result<ComplexMatrix> {
        ComplexMatrix::new(self.n, self.entries.iter().map(|e| e.0).collect())
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// Byte offset to 1-based line and column.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.chars().count(), |k| before[k + 1..].chars().count()) + 1;
    (line, column)
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> OpError {
    OpError::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn json_error(e: serde_json::Error) -> OpError {
    parse_error(e.line(), e.column(), e.to_string())
}

/// Reads a JSON matrix document, or a bare array of `n²` row-major entries.
pub fn parse_document(text: &str) -> Result<MatrixDocument> {
    let doc = if text.trim_start().starts_with('[') {
        let entries: Vec<Entry> = serde_json::from_str(text).map_err(json_error)?;
        let n = (entries.len() as f64).sqrt().round() as usize;
        if n * n != entries.len() || n == 0 {
            return Err(parse_error(1, 1, format!("{} entries do not form a square matrix", entries.len())));
        }
        MatrixDocument {
            name: String::new(),
            n,
            entries,
            expected: BTreeMap::new(),
            provenance: None,
        }
    } else {
        serde_json::from_str::<MatrixDocument>(text).map_err(json_error)?
    };
    if doc.entries.len() != doc.n * doc.n {
        let (line, column) = text.find("\"entries\"").map_or((1, 1), |k| position(text, k));
        return Err(parse_error(
            line,
            column,
            format!("expected {} entries for n = {}, found {}", doc.n * doc.n, doc.n, doc.entries.len()),
        ));
    }
    doc.matrix()?;
    Ok(doc)
}

/// Matrix Market `array` format, `complex`, `real` or `integer` field,
/// `general` symmetry, square. Entries are column-major.
pub fn parse_matrix_market(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (hl, header) = lines.next().ok_or_else(|| parse_error(1, 1, "empty input"))?;
    let words: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_error(hl, 1, "missing %%MatrixMarket header"));
    }
    if words.len() != 5 || words[1] != "matrix" || words[2] != "array" || words[4] != "general" {
        return Err(parse_error(hl, 1, "only `matrix array <field> general` is supported"));
    }
    let complex = match words[3].as_str() {
        "complex" => true,
        "real" | "integer" => false,
        f => return Err(parse_error(hl, 1, format!("unsupported field `{f}`"))),
    };
    let mut data = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));

    let (sl, size) = data.next().ok_or_else(|| parse_error(hl + 1, 1, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let dim = |k: usize| -> Result<usize> {
        dims.get(k)
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| parse_error(sl, 1, "size line must be `rows cols`"))
    };
    let (rows, cols) = (dim(0)?, dim(1)?);
    if dims.len() != 2 {
        return Err(parse_error(sl, 1, "size line must be `rows cols`"));
    }
    if rows != cols {
        return Err(OpError::DimensionMismatch { left: rows, right: cols });
    }
    let n = rows;
    let mut col_major = Vec::with_capacity(n * n);
    for (ln, line) in data {
        let mut parts = Vec::new();
        let mut offset = 0;
        for tok in line.split_whitespace() {
            let at = line[offset..].find(tok).expect("token comes from line") + offset;
            offset = at + tok.len();
            let v = parse_scalar(tok).map_err(|m| parse_error(ln, at + 1, m))?;
            parts.push(v);
        }
        let want = if complex { 2 } else { 1 };
        if parts.len() != want {
            return Err(parse_error(ln, 1, format!("expected {want} value(s), found {}", parts.len())));
        }
        if col_major.len() == n * n {
            return Err(parse_error(ln, 1, format!("more than {} entries", n * n)));
        }
        col_major.push(c64(parts[0], if complex { parts[1] } else { 0.0 }));
    }
    if col_major.len() != n * n {
        let last = text.lines().count().max(1);
        return Err(parse_error(last, 1, format!("expected {} entries, found {}", n * n, col_major.len())));
    }
    Ok(ComplexMatrix::from_fn(n, |i, j| col_major[j * n + i]))
}

pub fn parse_matrix(text: &str, format: MatrixFormat) -> Result<ComplexMatrix> {
    match format {
        MatrixFormat::Json => parse_document(text)?.matrix(),
        MatrixFormat::MatrixMarket => parse_matrix_market(text),
    }
}

pub fn write_matrix_market(m: &ComplexMatrix) -> String {
    let n = m.n();
    let mut s = format!("%%MatrixMarket matrix array complex general\n{n} {n}\n");
    for j in 0..n {
        for i in 0..n {
            let z = m.get(i, j);
            s.push_str(&format!("{} {}\n", z.re, z.im));
        }
    }
    s
}

/// Pretty printer that writes every float with 17 significant digits.
struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Deterministic pretty JSON; floats carry 17 significant digits, so every
/// `f64` survives a round trip exactly.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser).expect("in-memory JSON serialization cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(json_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_document_is_exact() {
        let text = r#"{
  "name": "example",
  "n": 3,
  "entries": [["-1","0"],["0","0"],["-1","0"],
              ["-1","0"],["0","0"],["1","0"],
              ["0","0"],["1","0"],["0","0"]]
}"#;
        let m = parse_matrix(text, MatrixFormat::Json).unwrap();
        let want = ComplexMatrix::from_real_rows(&[[-1.0, 0.0, -1.0], [-1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
        assert_eq!(m, want);
    }

    #[test]
    fn bare_pair_is_one_by_one_zero() {
        assert_eq!(parse_matrix("[[0,0]]", MatrixFormat::Json).unwrap(), ComplexMatrix::zeros(1));
    }

    #[test]
    fn scalars() {
        assert_eq!(parse_scalar("1/4"), Ok(0.25));
        assert_eq!(parse_scalar(" -3 "), Ok(-3.0));
        assert_eq!(parse_scalar("2.5e-1"), Ok(0.25));
        assert_eq!(parse_scalar("0.1"), Ok(0.1));
        for bad in ["", "1/0", "abc", "1//2", "inf", "nan", "1e999"] {
            assert!(parse_scalar(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn entry_count_error_has_position() {
        let text = "{\n  \"n\": 2,\n  \"entries\": [[1,0],[0,0],[0,0]]\n}";
        match parse_document(text) {
            Err(OpError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_entry_error_has_position() {
        let text = "{\"n\": 1,\n \"entries\": [[\"x\", 0]]}";
        match parse_document(text) {
            Err(OpError::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("invalid number"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn matrix_market_complex_is_column_major() {
        let text = "%%MatrixMarket matrix array complex general\n% note\n2 2\n1 0\n3 0\n2 -1\n4 0.5\n";
        let m = parse_matrix(text, MatrixFormat::MatrixMarket).unwrap();
        assert_eq!(m.get(0, 1), c64(2.0, -1.0));
        assert_eq!(m.get(1, 0), c64(3.0, 0.0));
        assert_eq!(parse_matrix_market(&write_matrix_market(&m)).unwrap(), m);
    }

    #[test]
    fn matrix_market_errors() {
        let e = parse_matrix_market("%%MatrixMarket matrix array complex general\n2 2\n1 0\n3 x\n").unwrap_err();
        assert!(matches!(e, OpError::Parse { line: 4, column: 3, .. }), "{e:?}");
        let e = parse_matrix_market("%%MatrixMarket matrix coordinate complex general\n").unwrap_err();
        assert!(matches!(e, OpError::Parse { line: 1, .. }));
        let e = parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n").unwrap_err();
        assert!(matches!(e, OpError::Parse { .. }));
    }

    #[test]
    fn floats_round_trip_with_fixed_digits() {
        let m = ComplexMatrix::from_fn(2, |i, j| c64(0.1 * (i as f64 + 1.0) / 3.0, -(j as f64) / 7.0));
        let s = to_json(&m);
        assert!(s.contains("3.3333333333333333e-2"), "{s}");
        let back: ComplexMatrix = from_json(&s).unwrap();
        assert_eq!(back, m);
        assert_eq!(to_json(&back), s);
    }

    #[test]
    fn document_round_trip() {
        let m = ComplexMatrix::from_fn(2, |i, j| c64(i as f64 / 3.0, (j as f64 - 0.5) * 1e-300));
        let mut doc = MatrixDocument::from_matrix("m", &m);
        doc.expected.insert("binormal".into(), Claim::Holds(true));
        doc.expected.insert("sq.cs".into(), Claim::Verdict(crate::symmetry::VerdictKind::CertifiedCs));
        let back = parse_document(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.matrix().unwrap(), m);
    }

    #[test]
    fn awkward_floats_round_trip_bit_exactly() {
        let values = [1e-10, 0.7601587509423253, 6.938893903907228e-18, f64::MIN_POSITIVE, 1.0 / 3.0, -2.5e300];
        for v in values {
            let back: f64 = from_json(&to_json(&v)).unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v:e}");
        }
    }
}
