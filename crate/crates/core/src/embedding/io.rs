//! Whitespace-separated text format: a `<count> <dim>` header followed by one
//! `<token> <dim floats>` line per word. Paths ending in `.gz` are read and
//! written through gzip.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use ndarray::Array2;

use super::EmbeddingSet;
use crate::error::{Error, Result};

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

fn set_name(path: &Path) -> String {
    let mut p = path.to_path_buf();
    if is_gz(&p) {
        p.set_extension("");
    }
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "embedding".to_string())
}

/// Loads a text-format embedding file; the set is named after the file stem.
pub fn load_text(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let label = path.display().to_string();
    if is_gz(path) {
        read_text(BufReader::new(GzDecoder::new(file)), set_name(path), &label)
    } else {
        read_text(BufReader::new(file), set_name(path), &label)
    }
}

/// Parses the text format from any reader. `label` names the source in
/// error messages.
pub fn read_text<R: BufRead>(reader: R, name: impl Into<String>, label: &str) -> Result<EmbeddingSet> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::io(label, e))?,
        None => return Err(Error::parse(label, 1, "missing `<count> <dim>` header")),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (count, dim) = match fields.as_slice() {
        [c, d] => match (c.parse::<usize>(), d.parse::<usize>()) {
            (Ok(c), Ok(d)) if d > 0 => (c, d),
            _ => return Err(Error::parse(label, 1, format!("malformed header `{header}`"))),
        },
        _ => return Err(Error::parse(label, 1, format!("malformed header `{header}`"))),
    };

    let mut vocab = Vec::with_capacity(count);
    let mut flat = Vec::with_capacity(count * dim);
    let mut last_line = 1;
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(label, e))?;
        if line.trim().is_empty() {
            continue;
        }
        last_line = lineno;
        if vocab.len() == count {
            return Err(Error::parse(label, lineno, format!("more than {count} vectors")));
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().expect("non-empty line");
        let before = flat.len();
        for p in parts {
            let v: f64 = p
                .parse()
                .map_err(|_| Error::parse(label, lineno, format!("invalid number `{p}`")))?;
            if !v.is_finite() {
                return Err(Error::parse(label, lineno, format!("non-finite value `{p}`")));
            }
            flat.push(v);
        }
        let got = flat.len() - before;
        if got != dim {
            return Err(Error::parse(
                label,
                lineno,
                format!("expected {dim} values, found {got}"),
            ));
        }
        vocab.push(token.to_string());
    }
    if vocab.len() != count {
        return Err(Error::parse(
            label,
            last_line + 1,
            format!("header declares {count} vectors, found {}", vocab.len()),
        ));
    }
    let matrix = Array2::from_shape_vec((count, dim), flat).expect("shape checked while parsing");
    EmbeddingSet::new(name, vocab, matrix)
}

/// Shortest representation that parses back to the identical `f64`.
fn format_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_text<W: Write>(set: &EmbeddingSet, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {}", set.len(), set.dim())?;
    let mut line = String::new();
    for (w, row) in set.vocab().iter().zip(set.matrix().rows()) {
        line.clear();
        line.push_str(w);
        for &v in row {
            line.push(' ');
            line.push_str(&format_value(v));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()
}

/// Writes `set` so that [`load_text`] reproduces it exactly.
pub fn save_text(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let res = if is_gz(path) {
        let mut enc = GzEncoder::new(BufWriter::new(file), Compression::default());
        write_text(set, &mut enc).and_then(|_| enc.finish().map(|_| ()))
    } else {
        write_text(set, BufWriter::new(file))
    };
    res.map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<EmbeddingSet> {
        read_text(s.as_bytes(), "t", "mem")
    }

    #[test]
    fn minimal_file() {
        let set = parse("1 2\nfoo 0.0 1.0").unwrap();
        assert_eq!(set.vocab(), &["foo".to_string()]);
        assert_eq!(set.dim(), 2);
        assert_eq!(set.matrix(), &array![[0.0, 1.0]]);
    }

    #[test]
    fn writes_compact_numbers() {
        let set = EmbeddingSet::from_rows("t", [("foo", vec![0.0, 1.0])]).unwrap();
        let mut buf = Vec::new();
        write_text(&set, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1 2\nfoo 0 1\n");
    }

    #[test]
    fn empty_vocab_writes_header_only() {
        let set = EmbeddingSet::new("t", vec![], Array2::zeros((0, 7))).unwrap();
        let mut buf = Vec::new();
        write_text(&set, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 7\n");
        assert_eq!(parse("0 7\n").unwrap().dim(), 7);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert!(matches!(parse("two 2\na 1 2"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse("2 2\na 1 2\nb 1 2 3"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(parse("2 2\na 1 2\nb 1 x"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse("3 2\na 1 2\nb 1 2"), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse("1 2\na 1 2\nb 1 2"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse("2 1\na 1\na 2"), Err(Error::DuplicateToken(w)) if w == "a"));
    }

    #[test]
    fn three_hundred_dims() {
        let row: Vec<String> = (0..300).map(|i| format!("{}", i as f64 * 0.01)).collect();
        let text = format!("2 300\nking {}\nqueen {}\n", row.join(" "), row.join(" "));
        assert_eq!(parse(&text).unwrap().dim(), 300);
    }

    #[test]
    fn gzip_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.txt.gz");
        let set = EmbeddingSet::from_rows("e", [("a", vec![0.25, -1e-9]), ("b", vec![3.0, 1e300])]).unwrap();
        save_text(&set, &path).unwrap();
        let back = load_text(&path).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.name(), "e");
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let set = EmbeddingSet::from_rows("e", [("a", vec![1.0])]).unwrap();
        let err = save_text(&set, "/nonexistent-dir/x/y.txt").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    fn arb_set() -> impl Strategy<Value = EmbeddingSet> {
        (1usize..6, 0usize..8).prop_flat_map(|(dim, n)| {
            prop::collection::vec(
                prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
                n * dim,
            )
            .prop_map(move |vals| {
                let vocab = (0..n).map(|i| format!("w{i}")).collect();
                EmbeddingSet::new("p", vocab, Array2::from_shape_vec((n, dim), vals).unwrap()).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn text_round_trip_is_identity(set in arb_set()) {
            let mut buf = Vec::new();
            write_text(&set, &mut buf).unwrap();
            let back = read_text(buf.as_slice(), "p", "mem").unwrap();
            prop_assert_eq!(back.dim(), set.dim());
            prop_assert_eq!(back.vocab(), set.vocab());
            for (a, b) in back.matrix().iter().zip(set.matrix()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
