//! The `.hg` text format.
//!
//! ```text
//! # optional comment lines
//! r n m
//! v1 v2 ... vr      (m lines)
//! ```
//!
//! The writer emits edges in canonical order with no comments, so reading and
//! re-writing a canonical file reproduces it byte for byte.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, VertexId};

pub fn read_hg<R: BufRead>(reader: R) -> Result<Hypergraph> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut flat: Vec<VertexId> = Vec::new();
    let mut seen = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_ascii_whitespace().collect();
        match header {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err(lineno, "header must be `r n m`"));
                }
                let r = parse_usize(fields[0], lineno)?;
                let n = parse_usize(fields[1], lineno)?;
                let m = parse_usize(fields[2], lineno)?;
                flat.reserve(m.saturating_mul(r).min(1 << 28));
                header = Some((r, n, m));
            }
            Some((r, n, m)) => {
                if seen == m {
                    return Err(parse_err(lineno, "more edge lines than declared"));
                }
                if fields.len() != r {
                    return Err(Error::WrongArity {
                        edge: seen,
                        expected: r,
                        found: fields.len(),
                    });
                }
                for f in fields {
                    let v: u64 = f
                        .parse()
                        .map_err(|_| parse_err(lineno, &format!("bad vertex id `{f}`")))?;
                    if v >= n as u64 {
                        return Err(Error::VertexOutOfRange { vertex: v, n });
                    }
                    flat.push(v as VertexId);
                }
                seen += 1;
            }
        }
    }

    let (r, n, m) = header.ok_or_else(|| parse_err(0, "missing header"))?;
    if seen != m {
        return Err(parse_err(0, &format!("declared {m} edges, found {seen}")));
    }
    Hypergraph::from_flat(r, n, flat)
}

pub fn write_hg<W: Write>(mut w: W, h: &Hypergraph) -> Result<()> {
    writeln!(w, "{} {} {}", h.r(), h.n(), h.num_edges())?;
    let mut line = String::new();
    for e in h.edges() {
        line.clear();
        for (i, v) in e.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&v.to_string());
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_hg_file<P: AsRef<Path>>(path: P) -> Result<Hypergraph> {
    read_hg(BufReader::new(File::open(path)?))
}

pub fn write_hg_file<P: AsRef<Path>>(path: P, h: &Hypergraph) -> Result<()> {
    write_hg(BufWriter::new(File::create(path)?), h)
}

fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.parse()
        .map_err(|_| parse_err(line, &format!("expected a non-negative integer, got `{s}`")))
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        msg: msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        let text = "3 6 2\n0 1 2\n2 4 5\n";
        let h = read_hg(text.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_hg(&mut out, &h).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn comments_and_unsorted_input() {
        let text = "# a path\n2 3 2\n# edges\n2 1\n1 0\n";
        let h = read_hg(text.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_hg(&mut out, &h).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "2 3 2\n0 1\n1 2\n");
    }

    #[test]
    fn malformed_files() {
        assert!(matches!(read_hg("".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(read_hg("2 3\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_hg("2 3 2\n0 1\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(
            read_hg("2 3 1\n0 x\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_hg("2 3 1\n0 1 2\n".as_bytes()),
            Err(Error::WrongArity { .. })
        ));
        assert!(matches!(
            read_hg("2 3 1\n0 9\n".as_bytes()),
            Err(Error::VertexOutOfRange { vertex: 9, .. })
        ));
        assert!(matches!(
            read_hg("2 3 2\n0 1\n1 0\n".as_bytes()),
            Err(Error::DuplicateEdge { .. })
        ));
    }
}
