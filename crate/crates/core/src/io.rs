//! Text formats.
//!
//! Edge lists: a header line `n m` followed by `m` lines `i j` with
//! 0-indexed vertices and `i < j`. Records go out as CSV with a header row.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::SampleGraph;

pub fn edge_list_string(g: &SampleGraph) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", g.n(), g.edge_count()).expect("writing to a String");
    for (i, j) in g.adjacency.edges() {
        writeln!(out, "{i} {j}").expect("writing to a String");
    }
    out
}

pub fn write_edge_list(g: &SampleGraph, mut out: impl Write) -> Result<()> {
    out.write_all(edge_list_string(g).as_bytes())?;
    Ok(())
}

pub fn read_edge_list(input: impl BufRead) -> Result<SampleGraph> {
    let mut lines = input
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
    let parse_pair = |lineno: usize, line: &str| -> Result<(usize, usize)> {
        let mut it = line.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
            _ => Err(Error::Parse(format!(
                "line {}: expected two integers, got {line:?}",
                lineno + 1
            ))),
        }
    };
    let (lineno, header) = lines.next().ok_or_else(|| Error::Parse("empty edge list".into()))?;
    let (n, m) = parse_pair(lineno, &header?)?;
    let mut edges = Vec::with_capacity(m);
    for (lineno, line) in lines {
        edges.push(parse_pair(lineno, &line?)?);
    }
    if edges.len() != m {
        return Err(Error::Parse(format!(
            "header announces {m} edges, found {}",
            edges.len()
        )));
    }
    let g = SampleGraph::from_edges(n, edges)?;
    if g.edge_count() != m {
        return Err(Error::Parse("edge list contains duplicate edges".into()));
    }
    Ok(g)
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<SampleGraph> {
    let file = std::fs::File::open(path)?;
    read_edge_list(std::io::BufReader::new(file))
}

pub fn load_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Serializes `rows` as CSV (header from the field names) into a byte
/// buffer.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    writer.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    std::fs::write(path, csv_bytes(rows)?)?;
    Ok(())
}
