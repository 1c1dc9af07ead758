//! Edge-list text format: a header line `n m`, then `m` lines `u v` with
//! 0-based ids. Blank lines and `#` comments are ignored.

use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use std::fmt::Write as _;

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

fn two_numbers(line: usize, text: &str) -> Result<(usize, usize)> {
    let mut it = text.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        match it.next() {
            Some(tok) => tok
                .parse::<usize>()
                .map_err(|_| Error::Parse { line, msg: format!("bad {what} `{tok}`") }),
            None => parse_err(line, format!("missing {what}")),
        }
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if it.next().is_some() {
        return parse_err(line, "trailing fields");
    }
    Ok((a, b))
}

pub fn parse_edge_list(text: &str) -> Result<MultiGraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (a, b) = two_numbers(line, body)?;
        match header {
            None => header = Some((a, b)),
            Some((n, m)) => {
                if edges.len() == m {
                    return parse_err(line, format!("more than the declared {m} edges"));
                }
                if a >= n || b >= n {
                    return parse_err(line, format!("vertex id out of range for n={n}"));
                }
                edges.push((a, b));
            }
        }
    }
    let Some((n, m)) = header else {
        return parse_err(last_line.max(1), "missing `n m` header");
    };
    if edges.len() != m {
        return parse_err(last_line.max(1), format!("declared {m} edges, found {}", edges.len()));
    }
    MultiGraph::new(n, edges)
}

pub fn write_edge_list(g: &MultiGraph) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", g.n(), g.m());
    for &(u, v) in g.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    s
}
