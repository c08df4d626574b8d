//! Line-oriented text dump of one realization.
//!
//! ```text
//! <n> <m> <seed>
//! layer <color> <x_drawn> <q_drawn>
//! v <sorted vertices>
//! e <u> <v>
//! ```
//! Vertices and colors are 1-indexed; reals carry 17 significant digits.

use std::fmt::Write as _;

use thiserror::Error;

use super::{ColoredMultigraph, LayerRealization};
use crate::fmt::sig17;

#[derive(Debug, Error, PartialEq)]
pub enum DumpError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub fn write_dump(g: &ColoredMultigraph, seed: u64) -> String {
    let mut out = String::new();
    writeln!(out, "{} {} {}", g.n(), g.m(), seed).unwrap();
    for layer in g.layers() {
        writeln!(out, "layer {} {} {}", layer.color + 1, layer.x_drawn, sig17(layer.q_drawn)).unwrap();
        out.push('v');
        for v in &layer.vertices {
            write!(out, " {}", v + 1).unwrap();
        }
        out.push('\n');
        for (u, v) in &layer.edges {
            writeln!(out, "e {} {}", u + 1, v + 1).unwrap();
        }
    }
    out
}

/// Parses a dump back into `(seed, graph)`.
pub fn read_dump(text: &str) -> Result<(u64, ColoredMultigraph), DumpError> {
    let mut lines = text.lines().enumerate();
    let err = |line: usize, msg: &str| DumpError::Parse { line: line + 1, msg: msg.to_string() };
    let (_, header) = lines.next().ok_or_else(|| err(0, "empty dump"))?;
    let head: Vec<u64> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| err(0, "header must be `n m seed`"))?;
    let [n, m, seed] = head[..] else { return Err(err(0, "header must be `n m seed`")) };
    let mut layers: Vec<LayerRealization> = Vec::new();
    for (i, line) in lines {
        let mut parts = line.split_whitespace();
        let num = |s: Option<&str>| -> Result<u64, DumpError> {
            s.and_then(|t| t.parse().ok()).ok_or_else(|| err(i, "expected an integer"))
        };
        let vertex = |s: Option<&str>| -> Result<u32, DumpError> {
            let v = num(s)?;
            if v == 0 || v > n {
                return Err(err(i, "vertex out of range"));
            }
            Ok(v as u32 - 1)
        };
        match parts.next() {
            Some("layer") => {
                let color = num(parts.next())?;
                let x_drawn = num(parts.next())?;
                let q_drawn: f64 = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(i, "expected edge probability"))?;
                if color == 0 {
                    return Err(err(i, "colors are 1-indexed"));
                }
                layers.push(LayerRealization {
                    color: color as u32 - 1,
                    vertices: Vec::new(),
                    edges: Vec::new(),
                    x_drawn,
                    q_drawn,
                });
            }
            Some("v") => {
                let layer = layers.last_mut().ok_or_else(|| err(i, "vertex line before layer"))?;
                for t in parts {
                    layer.vertices.push(vertex(Some(t))?);
                }
            }
            Some("e") => {
                let u = vertex(parts.next())?;
                let v = vertex(parts.next())?;
                layers.last_mut().ok_or_else(|| err(i, "edge line before layer"))?.edges.push((u, v));
            }
            None => {}
            Some(other) => return Err(err(i, &format!("unknown record `{other}`"))),
        }
    }
    if layers.len() as u64 != m {
        return Err(err(0, "layer count does not match header"));
    }
    Ok((seed, ColoredMultigraph::from_layers(n as usize, layers)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::generate_supergraph;
    use crate::layer_model::{LayerTypeLaw, QLaw, XLaw};
    use rand::SeedableRng;

    #[test]
    fn dump_round_trip_is_exact() {
        let law = LayerTypeLaw::independent(XLaw::Uniform { lo: 0, hi: 7 }, QLaw::Beta { a: 1.0, b: 1.0 }).unwrap();
        let g = generate_supergraph(9, 5, &law, &mut crate::Rng::seed_from_u64(5));
        let text = write_dump(&g, 5);
        let (seed, back) = read_dump(&text).unwrap();
        assert_eq!(seed, 5);
        assert_eq!(back, g);
        assert_eq!(write_dump(&back, seed), text);
    }

    #[test]
    fn dump_format_is_one_indexed() {
        let layer = LayerRealization { color: 0, vertices: vec![0, 2], edges: vec![(0, 2)], x_drawn: 2, q_drawn: 0.3 };
        let g = ColoredMultigraph::from_layers(3, vec![layer]);
        assert_eq!(write_dump(&g, 7), "3 1 7\nlayer 1 2 0.29999999999999999\nv 1 3\ne 1 3\n");
    }

    #[test]
    fn malformed_dumps_are_rejected() {
        assert!(read_dump("").is_err());
        assert!(read_dump("3 1\n").is_err());
        assert!(read_dump("3 1 0\nv 1\n").is_err());
        assert!(read_dump("3 1 0\nlayer 1 2 0.5\nv 1 4\n").is_err());
        assert!(read_dump("3 2 0\nlayer 1 2 0.5\nv 1 2\n").is_err());
    }
}
