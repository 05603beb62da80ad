use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};

const HEAVY_HEX_SAMPLE: &str = include_str!("../../data/heavy_hex_sample.txt");

/// Physical connectivity plus a virtual-to-physical layout.
///
/// Text format: `#` comments, a `physical N` header, an optional
/// `layout p0 p1 ...` line, then one `u v` edge per line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMap {
    pub num_physical: usize,
    pub edges: BTreeSet<(usize, usize)>,
    pub layout: Vec<usize>,
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("expected a non-negative integer, found `{tok}`"),
    })
}

impl CouplingMap {
    pub fn new(
        num_physical: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        layout: Option<Vec<usize>>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= num_physical || v >= num_physical {
                return Err(Error::IndexOutOfRange {
                    index: u.max(v),
                    limit: num_physical,
                });
            }
            if u == v {
                return Err(Error::Config(format!("self-loop on physical qubit {u}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let layout = layout.unwrap_or_else(|| (0..num_physical).collect());
        let mut seen = BTreeSet::new();
        for &p in &layout {
            if p >= num_physical {
                return Err(Error::IndexOutOfRange {
                    index: p,
                    limit: num_physical,
                });
            }
            if !seen.insert(p) {
                return Err(Error::Config(format!(
                    "layout maps two virtual qubits to physical {p}"
                )));
            }
        }
        Ok(CouplingMap {
            num_physical,
            edges: set,
            layout,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut num_physical = None;
        let mut layout = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let t = raw.split('#').next().unwrap_or("").trim();
            if t.is_empty() {
                continue;
            }
            let toks: Vec<&str> = t.split_whitespace().collect();
            match toks[0] {
                "physical" => {
                    if toks.len() != 2 {
                        return Err(Error::Parse {
                            line,
                            msg: "expected `physical N`".into(),
                        });
                    }
                    num_physical = Some(parse_usize(toks[1], line)?);
                }
                "layout" => {
                    layout = Some(
                        toks[1..]
                            .iter()
                            .map(|t| parse_usize(t, line))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                _ => {
                    if num_physical.is_none() {
                        return Err(Error::Parse {
                            line,
                            msg: "edge before the `physical N` header".into(),
                        });
                    }
                    if toks.len() != 2 {
                        return Err(Error::Parse {
                            line,
                            msg: "expected an edge `u v`".into(),
                        });
                    }
                    edges.push((parse_usize(toks[0], line)?, parse_usize(toks[1], line)?));
                }
            }
        }
        let n = num_physical.ok_or(Error::Parse {
            line: 0,
            msg: "missing `physical N` header".into(),
        })?;
        CouplingMap::new(n, edges, layout)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("physical {}\n", self.num_physical);
        if self.layout != (0..self.num_physical).collect::<Vec<_>>() {
            let l: Vec<String> = self.layout.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "layout {}", l.join(" "));
        }
        for (u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Two rows of a heavy-hex lattice with a six-qubit layout.
    pub fn heavy_hex_sample() -> Self {
        CouplingMap::parse(HEAVY_HEX_SAMPLE).expect("bundled coupling map parses")
    }

    fn neighbours(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .filter_map(move |&(u, v)| match (u == p, v == p) {
                (true, _) => Some(v),
                (_, true) => Some(u),
                _ => None,
            })
    }

    /// Hop count between physical qubits, `None` if disconnected.
    pub fn physical_distance(&self, from: usize, to: usize) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.num_physical];
        let mut queue = VecDeque::from([from]);
        dist[from] = 0;
        while let Some(p) = queue.pop_front() {
            if p == to {
                return Some(dist[p]);
            }
            for n in self.neighbours(p) {
                if dist[n] == usize::MAX {
                    dist[n] = dist[p] + 1;
                    queue.push_back(n);
                }
            }
        }
        None
    }

    /// Hop count between virtual qubits under the layout.
    pub fn distance(&self, a: usize, b: usize) -> Result<usize> {
        let pa = *self.layout.get(a).ok_or(Error::IndexOutOfRange {
            index: a,
            limit: self.layout.len(),
        })?;
        let pb = *self.layout.get(b).ok_or(Error::IndexOutOfRange {
            index: b,
            limit: self.layout.len(),
        })?;
        self.physical_distance(pa, pb).ok_or_else(|| {
            Error::Config(format!("physical qubits {pa} and {pb} are not connected"))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_puts_q0_q5_farthest_apart() {
        let m = CouplingMap::heavy_hex_sample();
        assert_eq!(m.distance(0, 5).unwrap(), 5);
        for a in 0..3 {
            for d in 3..6 {
                assert!(m.distance(a, d).unwrap() <= 5);
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let m = CouplingMap::heavy_hex_sample();
        assert_eq!(CouplingMap::parse(&m.to_text()).unwrap(), m);
        let line = CouplingMap::parse("physical 3\n0 1\n1 2\n").unwrap();
        assert_eq!(line.layout, vec![0, 1, 2]);
        assert_eq!(line.distance(0, 2).unwrap(), 2);
    }

    #[test]
    fn rejects_bad_maps() {
        assert!(CouplingMap::parse("0 1\n").is_err());
        assert!(CouplingMap::parse("physical 2\n0 5\n").is_err());
        assert!(CouplingMap::parse("physical 2\nlayout 0 0\n0 1\n").is_err());
        let split = CouplingMap::parse("physical 3\n0 1\n").unwrap();
        assert!(split.distance(0, 2).is_err());
    }
}
