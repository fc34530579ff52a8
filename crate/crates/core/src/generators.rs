//! Constructors for the standard example matroids, and matroid file I/O.

use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elemset::{ElemSet, MAX_GROUND};
use crate::families::for_each_combination;
use crate::matroid::{Matroid, MatroidError, MatroidJson};

/// Cycle spaces larger than this are refused by [`graphic`].
pub const MAX_CYCLE_SPACE_DIM: usize = 24;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("{what} needs 0 <= k <= n <= {MAX_GROUND}, got k={k}, n={n}")]
    BadParameters { what: &'static str, k: usize, n: usize },
    #[error("graph has {edges} edges; at most {MAX_GROUND} are supported")]
    TooManyEdges { edges: usize },
    #[error("edge {edge} uses vertex {vertex}, but the graph has {vertices} vertices")]
    VertexOutOfRange {
        edge: usize,
        vertex: usize,
        vertices: usize,
    },
    #[error("cycle space of dimension {dim} exceeds the enumeration limit {max}")]
    CycleSpaceTooLarge { dim: usize, max: usize },
    #[error("{source_name}: parse error at line {line}, column {column}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{source_name}: {source}")]
    Io {
        source_name: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}: {source}")]
    Invalid {
        source_name: String,
        #[source]
        source: MatroidError,
    },
    #[error(transparent)]
    Matroid(#[from] MatroidError),
}

/// `U(k, n)`: every `(k+1)`-subset of `{0..n-1}` is a circuit.
pub fn uniform(k: usize, n: usize) -> Result<Matroid, GeneratorError> {
    if k > n || n > MAX_GROUND {
        return Err(GeneratorError::BadParameters { what: "uniform", k, n });
    }
    let elems: Vec<usize> = (0..n).collect();
    let mut circuits = Vec::new();
    for_each_combination(&elems, k + 1, |c| circuits.push(c.iter().collect::<ElemSet>()));
    Ok(Matroid::from_circuits(n, circuits, false)?)
}

/// An undirected multigraph. Edge `i` becomes ground element `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Graph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl Graph {
    pub fn complete(vertices: usize) -> Self {
        let mut edges = Vec::new();
        for u in 0..vertices {
            for v in u + 1..vertices {
                edges.push((u, v));
            }
        }
        Graph {
            vertices,
            edges,
            labels: None,
        }
    }
}

/// The cycle matroid of `g`: circuits are the edge sets of simple cycles.
///
/// Cycles are found by walking the cycle space spanned by the fundamental
/// cycles of a spanning forest and keeping the connected 2-regular members.
pub fn graphic(g: &Graph) -> Result<Matroid, GeneratorError> {
    let m = g.edges.len();
    if m > MAX_GROUND {
        return Err(GeneratorError::TooManyEdges { edges: m });
    }
    for (i, &(u, v)) in g.edges.iter().enumerate() {
        if let Some(&vertex) = [u, v].iter().find(|&&x| x >= g.vertices) {
            return Err(GeneratorError::VertexOutOfRange {
                edge: i,
                vertex,
                vertices: g.vertices,
            });
        }
    }

    // Spanning forest by union-find; each non-forest edge closes one
    // fundamental cycle.
    let mut parent: Vec<usize> = (0..g.vertices).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut forest: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.vertices];
    let mut chords = Vec::new();
    for (i, &(u, v)) in g.edges.iter().enumerate() {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru == rv {
            chords.push(i);
        } else {
            parent[ru] = rv;
            forest[u].push((v, i));
            forest[v].push((u, i));
        }
    }
    if chords.len() > MAX_CYCLE_SPACE_DIM {
        return Err(GeneratorError::CycleSpaceTooLarge {
            dim: chords.len(),
            max: MAX_CYCLE_SPACE_DIM,
        });
    }

    let basis: Vec<u64> = chords
        .iter()
        .map(|&c| {
            let (u, v) = g.edges[c];
            forest_path(&forest, u, v) | 1u64 << c
        })
        .collect();

    let mut circuits = Vec::new();
    // Gray-code walk: each step toggles one basis cycle.
    let mut current = 0u64;
    for step in 1u64..(1u64 << basis.len()) {
        current ^= basis[step.trailing_zeros() as usize];
        if is_simple_cycle(g, current) {
            circuits.push(ElemSet::from_bits(current));
        }
    }
    let mut matroid = Matroid::from_circuits(m, circuits, false)?;
    if let Some(labels) = &g.labels {
        matroid = matroid.with_labels(labels.iter().cloned())?;
    }
    Ok(matroid)
}

/// Edge set of the forest path from `from` to `to`, which share a tree.
fn forest_path(forest: &[Vec<(usize, usize)>], from: usize, to: usize) -> u64 {
    let mut via: Vec<Option<(usize, usize)>> = vec![None; forest.len()];
    let mut seen = vec![false; forest.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(x) = stack.pop() {
        if x == to {
            break;
        }
        for &(y, e) in &forest[x] {
            if !seen[y] {
                seen[y] = true;
                via[y] = Some((x, e));
                stack.push(y);
            }
        }
    }
    let mut path = 0u64;
    let mut x = to;
    while let Some((prev, e)) = via[x] {
        path |= 1u64 << e;
        x = prev;
    }
    path
}

/// Nonempty, every touched vertex has degree 2, and the edges form one
/// connected piece.
fn is_simple_cycle(g: &Graph, edges: u64) -> bool {
    if edges == 0 {
        return false;
    }
    let mut degree = vec![0u32; g.vertices];
    for e in ElemSet::from_bits(edges) {
        let (u, v) = g.edges[e];
        degree[u] += 1;
        degree[v] += 1;
    }
    if degree.iter().any(|&d| d != 0 && d != 2) {
        return false;
    }
    // Grow one component edge by edge and check it covers everything.
    let first = edges.trailing_zeros() as usize;
    let mut reached = 1u64 << first;
    let mut touched = vec![false; g.vertices];
    touched[g.edges[first].0] = true;
    touched[g.edges[first].1] = true;
    loop {
        let mut grew = false;
        for e in ElemSet::from_bits(edges & !reached) {
            let (u, v) = g.edges[e];
            if touched[u] || touched[v] {
                touched[u] = true;
                touched[v] = true;
                reached |= 1u64 << e;
                grew = true;
            }
        }
        if !grew {
            return reached == edges;
        }
    }
}

fn parse_circuit_words(m: usize, words: &[&str], labels: &str) -> Vec<ElemSet> {
    words
        .iter()
        .map(|w| {
            w.chars()
                .map(|ch| labels.find(ch).filter(|&e| e < m).expect("label in range"))
                .collect()
        })
        .collect()
}

/// `M(K4)` with edges `ab, ac, ad, bc, bd, cd` labelled `1..6`.
pub fn k4() -> Matroid {
    let g = Graph {
        vertices: 4,
        edges: vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        labels: Some((1..=6).map(|i| i.to_string()).collect()),
    };
    graphic(&g).expect("K4 is small")
}

/// The Vámos matroid on `a..h`: five 4-circuits and every 5-set containing
/// none of them.
pub fn vamos() -> Matroid {
    let labels = "abcdefgh";
    let fours = parse_circuit_words(8, &["abcd", "adef", "adgh", "bcef", "bcgh"], labels);
    let mut circuits = fours.clone();
    for s in ElemSet::full(8).subsets().filter(|s| s.len() == 5) {
        if !fours.iter().any(|c| c.is_subset(s)) {
            circuits.push(s);
        }
    }
    Matroid::from_circuits(8, circuits, false)
        .and_then(|m| m.with_labels(labels.chars().map(String::from)))
        .expect("Vámos circuits form a clutter")
}

/// `Q6` on `1..6`: the lines `123` and `345`, and every 4-set containing
/// neither.
pub fn q6() -> Matroid {
    let labels = "123456";
    let lines = parse_circuit_words(6, &["123", "345"], labels);
    let mut circuits = lines.clone();
    for s in ElemSet::full(6).subsets().filter(|s| s.len() == 4) {
        if !lines.iter().any(|c| c.is_subset(s)) {
            circuits.push(s);
        }
    }
    Matroid::from_circuits(6, circuits, false)
        .and_then(|m| m.with_labels(labels.chars().map(String::from)))
        .expect("Q6 circuits form a clutter")
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, source_name: &str) -> Result<T, GeneratorError> {
    serde_json::from_str(text).map_err(|e| GeneratorError::Parse {
        source_name: source_name.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Reads a whole file, or standard input when `path` is `-`.
pub fn read_input(path: &Path) -> Result<String, GeneratorError> {
    let source_name = path.display().to_string();
    let result = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map(|_| s)
    } else {
        fs::read_to_string(path)
    };
    result.map_err(|source| GeneratorError::Io { source_name, source })
}

pub fn parse_matroid(text: &str, source_name: &str) -> Result<Matroid, GeneratorError> {
    let raw: MatroidJson = parse_json(text, source_name)?;
    Matroid::try_from(raw).map_err(|source| GeneratorError::Invalid {
        source_name: source_name.to_string(),
        source,
    })
}

pub fn load_matroid(path: &Path) -> Result<Matroid, GeneratorError> {
    parse_matroid(&read_input(path)?, &path.display().to_string())
}

pub fn load_graph(path: &Path) -> Result<Graph, GeneratorError> {
    parse_json(&read_input(path)?, &path.display().to_string())
}

pub fn matroid_to_json(m: &Matroid) -> String {
    let mut s = serde_json::to_string(m).expect("matroid serializes");
    s.push('\n');
    s
}

pub fn save_matroid(m: &Matroid, path: &Path) -> Result<(), GeneratorError> {
    fs::write(path, matroid_to_json(m)).map_err(|source| GeneratorError::Io {
        source_name: path.display().to_string(),
        source,
    })
}
