//! Shared inputs for the benchmarks.

use dmatroid::generators::{graphic, k4, q6, uniform, Graph};
use dmatroid::Matroid;

/// Named matroids small enough to derive in well under a second.
pub fn derive_inputs() -> Vec<(&'static str, Matroid)> {
    vec![
        ("k4", k4()),
        ("u2_5", uniform(2, 5).expect("valid parameters")),
        ("u3_6", uniform(3, 6).expect("valid parameters")),
        ("q6", q6()),
        ("k4_plus_edge", graphic(&k4_with_parallel_edge()).expect("small graph")),
    ]
}

fn k4_with_parallel_edge() -> Graph {
    let mut g = Graph::complete(4);
    g.edges.push((0, 1));
    g
}
