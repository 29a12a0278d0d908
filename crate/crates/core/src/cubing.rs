//! The cubical nerve of a finite median algebra, flag links, hyperplane
//! contraction certificates, and recognition of median graphs through the
//! triple-interval criterion.

use crate::bits::BitSet;
use crate::duality::{contract_hyperplanes, DualityError};
use crate::graph::SimpleGraph;
use crate::median::{MedError, MedianAlgebra};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CubingError {
    #[error("graph must be connected")]
    Disconnected,
    #[error(transparent)]
    Med(#[from] MedError),
    #[error(transparent)]
    Duality(#[from] DualityError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// A cube of the nerve: a base vertex together with a transverse set of
/// hyperplanes cut by the cube; `vertices` is the spanned subcube.
#[derive(Debug, Clone)]
pub struct Cube {
    pub base: usize,
    pub hyperplanes: Vec<usize>,
    pub vertices: BitSet,
}

#[derive(Debug)]
pub struct CubeComplex {
    pub vertex_count: usize,
    /// all cubes, deduplicated by vertex set, sorted by (dim, vertex mask)
    pub cubes: Vec<Cube>,
    pub dimension: usize,
}

impl CubeComplex {
    /// Number of cubes per dimension, index = dimension.
    pub fn counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.dimension + 1];
        for c in &self.cubes {
            out[c.hyperplanes.len()] += 1;
        }
        out
    }

    /// Alternating sum of the cube counts; 1 for every nerve of a finite
    /// median algebra (the combinatorial shadow of contractibility).
    pub fn euler(&self) -> i64 {
        self.counts()
            .iter()
            .enumerate()
            .map(|(d, &c)| if d % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }
}

/// Enumerates the subcubes: for each vertex v, the transverse subsets of
/// the minimal half spaces at v span the cubes containing v. Cubes are
/// deduplicated by their vertex set.
pub fn cubical_nerve(m: &MedianAlgebra) -> CubeComplex {
    let n = m.n();
    let mut seen: std::collections::HashMap<BitSet, (usize, Vec<usize>)> =
        std::collections::HashMap::new();
    for v in 0..n {
        let min_ev = m.min_ev(v);
        let k = min_ev.len();
        let hyp: Vec<usize> = min_ev
            .iter()
            .map(|&h| m.hyperplane_of(h).expect("proper"))
            .collect();
        let mut adj = vec![BitSet::new(k); k];
        for i in 0..k {
            for j in i + 1..k {
                if m.hyperplanes_transverse(hyp[i], hyp[j]) {
                    adj[i].insert(j);
                    adj[j].insert(i);
                }
            }
        }
        // all transverse subsets of the minimal half spaces, empty included
        let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
        while let Some(cl) = stack.pop() {
            let start = cl.last().map_or(0, |&l| l + 1);
            let mut allowed = BitSet::new(m.halfspaces().len());
            for &i in &cl {
                let (h, hc) = m.hyperplanes()[hyp[i]];
                allowed.insert(h);
                allowed.insert(hc);
            }
            let mut verts = BitSet::new(n);
            for x in 0..n {
                let mut diff = m.vector(x).symmetric_difference(m.vector(v));
                diff.difference_with(&allowed);
                if diff.is_empty() {
                    verts.insert(x);
                }
            }
            debug_assert_eq!(verts.count(), 1 << cl.len());
            let hs: Vec<usize> = {
                let mut hs: Vec<usize> = cl.iter().map(|&i| hyp[i]).collect();
                hs.sort_unstable();
                hs
            };
            seen.entry(verts).or_insert((v, hs));
            for nx in start..k {
                if cl.iter().all(|&i| adj[i].contains(nx)) {
                    let mut next = cl.clone();
                    next.push(nx);
                    stack.push(next);
                }
            }
        }
    }
    let mut cubes: Vec<Cube> = seen
        .into_iter()
        .map(|(verts, (base, hyperplanes))| Cube {
            base,
            hyperplanes,
            vertices: verts,
        })
        .collect();
    cubes.sort_by(|a, b| {
        (a.hyperplanes.len())
            .cmp(&b.hyperplanes.len())
            .then(a.vertices.cmp_numeric(&b.vertices))
    });
    let dimension = cubes.iter().map(|c| c.hyperplanes.len()).max().unwrap_or(0);
    CubeComplex {
        vertex_count: n,
        cubes,
        dimension,
    }
}

/// The link of a vertex: the transversality graph of its minimal half
/// spaces, plus the flag check that every clique spans an actual cube.
/// Genuine median algebras always pass.
pub fn link_flag_check(m: &MedianAlgebra, v: usize) -> (SimpleGraph, bool) {
    let min_ev = m.min_ev(v);
    let k = min_ev.len();
    let labels: Vec<String> = min_ev
        .iter()
        .map(|&h| format!("H{}", m.hyperplane_of(h).unwrap()))
        .collect();
    let mut g = SimpleGraph::new(&format!("link_{}", m.token(v)), labels);
    for i in 0..k {
        for j in i + 1..k {
            if m.hyperplanes_transverse(
                m.hyperplane_of(min_ev[i]).unwrap(),
                m.hyperplane_of(min_ev[j]).unwrap(),
            ) {
                g.add_edge(i, j);
            }
        }
    }
    let mut flag = true;
    'cliques: for cl in g.all_cliques() {
        // the clique must span a cube containing v with all 2^k corners
        let mut allowed = BitSet::new(m.halfspaces().len());
        for &i in &cl {
            let h = min_ev[i];
            allowed.insert(h);
            allowed.insert(m.complement_of(h));
        }
        let mut count = 0;
        for x in 0..m.n() {
            let mut diff = m.vector(x).symmetric_difference(m.vector(v));
            diff.difference_with(&allowed);
            if diff.is_empty() {
                count += 1;
            }
        }
        if count != 1 << cl.len() {
            flag = false;
            break 'cliques;
        }
    }
    (g, flag)
}

/// One contraction step: collapse a single hyperplane; the hyperplane
/// count drops by exactly one.
pub fn contract_hyperplane(
    m: &MedianAlgebra,
    hyperplane: usize,
) -> Result<(MedianAlgebra, Vec<usize>), CubingError> {
    let before = m.hyperplanes().len();
    let q = contract_hyperplanes(m, &[hyperplane])?;
    if q.algebra.hyperplanes().len() + 1 != before {
        return Err(CubingError::Internal(
            "contraction did not remove exactly one hyperplane".into(),
        ));
    }
    Ok((q.algebra, q.projection))
}

/// Contracts hyperplane 0 repeatedly until a point remains. The returned
/// step descriptions (smaller side of each collapsed hyperplane, by
/// tokens) certify contractibility combinatorially; the length equals the
/// hyperplane count.
pub fn contraction_certificate(m: &MedianAlgebra) -> Result<Vec<String>, CubingError> {
    let mut cur = m.clone();
    let mut steps = Vec::new();
    while !cur.hyperplanes().is_empty() {
        let (h, _) = cur.hyperplanes()[0];
        let side: Vec<&str> = cur.halfspace(h).iter().map(|x| cur.token(x)).collect();
        steps.push(format!("{{{}}}", side.join(",")));
        let (next, _) = contract_hyperplane(&cur, 0)?;
        cur = next;
    }
    if cur.n() != 1 {
        return Err(CubingError::Internal(
            "contraction did not end in a point".into(),
        ));
    }
    Ok(steps)
}

#[derive(Debug)]
pub enum RecognitionResult {
    Median(MedianAlgebra),
    /// witness triple whose triple-interval intersection is not a singleton
    NotMedian {
        witness: (usize, usize, usize),
        intersection_size: usize,
    },
}

/// Recognition through the path metric: a connected graph is a median
/// graph iff every triple of vertices has a unique point in the mutual
/// intersection of its metric intervals. On success the resulting table
/// is canonicalized (which proves the axioms) and the derived median
/// graph is checked to be the input graph.
pub fn recognize_median_graph(g: &SimpleGraph) -> Result<RecognitionResult, CubingError> {
    if !g.is_connected() {
        return Err(CubingError::Disconnected);
    }
    let n = g.n();
    let dist: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            g.bfs_dist(v)
                .into_iter()
                .map(|d| d.expect("connected"))
                .collect()
        })
        .collect();
    let interval = |x: usize, y: usize| -> Vec<usize> {
        (0..n)
            .filter(|&z| dist[x][z] + dist[z][y] == dist[x][y])
            .collect()
    };
    let mut table = vec![0usize; n * n * n];
    for x in 0..n {
        for y in x..n {
            let ixy = interval(x, y);
            for z in y..n {
                let common: Vec<usize> = ixy
                    .iter()
                    .copied()
                    .filter(|&w| {
                        dist[y][w] + dist[w][z] == dist[y][z]
                            && dist[z][w] + dist[w][x] == dist[z][x]
                    })
                    .collect();
                if common.len() != 1 {
                    return Ok(RecognitionResult::NotMedian {
                        witness: (x, y, z),
                        intersection_size: common.len(),
                    });
                }
                let m = common[0];
                for (a, b, c) in [
                    (x, y, z),
                    (x, z, y),
                    (y, x, z),
                    (y, z, x),
                    (z, x, y),
                    (z, y, x),
                ] {
                    table[(a * n + b) * n + c] = m;
                }
            }
        }
    }
    let med = move |x: usize, y: usize, z: usize| table[(x * n + y) * n + z];
    let algebra = MedianAlgebra::from_valid_table(&g.name, g.labels().to_vec(), &med)?;
    // the derived median graph must be the input graph, edge for edge
    let back = algebra.median_graph();
    for u in 0..n {
        for v in u + 1..n {
            if g.has_edge(u, v) != back.has_edge(u, v) {
                return Err(CubingError::Internal(
                    "derived median graph differs from the input".into(),
                ));
            }
        }
    }
    Ok(RecognitionResult::Median(algebra))
}

// ----- DOT emission ---------------------------------------------------------

const PALETTE: [&str; 12] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
    "#1f78b4", "#b2df8a", "#fb9a99", "#cab2d6",
];

/// Median graph in DOT, one colour per hyperplane class: edges crossing
/// the same hyperplane share a colour. Output is byte stable.
pub fn median_graph_dot(m: &MedianAlgebra) -> String {
    let mut out = format!("graph {} {{\n", m.name());
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    for x in 0..m.n() {
        for y in x + 1..m.n() {
            let sep = m.delta_bar(x, y);
            if sep.count() == 1 {
                edges.push((x, y, sep.first().unwrap()));
            }
        }
    }
    edges.sort_unstable();
    if edges.is_empty() {
        for x in 0..m.n() {
            out.push_str(&format!("  \"{}\";\n", m.token(x)));
        }
    }
    for (x, y, h) in edges {
        out.push_str(&format!(
            "  \"{}\" -- \"{}\" [color=\"{}\"];\n",
            m.token(x),
            m.token(y),
            PALETTE[h % PALETTE.len()]
        ));
    }
    out.push_str("}\n");
    out
}
