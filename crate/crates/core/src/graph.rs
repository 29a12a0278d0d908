//! Simple undirected graphs plus the handful of algorithms the engine needs:
//! BFS metrics, components, cliques, exact and greedy colouring, bipartition.

use crate::bits::BitSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("graph is not connected")]
    Disconnected,
}

#[derive(Clone, Debug)]
pub struct SimpleGraph {
    pub name: String,
    labels: Vec<String>,
    adj: Vec<BitSet>,
}

impl SimpleGraph {
    pub fn new(name: &str, labels: Vec<String>) -> Self {
        let n = labels.len();
        SimpleGraph {
            name: name.to_string(),
            labels,
            adj: vec![BitSet::new(n); n],
        }
    }

    pub fn with_n(name: &str, n: usize) -> Self {
        SimpleGraph::new(name, (0..n).map(|i| i.to_string()).collect())
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v, "no loops in a simple graph");
        self.adj[u].insert(v);
        self.adj[v].insert(u);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    pub fn neighbors(&self, v: usize) -> &BitSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count()
    }

    /// Edges as ordered pairs (u < v), sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n() {
            for v in self.adj[u].iter() {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count()).sum::<usize>() / 2
    }

    pub fn complement(&self) -> SimpleGraph {
        let mut g = SimpleGraph::new(&self.name, self.labels.clone());
        for u in 0..self.n() {
            for v in u + 1..self.n() {
                if !self.has_edge(u, v) {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = BitSet::new(n);
        let mut comps = Vec::new();
        for s in 0..n {
            if seen.contains(s) {
                continue;
            }
            let mut comp = vec![s];
            seen.insert(s);
            let mut queue = vec![s];
            while let Some(u) = queue.pop() {
                for v in self.adj[u].iter() {
                    if !seen.contains(v) {
                        seen.insert(v);
                        comp.push(v);
                        queue.push(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().len() == 1
    }

    pub fn is_tree(&self) -> bool {
        self.is_connected() && self.edge_count() + 1 == self.n()
    }

    pub fn bfs_dist(&self, from: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[from] = Some(0);
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for v in self.adj[u].iter() {
                if dist[v].is_none() {
                    dist[v] = Some(dist[u].unwrap() + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Two-colouring. On success returns the colour vector, otherwise an
    /// odd closed walk witnessing failure.
    pub fn bipartition(&self) -> Result<Vec<u8>, Vec<usize>> {
        let n = self.n();
        let mut colour: Vec<Option<u8>> = vec![None; n];
        let mut parent: Vec<usize> = (0..n).collect();
        for s in 0..n {
            if colour[s].is_some() {
                continue;
            }
            colour[s] = Some(0);
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for v in self.adj[u].iter() {
                    match colour[v] {
                        None => {
                            colour[v] = Some(1 - colour[u].unwrap());
                            parent[v] = u;
                            queue.push_back(v);
                        }
                        Some(c) if c == colour[u].unwrap() => {
                            // walk both endpoints up to the root, stitch the cycle
                            let path = |mut x: usize| {
                                let mut p = vec![x];
                                while parent[x] != x {
                                    x = parent[x];
                                    p.push(x);
                                }
                                p
                            };
                            let (pu, pv) = (path(u), path(v));
                            let mut i = pu.len();
                            let mut j = pv.len();
                            while i > 1 && j > 1 && pu[i - 2] == pv[j - 2] {
                                i -= 1;
                                j -= 1;
                            }
                            let mut cyc: Vec<usize> = pu[..i].to_vec();
                            let mut tail: Vec<usize> = pv[..j - 1].to_vec();
                            tail.reverse();
                            cyc.extend(tail);
                            return Err(cyc);
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(colour.into_iter().map(|c| c.unwrap()).collect())
    }

    /// Largest clique, as a sorted vertex list. Branch and bound on the
    /// greedy-coloured candidate set; fine at the scales we run.
    pub fn max_clique(&self) -> Vec<usize> {
        let n = self.n();
        let mut best: Vec<usize> = Vec::new();
        let mut cur: Vec<usize> = Vec::new();
        let all: Vec<usize> = (0..n).collect();
        self.clique_search(&all, &mut cur, &mut best);
        best.sort_unstable();
        best
    }

    fn clique_search(&self, cand: &[usize], cur: &mut Vec<usize>, best: &mut Vec<usize>) {
        if cur.len() > best.len() {
            *best = cur.clone();
        }
        if cur.len() + cand.len() <= best.len() {
            return;
        }
        for (i, &v) in cand.iter().enumerate() {
            if cur.len() + (cand.len() - i) <= best.len() {
                return;
            }
            let next: Vec<usize> = cand[i + 1..]
                .iter()
                .copied()
                .filter(|&u| self.has_edge(u, v))
                .collect();
            cur.push(v);
            self.clique_search(&next, cur, best);
            cur.pop();
        }
    }

    /// All maximal cliques (Bron-Kerbosch with pivoting), sorted.
    pub fn maximal_cliques(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut out = Vec::new();
        let r = BitSet::new(n);
        let p = BitSet::full(n);
        let x = BitSet::new(n);
        self.bron_kerbosch(&r, p, x, &mut out);
        for c in out.iter_mut() {
            c.sort_unstable();
        }
        out.sort();
        out
    }

    fn bron_kerbosch(&self, r: &BitSet, p: BitSet, x: BitSet, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() && x.is_empty() {
            out.push(r.to_vec());
            return;
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .max_by_key(|&u| self.adj[u].intersection(&p).count())
            .unwrap();
        let todo: Vec<usize> = p.difference(&self.adj[pivot]).to_vec();
        let mut p = p;
        let mut x = x;
        for v in todo {
            let mut r2 = r.clone();
            r2.insert(v);
            let p2 = p.intersection(&self.adj[v]);
            let x2 = x.intersection(&self.adj[v]);
            self.bron_kerbosch(&r2, p2, x2, out);
            p.remove(v);
            x.insert(v);
        }
    }

    /// Every clique (including the empty one), as sorted vertex lists.
    pub fn all_cliques(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        let mut cur = Vec::new();
        self.all_cliques_rec(0, &mut cur, &mut out);
        out.sort();
        out
    }

    fn all_cliques_rec(&self, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for v in from..self.n() {
            if cur.iter().all(|&u| self.has_edge(u, v)) {
                cur.push(v);
                out.push(cur.clone());
                self.all_cliques_rec(v + 1, cur, out);
                cur.pop();
            }
        }
    }

    pub fn is_clique(&self, vs: &[usize]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(i, &u)| vs[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    /// Greedy colouring, vertices in order of decreasing degree.
    pub fn greedy_colouring(&self) -> usize {
        let n = self.n();
        if n == 0 {
            return 0;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(self.degree(v)));
        let mut colour = vec![usize::MAX; n];
        let mut used = 0;
        for &v in &order {
            let mut taken = BitSet::new(n + 1);
            for u in self.adj[v].iter() {
                if colour[u] != usize::MAX {
                    taken.insert(colour[u]);
                }
            }
            let c = (0..).find(|&c| !taken.contains(c)).unwrap();
            colour[v] = c;
            used = used.max(c + 1);
        }
        used
    }

    /// Exact chromatic number by iterative deepening over colour budgets.
    pub fn chromatic_number(&self) -> usize {
        if self.n() == 0 {
            return 0;
        }
        let lower = self.max_clique().len().max(1);
        let upper = self.greedy_colouring();
        for k in lower..=upper {
            if self.colourable_with(k) {
                return k;
            }
        }
        upper
    }

    fn colourable_with(&self, k: usize) -> bool {
        let mut colour = vec![usize::MAX; self.n()];
        self.colour_rec(0, k, &mut colour)
    }

    fn colour_rec(&self, v: usize, k: usize, colour: &mut Vec<usize>) -> bool {
        if v == self.n() {
            return true;
        }
        let mut max_used = 0;
        for u in 0..v {
            max_used = max_used.max(colour[u] + 1);
        }
        for c in 0..k.min(max_used + 1) {
            if self.adj[v].iter().any(|u| u < v && colour[u] == c) {
                continue;
            }
            colour[v] = c;
            if self.colour_rec(v + 1, k, colour) {
                return true;
            }
            colour[v] = usize::MAX;
        }
        false
    }
}

/// `graph <name>` plus `edge u v` / `vertex u` lines, `#` comments.
pub fn parse_graph_source(text: &str) -> Result<SimpleGraph, GraphError> {
    let mut name = String::from("graph");
    let mut labels: Vec<String> = Vec::new();
    let mut edges: Vec<(String, String, usize)> = Vec::new();
    let mut index = std::collections::HashMap::new();
    let intern = |labels: &mut Vec<String>,
                  index: &mut std::collections::HashMap<String, usize>,
                  tok: &str| {
        *index.entry(tok.to_string()).or_insert_with(|| {
            labels.push(tok.to_string());
            labels.len() - 1
        })
    };
    for (lno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        match it.next().unwrap() {
            "graph" => {
                name = it
                    .next()
                    .ok_or_else(|| GraphError::Parse {
                        line: lno + 1,
                        msg: "missing graph name".into(),
                    })?
                    .to_string();
            }
            "vertex" => {
                let v = it.next().ok_or_else(|| GraphError::Parse {
                    line: lno + 1,
                    msg: "vertex needs a token".into(),
                })?;
                intern(&mut labels, &mut index, v);
            }
            "edge" => {
                let u = it.next().ok_or_else(|| GraphError::Parse {
                    line: lno + 1,
                    msg: "edge needs two tokens".into(),
                })?;
                let v = it.next().ok_or_else(|| GraphError::Parse {
                    line: lno + 1,
                    msg: "edge needs two tokens".into(),
                })?;
                if u == v {
                    return Err(GraphError::Parse {
                        line: lno + 1,
                        msg: format!("loop at {}", u),
                    });
                }
                intern(&mut labels, &mut index, u);
                intern(&mut labels, &mut index, v);
                edges.push((u.to_string(), v.to_string(), lno + 1));
            }
            other => {
                return Err(GraphError::Parse {
                    line: lno + 1,
                    msg: format!("unknown directive `{}`", other),
                })
            }
        }
    }
    let mut g = SimpleGraph::new(&name, labels);
    for (u, v, _) in edges {
        g.add_edge(index[&u], index[&v]);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> SimpleGraph {
        let mut g = SimpleGraph::with_n("c", n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    #[test]
    fn bipartition_detects_odd_cycles() {
        assert!(cycle(6).bipartition().is_ok());
        let w = cycle(5).bipartition().unwrap_err();
        assert_eq!(w.len() % 2, 1);
        // witness really is a closed walk in the graph
        let g = cycle(5);
        for k in 0..w.len() {
            assert!(g.has_edge(w[k], w[(k + 1) % w.len()]));
        }
    }

    #[test]
    fn cliques_and_chromatic() {
        let mut g = SimpleGraph::with_n("k4e", 5);
        for i in 0..4 {
            for j in i + 1..4 {
                g.add_edge(i, j);
            }
        }
        g.add_edge(3, 4);
        assert_eq!(g.max_clique(), vec![0, 1, 2, 3]);
        assert_eq!(g.chromatic_number(), 4);
        assert_eq!(cycle(5).chromatic_number(), 3);
        assert_eq!(cycle(6).chromatic_number(), 2);
        let mc = cycle(5).maximal_cliques();
        assert_eq!(mc.len(), 5);
    }

    #[test]
    fn all_cliques_counts() {
        // triangle: {}, 3 vertices, 3 edges, 1 triangle
        assert_eq!(cycle(3).all_cliques().len(), 8);
    }

    #[test]
    fn parse_roundtrip() {
        let g = parse_graph_source("graph g\nedge a b\nedge b c\nvertex d\n").unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 2);
        assert!(!g.is_connected());
    }
}
