//! Isomorphism tests for graphs and poc sets: colour refinement to prune,
//! then plain backtracking. Exact, meant for corpus-sized objects.

use crate::graph::SimpleGraph;
use crate::pocset::{PocSet, RelationKind};
use std::collections::HashMap;

/// Iterated neighbourhood-label refinement; stable colouring as small ints.
fn refine(g: &SimpleGraph) -> Vec<u64> {
    let n = g.n();
    let mut colour: Vec<u64> = (0..n).map(|v| g.degree(v) as u64).collect();
    for _ in 0..n {
        let mut sig: Vec<(u64, Vec<u64>)> = (0..n)
            .map(|v| {
                let mut ns: Vec<u64> = g.neighbors(v).iter().map(|u| colour[u]).collect();
                ns.sort_unstable();
                (colour[v], ns)
            })
            .collect();
        let mut sorted = sig.clone();
        sorted.sort();
        sorted.dedup();
        let index: HashMap<_, u64> = sorted
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s, i as u64))
            .collect();
        let next: Vec<u64> = sig.drain(..).map(|s| index[&s]).collect();
        if next == colour {
            break;
        }
        colour = next;
    }
    colour
}

/// Graph isomorphism; returns a vertex map g -> h when one exists.
pub fn graph_iso(g: &SimpleGraph, h: &SimpleGraph) -> Option<Vec<usize>> {
    if g.n() != h.n() || g.edge_count() != h.edge_count() {
        return None;
    }
    let (cg, ch) = (refine(g), refine(h));
    let mut mg = cg.clone();
    let mut mh = ch.clone();
    mg.sort_unstable();
    mh.sort_unstable();
    if mg != mh {
        return None;
    }
    let n = g.n();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    // assign most-constrained (rarest colour, highest degree) first
    let mut freq: HashMap<u64, usize> = HashMap::new();
    for &c in &cg {
        *freq.entry(c).or_insert(0) += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (freq[&cg[v]], std::cmp::Reverse(g.degree(v))));
    fn go(
        i: usize,
        order: &[usize],
        g: &SimpleGraph,
        h: &SimpleGraph,
        cg: &[u64],
        ch: &[u64],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if i == order.len() {
            return true;
        }
        let v = order[i];
        for w in 0..h.n() {
            if used[w] || ch[w] != cg[v] {
                continue;
            }
            let ok = (0..i).all(|j| {
                let u = order[j];
                g.has_edge(v, u) == h.has_edge(w, map[u])
            });
            if ok {
                map[v] = w;
                used[w] = true;
                if go(i + 1, order, g, h, cg, ch, map, used) {
                    return true;
                }
                used[w] = false;
                map[v] = usize::MAX;
            }
        }
        false
    }
    if go(0, &order, g, h, &cg, &ch, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

fn rel_code(r: RelationKind) -> u64 {
    match r {
        RelationKind::Equal => 0,
        RelationKind::StarEqual => 1,
        RelationKind::Below => 2,
        RelationKind::Above => 3,
        RelationKind::BelowStar => 4,
        RelationKind::AboveStar => 5,
        RelationKind::Transverse => 6,
    }
}

/// Iterated colour refinement on the proper elements: each round a colour
/// becomes its multiset of (relation, colour) facts. Indexed per element
/// (improper entries stay 0).
fn poc_refine(s: &PocSet) -> Vec<u64> {
    let n = s.n_elements();
    let mut colour = vec![0u64; n];
    for _ in 0..n {
        let mut sig: Vec<(u64, Vec<(u64, u64)>)> = Vec::with_capacity(n);
        for e in 0..n {
            if e < 2 {
                sig.push((u64::MAX, Vec::new()));
                continue;
            }
            let mut facts: Vec<(u64, u64)> = s
                .proper_elements()
                .filter(|&f| f != e)
                .map(|f| (rel_code(s.relation(e, f).unwrap()), colour[f]))
                .collect();
            facts.sort_unstable();
            sig.push((colour[e], facts));
        }
        let mut sorted = sig.clone();
        sorted.sort();
        sorted.dedup();
        let next: Vec<u64> = sig
            .iter()
            .map(|x| sorted.binary_search(x).unwrap() as u64)
            .collect();
        if next == colour {
            break;
        }
        colour = next;
    }
    colour
}

/// Poc set isomorphism; returns an element map when one exists. The map
/// commutes with `*`, fixes 0 and preserves the order both ways.
pub fn poc_iso(p: &PocSet, q: &PocSet) -> Option<Vec<usize>> {
    if p.n_pairs() != q.n_pairs() {
        return None;
    }
    let pp = poc_refine(p);
    let qq = poc_refine(q);
    {
        let mut a = pp.clone();
        let mut b = qq.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return None;
        }
    }
    let np = p.n_pairs();
    // map pair i of p to (pair, flip) of q
    let mut map: Vec<Option<(usize, bool)>> = vec![None; np];
    let mut used = vec![false; np];
    fn elem(pair: usize, star: bool) -> usize {
        2 * (pair + 1) + star as usize
    }
    fn image(map: &[Option<(usize, bool)>], e: usize) -> Option<usize> {
        if e < 2 {
            return Some(e);
        }
        let pair = e / 2 - 1;
        let star = e % 2 == 1;
        map[pair].map(|(qp, flip)| elem(qp, star ^ flip))
    }
    // assign rare colours first
    let mut freq: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
    for pr in 0..np {
        *freq.entry(pp[elem(pr, false)]).or_insert(0) += 1;
    }
    let mut order: Vec<usize> = (0..np).collect();
    order.sort_by_key(|&pr| (freq[&pp[elem(pr, false)]], pr));
    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        order: &[usize],
        p: &PocSet,
        q: &PocSet,
        pp: &[u64],
        qq: &[u64],
        map: &mut Vec<Option<(usize, bool)>>,
        used: &mut Vec<bool>,
    ) -> bool {
        let np = p.n_pairs();
        if i == np {
            return true;
        }
        let pr = order[i];
        let a = elem(pr, false);
        for j in 0..np {
            if used[j] {
                continue;
            }
            for flip in [false, true] {
                let b = elem(j, flip);
                if pp[a] != qq[b] || pp[elem(pr, true)] != qq[elem(j, !flip)] {
                    continue;
                }
                let consistent = (0..i).all(|k| {
                    let c = elem(order[k], false);
                    let fc = image(map, c).unwrap();
                    p.relation(a, c).unwrap() == q.relation(b, fc).unwrap()
                });
                if consistent {
                    map[pr] = Some((j, flip));
                    used[j] = true;
                    if go(i + 1, order, p, q, pp, qq, map, used) {
                        return true;
                    }
                    used[j] = false;
                    map[pr] = None;
                }
            }
        }
        false
    }
    if go(0, &order, p, q, &pp, &qq, &mut map, &mut used) {
        Some(
            (0..p.n_elements())
                .map(|e| image(&map, e).unwrap())
                .collect(),
        )
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SimpleGraph;

    #[test]
    fn graphs_relabelled() {
        let mut g = SimpleGraph::with_n("g", 5);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(2, 3);
        g.add_edge(3, 4);
        let mut h = SimpleGraph::with_n("h", 5);
        h.add_edge(4, 2);
        h.add_edge(2, 0);
        h.add_edge(0, 1);
        h.add_edge(1, 3);
        let m = graph_iso(&g, &h).unwrap();
        for (u, v) in g.edges() {
            assert!(h.has_edge(m[u], m[v]));
        }
        let mut k = SimpleGraph::with_n("k", 5);
        k.add_edge(0, 1);
        k.add_edge(1, 2);
        k.add_edge(2, 0);
        k.add_edge(3, 4);
        assert!(graph_iso(&g, &k).is_none());
    }
}
