//! Shared corpus builders and independent oracles for the integration and
//! acceptance suites. Everything random is seeded explicitly.

#![allow(dead_code)]

use pocmed::bits::BitSet;
use pocmed::construct::{parse_tree_source, Tree};
use pocmed::duality::dual_of_poc;
use pocmed::graph::SimpleGraph;
use pocmed::iso::poc_iso;
use pocmed::median::{cube, linear, tripod, MedianAlgebra};
use pocmed::pocset::{parse_poc_source, PocSet, ZERO_STAR};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ----- named corpus ----------------------------------------------------------

pub fn named_algebras() -> Vec<MedianAlgebra> {
    vec![
        linear("point", 1),
        linear("edge", 2),
        linear("chain3", 3),
        linear("chain5", 5),
        cube("square", 2),
        cube("cube3", 3),
        tripod("tripod"),
        MedianAlgebra::product("grid2x3", &linear("l3", 3), &linear("e", 2)),
        star5(),
    ]
}

/// Five leaves glued to a centre.
pub fn star5() -> MedianAlgebra {
    let gens: Vec<BitSet> = (0..5).map(|i| BitSet::singleton(5, i)).collect();
    MedianAlgebra::from_subsets("star5", 5, &gens, None, 100_000).unwrap()
}

pub fn orthogonal_poc(n: usize) -> PocSet {
    let mut src = String::from("pocset orth\n");
    for i in 0..n {
        src.push_str(&format!("elem x{}\n", i));
    }
    parse_poc_source(&src).unwrap()
}

pub fn chain_poc() -> PocSet {
    parse_poc_source("pocset chain\nelem a\nelem b\nle a b\n").unwrap()
}

pub fn starlet_poc() -> PocSet {
    let mut src = String::from("pocset starlet\nelem x\nelem y\nelem z\n");
    for (a, b) in [
        ("x", "y"),
        ("x", "z"),
        ("y", "x"),
        ("y", "z"),
        ("z", "x"),
        ("z", "y"),
    ] {
        src.push_str(&format!("le {} {}^\n", a, b));
    }
    parse_poc_source(&src).unwrap()
}

pub fn named_pocs() -> Vec<PocSet> {
    vec![
        parse_poc_source("pocset two\n").unwrap(),
        chain_poc(),
        orthogonal_poc(3),
        starlet_poc(),
    ]
}

// ----- random objects ----------------------------------------------------------

/// Random tree on n vertices by random attachment.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Tree {
    let mut src = format!("tree rt{}\n", n);
    for v in 1..n {
        let parent = rng.gen_range(0..v);
        src.push_str(&format!("edge v{} v{}\n", parent, v));
    }
    parse_tree_source(&src).unwrap()
}

/// Random poc set with up to `max_pairs` proper pairs. Pairwise states are
/// drawn with a bias towards nesting so the duals stay small; draws whose
/// transitive closure breaks the axioms are redrawn.
pub fn random_poc(rng: &mut ChaCha8Rng, max_pairs: usize) -> PocSet {
    loop {
        let k = rng.gen_range(1..=max_pairs);
        let tokens: Vec<String> = (0..k).map(|i| format!("p{}", i)).collect();
        let mut relations = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                let (a, b) = (2 * (i + 1), 2 * (j + 1));
                // 0: transverse, then the four nesting states
                match rng.gen_range(0..8) {
                    0 | 1 | 2 => {}
                    3 => relations.push((a, b)),
                    4 => relations.push((b, a)),
                    5 | 6 => relations.push((a, b ^ 1)),
                    _ => relations.push((b ^ 1, a)),
                }
            }
        }
        if let Ok(p) = PocSet::from_relations("rp", tokens, &relations) {
            return p;
        }
    }
}

/// Random poc set whose dual stays below the element bound.
pub fn random_poc_with_small_dual(
    rng: &mut ChaCha8Rng,
    max_pairs: usize,
    max_dual: usize,
) -> (PocSet, MedianAlgebra) {
    loop {
        let p = random_poc(rng, max_pairs);
        if let Ok(ufs) = p.ultrafilters(24) {
            if ufs.len() <= max_dual {
                let d = dual_of_poc(&p, 24).unwrap();
                return (p, d.algebra);
            }
        }
    }
}

/// Every poc set with at most `max_pairs` proper pairs, one per
/// isomorphism class: enumerate the pairwise-state matrices, keep the
/// valid closures, deduplicate by isomorphism.
pub fn exhaustive_pocs_up_to_iso(max_pairs: usize) -> Vec<PocSet> {
    let mut out: Vec<PocSet> = Vec::new();
    for k in 0..=max_pairs {
        let slots = k * (k.saturating_sub(1)) / 2;
        let total = 5usize.pow(slots as u32);
        for code in 0..total {
            let mut c = code;
            let mut relations = Vec::new();
            for i in 0..k {
                for j in i + 1..k {
                    let state = c % 5;
                    c /= 5;
                    let (a, b) = (2 * (i + 1), 2 * (j + 1));
                    match state {
                        0 => {}
                        1 => relations.push((a, b)),
                        2 => relations.push((b, a)),
                        3 => relations.push((a, b ^ 1)),
                        _ => relations.push((b ^ 1, a)),
                    }
                }
            }
            let tokens: Vec<String> = (0..k).map(|i| format!("p{}", i)).collect();
            if let Ok(p) = PocSet::from_relations(&format!("e{}_{}", k, code), tokens, &relations) {
                if out
                    .iter()
                    .filter(|q| q.n_pairs() == k)
                    .all(|q| poc_iso(q, &p).is_none())
                {
                    out.push(p);
                }
            }
        }
    }
    out
}

// ----- independent oracles ----------------------------------------------------

/// All 2^n orientations filtered by the ultrafilter definition.
pub fn brute_ultrafilters(p: &PocSet) -> Vec<BitSet> {
    let np = p.n_pairs();
    assert!(np <= 20);
    let n = p.n_elements();
    let mut out = Vec::new();
    for mask in 0..(1u32 << np) {
        let mut s = BitSet::new(n);
        s.insert(ZERO_STAR);
        for i in 0..np {
            let (base, starred) = p.pair_elems(i);
            s.insert(if mask >> i & 1 == 1 { starred } else { base });
        }
        if p.classify_subset(&s).ultrafilter {
            out.push(s);
        }
    }
    out.sort_by(|a, b| a.cmp_numeric(b));
    out
}

/// All subsets convex with convex complement, straight from the median.
pub fn brute_halfspaces(m: &MedianAlgebra) -> Vec<BitSet> {
    let n = m.n();
    assert!(n <= 16);
    let convex = |c: &BitSet| -> bool {
        for x in c.iter() {
            for y in c.iter() {
                for z in 0..n {
                    if m.med(x, y, z) == z && !c.contains(z) {
                        return false;
                    }
                }
            }
        }
        true
    };
    let mut out = Vec::new();
    for mask in 0..(1u64 << n) {
        let mut c = BitSet::new(n);
        for i in 0..n {
            if mask >> i & 1 == 1 {
                c.insert(i);
            }
        }
        if convex(&c) && convex(&c.complement()) {
            out.push(c);
        }
    }
    out.sort_by(|a, b| a.cmp_numeric(b));
    out
}

/// All convex subsets, by brute force for small carriers and as
/// intersections of half spaces otherwise (the two agree at finite scale).
pub fn convex_sets(m: &MedianAlgebra) -> Vec<BitSet> {
    let n = m.n();
    if n <= 13 {
        let mut out = Vec::new();
        for mask in 0..(1u64 << n) {
            let mut c = BitSet::new(n);
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    c.insert(i);
                }
            }
            if m.is_convex(&c) {
                out.push(c);
            }
        }
        out
    } else {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        // intersections generated by closing under pairwise intersection
        let mut stack: Vec<BitSet> = m.halfspaces().to_vec();
        while let Some(c) = stack.pop() {
            if seen.insert(c.clone()) {
                for h in m.halfspaces() {
                    let i = c.intersection(h);
                    if !seen.contains(&i) {
                        stack.push(i);
                    }
                }
                out.push(c);
            }
        }
        out
    }
}

/// A randomized automorphism of a graph: backtracking with shuffled
/// candidate order over refinement classes. Always returns some
/// automorphism (the identity in the worst case).
pub fn random_automorphism(g: &SimpleGraph, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = g.n();
    // refinement colours: iterate degree signatures
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
        let next: Vec<u64> = sig
            .drain(..)
            .map(|s| sorted.binary_search(&s).unwrap() as u64)
            .collect();
        if next == colour {
            break;
        }
        colour = next;
    }
    fn go(
        v: usize,
        g: &SimpleGraph,
        colour: &[u64],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        order: &[Vec<usize>],
    ) -> bool {
        if v == g.n() {
            return true;
        }
        for &w in &order[v] {
            if used[w] || colour[w] != colour[v] {
                continue;
            }
            let ok = (0..v).all(|u| g.has_edge(v, u) == g.has_edge(w, map[u]));
            if ok {
                map[v] = w;
                used[w] = true;
                if go(v + 1, g, colour, map, used, order) {
                    return true;
                }
                used[w] = false;
            }
        }
        false
    }
    let mut order: Vec<Vec<usize>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut cand: Vec<usize> = (0..n).collect();
        cand.shuffle(rng);
        order.push(cand);
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if go(0, g, &colour, &mut map, &mut used, &order) {
        map
    } else {
        (0..n).collect()
    }
}

// ----- reusable invariant checks (used by the acceptance gate) -----------------

/// Interval laws (Int 1)-(Int 9) with the singleton triple intersection.
pub fn check_interval_laws(m: &MedianAlgebra) {
    let n = m.n();
    for x in 0..n {
        assert_eq!(m.interval(x, x).to_vec(), vec![x]);
        for y in 0..n {
            let ixy = m.interval(x, y);
            assert!(ixy.contains(x) && ixy.contains(y));
            assert_eq!(ixy, m.interval(y, x));
            for z in 0..n {
                let med = m.med(x, y, z);
                assert!(ixy.contains(med));
                let lhs = ixy.intersection(&m.interval(x, z));
                assert_eq!(lhs, m.interval(x, med));
                if ixy.contains(z) {
                    assert!(m.interval(x, z).is_subset(&ixy));
                    let cap = m.interval(x, z).intersection(&m.interval(z, y));
                    assert_eq!(cap.to_vec(), vec![z]);
                }
                let mut triple = ixy.clone();
                triple.intersect_with(&m.interval(y, z));
                triple.intersect_with(&m.interval(z, x));
                assert_eq!(triple.to_vec(), vec![med]);
                if m.interval(x, z).contains(y) {
                    for w in 0..n {
                        let cap = m.interval(x, w).intersection(&m.interval(z, w));
                        assert!(cap.is_subset(&m.interval(y, w)));
                        if m.interval(w, z).contains(x) {
                            assert!(m.interval(w, y).contains(x));
                        }
                    }
                }
            }
        }
    }
}

/// Helly for families of up to five pairwise-meeting convex sets;
/// exhaustive on small carriers, triples plus seeded samples above.
pub fn check_helly(m: &MedianAlgebra, seed: u64) {
    let convex: Vec<BitSet> = convex_sets(m)
        .into_iter()
        .filter(|c| !c.is_empty())
        .collect();
    let k = convex.len();
    if m.n() <= 8 {
        fn rec(
            start: usize,
            depth: usize,
            size: usize,
            convex: &[BitSet],
            chosen: &mut Vec<usize>,
        ) {
            if depth == size {
                let mut inter = convex[chosen[0]].clone();
                for &c in &chosen[1..] {
                    inter.intersect_with(&convex[c]);
                }
                assert!(!inter.is_empty(), "Helly failed");
                return;
            }
            for c in start..convex.len() {
                if chosen.iter().all(|&d| convex[d].intersects(&convex[c])) {
                    chosen.push(c);
                    rec(c + 1, depth + 1, size, convex, chosen);
                    chosen.pop();
                }
            }
        }
        for size in 2..=5usize.min(k) {
            let mut chosen = Vec::new();
            rec(0, 0, size, &convex, &mut chosen);
        }
    } else {
        for a in 0..k {
            for b in a + 1..k {
                if !convex[a].intersects(&convex[b]) {
                    continue;
                }
                for c in b + 1..k {
                    if convex[a].intersects(&convex[c]) && convex[b].intersects(&convex[c]) {
                        let mut inter = convex[a].intersection(&convex[b]);
                        inter.intersect_with(&convex[c]);
                        assert!(!inter.is_empty(), "Helly failed on a triple");
                    }
                }
            }
        }
        let mut r = rng(seed);
        'outer: for _ in 0..10_000 {
            let pick: Vec<usize> = (0..5).map(|_| r.gen_range(0..k)).collect();
            for i in 0..5 {
                for j in i + 1..5 {
                    if !convex[pick[i]].intersects(&convex[pick[j]]) {
                        continue 'outer;
                    }
                }
            }
            let mut inter = convex[pick[0]].clone();
            for &c in &pick[1..] {
                inter.intersect_with(&convex[c]);
            }
            assert!(!inter.is_empty(), "Helly failed on a 5-family");
        }
    }
}

/// Triangle equality of separating hyperplane sets, all triples.
pub fn check_triangle_equality(m: &MedianAlgebra) {
    let n = m.n();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let mut lhs = m.delta_bar(x, y);
                lhs.xor_with(&m.delta_bar(y, z));
                assert_eq!(lhs, m.delta_bar(x, z));
            }
        }
    }
}

/// Separator contraction identity over all quadruples (capped carrier).
pub fn check_median_contraction(m: &MedianAlgebra) {
    let n = m.n();
    if n > 12 {
        return;
    }
    for x in 0..n {
        for y in 0..n {
            for u in 0..n {
                for v in 0..n {
                    let lhs = m.delta_bar(m.med(x, u, v), m.med(y, u, v));
                    let rhs = m.delta_bar(x, y).intersection(&m.delta_bar(u, v));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }
}

/// Even triangle perimeters for the algebra's metric.
pub fn check_pattern(m: &MedianAlgebra) {
    let d: Vec<Vec<u64>> = (0..m.n())
        .map(|x| (0..m.n()).map(|y| m.distance(x, y) as u64).collect())
        .collect();
    assert!(pocmed::construct::pattern_check(&d).unwrap().0);
}

/// Direct recognition oracle: derive the unique candidate median table
/// from the path metric (a finite median algebra's metric and intervals
/// are determined by its graph), then validate the axioms and the derived
/// edges by brute force.
pub fn oracle_is_median(g: &SimpleGraph) -> bool {
    let n = g.n();
    let dist: Vec<Vec<usize>> = (0..n)
        .map(|v| g.bfs_dist(v).into_iter().map(|d| d.unwrap()).collect())
        .collect();
    let mut table = vec![0usize; n * n * n];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let mut found = usize::MAX;
                let mut count = 0;
                for w in 0..n {
                    if dist[x][w] + dist[w][y] == dist[x][y]
                        && dist[y][w] + dist[w][z] == dist[y][z]
                        && dist[z][w] + dist[w][x] == dist[z][x]
                    {
                        found = w;
                        count += 1;
                    }
                }
                if count != 1 {
                    return false;
                }
                table[(x * n + y) * n + z] = found;
            }
        }
    }
    let med = |x: usize, y: usize, z: usize| table[(x * n + y) * n + z];
    if !pocmed::median::validate_median_table(n, &med).is_valid() {
        return false;
    }
    for x in 0..n {
        for y in x + 1..n {
            let interval_size = (0..n).filter(|&z| med(x, y, z) == z).count();
            if (interval_size == 2) != g.has_edge(x, y) {
                return false;
            }
        }
    }
    true
}
