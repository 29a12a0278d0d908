//! Building discrete median algebras from poc data: tree poc sets, the
//! maximal-transverse-set realization, the stepwise ultrafilter
//! construction, discrete representations, and finite windows over the
//! half-line and free-group translate families.

use crate::bits::BitSet;
use crate::duality::dual_of_median;
use crate::graph::SimpleGraph;
use crate::iso::poc_iso;
use crate::median::{MedError, MedianAlgebra, DEFAULT_CLOSURE_LIMIT};
use crate::pocset::{star, Elem, PocError, PocSet, RelationKind, ZERO_STAR};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("input graph is not a tree: {0}")]
    NotATree(String),
    #[error("subset is not an ultrafilter")]
    NotUltrafilter,
    #[error("bad enumeration: {0}")]
    BadEnumeration(String),
    #[error("malformed metric: {0}")]
    MalformedMetric(String),
    #[error("bad representation: {0}")]
    BadRepresentation(String),
    #[error("transverse sets of size {0} exceed the orientation limit {1}")]
    DimensionLimit(usize, usize),
    #[error("end condition proxy failed in the window: {0}")]
    EndProxy(String),
    #[error(transparent)]
    Poc(#[from] PocError),
    #[error(transparent)]
    Med(#[from] MedError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

// ----- trees ---------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Tree {
    pub name: String,
    labels: Vec<String>,
    edges: Vec<(usize, usize)>,
}

impl Tree {
    pub fn new(
        name: &str,
        labels: Vec<String>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Tree, ConstructError> {
        let t = Tree {
            name: name.to_string(),
            labels,
            edges,
        };
        if !t.graph().is_tree() {
            return Err(ConstructError::NotATree(t.name));
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn graph(&self) -> SimpleGraph {
        let mut g = SimpleGraph::new(&self.name, self.labels.clone());
        for &(u, v) in &self.edges {
            g.add_edge(u, v);
        }
        g
    }
}

/// `tree <name>` plus `edge u v` lines.
pub fn parse_tree_source(text: &str) -> Result<Tree, ConstructError> {
    let mut name = String::from("tree");
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();
    for (lno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "tree" => {
                name = toks
                    .get(1)
                    .ok_or(ConstructError::Parse {
                        line: lno + 1,
                        msg: "missing name".into(),
                    })?
                    .to_string()
            }
            "edge" => {
                if toks.len() != 3 {
                    return Err(ConstructError::Parse {
                        line: lno + 1,
                        msg: "edge needs two tokens".into(),
                    });
                }
                let mut id = |t: &str| {
                    *index.entry(t.to_string()).or_insert_with(|| {
                        labels.push(t.to_string());
                        labels.len() - 1
                    })
                };
                let e = (id(toks[1]), id(toks[2]));
                edges.push(e);
            }
            other => {
                return Err(ConstructError::Parse {
                    line: lno + 1,
                    msg: format!("unknown directive `{}`", other),
                })
            }
        }
    }
    Tree::new(&name, labels, edges)
}

/// Poc set of a tree: proper elements are the oriented edges; the edge
/// written `u v` is identified with the vertex set of the component of v
/// after cutting, ordered by inclusion of these sets. Pair i corresponds
/// to input edge i, base element in the written orientation.
pub struct TreePoc {
    pub poc: PocSet,
    /// vertex sets of the oriented edges, indexed like poc elements
    pub side_of: Vec<BitSet>,
}

pub fn poc_of_tree(t: &Tree) -> TreePoc {
    let n = t.n();
    let g = t.graph();
    // component of `to` after removing the edge {from, to}
    let side = |from: usize, to: usize| -> BitSet {
        let mut seen = BitSet::new(n);
        seen.insert(to);
        let mut queue = vec![to];
        while let Some(x) = queue.pop() {
            for y in g.neighbors(x).iter() {
                if (x == to && y == from) || (x == from && y == to) {
                    continue;
                }
                if !seen.contains(y) {
                    seen.insert(y);
                    queue.push(y);
                }
            }
        }
        seen
    };
    let m = t.edges.len();
    let mut side_of = vec![BitSet::new(n); 2 + 2 * m];
    side_of[1] = BitSet::full(n);
    let mut pair_tokens = Vec::with_capacity(m);
    for (i, &(u, v)) in t.edges.iter().enumerate() {
        pair_tokens.push(format!("{}>{}", t.label(u), t.label(v)));
        side_of[2 + 2 * i] = side(u, v);
        side_of[2 + 2 * i + 1] = side(v, u);
    }
    let mut relations = Vec::new();
    for a in 2..2 + 2 * m {
        for b in 2..2 + 2 * m {
            if a != b && side_of[a].is_subset(&side_of[b]) {
                relations.push((a, b));
            }
        }
    }
    let poc = PocSet::from_relations(&format!("poc_{}", t.name), pair_tokens, &relations)
        .expect("tree edge sets always form a poc set");
    TreePoc { poc, side_of }
}

// ----- foundedness ----------------------------------------------------------

#[derive(Debug, Clone)]
pub struct FoundednessReport {
    pub founded: bool,
    pub well_founded: bool,
    /// tokens of offending elements (ungrounded or boundary-unstable)
    pub offenders: Vec<String>,
}

/// Foundedness of an ultrafilter in a finite poc set. Finiteness makes
/// every ultrafilter founded and well founded; the report shape matches
/// the windowed variant, which can genuinely fail.
pub fn well_foundedness(p: &PocSet, u: &BitSet) -> Result<FoundednessReport, ConstructError> {
    if !p.classify_subset(u).ultrafilter {
        return Err(ConstructError::NotUltrafilter);
    }
    let members: Vec<Elem> = u.iter().filter(|&e| p.is_proper(e)).collect();
    let minimals: Vec<Elem> = members
        .iter()
        .copied()
        .filter(|&a| !members.iter().any(|&b| b != a && p.lt(b, a)))
        .collect();
    let mut offenders = Vec::new();
    for &a in &members {
        if !minimals.iter().any(|&m| p.leq(m, a)) {
            offenders.push(p.token(a).to_string());
        }
    }
    let founded = offenders.is_empty();
    Ok(FoundednessReport {
        founded,
        well_founded: founded,
        offenders,
    })
}

// ----- the maximal-transverse-set realization --------------------------------

pub struct Dunwoody {
    pub algebra: MedianAlgebra,
    /// ultrafilters as poc element sets, in carrier order
    pub ultrafilters: Vec<BitSet>,
    /// each maximal transverse element set with the carrier index it maps to
    pub tau_map: Vec<(Vec<Elem>, usize)>,
}

const ORIENTATION_LIMIT: usize = 20;

/// Realizes a finite poc set as the median algebra of the ultrafilters
/// tau(A) over inclusion-maximal transverse subsets A of proper elements:
/// tau(A) = { b | some a in A has b >= a or b > a* }. Every tau(A) is a
/// well-founded ultrafilter and the dual of the result is isomorphic to
/// the input; both facts are asserted.
pub fn dunwoody_realize(p: &PocSet) -> Result<Dunwoody, ConstructError> {
    let tp = p.transversality_graph();
    let pair_cliques = if p.n_pairs() == 0 {
        vec![Vec::new()]
    } else {
        tp.maximal_cliques()
    };
    let n = p.n_elements();
    let mut seen: HashSet<BitSet> = HashSet::new();
    let mut ufs: Vec<BitSet> = Vec::new();
    let mut tau_sets: Vec<(Vec<Elem>, BitSet)> = Vec::new();
    for clique in &pair_cliques {
        let k = clique.len();
        if k > ORIENTATION_LIMIT {
            return Err(ConstructError::DimensionLimit(k, ORIENTATION_LIMIT));
        }
        for mask in 0..(1u32 << k) {
            let a_set: Vec<Elem> = clique
                .iter()
                .enumerate()
                .map(|(i, &pr)| {
                    let (base, starred) = p.pair_elems(pr);
                    if mask >> i & 1 == 1 {
                        starred
                    } else {
                        base
                    }
                })
                .collect();
            let mut tau = BitSet::new(n);
            tau.insert(ZERO_STAR);
            for b in p.proper_elements() {
                if a_set.iter().any(|&a| p.leq(a, b) || p.lt(star(a), b)) {
                    tau.insert(b);
                }
            }
            if seen.insert(tau.clone()) {
                if !p.classify_subset(&tau).ultrafilter {
                    return Err(ConstructError::Internal(
                        "tau of a maximal transverse set is not an ultrafilter".into(),
                    ));
                }
                if !well_foundedness(p, &tau)?.well_founded {
                    return Err(ConstructError::Internal(
                        "tau ultrafilter is not well founded".into(),
                    ));
                }
                ufs.push(tau.clone());
            }
            tau_sets.push((a_set, tau));
        }
    }
    ufs.sort_by(|a, b| a.cmp_numeric(b));
    let index: HashMap<&BitSet, usize> = ufs.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let tau_map: Vec<(Vec<Elem>, usize)> = tau_sets
        .iter()
        .map(|(a, t)| (a.clone(), index[t]))
        .collect();
    let tokens: Vec<String> = (0..ufs.len()).map(|i| format!("u{}", i)).collect();
    let algebra = MedianAlgebra::from_subsets_closed(
        &format!("{}_realized", p.name()),
        n,
        ufs.clone(),
        Some(tokens),
    )?;
    // one almost-equality class: the median graph is connected
    if !algebra.median_graph().is_connected() {
        return Err(ConstructError::Internal(
            "realized algebra is not connected".into(),
        ));
    }
    // dual of the realization reproduces the input
    if poc_iso(&dual_of_median(&algebra).poc, p).is_none() {
        return Err(ConstructError::Internal(
            "dual of the realization is not the input poc set".into(),
        ));
    }
    Ok(Dunwoody {
        algebra,
        ultrafilters: ufs,
        tau_map,
    })
}

// ----- the stepwise ultrafilter construction ---------------------------------

#[derive(Debug, Clone)]
pub struct IncrementalStep {
    pub pair_token: String,
    pub case: u8,
    /// the orientation finally taken (None when the pair was already settled)
    pub oriented: Option<Elem>,
    pub added: Vec<Elem>,
}

/// Builds a well-founded ultrafilter along a caller-supplied enumeration of
/// the proper pairs (one representative element each). The running set must
/// stay a filter base, its pair set must stay convex, and nothing new may
/// land strictly below an old element; a violation is a hard error.
pub fn incremental_ultrafilter(
    p: &PocSet,
    order: &[Elem],
) -> Result<(BitSet, Vec<IncrementalStep>), ConstructError> {
    let np = p.n_pairs();
    {
        let mut pairs_seen = vec![false; np];
        for &e in order {
            if !p.is_proper(e) {
                return Err(ConstructError::BadEnumeration(format!(
                    "improper element {}",
                    p.token(e)
                )));
            }
            let pr = p.pair_of(e);
            if pairs_seen[pr] {
                return Err(ConstructError::BadEnumeration(format!(
                    "pair of {} listed twice",
                    p.token(e)
                )));
            }
            pairs_seen[pr] = true;
        }
        if pairs_seen.iter().any(|&s| !s) {
            return Err(ConstructError::BadEnumeration(
                "enumeration misses a proper pair".into(),
            ));
        }
    }
    let n = p.n_elements();
    let mut f = BitSet::new(n);
    let mut trace = Vec::new();
    let in_bar = |f: &BitSet, e: Elem| f.contains(e) || f.contains(star(e));
    for &p_n in order {
        let step;
        if in_bar(&f, p_n) {
            step = IncrementalStep {
                pair_token: p.token(p_n).to_string(),
                case: 2,
                oriented: None,
                added: Vec::new(),
            };
        } else if f
            .iter()
            .all(|a| matches!(p.relation(a, p_n), Ok(RelationKind::Transverse)))
        {
            f.insert(p_n);
            step = IncrementalStep {
                pair_token: p.token(p_n).to_string(),
                case: 1,
                oriented: Some(p_n),
                added: vec![p_n],
            };
        } else {
            // case 3: orient so that some a in F has a < p or a* < p
            let fits = |cand: Elem| f.iter().any(|a| p.lt(a, cand) || p.lt(star(a), cand));
            let keep = fits(p_n);
            let flip = fits(star(p_n));
            if keep && flip {
                return Err(ConstructError::Internal(
                    "both orientations are forced in case 3".into(),
                ));
            }
            if !keep && !flip {
                return Err(ConstructError::Internal(
                    "case 3 fired without a comparable element".into(),
                ));
            }
            let cand = if keep { p_n } else { star(p_n) };
            let mut added = Vec::new();
            for b in p.proper_elements() {
                if in_bar(&f, b) {
                    continue;
                }
                if p.leq(b, cand) && f.iter().any(|a| p.leq(a, b) || p.leq(star(a), b)) {
                    added.push(b);
                }
            }
            let old = f.clone();
            for &b in &added {
                f.insert(b);
            }
            // invariant (iv): nothing new strictly below an old element
            for a in old.iter() {
                if added.iter().any(|&b| p.lt(b, a)) {
                    return Err(ConstructError::Internal(
                        "new element landed below an old one".into(),
                    ));
                }
            }
            step = IncrementalStep {
                pair_token: p.token(p_n).to_string(),
                case: 3,
                oriented: Some(cand),
                added,
            };
        }
        // invariant (ii): filter base
        if !p.classify_subset(&f).filter_base {
            return Err(ConstructError::Internal(
                "running set stopped being a filter base".into(),
            ));
        }
        // invariant (iii): the pair set is convex
        for b in p.proper_elements() {
            if in_bar(&f, b) {
                continue;
            }
            for f1 in f.iter() {
                for f3 in f.iter() {
                    for e1 in [f1, star(f1)] {
                        for e3 in [f3, star(f3)] {
                            if p.lt(e1, b) && p.lt(b, e3) {
                                return Err(ConstructError::Internal(
                                    "pair set stopped being convex".into(),
                                ));
                            }
                        }
                    }
                }
            }
        }
        trace.push(step);
    }
    let mut uf = f;
    uf.insert(ZERO_STAR);
    if !p.classify_subset(&uf).ultrafilter {
        return Err(ConstructError::Internal(
            "construction did not end in an ultrafilter".into(),
        ));
    }
    if !well_foundedness(p, &uf)?.well_founded {
        return Err(ConstructError::Internal(
            "construction produced an unfounded ultrafilter".into(),
        ));
    }
    Ok((uf, trace))
}

// ----- discrete representations ----------------------------------------------

/// A family of proper subsets of a ground set, one side per wall.
pub struct Representation {
    pub ground_tokens: Vec<String>,
    pub walls: Vec<BitSet>,
}

pub struct Realized {
    pub poc: PocSet,
    pub algebra: MedianAlgebra,
    /// ground point -> carrier index of its principal ultrafilter
    pub iota: Vec<usize>,
}

/// Realizes a representation: the walls ordered by inclusion form a poc
/// set, each ground point maps to its principal ultrafilter, and the
/// median closure of the point images is the realized algebra. The point
/// images generate, their metric equals the wall-separation count, and
/// the dual recovers the wall poc set; all three are asserted.
pub fn realize_representation(
    name: &str,
    rep: &Representation,
) -> Result<Realized, ConstructError> {
    let ground = rep.ground_tokens.len();
    let mut seen: HashSet<BitSet> = HashSet::new();
    for w in &rep.walls {
        assert_eq!(w.len(), ground);
        if w.is_empty() || w.is_full() {
            return Err(ConstructError::BadRepresentation(
                "walls must be proper subsets".into(),
            ));
        }
        if seen.contains(&w.complement()) || !seen.insert(w.clone()) {
            return Err(ConstructError::BadRepresentation(
                "walls must be pairwise distinct and not complementary".into(),
            ));
        }
    }
    let m = rep.walls.len();
    let side = |e: Elem| -> BitSet {
        match e {
            0 => BitSet::new(ground),
            1 => BitSet::full(ground),
            _ => {
                let w = &rep.walls[e / 2 - 1];
                if e % 2 == 0 {
                    w.clone()
                } else {
                    w.complement()
                }
            }
        }
    };
    let pair_tokens: Vec<String> = (0..m).map(|i| format!("w{}", i)).collect();
    let mut relations = Vec::new();
    for a in 2..2 + 2 * m {
        for b in 2..2 + 2 * m {
            if a != b && side(a).is_subset(&side(b)) {
                relations.push((a, b));
            }
        }
    }
    let poc = PocSet::from_relations(&format!("{}_walls", name), pair_tokens, &relations)?;
    let ne = poc.n_elements();
    let gens: Vec<BitSet> = (0..ground)
        .map(|x| {
            let mut u = BitSet::new(ne);
            u.insert(ZERO_STAR);
            for e in poc.proper_elements() {
                if side(e).contains(x) {
                    u.insert(e);
                }
            }
            u
        })
        .collect();
    for u in &gens {
        if !poc.classify_subset(u).ultrafilter {
            return Err(ConstructError::Internal(
                "point image is not an ultrafilter".into(),
            ));
        }
    }
    let algebra = MedianAlgebra::from_subsets(name, ne, &gens, None, DEFAULT_CLOSURE_LIMIT)?;
    let (_, masks) = algebra.ground_masks();
    let iota: Vec<usize> = gens
        .iter()
        .map(|g| masks.iter().position(|mk| mk == g).expect("generator kept"))
        .collect();
    // metric extension: distance between point images = wall separation
    for x in 0..ground {
        for y in 0..ground {
            let walls_sep = (0..m)
                .filter(|&i| rep.walls[i].contains(x) != rep.walls[i].contains(y))
                .count();
            if algebra.distance(iota[x], iota[y]) != walls_sep {
                return Err(ConstructError::Internal(
                    "representation metric does not extend".into(),
                ));
            }
        }
    }
    // the images generate
    let image = BitSet::from_indices(algebra.n(), &iota);
    if !crate::duality::generates(&algebra, &image).0 {
        return Err(ConstructError::Internal(
            "point images fail to generate the closure".into(),
        ));
    }
    // dual recovers the wall poc set
    if algebra.hyperplanes().len() != m {
        return Err(ConstructError::Internal(
            "realization has the wrong hyperplane count".into(),
        ));
    }
    if poc_iso(&dual_of_median(&algebra).poc, &poc).is_none() {
        return Err(ConstructError::Internal(
            "dual of the realization is not the wall poc set".into(),
        ));
    }
    Ok(Realized { poc, algebra, iota })
}

// ----- the pattern condition --------------------------------------------------

/// Checks that a pseudo-metric has all triangle perimeters even. The table
/// must be symmetric with zero diagonal and satisfy the triangle
/// inequality; otherwise it is rejected as malformed.
pub fn pattern_check(
    d: &[Vec<u64>],
) -> Result<(bool, Option<(usize, usize, usize)>), ConstructError> {
    let n = d.len();
    for (i, row) in d.iter().enumerate() {
        if row.len() != n {
            return Err(ConstructError::MalformedMetric(
                "table is not square".into(),
            ));
        }
        if row[i] != 0 {
            return Err(ConstructError::MalformedMetric(format!(
                "nonzero diagonal at {}",
                i
            )));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if d[i][j] != d[j][i] {
                return Err(ConstructError::MalformedMetric(format!(
                    "not symmetric at ({}, {})",
                    i, j
                )));
            }
            for k in 0..n {
                if d[i][k] > d[i][j] + d[j][k] {
                    return Err(ConstructError::MalformedMetric(format!(
                        "triangle inequality fails on ({}, {}, {})",
                        i, j, k
                    )));
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if (d[i][j] + d[j][k] + d[k][i]) % 2 == 1 {
                    return Ok((false, Some((i, j, k))));
                }
            }
        }
    }
    Ok((true, None))
}

// ----- windows over Z and the free group ---------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowGroup {
    Z,
    F2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowSet {
    /// positive half line of Z
    HalfLine,
    /// even integers; not almost invariant, used to exercise rejection
    Evens,
    /// reduced words starting with the given generator ('a' or 'b')
    Prefix(char),
}

#[derive(Debug, Clone)]
pub struct SageevSpec {
    pub group: WindowGroup,
    pub set: WindowSet,
    pub radius: usize,
}

const WINDOW_MARGIN: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDirection {
    Shrinks,
    Grows,
}

#[derive(Debug, Clone)]
pub struct EndCheck {
    /// generator tested
    pub generator: String,
    /// |(A + Ag) ∩ ball(r)| at r = R, R+1, R+2
    pub diff_counts: [usize; 3],
    pub stable: bool,
}

#[derive(Debug, Clone)]
pub struct WallData {
    /// token of the translating element
    pub translate: String,
    /// trace of the translate on the window ball
    pub trace: BitSet,
    /// trace on the margin ball
    pub trace_margin: BitSet,
}

pub struct SageevWindow {
    pub spec: SageevSpec,
    pub ball_tokens: Vec<String>,
    pub margin_tokens: Vec<String>,
    pub algebra: MedianAlgebra,
    /// ball element -> carrier index
    pub iota: Vec<usize>,
    /// walls proper on the window, one per hyperplane
    pub walls: Vec<WallData>,
    /// walls proper on the margin ball, a superset of the above
    pub margin_walls: Vec<WallData>,
    pub shifts: Vec<(String, ShiftDirection)>,
    /// distinct proper hyperplane traces on balls of radius 1..=R
    pub orbit_counts: Vec<usize>,
    pub end_checks: Vec<EndCheck>,
    /// (End 1) is vacuous with the trivial subgroup; recorded for reports
    pub end1_vacuous: bool,
}

struct Ctx {
    group: WindowGroup,
}

fn swap_case(c: char) -> char {
    if c.is_ascii_lowercase() {
        c.to_ascii_uppercase()
    } else {
        c.to_ascii_lowercase()
    }
}

impl Ctx {
    fn ball(&self, r: usize) -> Vec<String> {
        match self.group {
            WindowGroup::Z => (-(r as i64)..=r as i64).map(|k| k.to_string()).collect(),
            WindowGroup::F2 => {
                let mut out = vec!["1".to_string()];
                let mut frontier = vec![String::new()];
                for _ in 0..r {
                    let mut next = Vec::new();
                    for w in &frontier {
                        for c in ['a', 'b', 'A', 'B'] {
                            if let Some(last) = w.chars().last() {
                                if swap_case(last) == c {
                                    continue;
                                }
                            }
                            let mut nw = w.clone();
                            nw.push(c);
                            next.push(nw);
                        }
                    }
                    next.sort();
                    out.extend(next.iter().cloned());
                    frontier = next;
                }
                out
            }
        }
    }

    fn inv(&self, g: &str) -> String {
        match self.group {
            WindowGroup::Z => (-g.parse::<i64>().unwrap()).to_string(),
            WindowGroup::F2 => {
                if g == "1" {
                    return "1".into();
                }
                g.chars().rev().map(swap_case).collect()
            }
        }
    }

    fn mul(&self, a: &str, b: &str) -> String {
        match self.group {
            WindowGroup::Z => (a.parse::<i64>().unwrap() + b.parse::<i64>().unwrap()).to_string(),
            WindowGroup::F2 => {
                let mut word: Vec<char> = if a == "1" {
                    Vec::new()
                } else {
                    a.chars().collect()
                };
                let rhs: Vec<char> = if b == "1" {
                    Vec::new()
                } else {
                    b.chars().collect()
                };
                for c in rhs {
                    if let Some(&last) = word.last() {
                        if swap_case(last) == c {
                            word.pop();
                            continue;
                        }
                    }
                    word.push(c);
                }
                if word.is_empty() {
                    "1".into()
                } else {
                    word.into_iter().collect()
                }
            }
        }
    }

    fn in_set(&self, set: WindowSet, g: &str) -> bool {
        match (self.group, set) {
            (WindowGroup::Z, WindowSet::HalfLine) => g.parse::<i64>().unwrap() > 0,
            (WindowGroup::Z, WindowSet::Evens) => g.parse::<i64>().unwrap().rem_euclid(2) == 0,
            (WindowGroup::F2, WindowSet::Prefix(c)) => g != "1" && g.starts_with(c),
            _ => panic!("set not defined for this group"),
        }
    }

    fn identity(&self) -> String {
        match self.group {
            WindowGroup::Z => "0".to_string(),
            WindowGroup::F2 => "1".to_string(),
        }
    }

    fn generators(&self) -> Vec<String> {
        match self.group {
            WindowGroup::Z => vec!["1".to_string()],
            WindowGroup::F2 => vec!["a".to_string(), "b".to_string()],
        }
    }

    fn word_len(&self, g: &str) -> usize {
        match self.group {
            WindowGroup::Z => g.parse::<i64>().unwrap().unsigned_abs() as usize,
            WindowGroup::F2 => {
                if g == "1" {
                    0
                } else {
                    g.len()
                }
            }
        }
    }
}

/// Membership of x in the translate gA.
fn in_translate(ctx: &Ctx, set: WindowSet, g: &str, x: &str) -> bool {
    ctx.in_set(set, &ctx.mul(&ctx.inv(g), x))
}

/// Materializes the translate family inside a finite ball, builds the
/// window median algebra through the representation route and reports
/// shifts, per-radius hyperplane counts and the end-condition proxies.
/// All difference checks use data two radii beyond the window so boundary
/// truncation cannot fake invariance.
pub fn sageev_window(spec: &SageevSpec) -> Result<SageevWindow, ConstructError> {
    match (spec.group, spec.set) {
        (WindowGroup::Z, WindowSet::HalfLine | WindowSet::Evens) => {}
        (WindowGroup::F2, WindowSet::Prefix('a' | 'b')) => {}
        _ => {
            return Err(ConstructError::BadRepresentation(
                "set not available for this group".into(),
            ))
        }
    }
    let ctx = Ctx { group: spec.group };
    let r = spec.radius;
    let ball = ctx.ball(r);
    let margin = ctx.ball(r + WINDOW_MARGIN);

    // (End 2) proxy: the symmetric difference A + Ag (right translate) must
    // stop growing between the two margin radii.
    let mut end_checks = Vec::new();
    for gen in ctx.generators() {
        let mut counts = [0usize; 3];
        for (k, rr) in [r, r + 1, r + 2].iter().enumerate() {
            counts[k] = ctx
                .ball(*rr)
                .iter()
                .filter(|x| {
                    let in_a = ctx.in_set(spec.set, x);
                    let in_ag = ctx.in_set(spec.set, &ctx.mul(x, &ctx.inv(&gen)));
                    in_a != in_ag
                })
                .count();
        }
        let stable = counts[1] == counts[2];
        end_checks.push(EndCheck {
            generator: gen,
            diff_counts: counts,
            stable,
        });
    }
    if let Some(bad) = end_checks.iter().find(|c| !c.stable) {
        return Err(ConstructError::EndProxy(format!(
            "A + Ag keeps growing for g = {} (counts {:?})",
            bad.generator, bad.diff_counts
        )));
    }
    // (End 3) proxy: both sides meet the window boundary sphere
    let sphere: Vec<&String> = ball.iter().filter(|g| ctx.word_len(g) == r).collect();
    if !sphere.iter().any(|g| ctx.in_set(spec.set, g))
        || !sphere.iter().any(|g| !ctx.in_set(spec.set, g))
    {
        return Err(ConstructError::EndProxy(
            "a side of A misses the window boundary".into(),
        ));
    }

    let trace_on = |elems: &[String], g: &str| -> BitSet {
        let mut t = BitSet::new(elems.len());
        for (i, x) in elems.iter().enumerate() {
            if in_translate(&ctx, spec.set, g, x) {
                t.insert(i);
            }
        }
        t
    };
    let canon = |t: &BitSet| -> BitSet {
        let c = t.complement();
        if t.cmp_numeric(&c) == std::cmp::Ordering::Less {
            t.clone()
        } else {
            c
        }
    };
    let mut margin_walls: Vec<WallData> = Vec::new();
    let mut seen_margin: HashSet<BitSet> = HashSet::new();
    for g in &margin {
        let tm = trace_on(&margin, g);
        if tm.is_empty() || tm.is_full() {
            continue;
        }
        if seen_margin.insert(canon(&tm)) {
            margin_walls.push(WallData {
                translate: g.clone(),
                trace: trace_on(&ball, g),
                trace_margin: tm,
            });
        }
    }
    let mut walls: Vec<WallData> = Vec::new();
    let mut seen_ball: HashSet<BitSet> = HashSet::new();
    for w in &margin_walls {
        if w.trace.is_empty() || w.trace.is_full() {
            continue;
        }
        if seen_ball.insert(canon(&w.trace)) {
            walls.push(w.clone());
        }
    }
    let rep = Representation {
        ground_tokens: ball.clone(),
        walls: walls.iter().map(|w| w.trace.clone()).collect(),
    };
    let name = format!(
        "window_{}_r{}",
        match spec.group {
            WindowGroup::Z => "z",
            WindowGroup::F2 => "f2",
        },
        r
    );
    let realized = realize_representation(&name, &rep)?;

    // shifts: strict inclusion of margin traces among window translates
    let base = trace_on(&margin, &ctx.identity());
    let mut shifts = Vec::new();
    for g in &ball {
        if ctx.word_len(g) == 0 {
            continue;
        }
        let t = trace_on(&margin, g);
        if t != base {
            if t.is_subset(&base) {
                shifts.push((g.clone(), ShiftDirection::Shrinks));
            } else if base.is_subset(&t) {
                shifts.push((g.clone(), ShiftDirection::Grows));
            }
        }
    }

    // per-radius hyperplane counts
    let mut orbit_counts = Vec::new();
    for rr in 1..=r {
        let small = ctx.ball(rr);
        let trace_small = |g: &str| -> BitSet {
            let mut t = BitSet::new(small.len());
            for (i, x) in small.iter().enumerate() {
                if in_translate(&ctx, spec.set, g, x) {
                    t.insert(i);
                }
            }
            t
        };
        let mut seen: HashSet<BitSet> = HashSet::new();
        let mut count = 0;
        for g in ctx.ball(rr + WINDOW_MARGIN) {
            let t = trace_small(&g);
            if t.is_empty() || t.is_full() {
                continue;
            }
            if seen.insert(canon(&t)) {
                count += 1;
            }
        }
        orbit_counts.push(count);
    }
    Ok(SageevWindow {
        spec: spec.clone(),
        ball_tokens: ball,
        margin_tokens: margin,
        algebra: realized.algebra,
        iota: realized.iota,
        walls,
        margin_walls,
        shifts,
        orbit_counts,
        end_checks,
        end1_vacuous: true,
    })
}

impl SageevWindow {
    /// Foundedness of the orientation choosing, per margin wall, the side
    /// containing the anchor. A window minimal whose wall stops being
    /// minimal on the margin is boundary-unstable, so the orientation is
    /// flagged unfounded.
    fn orientation_foundedness(&self, anchor_margin_idx: usize) -> FoundednessReport {
        let margin_sides: Vec<(usize, BitSet)> = self
            .margin_walls
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let side = if w.trace_margin.contains(anchor_margin_idx) {
                    w.trace_margin.clone()
                } else {
                    w.trace_margin.complement()
                };
                (i, side)
            })
            .collect();
        let minimal_margin: HashSet<usize> = margin_sides
            .iter()
            .filter(|(i, s)| {
                !margin_sides
                    .iter()
                    .any(|(j, s2)| j != i && s2 != s && s2.is_subset(s))
            })
            .map(|(i, _)| *i)
            .collect();
        let window_sides: Vec<(usize, BitSet)> = self
            .margin_walls
            .iter()
            .enumerate()
            .filter_map(|(i, w)| {
                if w.trace.is_empty() || w.trace.is_full() {
                    return None;
                }
                let side = if w.trace_margin.contains(anchor_margin_idx) {
                    w.trace.clone()
                } else {
                    w.trace.complement()
                };
                Some((i, side))
            })
            .collect();
        let minimal_window: Vec<usize> = window_sides
            .iter()
            .filter(|(i, s)| {
                !window_sides
                    .iter()
                    .any(|(j, s2)| j != i && s2 != s && s2.is_subset(s))
            })
            .map(|(i, _)| *i)
            .collect();
        let offenders: Vec<String> = minimal_window
            .iter()
            .filter(|i| !minimal_margin.contains(i))
            .map(|&i| self.margin_walls[i].translate.clone())
            .collect();
        let founded = offenders.is_empty();
        FoundednessReport {
            founded,
            well_founded: founded,
            offenders,
        }
    }

    /// The orientation of every wall towards the window's escape direction
    /// (the last margin element); on the half line this picks every
    /// positive tail.
    pub fn tail_foundedness(&self) -> FoundednessReport {
        self.orientation_foundedness(self.margin_tokens.len() - 1)
    }

    /// The principal orientation of a ball element.
    pub fn principal_foundedness(&self, ball_elem: usize) -> FoundednessReport {
        let tok = &self.ball_tokens[ball_elem];
        let idx = self
            .margin_tokens
            .iter()
            .position(|t| t == tok)
            .expect("ball is inside the margin ball");
        self.orientation_foundedness(idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pocset::parse_poc_source;

    fn path3() -> Tree {
        parse_tree_source("tree p\nedge a b\nedge b c\n").unwrap()
    }

    #[test]
    fn tree_parse_and_reject() {
        assert!(parse_tree_source("tree t\nedge a b\nedge b c\nedge c a\n").is_err());
        assert!(parse_tree_source("tree t\nedge a b\nedge c d\n").is_err());
        assert_eq!(path3().n(), 3);
    }

    #[test]
    fn tree_poc_orientation() {
        let t = path3();
        let tp = poc_of_tree(&t);
        let p = &tp.poc;
        assert_eq!(p.n_pairs(), 2);
        let e1 = p.elem_by_token("a>b").unwrap();
        let e2 = p.elem_by_token("b>c").unwrap();
        // component sets: a>b ~ {b,c}, b>c ~ {c}; so e2 < e1 and e1^ < e2^
        assert!(p.lt(e2, e1));
        assert!(p.lt(star(e1), star(e2)));
        // single edge: one pair, no comparabilities beyond the bounds
        let one = parse_tree_source("tree o\nedge x y\n").unwrap();
        assert_eq!(poc_of_tree(&one).poc.n_pairs(), 1);
        // star tree matches the cone construction over an edgeless graph
        let k13 = parse_tree_source("tree s\nedge z a\nedge z b\nedge z c\n").unwrap();
        let ps = poc_of_tree(&k13).poc;
        let cone = crate::pocset::poc_from_graph(&SimpleGraph::with_n("e3", 3));
        assert!(poc_iso(&ps, &cone).is_some());
    }

    #[test]
    fn foundedness_finite() {
        let p = parse_poc_source("pocset c\nelem a\nelem b\nle a b\n").unwrap();
        for u in p.ultrafilters(24).unwrap() {
            let rep = well_foundedness(&p, &u).unwrap();
            assert!(rep.founded && rep.well_founded);
        }
        let not_uf = BitSet::from_indices(p.n_elements(), &[ZERO_STAR, 2]);
        assert!(well_foundedness(&p, &not_uf).is_err());
    }

    #[test]
    fn dunwoody_path() {
        let t = path3();
        let tp = poc_of_tree(&t);
        let d = dunwoody_realize(&tp.poc).unwrap();
        assert_eq!(d.algebra.n(), 3);
        // tau({e1}) = tau({e2^}): both are the middle vertex
        let p = &tp.poc;
        let e1 = p.elem_by_token("a>b").unwrap();
        let e2 = p.elem_by_token("b>c").unwrap();
        let find = |elems: &[Elem]| {
            d.tau_map
                .iter()
                .find(|(a, _)| a.as_slice() == elems)
                .map(|&(_, i)| i)
                .unwrap()
        };
        assert_eq!(find(&[e1]), find(&[star(e2)]));
        assert!(crate::iso::graph_iso(&d.algebra.median_graph(), &t.graph()).is_some());
    }

    #[test]
    fn dunwoody_shapes() {
        let mut src = String::from("pocset o\n");
        for i in 0..3 {
            src.push_str(&format!("elem x{}\n", i));
        }
        let p = parse_poc_source(&src).unwrap();
        assert_eq!(dunwoody_realize(&p).unwrap().algebra.n(), 8);
        let two = parse_poc_source("pocset two\n").unwrap();
        assert_eq!(dunwoody_realize(&two).unwrap().algebra.n(), 1);
    }

    #[test]
    fn incremental_cases() {
        // orthogonal: case 1 throughout
        let mut src = String::from("pocset o\n");
        for i in 0..3 {
            src.push_str(&format!("elem x{}\n", i));
        }
        let p = parse_poc_source(&src).unwrap();
        let order: Vec<Elem> = (0..3).map(|i| p.pair_elems(i).0).collect();
        let (uf, trace) = incremental_ultrafilter(&p, &order).unwrap();
        assert!(trace.iter().all(|s| s.case == 1));
        assert!(p.classify_subset(&uf).ultrafilter);

        // chain a < b walked from the top: step 2 flips a to a^
        let p = parse_poc_source("pocset c\nelem a\nelem b\nle a b\n").unwrap();
        let a = p.elem_by_token("a").unwrap();
        let b = p.elem_by_token("b").unwrap();
        let (uf, trace) = incremental_ultrafilter(&p, &[b, a]).unwrap();
        assert_eq!(trace[0].case, 1);
        assert_eq!(trace[1].case, 3);
        assert_eq!(trace[1].oriented, Some(star(a)));
        assert_eq!(uf.to_vec(), vec![ZERO_STAR, star(a), b]);

        // bad enumerations
        assert!(incremental_ultrafilter(&p, &[b]).is_err());
        assert!(incremental_ultrafilter(&p, &[b, b]).is_err());
    }

    #[test]
    fn incremental_always_well_founded() {
        let p = crate::pocset::tests_support::starlet3();
        let orders: Vec<Vec<Elem>> = vec![
            (0..3).map(|i| p.pair_elems(i).0).collect(),
            (0..3).rev().map(|i| p.pair_elems(i).1).collect(),
        ];
        for order in orders {
            let (uf, _) = incremental_ultrafilter(&p, &order).unwrap();
            assert!(well_foundedness(&p, &uf).unwrap().well_founded);
        }
    }

    #[test]
    fn representation_roundtrip_tree() {
        let t = path3();
        let tp = poc_of_tree(&t);
        let walls: Vec<BitSet> = (0..tp.poc.n_pairs())
            .map(|i| tp.side_of[2 + 2 * i].clone())
            .collect();
        let rep = Representation {
            ground_tokens: (0..t.n()).map(|v| t.label(v).to_string()).collect(),
            walls,
        };
        let r = realize_representation("p3", &rep).unwrap();
        assert_eq!(r.algebra.n(), 3);
        assert!(crate::iso::graph_iso(&r.algebra.median_graph(), &t.graph()).is_some());
        // single ground point realizes as a single element
        let pt = Representation {
            ground_tokens: vec!["x".into()],
            walls: vec![],
        };
        assert_eq!(realize_representation("pt", &pt).unwrap().algebra.n(), 1);
    }

    #[test]
    fn representation_variants_of_the_even_simplex() {
        // four points, pairwise distance 2, realized by two wall systems
        let singles = Representation {
            ground_tokens: (0..4).map(|i| format!("x{}", i)).collect(),
            walls: (0..4).map(|i| BitSet::singleton(4, i)).collect(),
        };
        let star_alg = realize_representation("simplex_star", &singles).unwrap();
        let bips = Representation {
            ground_tokens: (0..4).map(|i| format!("x{}", i)).collect(),
            walls: vec![
                BitSet::from_indices(4, &[0, 1]),
                BitSet::from_indices(4, &[0, 2]),
                BitSet::from_indices(4, &[0, 3]),
            ],
        };
        let cube_alg = realize_representation("simplex_cube", &bips).unwrap();
        for r in [&star_alg, &cube_alg] {
            for x in 0..4 {
                for y in x + 1..4 {
                    assert_eq!(r.algebra.distance(r.iota[x], r.iota[y]), 2);
                }
            }
        }
        assert_eq!(star_alg.algebra.n(), 5);
        assert_eq!(cube_alg.algebra.n(), 8);
        assert!(crate::iso::graph_iso(
            &star_alg.algebra.median_graph(),
            &cube_alg.algebra.median_graph()
        )
        .is_none());
    }

    #[test]
    fn representation_rejects_bad_walls() {
        let rep = Representation {
            ground_tokens: vec!["x".into(), "y".into()],
            walls: vec![BitSet::new(2)],
        };
        assert!(realize_representation("bad", &rep).is_err());
        let rep = Representation {
            ground_tokens: vec!["x".into(), "y".into()],
            walls: vec![BitSet::singleton(2, 0), BitSet::singleton(2, 1)],
        };
        // complement pair
        assert!(realize_representation("bad2", &rep).is_err());
    }

    #[test]
    fn pattern_checks() {
        let c2 = crate::median::cube("c2", 2);
        let d: Vec<Vec<u64>> = (0..4)
            .map(|x| (0..4).map(|y| c2.distance(x, y) as u64).collect())
            .collect();
        assert!(pattern_check(&d).unwrap().0);
        let d = vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]];
        let (ok, w) = pattern_check(&d).unwrap();
        assert!(!ok && w == Some((0, 1, 2)));
        assert!(pattern_check(&[vec![0]]).unwrap().0);
        assert!(pattern_check(&[vec![0, 5], vec![5, 1]]).is_err());
    }

    #[test]
    fn window_z_halfline() {
        let spec = SageevSpec {
            group: WindowGroup::Z,
            set: WindowSet::HalfLine,
            radius: 3,
        };
        let w = sageev_window(&spec).unwrap();
        assert_eq!(w.algebra.n(), 7);
        assert_eq!(w.algebra.hyperplanes().len(), 6);
        assert_eq!(w.algebra.median_graph().edge_count(), 6);
        assert!(w
            .shifts
            .iter()
            .any(|(g, d)| g == "1" && *d == ShiftDirection::Shrinks));
        assert_eq!(w.orbit_counts, vec![2, 4, 6]);
        // the all-positive-tails orientation is boundary-unstable,
        // principal orientations are fine
        assert!(!w.tail_foundedness().founded);
        let zero = w.ball_tokens.iter().position(|t| t == "0").unwrap();
        assert!(w.principal_foundedness(zero).founded);
    }

    #[test]
    fn window_z_evens_rejected() {
        let spec = SageevSpec {
            group: WindowGroup::Z,
            set: WindowSet::Evens,
            radius: 3,
        };
        assert!(matches!(
            sageev_window(&spec),
            Err(ConstructError::EndProxy(_))
        ));
    }

    #[test]
    fn window_f2_prefix() {
        let spec = SageevSpec {
            group: WindowGroup::F2,
            set: WindowSet::Prefix('a'),
            radius: 2,
        };
        let w = sageev_window(&spec).unwrap();
        // the window algebra is a tree fragment
        assert!(w.algebra.median_graph().is_tree());
        assert!(w
            .shifts
            .iter()
            .any(|(g, d)| g == "a" && *d == ShiftDirection::Shrinks));
        // shifts imply strictly growing hyperplane counts across radii
        assert!(w.orbit_counts.windows(2).all(|p| p[0] < p[1]));
    }
}
