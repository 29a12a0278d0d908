//! Finite median algebras in a canonical half-space form.
//!
//! After validation every algebra is stored as its carrier plus the full
//! list of half spaces (subsets convex with convex complement, including
//! the empty set and the carrier). Each element carries its half-space
//! membership vector; the median of three elements is the unique element
//! whose vector is the bitwise majority of the three vectors. Since this
//! exhibits the algebra as a subalgebra of a power set, rebuilding the
//! operation from the half spaces and comparing against the input table
//! is a complete proof of the median axioms.

use crate::bits::BitSet;
use crate::graph::SimpleGraph;
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

pub const DEFAULT_TABLE_CAP: usize = 64;
pub const DEFAULT_CLOSURE_LIMIT: usize = 100_000;
/// Above this carrier size the full triple-by-triple integrity check is
/// skipped at construction time; a missing median later is a hard error.
const VERIFY_TRIPLES_CAP: usize = 220;

#[derive(Debug, Error)]
pub enum MedError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("median axioms violated:\n{0}")]
    Invalid(MedValidationReport),
    #[error("median table incomplete: no entry for ({0}, {1}, {2})")]
    IncompleteTable(String, String, String),
    #[error("table cap exceeded: {0} elements > {1} (raise the cap to validate larger tables)")]
    TableCap(usize, usize),
    #[error("median closure exceeded the size limit {0}")]
    ClosureLimit(usize),
    #[error("expected a nonempty convex set")]
    EmptyConvexSet,
    #[error("set {0} is not convex")]
    NotConvex(String),
    #[error("half space {0} is improper")]
    ImproperHalfspace(usize),
    #[error("carrier must be nonempty")]
    EmptyCarrier,
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Default)]
pub struct MedValidationReport {
    /// witness (x, y, z) with m(x,y,z), m(x,z,y), m(y,z,x) not all equal
    pub med1: Option<(usize, usize, usize)>,
    /// witness (x, y) with m(x,x,y) != x
    pub med2: Option<(usize, usize)>,
    /// witness (x, y, z, u, v) violating the short distributive law
    pub med3: Option<(usize, usize, usize, usize, usize)>,
}

impl MedValidationReport {
    pub fn is_valid(&self) -> bool {
        self.med1.is_none() && self.med2.is_none() && self.med3.is_none()
    }
}

impl fmt::Display for MedValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((x, y, z)) = self.med1 {
            writeln!(f, "symmetry fails on ({}, {}, {})", x, y, z)?;
        }
        if let Some((x, y)) = self.med2 {
            writeln!(f, "m({}, {}, {}) != {}", x, x, y, x)?;
        }
        if let Some((x, y, z, u, v)) = self.med3 {
            writeln!(
                f,
                "distributivity fails on ({}, {}, {}; {}, {})",
                x, y, z, u, v
            )?;
        }
        Ok(())
    }
}

/// Exhaustive axiom check on an explicit table. The distributive axiom is
/// O(n^5), so callers cap the carrier size.
pub fn validate_median_table(
    n: usize,
    med: &dyn Fn(usize, usize, usize) -> usize,
) -> MedValidationReport {
    let mut report = MedValidationReport::default();
    'med2: for x in 0..n {
        for y in 0..n {
            if med(x, x, y) != x {
                report.med2 = Some((x, y));
                break 'med2;
            }
        }
    }
    'med1: for x in 0..n {
        for y in x..n {
            for z in y..n {
                let m = med(x, y, z);
                if med(x, z, y) != m
                    || med(y, z, x) != m
                    || med(y, x, z) != m
                    || med(z, x, y) != m
                    || med(z, y, x) != m
                {
                    report.med1 = Some((x, y, z));
                    break 'med1;
                }
            }
        }
    }
    'med3: for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let w = med(x, y, z);
                for u in 0..n {
                    for v in 0..n {
                        if med(w, u, v) != med(x, med(y, u, v), med(z, u, v)) {
                            report.med3 = Some((x, y, z, u, v));
                            break 'med3;
                        }
                    }
                }
            }
        }
    }
    report
}

#[derive(Clone)]
pub struct MedianAlgebra {
    name: String,
    tokens: Vec<String>,
    /// All half spaces, sorted by their numeric mask; [0] is the empty set.
    halfspaces: Vec<BitSet>,
    complement: Vec<usize>,
    /// Proper hyperplanes as (h, h*) with h the numerically smaller side.
    hyperplanes: Vec<(usize, usize)>,
    hyperplane_of: Vec<Option<usize>>,
    /// Per element: membership vector over half-space indices.
    vectors: Vec<BitSet>,
    lookup: HashMap<BitSet, usize>,
    /// Ground representation when built from subsets of a ground set.
    masks: Option<(usize, Vec<BitSet>)>,
}

impl fmt::Debug for MedianAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MedianAlgebra({}, {} elements, {} hyperplanes)",
            self.name,
            self.n(),
            self.hyperplanes.len()
        )
    }
}

impl MedianAlgebra {
    // ----- construction -----------------------------------------------

    /// Builds the canonical form from any median operation. Half spaces are
    /// found through the edges of the median graph: for an edge (u, v) the
    /// fibre {w | m(u,v,w) = u} of the retraction onto [u, v] is a half
    /// space, and every proper half space arises this way.
    fn build(
        name: &str,
        tokens: Vec<String>,
        med: &dyn Fn(usize, usize, usize) -> usize,
        masks: Option<(usize, Vec<BitSet>)>,
    ) -> Result<MedianAlgebra, MedError> {
        let n = tokens.len();
        if n == 0 {
            return Err(MedError::EmptyCarrier);
        }
        let mut seen: HashMap<BitSet, ()> = HashMap::new();
        let mut halfspaces = vec![BitSet::new(n), BitSet::full(n)];
        seen.insert(halfspaces[0].clone(), ());
        seen.insert(halfspaces[1].clone(), ());
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let mut is_edge = true;
                for w in 0..n {
                    if w != u && w != v && med(u, v, w) == w {
                        is_edge = false;
                        break;
                    }
                }
                if !is_edge {
                    continue;
                }
                let mut h = BitSet::new(n);
                for w in 0..n {
                    if med(u, v, w) == u {
                        h.insert(w);
                    }
                }
                if seen.insert(h.clone(), ()).is_none() {
                    halfspaces.push(h);
                }
            }
        }
        halfspaces.sort_by(|a, b| a.cmp_numeric(b));
        let index: HashMap<BitSet, usize> = halfspaces
            .iter()
            .enumerate()
            .map(|(i, h)| (h.clone(), i))
            .collect();
        let complement: Vec<usize> = halfspaces.iter().map(|h| index[&h.complement()]).collect();
        let mut hyperplanes = Vec::new();
        let mut hyperplane_of = vec![None; halfspaces.len()];
        for (i, &c) in complement.iter().enumerate() {
            if i < c && !halfspaces[i].is_empty() {
                hyperplane_of[i] = Some(hyperplanes.len());
                hyperplane_of[c] = Some(hyperplanes.len());
                hyperplanes.push((i, c));
            }
        }
        let vectors: Vec<BitSet> = (0..n)
            .map(|x| {
                let mut v = BitSet::new(halfspaces.len());
                for (i, h) in halfspaces.iter().enumerate() {
                    if h.contains(x) {
                        v.insert(i);
                    }
                }
                v
            })
            .collect();
        let mut lookup = HashMap::new();
        for (x, v) in vectors.iter().enumerate() {
            if lookup.insert(v.clone(), x).is_some() {
                return Err(MedError::Internal(
                    "half spaces fail to separate two elements".into(),
                ));
            }
        }
        let alg = MedianAlgebra {
            name: name.to_string(),
            tokens,
            halfspaces,
            complement,
            hyperplanes,
            hyperplane_of,
            vectors,
            lookup,
            masks,
        };
        if n <= VERIFY_TRIPLES_CAP {
            for x in 0..n {
                for y in x..n {
                    for z in y..n {
                        if alg.med(x, y, z) != med(x, y, z) {
                            return Err(MedError::Internal(format!(
                                "half-space form disagrees with the input median at ({}, {}, {})",
                                x, y, z
                            )));
                        }
                    }
                }
            }
        }
        Ok(alg)
    }

    /// Validates an explicit table exhaustively, then canonicalizes.
    pub fn from_table(
        name: &str,
        tokens: Vec<String>,
        table: &dyn Fn(usize, usize, usize) -> usize,
        cap: usize,
    ) -> Result<MedianAlgebra, MedError> {
        let n = tokens.len();
        if n > cap {
            return Err(MedError::TableCap(n, cap));
        }
        let report = validate_median_table(n, table);
        if !report.is_valid() {
            return Err(MedError::Invalid(report));
        }
        Self::build(name, tokens, table, None)
    }

    /// Canonicalizes a table that is already known to be a median operation
    /// (quotients, recognized graphs). The half-space rebuild still proves
    /// the axioms, so no O(n^5) sweep is run.
    pub fn from_valid_table(
        name: &str,
        tokens: Vec<String>,
        table: &dyn Fn(usize, usize, usize) -> usize,
    ) -> Result<MedianAlgebra, MedError> {
        Self::build(name, tokens, table, None)
    }

    /// Median closure of generators inside the power set of `0..ground`,
    /// with the Boolean median operation.
    pub fn from_subsets(
        name: &str,
        ground: usize,
        gens: &[BitSet],
        tokens: Option<Vec<String>>,
        limit: usize,
    ) -> Result<MedianAlgebra, MedError> {
        let mut members: Vec<BitSet> = Vec::new();
        let mut index: HashMap<BitSet, usize> = HashMap::new();
        for g in gens {
            assert_eq!(g.len(), ground);
            if !index.contains_key(g) {
                index.insert(g.clone(), members.len());
                members.push(g.clone());
            }
        }
        if members.is_empty() {
            return Err(MedError::EmptyCarrier);
        }
        let mut frontier_start = 0;
        loop {
            let len = members.len();
            let mut added = false;
            for i in 0..len {
                for j in i..len {
                    let ij = members[i].intersection(&members[j]);
                    let uij = members[i].union(&members[j]);
                    for k in j.max(frontier_start)..len {
                        // the Boolean median (i&j)|(j&k)|(k&i)
                        let mut m = members[k].clone();
                        m.intersect_with(&uij);
                        m.union_with(&ij);
                        if !index.contains_key(&m) {
                            if members.len() >= limit {
                                return Err(MedError::ClosureLimit(limit));
                            }
                            index.insert(m.clone(), members.len());
                            members.push(m.clone());
                            added = true;
                        }
                    }
                }
            }
            if !added {
                break;
            }
            frontier_start = len;
        }
        Self::from_members(name, ground, members, tokens)
    }

    /// As `from_subsets` but the family is already median closed (by a
    /// theorem on the caller's side, e.g. the full ultrafilter family of a
    /// poc set). Closure is re-verified exhaustively on small carriers.
    pub fn from_subsets_closed(
        name: &str,
        ground: usize,
        members: Vec<BitSet>,
        tokens: Option<Vec<String>>,
    ) -> Result<MedianAlgebra, MedError> {
        if members.len() <= VERIFY_TRIPLES_CAP {
            let index: HashMap<&BitSet, ()> = members.iter().map(|m| (m, ())).collect();
            for i in 0..members.len() {
                for j in i..members.len() {
                    for k in j..members.len() {
                        let ij = members[i].intersection(&members[j]);
                        let mut m = members[i].union(&members[j]);
                        m.intersect_with(&members[k]);
                        m.union_with(&ij);
                        if !index.contains_key(&m) {
                            return Err(MedError::Internal(
                                "family is not closed under the Boolean median".into(),
                            ));
                        }
                    }
                }
            }
        }
        Self::from_members(name, ground, members, tokens)
    }

    fn from_members(
        name: &str,
        ground: usize,
        mut members: Vec<BitSet>,
        tokens: Option<Vec<String>>,
    ) -> Result<MedianAlgebra, MedError> {
        if members.is_empty() {
            return Err(MedError::EmptyCarrier);
        }
        members.sort_by(|a, b| a.cmp_numeric(b));
        members.dedup();
        let tokens = match tokens {
            Some(t) => {
                assert_eq!(t.len(), members.len());
                t
            }
            None => members.iter().map(|m| format!("s{}", m.to_hex())).collect(),
        };
        let index: HashMap<BitSet, usize> = members
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let members_ref = members.clone();
        let med = move |x: usize, y: usize, z: usize| -> usize {
            let ij = members_ref[x].intersection(&members_ref[y]);
            let mut m = members_ref[x].union(&members_ref[y]);
            m.intersect_with(&members_ref[z]);
            m.union_with(&ij);
            *index
                .get(&m)
                .unwrap_or_else(|| panic!("median closure is missing an element"))
        };
        Self::build(name, tokens, &med, Some((ground, members)))
    }

    /// Direct product, realized on the disjoint union of the two grounds.
    pub fn product(name: &str, a: &MedianAlgebra, b: &MedianAlgebra) -> MedianAlgebra {
        let (ga, ma) = a.ground_masks();
        let (gb, mb) = b.ground_masks();
        let ground = ga + gb;
        let mut members = Vec::with_capacity(a.n() * b.n());
        let mut tokens = Vec::with_capacity(a.n() * b.n());
        for x in 0..a.n() {
            for y in 0..b.n() {
                let mut m = BitSet::new(ground);
                for i in ma[x].iter() {
                    m.insert(i);
                }
                for j in mb[y].iter() {
                    m.insert(ga + j);
                }
                members.push(m);
                tokens.push(format!("{}|{}", a.token(x), b.token(y)));
            }
        }
        // sort together to keep the token pairing
        let mut paired: Vec<(BitSet, String)> = members.into_iter().zip(tokens).collect();
        paired.sort_by(|x, y| x.0.cmp_numeric(&y.0));
        let (members, tokens): (Vec<_>, Vec<_>) = paired.into_iter().unzip();
        Self::from_subsets_closed(name, ground, members, Some(tokens))
            .expect("product of median algebras is median")
    }

    /// Ground masks; falls back to the half-space membership vectors, which
    /// always give a faithful power-set representation.
    pub fn ground_masks(&self) -> (usize, Vec<BitSet>) {
        match &self.masks {
            Some((g, m)) => (*g, m.clone()),
            None => (self.halfspaces.len(), self.vectors.clone()),
        }
    }

    // ----- accessors ----------------------------------------------------

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.tokens.len()
    }

    pub fn token(&self, x: usize) -> &str {
        &self.tokens[x]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn elem_by_token(&self, tok: &str) -> Option<usize> {
        self.tokens.iter().position(|t| t == tok)
    }

    pub fn halfspaces(&self) -> &[BitSet] {
        &self.halfspaces
    }

    pub fn halfspace(&self, h: usize) -> &BitSet {
        &self.halfspaces[h]
    }

    pub fn complement_of(&self, h: usize) -> usize {
        self.complement[h]
    }

    pub fn is_proper(&self, h: usize) -> bool {
        !self.halfspaces[h].is_empty() && !self.halfspaces[h].is_full()
    }

    pub fn proper_halfspaces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.halfspaces.len()).filter(|&h| self.is_proper(h))
    }

    /// Proper hyperplanes (h, h*), h the numerically smaller side.
    pub fn hyperplanes(&self) -> &[(usize, usize)] {
        &self.hyperplanes
    }

    pub fn hyperplane_of(&self, h: usize) -> Option<usize> {
        self.hyperplane_of[h]
    }

    pub fn vector(&self, x: usize) -> &BitSet {
        &self.vectors[x]
    }

    pub fn elem_by_vector(&self, v: &BitSet) -> Option<usize> {
        self.lookup.get(v).copied()
    }

    // ----- the operation and the metric ---------------------------------

    pub fn med(&self, x: usize, y: usize, z: usize) -> usize {
        let mut v = self.vectors[x].union(&self.vectors[y]);
        v.intersect_with(&self.vectors[z]);
        let mut ij = self.vectors[x].clone();
        ij.intersect_with(&self.vectors[y]);
        v.union_with(&ij);
        *self
            .lookup
            .get(&v)
            .unwrap_or_else(|| panic!("median of ({}, {}, {}) missing from the carrier", x, y, z))
    }

    pub fn distance(&self, x: usize, y: usize) -> usize {
        self.vectors[x]
            .symmetric_difference(&self.vectors[y])
            .count()
            / 2
    }

    /// Oriented separator: half spaces containing x but not y.
    pub fn separator_elems(&self, x: usize, y: usize) -> BitSet {
        let mut s = self.vectors[x].clone();
        s.difference_with(&self.vectors[y]);
        s
    }

    /// Hyperplanes separating x from y.
    pub fn delta_bar(&self, x: usize, y: usize) -> BitSet {
        let mut out = BitSet::new(self.hyperplanes.len());
        for h in self.separator_elems(x, y).iter() {
            if let Some(i) = self.hyperplane_of[h] {
                out.insert(i);
            }
        }
        out
    }

    /// Half spaces containing all of X and none of Y.
    pub fn separator_sets(&self, xs: &BitSet, ys: &BitSet) -> Vec<usize> {
        (0..self.halfspaces.len())
            .filter(|&h| xs.is_subset(&self.halfspaces[h]) && !ys.intersects(&self.halfspaces[h]))
            .collect()
    }

    pub fn interval(&self, x: usize, y: usize) -> BitSet {
        let lo = self.vectors[x].intersection(&self.vectors[y]);
        let hi = self.vectors[x].union(&self.vectors[y]);
        let mut out = BitSet::new(self.n());
        for z in 0..self.n() {
            if lo.is_subset(&self.vectors[z]) && self.vectors[z].is_subset(&hi) {
                out.insert(z);
            }
        }
        out
    }

    /// A set is convex iff it equals the intersection of the half spaces
    /// containing it.
    pub fn is_convex(&self, c: &BitSet) -> bool {
        if c.is_empty() {
            return true;
        }
        let mut inter = BitSet::full(self.n());
        for h in &self.halfspaces {
            if c.is_subset(h) {
                inter.intersect_with(h);
            }
        }
        inter == *c
    }

    /// Smallest convex superset, built by joining one point at a time in
    /// carrier order.
    pub fn convex_hull(&self, xs: &BitSet) -> BitSet {
        let mut points = xs.iter();
        let first = match points.next() {
            Some(p) => p,
            None => return BitSet::new(self.n()),
        };
        let mut hull = BitSet::singleton(self.n(), first);
        for p in points {
            let mut next = BitSet::new(self.n());
            for c in hull.iter() {
                next.union_with(&self.interval(c, p));
            }
            hull = next;
        }
        debug_assert!(self.is_convex(&hull));
        hull
    }

    /// Median graph: edge iff the separator is a single hyperplane.
    pub fn median_graph(&self) -> SimpleGraph {
        let mut g = SimpleGraph::new(&self.name, self.tokens.clone());
        for x in 0..self.n() {
            for y in x + 1..self.n() {
                if self.distance(x, y) == 1 {
                    g.add_edge(x, y);
                }
            }
        }
        g
    }

    /// The unique point of a nonempty convex set closest to y.
    pub fn nearest_point(&self, c: &BitSet, y: usize) -> Result<usize, MedError> {
        if c.is_empty() {
            return Err(MedError::EmptyConvexSet);
        }
        if !self.is_convex(c) {
            return Err(MedError::NotConvex(format!("{:?}", c)));
        }
        let mut best = usize::MAX;
        let mut best_d = usize::MAX;
        let mut ties = 0;
        for x in c.iter() {
            let d = self.distance(x, y);
            if d < best_d {
                best = x;
                best_d = d;
                ties = 1;
            } else if d == best_d {
                ties += 1;
            }
        }
        if ties != 1 {
            return Err(MedError::Internal(
                "distance minimizer on a convex set is not unique".into(),
            ));
        }
        for z in c.iter() {
            if !self.interval(y, z).contains(best) {
                return Err(MedError::Internal(
                    "distance minimizer is not a gate for the convex set".into(),
                ));
            }
        }
        Ok(best)
    }

    /// Gate pair for two nonempty convex sets: (x, y) with
    /// Delta(x, y) = Delta(X, Y).
    pub fn gate(&self, xs: &BitSet, ys: &BitSet) -> Result<(usize, usize), MedError> {
        if xs.is_empty() || ys.is_empty() {
            return Err(MedError::EmptyConvexSet);
        }
        if !self.is_convex(xs) {
            return Err(MedError::NotConvex(format!("{:?}", xs)));
        }
        if !self.is_convex(ys) {
            return Err(MedError::NotConvex(format!("{:?}", ys)));
        }
        let (x, y) = if xs.intersects(ys) {
            let common = xs.intersection(ys).first().unwrap();
            (common, common)
        } else {
            let x0 = xs.first().unwrap();
            let y1 = self.nearest_point(ys, x0)?;
            let x1 = self.nearest_point(xs, y1)?;
            (x1, y1)
        };
        // Delta(x, y) must equal Delta(X, Y)
        let from_pair = self.separator_elems(x, y);
        let from_sets = self.separator_sets(xs, ys);
        if from_pair.to_vec() != from_sets {
            return Err(MedError::Internal("gate separator mismatch".into()));
        }
        Ok((x, y))
    }

    /// Boundary of a proper half space: points with a neighbour across.
    /// Computed from both characterizations, which must agree; the pairing
    /// x -> x' is checked to be a median isomorphism onto the far boundary.
    pub fn boundary(&self, h: usize) -> Result<BitSet, MedError> {
        if !self.is_proper(h) {
            return Err(MedError::ImproperHalfspace(h));
        }
        let hs = &self.halfspaces[h];
        let co = self.complement[h];
        let mut by_metric = BitSet::new(self.n());
        let mut partner = vec![usize::MAX; self.n()];
        for x in hs.iter() {
            for y in self.halfspaces[co].iter() {
                if self.distance(x, y) == 1 {
                    by_metric.insert(x);
                    partner[x] = y;
                }
            }
        }
        let mut by_order = hs.clone();
        for (j, half) in self.halfspaces.iter().enumerate() {
            if j != co && self.halfspaces[co].is_subset(half) && self.halfspaces[co] != *half {
                by_order.intersect_with(half);
            }
        }
        if by_metric != by_order {
            return Err(MedError::Internal(
                "boundary characterizations disagree".into(),
            ));
        }
        // the crossing pairing is a median isomorphism onto the far boundary
        let far = self.boundary_raw(co);
        let image: Vec<usize> = by_metric.iter().map(|x| partner[x]).collect();
        let mut image_sorted = image.clone();
        image_sorted.sort_unstable();
        if image_sorted != far.to_vec() {
            return Err(MedError::Internal("boundary pairing is not onto".into()));
        }
        let verts: Vec<usize> = by_metric.to_vec();
        for &a in &verts {
            for &b in &verts {
                for &c in &verts {
                    let m = self.med(a, b, c);
                    if partner[m] != self.med(partner[a], partner[b], partner[c]) {
                        return Err(MedError::Internal(
                            "boundary pairing is not a median morphism".into(),
                        ));
                    }
                }
            }
        }
        Ok(by_metric)
    }

    fn boundary_raw(&self, h: usize) -> BitSet {
        let co = self.complement[h];
        let mut out = BitSet::new(self.n());
        for x in self.halfspaces[h].iter() {
            for y in self.halfspaces[co].iter() {
                if self.distance(x, y) == 1 {
                    out.insert(x);
                }
            }
        }
        out
    }

    /// Hyperplanes cutting a set (both sides met).
    pub fn cutting_hyperplanes(&self, c: &BitSet) -> Vec<usize> {
        self.hyperplanes
            .iter()
            .enumerate()
            .filter(|(_, &(h, hc))| {
                c.intersects(&self.halfspaces[h]) && c.intersects(&self.halfspaces[hc])
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Transversality of two hyperplanes: all four corners are inhabited.
    pub fn hyperplanes_transverse(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (h, hc) = self.hyperplanes[i];
        let (k, kc) = self.hyperplanes[j];
        [(h, k), (h, kc), (hc, k), (hc, kc)]
            .iter()
            .all(|&(a, b)| self.halfspaces[a].intersects(&self.halfspaces[b]))
    }

    /// Is the set a subcube: nonempty, convex, cutting hyperplanes pairwise
    /// transverse on the set, and of size 2^k.
    pub fn is_cube(&self, c: &BitSet) -> bool {
        if c.is_empty() || !self.is_convex(c) {
            return false;
        }
        let cuts = self.cutting_hyperplanes(c);
        for (a, &i) in cuts.iter().enumerate() {
            for &j in &cuts[a + 1..] {
                let (h, hc) = self.hyperplanes[i];
                let (k, kc) = self.hyperplanes[j];
                let ok = [(h, k), (h, kc), (hc, k), (hc, kc)].iter().all(|&(p, q)| {
                    let mut t = c.clone();
                    t.intersect_with(&self.halfspaces[p]);
                    t.intersect_with(&self.halfspaces[q]);
                    !t.is_empty()
                });
                if !ok {
                    return false;
                }
            }
        }
        c.count() == 1usize << cuts.len()
    }

    /// Star at a vertex: points whose interval to v is a cube.
    pub fn star_at(&self, v: usize) -> BitSet {
        let mut out = BitSet::new(self.n());
        for x in 0..self.n() {
            if self.is_cube(&self.interval(x, v)) {
                out.insert(x);
            }
        }
        out
    }

    /// Minimal half spaces of the oriented separator Delta(x, v).
    pub fn min_separator(&self, x: usize, v: usize) -> Vec<usize> {
        let sep: Vec<usize> = self.separator_elems(x, v).to_vec();
        sep.iter()
            .copied()
            .filter(|&h| {
                !sep.iter()
                    .any(|&j| j != h && self.halfspaces[j].is_subset(&self.halfspaces[h]))
            })
            .collect()
    }

    /// Minimal elements of ev(x): the proper half spaces containing x that
    /// contain no smaller half space containing x. These cut the star at x.
    pub fn min_ev(&self, x: usize) -> Vec<usize> {
        let mine: Vec<usize> = self
            .proper_halfspaces()
            .filter(|&h| self.halfspaces[h].contains(x))
            .collect();
        mine.iter()
            .copied()
            .filter(|&h| {
                !mine
                    .iter()
                    .any(|&j| j != h && self.halfspaces[j].is_subset(&self.halfspaces[h]))
            })
            .collect()
    }
}

/// The minimal-separator encoding based at v, with its verification data.
#[derive(Debug, Clone)]
pub struct TauEncoding {
    /// Per element: minimal separating hyperplanes towards the base point.
    pub images: Vec<Vec<usize>>,
    pub bijective: bool,
    /// Census rows (|image|, distance, extendable) with counts, in the
    /// canonical order: by size, then farther first, then extendable first.
    pub census: Vec<((usize, usize, bool), usize)>,
}

impl MedianAlgebra {
    /// tau(x) = Min(Delta(x, v)) as hyperplane sets; checked to be a
    /// bijection onto the transverse subsets of the hyperplane set.
    pub fn tau_encoding(&self, v: usize) -> TauEncoding {
        let nh = self.hyperplanes.len();
        let mut images = Vec::with_capacity(self.n());
        for x in 0..self.n() {
            let mut img: Vec<usize> = self
                .min_separator(x, v)
                .into_iter()
                .map(|h| self.hyperplane_of[h].expect("proper half space"))
                .collect();
            img.sort_unstable();
            img.dedup();
            images.push(img);
        }
        // transversality graph of the hyperplanes
        let mut tg = SimpleGraph::with_n("hyp", nh);
        for i in 0..nh {
            for j in i + 1..nh {
                if self.hyperplanes_transverse(i, j) {
                    tg.add_edge(i, j);
                }
            }
        }
        for img in &images {
            debug_assert!(tg.is_clique(img));
        }
        let mut seen: std::collections::HashSet<Vec<usize>> = std::collections::HashSet::new();
        let injective = images.iter().all(|img| seen.insert(img.clone()));
        let all_transverse = tg.all_cliques();
        let bijective = injective && all_transverse.len() == self.n() && {
            let have: std::collections::HashSet<_> = images.iter().cloned().collect();
            all_transverse.iter().all(|c| have.contains(c))
        };
        let mut census_map: std::collections::BTreeMap<(usize, usize, bool), usize> =
            std::collections::BTreeMap::new();
        for (x, img) in images.iter().enumerate() {
            let d = self.distance(x, v);
            let ext = (0..nh).any(|g| !img.contains(&g) && img.iter().all(|&i| tg.has_edge(g, i)));
            *census_map.entry((img.len(), d, ext)).or_insert(0) += 1;
        }
        let mut census: Vec<_> = census_map.into_iter().collect();
        census.sort_by(|a, b| {
            let ka = (a.0 .0, std::cmp::Reverse(a.0 .1), std::cmp::Reverse(a.0 .2));
            let kb = (b.0 .0, std::cmp::Reverse(b.0 .1), std::cmp::Reverse(b.0 .2));
            ka.cmp(&kb)
        });
        TauEncoding {
            images,
            bijective,
            census,
        }
    }
}

// ----- parsing -----------------------------------------------------------

/// `.med` format, explicit table:
///   median <name> / elems t1 t2 ... / m x y z w
/// or power-set subalgebra closure:
///   median-sub <name> over <k> / gen <hex mask>
pub fn parse_median_source(text: &str, table_cap: usize) -> Result<MedianAlgebra, MedError> {
    #[derive(PartialEq)]
    enum Mode {
        Unset,
        Table,
        Sub(usize),
    }
    let mut mode = Mode::Unset;
    let mut name = String::from("median");
    let mut tokens: Vec<String> = Vec::new();
    let mut entries: HashMap<(usize, usize, usize), (usize, usize)> = HashMap::new();
    let mut gens: Vec<BitSet> = Vec::new();
    for (lno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "median" => {
                name = toks
                    .get(1)
                    .ok_or_else(|| MedError::Parse {
                        line: lno + 1,
                        msg: "missing name".into(),
                    })?
                    .to_string();
                mode = Mode::Table;
            }
            "median-sub" => {
                if toks.len() != 4 || toks[2] != "over" {
                    return Err(MedError::Parse {
                        line: lno + 1,
                        msg: "expected `median-sub <name> over <k>`".into(),
                    });
                }
                name = toks[1].to_string();
                let k: usize = toks[3].parse().map_err(|_| MedError::Parse {
                    line: lno + 1,
                    msg: "bad ground size".into(),
                })?;
                mode = Mode::Sub(k);
            }
            "elems" => {
                if mode != Mode::Table {
                    return Err(MedError::Parse {
                        line: lno + 1,
                        msg: "elems only valid in table form".into(),
                    });
                }
                for t in &toks[1..] {
                    if tokens.iter().any(|x| x == t) {
                        return Err(MedError::Parse {
                            line: lno + 1,
                            msg: format!("duplicate element `{}`", t),
                        });
                    }
                    tokens.push(t.to_string());
                }
            }
            "m" => {
                if toks.len() != 5 {
                    return Err(MedError::Parse {
                        line: lno + 1,
                        msg: "expected `m x y z w`".into(),
                    });
                }
                let find = |t: &str| -> Result<usize, MedError> {
                    tokens.iter().position(|x| x == t).ok_or(MedError::Parse {
                        line: lno + 1,
                        msg: format!("unknown element `{}`", t),
                    })
                };
                let (x, y, z, w) = (
                    find(toks[1])?,
                    find(toks[2])?,
                    find(toks[3])?,
                    find(toks[4])?,
                );
                let mut key = [x, y, z];
                key.sort_unstable();
                let key = (key[0], key[1], key[2]);
                if let Some(&(prev, prev_line)) = entries.get(&key) {
                    if prev != w {
                        return Err(MedError::Parse {
                            line: lno + 1,
                            msg: format!(
                                "conflicting entries for a triple (earlier value on line {})",
                                prev_line
                            ),
                        });
                    }
                } else {
                    entries.insert(key, (w, lno + 1));
                }
            }
            "gen" => {
                let k = match mode {
                    Mode::Sub(k) => k,
                    _ => {
                        return Err(MedError::Parse {
                            line: lno + 1,
                            msg: "gen only valid in median-sub form".into(),
                        })
                    }
                };
                let mask = toks.get(1).ok_or_else(|| MedError::Parse {
                    line: lno + 1,
                    msg: "gen needs a hex mask".into(),
                })?;
                let bs = BitSet::from_hex(k, mask).ok_or_else(|| MedError::Parse {
                    line: lno + 1,
                    msg: format!("bad mask `{}` for ground size {}", mask, k),
                })?;
                gens.push(bs);
            }
            other => {
                return Err(MedError::Parse {
                    line: lno + 1,
                    msg: format!("unknown directive `{}`", other),
                })
            }
        }
    }
    match mode {
        Mode::Table => {
            let n = tokens.len();
            // degenerate triples default to the forced values
            let mut missing: Option<(usize, usize, usize)> = None;
            for x in 0..n {
                for y in x..n {
                    for z in y..n {
                        if x != y && y != z && x != z && !entries.contains_key(&(x, y, z)) {
                            missing = Some((x, y, z));
                        }
                    }
                }
            }
            if let Some((x, y, z)) = missing {
                return Err(MedError::IncompleteTable(
                    tokens[x].clone(),
                    tokens[y].clone(),
                    tokens[z].clone(),
                ));
            }
            let table = move |x: usize, y: usize, z: usize| -> usize {
                let mut key = [x, y, z];
                key.sort_unstable();
                match entries.get(&(key[0], key[1], key[2])) {
                    Some(&(w, _)) => w,
                    None => {
                        // unspecified degenerate triple: repeated argument wins
                        if x == y || x == z {
                            x
                        } else {
                            y
                        }
                    }
                }
            };
            MedianAlgebra::from_table(&name, tokens, &table, table_cap)
        }
        Mode::Sub(k) => MedianAlgebra::from_subsets(&name, k, &gens, None, DEFAULT_CLOSURE_LIMIT),
        Mode::Unset => Err(MedError::Parse {
            line: 1,
            msg: "missing `median` or `median-sub` header".into(),
        }),
    }
}

/// Emits the subalgebra form using the ground representation.
pub fn emit_median_source(m: &MedianAlgebra) -> String {
    let (ground, masks) = m.ground_masks();
    let mut out = format!("median-sub {} over {}\n", m.name(), ground);
    for mask in &masks {
        out.push_str(&format!("gen {}\n", mask.to_hex()));
    }
    out
}

// ----- small built-in algebras (used by tests and the CLI corpus) --------

/// The n-point linear median algebra on 0 < 1 < ... < n-1.
pub fn linear(name: &str, n: usize) -> MedianAlgebra {
    let tokens = (0..n).map(|i| format!("v{}", i)).collect();
    let med = |x: usize, y: usize, z: usize| {
        let mut v = [x, y, z];
        v.sort_unstable();
        v[1]
    };
    MedianAlgebra::from_table(name, tokens, &med, DEFAULT_TABLE_CAP.max(n)).unwrap()
}

/// The k-cube as the power set of a k-element ground set.
pub fn cube(name: &str, k: usize) -> MedianAlgebra {
    let members: Vec<BitSet> = (0..1u32 << k)
        .map(|mask| {
            let mut b = BitSet::new(k);
            for i in 0..k {
                if mask >> i & 1 == 1 {
                    b.insert(i);
                }
            }
            b
        })
        .collect();
    MedianAlgebra::from_subsets_closed(name, k, members, None).unwrap()
}

/// Tripod: three leaves glued to a centre.
pub fn tripod(name: &str) -> MedianAlgebra {
    let gens = [
        BitSet::from_indices(3, &[0]),
        BitSet::from_indices(3, &[1]),
        BitSet::from_indices(3, &[2]),
    ];
    MedianAlgebra::from_subsets(name, 3, &gens, None, DEFAULT_CLOSURE_LIMIT).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_cube_shapes() {
        let l4 = linear("l4", 4);
        assert_eq!(l4.n(), 4);
        // proper half spaces of a chain: the 2(n-1) initial/final segments
        assert_eq!(l4.proper_halfspaces().count(), 6);
        let c2 = cube("c2", 2);
        assert_eq!(c2.proper_halfspaces().count(), 4);
        let c3 = cube("c3", 3);
        assert_eq!(c3.proper_halfspaces().count(), 6);
        assert_eq!(c3.hyperplanes().len(), 3);
    }

    #[test]
    fn singleton_halfspaces() {
        let one = linear("pt", 1);
        assert_eq!(one.halfspaces().len(), 2);
    }

    #[test]
    fn tripod_closure_adds_centre() {
        let t = tripod("t");
        assert_eq!(t.n(), 4);
        let empty = t.elem_by_token("s0").unwrap();
        let a = t.elem_by_token("s1").unwrap();
        let b = t.elem_by_token("s2").unwrap();
        assert_eq!(t.med(a, b, t.elem_by_token("s4").unwrap()), empty);
    }

    #[test]
    fn invalid_table_rejected() {
        // majority vote on a 5-cycle is not a median algebra
        let n = 5;
        let dist = |a: usize, b: usize| {
            let d = (a as i32 - b as i32).rem_euclid(5);
            d.min(5 - d)
        };
        let med = move |x: usize, y: usize, z: usize| {
            // closest point to the others, ties by index: not a median
            (0..n)
                .min_by_key(|&w| (dist(w, x) + dist(w, y) + dist(w, z), w))
                .unwrap()
        };
        match MedianAlgebra::from_table("c5", (0..5).map(|i| i.to_string()).collect(), &med, 64) {
            Err(MedError::Invalid(rep)) => assert!(!rep.is_valid()),
            other => panic!("expected invalid, got {:?}", other.map(|_| ())),
        }

        let bad2 = |x: usize, y: usize, _z: usize| if x == y { (x + 1) % 3 } else { x };
        match MedianAlgebra::from_table("b", (0..3).map(|i| i.to_string()).collect(), &bad2, 64) {
            Err(MedError::Invalid(rep)) => assert!(rep.med2.is_some() || rep.med1.is_some()),
            other => panic!("expected invalid, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn intervals() {
        let c2 = cube("c2", 2);
        let zero = c2.elem_by_token("s0").unwrap();
        let full = c2.elem_by_token("s3").unwrap();
        assert_eq!(c2.interval(zero, full).count(), 4);
        assert_eq!(c2.interval(zero, zero).to_vec(), vec![zero]);
        let t = tripod("t");
        let a = t.elem_by_token("s1").unwrap();
        let b = t.elem_by_token("s2").unwrap();
        let centre = t.elem_by_token("s0").unwrap();
        assert_eq!(t.interval(a, b).to_vec(), vec![centre, a, b]);
    }

    #[test]
    fn hull_and_convexity() {
        let t = tripod("t");
        let leaves = BitSet::from_indices(t.n(), &[1, 2, 3]);
        assert_eq!(t.convex_hull(&leaves).count(), 4);
        let two = BitSet::from_indices(t.n(), &[1, 2]);
        let hull = t.convex_hull(&two);
        assert_eq!(hull, t.interval(1, 2));
        assert_eq!(t.convex_hull(&hull), hull);
    }

    #[test]
    fn separators_and_distance() {
        let c2 = cube("c2", 2);
        let zero = c2.elem_by_token("s0").unwrap();
        let full = c2.elem_by_token("s3").unwrap();
        assert_eq!(c2.separator_elems(zero, full).count(), 2);
        assert_eq!(c2.distance(zero, full), 2);
        assert!(c2
            .separator_sets(&BitSet::singleton(4, zero), &BitSet::singleton(4, zero))
            .is_empty());
        let t = tripod("t");
        let a = t.elem_by_token("s1").unwrap();
        let centre = t.elem_by_token("s0").unwrap();
        let sep = t.separator_sets(
            &BitSet::singleton(t.n(), a),
            &BitSet::singleton(t.n(), centre),
        );
        assert_eq!(sep.len(), 1);
        assert_eq!(t.halfspace(sep[0]).to_vec(), vec![a]);
    }

    #[test]
    fn median_graph_shapes() {
        let c3 = cube("q3", 3);
        let g = c3.median_graph();
        assert_eq!(g.edge_count(), 12);
        assert!(g.is_connected());
        let l4 = linear("l4", 4);
        assert_eq!(l4.median_graph().edge_count(), 3);
        // interval size bounds along the metric
        for m in [&c3, &l4] {
            for x in 0..m.n() {
                for y in 0..m.n() {
                    let d = m.distance(x, y);
                    let sz = m.interval(x, y).count();
                    assert!(d + 1 <= sz && sz <= 1 << d);
                }
            }
        }
    }

    #[test]
    fn nearest_and_gate() {
        let c2 = cube("c2", 2);
        let s0 = c2.elem_by_token("s0").unwrap();
        let s1 = c2.elem_by_token("s1").unwrap();
        let s2 = c2.elem_by_token("s2").unwrap();
        let s3 = c2.elem_by_token("s3").unwrap();
        // y in C
        let c = BitSet::from_indices(4, &[s0, s1]);
        assert_eq!(c2.nearest_point(&c, s1).unwrap(), s1);
        // nearest from the far corner
        assert_eq!(c2.nearest_point(&c, s3).unwrap(), s1);
        // interval retraction is m(x1, x2, y)
        let iv = c2.interval(s0, s1);
        let np = c2.nearest_point(&iv, s3).unwrap();
        assert_eq!(np, c2.med(s0, s1, s3));
        // gates
        let (gx, gy) = c2
            .gate(&BitSet::singleton(4, s0), &BitSet::singleton(4, s3))
            .unwrap();
        assert_eq!((gx, gy), (s0, s3));
        let l4 = linear("l4", 4);
        let (gx, gy) = l4
            .gate(&BitSet::singleton(4, 0), &BitSet::from_indices(4, &[2, 3]))
            .unwrap();
        assert_eq!((gx, gy), (0, 2));
        let err = c2.nearest_point(&BitSet::from_indices(4, &[s1, s2]), s0);
        assert!(matches!(err, Err(MedError::NotConvex(_))));
    }

    #[test]
    fn boundaries() {
        let l3 = linear("l3", 3);
        // H = {v0, v1}
        let h = (0..l3.halfspaces().len())
            .find(|&h| l3.halfspace(h).to_vec() == vec![0, 1])
            .unwrap();
        assert_eq!(l3.boundary(h).unwrap().to_vec(), vec![1]);
        let c2 = cube("c2", 2);
        let h = (0..c2.halfspaces().len())
            .find(|&h| c2.is_proper(h))
            .unwrap();
        assert_eq!(c2.boundary(h).unwrap(), *c2.halfspace(h));
        let t = tripod("t");
        let a = t.elem_by_token("s1").unwrap();
        let h = (0..t.halfspaces().len())
            .find(|&h| t.halfspace(h).to_vec() == vec![a])
            .unwrap();
        assert_eq!(t.boundary(h).unwrap().to_vec(), vec![a]);
        assert!(t.boundary(0).is_err());
    }

    #[test]
    fn stars_and_cubes() {
        let t = tripod("t");
        let centre = t.elem_by_token("s0").unwrap();
        assert_eq!(t.star_at(centre).count(), 4);
        for v in 0..t.n() {
            assert!(t.is_cube(&BitSet::singleton(t.n(), v)));
        }
        let l3 = linear("l3", 3);
        let all = BitSet::full(3);
        assert!(!l3.is_cube(&all));
        let c3 = cube("c3", 3);
        assert!(c3.is_cube(&BitSet::full(8)));
    }

    #[test]
    fn tau_square() {
        let c2 = cube("c2", 2);
        let v = c2.elem_by_token("s0").unwrap();
        let enc = c2.tau_encoding(v);
        assert!(enc.bijective);
        assert!(enc.images[v].is_empty());
        let far = c2.elem_by_token("s3").unwrap();
        assert_eq!(enc.images[far].len(), 2);
    }

    #[test]
    fn parse_table_and_sub() {
        let src = "median sq\nelems a b c d\n\
                   m a b c d\nm a b d d\nm a c d a\nm b c d c\n";
        // this fake table is rejected: not a median algebra
        assert!(parse_median_source(src, 64).is_err());

        let square = "median-sub sq over 2\ngen 0\ngen 1\ngen 2\ngen 3\n";
        let m = parse_median_source(square, 64).unwrap();
        assert_eq!(m.n(), 4);
        assert_eq!(m.hyperplanes().len(), 2);

        let singles = "median-sub tri over 3\ngen 1\ngen 2\ngen 4\n";
        let t = parse_median_source(singles, 64).unwrap();
        assert_eq!(t.n(), 4);

        let reparsed = parse_median_source(&emit_median_source(&t), 64).unwrap();
        assert_eq!(reparsed.n(), t.n());
    }

    #[test]
    fn valid_explicit_table_roundtrip() {
        // the 3-chain as an explicit table
        let mut src = String::from("median l3\nelems x y z\n");
        let med = |a: usize, b: usize, c: usize| {
            let mut v = [a, b, c];
            v.sort_unstable();
            v[1]
        };
        let toks = ["x", "y", "z"];
        for a in 0..3 {
            for b in a..3 {
                for c in b..3 {
                    src.push_str(&format!(
                        "m {} {} {} {}\n",
                        toks[a],
                        toks[b],
                        toks[c],
                        toks[med(a, b, c)]
                    ));
                }
            }
        }
        let m = parse_median_source(&src, 64).unwrap();
        assert_eq!(m.n(), 3);
        assert_eq!(m.proper_halfspaces().count(), 4);
    }

    #[test]
    fn product_shapes() {
        let l3 = linear("l3", 3);
        let e = linear("e", 2);
        let p = MedianAlgebra::product("grid", &l3, &e);
        assert_eq!(p.n(), 6);
        assert_eq!(p.hyperplanes().len(), 3);
        assert_eq!(p.median_graph().edge_count(), 7);
    }

    /// Brute-force half spaces: every subset with convex complement.
    pub fn brute_halfspaces(m: &MedianAlgebra) -> Vec<BitSet> {
        let n = m.n();
        assert!(n <= 16);
        let convex = |c: &BitSet| -> bool {
            for x in c.iter() {
                for y in c.iter() {
                    for z in 0..n {
                        if m.med(x, y, z) != z {
                            continue;
                        }
                        if !c.contains(z) {
                            return false;
                        }
                    }
                }
            }
            true
        };
        let mut out = Vec::new();
        for mask in 0..(1u32 << n) {
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

    #[test]
    fn halfspaces_match_brute_force() {
        for m in [linear("l4", 4), cube("c3", 3), tripod("t")] {
            let brute = brute_halfspaces(&m);
            assert_eq!(brute, m.halfspaces().to_vec());
        }
    }
}
