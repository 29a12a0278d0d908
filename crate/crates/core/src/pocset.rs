//! Finite poc sets: a partial order with least element 0 and an
//! order-reversing involution `*` such that `a <= a*` forces `a = 0`.
//!
//! Elements are indices with the two halves of a pair adjacent: element
//! `2i` and its star `2i + 1`. Indices 0 and 1 are the improper bounds
//! 0 and 0^. This makes `star` an xor and lets order rows live in bit sets.

use crate::bits::BitSet;
use crate::graph::SimpleGraph;
use std::fmt;
use thiserror::Error;

pub type Elem = usize;

pub const ZERO: Elem = 0;
pub const ZERO_STAR: Elem = 1;

pub const DEFAULT_ULTRAFILTER_PAIR_LIMIT: usize = 24;
pub const DEFAULT_CHROMATIC_PAIR_LIMIT: usize = 20;

#[derive(Debug, Error)]
pub enum PocError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("poc axioms violated:\n{0}")]
    Invalid(ValidationReport),
    #[error("element {0} is improper")]
    Improper(String),
    #[error("{0} is not a filter base: contains {1} <= {2}*")]
    NotFilterBase(String, String, String),
    #[error("filter bases and filters are nonempty; got the empty set")]
    EmptySubset,
    #[error("element {0} (or its star) already present in the base")]
    AlreadyPresent(String),
    #[error("{0} proper pairs exceed the configured limit {1}")]
    LimitExceeded(usize, usize),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Which of the mutually exclusive comparabilities relates two elements.
/// `Transverse` means none of the four nesting relations holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationKind {
    Equal,
    StarEqual,
    Below,
    Above,
    BelowStar,
    AboveStar,
    Transverse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PocViolation {
    /// a <= b and b <= a with a != b.
    Antisymmetry(String, String),
    /// a <= a* for proper a.
    ProperSelfBelowStar(String),
    /// a <= b without b* <= a*.
    StarDuality(String, String),
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<PocViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for v in &self.violations {
            match v {
                PocViolation::Antisymmetry(a, b) => writeln!(
                    f,
                    "antisymmetry: {} <= {} <= {} with {} != {}",
                    a, b, a, a, b
                )?,
                PocViolation::ProperSelfBelowStar(a) => {
                    writeln!(f, "proper element below its star: {} <= {}^", a, a)?
                }
                PocViolation::StarDuality(a, b) => {
                    writeln!(f, "order not *-dual on ({}, {})", a, b)?
                }
            }
        }
        Ok(())
    }
}

/// Flags describing where a subset sits in the filter hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SubsetClass {
    pub orientable: bool,
    pub orientation: bool,
    pub upper_set: bool,
    pub lower_set: bool,
    pub filter_base: bool,
    pub filter: bool,
    pub ultrafilter: bool,
    pub ideal_base: bool,
    pub ideal: bool,
}

/// Outcome of the filter-base extension step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtensionResult {
    /// Some b in B has b < a, so a is forced.
    Case1(BitSet),
    /// Some b in B has b < a*, so a* is forced.
    Case2(BitSet),
    /// Both extensions are filter bases.
    Case3(BitSet, BitSet),
}

#[derive(Clone)]
pub struct PocSet {
    name: String,
    tokens: Vec<String>,
    /// `leq[a]` is the set of b with a <= b.
    leq: Vec<BitSet>,
}

impl fmt::Debug for PocSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PocSet({}, {} pairs)", self.name, self.n_pairs())
    }
}

pub fn star(e: Elem) -> Elem {
    e ^ 1
}

impl PocSet {
    /// Builds a poc set from proper pair base tokens and declared relations.
    /// Relations are closed under reflexivity, transitivity, the `*`-dual
    /// rule and the 0/0^ bounds before validation; antisymmetry failures and
    /// proper `a <= a*` are rejected, not repaired.
    pub fn from_relations(
        name: &str,
        pair_tokens: Vec<String>,
        relations: &[(Elem, Elem)],
    ) -> Result<PocSet, PocError> {
        let n = 2 + 2 * pair_tokens.len();
        let mut tokens = Vec::with_capacity(n);
        tokens.push("0".to_string());
        tokens.push("0^".to_string());
        for t in &pair_tokens {
            tokens.push(t.clone());
            tokens.push(format!("{}^", t));
        }
        let mut leq = vec![BitSet::new(n); n];
        for a in 0..n {
            leq[a].insert(a);
            leq[ZERO].insert(a);
            leq[a].insert(ZERO_STAR);
        }
        for &(a, b) in relations {
            assert!(a < n && b < n, "relation element out of range");
            leq[a].insert(b);
            leq[star(b)].insert(star(a));
        }
        // Warshall closure; rows are bit sets so each join is O(n/64).
        for k in 0..n {
            for a in 0..n {
                if leq[a].contains(k) {
                    let row = leq[k].clone();
                    leq[a].union_with(&row);
                }
            }
        }
        let poc = PocSet {
            name: name.to_string(),
            tokens,
            leq,
        };
        let report = poc.validate();
        if report.is_valid() {
            Ok(poc)
        } else {
            Err(PocError::Invalid(report))
        }
    }

    /// Re-checks the axioms on the stored order. Empty report iff valid.
    pub fn validate(&self) -> ValidationReport {
        let n = self.n_elements();
        let mut report = ValidationReport::default();
        for a in 0..n {
            for b in 0..n {
                if a != b && self.leq_raw(a, b) && self.leq_raw(b, a) {
                    if a < b {
                        report.violations.push(PocViolation::Antisymmetry(
                            self.token(a).into(),
                            self.token(b).into(),
                        ));
                    }
                }
                if self.leq_raw(a, b) && !self.leq_raw(star(b), star(a)) {
                    report.violations.push(PocViolation::StarDuality(
                        self.token(a).into(),
                        self.token(b).into(),
                    ));
                }
            }
            if a >= 2 && self.leq_raw(a, star(a)) {
                report
                    .violations
                    .push(PocViolation::ProperSelfBelowStar(self.token(a).into()));
            }
        }
        report
    }

    fn leq_raw(&self, a: Elem, b: Elem) -> bool {
        self.leq[a].contains(b)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_elements(&self) -> usize {
        self.tokens.len()
    }

    pub fn n_pairs(&self) -> usize {
        self.tokens.len() / 2 - 1
    }

    pub fn token(&self, e: Elem) -> &str {
        &self.tokens[e]
    }

    pub fn star(&self, e: Elem) -> Elem {
        star(e)
    }

    pub fn is_proper(&self, e: Elem) -> bool {
        e >= 2
    }

    pub fn proper_elements(&self) -> impl Iterator<Item = Elem> {
        2..self.n_elements()
    }

    /// Proper pair index (0-based) of a proper element.
    pub fn pair_of(&self, e: Elem) -> usize {
        debug_assert!(e >= 2);
        e / 2 - 1
    }

    /// The two elements of proper pair `p`: (base, starred).
    pub fn pair_elems(&self, p: usize) -> (Elem, Elem) {
        (2 * (p + 1), 2 * (p + 1) + 1)
    }

    pub fn elem_by_token(&self, tok: &str) -> Option<Elem> {
        self.tokens.iter().position(|t| t == tok)
    }

    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        self.leq_raw(a, b)
    }

    pub fn lt(&self, a: Elem, b: Elem) -> bool {
        a != b && self.leq_raw(a, b)
    }

    pub fn comparable(&self, a: Elem, b: Elem) -> bool {
        self.leq_raw(a, b) || self.leq_raw(b, a)
    }

    /// Set of b with a <= b.
    pub fn up_row(&self, a: Elem) -> &BitSet {
        &self.leq[a]
    }

    /// Set of b with b <= a.
    pub fn down_set(&self, a: Elem) -> BitSet {
        let n = self.n_elements();
        let mut s = BitSet::new(n);
        for b in 0..n {
            if self.leq_raw(b, a) {
                s.insert(b);
            }
        }
        s
    }

    /// The unique comparability relating two proper elements, or Transverse.
    pub fn relation(&self, a: Elem, b: Elem) -> Result<RelationKind, PocError> {
        if !self.is_proper(a) {
            return Err(PocError::Improper(self.token(a).into()));
        }
        if !self.is_proper(b) {
            return Err(PocError::Improper(self.token(b).into()));
        }
        Ok(if a == b {
            RelationKind::Equal
        } else if a == star(b) {
            RelationKind::StarEqual
        } else if self.lt(a, b) {
            RelationKind::Below
        } else if self.lt(b, a) {
            RelationKind::Above
        } else if self.lt(a, star(b)) {
            RelationKind::BelowStar
        } else if self.lt(star(b), a) {
            RelationKind::AboveStar
        } else {
            RelationKind::Transverse
        })
    }

    pub fn nested(&self, a: Elem, b: Elem) -> bool {
        !self.transverse(a, b)
    }

    pub fn transverse(&self, a: Elem, b: Elem) -> bool {
        matches!(self.relation(a, b), Ok(RelationKind::Transverse))
    }

    fn fmt_subset(&self, s: &BitSet) -> String {
        let toks: Vec<&str> = s.iter().map(|e| self.token(e)).collect();
        format!("{{{}}}", toks.join(","))
    }

    /// Every flag of the filter hierarchy, each checked from its definition.
    pub fn classify_subset(&self, s: &BitSet) -> SubsetClass {
        let n = self.n_elements();
        let mut c = SubsetClass::default();
        let star_img = {
            let mut t = BitSet::new(n);
            for e in s.iter() {
                t.insert(star(e));
            }
            t
        };
        c.orientable = !s.intersects(&star_img);
        c.orientation = c.orientable && s.count() * 2 == n;
        c.upper_set = s.iter().all(|a| self.leq[a].is_subset(s));
        c.lower_set = s.iter().all(|a| self.down_set(a).is_subset(s));
        c.filter_base = s
            .iter()
            .all(|a| s.iter().all(|b| !self.leq_raw(a, star(b))));
        c.ideal_base = s
            .iter()
            .all(|a| s.iter().all(|b| !self.leq_raw(star(a), b)));
        c.filter = !s.is_empty() && c.upper_set && c.orientable;
        c.ideal = !s.is_empty() && c.lower_set && c.orientable;
        c.ultrafilter = c.orientation && c.upper_set;
        c
    }

    fn require_filter_base(&self, b: &BitSet) -> Result<(), PocError> {
        for x in b.iter() {
            for y in b.iter() {
                if self.leq_raw(x, star(y)) {
                    return Err(PocError::NotFilterBase(
                        self.fmt_subset(b),
                        self.token(x).into(),
                        self.token(y).into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The extension step: given a filter base B and a with a, a* not in B,
    /// produce the forced extension or both candidates.
    pub fn extend_filter_base(&self, b: &BitSet, a: Elem) -> Result<ExtensionResult, PocError> {
        if !self.is_proper(a) {
            return Err(PocError::Improper(self.token(a).into()));
        }
        self.require_filter_base(b)?;
        if b.contains(a) || b.contains(star(a)) {
            return Err(PocError::AlreadyPresent(self.token(a).into()));
        }
        let case1 = b.iter().any(|x| self.lt(x, a));
        let case2 = b.iter().any(|x| self.lt(x, star(a)));
        if case1 && case2 {
            return Err(PocError::Internal(
                "extension cases 1 and 2 fired together on a filter base".into(),
            ));
        }
        let with = |e: Elem| {
            let mut s = b.clone();
            s.insert(e);
            s
        };
        Ok(if case1 {
            ExtensionResult::Case1(with(a))
        } else if case2 {
            ExtensionResult::Case2(with(star(a)))
        } else {
            ExtensionResult::Case3(with(a), with(star(a)))
        })
    }

    /// Upward closure of a filter base: the smallest filter containing it.
    pub fn up_closure(&self, b: &BitSet) -> Result<BitSet, PocError> {
        if b.is_empty() {
            return Err(PocError::EmptySubset);
        }
        self.require_filter_base(b)?;
        let mut out = BitSet::new(self.n_elements());
        for x in b.iter() {
            out.union_with(&self.leq[x]);
        }
        Ok(out)
    }

    /// All ultrafilters, ordered by the orientation bit-vector read as an
    /// integer with pair i contributing bit i. Backtracking over pairs with
    /// filter-base pruning; each result contains 0^.
    pub fn ultrafilters(&self, pair_limit: usize) -> Result<Vec<BitSet>, PocError> {
        let np = self.n_pairs();
        if np > pair_limit {
            return Err(PocError::LimitExceeded(np, pair_limit));
        }
        let n = self.n_elements();
        // conflict[c]: elements x that cannot coexist with c in a filter base
        let conflict: Vec<BitSet> = (0..n)
            .map(|c| {
                let mut s = self.down_set(star(c));
                for x in 0..n {
                    if self.leq_raw(c, star(x)) {
                        s.insert(x);
                    }
                }
                s
            })
            .collect();
        let mut out = Vec::new();
        let mut chosen = BitSet::new(n);
        chosen.insert(ZERO_STAR);
        fn rec(
            p: usize,
            np: usize,
            poc: &PocSet,
            conflict: &[BitSet],
            chosen: &mut BitSet,
            out: &mut Vec<BitSet>,
        ) {
            if p == np {
                out.push(chosen.clone());
                return;
            }
            let (base, starred) = poc.pair_elems(p);
            for cand in [base, starred] {
                if !chosen.intersects(&conflict[cand]) {
                    chosen.insert(cand);
                    rec(p + 1, np, poc, conflict, chosen, out);
                    chosen.remove(cand);
                }
            }
        }
        rec(0, np, self, &conflict, &mut chosen, &mut out);
        // orientation value: bit i set iff pair i chose its starred element
        let value = |u: &BitSet| -> u128 {
            let mut v: u128 = 1;
            for p in 0..np {
                let (_, starred) = self.pair_elems(p);
                if u.contains(starred) {
                    v |= 1 << (p + 1);
                }
            }
            v
        };
        out.sort_by_key(|u| value(u));
        for u in &out {
            debug_assert!(self.classify_subset(u).ultrafilter);
        }
        Ok(out)
    }

    /// Vertices are proper pairs, edge iff transverse.
    pub fn transversality_graph(&self) -> SimpleGraph {
        let np = self.n_pairs();
        let labels: Vec<String> = (0..np)
            .map(|p| self.token(self.pair_elems(p).0).to_string())
            .collect();
        let mut g = SimpleGraph::new(&format!("T_{}", self.name), labels);
        for p in 0..np {
            for q in p + 1..np {
                if self.transverse(self.pair_elems(p).0, self.pair_elems(q).0) {
                    g.add_edge(p, q);
                }
            }
        }
        g
    }

    /// Complement of the transversality graph.
    pub fn nesting_graph(&self) -> SimpleGraph {
        let mut g = self.transversality_graph().complement();
        g.name = format!("N_{}", self.name);
        g
    }

    /// Connected components of the nesting graph, as pair-index lists.
    pub fn prime_summands(&self) -> Vec<Vec<usize>> {
        if self.n_pairs() == 0 {
            return Vec::new();
        }
        self.nesting_graph().components()
    }

    /// (dimension, length): max transverse set and max proper chain.
    /// Finite poc sets are always of type omega.
    pub fn dimension_length(&self) -> (usize, usize, bool) {
        let dim = self.transversality_graph().max_clique().len();
        // longest chain of proper elements in the strict order
        let n = self.n_elements();
        let mut memo = vec![0usize; n];
        let mut order: Vec<Elem> = self.proper_elements().collect();
        order.sort_by_key(|&a| self.up_row(a).count());
        // elements with fewer ups are higher; process top down
        let mut len = 0;
        for &a in &order {
            let mut best = 1;
            for b in self.proper_elements() {
                if self.lt(a, b) {
                    best = best.max(1 + memo[b]);
                }
            }
            memo[a] = best;
            len = len.max(best);
        }
        (dim, len, true)
    }

    /// Tree dimension: the chromatic number of the transversality graph.
    /// Exact below the pair limit, greedy upper bound above it.
    pub fn tree_dimension(
        &self,
        exact: bool,
        pair_limit: usize,
    ) -> Result<(usize, bool), PocError> {
        let tp = self.transversality_graph();
        if exact {
            if self.n_pairs() > pair_limit {
                return Err(PocError::LimitExceeded(self.n_pairs(), pair_limit));
            }
            Ok((tp.chromatic_number(), true))
        } else {
            Ok((tp.greedy_colouring(), false))
        }
    }

    /// Binary test: does the proper part split as O and O* with no element
    /// of O comparable to any element of O*? Equivalent to two-colouring
    /// the constraint graph with an edge x-y whenever x is comparable to y*
    /// (plus the pair edges x-x*). The returned walk is diagnostic.
    pub fn is_binary(&self) -> (bool, Option<Vec<Elem>>) {
        let labels: Vec<String> = self.tokens.clone();
        let mut g = SimpleGraph::new("binary-constraints", labels);
        for a in self.proper_elements() {
            if a % 2 == 0 {
                g.add_edge(a, star(a));
            }
            for b in self.proper_elements() {
                if b <= a || b == star(a) {
                    continue;
                }
                if self.comparable(a, star(b)) {
                    g.add_edge(a, b);
                }
            }
        }
        match g.bipartition() {
            Ok(_) => (true, None),
            Err(walk) => (false, Some(walk)),
        }
    }
}

/// Builds the poc set of Proposition-style half spaces over a simple graph:
/// ground X = {z} + V + E, with A_v = {v} + incident edges. Its
/// transversality graph is isomorphic to the input.
pub fn poc_from_graph(g: &SimpleGraph) -> PocSet {
    let nv = g.n();
    let tokens: Vec<String> = (0..nv).map(|v| format!("A{}", g.label(v))).collect();
    let mut relations = Vec::new();
    for v in 0..nv {
        for w in 0..nv {
            if v != w && !g.has_edge(v, w) {
                // A_v <= A_w^*
                let a = 2 * (v + 1);
                let bstar = 2 * (w + 1) + 1;
                relations.push((a, bstar));
            }
        }
    }
    PocSet::from_relations(&format!("poc_{}", g.name), tokens, &relations)
        .expect("construction always yields a valid poc set")
}

/// Parses the `.poc` text format: `pocset <name>`, `elem <tok>`,
/// `le <x> <y>`, `#` comments. Tokens may carry the `^` star suffix.
pub fn parse_poc_source(text: &str) -> Result<PocSet, PocError> {
    let mut name = String::from("poc");
    let mut pair_tokens: Vec<String> = Vec::new();
    let mut relations: Vec<(String, String, usize)> = Vec::new();
    for (lno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        match it.next().unwrap() {
            "pocset" => {
                name = it
                    .next()
                    .ok_or_else(|| PocError::Parse {
                        line: lno + 1,
                        msg: "missing name".into(),
                    })?
                    .to_string();
            }
            "elem" => {
                let t = it.next().ok_or_else(|| PocError::Parse {
                    line: lno + 1,
                    msg: "elem needs a token".into(),
                })?;
                if t.contains('^') {
                    return Err(PocError::Parse {
                        line: lno + 1,
                        msg: format!("element token `{}` may not contain `^`", t),
                    });
                }
                if t == "0" || pair_tokens.iter().any(|p| p == t) {
                    return Err(PocError::Parse {
                        line: lno + 1,
                        msg: format!("duplicate or reserved token `{}`", t),
                    });
                }
                pair_tokens.push(t.to_string());
            }
            "le" => {
                let x = it.next().ok_or_else(|| PocError::Parse {
                    line: lno + 1,
                    msg: "le needs two tokens".into(),
                })?;
                let y = it.next().ok_or_else(|| PocError::Parse {
                    line: lno + 1,
                    msg: "le needs two tokens".into(),
                })?;
                relations.push((x.to_string(), y.to_string(), lno + 1));
            }
            other => {
                return Err(PocError::Parse {
                    line: lno + 1,
                    msg: format!("unknown directive `{}`", other),
                })
            }
        }
    }
    let resolve = |tok: &str, line: usize| -> Result<Elem, PocError> {
        let (base, starred) = match tok.strip_suffix('^') {
            Some(b) => (b, true),
            None => (tok, false),
        };
        let idx = if base == "0" {
            0
        } else {
            2 + 2 * pair_tokens
                .iter()
                .position(|p| p == base)
                .ok_or_else(|| PocError::Parse {
                    line,
                    msg: format!("unknown element `{}`", tok),
                })?
        };
        Ok(idx + starred as usize)
    };
    let mut rels = Vec::new();
    for (x, y, line) in &relations {
        rels.push((resolve(x, *line)?, resolve(y, *line)?));
    }
    PocSet::from_relations(&name, pair_tokens, &rels)
}

/// Emits the `.poc` format; `le` lines list the covering relations of the
/// proper part so the output reparses to the same closure.
pub fn emit_poc_source(p: &PocSet) -> String {
    let mut out = format!("pocset {}\n", p.name());
    for pr in 0..p.n_pairs() {
        out.push_str(&format!("elem {}\n", p.token(p.pair_elems(pr).0)));
    }
    for a in p.proper_elements() {
        for b in p.proper_elements() {
            if p.lt(a, b) {
                // covering pair: nothing proper strictly between
                let between = p
                    .proper_elements()
                    .any(|c| c != a && c != b && p.lt(a, c) && p.lt(c, b));
                if !between {
                    out.push_str(&format!("le {} {}\n", p.token(a), p.token(b)));
                }
            }
        }
    }
    out
}


#[cfg(test)]
mod tests {
    use super::tests_support::*;
    use super::*;

    #[test]
    fn parse_examples() {
        let p = chain_ab();
        assert_eq!(p.n_elements(), 6);
        let a = p.elem_by_token("a").unwrap();
        let b = p.elem_by_token("b").unwrap();
        assert!(p.lt(a, b));
        assert!(p.lt(star(b), star(a)));

        let err = parse_poc_source("pocset bad\nelem a\nle a a^\n").unwrap_err();
        match err {
            PocError::Invalid(rep) => {
                assert!(rep
                    .violations
                    .iter()
                    .any(|v| matches!(v, PocViolation::ProperSelfBelowStar(_))));
            }
            other => panic!("expected invalid, got {:?}", other),
        }

        let o = orthogonal(3);
        assert_eq!(o.n_elements(), 8);
    }

    #[test]
    fn canonical_two_is_valid_and_antisymmetry_rejected() {
        let two = parse_poc_source("pocset two\n").unwrap();
        assert_eq!(two.n_elements(), 2);
        assert!(two.validate().is_valid());

        let err = parse_poc_source("pocset bad\nelem a\nelem b\nle a b\nle b a\n").unwrap_err();
        match err {
            PocError::Invalid(rep) => assert!(rep
                .violations
                .iter()
                .any(|v| matches!(v, PocViolation::Antisymmetry(_, _)))),
            other => panic!("expected invalid, got {:?}", other),
        }
    }

    #[test]
    fn relations() {
        let p = chain_ab();
        let a = p.elem_by_token("a").unwrap();
        let b = p.elem_by_token("b").unwrap();
        assert_eq!(p.relation(a, b).unwrap(), RelationKind::Below);
        assert_eq!(p.relation(b, a).unwrap(), RelationKind::Above);
        assert_eq!(p.relation(a, star(a)).unwrap(), RelationKind::StarEqual);
        assert_eq!(p.relation(a, star(b)).unwrap(), RelationKind::BelowStar);
        let o = orthogonal(3);
        let x = o.elem_by_token("x0").unwrap();
        let y = o.elem_by_token("x1").unwrap();
        assert_eq!(o.relation(x, y).unwrap(), RelationKind::Transverse);
        assert!(p.relation(ZERO, a).is_err());
    }

    #[test]
    fn star_duality_of_relation() {
        // starring both arguments preserves the comparabilities except that
        // the two mixed cases trade places
        let dual = |r: RelationKind| match r {
            RelationKind::BelowStar => RelationKind::AboveStar,
            RelationKind::AboveStar => RelationKind::BelowStar,
            other => other,
        };
        for p in [chain_ab(), orthogonal(3), starlet3()] {
            for a in p.proper_elements() {
                for b in p.proper_elements() {
                    let r1 = p.relation(a, b).unwrap();
                    let r2 = p.relation(star(b), star(a)).unwrap();
                    assert_eq!(dual(r1), r2, "relation must be *-dual");
                }
            }
        }
    }

    #[test]
    fn extension_cases() {
        let p = chain_ab();
        let a = p.elem_by_token("a").unwrap();
        let b = p.elem_by_token("b").unwrap();
        let base = BitSet::from_indices(p.n_elements(), &[a]);
        match p.extend_filter_base(&base, b).unwrap() {
            ExtensionResult::Case1(s) => {
                assert!(s.contains(a) && s.contains(b));
            }
            other => panic!("expected case 1, got {:?}", other),
        }
        // from the top of the chain, a is not forced
        let base_b = BitSet::from_indices(p.n_elements(), &[b]);
        match p.extend_filter_base(&base_b, a).unwrap() {
            ExtensionResult::Case3(s1, s2) => {
                assert!(p.classify_subset(&s1).filter_base);
                assert!(p.classify_subset(&s2).filter_base);
            }
            other => panic!("expected case 3, got {:?}", other),
        }

        let o = orthogonal(3);
        let x = o.elem_by_token("x0").unwrap();
        let y = o.elem_by_token("x1").unwrap();
        let base = BitSet::from_indices(o.n_elements(), &[x]);
        match o.extend_filter_base(&base, y).unwrap() {
            ExtensionResult::Case3(s1, s2) => {
                assert!(s1.contains(y));
                assert!(s2.contains(star(y)));
                assert!(o.classify_subset(&s1).filter_base);
                assert!(o.classify_subset(&s2).filter_base);
            }
            other => panic!("expected case 3, got {:?}", other),
        }
    }

    #[test]
    fn up_closure_examples() {
        let p = chain_ab();
        let a = p.elem_by_token("a").unwrap();
        let b = p.elem_by_token("b").unwrap();
        let up = p
            .up_closure(&BitSet::from_indices(p.n_elements(), &[a]))
            .unwrap();
        assert_eq!(up.to_vec(), vec![ZERO_STAR, a, b]);
        assert!(matches!(
            p.up_closure(&BitSet::new(p.n_elements())),
            Err(PocError::EmptySubset)
        ));
        let o = orthogonal(3);
        let x = o.elem_by_token("x0").unwrap();
        let y = o.elem_by_token("x1").unwrap();
        let up = o
            .up_closure(&BitSet::from_indices(o.n_elements(), &[x, y]))
            .unwrap();
        assert_eq!(up.count(), 3); // x, y, 0^
    }

    #[test]
    fn classify_examples() {
        let p = chain_ab();
        let a = p.elem_by_token("a").unwrap();
        let b = p.elem_by_token("b").unwrap();
        let uf = BitSet::from_indices(p.n_elements(), &[ZERO_STAR, a, b]);
        let c = p.classify_subset(&uf);
        assert!(c.ultrafilter && c.filter && c.filter_base);
        // {a, b^} fails (UF 2): a <= b = (b^)^
        let bad = BitSet::from_indices(p.n_elements(), &[a, star(b)]);
        assert!(!p.classify_subset(&bad).filter_base);
        // {0^} is a filter, not an ultrafilter here
        let f = BitSet::from_indices(p.n_elements(), &[ZERO_STAR]);
        let c = p.classify_subset(&f);
        assert!(c.filter && !c.ultrafilter);
    }

    #[test]
    fn ultrafilter_counts() {
        assert_eq!(orthogonal(3).ultrafilters(24).unwrap().len(), 8);
        assert_eq!(chain_ab().ultrafilters(24).unwrap().len(), 3);
        let two = parse_poc_source("pocset two\n").unwrap();
        let ufs = two.ultrafilters(24).unwrap();
        assert_eq!(ufs.len(), 1);
        assert_eq!(ufs[0].to_vec(), vec![ZERO_STAR]);
    }

    /// Oracle: all 2^n orientations filtered by the filter-base condition.
    pub fn brute_ultrafilters(p: &PocSet) -> Vec<BitSet> {
        let np = p.n_pairs();
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
        out
    }

    #[test]
    fn ultrafilters_match_brute_force() {
        for p in [chain_ab(), orthogonal(3), starlet3()] {
            let mut brute = brute_ultrafilters(&p);
            let fast = p.ultrafilters(24).unwrap();
            brute.sort_by(|a, b| a.cmp_numeric(b));
            let mut fast_sorted = fast.clone();
            fast_sorted.sort_by(|a, b| a.cmp_numeric(b));
            assert_eq!(brute, fast_sorted);
        }
    }

    #[test]
    fn graphs_and_summands() {
        let o = orthogonal(3);
        let tp = o.transversality_graph();
        assert_eq!(tp.edge_count(), 3); // K3
        assert_eq!(o.prime_summands().len(), 3);
        let p = chain_ab();
        assert_eq!(p.transversality_graph().edge_count(), 0);
        assert_eq!(p.prime_summands().len(), 1);
        let two = parse_poc_source("pocset two\n").unwrap();
        assert!(two.prime_summands().is_empty());
    }

    #[test]
    fn dims_and_lengths() {
        assert_eq!(orthogonal(3).dimension_length(), (3, 1, true));
        assert_eq!(chain_ab().dimension_length(), (1, 2, true));
        let two = parse_poc_source("pocset two\n").unwrap();
        assert_eq!(two.dimension_length(), (0, 0, true));
    }

    #[test]
    fn tree_dimensions() {
        assert_eq!(orthogonal(3).tree_dimension(true, 20).unwrap(), (3, true));
        assert_eq!(chain_ab().tree_dimension(true, 20).unwrap(), (1, true));
        // C5 gives chromatic number 3 while dimension is 2
        let mut c5 = SimpleGraph::with_n("c5", 5);
        for i in 0..5 {
            c5.add_edge(i, (i + 1) % 5);
        }
        let p = poc_from_graph(&c5);
        assert_eq!(p.dimension_length().0, 2);
        assert_eq!(p.tree_dimension(true, 20).unwrap(), (3, true));
    }

    #[test]
    fn poc_from_graph_cases() {
        let mut k2 = SimpleGraph::with_n("k2", 2);
        k2.add_edge(0, 1);
        let p = poc_from_graph(&k2);
        assert_eq!(p.n_pairs(), 2);
        let (a, _) = p.pair_elems(0);
        let (b, _) = p.pair_elems(1);
        assert!(p.transverse(a, b));

        let c5 = {
            let mut g = SimpleGraph::with_n("c5", 5);
            for i in 0..5 {
                g.add_edge(i, (i + 1) % 5);
            }
            g
        };
        let p = poc_from_graph(&c5);
        assert!(crate::iso::graph_iso(&p.transversality_graph(), &c5).is_some());
    }

    #[test]
    fn binary_tests() {
        assert!(chain_ab().is_binary().0);
        assert!(orthogonal(3).is_binary().0);
        let (flag, walk) = starlet3().is_binary();
        assert!(!flag);
        let walk = walk.unwrap();
        assert_eq!(walk.len() % 2, 1);
    }

    #[test]
    fn emit_reparse() {
        for p in [chain_ab(), orthogonal(3), starlet3()] {
            let q = parse_poc_source(&emit_poc_source(&p)).unwrap();
            assert!(crate::iso::poc_iso(&p, &q).is_some());
        }
    }
}
