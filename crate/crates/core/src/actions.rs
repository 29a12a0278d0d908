//! Finite group actions on finite median algebras: validation and closure
//! with word witnesses, orbits, the majority fixed-cube construction,
//! simplicity analysis, the pairing between half spaces and group
//! elements, hyperplane quotients, and the exact Hilbert-space embedding.

use crate::bits::BitSet;
use crate::construct::{SageevWindow, ShiftDirection};
use crate::duality::{congruence_quotient, DualityError};
use crate::median::MedianAlgebra;
use std::collections::HashMap;
use thiserror::Error;

pub const DEFAULT_GROUP_CAP: usize = 10_080;

#[derive(Debug, Error)]
pub enum ActionError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("generator {0} is not a bijection of the carrier")]
    NotBijective(String),
    #[error("generator {0} does not preserve the median: witness ({1}, {2}, {3})")]
    NotAutomorphism(String, usize, usize, usize),
    #[error("group closure exceeded the cap {0}")]
    ClosureCap(usize),
    #[error("half space {0} is improper")]
    ImproperHalfspace(usize),
    #[error(transparent)]
    Duality(#[from] DualityError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// A finite group acting by median automorphisms, closed under
/// composition, every element carrying a shortest word witness.
pub struct GroupAction {
    pub algebra: MedianAlgebra,
    pub generator_names: Vec<String>,
    pub generator_perms: Vec<Vec<usize>>,
    /// all group elements as carrier permutations; index 0 is the identity
    pub elements: Vec<Vec<usize>>,
    /// word witness per element ("1" for the identity)
    pub words: Vec<String>,
    index: HashMap<Vec<usize>, usize>,
    /// per element: the induced permutation of half-space indices
    hs_perm: Vec<Vec<usize>>,
}

fn compose(outer: &[usize], inner: &[usize]) -> Vec<usize> {
    inner.iter().map(|&x| outer[x]).collect()
}

/// Validates generators as median automorphisms and closes them into a
/// finite group, breadth first, so word witnesses have minimal length.
pub fn validate_action(
    m: &MedianAlgebra,
    gens: &[(String, Vec<usize>)],
    cap: usize,
) -> Result<GroupAction, ActionError> {
    let n = m.n();
    for (name, g) in gens {
        if g.len() != n {
            return Err(ActionError::NotBijective(name.clone()));
        }
        let mut seen = vec![false; n];
        for &y in g {
            if y >= n || seen[y] {
                return Err(ActionError::NotBijective(name.clone()));
            }
            seen[y] = true;
        }
        for x in 0..n {
            for y in x..n {
                for z in y..n {
                    if g[m.med(x, y, z)] != m.med(g[x], g[y], g[z]) {
                        return Err(ActionError::NotAutomorphism(name.clone(), x, y, z));
                    }
                }
            }
        }
    }
    let identity: Vec<usize> = (0..n).collect();
    let mut elements = vec![identity.clone()];
    let mut words = vec!["1".to_string()];
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    index.insert(identity, 0);
    let mut head = 0;
    while head < elements.len() {
        for (name, g) in gens {
            let next = compose(g, &elements[head]);
            if !index.contains_key(&next) {
                if elements.len() >= cap {
                    return Err(ActionError::ClosureCap(cap));
                }
                let word = if words[head] == "1" {
                    name.clone()
                } else {
                    format!("{}{}", name, words[head])
                };
                index.insert(next.clone(), elements.len());
                elements.push(next);
                words.push(word);
            }
        }
        head += 1;
    }
    // induced permutations of the half-space list
    let hs_index: HashMap<&BitSet, usize> = m
        .halfspaces()
        .iter()
        .enumerate()
        .map(|(i, h)| (h, i))
        .collect();
    let mut hs_perm = Vec::with_capacity(elements.len());
    for e in &elements {
        let mut perm = Vec::with_capacity(m.halfspaces().len());
        for h in m.halfspaces() {
            let mut img = BitSet::new(n);
            for x in h.iter() {
                img.insert(e[x]);
            }
            let i = hs_index.get(&img).copied().ok_or_else(|| {
                ActionError::Internal("automorphism image of a half space is missing".into())
            })?;
            perm.push(i);
        }
        hs_perm.push(perm);
    }
    Ok(GroupAction {
        algebra: m.clone(),
        generator_names: gens.iter().map(|(n, _)| n.clone()).collect(),
        generator_perms: gens.iter().map(|(_, g)| g.clone()).collect(),
        elements,
        words,
        index,
        hs_perm,
    })
}

impl GroupAction {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn apply(&self, g: usize, x: usize) -> usize {
        self.elements[g][x]
    }

    /// Index of the image half space g(H).
    pub fn apply_halfspace(&self, g: usize, h: usize) -> usize {
        self.hs_perm[g][h]
    }

    pub fn elem_index(&self, perm: &[usize]) -> Option<usize> {
        self.index.get(perm).copied()
    }

    pub fn multiply(&self, g1: usize, g2: usize) -> usize {
        let prod = compose(&self.elements[g1], &self.elements[g2]);
        self.index[&prod]
    }

    pub fn inverse(&self, g: usize) -> usize {
        let e = &self.elements[g];
        let mut inv = vec![0; e.len()];
        for (x, &y) in e.iter().enumerate() {
            inv[y] = x;
        }
        self.index[&inv]
    }

    /// Vertex orbits and hyperplane orbits, each sorted by least member.
    pub fn orbits(&self) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let n = self.algebra.n();
        let mut vseen = vec![false; n];
        let mut vorbits = Vec::new();
        for x in 0..n {
            if vseen[x] {
                continue;
            }
            let mut orbit: Vec<usize> = self.elements.iter().map(|e| e[x]).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &y in &orbit {
                vseen[y] = true;
            }
            vorbits.push(orbit);
        }
        let nh = self.algebra.hyperplanes().len();
        let mut hseen = vec![false; nh];
        let mut horbits = Vec::new();
        for i in 0..nh {
            if hseen[i] {
                continue;
            }
            let (rep, _) = self.algebra.hyperplanes()[i];
            let mut orbit: Vec<usize> = (0..self.order())
                .map(|g| {
                    self.algebra
                        .hyperplane_of(self.hs_perm[g][rep])
                        .expect("proper image")
                })
                .collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &j in &orbit {
                hseen[j] = true;
            }
            horbits.push(orbit);
        }
        (vorbits, horbits)
    }
}

// ----- the fixed cube --------------------------------------------------------

#[derive(Debug)]
pub struct FixedCubeResult {
    /// the invariant cube, as a vertex set
    pub cube: BitSet,
    /// half spaces holding a strict majority of the orbit hull
    pub majority_halfspaces: Vec<usize>,
    pub is_singleton: bool,
}

/// The majority construction: C is the convex hull of one vertex orbit,
/// the half spaces holding a strict majority of C intersect C in a
/// nonempty invariant cube. Every claimed property is asserted.
pub fn fixed_cube(
    action: &GroupAction,
    base: Option<usize>,
) -> Result<FixedCubeResult, ActionError> {
    let m = &action.algebra;
    let n = m.n();
    let base = base.unwrap_or(0);
    let mut orbit = BitSet::new(n);
    for e in &action.elements {
        orbit.insert(e[base]);
    }
    let c = m.convex_hull(&orbit);
    let csize = c.count();
    let majority: Vec<usize> = (0..m.halfspaces().len())
        .filter(|&h| 2 * c.intersection(m.halfspace(h)).count() > csize)
        .collect();
    // counting step: no two majority half spaces have disjoint traces on C
    for &h1 in &majority {
        for &h2 in &majority {
            let mut t = c.intersection(m.halfspace(h1));
            t.intersect_with(m.halfspace(h2));
            if t.is_empty() {
                return Err(ActionError::Internal(
                    "majority half spaces with disjoint traces".into(),
                ));
            }
        }
    }
    let mut w = c.clone();
    for &h in &majority {
        w.intersect_with(m.halfspace(h));
    }
    if w.is_empty() {
        return Err(ActionError::Internal("fixed cube is empty".into()));
    }
    // G-invariance
    for e in &action.elements {
        let mut img = BitSet::new(n);
        for x in w.iter() {
            img.insert(e[x]);
        }
        if img != w {
            return Err(ActionError::Internal("fixed cube is not invariant".into()));
        }
    }
    if !m.is_convex(&w) {
        return Err(ActionError::Internal("fixed cube is not convex".into()));
    }
    if !m.is_cube(&w) {
        return Err(ActionError::Internal("fixed set is not a cube".into()));
    }
    Ok(FixedCubeResult {
        is_singleton: w.count() == 1,
        cube: w,
        majority_halfspaces: majority,
    })
}

// ----- simplicity -------------------------------------------------------------

#[derive(Debug)]
pub struct SimpleAnalysis {
    /// one hyperplane orbit (or none at all)
    pub is_simple: bool,
    /// whether the whole algebra is a cube
    pub algebra_is_cube: bool,
    /// the unique fixed point, when simple and not a cube
    pub fixed_point: Option<usize>,
}

/// A simple action is transitive on hyperplanes; then the algebra is a
/// cube or there is a unique fixed point, which is returned and checked
/// against the majority cube.
pub fn simple_analysis(action: &GroupAction) -> Result<SimpleAnalysis, ActionError> {
    let m = &action.algebra;
    let (_, horbits) = action.orbits();
    let is_simple = horbits.len() <= 1;
    let algebra_is_cube = m.is_cube(&BitSet::full(m.n()));
    let mut fixed_point = None;
    if is_simple && !algebra_is_cube {
        let fixed: Vec<usize> = (0..m.n())
            .filter(|&x| action.elements.iter().all(|e| e[x] == x))
            .collect();
        if fixed.len() != 1 {
            return Err(ActionError::Internal(format!(
                "simple non-cube action with {} fixed points",
                fixed.len()
            )));
        }
        let w = fixed_cube(action, None)?;
        if !w.is_singleton || !w.cube.contains(fixed[0]) {
            return Err(ActionError::Internal(
                "fixed point disagrees with the majority cube".into(),
            ));
        }
        fixed_point = Some(fixed[0]);
    }
    Ok(SimpleAnalysis {
        is_simple,
        algebra_is_cube,
        fixed_point,
    })
}

// ----- the pairing -------------------------------------------------------------

#[derive(Debug)]
pub struct PairingTable {
    pub halfspace: usize,
    pub point: usize,
    /// group element indices g with g(x) in H
    pub members: BitSet,
}

/// G[H, x] = { g | gx in H }, verified against the four structural laws
/// and the translate identity before being returned.
pub fn pairing(action: &GroupAction, h: usize, x: usize) -> Result<PairingTable, ActionError> {
    let m = &action.algebra;
    if !m.is_proper(h) {
        return Err(ActionError::ImproperHalfspace(h));
    }
    let order = action.order();
    let table = |hh: usize, xx: usize| -> BitSet {
        let mut s = BitSet::new(order);
        for (i, e) in action.elements.iter().enumerate() {
            if m.halfspace(hh).contains(e[xx]) {
                s.insert(i);
            }
        }
        s
    };
    let members = table(h, x);
    // (i) g G[H,x] = G[gH, x] and (ii) G[H,x] g^{-1} = G[H, gx]
    for g in 0..order {
        let mut left = BitSet::new(order);
        for i in members.iter() {
            left.insert(action.multiply(g, i));
        }
        if left != table(action.apply_halfspace(g, h), x) {
            return Err(ActionError::Internal("pairing law (i) fails".into()));
        }
        let ginv = action.inverse(g);
        let mut right = BitSet::new(order);
        for i in members.iter() {
            right.insert(action.multiply(i, ginv));
        }
        if right != table(h, action.apply(g, x)) {
            return Err(ActionError::Internal("pairing law (ii) fails".into()));
        }
    }
    // (iii) G[-, x] is a poc morphism: star and monotone
    for h1 in 0..m.halfspaces().len() {
        if table(m.complement_of(h1), x) != table(h1, x).complement() {
            return Err(ActionError::Internal("pairing law (iii) star fails".into()));
        }
        for h2 in 0..m.halfspaces().len() {
            if m.halfspace(h1).is_subset(m.halfspace(h2)) && !table(h1, x).is_subset(&table(h2, x))
            {
                return Err(ActionError::Internal(
                    "pairing law (iii) order fails".into(),
                ));
            }
        }
    }
    // (iv) G[H, -] is a median morphism
    let n = m.n();
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                let lhs = table(h, m.med(a, b, c));
                let ta = table(h, a);
                let tb = table(h, b);
                let tc = table(h, c);
                let mut maj = ta.union(&tb);
                maj.intersect_with(&tc);
                let mut ab = ta.clone();
                ab.intersect_with(&tb);
                maj.union_with(&ab);
                if lhs != maj {
                    return Err(ActionError::Internal("pairing law (iv) fails".into()));
                }
            }
        }
    }
    // translate identity: G[H,x]g1 + G[H,x]g2 picks out the separating
    // translates of the hyperplane
    for g1 in 0..order {
        for g2 in 0..order {
            let mut lhs = BitSet::new(order);
            let g1i = action.inverse(g1);
            let g2i = action.inverse(g2);
            for i in members.iter() {
                lhs.insert(action.multiply(i, g1));
            }
            let mut rhs_side = BitSet::new(order);
            for i in members.iter() {
                rhs_side.insert(action.multiply(i, g2));
            }
            lhs.xor_with(&rhs_side);
            let x1 = action.apply(g1i, x);
            let x2 = action.apply(g2i, x);
            let mut expected = BitSet::new(order);
            for g in 0..order {
                let gi = action.inverse(g);
                let gh = action.apply_halfspace(gi, h);
                let sep = m.halfspace(gh).contains(x1) != m.halfspace(gh).contains(x2);
                if sep {
                    expected.insert(g);
                }
            }
            if lhs != expected {
                return Err(ActionError::Internal("translate identity fails".into()));
            }
        }
    }
    Ok(PairingTable {
        halfspace: h,
        point: x,
        members,
    })
}

// ----- hyperplane quotients ------------------------------------------------------

#[derive(Debug)]
pub struct HyperplaneQuotientReport {
    pub quotient_size: usize,
    pub orbit_size: usize,
    /// the orbit intersection on either side is nonempty (no proper cutting)
    pub common_side: bool,
    /// d_H table between original elements
    pub d_h: Vec<Vec<usize>>,
}

/// Compresses every hyperplane outside the orbit of the given one and
/// re-induces the action on the quotient. The quotient metric must equal
/// the orbit-restricted hyperplane count d_H.
pub fn hyperplane_quotient(
    action: &GroupAction,
    h: usize,
) -> Result<(GroupAction, Vec<usize>, HyperplaneQuotientReport), ActionError> {
    let m = &action.algebra;
    if !m.is_proper(h) {
        return Err(ActionError::ImproperHalfspace(h));
    }
    let nh = m.halfspaces().len();
    let mut in_orbit = BitSet::new(nh);
    for g in 0..action.order() {
        let img = action.apply_halfspace(g, h);
        in_orbit.insert(img);
        in_orbit.insert(m.complement_of(img));
    }
    let hyper_orbit: std::collections::HashSet<usize> =
        in_orbit.iter().filter_map(|i| m.hyperplane_of(i)).collect();
    let mut u = BitSet::new(nh);
    for i in m.proper_halfspaces() {
        if !in_orbit.contains(i) {
            u.insert(i);
        }
    }
    let q = congruence_quotient(m, &u)?;
    // induced generator permutations on classes
    let mut gen_perms: Vec<(String, Vec<usize>)> = Vec::new();
    for (name, perm) in action.generator_names.iter().zip(&action.generator_perms) {
        let mut qperm = vec![usize::MAX; q.algebra.n()];
        for x in 0..m.n() {
            let (cx, cgx) = (q.projection[x], q.projection[perm[x]]);
            if qperm[cx] == usize::MAX {
                qperm[cx] = cgx;
            } else if qperm[cx] != cgx {
                return Err(ActionError::Internal(
                    "quotient action is not well defined".into(),
                ));
            }
        }
        gen_perms.push((name.clone(), qperm));
    }
    let qaction = validate_action(&q.algebra, &gen_perms, DEFAULT_GROUP_CAP)?;
    // quotient metric equals the orbit-restricted count
    let n = m.n();
    let mut d_h = vec![vec![0usize; n]; n];
    for x in 0..n {
        for y in 0..n {
            let sep = m.delta_bar(x, y);
            let cnt = sep.iter().filter(|i| hyper_orbit.contains(i)).count();
            d_h[x][y] = cnt;
            if q.algebra.distance(q.projection[x], q.projection[y]) != cnt {
                return Err(ActionError::Internal(
                    "quotient metric differs from d_H".into(),
                ));
            }
        }
    }
    let common_side = {
        let mut inter_h = BitSet::full(n);
        let mut inter_hc = BitSet::full(n);
        for g in 0..action.order() {
            let img = action.apply_halfspace(g, h);
            inter_h.intersect_with(m.halfspace(img));
            inter_hc.intersect_with(m.halfspace(m.complement_of(img)));
        }
        !inter_h.is_empty() || !inter_hc.is_empty()
    };
    let report = HyperplaneQuotientReport {
        quotient_size: q.algebra.n(),
        orbit_size: hyper_orbit.len(),
        common_side,
        d_h,
    };
    Ok((qaction, q.projection, report))
}

// ----- the Hilbert embedding -------------------------------------------------------

#[derive(Debug)]
pub struct HilbertReport {
    /// base point of the embedding
    pub base: usize,
    /// 0/1 vectors over hyperplanes, one per element
    pub vectors: Vec<BitSet>,
    pub pairs_checked: usize,
}

/// The embedding x -> indicator of the hyperplanes separating x from the
/// base point. Exact integer arithmetic: squared distances are hyperplane
/// counts. The twisted action permutes coordinates and flips those
/// separating the base from its translate; all identities are asserted.
pub fn hilbert_embedding(action: &GroupAction, base: usize) -> Result<HilbertReport, ActionError> {
    let m = &action.algebra;
    let n = m.n();
    let nh = m.hyperplanes().len();
    let vectors: Vec<BitSet> = (0..n).map(|x| m.delta_bar(base, x)).collect();
    if !vectors[base].is_empty() {
        return Err(ActionError::Internal("base vector is not zero".into()));
    }
    for x in 0..n {
        for y in 0..n {
            if vectors[x].symmetric_difference(&vectors[y]).count() != m.distance(x, y) {
                return Err(ActionError::Internal(
                    "squared norm does not match the metric".into(),
                ));
            }
        }
    }
    // hyperplane permutation per group element
    let hyp_perm = |g: usize| -> Vec<usize> {
        (0..nh)
            .map(|i| {
                let (rep, _) = m.hyperplanes()[i];
                m.hyperplane_of(action.apply_halfspace(g, rep))
                    .expect("proper image")
            })
            .collect()
    };
    let act = |g: usize, s: &BitSet| -> BitSet {
        let ginv = action.inverse(g);
        let perm_inv = hyp_perm(ginv);
        let flip = m.delta_bar(base, action.apply(g, base));
        let mut out = BitSet::new(nh);
        for i in 0..nh {
            let mut bit = s.contains(perm_inv[i]);
            if flip.contains(i) {
                bit = !bit;
            }
            if bit {
                out.insert(i);
            }
        }
        out
    };
    let mut pairs_checked = 0;
    for g in 0..action.order() {
        for x in 0..n {
            if act(g, &vectors[x]) != vectors[action.apply(g, x)] {
                return Err(ActionError::Internal(
                    "twisted action does not match the orbit map".into(),
                ));
            }
        }
        for x in 0..n {
            for y in x + 1..n {
                let gx = act(g, &vectors[x]);
                let gy = act(g, &vectors[y]);
                if gx.symmetric_difference(&gy).count()
                    != vectors[x].symmetric_difference(&vectors[y]).count()
                {
                    return Err(ActionError::Internal("action is not isometric".into()));
                }
                pairs_checked += 1;
            }
        }
    }
    for g1 in 0..action.order() {
        for g2 in 0..action.order() {
            let g12 = action.multiply(g1, g2);
            for x in 0..n {
                if act(g1, &act(g2, &vectors[x])) != act(g12, &vectors[x]) {
                    return Err(ActionError::Internal(
                        "twisted action is not associative".into(),
                    ));
                }
            }
        }
    }
    Ok(HilbertReport {
        base,
        vectors,
        pairs_checked,
    })
}

// ----- shifts -----------------------------------------------------------------

/// On a finite algebra no element can shift a half space: the report is
/// computed and must come back empty.
pub fn shift_report_finite(action: &GroupAction) -> Result<Vec<(usize, usize)>, ActionError> {
    let m = &action.algebra;
    let mut out = Vec::new();
    for g in 0..action.order() {
        for h in m.proper_halfspaces() {
            let img = action.apply_halfspace(g, h);
            if img != h
                && (m.halfspace(img).is_subset(m.halfspace(h))
                    || m.halfspace(h).is_subset(m.halfspace(img)))
            {
                out.push((g, h));
            }
        }
    }
    if !out.is_empty() {
        return Err(ActionError::Internal(
            "a finite action produced a shifted half space".into(),
        ));
    }
    Ok(out)
}

/// Shift witnesses of a window, cross-checked against the growth of the
/// hyperplane counts across radii: a shift forces strict growth.
pub fn shift_report_window(w: &SageevWindow) -> Result<Vec<(String, ShiftDirection)>, ActionError> {
    if !w.shifts.is_empty() && w.orbit_counts.len() >= 2 {
        let growing = w.orbit_counts.windows(2).all(|p| p[0] < p[1]);
        if !growing {
            return Err(ActionError::Internal(
                "shift witnesses without growing hyperplane counts".into(),
            ));
        }
    }
    Ok(w.shifts.clone())
}

// ----- .act parsing -----------------------------------------------------------

/// Parsed `.act` source; the referenced algebra file is resolved by the
/// caller.
pub struct ActSource {
    pub name: String,
    pub med_ref: String,
    pub gens: Vec<(String, Vec<(String, String)>)>,
}

/// `action <name> on <med-file>` plus `gen <g>: x->y ...` lines.
pub fn parse_act_source(text: &str) -> Result<ActSource, ActionError> {
    let mut name = String::new();
    let mut med_ref = String::new();
    let mut gens = Vec::new();
    for (lno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("action ") {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 3 || toks[1] != "on" {
                return Err(ActionError::Parse {
                    line: lno + 1,
                    msg: "expected `action <name> on <med-file>`".into(),
                });
            }
            name = toks[0].to_string();
            med_ref = toks[2].to_string();
        } else if let Some(rest) = line.strip_prefix("gen ") {
            let (gname, maps) = rest.split_once(':').ok_or(ActionError::Parse {
                line: lno + 1,
                msg: "expected `gen <name>: x->y ...`".into(),
            })?;
            let mut pairs = Vec::new();
            for chunk in maps.split_whitespace() {
                let (from, to) = chunk.split_once("->").ok_or(ActionError::Parse {
                    line: lno + 1,
                    msg: format!("bad mapping `{}`", chunk),
                })?;
                pairs.push((from.to_string(), to.to_string()));
            }
            gens.push((gname.trim().to_string(), pairs));
        } else {
            return Err(ActionError::Parse {
                line: lno + 1,
                msg: format!("unknown directive `{}`", line),
            });
        }
    }
    if med_ref.is_empty() {
        return Err(ActionError::Parse {
            line: 1,
            msg: "missing `action ... on ...` header".into(),
        });
    }
    Ok(ActSource {
        name,
        med_ref,
        gens,
    })
}
