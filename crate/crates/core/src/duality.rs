//! The contravariant duality between finite median algebras and poc sets:
//! half spaces of a median algebra form a poc set under inclusion, the
//! ultrafilters of a poc set form a median algebra under the Boolean
//! median, and evaluation into the double dual is an isomorphism at
//! finite scale. Also: dual maps, free median algebras, the generation
//! criterion and the congruence calculus.

use crate::bits::BitSet;
use crate::iso::poc_iso;
use crate::median::{MedError, MedianAlgebra};
use crate::pocset::{star, PocError, PocSet, ZERO_STAR};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DualityError {
    #[error(transparent)]
    Poc(#[from] PocError),
    #[error(transparent)]
    Med(#[from] MedError),
    #[error("map is not a median morphism: witness triple ({0}, {1}, {2})")]
    NotMedianMorphism(usize, usize, usize),
    #[error("map is not a poc morphism: {0}")]
    NotPocMorphism(String),
    #[error("congruence set violates (Con {0})")]
    Con(u8),
    #[error("relation is not a congruence: witness ({0}, {1}, {2}, {3})")]
    NotCongruence(usize, usize, usize, usize),
    #[error("free median algebras are built for at most {0} generators")]
    FreeLimit(usize),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Dual of a median algebra plus the index bridge between its half-space
/// list and the poc-set element numbering.
pub struct MedianDual {
    pub poc: PocSet,
    /// half-space index -> poc element index
    pub hs_to_elem: Vec<usize>,
    /// poc element index -> half-space index
    pub elem_to_hs: Vec<usize>,
}

/// Half spaces ordered by inclusion, starred by complement; the empty set
/// and the carrier become 0 and 0^.
pub fn dual_of_median(m: &MedianAlgebra) -> MedianDual {
    let hs = m.halfspaces();
    // proper pairs keyed by their numerically smaller side, in list order
    let mut pair_tokens = Vec::new();
    let mut reps = Vec::new();
    for (i, h) in hs.iter().enumerate() {
        let c = m.complement_of(i);
        if i < c && !h.is_empty() {
            reps.push(i);
            pair_tokens.push(format!("h{}", reps.len()));
        }
    }
    let mut hs_to_elem = vec![0; hs.len()];
    hs_to_elem[0] = 0; // empty set -> 0
    hs_to_elem[m.complement_of(0)] = 1;
    for (p, &r) in reps.iter().enumerate() {
        hs_to_elem[r] = 2 * (p + 1);
        hs_to_elem[m.complement_of(r)] = 2 * (p + 1) + 1;
    }
    let mut relations = Vec::new();
    for (i, a) in hs.iter().enumerate() {
        for (j, b) in hs.iter().enumerate() {
            if i != j && m.is_proper(i) && m.is_proper(j) && a.is_subset(b) {
                relations.push((hs_to_elem[i], hs_to_elem[j]));
            }
        }
    }
    let poc = PocSet::from_relations(&format!("{}_dual", m.name()), pair_tokens, &relations)
        .expect("half spaces always form a poc set");
    let mut elem_to_hs = vec![0; hs.len()];
    for (h, &e) in hs_to_elem.iter().enumerate() {
        elem_to_hs[e] = h;
    }
    MedianDual {
        poc,
        hs_to_elem,
        elem_to_hs,
    }
}

/// Dual of a poc set plus the ultrafilter list (carrier order).
pub struct PocDual {
    pub algebra: MedianAlgebra,
    /// ultrafilters as element sets of the poc set, in carrier order
    pub ultrafilters: Vec<BitSet>,
}

/// Ultrafilters with the pointwise Boolean median.
pub fn dual_of_poc(p: &PocSet, pair_limit: usize) -> Result<PocDual, DualityError> {
    let mut members = p.ultrafilters(pair_limit)?;
    // carrier order is the numeric mask order used by from_subsets_closed
    members.sort_by(|a, b| a.cmp_numeric(b));
    let tokens: Vec<String> = (0..members.len()).map(|i| format!("u{}", i)).collect();
    let algebra = MedianAlgebra::from_subsets_closed(
        &format!("{}_dual", p.name()),
        p.n_elements(),
        members.clone(),
        Some(tokens),
    )?;
    Ok(PocDual {
        algebra,
        ultrafilters: members,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualDirection {
    MedianToPoc,
    PocToMedian,
}

/// Outcome of evaluating an object into its double dual.
pub struct DualityCertificate {
    pub direction: DualDirection,
    /// source element index -> double-dual element index
    pub ev_map: Vec<usize>,
    pub injective: bool,
    pub surjective: bool,
    pub structure_preserving: bool,
    /// double-dual elements not hit, when not surjective
    pub missed: Vec<usize>,
    /// source element tokens for rendering
    pub tokens: Vec<String>,
}

impl DualityCertificate {
    pub fn is_isomorphism(&self) -> bool {
        self.injective && self.surjective && self.structure_preserving
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(match self.direction {
            DualDirection::MedianToPoc => "direction: median->poc\n",
            DualDirection::PocToMedian => "direction: poc->median\n",
        });
        out.push_str(&format!(
            "iso: {}\n",
            if self.is_isomorphism() { "yes" } else { "no" }
        ));
        for (x, &i) in self.ev_map.iter().enumerate() {
            out.push_str(&format!("{} -> {}\n", self.tokens[x], i));
        }
        if !self.missed.is_empty() {
            out.push_str(&format!(
                "missed: {}\n",
                self.missed
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            ));
        }
        out
    }
}

/// ev: M -> M°°, x -> {H | x in H}. At finite scale this must be an
/// isomorphism of median algebras; anything less is a hard error upstream.
pub fn double_dual_check_median(
    m: &MedianAlgebra,
    pair_limit: usize,
) -> Result<DualityCertificate, DualityError> {
    let dual = dual_of_median(m);
    let dd = dual_of_poc(&dual.poc, pair_limit)?;
    let index: HashMap<&BitSet, usize> = dd
        .ultrafilters
        .iter()
        .enumerate()
        .map(|(i, u)| (u, i))
        .collect();
    let mut ev_map = Vec::with_capacity(m.n());
    for x in 0..m.n() {
        let mut uf = BitSet::new(dual.poc.n_elements());
        for h in m.vector(x).iter() {
            uf.insert(dual.hs_to_elem[h]);
        }
        let i = index.get(&uf).copied().ok_or_else(|| {
            DualityError::Internal("principal ultrafilter missing from the double dual".into())
        })?;
        ev_map.push(i);
    }
    let mut hit = vec![false; dd.algebra.n()];
    let mut injective = true;
    for &i in &ev_map {
        if hit[i] {
            injective = false;
        }
        hit[i] = true;
    }
    let missed: Vec<usize> = (0..dd.algebra.n()).filter(|&i| !hit[i]).collect();
    let surjective = missed.is_empty();
    let mut structure = true;
    'outer: for x in 0..m.n() {
        for y in x..m.n() {
            for z in y..m.n() {
                if ev_map[m.med(x, y, z)] != dd.algebra.med(ev_map[x], ev_map[y], ev_map[z]) {
                    structure = false;
                    break 'outer;
                }
            }
        }
    }
    Ok(DualityCertificate {
        direction: DualDirection::MedianToPoc,
        ev_map,
        injective,
        surjective,
        structure_preserving: structure,
        missed,
        tokens: m.tokens().to_vec(),
    })
}

/// ev: P -> P°°, a -> {U | a in U}.
pub fn double_dual_check_poc(
    p: &PocSet,
    pair_limit: usize,
) -> Result<DualityCertificate, DualityError> {
    let pd = dual_of_poc(p, pair_limit)?;
    let dd = dual_of_median(&pd.algebra);
    let hs_index: HashMap<&BitSet, usize> = pd
        .algebra
        .halfspaces()
        .iter()
        .enumerate()
        .map(|(i, h)| (h, i))
        .collect();
    let n = p.n_elements();
    let mut ev_map = Vec::with_capacity(n);
    for a in 0..n {
        let mut v = BitSet::new(pd.algebra.n());
        for (i, u) in pd.ultrafilters.iter().enumerate() {
            if u.contains(a) {
                v.insert(i);
            }
        }
        let h = hs_index.get(&v).copied().ok_or_else(|| {
            DualityError::Internal("principal half space missing from the double dual".into())
        })?;
        ev_map.push(dd.hs_to_elem[h]);
    }
    let nn = dd.poc.n_elements();
    let mut hit = vec![false; nn];
    let mut injective = true;
    for &i in &ev_map {
        if hit[i] {
            injective = false;
        }
        hit[i] = true;
    }
    let missed: Vec<usize> = (0..nn).filter(|&i| !hit[i]).collect();
    let surjective = missed.is_empty();
    let mut structure = true;
    for a in 0..n {
        if ev_map[star(a)] != star(ev_map[a]) {
            structure = false;
        }
        for b in 0..n {
            if p.leq(a, b) != dd.poc.leq(ev_map[a], ev_map[b]) {
                structure = false;
            }
        }
    }
    let tokens = (0..n).map(|e| p.token(e).to_string()).collect();
    Ok(DualityCertificate {
        direction: DualDirection::PocToMedian,
        ev_map,
        injective,
        surjective,
        structure_preserving: structure,
        missed,
        tokens,
    })
}

// ----- dual maps ----------------------------------------------------------

pub fn check_median_morphism(
    m1: &MedianAlgebra,
    m2: &MedianAlgebra,
    f: &[usize],
) -> Result<(), DualityError> {
    assert_eq!(f.len(), m1.n());
    for x in 0..m1.n() {
        for y in x..m1.n() {
            for z in y..m1.n() {
                if f[m1.med(x, y, z)] != m2.med(f[x], f[y], f[z]) {
                    return Err(DualityError::NotMedianMorphism(x, y, z));
                }
            }
        }
    }
    Ok(())
}

pub fn check_poc_morphism(p1: &PocSet, p2: &PocSet, g: &[usize]) -> Result<(), DualityError> {
    assert_eq!(g.len(), p1.n_elements());
    if g[0] != 0 {
        return Err(DualityError::NotPocMorphism("0 not fixed".into()));
    }
    for a in 0..p1.n_elements() {
        if g[star(a)] != star(g[a]) {
            return Err(DualityError::NotPocMorphism(format!(
                "star not respected at {}",
                p1.token(a)
            )));
        }
        for b in 0..p1.n_elements() {
            if p1.leq(a, b) && !p2.leq(g[a], g[b]) {
                return Err(DualityError::NotPocMorphism(format!(
                    "order not preserved on ({}, {})",
                    p1.token(a),
                    p1.token(b)
                )));
            }
        }
    }
    Ok(())
}

/// Is a poc morphism an embedding: injective and order reflecting.
pub fn poc_map_is_embedding(p1: &PocSet, p2: &PocSet, g: &[usize]) -> bool {
    for a in 0..p1.n_elements() {
        for b in 0..p1.n_elements() {
            if a != b && g[a] == g[b] {
                return false;
            }
            if p2.leq(g[a], g[b]) && !p1.leq(a, b) {
                return false;
            }
        }
    }
    true
}

/// Dual of a median morphism: H -> f^{-1}(H), as an index map between
/// half-space lists. When the dual is an embedding, f must be surjective
/// at finite scale; this is asserted.
pub fn dual_of_median_map(
    m1: &MedianAlgebra,
    m2: &MedianAlgebra,
    f: &[usize],
) -> Result<Vec<usize>, DualityError> {
    check_median_morphism(m1, m2, f)?;
    let hs_index: HashMap<&BitSet, usize> = m1
        .halfspaces()
        .iter()
        .enumerate()
        .map(|(i, h)| (h, i))
        .collect();
    let mut dual = Vec::with_capacity(m2.halfspaces().len());
    for h in m2.halfspaces() {
        let mut pre = BitSet::new(m1.n());
        for x in 0..m1.n() {
            if h.contains(f[x]) {
                pre.insert(x);
            }
        }
        let i = hs_index.get(&pre).copied().ok_or_else(|| {
            DualityError::Internal("preimage of a half space is not a half space".into())
        })?;
        dual.push(i);
    }
    // finite-scale converse: dual embedding implies f surjective
    let embedding = {
        let inj = {
            let mut seen = vec![false; m1.halfspaces().len()];
            dual.iter().all(|&i| {
                let fresh = !seen[i];
                seen[i] = true;
                fresh
            })
        };
        inj && (0..dual.len()).all(|i| {
            (0..dual.len()).all(|j| {
                !m1.halfspaces()[dual[i]].is_subset(&m1.halfspaces()[dual[j]])
                    || m2.halfspaces()[i].is_subset(&m2.halfspaces()[j])
            })
        })
    };
    if embedding {
        let mut hit = vec![false; m2.n()];
        for &y in f {
            hit[y] = true;
        }
        if hit.iter().any(|&h| !h) {
            return Err(DualityError::Internal(
                "dual map is an embedding but the morphism is not surjective".into(),
            ));
        }
    }
    Ok(dual)
}

/// Dual of a poc morphism: U -> g^{-1}(U), as a carrier map between the
/// ultrafilter algebras.
pub fn dual_of_poc_map(
    p1: &PocSet,
    p2: &PocSet,
    g: &[usize],
    pair_limit: usize,
) -> Result<Vec<usize>, DualityError> {
    check_poc_morphism(p1, p2, g)?;
    let d1 = dual_of_poc(p1, pair_limit)?;
    let d2 = dual_of_poc(p2, pair_limit)?;
    let index: HashMap<&BitSet, usize> = d1
        .ultrafilters
        .iter()
        .enumerate()
        .map(|(i, u)| (u, i))
        .collect();
    let mut out = Vec::with_capacity(d2.ultrafilters.len());
    for u in &d2.ultrafilters {
        let mut pre = BitSet::new(p1.n_elements());
        for a in 0..p1.n_elements() {
            if u.contains(g[a]) {
                pre.insert(a);
            }
        }
        let i = index.get(&pre).copied().ok_or_else(|| {
            DualityError::Internal("preimage of an ultrafilter is not an ultrafilter".into())
        })?;
        out.push(i);
    }
    Ok(out)
}

// ----- free median algebras ------------------------------------------------

pub struct FreeMedian {
    pub algebra: MedianAlgebra,
    /// carrier indices of the generators, in generator order
    pub generators: Vec<usize>,
    /// the Boolean poc set on the generator ground set
    pub boolean_poc: PocSet,
}

/// The Boolean poc set: all subsets of `0..n` ordered by inclusion with
/// complement as star.
pub fn boolean_poc(n: usize) -> PocSet {
    assert!(n <= 16);
    let total = 1usize << n;
    let comp = |m: usize| (total - 1) ^ m;
    let mut reps = Vec::new();
    for m in 1..total - 1 {
        if m < comp(m) {
            reps.push(m);
        }
    }
    // token carries the subset in hex
    let tokens: Vec<String> = reps.iter().map(|m| format!("s{:x}", m)).collect();
    let elem_of = |m: usize, reps: &[usize]| -> usize {
        if m == 0 {
            return 0;
        }
        if m == total - 1 {
            return 1;
        }
        let c = comp(m);
        if m < c {
            2 + 2 * reps.binary_search(&m).unwrap()
        } else {
            3 + 2 * reps.binary_search(&c).unwrap()
        }
    };
    let mut relations = Vec::new();
    for a in 1..total - 1 {
        for b in 1..total - 1 {
            if a != b && a & !b == 0 {
                relations.push((elem_of(a, &reps), elem_of(b, &reps)));
            }
        }
    }
    PocSet::from_relations(&format!("bool{}", n), tokens, &relations)
        .expect("the Boolean poc set is valid")
}

/// Free median algebra on n generators, built as the median closure of the
/// principal ultrafilters inside the dual of the Boolean poc set.
pub fn free_median(n: usize) -> Result<FreeMedian, DualityError> {
    if n == 0 || n > 5 {
        return Err(DualityError::FreeLimit(5));
    }
    let poc = boolean_poc(n);
    let total = 1usize << n;
    let ne = poc.n_elements();
    // subset mask of each poc element
    let mut mask_of = vec![0usize; ne];
    mask_of[1] = total - 1;
    for pr in 0..poc.n_pairs() {
        let (base, starred) = poc.pair_elems(pr);
        let tok = poc.token(base);
        let m = usize::from_str_radix(&tok[1..], 16).unwrap();
        mask_of[base] = m;
        mask_of[starred] = (total - 1) ^ m;
    }
    let gens: Vec<BitSet> = (0..n)
        .map(|x| {
            let mut u = BitSet::new(ne);
            for e in 0..ne {
                if e != 0 && mask_of[e] >> x & 1 == 1 {
                    u.insert(e);
                }
            }
            u.insert(ZERO_STAR);
            u
        })
        .collect();
    let algebra = MedianAlgebra::from_subsets(
        &format!("free{}", n),
        ne,
        &gens,
        None,
        crate::median::DEFAULT_CLOSURE_LIMIT,
    )?;
    let (_, masks) = algebra.ground_masks();
    let generators: Vec<usize> = gens
        .iter()
        .map(|g| masks.iter().position(|m| m == g).expect("generator kept"))
        .collect();
    // dual of the result is the Boolean poc set again
    let dual = dual_of_median(&algebra);
    if poc_iso(&dual.poc, &poc).is_none() {
        return Err(DualityError::Internal(
            "dual of the free algebra is not the Boolean poc set".into(),
        ));
    }
    // universal property for the target 2: all 2^n generator traces occur
    let traces: std::collections::HashSet<Vec<bool>> = algebra
        .halfspaces()
        .iter()
        .map(|h| generators.iter().map(|&g| h.contains(g)).collect())
        .collect();
    if traces.len() != total {
        return Err(DualityError::Internal(
            "free algebra misses a generator trace".into(),
        ));
    }
    Ok(FreeMedian {
        algebra,
        generators,
        boolean_poc: poc,
    })
}

/// Generation criterion: X generates M iff the restriction of half spaces
/// to X is an embedding, i.e. meeting half spaces meet inside X.
pub fn generates(m: &MedianAlgebra, xs: &BitSet) -> (bool, Option<(usize, usize)>) {
    let hs = m.halfspaces();
    for i in 0..hs.len() {
        for j in 0..hs.len() {
            if hs[i].intersects(&hs[j]) {
                let mut t = hs[i].intersection(&hs[j]);
                t.intersect_with(xs);
                if t.is_empty() {
                    return (false, Some((i, j)));
                }
            }
        }
    }
    (true, None)
}

// ----- congruences ----------------------------------------------------------

pub struct CongruenceData {
    /// partition classes, each sorted, ordered by smallest member
    pub classes: Vec<Vec<usize>>,
    /// the contracted half-space set U = Delta(R)
    pub contracted: BitSet,
}

pub struct Quotient {
    pub algebra: MedianAlgebra,
    /// element -> class index
    pub projection: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
}

/// Quotient by the congruence nabla(U) for a half-space set satisfying
/// (Con 1) and (Con 2). The dual of the quotient is checked to be the
/// complement of U inside the dual.
pub fn congruence_quotient(m: &MedianAlgebra, u: &BitSet) -> Result<Quotient, DualityError> {
    for h in u.iter() {
        if !m.is_proper(h) {
            return Err(DualityError::Con(1));
        }
        if !u.contains(m.complement_of(h)) {
            return Err(DualityError::Con(2));
        }
    }
    let n = m.n();
    let mut projection = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for x in 0..n {
        if projection[x] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut class = Vec::new();
        for y in 0..n {
            if projection[y] == usize::MAX {
                let mut sep = m.vector(x).symmetric_difference(m.vector(y));
                sep.difference_with(u);
                if sep.is_empty() {
                    projection[y] = id;
                    class.push(y);
                }
            }
        }
        classes.push(class);
    }
    let reps: Vec<usize> = classes.iter().map(|c| c[0]).collect();
    let tokens: Vec<String> = reps.iter().map(|&r| format!("[{}]", m.token(r))).collect();
    let proj = projection.clone();
    let table = move |x: usize, y: usize, z: usize| proj[m.med(reps[x], reps[y], reps[z])];
    let algebra = MedianAlgebra::from_valid_table(&format!("{}_q", m.name()), tokens, &table)?;
    // dual of the quotient = dual minus the contracted half spaces
    let expected = m.hyperplanes().len() - u.count() / 2;
    if algebra.hyperplanes().len() != expected {
        return Err(DualityError::Internal(
            "quotient dual has the wrong hyperplane count".into(),
        ));
    }
    let hs_index: HashMap<&BitSet, usize> = m
        .halfspaces()
        .iter()
        .enumerate()
        .map(|(i, h)| (h, i))
        .collect();
    let mut seen = std::collections::HashSet::new();
    for j in algebra.proper_halfspaces() {
        let mut pre = BitSet::new(n);
        for x in 0..n {
            if algebra.halfspace(j).contains(projection[x]) {
                pre.insert(x);
            }
        }
        match hs_index.get(&pre) {
            Some(&h) if !u.contains(h) => {
                seen.insert(h);
            }
            _ => {
                return Err(DualityError::Internal(
                    "quotient half space does not come from the complement of U".into(),
                ))
            }
        }
    }
    if seen.len() != m.proper_halfspaces().count() - u.count() {
        return Err(DualityError::Internal(
            "quotient dual misses half spaces outside U".into(),
        ));
    }
    Ok(Quotient {
        algebra,
        projection,
        classes,
    })
}

/// Quotient collapsing the listed hyperplanes.
pub fn contract_hyperplanes(
    m: &MedianAlgebra,
    hyperplane_ids: &[usize],
) -> Result<Quotient, DualityError> {
    let mut u = BitSet::new(m.halfspaces().len());
    for &i in hyperplane_ids {
        let (h, hc) = m.hyperplanes()[i];
        u.insert(h);
        u.insert(hc);
    }
    congruence_quotient(m, &u)
}

/// From an equivalence relation (given as a class id per element) to its
/// half-space set Delta(R); the round trip nabla(Delta(R)) = R is checked.
pub fn congruence_of_relation(
    m: &MedianAlgebra,
    class_of: &[usize],
) -> Result<CongruenceData, DualityError> {
    assert_eq!(class_of.len(), m.n());
    let n = m.n();
    for x in 0..n {
        for y in 0..n {
            if class_of[x] != class_of[y] {
                continue;
            }
            for u in 0..n {
                for v in 0..n {
                    if class_of[m.med(x, u, v)] != class_of[m.med(y, u, v)] {
                        return Err(DualityError::NotCongruence(x, y, u, v));
                    }
                }
            }
        }
    }
    let mut delta = BitSet::new(m.halfspaces().len());
    for x in 0..n {
        for y in 0..n {
            if class_of[x] == class_of[y] {
                delta.union_with(&m.vector(x).symmetric_difference(m.vector(y)));
            }
        }
    }
    // round trip
    for x in 0..n {
        for y in 0..n {
            let mut sep = m.vector(x).symmetric_difference(m.vector(y));
            sep.difference_with(&delta);
            let related = sep.is_empty();
            if related != (class_of[x] == class_of[y]) {
                return Err(DualityError::Internal(
                    "nabla of Delta(R) differs from R".into(),
                ));
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut seen: HashMap<usize, usize> = HashMap::new();
    for x in 0..n {
        match seen.get(&class_of[x]) {
            Some(&i) => classes[i].push(x),
            None => {
                seen.insert(class_of[x], classes.len());
                classes.push(vec![x]);
            }
        }
    }
    Ok(CongruenceData {
        classes,
        contracted: delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::median::{cube, linear, tripod};
    use crate::pocset::parse_poc_source;

    fn orthogonal(n: usize) -> PocSet {
        let mut src = String::from("pocset orth\n");
        for i in 0..n {
            src.push_str(&format!("elem x{}\n", i));
        }
        parse_poc_source(&src).unwrap()
    }

    #[test]
    fn duals_of_examples() {
        // Med(3-chain) dual has 4 proper elements, two comparable pairs
        let l3 = linear("l3", 3);
        let d = dual_of_median(&l3);
        assert_eq!(d.poc.n_pairs(), 2);
        let chain = parse_poc_source("pocset c\nelem a\nelem b\nle a b\n").unwrap();
        assert!(poc_iso(&d.poc, &chain).is_some());

        // (2^n) dual is orthogonal
        let c3 = cube("c3", 3);
        let d = dual_of_median(&c3);
        assert!(poc_iso(&d.poc, &orthogonal(3)).is_some());

        // singleton dual is 2
        let pt = linear("pt", 1);
        assert_eq!(dual_of_median(&pt).poc.n_pairs(), 0);
    }

    #[test]
    fn poc_duals_of_examples() {
        // orthogonal 3 -> 8-element cube
        let o3 = orthogonal(3);
        let d = dual_of_poc(&o3, 24).unwrap();
        assert_eq!(d.algebra.n(), 8);
        assert!(
            crate::iso::graph_iso(&d.algebra.median_graph(), &cube("c3", 3).median_graph())
                .is_some()
        );
        // chain poc -> 3-chain
        let chain = parse_poc_source("pocset c\nelem a\nelem b\nle a b\n").unwrap();
        let d = dual_of_poc(&chain, 24).unwrap();
        assert_eq!(d.algebra.n(), 3);
        // 2 -> singleton
        let two = parse_poc_source("pocset two\n").unwrap();
        assert_eq!(dual_of_poc(&two, 24).unwrap().algebra.n(), 1);
    }

    #[test]
    fn double_duals() {
        for m in [cube("c3", 3), linear("l3", 3), tripod("t")] {
            let cert = double_dual_check_median(&m, 64).unwrap();
            assert!(cert.is_isomorphism(), "median double dual failed");
        }
        for p in [
            orthogonal(3),
            parse_poc_source("pocset c\nelem a\nelem b\nle a b\n").unwrap(),
        ] {
            let cert = double_dual_check_poc(&p, 64).unwrap();
            assert!(cert.is_isomorphism(), "poc double dual failed");
        }
        let cert = double_dual_check_median(&linear("l3", 3), 64).unwrap();
        let text = cert.render();
        assert!(text.contains("iso: yes"));
    }

    #[test]
    fn dual_maps() {
        let e = linear("e", 2);
        let c2 = cube("c2", 2);
        // embed the edge as the left edge of the square: s0 -> s0, s1 -> s2
        let f = vec![0, c2.elem_by_token("s2").unwrap()];
        let dual = dual_of_median_map(&e, &c2, &f).unwrap();
        // dual must be surjective onto the edge's half spaces
        let mut hit = vec![false; e.halfspaces().len()];
        for &h in &dual {
            hit[h] = true;
        }
        assert!(hit.iter().all(|&b| b));
        // identity and constant
        let idm = dual_of_median_map(&e, &e, &[0, 1]).unwrap();
        assert_eq!(idm, (0..e.halfspaces().len()).collect::<Vec<_>>());
        let konst = dual_of_median_map(&e, &e, &[0, 0]);
        // constant map is a morphism; dual sends proper half spaces to 0/0^
        let konst = konst.unwrap();
        for (h2, &h1) in konst.iter().enumerate() {
            if e.is_proper(h2) {
                assert!(!e.is_proper(h1));
            }
        }
        // non-morphism rejected
        let c2_swap_bad = vec![1, 0];
        assert!(check_median_morphism(&e, &e, &c2_swap_bad).is_ok());
        let t = tripod("t");
        let bad = vec![1, 0, 2, 3]; // swap centre and a leaf
        assert!(check_median_morphism(&t, &t, &bad).is_err());
    }

    #[test]
    fn contravariance() {
        let e = linear("e", 2);
        let c2 = cube("c2", 2);
        let f1 = vec![0, c2.elem_by_token("s2").unwrap()]; // e -> c2
                                                           // c2 carrier: s0=0,s1=1,s2=2,s3=3; collapse by membership of bit 1
        let f2 = vec![0, 0, 1, 1];
        check_median_morphism(&c2, &e, &f2).unwrap();
        let comp: Vec<usize> = (0..e.n()).map(|x| f2[f1[x]]).collect();
        let d1 = dual_of_median_map(&e, &c2, &f1).unwrap();
        let d2 = dual_of_median_map(&c2, &e, &f2).unwrap();
        let dcomp = dual_of_median_map(&e, &e, &comp).unwrap();
        let composed: Vec<usize> = (0..e.halfspaces().len()).map(|h| d1[d2[h]]).collect();
        assert_eq!(dcomp, composed);
    }

    #[test]
    fn free_median_sizes() {
        assert_eq!(free_median(1).unwrap().algebra.n(), 1);
        assert_eq!(free_median(2).unwrap().algebra.n(), 2);
        assert_eq!(free_median(3).unwrap().algebra.n(), 4);
        assert_eq!(free_median(4).unwrap().algebra.n(), 12);
        assert!(free_median(0).is_err());
        assert!(free_median(6).is_err());
    }

    #[test]
    fn generation() {
        let fm = free_median(3).unwrap();
        let gens = BitSet::from_indices(fm.algebra.n(), &fm.generators);
        assert!(generates(&fm.algebra, &gens).0);
        let c2 = cube("c2", 2);
        let anti = BitSet::from_indices(4, &[0, 3]);
        let (flag, witness) = generates(&c2, &anti);
        assert!(!flag && witness.is_some());
        assert!(generates(&c2, &BitSet::full(4)).0);
    }

    #[test]
    fn quotients() {
        let c2 = cube("c2", 2);
        let q = contract_hyperplanes(&c2, &[0]).unwrap();
        assert_eq!(q.algebra.n(), 2);
        let q = contract_hyperplanes(&c2, &[0, 1]).unwrap();
        assert_eq!(q.algebra.n(), 1);
        let q = contract_hyperplanes(&c2, &[]).unwrap();
        assert_eq!(q.algebra.n(), 4);
        // improper half space rejected
        let mut bad = BitSet::new(c2.halfspaces().len());
        bad.insert(0);
        assert!(matches!(
            congruence_quotient(&c2, &bad),
            Err(DualityError::Con(_))
        ));
    }

    #[test]
    fn relation_roundtrip() {
        let c2 = cube("c2", 2);
        // collapse one hyperplane: classes {s0,s1}, {s2,s3} by ground bit 1
        let class_of = vec![0, 0, 1, 1];
        let data = congruence_of_relation(&c2, &class_of).unwrap();
        assert_eq!(data.contracted.count(), 2);
        // equality relation
        let data = congruence_of_relation(&c2, &[0, 1, 2, 3]).unwrap();
        assert!(data.contracted.is_empty());
        // all-pairs relation
        let data = congruence_of_relation(&c2, &[0, 0, 0, 0]).unwrap();
        assert_eq!(data.contracted.count(), 4);
        // a non-congruence partition on the 4-chain
        let l4 = linear("l4", 4);
        assert!(congruence_of_relation(&l4, &[0, 1, 0, 1]).is_err());
    }
}
