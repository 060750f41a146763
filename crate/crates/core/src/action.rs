//! Group actions on k-subsets and the derangement machinery.
//!
//! An `Action` pairs a materialized group with a labeled domain: the natural
//! points, all k-subsets in lexicographic rank order, or a single orbit of
//! k-subsets re-indexed densely. Derangement flags (no fixed domain element)
//! drive everything downstream: the connection set of the derangement graph is
//! the union of the flagged conjugacy classes, and intersecting sets are the
//! cocliques of that graph.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use thiserror::Error;

use crate::perm::{Group, Perm};
use crate::pgl::{build_psl2, triple_sign, PglError, ProjLine, TripleSign};

#[derive(Debug, Error)]
pub enum ActionError {
    #[error("k = {k} out of range for degree {n} (need 1 <= k < n and k <= 5)")]
    BadK { n: usize, k: usize },
    #[error("domain point {0} out of range")]
    BadPoint(usize),
    #[error("element outside the acting group")]
    NotInGroup,
    #[error("orbit index {0} out of range ({1} orbits)")]
    BadOrbit(usize, usize),
    #[error("action is not transitive; restrict to an orbit first")]
    NotTransitive,
    #[error("q = {0} is not 1 mod 4")]
    NotOneModFour(u32),
    #[error("{0}")]
    Pgl(#[from] PglError),
}

/// Above this many (element, domain) pairs the per-element derangement scan
/// switches to one representative per conjugacy class.
const FULL_SCAN_LIMIT: usize = 10_000_000;

/// Lexicographic ranking of the k-subsets of `{0..n-1}`.
#[derive(Debug, Clone)]
struct KsetIndexer {
    n: usize,
    k: usize,
    binom: Vec<Vec<u64>>,
}

impl KsetIndexer {
    fn new(n: usize, k: usize) -> KsetIndexer {
        let mut binom = vec![vec![0u64; k + 1]; n + 1];
        for i in 0..=n {
            binom[i][0] = 1;
            for j in 1..=k.min(i) {
                binom[i][j] = binom[i - 1][j - 1] + if j <= i - 1 { binom[i - 1][j] } else { 0 };
            }
        }
        KsetIndexer { n, k, binom }
    }

    fn count(&self) -> usize {
        self.binom[self.n][self.k] as usize
    }

    fn rank(&self, set: &[u16]) -> u32 {
        debug_assert!(set.windows(2).all(|w| w[0] < w[1]));
        let mut r = 0u64;
        let mut prev = 0usize;
        for (j, &s) in set.iter().enumerate() {
            for v in prev..s as usize {
                r += self.binom[self.n - 1 - v][self.k - 1 - j];
            }
            prev = s as usize + 1;
        }
        r as u32
    }

    fn unrank(&self, mut r: u64, out: &mut Vec<u16>) {
        out.clear();
        let mut v = 0usize;
        for j in 0..self.k {
            loop {
                let c = self.binom[self.n - 1 - v][self.k - 1 - j];
                if r < c {
                    break;
                }
                r -= c;
                v += 1;
            }
            out.push(v as u16);
            v += 1;
        }
    }
}

/// What the group acts on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionDomain {
    /// The natural points `{0..n-1}`.
    Points,
    /// All k-subsets, lexicographically ranked.
    KSets { k: usize },
    /// One orbit of k-subsets, re-indexed densely; `which` is the orbit
    /// position in the canonical orbit order and `label` a human name.
    KSetOrbit {
        k: usize,
        which: usize,
        label: String,
    },
}

impl ActionDomain {
    pub fn describe(&self) -> String {
        match self {
            ActionDomain::Points => "points".into(),
            ActionDomain::KSets { k } => format!("{k}-sets"),
            ActionDomain::KSetOrbit { k, label, .. } => format!("{k}-sets[{label} orbit]"),
        }
    }
}

/// Per-element derangement flags for one action.
#[derive(Debug, Clone)]
pub struct DerangementData {
    /// Flag per element in the group's canonical order.
    pub flags: Vec<bool>,
    /// Number of derangements.
    pub count: usize,
    /// Flag per conjugacy class.
    pub class_flags: Vec<bool>,
}

impl DerangementData {
    /// Indices of the all-derangement classes (the derangement-graph
    /// connection set).
    pub fn derangement_classes(&self) -> Vec<usize> {
        (0..self.class_flags.len())
            .filter(|&i| self.class_flags[i])
            .collect()
    }

    /// Indices of the non-derangement classes other than the identity class
    /// (the connection set of the complement graph).
    pub fn non_derangement_classes(&self) -> Vec<usize> {
        (1..self.class_flags.len())
            .filter(|&i| !self.class_flags[i])
            .collect()
    }
}

/// A group acting on a labeled domain.
pub struct Action {
    group: Arc<Group>,
    domain: ActionDomain,
    indexer: Option<KsetIndexer>,
    /// Orbit restriction: sorted global ranks, plus the reverse map.
    members: Option<(Vec<u32>, HashMap<u32, u32>)>,
    n_domain: usize,
    transitive: bool,
    derangements: OnceLock<DerangementData>,
}

impl std::fmt::Debug for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Action({} on {}, N = {})",
            self.group.name(),
            self.domain.describe(),
            self.n_domain
        )
    }
}

impl Action {
    /// The natural action on points.
    pub fn on_points(group: Arc<Group>) -> Action {
        let n = group.degree();
        let mut a = Action {
            group,
            domain: ActionDomain::Points,
            indexer: None,
            members: None,
            n_domain: n,
            transitive: false,
            derangements: OnceLock::new(),
        };
        a.transitive = a.orbits().len() == 1;
        a
    }

    /// The induced action on all k-subsets of the points.
    pub fn on_ksets(group: Arc<Group>, k: usize) -> Result<Action, ActionError> {
        let n = group.degree();
        if k < 1 || k >= n || k > 5 {
            return Err(ActionError::BadK { n, k });
        }
        let indexer = KsetIndexer::new(n, k);
        let n_domain = indexer.count();
        let mut a = Action {
            group,
            domain: ActionDomain::KSets { k },
            indexer: Some(indexer),
            members: None,
            n_domain,
            transitive: false,
            derangements: OnceLock::new(),
        };
        a.transitive = a.orbits().len() == 1;
        Ok(a)
    }

    /// Restriction of a k-set action to its `which`-th orbit (canonical orbit
    /// order: by least member).
    pub fn restrict_to_orbit(&self, which: usize, label: &str) -> Result<Action, ActionError> {
        let k = match self.domain {
            ActionDomain::KSets { k } => k,
            _ => return Err(ActionError::NotTransitive),
        };
        let orbits = self.orbits();
        if which >= orbits.len() {
            return Err(ActionError::BadOrbit(which, orbits.len()));
        }
        let members: Vec<u32> = orbits[which].iter().map(|&d| d as u32).collect();
        let member_index = members
            .iter()
            .enumerate()
            .map(|(local, &global)| (global, local as u32))
            .collect();
        Ok(Action {
            group: self.group.clone(),
            domain: ActionDomain::KSetOrbit {
                k,
                which,
                label: label.to_string(),
            },
            indexer: self.indexer.clone(),
            members: Some((members, member_index)),
            n_domain: orbits[which].len(),
            transitive: true,
            derangements: OnceLock::new(),
        })
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn domain(&self) -> &ActionDomain {
        &self.domain
    }

    pub fn domain_size(&self) -> usize {
        self.n_domain
    }

    pub fn is_transitive(&self) -> bool {
        self.transitive
    }

    /// The k-subset behind a domain index, as sorted point labels.
    pub fn domain_member(&self, d: usize) -> Vec<u16> {
        match &self.domain {
            ActionDomain::Points => vec![d as u16],
            ActionDomain::KSets { .. } => {
                let mut out = Vec::new();
                self.indexer.as_ref().unwrap().unrank(d as u64, &mut out);
                out
            }
            ActionDomain::KSetOrbit { .. } => {
                let global = self.members.as_ref().unwrap().0[d];
                let mut out = Vec::new();
                self.indexer
                    .as_ref()
                    .unwrap()
                    .unrank(global as u64, &mut out);
                out
            }
        }
    }

    /// Applies a permutation of the points to a domain index.
    pub fn apply(&self, p: &Perm, d: usize) -> usize {
        match &self.domain {
            ActionDomain::Points => p.apply(d),
            ActionDomain::KSets { .. } => {
                let ix = self.indexer.as_ref().unwrap();
                let mut buf = Vec::new();
                ix.unrank(d as u64, &mut buf);
                for v in buf.iter_mut() {
                    *v = p.apply(*v as usize) as u16;
                }
                buf.sort_unstable();
                ix.rank(&buf) as usize
            }
            ActionDomain::KSetOrbit { .. } => {
                let (members, member_index) = self.members.as_ref().unwrap();
                let ix = self.indexer.as_ref().unwrap();
                let mut buf = Vec::new();
                ix.unrank(members[d] as u64, &mut buf);
                for v in buf.iter_mut() {
                    *v = p.apply(*v as usize) as u16;
                }
                buf.sort_unstable();
                let global = ix.rank(&buf);
                member_index[&global] as usize
            }
        }
    }

    /// Whether `p` fixes some domain element (i.e. is not a derangement).
    pub fn has_fixed_domain_point(&self, p: &Perm) -> bool {
        (0..self.n_domain).any(|d| self.apply(p, d) == d)
    }

    /// Orbits of the domain, each sorted, ordered by least member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n_domain];
        let mut orbits = Vec::new();
        for start in 0..self.n_domain {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start];
            seen[start] = true;
            let mut queue = vec![start];
            while let Some(d) = queue.pop() {
                for g in self.group.generators() {
                    let e = self.apply(g, d);
                    if !seen[e] {
                        seen[e] = true;
                        orbit.push(e);
                        queue.push(e);
                    }
                }
            }
            orbit.sort_unstable();
            orbits.push(orbit);
        }
        orbits
    }

    /// Derangement flags, computed once. Every element is scanned when
    /// |G| * N is small; otherwise one representative per conjugacy class
    /// (flags are constant on classes).
    pub fn derangements(&self) -> &DerangementData {
        self.derangements.get_or_init(|| {
            let g = &self.group;
            let cp = g.conjugacy_classes();
            let class_flags: Vec<bool> = cp
                .representatives
                .par_iter()
                .map(|&r| !self.has_fixed_domain_point(g.element(r)))
                .collect();
            assert!(!class_flags[0], "the identity is never a derangement");
            let flags: Vec<bool> = if g.order() * self.n_domain <= FULL_SCAN_LIMIT {
                let flags: Vec<bool> = (0..g.order())
                    .into_par_iter()
                    .map(|i| !self.has_fixed_domain_point(g.element(i)))
                    .collect();
                for (i, &f) in flags.iter().enumerate() {
                    assert_eq!(
                        f, class_flags[cp.class_of[i]],
                        "derangement flags must be constant on conjugacy classes"
                    );
                }
                flags
            } else {
                (0..g.order()).map(|i| class_flags[cp.class_of[i]]).collect()
            };
            let count = flags.iter().filter(|&&f| f).count();
            DerangementData {
                flags,
                count,
                class_flags,
            }
        })
    }

    /// Stabilizer of a domain point, as a subgroup on the original points.
    pub fn point_stabilizer(&self, d: usize) -> Result<Arc<Group>, ActionError> {
        if d >= self.n_domain {
            return Err(ActionError::BadPoint(d));
        }
        let elems: Vec<Perm> = self
            .group
            .elements()
            .iter()
            .filter(|e| self.apply(e, d) == d)
            .cloned()
            .collect();
        Ok(Group::from_elements(
            &format!("Stab_{}({d})", self.group.name()),
            self.group.degree(),
            elems,
        ))
    }

    /// True iff no element of the subgroup `H <= G` is a derangement.
    pub fn is_intersecting_subgroup(&self, h: &Group) -> Result<bool, ActionError> {
        let flags = &self.derangements().flags;
        let mut ok = true;
        for e in h.elements() {
            match self.group.element_index(e) {
                None => return Err(ActionError::NotInGroup),
                Some(i) => {
                    if flags[i] {
                        ok = false;
                    }
                }
            }
        }
        Ok(ok)
    }

    /// True iff every pair g, h in the set agrees somewhere on the domain,
    /// i.e. `g * h^(-1)` fixes a domain element.
    pub fn is_intersecting_set(&self, set: &[Perm]) -> Result<bool, ActionError> {
        for e in set {
            if self.group.element_index(e).is_none() {
                return Err(ActionError::NotInGroup);
            }
        }
        for (i, g) in set.iter().enumerate() {
            for h in &set[i + 1..] {
                let quot = g.compose(&h.inverse());
                if !self.has_fixed_domain_point(&quot) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Splits the intransitive 3-set action of `PSL(2, q)`, `q = 1 mod 4`, into
/// its two orbits, classified by the square / non-square value of the triple
/// invariant `D(u,v,w)`; the classification is cross-checked against the
/// orbit computation. Returns (squares orbit, non-squares orbit).
pub fn split_3set_orbits(q: u32) -> Result<(Action, Action), ActionError> {
    if q % 4 != 1 {
        return Err(ActionError::NotOneModFour(q));
    }
    let psl = build_psl2(q)?;
    let line = ProjLine::new(q)?;
    let full = Action::on_ksets(psl, 3)?;
    let orbits = full.orbits();
    assert_eq!(orbits.len(), 2, "PSL(2, q = 1 mod 4) has two 3-set orbits");
    assert_eq!(orbits[0].len(), orbits[1].len(), "orbits have equal length");

    // classify every 3-set by the sign of D
    let mut by_sign: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for d in 0..full.domain_size() {
        let s = full.domain_member(d);
        let sign = triple_sign(&line, s[0] as usize, s[1] as usize, s[2] as usize)?;
        match sign {
            TripleSign::Square => by_sign[0].push(d),
            TripleSign::NonSquare => by_sign[1].push(d),
        }
    }
    let square_first = by_sign[0] == orbits[0];
    let ordered: [&Vec<usize>; 2] = if square_first {
        [&orbits[0], &orbits[1]]
    } else {
        [&orbits[1], &orbits[0]]
    };
    assert_eq!(&by_sign[0], ordered[0], "sign classes must match orbits");
    assert_eq!(&by_sign[1], ordered[1], "sign classes must match orbits");

    let sq_which = if square_first { 0 } else { 1 };
    let squares = full.restrict_to_orbit(sq_which, "square")?;
    let nonsquares = full.restrict_to_orbit(1 - sq_which, "nonsquare")?;
    Ok((squares, nonsquares))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::DEFAULT_CLOSURE_CAP;
    use crate::pgl::{build_named_subgroup, build_pgl2, SubgroupKind};

    fn cyc(s: &str, n: usize) -> Perm {
        Perm::from_cycles(s, n).unwrap()
    }

    fn sym(n: usize) -> Arc<Group> {
        let c: String = format!(
            "({})",
            (1..=n).map(|v| v.to_string()).collect::<Vec<_>>().join(",")
        );
        Group::closure(
            &format!("S{n}"),
            vec![cyc(&c, n), cyc("(1,2)", n)],
            DEFAULT_CLOSURE_CAP,
        )
        .unwrap()
    }

    #[test]
    fn kset_rank_roundtrip() {
        let ix = KsetIndexer::new(9, 3);
        assert_eq!(ix.count(), 84);
        let mut buf = Vec::new();
        for r in 0..84u64 {
            ix.unrank(r, &mut buf);
            assert_eq!(ix.rank(&buf) as u64, r);
        }
        // lexicographically first and last
        ix.unrank(0, &mut buf);
        assert_eq!(buf, vec![0, 1, 2]);
        ix.unrank(83, &mut buf);
        assert_eq!(buf, vec![6, 7, 8]);
    }

    #[test]
    fn sym4_on_2sets_transitive() {
        let a = Action::on_ksets(sym(4), 2).unwrap();
        assert_eq!(a.domain_size(), 6);
        assert!(a.is_transitive());
    }

    #[test]
    fn pgl28_on_3sets() {
        let a = Action::on_ksets(build_pgl2(8).unwrap(), 3).unwrap();
        assert_eq!(a.domain_size(), 84);
        assert!(a.is_transitive());
    }

    #[test]
    fn psl29_3sets_intransitive() {
        let a = Action::on_ksets(build_psl2(9).unwrap(), 3).unwrap();
        assert_eq!(a.domain_size(), 120);
        assert!(!a.is_transitive());
        let orbits = a.orbits();
        assert_eq!(orbits.len(), 2);
        assert_eq!(orbits[0].len(), 60);
    }

    #[test]
    fn psl25_two_orbits_of_ten() {
        let a = Action::on_ksets(build_psl2(5).unwrap(), 3).unwrap();
        let orbits = a.orbits();
        assert_eq!(orbits.len(), 2);
        assert!(orbits.iter().all(|o| o.len() == 10));
    }

    #[test]
    fn psl213_two_orbits_of_182() {
        let a = Action::on_ksets(build_psl2(13).unwrap(), 3).unwrap();
        let orbits = a.orbits();
        assert_eq!(orbits.len(), 2);
        assert!(orbits.iter().all(|o| o.len() == 182));
    }

    #[test]
    fn bad_k_rejected() {
        assert!(Action::on_ksets(sym(4), 0).is_err());
        assert!(Action::on_ksets(sym(4), 4).is_err());
        assert!(Action::on_ksets(sym(8), 6).is_err());
    }

    #[test]
    fn stabilizer_orders() {
        // PGL(2,8) on 3-sets: stabilizer of order 6, shaped like Sym(3)
        let a = Action::on_ksets(build_pgl2(8).unwrap(), 3).unwrap();
        let stab = a.point_stabilizer(0).unwrap();
        assert_eq!(stab.order(), 6);
        let orders: Vec<usize> = stab.elements().iter().map(|e| e.order()).collect();
        assert_eq!(orders.iter().filter(|&&o| o == 2).count(), 3);
        assert_eq!(orders.iter().filter(|&&o| o == 3).count(), 2);

        // PSL(2,7) on 3-sets: stabilizer of order 3
        let a = Action::on_ksets(build_psl2(7).unwrap(), 3).unwrap();
        assert_eq!(a.point_stabilizer(0).unwrap().order(), 3);
    }

    #[test]
    fn orbit_stabilizer_identity() {
        let a = Action::on_ksets(build_psl2(9).unwrap(), 3).unwrap();
        for orbit in a.orbits() {
            let stab = a.point_stabilizer(orbit[0]).unwrap();
            assert_eq!(stab.order() * orbit.len(), a.group().order());
        }
    }

    #[test]
    fn regular_action_trivial_stabilizer() {
        // C5 acting on itself
        let g = Group::closure("C5", vec![cyc("(1,2,3,4,5)", 5)], 100).unwrap();
        let a = Action::on_points(g);
        assert!(a.is_transitive());
        assert_eq!(a.point_stabilizer(0).unwrap().order(), 1);
    }

    #[test]
    fn psl27_derangements_on_3sets() {
        let a = Action::on_ksets(build_psl2(7).unwrap(), 3).unwrap();
        let der = a.derangements();
        assert_eq!(der.count, 111);
        assert!(!der.flags[0]);
        // non-derangements: identity plus the 56 order-3 elements
        let non: Vec<usize> = (0..168).filter(|&i| !der.flags[i]).collect();
        assert_eq!(non.len(), 57);
        assert!(non[1..].iter().all(|&i| a.group().element(i).order() == 3));
    }

    #[test]
    fn pgl9_coset_derangements() {
        // every element of PGL(2,9) outside PSL(2,9) deranges the 3-sets
        let pgl = build_pgl2(9).unwrap();
        let psl = build_psl2(9).unwrap();
        let a = Action::on_ksets(pgl.clone(), 3).unwrap();
        let der = a.derangements();
        for i in 0..pgl.order() {
            if !psl.contains(pgl.element(i)) {
                assert!(der.flags[i]);
            }
        }
    }

    #[test]
    fn split_orbits_q9() {
        let (sq, nsq) = split_3set_orbits(9).unwrap();
        assert_eq!(sq.domain_size(), 60);
        assert_eq!(nsq.domain_size(), 60);
        assert!(sq.is_transitive() && nsq.is_transitive());
        // both restricted actions have 3-set stabilizers of order 6
        assert_eq!(sq.point_stabilizer(0).unwrap().order(), 6);
        assert_eq!(nsq.point_stabilizer(0).unwrap().order(), 6);
    }

    #[test]
    fn split_orbits_rejects_3_mod_4() {
        assert!(matches!(
            split_3set_orbits(7),
            Err(ActionError::NotOneModFour(7))
        ));
    }

    #[test]
    fn unipotent_intersecting_on_3sets() {
        let psl = build_psl2(27).unwrap();
        let a = Action::on_ksets(psl, 3).unwrap();
        let u = build_named_subgroup(SubgroupKind::Unipotent, 27).unwrap();
        assert!(a.is_intersecting_subgroup(&u).unwrap());
    }

    #[test]
    fn a4_intersecting_on_2sets_q7() {
        let psl = build_psl2(7).unwrap();
        let a = Action::on_ksets(psl, 2).unwrap();
        let a4 = build_named_subgroup(SubgroupKind::A4, 7).unwrap();
        assert!(a.is_intersecting_subgroup(&a4).unwrap());
    }

    #[test]
    fn derangement_containing_subgroup_not_intersecting() {
        let psl = build_psl2(7).unwrap();
        let a = Action::on_ksets(psl.clone(), 3).unwrap();
        assert!(!a.is_intersecting_subgroup(&psl).unwrap());
    }

    #[test]
    fn intersecting_set_pairs() {
        let psl = build_psl2(7).unwrap();
        let a = Action::on_ksets(psl.clone(), 3).unwrap();
        let der = a.derangements();
        let id = psl.element(0).clone();
        let non = psl
            .element((1..168).find(|&i| !der.flags[i]).unwrap())
            .clone();
        let d = psl
            .element((1..168).find(|&i| der.flags[i]).unwrap())
            .clone();
        assert!(a.is_intersecting_set(&[id.clone(), non]).unwrap());
        assert!(!a.is_intersecting_set(&[id, d]).unwrap());
    }

    #[test]
    fn foreign_element_rejected() {
        let psl = build_psl2(7).unwrap();
        let a = Action::on_ksets(psl, 3).unwrap();
        let foreign = cyc("(1,2)", 8);
        assert!(matches!(
            a.is_intersecting_set(&[foreign]),
            Err(ActionError::NotInGroup)
        ));
    }
}
