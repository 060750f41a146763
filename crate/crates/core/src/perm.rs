//! Permutations and finitely generated permutation groups.
//!
//! Groups are fully materialized: a breadth-first closure over the generators
//! produces the element list, which is then sorted lexicographically by image
//! array. Every downstream index (conjugacy classes, eigenrows, clique
//! certificates) refers to this canonical order, so reports are reproducible
//! bit for bit. The composition convention is the left action
//! `(g*h)(v) = g(h(v))`.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PermError {
    #[error("images {0:?} are not a bijection")]
    NotBijection(Vec<u16>),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("group closure exceeded the cap of {0} elements")]
    ClosureCap(usize),
    #[error("empty generator list")]
    NoGenerators,
    #[error("cannot parse cycle notation {0:?}: {1}")]
    BadCycles(String, String),
    #[error("element is not a member of the group")]
    NotInGroup,
    #[error("group file error: {0}")]
    File(String),
}

/// A permutation of `{0..n-1}` stored as its image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Box<[u16]>,
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm({})", self.cycle_string())
    }
}

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm {
            images: (0..n as u16).collect(),
        }
    }

    pub fn from_images(images: Vec<u16>) -> Result<Perm, PermError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if (i as usize) >= n || seen[i as usize] {
                return Err(PermError::NotBijection(images));
            }
            seen[i as usize] = true;
        }
        Ok(Perm {
            images: images.into_boxed_slice(),
        })
    }

    /// Parses cycle notation like `"(1,2,3)(4,5)"` with 1-based points.
    /// Cycles may also be separated by whitespace; `"()"` or `""` is the identity.
    pub fn from_cycles(s: &str, degree: usize) -> Result<Perm, PermError> {
        let bad = |m: &str| PermError::BadCycles(s.to_string(), m.to_string());
        let mut images: Vec<u16> = (0..degree as u16).collect();
        let mut moved = vec![false; degree];
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut rest = compact.as_str();
        while !rest.is_empty() {
            if !rest.starts_with('(') {
                return Err(bad("expected '('"));
            }
            let close = rest.find(')').ok_or_else(|| bad("missing ')'"))?;
            let body = &rest[1..close];
            rest = &rest[close + 1..];
            if body.is_empty() {
                continue;
            }
            let mut cycle = Vec::new();
            for part in body.split(',') {
                let v: usize = part.parse().map_err(|_| bad("not a number"))?;
                if v == 0 || v > degree {
                    return Err(bad("point out of range (cycles are 1-based)"));
                }
                let v = v - 1;
                if moved[v] {
                    return Err(bad("point repeated across cycles"));
                }
                moved[v] = true;
                cycle.push(v);
            }
            for i in 0..cycle.len() {
                images[cycle[i]] = cycle[(i + 1) % cycle.len()] as u16;
            }
        }
        Ok(Perm {
            images: images.into_boxed_slice(),
        })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u16] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, v: usize) -> usize {
        self.images[v] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    /// Left-action composition: `(self.compose(h))(v) = self(h(v))`.
    pub fn compose(&self, h: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), h.degree());
        Perm {
            images: h.images.iter().map(|&v| self.images[v as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u16; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u16;
        }
        Perm {
            images: inv.into_boxed_slice(),
        }
    }

    /// Multiplicative order.
    pub fn order(&self) -> usize {
        let mut ord = 1usize;
        for c in self.cycle_lengths() {
            ord = lcm(ord, c);
        }
        ord
    }

    pub fn fixed_points(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|&(i, &x)| i == x as usize)
            .count()
    }

    /// Cycle lengths including fixed points, sorted.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut lens = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut v = start;
            while !seen[v] {
                seen[v] = true;
                len += 1;
                v = self.apply(v);
            }
            lens.push(len);
        }
        lens.sort_unstable();
        lens
    }

    /// 1-based cycle notation, fixed points omitted; identity prints `"()"`.
    pub fn cycle_string(&self) -> String {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = String::new();
        for start in 0..n {
            if seen[start] || self.apply(start) == start {
                seen[start] = true;
                continue;
            }
            out.push('(');
            let mut v = start;
            loop {
                seen[v] = true;
                out.push_str(&(v + 1).to_string());
                v = self.apply(v);
                if v == start {
                    break;
                }
                out.push(',');
            }
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Composes `g * h` with the left-action convention `result(v) = g(h(v))`.
pub fn perm_compose(g: &Perm, h: &Perm) -> Result<Perm, PermError> {
    if g.degree() != h.degree() {
        return Err(PermError::DegreeMismatch(g.degree(), h.degree()));
    }
    Ok(g.compose(h))
}

pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

/// A fully materialized permutation group. `elements` is sorted
/// lexicographically by image array; index 0 is always the identity.
pub struct Group {
    name: String,
    degree: usize,
    generators: Vec<Perm>,
    elements: Vec<Perm>,
    index: HashMap<Perm, usize>,
    classes: OnceLock<ClassPartition>,
}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group({}, order {})", self.name, self.order())
    }
}

/// Conjugacy classes of a group, as index lists into the canonical element
/// order. Class 0 is the identity class; classes are ordered by least member.
#[derive(Debug, Clone)]
pub struct ClassPartition {
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
    pub sizes: Vec<usize>,
    pub representatives: Vec<usize>,
    pub inverse_class_map: Vec<usize>,
}

impl Group {
    /// Breadth-first closure of the generators.
    pub fn closure(name: &str, generators: Vec<Perm>, cap: usize) -> Result<Arc<Group>, PermError> {
        if generators.is_empty() {
            return Err(PermError::NoGenerators);
        }
        let degree = generators[0].degree();
        for g in &generators {
            if g.degree() != degree {
                return Err(PermError::DegreeMismatch(degree, g.degree()));
            }
        }
        let mut seen: HashMap<Perm, ()> = HashMap::new();
        let id = Perm::identity(degree);
        let mut queue = VecDeque::new();
        seen.insert(id.clone(), ());
        queue.push_back(id);
        while let Some(e) = queue.pop_front() {
            for g in &generators {
                let f = g.compose(&e);
                if !seen.contains_key(&f) {
                    if seen.len() >= cap {
                        return Err(PermError::ClosureCap(cap));
                    }
                    seen.insert(f.clone(), ());
                    queue.push_back(f);
                }
            }
        }
        let mut elements: Vec<Perm> = seen.into_keys().collect();
        elements.sort_unstable();
        debug_assert!(elements[0].is_identity());
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Ok(Arc::new(Group {
            name: name.to_string(),
            degree,
            generators,
            elements,
            index,
            classes: OnceLock::new(),
        }))
    }

    /// Wraps an element list that is already closed (e.g. a stabilizer).
    /// A small generating set is extracted greedily for reporting.
    pub fn from_elements(name: &str, degree: usize, mut elements: Vec<Perm>) -> Arc<Group> {
        elements.sort_unstable();
        elements.dedup();
        assert!(!elements.is_empty() && elements[0].is_identity());
        let generators = small_generating_set(degree, &elements);
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Arc::new(Group {
            name: name.to_string(),
            degree,
            generators,
            elements,
            index,
            classes: OnceLock::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Perm {
        &self.elements[i]
    }

    pub fn element_index(&self, p: &Perm) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    pub fn contains(&self, p: &Perm) -> bool {
        self.index.contains_key(p)
    }

    pub fn is_subgroup_of(&self, other: &Group) -> bool {
        self.degree == other.degree && self.elements.iter().all(|e| other.contains(e))
    }

    /// Conjugacy classes, computed once as conjugation orbits under the
    /// generators and cached.
    pub fn conjugacy_classes(&self) -> &ClassPartition {
        self.classes.get_or_init(|| {
            let n = self.order();
            let mut class_of = vec![usize::MAX; n];
            let mut classes: Vec<Vec<usize>> = Vec::new();
            let gen_invs: Vec<Perm> = self.generators.iter().map(|g| g.inverse()).collect();
            for start in 0..n {
                if class_of[start] != usize::MAX {
                    continue;
                }
                let cid = classes.len();
                let mut members = vec![start];
                class_of[start] = cid;
                let mut queue = VecDeque::new();
                queue.push_back(start);
                while let Some(e) = queue.pop_front() {
                    let pe = &self.elements[e];
                    for (g, gi) in self.generators.iter().zip(&gen_invs) {
                        let conj = g.compose(pe).compose(gi);
                        let j = self.index[&conj];
                        if class_of[j] == usize::MAX {
                            class_of[j] = cid;
                            members.push(j);
                            queue.push_back(j);
                        }
                    }
                }
                members.sort_unstable();
                classes.push(members);
            }
            let sizes = classes.iter().map(|c| c.len()).collect();
            let representatives: Vec<usize> = classes.iter().map(|c| c[0]).collect();
            let inverse_class_map = classes
                .iter()
                .map(|c| {
                    let inv = self.elements[c[0]].inverse();
                    class_of[self.index[&inv]]
                })
                .collect();
            ClassPartition {
                classes,
                class_of,
                sizes,
                representatives,
                inverse_class_map,
            }
        })
    }

    /// Class index of the product `g * h^{ -1 }`, the adjacency test of every
    /// graph in the conjugacy-class scheme.
    pub fn class_of_quotient(&self, g: usize, h: usize) -> usize {
        let p = self.elements[g].compose(&self.elements[h].inverse());
        self.conjugacy_classes().class_of[self.index[&p]]
    }
}

/// Greedy extraction of a small generating set from a closed element list.
fn small_generating_set(degree: usize, elements: &[Perm]) -> Vec<Perm> {
    if elements.len() == 1 {
        return vec![Perm::identity(degree)];
    }
    let target = elements.len();
    let mut gens: Vec<Perm> = Vec::new();
    let mut have: HashMap<Perm, ()> = HashMap::new();
    have.insert(Perm::identity(degree), ());
    for e in elements {
        if have.contains_key(e) {
            continue;
        }
        gens.push(e.clone());
        // re-close with the enlarged generating set
        let mut queue: VecDeque<Perm> = have.keys().cloned().collect();
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let y = g.compose(&x);
                if !have.contains_key(&y) {
                    have.insert(y.clone(), ());
                    queue.push_back(y);
                }
            }
        }
        if have.len() == target {
            break;
        }
    }
    gens
}

/// Convenience wrapper matching the closure entry point.
pub fn group_closure(generators: Vec<Perm>, cap: usize) -> Result<Arc<Group>, PermError> {
    Group::closure("G", generators, cap)
}

// ---------------------------------------------------------------------------
// Group generator files
// ---------------------------------------------------------------------------

/// One generator in a group file: an explicit image array (0-based) or a
/// cycle-notation string (1-based).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorSpec {
    Images(Vec<u16>),
    Cycles(String),
}

/// Optional annotations carried by a group file. `known_density` marks a
/// group whose density is cited from the literature rather than computed.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GroupAnnotations {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_density: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl GroupAnnotations {
    pub fn is_empty(&self) -> bool {
        self.known_density.is_none() && self.source.is_none()
    }
}

/// On-disk description of a finitely generated permutation group.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupFile {
    pub name: String,
    pub degree: usize,
    pub generators: Vec<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "GroupAnnotations::is_empty")]
    pub annotations: GroupAnnotations,
}

impl GroupFile {
    pub fn from_group(g: &Group) -> GroupFile {
        GroupFile {
            name: g.name().to_string(),
            degree: g.degree(),
            generators: g
                .generators()
                .iter()
                .map(|p| GeneratorSpec::Images(p.images().to_vec()))
                .collect(),
            annotations: GroupAnnotations::default(),
        }
    }

    pub fn parse(json: &str) -> Result<GroupFile, PermError> {
        serde_json::from_str(json).map_err(|e| PermError::File(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("group file serializes")
    }

    pub fn generator_perms(&self) -> Result<Vec<Perm>, PermError> {
        self.generators
            .iter()
            .map(|g| match g {
                GeneratorSpec::Images(v) => Perm::from_images(v.clone()),
                GeneratorSpec::Cycles(s) => Perm::from_cycles(s, self.degree),
            })
            .collect()
    }

    /// Materializes the group. Annotated files are normally not materialized;
    /// callers decide based on `annotations.known_density`.
    pub fn build(&self, cap: usize) -> Result<Arc<Group>, PermError> {
        Group::closure(&self.name, self.generator_perms()?, cap)
    }
}
