//! Projective-line groups over `GF(q)` as concrete permutation groups.
//!
//! Points of the projective line are canonically ordered as `(1, y)` for `y`
//! in field index order, followed by the point at infinity `(0, 1)`. A matrix
//! `(a b; c d)` sends `(u1, u2)` to `(a*u1 + b*u2, c*u1 + d*u2)`; scalar
//! multiples act identically, so invertible matrices give Mobius permutations
//! of the line. All builders derive their generators from this one encoding,
//! which makes every constructed group reproducible.

use std::sync::Arc;

use thiserror::Error;

use crate::gf::{ff_make, FieldElement, FieldSpec, GfError};
use crate::perm::{Group, Perm, PermError, DEFAULT_CLOSURE_CAP};

#[derive(Debug, Error)]
pub enum PglError {
    #[error("q = {0} is not a prime power >= 4")]
    BadQ(u32),
    #[error("{0}")]
    Gf(#[from] GfError),
    #[error("{0}")]
    Perm(#[from] PermError),
    #[error("construction {kind:?} requires {requirement}, but q = {q}")]
    Congruence {
        kind: String,
        q: u32,
        requirement: String,
    },
    #[error("triple sign needs odd q")]
    EvenCharacteristic,
    #[error("triple sign is undefined for repeated points")]
    RepeatedPoints,
    #[error("no (r, t) pair realizing {0} was found; this indicates a bug")]
    PresentationSearchFailed(String),
}

/// Factors a prime power; returns `(p, k)` with `q = p^k`.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u32;
    while p * p <= q {
        if q % p == 0 {
            let mut k = 0;
            let mut t = q;
            while t % p == 0 {
                t /= p;
                k += 1;
            }
            return if t == 1 { Some((p, k)) } else { None };
        }
        p += 1;
    }
    Some((q, 1))
}

/// The projective line `PG(1, q)` with its canonical point order.
#[derive(Debug, Clone)]
pub struct ProjLine {
    spec: FieldSpec,
    points: Vec<(FieldElement, FieldElement)>,
}

/// An invertible 2x2 matrix over `GF(q)`, acting on the projective line.
#[derive(Debug, Clone)]
pub struct ProjMatrix {
    pub a: FieldElement,
    pub b: FieldElement,
    pub c: FieldElement,
    pub d: FieldElement,
}

impl ProjLine {
    pub fn new(q: u32) -> Result<ProjLine, PglError> {
        let (p, k) = prime_power(q).ok_or(PglError::BadQ(q))?;
        let spec = ff_make(p, k)?;
        let mut points = Vec::with_capacity(q as usize + 1);
        for v in 0..q as usize {
            points.push((spec.one(), spec.from_index(v)));
        }
        points.push((spec.zero(), spec.one()));
        Ok(ProjLine { spec, points })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, i: usize) -> &(FieldElement, FieldElement) {
        &self.points[i]
    }

    /// Index of the normalized form of a nonzero homogeneous pair.
    pub fn index_of(&self, u1: &FieldElement, u2: &FieldElement) -> usize {
        let f = &self.spec;
        if u1.is_zero() {
            assert!(!u2.is_zero(), "(0,0) is not a projective point");
            self.points.len() - 1
        } else {
            let y = f.mul(u2, &f.inv(u1).expect("nonzero"));
            f.index_of(&y)
        }
    }

    /// The permutation of the line induced by an invertible matrix.
    pub fn matrix_perm(&self, m: &ProjMatrix) -> Perm {
        let f = &self.spec;
        let images: Vec<u16> = self
            .points
            .iter()
            .map(|(u1, u2)| {
                let v1 = f.add(&f.mul(&m.a, u1), &f.mul(&m.b, u2));
                let v2 = f.add(&f.mul(&m.c, u1), &f.mul(&m.d, u2));
                self.index_of(&v1, &v2) as u16
            })
            .collect();
        Perm::from_images(images).expect("matrix action is a bijection")
    }

    /// The permutation of the line induced by the field automorphism
    /// `u -> u^(p^j)` applied coordinatewise.
    pub fn frobenius_perm(&self, j: u32) -> Perm {
        let f = &self.spec;
        let images: Vec<u16> = self
            .points
            .iter()
            .map(|(u1, u2)| self.index_of(&f.frobenius(u1, j), &f.frobenius(u2, j)) as u16)
            .collect();
        Perm::from_images(images).expect("field automorphisms act bijectively")
    }

    fn translation(&self, t: &FieldElement) -> ProjMatrix {
        let f = &self.spec;
        ProjMatrix {
            a: f.one(),
            b: f.zero(),
            c: t.clone(),
            d: f.one(),
        }
    }

    fn scaling(&self, s: &FieldElement) -> ProjMatrix {
        let f = &self.spec;
        ProjMatrix {
            a: f.one(),
            b: f.zero(),
            c: f.zero(),
            d: s.clone(),
        }
    }

    fn inversion_det1(&self) -> ProjMatrix {
        let f = &self.spec;
        ProjMatrix {
            a: f.zero(),
            b: f.neg(&f.one()),
            c: f.one(),
            d: f.zero(),
        }
    }

    fn inversion(&self) -> ProjMatrix {
        let f = &self.spec;
        ProjMatrix {
            a: f.zero(),
            b: f.one(),
            c: f.one(),
            d: f.zero(),
        }
    }
}

fn check_q(q: u32) -> Result<(u32, u32), PglError> {
    match prime_power(q) {
        Some((p, k)) if q >= 4 => Ok((p, k)),
        _ => Err(PglError::BadQ(q)),
    }
}

/// `PGL(2, q)` on the q+1 points of the projective line;
/// order `(q-1) q (q+1)`, sharply 3-transitive.
pub fn build_pgl2(q: u32) -> Result<Arc<Group>, PglError> {
    check_q(q)?;
    let line = ProjLine::new(q)?;
    let f = line.spec();
    let g = f.primitive_root();
    let gens = vec![
        line.matrix_perm(&line.translation(&f.one())),
        line.matrix_perm(&line.scaling(&g)),
        line.matrix_perm(&line.inversion()),
    ];
    let grp = Group::closure(&format!("PGL(2,{q})"), gens, DEFAULT_CLOSURE_CAP)?;
    let expected = (q as usize - 1) * q as usize * (q as usize + 1);
    assert_eq!(grp.order(), expected, "PGL(2,{q}) order");
    Ok(grp)
}

/// `PSL(2, q)`: the square-determinant subgroup of `PGL(2, q)`;
/// order `(q-1) q (q+1) / gcd(2, q-1)`. For even q the element set equals
/// `PGL(2, q)`.
pub fn build_psl2(q: u32) -> Result<Arc<Group>, PglError> {
    let (p, _) = check_q(q)?;
    let line = ProjLine::new(q)?;
    let f = line.spec();
    let g = f.primitive_root();
    let gens = if p == 2 {
        vec![
            line.matrix_perm(&line.translation(&f.one())),
            line.matrix_perm(&line.scaling(&g)),
            line.matrix_perm(&line.inversion()),
        ]
    } else {
        let g2 = f.mul(&g, &g);
        vec![
            line.matrix_perm(&line.translation(&f.one())),
            line.matrix_perm(&line.scaling(&g2)),
            line.matrix_perm(&line.inversion_det1()),
        ]
    };
    let grp = Group::closure(&format!("PSL(2,{q})"), gens, DEFAULT_CLOSURE_CAP)?;
    let expected = (q as usize - 1) * q as usize * (q as usize + 1) / if p == 2 { 1 } else { 2 };
    assert_eq!(grp.order(), expected, "PSL(2,{q}) order");
    Ok(grp)
}

/// The extension `PSL(2,q)<a t^(k/2)>` for `q = p^k` with p odd and k even:
/// `PSL(2,q)` together with the permutation
/// `[x : y] -> M [x^(p^(k/2)) : y^(p^(k/2))]` where M is a diagonal matrix of
/// non-square determinant. Order `2 |PSL(2,q)|`; transitive on 3-sets.
pub fn build_psl_sigma(q: u32) -> Result<Arc<Group>, PglError> {
    let (p, k) = check_q(q)?;
    if p == 2 || k % 2 != 0 {
        return Err(PglError::Congruence {
            kind: "psl-sigma".into(),
            q,
            requirement: "q = p^k with p odd and k even".into(),
        });
    }
    let line = ProjLine::new(q)?;
    let f = line.spec();
    let g = f.primitive_root();
    let frob = line.frobenius_perm(k / 2);
    let twist = line.matrix_perm(&line.scaling(&g)).compose(&frob);
    let psl = build_psl2(q)?;
    let mut gens = psl.generators().to_vec();
    gens.push(twist);
    let grp = Group::closure(&format!("PSL(2,{q}).sigma"), gens, DEFAULT_CLOSURE_CAP)?;
    assert_eq!(grp.order(), 2 * psl.order(), "PSL(2,{q})<at^(k/2)> order");
    assert!(psl.is_subgroup_of(&grp));
    Ok(grp)
}

/// Named subgroup kinds from the intersecting-set constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubgroupKind {
    /// Upper unipotent subgroup of order q (any prime power q).
    Unipotent,
    /// Unipotent extended by the order-3 scaling; order 3q; needs q = 2^(2l).
    UnipotentC3,
    /// Unipotent extended by negation; order 2q; needs q = 3^(2l).
    UnipotentPm,
    /// A subgroup isomorphic to Alt(4) inside PSL(2, q); q odd.
    A4,
    /// A subgroup isomorphic to Alt(5) inside PSL(2, q); q^2 = 1 mod 5.
    A5,
}

impl SubgroupKind {
    pub fn parse(s: &str) -> Option<SubgroupKind> {
        match s {
            "unipotent" => Some(SubgroupKind::Unipotent),
            "unipotent_c3" => Some(SubgroupKind::UnipotentC3),
            "unipotent_pm" => Some(SubgroupKind::UnipotentPm),
            "a4" => Some(SubgroupKind::A4),
            "a5" => Some(SubgroupKind::A5),
            _ => None,
        }
    }
}

/// Builds one of the named intersecting subgroups on the q+1 line points.
pub fn build_named_subgroup(kind: SubgroupKind, q: u32) -> Result<Arc<Group>, PglError> {
    let (p, k) = check_q(q)?;
    let line = ProjLine::new(q)?;
    let f = line.spec();
    let congruence = |req: &str| PglError::Congruence {
        kind: format!("{kind:?}"),
        q,
        requirement: req.into(),
    };
    match kind {
        SubgroupKind::Unipotent => {
            let gens = basis_translations(&line);
            let grp = Group::closure(&format!("U({q})"), gens, DEFAULT_CLOSURE_CAP)?;
            assert_eq!(grp.order(), q as usize);
            Ok(grp)
        }
        SubgroupKind::UnipotentC3 => {
            if p != 2 || k % 2 != 0 {
                return Err(congruence("q = 2^(2l)"));
            }
            let g = f.primitive_root();
            let x = f.pow(&g, (q as u64 - 1) / 3);
            let mut gens = basis_translations(&line);
            gens.push(line.matrix_perm(&line.scaling(&x)));
            let grp = Group::closure(&format!("U({q}).3"), gens, DEFAULT_CLOSURE_CAP)?;
            assert_eq!(grp.order(), 3 * q as usize);
            Ok(grp)
        }
        SubgroupKind::UnipotentPm => {
            if p != 3 || k % 2 != 0 {
                return Err(congruence("q = 3^(2l)"));
            }
            let minus_one = f.neg(&f.one());
            let mut gens = basis_translations(&line);
            gens.push(line.matrix_perm(&line.scaling(&minus_one)));
            let grp = Group::closure(&format!("U({q}).2"), gens, DEFAULT_CLOSURE_CAP)?;
            assert_eq!(grp.order(), 2 * q as usize);
            Ok(grp)
        }
        SubgroupKind::A4 => {
            if p == 2 {
                return Err(congruence("odd q"));
            }
            let psl = build_psl2(q)?;
            presentation_subgroup(&psl, 3, "A4")
        }
        SubgroupKind::A5 => {
            if (q * q) % 5 != 1 {
                return Err(congruence("q^2 = 1 mod 5"));
            }
            let psl = build_psl2(q)?;
            presentation_subgroup(&psl, 5, "A5")
        }
    }
}

fn basis_translations(line: &ProjLine) -> Vec<Perm> {
    let f = line.spec();
    (0..f.k())
        .map(|i| {
            let xi = f.pow(&f.gen_x(), i as u64);
            line.matrix_perm(&line.translation(&xi))
        })
        .collect()
}

/// Finds `<r, t>` with `r^3 = t^2 = (rt)^m = 1` inside `parent`,
/// taking the first pair in canonical order: r runs over order-3 class
/// representatives, t over order-2 elements. With exact element orders the
/// relations force Alt(4) for m = 3 and Alt(5) for m = 5.
fn presentation_subgroup(
    parent: &Arc<Group>,
    m: usize,
    name: &str,
) -> Result<Arc<Group>, PglError> {
    let classes = parent.conjugacy_classes();
    let order2: Vec<usize> = (0..parent.order())
        .filter(|&i| parent.element(i).order() == 2)
        .collect();
    for &rep in &classes.representatives {
        let r = parent.element(rep);
        if r.order() != 3 {
            continue;
        }
        for &ti in &order2 {
            let t = parent.element(ti);
            if r.compose(t).order() == m {
                let grp = Group::closure("tmp", vec![r.clone(), t.clone()], DEFAULT_CLOSURE_CAP)?;
                let expected = if m == 3 { 12 } else { 60 };
                assert_eq!(grp.order(), expected, "{name} presentation order");
                let named = Group::from_elements(
                    &format!("{} < {}", name, parent.name()),
                    parent.degree(),
                    grp.elements().to_vec(),
                );
                return Ok(named);
            }
        }
    }
    Err(PglError::PresentationSearchFailed(name.to_string()))
}

/// Square / non-square classification of `D(u,v,w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripleSign {
    Square,
    NonSquare,
}

/// Classifies `D(u,v,w) = D(u,v) D(v,w) D(w,u)` as a square or non-square in
/// `GF(q)*`, where `D(u,v) = u1 v2 - u2 v1`. Well-defined on unordered triples
/// when `q = 1 mod 4` (swapping arguments negates D, and -1 is a square).
pub fn triple_sign(line: &ProjLine, i: usize, j: usize, l: usize) -> Result<TripleSign, PglError> {
    let f = line.spec();
    if f.p() == 2 {
        return Err(PglError::EvenCharacteristic);
    }
    let det = |x: usize, y: usize| {
        let (u1, u2) = line.point(x);
        let (v1, v2) = line.point(y);
        f.sub(&f.mul(u1, v2), &f.mul(u2, v1))
    };
    let d = f.mul(&f.mul(&det(i, j), &det(j, l)), &det(l, i));
    if d.is_zero() {
        return Err(PglError::RepeatedPoints);
    }
    Ok(if f.is_square(&d).expect("nonzero") {
        TripleSign::Square
    } else {
        TripleSign::NonSquare
    })
}

// ---------------------------------------------------------------------------
// Affine line groups (catalog material for the density arrays)
// ---------------------------------------------------------------------------

/// `AGL(1, q)` acting on the q field elements: all maps `x -> a x + b`.
pub fn build_agl1(q: u32) -> Result<Arc<Group>, PglError> {
    let (p, k) = prime_power(q).ok_or(PglError::BadQ(q))?;
    let f = ff_make(p, k)?;
    let mut gens = affine_translations(&f);
    gens.push(affine_scaling(&f));
    let grp = Group::closure(&format!("AGL(1,{q})"), gens, DEFAULT_CLOSURE_CAP)?;
    assert_eq!(grp.order(), (q as usize) * (q as usize - 1));
    Ok(grp)
}

/// `AGammaL(1, q)`: `AGL(1, q)` extended by the Frobenius `x -> x^p`.
pub fn build_agammal1(q: u32) -> Result<Arc<Group>, PglError> {
    let (p, k) = prime_power(q).ok_or(PglError::BadQ(q))?;
    let f = ff_make(p, k)?;
    let mut gens = affine_translations(&f);
    gens.push(affine_scaling(&f));
    let frob: Vec<u16> = (0..q as usize)
        .map(|v| f.index_of(&f.frobenius(&f.from_index(v), 1)) as u16)
        .collect();
    gens.push(Perm::from_images(frob).expect("frobenius bijects"));
    let grp = Group::closure(&format!("AGammaL(1,{q})"), gens, DEFAULT_CLOSURE_CAP)?;
    assert_eq!(grp.order(), (q as usize) * (q as usize - 1) * k as usize);
    Ok(grp)
}

fn affine_translations(f: &FieldSpec) -> Vec<Perm> {
    (0..f.k())
        .map(|i| {
            let xi = f.pow(&f.gen_x(), i as u64);
            let images: Vec<u16> = (0..f.q() as usize)
                .map(|v| f.index_of(&f.add(&f.from_index(v), &xi)) as u16)
                .collect();
            Perm::from_images(images).expect("translation bijects")
        })
        .collect()
}

fn affine_scaling(f: &FieldSpec) -> Perm {
    let g = f.primitive_root();
    let images: Vec<u16> = (0..f.q() as usize)
        .map(|v| f.index_of(&f.mul(&f.from_index(v), &g)) as u16)
        .collect();
    Perm::from_images(images).expect("scaling bijects")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgl_orders() {
        assert_eq!(build_pgl2(4).unwrap().order(), 60);
        assert_eq!(build_pgl2(5).unwrap().order(), 120);
        assert_eq!(build_pgl2(8).unwrap().order(), 504);
        assert_eq!(build_pgl2(9).unwrap().order(), 720);
    }

    #[test]
    fn psl_orders_and_containment() {
        let psl9 = build_psl2(9).unwrap();
        assert_eq!(psl9.order(), 360);
        assert_eq!(build_psl2(7).unwrap().order(), 168);
        let pgl9 = build_pgl2(9).unwrap();
        assert!(psl9.is_subgroup_of(&pgl9));
    }

    #[test]
    fn psl_equals_pgl_for_even_q() {
        let psl = build_psl2(8).unwrap();
        let pgl = build_pgl2(8).unwrap();
        assert_eq!(psl.elements(), pgl.elements());
    }

    #[test]
    fn pgl_sharply_3_transitive_small() {
        // the stabilizer of an ordered triple is trivial
        for q in [4u32, 5, 7, 8, 9, 11, 13, 16] {
            let g = build_pgl2(q).unwrap();
            let fixing = g
                .elements()
                .iter()
                .filter(|e| e.apply(0) == 0 && e.apply(1) == 1 && e.apply(2) == 2)
                .count();
            assert_eq!(fixing, 1, "q = {q}");
        }
    }

    #[test]
    fn psl_sigma_q9() {
        let g = build_psl_sigma(9).unwrap();
        assert_eq!(g.order(), 720);
        let psl = build_psl2(9).unwrap();
        assert!(psl.is_subgroup_of(&g));
        // distinct from PGL(2,9) as a permutation set
        let pgl = build_pgl2(9).unwrap();
        assert_ne!(g.elements(), pgl.elements());
    }

    #[test]
    fn psl_sigma_rejects_bad_q() {
        assert!(matches!(
            build_psl_sigma(27),
            Err(PglError::Congruence { .. })
        ));
        assert!(matches!(
            build_psl_sigma(16),
            Err(PglError::Congruence { .. })
        ));
    }

    #[test]
    fn psl_sigma_q25_order() {
        assert_eq!(build_psl_sigma(25).unwrap().order(), 15_600);
    }

    #[test]
    fn named_subgroup_orders() {
        assert_eq!(
            build_named_subgroup(SubgroupKind::Unipotent, 27)
                .unwrap()
                .order(),
            27
        );
        assert_eq!(
            build_named_subgroup(SubgroupKind::UnipotentC3, 16)
                .unwrap()
                .order(),
            48
        );
        assert_eq!(
            build_named_subgroup(SubgroupKind::UnipotentPm, 9)
                .unwrap()
                .order(),
            18
        );
        assert_eq!(
            build_named_subgroup(SubgroupKind::A4, 13).unwrap().order(),
            12
        );
        assert_eq!(
            build_named_subgroup(SubgroupKind::A5, 19).unwrap().order(),
            60
        );
    }

    #[test]
    fn named_subgroups_live_inside_parent() {
        let pgl16 = build_pgl2(16).unwrap();
        let u3 = build_named_subgroup(SubgroupKind::UnipotentC3, 16).unwrap();
        assert!(u3.is_subgroup_of(&pgl16));

        let psl13 = build_psl2(13).unwrap();
        let a4 = build_named_subgroup(SubgroupKind::A4, 13).unwrap();
        assert!(a4.is_subgroup_of(&psl13));

        // negation has square determinant when q = 1 mod 4
        let psl9 = build_psl2(9).unwrap();
        let upm = build_named_subgroup(SubgroupKind::UnipotentPm, 9).unwrap();
        assert!(upm.is_subgroup_of(&psl9));
    }

    #[test]
    fn named_subgroup_congruence_errors() {
        assert!(build_named_subgroup(SubgroupKind::UnipotentC3, 8).is_err());
        assert!(build_named_subgroup(SubgroupKind::UnipotentPm, 27).is_err());
        assert!(build_named_subgroup(SubgroupKind::A5, 13).is_err());
    }

    #[test]
    fn triple_sign_swap_negates() {
        // swapping two arguments negates D; for q = 3 mod 4 that flips the class
        let line = ProjLine::new(7).unwrap();
        let s1 = triple_sign(&line, 0, 1, 2).unwrap();
        let s2 = triple_sign(&line, 1, 0, 2).unwrap();
        assert_ne!(s1, s2);
        // and for q = 1 mod 4 it does not
        let line = ProjLine::new(13).unwrap();
        let s1 = triple_sign(&line, 0, 1, 2).unwrap();
        let s2 = triple_sign(&line, 1, 0, 2).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn triple_sign_psl_invariant() {
        let line = ProjLine::new(13).unwrap();
        let psl = build_psl2(13).unwrap();
        let sign0 = triple_sign(&line, 0, 1, 2).unwrap();
        for step in [1usize, 17, 101] {
            let g = psl.element(step % psl.order());
            let s = triple_sign(&line, g.apply(0), g.apply(1), g.apply(2)).unwrap();
            assert_eq!(s, sign0);
        }
    }

    #[test]
    fn triple_sign_errors() {
        let line = ProjLine::new(8).unwrap();
        assert!(matches!(
            triple_sign(&line, 0, 1, 2),
            Err(PglError::EvenCharacteristic)
        ));
        let line = ProjLine::new(13).unwrap();
        assert!(matches!(
            triple_sign(&line, 0, 0, 2),
            Err(PglError::RepeatedPoints)
        ));
    }

    #[test]
    fn affine_groups() {
        assert_eq!(build_agl1(8).unwrap().order(), 56);
        assert_eq!(build_agammal1(8).unwrap().order(), 168);
    }

    #[test]
    fn rejects_non_prime_powers() {
        assert!(build_pgl2(6).is_err());
        assert!(build_pgl2(3).is_err());
        assert!(build_pgl2(12).is_err());
    }
}
