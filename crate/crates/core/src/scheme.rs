//! The conjugacy-class association scheme: structure constants, collapsed
//! class matrices, and the eigenvalues of any union-of-classes Cayley graph,
//! computed without character tables.
//!
//! For classes `C_0 = {1}, ..., C_d` the structure constant `a_{ijk}` counts
//! the ways `c_k = c_i c_j` with a fixed representative `c_k`. The matrices
//! `B_i[k][j] = a_{ijk}` represent multiplication by class sums on the center
//! of the group algebra; they commute, and their simultaneous eigenvalues are
//! exactly the per-class Cayley eigenvalues `|C_i| chi(c_i) / chi(1)`.
//!
//! Diagonalization works over the reals: conjugating by
//! `W = diag(sqrt|C_j|)` makes `B_i` for an inverse-closed class symmetric
//! and sends inverse-paired classes to mutual transposes. Joint eigenspaces
//! are found by refining with every symmetric combination; what remains is
//! one subspace per real character and one 2-dimensional subspace per
//! conjugate pair of complex characters, whose class eigenvalues are read off
//! a 2x2 complex eigenproblem.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exact::{bareiss_det, rational_rank, rat_to_f64, snap_to_rational};
use crate::perm::Group;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("class selection {0:?} is not closed under inverses")]
    NotInverseClosed(Vec<usize>),
    #[error("class selection may not contain the identity class")]
    ContainsIdentity,
    #[error("collapsed matrices do not commute; classes are inconsistent")]
    NonCommuting,
    #[error("eigenspace refinement failed: {0}")]
    RefinementFailed(String),
    #[error("multiplicity integrality check failed: {0}")]
    MultiplicityCheck(String),
    #[error("complex residue {0} exceeds tolerance on an inverse-closed union")]
    ComplexResidue(f64),
}

/// Structure constants of the conjugacy-class scheme.
pub struct CollapsedAlgebra {
    group_order: usize,
    sizes: Vec<usize>,
    inverse_map: Vec<usize>,
    /// Rational-fusion family of each class: least class index among the
    /// classes of `rep^m` over m coprime to the representative's order.
    /// Weighted sums that are constant on these families are rational.
    fusion: Vec<usize>,
    /// Element order of each class representative.
    rep_orders: Vec<usize>,
    /// `mats[i][k][j] = a_{ijk}`: multiplication by the class sum of `C_i`.
    mats: Vec<Vec<Vec<i64>>>,
}

impl CollapsedAlgebra {
    pub fn n_classes(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn inverse_map(&self) -> &[usize] {
        &self.inverse_map
    }

    pub fn group_order(&self) -> usize {
        self.group_order
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> i64 {
        self.mats[i][k][j]
    }

    pub fn fusion(&self) -> &[usize] {
        &self.fusion
    }

    pub fn rep_orders(&self) -> &[usize] {
        &self.rep_orders
    }

    /// Certifies that some common eigenvector of the given union matrices has
    /// exactly the given eigenvalues (stacked-kernel rank test over Q).
    pub fn certify_common_eigenvector(
        &self,
        unions: &[Vec<usize>],
        values: &[BigRational],
    ) -> bool {
        assert_eq!(unions.len(), values.len());
        let n = self.n_classes();
        let mut stacked: Vec<Vec<BigRational>> = Vec::with_capacity(unions.len() * n);
        for (sel, v) in unions.iter().zip(values) {
            let m = self.union_matrix(sel);
            for k in 0..n {
                let row: Vec<BigRational> = (0..n)
                    .map(|j| {
                        let mut e = BigRational::from_integer(BigInt::from(m[k][j]));
                        if k == j {
                            e -= v;
                        }
                        e
                    })
                    .collect();
                stacked.push(row);
            }
        }
        rational_rank(stacked) < n
    }

    /// The integer matrix `sum of B_i over i in selection`.
    pub fn union_matrix(&self, selection: &[usize]) -> Vec<Vec<i64>> {
        let n = self.n_classes();
        let mut m = vec![vec![0i64; n]; n];
        for &i in selection {
            for k in 0..n {
                for j in 0..n {
                    m[k][j] += self.mats[i][k][j];
                }
            }
        }
        m
    }
}

/// Computes the structure constants of the scheme of `g`.
/// `a_{ijk}` is found by enumerating `C_i x {representative of C_k}`.
pub fn class_constants(g: &Group) -> Result<Arc<CollapsedAlgebra>, SchemeError> {
    let cp = g.conjugacy_classes();
    let n = cp.classes.len();
    let mut a = vec![vec![vec![0i64; n]; n]; n]; // a[i][j][k]
    for k in 0..n {
        let ck = g.element(cp.representatives[k]);
        for i in 0..n {
            for &xi in &cp.classes[i] {
                let rest = g.element(xi).inverse().compose(ck);
                let j = cp.class_of[g.element_index(&rest).expect("closed")];
                a[i][j][k] += 1;
            }
        }
    }
    let mut mats = vec![vec![vec![0i64; n]; n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                mats[i][k][j] = a[i][j][k];
            }
        }
    }
    // rational fusion: orbit of each class under coprime power maps
    let rep_orders: Vec<usize> = cp
        .representatives
        .iter()
        .map(|&r| g.element(r).order())
        .collect();
    let mut fusion = vec![usize::MAX; n];
    for i in 0..n {
        if fusion[i] != usize::MAX {
            continue;
        }
        let rep = g.element(cp.representatives[i]);
        let o = rep_orders[i];
        let mut orbit = Vec::new();
        let mut pw = rep.clone();
        for m in 1..=o {
            if gcd(m, o) == 1 {
                let c = cp.class_of[g.element_index(&pw).expect("closed")];
                if !orbit.contains(&c) {
                    orbit.push(c);
                }
            }
            pw = pw.compose(rep);
        }
        let fam = *orbit.iter().min().unwrap();
        for &c in &orbit {
            fusion[c] = fam;
        }
    }
    let ca = CollapsedAlgebra {
        group_order: g.order(),
        sizes: cp.sizes.clone(),
        inverse_map: cp.inverse_class_map.clone(),
        fusion,
        rep_orders,
        mats,
    };
    // identity class multiplies trivially
    for k in 0..n {
        for j in 0..n {
            debug_assert_eq!(ca.mats[0][k][j], i64::from(k == j));
        }
    }
    // counting identity: every x in C_i sends c_k into exactly one class
    for i in 0..n {
        for k in 0..n {
            let row_sum: i64 = (0..n).map(|j| a[i][j][k]).sum();
            debug_assert_eq!(row_sum, ca.sizes[i] as i64);
        }
    }
    if !commute(&ca) {
        return Err(SchemeError::NonCommuting);
    }
    Ok(Arc::new(ca))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn commute(ca: &CollapsedAlgebra) -> bool {
    let n = ca.n_classes();
    for i in 0..n {
        for j in i + 1..n {
            for r in 0..n {
                for c in 0..n {
                    let mut ij = 0i64;
                    let mut ji = 0i64;
                    for t in 0..n {
                        ij += ca.mats[i][r][t] * ca.mats[j][t][c];
                        ji += ca.mats[j][r][t] * ca.mats[i][t][c];
                    }
                    if ij != ji {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// An inverse-closed set of non-identity class indices: the connection
/// classes of a graph in the scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSelection {
    indices: Vec<usize>,
}

impl ClassSelection {
    pub fn new(mut indices: Vec<usize>, inverse_map: &[usize]) -> Result<ClassSelection, SchemeError> {
        indices.sort_unstable();
        indices.dedup();
        if indices.contains(&0) {
            return Err(SchemeError::ContainsIdentity);
        }
        for &i in &indices {
            if !indices.contains(&inverse_map[i]) {
                return Err(SchemeError::NotInverseClosed(indices.clone()));
            }
        }
        Ok(ClassSelection { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// All non-identity classes not in this selection.
    pub fn complement(&self, n_classes: usize) -> Vec<usize> {
        (1..n_classes).filter(|i| !self.contains(*i)).collect()
    }
}

/// One common eigenspace of the collapsed algebra: per-class eigenvalues
/// (complex), a rational snap of each real entry, and the multiplicity of the
/// corresponding eigenspace in the full |G|-vertex Cayley graphs.
#[derive(Debug, Clone)]
pub struct EigenRow {
    /// Per-class eigenvalue as (re, im).
    pub omega: Vec<(f64, f64)>,
    /// Rational snap of each entry when real and close to a small rational.
    pub snapped: Vec<Option<BigRational>>,
    /// Total multiplicity contributed by this row (chi(1)^2 per character).
    pub multiplicity: usize,
    /// 1 for a real character, 2 for a merged conjugate pair.
    pub dim: usize,
}

/// Per-eigenspace rows of class eigenvalues with multiplicities.
pub struct EigenTable {
    algebra: Arc<CollapsedAlgebra>,
    pub rows: Vec<EigenRow>,
    /// Index of the trivial row (eigenvalue = class size everywhere).
    pub trivial_row: usize,
}

const OFF_REAL_TOL: f64 = 1e-9;

/// Simultaneously diagonalizes the collapsed algebra.
///
/// Rational snapping uses denominators up to `4 |G|` and tolerance 1e-9; a
/// snap is only a candidate, exactness is certified separately.
pub fn eigenrows(ca: &Arc<CollapsedAlgebra>) -> Result<EigenTable, SchemeError> {
    let n = ca.n_classes();
    let order = ca.group_order as f64;
    let w: Vec<f64> = ca.sizes.iter().map(|&s| (s as f64).sqrt()).collect();
    // N_i = W B_i W^{-1}
    let nmats: Vec<DMatrix<f64>> = (0..n)
        .map(|i| {
            DMatrix::from_fn(n, n, |k, j| ca.mats[i][k][j] as f64 * w[k] / w[j])
        })
        .collect();

    // symmetric commuting family that separates the real-irreducible pieces
    let mut family: Vec<DMatrix<f64>> = Vec::new();
    for i in 1..n {
        let istar = ca.inverse_map[i];
        if istar < i {
            continue;
        }
        if istar == i {
            let s = (&nmats[i] + nmats[i].transpose()) * 0.5;
            family.push(s);
        } else {
            let s = (&nmats[i] + &nmats[istar]) * 0.5;
            family.push((&s + s.transpose()) * 0.5);
            let d = (&nmats[i] - &nmats[istar]) * 0.5;
            family.push(&d * d.transpose()); // = -D^2, symmetric PSD
        }
    }

    // refine joint eigenspaces
    let mut subspaces: Vec<DMatrix<f64>> = vec![DMatrix::identity(n, n)];
    for s in &family {
        let mut next = Vec::new();
        for u in &subspaces {
            if u.ncols() == 1 {
                next.push(u.clone());
                continue;
            }
            let k = u.transpose() * s * u;
            let k = (&k + k.transpose()) * 0.5;
            let eig = SymmetricEigen::new(k);
            let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            idx.sort_by(|&a, &b| {
                eig.eigenvalues[a]
                    .partial_cmp(&eig.eigenvalues[b])
                    .unwrap()
            });
            let scale = 1.0 + eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let tol = 1e-7 * scale;
            let mut group_start = 0;
            for t in 1..=idx.len() {
                let boundary = t == idx.len()
                    || (eig.eigenvalues[idx[t]] - eig.eigenvalues[idx[t - 1]]).abs() > tol;
                if boundary {
                    let cols: Vec<usize> = idx[group_start..t].to_vec();
                    let v = DMatrix::from_fn(u.ncols(), cols.len(), |r, c| {
                        eig.eigenvectors[(r, cols[c])]
                    });
                    next.push(u * v);
                    group_start = t;
                }
            }
        }
        subspaces = next;
    }

    // read off eigenvalues per subspace
    let mut rows = Vec::new();
    for u in &subspaces {
        let dim = u.ncols();
        let omega: Vec<(f64, f64)> = match dim {
            1 => (0..n)
                .map(|i| (((u.transpose() * &nmats[i] * u))[(0, 0)], 0.0))
                .collect(),
            2 => extract_conjugate_pair(&nmats, u)?,
            other => {
                return Err(SchemeError::RefinementFailed(format!(
                    "joint eigenspace of dimension {other}"
                )))
            }
        };
        // m = |G| / sum |omega_i|^2 / |C_i|, once per character in the space
        let denom: f64 = (0..n)
            .map(|i| {
                let (re, im) = omega[i];
                (re * re + im * im) / ca.sizes[i] as f64
            })
            .sum();
        let m = order / denom;
        let rounded = m.round();
        if (m - rounded).abs() > 1e-3 * rounded.max(1.0) || rounded < 1.0 {
            return Err(SchemeError::MultiplicityCheck(format!(
                "computed multiplicity {m} is not close to an integer"
            )));
        }
        let snapped = omega
            .iter()
            .map(|&(re, im)| {
                if im.abs() <= OFF_REAL_TOL {
                    snap_to_rational(re, 4 * ca.group_order as u64, 1e-9)
                } else {
                    None
                }
            })
            .collect();
        rows.push(EigenRow {
            omega,
            snapped,
            multiplicity: dim * rounded as usize,
            dim,
        });
    }

    let total: usize = rows.iter().map(|r| r.multiplicity).sum();
    if total != ca.group_order {
        return Err(SchemeError::MultiplicityCheck(format!(
            "multiplicities sum to {total}, group order is {}",
            ca.group_order
        )));
    }
    let trivial_row = rows
        .iter()
        .position(|r| {
            (0..n).all(|i| {
                let (re, im) = r.omega[i];
                im.abs() < 1e-6 && (re - ca.sizes[i] as f64).abs() < 1e-6 * (1.0 + re.abs())
            })
        })
        .ok_or_else(|| SchemeError::RefinementFailed("no trivial row found".into()))?;

    // trace of every non-identity class sum is zero; a merged conjugate pair
    // contributes multiplicity * Re(omega) since the imaginary parts cancel
    for i in 1..n {
        let tr: f64 = rows
            .iter()
            .map(|r| r.multiplicity as f64 * r.omega[i].0)
            .sum();
        if tr.abs() > 1e-5 * order {
            return Err(SchemeError::RefinementFailed(format!(
                "nonzero trace {tr} on class {i}"
            )));
        }
    }

    Ok(EigenTable {
        algebra: ca.clone(),
        rows,
        trivial_row,
    })
}

/// Eigenvalues of every class matrix on a 2-dimensional joint eigenspace
/// carrying a conjugate pair of characters: pick one common complex
/// eigenvector and evaluate all classes along it.
fn extract_conjugate_pair(
    nmats: &[DMatrix<f64>],
    u: &DMatrix<f64>,
) -> Result<Vec<(f64, f64)>, SchemeError> {
    let n = nmats.len();
    let ks: Vec<[[f64; 2]; 2]> = (0..n)
        .map(|i| {
            let k = u.transpose() * &nmats[i] * u;
            [[k[(0, 0)], k[(0, 1)]], [k[(1, 0)], k[(1, 1)]]]
        })
        .collect();
    let scale = ks
        .iter()
        .flat_map(|k| k.iter().flatten())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let asym = |k: &[[f64; 2]; 2]| (k[0][1] - k[1][0]).abs();
    let pivot = (0..n)
        .max_by(|&a, &b| asym(&ks[a]).partial_cmp(&asym(&ks[b])).unwrap())
        .unwrap();
    if asym(&ks[pivot]) <= 1e-7 * (1.0 + scale) {
        return Err(SchemeError::RefinementFailed(
            "2-dimensional eigenspace with no complex structure".into(),
        ));
    }
    let k = &ks[pivot];
    let (a, b, c, d) = (k[0][0], k[0][1], k[1][0], k[1][1]);
    let disc = (a - d) * (a - d) + 4.0 * b * c;
    if disc >= 0.0 {
        return Err(SchemeError::RefinementFailed(
            "expected a complex eigenvalue pair".into(),
        ));
    }
    let im = (-disc).sqrt() / 2.0;
    let re = (a + d) / 2.0;
    // eigenvector for eigenvalue re + i*im
    let (w0, w1): ((f64, f64), (f64, f64)) = if b.abs() >= c.abs() {
        ((b, 0.0), (re - a, im))
    } else {
        ((re - d, im), (c, 0.0))
    };
    let norm0 = w0.0 * w0.0 + w0.1 * w0.1;
    let norm1 = w1.0 * w1.0 + w1.1 * w1.1;
    let use0 = norm0 >= norm1;
    Ok(ks
        .iter()
        .map(|ki| {
            // z = K_i w componentwise; omega = z[s] / w[s]
            let z0 = (
                ki[0][0] * w0.0 + ki[0][1] * w1.0,
                ki[0][0] * w0.1 + ki[0][1] * w1.1,
            );
            let z1 = (
                ki[1][0] * w0.0 + ki[1][1] * w1.0,
                ki[1][0] * w0.1 + ki[1][1] * w1.1,
            );
            let (z, wden, nrm) = if use0 {
                (z0, w0, norm0)
            } else {
                (z1, w1, norm1)
            };
            (
                (z.0 * wden.0 + z.1 * wden.1) / nrm,
                (z.1 * wden.0 - z.0 * wden.1) / nrm,
            )
        })
        .collect())
}

impl EigenTable {
    pub fn algebra(&self) -> &Arc<CollapsedAlgebra> {
        &self.algebra
    }

    pub fn n_classes(&self) -> usize {
        self.algebra.n_classes()
    }

    pub fn class_sizes(&self) -> &[usize] {
        self.algebra.sizes()
    }

    /// Per-row eigenvalue of the union graph over the selection, with the
    /// row's multiplicity. Entries are real; a complex residue is an error.
    pub fn union_spectrum(
        &self,
        selection: &ClassSelection,
    ) -> Result<Vec<(f64, usize)>, SchemeError> {
        let mut out = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let mut re = 0.0;
            let mut im = 0.0;
            for &i in selection.indices() {
                re += row.omega[i].0;
                im += row.omega[i].1;
            }
            let scale = 1.0 + re.abs();
            if im.abs() > OFF_REAL_TOL * scale * 1e3 {
                return Err(SchemeError::ComplexResidue(im));
            }
            out.push((re, row.multiplicity));
        }
        Ok(out)
    }

    /// Distinct union eigenvalues with summed multiplicities, sorted
    /// descending, merged at absolute tolerance 1e-6.
    pub fn distinct_union_spectrum(
        &self,
        selection: &ClassSelection,
    ) -> Result<Vec<(f64, usize)>, SchemeError> {
        let mut vals = self.union_spectrum(selection)?;
        vals.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut merged: Vec<(f64, usize)> = Vec::new();
        for (v, m) in vals {
            match merged.last_mut() {
                Some((lv, lm)) if (*lv - v).abs() <= 1e-6 * (1.0 + v.abs()) => *lm += m,
                _ => merged.push((v, m)),
            }
        }
        Ok(merged)
    }

    /// Certifies that `r` is an exact eigenvalue of the union matrix over
    /// `selection` by an exact determinant.
    pub fn certify_union_eigenvalue(&self, selection: &[usize], r: &BigRational) -> bool {
        let m = self.algebra.union_matrix(selection);
        let n = m.len();
        let num = r.numer();
        let den = r.denom();
        let mat: Vec<Vec<BigInt>> = (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        let mut v = BigInt::from(m[k][j]) * den;
                        if k == j {
                            v -= num;
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        bareiss_det(mat).is_zero()
    }

    /// Certifies that some common eigenvector of the selected class matrices
    /// has exactly the given per-class eigenvalues: the stacked matrices
    /// `B_i - v_i I` must share a nontrivial kernel.
    pub fn certify_row_vector(&self, classes: &[usize], values: &[BigRational]) -> bool {
        assert_eq!(classes.len(), values.len());
        let n = self.algebra.n_classes();
        let mut stacked: Vec<Vec<BigRational>> = Vec::with_capacity(classes.len() * n);
        for (&i, v) in classes.iter().zip(values) {
            for k in 0..n {
                let row: Vec<BigRational> = (0..n)
                    .map(|j| {
                        let mut e = BigRational::from_integer(BigInt::from(self.algebra.mats[i][k][j]));
                        if k == j {
                            e -= v;
                        }
                        e
                    })
                    .collect();
                stacked.push(row);
            }
        }
        rational_rank(stacked) < n
    }

    /// Snapped-and-certified distinct union eigenvalues; `None` when some
    /// value does not certify as an exact rational.
    pub fn exact_union_spectrum(
        &self,
        selection: &ClassSelection,
    ) -> Result<Option<Vec<(BigRational, usize)>>, SchemeError> {
        let distinct = self.distinct_union_spectrum(selection)?;
        let max_den = 4 * self.algebra.group_order as u64;
        let mut out = Vec::with_capacity(distinct.len());
        for (v, m) in distinct {
            let Some(r) = snap_to_rational(v, max_den, 1e-6) else {
                return Ok(None);
            };
            if !self.certify_union_eigenvalue(selection.indices(), &r) {
                return Ok(None);
            }
            out.push((r, m));
        }
        Ok(Some(out))
    }

    /// JSON dump of the table (rows, multiplicities, class sizes).
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "class_sizes": self.algebra.sizes(),
            "inverse_class_map": self.algebra.inverse_map(),
            "rows": self.rows.iter().map(|r| serde_json::json!({
                "omega": r.omega.iter().map(|&(re, im)| {
                    if im == 0.0 { serde_json::json!(re) } else { serde_json::json!([re, im]) }
                }).collect::<Vec<_>>(),
                "snapped": r.snapped.iter().map(|s| s.as_ref().map(crate::exact::format_ratio)).collect::<Vec<_>>(),
                "multiplicity": r.multiplicity,
                "dim": r.dim,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Independent oracle: eigenvalues of the explicit |G| x |G| union Cayley
/// graph (adjacency `class(g h^-1) in selection`), sorted descending.
pub fn dense_cayley_spectrum(g: &Group, selection: &[usize]) -> Vec<f64> {
    let n = g.order();
    let cp = g.conjugacy_classes();
    let mut in_sel = vec![false; cp.classes.len()];
    for &i in selection {
        in_sel[i] = true;
    }
    let mut adj = DMatrix::<f64>::zeros(n, n);
    for y in 0..n {
        let y_inv = g.element(y).inverse();
        for x in 0..n {
            let q = g.element(x).compose(&y_inv);
            let c = cp.class_of[g.element_index(&q).expect("closed")];
            if in_sel[c] {
                adj[(x, y)] = 1.0;
            }
        }
    }
    let eig = SymmetricEigen::new(adj);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals
}

/// Compares a collapsed-algebra union spectrum (expanded by multiplicities)
/// against the dense oracle; the maximum absolute difference.
pub fn oracle_spectrum_gap(
    g: &Group,
    et: &EigenTable,
    selection: &ClassSelection,
) -> Result<f64, SchemeError> {
    let mut expanded: Vec<f64> = Vec::with_capacity(g.order());
    for (v, m) in et.union_spectrum(selection)? {
        expanded.extend(std::iter::repeat(v).take(m));
    }
    expanded.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let dense = dense_cayley_spectrum(g, selection.indices());
    assert_eq!(expanded.len(), dense.len());
    Ok(expanded
        .iter()
        .zip(&dense)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Action;
    use crate::exact::rat_int;
    use crate::perm::{Perm, DEFAULT_CLOSURE_CAP};
    use crate::pgl::{build_pgl2, build_psl2};

    fn sym3() -> Arc<Group> {
        Group::closure(
            "S3",
            vec![
                Perm::from_cycles("(1,2,3)", 3).unwrap(),
                Perm::from_cycles("(1,2)", 3).unwrap(),
            ],
            DEFAULT_CLOSURE_CAP,
        )
        .unwrap()
    }

    #[test]
    fn sym3_structure_constants() {
        let g = sym3();
        let ca = class_constants(&g).unwrap();
        // transposition class squared: 3 ways to the identity, 3 ways to a 3-cycle
        assert_eq!(ca.constant(1, 1, 0), 3);
        assert_eq!(ca.constant(1, 1, 2), 3);
        assert_eq!(ca.constant(1, 1, 1), 0);
        // weighted counting: sum_k a_{ijk} |C_k| = |C_i| |C_j|
        for i in 0..3 {
            for j in 0..3 {
                let s: i64 = (0..3)
                    .map(|k| ca.constant(i, j, k) * ca.sizes()[k] as i64)
                    .sum();
                assert_eq!(s, (ca.sizes()[i] * ca.sizes()[j]) as i64);
            }
        }
    }

    #[test]
    fn sym3_eigenrows() {
        let g = sym3();
        let ca = class_constants(&g).unwrap();
        let et = eigenrows(&ca).unwrap();
        assert_eq!(et.rows.len(), 3);
        // rows: trivial (1,3,2), sign (1,-3,2), 2-dim (1,0,-1)
        let mut rows: Vec<(Vec<i64>, usize)> = et
            .rows
            .iter()
            .map(|r| {
                (
                    r.omega.iter().map(|&(re, _)| re.round() as i64).collect(),
                    r.multiplicity,
                )
            })
            .collect();
        rows.sort();
        assert_eq!(
            rows,
            vec![
                (vec![1, -3, 2], 1),
                (vec![1, 0, -1], 4),
                (vec![1, 3, 2], 1),
            ]
        );
        assert_eq!(
            et.rows[et.trivial_row]
                .omega
                .iter()
                .map(|&(re, _)| re.round() as usize)
                .collect::<Vec<_>>(),
            vec![1, 3, 2]
        );
    }

    #[test]
    fn number_of_rows_equals_number_of_classes() {
        for q in [4u32, 5, 7] {
            let g = build_psl2(q).unwrap();
            let ca = class_constants(&g).unwrap();
            let et = eigenrows(&ca).unwrap();
            let expected: usize = et.rows.iter().map(|r| r.dim).sum();
            assert_eq!(expected, ca.n_classes(), "q = {q}");
        }
    }

    #[test]
    fn pgl4_involution_column() {
        // eigenvalues of the involution-class matrix across rows
        let g = build_pgl2(4).unwrap();
        let ca = class_constants(&g).unwrap();
        let et = eigenrows(&ca).unwrap();
        let inv_class = (0..ca.n_classes())
            .find(|&i| g.element(g.conjugacy_classes().representatives[i]).order() == 2)
            .unwrap();
        let mut col: Vec<i64> = et
            .rows
            .iter()
            .flat_map(|r| std::iter::repeat(r.omega[inv_class].0.round() as i64).take(r.dim))
            .collect();
        col.sort();
        assert_eq!(col, vec![-5, -5, 0, 3, 15]);
    }

    #[test]
    fn pgl4_3set_union_spectrum_matches_dense_oracle() {
        let g = build_pgl2(4).unwrap();
        let a = Action::on_ksets(g.clone(), 3).unwrap();
        let sel = ClassSelection::new(
            a.derangements().non_derangement_classes(),
            &g.conjugacy_classes().inverse_class_map,
        )
        .unwrap();
        let ca = class_constants(&g).unwrap();
        let et = eigenrows(&ca).unwrap();
        let gap = oracle_spectrum_gap(&g, &et, &sel).unwrap();
        assert!(gap < 1e-8, "gap = {gap}");
        // frozen values computed by the dense oracle
        let distinct = et.distinct_union_spectrum(&sel).unwrap();
        let vals: Vec<i64> = distinct.iter().map(|&(v, _)| v.round() as i64).collect();
        assert_eq!(vals, vec![35, 5, -1, -5]);
        let mults: Vec<usize> = distinct.iter().map(|&(_, m)| m).collect();
        assert_eq!(mults, vec![1, 16, 25, 18]);
    }

    #[test]
    fn psl4_2set_derangement_spectrum() {
        // paper formula q^2(q-1)/2, 0, -q(q-1)/2, q at q = 4
        let g = build_psl2(4).unwrap();
        let a = Action::on_ksets(g.clone(), 2).unwrap();
        let sel = ClassSelection::new(
            a.derangements().derangement_classes(),
            &g.conjugacy_classes().inverse_class_map,
        )
        .unwrap();
        let ca = class_constants(&g).unwrap();
        let et = eigenrows(&ca).unwrap();
        let exact = et.exact_union_spectrum(&sel).unwrap().unwrap();
        let vals: Vec<BigRational> = exact.iter().map(|(v, _)| v.clone()).collect();
        assert_eq!(
            vals,
            vec![rat_int(24), rat_int(4), rat_int(0), rat_int(-6)]
        );
    }

    #[test]
    fn psl7_oracle_gap_3sets_and_2sets() {
        let g = build_psl2(7).unwrap();
        let ca = class_constants(&g).unwrap();
        let et = eigenrows(&ca).unwrap();
        for k in [2usize, 3] {
            let a = Action::on_ksets(g.clone(), k).unwrap();
            let inv = &g.conjugacy_classes().inverse_class_map;
            for sel in [
                ClassSelection::new(a.derangements().derangement_classes(), inv).unwrap(),
                ClassSelection::new(a.derangements().non_derangement_classes(), inv).unwrap(),
            ] {
                let gap = oracle_spectrum_gap(&g, &et, &sel).unwrap();
                assert!(gap < 1e-8, "k = {k}, gap = {gap}");
            }
        }
    }

    #[test]
    fn row_orthogonality() {
        // distinct rows are orthogonal under weights 1/|C_i|
        let g = build_psl2(5).unwrap();
        let ca = class_constants(&g).unwrap();
        let et = eigenrows(&ca).unwrap();
        let n = ca.n_classes();
        for r in 0..et.rows.len() {
            for s in r + 1..et.rows.len() {
                let mut re = 0.0;
                let mut im = 0.0;
                for i in 0..n {
                    let (a, b) = et.rows[r].omega[i];
                    let (c, d) = et.rows[s].omega[i];
                    // a+bi times conj(c+di), weighted
                    re += (a * c + b * d) / ca.sizes()[i] as f64;
                    im += (b * c - a * d) / ca.sizes()[i] as f64;
                }
                assert!(re.abs() < 1e-6 && im.abs() < 1e-6, "rows {r},{s}");
            }
        }
    }

    #[test]
    fn selection_validation() {
        let g = Group::closure(
            "C3",
            vec![Perm::from_cycles("(1,2,3)", 3).unwrap()],
            100,
        )
        .unwrap();
        let inv = &g.conjugacy_classes().inverse_class_map;
        // {g} alone is not inverse-closed in C3
        assert!(matches!(
            ClassSelection::new(vec![1], inv),
            Err(SchemeError::NotInverseClosed(_))
        ));
        assert!(ClassSelection::new(vec![1, 2], inv).is_ok());
        assert!(matches!(
            ClassSelection::new(vec![0, 1, 2], inv),
            Err(SchemeError::ContainsIdentity)
        ));
    }

    #[test]
    fn trivial_row_is_degree() {
        let g = build_psl2(4).unwrap();
        let a = Action::on_ksets(g.clone(), 2).unwrap();
        let sel = ClassSelection::new(
            a.derangements().derangement_classes(),
            &g.conjugacy_classes().inverse_class_map,
        )
        .unwrap();
        let ca = class_constants(&g).unwrap();
        let et = eigenrows(&ca).unwrap();
        let spec = et.union_spectrum(&sel).unwrap();
        let degree: usize = sel.indices().iter().map(|&i| ca.sizes()[i]).sum();
        assert_eq!(spec[et.trivial_row].0.round() as usize, degree);
        assert_eq!(degree, a.derangements().count);
    }

    #[test]
    fn certification_accepts_truth_rejects_lies() {
        let g = build_psl2(4).unwrap();
        let ca = class_constants(&g).unwrap();
        let et = eigenrows(&ca).unwrap();
        let a = Action::on_ksets(g.clone(), 2).unwrap();
        let sel = ClassSelection::new(
            a.derangements().derangement_classes(),
            &g.conjugacy_classes().inverse_class_map,
        )
        .unwrap();
        assert!(et.certify_union_eigenvalue(sel.indices(), &rat_int(24)));
        assert!(et.certify_union_eigenvalue(sel.indices(), &rat_int(-6)));
        assert!(!et.certify_union_eigenvalue(sel.indices(), &rat_int(7)));
    }
}
