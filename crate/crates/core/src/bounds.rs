//! Upper bounds on cocliques and cliques of graphs in the scheme: the
//! (weighted) ratio bound and the LP clique bound, both in exact rational
//! arithmetic whenever the needed eigenvalues certify as rationals.
//!
//! Exactness pipeline: float eigenrows from the collapsed algebra are snapped
//! to small rationals and then certified against the integer class matrices
//! (determinant test for a single eigenvalue, stacked-kernel test for a
//! per-row vector). Certified data feeds an exact LP: vertex enumeration over
//! constraint subsets for up to three variables, a Bland-rule rational
//! simplex beyond that. When certification fails the same machinery runs on
//! the floats converted losslessly to rationals and the result is flagged
//! inexact.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exact::{rat_to_f64, snap_to_rational, solve_square};
use crate::scheme::{ClassSelection, EigenTable, SchemeError};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("weighting has no positive weight inside the selection")]
    EmptyWeighting,
    #[error("weights must agree on inverse-paired classes")]
    AsymmetricWeights,
    #[error("negative weight on class {0}")]
    NegativeWeight(usize),
    #[error("weighted matrix has no negative eigenvalue; ratio bound is vacuous")]
    NoBound,
    #[error("LP is unbounded; the selection misses a negative eigenvalue")]
    Unbounded,
    #[error("{0}")]
    Scheme(#[from] SchemeError),
}

/// Non-negative rational weights on a class selection, equal across
/// inverse-paired classes.
#[derive(Debug, Clone)]
pub struct Weighting {
    weights: Vec<BigRational>,
}

impl Weighting {
    pub fn new(weights: Vec<BigRational>, inverse_map: &[usize]) -> Result<Weighting, BoundsError> {
        for (i, w) in weights.iter().enumerate() {
            if w.is_negative() {
                return Err(BoundsError::NegativeWeight(i));
            }
            if weights[inverse_map[i]] != *w {
                return Err(BoundsError::AsymmetricWeights);
            }
        }
        if weights.iter().all(|w| w.is_zero()) {
            return Err(BoundsError::EmptyWeighting);
        }
        Ok(Weighting { weights })
    }

    /// Weight 1 on every class of the selection.
    pub fn unit(selection: &ClassSelection, n_classes: usize) -> Weighting {
        let mut weights = vec![BigRational::zero(); n_classes];
        for &i in selection.indices() {
            weights[i] = BigRational::one();
        }
        Weighting { weights }
    }

    /// Builds a weighting from per-class values; classes not mentioned get 0.
    pub fn from_pairs(
        pairs: &[(usize, BigRational)],
        n_classes: usize,
        inverse_map: &[usize],
    ) -> Result<Weighting, BoundsError> {
        let mut weights = vec![BigRational::zero(); n_classes];
        for (i, w) in pairs {
            weights[*i] = w.clone();
        }
        Weighting::new(weights, inverse_map)
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&i| !self.weights[i].is_zero())
            .collect()
    }
}

/// Which bound produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Ratio,
    WeightedRatio,
    CliqueLp,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Ratio => "ratio",
            BoundKind::WeightedRatio => "weighted-ratio",
            BoundKind::CliqueLp => "lp",
        }
    }
}

/// Outcome of a bound computation. `value` is exact when `exact` is set;
/// otherwise it is the float result converted losslessly to a rational and
/// must be treated as approximate.
#[derive(Debug, Clone)]
pub struct BoundResult {
    pub kind: BoundKind,
    pub value: BigRational,
    pub exact: bool,
    pub floored: BigInt,
    /// Ratio bound: constant row sum of the weighted matrix.
    pub d: Option<BigRational>,
    /// Ratio bound: least eigenvalue.
    pub tau: Option<BigRational>,
    /// LP / weighted ratio: optimizer as (class index, weight).
    pub optimizer: Option<Vec<(usize, BigRational)>>,
    /// Eigenrow indices whose constraints are tight at the optimizer.
    pub binding_rows: Option<Vec<usize>>,
    pub method: String,
}

impl BoundResult {
    fn assemble(
        kind: BoundKind,
        value: BigRational,
        exact: bool,
        method: String,
    ) -> BoundResult {
        assert!(
            value >= BigRational::one(),
            "a coclique/clique bound is at least 1"
        );
        let floored = value.floor().to_integer();
        BoundResult {
            kind,
            value,
            exact,
            floored,
            d: None,
            tau: None,
            optimizer: None,
            binding_rows: None,
            method,
        }
    }
}

fn big_rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float")
}

/// Weighted ratio bound `|V| / (1 - d/tau)` for cocliques of the union graph
/// over `selection`, with weights `w`. The bound value is floored separately
/// in `floored`.
pub fn ratio_bound(
    et: &EigenTable,
    selection: &ClassSelection,
    w: &Weighting,
    n_vertices: usize,
) -> Result<BoundResult, BoundsError> {
    let ca = et.algebra();
    for (i, wi) in w.weights().iter().enumerate() {
        if !wi.is_zero() && !selection.contains(i) {
            return Err(BoundsError::EmptyWeighting);
        }
    }
    // constant row sum = trivial-row value
    let d: BigRational = w
        .weights()
        .iter()
        .enumerate()
        .map(|(i, wi)| wi * BigRational::from_integer(BigInt::from(ca.sizes()[i])))
        .sum();
    if d.is_zero() || d.is_negative() {
        return Err(BoundsError::EmptyWeighting);
    }
    // float row values
    let wf: Vec<f64> = w.weights().iter().map(rat_to_f64).collect();
    let mut tau_float = f64::INFINITY;
    for row in &et.rows {
        let v: f64 = (0..ca.n_classes()).map(|i| wf[i] * row.omega[i].0).sum();
        tau_float = tau_float.min(v);
    }
    if tau_float >= -1e-12 {
        return Err(BoundsError::NoBound);
    }

    // certify tau: scale weights to integers, check the candidate is an exact
    // eigenvalue of the integer weighted matrix
    let mut exact = false;
    let mut tau = big_rat(tau_float);
    let lcm_den = w
        .weights()
        .iter()
        .fold(BigInt::one(), |acc, wi| num::integer::lcm(acc, wi.denom().clone()));
    let max_den = 4u64
        .saturating_mul(ca.group_order() as u64)
        .saturating_mul(lcm_den.to_u64().unwrap_or(u64::MAX / 4).max(1));
    if let Some(cand) = snap_to_rational(tau_float, max_den, 1e-6) {
        let scaled = &cand * BigRational::from_integer(lcm_den.clone());
        if scaled.is_integer() || true {
            // build integer weighted matrix sum (D w_i) B_i
            let n = ca.n_classes();
            let mut m = vec![vec![BigInt::zero(); n]; n];
            for i in 0..n {
                let coeff = (&w.weights()[i] * BigRational::from_integer(lcm_den.clone()))
                    .to_integer();
                if coeff.is_zero() {
                    continue;
                }
                for k in 0..n {
                    for j in 0..n {
                        m[k][j] += &coeff * BigInt::from(ca.constant(i, j, k));
                    }
                }
            }
            // candidate scaled eigenvalue: cand * D
            let target = &cand * BigRational::from_integer(lcm_den.clone());
            let det_mat: Vec<Vec<BigInt>> = (0..n)
                .map(|k| {
                    (0..n)
                        .map(|j| {
                            let mut v = &m[k][j] * target.denom();
                            if k == j {
                                v -= target.numer();
                            }
                            v
                        })
                        .collect()
                })
                .collect();
            if crate::exact::bareiss_det(det_mat).is_zero() {
                exact = true;
                tau = cand;
            }
        }
    }

    // |V| / (1 - d/tau)
    let nv = BigRational::from_integer(BigInt::from(n_vertices));
    let denom = BigRational::one() - &d / &tau;
    let value = nv / denom;
    let mut res = BoundResult::assemble(
        BoundKind::if_unit(w, selection),
        value,
        exact,
        format!("ratio({})", if is_unit(w, selection) { "unit" } else { "weighted" }),
    );
    res.d = Some(d);
    res.tau = Some(tau);
    res.optimizer = Some(
        w.support()
            .into_iter()
            .map(|i| (i, w.weights()[i].clone()))
            .collect(),
    );
    Ok(res)
}

fn is_unit(w: &Weighting, sel: &ClassSelection) -> bool {
    sel.indices().iter().all(|&i| w.weights()[i].is_one())
        && w.support().len() == sel.indices().len()
}

impl BoundKind {
    fn if_unit(w: &Weighting, sel: &ClassSelection) -> BoundKind {
        if is_unit(w, sel) {
            BoundKind::Ratio
        } else {
            BoundKind::WeightedRatio
        }
    }
}

// ---------------------------------------------------------------------------
// Exact linear programs: maximize c.x subject to rows a.x >= rhs (rhs <= 0)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub(crate) struct Lp {
    pub c: Vec<BigRational>,
    pub rows: Vec<Vec<BigRational>>,
    pub rhs: Vec<BigRational>,
    /// Per-variable non-negativity flag.
    pub nonneg: Vec<bool>,
}

#[derive(Debug, Clone)]
pub(crate) enum LpSolution {
    Optimal {
        x: Vec<BigRational>,
        value: BigRational,
        binding: Vec<usize>,
    },
    Unbounded,
}

/// Vertex enumeration over all n-subsets of constraints (n <= 3): exact and
/// exhaustive. Unbounded detection via extreme rays of the recession cone.
pub(crate) fn lp_vertex_enumeration(lp: &Lp) -> LpSolution {
    let n = lp.c.len();
    assert!(n <= 3, "vertex enumeration is for at most 3 variables");
    // augment with nonnegativity rows
    let mut rows = lp.rows.clone();
    let mut rhs = lp.rhs.clone();
    for (v, &nn) in lp.nonneg.iter().enumerate() {
        if nn {
            let mut r = vec![BigRational::zero(); n];
            r[v] = BigRational::one();
            rows.push(r);
            rhs.push(BigRational::zero());
        }
    }
    let m = rows.len();
    let feasible = |x: &[BigRational]| {
        rows.iter().zip(&rhs).all(|(a, b)| {
            let lhs: BigRational = a.iter().zip(x).map(|(ai, xi)| ai * xi).sum();
            lhs >= *b
        })
    };
    // unboundedness: an improving ray in the recession cone. Extreme rays lie
    // on n-1 tight constraints; scan kernel directions of all (n-1)-subsets.
    let ray_improves = |d: &[BigRational]| {
        let cd: BigRational = lp.c.iter().zip(d).map(|(c, di)| c * di).sum();
        if !cd.is_positive() {
            return false;
        }
        rows.iter().all(|a| {
            let ad: BigRational = a.iter().zip(d).map(|(ai, di)| ai * di).sum();
            !ad.is_negative()
        })
    };
    let mut best: Option<(Vec<BigRational>, BigRational, Vec<usize>)> = None;
    let subsets = k_subsets(m, n);
    for sub in &subsets {
        let a: Vec<Vec<BigRational>> = sub.iter().map(|&r| rows[r].clone()).collect();
        let b: Vec<BigRational> = sub.iter().map(|&r| rhs[r].clone()).collect();
        let Some(x) = solve_square(&a, &b) else {
            continue;
        };
        if !feasible(&x) {
            continue;
        }
        let value: BigRational = lp.c.iter().zip(&x).map(|(c, xi)| c * xi).sum();
        let better = match &best {
            None => true,
            Some((_, bv, _)) => value > *bv,
        };
        if better {
            let binding: Vec<usize> = (0..lp.rows.len())
                .filter(|&r| {
                    let lhs: BigRational =
                        lp.rows[r].iter().zip(&x).map(|(ai, xi)| ai * xi).sum();
                    lhs == lp.rhs[r]
                })
                .collect();
            best = Some((x, value, binding));
        }
    }
    // rays from (n-1)-subsets
    if n >= 1 {
        for sub in k_subsets(m, n - 1) {
            for dir in kernel_directions(&sub, &rows, n) {
                if ray_improves(&dir) {
                    return LpSolution::Unbounded;
                }
            }
        }
    }
    match best {
        Some((x, value, binding)) => LpSolution::Optimal { x, value, binding },
        None => {
            // no vertex: with a feasible origin this means the cone is full
            // of lines; fall back to the simplex which handles it
            lp_simplex(lp)
        }
    }
}

fn k_subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..m {
            cur.push(v);
            rec(v + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

/// Directions spanning the kernel of the chosen constraint rows (for n <= 3
/// the kernel of n-1 rows is generically a line; returns +/- the direction).
fn kernel_directions(sub: &[usize], rows: &[Vec<BigRational>], n: usize) -> Vec<Vec<BigRational>> {
    // solve sub-rows . d = 0 by brute force over a basis completion
    let a: Vec<Vec<BigRational>> = sub.iter().map(|&r| rows[r].clone()).collect();
    let mut dirs = Vec::new();
    // try fixing each coordinate to 1 and solving the rest
    for fixed in 0..n {
        let others: Vec<usize> = (0..n).filter(|&v| v != fixed).collect();
        if a.len() != others.len() {
            continue;
        }
        let sys: Vec<Vec<BigRational>> = a
            .iter()
            .map(|row| others.iter().map(|&v| row[v].clone()).collect())
            .collect();
        let rhs: Vec<BigRational> = a.iter().map(|row| -row[fixed].clone()).collect();
        if let Some(sol) = solve_square(&sys, &rhs) {
            let mut d = vec![BigRational::zero(); n];
            d[fixed] = BigRational::one();
            for (pos, &v) in others.iter().enumerate() {
                d[v] = sol[pos].clone();
            }
            dirs.push(d.clone());
            dirs.push(d.into_iter().map(|v| -v).collect());
        }
    }
    dirs
}

/// Bland-rule primal simplex on the standard-form translation of the LP.
/// Free variables are split into differences of non-negative ones; with
/// `rhs <= 0` the slack basis is feasible, so no phase 1 is needed.
pub(crate) fn lp_simplex(lp: &Lp) -> LpSolution {
    let n = lp.c.len();
    let m = lp.rows.len();
    for b in &lp.rhs {
        assert!(!b.is_positive(), "simplex assumes rhs <= 0 (origin feasible)");
    }
    // columns: for each variable, u part; for free variables also v part
    let mut col_var: Vec<(usize, bool)> = Vec::new(); // (variable, negated)
    for v in 0..n {
        col_var.push((v, false));
        if !lp.nonneg[v] {
            col_var.push((v, true));
        }
    }
    let ncols = col_var.len();
    // tableau: m rows of [A' | I | b'], objective row below
    // constraints: -a.x <= -rhs  (coefficients negated)
    let width = ncols + m + 1;
    let mut t = vec![vec![BigRational::zero(); width]; m + 1];
    for r in 0..m {
        for (cix, &(v, neg)) in col_var.iter().enumerate() {
            let coeff = if neg {
                lp.rows[r][v].clone()
            } else {
                -lp.rows[r][v].clone()
            };
            t[r][cix] = coeff;
        }
        t[r][ncols + r] = BigRational::one();
        t[r][width - 1] = -lp.rhs[r].clone();
    }
    // objective: maximize c.x -> row holds -reduced costs initially
    for (cix, &(v, neg)) in col_var.iter().enumerate() {
        t[m][cix] = if neg { lp.c[v].clone() } else { -lp.c[v].clone() };
    }
    let mut basis: Vec<usize> = (ncols..ncols + m).collect();
    loop {
        // Bland: entering = smallest column with negative objective entry
        let Some(enter) = (0..width - 1).find(|&c| t[m][c].is_negative()) else {
            break;
        };
        // leaving: min ratio, ties by smallest basis variable
        let mut leave: Option<usize> = None;
        let mut best_ratio: Option<BigRational> = None;
        for r in 0..m {
            if t[r][enter].is_positive() {
                let ratio = &t[r][width - 1] / &t[r][enter];
                let take = match &best_ratio {
                    None => true,
                    Some(br) => {
                        ratio < *br || (ratio == *br && basis[r] < basis[leave.unwrap()])
                    }
                };
                if take {
                    best_ratio = Some(ratio);
                    leave = Some(r);
                }
            }
        }
        let Some(lr) = leave else {
            return LpSolution::Unbounded;
        };
        // pivot
        let piv = t[lr][enter].clone();
        for c in 0..width {
            let v = &t[lr][c] / &piv;
            t[lr][c] = v;
        }
        for r in 0..=m {
            if r != lr && !t[r][enter].is_zero() {
                let f = t[r][enter].clone();
                for c in 0..width {
                    let v = &t[r][c] - &f * &t[lr][c];
                    t[r][c] = v;
                }
            }
        }
        basis[lr] = enter;
    }
    // read solution
    let mut x = vec![BigRational::zero(); n];
    for (r, &b) in basis.iter().enumerate() {
        if b < ncols {
            let (v, neg) = col_var[b];
            let val = t[r][width - 1].clone();
            if neg {
                x[v] -= val;
            } else {
                x[v] += val;
            }
        }
    }
    let value: BigRational = lp.c.iter().zip(&x).map(|(c, xi)| c * xi).sum();
    let binding: Vec<usize> = (0..m)
        .filter(|&r| {
            let lhs: BigRational = lp.rows[r].iter().zip(&x).map(|(a, xi)| a * xi).sum();
            lhs == lp.rhs[r]
        })
        .collect();
    LpSolution::Optimal { x, value, binding }
}

// ---------------------------------------------------------------------------
// The LP clique bound
// ---------------------------------------------------------------------------

/// Exact constraint system extracted from the eigenrows for a selection:
/// one variable per inverse-pair of classes, one constraint per distinct
/// eigenrow vector.
struct LpSystem {
    /// Variable -> classes it weights (a class or an inverse pair).
    var_classes: Vec<Vec<usize>>,
    /// Distinct constraint vectors (certified exact when `exact`).
    constraints: Vec<Vec<BigRational>>,
    /// Eigenrow indices behind each constraint.
    members: Vec<Vec<usize>>,
    exact: bool,
}

fn build_lp_system(et: &EigenTable, selection: &ClassSelection) -> LpSystem {
    let ca = et.algebra();
    // variables: inverse pairs within the selection
    let mut var_classes: Vec<Vec<usize>> = Vec::new();
    for &i in selection.indices() {
        let istar = ca.inverse_map()[i];
        if istar < i {
            continue;
        }
        if istar == i {
            var_classes.push(vec![i]);
        } else {
            var_classes.push(vec![i, istar]);
        }
    }
    // float row vectors per variable
    let mut raw: Vec<(Vec<f64>, usize)> = Vec::new();
    for (ridx, row) in et.rows.iter().enumerate() {
        let v: Vec<f64> = var_classes
            .iter()
            .map(|cls| cls.iter().map(|&i| row.omega[i].0).sum())
            .collect();
        raw.push((v, ridx));
    }
    // dedupe
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    'outer: for (v, ridx) in raw {
        for (gv, members) in groups.iter_mut() {
            if gv
                .iter()
                .zip(&v)
                .all(|(a, b)| (a - b).abs() <= 1e-7 * (1.0 + a.abs().max(b.abs())))
            {
                members.push(ridx);
                continue 'outer;
            }
        }
        groups.push((v, vec![ridx]));
    }
    // snap + certify each distinct vector
    let max_den = 4 * ca.group_order() as u64;
    let unions: Vec<Vec<usize>> = var_classes.clone();
    let mut constraints = Vec::new();
    let mut members = Vec::new();
    let mut exact = true;
    for (v, mem) in groups {
        let snapped: Option<Vec<BigRational>> = v
            .iter()
            .map(|&x| snap_to_rational(x, max_den, 1e-6))
            .collect();
        let vec_exact = match snapped {
            Some(vals) if ca.certify_common_eigenvector(&unions, &vals) => Some(vals),
            _ => None,
        };
        match vec_exact {
            Some(vals) => constraints.push(vals),
            None => {
                exact = false;
                constraints.push(v.iter().map(|&x| big_rat(x)).collect());
            }
        }
        members.push(mem);
    }
    LpSystem {
        var_classes,
        constraints,
        members,
        exact,
    }
}

/// Delsarte-style clique bound for the union graph over `selection`:
/// maximize `1 + sum x_i |C_i|` over weightings with `1 + sum x_i w_i(row)
/// >= 0` for every eigenrow. Exact rational optimum via vertex enumeration
/// for up to 3 variables, rational simplex beyond.
pub fn clique_lp_bound(
    et: &EigenTable,
    selection: &ClassSelection,
) -> Result<BoundResult, BoundsError> {
    let ca = et.algebra();
    let sys = build_lp_system(et, selection);
    let nvars = sys.var_classes.len();
    let c: Vec<BigRational> = sys
        .var_classes
        .iter()
        .map(|cls| {
            BigRational::from_integer(BigInt::from(
                cls.iter().map(|&i| ca.sizes()[i]).sum::<usize>(),
            ))
        })
        .collect();
    let lp = Lp {
        c,
        rows: sys.constraints.clone(),
        rhs: vec![-BigRational::one(); sys.constraints.len()],
        nonneg: vec![false; nvars],
    };
    let sol = if nvars <= 3 {
        lp_vertex_enumeration(&lp)
    } else {
        lp_simplex(&lp)
    };
    let (x, value, binding) = match sol {
        LpSolution::Unbounded => return Err(BoundsError::Unbounded),
        LpSolution::Optimal { x, value, binding } => (x, value, binding),
    };
    // sanity: every constraint holds at the optimizer (exact arithmetic)
    for (row, rhs) in lp.rows.iter().zip(&lp.rhs) {
        let lhs: BigRational = row.iter().zip(&x).map(|(a, xi)| a * xi).sum();
        assert!(lhs >= *rhs, "LP optimizer violates a constraint");
    }
    let total = BigRational::one() + value;
    let mut res = BoundResult::assemble(
        BoundKind::CliqueLp,
        total,
        sys.exact,
        format!(
            "lp({}{})",
            if sys.exact { "exact" } else { "float" },
            if nvars <= 3 { "-vertex" } else { "-simplex" }
        ),
    );
    res.optimizer = Some(
        sys.var_classes
            .iter()
            .zip(&x)
            .flat_map(|(cls, xi)| cls.iter().map(move |&i| (i, xi.clone())))
            .collect(),
    );
    res.binding_rows = Some(
        binding
            .iter()
            .flat_map(|&cidx| sys.members[cidx].iter().copied())
            .collect(),
    );
    Ok(res)
}

/// Coclique bound for the union graph over `t_edges`: the better (smaller) of
/// the unit-weight ratio bound and the clique LP bound on the complementary
/// selection. Reports which method won in `method`.
pub fn coclique_bound(
    et: &EigenTable,
    t_edges: &ClassSelection,
    n_vertices: usize,
) -> Result<BoundResult, BoundsError> {
    let ca = et.algebra();
    let unit = Weighting::unit(t_edges, ca.n_classes());
    let ratio = ratio_bound(et, t_edges, &unit, n_vertices);
    let complement = ClassSelection::new(t_edges.complement(ca.n_classes()), ca.inverse_map())?;
    let lp = clique_lp_bound(et, &complement)?;
    match ratio {
        Err(BoundsError::NoBound) => Ok(lp),
        Err(e) => Err(e),
        Ok(r) => {
            if r.value <= lp.value {
                let mut r = r;
                r.method = format!("{} (beat lp)", r.method);
                Ok(r)
            } else {
                let mut lp = lp;
                lp.method = format!("{} (beat ratio)", lp.method);
                Ok(lp)
            }
        }
    }
}

/// Automatic weight search for the ratio bound: weights constant on
/// rational-fusion families inside the selection (such weighted row sums are
/// rational), normalized to least eigenvalue -1; then the best bound is
/// `|V| / (1 + d*)` where `d*` maximizes the weighted degree subject to every
/// row value >= -1. This LP rediscovers (or beats) any hand-chosen weights.
pub fn auto_weighted_ratio_bound(
    et: &EigenTable,
    selection: &ClassSelection,
    n_vertices: usize,
) -> Result<BoundResult, BoundsError> {
    let ca = et.algebra();
    // family variables
    let mut fams: Vec<usize> = selection
        .indices()
        .iter()
        .map(|&i| ca.fusion()[i])
        .collect();
    fams.sort_unstable();
    fams.dedup();
    let var_classes: Vec<Vec<usize>> = fams
        .iter()
        .map(|&f| {
            selection
                .indices()
                .iter()
                .copied()
                .filter(|&i| ca.fusion()[i] == f)
                .collect()
        })
        .collect();
    // per-row family sums, snapped and certified
    let max_den = 4 * ca.group_order() as u64;
    let mut constraints: Vec<Vec<BigRational>> = Vec::new();
    let mut exact = true;
    let mut seen: Vec<Vec<f64>> = Vec::new();
    for row in &et.rows {
        let v: Vec<f64> = var_classes
            .iter()
            .map(|cls| cls.iter().map(|&i| row.omega[i].0).sum())
            .collect();
        if seen.iter().any(|s| {
            s.iter()
                .zip(&v)
                .all(|(a, b)| (a - b).abs() <= 1e-7 * (1.0 + a.abs().max(b.abs())))
        }) {
            continue;
        }
        seen.push(v.clone());
        let snapped: Option<Vec<BigRational>> = v
            .iter()
            .map(|&x| snap_to_rational(x, max_den, 1e-6))
            .collect();
        match snapped {
            Some(vals) if ca.certify_common_eigenvector(&var_classes, &vals) => {
                constraints.push(vals)
            }
            _ => {
                exact = false;
                constraints.push(v.iter().map(|&x| big_rat(x)).collect());
            }
        }
    }
    let c: Vec<BigRational> = var_classes
        .iter()
        .map(|cls| {
            BigRational::from_integer(BigInt::from(
                cls.iter().map(|&i| ca.sizes()[i]).sum::<usize>(),
            ))
        })
        .collect();
    let nvars = c.len();
    let lp = Lp {
        c,
        rows: constraints.clone(),
        rhs: vec![-BigRational::one(); constraints.len()],
        nonneg: vec![true; nvars],
    };
    let sol = if nvars <= 3 {
        lp_vertex_enumeration(&lp)
    } else {
        lp_simplex(&lp)
    };
    let (x, dstar, binding) = match sol {
        LpSolution::Unbounded => return Err(BoundsError::Unbounded),
        LpSolution::Optimal { x, value, binding } => (x, value, binding),
    };
    if dstar.is_zero() {
        return Err(BoundsError::NoBound);
    }
    // some non-trivial row must be tight, so tau = -1 exactly
    assert!(
        !binding.is_empty(),
        "optimal weighting must have a tight eigenvalue constraint"
    );
    let nv = BigRational::from_integer(BigInt::from(n_vertices));
    let value = nv / (BigRational::one() + &dstar);
    let mut res = BoundResult::assemble(
        BoundKind::WeightedRatio,
        value,
        exact,
        format!("weighted-ratio(auto, {nvars} families)"),
    );
    res.d = Some(dstar);
    res.tau = Some(-BigRational::one());
    res.optimizer = Some(
        var_classes
            .iter()
            .zip(&x)
            .flat_map(|(cls, xi)| cls.iter().map(move |&i| (i, xi.clone())))
            .collect(),
    );
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Action;
    use crate::exact::{rat, rat_int};
    use crate::pgl::{build_pgl2, build_psl2};
    use crate::scheme::{class_constants, eigenrows};

    fn setup(
        q: u32,
        k: usize,
        psl: bool,
    ) -> (std::sync::Arc<crate::perm::Group>, EigenTable, Action) {
        let g = if psl {
            build_psl2(q).unwrap()
        } else {
            build_pgl2(q).unwrap()
        };
        let ca = class_constants(&g).unwrap();
        let et = eigenrows(&ca).unwrap();
        let a = Action::on_ksets(g.clone(), k).unwrap();
        (g, et, a)
    }

    fn nonder_selection(g: &crate::perm::Group, a: &Action) -> ClassSelection {
        ClassSelection::new(
            a.derangements().non_derangement_classes(),
            &g.conjugacy_classes().inverse_class_map,
        )
        .unwrap()
    }

    fn der_selection(g: &crate::perm::Group, a: &Action) -> ClassSelection {
        ClassSelection::new(
            a.derangements().derangement_classes(),
            &g.conjugacy_classes().inverse_class_map,
        )
        .unwrap()
    }

    #[test]
    fn psl4_2sets_unit_ratio_bound_is_12() {
        // d = 24, tau = -6  ->  60 / (1 + 4) = 12
        let (g, et, a) = setup(4, 2, true);
        let sel = der_selection(&g, &a);
        let unit = Weighting::unit(&sel, et.n_classes());
        let r = ratio_bound(&et, &sel, &unit, g.order()).unwrap();
        assert!(r.exact);
        assert_eq!(r.value, rat_int(12));
        assert_eq!(r.d.unwrap(), rat_int(24));
        assert_eq!(r.tau.unwrap(), rat_int(-6));
        assert_eq!(r.floored, 12.into());
    }

    #[test]
    fn all_zero_weighting_rejected() {
        let (g, et, a) = setup(4, 2, true);
        let sel = der_selection(&g, &a);
        let w = Weighting::new(
            vec![BigRational::zero(); et.n_classes()],
            &g.conjugacy_classes().inverse_class_map,
        );
        assert!(matches!(w, Err(BoundsError::EmptyWeighting)));
        let _ = sel;
    }

    #[test]
    fn lp_bound_pgl16_is_48_at_paper_optimizer() {
        let (g, et, a) = setup(16, 3, false);
        let sel = nonder_selection(&g, &a);
        let r = clique_lp_bound(&et, &sel).unwrap();
        assert!(r.exact, "method = {}", r.method);
        assert_eq!(r.value, rat_int(48));
        // optimizer: 1/17 on the order-2 class, 2/17 on the order-3 class
        let classes = g.conjugacy_classes();
        for (cls, w) in r.optimizer.unwrap() {
            let o = g.element(classes.representatives[cls]).order();
            match o {
                2 => assert_eq!(w, rat(1, 17)),
                3 => assert_eq!(w, rat(2, 17)),
                other => panic!("unexpected class of order {other} in selection"),
            }
        }
    }

    #[test]
    fn lp_bound_pgl8_is_8_with_zero_y() {
        let (g, et, a) = setup(8, 3, false);
        let sel = nonder_selection(&g, &a);
        let r = clique_lp_bound(&et, &sel).unwrap();
        assert!(r.exact);
        assert_eq!(r.value, rat_int(8));
        let classes = g.conjugacy_classes();
        for (cls, w) in r.optimizer.unwrap() {
            let o = g.element(classes.representatives[cls]).order();
            match o {
                2 => assert_eq!(w, rat(1, 9)),
                3 => assert_eq!(w, rat_int(0)),
                other => panic!("unexpected class of order {other}"),
            }
        }
    }

    #[test]
    fn lp_bound_pgl9_is_18() {
        let (g, et, a) = setup(9, 3, false);
        let sel = nonder_selection(&g, &a);
        let r = clique_lp_bound(&et, &sel).unwrap();
        assert!(r.exact);
        assert_eq!(r.value, rat_int(18));
        let classes = g.conjugacy_classes();
        for (cls, w) in r.optimizer.unwrap() {
            let o = g.element(classes.representatives[cls]).order();
            match o {
                2 => assert_eq!(w, rat(2, 10)),
                3 => assert_eq!(w, rat(1, 10)),
                other => panic!("unexpected class of order {other}"),
            }
        }
    }

    #[test]
    fn lp_bound_pgl4_is_12() {
        let (g, et, a) = setup(4, 3, false);
        let sel = nonder_selection(&g, &a);
        let r = clique_lp_bound(&et, &sel).unwrap();
        assert!(r.exact);
        assert_eq!(r.value, rat_int(12));
    }

    #[test]
    fn complete_graph_coclique_bound_is_1() {
        // all non-identity classes selected: the union graph is complete
        let g = build_psl2(5).unwrap();
        let ca = class_constants(&g).unwrap();
        let et = eigenrows(&ca).unwrap();
        let all = ClassSelection::new(
            (1..ca.n_classes()).collect(),
            &g.conjugacy_classes().inverse_class_map,
        )
        .unwrap();
        let unit = Weighting::unit(&all, ca.n_classes());
        let r = ratio_bound(&et, &all, &unit, g.order()).unwrap();
        // d = |G| - 1, tau = -1 -> bound |G|/|G| = 1
        assert_eq!(r.value, rat_int(1));
    }

    #[test]
    fn oddpowerof3_weighted_ratio_with_paper_weights() {
        // q = 27: weights 1/q on split-torus derangement classes and
        // (q+3)/(q(q-3)) on nonsplit ones give d = (q^2-1)/2 - 1, tau = -1,
        // bound q
        let q = 27i64;
        let (g, et, a) = setup(27, 3, true);
        let sel = der_selection(&g, &a);
        let classes = g.conjugacy_classes();
        let pairs: Vec<(usize, BigRational)> = sel
            .indices()
            .iter()
            .map(|&i| {
                let o = g.element(classes.representatives[i]).order();
                let w = if ((q - 1) / 2) % o as i64 == 0 {
                    rat(1, q)
                } else {
                    rat(q + 3, q * (q - 3))
                };
                (i, w)
            })
            .collect();
        let w =
            Weighting::from_pairs(&pairs, et.n_classes(), &classes.inverse_class_map).unwrap();
        let r = ratio_bound(&et, &sel, &w, g.order()).unwrap();
        assert!(r.exact);
        assert_eq!(r.d.unwrap(), rat((q * q - 1) / 2 - 1, 1));
        assert_eq!(r.tau.unwrap(), rat_int(-1));
        assert_eq!(r.value, rat_int(27));
    }

    #[test]
    fn auto_weight_search_finds_27() {
        let (g, et, a) = setup(27, 3, true);
        let sel = der_selection(&g, &a);
        let r = auto_weighted_ratio_bound(&et, &sel, g.order()).unwrap();
        assert!(r.exact, "method = {}", r.method);
        assert!(r.value <= rat_int(27), "bound {} should be <= 27", r.value);
        assert_eq!(r.value, rat_int(27), "27 is attained, so the LP hits it");
    }

    #[test]
    fn coclique_bound_reports_winner() {
        let (g, et, a) = setup(4, 2, true);
        let sel = der_selection(&g, &a);
        let r = coclique_bound(&et, &sel, g.order()).unwrap();
        assert_eq!(r.value, rat_int(12));
        assert!(r.method.contains("beat"), "method = {}", r.method);
    }

    #[test]
    fn vertex_enum_agrees_with_simplex() {
        let lp = Lp {
            c: vec![rat_int(3), rat_int(2)],
            rows: vec![
                vec![rat_int(-1), rat_int(-1)],
                vec![rat_int(-2), rat_int(1)],
                vec![rat_int(1), rat_int(-3)],
            ],
            rhs: vec![rat_int(-4), rat_int(-2), rat_int(-6)],
            nonneg: vec![false, false],
        };
        let v = lp_vertex_enumeration(&lp);
        let s = lp_simplex(&lp);
        match (v, s) {
            (
                LpSolution::Optimal { value: v1, x: x1, .. },
                LpSolution::Optimal { value: v2, x: x2, .. },
            ) => {
                assert_eq!(v1, v2);
                assert_eq!(x1, x2);
            }
            _ => panic!("both should be bounded"),
        }
    }

    #[test]
    fn unbounded_lp_detected() {
        let lp = Lp {
            c: vec![rat_int(1)],
            rows: vec![vec![rat_int(1)]],
            rhs: vec![rat_int(-1)],
            nonneg: vec![false],
        };
        assert!(matches!(lp_vertex_enumeration(&lp), LpSolution::Unbounded));
        assert!(matches!(lp_simplex(&lp), LpSolution::Unbounded));
    }

    #[test]
    fn simplex_respects_nonnegativity() {
        // max x + y st -x - y >= -3, y <= 1 encoded as -y >= -1, x,y >= 0
        let lp = Lp {
            c: vec![rat_int(1), rat_int(1)],
            rows: vec![
                vec![rat_int(-1), rat_int(-1)],
                vec![rat_int(0), rat_int(-1)],
            ],
            rhs: vec![rat_int(-3), rat_int(-1)],
            nonneg: vec![true, true],
        };
        match lp_simplex(&lp) {
            LpSolution::Optimal { value, .. } => assert_eq!(value, rat_int(3)),
            _ => panic!("bounded"),
        }
    }
}
