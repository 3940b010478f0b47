//! Finite-dimensional Lie algebras of derivations over K: linear reduction,
//! structure constants, lower central series, center, rank over the fraction
//! field, the RI∩L ideal, and Jordan chains of ad-nilpotent operators.
//!
//! K-linear algebra on derivations works by expanding rational-function
//! coordinates over a common denominator and the finite monomial support;
//! everything is exact.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::Zero;

use crate::derivation::Derivation;
use crate::gcd::poly_lcm;
use crate::linalg::{self, QMat, QVec};
use crate::poly::{Monomial, MultiPoly};
use crate::ratfunc::RatFunc;
use crate::LieError;

/// A K-linearly-independent list of derivations spanning a Lie algebra.
#[derive(Clone, Debug)]
pub struct LieBasis {
    gens: Vec<Derivation>,
    nvars: usize,
}

impl LieBasis {
    /// Build from an already independent list (checked).
    pub fn new(gens: Vec<Derivation>) -> Result<LieBasis, LieError> {
        let reduced = k_linear_reduce(&gens)?;
        if reduced.dim() != gens.len() {
            return Err(LieError::Precondition(
                "generators are K-linearly dependent".into(),
            ));
        }
        Ok(reduced)
    }

    pub fn gens(&self) -> &[Derivation] {
        &self.gens
    }

    pub fn dim(&self) -> usize {
        self.gens.len()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// K-coordinates of a derivation in this basis, `None` if outside the span.
    pub fn coords_of(&self, d: &Derivation) -> Option<QVec> {
        express_deriv_in_k_span(d, &self.gens)
    }

    /// Materialize a coordinate vector as a derivation.
    pub fn lin_comb(&self, coords: &QVec) -> Derivation {
        lin_comb(&self.gens, coords)
    }
}

pub fn lin_comb(ders: &[Derivation], coords: &[BigRational]) -> Derivation {
    assert_eq!(ders.len(), coords.len());
    let nvars = ders[0].nvars();
    let mut out = Derivation::zero(nvars);
    for (d, c) in ders.iter().zip(coords) {
        if !c.is_zero() {
            out = out.add(&d.scale_k(c));
        }
    }
    out
}

/// Expansion of a family of derivations into exact Q-coordinate vectors:
/// per coefficient slot, all entries are put over the lcm denominator and
/// the union of monomial supports indexes the columns.
fn expansion_matrix(ders: &[&Derivation]) -> QMat {
    if ders.is_empty() {
        return vec![];
    }
    let nvars = ders[0].nvars();
    let mut rows: Vec<QVec> = vec![Vec::new(); ders.len()];
    for slot in 0..nvars {
        let mut lcm = MultiPoly::one(nvars);
        for d in ders {
            let den = d.coeff(slot).den();
            if !den.is_constant() {
                lcm = poly_lcm(&lcm, den).expect("nonzero denominators");
            }
        }
        let nums: Vec<MultiPoly> = ders
            .iter()
            .map(|d| {
                let c = d.coeff(slot);
                c.num().mul(&lcm.div_exact(c.den()))
            })
            .collect();
        let support: BTreeSet<Monomial> = nums
            .iter()
            .flat_map(|p| p.coeff_map().keys().cloned())
            .collect();
        for (row, p) in rows.iter_mut().zip(&nums) {
            for m in &support {
                row.push(p.coeff_map().get(m).cloned().unwrap_or_else(BigRational::zero));
            }
        }
    }
    rows
}

/// Coordinates of `target` in the K-span of `basis`, `None` if outside.
pub fn express_deriv_in_k_span(target: &Derivation, basis: &[Derivation]) -> Option<QVec> {
    if basis.is_empty() {
        return if target.is_zero() { Some(vec![]) } else { None };
    }
    let mut all: Vec<&Derivation> = basis.iter().collect();
    all.push(target);
    let rows = expansion_matrix(&all);
    let cols = rows[0].len();
    let k = basis.len();
    // solve sum_i t_i rows[i] = rows[k]
    let m: QMat = (0..cols)
        .map(|c| (0..k).map(|i| rows[i][c].clone()).collect())
        .collect();
    let b: QVec = (0..cols).map(|c| rows[k][c].clone()).collect();
    linalg::solve(&m, &b)
}

/// Coordinates of a rational function in the K-span of other rational
/// functions, `None` if outside.
pub fn express_ratfunc_in_k_span(target: &RatFunc, basis: &[RatFunc]) -> Option<QVec> {
    let nvars = target.nvars();
    let as_der = |r: &RatFunc| {
        let mut coeffs = vec![RatFunc::zero(nvars); nvars];
        coeffs[0] = r.clone();
        Derivation::new(coeffs)
    };
    let basis_d: Vec<Derivation> = basis.iter().map(as_der).collect();
    express_deriv_in_k_span(&as_der(target), &basis_d)
}

/// Maximal K-linearly-independent sublist in input order.
pub fn k_linear_reduce(vs: &[Derivation]) -> Result<LieBasis, LieError> {
    if vs.is_empty() {
        return Ok(LieBasis {
            gens: vec![],
            nvars: 0,
        });
    }
    let nvars = vs[0].nvars();
    if vs.iter().any(|d| d.nvars() != nvars) {
        return Err(LieError::Precondition("mixed variable counts".into()));
    }
    let mut gens: Vec<Derivation> = Vec::new();
    for v in vs {
        if v.is_zero() {
            continue;
        }
        if express_deriv_in_k_span(v, &gens).is_none() {
            gens.push(v.clone());
        }
    }
    Ok(LieBasis { gens, nvars })
}

/// Structure constants c[i][j][k] with [g_i, g_j] = sum_k c[i][j][k] g_k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureTensor {
    dim: usize,
    c: Vec<Vec<QVec>>,
}

impl StructureTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &BigRational {
        &self.c[i][j][k]
    }

    /// Bracket of two coordinate vectors in tensor coordinates.
    pub fn bracket_coords(&self, u: &QVec, v: &QVec) -> QVec {
        let mut out = vec![BigRational::zero(); self.dim];
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                if vj.is_zero() {
                    continue;
                }
                let f = ui * vj;
                for k in 0..self.dim {
                    if !self.c[i][j][k].is_zero() {
                        out[k] += &f * &self.c[i][j][k];
                    }
                }
            }
        }
        out
    }

    /// Antisymmetry and the coordinate Jacobi identity, checked exactly.
    pub fn is_consistent(&self) -> bool {
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if self.c[i][j][k] != -self.c[j][i][k].clone() {
                        return false;
                    }
                }
            }
        }
        let e = |i: usize| {
            let mut v = vec![BigRational::zero(); d];
            v[i] = linalg::qone();
            v
        };
        for i in 0..d {
            for j in (i + 1)..d {
                for k in (j + 1)..d {
                    let mut acc = vec![BigRational::zero(); d];
                    let t1 = self.bracket_coords(&self.bracket_coords(&e(i), &e(j)), &e(k));
                    let t2 = self.bracket_coords(&self.bracket_coords(&e(j), &e(k)), &e(i));
                    let t3 = self.bracket_coords(&self.bracket_coords(&e(k), &e(i)), &e(j));
                    for l in 0..d {
                        acc[l] = &t1[l] + &t2[l] + &t3[l];
                    }
                    if acc.iter().any(|v| !v.is_zero()) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Compute the structure tensor; errors with the offending pair when some
/// bracket escapes the K-span.
pub fn structure_constants(basis: &LieBasis) -> Result<StructureTensor, LieError> {
    let d = basis.dim();
    let mut c = vec![vec![vec![BigRational::zero(); d]; d]; d];
    for i in 0..d {
        for j in (i + 1)..d {
            let b = basis.gens()[i].bracket(&basis.gens()[j]);
            let coords = basis
                .coords_of(&b)
                .ok_or(LieError::NotClosed { i, j })?;
            for k in 0..d {
                c[i][j][k] = coords[k].clone();
                c[j][i][k] = -coords[k].clone();
            }
        }
    }
    Ok(StructureTensor { dim: d, c })
}

/// A K-subspace of the span of an ambient basis, stored as rref coordinate
/// vectors together with the materialized derivations.
#[derive(Clone, Debug)]
pub struct Subspace {
    coords: QMat,
    ders: Vec<Derivation>,
}

impl Subspace {
    pub fn from_coords(ambient: &LieBasis, coords: QMat) -> Subspace {
        let mut coords = coords;
        linalg::rref(&mut coords);
        let ders = coords.iter().map(|v| ambient.lin_comb(v)).collect();
        Subspace { coords, ders }
    }

    pub fn full(ambient: &LieBasis) -> Subspace {
        Subspace::from_coords(ambient, linalg::identity(ambient.dim()))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &QMat {
        &self.coords
    }

    pub fn ders(&self) -> &[Derivation] {
        &self.ders
    }

    pub fn contains_coord(&self, v: &QVec) -> bool {
        linalg::in_span(&self.coords, v)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.coords.iter().all(|v| self.contains_coord(v))
    }
}

/// Lower central series L ⊇ [L,L] ⊇ [L,[L,L]] ⊇ ... until stabilization.
#[derive(Clone, Debug)]
pub struct CentralSeries {
    pub terms: Vec<Subspace>,
    pub nilpotent: bool,
    /// Nilpotency class when nilpotent: least c with L^{(c)} = 0.
    pub class: usize,
}

pub fn lower_central_series(basis: &LieBasis) -> Result<CentralSeries, LieError> {
    let tensor = structure_constants(basis)?;
    Ok(lower_central_series_with(basis, &tensor))
}

pub fn lower_central_series_with(basis: &LieBasis, tensor: &StructureTensor) -> CentralSeries {
    let d = basis.dim();
    let mut terms = vec![Subspace::full(basis)];
    loop {
        let current = terms.last().unwrap();
        let mut next: QMat = Vec::new();
        for i in 0..d {
            let mut e = vec![BigRational::zero(); d];
            e[i] = linalg::qone();
            for v in current.coords() {
                next.push(tensor.bracket_coords(&e, v));
            }
        }
        let next = Subspace::from_coords(basis, next);
        let stabilized = next.dim() == current.dim();
        let dim = next.dim();
        terms.push(next);
        if dim == 0 || stabilized {
            break;
        }
    }
    let nilpotent = terms.last().unwrap().dim() == 0;
    let class = if nilpotent { terms.len() - 1 } else { 0 };
    CentralSeries {
        terms,
        nilpotent,
        class,
    }
}

/// Center Z(L): all v in the span with [v, g_j] = 0 for every j.
pub fn center(basis: &LieBasis) -> Result<Subspace, LieError> {
    let tensor = structure_constants(basis)?;
    Ok(center_with(basis, &tensor))
}

pub fn center_with(basis: &LieBasis, tensor: &StructureTensor) -> Subspace {
    let d = basis.dim();
    // rows indexed by (j, k), columns by i: sum_i v_i c[i][j][k] = 0
    let mut m: QMat = Vec::new();
    for j in 0..d {
        for k in 0..d {
            m.push((0..d).map(|i| tensor.get(i, j, k).clone()).collect());
        }
    }
    let ker = linalg::kernel(&m, d);
    Subspace::from_coords(basis, ker)
}

/// Rank of the coefficient matrix over the rational-function field R.
pub fn rank_over_r(basis: &LieBasis) -> usize {
    rank_over_r_ders(basis.gens())
}

pub fn rank_over_r_ders(ders: &[Derivation]) -> usize {
    if ders.is_empty() {
        return 0;
    }
    let m: Vec<Vec<RatFunc>> = ders.iter().map(|d| d.coeffs().to_vec()).collect();
    linalg::ratfunc_rank(&m)
}

/// F = K policy check: `r` must be a rational constant annihilated by every
/// generator.
pub fn verify_rational_constants(basis: &LieBasis, r: &RatFunc) -> bool {
    r.as_constant().is_some() && basis.gens().iter().all(|d| d.apply(r).is_zero())
}

/// The ideal RI ∩ L: the K-subspace of L whose elements are R-linear
/// combinations of I's elements, found through vanishing of all
/// (rk I + 1)-minors as K-linear conditions on coordinates.
pub fn ideal_ri_cap_l(basis: &LieBasis, ideal: &Subspace) -> Result<Subspace, LieError> {
    let tensor = structure_constants(basis)?;
    ideal_ri_cap_l_with(basis, &tensor, ideal)
}

pub fn ideal_ri_cap_l_with(
    basis: &LieBasis,
    tensor: &StructureTensor,
    ideal: &Subspace,
) -> Result<Subspace, LieError> {
    // precondition: I is an ideal of L
    if !is_ideal(tensor, ideal) {
        return Err(LieError::Precondition("I is not an ideal of L".into()));
    }
    let result = r_span_intersection(basis, ideal.ders())?;
    // postcondition checks
    if !result.contains_subspace(ideal) {
        return Err(LieError::Internal("RI ∩ L does not contain I".into()));
    }
    if !is_ideal(tensor, &result) {
        return Err(LieError::Internal("RI ∩ L is not an ideal".into()));
    }
    Ok(result)
}

pub fn is_ideal(tensor: &StructureTensor, sub: &Subspace) -> bool {
    let d = tensor.dim();
    for i in 0..d {
        let mut e = vec![BigRational::zero(); d];
        e[i] = linalg::qone();
        for v in sub.coords() {
            if !sub.contains_coord(&tensor.bracket_coords(&e, v)) {
                return false;
            }
        }
    }
    true
}

/// The K-subspace of L consisting of R-linear combinations of `spanning`
/// (intersection of L with the R-span of the given derivations).
pub fn r_span_intersection(
    basis: &LieBasis,
    spanning: &[Derivation],
) -> Result<Subspace, LieError> {
    let d = basis.dim();
    let nvars = basis.nvars();
    if spanning.iter().all(|s| s.is_zero()) {
        return Ok(Subspace::from_coords(basis, vec![]));
    }
    // R-linearly independent subset of the spanning derivations
    let mut rows: Vec<Derivation> = Vec::new();
    for s in spanning {
        if s.is_zero() {
            continue;
        }
        let mut cand = rows.clone();
        cand.push(s.clone());
        if rank_over_r_ders(&cand) > rows.len() {
            rows = cand;
        }
    }
    let r = rows.len();
    if r >= nvars {
        // RI is all of R^n: every element of L qualifies
        return Ok(Subspace::full(basis));
    }
    // Each (r+1)-column minor, Laplace-expanded along the generic row, gives
    // one K-linear condition per monomial on the coordinates t over L.
    let mut conditions: Vec<Vec<RatFunc>> = Vec::new(); // rows over generators
    for subset in column_subsets(nvars, r + 1) {
        let mut cond: Vec<RatFunc> = Vec::new();
        for gi in basis.gens() {
            let mut acc = RatFunc::zero(nvars);
            for (pos, &col) in subset.iter().enumerate() {
                if gi.coeff(col).is_zero() {
                    continue;
                }
                let minor_cols: Vec<usize> = subset
                    .iter()
                    .copied()
                    .filter(|&c| c != col)
                    .collect();
                let minor = if r == 0 {
                    RatFunc::one(nvars)
                } else {
                    let m: Vec<Vec<RatFunc>> = rows
                        .iter()
                        .map(|row| minor_cols.iter().map(|&c| row.coeff(c).clone()).collect())
                        .collect();
                    linalg::ratfunc_det(&m)
                };
                let term = gi.coeff(col).mul(&minor);
                acc = if pos % 2 == 0 {
                    acc.add(&term)
                } else {
                    acc.sub(&term)
                };
            }
            cond.push(acc);
        }
        conditions.push(cond);
    }
    // Expand each condition row over a common denominator and monomial
    // support: one Q-linear constraint per (condition, monomial).
    let mut m: QMat = Vec::new();
    for cond in &conditions {
        let polys = linalg::clear_row_denominators(cond);
        let support: BTreeSet<Monomial> = polys
            .iter()
            .flat_map(|p| p.coeff_map().keys().cloned())
            .collect();
        for mono in &support {
            m.push(
                polys
                    .iter()
                    .map(|p| p.coeff_map().get(mono).cloned().unwrap_or_else(BigRational::zero))
                    .collect(),
            );
        }
    }
    let ker = linalg::kernel(&m, d);
    Ok(Subspace::from_coords(basis, ker))
}

fn column_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Jordan chains of ad D on a subspace V: a partition of a basis of V into
/// chains (v, [D,v], [D,[D,v]], ...), longest chain first.
pub fn jordan_chains(
    basis: &LieBasis,
    v: &Subspace,
    d: &Derivation,
) -> Result<Vec<Vec<Derivation>>, LieError> {
    let n = ad_matrix_on(v, d)?;
    let chains = linalg::nilpotent_jordan_chains(&n).ok_or(LieError::NotNilpotentOperator)?;
    let _ = basis;
    Ok(chains
        .into_iter()
        .map(|chain| {
            chain
                .into_iter()
                .map(|coords| lin_comb(v.ders(), &coords))
                .collect()
        })
        .collect())
}

/// Matrix of ad D restricted to V in V's basis: column j holds the
/// V-coordinates of [D, v_j].
pub fn ad_matrix_on(v: &Subspace, d: &Derivation) -> Result<QMat, LieError> {
    let k = v.dim();
    let mut n = vec![vec![BigRational::zero(); k]; k];
    for (j, vb) in v.ders().iter().enumerate() {
        let w = d.bracket(vb);
        let coords = express_deriv_in_k_span(&w, v.ders()).ok_or(LieError::AdNotInvariant)?;
        for i in 0..k {
            n[i][j] = coords[i].clone();
        }
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(i: usize) -> Derivation {
        Derivation::partial(3, i)
    }

    fn xr(i: usize) -> RatFunc {
        RatFunc::var(3, i)
    }

    fn heisenberg() -> LieBasis {
        // {d1, x3 d1 + d2, d3}
        k_linear_reduce(&[d(0), d(0).scale(&xr(2)).add(&d(1)), d(2)]).unwrap()
    }

    #[test]
    fn reduce_drops_dependent() {
        let out = k_linear_reduce(&[d(0), d(0).scale_k(&linalg::qint(2))]).unwrap();
        assert_eq!(out.dim(), 1);
        let out = k_linear_reduce(&[d(0), d(1)]).unwrap();
        assert_eq!(out.dim(), 2);
        // {x1 d1, x1 d1 + d2, d2} -> first two kept, third is a difference
        let a = d(0).scale(&xr(0));
        let b = a.add(&d(1));
        let out = k_linear_reduce(&[a.clone(), b.clone(), d(1)]).unwrap();
        assert_eq!(out.dim(), 2);
        assert_eq!(out.gens()[0], a);
        assert_eq!(out.gens()[1], b);
    }

    #[test]
    fn heisenberg_structure_constants() {
        let l = heisenberg();
        let t = structure_constants(&l).unwrap();
        // [g3, g2] = g1
        assert_eq!(t.get(2, 1, 0), &linalg::qone());
        assert!(t.is_consistent());
        // all other independent entries zero
        assert!(t.get(1, 0, 0).is_zero());
        assert!(t.get(2, 0, 0).is_zero());
    }

    #[test]
    fn abelian_diagonal_all_zero() {
        let l = k_linear_reduce(&[
            d(0).scale(&xr(0)),
            d(1).scale(&xr(1)),
            d(2).scale(&xr(2)),
        ])
        .unwrap();
        let t = structure_constants(&l).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert!(t.get(i, j, k).is_zero());
                }
            }
        }
    }

    #[test]
    fn affine_line_constant() {
        // {d1, x1 d1}: [g1, g2] = d1 = g1, so c[2][1][1] = -1 (1-based indices
        // in the contract; zero-based c[1][0][0] here)
        let l = k_linear_reduce(&[d(0), d(0).scale(&xr(0))]).unwrap();
        let t = structure_constants(&l).unwrap();
        assert_eq!(t.get(1, 0, 0), &linalg::qint(-1));
    }

    #[test]
    fn not_closed_reported() {
        let l = k_linear_reduce(&[d(0), d(0).scale(&xr(0).pow(2))]).unwrap();
        match structure_constants(&l) {
            Err(LieError::NotClosed { i: 0, j: 1 }) => {}
            other => panic!("expected NotClosed, got {:?}", other),
        }
    }

    #[test]
    fn central_series_heisenberg() {
        let l = heisenberg();
        let s = lower_central_series(&l).unwrap();
        assert!(s.nilpotent);
        assert_eq!(s.class, 2);
        let dims: Vec<usize> = s.terms.iter().map(|t| t.dim()).collect();
        assert_eq!(dims, vec![3, 1, 0]);
    }

    #[test]
    fn central_series_abelian_and_nonnilpotent() {
        let l = k_linear_reduce(&[
            d(0).scale(&xr(0)),
            d(1).scale(&xr(1)),
            d(2).scale(&xr(2)),
        ])
        .unwrap();
        let s = lower_central_series(&l).unwrap();
        assert!(s.nilpotent);
        assert_eq!(s.class, 1);

        let l2 = k_linear_reduce(&[d(0), d(0).scale(&xr(0))]).unwrap();
        let s2 = lower_central_series(&l2).unwrap();
        assert!(!s2.nilpotent);
        assert_eq!(s2.terms.last().unwrap().dim(), 1);
    }

    #[test]
    fn center_computations() {
        let l = heisenberg();
        let z = center(&l).unwrap();
        assert_eq!(z.dim(), 1);
        assert_eq!(z.ders()[0], d(0));

        // abelian algebra: center is everything
        let a = k_linear_reduce(&[d(0), d(1)]).unwrap();
        assert_eq!(center(&a).unwrap().dim(), 2);

        // L1 shape {d3, d1, x3 d1, d2, x3 d2} -> center <d1, d2>
        let l1 = k_linear_reduce(&[
            d(2),
            d(0),
            d(0).scale(&xr(2)),
            d(1),
            d(1).scale(&xr(2)),
        ])
        .unwrap();
        let z1 = center(&l1).unwrap();
        assert_eq!(z1.dim(), 2);
        assert!(z1.contains_coord(&l1.coords_of(&d(0)).unwrap()));
        assert!(z1.contains_coord(&l1.coords_of(&d(1)).unwrap()));
    }

    #[test]
    fn rank_examples() {
        let l = k_linear_reduce(&[d(0), d(0).scale(&xr(0))]).unwrap();
        assert_eq!(rank_over_r(&l), 1);
        let l2 = k_linear_reduce(&[
            d(0).scale(&xr(0)),
            d(1).scale(&xr(1)),
            d(2).scale(&xr(2)),
        ])
        .unwrap();
        assert_eq!(rank_over_r(&l2), 3);
        // {d1, d2, x2 d1 - x1 d2} has rank 2
        let rot = d(0).scale(&xr(1)).sub(&d(1).scale(&xr(0)));
        let l3 = k_linear_reduce(&[d(0), d(1), rot]).unwrap();
        assert_eq!(rank_over_r(&l3), 2);
    }

    #[test]
    fn ideal_ri_cap_l_examples() {
        // Heisenberg, I = <d1> -> <d1>
        let l = heisenberg();
        let t = structure_constants(&l).unwrap();
        let i = Subspace::from_coords(&l, vec![l.coords_of(&d(0)).unwrap()]);
        let out = ideal_ri_cap_l_with(&l, &t, &i).unwrap();
        assert_eq!(out.dim(), 1);
        assert_eq!(out.ders()[0], d(0));

        // L1 shape, I = <d1, d2> -> <d1, x3 d1, d2, x3 d2>
        let l1 = k_linear_reduce(&[
            d(2),
            d(0),
            d(0).scale(&xr(2)),
            d(1),
            d(1).scale(&xr(2)),
        ])
        .unwrap();
        let t1 = structure_constants(&l1).unwrap();
        let i1 = Subspace::from_coords(
            &l1,
            vec![
                l1.coords_of(&d(0)).unwrap(),
                l1.coords_of(&d(1)).unwrap(),
            ],
        );
        let out1 = ideal_ri_cap_l_with(&l1, &t1, &i1).unwrap();
        assert_eq!(out1.dim(), 4);
        for e in [
            d(0),
            d(0).scale(&xr(2)),
            d(1),
            d(1).scale(&xr(2)),
        ] {
            assert!(out1.contains_coord(&l1.coords_of(&e).unwrap()));
        }

        // I = L -> L
        let full = Subspace::full(&l);
        let out2 = ideal_ri_cap_l_with(&l, &t, &full).unwrap();
        assert_eq!(out2.dim(), l.dim());
    }

    #[test]
    fn jordan_chain_examples() {
        // V = <d1, x3 d1>, D = d3 -> single chain (x3 d1, d1)
        let l = k_linear_reduce(&[d(2), d(0), d(0).scale(&xr(2))]).unwrap();
        let v = Subspace::from_coords(
            &l,
            vec![
                l.coords_of(&d(0)).unwrap(),
                l.coords_of(&d(0).scale(&xr(2))).unwrap(),
            ],
        );
        let chains = jordan_chains(&l, &v, &d(2)).unwrap();
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].len(), 2);
        assert_eq!(d(2).bracket(&chains[0][0]), chains[0][1]);

        // V = <d1, x3 d1, d2, x3 d2>, D = d3 -> two chains of length 2
        let l1 = k_linear_reduce(&[
            d(2),
            d(0),
            d(0).scale(&xr(2)),
            d(1),
            d(1).scale(&xr(2)),
        ])
        .unwrap();
        let v1 = Subspace::from_coords(
            &l1,
            (1..5).map(|i| {
                let mut e = vec![BigRational::zero(); 5];
                e[i] = linalg::qone();
                e
            }).collect(),
        );
        let chains = jordan_chains(&l1, &v1, &d(2)).unwrap();
        let lens: Vec<usize> = chains.iter().map(|c| c.len()).collect();
        assert_eq!(lens, vec![2, 2]);

        // length-1 chain
        let v2 = Subspace::from_coords(&l1, vec![l1.coords_of(&d(0)).unwrap()]);
        let chains = jordan_chains(&l1, &v2, &d(1)).unwrap();
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].len(), 1);

        // non-nilpotent operator rejected
        let l2 = k_linear_reduce(&[d(0), d(0).scale(&xr(0))]).unwrap();
        let v3 = Subspace::from_coords(&l2, vec![l2.coords_of(&d(0)).unwrap()]);
        assert!(matches!(
            jordan_chains(&l2, &v3, &d(0).scale(&xr(0))),
            Err(LieError::AdNotInvariant) | Err(LieError::NotNilpotentOperator)
        ));
    }

    #[test]
    fn rational_constants_policy() {
        let l = heisenberg();
        assert!(verify_rational_constants(
            &l,
            &RatFunc::constant(3, linalg::qint(5))
        ));
        assert!(!verify_rational_constants(&l, &xr(0)));
    }
}
