//! Classification of nilpotent Lie algebras of derivations of rank at most 3
//! into normal forms, with a verified embedding into the triangular Lie
//! algebra u_k.
//!
//! The pipeline: closure -> nilpotency -> rank over R -> dispatch on rank and
//! on the rank of the center. All constructed constants must be rational
//! (the F = K policy); otherwise classification aborts with
//! `NonRationalConstants`.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::derivation::Derivation;
use crate::lie::{
    center_with, express_deriv_in_k_span, express_ratfunc_in_k_span, jordan_chains,
    k_linear_reduce, lin_comb, lower_central_series_with, r_span_intersection, rank_over_r,
    rank_over_r_ders, structure_constants, LieBasis, StructureTensor, Subspace,
};
use crate::linalg::{self, QMat, QVec};
use crate::poly::{potential, MultiPoly};
use crate::ratfunc::RatFunc;
use crate::LieError;

/// Canonical string for a rational constant: `p` or `p/q`.
pub fn fmt_big_rational(c: &BigRational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// The normal-form classes of nilpotent algebras of rank at most 3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalFormTag {
    Rank1,
    /// Chain form F<D1, aD1, ..., (a^k/k!)D1, D2>.
    Rank2Chain(usize),
    Abelian3,
    Heisenberg3,
    /// F<D3, D1, aD1, ..., (a^n/n!)D1, D2, aD2, ..., (a^n/n!)D2>.
    L1(usize),
    /// F<D3, D2, aD2, ..., (a^n/n!)D2, {(a^i b^j / i! j!) D1}_{0<=i,j<=m}>.
    L2(usize, usize),
}

impl NormalFormTag {
    pub fn name(&self) -> &'static str {
        match self {
            NormalFormTag::Rank1 => "Rank1",
            NormalFormTag::Rank2Chain(_) => "Rank2Chain",
            NormalFormTag::Abelian3 => "Abelian3",
            NormalFormTag::Heisenberg3 => "Heisenberg3",
            NormalFormTag::L1(_) => "L1",
            NormalFormTag::L2(_, _) => "L2",
        }
    }
}

impl std::fmt::Display for NormalFormTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormalFormTag::Rank2Chain(k) => write!(f, "Rank2Chain({})", k),
            NormalFormTag::L1(n) => write!(f, "L1({})", n),
            NormalFormTag::L2(n, m) => write!(f, "L2({},{})", n, m),
            other => f.write_str(other.name()),
        }
    }
}

/// Rational coefficients of an element over a chain `{a^i/i!}` or a grid
/// `{a^i b^j/(i! j!)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainCoefficients {
    /// Chain expansion: coeffs[i] multiplies a^i/i! (coeffs[0] is the
    /// constant term). Empty in the grid case.
    pub coeffs: Vec<BigRational>,
    /// Grid expansion: grid[i][j] multiplies a^i b^j/(i! j!). Empty in the
    /// chain case.
    pub grid: Vec<Vec<BigRational>>,
}

/// Classification result: tag, witnesses, and the ambient data needed to
/// rebuild and verify the embedding.
#[derive(Clone, Debug)]
pub struct NormalFormReport {
    pub tag: NormalFormTag,
    pub rank: usize,
    pub class: usize,
    pub center_dim: usize,
    pub basis: LieBasis,
    pub d1: Option<Derivation>,
    pub d2: Option<Derivation>,
    pub d3: Option<Derivation>,
    pub a: Option<RatFunc>,
    pub b: Option<RatFunc>,
}

/// Image of the input basis inside the triangular algebra u_k, together with
/// the verification flags (all true whenever the embedding is returned).
#[derive(Clone, Debug)]
pub struct Embedding {
    /// images[i] is the embedded image of basis generator i, in k fresh
    /// variables.
    pub images: Vec<Derivation>,
    pub nvars: usize,
    pub brackets_ok: bool,
    pub triangular_ok: bool,
    pub witnesses_ok: bool,
}

#[derive(Clone)]
struct Meta {
    rank: usize,
    class: usize,
    center_dim: usize,
}

fn nonrat(context: &str) -> LieError {
    LieError::NonRationalConstants {
        context: context.to_string(),
    }
}

fn internal(context: &str) -> LieError {
    LieError::Internal(context.to_string())
}

// ---------------------------------------------------------------------------
// small arithmetic helpers
// ---------------------------------------------------------------------------

fn factorial(n: usize) -> BigRational {
    let mut out = BigRational::one();
    for i in 1..=n {
        out *= BigRational::from_integer(i.into());
    }
    out
}

/// a^i / i!
fn pow_over_fact(a: &RatFunc, i: usize) -> RatFunc {
    a.pow(i as u32).scale(&factorial(i).recip())
}

/// [1, a, a^2/2, ..., a^n/n!]
fn chain_funcs(a: &RatFunc, n: usize) -> Vec<RatFunc> {
    (0..=n).map(|i| pow_over_fact(a, i)).collect()
}

/// Row-major grid [a^i b^j/(i! j!)], 0<=i<=ma, 0<=j<=mb.
fn grid_funcs(a: &RatFunc, b: &RatFunc, ma: usize, mb: usize) -> Vec<RatFunc> {
    let mut out = Vec::with_capacity((ma + 1) * (mb + 1));
    for i in 0..=ma {
        for j in 0..=mb {
            out.push(pow_over_fact(a, i).mul(&pow_over_fact(b, j)));
        }
    }
    out
}

/// The ratio c with e = c * d1, if e is an exact R-multiple of d1.
fn ratio(e: &Derivation, d1: &Derivation) -> Option<RatFunc> {
    let j = (0..d1.nvars()).find(|&j| !d1.coeff(j).is_zero())?;
    let c = e.coeff(j).div(d1.coeff(j)).ok()?;
    if &d1.scale(&c) == e {
        Some(c)
    } else {
        None
    }
}

/// Decompose e = c * d1 + v * d2 over R.
fn decompose2(e: &Derivation, d1: &Derivation, d2: &Derivation) -> Option<(RatFunc, RatFunc)> {
    let n = e.nvars();
    let m: Vec<Vec<RatFunc>> = (0..n)
        .map(|v| vec![d1.coeff(v).clone(), d2.coeff(v).clone()])
        .collect();
    let rhs: Vec<RatFunc> = (0..n).map(|v| e.coeff(v).clone()).collect();
    let x = linalg::ratfunc_solve(&m, &rhs)?;
    Some((x[0].clone(), x[1].clone()))
}

fn spans_all(gens: &[Derivation], span: &[Derivation]) -> bool {
    gens.iter()
        .all(|g| express_deriv_in_k_span(g, span).is_some())
}

// ---------------------------------------------------------------------------
// subspace machinery on top of the structure tensor
// ---------------------------------------------------------------------------

/// Rows z with z . v = 0 exactly for the v in the row span of `sub`.
fn membership_rows(sub: &Subspace, d: usize) -> QMat {
    linalg::kernel(sub.coords(), d)
}

/// {v in L : [v, g_j] in ideal for all j}, optionally intersected with
/// another subspace. Contains the ideal itself.
fn quotient_center(
    basis: &LieBasis,
    tensor: &StructureTensor,
    ideal: &Subspace,
    within: Option<&Subspace>,
) -> Subspace {
    let d = basis.dim();
    let z_rows = membership_rows(ideal, d);
    let mut m: QMat = Vec::new();
    for j in 0..d {
        for z in &z_rows {
            let row: QVec = (0..d)
                .map(|i| (0..d).map(|k| tensor.get(i, j, k) * &z[k]).sum())
                .collect();
            m.push(row);
        }
    }
    if let Some(w) = within {
        for z in membership_rows(w, d) {
            m.push(z);
        }
    }
    Subspace::from_coords(basis, linalg::kernel(&m, d))
}

/// Centralizer C_L(sub) = {v : [v, w] = 0 for all w in sub}.
fn centralizer(basis: &LieBasis, tensor: &StructureTensor, sub: &Subspace) -> Subspace {
    let d = basis.dim();
    let mut m: QMat = Vec::new();
    for w in sub.coords() {
        for k in 0..d {
            m.push(
                (0..d)
                    .map(|i| (0..d).map(|j| tensor.get(i, j, k) * &w[j]).sum())
                    .collect(),
            );
        }
    }
    Subspace::from_coords(basis, linalg::kernel(&m, d))
}

/// First reduced basis generator outside the subspace.
fn first_outside(basis: &LieBasis, sub: &Subspace) -> Option<Derivation> {
    for i in 0..basis.dim() {
        let mut e = vec![BigRational::zero(); basis.dim()];
        e[i] = BigRational::one();
        if !sub.contains_coord(&e) {
            return Some(basis.gens()[i].clone());
        }
    }
    None
}

/// First row of `from` whose coordinate vector lies outside `sub`.
fn first_coord_outside(basis: &LieBasis, from: &Subspace, sub: &Subspace) -> Option<Derivation> {
    from.coords()
        .iter()
        .find(|v| !sub.contains_coord(v))
        .map(|v| basis.lin_comb(v))
}

/// Last row of `from` whose coordinate vector lies outside `sub`. Used to
/// pick D2 so that, when several central directions are available, the one
/// latest in the reduced order is taken and D3 keeps the earliest generator.
fn last_coord_outside(basis: &LieBasis, from: &Subspace, sub: &Subspace) -> Option<Derivation> {
    from.coords()
        .iter()
        .rev()
        .find(|v| !sub.contains_coord(v))
        .map(|v| basis.lin_comb(v))
}

fn is_abelian_sub(sub: &Subspace) -> bool {
    let ds = sub.ders();
    for i in 0..ds.len() {
        for j in (i + 1)..ds.len() {
            if !ds[i].bracket(&ds[j]).is_zero() {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// the ratio space of I1 = R D1 ∩ L
// ---------------------------------------------------------------------------

/// The K-space of ratios {c : c D1 in I1}, on which the derivations of L act.
struct RatioSpace {
    funcs: Vec<RatFunc>,
}

impl RatioSpace {
    fn new(i1: &Subspace, d1: &Derivation) -> Result<RatioSpace, LieError> {
        let mut funcs: Vec<RatFunc> = Vec::new();
        for e in i1.ders() {
            let r = ratio(e, d1)
                .ok_or_else(|| internal("element of RD1 ∩ L is not an R-multiple of D1"))?;
            if express_ratfunc_in_k_span(&r, &funcs).is_none() {
                funcs.push(r);
            }
        }
        Ok(RatioSpace { funcs })
    }

    fn dim(&self) -> usize {
        self.funcs.len()
    }

    fn coords_of(&self, r: &RatFunc) -> Option<QVec> {
        express_ratfunc_in_k_span(r, &self.funcs)
    }

    fn lin_comb(&self, coords: &QVec) -> RatFunc {
        let nv = self.funcs[0].nvars();
        let mut out = RatFunc::zero(nv);
        for (f, c) in self.funcs.iter().zip(coords) {
            if !c.is_zero() {
                out = out.add(&f.scale(c));
            }
        }
        out
    }

    /// Matrix of c -> d(c) on the ratio space, `None` if it does not map the
    /// space into itself.
    fn op_matrix(&self, d: &Derivation) -> Option<QMat> {
        let k = self.dim();
        let mut m = vec![vec![BigRational::zero(); k]; k];
        for (j, f) in self.funcs.iter().enumerate() {
            let coords = self.coords_of(&d.apply(f))?;
            for (i, c) in coords.into_iter().enumerate() {
                m[i][j] = c;
            }
        }
        Some(m)
    }
}

/// Solve t_one(x) = 1 and t_zero(x) = 0 simultaneously inside the ratio
/// space.
fn joint_witness(space: &RatioSpace, t_one: &QMat, t_zero: &QMat) -> Option<RatFunc> {
    let nv = space.funcs[0].nvars();
    let one = space.coords_of(&RatFunc::one(nv))?;
    let k = space.dim();
    let mut m: QMat = Vec::new();
    let mut rhs: QVec = Vec::new();
    for r in 0..k {
        m.push(t_one[r].clone());
        rhs.push(one[r].clone());
    }
    for r in 0..k {
        m.push(t_zero[r].clone());
        rhs.push(BigRational::zero());
    }
    let x = linalg::solve(&m, &rhs)?;
    Some(space.lin_comb(&x))
}

/// Solve t(x) = 1 inside the ratio space.
fn single_witness(space: &RatioSpace, t: &QMat) -> Option<RatFunc> {
    let nv = space.funcs[0].nvars();
    let one = space.coords_of(&RatFunc::one(nv))?;
    let x = linalg::solve(t, &one)?;
    Some(space.lin_comb(&x))
}

/// Subtract from c the formal integral on `other` of diff(c); diff(c) must
/// be a K-combination of powers other^j/j!. The result is annihilated by
/// `diff` whenever diff(other) = 1 and diff commutes with the chain.
fn strip_powers(
    c: &RatFunc,
    other: &RatFunc,
    diff: &Derivation,
    bound: usize,
) -> Option<RatFunc> {
    let dc = diff.apply(c);
    if dc.is_zero() {
        return Some(c.clone());
    }
    let funcs = chain_funcs(other, bound);
    let coeffs = express_ratfunc_in_k_span(&dc, &funcs)?;
    let mut out = c.clone();
    for (j, beta) in coeffs.iter().enumerate() {
        if !beta.is_zero() {
            out = out.sub(&pow_over_fact(other, j + 1).scale(beta));
        }
    }
    Some(out)
}

/// The witness a extracted from the single Jordan block of ad D3 on the
/// quotient I2/I1: the D2-coordinates of the two lowest chain members give
/// a = v2/v1 with D3(a) = 1 and D2(a) = 0.
fn quotient_chain_a(
    basis: &LieBasis,
    i1: &Subspace,
    i2: &Subspace,
    d1: &Derivation,
    d2o: &Derivation,
    d3: &Derivation,
) -> Result<RatFunc, LieError> {
    let mut occupied = i1.coords().clone();
    let mut comp: QMat = Vec::new();
    for row in i2.coords() {
        if !linalg::in_span(&occupied, row) {
            occupied.push(row.clone());
            comp.push(row.clone());
        }
    }
    let t = comp.len();
    if t < 2 {
        return Err(nonrat("quotient I2/I1 is too small to produce the witness a"));
    }
    let comp_ders: Vec<Derivation> = comp.iter().map(|r| basis.lin_comb(r)).collect();
    let full: Vec<Derivation> = i1
        .ders()
        .iter()
        .cloned()
        .chain(comp_ders.iter().cloned())
        .collect();
    let p = i1.dim();
    let mut q = vec![vec![BigRational::zero(); t]; t];
    for (j, e) in comp_ders.iter().enumerate() {
        let w = d3.bracket(e);
        let coords =
            express_deriv_in_k_span(&w, &full).ok_or(LieError::AdNotInvariant)?;
        for i in 0..t {
            q[i][j] = coords[p + i].clone();
        }
    }
    let chains =
        linalg::nilpotent_jordan_chains(&q).ok_or(LieError::NotNilpotentOperator)?;
    if chains.len() != 1 {
        return Err(nonrat("ad D3 on I2/I1 is not a single Jordan block"));
    }
    let chain = &chains[0];
    let e1 = lin_comb(&comp_ders, &chain[t - 1]);
    let e2 = lin_comb(&comp_ders, &chain[t - 2]);
    let (_c1, v1) = decompose2(&e1, d1, d2o)
        .ok_or_else(|| internal("chain member is outside RD1 + RD2"))?;
    let (_c2, v2) = decompose2(&e2, d1, d2o)
        .ok_or_else(|| internal("chain member is outside RD1 + RD2"))?;
    let lam = v1
        .as_constant()
        .ok_or_else(|| nonrat("lowest D2-coordinate of the quotient chain is not rational"))?;
    if lam.is_zero() {
        return Err(nonrat("lowest D2-coordinate of the quotient chain vanishes"));
    }
    Ok(v2.scale(&lam.recip()))
}

// ---------------------------------------------------------------------------
// classify: pipeline and dispatch
// ---------------------------------------------------------------------------

/// Classify a closed nilpotent algebra of rank at most 3 into its normal
/// form and construct the witnesses of that form.
pub fn classify(basis: &LieBasis) -> Result<NormalFormReport, LieError> {
    if basis.dim() == 0 {
        return Err(LieError::EmptyAlgebra);
    }
    let tensor = structure_constants(basis)?;
    let series = lower_central_series_with(basis, &tensor);
    if !series.nilpotent {
        return Err(LieError::NotNilpotent);
    }
    let rank = rank_over_r(basis);
    if rank > 3 {
        return Err(LieError::RankTooHigh { rank });
    }
    let z = center_with(basis, &tensor);
    let meta = Meta {
        rank,
        class: series.class,
        center_dim: z.dim(),
    };
    let derived_dim = series.terms[1].dim();
    match rank {
        1 => rank1(basis, &meta),
        2 => rank2(basis, &tensor, &z, &meta),
        3 => rank3(basis, &tensor, &z, derived_dim, &meta),
        _ => Err(internal("rank 0 algebra with a nonzero generator")),
    }
}

/// Rank-1 entry point with its own precondition checks.
pub fn classify_rank1(basis: &LieBasis) -> Result<NormalFormReport, LieError> {
    let report = classify(basis)?;
    match report.tag {
        NormalFormTag::Rank1 => Ok(report),
        _ => Err(LieError::Precondition("algebra does not have rank 1".into())),
    }
}

/// Rank-2 entry point with its own precondition checks.
pub fn classify_rank2(basis: &LieBasis) -> Result<NormalFormReport, LieError> {
    let report = classify(basis)?;
    match report.tag {
        NormalFormTag::Rank2Chain(_) => Ok(report),
        _ => Err(LieError::Precondition("algebra does not have rank 2".into())),
    }
}

/// Rank-3 entry point with its own precondition checks.
pub fn classify_rank3(basis: &LieBasis) -> Result<NormalFormReport, LieError> {
    let report = classify(basis)?;
    match report.tag {
        NormalFormTag::Abelian3
        | NormalFormTag::Heisenberg3
        | NormalFormTag::L1(_)
        | NormalFormTag::L2(_, _) => Ok(report),
        _ => Err(LieError::Precondition("algebra does not have rank 3".into())),
    }
}

fn make_report(
    basis: &LieBasis,
    meta: &Meta,
    tag: NormalFormTag,
    d1: Option<Derivation>,
    d2: Option<Derivation>,
    d3: Option<Derivation>,
    a: Option<RatFunc>,
    b: Option<RatFunc>,
) -> NormalFormReport {
    NormalFormReport {
        tag,
        rank: meta.rank,
        class: meta.class,
        center_dim: meta.center_dim,
        basis: basis.clone(),
        d1,
        d2,
        d3,
        a,
        b,
    }
}

fn rank1(basis: &LieBasis, meta: &Meta) -> Result<NormalFormReport, LieError> {
    if basis.dim() != 1 {
        return Err(nonrat(
            "rank 1 with K-dimension above 1 means the constants field exceeds the rationals",
        ));
    }
    Ok(make_report(
        basis,
        meta,
        NormalFormTag::Rank1,
        Some(basis.gens()[0].clone()),
        None,
        None,
        None,
        None,
    ))
}

fn rank2(
    basis: &LieBasis,
    tensor: &StructureTensor,
    z: &Subspace,
    meta: &Meta,
) -> Result<NormalFormReport, LieError> {
    let d = basis.dim();
    if meta.class <= 1 {
        // abelian: rational constants force dimension 2
        if d != 2 {
            return Err(nonrat("abelian rank-2 algebra of K-dimension above 2"));
        }
        return Ok(make_report(
            basis,
            meta,
            NormalFormTag::Rank2Chain(0),
            Some(basis.gens()[0].clone()),
            Some(basis.gens()[1].clone()),
            None,
            None,
            None,
        ));
    }
    // nonabelian: chain form with k = dim - 2
    if z.dim() != 1 || rank_over_r_ders(z.ders()) != 1 {
        return Err(nonrat("center of a nonabelian rank-2 algebra is not a line"));
    }
    let _ = tensor;
    let d1z = z.ders()[0].clone();
    let i1 = r_span_intersection(basis, std::slice::from_ref(&d1z))?;
    if i1.dim() != d - 1 {
        return Err(nonrat("RD1 ∩ L does not have codimension 1"));
    }
    let d2 = first_outside(basis, &i1).ok_or_else(|| internal("no generator outside RD1 ∩ L"))?;
    let chains = jordan_chains(basis, &i1, &d2)?;
    if chains.len() != 1 {
        return Err(nonrat("ad D2 on RD1 ∩ L is not a single Jordan block"));
    }
    let chain = &chains[0];
    let d1 = chain[chain.len() - 1].clone();
    let e = &chain[chain.len() - 2];
    let a = ratio(e, &d1).ok_or_else(|| internal("chain member is not an R-multiple of D1"))?;
    if !d1.apply(&a).is_zero() {
        return Err(nonrat("D1(a) does not vanish"));
    }
    if d2.apply(&a) != RatFunc::one(basis.nvars()) {
        return Err(nonrat("D2(a) is not 1"));
    }
    let k = d - 2;
    let mut span: Vec<Derivation> = chain_funcs(&a, k).iter().map(|f| d1.scale(f)).collect();
    span.push(d2.clone());
    if !spans_all(basis.gens(), &span) {
        return Err(nonrat("algebra escapes the chain span F<D1, aD1, ..., D2>"));
    }
    Ok(make_report(
        basis,
        meta,
        NormalFormTag::Rank2Chain(k),
        Some(d1),
        Some(d2),
        None,
        Some(a),
        None,
    ))
}

fn rank3(
    basis: &LieBasis,
    tensor: &StructureTensor,
    z: &Subspace,
    derived_dim: usize,
    meta: &Meta,
) -> Result<NormalFormReport, LieError> {
    let d = basis.dim();
    if d < 3 {
        return Err(internal("rank 3 with K-dimension below 3"));
    }
    if d == 3 {
        return rank3_dim3(basis, tensor, z, derived_dim, meta);
    }
    let zrank = rank_over_r_ders(z.ders());
    if z.dim() != zrank {
        return Err(nonrat(
            "center dimension exceeds its rank: constants field exceeds the rationals",
        ));
    }
    match zrank {
        2 => center_rank2_route(basis, z, meta),
        1 => center_rank1_route(basis, tensor, z, meta),
        3 => Err(internal("center of rank 3 in a nilpotent algebra of dimension at least 4")),
        _ => Err(internal("nilpotent algebra with trivial center")),
    }
}

fn rank3_dim3(
    basis: &LieBasis,
    tensor: &StructureTensor,
    z: &Subspace,
    derived_dim: usize,
    meta: &Meta,
) -> Result<NormalFormReport, LieError> {
    match derived_dim {
        0 => Ok(make_report(
            basis,
            meta,
            NormalFormTag::Abelian3,
            Some(basis.gens()[0].clone()),
            Some(basis.gens()[1].clone()),
            Some(basis.gens()[2].clone()),
            None,
            None,
        )),
        1 => {
            // Heisenberg: D1 spans the derived subalgebra and must be central
            let tensor_d1 = {
                let mut e0 = vec![BigRational::zero(); 3];
                e0[0] = BigRational::one();
                e0
            };
            let _ = tensor_d1;
            let series_d1 = {
                // derived subalgebra basis element
                let der = lower_central_series_with(basis, tensor);
                der.terms[1].ders()[0].clone()
            };
            let d1 = series_d1;
            let d1_coords = basis
                .coords_of(&d1)
                .ok_or_else(|| internal("derived generator outside the basis span"))?;
            if !z.contains_coord(&d1_coords) {
                return Err(internal("derived line of a dim-3 class-2 algebra is not central"));
            }
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let gi = &basis.gens()[i];
                    let gj = &basis.gens()[j];
                    if k_linear_reduce(&[d1.clone(), gi.clone(), gj.clone()])?.dim() != 3 {
                        continue;
                    }
                    let br = gi.bracket(gj);
                    let lam = match express_deriv_in_k_span(&br, std::slice::from_ref(&d1)) {
                        Some(c) => c[0].clone(),
                        None => continue,
                    };
                    if lam.is_zero() {
                        continue;
                    }
                    // prefer the orientation in which D2 needs no rescaling
                    let minus_one = -BigRational::one();
                    let (d3, d2) = if lam == minus_one {
                        (gj.clone(), gi.clone())
                    } else {
                        (gi.clone(), gj.scale_k(&lam.recip()))
                    };
                    return Ok(make_report(
                        basis,
                        meta,
                        NormalFormTag::Heisenberg3,
                        Some(d1),
                        Some(d2),
                        Some(d3),
                        None,
                        None,
                    ));
                }
            }
            Err(internal("no complement pair found for the Heisenberg form"))
        }
        _ => Err(internal("dim-3 nilpotent algebra with derived dimension above 1")),
    }
}

/// Center of rank 2: one ideal I = (RD1 + RD2) ∩ L, two
/// Jordan blocks of ad D3, tag L1(n).
fn center_rank2_route(basis: &LieBasis, z: &Subspace, meta: &Meta) -> Result<NormalFormReport, LieError> {
    let d = basis.dim();
    let mut picks: Vec<Derivation> = Vec::new();
    for e in z.ders() {
        let mut cand = picks.clone();
        cand.push(e.clone());
        if rank_over_r_ders(&cand) > picks.len() {
            picks = cand;
        }
        if picks.len() == 2 {
            break;
        }
    }
    if picks.len() < 2 {
        return Err(internal("center of rank 2 without two R-independent elements"));
    }
    let ideal = r_span_intersection(basis, &picks)?;
    if ideal.dim() != d - 1 {
        return Err(nonrat("(RD1 + RD2) ∩ L does not have codimension 1"));
    }
    let d3 = first_outside(basis, &ideal)
        .ok_or_else(|| internal("no generator outside the abelian ideal"))?;
    let chains = jordan_chains(basis, &ideal, &d3)?;
    if chains.len() != 2 {
        return Err(nonrat("ad D3 on the ideal does not split into two Jordan blocks"));
    }
    let j1 = &chains[0];
    let j2 = &chains[1];
    if j1.len() < 2 {
        return Err(internal("both Jordan blocks trivial in a dim >= 4 algebra"));
    }
    let d1 = j1[j1.len() - 1].clone();
    let d2 = j2[j2.len() - 1].clone();
    let e = &j1[j1.len() - 2];
    let (a, _b1) =
        decompose2(e, &d1, &d2).ok_or_else(|| internal("chain member outside RD1 + RD2"))?;
    finish_l1(basis, meta, d1, d2, d3, a)
}

/// Center of rank 1: build I1, I2, split on whether I2 is
/// abelian, with the centralizer pre-pass rerouting ambiguous nonabelian
/// cases through the abelian path.
fn center_rank1_route(
    basis: &LieBasis,
    tensor: &StructureTensor,
    z: &Subspace,
    meta: &Meta,
) -> Result<NormalFormReport, LieError> {
    let d = basis.dim();
    let d1 = z.ders()[0].clone();
    let i1 = r_span_intersection(basis, std::slice::from_ref(&d1))?;
    let qc = quotient_center(basis, tensor, &i1, None);
    let d2o = last_coord_outside(basis, &qc, &i1)
        .ok_or_else(|| internal("quotient L/I1 has trivial center"))?;
    let i2 = r_span_intersection(basis, &[d1.clone(), d2o.clone()])?;
    if i2.dim() != d - 1 {
        return Err(nonrat("(RD1 + RD2) ∩ L does not have codimension 1"));
    }
    let d3 = first_outside(basis, &i2).ok_or_else(|| internal("no generator outside I2"))?;
    if is_abelian_sub(&i2) {
        return case1(basis, meta, &i1, &i2, &d2o, &d3);
    }
    // pre-pass: if the centralizer of I1 is strictly larger than I1, reroute
    // through the abelian ideal I4 = (RD1 + RD4) ∩ L
    let cent = centralizer(basis, tensor, &i1);
    if cent.dim() > i1.dim() {
        let qc4 = quotient_center(basis, tensor, &i1, Some(&cent));
        let d4 = first_coord_outside(basis, &qc4, &i1)
            .ok_or_else(|| internal("centralizer quotient has trivial center"))?;
        let i4 = r_span_intersection(basis, &[d1.clone(), d4.clone()])?;
        if i4.dim() != d - 1 {
            return Err(nonrat("(RD1 + RD4) ∩ L does not have codimension 1"));
        }
        if !is_abelian_sub(&i4) {
            return Err(internal("rerouted ideal I4 is not abelian"));
        }
        let d3b = first_outside(basis, &i4)
            .ok_or_else(|| internal("no generator outside I4"))?;
        return case1(basis, meta, &i1, &i4, &d4, &d3b);
    }
    case2(basis, meta, &d1, &i1, &i2, &d2o, &d3)
}

/// Abelian codimension-1 ideal case: extract a from the single
/// Jordan block of ad D3 on I1 (or on I2/I1 when I1 is a line), then correct
/// D2 by formal integration so that all witnesses commute. Tag L1(n).
fn case1(
    basis: &LieBasis,
    meta: &Meta,
    i1: &Subspace,
    i2: &Subspace,
    d2o: &Derivation,
    d3: &Derivation,
) -> Result<NormalFormReport, LieError> {
    let bound = basis.dim() + 2;
    let (d1, a) = if i1.dim() >= 2 {
        let chains = jordan_chains(basis, i1, d3)?;
        if chains.len() != 1 {
            return Err(nonrat("ad D3 on RD1 ∩ L is not a single Jordan block"));
        }
        let chain = &chains[0];
        let d1 = chain[chain.len() - 1].clone();
        let e = &chain[chain.len() - 2];
        let a = ratio(e, &d1)
            .ok_or_else(|| internal("chain member is not an R-multiple of D1"))?;
        (d1, a)
    } else {
        let d1 = i1.ders()[0].clone();
        let a = quotient_chain_a(basis, i1, i2, &d1, d2o, d3)?;
        (d1, a)
    };
    let g = d3.bracket(d2o);
    let d2 = if g.is_zero() {
        d2o.clone()
    } else {
        let r = ratio(&g, &d1)
            .ok_or_else(|| internal("[D3, D2] is not an R-multiple of D1"))?;
        let coeffs = express_ratfunc_in_k_span(&r, &chain_funcs(&a, bound))
            .ok_or_else(|| nonrat("[D3, D2] is not a rational chain in a"))?;
        let mut r0 = RatFunc::zero(basis.nvars());
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                r0 = r0.add(&pow_over_fact(&a, i + 1).scale(c));
            }
        }
        d2o.sub(&d1.scale(&r0))
    };
    finish_l1(basis, meta, d1, d2, d3.clone(), a)
}

/// Nonabelian case (I2 nonabelian with C_L(I1) = I1): extract a and b from
/// the action of D2 and D3 on the ratio space of I1, correct D2 by formal
/// integration on a, tag L2(n, m).
fn case2(
    basis: &LieBasis,
    meta: &Meta,
    d1: &Derivation,
    i1: &Subspace,
    i2: &Subspace,
    d2o: &Derivation,
    d3: &Derivation,
) -> Result<NormalFormReport, LieError> {
    let bound = basis.dim() + 2;
    let space = RatioSpace::new(i1, d1)?;
    let t2 = space
        .op_matrix(d2o)
        .ok_or_else(|| internal("ad D2 does not preserve the ratio space of I1"))?;
    let t3 = space
        .op_matrix(d3)
        .ok_or_else(|| internal("ad D3 does not preserve the ratio space of I1"))?;
    // a: D3(a) = 1, D2(a) = 0; b: D2(b) = 1, D3(b) = 0
    let mut a = joint_witness(&space, &t3, &t2);
    let mut b = joint_witness(&space, &t2, &t3);
    if b.is_none() {
        if let Some(aa) = &a {
            b = single_witness(&space, &t2).and_then(|c| strip_powers(&c, aa, d3, bound));
        }
    }
    if a.is_none() {
        if let Some(bb) = &b {
            a = single_witness(&space, &t3).and_then(|c| strip_powers(&c, bb, d2o, bound));
        }
        if a.is_none() {
            a = quotient_chain_a(basis, i1, i2, d1, d2o, d3).ok();
        }
        if b.is_none() {
            if let Some(aa) = &a {
                b = single_witness(&space, &t2).and_then(|c| strip_powers(&c, aa, d3, bound));
            }
        }
    }
    let a = a.ok_or_else(|| nonrat("no rational witness a with D3(a) = 1"))?;
    let b = b.ok_or_else(|| nonrat("no rational witness b with D2(b) = 1"))?;
    // correct D2 so that [D3, D2] = 0
    let g = d3.bracket(d2o);
    let d2 = if g.is_zero() {
        d2o.clone()
    } else {
        let r = ratio(&g, d1)
            .ok_or_else(|| internal("[D3, D2] is not an R-multiple of D1"))?;
        let coeffs = express_ratfunc_in_k_span(&r, &grid_funcs(&a, &b, bound, bound))
            .ok_or_else(|| nonrat("[D3, D2] is not a rational grid combination in a, b"))?;
        let mut r0 = RatFunc::zero(basis.nvars());
        for i in 0..=bound {
            for j in 0..=bound {
                let c = &coeffs[i * (bound + 1) + j];
                if !c.is_zero() {
                    r0 = r0.add(
                        &pow_over_fact(&a, i + 1)
                            .mul(&pow_over_fact(&b, j))
                            .scale(c),
                    );
                }
            }
        }
        d2o.sub(&d1.scale(&r0))
    };
    finish_l2(basis, meta, i1, d1.clone(), d2, d3.clone(), a, b)
}

fn check_l_witnesses(
    nv: usize,
    d1: &Derivation,
    d2: &Derivation,
    d3: &Derivation,
    a: &RatFunc,
    b: Option<&RatFunc>,
) -> Result<(), LieError> {
    let one = RatFunc::one(nv);
    let commuting = d1.bracket(d2).is_zero()
        && d1.bracket(d3).is_zero()
        && d2.bracket(d3).is_zero();
    if !commuting {
        return Err(nonrat("constructed witnesses D1, D2, D3 do not commute"));
    }
    if !d1.apply(a).is_zero() || !d2.apply(a).is_zero() || d3.apply(a) != one {
        return Err(nonrat("witness a violates D1(a) = D2(a) = 0, D3(a) = 1"));
    }
    if let Some(b) = b {
        if !d1.apply(b).is_zero() || !d3.apply(b).is_zero() || d2.apply(b) != one {
            return Err(nonrat("witness b violates D1(b) = D3(b) = 0, D2(b) = 1"));
        }
    }
    Ok(())
}

fn finish_l1(
    basis: &LieBasis,
    meta: &Meta,
    d1: Derivation,
    d2: Derivation,
    d3: Derivation,
    a: RatFunc,
) -> Result<NormalFormReport, LieError> {
    check_l_witnesses(basis.nvars(), &d1, &d2, &d3, &a, None)?;
    let bound = basis.dim() + 2;
    for n in 1..=bound {
        let cf = chain_funcs(&a, n);
        let mut span: Vec<Derivation> = vec![d3.clone()];
        span.extend(cf.iter().map(|f| d1.scale(f)));
        span.extend(cf.iter().map(|f| d2.scale(f)));
        if spans_all(basis.gens(), &span) {
            return Ok(make_report(
                basis,
                meta,
                NormalFormTag::L1(n),
                Some(d1),
                Some(d2),
                Some(d3),
                Some(a),
                None,
            ));
        }
    }
    Err(nonrat("algebra escapes every chain span of the L1 form"))
}

#[allow(clippy::too_many_arguments)]
fn finish_l2(
    basis: &LieBasis,
    meta: &Meta,
    i1: &Subspace,
    d1: Derivation,
    d2: Derivation,
    d3: Derivation,
    a: RatFunc,
    b: RatFunc,
) -> Result<NormalFormReport, LieError> {
    check_l_witnesses(basis.nvars(), &d1, &d2, &d3, &a, Some(&b))?;
    let bound = basis.dim() + 2;
    for m in 1..=bound {
        let grid: Vec<Derivation> = grid_funcs(&a, &b, m, m)
            .iter()
            .map(|f| d1.scale(f))
            .collect();
        if !spans_all(i1.ders(), &grid) {
            continue;
        }
        for n in 0..=bound {
            let mut span: Vec<Derivation> = vec![d3.clone()];
            span.extend(chain_funcs(&a, n).iter().map(|f| d2.scale(f)));
            span.extend(grid.iter().cloned());
            if spans_all(basis.gens(), &span) {
                return Ok(make_report(
                    basis,
                    meta,
                    NormalFormTag::L2(n, m),
                    Some(d1),
                    Some(d2),
                    Some(d3),
                    Some(a),
                    Some(b),
                ));
            }
        }
    }
    Err(nonrat("algebra escapes every grid span of the L2 form"))
}

// ---------------------------------------------------------------------------
// chain and grid expansion as operations
// ---------------------------------------------------------------------------

/// Express b = gamma + sum beta_i a^{i+1}/(i+1)! given that D3(b) lies in
/// the chain span of a up to a^s/s!. Returns coefficients over
/// {1, a, ..., a^{s+1}/(s+1)!} with coeffs[0] = gamma.
pub fn express_via_chain(
    b: &RatFunc,
    a: &RatFunc,
    d1: &Derivation,
    d2: &Derivation,
    d3: &Derivation,
    s: usize,
) -> Result<ChainCoefficients, LieError> {
    let nv = b.nvars();
    let one = RatFunc::one(nv);
    if !d1.apply(a).is_zero() || !d2.apply(a).is_zero() || d3.apply(a) != one {
        return Err(LieError::Precondition(
            "a must satisfy D1(a) = D2(a) = 0, D3(a) = 1".into(),
        ));
    }
    if !d1.apply(b).is_zero() || !d2.apply(b).is_zero() {
        return Err(LieError::Precondition(
            "b must satisfy D1(b) = D2(b) = 0".into(),
        ));
    }
    let d3b = d3.apply(b);
    let betas = express_ratfunc_in_k_span(&d3b, &chain_funcs(a, s)).ok_or_else(|| {
        LieError::Precondition("D3(b) is outside the stated chain span of a".into())
    })?;
    let mut c = RatFunc::zero(nv);
    for (i, beta) in betas.iter().enumerate() {
        if !beta.is_zero() {
            c = c.add(&pow_over_fact(a, i + 1).scale(beta));
        }
    }
    let gamma = b
        .sub(&c)
        .as_constant()
        .ok_or_else(|| nonrat("residual b - c is not a rational constant"))?;
    let mut coeffs = vec![gamma];
    coeffs.extend(betas);
    Ok(ChainCoefficients {
        coeffs,
        grid: vec![],
    })
}

/// Evaluate a two-variable polynomial at rational-function arguments.
fn eval_poly2(h: &MultiPoly, a: &RatFunc, b: &RatFunc) -> RatFunc {
    let nv = a.nvars();
    let mut out = RatFunc::zero(nv);
    for (mono, coeff) in h.coeff_map() {
        let term = a
            .pow(mono.0[0])
            .mul(&b.pow(mono.0[1]))
            .scale(coeff);
        out = out.add(&term);
    }
    out
}

/// Express c over the grid {a^i b^j/(i! j!)}, 0<=i<=m, 0<=j<=k, through the
/// potential of the pair (D3(c), D2(c)).
#[allow(clippy::too_many_arguments)]
pub fn express_via_grid(
    c: &RatFunc,
    a: &RatFunc,
    b: &RatFunc,
    d1: &Derivation,
    d2: &Derivation,
    d3: &Derivation,
    m: usize,
    k: usize,
) -> Result<ChainCoefficients, LieError> {
    if !d1.apply(c).is_zero() {
        return Err(LieError::Precondition("D1(c) must vanish".into()));
    }
    if !d2.bracket(d3).apply(c).is_zero() {
        return Err(LieError::Precondition("[D2, D3](c) must vanish".into()));
    }
    // D2 differentiates in b, D3 differentiates in a
    let expand = |f: &RatFunc, ma: usize, mb: usize| -> Option<Vec<BigRational>> {
        if f.is_zero() {
            return Some(vec![BigRational::zero(); (ma + 1) * (mb + 1)]);
        }
        express_ratfunc_in_k_span(f, &grid_funcs(a, b, ma, mb))
    };
    let f_coeffs = if k == 0 {
        if !d2.apply(c).is_zero() {
            return Err(LieError::Precondition("D2(c) outside the stated grid".into()));
        }
        vec![]
    } else {
        expand(&d2.apply(c), m, k - 1)
            .ok_or_else(|| LieError::Precondition("D2(c) outside the stated grid".into()))?
    };
    let g_coeffs = if m == 0 {
        if !d3.apply(c).is_zero() {
            return Err(LieError::Precondition("D3(c) outside the stated grid".into()));
        }
        vec![]
    } else {
        expand(&d3.apply(c), m - 1, k)
            .ok_or_else(|| LieError::Precondition("D3(c) outside the stated grid".into()))?
    };
    // assemble polynomials in two fresh variables u (for a) and v (for b)
    let mut fhat = MultiPoly::zero(2);
    for i in 0..=m {
        for j in 0..k.max(1) {
            if k == 0 {
                break;
            }
            let coeff = &f_coeffs[i * k + j];
            if !coeff.is_zero() {
                let mono = MultiPoly::var(2, 0)
                    .pow(i as u32)
                    .mul(&MultiPoly::var(2, 1).pow(j as u32));
                fhat = fhat.add(&mono.scale(&(coeff / (factorial(i) * factorial(j)))));
            }
        }
    }
    let mut ghat = MultiPoly::zero(2);
    for i in 0..m.max(1) {
        if m == 0 {
            break;
        }
        for j in 0..=k {
            let coeff = &g_coeffs[i * (k + 1) + j];
            if !coeff.is_zero() {
                let mono = MultiPoly::var(2, 0)
                    .pow(i as u32)
                    .mul(&MultiPoly::var(2, 1).pow(j as u32));
                ghat = ghat.add(&mono.scale(&(coeff / (factorial(i) * factorial(j)))));
            }
        }
    }
    let h = potential(&ghat, &fhat, 0, 1)?;
    let gamma = c
        .sub(&eval_poly2(&h, a, b))
        .as_constant()
        .ok_or_else(|| nonrat("residual c - h(a, b) is not a rational constant"))?;
    let mut grid = vec![vec![BigRational::zero(); k + 1]; m + 1];
    for (mono, coeff) in h.coeff_map() {
        let (i, j) = (mono.0[0] as usize, mono.0[1] as usize);
        if i > m || j > k {
            return Err(internal("potential escapes the stated grid"));
        }
        grid[i][j] = coeff * factorial(i) * factorial(j);
    }
    grid[0][0] += gamma;
    Ok(ChainCoefficients {
        coeffs: vec![],
        grid,
    })
}

// ---------------------------------------------------------------------------
// embedding into the triangular algebra
// ---------------------------------------------------------------------------

/// True iff coefficient i depends only on variables strictly after i (so the
/// last coefficient is a constant) and all coefficients are polynomial.
pub fn is_in_triangular(d: &Derivation) -> bool {
    (0..d.nvars()).all(|i| {
        let c = d.coeff(i);
        c.is_polynomial() && (0..=i).all(|j| c.num().is_free_of(j))
    })
}

fn witness(
    d: &Option<Derivation>,
    what: &str,
) -> Result<Derivation, LieError> {
    d.clone()
        .ok_or_else(|| internal(&format!("report is missing the witness {}", what)))
}

fn witness_fn(a: &Option<RatFunc>, what: &str) -> Result<RatFunc, LieError> {
    a.clone()
        .ok_or_else(|| internal(&format!("report is missing the witness {}", what)))
}

/// The normal-form spanning set in the original variables, its image in k
/// fresh variables, and k.
fn normal_form_spans(
    report: &NormalFormReport,
) -> Result<(Vec<Derivation>, Vec<Derivation>, usize), LieError> {
    let p = Derivation::partial;
    match &report.tag {
        NormalFormTag::Rank1 => Ok((vec![witness(&report.d1, "D1")?], vec![p(1, 0)], 1)),
        NormalFormTag::Rank2Chain(k) => {
            let d1 = witness(&report.d1, "D1")?;
            let d2 = witness(&report.d2, "D2")?;
            if *k == 0 {
                return Ok((vec![d1, d2], vec![p(2, 0), p(2, 1)], 2));
            }
            let a = witness_fn(&report.a, "a")?;
            let x2 = RatFunc::var(2, 1);
            let mut source: Vec<Derivation> =
                chain_funcs(&a, *k).iter().map(|f| d1.scale(f)).collect();
            source.push(d2);
            let mut target: Vec<Derivation> = chain_funcs(&x2, *k)
                .iter()
                .map(|f| p(2, 0).scale(f))
                .collect();
            target.push(p(2, 1));
            Ok((source, target, 2))
        }
        NormalFormTag::Abelian3 => Ok((
            report.basis.gens().to_vec(),
            vec![p(3, 0), p(3, 1), p(3, 2)],
            3,
        )),
        NormalFormTag::Heisenberg3 => {
            let d1 = witness(&report.d1, "D1")?;
            let d2 = witness(&report.d2, "D2")?;
            let d3 = witness(&report.d3, "D3")?;
            let x3 = RatFunc::var(3, 2);
            Ok((
                vec![d1, d2, d3],
                vec![p(3, 0), p(3, 0).scale(&x3).add(&p(3, 1)), p(3, 2)],
                3,
            ))
        }
        NormalFormTag::L1(n) => {
            let d1 = witness(&report.d1, "D1")?;
            let d2 = witness(&report.d2, "D2")?;
            let d3 = witness(&report.d3, "D3")?;
            let a = witness_fn(&report.a, "a")?;
            let x3 = RatFunc::var(3, 2);
            let cf = chain_funcs(&a, *n);
            let cf_t = chain_funcs(&x3, *n);
            let mut source = vec![d3];
            source.extend(cf.iter().map(|f| d1.scale(f)));
            source.extend(cf.iter().map(|f| d2.scale(f)));
            let mut target = vec![p(3, 2)];
            target.extend(cf_t.iter().map(|f| p(3, 0).scale(f)));
            target.extend(cf_t.iter().map(|f| p(3, 1).scale(f)));
            Ok((source, target, 3))
        }
        NormalFormTag::L2(n, m) => {
            let d1 = witness(&report.d1, "D1")?;
            let d2 = witness(&report.d2, "D2")?;
            let d3 = witness(&report.d3, "D3")?;
            let a = witness_fn(&report.a, "a")?;
            let b = witness_fn(&report.b, "b")?;
            let x3 = RatFunc::var(3, 2);
            let x2 = RatFunc::var(3, 1);
            let mut source = vec![d3];
            source.extend(chain_funcs(&a, *n).iter().map(|f| d2.scale(f)));
            source.extend(grid_funcs(&a, &b, *m, *m).iter().map(|f| d1.scale(f)));
            let mut target = vec![p(3, 2)];
            target.extend(chain_funcs(&x3, *n).iter().map(|f| p(3, 1).scale(f)));
            target.extend(
                grid_funcs(&x3, &x2, *m, *m)
                    .iter()
                    .map(|f| p(3, 0).scale(f)),
            );
            Ok((source, target, 3))
        }
    }
}

/// Check the defining relations of the report's tag on its witnesses.
pub fn verify_witnesses(report: &NormalFormReport) -> bool {
    let nv = report.basis.nvars();
    let one = RatFunc::one(nv);
    match &report.tag {
        NormalFormTag::Rank1 => report.d1.is_some(),
        NormalFormTag::Rank2Chain(k) => {
            let (Some(d1), Some(d2)) = (&report.d1, &report.d2) else {
                return false;
            };
            if !d1.bracket(d2).is_zero() {
                return false;
            }
            if *k == 0 {
                return true;
            }
            let Some(a) = &report.a else { return false };
            d1.apply(a).is_zero() && d2.apply(a) == one
        }
        NormalFormTag::Abelian3 => {
            let (Some(d1), Some(d2), Some(d3)) = (&report.d1, &report.d2, &report.d3) else {
                return false;
            };
            d1.bracket(d2).is_zero() && d1.bracket(d3).is_zero() && d2.bracket(d3).is_zero()
        }
        NormalFormTag::Heisenberg3 => {
            let (Some(d1), Some(d2), Some(d3)) = (&report.d1, &report.d2, &report.d3) else {
                return false;
            };
            d3.bracket(d2) == *d1 && d2.bracket(d1).is_zero() && d3.bracket(d1).is_zero()
        }
        NormalFormTag::L1(_) | NormalFormTag::L2(_, _) => {
            let (Some(d1), Some(d2), Some(d3), Some(a)) =
                (&report.d1, &report.d2, &report.d3, &report.a)
            else {
                return false;
            };
            let commuting = d1.bracket(d2).is_zero()
                && d1.bracket(d3).is_zero()
                && d2.bracket(d3).is_zero();
            let a_ok = d1.apply(a).is_zero() && d2.apply(a).is_zero() && d3.apply(a) == one;
            let b_ok = match &report.tag {
                NormalFormTag::L2(_, _) => match &report.b {
                    Some(b) => {
                        d1.apply(b).is_zero() && d3.apply(b).is_zero() && d2.apply(b) == one
                    }
                    None => false,
                },
                _ => true,
            };
            commuting && a_ok && b_ok
        }
    }
}

/// Map each basis generator into the triangular algebra u_k along the
/// normal-form correspondence and verify the result: K-linear bijectivity,
/// exact bracket preservation, triangular membership, and the witness
/// relations. Any failure is an internal error, never silently ignored.
pub fn embed_into_triangular(report: &NormalFormReport) -> Result<Embedding, LieError> {
    let (source, target, k) = normal_form_spans(report)?;
    let d = report.basis.dim();
    let mut images = Vec::with_capacity(d);
    for g in report.basis.gens() {
        let coords = express_deriv_in_k_span(g, &source)
            .ok_or_else(|| internal("generator escapes the normal-form span"))?;
        images.push(lin_comb(&target, &coords));
    }
    if k_linear_reduce(&images)?.dim() != d {
        return Err(internal("embedded images are K-linearly dependent"));
    }
    let tensor = structure_constants(&report.basis)?;
    let mut brackets_ok = true;
    for i in 0..d {
        for j in (i + 1)..d {
            let lhs = images[i].bracket(&images[j]);
            let mut rhs = Derivation::zero(k);
            for (l, img) in images.iter().enumerate() {
                let c = tensor.get(i, j, l);
                if !c.is_zero() {
                    rhs = rhs.add(&img.scale_k(c));
                }
            }
            if lhs != rhs {
                brackets_ok = false;
            }
        }
    }
    let triangular_ok = images.iter().all(is_in_triangular);
    let witnesses_ok = verify_witnesses(report);
    if !(brackets_ok && triangular_ok && witnesses_ok) {
        return Err(internal("embedding verification failed"));
    }
    Ok(Embedding {
        images,
        nvars: k,
        brackets_ok,
        triangular_ok,
        witnesses_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::k_linear_reduce;

    fn d(i: usize) -> Derivation {
        Derivation::partial(3, i)
    }

    fn xr(i: usize) -> RatFunc {
        RatFunc::var(3, i)
    }

    fn algebra(gens: &[Derivation]) -> LieBasis {
        k_linear_reduce(gens).unwrap()
    }

    #[test]
    fn abelian3_fixture() {
        let l = algebra(&[
            d(0).scale(&xr(0)),
            d(1).scale(&xr(1)),
            d(2).scale(&xr(2)),
        ]);
        let report = classify(&l).unwrap();
        assert_eq!(report.tag, NormalFormTag::Abelian3);
        let emb = embed_into_triangular(&report).unwrap();
        assert_eq!(emb.nvars, 3);
        assert_eq!(
            emb.images,
            vec![
                Derivation::partial(3, 0),
                Derivation::partial(3, 1),
                Derivation::partial(3, 2)
            ]
        );
        assert!(emb.brackets_ok && emb.triangular_ok && emb.witnesses_ok);
    }

    #[test]
    fn heisenberg3_fixture() {
        let l = algebra(&[d(0), d(0).scale(&xr(2)).add(&d(1)), d(2)]);
        let report = classify(&l).unwrap();
        assert_eq!(report.tag, NormalFormTag::Heisenberg3);
        let emb = embed_into_triangular(&report).unwrap();
        let x3 = RatFunc::var(3, 2);
        assert_eq!(
            emb.images,
            vec![
                Derivation::partial(3, 0),
                Derivation::partial(3, 0).scale(&x3).add(&Derivation::partial(3, 1)),
                Derivation::partial(3, 2)
            ]
        );
    }

    #[test]
    fn rank1_fixtures() {
        let l = algebra(&[d(0)]);
        assert_eq!(classify(&l).unwrap().tag, NormalFormTag::Rank1);
        let l2 = algebra(&[d(0).scale(&xr(1))]);
        assert_eq!(classify(&l2).unwrap().tag, NormalFormTag::Rank1);
        let emb = embed_into_triangular(&classify(&l2).unwrap()).unwrap();
        assert_eq!(emb.images, vec![Derivation::partial(1, 0)]);
        // rank 1, dim 2 over K: constants field exceeds the rationals
        let bad = algebra(&[d(0), d(0).scale(&xr(1))]);
        assert!(matches!(
            classify(&bad),
            Err(LieError::NonRationalConstants { .. })
        ));
    }

    #[test]
    fn rank2_fixtures() {
        // {d1, x2 d1, d2} -> k = 1, a = x2
        let l = algebra(&[d(0), d(0).scale(&xr(1)), d(1)]);
        let report = classify(&l).unwrap();
        assert_eq!(report.tag, NormalFormTag::Rank2Chain(1));
        assert_eq!(report.a.as_ref().unwrap(), &xr(1));
        let emb = embed_into_triangular(&report).unwrap();
        assert_eq!(emb.nvars, 2);

        // {d1, d2} -> k = 0
        let l0 = algebra(&[d(0), d(1)]);
        assert_eq!(classify(&l0).unwrap().tag, NormalFormTag::Rank2Chain(0));

        // {d1, x2 d1, x2^2/2 d1, d2} -> k = 2
        let half = BigRational::new(1.into(), 2.into());
        let l2 = algebra(&[
            d(0),
            d(0).scale(&xr(1)),
            d(0).scale(&xr(1).pow(2).scale(&half)),
            d(1),
        ]);
        let report2 = classify(&l2).unwrap();
        assert_eq!(report2.tag, NormalFormTag::Rank2Chain(2));
        assert_eq!(report2.a.as_ref().unwrap(), &xr(1));
        embed_into_triangular(&report2).unwrap();
    }

    #[test]
    fn l1_fixture() {
        let l = algebra(&[
            d(2),
            d(0),
            d(0).scale(&xr(2)),
            d(1),
            d(1).scale(&xr(2)),
        ]);
        let report = classify(&l).unwrap();
        assert_eq!(report.tag, NormalFormTag::L1(1));
        assert_eq!(report.a.as_ref().unwrap(), &xr(2));
        let emb = embed_into_triangular(&report).unwrap();
        assert!(emb.brackets_ok && emb.triangular_ok && emb.witnesses_ok);
    }

    #[test]
    fn l2_fixture() {
        let l = algebra(&[
            d(2),
            d(1),
            d(0),
            d(0).scale(&xr(2)),
            d(0).scale(&xr(1)),
            d(0).scale(&xr(1).mul(&xr(2))),
        ]);
        let report = classify(&l).unwrap();
        assert_eq!(report.tag, NormalFormTag::L2(0, 1));
        assert_eq!(report.a.as_ref().unwrap(), &xr(2));
        assert_eq!(report.b.as_ref().unwrap(), &xr(1));
        let emb = embed_into_triangular(&report).unwrap();
        assert!(emb.brackets_ok && emb.triangular_ok && emb.witnesses_ok);
    }

    #[test]
    fn l2_with_mixed_generator() {
        // the extra generator (x2^2/2 + x3) d1 forces m = 2
        let half = BigRational::new(1.into(), 2.into());
        let c = xr(1).pow(2).scale(&half).add(&xr(2));
        let l = algebra(&[d(2), d(1), d(0), d(0).scale(&xr(1)), d(0).scale(&c)]);
        let report = classify(&l).unwrap();
        assert_eq!(report.tag, NormalFormTag::L2(0, 2));
        let emb = embed_into_triangular(&report).unwrap();
        assert!(emb.brackets_ok && emb.triangular_ok && emb.witnesses_ok);
    }

    #[test]
    fn negative_paths() {
        // not nilpotent
        let l = algebra(&[d(0), d(0).scale(&xr(0))]);
        assert!(matches!(classify(&l), Err(LieError::NotNilpotent)));
        // rank too high
        let p4 = |i| Derivation::partial(4, i);
        let l4 = k_linear_reduce(&[p4(0), p4(1), p4(2), p4(3)]).unwrap();
        assert!(matches!(
            classify(&l4),
            Err(LieError::RankTooHigh { rank: 4 })
        ));
        // empty algebra
        let l0 = k_linear_reduce(&[]).unwrap();
        assert!(matches!(classify(&l0), Err(LieError::EmptyAlgebra)));
    }

    #[test]
    fn chain_expansion_examples() {
        let a = xr(2);
        let half = BigRational::new(1.into(), 2.into());
        // b = x3^2/2 + 5 -> gamma = 5, beta0 = 0, beta1 = 1
        let b = xr(2)
            .pow(2)
            .scale(&half)
            .add(&RatFunc::constant(3, linalg::qint(5)));
        let out = express_via_chain(&b, &a, &d(0), &d(1), &d(2), 1).unwrap();
        assert_eq!(out.coeffs, vec![linalg::qint(5), linalg::qint(0), linalg::qint(1)]);
        // b = a -> gamma = 0, beta0 = 1
        let out = express_via_chain(&a, &a, &d(0), &d(1), &d(2), 0).unwrap();
        assert_eq!(out.coeffs, vec![linalg::qint(0), linalg::qint(1)]);
        // b = 7 -> gamma = 7
        let out = express_via_chain(
            &RatFunc::constant(3, linalg::qint(7)),
            &a,
            &d(0),
            &d(1),
            &d(2),
            0,
        )
        .unwrap();
        assert_eq!(out.coeffs, vec![linalg::qint(7), linalg::qint(0)]);
    }

    #[test]
    fn grid_expansion_examples() {
        let a = xr(2);
        let b = xr(1);
        // c = x2 x3 -> coefficient 1 at (1,1)
        let c = xr(1).mul(&xr(2));
        let out = express_via_grid(&c, &a, &b, &d(0), &d(1), &d(2), 1, 1).unwrap();
        assert_eq!(out.grid[1][1], linalg::qint(1));
        assert_eq!(out.grid[0][0], linalg::qint(0));
        // c = 1 -> coefficient 1 at (0,0)
        let one = RatFunc::one(3);
        let out = express_via_grid(&one, &a, &b, &d(0), &d(1), &d(2), 0, 0).unwrap();
        assert_eq!(out.grid[0][0], linalg::qint(1));
        // c = x2^2/2 + x2 x3 -> coefficients at (0,2) and (1,1)
        let half = BigRational::new(1.into(), 2.into());
        let c = xr(1).pow(2).scale(&half).add(&xr(1).mul(&xr(2)));
        let out = express_via_grid(&c, &a, &b, &d(0), &d(1), &d(2), 1, 2).unwrap();
        assert_eq!(out.grid[0][2], linalg::qint(1));
        assert_eq!(out.grid[1][1], linalg::qint(1));
        assert_eq!(out.grid[0][0], linalg::qint(0));
    }

    #[test]
    fn triangular_membership() {
        // x3 d1 + d2 -> true
        assert!(is_in_triangular(&d(0).scale(&xr(2)).add(&d(1))));
        // x1 d1 -> false
        assert!(!is_in_triangular(&d(0).scale(&xr(0))));
        // x3 d3 -> false
        assert!(!is_in_triangular(&d(2).scale(&xr(2))));
    }
}
