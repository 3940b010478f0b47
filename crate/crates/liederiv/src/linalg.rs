//! Exact linear algebra over the rationals and over the rational function
//! field, used for K-linear reduction, kernels, and rank computations.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::poly::MultiPoly;
use crate::ratfunc::RatFunc;

pub type QVec = Vec<BigRational>;
pub type QMat = Vec<QVec>;

pub fn qzero() -> BigRational {
    BigRational::zero()
}

pub fn qone() -> BigRational {
    BigRational::one()
}

pub fn qint(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

/// Reduced row echelon form in place; returns the pivot column of each
/// nonzero row.
pub fn rref(m: &mut QMat) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].clone().recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &m[r][j] * &f;
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

pub fn rank(m: &QMat) -> usize {
    let mut m = m.clone();
    rref(&mut m).len()
}

/// Basis of the right kernel {x : M x = 0}, in rref form with a deterministic
/// free-variable order.
pub fn kernel(m: &QMat, cols: usize) -> QMat {
    let mut mm = m.clone();
    let pivots = rref(&mut mm);
    let mut basis = Vec::new();
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![qzero(); cols];
        v[free] = qone();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -mm[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Solve M x = b exactly; `None` when inconsistent. M is given row-wise.
pub fn solve(m: &QMat, b: &QVec) -> Option<QVec> {
    let rows = m.len();
    if rows == 0 {
        return if b.iter().all(|v| v.is_zero()) {
            Some(vec![])
        } else {
            None
        };
    }
    let cols = m[0].len();
    let mut aug: QMat = m
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None; // pivot in the rhs column
    }
    let mut x = vec![qzero(); cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[row][cols].clone();
    }
    Some(x)
}

pub fn mat_mul(a: &QMat, b: &QMat) -> QMat {
    let n = a.len();
    let k = if n > 0 { a[0].len() } else { 0 };
    let m = if !b.is_empty() { b[0].len() } else { 0 };
    let mut out = vec![vec![qzero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                let t = &a[i][l] * &b[l][j];
                out[i][j] += t;
            }
        }
    }
    out
}

pub fn mat_vec(a: &QMat, x: &QVec) -> QVec {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(qzero(), |acc, (a, b)| acc + a * b)
        })
        .collect()
}

pub fn is_zero_mat(a: &QMat) -> bool {
    a.iter().all(|r| r.iter().all(|v| v.is_zero()))
}

/// Rank of a matrix of rational functions over the field R = K(x1..xn).
/// Each row is cleared of denominators (rank-preserving), then Bareiss
/// fraction-free elimination runs on the polynomial matrix.
pub fn ratfunc_rank(m: &[Vec<RatFunc>]) -> usize {
    if m.is_empty() {
        return 0;
    }
    let poly_rows: Vec<Vec<MultiPoly>> = m.iter().map(|row| clear_row_denominators(row)).collect();
    bareiss_rank(poly_rows)
}

/// Multiply a row by the lcm of its denominators, yielding polynomials.
pub fn clear_row_denominators(row: &[RatFunc]) -> Vec<MultiPoly> {
    let nvars = row[0].nvars();
    let mut lcm = MultiPoly::one(nvars);
    for r in row {
        if !r.den().is_constant() {
            lcm = crate::gcd::poly_lcm(&lcm, r.den()).expect("nonzero lcm inputs");
        }
    }
    row.iter()
        .map(|r| r.num().mul(&lcm.div_exact(r.den())))
        .collect()
}

/// Fraction-free Gaussian elimination (Bareiss) on a polynomial matrix.
fn bareiss_rank(mut m: Vec<Vec<MultiPoly>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let nvars = m[0][0].nvars;
    let mut prev = MultiPoly::one(nvars);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in (r + 1)..rows {
            for j in (c + 1)..cols {
                let num = m[r][c].mul(&m[i][j]).sub(&m[i][c].mul(&m[r][j]));
                m[i][j] = num.div_exact(&prev);
            }
            m[i][c] = MultiPoly::zero(nvars);
        }
        prev = m[r][c].clone();
        r += 1;
    }
    r
}

/// Determinant of a square matrix of rational functions by Laplace
/// expansion. Intended for small matrices (minor computations and test
/// oracles).
pub fn ratfunc_det(m: &[Vec<RatFunc>]) -> RatFunc {
    let n = m.len();
    let nvars = m[0][0].nvars();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut det = RatFunc::zero(nvars);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<RatFunc>> = (1..n)
            .map(|i| {
                (0..n)
                    .filter(|&k| k != j)
                    .map(|k| m[i][k].clone())
                    .collect()
            })
            .collect();
        let term = m[0][j].mul(&ratfunc_det(&minor));
        det = if j % 2 == 0 { det.add(&term) } else { det.sub(&term) };
    }
    det
}

/// Solve M x = b over the rational function field by Gaussian elimination.
/// `None` when inconsistent.
pub fn ratfunc_solve(m: &[Vec<RatFunc>], b: &[RatFunc]) -> Option<Vec<RatFunc>> {
    let rows = m.len();
    if rows == 0 {
        return Some(vec![]);
    }
    let cols = m[0].len();
    let nvars = m[0][0].nvars();
    let mut aug: Vec<Vec<RatFunc>> = m
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.to_vec();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !aug[i][c].is_zero()) else {
            continue;
        };
        aug.swap(r, p);
        let inv = aug[r][c].recip().expect("nonzero pivot");
        for v in aug[r].iter_mut() {
            *v = v.mul(&inv);
        }
        for i in 0..rows {
            if i != r && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                for j in 0..=cols {
                    let t = aug[r][j].mul(&f);
                    aug[i][j] = aug[i][j].sub(&t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    // inconsistent if any remaining row is (0,...,0 | nonzero)
    for row in aug.iter().skip(r) {
        if !row[cols].is_zero() {
            return None;
        }
    }
    let mut x = vec![RatFunc::zero(nvars); cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[row][cols].clone();
    }
    Some(x)
}

/// Jordan chains of a nilpotent matrix N over Q: a list of chains
/// (head, N head, ..., N^{k-1} head), longest first, heads chosen
/// deterministically from the rref kernel bases (lowest pivot first).
/// Returns `None` if N is not nilpotent.
pub fn nilpotent_jordan_chains(n: &QMat) -> Option<Vec<Vec<QVec>>> {
    let dim = n.len();
    if dim == 0 {
        return Some(vec![]);
    }
    // nilpotency index
    let mut powers = vec![identity(dim)];
    let mut p = 0;
    while p <= dim {
        let next = mat_mul(n, powers.last().unwrap());
        powers.push(next);
        p += 1;
        if is_zero_mat(powers.last().unwrap()) {
            break;
        }
    }
    if !is_zero_mat(powers.last().unwrap()) {
        return None;
    }
    let index = p; // N^index = 0, N^(index-1) != 0

    // kernels of N^j
    let mut kernels: Vec<QMat> = Vec::with_capacity(index + 1);
    for j in 0..=index {
        kernels.push(kernel(&powers[j], dim));
    }

    // heads[k] = heads of chains of length k
    let mut chains: Vec<Vec<QVec>> = Vec::new();
    for k in (1..=index).rev() {
        // everything already forced inside Ker N^k: Ker N^{k-1} plus the
        // tail segments of longer chains (chain[i] lies in Ker N^{len-i},
        // so the member of Ker N^k is chain[len - k])
        let mut occupied: QMat = kernels[k - 1].clone();
        for chain in &chains {
            let len = chain.len();
            if len > k {
                occupied.push(chain[len - k].clone());
            }
        }
        for cand in &kernels[k] {
            if !in_span(&occupied, cand) {
                // new chain of length k with this head
                let mut chain = vec![cand.clone()];
                for _ in 1..k {
                    let next = mat_vec(n, chain.last().unwrap());
                    chain.push(next);
                }
                occupied.push(cand.clone());
                chains.push(chain);
            }
        }
    }
    chains.sort_by(|a, b| b.len().cmp(&a.len()));
    debug_assert_eq!(chains.iter().map(|c| c.len()).sum::<usize>(), dim);
    Some(chains)
}

pub fn identity(n: usize) -> QMat {
    (0..n)
        .map(|i| {
            let mut row = vec![qzero(); n];
            row[i] = qone();
            row
        })
        .collect()
}

pub fn in_span(basis: &QMat, v: &QVec) -> bool {
    if basis.is_empty() {
        return v.iter().all(|x| x.is_zero());
    }
    let cols = basis.len();
    // solve basis^T c = v
    let rows = v.len();
    let m: QMat = (0..rows)
        .map(|i| (0..cols).map(|j| basis[j][i].clone()).collect())
        .collect();
    solve(&m, v).is_some()
}
