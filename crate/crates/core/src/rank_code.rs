//! F_q-linear rank-metric codes given by a basis of `m x n` matrices, the
//! orbit codes of the cyclic and Abelian orthogonal groups, and Gabidulin
//! component codes.

use std::collections::HashSet;
use std::sync::OnceLock;

use num_bigint::BigUint;
use serde::Serialize;

use crate::enumerate::{span_rank, weight_stats, Layout, WeightStats, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::matrix::Matrix;
use crate::ortho::{companion_for, g1_pipeline, g2_pipeline, OrthoGroup};

#[derive(Debug)]
pub struct RankCode {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    basis: Vec<Matrix>,
    stats: OnceLock<WeightStats>,
}

impl Clone for RankCode {
    fn clone(&self) -> Self {
        let stats = OnceLock::new();
        if let Some(s) = self.stats.get() {
            let _ = stats.set(s.clone());
        }
        RankCode { field: self.field.clone(), rows: self.rows, cols: self.cols, basis: self.basis.clone(), stats }
    }
}

/// Summary used by reports and the invariance check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodeParams {
    pub rows: usize,
    pub cols: usize,
    pub dim: usize,
    pub cardinality: String,
    pub min_distance: usize,
    pub singleton_bound: String,
    pub is_mrd: bool,
}

impl RankCode {
    /// Code spanned by an independent basis.
    pub fn new(field: &FieldSpec, rows: usize, cols: usize, basis: Vec<Matrix>) -> Result<Self> {
        for b in &basis {
            if !b.field().same(field) {
                return Err(Error::FieldMismatch);
            }
            if (b.rows(), b.cols()) != (rows, cols) {
                return Err(Error::ShapeMismatch(format!(
                    "basis matrix {}x{} in a {rows}x{cols} code",
                    b.rows(),
                    b.cols()
                )));
            }
        }
        let flat: Vec<Vec<u32>> = basis.iter().map(|m| m.data().to_vec()).collect();
        if span_rank(field, &flat) != basis.len() {
            return Err(Error::InvalidDimension("basis matrices are linearly dependent".into()));
        }
        Ok(RankCode { field: field.clone(), rows, cols, basis, stats: OnceLock::new() })
    }

    /// Code spanned by `generators`; the basis keeps the first generators
    /// that are independent of the earlier ones, in the given order.
    pub fn from_spanning(field: &FieldSpec, rows: usize, cols: usize, generators: &[Matrix]) -> Result<Self> {
        let mut basis: Vec<Matrix> = Vec::new();
        let mut flat: Vec<Vec<u32>> = Vec::new();
        for g in generators {
            if (g.rows(), g.cols()) != (rows, cols) {
                return Err(Error::ShapeMismatch(format!("generator {}x{}", g.rows(), g.cols())));
            }
            flat.push(g.data().to_vec());
            if span_rank(field, &flat) > basis.len() {
                basis.push(g.clone());
            } else {
                flat.pop();
            }
        }
        RankCode::new(field, rows, cols, basis)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn cardinality(&self) -> BigUint {
        BigUint::from(self.field.order()).pow(self.dim() as u32)
    }

    pub fn flat_basis(&self) -> Vec<Vec<u32>> {
        self.basis.iter().map(|m| m.data().to_vec()).collect()
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        if (m.rows(), m.cols()) != (self.rows, self.cols) {
            return false;
        }
        let mut flat = self.flat_basis();
        flat.push(m.data().to_vec());
        span_rank(&self.field, &flat) == self.dim()
    }

    /// `sum c_i B_i`.
    pub fn combine(&self, coeffs: &[u32]) -> Matrix {
        let data = crate::enumerate::combine(&self.field, &self.flat_basis(), coeffs);
        Matrix::new(&self.field, self.rows, self.cols, data).expect("shape preserved")
    }

    /// Exhaustive weight statistics (cached after the first full scan).
    pub fn weight_stats(&self, budget: u64) -> Result<&WeightStats> {
        if let Some(s) = self.stats.get() {
            return Ok(s);
        }
        let s = weight_stats(&self.field, &self.flat_basis(), &Layout::single(self.rows, self.cols), budget)?;
        Ok(self.stats.get_or_init(|| s))
    }

    pub fn min_rank_distance(&self, budget: u64) -> Result<usize> {
        Ok(self.weight_stats(budget)?.min_weight)
    }

    pub fn cached_distance(&self) -> Option<usize> {
        self.stats.get().map(|s| s.min_weight)
    }

    pub fn is_mrd(&self, budget: u64) -> Result<bool> {
        let d = self.min_rank_distance(budget)?;
        Ok(self.cardinality() == singleton_rank_bound(self.rows, self.cols, d, self.field.order())?)
    }

    pub fn params(&self, budget: u64) -> Result<CodeParams> {
        let d = self.min_rank_distance(budget)?;
        let bound = singleton_rank_bound(self.rows, self.cols, d, self.field.order())?;
        Ok(CodeParams {
            rows: self.rows,
            cols: self.cols,
            dim: self.dim(),
            cardinality: self.cardinality().to_string(),
            min_distance: d,
            singleton_bound: bound.to_string(),
            is_mrd: bound == self.cardinality(),
        })
    }
}

/// `q^{max(m,n) (min(m,n) - d + 1)}`.
pub fn singleton_rank_bound(m: usize, n: usize, d: usize, q: u32) -> Result<BigUint> {
    let lo = m.min(n);
    if d == 0 || d > lo {
        return Err(Error::InvalidDistance { d, rows: m, cols: n });
    }
    Ok(BigUint::from(q).pow((m.max(n) * (lo - d + 1)) as u32))
}

/// An orbit code `W G ∪ {0}` together with its orbit data.
#[derive(Debug, Clone)]
pub struct OrbitCode {
    pub code: RankCode,
    pub orbit_size: u64,
    pub stabilizer_size: u64,
}

pub fn code_from_orbit(w: &Matrix, g: &OrthoGroup) -> Result<OrbitCode> {
    if w.cols() != g.degree() {
        return Err(Error::DimensionMismatch(format!(
            "generator has {} columns, group degree {}",
            w.cols(),
            g.degree()
        )));
    }
    if w.rank() != w.rows() {
        return Err(Error::PreconditionViolation("orbit generator must have full row rank".into()));
    }
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut orbit: Vec<Matrix> = Vec::new();
    for e in g.elements()? {
        let x = w.mul(e)?;
        if seen.insert(x.data().to_vec()) {
            orbit.push(x);
        }
    }
    let code = RankCode::from_spanning(w.field(), w.rows(), w.cols(), &orbit)?;
    // orbit ∪ {0} is a subspace iff it fills its own span
    if BigUint::from(orbit.len() as u64 + 1) != code.cardinality() {
        return Err(Error::OrbitNotLinear);
    }
    let orbit_size = orbit.len() as u64;
    Ok(OrbitCode { code, orbit_size, stabilizer_size: g.order / orbit_size })
}

/// Sum of two codes and whether it is direct.
pub fn code_sum(c: &RankCode, d: &RankCode) -> Result<(RankCode, bool)> {
    if (c.rows, c.cols) != (d.rows, d.cols) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} + {}x{}",
            c.rows, c.cols, d.rows, d.cols
        )));
    }
    if !c.field.same(&d.field) {
        return Err(Error::FieldMismatch);
    }
    let gens: Vec<Matrix> = c.basis.iter().chain(&d.basis).cloned().collect();
    let sum = RankCode::from_spanning(&c.field, c.rows, c.cols, &gens)?;
    let direct = sum.dim() == c.dim() + d.dim();
    Ok((sum, direct))
}

/// Generator `(0 .. I_n .. 0)` with the identity in block `slot` of
/// `blocks` n-column blocks, followed by `pad` zero columns.
pub fn slot_generator(field: &FieldSpec, n: usize, blocks: usize, slot: usize, pad: usize) -> Matrix {
    let mut m = Matrix::zeros(field, n, blocks * n + pad);
    for i in 0..n {
        m = m.with_entry(i, slot * n + i, 1);
    }
    m
}

/// The codes `C_1`, `C_11` and `C^(1) = C_1 + C_11`.
#[derive(Debug)]
pub struct C1Family {
    pub group: OrthoGroup,
    pub c1: OrbitCode,
    pub c11: OrbitCode,
    pub code: RankCode,
    pub direct: bool,
}

/// `delta` in `0..=2` selects the `n x (2n + delta)` variant.
pub fn construct_c1_family(field: &FieldSpec, n: usize, delta: usize, f_index: usize) -> Result<C1Family> {
    let group = g1_pipeline(field, n, delta, f_index)?;
    let w1 = slot_generator(field, n, 2, 0, delta);
    let w11 = slot_generator(field, n, 2, 1, delta);
    let c1 = code_from_orbit(&w1, &group)?;
    let c11 = code_from_orbit(&w11, &group)?;
    let (code, direct) = code_sum(&c1.code, &c11.code)?;
    Ok(C1Family { group, c1, c11, code, direct })
}

/// The four orbit codes of `G2`, `D^(1)`, `D^(2)` and `C^(2) = D^(1) + D^(2)`.
#[derive(Debug)]
pub struct C2Family {
    pub group: OrthoGroup,
    pub d1: OrbitCode,
    pub d11: OrbitCode,
    pub d1p: OrbitCode,
    pub d11p: OrbitCode,
    pub dsum1: RankCode,
    pub dsum2: RankCode,
    pub code: RankCode,
    pub direct: bool,
}

pub fn construct_c2_family(
    field: &FieldSpec,
    n: usize,
    delta: usize,
    f_index: usize,
    g_index: usize,
    allow_identical: bool,
) -> Result<C2Family> {
    let group = g2_pipeline(field, n, delta, f_index, g_index, allow_identical)?;
    let v = |slot| slot_generator(field, n, 4, slot, delta);
    let d1 = code_from_orbit(&v(0), &group)?;
    let d11 = code_from_orbit(&v(2), &group)?;
    let d1p = code_from_orbit(&v(1), &group)?;
    let d11p = code_from_orbit(&v(3), &group)?;
    let (dsum1, _) = code_sum(&d1.code, &d11.code)?;
    let (dsum2, _) = code_sum(&d1p.code, &d11p.code)?;
    let (code, direct) = code_sum(&dsum1, &dsum2)?;
    Ok(C2Family { group, d1, d11, d1p, d11p, dsum1, dsum2, code, direct })
}

/// Multiplication by the canonical primitive root of `F_{q^m}` acting on
/// coordinate columns: the companion matrix of the canonical modulus.
pub fn extension_multiplier(field: &FieldSpec, m: usize) -> Result<Matrix> {
    let (_, a) = companion_for(field, m, 0)?;
    Ok(a)
}

/// The F_q-basis `alpha^s * b_r` (r outer, s inner) of the F_{q^m}-span of
/// `generators`, where alpha acts by left multiplication with the canonical
/// multiplier. Returns `None` unless all of these lie in `code` and are
/// independent, i.e. unless `code` is F_{q^m}-linear with the given
/// generators as an F_{q^m}-basis.
pub fn adapted_basis(code: &RankCode, generators: &[Matrix]) -> Result<Option<Vec<Matrix>>> {
    let m = code.rows;
    let mult = extension_multiplier(&code.field, m)?;
    let mut out = Vec::with_capacity(generators.len() * m);
    for g in generators {
        let mut x = g.clone();
        for _ in 0..m {
            if !code.contains(&x) {
                return Ok(None);
            }
            out.push(x.clone());
            x = mult.mul(&x)?;
        }
    }
    let flat: Vec<Vec<u32>> = out.iter().map(|x| x.data().to_vec()).collect();
    if span_rank(&code.field, &flat) != out.len() || out.len() != code.dim() {
        return Ok(None);
    }
    Ok(Some(out))
}

/// `C^(1)` with its basis reordered as `alpha^s (I|0)`, `alpha^s (0|I)` when
/// that is possible, otherwise in orbit order `(A_g^s | 0)`, `(0 | tA_g^-s)`.
pub fn c1_ordered_basis(fam: &C1Family, n: usize, delta: usize) -> Result<Vec<Matrix>> {
    let field = fam.code.field();
    let gens = [slot_generator(field, n, 2, 0, delta), slot_generator(field, n, 2, 1, delta)];
    if let Some(b) = adapted_basis(&fam.code, &gens)? {
        return Ok(b);
    }
    orbit_ordered_basis(&fam.group, &gens, n)
}

/// `C^(2)` basis, adapted when possible, otherwise in orbit order.
pub fn c2_ordered_basis(fam: &C2Family, n: usize, delta: usize) -> Result<Vec<Matrix>> {
    let field = fam.code.field();
    let gens: Vec<Matrix> = [0, 2, 1, 3].iter().map(|&s| slot_generator(field, n, 4, s, delta)).collect();
    if let Some(b) = adapted_basis(&fam.code, &gens)? {
        return Ok(b);
    }
    orbit_ordered_basis(&fam.group, &gens, n)
}

fn orbit_ordered_basis(group: &OrthoGroup, gens: &[Matrix], n: usize) -> Result<Vec<Matrix>> {
    let mut out = Vec::new();
    for w in gens {
        // W times the generator powers g^0 .. g^(n-1) for whichever generator moves W
        let mover = group
            .generators
            .iter()
            .find(|g| w.mul(g).map(|x| x != *w).unwrap_or(false))
            .unwrap_or(&group.generators[0]);
        let mut x = w.clone();
        for _ in 0..n {
            out.push(x.clone());
            x = x.mul(mover)?;
        }
    }
    Ok(out)
}

/// The Gabidulin code of F_q-dimension `n k`: evaluations of
/// `sum_{i<k} a_i x^{q^i}` at `1, alpha, ..., alpha^{n-1}`, columns expanded
/// in the power basis. Basis order: `alpha^s x^{q^r}`, r outer, s inner.
pub fn gabidulin_code(field: &FieldSpec, n: usize, k: usize) -> Result<RankCode> {
    if k == 0 || k > n {
        return Err(Error::InvalidDimension(format!("Gabidulin dimension {k} not in 1..={n}")));
    }
    let ext = field.extension(n, None)?;
    let q = field.order() as i64;
    let alpha = ext.generator_root();
    let points: Vec<u32> = (0..n).map(|j| ext.pow(alpha, j as i64).expect("nonzero")).collect();
    let mut basis = Vec::with_capacity(n * k);
    for r in 0..k {
        let frob = q.pow(r as u32);
        for s in 0..n {
            let a = ext.pow(alpha, s as i64)?;
            let mut m = Matrix::zeros(field, n, n);
            for (j, &g) in points.iter().enumerate() {
                let v = ext.mul(a, ext.pow(g, frob)?);
                for (u, c) in ext.base_coords(v).into_iter().enumerate() {
                    m = m.with_entry(u, j, c);
                }
            }
            basis.push(m);
        }
    }
    RankCode::new(field, n, n, basis)
}

/// Parameters of `C^(1)` for primitive-polynomial indices 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvarianceReport {
    pub q: u32,
    pub n: usize,
    pub first: CodeParams,
    pub second: CodeParams,
    pub invariant: bool,
}

pub fn choice_invariance_check(field: &FieldSpec, n: usize, budget: u64) -> Result<InvarianceReport> {
    let a = construct_c1_family(field, n, 0, 0)?.code.params(budget)?;
    let b = construct_c1_family(field, n, 0, 1)?.code.params(budget)?;
    Ok(InvarianceReport { q: field.order(), n, invariant: a == b, first: a, second: b })
}

/// Convenience: `C^(1)` parameters at the default budget.
pub fn c1_params(field: &FieldSpec, n: usize, delta: usize, f_index: usize) -> Result<CodeParams> {
    construct_c1_family(field, n, delta, f_index)?.code.params(DEFAULT_BUDGET)
}
