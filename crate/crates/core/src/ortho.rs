//! Nonsingular symmetric forms, orthogonality `T S tT = S`, and the two
//! groups built from companion matrices: the cyclic `G1 = <A1>` and the
//! Abelian product `G2 = <diag(A1, I), diag(I, B1)>`.

use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{find_primitive_poly, nonsquare_z, FieldSpec, Polynomial};
use crate::matrix::{companion_matrix, matrix_order, Matrix};

/// Groups larger than this are never materialized.
pub const ELEMENT_GATE: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FormKind {
    /// `[[0, I], [I, 0]]`
    S2v,
    /// hyperbolic part plus trailing `1`
    S2v1One,
    /// hyperbolic part plus trailing `z`
    S2v1Z,
    /// hyperbolic part plus trailing `diag(1, -z)`
    S2v2,
}

impl FormKind {
    /// Number of rows/cols beyond the hyperbolic part.
    pub fn delta(self) -> usize {
        match self {
            FormKind::S2v => 0,
            FormKind::S2v1One | FormKind::S2v1Z => 1,
            FormKind::S2v2 => 2,
        }
    }

    pub fn for_delta(delta: usize) -> Result<Self> {
        match delta {
            0 => Ok(FormKind::S2v),
            1 => Ok(FormKind::S2v1One),
            2 => Ok(FormKind::S2v2),
            _ => Err(Error::InvalidDimension(format!("padding {delta} not in 0..=2"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BilinearForm {
    pub matrix: Matrix,
    pub kind: FormKind,
    /// Index of each hyperbolic block.
    pub nu: usize,
    /// Number of `[[0, I_nu], [I_nu, 0]]` blocks on the diagonal (1 for the
    /// standard layout).
    pub hyperbolic_blocks: usize,
    pub z: Option<u32>,
}

impl BilinearForm {
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }
}

fn hyperbolic(field: &FieldSpec, nu: usize) -> Matrix {
    let mut m = Matrix::zeros(field, 2 * nu, 2 * nu);
    for i in 0..nu {
        m = m.with_entry(i, nu + i, 1).with_entry(nu + i, i, 1);
    }
    m
}

fn definite_tail(field: &FieldSpec, kind: FormKind) -> (Option<Matrix>, Option<u32>) {
    let z = nonsquare_z(field).value();
    match kind {
        FormKind::S2v => (None, None),
        FormKind::S2v1One => (Some(Matrix::identity(field, 1)), None),
        FormKind::S2v1Z => (Some(Matrix::identity(field, 1).scale(z)), Some(z)),
        FormKind::S2v2 => {
            let t = Matrix::identity(field, 2).with_entry(1, 1, field.neg(z));
            (Some(t), Some(z))
        }
    }
}

/// The standard form of the given kind and index `nu`.
pub fn form_matrix(kind: FormKind, nu: usize, field: &FieldSpec) -> Result<BilinearForm> {
    form_matrix_split(kind, nu, 1, field)
}

/// `diag(S_2nu, ..., S_2nu, tail)` with `blocks` hyperbolic blocks.
pub fn form_matrix_split(
    kind: FormKind,
    nu: usize,
    blocks: usize,
    field: &FieldSpec,
) -> Result<BilinearForm> {
    if nu == 0 || blocks == 0 {
        return Err(Error::InvalidDimension("form index must be at least 1".into()));
    }
    let h = hyperbolic(field, nu);
    let mut m = h.clone();
    for _ in 1..blocks {
        m = m.block_diag(&h)?;
    }
    let (tail, z) = definite_tail(field, kind);
    if let Some(t) = tail {
        m = m.block_diag(&t)?;
    }
    Ok(BilinearForm { matrix: m, kind, nu, hyperbolic_blocks: blocks, z })
}

pub fn is_orthogonal(t: &Matrix, form: &BilinearForm) -> Result<bool> {
    let s = &form.matrix;
    if !t.is_square() || t.rows() != s.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix against a form of size {}",
            t.rows(),
            t.cols(),
            s.rows()
        )));
    }
    Ok(t.mul(s)?.mul(&t.transpose())? == *s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AVariant {
    A1,
    A2,
    A3,
}

impl AVariant {
    pub fn delta(self) -> usize {
        match self {
            AVariant::A1 => 0,
            AVariant::A2 => 1,
            AVariant::A3 => 2,
        }
    }

    pub fn for_delta(delta: usize) -> Result<Self> {
        match delta {
            0 => Ok(AVariant::A1),
            1 => Ok(AVariant::A2),
            2 => Ok(AVariant::A3),
            _ => Err(Error::InvalidDimension(format!("padding {delta} not in 0..=2"))),
        }
    }
}

/// `diag(A_g, tA_g^-1)`, followed by one (A2) or two (A3) trailing ones.
pub fn build_a_matrix(a_g: &Matrix, variant: AVariant) -> Result<Matrix> {
    let inv_t = a_g.transpose().inverse()?;
    let a1 = a_g.block_diag(&inv_t)?;
    match variant.delta() {
        0 => Ok(a1),
        d => a1.block_diag(&Matrix::identity(a_g.field(), d)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GroupKind {
    Cyclic,
    AbelianProduct,
}

/// A finite Abelian group generated by commuting matrices whose generated
/// subgroups intersect trivially, so every element is `g_1^e_1 ... g_r^e_r`
/// with `0 <= e_i < ord(g_i)`.
#[derive(Debug)]
pub struct OrthoGroup {
    pub kind: GroupKind,
    pub generators: Vec<Matrix>,
    pub generator_orders: Vec<u64>,
    pub form: BilinearForm,
    pub order: u64,
    elements: OnceLock<Vec<Matrix>>,
}

impl OrthoGroup {
    fn new(kind: GroupKind, generators: Vec<Matrix>, form: BilinearForm) -> Result<Self> {
        for g in &generators {
            if !is_orthogonal(g, &form)? {
                return Err(Error::NotOrthogonal);
            }
        }
        let generator_orders = generators.iter().map(matrix_order).collect::<Result<Vec<_>>>()?;
        let order = generator_orders.iter().product();
        Ok(OrthoGroup { kind, generators, generator_orders, form, order, elements: OnceLock::new() })
    }

    pub fn degree(&self) -> usize {
        self.form.size()
    }

    pub fn field(&self) -> &FieldSpec {
        self.form.matrix.field()
    }

    /// The element with exponent vector `exps`.
    pub fn element(&self, exps: &[u64]) -> Result<Matrix> {
        if exps.len() != self.generators.len() {
            return Err(Error::DimensionMismatch("exponent vector length".into()));
        }
        let mut acc = Matrix::identity(self.field(), self.degree());
        for (g, &e) in self.generators.iter().zip(exps) {
            acc = acc.mul(&g.pow(e as i64)?)?;
        }
        Ok(acc)
    }

    /// Exponent vectors in enumeration order (last generator fastest).
    pub fn exponent_vectors(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for &o in &self.generator_orders {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..o).map(move |e| {
                        let mut w = v.clone();
                        w.push(e);
                        w
                    })
                })
                .collect();
        }
        out
    }

    /// All elements, memoized after the first call.
    pub fn elements(&self) -> Result<&[Matrix]> {
        if self.order > ELEMENT_GATE {
            return Err(Error::EnumerationBudgetExceeded {
                needed: self.order.to_string(),
                budget: ELEMENT_GATE,
            });
        }
        Ok(self.elements.get_or_init(|| {
            // powers of each generator, then all products
            let powers: Vec<Vec<Matrix>> = self
                .generators
                .iter()
                .zip(&self.generator_orders)
                .map(|(g, &o)| {
                    let mut v = Vec::with_capacity(o as usize);
                    let mut p = Matrix::identity(self.field(), self.degree());
                    for _ in 0..o {
                        v.push(p.clone());
                        p = p.mul(g).expect("square generator");
                    }
                    v
                })
                .collect();
            let mut out = vec![Matrix::identity(self.field(), self.degree())];
            for pw in &powers {
                out = out
                    .iter()
                    .flat_map(|a| pw.iter().map(move |b| a.mul(b).expect("same size")))
                    .collect();
            }
            out
        }))
    }

    /// Number of pairwise distinct enumerated elements.
    pub fn distinct_count(&self) -> Result<usize> {
        let set: HashSet<&[u32]> = self.elements()?.iter().map(|m| m.data()).collect();
        Ok(set.len())
    }

    pub fn all_orthogonal(&self) -> Result<bool> {
        for e in self.elements()? {
            if !is_orthogonal(e, &self.form)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Histogram of element orders, computed from the matrices themselves.
    pub fn element_order_histogram(&self) -> Result<BTreeMap<u64, u64>> {
        let mut h = BTreeMap::new();
        for e in self.elements()? {
            *h.entry(matrix_order(e)?).or_insert(0) += 1;
        }
        Ok(h)
    }

    /// For a non-cyclic group: the maximum element order, which must be below
    /// the group order. `None` when some element generates the whole group.
    pub fn non_cyclic_witness(&self) -> Result<Option<u64>> {
        let max = self.element_order_histogram()?.keys().copied().max().unwrap_or(1);
        Ok((max < self.order).then_some(max))
    }

    /// Closure spot check: products and inverses of all pairs (up to `limit`
    /// pairs) stay orthogonal and inside the group; generators commute.
    pub fn group_axioms_check(&self, limit: usize) -> Result<bool> {
        let els = self.elements()?;
        let set: HashSet<&[u32]> = els.iter().map(|m| m.data()).collect();
        let mut checked = 0;
        for a in els {
            let inv = a.inverse()?;
            if !set.contains(inv.data()) || !is_orthogonal(&inv, &self.form)? {
                return Ok(false);
            }
            for b in els {
                if checked >= limit {
                    break;
                }
                let p = a.mul(b)?;
                if !set.contains(p.data()) || p != b.mul(a)? {
                    return Ok(false);
                }
                checked += 1;
            }
        }
        Ok(true)
    }
}

/// `G1 = <A1>`; `A1` must be orthogonal for `form`.
pub fn build_g1(a1: &Matrix, form: &BilinearForm) -> Result<OrthoGroup> {
    OrthoGroup::new(GroupKind::Cyclic, vec![a1.clone()], form.clone())
}

/// `G2 = {diag(A1^i, B1^j, I_delta)}` where `delta = size(form) - 4n`.
pub fn build_g2(
    a1: &Matrix,
    b1: &Matrix,
    form: &BilinearForm,
    allow_identical: bool,
) -> Result<OrthoGroup> {
    if a1 == b1 && !allow_identical {
        return Err(Error::IdenticalGenerators);
    }
    let (na, nb) = (a1.rows(), b1.rows());
    let size = form.size();
    if na + nb > size {
        return Err(Error::DimensionMismatch(format!(
            "blocks of size {na}+{nb} exceed form size {size}"
        )));
    }
    let field = a1.field();
    let tail = size - na - nb;
    let pad = |m: Matrix| -> Result<Matrix> {
        if tail == 0 {
            Ok(m)
        } else {
            m.block_diag(&Matrix::identity(field, tail))
        }
    };
    let ga = pad(a1.block_diag(&Matrix::identity(field, nb))?)?;
    let gb = pad(Matrix::identity(field, na).block_diag(b1)?)?;
    OrthoGroup::new(GroupKind::AbelianProduct, vec![ga, gb], form.clone())
}

/// Companion matrix of the `index`-th primitive polynomial of degree `n`.
pub fn companion_for(field: &FieldSpec, n: usize, index: usize) -> Result<(Polynomial, Matrix)> {
    let f = find_primitive_poly(field, n, index)?;
    let a = companion_matrix(&f)?;
    Ok((f, a))
}

/// `G1` over `F_q` for degree `n` and padding `delta`, with its form.
pub fn g1_pipeline(field: &FieldSpec, n: usize, delta: usize, f_index: usize) -> Result<OrthoGroup> {
    let (_, a_g) = companion_for(field, n, f_index)?;
    let a = build_a_matrix(&a_g, AVariant::for_delta(delta)?)?;
    let form = form_matrix(FormKind::for_delta(delta)?, n, field)?;
    build_g1(&a, &form)
}

/// `G2` over `F_q` against `diag(S_2n, S_2n, tail)`.
pub fn g2_pipeline(
    field: &FieldSpec,
    n: usize,
    delta: usize,
    f_index: usize,
    g_index: usize,
    allow_identical: bool,
) -> Result<OrthoGroup> {
    if f_index == g_index && !allow_identical {
        return Err(Error::IdenticalGenerators);
    }
    let (_, a_g) = companion_for(field, n, f_index)?;
    let (_, b_g) = companion_for(field, n, g_index)?;
    let a1 = build_a_matrix(&a_g, AVariant::A1)?;
    let b1 = build_a_matrix(&b_g, AVariant::A1)?;
    let form = form_matrix_split(FormKind::for_delta(delta)?, n, 2, field)?;
    build_g2(&a1, &b1, &form, allow_identical)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> FieldSpec {
        FieldSpec::prime(3).unwrap()
    }

    #[test]
    fn form_examples() {
        let f = f3();
        let s4 = form_matrix(FormKind::S2v, 2, &f).unwrap();
        let expect = Matrix::from_rows(
            &f,
            &[vec![0, 0, 1, 0], vec![0, 0, 0, 1], vec![1, 0, 0, 0], vec![0, 1, 0, 0]],
        )
        .unwrap();
        assert_eq!(s4.matrix, expect);
        let s3 = form_matrix(FormKind::S2v1One, 1, &f).unwrap();
        assert_eq!(s3.matrix.get(2, 2), 1);
        assert_eq!(s3.matrix.rows(), 3);
        let s2 = form_matrix(FormKind::S2v2, 1, &f).unwrap();
        assert_eq!(s2.z, Some(2));
        assert_eq!((s2.matrix.get(2, 2), s2.matrix.get(3, 3)), (1, 1));
        let sz = form_matrix(FormKind::S2v1Z, 2, &FieldSpec::prime(7).unwrap()).unwrap();
        assert_eq!(sz.matrix.get(4, 4), 3);
        for form in [s4, s3, s2, sz] {
            assert!(form.matrix.is_symmetric());
            assert_eq!(form.matrix.rank(), form.size());
        }
    }

    #[test]
    fn orthogonality_examples() {
        let f = f3();
        let s4 = form_matrix(FormKind::S2v, 2, &f).unwrap();
        assert!(is_orthogonal(&Matrix::identity(&f, 4), &s4).unwrap());
        let (_, a_g) = companion_for(&f, 2, 0).unwrap();
        let a1 = build_a_matrix(&a_g, AVariant::A1).unwrap();
        assert!(is_orthogonal(&a1, &s4).unwrap());
        let bumped = a1.with_entry(0, 0, f.add(a1.get(0, 0), 1));
        assert!(!is_orthogonal(&bumped, &s4).unwrap());
        assert!(matches!(
            is_orthogonal(&Matrix::identity(&f, 3), &s4),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn a_variants_orthogonal_with_same_order() {
        for q in [3u32, 5, 7] {
            let f = FieldSpec::prime(q).unwrap();
            for n in 1..=3usize {
                let (_, a_g) = companion_for(&f, n, 0).unwrap();
                for delta in 0..=2 {
                    let a = build_a_matrix(&a_g, AVariant::for_delta(delta).unwrap()).unwrap();
                    assert_eq!(a.rows(), 2 * n + delta);
                    let form = form_matrix(FormKind::for_delta(delta).unwrap(), n, &f).unwrap();
                    assert!(is_orthogonal(&a, &form).unwrap(), "q={q} n={n} delta={delta}");
                    assert_eq!(matrix_order(&a).unwrap(), (q as u64).pow(n as u32) - 1);
                }
            }
        }
        let (_, a_g) = companion_for(&f3(), 1, 0).unwrap();
        let a3 = build_a_matrix(&a_g, AVariant::A3).unwrap();
        assert_eq!(a3.rows(), 4);
        assert_eq!(matrix_order(&a3).unwrap(), 2);
    }

    #[test]
    fn g1_orders() {
        for (q, n, order) in [(3u32, 2usize, 8u64), (5, 1, 4), (3, 3, 26)] {
            let g = g1_pipeline(&FieldSpec::prime(q).unwrap(), n, 0, 0).unwrap();
            assert_eq!(g.order, order);
            assert_eq!(g.distinct_count().unwrap() as u64, order);
            assert!(g.all_orthogonal().unwrap());
            assert!(g.group_axioms_check(usize::MAX).unwrap());
            assert_eq!(g.non_cyclic_witness().unwrap(), None);
        }
    }

    #[test]
    fn g1_rejects_non_orthogonal() {
        let f = f3();
        let (_, a_g) = companion_for(&f, 2, 0).unwrap();
        let bad = a_g.block_diag(&a_g).unwrap();
        let s4 = form_matrix(FormKind::S2v, 2, &f).unwrap();
        assert_eq!(build_g1(&bad, &s4).unwrap_err(), Error::NotOrthogonal);
    }

    #[test]
    fn g2_q3_n2() {
        let g = g2_pipeline(&f3(), 2, 0, 0, 1, false).unwrap();
        assert_eq!(g.order, 64);
        assert_eq!(g.distinct_count().unwrap(), 64);
        assert!(g.all_orthogonal().unwrap());
        assert!(g.group_axioms_check(usize::MAX).unwrap());
        let hist = g.element_order_histogram().unwrap();
        assert!(hist.keys().all(|o| 8 % o == 0));
        assert_eq!(hist.values().sum::<u64>(), 64);
        assert_eq!(g.non_cyclic_witness().unwrap(), Some(8));
    }

    #[test]
    fn g2_commutation_example() {
        let g = g2_pipeline(&f3(), 2, 0, 0, 1, false).unwrap();
        let x = g.element(&[1, 1]).unwrap();
        let y = g.element(&[2, 3]).unwrap();
        let z = g.element(&[3, 4]).unwrap();
        assert_eq!(x.mul(&y).unwrap(), z);
        assert_eq!(y.mul(&x).unwrap(), z);
    }

    #[test]
    fn g2_literal_form_is_not_preserved() {
        let f = f3();
        let g = g2_pipeline(&f, 2, 0, 0, 1, false).unwrap();
        let literal = form_matrix(FormKind::S2v, 4, &f).unwrap();
        assert!(!is_orthogonal(&g.generators[0], &literal).unwrap());
    }

    #[test]
    fn g2_q3_n1_klein() {
        let f = f3();
        assert_eq!(g2_pipeline(&f, 1, 0, 0, 0, false).unwrap_err(), Error::IdenticalGenerators);
        assert!(matches!(
            g2_pipeline(&f, 1, 0, 0, 1, false),
            Err(Error::IndexOutOfRange { index: 1, available: 1 })
        ));
        let g = g2_pipeline(&f, 1, 0, 0, 0, true).unwrap();
        assert_eq!(g.order, 4);
        let hist = g.element_order_histogram().unwrap();
        assert_eq!(hist, BTreeMap::from([(1, 1), (2, 3)]));
    }

    #[test]
    fn g2_padded_variants() {
        for delta in 1..=2 {
            let g = g2_pipeline(&f3(), 2, delta, 0, 1, false).unwrap();
            assert_eq!(g.degree(), 8 + delta);
            assert!(g.all_orthogonal().unwrap());
        }
    }
}
