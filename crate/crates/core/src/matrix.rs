//! Dense matrices over a [`FieldSpec`], companion matrices and the
//! companion-matrix property checks.

use std::collections::HashSet;
use std::fmt;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Polynomial};

/// Row-major matrix with entries stored as field-element indices.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatOp {
    Add,
    Sub,
    Mul,
    HConcat,
    BlockDiag,
}

impl Matrix {
    pub fn new(field: &FieldSpec, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&v| v >= field.order()) {
            return Err(Error::Parse(format!("{bad} is not an element of {}", field.name())));
        }
        Ok(Matrix { field: field.clone(), rows, cols, data })
    }

    /// Builds from nested rows; panics on ragged input (test/constructor helper).
    pub fn from_rows(field: &FieldSpec, rows: &[Vec<u32>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Matrix::new(field, r, c, rows.concat())
    }

    pub fn zeros(field: &FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix { field: field.clone(), rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: &FieldSpec, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Matrix with a single 1 at `(r, c)`.
    pub fn unit(field: &FieldSpec, rows: usize, cols: usize, r: usize, c: usize) -> Self {
        let mut m = Matrix::zeros(field, rows, cols);
        m.data[r * cols + c] = 1;
        m
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

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u32> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    /// Copy with one entry replaced.
    pub fn with_entry(&self, r: usize, c: usize, v: u32) -> Self {
        let mut m = self.clone();
        m.data[r * self.cols + c] = v;
        m
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == u32::from(i == j)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn rank(&self) -> usize {
        let mut buf = self.data.clone();
        rank_in_place(&self.field, self.rows, self.cols, &mut buf)
    }

    fn same_field(&self, other: &Matrix) -> Result<()> {
        if self.field.same(&other.field) {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    fn same_shape(&self, other: &Matrix, what: &str) -> Result<()> {
        self.same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other, "add")?;
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Ok(Matrix { data, ..self.clone() })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other, "sub")?;
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Ok(Matrix { data, ..self.clone() })
    }

    pub fn neg(&self) -> Matrix {
        let f = &self.field;
        Matrix { data: self.data.iter().map(|&a| f.neg(a)).collect(), ..self.clone() }
    }

    pub fn scale(&self, s: u32) -> Matrix {
        let f = &self.field;
        Matrix { data: self.data.iter().map(|&a| f.mul(a, s)).collect(), ..self.clone() }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "mul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut data = vec![0u32; self.rows * other.cols];
        for i in 0..self.rows {
            let out = &mut data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for (o, &b) in out.iter_mut().zip(other.row(k)) {
                    *o = f.add(*o, f.mul(a, b));
                }
            }
        }
        Ok(Matrix { field: f.clone(), rows: self.rows, cols: other.cols, data })
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = vec![0u32; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Matrix { field: self.field.clone(), rows: self.cols, cols: self.rows, data }
    }

    pub fn hconcat(&self, other: &Matrix) -> Result<Matrix> {
        self.same_field(other)?;
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "hconcat: {} rows vs {} rows",
                self.rows, other.rows
            )));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Matrix { field: self.field.clone(), rows: self.rows, cols: self.cols + other.cols, data })
    }

    pub fn vconcat(&self, other: &Matrix) -> Result<Matrix> {
        self.same_field(other)?;
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "vconcat: {} cols vs {} cols",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix { field: self.field.clone(), rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn block_diag(&self, other: &Matrix) -> Result<Matrix> {
        self.same_field(other)?;
        let (r, c) = (self.rows + other.rows, self.cols + other.cols);
        let mut m = Matrix::zeros(&self.field, r, c);
        for i in 0..self.rows {
            m.data[i * c..i * c + self.cols].copy_from_slice(self.row(i));
        }
        for i in 0..other.rows {
            let at = (self.rows + i) * c + self.cols;
            m.data[at..at + other.cols].copy_from_slice(other.row(i));
        }
        Ok(m)
    }

    /// Sub-block of `nr` rows and `nc` columns starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Result<Matrix> {
        if r0 + nr > self.rows || c0 + nc > self.cols {
            return Err(Error::DimensionMismatch("block outside matrix".into()));
        }
        let mut data = Vec::with_capacity(nr * nc);
        for r in r0..r0 + nr {
            data.extend_from_slice(&self.row(r)[c0..c0 + nc]);
        }
        Ok(Matrix { field: self.field.clone(), rows: nr, cols: nc, data })
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let f = &self.field;
        let w = 2 * n;
        let mut aug = vec![0u32; n * w];
        for i in 0..n {
            aug[i * w..i * w + n].copy_from_slice(self.row(i));
            aug[i * w + n + i] = 1;
        }
        for col in 0..n {
            let piv = (col..n).find(|&r| aug[r * w + col] != 0).ok_or(Error::SingularMatrix)?;
            if piv != col {
                for j in 0..w {
                    aug.swap(piv * w + j, col * w + j);
                }
            }
            let inv = f.inv(aug[col * w + col]);
            for j in 0..w {
                aug[col * w + j] = f.mul(aug[col * w + j], inv);
            }
            for r in 0..n {
                let factor = aug[r * w + col];
                if r == col || factor == 0 {
                    continue;
                }
                for j in 0..w {
                    let v = f.mul(factor, aug[col * w + j]);
                    aug[r * w + j] = f.sub(aug[r * w + j], v);
                }
            }
        }
        let data = (0..n).flat_map(|i| aug[i * w + n..(i + 1) * w].to_vec()).collect();
        Ok(Matrix { field: f.clone(), rows: n, cols: n, data })
    }

    /// `self^e` for square matrices; negative exponents need invertibility.
    pub fn pow(&self, e: i64) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("power of a non-square matrix".into()));
        }
        let mut base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Matrix::identity(&self.field, self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            base = base.mul(&base)?;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Evaluates the polynomial `p` (over the same field) at this matrix.
    pub fn eval_poly(&self, p: &Polynomial) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("polynomial of a non-square matrix".into()));
        }
        let mut acc = Matrix::zeros(&self.field, self.rows, self.cols);
        for &c in p.coeffs().iter().rev() {
            acc = acc.mul(self)?.add(&Matrix::identity(&self.field, self.rows).scale(c))?;
        }
        Ok(acc)
    }

    /// Parses `"r x c over q : a b ; c d"`.
    pub fn parse(s: &str, field: &FieldSpec) -> Result<Matrix> {
        let bad = || Error::Parse(format!("cannot read matrix {s:?}"));
        let (head, body) = s.split_once(':').ok_or_else(bad)?;
        let head: Vec<&str> = head.split_whitespace().collect();
        if head.len() != 5 || head[1] != "x" || head[3] != "over" {
            return Err(bad());
        }
        let rows: usize = head[0].parse().map_err(|_| bad())?;
        let cols: usize = head[2].parse().map_err(|_| bad())?;
        let q: u32 = head[4].parse().map_err(|_| bad())?;
        if q != field.order() {
            return Err(Error::FieldMismatch);
        }
        let mut data = Vec::with_capacity(rows * cols);
        for row in body.split(';') {
            let entries: Vec<&str> = row.split_whitespace().collect();
            if entries.is_empty() && rows * cols == 0 {
                continue;
            }
            if entries.len() != cols {
                return Err(Error::DimensionMismatch(format!("row {row:?} needs {cols} entries")));
            }
            for e in entries {
                data.push(e.parse().map_err(|_| bad())?);
            }
        }
        Matrix::new(field, rows, cols, data)
    }

    /// Nested-row form for JSON output.
    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} x {} over {} :", self.rows, self.cols, self.field.order())?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, " ;")?;
            }
            for v in self.row(r) {
                write!(f, " {v}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Binary matrix operation dispatched on `op`.
pub fn mat_ops(a: &Matrix, b: &Matrix, op: MatOp) -> Result<Matrix> {
    match op {
        MatOp::Add => a.add(b),
        MatOp::Sub => a.sub(b),
        MatOp::Mul => a.mul(b),
        MatOp::HConcat => a.hconcat(b),
        MatOp::BlockDiag => a.block_diag(b),
    }
}

/// Rank of a row-major `rows x cols` buffer by Gaussian elimination. The
/// buffer is clobbered. Pivots are taken column by column, first nonzero row.
pub fn rank_in_place(f: &FieldSpec, rows: usize, cols: usize, m: &mut [u32]) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| m[r * cols + col] != 0) else {
            continue;
        };
        if piv != rank {
            for j in col..cols {
                m.swap(piv * cols + j, rank * cols + j);
            }
        }
        let inv = f.inv(m[rank * cols + col]);
        for r in rank + 1..rows {
            let x = m[r * cols + col];
            if x == 0 {
                continue;
            }
            let factor = f.mul(x, inv);
            for j in col..cols {
                let v = f.mul(factor, m[rank * cols + j]);
                m[r * cols + j] = f.sub(m[r * cols + j], v);
            }
        }
        rank += 1;
    }
    rank
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref_in_place(f: &FieldSpec, rows: usize, cols: usize, m: &mut [u32]) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| m[r * cols + col] != 0) else {
            continue;
        };
        if piv != rank {
            for j in 0..cols {
                m.swap(piv * cols + j, rank * cols + j);
            }
        }
        let inv = f.inv(m[rank * cols + col]);
        for j in 0..cols {
            m[rank * cols + j] = f.mul(m[rank * cols + j], inv);
        }
        for r in 0..rows {
            let x = m[r * cols + col];
            if r == rank || x == 0 {
                continue;
            }
            for j in 0..cols {
                let v = f.mul(x, m[rank * cols + j]);
                m[r * cols + j] = f.sub(m[r * cols + j], v);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    pivots
}

/// Companion matrix: ones on the subdiagonal, last column `(-a_0, ..., -a_{n-1})`.
pub fn companion_matrix(f: &Polynomial) -> Result<Matrix> {
    let n = f.degree().ok_or(Error::ZeroPolynomial)?;
    if !f.is_monic() {
        return Err(Error::NonMonicPolynomial(f.to_string()));
    }
    if n == 0 {
        return Err(Error::InvalidDimension("companion matrix of a constant".into()));
    }
    let field = f.field();
    let mut m = Matrix::zeros(field, n, n);
    for i in 1..n {
        m.data[i * n + i - 1] = 1;
    }
    for i in 0..n {
        m.data[i * n + n - 1] = field.neg(f.coeff(i));
    }
    Ok(m)
}

/// Least `k >= 1` with `M^k = I`, by iterated multiplication capped at `q^rows`.
pub fn matrix_order(m: &Matrix) -> Result<u64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("order of a non-square matrix".into()));
    }
    if m.rank() < m.rows {
        return Err(Error::SingularMatrix);
    }
    let cap = (m.field.order() as u64).checked_pow(m.rows as u32).unwrap_or(u64::MAX);
    let mut acc = m.clone();
    let mut k = 1u64;
    while !acc.is_identity() {
        if k >= cap {
            return Err(Error::OrderCapExceeded(cap));
        }
        acc = acc.mul(m)?;
        k += 1;
    }
    Ok(k)
}

/// Outcome of the five companion-matrix checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    /// f(A) = 0
    pub annihilated: bool,
    /// {0, I, A, ..., A^(q^n-2)} closed under addition
    pub additively_closed: bool,
    /// whether the closure check covered every pair (else seeded sample)
    pub closure_exhaustive: bool,
    /// ord(A) = q^n - 1
    pub order_ok: bool,
    pub order: u64,
    /// I + A + ... + A^(q^n-2) = 0
    pub full_sum_zero: bool,
    /// rank(I + A + ... + A^a) = n for 1 <= a <= q^n - 3
    pub partial_sums_full_rank: bool,
    /// rank of the partial sum at a = q^n - 2, the last index below q^n - 1
    pub endpoint_rank: Option<usize>,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.annihilated
            && self.additively_closed
            && self.order_ok
            && self.full_sum_zero
            && self.partial_sums_full_rank
    }
}

/// `I + A + ... + A^a` for `1 <= a < q^n - 1`.
pub fn partial_power_sum(a_g: &Matrix, a: u64) -> Result<Matrix> {
    let group = (a_g.field.order() as u64).pow(a_g.rows as u32) - 1;
    if a == 0 || a >= group {
        return Err(Error::PreconditionViolation(format!(
            "partial sum index {a} outside 1..{}",
            group - 1
        )));
    }
    let mut acc = Matrix::identity(&a_g.field, a_g.rows);
    let mut p = acc.clone();
    for _ in 0..a {
        p = p.mul(a_g)?;
        acc = acc.add(&p)?;
    }
    Ok(acc)
}

/// Exhaustive closure check threshold on q^n.
const CLOSURE_EXHAUSTIVE_LIMIT: u64 = 81;
const CLOSURE_SAMPLES: usize = 1000;

pub fn companion_property_check(a_g: &Matrix, f: &Polynomial) -> Result<PropertyReport> {
    if companion_matrix(f)? != *a_g {
        return Err(Error::NotCompanionOfGivenPolynomial);
    }
    let field = a_g.field();
    let n = a_g.rows;
    let qn = (field.order() as u64).pow(n as u32);
    let group = qn - 1;

    let annihilated = a_g.eval_poly(f)?.is_zero();

    let mut powers = Vec::with_capacity(group as usize);
    let mut p = Matrix::identity(field, n);
    for _ in 0..group {
        powers.push(p.clone());
        p = p.mul(a_g)?;
    }
    let mut set: HashSet<Vec<u32>> = powers.iter().map(|m| m.data.clone()).collect();
    set.insert(vec![0; n * n]);
    let mut elems: Vec<&Matrix> = powers.iter().collect();
    let zero = Matrix::zeros(field, n, n);
    elems.push(&zero);
    let closure_exhaustive = qn <= CLOSURE_EXHAUSTIVE_LIMIT;
    let additively_closed = if closure_exhaustive {
        elems.iter().all(|a| elems.iter().all(|b| set.contains(&a.add(b).unwrap().data)))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        (0..CLOSURE_SAMPLES).all(|_| {
            let a = elems[rng.gen_range(0..elems.len())];
            let b = elems[rng.gen_range(0..elems.len())];
            set.contains(&a.add(b).unwrap().data)
        })
    };

    let order = matrix_order(a_g)?;
    let order_ok = order == group;

    let mut sum = Matrix::zeros(field, n, n);
    let mut partial_sums_full_rank = true;
    let mut endpoint_rank = None;
    for (a, pw) in powers.iter().enumerate() {
        sum = sum.add(pw)?;
        let a = a as u64;
        if a >= 1 && a + 3 <= qn {
            partial_sums_full_rank &= sum.rank() == n;
        }
        if a >= 1 && a + 2 == qn {
            endpoint_rank = Some(sum.rank());
        }
    }
    let full_sum_zero = sum.is_zero();

    Ok(PropertyReport {
        annihilated,
        additively_closed,
        closure_exhaustive,
        order_ok,
        order,
        full_sum_zero,
        partial_sums_full_rank,
        endpoint_rank,
    })
}

/// Order of `block_diag` blocks combined: lcm of orders.
pub fn lcm_order(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}
