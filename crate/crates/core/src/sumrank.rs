//! Sum-rank metric codes over a block shape: weights, matrix/vector forms,
//! the two constructions from MRD codes, the sum-rank Singleton bound,
//! and coset-based covering-radius and list-size computations.

use std::sync::OnceLock;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::enumerate::{combine, span_rank, weight_stats, Layout, Mode, Scanner, WeightStats};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::matrix::{rank_in_place, rref_in_place, Matrix};
use crate::rank_code::{
    c1_ordered_basis, c2_ordered_basis, construct_c1_family, construct_c2_family, extension_multiplier,
    gabidulin_code, RankCode,
};

/// Per-block rows and columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Shape {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Shape {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        if rows.len() != cols.len() || rows.is_empty() {
            return Err(Error::ShapeMismatch("need one (rows, cols) pair per block".into()));
        }
        if rows.iter().chain(&cols).any(|&x| x == 0) {
            return Err(Error::ShapeMismatch("empty block".into()));
        }
        Ok(Shape { rows, cols })
    }

    /// `t` blocks of `m x n_i`.
    pub fn uniform_rows(m: usize, cols: Vec<usize>) -> Result<Self> {
        Shape::new(vec![m; cols.len()], cols)
    }

    pub fn t(&self) -> usize {
        self.rows.len()
    }

    /// Total number of columns `N`.
    pub fn n_total(&self) -> usize {
        self.cols.iter().sum()
    }

    pub fn layout(&self) -> Layout {
        Layout { blocks: self.rows.iter().copied().zip(self.cols.iter().copied()).collect() }
    }

    /// Number of F_q entries in a word.
    pub fn len(&self) -> usize {
        self.layout().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn common_rows(&self) -> Option<usize> {
        let m = self.rows[0];
        self.rows.iter().all(|&r| r == m).then_some(m)
    }

    pub fn common_cols(&self) -> Option<usize> {
        let n = self.cols[0];
        self.cols.iter().all(|&c| c == n).then_some(n)
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.t());
        let mut acc = 0;
        for (r, c) in self.rows.iter().zip(&self.cols) {
            off.push(acc);
            acc += r * c;
        }
        off
    }

    /// `(m x n_1 | m x n_2 | ...)`.
    pub fn describe(&self) -> String {
        let parts: Vec<String> =
            self.rows.iter().zip(&self.cols).map(|(r, c)| format!("{r}x{c}")).collect();
        format!("({})", parts.join("|"))
    }
}

/// A tuple of blocks `(X_1 | ... | X_t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumRankWord {
    pub blocks: Vec<Matrix>,
}

impl SumRankWord {
    pub fn new(blocks: Vec<Matrix>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::ShapeMismatch("no blocks".into()));
        }
        let f = blocks[0].field().clone();
        if blocks.iter().any(|b| !b.field().same(&f)) {
            return Err(Error::FieldMismatch);
        }
        Ok(SumRankWord { blocks })
    }

    pub fn shape(&self) -> Shape {
        Shape {
            rows: self.blocks.iter().map(|b| b.rows()).collect(),
            cols: self.blocks.iter().map(|b| b.cols()).collect(),
        }
    }

    pub fn field(&self) -> &FieldSpec {
        self.blocks[0].field()
    }

    pub fn weight(&self) -> usize {
        self.blocks.iter().map(|b| b.rank()).sum()
    }

    pub fn flatten(&self) -> Vec<u32> {
        self.blocks.iter().flat_map(|b| b.data().to_vec()).collect()
    }

    pub fn from_flat(field: &FieldSpec, shape: &Shape, data: &[u32]) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::ShapeMismatch(format!("{} entries for shape {}", data.len(), shape.describe())));
        }
        let mut blocks = Vec::with_capacity(shape.t());
        let mut off = 0;
        for (&r, &c) in shape.rows.iter().zip(&shape.cols) {
            blocks.push(Matrix::new(field, r, c, data[off..off + r * c].to_vec())?);
            off += r * c;
        }
        Ok(SumRankWord { blocks })
    }
}

pub fn sumrank_weight(x: &SumRankWord) -> usize {
    x.weight()
}

pub fn sumrank_distance(x: &SumRankWord, y: &SumRankWord) -> Result<usize> {
    if x.shape() != y.shape() {
        return Err(Error::ShapeMismatch(format!("{} vs {}", x.shape().describe(), y.shape().describe())));
    }
    let diff = x.blocks.iter().zip(&y.blocks).map(|(a, b)| a.sub(b)).collect::<Result<Vec<_>>>()?;
    Ok(SumRankWord { blocks: diff }.weight())
}

/// A word in vector form: block `i` is a vector of `n_i` elements of `F_{q^m}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorWord {
    pub ext: FieldSpec,
    pub blocks: Vec<Vec<u32>>,
}

impl VectorWord {
    /// Sum over blocks of the F_q-dimension spanned by the block's entries.
    pub fn rank_q(&self) -> usize {
        let base = self.ext.base().cloned().unwrap_or_else(|| self.ext.clone());
        let m = self.ext.relative_degree();
        self.blocks
            .iter()
            .map(|b| {
                let mut buf: Vec<u32> = b.iter().flat_map(|&v| self.ext.base_coords(v)).collect();
                rank_in_place(&base, b.len(), m, &mut buf)
            })
            .sum()
    }
}

fn check_ext(base: &FieldSpec, ext: &FieldSpec, m: usize) -> Result<()> {
    match ext.base() {
        Some(b) if b.same(base) && ext.relative_degree() == m => Ok(()),
        _ => Err(Error::ShapeMismatch(format!(
            "{} is not a degree-{m} extension of {}",
            ext.name(),
            base.name()
        ))),
    }
}

/// Column `j` of block `i` becomes `sum_u X_i[u][j] alpha^u`.
pub fn mat_to_vec(x: &SumRankWord, ext: &FieldSpec) -> Result<VectorWord> {
    let shape = x.shape();
    let m = shape.common_rows().ok_or_else(|| Error::ShapeMismatch("blocks differ in row count".into()))?;
    check_ext(x.field(), ext, m)?;
    let blocks = x
        .blocks
        .iter()
        .map(|b| {
            (0..b.cols())
                .map(|j| ext.from_base_coords(&(0..m).map(|u| b.get(u, j)).collect::<Vec<_>>()))
                .collect()
        })
        .collect();
    Ok(VectorWord { ext: ext.clone(), blocks })
}

pub fn vec_to_mat(v: &VectorWord, base: &FieldSpec) -> Result<SumRankWord> {
    let m = v.ext.relative_degree();
    check_ext(base, &v.ext, m)?;
    let blocks = v
        .blocks
        .iter()
        .map(|b| {
            let mut data = vec![0u32; m * b.len()];
            for (j, &e) in b.iter().enumerate() {
                for (u, c) in v.ext.base_coords(e).into_iter().enumerate() {
                    data[u * b.len() + j] = c;
                }
            }
            Matrix::new(base, m, b.len(), data)
        })
        .collect::<Result<Vec<_>>>()?;
    SumRankWord::new(blocks)
}

/// Appends zero rows up to `target_rows`.
pub fn phi_pad(c: &Matrix, target_rows: usize) -> Result<Matrix> {
    if c.rows() > target_rows {
        return Err(Error::TooManyRows { rows: c.rows(), target: target_rows });
    }
    if c.rows() == target_rows {
        return Ok(c.clone());
    }
    c.vconcat(&Matrix::zeros(c.field(), target_rows - c.rows(), c.cols()))
}

/// How a distance value was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    Exhaustive,
    ProofGuidedPartial,
    Sampled,
}

/// F_q-linear sum-rank code stored as flattened basis words.
#[derive(Debug)]
pub struct SumRankCode {
    field: FieldSpec,
    shape: Shape,
    basis: Vec<Vec<u32>>,
    /// `F_{q^m}` when every block has `m` rows
    ext: Option<FieldSpec>,
    /// dimension over `F_{q^m}` when the code is closed under it
    k: Option<usize>,
    stats: OnceLock<WeightStats>,
}

impl SumRankCode {
    pub fn new(field: &FieldSpec, shape: Shape, basis: Vec<Vec<u32>>) -> Result<Self> {
        let len = shape.len();
        if basis.iter().any(|b| b.len() != len) {
            return Err(Error::ShapeMismatch(format!("basis words do not match {}", shape.describe())));
        }
        if span_rank(field, &basis) != basis.len() {
            return Err(Error::InvalidDimension("basis words are linearly dependent".into()));
        }
        let ext = match shape.common_rows() {
            Some(m) if m > 1 => Some(field.extension(m, None)?),
            _ => None,
        };
        let mut code = SumRankCode { field: field.clone(), shape, basis, ext, k: None, stats: OnceLock::new() };
        code.k = code.extension_dim()?;
        Ok(code)
    }

    pub fn from_words(field: &FieldSpec, words: &[SumRankWord]) -> Result<Self> {
        let shape = words.first().ok_or_else(|| Error::InvalidDimension("no words".into()))?.shape();
        SumRankCode::new(field, shape, words.iter().map(|w| w.flatten()).collect())
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ext(&self) -> Option<&FieldSpec> {
        self.ext.as_ref()
    }

    /// Dimension over `F_{q^m}`, set only when closure was verified.
    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn cardinality(&self) -> BigUint {
        BigUint::from(self.field.order()).pow(self.dim() as u32)
    }

    pub fn word(&self, i: usize) -> SumRankWord {
        SumRankWord::from_flat(&self.field, &self.shape, &self.basis[i]).expect("consistent shape")
    }

    pub fn combine(&self, coeffs: &[u32]) -> SumRankWord {
        let flat = combine(&self.field, &self.basis, coeffs);
        SumRankWord::from_flat(&self.field, &self.shape, &flat).expect("consistent shape")
    }

    pub fn contains_flat(&self, w: &[u32]) -> bool {
        let mut v = self.basis.clone();
        v.push(w.to_vec());
        span_rank(&self.field, &v) == self.dim()
    }

    /// Applies the `F_{q^m}` multiplier to every block of a flat word.
    fn times_alpha(&self, mult: &Matrix, w: &[u32]) -> Vec<u32> {
        let word = SumRankWord::from_flat(&self.field, &self.shape, w).expect("consistent shape");
        word.blocks.iter().flat_map(|b| mult.mul(b).expect("row count").into_data()).collect()
    }

    fn extension_dim(&self) -> Result<Option<usize>> {
        let Some(m) = self.shape.common_rows() else {
            return Ok(None);
        };
        if m == 1 {
            return Ok(Some(self.dim()));
        }
        let mult = extension_multiplier(&self.field, m)?;
        let closed = self.basis.iter().all(|b| self.contains_flat(&self.times_alpha(&mult, b)));
        Ok((closed && self.dim() % m == 0).then(|| self.dim() / m))
    }

    /// Generator matrix over `F_{q^m}` (`k` rows of length `N`), built from
    /// basis words greedily independent over the extension.
    pub fn generator_matrix(&self) -> Result<Vec<Vec<u32>>> {
        let (Some(_), Some(ext)) = (self.k, &self.ext) else {
            return Err(Error::NotExtensionLinear);
        };
        let m = ext.relative_degree();
        let mult = extension_multiplier(&self.field, m)?;
        let mut span: Vec<Vec<u32>> = Vec::new();
        let mut rows = Vec::new();
        for b in &self.basis {
            let mut probe = span.clone();
            probe.push(b.clone());
            if span_rank(&self.field, &probe) == span.len() {
                continue;
            }
            let mut x = b.clone();
            for _ in 0..m {
                span.push(x.clone());
                x = self.times_alpha(&mult, &x);
            }
            let word = SumRankWord::from_flat(&self.field, &self.shape, b)?;
            rows.push(mat_to_vec(&word, ext)?.blocks.concat());
            if span.len() == self.dim() {
                break;
            }
        }
        Ok(rows)
    }

    pub fn weight_stats(&self, budget: u64) -> Result<&WeightStats> {
        if let Some(s) = self.stats.get() {
            return Ok(s);
        }
        let s = weight_stats(&self.field, &self.basis, &self.shape.layout(), budget)?;
        Ok(self.stats.get_or_init(|| s))
    }

    pub fn min_distance(&self, budget: u64) -> Result<usize> {
        Ok(self.weight_stats(budget)?.min_weight)
    }

    /// The sum-rank Singleton bound at distance `d`, in whichever convention
    /// the shape supports (common rows, else transposed common columns).
    pub fn singleton_bound(&self, d: usize) -> Result<BigUint> {
        let (cols, m) = singleton_convention(&self.shape)?;
        sr_singleton_bound(&cols, m, d, self.field.order())
    }

    pub fn is_msrd_at(&self, d: usize) -> Result<bool> {
        Ok(self.singleton_bound(d)? == self.cardinality())
    }

    pub fn is_msrd(&self, budget: u64) -> Result<bool> {
        let d = self.min_distance(budget)?;
        self.is_msrd_at(d)
    }
}

/// `(n_i, m)` for the Singleton bound: common rows as `m`, or the transposed
/// view when only the columns agree.
pub fn singleton_convention(shape: &Shape) -> Result<(Vec<usize>, usize)> {
    if let Some(m) = shape.common_rows() {
        Ok((shape.cols.clone(), m))
    } else if let Some(n) = shape.common_cols() {
        Ok((shape.rows.clone(), n))
    } else {
        Err(Error::ShapeMismatch(format!(
            "{} has neither a common row nor a common column count",
            shape.describe()
        )))
    }
}

/// `q^{m sum_{i>=j} n_i - max(m, n_j) delta}` with `d - 1 = sum_{i<j}
/// min(m, n_i) + delta`, block lengths sorted in non-increasing order.
pub fn sr_singleton_bound(cols: &[usize], m: usize, d: usize, q: u32) -> Result<BigUint> {
    let mut n: Vec<usize> = cols.to_vec();
    n.sort_unstable_by(|a, b| b.cmp(a));
    let max: usize = n.iter().map(|&x| x.min(m)).sum();
    if d == 0 || d > max {
        return Err(Error::DistanceOutOfRange { d, max });
    }
    let mut rest = d - 1;
    let mut j = 0;
    while rest >= n[j].min(m) {
        rest -= n[j].min(m);
        j += 1;
    }
    let delta = rest;
    let tail: usize = n[j..].iter().sum();
    let exp = m * tail - m.max(n[j]) * delta;
    Ok(BigUint::from(q).pow(exp as u32))
}

/// The `(j, delta)` pair of the sum-rank Singleton bound (1-based `j`).
pub fn singleton_j_delta(cols: &[usize], m: usize, d: usize) -> Result<(usize, usize)> {
    let mut n: Vec<usize> = cols.to_vec();
    n.sort_unstable_by(|a, b| b.cmp(a));
    let max: usize = n.iter().map(|&x| x.min(m)).sum();
    if d == 0 || d > max {
        return Err(Error::DistanceOutOfRange { d, max });
    }
    let mut rest = d - 1;
    let mut j = 0;
    while rest >= n[j].min(m) {
        rest -= n[j].min(m);
        j += 1;
    }
    Ok((j + 1, rest))
}

// ---- first construction ------------------------------------------------

fn check_m_list(m_list: &[usize], top: usize) -> Result<()> {
    let mut prev = top;
    for &m in m_list {
        if m == 0 || m > prev {
            return Err(Error::InvalidDimension(format!(
                "row counts must satisfy {top} >= m_2 >= ... >= m_t >= 1, got {m_list:?}"
            )));
        }
        prev = m;
    }
    Ok(())
}

/// `{(C - sum phi_i(C_i) | C_2 | ... | C_t)}` over a two-row MRD code of
/// distance 2 and free blocks `C_i` of `m_i` rows.
pub fn construct1(c_mrd: &RankCode, m_list: &[usize], budget: u64) -> Result<SumRankCode> {
    if c_mrd.rows() != 2 {
        return Err(Error::BadFirstBlock(format!("{} rows, expected 2", c_mrd.rows())));
    }
    let d = c_mrd.min_rank_distance(budget)?;
    if d != 2 {
        return Err(Error::BadFirstBlock(format!("minimum distance {d}, expected 2")));
    }
    check_m_list(m_list, 2)?;
    let field = c_mrd.field();
    let w = c_mrd.cols();
    let mut rows = vec![2];
    rows.extend_from_slice(m_list);
    let shape = Shape::new(rows, vec![w; m_list.len() + 1])?;
    let offsets = shape.offsets();
    let mut basis = Vec::new();
    for b in c_mrd.basis() {
        let mut word = vec![0u32; shape.len()];
        word[..b.data().len()].copy_from_slice(b.data());
        basis.push(word);
    }
    for (i, &mi) in m_list.iter().enumerate() {
        for r in 0..mi {
            for c in 0..w {
                let e = Matrix::unit(field, mi, w, r, c);
                let first = phi_pad(&e, 2)?.neg();
                let mut word = vec![0u32; shape.len()];
                word[..2 * w].copy_from_slice(first.data());
                let off = offsets[i + 1];
                word[off..off + mi * w].copy_from_slice(e.data());
                basis.push(word);
            }
        }
    }
    SumRankCode::new(field, shape, basis)
}

/// Distance of a first-construction code, with how it was established.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistanceVerdict {
    pub d: usize,
    pub mode: ScanMode,
    /// a nonzero word of weight `d`, flattened
    pub witness: Vec<u32>,
    /// rank-one tail blocks checked against the first-block code
    pub rank_one_tails_checked: u64,
    /// random codewords checked
    pub samples_checked: u64,
}

/// Exhaustive when within budget; otherwise the case split of the distance
/// argument: no rank-one padded tail block lies in the MRD code (so a tail of
/// weight one never cancels the first block), plus seeded sampling.
pub fn construction1_distance(
    c_mrd: &RankCode,
    code: &SumRankCode,
    budget: u64,
    samples: u64,
    seed: u64,
) -> Result<DistanceVerdict> {
    let field = code.field();
    let layout = code.shape().layout();
    if code.cardinality() <= BigUint::from(budget) {
        let st = code.weight_stats(budget)?;
        return Ok(DistanceVerdict {
            d: st.min_weight,
            mode: ScanMode::Exhaustive,
            witness: combine(field, code.basis(), &st.witness),
            rank_one_tails_checked: 0,
            samples_checked: 0,
        });
    }
    let d_mrd = c_mrd.min_rank_distance(budget)?;
    let w = c_mrd.cols();
    let q = field.order();
    let mut checked = 0u64;
    let mut cancels = false;
    for &mi in &code.shape().rows[1..] {
        // rank-one m_i x w matrices u v^T, u with last nonzero entry 1
        for ucode in 1..(q as u64).pow(mi as u32) {
            let u: Vec<u32> = (0..mi).map(|i| (ucode / (q as u64).pow(i as u32) % q as u64) as u32).collect();
            if *u.iter().rev().find(|&&x| x != 0).unwrap() != 1 {
                continue;
            }
            for vcode in 1..(q as u64).pow(w as u32) {
                let v: Vec<u32> = (0..w).map(|j| (vcode / (q as u64).pow(j as u32) % q as u64) as u32).collect();
                let data: Vec<u32> = u.iter().flat_map(|&a| v.iter().map(move |&b| field.mul(a, b))).collect();
                let e = Matrix::new(field, mi, w, data)?;
                if c_mrd.contains(&phi_pad(&e, 2)?) {
                    cancels = true;
                }
                checked += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scratch = Vec::new();
    let mut sample_min = usize::MAX;
    for _ in 0..samples {
        let coeffs: Vec<u32> = (0..code.dim()).map(|_| rng.gen_range(0..q)).collect();
        if coeffs.iter().all(|&c| c == 0) {
            continue;
        }
        let word = combine(field, code.basis(), &coeffs);
        sample_min = sample_min.min(layout.weight(field, &word, &mut scratch));
    }
    // first MRD basis word placed in the first block, zero tail
    let witness = code.basis()[0].clone();
    let wit_weight = layout.weight(field, &witness, &mut scratch);
    let d = if cancels { 1 } else { d_mrd.min(sample_min).min(wit_weight) };
    Ok(DistanceVerdict {
        d,
        mode: ScanMode::ProofGuidedPartial,
        witness,
        rank_one_tails_checked: checked,
        samples_checked: samples,
    })
}

// ---- second construction -----------------------------------------------

/// Span of `(A_{1,j} | ... | A_{t-1,j} | C_{t,j})` over all `j`.
pub fn construct2(components: &[Vec<Matrix>], tail: &[Matrix]) -> Result<SumRankCode> {
    let identity: Vec<usize> = (0..tail.len()).collect();
    construct2_permuted(components, tail, &identity)
}

/// As [`construct2`] with the tail basis reordered by `perm`.
pub fn construct2_permuted(components: &[Vec<Matrix>], tail: &[Matrix], perm: &[usize]) -> Result<SumRankCode> {
    let size = tail.len();
    if size == 0 {
        return Err(Error::BasisSizeMismatch("empty tail basis".into()));
    }
    for (i, c) in components.iter().enumerate() {
        if c.len() != size {
            return Err(Error::BasisSizeMismatch(format!(
                "component {} has {} basis matrices, tail has {size}",
                i + 1,
                c.len()
            )));
        }
    }
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..size).collect::<Vec<_>>() {
        return Err(Error::BasisSizeMismatch("permutation does not match the tail basis".into()));
    }
    let field = tail[0].field().clone();
    let mut words = Vec::with_capacity(size);
    for j in 0..size {
        let mut blocks: Vec<Matrix> = components.iter().map(|c| c[j].clone()).collect();
        blocks.push(tail[perm[j]].clone());
        words.push(SumRankWord::new(blocks)?);
    }
    SumRankCode::from_words(&field, &words)
}

// ---- named families ----------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    #[serde(rename = "C1bar")]
    C1Bar,
    #[serde(rename = "C2bar")]
    C2Bar,
    #[serde(rename = "C3bar")]
    C3Bar,
    #[serde(rename = "C4bar")]
    C4Bar,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::C1Bar, Family::C2Bar, Family::C3Bar, Family::C4Bar];

    pub fn name(self) -> &'static str {
        match self {
            Family::C1Bar => "C1bar",
            Family::C2Bar => "C2bar",
            Family::C3Bar => "C3bar",
            Family::C4Bar => "C4bar",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c1bar" | "c1" | "1" => Ok(Family::C1Bar),
            "c2bar" | "c2" | "2" => Ok(Family::C2Bar),
            "c3bar" | "c3" | "3" => Ok(Family::C3Bar),
            "c4bar" | "c4" | "4" => Ok(Family::C4Bar),
            _ => Err(Error::Parse(format!("unknown family {s:?}"))),
        }
    }
}

/// First construction with `t` blocks, all tail blocks of `m_i` rows, over
/// `C^(1)` (`w = 4`) or `C^(2)` (`w = 8`) at `n = 2`.
pub fn construction1_code(field: &FieldSpec, w: usize, m_list: &[usize], budget: u64) -> Result<(RankCode, SumRankCode)> {
    let c_mrd = match w {
        4 => construct_c1_family(field, 2, 0, 0)?.code,
        8 => construct_c2_family(field, 2, 0, 0, 1, false)?.code,
        _ => return Err(Error::InvalidDimension(format!("block width {w} is neither 4 nor 8"))),
    };
    let code = construct1(&c_mrd, m_list, budget)?;
    Ok((c_mrd, code))
}

/// Second construction: `t - 1` Gabidulin components of F_q-dimension
/// `2n` (resp. `4n`) paired with the `C^(1)` (resp. `C^(2)`) basis.
pub fn construction2_code(field: &FieldSpec, n: usize, t: usize, wide: bool) -> Result<SumRankCode> {
    construction2_code_indexed(field, n, t, wide, 0)
}

/// As [`construction2_code`] with the tail built from the `f_index`-th
/// primitive polynomial (and the next one for the wide tail).
pub fn construction2_code_indexed(field: &FieldSpec, n: usize, t: usize, wide: bool, f_index: usize) -> Result<SumRankCode> {
    if t == 0 {
        return Err(Error::InvalidDimension("t must be at least 1".into()));
    }
    let (k, tail) = if wide {
        if n < 4 {
            return Err(Error::PreconditionViolation(format!(
                "components of distance n-3 need n >= 4, got n = {n}"
            )));
        }
        let fam = construct_c2_family(field, n, 0, f_index, 1 - f_index.min(1), false)?;
        (4, c2_ordered_basis(&fam, n, 0)?)
    } else {
        let fam = construct_c1_family(field, n, 0, f_index)?;
        (2, c1_ordered_basis(&fam, n, 0)?)
    };
    let comp = gabidulin_code(field, n, k)?;
    let components = vec![comp.basis().to_vec(); t - 1];
    construct2(&components, &tail)
}

// ---- cosets, covering radius, list sizes -------------------------------

/// Per-coset weight histograms of a linear code, from one pass over the
/// ambient space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CosetAnalysis {
    pub cosets: u64,
    pub ambient_words: u64,
    /// max over cosets of the minimum weight
    pub covering_radius: usize,
    /// `max_x |B(x, tau) ∩ C|` for `tau = 0..=max weight`
    pub max_ball: Vec<u64>,
    /// `max_x |S(x, r) ∩ C|` for `r = 0..=max weight`
    pub max_sphere: Vec<u64>,
    /// number of cosets with each coset-leader weight
    pub leader_weights: Vec<u64>,
}

pub fn coset_analysis(code: &SumRankCode, budget: u64) -> Result<CosetAnalysis> {
    let field = code.field();
    let q = field.order() as u64;
    let len = code.shape().len();
    let k = code.dim();
    let ambient = BigUint::from(q).pow(len as u32);
    if ambient > BigUint::from(budget) {
        return Err(Error::EnumerationBudgetExceeded { needed: ambient.to_string(), budget });
    }
    // syndrome: coordinates outside the pivots after reducing by the RREF basis
    let mut rref: Vec<u32> = code.basis().concat();
    let pivots = rref_in_place(field, k, len, &mut rref);
    let free: Vec<usize> = (0..len).filter(|j| !pivots.contains(j)).collect();
    let nfree = free.len();
    let mut ext_basis = Vec::with_capacity(len);
    for j in 0..len {
        let mut v = vec![0u32; len + nfree];
        v[j] = 1;
        if let Some(r) = pivots.iter().position(|&p| p == j) {
            for (s, &fj) in free.iter().enumerate() {
                v[len + s] = field.neg(rref[r * len + fj]);
            }
        } else {
            let s = free.iter().position(|&x| x == j).expect("free column");
            v[len + s] = 1;
        }
        ext_basis.push(v);
    }
    let cosets = q.pow(nfree as u32);
    let layout = code.shape().layout();
    let wmax = layout.max_weight();
    let stride = wmax + 1;
    let scanner = Scanner::new(field, &ext_basis, Mode::All, budget)?;
    struct Acc {
        hist: Vec<u32>,
        scratch: Vec<u32>,
    }
    let acc = scanner.run(
        || Acc { hist: vec![0; cosets as usize * stride], scratch: Vec::new() },
        |a, word, _| {
            let w = layout.weight(field, &word[..len], &mut a.scratch);
            let idx = word[len..].iter().rev().fold(0u64, |acc, &d| acc * q + d as u64);
            a.hist[idx as usize * stride + w] += 1;
        },
        |mut a, b| {
            for (x, y) in a.hist.iter_mut().zip(b.hist) {
                *x += y;
            }
            a
        },
    )?;
    let mut covering_radius = 0;
    let mut max_ball = vec![0u64; stride];
    let mut max_sphere = vec![0u64; stride];
    let mut leader_weights = vec![0u64; stride];
    for c in 0..cosets as usize {
        let h = &acc.hist[c * stride..(c + 1) * stride];
        let leader = h.iter().position(|&x| x > 0).expect("coset is nonempty");
        leader_weights[leader] += 1;
        covering_radius = covering_radius.max(leader);
        let mut run = 0u64;
        for r in 0..stride {
            run += h[r] as u64;
            max_ball[r] = max_ball[r].max(run);
            max_sphere[r] = max_sphere[r].max(h[r] as u64);
        }
    }
    Ok(CosetAnalysis {
        cosets,
        ambient_words: q.pow(len as u32),
        covering_radius,
        max_ball,
        max_sphere,
        leader_weights,
    })
}

pub fn covering_radius(code: &SumRankCode, budget: u64) -> Result<usize> {
    Ok(coset_analysis(code, budget)?.covering_radius)
}

/// Largest ball occupancy found, and whether it is exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ListCheck {
    pub tau: usize,
    pub max_list: u64,
    pub exact: bool,
    pub centers: u64,
}

/// Exact over all centers (through cosets) when the ambient space fits the
/// budget, otherwise a lower bound from `samples` seeded random centers.
pub fn list_decodable_check(
    code: &SumRankCode,
    tau: usize,
    budget: u64,
    samples: u64,
    seed: u64,
) -> Result<ListCheck> {
    match coset_analysis(code, budget) {
        Ok(ca) => {
            let i = tau.min(ca.max_ball.len() - 1);
            Ok(ListCheck { tau, max_list: ca.max_ball[i], exact: true, centers: ca.ambient_words })
        }
        Err(Error::EnumerationBudgetExceeded { .. }) => {
            sampled_list_size(code, tau, budget, samples, seed)
        }
        Err(e) => Err(e),
    }
}

fn sampled_list_size(code: &SumRankCode, tau: usize, budget: u64, samples: u64, seed: u64) -> Result<ListCheck> {
    let field = code.field();
    let q = field.order();
    let len = code.shape().len();
    let layout = code.shape().layout();
    let scanner = Scanner::new(field, code.basis(), Mode::All, budget)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0;
    for s in 0..samples {
        // half of the centers sit next to a codeword so the balls are not empty
        let mut center: Vec<u32> = if s % 2 == 0 {
            (0..len).map(|_| rng.gen_range(0..q)).collect()
        } else {
            let coeffs: Vec<u32> = (0..code.dim()).map(|_| rng.gen_range(0..q)).collect();
            combine(field, code.basis(), &coeffs)
        };
        if s % 2 == 1 {
            for _ in 0..tau {
                let j = rng.gen_range(0..len);
                center[j] = rng.gen_range(0..q);
            }
        }
        let count = scanner.run(
            || (0u64, Vec::new()),
            |a, word, _| {
                let diff: Vec<u32> = word.iter().zip(&center).map(|(&x, &y)| field.sub(x, y)).collect();
                if layout.weight(field, &diff, &mut a.1) <= tau {
                    a.0 += 1;
                }
            },
            |a, b| (a.0 + b.0, a.1),
        )?;
        best = best.max(count.0);
    }
    Ok(ListCheck { tau, max_list: best, exact: false, centers: samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::DEFAULT_BUDGET as B;

    fn f(q: u32) -> FieldSpec {
        FieldSpec::galois(q).unwrap()
    }

    fn mat(field: &FieldSpec, rows: &[&[u32]]) -> Matrix {
        Matrix::from_rows(field, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn weight_examples() {
        let f3 = f(3);
        let z = SumRankWord::new(vec![Matrix::zeros(&f3, 2, 2), Matrix::zeros(&f3, 2, 2)]).unwrap();
        assert_eq!(sumrank_weight(&z), 0);
        let i = SumRankWord::new(vec![Matrix::identity(&f3, 2), Matrix::identity(&f3, 2)]).unwrap();
        assert_eq!(sumrank_weight(&i), 4);
        let f5 = f(5);
        let x = SumRankWord::new(vec![mat(&f5, &[&[1, 2], &[2, 4]]), Matrix::zeros(&f5, 2, 2)]).unwrap();
        assert_eq!(sumrank_weight(&x), 1);
        let y = SumRankWord::new(vec![Matrix::zeros(&f3, 2, 3)]).unwrap();
        assert!(matches!(sumrank_distance(&z, &y), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn vector_form_examples() {
        let f3 = f(3);
        let f9 = f3.extension(2, None).unwrap();
        let i = SumRankWord::new(vec![Matrix::identity(&f3, 2)]).unwrap();
        let v = mat_to_vec(&i, &f9).unwrap();
        assert_eq!(v.blocks, vec![vec![1, 3]]);
        assert_eq!(v.rank_q(), 2);
        assert_eq!(vec_to_mat(&v, &f3).unwrap(), i);
        let z = SumRankWord::new(vec![Matrix::zeros(&f3, 2, 3)]).unwrap();
        assert!(mat_to_vec(&z, &f9).unwrap().blocks[0].iter().all(|&x| x == 0));
    }

    #[test]
    fn vector_roundtrip_random() {
        let f3 = f(3);
        let f9 = f3.extension(2, None).unwrap();
        let shape = Shape::uniform_rows(2, vec![4, 2, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let data: Vec<u32> = (0..shape.len()).map(|_| rng.gen_range(0..3)).collect();
            let w = SumRankWord::from_flat(&f3, &shape, &data).unwrap();
            let v = mat_to_vec(&w, &f9).unwrap();
            assert_eq!(v.rank_q(), w.weight());
            assert_eq!(vec_to_mat(&v, &f3).unwrap(), w);
        }
    }

    #[test]
    fn phi_examples() {
        let f3 = f(3);
        let c = mat(&f3, &[&[1, 0, 2, 0]]);
        let p = phi_pad(&c, 2).unwrap();
        assert_eq!((p.rows(), p.rank()), (2, 1));
        let full = Matrix::identity(&f3, 2).hconcat(&Matrix::zeros(&f3, 2, 2)).unwrap();
        assert_eq!(phi_pad(&full, 2).unwrap(), full);
        assert!(phi_pad(&Matrix::zeros(&f3, 1, 4), 2).unwrap().is_zero());
        assert_eq!(phi_pad(&full, 1).unwrap_err(), Error::TooManyRows { rows: 2, target: 1 });
    }

    #[test]
    fn singleton_examples() {
        assert_eq!(sr_singleton_bound(&[4, 4], 2, 2, 3).unwrap(), BigUint::from(3u32).pow(12));
        assert_eq!(singleton_j_delta(&[4, 4], 2, 2).unwrap(), (1, 1));
        assert_eq!(sr_singleton_bound(&[2, 4], 2, 3, 3).unwrap(), 81u32.into());
        assert_eq!(singleton_j_delta(&[2, 4], 2, 3).unwrap(), (2, 0));
        assert_eq!(sr_singleton_bound(&[3, 2], 2, 1, 3).unwrap(), BigUint::from(3u32).pow(10));
        assert!(matches!(sr_singleton_bound(&[2, 4], 2, 5, 3), Err(Error::DistanceOutOfRange { .. })));
    }

    #[test]
    fn singleton_reduces_to_rank_and_hamming() {
        // t = 1 recovers the rank-metric bound
        for (m, n, d) in [(2usize, 4usize, 2usize), (3, 3, 2), (2, 6, 1)] {
            assert_eq!(
                sr_singleton_bound(&[n], m, d, 3).unwrap(),
                crate::rank_code::singleton_rank_bound(m, n, d, 3).unwrap()
            );
        }
        // 1x1 blocks: q^{N-d+1}
        assert_eq!(sr_singleton_bound(&[1; 5], 1, 3, 5).unwrap(), 125u32.into());
    }

    #[test]
    fn construction1_small() {
        let (_, code) = construction1_code(&f(3), 4, &[1], B).unwrap();
        assert_eq!(code.dim(), 8);
        assert_eq!(code.shape().describe(), "(2x4|1x4)");
        assert_eq!(code.min_distance(B).unwrap(), 2);
        assert!(code.is_msrd(B).unwrap());
        assert_eq!(code.k(), None);
    }

    #[test]
    fn construction1_rejects_bad_first_block() {
        let g = gabidulin_code(&f(3), 3, 2).unwrap();
        assert!(matches!(construct1(&g, &[2], B), Err(Error::BadFirstBlock(_))));
        let (c, _) = construction1_code(&f(3), 4, &[1], B).unwrap();
        assert!(matches!(construct1(&c, &[1, 2], B), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn construction2_q3_n2() {
        let c = construction2_code(&f(3), 2, 2, false).unwrap();
        assert_eq!(c.shape().describe(), "(2x2|2x4)");
        assert_eq!(c.dim(), 4);
        assert_eq!(c.k(), Some(2));
        assert_eq!(c.min_distance(B).unwrap(), 3);
        assert!(c.is_msrd(B).unwrap());
        let c3 = construction2_code(&f(3), 2, 3, false).unwrap();
        assert_eq!(c3.min_distance(B).unwrap(), 4);
        let c1 = construction2_code(&f(3), 2, 1, false).unwrap();
        assert_eq!(c1.min_distance(B).unwrap(), 2);
    }

    #[test]
    fn construction2_grid() {
        for q in [3u32, 5] {
            for n in [2usize, 3] {
                for t in [2usize, 3] {
                    let c = construction2_code(&f(q), n, t, false).unwrap();
                    assert_eq!(c.dim(), 2 * n);
                    assert_eq!(c.min_distance(B).unwrap(), t * (n - 1) + 1, "q={q} n={n} t={t}");
                }
            }
        }
    }

    #[test]
    fn construction2_permutation_keeps_distance() {
        let field = f(3);
        let fam = construct_c1_family(&field, 2, 0, 0).unwrap();
        let tail = c1_ordered_basis(&fam, 2, 0).unwrap();
        let comp = vec![gabidulin_code(&field, 2, 2).unwrap().basis().to_vec()];
        let c = construct2_permuted(&comp, &tail, &[3, 2, 1, 0]).unwrap();
        assert_eq!(c.min_distance(B).unwrap(), 3);
        assert!(matches!(construct2(&[vec![]], &tail), Err(Error::BasisSizeMismatch(_))));
    }

    #[test]
    fn construction2_wide_needs_n4() {
        assert!(matches!(
            construction2_code(&f(3), 3, 2, true),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn generator_matrix_of_c3() {
        let c = construction2_code(&f(3), 2, 2, false).unwrap();
        let g = c.generator_matrix().unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].len(), 6);
    }

    #[test]
    fn coset_examples() {
        let f3 = f(3);
        // full space: radius 0, every ball holds its centre
        let shape = Shape::uniform_rows(1, vec![1, 1]).unwrap();
        let full = SumRankCode::new(&f3, shape.clone(), vec![vec![1, 0], vec![0, 1]]).unwrap();
        let ca = coset_analysis(&full, B).unwrap();
        assert_eq!(ca.covering_radius, 0);
        assert_eq!(ca.cosets, 1);
        // zero-dimensional code: radius 2 in (1|1)
        let zero = SumRankCode::new(&f3, shape, vec![]).unwrap();
        assert_eq!(covering_radius(&zero, B).unwrap(), 2);
    }

    #[test]
    fn coset_analysis_c3_against_brute_force() {
        let c = construction2_code(&f(3), 2, 2, false).unwrap();
        let ca = coset_analysis(&c, B).unwrap();
        assert_eq!(ca.cosets, 6561);
        assert_eq!(ca.max_ball[0], 1);
        assert_eq!(ca.max_ball[1], 1);
        // direct max-min over a sample of centres agrees with the leader weights
        let field = c.field();
        let layout = c.shape().layout();
        let mut words = Vec::new();
        for code in 0..81u32 {
            let coeffs: Vec<u32> = (0..4).map(|i| code / 3u32.pow(i) % 3).collect();
            words.push(combine(field, c.basis(), &coeffs));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut scratch = Vec::new();
        for _ in 0..300 {
            let x: Vec<u32> = (0..12).map(|_| rng.gen_range(0..3)).collect();
            let dists: Vec<usize> = words
                .iter()
                .map(|w| {
                    let d: Vec<u32> = x.iter().zip(w).map(|(&a, &b)| field.sub(a, b)).collect();
                    layout.weight(field, &d, &mut scratch)
                })
                .collect();
            assert!(*dists.iter().min().unwrap() <= ca.covering_radius);
            for tau in 0..ca.max_ball.len() {
                assert!(dists.iter().filter(|&&d| d <= tau).count() as u64 <= ca.max_ball[tau]);
            }
        }
        assert!(ca.covering_radius >= 1);
        let l2 = list_decodable_check(&c, 2, B, 0, 0).unwrap();
        assert!(l2.exact);
        assert!(l2.max_list <= 27);
    }

    #[test]
    fn sampled_list_is_lower_bound() {
        let c = construction2_code(&f(3), 2, 2, false).unwrap();
        let exact = list_decodable_check(&c, 2, B, 0, 0).unwrap();
        let sampled = list_decodable_check(&c, 2, 1000, 20, 3).unwrap();
        assert!(!sampled.exact);
        assert!(sampled.max_list <= exact.max_list);
        assert!(sampled.max_list >= 1);
    }
}
