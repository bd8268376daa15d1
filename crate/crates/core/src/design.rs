//! Systems of F_q-subspaces attached to `F_{q^m}`-linear sum-rank codes,
//! subspace-design checks over all `s`-dimensional `F_{q^m}`-subspaces, the
//! design-based list size, and periodic-subspace traces.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{design_list_size, gaussian_binomial};
use crate::enumerate::{install, span_rank};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::matrix::rank_in_place;
use crate::sumrank::{vec_to_mat, Shape, SumRankCode, VectorWord};

/// An ordered tuple `(H_1, ..., H_t)` of F_q-subspaces of `F_{q^m}^k`, each
/// given by an F_q-basis.
#[derive(Debug, Clone)]
pub struct SystemH {
    base: FieldSpec,
    ext: FieldSpec,
    k: usize,
    blocks: Vec<Vec<Vec<u32>>>,
}

impl SystemH {
    /// Checks that each block's vectors are F_q-independent and that all of
    /// them together span `F_{q^m}^k` over `F_{q^m}`.
    pub fn new(ext: &FieldSpec, k: usize, blocks: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        let base = ext
            .base()
            .cloned()
            .ok_or_else(|| Error::PreconditionViolation(format!("{} is not an extension field", ext.name())))?;
        if blocks.iter().flatten().any(|v| v.len() != k) {
            return Err(Error::DimensionMismatch(format!("system vectors must have length {k}")));
        }
        let sys = SystemH { base, ext: ext.clone(), k, blocks };
        for (j, b) in sys.blocks.iter().enumerate() {
            let flat: Vec<Vec<u32>> = b.iter().map(|v| sys.flat(v)).collect();
            if span_rank(&sys.base, &flat) != b.len() {
                return Err(Error::InvalidDimension(format!("block {} vectors are F_q-dependent", j + 1)));
            }
        }
        let all: Vec<u32> = sys.blocks.iter().flatten().flatten().copied().collect();
        let rows = all.len() / k.max(1);
        let mut buf = all;
        if k > 0 && rank_in_place(&sys.ext, rows, k, &mut buf) != k {
            return Err(Error::InvalidDimension("blocks do not span the ambient space".into()));
        }
        Ok(sys)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.ext.relative_degree()
    }

    pub fn ext(&self) -> &FieldSpec {
        &self.ext
    }

    pub fn blocks(&self) -> &[Vec<Vec<u32>>] {
        &self.blocks
    }

    /// `dim_q(H_j)` per block.
    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    pub fn n_total(&self) -> usize {
        self.block_dims().iter().sum()
    }

    /// Coordinates of a vector of `F_{q^m}^k` in `F_q^{mk}`.
    fn flat(&self, v: &[u32]) -> Vec<u32> {
        v.iter().flat_map(|&x| self.ext.base_coords(x)).collect()
    }

    /// F_q-basis of the `F_{q^m}`-span of `rows`: `alpha^u * row`.
    fn fq_span(&self, rows: &[Vec<u32>]) -> Vec<Vec<u32>> {
        let alpha = self.ext.generator_root();
        let mut out = Vec::with_capacity(rows.len() * self.m());
        for r in rows {
            let mut x = r.clone();
            for _ in 0..self.m() {
                out.push(self.flat(&x));
                x = x.iter().map(|&e| self.ext.mul(alpha, e)).collect();
            }
        }
        out
    }

    /// `sum_j dim_q(H_j ∩ W)` for the `F_{q^m}`-span `W` of independent `rows`.
    pub fn intersection_sum(&self, rows: &[Vec<u32>]) -> usize {
        let w = self.fq_span(rows);
        let mk = self.m() * self.k;
        let mut total = 0;
        for b in &self.blocks {
            let mut buf: Vec<u32> = w.iter().flatten().copied().collect();
            for v in b {
                buf.extend(self.flat(v));
            }
            let rank = rank_in_place(&self.base, w.len() + b.len(), mk, &mut buf);
            total += b.len() + w.len() - rank;
        }
        total
    }
}

/// The system of a code: the F_q-spans of the column blocks of a generator
/// matrix over `F_{q^m}`.
pub fn phi_code_to_system(code: &SumRankCode) -> Result<SystemH> {
    let g = code.generator_matrix()?;
    let ext = code.ext().ok_or(Error::NotExtensionLinear)?;
    let k = g.len();
    let mut blocks = Vec::new();
    let mut off = 0;
    for &nj in &code.shape().cols {
        blocks.push((off..off + nj).map(|c| (0..k).map(|r| g[r][c]).collect()).collect());
        off += nj;
    }
    SystemH::new(ext, k, blocks)
}

/// The code generated by the matrix whose column blocks are the bases of the
/// `H_j`.
pub fn psi_system_to_code(h: &SystemH) -> Result<SumRankCode> {
    let m = h.m();
    let dims = h.block_dims();
    let alpha = h.ext.generator_root();
    let mut basis = Vec::with_capacity(h.k * m);
    for r in 0..h.k {
        let mut row: Vec<Vec<u32>> = h.blocks.iter().map(|b| b.iter().map(|v| v[r]).collect()).collect();
        for _ in 0..m {
            let word = vec_to_mat(&VectorWord { ext: h.ext.clone(), blocks: row.clone() }, &h.base)?;
            basis.push(word.flatten());
            row = row.iter().map(|b| b.iter().map(|&e| h.ext.mul(alpha, e)).collect()).collect();
        }
    }
    SumRankCode::new(&h.base, Shape::uniform_rows(m, dims)?, basis)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DesignParams {
    pub s: usize,
    #[serde(rename = "A")]
    pub a: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DesignCheck {
    pub s: usize,
    #[serde(rename = "A")]
    pub a: usize,
    pub verdict: bool,
    pub max_sum: usize,
    /// `F_{q^m}`-basis (reduced echelon rows) of a subspace reaching `max_sum`
    pub witness_basis: Vec<Vec<u32>>,
    pub subspaces_checked: u64,
}

/// Pivot sets of `s` columns out of `k`, in lexicographic order.
fn pivot_sets(k: usize, s: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for c in start..k {
            cur.push(c);
            rec(c + 1, k, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, s, &mut Vec::new(), &mut out);
    out
}

/// Free cells `(row, col)` of a reduced echelon form with the given pivots.
fn free_cells(k: usize, pivots: &[usize]) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for (i, &p) in pivots.iter().enumerate() {
        for c in p + 1..k {
            if !pivots.contains(&c) {
                cells.push((i, c));
            }
        }
    }
    cells
}

/// Maximum of `sum_j dim_q(H_j ∩ W)` over all `s`-dimensional `W`, with the
/// first maximiser in enumeration order and the number of subspaces visited.
pub fn max_intersection(h: &SystemH, s: usize, budget: u64) -> Result<(usize, Vec<Vec<u32>>, u64)> {
    let k = h.k;
    if s > k {
        return Err(Error::InvalidDimension(format!("s = {s} exceeds k = {k}")));
    }
    let qm = h.ext.order();
    let count = gaussian_binomial(k, s, qm)?;
    if count > BigUint::from(budget) {
        return Err(Error::EnumerationBudgetExceeded { needed: count.to_string(), budget });
    }
    let tasks: Vec<(usize, Vec<usize>, Vec<(usize, usize)>, u64)> = pivot_sets(k, s)
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let cells = free_cells(k, &p);
            let n = (qm as u64).pow(cells.len() as u32);
            (i, p, cells, n)
        })
        .collect();
    // (sum, task, index); larger sum wins, earlier position breaks ties
    let best = install(|| {
        tasks
            .par_iter()
            .flat_map_iter(|(ti, pivots, cells, n)| {
                (0..*n).map(move |idx| (*ti, pivots, cells, idx))
            })
            .map(|(ti, pivots, cells, idx)| {
                let rows = echelon_rows(k, pivots, cells, idx, qm);
                (h.intersection_sum(&rows), ti, idx)
            })
            .reduce(
                || (0, usize::MAX, u64::MAX),
                |a, b| {
                    if (a.0, std::cmp::Reverse((a.1, a.2))) >= (b.0, std::cmp::Reverse((b.1, b.2))) {
                        a
                    } else {
                        b
                    }
                },
            )
    });
    let visited: u64 = tasks.iter().map(|t| t.3).sum();
    let witness = match tasks.get(best.1) {
        Some((_, p, c, _)) => echelon_rows(k, p, c, best.2, qm),
        None => Vec::new(),
    };
    Ok((best.0, witness, visited))
}

fn echelon_rows(k: usize, pivots: &[usize], cells: &[(usize, usize)], mut idx: u64, qm: u32) -> Vec<Vec<u32>> {
    let mut rows = vec![vec![0u32; k]; pivots.len()];
    for (i, &p) in pivots.iter().enumerate() {
        rows[i][p] = 1;
    }
    for &(r, c) in cells {
        rows[r][c] = (idx % qm as u64) as u32;
        idx /= qm as u64;
    }
    rows
}

/// Whether every `s`-dimensional `F_{q^m}`-subspace meets the blocks in a
/// total F_q-dimension of at most `A`.
pub fn design_check(h: &SystemH, params: DesignParams, budget: u64) -> Result<DesignCheck> {
    if params.s == 0 || params.s >= h.k {
        return Err(Error::InvalidDimension(format!("need 0 < s < k = {}, got s = {}", h.k, params.s)));
    }
    let (max_sum, witness, visited) = max_intersection(h, params.s, budget)?;
    Ok(DesignCheck {
        s: params.s,
        a: params.a,
        verdict: max_sum <= params.a,
        max_sum,
        witness_basis: witness,
        subspaces_checked: visited,
    })
}

/// Both sides of the code/design correspondence on one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Theorem19Report {
    pub k: usize,
    pub m: usize,
    pub shape: Vec<usize>,
    pub n_total: usize,
    pub d: usize,
    pub n_minus_d: usize,
    /// max over hyperplanes of the intersection sum
    pub hyperplane_max: usize,
    /// hyperplane maximum equals `N - d`
    pub system_matches_distance: bool,
    /// the system is a `(k-1, N-d)` design
    pub design_holds: bool,
    pub consistent: bool,
    pub witness_basis: Vec<Vec<u32>>,
    pub hyperplanes: u64,
}

pub fn theorem19_verify(code: &SumRankCode, budget: u64) -> Result<Theorem19Report> {
    let h = phi_code_to_system(code)?;
    let d = code.min_distance(budget)?;
    let n_total = h.n_total();
    let bound = n_total - d;
    let k = h.k;
    if k < 2 {
        return Err(Error::InvalidDimension("need k >= 2 for hyperplanes".into()));
    }
    let check = design_check(&h, DesignParams { s: k - 1, a: bound }, budget)?;
    let matches = check.max_sum == bound;
    Ok(Theorem19Report {
        k,
        m: h.m(),
        shape: h.block_dims(),
        n_total,
        d,
        n_minus_d: bound,
        hyperplane_max: check.max_sum,
        system_matches_distance: matches,
        design_holds: check.verdict,
        consistent: matches == check.verdict,
        witness_basis: check.witness_basis,
        hyperplanes: check.subspaces_checked,
    })
}

/// `q^{N-d}` for a code whose distance fits the budget.
pub fn code_design_list_size(code: &SumRankCode, budget: u64) -> Result<BigUint> {
    let d = code.min_distance(budget)?;
    Ok(design_list_size(code.shape().n_total(), d, code.field().order()))
}

/// A subset `T = offsets + span_q(generators)` of `(F_{q^m}^k)^t` whose block
/// projections lie in cosets of the `F_{q^m}`-subspace `M`.
#[derive(Debug, Clone)]
pub struct PeriodicSubspace {
    pub ext: FieldSpec,
    pub k: usize,
    pub t: usize,
    /// `F_{q^m}`-basis of `M`
    pub m_basis: Vec<Vec<u32>>,
    /// one offset per block
    pub offsets: Vec<Vec<u32>>,
    /// F_q-spanning tuples, each with blocks in `M`
    pub generators: Vec<Vec<Vec<u32>>>,
}

impl PeriodicSubspace {
    /// Validates `dim M <= s` and the coset condition on every block.
    pub fn new(
        ext: &FieldSpec,
        k: usize,
        s: usize,
        m_basis: Vec<Vec<u32>>,
        offsets: Vec<Vec<u32>>,
        generators: Vec<Vec<Vec<u32>>>,
    ) -> Result<Self> {
        let mut buf: Vec<u32> = m_basis.concat();
        let dim_m = if m_basis.is_empty() { 0 } else { rank_in_place(ext, m_basis.len(), k, &mut buf) };
        if dim_m > s {
            return Err(Error::PreconditionViolation(format!("dim M = {dim_m} exceeds s = {s}")));
        }
        let t = offsets.len();
        for g in &generators {
            if g.len() != t {
                return Err(Error::ShapeMismatch("generator has the wrong number of blocks".into()));
            }
            for block in g {
                let mut rows = m_basis.clone();
                rows.push(block.clone());
                let mut buf = rows.concat();
                if rank_in_place(ext, rows.len(), k, &mut buf) != dim_m {
                    return Err(Error::PreconditionViolation("a block projection leaves its coset of M".into()));
                }
            }
        }
        Ok(PeriodicSubspace { ext: ext.clone(), k, t, m_basis, offsets, generators })
    }

    pub fn zero(ext: &FieldSpec, k: usize, t: usize) -> Self {
        PeriodicSubspace {
            ext: ext.clone(),
            k,
            t,
            m_basis: Vec::new(),
            offsets: vec![vec![0; k]; t],
            generators: Vec::new(),
        }
    }

    /// Seeded random `M` of dimension `dim_m` with zero offsets and
    /// `gens` random generators whose blocks lie in `M`. A stand-in: nothing
    /// in the decoding setting produces these sets constructively.
    pub fn synthetic(ext: &FieldSpec, k: usize, t: usize, dim_m: usize, gens: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let qm = ext.order();
        let mut m_basis: Vec<Vec<u32>> = Vec::new();
        while m_basis.len() < dim_m {
            let v: Vec<u32> = (0..k).map(|_| rng.gen_range(0..qm)).collect();
            let mut rows = m_basis.clone();
            rows.push(v.clone());
            let mut buf = rows.concat();
            if rank_in_place(ext, rows.len(), k, &mut buf) == rows.len() {
                m_basis.push(v);
            }
        }
        let generators = (0..gens)
            .map(|_| {
                (0..t)
                    .map(|_| {
                        let mut v = vec![0u32; k];
                        for b in &m_basis {
                            let c = rng.gen_range(0..qm);
                            for (x, &y) in v.iter_mut().zip(b) {
                                *x = ext.add(*x, ext.mul(c, y));
                            }
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        PeriodicSubspace::new(ext, k, k.saturating_sub(1), m_basis, vec![vec![0; k]; t], generators)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicCheck {
    pub size: u64,
    /// F_q-dimension of `S`, or `log_q |S|` rounded down when `S` is not linear
    pub dim_s: usize,
    pub linear: bool,
    pub bound: usize,
    pub verdict: bool,
}

/// Enumerates `S = {f in T : f_j in H_j for all j}` and compares its size
/// with `bound` (normally `N - d`).
pub fn periodic_trace_check(t: &PeriodicSubspace, h: &SystemH, bound: usize, budget: u64) -> Result<PeriodicCheck> {
    if t.t != h.blocks.len() || t.k != h.k || !t.ext.same(&h.ext) {
        return Err(Error::ShapeMismatch("periodic set and system disagree on (k, t, field)".into()));
    }
    let q = h.base.order();
    let total = BigUint::from(q).pow(t.generators.len() as u32);
    if total > BigUint::from(budget) {
        return Err(Error::EnumerationBudgetExceeded { needed: total.to_string(), budget });
    }
    let h_flat: Vec<Vec<Vec<u32>>> = h.blocks.iter().map(|b| b.iter().map(|v| h.flat(v)).collect()).collect();
    let in_block = |j: usize, v: &[u32]| {
        let mut rows = h_flat[j].clone();
        rows.push(h.flat(v));
        span_rank(&h.base, &rows) == h_flat[j].len()
    };
    let mut members: Vec<Vec<u32>> = Vec::new();
    let mut coeffs = vec![0u32; t.generators.len()];
    loop {
        // f = offsets + sum_i c_i * g_i, with c_i in F_q embedded in F_{q^m}
        let mut f = t.offsets.clone();
        for (c, g) in coeffs.iter().zip(&t.generators) {
            if *c == 0 {
                continue;
            }
            let ce = t.ext.from_base_coords(&[*c]);
            for (fb, gb) in f.iter_mut().zip(g) {
                for (x, &y) in fb.iter_mut().zip(gb) {
                    *x = t.ext.add(*x, t.ext.mul(ce, y));
                }
            }
        }
        if f.iter().enumerate().all(|(j, v)| in_block(j, v)) {
            members.push(f.iter().flat_map(|v| h.flat(v)).collect());
        }
        let mut i = 0;
        loop {
            if i == coeffs.len() {
                return Ok(finish(members, q, bound));
            }
            coeffs[i] = (coeffs[i] + 1) % q;
            if coeffs[i] != 0 {
                break;
            }
            i += 1;
        }
    }
}

fn finish(mut members: Vec<Vec<u32>>, q: u32, bound: usize) -> PeriodicCheck {
    members.sort();
    members.dedup();
    let size = members.len() as u64;
    let field = FieldSpec::galois(q).expect("base field");
    let rank = if members.is_empty() { 0 } else { span_rank(&field, &members) };
    let has_zero = members.iter().any(|v| v.iter().all(|&x| x == 0));
    let linear = has_zero && size == (q as u64).pow(rank as u32);
    let dim_s = if linear {
        rank
    } else {
        let mut e = 0;
        while (q as u64).pow(e as u32 + 1) <= size {
            e += 1;
        }
        e
    };
    PeriodicCheck { size, dim_s, linear, bound, verdict: dim_s <= bound }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::DEFAULT_BUDGET as B;
    use crate::sumrank::{construction1_code, construction2_code};

    fn c3() -> SumRankCode {
        construction2_code(&FieldSpec::galois(3).unwrap(), 2, 2, false).unwrap()
    }

    /// `dim_q(H_j ∩ ker u) = n_j - rank_q(u G_j)` summed over blocks.
    fn kernel_oracle(h: &SystemH, u: &[u32]) -> usize {
        let ext = h.ext();
        h.blocks()
            .iter()
            .map(|b| {
                let image: Vec<u32> = b
                    .iter()
                    .map(|v| v.iter().zip(u).fold(0, |acc, (&x, &y)| ext.add(acc, ext.mul(x, y))))
                    .collect();
                b.len() - VectorWord { ext: ext.clone(), blocks: vec![image] }.rank_q()
            })
            .sum()
    }

    fn hyperplane_oracle_max(h: &SystemH) -> (usize, u64) {
        let qm = h.ext().order() as u64;
        let k = h.k();
        let mut best = 0;
        let mut count = 0;
        for code in 1..qm.pow(k as u32) {
            let u: Vec<u32> = (0..k).map(|i| (code / qm.pow(i as u32) % qm) as u32).collect();
            // one representative per line: last nonzero entry is 1
            if *u.iter().rev().find(|&&x| x != 0).unwrap() != 1 {
                continue;
            }
            count += 1;
            best = best.max(kernel_oracle(h, &u));
        }
        (best, count)
    }

    #[test]
    fn phi_of_c3() {
        let code = c3();
        let h = phi_code_to_system(&code).unwrap();
        assert_eq!(h.k(), 2);
        assert_eq!(h.block_dims(), vec![2, 4]);
        let (max, count) = hyperplane_oracle_max(&h);
        assert_eq!((max, count), (3, 10));
        let (m, _, visited) = max_intersection(&h, 1, B).unwrap();
        assert_eq!((m, visited), (3, 10));
    }

    #[test]
    fn psi_round_trip() {
        let code = c3();
        let back = psi_system_to_code(&phi_code_to_system(&code).unwrap()).unwrap();
        assert_eq!(back.shape(), code.shape());
        assert_eq!(back.k(), Some(2));
        assert_eq!(back.min_distance(B).unwrap(), 3);
        // the same F_q-space, not just the same parameters
        assert!(code.basis().iter().all(|w| back.contains_flat(w)));
    }

    #[test]
    fn reordered_basis_gives_equal_parameters() {
        let h = phi_code_to_system(&c3()).unwrap();
        let mut blocks = h.blocks().to_vec();
        blocks[1].reverse();
        blocks[0].swap(0, 1);
        let h2 = SystemH::new(h.ext(), 2, blocks).unwrap();
        let code = psi_system_to_code(&h2).unwrap();
        assert_eq!(code.min_distance(B).unwrap(), 3);
        assert_eq!(code.shape().cols, vec![2, 4]);
    }

    #[test]
    fn unit_vector_system_is_full_space() {
        let f9 = FieldSpec::galois(3).unwrap().extension(2, None).unwrap();
        // k = 2, H_1 = span_q(e1), H_2 = span_q(e2)
        let h = SystemH::new(&f9, 2, vec![vec![vec![1, 0]], vec![vec![0, 1]]]).unwrap();
        let code = psi_system_to_code(&h).unwrap();
        assert_eq!(code.dim(), 4);
        assert_eq!(code.min_distance(B).unwrap(), 1);
        assert!(SystemH::new(&f9, 2, vec![vec![vec![1, 0]], vec![vec![2, 0]]]).is_err());
    }

    #[test]
    fn design_checks_on_c3() {
        let h = phi_code_to_system(&c3()).unwrap();
        let ok = design_check(&h, DesignParams { s: 1, a: 3 }, B).unwrap();
        assert!(ok.verdict);
        assert_eq!(ok.max_sum, 3);
        let bad = design_check(&h, DesignParams { s: 1, a: 2 }, B).unwrap();
        assert!(!bad.verdict);
        assert_eq!(h.intersection_sum(&bad.witness_basis), 3);
        assert!(matches!(design_check(&h, DesignParams { s: 1, a: 3 }, 5), Err(Error::EnumerationBudgetExceeded { .. })));
    }

    #[test]
    fn degenerate_equal_lines() {
        let f9 = FieldSpec::galois(3).unwrap().extension(2, None).unwrap();
        let line = vec![vec![1u32, 0]];
        let blocks = vec![line.clone(), line.clone(), line, vec![vec![0, 1]]];
        let h = SystemH::new(&f9, 2, blocks).unwrap();
        // W = span(e1) meets the first three blocks
        assert_eq!(h.intersection_sum(&[vec![1, 0]]), 3);
        assert!(design_check(&h, DesignParams { s: 1, a: 3 }, B).unwrap().verdict);
        assert!(!design_check(&h, DesignParams { s: 1, a: 2 }, B).unwrap().verdict);
    }

    #[test]
    fn design_invariant_under_isomorphism() {
        let h = phi_code_to_system(&c3()).unwrap();
        let ext = h.ext().clone();
        let base_max = max_intersection(&h, 1, B).unwrap().0;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            // random invertible 2x2 over F_9
            let g = loop {
                let g: Vec<u32> = (0..4).map(|_| rng.gen_range(0..9)).collect();
                let det = ext.sub(ext.mul(g[0], g[3]), ext.mul(g[1], g[2]));
                if det != 0 {
                    break g;
                }
            };
            let apply = |v: &Vec<u32>| {
                vec![
                    ext.add(ext.mul(g[0], v[0]), ext.mul(g[1], v[1])),
                    ext.add(ext.mul(g[2], v[0]), ext.mul(g[3], v[1])),
                ]
            };
            let blocks: Vec<Vec<Vec<u32>>> = h.blocks().iter().map(|b| b.iter().map(apply).collect()).collect();
            let h2 = SystemH::new(&ext, 2, blocks).unwrap();
            assert_eq!(max_intersection(&h2, 1, B).unwrap().0, base_max);
            // change of F_q-basis in each block: add a multiple of one vector to another
            let mut blocks = h2.blocks().to_vec();
            for b in blocks.iter_mut() {
                if b.len() > 1 {
                    let first = b[0].clone();
                    let c = ext.from_base_coords(&[rng.gen_range(1..3)]);
                    for (x, &y) in b[1].iter_mut().zip(&first) {
                        *x = ext.add(*x, ext.mul(c, y));
                    }
                }
            }
            let h3 = SystemH::new(&ext, 2, blocks).unwrap();
            assert_eq!(max_intersection(&h3, 1, B).unwrap().0, base_max);
        }
    }

    #[test]
    fn hyperplane_correspondence_on_c3() {
        let r = theorem19_verify(&c3(), B).unwrap();
        assert_eq!((r.n_minus_d, r.hyperplane_max, r.hyperplanes), (3, 3, 10));
        assert!(r.system_matches_distance && r.design_holds && r.consistent);
        assert_eq!(code_design_list_size(&c3(), B).unwrap(), 27u32.into());
    }

    #[test]
    fn hyperplane_correspondence_other_instances() {
        // the extension-linear instances: q = 3, n = 2
        for t in [1usize, 3] {
            let code = construction2_code(&FieldSpec::galois(3).unwrap(), 2, t, false).unwrap();
            let r = theorem19_verify(&code, B).unwrap();
            assert!(r.system_matches_distance, "t={t}");
            let (oracle, _) = hyperplane_oracle_max(&phi_code_to_system(&code).unwrap());
            assert_eq!(oracle, r.hyperplane_max);
        }
        let q5 = construction2_code(&FieldSpec::galois(5).unwrap(), 2, 2, false).unwrap();
        assert!(matches!(theorem19_verify(&q5, B), Err(Error::NotExtensionLinear)));
    }

    #[test]
    fn non_linear_code_is_rejected() {
        let (_, code) = construction1_code(&FieldSpec::galois(3).unwrap(), 4, &[1], B).unwrap();
        assert!(matches!(phi_code_to_system(&code), Err(Error::NotExtensionLinear)));
    }

    #[test]
    fn periodic_checks() {
        let h = phi_code_to_system(&c3()).unwrap();
        let z = PeriodicSubspace::zero(h.ext(), 2, 2);
        let r = periodic_trace_check(&z, &h, 3, B).unwrap();
        assert_eq!((r.size, r.dim_s, r.linear, r.verdict), (1, 0, true, true));
        for seed in 0..5 {
            let t = PeriodicSubspace::synthetic(h.ext(), 2, 2, 1, 6, seed).unwrap();
            let r = periodic_trace_check(&t, &h, 3, B).unwrap();
            assert!(r.linear);
            assert!(r.dim_s <= 3, "seed {seed}: {r:?}");
        }
        let full = vec![vec![1u32, 0], vec![0, 1]];
        assert!(matches!(
            PeriodicSubspace::new(h.ext(), 2, 1, full, vec![vec![0, 0]; 2], vec![]),
            Err(Error::PreconditionViolation(_))
        ));
    }
}
