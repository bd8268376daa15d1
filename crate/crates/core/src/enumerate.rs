//! Exhaustive enumeration of F_q-linear combinations of flat vectors.
//!
//! Words are visited with an odometer over the coefficient digits; each
//! step updates the running word by a precomputed difference vector, so a
//! step costs one vector addition per changed digit. Work is split across
//! rayon tasks by fixing the top digits, and results are folded in task
//! order, which keeps every reduction (including "first witness") stable
//! regardless of the thread count.

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldSpec;

/// Default cap on enumerated objects per check.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Environment variable selecting the worker count.
pub const THREADS_ENV: &str = "SUMRANK_LAB_THREADS";

#[cfg(not(target_arch = "wasm32"))]
fn pool() -> &'static rayon::ThreadPool {
    static POOL: std::sync::OnceLock<rayon::ThreadPool> = std::sync::OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n > 0)
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
    })
}

/// Runs `op` on the shared worker pool.
#[cfg(not(target_arch = "wasm32"))]
pub fn install<R: Send>(op: impl FnOnce() -> R + Send) -> R {
    pool().install(op)
}

// no threads in the browser; rayon runs everything on the calling thread
#[cfg(target_arch = "wasm32")]
pub fn install<R: Send>(op: impl FnOnce() -> R + Send) -> R {
    op()
}

/// Which combinations to visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// All `q^k` combinations including zero.
    All,
    /// One representative per nonzero projective class: the last nonzero
    /// coefficient equals 1. `(q^k - 1)/(q - 1)` words.
    Projective,
}

pub struct Scanner<'a> {
    field: &'a FieldSpec,
    basis: &'a [Vec<u32>],
    len: usize,
    mode: Mode,
    budget: u64,
    /// step[i][c] = (succ(c) - c) * basis[i], with succ in index order
    step: Vec<Vec<Vec<u32>>>,
}

struct Task {
    /// leading position for projective mode (coefficient fixed to 1), or k
    lead: usize,
    /// fixed digits just below `lead` (highest first)
    prefix: Vec<u32>,
}

impl<'a> Scanner<'a> {
    pub fn new(field: &'a FieldSpec, basis: &'a [Vec<u32>], mode: Mode, budget: u64) -> Result<Self> {
        let len = basis.first().map_or(0, |b| b.len());
        if basis.iter().any(|b| b.len() != len) {
            return Err(Error::DimensionMismatch("basis vectors of different lengths".into()));
        }
        let q = field.order();
        let step = basis
            .iter()
            .map(|b| {
                (0..q)
                    .map(|c| {
                        let next = (c + 1) % q;
                        let d = field.sub(next, c);
                        b.iter().map(|&x| field.mul(d, x)).collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Scanner { field, basis, len, mode, budget, step })
    }

    pub fn word_len(&self) -> usize {
        self.len
    }

    /// Number of visited words.
    pub fn count(&self) -> BigUint {
        let q = BigUint::from(self.field.order());
        let total = q.pow(self.basis.len() as u32);
        match self.mode {
            Mode::All => total,
            Mode::Projective => (total - 1u32) / (q - 1u32),
        }
    }

    fn check_budget(&self) -> Result<()> {
        let c = self.count();
        if c > BigUint::from(self.budget) {
            return Err(Error::EnumerationBudgetExceeded { needed: c.to_string(), budget: self.budget });
        }
        Ok(())
    }

    fn tasks(&self) -> Vec<Task> {
        let k = self.basis.len();
        let q = self.field.order();
        let split = |free: usize| -> Vec<Vec<u32>> {
            let s = free.min(if q <= 5 { 3 } else { 2 });
            let mut out = vec![vec![]];
            for _ in 0..s {
                out = out
                    .into_iter()
                    .flat_map(|p| {
                        (0..q).map(move |c| {
                            let mut v = p.clone();
                            v.push(c);
                            v
                        })
                    })
                    .collect();
            }
            out
        };
        match self.mode {
            Mode::All => split(k).into_iter().map(|prefix| Task { lead: k, prefix }).collect(),
            Mode::Projective => (0..k)
                .flat_map(|lead| split(lead).into_iter().map(move |prefix| Task { lead, prefix }))
                .collect(),
        }
    }

    /// Visits every word; `visit(acc, word, coeffs)`. Accumulators from
    /// tasks are merged left to right with `reduce`.
    pub fn run<A, I, V, R>(&self, init: I, visit: V, reduce: R) -> Result<A>
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        V: Fn(&mut A, &[u32], &[u32]) + Sync + Send,
        R: Fn(A, A) -> A + Sync + Send,
    {
        self.check_budget()?;
        let tasks = self.tasks();
        let out = install(|| {
            tasks
                .par_iter()
                .map(|task| {
                    let mut acc = init();
                    self.run_task(task, &mut acc, &visit);
                    acc
                })
                .reduce_with(&reduce)
        });
        Ok(out.unwrap_or_else(init))
    }

    fn run_task<A, V>(&self, task: &Task, acc: &mut A, visit: &V)
    where
        V: Fn(&mut A, &[u32], &[u32]),
    {
        let f = self.field;
        let k = self.basis.len();
        let mut coeffs = vec![0u32; k];
        let mut word = vec![0u32; self.len];
        let add_into = |w: &mut [u32], c: u32, b: &[u32]| {
            if c != 0 {
                for (x, &y) in w.iter_mut().zip(b) {
                    *x = f.add(*x, f.mul(c, y));
                }
            }
        };
        if task.lead < k {
            coeffs[task.lead] = 1;
            add_into(&mut word, 1, &self.basis[task.lead]);
        }
        let top = task.lead;
        for (i, &c) in task.prefix.iter().enumerate() {
            let pos = top - 1 - i;
            coeffs[pos] = c;
            add_into(&mut word, c, &self.basis[pos]);
        }
        let free = top - task.prefix.len();
        let q = f.order();
        loop {
            visit(acc, &word, &coeffs);
            // odometer over digits 0..free
            let mut i = 0;
            loop {
                if i == free {
                    return;
                }
                let c = coeffs[i];
                for (x, &d) in word.iter_mut().zip(&self.step[i][c as usize]) {
                    *x = f.add(*x, d);
                }
                coeffs[i] = (c + 1) % q;
                if coeffs[i] != 0 {
                    break;
                }
                i += 1;
            }
        }
    }
}

/// Sum-rank block layout of a flat word: `(rows, cols)` per block, blocks
/// stored consecutively in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub blocks: Vec<(usize, usize)>,
}

impl Layout {
    pub fn single(rows: usize, cols: usize) -> Self {
        Layout { blocks: vec![(rows, cols)] }
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|(r, c)| r * c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest possible weight.
    pub fn max_weight(&self) -> usize {
        self.blocks.iter().map(|&(r, c)| r.min(c)).sum()
    }

    /// Sum of block ranks; `scratch` is reused between calls.
    pub fn weight(&self, f: &FieldSpec, word: &[u32], scratch: &mut Vec<u32>) -> usize {
        let mut off = 0;
        let mut total = 0;
        for &(r, c) in &self.blocks {
            let sz = r * c;
            let block = &word[off..off + sz];
            off += sz;
            if block.iter().all(|&x| x == 0) {
                continue;
            }
            scratch.clear();
            scratch.extend_from_slice(block);
            total += crate::matrix::rank_in_place(f, r, c, scratch);
        }
        total
    }
}

/// Weight statistics of a linear code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightStats {
    pub min_weight: usize,
    pub max_weight: usize,
    /// coefficients of the first minimum-weight word in scan order
    pub witness: Vec<u32>,
    /// number of nonzero codewords of each weight
    pub distribution: Vec<BigUint>,
    pub words_scanned: BigUint,
}

/// Minimum/maximum weight and weight distribution over all nonzero words,
/// scanning one word per projective class.
pub fn weight_stats(
    field: &FieldSpec,
    basis: &[Vec<u32>],
    layout: &Layout,
    budget: u64,
) -> Result<WeightStats> {
    if basis.is_empty() {
        return Err(Error::InvalidDimension("empty basis".into()));
    }
    if layout.len() != basis[0].len() {
        return Err(Error::ShapeMismatch("layout does not match word length".into()));
    }
    let scanner = Scanner::new(field, basis, Mode::Projective, budget)?;
    let wmax = layout.max_weight();
    struct Acc {
        min: usize,
        max: usize,
        witness: Vec<u32>,
        dist: Vec<u64>,
        scratch: Vec<u32>,
    }
    let acc = scanner.run(
        || Acc { min: usize::MAX, max: 0, witness: vec![], dist: vec![0; wmax + 1], scratch: vec![] },
        |a, word, coeffs| {
            let w = layout.weight(field, word, &mut a.scratch);
            a.dist[w] += 1;
            if w < a.min {
                a.min = w;
                a.witness = coeffs.to_vec();
            }
            a.max = a.max.max(w);
        },
        |mut a, b| {
            if b.min < a.min {
                a.min = b.min;
                a.witness = b.witness;
            }
            a.max = a.max.max(b.max);
            for (x, y) in a.dist.iter_mut().zip(b.dist) {
                *x += y;
            }
            a
        },
    )?;
    let scale = BigUint::from(field.order() - 1);
    Ok(WeightStats {
        min_weight: acc.min,
        max_weight: acc.max,
        witness: acc.witness,
        distribution: acc.dist.iter().map(|&c| BigUint::from(c) * &scale).collect(),
        words_scanned: scanner.count(),
    })
}

/// `sum c_i basis_i`.
pub fn combine(field: &FieldSpec, basis: &[Vec<u32>], coeffs: &[u32]) -> Vec<u32> {
    let len = basis.first().map_or(0, |b| b.len());
    let mut out = vec![0u32; len];
    for (b, &c) in basis.iter().zip(coeffs) {
        if c == 0 {
            continue;
        }
        for (x, &y) in out.iter_mut().zip(b) {
            *x = field.add(*x, field.mul(c, y));
        }
    }
    out
}

/// Rank of a set of flat vectors.
pub fn span_rank(field: &FieldSpec, vectors: &[Vec<u32>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let cols = vectors[0].len();
    let mut buf: Vec<u32> = vectors.concat();
    crate::matrix::rank_in_place(field, vectors.len(), cols, &mut buf)
}
