//! Counting and list-size bounds: Gaussian binomials and the `gamma_q`
//! constant, bounded compositions, rank-matrix counts, sphere intersections,
//! the generic list-size bound and the per-family closed forms.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sumrank::Family;

fn pow(q: u32, e: usize) -> BigUint {
    BigUint::from(q).pow(e as u32)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of `r`-dimensional subspaces of `F_q^n`.
pub fn gaussian_binomial(n: usize, r: usize, q: u32) -> Result<BigUint> {
    if r > n {
        return Err(Error::RankOutOfRange { r, max: n });
    }
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 1..=r {
        num *= pow(q, n - r + i) - 1u32;
        den *= pow(q, i) - 1u32;
    }
    Ok(num / den)
}

/// Two-sided rational enclosure of `gamma_q = prod_{i>=1} (1 - q^-i)^-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaEnclosure {
    pub q: u32,
    /// number of factors in the truncated product
    pub terms: usize,
    pub lower: BigRational,
    pub upper: BigRational,
}

impl GammaEnclosure {
    /// The partial product is a lower bound; the tail is at most
    /// `1 / (1 - sum_{i>K} q^-i)`, which gives the upper bound.
    pub fn with_terms(q: u32, terms: usize) -> Self {
        let qb = BigInt::from(q);
        let mut p = BigRational::one();
        for i in 1..=terms {
            let qi = qb.pow(i as u32);
            p *= BigRational::new(qi.clone(), qi - 1);
        }
        let tail = BigRational::new(BigInt::one(), (&qb - 1) * qb.pow(terms as u32));
        let upper = &p / (BigRational::one() - tail);
        GammaEnclosure { q, terms, lower: p, upper }
    }

    pub fn width(&self) -> BigRational {
        &self.upper - &self.lower
    }

    pub fn value(&self) -> f64 {
        let mid = (&self.lower + &self.upper) / BigRational::from_integer(2.into());
        ratio_f64(&mid)
    }

    /// `ceil(upper^e * x)`: a certified integer over-approximation of `gamma^e * x`.
    pub fn ceil_times(&self, e: usize, x: &BigUint) -> BigUint {
        let mut r = BigRational::from_integer(BigInt::from(x.clone()));
        for _ in 0..e {
            r *= &self.upper;
        }
        r.ceil().to_integer().to_biguint().expect("positive")
    }
}

fn ratio_f64(r: &BigRational) -> f64 {
    // scale to keep the conversion well inside f64 range
    let scaled = (r * BigRational::from_integer(BigInt::from(1u64 << 52))).floor().to_integer();
    scaled.to_f64().unwrap_or(f64::NAN) / (1u64 << 52) as f64
}

/// Truncated product for `gamma_q` with certified error below `tol`.
/// Returns the value and the number of factors used.
pub fn gamma_q(q: u32, tol: f64) -> (f64, usize) {
    let g = gamma_enclosure(q, tol);
    (g.value(), g.terms)
}

pub fn gamma_enclosure(q: u32, tol: f64) -> GammaEnclosure {
    assert!(q >= 2 && tol > 0.0, "gamma_q needs q >= 2 and tol > 0");
    let mut k = 1;
    loop {
        let g = GammaEnclosure::with_terms(q, k);
        if ratio_f64(&g.width()) < tol {
            return g;
        }
        k += 1;
    }
}

/// The enclosure used for every gamma-corrected bound in this crate.
pub fn gamma_certified(q: u32) -> GammaEnclosure {
    gamma_enclosure(q, 1e-12)
}

/// `[n r]_q < gamma_q q^{r(n-r)}`, decided exactly by refining the enclosure.
pub fn gaussian_bound_check(n: usize, r: usize, q: u32) -> Result<bool> {
    let exact = BigRational::from_integer(gaussian_binomial(n, r, q)?.into());
    let x = BigRational::from_integer(BigInt::from(pow(q, r * (n - r))));
    let mut terms = 8;
    loop {
        let g = GammaEnclosure::with_terms(q, terms);
        if exact < &g.lower * &x {
            return Ok(true);
        }
        if exact >= &g.upper * &x {
            return Ok(false);
        }
        terms *= 2;
    }
}

// ---- compositions ------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CompositionSpec {
    pub w: usize,
    pub t: usize,
    pub mu: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionMode {
    Dp,
    ClosedForm,
    UpperBound,
}

/// Number of `t`-tuples of integers in `0..=mu` summing to `w`.
pub fn compositions_count(spec: CompositionSpec, mode: CompositionMode) -> BigUint {
    let CompositionSpec { w, t, mu } = spec;
    if t == 0 {
        return if w == 0 { BigUint::one() } else { BigUint::zero() };
    }
    match mode {
        CompositionMode::Dp => {
            let mut row = vec![BigUint::zero(); w + 1];
            row[0] = BigUint::one();
            for _ in 0..t {
                let mut next = vec![BigUint::zero(); w + 1];
                for (s, v) in row.iter().enumerate() {
                    if v.is_zero() {
                        continue;
                    }
                    for part in 0..=mu.min(w - s) {
                        next[s + part] += v;
                    }
                }
                row = next;
            }
            row.swap_remove(w)
        }
        CompositionMode::ClosedForm => {
            let mut acc = BigInt::zero();
            for i in 0..=t {
                let Some(rest) = w.checked_sub((mu + 1) * i) else { break };
                let term = BigInt::from(binomial(t as u64, i as u64) * binomial((rest + t - 1) as u64, (t - 1) as u64));
                if i.is_odd() {
                    acc -= term;
                } else {
                    acc += term;
                }
            }
            acc.to_biguint().expect("count is nonnegative")
        }
        CompositionMode::UpperBound => binomial((w + t - 1) as u64, (t - 1) as u64),
    }
}

// ---- rank-matrix counts ------------------------------------------------

/// Number of `n x n_i` matrices of rank `r`.
pub fn rank_matrix_exact(n: usize, n_i: usize, r: usize, q: u32) -> Result<BigUint> {
    let max = n.min(n_i);
    if r > max {
        return Err(Error::RankOutOfRange { r, max });
    }
    let mut acc = gaussian_binomial(n_i, r, q)?;
    for j in 0..r {
        acc *= pow(q, n) - pow(q, j);
    }
    Ok(acc)
}

/// The uncorrected estimate `q^{r(n + n_i - r)}`.
pub fn rank_matrix_paper_bound(n: usize, n_i: usize, r: usize, q: u32) -> Result<BigUint> {
    let max = n.min(n_i);
    if r > max {
        return Err(Error::RankOutOfRange { r, max });
    }
    Ok(pow(q, r * (n + n_i - r)))
}

/// `exact < gamma_q q^{r(n+n_i-r)}`, decided with the certified lower end.
pub fn rank_matrix_below_gamma_bound(n: usize, n_i: usize, r: usize, q: u32) -> Result<bool> {
    let exact = BigRational::from_integer(rank_matrix_exact(n, n_i, r, q)?.into());
    let x = BigRational::from_integer(rank_matrix_paper_bound(n, n_i, r, q)?.into());
    Ok(exact < gamma_certified(q).lower * x)
}

/// `ceil(gamma_q q^{r(n+n_i-r)})` with the certified upper end.
pub fn rank_matrix_gamma_bound(n: usize, n_i: usize, r: usize, q: u32) -> Result<BigUint> {
    Ok(gamma_certified(q).ceil_times(1, &rank_matrix_paper_bound(n, n_i, r, q)?))
}

/// An instance where the exact count reaches the uncorrected estimate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankCountViolation {
    pub q: u32,
    pub n: usize,
    pub n_i: usize,
    pub r: usize,
    pub exact: String,
    pub bound: String,
}

/// Scans `n, n_i <= max_dim`, `1 <= r <= min(n, n_i)` for `exact >= q^{r(n+n_i-r)}`.
pub fn rank_count_violations(q: u32, max_dim: usize) -> Vec<RankCountViolation> {
    let mut out = Vec::new();
    for n in 1..=max_dim {
        for n_i in 1..=max_dim {
            for r in 1..=n.min(n_i) {
                let exact = rank_matrix_exact(n, n_i, r, q).expect("in range");
                let bound = rank_matrix_paper_bound(n, n_i, r, q).expect("in range");
                if exact >= bound {
                    out.push(RankCountViolation {
                        q,
                        n,
                        n_i,
                        r,
                        exact: exact.to_string(),
                        bound: bound.to_string(),
                    });
                }
            }
        }
    }
    out
}

// ---- sphere intersections and the list-size bound ----------------------

/// `C(r+t-1, t-1) q^{r(n + max n_i) - r^2/t}` with the fractional part of
/// `r^2/t` dropped from the subtracted term (rounding the bound up).
pub fn sphere_intersection_bound(r: usize, cols: &[usize], n: usize, q: u32) -> Result<BigUint> {
    let t = cols.len();
    let max: usize = cols.iter().map(|&c| c.min(n)).sum();
    if r > max {
        return Err(Error::RadiusOutOfRange { r, max });
    }
    if r == 0 {
        return Ok(BigUint::one());
    }
    let big = *cols.iter().max().expect("nonempty shape");
    let exp = r * (n + big) - (r * r) / t;
    Ok(binomial((r + t - 1) as u64, (t - 1) as u64) * pow(q, exp))
}

/// `gamma_q^t` times [`sphere_intersection_bound`], rounded up.
pub fn sphere_intersection_gamma_bound(r: usize, cols: &[usize], n: usize, q: u32) -> Result<BigUint> {
    let b = sphere_intersection_bound(r, cols, n, q)?;
    Ok(gamma_certified(q).ceil_times(cols.len(), &b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    Paper,
    GammaCorrected,
}

impl BoundVariant {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(BoundVariant::Paper),
            "gamma" | "gamma_corrected" | "gamma-corrected" => Ok(BoundVariant::GammaCorrected),
            _ => Err(Error::Parse(format!("unknown bound variant {s:?}"))),
        }
    }
}

/// `1 + (tau - floor((d-1)/2)) q^{tau (n + max n_i + t - 1)}`; the corrected
/// variant multiplies the second term by `gamma_q^t`.
pub fn theorem14_bound(n: usize, cols: &[usize], d: usize, tau: usize, q: u32, variant: BoundVariant) -> Result<BigUint> {
    let t = cols.len();
    if t < 2 {
        return Err(Error::PreconditionViolation("the list-size bound needs t > 1 blocks".into()));
    }
    let half = d.saturating_sub(1) / 2;
    if tau <= half {
        return Err(Error::PreconditionViolation(format!(
            "radius {tau} must exceed floor((d-1)/2) = {half}"
        )));
    }
    let big = *cols.iter().max().expect("nonempty shape");
    let term = BigUint::from(tau - half) * pow(q, tau * (n + big + t - 1));
    Ok(1u32 + match variant {
        BoundVariant::Paper => term,
        BoundVariant::GammaCorrected => gamma_certified(q).ceil_times(t, &term),
    })
}

// ---- family parameters and closed forms --------------------------------

/// Parameters of a named family, from the construction formulas.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyParams {
    pub family: Family,
    pub q: u32,
    /// matrix rows `n` of every block (also the extension degree `m`)
    pub rows: usize,
    pub cols: Vec<usize>,
    pub t: usize,
    pub d: usize,
    /// `N - d` from the distance formula, kept signed so the identity with
    /// the closed forms can be checked outside the admissible range too
    pub n_minus_d: i64,
    pub dim_q: usize,
    /// `dim_q / rows`, the dimension over `F_{q^rows}` when the code is linear there
    pub k: usize,
    pub extension_linear: bool,
    pub n_total: usize,
    /// whether the family exists at these parameters
    pub admissible: bool,
    pub note: Option<String>,
}

/// Family parameters; `n` is ignored by the two families built at `n = 2`.
pub fn family_params(family: Family, q: u32, n: usize, t: usize) -> Result<FamilyParams> {
    if t == 0 {
        return Err(Error::InvalidDimension("t must be at least 1".into()));
    }
    let (rows, cols, d, dim_q, linear, admissible, note) = match family {
        Family::C1Bar => (2, vec![4; t], 2i64, 4 + 8 * (t - 1), true, true, None),
        Family::C2Bar => (
            2,
            vec![8; t],
            2,
            8 + 16 * (t - 1),
            false,
            true,
            Some("span is not closed under F_{q^2} when f != g".to_string()),
        ),
        Family::C3Bar => {
            let mut cols = vec![n; t - 1];
            cols.push(2 * n);
            (n, cols, (t * (n - 1) + 1) as i64, 2 * n, true, n >= 2, None)
        }
        Family::C4Bar => {
            let mut cols = vec![n; t - 1];
            cols.push(4 * n);
            let ok = n >= 4;
            let note = (!ok).then(|| format!("components of distance n-3 need n >= 4, got n = {n}"));
            (n, cols, t as i64 * (n as i64 - 3) + 3, 4 * n, true, ok, note)
        }
    };
    let n_total: usize = cols.iter().sum();
    Ok(FamilyParams {
        family,
        q,
        rows,
        cols,
        t,
        d: d.max(0) as usize,
        n_minus_d: n_total as i64 - d,
        dim_q,
        k: dim_q / rows,
        extension_linear: linear,
        n_total,
        admissible,
        note,
    })
}

/// Each family's published list-size closed form, as `(coefficient,
/// exponent)` of `1 + coefficient * q^exponent`. For `C2bar` this is the
/// prose formula's exponent `t(5+t)`; see [`table_closed_form_c2`].
pub fn corollary_closed_form(family: Family, n: usize, t: usize) -> (i64, usize) {
    let (t_i, n_i) = (t as i64, n as i64);
    match family {
        Family::C1Bar | Family::C2Bar => (t_i, t * (5 + t)),
        Family::C3Bar => (t_i - Integer::div_floor(&(t_i * (n_i - 1)), &2), t * (3 * n + t - 1)),
        Family::C4Bar => (t_i - Integer::div_floor(&(t_i * (n_i - 3) + 2), &2), t * (5 * n + t - 1)),
    }
}

/// The table's closed form for `C2bar`: exponent `t(9+t)`.
pub fn table_closed_form_c2(t: usize) -> (i64, usize) {
    (t as i64, t * (9 + t))
}

pub fn closed_form_value(q: u32, coeff: i64, exp: usize) -> Option<BigUint> {
    (coeff >= 0).then(|| 1u32 + BigUint::from(coeff as u64) * pow(q, exp))
}

pub fn closed_form_text(coeff: i64, q: u32, exp: usize) -> String {
    format!("1+{coeff}*{q}^{exp}")
}

/// The design-based list size `q^{N-d}`.
pub fn design_list_size(n_total: usize, d: usize, q: u32) -> BigUint {
    pow(q, n_total.saturating_sub(d))
}

/// `q^{N-d}` from the family's distance formula.
pub fn family_design_list_size(p: &FamilyParams) -> Option<BigUint> {
    (p.n_minus_d >= 0).then(|| pow(p.q, p.n_minus_d as usize))
}

/// Exponent of each family's design bound: `4t-2`, `8t-2`, `n+t-1`, `3(n+t-1)`.
pub fn design_closed_form_exponent(family: Family, n: usize, t: usize) -> usize {
    match family {
        Family::C1Bar => 4 * t - 2,
        Family::C2Bar => 8 * t - 2,
        Family::C3Bar => n + t - 1,
        Family::C4Bar => 3 * (n + t - 1),
    }
}

/// Bound summary for one family instance at radius `tau`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub family: Family,
    pub q: u32,
    pub n: usize,
    pub t: usize,
    pub shape: String,
    pub d: usize,
    pub k: usize,
    pub n_total: usize,
    pub tau: usize,
    /// whether the family exists at these parameters
    pub admissible: bool,
    pub precondition_ok: bool,
    pub paper_literal_bound: Option<String>,
    pub gamma_corrected_bound: Option<String>,
    /// the family's published formula, instantiated
    pub closed_form: String,
    pub closed_form_value: Option<String>,
    /// whether the recomputed bound equals the printed closed form
    pub closed_form_agrees: bool,
    pub brute_force_l: Option<u64>,
    pub design_bound: String,
    pub discrepancy: Option<String>,
    pub status: String,
}

fn shape_text(rows: usize, cols: &[usize]) -> String {
    let parts: Vec<String> = cols.iter().map(|c| format!("{rows}x{c}")).collect();
    format!("({})", parts.join("|"))
}

/// Report with the admissibility and radius preconditions recorded rather
/// than raised.
pub fn bound_report(family: Family, q: u32, n: usize, t: usize, tau: Option<usize>) -> Result<BoundReport> {
    let p = family_params(family, q, n, t)?;
    let tau = tau.unwrap_or(t);
    let (coeff, exp) = corollary_closed_form(family, p.rows, t);
    let closed = closed_form_value(q, coeff, exp);
    let half = p.d.saturating_sub(1) / 2;
    let radius_ok = half < tau && tau <= p.n_total.saturating_sub(p.k);
    let precondition_ok = p.admissible && radius_ok && t > 1;
    let (paper, gamma) = if precondition_ok {
        (
            Some(theorem14_bound(p.rows, &p.cols, p.d, tau, q, BoundVariant::Paper)?),
            Some(theorem14_bound(p.rows, &p.cols, p.d, tau, q, BoundVariant::GammaCorrected)?),
        )
    } else {
        (None, None)
    };
    let agrees = match (&paper, &closed) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    };
    let discrepancy = match family {
        Family::C2Bar => {
            let (tc, te) = table_closed_form_c2(t);
            Some(format!(
                "prose formula gives {}, tabulated formula gives {}; the generic bound gives the tabulated exponent",
                closed_form_text(coeff, q, exp),
                closed_form_text(tc, q, te)
            ))
        }
        _ => None,
    };
    let status = if precondition_ok { "ok" } else { "n/a (precondition)" }.to_string();
    Ok(BoundReport {
        family,
        q,
        n: p.rows,
        t,
        shape: shape_text(p.rows, &p.cols),
        d: p.d,
        k: p.k,
        n_total: p.n_total,
        tau,
        admissible: p.admissible,
        precondition_ok,
        paper_literal_bound: paper.map(|b| b.to_string()),
        gamma_corrected_bound: gamma.map(|b| b.to_string()),
        closed_form: closed_form_text(coeff, q, exp),
        closed_form_value: closed.map(|b| b.to_string()),
        closed_form_agrees: agrees,
        brute_force_l: None,
        design_bound: family_design_list_size(&p).map(|b| b.to_string()).unwrap_or_else(|| "-".into()),
        discrepancy,
        status,
    })
}

/// Strict form: precondition failures are errors.
pub fn corollary_bound(family: Family, q: u32, n: usize, t: usize) -> Result<BoundReport> {
    let p = family_params(family, q, n, t)?;
    if !p.admissible {
        return Err(Error::PreconditionViolation(p.note.unwrap_or_default()));
    }
    let r = bound_report(family, q, n, t, None)?;
    if !r.precondition_ok {
        let half = p.d.saturating_sub(1) / 2;
        return Err(Error::PreconditionViolation(format!(
            "{}: need floor((d-1)/2) = {half} < tau = {} <= N-k = {}",
            family.name(),
            r.tau,
            p.n_total as i64 - p.k as i64
        )));
    }
    Ok(r)
}

/// One row per family.
pub fn table1_rows(q: u32, n: usize, t: usize) -> Result<Vec<BoundReport>> {
    Family::ALL.iter().map(|&f| bound_report(f, q, n, t, None)).collect()
}

pub const TABLE1_COLUMNS: [&str; 9] =
    ["family", "params", "d", "tau", "paper_bound", "gamma_bound", "brute_force_L", "design_bound", "status"];

fn row_cells(r: &BoundReport) -> Vec<String> {
    let opt = |o: &Option<String>| o.clone().unwrap_or_else(|| "-".into());
    let paper = match &r.paper_literal_bound {
        Some(b) => format!("{} = {b}", r.closed_form_for_row()),
        None => format!("{} (not applicable)", r.closed_form_for_row()),
    };
    vec![
        r.family.name().to_string(),
        format!("q={} n={} t={} shape={} k={} N={}", r.q, r.n, r.t, r.shape, r.k, r.n_total),
        if r.admissible { r.d.to_string() } else { "-".into() },
        r.tau.to_string(),
        paper,
        opt(&r.gamma_corrected_bound),
        r.brute_force_l.map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
        r.design_bound.clone(),
        r.status.clone() + &r.discrepancy.as_ref().map(|_| "; discrepancy flagged").unwrap_or_default(),
    ]
}

impl BoundReport {
    /// The closed form as printed in the comparison table.
    pub fn closed_form_for_row(&self) -> String {
        if self.family == Family::C2Bar {
            let (c, e) = table_closed_form_c2(self.t);
            closed_form_text(c, self.q, e)
        } else {
            self.closed_form.clone()
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn table1_csv(rows: &[BoundReport]) -> String {
    let mut out = TABLE1_COLUMNS.join(",") + "\n";
    for r in rows {
        let cells: Vec<String> = row_cells(r).iter().map(|c| csv_escape(c)).collect();
        out += &cells.join(",");
        out.push('\n');
    }
    out
}

pub fn table1_markdown(rows: &[BoundReport]) -> String {
    let mut out = format!("| {} |\n", TABLE1_COLUMNS.join(" | "));
    out += &format!("|{}\n", "---|".repeat(TABLE1_COLUMNS.len()));
    for r in rows {
        out += &format!("| {} |\n", row_cells(r).join(" | "));
    }
    for r in rows.iter().filter(|r| r.discrepancy.is_some()) {
        out += &format!("\n{}: {}\n", r.family.name(), r.discrepancy.as_ref().unwrap());
    }
    out
}
