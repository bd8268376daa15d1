//! Finite fields of odd characteristic and polynomials over them.
//!
//! A [`FieldSpec`] is either a prime field `F_p` or an extension of another
//! `FieldSpec` by a monic irreducible modulus. Elements are plain `u32`
//! indices: an element of an extension of degree `n` over a base of order
//! `B` with coordinates `c_0 + c_1 x + ... + c_{n-1} x^{n-1}` has index
//! `c_0 + c_1 B + ... + c_{n-1} B^{n-1}`. Base-field elements keep their
//! index when embedded, so `F_q` sits inside `F_{q^n}` as `0..q`.
//!
//! Multiplication goes through log/exp tables, addition through a table for
//! small orders and digit-wise otherwise. Everything is immutable once built
//! and cheap to clone (`Arc`).

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest field order we are willing to tabulate.
const MAX_ORDER: u64 = 1 << 22;
/// Orders up to this get a full addition table.
const ADD_TABLE_LIMIT: u32 = 1024;

#[derive(Clone)]
pub struct FieldSpec(Arc<FieldInner>);

struct FieldInner {
    p: u32,
    order: u32,
    /// Degree over the prime field.
    degree: usize,
    /// The field this one was built over (None for prime fields).
    base: Option<FieldSpec>,
    /// Monic modulus over `base`, constant term first.
    modulus: Option<Vec<u32>>,
    exp: Vec<u32>,
    log: Vec<u32>,
    add: Option<Vec<u32>>,
    neg: Vec<u32>,
}

impl FieldSpec {
    /// The prime field `F_p`, p an odd prime.
    pub fn prime(p: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NonPrimeCharacteristic(p));
        }
        if p == 2 {
            return Err(Error::EvenCharacteristic);
        }
        let order = p;
        let neg = (0..p).map(|a| (p - a) % p).collect();
        let root = (2..p)
            .find(|&g| mod_order(g as u64, p as u64) == (p - 1) as u64)
            .unwrap_or(1);
        let mut exp = Vec::with_capacity(2 * (p as usize - 1));
        let mut log = vec![0u32; p as usize];
        let mut x = 1u64;
        for i in 0..(p - 1) {
            exp.push(x as u32);
            log[x as usize] = i;
            x = x * root as u64 % p as u64;
        }
        let doubled = exp.clone();
        exp.extend(doubled);
        Ok(FieldSpec(Arc::new(FieldInner {
            p,
            order,
            degree: 1,
            base: None,
            modulus: None,
            exp,
            log,
            add: None,
            neg,
        })))
    }

    /// `F_{p^e}` over the prime field. With no modulus the lexicographically
    /// least primitive polynomial of degree `e` is used.
    pub fn make(p: u32, e: usize, modulus: Option<&Polynomial>) -> Result<Self> {
        let prime = FieldSpec::prime(p)?;
        if e == 1 && modulus.is_none() {
            return Ok(prime);
        }
        prime.extension(e, modulus)
    }

    /// The canonical field with `q` elements.
    pub fn galois(q: u32) -> Result<Self> {
        let (p, e) = prime_power(q as u64).ok_or(Error::NonPrimeCharacteristic(q))?;
        FieldSpec::make(p as u32, e, None)
    }

    /// Extension of degree `n` over `self`. The modulus must be monic,
    /// irreducible and of degree `n`; without one the first primitive
    /// polynomial in lexicographic order is chosen.
    pub fn extension(&self, n: usize, modulus: Option<&Polynomial>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("extension degree 0".into()));
        }
        let order = (self.order() as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
        if order > MAX_ORDER {
            return Err(Error::FieldTooLarge(order));
        }
        let modulus = match modulus {
            Some(m) => {
                if !m.field().same(self) {
                    return Err(Error::FieldMismatch);
                }
                if m.degree() != Some(n) {
                    return Err(Error::DimensionMismatch(format!(
                        "modulus {m} has degree {:?}, expected {n}",
                        m.degree()
                    )));
                }
                if !m.is_monic() {
                    return Err(Error::NonMonicPolynomial(m.to_string()));
                }
                if !poly_is_irreducible(m)? {
                    return Err(Error::ReducibleModulus(m.to_string()));
                }
                m.clone()
            }
            None => find_primitive_poly(self, n, 0)?,
        };
        Ok(FieldSpec(Arc::new(build_extension(self, modulus.coeffs.clone(), order as u32))))
    }

    pub fn characteristic(&self) -> u32 {
        self.0.p
    }

    pub fn order(&self) -> u32 {
        self.0.order
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn base(&self) -> Option<&FieldSpec> {
        self.0.base.as_ref()
    }

    /// Degree over the base this field was built on.
    pub fn relative_degree(&self) -> usize {
        self.0.modulus.as_ref().map_or(1, |m| m.len() - 1)
    }

    pub fn modulus(&self) -> Option<Polynomial> {
        match (&self.0.base, &self.0.modulus) {
            (Some(b), Some(m)) => Some(Polynomial::new(b, m.clone())),
            _ => None,
        }
    }

    pub fn is_prime_field(&self) -> bool {
        self.0.base.is_none()
    }

    /// Structural equality; fields built independently with the same tower
    /// and moduli compare equal.
    pub fn same(&self, other: &FieldSpec) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        self.0.p == other.0.p
            && self.0.order == other.0.order
            && self.0.modulus == other.0.modulus
            && match (&self.0.base, &other.0.base) {
                (None, None) => true,
                (Some(a), Some(b)) => a.same(b),
                _ => false,
            }
    }

    pub fn element(&self, value: u32) -> Result<FieldElement> {
        if value >= self.order() {
            return Err(Error::Parse(format!("{value} is not an element of F_{}", self.order())));
        }
        Ok(FieldElement { field: self.clone(), value })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { field: self.clone(), value: 0 }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement { field: self.clone(), value: 1 }
    }

    /// All elements in canonical index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order()).map(move |v| FieldElement { field: self.clone(), value: v })
    }

    /// The element `x` (the class of the variable) for extensions, i.e. a root
    /// of the modulus.
    pub fn generator_root(&self) -> u32 {
        match &self.0.base {
            Some(b) if self.relative_degree() > 1 => b.order(),
            // degree-one extension x + a0: the root is -a0
            Some(b) => b.neg(self.0.modulus.as_ref().unwrap()[0]),
            None => self.0.exp[1],
        }
    }

    // ---- raw arithmetic on indices -------------------------------------

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let f = &*self.0;
        if f.base.is_none() {
            let s = a + b;
            if s >= f.p {
                s - f.p
            } else {
                s
            }
        } else if let Some(t) = &f.add {
            t[(a * f.order + b) as usize]
        } else {
            self.add_digits(a, b)
        }
    }

    fn add_digits(&self, mut a: u32, mut b: u32) -> u32 {
        let base = self.0.base.as_ref().unwrap();
        let bo = base.order();
        let mut out = 0;
        let mut scale = 1;
        for _ in 0..self.relative_degree() {
            out += base.add(a % bo, b % bo) * scale;
            a /= bo;
            b /= bo;
            scale *= bo;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.0.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let f = &*self.0;
        f.exp[(f.log[a as usize] + f.log[b as usize]) as usize]
    }

    /// Inverse of a nonzero element. Panics on zero; use [`FieldSpec::checked_inv`]
    /// where zero is possible.
    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        assert!(a != 0, "inverse of zero");
        let f = &*self.0;
        let m = f.order - 1;
        f.exp[((m - f.log[a as usize]) % m) as usize]
    }

    pub fn checked_inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            Err(Error::DivisionByZero)
        } else {
            Ok(self.inv(a))
        }
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32> {
        Ok(self.mul(a, self.checked_inv(b)?))
    }

    /// `a^e` for any integer exponent; negative exponents need `a != 0`.
    pub fn pow(&self, a: u32, e: i64) -> Result<u32> {
        if a == 0 {
            return match e.cmp(&0) {
                std::cmp::Ordering::Less => Err(Error::DivisionByZero),
                std::cmp::Ordering::Equal => Ok(1),
                std::cmp::Ordering::Greater => Ok(0),
            };
        }
        let m = (self.0.order - 1) as i64;
        let l = self.0.log[a as usize] as i64;
        let idx = (l * e.rem_euclid(m)).rem_euclid(m);
        Ok(self.0.exp[idx as usize])
    }

    /// Discrete log to the table generator (nonzero `a`).
    pub fn log(&self, a: u32) -> u32 {
        self.0.log[a as usize]
    }

    /// The table generator raised to `i`.
    pub fn exp(&self, i: u32) -> u32 {
        self.0.exp[(i % (self.0.order - 1)) as usize]
    }

    /// Coordinates of `a` over the base field (constant term first).
    pub fn base_coords(&self, mut a: u32) -> Vec<u32> {
        match &self.0.base {
            None => vec![a],
            Some(b) => {
                let bo = b.order();
                (0..self.relative_degree())
                    .map(|_| {
                        let d = a % bo;
                        a /= bo;
                        d
                    })
                    .collect()
            }
        }
    }

    /// Inverse of [`FieldSpec::base_coords`].
    pub fn from_base_coords(&self, coords: &[u32]) -> u32 {
        let bo = self.0.base.as_ref().map_or(self.order(), |b| b.order());
        coords.iter().rev().fold(0, |acc, &c| acc * bo + c)
    }

    /// Short name like `F_9`.
    pub fn name(&self) -> String {
        format!("F_{}", self.order())
    }
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.modulus() {
            None => write!(f, "F_{}", self.order()),
            Some(m) => write!(f, "F_{} = {}[x]/({})", self.order(), m.field().name(), m),
        }
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}

impl Eq for FieldSpec {}

fn build_extension(base: &FieldSpec, modulus: Vec<u32>, order: u32) -> FieldInner {
    let n = modulus.len() - 1;
    let bo = base.order();
    let digits = |mut a: u32| -> Vec<u32> {
        (0..n)
            .map(|_| {
                let d = a % bo;
                a /= bo;
                d
            })
            .collect()
    };
    let undigits = |d: &[u32]| -> u32 { d.iter().rev().fold(0, |acc, &c| acc * bo + c) };
    // schoolbook product modulo the (monic) modulus
    let slow_mul = |a: u32, b: u32| -> u32 {
        let (da, db) = (digits(a), digits(b));
        let mut prod = vec![0u32; 2 * n];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = base.add(prod[i + j], base.mul(x, y));
            }
        }
        for k in (n..2 * n).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for (i, &m) in modulus[..n].iter().enumerate() {
                prod[k - n + i] = base.sub(prod[k - n + i], base.mul(c, m));
            }
        }
        undigits(&prod[..n])
    };
    let slow_add = |a: u32, b: u32| -> u32 {
        let s: Vec<u32> = digits(a).iter().zip(digits(b)).map(|(&x, y)| base.add(x, y)).collect();
        undigits(&s)
    };
    let neg: Vec<u32> = (0..order)
        .map(|a| undigits(&digits(a).iter().map(|&d| base.neg(d)).collect::<Vec<_>>()))
        .collect();

    let group = order - 1;
    let mut exp = Vec::with_capacity(2 * group as usize);
    let mut log = vec![0u32; order as usize];
    // x is the natural candidate; fall back to a search when the modulus is
    // irreducible but not primitive.
    let first = if n > 1 { bo } else { base.neg(modulus[0]) };
    let candidates = std::iter::once(first).chain(1..order);
    for g in candidates {
        if g == 0 {
            continue;
        }
        exp.clear();
        let mut x = 1u32;
        let mut ok = true;
        for i in 0..group {
            if i > 0 && x == 1 {
                ok = false;
                break;
            }
            exp.push(x);
            log[x as usize] = i;
            x = slow_mul(x, g);
        }
        if ok && x == 1 {
            break;
        }
    }
    let doubled = exp.clone();
    exp.extend(doubled);

    let add = (order <= ADD_TABLE_LIMIT).then(|| {
        let mut t = vec![0u32; (order * order) as usize];
        for a in 0..order {
            for b in 0..order {
                t[(a * order + b) as usize] = slow_add(a, b);
            }
        }
        t
    });

    FieldInner {
        p: base.characteristic(),
        order,
        degree: base.degree() * n,
        base: Some(base.clone()),
        modulus: Some(modulus),
        exp,
        log,
        add,
        neg,
    }
}

// ---- elements ---------------------------------------------------------

/// A field element bound to its field. Mixed-field arithmetic is an error.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: FieldSpec,
    value: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Inv,
    Pow(i64),
}

impl FieldElement {
    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    /// Coordinates over the prime field, constant term first.
    pub fn coeffs(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.field.degree());
        let mut v = self.value;
        for _ in 0..self.field.degree() {
            out.push(v % self.field.characteristic());
            v /= self.field.characteristic();
        }
        out
    }

    fn check(&self, other: &FieldElement) -> Result<()> {
        if self.field.same(&other.field) {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    fn wrap(&self, value: u32) -> FieldElement {
        FieldElement { field: self.field.clone(), value }
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(self.wrap(self.field.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(self.wrap(self.field.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(self.wrap(self.field.mul(self.value, other.value)))
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(self.wrap(self.field.div(self.value, other.value)?))
    }

    pub fn inv(&self) -> Result<FieldElement> {
        Ok(self.wrap(self.field.checked_inv(self.value)?))
    }

    pub fn pow(&self, e: i64) -> Result<FieldElement> {
        Ok(self.wrap(self.field.pow(self.value, e)?))
    }

    pub fn neg(&self) -> FieldElement {
        self.wrap(self.field.neg(self.value))
    }

    pub fn is_square(&self) -> bool {
        if self.value == 0 {
            return true;
        }
        self.field.log(self.value) % 2 == 0
    }
}

/// Binary/unary field arithmetic dispatched on `op`; `b` is ignored by `Inv`
/// and `Pow`.
pub fn field_arith(a: &FieldElement, b: &FieldElement, op: ArithOp) -> Result<FieldElement> {
    match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b),
        ArithOp::Inv => a.inv(),
        ArithOp::Pow(e) => a.pow(e),
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.value, self.field.name())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// The least non-square of `F_q^*` in index order.
pub fn nonsquare_z(field: &FieldSpec) -> FieldElement {
    let z = (1..field.order())
        .find(|&a| field.pow(a, ((field.order() - 1) / 2) as i64).unwrap() != 1)
        .expect("odd q always has non-squares");
    FieldElement { field: field.clone(), value: z }
}

// ---- polynomials ------------------------------------------------------

/// Polynomial over a [`FieldSpec`], coefficients constant term first, with
/// no trailing zeros (the zero polynomial has no coefficients).
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    field: FieldSpec,
    coeffs: Vec<u32>,
}

impl Polynomial {
    pub fn new(field: &FieldSpec, mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Polynomial { field: field.clone(), coeffs }
    }

    pub fn zero(field: &FieldSpec) -> Self {
        Polynomial::new(field, vec![])
    }

    pub fn monomial(field: &FieldSpec, degree: usize) -> Self {
        let mut c = vec![0; degree + 1];
        c[degree] = 1;
        Polynomial::new(field, c)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    pub fn leading(&self) -> u32 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect();
        Polynomial::new(f, c)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|i| f.sub(self.coeff(i), other.coeff(i))).collect();
        Polynomial::new(f, c)
    }

    pub fn scale(&self, s: u32) -> Polynomial {
        let f = &self.field;
        Polynomial::new(f, self.coeffs.iter().map(|&c| f.mul(c, s)).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero(&self.field);
        }
        let f = &self.field;
        let mut c = vec![0u32; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] = f.add(c[i + j], f.mul(a, b));
            }
        }
        Polynomial::new(f, c)
    }

    /// Quotient and remainder.
    pub fn divrem(&self, divisor: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        let f = &self.field;
        let dd = divisor.degree().ok_or(Error::ZeroPolynomial)?;
        let lead_inv = f.inv(divisor.leading());
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Polynomial::zero(f), self.clone()));
        }
        let mut quot = vec![0u32; rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let c = rem[k];
            if c == 0 {
                continue;
            }
            let factor = f.mul(c, lead_inv);
            quot[k - dd] = factor;
            for (i, &d) in divisor.coeffs.iter().enumerate() {
                rem[k - dd + i] = f.sub(rem[k - dd + i], f.mul(factor, d));
            }
        }
        Ok((Polynomial::new(f, quot), Polynomial::new(f, rem)))
    }

    pub fn rem(&self, divisor: &Polynomial) -> Result<Polynomial> {
        Ok(self.divrem(divisor)?.1)
    }

    /// `self^e mod modulus`.
    pub fn powmod(&self, mut e: u128, modulus: &Polynomial) -> Result<Polynomial> {
        let mut result = Polynomial::new(&self.field, vec![1]).rem(modulus)?;
        let mut base = self.rem(modulus)?;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).rem(modulus)?;
            }
            base = base.mul(&base).rem(modulus)?;
            e >>= 1;
        }
        Ok(result)
    }

    pub fn eval(&self, x: u32) -> u32 {
        let f = &self.field;
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Comma-separated coefficients, constant term first.
    pub fn to_csv(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".into();
        }
        self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }

    /// Parses either `a0,a1,...,an` (constant term first) or a human form such
    /// as `x^2+x+2` / `2x^3 + x + 1`. Coefficients are element indices.
    pub fn parse(s: &str, field: &FieldSpec) -> Result<Polynomial> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let check = |v: u64| -> Result<u32> {
            if v < field.order() as u64 {
                Ok(v as u32)
            } else {
                Err(Error::Parse(format!("coefficient {v} outside F_{}", field.order())))
            }
        };
        if !s.contains('x') {
            let coeffs = s
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u64>()
                        .map_err(|e| Error::Parse(format!("{t:?}: {e}")))
                        .and_then(check)
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(Polynomial::new(field, coeffs));
        }
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut coeffs: Vec<u32> = Vec::new();
        for raw in compact.split('+') {
            if raw.is_empty() {
                return Err(Error::Parse(format!("dangling '+' in {s:?}")));
            }
            let (coef, deg) = match raw.find('x') {
                None => (raw.parse::<u64>().map_err(|e| Error::Parse(format!("{raw:?}: {e}")))?, 0),
                Some(pos) => {
                    let c = raw[..pos].trim_end_matches('*');
                    let c = if c.is_empty() {
                        1
                    } else {
                        c.parse::<u64>().map_err(|e| Error::Parse(format!("{raw:?}: {e}")))?
                    };
                    let rest = &raw[pos + 1..];
                    let d = if rest.is_empty() {
                        1
                    } else if let Some(d) = rest.strip_prefix('^') {
                        d.parse::<usize>().map_err(|e| Error::Parse(format!("{raw:?}: {e}")))?
                    } else {
                        return Err(Error::Parse(format!("cannot read term {raw:?}")));
                    };
                    (c, d)
                }
            };
            let c = check(coef)?;
            if coeffs.len() <= deg {
                coeffs.resize(deg + 1, 0);
            }
            coeffs[deg] = field.add(coeffs[deg], c);
        }
        Ok(Polynomial::new(field, coeffs))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let coef = if c == 1 && i > 0 { String::new() } else { c.to_string() };
            terms.push(match i {
                0 => coef,
                1 => format!("{coef}x"),
                _ => format!("{coef}x^{i}"),
            });
        }
        write!(f, "{}", terms.join("+"))
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {}", self, self.field.name())
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Iterator over all monic polynomials of `degree` in lexicographic
/// coefficient order, constant term varying fastest.
pub fn monic_polynomials(field: &FieldSpec, degree: usize) -> impl Iterator<Item = Polynomial> + '_ {
    let q = field.order() as u64;
    let count = q.pow(degree as u32);
    (0..count).map(move |mut i| {
        let mut c = Vec::with_capacity(degree + 1);
        for _ in 0..degree {
            c.push((i % q) as u32);
            i /= q;
        }
        c.push(1);
        Polynomial::new(field, c)
    })
}

/// Irreducibility by trial division with every monic polynomial of degree at
/// most `deg(f)/2`. Nonzero constants are units, hence not irreducible.
pub fn poly_is_irreducible(f: &Polynomial) -> Result<bool> {
    let deg = f.degree().ok_or(Error::ZeroPolynomial)?;
    if deg == 0 {
        return Ok(false);
    }
    if deg == 1 {
        return Ok(true);
    }
    let monic = f.scale(f.field.inv(f.leading()));
    for d in 1..=deg / 2 {
        for g in monic_polynomials(&f.field, d) {
            if monic.rem(&g)?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Primitivity: irreducible, and `x` has order exactly `q^n - 1` modulo `f`,
/// tested through `x^((q^n-1)/l) != 1` for every prime `l | q^n - 1`.
pub fn poly_is_primitive(f: &Polynomial) -> Result<bool> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !f.is_monic() {
        return Err(Error::NonMonicPolynomial(f.to_string()));
    }
    let n = f.degree().unwrap();
    if n == 0 || f.coeff(0) == 0 || !poly_is_irreducible(f)? {
        return Ok(false);
    }
    let group = (f.field.order() as u128).pow(n as u32) - 1;
    let x = Polynomial::monomial(&f.field, 1);
    let one = Polynomial::new(&f.field, vec![1]);
    if x.powmod(group, f)? != one {
        return Ok(false);
    }
    for l in prime_factors(group as u64) {
        if x.powmod(group / l as u128, f)? == one {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The `(index+1)`-th primitive polynomial of degree `n` in lexicographic order.
pub fn find_primitive_poly(base: &FieldSpec, n: usize, index: usize) -> Result<Polynomial> {
    if n == 0 {
        return Err(Error::InvalidDimension("degree 0".into()));
    }
    let mut seen = 0;
    for f in monic_polynomials(base, n) {
        if poly_is_primitive(&f)? {
            if seen == index {
                return Ok(f);
            }
            seen += 1;
        }
    }
    Err(Error::IndexOutOfRange { index, available: seen })
}

// ---- integer helpers ----------------------------------------------------

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `q = p^e` decomposition, if `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, usize)> {
    let p = prime_factors(q);
    if p.len() != 1 {
        return None;
    }
    let (mut e, mut r) = (0, q);
    while r % p[0] == 0 {
        r /= p[0];
        e += 1;
    }
    Some((p[0], e))
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn mod_order(g: u64, p: u64) -> u64 {
    let mut x = g % p;
    let mut k = 1;
    while x != 1 {
        x = x * g % p;
        k += 1;
        if k > p {
            return 0;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> FieldSpec {
        FieldSpec::prime(3).unwrap()
    }

    fn poly(s: &str, f: &FieldSpec) -> Polynomial {
        Polynomial::parse(s, f).unwrap()
    }

    /// Order of `x` in `F_q[x]/(f)` by walking powers.
    fn order_of_x_oracle(f: &Polynomial) -> Option<u64> {
        let x = Polynomial::monomial(f.field(), 1);
        let one = Polynomial::new(f.field(), vec![1]);
        let mut acc = x.rem(f).unwrap();
        let bound = (f.field().order() as u64).pow(f.degree().unwrap() as u32);
        for k in 1..=bound {
            if acc == one {
                return Some(k);
            }
            acc = acc.mul(&x).rem(f).unwrap();
        }
        None
    }

    /// Irreducibility via "no root in any extension of degree <= n/2" is not
    /// available without the code under test, so check by brute force:
    /// multiply every pair of monic polynomials with degrees summing to n.
    fn reducible_oracle(f: &Polynomial) -> bool {
        let n = f.degree().unwrap();
        (1..n).any(|d| {
            monic_polynomials(f.field(), d)
                .any(|a| monic_polynomials(f.field(), n - d).any(|b| a.mul(&b) == *f))
        })
    }

    #[test]
    fn field_make_examples() {
        let f = FieldSpec::make(3, 1, None).unwrap();
        assert_eq!(f.order(), 3);
        assert!(f.is_prime_field());
        let m = poly("x^2+x+2", &f);
        let f9 = FieldSpec::make(3, 2, Some(&m)).unwrap();
        assert_eq!(f9.order(), 9);
        assert_eq!(f9.modulus().unwrap(), m);
        assert_eq!(FieldSpec::make(2, 1, None).unwrap_err(), Error::EvenCharacteristic);
        assert_eq!(FieldSpec::make(9, 1, None).unwrap_err(), Error::NonPrimeCharacteristic(9));
        let bad = poly("x^2+2", &f);
        assert!(matches!(FieldSpec::make(3, 2, Some(&bad)), Err(Error::ReducibleModulus(_))));
    }

    #[test]
    fn arithmetic_examples() {
        let f = f3();
        let two = f.element(2).unwrap();
        assert_eq!(two.add(&two).unwrap().value(), 1);
        assert_eq!(two.inv().unwrap().value(), 2);
        let f9 = FieldSpec::make(3, 2, Some(&poly("x^2+x+2", &f))).unwrap();
        let x = f9.element(3).unwrap();
        // x^2 = -x - 2 = 2x + 1 -> index 1 + 2*3 = 7
        assert_eq!(x.mul(&x).unwrap().value(), 7);
        assert_eq!(x.mul(&x).unwrap().coeffs(), vec![1, 2]);
        assert_eq!(f.zero().inv().unwrap_err(), Error::DivisionByZero);
        assert_eq!(two.add(&f9.one()).unwrap_err(), Error::FieldMismatch);
        assert_eq!(x.pow(-1).unwrap().mul(&x).unwrap().value(), 1);
        assert_eq!(field_arith(&two, &two, ArithOp::Pow(3)).unwrap().value(), 2);
    }

    #[test]
    fn field_axioms_exhaustive() {
        for q in [3u32, 5, 7, 9, 25, 27, 49, 81] {
            let f = FieldSpec::galois(q).unwrap();
            for a in 0..q {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                }
                for b in 0..q {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    if q <= 27 {
                        for c in 0..q {
                            assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                            assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn digitwise_addition_matches_table() {
        // 3^7 is above the table limit
        let f = FieldSpec::galois(2187).unwrap();
        assert!(f.0.add.is_none());
        for a in (0..2187).step_by(37) {
            for b in (0..2187).step_by(53) {
                let s = f.add(a, b);
                assert_eq!(f.sub(s, b), a);
                let coords: Vec<u32> = f
                    .base_coords(a)
                    .iter()
                    .zip(f.base_coords(b))
                    .map(|(&x, y)| (x + y) % 3)
                    .collect();
                assert_eq!(f.from_base_coords(&coords), s);
            }
        }
    }

    #[test]
    fn towers_work() {
        let f9 = FieldSpec::galois(9).unwrap();
        let f81 = f9.extension(2, None).unwrap();
        assert_eq!(f81.order(), 81);
        assert_eq!(f81.degree(), 4);
        for a in 1..81 {
            assert_eq!(f81.mul(a, f81.inv(a)), 1);
        }
        // F_9 embeds as the indices 0..9 and is closed under the big field ops
        for a in 0..9 {
            for b in 0..9 {
                assert_eq!(f81.mul(a, b), f9.mul(a, b));
                assert_eq!(f81.add(a, b), f9.add(a, b));
            }
        }
    }

    #[test]
    fn irreducibility_examples() {
        let f = f3();
        assert!(poly_is_irreducible(&poly("x^2+1", &f)).unwrap());
        assert!(!poly_is_irreducible(&poly("x^2+2", &f)).unwrap());
        assert!(poly_is_irreducible(&poly("x", &f)).unwrap());
        assert_eq!(poly_is_irreducible(&Polynomial::zero(&f)).unwrap_err(), Error::ZeroPolynomial);
    }

    #[test]
    fn primitivity_examples() {
        let f = f3();
        assert!(poly_is_primitive(&poly("x^2+x+2", &f)).unwrap());
        assert_eq!(order_of_x_oracle(&poly("x^2+x+2", &f)), Some(8));
        assert!(!poly_is_primitive(&poly("x^2+1", &f)).unwrap());
        assert_eq!(order_of_x_oracle(&poly("x^2+1", &f)), Some(4));
        assert!(poly_is_primitive(&poly("x+1", &f)).unwrap());
        assert!(matches!(
            poly_is_primitive(&poly("2x^2+1", &f)),
            Err(Error::NonMonicPolynomial(_))
        ));
    }

    #[test]
    fn primitivity_agrees_with_power_enumeration() {
        for q in [3u32, 5, 7, 9] {
            let f = FieldSpec::galois(q).unwrap();
            for n in 1..=4usize {
                if (q as u64).pow(n as u32) > 3000 {
                    continue;
                }
                for g in monic_polynomials(&f, n) {
                    let prim = poly_is_primitive(&g).unwrap();
                    let irr = poly_is_irreducible(&g).unwrap();
                    assert_eq!(irr, !reducible_oracle(&g), "{g:?}");
                    let expected = irr
                        && g.coeff(0) != 0
                        && order_of_x_oracle(&g) == Some((q as u64).pow(n as u32) - 1);
                    assert_eq!(prim, expected, "{g:?}");
                    if prim {
                        assert!(irr);
                    }
                }
            }
        }
    }

    #[test]
    fn find_primitive_examples() {
        let f = f3();
        // oracle: scan the 9 monic quadratics in order with the power walk
        let oracle: Vec<Polynomial> = monic_polynomials(&f, 2)
            .filter(|g| g.coeff(0) != 0 && order_of_x_oracle(g) == Some(8))
            .collect();
        assert_eq!(find_primitive_poly(&f, 2, 0).unwrap(), poly("x^2+x+2", &f));
        assert_eq!(find_primitive_poly(&f, 2, 0).unwrap(), oracle[0]);
        assert_eq!(find_primitive_poly(&f, 2, 1).unwrap(), oracle[1]);
        assert_eq!(find_primitive_poly(&f, 2, 1).unwrap(), poly("x^2+2x+2", &f));
        assert_eq!(find_primitive_poly(&f, 1, 0).unwrap(), poly("x+1", &f));
        assert_eq!(
            find_primitive_poly(&f, 1, 1).unwrap_err(),
            Error::IndexOutOfRange { index: 1, available: 1 }
        );
    }

    #[test]
    fn nonsquare_examples() {
        for (q, z) in [(3u32, 2u32), (5, 2), (7, 3)] {
            let f = FieldSpec::prime(q).unwrap();
            assert_eq!(nonsquare_z(&f).value(), z);
        }
        for q in [3u32, 5, 7, 9, 11, 13, 25, 27, 49, 81] {
            let f = FieldSpec::galois(q).unwrap();
            let z = nonsquare_z(&f).value();
            let squares: std::collections::HashSet<u32> = (0..q).map(|a| f.mul(a, a)).collect();
            assert!(!squares.contains(&z));
            assert_eq!(squares.len() as u32, (q + 1) / 2);
        }
    }

    #[test]
    fn parse_forms_agree() {
        let f = f3();
        assert_eq!(poly("2,1,1", &f), poly("x^2+x+2", &f));
        assert_eq!(poly("x^2 + 2x + 2", &f).to_csv(), "2,2,1");
        assert_eq!(poly("x^2+x+2", &f).to_string(), "x^2+x+2");
        assert!(Polynomial::parse("x^2+5", &f).is_err());
        assert!(Polynomial::parse("", &f).is_err());
    }
}
