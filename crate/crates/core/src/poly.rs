//! Sparse multivariate polynomials over the integers in the alphabet
//! `A, B, x1..xm, y1..yn`.
//!
//! Every [`Polynomial`] carries its [`Context`] `(m, n)`. Terms are kept in
//! canonical order: total degree descending, then the exponent vector
//! (ordered `A, B, x1.., y1..`) lexicographically descending.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("context mismatch: {left} vs {right}")]
    ContextMismatch { left: Context, right: Context },
    #[error("variable {var} is outside context {ctx}")]
    VarOutOfRange { var: VarId, ctx: Context },
    #[error("row index {i} out of range for swap in context {ctx}")]
    SwapOutOfRange { i: usize, ctx: Context },
    #[error("division is not exact")]
    NotExact,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, PolyError>;

/// The pair `(m, n)`: number of `x` and `y` variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context {
    pub m: usize,
    pub n: usize,
}

impl Context {
    pub fn new(m: usize, n: usize) -> Self {
        Context { m, n }
    }

    pub fn num_vars(&self) -> usize {
        2 + self.m + self.n
    }

    pub fn index(&self, v: VarId) -> Result<usize> {
        match v {
            VarId::A => Ok(0),
            VarId::B => Ok(1),
            VarId::X(i) if i >= 1 && i <= self.m => Ok(1 + i),
            VarId::Y(j) if j >= 1 && j <= self.n => Ok(1 + self.m + j),
            _ => Err(PolyError::VarOutOfRange { var: v, ctx: *self }),
        }
    }

    pub fn var(&self, idx: usize) -> VarId {
        match idx {
            0 => VarId::A,
            1 => VarId::B,
            k if k < 2 + self.m => VarId::X(k - 1),
            k => VarId::Y(k - 1 - self.m),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.num_vars()).map(move |k| self.var(k))
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(m={}, n={})", self.m, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarId {
    A,
    B,
    X(usize),
    Y(usize),
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::A => f.write_str("A"),
            VarId::B => f.write_str("B"),
            VarId::X(i) => write!(f, "x{i}"),
            VarId::Y(j) => write!(f, "y{j}"),
        }
    }
}

/// Dense exponent vector indexed by [`Context::index`].
///
/// The derived ordering compares total degree first, then exponents
/// lexicographically, which is exactly the canonical monomial order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    deg: u32,
    exps: Box<[u32]>,
}

impl Monomial {
    pub fn one(ctx: Context) -> Self {
        Monomial { deg: 0, exps: vec![0; ctx.num_vars()].into_boxed_slice() }
    }

    pub fn from_exps(exps: Vec<u32>) -> Self {
        let deg = exps.iter().sum();
        Monomial { deg, exps: exps.into_boxed_slice() }
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn exp(&self, idx: usize) -> u32 {
        self.exps[idx]
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let exps: Box<[u32]> = self.exps.iter().zip(other.exps.iter()).map(|(a, b)| a + b).collect();
        Monomial { deg: self.deg + other.deg, exps }
    }

    fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut exps = Vec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(other.exps.iter()) {
            exps.push(a.checked_sub(*b)?);
        }
        Some(Monomial { deg: self.deg - other.deg, exps: exps.into_boxed_slice() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: BigInt,
    pub mono: Monomial,
}

impl Term {
    /// Nonzero exponents in variable order.
    pub fn exponents<'a>(&'a self, ctx: &'a Context) -> impl Iterator<Item = (VarId, u32)> + 'a {
        self.mono.exps.iter().enumerate().filter(|(_, e)| **e > 0).map(|(k, e)| (ctx.var(k), *e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    ctx: Context,
    terms: Vec<Term>,
}

fn collect_terms(map: HashMap<Monomial, BigInt>) -> Vec<Term> {
    let mut terms: Vec<Term> =
        map.into_iter().filter(|(_, c)| !c.is_zero()).map(|(mono, coeff)| Term { coeff, mono }).collect();
    terms.sort_unstable_by(|a, b| b.mono.cmp(&a.mono));
    terms
}

impl Polynomial {
    pub fn zero(ctx: Context) -> Self {
        Polynomial { ctx, terms: Vec::new() }
    }

    pub fn one(ctx: Context) -> Self {
        Self::constant(ctx, 1)
    }

    pub fn constant(ctx: Context, c: impl Into<BigInt>) -> Self {
        let c = c.into();
        if c.is_zero() {
            return Self::zero(ctx);
        }
        Polynomial { ctx, terms: vec![Term { coeff: c, mono: Monomial::one(ctx) }] }
    }

    pub fn var(ctx: Context, v: VarId) -> Result<Self> {
        Self::linear(ctx, 0, &[(v, 1)])
    }

    /// `c + Σ k·v` for the listed variables.
    pub fn linear(ctx: Context, c: i64, parts: &[(VarId, i64)]) -> Result<Self> {
        let mut map: HashMap<Monomial, BigInt> = HashMap::new();
        if c != 0 {
            map.insert(Monomial::one(ctx), BigInt::from(c));
        }
        for &(v, k) in parts {
            let idx = ctx.index(v)?;
            let mut exps = vec![0; ctx.num_vars()];
            exps[idx] = 1;
            *map.entry(Monomial::from_exps(exps)).or_default() += k;
        }
        Ok(Polynomial { ctx, terms: collect_terms(map) })
    }

    /// Builds a polynomial from arbitrary (possibly repeated) terms.
    pub fn from_terms(ctx: Context, terms: impl IntoIterator<Item = (Monomial, BigInt)>) -> Self {
        let mut map: HashMap<Monomial, BigInt> = HashMap::new();
        for (mono, c) in terms {
            debug_assert_eq!(mono.exps.len(), ctx.num_vars());
            *map.entry(mono).or_default() += c;
        }
        Polynomial { ctx, terms: collect_terms(map) }
    }

    pub fn context(&self) -> Context {
        self.ctx
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_ctx(&self, other: &Polynomial) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(PolyError::ContextMismatch { left: self.ctx, right: other.ctx });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_ctx(other)?;
        Ok(self.merge(other, false))
    }

    pub fn try_sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_ctx(other)?;
        Ok(self.merge(other, true))
    }

    pub fn try_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_ctx(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn arithmetic(&self, other: &Polynomial, op: ArithOp) -> Result<Polynomial> {
        match op {
            ArithOp::Add => self.try_add(other),
            ArithOp::Sub => self.try_sub(other),
            ArithOp::Mul => self.try_mul(other),
        }
    }

    fn merge(&self, other: &Polynomial, negate: bool) -> Polynomial {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut a, mut b) = (self.terms.iter().peekable(), other.terms.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => out.push(a.next().unwrap().clone()),
                (None, Some(_)) => {
                    let t = b.next().unwrap();
                    out.push(Term { coeff: if negate { -&t.coeff } else { t.coeff.clone() }, mono: t.mono.clone() });
                }
                (Some(x), Some(y)) => match x.mono.cmp(&y.mono) {
                    std::cmp::Ordering::Greater => out.push(a.next().unwrap().clone()),
                    std::cmp::Ordering::Less => {
                        let t = b.next().unwrap();
                        out.push(Term {
                            coeff: if negate { -&t.coeff } else { t.coeff.clone() },
                            mono: t.mono.clone(),
                        });
                    }
                    std::cmp::Ordering::Equal => {
                        let (x, y) = (a.next().unwrap(), b.next().unwrap());
                        let c = if negate { &x.coeff - &y.coeff } else { &x.coeff + &y.coeff };
                        if !c.is_zero() {
                            out.push(Term { coeff: c, mono: x.mono.clone() });
                        }
                    }
                },
            }
        }
        Polynomial { ctx: self.ctx, terms: out }
    }

    fn mul_unchecked(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero(self.ctx);
        }
        let mut map: HashMap<Monomial, BigInt> = HashMap::with_capacity(self.len() * other.len());
        for s in &self.terms {
            for t in &other.terms {
                *map.entry(s.mono.mul(&t.mono)).or_default() += &s.coeff * &t.coeff;
            }
        }
        Polynomial { ctx: self.ctx, terms: collect_terms(map) }
    }

    pub fn scale(&self, c: &BigInt) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.ctx);
        }
        let terms = self.terms.iter().map(|t| Term { coeff: &t.coeff * c, mono: t.mono.clone() }).collect();
        Polynomial { ctx: self.ctx, terms }
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut acc = Polynomial::one(self.ctx);
        for _ in 0..k {
            acc = acc.mul_unchecked(self);
        }
        acc
    }

    /// Product of a sequence of polynomials sharing `ctx`.
    pub fn product<'a>(ctx: Context, factors: impl IntoIterator<Item = &'a Polynomial>) -> Polynomial {
        let mut acc = Polynomial::one(ctx);
        for f in factors {
            assert_eq!(f.ctx, ctx, "context mismatch in product");
            acc = acc.mul_unchecked(f);
        }
        acc
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.first().map(|t| t.mono.deg)
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.terms.first() {
            None => true,
            Some(t) => self.terms.iter().all(|s| s.mono.deg == t.mono.deg),
        }
    }

    /// Largest exponent of `v`; 0 for the zero polynomial.
    pub fn degree_in(&self, v: VarId) -> Result<u32> {
        let idx = self.ctx.index(v)?;
        Ok(self.terms.iter().map(|t| t.mono.exps[idx]).max().unwrap_or(0))
    }

    /// Exchanges `x_i` and `x_{i+1}`.
    pub fn swap_x(&self, i: usize) -> Result<Polynomial> {
        if i == 0 || i >= self.ctx.m {
            return Err(PolyError::SwapOutOfRange { i, ctx: self.ctx });
        }
        let (a, b) = (1 + i, 2 + i);
        let mut terms: Vec<Term> = self
            .terms
            .iter()
            .map(|t| {
                let mut exps = t.mono.exps.clone();
                exps.swap(a, b);
                Term { coeff: t.coeff.clone(), mono: Monomial { deg: t.mono.deg, exps } }
            })
            .collect();
        terms.sort_unstable_by(|s, t| t.mono.cmp(&s.mono));
        Ok(Polynomial { ctx: self.ctx, terms })
    }

    /// `(f − r_i f) / (x_i − x_{i+1})`.
    pub fn divided_difference(&self, i: usize) -> Result<Polynomial> {
        let swapped = self.swap_x(i)?;
        let num = self.merge(&swapped, true);
        let den = Polynomial::linear(self.ctx, 0, &[(VarId::X(i), 1), (VarId::X(i + 1), -1)])?;
        num.divide_exact(&den)
    }

    /// The maximal power of `v` and its coefficient.
    pub fn leading_form(&self, v: VarId) -> Result<(u32, Polynomial)> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let idx = self.ctx.index(v)?;
        let d = self.terms.iter().map(|t| t.mono.exps[idx]).max().unwrap();
        // Stripping a common power of one variable keeps the relative order.
        let terms = self
            .terms
            .iter()
            .filter(|t| t.mono.exps[idx] == d)
            .map(|t| {
                let mut exps = t.mono.exps.clone();
                exps[idx] = 0;
                Term { coeff: t.coeff.clone(), mono: Monomial { deg: t.mono.deg - d, exps } }
            })
            .collect();
        Ok((d, Polynomial { ctx: self.ctx, terms }))
    }

    /// Exact quotient `self / g`, checked by re-multiplication.
    pub fn divide_exact(&self, g: &Polynomial) -> Result<Polynomial> {
        self.check_ctx(g)?;
        let lead = g.terms.first().ok_or(PolyError::DivisionByZero)?;
        let mut rem: BTreeMap<Monomial, BigInt> =
            self.terms.iter().map(|t| (t.mono.clone(), t.coeff.clone())).collect();
        let mut quot = Vec::new();
        while let Some((mono, c)) = rem.pop_last() {
            let qm = mono.checked_div(&lead.mono).ok_or(PolyError::NotExact)?;
            let (qc, r) = c.div_rem(&lead.coeff);
            if !r.is_zero() {
                return Err(PolyError::NotExact);
            }
            for t in &g.terms[1..] {
                let key = qm.mul(&t.mono);
                let delta = &qc * &t.coeff;
                match rem.entry(key) {
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() -= delta;
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(-delta);
                    }
                }
            }
            quot.push(Term { coeff: qc, mono: qm });
        }
        let q = Polynomial { ctx: self.ctx, terms: quot };
        if &q.mul_unchecked(g) != self {
            return Err(PolyError::NotExact);
        }
        Ok(q)
    }

    /// Ring homomorphism sending each variable to the given image.
    pub fn substitute(&self, target: Context, image: impl Fn(VarId) -> Polynomial) -> Result<Polynomial> {
        let nv = self.ctx.num_vars();
        let mut maxe = vec![0u32; nv];
        for t in &self.terms {
            for (k, e) in t.mono.exps.iter().enumerate() {
                maxe[k] = maxe[k].max(*e);
            }
        }
        let mut powers: Vec<Vec<Polynomial>> = Vec::with_capacity(nv);
        for (k, &me) in maxe.iter().enumerate() {
            let mut ps = vec![Polynomial::one(target)];
            if me > 0 {
                let base = image(self.ctx.var(k));
                if base.ctx != target {
                    return Err(PolyError::ContextMismatch { left: base.ctx, right: target });
                }
                for e in 1..=me as usize {
                    let next = ps[e - 1].mul_unchecked(&base);
                    ps.push(next);
                }
            }
            powers.push(ps);
        }
        let mut map: HashMap<Monomial, BigInt> = HashMap::new();
        for t in &self.terms {
            let mut acc = Polynomial::constant(target, t.coeff.clone());
            for (k, e) in t.mono.exps.iter().enumerate() {
                if *e > 0 {
                    acc = acc.mul_unchecked(&powers[k][*e as usize]);
                }
            }
            for s in acc.terms {
                *map.entry(s.mono).or_default() += s.coeff;
            }
        }
        Ok(Polynomial { ctx: target, terms: collect_terms(map) })
    }

    /// Substitution of the form `v ↦ ±w` (a signed renaming of variables).
    pub fn rename_signed(&self, target: Context, map: impl Fn(VarId) -> (VarId, bool)) -> Result<Polynomial> {
        let nv = self.ctx.num_vars();
        let mut dest = Vec::with_capacity(nv);
        for k in 0..nv {
            let (w, neg) = map(self.ctx.var(k));
            dest.push((target.index(w)?, neg));
        }
        let terms = self.terms.iter().map(|t| {
            let mut exps = vec![0u32; target.num_vars()];
            let mut flips = 0u32;
            for (k, e) in t.mono.exps.iter().enumerate() {
                if *e > 0 {
                    exps[dest[k].0] += e;
                    if dest[k].1 {
                        flips += e;
                    }
                }
            }
            let c = if flips % 2 == 1 { -&t.coeff } else { t.coeff.clone() };
            (Monomial::from_exps(exps), c)
        });
        Ok(Polynomial::from_terms(target, terms))
    }

    /// Moves the polynomial into another context, keeping variable names.
    /// Fails if a variable that occurs is missing from `target`.
    pub fn with_context(&self, target: Context) -> Result<Polynomial> {
        let mut dest = Vec::with_capacity(self.ctx.num_vars());
        for k in 0..self.ctx.num_vars() {
            dest.push(target.index(self.ctx.var(k)).ok());
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut exps = vec![0u32; target.num_vars()];
            for (k, e) in t.mono.exps.iter().enumerate() {
                if *e > 0 {
                    let idx = dest[k].ok_or(PolyError::VarOutOfRange { var: self.ctx.var(k), ctx: target })?;
                    exps[idx] = *e;
                }
            }
            terms.push((Monomial::from_exps(exps), t.coeff.clone()));
        }
        Ok(Polynomial::from_terms(target, terms))
    }

    /// Evaluates at `values`, indexed like [`Context::index`].
    pub fn evaluate(&self, values: &[BigInt]) -> BigInt {
        assert_eq!(values.len(), self.ctx.num_vars(), "wrong number of values");
        let mut total = BigInt::zero();
        for t in &self.terms {
            let mut acc = t.coeff.clone();
            for (k, e) in t.mono.exps.iter().enumerate() {
                if *e > 0 {
                    acc *= num_traits::pow(values[k].clone(), *e as usize);
                }
            }
            total += acc;
        }
        total
    }

    pub fn evaluate_with(&self, value: impl Fn(VarId) -> BigInt) -> BigInt {
        let values: Vec<BigInt> = self.ctx.vars().map(value).collect();
        self.evaluate(&values)
    }

    /// The constant term as an `i64`, if the polynomial is constant and fits.
    pub fn as_constant(&self) -> Option<i64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [t] if t.mono.deg == 0 => t.coeff.to_i64(),
            _ => None,
        }
    }

    pub fn parse(text: &str, m: usize, n: usize) -> Result<Polynomial> {
        Parser::new(text, Context::new(m, n)).parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.try_add(rhs).expect("polynomial context mismatch")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.try_sub(rhs).expect("polynomial context mismatch")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.try_mul(rhs).expect("polynomial context mismatch")
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&BigInt::from(-1))
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            let neg = t.coeff.is_negative();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let abs = t.coeff.abs();
            let mut parts: Vec<String> = Vec::new();
            if !abs.is_one() || t.mono.deg == 0 {
                parts.push(abs.to_string());
            }
            for (v, e) in t.exponents(&self.ctx) {
                if e == 1 {
                    parts.push(v.to_string());
                } else {
                    parts.push(format!("{v}^{e}"));
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: Context,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, ctx: Context) -> Self {
        Parser { src: text.as_bytes(), pos: 0, ctx }
    }

    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T> {
        Err(PolyError::Parse { pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "expected a number");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn parse(mut self) -> Result<Polynomial> {
        let mut terms = Vec::new();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                None if first => return self.err(self.pos, "empty input"),
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    1
                }
                Some(b'-') => {
                    self.pos += 1;
                    -1
                }
                Some(_) if first => 1,
                Some(c) => return self.err(self.pos, format!("expected '+' or '-', found '{}'", c as char)),
            };
            first = false;
            let (mono, c) = self.term()?;
            terms.push((mono, c * sign));
        }
        Ok(Polynomial::from_terms(self.ctx, terms))
    }

    fn term(&mut self) -> Result<(Monomial, BigInt)> {
        let mut coeff = BigInt::one();
        let mut exps = vec![0u32; self.ctx.num_vars()];
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => coeff *= self.number()?,
                Some(b'A' | b'B' | b'x' | b'y') => {
                    let start = self.pos;
                    let v = self.variable()?;
                    let idx = match self.ctx.index(v) {
                        Ok(i) => i,
                        Err(_) => return self.err(start, format!("variable {v} outside context {}", self.ctx)),
                    };
                    let mut e = 1u32;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        let at = self.pos;
                        e = self.number()?.to_u32().filter(|e| *e >= 2).map_or_else(
                            || self.err(at, "exponent must be an integer >= 2"),
                            Ok,
                        )?;
                    }
                    exps[idx] += e;
                }
                Some(c) => return self.err(self.pos, format!("expected a factor, found '{}'", c as char)),
                None => return self.err(self.pos, "expected a factor, found end of input"),
            }
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((Monomial::from_exps(exps), coeff))
    }

    fn variable(&mut self) -> Result<VarId> {
        let c = self.src[self.pos];
        self.pos += 1;
        match c {
            b'A' => Ok(VarId::A),
            b'B' => Ok(VarId::B),
            _ => {
                let at = self.pos;
                if !self.src.get(at).is_some_and(|d| d.is_ascii_digit()) {
                    return self.err(at, "expected a variable index");
                }
                let k = self.number()?.to_usize().unwrap_or(usize::MAX);
                Ok(if c == b'x' { VarId::X(k) } else { VarId::Y(k) })
            }
        }
    }
}
