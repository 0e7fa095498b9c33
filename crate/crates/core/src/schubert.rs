//! Generic pipe dream polynomials `G_π`, their nongeneric counterparts
//! `S_π`, the divided-difference recurrence and the associated checks.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::grid::{self, GridError, Hybridization, Mode, PartialPerm, PipeDream, RowType, TileClass, TileKind};
use crate::poly::{Context, PolyError, Polynomial, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchubertError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{0} is not decreasing")]
    NotDecreasing(PartialPerm),
    #[error("no pipe dreams for {0}")]
    EmptySum(PartialPerm),
    #[error("not a permutation: {0:?}")]
    BadPermutation(Vec<usize>),
}

pub type Result<T> = std::result::Result<T, SchubertError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GpdQuery {
    pub m: usize,
    pub n: usize,
    pub beta: Hybridization,
    pub pi: PartialPerm,
}

impl GpdQuery {
    pub fn new(beta: Hybridization, pi: PartialPerm) -> Result<Self> {
        let (m, n) = (pi.m(), pi.n());
        if beta.len() != m {
            return Err(GridError::BetaLength { expected: m, got: beta.len() }.into());
        }
        Ok(GpdQuery { m, n, beta, pi })
    }

    pub fn context(&self) -> Context {
        Context::new(self.m, self.n)
    }
}

/// A permutation of `[n]` in one-line notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtendedPerm(Vec<usize>);

impl ExtendedPerm {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![false; n + 1];
        for &v in &values {
            if v == 0 || v > n || seen[v] {
                return Err(SchubertError::BadPermutation(values));
            }
            seen[v] = true;
        }
        Ok(ExtendedPerm(values))
    }

    pub fn identity(n: usize) -> Self {
        ExtendedPerm((1..=n).collect())
    }

    pub fn longest(n: usize) -> Self {
        ExtendedPerm((1..=n).rev().collect())
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn swapped(&self, i: usize) -> ExtendedPerm {
        let mut v = self.0.clone();
        v.swap(i - 1, i);
        ExtendedPerm(v)
    }
}

impl fmt::Display for ExtendedPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

pub fn inversions(w: &ExtendedPerm) -> usize {
    let v = &w.0;
    (0..v.len()).map(|i| (i + 1..v.len()).filter(|&j| v[i] > v[j]).count()).sum()
}

/// Completes `π` by appending its unused columns in increasing order.
pub fn min_extension(pi: &PartialPerm) -> ExtendedPerm {
    let mut values = pi.values().to_vec();
    values.extend((1..=pi.n()).filter(|j| !pi.values().contains(j)));
    ExtendedPerm(values)
}

fn ab(ctx: Context) -> Polynomial {
    Polynomial::linear(ctx, 0, &[(VarId::A, 1), (VarId::B, 1)]).unwrap()
}

/// Row-by-row transfer: all `G_π^β` for one hybridization, optionally
/// restricted to a single connectivity.
/// Row-by-row transfer from the South boundary upward. `weight` gives the
/// weight of one tile; states are the occupied North labels.
fn transfer<W, F>(
    m: usize,
    n: usize,
    beta: &Hybridization,
    only: Option<&PartialPerm>,
    zero: W,
    one: W,
    weight: F,
) -> Result<BTreeMap<PartialPerm, W>>
where
    W: Clone,
    for<'a> &'a W: Add<&'a W, Output = W> + Mul<&'a W, Output = W>,
    F: Fn(RowType, TileKind, usize, usize) -> W,
{
    if m == 0 || m > n {
        return Err(GridError::BadDimensions { m, n }.into());
    }
    if beta.len() != m {
        return Err(GridError::BetaLength { expected: m, got: beta.len() }.into());
    }
    let phi = beta.pipe_numbering();
    let target: Option<Vec<Option<usize>>> = only.map(|pi| {
        let mut t = vec![None; n];
        for (k, &j) in pi.values().iter().enumerate() {
            t[j - 1] = Some(k + 1);
        }
        t
    });
    let mut states: HashMap<Vec<Option<usize>>, W> = HashMap::new();
    states.insert(vec![None; n], one.clone());
    for i in (1..=m).rev() {
        let t = beta.row(i);
        let tiles: Vec<Vec<W>> = (1..=n)
            .map(|j| TileKind::ALL.iter().map(|&tile| weight(t, tile, phi[i - 1], j)).collect())
            .collect();
        let mut next: HashMap<Vec<Option<usize>>, W> = HashMap::new();
        let mut ordered: Vec<_> = states.into_iter().collect();
        ordered.sort_by(|a, b| a.0.cmp(&b.0));
        for (south, g) in ordered {
            let mut by_north: BTreeMap<Vec<Option<usize>>, W> = BTreeMap::new();
            for f in grid::row_fillings(t, phi[i - 1], &south, Mode::Generic) {
                if i == 1 && target.as_ref().is_some_and(|tg| *tg != f.north) {
                    continue;
                }
                let w = f.tiles.iter().enumerate().fold(one.clone(), |acc, (k, tile)| {
                    let slot = TileKind::ALL.iter().position(|x| x == tile).expect("tile listed in ALL");
                    &acc * &tiles[k][slot]
                });
                let slot = by_north.entry(f.north).or_insert_with(|| zero.clone());
                *slot = &*slot + &w;
            }
            for (north, w) in by_north {
                let contrib = &g * &w;
                match next.get_mut(&north) {
                    Some(acc) => *acc = &*acc + &contrib,
                    None => {
                        next.insert(north, contrib);
                    }
                }
            }
        }
        states = next;
    }
    let mut out = BTreeMap::new();
    for (north, g) in states {
        let mut values = vec![0; m];
        for (j, p) in north.iter().enumerate() {
            if let Some(p) = p {
                values[p - 1] = j + 1;
            }
        }
        out.insert(PartialPerm::new(values, n)?, g);
    }
    Ok(out)
}

fn polynomial_transfer(
    m: usize,
    n: usize,
    beta: &Hybridization,
    only: Option<&PartialPerm>,
) -> Result<BTreeMap<PartialPerm, Polynomial>> {
    let ctx = Context::new(m, n);
    transfer(m, n, beta, only, Polynomial::zero(ctx), Polynomial::one(ctx), |t, tile, x, j| {
        grid::tile_weight(ctx, t, tile, x, j)
    })
}

/// `G_π^β` evaluated at `values` (in context variable order) without
/// expanding the polynomial.
pub fn generic_value(q: &GpdQuery, values: &[BigInt]) -> Result<BigInt> {
    let ctx = q.context();
    if values.len() != ctx.num_vars() {
        return Err(PolyError::VarOutOfRange { var: VarId::Y(values.len()), ctx }.into());
    }
    let value = |v: VarId| values[ctx.index(v).expect("variable in context")].clone();
    let (a, b) = (value(VarId::A), value(VarId::B));
    let mut all = transfer(q.m, q.n, &q.beta, Some(&q.pi), BigInt::zero(), BigInt::one(), |t, tile, x, j| {
        let (x, y) = (value(VarId::X(x)), value(VarId::Y(j)));
        match (tile.class(), t) {
            (TileClass::Elbow, _) => &a + &b,
            (TileClass::Blank, RowType::W) | (TileClass::Straight, RowType::E) => &b - &x + &y,
            (TileClass::Straight, RowType::W) | (TileClass::Blank, RowType::E) => &a + &x - &y,
        }
    })?;
    Ok(all.remove(&q.pi).unwrap_or_default())
}

/// `G_π^β`, the weighted sum over all dreams of connectivity `π`.
pub fn generic_polynomial(q: &GpdQuery) -> Result<Polynomial> {
    let mut all = polynomial_transfer(q.m, q.n, &q.beta, Some(&q.pi))?;
    match all.remove(&q.pi) {
        Some(g) if !g.is_zero() => Ok(g),
        _ => Err(SchubertError::EmptySum(q.pi.clone())),
    }
}

/// `G_π^β` for every `π` at once.
pub fn generic_polynomials(m: usize, n: usize, beta: &Hybridization) -> Result<BTreeMap<PartialPerm, Polynomial>> {
    polynomial_transfer(m, n, beta, None)
}

/// `G_π^β` as a literal sum of dream weights.
pub fn generic_polynomial_by_enumeration(q: &GpdQuery) -> Result<Polynomial> {
    let ctx = q.context();
    let mut acc = Polynomial::zero(ctx);
    for d in grid::enumerate(q.m, q.n, &q.beta, Some(&q.pi), Mode::Generic)? {
        acc = &acc + &d.weight();
    }
    if acc.is_zero() {
        return Err(SchubertError::EmptySum(q.pi.clone()));
    }
    Ok(acc)
}

/// The product formula for decreasing `π`.
pub fn base_case(pi: &PartialPerm) -> Result<Polynomial> {
    if !pi.is_decreasing() {
        return Err(SchubertError::NotDecreasing(pi.clone()));
    }
    let ctx = Context::new(pi.m(), pi.n());
    let mut factors = Vec::new();
    for i in 1..=pi.m() {
        factors.push(ab(ctx));
        for j in 1..=pi.n() {
            if j < pi.get(i) {
                factors.push(Polynomial::linear(ctx, 0, &[(VarId::A, 1), (VarId::X(i), 1), (VarId::Y(j), -1)])?);
            } else if j > pi.get(i) {
                factors.push(Polynomial::linear(ctx, 0, &[(VarId::B, 1), (VarId::X(i), -1), (VarId::Y(j), 1)])?);
            }
        }
    }
    Ok(Polynomial::product(ctx, &factors))
}

/// From `G_{π'}` with `π'(i) > π'(i+1)` to `G_{π' r_i}`.
pub fn recurrence_step(g: &Polynomial, i: usize) -> Result<Polynomial> {
    let ctx = g.context();
    let shifted = Polynomial::linear(ctx, 0, &[(VarId::A, 1), (VarId::B, 1), (VarId::X(i), 1), (VarId::X(i + 1), -1)])?;
    let num = &(&ab(ctx) * g) - &(&shifted * &g.swap_x(i)?);
    let den = Polynomial::linear(ctx, 0, &[(VarId::X(i), 1), (VarId::X(i + 1), -1)])?;
    Ok(num.divide_exact(&den)?)
}

/// `((A+B)∂_i − r_i) g`, undoing [`recurrence_step`].
pub fn inverse_step(g: &Polynomial, i: usize) -> Result<Polynomial> {
    let ctx = g.context();
    Ok(&(&ab(ctx) * &g.divided_difference(i)?) - &g.swap_x(i)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AscentChoice {
    First,
    Last,
}

pub fn compute_by_recurrence(pi: &PartialPerm) -> Result<Polynomial> {
    compute_by_recurrence_with(pi, AscentChoice::First)
}

pub fn compute_by_recurrence_with(pi: &PartialPerm, choice: AscentChoice) -> Result<Polynomial> {
    let mut memo = HashMap::new();
    recur(pi, choice, &mut memo)
}

fn recur(pi: &PartialPerm, choice: AscentChoice, memo: &mut HashMap<PartialPerm, Polynomial>) -> Result<Polynomial> {
    if let Some(g) = memo.get(pi) {
        return Ok(g.clone());
    }
    let v = pi.values();
    let mut ascents = (1..pi.m()).filter(|&i| v[i - 1] < v[i]);
    let step = match choice {
        AscentChoice::First => ascents.next(),
        AscentChoice::Last => ascents.next_back(),
    };
    let g = match step {
        None => base_case(pi)?,
        Some(i) => recurrence_step(&recur(&pi.swap(i), choice, memo)?, i)?,
    };
    memo.insert(pi.clone(), g.clone());
    Ok(g)
}

/// The nongeneric weight of a dream: `x_{φ(i)} − y_j` on W-row straights
/// and E-row blanks, 1 elsewhere.
pub fn schubert_weight(d: &PipeDream) -> Polynomial {
    let ctx = d.context();
    let phi = d.beta().pipe_numbering();
    let mut factors = Vec::new();
    for i in 1..=d.m() {
        let t = d.beta().row(i);
        for (k, tile) in d.row(i).iter().enumerate() {
            let marked = matches!(
                (t, tile.class()),
                (RowType::W, TileClass::Straight) | (RowType::E, TileClass::Blank)
            );
            if marked {
                factors.push(Polynomial::linear(ctx, 0, &[(VarId::X(phi[i - 1]), 1), (VarId::Y(k + 1), -1)]).unwrap());
            }
        }
    }
    Polynomial::product(ctx, &factors)
}

/// `S_π`, summed over nongeneric dreams of type `β`.
pub fn schubert_sum(m: usize, n: usize, beta: &Hybridization, pi: &PartialPerm) -> Result<Polynomial> {
    let ctx = Context::new(m, n);
    let mut acc = Polynomial::zero(ctx);
    for d in grid::enumerate(m, n, beta, Some(pi), Mode::Nongeneric)? {
        acc = &acc + &schubert_weight(&d);
    }
    Ok(acc)
}

/// The double Schubert polynomial of `w ∈ S_n`, in context `(n, n)`,
/// obtained from `∏_{i+j≤n}(x_i − y_j)` by divided differences.
pub fn double_schubert_oracle(w: &ExtendedPerm) -> Polynomial {
    let n = w.len();
    let ctx = Context::new(n, n);
    let mut memo: HashMap<ExtendedPerm, Polynomial> = HashMap::new();
    let mut top = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            if i + j <= n {
                top.push(Polynomial::linear(ctx, 0, &[(VarId::X(i), 1), (VarId::Y(j), -1)]).unwrap());
            }
        }
    }
    memo.insert(ExtendedPerm::longest(n), Polynomial::product(ctx, &top));
    fn descend(w: &ExtendedPerm, memo: &mut HashMap<ExtendedPerm, Polynomial>) -> Polynomial {
        if let Some(p) = memo.get(w) {
            return p.clone();
        }
        let i = (1..w.len()).find(|&i| w.0[i - 1] < w.0[i]).expect("non-longest element has an ascent");
        let p = descend(&w.swapped(i), memo).divided_difference(i).expect("divided difference of a polynomial");
        memo.insert(w.clone(), p.clone());
        p
    }
    descend(w, &mut memo)
}

/// `x_i ↦ A + x_i`.
pub fn shift_x_by_a(f: &Polynomial) -> Polynomial {
    let ctx = f.context();
    f.substitute(ctx, |v| match v {
        VarId::X(i) => Polynomial::linear(ctx, 0, &[(VarId::A, 1), (VarId::X(i), 1)]).unwrap(),
        v => Polynomial::var(ctx, v).unwrap(),
    })
    .expect("substitution within one context")
}

/// `A ↔ B`, `x_i ↦ −x_{m+1−i}`, `y_j ↦ −y_{n+1−j}`.
pub fn mirror_substitution(f: &Polynomial) -> Polynomial {
    let ctx = f.context();
    f.rename_signed(ctx, |v| match v {
        VarId::A => (VarId::B, false),
        VarId::B => (VarId::A, false),
        VarId::X(i) => (VarId::X(ctx.m + 1 - i), true),
        VarId::Y(j) => (VarId::Y(ctx.n + 1 - j), true),
    })
    .expect("renaming within one context")
}

/// Degree in `B` of a dream's weight, read off factor by factor.
pub fn dream_b_degree(d: &PipeDream) -> u32 {
    d.weight_factors().iter().flatten().map(|f| f.degree_in(VarId::B).unwrap()).sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeadingReport {
    pub pi: PartialPerm,
    pub beta: Hybridization,
    pub expected_degree: usize,
    pub degree: u32,
    pub coefficient_matches: bool,
    pub oracle_matches: bool,
    /// Dreams attaining the top B-degree are exactly the nongeneric ones.
    pub top_degree_is_nongeneric: bool,
}

impl LeadingReport {
    pub fn pass(&self) -> bool {
        self.degree as usize == self.expected_degree
            && self.coefficient_matches
            && self.oracle_matches
            && self.top_degree_is_nongeneric
    }
}

impl fmt::Display for LeadingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pi={} beta={}: B-degree {} (expected {}), coefficient {}, oracle {}, top degree nongeneric-only {}",
            self.pi,
            self.beta,
            self.degree,
            self.expected_degree,
            self.coefficient_matches,
            self.oracle_matches,
            self.top_degree_is_nongeneric
        )
    }
}

/// Checks the B-leading form of `G_π^β` against `S_π(A+x, y)`.
pub fn b_leading_check(pi: &PartialPerm, beta: &Hybridization) -> Result<LeadingReport> {
    let q = GpdQuery::new(beta.clone(), pi.clone())?;
    let g = generic_polynomial(&q)?;
    b_leading_check_with(pi, beta, &g)
}

/// As [`b_leading_check`], reusing an already computed `G_π^β`.
pub fn b_leading_check_with(pi: &PartialPerm, beta: &Hybridization, g: &Polynomial) -> Result<LeadingReport> {
    let (m, n) = (pi.m(), pi.n());
    let ctx = Context::new(m, n);
    let expected = m * n - inversions(&min_extension(pi));
    let (degree, coeff) = g.leading_form(VarId::B)?;
    let s = schubert_sum(m, n, beta, pi)?;
    let coefficient_matches = coeff == shift_x_by_a(&s);
    let oracle = double_schubert_oracle(&min_extension(pi)).with_context(ctx);
    let oracle_matches = oracle.as_ref().is_ok_and(|o| *o == s);
    let mut top_ok = true;
    for d in grid::enumerate(m, n, beta, Some(pi), Mode::Generic)? {
        let deg = dream_b_degree(&d) as usize;
        let nongeneric = d.is_nongeneric();
        if deg > expected || (deg == expected) != nongeneric {
            top_ok = false;
            break;
        }
    }
    Ok(LeadingReport {
        pi: pi.clone(),
        beta: beta.clone(),
        expected_degree: expected,
        degree,
        coefficient_matches,
        oracle_matches,
        top_degree_is_nongeneric: top_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MirrorReport {
    pub pi: PartialPerm,
    pub mirrored: PartialPerm,
    pub pass: bool,
}

/// Checks `G_π(A,B,x,y) = G_{γπγ}(B,A,−x_m..−x_1,−y_n..−y_1)`.
pub fn mirror_check(pi: &PartialPerm) -> Result<MirrorReport> {
    let m = pi.m();
    let w = Hybridization::uniform(m, RowType::W);
    let g = generic_polynomial(&GpdQuery::new(w.clone(), pi.clone())?)?;
    let mirrored = pi.mirror();
    let h = generic_polynomial(&GpdQuery::new(w, mirrored.clone())?)?;
    Ok(MirrorReport { pi: pi.clone(), mirrored, pass: g == mirror_substitution(&h) })
}

/// `[E_π] = G_π / (A+B)^m`.
pub fn class_of_e(pi: &PartialPerm) -> Result<Polynomial> {
    let w = Hybridization::uniform(pi.m(), RowType::W);
    let g = generic_polynomial(&GpdQuery::new(w, pi.clone())?)?;
    Ok(g.divide_exact(&ab(g.context()).pow(pi.m() as u32))?)
}

/// `G_π` at `A = B = 1`, `x = y = 0`, and the same number counted as
/// `Σ 2^{#elbows}` over dreams.
pub fn positivity(q: &GpdQuery) -> Result<(BigInt, BigInt)> {
    let g = generic_polynomial(q)?;
    let value = g.evaluate_with(|v| match v {
        VarId::A | VarId::B => BigInt::one(),
        _ => BigInt::zero(),
    });
    let mut count = BigInt::zero();
    for d in grid::enumerate(q.m, q.n, &q.beta, Some(&q.pi), Mode::Generic)? {
        count += BigInt::one() << d.count(|t| t.is_elbow());
    }
    Ok((value, count))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoratedCounts {
    pub dreams: usize,
    /// `Σ 2^{#blanks}`.
    pub blank_labelled: BigInt,
    /// `Σ 2^{#elbows − m}`, the value of `[E_π]` at `A = B = 1`, `x = y = 0`.
    pub class_value: BigInt,
}

pub fn decorated_counts(q: &GpdQuery) -> Result<DecoratedCounts> {
    let mut out = DecoratedCounts { dreams: 0, blank_labelled: BigInt::zero(), class_value: BigInt::zero() };
    for d in grid::enumerate(q.m, q.n, &q.beta, Some(&q.pi), Mode::Generic)? {
        out.dreams += 1;
        out.blank_labelled += BigInt::one() << d.count(|t| t == grid::TileKind::Blank);
        out.class_value += BigInt::one() << (d.count(|t| t.is_elbow()) - q.m);
    }
    Ok(out)
}
