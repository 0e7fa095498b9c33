//! Flux variables on grid edges, the equations of the components `V_δ`
//! attached to pipe dreams, their classes, and the reverse construction of
//! a dream from flux data.
//!
//! A flux is a formal sum of symbols `m_{r,j} = X_{rj} Y_{jr}`, stored as a
//! set since every sum that occurs is multiplicity free.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::grid::{flow_columns, EdgeId, GridError, Hybridization, PartialPerm, PipeDream, RowType, TileClass, TileKind};
use crate::poly::{Context, PolyError, Polynomial, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FluxError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("square ({row},{col}): {reason}")]
    BadSquare { row: usize, col: usize, reason: String },
    #[error("reconstructed dream has connectivity {got}, expected {expected}")]
    WrongConnectivity { expected: PartialPerm, got: PartialPerm },
    #[error("the two computations of the component class disagree")]
    ClassMismatch,
    #[error("rewriting merges two monomials on edge {0}")]
    Collision(EdgeId),
    #[error("rewrite rules do not terminate")]
    CyclicRewrite,
}

pub type Result<T> = std::result::Result<T, FluxError>;

/// The symbol `X_{rj} Y_{jr}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FluxMonomial {
    pub pipe: usize,
    pub col: usize,
}

impl FluxMonomial {
    pub fn new(pipe: usize, col: usize) -> Self {
        FluxMonomial { pipe, col }
    }
}

impl fmt::Display for FluxMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{r}{j}y{j}{r}", r = self.pipe, j = self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FluxExpr(BTreeSet<FluxMonomial>);

impl FluxExpr {
    pub fn new(monos: impl IntoIterator<Item = FluxMonomial>) -> Self {
        FluxExpr(monos.into_iter().collect())
    }

    pub fn monomials(&self) -> impl Iterator<Item = &FluxMonomial> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, m: &FluxMonomial) -> bool {
        self.0.contains(m)
    }
}

impl fmt::Display for FluxExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        f.write_str(&parts.join("+"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FluxLabel {
    Zero,
    /// `t_i`, the flux of pipe `i`.
    T(usize),
}

impl fmt::Display for FluxLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FluxLabel::Zero => f.write_str("0"),
            FluxLabel::T(i) => write!(f, "t{i}"),
        }
    }
}

pub type FluxTable = BTreeMap<EdgeId, FluxExpr>;

/// Edges of square `(i,j)` as `(west, south, east, north)`.
fn square_edges(i: usize, j: usize) -> [EdgeId; 4] {
    [EdgeId::v(i, j - 1), EdgeId::h(i, j), EdgeId::v(i, j), EdgeId::h(i - 1, j)]
}

pub fn flux_grid(m: usize, n: usize, beta: &Hybridization) -> FluxTable {
    let phi = beta.pipe_numbering();
    let mut out = BTreeMap::new();
    for e in EdgeId::all(m, n) {
        let expr = match e.kind {
            crate::grid::EdgeKind::V => {
                let r = phi[e.row - 1];
                let cols: Vec<usize> = match beta.row(e.row) {
                    RowType::W => (e.col + 1..=n).collect(),
                    RowType::E => (1..=e.col).collect(),
                };
                FluxExpr::new(cols.into_iter().map(|j| FluxMonomial::new(r, j)))
            }
            crate::grid::EdgeKind::H => {
                FluxExpr::new((e.row + 1..=m).map(|i| FluxMonomial::new(phi[i - 1], e.col)))
            }
        };
        out.insert(e, expr);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConservationReport {
    pub squares: usize,
    pub violations: Vec<(usize, usize)>,
}

impl ConservationReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// In minus out at every square, as multisets of flux symbols.
pub fn conservation_check(m: usize, n: usize, beta: &Hybridization) -> ConservationReport {
    let table = flux_grid(m, n, beta);
    let mut violations = Vec::new();
    let merged = |a: &FluxExpr, b: &FluxExpr| {
        let mut v: Vec<FluxMonomial> = a.monomials().chain(b.monomials()).copied().collect();
        v.sort_unstable();
        v
    };
    for i in 1..=m {
        for j in 1..=n {
            let [w, s, e, nn] = square_edges(i, j).map(|k| &table[&k]);
            let ok = match beta.row(i) {
                RowType::W => merged(w, s) == merged(e, nn),
                RowType::E => merged(e, s) == merged(w, nn),
            };
            if !ok {
                violations.push((i, j));
            }
        }
    }
    ConservationReport { squares: m * n, violations }
}

pub fn dream_flux_labels(d: &PipeDream) -> BTreeMap<EdgeId, FluxLabel> {
    let t = d.trace();
    EdgeId::all(d.m(), d.n())
        .into_iter()
        .map(|e| (e, t.label(e).map_or(FluxLabel::Zero, FluxLabel::T)))
        .collect()
}

/// The defining data of `V_δ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSet {
    pub m: usize,
    pub n: usize,
    pub beta: Hybridization,
    pub pi: PartialPerm,
    /// `X_{rj} = 0`, stored as `(r, j)`.
    pub zero_x: BTreeSet<(usize, usize)>,
    /// `Y_{jr} = 0`, stored as `(j, r)`.
    pub zero_y: BTreeSet<(usize, usize)>,
    pub flux: BTreeMap<EdgeId, FluxLabel>,
}

impl EquationSet {
    /// Independent equations: every vanishing entry, plus one flux
    /// equation per elbow square other than the one where the row's pipe
    /// turns North. This is `n − 1` per row.
    pub fn equation_count(&self) -> usize {
        let phi = self.beta.pipe_numbering();
        phi.iter()
            .map(|&r| {
                let zeros = self.zero_x.iter().filter(|(p, _)| *p == r).count()
                    + self.zero_y.iter().filter(|(_, p)| *p == r).count();
                let elbows = self.n - zeros;
                zeros + elbows - 1
            })
            .sum()
    }
}

pub fn variety_equations(d: &PipeDream) -> EquationSet {
    let phi = d.beta().pipe_numbering();
    let mut zero_x = BTreeSet::new();
    let mut zero_y = BTreeSet::new();
    for i in 1..=d.m() {
        let r = phi[i - 1];
        for j in 1..=d.n() {
            match (d.beta().row(i), d.tile(i, j).class()) {
                (RowType::W, TileClass::Straight) | (RowType::E, TileClass::Blank) => {
                    zero_x.insert((r, j));
                }
                (RowType::W, TileClass::Blank) | (RowType::E, TileClass::Straight) => {
                    zero_y.insert((j, r));
                }
                (_, TileClass::Elbow) => {}
            }
        }
    }
    EquationSet {
        m: d.m(),
        n: d.n(),
        beta: d.beta().clone(),
        pi: d.connectivity().0,
        zero_x,
        zero_y,
        flux: dream_flux_labels(d),
    }
}

/// `[V_δ]`, computed as `weight / (A+B)^m` and independently from the
/// equations; the two must agree.
pub fn component_class(d: &PipeDream) -> Result<Polynomial> {
    let ctx = d.context();
    let ab = Polynomial::linear(ctx, 0, &[(VarId::A, 1), (VarId::B, 1)])?;
    let by_weight = d.weight().divide_exact(&ab.pow(d.m() as u32))?;
    let by_equations = class_from_equations(&variety_equations(d))?;
    if by_weight != by_equations {
        return Err(FluxError::ClassMismatch);
    }
    Ok(by_weight)
}

/// Product of the torus weights of the equations: `A + x_r − y_j` for
/// `X_{rj}`, `B − x_r + y_j` for `Y_{jr}`, `A + B` for each flux equation.
pub fn class_from_equations(eqs: &EquationSet) -> Result<Polynomial> {
    let ctx = Context::new(eqs.m, eqs.n);
    let mut factors = Vec::new();
    for &(r, j) in &eqs.zero_x {
        factors.push(Polynomial::linear(ctx, 0, &[(VarId::A, 1), (VarId::X(r), 1), (VarId::Y(j), -1)])?);
    }
    for &(j, r) in &eqs.zero_y {
        factors.push(Polynomial::linear(ctx, 0, &[(VarId::B, 1), (VarId::X(r), -1), (VarId::Y(j), 1)])?);
    }
    let flux_eqs = eqs.equation_count() - eqs.zero_x.len() - eqs.zero_y.len();
    let ab = Polynomial::linear(ctx, 0, &[(VarId::A, 1), (VarId::B, 1)])?;
    factors.push(ab.pow(flux_eqs as u32));
    Ok(Polynomial::product(ctx, &factors))
}

/// Rebuilds tiles by joining, on each square, the edges whose labels agree.
fn tiles_from_labels<K: Eq + Copy + fmt::Debug>(
    beta: &Hybridization,
    m: usize,
    n: usize,
    label: impl Fn(EdgeId) -> Option<K>,
) -> Result<PipeDream> {
    let mut rows = Vec::with_capacity(m);
    for i in 1..=m {
        let t = beta.row(i);
        let mut row = vec![TileKind::Blank; n];
        for j in flow_columns(t, n) {
            let [w, s, e, nn] = square_edges(i, j).map(&label);
            let (side_in, side_out) = match t {
                RowType::W => (w, e),
                RowType::E => (e, w),
            };
            let bad = |reason: &str| FluxError::BadSquare { row: i, col: j, reason: reason.to_string() };
            let tile = match (side_in, s, side_out, nn) {
                (None, None, None, None) => TileKind::Blank,
                (Some(a), None, Some(b), None) if a == b => TileKind::StraightH,
                (None, Some(a), None, Some(b)) if a == b => TileKind::StraightV,
                (Some(a), None, None, Some(b)) if a == b => TileKind::ElbowIn,
                (None, Some(a), Some(b), None) if a == b => TileKind::ElbowOut,
                (Some(a), Some(b), Some(c), Some(d)) => {
                    if a == b {
                        return Err(bad("one label on both inputs"));
                    } else if a == c && b == d {
                        TileKind::Cross
                    } else if a == d && b == c {
                        TileKind::DoubleElbow
                    } else {
                        return Err(bad("labels cannot be paired"));
                    }
                }
                _ => return Err(bad("labels cannot be paired")),
            };
            row[j - 1] = tile;
        }
        rows.push(row);
    }
    Ok(PipeDream::new(beta.clone(), rows)?)
}

/// The dream whose pipes follow the nonzero flux labels.
pub fn reconstruct_dream(eqs: &EquationSet) -> Result<PipeDream> {
    let label = |e: EdgeId| match eqs.flux.get(&e) {
        Some(FluxLabel::T(i)) => Some(*i),
        _ => None,
    };
    let d = tiles_from_labels(&eqs.beta, eqs.m, eqs.n, label)?;
    let pi = d.connectivity().0;
    if pi != eqs.pi {
        return Err(FluxError::WrongConnectivity { expected: eqs.pi.clone(), got: pi });
    }
    Ok(d)
}

/// The dream read off a (reduced) flux table: edges of a square carrying
/// the same nonzero flux are joined by a pipe.
pub fn dream_from_table(beta: &Hybridization, m: usize, n: usize, table: &FluxTable) -> Result<PipeDream> {
    tiles_from_labels(beta, m, n, |e| table.get(&e).filter(|f| !f.is_empty()))
}

/// A matrix entry set to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ZeroVar {
    /// `X_{rj}`.
    X(usize, usize),
    /// `Y_{jr}`.
    Y(usize, usize),
}

impl ZeroVar {
    fn kills(&self, m: &FluxMonomial) -> bool {
        match *self {
            ZeroVar::X(r, j) => m.pipe == r && m.col == j,
            ZeroVar::Y(j, r) => m.pipe == r && m.col == j,
        }
    }
}

/// [`flux_grid`] with monomials containing a zeroed variable deleted and
/// the rewrites applied until no rule matches.
pub fn reduced_flux_table(
    m: usize,
    n: usize,
    beta: &Hybridization,
    zeros: &[ZeroVar],
    rewrites: &[(FluxMonomial, FluxMonomial)],
) -> Result<FluxTable> {
    let normal = |mut x: FluxMonomial| -> Result<FluxMonomial> {
        for _ in 0..=rewrites.len() {
            match rewrites.iter().find(|(from, _)| *from == x) {
                Some((_, to)) => x = *to,
                None => return Ok(x),
            }
        }
        Err(FluxError::CyclicRewrite)
    };
    let mut out = BTreeMap::new();
    for (e, expr) in flux_grid(m, n, beta) {
        let mut reduced = BTreeSet::new();
        for mono in expr.monomials() {
            if zeros.iter().any(|z| z.kills(mono)) {
                continue;
            }
            if !reduced.insert(normal(*mono)?) {
                return Err(FluxError::Collision(e));
            }
        }
        out.insert(e, FluxExpr(reduced));
    }
    Ok(out)
}

/// The table as a `(2m+1) × (2n+1)` lattice: `+` at vertices, V-edge fluxes
/// between them horizontally, H-edge fluxes vertically, and tile glyphs (or
/// blanks) at square centres.
pub fn format_lattice<T: fmt::Display>(
    m: usize,
    n: usize,
    entry: impl Fn(EdgeId) -> T,
    centre: impl Fn(usize, usize) -> String,
) -> String {
    let mut cells: Vec<Vec<String>> = vec![vec![String::new(); 2 * n + 1]; 2 * m + 1];
    for (r, row) in cells.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = match (r % 2, c % 2) {
                (0, 0) => "+".to_string(),
                (0, 1) => entry(EdgeId::h(r / 2, c.div_ceil(2))).to_string(),
                (1, 0) => entry(EdgeId::v(r.div_ceil(2), c / 2)).to_string(),
                _ => centre(r.div_ceil(2), c.div_ceil(2)),
            };
        }
    }
    let widths: Vec<usize> =
        (0..=2 * n).map(|c| cells.iter().map(|row| row[c].chars().count()).max().unwrap_or(0)).collect();
    let mut s = String::new();
    for row in &cells {
        let line: Vec<String> = row.iter().zip(&widths).map(|(x, w)| format!("{x:^w$}")).collect();
        s.push_str(line.join(" ").trim_end());
        s.push('\n');
    }
    s
}

pub fn format_table(m: usize, n: usize, table: &FluxTable) -> String {
    format_lattice(m, n, |e| table[&e].clone(), |_, _| String::new())
}
