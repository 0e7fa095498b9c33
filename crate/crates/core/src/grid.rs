//! Hybrid generic pipe dreams: tiles, hybridizations, validation,
//! enumeration, tracing, weights, and the mirror and crossing-flip maps.
//!
//! Tiles are stored relative to the direction of flow of their row. In a
//! W row a pipe enters from the West and leaves towards the East; in an E row
//! the roles of West and East are exchanged. A tile's "side-in" edge is
//! therefore its West edge in a W row and its East edge in an E row.

use std::fmt;

use thiserror::Error;

use crate::poly::{Context, Polynomial, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("need 1 <= m <= n, got m={m}, n={n}")]
    BadDimensions { m: usize, n: usize },
    #[error("hybridization has length {got}, expected {expected}")]
    BetaLength { expected: usize, got: usize },
    #[error("row {row} has {got} tiles, expected {expected}")]
    RowLength { row: usize, expected: usize, got: usize },
    #[error("inconsistent edge {edge}: {reason}")]
    BadEdge { edge: EdgeId, reason: String },
    #[error("invalid hybridization {0:?}")]
    BadBeta(String),
    #[error("invalid partial permutation: {0}")]
    BadPerm(String),
    #[error("dream text, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("row carries {0} pipes, crossing flip needs exactly one")]
    NotSinglePipe(usize),
    #[error("crossing flip needs a single-row dream, got m={0}")]
    NotSingleRow(usize),
}

pub type Result<T> = std::result::Result<T, GridError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowType {
    W,
    E,
}

impl RowType {
    pub fn flip(self) -> RowType {
        match self {
            RowType::W => RowType::E,
            RowType::E => RowType::W,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            RowType::W => 'W',
            RowType::E => 'E',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hybridization(Vec<RowType>);

impl Hybridization {
    pub fn new(rows: Vec<RowType>) -> Result<Self> {
        if rows.is_empty() {
            return Err(GridError::BadBeta(String::new()));
        }
        Ok(Hybridization(rows))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let rows = s
            .trim()
            .chars()
            .map(|c| match c {
                'W' | 'w' => Ok(RowType::W),
                'E' | 'e' => Ok(RowType::E),
                _ => Err(GridError::BadBeta(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        Hybridization::new(rows).map_err(|_| GridError::BadBeta(s.to_string()))
    }

    pub fn uniform(m: usize, t: RowType) -> Self {
        Hybridization(vec![t; m.max(1)])
    }

    /// All `2^m` hybridizations, W before E, first row most significant.
    pub fn all(m: usize) -> Vec<Hybridization> {
        (0..1usize << m)
            .map(|bits| {
                Hybridization(
                    (0..m).map(|i| if bits >> (m - 1 - i) & 1 == 1 { RowType::E } else { RowType::W }).collect(),
                )
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rows(&self) -> &[RowType] {
        &self.0
    }

    /// Type of physical row `i` (1-based, North first).
    pub fn row(&self, i: usize) -> RowType {
        self.0[i - 1]
    }

    pub fn flipped(&self) -> Hybridization {
        Hybridization(self.0.iter().map(|t| t.flip()).collect())
    }

    /// φ as a vector: entry `i-1` is the number of the pipe entering row `i`.
    pub fn pipe_numbering(&self) -> Vec<usize> {
        let m = self.0.len();
        let mut phi = vec![0; m];
        let mut next = 1;
        for (slot, t) in phi.iter_mut().zip(&self.0) {
            if *t == RowType::W {
                *slot = next;
                next += 1;
            }
        }
        for i in (0..m).rev() {
            if self.0[i] == RowType::E {
                phi[i] = next;
                next += 1;
            }
        }
        phi
    }
}

impl fmt::Display for Hybridization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.0 {
            write!(f, "{}", t.as_char())?;
        }
        Ok(())
    }
}

pub fn pipe_numbering(beta: &Hybridization) -> Vec<usize> {
    beta.pipe_numbering()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TileKind {
    Blank,
    StraightH,
    StraightV,
    Cross,
    ElbowIn,
    ElbowOut,
    DoubleElbow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TileClass {
    Blank,
    Straight,
    Elbow,
}

/// Occupancy of a tile's edges, relative to flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Occupancy {
    pub side_in: bool,
    pub south: bool,
    pub side_out: bool,
    pub north: bool,
}

impl TileKind {
    pub const ALL: [TileKind; 7] = [
        TileKind::Blank,
        TileKind::StraightH,
        TileKind::StraightV,
        TileKind::Cross,
        TileKind::ElbowIn,
        TileKind::ElbowOut,
        TileKind::DoubleElbow,
    ];

    pub fn class(self) -> TileClass {
        match self {
            TileKind::Blank => TileClass::Blank,
            TileKind::StraightH | TileKind::StraightV | TileKind::Cross => TileClass::Straight,
            TileKind::ElbowIn | TileKind::ElbowOut | TileKind::DoubleElbow => TileClass::Elbow,
        }
    }

    pub fn is_elbow(self) -> bool {
        self.class() == TileClass::Elbow
    }

    pub fn occupancy(self) -> Occupancy {
        let (side_in, south, side_out, north) = match self {
            TileKind::Blank => (false, false, false, false),
            TileKind::StraightH => (true, false, true, false),
            TileKind::StraightV => (false, true, false, true),
            TileKind::Cross | TileKind::DoubleElbow => (true, true, true, true),
            TileKind::ElbowIn => (true, false, false, true),
            TileKind::ElbowOut => (false, true, true, false),
        };
        Occupancy { side_in, south, side_out, north }
    }

    /// Tiles admitting the given inputs, in tile order.
    pub fn choices(side_in: bool, south: bool) -> &'static [TileKind] {
        match (side_in, south) {
            (false, false) => &[TileKind::Blank],
            (true, false) => &[TileKind::StraightH, TileKind::ElbowIn],
            (false, true) => &[TileKind::StraightV, TileKind::ElbowOut],
            (true, true) => &[TileKind::Cross, TileKind::DoubleElbow],
        }
    }

    /// Routes labelled inputs to `(side_out, north)`.
    /// Panics if the occupancy does not match the tile.
    pub fn route<T: Copy>(self, side_in: Option<T>, south: Option<T>) -> (Option<T>, Option<T>) {
        let occ = self.occupancy();
        assert!(occ.side_in == side_in.is_some() && occ.south == south.is_some(), "tile {self:?} mismatch");
        match self {
            TileKind::Blank => (None, None),
            TileKind::StraightH => (side_in, None),
            TileKind::StraightV => (None, south),
            TileKind::Cross => (side_in, south),
            TileKind::ElbowIn => (None, side_in),
            TileKind::ElbowOut => (south, None),
            TileKind::DoubleElbow => (south, side_in),
        }
    }

    /// Recovers the tile from its occupancy; `crossing` picks between the two
    /// fully occupied tiles.
    pub fn from_occupancy(occ: Occupancy, crossing: bool) -> Option<TileKind> {
        TileKind::ALL
            .into_iter()
            .filter(|t| t.occupancy() == occ)
            .find(|t| match t {
                TileKind::Cross => crossing,
                TileKind::DoubleElbow => !crossing,
                _ => true,
            })
    }

    pub fn to_char(self) -> char {
        match self {
            TileKind::Blank => '.',
            TileKind::StraightH => '-',
            TileKind::StraightV => '|',
            TileKind::Cross => '+',
            TileKind::ElbowIn => 'n',
            TileKind::ElbowOut => 'e',
            TileKind::DoubleElbow => 'b',
        }
    }

    pub fn from_char(c: char) -> Option<TileKind> {
        TileKind::ALL.into_iter().find(|t| t.to_char() == c)
    }

    /// Whether `mode` permits this tile in a row of type `t`.
    pub fn allowed(self, t: RowType, mode: Mode) -> bool {
        !matches!(
            (mode, t, self),
            (Mode::Nongeneric, RowType::W, TileKind::StraightV) | (Mode::Nongeneric, RowType::E, TileKind::DoubleElbow)
        )
    }
}

/// The linear weight of one tile; `x` is the index of the pipe entering the
/// row and `j` the column.
pub fn tile_weight(ctx: Context, t: RowType, tile: TileKind, x: usize, j: usize) -> Polynomial {
    let plus = [(VarId::A, 1), (VarId::X(x), 1), (VarId::Y(j), -1)];
    let minus = [(VarId::B, 1), (VarId::X(x), -1), (VarId::Y(j), 1)];
    let parts: &[(VarId, i64)] = match (tile.class(), t) {
        (TileClass::Elbow, _) => &[(VarId::A, 1), (VarId::B, 1)],
        (TileClass::Blank, RowType::W) | (TileClass::Straight, RowType::E) => &minus,
        (TileClass::Straight, RowType::W) | (TileClass::Blank, RowType::E) => &plus,
    };
    Polynomial::linear(ctx, 0, parts).expect("tile weight indices lie in context")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Generic,
    Nongeneric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    V,
    H,
}

/// `V(i,j)`: vertical edge East of cell `(i,j)`, `i ∈ 1..=m`, `j ∈ 0..=n`.
/// `H(i,j)`: horizontal edge South of cell `(i,j)`, `i ∈ 0..=m`, `j ∈ 1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId {
    pub kind: EdgeKind,
    pub row: usize,
    pub col: usize,
}

impl EdgeId {
    pub fn v(row: usize, col: usize) -> Self {
        EdgeId { kind: EdgeKind::V, row, col }
    }

    pub fn h(row: usize, col: usize) -> Self {
        EdgeId { kind: EdgeKind::H, row, col }
    }

    /// All edges of an `m × n` grid: V edges row by row, then H edges.
    pub fn all(m: usize, n: usize) -> Vec<EdgeId> {
        let mut out = Vec::with_capacity(m * (n + 1) + (m + 1) * n);
        for i in 1..=m {
            for j in 0..=n {
                out.push(EdgeId::v(i, j));
            }
        }
        for i in 0..=m {
            for j in 1..=n {
                out.push(EdgeId::h(i, j));
            }
        }
        out
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            EdgeKind::V => 'V',
            EdgeKind::H => 'H',
        };
        write!(f, "{k}({},{})", self.row, self.col)
    }
}

/// An injective map `[m] → [n]`, stored one-line.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialPerm {
    values: Vec<usize>,
    n: usize,
}

impl PartialPerm {
    pub fn new(values: Vec<usize>, n: usize) -> Result<Self> {
        if values.is_empty() || values.len() > n {
            return Err(GridError::BadPerm(format!("length {} with n={n}", values.len())));
        }
        let mut seen = vec![false; n + 1];
        for &v in &values {
            if v == 0 || v > n {
                return Err(GridError::BadPerm(format!("value {v} outside 1..={n}")));
            }
            if seen[v] {
                return Err(GridError::BadPerm(format!("value {v} repeated")));
            }
            seen[v] = true;
        }
        Ok(PartialPerm { values, n })
    }

    /// Parses `"1,3,4"`.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let values = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| GridError::BadPerm(format!("cannot parse {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        PartialPerm::new(values, n)
    }

    pub fn identity(m: usize, n: usize) -> Self {
        PartialPerm { values: (1..=m).collect(), n }
    }

    /// All injective maps `[m] → [n]` in lexicographic order.
    pub fn all(m: usize, n: usize) -> Vec<PartialPerm> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(m);
        let mut used = vec![false; n + 1];
        fn rec(m: usize, n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<PartialPerm>) {
            if cur.len() == m {
                out.push(PartialPerm { values: cur.clone(), n });
                return;
            }
            for v in 1..=n {
                if !used[v] {
                    used[v] = true;
                    cur.push(v);
                    rec(m, n, cur, used, out);
                    cur.pop();
                    used[v] = false;
                }
            }
        }
        rec(m, n, &mut cur, &mut used, &mut out);
        out
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// `π(i)`, 1-based.
    pub fn get(&self, i: usize) -> usize {
        self.values[i - 1]
    }

    pub fn is_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] > w[1])
    }

    /// `π ∘ r_i`: exchanges the values at positions `i` and `i+1`.
    pub fn swap(&self, i: usize) -> PartialPerm {
        let mut values = self.values.clone();
        values.swap(i - 1, i);
        PartialPerm { values, n: self.n }
    }

    /// `γ_n ∘ π ∘ γ_m`.
    pub fn mirror(&self) -> PartialPerm {
        let values = self.values.iter().rev().map(|v| self.n + 1 - v).collect();
        PartialPerm { values, n: self.n }
    }

    /// The same image arranged in decreasing order.
    pub fn sorted_decreasing(&self) -> PartialPerm {
        let mut values = self.values.clone();
        values.sort_unstable_by(|a, b| b.cmp(a));
        PartialPerm { values, n: self.n }
    }
}

impl fmt::Display for PartialPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Pipe pairs meeting at Cross tiles, each stored as `(smaller, larger)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CrossingRecord {
    pairs: Vec<(usize, usize)>,
}

impl CrossingRecord {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Self {
        for p in &mut pairs {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.sort_unstable();
        CrossingRecord { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn has_repeat(&self) -> bool {
        self.pairs.windows(2).any(|w| w[0] == w[1])
    }
}

/// Pipe labels on every edge, obtained by tracing a dream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    m: usize,
    n: usize,
    v: Vec<Option<usize>>,
    h: Vec<Option<usize>>,
    pub crossings: CrossingRecord,
    pub pi: PartialPerm,
}

impl Trace {
    pub fn v(&self, i: usize, j: usize) -> Option<usize> {
        self.v[(i - 1) * (self.n + 1) + j]
    }

    pub fn h(&self, i: usize, j: usize) -> Option<usize> {
        self.h[i * self.n + j - 1]
    }

    pub fn label(&self, e: EdgeId) -> Option<usize> {
        match e.kind {
            EdgeKind::V => self.v(e.row, e.col),
            EdgeKind::H => self.h(e.row, e.col),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PipeDream {
    m: usize,
    n: usize,
    beta: Hybridization,
    tiles: Vec<TileKind>,
}

/// Physical occupancy `(west, south, east, north)` of a tile in a row.
fn physical(t: RowType, tile: TileKind) -> (bool, bool, bool, bool) {
    let o = tile.occupancy();
    match t {
        RowType::W => (o.side_in, o.south, o.side_out, o.north),
        RowType::E => (o.side_out, o.south, o.side_in, o.north),
    }
}

/// Columns of a row in flow order (1-based).
pub fn flow_columns(t: RowType, n: usize) -> Box<dyn Iterator<Item = usize>> {
    match t {
        RowType::W => Box::new(1..=n),
        RowType::E => Box::new((1..=n).rev()),
    }
}

impl PipeDream {
    /// Builds and validates a dream from its rows, North first.
    pub fn new(beta: Hybridization, rows: Vec<Vec<TileKind>>) -> Result<Self> {
        let m = beta.len();
        if rows.len() != m {
            return Err(GridError::BetaLength { expected: rows.len(), got: m });
        }
        let n = rows.first().map_or(0, |r| r.len());
        if m == 0 || m > n {
            return Err(GridError::BadDimensions { m, n });
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(GridError::RowLength { row: i + 1, expected: n, got: r.len() });
            }
        }
        let d = PipeDream { m, n, beta, tiles: rows.concat() };
        d.validate()?;
        Ok(d)
    }

    fn from_parts_unchecked(m: usize, n: usize, beta: Hybridization, tiles: Vec<TileKind>) -> Self {
        PipeDream { m, n, beta, tiles }
    }

    /// Checks edge consistency and the boundary rules, reporting the first
    /// offending edge (rows North to South; V edges West to East, then the H
    /// edges below the row).
    pub fn validate(&self) -> Result<()> {
        let bad = |edge, reason: &str| Err(GridError::BadEdge { edge, reason: reason.to_string() });
        for i in 1..=self.m {
            let t = self.beta.row(i);
            let occ: Vec<_> = (1..=self.n).map(|j| physical(t, self.tile(i, j))).collect();
            let west_boundary = occ[0].0;
            if west_boundary != (t == RowType::W) {
                return bad(EdgeId::v(i, 0), "row boundary occupancy contradicts row type");
            }
            for j in 1..self.n {
                if occ[j - 1].2 != occ[j].0 {
                    return bad(EdgeId::v(i, j), "neighbouring tiles disagree");
                }
            }
            if occ[self.n - 1].2 != (t == RowType::E) {
                return bad(EdgeId::v(i, self.n), "row boundary occupancy contradicts row type");
            }
            for j in 1..=self.n {
                let below = if i < self.m { physical(self.beta.row(i + 1), self.tile(i + 1, j)).3 } else { false };
                if occ[j - 1].1 != below {
                    let reason = if i < self.m { "neighbouring tiles disagree" } else { "pipe enters from the South" };
                    return bad(EdgeId::h(i, j), reason);
                }
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn context(&self) -> Context {
        Context::new(self.m, self.n)
    }

    pub fn beta(&self) -> &Hybridization {
        &self.beta
    }

    /// Tile at row `i`, column `j` (1-based, row 1 North).
    pub fn tile(&self, i: usize, j: usize) -> TileKind {
        self.tiles[(i - 1) * self.n + j - 1]
    }

    /// Row `i` (1-based), West to East.
    pub fn row(&self, i: usize) -> &[TileKind] {
        &self.tiles[(i - 1) * self.n..i * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<TileKind>> {
        self.tiles.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn tiles(&self) -> &[TileKind] {
        &self.tiles
    }

    pub fn count(&self, pred: impl Fn(TileKind) -> bool) -> usize {
        self.tiles.iter().filter(|t| pred(**t)).count()
    }

    pub fn trace(&self) -> Trace {
        let (m, n) = (self.m, self.n);
        let phi = self.beta.pipe_numbering();
        let mut v = vec![None; m * (n + 1)];
        let mut h = vec![None; (m + 1) * n];
        let mut crossings = Vec::new();
        for i in (1..=m).rev() {
            let t = self.beta.row(i);
            let mut carry = Some(phi[i - 1]);
            for j in flow_columns(t, n) {
                let south = h[i * n + j - 1];
                let tile = self.tile(i, j);
                let (out, north) = tile.route(carry, south);
                if tile == TileKind::Cross {
                    crossings.push((carry.unwrap(), south.unwrap()));
                }
                let (west, east) = match t {
                    RowType::W => (carry, out),
                    RowType::E => (out, carry),
                };
                v[(i - 1) * (n + 1) + j - 1] = west;
                v[(i - 1) * (n + 1) + j] = east;
                h[(i - 1) * n + j - 1] = north;
                carry = out;
            }
        }
        let mut values = vec![0; m];
        for j in 1..=n {
            if let Some(p) = h[j - 1] {
                values[p - 1] = j;
            }
        }
        let pi = PartialPerm::new(values, n).expect("valid dream has m distinct exits");
        Trace { m, n, v, h, crossings: CrossingRecord::new(crossings), pi }
    }

    pub fn connectivity(&self) -> (PartialPerm, CrossingRecord) {
        let t = self.trace();
        (t.pi, t.crossings)
    }

    /// The per-tile weight factors, row by row.
    pub fn weight_factors(&self) -> Vec<Vec<Polynomial>> {
        let ctx = self.context();
        let phi = self.beta.pipe_numbering();
        (1..=self.m)
            .map(|i| {
                let t = self.beta.row(i);
                (1..=self.n).map(|j| tile_weight(ctx, t, self.tile(i, j), phi[i - 1], j)).collect()
            })
            .collect()
    }

    pub fn row_weight(&self, i: usize) -> Polynomial {
        let f = &self.weight_factors()[i - 1];
        Polynomial::product(self.context(), f)
    }

    pub fn weight(&self) -> Polynomial {
        let f = self.weight_factors();
        Polynomial::product(self.context(), f.iter().flatten())
    }

    /// No StraightV in W rows, no DoubleElbow in E rows, no pair crossing twice.
    pub fn is_nongeneric(&self) -> bool {
        let kinds_ok = (1..=self.m).all(|i| {
            let t = self.beta.row(i);
            self.row(i).iter().all(|k| k.allowed(t, Mode::Nongeneric))
        });
        kinds_ok && !self.trace().crossings.has_repeat()
    }

    /// Left-right reflection; row types flip and tile kinds are kept.
    pub fn mirror(&self) -> PipeDream {
        let tiles = self.tiles.chunks(self.n).flat_map(|r| r.iter().rev().copied()).collect();
        PipeDream::from_parts_unchecked(self.m, self.n, self.beta.flipped(), tiles)
    }

    /// Crossing flip of a single-row dream.
    pub fn crossing_flip(&self) -> Result<PipeDream> {
        if self.m != 1 {
            return Err(GridError::NotSingleRow(self.m));
        }
        let r = Row::new(self.beta.row(1), self.tiles.clone()).crossing_flip()?;
        PipeDream::new(Hybridization(vec![r.row_type]), vec![r.tiles])
    }

    pub fn serialize(&self) -> String {
        let mut s = format!("{} {}\n{}\n", self.m, self.n, self.beta);
        for r in self.tiles.chunks(self.n) {
            s.extend(r.iter().map(|t| t.to_char()));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<PipeDream> {
        parse_dream(text)
    }
}

impl fmt::Display for PipeDream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

pub fn parse_dream(text: &str) -> Result<PipeDream> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let perr = |line: usize, msg: &str| GridError::Parse { line: line + 1, msg: msg.to_string() };
    let (ln, dims) = lines.next().ok_or_else(|| perr(0, "missing dimensions"))?;
    let nums: Vec<usize> = dims
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| perr(ln, "dimensions must be two integers")))
        .collect::<Result<_>>()?;
    let [m, n] = nums[..] else { return Err(perr(ln, "dimensions must be two integers")) };
    let (lb, beta) = lines.next().ok_or_else(|| perr(ln + 1, "missing hybridization"))?;
    let beta = Hybridization::parse(beta).map_err(|_| perr(lb, "hybridization must use W and E"))?;
    if beta.len() != m {
        return Err(perr(lb, "hybridization length differs from m"));
    }
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let (lr, row) = lines.next().ok_or_else(|| perr(lb + rows.len() + 1, "missing tile row"))?;
        let row: Vec<TileKind> = row
            .trim()
            .chars()
            .map(|c| TileKind::from_char(c).ok_or_else(|| perr(lr, &format!("unknown tile '{c}'"))))
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(perr(lr, "row length differs from n"));
        }
        rows.push(row);
    }
    if let Some((l, _)) = lines.next() {
        return Err(perr(l, "trailing content"));
    }
    PipeDream::new(beta, rows)
}

/// A single row strip, West to East, whose pipe enters from its side.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Row {
    pub row_type: RowType,
    pub tiles: Vec<TileKind>,
}

impl Row {
    pub fn new(row_type: RowType, tiles: Vec<TileKind>) -> Self {
        Row { row_type, tiles }
    }

    /// Physical occupancy of the `n+1` vertical edges, West to East, or
    /// `None` if neighbouring tiles disagree.
    pub fn vertical(&self) -> Option<Vec<bool>> {
        let occ: Vec<_> = self.tiles.iter().map(|t| physical(self.row_type, *t)).collect();
        let mut v = vec![occ.first()?.0];
        for w in occ.windows(2) {
            if w[0].2 != w[1].0 {
                return None;
            }
        }
        v.extend(occ.iter().map(|o| o.2));
        Some(v)
    }

    pub fn south(&self) -> Vec<bool> {
        self.tiles.iter().map(|t| t.occupancy().south).collect()
    }

    pub fn north(&self) -> Vec<bool> {
        self.tiles.iter().map(|t| t.occupancy().north).collect()
    }

    /// Whether this is a valid dream row: consistent, side-in occupied and
    /// side-out empty.
    pub fn is_valid(&self) -> bool {
        match self.vertical() {
            None => false,
            Some(v) => {
                let (w, e) = (v[0], v[v.len() - 1]);
                (self.row_type == RowType::W) == w && (self.row_type == RowType::E) == e
            }
        }
    }

    pub fn pipe_count(&self) -> usize {
        1 + self.south().iter().filter(|s| **s).count()
    }

    pub fn weight(&self, ctx: Context, x: usize) -> Polynomial {
        let f: Vec<_> =
            self.tiles.iter().enumerate().map(|(k, t)| tile_weight(ctx, self.row_type, *t, x, k + 1)).collect();
        Polynomial::product(ctx, &f)
    }

    /// Flips every vertical edge and the row type, keeping North/South.
    pub fn crossing_flip(&self) -> Result<Row> {
        let v = self.vertical().filter(|_| self.is_valid()).ok_or_else(|| GridError::BadEdge {
            edge: EdgeId::v(1, 0),
            reason: "row strip is not a valid dream row".to_string(),
        })?;
        let pipes = self.pipe_count();
        if pipes != 1 {
            return Err(GridError::NotSinglePipe(pipes));
        }
        let t = self.row_type.flip();
        let tiles = self
            .tiles
            .iter()
            .enumerate()
            .map(|(k, tile)| {
                let (west, east) = (!v[k], !v[k + 1]);
                let o = tile.occupancy();
                let (side_in, side_out) = match t {
                    RowType::W => (west, east),
                    RowType::E => (east, west),
                };
                let occ = Occupancy { side_in, south: o.south, side_out, north: o.north };
                TileKind::from_occupancy(occ, false).expect("single-pipe flip stays consistent")
            })
            .collect();
        Ok(Row { row_type: t, tiles })
    }

    /// All valid rows of type `t` with empty South boundary.
    pub fn single_pipe_rows(t: RowType, n: usize) -> Vec<Row> {
        (1..=n)
            .map(|exit| {
                let tiles = (1..=n)
                    .map(|j| {
                        let before = match t {
                            RowType::W => j < exit,
                            RowType::E => j > exit,
                        };
                        if j == exit {
                            TileKind::ElbowIn
                        } else if before {
                            TileKind::StraightH
                        } else {
                            TileKind::Blank
                        }
                    })
                    .collect();
                Row { row_type: t, tiles }
            })
            .collect()
    }
}

/// One way of filling a row given its inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowFilling {
    /// Tiles West to East.
    pub tiles: Vec<TileKind>,
    /// Labels on the North edges, West to East.
    pub north: Vec<Option<usize>>,
    /// Pipe pairs crossing in this row.
    pub crossings: Vec<(usize, usize)>,
}

/// All fillings of a row of type `t` whose side pipe is `pipe` and whose
/// South edges carry `south`, with empty trailing side edge, in
/// enumeration order.
pub fn row_fillings(t: RowType, pipe: usize, south: &[Option<usize>], mode: Mode) -> Vec<RowFilling> {
    let n = south.len();
    let cols: Vec<usize> = flow_columns(t, n).collect();
    let mut out = Vec::new();
    let mut tiles = vec![TileKind::Blank; n];
    let mut north = vec![None; n];
    fn rec(
        k: usize,
        carry: Option<usize>,
        t: RowType,
        cols: &[usize],
        south: &[Option<usize>],
        mode: Mode,
        tiles: &mut Vec<TileKind>,
        north: &mut Vec<Option<usize>>,
        out: &mut Vec<RowFilling>,
    ) {
        if k == cols.len() {
            if carry.is_none() {
                out.push(RowFilling { tiles: tiles.clone(), north: north.clone(), crossings: Vec::new() });
            }
            return;
        }
        let j = cols[k] - 1;
        for &tile in TileKind::choices(carry.is_some(), south[j].is_some()) {
            if !tile.allowed(t, mode) {
                continue;
            }
            let (o, nn) = tile.route(carry, south[j]);
            tiles[j] = tile;
            north[j] = nn;
            rec(k + 1, o, t, cols, south, mode, tiles, north, out);
        }
    }
    rec(0, Some(pipe), t, &cols, south, mode, &mut tiles, &mut north, &mut out);
    // Crossing pairs are recovered by replaying the routing.
    for f in &mut out {
        let mut carry = Some(pipe);
        for &c in &cols {
            let tile = f.tiles[c - 1];
            if tile == TileKind::Cross {
                let (a, b) = (carry.unwrap(), south[c - 1].unwrap());
                f.crossings.push((a.min(b), a.max(b)));
            }
            carry = tile.route(carry, south[c - 1]).0;
        }
    }
    out
}

/// Deterministic depth-first enumeration of dreams.
///
/// Rows are filled South to North, each in flow order, trying tiles in
/// [`TileKind`] order.
pub struct Dreams {
    m: usize,
    n: usize,
    beta: Hybridization,
    phi: Vec<usize>,
    mode: Mode,
    target: Option<Vec<Option<usize>>>,
    cells: Vec<(usize, usize)>,
    choice: Vec<usize>,
    tiles: Vec<TileKind>,
    north: Vec<Option<usize>>,
    carry: Vec<Option<usize>>,
    crossed: Vec<u8>,
    depth: usize,
    started: bool,
    finished: bool,
}

enum Placement {
    Placed,
    Rejected,
    Exhausted,
}

pub fn enumerate(
    m: usize,
    n: usize,
    beta: &Hybridization,
    filter: Option<&PartialPerm>,
    mode: Mode,
) -> Result<Dreams> {
    if m == 0 || m > n {
        return Err(GridError::BadDimensions { m, n });
    }
    if beta.len() != m {
        return Err(GridError::BetaLength { expected: m, got: beta.len() });
    }
    let target = match filter {
        Some(pi) => {
            if pi.m() != m || pi.n() != n {
                return Err(GridError::BadPerm(format!("{pi} is not in S({m},{n})")));
            }
            let mut t = vec![None; n];
            for (k, &j) in pi.values().iter().enumerate() {
                t[j - 1] = Some(k + 1);
            }
            Some(t)
        }
        None => None,
    };
    let mut cells = Vec::with_capacity(m * n);
    for i in (1..=m).rev() {
        for j in flow_columns(beta.row(i), n) {
            cells.push((i, j));
        }
    }
    Ok(Dreams {
        m,
        n,
        beta: beta.clone(),
        phi: beta.pipe_numbering(),
        mode,
        target,
        cells,
        choice: vec![0; m * n],
        tiles: vec![TileKind::Blank; m * n],
        north: vec![None; m * n],
        carry: vec![None; m * n],
        crossed: vec![0; (m + 1) * (m + 1)],
        depth: 0,
        started: false,
        finished: false,
    })
}

impl Dreams {
    fn inputs(&self, k: usize) -> (Option<usize>, Option<usize>) {
        let (i, j) = self.cells[k];
        let first_in_row = k == 0 || self.cells[k - 1].0 != i;
        let side = if first_in_row { Some(self.phi[i - 1]) } else { self.carry[k - 1] };
        let south = if i == self.m { None } else { self.north[i * self.n + j - 1] };
        (side, south)
    }

    fn try_place(&mut self, k: usize) -> Placement {
        let (side, south) = self.inputs(k);
        let choices = TileKind::choices(side.is_some(), south.is_some());
        let Some(&tile) = choices.get(self.choice[k]) else { return Placement::Exhausted };
        let (i, j) = self.cells[k];
        if !tile.allowed(self.beta.row(i), self.mode) {
            return Placement::Rejected;
        }
        let (out, north) = tile.route(side, south);
        let last_in_row = k + 1 == self.cells.len() || self.cells[k + 1].0 != i;
        if last_in_row && out.is_some() {
            return Placement::Rejected;
        }
        if i == 1 {
            if let Some(t) = &self.target {
                if t[j - 1] != north {
                    return Placement::Rejected;
                }
            }
        }
        if tile == TileKind::Cross {
            let slot = self.pair_slot(side.unwrap(), south.unwrap());
            if self.mode == Mode::Nongeneric && self.crossed[slot] >= 1 {
                return Placement::Rejected;
            }
            self.crossed[slot] += 1;
        }
        let idx = (i - 1) * self.n + j - 1;
        self.tiles[idx] = tile;
        self.north[idx] = north;
        self.carry[k] = out;
        Placement::Placed
    }

    fn pair_slot(&self, a: usize, b: usize) -> usize {
        a.min(b) * (self.m + 1) + a.max(b)
    }

    fn undo(&mut self, k: usize) {
        let (i, j) = self.cells[k];
        if self.tiles[(i - 1) * self.n + j - 1] == TileKind::Cross {
            let (side, south) = self.inputs(k);
            let slot = self.pair_slot(side.unwrap(), south.unwrap());
            self.crossed[slot] -= 1;
        }
    }

    /// Steps back to the previous cell and advances its choice.
    fn pop(&mut self) -> bool {
        if self.depth == 0 {
            return false;
        }
        self.depth -= 1;
        self.undo(self.depth);
        self.choice[self.depth] += 1;
        true
    }
}

impl Iterator for Dreams {
    type Item = PipeDream;

    fn next(&mut self) -> Option<PipeDream> {
        if self.finished {
            return None;
        }
        if self.started && !self.pop() {
            self.finished = true;
            return None;
        }
        self.started = true;
        loop {
            match self.try_place(self.depth) {
                Placement::Placed => {
                    self.depth += 1;
                    if self.depth == self.cells.len() {
                        return Some(PipeDream::from_parts_unchecked(
                            self.m,
                            self.n,
                            self.beta.clone(),
                            self.tiles.clone(),
                        ));
                    }
                    self.choice[self.depth] = 0;
                }
                Placement::Rejected => self.choice[self.depth] += 1,
                Placement::Exhausted => {
                    if !self.pop() {
                        self.finished = true;
                        return None;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use TileKind::*;

    fn beta(s: &str) -> Hybridization {
        Hybridization::parse(s).unwrap()
    }

    fn count(m: usize, n: usize, b: &str, pi: &str) -> usize {
        let pi = PartialPerm::parse(pi, n).unwrap();
        enumerate(m, n, &beta(b), Some(&pi), Mode::Generic).unwrap().count()
    }

    #[test]
    fn numbering() {
        assert_eq!(beta("WEW").pipe_numbering(), vec![1, 3, 2]);
        assert_eq!(beta("WWWW").pipe_numbering(), vec![1, 2, 3, 4]);
        assert_eq!(beta("EE").pipe_numbering(), vec![2, 1]);
    }

    #[test]
    fn small_counts() {
        assert_eq!(count(3, 3, "EWE", "3,1,2"), 2);
        assert_eq!(count(3, 3, "WWW", "3,1,2"), 2);
        assert_eq!(count(1, 1, "W", "1"), 1);
    }

    #[test]
    fn intro_dream_connectivity() {
        let d = PipeDream::new(
            beta("WEW"),
            vec![
                vec![ElbowIn, ElbowOut, Cross, ElbowIn],
                vec![Blank, ElbowIn, Cross, StraightH],
                vec![StraightH, StraightH, ElbowIn, Blank],
            ],
        )
        .unwrap();
        assert_eq!(d.connectivity().0.to_string(), "1,3,4");
    }

    #[test]
    fn decreasing_two_by_two() {
        let d = PipeDream::new(beta("WW"), vec![vec![Cross, ElbowIn], vec![ElbowIn, Blank]]).unwrap();
        let (pi, cr) = d.connectivity();
        assert_eq!(pi.values(), &[2, 1]);
        assert_eq!(cr.pairs(), &[(1, 2)]);
        let all: Vec<_> = enumerate(2, 2, &beta("WW"), Some(&pi), Mode::Generic).unwrap().collect();
        assert_eq!(all, vec![d]);
    }

    #[test]
    fn validation_names_first_bad_edge() {
        let err = PipeDream::new(beta("W"), vec![vec![StraightH, StraightH]]).unwrap_err();
        assert_eq!(err, GridError::BadEdge { edge: EdgeId::v(1, 2), reason: "row boundary occupancy contradicts row type".into() });
        let err = PipeDream::new(beta("WW"), vec![vec![ElbowIn, Blank], vec![ElbowIn, Blank]]).unwrap_err();
        assert!(matches!(err, GridError::BadEdge { edge, .. } if edge == EdgeId::h(1, 1)));
        let err = PipeDream::new(beta("W"), vec![vec![Cross]]).unwrap_err();
        assert!(matches!(err, GridError::BadEdge { edge, .. } if edge == EdgeId::v(1, 1)));
        let err = PipeDream::new(beta("E"), vec![vec![StraightH, ElbowIn]]).unwrap_err();
        assert!(matches!(err, GridError::BadEdge { edge, .. } if edge == EdgeId::v(1, 0)));
    }

    #[test]
    fn serialization() {
        let d = PipeDream::new(beta("W"), vec![vec![ElbowIn]]).unwrap();
        assert_eq!(d.serialize(), "1 1\nW\nn\n");
        let d = PipeDream::new(beta("WE"), vec![vec![ElbowIn, StraightV], vec![Blank, ElbowIn]]).unwrap();
        assert_eq!(d.serialize(), "2 2\nWE\nn|\n.n\n");
        for b in Hybridization::all(2) {
            for d in enumerate(2, 2, &b, None, Mode::Generic).unwrap() {
                assert_eq!(parse_dream(&d.serialize()).unwrap(), d);
            }
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_dream("1 1\nW\nx\n"), Err(GridError::Parse { line: 3, .. })));
        assert!(matches!(parse_dream("1 2\nW\nn\n"), Err(GridError::Parse { line: 3, .. })));
        assert!(matches!(parse_dream("1 2\nW\n-.\n"), Err(GridError::BadEdge { .. })));
    }

    #[test]
    fn mirror_examples() {
        let d = PipeDream::new(beta("W"), vec![vec![ElbowIn, Blank]]).unwrap();
        let e = d.mirror();
        assert_eq!(e.beta().to_string(), "E");
        assert_eq!(e.row(1), &[Blank, ElbowIn]);
        assert_eq!(e.mirror(), d);
    }

    #[test]
    fn flip_example() {
        let r = Row::new(RowType::W, vec![StraightH, StraightH, ElbowIn, Blank]);
        let f = r.crossing_flip().unwrap();
        assert_eq!(f, Row::new(RowType::E, vec![Blank, Blank, ElbowIn, StraightH]));
        assert_eq!(f.crossing_flip().unwrap(), r);
        let one = Row::new(RowType::W, vec![ElbowIn]);
        assert_eq!(one.crossing_flip().unwrap(), Row::new(RowType::E, vec![ElbowIn]));
        let two = Row::new(RowType::W, vec![Cross, ElbowIn]);
        assert_eq!(two.crossing_flip(), Err(GridError::NotSinglePipe(2)));
    }

    #[test]
    fn row_fillings_match_enumeration_rows() {
        let f = row_fillings(RowType::W, 1, &[None, None, None], Mode::Generic);
        assert_eq!(f.len(), 3);
        assert_eq!(f[0].tiles, vec![StraightH, StraightH, ElbowIn]);
        assert_eq!(f[2].north, vec![Some(1), None, None]);
        let f = row_fillings(RowType::E, 2, &[None, Some(1)], Mode::Generic);
        assert!(f.iter().any(|r| r.crossings == vec![(1, 2)]));
    }

    #[test]
    fn weights() {
        let d = PipeDream::new(beta("W"), vec![vec![ElbowIn]]).unwrap();
        assert_eq!(d.weight().to_string(), "A + B");
    }
}
