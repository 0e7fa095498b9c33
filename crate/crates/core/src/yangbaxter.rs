//! Vertex tables for the row squares and the two diamond kinds, and
//! symbolic verification of the two Yang–Baxter relations.
//!
//! All weights live in context `m = 2, n = 1`: the first spectral parameter
//! `x` is `x1`, the second `x'` is `x2`, and the column parameter `y` is `y1`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::grid::{self, Mode, Row, RowType};
use crate::poly::{Context, Polynomial, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum YbeError {
    #[error("boundary has {inputs} occupied inputs but {outputs} occupied outputs")]
    OccupancyMismatch { inputs: usize, outputs: usize },
    #[error("{0} admissible entries, expected exactly one")]
    NotForced(usize),
}

pub type Result<T> = std::result::Result<T, YbeError>;

pub fn context() -> Context {
    Context::new(2, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeState {
    Empty,
    Pipe(u8),
}

impl EdgeState {
    pub fn is_occupied(self) -> bool {
        self != EdgeState::Empty
    }
}

impl fmt::Display for EdgeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeState::Empty => f.write_str("0"),
            EdgeState::Pipe(p) => write!(f, "{}", (b'P' + p) as char),
        }
    }
}

/// Which spectral parameter a row square carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    X,
    XPrime,
}

impl Param {
    fn var(self) -> VarId {
        match self {
            Param::X => VarId::X(1),
            Param::XPrime => VarId::X(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    /// Inputs (W, S), outputs (E, N).
    WSquare(Param),
    /// Inputs (E, S), outputs (W, N).
    ESquare(Param),
    /// Inputs (tl, bl), outputs (tr, br).
    RightDiamond,
    /// Inputs (br, bl), outputs (tl, tr).
    UpDiamond,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub name: &'static str,
    pub inputs: [bool; 2],
    /// For each output channel, the input channel feeding it.
    pub out_from: [Option<usize>; 2],
    pub weight: Polynomial,
}

impl Entry {
    pub fn outputs(&self) -> [bool; 2] {
        [self.out_from[0].is_some(), self.out_from[1].is_some()]
    }

    pub fn is_bijective(&self) -> bool {
        let occupied: Vec<usize> = (0..2).filter(|&c| self.inputs[c]).collect();
        let mut fed: Vec<usize> = self.out_from.iter().flatten().copied().collect();
        fed.sort_unstable();
        fed == occupied
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexTable {
    pub kind: VertexKind,
    pub entries: Vec<Entry>,
}

fn lin(parts: &[(VarId, i64)]) -> Polynomial {
    Polynomial::linear(context(), 0, parts).unwrap()
}

fn entry(name: &'static str, inputs: [bool; 2], out_from: [Option<usize>; 2], weight: Polynomial) -> Entry {
    Entry { name, inputs, out_from, weight }
}

impl VertexTable {
    pub fn new(kind: VertexKind) -> Self {
        let (a, b, y) = (VarId::A, VarId::B, VarId::Y(1));
        let (x1, x2) = (VarId::X(1), VarId::X(2));
        let ab = lin(&[(a, 1), (b, 1)]);
        let entries = match kind {
            VertexKind::WSquare(p) | VertexKind::ESquare(p) => {
                let x = p.var();
                let plus = lin(&[(a, 1), (x, 1), (y, -1)]);
                let minus = lin(&[(b, 1), (x, -1), (y, 1)]);
                let (blank, straight) =
                    if matches!(kind, VertexKind::WSquare(_)) { (minus, plus) } else { (plus, minus) };
                vec![
                    entry("blank", [false, false], [None, None], blank),
                    entry("horizontal", [true, false], [Some(0), None], straight.clone()),
                    entry("vertical", [false, true], [None, Some(1)], straight.clone()),
                    entry("cross", [true, true], [Some(0), Some(1)], straight),
                    entry("elbow in", [true, false], [None, Some(0)], ab.clone()),
                    entry("elbow out", [false, true], [Some(1), None], ab.clone()),
                    entry("double elbow", [true, true], [Some(1), Some(0)], ab),
                ]
            }
            VertexKind::RightDiamond => {
                let d = lin(&[(x2, 1), (x1, -1)]);
                let s = lin(&[(a, 1), (b, 1), (x1, 1), (x2, -1)]);
                vec![
                    entry("blank", [false, false], [None, None], s),
                    entry("upper straight", [true, false], [None, Some(0)], d.clone()),
                    entry("upper elbow", [true, false], [Some(0), None], ab.clone()),
                    entry("lower straight", [false, true], [Some(1), None], d.clone()),
                    entry("lower elbow", [false, true], [None, Some(1)], ab.clone()),
                    entry("cross", [true, true], [Some(1), Some(0)], d),
                    entry("double elbow", [true, true], [Some(0), Some(1)], ab),
                ]
            }
            VertexKind::UpDiamond => {
                let d = lin(&[(x2, 1), (x1, -1)]);
                let s = lin(&[(a, 1), (b, 1), (x1, 1), (x2, -1)]);
                vec![
                    entry("blank", [false, false], [None, None], d),
                    entry("right straight", [true, false], [Some(0), None], s.clone()),
                    entry("right elbow", [true, false], [None, Some(0)], ab.clone()),
                    entry("left straight", [false, true], [None, Some(1)], s.clone()),
                    entry("left elbow", [false, true], [Some(1), None], ab.clone()),
                    entry("cross", [true, true], [Some(0), Some(1)], s),
                    entry("double elbow", [true, true], [Some(1), Some(0)], ab),
                ]
            }
        };
        VertexTable { kind, entries }
    }

    /// Entries compatible with the inputs, with the resulting outputs.
    pub fn apply(&self, inputs: [EdgeState; 2]) -> impl Iterator<Item = (&Entry, [EdgeState; 2])> {
        self.entries.iter().filter(move |e| e.inputs == inputs.map(EdgeState::is_occupied)).map(move |e| {
            let out = e.out_from.map(|c| c.map_or(EdgeState::Empty, |c| inputs[c]));
            (e, out)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HexSide {
    UpperWest,
    LowerWest,
    South,
    LowerEast,
    UpperEast,
    North,
}

impl fmt::Display for HexSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HexSide::UpperWest => "UW",
            HexSide::LowerWest => "LW",
            HexSide::South => "S",
            HexSide::LowerEast => "LE",
            HexSide::UpperEast => "UE",
            HexSide::North => "N",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum YbeMode {
    WW,
    WE,
}

impl fmt::Display for YbeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            YbeMode::WW => "ww",
            YbeMode::WE => "we",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layout {
    WwLeft,
    WwRight,
    WeLeft,
    WeRight,
}

impl Layout {
    pub fn mode(self) -> YbeMode {
        match self {
            Layout::WwLeft | Layout::WwRight => YbeMode::WW,
            Layout::WeLeft | Layout::WeRight => YbeMode::WE,
        }
    }
}

impl YbeMode {
    pub fn inputs(self) -> [HexSide; 3] {
        match self {
            YbeMode::WW => [HexSide::UpperWest, HexSide::LowerWest, HexSide::South],
            YbeMode::WE => [HexSide::LowerWest, HexSide::LowerEast, HexSide::South],
        }
    }

    pub fn outputs(self) -> [HexSide; 3] {
        match self {
            YbeMode::WW => [HexSide::UpperEast, HexSide::LowerEast, HexSide::North],
            YbeMode::WE => [HexSide::UpperWest, HexSide::UpperEast, HexSide::North],
        }
    }

    pub fn layouts(self) -> (Layout, Layout) {
        match self {
            YbeMode::WW => (Layout::WwLeft, Layout::WwRight),
            YbeMode::WE => (Layout::WeLeft, Layout::WeRight),
        }
    }
}

/// Output states on the three external out-channels; with distinct input
/// labels this determines the in→out matching.
pub type ConnectivityClass = [EdgeState; 3];

/// Weight of each tiling in each class.
pub type ClassTerms = BTreeMap<ConnectivityClass, Vec<Polynomial>>;

/// Per-tiling weights of a layout, grouped by connectivity class.
pub fn cluster_terms(layout: Layout, boundary: [EdgeState; 3]) -> ClassTerms {
    use Param::*;
    use VertexKind::*;
    let rd = VertexTable::new(RightDiamond);
    let ud = VertexTable::new(UpDiamond);
    let w = |p| VertexTable::new(WSquare(p));
    let e = |p| VertexTable::new(ESquare(p));
    let mut out: ClassTerms = BTreeMap::new();
    let mut push = |class: ConnectivityClass, ws: [&Polynomial; 3]| {
        out.entry(class).or_default().push(&(ws[0] * ws[1]) * ws[2]);
    };
    let [i0, i1, s] = boundary;
    match layout {
        Layout::WwLeft => {
            let (top, bottom) = (w(X), w(XPrime));
            for (d, [tr, br]) in rd.apply([i0, i1]) {
                for (b, [be, bn]) in bottom.apply([br, s]) {
                    for (t, [te, tn]) in top.apply([tr, bn]) {
                        push([te, be, tn], [&d.weight, &b.weight, &t.weight]);
                    }
                }
            }
        }
        Layout::WwRight => {
            let (top, bottom) = (w(XPrime), w(X));
            for (b, [be, bn]) in bottom.apply([i1, s]) {
                for (t, [te, tn]) in top.apply([i0, bn]) {
                    for (d, [tr, br]) in rd.apply([te, be]) {
                        push([tr, br, tn], [&d.weight, &b.weight, &t.weight]);
                    }
                }
            }
        }
        Layout::WeLeft => {
            let (top, bottom) = (w(X), e(XPrime));
            for (b, [bw, bn]) in bottom.apply([i1, s]) {
                for (d, [tl, tr]) in ud.apply([bw, i0]) {
                    for (t, [te, tn]) in top.apply([tr, bn]) {
                        push([tl, te, tn], [&d.weight, &b.weight, &t.weight]);
                    }
                }
            }
        }
        Layout::WeRight => {
            let (top, bottom) = (e(XPrime), w(X));
            for (b, [be, bn]) in bottom.apply([i0, s]) {
                for (d, [tl, tr]) in ud.apply([i1, be]) {
                    for (t, [tw, tn]) in top.apply([tl, bn]) {
                        push([tw, tr, tn], [&d.weight, &b.weight, &t.weight]);
                    }
                }
            }
        }
    }
    out
}

/// Sum over internal edge states, grouped by connectivity class.
pub fn cluster_sum(layout: Layout, boundary: [EdgeState; 3]) -> BTreeMap<ConnectivityClass, Polynomial> {
    cluster_terms(layout, boundary)
        .into_iter()
        .map(|(k, ts)| (k, ts.iter().fold(Polynomial::zero(context()), |acc, t| &acc + t)))
        .collect()
}

/// Cluster sum for a boundary that also fixes the out-channel occupancy.
pub fn cluster_sum_checked(
    layout: Layout,
    boundary: [EdgeState; 3],
    outputs: [bool; 3],
) -> Result<BTreeMap<ConnectivityClass, Polynomial>> {
    let inputs = boundary.iter().filter(|s| s.is_occupied()).count();
    let outs = outputs.iter().filter(|o| **o).count();
    if inputs != outs {
        return Err(YbeError::OccupancyMismatch { inputs, outputs: outs });
    }
    Ok(cluster_sum(layout, boundary)
        .into_iter()
        .filter(|(k, _)| k.map(EdgeState::is_occupied) == outputs)
        .collect())
}

/// Every input boundary: occupied channels get labels P, Q, R in order.
pub fn boundaries() -> Vec<[EdgeState; 3]> {
    (0..8u8)
        .map(|bits| {
            let mut next = 0u8;
            [0, 1, 2].map(|k| {
                if bits >> (2 - k) & 1 == 1 {
                    next += 1;
                    EdgeState::Pipe(next - 1)
                } else {
                    EdgeState::Empty
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YbeCase {
    pub boundary: [EdgeState; 3],
    pub class: ConnectivityClass,
    pub left: Polynomial,
    pub right: Polynomial,
    pub left_terms: Vec<Polynomial>,
    pub right_terms: Vec<Polynomial>,
}

impl YbeCase {
    pub fn holds(&self) -> bool {
        self.left == self.right
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YbeReport {
    pub mode: YbeMode,
    pub cases: Vec<YbeCase>,
}

impl YbeReport {
    pub fn pass(&self) -> bool {
        self.cases.iter().all(YbeCase::holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &YbeCase> {
        self.cases.iter().filter(|c| !c.holds())
    }

    /// Lines of the form `in [P,0,Q] out [0,P,Q]: left = right`.
    pub fn lines(&self) -> Vec<String> {
        let ins = self.mode.inputs();
        let outs = self.mode.outputs();
        self.cases
            .iter()
            .map(|c| {
                let b: Vec<String> = ins.iter().zip(c.boundary).map(|(h, s)| format!("{h}={s}")).collect();
                let o: Vec<String> = outs.iter().zip(c.class).map(|(h, s)| format!("{h}={s}")).collect();
                let rel = if c.holds() { "==" } else { "!=" };
                format!("in {} out {}: {} {rel} {}", b.join(" "), o.join(" "), c.left, c.right)
            })
            .collect()
    }
}

pub fn verify_ybe(mode: YbeMode) -> YbeReport {
    let (l, r) = mode.layouts();
    let zero = Polynomial::zero(context());
    let mut cases = Vec::new();
    for boundary in boundaries() {
        let lt = cluster_terms(l, boundary);
        let rt = cluster_terms(r, boundary);
        let mut classes: Vec<ConnectivityClass> = lt.keys().chain(rt.keys()).copied().collect();
        classes.sort_unstable();
        classes.dedup();
        for class in classes {
            let left_terms = lt.get(&class).cloned().unwrap_or_default();
            let right_terms = rt.get(&class).cloned().unwrap_or_default();
            let sum = |ts: &[Polynomial]| ts.iter().fold(zero.clone(), |acc, t| &acc + t);
            cases.push(YbeCase {
                boundary,
                class,
                left: sum(&left_terms),
                right: sum(&right_terms),
                left_terms,
                right_terms,
            });
        }
    }
    YbeReport { mode, cases }
}

/// Evaluates every class of a report at `(A, B, x, x', y)` points.
pub fn verify_ybe_numeric(report: &YbeReport, points: &[[i64; 5]]) -> bool {
    points.iter().all(|pt| {
        let vals: Vec<BigInt> = pt.iter().map(|v| BigInt::from(*v)).collect();
        report.cases.iter().all(|c| c.left.evaluate(&vals) == c.right.evaluate(&vals))
    })
}

/// `x ↔ x'`.
pub fn swap_params(f: &Polynomial) -> Polynomial {
    f.swap_x(1).expect("context has two x variables")
}

/// Whether some class has exactly these tiling terms on its two sides (as
/// multisets, in either orientation, possibly after `x ↔ x'`).
pub fn contains_identity(report: &YbeReport, lhs: &[Polynomial], rhs: &[Polynomial]) -> bool {
    let sorted = |ts: &[Polynomial]| {
        let mut v: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
        v.sort();
        v
    };
    let swapped = |ts: &[Polynomial]| ts.iter().map(swap_params).collect::<Vec<_>>();
    let wanted = [
        (sorted(lhs), sorted(rhs)),
        (sorted(&swapped(lhs)), sorted(&swapped(rhs))),
    ];
    report.cases.iter().any(|c| {
        let (l, r) = (sorted(&c.left_terms), sorted(&c.right_terms));
        wanted.iter().any(|(a, b)| (&l == a && &r == b) || (&l == b && &r == a))
    })
}

/// Where a diamond is inserted next to a two-row stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiamondEnd {
    WwWest,
    WwEast,
    WeWest,
    WeEast,
}

impl DiamondEnd {
    fn table(self) -> VertexTable {
        match self {
            DiamondEnd::WwWest | DiamondEnd::WwEast => VertexTable::new(VertexKind::RightDiamond),
            DiamondEnd::WeWest | DiamondEnd::WeEast => VertexTable::new(VertexKind::UpDiamond),
        }
    }

    /// Required occupancy of (inputs, outputs); `None` is unconstrained.
    /// Channels facing a row are fixed by the row's type; channels leaving
    /// the grid must be empty.
    fn constraints(self) -> ([Option<bool>; 2], [Option<bool>; 2]) {
        match self {
            DiamondEnd::WwWest => ([None, None], [Some(true), Some(true)]),
            DiamondEnd::WwEast => ([Some(false), Some(false)], [Some(false), Some(false)]),
            DiamondEnd::WeWest => ([Some(false), None], [Some(false), Some(true)]),
            DiamondEnd::WeEast => ([None, Some(false)], [Some(true), Some(false)]),
        }
    }
}

pub fn admissible(end: DiamondEnd) -> Vec<Entry> {
    let (ci, co) = end.constraints();
    let ok = |c: [Option<bool>; 2], v: [bool; 2]| c.iter().zip(v).all(|(c, v)| c.is_none_or(|c| c == v));
    end.table().entries.into_iter().filter(|e| ok(ci, e.inputs) && ok(co, e.outputs())).collect()
}

pub fn forced_tile(end: DiamondEnd) -> Result<Entry> {
    let mut a = admissible(end);
    if a.len() != 1 {
        return Err(YbeError::NotForced(a.len()));
    }
    Ok(a.pop().unwrap())
}

/// Single-pipe rows of width `n`: for each North exit, the W-row and E-row
/// partition functions with the same `x` agree.
pub fn single_pipe_rows_agree(n: usize) -> bool {
    let ctx = Context::new(1, n);
    let sum = |t: RowType| {
        let mut by_exit: BTreeMap<Vec<Option<usize>>, Polynomial> = BTreeMap::new();
        for f in grid::row_fillings(t, 1, &vec![None; n], Mode::Generic) {
            let w = Row::new(t, f.tiles).weight(ctx, 1);
            let slot = by_exit.entry(f.north).or_insert_with(|| Polynomial::zero(ctx));
            *slot = &*slot + &w;
        }
        by_exit
    };
    sum(RowType::W) == sum(RowType::E)
}
