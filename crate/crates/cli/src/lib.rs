//! The `gpd` command line. [`run`] takes the argument vector and an output
//! sink and returns the process exit code, so it can be driven from tests.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gpd::flux;
use gpd::grid::{self, Hybridization, Mode, PartialPerm, PipeDream, Row, RowType};
use gpd::poly::Context;
use gpd::schubert::{self, AscentChoice, GpdQuery};
use gpd::yangbaxter::{self, YbeMode};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gpd", version, about = "Hybrid generic pipe dreams and their polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List pipe dreams, optionally of one connectivity.
    Enumerate(Common),
    /// The generic pipe dream polynomial G_pi.
    Poly(Common),
    /// The nongeneric sum S_pi.
    Schubert(Common),
    /// Run one or all verification checks.
    Verify {
        #[arg(value_enum)]
        check: CheckName,
        #[command(flatten)]
        common: Common,
    },
    /// Flux tables, or equation sets and classes for the dreams of one pi.
    Flux(Common),
    /// Number of pipe dreams of one connectivity.
    Count {
        #[command(flatten)]
        common: Common,
        /// Also report the blank-labelled and class-value counts.
        #[arg(long)]
        decorated: bool,
    },
}

#[derive(Debug, Clone, Args)]
struct Common {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Row types from top to bottom, e.g. EWEW.
    #[arg(long)]
    beta: Option<String>,
    /// One-line notation, e.g. 1,2,5,3.
    #[arg(long)]
    pi: Option<String>,
    /// generic|nongeneric for enumerate, ww|we for verify ybe.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest m*n accepted without --force.
    #[arg(long, default_value_t = 30)]
    max_work: usize,
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckName {
    All,
    BetaIndependence,
    Recurrence,
    LeadingForm,
    Mirror,
    Ybe,
    Flux,
    Crossing,
    BaseCase,
}

enum CliError {
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

struct Output {
    text: String,
    json: Value,
    code: i32,
}

impl Output {
    fn ok(text: String, json: Value) -> Self {
        Output { text, json, code: EXIT_OK }
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// its output to `out`. Diagnostics go to stderr.
pub fn run<S: AsRef<str>>(args: &[S], out: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args.iter().map(AsRef::as_ref)) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            eprint!("{e}");
            return EXIT_USAGE;
        }
    };
    let common = match &cli.command {
        Command::Enumerate(c) | Command::Poly(c) | Command::Schubert(c) | Command::Flux(c) => c,
        Command::Verify { common, .. } | Command::Count { common, .. } => common,
    };
    let result = match &cli.command {
        Command::Enumerate(c) => enumerate(c),
        Command::Poly(c) => poly(c),
        Command::Schubert(c) => schubert_sum(c),
        Command::Verify { check, common } => verify(*check, common),
        Command::Flux(c) => flux_cmd(c),
        Command::Count { common, decorated } => count(common, *decorated),
    };
    let output = match result {
        Ok(o) => o,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let mut bytes = match common.format {
        Format::Text => output.text,
        Format::Json => serde_json::to_string_pretty(&output.json).expect("json values serialize"),
    };
    if !bytes.ends_with('\n') {
        bytes.push('\n');
    }
    let written = match &common.out {
        Some(path) => std::fs::write(path, bytes.as_bytes()),
        None => out.write_all(bytes.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_FAIL;
    }
    output.code
}

fn dims(c: &Common) -> CliResult<(usize, usize)> {
    let (Some(m), Some(n)) = (c.m, c.n) else {
        return Err(CliError::Usage("--m and --n are required".into()));
    };
    if m == 0 || m > n {
        return Err(CliError::Usage(format!("need 1 <= m <= n, got m={m} n={n}")));
    }
    if m * n > c.max_work && !c.force {
        return Err(CliError::Usage(format!(
            "m*n = {} exceeds --max-work {}; pass --force to run anyway",
            m * n,
            c.max_work
        )));
    }
    Ok((m, n))
}

fn beta_of(c: &Common, m: usize) -> CliResult<Hybridization> {
    let b = match &c.beta {
        Some(s) => Hybridization::parse(s)?,
        None => Hybridization::uniform(m, RowType::W),
    };
    if b.len() != m {
        return Err(CliError::Usage(format!("--beta has {} rows, expected {m}", b.len())));
    }
    Ok(b)
}

fn pi_of(c: &Common, m: usize, n: usize) -> CliResult<Option<PartialPerm>> {
    let Some(s) = &c.pi else { return Ok(None) };
    let pi = PartialPerm::parse(s, n)?;
    if pi.m() != m {
        return Err(CliError::Usage(format!("--pi has {} entries, expected {m}", pi.m())));
    }
    Ok(Some(pi))
}

fn require_pi(c: &Common, m: usize, n: usize) -> CliResult<PartialPerm> {
    pi_of(c, m, n)?.ok_or_else(|| CliError::Usage("--pi is required".into()))
}

fn dream_json(d: &PipeDream) -> Value {
    let rows: Vec<String> = d.rows().iter().map(|r| r.iter().map(|t| t.to_char()).collect()).collect();
    json!({
        "beta": d.beta().to_string(),
        "rows": rows,
        "pi": d.connectivity().0.to_string(),
        "weight": d.weight().to_string(),
    })
}

fn enumerate(c: &Common) -> CliResult<Output> {
    let (m, n) = dims(c)?;
    let beta = beta_of(c, m)?;
    let pi = pi_of(c, m, n)?;
    let mode = match c.mode.as_deref() {
        None | Some("generic") => Mode::Generic,
        Some("nongeneric") => Mode::Nongeneric,
        Some(other) => return Err(CliError::Usage(format!("--mode must be generic or nongeneric, got {other}"))),
    };
    let dreams: Vec<PipeDream> = grid::enumerate(m, n, &beta, pi.as_ref(), mode)?.collect();
    let text = dreams.iter().map(PipeDream::serialize).collect::<Vec<_>>().join("\n");
    let json = json!({
        "m": m,
        "n": n,
        "beta": beta.to_string(),
        "pi": pi.map(|p| p.to_string()),
        "mode": if mode == Mode::Generic { "generic" } else { "nongeneric" },
        "dreams": dreams.iter().map(dream_json).collect::<Vec<_>>(),
    });
    Ok(Output::ok(text, json))
}

fn poly(c: &Common) -> CliResult<Output> {
    let (m, n) = dims(c)?;
    let beta = beta_of(c, m)?;
    let pi = require_pi(c, m, n)?;
    let g = schubert::generic_polynomial(&GpdQuery::new(beta.clone(), pi.clone())?)?;
    let json = json!({ "m": m, "n": n, "beta": beta.to_string(), "pi": pi.to_string(), "polynomial": g.to_string() });
    Ok(Output::ok(g.to_string(), json))
}

fn schubert_sum(c: &Common) -> CliResult<Output> {
    let (m, n) = dims(c)?;
    let beta = beta_of(c, m)?;
    let pi = require_pi(c, m, n)?;
    let s = schubert::schubert_sum(m, n, &beta, &pi)?;
    let json = json!({ "m": m, "n": n, "beta": beta.to_string(), "pi": pi.to_string(), "polynomial": s.to_string() });
    Ok(Output::ok(s.to_string(), json))
}

fn count(c: &Common, decorated: bool) -> CliResult<Output> {
    let (m, n) = dims(c)?;
    let beta = beta_of(c, m)?;
    let pi = pi_of(c, m, n)?;
    if decorated {
        let pi = pi.ok_or_else(|| CliError::Usage("--decorated needs --pi".into()))?;
        let d = schubert::decorated_counts(&GpdQuery::new(beta, pi)?)?;
        let text = format!("dreams {}\nblank-labelled {}\nclass-value {}", d.dreams, d.blank_labelled, d.class_value);
        let json = json!({
            "count": d.dreams,
            "blank_labelled": d.blank_labelled.to_string(),
            "class_value": d.class_value.to_string(),
        });
        return Ok(Output::ok(text, json));
    }
    let k = grid::enumerate(m, n, &beta, pi.as_ref(), Mode::Generic)?.count();
    Ok(Output::ok(k.to_string(), json!({ "count": k })))
}

fn flux_cmd(c: &Common) -> CliResult<Output> {
    let (m, n) = dims(c)?;
    let beta = beta_of(c, m)?;
    let Some(pi) = pi_of(c, m, n)? else {
        let table = flux::flux_grid(m, n, &beta);
        let entries: serde_json::Map<String, Value> =
            table.iter().map(|(e, f)| (e.to_string(), Value::String(f.to_string()))).collect();
        let json = json!({ "m": m, "n": n, "beta": beta.to_string(), "table": entries });
        return Ok(Output::ok(flux::format_table(m, n, &table), json));
    };
    let mut blocks = Vec::new();
    let mut items = Vec::new();
    for d in grid::enumerate(m, n, &beta, Some(&pi), Mode::Generic)? {
        let eqs = flux::variety_equations(&d);
        let class = flux::component_class(&d)?;
        let xs: Vec<String> = eqs.zero_x.iter().map(|(r, j)| format!("X{r}{j}")).collect();
        let ys: Vec<String> = eqs.zero_y.iter().map(|(j, r)| format!("Y{j}{r}")).collect();
        let labels: Vec<String> = eqs.flux.iter().map(|(e, l)| format!("{e}={l}")).collect();
        blocks.push(format!(
            "{}zeros: {}\nflux: {}\nequations: {}\nclass: {class}\n",
            d.serialize(),
            xs.iter().chain(&ys).cloned().collect::<Vec<_>>().join(" "),
            labels.join(" "),
            eqs.equation_count()
        ));
        items.push(json!({
            "dream": dream_json(&d),
            "zero_x": xs,
            "zero_y": ys,
            "flux": eqs.flux.iter().map(|(e, l)| (e.to_string(), Value::String(l.to_string()))).collect::<serde_json::Map<_, _>>(),
            "equations": eqs.equation_count(),
            "class": class.to_string(),
        }));
    }
    let json = json!({ "m": m, "n": n, "beta": beta.to_string(), "pi": pi.to_string(), "dreams": items });
    Ok(Output::ok(blocks.join("\n"), json))
}

type Check = Result<(), String>;

fn check_beta_independence(m: usize, n: usize) -> Check {
    let mut reference = None;
    for b in Hybridization::all(m) {
        let all = schubert::generic_polynomials(m, n, &b).map_err(|e| e.to_string())?;
        match &reference {
            None => reference = Some(all),
            Some(r) if *r != all => return Err(format!("beta {b} differs")),
            Some(_) => {}
        }
    }
    Ok(())
}

fn check_recurrence(m: usize, n: usize) -> Check {
    let all = schubert::generic_polynomials(m, n, &Hybridization::uniform(m, RowType::W)).map_err(|e| e.to_string())?;
    for (pi, g) in &all {
        for choice in [AscentChoice::First, AscentChoice::Last] {
            let r = schubert::compute_by_recurrence_with(pi, choice).map_err(|e| format!("pi {pi}: {e}"))?;
            if &r != g {
                return Err(format!("pi {pi}: recurrence differs"));
            }
        }
    }
    Ok(())
}

fn check_leading_form(m: usize, n: usize) -> Check {
    for b in Hybridization::all(m) {
        let all = schubert::generic_polynomials(m, n, &b).map_err(|e| e.to_string())?;
        for (pi, g) in &all {
            let r = schubert::b_leading_check_with(pi, &b, g).map_err(|e| e.to_string())?;
            if !r.pass() {
                return Err(r.to_string());
            }
        }
    }
    Ok(())
}

fn check_mirror(m: usize, n: usize) -> Check {
    for pi in PartialPerm::all(m, n) {
        let r = schubert::mirror_check(&pi).map_err(|e| e.to_string())?;
        if !r.pass {
            return Err(format!("pi {pi}"));
        }
    }
    Ok(())
}

fn check_ybe(mode: YbeMode) -> Check {
    let r = yangbaxter::verify_ybe(mode);
    let first = r.failures().next().map(|c| format!("boundary {:?}: {} != {}", c.boundary, c.left, c.right));
    first.map_or(Ok(()), Err)
}

fn check_flux(m: usize, n: usize) -> Check {
    let ctx = Context::new(m, n);
    for b in Hybridization::all(m) {
        let r = flux::conservation_check(m, n, &b);
        if !r.pass() {
            return Err(format!("beta {b}: conservation fails at {:?}", r.violations));
        }
        let all = schubert::generic_polynomials(m, n, &b).map_err(|e| e.to_string())?;
        for (pi, g) in &all {
            let mut total = gpd::poly::Polynomial::zero(ctx);
            for d in grid::enumerate(m, n, &b, Some(pi), Mode::Generic).map_err(|e| e.to_string())? {
                let class = flux::component_class(&d).map_err(|e| format!("{e} for\n{d}"))?;
                let back = flux::reconstruct_dream(&flux::variety_equations(&d)).map_err(|e| e.to_string())?;
                if back != d {
                    return Err(format!("round trip fails for\n{d}"));
                }
                total = &total + &class;
            }
            let ab = gpd::poly::Polynomial::linear(ctx, 0, &[(gpd::poly::VarId::A, 1), (gpd::poly::VarId::B, 1)])
                .map_err(|e| e.to_string())?;
            if &(&ab.pow(m as u32) * &total) != g {
                return Err(format!("beta {b} pi {pi}: classes do not sum to G"));
            }
        }
    }
    Ok(())
}

fn check_crossing(n: usize) -> Check {
    for k in 1..=n {
        let ctx = Context::new(1, k);
        let rows = |t: RowType| -> BTreeSet<Vec<grid::TileKind>> {
            grid::row_fillings(t, 1, &vec![None; k], Mode::Generic).into_iter().map(|f| f.tiles).collect()
        };
        let (ws, es) = (rows(RowType::W), rows(RowType::E));
        let mut images = BTreeSet::new();
        for tiles in &ws {
            let r = Row::new(RowType::W, tiles.clone());
            let f = r.crossing_flip().map_err(|e| e.to_string())?;
            if f.weight(ctx, 1) != r.weight(ctx, 1) || f.crossing_flip().map_err(|e| e.to_string())? != r {
                return Err(format!("n={k}: flip of {tiles:?}"));
            }
            images.insert(f.tiles);
        }
        if images != es {
            return Err(format!("n={k}: not a bijection"));
        }
        if !yangbaxter::single_pipe_rows_agree(k) {
            return Err(format!("n={k}: row partition functions differ"));
        }
    }
    Ok(())
}

fn check_base_case(m: usize, n: usize) -> Check {
    for pi in PartialPerm::all(m, n).into_iter().filter(PartialPerm::is_decreasing) {
        let want = schubert::base_case(&pi).map_err(|e| e.to_string())?;
        for b in Hybridization::all(m) {
            let ds: Vec<PipeDream> = grid::enumerate(m, n, &b, Some(&pi), Mode::Generic).map_err(|e| e.to_string())?.collect();
            if ds.len() != 1 || ds[0].weight() != want {
                return Err(format!("pi {pi} beta {b}: {} dreams", ds.len()));
            }
        }
    }
    Ok(())
}

fn ybe_modes(c: &Common) -> CliResult<Vec<YbeMode>> {
    match c.mode.as_deref() {
        None => Ok(vec![YbeMode::WW, YbeMode::WE]),
        Some("ww") => Ok(vec![YbeMode::WW]),
        Some("we") => Ok(vec![YbeMode::WE]),
        Some(other) => Err(CliError::Usage(format!("--mode must be ww or we, got {other}"))),
    }
}

fn verify(check: CheckName, c: &Common) -> CliResult<Output> {
    let mut results: Vec<(String, Check)> = Vec::new();
    let mut detail_lines = Vec::new();
    if check == CheckName::Ybe {
        for mode in ybe_modes(c)? {
            let r = yangbaxter::verify_ybe(mode);
            detail_lines.extend(r.lines());
            results.push((format!("ybe {mode}"), check_ybe(mode)));
        }
    } else {
        let (m, n) = dims(c)?;
        let size = format!("m={m} n={n}");
        let all = check == CheckName::All;
        let mut add = |name: CheckName, label: &str, f: &dyn Fn() -> Check| {
            if all || check == name {
                results.push((format!("{label} {size}"), f()));
            }
        };
        add(CheckName::BetaIndependence, "beta-independence", &|| check_beta_independence(m, n));
        add(CheckName::Recurrence, "recurrence", &|| check_recurrence(m, n));
        add(CheckName::BaseCase, "base-case", &|| check_base_case(m, n));
        add(CheckName::LeadingForm, "leading-form", &|| check_leading_form(m, n));
        add(CheckName::Mirror, "mirror", &|| check_mirror(m, n));
        add(CheckName::Crossing, "crossing", &|| check_crossing(n));
        add(CheckName::Flux, "flux round-trip", &|| check_flux(m, n));
        if all {
            for mode in ybe_modes(c)? {
                results.push((format!("ybe {mode}"), check_ybe(mode)));
            }
        }
    }
    let mut lines = detail_lines;
    let mut items = Vec::new();
    for (name, r) in &results {
        match r {
            Ok(()) => lines.push(format!("PASS {name}")),
            Err(e) => lines.push(format!("FAIL {name}: {e}")),
        }
        items.push(json!({ "check": name, "pass": r.is_ok(), "detail": r.as_ref().err() }));
    }
    let pass = results.iter().all(|(_, r)| r.is_ok());
    let mut out = Output::ok(lines.join("\n"), json!({ "pass": pass, "checks": items }));
    if !pass {
        out.code = EXIT_FAIL;
    }
    Ok(out)
}
