//! The `reeb-index` command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 violation, 3
//! inconclusive, 4 numeric budget exhausted.

use std::fmt::{self, Display};
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use reeb_index_core::arith::{ArithError, CertifiedOrdering, NumberExpr, DEFAULT_BUDGET_BITS};
use reeb_index_core::audit::{
    check_dynamical_convexity, multiplicity_audit, perfectness_check, resonance_check,
    third_orbit_analysis, AuditError, AuditReport, Threshold, Verdict,
};
use reeb_index_core::cij::{find_common_jump, verify_solution, CijError, CijOptions, DEFAULT_SEARCH_BOUND};
use reeb_index_core::czpath::{
    conley_zehnder, path_from_blocks, BlockSpec, CzError, HyperbolicBlock, SymplecticPath, DEFAULT_TOLERANCE,
};
use reeb_index_core::dataset::{
    dataset_to_json, ellipsoid_system, parse_dataset, parse_expr_list, DatasetError, EllipsoidSpec,
};
use reeb_index_core::homology::{
    cap_for_window, generator_table, morse_feasibility, target_betti, Feasibility, HomologyError,
};
use reeb_index_core::index::{index_spectrum, IndexError, IterateRecord, OrbitSystem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

const CONVEXITY_SPOT_CHECK: u64 = 100;

#[derive(Parser, Debug)]
#[command(name = "reeb-index", version, about = "Certified index calculus for closed Reeb orbits")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Precision budget in bits for certified comparisons and floors
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET_BITS)]
    bits: u32,
    /// Action cap, as a number expression
    #[arg(long, global = true)]
    cap: Option<String>,
    /// Largest N tried by the common-jump scan
    #[arg(long, global = true, default_value_t = DEFAULT_SEARCH_BOUND)]
    search_bound: u64,
    /// Print JSON instead of tables
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for long scans
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Iterate indices of every orbit in a dataset
    Index {
        /// Dataset file; `-` or absent reads stdin
        dataset: Option<PathBuf>,
        /// Largest iterate listed
        #[arg(long, default_value_t = 10)]
        max_iterate: u64,
        /// Restrict to one orbit
        #[arg(long)]
        orbit: Option<String>,
    },
    /// Every iterate with action at most --cap, by degree
    Spectrum { dataset: Option<PathBuf> },
    /// Smallest common index jump and its verified identities
    Cij {
        dataset: Option<PathBuf>,
        /// Horizon of the symmetric identities
        #[arg(long = "M", default_value_t = 1)]
        horizon: u64,
    },
    /// Degree table and Morse feasibility against the target homology
    Homology { dataset: Option<PathBuf> },
    /// Run one dataset audit
    Verify {
        dataset: Option<PathBuf>,
        #[arg(long, value_enum)]
        check: CheckArg,
        /// Index threshold assumed by the multiplicity audit
        #[arg(long, value_enum, default_value = "n+1")]
        threshold: ThresholdArg,
    },
    /// Dataset of an irrational ellipsoid, printed as JSON
    Ellipsoid {
        /// Comma-separated radii, e.g. "1,(sqrt 2)"
        #[arg(long)]
        radii: String,
    },
    /// Conley-Zehnder index of a sampled path or a block normal form
    Czpath {
        /// Path samples, one `t m11 ... m_2d2d` line each; `-` reads stdin
        #[arg(required_unless_present = "rotations")]
        path: Option<PathBuf>,
        /// Rotation numbers of the elliptic blocks
        #[arg(long, conflicts_with = "path")]
        rotations: Option<String>,
        /// Signed hyperbolic eigenvalues, e.g. "2.5,-3"
        #[arg(long, requires = "rotations", allow_hyphen_values = true)]
        hyperbolic: Option<String>,
        /// Iterate of the block path
        #[arg(long, default_value_t = 1, requires = "rotations")]
        iterate: u64,
        /// Samples per unit time for block paths
        #[arg(long, requires = "rotations")]
        samples: Option<usize>,
        /// Symplecticity and degeneracy tolerance
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CheckArg {
    Convexity,
    Multiplicity,
    Perfect,
    Resonance,
    ThirdOrbit,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ThresholdArg {
    #[value(name = "n+1")]
    NPlusOne,
    #[value(name = "n-1")]
    NMinusOne,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

macro_rules! failure_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Self {
                    code: if e.is_budget_exhausted() { EXIT_BUDGET } else { EXIT_USAGE },
                    message: e.to_string(),
                }
            }
        }
    )*};
}

failure_from!(ArithError, IndexError, CijError, HomologyError, AuditError, DatasetError);

impl From<CzError> for Failure {
    fn from(e: CzError) -> Self {
        let code = match &e {
            CzError::Arith(a) if a.is_budget_exhausted() => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

struct Ctx<'a> {
    global: &'a Global,
    stdin: &'a mut dyn Read,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn read_input(&mut self, path: &Option<PathBuf>) -> Result<(String, String), Failure> {
        match path {
            Some(p) if p.as_os_str() != "-" => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
                Ok((p.display().to_string(), text))
            }
            _ => {
                let mut text = String::new();
                self.stdin
                    .read_to_string(&mut text)
                    .map_err(|e| Failure::usage(format!("stdin: {e}")))?;
                Ok(("<stdin>".into(), text))
            }
        }
    }

    fn dataset(&mut self, path: &Option<PathBuf>) -> Result<OrbitSystem, Failure> {
        let (name, text) = self.read_input(path)?;
        let loaded = parse_dataset(&text, self.global.bits).map_err(|e| {
            let mut f = Failure::from(e);
            f.message = format!("{name}: {}", f.message);
            f
        })?;
        for w in &loaded.warnings {
            let _ = writeln!(self.err, "warning: {name}: {w}");
        }
        Ok(loaded.system)
    }

    fn cap(&self) -> Result<Option<NumberExpr>, Failure> {
        self.global
            .cap
            .as_deref()
            .map(|c| c.parse::<NumberExpr>().map_err(|e| Failure::usage(format!("--cap: {e}"))))
            .transpose()
    }

    /// `--cap` if given, else one whose complete window reaches `n + 20`.
    fn cap_or_default(&self, system: &OrbitSystem) -> Result<NumberExpr, Failure> {
        match self.cap()? {
            Some(c) => Ok(c),
            None => Ok(cap_for_window(system, system.n() as i64 + 20, self.global.bits)?),
        }
    }

    fn cij_options(&self, horizon: u64) -> CijOptions {
        CijOptions {
            horizon,
            search_bound: self.global.search_bound,
            budget: self.global.bits,
            workers: self.global.workers,
            ..CijOptions::default()
        }
    }

    fn emit_json(&mut self, value: &impl Serialize) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).map_err(Failure::usage)?;
        writeln!(self.out, "{text}").map_err(Failure::usage)
    }

    fn emit(&mut self, text: impl Display) -> Result<(), Failure> {
        write!(self.out, "{text}").map_err(Failure::usage)
    }
}

/// Left-aligned columns separated by two spaces.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: vec![],
        }
    }

    fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }
}

impl Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        for r in std::iter::once(&self.header).chain(&self.rows) {
            let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            writeln!(f, "{}", line.join("  ").trim_end())?;
        }
        Ok(())
    }
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.into()
}

fn iterate_name(r: &IterateRecord) -> String {
    if r.ell == 1 {
        r.label.clone()
    } else {
        format!("{}^{}", r.label, r.ell)
    }
}

fn approx(x: &NumberExpr) -> String {
    let v = x.to_f64();
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.6}")
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Consistent => EXIT_OK,
        Verdict::Violation => EXIT_VIOLATION,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn render_report(r: &AuditReport) -> String {
    let mut s = format!("check: {}\nverdict: {}\n", r.check, r.verdict);
    if let Some(w) = r.witness_degree {
        s += &format!("witness degree: {w}\n");
    }
    if let Some(j) = &r.jump {
        let entries: Vec<String> = j
            .entries
            .iter()
            .map(|e| format!("{}: m={} eta={:+}", e.label, e.m, e.eta))
            .collect();
        s += &format!("jump: N = {} (M = {}; {})\n", j.n_jump, j.horizon, entries.join(", "));
    }
    if let Some(c) = &r.required_cap {
        s += &format!("required cap: {c}\n");
    }
    if !r.findings.is_empty() {
        s += "findings:\n";
    }
    for f in &r.findings {
        s += &format!("  [{}] {}: {}", if f.passed { "ok" } else { "FAIL" }, f.name, f.explanation);
        if !f.degrees.is_empty() {
            let d: Vec<String> = f.degrees.iter().map(i64::to_string).collect();
            s += &format!(" (degrees {})", d.join(", "));
        }
        if !f.orbits.is_empty() {
            s += &format!(" (orbits {})", f.orbits.join(", "));
        }
        s += "\n";
    }
    s
}

fn cmd_index(ctx: &mut Ctx, dataset: &Option<PathBuf>, max_iterate: u64, only: &Option<String>) -> Result<i32, Failure> {
    let system = ctx.dataset(dataset)?;
    let orbits: Vec<_> = match only {
        Some(label) => vec![system
            .get(label)
            .ok_or_else(|| Failure::usage(format!("no orbit labelled {label}")))?],
        None => system.orbits().iter().collect(),
    };
    let bits = ctx.global.bits;
    let mut rows = Vec::new();
    for o in &orbits {
        let mut iterates = Vec::new();
        for ell in 1..=max_iterate {
            let index = o.iterate_index_with(ell, bits)?;
            iterates.push(json!({
                "ell": ell,
                "index": index,
                "good": o.is_good(ell)?,
                "action": o.iterate_action(ell),
            }));
        }
        rows.push(json!({
            "label": o.label(),
            "p": o.p(),
            "q": o.q(),
            "mean_index": o.mean_index(),
            "even": o.is_even_orbit(),
            "iterates": iterates,
        }));
    }
    if ctx.global.json {
        ctx.emit_json(&rows)?;
        return Ok(EXIT_OK);
    }
    let mut summary = Table::new(&["orbit", "p", "q", "mean index", "even"]);
    for o in &orbits {
        summary.row(vec![
            o.label().into(),
            o.p().to_string(),
            o.q().to_string(),
            approx(o.mean_index()),
            yes_no(o.is_even_orbit()),
        ]);
    }
    let mut table = Table::new(&["orbit", "ell", "index", "good", "action"]);
    for r in &rows {
        for it in r["iterates"].as_array().into_iter().flatten() {
            table.row(vec![
                r["label"].as_str().unwrap_or_default().into(),
                it["ell"].to_string(),
                it["index"].to_string(),
                yes_no(it["good"].as_bool().unwrap_or(false)),
                it["action"].as_str().unwrap_or_default().into(),
            ]);
        }
    }
    ctx.emit(format!("{summary}\n{table}"))?;
    Ok(EXIT_OK)
}

fn cmd_spectrum(ctx: &mut Ctx, dataset: &Option<PathBuf>) -> Result<i32, Failure> {
    let system = ctx.dataset(dataset)?;
    let cap = ctx.cap()?.ok_or_else(|| Failure::usage("spectrum needs --cap"))?;
    let records = index_spectrum(&system, &cap, ctx.global.bits)?;
    if ctx.global.json {
        ctx.emit_json(&json!({ "cap": cap, "records": records }))?;
        return Ok(EXIT_OK);
    }
    let mut table = Table::new(&["degree", "iterate", "action", "~action", "good"]);
    for r in &records {
        table.row(vec![
            r.index.to_string(),
            iterate_name(r),
            r.action.to_string(),
            approx(&r.action),
            yes_no(r.good),
        ]);
    }
    ctx.emit(table)?;
    Ok(EXIT_OK)
}

fn cmd_cij(ctx: &mut Ctx, dataset: &Option<PathBuf>, horizon: u64) -> Result<i32, Failure> {
    let system = ctx.dataset(dataset)?;
    let sol = match find_common_jump(&system, &ctx.cij_options(horizon)) {
        Ok(sol) => sol,
        Err(CijError::SearchExhausted { bound }) => {
            let msg = format!("no common jump with N <= {bound}; raise --search-bound");
            if ctx.global.json {
                ctx.emit_json(&json!({ "verdict": "inconclusive", "message": msg }))?;
            } else {
                ctx.emit(format!("{msg}\n"))?;
            }
            return Ok(EXIT_INCONCLUSIVE);
        }
        Err(e) => return Err(e.into()),
    };
    let report = verify_solution(&system, &sol)?;
    let code = if report.all_passed() { EXIT_OK } else { EXIT_VIOLATION };
    if ctx.global.json {
        ctx.emit_json(&json!({ "solution": sol, "checks": report.checks }))?;
        return Ok(code);
    }
    let mut s = format!("N = {}\nM = {}\nepsilon = {}\n\n", sol.n_jump, sol.horizon, sol.epsilon);
    let mut table = Table::new(&["orbit", "m", "eta"]);
    for e in &sol.entries {
        table.row(vec![e.label.clone(), e.m.to_string(), format!("{:+}", e.eta)]);
    }
    s += &format!("{table}\nidentities:\n");
    for c in &report.checks {
        s += &format!("  [{}] {}\n", if c.passed { "ok" } else { "FAIL" }, c.description);
    }
    ctx.emit(s)?;
    Ok(code)
}

fn cmd_homology(ctx: &mut Ctx, dataset: &Option<PathBuf>) -> Result<i32, Failure> {
    let system = ctx.dataset(dataset)?;
    let cap = ctx.cap_or_default(&system)?;
    let table = generator_table(&system, &cap, ctx.global.bits)?;
    let feasibility = morse_feasibility(&table)?;
    let code = match &feasibility {
        Feasibility::Feasible(_) => EXIT_OK,
        Feasibility::Infeasible { .. } => EXIT_VIOLATION,
        Feasibility::Inconclusive => EXIT_INCONCLUSIVE,
    };
    if ctx.global.json {
        ctx.emit_json(&json!({ "table": table, "feasibility": feasibility }))?;
        return Ok(code);
    }
    let mut s = format!("cap = {cap}\n");
    match table.window {
        Some((lo, hi)) => s += &format!("complete window = [{lo}, {hi}]\n\n"),
        None => s += "complete window = none\n\n",
    }
    let mut degrees = Table::new(&["degree", "target", "count", "generators"]);
    let lo = table.window.map_or(1 - system.n() as i64, |w| w.0);
    let hi = table
        .entries
        .keys()
        .last()
        .copied()
        .into_iter()
        .chain(table.window.map(|w| w.1))
        .max()
        .unwrap_or(lo);
    for d in lo.min(*table.entries.keys().next().unwrap_or(&lo))..=hi {
        let gens = table.generators(d);
        let in_window = table.in_window(d);
        if gens.is_empty() && !in_window {
            continue;
        }
        let names: Vec<String> = gens.iter().map(iterate_name).collect();
        degrees.row(vec![
            d.to_string(),
            if in_window { target_betti(system.n(), d).to_string() } else { "-".into() },
            gens.len().to_string(),
            names.join(" "),
        ]);
    }
    s += &degrees.to_string();
    match &feasibility {
        Feasibility::Feasible(cert) => {
            s += &format!("\nfeasible: {} cancellation pair(s)\n", cert.pairs.len());
            for p in &cert.pairs {
                s += &format!("  {} -> {}\n", iterate_name(&p.source), iterate_name(&p.target));
            }
        }
        Feasibility::Infeasible { witness, .. } => {
            s += &format!("\ninfeasible: degrees {witness} and above cannot match the target homology\n");
        }
        Feasibility::Inconclusive => s += "\ninconclusive: no complete window below the cap\n",
    }
    ctx.emit(s)?;
    Ok(code)
}

fn cmd_verify(ctx: &mut Ctx, dataset: &Option<PathBuf>, check: CheckArg, threshold: ThresholdArg) -> Result<i32, Failure> {
    let system = ctx.dataset(dataset)?;
    let bits = ctx.global.bits;
    let report = match check {
        CheckArg::Convexity => {
            let r = check_dynamical_convexity(&system, CONVEXITY_SPOT_CHECK)?;
            let code = if r.holds { EXIT_OK } else { EXIT_VIOLATION };
            if ctx.global.json {
                ctx.emit_json(&r)?;
            } else if let Some((label, ell, index)) = &r.first_failure {
                let name = if *ell == 1 { label.clone() } else { format!("{label}^{ell}") };
                ctx.emit(format!(
                    "not dynamically convex: {name} has index {index} < {}\n",
                    system.n() + 1
                ))?;
            } else {
                ctx.emit("dynamically convex\n")?;
            }
            return Ok(code);
        }
        CheckArg::Resonance => {
            let ord = resonance_check(&system, bits)?;
            if ctx.global.json {
                ctx.emit_json(&json!({ "ordering": ord.to_string() }))?;
            } else {
                ctx.emit(format!("{ord}\n"))?;
            }
            return Ok(if ord == CertifiedOrdering::Undecidable { EXIT_BUDGET } else { EXIT_OK });
        }
        CheckArg::Multiplicity => {
            let t = match threshold {
                ThresholdArg::NPlusOne => Threshold::NPlusOne,
                ThresholdArg::NMinusOne => Threshold::NMinusOne,
            };
            multiplicity_audit(&system, t, &ctx.cij_options(1))?
        }
        CheckArg::Perfect => {
            let cap = ctx.cap_or_default(&system)?;
            perfectness_check(&system, &cap, &ctx.cij_options(1))?
        }
        CheckArg::ThirdOrbit => {
            let explicit = ctx.cap()?;
            let cap = ctx.cap_or_default(&system)?;
            let r = third_orbit_analysis(&system, &cap, bits)?;
            match (&r.required_cap, explicit) {
                (Some(needed), None) if r.verdict == Verdict::Inconclusive => {
                    third_orbit_analysis(&system, needed, bits)?
                }
                _ => r,
            }
        }
    };
    if ctx.global.json {
        ctx.emit_json(&report)?;
    } else {
        ctx.emit(render_report(&report))?;
    }
    Ok(verdict_code(report.verdict))
}

fn cmd_ellipsoid(ctx: &mut Ctx, radii: &str) -> Result<i32, Failure> {
    let spec = EllipsoidSpec::parse_list(radii)?;
    let system = ellipsoid_system(&spec)?;
    let list: Vec<String> = spec.radii().iter().map(ToString::to_string).collect();
    let notes = format!("ellipsoid with radii {}", list.join(", "));
    ctx.emit(format!("{}\n", dataset_to_json(&system, Some(notes))))?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_czpath(
    ctx: &mut Ctx,
    path: &Option<PathBuf>,
    rotations: &Option<String>,
    hyperbolic: &Option<String>,
    iterate: u64,
    samples: Option<usize>,
    tolerance: f64,
) -> Result<i32, Failure> {
    let index = match rotations {
        Some(r) => {
            if iterate == 0 {
                return Err(Failure::usage("--iterate must be positive"));
            }
            let rotations = parse_expr_list(r)?;
            let hyperbolic = hyperbolic
                .as_deref()
                .map(|h| {
                    h.split(',')
                        .map(|x| {
                            let v: f64 = x.trim().parse().map_err(|_| Failure::usage(format!("invalid eigenvalue {x:?}")))?;
                            Ok(HyperbolicBlock::signed(v)?)
                        })
                        .collect::<Result<Vec<_>, Failure>>()
                })
                .transpose()?
                .unwrap_or_default();
            let spec = BlockSpec::new(rotations, hyperbolic).iterate(iterate);
            let per_unit = samples.unwrap_or_else(|| spec.recommended_samples());
            let mut path = path_from_blocks(&spec, per_unit)?;
            if tolerance != DEFAULT_TOLERANCE {
                path = SymplecticPath::new(path.samples().to_vec(), tolerance)?;
            }
            conley_zehnder(&path)?
        }
        None => {
            let (_, text) = ctx.read_input(path)?;
            conley_zehnder(&SymplecticPath::from_text(&text, tolerance)?)?
        }
    };
    if ctx.global.json {
        ctx.emit_json(&json!({ "conley_zehnder": index }))?;
    } else {
        ctx.emit(format!("{index}\n"))?;
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let mut ctx = Ctx {
        global: &cli.global,
        stdin,
        out,
        err,
    };
    match &cli.command {
        Command::Index {
            dataset,
            max_iterate,
            orbit,
        } => cmd_index(&mut ctx, dataset, *max_iterate, orbit),
        Command::Spectrum { dataset } => cmd_spectrum(&mut ctx, dataset),
        Command::Cij { dataset, horizon } => cmd_cij(&mut ctx, dataset, *horizon),
        Command::Homology { dataset } => cmd_homology(&mut ctx, dataset),
        Command::Verify {
            dataset,
            check,
            threshold,
        } => cmd_verify(&mut ctx, dataset, *check, *threshold),
        Command::Ellipsoid { radii } => cmd_ellipsoid(&mut ctx, radii),
        Command::Czpath {
            path,
            rotations,
            hyperbolic,
            iterate,
            samples,
            tolerance,
        } => cmd_czpath(&mut ctx, path, rotations, hyperbolic, *iterate, *samples, *tolerance),
    }
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(&cli, stdin, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
