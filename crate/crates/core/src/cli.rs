//! Command-line front end. [`run`] returns the process exit code: 0 on
//! success, 2 for invalid or degenerate input, 3 for usage and parse errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cliques::{size_ratio, verify_clique_cover, Segment};
use crate::error::{Error, Result};
use crate::fastinner::{inner_product_fast_with, prepare, FastOptions, SigmaForm};
use crate::geom::{generate_tin, parse_tin, validate_pair, validate_tin, write_tin, FlipMode, GenParams, Surface, Tin};
use crate::integrate::naive_inner_product;
use crate::matching::{fit_from_moments, l2_distance, moments, Method};
use crate::ops;
use crate::scalar::{parse_scalar, to_decimal, to_fraction, Scalar};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "tincalc", version, about = "Exact inner products, L2 distances and vertical matching of TINs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// ∬fg of two TINs over the same rectangle
    Inner(PairArgs),
    /// ‖f − g‖₂
    Distance(PairArgs),
    /// Least-squares s, t with f ≈ s·g + t
    Match(PairArgs),
    /// Check that two TINs are in general position with respect to each other
    Validate { f: PathBuf, g: PathBuf },
    /// Write a random TIN
    Generate(GenArgs),
    /// Clique cover of the interior-edge crossings
    Cliques {
        f: PathBuf,
        g: PathBuf,
        /// Print totals and the verification result instead of the cliques
        #[arg(long)]
        stats: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Operation counts and timings on generated pairs
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Naive,
    Fast,
    Both,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Naive => vec![Method::Naive],
            MethodArg::Fast => vec![Method::Fast],
            MethodArg::Both => vec![Method::Naive, Method::Fast],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormArg {
    Factored,
    Difference,
    Literal,
}

impl From<FormArg> for SigmaForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Factored => SigmaForm::Factored,
            FormArg::Difference => SigmaForm::Difference,
            FormArg::Literal => SigmaForm::Literal,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct FastArgs {
    /// Initial number of primes (estimated from the input when omitted)
    #[arg(long)]
    primes: Option<usize>,
    #[arg(long, default_value_t = 62, value_parser = clap::value_parser!(u32).range(16..=62))]
    prime_bits: u32,
    /// Report arithmetic-operation counts
    #[arg(long)]
    count_ops: bool,
    #[arg(long, value_enum, default_value_t = FormArg::Factored)]
    form: FormArg,
    /// Seed of the normalizing shear
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl FastArgs {
    fn options(&self) -> FastOptions {
        FastOptions {
            primes: self.primes,
            prime_bits: self.prime_bits,
            form: self.form.into(),
            validate: false,
            seed: self.seed,
            ..FastOptions::default()
        }
    }
}

#[derive(Args, Debug)]
struct PairArgs {
    f: PathBuf,
    g: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Fast)]
    method: MethodArg,
    #[command(flatten)]
    fast: FastArgs,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    triangles: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// random | plane:a,b,c | saddle | poly:c0,c1,...
    #[arg(long, default_value = "random", value_parser = parse_surface)]
    surface: Surface,
    /// none | delaunay | random:k
    #[arg(long, default_value = "delaunay", value_parser = parse_flips)]
    flips: FlipMode,
    /// Output file (stdout when omitted)
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    method: MethodArg,
    /// CSV output file (stdout when omitted)
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    fast: FastArgs,
}

fn scalars(s: &str) -> std::result::Result<Vec<Scalar>, String> {
    s.split(',').map(|t| parse_scalar(t.trim()).map_err(|e| e.to_string())).collect()
}

fn parse_surface(s: &str) -> std::result::Result<Surface, String> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "random" => Ok(Surface::RandomUniform),
        "saddle" => Ok(Surface::Saddle),
        "plane" => match scalars(rest)?.as_slice() {
            [a, b, c] => Ok(Surface::Plane(a.clone(), b.clone(), c.clone())),
            _ => Err("plane needs three coefficients a,b,c".into()),
        },
        "poly" => Ok(Surface::Polynomial(scalars(rest)?)),
        _ => Err(format!("unknown surface {kind:?}")),
    }
}

fn parse_flips(s: &str) -> std::result::Result<FlipMode, String> {
    match s.split_once(':') {
        None if s == "none" => Ok(FlipMode::None),
        None if s == "delaunay" => Ok(FlipMode::Delaunay),
        Some(("random", k)) => k.parse().map(FlipMode::Random).map_err(|e| e.to_string()),
        _ => Err(format!("unknown flip mode {s:?}")),
    }
}

/// Failure of a command, already mapped to an exit code.
struct Failure {
    code: i32,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::BadScalar(_) | Error::InvalidParameter(_) | Error::Io(_) => EXIT_USAGE,
            _ => EXIT_INVALID,
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let r = match cli.cmd {
        Cmd::Inner(a) => inner(&a, out),
        Cmd::Distance(a) => distance(&a, out),
        Cmd::Match(a) => matching(&a, out, err),
        Cmd::Validate { f, g } => validate(&f, &g, out),
        Cmd::Generate(a) => generate(&a, out),
        Cmd::Cliques { f, g, stats, seed } => cliques(&f, &g, stats, seed, out),
        Cmd::Bench(a) => bench(&a, out),
    };
    match r {
        Ok(code) => code,
        Err(Failure { code, msg }) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn read_tin(path: &Path) -> Result<Tin> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let t = parse_tin(&text)?;
    validate_tin(&t)?;
    Ok(t)
}

/// Reads and validates a pair; violations are reported as a failure.
fn read_pair(f: &Path, g: &Path) -> std::result::Result<(Tin, Tin), Failure> {
    let (f, g) = (read_tin(f)?, read_tin(g)?);
    let rep = validate_pair(&f, &g);
    if !rep.passed() {
        let lines: Vec<String> = rep.violations.iter().map(|v| format!("{}: {}", v.kind, v.detail)).collect();
        return Err(Failure { code: EXIT_INVALID, msg: format!("pair is not in general position\n{}", lines.join("\n")) });
    }
    Ok((f, g))
}

fn show(q: &Scalar) -> String {
    format!("{} {}", to_fraction(q), to_decimal(q, 17))
}

fn name(m: Method) -> &'static str {
    match m {
        Method::Naive => "naive",
        Method::Fast => "fast",
    }
}

/// ∬fg with its operation count.
fn product(f: &Tin, g: &Tin, m: Method, fast: &FastArgs) -> Result<(Scalar, u64)> {
    match m {
        Method::Naive => {
            let (v, n) = ops::measure(|| naive_inner_product(f, g));
            Ok((v?, n))
        }
        Method::Fast => {
            let rep = inner_product_fast_with(f, g, &fast.options())?;
            Ok((rep.value, rep.ops))
        }
    }
}

fn verdict(out: &mut dyn Write, vals: &[Scalar]) -> std::io::Result<()> {
    if vals.len() > 1 {
        writeln!(out, "{}", if vals.windows(2).all(|w| w[0] == w[1]) { "MATCH" } else { "MISMATCH" })?;
    }
    Ok(())
}

fn inner(a: &PairArgs, out: &mut dyn Write) -> CmdResult {
    let (f, g) = read_pair(&a.f, &a.g)?;
    let mut vals = Vec::new();
    for m in a.method.methods() {
        let (v, n) = product(&f, &g, m, &a.fast)?;
        writeln!(out, "{}: {}", name(m), show(&v))?;
        if a.fast.count_ops {
            writeln!(out, "{} ops: {n}", name(m))?;
        }
        vals.push(v);
    }
    verdict(out, &vals)?;
    Ok(EXIT_OK)
}

fn distance(a: &PairArgs, out: &mut dyn Write) -> CmdResult {
    let (f, g) = read_pair(&a.f, &a.g)?;
    let mut vals = Vec::new();
    for m in a.method.methods() {
        let d = l2_distance(&f, &g, m, &a.fast.options())?;
        writeln!(out, "{}: squared={} distance={}", name(m), to_fraction(&d.squared), d.decimal)?;
        vals.push(d.squared);
    }
    verdict(out, &vals)?;
    Ok(EXIT_OK)
}

fn matching(a: &PairArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (f, g) = read_pair(&a.f, &a.g)?;
    let (mf, mg) = (moments(&f)?, moments(&g)?);
    let mut vals = Vec::new();
    let mut degenerate = false;
    for m in a.method.methods() {
        let (fg, _) = product(&f, &g, m, &a.fast)?;
        let fit = fit_from_moments(&mf, &mg, &fg);
        writeln!(
            out,
            "{}: s={} t={} residual2={}",
            name(m),
            to_fraction(&fit.s),
            to_fraction(&fit.t),
            to_fraction(&fit.residual2)
        )?;
        degenerate |= fit.degenerate;
        vals.push(fit.residual2);
    }
    verdict(out, &vals)?;
    if degenerate {
        writeln!(err, "degenerate fit: g is constant, so s is undetermined (reported as 0)")?;
        return Ok(EXIT_INVALID);
    }
    Ok(EXIT_OK)
}

fn validate(f: &Path, g: &Path, out: &mut dyn Write) -> CmdResult {
    let (f, g) = (read_tin(f)?, read_tin(g)?);
    let rep = validate_pair(&f, &g);
    if rep.passed() {
        writeln!(out, "ok")?;
        return Ok(EXIT_OK);
    }
    for v in &rep.violations {
        writeln!(out, "{}: {}", v.kind, v.detail)?;
    }
    Ok(EXIT_INVALID)
}

fn generate(a: &GenArgs, out: &mut dyn Write) -> CmdResult {
    let t = generate_tin(&GenParams::new(a.triangles, a.seed).surface(a.surface.clone()).flips(a.flips))?;
    let text = write_tin(&t)?;
    match &a.output {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn cliques(f: &Path, g: &Path, stats: bool, seed: u64, out: &mut dyn Write) -> CmdResult {
    let (f, g) = read_pair(f, g)?;
    let p = prepare(&f, &g, seed)?;
    if !stats {
        for (k, c) in p.family.cliques.iter().enumerate() {
            let ids = |v: &[usize], map: &[usize]| v.iter().map(|&i| map[i].to_string()).collect::<Vec<_>>().join(",");
            let order = if c.red_lower_slope { "red<blue" } else { "red>blue" };
            writeln!(out, "{k}: red={} blue={} slopes {order}", ids(&c.red, &p.red), ids(&c.blue, &p.blue))?;
        }
        return Ok(EXIT_OK);
    }
    let segs = |t: &Tin, et: &crate::geom::EdgeTable, ids: &[usize]| -> Result<Vec<Segment>> {
        ids.iter()
            .map(|&i| {
                let (a, b) = et.endpoints(t, i);
                Segment::new(a.clone(), b.clone())
            })
            .collect()
    };
    let (red, blue) = (segs(&p.f, &p.ef, &p.red)?, segs(&p.g, &p.eg, &p.blue)?);
    let rep = verify_clique_cover(&p.family, &red, &blue);
    let n = red.len() + blue.len();
    writeln!(out, "segments: {} red, {} blue", red.len(), blue.len())?;
    writeln!(out, "cliques: {}", p.family.len())?;
    writeln!(out, "cover size: {}", p.family.size())?;
    writeln!(out, "crossing pairs: {}", rep.crossing_pairs)?;
    writeln!(out, "size / (n log2^2 n): {:.6}", size_ratio(p.family.size(), n))?;
    if rep.passed() {
        writeln!(out, "verification: ok")?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "verification: FAILED")?;
        for v in &rep.violations {
            writeln!(out, "  {v}")?;
        }
        Ok(EXIT_INVALID)
    }
}

/// The generated pair used by `bench` for size `n` and seed `s`.
pub fn bench_pair(n: usize, s: u64) -> Result<(Tin, Tin)> {
    Ok((generate_tin(&GenParams::new(n, 2 * s))?, generate_tin(&GenParams::new(n, 2 * s + 1))?))
}

fn bench(a: &BenchArgs, out: &mut dyn Write) -> CmdResult {
    let mut csv = String::from("n,method,field_ops,wall_ms,clique_cover_size,match\n");
    // mean ops per (method, size)
    let mut totals: Vec<(Method, usize, f64)> = Vec::new();
    for &n in &a.sizes {
        for s in 0..a.seeds {
            let (f, g) = bench_pair(n, s)?;
            let cover = prepare(&f, &g, a.fast.seed)?.family.size();
            let mut rows = Vec::new();
            for m in a.method.methods() {
                let t0 = Instant::now();
                let (v, ops_n) = product(&f, &g, m, &a.fast)?;
                rows.push((m, v, ops_n, t0.elapsed().as_secs_f64() * 1e3));
            }
            let agree = rows.windows(2).all(|w| w[0].1 == w[1].1);
            for (m, _, ops_n, ms) in rows {
                csv.push_str(&format!("{n},{},{ops_n},{ms:.1},{cover},{agree}\n", name(m)));
                match totals.iter_mut().find(|t| t.0 == m && t.1 == n) {
                    Some(t) => t.2 += ops_n as f64 / a.seeds as f64,
                    None => totals.push((m, n, ops_n as f64 / a.seeds as f64)),
                }
            }
        }
    }
    match &a.csv {
        Some(p) => std::fs::write(p, &csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    for m in a.method.methods() {
        let series: Vec<&(Method, usize, f64)> = totals.iter().filter(|t| t.0 == m).collect();
        for w in series.windows(2) {
            writeln!(out, "{} ops ratio n={}->{}: {:.3}", name(m), w[0].1, w[1].1, w[1].2 / w[0].2)?;
        }
    }
    Ok(EXIT_OK)
}
