//! Batch front-end: subcommands, JSON configuration and CSV output.
//!
//! Every command writes a `# config: {...}` line with its fully resolved
//! configuration, then a CSV header and rows. Floats are printed with 17
//! significant digits. Summary values that are not per-row (fitted slopes,
//! maxima) follow as `# key: value` lines.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::counting::{count_fast, count_naive, CountQuery};
use crate::error::Error;
use crate::expsums::{kloosterman, twisted_poisson_residual, weil_gap, KloostermanQuery, ModulusTables};
use crate::mainterm::{main_term_closed, main_term_truncated};
use crate::modp::{modp_error_scan, modp_row, ModPQuery, XRule};
use crate::quad::QuadratureSpec;
use crate::scan::{error_scan, r_scan};
use crate::spectral::{bessel_identity_residuals, f_check, f_ddot, weighted_kloosterman_sum, OscWeightParams};
use crate::weights::{poisson_check, WeightSpec};

pub const THREADS_ENV: &str = "DETCOUNT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "detcount", version, about = "Smoothed counts for ad - bc = r and related experiments")]
struct Cli {
    /// JSON file with `weight`, `quadrature` and command keys; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Smoothed count S_V(X, r)
    Count(CountArgs),
    /// Closed-form main term, optionally against the truncated double sum
    Mainterm(MaintermArgs),
    /// E = S - M over a list of X at fixed r
    ErrorScan(ErrorScanArgs),
    /// E = S - M over a list of r at fixed X
    RScan(RScanArgs),
    /// Count of ad - bc = 1 (mod p) against X^4/p (int V)^4
    Modp(ModpArgs),
    /// The mod-p error over a list of primes
    ModpScan(ModpScanArgs),
    /// A single Kloosterman sum with its Weil gap
    Kloosterman(KloostermanArgs),
    /// Weil gaps for all c <= cmax, 1 <= m <= mmax, 1 <= n <= nmax
    WeilScan(WeilScanArgs),
    /// Poisson summation residuals, optionally twisted by e(a n / q)
    PoissonCheck(PoissonArgs),
    /// The two Bessel transforms and their normalized envelopes over eta
    BesselDecay(BesselDecayArgs),
    /// Residuals of the two J-Bessel series identities
    BesselIdentity(BesselIdentityArgs),
    /// Signed against absolute weighted Kloosterman sums over an (m, n) grid
    Cancellation(CancellationArgs),
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CountArgs {
    #[arg(long = "X")]
    #[serde(rename = "X")]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<i64>,
    /// Use the quadruple loop instead of the progression enumeration
    #[arg(long)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    naive: bool,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct MaintermArgs {
    #[arg(long = "X")]
    #[serde(rename = "X")]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<i64>,
    /// Also evaluate the double sum up to k <= K
    #[arg(long)]
    truncate: Option<u64>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ErrorScanArgs {
    #[arg(long, allow_hyphen_values = true)]
    r: Option<i64>,
    /// Ascending X values, comma separated
    #[arg(long = "X-list", value_delimiter = ',')]
    #[serde(rename = "X_list")]
    x_list: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RScanArgs {
    #[arg(long = "X")]
    #[serde(rename = "X")]
    x: Option<f64>,
    /// Values or inclusive ranges, e.g. `1..50` or `-3,2,7`
    #[arg(long = "r-list", allow_hyphen_values = true)]
    #[serde(rename = "r_list")]
    r_list: Option<String>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ModpArgs {
    #[arg(long)]
    p: Option<u64>,
    #[arg(long = "X")]
    #[serde(rename = "X")]
    x: Option<f64>,
    #[arg(long = "g-scale")]
    g_scale: Option<f64>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ModpScanArgs {
    #[arg(long, value_delimiter = ',')]
    primes: Option<Vec<u64>>,
    /// `<c>sqrt` for X = ceil(c sqrt(p) g)
    #[arg(long)]
    xrule: Option<String>,
    #[arg(long = "g-scale")]
    g_scale: Option<f64>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct KloostermanArgs {
    #[arg(long, allow_hyphen_values = true)]
    m: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<i64>,
    #[arg(long)]
    c: Option<u64>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct WeilScanArgs {
    #[arg(long)]
    cmax: Option<u64>,
    #[arg(long)]
    mmax: Option<i64>,
    #[arg(long)]
    nmax: Option<i64>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PoissonArgs {
    #[arg(long, value_delimiter = ',')]
    scales: Option<Vec<f64>>,
    /// Twist modulus; plain Poisson summation when absent
    #[arg(long)]
    q: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<i64>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BesselDecayArgs {
    #[arg(long = "X")]
    #[serde(rename = "X")]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<i64>,
    #[arg(long)]
    l: Option<u64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    etas: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BesselIdentityArgs {
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    y: Option<f64>,
    #[arg(long)]
    kmax: Option<u32>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CancellationArgs {
    #[arg(long = "X")]
    #[serde(rename = "X")]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<i64>,
    #[arg(long)]
    l: Option<u64>,
    #[arg(long)]
    mmax: Option<i64>,
    #[arg(long)]
    nmax: Option<i64>,
    /// Largest modulus c; defaults to the top of the support, 2X/l
    #[arg(long = "cmax")]
    cmax: Option<u64>,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Usage(String),
    Io(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => e.exit_code(),
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 2 on a bad request, 3 when a
/// quadrature fails to converge.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    // rows are produced inside the pool; output is written only on success
    let result = thread_pool().and_then(|pool| {
        pool.install(|| {
            let mut buf = Vec::new();
            dispatch(cli, &mut buf).map(|()| buf)
        })
    });
    match result.and_then(|buf| out.write_all(&buf).and_then(|()| out.flush()).map_err(CliError::from)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))
}

struct Ctx {
    weight: WeightSpec,
    quad: QuadratureSpec,
}

fn load_config(path: Option<&PathBuf>) -> CliResult<(Ctx, Map<String, Value>)> {
    let mut file = match path {
        None => Map::new(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(CliError::Usage("config must be a JSON object".into())),
                Err(e) => return Err(CliError::Usage(format!("invalid config JSON: {e}"))),
            }
        }
    };
    let weight: WeightSpec = take_section(&mut file, "weight")?;
    let quad: QuadratureSpec = take_section(&mut file, "quadrature")?;
    weight.validate()?;
    quad.validate()?;
    Ok((Ctx { weight, quad }, file))
}

fn take_section<T: DeserializeOwned + Default>(file: &mut Map<String, Value>, key: &str) -> CliResult<T> {
    match file.remove(key) {
        None => Ok(T::default()),
        Some(v) => serde_json::from_value(v).map_err(|e| CliError::Usage(format!("invalid \"{key}\" section: {e}"))),
    }
}

/// Overlays the flags that were given on the command keys from the file.
fn merge<A: Serialize + DeserializeOwned>(flags: &A, file: Map<String, Value>) -> CliResult<A> {
    let mut merged = file;
    if let Value::Object(given) = serde_json::to_value(flags).map_err(|e| CliError::Usage(e.to_string()))? {
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
}

fn need<T>(v: Option<T>, name: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("missing required value --{name}")))
}

fn header(out: &mut dyn Write, command: &str, ctx: &Ctx, args: &impl Serialize, columns: &str) -> CliResult<()> {
    let cfg = json!({ "command": command, "weight": ctx.weight, "quadrature": ctx.quad, "args": args });
    writeln!(out, "# config: {cfg}")?;
    writeln!(out, "{columns}")?;
    Ok(())
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), fmt_f)
}

fn fit_lines(out: &mut dyn Write, slope: Option<f64>, intercept: Option<f64>) -> CliResult<()> {
    writeln!(out, "# fitted_slope: {}", fmt_opt(slope))?;
    writeln!(out, "# fit_intercept: {}", fmt_opt(intercept))?;
    Ok(())
}

/// `"1..5,9,-3"` to `[1, 2, 3, 4, 5, 9, -3]`.
fn parse_int_list(s: &str) -> CliResult<Vec<i64>> {
    let bad = |t: &str| CliError::Usage(format!("cannot parse {t:?} as an integer or a range a..b"));
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = tok.split_once("..") {
            let a: i64 = a.trim().parse().map_err(|_| bad(tok))?;
            let b: i64 = b.trim().parse().map_err(|_| bad(tok))?;
            if b < a || b - a > 1_000_000 {
                return Err(bad(tok));
            }
            out.extend(a..=b);
        } else {
            out.push(tok.parse().map_err(|_| bad(tok))?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("empty r list".into()));
    }
    Ok(out)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    let (ctx, file) = load_config(cli.config.as_ref())?;
    match cli.command {
        Command::Count(a) => cmd_count(merge(&a, file)?, &ctx, out),
        Command::Mainterm(a) => cmd_mainterm(merge(&a, file)?, &ctx, out),
        Command::ErrorScan(a) => cmd_error_scan(merge(&a, file)?, &ctx, out),
        Command::RScan(a) => cmd_r_scan(merge(&a, file)?, &ctx, out),
        Command::Modp(a) => cmd_modp(merge(&a, file)?, &ctx, out),
        Command::ModpScan(a) => cmd_modp_scan(merge(&a, file)?, &ctx, out),
        Command::Kloosterman(a) => cmd_kloosterman(merge(&a, file)?, &ctx, out),
        Command::WeilScan(a) => cmd_weil_scan(merge(&a, file)?, &ctx, out),
        Command::PoissonCheck(a) => cmd_poisson(merge(&a, file)?, &ctx, out),
        Command::BesselDecay(a) => cmd_bessel_decay(merge(&a, file)?, &ctx, out),
        Command::BesselIdentity(a) => cmd_bessel_identity(merge(&a, file)?, &ctx, out),
        Command::Cancellation(a) => cmd_cancellation(merge(&a, file)?, &ctx, out),
    }
}

fn cmd_count(a: CountArgs, ctx: &Ctx, out: &mut dyn Write) -> CliResult<()> {
    let q = CountQuery::new(need(a.x, "X")?, need(a.r, "r")?)?;
    let res = if a.naive { count_naive(&ctx.weight, &q)? } else { count_fast(&ctx.weight, &q)? };
    header(out, "count", ctx, &a, "X,r,weighted_sum,solution_count,elapsed_ms")?;
    let ms = res.elapsed.as_secs_f64() * 1e3;
    writeln!(out, "{},{},{},{},{}", fmt_f(q.x), q.r, fmt_f(res.weighted_sum), res.solution_count, fmt_f(ms))?;
    Ok(())
}

fn cmd_mainterm(a: MaintermArgs, ctx: &Ctx, out: &mut dyn Write) -> CliResult<()> {
    let q = CountQuery::new(need(a.x, "X")?, need(a.r, "r")?)?;
    let b = match a.truncate {
        Some(k) => main_term_truncated(&ctx.weight, &q, k, &ctx.quad)?,
        None => main_term_closed(&ctx.weight, &q, &ctx.quad)?,
    };
    header(out, "mainterm", ctx, &a, "X,r,alpha,I_alpha,closed_form,truncated_value,tail_bound")?;
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        fmt_f(q.x),
        q.r,
        fmt_f(b.alpha),
        fmt_f(b.i_alpha),
        fmt_f(b.closed_form),
        fmt_opt(b.truncated_value),
        fmt_opt(b.tail_bound)
    )?;
    Ok(())
}

const SCALING_COLUMNS: &str = "X,r,S,M,E,abs_E,ratio";

fn cmd_error_scan(a: ErrorScanArgs, ctx: &Ctx, out: &mut dyn Write) -> CliResult<()> {
    let r = need(a.r, "r")?;
    let xs = need(a.x_list.as_deref(), "X-list")?;
    let rep = error_scan(&ctx.weight, r, xs, &ctx.quad)?;
    header(out, "error-scan", ctx, &a, SCALING_COLUMNS)?;
    for w in &rep.rows {
        writeln!(out, "{},{},{},{},{},{},{}", fmt_f(w.x), w.r, fmt_f(w.s), fmt_f(w.m), fmt_f(w.e), fmt_f(w.abs_e), fmt_f(w.ratio))?;
    }
    fit_lines(out, rep.fitted_slope, rep.fit_intercept)?;
    writeln!(out, "# median_ratio: {}", fmt_opt(rep.median_ratio()))?;
    Ok(())
}

fn cmd_r_scan(a: RScanArgs, ctx: &Ctx, out: &mut dyn Write) -> CliResult<()> {
    let x = need(a.x, "X")?;
    let rs = parse_int_list(&need(a.r_list.clone(), "r-list")?)?;
    let rep = r_scan(&ctx.weight, x, &rs, &ctx.quad)?;
    header(out, "r-scan", ctx, &a, SCALING_COLUMNS)?;
    for w in &rep.rows {
        writeln!(out, "{},{},{},{},{},{},{}", fmt_f(w.x), w.r, fmt_f(w.s), fmt_f(w.m), fmt_f(w.e), fmt_f(w.abs_e), fmt_f(w.ratio))?;
    }
    writeln!(out, "# max_abs_E: {}", fmt_f(rep.max_abs_e()))?;
    Ok(())
}

const MODP_COLUMNS: &str = "p,X,S,M,E,E_over_X2";

fn cmd_modp(mut a: ModpArgs, ctx: &Ctx, out: &mut dyn Write) -> CliResult<()> {
    let g = *a.g_scale.get_or_insert(1.0);
    let q = ModPQuery::new(need(a.p, "p")?, need(a.x, "X")?, g)?;
    let w = modp_row(&ctx.weight, &q, &ctx.quad)?;
    header(out, "modp", ctx, &a, MODP_COLUMNS)?;
    writeln!(out, "{},{},{},{},{},{}", w.p, fmt_f(w.x), fmt_f(w.s), fmt_f(w.m), fmt_f(w.e), fmt_f(w.e_over_x2))?;
    Ok(())
}

fn cmd_modp_scan(mut a: ModpScanArgs, ctx: &Ctx, out: &mut dyn Write) -> CliResult<()> {
    let g = *a.g_scale.get_or_insert(1.0);
    let rule: XRule = a.xrule.get_or_insert_with(|| "2sqrt".into()).parse()?;
    let primes = need(a.primes.as_deref(), "primes")?;
    let rep = modp_error_scan(&ctx.weight, primes, rule, g, &ctx.quad)?;
    header(out, "modp-scan", ctx, &a, MODP_COLUMNS)?;
    for w in &rep.rows {
        writeln!(out, "{},{},{},{},{},{}", w.p, fmt_f(w.x), fmt_f(w.s), fmt_f(w.m), fmt_f(w.e), fmt_f(w.e_over_x2))?;
    }
    fit_lines(out, rep.fitted_slope, rep.fit_intercept)
}

const WEIL_COLUMNS: &str = "m,n,c,S,weil_gap";

fn cmd_kloosterman(a: KloostermanArgs, ctx: &Ctx, out: &mut dyn Write) -> CliResult<()> {
    let q = KloostermanQuery::new(need(a.m, "m")?, need(a.n, "n")?, need(a.c, "c")?)?;
    let g = weil_gap(&q);
    debug_assert_eq!(g.sum, kloosterman(&q));
    header(out, "kloosterman", ctx, &a, WEIL_COLUMNS)?;
    writeln!(out, "{},{},{},{},{}", q.m, q.n, q.c, fmt_f(g.sum), fmt_f(g.gap))?;
    Ok(())
}

fn cmd_weil_scan(mut a: WeilScanArgs, ctx: &Ctx, out: &mut dyn Write) -> CliResult<()> {
    let cmax = need(a.cmax, "cmax")?;
    let mmax = *a.mmax.get_or_insert(20);
    let nmax = *a.nmax.get_or_insert(20);
    if cmax == 0 || mmax < 1 || nmax < 1 {
        return Err(CliError::Usage("cmax, mmax and nmax must be positive".into()));
    }
    let blocks: Vec<Vec<String>> = (1..=cmax)
        .into_par_iter()
        .map(|c| -> CliResult<Vec<String>> {
            let t = ModulusTables::new(c)?;
            let mut rows = Vec::with_capacity((mmax * nmax) as usize);
            for m in 1..=mmax {
                for n in 1..=nmax {
                    let s = t.kloosterman(m, n);
                    let g = crate::expsums::weil_gap_from(s, &KloostermanQuery { m, n, c });
                    rows.push(format!("{m},{n},{c},{},{}", fmt_f(s), fmt_f(g.gap)));
                }
            }
            Ok(rows)
        })
        .collect::<CliResult<_>>()?;
    header(out, "weil-scan", ctx, &a, WEIL_COLUMNS)?;
    for row in blocks.iter().flatten() {
        writeln!(out, "{row}")?;
    }
    Ok(())
}

fn cmd_poisson(mut a: PoissonArgs, ctx: &Ctx, out: &mut dyn Write) -> CliResult<()> {
    let scales = a.scales.get_or_insert_with(|| vec![5.0, 10.0, 50.0]).clone();
    let twist = match (a.q, a.a) {
        (None, None) => None,
        (Some(q), a) => Some((q, a.unwrap_or(1))),
        (None, Some(_)) => return Err(CliError::Usage("--a needs --q".into())),
    };
    let rows = scales
        .par_iter()
        .map(|&s| match twist {
            None => poisson_check(&ctx.weight, s, &ctx.quad),
            Some((q, a)) => twisted_poisson_residual(&ctx.weight, a, q, s, &ctx.quad),
        })
        .collect::<crate::error::Result<Vec<_>>>()?;
    header(out, "poisson-check", ctx, &a, "scale,q,a,residual")?;
    let (q, tw) = twist.unwrap_or((1, 0));
    for (s, r) in scales.iter().zip(rows) {
        writeln!(out, "{},{q},{tw},{}", fmt_f(*s), fmt_f(r))?;
    }
    Ok(())
}

fn cmd_bessel_decay(mut a: BesselDecayArgs, ctx: &Ctx, out: &mut dyn Write) -> CliResult<()> {
    let x = need(a.x, "X")?;
    let r = *a.r.get_or_insert(1);
    let m = *a.m.get_or_insert(1);
    let n = *a.n.get_or_insert(1);
    let l = *a.l.get_or_insert(1);
    let etas = a.etas.get_or_insert_with(|| vec![1.0, 2.0, 4.0, 8.0, 16.0]).clone();
    let p = OscWeightParams::new(m, n, r, l, x, ctx.weight)?;
    let rows = etas
        .par_iter()
        .map(|&eta| -> crate::error::Result<String> {
            let c = f_check(&p, eta, &ctx.quad)?;
            let d = f_ddot(&p, eta, &ctx.quad)?;
            let scale = (std::f64::consts::PI * eta.abs()).exp();
            let (ce, de) = (c.norm() * scale * eta * eta, d.norm() * scale * eta.abs().powf(2.5));
            Ok([eta, c.re, c.im, ce, d.re, d.im, de].map(fmt_f).join(","))
        })
        .collect::<crate::error::Result<Vec<_>>>()?;
    header(out, "bessel-decay", ctx, &a, "eta,f_check_re,f_check_im,f_check_env,f_ddot_re,f_ddot_im,f_ddot_env")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    Ok(())
}

fn cmd_bessel_identity(a: BesselIdentityArgs, ctx: &Ctx, out: &mut dyn Write) -> CliResult<()> {
    let (x, y, k) = (need(a.x, "x")?, need(a.y, "y")?, need(a.kmax, "kmax")?);
    let (ra, rb) = bessel_identity_residuals(x, y, k, &ctx.quad)?;
    header(out, "bessel-identity", ctx, &a, "x,y,kmax,residual_a,residual_b")?;
    writeln!(out, "{},{},{k},{},{}", fmt_f(x), fmt_f(y), fmt_f(ra), fmt_f(rb))?;
    Ok(())
}

fn cmd_cancellation(mut a: CancellationArgs, ctx: &Ctx, out: &mut dyn Write) -> CliResult<()> {
    let x = need(a.x, "X")?;
    let r = *a.r.get_or_insert(1);
    let l = *a.l.get_or_insert(1);
    let mmax = *a.mmax.get_or_insert(5);
    let nmax = *a.nmax.get_or_insert(5);
    if mmax < 1 || nmax < 1 || l == 0 {
        return Err(CliError::Usage("mmax, nmax and l must be positive".into()));
    }
    let cmax = *a.cmax.get_or_insert((2.0 * x / l as f64).ceil() as u64);
    let grid: Vec<(i64, i64)> = (-mmax..=mmax).filter(|&m| m != 0).flat_map(|m| (-nmax..=nmax).filter(|&n| n != 0).map(move |n| (m, n))).collect();
    let rows = grid
        .par_iter()
        .map(|&(m, n)| -> crate::error::Result<String> {
            let p = OscWeightParams::new(m, n, r, l, x, ctx.weight)?;
            let w = weighted_kloosterman_sum(&p, cmax)?;
            Ok(format!(
                "{m},{n},{},{},{},{},{},{}",
                fmt_f(w.signed.re),
                fmt_f(w.signed.im),
                fmt_f(w.signed.norm()),
                fmt_f(w.absolute),
                fmt_opt(w.ratio()),
                w.terms
            ))
        })
        .collect::<crate::error::Result<Vec<_>>>()?;
    header(out, "cancellation", ctx, &a, "m,n,signed_re,signed_im,abs_signed,absolute,ratio,terms")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("detcount").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn int_lists_and_ranges() {
        assert_eq!(parse_int_list("1..3,7,-2").unwrap(), vec![1, 2, 3, 7, -2]);
        assert!(parse_int_list("3..1").is_err());
        assert!(parse_int_list("x").is_err());
        assert!(parse_int_list("").is_err());
    }

    #[test]
    fn merge_prefers_flags() {
        let mut file = Map::new();
        file.insert("X".into(), json!(20.0));
        file.insert("r".into(), json!(3));
        let flags = CountArgs { x: None, r: Some(-5), naive: false };
        let m = merge(&flags, file.clone()).unwrap();
        assert_eq!((m.x, m.r, m.naive), (Some(20.0), Some(-5), false));
        file.insert("bogus".into(), json!(1));
        assert!(merge(&flags, file).is_err());
    }

    #[test]
    fn float_format_is_17_digits() {
        assert_eq!(fmt_f(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_opt(None), "n/a");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_str(&["count", "--X", "10", "--r", "1"]).0, 0);
        assert_eq!(run_str(&["count", "--X", "10", "--r", "0"]).0, 2);
        assert_eq!(run_str(&["count", "--X", "10"]).0, 2);
        assert_eq!(run_str(&["no-such-command"]).0, 2);
        assert_eq!(run_str(&["--help"]).0, 0);
    }
}
