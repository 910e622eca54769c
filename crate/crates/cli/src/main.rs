mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pplab::families::{self, lookup, smallest_k_prime, FamilyParams};
use pplab::harness::{self, CoeffSelection, HarnessError, RunConfig};
use pplab::report::RunReport;

use config::ConfigFile;

const EXIT_FAIL: u8 = 1;
const EXIT_INAPPLICABLE: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "pplab",
    version,
    about = "Exhaustive verification of permutation-polynomial families over finite fields"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// key = value file mirroring the long flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Largest field order to construct
    #[arg(long, global = true)]
    cap: Option<u64>,
    /// Seed for δ sampling
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// δ samples per instance above the exhaustive threshold
    #[arg(long, global = true)]
    delta_samples: Option<usize>,
    /// Fields up to this order get every δ
    #[arg(long, global = true)]
    exhaustive_threshold: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Leave timings out of JSON output
    #[arg(long, global = true)]
    no_timings: bool,
    /// Also run coefficients outside each family's condition (never asserted)
    #[arg(long, global = true)]
    probe_outside: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Verify one catalog family
    Verify {
        #[arg(long)]
        family: Option<String>,
        /// Base field order(s) q
        #[arg(long, value_delimiter = ',')]
        q: Vec<u64>,
        /// Characteristic, used with --k
        #[arg(long)]
        p: Option<u32>,
        /// Exponent(s) k with q = p^k (p defaults to 2)
        #[arg(long, value_delimiter = ',')]
        k: Vec<u32>,
        #[arg(long)]
        k_prime: Option<u32>,
    },
    /// Reproduce every row of the even-characteristic table
    Table1 {
        #[arg(long, value_delimiter = ',')]
        row: Vec<u32>,
        /// Override k for the selected rows
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        k_prime: Option<u32>,
    },
    /// List permuting trinomials cx - x^s + x^(q^k s) over GF(p^n)
    Sweep {
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        n: Option<u32>,
        /// Base field order (default p^(n/2))
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        step: Option<u32>,
        #[arg(long)]
        s_min: Option<u64>,
        #[arg(long)]
        s_max: Option<u64>,
        /// `one`, `all`, or comma-separated element indices
        #[arg(long)]
        c: Option<String>,
    },
    /// Re-serialize a saved JSON report
    Report { input: PathBuf },
    /// Dump the family manifest as JSON
    Catalog,
}

enum Failure {
    Inapplicable(anyhow::Error),
    Config(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<HarnessError>() {
            Some(h) if h.is_inapplicable() => Failure::Inapplicable(e),
            _ => Failure::Config(e),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Inapplicable(e)) => {
            eprintln!("inapplicable: {e:#}");
            ExitCode::from(EXIT_INAPPLICABLE)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

/// Flags and config file merged; flags win.
struct Settings {
    file: ConfigFile,
    run: RunConfig,
    format: Format,
    out: Option<PathBuf>,
    timings: bool,
}

fn settings(g: &Global) -> anyhow::Result<Settings> {
    let file = match &g.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let mut run = RunConfig::default();
    if let Some(v) = g.cap.or(file.get("cap")?) {
        run.cap = v;
    }
    if let Some(v) = g.seed.or(file.get("seed")?) {
        run.delta.seed = v;
    }
    if let Some(v) = g.delta_samples.or(file.get("delta-samples")?) {
        run.delta.samples = v;
    }
    if let Some(v) = g.exhaustive_threshold.or(file.get("exhaustive-threshold")?) {
        run.delta.exhaustive_threshold = v;
    }
    if let Some(v) = g.jobs.or(file.get("jobs")?) {
        run.jobs = v;
    }
    run.probe_outside = g.probe_outside || file.flag("probe-outside")?;
    let format = match g.format {
        Some(f) => f,
        None => file
            .get::<String>("format")?
            .map(|s| {
                s.parse::<Format>()
                    .map_err(|e| anyhow!("config key `format`: {e}"))
            })
            .transpose()?
            .unwrap_or(Format::Json),
    };
    Ok(Settings {
        out: g.out.clone().or(file.get("out")?),
        timings: !(g.no_timings || file.flag("no-timings")?),
        file,
        run,
        format,
    })
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let s = settings(&cli.global)?;
    let report = match cli.command {
        Command::Catalog => {
            if s.format == Format::Csv {
                return Err(Failure::Config(anyhow!(
                    "the catalog is only available as JSON"
                )));
            }
            let text = serde_json::to_string_pretty(&families::manifest())
                .context("serializing manifest")?;
            emit(&s, &text)?;
            return Ok(ExitCode::SUCCESS);
        }
        Command::Report { input } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            RunReport::from_json(&text).context("parsing report")?
        }
        Command::Verify {
            family,
            q,
            p,
            k,
            k_prime,
        } => {
            let family = family
                .or(s.file.get("family")?)
                .ok_or_else(|| anyhow!("--family is required"))?;
            let spec = lookup(&family).map_err(anyhow::Error::from)?;
            let q = if q.is_empty() { s.file.list("q")? } else { q };
            let k = if k.is_empty() { s.file.list("k")? } else { k };
            let p = p.or(s.file.get("p")?);
            let k_prime = k_prime.or(s.file.get("k-prime")?);
            let mut params = Vec::new();
            for q in q {
                let (p, e) = prime_power(q)?;
                params.push(FamilyParams::new(p, e));
            }
            for k in k {
                params.push(FamilyParams::new(p.unwrap_or(2), k));
            }
            if !params.is_empty() && p.is_some() && params.iter().any(|x| Some(x.p) != p) {
                return Err(Failure::Config(anyhow!("--p disagrees with --q")));
            }
            let params = params
                .into_iter()
                .map(|x| with_k_prime(spec, x, k_prime))
                .collect::<Vec<_>>();
            harness::verify(&family, &params, &s.run)?
        }
        Command::Table1 { row, k, k_prime } => {
            let rows = if row.is_empty() {
                s.file.list("row")?
            } else {
                row
            };
            let k = k.or(s.file.get("k")?);
            let k_prime = k_prime.or(s.file.get("k-prime")?);
            let mut overrides = Vec::new();
            if k.is_some() || k_prime.is_some() {
                let targets: Vec<u32> = if rows.is_empty() {
                    (1..=13).collect()
                } else {
                    rows.clone()
                };
                for r in targets {
                    let spec = harness::table1_spec(r)?;
                    let base = match k {
                        Some(k) => FamilyParams::new(2, k),
                        None => harness::table1_default_params(r, s.run.cap)?,
                    };
                    let base = FamilyParams {
                        k_prime: None,
                        ..base
                    };
                    overrides.push((r, with_k_prime(spec, base, k_prime)));
                }
            }
            harness::table1(&rows, &overrides, &s.run)?
        }
        Command::Sweep {
            p,
            n,
            q,
            step,
            s_min,
            s_max,
            c,
        } => {
            let p = p
                .or(s.file.get("p")?)
                .ok_or_else(|| anyhow!("--p is required"))?;
            let n = n
                .or(s.file.get("n")?)
                .ok_or_else(|| anyhow!("--n is required"))?;
            let base_degree = match q.or(s.file.get("q")?) {
                Some(q) => {
                    let (qp, b) = prime_power(q)?;
                    if qp != p {
                        return Err(Failure::Config(anyhow!(
                            "q = {q} is not a power of p = {p}"
                        )));
                    }
                    b
                }
                None if n % 2 == 0 => n / 2,
                None => return Err(Failure::Config(anyhow!("odd n needs an explicit --q"))),
            };
            let step = step.or(s.file.get("step")?).unwrap_or(1);
            let lo = s_min.or(s.file.get("s-min")?);
            let hi = s_max.or(s.file.get("s-max")?);
            let range = match (lo, hi) {
                (None, None) => None,
                (lo, hi) => Some((
                    lo.unwrap_or(1),
                    hi.unwrap_or_else(|| (p as u64).saturating_pow(n).saturating_sub(2)),
                )),
            };
            let coeffs = parse_coeffs(c.or(s.file.get("c")?).as_deref())?;
            harness::sweep(p, n, base_degree, step, range, &coeffs, &s.run)?
        }
    };
    for r in &report.reports {
        let verdict = match (r.passed(), r.asserted) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (reported only)",
        };
        eprintln!(
            "{verdict} {} [{}] {} {}: {}/{} permute",
            r.family, r.variant, r.params, r.exponent.label, r.summary.passed, r.summary.total
        );
    }
    if let Some(sw) = &report.sweep {
        eprintln!(
            "sweep GF({}^{}): {} permuting (s, c) pairs",
            sw.field.p,
            sw.field.n,
            sw.entries.len()
        );
    }
    let text = match s.format {
        Format::Json if s.timings => report.to_json(),
        Format::Json => report.stable_json(),
        Format::Csv => report.to_csv(),
    };
    emit(&s, &text)?;
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    })
}

fn with_k_prime(
    spec: &pplab::FamilySpec,
    params: FamilyParams,
    k_prime: Option<u32>,
) -> FamilyParams {
    if !spec.needs_k_prime() {
        return params;
    }
    match k_prime.or_else(|| smallest_k_prime(spec, params.p, params.e)) {
        Some(kp) => params.with_k_prime(kp),
        None => params,
    }
}

fn emit(s: &Settings, text: &str) -> anyhow::Result<()> {
    match &s.out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

/// Splits `q` into `(p, e)` with `q = p^e`.
fn prime_power(q: u64) -> anyhow::Result<(u32, u32)> {
    if q < 2 {
        bail!("q = {q} is not a prime power");
    }
    let p = (2..=q)
        .find(|d| q.is_multiple_of(*d))
        .expect("q has a smallest divisor");
    let (mut rest, mut e) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    if rest != 1 {
        bail!("q = {q} is not a prime power");
    }
    Ok((u32::try_from(p)?, e))
}

fn parse_coeffs(spec: Option<&str>) -> anyhow::Result<CoeffSelection> {
    Ok(match spec.map(str::trim) {
        None | Some("one") | Some("1") => CoeffSelection::One,
        Some("all") => CoeffSelection::All,
        Some(list) => CoeffSelection::Indices(
            list.split(',')
                .map(|v| v.trim().parse::<u32>().context("coefficient index"))
                .collect::<anyhow::Result<_>>()?,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(9).unwrap(), (3, 2));
        assert_eq!(prime_power(7).unwrap(), (7, 1));
        assert_eq!(prime_power(256).unwrap(), (2, 8));
        assert!(prime_power(12).is_err());
        assert!(prime_power(1).is_err());
    }

    #[test]
    fn coefficient_lists() {
        assert_eq!(parse_coeffs(None).unwrap(), CoeffSelection::One);
        assert_eq!(parse_coeffs(Some("all")).unwrap(), CoeffSelection::All);
        assert_eq!(
            parse_coeffs(Some("3, 5")).unwrap(),
            CoeffSelection::Indices(vec![3, 5])
        );
        assert!(parse_coeffs(Some("x")).is_err());
    }
}
