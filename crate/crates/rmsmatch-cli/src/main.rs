use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rmsmatch::assignment::Instance;
use rmsmatch::hausdorff1d::{local_min_h1, Variant};
use rmsmatch::hausdorff2d::{icp, local_min_h2};
use rmsmatch::io::{parse_line, parse_point, parse_pointset, to_json};
use rmsmatch::numeric::algebraic::QuadraticAlgebraic;
use rmsmatch::numeric::scalar::{format_scalar, Scalar};
use rmsmatch::oracles::{brute_line_trace, enumerate_h1_minima, enumerate_h2_minima, enumerate_pm_minima, Location, MinimaSet};
use rmsmatch::preference::{gen_lower_bound, gen_proposition_lists};
use rmsmatch::subdivision::{build_subdivision_with, global_minimum_pm_with, local_minimum_pm, trace_line, BuildOptions, LineTrace};
use rmsmatch::{Error, Result};
use serde::Serialize;
use serde_json::Value;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rmsmatch", version, about = "Exact RMS matching of planar point sets under translation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Point-set file; standard input when omitted.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Upper limit on the work measure of the command.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Seed for random generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel oracles.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Uni,
    L1,
    Linf,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Uni => Variant::Uni,
            VariantArg::L1 => Variant::L1,
            VariantArg::Linf => Variant::Linf,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Partial-matching distance.
    Pm {
        #[command(subcommand)]
        command: PmCommand,
    },
    /// Hausdorff distance.
    Haus {
        #[command(subcommand)]
        command: HausCommand,
    },
    /// Instance generators.
    Gen {
        #[command(subcommand)]
        command: GenCommand,
    },
    /// Exhaustive reference computations.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
}

#[derive(Subcommand)]
enum PmCommand {
    LocalMin,
    GlobalMin,
    Trace {
        /// `a,b,c` for `a x + b y = c`, or `x=c`, or `y=c`.
        #[arg(long, allow_hyphen_values = true)]
        line: String,
    },
    Subdivision,
}

#[derive(Subcommand)]
enum HausCommand {
    LocalMin {
        #[arg(long, default_value_t = 2)]
        dim: u8,
        #[arg(long, value_enum, default_value_t = VariantArg::Uni)]
        variant: VariantArg,
    },
    Icp {
        #[arg(long, default_value_t = 2)]
        dim: u8,
        /// `x,y` (or `x` in one dimension).
        #[arg(long, allow_hyphen_values = true)]
        start: String,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    LowerBound {
        #[arg(long)]
        l: u64,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 1)]
        dim: u8,
    },
    Proposition {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Random instance with coordinates `p/q`, `|p| <= span`, `1 <= q <= denom`.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 20)]
        span: i64,
        #[arg(long, default_value_t = 1)]
        denom: i64,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    PmMinima,
    H1Minima {
        #[arg(long, value_enum, default_value_t = VariantArg::Uni)]
        variant: VariantArg,
    },
    H2Minima {
        #[arg(long, value_enum, default_value_t = VariantArg::Uni)]
        variant: VariantArg,
    },
    LineTrace {
        #[arg(long, allow_hyphen_values = true)]
        line: String,
    },
}

/// Rendered command output.
enum Output {
    Json(Value),
    Table(Vec<&'static str>, Vec<Vec<String>>),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Validation(_) | Error::SeparationViolated { .. } | Error::ListExhausted => 2,
        Error::BudgetExceeded(_) => 3,
        Error::Invariant(_) | Error::EmptyIntersection | Error::OutOfRange { .. } | Error::OnBoundary => 4,
    }
}

fn value_of<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Invariant(e.to_string()))
}

/// Adds a 20-digit decimal rendering next to an exact value.
fn with_decimal(mut v: Value, value: &QuadraticAlgebraic) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("value_decimal".into(), Value::String(value.decimal(20)));
    }
    v
}

fn read_instance(cli: &Cli) -> Result<Instance> {
    let mut text = String::new();
    let res = match &cli.input {
        Some(p) => std::fs::File::open(p).and_then(|mut f| f.read_to_string(&mut text)),
        None => std::io::stdin().read_to_string(&mut text),
    };
    res.map_err(|e| Error::Parse(format!("cannot read input: {e}")))?;
    parse_pointset(&text)
}

fn xs_of(inst: &Instance) -> Result<(Vec<Scalar>, Vec<Scalar>)> {
    if inst.a.iter().chain(&inst.b).any(|p| p.y != Scalar::from_integer(0.into())) {
        return Err(Error::Validation("dim 1 needs every point on the x-axis".into()));
    }
    Ok((inst.a.iter().map(|p| p.x.clone()).collect(), inst.b.iter().map(|p| p.x.clone()).collect()))
}

fn check_budget(cli: &Cli, what: &str, measure: usize) -> Result<()> {
    match cli.budget {
        Some(b) if measure > b => Err(Error::BudgetExceeded(format!("{what} needs {measure} > budget {b}"))),
        _ => Ok(()),
    }
}

fn build_options(cli: &Cli) -> BuildOptions {
    let mut opts = BuildOptions::default();
    if let Some(b) = cli.budget {
        opts.max_regions = b;
    }
    opts
}

fn trace_output(cli: &Cli, tr: &LineTrace) -> Result<Output> {
    if cli.format == Format::Json {
        return Ok(Output::Json(value_of(tr)?));
    }
    let bound = |x: &Option<Scalar>| x.as_ref().map_or(String::new(), format_scalar);
    let rows = tr
        .cells
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let set: Vec<String> = c.matching.matched_set.iter().map(|j| j.to_string()).collect();
            vec![
                k.to_string(),
                bound(&c.start),
                bound(&c.end),
                set.join(" "),
                format_scalar(&c.plane.c),
                format_scalar(&c.plane.d.x),
                format_scalar(&c.plane.d.y),
            ]
        })
        .collect();
    Ok(Output::Table(vec!["cell_index", "param_start", "param_end", "matched_set", "c", "d_x", "d_y"], rows))
}

fn location_cells(t: &Location) -> (String, String) {
    match t {
        Location::OneD(x) => (x.to_string(), String::new()),
        Location::TwoD(p) => (p.x.to_string(), p.y.to_string()),
    }
}

fn minima_output(cli: &Cli, set: &MinimaSet) -> Result<Output> {
    if cli.format == Format::Json {
        return Ok(Output::Json(value_of(set)?));
    }
    let rows = set
        .entries
        .iter()
        .map(|e| {
            let (x, y) = location_cells(&e.t);
            vec![x, y, e.value.to_string(), e.value.decimal(20)]
        })
        .collect();
    Ok(Output::Table(vec!["t_x", "t_y", "value", "value_decimal"], rows))
}

fn json_only(cli: &Cli, v: Value) -> Result<Output> {
    match cli.format {
        Format::Json => Ok(Output::Json(v)),
        Format::Csv => Err(Error::Validation("this command has no csv form".into())),
    }
}

fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Pm { command } => {
            let inst = read_instance(cli)?;
            match command {
                PmCommand::LocalMin => {
                    let r = local_minimum_pm(&inst)?;
                    json_only(cli, with_decimal(value_of(&r)?, &QuadraticAlgebraic::rational(r.value.clone())))
                }
                PmCommand::GlobalMin => {
                    let r = global_minimum_pm_with(&inst, build_options(cli))?;
                    json_only(cli, with_decimal(value_of(&r)?, &QuadraticAlgebraic::rational(r.value.clone())))
                }
                PmCommand::Trace { line } => trace_output(cli, &trace_line(&inst, &parse_line(line)?)?),
                PmCommand::Subdivision => json_only(cli, value_of(&build_subdivision_with(&inst, build_options(cli))?)?),
            }
        }
        Command::Haus { command } => {
            let inst = read_instance(cli)?;
            match command {
                HausCommand::LocalMin { dim: 1, variant } => {
                    let (a, b) = xs_of(&inst)?;
                    let r = local_min_h1(&a, &b, (*variant).into())?;
                    json_only(cli, with_decimal(value_of(&r)?, &r.value))
                }
                HausCommand::LocalMin { dim: 2, variant } => {
                    let r = local_min_h2(&inst, (*variant).into())?;
                    json_only(cli, with_decimal(value_of(&r)?, &r.value))
                }
                HausCommand::LocalMin { dim, .. } => Err(Error::Validation(format!("dim must be 1 or 2, got {dim}"))),
                HausCommand::Icp { dim, start } => {
                    let start = if *dim == 1 && !start.contains(',') {
                        parse_point(&format!("{start},0"))?
                    } else {
                        parse_point(start)?
                    };
                    let r = icp(&inst, &start, *dim)?;
                    json_only(cli, with_decimal(value_of(&r)?, &r.value))
                }
            }
        }
        Command::Gen { command } => match command {
            GenCommand::LowerBound { l, k, dim } => json_only(cli, value_of(&gen_lower_bound(*l, *k, *dim)?)?),
            GenCommand::Proposition { m, n } => json_only(cli, value_of(&gen_proposition_lists(*m, *n)?)?),
            GenCommand::Random { n, m, span, denom } => {
                if *m < 1 || m > n || *span < 1 || *denom < 1 || ((2 * span + 1) as u128).pow(2) < *n as u128 {
                    return Err(Error::Validation("need 1 <= m <= n, span >= 1, denom >= 1 and room for n points".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                json_only(cli, value_of(&Instance::random(&mut rng, *n, *m, *span, *denom))?)
            }
        },
        Command::Oracle { command } => {
            let inst = read_instance(cli)?;
            match command {
                OracleCommand::PmMinima => {
                    check_budget(cli, "matching enumeration", inst.n().saturating_pow(inst.m() as u32))?;
                    minima_output(cli, &enumerate_pm_minima(&inst)?)
                }
                OracleCommand::H1Minima { variant } => {
                    let (a, b) = xs_of(&inst)?;
                    check_budget(cli, "breakpoint enumeration", a.len() * b.len())?;
                    minima_output(cli, &enumerate_h1_minima(&a, &b, (*variant).into())?)
                }
                OracleCommand::H2Minima { variant } => {
                    let (n, m) = (inst.n(), inst.m());
                    check_budget(cli, "bisector arrangement", (m * n * n + n * m * m).pow(2))?;
                    minima_output(cli, &enumerate_h2_minima(&inst, (*variant).into())?)
                }
                OracleCommand::LineTrace { line } => trace_output(cli, &brute_line_trace(&inst, &parse_line(line)?)?),
            }
        }
    }
}

fn render(out: Output) -> Result<Vec<u8>> {
    match out {
        Output::Json(v) => Ok(to_json(&v)?.into_bytes()),
        Output::Table(header, rows) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Invariant(e.to_string());
            w.write_record(&header).map_err(io)?;
            for r in rows {
                w.write_record(&r).map_err(io)?;
            }
            w.into_inner().map_err(|e| Error::Invariant(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // output never depends on the pool size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let result = run(&cli).and_then(render).and_then(|bytes| {
        let res = match &cli.output {
            Some(p) => std::fs::write(p, &bytes),
            None => std::io::stdout().write_all(&bytes),
        };
        res.map_err(|e| Error::Validation(format!("cannot write output: {e}")))
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
