//! The batch command-line driver.
//!
//! ```text
//! groupoidal validate [model]
//! groupoidal build <construction> <args...> [model]
//! groupoidal check-equivalence <scenario> [model]
//! groupoidal morita <scenario> [model]
//! groupoidal demo raeburn|coaction [--case ..] [--group ..] [--bundle ..]
//! ```
//!
//! Without a model path the bundled `symmetric_z2z2` model is used. Exit
//! status: 0 pass, 1 fail, 2 indeterminate, 3 usage or parse error.

mod build;
mod commands;
mod report;

use std::time::Instant;

use clap::{Parser, Subcommand};

pub use build::CONSTRUCTIONS;
pub use report::{Entry, RunReport, Status};

use crate::io::{parse_model, resolve, Objects};
use crate::linalg::DEFAULT_TOL;

pub const BUILTIN_MODEL: &str = include_str!("../../models/symmetric_z2z2.model");
pub const BUILTIN_NAME: &str = "builtin:symmetric_z2z2";
pub const TOL_ENV: &str = "GROUPOIDAL_TOL";

#[derive(Parser, Debug)]
#[command(name = "groupoidal", version, about = "Fell bundles over finite groupoids and Morita certificates")]
struct Cli {
    /// Seed for randomized steps; recorded in every report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Absolute tolerance (default 1e-9, or $GROUPOIDAL_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Also write the report as JSON to this path (`-` for stdout only).
    #[arg(long, global = true)]
    json: Option<String>,
    /// Write the model emitted by `build` to this path.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Record wall-clock timings (makes reports non-reproducible).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

fn construction_list() -> String {
    let mut s = String::from("Constructions (a model path may follow the arguments):\n");
    for c in CONSTRUCTIONS {
        s += &format!("  {:<26}{}\n", c.name, c.usage);
    }
    s
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every object in the model.
    Validate { model: Option<String> },
    /// Run one construction and emit the result as a model.
    #[command(after_help = construction_list())]
    Build {
        construction: String,
        args: Vec<String>,
    },
    /// Verify the equivalence behind a scenario, at groupoid and bundle level.
    CheckEquivalence { scenario: String, model: Option<String> },
    /// Certify a scenario's Morita equivalence.
    Morita { scenario: String, model: Option<String> },
    /// Built-in instances.
    Demo {
        which: String,
        #[arg(long, default_value = "Z2")]
        group: String,
        #[arg(long, default_value = "line")]
        bundle: String,
        #[arg(long, default_value = "translation")]
        case: String,
    },
}

/// Settings shared by all commands.
#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub tol: f64,
    pub seed: u64,
    pub timings: bool,
}

impl Ctx {
    /// Runs `f`, stamping the entry with its duration when timings are on.
    pub fn timed(&self, f: impl FnOnce() -> Entry) -> Entry {
        let start = Instant::now();
        let mut e = f();
        if self.timings {
            e.millis = Some(start.elapsed().as_secs_f64() * 1e3);
        }
        e
    }
}

/// A usage or parse failure: exit status 3.
#[derive(Debug)]
pub struct Usage(pub String);

impl From<crate::Error> for Usage {
    fn from(e: crate::Error) -> Self {
        Usage(e.to_string())
    }
}

fn load(path: Option<&str>) -> Result<(String, Objects), Usage> {
    let (name, text) = match path {
        None | Some(BUILTIN_NAME) => (BUILTIN_NAME.to_string(), BUILTIN_MODEL.to_string()),
        Some(p) => (p.to_string(), std::fs::read_to_string(p).map_err(|e| Usage(format!("{p}: {e}")))?),
    };
    let m = parse_model(&text).map_err(|e| Usage(format!("{name}: {e}")))?;
    Ok((name, resolve(&m)?))
}

fn tolerance(flag: Option<f64>) -> Result<f64, Usage> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s.trim().parse().map_err(|_| Usage(format!("{TOL_ENV}: not a number: {s}")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(Usage(format!("tolerance must be positive, got {tol}")))
    }
}

fn execute(cli: &Cli) -> Result<RunReport, Usage> {
    let ctx = Ctx { tol: tolerance(cli.tol)?, seed: cli.seed, timings: cli.timings };
    let report = |cmd: String, model: Option<String>| RunReport::new(cmd, model, ctx.seed, ctx.tol);
    Ok(match &cli.command {
        Command::Validate { model } => {
            let (name, objs) = load(model.as_deref())?;
            let mut r = report("validate".into(), Some(name));
            commands::validate(&objs, &ctx).into_iter().for_each(|e| r.push(e));
            r
        }
        Command::Build { construction, args } => {
            let spec = build::find(construction)?;
            let (args, model) = match args.len() {
                n if n == spec.arity => (&args[..], None),
                n if n == spec.arity + 1 => (&args[..n - 1], Some(args[n - 1].as_str())),
                _ => return Err(Usage(format!("usage: build {} {}", spec.name, spec.usage))),
            };
            let (name, objs) = load(model)?;
            let mut r = report(format!("build {}", spec.name), Some(name));
            let (entry, decls) = ctx.timed_build(|| spec.run(&objs, args, &ctx))?;
            r.push(entry);
            if !decls.is_empty() {
                r.emitted = Some(crate::io::ModelFile { decls, ..Default::default() }.to_text());
            }
            r
        }
        Command::CheckEquivalence { scenario, model } => {
            let (name, objs) = load(model.as_deref())?;
            let sc = objs.scenario(scenario)?;
            let mut r = report(format!("check-equivalence {scenario}"), Some(name));
            r.push(ctx.timed(|| commands::check_equivalence(scenario, sc, &ctx)));
            r
        }
        Command::Morita { scenario, model } => {
            let (name, objs) = load(model.as_deref())?;
            let sc = objs.scenario(scenario)?;
            let mut r = report(format!("morita {scenario}"), Some(name));
            r.push(ctx.timed(|| commands::morita(scenario, sc, &ctx)));
            r
        }
        Command::Demo { which, group, bundle, case } => {
            let (cmd, entry) = match which.as_str() {
                "coaction" => {
                    let (g, b) = commands::demo_coaction_input(group, bundle)?;
                    (format!("demo coaction --group {group} --bundle {bundle}"), ctx.timed(|| commands::demo_coaction(&g, &b, &ctx)))
                }
                "raeburn" => {
                    let d = commands::demo_raeburn_input(case)?;
                    (format!("demo raeburn --case {case}"), ctx.timed(|| commands::demo_raeburn(case, &d, &ctx)))
                }
                w => return Err(Usage(format!("unknown demo `{w}` (expected raeburn or coaction)"))),
            };
            let mut r = report(cmd, None);
            r.push(entry);
            r
        }
    })
}

impl Ctx {
    fn timed_build(
        &self,
        f: impl FnOnce() -> Result<(Entry, Vec<crate::io::Decl>), Usage>,
    ) -> Result<(Entry, Vec<crate::io::Decl>), Usage> {
        let start = Instant::now();
        let (mut e, d) = f()?;
        if self.timings {
            e.millis = Some(start.elapsed().as_secs_f64() * 1e3);
        }
        Ok((e, d))
    }
}

/// Runs the CLI on `args` (without the program name) and returns the exit
/// status and the text for stdout.
pub fn run<S: AsRef<str>>(args: &[S]) -> (i32, String) {
    let argv = std::iter::once("groupoidal").chain(args.iter().map(|s| s.as_ref()));
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            return (code, e.to_string());
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(Usage(msg)) => return (3, format!("error: {msg}\n")),
    };
    let mut out = match cli.json.as_deref() {
        Some("-") => report.to_json() + "\n",
        _ => report.render(),
    };
    if let Some(path) = cli.json.as_deref().filter(|p| *p != "-") {
        if let Err(e) = std::fs::write(path, report.to_json() + "\n") {
            return (3, format!("error: {path}: {e}\n"));
        }
    }
    if let Some(text) = &report.emitted {
        match cli.out.as_deref() {
            Some(path) => {
                if let Err(e) = std::fs::write(path, text) {
                    return (3, format!("error: {path}: {e}\n"));
                }
            }
            None if cli.json.as_deref() != Some("-") => {
                out.push_str("--- emitted model ---\n");
                out.push_str(text);
            }
            None => {}
        }
    }
    (report.status.exit_code(), out)
}
