//! Command-line front end: graph files, morphism expressions and subcommands.
//!
//! Every command is a function of its arguments and the bytes of the files it
//! names. Results go to stdout, diagnostics to stderr. Exit status is 0 for
//! success or a positive answer, 1 for a negative answer (`eq`, `interfere`,
//! `trace-eq`) and 2 for errors.

pub mod expr;
pub mod graphfile;

use std::fmt::Write as _;
use std::ops::Range;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use restrace::freecat::ENUMERATION_CAP;
use restrace::traces::{self, DependencyRelation, Symbol};
use restrace::{interference, render, tensor, EffectfulGraph, FreeCategory, GeneratorId, Word};

pub use expr::{parse_expr, parse_morphism_expr};
pub use graphfile::{parse_graph_file, print_graph_file, GraphFile};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error("at {}..{}: {message}", .span.start, .span.end)]
    Expr { span: Range<usize>, message: String },
    #[error("{0}")]
    Unprintable(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    FreeCat(#[from] restrace::FreeCatError),
    #[error(transparent)]
    Trace(#[from] traces::TraceError),
    #[error(transparent)]
    Tensor(#[from] tensor::TensorError),
}

#[derive(Debug, Parser)]
#[command(name = "restrace", version, about = "Resourceful traces over effectful graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a graph file.
    Check { file: PathBuf },
    /// Print the canonical form of a morphism, one layer at a time.
    Nf {
        file: PathBuf,
        #[arg(short = 'e', long = "expr")]
        expr: String,
    },
    /// Decide equality of two morphisms (exit 0 equal, 1 unequal).
    Eq {
        file: PathBuf,
        #[arg(short = 'e', long = "expr", num_args = 1, required = true)]
        exprs: Vec<String>,
    },
    /// List the devices a morphism uses.
    Devices {
        file: PathBuf,
        #[arg(short = 'e', long = "expr")]
        expr: String,
    },
    /// Decide whether two morphisms interfere (exit 0) or interchange (exit 1).
    Interfere {
        file: PathBuf,
        #[arg(short = 'e', long = "expr", num_args = 1, required = true)]
        exprs: Vec<String>,
    },
    /// Interference cliques and underlying device graph of a bounded sample.
    Cliques {
        file: PathBuf,
        #[arg(long)]
        max_events: usize,
        /// Comma-separated words; an empty entry is the empty word.
        #[arg(long)]
        pool: String,
        #[arg(long, default_value_t = ENUMERATION_CAP)]
        cap: usize,
    },
    /// Commuting tensor product of two graph files.
    Tensor {
        left: PathBuf,
        right: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Decide trace equality of two words (exit 0 equal, 1 unequal).
    TraceEq {
        #[arg(long)]
        alphabet: String,
        /// Dependent pairs, e.g. "a b; b d".
        #[arg(long, default_value = "")]
        dep: String,
        w1: String,
        w2: String,
    },
    /// Distribution given by the cliques of a dependency relation.
    Dist {
        #[arg(long)]
        alphabet: String,
        #[arg(long, default_value = "")]
        dep: String,
    },
    /// Draw a morphism as SVG, or as text with `--text`.
    Render {
        file: PathBuf,
        #[arg(short = 'e', long = "expr")]
        expr: String,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[arg(long)]
        text: bool,
    },
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: Vec<u8>,
}

impl Outcome {
    fn ok(stdout: impl Into<Vec<u8>>) -> Self {
        Self { code: 0, stdout: stdout.into() }
    }

    fn answer(yes: bool, stdout: impl Into<Vec<u8>>) -> Self {
        Self { code: if yes { 0 } else { 1 }, stdout: stdout.into() }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load(path: &Path) -> Result<GraphFile, CliError> {
    parse_graph_file(&read(path)?)
}

fn category(path: &Path) -> Result<FreeCategory, CliError> {
    Ok(FreeCategory::new(load(path)?.impure())?)
}

fn two(exprs: &[String]) -> Result<(&str, &str), CliError> {
    match exprs {
        [a, b] => Ok((a, b)),
        _ => Err(CliError::Usage(format!("expected exactly two expressions, got {}", exprs.len()))),
    }
}

fn line_word(w: &Word) -> String {
    w.iter().map(|o| o.as_str()).collect::<Vec<_>>().join(" ")
}

fn header(label: &str, w: &Word) -> String {
    format!("{label}: {}", line_word(w)).trim_end().to_string()
}

/// Comma-separated words; empty entries are the empty word.
pub fn parse_pool(text: &str) -> Result<Vec<Word>, CliError> {
    text.split(',').map(|w| Word::parse(w).map_err(|e| CliError::Usage(e.to_string()))).collect()
}

/// Symbols separated by commas or whitespace.
pub fn parse_alphabet(text: &str) -> Result<Vec<Symbol>, CliError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<GeneratorId>().map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

/// `"a b; b d"`: pairs separated by `;`, symbols by whitespace or commas.
pub fn parse_dependency(alphabet: &str, dep: &str) -> Result<DependencyRelation, CliError> {
    let symbols = parse_alphabet(alphabet)?;
    let mut pairs = Vec::new();
    for part in dep.split(';') {
        let pair = parse_alphabet(part)?;
        match pair.as_slice() {
            [] => {}
            [a] => pairs.push((a.clone(), a.clone())),
            [a, b] => pairs.push((a.clone(), b.clone())),
            _ => return Err(CliError::Usage(format!("`{}` is not a pair", part.trim()))),
        }
    }
    Ok(DependencyRelation::new(symbols, pairs)?)
}

/// Splits a word on whitespace or commas if it has any, and otherwise
/// matches the longest alphabet symbol at each position.
pub fn parse_trace_word(d: &DependencyRelation, text: &str) -> Result<Vec<Symbol>, CliError> {
    if text.contains(|c: char| c == ',' || c.is_whitespace()) {
        return parse_alphabet(text);
    }
    let mut out = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        let longest = d
            .alphabet()
            .iter()
            .filter(|s| rest.starts_with(s.as_str()))
            .max_by_key(|s| s.as_str().len())
            .ok_or_else(|| CliError::Usage(format!("no symbol of the alphabet starts `{rest}`")))?;
        rest = &rest[longest.as_str().len()..];
        out.push(longest.clone());
    }
    Ok(out)
}

fn foata_line(layers: &[Vec<Symbol>]) -> String {
    layers
        .iter()
        .map(|l| format!("[{}]", l.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" ")))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Check { file } => {
            let g = load(file)?.graph;
            Ok(Outcome::ok(format!(
                "ok: {} objects, {} generators ({} pure), {} devices\n",
                g.impure.objects().len(),
                g.impure.generators().len(),
                g.pure.generators.len(),
                g.impure.devices.len()
            )))
        }
        Command::Nf { file, expr } => {
            let f = parse_morphism_expr(expr, &category(file)?)?;
            let form = f.canonical_form();
            let mut out = header("source", &form.source) + "\n";
            for layer in form.layers() {
                out.push_str("--\n");
                for e in layer {
                    let _ = write!(out, "{} [{} | {}]", e.gen, e.left, e.right);
                    let devices = f.graph().devices_of(&e.gen).expect("known generator");
                    if !devices.is_empty() {
                        let names: Vec<&str> = devices.iter().map(|d| d.as_str()).collect();
                        let _ = write!(out, " @{}", names.join(","));
                    }
                    out.push('\n');
                }
            }
            out.push_str(&header("target", &form.target));
            out.push('\n');
            Ok(Outcome::ok(out))
        }
        Command::Eq { file, exprs } => {
            let (a, b) = two(exprs)?;
            let cat = category(file)?;
            let equal = parse_morphism_expr(a, &cat)?.equals(&parse_morphism_expr(b, &cat)?)?;
            Ok(Outcome::answer(equal, if equal { "equal\n" } else { "unequal\n" }))
        }
        Command::Devices { file, expr } => {
            let f = parse_morphism_expr(expr, &category(file)?)?;
            Ok(Outcome::ok(f.devices_of().iter().map(|d| format!("{d}\n")).collect::<String>()))
        }
        Command::Interfere { file, exprs } => {
            let (a, b) = two(exprs)?;
            let cat = category(file)?;
            let commute = parse_morphism_expr(a, &cat)?.interchanges_with(&parse_morphism_expr(b, &cat)?)?;
            Ok(Outcome::answer(!commute, if commute { "interchange\n" } else { "interfere\n" }))
        }
        Command::Cliques { file, max_events, pool, cap } => {
            let cat = category(file)?;
            let u = interference::underlying_device_graph_bounded(&cat, *max_events, &parse_pool(pool)?, *cap)?;
            let mut out = format!("sample: {} morphisms\n", u.sample().len());
            for (k, m) in u.sample().iter().enumerate() {
                let _ = writeln!(out, "m{k} {m}");
            }
            let _ = writeln!(out, "interference: {} edges", u.interference.edges.len());
            for (k, c) in u.cliques.iter().enumerate() {
                let members: Vec<String> = c.iter().map(|m| format!("m{m}")).collect();
                let _ = writeln!(out, "c{k}: {}", members.join(" "));
            }
            out.push_str("# underlying device graph\n");
            out.push_str(&print_graph_file(&EffectfulGraph::from_device_graph(u.graph))?);
            Ok(Outcome::ok(out))
        }
        Command::Tensor { left, right, output } => {
            let t = tensor::commuting_tensor(&load(left)?.graph, &load(right)?.graph)?;
            let text = print_graph_file(&t.product)?;
            match output {
                Some(path) => {
                    write(path, text.as_bytes())?;
                    Ok(Outcome::ok(""))
                }
                None => Ok(Outcome::ok(text)),
            }
        }
        Command::TraceEq { alphabet, dep, w1, w2 } => {
            let d = parse_dependency(alphabet, dep)?;
            let (u, v) = (parse_trace_word(&d, w1)?, parse_trace_word(&d, w2)?);
            let equal = traces::trace_equal(&d, &u, &v)?;
            let out = format!(
                "{}\nfoata: {}\nfoata: {}\n",
                if equal { "equal" } else { "unequal" },
                foata_line(&traces::foata_nf(&d, &u)?),
                foata_line(&traces::foata_nf(&d, &v)?)
            );
            Ok(Outcome::answer(equal, out))
        }
        Command::Dist { alphabet, dep } => {
            let dist = traces::dependency_to_distribution(&parse_dependency(alphabet, dep)?);
            let g = dist.as_device_graph();
            let names: Vec<&str> = g.devices.iter().map(|d| d.as_str()).collect();
            let mut out = format!("devices: {}", names.join(" ")).trim_end().to_string() + "\n";
            for (s, devs) in &g.dev {
                let names: Vec<&str> = devs.iter().map(|d| d.as_str()).collect();
                out.push_str(format!("{s}: {}", names.join(" ")).trim_end());
                out.push('\n');
            }
            Ok(Outcome::ok(out))
        }
        Command::Render { file, expr, output, text } => {
            let f = parse_morphism_expr(expr, &category(file)?)?;
            let l = render::layout(&f);
            let bytes = if *text { render::render_text(&l).into_bytes() } else { render::render_svg(&l) };
            match output {
                Some(path) => {
                    write(path, &bytes)?;
                    Ok(Outcome::ok(""))
                }
                None => Ok(Outcome::ok(bytes)),
            }
        }
    }
}

/// Parses arguments (the first is the program name) and runs the command.
///
/// Returns the exit code, stdout and stderr.
pub fn run<I, T>(args: I) -> (i32, Vec<u8>, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return if code == 0 { (0, e.to_string().into_bytes(), String::new()) } else { (2, Vec::new(), e.to_string()) };
        }
    };
    match execute(&cli.command) {
        Ok(o) => (o.code, o.stdout, String::new()),
        Err(e) => (2, Vec::new(), format!("error: {e}\n")),
    }
}
