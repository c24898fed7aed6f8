//! Command-line driver for the CSM toolchain.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use csm::analyze::{self, DEFAULT_BUDGET};
use csm::ast::{ModuleAst, SystemAst};
use csm::automaton::SystemConfig;
use csm::check::{check_instantiation, check_module};
use csm::diag::{has_errors, Diagnostic};
use csm::expand::{convenience_system, expand_system};
use csm::parser::{parse_library, parse_system};
use csm::signal::{SignalId, Valuation};
use csm::stdlib;

#[derive(Parser)]
#[command(name = "csm", version, about = "Compiler and analyzer for concurrent-state-machine libraries")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and semantically check library or system files.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Expand a module or a whole system to a flat automaton listing.
    Expand(ExpandArgs),
    /// Shorthand for `expand --format dot`.
    Dot(ExpandArgs),
    /// Run a deterministic simulation of a system over an input trace.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        /// One line per step: comma-separated asserted external signals;
        /// a blank line is the empty input set.
        #[arg(long)]
        trace: PathBuf,
        /// Additional library files beyond the builtins.
        files: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Bounded exhaustive exploration over all input subsets.
    Explore {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        files: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report jointly satisfiable guard pairs of an expanded module.
    Determinism {
        file: PathBuf,
        #[arg(long)]
        module: String,
        #[arg(long = "bind", value_name = "NAME=INT")]
        bindings: Vec<String>,
    },
}

#[derive(Args)]
struct ExpandArgs {
    /// Library file holding the module (convenience mode).
    file: Option<PathBuf>,
    /// Additional library files beyond the builtins.
    extra: Vec<PathBuf>,
    /// Expand a full system file instead of a single module.
    #[arg(long, conflicts_with_all = ["module", "bindings", "instance", "signals"])]
    system: Option<PathBuf>,
    #[arg(long)]
    module: Option<String>,
    #[arg(long = "bind", value_name = "NAME=INT")]
    bindings: Vec<String>,
    /// Instance name for the generated instantiation.
    #[arg(long = "as")]
    instance: Option<String>,
    /// Actual signal names; auto-generated from the formals when omitted.
    #[arg(long, value_delimiter = ',')]
    signals: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = Format::Flat)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Flat,
    Dot,
}

/// Diagnostics found: print them and report exit code 1.
struct Findings(Vec<(String, Vec<Diagnostic>)>);

impl Findings {
    fn print(&self) {
        for (file, diags) in &self.0 {
            for d in diags {
                eprintln!("{}", d.render(file));
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(findings)) => {
            findings.print();
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<Result<(), Findings>> {
    match cli.cmd {
        Cmd::Check { files } => cmd_check(&files),
        Cmd::Expand(args) => cmd_expand(args, None),
        Cmd::Dot(args) => cmd_expand(args, Some(Format::Dot)),
        Cmd::Simulate { system, trace, files, output } => cmd_simulate(&system, &trace, &files, output.as_deref()),
        Cmd::Explore { system, depth, budget, files, output } => {
            cmd_explore(&system, depth, budget, &files, output.as_deref())
        }
        Cmd::Determinism { file, module, bindings } => cmd_determinism(&file, &module, &bindings),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_out(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn parse_bindings(bindings: &[String]) -> Result<BTreeMap<String, i64>> {
    let mut out = BTreeMap::new();
    for b in bindings {
        let (name, value) = b
            .split_once('=')
            .ok_or_else(|| anyhow!("--bind expects NAME=INT, got `{}`", b))?;
        let value: i64 = value.parse().map_err(|_| anyhow!("--bind value in `{}` is not an integer", b))?;
        if value < 0 {
            bail!("--bind value in `{}` must be non-negative", b);
        }
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

/// Parse and check a library file, separating hard diagnostics from an
/// empty result.
fn load_library_file(path: &Path) -> Result<(Vec<ModuleAst>, Vec<Diagnostic>)> {
    let text = read(path)?;
    match parse_library(&text) {
        Ok(modules) => {
            let mut diags = Vec::new();
            for m in &modules {
                diags.extend(check_module(m));
            }
            Ok((modules, diags))
        }
        Err(diags) => Ok((Vec::new(), diags)),
    }
}

/// The builtin modules plus any user-supplied library files. User modules
/// shadow builtins of the same name.
fn load_full_library(extra: &[PathBuf], findings: &mut Vec<(String, Vec<Diagnostic>)>) -> Result<Vec<ModuleAst>> {
    let mut lib = Vec::new();
    for path in extra {
        let (modules, diags) = load_library_file(path)?;
        if !diags.is_empty() {
            findings.push((path.display().to_string(), diags));
        }
        lib.extend(modules);
    }
    for m in stdlib::builtin_library() {
        if !lib.iter().any(|x: &ModuleAst| x.name == m.name) {
            lib.push(m);
        }
    }
    Ok(lib)
}

fn cmd_check(files: &[PathBuf]) -> Result<Result<(), Findings>> {
    let mut findings = Vec::new();
    for path in files {
        let text = read(path)?;
        // system files start with SYSTEM; everything else is a library
        let diags = if text.trim_start().starts_with("SYSTEM") {
            match parse_system(&text) {
                Ok(sys) => {
                    let mut lib_findings = Vec::new();
                    let lib = load_full_library(&[], &mut lib_findings)?;
                    check_instantiation(&sys, &lib)
                }
                Err(diags) => diags,
            }
        } else {
            match parse_library(&text) {
                Ok(modules) => modules.iter().flat_map(check_module).collect(),
                Err(diags) => diags,
            }
        };
        if !diags.is_empty() {
            findings.push((path.display().to_string(), diags));
        }
    }
    if findings.iter().any(|(_, ds)| has_errors(ds)) {
        return Ok(Err(Findings(findings)));
    }
    // warnings are shown but do not fail the run
    Findings(findings).print();
    Ok(Ok(()))
}

/// Build the system to analyze: either a .csms file against the library,
/// or a synthetic single-module instantiation.
fn build_system(sys: &SystemAst, lib: &[ModuleAst], file: &str) -> Result<Result<SystemConfig, Findings>> {
    let diags = check_instantiation(sys, lib);
    if has_errors(&diags) {
        return Ok(Err(Findings(vec![(file.to_string(), diags)])));
    }
    match expand_system(sys, lib) {
        Ok(config) => Ok(Ok(config)),
        Err(diags) => Ok(Err(Findings(vec![(file.to_string(), diags)]))),
    }
}

fn load_system(
    path: &Path,
    extra: &[PathBuf],
) -> Result<Result<SystemConfig, Findings>> {
    let mut findings = Vec::new();
    let lib = load_full_library(extra, &mut findings)?;
    if findings.iter().any(|(_, ds)| has_errors(ds)) {
        return Ok(Err(Findings(findings)));
    }
    let text = read(path)?;
    let sys = match parse_system(&text) {
        Ok(sys) => sys,
        Err(diags) => return Ok(Err(Findings(vec![(path.display().to_string(), diags)]))),
    };
    build_system(&sys, &lib, &path.display().to_string())
}

fn convenience_config(
    file: Option<&Path>,
    extra: &[PathBuf],
    module: &str,
    bindings: &[String],
    instance: Option<&str>,
    signals: Option<&[String]>,
) -> Result<Result<SystemConfig, Findings>> {
    let mut findings = Vec::new();
    let mut paths: Vec<PathBuf> = file.map(|p| vec![p.to_path_buf()]).unwrap_or_default();
    paths.extend(extra.iter().cloned());
    let lib = load_full_library(&paths, &mut findings)?;
    if findings.iter().any(|(_, ds)| has_errors(ds)) {
        return Ok(Err(Findings(findings)));
    }
    let m = lib
        .iter()
        .find(|m| m.name == module)
        .ok_or_else(|| anyhow!("module `{}` not found in the given files or builtins", module))?;
    let numeric = parse_bindings(bindings)?;
    let signals: Option<Vec<SignalId>> = match signals {
        None => None,
        Some(names) => Some(
            names
                .iter()
                .map(|n| SignalId::parse(n).map_err(|d| anyhow!("bad --signals entry: {}", d.message)))
                .collect::<Result<_>>()?,
        ),
    };
    let instance = instance.unwrap_or(module);
    let sys = match convenience_system(m, &numeric, instance, signals.as_deref()) {
        Ok(sys) => sys,
        Err(d) => return Ok(Err(Findings(vec![("<cli>".to_string(), vec![d])]))),
    };
    build_system(&sys, &lib, "<cli>")
}

fn cmd_expand(args: ExpandArgs, force: Option<Format>) -> Result<Result<(), Findings>> {
    let format = force.unwrap_or(args.format);
    let config = if let Some(system) = &args.system {
        let mut extra = args.extra.clone();
        if let Some(f) = &args.file {
            extra.insert(0, f.clone());
        }
        load_system(system, &extra)?
    } else {
        let module = args
            .module
            .as_deref()
            .ok_or_else(|| anyhow!("either --module or --system is required"))?;
        let file = args.file.as_deref();
        convenience_config(
            file,
            &args.extra,
            module,
            &args.bindings,
            args.instance.as_deref(),
            args.signals.as_deref(),
        )?
    };
    let config = match config {
        Ok(c) => c,
        Err(f) => return Ok(Err(f)),
    };
    let text = match format {
        Format::Flat => analyze::emit_flat(&config),
        Format::Dot => analyze::emit_dot(&config),
    };
    write_out(args.output.as_deref(), &text)?;
    Ok(Ok(()))
}

fn parse_trace(path: &Path) -> Result<Vec<Valuation>> {
    let text = read(path)?;
    let mut trace = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        let mut v = Valuation::new();
        if !line.is_empty() {
            for part in line.split(',') {
                let s = SignalId::parse(part.trim())
                    .map_err(|d| anyhow!("{}:{}: {}", path.display(), lineno + 1, d.message))?;
                v.insert(s);
            }
        }
        trace.push(v);
    }
    Ok(trace)
}

fn cmd_simulate(
    system: &Path,
    trace: &Path,
    files: &[PathBuf],
    output: Option<&Path>,
) -> Result<Result<(), Findings>> {
    let config = match load_system(system, files)? {
        Ok(c) => c,
        Err(f) => return Ok(Err(f)),
    };
    let inputs = parse_trace(trace)?;
    let results = match analyze::simulate(&config, &inputs) {
        Ok(r) => r,
        Err(d) => return Ok(Err(Findings(vec![(system.display().to_string(), vec![d])]))),
    };
    let mut out = String::new();
    for (i, r) in results.iter().enumerate() {
        let emitted: Vec<String> = r.emitted.iter().map(|s| s.to_string()).collect();
        out.push_str(&format!("STEP {}: {} emits {{{}}}\n", i + 1, r.next, emitted.join(", ")));
    }
    write_out(output, &out)?;
    Ok(Ok(()))
}

fn cmd_explore(
    system: &Path,
    depth: u32,
    budget: usize,
    files: &[PathBuf],
    output: Option<&Path>,
) -> Result<Result<(), Findings>> {
    let config = match load_system(system, files)? {
        Ok(c) => c,
        Err(f) => return Ok(Err(f)),
    };
    let graph = match analyze::explore(&config, depth, budget) {
        Ok(g) => g,
        Err(d) => return Ok(Err(Findings(vec![(system.display().to_string(), vec![d])]))),
    };
    write_out(output, &analyze::render_reach(&graph))?;
    Ok(Ok(()))
}

fn cmd_determinism(file: &Path, module: &str, bindings: &[String]) -> Result<Result<(), Findings>> {
    let config = match convenience_config(Some(file), &[], module, bindings, None, None)? {
        Ok(c) => c,
        Err(f) => return Ok(Err(f)),
    };
    let mut clean = true;
    for a in &config.automata {
        let report = match analyze::check_determinism(a) {
            Ok(r) => r,
            Err(d) => return Ok(Err(Findings(vec![(file.display().to_string(), vec![d])]))),
        };
        for o in &report.overlaps {
            clean = false;
            let (t1, t2) = (&a.transitions[o.first], &a.transitions[o.second]);
            println!(
                "OVERLAP {} {}: --{{ {} }}--> {} vs --{{ {} }}--> {} witness {}",
                a.name, o.state, t1.guard, t1.target, t2.guard, t2.target, o.witness
            );
        }
    }
    if clean {
        Ok(Ok(()))
    } else {
        Ok(Err(Findings(Vec::new())))
    }
}
