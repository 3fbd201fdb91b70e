//! `oclsql`: checks that a SQL select correctly implements an OCL constraint.
//!
//! Exit status: 0 Correct, 1 Incorrect, 2 Inconclusive, 3 tool error. In
//! oracle mode: 0 when no counterexample is found, 1 otherwise.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Parser, ValueEnum};

use oclsql::datamodel::{load_data_model, load_object_model, DataModel};
use oclsql::prover::{check_all, decide};
use oclsql::relational::{o2s_ddl, o2s_inst_dml};
use oclsql::{
    cross_check, emit_smtlib, CorrectnessProblem, EnumerationBounds, SolverConfig, TheoryKind,
    VarDecl,
};

const TOOL_ERROR: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Emit the theories, run the solver and print the verdict.
    Prove,
    /// Only write the theories to `--emit-dir`.
    Emit,
    /// Cross-check by bounded enumeration, without a solver.
    Oracle,
}

#[derive(Debug, Parser)]
#[command(
    version,
    about = "Prove a SQL select correct against a Boolean OCL constraint"
)]
#[command(group(ArgGroup::new("ocl_src").required(true).args(["ocl", "ocl_inline"])))]
#[command(group(ArgGroup::new("sql_src").required(true).args(["sql", "sql_inline"])))]
struct Cli {
    /// Data model as JSON.
    #[arg(long, value_name = "PATH")]
    data_model: PathBuf,
    /// File holding the OCL constraint.
    #[arg(long, value_name = "PATH")]
    ocl: Option<PathBuf>,
    /// The OCL constraint itself.
    #[arg(long, value_name = "STR")]
    ocl_inline: Option<String>,
    /// File holding the select.
    #[arg(long, value_name = "PATH")]
    sql: Option<PathBuf>,
    /// The select itself.
    #[arg(long, value_name = "STR")]
    sql_inline: Option<String>,
    /// Free variable, `name:Type` or `name:Type?` for a nullable object.
    #[arg(long = "var", value_name = "NAME:TYPE")]
    vars: Vec<String>,
    /// OCL assumption over the free variables.
    #[arg(long = "assume", value_name = "STR")]
    assumptions: Vec<String>,
    /// SMT-LIB2 solver executable, called as `<solver> <file.smt2>`.
    #[arg(long, value_name = "PATH", env = "OCLSQL_SOLVER")]
    solver: Option<PathBuf>,
    /// Per-theory solver time limit.
    #[arg(long, value_name = "SECS", default_value_t = 60)]
    timeout: u64,
    /// Where to write `<case>-<theory>.smt2`.
    #[arg(long, value_name = "DIR")]
    emit_dir: Option<PathBuf>,
    /// Enumeration bounds, e.g. `objects=2; Integer=null,17,19; String=null,a`.
    #[arg(long, value_name = "SPEC")]
    oracle_bounds: Option<String>,
    #[arg(long, value_enum, default_value_t = Mode::Prove)]
    mode: Mode,
    /// Prefix of emitted files; defaults to the OCL file's stem or `case`.
    #[arg(long = "case", value_name = "NAME")]
    case_name: Option<String>,
    /// Also write `schema.sql` (and `data.sql` with `--object-model`) to
    /// `--emit-dir`.
    #[arg(long)]
    emit_sql: bool,
    /// Object model as JSON, for `data.sql`.
    #[arg(long, value_name = "PATH", requires = "emit_sql")]
    object_model: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn source(path: &Option<PathBuf>, inline: &Option<String>) -> Result<String> {
    match (path, inline) {
        (Some(p), _) => read(p),
        (None, Some(s)) => Ok(s.clone()),
        (None, None) => bail!("no input given"),
    }
}

impl Cli {
    fn case_name(&self) -> String {
        self.case_name.clone().unwrap_or_else(|| {
            self.ocl
                .as_ref()
                .and_then(|p| p.file_stem())
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "case".into())
        })
    }

    fn problem(&self, dm: &DataModel) -> Result<CorrectnessProblem> {
        let frees = self
            .vars
            .iter()
            .map(|v| VarDecl::parse(v, dm).with_context(|| format!("in --var {v}")))
            .collect::<Result<Vec<_>>>()?;
        let ocl = source(&self.ocl, &self.ocl_inline)?;
        let sql = source(&self.sql, &self.sql_inline)?;
        Ok(CorrectnessProblem::parse(
            dm.clone(),
            ocl.trim(),
            &self.assumptions,
            &sql,
            frees,
        )?)
    }

    fn emit_sql(&self, dm: &DataModel, dir: &Path) -> Result<()> {
        fs::write(dir.join("schema.sql"), o2s_ddl(dm))?;
        if let Some(p) = &self.object_model {
            let om =
                load_object_model(&read(p)?, dm).with_context(|| format!("in {}", p.display()))?;
            fs::write(dir.join("data.sql"), o2s_inst_dml(&om, dm))?;
        }
        Ok(())
    }
}

/// Writes every theory as `<case>-<kind>.smt2` and returns the paths.
fn emit(p: &CorrectnessProblem, dir: &Path, case: &str) -> Result<Vec<(TheoryKind, PathBuf)>> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut files = Vec::new();
    for (k, t) in p.theories()? {
        let path = dir.join(format!("{case}-{k}.smt2"));
        fs::write(&path, emit_smtlib(&t))
            .with_context(|| format!("cannot write {}", path.display()))?;
        files.push((k, path));
    }
    Ok(files)
}

fn run(cli: &Cli) -> Result<u8> {
    let dm = load_data_model(&read(&cli.data_model)?)
        .with_context(|| format!("in {}", cli.data_model.display()))?;
    let p = cli.problem(&dm)?;
    let case = cli.case_name();
    if cli.emit_sql {
        let Some(dir) = &cli.emit_dir else {
            bail!("--emit-sql needs --emit-dir");
        };
        fs::create_dir_all(dir)?;
        cli.emit_sql(&dm, dir)?;
    }
    match cli.mode {
        Mode::Emit => {
            let Some(dir) = &cli.emit_dir else {
                bail!("emit mode needs --emit-dir");
            };
            for (_, path) in emit(&p, dir, &case)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
        Mode::Prove => {
            let Some(solver) = &cli.solver else {
                bail!("prove mode needs --solver or OCLSQL_SOLVER");
            };
            let cfg = SolverConfig::new(solver).with_timeout(Duration::from_secs(cli.timeout));
            let scratch;
            let dir = match &cli.emit_dir {
                Some(d) => d.as_path(),
                None => {
                    scratch = tempfile::tempdir()?;
                    scratch.path()
                }
            };
            let files = emit(&p, dir, &case)?;
            let mut results = Vec::new();
            for (k, r) in check_all(&cfg, &files) {
                let r = r.with_context(|| format!("while checking {case}-{k}"))?;
                println!("{case}-{k}: {r}");
                results.push((k, r));
            }
            let verdict = decide(&results);
            println!("verdict: {verdict}");
            Ok(verdict.exit_code() as u8)
        }
        Mode::Oracle => {
            let bounds = match &cli.oracle_bounds {
                Some(spec) => EnumerationBounds::parse(spec)?,
                None => EnumerationBounds::default(),
            };
            let report = cross_check(&p, &bounds);
            print!("{report}");
            Ok(if report.agrees_with_correct() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    // clap's own status for usage errors is 2, which means Inconclusive here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { TOOL_ERROR } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(TOOL_ERROR)
        }
    }
}
