//! Running an external SMT-LIB2 solver on emitted theories.

use std::fmt;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::msfol::{emit_smtlib, Theory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverResult {
    Sat,
    Unsat,
    Unknown,
    Timeout,
}

impl fmt::Display for SolverResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverResult::Sat => "SAT",
            SolverResult::Unsat => "UNSAT",
            SolverResult::Unknown => "UNKNOWN",
            SolverResult::Timeout => "TIMEOUT",
        })
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("cannot run solver `{path}`: {source}")]
    Launch { path: PathBuf, source: io::Error },
    #[error("solver `{path}` produced no status line: {output}")]
    Output { path: PathBuf, output: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// How to invoke the solver: `<path> <args..> <file.smt2>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub path: PathBuf,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl SolverConfig {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

    pub fn new(path: impl Into<PathBuf>) -> Self {
        SolverConfig {
            path: path.into(),
            args: Vec::new(),
            timeout: Self::DEFAULT_TIMEOUT,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// The solver named by `OCLSQL_SOLVER`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os("OCLSQL_SOLVER")
            .filter(|p| !p.is_empty())
            .map(Self::new)
    }
}

fn drain(mut r: impl Read + Send + 'static) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    })
}

fn wait(child: &mut Child, timeout: Duration) -> io::Result<bool> {
    let start = Instant::now();
    let mut pause = Duration::from_millis(1);
    loop {
        if child.try_wait()?.is_some() {
            return Ok(true);
        }
        if start.elapsed() >= timeout {
            child.kill()?;
            child.wait()?;
            return Ok(false);
        }
        thread::sleep(pause);
        pause = (pause * 2).min(Duration::from_millis(20));
    }
}

/// Runs the solver on an SMT-LIB2 file. The status is the first non-empty
/// line of its output; the process is killed after `cfg.timeout`.
pub fn check_file(cfg: &SolverConfig, file: &Path) -> Result<SolverResult, SolverError> {
    let mut child = Command::new(&cfg.path)
        .args(&cfg.args)
        .arg(file)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| SolverError::Launch {
            path: cfg.path.clone(),
            source,
        })?;
    let out = drain(child.stdout.take().expect("stdout is piped"));
    let err = drain(child.stderr.take().expect("stderr is piped"));
    if !wait(&mut child, cfg.timeout)? {
        return Ok(SolverResult::Timeout);
    }
    let (out, err) = (
        out.join().unwrap_or_default(),
        err.join().unwrap_or_default(),
    );
    let status = out.lines().find_map(|l| l.split_whitespace().next());
    match status {
        Some("sat") => Ok(SolverResult::Sat),
        Some("unsat") => Ok(SolverResult::Unsat),
        Some("unknown") => Ok(SolverResult::Unknown),
        Some("timeout") => Ok(SolverResult::Timeout),
        _ => Err(SolverError::Output {
            path: cfg.path.clone(),
            output: format!("{}{}", out.trim(), err.trim()),
        }),
    }
}

/// Emits `t` to a temporary file and checks it.
pub fn check(t: &Theory, cfg: &SolverConfig) -> Result<SolverResult, SolverError> {
    let mut f = tempfile::Builder::new().suffix(".smt2").tempfile()?;
    f.write_all(emit_smtlib(t).as_bytes())?;
    f.flush()?;
    check_file(cfg, f.path())
}

/// Checks every file concurrently, one solver process each. Results keep
/// the order of `files`.
pub fn check_all<K: Clone + Send + Sync>(
    cfg: &SolverConfig,
    files: &[(K, PathBuf)],
) -> Vec<(K, Result<SolverResult, SolverError>)> {
    thread::scope(|s| {
        let handles: Vec<_> = files
            .iter()
            .map(|(k, p)| (k.clone(), s.spawn(move || check_file(cfg, p))))
            .collect();
        handles
            .into_iter()
            .map(|(k, h)| (k, h.join().expect("solver thread panicked")))
            .collect()
    })
}
