//! Command-line front end. `run` is the whole program minus process exit, so
//! tests can drive it in-process.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use superlin::embedding::g_rank;
use superlin::io::{self, ReportDocument};
use superlin::transform::{conjugate, prune_unobservable, shift_observables};
use superlin::verify::{cosimulate_full, generate_instance, InstanceSpec};
use superlin::{
    classify, minimal_visible_count, realize_minimal_visible, to_reduced_visible_form, validate, Embedding, Error,
    Tolerances,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "superlin", version, about = "Analyse and transform super-linearizations")]
struct Cli {
    /// Singular-value threshold for numerical rank.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Coefficient threshold for polynomial identities.
    #[arg(long = "poly-tol", global = true, default_value_t = 1e-9)]
    poly_tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Output {
    /// Destination file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the defining identities.
    Validate {
        file: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Split observables into visible and hidden.
    Classify {
        file: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Bring to reduced visible form.
    Reduce {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the minimal number of visible observables.
    MinVisible { file: PathBuf },
    /// Construct an embedding with the minimal number of visible observables.
    RealizeMin {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Drop unobservable observables.
    Prune {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Apply an observable change of coordinates or an affine shift.
    Transform {
        file: PathBuf,
        /// JSON matrix file with an invertible m x m matrix.
        #[arg(long, conflicts_with = "shift", required_unless_present = "shift")]
        conjugate: Option<PathBuf>,
        /// JSON file `{"R": [[...]], "S": [...]}`.
        #[arg(long)]
        shift: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Co-simulate the nonlinear and lifted systems.
    Simulate {
        file: PathBuf,
        /// Initial state, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        /// `const:<v>` or `pwc:t0,v0;t1,v1;...`.
        #[arg(long, default_value = "const:0", allow_hyphen_values = true)]
        u: String,
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        /// CSV file for both trajectories.
        #[arg(long)]
        traj: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate a random valid instance with known minimal visible count.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        deg: u32,
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        scramble: bool,
        #[command(flatten)]
        out: Output,
    },
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. } | Error::Shape { .. } | Error::UnknownVersion(_) | Error::Signal(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Domain(e.to_string()),
        }
    }
}

type CliResult = std::result::Result<i32, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Domain(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> std::result::Result<Embedding, Failure> {
    let text = read(path)?;
    io::parse_system(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(l: &Embedding, out: &Output, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let text = io::emit_system(l);
    match &out.out {
        Some(path) => write(path, &text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Domain(e.to_string())),
    }
}

fn report(path: &Option<PathBuf>, doc: ReportDocument) -> std::result::Result<(), Failure> {
    match path {
        Some(p) => write(p, &doc.to_json()),
        None => Ok(()),
    }
}

fn list(idx: &[usize]) -> String {
    let items: Vec<String> = idx.iter().map(usize::to_string).collect();
    format!("[{}]", items.join(","))
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(|e| Failure::Domain(e.to_string()))?
    };
}

fn execute(cli: Cli, out: &mut dyn Write) -> CliResult {
    let tol = Tolerances {
        rank: cli.tol,
        poly: cli.poly_tol,
    };
    match cli.command {
        Command::Validate { file, report: rep } => {
            let l = load(&file)?;
            let r = validate(&l, &tol);
            for c in &r.checks {
                let status = if c.passed { "pass" } else { "FAIL" };
                if c.residual.is_finite() {
                    say!(out, "{}: {status} (residual {:.3e})", c.name, c.residual);
                } else {
                    say!(out, "{}: {status}", c.name);
                }
                if !c.passed && !c.detail.is_empty() {
                    say!(out, "  {}", c.detail);
                }
            }
            say!(out, "{}", if r.passed() { "valid" } else { "invalid" });
            report(&rep, ReportDocument::validation(&r))?;
            Ok(if r.passed() { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Classify { file, report: rep } => {
            let l = load(&file)?;
            let c = classify(&l, &tol);
            let rank = g_rank(&l, &tol);
            say!(out, "visible={}", list(&c.visible));
            say!(out, "hidden={}", list(&c.hidden));
            say!(out, "m_v={} m_h={} rank_G={rank}", c.m_v(), c.m_h());
            report(&rep, ReportDocument::classification(&c, rank))?;
            Ok(EXIT_OK)
        }
        Command::Reduce {
            file,
            out: dest,
            report: rep,
        } => {
            let l = load(&file)?;
            let (reduced, r) = to_reduced_visible_form(&l, &tol)?;
            emit(&reduced, &dest, out)?;
            report(&rep, ReportDocument::reduction(&r))?;
            Ok(EXIT_OK)
        }
        Command::MinVisible { file } => {
            let l = load(&file)?;
            say!(out, "{}", minimal_visible_count(&l, &tol)?);
            Ok(EXIT_OK)
        }
        Command::RealizeMin { file, out: dest } => {
            let l = load(&file)?;
            emit(&realize_minimal_visible(&l, &tol)?, &dest, out)?;
            Ok(EXIT_OK)
        }
        Command::Prune { file, out: dest } => {
            let l = load(&file)?;
            emit(&prune_unobservable(&l, &tol)?, &dest, out)?;
            Ok(EXIT_OK)
        }
        Command::Transform {
            file,
            conjugate: p_file,
            shift,
            out: dest,
        } => {
            let l = load(&file)?;
            let t = match (p_file, shift) {
                (Some(p), _) => conjugate(&l, &io::parse_matrix(&read(&p)?, "P")?, &tol)?,
                (None, Some(s)) => {
                    let (r, s) = io::parse_shift(&read(&s)?, l.n(), l.m_obs())?;
                    shift_observables(&l, &r, &s)?
                }
                (None, None) => return Err(Failure::Usage("one of --conjugate or --shift is required".into())),
            };
            emit(&t, &dest, out)?;
            Ok(EXIT_OK)
        }
        Command::Simulate {
            file,
            x0,
            u,
            horizon,
            h,
            traj,
            report: rep,
        } => {
            let l = load(&file)?;
            let x0 = io::parse_vector(&x0)?;
            let u = io::parse_control(&u)?;
            let sim = cosimulate_full(&l, &x0, &u, horizon, h)?;
            let r = &sim.report;
            say!(out, "max_state_gap={:.3e}", r.max_state_gap);
            say!(out, "max_gp_gap={:.3e}", r.max_gp_gap);
            if let Some(t) = r.truncated_at {
                say!(out, "truncated_at={t}");
            }
            if let Some(path) = traj {
                write(&path, &io::trajectory_csv(&sim.nonlinear, Some(&sim.lifted)))?;
            }
            report(&rep, ReportDocument::cosimulation(r))?;
            Ok(EXIT_OK)
        }
        Command::Gen {
            seed,
            nx,
            ny,
            m,
            deg,
            rank,
            scramble,
            out: dest,
        } => {
            let spec = InstanceSpec {
                n_x: nx,
                n_y: ny,
                m,
                degree_max: deg,
                target_rank: rank,
                scramble,
            };
            let g = generate_instance::<f64>(&spec, seed)?;
            emit(&g.embedding, &dest, out)?;
            if dest.out.is_some() {
                say!(out, "true_m_v_star={}", g.true_m_v_star);
            }
            Ok(EXIT_OK)
        }
    }
}

/// Runs the program on `argv` (including the program name) and returns the
/// process exit code: 0 success, 1 invalid input system or domain error,
/// 2 usage or parse error.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}
