//! `drumlab` command-line front end.
//!
//! Exit codes: 0 on success, 2 for configuration or usage errors, 3 for
//! numerical failures (including unwritable output).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::basis::{self, BoundaryCondition, MultiIndex};
use crate::config::{ConfigError, ProblemConfig};
use crate::geometry::{self, EffectiveDensity};
use crate::perturbation;
use crate::solver::{self, AssemblyOptions, SpectrumResult};
use crate::weyl;

/// Per-axis order for `Ā` and `L̄`.
pub const GEOMETRY_ORDER: usize = 200;

#[derive(Debug, Parser)]
#[command(name = "drumlab", version, about = "Spectra of inhomogeneous membranes and cavities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Problem description file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory; relative paths are taken from the config file's directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write spectrum_dirichlet.csv and spectrum_neumann.csv.
    Spectrum(Common),
    /// Write weyl.csv with asymptotic eigenvalue estimates.
    Weyl(Common),
    /// Write audit.csv and report the PPW and isoperimetric checks.
    Audit(Common),
    /// Print the perturbation series for one cube state.
    Perturb {
        #[command(flatten)]
        common: Common,
        /// Cube state, e.g. `1,2`.
        #[arg(long, value_name = "N1,N2,...")]
        state: MultiIndex,
        /// Largest index of intermediate states (default 3 × max index).
        #[arg(long)]
        k_cutoff: Option<u32>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Shortest round-trip decimal; exponent form for very small or large magnitudes.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn numeric(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

/// Applies `DRUMLAB_THREADS` (unset or 0: library default, 1: sequential).
pub fn configure_threads() {
    let Ok(value) = std::env::var("DRUMLAB_THREADS") else { return };
    match value.trim().parse::<usize>() {
        Ok(0) | Err(_) => {}
        Ok(1) => faer::set_global_parallelism(faer::Par::Seq),
        Ok(n) => faer::set_global_parallelism(faer::Par::rayon(n)),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "drumlab: {}", e.message());
            e.exit_code()
        }
    }
}

struct Session {
    config: ProblemConfig,
    out_dir: PathBuf,
}

impl Session {
    fn open(common: &Common) -> Result<Self, CliError> {
        let (config, base) = match &common.config {
            Some(path) => {
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (ProblemConfig::load(path)?, base)
            }
            None => (ProblemConfig::default(), PathBuf::new()),
        };
        let out_dir = match &common.out {
            Some(dir) if dir.is_absolute() => dir.clone(),
            Some(dir) => base.join(dir),
            None => base,
        };
        Ok(Self { config, out_dir })
    }

    fn density(&self) -> Result<EffectiveDensity, CliError> {
        Ok(self.config.effective_density()?)
    }

    fn spectrum(&self, s: &EffectiveDensity, bc: BoundaryCondition) -> Result<SpectrumResult, CliError> {
        let spec = self.config.basis(bc)?;
        let options = AssemblyOptions { quadrature_order: self.config.quadrature, ..AssemblyOptions::default() };
        let p = solver::assemble(&spec, s, options).map_err(numeric)?;
        solver::solve_spectrum(&p, p.size()).map_err(numeric)
    }

    /// Default diagnostic range, capped by the reliable count of the
    /// smallest basis in use.
    fn n_range(&self, reliable: usize) -> Result<std::ops::RangeInclusive<usize>, CliError> {
        let range = self.config.n_range(reliable);
        if let Some(max) = self.config.n_max.filter(|&m| m > reliable) {
            return Err(CliError::Numeric(format!(
                "n_max = {max} is beyond the reliable range ({reliable} eigenvalues at cutoff {})",
                self.config.cutoff
            )));
        }
        if range.is_empty() {
            return Err(CliError::Numeric(format!("empty N range {}..={}", range.start(), range.end())));
        }
        Ok(range)
    }

    fn write(&self, name: &str, contents: &str, out: &mut dyn Write) -> Result<(), CliError> {
        if !self.out_dir.as_os_str().is_empty() {
            std::fs::create_dir_all(&self.out_dir)
                .map_err(|e| CliError::Numeric(format!("cannot create {}: {e}", self.out_dir.display())))?;
        }
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display())))?;
        let _ = writeln!(out, "wrote {}", path.display());
        Ok(())
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Spectrum(common) => cmd_spectrum(&Session::open(&common)?, out),
        Command::Weyl(common) => cmd_weyl(&Session::open(&common)?, out),
        Command::Audit(common) => cmd_audit(&Session::open(&common)?, out),
        Command::Perturb { common, state, k_cutoff } => cmd_perturb(&Session::open(&common)?, &state, k_cutoff, out),
    }
}

fn cmd_spectrum(session: &Session, out: &mut dyn Write) -> Result<(), CliError> {
    let s = session.density()?;
    for &bc in &session.config.bcs {
        let r = session.spectrum(&s, bc)?;
        let mut csv = String::from("N,E\n");
        for (i, e) in r.reliable_eigenvalues().iter().enumerate() {
            let _ = writeln!(csv, "{},{}", i + 1, format_number(*e));
        }
        let _ = writeln!(
            out,
            "{bc}: {} states, {} reliable, quadrature {}, density {}",
            r.eigenvalues.len(),
            r.reliable,
            r.quadrature_order,
            r.density_hash
        );
        session.write(&format!("spectrum_{}.csv", bc.name()), &csv, out)?;
    }
    Ok(())
}

fn weighted_area_and_perimeter(s: &EffectiveDensity) -> Result<(f64, Option<f64>), CliError> {
    let abar = geometry::area_integral(s, GEOMETRY_ORDER).map_err(numeric)?;
    let lbar = if s.domain().dimension() == 2 {
        Some(geometry::boundary_integral(s, GEOMETRY_ORDER).map_err(numeric)?)
    } else {
        None
    };
    Ok((abar, lbar))
}

fn cmd_weyl(session: &Session, out: &mut dyn Write) -> Result<(), CliError> {
    let s = session.density()?;
    let domain = *s.domain();
    let (abar, lbar) = weighted_area_and_perimeter(&s)?;
    let reliable = session
        .config
        .bcs
        .iter()
        .map(|&bc| session.config.basis(bc).map(|b| solver::reliable_count(b.size())))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .min()
        .unwrap_or(0);
    let mut csv = String::from("N,E_leading,E_weylsigma_D,E_weylsigma_N,E_conjecture_D,E_conjecture_N\n");
    for n in session.n_range(reliable)? {
        let nf = n as f64;
        let d = weyl::weyl_energy_general(&domain, abar, BoundaryCondition::Dirichlet, nf).map_err(numeric)?;
        let nn = weyl::weyl_energy_general(&domain, abar, BoundaryCondition::Neumann, nf).map_err(numeric)?;
        let _ = write!(
            csv,
            "{n},{},{},{},",
            format_number(d.leading),
            format_number(d.corrected),
            format_number(nn.corrected)
        );
        match lbar {
            Some(lbar) => {
                let cd = weyl::weyl_conjecture_2d(lbar, abar, BoundaryCondition::Dirichlet, nf).map_err(numeric)?;
                let cn = weyl::weyl_conjecture_2d(lbar, abar, BoundaryCondition::Neumann, nf).map_err(numeric)?;
                let _ = writeln!(csv, "{},{}", format_number(cd.corrected), format_number(cn.corrected));
            }
            None => csv.push_str(",\n"),
        }
    }
    let _ = write!(out, "Ā = {abar}");
    if let Some(lbar) = lbar {
        let _ = write!(out, ", L̄ = {lbar}");
    }
    let _ = writeln!(out);
    session.write("weyl.csv", &csv, out)
}

fn cmd_audit(session: &Session, out: &mut dyn Write) -> Result<(), CliError> {
    if session.config.dimension != 2 {
        return Err(CliError::Config(format!("audit needs dimension = 2, got {}", session.config.dimension)));
    }
    let s = session.density()?;
    let (abar, lbar) = weighted_area_and_perimeter(&s)?;
    let lbar = lbar.expect("two-dimensional");
    let rd = session.spectrum(&s, BoundaryCondition::Dirichlet)?;
    let rn = session.spectrum(&s, BoundaryCondition::Neumann)?;
    let mut csv = String::from("N,E_D,E_N,xi,delta,delta_pred_conjecture,delta_pred_weylsigma\n");
    for n in session.n_range(rd.reliable.min(rn.reliable))? {
        let _ = writeln!(
            csv,
            "{n},{},{},{},{},{},{}",
            format_number(rd.eigenvalue(n).map_err(numeric)?),
            format_number(rn.eigenvalue(n).map_err(numeric)?),
            format_number(solver::xi_diagnostic(&rd, &rn, abar, n).map_err(numeric)?),
            format_number(solver::delta_diagnostic(&rd, &rn, n).map_err(numeric)?),
            format_number(solver::delta_prediction_conjecture(lbar, abar, n)),
            format_number(solver::delta_prediction_weylsigma(abar, n)),
        );
    }
    session.write("audit.csv", &csv, out)?;

    let ppw = solver::ppw_audit(&rd).map_err(numeric)?;
    let verdict = if ppw.violates {
        format!("VIOLATES ({:.3} > {:.3}): not a conformal density", ppw.ratio, ppw.bound)
    } else {
        format!("within bound ({:.3} ≤ {:.3})", ppw.ratio, ppw.bound)
    };
    let _ = writeln!(out, "PPW: E2/E1 = {} {verdict}", ppw.ratio);
    let iso = geometry::isoperimetric_check(lbar, abar).map_err(numeric)?;
    let _ = writeln!(
        out,
        "isoperimetric: L̄ = {lbar}, Ā = {abar}, L̄/Ā = {} vs disk {} -> {}",
        iso.ratio,
        iso.circle_ratio,
        if iso.conformal_admissible { "admissible" } else { "NOT admissible as a conformal density" }
    );
    Ok(())
}

fn cmd_perturb(
    session: &Session,
    state: &MultiIndex,
    k_cutoff: Option<u32>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let s = session.density()?;
    let specs = session
        .config
        .bcs
        .iter()
        .map(|&bc| session.config.basis(bc))
        .collect::<Result<Vec<_>, _>>()?;
    for spec in &specs {
        if !spec.contains(state) {
            return Err(CliError::Config(format!(
                "state {state} is not a {} state of dimension {} within cutoff {}",
                spec.bc, spec.domain.dimension(), spec.cutoff
            )));
        }
    }
    for spec in &specs {
        let r = perturbation::perturb_energy(spec, &s, state, k_cutoff).map_err(|e| match e {
            perturbation::PerturbationError::CutoffTooSmall { .. } => CliError::Config(e.to_string()),
            other => numeric(other),
        })?;
        let reference = session.spectrum(&s, spec.bc)?;
        let position = basis::enumerate_states(spec)
            .iter()
            .position(|k| k == state)
            .expect("state checked against the truncation");
        let exact = reference.eigenvalues[position];

        let _ = writeln!(out, "{} state {state} (internal cutoff {})", spec.bc, r.k_cutoff);
        for (k, (e, sum)) in r.orders.iter().zip(&r.partial_sums).enumerate() {
            let _ = writeln!(
                out,
                "  E{k} = {}  partial sum = {}  residual = {}",
                format_number(*e),
                format_number(*sum),
                format_number(sum - exact)
            );
        }
        let _ = writeln!(
            out,
            "  resummed = {}  residual = {}",
            format_number(r.resummed),
            format_number(r.resummed - exact)
        );
        let _ = writeln!(out, "  solver E[{}] = {exact}", position + 1);
        if position >= reference.reliable {
            let _ = writeln!(out, "  note: solver value lies beyond the reliable range");
        }
        if r.degenerate {
            let split: Vec<String> = r.degenerate_split.iter().map(|v| format_number(*v)).collect();
            let _ = writeln!(out, "  degenerate: first-order split = [{}]", split.join(", "));
        }
        for w in &r.warnings {
            let _ = writeln!(out, "  warning: {w}");
        }
    }
    Ok(())
}
