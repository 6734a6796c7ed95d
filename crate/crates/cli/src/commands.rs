use std::fs;
use std::io::Write;
use std::path::Path;

use decoherence_core::{
    coefficients_integral, markov_decay, markov_shift, run_oracle, solve_modes, states::concurrence_from_modes,
    Coefficients, EcsKind, EcsState, MarkovConstants, OracleReport, PhaseBranch,
};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, SweepCommand};
use crate::csv::{format_number, Table};
use crate::error::{CliError, Result};

/// Largest admissible oracle trace distance.
pub const VERIFY_TOLERANCE: f64 = 1e-3;

/// Decay coefficients and frequency shifts next to their Markov constants.
pub fn coeffs_table(c: &RunConfig) -> Result<Table> {
    let (sys, env, grid) = (c.system()?, c.spectral()?, c.grid()?);
    let modes = solve_modes(&sys, &env, &grid)?;
    let track = coefficients_integral(&sys, &env, &modes)?;
    let gamma_markov = markov_decay(&env, sys.omega0)?;
    let shift_markov = markov_shift(&env, sys.omega0)?;
    let pick = |f: fn(&Coefficients) -> f64| track.samples().iter().map(f).collect::<Vec<_>>();
    let n = grid.count();
    Ok(Table::new()
        .column("t", grid.times().collect())
        .column("gamma", pick(|k| k.gamma))
        .column("gamma_cross", pick(|k| k.gamma_cross))
        .column("omega_shifted", pick(|k| k.omega_shifted))
        .column("omega_cross", pick(|k| k.omega_cross))
        .column("delta_omega", pick(|k| k.shift))
        .column("gamma_markov", vec![gamma_markov; n])
        .column("delta_omega_markov", vec![shift_markov; n]))
}

/// The other member of the same family (`psi_minus` for `psi_plus` and so on).
pub fn companion_kind(kind: EcsKind) -> EcsKind {
    match kind {
        EcsKind::PsiPlus => EcsKind::PsiMinus,
        EcsKind::PsiMinus => EcsKind::PsiPlus,
        EcsKind::PhiPlus => EcsKind::PhiMinus,
        EcsKind::PhiMinus => EcsKind::PhiPlus,
    }
}

/// Non-Markovian and Markov concurrence tracks.
pub fn concurrence_table(c: &RunConfig) -> Result<Table> {
    let (sys, env, grid) = (c.system()?, c.spectral()?, c.grid()?);
    let exact = solve_modes(&sys, &env, &grid)?;
    let markov = MarkovConstants::new(&env, sys.omega0)?.amplitudes(&sys, &grid)?;
    let s = c.state()?;
    let mut table = Table::new()
        .column("t", grid.times().collect())
        .column("C_nonmarkov", concurrence_from_modes(&s, &exact)?)
        .column("C_markov", concurrence_from_modes(&s, &markov)?);
    if c.outputs.companion {
        let other = EcsState::new(companion_kind(c.kind), c.alpha)?;
        table = table
            .column(format!("C_nonmarkov_{}", other.kind), concurrence_from_modes(&other, &exact)?)
            .column(format!("C_markov_{}", other.kind), concurrence_from_modes(&other, &markov)?);
    }
    Ok(table)
}

/// Writes `bytes` to `path`, or to `out` when `path` is `-`.
pub fn emit(path: &Path, bytes: &str, out: &mut dyn Write) -> Result<()> {
    if path == Path::new("-") {
        return out.write_all(bytes.as_bytes()).map_err(|e| CliError::io("<stdout>", e));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn cmd_coeffs(c: &RunConfig, path: &Path, out: &mut dyn Write) -> Result<()> {
    let table = coeffs_table(c)?;
    emit(path, &table.render()?, out)?;
    report_written(path, table.rows(), out)
}

pub fn cmd_concurrence(c: &RunConfig, path: &Path, out: &mut dyn Write) -> Result<()> {
    let table = concurrence_table(c)?;
    emit(path, &table.render()?, out)?;
    report_written(path, table.rows(), out)
}

fn report_written(path: &Path, rows: usize, out: &mut dyn Write) -> Result<()> {
    if path != Path::new("-") {
        writeln!(out, "wrote {rows} rows to {}", path.display()).map_err(|e| CliError::io("<stdout>", e))?;
    }
    Ok(())
}

/// The `(kind, lambda)` pairs whose branch actually decays.
pub fn decaying_combinations() -> [(EcsKind, PhaseBranch); 4] {
    [
        (EcsKind::PhiPlus, PhaseBranch::InPhase),
        (EcsKind::PhiMinus, PhaseBranch::InPhase),
        (EcsKind::PsiPlus, PhaseBranch::OutOfPhase),
        (EcsKind::PsiMinus, PhaseBranch::OutOfPhase),
    ]
}

/// Runs the Fock-space oracle for each decaying combination.
pub fn verify_reports(c: &RunConfig, negate_gamma: bool, pool: &rayon::ThreadPool) -> Result<Vec<OracleReport>> {
    let env = c.spectral()?;
    let settings = c.oracle_settings();
    pool.install(|| {
        decaying_combinations()
            .par_iter()
            .map(|&(kind, lambda)| {
                let sys = RunConfig { lambda, ..c.clone() }.system()?;
                let s = EcsState::new(kind, c.alpha)?;
                let tamper = |k: Coefficients| {
                    if negate_gamma {
                        Coefficients { gamma: -k.gamma, gamma_cross: -k.gamma_cross, ..k }
                    } else {
                        k
                    }
                };
                Ok(run_oracle(&s, &sys, &env, &settings, tamper)?)
            })
            .collect()
    })
}

pub fn cmd_verify(c: &RunConfig, negate_gamma: bool, pool: &rayon::ThreadPool, out: &mut dyn Write) -> Result<()> {
    let reports = verify_reports(c, negate_gamma, pool)?;
    let io = |e| CliError::io("<stdout>", e);
    let mut failed = 0;
    for r in &reports {
        let ok = r.max_distance() <= VERIFY_TOLERANCE;
        failed += usize::from(!ok);
        writeln!(
            out,
            "{:<9} lambda={} max_distance={} final_distance={} min_eigenvalue={} {}",
            r.kind.name(),
            r.lambda,
            format_number(r.max_distance()),
            format_number(r.final_distance()),
            format_number(r.min_eigenvalue),
            if ok { "PASS" } else { "FAIL" }
        )
        .map_err(io)?;
    }
    let total = reports.len();
    if failed > 0 {
        writeln!(out, "FAIL: {failed} of {total} combinations exceed {VERIFY_TOLERANCE:e}").map_err(io)?;
        return Err(CliError::Verification(format!("{failed} of {total} oracle comparisons exceed the tolerance")));
    }
    writeln!(out, "PASS: {total} combinations within {VERIFY_TOLERANCE:e}").map_err(io)
}

/// One manifest line: file, content hash, regenerating command.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub command: String,
}

impl ManifestEntry {
    pub fn line(&self) -> String {
        format!("{}\tsha256={}\t{}", self.file, self.sha256, self.command)
    }
}

pub fn cmd_sweep(c: &RunConfig, dir: &Path, pool: &rayon::ThreadPool, out: &mut dyn Write) -> Result<()> {
    let spec = c.sweep.as_ref().ok_or_else(|| CliError::Config("no [sweep] section in the configuration".into()))?;
    let points = spec.points(c);
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let entries: Vec<ManifestEntry> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let table = match spec.command {
                    SweepCommand::Coeffs => coeffs_table(&p.config)?,
                    SweepCommand::Concurrence => concurrence_table(&p.config)?,
                };
                let bytes = table.render()?;
                let file = p.file_name(i);
                let path = dir.join(&file);
                fs::write(&path, &bytes).map_err(|e| CliError::io(&path, e))?;
                Ok(ManifestEntry {
                    file,
                    sha256: hex::encode(Sha256::digest(bytes.as_bytes())),
                    command: p.config.command_line(spec.command),
                })
            })
            .collect::<Result<_>>()
    })?;
    let manifest: String = entries.iter().map(|e| e.line() + "\n").collect();
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest).map_err(|e| CliError::io(&path, e))?;
    writeln!(out, "wrote {} runs and {}", entries.len(), path.display()).map_err(|e| CliError::io("<stdout>", e))
}
