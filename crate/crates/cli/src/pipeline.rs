//! Command implementations. Every stage writes its artifacts under the
//! output directory and returns check rows for the summary report; all
//! floating-point output uses 17 significant digits so identical runs are
//! byte-identical.

use std::path::{Path, PathBuf};

use hodgemax::io::fmt_f64;
use hodgemax::linalg::SubspaceProjector;
use hodgemax::maxwell::{k_sigma_matrix, v_rho1_weights};
use hodgemax::sampling::{random_cochain, random_constrained, rng_for};
use hodgemax::*;
use num_complex::Complex64;

use crate::config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(hodgemax::Error),
}

impl From<hodgemax::Error> for CliError {
    fn from(e: hodgemax::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn code(&self) -> &str {
        match self {
            CliError::Config(_) => "config",
            CliError::Core(e) => e.code(),
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub struct Session {
    pub config: RunConfig,
    pub quiet: bool,
    pub complex: SimplicialComplex,
    pub caches: SpectralCacheSet,
}

impl Session {
    pub fn open(config: RunConfig, quiet: bool) -> CliResult<Self> {
        let complex = config.mesh.build()?;
        let caches = SpectralCacheSet::build_with_tol(&complex, config.harmonic_tol)?;
        Ok(Session {
            config,
            quiet,
            complex,
            caches,
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.out
    }

    fn note(&self, msg: &str) {
        if !self.quiet {
            println!("{msg}");
        }
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(hodgemax::Error::Io)?;
    }
    std::fs::write(path, text).map_err(hodgemax::Error::Io)?;
    Ok(())
}

fn rows_csv(rows: &[CheckRow]) -> String {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    let mut out = String::from("name,statistic,threshold,pass\n");
    for r in sorted {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.name,
            fmt_f64(r.statistic),
            fmt_f64(r.threshold),
            r.passed
        ));
    }
    out
}

fn upper(name: &str, statistic: f64, threshold: f64) -> CheckRow {
    CheckRow {
        name: name.to_string(),
        statistic,
        threshold,
        passed: statistic <= threshold,
    }
}

fn lower(name: &str, statistic: f64, threshold: f64) -> CheckRow {
    CheckRow {
        name: name.to_string(),
        statistic,
        threshold,
        passed: statistic >= threshold,
    }
}

// ----------------------------------------------------------------------
// mesh-gen
// ----------------------------------------------------------------------

pub fn cmd_mesh_gen(config: &RunConfig, quiet: bool) -> CliResult<Vec<CheckRow>> {
    let complex = config.mesh.build()?;
    let report = complex.validate();
    let mesh_path = config.out.join("mesh.json");
    write_text(&mesh_path, &complex.to_json())?;
    let rows: Vec<CheckRow> = report
        .checks
        .iter()
        .map(|c| CheckRow {
            name: format!("mesh/{}", c.name),
            statistic: c.worst,
            threshold: 0.0,
            passed: c.passed,
        })
        .collect();
    write_text(&config.out.join("validation.csv"), &rows_csv(&rows))?;
    if !quiet {
        println!(
            "mesh {}: dim={} simplices={:?} euler={} -> {}",
            complex.meta(),
            complex.dim(),
            (0..=complex.dim()).map(|k| complex.num_simplices(k)).collect::<Vec<_>>(),
            complex.euler_characteristic(),
            mesh_path.display()
        );
    }
    Ok(rows)
}

// ----------------------------------------------------------------------
// betti
// ----------------------------------------------------------------------

pub fn cmd_betti(session: &Session, print_csv: bool) -> CliResult<Vec<CheckRow>> {
    let mut csv = String::from("k,b_k,smallest_nonzero_eigenvalue\n");
    for k in 0..=session.complex.dim() {
        let cache = session.caches.get(k)?;
        csv.push_str(&format!(
            "{},{},{}\n",
            k,
            cache.betti(),
            fmt_f64(cache.smallest_nonzero_eigenvalue().unwrap_or(f64::NAN))
        ));
    }
    if print_csv {
        print!("{csv}");
    }
    write_text(&session.out_dir().join("betti.csv"), &csv)?;

    // Euler-Poincare and harmonicity of the kernel basis
    let betti = session.caches.betti_numbers();
    let alternating: i64 = betti
        .iter()
        .enumerate()
        .map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) })
        .sum();
    let euler_defect = (alternating - session.complex.euler_characteristic()).unsigned_abs() as f64;
    let mut harmonic_defect = 0.0f64;
    for k in 0..=session.complex.dim() {
        let cache = session.caches.get(k)?;
        for i in 0..cache.len() {
            if !cache.is_harmonic_mode(i) {
                continue;
            }
            let g = cache.eigencochain(i);
            let mut total = 0.0;
            if k < session.complex.dim() {
                total += session.complex.norm_l2(&session.complex.d(&g)?)?;
            }
            if k > 0 {
                total += session.complex.norm_l2(&session.complex.delta(&g)?)?;
            }
            harmonic_defect = harmonic_defect.max(total);
        }
    }
    Ok(vec![
        upper("hodge/euler_poincare_defect", euler_defect, 0.0),
        upper("hodge/harmonic_closed_coclosed", harmonic_defect, 1e-8),
    ])
}

// ----------------------------------------------------------------------
// decompose
// ----------------------------------------------------------------------

pub fn cmd_decompose(session: &Session) -> CliResult<Vec<CheckRow>> {
    let mut rng = rng_for(session.config.seed, "cli-decompose");
    let omega = random_cochain(&session.complex, 1, &mut rng);
    let split = hodge_decompose(&session.complex, &session.caches, &omega)?;
    let dir = session.out_dir().join("decompose");
    write_text(&dir.join("omega.csv"), &omega.to_csv())?;
    write_text(&dir.join("exact.csv"), &split.exact.to_csv())?;
    write_text(&dir.join("coexact.csv"), &split.coexact.to_csv())?;
    write_text(&dir.join("harmonic.csv"), &split.harmonic.to_csv())?;

    let norm = session.complex.norm_l2(&omega)?;
    let rec = split.reconstruct()?;
    let reconstruction = session.complex.norm_l2(&rec.sub(&omega)?)? / norm;
    let cache1 = session.caches.get(1)?;
    let mut orthogonality = 0.0f64;
    for &s in &session.config.sobolev_grid {
        let ww = inner_sobolev(cache1, &omega, &omega, s)?.re;
        for (a, b) in [
            (&split.exact, &split.coexact),
            (&split.exact, &split.harmonic),
            (&split.coexact, &split.harmonic),
        ] {
            orthogonality = orthogonality.max(inner_sobolev(cache1, a, b, s)?.norm() / ww);
        }
    }
    let rows = vec![
        upper("decompose/reconstruction", reconstruction, 1e-10),
        upper("decompose/h_s_orthogonality", orthogonality, 1e-10),
    ];
    write_text(&dir.join("report.csv"), &rows_csv(&rows))?;
    session.note(&format!("decomposition written to {}", dir.display()));
    Ok(rows)
}

// ----------------------------------------------------------------------
// gauge-fix
// ----------------------------------------------------------------------

pub fn constraint_report_csv(report: &ConstraintReport) -> String {
    let mut out = String::from("name,value\n");
    for (name, value) in report.rows() {
        out.push_str(&format!("{},{}\n", name, fmt_f64(value)));
    }
    out.push_str(&format!("radiation_ok,{}\n", report.radiation_ok));
    out.push_str(&format!("tolerance,{}\n", fmt_f64(report.tol)));
    out
}

pub fn cmd_gauge_fix(
    session: &Session,
    input: Option<&Path>,
    print_csv: bool,
) -> CliResult<Vec<CheckRow>> {
    let cache0 = session.caches.get(0)?;
    let dir = session.out_dir().join("gauge");
    let f = match input {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(hodgemax::Error::Io)?;
            MaxwellData::from_file_string(&session.complex, &text)?
        }
        None => {
            let mut rng = rng_for(session.config.seed, "cli-gauge");
            let f = random_constrained(&session.complex, cache0, &mut rng);
            write_text(&dir.join("input.mxw"), &f.to_file_string())?;
            f
        }
    };

    let norm = norm_v1(&session.complex, &f)?.max(1.0);
    let (fixed, gauge) = gauge_fix(&session.complex, cache0, &f)?;
    write_text(&dir.join("fixed.mxw"), &fixed.to_file_string())?;
    write_text(&dir.join("gauge_a.csv"), &gauge.a.to_csv())?;
    write_text(&dir.join("gauge_pi.csv"), &gauge.pi.to_csv())?;

    let report = check_constraints(&session.complex, &fixed, 1e-8 * norm)?;
    let report_csv = constraint_report_csv(&report);
    if print_csv {
        print!("{report_csv}");
    }
    write_text(&dir.join("constraint_report.csv"), &report_csv)?;

    let coulomb = coulomb_projector(&session.complex, cache0)?;
    let tf = t_sigma(&session.complex, &f, &coulomb)?;
    let matches_t = norm_v1(&session.complex, &fixed.sub(&tf)?)? / norm;
    let w1 = v_rho1_weights(&session.complex);
    let ran_k = SubspaceProjector::new(&k_sigma_matrix(&session.complex), &w1, 1e-12);
    let moved = ran_k.distance(&fixed.sub(&f)?.pack()) / norm;

    Ok(vec![
        upper(
            "gauge/radiation_residual",
            report.temporal_residual().max(report.coulomb_residual()) / norm,
            1e-8,
        ),
        upper("gauge/matches_t_sigma", matches_t, 1e-9),
        upper("gauge/move_in_ran_k", moved, 1e-8),
    ])
}

// ----------------------------------------------------------------------
// evolve
// ----------------------------------------------------------------------

pub struct EvolveArgs {
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub samples: Option<usize>,
    pub sobolev_grid: Option<Vec<f64>>,
    pub input: Option<PathBuf>,
}

pub fn cmd_evolve(session: &Session, args: &EvolveArgs) -> CliResult<Vec<CheckRow>> {
    let t0 = args.t0.unwrap_or(session.config.time.t0);
    let t1 = args.t1.unwrap_or(session.config.time.t1);
    let samples = args.samples.unwrap_or(session.config.time.samples);
    let grid = args
        .sobolev_grid
        .clone()
        .unwrap_or_else(|| session.config.sobolev_grid.clone());
    if samples < 3 || t1 <= t0 {
        return Err(CliError::Config(
            "evolve needs samples >= 3 and t1 > t0".into(),
        ));
    }
    let cache0 = session.caches.get(0)?;
    let data = match &args.input {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(hodgemax::Error::Io)?;
            MaxwellData::from_file_string(&session.complex, &text)?
        }
        None => {
            let mut rng = rng_for(session.config.seed, "cli-evolve");
            let f = random_constrained(&session.complex, cache0, &mut rng);
            gauge_fix(&session.complex, cache0, &f)?.0
        }
    };

    let dir = session.out_dir().join("evolution");
    let dt = (t1 - t0) / (samples - 1) as f64;
    let times: Vec<f64> = (0..samples).map(|i| t0 + i as f64 * dt).collect();
    let mut evolved = Vec::with_capacity(samples);
    for (i, &t) in times.iter().enumerate() {
        let ft = evolve_maxwell(&session.caches, &data, t - t0)?;
        write_text(&dir.join(format!("sample_{i:04}.mxw")), &ft.to_file_string())?;
        evolved.push(ft);
    }
    let series = TimeSeries::new(times.clone(), evolved)?;

    // energy.csv: t,s,E_s,Etilde
    let records = energy_maxwell(&session.caches, &series, &grid)?;
    let mut energy_csv = String::from("t,s,E_s,Etilde\n");
    for r in &records {
        for e in &r.entries {
            energy_csv.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(r.t),
                fmt_f64(e.s),
                fmt_f64(e.total()),
                fmt_f64(r.modified)
            ));
        }
    }
    write_text(&dir.join("energy.csv"), &energy_csv)?;

    // residual.csv: t and the two Maxwell-operator component norms
    let residual = maxwell_residual(&session.complex, &series)?;
    let mut residual_csv = String::from("t,maxwell_residual_scalar,maxwell_residual_spatial\n");
    for (t, r) in residual.iter() {
        residual_csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(t),
            fmt_f64(r[0]),
            fmt_f64(r[1])
        ));
    }
    write_text(&dir.join("residual.csv"), &residual_csv)?;
    session.note(&format!("evolution written to {}", dir.display()));

    // checks: energy conservation, constraint propagation, symplectic
    // invariance against an independent partner, and the residual order
    let e0 = records[0].modified;
    let drift = records
        .iter()
        .map(|r| (r.modified - e0).abs() / e0.max(1e-300))
        .fold(0.0f64, f64::max);

    let norm0 = norm_v1(&session.complex, &data)?.max(1e-300);
    let mut constraint = 0.0f64;
    for f in series.samples() {
        let kd = k_sigma_dagger(&session.complex, f)?;
        constraint = constraint.max(norm_v0(&session.complex, &kd)? / norm0);
    }

    let mut rng = rng_for(session.config.seed, "cli-evolve-partner");
    let partner = random_constrained(&session.complex, cache0, &mut rng);
    let q_base = q1_sigma(&session.complex, &data, &partner)?;
    let scale = norm0 * norm_v1(&session.complex, &partner)?;
    let mut symplectic = 0.0f64;
    for (t, f) in series.iter() {
        let gt = evolve_maxwell(&session.caches, &partner, t - t0)?;
        symplectic = symplectic.max((q1_sigma(&session.complex, f, &gt)? - q_base).norm() / scale);
    }

    // order probe on its own window: the step must resolve the fastest mode
    // (omega dt << 1) or the central differences are outside their
    // asymptotic regime
    let order = {
        let omega_max = session
            .caches
            .get(0)?
            .eigenvalues()
            .max()
            .max(session.caches.get(1)?.eigenvalues().max())
            .sqrt();
        let dt_probe = 0.25 / omega_max.max(1e-6);
        let n = 17usize;
        let window_end = t0 + (n - 1) as f64 * dt_probe;
        let coarse = max_residual(session, &data, t0, window_end, n)?;
        let fine = max_residual(session, &data, t0, window_end, 2 * (n - 1) + 1)?;
        (coarse / fine).log2()
    };

    Ok(vec![
        upper("evolve/energy_drift", drift, 1e-10),
        upper("evolve/constraint_propagation", constraint, 1e-9),
        upper("evolve/symplectic_invariance", symplectic, 1e-9),
        lower("evolve/residual_order", order, 1.9),
    ])
}

fn max_residual(
    session: &Session,
    data: &MaxwellData,
    t0: f64,
    t1: f64,
    samples: usize,
) -> CliResult<f64> {
    let dt = (t1 - t0) / (samples - 1) as f64;
    let times: Vec<f64> = (0..samples).map(|i| t0 + i as f64 * dt).collect();
    let evolved: Vec<MaxwellData> = times
        .iter()
        .map(|&t| evolve_maxwell(&session.caches, data, t - t0))
        .collect::<hodgemax::Result<_>>()?;
    let series = TimeSeries::new(times, evolved)?;
    let res = maxwell_residual(&session.complex, &series)?;
    Ok(res
        .samples()
        .iter()
        .map(|r| r[0].max(r[1]))
        .fold(0.0f64, f64::max))
}

// ----------------------------------------------------------------------
// build-state / verify-state
// ----------------------------------------------------------------------

pub fn cmd_build_state(session: &Session, mu: Option<f64>) -> CliResult<Vec<CheckRow>> {
    let mu = mu.unwrap_or(session.config.mu);
    let suite = HadamardSuite::build(&session.complex, &session.caches, mu)?;
    let dir = session.out_dir().join("state");
    for (name, matrix) in suite.artifact_matrices() {
        write_text(
            &dir.join(format!("{name}.json")),
            &HadamardSuite::matrix_json(name, matrix),
        )?;
    }
    // the Coulomb projector is real; store it through the same format
    let coulomb_c = suite.coulomb.map(|x| Complex64::new(x, 0.0));
    write_text(
        &dir.join("coulomb_projector.json"),
        &HadamardSuite::matrix_json("coulomb_projector", &coulomb_c),
    )?;

    let report = verify_state(
        &session.complex,
        &session.caches,
        &suite,
        session.config.trials,
        session.config.seed,
    )?;
    write_text(&dir.join("report.csv"), &report.to_csv())?;
    session.note(&format!(
        "state operators (mu={mu}) written to {}",
        dir.display()
    ));
    Ok(report.rows)
}

pub struct VerifyArgs {
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub tolerances: Option<PathBuf>,
}

pub fn cmd_verify_state(session: &Session, args: &VerifyArgs) -> CliResult<Vec<CheckRow>> {
    let trials = args.trials.unwrap_or(session.config.trials);
    let seed = args.seed.unwrap_or(session.config.seed);
    let suite = HadamardSuite::build(&session.complex, &session.caches, session.config.mu)?;
    let mut report = verify_state(&session.complex, &session.caches, &suite, trials, seed)?;

    if let Some(path) = &args.tolerances {
        let text = std::fs::read_to_string(path).map_err(hodgemax::Error::Io)?;
        let overrides: std::collections::BTreeMap<String, f64> = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("tolerance file: {e}")))?;
        for row in &mut report.rows {
            if let Some(&tol) = overrides.get(&row.name) {
                row.threshold = tol;
                row.passed = if row.name.contains("positivity") {
                    row.statistic >= tol
                } else {
                    row.statistic <= tol
                };
            }
        }
    }

    let csv = report.to_csv();
    if !session.quiet {
        print!("{csv}");
    }
    write_text(&session.out_dir().join("report.csv"), &csv)?;
    Ok(report.rows)
}


// ----------------------------------------------------------------------
// all
// ----------------------------------------------------------------------

pub fn cmd_all(session: &Session) -> CliResult<Vec<CheckRow>> {
    let mut rows = Vec::new();
    rows.extend(cmd_mesh_gen(&session.config, true)?);
    rows.extend(cmd_betti(session, false)?);
    rows.extend(cmd_decompose(session)?);
    rows.extend(cmd_gauge_fix(session, None, false)?);
    rows.extend(cmd_evolve(
        session,
        &EvolveArgs {
            t0: None,
            t1: None,
            samples: None,
            sobolev_grid: None,
            input: None,
        },
    )?);
    rows.extend(cmd_build_state(session, None)?);

    let csv = rows_csv(&rows);
    write_text(&session.out_dir().join("report.csv"), &csv)?;
    if !session.quiet {
        print!("{csv}");
    }
    let failed = rows.iter().filter(|r| !r.passed).count();
    session.note(&format!(
        "summary: {} checks, {} failed -> {}",
        rows.len(),
        failed,
        session.out_dir().join("report.csv").display()
    ));
    Ok(rows)
}
