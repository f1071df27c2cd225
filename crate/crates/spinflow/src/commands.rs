//! Batch experiment commands behind the CLI: single runs, epsilon
//! sweeps, Galerkin and grid refinement studies, uniqueness monitoring,
//! and the demag self-check. All file outputs are deterministic for a
//! fixed config and seed.

use std::path::Path;

use thiserror::Error;

use crate::config::RunConfig;
use crate::diagnostics::{
    self, uniqueness_monitor, DiagnosticsRecord, DIAG_CSV_HEADER,
};
use crate::dynamics::{
    self, make_initial_data, renormalize, run_trajectory, DirectorField, DynamicsError, Physics,
    SolverConfig, Stepper,
};
use crate::galerkin::{build_basis, project, reconstruct, step_galerkin};
use crate::geometry::Vec3;
use crate::grid::{integrate, l2_norm_sq_vec3, Grid, ScalarField, Vec3Field};
use crate::rng::Lcg64;
use crate::snapshot::{write_snapshot, Snapshot, SnapshotError};

#[derive(Debug, Error)]
pub enum CmdError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical breakdown: {0}")]
    Blowup(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Blowup(_) => 3,
            CmdError::Io(_) => 4,
        }
    }
}

impl From<DynamicsError> for CmdError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::BlowUp { .. } | DynamicsError::ZeroVector(_) => {
                CmdError::Blowup(e.to_string())
            }
            other => CmdError::Config(other.to_string()),
        }
    }
}

impl From<crate::galerkin::GalerkinError> for CmdError {
    fn from(e: crate::galerkin::GalerkinError) -> Self {
        CmdError::Config(e.to_string())
    }
}

impl From<SnapshotError> for CmdError {
    fn from(e: SnapshotError) -> Self {
        CmdError::Io(e.to_string())
    }
}

fn io_err(e: std::io::Error) -> CmdError {
    CmdError::Io(e.to_string())
}

fn write_text(path: &Path, text: &str) -> Result<(), CmdError> {
    std::fs::write(path, text).map_err(io_err)
}

/// Worker cap from SPINFLOW_THREADS (0 or unset = auto).
fn thread_cap() -> usize {
    match std::env::var("SPINFLOW_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(0) | None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        Some(n) => n,
    }
}

/// Run jobs with at most `thread_cap()` running at once, preserving
/// input order in the results.
fn run_parallel<T: Send>(jobs: Vec<Box<dyn FnOnce() -> T + Send + '_>>) -> Vec<T> {
    let cap = thread_cap().max(1);
    let mut results: Vec<Option<T>> = Vec::new();
    for _ in 0..jobs.len() {
        results.push(None);
    }
    let mut jobs: Vec<Option<Box<dyn FnOnce() -> T + Send + '_>>> =
        jobs.into_iter().map(Some).collect();
    let total = jobs.len();
    let mut start = 0;
    while start < total {
        let end = (start + cap).min(total);
        let batch: Vec<(usize, Box<dyn FnOnce() -> T + Send + '_>)> =
            (start..end).map(|i| (i, jobs[i].take().expect("taken once"))).collect();
        let mut outs: Vec<(usize, T)> = Vec::new();
        std::thread::scope(|scope| {
            let handles: Vec<_> = batch
                .into_iter()
                .map(|(i, job)| scope.spawn(move || (i, job())))
                .collect();
            for h in handles {
                outs.push(h.join().expect("worker panicked"));
            }
        });
        for (i, v) in outs {
            results[i] = Some(v);
        }
        start = end;
    }
    results.into_iter().map(|r| r.expect("filled")).collect()
}

/// Streamed single run: diagnostics rows at every `stride`-th step
/// (plus the final step), snapshots alongside when an output directory
/// is given.
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: DirectorField,
}

fn record_at(
    prev: Option<&Vec3Field>,
    now: &Vec3Field,
    next: Option<&Vec3Field>,
    time: f64,
    dt: f64,
    epsilon: f64,
    unit_violation: f64,
    with_wave: bool,
) -> DiagnosticsRecord {
    let (w1, w2) = match (prev, next) {
        (Some(p), Some(n)) if with_wave => (
            diagnostics::wave1_residual(p, now, n, epsilon, dt),
            diagnostics::wave2_residual(p, now, n, epsilon, dt).weq2,
        ),
        _ => (0.0, 0.0),
    };
    DiagnosticsRecord {
        time,
        l2_norm: l2_norm_sq_vec3(now).sqrt(),
        h1_energy: diagnostics::h1_energy(now),
        dissipation: diagnostics::dissipation(now, epsilon),
        sobolev_h2: crate::grid::sobolev_norm_vec3(now, 2),
        sobolev_h3: crate::grid::sobolev_norm_vec3(now, 3),
        bc_residual: crate::grid::boundary_normal_derivative_vec3(now),
        wave1_residual: w1,
        wave2_residual: w2,
        unit_violation,
    }
}

/// Advance the configured flow to t_final, holding at most three full
/// fields at once. The record for step k is emitted as soon as step
/// k+1 exists, so wave residuals get both temporal neighbors; the
/// first and last steps report wave residuals of zero.
pub fn simulate(cfg: &RunConfig, snapshot_dir: Option<&Path>) -> Result<RunOutput, CmdError> {
    let n_steps = cfg.n_steps();
    let stride = cfg.snapshot_stride;
    let eps = cfg.solver.epsilon;
    let dt = cfg.solver.dt;
    let mut stepper = Stepper::new(&cfg.grid, cfg.solver.clone(), None)?;
    let mut records: Vec<DiagnosticsRecord> = Vec::new();

    let snap = |step: usize, time: f64, state: &DirectorField| -> Result<(), CmdError> {
        if let Some(dir) = snapshot_dir {
            write_snapshot(
                &dir.join(format!("snap_{step}.spnf")),
                &Snapshot { grid: cfg.grid.clone(), time, field: state.field().clone() },
            )?;
        }
        Ok(())
    };
    let u0 = make_initial_data(&cfg.initial, &cfg.grid);
    let mut prev: Option<DirectorField> = None;
    let mut curr = u0;
    let mut curr_time = 0.0;
    let mut curr_uv = curr.unit_violation();
    for step in 1..=n_steps {
        let (next, info) = stepper.step(&curr)?;
        let k = step - 1; // index of `curr`
        if k % stride == 0 {
            records.push(record_at(
                prev.as_ref().map(|p| p.field()),
                curr.field(),
                Some(next.field()),
                curr_time,
                dt,
                eps,
                curr_uv,
                cfg.wave_diagnostics,
            ));
            snap(k, curr_time, &curr)?;
        }
        prev = Some(curr);
        curr = next;
        curr_time = info.time;
        curr_uv = info.unit_violation;
    }
    records.push(record_at(None, curr.field(), None, curr_time, dt, eps, curr_uv, false));
    snap(n_steps, curr_time, &curr)?;
    Ok(RunOutput { records, final_state: curr })
}

fn ensure_dir(dir: &Path) -> Result<(), CmdError> {
    std::fs::create_dir_all(dir).map_err(io_err)
}

/// Single trajectory with per-step diagnostics CSV and snapshots.
pub fn cmd_run(cfg: &RunConfig) -> Result<(), CmdError> {
    ensure_dir(&cfg.out_dir)?;
    let out = simulate(cfg, Some(&cfg.out_dir))?;
    let mut csv = String::from(DIAG_CSV_HEADER);
    csv.push('\n');
    for r in &out.records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    write_text(&cfg.out_dir.join("diag.csv"), &csv)
}

/// Continuation in epsilon: run each member to T and report pairwise
/// final-state L^2 distances between consecutive epsilons.
pub fn cmd_sweep_epsilon(cfg: &RunConfig) -> Result<(), CmdError> {
    if cfg.eps_list.is_empty() {
        return Err(CmdError::Config("eps_list is empty".into()));
    }
    let max_eps = cfg.eps_list.iter().cloned().fold(0.0f64, f64::max);
    // One dt for all members so final states are comparable.
    let dt = SolverConfig::stable_dt(&cfg.grid, max_eps, cfg.solver.cfl_safety);
    let n_steps = (cfg.t_final / dt).ceil().max(1.0) as usize;
    let u0 = make_initial_data(&cfg.initial, &cfg.grid);
    let jobs: Vec<Box<dyn FnOnce() -> Result<Vec3Field, CmdError> + Send + '_>> = cfg
        .eps_list
        .iter()
        .map(|&eps| {
            let u0 = u0.clone();
            let grid = cfg.grid.clone();
            let base = cfg.solver.clone();
            Box::new(move || -> Result<Vec3Field, CmdError> {
                let solver = SolverConfig {
                    epsilon: eps,
                    dt,
                    physics: if eps == 0.0 { Physics::Pure } else { Physics::Perturbed },
                    ..base
                };
                solver.validate(&grid)?;
                let mut stepper = Stepper::new(&grid, solver, None)?;
                let mut u = u0;
                for _ in 0..n_steps {
                    u = stepper.step(&u)?.0;
                }
                Ok(u.into_field())
            }) as Box<dyn FnOnce() -> Result<Vec3Field, CmdError> + Send>
        })
        .collect();
    let finals: Vec<Vec3Field> =
        run_parallel(jobs).into_iter().collect::<Result<Vec<_>, _>>()?;
    ensure_dir(&cfg.out_dir)?;
    let mut csv = String::from("eps_a,eps_b,l2_distance\n");
    for i in 0..finals.len().saturating_sub(1) {
        let d = l2_norm_sq_vec3(&finals[i].sub(&finals[i + 1])).sqrt();
        csv.push_str(&format!("{:e},{:e},{:e}\n", cfg.eps_list[i], cfg.eps_list[i + 1], d));
    }
    write_text(&cfg.out_dir.join("sweep.csv"), &csv)
}

/// Galerkin n-refinement: distances between consecutive truncations at
/// T plus the final unit-norm violation of each member.
pub fn cmd_galerkin_converge(cfg: &RunConfig) -> Result<(), CmdError> {
    if cfg.n_list.len() < 2 {
        return Err(CmdError::Config("n_list needs at least two entries".into()));
    }
    let u0 = make_initial_data(&cfg.initial, &cfg.grid);
    let dt = cfg.solver.dt;
    let n_steps = cfg.n_steps();
    let mut finals: Vec<(usize, Vec3Field, f64)> = Vec::new();
    for &n in &cfg.n_list {
        let basis = build_basis(&cfg.grid, n)?;
        let mut st = project(u0.field(), &basis)?;
        for _ in 0..n_steps {
            st = step_galerkin(&st, cfg.solver.epsilon, dt, cfg.solver.scheme)?;
            if st.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(CmdError::Blowup(format!("galerkin coefficients diverged at n={n}")));
            }
        }
        let f = reconstruct(&st);
        let dev = dynamics::unit_violation(&f);
        finals.push((n, f, dev));
    }
    ensure_dir(&cfg.out_dir)?;
    let mut csv = String::from("n_coarse,n_fine,l2_distance,unit_violation_fine\n");
    for w in finals.windows(2) {
        let d = l2_norm_sq_vec3(&w[0].1.sub(&w[1].1)).sqrt();
        csv.push_str(&format!("{},{},{:e},{:e}\n", w[0].0, w[1].0, d, w[1].2));
    }
    write_text(&cfg.out_dir.join("galerkin.csv"), &csv)
}

struct LevelResult {
    n: usize,
    dt: f64,
    h1_residual: f64,
    wave1_residual: f64,
}

fn run_level(cfg: &RunConfig, grid: &Grid, t_measure: f64) -> Result<LevelResult, CmdError> {
    let eps = cfg.solver.epsilon;
    let dt = SolverConfig::stable_dt(grid, eps, cfg.solver.cfl_safety);
    let solver = SolverConfig { dt, ..cfg.solver.clone() };
    let n_steps = ((t_measure / dt).ceil() as usize).max(3);
    let mid = n_steps / 2;
    let u0 = make_initial_data(&cfg.initial, grid);
    let mut stepper = Stepper::new(grid, solver, None)?;
    let mut energies: Vec<f64> = vec![diagnostics::h1_energy(u0.field())];
    let mut window: Vec<DirectorField> = vec![u0];
    let mut h1_max = 0.0f64;
    let mut wave1 = 0.0f64;
    for k in 1..=n_steps {
        let next = stepper.step(window.last().expect("nonempty"))?.0;
        energies.push(diagnostics::h1_energy(next.field()));
        window.push(next);
        if window.len() == 3 {
            let m = k - 1; // index of the middle state
            let de = (energies[m + 1] - energies[m - 1]) / (2.0 * dt);
            let r = (de + diagnostics::dissipation(window[1].field(), eps)).abs();
            h1_max = h1_max.max(r);
            if m == mid {
                wave1 = diagnostics::wave1_residual(
                    window[0].field(),
                    window[1].field(),
                    window[2].field(),
                    eps,
                    dt,
                );
            }
            window.remove(0);
        }
    }
    Ok(LevelResult { n: grid.counts()[0], dt, h1_residual: h1_max, wave1_residual: wave1 })
}

/// Joint space-time refinement with Richardson-observed orders of the
/// energy and wave residuals. Each level doubles the resolution
/// (N -> 2N-1) and takes the CFL-stable dt at that resolution.
pub fn cmd_refine(cfg: &RunConfig) -> Result<(), CmdError> {
    if cfg.levels < 2 {
        return Err(CmdError::Config("levels must be >= 2".into()));
    }
    let base_dt = cfg.solver.dt;
    let t_measure = (8.0 * base_dt).min(cfg.t_final);
    let mut results: Vec<LevelResult> = Vec::new();
    let mut counts: Vec<usize> = cfg.grid.counts().to_vec();
    for _ in 0..cfg.levels {
        let grid = Grid::new(&counts, cfg.grid.extents())
            .map_err(|e| CmdError::Config(e.to_string()))?;
        results.push(run_level(cfg, &grid, t_measure)?);
        for c in counts.iter_mut() {
            *c = 2 * *c - 1;
        }
    }
    ensure_dir(&cfg.out_dir)?;
    let mut csv = String::from("level,n,dt,h1_residual,wave1_residual,h1_order,wave1_order\n");
    for (l, r) in results.iter().enumerate() {
        let (ho, wo) = if l == 0 {
            (0.0, 0.0)
        } else {
            let p = &results[l - 1];
            (
                (p.h1_residual / r.h1_residual).log2(),
                (p.wave1_residual / r.wave1_residual).log2(),
            )
        };
        csv.push_str(&format!(
            "{},{},{:e},{:e},{:e},{:e},{:e}\n",
            l, r.n, r.dt, r.h1_residual, r.wave1_residual, ho, wo
        ));
    }
    write_text(&cfg.out_dir.join("refine.csv"), &csv)
}

/// Perturb unit data by a seeded nodewise offset and renormalize.
pub fn perturb_data(
    u: &DirectorField,
    amplitude: f64,
    seed: u64,
) -> Result<DirectorField, DynamicsError> {
    let mut rng = Lcg64::new(seed);
    let mut f = u.field().clone();
    for v in f.values_mut() {
        *v += Vec3::new(rng.next_symmetric(), rng.next_symmetric(), rng.next_symmetric())
            * amplitude;
    }
    renormalize(&f)
}

/// Two nearby runs and the Q1/Q2 uniqueness table with its growth
/// slope.
pub fn cmd_uniqueness(cfg: &RunConfig) -> Result<(), CmdError> {
    let u0 = make_initial_data(&cfg.initial, &cfg.grid);
    let u0p = perturb_data(&u0, cfg.perturbation, cfg.seed ^ 0x9e3779b97f4a7c15)?;
    let n_steps = cfg.n_steps();
    let t1 = run_trajectory(u0, &cfg.solver, None, n_steps)?;
    let t2 = run_trajectory(u0p, &cfg.solver, None, n_steps)?;
    let (records, slope) =
        uniqueness_monitor(&t1, &t2).map_err(|e| CmdError::Config(e.to_string()))?;
    ensure_dir(&cfg.out_dir)?;
    write_text(&cfg.out_dir.join("uniq.csv"), &diagnostics::uniqueness_csv(&records))?;
    println!("uniqueness slope = {slope:e}");
    Ok(())
}

/// Demag self-check: constant-field cube mean and the empirical L^2
/// operator-norm ratio over random fields.
pub fn cmd_demag_check(cfg: &RunConfig) -> Result<(), CmdError> {
    if cfg.grid.dim() != 3 {
        return Err(CmdError::Config("demag check requires a 3-dimensional grid".into()));
    }
    let grid = &cfg.grid;
    let e3 = Vec3::new(0.0, 0.0, 1.0);
    let u = Vec3Field::constant(grid, e3);
    let hd = dynamics::demag_field(&u)?;
    let volume: f64 = grid.extents().iter().product();
    let mut density = ScalarField::zeros(grid);
    for (o, h) in density.values_mut().iter_mut().zip(hd.values()) {
        *o = h.dot(e3);
    }
    let mean = integrate(&density) / volume;

    let mut rng = Lcg64::new(cfg.seed);
    let mut max_ratio = 0.0f64;
    for _ in 0..20 {
        let f = Vec3Field::from_values(
            grid,
            (0..grid.num_nodes())
                .map(|_| Vec3::new(rng.next_symmetric(), rng.next_symmetric(), rng.next_symmetric()))
                .collect(),
        )
        .map_err(|e| CmdError::Config(e.to_string()))?;
        let ratio = (l2_norm_sq_vec3(&dynamics::demag_field(&f)?) / l2_norm_sq_vec3(&f)).sqrt();
        max_ratio = max_ratio.max(ratio);
    }
    ensure_dir(&cfg.out_dir)?;
    let csv = format!(
        "check,value\nconstant_cube_mean,{mean:e}\nmax_operator_ratio,{max_ratio:e}\n"
    );
    write_text(&cfg.out_dir.join("demag.csv"), &csv)
}
