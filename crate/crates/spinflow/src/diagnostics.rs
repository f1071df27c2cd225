//! Analytic identities of the flow recast as numerical residuals: the
//! H^1 energy identity, the second-order wave-type identities, boundary
//! compatibility conditions, the Gronwall existence-time predictor, and
//! the Q1/Q2 uniqueness functional on pairs of trajectories.

use thiserror::Error;

use crate::dynamics::{tension, DirectorField, Trajectory};
use crate::geometry::{geodesic_distance, transport_ambient, GeometryError, UnitVec3, Vec3};
use crate::grid::{
    boundary_normal_derivative_vec3, derivative_neumann, derivative_neumann_vec3,
    gradient_neumann_vec3, grad_norm_sq, integrate, laplacian_neumann_vec3, l2_norm_sq_vec3,
    sobolev_norm_vec3, Grid, ScalarField, Vec3Field,
};

/// Validity ceiling for the nodewise geodesic distance in the
/// uniqueness monitor; parallel transport degenerates beyond it.
pub const MAX_UNIQUENESS_DISTANCE: f64 = std::f64::consts::FRAC_PI_2;
/// Floor added inside log(Q1 + Q2) to guard log(0).
pub const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("need at least 3 snapshots, got {0}")]
    TooFewSnapshots(usize),
    #[error("trajectories live on different grids")]
    GridMismatch,
    #[error("nodewise distance {0} exceeds pi/2; transport undefined")]
    DistanceTooLarge(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One row of the per-step diagnostics table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub l2_norm: f64,
    /// int |u|^2 + |grad u|^2.
    pub h1_energy: f64,
    /// 2 eps int |u x Lap u|^2.
    pub dissipation: f64,
    pub sobolev_h2: f64,
    pub sobolev_h3: f64,
    /// max boundary |du/dnu|.
    pub bc_residual: f64,
    pub wave1_residual: f64,
    pub wave2_residual: f64,
    /// max | |u| - 1 | before renormalization.
    pub unit_violation: f64,
}

pub const DIAG_CSV_HEADER: &str =
    "time,l2_norm,h1_energy,dissipation,sobolev_h2,sobolev_h3,bc_residual,wave1_residual,wave2_residual,unit_violation";

impl DiagnosticsRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.time,
            self.l2_norm,
            self.h1_energy,
            self.dissipation,
            self.sobolev_h2,
            self.sobolev_h3,
            self.bc_residual,
            self.wave1_residual,
            self.wave2_residual,
            self.unit_violation,
        )
    }
}

/// One row of the uniqueness table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessRecord {
    pub time: f64,
    /// int d(u1,u2)^2.
    pub q1: f64,
    /// int |P grad u2 - grad u1|^2.
    pub q2: f64,
    pub max_distance: f64,
}

pub const UNIQ_CSV_HEADER: &str = "time,q1,q2,max_distance";

impl UniquenessRecord {
    pub fn csv_row(&self) -> String {
        format!("{:e},{:e},{:e},{:e}", self.time, self.q1, self.q2, self.max_distance)
    }
}

/// int (|u|^2 + |grad u|^2).
pub fn h1_energy(u: &Vec3Field) -> f64 {
    let g2 = grad_norm_sq(u);
    let mut density = ScalarField::zeros(u.grid());
    for ((o, v), g) in density.values_mut().iter_mut().zip(u.values()).zip(g2.values()) {
        *o = v.norm_sq() + g;
    }
    integrate(&density)
}

/// 2 eps int |u x Lap u|^2.
pub fn dissipation(u: &Vec3Field, epsilon: f64) -> f64 {
    let lap = laplacian_neumann_vec3(u);
    let spin = u.zip_map(&lap, Vec3::cross);
    2.0 * epsilon * l2_norm_sq_vec3(&spin)
}

/// Residual of d/dt int (|u|^2 + |grad u|^2) + 2 eps int |u x Lap u|^2
/// at each interior step k = 1..len-1, with a central difference in
/// time.
pub fn h1_identity_residual(traj: &Trajectory, epsilon: f64) -> Result<Vec<f64>, DiagnosticsError> {
    if traj.len() < 3 {
        return Err(DiagnosticsError::TooFewSnapshots(traj.len()));
    }
    let energies: Vec<f64> = traj.states.iter().map(|s| h1_energy(s.field())).collect();
    let mut out = Vec::with_capacity(traj.len() - 2);
    for k in 1..traj.len() - 1 {
        let de = (energies[k + 1] - energies[k - 1]) / (2.0 * traj.dt);
        out.push((de + dissipation(traj.states[k].field(), epsilon)).abs());
    }
    Ok(out)
}

fn central_dt(prev: &Vec3Field, next: &Vec3Field, dt: f64) -> Vec3Field {
    next.sub(prev).scale(1.0 / (2.0 * dt))
}

fn second_dt(prev: &Vec3Field, now: &Vec3Field, next: &Vec3Field, dt: f64) -> Vec3Field {
    next.sub(&now.scale(2.0)).add(prev).scale(1.0 / (dt * dt))
}

/// |grad u|^2 u as a field.
fn grad_sq_times(u: &Vec3Field) -> Vec3Field {
    u.mul_scalar_field(&grad_norm_sq(u))
}

/// L^2 norm of the first wave-type identity
///   d_t^2 u = eps (Lap d_t u + d_t(|grad u|^2 u)) + d_t u x Lap u
///             + u x Lap d_t u,
/// all time derivatives central.
pub fn wave1_residual(
    u_prev: &Vec3Field,
    u_now: &Vec3Field,
    u_next: &Vec3Field,
    epsilon: f64,
    dt: f64,
) -> f64 {
    let utt = second_dt(u_prev, u_now, u_next, dt);
    let ut = central_dt(u_prev, u_next, dt);
    let lap = laplacian_neumann_vec3(u_now);
    let lap_ut = laplacian_neumann_vec3(&ut);
    let mut rhs = ut.zip_map(&lap, Vec3::cross).add(&u_now.zip_map(&lap_ut, Vec3::cross));
    if epsilon != 0.0 {
        let dt_nl = central_dt(&grad_sq_times(u_prev), &grad_sq_times(u_next), dt);
        rhs = rhs.add(&lap_ut.add(&dt_nl).scale(epsilon));
    }
    l2_norm_sq_vec3(&utt.sub(&rhs)).sqrt()
}

/// L^2 norm of a field over nodes at least `margin` cells from every
/// face, with full-cell quadrature weights.
fn interior_l2(f: &Vec3Field, margin: usize) -> f64 {
    let grid = f.grid();
    let cell: f64 = (0..grid.dim()).map(|j| grid.spacing(j)).product();
    let mut acc = 0.0;
    for (flat, v) in f.values().iter().enumerate() {
        if grid.is_interior_with_margin(&grid.multi_index(flat), margin) {
            acc += v.norm_sq();
        }
    }
    (acc * cell).sqrt()
}

/// Mixed/repeated second derivative by composing the first-derivative
/// stencils; valid away from the boundary.
fn second_derivative(u: &Vec3Field, i: usize, j: usize) -> Vec3Field {
    derivative_neumann_vec3(&derivative_neumann_vec3(u, j), i)
}

/// Interior residuals of the second wave-type identity and, at eps = 0,
/// of its divergence form together with the gap between the two
/// algebraically equal right-hand sides.
#[derive(Debug, Clone, Copy)]
pub struct Wave2Residual {
    pub weq2: f64,
    pub winq5: Option<f64>,
    pub identity_gap: Option<f64>,
}

/// Evaluate the second wave-type identity
///   d_t^2 u + (1-eps^2) Lap tau(u) - 2 eps Lap(u x Lap u) = RHS(eps)
/// on the interior subdomain (margin 2), where the composed stencils
/// never touch mirrored ghosts.
pub fn wave2_residual(
    u_prev: &Vec3Field,
    u_now: &Vec3Field,
    u_next: &Vec3Field,
    epsilon: f64,
    dt: f64,
) -> Wave2Residual {
    wave2_residual_with_margin(u_prev, u_now, u_next, epsilon, dt, 2)
}

/// Same as [`wave2_residual`] but with an explicit interior margin, for
/// refinement studies that keep the measured subdomain fixed in physical
/// space while the grid is refined.
pub fn wave2_residual_with_margin(
    u_prev: &Vec3Field,
    u_now: &Vec3Field,
    u_next: &Vec3Field,
    epsilon: f64,
    dt: f64,
    margin: usize,
) -> Wave2Residual {
    let grid = u_now.grid();
    let dim = grid.dim();
    let utt = second_dt(u_prev, u_now, u_next, dt);
    let u = u_now;
    let lap = laplacian_neumann_vec3(u);
    let grads = gradient_neumann_vec3(u);
    let g2 = grad_norm_sq(u);
    // g_ij = d_i u . d_j u
    let mut gmat: Vec<Vec<ScalarField>> = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut row = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut s = ScalarField::zeros(grid);
            for ((o, a), b) in
                s.values_mut().iter_mut().zip(grads[i].values()).zip(grads[j].values())
            {
                *o = a.dot(*b);
            }
            row.push(s);
        }
        gmat.push(row);
    }
    // div^2 g = sum_ij d_i d_j g_ij (scalar).
    let mut div2_g = ScalarField::zeros(grid);
    for i in 0..dim {
        for j in 0..dim {
            let d = derivative_neumann(&derivative_neumann(&gmat[i][j], j), i);
            div2_g = div2_g.add(&d);
        }
    }
    // <grad |grad u|^2, grad u> = sum_j d_j(g2) d_j u.
    let mut grad_g2_grad_u = Vec3Field::zeros(grid);
    for j in 0..dim {
        let dg = derivative_neumann(&g2, j);
        grad_g2_grad_u = grad_g2_grad_u.add(&grads[j].mul_scalar_field(&dg));
    }
    // <Lap u, grad u> . grad u = sum_j (Lap u . d_j u) d_j u.
    let mut lap_grad_grad = Vec3Field::zeros(grid);
    for j in 0..dim {
        let mut s = ScalarField::zeros(grid);
        for ((o, l), g) in s.values_mut().iter_mut().zip(lap.values()).zip(grads[j].values()) {
            *o = l.dot(*g);
        }
        lap_grad_grad = lap_grad_grad.add(&grads[j].mul_scalar_field(&s));
    }
    let g2u = grad_sq_times(u);
    let lap_g2u = laplacian_neumann_vec3(&g2u);
    // Epsilon-free block of the right-hand side:
    //   Lap(|grad u|^2 u) - 2 div^2(grad u (x) grad u) u
    //   - 2 <grad |grad u|^2, grad u> - 2 <Lap u, grad u> . grad u
    //   - |grad u|^2 Lap u.
    let rhs_base = lap_g2u
        .sub(&u.mul_scalar_field(&div2_g).scale(2.0))
        .sub(&grad_g2_grad_u.scale(2.0))
        .sub(&lap_grad_grad.scale(2.0))
        .sub(&lap.mul_scalar_field(&g2));

    let spin = u.zip_map(&lap, Vec3::cross);
    let lhs = {
        let lap_tau = laplacian_neumann_vec3(&tension(u));
        let mut l = utt.add(&lap_tau.scale(1.0 - epsilon * epsilon));
        if epsilon != 0.0 {
            l = l.sub(&laplacian_neumann_vec3(&spin).scale(2.0 * epsilon));
        }
        l
    };
    let rhs = if epsilon == 0.0 {
        rhs_base.clone()
    } else {
        // eps { d_t(|grad u|^2 u) - 2 div(grad u x. grad^2 u)
        //       + u x Lap(|grad u|^2 u) + |grad u|^2 u x Lap u }
        let dt_nl = central_dt(&grad_sq_times(u_prev), &grad_sq_times(u_next), dt);
        let mut div_cross = Vec3Field::zeros(grid);
        for i in 0..dim {
            let mut fi = Vec3Field::zeros(grid);
            for j in 0..dim {
                let dij = second_derivative(u, i, j);
                fi = fi.add(&grads[j].zip_map(&dij, Vec3::cross));
            }
            div_cross = div_cross.add(&derivative_neumann_vec3(&fi, i));
        }
        let u_lap_g2u = u.zip_map(&lap_g2u, Vec3::cross);
        let eps_block = dt_nl
            .sub(&div_cross.scale(2.0))
            .add(&u_lap_g2u)
            .add(&spin.mul_scalar_field(&g2));
        rhs_base.add(&eps_block.scale(epsilon))
    };
    let weq2 = interior_l2(&lhs.sub(&rhs), margin);

    if epsilon != 0.0 {
        return Wave2Residual { weq2, winq5: None, identity_gap: None };
    }

    // Divergence form (eps = 0):
    //   d_t^2 u + Lap^2 u = -2 sum_ij d_i d_j (g_ij u)
    //                       + 2 sum_i d_i (sum_j g_ij d_j u)
    //                       - sum_i d_i (|grad u|^2 d_i u).
    let mut rhs_div = Vec3Field::zeros(grid);
    for i in 0..dim {
        for j in 0..dim {
            let prod = u.mul_scalar_field(&gmat[i][j]);
            let dd = derivative_neumann_vec3(&derivative_neumann_vec3(&prod, j), i);
            rhs_div = rhs_div.sub(&dd.scale(2.0));
        }
        let mut flux = Vec3Field::zeros(grid);
        for j in 0..dim {
            flux = flux.add(&grads[j].mul_scalar_field(&gmat[i][j]));
        }
        rhs_div = rhs_div.add(&derivative_neumann_vec3(&flux, i).scale(2.0));
        rhs_div = rhs_div.sub(&derivative_neumann_vec3(&grads[i].mul_scalar_field(&g2), i));
    }
    let bilap = laplacian_neumann_vec3(&lap);
    let winq5 = interior_l2(&utt.add(&bilap).sub(&rhs_div), margin);
    // Expanded form of the same right-hand side, after the Lap tau /
    // Lap(|grad u|^2 u) cancellation:
    let rhs_expanded = rhs_base.sub(&lap_g2u);
    let identity_gap = interior_l2(&rhs_expanded.sub(&rhs_div), margin);
    Wave2Residual { weq2, winq5: Some(winq5), identity_gap: Some(identity_gap) }
}

/// Maximum boundary normal derivative of (d_t u, tau(u)) at each
/// interior step; both vanish on the boundary in the continuum.
pub fn compatibility_residuals(traj: &Trajectory) -> Result<Vec<(f64, f64)>, DiagnosticsError> {
    if traj.len() < 3 {
        return Err(DiagnosticsError::TooFewSnapshots(traj.len()));
    }
    let mut out = Vec::with_capacity(traj.len() - 2);
    for k in 1..traj.len() - 1 {
        let ut = central_dt(traj.states[k - 1].field(), traj.states[k + 1].field(), traj.dt);
        let tau = tension(traj.states[k].field());
        out.push((boundary_normal_derivative_vec3(&ut), boundary_normal_derivative_vec3(&tau)));
    }
    Ok(out)
}

/// Blow-up time of the comparison ODE y' = C(1+y)^6:
/// T* = int_{y0}^inf dy / (C(1+y)^6) = 1 / (5 C (1+y0)^5).
pub fn gronwall_time(y0: f64, c: f64) -> f64 {
    assert!(y0 >= 0.0 && c > 0.0, "gronwall_time needs y0 >= 0, C > 0");
    1.0 / (5.0 * c * (1.0 + y0).powi(5))
}

/// Heuristic least-squares fit of C from a measured y(t): minimizes
/// sum_k (y'_k - C (1+y_k)^6)^2 with central-difference slopes.
pub fn fit_gronwall_constant(times: &[f64], y: &[f64]) -> Option<f64> {
    if times.len() != y.len() || times.len() < 3 {
        return None;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 1..y.len() - 1 {
        let dt = times[k + 1] - times[k - 1];
        if dt <= 0.0 {
            return None;
        }
        let slope = (y[k + 1] - y[k - 1]) / dt;
        let f = (1.0 + y[k]).powi(6);
        num += slope * f;
        den += f * f;
    }
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}

/// Q1/Q2 record for a single snapshot pair.
pub fn uniqueness_record(
    u1: &DirectorField,
    u2: &DirectorField,
    time: f64,
) -> Result<UniquenessRecord, DiagnosticsError> {
    if u1.grid() != u2.grid() {
        return Err(DiagnosticsError::GridMismatch);
    }
    let grid = u1.grid().clone();
    let dim = grid.dim();
    let g1 = gradient_neumann_vec3(u1.field());
    let g2 = gradient_neumann_vec3(u2.field());
    let mut d2 = ScalarField::zeros(&grid);
    let mut phi2 = ScalarField::zeros(&grid);
    let mut max_distance = 0.0f64;
    for flat in 0..grid.num_nodes() {
        let v1 = u1.values()[flat];
        let v2 = u2.values()[flat];
        let p1 = UnitVec3::normalize(v1)?;
        if v1 == v2 {
            // Identical directors: the distance is exactly zero and the
            // transport is the identity, so skip the trigonometry (which
            // would leave roundoff-sized residue on coinciding points).
            let mut acc = 0.0;
            for j in 0..dim {
                let c1 = crate::geometry::tangent_project(p1, g1[j].values()[flat]).vec;
                let c2 = crate::geometry::tangent_project(p1, g2[j].values()[flat]).vec;
                acc += (c2 - c1).norm_sq();
            }
            phi2.values_mut()[flat] = acc;
            continue;
        }
        let p2 = UnitVec3::normalize(v2)?;
        let d = geodesic_distance(p1, p2);
        max_distance = max_distance.max(d);
        if d >= MAX_UNIQUENESS_DISTANCE {
            return Err(DiagnosticsError::DistanceTooLarge(d));
        }
        d2.values_mut()[flat] = d * d;
        let mut acc = 0.0;
        for j in 0..dim {
            // Tangent-project the discrete gradient columns, transport
            // u2's column into the fiber at u1(x), and compare.
            let c1 = crate::geometry::tangent_project(p1, g1[j].values()[flat]).vec;
            let c2 = crate::geometry::tangent_project(p2, g2[j].values()[flat]).vec;
            let moved = transport_ambient(p1, p2, c2)?;
            acc += (moved - c1).norm_sq();
        }
        phi2.values_mut()[flat] = acc;
    }
    Ok(UniquenessRecord {
        time,
        q1: integrate(&d2),
        q2: integrate(&phi2),
        max_distance,
    })
}

/// Per-step Q1/Q2 along a trajectory pair, plus the maximal growth rate
/// of log(Q1 + Q2).
pub fn uniqueness_monitor(
    traj1: &Trajectory,
    traj2: &Trajectory,
) -> Result<(Vec<UniquenessRecord>, f64), DiagnosticsError> {
    if traj1.final_state().grid() != traj2.final_state().grid() {
        return Err(DiagnosticsError::GridMismatch);
    }
    let steps = traj1.len().min(traj2.len());
    let mut records = Vec::with_capacity(steps);
    for k in 0..steps {
        records.push(uniqueness_record(&traj1.states[k], &traj2.states[k], traj1.times[k])?);
    }
    let mut slope = f64::NEG_INFINITY;
    for w in records.windows(2) {
        let a = (w[0].q1 + w[0].q2 + LOG_FLOOR).ln();
        let b = (w[1].q1 + w[1].q2 + LOG_FLOOR).ln();
        slope = slope.max((b - a) / traj1.dt);
    }
    if !slope.is_finite() {
        slope = 0.0;
    }
    Ok((records, slope))
}

/// Assemble the per-step diagnostics table for a trajectory. Wave
/// residuals need both temporal neighbors and are reported as 0.0 at
/// the first and last step.
pub fn collect_records(
    traj: &Trajectory,
    epsilon: f64,
    with_wave: bool,
) -> Vec<DiagnosticsRecord> {
    let n = traj.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let u = traj.states[k].field();
        let (w1, w2) = if with_wave && k > 0 && k + 1 < n {
            let prev = traj.states[k - 1].field();
            let next = traj.states[k + 1].field();
            (
                wave1_residual(prev, u, next, epsilon, traj.dt),
                wave2_residual(prev, u, next, epsilon, traj.dt).weq2,
            )
        } else {
            (0.0, 0.0)
        };
        out.push(DiagnosticsRecord {
            time: traj.times[k],
            l2_norm: l2_norm_sq_vec3(u).sqrt(),
            h1_energy: h1_energy(u),
            dissipation: dissipation(u, epsilon),
            sobolev_h2: sobolev_norm_vec3(u, 2),
            sobolev_h3: sobolev_norm_vec3(u, 3),
            bc_residual: boundary_normal_derivative_vec3(u),
            wave1_residual: w1,
            wave2_residual: w2,
            unit_violation: traj.unit_violations[k],
        });
    }
    out
}

pub fn records_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = String::from(DIAG_CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

pub fn uniqueness_csv(records: &[UniquenessRecord]) -> String {
    let mut s = String::from(UNIQ_CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Convenience: interior L^2 norm exposed for refinement studies.
pub fn interior_l2_norm(f: &Vec3Field, margin: usize) -> f64 {
    interior_l2(f, margin)
}

/// Dummy-free helper to build a constant trajectory for controls.
pub fn constant_trajectory(grid: &Grid, v: Vec3, dt: f64, steps: usize) -> Trajectory {
    let state = DirectorField::trusting(Vec3Field::constant(grid, v));
    Trajectory {
        times: (0..=steps).map(|k| k as f64 * dt).collect(),
        states: vec![state; steps + 1],
        unit_violations: vec![0.0; steps + 1],
        dt,
    }
}
