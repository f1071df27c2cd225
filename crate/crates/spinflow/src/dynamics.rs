//! Right-hand sides of the evolution equations (perturbed flow, pure
//! Schrodinger flow, Landau-Lifshitz with anisotropy and demagnetizing
//! field, incompressible variant) and explicit time stepping.

use thiserror::Error;

use crate::geometry::{UnitVec3, Vec3};
use crate::grid::{
    derivative_neumann_vec3, grad_norm_sq, laplacian_neumann_vec3, l2_norm_sq_vec3,
    ScalarField, Grid, GridError, Vec3Field,
};
use crate::rng::Lcg64;

/// Tolerance on max | |u|^2 - 1 | after renormalization.
pub const UNIT_TOL: f64 = 1e-12;
/// L^inf tolerance for divergence and boundary flux of the advecting field.
pub const DIV_TOL: f64 = 1e-8;
/// Unit-norm deviation that signals breakdown of an explicit step.
pub const BLOWUP_TOL: f64 = 0.1;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("operation requires a 3-dimensional grid")]
    DimensionError,
    #[error("advecting field is not divergence-free (max |div v| = {0})")]
    NotDivergenceFree(f64),
    #[error("advecting field has nonzero boundary flux (max = {0})")]
    BoundaryFluxNonzero(f64),
    #[error("solution broke down at t = {time}: unit-norm deviation {deviation}")]
    BlowUp { time: f64, deviation: f64 },
    #[error("cannot renormalize a (near-)zero vector at node {0}")]
    ZeroVector(usize),
    #[error("dt = {dt} violates the CFL bound {bound}")]
    CflViolation { dt: f64, bound: f64 },
    #[error("epsilon must lie in [0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("incompressible physics requires an advecting velocity field")]
    MissingVelocity,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Sphere-valued field: |u| = 1 nodewise up to the renormalization
/// tolerance (steps between renormalizations may drift further).
#[derive(Debug, Clone, PartialEq)]
pub struct DirectorField {
    field: Vec3Field,
}

impl DirectorField {
    /// Wrap a field that is already unit-valued to within `UNIT_TOL`.
    pub fn new(field: Vec3Field) -> Result<Self, DynamicsError> {
        let dev = unit_violation(&field);
        if dev * (2.0 + dev) > UNIT_TOL {
            // |v|^2 - 1 = dev*(2+dev) when |v| = 1+dev
            return Err(DynamicsError::BlowUp { time: 0.0, deviation: dev });
        }
        Ok(DirectorField { field })
    }

    /// Wrap without checking; used for intermediate states between
    /// renormalizations, where drift up to the blow-up guard is allowed.
    pub fn trusting(field: Vec3Field) -> Self {
        DirectorField { field }
    }

    pub fn field(&self) -> &Vec3Field {
        &self.field
    }

    pub fn into_field(self) -> Vec3Field {
        self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn values(&self) -> &[Vec3] {
        self.field.values()
    }

    pub fn unit_violation(&self) -> f64 {
        unit_violation(&self.field)
    }
}

/// max over nodes of | |u| - 1 |.
pub fn unit_violation(u: &Vec3Field) -> f64 {
    u.values().iter().fold(0.0f64, |m, v| m.max((v.norm() - 1.0).abs()))
}

/// Nodewise projection u / |u| onto the sphere.
pub fn renormalize(u: &Vec3Field) -> Result<DirectorField, DynamicsError> {
    let mut out = u.clone();
    for (i, v) in out.values_mut().iter_mut().enumerate() {
        let n = v.norm();
        if n < f64::EPSILON || !n.is_finite() {
            return Err(DynamicsError::ZeroVector(i));
        }
        *v = *v * (1.0 / n);
    }
    Ok(DirectorField { field: out })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExplicitEuler,
    Rk4,
}

impl Scheme {
    pub fn order(self) -> usize {
        match self {
            Scheme::ExplicitEuler => 1,
            Scheme::Rk4 => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Physics {
    Pure,
    Perturbed,
    LandauLifshitz,
    Incompressible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anisotropy {
    None,
    EasyAxis { axis: UnitVec3, strength: f64 },
}

/// Time-stepping configuration; `validate` enforces the CFL bound
/// dt <= cfl_safety * min_j h_j^2 / (2 d (1 + epsilon)).
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub renormalize_every: usize,
    pub physics: Physics,
    pub anisotropy: Anisotropy,
    pub include_demag: bool,
    pub cfl_safety: f64,
}

impl SolverConfig {
    pub fn stable_dt(grid: &Grid, epsilon: f64, cfl_safety: f64) -> f64 {
        let h = grid.min_spacing();
        cfl_safety * h * h / (2.0 * grid.dim() as f64 * (1.0 + epsilon))
    }

    pub fn validate(&self, grid: &Grid) -> Result<(), DynamicsError> {
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(DynamicsError::BadEpsilon(self.epsilon));
        }
        let bound = Self::stable_dt(grid, self.epsilon, self.cfl_safety);
        if !(self.dt > 0.0) || self.dt > bound * (1.0 + 1e-12) {
            return Err(DynamicsError::CflViolation { dt: self.dt, bound });
        }
        Ok(())
    }

    /// Validated constructor; clamps nothing, rejects invalid settings.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid: &Grid,
        epsilon: f64,
        dt: f64,
        scheme: Scheme,
        renormalize_every: usize,
        physics: Physics,
        anisotropy: Anisotropy,
        include_demag: bool,
        cfl_safety: f64,
    ) -> Result<Self, DynamicsError> {
        let cfg = SolverConfig {
            epsilon,
            dt,
            scheme,
            renormalize_every: renormalize_every.max(1),
            physics,
            anisotropy,
            include_demag,
            cfl_safety,
        };
        cfg.validate(grid)?;
        Ok(cfg)
    }
}

/// Tension field tau(u) = Lap u + |grad u|^2 u for maps into the sphere.
pub fn tension(u: &Vec3Field) -> Vec3Field {
    let lap = laplacian_neumann_vec3(u);
    let g2 = grad_norm_sq(u);
    lap.add(&u.mul_scalar_field(&g2))
}

/// Perturbed flow right-hand side: eps (Lap u + |grad u|^2 u) + u x Lap u.
pub fn rhs_perturbed(u: &Vec3Field, epsilon: f64) -> Vec3Field {
    let lap = laplacian_neumann_vec3(u);
    let spin = u.zip_map(&lap, Vec3::cross);
    if epsilon == 0.0 {
        return spin;
    }
    let g2 = grad_norm_sq(u);
    lap.add(&u.mul_scalar_field(&g2)).scale(epsilon).add(&spin)
}

/// Pure Schrodinger flow: u x Lap u.
pub fn rhs_schroedinger(u: &Vec3Field) -> Vec3Field {
    rhs_perturbed(u, 0.0)
}

/// Antiderivative for the rectangular-prism kernel integral
/// int z3 / r^3 dz1 dz2 dz3 (Nagy's closed form), with guards for the
/// vanishing-coefficient limits at box corners and edges.
fn prism_antiderivative(z1: f64, z2: f64, z3: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let r = (z1 * z1 + z2 * z2 + z3 * z3).sqrt();
    let mut v = 0.0;
    if z1.abs() > TINY {
        v += z1 * (z2 + r).ln();
    }
    if z2.abs() > TINY {
        v += z2 * (z1 + r).ln();
    }
    if z3.abs() > TINY && r > TINY {
        v -= z3 * (z1 * z2 / (z3 * r)).atan();
    }
    v
}

/// S(x) = int_Omega (x - y) / (4 pi |x - y|^3) dy, the exactly
/// integrated Newtonian kernel over the box; div S = 1 inside Omega.
fn prism_field(x: &[f64], extents: &[f64]) -> Vec3 {
    let lims: [[f64; 2]; 3] =
        [[-x[0], extents[0] - x[0]], [-x[1], extents[1] - x[1]], [-x[2], extents[2] - x[2]]];
    let mut s = [0.0f64; 3];
    for (c, out) in s.iter_mut().enumerate() {
        let a = (c + 1) % 3;
        let b = (c + 2) % 3;
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let sgn = if (i + j + k) % 2 == 1 { 1.0 } else { -1.0 };
                    acc += sgn * prism_antiderivative(lims[a][i], lims[b][j], lims[c][k]);
                }
            }
        }
        // acc sums the corner antiderivative whose mixed derivative is
        // -z_c / r^3, so acc = -int_B z_c / r^3 dz and
        // S_c = -(1/4pi) int_B z_c / r^3 dz = acc / 4pi.
        *out = acc / (4.0 * std::f64::consts::PI);
    }
    Vec3::new(s[0], s[1], s[2])
}

/// Derivative along one axis that makes no boundary-condition
/// assumption: central differences inside, second-order one-sided
/// stencils at the faces. Used for the demag potential, which is not a
/// Neumann field.
fn derivative_one_sided(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = f.grid();
    let n_ax = grid.counts()[axis];
    let h = grid.spacing(axis);
    let stride: usize = grid.counts()[axis + 1..].iter().product();
    let v = f.values();
    let mut out = ScalarField::zeros(grid);
    for flat in 0..grid.num_nodes() {
        let idx = grid.multi_index(flat)[axis];
        out.values_mut()[flat] = if n_ax < 3 {
            let (a, b) = if idx == 0 { (flat, flat + stride) } else { (flat - stride, flat) };
            (v[b] - v[a]) / h
        } else if idx == 0 {
            (-3.0 * v[flat] + 4.0 * v[flat + stride] - v[flat + 2 * stride]) / (2.0 * h)
        } else if idx == n_ax - 1 {
            (3.0 * v[flat] - 4.0 * v[flat - stride] + v[flat - 2 * stride]) / (2.0 * h)
        } else {
            (v[flat + stride] - v[flat - stride]) / (2.0 * h)
        };
    }
    out
}

/// Demagnetizing (stray) field on a 3D box: h_d = -grad phi with
/// phi(x) = int <grad N(x - y), u(y)> dy, N(z) = -1/(4 pi |z|).
///
/// Direct O(N^2) sum with singularity subtraction: the smooth part
/// <grad N(x-y), u(y) - u(x)> is summed by trapezoidal quadrature (the
/// singular node drops out), while the remaining <., u(x)> piece uses
/// the exactly integrated kernel [`prism_field`]. Constant fields are
/// therefore handled to quadrature-free accuracy.
pub fn demag_field(u: &Vec3Field) -> Result<Vec3Field, DynamicsError> {
    let grid = u.grid();
    if grid.dim() != 3 {
        return Err(DynamicsError::DimensionError);
    }
    let n = grid.num_nodes();
    let positions: Vec<[f64; 3]> = (0..n)
        .map(|flat| {
            let p = grid.node_position(&grid.multi_index(flat));
            [p[0], p[1], p[2]]
        })
        .collect();
    let weights: Vec<f64> = (0..n).map(|flat| grid.quad_weight(&grid.multi_index(flat))).collect();
    let vals = u.values();
    let inv4pi = 1.0 / (4.0 * std::f64::consts::PI);
    let mut phi = vec![0.0; n];
    for (i, phi_i) in phi.iter_mut().enumerate() {
        let xi = positions[i];
        let ui = vals[i];
        let mut acc = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let dx = xi[0] - positions[j][0];
            let dy = xi[1] - positions[j][1];
            let dz = xi[2] - positions[j][2];
            let r2 = dx * dx + dy * dy + dz * dz;
            let r3 = r2 * r2.sqrt();
            let v = vals[j] - ui;
            acc += weights[j] * (dx * v.x + dy * v.y + dz * v.z) / r3;
        }
        *phi_i = acc * inv4pi + prism_field(&xi, grid.extents()).dot(ui);
    }
    let phi = ScalarField::from_values(grid, phi)?;
    Ok(Vec3Field::from_components([
        derivative_one_sided(&phi, 0).scale(-1.0),
        derivative_one_sided(&phi, 1).scale(-1.0),
        derivative_one_sided(&phi, 2).scale(-1.0),
    ]))
}

/// Effective field h = Lap u + h_d - grad_u Phi.
///
/// Easy-axis Phi(u) = (K/2)(1 - <u,a>^2); the ambient gradient form
/// K <u,a> a is used since the -u x product annihilates the normal part.
pub fn ll_effective_field(u: &Vec3Field, config: &SolverConfig) -> Result<Vec3Field, DynamicsError> {
    let mut h = laplacian_neumann_vec3(u);
    if config.include_demag {
        h = h.add(&demag_field(u)?);
    }
    if let Anisotropy::EasyAxis { axis, strength } = config.anisotropy {
        let a = axis.as_vec();
        h = h.zip_map(u, |hv, uv| hv + a * (strength * uv.dot(a)));
    }
    Ok(h)
}

/// Landau-Lifshitz without dissipation: -u x h.
pub fn rhs_landau_lifshitz(u: &Vec3Field, config: &SolverConfig) -> Result<Vec3Field, DynamicsError> {
    let h = ll_effective_field(u, config)?;
    Ok(u.zip_map(&h, |uv, hv| -uv.cross(hv)))
}

/// Check that an advecting field is discretely divergence-free with
/// vanishing boundary flux.
pub fn validate_velocity(v: &[ScalarField]) -> Result<(), DynamicsError> {
    let div = crate::grid::divergence(v)?;
    let max_div = div.max_abs();
    if max_div > DIV_TOL {
        return Err(DynamicsError::NotDivergenceFree(max_div));
    }
    let grid = v[0].grid();
    let mut max_flux = 0.0f64;
    for flat in 0..grid.num_nodes() {
        let multi = grid.multi_index(flat);
        for (j, comp) in v.iter().enumerate() {
            let i = multi[j];
            if i == 0 || i == grid.counts()[j] - 1 {
                max_flux = max_flux.max(comp.values()[flat].abs());
            }
        }
    }
    if max_flux > DIV_TOL {
        return Err(DynamicsError::BoundaryFluxNonzero(max_flux));
    }
    Ok(())
}

/// Incompressible Schrodinger flow: -sum_j v_j d_j u + u x Lap u.
///
/// The velocity must pass [`validate_velocity`]; callers stepping in a
/// loop should validate once up front.
pub fn rhs_incompressible(u: &Vec3Field, v: &[ScalarField]) -> Result<Vec3Field, DynamicsError> {
    validate_velocity(v)?;
    Ok(rhs_incompressible_unchecked(u, v))
}

pub fn rhs_incompressible_unchecked(u: &Vec3Field, v: &[ScalarField]) -> Vec3Field {
    let mut out = rhs_schroedinger(u);
    for (j, comp) in v.iter().enumerate() {
        let du = derivative_neumann_vec3(u, j);
        let advect = du.mul_scalar_field(comp);
        out = out.sub(&advect);
    }
    out
}

/// Dispatch to the configured physics mode.
pub fn rhs(
    u: &Vec3Field,
    config: &SolverConfig,
    velocity: Option<&[ScalarField]>,
) -> Result<Vec3Field, DynamicsError> {
    match config.physics {
        Physics::Pure => Ok(rhs_schroedinger(u)),
        Physics::Perturbed => Ok(rhs_perturbed(u, config.epsilon)),
        Physics::LandauLifshitz => rhs_landau_lifshitz(u, config),
        Physics::Incompressible => {
            let v = velocity.ok_or(DynamicsError::MissingVelocity)?;
            Ok(rhs_incompressible_unchecked(u, v))
        }
    }
}

/// L^2 residual of the identity
/// Lap u = (1/(1+eps^2)) (eps u_t - u x u_t) - |grad u|^2 u,
/// algebraic in the continuum when u_t is the perturbed-flow RHS.
pub fn laplacian_consistency_residual(u: &Vec3Field, u_t: &Vec3Field, epsilon: f64) -> f64 {
    let lap = laplacian_neumann_vec3(u);
    let g2 = grad_norm_sq(u);
    let scale = 1.0 / (1.0 + epsilon * epsilon);
    let rhs = u
        .zip_map(u_t, |uv, tv| (tv * epsilon - uv.cross(tv)) * scale)
        .sub(&u.mul_scalar_field(&g2));
    l2_norm_sq_vec3(&lap.sub(&rhs)).sqrt()
}

/// One cosine mode of the angle fields: amplitude times
/// prod_j cos(k_j pi x_j / L_j).
#[derive(Debug, Clone, PartialEq)]
pub struct AngleMode {
    pub index: Vec<usize>,
    pub amplitude: f64,
}

/// Specification of Neumann-compatible sphere-valued initial data built
/// from spherical angles theta, phi that are finite cosine-mode sums.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub theta0: f64,
    pub phi0: f64,
    pub theta_modes: Vec<AngleMode>,
    pub phi_modes: Vec<AngleMode>,
}

impl InitialData {
    /// Constant north pole (all amplitudes zero).
    pub fn north_pole() -> Self {
        InitialData { theta0: 0.0, phi0: 0.0, theta_modes: Vec::new(), phi_modes: Vec::new() }
    }

    /// A single theta mode on top of a base latitude.
    pub fn single_mode(theta0: f64, index: Vec<usize>, amplitude: f64) -> Self {
        InitialData {
            theta0,
            phi0: 0.0,
            theta_modes: vec![AngleMode { index, amplitude }],
            phi_modes: Vec::new(),
        }
    }

    /// Seeded random amplitudes over low modes, reproducible bit-exactly
    /// through the explicit LCG.
    pub fn random(dim: usize, max_mode: usize, amplitude: f64, seed: u64) -> Self {
        let mut rng = Lcg64::new(seed);
        let draw = |rng: &mut Lcg64| {
            let mut modes = Vec::new();
            for _ in 0..3 {
                let index: Vec<usize> =
                    (0..dim).map(|_| (rng.next_f64() * (max_mode + 1) as f64) as usize).collect();
                let a = amplitude * rng.next_symmetric();
                modes.push(AngleMode { index, amplitude: a });
            }
            modes
        };
        let theta_modes = draw(&mut rng);
        let phi_modes = draw(&mut rng);
        InitialData { theta0: 0.8, phi0: 0.3, theta_modes, phi_modes }
    }
}

fn angle_field(grid: &Grid, base: f64, modes: &[AngleMode]) -> ScalarField {
    ScalarField::from_fn(grid, |x| {
        let mut v = base;
        for m in modes {
            let mut term = m.amplitude;
            for (j, &k) in m.index.iter().enumerate().take(grid.dim()) {
                term *= (k as f64 * std::f64::consts::PI * x[j] / grid.extents()[j]).cos();
            }
            v += term;
        }
        v
    })
}

/// Build u0 = (sin th cos ph, sin th sin ph, cos th) with theta and phi
/// finite cosine-mode sums, so the data is Neumann-compatible and unit
/// by construction.
pub fn make_initial_data(spec: &InitialData, grid: &Grid) -> DirectorField {
    let theta = angle_field(grid, spec.theta0, &spec.theta_modes);
    let phi = angle_field(grid, spec.phi0, &spec.phi_modes);
    let mut data = Vec::with_capacity(grid.num_nodes());
    for (t, p) in theta.values().iter().zip(phi.values()) {
        let (st, ct) = t.sin_cos();
        let (sp, cp) = p.sin_cos();
        data.push(Vec3::new(st * cp, st * sp, ct));
    }
    DirectorField::trusting(Vec3Field::from_values(grid, data).expect("sized by construction"))
}

/// Outcome of a single accepted step.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub time: f64,
    /// max | |u| - 1 | before renormalization.
    pub unit_violation: f64,
    pub renormalized: bool,
}

/// Sequential explicit time stepper for one trajectory.
pub struct Stepper<'a> {
    config: SolverConfig,
    velocity: Option<Vec<ScalarField>>,
    step_count: usize,
    time: f64,
    _grid: &'a Grid,
}

impl<'a> Stepper<'a> {
    pub fn new(
        grid: &'a Grid,
        config: SolverConfig,
        velocity: Option<Vec<ScalarField>>,
    ) -> Result<Self, DynamicsError> {
        config.validate(grid)?;
        if config.physics == Physics::Incompressible {
            let v = velocity.as_ref().ok_or(DynamicsError::MissingVelocity)?;
            validate_velocity(v)?;
        }
        Ok(Stepper { config, velocity, step_count: 0, time: 0.0, _grid: grid })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn eval_rhs(&self, u: &Vec3Field) -> Result<Vec3Field, DynamicsError> {
        rhs(u, &self.config, self.velocity.as_deref())
    }

    /// Advance one step; renormalizes every `renormalize_every` steps
    /// and raises `BlowUp` when the pre-renormalization state has left
    /// the sphere by more than the guard or turned non-finite.
    pub fn step(&mut self, u: &DirectorField) -> Result<(DirectorField, StepInfo), DynamicsError> {
        let dt = self.config.dt;
        let u0 = u.field();
        let proposed = match self.config.scheme {
            Scheme::ExplicitEuler => {
                let k = self.eval_rhs(u0)?;
                u0.zip_map(&k, |uv, kv| uv + kv * dt)
            }
            Scheme::Rk4 => {
                let k1 = self.eval_rhs(u0)?;
                let k2 = self.eval_rhs(&u0.zip_map(&k1, |uv, kv| uv + kv * (0.5 * dt)))?;
                let k3 = self.eval_rhs(&u0.zip_map(&k2, |uv, kv| uv + kv * (0.5 * dt)))?;
                let k4 = self.eval_rhs(&u0.zip_map(&k3, |uv, kv| uv + kv * dt))?;
                let mut out = u0.clone();
                for (o, (((a, b), c), d)) in out.values_mut().iter_mut().zip(
                    k1.values().iter().zip(k2.values()).zip(k3.values()).zip(k4.values()),
                ) {
                    *o += (*a + *b * 2.0 + *c * 2.0 + *d) * (dt / 6.0);
                }
                out
            }
        };
        self.step_count += 1;
        self.time = self.step_count as f64 * dt;
        let deviation = unit_violation(&proposed);
        let finite = proposed.values().iter().all(|v| v.is_finite());
        if !finite || deviation > BLOWUP_TOL {
            return Err(DynamicsError::BlowUp { time: self.time, deviation });
        }
        let renorm = self.step_count % self.config.renormalize_every == 0;
        let next = if renorm {
            renormalize(&proposed)?
        } else {
            DirectorField::trusting(proposed)
        };
        Ok((next, StepInfo { time: self.time, unit_violation: deviation, renormalized: renorm }))
    }
}

/// A stored solution path with uniform time step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DirectorField>,
    pub unit_violations: Vec<f64>,
    pub dt: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn final_state(&self) -> &DirectorField {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Run `n_steps` of the configured flow, storing every state.
pub fn run_trajectory(
    u0: DirectorField,
    config: &SolverConfig,
    velocity: Option<Vec<ScalarField>>,
    n_steps: usize,
) -> Result<Trajectory, DynamicsError> {
    let grid = u0.grid().clone();
    let mut stepper = Stepper::new(&grid, config.clone(), velocity)?;
    let mut times = vec![0.0];
    let mut states = vec![u0];
    let mut unit_violations = vec![states[0].unit_violation()];
    for _ in 0..n_steps {
        let (next, info) = stepper.step(states.last().expect("nonempty"))?;
        times.push(info.time);
        unit_violations.push(info.unit_violation);
        states.push(next);
    }
    Ok(Trajectory { times, states, unit_violations, dt: config.dt })
}
