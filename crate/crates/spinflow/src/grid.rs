//! Axis-aligned box discretization with Neumann-consistent differential
//! operators, trapezoidal quadrature and discrete Sobolev norms.
//!
//! Nodes are vertex-centered with spacings h_j = L_j / (N_j - 1), stored
//! row-major. Homogeneous Neumann conditions are imposed by ghost-node
//! mirror reflection (ghost value = first interior value), which makes
//! sampled cosine modes exact eigenvectors of the Laplacian stencil.

use thiserror::Error;

use crate::geometry::Vec3;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 4 nodes per axis, got {0}")]
    GridTooSmall(usize),
    #[error("grid dimension must be 1, 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("box extents must be positive")]
    BadExtent,
    #[error("fields live on different grids")]
    GridMismatch,
}

/// Axis-aligned box [0,L_1] x ... x [0,L_d] sampled on N_j vertex nodes
/// per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    counts: Vec<usize>,
    extents: Vec<f64>,
    spacings: Vec<f64>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(counts: &[usize], extents: &[f64]) -> Result<Self, GridError> {
        let dim = counts.len();
        if dim == 0 || dim > 3 || extents.len() != dim {
            return Err(GridError::BadDimension(dim));
        }
        for &n in counts {
            if n < 4 {
                return Err(GridError::GridTooSmall(n));
            }
        }
        for &l in extents {
            if !(l > 0.0) || !l.is_finite() {
                return Err(GridError::BadExtent);
            }
        }
        let spacings: Vec<f64> = counts
            .iter()
            .zip(extents)
            .map(|(&n, &l)| l / (n - 1) as f64)
            .collect();
        let mut strides = vec![1usize; dim];
        for j in (0..dim.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * counts[j + 1];
        }
        Ok(Grid { counts: counts.to_vec(), extents: extents.to_vec(), spacings, strides })
    }

    /// Unit box helper with the same node count along every axis.
    pub fn uniform(dim: usize, n: usize, l: f64) -> Result<Self, GridError> {
        Grid::new(&vec![n; dim], &vec![l; dim])
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacings[axis]
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacings.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn num_nodes(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut multi = vec![0usize; self.dim()];
        for j in 0..self.dim() {
            multi[j] = flat / self.strides[j];
            flat %= self.strides[j];
        }
        multi
    }

    pub fn node_position(&self, multi: &[usize]) -> Vec<f64> {
        multi
            .iter()
            .zip(&self.spacings)
            .map(|(&i, &h)| i as f64 * h)
            .collect()
    }

    /// Trapezoidal quadrature weight of a node (product of per-axis
    /// weights, 1/2 on boundary layers), including the cell volume.
    pub fn quad_weight(&self, multi: &[usize]) -> f64 {
        let mut w = 1.0;
        for (j, &i) in multi.iter().enumerate() {
            let axis_w = if i == 0 || i == self.counts[j] - 1 { 0.5 } else { 1.0 };
            w *= axis_w * self.spacings[j];
        }
        w
    }

    /// True if the node touches the boundary along any axis.
    pub fn is_boundary(&self, multi: &[usize]) -> bool {
        multi
            .iter()
            .zip(&self.counts)
            .any(|(&i, &n)| i == 0 || i == n - 1)
    }

    /// True if the node is at least `margin` layers away from every face.
    pub fn is_interior_with_margin(&self, multi: &[usize], margin: usize) -> bool {
        multi
            .iter()
            .zip(&self.counts)
            .all(|(&i, &n)| i >= margin && i + margin < n)
    }
}

/// Real scalar samples on grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField { grid: grid.clone(), data: vec![0.0; grid.num_nodes()] }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        ScalarField { grid: grid.clone(), data: vec![c; grid.num_nodes()] }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.num_nodes());
        for flat in 0..grid.num_nodes() {
            let multi = grid.multi_index(flat);
            data.push(f(&grid.node_position(&multi)));
        }
        ScalarField { grid: grid.clone(), data }
    }

    pub fn from_values(grid: &Grid, data: Vec<f64>) -> Result<Self, GridError> {
        if data.len() != grid.num_nodes() {
            return Err(GridError::GridMismatch);
        }
        Ok(ScalarField { grid: grid.clone(), data })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        ScalarField { grid: self.grid.clone(), data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        assert_eq!(self.grid, other.grid);
        ScalarField {
            grid: self.grid.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        assert_eq!(self.grid, other.grid);
        ScalarField {
            grid: self.grid.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Ambient R^3-valued samples on grid nodes (magnetization, right-hand
/// sides, effective fields).
#[derive(Debug, Clone, PartialEq)]
pub struct Vec3Field {
    grid: Grid,
    data: Vec<Vec3>,
}

impl Vec3Field {
    pub fn zeros(grid: &Grid) -> Self {
        Vec3Field { grid: grid.clone(), data: vec![Vec3::ZERO; grid.num_nodes()] }
    }

    pub fn constant(grid: &Grid, v: Vec3) -> Self {
        Vec3Field { grid: grid.clone(), data: vec![v; grid.num_nodes()] }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Vec3) -> Self {
        let mut data = Vec::with_capacity(grid.num_nodes());
        for flat in 0..grid.num_nodes() {
            let multi = grid.multi_index(flat);
            data.push(f(&grid.node_position(&multi)));
        }
        Vec3Field { grid: grid.clone(), data }
    }

    pub fn from_values(grid: &Grid, data: Vec<Vec3>) -> Result<Self, GridError> {
        if data.len() != grid.num_nodes() {
            return Err(GridError::GridMismatch);
        }
        Ok(Vec3Field { grid: grid.clone(), data })
    }

    pub fn from_components(comps: [ScalarField; 3]) -> Vec3Field {
        let [x, y, z] = comps;
        assert_eq!(x.grid, y.grid);
        assert_eq!(x.grid, z.grid);
        let data = x
            .data
            .iter()
            .zip(y.data.iter().zip(&z.data))
            .map(|(&a, (&b, &c))| Vec3::new(a, b, c))
            .collect();
        Vec3Field { grid: x.grid, data }
    }

    pub fn component(&self, c: usize) -> ScalarField {
        let data = self
            .data
            .iter()
            .map(|v| match c {
                0 => v.x,
                1 => v.y,
                _ => v.z,
            })
            .collect();
        ScalarField { grid: self.grid.clone(), data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Vec3] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [Vec3] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> Vec3Field {
        Vec3Field { grid: self.grid.clone(), data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Vec3Field, f: impl Fn(Vec3, Vec3) -> Vec3) -> Vec3Field {
        assert_eq!(self.grid, other.grid);
        Vec3Field {
            grid: self.grid.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Vec3Field {
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &Vec3Field) -> Vec3Field {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Vec3Field) -> Vec3Field {
        self.zip_map(other, |a, b| a - b)
    }

    /// Multiply nodewise by a scalar field.
    pub fn mul_scalar_field(&self, s: &ScalarField) -> Vec3Field {
        assert_eq!(self.grid, s.grid);
        Vec3Field {
            grid: self.grid.clone(),
            data: self.data.iter().zip(&s.data).map(|(&v, &c)| v * c).collect(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }
}

// Mirror-reflected neighbor index: the ghost outside the boundary takes
// the value of the first interior node.
#[inline]
fn mirror_down(i: usize) -> usize {
    if i == 0 {
        1
    } else {
        i - 1
    }
}

#[inline]
fn mirror_up(i: usize, n: usize) -> usize {
    if i == n - 1 {
        n - 2
    } else {
        i + 1
    }
}

/// Second-order central Laplacian with homogeneous Neumann boundary
/// conditions imposed by mirror ghosts.
pub fn laplacian_neumann(f: &ScalarField) -> ScalarField {
    let grid = &f.grid;
    let dim = grid.dim();
    let mut out = vec![0.0; grid.num_nodes()];
    let mut multi = vec![0usize; dim];
    for flat in 0..grid.num_nodes() {
        decode(grid, flat, &mut multi);
        let mut acc = 0.0;
        for j in 0..dim {
            let i = multi[j];
            let n = grid.counts[j];
            let s = grid.strides[j];
            let center = flat;
            let down = flat - i * s + mirror_down(i) * s;
            let up = flat - i * s + mirror_up(i, n) * s;
            let h2 = grid.spacings[j] * grid.spacings[j];
            acc += (f.data[up] - 2.0 * f.data[center] + f.data[down]) / h2;
        }
        out[flat] = acc;
    }
    ScalarField { grid: grid.clone(), data: out }
}

/// Central derivative along one axis with mirror ghosts; the normal
/// component vanishes exactly at boundary nodes.
pub fn derivative_neumann(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = &f.grid;
    let mut out = vec![0.0; grid.num_nodes()];
    let mut multi = vec![0usize; grid.dim()];
    let s = grid.strides[axis];
    let n = grid.counts[axis];
    let two_h = 2.0 * grid.spacings[axis];
    for flat in 0..grid.num_nodes() {
        decode(grid, flat, &mut multi);
        let i = multi[axis];
        let down = flat - i * s + mirror_down(i) * s;
        let up = flat - i * s + mirror_up(i, n) * s;
        out[flat] = (f.data[up] - f.data[down]) / two_h;
    }
    ScalarField { grid: grid.clone(), data: out }
}

/// All spatial derivatives of a scalar field.
pub fn gradient_neumann(f: &ScalarField) -> Vec<ScalarField> {
    (0..f.grid.dim()).map(|j| derivative_neumann(f, j)).collect()
}

/// Central divergence of a d-component vector field, using the same
/// mirrored stencil per component.
pub fn divergence(v: &[ScalarField]) -> Result<ScalarField, GridError> {
    let grid = v.first().ok_or(GridError::GridMismatch)?.grid.clone();
    if v.len() != grid.dim() {
        return Err(GridError::GridMismatch);
    }
    let mut out = ScalarField::zeros(&grid);
    for (j, comp) in v.iter().enumerate() {
        if comp.grid != grid {
            return Err(GridError::GridMismatch);
        }
        let d = derivative_neumann(comp, j);
        out = out.add(&d);
    }
    Ok(out)
}

/// Trapezoidal product quadrature over the box.
pub fn integrate(f: &ScalarField) -> f64 {
    let grid = &f.grid;
    let mut multi = vec![0usize; grid.dim()];
    let mut acc = 0.0;
    for flat in 0..grid.num_nodes() {
        decode(grid, flat, &mut multi);
        acc += grid.quad_weight(&multi) * f.data[flat];
    }
    acc
}

/// L^2 inner product of two scalar fields under trapezoidal quadrature.
pub fn l2_inner(f: &ScalarField, g: &ScalarField) -> f64 {
    assert_eq!(f.grid, g.grid);
    let grid = &f.grid;
    let mut multi = vec![0usize; grid.dim()];
    let mut acc = 0.0;
    for flat in 0..grid.num_nodes() {
        decode(grid, flat, &mut multi);
        acc += grid.quad_weight(&multi) * f.data[flat] * g.data[flat];
    }
    acc
}

#[inline]
fn decode(grid: &Grid, mut flat: usize, multi: &mut [usize]) {
    for j in 0..grid.counts.len() {
        multi[j] = flat / grid.strides[j];
        flat %= grid.strides[j];
    }
}

// Componentwise lifts to ambient-vector fields.

pub fn laplacian_neumann_vec3(u: &Vec3Field) -> Vec3Field {
    Vec3Field::from_components([
        laplacian_neumann(&u.component(0)),
        laplacian_neumann(&u.component(1)),
        laplacian_neumann(&u.component(2)),
    ])
}

pub fn derivative_neumann_vec3(u: &Vec3Field, axis: usize) -> Vec3Field {
    Vec3Field::from_components([
        derivative_neumann(&u.component(0), axis),
        derivative_neumann(&u.component(1), axis),
        derivative_neumann(&u.component(2), axis),
    ])
}

/// Spatial derivatives d_j u, one ambient-vector field per axis.
pub fn gradient_neumann_vec3(u: &Vec3Field) -> Vec<Vec3Field> {
    (0..u.grid.dim()).map(|j| derivative_neumann_vec3(u, j)).collect()
}

/// |grad u|^2 summed over components and directions, as a scalar field.
pub fn grad_norm_sq(u: &Vec3Field) -> ScalarField {
    let grads = gradient_neumann_vec3(u);
    let mut data = vec![0.0; u.grid.num_nodes()];
    for g in &grads {
        for (acc, v) in data.iter_mut().zip(&g.data) {
            *acc += v.norm_sq();
        }
    }
    ScalarField { grid: u.grid.clone(), data }
}

/// Integral of |u|^2.
pub fn l2_norm_sq_vec3(u: &Vec3Field) -> f64 {
    let grid = &u.grid;
    let mut multi = vec![0usize; grid.dim()];
    let mut acc = 0.0;
    for flat in 0..grid.num_nodes() {
        decode(grid, flat, &mut multi);
        acc += grid.quad_weight(&multi) * u.data[flat].norm_sq();
    }
    acc
}

/// Integral of <u, v>.
pub fn l2_inner_vec3(u: &Vec3Field, v: &Vec3Field) -> f64 {
    assert_eq!(u.grid, v.grid);
    let grid = &u.grid;
    let mut multi = vec![0usize; grid.dim()];
    let mut acc = 0.0;
    for flat in 0..grid.num_nodes() {
        decode(grid, flat, &mut multi);
        acc += grid.quad_weight(&multi) * u.data[flat].dot(v.data[flat]);
    }
    acc
}

fn h1_norm_scalar(f: &ScalarField) -> f64 {
    let mut sq = l2_inner(f, f);
    for g in gradient_neumann(f) {
        sq += l2_inner(&g, &g);
    }
    sq.sqrt()
}

/// Discrete Sobolev norm of a scalar field for k = 0..3.
///
/// H^0 and H^1 are computed directly; H^2 and H^3 use the equivalent
/// Neumann form ||u||_{H^{k+2}} = ||u||_{L^2} + ||Lap u||_{H^k}.
pub fn sobolev_norm(f: &ScalarField, k: usize) -> f64 {
    assert!(k <= 3, "sobolev_norm supports k = 0..3");
    match k {
        0 => l2_inner(f, f).sqrt(),
        1 => h1_norm_scalar(f),
        2 => {
            let lap = laplacian_neumann(f);
            l2_inner(f, f).sqrt() + l2_inner(&lap, &lap).sqrt()
        }
        _ => {
            let lap = laplacian_neumann(f);
            l2_inner(f, f).sqrt() + h1_norm_scalar(&lap)
        }
    }
}

fn h1_norm_vec3(u: &Vec3Field) -> f64 {
    let mut sq = l2_norm_sq_vec3(u);
    for g in gradient_neumann_vec3(u) {
        sq += l2_norm_sq_vec3(&g);
    }
    sq.sqrt()
}

/// Discrete Sobolev norm of an ambient-vector field for k = 0..3.
pub fn sobolev_norm_vec3(u: &Vec3Field, k: usize) -> f64 {
    assert!(k <= 3, "sobolev_norm supports k = 0..3");
    match k {
        0 => l2_norm_sq_vec3(u).sqrt(),
        1 => h1_norm_vec3(u),
        2 => {
            let lap = laplacian_neumann_vec3(u);
            l2_norm_sq_vec3(u).sqrt() + l2_norm_sq_vec3(&lap).sqrt()
        }
        _ => {
            let lap = laplacian_neumann_vec3(u);
            l2_norm_sq_vec3(u).sqrt() + h1_norm_vec3(&lap)
        }
    }
}

/// One face-entry of a boundary field: node, outward normal, value.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryEntry {
    pub flat: usize,
    pub axis: usize,
    /// +1.0 on the far face, -1.0 on the near face.
    pub sign: f64,
    pub value: f64,
}

/// Values on boundary nodes, one entry per (node, face) pair; edge and
/// corner nodes appear once per touching face.
#[derive(Debug, Clone)]
pub struct BoundaryField {
    pub entries: Vec<BoundaryEntry>,
}

impl BoundaryField {
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, e| m.max(e.value.abs()))
    }
}

/// One-sided second-order normal derivative at each boundary node.
///
/// This is the residual check for the Neumann condition; the mirror
/// convention used by the interior operators satisfies it identically,
/// so the one-sided stencil is what detects incompatible data.
pub fn boundary_normal_derivative(f: &ScalarField) -> BoundaryField {
    let grid = &f.grid;
    let dim = grid.dim();
    let mut entries = Vec::new();
    let mut multi = vec![0usize; dim];
    for flat in 0..grid.num_nodes() {
        decode(grid, flat, &mut multi);
        for j in 0..dim {
            let i = multi[j];
            let n = grid.counts[j];
            let s = grid.strides[j];
            let two_h = 2.0 * grid.spacings[j];
            if i == 0 {
                // d/dnu = -d/dx_j at the near face.
                let v = (3.0 * f.data[flat] - 4.0 * f.data[flat + s] + f.data[flat + 2 * s]) / two_h;
                entries.push(BoundaryEntry { flat, axis: j, sign: -1.0, value: v });
            } else if i == n - 1 {
                let v = (3.0 * f.data[flat] - 4.0 * f.data[flat - s] + f.data[flat - 2 * s]) / two_h;
                entries.push(BoundaryEntry { flat, axis: j, sign: 1.0, value: v });
            }
        }
    }
    BoundaryField { entries }
}

/// Maximum over components of the one-sided normal derivative of an
/// ambient-vector field.
pub fn boundary_normal_derivative_vec3(u: &Vec3Field) -> f64 {
    (0..3)
        .map(|c| boundary_normal_derivative(&u.component(c)).max_abs())
        .fold(0.0f64, f64::max)
}
