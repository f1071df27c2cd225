//! Pointwise operations on the unit sphere S^2 in R^3: cross products,
//! tangent projection, geodesic distance and parallel transport along
//! minimizing great-circle geodesics.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use thiserror::Error;

/// Default tolerance on | |v|^2 - 1 | when constructing a [`UnitVec3`].
pub const UNIT_TOL: f64 = 1e-12;
/// Default tolerance on |<vec, base>| for a [`TangentVec`].
pub const TANGENCY_TOL: f64 = 1e-10;
/// Transport is refused when 1 + <p,q> falls at or below this guard.
pub const ANTIPODAL_GUARD: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("points are (nearly) antipodal: no unique minimizing geodesic")]
    AntipodalPoints,
    #[error("vector of norm {0} cannot be normalized to the unit sphere")]
    NotUnit(f64),
    #[error("vector is not tangent at its base point (defect {0})")]
    NotTangent(f64),
}

/// A point or vector in ambient R^3.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Right-handed cross product.
    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Free-function form of the cross product.
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    a.cross(b)
}

/// A point on the unit sphere, |v| = 1 up to [`UNIT_TOL`] at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    pub fn new(v: Vec3) -> Result<Self, GeometryError> {
        Self::with_tol(v, UNIT_TOL)
    }

    pub fn with_tol(v: Vec3, unit_tol: f64) -> Result<Self, GeometryError> {
        let n2 = v.norm_sq();
        if !n2.is_finite() || (n2 - 1.0).abs() > unit_tol {
            return Err(GeometryError::NotUnit(n2.sqrt()));
        }
        Ok(UnitVec3(v))
    }

    /// Normalize an arbitrary nonzero vector onto the sphere.
    pub fn normalize(v: Vec3) -> Result<Self, GeometryError> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(GeometryError::NotUnit(n));
        }
        Ok(UnitVec3(v * (1.0 / n)))
    }

    pub fn as_vec(self) -> Vec3 {
        self.0
    }
}

/// A tangent vector of S^2 stored with its base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVec {
    pub base: UnitVec3,
    pub vec: Vec3,
}

impl TangentVec {
    pub fn new(base: UnitVec3, vec: Vec3) -> Result<Self, GeometryError> {
        let defect = vec.dot(base.as_vec()).abs();
        if defect > TANGENCY_TOL {
            return Err(GeometryError::NotTangent(defect));
        }
        Ok(TangentVec { base, vec })
    }
}

/// Orthogonal projection of `w` onto the tangent plane at `u`:
/// w - <w,u> u.  Idempotent.
pub fn tangent_project(u: UnitVec3, w: Vec3) -> TangentVec {
    let uv = u.as_vec();
    TangentVec {
        base: u,
        vec: w - uv * w.dot(uv),
    }
}

/// Geodesic (great-circle) distance in radians, in [0, pi].
///
/// The dot product is clamped to [-1, 1]; floating products can exceed 1
/// by a few ulps.
pub fn geodesic_distance(p: UnitVec3, q: UnitVec3) -> f64 {
    p.as_vec().dot(q.as_vec()).clamp(-1.0, 1.0).acos()
}

/// Parallel transport of a tangent vector at `q` to the tangent plane at
/// `p` along the unique minimizing geodesic.
///
/// Closed form: X - (<X,p> / (1 + <p,q>)) (p + q).  Fails when p and q
/// are antipodal within [`ANTIPODAL_GUARD`].
pub fn parallel_transport(
    p: UnitVec3,
    q: UnitVec3,
    x: TangentVec,
) -> Result<TangentVec, GeometryError> {
    let pv = p.as_vec();
    let qv = q.as_vec();
    let denom = 1.0 + pv.dot(qv);
    if denom <= ANTIPODAL_GUARD {
        return Err(GeometryError::AntipodalPoints);
    }
    let xv = x.vec;
    let transported = xv - (pv + qv) * (xv.dot(pv) / denom);
    Ok(TangentVec { base: p, vec: transported })
}

/// Transport of a raw ambient vector, without tangency bookkeeping.
///
/// Used nodewise on discrete gradient columns, which are only tangent up
/// to discretization error.
pub fn transport_ambient(p: UnitVec3, q: UnitVec3, x: Vec3) -> Result<Vec3, GeometryError> {
    let pv = p.as_vec();
    let qv = q.as_vec();
    let denom = 1.0 + pv.dot(qv);
    if denom <= ANTIPODAL_GUARD {
        return Err(GeometryError::AntipodalPoints);
    }
    Ok(x - (pv + qv) * (x.dot(pv) / denom))
}
