//! Group elements and the group-level maps built on a structure-constant
//! table: composition, exponential/logarithm, adjoint representations and the
//! left trivialization of velocities.
//!
//! Two realizations exist. For su(2) the group is SU(2) as unit quaternions
//! with generators `e_α = q_α / 2` (`q = i, j, k`), so that `[e_α, e_β] = ε_{γαβ} e_γ`
//! and the group rate reads `ġ = ½ g ∘ Ω̂`. Every other algebra is realized on
//! the exponential chart with composition by the Baker–Campbell–Hausdorff series
//! truncated at fourth order, which is only accurate near the identity.

use nalgebra::{DMatrix, DVector, Matrix3, Quaternion};

use super::algebra::{AlgebraKind, AlgebraVector, DualVector, StructureConstants};
use crate::error::{check_dim, Error, Result};
use crate::Real;

/// A point of the group.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement<T: Real> {
    /// Unit quaternion `(w, x, y, z)`.
    Su2(Quaternion<T>),
    /// Exponential-chart coordinates `g^α`.
    Chart(DVector<T>),
}

impl<T: Real> GroupElement<T> {
    /// Normalized unit quaternion from `(w, x, y, z)`.
    pub fn unit_quaternion(w: T, x: T, y: T, z: T) -> Result<Self> {
        let q = Quaternion::new(w, x, y, z);
        let n = q.norm();
        if !n.is_finite() || n <= T::default_epsilon() {
            return Err(Error::InvalidArgument("quaternion must be finite and nonzero".into()));
        }
        Ok(Self::Su2(q / n))
    }

    pub fn chart(coords: &[T]) -> Self {
        Self::Chart(DVector::from_column_slice(coords))
    }

    /// Raw coordinates: `(w, x, y, z)` or `g^α`.
    pub fn coords(&self) -> Vec<T> {
        match self {
            Self::Su2(q) => vec![q.w, q.i, q.j, q.k],
            Self::Chart(u) => u.iter().copied().collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|x| x.is_finite())
    }

    pub fn quaternion(&self) -> Option<&Quaternion<T>> {
        match self {
            Self::Su2(q) => Some(q),
            Self::Chart(_) => None,
        }
    }

    /// Projects a quaternion back onto the unit sphere.
    pub fn renormalize(&mut self) {
        if let Self::Su2(q) = self {
            let n = q.norm();
            *q /= n;
        }
    }

    /// Adds a coordinate displacement (ℝ⁴ for quaternions), renormalizing.
    pub fn displaced(&self, delta: &DVector<T>) -> Self {
        match self {
            Self::Su2(q) => {
                let mut out = Self::Su2(Quaternion::new(
                    q.w + delta[0],
                    q.i + delta[1],
                    q.j + delta[2],
                    q.k + delta[3],
                ));
                out.renormalize();
                out
            }
            Self::Chart(u) => Self::Chart(u + delta),
        }
    }
}

/// A Lie group determined by its algebra, with the realization chosen from the
/// algebra kind.
#[derive(Debug, Clone, PartialEq)]
pub struct LieGroup<T: Real> {
    algebra: StructureConstants<T>,
}

impl<T: Real> LieGroup<T> {
    pub fn new(algebra: StructureConstants<T>) -> Self {
        Self { algebra }
    }

    pub fn su2() -> Self {
        Self::new(StructureConstants::su2())
    }

    pub fn algebra(&self) -> &StructureConstants<T> {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn is_su2(&self) -> bool {
        self.algebra.kind() == AlgebraKind::Su2
    }

    /// Dimension of the coordinate vector holding a group element.
    pub fn coord_dim(&self) -> usize {
        if self.is_su2() {
            4
        } else {
            self.dim()
        }
    }

    pub fn identity(&self) -> GroupElement<T> {
        if self.is_su2() {
            GroupElement::Su2(Quaternion::identity())
        } else {
            GroupElement::Chart(DVector::zeros(self.dim()))
        }
    }

    /// Checks that `g` belongs to this group's realization.
    pub fn validate(&self, g: &GroupElement<T>) -> Result<()> {
        match (self.is_su2(), g) {
            (true, GroupElement::Su2(q)) => {
                if (q.norm() - T::one()).abs() > T::tol(1e-9) {
                    return Err(Error::InvalidArgument("su(2) element is not a unit quaternion".into()));
                }
                Ok(())
            }
            (false, GroupElement::Chart(u)) => check_dim(self.dim(), u.len()),
            _ => Err(Error::InvalidArgument("group element realization does not match the group".into())),
        }
    }

    pub fn compose(&self, g: &GroupElement<T>, h: &GroupElement<T>) -> Result<GroupElement<T>> {
        self.validate(g)?;
        self.validate(h)?;
        Ok(match (g, h) {
            (GroupElement::Su2(a), GroupElement::Su2(b)) => {
                let mut out = GroupElement::Su2(a * b);
                out.renormalize();
                out
            }
            (GroupElement::Chart(x), GroupElement::Chart(y)) => GroupElement::Chart(self.chart_compose(x, y)?),
            _ => unreachable!("validated above"),
        })
    }

    pub fn inverse(&self, g: &GroupElement<T>) -> Result<GroupElement<T>> {
        self.validate(g)?;
        Ok(match g {
            GroupElement::Su2(q) => GroupElement::Su2(q.conjugate()),
            GroupElement::Chart(u) => GroupElement::Chart(-u),
        })
    }

    /// `log(exp x · exp y)` in exponential coordinates, by integrating
    /// `ż = L(z) y` over `s ∈ [0, 1]` (so that `exp z(s) = exp x · exp(s y)`).
    /// RK4 with step doubling and Richardson extrapolation, run until two
    /// successive estimates agree to rounding.
    fn chart_compose(&self, x: &DVector<T>, y: &DVector<T>) -> Result<DVector<T>> {
        if y.iter().all(|v| *v == T::zero()) {
            return Ok(x.clone());
        }
        let scale = T::one() + x.norm() + y.norm();
        let tol = T::tol(1e-15) * scale;
        let mut steps = 4usize;
        let mut coarse = self.chart_rk4(x, y, steps)?;
        let mut previous: Option<DVector<T>> = None;
        while steps < 1 << 14 {
            steps *= 2;
            let fine = self.chart_rk4(x, y, steps)?;
            let extrapolated = (&fine * T::lit(16.0) - &coarse) / T::lit(15.0);
            if let Some(prev) = &previous {
                if (&extrapolated - prev).amax() <= tol {
                    return Ok(extrapolated);
                }
            }
            previous = Some(extrapolated);
            coarse = fine;
        }
        previous.ok_or_else(|| Error::Numerical("chart composition did not converge".into()))
    }

    fn chart_rk4(&self, x: &DVector<T>, y: &DVector<T>, steps: usize) -> Result<DVector<T>> {
        let h = T::one() / T::lit(steps as f64);
        let half = h * T::lit(0.5);
        let f = |z: &DVector<T>| -> Result<DVector<T>> { Ok(self.chart_left_jacobian(z)? * y) };
        let mut z = x.clone();
        for _ in 0..steps {
            let k1 = f(&z)?;
            let k2 = f(&(&z + &k1 * half))?;
            let k3 = f(&(&z + &k2 * half))?;
            let k4 = f(&(&z + &k3 * h))?;
            z += (k1 + (k2 + k3) * T::lit(2.0) + k4) * (h / T::lit(6.0));
        }
        Ok(z)
    }

    pub fn exp(&self, u: &AlgebraVector<T>) -> Result<GroupElement<T>> {
        check_dim(self.dim(), u.dim())?;
        if !self.is_su2() {
            return Ok(GroupElement::Chart(u.0.clone()));
        }
        let theta = u.norm();
        let half = theta * T::lit(0.5);
        // sin(θ/2)/θ, with its series near zero
        let sinc = if theta < T::lit(1e-4) {
            T::lit(0.5) - theta * theta / T::lit(48.0)
        } else {
            half.sin() / theta
        };
        Ok(GroupElement::Su2(Quaternion::new(half.cos(), u[0] * sinc, u[1] * sinc, u[2] * sinc)))
    }

    /// Principal logarithm. For SU(2) the half-angle lies in `[0, π)`; the
    /// antipode `−1` has no principal logarithm and is rejected.
    pub fn log(&self, g: &GroupElement<T>) -> Result<AlgebraVector<T>> {
        self.validate(g)?;
        match g {
            GroupElement::Chart(u) => Ok(AlgebraVector(u.clone())),
            GroupElement::Su2(q) => {
                let v = q.imag();
                let s = v.norm();
                let w = q.w;
                if w < T::zero() && s < T::lit(1e-10) {
                    return Err(Error::Domain("logarithm undefined at the antipode of the identity".into()));
                }
                let factor = if s < T::lit(1e-6) {
                    // 2 atan2(s, w) / s for w > 0
                    (T::lit(2.0) / w) * (T::one() - s * s / (T::lit(3.0) * w * w))
                } else {
                    T::lit(2.0) * s.atan2(w) / s
                };
                Ok(AlgebraVector::from_slice(&[v[0] * factor, v[1] * factor, v[2] * factor]))
            }
        }
    }

    /// `Ad(g)`, acting on algebra vectors.
    pub fn adjoint(&self, g: &GroupElement<T>) -> Result<DMatrix<T>> {
        self.validate(g)?;
        Ok(match g {
            GroupElement::Su2(q) => {
                let r = rotation_matrix(q);
                DMatrix::from_fn(3, 3, |i, j| r[(i, j)])
            }
            GroupElement::Chart(u) => self.algebra.ad_matrix(&AlgebraVector(u.clone()))?.exp(),
        })
    }

    /// `(Ad(g), K(g))` with `K_μ^ν(g) = Ad^ν_μ(g⁻¹)`, so that `π^R = K(g) π^L`.
    pub fn adjoint_reps(&self, g: &GroupElement<T>) -> Result<(DMatrix<T>, DMatrix<T>)> {
        let ad = self.adjoint(g)?;
        let ad_inv = self.adjoint(&self.inverse(g)?)?;
        Ok((ad, ad_inv.transpose()))
    }

    /// Coadjoint action `K(g)` on a dual vector.
    pub fn coadjoint_act(&self, g: &GroupElement<T>, pi: &DualVector<T>) -> Result<DualVector<T>> {
        check_dim(self.dim(), pi.dim())?;
        let (_, k) = self.adjoint_reps(g)?;
        Ok(DualVector(k * &pi.0))
    }

    /// Left-trivialized velocity `Ω_L` of the tangent vector `gdot` at `g`.
    /// For SU(2) `gdot` is a quaternion rate orthogonal to `g` in ℝ⁴.
    pub fn body_velocity(&self, g: &GroupElement<T>, gdot: &DVector<T>) -> Result<AlgebraVector<T>> {
        self.validate(g)?;
        check_dim(self.coord_dim(), gdot.len())?;
        match g {
            GroupElement::Su2(q) => {
                let qd = Quaternion::new(gdot[0], gdot[1], gdot[2], gdot[3]);
                let radial = q.coords.dot(&qd.coords);
                if radial.abs() > T::lit(1e-8) * T::one().max(qd.norm()) {
                    return Err(Error::InvalidArgument(format!(
                        "quaternion rate is not tangent to the unit sphere (<g, gdot> = {:e})",
                        radial.to_f64_lossy()
                    )));
                }
                let body = q.conjugate() * qd;
                let two = T::lit(2.0);
                Ok(AlgebraVector::from_slice(&[two * body.i, two * body.j, two * body.k]))
            }
            GroupElement::Chart(_) => {
                let l = self.left_jacobian(g)?;
                let sol = l
                    .lu()
                    .solve(gdot)
                    .ok_or_else(|| Error::Numerical("left-invariant frame is singular".into()))?;
                Ok(AlgebraVector(sol))
            }
        }
    }

    /// Inverse of [`body_velocity`](Self::body_velocity): the coordinate rate
    /// `ġ` produced by body velocity `Ω`.
    pub fn group_rate(&self, g: &GroupElement<T>, omega: &AlgebraVector<T>) -> Result<DVector<T>> {
        self.validate(g)?;
        check_dim(self.dim(), omega.dim())?;
        self.group_rate_unchecked(g, omega)
    }

    pub(crate) fn group_rate_unchecked(&self, g: &GroupElement<T>, omega: &AlgebraVector<T>) -> Result<DVector<T>> {
        Ok(match g {
            GroupElement::Su2(q) => {
                let half = T::lit(0.5);
                let rate = q * Quaternion::new(T::zero(), omega[0], omega[1], omega[2]);
                DVector::from_column_slice(&[rate.w * half, rate.i * half, rate.j * half, rate.k * half])
            }
            GroupElement::Chart(u) => self.chart_left_jacobian(u)? * &omega.0,
        })
    }

    /// `L^μ_α(g, e)`: the left-invariant fields `e^L_α` expressed in the
    /// exponential (holonomic) chart, one column per `α`.
    ///
    /// For SU(2) this differentiates the quaternion logarithm along
    /// `½ g ∘ ê_α`; for generic algebras it is `ad(u) / (1 − e^{−ad(u)})`.
    pub fn left_jacobian(&self, g: &GroupElement<T>) -> Result<DMatrix<T>> {
        self.validate(g)?;
        match g {
            GroupElement::Chart(u) => self.chart_left_jacobian(u),
            GroupElement::Su2(q) => {
                // log is only differentiable inside the principal domain
                self.log(g)?;
                let dlog = log_differential(q);
                let mut l = DMatrix::zeros(3, 3);
                for a in 0..3 {
                    let rate = self.group_rate_unchecked(g, &AlgebraVector::basis(3, a))?;
                    let col = dlog * nalgebra::Vector4::new(rate[0], rate[1], rate[2], rate[3]);
                    for mu in 0..3 {
                        l[(mu, a)] = col[mu];
                    }
                }
                Ok(l)
            }
        }
    }

    fn chart_left_jacobian(&self, u: &DVector<T>) -> Result<DMatrix<T>> {
        let n = self.dim();
        let ad = self.algebra.ad_matrix(&AlgebraVector(u.clone()))?;
        // (1 − e^{−A})/A is the top-right block of exp([[−A, 1], [0, 0]])
        let mut block = DMatrix::zeros(2 * n, 2 * n);
        block.view_mut((0, 0), (n, n)).copy_from(&(-ad));
        block.view_mut((0, n), (n, n)).fill_with_identity();
        let j = block.exp().view((0, n), (n, n)).into_owned();
        j.try_inverse()
            .ok_or_else(|| Error::Domain("exponential chart is singular at this point".into()))
    }

    /// `L^α_μ(g⁻¹, g)`: coefficients of the left-invariant one-forms `ε^α_L`
    /// on the holonomic differentials.
    pub fn left_coframe(&self, g: &GroupElement<T>) -> Result<DMatrix<T>> {
        self.left_jacobian(g)?
            .try_inverse()
            .ok_or_else(|| Error::Numerical("left-invariant frame is singular".into()))
    }

    /// `g · exp(t e_α)`, the flow of the left-invariant field `e^L_α`.
    pub fn flow_left_invariant(&self, g: &GroupElement<T>, axis: usize, t: T) -> Result<GroupElement<T>> {
        let step = self.exp(&AlgebraVector::basis(self.dim(), axis).scale(t))?;
        self.compose(g, &step)
    }
}

/// Rotation matrix of a unit quaternion; equals `Ad(g)` on su(2).
pub(crate) fn rotation_matrix<T: Real>(q: &Quaternion<T>) -> Matrix3<T> {
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    let one = T::one();
    let two = T::lit(2.0);
    Matrix3::new(
        one - two * (y * y + z * z),
        two * (x * y - w * z),
        two * (x * z + w * y),
        two * (x * y + w * z),
        one - two * (x * x + z * z),
        two * (y * z - w * x),
        two * (x * z - w * y),
        two * (y * z + w * x),
        one - two * (x * x + y * y),
    )
}

/// Jacobian `∂u/∂q` (3×4, columns `w, x, y, z`) of `u = 2 atan2(|v|, w) v/|v|`.
fn log_differential<T: Real>(q: &Quaternion<T>) -> nalgebra::Matrix3x4<T> {
    let w = q.w;
    let v = q.imag();
    let s = v.norm();
    let r2 = w * w + s * s;
    let two = T::lit(2.0);
    // u = a(s, w) v with a = θ/s; ∂u/∂v = a I + c v vᵀ
    let (a, c) = if s < T::lit(1e-6) {
        (two / w, T::lit(-4.0 / 3.0) / (w * w * w))
    } else {
        let theta = two * s.atan2(w);
        (theta / s, two * w / (s * s * r2) - theta / (s * s * s))
    };
    let mut j = nalgebra::Matrix3x4::zeros();
    for i in 0..3 {
        j[(i, 0)] = -two * v[i] / r2;
        for k in 0..3 {
            let delta = if i == k { a } else { T::zero() };
            j[(i, k + 1)] = delta + c * v[i] * v[k];
        }
    }
    j
}
