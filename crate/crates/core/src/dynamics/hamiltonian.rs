use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::lie_core::{AlgebraVector, DualVector, GroupElement, LieGroup, StructureConstants};
use crate::Real;

/// Inertia `I_{μν}` together with its inverse `𝓘^{αβ}`, which is what the
/// kinetic energy `K = ½ 𝓘^{αβ} π_α π_β` uses.
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaTensor<T: Real> {
    inertia: DMatrix<T>,
    inverse: DMatrix<T>,
}

impl<T: Real> InertiaTensor<T> {
    /// Requires an exactly symmetric, positive-definite matrix.
    pub fn new(inertia: DMatrix<T>) -> Result<Self> {
        if !inertia.is_square() {
            return Err(Error::InvalidArgument("inertia must be square".into()));
        }
        if inertia.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("inertia entries must be finite".into()));
        }
        if inertia != inertia.transpose() {
            return Err(Error::InvalidArgument("inertia must be symmetric".into()));
        }
        let chol = inertia
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidArgument("inertia must be positive definite".into()))?;
        let n = inertia.nrows();
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || inertia[(i, j)] == T::zero()));
        let inverse = if diagonal {
            DMatrix::from_diagonal(&inertia.diagonal().map(|d| T::one() / d))
        } else {
            // symmetrize away rounding so K is an exact quadratic form
            let inv = chol.inverse();
            (&inv + inv.transpose()) * T::lit(0.5)
        };
        let cond = inertia.norm() * inverse.norm();
        if (&inertia * &inverse - DMatrix::identity(n, n)).amax() > T::tol(1e-12) * cond.max(T::one()) {
            return Err(Error::InvalidArgument("inertia is too ill-conditioned to invert".into()));
        }
        Ok(Self { inertia, inverse })
    }

    pub fn diagonal(moments: &[T]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(moments)))
    }

    /// `I = I₀ δ`, so `𝓘 = δ / I₀`.
    pub fn spherical(dim: usize, i0: T) -> Result<Self> {
        Self::diagonal(&vec![i0; dim])
    }

    pub fn dim(&self) -> usize {
        self.inertia.nrows()
    }

    pub fn inertia(&self) -> &DMatrix<T> {
        &self.inertia
    }

    pub fn inverse(&self) -> &DMatrix<T> {
        &self.inverse
    }
}

/// `V = −(Γ | L)` with `Γ = K(g⁻¹) γ`.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec<T: Real> {
    None,
    HeavyTop {
        /// Space-frame force `γ`.
        gamma: DualVector<T>,
        /// Body-frame centre of mass `L`.
        l: AlgebraVector<T>,
    },
}

impl<T: Real> PotentialSpec<T> {
    pub fn heavy_top(gamma: DualVector<T>, l: AlgebraVector<T>) -> Result<Self> {
        check_dim(gamma.dim(), l.dim())?;
        if !gamma.is_finite() || !l.is_finite() {
            return Err(Error::InvalidArgument("heavy-top data must be finite".into()));
        }
        Ok(Self::HeavyTop { gamma, l })
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Self::None)
    }

    pub(crate) fn check(&self, dim: usize) -> Result<()> {
        match self {
            Self::None => Ok(()),
            Self::HeavyTop { gamma, l } => {
                check_dim(dim, gamma.dim())?;
                check_dim(dim, l.dim())
            }
        }
    }
}

pub fn kinetic<T: Real>(pi: &DualVector<T>, inertia: &InertiaTensor<T>) -> Result<T> {
    check_dim(inertia.dim(), pi.dim())?;
    Ok(T::lit(0.5) * pi.0.dot(&(&inertia.inverse * &pi.0)))
}

/// `∂K/∂π_α = 𝓘^{αβ} π_β`, the body angular velocity of the free motion.
pub fn kinetic_grad<T: Real>(pi: &DualVector<T>, inertia: &InertiaTensor<T>) -> Result<DVector<T>> {
    check_dim(inertia.dim(), pi.dim())?;
    Ok(&inertia.inverse * &pi.0)
}

/// Body-frame force `Γ = K(g⁻¹) γ = Ad(g)ᵀ γ`.
pub fn body_force<T: Real>(group: &LieGroup<T>, g: &GroupElement<T>, gamma: &DualVector<T>) -> Result<DualVector<T>> {
    check_dim(group.dim(), gamma.dim())?;
    Ok(DualVector(group.adjoint(g)?.transpose() * &gamma.0))
}

pub fn potential<T: Real>(group: &LieGroup<T>, g: &GroupElement<T>, v: &PotentialSpec<T>) -> Result<T> {
    v.check(group.dim())?;
    match v {
        PotentialSpec::None => {
            group.validate(g)?;
            Ok(T::zero())
        }
        PotentialSpec::HeavyTop { gamma, l } => Ok(-body_force(group, g, gamma)?.pair(l)),
    }
}

/// `⟨dV | e^L_μ⟩ = −Γ_α f^α_{μβ} L^β`.
pub fn potential_grad_left<T: Real>(group: &LieGroup<T>, g: &GroupElement<T>, v: &PotentialSpec<T>) -> Result<DVector<T>> {
    v.check(group.dim())?;
    match v {
        PotentialSpec::None => {
            group.validate(g)?;
            Ok(DVector::zeros(group.dim()))
        }
        PotentialSpec::HeavyTop { gamma, l } => {
            Ok(force_gradient(group.algebra(), &body_force(group, g, gamma)?, l))
        }
    }
}

pub(crate) fn force_gradient<T: Real>(
    algebra: &StructureConstants<T>,
    big_gamma: &DualVector<T>,
    l: &AlgebraVector<T>,
) -> DVector<T> {
    let n = algebra.dim();
    DVector::from_fn(n, |mu, _| {
        let mut acc = T::zero();
        for a in 0..n {
            for b in 0..n {
                acc += big_gamma[a] * algebra.f(a, mu, b) * l[b];
            }
        }
        -acc
    })
}
