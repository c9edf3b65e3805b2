//! Lie algebra arithmetic in a fixed basis `{e_α}` with dual basis `{ε^α}`.

use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::Real;

macro_rules! component_vector {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name<T: Real>(pub DVector<T>);

        impl<T: Real> $name<T> {
            pub fn zeros(dim: usize) -> Self {
                Self(DVector::zeros(dim))
            }

            pub fn from_slice(components: &[T]) -> Self {
                Self(DVector::from_column_slice(components))
            }

            /// Basis element with a one in slot `index`.
            pub fn basis(dim: usize, index: usize) -> Self {
                let mut v = Self::zeros(dim);
                v.0[index] = T::one();
                v
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn as_slice(&self) -> &[T] {
                self.0.as_slice()
            }

            pub fn norm(&self) -> T {
                self.0.norm()
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|x| x.is_finite())
            }

            pub fn scale(&self, s: T) -> Self {
                Self(&self.0 * s)
            }
        }

        impl<T: Real> Index<usize> for $name<T> {
            type Output = T;
            fn index(&self, i: usize) -> &T {
                &self.0[i]
            }
        }

        impl<T: Real> IndexMut<usize> for $name<T> {
            fn index_mut(&mut self, i: usize) -> &mut T {
                &mut self.0[i]
            }
        }

        impl<T: Real> From<DVector<T>> for $name<T> {
            fn from(v: DVector<T>) -> Self {
                Self(v)
            }
        }
    };
}

component_vector!(
    /// Element `u = u^α e_α` of the Lie algebra: body angular velocity,
    /// centre-of-mass vector, the momentum-space field `τ`.
    AlgebraVector
);

component_vector!(
    /// Element `π = π_μ ε^μ` of the dual algebra: body and space momenta,
    /// the magnetic field `ξ`, gravity vectors `γ` and `Γ`.
    DualVector
);

impl<T: Real> DualVector<T> {
    /// Canonical pairing `(π | u)`.
    pub fn pair(&self, u: &AlgebraVector<T>) -> T {
        self.0.dot(&u.0)
    }
}

/// Which built-in algebra, if any, a structure-constant table came from.
/// Enables closed-form fast paths (su(2) quaternions, Φ⁻¹ formula).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraKind {
    Su2,
    Generic,
}

/// Structure constants `f^μ_{αβ}` with `[e_α, e_β] = f^μ_{αβ} e_μ`, and the
/// derived Killing form `η_{αβ} = f^μ_{αν} f^ν_{βμ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants<T: Real> {
    dim: usize,
    /// Flattened as `[μ][α][β]`.
    f: Vec<T>,
    killing: DMatrix<T>,
    kind: AlgebraKind,
}

impl<T: Real> StructureConstants<T> {
    /// Validates antisymmetry and the Jacobi identity. `table[μ][α][β] = f^μ_{αβ}`.
    pub fn new(table: &[Vec<Vec<T>>]) -> Result<Self> {
        let dim = table.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("algebra dimension must be positive".into()));
        }
        let mut f = Vec::with_capacity(dim * dim * dim);
        for (mu, slice) in table.iter().enumerate() {
            check_dim(dim, slice.len()).map_err(|_| {
                Error::InvalidArgument(format!("structure constants: slice {mu} is not {dim}x{dim}"))
            })?;
            for row in slice {
                check_dim(dim, row.len()).map_err(|_| {
                    Error::InvalidArgument(format!("structure constants: slice {mu} is not {dim}x{dim}"))
                })?;
                f.extend_from_slice(row);
            }
        }
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("structure constants must be finite".into()));
        }
        let sc = Self::assemble(dim, f, AlgebraKind::Generic);
        let scale = sc.f.iter().fold(T::one(), |m, x| m.max(x.abs()));
        let antisym = sc.antisymmetry_residual();
        if antisym > T::tol(1e-12) * scale {
            return Err(Error::InvalidArgument(format!(
                "structure constants are not antisymmetric (residual {:e})",
                antisym.to_f64_lossy()
            )));
        }
        let jacobi = sc.jacobi_residual();
        if jacobi > T::tol(1e-12) * scale * scale {
            return Err(Error::InvalidArgument(format!(
                "structure constants violate the Jacobi identity (residual {:e})",
                jacobi.to_f64_lossy()
            )));
        }
        Ok(sc)
    }

    /// su(2) with `f^μ_{αβ} = ε_{μαβ}`.
    pub fn su2() -> Self {
        let mut f = vec![T::zero(); 27];
        for (mu, a, b, s) in LEVI_CIVITA {
            f[mu * 9 + a * 3 + b] = T::lit(s);
        }
        Self::assemble(3, f, AlgebraKind::Su2)
    }

    /// su(2) ⊕ ℝ with the fourth basis vector central. Not semisimple.
    pub fn su2_plus_center() -> Self {
        let mut f = vec![T::zero(); 64];
        for (mu, a, b, s) in LEVI_CIVITA {
            f[mu * 16 + a * 4 + b] = T::lit(s);
        }
        Self::assemble(4, f, AlgebraKind::Generic)
    }

    /// The abelian algebra ℝᴺ.
    pub fn abelian(dim: usize) -> Self {
        Self::assemble(dim, vec![T::zero(); dim * dim * dim], AlgebraKind::Generic)
    }

    fn assemble(dim: usize, f: Vec<T>, kind: AlgebraKind) -> Self {
        let mut sc = Self { dim, f, killing: DMatrix::zeros(dim, dim), kind };
        let mut killing = DMatrix::zeros(dim, dim);
        for a in 0..dim {
            for b in 0..dim {
                let mut acc = T::zero();
                for mu in 0..dim {
                    for nu in 0..dim {
                        acc += sc.f(mu, a, nu) * sc.f(nu, b, mu);
                    }
                }
                killing[(a, b)] = acc;
            }
        }
        sc.killing = killing;
        sc
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    /// `f^μ_{αβ}`.
    #[inline]
    pub fn f(&self, mu: usize, a: usize, b: usize) -> T {
        self.f[(mu * self.dim + a) * self.dim + b]
    }

    /// Nested-vector copy `[μ][α][β]`.
    pub fn table(&self) -> Vec<Vec<Vec<T>>> {
        (0..self.dim)
            .map(|mu| (0..self.dim).map(|a| (0..self.dim).map(|b| self.f(mu, a, b)).collect()).collect())
            .collect()
    }

    pub fn killing(&self) -> &DMatrix<T> {
        &self.killing
    }

    /// Scale-aware nondegeneracy of the Killing form:
    /// `|det η| > 1e-9 · (max|η|)^N`.
    pub fn is_semisimple(&self) -> bool {
        let scale = self.killing.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        if scale == T::zero() {
            return false;
        }
        let det = self.killing.clone().determinant().abs();
        det > T::lit(1e-9) * scale.powi(self.dim as i32)
    }

    pub fn antisymmetry_residual(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for mu in 0..n {
            for a in 0..n {
                for b in 0..n {
                    worst = worst.max((self.f(mu, a, b) + self.f(mu, b, a)).abs());
                }
            }
        }
        worst
    }

    /// Max over all index tuples of the cyclic Jacobi sum.
    pub fn jacobi_residual(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for mu in 0..n {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let mut acc = T::zero();
                        for nu in 0..n {
                            acc += self.f(mu, a, nu) * self.f(nu, b, c)
                                + self.f(mu, b, nu) * self.f(nu, c, a)
                                + self.f(mu, c, nu) * self.f(nu, a, b);
                        }
                        worst = worst.max(acc.abs());
                    }
                }
            }
        }
        worst
    }

    /// `[u, v]^μ = f^μ_{αβ} u^α v^β`.
    pub fn bracket(&self, u: &AlgebraVector<T>, v: &AlgebraVector<T>) -> Result<AlgebraVector<T>> {
        check_dim(self.dim, u.dim())?;
        check_dim(self.dim, v.dim())?;
        Ok(self.bracket_unchecked(u, v))
    }

    pub(crate) fn bracket_unchecked(&self, u: &AlgebraVector<T>, v: &AlgebraVector<T>) -> AlgebraVector<T> {
        let n = self.dim;
        let mut w = AlgebraVector::zeros(n);
        for mu in 0..n {
            let mut acc = T::zero();
            for a in 0..n {
                if u[a] == T::zero() {
                    continue;
                }
                for b in 0..n {
                    acc += self.f(mu, a, b) * u[a] * v[b];
                }
            }
            w[mu] = acc;
        }
        w
    }

    /// `(ad u)^μ_β = f^μ_{αβ} u^α`.
    pub fn ad_matrix(&self, u: &AlgebraVector<T>) -> Result<DMatrix<T>> {
        check_dim(self.dim, u.dim())?;
        let n = self.dim;
        Ok(DMatrix::from_fn(n, n, |mu, b| {
            let mut acc = T::zero();
            for a in 0..n {
                acc += self.f(mu, a, b) * u[a];
            }
            acc
        }))
    }

    /// Coadjoint `k(u) = −(ad u)ᵀ`, acting on dual vectors.
    pub fn coad_matrix(&self, u: &AlgebraVector<T>) -> Result<DMatrix<T>> {
        Ok(-self.ad_matrix(u)?.transpose())
    }

    /// `S⁰_{αβ} = π_μ f^μ_{αβ}`.
    pub fn contract_dual(&self, pi: &DualVector<T>) -> Result<DMatrix<T>> {
        check_dim(self.dim, pi.dim())?;
        let n = self.dim;
        Ok(DMatrix::from_fn(n, n, |a, b| {
            let mut acc = T::zero();
            for mu in 0..n {
                acc += pi[mu] * self.f(mu, a, b);
            }
            acc
        }))
    }
}

const LEVI_CIVITA: [(usize, usize, usize, f64); 6] = [
    (0, 1, 2, 1.0),
    (1, 2, 0, 1.0),
    (2, 0, 1, 1.0),
    (0, 2, 1, -1.0),
    (1, 0, 2, -1.0),
    (2, 1, 0, -1.0),
];
