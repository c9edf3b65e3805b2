//! Test observables and a numerical Jacobi-identity probe.
//!
//! Observables are functions of the chart coordinates `z = (u, π)` with
//! `g = exp(u)`. Their differentials on the invariant basis come from
//! [`coordinate_differentials`]; brackets of brackets are differentiated
//! numerically along the left-invariant flows and the momentum axes.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::lie_core::{DualVector, LieGroup};
use crate::symplectic::{coordinate_differentials, poisson_bracket, Differential, PhasePoint, StructureSelector};
use crate::Real;

/// `F(z) = c + bᵀz + ½ zᵀAz` in the chart coordinates `z = (u, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObservable<T: Real> {
    constant: T,
    linear: DVector<T>,
    quadratic: DMatrix<T>,
}

impl<T: Real> QuadraticObservable<T> {
    /// `quadratic` is symmetrized.
    pub fn new(constant: T, linear: DVector<T>, quadratic: DMatrix<T>) -> Result<Self> {
        let n = linear.len();
        if quadratic.shape() != (n, n) {
            return Err(Error::InvalidArgument(format!(
                "quadratic part must be {n}x{n}, found {}x{}",
                quadratic.nrows(),
                quadratic.ncols()
            )));
        }
        let quadratic = (&quadratic + quadratic.transpose()) * T::lit(0.5);
        Ok(Self { constant, linear, quadratic })
    }

    /// The coordinate function `z_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut linear = DVector::zeros(dim);
        linear[i] = T::one();
        Self { constant: T::zero(), linear, quadratic: DMatrix::zeros(dim, dim) }
    }

    pub fn value(&self, group: &LieGroup<T>, p: &PhasePoint<T>) -> Result<T> {
        let z = chart_coordinates(group, p)?;
        check_dim(self.linear.len(), z.len())?;
        Ok(self.constant + self.linear.dot(&z) + T::lit(0.5) * z.dot(&(&self.quadratic * &z)))
    }

    pub fn differential(&self, group: &LieGroup<T>, p: &PhasePoint<T>) -> Result<Differential<T>> {
        let z = chart_coordinates(group, p)?;
        check_dim(self.linear.len(), z.len())?;
        let grad = &self.linear + &self.quadratic * &z;
        let n = group.dim();
        let mut out = Differential::zeros(n);
        for (i, d) in coordinate_differentials(group, &p.g)?.iter().enumerate() {
            out.group += &d.group * grad[i];
            out.momentum += &d.momentum * grad[i];
        }
        Ok(out)
    }
}

/// `(log g, π)`.
pub fn chart_coordinates<T: Real>(group: &LieGroup<T>, p: &PhasePoint<T>) -> Result<DVector<T>> {
    let u = group.log(&p.g)?;
    Ok(DVector::from_iterator(2 * group.dim(), u.as_slice().iter().chain(p.pi_l.as_slice()).copied()))
}

/// Five-point central differences of `f` along `e^L_α` and `∂/∂π_μ`.
pub fn numerical_differential<T, F>(group: &LieGroup<T>, p: &PhasePoint<T>, h: T, f: F) -> Result<Differential<T>>
where
    T: Real,
    F: Fn(&PhasePoint<T>) -> Result<T>,
{
    let n = group.dim();
    let stencil = |eval: &dyn Fn(T) -> Result<T>| -> Result<T> {
        let two = T::lit(2.0);
        let (p1, m1, p2, m2) = (eval(h)?, eval(-h)?, eval(two * h)?, eval(-two * h)?);
        Ok((T::lit(8.0) * (p1 - m1) - (p2 - m2)) / (T::lit(12.0) * h))
    };
    let mut out = Differential::zeros(n);
    for a in 0..n {
        out.group[a] = stencil(&|t| f(&PhasePoint { g: group.flow_left_invariant(&p.g, a, t)?, pi_l: p.pi_l.clone() }))?;
    }
    for mu in 0..n {
        out.momentum[mu] = stencil(&|t| {
            let mut pi = p.pi_l.0.clone();
            pi[mu] += t;
            f(&PhasePoint { g: p.g.clone(), pi_l: DualVector(pi) })
        })?;
    }
    Ok(out)
}

/// `{A,{B,C}} + {B,{C,A}} + {C,{A,B}}`, with the inner brackets
/// differentiated numerically using step `h`.
pub fn jacobi_cyclic_sum<T: Real>(
    group: &LieGroup<T>,
    p: &PhasePoint<T>,
    sel: &StructureSelector<T>,
    obs: [&QuadraticObservable<T>; 3],
    h: T,
) -> Result<T> {
    let bracket = |x: &QuadraticObservable<T>, y: &QuadraticObservable<T>, q: &PhasePoint<T>| {
        poisson_bracket(group, q, sel, &x.differential(group, q)?, &y.differential(group, q)?)
    };
    let mut sum = T::zero();
    for k in 0..3 {
        let (a, b, c) = (obs[k], obs[(k + 1) % 3], obs[(k + 2) % 3]);
        let d_bc = numerical_differential(group, p, h, |q| bracket(b, c, q))?;
        sum += poisson_bracket(group, p, sel, &a.differential(group, p)?, &d_bc)?;
    }
    Ok(sum)
}
