//! The two-forms `ω₀`, `ω_I = ω₀ − Θ_L` and `ω_L = ω_I + ½ Υ dπ ∧ dπ` on
//! `T*(G)` in body coordinates, their Hamiltonian vector fields and Poisson
//! brackets.
//!
//! Components are taken in the invariant basis `(e^L_α, ∂/∂π_μ)` and its dual
//! `(ε^α_L, dπ_μ)`. In that basis every form reads `ω = ½ M θ ∧ θ` with
//!
//! ```text
//! M = [[ S, I ],      S_{αβ} = π_μ f^μ_{αβ} − Θ_{αβ}
//!      [ −I, Υ ]]
//! ```
//!
//! and `ω(X, Y) = Xᵀ M Y`. The Hamiltonian field of `H` solves `i_X ω = dH`,
//! and `{A, B} = ω(X_A, X_B)`.

use nalgebra::{DMatrix, DVector};

use crate::cocycle::{su2_chart_margin, TwoCocycle, TwoFormField, UpsilonField};
use crate::error::{check_dim, Error, Result};
use crate::lie_core::{AlgebraVector, DualVector, GroupElement, LieGroup};
use crate::linalg::block_diag;
use crate::Real;

/// Relative residual accepted when checking `i_X ω = dH`.
pub const FIELD_RESIDUAL_TOL: f64 = 1e-10;

/// Base of the scale-aware degeneracy threshold on `|Δ|`.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// A point `(g, π^L)` of phase space in body coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint<T: Real> {
    pub g: GroupElement<T>,
    pub pi_l: DualVector<T>,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(g: GroupElement<T>, pi_l: DualVector<T>) -> Result<Self> {
        if !g.is_finite() || !pi_l.is_finite() {
            return Err(Error::InvalidArgument("phase point must be finite".into()));
        }
        Ok(Self { g, pi_l })
    }

    /// Checks the point against `group`.
    pub fn validate(&self, group: &LieGroup<T>) -> Result<()> {
        group.validate(&self.g)?;
        check_dim(group.dim(), self.pi_l.dim())?;
        if !self.pi_l.is_finite() {
            return Err(Error::InvalidArgument("momentum must be finite".into()));
        }
        Ok(())
    }

    /// Group coordinates followed by momenta, as carried by error payloads.
    pub fn flat(&self) -> Vec<f64> {
        self.g
            .coords()
            .into_iter()
            .chain(self.pi_l.as_slice().iter().copied())
            .map(Real::to_f64_lossy)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureMode {
    /// `ω₀`.
    Canonical,
    /// `ω_I = ω₀ − Θ_L`.
    Cocycle,
    /// `ω_L`, possibly degenerate.
    Full,
}

/// Which of the three two-forms is active, together with its constant fields.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureSelector<T: Real> {
    mode: StructureMode,
    theta: TwoCocycle<T>,
    upsilon: UpsilonField<T>,
}

impl<T: Real> StructureSelector<T> {
    /// Checks mode/field consistency: canonical carries neither field and
    /// cocycle carries no `Υ`.
    pub fn new(mode: StructureMode, theta: TwoCocycle<T>, upsilon: UpsilonField<T>) -> Result<Self> {
        check_dim(theta.dim(), upsilon.dim())?;
        match mode {
            StructureMode::Canonical if !theta.is_zero() || !upsilon.is_zero() => Err(Error::InvalidArgument(
                "canonical structure requires theta = 0 and upsilon = 0".into(),
            )),
            StructureMode::Cocycle if !upsilon.is_zero() => {
                Err(Error::InvalidArgument("cocycle structure requires upsilon = 0".into()))
            }
            _ => Ok(Self { mode, theta, upsilon }),
        }
    }

    pub fn canonical(dim: usize) -> Self {
        Self { mode: StructureMode::Canonical, theta: TwoCocycle::zero(dim), upsilon: UpsilonField::zero(dim) }
    }

    pub fn cocycle(theta: TwoCocycle<T>) -> Self {
        let dim = theta.dim();
        Self { mode: StructureMode::Cocycle, theta, upsilon: UpsilonField::zero(dim) }
    }

    pub fn full(theta: TwoCocycle<T>, upsilon: UpsilonField<T>) -> Result<Self> {
        Self::new(StructureMode::Full, theta, upsilon)
    }

    pub fn mode(&self) -> StructureMode {
        self.mode
    }

    pub fn theta(&self) -> &TwoCocycle<T> {
        &self.theta
    }

    pub fn upsilon(&self) -> &UpsilonField<T> {
        &self.upsilon
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }
}

/// `S`, `Φ = 1 + SΥ`, `Ψ = 1 + ΥS` and `Δ = det Φ` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrixBundle<T: Real> {
    pub s: DMatrix<T>,
    pub phi: DMatrix<T>,
    pub psi: DMatrix<T>,
    pub delta: T,
}

/// `S_{αβ} = π_μ f^μ_{αβ} − Θ_{αβ}`.
pub(crate) fn s_matrix<T: Real>(group: &LieGroup<T>, pi: &DualVector<T>, sel: &StructureSelector<T>) -> DMatrix<T> {
    group.algebra().contract_dual(pi).expect("momentum dimension checked by caller") - sel.theta.matrix()
}

fn check_point<T: Real>(group: &LieGroup<T>, p: &PhasePoint<T>, sel: &StructureSelector<T>) -> Result<()> {
    p.validate(group)?;
    check_dim(group.dim(), sel.dim())
}

pub fn s_bundle<T: Real>(group: &LieGroup<T>, p: &PhasePoint<T>, sel: &StructureSelector<T>) -> Result<SMatrixBundle<T>> {
    check_point(group, p, sel)?;
    let s = s_matrix(group, &p.pi_l, sel);
    let n = group.dim();
    let ups = sel.upsilon.matrix();
    let phi = DMatrix::identity(n, n) + &s * &ups;
    let psi = DMatrix::identity(n, n) + &ups * &s;
    let delta = phi.determinant();
    Ok(SMatrixBundle { s, phi, psi, delta })
}

/// Coefficient matrix `M` of the active form in the invariant basis.
pub fn omega_matrix<T: Real>(group: &LieGroup<T>, p: &PhasePoint<T>, sel: &StructureSelector<T>) -> Result<DMatrix<T>> {
    check_point(group, p, sel)?;
    Ok(assemble_omega(&s_matrix(group, &p.pi_l, sel), &sel.upsilon.matrix()))
}

fn assemble_omega<T: Real>(s: &DMatrix<T>, ups: &DMatrix<T>) -> DMatrix<T> {
    let n = s.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(s);
    m.view_mut((n, n), (n, n)).copy_from(ups);
    for i in 0..n {
        m[(i, n + i)] = T::one();
        m[(n + i, i)] = -T::one();
    }
    m
}

/// Shifted momentum `π′` with `S = π′·f`, read off an su(2) `S` matrix.
fn su2_shifted_momentum<T: Real>(s: &DMatrix<T>) -> [T; 3] {
    [s[(1, 2)], s[(2, 0)], s[(0, 1)]]
}

/// Degeneracy threshold `1e-9 (1 + ‖π′‖‖τ‖)²`, where `‖π′‖ = ‖S‖_F/√2` and
/// `‖τ‖ = ‖Υ‖_F/√2` (for su(2) these are the Euclidean norms).
pub fn degeneracy_tolerance<T: Real>(s: &DMatrix<T>, upsilon: &UpsilonField<T>) -> T {
    let scale = T::one() + s.norm() / T::lit(2.0).sqrt() * upsilon.magnitude();
    T::lit(DEGENERACY_TOL) * scale * scale
}

/// Components `(⟨dH | e^L_α⟩, ∂H/∂π_μ)` of a differential.
#[derive(Debug, Clone, PartialEq)]
pub struct Differential<T: Real> {
    pub group: DVector<T>,
    pub momentum: DVector<T>,
}

impl<T: Real> Differential<T> {
    pub fn new(group: DVector<T>, momentum: DVector<T>) -> Self {
        Self { group, momentum }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { group: DVector::zeros(dim), momentum: DVector::zeros(dim) }
    }

    fn stacked(&self) -> DVector<T> {
        stack(&self.group, &self.momentum)
    }
}

/// Components `(X^α, X_μ)` of a tangent vector on the invariant basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<T: Real> {
    pub group: DVector<T>,
    pub momentum: DVector<T>,
}

impl<T: Real> TangentVector<T> {
    pub fn stacked(&self) -> DVector<T> {
        stack(&self.group, &self.momentum)
    }
}

fn stack<T: Real>(a: &DVector<T>, b: &DVector<T>) -> DVector<T> {
    DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

/// `X_μ = −S_{μα} X^α − ⟨dH | e^L_μ⟩`.
pub(crate) fn momentum_component<T: Real>(s: &DMatrix<T>, x_up: &DVector<T>, dh_group: &DVector<T>) -> DVector<T> {
    -(s * x_up) - dh_group
}

/// Solves `i_X ω = dH`.
///
/// In canonical and cocycle modes `X^α = ∂H/∂π_α`. In full mode
/// `Ψ X = ∂H/∂π − Υ·⟨dH|e^L⟩` is solved in closed form for su(2),
/// `Ψ⁻¹ = (1 − π′τᵀ)/C₁` with `C₁ = 1 − π′·τ`, and by LU otherwise. Returns a
/// degenerate-point error when `|Δ|` is at or below tolerance.
pub fn hamiltonian_field<T: Real>(
    group: &LieGroup<T>,
    p: &PhasePoint<T>,
    sel: &StructureSelector<T>,
    dh: &Differential<T>,
) -> Result<TangentVector<T>> {
    check_point(group, p, sel)?;
    check_dim(group.dim(), dh.group.len())?;
    check_dim(group.dim(), dh.momentum.len())?;
    let s = s_matrix(group, &p.pi_l, sel);
    let x_up = match sel.mode {
        StructureMode::Canonical | StructureMode::Cocycle => dh.momentum.clone(),
        StructureMode::Full => full_group_component(group, p, sel, &s, dh)?,
    };
    let x_low = momentum_component(&s, &x_up, &dh.group);
    let field = TangentVector { group: x_up, momentum: x_low };

    let m = assemble_omega(&s, &sel.upsilon.matrix());
    let x = field.stacked();
    let residual = (m.transpose() * &x - dh.stacked()).amax();
    let allowed = T::tol(FIELD_RESIDUAL_TOL) * T::one().max(m.norm() * x.norm());
    if !(residual <= allowed) {
        return Err(Error::Numerical(format!(
            "Hamiltonian field residual {:e} exceeds {:e}",
            residual.to_f64_lossy(),
            allowed.to_f64_lossy()
        )));
    }
    Ok(field)
}

fn degenerate<T: Real>(p: &PhasePoint<T>, delta: T, tol: T) -> Error {
    Error::DegeneratePoint { delta: delta.to_f64_lossy(), tolerance: tol.to_f64_lossy(), point: p.flat() }
}

fn full_group_component<T: Real>(
    group: &LieGroup<T>,
    p: &PhasePoint<T>,
    sel: &StructureSelector<T>,
    s: &DMatrix<T>,
    dh: &Differential<T>,
) -> Result<DVector<T>> {
    let ups = sel.upsilon.matrix();
    let rhs = &dh.momentum - &ups * &dh.group;
    let tol = degeneracy_tolerance(s, &sel.upsilon);
    if group.is_su2() {
        let pp = su2_shifted_momentum(s);
        let tau = sel.upsilon.tau().expect("su(2) upsilon has a tau vector");
        let c1 = T::one() - (pp[0] * tau[0] + pp[1] * tau[1] + pp[2] * tau[2]);
        let delta = c1 * c1;
        if !(delta.abs() > tol) {
            return Err(degenerate(p, delta, tol));
        }
        let proj = tau[0] * rhs[0] + tau[1] * rhs[1] + tau[2] * rhs[2];
        Ok(DVector::from_fn(3, |i, _| (rhs[i] - pp[i] * proj) / c1))
    } else {
        dense_group_component(p, s, &ups, &rhs, tol)
    }
}

fn dense_group_component<T: Real>(
    p: &PhasePoint<T>,
    s: &DMatrix<T>,
    ups: &DMatrix<T>,
    rhs: &DVector<T>,
    tol: T,
) -> Result<DVector<T>> {
    let n = s.nrows();
    let psi = DMatrix::identity(n, n) + ups * s;
    let lu = psi.lu();
    let delta = lu.determinant();
    if !(delta.abs() > tol) {
        return Err(degenerate(p, delta, tol));
    }
    lu.solve(rhs).ok_or_else(|| degenerate(p, delta, tol))
}

/// `{A, B} = ω(X_A, X_B)` for observables given through their differentials.
pub fn poisson_bracket<T: Real>(
    group: &LieGroup<T>,
    p: &PhasePoint<T>,
    sel: &StructureSelector<T>,
    da: &Differential<T>,
    db: &Differential<T>,
) -> Result<T> {
    let xa = hamiltonian_field(group, p, sel, da)?;
    let xb = hamiltonian_field(group, p, sel, db)?;
    let m = omega_matrix(group, p, sel)?;
    Ok(xa.stacked().dot(&(m * xb.stacked())))
}

/// Differentials of the coordinate functions `(g^α, π_μ)`, where `g^α` are
/// exponential-chart coordinates so that `⟨dg^α | e^L_β⟩ = L^α_β(g, e)`.
pub fn coordinate_differentials<T: Real>(group: &LieGroup<T>, g: &GroupElement<T>) -> Result<Vec<Differential<T>>> {
    let n = group.dim();
    let l = group.left_jacobian(g)?;
    let mut out = Vec::with_capacity(2 * n);
    for a in 0..n {
        out.push(Differential::new(l.row(a).transpose(), DVector::zeros(n)));
    }
    for mu in 0..n {
        out.push(Differential::new(DVector::zeros(n), AlgebraVector::<T>::basis(n, mu).0));
    }
    Ok(out)
}

/// All brackets `{z_i, z_j}` of `z = (g^α, π_μ)`.
pub fn fundamental_bracket_table<T: Real>(
    group: &LieGroup<T>,
    p: &PhasePoint<T>,
    sel: &StructureSelector<T>,
) -> Result<DMatrix<T>> {
    check_point(group, p, sel)?;
    let n = group.dim();
    let m = omega_matrix(group, p, sel)?;
    let fields = coordinate_differentials(group, &p.g)?
        .iter()
        .map(|d| hamiltonian_field(group, p, sel, d).map(|x| x.stacked()))
        .collect::<Result<Vec<_>>>()?;
    let mut table = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..2 * n {
        let mx = &m * &fields[i];
        for j in 0..i {
            let v = fields[j].dot(&mx);
            table[(j, i)] = v;
            table[(i, j)] = -v;
        }
    }
    Ok(table)
}

/// The active form in the chart `x = (u, π)` with `g = exp(u)`:
/// `ω_ij = (B̃ᵀ M B̃)_ij` where `B̃ = diag(coframe(u), 1)`.
pub struct PhaseSpaceForm<T: Real> {
    group: LieGroup<T>,
    selector: StructureSelector<T>,
}

impl<T: Real> PhaseSpaceForm<T> {
    pub fn new(group: LieGroup<T>, selector: StructureSelector<T>) -> Result<Self> {
        check_dim(group.dim(), selector.dim())?;
        Ok(Self { group, selector })
    }
}

impl<T: Real> TwoFormField<T> for PhaseSpaceForm<T> {
    fn dim(&self) -> usize {
        2 * self.group.dim()
    }

    fn coefficients(&self, x: &DVector<T>) -> Result<DMatrix<T>> {
        let n = self.group.dim();
        check_dim(2 * n, x.len())?;
        let u = AlgebraVector(x.rows(0, n).into_owned());
        let g = self.group.exp(&u)?;
        let p = PhasePoint::new(g, DualVector(x.rows(n, n).into_owned()))?;
        let m = omega_matrix(&self.group, &p, &self.selector)?;
        let b = block_diag(&self.group.left_coframe(&p.g)?, &DMatrix::identity(n, n));
        Ok(b.transpose() * m * b)
    }

    fn boundary_distance(&self, x: &DVector<T>) -> T {
        if self.group.is_su2() {
            su2_chart_margin(x.rows(0, 3).norm())
        } else {
            T::max_value().unwrap_or_else(T::one)
        }
    }
}
