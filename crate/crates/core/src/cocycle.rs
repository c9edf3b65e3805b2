//! Lie algebra cohomology used by the twisted symplectic forms: one-cochains
//! with values in the coadjoint module, real two-cocycles `Θ`, coboundaries
//! built from a magnetic field `ξ`, and a finite-difference probe of
//! closedness for two-form fields.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::lie_core::{AlgebraVector, DualVector, LieGroup, StructureConstants};
use crate::Real;

/// Residual threshold for the cocycle condition.
pub const COCYCLE_TOL: f64 = 1e-12;

/// Linear map `θ: 𝒢 → 𝒢*` with components `θ_{α,μ} = ⟨θ(e_μ) | e_α⟩`,
/// stored as `matrix[(α, μ)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneCochain<T: Real> {
    pub matrix: DMatrix<T>,
}

impl<T: Real> OneCochain<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument("one-cochain must be a square matrix".into()));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("one-cochain entries must be finite".into()));
        }
        Ok(Self { matrix })
    }

    /// The cochain `θ_{α,μ} = Θ_{αμ}` attached to an antisymmetric form.
    pub fn from_two_form(theta: &TwoCocycle<T>) -> Self {
        Self { matrix: theta.matrix() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// A cocycle is called symplectic when `θ_{α,μ} = −θ_{μ,α}`.
    pub fn is_antisymmetric(&self) -> bool {
        self.matrix == -self.matrix.transpose()
    }
}

/// Dense rank-3 tensor `t[(i, j, k)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T: Real> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> Tensor3<T> {
    fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![T::zero(); dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.data[(i * self.dim + j) * self.dim + k]
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: T) {
        self.data[(i * self.dim + j) * self.dim + k] = v;
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Index triple of the largest entry in absolute value.
    pub fn argmax_abs(&self) -> (usize, usize, usize) {
        let (mut best, mut at) = (T::zero(), 0);
        for (idx, x) in self.data.iter().enumerate() {
            if x.abs() > best {
                best = x.abs();
                at = idx;
            }
        }
        let n = self.dim;
        (at / (n * n), (at / n) % n, at % n)
    }
}

/// Antisymmetric matrix stored as its strictly-lower triangle, so that
/// `Θ + Θᵀ = 0` holds exactly on reconstruction.
#[derive(Debug, Clone, PartialEq)]
struct Antisymmetric<T: Real> {
    dim: usize,
    lower: Vec<T>,
}

impl<T: Real> Antisymmetric<T> {
    fn zeros(dim: usize) -> Self {
        Self { dim, lower: vec![T::zero(); dim * dim.saturating_sub(1) / 2] }
    }

    fn from_matrix(m: &DMatrix<T>, what: &str) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument(format!("{what} must be square")));
        }
        let n = m.nrows();
        let scale = m.iter().fold(T::one(), |acc, x| acc.max(x.abs()));
        let mut out = Self::zeros(n);
        for i in 0..n {
            if m[(i, i)].abs() > T::tol(1e-14) * scale {
                return Err(Error::InvalidArgument(format!("{what} must be antisymmetric (diagonal entry {i})")));
            }
            for j in 0..i {
                if !m[(i, j)].is_finite() || (m[(i, j)] + m[(j, i)]).abs() > T::tol(1e-14) * scale {
                    return Err(Error::InvalidArgument(format!(
                        "{what} must be antisymmetric (entries ({i},{j}) and ({j},{i}))"
                    )));
                }
                out.lower[i * (i - 1) / 2 + j] = m[(i, j)];
            }
        }
        Ok(out)
    }

    fn get(&self, i: usize, j: usize) -> T {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => T::zero(),
            Greater => self.lower[i * (i - 1) / 2 + j],
            Less => -self.lower[j * (j - 1) / 2 + i],
        }
    }

    fn matrix(&self) -> DMatrix<T> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    fn is_zero(&self) -> bool {
        self.lower.iter().all(|x| *x == T::zero())
    }
}

/// Real two-cocycle `Θ_{αβ}` on the active algebra, validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoCocycle<T: Real> {
    inner: Antisymmetric<T>,
}

impl<T: Real> TwoCocycle<T> {
    pub fn zero(dim: usize) -> Self {
        Self { inner: Antisymmetric::zeros(dim) }
    }

    /// Validates antisymmetry and the cocycle condition on `algebra`.
    pub fn new(algebra: &StructureConstants<T>, theta: &DMatrix<T>) -> Result<Self> {
        check_dim(algebra.dim(), theta.nrows())?;
        let check = two_cocycle_check(algebra, theta)?;
        if !check.passes {
            let (a, b, c) = check.worst;
            return Err(Error::InvalidArgument(format!(
                "theta fails the two-cocycle condition: residual {:e} at index triple ({}, {}, {})",
                check.residual.to_f64_lossy(),
                a + 1,
                b + 1,
                c + 1
            )));
        }
        Ok(Self { inner: Antisymmetric::from_matrix(theta, "theta")? })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn get(&self, a: usize, b: usize) -> T {
        self.inner.get(a, b)
    }

    pub fn matrix(&self) -> DMatrix<T> {
        self.inner.matrix()
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }
}

/// Constant bivector `Υ^{μν}` in the momentum differentials.
#[derive(Debug, Clone, PartialEq)]
pub struct UpsilonField<T: Real> {
    inner: Antisymmetric<T>,
}

impl<T: Real> UpsilonField<T> {
    pub fn zero(dim: usize) -> Self {
        Self { inner: Antisymmetric::zeros(dim) }
    }

    pub fn new(upsilon: &DMatrix<T>) -> Result<Self> {
        Ok(Self { inner: Antisymmetric::from_matrix(upsilon, "upsilon")? })
    }

    /// su(2) form `Υ^{μν} = τ^λ ε_{λμν}`.
    pub fn from_tau(tau: &AlgebraVector<T>) -> Result<Self> {
        check_dim(3, tau.dim())?;
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 1)] = tau[2];
        m[(1, 0)] = -tau[2];
        m[(1, 2)] = tau[0];
        m[(2, 1)] = -tau[0];
        m[(2, 0)] = tau[1];
        m[(0, 2)] = -tau[1];
        Self::new(&m)
    }

    /// Inverse of [`from_tau`](Self::from_tau); only meaningful in dimension 3.
    pub fn tau(&self) -> Option<AlgebraVector<T>> {
        (self.dim() == 3).then(|| AlgebraVector::from_slice(&[self.get(1, 2), self.get(2, 0), self.get(0, 1)]))
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn get(&self, a: usize, b: usize) -> T {
        self.inner.get(a, b)
    }

    pub fn matrix(&self) -> DMatrix<T> {
        self.inner.matrix()
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    /// Scale used by the degeneracy tolerance: `|τ|` in dimension 3, and
    /// `‖Υ‖_F / √2` in general (the two agree for su(2)).
    pub fn magnitude(&self) -> T {
        self.matrix().norm() / T::lit(2.0).sqrt()
    }
}

/// Coboundary of a one-cochain, as `t[(μ, ν, α)] = ⟨(δ₁θ)(e_μ, e_ν) | e_α⟩`
/// for `(δ₁θ)(u, v) = k(u)θ(v) − k(v)θ(u) − θ([u, v])`:
///
/// `−θ_{κ,ν} f^κ_{μα} + θ_{κ,μ} f^κ_{να} − θ_{α,κ} f^κ_{μν}`.
pub fn coboundary_d1<T: Real>(algebra: &StructureConstants<T>, theta: &OneCochain<T>) -> Result<Tensor3<T>> {
    check_dim(algebra.dim(), theta.dim())?;
    let n = algebra.dim();
    let th = &theta.matrix;
    let mut out = Tensor3::zeros(n);
    for mu in 0..n {
        for nu in 0..n {
            for a in 0..n {
                let mut acc = T::zero();
                for k in 0..n {
                    acc += -th[(k, nu)] * algebra.f(k, mu, a) + th[(k, mu)] * algebra.f(k, nu, a)
                        - th[(a, k)] * algebra.f(k, mu, nu);
                }
                out.set(mu, nu, a, acc);
            }
        }
    }
    Ok(out)
}

/// Outcome of [`two_cocycle_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct CocycleCheck<T: Real> {
    pub passes: bool,
    /// `max |R_{αβγ}|`.
    pub residual: T,
    /// Zero-based index triple where the maximum is attained.
    pub worst: (usize, usize, usize),
    pub tensor: Tensor3<T>,
}

/// Cocycle residual
/// `R_{αβγ} = −Θ_{κγ} f^κ_{αβ} + Θ_{κβ} f^κ_{αγ} − Θ_{κα} f^κ_{βγ}`;
/// passes iff `max |R| < 1e-12`.
pub fn two_cocycle_check<T: Real>(algebra: &StructureConstants<T>, theta: &DMatrix<T>) -> Result<CocycleCheck<T>> {
    check_dim(algebra.dim(), theta.nrows())?;
    let th = Antisymmetric::from_matrix(theta, "theta")?.matrix();
    let n = algebra.dim();
    let mut r = Tensor3::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut acc = T::zero();
                for k in 0..n {
                    acc += -th[(k, c)] * algebra.f(k, a, b) + th[(k, b)] * algebra.f(k, a, c)
                        - th[(k, a)] * algebra.f(k, b, c);
                }
                r.set(a, b, c, acc);
            }
        }
    }
    let residual = r.max_abs();
    Ok(CocycleCheck { passes: residual < T::tol(COCYCLE_TOL), residual, worst: r.argmax_abs(), tensor: r })
}

/// Coboundary two-cocycle `Θ_{αβ} = −ξ_μ f^μ_{αβ}`. Requires a semisimple
/// algebra, where every two-cocycle has this form.
pub fn theta_from_xi<T: Real>(algebra: &StructureConstants<T>, xi: &DualVector<T>) -> Result<TwoCocycle<T>> {
    check_dim(algebra.dim(), xi.dim())?;
    if !algebra.is_semisimple() {
        return Err(Error::Unsupported(
            "theta from xi requires a semisimple algebra (nondegenerate Killing form)".into(),
        ));
    }
    let theta = -algebra.contract_dual(xi)?;
    Ok(TwoCocycle { inner: Antisymmetric::from_matrix(&theta, "theta")? })
}

/// Least-squares inverse of the coboundary map `ξ ↦ −ξ_μ f^μ`. Fails when
/// `Θ` is not in its image.
pub fn xi_from_theta<T: Real>(algebra: &StructureConstants<T>, theta: &TwoCocycle<T>) -> Result<DualVector<T>> {
    let n = algebra.dim();
    check_dim(n, theta.dim())?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();
    let map = DMatrix::from_fn(pairs.len(), n, |row, mu| -algebra.f(mu, pairs[row].0, pairs[row].1));
    let rhs = DVector::from_iterator(pairs.len(), pairs.iter().map(|&(a, b)| theta.get(a, b)));
    let svd = map.clone().svd(true, true);
    let xi = svd
        .solve(&rhs, T::tol(1e-13))
        .map_err(|e| Error::Numerical(format!("coboundary solve failed: {e}")))?;
    let miss = (&map * &xi - &rhs).amax();
    let scale = T::one().max(rhs.amax());
    if miss > T::tol(1e-12) * scale {
        return Err(Error::InvalidArgument(format!(
            "theta is not a coboundary -xi.f (residual {:e})",
            miss.to_f64_lossy()
        )));
    }
    Ok(DualVector(xi))
}

/// A two-form field in a coordinate chart: `ω = ½ ω_ij(x) dx^i ∧ dx^j`.
pub trait TwoFormField<T: Real> {
    /// Chart dimension.
    fn dim(&self) -> usize;

    /// Antisymmetric coefficient matrix `ω_ij(x)`.
    fn coefficients(&self, x: &DVector<T>) -> Result<DMatrix<T>>;

    /// Distance from `x` to the chart boundary; infinite for global charts.
    fn boundary_distance(&self, _x: &DVector<T>) -> T {
        T::max_value().unwrap_or_else(T::one)
    }
}

/// Two-form given by a closure over chart coordinates.
pub struct FnForm<F> {
    pub dim: usize,
    pub coefficients: F,
}

impl<T: Real, F: Fn(&DVector<T>) -> DMatrix<T>> TwoFormField<T> for FnForm<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn coefficients(&self, x: &DVector<T>) -> Result<DMatrix<T>> {
        Ok((self.coefficients)(x))
    }
}

/// `Θ_L = ½ Θ_{αβ} ε^α_L ∧ ε^β_L` on SU(2) in exponential coordinates.
pub struct LeftInvariantTwoForm<T: Real> {
    group: LieGroup<T>,
    theta: TwoCocycle<T>,
}

impl<T: Real> LeftInvariantTwoForm<T> {
    pub fn new(group: LieGroup<T>, theta: TwoCocycle<T>) -> Result<Self> {
        if !group.is_su2() {
            return Err(Error::Unsupported("coordinate two-forms need the exact su(2) chart".into()));
        }
        check_dim(group.dim(), theta.dim())?;
        Ok(Self { group, theta })
    }
}

impl<T: Real> TwoFormField<T> for LeftInvariantTwoForm<T> {
    fn dim(&self) -> usize {
        self.group.dim()
    }

    fn coefficients(&self, x: &DVector<T>) -> Result<DMatrix<T>> {
        let g = self.group.exp(&AlgebraVector(x.clone()))?;
        let coframe = self.group.left_coframe(&g)?;
        Ok(coframe.transpose() * self.theta.matrix() * coframe)
    }

    fn boundary_distance(&self, x: &DVector<T>) -> T {
        su2_chart_margin(x.rows(0, 3).norm())
    }
}

/// Distance of an exponential-chart point with rotation angle `angle` from the
/// cut locus `|u| = 2π`.
pub(crate) fn su2_chart_margin<T: Real>(angle: T) -> T {
    T::two_pi() - angle
}

/// Max over index triples of the central-difference exterior derivative
/// `∂_i ω_jk + ∂_j ω_ki + ∂_k ω_ij` at `x` with step `h`. Second order in `h`
/// for closed forms.
pub fn closedness_probe<T: Real, F: TwoFormField<T> + ?Sized>(form: &F, x: &DVector<T>, h: T) -> Result<T> {
    let n = form.dim();
    check_dim(n, x.len())?;
    if !(h > T::zero()) {
        return Err(Error::InvalidArgument("probe step must be positive".into()));
    }
    if form.boundary_distance(x) <= h * T::lit(2.0) {
        return Err(Error::Domain("probe point lies within the step of the chart boundary".into()));
    }
    let mut derivs = Vec::with_capacity(n);
    for i in 0..n {
        let mut plus = x.clone();
        let mut minus = x.clone();
        plus[i] += h;
        minus[i] -= h;
        let d = (form.coefficients(&plus)? - form.coefficients(&minus)?) / (h * T::lit(2.0));
        derivs.push(d);
    }
    let mut worst = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let r = derivs[i][(j, k)] + derivs[j][(k, i)] + derivs[k][(i, j)];
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}
