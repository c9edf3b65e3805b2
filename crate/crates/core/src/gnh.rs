//! Presymplectic constraint analysis of `ω_L` on SU(2) where it degenerates.
//!
//! With `τ = (0, 0, τ)` the primary constraint is `C₁ = 1 − π′₃ τ = 0`, so the
//! primary manifold `𝓜₁` is parameterized by `(g, π₁, π₂)` with
//! `π₃ = 1/τ − ξ₃`. There `ω_L` has rank 4 and the kernel is spanned by
//!
//! ```text
//! Z¹ = (1, 0, 0,  0,   1/τ, −π′₂)
//! Z² = (0, 1, 0, −1/τ,  0,   π′₁)
//! ```
//!
//! in the basis `(e^L_α, ∂/∂π_μ)`. Solvability of `i_X ω = dH` requires
//! `⟨dH | Zᵃ⟩ = 0`, which defines the secondary constraints `C₂₁, C₂₂`; the
//! solution family `X_P + ζ₁Z¹ + ζ₂Z²` must then be tangent to the constraint
//! set, which fixes `ζ` or produces further constraints.
//!
//! A general `τ` is first rotated onto the third axis and results are mapped
//! back to the input frame.

use nalgebra::{DMatrix, DVector, Matrix3, Rotation3, UnitQuaternion, Vector3};

use crate::dynamics::{kinetic_grad, potential_grad_left, InertiaTensor, PotentialSpec};
use crate::error::{check_dim, Error, Result};
use crate::lie_core::{AlgebraVector, DualVector, GroupElement, LieGroup};
use crate::linalg::{numerical_rank, null_space, singular_values};
use crate::symplectic::{omega_matrix, PhasePoint, StructureSelector};
use crate::{cocycle::TwoCocycle, cocycle::UpsilonField, Real};

/// Tolerance for membership of the secondary manifold.
pub const SECONDARY_TOL: f64 = 1e-9;

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-9;

/// Maximum tower height analysed.
pub const MAX_LEVEL: usize = 3;

/// A constraint function on phase space.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint<T: Real> {
    /// `C₁ = 1 − π′·τ`.
    Primary,
    /// `C₂₁` or `C₂₂` (index 1 or 2).
    Secondary(usize),
    /// `Σ_r w_r ⟨dC_r | X_P⟩` for a left-null vector `w` of the tangency system.
    Tertiary { weights: [T; 3] },
}

impl<T: Real> Constraint<T> {
    pub fn name(&self) -> String {
        match self {
            Self::Primary => "C1".into(),
            Self::Secondary(a) => format!("C2{a}"),
            Self::Tertiary { .. } => "C3".into(),
        }
    }
}

/// One level of the constraint tower.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintStratum<T: Real> {
    /// 1 for `𝓜₁`, 2 for `𝓜₂`, ...
    pub level: usize,
    /// All constraints defining the stratum, including lower levels.
    pub constraints: Vec<Constraint<T>>,
    /// Manifold dimension near `point`, when it could be determined.
    pub dimension: Option<usize>,
    /// The new constraints hold identically on the previous stratum.
    pub equals_previous: bool,
    /// Representative point (input frame).
    pub point: PhasePoint<T>,
    /// Constraint values at `point`, in the order of `constraints`.
    pub residuals: Vec<T>,
}

/// `ω_L` at an embedded point of `𝓜₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedFormPoint<T: Real> {
    pub point: PhasePoint<T>,
    pub pi_prime: [T; 3],
    pub matrix: DMatrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralSolution<T: Real> {
    pub point: PhasePoint<T>,
    /// `X_P = (∂K/∂π, 0, 0, C₂₃)`.
    pub particular: DVector<T>,
    /// `Z¹, Z²`, multiplied by the gauge functions `ζ₁, ζ₂`.
    pub gauge: [DVector<T>; 2],
    pub c23: T,
}

impl<T: Real> GeneralSolution<T> {
    pub fn member(&self, zeta: [T; 2]) -> DVector<T> {
        &self.particular + &self.gauge[0] * zeta[0] + &self.gauge[1] * zeta[1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TertiaryConstraint<T: Real> {
    pub weights: [T; 3],
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TangencyOutcome<T: Real> {
    Determined { zeta: [T; 2] },
    /// Consistent but rank deficient; `zeta` is the minimum-norm solution.
    Underdetermined { gauge_dimension: usize, zeta: [T; 2] },
    Tertiary { constraints: Vec<TertiaryConstraint<T>> },
}

/// The 3×2 system `A ζ = b` from `⟨dC | X_P + ζ₁Z¹ + ζ₂Z²⟩ = 0` for
/// `C = C₁, C₂₁, C₂₂`, and its classification.
#[derive(Debug, Clone, PartialEq)]
pub struct TangencyResult<T: Real> {
    pub system: DMatrix<T>,
    pub rhs: DVector<T>,
    pub singular_values: Vec<T>,
    pub rank: usize,
    pub outcome: TangencyOutcome<T>,
    /// A rank or consistency decision was within two decades of threshold.
    pub near_threshold: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnhReport<T: Real> {
    /// Rotation `R` (input frame to working frame) taking `τ` to the third axis.
    pub rotation: DMatrix<T>,
    /// `τ` in the working frame.
    pub tau: T,
    pub strata: Vec<ConstraintStratum<T>>,
    pub general_solution: Option<GeneralSolution<T>>,
    pub tangency: Option<TangencyResult<T>>,
    pub gauge_dimension: Option<usize>,
    /// Set when the tower is cut off or no solution family could be built.
    pub notice: Option<String>,
    pub warnings: Vec<String>,
}

impl<T: Real> GnhReport<T> {
    pub fn m2_equals_m1(&self) -> bool {
        self.strata.get(1).is_some_and(|s| s.equals_previous)
    }
}

/// System data for the analysis, held in the working frame where `τ ∥ e₃`.
#[derive(Debug, Clone, PartialEq)]
pub struct GnhProblem<T: Real> {
    group: LieGroup<T>,
    inertia: InertiaTensor<T>,
    potential: PotentialSpec<T>,
    xi: [T; 3],
    tau: T,
    rotation: Matrix3<T>,
    /// `h` with `Ad(h) = R`; working-frame elements are `g h⁻¹`.
    frame: GroupElement<T>,
    selector: StructureSelector<T>,
}

impl<T: Real> GnhProblem<T> {
    /// Inputs are in the caller's frame; `tau` must be nonzero.
    pub fn new(
        inertia: &InertiaTensor<T>,
        potential: &PotentialSpec<T>,
        xi: &DualVector<T>,
        tau: &AlgebraVector<T>,
    ) -> Result<Self> {
        check_dim(3, inertia.dim())?;
        check_dim(3, xi.dim())?;
        check_dim(3, tau.dim())?;
        potential.check(3)?;
        let group = LieGroup::su2();
        if !tau.is_finite() || tau.norm() == T::zero() {
            return Err(Error::InvalidArgument("tau = 0 has no degenerate stratum".into()));
        }
        let (rotation, tau_w) = if tau[0] == T::zero() && tau[1] == T::zero() {
            (Matrix3::identity(), tau[2])
        } else {
            let t = Vector3::new(tau[0], tau[1], tau[2]);
            let r = Rotation3::rotation_between(&t, &Vector3::z())
                .unwrap_or_else(|| Rotation3::from_axis_angle(&Vector3::x_axis(), T::pi()));
            (r.into_inner(), t.norm())
        };
        let frame = {
            let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(rotation));
            GroupElement::unit_quaternion(q.w, q.i, q.j, q.k)?
        };
        let rot = |v: &[T]| {
            let w = rotation * Vector3::new(v[0], v[1], v[2]);
            [w[0], w[1], w[2]]
        };
        let r_dyn = DMatrix::from_fn(3, 3, |i, j| rotation[(i, j)]);
        let inertia_w = if rotation == Matrix3::identity() {
            inertia.clone()
        } else {
            let m = &r_dyn * inertia.inertia() * r_dyn.transpose();
            InertiaTensor::new((&m + m.transpose()) * T::lit(0.5))?
        };
        let potential_w = match potential {
            PotentialSpec::None => PotentialSpec::None,
            PotentialSpec::HeavyTop { gamma, l } => {
                PotentialSpec::heavy_top(gamma.clone(), AlgebraVector::from_slice(&rot(l.as_slice())))?
            }
        };
        let xi_w = rot(xi.as_slice());
        let theta = crate::cocycle::theta_from_xi(group.algebra(), &DualVector::from_slice(&xi_w))?;
        let ups = UpsilonField::from_tau(&AlgebraVector::from_slice(&[T::zero(), T::zero(), tau_w]))?;
        let selector = StructureSelector::full(theta, ups)?;
        Ok(Self {
            group,
            inertia: inertia_w,
            potential: potential_w,
            xi: xi_w,
            tau: tau_w,
            rotation,
            frame,
            selector,
        })
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn rotation(&self) -> DMatrix<T> {
        DMatrix::from_fn(3, 3, |i, j| self.rotation[(i, j)])
    }

    /// Maps an input-frame point to the working frame.
    pub fn to_working(&self, p: &PhasePoint<T>) -> Result<PhasePoint<T>> {
        let g = self.group.compose(&p.g, &self.group.inverse(&self.frame)?)?;
        let pi = self.rotation * Vector3::new(p.pi_l[0], p.pi_l[1], p.pi_l[2]);
        Ok(PhasePoint { g, pi_l: DualVector::from_slice(pi.as_slice()) })
    }

    /// Maps a working-frame point back to the input frame.
    pub fn to_input(&self, p: &PhasePoint<T>) -> Result<PhasePoint<T>> {
        let g = self.group.compose(&p.g, &self.frame)?;
        let pi = self.rotation.transpose() * Vector3::new(p.pi_l[0], p.pi_l[1], p.pi_l[2]);
        Ok(PhasePoint { g, pi_l: DualVector::from_slice(pi.as_slice()) })
    }

    /// Maps a working-frame tangent vector `(X^α, X_μ)` to the input frame.
    pub fn vector_to_input(&self, x: &DVector<T>) -> DVector<T> {
        let rt = self.rotation.transpose();
        let a = rt * Vector3::new(x[0], x[1], x[2]);
        let b = rt * Vector3::new(x[3], x[4], x[5]);
        DVector::from_column_slice(&[a[0], a[1], a[2], b[0], b[1], b[2]])
    }

    fn pi_prime(&self, p: &PhasePoint<T>) -> [T; 3] {
        [p.pi_l[0] + self.xi[0], p.pi_l[1] + self.xi[1], p.pi_l[2] + self.xi[2]]
    }

    /// `j₁(g, π₁, π₂)` with `π₃ = 1/τ − ξ₃` (working frame).
    pub fn embed_j1(&self, g: GroupElement<T>, pi12: [T; 2]) -> Result<PhasePoint<T>> {
        self.group.validate(&g)?;
        let pi3 = T::one() / self.tau - self.xi[2];
        PhasePoint::new(g, DualVector::from_slice(&[pi12[0], pi12[1], pi3]))
    }

    /// `C₁ = 1 − π′·τ`.
    pub fn primary_constraint(&self, p: &PhasePoint<T>) -> T {
        T::one() - self.pi_prime(p)[2] * self.tau
    }

    pub fn restricted_omega(&self, p: &PhasePoint<T>) -> Result<RestrictedFormPoint<T>> {
        let matrix = omega_matrix(&self.group, p, &self.selector)?;
        Ok(RestrictedFormPoint { point: p.clone(), pi_prime: self.pi_prime(p), matrix })
    }

    /// `Z¹, Z²`, after confirming the form has rank 4 at the point.
    pub fn null_vectors(&self, rf: &RestrictedFormPoint<T>) -> Result<[DVector<T>; 2]> {
        let rank = numerical_rank(&rf.matrix, T::lit(RANK_TOL));
        if rank != 4 {
            return Err(Error::InconsistentStratum(format!("restricted form has rank {rank}, expected 4")));
        }
        Ok(self.null_vectors_unchecked(&rf.pi_prime))
    }

    fn null_vectors_unchecked(&self, pp: &[T; 3]) -> [DVector<T>; 2] {
        let (o, z, it) = (T::one(), T::zero(), T::one() / self.tau);
        [
            DVector::from_column_slice(&[o, z, z, z, it, -pp[1]]),
            DVector::from_column_slice(&[z, o, z, -it, z, pp[0]]),
        ]
    }

    fn differential(&self, p: &PhasePoint<T>) -> Result<(DVector<T>, DVector<T>)> {
        let dv = potential_grad_left(&self.group, &p.g, &self.potential)?;
        let dk = kinetic_grad(&p.pi_l, &self.inertia)?;
        Ok((dv, dk))
    }

    /// `(C₂₁, C₂₂, C₂₃)`; the first two vanish exactly when `⟨dH | Zᵃ⟩ = 0`
    /// (`⟨dH | Zᵃ⟩ = −C₂ₐ`).
    pub fn secondary_constraints(&self, p: &PhasePoint<T>) -> Result<[T; 3]> {
        let (dv, dk) = self.differential(p)?;
        let pp = self.pi_prime(p);
        Ok([
            pp[1] * dk[2] - pp[2] * dk[1] - dv[0],
            pp[2] * dk[0] - pp[0] * dk[2] - dv[1],
            pp[0] * dk[1] - pp[1] * dk[0] - dv[2],
        ])
    }

    /// `X_P + ζ₁Z¹ + ζ₂Z²` at a point of `𝓜₂`.
    pub fn general_solution(&self, p: &PhasePoint<T>) -> Result<GeneralSolution<T>> {
        let c = self.secondary_constraints(p)?;
        for (a, &v) in c[..2].iter().enumerate() {
            if !(v.abs() < T::tol(SECONDARY_TOL)) {
                return Err(Error::ConstraintViolation { name: format!("C2{}", a + 1), value: v.to_f64_lossy() });
            }
        }
        self.general_solution_unchecked(p)
    }

    fn general_solution_unchecked(&self, p: &PhasePoint<T>) -> Result<GeneralSolution<T>> {
        let c = self.secondary_constraints(p)?;
        let (_, dk) = self.differential(p)?;
        let z = T::zero();
        let particular = DVector::from_column_slice(&[dk[0], dk[1], dk[2], z, z, c[2]]);
        Ok(GeneralSolution {
            point: p.clone(),
            particular,
            gauge: self.null_vectors_unchecked(&self.pi_prime(p)),
            c23: c[2],
        })
    }

    /// Central-difference gradients of `C₂₁, C₂₂` on the invariant basis.
    fn secondary_gradients(&self, p: &PhasePoint<T>) -> Result<[DVector<T>; 2]> {
        let h = T::lit(1e-6) * T::one().max(p.pi_l.norm());
        let two_h = h + h;
        let mut grads = [DVector::zeros(6), DVector::zeros(6)];
        for a in 0..3 {
            let up = PhasePoint { g: self.group.flow_left_invariant(&p.g, a, h)?, pi_l: p.pi_l.clone() };
            let dn = PhasePoint { g: self.group.flow_left_invariant(&p.g, a, -h)?, pi_l: p.pi_l.clone() };
            let (cu, cd) = (self.secondary_constraints(&up)?, self.secondary_constraints(&dn)?);
            for r in 0..2 {
                grads[r][a] = (cu[r] - cd[r]) / two_h;
            }
        }
        for mu in 0..3 {
            let (mut up, mut dn) = (p.clone(), p.clone());
            up.pi_l[mu] += h;
            dn.pi_l[mu] -= h;
            let (cu, cd) = (self.secondary_constraints(&up)?, self.secondary_constraints(&dn)?);
            for r in 0..2 {
                grads[r][3 + mu] = (cu[r] - cd[r]) / two_h;
            }
        }
        Ok(grads)
    }

    fn constraint_gradients(&self, p: &PhasePoint<T>) -> Result<[DVector<T>; 3]> {
        let mut dc1 = DVector::zeros(6);
        dc1[5] = -self.tau;
        let [g1, g2] = self.secondary_gradients(p)?;
        Ok([dc1, g1, g2])
    }

    /// Classifies the tangency conditions on the solution family.
    pub fn tangency_solve(&self, gs: &GeneralSolution<T>) -> Result<TangencyResult<T>> {
        let grads = self.constraint_gradients(&gs.point)?;
        let system = DMatrix::from_fn(3, 2, |r, c| grads[r].dot(&gs.gauge[c]));
        let rhs = DVector::from_fn(3, |r, _| -grads[r].dot(&gs.particular));
        Ok(classify(system, rhs))
    }

    /// Value of a constraint function at a working-frame point.
    pub fn constraint_value(&self, c: &Constraint<T>, p: &PhasePoint<T>) -> Result<T> {
        Ok(match c {
            Constraint::Primary => self.primary_constraint(p),
            Constraint::Secondary(a) => self.secondary_constraints(p)?[a - 1],
            Constraint::Tertiary { weights } => {
                let gs = self.general_solution_unchecked(p)?;
                let grads = self.constraint_gradients(p)?;
                (0..3).fold(T::zero(), |acc, r| acc + weights[r] * grads[r].dot(&gs.particular))
            }
        })
    }

    fn stratum(&self, level: usize, constraints: Vec<Constraint<T>>, dimension: Option<usize>, equals_previous: bool, p: &PhasePoint<T>) -> Result<ConstraintStratum<T>> {
        let residuals = constraints.iter().map(|c| self.constraint_value(c, p)).collect::<Result<Vec<_>>>()?;
        Ok(ConstraintStratum { level, constraints, dimension, equals_previous, point: self.to_input(p)?, residuals })
    }

    /// Scale for "identically zero" decisions on `C₂`.
    fn secondary_scale(&self, p: &PhasePoint<T>) -> T {
        let pp = self.pi_prime(p);
        let pn = (pp[0] * pp[0] + pp[1] * pp[1] + pp[2] * pp[2]).sqrt();
        let v = match &self.potential {
            PotentialSpec::None => T::zero(),
            PotentialSpec::HeavyTop { gamma, l } => gamma.norm() * l.norm(),
        };
        T::one().max(pn * pn * self.inertia.inverse().norm() + v)
    }

    /// Whether `C₂₁ = C₂₂ = 0` holds on all of `𝓜₁`, probed on a fixed
    /// quasi-random sample around `seed`.
    fn secondary_vanishes_on_m1(&self, seed: &PhasePoint<T>) -> Result<bool> {
        let spread = T::one().max(seed.pi_l.norm());
        for k in 1..=64u32 {
            let h = |base: u32| T::lit(radical_inverse(k, base) * 2.0 - 1.0);
            let u = AlgebraVector::from_slice(&[h(2) * T::lit(2.0), h(3) * T::lit(2.0), h(5) * T::lit(2.0)]);
            let g = self.group.compose(&seed.g, &self.group.exp(&u)?)?;
            let p = self.embed_j1(g, [seed.pi_l[0] + h(7) * spread, seed.pi_l[1] + h(11) * spread])?;
            let c = self.secondary_constraints(&p)?;
            let tol = T::lit(1e-10) * self.secondary_scale(&p);
            if c[0].abs() > tol || c[1].abs() > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Jacobian of `(C₂₁, C₂₂)` with respect to the `𝓜₁` parameters
    /// `(left-invariant displacement of g, π₁, π₂)`.
    fn m1_jacobian(&self, p: &PhasePoint<T>) -> Result<DMatrix<T>> {
        let grads = self.secondary_gradients(p)?;
        Ok(DMatrix::from_fn(2, 5, |r, c| grads[r][c]))
    }

    /// Minimum-norm Gauss–Newton projection of a `𝓜₁` point onto `𝓜₂`.
    fn project_to_m2(&self, seed: &PhasePoint<T>) -> Result<Option<PhasePoint<T>>> {
        let mut p = seed.clone();
        for _ in 0..60 {
            let c = self.secondary_constraints(&p)?;
            let f = DVector::from_column_slice(&[c[0], c[1]]);
            if f.amax() < T::lit(1e-13) * self.secondary_scale(&p) {
                return Ok(Some(p));
            }
            let jac = self.m1_jacobian(&p)?;
            let svd = jac.svd(true, true);
            let step = match svd.solve(&f, T::lit(RANK_TOL) * svd.singular_values.max()) {
                Ok(s) => s,
                Err(_) => return Ok(None),
            };
            if step.iter().any(|x| !x.is_finite()) {
                return Ok(None);
            }
            let du = AlgebraVector::from_slice(&[-step[0], -step[1], -step[2]]);
            let g = self.group.compose(&p.g, &self.group.exp(&du)?)?;
            p = self.embed_j1(g, [p.pi_l[0] - step[3], p.pi_l[1] - step[4]])?;
        }
        let c = self.secondary_constraints(&p)?;
        Ok((c[0].abs().max(c[1].abs()) < T::tol(SECONDARY_TOL)).then_some(p))
    }

    /// Runs the constraint algorithm from `seed` (input frame), which is
    /// first moved onto `𝓜₁` by resetting `π′₃ = 1/τ` in the working frame.
    pub fn run(&self, seed: &PhasePoint<T>) -> Result<GnhReport<T>> {
        seed.validate(&self.group)?;
        let w = self.to_working(seed)?;
        let p1 = self.embed_j1(w.g.clone(), [w.pi_l[0], w.pi_l[1]])?;
        let mut report = GnhReport {
            rotation: self.rotation(),
            tau: self.tau,
            strata: Vec::new(),
            general_solution: None,
            tangency: None,
            gauge_dimension: None,
            notice: None,
            warnings: Vec::new(),
        };
        let rf = self.restricted_omega(&p1)?;
        if let Err(e) = self.null_vectors(&rf) {
            report.notice = Some(format!("primary stratum is not regular at the seed: {e}"));
            return Ok(report);
        }
        report.strata.push(self.stratum(1, vec![Constraint::Primary], Some(5), false, &p1)?);

        let secondary = vec![Constraint::Primary, Constraint::Secondary(1), Constraint::Secondary(2)];
        let p2 = if self.secondary_vanishes_on_m1(&p1)? {
            report.strata.push(self.stratum(2, secondary.clone(), Some(5), true, &p1)?);
            p1
        } else {
            match self.project_to_m2(&p1)? {
                Some(p2) => {
                    let rank = numerical_rank(&self.m1_jacobian(&p2)?, T::lit(RANK_TOL));
                    report.strata.push(self.stratum(2, secondary.clone(), Some(5 - rank), false, &p2)?);
                    p2
                }
                None => {
                    report.notice =
                        Some("no point of the secondary stratum found near the seed; the analysis stops at level 1".into());
                    return Ok(report);
                }
            }
        };

        let gs = self.general_solution(&p2)?;
        let tangency = self.tangency_solve(&gs)?;
        if tangency.near_threshold {
            report.warnings.push("tangency classification is within two decades of the rank threshold".into());
        }
        match &tangency.outcome {
            TangencyOutcome::Determined { .. } => report.gauge_dimension = Some(0),
            TangencyOutcome::Underdetermined { gauge_dimension, .. } => report.gauge_dimension = Some(*gauge_dimension),
            TangencyOutcome::Tertiary { constraints } => {
                let mut all = secondary;
                all.extend(constraints.iter().map(|c| Constraint::Tertiary { weights: c.weights }));
                report.strata.push(self.stratum(MAX_LEVEL, all, None, false, &p2)?);
                report.notice = Some(format!(
                    "tertiary constraints appear; the tower is cut off at level {MAX_LEVEL} and the analysis must proceed with them"
                ));
            }
        }
        report.general_solution = Some(GeneralSolution {
            point: self.to_input(&gs.point)?,
            particular: self.vector_to_input(&gs.particular),
            gauge: [self.vector_to_input(&gs.gauge[0]), self.vector_to_input(&gs.gauge[1])],
            c23: gs.c23,
        });
        report.tangency = Some(tangency);
        Ok(report)
    }
}

fn classify<T: Real>(system: DMatrix<T>, rhs: DVector<T>) -> TangencyResult<T> {
    let sv = singular_values(&system);
    let top = sv.first().copied().unwrap_or(T::zero());
    let scale = T::one().max(top).max(rhs.amax());
    let threshold = T::lit(RANK_TOL) * scale;
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    let near = |x: T| x > threshold * T::lit(1e-2) && x < threshold * T::lit(1e2);
    let mut near_threshold = sv.iter().any(|&s| near(s));

    let svd = system.clone().svd(true, true);
    let zeta = svd.solve(&rhs, threshold).unwrap_or_else(|_| DVector::zeros(2));
    let residual = &system * &zeta - &rhs;
    near_threshold |= near(residual.amax());
    let outcome = if residual.amax() <= threshold {
        let z = [zeta[0], zeta[1]];
        if rank == 2 {
            TangencyOutcome::Determined { zeta: z }
        } else {
            TangencyOutcome::Underdetermined { gauge_dimension: 2 - rank, zeta: z }
        }
    } else {
        // left-null combinations wᵀA = 0 turn into conditions wᵀb = 0
        let left = null_space(&system.transpose(), threshold / scale);
        let constraints = left
            .column_iter()
            .map(|w| TertiaryConstraint { weights: [w[0], w[1], w[2]], value: -w.dot(&rhs) })
            .filter(|c| c.value.abs() > threshold)
            .collect();
        TangencyOutcome::Tertiary { constraints }
    };
    TangencyResult { system, rhs, singular_values: sv, rank, outcome, near_threshold }
}

/// Van der Corput radical inverse in `base`, in `[0, 1)`.
fn radical_inverse(mut k: u32, base: u32) -> f64 {
    let (mut inv, mut out) = (1.0 / base as f64, 0.0);
    while k > 0 {
        out += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    out
}

// Cocycle-typed handles used by callers assembling the full structure.
impl<T: Real> GnhProblem<T> {
    pub fn selector(&self) -> &StructureSelector<T> {
        &self.selector
    }

    pub fn theta(&self) -> &TwoCocycle<T> {
        self.selector.theta()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{hamiltonian_field, s_bundle, Differential};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(moments: [f64; 3], potential: PotentialSpec<f64>, xi: [f64; 3], tau: [f64; 3]) -> GnhProblem<f64> {
        GnhProblem::new(
            &InertiaTensor::diagonal(&moments).unwrap(),
            &potential,
            &DualVector::from_slice(&xi),
            &AlgebraVector::from_slice(&tau),
        )
        .unwrap()
    }

    fn random_g(rng: &mut ChaCha8Rng) -> GroupElement<f64> {
        let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        LieGroup::su2().exp(&AlgebraVector::from_slice(&u)).unwrap()
    }

    fn heavy_top() -> PotentialSpec<f64> {
        PotentialSpec::heavy_top(DualVector::from_slice(&[0.2, -0.1, -1.0]), AlgebraVector::from_slice(&[0.1, 0.3, 0.6]))
            .unwrap()
    }

    #[test]
    fn embedding_examples() {
        let pr = problem([1.0, 1.0, 1.0], PotentialSpec::None, [0.0; 3], [0.0, 0.0, 1.0]);
        let p = pr.embed_j1(GroupElement::unit_quaternion(1.0, 0.0, 0.0, 0.0).unwrap(), [0.0, 0.0]).unwrap();
        assert_eq!(p.pi_l.as_slice(), &[0.0, 0.0, 1.0]);
        assert!(GnhProblem::new(
            &InertiaTensor::diagonal(&[1.0, 1.0, 1.0]).unwrap(),
            &PotentialSpec::None,
            &DualVector::zeros(3),
            &AlgebraVector::zeros(3)
        )
        .is_err());

        let pr = problem([1.0, 2.0, 3.0], PotentialSpec::None, [0.3, -0.2, 0.7], [0.0, 0.0, 0.4]);
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let p = pr.embed_j1(random_g(&mut rng), [0.5, -0.9]).unwrap();
        assert!(pr.primary_constraint(&p).abs() < 1e-14);
        let b = s_bundle(&pr.group, &p, &pr.selector).unwrap();
        assert!(b.delta.abs() < 1e-14);
    }

    #[test]
    fn embedding_pushforward_has_no_third_momentum_slot() {
        let pr = problem([1.0, 2.0, 3.0], PotentialSpec::None, [0.1, 0.2, 0.3], [0.0, 0.0, 0.7]);
        let g = GroupElement::unit_quaternion(0.8, 0.2, 0.1, -0.3).unwrap();
        let h = 1e-6;
        for k in 0..2 {
            let mut up = [0.4, -0.6];
            let mut dn = up;
            up[k] += h;
            dn[k] -= h;
            let a = pr.embed_j1(g.clone(), up).unwrap();
            let b = pr.embed_j1(g.clone(), dn).unwrap();
            let d: Vec<f64> = (0..3).map(|i| (a.pi_l[i] - b.pi_l[i]) / (2.0 * h)).collect();
            assert!((d[k] - 1.0).abs() < 1e-9);
            assert_eq!(d[2], 0.0);
        }
    }

    #[test]
    fn restricted_form_and_null_vectors() {
        let tau = 0.5;
        let pr = problem([1.0, 2.0, 3.0], PotentialSpec::None, [0.0; 3], [0.0, 0.0, tau]);
        let p = pr.embed_j1(GroupElement::unit_quaternion(1.0, 0.0, 0.0, 0.0).unwrap(), [0.3, -0.7]).unwrap();
        let rf = pr.restricted_omega(&p).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(6, 6, &[
            0.0, 1.0 / tau, 0.7, 1.0, 0.0, 0.0,
            -1.0 / tau, 0.0, 0.3, 0.0, 1.0, 0.0,
            -0.7, -0.3, 0.0, 0.0, 0.0, 1.0,
            -1.0, 0.0, 0.0, 0.0, tau, 0.0,
            0.0, -1.0, 0.0, -tau, 0.0, 0.0,
            0.0, 0.0, -1.0, 0.0, 0.0, 0.0,
        ]);
        assert_eq!(rf.matrix, expected);
        let z = pr.null_vectors(&rf).unwrap();
        for v in &z {
            assert!((v.transpose() * &rf.matrix).amax() < 1e-12);
        }
        // the pair spans the numerical kernel
        let kernel = null_space(&rf.matrix, 1e-9);
        assert_eq!(kernel.ncols(), 2);
        let basis = DMatrix::from_columns(&[z[0].clone(), z[1].clone()]);
        let q = basis.qr().q();
        let cosines = singular_values(&(q.transpose() * kernel));
        assert!(cosines.iter().all(|c| (c - 1.0).abs() < 1e-12));

        let pr = problem([1.0, 1.0, 1.0], PotentialSpec::None, [0.0; 3], [0.0, 0.0, 1.0]);
        let p = pr.embed_j1(GroupElement::unit_quaternion(1.0, 0.0, 0.0, 0.0).unwrap(), [0.0, 0.0]).unwrap();
        let z = pr.null_vectors(&pr.restricted_omega(&p).unwrap()).unwrap();
        assert_eq!(z[0].as_slice(), &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn off_stratum_point_is_inconsistent() {
        let pr = problem([1.0, 1.0, 1.0], PotentialSpec::None, [0.0; 3], [0.0, 0.0, 1.0]);
        let p = PhasePoint::new(GroupElement::unit_quaternion(1.0, 0.0, 0.0, 0.0).unwrap(), DualVector::from_slice(&[0.0, 0.0, 0.5]))
            .unwrap();
        let rf = pr.restricted_omega(&p).unwrap();
        assert!(matches!(pr.null_vectors(&rf), Err(Error::InconsistentStratum(_))));
    }

    #[test]
    fn secondary_constraints_are_consistency_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let pr = problem([1.0, 1.7, 2.4], heavy_top(), [0.3, -0.5, 0.2], [0.0, 0.0, 0.6]);
        for _ in 0..100 {
            let p = pr.embed_j1(random_g(&mut rng), [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).unwrap();
            let c = pr.secondary_constraints(&p).unwrap();
            let (dv, dk) = pr.differential(&p).unwrap();
            let dh = DVector::from_iterator(6, dv.iter().chain(dk.iter()).copied());
            let z = pr.null_vectors(&pr.restricted_omega(&p).unwrap()).unwrap();
            for a in 0..2 {
                assert!((dh.dot(&z[a]) + c[a]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn secondary_constraint_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let i0 = 2.0;
        let free = problem([i0; 3], PotentialSpec::None, [0.0; 3], [0.0, 0.0, 0.8]);
        let xi = [0.4, -0.3, 0.9];
        let twisted = problem([i0; 3], PotentialSpec::None, xi, [0.0, 0.0, 0.8]);
        for _ in 0..20 {
            let pi12 = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let p = free.embed_j1(random_g(&mut rng), pi12).unwrap();
            assert!(free.secondary_constraints(&p).unwrap().iter().all(|c| c.abs() < 1e-14));

            let p = twisted.embed_j1(random_g(&mut rng), pi12).unwrap();
            let pp = twisted.pi_prime(&p);
            let c = twisted.secondary_constraints(&p).unwrap();
            assert!((c[0] - (xi[1] * pp[2] - xi[2] * pp[1]) / i0).abs() < 1e-14);
        }
    }

    #[test]
    fn general_solution_residual_and_gauge_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let i0 = 1.5;
        let pr = problem([i0; 3], PotentialSpec::None, [0.0; 3], [0.0, 0.0, 0.9]);
        let p = pr.embed_j1(random_g(&mut rng), [0.4, -1.1]).unwrap();
        let gs = pr.general_solution(&p).unwrap();
        for k in 0..3 {
            assert!((gs.particular[k] - p.pi_l[k] / i0).abs() < 1e-15);
        }
        assert!(gs.particular.rows(3, 3).amax() < 1e-15);

        let m = pr.restricted_omega(&p).unwrap().matrix;
        let (dv, dk) = pr.differential(&p).unwrap();
        let dh = DVector::from_iterator(6, dv.iter().chain(dk.iter()).copied());
        let base = (m.transpose() * &gs.particular - &dh).amax();
        assert!(base < 1e-10);
        for _ in 0..100 {
            let x = gs.member([rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)]);
            assert!(((m.transpose() * x - &dh).amax() - base).abs() < 1e-12);
        }

        let twisted = problem([i0; 3], PotentialSpec::None, [0.0, 0.0, 0.5], [0.0, 0.0, 0.9]);
        let p = twisted.embed_j1(random_g(&mut rng), [0.4, -1.1]).unwrap();
        assert!(matches!(twisted.general_solution(&p), Err(Error::ConstraintViolation { .. })));
    }

    #[test]
    fn general_solution_satisfies_hamilton_equation_with_potential() {
        // heavy top on 𝓜₂: project a seed first, then compare with i_X ω = dH
        let pr = problem([1.0, 1.7, 2.4], heavy_top(), [0.3, -0.5, 0.2], [0.0, 0.0, 0.6]);
        let seed = pr.embed_j1(GroupElement::unit_quaternion(0.9, 0.1, 0.3, -0.2).unwrap(), [0.2, 0.1]).unwrap();
        let p2 = pr.project_to_m2(&seed).unwrap().expect("secondary stratum reachable");
        let gs = pr.general_solution(&p2).unwrap();
        let m = pr.restricted_omega(&p2).unwrap().matrix;
        let (dv, dk) = pr.differential(&p2).unwrap();
        let dh = DVector::from_iterator(6, dv.iter().chain(dk.iter()).copied());
        assert!((m.transpose() * &gs.particular - dh).amax() < 1e-10);
    }

    #[test]
    fn tangency_row_for_primary_constraint() {
        let tau = 0.8;
        let pr = problem([1.0, 1.0, 1.0], PotentialSpec::None, [0.0; 3], [0.0, 0.0, tau]);
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let p = pr.embed_j1(random_g(&mut rng), [0.6, -0.2]).unwrap();
        let gs = pr.general_solution(&p).unwrap();
        let t = pr.tangency_solve(&gs).unwrap();
        let pp = pr.pi_prime(&p);
        // −τ (ζ₁(−π′₂) + ζ₂π′₁ + C₂₃)
        assert!((t.system[(0, 0)] - tau * pp[1]).abs() < 1e-15);
        assert!((t.system[(0, 1)] + tau * pp[0]).abs() < 1e-15);
        assert!((t.rhs[0] - tau * gs.c23).abs() < 1e-15);
        // generic point of the free spherical stratum: one gauge direction survives
        assert!(matches!(t.outcome, TangencyOutcome::Underdetermined { gauge_dimension: 1, .. }));
    }

    #[test]
    fn free_spherical_run_has_two_gauge_directions_on_the_axis() {
        let pr = problem([1.3; 3], PotentialSpec::None, [0.0; 3], [0.0, 0.0, 0.7]);
        let seed = PhasePoint::new(GroupElement::unit_quaternion(0.9, 0.2, -0.1, 0.3).unwrap(), DualVector::from_slice(&[0.0, 0.0, 5.0]))
            .unwrap();
        let report = pr.run(&seed).unwrap();
        assert!(report.m2_equals_m1());
        assert_eq!(report.gauge_dimension, Some(2));
        assert!(report.notice.is_none());
    }

    #[test]
    fn twisted_spherical_run_finds_axis_line() {
        let (i0, tau, xi3) = (1.3, 0.7, 0.45);
        let pr = problem([i0; 3], PotentialSpec::None, [0.0, 0.0, xi3], [0.0, 0.0, tau]);
        let seed = PhasePoint::new(GroupElement::unit_quaternion(0.9, 0.2, -0.1, 0.3).unwrap(), DualVector::from_slice(&[0.5, -0.8, 0.0]))
            .unwrap();
        let report = pr.run(&seed).unwrap();
        assert!(!report.m2_equals_m1());
        let m2 = &report.strata[1];
        assert_eq!(m2.dimension, Some(3));
        assert!(m2.point.pi_l[0].abs() < 1e-12 && m2.point.pi_l[1].abs() < 1e-12);
        assert!((m2.point.pi_l[2] + xi3 - 1.0 / tau).abs() < 1e-12);
        assert_eq!(report.gauge_dimension, Some(0));
    }

    #[test]
    fn general_tau_is_rotated_onto_the_axis() {
        let tau = [0.3, -0.4, 0.5];
        let pr = problem([1.0, 2.0, 3.0], heavy_top(), [0.1, 0.2, -0.3], tau);
        let r = pr.rotation();
        let t = &r * DVector::from_column_slice(&tau);
        assert!(t[0].abs() < 1e-15 && t[1].abs() < 1e-15);
        assert!((pr.tau() - DVector::from_column_slice(&tau).norm()).abs() < 1e-15);
        let ad = pr.group.adjoint(&pr.frame).unwrap();
        assert!((ad - &r).amax() < 1e-14);

        // the round trip through the input frame keeps the point degenerate
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        let g = random_g(&mut rng);
        let p = pr.embed_j1(g, [0.2, 0.1]).unwrap();
        let back = pr.to_input(&p).unwrap();
        let pp_in: f64 = (0..3).map(|i| (back.pi_l[i] + [0.1, 0.2, -0.3][i]) * tau[i]).sum();
        assert!((1.0 - pp_in).abs() < 1e-14);
        let again = pr.to_working(&back).unwrap();
        assert!((&again.pi_l.0 - &p.pi_l.0).amax() < 1e-14);

        let report = pr.run(&back).unwrap();
        assert!(report.strata.len() >= 2);
    }

    #[test]
    fn heavy_top_runs_terminate_within_three_levels() {
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        for _ in 0..10 {
            let moments = [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)];
            let xi = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            let pr = problem(moments, heavy_top(), xi, [0.0, 0.0, rng.gen_range(0.3..1.0)]);
            let seed = PhasePoint::new(random_g(&mut rng), DualVector::from_slice(&[0.1, 0.2, 0.0])).unwrap();
            let report = pr.run(&seed).unwrap();
            assert!(report.strata.len() <= MAX_LEVEL);
            assert!(report.gauge_dimension.is_some() || report.notice.is_some());
        }
    }

    #[test]
    fn hamiltonian_field_fails_on_the_stratum() {
        let pr = problem([1.0, 2.0, 3.0], PotentialSpec::None, [0.0; 3], [0.0, 0.0, 0.5]);
        let p = pr.embed_j1(GroupElement::unit_quaternion(1.0, 0.0, 0.0, 0.0).unwrap(), [0.1, 0.2]).unwrap();
        let r = hamiltonian_field(&pr.group, &p, &pr.selector, &Differential::zeros(3));
        assert!(matches!(r, Err(Error::DegeneratePoint { .. })));
    }
}
