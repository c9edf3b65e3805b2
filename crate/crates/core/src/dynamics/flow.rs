use nalgebra::DVector;

use super::hamiltonian::{body_force, force_gradient, kinetic, kinetic_grad, potential, potential_grad_left};
use super::{InertiaTensor, PotentialSpec};
use crate::cocycle::xi_from_theta;
use crate::error::{check_dim, Error, Result};
use crate::lie_core::{AlgebraVector, DualVector, GroupElement, LieGroup};
use crate::symplectic::{
    hamiltonian_field, momentum_component, s_matrix, Differential, PhasePoint, StructureMode, StructureSelector,
};
use crate::Real;

/// Which family of equations of motion drives the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlowMode {
    /// Canonical form, `Ω = 𝓘π`, `π̇ = −π·f(Ω) − dV`.
    EulerCanonical,
    /// Canonical heavy top with the body force `Γ` carried as state.
    EulerPoisson,
    /// Cocycle-twisted form in body momenta.
    Cocycle,
    /// Cocycle-twisted form in the shifted momenta `π′ = π + ξ`, where it is canonical.
    Darboux,
    /// The extended form with `Υ`; degenerates where `Δ = 0`.
    Full,
}

impl FlowMode {
    pub fn structure_mode(self) -> StructureMode {
        match self {
            Self::EulerCanonical | Self::EulerPoisson => StructureMode::Canonical,
            Self::Cocycle | Self::Darboux => StructureMode::Cocycle,
            Self::Full => StructureMode::Full,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::EulerCanonical => "euler-canonical",
            Self::EulerPoisson => "euler-poisson",
            Self::Cocycle => "cocycle",
            Self::Darboux => "darboux",
            Self::Full => "full",
        }
    }
}

/// Integrated state. `m` holds `π^L`, except in Darboux mode where it holds
/// `π′`; `gamma` is present only in Euler–Poisson mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState<T: Real> {
    pub g: GroupElement<T>,
    pub m: DualVector<T>,
    pub gamma: Option<DualVector<T>>,
}

/// Time derivative of a [`FlowState`], plus the body velocity that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct StateRate<T: Real> {
    pub g: DVector<T>,
    pub m: DVector<T>,
    pub gamma: Option<DVector<T>>,
    pub omega: DVector<T>,
}

/// A mechanical system: group, active two-form, inertia and potential.
#[derive(Debug, Clone, PartialEq)]
pub struct System<T: Real> {
    group: LieGroup<T>,
    selector: StructureSelector<T>,
    inertia: InertiaTensor<T>,
    potential: PotentialSpec<T>,
    xi: Option<DualVector<T>>,
}

impl<T: Real> System<T> {
    pub fn new(
        group: LieGroup<T>,
        selector: StructureSelector<T>,
        inertia: InertiaTensor<T>,
        potential: PotentialSpec<T>,
    ) -> Result<Self> {
        let n = group.dim();
        check_dim(n, selector.dim())?;
        check_dim(n, inertia.dim())?;
        potential.check(n)?;
        let theta = selector.theta();
        let xi = if theta.is_zero() {
            Some(DualVector::zeros(n))
        } else if group.algebra().is_semisimple() {
            xi_from_theta(group.algebra(), theta).ok()
        } else {
            None
        };
        Ok(Self { group, selector, inertia, potential, xi })
    }

    pub fn group(&self) -> &LieGroup<T> {
        &self.group
    }

    pub fn selector(&self) -> &StructureSelector<T> {
        &self.selector
    }

    pub fn inertia(&self) -> &InertiaTensor<T> {
        &self.inertia
    }

    pub fn potential(&self) -> &PotentialSpec<T> {
        &self.potential
    }

    /// Magnetic field `ξ` with `Θ = −ξ·f`, when `Θ` has that form.
    pub fn xi(&self) -> Option<&DualVector<T>> {
        self.xi.as_ref()
    }

    /// Rejects mode/structure/potential combinations that do not make sense.
    pub fn check_mode(&self, mode: FlowMode) -> Result<()> {
        let wanted = mode.structure_mode();
        if self.selector.mode() != wanted {
            return Err(Error::InvalidArgument(format!(
                "flow mode {} needs a {:?} structure, found {:?}",
                mode.name(),
                wanted,
                self.selector.mode()
            )));
        }
        match mode {
            FlowMode::EulerPoisson if self.potential.is_none() => {
                Err(Error::InvalidArgument("euler-poisson mode requires a heavy-top potential".into()))
            }
            FlowMode::Darboux if !self.group.algebra().is_semisimple() && !self.selector.theta().is_zero() => {
                Err(Error::InvalidArgument("darboux mode requires a semisimple algebra".into()))
            }
            FlowMode::Darboux if self.xi.is_none() => {
                Err(Error::InvalidArgument("darboux mode requires theta of the form -xi.f".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn initial_state(&self, mode: FlowMode, p: &PhasePoint<T>) -> Result<FlowState<T>> {
        self.check_mode(mode)?;
        p.validate(&self.group)?;
        let m = match mode {
            FlowMode::Darboux => DualVector(&p.pi_l.0 + &self.xi.as_ref().expect("checked by check_mode").0),
            _ => p.pi_l.clone(),
        };
        let gamma = match (mode, &self.potential) {
            (FlowMode::EulerPoisson, PotentialSpec::HeavyTop { gamma, .. }) => {
                Some(body_force(&self.group, &p.g, gamma)?)
            }
            _ => None,
        };
        Ok(FlowState { g: p.g.clone(), m, gamma })
    }

    /// Body-coordinate phase point of a state.
    pub fn phase_point(&self, mode: FlowMode, state: &FlowState<T>) -> PhasePoint<T> {
        let pi_l = match (mode, &self.xi) {
            (FlowMode::Darboux, Some(xi)) => DualVector(&state.m.0 - &xi.0),
            _ => state.m.clone(),
        };
        PhasePoint { g: state.g.clone(), pi_l }
    }

    /// `H = K + V`. In Euler–Poisson mode `V = −(Γ | L)` uses the carried `Γ`.
    pub fn energy(&self, mode: FlowMode, state: &FlowState<T>) -> Result<T> {
        let p = self.phase_point(mode, state);
        let k = kinetic(&p.pi_l, &self.inertia)?;
        let v = match (&state.gamma, &self.potential) {
            (Some(big_gamma), PotentialSpec::HeavyTop { l, .. }) => -big_gamma.pair(l),
            _ => potential(&self.group, &unit(&p.g), &self.potential)?,
        };
        Ok(k + v)
    }

    /// Right-hand side of the equations of motion.
    pub fn rhs(&self, mode: FlowMode, state: &FlowState<T>) -> Result<StateRate<T>> {
        self.check_mode(mode)?;
        check_dim(self.group.dim(), state.m.dim())?;
        // integrator stages drift off the unit sphere by O(dt²); evaluate on it
        let g = unit(&state.g);
        let (omega, m_rate, gamma_rate) = match mode {
            FlowMode::EulerCanonical | FlowMode::Cocycle => {
                let dv = potential_grad_left(&self.group, &g, &self.potential)?;
                let omega = kinetic_grad(&state.m, &self.inertia)?;
                let s = s_matrix(&self.group, &state.m, &self.selector);
                let rate = momentum_component(&s, &omega, &dv);
                (omega, rate, None)
            }
            FlowMode::EulerPoisson => {
                let big_gamma = state
                    .gamma
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("euler-poisson state carries no body force".into()))?;
                let PotentialSpec::HeavyTop { l, .. } = &self.potential else {
                    return Err(Error::InvalidArgument("euler-poisson mode requires a heavy-top potential".into()));
                };
                let dv = force_gradient(self.group.algebra(), big_gamma, l);
                let omega = kinetic_grad(&state.m, &self.inertia)?;
                let s = s_matrix(&self.group, &state.m, &self.selector);
                let rate = momentum_component(&s, &omega, &dv);
                // Γ̇_μ = Γ_α f^α_{βμ} Ω^β
                let ad = self.group.algebra().ad_matrix(&AlgebraVector(omega.clone()))?;
                let gamma_rate = ad.transpose() * &big_gamma.0;
                (omega, rate, Some(gamma_rate))
            }
            FlowMode::Darboux => {
                let xi = self.xi.as_ref().expect("checked by check_mode");
                let dv = potential_grad_left(&self.group, &g, &self.potential)?;
                let omega = kinetic_grad(&DualVector(&state.m.0 - &xi.0), &self.inertia)?;
                let s = self.group.algebra().contract_dual(&state.m)?;
                let rate = momentum_component(&s, &omega, &dv);
                (omega, rate, None)
            }
            FlowMode::Full => {
                let dh = Differential::new(
                    potential_grad_left(&self.group, &g, &self.potential)?,
                    kinetic_grad(&state.m, &self.inertia)?,
                );
                let p = PhasePoint { g: g.clone(), pi_l: state.m.clone() };
                let x = hamiltonian_field(&self.group, &p, &self.selector, &dh)?;
                (x.group, x.momentum, None)
            }
        };
        let g_rate = self.group.group_rate_unchecked(&state.g, &AlgebraVector(omega.clone()))?;
        Ok(StateRate { g: g_rate, m: m_rate, gamma: gamma_rate, omega })
    }
}

fn unit<T: Real>(g: &GroupElement<T>) -> GroupElement<T> {
    let mut out = g.clone();
    out.renormalize();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{theta_from_xi, UpsilonField};
    use crate::lie_core::StructureConstants;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng, grp: &LieGroup<f64>) -> PhasePoint<f64> {
        let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let pi: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        PhasePoint::new(grp.exp(&AlgebraVector::from_slice(&u)).unwrap(), DualVector::from_slice(&pi)).unwrap()
    }

    #[test]
    fn spherical_free_body_has_constant_momentum() {
        let grp = LieGroup::su2();
        let sys = System::new(
            grp.clone(),
            StructureSelector::canonical(3),
            InertiaTensor::spherical(3, 2.0).unwrap(),
            PotentialSpec::None,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let p = random_state(&mut rng, &grp);
        let st = sys.initial_state(FlowMode::EulerCanonical, &p).unwrap();
        let rate = sys.rhs(FlowMode::EulerCanonical, &st).unwrap();
        assert!(rate.m.amax() < 1e-15);
        assert_eq!(rate.omega, &p.pi_l.0 * 0.5);
    }

    #[test]
    fn cocycle_rhs_matches_component_formula() {
        let grp = LieGroup::su2();
        let theta = theta_from_xi(grp.algebra(), &DualVector::from_slice(&[0.3, -0.5, 0.8])).unwrap();
        let sys = System::new(
            grp.clone(),
            StructureSelector::cocycle(theta.clone()),
            InertiaTensor::diagonal(&[1.0, 2.0, 3.0]).unwrap(),
            PotentialSpec::None,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let p = random_state(&mut rng, &grp);
        let rate = sys.rhs(FlowMode::Cocycle, &sys.initial_state(FlowMode::Cocycle, &p).unwrap()).unwrap();
        let f = grp.algebra();
        for mu in 0..3 {
            let mut expected = 0.0;
            for a in 0..3 {
                for k in 0..3 {
                    expected -= p.pi_l[k] * f.f(k, mu, a) * rate.omega[a];
                }
                expected -= rate.omega[a] * theta.get(a, mu);
            }
            assert!((rate.m[mu] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn full_free_rhs_matches_su2_specialization() {
        let grp = LieGroup::su2();
        let xi = [0.2, 0.1, -0.4];
        let tau = [0.1, -0.3, 0.2];
        let theta = theta_from_xi(grp.algebra(), &DualVector::from_slice(&xi)).unwrap();
        let ups = UpsilonField::from_tau(&AlgebraVector::from_slice(&tau)).unwrap();
        let inertia = InertiaTensor::diagonal(&[1.0, 1.5, 2.5]).unwrap();
        let sys = System::new(grp.clone(), StructureSelector::full(theta, ups).unwrap(), inertia.clone(), PotentialSpec::None)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..20 {
            let p = random_state(&mut rng, &grp);
            let rate = sys.rhs(FlowMode::Full, &sys.initial_state(FlowMode::Full, &p).unwrap()).unwrap();
            let pp: Vec<f64> = (0..3).map(|i| p.pi_l[i] + xi[i]).collect();
            let c1 = 1.0 - (0..3).map(|i| pp[i] * tau[i]).sum::<f64>();
            // Ω Φ = ∂K/∂π, i.e. Ω = ∂K·Φ⁻¹ with Φ⁻¹ = (δ − τπ′ᵀ)/C₁
            let dk = kinetic_grad(&p.pi_l, &inertia).unwrap();
            let tk: f64 = (0..3).map(|i| tau[i] * dk[i]).sum();
            for b in 0..3 {
                let omega_b = (dk[b] - tk * pp[b]) / c1;
                assert!((rate.omega[b] - omega_b).abs() < 1e-12);
            }
            // π̇_μ = Ω^α π′_β ε_{βαμ}
            for mu in 0..3 {
                let mut expected = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        expected += rate.omega[a] * pp[b] * grp.algebra().f(b, a, mu);
                    }
                }
                assert!((rate.m[mu] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mode_consistency_is_enforced() {
        let grp = LieGroup::<f64>::su2();
        let sys = System::new(
            grp.clone(),
            StructureSelector::canonical(3),
            InertiaTensor::spherical(3, 1.0).unwrap(),
            PotentialSpec::None,
        )
        .unwrap();
        assert!(sys.check_mode(FlowMode::EulerCanonical).is_ok());
        assert!(sys.check_mode(FlowMode::EulerPoisson).is_err());
        assert!(sys.check_mode(FlowMode::Full).is_err());

        let ext = LieGroup::<f64>::new(StructureConstants::su2_plus_center());
        let mut theta = nalgebra::DMatrix::zeros(4, 4);
        theta[(0, 1)] = 1.0;
        theta[(1, 0)] = -1.0;
        let theta = crate::cocycle::TwoCocycle::new(ext.algebra(), &theta).unwrap();
        let sys = System::new(
            ext,
            StructureSelector::cocycle(theta),
            InertiaTensor::spherical(4, 1.0).unwrap(),
            PotentialSpec::None,
        )
        .unwrap();
        assert!(sys.check_mode(FlowMode::Cocycle).is_ok());
        assert!(sys.check_mode(FlowMode::Darboux).is_err());
    }
}
