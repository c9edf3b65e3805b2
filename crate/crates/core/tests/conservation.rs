use approx::assert_relative_eq;
use symplie::cocycle::{theta_from_xi, TwoCocycle, UpsilonField};
use symplie::dynamics::{FlowMode, Halt, InertiaTensor, IntegratorConfig, PotentialSpec, System};
use symplie::symplectic::{PhasePoint, StructureSelector};
use symplie::{AlgebraVector, DualVector, GroupElement, LieGroup, PhasePoint32, System32};

fn g0() -> GroupElement<f64> {
    GroupElement::unit_quaternion(0.9, 0.1, -0.3, 0.2).unwrap()
}

fn heavy_top(moments: [f64; 3], gamma: f64) -> System<f64> {
    System::new(
        LieGroup::su2(),
        StructureSelector::canonical(3),
        InertiaTensor::diagonal(&moments).unwrap(),
        PotentialSpec::heavy_top(DualVector::from_slice(&[0.0, 0.0, -gamma]), AlgebraVector::from_slice(&[0.2, 0.1, 0.5]))
            .unwrap(),
    )
    .unwrap()
}

#[test]
fn energy_error_is_fourth_order() {
    let sys = heavy_top([0.5, 0.7, 1.0], 20.0);
    let p = PhasePoint::new(g0(), DualVector::from_slice(&[1.0, 2.0, 3.0])).unwrap();
    let drift = |dt| sys.integrate(FlowMode::EulerCanonical, &p, &IntegratorConfig::new(dt, 10.0)).unwrap().drift("energy").unwrap();
    let (d1, d2) = (drift(1e-3), drift(5e-4));
    assert!(d1 < 1e-8, "{d1:e}");
    assert!((12.0..=20.0).contains(&(d1 / d2)), "ratio {}", d1 / d2);
}

#[test]
fn euler_poisson_matches_canonical_and_keeps_gamma_norm() {
    let sys = heavy_top([1.0, 1.7, 2.6], 9.81);
    let p = PhasePoint::new(g0(), DualVector::from_slice(&[1.0, 2.0, 3.0])).unwrap();
    let cfg = IntegratorConfig::new(1e-3, 5.0);
    let ep = sys.integrate(FlowMode::EulerPoisson, &p, &cfg).unwrap();
    let canon = sys.integrate(FlowMode::EulerCanonical, &p, &cfg).unwrap();
    assert!(ep.drift("gamma_norm2").unwrap() < 1e-9);
    for i in 0..3 {
        assert_relative_eq!(ep.last().pi_l[i], canon.last().pi_l[i], epsilon = 1e-8);
    }
}

#[test]
fn shifted_momentum_norm_is_a_casimir() {
    let grp = LieGroup::su2();
    let theta = theta_from_xi(grp.algebra(), &DualVector::from_slice(&[0.3, -0.4, 0.5])).unwrap();
    let sys = System::new(grp, StructureSelector::cocycle(theta), InertiaTensor::diagonal(&[1.0, 1.7, 2.6]).unwrap(), PotentialSpec::None)
        .unwrap();
    let p = PhasePoint::new(g0(), DualVector::from_slice(&[0.8, -0.6, 1.1])).unwrap();
    for mode in [FlowMode::Cocycle, FlowMode::Darboux] {
        let tr = sys.integrate(mode, &p, &IntegratorConfig::new(1e-3, 10.0)).unwrap();
        assert!(tr.drift("pi_prime_norm2").unwrap() < 1e-9, "{mode:?}");
        assert!(tr.drift("energy").unwrap() < 1e-8, "{mode:?}");
    }
}

#[test]
fn spherical_free_body_keeps_momentum() {
    let sys = System::new(LieGroup::su2(), StructureSelector::canonical(3), InertiaTensor::spherical(3, 1.4).unwrap(), PotentialSpec::None)
        .unwrap();
    let pi = DualVector::from_slice(&[0.3, -1.2, 0.7]);
    let tr = sys.integrate(FlowMode::EulerCanonical, &PhasePoint::new(g0(), pi.clone()).unwrap(), &IntegratorConfig::new(1e-2, 10.0)).unwrap();
    assert!(tr.points.iter().all(|p| (&p.pi_l.0 - &pi.0).amax() < 1e-12));
}

#[test]
fn full_flow_halts_at_the_degenerate_set() {
    let sel = StructureSelector::full(TwoCocycle::zero(3), UpsilonField::from_tau(&AlgebraVector::from_slice(&[0.0, 0.0, 1.0])).unwrap())
        .unwrap();
    let sys = System::new(LieGroup::su2(), sel, InertiaTensor::diagonal(&[1.0, 2.0, 3.0]).unwrap(), PotentialSpec::None).unwrap();
    let p = PhasePoint::new(g0(), DualVector::from_slice(&[1.0, 0.6, 0.9])).unwrap();
    let tr = sys.integrate(FlowMode::Full, &p, &IntegratorConfig::new(1e-3, 20.0)).unwrap();
    match tr.halt {
        Some(Halt::Degeneracy(ev)) => {
            assert!(ev.t_hi - ev.t_lo < 1e-2);
            assert!(ev.delta_lo > ev.tolerance && ev.delta_hi <= ev.tolerance);
        }
        other => panic!("expected a degeneracy halt, got {other:?}"),
    }
}

#[test]
fn single_precision_tracks_double() {
    let grp = LieGroup::<f32>::su2();
    let sys: System32 = System::new(grp, StructureSelector::canonical(3), InertiaTensor::diagonal(&[1.0, 1.7, 2.6]).unwrap(), PotentialSpec::None)
        .unwrap();
    let p: PhasePoint32 = PhasePoint::new(GroupElement::unit_quaternion(0.9, 0.1, -0.3, 0.2).unwrap(), DualVector::from_slice(&[0.5, -0.2, 0.8]))
        .unwrap();
    let tr = sys.integrate(FlowMode::EulerCanonical, &p, &IntegratorConfig::new(1e-2, 2.0)).unwrap();
    assert!(tr.drift("energy").unwrap() < 1e-4);
}
