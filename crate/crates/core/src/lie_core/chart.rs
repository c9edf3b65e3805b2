//! Coordinate charts on the cotangent bundle: holonomic `(g^α, p_μ)`, body
//! `(g^α, π^L_μ)` and space `(g^α, π^R_μ)`.

use super::algebra::DualVector;
use super::group::{GroupElement, LieGroup};
use crate::error::{check_dim, Error, Result};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    Holonomic,
    Body,
    Space,
}

/// A point of T*(G) with its momentum expressed in `chart`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint<T: Real> {
    pub chart: Chart,
    pub g: GroupElement<T>,
    pub momentum: DualVector<T>,
}

impl<T: Real> ChartPoint<T> {
    pub fn new(chart: Chart, g: GroupElement<T>, momentum: DualVector<T>) -> Self {
        Self { chart, g, momentum }
    }
}

impl<T: Real> LieGroup<T> {
    /// Re-expresses the momentum of `p` in `target`.
    ///
    /// Body and space momenta are related by `π^R = K(g) π^L`; holonomic and
    /// body momenta by `π^L_μ = p_ν L^ν_μ(g, e)`. Holonomic momenta are only
    /// available for the SU(2) realization, where the exponential chart is exact.
    pub fn chart_convert(&self, p: &ChartPoint<T>, target: Chart) -> Result<ChartPoint<T>> {
        self.validate(&p.g)?;
        check_dim(self.dim(), p.momentum.dim())?;
        if p.chart == target {
            return Ok(p.clone());
        }
        let touches_holonomic = p.chart == Chart::Holonomic || target == Chart::Holonomic;
        if touches_holonomic && !self.is_su2() {
            return Err(Error::Unsupported(
                "holonomic momenta require an exact group law (su(2) realization)".into(),
            ));
        }
        let body = match p.chart {
            Chart::Body => p.momentum.clone(),
            Chart::Space => {
                // K(g)⁻¹ = K(g⁻¹) = Ad(g)ᵀ
                let ad = self.adjoint(&p.g)?;
                DualVector(ad.transpose() * &p.momentum.0)
            }
            Chart::Holonomic => {
                let l = self.left_jacobian(&p.g)?;
                DualVector(l.transpose() * &p.momentum.0)
            }
        };
        let momentum = match target {
            Chart::Body => body,
            Chart::Space => self.coadjoint_act(&p.g, &body)?,
            Chart::Holonomic => {
                let l = self.left_jacobian(&p.g)?;
                let sol = l
                    .transpose()
                    .lu()
                    .solve(&body.0)
                    .ok_or_else(|| Error::Numerical("left-invariant frame is singular".into()))?;
                DualVector(sol)
            }
        };
        Ok(ChartPoint::new(target, p.g.clone(), momentum))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::algebra::{AlgebraVector, StructureConstants};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn charts_agree_at_identity() {
        let grp = LieGroup::<f64>::su2();
        let pi = DualVector::from_slice(&[0.3, -1.2, 2.0]);
        let p = ChartPoint::new(Chart::Body, grp.identity(), pi.clone());
        for target in [Chart::Holonomic, Chart::Space] {
            let q = grp.chart_convert(&p, target).unwrap();
            assert!((q.momentum.0 - &pi.0).norm() < 1e-15);
        }
    }

    #[test]
    fn round_trips_and_coadjoint_relation() {
        let grp = LieGroup::<f64>::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let u = AlgebraVector::from_slice(&(0..3).map(|_| rng.gen_range(-1.5..1.5)).collect::<Vec<_>>());
            let g = grp.exp(&u).unwrap();
            let pi = DualVector::from_slice(&(0..3).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>());
            let body = ChartPoint::new(Chart::Body, g.clone(), pi.clone());
            for target in [Chart::Space, Chart::Holonomic] {
                let there = grp.chart_convert(&body, target).unwrap();
                let back = grp.chart_convert(&there, Chart::Body).unwrap();
                assert!((back.momentum.0 - &pi.0).norm() < 1e-10);
            }
            let space = grp.chart_convert(&body, Chart::Space).unwrap();
            let (_, k) = grp.adjoint_reps(&g).unwrap();
            assert!((space.momentum.0 - k * &pi.0).norm() < 1e-14);
        }
    }

    #[test]
    fn holonomic_momentum_pairs_with_coordinate_velocity() {
        // p_μ u̇^μ = π^L_α Ω^α for any tangent vector: the pairing is chart-free.
        let grp = LieGroup::<f64>::su2();
        let g = grp.exp(&AlgebraVector::from_slice(&[0.7, -0.4, 1.1])).unwrap();
        let pi = DualVector::from_slice(&[1.0, 0.5, -0.25]);
        let hol = grp.chart_convert(&ChartPoint::new(Chart::Body, g.clone(), pi.clone()), Chart::Holonomic).unwrap();
        let omega = AlgebraVector::from_slice(&[0.2, 0.9, -0.6]);
        let udot = grp.left_jacobian(&g).unwrap() * &omega.0;
        assert!((hol.momentum.0.dot(&udot) - pi.pair(&omega)).abs() < 1e-13);
    }

    #[test]
    fn generic_realization_refuses_holonomic() {
        let grp = LieGroup::new(StructureConstants::<f64>::su2_plus_center());
        let p = ChartPoint::new(Chart::Body, grp.identity(), DualVector::zeros(4));
        assert!(matches!(grp.chart_convert(&p, Chart::Holonomic), Err(Error::Unsupported(_))));
        assert!(grp.chart_convert(&p, Chart::Space).is_ok());
    }
}
