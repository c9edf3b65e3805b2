use nalgebra::DVector;

use super::flow::{FlowMode, FlowState, StateRate, System};
use crate::error::{Error, Result};
use crate::lie_core::{DualVector, GroupElement};
use crate::symplectic::{degeneracy_tolerance, s_matrix, PhasePoint};
use crate::Real;

/// Number of bisection refinements applied to a degeneracy crossing.
const BISECTIONS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T: Real> {
    pub dt: T,
    pub t_end: T,
    /// Keep every `stride`-th step (the last step is always kept).
    pub stride: usize,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn new(dt: T, t_end: T) -> Self {
        Self { dt, t_end, stride: 1 }
    }

    fn steps(&self) -> Result<usize> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument("dt must be positive and finite".into()));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return Err(Error::InvalidArgument("t_end must be positive and finite".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidArgument("sample stride must be at least 1".into()));
        }
        let n = (self.t_end / self.dt).round().to_f64_lossy();
        if n < 1.0 || n > 1e9 {
            return Err(Error::InvalidArgument("t_end / dt must give between 1 and 1e9 steps".into()));
        }
        Ok(n as usize)
    }
}

/// Where a full-mode flow reached the degenerate set `Δ = 0`.
///
/// The crossing lies in `[t_lo, t_hi]`; the state at `t_lo` is the last one
/// that passed the degeneracy test. `indicator` is the signed quantity whose
/// sign change is tracked: `C₁ = 1 − π′·τ` for su(2) and `Δ` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyEvent<T: Real> {
    pub t_lo: T,
    pub t_hi: T,
    pub delta_lo: T,
    pub delta_hi: T,
    pub indicator_lo: T,
    pub indicator_hi: T,
    pub tolerance: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Halt<T: Real> {
    Degeneracy(DegeneracyEvent<T>),
    /// The state became non-finite or the field could not be evaluated.
    BlowUp { t: T, last_good: PhasePoint<T>, reason: String },
}

/// A conserved quantity sampled along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorChannel<T: Real> {
    pub name: String,
    pub initial: T,
    /// Value at each sample.
    pub values: Vec<T>,
    /// `max |value(t) − value(0)|` over every step, not only samples.
    pub max_drift: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    pub mode: FlowMode,
    pub dt: T,
    pub times: Vec<T>,
    pub points: Vec<PhasePoint<T>>,
    /// Body force per sample (Euler–Poisson mode).
    pub gamma: Option<Vec<DualVector<T>>>,
    /// Shifted momenta per sample (Darboux mode).
    pub pi_prime: Option<Vec<DualVector<T>>>,
    /// `Δ` per sample (full mode).
    pub delta: Option<Vec<T>>,
    pub monitors: Vec<MonitorChannel<T>>,
    pub steps_taken: usize,
    pub halt: Option<Halt<T>>,
}

impl<T: Real> Trajectory<T> {
    /// Per-channel maximum drift.
    pub fn drifts(&self) -> Vec<(String, T)> {
        self.monitors.iter().map(|c| (c.name.clone(), c.max_drift)).collect()
    }

    pub fn drift(&self, name: &str) -> Option<T> {
        self.monitors.iter().find(|c| c.name == name).map(|c| c.max_drift)
    }

    pub fn last(&self) -> &PhasePoint<T> {
        self.points.last().expect("trajectory holds the initial sample")
    }
}

/// Flat integrator state: group coordinates, momenta, optional body force.
#[derive(Clone)]
struct Flat<T: Real> {
    y: DVector<T>,
    nq: usize,
    nm: usize,
    has_gamma: bool,
}

impl<T: Real> Flat<T> {
    fn pack(s: &FlowState<T>) -> Self {
        let q = s.g.coords();
        let (nq, nm) = (q.len(), s.m.dim());
        let mut v: Vec<T> = q;
        v.extend_from_slice(s.m.as_slice());
        if let Some(gm) = &s.gamma {
            v.extend_from_slice(gm.as_slice());
        }
        Self { y: DVector::from_vec(v), nq, nm, has_gamma: s.gamma.is_some() }
    }

    fn unpack(&self, su2: bool) -> FlowState<T> {
        let q = self.y.rows(0, self.nq);
        let g = if su2 {
            GroupElement::Su2(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]))
        } else {
            GroupElement::Chart(q.into_owned())
        };
        let m = DualVector(self.y.rows(self.nq, self.nm).into_owned());
        let gamma = self.has_gamma.then(|| DualVector(self.y.rows(self.nq + self.nm, self.nm).into_owned()));
        FlowState { g, m, gamma }
    }

    fn rate(&self, r: &StateRate<T>) -> DVector<T> {
        let mut v = DVector::zeros(self.y.len());
        v.rows_mut(0, self.nq).copy_from(&r.g);
        v.rows_mut(self.nq, self.nm).copy_from(&r.m);
        if let Some(gr) = &r.gamma {
            v.rows_mut(self.nq + self.nm, self.nm).copy_from(gr);
        }
        v
    }

    fn with(&self, y: DVector<T>) -> Self {
        Self { y, ..self.clone() }
    }
}

enum StepError<T: Real> {
    Degenerate { delta: T, pi: Option<Vec<T>> },
    Other(Error),
}

impl<T: Real> System<T> {
    /// Integrates with the classical fourth-order Runge–Kutta method,
    /// renormalizing the quaternion after every step.
    ///
    /// A degeneracy crossing in full mode or a numerical blow-up stops the
    /// run early; the partial trajectory is returned with [`Trajectory::halt`]
    /// set. A degenerate initial point is an error.
    pub fn integrate(&self, mode: FlowMode, initial: &PhasePoint<T>, cfg: &IntegratorConfig<T>) -> Result<Trajectory<T>> {
        let n_steps = cfg.steps()?;
        let state0 = self.initial_state(mode, initial)?;
        // surfaces a degenerate or otherwise invalid initial point
        self.rhs(mode, &state0)?;
        let su2 = self.group().is_su2();
        let full = mode == FlowMode::Full;

        let mut traj = Trajectory {
            mode,
            dt: cfg.dt,
            times: Vec::new(),
            points: Vec::new(),
            gamma: (mode == FlowMode::EulerPoisson).then(Vec::new),
            pi_prime: (mode == FlowMode::Darboux).then(Vec::new),
            delta: full.then(Vec::new),
            monitors: Vec::new(),
            steps_taken: 0,
            halt: None,
        };
        let names = self.monitor_names(mode);
        let initial_values = self.monitor_values(mode, &state0)?;
        traj.monitors = names
            .iter()
            .zip(&initial_values)
            .map(|(name, &v)| MonitorChannel { name: name.to_string(), initial: v, values: Vec::new(), max_drift: T::zero() })
            .collect();
        self.record(&mut traj, mode, T::zero(), &state0, &initial_values)?;

        let mut cur = Flat::pack(&state0);
        let mut cur_indicator = if full { Some(self.indicator(&state0)) } else { None };
        for k in 1..=n_steps {
            let t0 = T::from_usize(k - 1).expect("step index fits") * cfg.dt;
            let t1 = T::from_usize(k).expect("step index fits") * cfg.dt;
            let attempt = self.rk4_step(mode, &cur, cfg.dt, su2);
            let next = match attempt {
                Ok(next) => next,
                Err(StepError::Degenerate { .. }) if full => {
                    let event = self.locate_crossing(mode, &cur, t0, cfg.dt, su2, cur_indicator.expect("full mode"));
                    self.finish_at_crossing(&mut traj, mode, &cur, t0, &event, su2)?;
                    traj.halt = Some(Halt::Degeneracy(event));
                    return Ok(traj);
                }
                Err(StepError::Degenerate { delta, .. }) => {
                    return Err(Error::Numerical(format!("unexpected degenerate field (delta {:e})", delta.to_f64_lossy())));
                }
                Err(StepError::Other(e)) => {
                    traj.halt = Some(self.blow_up(mode, t0, &cur, su2, e.to_string()));
                    return Ok(traj);
                }
            };
            let state = next.unpack(su2);
            if full {
                let (ind, delta, tol) = self.indicator(&state);
                let (prev, _, _) = cur_indicator.expect("full mode");
                if !(delta.abs() > tol) || ind.is_sign_negative() != prev.is_sign_negative() {
                    let event = self.locate_crossing(mode, &cur, t0, cfg.dt, su2, cur_indicator.expect("full mode"));
                    self.finish_at_crossing(&mut traj, mode, &cur, t0, &event, su2)?;
                    traj.halt = Some(Halt::Degeneracy(event));
                    return Ok(traj);
                }
                cur_indicator = Some((ind, delta, tol));
            }
            let values = match self.monitor_values(mode, &state) {
                Ok(v) => v,
                Err(e) => {
                    traj.halt = Some(self.blow_up(mode, t0, &cur, su2, e.to_string()));
                    return Ok(traj);
                }
            };
            for (ch, &v) in traj.monitors.iter_mut().zip(&values) {
                ch.max_drift = ch.max_drift.max((v - ch.initial).abs());
            }
            traj.steps_taken = k;
            if k % cfg.stride == 0 || k == n_steps {
                self.record(&mut traj, mode, t1, &state, &values)?;
            }
            cur = next;
        }
        Ok(traj)
    }

    fn rk4_step(&self, mode: FlowMode, cur: &Flat<T>, h: T, su2: bool) -> std::result::Result<Flat<T>, StepError<T>> {
        let eval = |f: &Flat<T>| -> std::result::Result<DVector<T>, StepError<T>> {
            match self.rhs(mode, &f.unpack(su2)) {
                Ok(r) => Ok(f.rate(&r)),
                Err(Error::DegeneratePoint { delta, point, .. }) => {
                    let nq = f.nq;
                    let pi = (point.len() >= nq + f.nm).then(|| point[nq..nq + f.nm].iter().map(|&x| T::lit(x)).collect());
                    Err(StepError::Degenerate { delta: T::lit(delta), pi })
                }
                Err(e) => Err(StepError::Other(e)),
            }
        };
        let half = T::lit(0.5);
        let k1 = eval(cur)?;
        let k2 = eval(&cur.with(&cur.y + &k1 * (h * half)))?;
        let k3 = eval(&cur.with(&cur.y + &k2 * (h * half)))?;
        let k4 = eval(&cur.with(&cur.y + &k3 * h))?;
        let sixth = h / T::lit(6.0);
        let y = &cur.y + (k1 + (k2 + k3) * T::lit(2.0) + k4) * sixth;
        if y.iter().any(|x| !x.is_finite()) {
            return Err(StepError::Other(Error::Numerical("state became non-finite".into())));
        }
        let mut next = cur.with(y);
        if su2 {
            let norm = next.y.rows(0, 4).norm();
            next.y.rows_mut(0, 4).unscale_mut(norm);
        }
        Ok(next)
    }

    /// `(indicator, Δ, tolerance)` at a full-mode state.
    fn indicator(&self, state: &FlowState<T>) -> (T, T, T) {
        self.indicator_from_momentum(&state.m)
    }

    fn indicator_from_momentum(&self, pi: &DualVector<T>) -> (T, T, T) {
        let s = s_matrix(self.group(), pi, self.selector());
        let ups = self.selector().upsilon();
        let tol = degeneracy_tolerance(&s, ups);
        if self.group().is_su2() {
            let tau = ups.tau().expect("su(2) upsilon");
            let pp = [s[(1, 2)], s[(2, 0)], s[(0, 1)]];
            let c1 = T::one() - (pp[0] * tau[0] + pp[1] * tau[1] + pp[2] * tau[2]);
            (c1, c1 * c1, tol)
        } else {
            let n = s.nrows();
            let delta = (nalgebra::DMatrix::identity(n, n) + ups.matrix() * &s).determinant();
            (delta, delta, tol)
        }
    }

    /// Bisects the step fraction in which the flow leaves the nondegenerate
    /// region containing `cur`.
    fn locate_crossing(
        &self,
        mode: FlowMode,
        cur: &Flat<T>,
        t0: T,
        dt: T,
        su2: bool,
        start: (T, T, T),
    ) -> DegeneracyEvent<T> {
        let probe = |frac: T| -> (bool, T, T) {
            match self.rk4_step(mode, cur, dt * frac, su2) {
                Ok(next) => {
                    let (ind, delta, tol) = self.indicator(&next.unpack(su2));
                    let ok = delta.abs() > tol && ind.is_sign_negative() == start.0.is_sign_negative();
                    (ok, ind, delta)
                }
                Err(StepError::Degenerate { delta, pi }) => {
                    let ind = pi
                        .map(|p| self.indicator_from_momentum(&DualVector::from_slice(&p)).0)
                        .unwrap_or(T::zero());
                    (false, ind, delta)
                }
                Err(StepError::Other(_)) => (false, T::zero(), T::zero()),
            }
        };
        let (mut lo, mut hi) = (T::zero(), T::one());
        let (mut ind_lo, mut delta_lo) = (start.0, start.1);
        let (_, mut ind_hi, mut delta_hi) = probe(T::one());
        for _ in 0..BISECTIONS {
            let mid = (lo + hi) * T::lit(0.5);
            let (ok, ind, delta) = probe(mid);
            if ok {
                lo = mid;
                ind_lo = ind;
                delta_lo = delta;
            } else {
                hi = mid;
                ind_hi = ind;
                delta_hi = delta;
            }
        }
        DegeneracyEvent {
            t_lo: t0 + lo * dt,
            t_hi: t0 + hi * dt,
            delta_lo,
            delta_hi,
            indicator_lo: ind_lo,
            indicator_hi: ind_hi,
            tolerance: start.2,
        }
    }

    /// Appends the last nondegenerate state at `t_lo` when it is new.
    fn finish_at_crossing(
        &self,
        traj: &mut Trajectory<T>,
        mode: FlowMode,
        cur: &Flat<T>,
        t0: T,
        event: &DegeneracyEvent<T>,
        su2: bool,
    ) -> Result<()> {
        let t_last = *traj.times.last().expect("initial sample recorded");
        if event.t_lo > t_last && event.t_lo > t0 {
            if let Ok(next) = self.rk4_step(mode, cur, event.t_lo - t0, su2) {
                let state = next.unpack(su2);
                if let Ok(values) = self.monitor_values(mode, &state) {
                    self.record(traj, mode, event.t_lo, &state, &values)?;
                }
            }
        }
        Ok(())
    }

    fn blow_up(&self, mode: FlowMode, t: T, cur: &Flat<T>, su2: bool, reason: String) -> Halt<T> {
        Halt::BlowUp { t, last_good: self.phase_point(mode, &cur.unpack(su2)), reason }
    }

    fn monitor_names(&self, mode: FlowMode) -> Vec<&'static str> {
        let mut names = vec!["energy"];
        if mode == FlowMode::EulerPoisson {
            names.push("gamma_norm2");
        }
        if self.tracks_pi_prime() {
            names.push("pi_prime_norm2");
        }
        names
    }

    /// `‖π + ξ‖²` is conserved for free su(2) motion in every mode.
    fn tracks_pi_prime(&self) -> bool {
        self.group().is_su2() && self.potential().is_none() && self.xi().is_some()
    }

    fn monitor_values(&self, mode: FlowMode, state: &FlowState<T>) -> Result<Vec<T>> {
        let mut out = vec![self.energy(mode, state)?];
        if let Some(gm) = &state.gamma {
            out.push(gm.0.norm_squared());
        }
        if self.tracks_pi_prime() {
            let pp = self.shifted_momentum(mode, state);
            out.push(pp.0.norm_squared());
        }
        Ok(out)
    }

    fn shifted_momentum(&self, mode: FlowMode, state: &FlowState<T>) -> DualVector<T> {
        match (mode, self.xi()) {
            (FlowMode::Darboux, _) | (_, None) => state.m.clone(),
            (_, Some(xi)) => DualVector(&state.m.0 + &xi.0),
        }
    }

    fn record(&self, traj: &mut Trajectory<T>, mode: FlowMode, t: T, state: &FlowState<T>, values: &[T]) -> Result<()> {
        traj.times.push(t);
        traj.points.push(self.phase_point(mode, state));
        if let (Some(v), Some(gm)) = (traj.gamma.as_mut(), &state.gamma) {
            v.push(gm.clone());
        }
        if let Some(v) = traj.pi_prime.as_mut() {
            v.push(state.m.clone());
        }
        if let Some(v) = traj.delta.as_mut() {
            v.push(self.indicator(state).1);
        }
        for (ch, &val) in traj.monitors.iter_mut().zip(values) {
            ch.values.push(val);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::UpsilonField;
    use crate::dynamics::{InertiaTensor, PotentialSpec};
    use crate::lie_core::{AlgebraVector, LieGroup};
    use crate::symplectic::StructureSelector;
    use crate::cocycle::TwoCocycle;

    fn free_system(moments: [f64; 3]) -> System<f64> {
        System::new(
            LieGroup::su2(),
            StructureSelector::canonical(3),
            InertiaTensor::diagonal(&moments).unwrap(),
            PotentialSpec::None,
        )
        .unwrap()
    }

    fn point(pi: [f64; 3]) -> PhasePoint<f64> {
        PhasePoint::new(GroupElement::unit_quaternion(0.9, 0.1, -0.3, 0.2).unwrap(), DualVector::from_slice(&pi)).unwrap()
    }

    #[test]
    fn spherical_free_body_keeps_momentum() {
        let sys = free_system([2.0, 2.0, 2.0]);
        let p0 = point([0.3, -0.8, 1.1]);
        let traj = sys.integrate(FlowMode::EulerCanonical, &p0, &IntegratorConfig::new(1e-3, 1.0)).unwrap();
        assert_eq!(traj.times.len(), 1001);
        assert!(traj.halt.is_none());
        for p in &traj.points {
            assert!((&p.pi_l.0 - &p0.pi_l.0).amax() < 1e-10);
        }
    }

    #[test]
    fn symmetric_top_precesses_at_closed_form_rate() {
        let (i1, i3) = (1.0, 3.0);
        let sys = free_system([i1, i1, i3]);
        let p0 = point([0.6, 0.0, 1.5]);
        let traj = sys.integrate(FlowMode::EulerCanonical, &p0, &IntegratorConfig::new(1e-3, 1.0)).unwrap();
        // π̇ = π × 𝓘π, so (π₁, π₂) rotates at rate (1/I₁ − 1/I₃) π₃
        let rate = (1.0 / i1 - 1.0 / i3) * 1.5;
        for (t, p) in traj.times.iter().zip(&traj.points) {
            assert!((p.pi_l[2] - 1.5).abs() < 1e-12);
            let phase = p.pi_l[1].atan2(p.pi_l[0]);
            let expected = (rate * t).sin().atan2((rate * t).cos());
            let err = (phase - expected + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
            assert!(err.abs() < 1e-6, "t = {t}, err = {err}");
        }
    }

    #[test]
    fn sampling_stride_keeps_last_step() {
        let sys = free_system([1.0, 2.0, 3.0]);
        let mut cfg = IntegratorConfig::new(0.01, 0.25);
        cfg.stride = 10;
        let traj = sys.integrate(FlowMode::EulerCanonical, &point([0.1, 0.2, 0.3]), &cfg).unwrap();
        let times: Vec<f64> = traj.times.clone();
        assert_eq!(times.len(), 4);
        assert!((times[3] - 0.25).abs() < 1e-15);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn invalid_configuration_is_rejected() {
        let sys = free_system([1.0, 2.0, 3.0]);
        let p = point([0.1, 0.2, 0.3]);
        assert!(sys.integrate(FlowMode::EulerCanonical, &p, &IntegratorConfig::new(0.0, 1.0)).is_err());
        assert!(sys.integrate(FlowMode::EulerCanonical, &p, &IntegratorConfig::new(1e-3, -1.0)).is_err());
    }

    #[test]
    fn degenerate_initial_point_is_an_error() {
        let tau = 0.5;
        let sys = System::new(
            LieGroup::su2(),
            StructureSelector::full(
                TwoCocycle::zero(3),
                UpsilonField::from_tau(&AlgebraVector::from_slice(&[0.0, 0.0, tau])).unwrap(),
            )
            .unwrap(),
            InertiaTensor::diagonal(&[1.0, 2.0, 3.0]).unwrap(),
            PotentialSpec::None,
        )
        .unwrap();
        let p = point([0.3, 0.1, 1.0 / tau]);
        assert!(matches!(
            sys.integrate(FlowMode::Full, &p, &IntegratorConfig::new(1e-3, 1.0)),
            Err(Error::DegeneratePoint { .. })
        ));
    }
}
