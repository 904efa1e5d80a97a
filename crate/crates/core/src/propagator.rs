//! Time-dependent Schrödinger propagation `i dA/dt = M(t) A`.
//!
//! The default stepper is the Dormand–Prince 5(4) embedded pair with
//! first-same-as-last reuse; a classical fixed-step RK4 is kept for
//! convergence studies. Output samples sit on a uniform grid independent of
//! the internal step sequence: the stepper lands exactly on each sample time.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{NodeModel, SingleNodeGenerator};
use crate::error::{Error, Result};
use crate::model::{FL, FR};
use crate::pulse::PulseProtocol;
use crate::state::{BasisLabel, StateVector, C64};

/// A matrix-valued function of time.
pub trait Generator: Sync {
    fn dim(&self) -> usize;
    /// Writes `M(t)` into `out`, which is `dim x dim`.
    fn fill(&self, t: f64, out: &mut DMatrix<C64>) -> Result<()>;
}

/// Time-independent generator.
#[derive(Debug, Clone)]
pub struct ConstantGenerator(pub DMatrix<C64>);

impl Generator for ConstantGenerator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn fill(&self, _t: f64, out: &mut DMatrix<C64>) -> Result<()> {
        out.copy_from(&self.0);
        Ok(())
    }
}

/// Wraps a closure returning the matrix at `t`.
pub struct FnGenerator<F> {
    dim: usize,
    f: F,
}

impl<F> FnGenerator<F>
where
    F: Fn(f64) -> DMatrix<C64> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Generator for FnGenerator<F>
where
    F: Fn(f64) -> DMatrix<C64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn fill(&self, t: f64, out: &mut DMatrix<C64>) -> Result<()> {
        out.copy_from(&(self.f)(t));
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    Adaptive { rtol: f64, atol: f64 },
    Fixed { dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub control: StepControl,
    /// number of uniformly spaced output samples, endpoints included
    pub samples: usize,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            control: StepControl::Adaptive { rtol: 1e-10, atol: 1e-13 },
            samples: 2000,
            max_steps: 20_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn fixed(dt: f64) -> Self {
        Self { control: StepControl::Fixed { dt }, ..Self::default() }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.control = StepControl::Adaptive { rtol, atol };
        self
    }
}

/// Sampled solution of one propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub norms: Vec<f64>,
    pub basis: Vec<BasisLabel>,
}

impl Trajectory {
    /// Single-sample trajectory holding `state` at `t`.
    pub fn constant(basis: Vec<BasisLabel>, state: StateVector, t: f64) -> Self {
        let norm = state.norm_sqr();
        Self { times: vec![t], states: vec![state], norms: vec![norm], basis }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory has at least one sample")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one sample")
    }

    /// Population of basis state `index` at every sample.
    pub fn population(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[index].norm_sqr()).collect()
    }

    /// Largest summed population of `indices` over the run.
    pub fn peak_population(&self, indices: &[usize]) -> f64 {
        self.states
            .iter()
            .map(|s| indices.iter().map(|&i| s[i].norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn position(&self, label: &BasisLabel) -> Option<usize> {
        self.basis.iter().position(|b| b == label)
    }
}

/// `(time, ‖ψ‖²)` at every sample; the survival probability for lossy runs.
pub fn norm_history(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.times.iter().copied().zip(traj.norms.iter().copied()).collect()
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Workspace<'g, G: Generator + ?Sized> {
    gen: &'g G,
    m: DMatrix<C64>,
    k: [DVector<C64>; 7],
    stage: DVector<C64>,
    next: DVector<C64>,
    evaluations: usize,
}

impl<'g, G: Generator + ?Sized> Workspace<'g, G> {
    fn new(gen: &'g G) -> Self {
        let n = gen.dim();
        let z = || DVector::zeros(n);
        Self {
            gen,
            m: DMatrix::zeros(n, n),
            k: [z(), z(), z(), z(), z(), z(), z()],
            stage: z(),
            next: z(),
            evaluations: 0,
        }
    }

    /// `k[slot] = -i M(t) y`
    fn rhs(&mut self, slot: usize, t: f64, y: &DVector<C64>) -> Result<()> {
        self.gen.fill(t, &mut self.m)?;
        self.evaluations += 1;
        self.k[slot].gemv(C64::new(0.0, -1.0), &self.m, y, C64::new(0.0, 0.0));
        Ok(())
    }

    fn rhs_stage(&mut self, slot: usize, t: f64) -> Result<()> {
        self.gen.fill(t, &mut self.m)?;
        self.evaluations += 1;
        self.k[slot].gemv(C64::new(0.0, -1.0), &self.m, &self.stage, C64::new(0.0, 0.0));
        Ok(())
    }

    fn set_stage(&mut self, y: &DVector<C64>, h: f64, coeffs: &[(usize, f64)]) {
        self.stage.copy_from(y);
        for &(j, a) in coeffs {
            if a != 0.0 {
                self.stage.axpy(C64::new(h * a, 0.0), &self.k[j], C64::new(1.0, 0.0));
            }
        }
    }

    /// One Dormand–Prince attempt from `(t, y)`; `k[0]` must hold `f(t, y)`.
    /// Leaves the 5th-order solution in `next`, `f(t+h, next)` in `k[6]`, and
    /// returns the largest componentwise scaled error.
    fn dopri_attempt(&mut self, t: f64, y: &DVector<C64>, h: f64, rtol: f64, atol: f64) -> Result<f64> {
        self.set_stage(y, h, &[(0, A21)]);
        self.rhs_stage(1, t + C2 * h)?;
        self.set_stage(y, h, &[(0, A31), (1, A32)]);
        self.rhs_stage(2, t + C3 * h)?;
        self.set_stage(y, h, &[(0, A41), (1, A42), (2, A43)]);
        self.rhs_stage(3, t + C4 * h)?;
        self.set_stage(y, h, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        self.rhs_stage(4, t + C5 * h)?;
        self.set_stage(y, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        self.rhs_stage(5, t + h)?;
        self.set_stage(y, h, &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)]);
        self.next.copy_from(&self.stage);
        self.rhs_stage(6, t + h)?;

        let mut worst: f64 = 0.0;
        for i in 0..y.len() {
            let err = (self.k[0][i] * E1
                + self.k[2][i] * E3
                + self.k[3][i] * E4
                + self.k[4][i] * E5
                + self.k[5][i] * E6
                + self.k[6][i] * E7)
                * h;
            let scale = atol + rtol * y[i].norm().max(self.next[i].norm());
            worst = worst.max(err.norm() / scale);
        }
        Ok(worst)
    }

    fn rk4_step(&mut self, t: f64, y: &mut DVector<C64>, h: f64) -> Result<()> {
        self.rhs(0, t, y)?;
        self.set_stage(y, h, &[(0, 0.5)]);
        self.rhs_stage(1, t + 0.5 * h)?;
        self.set_stage(y, h, &[(1, 0.5)]);
        self.rhs_stage(2, t + 0.5 * h)?;
        self.set_stage(y, h, &[(2, 1.0)]);
        self.rhs_stage(3, t + h)?;
        let w = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0];
        for (j, wj) in w.iter().enumerate() {
            y.axpy(C64::new(h * wj, 0.0), &self.k[j], C64::new(1.0, 0.0));
        }
        Ok(())
    }
}

fn check_finite(y: &DVector<C64>, t: f64) -> Result<()> {
    if y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t })
    }
}

fn sample_times(t0: f64, t1: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    (0..n)
        .map(|k| if k == n - 1 { t1 } else { t0 + (t1 - t0) * k as f64 / (n - 1) as f64 })
        .collect()
}

/// Integrates `i dA/dt = M(t) A` from `t0` to `t1`.
pub fn integrate<G: Generator + ?Sized>(
    gen: &G,
    basis: &[BasisLabel],
    psi0: &StateVector,
    t0: f64,
    t1: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let n = gen.dim();
    if psi0.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: psi0.dim() });
    }
    if basis.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: basis.len() });
    }
    if !(t0 < t1) {
        return Err(Error::param("t1", format!("need t0 < t1, got [{t0}, {t1}]")));
    }
    let times = sample_times(t0, t1, opts.samples);
    let mut y = psi0.amplitudes().clone();
    check_finite(&y, t0)?;
    let mut ws = Workspace::new(gen);
    let mut states = Vec::with_capacity(times.len());
    states.push(StateVector::new(y.clone()));

    match opts.control {
        StepControl::Fixed { dt } => {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::param("fixed_dt", format!("must be > 0, got {dt}")));
            }
            let mut steps = 0usize;
            for w in times.windows(2) {
                let (a, b) = (w[0], w[1]);
                let sub = (((b - a) / dt) - 1e-9).ceil().max(1.0) as usize;
                let h = (b - a) / sub as f64;
                for i in 0..sub {
                    ws.rk4_step(a + i as f64 * h, &mut y, h)?;
                    steps += 1;
                    if steps > opts.max_steps {
                        return Err(Error::Precondition(format!("step budget {} exhausted", opts.max_steps)));
                    }
                }
                check_finite(&y, b)?;
                states.push(StateVector::new(y.clone()));
            }
        }
        StepControl::Adaptive { rtol, atol } => {
            if !(rtol > 0.0 && atol > 0.0) {
                return Err(Error::param("rtol", "tolerances must be > 0"));
            }
            let mut t = t0;
            ws.rhs(0, t, &y)?;
            let scale = ws.m.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let mut h = (0.05 / scale).min(t1 - t0);
            let mut steps = 0usize;
            for &target in &times[1..] {
                while t < target {
                    let remaining = target - t;
                    let clamped = h >= remaining;
                    let h_try = if clamped { remaining } else { h };
                    if h_try < 1e-13 * t.abs().max(1.0) && !clamped {
                        return Err(Error::StepUnderflow { t, h: h_try });
                    }
                    let err = ws.dopri_attempt(t, &y, h_try, rtol, atol)?;
                    if !err.is_finite() {
                        return Err(Error::NonFinite { t });
                    }
                    steps += 1;
                    if steps > opts.max_steps {
                        return Err(Error::Precondition(format!("step budget {} exhausted", opts.max_steps)));
                    }
                    if err <= 1.0 {
                        t = if clamped { target } else { t + h_try };
                        std::mem::swap(&mut y, &mut ws.next);
                        ws.k.swap(0, 6);
                        let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                        let proposal = h_try * grow;
                        h = if clamped { proposal.max(h) } else { proposal };
                    } else {
                        h = h_try * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                        if h < 1e-13 * t.abs().max(1.0) {
                            return Err(Error::StepUnderflow { t, h });
                        }
                    }
                }
                check_finite(&y, t)?;
                states.push(StateVector::new(y.clone()));
            }
        }
    }

    let norms = states.iter().map(|s| s.norm_sqr()).collect();
    Ok(Trajectory { times, states, norms, basis: basis.to_vec() })
}

/// 2x2 map between the photonic states `[F_l, F_r]` over a full protocol.
///
/// Matrix layout `[[A, B], [C, D]]` with columns indexed by the initial state,
/// so `B = <F_l|U|F_r>` and `C = <F_r|U|F_l>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveUnitary {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    /// weight left outside `[F_l, F_r]` for the `F_l` and `F_r` columns
    pub leak: [f64; 2],
    /// largest population outside `[F_l, F_r]` seen during either run
    pub peak_intermediate: f64,
    /// largest excited-state population `e_l + e_r` seen during either run
    pub peak_excited: f64,
}

/// Threshold above which a map is reported as non-unitary.
pub const UNITARITY_WARNING: f64 = 1e-2;

impl EffectiveUnitary {
    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self { a: one, b: zero, c: zero, d: one, leak: [0.0; 2], peak_intermediate: 0.0, peak_excited: 0.0 }
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[self.a, self.b, self.c, self.d])
    }

    /// `max |(U†U - I)_ij|`
    pub fn unitarity_defect(&self) -> f64 {
        let u = self.matrix();
        let g = u.adjoint() * &u - DMatrix::identity(2, 2);
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn warning(&self) -> Option<String> {
        let defect = self.unitarity_defect();
        (defect > UNITARITY_WARNING).then(|| {
            format!(
                "non-unitary map (defect {defect:.3e}, peak intermediate population {:.3e}): adiabatic following failed",
                self.peak_intermediate
            )
        })
    }
}

/// Evolves `F_l` and `F_r` through a lossless single-node protocol with the
/// five-level model and reads off the photonic map.
pub fn effective_unitary(proto: &PulseProtocol, opts: &IntegratorOptions) -> Result<EffectiveUnitary> {
    if proto.node_count() != 1 {
        return Err(Error::Precondition("effective unitary needs a single-node protocol".into()));
    }
    if !proto.nodes()[0].statics.is_lossless() {
        return Err(Error::Precondition("effective unitary needs lossless parameters".into()));
    }
    let gen = SingleNodeGenerator::new(proto, NodeModel::Full);
    let basis = gen.basis();
    let run = |col: usize| integrate(&gen, &basis, &StateVector::basis(5, col), proto.t_start(), proto.t_end(), opts);
    let (left, right) = rayon::join(|| run(FL), || run(FR));
    let (left, right) = (left?, right?);
    let others = [2usize, 3, 4];
    let fl = left.final_state();
    let fr = right.final_state();
    Ok(EffectiveUnitary {
        a: fl[FL],
        c: fl[FR],
        b: fr[FL],
        d: fr[FR],
        leak: [
            1.0 - fl[FL].norm_sqr() - fl[FR].norm_sqr(),
            1.0 - fr[FL].norm_sqr() - fr[FR].norm_sqr(),
        ],
        peak_intermediate: left.peak_population(&others).max(right.peak_population(&others)),
        peak_excited: left.peak_population(&others[1..]).max(right.peak_population(&others[1..])),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<BasisLabel> {
        (0..n).map(|i| BasisLabel::Index(i as u16)).collect()
    }

    fn diag(values: &[f64]) -> DMatrix<C64> {
        DMatrix::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0))))
    }

    #[test]
    fn diagonal_generator_is_pure_phase() {
        let gen = ConstantGenerator(diag(&[0.0, 0.0, 0.0, -50.0, -50.0]));
        let psi0 = StateVector::basis(5, 3);
        let traj = integrate(&gen, &labels(5), &psi0, 0.0, 2.0, &IntegratorOptions::default().with_samples(50)).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s[3].norm() - 1.0).abs() < 1e-7, "{}", s[3].norm() - 1.0);
            let exact = C64::from_polar(1.0, 50.0 * t);
            assert!((s[3] - exact).norm() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn two_level_rabi_flop() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(0.09, 0.0);
        m[(1, 0)] = C64::new(0.09, 0.0);
        let t1 = std::f64::consts::PI / (2.0 * 0.09);
        let traj = integrate(&ConstantGenerator(m), &labels(2), &StateVector::basis(2, 0), 0.0, t1, &IntegratorOptions::default()).unwrap();
        let p = traj.final_state().populations();
        assert!(p[0].abs() < 1e-6 && (p[1] - 1.0).abs() < 1e-6, "{p:?}");
    }

    #[test]
    fn fixed_step_matches_adaptive() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(0.3, 0.1);
        m[(1, 0)] = C64::new(0.3, -0.1);
        m[(1, 1)] = C64::new(0.5, 0.0);
        let gen = ConstantGenerator(m);
        let a = integrate(&gen, &labels(2), &StateVector::basis(2, 0), 0.0, 10.0, &IntegratorOptions::default()).unwrap();
        let f = integrate(&gen, &labels(2), &StateVector::basis(2, 0), 0.0, 10.0, &IntegratorOptions::fixed(0.01)).unwrap();
        let diff = (a.final_state().amplitudes() - f.final_state().amplitudes()).norm();
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let gen = ConstantGenerator(diag(&[1.0, 2.0]));
        let o = IntegratorOptions::default();
        assert!(matches!(
            integrate(&gen, &labels(2), &StateVector::basis(3, 0), 0.0, 1.0, &o),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(integrate(&gen, &labels(2), &StateVector::basis(2, 0), 1.0, 1.0, &o).is_err());
        let nan = StateVector::from_slice(&[C64::new(f64::NAN, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(integrate(&gen, &labels(2), &nan, 0.0, 1.0, &o), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn blow_up_is_reported() {
        // exponential growth from an anti-damped diagonal overflows
        let gen = ConstantGenerator(DMatrix::from_element(1, 1, C64::new(0.0, 800.0)));
        let r = integrate(&gen, &labels(1), &StateVector::basis(1, 0), 0.0, 10.0, &IntegratorOptions::default());
        assert!(matches!(r, Err(Error::NonFinite { .. }) | Err(Error::StepUnderflow { .. })), "{r:?}");
    }

    #[test]
    fn sample_grid_hits_endpoints() {
        let ts = sample_times(-1.0, 2.0, 4);
        assert_eq!(ts, vec![-1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn lossy_norm_decays_exponentially() {
        let mut m = DMatrix::zeros(1, 1);
        m[(0, 0)] = C64::new(0.0, -0.15);
        let traj = integrate(&ConstantGenerator(m), &labels(1), &StateVector::basis(1, 0), 0.0, 10.0, &IntegratorOptions::default().with_samples(11)).unwrap();
        for (t, n) in norm_history(&traj) {
            assert!((n - (-0.3 * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_unitary_has_no_defect() {
        let u = EffectiveUnitary::identity();
        assert_eq!(u.unitarity_defect(), 0.0);
        assert!(u.warning().is_none());
    }
}
