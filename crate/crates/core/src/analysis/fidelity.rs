use crate::error::{Error, Result};
use crate::propagator::Trajectory;
use crate::state::StateVector;

/// `|<target|ψ>|²` with the target normalized; `ψ` is used as given so that
/// lost norm counts against the fidelity.
pub fn fidelity(psi: &StateVector, target: &StateVector) -> Result<f64> {
    if psi.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: target.dim(), got: psi.dim() });
    }
    if !(psi.norm_sqr() > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let target = target.normalized()?;
    Ok(target.inner(psi)?.norm_sqr().clamp(0.0, 1.0))
}

/// Fidelity against `target` at every sample of a trajectory.
pub fn fidelity_series(traj: &Trajectory, target: &StateVector) -> Result<Vec<f64>> {
    let target = target.normalized()?;
    traj.states.iter().map(|s| fidelity(s, &target)).collect()
}
