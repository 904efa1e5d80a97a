//! Single-node generator matrices: the five-level model, its adiabatic
//! reductions, the dark state and the non-Hermitian loss prescription.
//!
//! Every quantity is expressed in units of the excited-state linewidth.
//! Matrices act on amplitude vectors through `i dA/dt = M A`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::state::{AtomLevel, BasisLabel, NodeLevel, StateVector, C64};

/// Index of `f_l` with one extra photon in cavity l.
pub const FL: usize = 0;
/// Index of `f_r` with one extra photon in cavity r.
pub const FR: usize = 1;
/// Index of the intermediate ground state `f_m`.
pub const FM: usize = 2;
pub const EL: usize = 3;
pub const ER: usize = 4;

/// Static (non-pulsed) parameters of one node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeStatics {
    /// one-photon detunings
    pub delta_l: f64,
    pub delta_r: f64,
    /// two-photon (Raman) detunings
    pub raman_l: f64,
    pub raman_r: f64,
    /// cavity decay rates
    pub kappa_l: f64,
    pub kappa_r: f64,
    /// excited-state decay rates
    pub gamma_l: f64,
    pub gamma_r: f64,
}

impl NodeStatics {
    /// Equal one-photon detuning on both arms, Raman resonant, lossless.
    pub fn detuned(delta: f64) -> Self {
        Self { delta_l: delta, delta_r: delta, ..Self::default() }
    }

    pub fn with_losses(mut self, kappa: f64, gamma: f64) -> Self {
        self.kappa_l = kappa;
        self.kappa_r = kappa;
        self.gamma_l = gamma;
        self.gamma_r = gamma;
        self
    }

    pub fn is_lossless(&self) -> bool {
        self.kappa_l == 0.0 && self.kappa_r == 0.0 && self.gamma_l == 0.0 && self.gamma_r == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("delta_l", self.delta_l),
            ("delta_r", self.delta_r),
            ("raman_l", self.raman_l),
            ("raman_r", self.raman_r),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        let rates = [
            ("kappa_l", self.kappa_l),
            ("kappa_r", self.kappa_r),
            ("gamma_l", self.gamma_l),
            ("gamma_r", self.gamma_r),
        ];
        for (name, v) in rates {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("decay rate must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Instantaneous physical constants of one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeParams {
    pub g_l: C64,
    pub g_r: C64,
    pub omega_l: C64,
    pub omega_r: C64,
    pub statics: NodeStatics,
}

impl NodeParams {
    pub fn new(g_l: C64, g_r: C64, omega_l: C64, omega_r: C64, statics: NodeStatics) -> Self {
        Self { g_l, g_r, omega_l, omega_r, statics }
    }

    /// Real, arm-symmetric couplings with a common detuning.
    pub fn symmetric(g: f64, omega: f64, delta: f64) -> Self {
        Self::real(g, g, omega, omega, NodeStatics::detuned(delta))
    }

    pub fn real(g_l: f64, g_r: f64, omega_l: f64, omega_r: f64, statics: NodeStatics) -> Self {
        Self {
            g_l: C64::new(g_l, 0.0),
            g_r: C64::new(g_r, 0.0),
            omega_l: C64::new(omega_l, 0.0),
            omega_r: C64::new(omega_r, 0.0),
            statics,
        }
    }

    pub fn with_losses(mut self, kappa: f64, gamma: f64) -> Self {
        self.statics = self.statics.with_losses(kappa, gamma);
        self
    }

    fn require_detunings(&self) -> Result<()> {
        if self.statics.delta_l == 0.0 {
            return Err(Error::Singular("delta_l = 0: excited state cannot be eliminated".into()));
        }
        if self.statics.delta_r == 0.0 {
            return Err(Error::Singular("delta_r = 0: excited state cannot be eliminated".into()));
        }
        Ok(())
    }
}

/// Photon-number sector in which the five-level matrix is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Sector {
    pub n_l: u32,
    pub n_r: u32,
}

impl Sector {
    pub const SINGLE: Sector = Sector { n_l: 0, n_r: 0 };

    pub fn new(n_l: u32, n_r: u32) -> Self {
        Self { n_l, n_r }
    }

    fn scale_l(self) -> f64 {
        (self.n_l as f64 + 1.0).sqrt()
    }

    fn scale_r(self) -> f64 {
        (self.n_r as f64 + 1.0).sqrt()
    }
}

/// Couplings that survive elimination of the excited states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCouplings {
    /// two-photon Rabi rates `conj(Ω_i) g_i / Δ_i`
    pub s_l: C64,
    pub s_r: C64,
    /// Stark shifts `|g_i|^2 / Δ_i`
    pub stark_l: f64,
    pub stark_r: f64,
    /// intermediate-state shift `Σ_j |Ω_j|^2 / Δ_j`
    pub delta_m: f64,
}

impl DerivedCouplings {
    pub fn from_params(p: &NodeParams) -> Result<Self> {
        p.require_detunings()?;
        let (dl, dr) = (p.statics.delta_l, p.statics.delta_r);
        Ok(Self {
            s_l: p.omega_l.conj() * p.g_l / dl,
            s_r: p.omega_r.conj() * p.g_r / dr,
            stark_l: p.g_l.norm_sqr() / dl,
            stark_r: p.g_r.norm_sqr() / dr,
            delta_m: p.omega_l.norm_sqr() / dl + p.omega_r.norm_sqr() / dr,
        })
    }
}

/// Basis order of the five-level matrix in `sector`.
pub fn full_basis(sector: Sector) -> Vec<BasisLabel> {
    let Sector { n_l, n_r } = sector;
    vec![
        BasisLabel::Node(NodeLevel::new(AtomLevel::Fl, n_l + 1, n_r)),
        BasisLabel::Node(NodeLevel::new(AtomLevel::Fr, n_l, n_r + 1)),
        BasisLabel::Node(NodeLevel::new(AtomLevel::Fm, n_l, n_r)),
        BasisLabel::Node(NodeLevel::new(AtomLevel::El, n_l, n_r)),
        BasisLabel::Node(NodeLevel::new(AtomLevel::Er, n_l, n_r)),
    ]
}

/// Basis order `[F_m, F_l, F_r]` of the three-level reduction.
pub fn three_level_basis() -> Vec<BasisLabel> {
    vec![
        BasisLabel::Node(NodeLevel::new(AtomLevel::Fm, 0, 0)),
        BasisLabel::Node(NodeLevel::new(AtomLevel::Fl, 1, 0)),
        BasisLabel::Node(NodeLevel::new(AtomLevel::Fr, 0, 1)),
    ]
}

/// Basis order `[F_l, F_r]` of the beam-splitter reduction.
pub fn beam_splitter_basis() -> Vec<BasisLabel> {
    vec![
        BasisLabel::Node(NodeLevel::new(AtomLevel::Fl, 1, 0)),
        BasisLabel::Node(NodeLevel::new(AtomLevel::Fr, 0, 1)),
    ]
}

/// Five-level matrix in the rotating frame, basis `[f_l, f_r, f_m, e_l, e_r]`.
///
/// Cavity couplings carry the `sqrt(n + 1)` enhancement of the sector. Loss
/// rates are ignored here; see [`apply_losses`].
pub fn build_full_matrix(p: &NodeParams, sector: Sector) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(5, 5);
    fill_full_matrix(p, sector, &mut m);
    m
}

pub(crate) fn fill_full_matrix(p: &NodeParams, sector: Sector, m: &mut DMatrix<C64>) {
    let g_ln = p.g_l * sector.scale_l();
    let g_rn = p.g_r * sector.scale_r();
    m.fill(C64::new(0.0, 0.0));
    m[(FL, FL)] = C64::new(p.statics.raman_l, 0.0);
    m[(FR, FR)] = C64::new(p.statics.raman_r, 0.0);
    m[(EL, EL)] = C64::new(-p.statics.delta_l, 0.0);
    m[(ER, ER)] = C64::new(-p.statics.delta_r, 0.0);

    m[(FL, EL)] = g_ln.conj();
    m[(EL, FL)] = g_ln;
    m[(FR, ER)] = g_rn.conj();
    m[(ER, FR)] = g_rn;
    m[(FM, EL)] = p.omega_l.conj();
    m[(EL, FM)] = p.omega_l;
    m[(FM, ER)] = p.omega_r.conj();
    m[(ER, FM)] = p.omega_r;
}

/// Normalized Raman-resonant dark state of the five-level matrix.
///
/// `|f_m> - (Ω_l / g_ln)|f_l> - (Ω_r / g_rn)|f_r>`, with no excited-state weight.
pub fn dark_state_full(p: &NodeParams, sector: Sector) -> Result<StateVector> {
    if p.statics.raman_l != 0.0 || p.statics.raman_r != 0.0 {
        return Err(Error::Precondition(format!(
            "dark state requires Raman resonance, got raman_l = {}, raman_r = {}",
            p.statics.raman_l, p.statics.raman_r
        )));
    }
    let g_ln = p.g_l * sector.scale_l();
    let g_rn = p.g_r * sector.scale_r();
    if g_ln.norm() == 0.0 {
        return Err(Error::param("g_l", "dark state undefined for zero cavity coupling"));
    }
    if g_rn.norm() == 0.0 {
        return Err(Error::param("g_r", "dark state undefined for zero cavity coupling"));
    }
    let zero = C64::new(0.0, 0.0);
    let raw = StateVector::from_slice(&[
        -p.omega_l / g_ln,
        -p.omega_r / g_rn,
        C64::new(1.0, 0.0),
        zero,
        zero,
    ]);
    raw.normalized()
}

/// Three-level matrix after eliminating the excited states, basis `[F_m, F_l, F_r]`.
pub fn effective_three_level(p: &NodeParams) -> Result<DMatrix<C64>> {
    let d = DerivedCouplings::from_params(p)?;
    let mut m = DMatrix::zeros(3, 3);
    fill_three_level(&d, &mut m);
    Ok(m)
}

pub(crate) fn fill_three_level(d: &DerivedCouplings, m: &mut DMatrix<C64>) {
    m[(0, 0)] = C64::new(d.delta_m, 0.0);
    m[(1, 1)] = C64::new(d.stark_l, 0.0);
    m[(2, 2)] = C64::new(d.stark_r, 0.0);
    m[(0, 1)] = d.s_l;
    m[(0, 2)] = d.s_r;
    m[(1, 0)] = d.s_l.conj();
    m[(2, 0)] = d.s_r.conj();
    m[(1, 2)] = C64::new(0.0, 0.0);
    m[(2, 1)] = C64::new(0.0, 0.0);
}

/// Two-level beam-splitter matrix after also eliminating `F_m`, basis `[F_l, F_r]`.
///
/// Entries follow the printed form: the diagonal is `-|g_i|^2/Δ_i + |s_i|^2/δ_m`,
/// which is the negative of what eliminating `F_m` from the three-level matrix
/// gives. Populations agree for real couplings; complex entries are conjugated.
pub fn beam_splitter_hamiltonian(p: &NodeParams) -> Result<DMatrix<C64>> {
    let d = DerivedCouplings::from_params(p)?;
    let mut m = DMatrix::zeros(2, 2);
    fill_beam_splitter(&d, &mut m)?;
    Ok(m)
}

pub(crate) fn fill_beam_splitter(d: &DerivedCouplings, m: &mut DMatrix<C64>) -> Result<()> {
    if d.delta_m == 0.0 {
        return Err(Error::Singular(
            "delta_m = 0: both classical fields are off, F_m cannot be eliminated".into(),
        ));
    }
    m[(0, 0)] = C64::new(-d.stark_l + d.s_l.norm_sqr() / d.delta_m, 0.0);
    m[(1, 1)] = C64::new(-d.stark_r + d.s_r.norm_sqr() / d.delta_m, 0.0);
    m[(0, 1)] = d.s_l.conj() * d.s_r / d.delta_m;
    m[(1, 0)] = d.s_l * d.s_r.conj() / d.delta_m;
    Ok(())
}

/// Adds the non-Hermitian decay terms to a five-level matrix.
///
/// Photon-carrying rows lose `i κ/2`, excited rows `i γ/2`, so populations
/// decay at the full rate.
pub fn apply_losses(h: &DMatrix<C64>, p: &NodeParams) -> Result<DMatrix<C64>> {
    if h.nrows() != 5 || h.ncols() != 5 {
        return Err(Error::DimensionMismatch { expected: 5, got: h.nrows() });
    }
    let mut out = h.clone();
    add_losses(&mut out, &p.statics);
    Ok(out)
}

pub(crate) fn add_losses(m: &mut DMatrix<C64>, s: &NodeStatics) {
    m[(FL, FL)] -= C64::new(0.0, s.kappa_l / 2.0);
    m[(FR, FR)] -= C64::new(0.0, s.kappa_r / 2.0);
    m[(EL, EL)] -= C64::new(0.0, s.gamma_l / 2.0);
    m[(ER, ER)] -= C64::new(0.0, s.gamma_r / 2.0);
}

/// Which closed form to use for the effective cavity linewidths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinewidthVariant {
    /// The closed form exactly as typeset, with the intermediate-state width
    /// in the denominator of the third term.
    AsPrinted,
    /// `κ_i + (|g_i|²/Δ_i²) γ_i + |s_i|² Γ_m / δ_m²` with
    /// `Γ_m = Σ_j |Ω_j|² γ_j / Δ_j²`.
    Physical,
}

/// Effective decay rates `(Γ_l, Γ_r)` of the two cavity states.
pub fn effective_linewidths(p: &NodeParams, variant: LinewidthVariant) -> Result<(f64, f64)> {
    p.require_detunings()?;
    p.statics.validate()?;
    let s = &p.statics;
    let arms = [
        (s.kappa_l, p.g_l.norm_sqr(), p.omega_l.norm_sqr(), s.delta_l, s.gamma_l),
        (s.kappa_r, p.g_r.norm_sqr(), p.omega_r.norm_sqr(), s.delta_r, s.gamma_r),
    ];
    let scattering = |&(kappa, g2, _, delta, gamma): &(f64, f64, f64, f64, f64)| {
        kappa + g2 / (delta * delta) * gamma
    };
    let out = match variant {
        LinewidthVariant::AsPrinted => {
            let denom: f64 = arms.iter().map(|&(_, _, o2, d, gamma)| o2 / (d * d) * gamma).sum();
            if denom == 0.0 {
                return Err(Error::Singular(
                    "as-printed linewidth: Σ_j |Ω_j|²γ_j/Δ_j² vanishes".into(),
                ));
            }
            let arm = |a: &(f64, f64, f64, f64, f64)| {
                let (_, g2, o2, d, _) = *a;
                scattering(a) + o2 * g2 / (d * d * denom)
            };
            (arm(&arms[0]), arm(&arms[1]))
        }
        LinewidthVariant::Physical => {
            let d = DerivedCouplings::from_params(p)?;
            let width_m: f64 = arms.iter().map(|&(_, _, o2, dd, gamma)| o2 * gamma / (dd * dd)).sum();
            let via_m = |s2: f64| -> Result<f64> {
                if s2 == 0.0 {
                    Ok(0.0)
                } else if d.delta_m == 0.0 {
                    Err(Error::Singular("physical linewidth: δ_m vanishes with s ≠ 0".into()))
                } else {
                    Ok(s2 * width_m / (d.delta_m * d.delta_m))
                }
            };
            (
                scattering(&arms[0]) + via_m(d.s_l.norm_sqr())?,
                scattering(&arms[1]) + via_m(d.s_r.norm_sqr())?,
            )
        }
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> NodeParams {
        NodeParams::symmetric(3.0, 20.0, 50.0)
    }

    fn re(z: C64) -> f64 {
        assert!(z.im.abs() < 1e-15, "expected real entry, got {z}");
        z.re
    }

    #[test]
    fn full_matrix_row_four() {
        let m = build_full_matrix(&reference(), Sector::SINGLE);
        let row: Vec<f64> = (0..5).map(|j| re(m[(EL, j)])).collect();
        assert_eq!(row, vec![3.0, 0.0, 20.0, -50.0, 0.0]);
        assert_eq!(m.adjoint(), m);
    }

    #[test]
    fn decoupled_matrix_is_diagonal() {
        let p = NodeParams::real(0.0, 0.0, 0.0, 0.0, NodeStatics::detuned(50.0));
        let m = build_full_matrix(&p, Sector::SINGLE);
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-50.0, 0.0),
            C64::new(-50.0, 0.0),
        ]));
        assert_eq!(m, expected);
    }

    #[test]
    fn photon_number_scales_cavity_coupling() {
        let m = build_full_matrix(&reference(), Sector::new(3, 0));
        assert_eq!(re(m[(EL, FL)]), 6.0);
        assert_eq!(re(m[(ER, FR)]), 3.0);
    }

    #[test]
    fn dark_state_single_field() {
        let p = NodeParams::real(3.0, 3.0, 20.0, 0.0, NodeStatics::detuned(50.0));
        let d = dark_state_full(&p, Sector::SINGLE).unwrap();
        let norm = ((20.0f64 / 3.0).powi(2) + 1.0).sqrt();
        let expected = [-20.0 / 3.0 / norm, 0.0, 1.0 / norm, 0.0, 0.0];
        for (i, e) in expected.iter().enumerate() {
            assert!((d[i] - C64::new(*e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn dark_state_without_fields_is_bare_fm() {
        let p = NodeParams::real(3.0, 3.0, 0.0, 0.0, NodeStatics::detuned(50.0));
        let d = dark_state_full(&p, Sector::SINGLE).unwrap();
        assert_eq!(d, StateVector::basis(5, FM));
    }

    #[test]
    fn dark_state_is_null_vector() {
        let p = reference();
        let d = dark_state_full(&p, Sector::SINGLE).unwrap();
        let m = build_full_matrix(&p, Sector::SINGLE);
        let residual = (&m * d.amplitudes()).norm();
        assert!(residual <= 1e-12, "residual {residual}");
    }

    #[test]
    fn dark_state_preconditions() {
        let mut p = reference();
        p.statics.raman_l = 0.1;
        assert!(matches!(dark_state_full(&p, Sector::SINGLE), Err(Error::Precondition(_))));
        let q = NodeParams::real(0.0, 3.0, 20.0, 20.0, NodeStatics::detuned(50.0));
        assert!(matches!(dark_state_full(&q, Sector::SINGLE), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn three_level_reference_values() {
        let m = effective_three_level(&reference()).unwrap();
        assert!((re(m[(0, 0)]) - 16.0).abs() < 1e-14);
        assert!((re(m[(1, 1)]) - 0.18).abs() < 1e-15);
        assert!((re(m[(2, 2)]) - 0.18).abs() < 1e-15);
        for (i, j) in [(0, 1), (0, 2), (1, 0), (2, 0)] {
            assert!((re(m[(i, j)]) - 1.2).abs() < 1e-14);
        }
        assert_eq!(m[(1, 2)], C64::new(0.0, 0.0));
    }

    #[test]
    fn three_level_dark_limit() {
        let p = NodeParams::real(3.0, 2.0, 0.0, 0.0, NodeStatics::detuned(50.0));
        let m = effective_three_level(&p).unwrap();
        assert_eq!(re(m[(0, 0)]), 0.0);
        assert!((re(m[(1, 1)]) - 9.0 / 50.0).abs() < 1e-15);
        assert!((re(m[(2, 2)]) - 4.0 / 50.0).abs() < 1e-15);
        assert_eq!(m[(0, 1)], C64::new(0.0, 0.0));
        assert_eq!(m[(0, 2)], C64::new(0.0, 0.0));
    }

    #[test]
    fn reductions_reject_zero_detuning() {
        let p = NodeParams::symmetric(3.0, 20.0, 0.0);
        assert!(matches!(effective_three_level(&p), Err(Error::Singular(_))));
        assert!(matches!(beam_splitter_hamiltonian(&p), Err(Error::Singular(_))));
    }

    #[test]
    fn beam_splitter_reference_values() {
        let m = beam_splitter_hamiltonian(&reference()).unwrap();
        assert!((re(m[(0, 1)]) - 0.09).abs() < 1e-15);
        assert!((re(m[(1, 0)]) - 0.09).abs() < 1e-15);
        assert!((re(m[(0, 0)]) + 0.09).abs() < 1e-15);
        assert!((re(m[(1, 1)]) + 0.09).abs() < 1e-15);
    }

    #[test]
    fn beam_splitter_needs_both_fields_for_mixing() {
        let p = NodeParams::real(3.0, 3.0, 20.0, 0.0, NodeStatics::detuned(50.0));
        let m = beam_splitter_hamiltonian(&p).unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.0, 0.0));
        assert_eq!(m[(1, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn beam_splitter_rejects_dark_fields() {
        let p = NodeParams::symmetric(3.0, 0.0, 50.0);
        assert!(matches!(beam_splitter_hamiltonian(&p), Err(Error::Singular(_))));
    }

    #[test]
    fn losses_on_diagonal() {
        let p = reference().with_losses(0.3, 1.0);
        let m = apply_losses(&build_full_matrix(&p, Sector::SINGLE), &p).unwrap();
        let im: Vec<f64> = (0..5).map(|i| m[(i, i)].im).collect();
        assert_eq!(im, vec![-0.15, -0.15, 0.0, -0.5, -0.5]);
    }

    #[test]
    fn lossless_leaves_matrix_unchanged() {
        let p = reference();
        let h = build_full_matrix(&p, Sector::SINGLE);
        assert_eq!(apply_losses(&h, &p).unwrap(), h);
        assert!(apply_losses(&DMatrix::zeros(3, 3), &p).is_err());
    }

    #[test]
    fn physical_linewidth_reference() {
        let p = reference().with_losses(0.3, 1.0);
        let (gl, gr) = effective_linewidths(&p, LinewidthVariant::Physical).unwrap();
        let expected = 0.3 + 9.0 / 2500.0 + 1.44 * 0.32 / 256.0;
        assert!((gl - expected).abs() < 1e-15);
        assert!((gr - expected).abs() < 1e-15);
        assert!((expected - 0.3054).abs() < 1e-4);
        assert!(0.3 / gl >= 0.98);
    }

    #[test]
    fn as_printed_linewidth_is_dominated_by_third_term() {
        let p = reference().with_losses(0.3, 1.0);
        let (gl, _) = effective_linewidths(&p, LinewidthVariant::AsPrinted).unwrap();
        // 400 * 9 / 2500 / 0.32 = 4.5
        assert!((gl - (0.3036 + 4.5)).abs() < 1e-12);
    }

    #[test]
    fn no_decay_channels_give_zero_width() {
        let p = reference();
        let (gl, gr) = effective_linewidths(&p, LinewidthVariant::Physical).unwrap();
        assert_eq!((gl, gr), (0.0, 0.0));
        assert!(matches!(
            effective_linewidths(&p, LinewidthVariant::AsPrinted),
            Err(Error::Singular(_))
        ));
    }
}
