use nalgebra::{RowVector4, Vector4};
use num_complex::Complex64;

use super::{FourMomentum, GammaBasis, Mat4, QftError};
use crate::pathspace::{Axis, Spin};

/// Spin-1/2 projection along a quantization axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinLabel {
    pub up: bool,
    pub axis: Axis,
}

impl SpinLabel {
    pub fn up(axis: Axis) -> Self {
        Self { up: true, axis }
    }

    pub fn down(axis: Axis) -> Self {
        Self { up: false, axis }
    }

    pub fn both(axis: Axis) -> [SpinLabel; 2] {
        [Self::up(axis), Self::down(axis)]
    }
}

impl TryFrom<Spin> for SpinLabel {
    type Error = QftError;

    fn try_from(s: Spin) -> Result<Self, Self::Error> {
        match s.twice_m {
            1 => Ok(SpinLabel::up(s.axis)),
            -1 => Ok(SpinLabel::down(s.axis)),
            m => Err(QftError::NotSpinHalf(m)),
        }
    }
}

impl From<SpinLabel> for Spin {
    fn from(s: SpinLabel) -> Self {
        if s.up {
            Spin::up(s.axis)
        } else {
            Spin::down(s.axis)
        }
    }
}

pub type Row4 = RowVector4<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracSpinor(pub Vector4<Complex64>);

impl DiracSpinor {
    pub fn scale(&self, k: Complex64) -> Self {
        DiracSpinor(self.0 * k)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `psi-bar psi`.
    pub fn scalar_density(&self) -> Complex64 {
        (dirac_adjoint(self) * self.0)[(0, 0)]
    }

    /// Outer product `psi psi-bar`.
    pub fn outer_bar(&self) -> Mat4 {
        self.0 * dirac_adjoint(self)
    }
}

/// Two-component eigenvectors of `sigma . n` for eigenvalues +1 and -1.
pub(crate) fn pauli_eigenvectors(axis: Axis) -> ([Complex64; 2], [Complex64; 2]) {
    let n = axis.vector();
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let phi = n[1].atan2(n[0]);
    let (ch, sh) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let up = [Complex64::new(ch, 0.0), Complex64::from_polar(sh, phi)];
    let down = [-Complex64::from_polar(sh, -phi), Complex64::new(ch, 0.0)];
    (up, down)
}

fn sigma_dot(p: &[f64; 3], x: &[Complex64; 2]) -> [Complex64; 2] {
    let pz = Complex64::new(p[2], 0.0);
    let minus = Complex64::new(p[0], -p[1]);
    let plus = Complex64::new(p[0], p[1]);
    [pz * x[0] + minus * x[1], plus * x[0] - pz * x[1]]
}

fn check_on_shell(p: &FourMomentum, mass: f64) -> Result<(), QftError> {
    if !(mass > 0.0) || !p.is_on_shell(mass, 1e-9) {
        return Err(QftError::OffShell {
            e: p.e,
            p: p.p_abs(),
            mass,
        });
    }
    Ok(())
}

/// Positive-energy spinor with `u-bar u = 2m`.
pub fn spinor_u(p: &FourMomentum, mass: f64, s: SpinLabel) -> Result<DiracSpinor, QftError> {
    check_on_shell(p, mass)?;
    let (up, down) = pauli_eigenvectors(s.axis);
    let chi = if s.up { up } else { down };
    let n = (p.e + mass).sqrt();
    let lower = sigma_dot(&p.p, &chi);
    Ok(DiracSpinor(Vector4::new(
        chi[0] * n,
        chi[1] * n,
        lower[0] / n,
        lower[1] / n,
    )))
}

/// Negative-energy spinor with `v-bar v = -2m`.
///
/// The two-spinor is `eta_s = -i sigma_2 chi_s^*`, so `s` labels the physical
/// spin of the antiparticle.
pub fn spinor_v(p: &FourMomentum, mass: f64, s: SpinLabel) -> Result<DiracSpinor, QftError> {
    check_on_shell(p, mass)?;
    let (up, down) = pauli_eigenvectors(s.axis);
    let chi = if s.up { up } else { down };
    // -i sigma_2 = [[0, -1], [1, 0]]
    let eta = [-chi[1].conj(), chi[0].conj()];
    let n = (p.e + mass).sqrt();
    let upper = sigma_dot(&p.p, &eta);
    Ok(DiracSpinor(Vector4::new(
        upper[0] / n,
        upper[1] / n,
        eta[0] * n,
        eta[1] * n,
    )))
}

/// `psi^dagger gamma^0` in the Dirac representation.
pub fn dirac_adjoint(psi: &DiracSpinor) -> Row4 {
    let v = &psi.0;
    Row4::new(v[0].conj(), v[1].conj(), -v[2].conj(), -v[3].conj())
}

/// Largest entry of `(slash(p) - sign * m) w`, `sign = +1` for `u`, `-1` for `v`.
pub fn dirac_residual(gammas: &GammaBasis, p: &FourMomentum, mass: f64, sign: f64, w: &DiracSpinor) -> f64 {
    let op = gammas.slash(p) - Mat4::identity() * Complex64::new(sign * mass, 0.0);
    (op * w.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
