use nalgebra::Matrix4;
use num_complex::Complex64;

use super::FourMomentum;

pub type Mat4 = Matrix4<Complex64>;

/// Minkowski metric `diag(+1, -1, -1, -1)`.
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The four Dirac matrices `gamma^0 .. gamma^3` in the Dirac representation.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaBasis {
    pub gamma: [Mat4; 4],
}

impl Default for GammaBasis {
    fn default() -> Self {
        Self::dirac()
    }
}

impl GammaBasis {
    /// `gamma^0 = diag(1, 1, -1, -1)`, `gamma^i = [[0, sigma_i], [-sigma_i, 0]]`.
    pub fn dirac() -> Self {
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        let i = c(0.0, 1.0);
        let g0 = Mat4::new(
            o, z, z, z, //
            z, o, z, z, //
            z, z, -o, z, //
            z, z, z, -o,
        );
        let g1 = Mat4::new(
            z, z, z, o, //
            z, z, o, z, //
            z, -o, z, z, //
            -o, z, z, z,
        );
        let g2 = Mat4::new(
            z, z, z, -i, //
            z, z, i, z, //
            z, i, z, z, //
            -i, z, z, z,
        );
        let g3 = Mat4::new(
            z, z, o, z, //
            z, z, z, -o, //
            -o, z, z, z, //
            z, o, z, z,
        );
        Self {
            gamma: [g0, g1, g2, g3],
        }
    }

    /// Feynman slash `gamma^mu p_mu = gamma^0 E - gamma . p`.
    pub fn slash(&self, p: &FourMomentum) -> Mat4 {
        let mut out = self.gamma[0] * c(p.e, 0.0);
        for k in 0..3 {
            out -= self.gamma[k + 1] * c(p.p[k], 0.0);
        }
        out
    }

    /// Largest entrywise deviation of `{gamma^mu, gamma^nu}` from `2 g^{mu nu} I`.
    pub fn anticommutator_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let ac = self.gamma[mu] * self.gamma[nu] + self.gamma[nu] * self.gamma[mu];
                let target = if mu == nu { 2.0 * METRIC[mu] } else { 0.0 };
                let expected = Mat4::identity() * c(target, 0.0);
                let d = (ac - expected).iter().map(|z| z.norm()).fold(0.0, f64::max);
                worst = worst.max(d);
            }
        }
        worst
    }
}
