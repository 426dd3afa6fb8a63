use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Contravariant four-momentum `(E, p)` in MeV with metric `diag(+1,-1,-1,-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FourMomentum {
    pub e: f64,
    pub p: [f64; 3],
}

impl FourMomentum {
    pub fn new(e: f64, p: [f64; 3]) -> Self {
        Self { e, p }
    }

    /// On-shell momentum of a particle of mass `mass` with 3-momentum `p`.
    pub fn on_shell(mass: f64, p: [f64; 3]) -> Self {
        let p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        Self {
            e: (mass * mass + p2).sqrt(),
            p,
        }
    }

    pub fn at_rest(mass: f64) -> Self {
        Self::new(mass, [0.0; 3])
    }

    pub fn component(&self, mu: usize) -> f64 {
        if mu == 0 {
            self.e
        } else {
            self.p[mu - 1]
        }
    }

    pub fn p_abs(&self) -> f64 {
        self.p_sqr().sqrt()
    }

    pub fn p_sqr(&self) -> f64 {
        self.p[0] * self.p[0] + self.p[1] * self.p[1] + self.p[2] * self.p[2]
    }

    /// Minkowski product `a.b = a0 b0 - a.b`.
    pub fn dot(&self, other: &FourMomentum) -> f64 {
        self.e * other.e - (self.p[0] * other.p[0] + self.p[1] * other.p[1] + self.p[2] * other.p[2])
    }

    pub fn mass_sqr(&self) -> f64 {
        self.dot(self)
    }

    /// Invariant mass; negative squared masses from rounding are clamped.
    pub fn mass(&self) -> f64 {
        self.mass_sqr().max(0.0).sqrt()
    }

    /// Checks `E >= |p|` and that the invariant mass equals `mass` within `rel`
    /// relative to the energy scale.
    pub fn is_on_shell(&self, mass: f64, rel: f64) -> bool {
        let scale = self.e.abs().max(mass).max(1e-300);
        self.e >= 0.0
            && self.e * (1.0 + rel) >= self.p_abs()
            && (self.mass_sqr() - mass * mass).abs() <= rel * scale * scale
    }

    /// Velocity of the frame in which this momentum is at rest.
    pub fn velocity(&self) -> [f64; 3] {
        [self.p[0] / self.e, self.p[1] / self.e, self.p[2] / self.e]
    }

    /// Active boost by velocity `beta` (|beta| < 1).
    pub fn boost(&self, beta: [f64; 3]) -> Self {
        let b2 = beta[0] * beta[0] + beta[1] * beta[1] + beta[2] * beta[2];
        if b2 == 0.0 {
            return *self;
        }
        let gamma = 1.0 / (1.0 - b2).sqrt();
        let bp = beta[0] * self.p[0] + beta[1] * self.p[1] + beta[2] * self.p[2];
        let k = (gamma - 1.0) * bp / b2 + gamma * self.e;
        Self {
            e: gamma * (self.e + bp),
            p: [
                self.p[0] + k * beta[0],
                self.p[1] + k * beta[1],
                self.p[2] + k * beta[2],
            ],
        }
    }

    /// Rotation by `angle` about the z axis.
    pub fn rotate_z(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            e: self.e,
            p: [c * self.p[0] - s * self.p[1], s * self.p[0] + c * self.p[1], self.p[2]],
        }
    }
}

impl Add for FourMomentum {
    type Output = FourMomentum;

    fn add(self, rhs: Self) -> Self {
        FourMomentum::new(
            self.e + rhs.e,
            [self.p[0] + rhs.p[0], self.p[1] + rhs.p[1], self.p[2] + rhs.p[2]],
        )
    }
}

impl Sub for FourMomentum {
    type Output = FourMomentum;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for FourMomentum {
    type Output = FourMomentum;

    fn neg(self) -> Self {
        FourMomentum::new(-self.e, [-self.p[0], -self.p[1], -self.p[2]])
    }
}

/// Magnitude of the back-to-back momentum for a two-body state of invariant
/// mass `sqrt_s` made of masses `m1` and `m2`. `None` below threshold.
pub fn two_body_momentum(sqrt_s: f64, m1: f64, m2: f64) -> Option<f64> {
    if sqrt_s <= m1 + m2 {
        return None;
    }
    let s = sqrt_s * sqrt_s;
    let lambda = (s - (m1 + m2).powi(2)) * (s - (m1 - m2).powi(2));
    Some(lambda.max(0.0).sqrt() / (2.0 * sqrt_s))
}

/// Unit vector from polar cosine and azimuth.
pub fn direction(cos_theta: f64, phi: f64) -> [f64; 3] {
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    [sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta]
}

/// Two-body final state with particle 1 along `dir` in the rest frame of
/// `total`, boosted back to the frame `total` is given in.
pub fn two_body_final_state(
    total: FourMomentum,
    m1: f64,
    m2: f64,
    dir: [f64; 3],
) -> Option<(FourMomentum, FourMomentum)> {
    let sqrt_s = total.mass();
    let k = two_body_momentum(sqrt_s, m1, m2)?;
    let p1 = FourMomentum::on_shell(m1, [k * dir[0], k * dir[1], k * dir[2]]);
    let p2 = FourMomentum::on_shell(m2, [-k * dir[0], -k * dir[1], -k * dir[2]]);
    let beta = total.velocity();
    Some((p1.boost(beta), p2.boost(beta)))
}

/// Per-component conservation check: `|a_mu - b_mu| <= rel * scale` where the
/// scale is the larger of the component magnitudes and the total energy.
pub fn conserves(a: &FourMomentum, b: &FourMomentum, rel: f64) -> bool {
    let scale = a.e.abs().max(b.e.abs());
    (0..4).all(|mu| {
        let (x, y) = (a.component(mu), b.component(mu));
        (x - y).abs() <= rel * scale.max(x.abs()).max(y.abs())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boost_preserves_mass_and_round_trips() {
        let p = FourMomentum::on_shell(0.511, [3.0, -1.0, 20.0]);
        let beta = [0.1, 0.3, -0.5];
        let q = p.boost(beta);
        assert!((q.mass_sqr() - p.mass_sqr()).abs() < 1e-9);
        let back = q.boost([-beta[0], -beta[1], -beta[2]]);
        for mu in 0..4 {
            assert!((back.component(mu) - p.component(mu)).abs() < 1e-9);
        }
    }

    #[test]
    fn boost_to_rest_frame() {
        let p = FourMomentum::on_shell(105.66, [10.0, 20.0, 30.0]);
        let v = p.velocity();
        let r = p.boost([-v[0], -v[1], -v[2]]);
        assert!((r.e - 105.66).abs() < 1e-9);
        assert!(r.p_abs() < 1e-9);
    }

    #[test]
    fn two_body_final_state_conserves() {
        let total = FourMomentum::on_shell(0.511, [0.0, 0.0, 400.0])
            + FourMomentum::on_shell(0.511, [0.0, 0.0, -100.0]);
        let (a, b) = two_body_final_state(total, 105.66, 105.66, direction(0.3, 1.2)).unwrap();
        assert!(conserves(&(a + b), &total, 1e-12));
        assert!(a.is_on_shell(105.66, 1e-9));
        assert!(b.is_on_shell(105.66, 1e-9));
    }

    #[test]
    fn below_threshold() {
        assert!(two_body_momentum(200.0, 105.66, 105.66).is_none());
        let k = two_body_momentum(1000.0, 0.0, 0.0).unwrap();
        assert!((k - 500.0).abs() < 1e-12);
    }
}
