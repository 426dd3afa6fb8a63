use std::sync::LazyLock;

use num_complex::Complex64;

use super::{dirac_adjoint, spinor_u, spinor_v, DiracSpinor, FourMomentum, GammaBasis, QftError, SpinLabel, METRIC};
use crate::constants::{Constants, ParticleType};
use crate::pathspace::{Amplitude, Axis};

static GAMMAS: LazyLock<GammaBasis> = LazyLock::new(GammaBasis::dirac);

/// Electric coupling `e` (dimensionless in natural units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub e: f64,
}

impl Default for Couplings {
    fn default() -> Self {
        Self::from_constants(&Constants::default())
    }
}

impl Couplings {
    pub fn from_constants(c: &Constants) -> Self {
        Self { e: c.coupling() }
    }
}

/// Kinematic state of one external lepton line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeptonState {
    pub ptype: ParticleType,
    pub mass: f64,
    pub momentum: FourMomentum,
    pub spin: SpinLabel,
}

/// A lepton and an antilepton, in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    pub fermion: LeptonState,
    pub antifermion: LeptonState,
}

impl PairState {
    pub fn total(&self) -> FourMomentum {
        self.fermion.momentum + self.antifermion.momentum
    }
}

/// Which single-photon diagrams contribute to a lepton-antilepton process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Diagrams {
    /// Entry pair annihilates into a photon that creates the exit pair.
    pub annihilation: bool,
    /// Photon exchanged between the fermion and antifermion lines.
    pub exchange: bool,
}

impl Diagrams {
    pub fn for_process(entry: (ParticleType, ParticleType), exit: (ParticleType, ParticleType)) -> Result<Self, QftError> {
        for (f, a) in [entry, exit] {
            if !(f.is_lepton() && !f.is_antiparticle() && a.is_lepton() && a.is_antiparticle()) {
                return Err(QftError::NotALeptonPair(f, a));
            }
        }
        let d = Diagrams {
            annihilation: entry.0.flavor() == entry.1.flavor() && exit.0.flavor() == exit.1.flavor(),
            exchange: entry.0 == exit.0 && entry.1 == exit.1,
        };
        if !(d.annihilation || d.exchange) {
            return Err(QftError::ForbiddenChannel(exit.0, exit.1));
        }
        Ok(d)
    }
}

/// The four external spinors `u(p1), v(p2), u(p1'), v(p2')`.
#[derive(Debug, Clone, Copy)]
pub struct ExternalSpinors {
    pub u_in: DiracSpinor,
    pub v_in: DiracSpinor,
    pub u_out: DiracSpinor,
    pub v_out: DiracSpinor,
}

impl ExternalSpinors {
    pub fn new(entry: &PairState, exit: &PairState) -> Result<Self, QftError> {
        Ok(Self {
            u_in: spinor_u(&entry.fermion.momentum, entry.fermion.mass, entry.fermion.spin)?,
            v_in: spinor_v(&entry.antifermion.momentum, entry.antifermion.mass, entry.antifermion.spin)?,
            u_out: spinor_u(&exit.fermion.momentum, exit.fermion.mass, exit.fermion.spin)?,
            v_out: spinor_v(&exit.antifermion.momentum, exit.antifermion.mass, exit.antifermion.spin)?,
        })
    }
}

/// Vector current `a-bar gamma^mu b` for mu = 0..3.
fn current(a: &DiracSpinor, b: &DiracSpinor) -> [Complex64; 4] {
    let abar = dirac_adjoint(a);
    std::array::from_fn(|mu| (abar * GAMMAS.gamma[mu] * b.0)[(0, 0)])
}

/// `J^mu g_{mu nu} K^nu`.
fn contract(j: &[Complex64; 4], k: &[Complex64; 4]) -> Complex64 {
    (0..4).map(|mu| j[mu] * k[mu] * METRIC[mu]).sum()
}

/// Squared momentum transfers `s = (p1 + p2)^2` and `t = (p1 - p1')^2`.
pub fn mandelstam_st(entry: &PairState, exit: &PairState) -> (f64, f64) {
    let s = entry.total().mass_sqr();
    let t = (entry.fermion.momentum - exit.fermion.momentum).mass_sqr();
    (s, t)
}

/// Single-photon amplitude from explicit spinors:
///
/// `M = (-ie)^2 [v-bar_in g_mu u_in] (-i g^{mu nu} / s) [u-bar_out g_nu v_out]
///    - (-ie)^2 [u-bar_out g_mu u_in] (-i g^{mu nu} / t) [v-bar_in g_nu v_out]`
pub fn amplitude_from_spinors(
    w: &ExternalSpinors,
    s: f64,
    t: f64,
    diagrams: Diagrams,
    couplings: &Couplings,
) -> Amplitude {
    let vertex = Complex64::new(0.0, -couplings.e).powi(2);
    let propagator = Complex64::new(0.0, -1.0);
    let mut m = Complex64::new(0.0, 0.0);
    if diagrams.annihilation {
        let j = current(&w.v_in, &w.u_in);
        let k = current(&w.u_out, &w.v_out);
        m += vertex * propagator / s * contract(&j, &k);
    }
    if diagrams.exchange {
        let j = current(&w.u_out, &w.u_in);
        let k = current(&w.v_in, &w.v_out);
        m -= vertex * propagator / t * contract(&j, &k);
    }
    m
}

/// Tree-level amplitude for lepton + antilepton -> lepton + antilepton.
///
/// For `e- e+ -> e- e+` both diagrams contribute with a relative minus sign;
/// for a change of flavor only annihilation contributes, and for elastic
/// scattering of different flavors only the exchange diagram does.
pub fn bhabha_amplitude(entry: &PairState, exit: &PairState, couplings: &Couplings) -> Result<Amplitude, QftError> {
    let diagrams = Diagrams::for_process(
        (entry.fermion.ptype, entry.antifermion.ptype),
        (exit.fermion.ptype, exit.antifermion.ptype),
    )?;
    let (s, t) = mandelstam_st(entry, exit);
    let scale = entry.total().e.powi(2).max(1e-300);
    if diagrams.annihilation && s.abs() <= 1e-12 * scale {
        return Err(QftError::PropagatorPole("s"));
    }
    if diagrams.exchange && t.abs() <= 1e-12 * scale {
        return Err(QftError::PropagatorPole("t"));
    }
    let w = ExternalSpinors::new(entry, exit)?;
    Ok(amplitude_from_spinors(&w, s, t, diagrams, couplings))
}

/// `(1/4) sum over all sixteen spin assignments of |M|^2`, spins along z.
pub fn spin_averaged_sqr(entry: &PairState, exit: &PairState, couplings: &Couplings) -> Result<f64, QftError> {
    let mut total = 0.0;
    let mut e = *entry;
    let mut x = *exit;
    for s1 in SpinLabel::both(Axis::Z) {
        for s2 in SpinLabel::both(Axis::Z) {
            for s3 in SpinLabel::both(Axis::Z) {
                for s4 in SpinLabel::both(Axis::Z) {
                    e.fermion.spin = s1;
                    e.antifermion.spin = s2;
                    x.fermion.spin = s3;
                    x.antifermion.spin = s4;
                    total += bhabha_amplitude(&e, &x, couplings)?.norm_sqr();
                }
            }
        }
    }
    Ok(total / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qft::{direction, two_body_momentum, Mat4};

    const ME: f64 = 0.5110;

    fn lepton(ptype: ParticleType, mass: f64, p: [f64; 3]) -> LeptonState {
        LeptonState {
            ptype,
            mass,
            momentum: FourMomentum::on_shell(mass, p),
            spin: SpinLabel::up(Axis::Z),
        }
    }

    fn cm_process(sqrt_s: f64, m_out: f64, cos: f64, phi: f64, out: (ParticleType, ParticleType)) -> (PairState, PairState) {
        let k = two_body_momentum(sqrt_s, ME, ME).unwrap();
        let entry = PairState {
            fermion: lepton(ParticleType::Electron, ME, [0.0, 0.0, k]),
            antifermion: lepton(ParticleType::Positron, ME, [0.0, 0.0, -k]),
        };
        let q = two_body_momentum(sqrt_s, m_out, m_out).unwrap();
        let d = direction(cos, phi);
        let exit = PairState {
            fermion: lepton(out.0, m_out, [q * d[0], q * d[1], q * d[2]]),
            antifermion: lepton(out.1, m_out, [-q * d[0], -q * d[1], -q * d[2]]),
        };
        (entry, exit)
    }

    /// Spin sum by traces: sum |A/s - B/t|^2 e^4 with
    /// sum |A|^2 = Tr[(p2-m) g^mu (p1+m) g^nu] Tr[(p1'+m) g_mu (p2'-m) g_nu] and
    /// sum A B* = Tr[(p2-m) g^mu (p1+m) g^nu (p1'+m) g_mu (p2'-m) g_nu].
    fn trace_oracle(entry: &PairState, exit: &PairState, e: f64) -> f64 {
        let g = GammaBasis::dirac();
        let id = Mat4::identity();
        let c = |x: f64| Complex64::new(x, 0.0);
        let p1 = g.slash(&entry.fermion.momentum) + id * c(entry.fermion.mass);
        let p2 = g.slash(&entry.antifermion.momentum) - id * c(entry.antifermion.mass);
        let q1 = g.slash(&exit.fermion.momentum) + id * c(exit.fermion.mass);
        let q2 = g.slash(&exit.antifermion.momentum) - id * c(exit.antifermion.mass);
        let (s, t) = mandelstam_st(entry, exit);
        let (mut aa, mut bb, mut ab) = (c(0.0), c(0.0), c(0.0));
        for mu in 0..4 {
            for nu in 0..4 {
                let w = METRIC[mu] * METRIC[nu];
                let (gm, gn) = (g.gamma[mu], g.gamma[nu]);
                aa += (p2 * gm * p1 * gn).trace() * (q1 * gm * q2 * gn).trace() * w;
                bb += (q1 * gm * p1 * gn).trace() * (p2 * gm * q2 * gn).trace() * w;
                ab += (p2 * gm * p1 * gn * q1 * gm * q2 * gn).trace() * w;
            }
        }
        let e4 = e.powi(4);
        (e4 * (aa.re / (s * s) + bb.re / (t * t) - 2.0 * ab.re / (s * t))) / 4.0
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let (entry, exit) = cm_process(1000.0, ME, 0.3, 0.1, (ParticleType::Electron, ParticleType::Positron));
        let m = bhabha_amplitude(&entry, &exit, &Couplings { e: 0.0 }).unwrap();
        assert_eq!(m, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn spin_sum_matches_trace_oracle_with_masses() {
        let e = Couplings::default();
        for &(sqrt_s, cos) in &[(3.0, 0.2), (50.0, -0.7), (400.0, 0.9)] {
            let (entry, exit) = cm_process(sqrt_s, ME, cos, 0.4, (ParticleType::Electron, ParticleType::Positron));
            let got = spin_averaged_sqr(&entry, &exit, &e).unwrap();
            let want = trace_oracle(&entry, &exit, e.e);
            assert!((got - want).abs() <= 1e-9 * want.abs(), "{got} vs {want}");
        }
    }

    #[test]
    fn muon_channel_matches_annihilation_trace() {
        let e = Couplings::default();
        let (entry, exit) = cm_process(250.0, 105.66, -0.3, 2.0, (ParticleType::MuonMinus, ParticleType::MuonPlus));
        let got = spin_averaged_sqr(&entry, &exit, &e).unwrap();
        // only the s-channel trace survives; reuse the oracle with the exchange part dropped
        let g = GammaBasis::dirac();
        let id = Mat4::identity();
        let c = |x: f64| Complex64::new(x, 0.0);
        let p1 = g.slash(&entry.fermion.momentum) + id * c(ME);
        let p2 = g.slash(&entry.antifermion.momentum) - id * c(ME);
        let q1 = g.slash(&exit.fermion.momentum) + id * c(105.66);
        let q2 = g.slash(&exit.antifermion.momentum) - id * c(105.66);
        let s = entry.total().mass_sqr();
        let mut aa = c(0.0);
        for mu in 0..4 {
            for nu in 0..4 {
                let (gm, gn) = (g.gamma[mu], g.gamma[nu]);
                aa += (p2 * gm * p1 * gn).trace() * (q1 * gm * q2 * gn).trace() * (METRIC[mu] * METRIC[nu]);
            }
        }
        let want = e.e.powi(4) * aa.re / (s * s) / 4.0;
        assert!((got - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn forward_exchange_is_a_pole() {
        let k = 100.0;
        let entry = PairState {
            fermion: lepton(ParticleType::Electron, ME, [0.0, 0.0, k]),
            antifermion: lepton(ParticleType::Positron, ME, [0.0, 0.0, -k]),
        };
        let r = bhabha_amplitude(&entry, &entry, &Couplings::default());
        assert_eq!(r, Err(QftError::PropagatorPole("t")));
        // the same configuration for a flavor change has no t-channel
        let mut exit = entry;
        exit.fermion.ptype = ParticleType::MuonMinus;
        exit.antifermion.ptype = ParticleType::MuonPlus;
        exit.fermion.mass = 105.66;
        exit.antifermion.mass = 105.66;
        exit.fermion.momentum = FourMomentum::on_shell(105.66, [0.0, 0.0, 30.0]);
        exit.antifermion.momentum = FourMomentum::on_shell(105.66, [0.0, 0.0, -30.0]);
        assert!(bhabha_amplitude(&entry, &exit, &Couplings::default()).is_ok());
    }

    #[test]
    fn diagram_selection() {
        use ParticleType::*;
        let d = Diagrams::for_process((Electron, Positron), (Electron, Positron)).unwrap();
        assert!(d.annihilation && d.exchange);
        let d = Diagrams::for_process((Electron, Positron), (TauonMinus, TauonPlus)).unwrap();
        assert!(d.annihilation && !d.exchange);
        let d = Diagrams::for_process((Electron, MuonPlus), (Electron, MuonPlus)).unwrap();
        assert!(!d.annihilation && d.exchange);
        assert!(Diagrams::for_process((Electron, MuonPlus), (MuonMinus, MuonPlus)).is_err());
        assert!(Diagrams::for_process((Positron, Electron), (Electron, Positron)).is_err());
    }

    #[test]
    fn linear_in_exit_spinors() {
        let (entry, exit) = cm_process(800.0, ME, 0.1, 0.7, (ParticleType::Electron, ParticleType::Positron));
        let w = ExternalSpinors::new(&entry, &exit).unwrap();
        let (s, t) = mandelstam_st(&entry, &exit);
        let d = Diagrams { annihilation: true, exchange: true };
        let cpl = Couplings::default();
        let m0 = amplitude_from_spinors(&w, s, t, d, &cpl);
        let k = Complex64::new(-0.4, 1.7);
        let mut scaled = w;
        scaled.v_out = w.v_out.scale(k);
        let m1 = amplitude_from_spinors(&scaled, s, t, d, &cpl);
        assert!((m1 - m0 * k).norm() <= 1e-12 * m0.norm().max(1e-30) * k.norm());
        let mut scaled = w;
        scaled.u_out = w.u_out.scale(k);
        let m2 = amplitude_from_spinors(&scaled, s, t, d, &cpl);
        assert!((m2 - m0 * k.conj()).norm() <= 1e-12 * m0.norm().max(1e-30) * k.norm());
    }
}
