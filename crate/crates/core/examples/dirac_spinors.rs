//! Build u and v spinors for a boosted muon and check the textbook identities.

use collapse_sim::pathspace::Axis;
use collapse_sim::qft::{dirac_adjoint, dirac_residual, spinor_u, spinor_v, FourMomentum, GammaBasis, SpinLabel};

fn main() {
    let m = 105.6583755;
    let p = FourMomentum::on_shell(m, [30.0, -120.0, 400.0]);
    let g = GammaBasis::dirac();
    println!("E = {:.6} MeV, |p| = {:.6} MeV", p.e, p.p_abs());
    for s in SpinLabel::both(Axis::Z) {
        let u = spinor_u(&p, m, s).unwrap();
        let v = spinor_v(&p, m, s).unwrap();
        let ubar_u = (dirac_adjoint(&u) * u.0)[(0, 0)];
        let vbar_v = (dirac_adjoint(&v) * v.0)[(0, 0)];
        println!(
            "spin {}: ubar u = {:.9} (2m = {:.9}), vbar v = {:.9}, residuals u {:.1e}, v {:.1e}",
            if s.up { "up  " } else { "down" },
            ubar_u.re,
            2.0 * m,
            vbar_v.re,
            dirac_residual(&g, &p, m, 1.0, &u),
            dirac_residual(&g, &p, m, -1.0, &v),
        );
    }
    println!("gamma anticommutator defect: {:.1e}", g.anticommutator_defect());
}
