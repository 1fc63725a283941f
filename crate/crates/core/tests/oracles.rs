use nonthermal::info::{conditional_entropy, radiation_entropy};
use nonthermal::{build_spectrum, BlackHoleState, GridSpec, Normalization};

// 50-digit references for Schwarzschild M = 1 on nodes k/64, k = 1..64.
const S_R: f64 = 2.047_727_461_155_741_342_684_901;
const S_COND_EXACT: f64 = 11.305_324_958_340_295_479_376_98;
const S_COND_LOWENERGY: f64 = 11.277_103_176_601_318_836_305_56;
const E_R: f64 = 0.052_686_241_440_193_423_379_903_18;

#[test]
fn unit_mass_64_bin_reference_values() {
    let s = BlackHoleState::schwarzschild(1.0).unwrap();
    let spec = build_spectrum(&s, &GridSpec::energy(1.0, 64), Normalization::UnitSum).unwrap();
    assert!((radiation_entropy(&spec).unwrap() - S_R).abs() < 1e-10);
    let c = conditional_entropy(&s, &spec).unwrap();
    assert!((c.exact - S_COND_EXACT).abs() < 1e-10, "{}", c.exact);
    assert!((c.lowenergy - S_COND_LOWENERGY).abs() < 1e-10, "{}", c.lowenergy);
    assert!((c.mean_omega - E_R).abs() < 1e-12, "{}", c.mean_omega);
}
