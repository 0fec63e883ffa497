//! Recomputes the fitted constant behind `spectral::C_EMP` on its
//! calibration family and checks the frozen value still covers it.

mod common;

use ancient_ricci::spectral::{cylindrical_poincare_check, C_EMP};
use common::{smooth_family, CYLINDRICAL_CONFIGS};

const CALIBRATION_SEED: u64 = 0x00ca_11b7;

#[test]
fn frozen_cylindrical_constant_covers_calibration_family() {
    let mut worst: f64 = 0.0;
    for &(l1, l2, l3) in &CYLINDRICAL_CONFIGS {
        for f in smooth_family(CALIBRATION_SEED, 200, l3, 0.01) {
            let c = cylindrical_poincare_check(&f, l1, l2, l3, 1.0).unwrap();
            worst = worst.max(c.ratio());
        }
    }
    println!("calibration max ratio {worst:.6}, frozen C_EMP {C_EMP}");
    assert!(worst.is_finite() && worst > 0.0);
    assert!(C_EMP >= 2.0 * worst, "C_EMP {C_EMP} below twice the fitted {worst}");
    assert!(C_EMP <= 4.0 * worst, "C_EMP {C_EMP} far above the fitted {worst}");
}
