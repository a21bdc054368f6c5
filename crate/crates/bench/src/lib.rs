//! Fixtures shared by the benchmarks: the standard smooth step on the
//! (2, 1) background in either regime.

use mkdv_nzbc::contour::build_contour;
use mkdv_nzbc::scattering::{sample_contour, ScatteringData, ScatteringOptions};
use mkdv_nzbc::{BoundaryData, PotentialProfile, Regime};

pub fn boundary(regime: Regime) -> BoundaryData {
    BoundaryData::new(2.0, 1.0, regime).expect("valid boundary")
}

pub fn smooth_step(regime: Regime) -> PotentialProfile {
    PotentialProfile::tanh_step(boundary(regime), 1.0, 0.0, None, 1e-10).expect("valid profile")
}

/// Scattering data of the smooth step with `nodes` Gauss nodes per segment.
pub fn step_data(regime: Regime, nodes: usize) -> ScatteringData {
    let p = smooth_step(regime);
    let contour = build_contour(&p.bd, nodes).expect("contour");
    sample_contour(&p, &contour, &ScatteringOptions::for_boundary(&p.bd)).expect("scattering data")
}
