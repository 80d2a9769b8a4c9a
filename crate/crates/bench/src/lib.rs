//! Fixtures shared by the benchmarks.

use nalgebra::DMatrix;
use qtsvm::data::{generate, Example, GeneratorOptions};
use qtsvm::quadvec::lift_rows;
use qtsvm::{Dataset, LiftingMode, NormalizationParams};

pub fn example(ex: Example, m_per_class: usize) -> Dataset {
    generate(ex, m_per_class, 7, &GeneratorOptions::for_example(ex)).expect("generator")
}

/// Scaled and lifted classes of `d`; columns are samples.
pub fn lifted(d: &Dataset, mode: LiftingMode) -> (DMatrix<f64>, DMatrix<f64>) {
    let s = NormalizationParams::fit(d)
        .and_then(|p| p.apply_dataset(d))
        .expect("scale");
    (
        lift_rows(&s.x_pos(), mode).expect("lift"),
        lift_rows(&s.x_neg(), mode).expect("lift"),
    )
}
