//! The two benchmark systems shipped with the crate.

use nalgebra::DMatrix;

use crate::model::{MjlsModel, TransitionMatrix};

/// Two-mode, two-state, single-input single-output system with identical
/// output maps. Not certified mode observable at small windows, yet the
/// adaptive estimator settles on a window of three.
pub fn estimation_example() -> MjlsModel {
    let a1 = DMatrix::from_row_slice(2, 2, &[0.45, 0.0, 0.0, 0.4]);
    let a2 = DMatrix::from_row_slice(2, 2, &[0.25, -0.20, 0.04, 0.4]);
    let b = DMatrix::from_row_slice(2, 1, &[0.3, 0.4]);
    let c = DMatrix::from_row_slice(1, 2, &[2.0, 1.0]);
    MjlsModel::new(vec![a1, a2], vec![b.clone(), b], vec![c.clone(), c]).expect("static dimensions")
}

/// Two-mode open-loop unstable system used for the output-feedback experiments.
pub fn control_example() -> MjlsModel {
    let a1 = DMatrix::from_row_slice(2, 2, &[1.05, 1.8, 0.0, 1.1]);
    let a2 = DMatrix::from_row_slice(2, 2, &[0.95, 0.7, 0.0, 0.95]);
    let b1 = DMatrix::from_row_slice(2, 2, &[0.9, 0.0, 0.0, 0.0]);
    let b2 = DMatrix::from_row_slice(2, 2, &[0.8, 0.0, 0.0, 1.4]);
    let c1 = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]);
    let c2 = DMatrix::identity(2, 2);
    MjlsModel::new(vec![a1, a2], vec![b1, b2], vec![c1, c2]).expect("static dimensions")
}

pub fn uniform_transitions() -> TransitionMatrix {
    TransitionMatrix::uniform(2)
}
