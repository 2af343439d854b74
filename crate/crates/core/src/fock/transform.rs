use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{FockError, Mode, UNITARITY_TOLERANCE};

/// A linear map on creation operators.
///
/// Column `i` of `matrix` is the image of `inputs[i]`:
/// `a_{inputs[i]}† → Σ_j matrix[(j, i)] a_{outputs[j]}†`. Modes that are not
/// inputs are left untouched. Inputs and outputs may be the same modes (a
/// wave plate) or different ones (a beam splitter relabeling its ports).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTransform {
    inputs: Vec<Mode>,
    outputs: Vec<Mode>,
    matrix: DMatrix<Complex64>,
    columns: BTreeMap<Mode, usize>,
}

impl ModeTransform {
    pub fn new(
        inputs: Vec<Mode>,
        outputs: Vec<Mode>,
        matrix: DMatrix<Complex64>,
    ) -> Result<Self, FockError> {
        Self::with_tolerance(inputs, outputs, matrix, UNITARITY_TOLERANCE)
    }

    pub(crate) fn with_tolerance(
        inputs: Vec<Mode>,
        outputs: Vec<Mode>,
        matrix: DMatrix<Complex64>,
        tolerance: f64,
    ) -> Result<Self, FockError> {
        if inputs.len() != outputs.len()
            || matrix.nrows() != outputs.len()
            || matrix.ncols() != inputs.len()
        {
            return Err(FockError::ShapeMismatch {
                inputs: inputs.len(),
                outputs: outputs.len(),
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let mut columns = BTreeMap::new();
        for (i, mode) in inputs.iter().enumerate() {
            if columns.insert(*mode, i).is_some() {
                return Err(FockError::DuplicateMode(*mode));
            }
        }
        let mut seen = BTreeSet::new();
        for mode in &outputs {
            if !seen.insert(*mode) {
                return Err(FockError::DuplicateMode(*mode));
            }
        }
        let deviation = unitarity_deviation(&matrix);
        if !(deviation < tolerance) {
            return Err(FockError::NonUnitaryTransform { deviation });
        }
        Ok(ModeTransform {
            inputs,
            outputs,
            matrix,
            columns,
        })
    }

    pub fn identity(modes: Vec<Mode>) -> Result<Self, FockError> {
        let n = modes.len();
        Self::new(modes.clone(), modes, DMatrix::identity(n, n))
    }

    pub fn inputs(&self) -> &[Mode] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Mode] {
        &self.outputs
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn acts_on(&self, mode: &Mode) -> bool {
        self.columns.contains_key(mode)
    }

    /// Image of a creation operator; `None` when the mode is not an input.
    pub fn image(&self, mode: &Mode) -> Option<Vec<(Mode, Complex64)>> {
        let col = *self.columns.get(mode)?;
        Some(
            self.outputs
                .iter()
                .zip(self.matrix.column(col).iter())
                .filter(|(_, u)| u.norm() > 0.0)
                .map(|(m, u)| (*m, *u))
                .collect(),
        )
    }

    /// Image as a full linear combination, identity for untouched modes.
    fn image_or_self(&self, mode: &Mode) -> BTreeMap<Mode, Complex64> {
        match self.columns.get(mode) {
            Some(&col) => self
                .outputs
                .iter()
                .zip(self.matrix.column(col).iter())
                .map(|(m, u)| (*m, *u))
                .collect(),
            None => BTreeMap::from([(*mode, Complex64::new(1.0, 0.0))]),
        }
    }

    /// The single transform equal to applying `self` and then `next`.
    pub fn then(&self, next: &ModeTransform) -> Result<ModeTransform, FockError> {
        let outputs_first: BTreeSet<Mode> = self.outputs.iter().copied().collect();
        let inputs_next: BTreeSet<Mode> = next.inputs.iter().copied().collect();

        for mode in &self.inputs {
            if !outputs_first.contains(mode) && inputs_next.contains(mode) {
                return Err(FockError::ModeMismatch(format!(
                    "{mode} is emptied by the first element but acted on by the second"
                )));
            }
        }

        let mut inputs: Vec<Mode> = self.inputs.clone();
        inputs.extend(
            next.inputs
                .iter()
                .filter(|m| !outputs_first.contains(m) && !self.acts_on(m)),
        );
        let mut outputs: Vec<Mode> = next.outputs.clone();
        outputs.extend(
            self.outputs
                .iter()
                .filter(|m| !inputs_next.contains(m) && !next.outputs.contains(m)),
        );
        if inputs.len() != outputs.len() {
            return Err(FockError::ModeMismatch(format!(
                "composite maps {} modes onto {}",
                inputs.len(),
                outputs.len()
            )));
        }
        let row_of: BTreeMap<Mode, usize> =
            outputs.iter().enumerate().map(|(i, m)| (*m, i)).collect();

        let n = inputs.len();
        let mut matrix = DMatrix::zeros(n, n);
        for (col, mode) in inputs.iter().enumerate() {
            for (mid, u1) in self.image_or_self(mode) {
                for (out, u2) in next.image_or_self(&mid) {
                    let row = *row_of.get(&out).ok_or_else(|| {
                        FockError::ModeMismatch(format!("{out} is not part of the composite output"))
                    })?;
                    matrix[(row, col)] += u1 * u2;
                }
            }
        }
        ModeTransform::with_tolerance(inputs, outputs, matrix, 1e-10).map_err(|e| match e {
            FockError::NonUnitaryTransform { deviation } => FockError::ModeMismatch(format!(
                "composite is not unitary (deviation {deviation:.3e})"
            )),
            other => other,
        })
    }
}

fn unitarity_deviation(matrix: &DMatrix<Complex64>) -> f64 {
    let n = matrix.ncols();
    let gram = matrix.adjoint() * matrix;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}
