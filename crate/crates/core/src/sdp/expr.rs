use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{input_err, Result};

/// Index of a scalar decision variable.
pub type VarId = usize;

/// Affine matrix expression `C + sum_k y_k F_k` over scalar decision variables.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineExpr {
    constant: DMatrix<f64>,
    terms: BTreeMap<VarId, DMatrix<f64>>,
}

impl AffineExpr {
    pub fn constant(m: DMatrix<f64>) -> Self {
        Self { constant: m, terms: BTreeMap::new() }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::constant(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(DMatrix::identity(n, n))
    }

    /// `coef * y_var`.
    pub fn term(var: VarId, coef: DMatrix<f64>) -> Self {
        let mut e = Self::zeros(coef.nrows(), coef.ncols());
        e.terms.insert(var, coef);
        e
    }

    pub fn shape(&self) -> (usize, usize) {
        self.constant.shape()
    }
    pub fn nrows(&self) -> usize {
        self.constant.nrows()
    }
    pub fn ncols(&self) -> usize {
        self.constant.ncols()
    }
    pub fn constant_part(&self) -> &DMatrix<f64> {
        &self.constant
    }
    pub fn terms(&self) -> impl Iterator<Item = (VarId, &DMatrix<f64>)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }
    pub fn max_var(&self) -> Option<VarId> {
        self.terms.keys().next_back().copied()
    }

    fn same_shape(&self, other: &Self, op: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return input_err(format!("{op}: shape {:?} vs {:?}", self.shape(), other.shape()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "add")?;
        let mut out = self.clone();
        out.constant += &other.constant;
        for (k, v) in &other.terms {
            out.terms
                .entry(*k)
                .and_modify(|c| *c += v)
                .or_insert_with(|| v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, f: f64) -> Self {
        Self {
            constant: &self.constant * f,
            terms: self.terms.iter().map(|(k, v)| (*k, v * f)).collect(),
        }
    }

    /// `m * self`
    pub fn left_mul(&self, m: &DMatrix<f64>) -> Result<Self> {
        if m.ncols() != self.nrows() {
            return input_err(format!("left_mul: {:?} * {:?}", m.shape(), self.shape()));
        }
        Ok(Self {
            constant: m * &self.constant,
            terms: self.terms.iter().map(|(k, v)| (*k, m * v)).collect(),
        })
    }

    /// `self * m`
    pub fn right_mul(&self, m: &DMatrix<f64>) -> Result<Self> {
        if self.ncols() != m.nrows() {
            return input_err(format!("right_mul: {:?} * {:?}", self.shape(), m.shape()));
        }
        Ok(Self {
            constant: &self.constant * m,
            terms: self.terms.iter().map(|(k, v)| (*k, v * m)).collect(),
        })
    }

    pub fn transpose(&self) -> Self {
        Self {
            constant: self.constant.transpose(),
            terms: self.terms.iter().map(|(k, v)| (*k, v.transpose())).collect(),
        }
    }

    /// `self + self^T`
    pub fn sym(&self) -> Result<Self> {
        self.add(&self.transpose())
    }

    pub fn evaluate(&self, values: &[f64]) -> DMatrix<f64> {
        let mut out = self.constant.clone();
        for (k, v) in &self.terms {
            out += v * values[*k];
        }
        out
    }

    /// Largest entry magnitude over the constant and all coefficients.
    pub fn scale_estimate(&self) -> f64 {
        self.terms
            .values()
            .chain(std::iter::once(&self.constant))
            .map(|m| m.amax())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let sym = |m: &DMatrix<f64>| m.is_square() && (m - m.transpose()).amax() <= tol * (1.0 + m.amax());
        sym(&self.constant) && self.terms.values().all(sym)
    }

    /// Assembles a block matrix; `None` entries are zero blocks. Every block
    /// row needs at least one `Some` to fix its height, likewise for columns.
    pub fn blocks(grid: &[Vec<Option<AffineExpr>>]) -> Result<Self> {
        let nr = grid.len();
        let nc = grid.first().map_or(0, |r| r.len());
        if nr == 0 || nc == 0 || grid.iter().any(|r| r.len() != nc) {
            return input_err("block grid must be rectangular and nonempty");
        }
        let mut heights = vec![None; nr];
        let mut widths = vec![None; nc];
        for (i, row) in grid.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                if let Some(e) = cell {
                    for (slot, val, what) in [(&mut heights[i], e.nrows(), "row"), (&mut widths[j], e.ncols(), "column")] {
                        match *slot {
                            None => *slot = Some(val),
                            Some(prev) if prev != val => {
                                return input_err(format!("block {what} size mismatch at ({i}, {j}): {prev} vs {val}"))
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        let heights: Vec<usize> = heights
            .into_iter()
            .map(|h| h.ok_or_else(|| crate::Error::Input("undetermined block row height".into())))
            .collect::<Result<_>>()?;
        let widths: Vec<usize> = widths
            .into_iter()
            .map(|w| w.ok_or_else(|| crate::Error::Input("undetermined block column width".into())))
            .collect::<Result<_>>()?;
        let total_r: usize = heights.iter().sum();
        let total_c: usize = widths.iter().sum();
        let mut out = Self::zeros(total_r, total_c);
        let mut r0 = 0;
        for (i, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (j, cell) in row.iter().enumerate() {
                if let Some(e) = cell {
                    out.constant.view_mut((r0, c0), e.shape()).copy_from(&e.constant);
                    for (k, v) in &e.terms {
                        let slot = out.terms.entry(*k).or_insert_with(|| DMatrix::zeros(total_r, total_c));
                        slot.view_mut((r0, c0), v.shape()).copy_from(v);
                    }
                }
                c0 += widths[j];
            }
            r0 += heights[i];
        }
        Ok(out)
    }

    /// Symmetric block matrix from its lower triangle: `lower[i][j]` for `j <= i`.
    pub fn symmetric_blocks(lower: &[Vec<AffineExpr>]) -> Result<Self> {
        let n = lower.len();
        if lower.iter().enumerate().any(|(i, row)| row.len() != i + 1) {
            return input_err("lower block triangle has the wrong shape");
        }
        let grid: Vec<Vec<Option<AffineExpr>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Some(if j <= i { lower[i][j].clone() } else { lower[j][i].transpose() }))
                    .collect()
            })
            .collect();
        Self::blocks(&grid)
    }
}
