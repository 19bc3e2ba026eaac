//! Newton systems with block-arrow structure: independent dense blocks coupled
//! only through a handful of shared variables.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
enum Slot {
    Block(usize, usize),
    Coupling(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Layout {
    blocks: Vec<Vec<usize>>,
    coupling: Vec<usize>,
    slots: Vec<Slot>,
}

impl Layout {
    /// `block_of[j]` is the block of variable `j`, `None` for coupling variables.
    /// `groups` lists the variables each constraint touches; if one touches two
    /// different blocks the layout degrades to a single dense block.
    pub(crate) fn new(block_of: &[Option<usize>], groups: impl Iterator<Item = Vec<usize>>) -> Layout {
        let mut consistent = true;
        for g in groups {
            let mut seen = None;
            for j in g {
                if let Some(b) = block_of[j] {
                    match seen {
                        None => seen = Some(b),
                        Some(s) if s != b => consistent = false,
                        _ => {}
                    }
                }
            }
            if !consistent {
                break;
            }
        }
        let block_of: Vec<Option<usize>> =
            if consistent { block_of.to_vec() } else { block_of.iter().map(|_| Some(0)).collect() };

        let mut ids: Vec<usize> = block_of.iter().flatten().copied().collect();
        ids.sort_unstable();
        ids.dedup();
        let mut blocks = vec![Vec::new(); ids.len()];
        let mut coupling = Vec::new();
        let mut slots = Vec::with_capacity(block_of.len());
        for (j, b) in block_of.iter().enumerate() {
            match b {
                Some(b) => {
                    let bi = ids.binary_search(b).expect("id collected");
                    slots.push(Slot::Block(bi, blocks[bi].len()));
                    blocks[bi].push(j);
                }
                None => {
                    slots.push(Slot::Coupling(coupling.len()));
                    coupling.push(j);
                }
            }
        }
        Layout { blocks, coupling, slots }
    }
}

/// Symmetric matrix `[[A_1, .., B_1], .., [B_1ᵀ, .., C]]`.
#[derive(Debug, Clone)]
pub(crate) struct ArrowMatrix {
    a: Vec<DMatrix<f64>>,
    b: Vec<DMatrix<f64>>,
    c: DMatrix<f64>,
}

impl ArrowMatrix {
    pub(crate) fn zeros(layout: &Layout) -> Self {
        let nc = layout.coupling.len();
        ArrowMatrix {
            a: layout.blocks.iter().map(|b| DMatrix::zeros(b.len(), b.len())).collect(),
            b: layout.blocks.iter().map(|b| DMatrix::zeros(b.len(), nc)).collect(),
            c: DMatrix::zeros(nc, nc),
        }
    }

    pub(crate) fn reset(&mut self) {
        self.a.iter_mut().for_each(|m| m.fill(0.0));
        self.b.iter_mut().for_each(|m| m.fill(0.0));
        self.c.fill(0.0);
    }

    /// Adds `v` at `(i, j)`. Callers add both `(i, j)` and `(j, i)` for
    /// off-diagonal entries; the coupling-row mirror of a `B` entry is implied.
    #[inline]
    pub(crate) fn add(&mut self, layout: &Layout, i: usize, j: usize, v: f64) {
        match (layout.slots[i], layout.slots[j]) {
            (Slot::Block(bi, li), Slot::Block(bj, lj)) => {
                debug_assert_eq!(bi, bj, "entry couples two blocks");
                self.a[bi][(li, lj)] += v;
            }
            (Slot::Block(bi, li), Slot::Coupling(cj)) => self.b[bi][(li, cj)] += v,
            (Slot::Coupling(_), Slot::Block(..)) => {}
            (Slot::Coupling(ci), Slot::Coupling(cj)) => self.c[(ci, cj)] += v,
        }
    }

    /// Solves `(M + shift·I)·x = rhs`; `None` if the shifted matrix is not
    /// numerically positive definite.
    pub(crate) fn solve(&self, layout: &Layout, rhs: &[f64], shift: f64) -> Option<Vec<f64>> {
        let nc = layout.coupling.len();
        let mut schur = self.c.clone();
        for i in 0..nc {
            schur[(i, i)] += shift;
        }
        let mut rhs_c = DVector::from_iterator(nc, layout.coupling.iter().map(|&j| rhs[j]));
        let mut factors = Vec::with_capacity(layout.blocks.len());
        for (bi, idx) in layout.blocks.iter().enumerate() {
            let mut a = self.a[bi].clone();
            for i in 0..idx.len() {
                a[(i, i)] += shift;
            }
            let chol = a.cholesky()?;
            let rhs_b = DVector::from_iterator(idx.len(), idx.iter().map(|&j| rhs[j]));
            let ainv_rhs = chol.solve(&rhs_b);
            if nc > 0 {
                let ainv_b = chol.solve(&self.b[bi]);
                schur -= self.b[bi].transpose() * &ainv_b;
                rhs_c -= self.b[bi].transpose() * &ainv_rhs;
                factors.push((chol, ainv_rhs, Some(ainv_b)));
            } else {
                factors.push((chol, ainv_rhs, None));
            }
        }
        let mut x = vec![0.0; rhs.len()];
        let xc = if nc > 0 {
            let sol = schur.cholesky()?.solve(&rhs_c);
            for (i, &j) in layout.coupling.iter().enumerate() {
                x[j] = sol[i];
            }
            Some(sol)
        } else {
            None
        };
        for ((idx, (_, ainv_rhs, ainv_b)), _) in layout.blocks.iter().zip(&factors).zip(0..) {
            let xb = match (ainv_b, &xc) {
                (Some(ainv_b), Some(xc)) => ainv_rhs - ainv_b * xc,
                _ => ainv_rhs.clone(),
            };
            for (i, &j) in idx.iter().enumerate() {
                x[j] = xb[i];
            }
        }
        if x.iter().all(|v| v.is_finite()) {
            Some(x)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrow_solve_matches_dense() {
        // Two blocks of size 2 and one coupling variable.
        let block_of = [Some(0), Some(0), Some(1), Some(1), None];
        let layout = Layout::new(&block_of, std::iter::empty());
        let dense = DMatrix::from_row_slice(
            5,
            5,
            &[
                4.0, 1.0, 0.0, 0.0, 0.5, //
                1.0, 3.0, 0.0, 0.0, 0.2, //
                0.0, 0.0, 5.0, 2.0, 0.1, //
                0.0, 0.0, 2.0, 6.0, 0.3, //
                0.5, 0.2, 0.1, 0.3, 2.0,
            ],
        );
        let mut m = ArrowMatrix::zeros(&layout);
        for i in 0..5 {
            for j in 0..5 {
                if dense[(i, j)] != 0.0 {
                    m.add(&layout, i, j, dense[(i, j)]);
                }
            }
        }
        let rhs = [1.0, -2.0, 0.5, 3.0, -1.0];
        let x = m.solve(&layout, &rhs, 0.0).unwrap();
        let expected = dense.cholesky().unwrap().solve(&DVector::from_row_slice(&rhs));
        for i in 0..5 {
            assert!((x[i] - expected[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_block_constraint_falls_back_to_dense() {
        let block_of = [Some(0), Some(1), None];
        let layout = Layout::new(&block_of, vec![vec![0, 1]].into_iter());
        assert_eq!(layout.blocks.len(), 1);
        assert!(layout.coupling.is_empty());
    }
}
