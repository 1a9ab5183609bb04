//! Independent dense verification of the constructive solvers.
//!
//! The oracle restricts `(I - T) y = x` to a finite index window and solves
//! the least-squares problem by a rank-revealing factorization. For `y`
//! supported inside the window, `(I - T) y` spills at most one forward layer
//! outside it; the residual is evaluated over the window together with that
//! spill layer, so it equals the true full-space residual of the windowed
//! candidate. Enlarging the window therefore never increases the residual.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::Error;
use crate::operator::OperatorSpec;
use crate::vector::{CoeffVector, Index, Space, ZERO_EPS};

/// Relative singular-value threshold for the rank-revealing solve.
const RANK_RTOL: f64 = 1e-10;

/// Hard cap on window sizes; dense factorization beyond this is out of scope.
pub const MAX_WINDOW: usize = 4096;

/// An ordered, duplicate-free list of basis indices of one space.
#[derive(Debug, Clone)]
pub struct Window {
    space: Space,
    indices: Vec<Index>,
    /// Whether every forward image of a window index stays inside the window.
    closed: bool,
}

impl Window {
    pub fn new(op: &OperatorSpec, indices: impl IntoIterator<Item = Index>) -> Result<Window, Error> {
        let space = op.space().clone();
        let mut set = BTreeSet::new();
        for index in indices {
            space.validate(&index)?;
            set.insert(index);
        }
        if set.is_empty() {
            return Err(Error::EmptyWindow);
        }
        if set.len() > MAX_WINDOW {
            return Err(Error::InvalidParameter(format!(
                "window of {} indices exceeds the cap of {MAX_WINDOW}",
                set.len()
            )));
        }
        let indices: Vec<Index> = set.iter().copied().collect();
        let closed = indices.iter().all(|index| {
            forward_image(op, index)
                .support_indices()
                .iter()
                .all(|i| set.contains(i))
        });
        Ok(Window {
            space,
            indices,
            closed,
        })
    }

    /// Window grown from the support of `x` by `depth` forward layers,
    /// capped at [`MAX_WINDOW`] indices.
    pub fn forward_closure(
        op: &OperatorSpec,
        x: &CoeffVector,
        depth: usize,
    ) -> Result<Window, Error> {
        op.check_vector(x)?;
        let mut set: BTreeSet<Index> = x.entries().map(|(i, _)| *i).collect();
        if set.is_empty() {
            return Err(Error::EmptyWindow);
        }
        let mut frontier: Vec<Index> = set.iter().copied().collect();
        'grow: for _ in 0..depth {
            let mut next = Vec::new();
            for index in &frontier {
                for image in forward_image(op, index).support_indices() {
                    if set.insert(image) {
                        if set.len() >= MAX_WINDOW {
                            break 'grow;
                        }
                        next.push(image);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Window::new(op, set)
    }

    pub fn indices(&self) -> &[Index] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn closed(&self) -> bool {
        self.closed
    }
}

fn forward_image(op: &OperatorSpec, index: &Index) -> CoeffVector {
    let basis =
        CoeffVector::basis(op.space().clone(), *index).expect("window indices are validated");
    op.apply(&basis).expect("basis vectors share the space")
}

trait SupportIndices {
    fn support_indices(&self) -> Vec<Index>;
}

impl SupportIndices for CoeffVector {
    fn support_indices(&self) -> Vec<Index> {
        self.entries().map(|(i, _)| *i).collect()
    }
}

/// Dense restriction of an operator to a window.
#[derive(Debug, Clone)]
pub struct Materialized {
    /// Column `j` is `T e_j` restricted to the window.
    pub matrix: DMatrix<Complex64>,
    /// Per-column squared mass of the image falling outside the window.
    pub lost_mass: Vec<f64>,
    /// Copied from the window.
    pub closed: bool,
}

/// Materializes `T` on the window, recording the mass each column loses.
pub fn materialize(op: &OperatorSpec, window: &Window) -> Result<Materialized, Error> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if &window.space != op.space() {
        return Err(Error::SpaceMismatch {
            expected: op.space().to_string(),
            found: window.space.to_string(),
        });
    }
    let n = window.len();
    let row_of = |index: &Index| window.indices.binary_search(index).ok();
    let mut matrix = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let mut lost_mass = vec![0.0; n];
    for (j, index) in window.indices.iter().enumerate() {
        let image = forward_image(op, index);
        for (target, coeff) in image.entries() {
            match row_of(target) {
                Some(row) => matrix[(row, j)] = *coeff,
                None => lost_mass[j] += coeff.norm_sqr(),
            }
        }
    }
    Ok(Materialized {
        matrix,
        lost_mass,
        closed: window.closed,
    })
}

/// Minimum-norm least-squares solution of `(I - T) y = x` over the window.
///
/// Rows cover the window plus the forward spill layer, so the reported
/// residual is the exact full-space residual of the returned `y`.
pub fn lsq_solve(
    op: &OperatorSpec,
    x: &CoeffVector,
    window: &Window,
) -> Result<(CoeffVector, f64), Error> {
    op.check_vector(x)?;
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let in_window = |index: &Index| window.indices.binary_search(index).is_ok();
    if let Some((outside, _)) = x.entries().find(|(i, _)| !in_window(i)) {
        return Err(Error::WindowMissingSupport(format!(
            "input touches {outside} outside the window"
        )));
    }

    // rows: window indices first, then the forward spill layer
    let mut spill: BTreeSet<Index> = BTreeSet::new();
    let images: Vec<CoeffVector> = window
        .indices
        .iter()
        .map(|index| forward_image(op, index))
        .collect();
    for image in &images {
        for (target, _) in image.entries() {
            if !in_window(target) {
                spill.insert(*target);
            }
        }
    }
    let cols = window.len();
    let rows = cols + spill.len();
    let spill: Vec<Index> = spill.into_iter().collect();
    let row_of = |index: &Index| -> usize {
        match window.indices.binary_search(index) {
            Ok(r) => r,
            Err(_) => cols + spill.binary_search(index).expect("spill rows cover all images"),
        }
    };

    let mut a = DMatrix::from_element(rows, cols, Complex64::new(0.0, 0.0));
    for (j, image) in images.iter().enumerate() {
        a[(j, j)] += Complex64::new(1.0, 0.0);
        for (target, coeff) in image.entries() {
            a[(row_of(target), j)] -= coeff;
        }
    }
    let mut b = DVector::from_element(rows, Complex64::new(0.0, 0.0));
    for (index, coeff) in x.entries() {
        b[row_of(index)] = *coeff;
    }

    let svd = a.clone().svd(true, true);
    let sv_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = if sv_max > 0.0 { RANK_RTOL * sv_max } else { RANK_RTOL };
    let solution = svd
        .solve(&b, cutoff)
        .map_err(|msg| Error::InvalidParameter(format!("svd solve failed: {msg}")))?;
    let residual = (&a * &solution - &b).norm();

    let y = CoeffVector::from_entries(
        op.space().clone(),
        window
            .indices
            .iter()
            .zip(solution.iter())
            .filter(|(_, c)| c.norm() >= ZERO_EPS)
            .map(|(i, c)| (*i, *c)),
    )?;
    Ok((y, residual))
}
