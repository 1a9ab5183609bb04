//! Algorithmic Wold decomposition for isometries.
//!
//! The projections are computed algebraically from forward and adjoint
//! application, never from an explicit wandering-subspace basis, so the same
//! code serves every operator family including dilations. For `x` in the
//! space of an isometry `T`, the level-`j` component is
//! `x_j = T^j (I - T T*) T*^j x` and the residual after level `J` is
//! `x - sum(x_j)`, whose norm equals that of `T*^(J+1) x`.

use crate::error::Error;
use crate::fit::line_fit;
use crate::operator::{adjoint_orbit, AdjointOrbit, LinearOperator};
use crate::vector::HilbertVec;

use num_complex::Complex64;

/// Shift components and unitary-part residual of a vector.
#[derive(Debug, Clone)]
pub struct WoldSplit<V> {
    /// Components `x_0 ..= x_J` along the wandering levels.
    pub components: Vec<V>,
    /// `x` minus the component sum; the unitary-part remainder `R_J`.
    pub residual: V,
    /// The level `J` the decomposition ran to.
    pub max_level: usize,
    /// Whether the adjoint orbit terminated before the cutoff. When unset,
    /// every downstream verdict degrades to inconclusive.
    pub exact: bool,
}

impl<V: HilbertVec> WoldSplit<V> {
    /// Indices of components that survived pruning.
    pub fn nonzero_levels(&self) -> Vec<usize> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, _)| j)
            .collect()
    }
}

fn require_isometric<L: LinearOperator>(op: &L) -> Result<(), Error> {
    let class = op.class();
    if class.is_isometric() {
        Ok(())
    } else {
        Err(Error::NotIsometric {
            class: class.to_string(),
        })
    }
}

/// Projection onto the wandering subspace: `v - T (T* v)`.
///
/// Only valid for isometries, where `T T*` is the orthogonal projection onto
/// the range of `T`.
pub fn wandering_project<L: LinearOperator>(op: &L, v: &L::Vector) -> Result<L::Vector, Error> {
    require_isometric(op)?;
    Ok(wandering_project_unchecked(op, v))
}

fn wandering_project_unchecked<L: LinearOperator>(op: &L, v: &L::Vector) -> L::Vector {
    let one = Complex64::new(1.0, 0.0);
    let minus = Complex64::new(-1.0, 0.0);
    let pulled = op.adjoint_map(v);
    let pushed = op.map(&pulled);
    L::Vector::lincomb(one, v, minus, &pushed)
}

/// Component of `x` along level `j`: `T^j (I - T T*) T*^j x`.
pub fn wold_component<L: LinearOperator>(
    op: &L,
    x: &L::Vector,
    j: usize,
) -> Result<L::Vector, Error> {
    require_isometric(op)?;
    let mut pulled = x.clone();
    for _ in 0..j {
        pulled = op.adjoint_map(&pulled);
    }
    let mut out = wandering_project_unchecked(op, &pulled);
    for _ in 0..j {
        if out.is_zero() {
            break;
        }
        out = op.map(&out);
    }
    Ok(out)
}

/// Wandering projections of the adjoint orbit, shared by the split and the
/// solver recursion. `w[j] = (I - T T*) T*^j x` lives in the wandering
/// subspace; the level component is `T^j w[j]`.
pub(crate) struct WanderingData<V> {
    pub w: Vec<V>,
    pub orbit: AdjointOrbit<V>,
    pub max_level: usize,
    pub exact: bool,
}

pub(crate) fn wandering_data<L: LinearOperator>(
    op: &L,
    x: &L::Vector,
    cutoff: usize,
) -> WanderingData<L::Vector> {
    if x.is_zero() {
        return WanderingData {
            w: vec![x.zero_like()],
            orbit: AdjointOrbit {
                terms: vec![x.clone()],
                exact: true,
            },
            max_level: 0,
            exact: true,
        };
    }
    let one = Complex64::new(1.0, 0.0);
    let minus = Complex64::new(-1.0, 0.0);
    let orbit = adjoint_orbit(op, x, cutoff + 1);
    let max_level = if orbit.exact {
        orbit.terms.len() - 2
    } else {
        cutoff
    };
    let mut w = Vec::with_capacity(max_level + 1);
    for j in 0..=max_level {
        let pushed = op.map(&orbit.terms[j + 1]);
        w.push(L::Vector::lincomb(one, &orbit.terms[j], minus, &pushed));
    }
    WanderingData {
        w,
        max_level,
        exact: orbit.exact,
        orbit,
    }
}

/// Full Wold decomposition of `x` under an isometry, running until the
/// adjoint orbit terminates or `cutoff` levels have been produced.
pub fn wold_split<L: LinearOperator>(
    op: &L,
    x: &L::Vector,
    cutoff: usize,
) -> Result<WoldSplit<L::Vector>, Error> {
    require_isometric(op)?;
    let one = Complex64::new(1.0, 0.0);
    let minus = Complex64::new(-1.0, 0.0);
    let data = wandering_data(op, x, cutoff);
    let mut components = Vec::with_capacity(data.max_level + 1);
    let mut sum = x.zero_like();
    for (j, w) in data.w.iter().enumerate() {
        let mut component = w.clone();
        for _ in 0..j {
            if component.is_zero() {
                break;
            }
            component = op.map(&component);
        }
        sum = L::Vector::lincomb(one, &sum, one, &component);
        components.push(component);
    }
    let residual = L::Vector::lincomb(one, x, minus, &sum);
    Ok(WoldSplit {
        components,
        residual,
        max_level: data.max_level,
        exact: data.exact,
    })
}

/// Decay-rate fit over the Wold components.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// Fitted rate in `norm(x_j) ~ 2^(-beta j)`.
    pub beta: f64,
    /// Root-mean-square residual of the log-linear fit.
    pub fit_rms: f64,
    /// Number of nonzero components entering the fit.
    pub points: usize,
}

/// Fits the component decay rate `beta` from an exact Wold split.
pub fn component_decay<L: LinearOperator>(
    op: &L,
    x: &L::Vector,
    cutoff: usize,
) -> Result<DecayFit, Error> {
    let split = wold_split(op, x, cutoff)?;
    if !split.exact {
        return Err(Error::InsufficientData(
            "wold split did not terminate within the cutoff".into(),
        ));
    }
    let points: Vec<(f64, f64)> = split
        .components
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| (j as f64, c.norm().log2()))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "decay fit needs at least 3 nonzero components, found {}",
            points.len()
        )));
    }
    let fit = line_fit(&points).ok_or_else(|| {
        Error::InsufficientData("component levels are degenerate for a line fit".into())
    })?;
    Ok(DecayFit {
        beta: -fit.slope,
        fit_rms: fit.rms,
        points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::OperatorSpec;
    use crate::vector::{CoeffVector, Index, Space};
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn shift1() -> OperatorSpec {
        OperatorSpec::unilateral_shift(1).unwrap()
    }

    fn doubling() -> OperatorSpec {
        OperatorSpec::doubling_koopman(2).unwrap()
    }

    fn e_shift(level: u64) -> CoeffVector {
        CoeffVector::basis(Space::Shift { multiplicity: 1 }, Index::shift(level, 0)).unwrap()
    }

    fn e_mode(mode: i64) -> CoeffVector {
        CoeffVector::basis(
            Space::fourier(2).unwrap(),
            Index::fourier_mode(mode, 2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn wandering_projection_keeps_level_zero() {
        let op = shift1();
        let x = CoeffVector::combine(c(1.0, 0.0), &e_shift(0), c(1.0, 0.0), &e_shift(1)).unwrap();
        let out = wandering_project(&op, &x).unwrap();
        assert_eq!(out, e_shift(0));
    }

    #[test]
    fn wandering_projection_on_doubling_modes() {
        let op = doubling();
        assert!(wandering_project(&op, &e_mode(6)).unwrap().is_zero());
        assert_eq!(wandering_project(&op, &e_mode(3)).unwrap(), e_mode(3));
    }

    #[test]
    fn wandering_projection_rejects_non_isometries() {
        let m = DMatrix::from_row_slice(1, 1, &[c(0.5, 0.0)]);
        let op = OperatorSpec::matrix_contraction(m).unwrap();
        let v = CoeffVector::basis(op.space().clone(), Index::dense(0)).unwrap();
        assert!(matches!(
            wandering_project(&op, &v),
            Err(Error::NotIsometric { .. })
        ));
    }

    #[test]
    fn components_select_valuation_levels() {
        let op = doubling();
        let x = CoeffVector::combine(c(1.0, 0.0), &e_mode(3), c(1.0, 0.0), &e_mode(6)).unwrap();
        assert_eq!(wold_component(&op, &x, 0).unwrap(), e_mode(3));
        assert_eq!(wold_component(&op, &x, 1).unwrap(), e_mode(6));
        assert!(wold_component(&shift1(), &e_shift(0), 5).unwrap().is_zero());
    }

    #[test]
    fn component_projection_is_idempotent() {
        let op = doubling();
        let x = CoeffVector::from_entries(
            op.space().clone(),
            [
                (Index::fourier_mode(3, 2).unwrap(), c(0.3, 0.7)),
                (Index::fourier_mode(6, 2).unwrap(), c(-1.0, 0.2)),
                (Index::fourier_mode(5, 2).unwrap(), c(0.1, 0.0)),
            ],
        )
        .unwrap();
        for j in 0..3 {
            let once = wold_component(&op, &x, j).unwrap();
            let twice = wold_component(&op, &once, j).unwrap();
            assert!(once.sub(&twice).unwrap().norm() <= 1e-10);
        }
    }

    #[test]
    fn split_of_two_mode_vector_is_exact() {
        let op = doubling();
        let x = CoeffVector::combine(c(1.0, 0.0), &e_mode(3), c(1.0, 0.0), &e_mode(6)).unwrap();
        let split = wold_split(&op, &x, 64).unwrap();
        assert!(split.exact);
        assert_eq!(split.max_level, 1);
        assert_eq!(split.components[0], e_mode(3));
        assert_eq!(split.components[1], e_mode(6));
        assert!(split.residual.is_zero());
    }

    #[test]
    fn diagonal_unitary_input_is_pure_residual() {
        let op = OperatorSpec::diagonal_unitary(vec![c(0.6, 0.8), c(0.0, 1.0)]).unwrap();
        let x = CoeffVector::from_entries(
            op.space().clone(),
            [(Index::dense(0), c(1.0, 0.0)), (Index::dense(1), c(0.0, 2.0))],
        )
        .unwrap();
        let split = wold_split(&op, &x, 16).unwrap();
        assert!(!split.exact);
        assert!(split.components.iter().all(|c| c.is_zero()));
        assert_eq!(split.residual, x);
    }

    #[test]
    fn split_of_deep_shift_basis() {
        let split = wold_split(&shift1(), &e_shift(2), 64).unwrap();
        assert!(split.exact);
        assert_eq!(split.components.len(), 3);
        assert!(split.components[0].is_zero());
        assert!(split.components[1].is_zero());
        assert_eq!(split.components[2], e_shift(2));
        assert!(split.residual.is_zero());
    }

    #[test]
    fn split_of_zero_vector() {
        let op = shift1();
        let split = wold_split(&op, &CoeffVector::zero(op.space().clone()), 8).unwrap();
        assert!(split.exact);
        assert!(split.residual.is_zero());
        assert!(split.components.iter().all(|c| c.is_zero()));
    }

    fn pseudo_random_vector(op: &OperatorSpec, salt: u64) -> CoeffVector {
        let entries: Vec<(Index, Complex64)> = match op.space() {
            Space::Shift { multiplicity } => (0..8u64)
                .map(|k| {
                    (
                        Index::shift(k % 5, ((k + salt) % u64::from(*multiplicity)) as u32),
                        c(
                            ((k * 31 + salt * 7 + 3) % 19) as f64 / 9.0 - 1.0,
                            ((k * 17 + salt * 5 + 1) % 23) as f64 / 11.0 - 1.0,
                        ),
                    )
                })
                .collect(),
            Space::Fourier { base } => [1i64, -3, 5, 2, 12, -20, 9]
                .iter()
                .enumerate()
                .map(|(k, m)| {
                    (
                        Index::fourier_mode(*m, *base).unwrap(),
                        c(
                            ((k as u64 * 29 + salt * 3 + 2) % 13) as f64 / 6.0 - 1.0,
                            ((k as u64 * 41 + salt * 11 + 5) % 17) as f64 / 8.0 - 1.0,
                        ),
                    )
                })
                .collect(),
            _ => panic!("unsupported space in test helper"),
        };
        CoeffVector::from_entries(op.space().clone(), entries).unwrap()
    }

    #[test]
    fn components_are_pairwise_orthogonal() {
        for (op, salt) in [(shift1(), 1u64), (doubling(), 2u64)] {
            let x = pseudo_random_vector(&op, salt);
            let split = wold_split(&op, &x, 64).unwrap();
            assert!(split.exact);
            let nonzero = split.nonzero_levels();
            for (a, &i) in nonzero.iter().enumerate() {
                for &j in &nonzero[a + 1..] {
                    let ip = split.components[i].inner(&split.components[j]).unwrap();
                    assert!(ip.norm() <= 1e-10);
                }
            }
            // reconstruction and Pythagoras
            let mut sum = CoeffVector::zero(op.space().clone());
            let mut energy = 0.0;
            for comp in &split.components {
                sum = CoeffVector::combine(c(1.0, 0.0), &sum, c(1.0, 0.0), comp).unwrap();
                energy += comp.norm_sqr();
            }
            sum = CoeffVector::combine(c(1.0, 0.0), &sum, c(1.0, 0.0), &split.residual).unwrap();
            assert!(sum.sub(&x).unwrap().norm() <= 1e-10);
            energy += split.residual.norm_sqr();
            assert!((energy - x.norm_sqr()).abs() <= 1e-9);
        }
    }

    #[test]
    fn unitary_part_is_detected_under_direct_sums() {
        let op = OperatorSpec::direct_sum(vec![
            shift1(),
            OperatorSpec::diagonal_unitary(vec![c(0.6, 0.8)]).unwrap(),
        ])
        .unwrap();
        let x_unitary = CoeffVector::basis(op.space().clone(), Index::dense(0))
            .unwrap()
            .scaled(c(0.5, -0.25));
        let x = CoeffVector::from_entries(
            op.space().clone(),
            [
                (Index::shift(0, 0), c(1.0, 0.0)),
                (Index::shift(3, 0), c(0.0, -1.0)),
                (Index::dense(0), c(0.5, -0.25)),
            ],
        )
        .unwrap();
        let cutoff = 24;
        let split = wold_split(&op, &x, cutoff).unwrap();
        assert!(!split.exact);
        assert!((split.residual.norm() - x_unitary.norm()).abs() <= 1e-9);
        // the residual norm equals the tail of the adjoint orbit
        let orbit = op.adjoint_orbit(&x, cutoff + 1).unwrap();
        assert!((split.residual.norm() - orbit.terms.last().unwrap().norm()).abs() <= 1e-10);
    }

    #[test]
    fn decay_fit_recovers_synthetic_rates() {
        let op = shift1();
        let x = CoeffVector::from_entries(
            op.space().clone(),
            (0..6u64).map(|j| (Index::shift(j, 0), c(0.5f64.powi(j as i32), 0.0))),
        )
        .unwrap();
        let fit = component_decay(&op, &x, 64).unwrap();
        assert!((fit.beta - 1.0).abs() <= 1e-9);
        assert!(fit.fit_rms <= 1e-9);
        assert_eq!(fit.points, 6);

        let flat = CoeffVector::from_entries(
            op.space().clone(),
            (0..5u64).map(|j| (Index::shift(j, 0), c(1.0, 0.0))),
        )
        .unwrap();
        let fit = component_decay(&op, &flat, 64).unwrap();
        assert!(fit.beta.abs() <= 1e-12);
    }

    #[test]
    fn decay_fit_needs_three_components() {
        let op = shift1();
        assert!(matches!(
            component_decay(&op, &e_shift(1), 64),
            Err(Error::InsufficientData(_))
        ));
    }
}
