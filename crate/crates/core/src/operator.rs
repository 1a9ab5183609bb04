//! Structured operator families with exact forward and adjoint application.
//!
//! Every operator acts on finitely supported [`CoeffVector`]s of a fixed
//! [`Space`]. Contractive norm bounds are verified at construction so that
//! downstream certificates never see an operator of norm above one.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::Error;
use crate::vector::{CoeffVector, HilbertVec, Index, Space, ZERO_EPS};

/// Default bound on adjoint-orbit length when no override is given.
pub const DEFAULT_ORBIT_CUTOFF: usize = 512;

/// Coarse classification of an operator's norm behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorClass {
    Unitary,
    Isometry,
    ProperContraction,
    NotContraction,
}

impl OperatorClass {
    pub fn is_isometric(self) -> bool {
        matches!(self, OperatorClass::Unitary | OperatorClass::Isometry)
    }

    pub fn is_contraction(self) -> bool {
        !matches!(self, OperatorClass::NotContraction)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OperatorClass::Unitary => "unitary",
            OperatorClass::Isometry => "isometry",
            OperatorClass::ProperContraction => "proper contraction",
            OperatorClass::NotContraction => "not a contraction",
        }
    }
}

impl std::fmt::Display for OperatorClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Forward/adjoint action on a Hilbert-space element type.
///
/// Implementations assume the argument lives in the operator's space; the
/// `OperatorSpec` entry points validate that up front.
pub trait LinearOperator {
    type Vector: HilbertVec;

    fn class(&self) -> OperatorClass;
    fn map(&self, v: &Self::Vector) -> Self::Vector;
    fn adjoint_map(&self, v: &Self::Vector) -> Self::Vector;
}

#[derive(Debug, Clone)]
pub(crate) enum OpKind {
    UnilateralShift,
    DiagonalUnitary {
        phases: Vec<Complex64>,
    },
    DoublingKoopman,
    MatrixContraction {
        matrix: DMatrix<Complex64>,
        sv_max: f64,
        sv_min: f64,
    },
    WeightedShift {
        weights: Vec<Complex64>,
    },
    DirectSum {
        parts: Vec<OperatorSpec>,
    },
}

/// A structured operator together with its verified construction invariants.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    kind: OpKind,
    space: Space,
}

impl OperatorSpec {
    /// Isometry moving `(level, slot)` to `(level + 1, slot)`.
    pub fn unilateral_shift(multiplicity: u32) -> Result<OperatorSpec, Error> {
        if multiplicity == 0 {
            return Err(Error::InvalidOperator("multiplicity must be positive".into()));
        }
        Ok(OperatorSpec {
            kind: OpKind::UnilateralShift,
            space: Space::Shift { multiplicity },
        })
    }

    /// Composition operator `f(t) -> f(b t)`, relocating mode `n` to `b n`.
    pub fn doubling_koopman(base: u32) -> Result<OperatorSpec, Error> {
        let space = Space::fourier(base)?;
        Ok(OperatorSpec {
            kind: OpKind::DoublingKoopman,
            space,
        })
    }

    /// Diagonal operator with unit-modulus phases on a dense space.
    pub fn diagonal_unitary(phases: Vec<Complex64>) -> Result<OperatorSpec, Error> {
        if phases.is_empty() {
            return Err(Error::InvalidOperator("phase list must be nonempty".into()));
        }
        for (slot, phase) in phases.iter().enumerate() {
            if (phase.norm() - 1.0).abs() > ZERO_EPS {
                return Err(Error::InvalidOperator(format!(
                    "phase at slot {slot} has modulus {}, expected 1",
                    phase.norm()
                )));
            }
        }
        let dim = phases.len() as u32;
        Ok(OperatorSpec {
            kind: OpKind::DiagonalUnitary { phases },
            space: Space::Dense { dim },
        })
    }

    /// Dense square matrix with operator norm at most one.
    pub fn matrix_contraction(matrix: DMatrix<Complex64>) -> Result<OperatorSpec, Error> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidOperator(format!(
                "matrix must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let svd = matrix.clone().svd(false, false);
        let sv_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let sv_min = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if sv_max > 1.0 + ZERO_EPS {
            return Err(Error::OperatorNormExceedsOne { norm: sv_max });
        }
        let dim = matrix.nrows() as u32;
        Ok(OperatorSpec {
            kind: OpKind::MatrixContraction {
                matrix,
                sv_max,
                sv_min,
            },
            space: Space::Dense { dim },
        })
    }

    /// Shift with per-level weights; levels beyond the list shift with weight one.
    pub fn weighted_shift(weights: Vec<Complex64>) -> Result<OperatorSpec, Error> {
        for (level, w) in weights.iter().enumerate() {
            if w.norm() > 1.0 + ZERO_EPS {
                return Err(Error::InvalidOperator(format!(
                    "weight at level {level} has modulus {}, expected at most 1",
                    w.norm()
                )));
            }
        }
        Ok(OperatorSpec {
            kind: OpKind::WeightedShift { weights },
            space: Space::Shift { multiplicity: 1 },
        })
    }

    /// Orthogonal direct sum. Parts must act on distinct index families so
    /// that indices dispatch unambiguously.
    pub fn direct_sum(parts: Vec<OperatorSpec>) -> Result<OperatorSpec, Error> {
        if parts.is_empty() {
            return Err(Error::InvalidOperator("direct sum needs at least one part".into()));
        }
        let mut kinds: Vec<&'static str> = Vec::new();
        for part in &parts {
            let kind = match part.space {
                Space::Shift { .. } => "shift",
                Space::Fourier { .. } => "fourier",
                Space::Dense { .. } => "dense",
                Space::Sum(_) => {
                    return Err(Error::InvalidOperator(
                        "direct sums cannot be nested".into(),
                    ))
                }
            };
            if kinds.contains(&kind) {
                return Err(Error::InvalidOperator(format!(
                    "direct sum parts must act on distinct index families; `{kind}` repeats"
                )));
            }
            kinds.push(kind);
        }
        let space = Space::Sum(parts.iter().map(|p| p.space.clone()).collect());
        Ok(OperatorSpec {
            kind: OpKind::DirectSum { parts },
            space,
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub(crate) fn kind(&self) -> &OpKind {
        &self.kind
    }

    pub fn class(&self) -> OperatorClass {
        match &self.kind {
            OpKind::UnilateralShift => OperatorClass::Isometry,
            OpKind::DiagonalUnitary { .. } => OperatorClass::Unitary,
            OpKind::DoublingKoopman => OperatorClass::Isometry,
            OpKind::MatrixContraction { sv_max, sv_min, .. } => {
                if *sv_max > 1.0 + ZERO_EPS {
                    OperatorClass::NotContraction
                } else if (*sv_max - 1.0).abs() <= ZERO_EPS && (*sv_min - 1.0).abs() <= ZERO_EPS {
                    // square with all singular values one
                    OperatorClass::Unitary
                } else {
                    OperatorClass::ProperContraction
                }
            }
            OpKind::WeightedShift { weights } => {
                if weights.iter().all(|w| (w.norm() - 1.0).abs() <= ZERO_EPS) {
                    OperatorClass::Isometry
                } else {
                    OperatorClass::ProperContraction
                }
            }
            OpKind::DirectSum { parts } => {
                let classes: Vec<OperatorClass> = parts.iter().map(|p| p.class()).collect();
                if classes.iter().any(|c| !c.is_contraction()) {
                    OperatorClass::NotContraction
                } else if classes.iter().all(|c| *c == OperatorClass::Unitary) {
                    OperatorClass::Unitary
                } else if classes.iter().all(|c| c.is_isometric()) {
                    OperatorClass::Isometry
                } else {
                    OperatorClass::ProperContraction
                }
            }
        }
    }

    pub fn check_vector(&self, v: &CoeffVector) -> Result<(), Error> {
        if v.space() == &self.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                expected: self.space.to_string(),
                found: v.space().to_string(),
            })
        }
    }

    /// Exact image `T v`.
    pub fn apply(&self, v: &CoeffVector) -> Result<CoeffVector, Error> {
        self.check_vector(v)?;
        Ok(self.apply_unchecked(v))
    }

    /// Exact image `T* v`.
    pub fn apply_adjoint(&self, v: &CoeffVector) -> Result<CoeffVector, Error> {
        self.check_vector(v)?;
        Ok(self.apply_adjoint_unchecked(v))
    }

    fn apply_unchecked(&self, v: &CoeffVector) -> CoeffVector {
        match &self.kind {
            OpKind::UnilateralShift => v.mapped(|index, coeff| match index {
                Index::Shift { level, slot } => Some((Index::shift(level + 1, *slot), coeff)),
                _ => None,
            }),
            OpKind::DiagonalUnitary { phases } => v.mapped(|index, coeff| match index {
                Index::Dense { coord } => Some((*index, phases[*coord as usize] * coeff)),
                _ => None,
            }),
            OpKind::DoublingKoopman => v.mapped(|index, coeff| match index {
                Index::Fourier { seed, exp } => Some((
                    Index::Fourier {
                        seed: *seed,
                        exp: exp + 1,
                    },
                    coeff,
                )),
                _ => None,
            }),
            OpKind::MatrixContraction { matrix, .. } => {
                let dim = matrix.nrows() as u32;
                let image = matrix * dense_to_dvector(v, dim);
                dvector_to_coeff(v.space().clone(), &image)
            }
            OpKind::WeightedShift { weights } => v.mapped(|index, coeff| match index {
                Index::Shift { level, slot } => {
                    let w = weight_at(weights, *level);
                    Some((Index::shift(level + 1, *slot), w * coeff))
                }
                _ => None,
            }),
            OpKind::DirectSum { parts } => {
                self.dispatch_parts(parts, v, |part, sub| part.apply_unchecked(sub))
            }
        }
    }

    fn apply_adjoint_unchecked(&self, v: &CoeffVector) -> CoeffVector {
        match &self.kind {
            OpKind::UnilateralShift => v.mapped(|index, coeff| match index {
                Index::Shift { level: 0, .. } => None,
                Index::Shift { level, slot } => Some((Index::shift(level - 1, *slot), coeff)),
                _ => None,
            }),
            OpKind::DiagonalUnitary { phases } => v.mapped(|index, coeff| match index {
                Index::Dense { coord } => Some((*index, phases[*coord as usize].conj() * coeff)),
                _ => None,
            }),
            OpKind::DoublingKoopman => v.mapped(|index, coeff| match index {
                Index::Fourier { exp: 0, .. } => None,
                Index::Fourier { seed, exp } => Some((
                    Index::Fourier {
                        seed: *seed,
                        exp: exp - 1,
                    },
                    coeff,
                )),
                _ => None,
            }),
            OpKind::MatrixContraction { matrix, .. } => {
                let dim = matrix.nrows() as u32;
                let image = matrix.adjoint() * dense_to_dvector(v, dim);
                dvector_to_coeff(v.space().clone(), &image)
            }
            OpKind::WeightedShift { weights } => v.mapped(|index, coeff| match index {
                Index::Shift { level: 0, .. } => None,
                Index::Shift { level, slot } => {
                    let w = weight_at(weights, level - 1);
                    Some((Index::shift(level - 1, *slot), w.conj() * coeff))
                }
                _ => None,
            }),
            OpKind::DirectSum { parts } => {
                self.dispatch_parts(parts, v, |part, sub| part.apply_adjoint_unchecked(sub))
            }
        }
    }

    fn dispatch_parts(
        &self,
        parts: &[OperatorSpec],
        v: &CoeffVector,
        act: impl Fn(&OperatorSpec, &CoeffVector) -> CoeffVector,
    ) -> CoeffVector {
        let mut collected: Vec<(Index, Complex64)> = Vec::new();
        for (part_idx, part) in parts.iter().enumerate() {
            let sub = v.filtered(|i| self.space.part_of(i) == Some(part_idx));
            if sub.is_zero() {
                continue;
            }
            let sub = sub
                .retag(part.space.clone())
                .expect("direct-sum entries belong to their part space");
            let image = act(part, &sub);
            collected.extend(image.entries().map(|(i, c)| (*i, *c)));
        }
        CoeffVector::from_entries(self.space.clone(), collected)
            .expect("part images stay inside the sum space")
    }

    /// `S_n(T) x = x + T x + ... + T^{n-1} x` (n terms).
    pub fn power_sum(&self, x: &CoeffVector, n: u64) -> Result<CoeffVector, Error> {
        self.check_vector(x)?;
        if n == 0 {
            return Err(Error::InvalidParameter("power sum needs n >= 1".into()));
        }
        Ok(power_sum(self, x, n))
    }

    /// Adjoint orbit `[x, T* x, T*^2 x, ...]` up to emptiness or `cutoff`
    /// applications.
    pub fn adjoint_orbit(&self, x: &CoeffVector, cutoff: usize) -> Result<AdjointOrbit<CoeffVector>, Error> {
        self.check_vector(x)?;
        Ok(adjoint_orbit(self, x, cutoff))
    }
}

impl LinearOperator for OperatorSpec {
    type Vector = CoeffVector;

    fn class(&self) -> OperatorClass {
        OperatorSpec::class(self)
    }

    fn map(&self, v: &CoeffVector) -> CoeffVector {
        self.apply_unchecked(v)
    }

    fn adjoint_map(&self, v: &CoeffVector) -> CoeffVector {
        self.apply_adjoint_unchecked(v)
    }
}

fn weight_at(weights: &[Complex64], level: u64) -> Complex64 {
    usize::try_from(level)
        .ok()
        .and_then(|l| weights.get(l).copied())
        .unwrap_or(Complex64::new(1.0, 0.0))
}

pub(crate) fn dense_to_dvector(v: &CoeffVector, dim: u32) -> DVector<Complex64> {
    let mut out = DVector::from_element(dim as usize, Complex64::new(0.0, 0.0));
    for (index, coeff) in v.entries() {
        if let Index::Dense { coord } = index {
            out[*coord as usize] = *coeff;
        }
    }
    out
}

pub(crate) fn dvector_to_coeff(space: Space, dv: &DVector<Complex64>) -> CoeffVector {
    CoeffVector::from_entries(
        space,
        dv.iter()
            .enumerate()
            .filter(|(_, c)| c.norm() >= ZERO_EPS)
            .map(|(coord, c)| (Index::dense(coord as u32), *c)),
    )
    .expect("coordinates stay within the dense dimension")
}

/// Result of iterating the adjoint at a vector.
#[derive(Debug, Clone)]
pub struct AdjointOrbit<V> {
    /// `[x, T* x, ...]`, trailing entry empty exactly when `exact` is set.
    pub terms: Vec<V>,
    /// Whether the orbit reached the zero vector rather than the cutoff.
    pub exact: bool,
}

impl<V: HilbertVec> AdjointOrbit<V> {
    /// Index of the last nonzero term, when any term is nonzero.
    pub fn last_nonzero(&self) -> Option<usize> {
        self.terms.iter().rposition(|t| !t.is_zero())
    }
}

/// Generic adjoint orbit; stops at the first zero vector or after `cutoff`
/// adjoint applications.
pub fn adjoint_orbit<L: LinearOperator>(
    op: &L,
    x: &L::Vector,
    cutoff: usize,
) -> AdjointOrbit<L::Vector> {
    let mut terms = vec![x.clone()];
    if x.is_zero() {
        return AdjointOrbit { terms, exact: true };
    }
    for _ in 0..cutoff {
        let next = op.adjoint_map(terms.last().expect("nonempty orbit"));
        let done = next.is_zero();
        terms.push(next);
        if done {
            return AdjointOrbit { terms, exact: true };
        }
    }
    AdjointOrbit {
        terms,
        exact: false,
    }
}

/// Generic `S_n(T) x` with n terms; callers validate `n >= 1`.
pub fn power_sum<L: LinearOperator>(op: &L, x: &L::Vector, n: u64) -> L::Vector {
    let one = Complex64::new(1.0, 0.0);
    let mut acc = x.clone();
    let mut cur = x.clone();
    for _ in 1..n {
        cur = op.map(&cur);
        acc = L::Vector::lincomb(one, &acc, one, &cur);
    }
    acc
}
