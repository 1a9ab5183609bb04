//! Sparse complex coefficient vectors over typed index sets.
//!
//! A [`CoeffVector`] is a finitely supported map from an [`Index`] to a complex
//! coefficient, tagged with the [`Space`] it lives in. All operator modules
//! work on these vectors; arithmetic prunes entries below [`ZERO_EPS`] so that
//! structured computations stay finitely supported and deterministic.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::Error;

/// Magnitude below which coefficients are dropped by vector arithmetic.
pub const ZERO_EPS: f64 = 1e-12;

/// Tolerance bundle shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Coefficients and terminal chain sums of magnitude below this are treated as zero.
    pub zero_eps: f64,
    /// Acceptance threshold on residuals and obstruction norms.
    pub residual_tol: f64,
    /// Threshold for the heuristic trend verdicts on asymptotic profiles.
    pub trend_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero_eps: ZERO_EPS,
            residual_tol: 1e-9,
            trend_tol: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), Error> {
        if self.zero_eps > 0.0 && self.residual_tol > 0.0 && self.trend_tol > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "tolerances must be strictly positive".into(),
            ))
        }
    }
}

/// Index family a vector lives in. Vectors and operators must agree on this.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Space {
    /// Orthonormal basis e_(level, slot) with slot < multiplicity.
    Shift { multiplicity: u32 },
    /// Nonzero Fourier modes, stored factored with respect to `base`.
    Fourier { base: u32 },
    /// Finite-dimensional coordinate space.
    Dense { dim: u32 },
    /// Orthogonal direct sum of parts with pairwise distinct index kinds.
    Sum(Vec<Space>),
}

impl Space {
    pub fn fourier(base: u32) -> Result<Space, Error> {
        if base < 2 {
            return Err(Error::InvalidParameter(format!(
                "fourier base must be at least 2, got {base}"
            )));
        }
        Ok(Space::Fourier { base })
    }

    /// Checks that `index` denotes a basis vector of this space.
    pub fn validate(&self, index: &Index) -> Result<(), Error> {
        match (self, index) {
            (Space::Shift { multiplicity }, Index::Shift { slot, .. }) => {
                if slot < multiplicity {
                    Ok(())
                } else {
                    Err(Error::InvalidIndex(format!(
                        "slot {slot} exceeds multiplicity {multiplicity}"
                    )))
                }
            }
            (Space::Fourier { base }, Index::Fourier { seed, .. }) => {
                if *seed == 0 {
                    Err(Error::InvalidIndex("fourier mode 0 is excluded".into()))
                } else if seed.rem_euclid(i64::from(*base)) == 0 {
                    Err(Error::InvalidIndex(format!(
                        "fourier seed {seed} is divisible by base {base}"
                    )))
                } else {
                    Ok(())
                }
            }
            (Space::Dense { dim }, Index::Dense { coord }) => {
                if coord < dim {
                    Ok(())
                } else {
                    Err(Error::InvalidIndex(format!(
                        "coordinate {coord} exceeds dimension {dim}"
                    )))
                }
            }
            (Space::Sum(parts), index) => parts
                .iter()
                .find(|p| p.accepts_kind(index))
                .ok_or_else(|| {
                    Err::<(), _>(Error::InvalidIndex(format!(
                        "no direct-sum part accepts index {index}"
                    )))
                    .unwrap_err()
                })
                .and_then(|p| p.validate(index)),
            _ => Err(Error::InvalidIndex(format!(
                "index {index} does not belong to space {self}"
            ))),
        }
    }

    fn accepts_kind(&self, index: &Index) -> bool {
        matches!(
            (self, index),
            (Space::Shift { .. }, Index::Shift { .. })
                | (Space::Fourier { .. }, Index::Fourier { .. })
                | (Space::Dense { .. }, Index::Dense { .. })
        )
    }

    /// Part of a direct sum an index belongs to; identity for flat spaces.
    pub(crate) fn part_of(&self, index: &Index) -> Option<usize> {
        match self {
            Space::Sum(parts) => parts.iter().position(|p| p.accepts_kind(index)),
            _ => None,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Shift { multiplicity } => write!(f, "shift(multiplicity={multiplicity})"),
            Space::Fourier { base } => write!(f, "fourier(base={base})"),
            Space::Dense { dim } => write!(f, "dense(dim={dim})"),
            Space::Sum(parts) => {
                write!(f, "sum(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Basis index of a coefficient vector.
///
/// Fourier modes are stored factored as `seed * base^exp` with the seed not
/// divisible by the base, so that repeated mode relocation never overflows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Index {
    Shift { level: u64, slot: u32 },
    Fourier { seed: i64, exp: u64 },
    Dense { coord: u32 },
}

impl Index {
    pub fn shift(level: u64, slot: u32) -> Index {
        Index::Shift { level, slot }
    }

    pub fn dense(coord: u32) -> Index {
        Index::Dense { coord }
    }

    /// Factors a raw nonzero mode into `(seed, exp)` form for `base`.
    pub fn fourier_mode(mode: i64, base: u32) -> Result<Index, Error> {
        if mode == 0 {
            return Err(Error::ZeroMode);
        }
        if base < 2 {
            return Err(Error::InvalidParameter(format!(
                "fourier base must be at least 2, got {base}"
            )));
        }
        let b = i64::from(base);
        let mut seed = mode;
        let mut exp = 0u64;
        while seed % b == 0 {
            seed /= b;
            exp += 1;
        }
        Ok(Index::Fourier { seed, exp })
    }

    /// The raw integer mode `seed * base^exp`, when it fits in an `i128`.
    pub fn mode_i128(&self, base: u32) -> Option<i128> {
        match self {
            Index::Fourier { seed, exp } => {
                let mut mode = i128::from(*seed);
                for _ in 0..*exp {
                    mode = mode.checked_mul(i128::from(base))?;
                }
                Some(mode)
            }
            _ => None,
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Shift { level, slot } => write!(f, "({level},{slot})"),
            Index::Fourier { seed, exp } => write!(f, "mode[{seed}*b^{exp}]"),
            Index::Dense { coord } => write!(f, "[{coord}]"),
        }
    }
}

/// Finitely supported vector with complex coefficients.
///
/// Stored entries never have magnitude below [`ZERO_EPS`]; the zero vector has
/// an empty entry map.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    space: Space,
    entries: BTreeMap<Index, Complex64>,
}

impl CoeffVector {
    pub fn zero(space: Space) -> CoeffVector {
        CoeffVector {
            space,
            entries: BTreeMap::new(),
        }
    }

    /// Unit basis vector at `index`.
    pub fn basis(space: Space, index: Index) -> Result<CoeffVector, Error> {
        CoeffVector::from_entries(space, [(index, Complex64::new(1.0, 0.0))])
    }

    /// Builds a vector from `(index, coefficient)` pairs, summing duplicates
    /// and pruning.
    pub fn from_entries(
        space: Space,
        entries: impl IntoIterator<Item = (Index, Complex64)>,
    ) -> Result<CoeffVector, Error> {
        let mut map: BTreeMap<Index, Complex64> = BTreeMap::new();
        for (index, coeff) in entries {
            space.validate(&index)?;
            *map.entry(index).or_insert(Complex64::new(0.0, 0.0)) += coeff;
        }
        map.retain(|_, c| c.norm() >= ZERO_EPS);
        Ok(CoeffVector { space, entries: map })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Index, &Complex64)> {
        self.entries.iter()
    }

    /// Coefficient at `index`, zero when absent.
    pub fn coeff(&self, index: &Index) -> Complex64 {
        self.entries
            .get(index)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_space(&self, other: &CoeffVector) -> Result<(), Error> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                expected: self.space.to_string(),
                found: other.space.to_string(),
            })
        }
    }

    /// Inner product, conjugate-linear in the second argument.
    pub fn inner(&self, other: &CoeffVector) -> Result<Complex64, Error> {
        self.check_space(other)?;
        let (small, large, conj_small) = if self.entries.len() <= other.entries.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (index, coeff) in &small.entries {
            if let Some(other_coeff) = large.entries.get(index) {
                if conj_small {
                    // small holds the second argument of the product
                    acc += other_coeff * coeff.conj();
                } else {
                    acc += coeff * other_coeff.conj();
                }
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> f64 {
        // the empty sum is -0.0, which would propagate through sqrt
        self.entries
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .max(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Entrywise `alpha * u + beta * v`, pruned at [`ZERO_EPS`].
    pub fn combine(
        alpha: Complex64,
        u: &CoeffVector,
        beta: Complex64,
        v: &CoeffVector,
    ) -> Result<CoeffVector, Error> {
        u.check_space(v)?;
        let mut out = BTreeMap::new();
        for (index, coeff) in &u.entries {
            let c = alpha * coeff;
            if c.norm() > 0.0 {
                out.insert(*index, c);
            }
        }
        for (index, coeff) in &v.entries {
            let c = beta * coeff;
            if c.norm() > 0.0 {
                *out.entry(*index).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
        out.retain(|_, c| c.norm() >= ZERO_EPS);
        Ok(CoeffVector {
            space: u.space.clone(),
            entries: out,
        })
    }

    pub fn scaled(&self, alpha: Complex64) -> CoeffVector {
        let mut entries: BTreeMap<Index, Complex64> = self
            .entries
            .iter()
            .map(|(i, c)| (*i, alpha * c))
            .collect();
        entries.retain(|_, c| c.norm() >= ZERO_EPS);
        CoeffVector {
            space: self.space.clone(),
            entries,
        }
    }

    /// Convenience for `u - v`.
    pub fn sub(&self, other: &CoeffVector) -> Result<CoeffVector, Error> {
        CoeffVector::combine(
            Complex64::new(1.0, 0.0),
            self,
            Complex64::new(-1.0, 0.0),
            other,
        )
    }

    /// Same entries under a different space tag, revalidating every index.
    pub(crate) fn retag(&self, space: Space) -> Result<CoeffVector, Error> {
        CoeffVector::from_entries(space, self.entries.iter().map(|(i, c)| (*i, *c)))
    }

    /// Restriction to the indices accepted by predicate `keep`.
    pub(crate) fn filtered(&self, keep: impl Fn(&Index) -> bool) -> CoeffVector {
        CoeffVector {
            space: self.space.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(i, _)| keep(i))
                .map(|(i, c)| (*i, *c))
                .collect(),
        }
    }

    /// Rebuilds the vector by relocating each index, summing collisions.
    ///
    /// `map` returns `None` to annihilate an entry.
    pub(crate) fn mapped(
        &self,
        map: impl Fn(&Index, Complex64) -> Option<(Index, Complex64)>,
    ) -> CoeffVector {
        let mut entries: BTreeMap<Index, Complex64> = BTreeMap::new();
        for (index, coeff) in &self.entries {
            if let Some((new_index, new_coeff)) = map(index, *coeff) {
                *entries.entry(new_index).or_insert(Complex64::new(0.0, 0.0)) += new_coeff;
            }
        }
        entries.retain(|_, c| c.norm() >= ZERO_EPS);
        CoeffVector {
            space: self.space.clone(),
            entries,
        }
    }
}

/// Minimal Hilbert-space element interface shared by coefficient vectors and
/// dilation sequence vectors.
///
/// Implementations may assume both operands live in the same space; the public
/// entry points validate this before any trait-level arithmetic runs.
pub trait HilbertVec: Clone {
    fn zero_like(&self) -> Self;
    fn lincomb(alpha: Complex64, u: &Self, beta: Complex64, v: &Self) -> Self;
    fn inner_product(&self, other: &Self) -> Complex64;
    fn norm(&self) -> f64;
    fn is_zero(&self) -> bool;
}

impl HilbertVec for CoeffVector {
    fn zero_like(&self) -> Self {
        CoeffVector::zero(self.space.clone())
    }

    fn lincomb(alpha: Complex64, u: &Self, beta: Complex64, v: &Self) -> Self {
        CoeffVector::combine(alpha, u, beta, v).expect("operands share one space")
    }

    fn inner_product(&self, other: &Self) -> Complex64 {
        self.inner(other).expect("operands share one space")
    }

    fn norm(&self) -> f64 {
        CoeffVector::norm(self)
    }

    fn is_zero(&self) -> bool {
        CoeffVector::is_zero(self)
    }
}
