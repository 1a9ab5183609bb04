//! Exact Fourier-space solver and condition checkers for
//! `f(t) = g(t) - g(b t)`.
//!
//! Under the composition operator `T g (t) = g(b t)`, modes decouple into
//! chains `m, m b, m b^2, ...` indexed by the seeds `m` not divisible by `b`.
//! On each chain the functional equation reads `g^(m b^k) = f^(m b^k) +
//! g^(m b^(k-1))`, so `g` is given by the partial chain sums and a
//! square-summable solution exists exactly when every full chain sum
//! vanishes. All verdicts on a finitely supported input certify the input
//! itself; truncations of infinite series certify only the truncation.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::Error;
use crate::fit::line_fit;
use crate::vector::{CoeffVector, Index, Space, ZERO_EPS};

/// Finitely supported Fourier coefficients of a zero-mean function, together
/// with the substitution base.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    coeffs: BTreeMap<i64, Complex64>,
    base: u32,
}

impl FourierSeries {
    /// Builds a series from `(mode, coefficient)` pairs; mode 0 is rejected,
    /// duplicates are summed and entries below [`ZERO_EPS`] pruned.
    pub fn new(
        base: u32,
        entries: impl IntoIterator<Item = (i64, Complex64)>,
    ) -> Result<FourierSeries, Error> {
        if base < 2 {
            return Err(Error::InvalidParameter(format!(
                "substitution base must be at least 2, got {base}"
            )));
        }
        let mut coeffs: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (mode, coeff) in entries {
            if mode == 0 {
                return Err(Error::InvalidIndex(
                    "mode 0 is excluded by the zero-mean convention".into(),
                ));
            }
            *coeffs.entry(mode).or_insert(Complex64::new(0.0, 0.0)) += coeff;
        }
        coeffs.retain(|_, c| c.norm() >= ZERO_EPS);
        Ok(FourierSeries { coeffs, base })
    }

    pub fn empty(base: u32) -> Result<FourierSeries, Error> {
        FourierSeries::new(base, [])
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&i64, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, mode: i64) -> Complex64 {
        self.coeffs
            .get(&mode)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Whether the series represents a real-valued function:
    /// `a_{-n} = conj(a_n)` within `eps`.
    pub fn is_hermitian(&self, eps: f64) -> bool {
        self.coeffs
            .iter()
            .all(|(mode, coeff)| (self.coeff(-mode).conj() - coeff).norm() <= eps)
    }

    /// The same coefficients as a vector over the Fourier index space.
    pub fn to_coeff_vector(&self) -> CoeffVector {
        CoeffVector::from_entries(
            Space::Fourier { base: self.base },
            self.coeffs
                .iter()
                .map(|(mode, coeff)| (Index::fourier_mode(*mode, self.base).expect("nonzero mode"), *coeff)),
        )
        .expect("factored modes are valid")
    }

    /// Converts back from a Fourier-space vector; fails when a relocated mode
    /// no longer fits a signed 64-bit integer.
    pub fn from_coeff_vector(v: &CoeffVector) -> Result<FourierSeries, Error> {
        let base = match v.space() {
            Space::Fourier { base } => *base,
            other => {
                return Err(Error::SpaceMismatch {
                    expected: "fourier".into(),
                    found: other.to_string(),
                })
            }
        };
        let mut entries = Vec::with_capacity(v.support_len());
        for (index, coeff) in v.entries() {
            let mode = index
                .mode_i128(base)
                .ok_or(Error::ModeOverflow)
                .and_then(|m| i64::try_from(m).map_err(|_| Error::ModeOverflow))?;
            entries.push((mode, *coeff));
        }
        FourierSeries::new(base, entries)
    }
}

/// Largest `k` with `base^k` dividing `n`; the 2-valuation when `base = 2`.
pub fn valuation(n: i64, base: u32) -> Result<u32, Error> {
    if n == 0 {
        return Err(Error::ZeroMode);
    }
    if base < 2 {
        return Err(Error::InvalidParameter(format!(
            "valuation base must be at least 2, got {base}"
        )));
    }
    let b = i64::from(base);
    let mut m = n;
    let mut k = 0u32;
    while m % b == 0 {
        m /= b;
        k += 1;
    }
    Ok(k)
}

/// A chain whose full coefficient sum does not vanish, blocking solvability.
#[derive(Debug, Clone)]
pub struct Obstruction {
    /// Chain seed `m` (not divisible by the base).
    pub seed: i64,
    /// Terminal chain sum `sum_i f^(m b^i)`.
    pub chain_sum: Complex64,
}

/// Outcome of the chain recursion.
#[derive(Debug, Clone)]
pub struct ChainVerdict {
    pub solvable: bool,
    /// The solution `g` with `g(t) - g(b t) = f(t)`, present when solvable.
    pub g: Option<FourierSeries>,
    pub obstructions: Vec<Obstruction>,
    /// Max coefficient deviation of `g - T g` from `f`; zero up to roundoff.
    pub substitution_residual: f64,
}

/// Solves `f(t) = g(t) - g(b t)` chain by chain.
///
/// Each chain contributes the partial sums of its coefficients to `g`; a
/// chain whose full sum exceeds [`ZERO_EPS`] in magnitude is recorded as an
/// obstruction because its `g` coefficients would be eventually constant and
/// not square-summable.
pub fn chain_solve(f: &FourierSeries) -> Result<ChainVerdict, Error> {
    let base = f.base();
    let b = i64::from(base);
    // chains: seed -> exponent -> coefficient
    let mut chains: BTreeMap<i64, BTreeMap<u64, Complex64>> = BTreeMap::new();
    for (mode, coeff) in f.coeffs() {
        let (seed, exp) = match Index::fourier_mode(*mode, base)? {
            Index::Fourier { seed, exp } => (seed, exp),
            _ => unreachable!("fourier_mode returns fourier indices"),
        };
        chains.entry(seed).or_default().insert(exp, *coeff);
    }

    let mut obstructions = Vec::new();
    let mut g_entries: Vec<(i64, Complex64)> = Vec::new();
    for (seed, chain) in &chains {
        let full_sum: Complex64 = chain.values().sum();
        if full_sum.norm() > ZERO_EPS {
            obstructions.push(Obstruction {
                seed: *seed,
                chain_sum: full_sum,
            });
            continue;
        }
        let max_exp = *chain.keys().last().expect("chains are nonempty");
        let mut partial = Complex64::new(0.0, 0.0);
        for exp in 0..=max_exp {
            if let Some(coeff) = chain.get(&exp) {
                partial += coeff;
            }
            if partial.norm() >= ZERO_EPS {
                let mode = seed
                    .checked_mul(b.checked_pow(exp as u32).ok_or(Error::ModeOverflow)?)
                    .ok_or(Error::ModeOverflow)?;
                g_entries.push((mode, partial));
            }
        }
        // beyond max_exp the partial sums equal the vanishing full sum
    }

    if !obstructions.is_empty() {
        return Ok(ChainVerdict {
            solvable: false,
            g: None,
            obstructions,
            substitution_residual: 0.0,
        });
    }

    let g = FourierSeries::new(base, g_entries)?;
    // substitution check: (g - T g)^(n) = g^(n) - g^(n / b)
    let mut residual = 0.0f64;
    let mut support: Vec<i64> = f.coeffs().map(|(m, _)| *m).collect();
    support.extend(g.coeffs().map(|(m, _)| *m));
    support.extend(
        g.coeffs()
            .filter_map(|(m, _)| m.checked_mul(b)),
    );
    support.sort_unstable();
    support.dedup();
    for mode in support {
        let pulled = if mode % b == 0 { g.coeff(mode / b) } else { Complex64::new(0.0, 0.0) };
        let diff = (g.coeff(mode) - pulled) - f.coeff(mode);
        residual = residual.max(diff.norm());
    }

    Ok(ChainVerdict {
        solvable: true,
        g: Some(g),
        obstructions,
        substitution_residual: residual,
    })
}

/// `sum_n val(n)^(4 + epsilon) |f^(n)|^2` over the support.
pub fn valuation_condition(f: &FourierSeries, epsilon: f64) -> Result<f64, Error> {
    if epsilon <= 0.0 {
        return Err(Error::InvalidParameter(
            "valuation condition needs epsilon > 0".into(),
        ));
    }
    let mut sum = 0.0;
    for (mode, coeff) in f.coeffs() {
        let v = f64::from(valuation(*mode, f.base())?);
        sum += v.powf(4.0 + epsilon) * coeff.norm_sqr();
    }
    Ok(sum)
}

/// Energy per 2-valuation level with a fitted dyadic decay rate.
#[derive(Debug, Clone)]
pub struct BlockEnergyProfile {
    /// `(level i, sum over odd k of |f^((2k+1) 2^i)|^2)`.
    pub levels: Vec<(u32, f64)>,
    /// Fitted `alpha` in `energy_i ~ 2^(-alpha i)`, with the fit residual;
    /// absent when fewer than two levels carry energy.
    pub alpha: Option<(f64, f64)>,
}

/// Per-valuation-level energies `E_i` and the decay fit; dyadic base only.
pub fn block_energy_profile(f: &FourierSeries, i_max: u32) -> Result<BlockEnergyProfile, Error> {
    if f.base() != 2 {
        return Err(Error::InvalidParameter(
            "block energies are defined for base 2".into(),
        ));
    }
    let mut energies: BTreeMap<u32, f64> = BTreeMap::new();
    for (mode, coeff) in f.coeffs() {
        let v = valuation(*mode, 2)?;
        if v <= i_max {
            *energies.entry(v).or_insert(0.0) += coeff.norm_sqr();
        }
    }
    let levels: Vec<(u32, f64)> = (0..=i_max)
        .map(|i| (i, energies.get(&i).copied().unwrap_or(0.0)))
        .collect();
    let points: Vec<(f64, f64)> = levels
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(i, e)| (f64::from(*i), e.log2()))
        .collect();
    let alpha = if points.len() >= 2 {
        line_fit(&points).map(|fit| (-fit.slope, fit.rms))
    } else {
        None
    };
    Ok(BlockEnergyProfile { levels, alpha })
}

/// `(1/n) * integral of |sum_{i=0}^n f(b^i t)|^2`, evaluated exactly through
/// Parseval in coefficient space.
///
/// Relocation sends each chain entry at exponent `e` to every exponent
/// `e..=e+n`, so the sum's coefficient at exponent `q` is a window sum of the
/// chain. The windows are piecewise constant in `q`, which keeps the cost
/// independent of `n`.
pub fn ergodic_integral(f: &FourierSeries, n: u64) -> Result<f64, Error> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "the ergodic integral needs n >= 1".into(),
        ));
    }
    let base = f.base();
    let mut chains: BTreeMap<i64, Vec<(u64, Complex64)>> = BTreeMap::new();
    for (mode, coeff) in f.coeffs() {
        let (seed, exp) = match Index::fourier_mode(*mode, base)? {
            Index::Fourier { seed, exp } => (seed, exp),
            _ => unreachable!(),
        };
        chains.entry(seed).or_default().push((exp, *coeff));
    }

    let mut total = 0.0f64;
    for entries in chains.values() {
        // breakpoints where the active window changes
        let mut cuts: Vec<u64> = Vec::with_capacity(entries.len() * 2);
        for (exp, _) in entries {
            cuts.push(*exp);
            cuts.push(exp + n + 1);
        }
        cuts.sort_unstable();
        cuts.dedup();
        for pair in cuts.windows(2) {
            let (start, end) = (pair[0], pair[1]);
            let active: Complex64 = entries
                .iter()
                .filter(|(exp, _)| *exp <= start && start < exp + n + 1)
                .map(|(_, c)| c)
                .sum();
            total += active.norm_sqr() * (end - start) as f64;
        }
    }
    Ok(total / n as f64)
}

/// Values `sum_n a_n e^(2 pi i n t)` at the uniform grid `t_j = j / m`.
///
/// The grid inverts the coefficients exactly when `m` exceeds twice the
/// largest mode magnitude.
pub fn synthesize_samples(f: &FourierSeries, m: usize) -> Result<Vec<Complex64>, Error> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let m_i128 = m as i128;
    for (j, value) in out.iter_mut().enumerate() {
        for (mode, coeff) in f.coeffs() {
            let phase_num = (i128::from(*mode) * j as i128).rem_euclid(m_i128) as f64;
            let angle = 2.0 * std::f64::consts::PI * phase_num / m as f64;
            *value += coeff * Complex64::new(angle.cos(), angle.sin());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::OperatorSpec;
    use crate::solver::{ergodic_limit, solve_isometry, Verdict};
    use crate::vector::Tolerances;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(12, 2).unwrap(), 2);
        assert_eq!(valuation(7, 2).unwrap(), 0);
        assert_eq!(valuation(-8, 2).unwrap(), 3);
        assert_eq!(valuation(18, 3).unwrap(), 2);
        assert!(matches!(valuation(0, 2), Err(Error::ZeroMode)));
    }

    #[test]
    fn mode_zero_is_rejected() {
        assert!(FourierSeries::new(2, [(0, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn chain_solve_telescoping_pair() {
        let f = FourierSeries::new(2, [(1, c(1.0, 0.0)), (2, c(-1.0, 0.0))]).unwrap();
        let verdict = chain_solve(&f).unwrap();
        assert!(verdict.solvable);
        let g = verdict.g.unwrap();
        assert_eq!(g.support_len(), 1);
        assert_eq!(g.coeff(1), c(1.0, 0.0));
        assert_eq!(verdict.substitution_residual, 0.0);
    }

    #[test]
    fn chain_solve_detects_obstruction() {
        let f = FourierSeries::new(2, [(2, c(1.0, 0.0))]).unwrap();
        let verdict = chain_solve(&f).unwrap();
        assert!(!verdict.solvable);
        assert!(verdict.g.is_none());
        assert_eq!(verdict.obstructions.len(), 1);
        assert_eq!(verdict.obstructions[0].seed, 1);
        assert_eq!(verdict.obstructions[0].chain_sum, c(1.0, 0.0));
    }

    #[test]
    fn chain_solve_of_empty_series() {
        let f = FourierSeries::empty(2).unwrap();
        let verdict = chain_solve(&f).unwrap();
        assert!(verdict.solvable);
        assert!(verdict.g.unwrap().is_zero());
    }

    #[test]
    fn chain_solve_handles_negative_seeds_symmetrically() {
        let f = FourierSeries::new(
            2,
            [
                (-3, c(0.5, 0.25)),
                (-6, c(-0.25, 0.0)),
                (-12, c(-0.25, -0.25)),
            ],
        )
        .unwrap();
        let verdict = chain_solve(&f).unwrap();
        assert!(verdict.solvable);
        let g = verdict.g.unwrap();
        assert_eq!(g.coeff(-3), c(0.5, 0.25));
        assert_eq!(g.coeff(-6), c(0.25, 0.25));
        assert!(g.coeff(-12).norm() < ZERO_EPS);
    }

    #[test]
    fn chain_solve_generalizes_to_other_bases() {
        let f = FourierSeries::new(3, [(2, c(1.0, 0.0)), (6, c(-1.0, 0.0))]).unwrap();
        let verdict = chain_solve(&f).unwrap();
        assert!(verdict.solvable);
        assert_eq!(verdict.g.unwrap().coeff(2), c(1.0, 0.0));
    }

    #[test]
    fn valuation_condition_examples() {
        let f = FourierSeries::new(2, [(1, c(1.0, 0.0))]).unwrap();
        assert_eq!(valuation_condition(&f, 1.0).unwrap(), 0.0);

        let f = FourierSeries::new(2, [(4, c(1.0, 0.0))]).unwrap();
        assert!((valuation_condition(&f, 1.0).unwrap() - 32.0).abs() < 1e-12);

        let f = FourierSeries::empty(2).unwrap();
        assert_eq!(valuation_condition(&f, 1.0).unwrap(), 0.0);
        assert!(valuation_condition(&f, 0.0).is_err());
    }

    #[test]
    fn block_energy_examples() {
        let f = FourierSeries::new(2, [(2, c(1.0, 0.0)), (3, c(1.0, 0.0))]).unwrap();
        let profile = block_energy_profile(&f, 3).unwrap();
        assert_eq!(profile.levels[0], (0, 1.0));
        assert_eq!(profile.levels[1], (1, 1.0));
        assert_eq!(profile.levels[2], (2, 0.0));

        let single = FourierSeries::new(2, [(1, c(1.0, 0.0))]).unwrap();
        let profile = block_energy_profile(&single, 2).unwrap();
        assert_eq!(profile.levels[0], (0, 1.0));
        assert!(profile.alpha.is_none());

        // energies 1, 1/2, 1/4 across levels 0..2
        let geometric = FourierSeries::new(
            2,
            [
                (1, c(1.0, 0.0)),
                (2, c(std::f64::consts::FRAC_1_SQRT_2, 0.0)),
                (4, c(0.5, 0.0)),
            ],
        )
        .unwrap();
        let profile = block_energy_profile(&geometric, 2).unwrap();
        let (alpha, rms) = profile.alpha.unwrap();
        assert!((alpha - 1.0).abs() <= 1e-9);
        assert!(rms <= 1e-9);

        let base3 = FourierSeries::new(3, [(1, c(1.0, 0.0))]).unwrap();
        assert!(block_energy_profile(&base3, 2).is_err());
    }

    #[test]
    fn ergodic_integral_examples() {
        let f = FourierSeries::new(2, [(1, c(1.0, 0.0)), (2, c(-1.0, 0.0))]).unwrap();
        assert!((ergodic_integral(&f, 100).unwrap() - 0.02).abs() < 1e-14);

        let f = FourierSeries::new(2, [(1, c(1.0, 0.0))]).unwrap();
        assert!((ergodic_integral(&f, 100).unwrap() - 1.01).abs() < 1e-14);

        let f = FourierSeries::empty(2).unwrap();
        assert_eq!(ergodic_integral(&f, 100).unwrap(), 0.0);
        assert!(ergodic_integral(&f, 0).is_err());
    }

    #[test]
    fn synthesize_examples() {
        let f = FourierSeries::new(2, [(1, c(1.0, 0.0))]).unwrap();
        let samples = synthesize_samples(&f, 4).unwrap();
        let expected = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (s, e) in samples.iter().zip(expected.iter()) {
            assert!((s - e).norm() <= 1e-15);
        }

        let f = FourierSeries::empty(2).unwrap();
        assert!(synthesize_samples(&f, 4)
            .unwrap()
            .iter()
            .all(|s| s.norm() == 0.0));

        let f = FourierSeries::new(2, [(1, c(1.0, 0.0)), (-1, c(1.0, 0.0))]).unwrap();
        let samples = synthesize_samples(&f, 4).unwrap();
        let expected = [c(2.0, 0.0), c(0.0, 0.0), c(-2.0, 0.0), c(0.0, 0.0)];
        for (s, e) in samples.iter().zip(expected.iter()) {
            assert!((s - e).norm() <= 1e-15);
        }
    }

    #[test]
    fn hermitian_flag_detects_real_series() {
        let real = FourierSeries::new(2, [(1, c(0.5, 0.25)), (-1, c(0.5, -0.25))]).unwrap();
        assert!(real.is_hermitian(1e-12));
        let not_real = FourierSeries::new(2, [(1, c(0.5, 0.25))]).unwrap();
        assert!(!not_real.is_hermitian(1e-12));
    }

    fn pseudo_random_series(salt: u64, solvable: bool) -> FourierSeries {
        // chains seeded at odd modes 1, -3, 5 with entries over exponents 0..3
        let mut entries: Vec<(i64, Complex64)> = Vec::new();
        for (ci, seed) in [1i64, -3, 5].iter().enumerate() {
            let mut chain_sum = Complex64::new(0.0, 0.0);
            for exp in 0..3u32 {
                let k = salt * 17 + ci as u64 * 7 + u64::from(exp);
                let coeff = c(
                    ((k * 37 + 11) % 19) as f64 / 9.0 - 1.0,
                    ((k * 53 + 3) % 17) as f64 / 8.0 - 1.0,
                );
                entries.push((seed * 2i64.pow(exp), coeff));
                chain_sum += coeff;
            }
            if solvable {
                // cancel the chain exactly one exponent higher
                entries.push((seed * 2i64.pow(3), -chain_sum));
            }
        }
        FourierSeries::new(2, entries).unwrap()
    }

    #[test]
    fn chain_verdicts_agree_with_the_operator_solver() {
        let op = OperatorSpec::doubling_koopman(2).unwrap();
        let tol = Tolerances::default();
        for salt in 0..8u64 {
            let f = pseudo_random_series(salt, salt % 2 == 0);
            let verdict = chain_solve(&f).unwrap();
            let result = solve_isometry(&op, &f.to_coeff_vector(), &tol, 128).unwrap();
            assert_eq!(
                verdict.solvable,
                result.verdict == Verdict::Solved,
                "salt {salt}"
            );
            if let (Some(g), Some(y)) = (&verdict.g, &result.solution) {
                let diff = g
                    .to_coeff_vector()
                    .sub(y)
                    .unwrap()
                    .norm();
                assert!(diff <= 1e-10, "solutions differ by {diff}");
                assert!(verdict.substitution_residual <= 1e-12);
            }
        }
    }

    #[test]
    fn proof_estimate_inequality_bounds_the_summability_sum() {
        // sum_k k norm(T*^k f) <= 2 sqrt(pi^2/6) sqrt(valuation_condition(f, 1))
        let op = OperatorSpec::doubling_koopman(2).unwrap();
        let zeta2 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        for salt in 0..12u64 {
            let f = pseudo_random_series(salt, salt % 3 == 0);
            let (lhs, exact) = crate::solver::summability(&op, &f.to_coeff_vector(), 512);
            assert!(exact);
            let rhs = 2.0 * zeta2.sqrt() * valuation_condition(&f, 1.0).unwrap().sqrt();
            assert!(lhs <= rhs + 1e-10, "salt {salt}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn fifth_moment_matches_level_energies() {
        let f = pseudo_random_series(4, false);
        let lhs: f64 = f
            .coeffs()
            .map(|(mode, coeff)| {
                f64::from(valuation(*mode, 2).unwrap()).powi(5) * coeff.norm_sqr()
            })
            .sum();
        let profile = block_energy_profile(&f, 32).unwrap();
        let rhs: f64 = profile
            .levels
            .iter()
            .map(|(i, e)| f64::from(*i).powi(5) * e)
            .sum();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn ergodic_integral_matches_time_domain_quadrature() {
        for salt in 0..4u64 {
            let f = pseudo_random_series(salt, salt % 2 == 0);
            for n in 1..=6u64 {
                // materialize sum_{i=0}^n f(b^i t) in coefficient space
                let mut relocated: Vec<(i64, Complex64)> = Vec::new();
                for i in 0..=n {
                    for (mode, coeff) in f.coeffs() {
                        relocated.push((mode * 2i64.pow(i as u32), *coeff));
                    }
                }
                let h = FourierSeries::new(2, relocated).unwrap();
                let max_mode = h.coeffs().map(|(m, _)| m.unsigned_abs()).max().unwrap_or(0);
                let m = (2 * max_mode + 1) as usize;
                let samples = synthesize_samples(&h, m).unwrap();
                let quadrature: f64 =
                    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / m as f64 / n as f64;
                let exact = ergodic_integral(&f, n).unwrap();
                assert!(
                    (exact - quadrature).abs() <= 1e-9,
                    "salt {salt}, n {n}: {exact} vs {quadrature}"
                );
            }
        }
    }

    #[test]
    fn ergodic_integral_approaches_the_operator_limit() {
        let op = OperatorSpec::doubling_koopman(2).unwrap();
        for salt in 0..4u64 {
            let f = pseudo_random_series(salt, salt % 2 == 1);
            let limit = ergodic_limit(&op, &f.to_coeff_vector(), 128).unwrap();
            let measured = ergodic_integral(&f, 10_000).unwrap();
            assert!(
                (measured - limit).abs() <= 1e-2,
                "salt {salt}: {measured} vs {limit}"
            );
        }
    }

    #[test]
    fn coeff_vector_round_trip() {
        let f = pseudo_random_series(7, true);
        let back = FourierSeries::from_coeff_vector(&f.to_coeff_vector()).unwrap();
        assert_eq!(f, back);
    }
}
