//! Brute-force exact phase and permutation averages for small vectors.
//!
//! The oracle expands `τⁿ = 4ⁿ Σ_k C(n,k) (-1)^{n-k} (AB)^k |C|^{2(n-k)}`,
//! with `A = Σ|u_i|²`, `B = Σ|v_i|²`, `C = Σ u_i* v_i`, enumerates every index
//! tuple of every term, and keeps a term only when each component appears as
//! often conjugated as unconjugated (the only terms that survive independent
//! uniform phases). Surviving monomials are then averaged over uniformly
//! random permutations of the moduli with an explicit symmetric sum over
//! distinct index tuples. Nothing here goes through power sums.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::partitions::Partition;

/// Largest vector length the oracle accepts.
pub const MAX_DIM: usize = 16;
/// Largest tangle power the oracle accepts.
pub const MAX_POWER: u32 = 3;
/// Largest vector length for exact rational evaluation.
pub const MAX_EXACT_DIM: usize = 8;

/// A fixed modulus profile together with the tangle power and the qubit that
/// defines the single-qubit cut.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleProblem {
    moduli: Vec<f64>,
    power: u32,
    qubit: u32,
}

impl OracleProblem {
    /// For even non-power-of-two lengths only `qubit = 0` is meaningful: the
    /// cut then separates the first half of the indices from the second.
    pub fn new(moduli: Vec<f64>, power: u32, qubit: u32) -> Result<Self> {
        let n = moduli.len();
        if n > MAX_DIM {
            return Err(Error::Capacity(format!(
                "oracle supports N <= {MAX_DIM}, got {n}"
            )));
        }
        if power > MAX_POWER {
            return Err(Error::Capacity(format!(
                "oracle supports tangle powers <= {MAX_POWER}, got {power}"
            )));
        }
        if n < 2 || n % 2 != 0 {
            return Err(invalid!("oracle needs an even length >= 2, got {n}"));
        }
        if power == 0 {
            return Err(invalid!("tangle power must be at least 1"));
        }
        if n.is_power_of_two() {
            if qubit >= n.trailing_zeros() {
                return Err(invalid!("qubit {qubit} out of range for N = {n}"));
            }
        } else if qubit != 0 {
            return Err(invalid!(
                "N = {n} is not a power of two; only qubit 0 is defined"
            ));
        }
        if moduli.iter().any(|x| !(*x >= 0.0)) {
            return Err(invalid!("moduli must be nonnegative"));
        }
        let total: f64 = moduli.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid!("moduli must sum to 1, got {total}"));
        }
        Ok(Self {
            moduli,
            power,
            qubit,
        })
    }

    pub fn moduli(&self) -> &[f64] {
        &self.moduli
    }

    pub fn power(&self) -> u32 {
        self.power
    }
}

/// Positions `(u_c, v_c)` paired by the cut.
fn halves(n: usize, qubit: u32) -> (Vec<usize>, Vec<usize>) {
    if n.is_power_of_two() {
        let shift = n.trailing_zeros() - 1 - qubit;
        let (mut u, mut v) = (Vec::new(), Vec::new());
        for idx in 0..n {
            if (idx >> shift) & 1 == 0 {
                u.push(idx);
            } else {
                v.push(idx);
            }
        }
        (u, v)
    } else {
        ((0..n / 2).collect(), (n / 2..n).collect())
    }
}

/// Odometer over `[0, base)^len`.
fn for_each_tuple(base: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut t = vec![0usize; len];
    loop {
        f(&t);
        let mut pos = 0;
        loop {
            if pos == len {
                return;
            }
            t[pos] += 1;
            if t[pos] < base {
                break;
            }
            t[pos] = 0;
            pos += 1;
        }
    }
}

/// Integer multiplicity of each surviving exponent pattern in the phase
/// average of `τⁿ`, keyed by the pattern's partition type.
fn surviving_patterns(n_dim: usize, qubit: u32, power: u32) -> HashMap<Partition, i64> {
    let (u, v) = halves(n_dim, qubit);
    let m = u.len();
    let mut out: HashMap<Partition, i64> = HashMap::new();
    let four_n = 4i64.pow(power);
    for k in 0..=power {
        let t = (power - k) as usize;
        let binom = binomial(power, k);
        let sign = if (power - k) % 2 == 0 { 1 } else { -1 };
        let weight = four_n * binom * sign;
        let k = k as usize;
        let mut exps = vec![0u32; n_dim];
        let mut charge = vec![0i32; n_dim];
        // Tuple layout: p (k), q (k), i (t), j (t).
        for_each_tuple(m, 2 * k + 2 * t, |tuple| {
            let (p, rest) = tuple.split_at(k);
            let (q, rest) = rest.split_at(k);
            let (i, j) = rest.split_at(t);
            charge.iter_mut().for_each(|c| *c = 0);
            // C^t contributes u_i* v_i, (C*)^t contributes u_j v_j*.
            for &a in i {
                charge[u[a]] -= 1;
                charge[v[a]] += 1;
            }
            for &a in j {
                charge[u[a]] += 1;
                charge[v[a]] -= 1;
            }
            if charge.iter().any(|&c| c != 0) {
                return;
            }
            exps.iter_mut().for_each(|e| *e = 0);
            for &a in p {
                exps[u[a]] += 1;
            }
            for &a in q {
                exps[v[a]] += 1;
            }
            for &a in i {
                exps[u[a]] += 1;
                exps[v[a]] += 1;
            }
            let key = Partition::new(exps.iter().copied().filter(|&e| e > 0).collect::<Vec<_>>())
                .expect("positive exponents");
            *out.entry(key).or_insert(0) += weight;
        });
    }
    out.retain(|_, c| *c != 0);
    out
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k as i64).fold(1i64, |acc, i| acc * (n as i64 - i) / (i + 1))
}

/// Neumaier-compensated sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sum over ordered tuples of distinct indices of `∏_j x_{i_j}^{λ_j}`, by
/// dynamic programming over which parts have been assigned.
fn distinct_tuple_sum<T, F>(lambda: &Partition, moduli: &[T], pow: F, zero: T) -> T
where
    T: Clone + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
    F: Fn(&T, u32) -> T,
{
    let len = lambda.len();
    let full = (1usize << len) - 1;
    let mut dp = vec![zero.clone(); 1 << len];
    dp[0] = pow(&zero, 0);
    for x in moduli {
        let powers: Vec<T> = lambda.parts().iter().map(|&e| pow(x, e)).collect();
        // Descending masks so each element is used at most once.
        for mask in (0..=full).rev() {
            for (j, pj) in powers.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    let prev = mask ^ (1 << j);
                    let add = dp[prev].clone() * pj.clone();
                    dp[mask] = dp[mask].clone() + add;
                }
            }
        }
    }
    dp[full].clone()
}

fn falling(n: usize, r: usize) -> f64 {
    (0..r).map(|a| (n - a) as f64).product()
}

/// `c_λ`: average of `∏_j x_{i_j}^{λ_j}` over distinct index tuples, i.e. the
/// expectation of the monomial under a uniformly random permutation of the
/// moduli.
pub fn exact_exchangeable_correlator(lambda: &Partition, moduli: &[f64]) -> Result<f64> {
    let n = moduli.len();
    if lambda.len() > n {
        return Err(invalid!("partition {lambda} longer than {n} components"));
    }
    let s = distinct_tuple_sum(lambda, moduli, |x, e| x.powi(e as i32), 0.0);
    Ok(s / falling(n, lambda.len()))
}

/// Exact `⟨τⁿ⟩` over i.i.d. uniform phases and uniform permutations of the
/// moduli.
pub fn exact_phase_average_tangle_power(problem: &OracleProblem) -> Result<f64> {
    let patterns = surviving_patterns(problem.moduli.len(), problem.qubit, problem.power);
    let mut keys: Vec<&Partition> = patterns.keys().collect();
    keys.sort();
    let mut total = CompensatedSum::default();
    for key in keys {
        let c = exact_exchangeable_correlator(key, &problem.moduli)?;
        total.add(patterns[key] as f64 * c);
    }
    Ok(total.value())
}

/// Same average in exact rational arithmetic, for `N <= 8`.
pub fn exact_phase_average_tangle_power_rational(
    moduli: &[BigRational],
    power: u32,
) -> Result<BigRational> {
    let n = moduli.len();
    if n > MAX_EXACT_DIM {
        return Err(Error::Capacity(format!(
            "exact rational mode supports N <= {MAX_EXACT_DIM}, got {n}"
        )));
    }
    if power == 0 || power > MAX_POWER {
        return Err(Error::Capacity(format!(
            "tangle power {power} outside 1..={MAX_POWER}"
        )));
    }
    if n < 2 || n % 2 != 0 {
        return Err(invalid!("need an even length >= 2, got {n}"));
    }
    let total: BigRational = moduli.iter().cloned().sum();
    if !total.is_one() || moduli.iter().any(|x| x < &BigRational::zero()) {
        return Err(invalid!("moduli must be nonnegative and sum exactly to 1"));
    }
    let patterns = surviving_patterns(n, 0, power);
    let mut acc = BigRational::zero();
    for (key, count) in patterns {
        let s = distinct_tuple_sum(
            &key,
            moduli,
            |x, e| num_traits::pow(x.clone(), e as usize),
            BigRational::zero(),
        );
        let denom: BigInt = (0..key.len()).fold(BigInt::one(), |a, i| a * BigInt::from(n - i));
        acc +=
            s * BigRational::from_integer(BigInt::from(count)) / BigRational::from_integer(denom);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn uniform_tangle_powers() {
        let one = exact_phase_average_tangle_power(&OracleProblem::new(uniform(4), 1, 0).unwrap())
            .unwrap();
        assert!((one - 0.5).abs() < 1e-15);
        let two = exact_phase_average_tangle_power(&OracleProblem::new(uniform(4), 2, 1).unwrap())
            .unwrap();
        assert!((two - 0.375).abs() < 1e-15);
    }

    #[test]
    fn localized_profile_has_no_tangle() {
        let mut w = vec![0.0; 8];
        w[3] = 1.0;
        for n in 1..=3 {
            let v = exact_phase_average_tangle_power(&OracleProblem::new(w.clone(), n, 2).unwrap())
                .unwrap();
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn mean_tangle_matches_participation_formula() {
        let raw = [0.3, 0.05, 0.2, 0.1, 0.15, 0.05, 0.1, 0.05];
        let p2: f64 = raw.iter().map(|x| x * x).sum();
        let v = exact_phase_average_tangle_power(&OracleProblem::new(raw.to_vec(), 1, 0).unwrap())
            .unwrap();
        assert!((v - 6.0 / 7.0 * (1.0 - p2)).abs() < 1e-12);
    }

    #[test]
    fn correlators() {
        let u = uniform(4);
        assert!(
            (exact_exchangeable_correlator(&p(&[1, 1]), &u).unwrap() - 1.0 / 16.0).abs() < 1e-15
        );
        assert!(
            (exact_exchangeable_correlator(&p(&[2, 2]), &u).unwrap() - 1.0 / 256.0).abs() < 1e-15
        );
        let w = [0.4, 0.3, 0.2, 0.1];
        assert!((exact_exchangeable_correlator(&p(&[1]), &w).unwrap() - 0.25).abs() < 1e-15);
        // Direct enumeration of ordered distinct pairs.
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    s += w[a] * w[a] * w[b];
                }
            }
        }
        assert!((exact_exchangeable_correlator(&p(&[2, 1]), &w).unwrap() - s / 12.0).abs() < 1e-15);
        assert!(exact_exchangeable_correlator(&p(&[1, 1, 1, 1, 1]), &w).is_err());
    }

    #[test]
    fn rational_mode_agrees() {
        let w: Vec<BigRational> = [3, 1, 2, 2, 1, 5, 4, 2]
            .iter()
            .map(|&k| BigRational::new(BigInt::from(k), BigInt::from(20)))
            .collect();
        let wf: Vec<f64> = [3, 1, 2, 2, 1, 5, 4, 2]
            .iter()
            .map(|&k| k as f64 / 20.0)
            .collect();
        for n in 1..=3 {
            let exact = exact_phase_average_tangle_power_rational(&w, n).unwrap();
            let approx =
                exact_phase_average_tangle_power(&OracleProblem::new(wf.clone(), n, 0).unwrap())
                    .unwrap();
            let e = exact.numer().to_string().parse::<f64>().unwrap()
                / exact.denom().to_string().parse::<f64>().unwrap();
            assert!((e - approx).abs() < 1e-14 * e.abs().max(1e-300));
        }
        let uniform4: Vec<BigRational> = (0..4)
            .map(|_| BigRational::new(BigInt::from(1), BigInt::from(4)))
            .collect();
        assert_eq!(
            exact_phase_average_tangle_power_rational(&uniform4, 2).unwrap(),
            BigRational::new(BigInt::from(3), BigInt::from(8))
        );
    }

    #[test]
    fn caps_are_enforced() {
        assert!(matches!(
            OracleProblem::new(uniform(32), 1, 0),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            OracleProblem::new(uniform(8), 4, 0),
            Err(Error::Capacity(_))
        ));
        assert!(OracleProblem::new(uniform(6), 1, 0).is_ok());
        assert!(OracleProblem::new(uniform(6), 1, 1).is_err());
        assert!(OracleProblem::new(uniform(8), 1, 3).is_err());
        assert!(OracleProblem::new(vec![0.5, 0.5, 0.5, -0.5], 1, 0).is_err());
        let big: Vec<BigRational> = (0..16)
            .map(|_| BigRational::new(BigInt::from(1), BigInt::from(16)))
            .collect();
        assert!(exact_phase_average_tangle_power_rational(&big, 1).is_err());
    }
}
