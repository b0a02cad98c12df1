//! Integer partitions and the power-sum / monomial symmetric-function algebra
//! that turns phase-averaged correlators into wavefunction moments.
//!
//! Partitions are ordered reverse-lexicographically: `(4) < (3,1) < (2,2) <
//! (2,1,1) < (1,1,1,1)`. With rows and columns in that order the power-sum to
//! monomial transition matrix is lower triangular.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest tangle power for which coefficient tables are built by default.
pub const DEFAULT_MAX_TANGLE_POWER: u32 = 4;

/// A partition of a nonnegative integer: nonincreasing positive parts.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<u32>", try_from = "Vec<u32>")]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Builds a partition from parts in any order. Zero parts are rejected.
    pub fn new(parts: impl Into<Vec<u32>>) -> Result<Self> {
        let mut parts = parts.into();
        if parts.iter().any(|&p| p == 0) {
            return Err(invalid!("partition parts must be positive, got {parts:?}"));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { parts })
    }

    fn from_unsorted(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self { parts }
    }

    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn weight(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `(part value, multiplicity)` pairs, largest part first.
    pub fn multiplicities(&self) -> Vec<(u32, usize)> {
        let mut out: Vec<(u32, usize)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((v, m)) if *v == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// Multiset union, re-sorted nonincreasing.
    pub fn union(&self, other: &Partition) -> Partition {
        let mut parts = self.parts.clone();
        parts.extend_from_slice(&other.parts);
        Partition::from_unsorted(parts)
    }

    /// The same partition with all parts equal to one removed. Since
    /// `p_1 = 1` for normalized states, this is the key under which the
    /// product of power sums `p_λ` is stored.
    pub fn without_ones(&self) -> Partition {
        Partition {
            parts: self.parts.iter().copied().filter(|&p| p > 1).collect(),
        }
    }

    /// All partitions obtained by merging parts of `self` (including itself),
    /// in canonical order.
    pub fn coarsenings(&self) -> Vec<Partition> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.clone()];
        while let Some(p) = stack.pop() {
            if !seen.insert(p.clone()) {
                continue;
            }
            for i in 0..p.len() {
                for j in (i + 1)..p.len() {
                    let mut parts = p.parts.clone();
                    let merged = parts[i] + parts[j];
                    parts.remove(j);
                    parts[i] = merged;
                    stack.push(Partition::from_unsorted(parts));
                }
            }
        }
        seen.into_iter().collect()
    }
}

impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        other.parts.cmp(&self.parts)
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

impl TryFrom<Vec<u32>> for Partition {
    type Error = Error;

    fn try_from(parts: Vec<u32>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Accepts `"(2,1,1)"`, `"2,1,1"` or `"()"`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        if inner.trim().is_empty() {
            return Ok(Partition::empty());
        }
        let parts = inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| invalid!("bad partition part {t:?} in {s:?}"))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

/// All partitions of `n`, each exactly once, in reverse lexicographic order.
pub fn enumerate_partitions(n: u32) -> Vec<Partition> {
    fn rec(remaining: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition {
                parts: prefix.clone(),
            });
            return;
        }
        for first in (1..=remaining.min(max)).rev() {
            prefix.push(first);
            rec(remaining - first, first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Falling factorial `x (x-1) ... (x-r+1)` over the integers. Vanishes as
/// soon as `r > x >= 0`.
pub(crate) fn falling_factorial(x: i64, r: u32) -> BigInt {
    let mut acc = BigInt::one();
    for a in 0..r as i64 {
        let f = x - a;
        if f == 0 {
            return BigInt::zero();
        }
        acc *= f;
    }
    acc
}

/// Number of distinct monomials of the monomial symmetric polynomial `m_λ`
/// in `n_vars` variables: `N! / ((N-ℓ)! ∏_r mult_r!)`.
pub fn monomial_term_count(lambda: &Partition, n_vars: u64) -> Result<BigUint> {
    let len = lambda.len() as u64;
    if n_vars < len {
        return Err(invalid!(
            "monomial {lambda} needs at least {len} variables, got {n_vars}"
        ));
    }
    let numer = ((n_vars - len + 1)..=n_vars).fold(BigUint::one(), |acc, k| acc * k);
    let denom = lambda
        .multiplicities()
        .into_iter()
        .fold(BigUint::one(), |acc, (_, m)| acc * factorial(m as u64));
    Ok(numer / denom)
}

/// Exact integer coefficients keyed by partitions of a common weight.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CoefficientMap {
    weight: Option<u32>,
    entries: BTreeMap<Partition, BigInt>,
}

impl CoefficientMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `value` to the coefficient of `key`. Entries that cancel to zero
    /// are dropped.
    pub fn add(&mut self, key: Partition, value: BigInt) -> Result<()> {
        match self.weight {
            Some(w) if w != key.weight() => {
                return Err(invalid!(
                    "coefficient key {key} has weight {}, table weight is {w}",
                    key.weight()
                ))
            }
            _ => self.weight = Some(key.weight()),
        }
        if value.is_zero() {
            return Ok(());
        }
        let slot = self.entries.entry(key.clone()).or_insert_with(BigInt::zero);
        *slot += value;
        if slot.is_zero() {
            self.entries.remove(&key);
        }
        Ok(())
    }

    /// Coefficient of `key`, zero when absent.
    pub fn get(&self, key: &Partition) -> BigInt {
        self.entries.get(key).cloned().unwrap_or_default()
    }

    pub fn weight(&self) -> Option<u32> {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Nonzero entries in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&Partition, &BigInt)> {
        self.entries.iter()
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<CoefficientRecord> = self
            .entries
            .iter()
            .map(|(p, c)| CoefficientRecord {
                partition: p.clone(),
                coefficient: c.to_string(),
            })
            .collect();
        Ok(serde_json::to_string_pretty(&rows)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rows: Vec<CoefficientRecord> = serde_json::from_str(s)?;
        let mut map = CoefficientMap::new();
        for r in rows {
            let c: BigInt = r
                .coefficient
                .parse()
                .map_err(|_| invalid!("bad coefficient {:?}", r.coefficient))?;
            map.add(r.partition, c)?;
        }
        Ok(map)
    }
}

#[derive(Serialize, Deserialize)]
struct CoefficientRecord {
    partition: Partition,
    coefficient: String,
}

/// Coefficient of `m_μ` in `p_λ`: the number of ways to distribute the parts
/// of λ into the slots of μ so that every slot sums exactly to its part.
fn transition_coefficient(lambda: &Partition, mu: &Partition) -> BigUint {
    let mut states: HashMap<Vec<u32>, BigUint> = HashMap::new();
    states.insert(mu.parts.clone(), BigUint::one());
    for &part in &lambda.parts {
        let mut next: HashMap<Vec<u32>, BigUint> = HashMap::new();
        for (rem, count) in states {
            for j in 0..rem.len() {
                if rem[j] >= part {
                    let mut r = rem.clone();
                    r[j] -= part;
                    *next.entry(r).or_insert_with(BigUint::zero) += &count;
                }
            }
        }
        states = next;
    }
    states
        .into_iter()
        .filter(|(rem, _)| rem.iter().all(|&r| r == 0))
        .fold(BigUint::zero(), |acc, (_, c)| acc + c)
}

/// Row λ of the transition matrix `p_λ = Σ_μ L_{λμ} m_μ`.
pub fn power_sum_to_monomial(lambda: &Partition) -> CoefficientMap {
    let mut map = CoefficientMap::new();
    for mu in lambda.coarsenings() {
        let c = transition_coefficient(lambda, &mu);
        map.add(mu, BigInt::from(c))
            .expect("coarsenings share the weight of the source partition");
    }
    map
}

/// Read access to ensemble-averaged products of power sums `⟨p_λ⟩`.
///
/// Keys passed in have their unit parts stripped (`p_1 = 1`), so `⟨p_2²⟩` is
/// looked up under `(2,2)` and `⟨p_2⟩` under `(2)`. The empty key is 1.
pub trait PowerSumMoments {
    fn power_sum_mean(&self, key: &Partition) -> Option<f64>;
}

impl PowerSumMoments for BTreeMap<Partition, f64> {
    fn power_sum_mean(&self, key: &Partition) -> Option<f64> {
        if key.is_empty() {
            return Some(1.0);
        }
        self.get(key).copied()
    }
}

/// Moment table of a state (or an ensemble with a fixed modulus profile)
/// where every `⟨p_λ⟩` is the product of exact power sums of `weights`.
#[derive(Clone, Debug)]
pub struct FixedModuli<'a> {
    pub weights: &'a [f64],
}

impl PowerSumMoments for FixedModuli<'_> {
    fn power_sum_mean(&self, key: &Partition) -> Option<f64> {
        Some(
            key.parts()
                .iter()
                .map(|&q| self.weights.iter().map(|x| x.powi(q as i32)).sum::<f64>())
                .product(),
        )
    }
}

/// Index-independent correlator `c_λ` recovered from `⟨p_μ⟩` by inverting the
/// triangular power-sum/monomial relation and dividing by the number of
/// distinct monomials in `n_vars` variables.
pub fn correlator_from_moments(
    lambda: &Partition,
    moments: &impl PowerSumMoments,
    n_vars: u64,
) -> Result<f64> {
    let count = monomial_term_count(lambda, n_vars)?;
    // Coarsest first, so every dependency is solved before it is used.
    let order = lambda.coarsenings();
    let mut solved: BTreeMap<Partition, f64> = BTreeMap::new();
    for mu in &order {
        let key = mu.without_ones();
        let p = moments
            .power_sum_mean(&key)
            .ok_or_else(|| Error::MissingData(format!("moment <p_{key}> not available")))?;
        let row = power_sum_to_monomial(mu);
        let mut acc = p;
        let mut diag = None;
        for (nu, l) in row.iter() {
            let l = l.to_f64().expect("transition coefficients fit in f64");
            if nu == mu {
                diag = Some(l);
            } else {
                acc -= l * solved[nu];
            }
        }
        let diag = diag.expect("transition matrix has a nonzero diagonal");
        solved.insert(mu.clone(), acc / diag);
    }
    let m_lambda = solved[lambda];
    let count = count.to_f64().unwrap_or(f64::INFINITY);
    Ok(m_lambda / count)
}

/// Restricted growth strings of length `len`: every set partition of the
/// positions, returned as the block sizes.
fn set_partition_block_sizes(len: usize) -> Vec<Vec<u32>> {
    fn rec(pos: usize, len: usize, sizes: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == len {
            out.push(sizes.clone());
            return;
        }
        for b in 0..sizes.len() {
            sizes[b] += 1;
            rec(pos + 1, len, sizes, out);
            sizes[b] -= 1;
        }
        sizes.push(1);
        rec(pos + 1, len, sizes, out);
        sizes.pop();
    }
    let mut out = Vec::new();
    rec(0, len, &mut Vec::new(), &mut out);
    out
}

/// All ways to drop `extra` labelled items onto `base` existing blocks or onto
/// fresh blocks. Returns (block exponents, fresh block count) with the number
/// of equality patterns producing them.
fn extend_blocks(base: &[u32], extra: usize) -> HashMap<(Vec<u32>, u32), u64> {
    fn rec(
        left: usize,
        base_len: usize,
        blocks: &mut Vec<u32>,
        out: &mut HashMap<(Vec<u32>, u32), u64>,
    ) {
        if left == 0 {
            let mut exps = blocks.clone();
            exps.sort_unstable_by(|a, b| b.cmp(a));
            let fresh = (blocks.len() - base_len) as u32;
            *out.entry((exps, fresh)).or_insert(0) += 1;
            return;
        }
        for b in 0..blocks.len() {
            blocks[b] += 1;
            rec(left - 1, base_len, blocks, out);
            blocks[b] -= 1;
        }
        blocks.push(1);
        rec(left - 1, base_len, blocks, out);
        blocks.pop();
    }
    let mut out = HashMap::new();
    let mut blocks = base.to_vec();
    rec(extra, base.len(), &mut blocks, &mut out);
    out
}

/// Integer coefficients `T_λ(n, N)` with `⟨τⁿ⟩ = Σ_{λ ⊢ 2n} T_λ c_λ`, for
/// vectors of even length `n_dim` split in two halves of size `M = N/2`.
///
/// Built by expanding `τ = 4(AB - |C|²)` binomially and counting, for every
/// index-equality pattern that survives the phase average, how many index
/// tuples realise it. Index tuples of `|C|^{2t}` survive when the conjugated
/// indices are a permutation of the plain ones, giving a weight
/// `t! / ∏ block!` per pattern.
pub fn tangle_power_coefficients(n: u32, n_dim: u64) -> Result<CoefficientMap> {
    tangle_power_coefficients_with_cap(n, n_dim, DEFAULT_MAX_TANGLE_POWER)
}

pub fn tangle_power_coefficients_with_cap(
    n: u32,
    n_dim: u64,
    max_power: u32,
) -> Result<CoefficientMap> {
    if n == 0 {
        return Err(invalid!("tangle power must be at least 1"));
    }
    if n > max_power {
        return Err(Error::Capacity(format!(
            "tangle power {n} exceeds the configured cap {max_power}"
        )));
    }
    if n_dim < 4 || n_dim % 2 != 0 {
        return Err(invalid!("vector length must be even and >= 4, got {n_dim}"));
    }
    let half = (n_dim / 2) as i64;
    let mut map = CoefficientMap::new();
    let four_n = BigInt::from(4u32).pow(n);
    for k in 0..=n {
        let t = (n - k) as usize;
        let sign = if (n - k) % 2 == 0 { 1 } else { -1 };
        let binom = num_integer_binomial(n, k);
        let prefactor = &four_n * BigInt::from(sign) * binom;
        for sizes in set_partition_block_sizes(t) {
            let b = sizes.len() as i64;
            let weight = factorial(t as u64)
                / sizes
                    .iter()
                    .fold(BigUint::one(), |acc, &s| acc * factorial(s as u64));
            let weight = BigInt::from(weight);
            let u_side = extend_blocks(&sizes, k as usize);
            let v_side = extend_blocks(&sizes, k as usize);
            for ((u_exps, u_fresh), u_count) in &u_side {
                for ((v_exps, v_fresh), v_count) in &v_side {
                    let assignments = falling_factorial(half, (b + *u_fresh as i64) as u32)
                        * falling_factorial(half - b, *v_fresh);
                    if assignments.is_zero() {
                        continue;
                    }
                    let mut parts = u_exps.clone();
                    parts.extend_from_slice(v_exps);
                    let key = Partition::from_unsorted(parts);
                    let term = &prefactor
                        * &weight
                        * BigInt::from(*u_count)
                        * BigInt::from(*v_count)
                        * assignments;
                    map.add(key, term)?;
                }
            }
        }
    }
    Ok(map)
}

fn num_integer_binomial(n: u32, k: u32) -> BigInt {
    let num = factorial(n as u64);
    let den = factorial(k as u64) * factorial((n - k) as u64);
    BigInt::from(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    /// Brute force: all nonincreasing tuples over every length.
    fn brute_force_count(n: u32) -> usize {
        fn rec(rem: u32, max: u32) -> usize {
            if rem == 0 {
                return 1;
            }
            (1..=rem.min(max)).map(|f| rec(rem - f, f)).sum()
        }
        rec(n, n)
    }

    #[test]
    fn enumerate_small_cases() {
        assert_eq!(enumerate_partitions(0), vec![Partition::empty()]);
        let four = enumerate_partitions(4);
        assert_eq!(
            four,
            vec![
                p(&[4]),
                p(&[3, 1]),
                p(&[2, 2]),
                p(&[2, 1, 1]),
                p(&[1, 1, 1, 1])
            ]
        );
        assert_eq!(enumerate_partitions(8).len(), 22);
        for n in 0..=12 {
            let all = enumerate_partitions(n);
            assert_eq!(all.len(), brute_force_count(n));
            let mut sorted = all.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted, all, "canonical order for n={n}");
            assert!(all.iter().all(|q| q.weight() == n));
        }
    }

    #[test]
    fn parse_and_display() {
        let q: Partition = "(2,1,1)".parse().unwrap();
        assert_eq!(q, p(&[1, 2, 1]));
        assert_eq!(q.to_string(), "(2,1,1)");
        assert_eq!("()".parse::<Partition>().unwrap(), Partition::empty());
        assert!("2,0".parse::<Partition>().is_err());
        assert!(Partition::new(vec![0]).is_err());
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(
            monomial_term_count(&p(&[2]), 9).unwrap(),
            BigUint::from(9u32)
        );
        assert_eq!(
            monomial_term_count(&p(&[1, 1]), 4).unwrap(),
            BigUint::from(6u32)
        );
        assert_eq!(
            monomial_term_count(&p(&[2, 1, 1]), 4).unwrap(),
            BigUint::from(12u32)
        );
        assert!(matches!(
            monomial_term_count(&p(&[1, 1, 1]), 2),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn transition_rows() {
        let row = power_sum_to_monomial(&p(&[2]));
        assert_eq!(row.len(), 1);
        assert_eq!(row.get(&p(&[2])), big(1));

        let row = power_sum_to_monomial(&p(&[1, 1]));
        assert_eq!(row.get(&p(&[2])), big(1));
        assert_eq!(row.get(&p(&[1, 1])), big(2));
        assert_eq!(row.len(), 2);

        let row = power_sum_to_monomial(&p(&[2, 1]));
        assert_eq!(row.get(&p(&[3])), big(1));
        assert_eq!(row.get(&p(&[2, 1])), big(1));
        assert_eq!(row.len(), 2);
    }

    #[test]
    fn transition_matrix_is_lower_triangular() {
        for n in 1..=8 {
            let parts = enumerate_partitions(n);
            for (i, lambda) in parts.iter().enumerate() {
                let row = power_sum_to_monomial(lambda);
                for (j, mu) in parts.iter().enumerate() {
                    let c = row.get(mu);
                    if j > i {
                        assert!(c.is_zero(), "L[{lambda},{mu}] above diagonal");
                    }
                    if j == i {
                        assert!(!c.is_zero(), "zero diagonal at {lambda}");
                    }
                }
            }
        }
    }

    #[test]
    fn uniform_correlators() {
        let n = 4usize;
        let w = vec![1.0 / n as f64; n];
        let m = FixedModuli { weights: &w };
        let c11 = correlator_from_moments(&p(&[1, 1]), &m, 4).unwrap();
        assert!((c11 - 1.0 / 16.0).abs() < 1e-15);
        let c22 = correlator_from_moments(&p(&[2, 2]), &m, 4).unwrap();
        assert!((c22 - 1.0 / 256.0).abs() < 1e-15);
        let c1111 = correlator_from_moments(&p(&[1, 1, 1, 1]), &m, 4).unwrap();
        assert!((c1111 - 1.0 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn missing_moment_is_reported() {
        let mut m: BTreeMap<Partition, f64> = BTreeMap::new();
        m.insert(p(&[2]), 0.3);
        assert!(correlator_from_moments(&p(&[1, 1]), &m, 8).is_ok());
        assert!(matches!(
            correlator_from_moments(&p(&[2, 2]), &m, 8),
            Err(Error::MissingData(_))
        ));
    }

    #[test]
    fn tangle_coefficients_first_and_second_power() {
        let t1 = tangle_power_coefficients(1, 8).unwrap();
        assert_eq!(t1.len(), 1);
        assert_eq!(t1.get(&p(&[1, 1])), big(48));

        let t2 = tangle_power_coefficients(2, 8).unwrap();
        assert_eq!(t2.get(&p(&[1, 1, 1, 1])), big(1536));

        let t2 = tangle_power_coefficients(2, 4).unwrap();
        assert_eq!(t2.get(&p(&[2, 1, 1])), big(0));
    }

    #[test]
    fn tangle_coefficient_guards() {
        assert!(matches!(
            tangle_power_coefficients(5, 8),
            Err(Error::Capacity(_))
        ));
        assert!(tangle_power_coefficients_with_cap(5, 8, 5).is_ok());
        assert!(tangle_power_coefficients(1, 6).is_ok());
        assert!(tangle_power_coefficients(1, 5).is_err());
        assert!(tangle_power_coefficients(1, 2).is_err());
        assert!(tangle_power_coefficients(0, 8).is_err());
    }

    #[test]
    fn coefficient_map_json_roundtrip() {
        let t = tangle_power_coefficients(3, 16).unwrap();
        let json = t.to_json().unwrap();
        assert!(json.contains("\"coefficient\""));
        assert_eq!(CoefficientMap::from_json(&json).unwrap(), t);
    }

    #[test]
    fn coefficient_map_rejects_mixed_weights() {
        let mut m = CoefficientMap::new();
        m.add(p(&[2]), big(1)).unwrap();
        assert!(m.add(p(&[3]), big(1)).is_err());
    }
}
