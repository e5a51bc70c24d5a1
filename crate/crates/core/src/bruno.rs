//! Faà di Bruno's formula with exact integer coefficients.
//!
//! The n-th derivative of `g(h(x))` is a sum over exponent vectors
//! `(i_1, ..., i_n)` with `sum k*i_k = n`:
//!
//! ```text
//! (g∘h)^(n) = sum  n! / prod_k (i_k! (k!)^(i_k))  *  g^(i)(h)  *  prod_k (h^(k))^(i_k)
//! ```
//!
//! where `i = sum i_k` is the block count. Vectors are enumerated in
//! ascending lexicographic order of `(i_1, ..., i_n)`, so for `n = 3` the
//! order is `(0,0,1)`, `(1,1,0)`, `(3,0,0)`.
//!
//! With `g = exp` and `h = ln f` every `g^(i)(h)` equals `f`, giving the
//! expansion of `f^(n)` in the log-derivatives of `f` ([`exp_of_log`]).
//! Multiplying through by `(-1)^n` and distributing the sign over the
//! factors gives [`signed_terms`], whose terms are all nonnegative as
//! soon as every `(-1)^k [ln f]^(k)` is.

use std::fmt::Write as _;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::N_MAX;
use crate::real::Real;

/// Exponent vector `(i_1..i_n)` with `sum k*i_k = n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MultisetPartition {
    exponents: Vec<u32>,
}

impl MultisetPartition {
    /// Validates `sum k*i_k = n` with `n = exponents.len() >= 1`.
    pub fn new(exponents: Vec<u32>) -> Result<MultisetPartition> {
        let n = exponents.len();
        let weight: usize = exponents
            .iter()
            .enumerate()
            .map(|(k, &i)| (k + 1) * i as usize)
            .sum();
        if n == 0 || weight != n {
            return Err(Error::InvalidParameter(format!(
                "{exponents:?} is not an exponent vector of weight {n}"
            )));
        }
        Ok(MultisetPartition { exponents })
    }

    pub fn n(&self) -> usize {
        self.exponents.len()
    }

    /// `i_1..i_n`, index `k-1` holds `i_k`.
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn block_count(&self) -> usize {
        self.exponents.iter().map(|&i| i as usize).sum()
    }

    /// `(order k, exponent i_k)` for the nonzero exponents.
    pub fn factors(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.exponents
            .iter()
            .enumerate()
            .filter(|(_, &i)| i > 0)
            .map(|(k, &i)| (k + 1, i))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BrunoTerm {
    pub partition: MultisetPartition,
    #[serde(serialize_with = "biguint_str")]
    pub coefficient: BigUint,
}

fn biguint_str<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// All exponent vectors of weight `n`, `1 <= n <= N_MAX`.
pub fn enumerate_partitions(n: usize) -> Result<Vec<MultisetPartition>> {
    enumerate_partitions_capped(n, N_MAX)
}

pub fn enumerate_partitions_capped(n: usize, cap: usize) -> Result<Vec<MultisetPartition>> {
    if n > cap {
        return Err(Error::OrderTooLarge { order: n, cap });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("partition order must be at least 1".into()));
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fill(&mut current, 0, n, &mut out);
    Ok(out)
}

// Chooses i_(k+1) given `remaining` weight; ascending choices at each
// position yield lexicographic order.
fn fill(current: &mut Vec<u32>, k: usize, remaining: usize, out: &mut Vec<MultisetPartition>) {
    let n = current.len();
    let part = k + 1;
    if part == n {
        if remaining.is_multiple_of(part) {
            current[k] = (remaining / part) as u32;
            out.push(MultisetPartition { exponents: current.clone() });
            current[k] = 0;
        }
        return;
    }
    for i in 0..=remaining / part {
        current[k] = i as u32;
        fill(current, k + 1, remaining - i * part, out);
    }
    current[k] = 0;
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// `n! / prod_k (i_k! (k!)^(i_k))`, always a positive integer.
pub fn bruno_coefficient(p: &MultisetPartition) -> BigUint {
    let mut den = BigUint::one();
    for (k, i) in p.factors() {
        den *= factorial(i as usize) * num_traits::pow(factorial(k), i as usize);
    }
    factorial(p.n()) / den
}

static TERMS: [OnceLock<Vec<BrunoTerm>>; N_MAX + 1] = [const { OnceLock::new() }; N_MAX + 1];

/// Partitions of `n` with their coefficients, computed once per `n`.
pub fn bruno_terms(n: usize) -> Result<&'static [BrunoTerm]> {
    if n == 0 || n > N_MAX {
        // reuse the enumeration's error reporting
        enumerate_partitions(n)?;
    }
    if let Some(t) = TERMS[n].get() {
        return Ok(t);
    }
    let terms: Vec<BrunoTerm> = enumerate_partitions(n)?
        .into_iter()
        .map(|partition| {
            let coefficient = bruno_coefficient(&partition);
            BrunoTerm { partition, coefficient }
        })
        .collect();
    Ok(TERMS[n].get_or_init(|| terms))
}

fn coeff_real(c: &BigUint, prec: usize) -> Real {
    Real::from_bigint(&BigInt::from(c.clone()), prec)
}

/// `prod_k d[k]^(i_k)` over the partition's nonzero exponents.
fn factor_product(p: &MultisetPartition, d: &[Real], prec: usize) -> Real {
    p.factors()
        .fold(Real::one(prec), |acc, (k, i)| acc * d[k].powi(i as u64))
}

fn need(slice: &[Real], n: usize) -> Result<()> {
    if slice.len() < n + 1 {
        return Err(Error::InsufficientDerivatives { needed: n, got: slice.len().saturating_sub(1) });
    }
    Ok(())
}

/// `(g∘h)^(n)(x)` from `g_derivs[i] = g^(i)(h(x))` and
/// `h_derivs[k] = h^(k)(x)`; both slices are indexed by derivative order.
pub fn compose_nth(g_derivs: &[Real], h_derivs: &[Real], n: usize) -> Result<Real> {
    need(g_derivs, n)?;
    need(h_derivs, n)?;
    if n == 0 {
        return Ok(g_derivs[0].clone());
    }
    let prec = g_derivs[0].precision().max(h_derivs[0].precision());
    let mut total = Real::zero(prec);
    for t in bruno_terms(n)? {
        let term = coeff_real(&t.coefficient, prec)
            * &g_derivs[t.partition.block_count()]
            * factor_product(&t.partition, h_derivs, prec);
        total = total + term;
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct Expansion {
    pub total: Real,
    /// One term per partition, in enumeration order.
    pub terms: Vec<Real>,
}

fn expand(f_value: &Real, derivs: &[Real], n: usize) -> Result<Expansion> {
    if !f_value.is_positive() {
        return Err(Error::NonPositiveValue(f_value.to_f64()));
    }
    need(derivs, n)?;
    let prec = f_value.precision();
    if n == 0 {
        return Ok(Expansion { total: f_value.clone(), terms: vec![f_value.clone()] });
    }
    let terms: Vec<Real> = bruno_terms(n)?
        .iter()
        .map(|t| coeff_real(&t.coefficient, prec) * f_value * factor_product(&t.partition, derivs, prec))
        .collect();
    let total = terms.iter().fold(Real::zero(prec), |acc, t| acc + t);
    Ok(Expansion { total, terms })
}

/// `f^(n)(x)` from `f(x) > 0` and `log_derivs[k] = [ln f]^(k)(x)`
/// (index 0 is ignored), with the individual partition terms.
pub fn exp_of_log(f_value: &Real, log_derivs: &[Real], n: usize) -> Result<Expansion> {
    expand(f_value, log_derivs, n)
}

/// Terms of `(-1)^n f^(n)(x)` from `signed_log_derivs[k] = (-1)^k [ln f]^(k)(x)`.
pub fn signed_terms(f_value: &Real, signed_log_derivs: &[Real], n: usize) -> Result<Vec<Real>> {
    Ok(expand(f_value, signed_log_derivs, n)?.terms)
}

/// Human-readable term table for order `n`.
pub fn format_terms(n: usize) -> Result<String> {
    let terms = bruno_terms(n)?;
    let mut s = String::new();
    let _ = writeln!(s, "# (g∘h)^({n}): {} terms", terms.len());
    let _ = writeln!(s, "# exponents (i_1..i_{n})  coefficient  term");
    for t in terms {
        let exps: Vec<String> = t.partition.exponents().iter().map(|i| i.to_string()).collect();
        let mut term = format!("g^({})(h)", t.partition.block_count());
        for (k, i) in t.partition.factors() {
            if i == 1 {
                let _ = write!(term, " * h^({k})");
            } else {
                let _ = write!(term, " * [h^({k})]^{i}");
            }
        }
        let _ = writeln!(s, "({})  {}  {}", exps.join(","), t.coefficient, term);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::rel_diff;
    use proptest::prelude::*;

    const P: usize = 256;

    fn r(v: f64) -> Real {
        Real::from_f64(v, P)
    }

    /// Independent oracle: every vector with 0 <= i_k <= n/k, filtered by weight.
    fn brute_force_count(n: usize) -> usize {
        let bounds: Vec<usize> = (1..=n).map(|k| n / k).collect();
        let mut idx = vec![0usize; n];
        let mut count = 0;
        loop {
            let w: usize = idx.iter().enumerate().map(|(k, &i)| (k + 1) * i).sum();
            if w == n {
                count += 1;
            }
            let mut pos = 0;
            loop {
                if pos == n {
                    return count;
                }
                idx[pos] += 1;
                if idx[pos] <= bounds[pos] {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn brute_force_oracle_values() {
        assert_eq!(brute_force_count(4), 5);
        assert_eq!(brute_force_count(10), 42);
    }

    #[test]
    fn partition_counts() {
        assert_eq!(enumerate_partitions(1).unwrap(), vec![MultisetPartition { exponents: vec![1] }]);
        assert_eq!(enumerate_partitions(4).unwrap().len(), 5);
        assert_eq!(enumerate_partitions(10).unwrap().len(), 42);
        assert_eq!(enumerate_partitions_capped(20, 20).unwrap().len(), 627);
        for n in 1..=12 {
            assert_eq!(enumerate_partitions(n).unwrap().len(), brute_force_count(n), "n={n}");
        }
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let got: Vec<Vec<u32>> = enumerate_partitions(3)
            .unwrap()
            .into_iter()
            .map(|p| p.exponents().to_vec())
            .collect();
        assert_eq!(got, vec![vec![0, 0, 1], vec![1, 1, 0], vec![3, 0, 0]]);
        let ps = enumerate_partitions(9).unwrap();
        for w in ps.windows(2) {
            assert!(w[0].exponents() < w[1].exponents());
        }
    }

    #[test]
    fn order_cap() {
        assert_eq!(
            enumerate_partitions(17).unwrap_err(),
            Error::OrderTooLarge { order: 17, cap: 16 }
        );
    }

    #[test]
    fn coefficients() {
        let c = |v: Vec<u32>| bruno_coefficient(&MultisetPartition::new(v).unwrap());
        assert_eq!(c(vec![1, 1, 0]), BigUint::from(3u32));
        assert_eq!(c(vec![0, 1]), BigUint::from(1u32));
        assert_eq!(c(vec![4, 0, 0, 0]), BigUint::from(1u32));
        assert!(MultisetPartition::new(vec![1, 1]).is_err());
    }

    fn bell_numbers(upto: usize) -> Vec<BigUint> {
        // Bell triangle
        let mut bells = vec![BigUint::one()];
        let mut row = vec![BigUint::one()];
        for _ in 1..=upto {
            let mut next = vec![row.last().unwrap().clone()];
            for v in &row {
                let add = next.last().unwrap() + v;
                next.push(add);
            }
            bells.push(next[0].clone());
            row = next;
        }
        bells
    }

    #[test]
    fn coefficient_sums_are_bell_numbers() {
        let bells = bell_numbers(N_MAX);
        for n in 1..=N_MAX {
            let s: BigUint = bruno_terms(n).unwrap().iter().map(|t| t.coefficient.clone()).sum();
            assert_eq!(s, bells[n], "n={n}");
        }
    }

    #[test]
    fn chain_rule_orders() {
        // symbolic values: g^(i) = G_i, h^(k) = H_k with distinct primes
        let g = [r(0.0), r(2.0), r(3.0), r(5.0)];
        let h = [r(0.0), r(7.0), r(11.0), r(13.0)];
        let v1 = compose_nth(&g, &h, 1).unwrap();
        assert_eq!(v1.to_f64(), 2.0 * 7.0);
        // g''' h'^3 + 3 g'' h' h'' + g' h'''
        let v3 = compose_nth(&g, &h, 3).unwrap();
        assert_eq!(v3.to_f64(), 5.0 * 343.0 + 3.0 * 3.0 * 7.0 * 11.0 + 2.0 * 13.0);
        assert!(matches!(
            compose_nth(&g, &h[..2], 3),
            Err(Error::InsufficientDerivatives { .. })
        ));
    }

    #[test]
    fn exp_of_mercator_log() {
        // g = exp, h = ln(1+x) at x = 0: g^(i)(h(0)) = 1, h^(k)(0) = (-1)^(k-1) (k-1)!
        let mut h = vec![r(0.0)];
        let mut fact = 1.0;
        for k in 1..=8 {
            if k > 1 {
                fact *= (k - 1) as f64;
            }
            h.push(r(if k % 2 == 1 { fact } else { -fact }));
        }
        let g = vec![r(1.0); 9];
        for n in 1..=8 {
            let v = compose_nth(&g, &h, n).unwrap().to_f64();
            assert_eq!(v, if n == 1 { 1.0 } else { 0.0 }, "n={n}");
        }
    }

    #[test]
    fn exponential_self_derivative() {
        let mut logd = vec![r(0.0); 9];
        logd[1] = r(1.0);
        for n in 0..=8 {
            assert_eq!(exp_of_log(&r(1.0), &logd, n).unwrap().total.to_f64(), 1.0);
        }
        logd[1] = r(-1.0);
        for n in 0..=8 {
            let want = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(exp_of_log(&r(1.0), &logd, n).unwrap().total.to_f64(), want);
        }
        // signed form of e^{-x}: one surviving term equal to 1
        logd[1] = r(1.0);
        for n in 1..=8 {
            let t = signed_terms(&r(1.0), &logd, n).unwrap();
            assert!(t.iter().all(|v| !v.is_negative()));
            let s = t.iter().fold(r(0.0), |a, b| a + b);
            assert_eq!(s.to_f64(), 1.0);
        }
    }

    #[test]
    fn nonpositive_value_rejected() {
        let d = vec![r(0.0); 3];
        assert_eq!(exp_of_log(&r(0.0), &d, 2).unwrap_err(), Error::NonPositiveValue(0.0));
        assert!(signed_terms(&r(-1.0), &d, 2).is_err());
    }

    #[test]
    fn format_table() {
        let s = format_terms(3).unwrap();
        assert!(s.contains("(1,1,0)  3  g^(2)(h) * h^(1) * h^(2)"));
        assert!(s.contains("(3,0,0)  1  g^(3)(h) * [h^(1)]^3"));
    }

    proptest! {
        #[test]
        fn signed_terms_nonnegative(
            f in 0.01f64..100.0,
            logs in proptest::collection::vec(0.0f64..10.0, 9),
            n in 1usize..=8,
        ) {
            let mut d = vec![r(0.0)];
            d.extend(logs.iter().skip(1).map(|v| r(*v)));
            let terms = signed_terms(&r(f), &d, n).unwrap();
            prop_assert!(terms.iter().all(|t| !t.is_negative()));
        }

        #[test]
        fn signed_sum_is_sign_flipped_total(
            f in 0.01f64..100.0,
            logs in proptest::collection::vec(0.01f64..5.0, 9),
            n in 1usize..=8,
        ) {
            let l: Vec<Real> = logs.iter().map(|v| r(*v)).collect();
            let s: Vec<Real> = l.iter().enumerate()
                .map(|(k, v)| if k % 2 == 1 { -v } else { v.clone() }).collect();
            let plain = exp_of_log(&r(f), &l, n).unwrap().total;
            let signed = signed_terms(&r(f), &s, n).unwrap().into_iter().fold(r(0.0), |a, b| a + b);
            let want = if n % 2 == 1 { -plain } else { plain };
            prop_assert!(rel_diff(&signed, &want) < 1e-60);
        }
    }
}
