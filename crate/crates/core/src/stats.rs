//! Rank-based tests: Mann-Whitney U for two-group comparison and Spearman's
//! rho for monotone trends.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMethod {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// `min(U1, U2)`.
    pub u_statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
    pub method: TestMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationMethod {
    ExactPermutation,
    TApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
    pub method: CorrelationMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsConfig {
    /// Exact Mann-Whitney distribution when `n1 * n2` is at most this and
    /// the pooled sample has no ties.
    pub mwu_exact_max_product: usize,
    /// Exact Spearman permutation test up to this many observations.
    pub spearman_exact_max_n: usize,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self { mwu_exact_max_product: 10_000, spearman_exact_max_n: 8 }
    }
}

/// Mid-ranks (1-based); tied values share the mean of the ranks they span.
pub fn rank_with_ties(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let mid = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = mid;
        }
        start = end;
    }
    ranks
}

/// Sizes of the runs of equal values.
fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.chunk_by(|a, b| a == b).map(<[f64]>::len).collect()
}

fn check_finite(values: &[f64]) -> Result<(), StatsError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

/// Null distribution of U for sample sizes `m` and `n` without ties, as
/// counts of rank assignments: coefficient `k` is the number of the
/// `C(m + n, m)` arrangements with `U = k`. Built from the Gaussian binomial
/// product `prod_{i=1..m} (1 - q^(n+i)) / (1 - q^i)`.
pub fn u_null_counts(m: usize, n: usize) -> Vec<f64> {
    let mut coeffs = vec![0.0; m * n + 1];
    coeffs[0] = 1.0;
    for i in 1..=m {
        let degree = i * n;
        let shift = n + i;
        for k in (shift..=degree).rev() {
            coeffs[k] -= coeffs[k - shift];
        }
        for k in i..=degree {
            coeffs[k] += coeffs[k - i];
        }
    }
    coeffs
}

fn exact_two_sided(u_min: f64, n1: usize, n2: usize) -> f64 {
    let counts = u_null_counts(n1, n2);
    let total: f64 = counts.iter().sum();
    let upto = u_min.round() as usize;
    let lower: f64 = counts[..=upto].iter().sum();
    (2.0 * lower / total).min(1.0)
}

pub fn mann_whitney_u(x: &[f64], y: &[f64], config: &StatsConfig) -> Result<TestResult, StatsError> {
    if x.is_empty() || y.is_empty() {
        return Err(StatsError::EmptySample);
    }
    check_finite(x)?;
    check_finite(y)?;
    let (n1, n2) = (x.len(), y.len());
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    if pooled.iter().all(|&v| v == pooled[0]) {
        return Err(StatsError::DegenerateSample { n1, n2 });
    }
    let ranks = rank_with_ties(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let (f1, f2) = (n1 as f64, n2 as f64);
    let u1 = r1 - f1 * (f1 + 1.0) / 2.0;
    let u2 = f1 * f2 - u1;
    let u = u1.min(u2);

    let ties = tie_groups(&pooled);
    let has_ties = ties.iter().any(|&t| t > 1);
    if !has_ties && n1 * n2 <= config.mwu_exact_max_product {
        return Ok(TestResult {
            u_statistic: u,
            p_value: exact_two_sided(u, n1, n2),
            n1,
            n2,
            method: TestMethod::Exact,
        });
    }

    let big_n = f1 + f2;
    let tie_term: f64 = ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum::<f64>() / (big_n * (big_n - 1.0));
    let variance = f1 * f2 / 12.0 * ((big_n + 1.0) - tie_term);
    let mean = f1 * f2 / 2.0;
    let z = ((mean - u) - 0.5).max(0.0) / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p = (2.0 * normal.sf(z)).clamp(0.0, 1.0);
    Ok(TestResult { u_statistic: u, p_value: p, n1, n2, method: TestMethod::NormalApproximation })
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Fraction of permutations of `ry` whose correlation with `rx` is at least
/// as extreme as `observed`.
fn permutation_p(rx: &[f64], ry: &[f64], observed: f64) -> f64 {
    let n = rx.len();
    let mx = rx.iter().sum::<f64>() / n as f64;
    let my = ry.iter().sum::<f64>() / n as f64;
    let cx: Vec<f64> = rx.iter().map(|v| v - mx).collect();
    let mut cy: Vec<f64> = ry.iter().map(|v| v - my).collect();
    let norm = (cx.iter().map(|v| v * v).sum::<f64>() * cy.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let threshold = observed.abs() - 1e-9;
    let mut extreme = 0u64;
    let mut visit = |cy: &[f64]| {
        let r = cx.iter().zip(cy).map(|(a, b)| a * b).sum::<f64>() / norm;
        if r.abs() >= threshold {
            extreme += 1;
        }
    };
    // Heap's algorithm, iterative.
    let mut c = vec![0usize; n];
    visit(&cy);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                cy.swap(0, i);
            } else {
                cy.swap(c[i], i);
            }
            visit(&cy);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    (extreme as f64 / factorial(n)).min(1.0)
}

pub fn spearman(x: &[f64], y: &[f64], config: &StatsConfig) -> Result<CorrelationResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::InsufficientData { needed: 3, got: n });
    }
    check_finite(x)?;
    check_finite(y)?;
    let rx = rank_with_ties(x);
    let ry = rank_with_ties(y);
    let rho = pearson(&rx, &ry).ok_or(StatsError::ConstantInput)?;

    if n <= config.spearman_exact_max_n {
        return Ok(CorrelationResult {
            rho,
            p_value: permutation_p(&rx, &ry, rho),
            n,
            method: CorrelationMethod::ExactPermutation,
        });
    }
    let p = if rho.abs() >= 1.0 {
        // only the identity and the reversal reach |rho| = 1
        (2.0 / factorial(n)).min(1.0)
    } else {
        let df = (n - 2) as f64;
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
        (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
    };
    Ok(CorrelationResult { rho, p_value: p, n, method: CorrelationMethod::TApproximation })
}
