use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Largest number of non-zero differences handled with the exact null
/// distribution.
pub const EXACT_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// The first series tends to be larger.
    Greater,
    Less,
    TwoSided,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WilcoxonError {
    #[error("paired series differ in length ({0} vs {1})")]
    Length(usize, usize),
    #[error("every paired difference is zero; the test is undefined")]
    AllZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of the ranks of the positive differences.
    pub w_plus: f64,
    /// Non-zero differences used.
    pub n: usize,
    pub p_value: f64,
    pub exact: bool,
}

/// Mid-ranks of `|d|` for the non-zero differences, doubled so they are
/// integers, with the tie-group sizes.
fn doubled_ranks(diffs: &[f64]) -> (Vec<(u64, bool)>, Vec<usize>) {
    let mut abs: Vec<(f64, bool)> = diffs.iter().map(|&d| (d.abs(), d > 0.0)).collect();
    abs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::with_capacity(abs.len());
    let mut ties = Vec::new();
    let mut i = 0;
    while i < abs.len() {
        let mut j = i;
        while j + 1 < abs.len() && abs[j + 1].0 == abs[i].0 {
            j += 1;
        }
        // ranks i+1..=j+1 average to (i+j+2)/2
        let doubled = (i + j + 2) as u64;
        out.extend(abs[i..=j].iter().map(|&(_, pos)| (doubled, pos)));
        ties.push(j - i + 1);
        i = j + 1;
    }
    (out, ties)
}

/// Number of sign assignments giving each doubled positive-rank sum.
pub fn exact_counts(doubled: &[u64]) -> Vec<f64> {
    let total: u64 = doubled.iter().sum();
    let mut counts = vec![0.0; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in doubled {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] > 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

/// Paired signed-rank test of `a` against `b`. Zero differences are
/// dropped and tied magnitudes share their mid-rank.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], alternative: Alternative) -> Result<WilcoxonResult, WilcoxonError> {
    if a.len() != b.len() {
        return Err(WilcoxonError::Length(a.len(), b.len()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Err(WilcoxonError::AllZero);
    }
    let (ranks, ties) = doubled_ranks(&diffs);
    let w2: u64 = ranks.iter().filter(|r| r.1).map(|r| r.0).sum();
    let w_plus = w2 as f64 / 2.0;
    if n <= EXACT_LIMIT {
        let doubled: Vec<u64> = ranks.iter().map(|r| r.0).collect();
        let counts = exact_counts(&doubled);
        let all = 2f64.powi(n as i32);
        let upper = counts[w2 as usize..].iter().sum::<f64>() / all;
        let lower = counts[..=w2 as usize].iter().sum::<f64>() / all;
        let p_value = match alternative {
            Alternative::Greater => upper,
            Alternative::Less => lower,
            Alternative::TwoSided => (2.0 * upper.min(lower)).min(1.0),
        };
        return Ok(WilcoxonResult { w_plus, n, p_value, exact: true });
    }
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term).sqrt();
    let normal = Normal::standard();
    let p_value = match alternative {
        Alternative::Greater => normal.sf((w_plus - mean - 0.5) / sd),
        Alternative::Less => normal.cdf((w_plus - mean + 0.5) / sd),
        Alternative::TwoSided => (2.0 * normal.sf(((w_plus - mean).abs() - 0.5) / sd)).min(1.0),
    };
    Ok(WilcoxonResult { w_plus, n, p_value, exact: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mid_ranks_for_ties() {
        let (r, ties) = doubled_ranks(&[1.0, -1.0, 3.0]);
        assert_eq!(r, vec![(3, true), (3, false), (6, true)]);
        assert_eq!(ties, vec![2, 1]);
    }

    #[test]
    fn large_samples_use_the_normal_tail() {
        let a: Vec<f64> = (0..40).map(|i| i as f64 + 1.0).collect();
        let b = vec![0.0; 40];
        let r = wilcoxon_signed_rank(&a, &b, Alternative::Greater).unwrap();
        assert!(!r.exact && r.p_value < 1e-6);
        let r = wilcoxon_signed_rank(&a, &b, Alternative::Less).unwrap();
        assert!(r.p_value > 0.999);
    }
}
