use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-tailed Nemenyi critical values at α = 0.05, for k = 2..=10 methods.
const Q_05: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];

pub fn q_alpha(k: usize, alpha: f64) -> Result<f64> {
    if alpha != 0.05 {
        return Err(Error::invalid(format!(
            "critical values are tabulated only for alpha = 0.05, got {alpha}"
        )));
    }
    if !(2..=10).contains(&k) {
        return Err(Error::invalid(format!(
            "critical values are tabulated for 2 to 10 methods, got {k}"
        )));
    }
    Ok(Q_05[k - 2])
}

/// `q · sqrt(k(k+1) / 6N)`.
pub fn nemenyi_cd(k: usize, n: usize, q: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 methods, got {k}")));
    }
    if n == 0 {
        return Err(Error::invalid("need at least one dataset"));
    }
    Ok(q * ((k * (k + 1)) as f64 / (6 * n) as f64).sqrt())
}

/// Mean rank of each method over datasets. Rows are datasets, columns methods;
/// rank 1 is the best score and ties share the average of their ranks.
pub fn mean_ranks(scores: &[Vec<f64>], higher_is_better: bool) -> Result<Vec<f64>> {
    let k = scores.first().map_or(0, Vec::len);
    if scores.is_empty() || k == 0 {
        return Err(Error::invalid("results matrix is empty"));
    }
    let mut total = vec![0.0; k];
    for (r, row) in scores.iter().enumerate() {
        if row.len() != k {
            return Err(Error::invalid(format!(
                "row {} has {} scores, expected {k}",
                r + 1,
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "row {}, column {} is not a finite score",
                r + 1,
                j + 1
            )));
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            let o = row[a].total_cmp(&row[b]);
            if higher_is_better {
                o.reverse()
            } else {
                o
            }
        });
        let mut i = 0;
        while i < k {
            let mut j = i;
            while j + 1 < k && row[order[j + 1]] == row[order[i]] {
                j += 1;
            }
            let mid = (i + j) as f64 / 2.0 + 1.0;
            for &m in &order[i..=j] {
                total[m] += mid;
            }
            i = j + 1;
        }
    }
    let n = scores.len() as f64;
    Ok(total.into_iter().map(|t| t / n).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NemenyiResult {
    pub mean_ranks: Vec<f64>,
    pub q_alpha: f64,
    pub cd: f64,
    /// `significant[i][j]` when the mean ranks of `i` and `j` differ by more than `cd`.
    pub significant: Vec<Vec<bool>>,
}

pub fn nemenyi(scores: &[Vec<f64>], alpha: f64, higher_is_better: bool) -> Result<NemenyiResult> {
    let ranks = mean_ranks(scores, higher_is_better)?;
    let k = ranks.len();
    let q = q_alpha(k, alpha)?;
    let cd = nemenyi_cd(k, scores.len(), q)?;
    let significant = ranks
        .iter()
        .map(|a| ranks.iter().map(|b| (a - b).abs() > cd).collect())
        .collect();
    Ok(NemenyiResult {
        mean_ranks: ranks,
        q_alpha: q,
        cd,
        significant,
    })
}
