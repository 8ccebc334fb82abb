use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use super::AnalysisError;

/// `[[a, b], [c, d]]` — rows are groups, columns are outcome present / absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyTable2x2 { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

/// Relative slack when comparing table probabilities against the observed one.
const REL_TOL: f64 = 1e-7;

/// Two-sided Fisher exact test: total probability of all tables with the observed margins
/// that are no more likely than the observed table.
pub fn fisher_exact_p(t: &ContingencyTable2x2) -> Result<f64, AnalysisError> {
    let n = t.total();
    if n == 0 {
        return Err(AnalysisError::EmptyTable);
    }
    let (r1, r2, c1) = (t.a + t.b, t.c + t.d, t.a + t.c);
    let ln_denom = ln_binomial(n, c1);
    let ln_p = |x: u64| ln_binomial(r1, x) + ln_binomial(r2, c1 - x) - ln_denom;
    let observed = ln_p(t.a);
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let p: f64 = (lo..=hi)
        .map(ln_p)
        .filter(|&lp| lp <= observed + REL_TOL.ln_1p())
        .map(f64::exp)
        .sum();
    Ok(p.min(1.0))
}

/// Odds ratio `ad / bc`, adding 0.5 to every cell when any cell is zero.
pub fn odds_ratio(t: &ContingencyTable2x2) -> Result<f64, AnalysisError> {
    if t.total() == 0 {
        return Err(AnalysisError::EmptyTable);
    }
    let cells = [t.a, t.b, t.c, t.d].map(|v| v as f64);
    let [a, b, c, d] = if cells.contains(&0.0) { cells.map(|v| v + 0.5) } else { cells };
    Ok((a * d) / (b * c))
}
