//! Pearson chi-square goodness-of-fit with an embedded quantile table.

use super::{HarnessError, OutcomeHistogram};

/// Significance levels covered by [`CRITICAL`].
pub const ALPHAS: [f64; 4] = [0.10, 0.05, 0.01, 0.001];

/// Upper-tail chi-square quantiles, `CRITICAL[a][df - 1]` for `ALPHAS[a]`.
#[rustfmt::skip]
pub const CRITICAL: [[f64; 32]; 4] = [
    [2.705543, 4.60517, 6.251389, 7.77944, 9.236357, 10.644641, 12.017037, 13.361566,
     14.683657, 15.987179, 17.275009, 18.549348, 19.811929, 21.064144, 22.30713, 23.541829,
     24.769035, 25.989423, 27.203571, 28.411981, 29.615089, 30.813282, 32.0069, 33.196244,
     34.381587, 35.563171, 36.741217, 37.915923, 39.08747, 40.256024, 41.421736, 42.584745],
    [3.841459, 5.991465, 7.814728, 9.487729, 11.070498, 12.591587, 14.06714, 15.507313,
     16.918978, 18.307038, 19.675138, 21.02607, 22.362032, 23.684791, 24.99579, 26.296228,
     27.587112, 28.869299, 30.143527, 31.410433, 32.670573, 33.924438, 35.172462, 36.415029,
     37.652484, 38.885139, 40.113272, 41.337138, 42.556968, 43.772972, 44.985343, 46.19426],
    [6.634897, 9.21034, 11.344867, 13.276704, 15.086272, 16.811894, 18.475307, 20.090235,
     21.665994, 23.209251, 24.72497, 26.216967, 27.68825, 29.141238, 30.577914, 31.999927,
     33.408664, 34.805306, 36.190869, 37.566235, 38.932173, 40.28936, 41.638398, 42.97982,
     44.314105, 45.641683, 46.962942, 48.278236, 49.587884, 50.892181, 52.191395, 53.485772],
    [10.827566, 13.815511, 16.266236, 18.466827, 20.515006, 22.457744, 24.321886, 26.124482,
     27.877165, 29.588298, 31.264134, 32.90949, 34.528179, 36.123274, 37.697298, 39.252355,
     40.790217, 42.312396, 43.820196, 45.314747, 46.797038, 48.267942, 49.728232, 51.178598,
     52.619656, 54.051962, 55.47602, 56.892285, 58.301173, 59.703064, 61.098306, 62.487219],
];

pub fn critical_value(alpha: f64, df: usize) -> Result<f64, HarnessError> {
    let a = ALPHAS
        .iter()
        .position(|&x| (x - alpha).abs() < 1e-12)
        .ok_or(HarnessError::UnsupportedAlpha(alpha))?;
    if df == 0 || df > 32 {
        return Err(HarnessError::UnsupportedDf(df));
    }
    Ok(CRITICAL[a][df - 1])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub critical: f64,
    pub pass: bool,
}

/// Tests `observed` against the distribution `expected` (one entry per bin).
///
/// Bins with zero expected mass are left out of the statistic unless they
/// hold counts, in which case the test fails outright. At least five counts
/// per remaining bin are required.
pub fn chi_square_test(observed: &OutcomeHistogram, expected: &[f64], alpha: f64) -> Result<ChiSquare, HarnessError> {
    if expected.len() != observed.bins.len() {
        return Err(HarnessError::LengthMismatch {
            observed: observed.bins.len(),
            expected: expected.len(),
        });
    }
    if expected.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(HarnessError::InvalidParameter("expected probabilities must be nonnegative".into()));
    }
    let mass: f64 = expected.iter().sum();
    let live = expected.iter().filter(|p| **p > 0.0).count();
    if live == 0 {
        return Err(HarnessError::InvalidParameter("expected distribution is empty".into()));
    }
    let n = observed.total;
    if n < 5 * live as u64 {
        return Err(HarnessError::InsufficientCounts { total: n, bins: live });
    }
    let df = live - 1;
    let critical = if df == 0 { 0.0 } else { critical_value(alpha, df)? };
    let mut stat = 0.0;
    for ((_, count), p) in observed.bins.iter().zip(expected) {
        let e = n as f64 * p / mass;
        if e == 0.0 {
            if *count > 0 {
                stat = f64::INFINITY;
            }
            continue;
        }
        let d = *count as f64 - e;
        stat += d * d / e;
    }
    Ok(ChiSquare {
        statistic: stat,
        df,
        critical,
        pass: stat <= critical,
    })
}
