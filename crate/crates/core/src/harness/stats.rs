use super::HarnessError;

/// Root-mean-square error over every entry of every time step.
pub fn rmse(analysis: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<f64, HarnessError> {
    if analysis.len() != truth.len() || analysis.is_empty() {
        return Err(HarnessError::LengthMismatch {
            expected: truth.len(),
            found: analysis.len(),
        });
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (a, t) in analysis.iter().zip(truth) {
        if a.len() != t.len() {
            return Err(HarnessError::LengthMismatch {
                expected: t.len(),
                found: a.len(),
            });
        }
        sum += a.iter().zip(t).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        count += a.len();
    }
    Ok((sum / count as f64).sqrt())
}

/// Boxplot-ready summary of a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub median: f64,
    pub mean: f64,
    /// Sample standard deviation (N-1 denominator; 0 for a single value).
    pub std: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
    /// Most extreme observations within 1.5·IQR of the quartiles.
    pub whisker_low: f64,
    pub whisker_high: f64,
}

impl Summary {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Linearly interpolated quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Result<Summary, HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let count = sorted.len();
    let mean = sorted.iter().sum::<f64>() / count as f64;
    let std = if count > 1 {
        (sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    let fence = 1.5 * (q3 - q1);
    let whisker_low = *sorted.iter().find(|&&v| v >= q1 - fence).unwrap_or(&sorted[0]);
    let whisker_high = *sorted.iter().rev().find(|&&v| v <= q3 + fence).unwrap_or(&sorted[count - 1]);
    Ok(Summary {
        count,
        median: quantile(&sorted, 0.5),
        mean,
        std,
        q1,
        q3,
        min: sorted[0],
        max: sorted[count - 1],
        whisker_low,
        whisker_high,
    })
}

/// Formats like C's `%.6g`: six significant digits, trailing zeros trimmed.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.5e}", x);
    let (mant, e) = sci.split_once('e').expect("exponent form");
    let exp: i32 = e.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mant), exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_examples() {
        let t = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(rmse(&t, &t).unwrap(), 0.0);
        let shifted: Vec<Vec<f64>> = t.iter().map(|x| x.iter().map(|v| v - 0.75).collect()).collect();
        assert!((rmse(&shifted, &t).unwrap() - 0.75).abs() < 1e-15);
        assert!(rmse(&t[..1], &t).is_err());
    }

    #[test]
    fn summary_examples() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.q1, 1.75);
        assert_eq!(s.q3, 3.25);
        let c = summarize(&[0.3; 7]).unwrap();
        assert_eq!(c.std, 0.0);
        assert_eq!(c.iqr(), 0.0);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn whiskers_exclude_outliers() {
        let s = summarize(&[1.0, 1.1, 1.2, 1.3, 1.4, 9.0]).unwrap();
        assert_eq!(s.whisker_high, 1.4);
        assert_eq!(s.max, 9.0);
        assert_eq!(s.whisker_low, 1.0);
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(600.0), "600");
        assert_eq!(sig6(0.30612345), "0.306123");
        assert_eq!(sig6(1.0741), "1.0741");
        assert_eq!(sig6(-2.5), "-2.5");
        assert_eq!(sig6(1234567.0), "1.23457e+06");
        assert_eq!(sig6(0.0000123456789), "1.23457e-05");
        assert_eq!(sig6(999999.7), "1e+06");
        assert_eq!(sig6(0.000999999951), "0.001");
    }
}
