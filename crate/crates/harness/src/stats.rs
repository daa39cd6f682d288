//! Summary statistics used by every aggregate CSV.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (divisor `n − 1`); zero for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    (mean(xs), sample_std(xs))
}

/// Trailing moving average over at most `window` values ending at each index.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        acc += x;
        if i >= w {
            acc -= xs[i - w];
        }
        let n = (i + 1).min(w);
        out.push(acc / n as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_eq!(mean(&xs), 5.0);
        assert!((sample_std(&xs) - (32.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert_eq!(sample_std(&[3.0]), 0.0);
        assert!(mean(&[]).is_nan());
    }

    #[test]
    fn moving_average_matches_direct_window() {
        let xs: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64 - 3.5).collect();
        let ma = moving_average(&xs, 7);
        for i in 0..xs.len() {
            let lo = i.saturating_sub(6);
            let direct = mean(&xs[lo..=i]);
            assert!((ma[i] - direct).abs() < 1e-12);
        }
    }
}
