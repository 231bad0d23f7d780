/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A proportion with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

/// Wilson score interval at 95% coverage. With no trials the interval is
/// `[0, 1]` and the estimate 0.
pub fn wilson_interval(successes: usize, trials: usize) -> Proportion {
    if trials == 0 {
        return Proportion {
            successes,
            trials,
            estimate: 0.0,
            low: 0.0,
            high: 1.0,
        };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // Endpoints are exact at the boundary counts.
    let low = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    Proportion {
        successes,
        trials,
        estimate: p,
        low,
        high,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_of_one_hundred() {
        let w = wilson_interval(50, 100);
        assert_eq!(w.estimate, 0.5);
        // Independent evaluation of the score interval.
        let (n, z) = (100.0f64, 1.959963984540054f64);
        let c = (0.5 + z * z / 200.0) / (1.0 + z * z / n);
        let h = z * (0.25 / n + z * z / (4.0 * n * n)).sqrt() / (1.0 + z * z / n);
        assert!((w.low - (c - h)).abs() < 1e-15 && (w.high - (c + h)).abs() < 1e-15);
        assert!((w.low - 0.404).abs() < 5e-4 && (w.high - 0.596).abs() < 5e-4);
    }

    #[test]
    fn boundary_counts() {
        let none = wilson_interval(0, 40);
        assert_eq!((none.estimate, none.low), (0.0, 0.0));
        assert!(none.high > 0.0);
        let all = wilson_interval(40, 40);
        assert_eq!((all.estimate, all.high), (1.0, 1.0));
        assert!(all.low < 1.0);
    }

    proptest! {
        #[test]
        fn interval_contains_estimate(n in 1usize..2000, frac in 0.0f64..=1.0) {
            let k = ((n as f64) * frac).round() as usize;
            let w = wilson_interval(k.min(n), n);
            prop_assert!(0.0 <= w.low && w.low <= w.estimate && w.estimate <= w.high && w.high <= 1.0);
        }
    }
}
