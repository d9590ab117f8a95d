use serde::{Deserialize, Serialize};

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl Estimate {
    /// Proportion `hits / n` with the binomial standard error.
    pub fn proportion(hits: u64, n: u64) -> Self {
        if n == 0 {
            return Estimate {
                value: f64::NAN,
                stderr: f64::NAN,
                samples: 0,
            };
        }
        let p = hits as f64 / n as f64;
        Estimate {
            value: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            samples: n,
        }
    }

    /// Sample mean and standard error of the mean.
    pub fn mean_of(xs: &[f64]) -> Self {
        let mut acc = MeanAcc::default();
        xs.iter().for_each(|&x| acc.push(x));
        acc.estimate()
    }

    /// `|value - target| <= k·stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

/// Welford accumulator. Merge order is fixed by callers so results do not
/// depend on thread scheduling.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanAcc {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanAcc {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn estimate(&self) -> Estimate {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        Estimate {
            value: if self.n > 0 { self.mean } else { f64::NAN },
            stderr: if self.n > 0 {
                (var / self.n as f64).sqrt()
            } else {
                f64::NAN
            },
            samples: self.n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportion_error() {
        let e = Estimate::proportion(25, 100);
        assert_eq!(e.value, 0.25);
        assert!((e.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mean_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, 7.0, -3.0];
        let e = Estimate::mean_of(&xs);
        let m = xs.iter().sum::<f64>() / 5.0;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 4.0;
        assert!((e.value - m).abs() < 1e-14);
        assert!((e.stderr - (v / 5.0).sqrt()).abs() < 1e-14);
    }
}
