//! Streaming mean/variance accumulation (Welford) with an exact merge, so
//! Monte Carlo sums can be computed chunk-parallel yet reproduce the same
//! bytes for any thread count: chunk boundaries are fixed and partials are
//! merged in chunk order.

/// Running count, mean, and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Combines two accumulators as if their samples were concatenated.
    /// Deterministic: merging the same partials in the same order always
    /// produces the same bits.
    pub(crate) fn merge(self, other: Welford) -> Welford {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * (other.n as f64 / n as f64);
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64);
        Welford { n, mean, m2 }
    }

    pub(crate) fn count(&self) -> u64 {
        self.n
    }

    /// NaN with no samples, matching "no estimate exists".
    pub(crate) fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    /// Standard error of the mean; exactly zero for constant samples.
    pub(crate) fn std_error(&self) -> f64 {
        match self.n {
            0 => f64::NAN,
            1 => 0.0,
            n => (self.m2.max(0.0) / ((n - 1) as f64) / n as f64).sqrt(),
        }
    }
}
