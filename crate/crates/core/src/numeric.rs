//! Compensated accumulation and overflow-safe exponential means.

/// Neumaier-compensated running sum.
///
/// Keeps the error term of every addition in a side accumulator so that
/// long scans over mixed-magnitude terms stay accurate to a few ulps.
#[derive(Clone, Copy, Debug, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator of terms.
pub fn sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = Accumulator::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Natural log of the weighted exponential mean sum(w * exp(x)) / w_total,
/// evaluated in log-shifted form so that large exponents cannot overflow.
///
/// Returns 0.0 for an empty term list by convention of the callers
/// (a mean of exp over nothing never occurs on validated inputs).
pub fn log_exp_mean<I>(terms: I, w_total: f64) -> f64
where
    I: IntoIterator<Item = (f64, f64)> + Clone,
{
    let mut m = f64::NEG_INFINITY;
    for (x, _) in terms.clone() {
        if x > m {
            m = x;
        }
    }
    if m == f64::NEG_INFINITY {
        return 0.0;
    }
    let mut acc = Accumulator::new();
    for (x, w) in terms {
        acc.add(w * (x - m).exp());
    }
    m + (acc.value() / w_total).ln()
}

/// Weighted exponential mean sum(w * exp(x)) / w_total.
pub fn exp_mean<I>(terms: I, w_total: f64) -> f64
where
    I: IntoIterator<Item = (f64, f64)> + Clone,
{
    log_exp_mean(terms, w_total).exp()
}

/// Splits a positive finite f64 into (mantissa, exponent) with
/// value = mantissa * 2^exponent and integer mantissa.
#[inline]
pub fn decompose(x: f64) -> (u64, i32) {
    let bits = x.to_bits();
    let frac = bits & ((1u64 << 52) - 1);
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    }
}
