//! Compensated summation in index order (two-sum error terms, as in Neumaier's scheme).

#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    carry: f64,
}

impl Accumulator {
    #[inline]
    pub fn add(&mut self, v: f64) {
        // branch-free two-sum: `err` is exactly `(sum + v) - t`
        let t = self.sum + v;
        let bv = t - self.sum;
        let err = (self.sum - (t - bv)) + (v - bv);
        self.carry += err;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Accumulator::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `sum_i a_i * b_i`.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Accumulator::default();
    for (x, y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated(v), 2.0);
        assert_eq!(v.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn dot_matches_exact_small_case() {
        assert_eq!(dot(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]), 32.0);
    }
}
