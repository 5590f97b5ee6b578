use serde::Serialize;

/// A deviation divided by the square root of a variance estimate.
///
/// A zero variance makes the ratio degenerate: `value` is then `±∞` (or `0`
/// when the deviation is also zero) and `degenerate` is set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Standardized {
    pub value: f64,
    pub degenerate: bool,
}

impl Standardized {
    pub fn new(deviation: f64, variance: f64) -> Self {
        if variance > 0.0 {
            Self {
                value: deviation / variance.sqrt(),
                degenerate: false,
            }
        } else {
            let value = if deviation == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(deviation)
            };
            Self {
                value,
                degenerate: true,
            }
        }
    }

    pub fn squared(&self) -> f64 {
        self.value * self.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_cases() {
        let s = Standardized::new(0.25, 0.0);
        assert!(s.degenerate);
        assert_eq!(s.value, f64::INFINITY);
        assert_eq!(Standardized::new(-1.0, 0.0).value, f64::NEG_INFINITY);
        let zero = Standardized::new(0.0, 0.0);
        assert!(zero.degenerate);
        assert_eq!(zero.value, 0.0);
        assert!(!Standardized::new(1.0, 4.0).degenerate);
        assert_eq!(Standardized::new(1.0, 4.0).value, 0.5);
    }
}
