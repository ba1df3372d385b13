/// Energy-based learning-rate cap: `min(eta, sqrt(max(r^2 - c, 0)))`.
pub fn scheduler_effective_lr(r: f64, c: f64, eta_default: f64) -> f64 {
    eta_default.min((r * r - c).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(scheduler_effective_lr(1.0, 0.0, 0.3), 0.3);
        assert_eq!(scheduler_effective_lr(2.0, 4.0, 0.3), 0.0);
        assert_eq!(scheduler_effective_lr(1.0, 2.0, 0.3), 0.0);
        assert!((scheduler_effective_lr(0.1, 0.0, 0.3) - 0.1).abs() < 1e-15);
        assert!((scheduler_effective_lr(0.5, 0.24, 0.3) - 0.1).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn never_exceeds_default(r in 0.0f64..10.0, c in 0.0f64..5.0, eta in 1e-4f64..2.0) {
            let lr = scheduler_effective_lr(r, c, eta);
            prop_assert!(lr <= eta && lr >= 0.0);
            if r * r - c >= eta * eta {
                prop_assert_eq!(lr, eta);
            }
        }
    }
}
