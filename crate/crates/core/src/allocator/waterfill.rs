//! Water-filling over parallel Gaussian modes.

/// Powers `[mu - 1/g]^+` summing to `budget`.
///
/// Returns `(powers, usable)`; `usable` is false when every gain is zero, in
/// which case all powers are zero regardless of the budget.
pub fn waterfill(gains: &[f64], budget: f64) -> (Vec<f64>, bool) {
    let mut out = vec![0.0; gains.len()];
    let mut order: Vec<usize> = (0..gains.len()).filter(|&i| gains[i] > 0.0).collect();
    if order.is_empty() {
        return (out, false);
    }
    if budget <= 0.0 {
        return (out, true);
    }
    order.sort_by(|&i, &j| gains[j].total_cmp(&gains[i]));
    let mu = water_level(order.iter().map(|&i| gains[i]), budget);
    for &i in &order {
        out[i] = (mu - 1.0 / gains[i]).max(0.0);
    }
    (out, true)
}

/// Water level for gains sorted in descending order (all positive).
pub(crate) fn water_level(sorted: impl Iterator<Item = f64>, budget: f64) -> f64 {
    let mut inv_sum = 0.0;
    let mut mu = 0.0;
    for (n, g) in sorted.enumerate() {
        let inv = 1.0 / g;
        let candidate = (budget + inv_sum + inv) / (n + 1) as f64;
        if n > 0 && candidate <= inv {
            break;
        }
        inv_sum += inv;
        mu = candidate;
    }
    mu
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rate(gains: &[f64], p: &[f64]) -> f64 {
        gains.iter().zip(p).map(|(g, x)| (1.0 + g * x).log2()).sum()
    }

    #[test]
    fn single_mode_takes_everything() {
        assert_eq!(waterfill(&[3.0], 2.0).0, vec![2.0]);
    }

    #[test]
    fn equal_gains_split_evenly() {
        let (p, _) = waterfill(&[2.0, 2.0], 1.0);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reference_two_mode_case() {
        let (p, ok) = waterfill(&[4.0, 1.0], 1.5);
        assert!(ok);
        assert!((p[0] - 1.125).abs() < 1e-12 && (p[1] - 0.375).abs() < 1e-12);
        // Grid oracle over the budget split.
        let n = 1_000_000;
        let best = (0..=n)
            .map(|i| 1.5 * i as f64 / n as f64)
            .max_by(|a, b| rate(&[4.0, 1.0], &[*a, 1.5 - a]).total_cmp(&rate(&[4.0, 1.0], &[*b, 1.5 - b])))
            .unwrap();
        assert!((best - 1.125).abs() < 2e-6);
    }

    #[test]
    fn weak_mode_left_dry() {
        let (p, _) = waterfill(&[10.0, 0.1], 0.5);
        assert_eq!(p[1], 0.0);
        assert!((p[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn no_usable_mode() {
        assert_eq!(waterfill(&[0.0, 0.0], 1.0), (vec![0.0, 0.0], false));
        assert_eq!(waterfill(&[], 1.0), (vec![], false));
    }

    #[test]
    fn zero_budget() {
        assert_eq!(waterfill(&[1.0, 2.0], 0.0), (vec![0.0, 0.0], true));
    }

    proptest! {
        #[test]
        fn exhausts_budget_and_beats_perturbations(
            gains in proptest::collection::vec(0.0f64..10.0, 1..5),
            budget in 0.0f64..5.0,
            shift in 0.01f64..0.5,
        ) {
            let (p, ok) = waterfill(&gains, budget);
            prop_assume!(ok);
            let total: f64 = p.iter().sum();
            prop_assert!((total - budget).abs() <= 1e-9 * budget.max(1.0));
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            let best = rate(&gains, &p);
            // Moving power between any two modes cannot help.
            for i in 0..p.len() {
                for j in 0..p.len() {
                    if i == j || p[i] == 0.0 { continue; }
                    let mut q = p.clone();
                    let d = shift * q[i];
                    q[i] -= d;
                    q[j] += d;
                    prop_assert!(rate(&gains, &q) <= best + 1e-12);
                }
            }
        }
    }
}
