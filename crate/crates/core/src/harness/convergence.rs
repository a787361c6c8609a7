use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricSeries;

/// Stop once `window` consecutive values sit within `epsilon` of the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCriterion {
    pub epsilon: f64,
    pub window: usize,
    pub max_steps: usize,
}

impl Default for ConvergenceCriterion {
    fn default() -> Self {
        ConvergenceCriterion { epsilon: 1e-4, window: 10, max_steps: 100_000 }
    }
}

impl ConvergenceCriterion {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Parameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.window == 0 {
            return Err(Error::Parameter("convergence window must be at least 1".into()));
        }
        Ok(())
    }
}

/// Smallest recorded `t` such that the values at `t` and the following
/// `window - 1` points are within `epsilon` of `target`. Undefined values
/// never count as close. `None` when no such `t <= max_steps` exists.
pub fn iterations_to_convergence(
    series: &MetricSeries,
    target: f64,
    crit: &ConvergenceCriterion,
) -> Option<usize> {
    let close: Vec<bool> = series
        .points
        .iter()
        .map(|&(_, v)| v.is_some_and(|v| (v - target).abs() <= crit.epsilon))
        .collect();
    let mut run = 0;
    for (i, &ok) in close.iter().enumerate() {
        run = if ok { run + 1 } else { 0 };
        if run == crit.window {
            let t = series.points[i + 1 - crit.window].0;
            return (t <= crit.max_steps).then_some(t);
        }
    }
    None
}

/// Streaming form of the convergence rule, fed one value per step.
///
/// With a target it applies [`iterations_to_convergence`]; without one the
/// target is the mean of the trailing window.
#[derive(Debug, Clone)]
pub struct Settle {
    target: Option<f64>,
    epsilon: f64,
    window: usize,
    recent: VecDeque<(usize, Option<f64>)>,
}

impl Settle {
    pub fn new(target: Option<f64>, crit: &ConvergenceCriterion) -> Self {
        Settle {
            target,
            epsilon: crit.epsilon,
            window: crit.window,
            recent: VecDeque::with_capacity(crit.window + 1),
        }
    }

    /// Records the value at step `t`; returns the step where the settled
    /// window began once the rule is satisfied.
    pub fn push(&mut self, t: usize, value: Option<f64>) -> Option<usize> {
        self.recent.push_back((t, value));
        if self.recent.len() > self.window {
            self.recent.pop_front();
        }
        if self.recent.len() < self.window {
            return None;
        }
        let values: Option<Vec<f64>> = self.recent.iter().map(|&(_, v)| v).collect();
        let values = values?;
        let target = self
            .target
            .unwrap_or_else(|| values.iter().sum::<f64>() / values.len() as f64);
        values
            .iter()
            .all(|v| (v - target).abs() <= self.epsilon)
            .then(|| self.recent[0].0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Metric;

    fn series(values: &[f64]) -> MetricSeries {
        let mut s = MetricSeries::new(Metric::LocalAgreement);
        for (t, &v) in values.iter().enumerate() {
            s.push(t, Some(v));
        }
        s
    }

    fn crit(epsilon: f64, window: usize) -> ConvergenceCriterion {
        ConvergenceCriterion { epsilon, window, max_steps: 100_000 }
    }

    #[test]
    fn constant_series_converges_at_zero() {
        let s = series(&[0.5; 20]);
        assert_eq!(iterations_to_convergence(&s, 0.5, &ConvergenceCriterion::default()), Some(0));
    }

    #[test]
    fn decaying_series_example() {
        let s = series(&[1.0, 0.6, 0.52, 0.501, 0.5001, 0.50001, 0.5]);
        assert_eq!(iterations_to_convergence(&s, 0.5, &crit(0.01, 2)), Some(3));
    }

    #[test]
    fn oscillation_never_converges() {
        let values: Vec<f64> = (0..200).map(|t| if t % 2 == 0 { 0.3 } else { 0.7 }).collect();
        assert_eq!(iterations_to_convergence(&series(&values), 0.5, &crit(0.01, 2)), None);
        assert_eq!(iterations_to_convergence(&series(&values), 0.3, &crit(0.01, 2)), None);
    }

    #[test]
    fn window_longer_than_tail_is_not_converged() {
        let s = series(&[1.0, 0.5, 0.5]);
        assert_eq!(iterations_to_convergence(&s, 0.5, &crit(0.01, 3)), None);
        let short = ConvergenceCriterion { max_steps: 0, ..crit(0.01, 1) };
        assert_eq!(iterations_to_convergence(&s, 0.5, &short), None);
    }

    #[test]
    fn undefined_values_break_the_window() {
        let mut s = MetricSeries::new(Metric::Bimodality);
        s.push(0, Some(0.5));
        s.push(1, None);
        s.push(2, Some(0.5));
        s.push(3, Some(0.5));
        assert_eq!(iterations_to_convergence(&s, 0.5, &crit(0.01, 2)), Some(2));
    }

    #[test]
    fn settle_agrees_with_batch_rule() {
        let values = [1.0, 0.6, 0.52, 0.501, 0.5001, 0.50001, 0.5];
        let c = crit(0.01, 2);
        let mut settle = Settle::new(Some(0.5), &c);
        let first = values.iter().enumerate().find_map(|(t, &v)| settle.push(t, Some(v)));
        assert_eq!(first, Some(3));
    }

    #[test]
    fn settle_without_target_uses_trailing_mean() {
        let c = crit(1e-3, 3);
        let mut settle = Settle::new(None, &c);
        assert_eq!(settle.push(0, Some(1.0)), None);
        assert_eq!(settle.push(1, Some(0.7)), None);
        assert_eq!(settle.push(2, Some(0.7)), None);
        assert_eq!(settle.push(3, Some(0.7005)), Some(1));
    }

    #[test]
    fn criterion_validation() {
        assert!(ConvergenceCriterion::default().validate().is_ok());
        assert!(crit(0.0, 1).validate().is_err());
        assert!(crit(0.1, 0).validate().is_err());
    }
}
