//! Numeric values with provenance and the dyadic extrapolation helpers.
//!
//! Infinite-volume quantities are approximated on a dyadic schedule of
//! finite domains and accelerated with one Richardson step.  The error
//! exponent is either prescribed (when the decay order is known) or fitted
//! from the last three values.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// How a numeric value was obtained.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ExactRational,
    Extrapolated,
    MonteCarlo,
}

/// A value with an attached error field: a truncation bound for
/// extrapolated quantities, a standard error for Monte Carlo ones, zero for
/// exact ones.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub mode: Provenance,
}

impl Estimate {
    pub fn exact(value: f64) -> Estimate {
        Estimate {
            value,
            error: 0.0,
            mode: Provenance::ExactRational,
        }
    }

    pub fn monte_carlo(value: f64, standard_error: f64) -> Estimate {
        Estimate {
            value,
            error: standard_error,
            mode: Provenance::MonteCarlo,
        }
    }

    /// Product with first-order error propagation; provenance degrades to
    /// the weaker of the two operands.
    pub fn mul(self, other: Estimate) -> Estimate {
        let value = self.value * other.value;
        let error = (self.error * other.value).abs() + (other.error * self.value).abs();
        Estimate {
            value,
            error,
            mode: combine_mode(self.mode, other.mode),
        }
    }

    pub fn scale(self, c: f64) -> Estimate {
        Estimate {
            value: self.value * c,
            error: self.error * c.abs(),
            mode: self.mode,
        }
    }
}

fn combine_mode(a: Provenance, b: Provenance) -> Provenance {
    use Provenance::*;
    match (a, b) {
        (MonteCarlo, _) | (_, MonteCarlo) => MonteCarlo,
        (Extrapolated, _) | (_, Extrapolated) => Extrapolated,
        _ => ExactRational,
    }
}

/// Extrapolation policy for a dyadic schedule.
#[derive(Clone, Copy, Debug)]
pub struct ExtrapolationPolicy {
    /// Error-model exponent `beta` in `value(R) = L + c R^{-beta}`;
    /// `None` fits it from the last three values.
    pub beta: Option<f64>,
    /// Fallback exponent when fitting is requested but the fit is
    /// ill-conditioned while the differences still shrink.
    pub beta_fallback: f64,
    /// Differences below this floor count as converged.
    pub abs_floor: f64,
}

impl Default for ExtrapolationPolicy {
    fn default() -> Self {
        ExtrapolationPolicy {
            beta: None,
            beta_fallback: 0.5,
            abs_floor: 1e-13,
        }
    }
}

impl ExtrapolationPolicy {
    pub fn fixed(beta: f64) -> Self {
        ExtrapolationPolicy {
            beta: Some(beta),
            ..Default::default()
        }
    }
}

fn one_step(prev: f64, last: f64, beta: f64) -> f64 {
    last + (last - prev) / (2f64.powf(beta) - 1.0)
}

/// Accelerates `values`, taken at radii `R_0, 2 R_0, 4 R_0, ...`, to its
/// limit.  Returns the extrapolated value with a residual-based error field.
pub fn extrapolate_dyadic(values: &[f64], policy: ExtrapolationPolicy) -> Result<Estimate> {
    match values.len() {
        0 => return Err(Error::NotConverged("empty schedule".into())),
        1 => {
            return Ok(Estimate {
                value: values[0],
                error: values[0].abs(),
                mode: Provenance::Extrapolated,
            })
        }
        _ => {}
    }
    let m = values.len();
    let d_last = values[m - 1] - values[m - 2];

    if d_last.abs() <= policy.abs_floor {
        return Ok(Estimate {
            value: values[m - 1],
            error: d_last.abs() + policy.abs_floor,
            mode: Provenance::Extrapolated,
        });
    }

    // fits the decay exponent from three consecutive values ending at `hi`
    let fit_beta = |hi: usize| -> Option<f64> {
        if hi < 2 {
            return None;
        }
        let d1 = values[hi - 1] - values[hi - 2];
        let d2 = values[hi] - values[hi - 1];
        let ratio = d1 / d2;
        if ratio > 1.05 {
            Some(ratio.log2().clamp(0.05, 4.0))
        } else {
            None
        }
    };

    let (value, error) = match policy.beta {
        Some(beta) => {
            let value = one_step(values[m - 2], values[m - 1], beta);
            let error = if m >= 3 {
                (value - one_step(values[m - 3], values[m - 2], beta)).abs()
            } else {
                (value - values[m - 1]).abs()
            };
            (value, error)
        }
        None => {
            if m >= 3 {
                let d_prev = values[m - 2] - values[m - 3];
                if d_last.abs() > d_prev.abs() {
                    return Err(Error::NotConverged(format!(
                        "differences grow along the schedule ({d_prev:e} then {d_last:e})"
                    )));
                }
            }
            let beta = fit_beta(m - 1).unwrap_or(policy.beta_fallback);
            let value = one_step(values[m - 2], values[m - 1], beta);
            // the residual estimate must not reuse the same fit: compare
            // against an extrapolation from an independent window (or from
            // the fallback exponent when the schedule is short)
            let reference = if m >= 4 {
                let beta_prev = fit_beta(m - 2).unwrap_or(beta);
                one_step(values[m - 3], values[m - 2], beta_prev)
            } else if m == 3 {
                one_step(values[m - 2], values[m - 1], policy.beta_fallback)
            } else {
                values[m - 1]
            };
            (value, (value - reference).abs())
        }
    };
    Ok(Estimate {
        value,
        error: error + policy.abs_floor,
        mode: Provenance::Extrapolated,
    })
}

/// Two-level Richardson ladder for series whose leading error is `c / R`
/// with an `R^{-2}` correction, as measured for the signed-weight kernels
/// (escaping walks must cross back, which squares the cancellation factor).
/// The integer ladder is used only when the observed difference ratio
/// confirms the model; otherwise the generic fitted step takes over.
pub fn ladder_extrapolate(values: &[f64], abs_floor: f64) -> Result<Estimate> {
    let m = values.len();
    if m < 2 {
        return extrapolate_dyadic(
            values,
            ExtrapolationPolicy {
                abs_floor,
                ..Default::default()
            },
        );
    }
    let d_last = values[m - 1] - values[m - 2];
    if m == 2 {
        let value = 2.0 * values[1] - values[0];
        return Ok(Estimate {
            value,
            error: d_last.abs() + abs_floor,
            mode: Provenance::Extrapolated,
        });
    }
    let d_prev = values[m - 2] - values[m - 3];
    let ratio = d_prev / d_last;
    if d_last.abs() > abs_floor && (1.7..=2.6).contains(&ratio) {
        let e1a = 2.0 * values[m - 2] - values[m - 3];
        let e1b = 2.0 * values[m - 1] - values[m - 2];
        let value = (4.0 * e1b - e1a) / 3.0;
        return Ok(Estimate {
            value,
            error: (value - e1b).abs() + abs_floor,
            mode: Provenance::Extrapolated,
        });
    }
    extrapolate_dyadic(
        values,
        ExtrapolationPolicy {
            beta: None,
            beta_fallback: 0.5,
            abs_floor,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Synthetic series with a known limit; the oracle for the accelerator.
    fn series(limit: f64, c: f64, beta: f64, r0: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| limit + c * (r0 * 2f64.powi(i as i32)).powf(-beta))
            .collect()
    }

    #[test]
    fn recovers_known_limit_with_fixed_beta() {
        let vals = series(1.65685, 3.0, 0.5, 16.0, 3);
        let est = extrapolate_dyadic(&vals, ExtrapolationPolicy::fixed(0.5)).unwrap();
        assert!((est.value - 1.65685).abs() < 1e-12);
    }

    #[test]
    fn fits_beta_from_three_points() {
        let vals = series(0.25, -0.8, 1.0, 8.0, 4);
        let est = extrapolate_dyadic(&vals, ExtrapolationPolicy::default()).unwrap();
        assert!((est.value - 0.25).abs() < 1e-10, "value {}", est.value);
        assert!(est.error < 1e-6);
    }

    #[test]
    fn mixed_order_series_keeps_honest_error() {
        // two decay terms: the fitted step cannot be exact, the error field
        // must cover the residual
        let vals: Vec<f64> = [16.0f64, 32.0, 64.0, 128.0]
            .iter()
            .map(|r| 2.0 + 1.0 * r.powf(-0.5) + 0.5 * r.powf(-1.0))
            .collect();
        let est = extrapolate_dyadic(&vals, ExtrapolationPolicy::default()).unwrap();
        assert!((est.value - 2.0).abs() < 3.0 * (est.error + 1e-3));
    }

    #[test]
    fn rejects_divergent_series() {
        let vals = [1.0, 1.5, 2.5, 4.5];
        assert!(matches!(
            extrapolate_dyadic(&vals, ExtrapolationPolicy::default()),
            Err(Error::NotConverged(_))
        ));
    }

    #[test]
    fn flat_series_converges_to_floor() {
        let vals = [0.75, 0.75, 0.75];
        let est = extrapolate_dyadic(&vals, ExtrapolationPolicy::default()).unwrap();
        assert_eq!(est.value, 0.75);
        assert!(est.error <= 2e-13);
    }

    #[test]
    fn ladder_removes_first_and_second_order() {
        // L + a/R + b/R^2 is resolved exactly by the two-level ladder
        let vals: Vec<f64> = [32.0f64, 64.0, 128.0]
            .iter()
            .map(|r| 1.65685 + 0.8 / r - 3.0 / (r * r))
            .collect();
        let est = ladder_extrapolate(&vals, 1e-13).unwrap();
        assert!((est.value - 1.65685).abs() < 1e-12, "value {}", est.value);
        // and the error field covers the dropped correction
        assert!(est.error >= (est.value - (2.0 * vals[2] - vals[1])).abs() - 1e-13);
    }

    #[test]
    fn ladder_falls_back_when_model_rejected() {
        // a sqrt-decay series must not be forced through the 1/R ladder
        let vals: Vec<f64> = [32.0f64, 64.0, 128.0]
            .iter()
            .map(|r| 2.0 + 1.0 / r.sqrt())
            .collect();
        let est = ladder_extrapolate(&vals, 1e-13).unwrap();
        assert!((est.value - 2.0).abs() < 1e-10, "value {}", est.value);
    }
}
