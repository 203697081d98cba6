//! Autocorrelation-method LPC: Levinson-Durbin analysis, the FIR inverse
//! filter that produces the residual, and the all-pole synthesis filter.

use crate::error::{Error, Result};

/// Coefficients `a_0..a_p` of `A(z) = sum a_k z^-k` with `a_0 = 1`, plus the
/// final forward prediction error power.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcCoefficients {
    pub coefficients: Vec<f64>,
    pub error_power: f64,
}

/// One analysed frame: predictor, residual and prediction error.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcFrame {
    pub coefficients: Vec<f64>,
    pub residual: Vec<f64>,
    pub prediction_error_power: f64,
}

impl LpcFrame {
    pub fn analyze(frame: &[f64], order: usize) -> Result<Self> {
        let LpcCoefficients {
            coefficients,
            error_power,
        } = lpc_levinson(frame, order)?;
        let residual = lpc_residual(frame, &coefficients)?;
        Ok(Self {
            coefficients,
            residual,
            prediction_error_power: error_power,
        })
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }
}

/// Biased autocorrelation `r[k] = sum_n x[n] x[n + k]` for lags `0..=max_lag`.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|lag| {
            if lag >= x.len() {
                0.0
            } else {
                x.iter().zip(&x[lag..]).map(|(a, b)| a * b).sum()
            }
        })
        .collect()
}

/// Levinson-Durbin recursion on the (regularised) autocorrelation of `frame`.
///
/// `r[0]` is inflated to `r[0] (1 + 1e-9) + 1e-12`, which keeps the Toeplitz
/// system positive definite, so every reflection coefficient stays inside the
/// unit interval and `A(z)` is minimum phase. An all-zero frame yields the
/// trivial predictor with zero error.
pub fn lpc_levinson(frame: &[f64], order: usize) -> Result<LpcCoefficients> {
    if order >= frame.len() {
        return Err(Error::invalid(format!(
            "LPC order {order} must be below frame length {}",
            frame.len()
        )));
    }
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    if frame.iter().all(|&x| x == 0.0) {
        return Ok(LpcCoefficients {
            coefficients: a,
            error_power: 0.0,
        });
    }

    let mut r = autocorrelation(frame, order);
    r[0] = r[0] * (1.0 + 1e-9) + 1e-12;

    let mut err = r[0];
    let mut prev = a.clone();
    for i in 1..=order {
        let acc: f64 = r[i] + (1..i).map(|j| a[j] * r[i - j]).sum::<f64>();
        let k = -acc / err;
        prev[..i].copy_from_slice(&a[..i]);
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
    }
    Ok(LpcCoefficients {
        coefficients: a,
        error_power: err.max(0.0),
    })
}

fn check_monic(coefficients: &[f64]) -> Result<()> {
    match coefficients.first() {
        Some(&1.0) => Ok(()),
        Some(&c) => Err(Error::invalid(format!("leading LPC coefficient is {c}, expected 1"))),
        None => Err(Error::invalid("LPC coefficient list is empty")),
    }
}

/// FIR analysis filter: `e[n] = sum_k a_k x[n - k]` with zero initial state.
pub fn lpc_residual(frame: &[f64], coefficients: &[f64]) -> Result<Vec<f64>> {
    check_monic(coefficients)?;
    Ok((0..frame.len())
        .map(|n| {
            coefficients
                .iter()
                .take(n + 1)
                .enumerate()
                .map(|(k, &a)| a * frame[n - k])
                .sum()
        })
        .collect())
}

/// Reflection coefficients of a monic polynomial via the step-down recursion.
///
/// Fails with [`Error::UnstableFilter`] as soon as a stage reaches `|k| >= 1`,
/// which happens exactly when some root of `A(z)` lies on or outside the unit
/// circle.
pub fn reflection_coefficients(coefficients: &[f64]) -> Result<Vec<f64>> {
    check_monic(coefficients)?;
    let order = coefficients.len() - 1;
    let mut a = coefficients.to_vec();
    let mut ks = vec![0.0; order];
    for m in (1..=order).rev() {
        let k = a[m];
        if !k.is_finite() || k.abs() >= 1.0 {
            return Err(Error::UnstableFilter {
                stage: m,
                reflection: k,
            });
        }
        ks[m - 1] = k;
        let denom = 1.0 - k * k;
        let prev: Vec<f64> = (0..m).map(|j| (a[j] - k * a[m - j]) / denom).collect();
        a.truncate(m);
        a.copy_from_slice(&prev);
    }
    Ok(ks)
}

/// All-pole synthesis `y[n] = e[n] - sum_{k>=1} a_k y[n - k]`, the exact inverse
/// of [`lpc_residual`] for the same coefficients.
pub fn synthesize(residual: &[f64], coefficients: &[f64]) -> Result<Vec<f64>> {
    reflection_coefficients(coefficients)?;
    let mut y = vec![0.0; residual.len()];
    for n in 0..residual.len() {
        let feedback: f64 = coefficients
            .iter()
            .enumerate()
            .skip(1)
            .take_while(|(k, _)| *k <= n)
            .map(|(k, &a)| a * y[n - k])
            .sum();
        y[n] = residual[n] - feedback;
    }
    Ok(y)
}
