use nalgebra::{Matrix2, Vector2};

use super::{AnalysisError, ScanResult};

/// Fit of `omega(z) = omega0 / (1 - p z)^2` for one mode.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Eq1AxisFit {
    pub label: String,
    /// rad/s
    pub omega0: f64,
    pub omega0_err: f64,
    /// `tan(theta) / r0` (1/m)
    pub p: f64,
    pub p_err: f64,
    /// Euclidean norm of the residuals (rad/s).
    pub residual_norm: f64,
    /// Largest |residual| / data.
    pub max_rel_residual: f64,
    pub points: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl Eq1AxisFit {
    /// Linear coefficient `2 p` of the expansion around `z = 0`.
    pub fn epsilon(&self) -> f64 {
        2.0 * self.p
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Eq1Fit {
    pub axes: Vec<Eq1AxisFit>,
}

/// `omega(z) = omega0 (1 + epsilon z)` least-squares fit for one mode.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LinearFit {
    pub label: String,
    /// 1/m
    pub epsilon: f64,
    /// NaN when only two points are given.
    pub epsilon_err: f64,
    /// rad/s
    pub intercept: f64,
    pub intercept_err: f64,
    pub points: usize,
}

const MAX_ITER: usize = 200;
const GRAD_TOL: f64 = 1e-10;

/// Finite (z, omega) pairs of one measured column, omega in rad/s.
fn column_points(scan: &ScanResult, col: usize) -> (Vec<f64>, Vec<f64>) {
    let c = &scan.measured[col];
    let scale = if c.unit == "Hz" { std::f64::consts::TAU } else { 1.0 };
    scan.values
        .iter()
        .zip(&c.values)
        .filter(|(z, w)| z.is_finite() && w.is_finite())
        .map(|(z, w)| (*z, w * scale))
        .unzip()
}

fn ols(z: &[f64], w: &[f64]) -> Result<(f64, f64, Matrix2<f64>, f64), AnalysisError> {
    let n = z.len() as f64;
    let zm = z.iter().sum::<f64>() / n;
    let wm = w.iter().sum::<f64>() / n;
    let sxx: f64 = z.iter().map(|z| (z - zm).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(AnalysisError::Degenerate("all scan positions coincide".into()));
    }
    let sxy: f64 = z.iter().zip(w).map(|(z, w)| (z - zm) * (w - wm)).sum();
    let slope = sxy / sxx;
    let intercept = wm - slope * zm;
    let ssr: f64 = z.iter().zip(w).map(|(z, w)| (w - intercept - slope * z).powi(2)).sum();
    let s2 = if z.len() > 2 { ssr / (n - 2.0) } else { f64::NAN };
    // covariance of (intercept, slope)
    let var_slope = s2 / sxx;
    let cov = Matrix2::new(s2 * (1.0 / n + zm * zm / sxx), -zm * var_slope, -zm * var_slope, var_slope);
    Ok((intercept, slope, cov, ssr))
}

/// Ordinary least squares of omega against z per measured column,
/// normalized by the intercept.
pub fn fit_linear_epsilon(scan: &ScanResult) -> Result<Vec<LinearFit>, AnalysisError> {
    scan.validate()?;
    (0..scan.measured.len())
        .map(|c| {
            let (z, w) = column_points(scan, c);
            if z.len() < 2 {
                return Err(AnalysisError::TooFewSamples { got: z.len(), min: 2 });
            }
            let (b0, b1, cov, _) = ols(&z, &w)?;
            let eps = b1 / b0;
            let (d0, d1) = (-b1 / (b0 * b0), 1.0 / b0);
            let var = d0 * d0 * cov[(0, 0)] + 2.0 * d0 * d1 * cov[(0, 1)] + d1 * d1 * cov[(1, 1)];
            Ok(LinearFit {
                label: scan.measured[c].name.clone(),
                epsilon: eps,
                epsilon_err: var.max(0.0).sqrt(),
                intercept: b0,
                intercept_err: cov[(0, 0)].max(0.0).sqrt(),
                points: z.len(),
            })
        })
        .collect()
}

/// Damped Gauss-Newton fit of the tapered-trap formula per measured column,
/// started from the linear fit.
pub fn fit_eq1(scan: &ScanResult) -> Result<Eq1Fit, AnalysisError> {
    scan.validate()?;
    let axes = (0..scan.measured.len())
        .map(|c| {
            let (z, w) = column_points(scan, c);
            fit_axis(&scan.measured[c].name, &z, &w)
        })
        .collect::<Result<_, _>>()?;
    Ok(Eq1Fit { axes })
}

fn fit_axis(label: &str, z: &[f64], w: &[f64]) -> Result<Eq1AxisFit, AnalysisError> {
    if z.len() < 4 {
        return Err(AnalysisError::TooFewSamples { got: z.len(), min: 4 });
    }
    let (b0, b1, _, _) = ols(z, w)?;
    let zscale = z.iter().fold(0.0_f64, |m, z| m.max(z.abs()));
    let wscale = b0.abs();
    if !(wscale > 0.0) {
        return Err(AnalysisError::Degenerate("zero intercept".into()));
    }
    let ynorm = w.iter().map(|w| w * w).sum::<f64>().sqrt();

    // scaled parameters u = (omega0 / wscale, p * zscale)
    let residuals = |u: &Vector2<f64>| -> Option<Vec<f64>> {
        z.iter()
            .zip(w)
            .map(|(z, w)| {
                let d = 1.0 - u[1] * z / zscale;
                (d > 0.0).then(|| u[0] * wscale / (d * d) - w)
            })
            .collect()
    };
    let jacobian = |u: &Vector2<f64>| -> (Matrix2<f64>, Vector2<f64>, f64, Vec<f64>) {
        let r = residuals(u).unwrap_or_default();
        let mut jtj = Matrix2::zeros();
        let mut jtr = Vector2::zeros();
        let mut jnorm2 = 0.0;
        for (i, z) in z.iter().enumerate() {
            let d = 1.0 - u[1] * z / zscale;
            let j0 = wscale / (d * d);
            let j1 = 2.0 * u[0] * wscale * z / zscale / (d * d * d);
            jtj += Matrix2::new(j0 * j0, j0 * j1, j0 * j1, j1 * j1);
            jtr += Vector2::new(j0 * r[i], j1 * r[i]);
            jnorm2 += j0 * j0 + j1 * j1;
        }
        (jtj, jtr, jnorm2.sqrt(), r)
    };
    let ssr = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();

    let mut u = Vector2::new(1.0, 0.5 * b1 / b0 * zscale);
    if residuals(&u).is_none() {
        u[1] = 0.0;
    }
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        let (jtj, jtr, jnorm, r) = jacobian(&u);
        let cost = ssr(&r);
        if jtr.norm() <= GRAD_TOL * jnorm * ynorm || cost == 0.0 {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = false;
        for _ in 0..60 {
            let mut a = jtj;
            a[(0, 0)] += lambda * jtj[(0, 0)].max(f64::MIN_POSITIVE);
            a[(1, 1)] += lambda * jtj[(1, 1)].max(f64::MIN_POSITIVE);
            let Some(step) = a.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = u + step;
            match residuals(&trial) {
                Some(rt) if ssr(&rt) <= cost => {
                    let small = step.norm() <= 1e-15 * (u.norm() + 1e-15);
                    u = trial;
                    lambda = (lambda * 0.3).max(1e-12);
                    accepted = true;
                    if small {
                        converged = true;
                    }
                    break;
                }
                _ => lambda *= 10.0,
            }
        }
        if !accepted || converged {
            // no downhill step exists at machine precision
            converged = converged || !accepted;
            break;
        }
    }

    let (jtj, _, _, r) = jacobian(&u);
    let det = jtj.determinant();
    let scale_det = jtj[(0, 0)] * jtj[(1, 1)];
    if !(det > 1e-14 * scale_det) {
        return Err(AnalysisError::Degenerate("Jacobian is rank deficient".into()));
    }
    let cost = ssr(&r);
    let n = z.len() as f64;
    let s2 = cost / (n - 2.0);
    let cov = jtj.try_inverse().ok_or_else(|| AnalysisError::Degenerate("singular normal matrix".into()))? * s2;
    let max_rel_residual = r.iter().zip(w).map(|(r, w)| (r / w).abs()).fold(0.0, f64::max);
    Ok(Eq1AxisFit {
        label: label.to_string(),
        omega0: u[0] * wscale,
        omega0_err: cov[(0, 0)].max(0.0).sqrt() * wscale,
        p: u[1] / zscale,
        p_err: cov[(1, 1)].max(0.0).sqrt() / zscale,
        residual_norm: cost.sqrt(),
        max_rel_residual,
        points: z.len(),
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ScanColumn;
    use crate::trapmodel::radial_freq_eq1_pitch;

    fn scan(z: &[f64], nu: &[f64]) -> ScanResult {
        let mut s = ScanResult::new("z", "m", z.to_vec());
        let mut c = ScanColumn::new("nu_x", "Hz", z.len());
        c.values = nu.to_vec();
        s.measured.push(c);
        s
    }

    #[test]
    fn exact_recovery() {
        let p = 10f64.to_radians().tan() / 0.6389e-3;
        let w0 = std::f64::consts::TAU * 1.14e6;
        let z: Vec<f64> = (0..16).map(|i| -50e-6 + 10e-6 * i as f64).collect();
        let nu: Vec<f64> = z
            .iter()
            .map(|z| radial_freq_eq1_pitch(*z, w0, p).unwrap() / std::f64::consts::TAU)
            .collect();
        let fit = fit_eq1(&scan(&z, &nu)).unwrap();
        let a = &fit.axes[0];
        assert!(a.converged);
        assert!((a.omega0 / w0 - 1.0).abs() < 1e-8);
        assert!((a.p / p - 1.0).abs() < 1e-8);
    }

    #[test]
    fn linear_recovery() {
        let z = [-1e-4, 0.0, 5e-5, 2e-4];
        let nu: Vec<f64> = z.iter().map(|z| 1e6 * (1.0 + 500.0 * z)).collect();
        let fit = fit_linear_epsilon(&scan(&z, &nu)).unwrap();
        assert!((fit[0].epsilon / 500.0 - 1.0).abs() < 1e-12);
        assert!((fit[0].intercept / (std::f64::consts::TAU * 1e6) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let z = [0.0, 1e-5, 2e-5];
        let err = fit_eq1(&scan(&z, &[1e6, 1e6, 1e6])).unwrap_err();
        assert_eq!(err, AnalysisError::TooFewSamples { got: 3, min: 4 });
    }

    #[test]
    fn coincident_positions_are_degenerate() {
        let z = [1e-5; 5];
        let err = fit_eq1(&scan(&z, &[1e6; 5])).unwrap_err();
        assert!(matches!(err, AnalysisError::Degenerate(_)));
    }
}
