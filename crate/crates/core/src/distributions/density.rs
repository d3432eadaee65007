use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use super::FParams;
use crate::error::{Error, Result};

pub(super) fn ln_f_norm(a: f64, c: f64) -> f64 {
    a.ln() - c.ln() - ln_beta(a, c)
}

pub(super) fn ln_f_density_with_norm(x: f64, a: f64, c: f64, ln_norm: f64) -> f64 {
    let r = a * x / c;
    ln_norm + (a - 1.0) * r.ln() - (a + c) * r.ln_1p()
}

/// Log density of the scaled F law; `theta` must be positive.
pub fn ln_f_density(theta: f64, p: &FParams) -> Result<f64> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::Domain(format!("F density needs theta > 0, got {theta}")));
    }
    Ok(p.ln_pdf(theta))
}

/// Density of `theta` where `theta / scale ~ F(2a, 2c)`.
///
/// With `scale = 1` this is the slab density; with `scale = nu0` it is the
/// spike density `p_slab(theta / nu0) / nu0`.
pub fn f_density(theta: f64, p: &FParams) -> Result<f64> {
    ln_f_density(theta, p).map(f64::exp)
}

/// Log density of a zero-mean multivariate t with `dof` degrees of freedom
/// and diagonal scale matrix `common_scale * diag(scale_diag)`.
pub fn mvt_logdensity(x: &[f64], dof: f64, scale_diag: &[f64], common_scale: f64) -> Result<f64> {
    if x.len() != scale_diag.len() {
        return Err(Error::Dimension(format!(
            "point has length {} but scale has length {}",
            x.len(),
            scale_diag.len()
        )));
    }
    if !(dof > 0.0) {
        return Err(Error::Parameter(format!("degrees of freedom must be positive, got {dof}")));
    }
    if !(common_scale > 0.0) || scale_diag.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Parameter("t scales must be positive".into()));
    }
    let m = x.len() as f64;
    let mut quad = 0.0;
    let mut ln_det = 0.0;
    for (&xi, &si) in x.iter().zip(scale_diag) {
        let s = common_scale * si;
        quad += xi * xi / s;
        ln_det += s.ln();
    }
    Ok(ln_gamma(0.5 * (dof + m)) - ln_gamma(0.5 * dof) - 0.5 * m * (dof * std::f64::consts::PI).ln()
        - 0.5 * ln_det
        - 0.5 * (dof + m) * (quad / dof).ln_1p())
}

/// Scalar normal log density.
pub fn normal_logdensity(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + (x - mean).powi(2) / var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_identity_is_exact() {
        let slab = FParams::slab(2.5, 2.5).unwrap();
        let nu0 = 0.01;
        let spike = slab.with_scale(nu0).unwrap();
        for &theta in &[1e-4, 0.003, 0.02, 0.5, 3.0] {
            let lhs = f_density(theta, &spike).unwrap();
            let rhs = f_density(theta / nu0, &slab).unwrap() / nu0;
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs(), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn domain_errors() {
        let slab = FParams::slab(1.0, 2.5).unwrap();
        assert!(matches!(f_density(0.0, &slab), Err(Error::Domain(_))));
        assert!(matches!(f_density(-1.0, &slab), Err(Error::Domain(_))));
        assert!(mvt_logdensity(&[1.0, 2.0], 5.0, &[1.0], 1.0).is_err());
        assert!(mvt_logdensity(&[1.0], 5.0, &[1.0], 0.0).is_err());
    }

    #[test]
    fn t_approaches_normal() {
        for &x in &[-2.0, 0.0, 0.7, 3.0] {
            let t = mvt_logdensity(&[x], 1e6, &[1.3], 1.0).unwrap();
            let n = normal_logdensity(x, 0.0, 1.3);
            assert!((t - n).abs() < 1e-4);
        }
    }

    #[test]
    fn t_common_scale_enters_additively_through_log_det() {
        // Rescaling x and the common scale together shifts the log density by -m/2 log(lambda).
        let x = [0.3, -1.2, 2.0];
        let d = [1.0, 0.5, 2.0];
        let lambda: f64 = 3.7;
        let base = mvt_logdensity(&x, 5.0, &d, 0.2).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v * lambda.sqrt()).collect();
        let scaled = mvt_logdensity(&xs, 5.0, &d, 0.2 * lambda).unwrap();
        assert!((scaled - (base - 1.5 * lambda.ln())).abs() < 1e-12);
    }
}
