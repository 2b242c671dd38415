//! Built-in metrics on the unit ball. All factors are closed-form and extend
//! analytically past the unit sphere, so stencils never need to go one-sided.

use super::MetricSpec;
use crate::{Error, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Evaluation radius granted to every built-in model.
pub const DOMAIN_RADIUS: f64 = 3.0;

fn r2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Stereographic factor of the round sphere; the unit ball maps to the upper
/// hemisphere and the unit sphere to the equator.
pub fn hemisphere_factor(x: &[f64]) -> f64 {
    2.0 / (1.0 + r2(x))
}

pub fn flat(n: usize) -> MetricSpec {
    MetricSpec::conformal("flat", n, true, |_| 1.0)
}

pub fn hemisphere(n: usize) -> MetricSpec {
    MetricSpec::conformal("hemisphere", n, true, hemisphere_factor)
}

/// Round metric restricted to the stereographic ball of radius `a`, rescaled
/// to the unit ball: a geodesic cap of radius `2 arctan a`.
pub fn cap(n: usize, a: f64) -> Result<MetricSpec> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Unsupported(format!(
            "cap({a}): radius must lie in (0, 1)"
        )));
    }
    Ok(MetricSpec::conformal(
        format!("cap({a})"),
        n,
        true,
        move |x| 2.0 * a / (1.0 + a * a * r2(x)),
    ))
}

/// Radial profile `u(r) = amplitude · Σ_k c_k (1 - r²)^k` with random `c_k`
/// normalized so that `Σ|c_k| = 1`; `u` vanishes at `r = 1`, and also its
/// derivative when `first_power >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub coefficients: Vec<f64>,
    pub first_power: i32,
}

impl RadialProfile {
    pub fn random(seed: u64, amplitude: f64, first_power: i32, terms: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..terms).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm: f64 = raw.iter().map(|c| c.abs()).sum::<f64>().max(1e-300);
        Self {
            coefficients: raw.into_iter().map(|c| amplitude * c / norm).collect(),
            first_power,
        }
    }

    pub fn eval(&self, r_sq: f64) -> f64 {
        let s = 1.0 - r_sq;
        let mut acc = 0.0;
        let mut p = s.powi(self.first_power);
        for c in &self.coefficients {
            acc += c * p;
            p *= s;
        }
        acc
    }
}

fn bump(name: String, n: usize, profile: RadialProfile) -> Result<MetricSpec> {
    let m = MetricSpec::conformal(name, n, true, move |x| {
        let q = r2(x);
        2.0 / (1.0 + q) * profile.eval(q).exp()
    });
    scan_positive(&m)?;
    Ok(m)
}

/// Hemisphere times `exp(u(|x|))` with `u(1) = 0`.
pub fn radial_bump(n: usize, seed: u64, amplitude: f64) -> Result<MetricSpec> {
    bump(
        format!("radial_bump({seed},{amplitude})"),
        n,
        RadialProfile::random(seed, amplitude, 1, 4),
    )
}

/// Like [`radial_bump`] but with `u'(1) = 0` as well, so the boundary sphere
/// stays totally geodesic.
pub fn geodesic_bump(n: usize, seed: u64, amplitude: f64) -> Result<MetricSpec> {
    bump(
        format!("geodesic_bump({seed},{amplitude})"),
        n,
        RadialProfile::random(seed, amplitude, 2, 4),
    )
}

/// A random non-radial analytic function on `R^n` (linear, quadratic and
/// plane-wave terms) of size about 1 on the unit ball.
pub fn random_field(n: usize, seed: u64) -> impl Fn(&[f64]) -> f64 + Send + Sync + Clone + 'static {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let linear: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let quad: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let wave: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
    move |x: &[f64]| {
        let mut p = 0.0;
        for i in 0..n {
            p += linear[i] * x[i] / (n as f64).sqrt();
            for j in 0..n {
                p += quad[i * n + j] * x[i] * x[j] / n as f64;
            }
        }
        let kx: f64 = wave.iter().zip(x).map(|(k, v)| k * v).sum();
        (p + kx.sin()) / 3.0
    }
}

/// Hemisphere times `exp(amplitude · p(x))` with `p` from [`random_field`].
pub fn generic_bump(n: usize, seed: u64, amplitude: f64) -> Result<MetricSpec> {
    let p = random_field(n, seed);
    let m = MetricSpec::conformal(
        format!("generic_bump({seed},{amplitude})"),
        n,
        false,
        move |x| hemisphere_factor(x) * (amplitude * p(x)).exp(),
    );
    scan_positive(&m)?;
    Ok(m)
}

/// `flat + 0.1 · x₁² · e₂⊗e₂`: not locally conformally flat.
pub fn perturbed_flat(n: usize) -> MetricSpec {
    MetricSpec::general("perturbed_flat", n, false, move |x| {
        let mut g = DMatrix::<f64>::identity(n, n);
        g[(1, 1)] += 0.1 * x[0] * x[0];
        g
    })
}

/// The hemisphere pulled back by `F(x) = x + ε w(x)` with
/// `w_i(x) = x_{i+1}² / 2` (indices cyclic). Locally conformally flat, but
/// given as a full matrix field, so its Weyl tensor is only zero up to
/// discretization error.
pub fn warped_hemisphere(n: usize, eps: f64) -> MetricSpec {
    MetricSpec::general(format!("warped_hemisphere({eps})"), n, false, move |x| {
        let y: Vec<f64> = (0..n)
            .map(|i| x[i] + 0.5 * eps * x[(i + 1) % n].powi(2))
            .collect();
        let mut jac = DMatrix::<f64>::identity(n, n);
        for i in 0..n {
            jac[(i, (i + 1) % n)] += eps * x[(i + 1) % n];
        }
        let p = hemisphere_factor(&y);
        jac.transpose() * jac * (p * p)
    })
}

/// Coarse positivity scan of the factor on the unit ball.
fn scan_positive(m: &MetricSpec) -> Result<()> {
    scan_factor(m.dimension, m.factor().expect("conformal model").as_ref())
}

/// Samples `f` at 512 deterministic points of the closed unit ball and
/// rejects non-positive or non-finite values.
pub(crate) fn scan_factor(n: usize, phi: &dyn Fn(&[f64]) -> f64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut x = vec![0.0; n];
    for k in 0..512 {
        let r = (k % 17) as f64 / 16.0;
        let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        for i in 0..n {
            x[i] = r * dir[i] / norm;
        }
        let v = phi(&x);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositiveFactor {
                point: x.clone(),
                value: v,
            });
        }
    }
    Ok(())
}

/// Looks up a model by name. Accepted spellings: `flat`, `hemisphere`,
/// `cap(0.5)` / `cap:0.5`, `radial_bump(7,0.2)` / `radial_bump:7:0.2`, and the
/// same for `geodesic_bump` and `generic_bump`; `perturbed_flat`;
/// `warped_hemisphere(0.2)`.
pub fn model(name: &str, dimension: usize) -> Result<MetricSpec> {
    if dimension != 4 && dimension != 6 {
        return Err(Error::UnknownModel(format!(
            "{name} in dimension {dimension}"
        )));
    }
    let (base, args) = split_name(name).ok_or_else(|| Error::UnknownModel(name.to_string()))?;
    let float = |i: usize| -> Result<f64> {
        args.get(i)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::UnknownModel(format!("{name}: missing or invalid argument {i}")))
    };
    let seed = || -> Result<u64> {
        args.first()
            .and_then(|s| s.trim().parse::<u64>().ok())
            .ok_or_else(|| Error::UnknownModel(format!("{name}: missing or invalid seed")))
    };
    let arity = |k: usize| -> Result<()> {
        if args.len() != k {
            return Err(Error::UnknownModel(format!(
                "{name}: expected {k} argument(s)"
            )));
        }
        Ok(())
    };
    match base {
        "flat" => arity(0).map(|_| flat(dimension)),
        "hemisphere" => arity(0).map(|_| hemisphere(dimension)),
        "perturbed_flat" => arity(0).map(|_| perturbed_flat(dimension)),
        "warped_hemisphere" => {
            arity(1)?;
            Ok(warped_hemisphere(dimension, float(0)?))
        }
        "cap" => {
            arity(1)?;
            cap(dimension, float(0)?)
        }
        "radial_bump" => {
            arity(2)?;
            radial_bump(dimension, seed()?, float(1)?)
        }
        "geodesic_bump" => {
            arity(2)?;
            geodesic_bump(dimension, seed()?, float(1)?)
        }
        "generic_bump" => {
            arity(2)?;
            generic_bump(dimension, seed()?, float(1)?)
        }
        _ => Err(Error::UnknownModel(name.to_string())),
    }
}

fn split_name(name: &str) -> Option<(&str, Vec<&str>)> {
    let name = name.trim();
    if let Some(open) = name.find('(') {
        let inner = name[open + 1..].strip_suffix(')')?;
        let args = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner.split(',').collect()
        };
        return Some((&name[..open], args));
    }
    let mut parts = name.split(':');
    let base = parts.next()?;
    Some((base, parts.collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hemisphere_factor_at_origin() {
        let m = model("hemisphere", 4).unwrap();
        assert_eq!(m.factor().unwrap()(&[0.0; 4]), 2.0);
    }

    #[test]
    fn both_spellings_parse() {
        let a = model("radial_bump(7,0.2)", 4).unwrap();
        let b = model("radial_bump:7:0.2", 4).unwrap();
        let x = [0.3, 0.1, 0.0, 0.2];
        assert_eq!(a.factor().unwrap()(&x), b.factor().unwrap()(&x));
        assert!(model("cap(0.5)", 6).is_ok());
        assert!(model("cap:1.5", 4).is_err());
        assert!(model("torus", 4).is_err());
        assert!(model("hemisphere", 5).is_err());
        assert!(model("radial_bump(7)", 4).is_err());
    }

    #[test]
    fn bump_profiles_vanish_on_boundary() {
        let p = RadialProfile::random(7, 0.2, 1, 4);
        assert_eq!(p.eval(1.0), 0.0);
        let q = RadialProfile::random(7, 0.2, 2, 4);
        let h = 1e-6;
        assert!(((q.eval(1.0 + h) - q.eval(1.0 - h)) / (2.0 * h)).abs() < 1e-9);
        assert!(p.coefficients.iter().map(|c| c.abs()).sum::<f64>() <= 0.2 + 1e-15);
    }

    #[test]
    fn radial_bump_is_positive_on_grid() {
        let g = crate::BallGrid::build(4, 16, 6, 1e-3, false).unwrap();
        let m = model("radial_bump(7,0.2)", 4).unwrap();
        m.validate(&g).unwrap();
    }

    #[test]
    fn huge_amplitude_is_rejected() {
        assert!(radial_bump(4, 7, 5000.0).is_err());
    }
}
