//! Fourth-order central finite differences.
//!
//! All stencils are symmetric and never one-sided; callers must provide
//! callbacks that are defined on a ball slightly larger than the unit ball.
//! The engine rejects any stencil point outside [`FdEngine::domain_radius`].

use crate::{Error, Result};

/// `(8 (f₁ - f₋₁) - (f₂ - f₋₂)) / 12h`, paired so constants cancel exactly.
#[inline]
fn first_diff(fm2: f64, fm1: f64, fp1: f64, fp2: f64, h: f64) -> f64 {
    (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h)
}

/// `(16 (f₁ + f₋₁) - (f₂ + f₋₂) - 30 f₀) / 12h²`.
#[inline]
fn second_diff(fm2: f64, fm1: f64, f0: f64, fp1: f64, fp2: f64, h: f64) -> f64 {
    (16.0 * (fp1 + fm1) - (fp2 + fm2) - 30.0 * f0) / (12.0 * h * h)
}

const OFFSETS: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];

/// Value and first derivatives of a vector-valued field.
#[derive(Debug, Clone)]
pub struct Jet1 {
    pub value: Vec<f64>,
    /// `d1[a][c]` is `∂_a` of component `c`.
    pub d1: Vec<Vec<f64>>,
}

/// Value, first and second derivatives of a vector-valued field.
#[derive(Debug, Clone)]
pub struct Jet2 {
    pub value: Vec<f64>,
    pub d1: Vec<Vec<f64>>,
    /// `d2[a][b][c]` is `∂_a ∂_b` of component `c`; symmetric in `a, b`.
    pub d2: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdEngine {
    pub step: f64,
    pub domain_radius: f64,
}

impl FdEngine {
    pub fn new(step: f64, domain_radius: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "finite-difference step {step} must be positive"
            )));
        }
        Ok(Self {
            step,
            domain_radius,
        })
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        // slack for the rounding of x + k*h
        if r > self.domain_radius * (1.0 + 1e-12) {
            return Err(Error::OutsideDomain {
                point: p.to_vec(),
                radius: self.domain_radius,
            });
        }
        Ok(())
    }

    fn eval<F>(&self, f: &F, x: &[f64], shifts: &[(usize, f64)]) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        let mut p = x.to_vec();
        for &(axis, off) in shifts {
            p[axis] += off * self.step;
        }
        self.check(&p)?;
        f(&p)
    }

    /// Value and gradient of `f` at `x`.
    pub fn jet1<F>(&self, f: F, x: &[f64]) -> Result<Jet1>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        let h = self.step;
        let value = self.eval(&f, x, &[])?;
        let len = value.len();
        let d1 = (0..x.len())
            .map(|a| {
                let s = self.axis_samples(&f, x, a)?;
                Ok((0..len)
                    .map(|c| first_diff(s[0][c], s[1][c], s[2][c], s[3][c], h))
                    .collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(Jet1 { value, d1 })
    }

    fn axis_samples<F>(&self, f: &F, x: &[f64], axis: usize) -> Result<Vec<Vec<f64>>>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        OFFSETS
            .iter()
            .map(|&o| self.eval(f, x, &[(axis, o)]))
            .collect()
    }

    /// Value, gradient and Hessian of `f` at `x`. Mixed derivatives use the
    /// composed 16-point stencil.
    pub fn jet2<F>(&self, f: F, x: &[f64]) -> Result<Jet2>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        let n = x.len();
        let h = self.step;
        let value = self.eval(&f, x, &[])?;
        let len = value.len();
        let mut d1 = vec![vec![0.0; len]; n];
        let mut d2 = vec![vec![vec![0.0; len]; n]; n];
        for a in 0..n {
            let s = self.axis_samples(&f, x, a)?;
            for c in 0..len {
                d1[a][c] = first_diff(s[0][c], s[1][c], s[2][c], s[3][c], h);
                d2[a][a][c] = second_diff(s[0][c], s[1][c], value[c], s[2][c], s[3][c], h);
            }
        }
        for a in 0..n {
            for b in (a + 1)..n {
                // ∂_a at each of the four b-offsets, then ∂_b of those
                let mut inner = Vec::with_capacity(4);
                for &ob in &OFFSETS {
                    let s = OFFSETS
                        .iter()
                        .map(|&oa| self.eval(&f, x, &[(a, oa), (b, ob)]))
                        .collect::<Result<Vec<_>>>()?;
                    inner.push(
                        (0..len)
                            .map(|c| first_diff(s[0][c], s[1][c], s[2][c], s[3][c], h))
                            .collect::<Vec<f64>>(),
                    );
                }
                for c in 0..len {
                    let m = first_diff(inner[0][c], inner[1][c], inner[2][c], inner[3][c], h);
                    d2[a][b][c] = m;
                    d2[b][a][c] = m;
                }
            }
        }
        Ok(Jet2 { value, d1, d2 })
    }

    /// Partial derivative of a scalar callback. Each entry of `multi_index`
    /// is the derivative order along that axis and must be at most 2.
    pub fn derivative<F>(&self, f: F, x: &[f64], multi_index: &[u8]) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        if multi_index.len() != x.len() {
            return Err(Error::InvalidGrid(format!(
                "multi-index has {} entries for a point of dimension {}",
                multi_index.len(),
                x.len()
            )));
        }
        if let Some(axis) = multi_index.iter().position(|&k| k > 2) {
            return Err(Error::Unsupported(format!(
                "derivative order {} along axis {axis} (at most 2 per axis)",
                multi_index[axis]
            )));
        }
        let mut shifts = Vec::new();
        self.partial(&f, x, multi_index, 0, &mut shifts)
    }

    fn partial<F>(
        &self,
        f: &F,
        x: &[f64],
        orders: &[u8],
        axis: usize,
        shifts: &mut Vec<(usize, f64)>,
    ) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        let Some(next) = (axis..orders.len()).find(|&a| orders[a] > 0) else {
            let g = |p: &[f64]| -> Result<Vec<f64>> { Ok(vec![f(p)]) };
            return Ok(self.eval(&g, x, shifts)?[0]);
        };
        let mut sample = |o: f64| -> Result<f64> {
            shifts.push((next, o));
            let v = self.partial(f, x, orders, next + 1, shifts);
            shifts.pop();
            v
        };
        let h = self.step;
        let (m2, m1, p1, p2) = (sample(-2.0)?, sample(-1.0)?, sample(1.0)?, sample(2.0)?);
        Ok(if orders[next] == 1 {
            first_diff(m2, m1, p1, p2, h)
        } else {
            let c = sample(0.0)?;
            second_diff(m2, m1, c, p1, p2, h)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm2(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn second_derivative_of_quadratic_is_exact() {
        let fd = FdEngine::new(1e-3, 2.0).unwrap();
        let origin = [0.0; 4];
        let d = fd.derivative(norm2, &origin, &[2, 0, 0, 0]).unwrap();
        assert!((d - 2.0).abs() < 1e-10, "{d}");
        // Away from the origin the stencil cancels |x|² ~ 0.4 against h² = 1e-6,
        // so rounding alone is a few 1e-10.
        let x = [0.3, -0.2, 0.5, 0.1];
        let d = fd.derivative(norm2, &x, &[2, 0, 0, 0]).unwrap();
        assert!((d - 2.0).abs() < 2e-9, "{d}");
        let mixed = fd.derivative(norm2, &x, &[1, 1, 0, 0]).unwrap();
        assert!(mixed.abs() < 2e-9);
    }

    #[test]
    fn hemisphere_factor_gradient_at_pole_of_boundary() {
        let fd = FdEngine::new(1e-3, 1.1).unwrap();
        let phi = |x: &[f64]| 2.0 / (1.0 + norm2(x));
        let d = fd
            .derivative(phi, &[1.0, 0.0, 0.0, 0.0], &[1, 0, 0, 0])
            .unwrap();
        assert!((d + 1.0).abs() < 1e-10, "{d}");
    }

    #[test]
    fn fourth_order_convergence_on_sine() {
        let x = [0.4, 0.1, -0.3, 0.2];
        let err = |h: f64| {
            let fd = FdEngine::new(h, 2.0).unwrap();
            let d = fd
                .derivative(|p: &[f64]| p[0].sin(), &x, &[1, 0, 0, 0])
                .unwrap();
            (d - x[0].cos()).abs()
        };
        for h in [0.08, 0.04, 0.02] {
            let ratio = err(h) / err(h / 2.0);
            assert!(ratio >= 2f64.powf(3.5), "h = {h}: ratio {ratio}");
        }
    }

    #[test]
    fn jet2_matches_scalar_derivatives() {
        let fd = FdEngine::new(1e-2, 2.0).unwrap();
        let f = |p: &[f64]| (p[0] * p[1]).sin() + p[2].exp() * p[3];
        let x = [0.2, 0.7, -0.1, 0.4];
        let jet = fd.jet2(|p| Ok(vec![f(p)]), &x).unwrap();
        for a in 0..4 {
            let mut mi = [0u8; 4];
            mi[a] = 1;
            let d = fd.derivative(f, &x, &mi).unwrap();
            assert!((jet.d1[a][0] - d).abs() < 1e-12);
            for b in 0..4 {
                let mut mi = [0u8; 4];
                mi[a] += 1;
                mi[b] += 1;
                let d = fd.derivative(f, &x, &mi).unwrap();
                assert!((jet.d2[a][b][0] - d).abs() < 1e-9, "({a},{b})");
            }
        }
    }

    #[test]
    fn stencil_outside_domain_is_rejected() {
        let fd = FdEngine::new(1e-3, 1.0).unwrap();
        let err = fd
            .derivative(norm2, &[1.0, 0.0, 0.0, 0.0], &[1, 0, 0, 0])
            .unwrap_err();
        assert!(matches!(err, Error::OutsideDomain { .. }));
    }

    #[test]
    fn order_above_two_is_rejected() {
        let fd = FdEngine::new(1e-3, 2.0).unwrap();
        assert!(fd.derivative(norm2, &[0.0; 4], &[3, 0, 0, 0]).is_err());
    }
}
