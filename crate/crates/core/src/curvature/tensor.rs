//! Dense 3- and 4-index arrays with a runtime dimension.

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct T3 {
    n: usize,
    data: Vec<f64>,
}

impl T3 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[(a * self.n + b) * self.n + c] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `T_{abc} T^{abc}` with indices raised by `ginv`.
    pub fn norm_sq(&self, ginv: &DMatrix<f64>) -> f64 {
        let n = self.n;
        let mut raised = self.data.clone();
        for slot in 0..3 {
            raised = raise_slot(&raised, n, 3, slot, ginv);
        }
        self.data.iter().zip(&raised).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct T4 {
    n: usize,
    data: Vec<f64>,
}

impl T4 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        self.data[((a * self.n + b) * self.n + c) * self.n + d] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `T_{abcd} T^{abcd}` with indices raised by `ginv`.
    pub fn norm_sq(&self, ginv: &DMatrix<f64>) -> f64 {
        let n = self.n;
        let mut raised = self.data.clone();
        for slot in 0..4 {
            raised = raise_slot(&raised, n, 4, slot, ginv);
        }
        self.data.iter().zip(&raised).map(|(a, b)| a * b).sum()
    }
}

/// Contracts index `slot` of a rank-`rank` array with `ginv`.
fn raise_slot(data: &[f64], n: usize, rank: usize, slot: usize, ginv: &DMatrix<f64>) -> Vec<f64> {
    let stride = n.pow((rank - 1 - slot) as u32);
    let outer = n.pow(slot as u32);
    let mut out = vec![0.0; data.len()];
    for o in 0..outer {
        for inner in 0..stride {
            for i in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += ginv[(i, k)] * data[(o * n + k) * stride + inner];
                }
                out[(o * n + i) * stride + inner] = acc;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_with_scaled_identity() {
        let n = 4;
        let mut t = T4::zeros(n);
        t.set(0, 1, 0, 1, 2.0);
        t.set(1, 0, 1, 0, 2.0);
        let ginv = DMatrix::<f64>::identity(n, n) * 0.5;
        // each entry squared times 0.5^4
        assert!((t.norm_sq(&ginv) - 2.0 * 4.0 * 0.0625).abs() < 1e-15);
    }

    #[test]
    fn t3_norm_general_metric() {
        let n = 2;
        let mut t = T3::zeros(n);
        t.set(0, 0, 1, 1.0);
        let ginv = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        // T^{001} T_{001} = g^{00} g^{00} g^{11} = 2*2*3
        assert!((t.norm_sq(&ginv) - 12.0).abs() < 1e-14);
    }
}
