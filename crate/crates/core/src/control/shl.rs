//! Single-hidden-layer network `Phi(x) = W^T sigma(V^T xbar)` with
//! `xbar = [1, x]` and a bias row on the hidden layer.
//!
//! Weight laws with e-modification, `s = B^T P e`:
//!
//! ```text
//! W' = gamma_w ((sigma - sigma' V^T xbar) s^T - kappa |e| W)
//! V' = gamma_v (xbar s^T W^T sigma' - kappa |e| V)
//! ```

use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub const DEFAULT_NEURONS: usize = 50;

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShlNetwork {
    /// Outer weights, `(neurons + 1) x outputs`.
    pub w: DMatrix<f64>,
    /// Inner weights, `(inputs + 1) x neurons`.
    pub v: DMatrix<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShlRates {
    pub gamma_w: f64,
    pub gamma_v: f64,
    /// e-modification coefficient.
    pub kappa: f64,
}

impl Default for ShlRates {
    fn default() -> Self {
        Self {
            gamma_w: 5.0,
            gamma_v: 1.0,
            kappa: 0.01,
        }
    }
}

impl ShlNetwork {
    pub fn zeros(inputs: usize, neurons: usize, outputs: usize) -> Self {
        Self {
            w: DMatrix::zeros(neurons + 1, outputs),
            v: DMatrix::zeros(inputs + 1, neurons),
        }
    }

    /// Zero outer weights and inner weights uniform in `[-scale, scale]`.
    pub fn random<R: Rng>(inputs: usize, neurons: usize, outputs: usize, scale: f64, rng: &mut R) -> Self {
        let mut net = Self::zeros(inputs, neurons, outputs);
        if scale > 0.0 {
            net.v = DMatrix::from_fn(inputs + 1, neurons, |_, _| rng.random_range(-scale..=scale));
        }
        net
    }

    pub fn inputs(&self) -> usize {
        self.v.nrows() - 1
    }

    pub fn neurons(&self) -> usize {
        self.v.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.w.ncols()
    }

    pub fn forward(&self, x: &DVector<f64>) -> DVector<f64> {
        shl_forward(x, &self.w, &self.v)
    }

    pub fn norm(&self) -> f64 {
        (self.w.norm_squared() + self.v.norm_squared()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().chain(self.v.iter()).all(|v| v.is_finite())
    }
}

pub fn augment(x: &DVector<f64>) -> DVector<f64> {
    let mut xbar = DVector::zeros(x.len() + 1);
    xbar[0] = 1.0;
    xbar.rows_mut(1, x.len()).copy_from(x);
    xbar
}

/// Hidden activations with the leading bias entry.
fn hidden(xbar: &DVector<f64>, v: &DMatrix<f64>) -> (DVector<f64>, DVector<f64>) {
    let z = v.transpose() * xbar;
    let mut sigma = DVector::zeros(z.len() + 1);
    sigma[0] = 1.0;
    for (k, zk) in z.iter().enumerate() {
        sigma[k + 1] = sigmoid(*zk);
    }
    (sigma, z)
}

pub fn shl_forward(x: &DVector<f64>, w: &DMatrix<f64>, v: &DMatrix<f64>) -> DVector<f64> {
    let (sigma, _) = hidden(&augment(x), v);
    w.transpose() * sigma
}

/// One forward-Euler step of the weight laws; `b` is `states x outputs`.
pub fn shl_update(
    net: &mut ShlNetwork,
    e: &DVector<f64>,
    x: &DVector<f64>,
    p: &DMatrix<f64>,
    b: &DMatrix<f64>,
    rates: &ShlRates,
    dt: f64,
) {
    let xbar = augment(x);
    let (sigma, z) = hidden(&xbar, &net.v);
    let s = b.transpose() * p * e;
    let e_norm = e.norm();
    let neurons = z.len();
    // sigma' is (neurons + 1) x neurons with a zero bias row
    let mut dsigma = DMatrix::zeros(neurons + 1, neurons);
    for k in 0..neurons {
        let sk = sigma[k + 1];
        dsigma[(k + 1, k)] = sk * (1.0 - sk);
    }
    let w_dot = ((&sigma - &dsigma * &z) * s.transpose() - &net.w * (rates.kappa * e_norm)) * rates.gamma_w;
    let v_dot =
        (&xbar * (s.transpose() * net.w.transpose() * &dsigma) - &net.v * (rates.kappa * e_norm)) * rates.gamma_v;
    net.w += w_dot * dt;
    net.v += v_dot * dt;
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_outer_weights_give_zero_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = ShlNetwork::random(2, DEFAULT_NEURONS, 1, 0.5, &mut rng);
        let y = net.forward(&DVector::from_vec(vec![0.3, -2.0]));
        assert_eq!(y, DVector::zeros(1));
    }

    #[test]
    fn output_dimension_matches() {
        let net = ShlNetwork::zeros(6, 50, 3);
        assert_eq!(net.forward(&DVector::zeros(6)).len(), 3);
        assert_eq!((net.inputs(), net.neurons(), net.outputs()), (6, 50, 3));
    }

    #[test]
    fn small_network_by_hand() {
        // one input, two neurons, one output
        let v = DMatrix::from_row_slice(2, 2, &[0.5, -1.0, 2.0, 1.0]);
        let w = DMatrix::from_column_slice(3, 1, &[0.1, 1.0, -2.0]);
        let x = DVector::from_element(1, 0.25);
        // z1 = 0.5 + 2 * 0.25 = 1.0, z2 = -1 + 0.25 = -0.75
        let s1 = 1.0 / (1.0 + (-1.0f64).exp());
        let s2 = 1.0 / (1.0 + 0.75f64.exp());
        let expect = 0.1 + s1 - 2.0 * s2;
        assert_relative_eq!(shl_forward(&x, &w, &v)[0], expect, epsilon = 1e-15);
    }

    #[test]
    fn zero_error_or_zero_rates_freeze_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut net = ShlNetwork::random(2, 10, 1, 0.5, &mut rng);
        net.w = DMatrix::from_fn(11, 1, |i, _| i as f64 * 0.01);
        let p = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let b = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let x = DVector::from_vec(vec![0.4, 1.0]);
        let before = net.clone();
        shl_update(&mut net, &DVector::zeros(2), &x, &p, &b, &ShlRates::default(), 1e-3);
        assert_eq!(net, before);
        let frozen = ShlRates {
            gamma_w: 0.0,
            gamma_v: 0.0,
            kappa: 0.01,
        };
        shl_update(&mut net, &DVector::from_vec(vec![0.5, -0.5]), &x, &p, &b, &frozen, 1e-3);
        assert_eq!(net, before);
    }

    #[test]
    fn outer_update_moves_along_activations() {
        let mut net = ShlNetwork::zeros(1, 3, 1);
        let p = DMatrix::from_element(1, 1, 1.0);
        let b = DMatrix::from_element(1, 1, 1.0);
        let e = DVector::from_element(1, 0.5);
        let rates = ShlRates {
            gamma_w: 2.0,
            gamma_v: 1.0,
            kappa: 0.0,
        };
        shl_update(&mut net, &e, &DVector::from_element(1, 1.0), &p, &b, &rates, 0.1);
        // V = 0: every hidden unit sits at sigma(0) = 0.5 with slope 0.25 and z = 0
        let expect = DMatrix::from_column_slice(4, 1, &[1.0, 0.5, 0.5, 0.5]) * (2.0 * 0.5 * 0.1);
        assert_relative_eq!(net.w, expect, epsilon = 1e-15);
        assert_eq!(net.v, DMatrix::zeros(2, 3));
    }
}
