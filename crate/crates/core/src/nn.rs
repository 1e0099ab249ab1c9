//! Minimal dense/convolutional layers in f64 with hand-written backward
//! passes. Everything is single-threaded and allocation-order
//! deterministic so that training runs are bit-reproducible under a fixed
//! seed.

use ndarray::{Array1, Array2, Array3, Array4};
use rand::Rng;

/// 2-D convolution, NCHW single image (C, H, W), square kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    /// (out_channels, in_channels, k, k)
    pub weight: Array4<f64>,
    pub bias: Array1<f64>,
    pub stride: usize,
    pub padding: usize,
}

impl Conv2d {
    /// Kaiming-uniform initialization, bias zero.
    pub fn init<R: Rng>(
        out_c: usize,
        in_c: usize,
        k: usize,
        stride: usize,
        padding: usize,
        rng: &mut R,
    ) -> Self {
        let fan_in = (in_c * k * k) as f64;
        let limit = (6.0 / fan_in).sqrt();
        let mut weight = Array4::zeros((out_c, in_c, k, k));
        for v in weight.iter_mut() {
            *v = rng.gen_range(-limit..limit);
        }
        Self { weight, bias: Array1::zeros(out_c), stride, padding }
    }

    pub fn out_spatial(&self, h: usize, w: usize) -> (usize, usize) {
        let k = self.weight.shape()[2];
        let oh = (h + 2 * self.padding - k) / self.stride + 1;
        let ow = (w + 2 * self.padding - k) / self.stride + 1;
        (oh, ow)
    }

    pub fn forward(&self, x: &Array3<f64>) -> Array3<f64> {
        let (out_c, in_c, k, _) = self.weight.dim();
        let (xc, h, w) = x.dim();
        assert_eq!(xc, in_c, "conv input channels");
        let (oh, ow) = self.out_spatial(h, w);
        let mut out = Array3::zeros((out_c, oh, ow));
        for o in 0..out_c {
            let b = self.bias[o];
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut acc = b;
                    for i in 0..in_c {
                        for ky in 0..k {
                            let y = (oy * self.stride + ky) as isize - self.padding as isize;
                            if y < 0 || y >= h as isize {
                                continue;
                            }
                            for kx in 0..k {
                                let xx = (ox * self.stride + kx) as isize - self.padding as isize;
                                if xx < 0 || xx >= w as isize {
                                    continue;
                                }
                                acc += self.weight[[o, i, ky, kx]] * x[[i, y as usize, xx as usize]];
                            }
                        }
                    }
                    out[[o, oy, ox]] = acc;
                }
            }
        }
        out
    }

    /// Accumulates parameter gradients into `gw`/`gb` and returns the
    /// gradient with respect to the input.
    pub fn backward(
        &self,
        x: &Array3<f64>,
        grad_out: &Array3<f64>,
        gw: &mut Array4<f64>,
        gb: &mut Array1<f64>,
    ) -> Array3<f64> {
        let (out_c, in_c, k, _) = self.weight.dim();
        let (_, h, w) = x.dim();
        let (_, oh, ow) = grad_out.dim();
        let mut gx = Array3::zeros(x.dim());
        for o in 0..out_c {
            for oy in 0..oh {
                for ox in 0..ow {
                    let g = grad_out[[o, oy, ox]];
                    if g == 0.0 {
                        continue;
                    }
                    gb[o] += g;
                    for i in 0..in_c {
                        for ky in 0..k {
                            let y = (oy * self.stride + ky) as isize - self.padding as isize;
                            if y < 0 || y >= h as isize {
                                continue;
                            }
                            for kx in 0..k {
                                let xx = (ox * self.stride + kx) as isize - self.padding as isize;
                                if xx < 0 || xx >= w as isize {
                                    continue;
                                }
                                let (yu, xu) = (y as usize, xx as usize);
                                gw[[o, i, ky, kx]] += g * x[[i, yu, xu]];
                                gx[[i, yu, xu]] += g * self.weight[[o, i, ky, kx]];
                            }
                        }
                    }
                }
            }
        }
        gx
    }
}

/// Fully connected layer over row vectors: `y = W x + b`, weight (out, in).
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Linear {
    pub fn init<R: Rng>(out_dim: usize, in_dim: usize, rng: &mut R) -> Self {
        let limit = (6.0 / in_dim as f64).sqrt();
        let mut weight = Array2::zeros((out_dim, in_dim));
        for v in weight.iter_mut() {
            *v = rng.gen_range(-limit..limit);
        }
        Self { weight, bias: Array1::zeros(out_dim) }
    }

    pub fn forward(&self, x: &Array1<f64>) -> Array1<f64> {
        let (out_dim, in_dim) = self.weight.dim();
        assert_eq!(x.len(), in_dim, "linear input dim");
        let mut y = self.bias.clone();
        for o in 0..out_dim {
            let mut acc = 0.0;
            for i in 0..in_dim {
                acc += self.weight[[o, i]] * x[i];
            }
            y[o] += acc;
        }
        y
    }

    pub fn backward(
        &self,
        x: &Array1<f64>,
        grad_out: &Array1<f64>,
        gw: &mut Array2<f64>,
        gb: &mut Array1<f64>,
    ) -> Array1<f64> {
        let (out_dim, in_dim) = self.weight.dim();
        let mut gx = Array1::zeros(in_dim);
        for o in 0..out_dim {
            let g = grad_out[o];
            gb[o] += g;
            if g == 0.0 {
                continue;
            }
            for i in 0..in_dim {
                gw[[o, i]] += g * x[i];
                gx[i] += g * self.weight[[o, i]];
            }
        }
        gx
    }
}

pub fn relu3(x: &Array3<f64>) -> Array3<f64> {
    x.mapv(|v| v.max(0.0))
}

/// Backward of ReLU given the pre-activation input.
pub fn relu3_backward(pre: &Array3<f64>, grad_out: &Array3<f64>) -> Array3<f64> {
    let mut g = grad_out.clone();
    g.zip_mut_with(pre, |gv, &p| {
        if p <= 0.0 {
            *gv = 0.0;
        }
    });
    g
}

pub fn relu1(x: &Array1<f64>) -> Array1<f64> {
    x.mapv(|v| v.max(0.0))
}

pub fn relu1_backward(pre: &Array1<f64>, grad_out: &Array1<f64>) -> Array1<f64> {
    let mut g = grad_out.clone();
    g.zip_mut_with(pre, |gv, &p| {
        if p <= 0.0 {
            *gv = 0.0;
        }
    });
    g
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Numerically stable binary cross-entropy from a logit.
pub fn bce_with_logit(z: f64, target: f64) -> f64 {
    z.max(0.0) - z * target + (1.0 + (-z.abs()).exp()).ln()
}

/// d(bce)/d(logit) = sigmoid(z) - target.
pub fn bce_with_logit_grad(z: f64, target: f64) -> f64 {
    sigmoid(z) - target
}

/// Softmax over a logit vector.
pub fn softmax(z: &Array1<f64>) -> Array1<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps = z.mapv(|v| (v - m).exp());
    let sum: f64 = exps.sum();
    exps / sum
}

/// Cross-entropy of a softmax distribution against a class index, from
/// logits; returns (loss, d loss / d logits).
pub fn softmax_cross_entropy(z: &Array1<f64>, target: usize) -> (f64, Array1<f64>) {
    let p = softmax(z);
    let loss = -(p[target].max(1e-300)).ln();
    let mut grad = p;
    grad[target] -= 1.0;
    (loss, grad)
}

/// Smooth-L1 (Huber with delta = 1): `0.5 x^2` for |x| < 1, else |x| - 0.5.
pub fn smooth_l1(x: f64) -> f64 {
    let a = x.abs();
    if a < 1.0 {
        0.5 * x * x
    } else {
        a - 0.5
    }
}

pub fn smooth_l1_grad(x: f64) -> f64 {
    if x.abs() < 1.0 {
        x
    } else {
        x.signum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
    }

    #[test]
    fn conv_output_shape_halves_with_stride_two() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let conv = Conv2d::init(4, 3, 3, 2, 1, &mut rng);
        let x = Array3::zeros((3, 65, 64));
        let y = conv.forward(&x);
        assert_eq!(y.dim(), (4, 33, 32)); // ceil(65/2), ceil(64/2)
    }

    #[test]
    fn conv_gradients_match_finite_differences() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let mut conv = Conv2d::init(2, 2, 3, 2, 1, &mut rng);
        let mut x = Array3::zeros((2, 6, 5));
        for v in x.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        // scalar objective: weighted sum of outputs
        let mut w_obj = conv.forward(&x);
        for v in w_obj.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let objective = |c: &Conv2d, x: &Array3<f64>| -> f64 {
            (c.forward(x) * &w_obj).sum()
        };

        let mut gw = Array4::zeros(conv.weight.dim());
        let mut gb = Array1::zeros(conv.bias.len());
        let gx = conv.backward(&x, &w_obj, &mut gw, &mut gb);

        let h = 1e-6;
        // a few weight coordinates
        for &idx in &[(0, 0, 0, 0), (1, 1, 2, 1), (0, 1, 1, 2)] {
            let orig = conv.weight[idx];
            conv.weight[idx] = orig + h;
            let up = objective(&conv, &x);
            conv.weight[idx] = orig - h;
            let down = objective(&conv, &x);
            conv.weight[idx] = orig;
            let num = (up - down) / (2.0 * h);
            assert!(rel_err(num, gw[idx]) < 1e-6, "weight grad {idx:?}");
        }
        // input coordinates
        for &idx in &[(0, 0, 0), (1, 3, 2), (1, 5, 4)] {
            let orig = x[idx];
            x[idx] = orig + h;
            let up = objective(&conv, &x);
            x[idx] = orig - h;
            let down = objective(&conv, &x);
            x[idx] = orig;
            let num = (up - down) / (2.0 * h);
            assert!(rel_err(num, gx[idx]) < 1e-6, "input grad {idx:?}");
        }
        // bias
        let orig = conv.bias[1];
        conv.bias[1] = orig + h;
        let up = objective(&conv, &x);
        conv.bias[1] = orig - h;
        let down = objective(&conv, &x);
        conv.bias[1] = orig;
        assert!(rel_err((up - down) / (2.0 * h), gb[1]) < 1e-6);
    }

    #[test]
    fn linear_gradients_match_finite_differences() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let mut lin = Linear::init(3, 4, &mut rng);
        let x = Array1::from_vec((0..4).map(|i| 0.3 * i as f64 - 0.5).collect());
        let gout = Array1::from_vec(vec![0.7, -1.1, 0.4]);
        let mut gw = Array2::zeros(lin.weight.dim());
        let mut gb = Array1::zeros(3);
        let gx = lin.backward(&x, &gout, &mut gw, &mut gb);
        let objective = |l: &Linear| (l.forward(&x) * &gout).sum();
        let h = 1e-6;
        for &idx in &[(0, 0), (2, 3), (1, 2)] {
            let orig = lin.weight[idx];
            lin.weight[idx] = orig + h;
            let up = objective(&lin);
            lin.weight[idx] = orig - h;
            let down = objective(&lin);
            lin.weight[idx] = orig;
            assert!(rel_err((up - down) / (2.0 * h), gw[idx]) < 1e-6);
        }
        // gx check against direct formula W^T g
        for i in 0..4 {
            let mut acc = 0.0;
            for o in 0..3 {
                acc += lin.weight[[o, i]] * gout[o];
            }
            assert!(rel_err(acc, gx[i]) < 1e-12);
        }
    }

    #[test]
    fn bce_matches_naive_formula_and_grad() {
        for &(z, t) in &[(0.3, 1.0), (-2.0, 0.0), (5.0, 1.0), (-7.0, 1.0)] {
            let p = sigmoid(z);
            let naive = -(t * p.ln() + (1.0 - t) * (1.0 - p).ln());
            assert!(rel_err(bce_with_logit(z, t), naive) < 1e-9);
            assert!(rel_err(bce_with_logit_grad(z, t), p - t) < 1e-12);
        }
    }

    #[test]
    fn softmax_ce_gradient_is_p_minus_onehot() {
        let z = Array1::from_vec(vec![0.2, -0.4, 1.3]);
        let (loss, grad) = softmax_cross_entropy(&z, 2);
        let p = softmax(&z);
        assert!(rel_err(loss, -p[2].ln()) < 1e-12);
        assert!(rel_err(grad[2], p[2] - 1.0) < 1e-12);
        assert!(rel_err(grad[0], p[0]) < 1e-12);
    }

    #[test]
    fn smooth_l1_value_and_kink() {
        assert_eq!(smooth_l1(0.5), 0.125);
        assert_eq!(smooth_l1(2.0), 1.5);
        assert_eq!(smooth_l1_grad(0.5), 0.5);
        assert_eq!(smooth_l1_grad(-3.0), -1.0);
    }
}
