//! Dense layers and the two-layer MLP the MoE experts are made of.

use rand::Rng;

use super::matrix::Matrix;
use super::KernelError;
use crate::scalar::Scalar;

/// SiLU (swish): `x * sigmoid(x)`. The fixed nonlinearity of [`Mlp`].
pub fn silu<S: Scalar>(x: S) -> S {
    x / (S::one() + (-x).exp())
}

/// A dense layer `y = x W + b`, with `W` of shape `in_dim x out_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<S> {
    pub weight: Matrix<S>,
    pub bias: Vec<S>,
}

impl<S: Scalar> Dense<S> {
    pub fn new(weight: Matrix<S>, bias: Vec<S>) -> Result<Self, KernelError> {
        if bias.len() != weight.cols() {
            return Err(KernelError::DimensionMismatch(format!(
                "bias length {} does not match output width {}",
                bias.len(),
                weight.cols()
            )));
        }
        if !bias.iter().all(|v| v.is_finite()) {
            return Err(KernelError::NonFiniteData);
        }
        Ok(Dense { weight, bias })
    }

    pub fn identity(n: usize) -> Self {
        Dense {
            weight: Matrix::identity(n),
            bias: vec![S::zero(); n],
        }
    }

    pub fn random<R: Rng>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        Dense {
            weight: Matrix::random(in_dim, out_dim, rng),
            bias: (0..out_dim)
                .map(|_| S::from_f64(rng.gen_range(-1.0..1.0)).unwrap())
                .collect(),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn forward(&self, x: &Matrix<S>) -> Result<Matrix<S>, KernelError> {
        let y = x.matmul(&self.weight)?;
        let cols = y.cols();
        let mut data = y.into_data();
        for (i, v) in data.iter_mut().enumerate() {
            *v = *v + self.bias[i % cols];
        }
        Matrix::new(x.rows(), cols, data)
    }
}

/// Two dense layers around a fixed SiLU nonlinearity.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<S> {
    pub hidden: Dense<S>,
    pub output: Dense<S>,
}

impl<S: Scalar> Mlp<S> {
    pub fn new(hidden: Dense<S>, output: Dense<S>) -> Result<Self, KernelError> {
        if hidden.out_dim() != output.in_dim() {
            return Err(KernelError::DimensionMismatch(format!(
                "hidden output width {} does not feed output layer input {}",
                hidden.out_dim(),
                output.in_dim()
            )));
        }
        Ok(Mlp { hidden, output })
    }

    pub fn random<R: Rng>(
        in_dim: usize,
        hidden_dim: usize,
        out_dim: usize,
        rng: &mut R,
    ) -> Self {
        Mlp {
            hidden: Dense::random(in_dim, hidden_dim, rng),
            output: Dense::random(hidden_dim, out_dim, rng),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.hidden.in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.output.out_dim()
    }

    pub fn forward(&self, x: &Matrix<S>) -> Result<Matrix<S>, KernelError> {
        let h = self.hidden.forward(x)?.map(silu);
        self.output.forward(&h)
    }
}
