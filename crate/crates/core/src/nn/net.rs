//! Dense multi-branch network over a single flat parameter vector.
//!
//! Parameters are stored layer by layer (trunk first, then each branch in
//! order), each layer as a row-major `fan_in x fan_out` weight block followed
//! by its bias. Gradients use the identical layout.

use ndarray::{concatenate, s, Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::activation::Activation;
use super::loss::LossKind;
use super::normalize::{MinMax, Standardizer};
use super::topology::NetTopology;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSlot {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weight_offset: usize,
    pub bias_offset: usize,
    /// Hidden layers apply the activation; branch output layers are linear.
    pub hidden: bool,
    /// Position in forward order, used in error reports.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub common: Vec<LayerSlot>,
    pub branches: Vec<Vec<LayerSlot>>,
    pub n_params: usize,
}

impl Layout {
    pub fn new(t: &NetTopology) -> Self {
        let mut off = 0;
        let mut index = 0;
        let mut slot = |fan_in: usize, fan_out: usize, hidden: bool| {
            let s = LayerSlot {
                fan_in,
                fan_out,
                weight_offset: off,
                bias_offset: off + fan_in * fan_out,
                hidden,
                index,
            };
            off += fan_in * fan_out + fan_out;
            index += 1;
            s
        };
        let mut prev = t.input_dim;
        let mut common = Vec::new();
        for &w in &t.common {
            common.push(slot(prev, w, true));
            prev = w;
        }
        let trunk = prev;
        let branches = t
            .branches
            .iter()
            .map(|b| {
                let mut p = trunk;
                let mut layers: Vec<LayerSlot> = b
                    .hidden
                    .iter()
                    .map(|&w| {
                        let l = slot(p, w, true);
                        p = w;
                        l
                    })
                    .collect();
                layers.push(slot(p, b.output_dim, false));
                layers
            })
            .collect();
        Layout {
            common,
            branches,
            n_params: off,
        }
    }

    pub fn layers(&self) -> impl Iterator<Item = &LayerSlot> {
        self.common.iter().chain(self.branches.iter().flatten())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateNet {
    pub topology: NetTopology,
    pub params: Vec<f64>,
    pub input_norm: MinMax,
    pub output_norm: Standardizer,
    layout: Layout,
}

/// Activations recorded during a forward pass.
pub struct Tape {
    input: Array2<f64>,
    /// (pre-activation, activation) per trunk layer.
    common: Vec<(Array2<f64>, Array2<f64>)>,
    /// Per branch, (pre-activation, activation) per layer; for the output
    /// layer both entries hold the linear output.
    branches: Vec<Vec<(Array2<f64>, Array2<f64>)>>,
}

impl Tape {
    pub fn outputs(&self) -> Vec<ArrayView2<'_, f64>> {
        self.branches
            .iter()
            .map(|b| b.last().expect("branch has an output layer").1.view())
            .collect()
    }

    pub fn concat_output(&self) -> Array2<f64> {
        concat_columns(&self.outputs())
    }
}

pub fn concat_columns(parts: &[ArrayView2<f64>]) -> Array2<f64> {
    concatenate(Axis(1), parts).expect("branch outputs share the batch dimension")
}

fn check_finite(a: &Array2<f64>, layer: usize, what: &str) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric {
            layer,
            detail: format!("non-finite {what}"),
        })
    }
}

impl SurrogateNet {
    /// Glorot-uniform weights and zero biases, seeded; identity normalizers.
    pub fn new(topology: NetTopology, seed: u64) -> Result<Self> {
        topology.validate()?;
        let layout = Layout::new(&topology);
        let mut params = vec![0.0; layout.n_params];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in layout.layers() {
            let limit = (6.0 / (l.fan_in + l.fan_out) as f64).sqrt();
            for w in &mut params[l.weight_offset..l.bias_offset] {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(SurrogateNet {
            input_norm: MinMax::identity(topology.input_dim),
            output_norm: Standardizer::identity(topology.output_dim()),
            topology,
            params,
            layout,
        })
    }

    /// Rebuilds a network from stored parts, checking every shape.
    pub fn from_parts(
        topology: NetTopology,
        params: Vec<f64>,
        input_norm: MinMax,
        output_norm: Standardizer,
    ) -> Result<Self> {
        topology.validate()?;
        let layout = Layout::new(&topology);
        let checks = [
            ("parameters", layout.n_params, params.len()),
            ("input normalizer", topology.input_dim, input_norm.min.len()),
            ("input normalizer", topology.input_dim, input_norm.span.len()),
            ("output normalizer", topology.output_dim(), output_norm.mean.len()),
            ("output normalizer", topology.output_dim(), output_norm.std.len()),
        ];
        for (context, expected, got) in checks {
            if expected != got {
                return Err(Error::Shape {
                    context,
                    expected,
                    got,
                });
            }
        }
        if !input_norm.is_finite() || !output_norm.is_finite() {
            return Err(Error::Format("normalizer statistics are not finite".into()));
        }
        Ok(SurrogateNet {
            topology,
            params,
            input_norm,
            output_norm,
            layout,
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn n_params(&self) -> usize {
        self.layout.n_params
    }

    pub fn weights(&self, l: &LayerSlot) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape(
            (l.fan_in, l.fan_out),
            &self.params[l.weight_offset..l.bias_offset],
        )
        .expect("layout matches parameter vector")
    }

    pub fn bias(&self, l: &LayerSlot) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.params[l.bias_offset..l.bias_offset + l.fan_out])
    }

    fn dense(&self, l: &LayerSlot, x: ArrayView2<f64>) -> Result<(Array2<f64>, Array2<f64>)> {
        let mut z = x.dot(&self.weights(l));
        z += &self.bias(l);
        check_finite(&z, l.index, "pre-activation")?;
        let act = self.topology.activation;
        let a = if l.hidden { z.mapv(|v| act.apply(v)) } else { z.clone() };
        Ok((z, a))
    }

    /// Forward pass on already-normalized inputs, keeping intermediates.
    pub fn forward_tape(&self, x: ArrayView2<f64>) -> Result<Tape> {
        if x.ncols() != self.topology.input_dim {
            return Err(Error::Shape {
                context: "network input",
                expected: self.topology.input_dim,
                got: x.ncols(),
            });
        }
        check_finite(&x.to_owned(), 0, "input")?;
        let mut common = Vec::with_capacity(self.layout.common.len());
        for l in &self.layout.common {
            let prev = common.last().map(|(_, a): &(_, Array2<f64>)| a.view()).unwrap_or(x);
            let za = self.dense(l, prev)?;
            common.push(za);
        }
        let trunk = common.last().map(|(_, a)| a.view()).unwrap_or(x);
        let mut branches = Vec::with_capacity(self.layout.branches.len());
        for layers in &self.layout.branches {
            let mut tape: Vec<(Array2<f64>, Array2<f64>)> = Vec::with_capacity(layers.len());
            for l in layers {
                let prev = tape.last().map(|(_, a)| a.view()).unwrap_or(trunk);
                let za = self.dense(l, prev)?;
                tape.push(za);
            }
            branches.push(tape);
        }
        Ok(Tape {
            input: x.to_owned(),
            common,
            branches,
        })
    }

    /// Per-branch outputs for normalized inputs (outputs in normalized units).
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Vec<Array2<f64>>> {
        let tape = self.forward_tape(x)?;
        Ok(tape.outputs().into_iter().map(|o| o.to_owned()).collect())
    }

    /// Raw inputs in, de-normalized concatenated outputs out.
    pub fn predict(&self, x_raw: ArrayView2<f64>) -> Result<Array2<f64>> {
        let x = self.input_norm.apply(x_raw);
        let tape = self.forward_tape(x.view())?;
        Ok(self.output_norm.invert(tape.concat_output().view()))
    }

    /// Reverse-mode gradient of a scalar loss given `d loss / d output`
    /// (concatenated over branches, normalized units).
    pub fn backward(&self, tape: &Tape, d_out: ArrayView2<f64>) -> Result<Vec<f64>> {
        let mut grads = vec![0.0; self.layout.n_params];
        let act = self.topology.activation;
        let trunk_in = tape
            .common
            .last()
            .map(|(_, a)| a.view())
            .unwrap_or(tape.input.view());
        let mut d_trunk = Array2::<f64>::zeros(trunk_in.raw_dim());

        let mut col = 0;
        for (layers, btape) in self.layout.branches.iter().zip(&tape.branches) {
            let width = layers.last().unwrap().fan_out;
            let mut da = d_out.slice(s![.., col..col + width]).to_owned();
            col += width;
            for (k, l) in layers.iter().enumerate().rev() {
                let prev = if k == 0 { trunk_in } else { btape[k - 1].1.view() };
                let (z, a) = &btape[k];
                da = self.layer_backward(l, act, z, a, da, prev, &mut grads)?;
            }
            d_trunk += &da;
        }
        if col != d_out.ncols() {
            return Err(Error::Shape {
                context: "output gradient",
                expected: col,
                got: d_out.ncols(),
            });
        }

        let mut da = d_trunk;
        for (k, l) in self.layout.common.iter().enumerate().rev() {
            let prev = if k == 0 { tape.input.view() } else { tape.common[k - 1].1.view() };
            let (z, a) = &tape.common[k];
            da = self.layer_backward(l, act, z, a, da, prev, &mut grads)?;
        }
        Ok(grads)
    }

    #[allow(clippy::too_many_arguments)]
    fn layer_backward(
        &self,
        l: &LayerSlot,
        act: Activation,
        z: &Array2<f64>,
        a: &Array2<f64>,
        mut da: Array2<f64>,
        prev: ArrayView2<f64>,
        grads: &mut [f64],
    ) -> Result<Array2<f64>> {
        if l.hidden {
            Zip::from(&mut da).and(z).and(a).for_each(|d, &zv, &av| *d *= act.derivative(zv, av));
        }
        let gw = prev.t().dot(&da);
        let gb: Array1<f64> = da.sum_axis(Axis(0));
        check_finite(&gw, l.index, "weight gradient")?;
        for (dst, src) in grads[l.weight_offset..l.bias_offset].iter_mut().zip(gw.iter()) {
            *dst = *src;
        }
        for (dst, src) in grads[l.bias_offset..l.bias_offset + l.fan_out].iter_mut().zip(gb.iter()) {
            *dst = *src;
        }
        Ok(da.dot(&self.weights(l).t()))
    }

    /// Loss and parameter gradient on a normalized batch.
    pub fn loss_and_grad(
        &self,
        x: ArrayView2<f64>,
        y: ArrayView2<f64>,
        loss: LossKind,
    ) -> Result<(f64, Vec<f64>)> {
        let tape = self.forward_tape(x)?;
        let out = tape.concat_output();
        if out.dim() != y.dim() {
            return Err(Error::Shape {
                context: "target batch",
                expected: out.ncols(),
                got: y.ncols(),
            });
        }
        let (value, d_out) = loss.value_and_grad(out.view(), y);
        let grads = self.backward(&tape, d_out.view())?;
        Ok((value, grads))
    }

    /// Loss on a normalized batch without gradients.
    pub fn loss(&self, x: ArrayView2<f64>, y: ArrayView2<f64>, loss: LossKind) -> Result<f64> {
        let out = self.forward_tape(x)?.concat_output();
        Ok(loss.value(out.view(), y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::topology::BranchSpec;
    use ndarray::array;

    fn single_layer(input: usize, out: usize) -> NetTopology {
        NetTopology {
            input_dim: input,
            common: vec![],
            branches: vec![BranchSpec {
                name: "out".into(),
                hidden: vec![],
                output_dim: out,
            }],
            activation: Activation::Elu,
        }
    }

    #[test]
    fn zero_parameters_give_zero_output() {
        let mut net = SurrogateNet::new(NetTopology::hybrid(super::super::Preset::Desk, 5, 15), 1).unwrap();
        net.params.iter_mut().for_each(|p| *p = 0.0);
        let x = array![[0.3, -1.0, 2.0, 0.0, 5.0]];
        for o in net.forward(x.view()).unwrap() {
            assert!(o.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn single_layer_hand_computed() {
        // W = [[1, 0.5], [0, 2]], b = [0.1, -0.2]; x = [3, -1]
        // out = [3*1 + (-1)*0, 3*0.5 + (-1)*2] + b = [3.1, -0.7]
        let mut net = SurrogateNet::new(single_layer(2, 2), 0).unwrap();
        net.params = vec![1.0, 0.5, 0.0, 2.0, 0.1, -0.2];
        let out = net.forward(array![[3.0, -1.0]].view()).unwrap();
        assert!((out[0][[0, 0]] - 3.1).abs() < 1e-15);
        assert!((out[0][[0, 1]] + 0.7).abs() < 1e-15);
    }

    #[test]
    fn shape_error_on_wrong_input() {
        let net = SurrogateNet::new(single_layer(2, 1), 0).unwrap();
        assert!(matches!(
            net.forward(array![[1.0, 2.0, 3.0]].view()),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn non_finite_reports_layer() {
        let mut net = SurrogateNet::new(single_layer(1, 1), 0).unwrap();
        net.params = vec![f64::INFINITY, 0.0];
        match net.forward(array![[1.0]].view()) {
            Err(Error::Numeric { layer, .. }) => assert_eq!(layer, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mse_output_bias_gradient_is_twice_mean_residual() {
        let net = SurrogateNet::new(single_layer(3, 1), 7).unwrap();
        let x = array![[0.1, 0.2, 0.3], [1.0, -1.0, 0.5], [0.0, 0.4, -0.2], [2.0, 0.0, 1.0]];
        let y = array![[0.5], [-0.3], [1.2], [0.0]];
        let (_, g) = net.loss_and_grad(x.view(), y.view(), LossKind::Mse).unwrap();
        let pred = net.forward(x.view()).unwrap().remove(0);
        let mean_residual = (&pred - &y).mean().unwrap();
        let l = net.layout().branches[0][0];
        assert!((g[l.bias_offset] - 2.0 * mean_residual).abs() < 1e-14);
    }
}
