//! Batch training objective: mean residual of the network's predictions over
//! a set of input samples, with its exact gradient.

use alloc::vec;
use alloc::vec::Vec;

use crate::autodiff::Tape;
use crate::error::{Error, Result};
use crate::net::{forward_on_tape, NetworkParams, OutputContext};
use crate::problem::{InputSample, PdeProblem};
use crate::residuals::{Residual, SampleData};

/// One segment's objective: the network maps each input to `R` snapshots,
/// which are scored against that sample's frozen anchor.
#[derive(Debug, Clone)]
pub struct Objective {
    residual: Residual,
    net: NetworkParams,
    ctx: OutputContext,
    inputs: Vec<Vec<f64>>,
    data: Vec<SampleData>,
    anchors: Vec<Vec<f64>>,
    anchor_grids: Vec<Vec<f64>>,
}

impl Objective {
    pub fn new(problem: &PdeProblem, net: &NetworkParams, inputs: &[InputSample], anchors: Vec<Vec<f64>>) -> Result<Self> {
        let residual = Residual::new(problem)?;
        let rep = problem.representation();
        if net.arch.snapshot_len != rep.snapshot_len() || net.arch.steps != problem.r {
            return Err(Error::Shape(alloc::format!(
                "network predicts {} x {} values, problem needs {} x {}",
                net.arch.steps,
                net.arch.snapshot_len,
                problem.r,
                rep.snapshot_len()
            )));
        }
        if net.arch.input_len != problem.input_len() {
            return Err(Error::Shape(alloc::format!(
                "network reads {} inputs, problem samples have {}",
                net.arch.input_len,
                problem.input_len()
            )));
        }
        if anchors.len() != inputs.len() {
            return Err(Error::Shape(alloc::format!("{} anchors for {} samples", anchors.len(), inputs.len())));
        }
        if let Some(a) = anchors.iter().find(|a| a.len() != rep.snapshot_len()) {
            return Err(Error::Shape(alloc::format!("anchor has {} values, expected {}", a.len(), rep.snapshot_len())));
        }
        let anchor_grids = if net.arch.anchor_input {
            let disc = problem.discretization()?;
            anchors.iter().map(|a| disc.reconstruct(a)).collect()
        } else {
            Vec::new()
        };
        let data = inputs.iter().map(|s| residual.sample_data(Some(s))).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            residual,
            ctx: OutputContext::new(&net.arch)?,
            net: NetworkParams { flat: Vec::new(), ..net.clone() },
            inputs: inputs.iter().map(|s| s.values.clone()).collect(),
            data,
            anchors,
            anchor_grids,
        })
    }

    pub fn samples(&self) -> usize {
        self.inputs.len()
    }

    pub fn anchors(&self) -> &[Vec<f64>] {
        &self.anchors
    }

    fn check_params(&self, flat: &[f64]) -> Result<()> {
        let expected = self.net.layout.last().map_or(0, |l| l.offset + l.weights + l.biases);
        if flat.len() != expected {
            return Err(Error::Shape(alloc::format!("expected {expected} parameters, got {}", flat.len())));
        }
        Ok(())
    }

    /// Residual total and parameter gradient for sample `p`.
    pub fn sample_loss_and_grad(&self, flat: &[f64], p: usize) -> Result<(f64, Vec<f64>)> {
        self.check_params(flat)?;
        let mut t = Tape::new();
        let params = t.leaf(flat.to_vec());
        let anchor = t.constant(self.anchors[p].clone());
        let steps = forward_on_tape(&mut t, &self.net, params, &self.inputs[p], Some(anchor), self.anchor_grids.get(p).map(Vec::as_slice), &self.ctx)?;
        let loss = self.residual.loss_on_tape(&mut t, &self.data[p], anchor, &steps);
        let value = t.scalar(loss);
        if !value.is_finite() {
            return Err(Error::NonFiniteLoss { sample: p });
        }
        let grad = t.backward(loss).take(params);
        Ok((value, grad))
    }

    /// Mean residual over the batch and its gradient. Per-sample results are
    /// summed in sample order.
    pub fn loss_and_grad(&self, flat: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_params(flat)?;
        let per_sample = self.per_sample(flat)?;
        let scale = 1.0 / self.samples().max(1) as f64;
        let mut total = 0.0;
        let mut grad = vec![0.0; flat.len()];
        for (v, g) in per_sample {
            total += v;
            grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
        grad.iter_mut().for_each(|g| *g *= scale);
        Ok((total * scale, grad))
    }

    #[cfg(feature = "parallel")]
    fn per_sample(&self, flat: &[f64]) -> Result<Vec<(f64, Vec<f64>)>> {
        use rayon::prelude::*;
        (0..self.samples()).into_par_iter().map(|p| self.sample_loss_and_grad(flat, p)).collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn per_sample(&self, flat: &[f64]) -> Result<Vec<(f64, Vec<f64>)>> {
        (0..self.samples()).map(|p| self.sample_loss_and_grad(flat, p)).collect()
    }

    /// Predicted snapshots (`R` per sample) for the given parameters.
    pub fn predictions(&self, flat: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
        self.check_params(flat)?;
        (0..self.samples())
            .map(|p| {
                let mut t = Tape::new();
                let params = t.constant(flat.to_vec());
                let anchor = t.constant(self.anchors[p].clone());
                let steps = forward_on_tape(&mut t, &self.net, params, &self.inputs[p], Some(anchor), self.anchor_grids.get(p).map(Vec::as_slice), &self.ctx)?;
                Ok(steps.into_iter().map(|v| t.value(v).to_vec()).collect())
            })
            .collect()
    }
}
