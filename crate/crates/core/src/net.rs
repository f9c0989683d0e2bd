//! Coefficient-predicting network `G_q`: input function values in, `R`
//! coefficient snapshots out.
//!
//! Convolution layers (1D or 2D, Swish) run over the sampled input and a head
//! turns the features into snapshots. Two heads exist:
//!
//! * dense: maps to `R · D` numbers; each block of `D` is a snapshot.
//!   Legendre snapshots are the block itself, Fourier blocks are read as free
//!   real modes.
//! * grid: a last convolution with `R` channels gives grid values for each
//!   step, which are transformed to coefficients (DFT, or the Legendre
//!   projection on the Gauss–Lobatto nodes). This head is translation
//!   equivariant and has far fewer parameters.
//!
//! Fourier outputs always pass through [`hermitian_expand`], so the
//! reconstructed field is real by construction.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::autodiff::{Conv1dShape, Conv2dShape, Padding, Tape, Var};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math;
use crate::problem::{PdeProblem, Representation};
use crate::sampling::KeyedRng;
use crate::spectral::{FourierGrid, LegendreBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Conv1dCircular,
    Conv1dZero,
    Conv2dCircular,
    Dense,
}

impl LayerKind {
    pub fn name(self) -> &'static str {
        match self {
            LayerKind::Conv1dCircular => "conv1d_circular",
            LayerKind::Conv1dZero => "conv1d_zero",
            LayerKind::Conv2dCircular => "conv2d_circular",
            LayerKind::Dense => "dense",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [LayerKind::Conv1dCircular, LayerKind::Conv1dZero, LayerKind::Conv2dCircular, LayerKind::Dense]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Swish,
    Identity,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Swish => "swish",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "swish" => Some(Activation::Swish),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    /// Output channels (conv) or features (dense).
    pub width: usize,
    /// Odd kernel size; ignored by dense layers.
    pub kernel: usize,
    pub activation: Activation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    /// Final dense layer with `R · D` outputs.
    Dense,
    /// Final convolution with `R` channels of grid values.
    Grid,
}

impl Head {
    pub fn name(self) -> &'static str {
        match self {
            Head::Dense => "dense",
            Head::Grid => "grid",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "dense" => Some(Head::Dense),
            "grid" => Some(Head::Grid),
            _ => None,
        }
    }
}

/// How a block of `D` head outputs becomes a snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputMap {
    /// The block is the snapshot (Legendre coefficients).
    Real,
    /// Legendre coefficients followed by the coefficient of the corrector
    /// for diffusivity `nu`.
    Enriched { nu: f64 },
    /// Free modes of an `n`-point 1D spectrum.
    Hermitian1d { n: usize },
    /// Free modes of an `n × n` spectrum.
    Hermitian2d { n: usize },
}

impl OutputMap {
    pub fn for_problem(problem: &PdeProblem) -> Self {
        match problem.representation() {
            Representation::Legendre { .. } => OutputMap::Real,
            Representation::LegendreEnriched { .. } => OutputMap::Enriched { nu: problem.nu },
            Representation::Fourier1d { n } => OutputMap::Hermitian1d { n },
            Representation::Fourier2d { n } => OutputMap::Hermitian2d { n },
        }
    }

    /// Real numbers per snapshot produced by the head.
    pub fn free_len(self, rep_len: usize) -> usize {
        match self {
            OutputMap::Real | OutputMap::Enriched { .. } => rep_len,
            OutputMap::Hermitian1d { n } => n,
            OutputMap::Hermitian2d { n } => n * n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkArch {
    /// Sampled input values per sample.
    pub input_len: usize,
    /// Side of the square input grid for 2D convolutions (0 for 1D inputs).
    pub grid_side: usize,
    pub layers: Vec<LayerSpec>,
    /// Snapshots per forward pass (`R`).
    pub steps: usize,
    /// Length of one output snapshot in its representation.
    pub snapshot_len: usize,
    pub output: OutputMap,
    pub head: Head,
    /// Inputs are multiplied by this before the first layer.
    pub input_scale: f64,
    /// Head outputs are multiplied by this before expansion.
    pub output_scale: f64,
    /// Add the segment's anchor snapshot to every predicted snapshot.
    pub anchor_skip: bool,
    /// Feed the anchor's grid values to the first layer as a second channel.
    pub anchor_input: bool,
    /// Feed node coordinates as extra channels: `x` on the Gauss–Lobatto
    /// nodes, `cos` and `sin` of each axis on periodic grids. Convolutions
    /// are otherwise blind to position, so they cannot place fixed spatial
    /// patterns such as a forcing term or the clustering of the nodes.
    pub coords_input: bool,
}

impl NetworkArch {
    /// `depth` convolution layers of `width` channels (circular padding on
    /// periodic problems, zero padding otherwise), Swish, then a dense head.
    pub fn for_problem(problem: &PdeProblem, width: usize, depth: usize, kernel: usize) -> Self {
        Self::with_head(problem, width, depth, kernel, Head::Dense)
    }

    pub fn with_head(problem: &PdeProblem, width: usize, depth: usize, kernel: usize, head: Head) -> Self {
        let rep = problem.representation();
        let output = OutputMap::for_problem(problem);
        let kind = match rep {
            Representation::Legendre { .. } | Representation::LegendreEnriched { .. } => LayerKind::Conv1dZero,
            Representation::Fourier1d { .. } => LayerKind::Conv1dCircular,
            Representation::Fourier2d { .. } => LayerKind::Conv2dCircular,
        };
        let mut layers: Vec<LayerSpec> =
            (0..depth).map(|_| LayerSpec { kind, width, kernel, activation: Activation::Swish }).collect();
        layers.push(match head {
            Head::Dense => LayerSpec {
                kind: LayerKind::Dense,
                width: problem.r * output.free_len(rep.snapshot_len()),
                kernel: 1,
                activation: Activation::Identity,
            },
            Head::Grid => LayerSpec { kind, width: problem.r, kernel, activation: Activation::Identity },
        });
        NetworkArch {
            input_len: problem.input_len(),
            grid_side: if problem.family.dims() == 2 { problem.n } else { 0 },
            layers,
            steps: problem.r,
            snapshot_len: rep.snapshot_len(),
            output,
            head,
            input_scale: 1.0,
            output_scale: 1.0,
            anchor_skip: true,
            anchor_input: false,
            coords_input: false,
        }
    }

    pub fn free_len(&self) -> usize {
        self.output.free_len(self.snapshot_len)
    }

    /// Input channels added by `coords_input`.
    pub fn coord_channels(&self) -> usize {
        match (self.coords_input, self.output) {
            (false, _) => 0,
            (true, OutputMap::Real | OutputMap::Enriched { .. }) => 1,
            (true, OutputMap::Hermitian1d { .. }) => 2,
            (true, OutputMap::Hermitian2d { .. }) => 4,
        }
    }

    /// Checks the layer chain and returns the parameter layout.
    pub fn layout(&self) -> Result<Vec<LayerLayout>> {
        let bad = |m: String| Err(Error::Shape(m));
        if self.layers.is_empty() {
            return bad("a network needs at least one layer".into());
        }
        if self.steps == 0 || self.input_len == 0 {
            return bad("steps and input length must be positive".into());
        }
        let expected_snapshot = match self.output {
            OutputMap::Real | OutputMap::Enriched { .. } => self.snapshot_len,
            OutputMap::Hermitian1d { n } => 2 * n,
            OutputMap::Hermitian2d { n } => 2 * n * n,
        };
        if expected_snapshot != self.snapshot_len {
            return bad(alloc::format!("snapshot length {} does not match the output map", self.snapshot_len));
        }
        let mut channels = 1 + usize::from(self.anchor_input) + self.coord_channels();
        let spatial = self.input_len;
        let mut flat = false;
        let mut offset = 0;
        let mut out = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            if l.width == 0 {
                return bad(alloc::format!("layer {i} has zero width"));
            }
            let (weights, input) = match l.kind {
                LayerKind::Dense => {
                    let n_in = if flat { channels } else { channels * spatial };
                    (n_in * l.width, n_in)
                }
                LayerKind::Conv1dCircular | LayerKind::Conv1dZero | LayerKind::Conv2dCircular => {
                    if flat {
                        return bad(alloc::format!("layer {i}: convolution after a dense layer"));
                    }
                    if l.kernel % 2 == 0 {
                        return bad(alloc::format!("layer {i}: kernel {} is not odd", l.kernel));
                    }
                    if l.kind == LayerKind::Conv2dCircular {
                        if self.grid_side * self.grid_side != self.input_len || self.grid_side == 0 {
                            return bad(alloc::format!("layer {i}: 2D convolution needs a square input grid"));
                        }
                        (l.width * channels * l.kernel * l.kernel, channels * spatial)
                    } else {
                        (l.width * channels * l.kernel, channels * spatial)
                    }
                }
            };
            out.push(LayerLayout { offset, weights, biases: l.width, in_channels: channels, input_len: input });
            offset += weights + l.width;
            channels = l.width;
            if l.kind == LayerKind::Dense {
                flat = true;
            }
        }
        let last = self.layers.last().expect("non-empty");
        if last.activation != Activation::Identity {
            return bad("the final layer must have identity activation".into());
        }
        match self.head {
            Head::Dense => {
                if last.kind != LayerKind::Dense {
                    return bad("a dense head needs a final dense layer".into());
                }
                if last.width != self.steps * self.free_len() {
                    return bad(alloc::format!(
                        "head width {} does not match R x D = {} x {}",
                        last.width,
                        self.steps,
                        self.free_len()
                    ));
                }
            }
            Head::Grid => {
                if flat {
                    return bad("a grid head needs a final convolution".into());
                }
                if last.width != self.steps {
                    return bad(alloc::format!("grid head has {} channels, expected R = {}", last.width, self.steps));
                }
                let grid_len = match self.output {
                    OutputMap::Real => self.snapshot_len + 2,
                    OutputMap::Enriched { .. } => self.snapshot_len + 1,
                    OutputMap::Hermitian1d { n } => n,
                    OutputMap::Hermitian2d { n } => n * n,
                };
                if grid_len != self.input_len {
                    return bad("a grid head needs inputs on the solution grid (plain Legendre or Fourier)".into());
                }
            }
        }
        Ok(out)
    }

    pub fn param_count(&self) -> Result<usize> {
        Ok(self.layout()?.last().map_or(0, |l| l.offset + l.weights + l.biases))
    }
}

/// Where one layer's weights and biases sit in the flat vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerLayout {
    pub offset: usize,
    pub weights: usize,
    pub biases: usize,
    pub in_channels: usize,
    /// Flattened input length of the layer.
    pub input_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub arch: NetworkArch,
    pub layout: Vec<LayerLayout>,
    pub flat: Vec<f64>,
}

impl NetworkParams {
    pub fn zeros(arch: NetworkArch) -> Result<Self> {
        let layout = arch.layout()?;
        let len = layout.last().map_or(0, |l| l.offset + l.weights + l.biases);
        Ok(Self { arch, layout, flat: vec![0.0; len] })
    }

    /// Fan-in Gaussian weights (`std = 1/sqrt(fan_in)`), zero biases.
    pub fn init(arch: NetworkArch, seed: u64) -> Result<Self> {
        let mut p = Self::zeros(arch)?;
        for (i, (spec, l)) in p.arch.layers.iter().zip(&p.layout).enumerate() {
            let fan_in = match spec.kind {
                LayerKind::Dense => l.input_len,
                LayerKind::Conv1dCircular | LayerKind::Conv1dZero => l.in_channels * spec.kernel,
                LayerKind::Conv2dCircular => l.in_channels * spec.kernel * spec.kernel,
            };
            let std = 1.0 / math::sqrt(fan_in as f64);
            let mut rng = KeyedRng::new(seed, i as u64);
            for (k, w) in p.flat[l.offset..l.offset + l.weights].iter_mut().enumerate() {
                *w = std * rng.normal(k);
            }
        }
        Ok(p)
    }

    pub fn from_flat(arch: NetworkArch, flat: Vec<f64>) -> Result<Self> {
        let mut p = Self::zeros(arch)?;
        if flat.len() != p.flat.len() {
            return Err(Error::Shape(alloc::format!("expected {} parameters, got {}", p.flat.len(), flat.len())));
        }
        p.flat = flat;
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.flat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }
}

/// Records one forward pass on `tape` and returns the `R` snapshot nodes.
///
/// `params` must be a node holding the flat parameter vector of `net`.
/// `anchor` is added to every snapshot when the architecture asks for it.
pub fn forward_on_tape(
    tape: &mut Tape,
    net: &NetworkParams,
    params: Var,
    input: &[f64],
    anchor: Option<Var>,
    anchor_grid: Option<&[f64]>,
    ctx: &OutputContext,
) -> Result<Vec<Var>> {
    let arch = &net.arch;
    if input.len() != arch.input_len {
        return Err(Error::Shape(alloc::format!("network expects {} inputs, got {}", arch.input_len, input.len())));
    }
    let mut scaled: Vec<f64> = input.iter().map(|v| v * arch.input_scale).collect();
    if arch.anchor_input {
        let g = anchor_grid.ok_or_else(|| Error::Shape("this network reads the anchor's grid values".into()))?;
        if g.len() != input.len() {
            return Err(Error::Shape(alloc::format!("anchor grid has {} values, expected {}", g.len(), input.len())));
        }
        scaled.extend(g.iter().map(|v| v * arch.input_scale));
    }
    if arch.coords_input {
        let c = ctx.coords.as_ref().ok_or_else(|| Error::Shape("output context has no node coordinates".into()))?;
        if c.len() != arch.coord_channels() * input.len() {
            return Err(Error::Shape(alloc::format!("{} node coordinates for {} inputs", c.len(), input.len())));
        }
        scaled.extend_from_slice(c);
    }
    let mut x = tape.constant(scaled);
    for (spec, l) in arch.layers.iter().zip(&net.layout) {
        x = match spec.kind {
            LayerKind::Dense => tape.dense(params, l.offset, l.input_len, spec.width, x),
            LayerKind::Conv1dCircular | LayerKind::Conv1dZero => {
                let padding = if spec.kind == LayerKind::Conv1dZero { Padding::Zero } else { Padding::Circular };
                let shape = Conv1dShape {
                    cin: l.in_channels,
                    cout: spec.width,
                    kernel: spec.kernel,
                    len: arch.input_len,
                    padding,
                };
                tape.conv1d(params, l.offset, shape, x)
            }
            LayerKind::Conv2dCircular => {
                let shape = Conv2dShape { cin: l.in_channels, cout: spec.width, kernel: spec.kernel, n: arch.grid_side };
                tape.conv2d(params, l.offset, shape, x)
            }
        };
        if spec.activation == Activation::Swish {
            x = tape.swish(x);
        }
    }
    if arch.output_scale != 1.0 {
        x = tape.scale(x, arch.output_scale);
    }
    let d = match arch.head {
        Head::Dense => arch.free_len(),
        Head::Grid => arch.input_len,
    };
    let missing = || Error::Shape("output context does not match the network".into());
    let mut out = Vec::with_capacity(arch.steps);
    for r in 0..arch.steps {
        let block = tape.slice(x, r * d, d);
        let mut snap = match (arch.head, arch.output) {
            (Head::Dense, OutputMap::Real | OutputMap::Enriched { .. }) => block,
            (Head::Grid, OutputMap::Real | OutputMap::Enriched { .. }) => {
                let m = ctx.projection.as_ref().ok_or_else(missing)?;
                tape.matvec(m.clone(), block)
            }
            (Head::Dense, _) => {
                let g = ctx.grid.as_ref().ok_or_else(missing)?;
                tape.herm_expand(g.clone(), block)
            }
            (Head::Grid, _) => {
                let g = ctx.grid.as_ref().ok_or_else(missing)?;
                let c = tape.to_complex(block);
                let f = tape.dft(g.clone(), c);
                let free = tape.herm_restrict(g.clone(), f);
                tape.herm_expand(g.clone(), free)
            }
        };
        if arch.anchor_skip {
            if let Some(a) = anchor {
                snap = tape.add(snap, a);
            }
        }
        out.push(snap);
    }
    Ok(out)
}

/// Fixed operators the head needs: the Fourier grid of Fourier outputs and
/// the nodal-to-coefficient projection of a Legendre grid head, and the node
/// coordinates of a network with `coords_input`.
#[derive(Debug, Clone, Default)]
pub struct OutputContext {
    pub grid: Option<Arc<FourierGrid>>,
    pub projection: Option<Arc<Matrix>>,
    pub coords: Option<Arc<[f64]>>,
}

impl OutputContext {
    pub fn new(arch: &NetworkArch) -> Result<Self> {
        let mut ctx = Self::outputs(arch)?;
        if arch.coords_input {
            ctx.coords = Some(match arch.output {
                // Inputs of Legendre families sit on the plain basis's nodes.
                OutputMap::Real | OutputMap::Enriched { .. } => {
                    LegendreBasis::dirichlet(arch.input_len.saturating_sub(2))?.nodes().into()
                }
                OutputMap::Hermitian1d { n } => {
                    let x = FourierGrid::new(n, 1)?.nodes();
                    x.iter().map(|v| math::cos(*v)).chain(x.iter().map(|v| math::sin(*v))).collect()
                }
                OutputMap::Hermitian2d { n } => {
                    let nodes = FourierGrid::new(n, 1)?.nodes();
                    let x = &nodes;
                    let axis = |f: fn(f64) -> f64, first: bool| {
                        (0..n * n).map(move |i| f(x[if first { i / n } else { i % n }]))
                    };
                    axis(math::cos, true)
                        .chain(axis(math::sin, true))
                        .chain(axis(math::cos, false))
                        .chain(axis(math::sin, false))
                        .collect()
                }
            });
        }
        Ok(ctx)
    }

    fn outputs(arch: &NetworkArch) -> Result<Self> {
        Ok(match arch.output {
            OutputMap::Real if arch.head == Head::Grid => {
                let basis = LegendreBasis::dirichlet(arch.snapshot_len)?;
                let m = basis.n_nodes();
                let mut p = Matrix::zeros(arch.snapshot_len, m);
                let mut e = vec![0.0; m];
                for j in 0..m {
                    e[j] = 1.0;
                    for (i, v) in basis.project(&e)?.into_iter().enumerate() {
                        p.set(i, j, v);
                    }
                    e[j] = 0.0;
                }
                Self { projection: Some(Arc::new(p)), ..Self::default() }
            }
            OutputMap::Enriched { nu } if arch.head == Head::Grid => {
                // Grid values describe the outer solution, including its value
                // v₀ at x = -1. The corrector coefficient is -v₀ and the
                // polynomial part is the projection of v + v₀ ψ_outer, where
                // ψ_outer is the corrector without its exponential layer.
                let n = arch.snapshot_len - 1;
                let basis = LegendreBasis::dirichlet(n)?;
                let m = basis.n_nodes();
                let slope = -math::expm1(-2.0 / nu) / 2.0;
                let outer: Vec<f64> = basis.nodes().iter().map(|&x| -(1.0 - slope * (x + 1.0))).collect();
                let mut p = Matrix::zeros(arch.snapshot_len, m);
                for j in 0..m {
                    let mut e = vec![0.0; m];
                    e[j] = 1.0;
                    if j == 0 {
                        e.iter_mut().zip(&outer).for_each(|(v, o)| *v += o);
                    }
                    for (i, v) in basis.project(&e)?.into_iter().enumerate() {
                        p.set(i, j, v);
                    }
                }
                p.set(n, 0, -1.0);
                Self { projection: Some(Arc::new(p)), ..Self::default() }
            }
            OutputMap::Real | OutputMap::Enriched { .. } => Self::default(),
            OutputMap::Hermitian1d { n } => Self { grid: Some(Arc::new(FourierGrid::new(n, 1)?)), ..Self::default() },
            OutputMap::Hermitian2d { n } => Self { grid: Some(Arc::new(FourierGrid::new(n, 2)?)), ..Self::default() },
        })
    }
}

/// Forward pass for one sample, returning the `R` predicted snapshots.
/// `anchor_grid` (the anchor's grid values) is only read by networks with
/// `anchor_input`.
pub fn forward(
    net: &NetworkParams,
    input: &[f64],
    anchor: Option<&[f64]>,
    anchor_grid: Option<&[f64]>,
) -> Result<Vec<Vec<f64>>> {
    let ctx = OutputContext::new(&net.arch)?;
    let mut tape = Tape::new();
    let p = tape.constant(net.flat.clone());
    let a = match anchor {
        Some(a) if a.len() != net.arch.snapshot_len => {
            return Err(Error::Shape(alloc::format!(
                "anchor has {} values, expected {}",
                a.len(),
                net.arch.snapshot_len
            )))
        }
        Some(a) => Some(tape.constant(a.to_vec())),
        None => None,
    };
    let out = forward_on_tape(&mut tape, net, p, input, a, anchor_grid, &ctx)?;
    Ok(out.into_iter().map(|v| tape.value(v).to_vec()).collect())
}

/// Forward passes over a batch (`P × R × snapshot`) of networks that do not
/// read the anchor's grid values.
pub fn forward_batch(net: &NetworkParams, inputs: &[&[f64]], anchors: Option<&[Vec<f64>]>) -> Result<Vec<Vec<Vec<f64>>>> {
    inputs
        .iter()
        .enumerate()
        .map(|(p, x)| forward(net, x, anchors.map(|a| a[p].as_slice()), None))
        .collect()
}

/// `(spectrum index, carries an imaginary part)` for each free mode, in
/// storage order: every self-conjugate mode contributes its real part, and
/// of each conjugate pair the first index in storage order contributes real
/// and imaginary parts. In 1D this is `[mean, (re, im) for 1..N/2-1, Nyquist]`.
pub fn free_mode_slots(grid: &FourierGrid) -> Vec<(usize, bool)> {
    (0..grid.len())
        .filter_map(|i| {
            let c = grid.conj_index(i);
            if c == i {
                Some((i, false))
            } else if i < c {
                Some((i, true))
            } else {
                None
            }
        })
        .collect()
}

/// Free real modes to a full interleaved spectrum with `α_{-ξ} = conj(α_ξ)`.
pub fn hermitian_expand(grid: &FourierGrid, free: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 2 * grid.len()];
    let mut at = 0;
    for (i, has_im) in free_mode_slots(grid) {
        let re = free[at];
        out[2 * i] = re;
        if has_im {
            let im = free[at + 1];
            let c = grid.conj_index(i);
            out[2 * i + 1] = im;
            out[2 * c] = re;
            out[2 * c + 1] = -im;
            at += 2;
        } else {
            at += 1;
        }
    }
    assert_eq!(at, free.len(), "free-mode vector has the wrong length");
    out
}

/// Adds the adjoint of [`hermitian_expand`] applied to `g` into `out`.
pub fn hermitian_expand_adjoint(grid: &FourierGrid, g: &[f64], out: &mut [f64]) {
    let mut at = 0;
    for (i, has_im) in free_mode_slots(grid) {
        if has_im {
            let c = grid.conj_index(i);
            out[at] += g[2 * i] + g[2 * c];
            out[at + 1] += g[2 * i + 1] - g[2 * c + 1];
            at += 2;
        } else {
            out[at] += g[2 * i];
            at += 1;
        }
    }
}

/// Free real modes of an interleaved spectrum; inverse of [`hermitian_expand`].
pub fn hermitian_restrict(grid: &FourierGrid, spectrum: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    for (i, has_im) in free_mode_slots(grid) {
        out.push(spectrum[2 * i]);
        if has_im {
            out.push(spectrum[2 * i + 1]);
        }
    }
    out
}

/// Adds the adjoint of [`hermitian_restrict`] applied to `g` into `out`.
pub fn hermitian_restrict_adjoint(grid: &FourierGrid, g: &[f64], out: &mut [f64]) {
    let mut at = 0;
    for (i, has_im) in free_mode_slots(grid) {
        out[2 * i] += g[at];
        at += 1;
        if has_im {
            out[2 * i + 1] += g[at];
            at += 1;
        }
    }
}
