//! Tape-based reverse-mode differentiation over a fixed set of vector
//! primitives.
//!
//! Values are flat `f64` vectors. Complex vectors are stored interleaved
//! `(re, im)`; their gradients use the same layout, i.e. the pair
//! `(∂L/∂re, ∂L/∂im)`. For a complex-linear map `y = A x` the adjoint is then
//! `A^H` applied to the complex gradient, which is what the Fourier and
//! complex-multiply rules below implement.
//!
//! Network layers read their weights from a slice of a parameter leaf, so the
//! gradient of the whole flat parameter vector comes out of one leaf.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linalg::Matrix;
use crate::math;
use crate::spectral::FourierGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    Zero,
    Circular,
}

/// Shape of a 1D convolution: channel-major input `cin × len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conv1dShape {
    pub cin: usize,
    pub cout: usize,
    pub kernel: usize,
    pub len: usize,
    pub padding: Padding,
}

/// Shape of a circular 2D convolution on `cin × n × n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conv2dShape {
    pub cin: usize,
    pub cout: usize,
    pub kernel: usize,
    pub n: usize,
}

#[derive(Debug, Clone)]
enum Op {
    Input,
    Add(Var, Var),
    Sub(Var, Var),
    Scale(Var, f64),
    Mul(Var, Var),
    MulConst(Var, Arc<[f64]>),
    CMul(Var, Var),
    CMulConst(Var, Arc<[Complex64]>),
    MatVec(Arc<Matrix>, Var),
    Fourier { grid: Arc<FourierGrid>, x: Var, inverse: bool },
    Re(Var),
    ToComplex(Var),
    Swish(Var),
    SumSq(Var),
    Sum(Var),
    Slice(Var, usize),
    Concat(Vec<Var>),
    Dense { params: Var, offset: usize, n_in: usize, n_out: usize, x: Var },
    Conv1d { params: Var, offset: usize, shape: Conv1dShape, x: Var },
    Conv2d { params: Var, offset: usize, shape: Conv2dShape, x: Var },
    HermExpand { grid: Arc<FourierGrid>, x: Var },
    HermRestrict { grid: Arc<FourierGrid>, x: Var },
}

#[derive(Debug, Clone)]
struct Node {
    op: Op,
    value: Vec<f64>,
    requires_grad: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients from one backward sweep, indexed by [`Var`].
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
    lens: Vec<usize>,
}

impl Gradients {
    /// Gradient with respect to `v` (zeros when `v` does not reach the output).
    pub fn wrt(&self, v: Var) -> Vec<f64> {
        self.grads[v.0].clone().unwrap_or_else(|| vec![0.0; self.lens[v.0]])
    }

    pub fn take(&mut self, v: Var) -> Vec<f64> {
        self.grads[v.0].take().unwrap_or_else(|| vec![0.0; self.lens[v.0]])
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + math::exp(-x))
    } else {
        let e = math::exp(x);
        e / (1.0 + e)
    }
}

#[inline]
fn cget(v: &[f64], i: usize) -> Complex64 {
    Complex64::new(v[2 * i], v[2 * i + 1])
}

#[inline]
fn cset(v: &mut [f64], i: usize, z: Complex64) {
    v[2 * i] = z.re;
    v[2 * i + 1] = z.im;
}

#[inline]
fn cadd(v: &mut [f64], i: usize, z: Complex64) {
    v[2 * i] += z.re;
    v[2 * i + 1] += z.im;
}

fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[0]
    }

    fn push(&mut self, op: Op, value: Vec<f64>, requires_grad: bool) -> Var {
        self.nodes.push(Node { op, value, requires_grad });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn check_same(&self, a: Var, b: Var) {
        assert_eq!(self.value(a).len(), self.value(b).len(), "operand length mismatch");
    }

    /// Differentiable input.
    pub fn leaf(&mut self, value: Vec<f64>) -> Var {
        self.push(Op::Input, value, true)
    }

    /// Input treated as a constant: no gradient flows into it.
    pub fn constant(&mut self, value: Vec<f64>) -> Var {
        self.push(Op::Input, value, false)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.check_same(a, b);
        let v = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x + y).collect();
        let rg = self.rg(a) || self.rg(b);
        self.push(Op::Add(a, b), v, rg)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.check_same(a, b);
        let v = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x - y).collect();
        let rg = self.rg(a) || self.rg(b);
        self.push(Op::Sub(a, b), v, rg)
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let v = self.value(a).iter().map(|x| x * s).collect();
        let rg = self.rg(a);
        self.push(Op::Scale(a, s), v, rg)
    }

    /// `a + s b`.
    pub fn axpy(&mut self, a: Var, s: f64, b: Var) -> Var {
        let sb = self.scale(b, s);
        self.add(a, sb)
    }

    /// Real elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.check_same(a, b);
        let v = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x * y).collect();
        let rg = self.rg(a) || self.rg(b);
        self.push(Op::Mul(a, b), v, rg)
    }

    /// Real elementwise product with a fixed vector.
    pub fn mul_const(&mut self, a: Var, c: Arc<[f64]>) -> Var {
        assert_eq!(self.value(a).len(), c.len(), "operand length mismatch");
        let v = self.value(a).iter().zip(c.iter()).map(|(x, y)| x * y).collect();
        let rg = self.rg(a);
        self.push(Op::MulConst(a, c), v, rg)
    }

    /// Complex elementwise product of interleaved vectors.
    pub fn cmul(&mut self, a: Var, b: Var) -> Var {
        self.check_same(a, b);
        let (x, y) = (self.value(a), self.value(b));
        let mut v = vec![0.0; x.len()];
        for i in 0..x.len() / 2 {
            cset(&mut v, i, cget(x, i) * cget(y, i));
        }
        let rg = self.rg(a) || self.rg(b);
        self.push(Op::CMul(a, b), v, rg)
    }

    /// Complex elementwise product with a fixed vector.
    pub fn cmul_const(&mut self, a: Var, c: Arc<[Complex64]>) -> Var {
        let x = self.value(a);
        assert_eq!(x.len(), 2 * c.len(), "operand length mismatch");
        let mut v = vec![0.0; x.len()];
        for (i, ci) in c.iter().enumerate() {
            cset(&mut v, i, cget(x, i) * ci);
        }
        let rg = self.rg(a);
        self.push(Op::CMulConst(a, c), v, rg)
    }

    /// Fixed real matrix times a real vector.
    pub fn matvec(&mut self, m: Arc<Matrix>, a: Var) -> Var {
        assert_eq!(m.cols(), self.value(a).len(), "matvec shape mismatch");
        let v = m.matvec(self.value(a));
        let rg = self.rg(a);
        self.push(Op::MatVec(m, a), v, rg)
    }

    fn fourier(&mut self, grid: Arc<FourierGrid>, a: Var, inverse: bool) -> Var {
        let x = self.value(a);
        assert_eq!(x.len(), 2 * grid.len(), "transform length mismatch");
        let mut buf: Vec<Complex64> = (0..grid.len()).map(|i| cget(x, i)).collect();
        grid.transform(&mut buf, inverse);
        let s = if inverse { grid.inverse_scale() } else { grid.forward_scale() };
        let v = buf.iter().flat_map(|z| [z.re * s, z.im * s]).collect();
        let rg = self.rg(a);
        self.push(Op::Fourier { grid, x: a, inverse }, v, rg)
    }

    /// `F` of a complex (interleaved) grid vector.
    pub fn dft(&mut self, grid: Arc<FourierGrid>, a: Var) -> Var {
        self.fourier(grid, a, false)
    }

    /// `F⁻¹` of a complex (interleaved) spectrum.
    pub fn idft(&mut self, grid: Arc<FourierGrid>, a: Var) -> Var {
        self.fourier(grid, a, true)
    }

    /// Real parts of an interleaved vector.
    pub fn re(&mut self, a: Var) -> Var {
        let v = self.value(a).chunks_exact(2).map(|c| c[0]).collect();
        let rg = self.rg(a);
        self.push(Op::Re(a), v, rg)
    }

    /// Real vector to interleaved complex with zero imaginary parts.
    pub fn to_complex(&mut self, a: Var) -> Var {
        let v = self.value(a).iter().flat_map(|&x| [x, 0.0]).collect();
        let rg = self.rg(a);
        self.push(Op::ToComplex(a), v, rg)
    }

    /// `x σ(x)`.
    pub fn swish(&mut self, a: Var) -> Var {
        let v = self.value(a).iter().map(|&x| x * sigmoid(x)).collect();
        let rg = self.rg(a);
        self.push(Op::Swish(a), v, rg)
    }

    /// `Σ x²` as a scalar.
    pub fn sum_sq(&mut self, a: Var) -> Var {
        let v = vec![self.value(a).iter().map(|x| x * x).sum()];
        let rg = self.rg(a);
        self.push(Op::SumSq(a), v, rg)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let v = vec![self.value(a).iter().sum()];
        let rg = self.rg(a);
        self.push(Op::Sum(a), v, rg)
    }

    pub fn slice(&mut self, a: Var, start: usize, len: usize) -> Var {
        let v = self.value(a)[start..start + len].to_vec();
        let rg = self.rg(a);
        self.push(Op::Slice(a, start), v, rg)
    }

    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let mut v = Vec::new();
        for p in parts {
            v.extend_from_slice(self.value(*p));
        }
        let rg = parts.iter().any(|p| self.rg(*p));
        self.push(Op::Concat(parts.to_vec()), v, rg)
    }

    /// `W x + b` with `W` (`n_out × n_in`, row-major) then `b` stored at
    /// `params[offset..]`.
    pub fn dense(&mut self, params: Var, offset: usize, n_in: usize, n_out: usize, x: Var) -> Var {
        let p = self.value(params);
        let xin = self.value(x);
        assert_eq!(xin.len(), n_in, "dense input length mismatch");
        assert!(offset + n_in * n_out + n_out <= p.len(), "dense parameters out of range");
        let w = &p[offset..offset + n_in * n_out];
        let b = &p[offset + n_in * n_out..offset + n_in * n_out + n_out];
        let v = (0..n_out).map(|o| b[o] + crate::linalg::dot(&w[o * n_in..(o + 1) * n_in], xin)).collect();
        let rg = self.rg(params) || self.rg(x);
        self.push(Op::Dense { params, offset, n_in, n_out, x }, v, rg)
    }

    /// Same-length 1D convolution; weights `[cout][cin][kernel]` then bias `[cout]`.
    pub fn conv1d(&mut self, params: Var, offset: usize, shape: Conv1dShape, x: Var) -> Var {
        let Conv1dShape { cin, cout, kernel, len, padding } = shape;
        let p = self.value(params);
        let xin = self.value(x);
        assert_eq!(xin.len(), cin * len, "conv1d input length mismatch");
        let nw = cout * cin * kernel;
        let w = &p[offset..offset + nw];
        let b = &p[offset + nw..offset + nw + cout];
        let half = (kernel / 2) as isize;
        let mut v = vec![0.0; cout * len];
        for o in 0..cout {
            let out = &mut v[o * len..(o + 1) * len];
            out.iter_mut().for_each(|y| *y = b[o]);
            for c in 0..cin {
                let xc = &xin[c * len..(c + 1) * len];
                for t in 0..kernel {
                    let wt = w[(o * cin + c) * kernel + t];
                    let shift = t as isize - half;
                    for (i, y) in out.iter_mut().enumerate() {
                        let j = i as isize + shift;
                        let xv = match padding {
                            Padding::Circular => xc[wrap(j, len)],
                            Padding::Zero if j < 0 || j >= len as isize => continue,
                            Padding::Zero => xc[j as usize],
                        };
                        *y += wt * xv;
                    }
                }
            }
        }
        let rg = self.rg(params) || self.rg(x);
        self.push(Op::Conv1d { params, offset, shape, x }, v, rg)
    }

    /// Circular 2D convolution; weights `[cout][cin][kernel][kernel]` then bias.
    pub fn conv2d(&mut self, params: Var, offset: usize, shape: Conv2dShape, x: Var) -> Var {
        let Conv2dShape { cin, cout, kernel, n } = shape;
        let p = self.value(params);
        let xin = self.value(x);
        assert_eq!(xin.len(), cin * n * n, "conv2d input length mismatch");
        let kk = kernel * kernel;
        let nw = cout * cin * kk;
        let w = &p[offset..offset + nw];
        let b = &p[offset + nw..offset + nw + cout];
        let half = (kernel / 2) as isize;
        let nn = n * n;
        let mut v = vec![0.0; cout * nn];
        for o in 0..cout {
            let out = &mut v[o * nn..(o + 1) * nn];
            out.iter_mut().for_each(|y| *y = b[o]);
            for c in 0..cin {
                let xc = &xin[c * nn..(c + 1) * nn];
                for s in 0..kernel {
                    for t in 0..kernel {
                        let wt = w[(o * cin + c) * kk + s * kernel + t];
                        for i in 0..n {
                            let ii = wrap(i as isize + s as isize - half, n);
                            let row = &xc[ii * n..(ii + 1) * n];
                            let orow = &mut out[i * n..(i + 1) * n];
                            for (j, y) in orow.iter_mut().enumerate() {
                                *y += wt * row[wrap(j as isize + t as isize - half, n)];
                            }
                        }
                    }
                }
            }
        }
        let rg = self.rg(params) || self.rg(x);
        self.push(Op::Conv2d { params, offset, shape, x }, v, rg)
    }

    /// Free real modes to a full interleaved spectrum with exact Hermitian
    /// symmetry (see [`crate::net::free_mode_slots`] for the layout).
    pub fn herm_expand(&mut self, grid: Arc<FourierGrid>, x: Var) -> Var {
        let v = crate::net::hermitian_expand(&grid, self.value(x));
        let rg = self.rg(x);
        self.push(Op::HermExpand { grid, x }, v, rg)
    }

    /// Free real modes of an interleaved spectrum (inverse of [`Tape::herm_expand`]
    /// on Hermitian input).
    pub fn herm_restrict(&mut self, grid: Arc<FourierGrid>, x: Var) -> Var {
        let v = crate::net::hermitian_restrict(&grid, self.value(x));
        let rg = self.rg(x);
        self.push(Op::HermRestrict { grid, x }, v, rg)
    }

    /// Gradients of the scalar `output` with respect to every node.
    pub fn backward(&self, output: Var) -> Gradients {
        assert_eq!(self.value(output).len(), 1, "backward needs a scalar output");
        let n = self.nodes.len();
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; n];
        grads[output.0] = Some(vec![1.0]);
        for i in (0..=output.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            self.propagate(i, &g, &mut grads);
            grads[i] = Some(g);
        }
        Gradients { grads, lens: self.nodes.iter().map(|n| n.value.len()).collect() }
    }

    fn slot<'a>(&self, grads: &'a mut [Option<Vec<f64>>], v: Var) -> Option<&'a mut Vec<f64>> {
        if !self.rg(v) {
            return None;
        }
        let len = self.nodes[v.0].value.len();
        Some(grads[v.0].get_or_insert_with(|| vec![0.0; len]))
    }

    fn propagate(&self, i: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[i];
        if !node.requires_grad {
            return;
        }
        match &node.op {
            Op::Input => {}
            Op::Add(a, b) => {
                for (v, s) in [(*a, 1.0), (*b, 1.0)] {
                    if let Some(ga) = self.slot(grads, v) {
                        ga.iter_mut().zip(g).for_each(|(x, y)| *x += s * y);
                    }
                }
            }
            Op::Sub(a, b) => {
                for (v, s) in [(*a, 1.0), (*b, -1.0)] {
                    if let Some(ga) = self.slot(grads, v) {
                        ga.iter_mut().zip(g).for_each(|(x, y)| *x += s * y);
                    }
                }
            }
            Op::Scale(a, s) => {
                if let Some(ga) = self.slot(grads, *a) {
                    ga.iter_mut().zip(g).for_each(|(x, y)| *x += s * y);
                }
            }
            Op::Mul(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                if let Some(ga) = self.slot(grads, *a) {
                    ga.iter_mut().zip(g).zip(vb).for_each(|((x, y), w)| *x += y * w);
                }
                if let Some(gb) = self.slot(grads, *b) {
                    gb.iter_mut().zip(g).zip(va).for_each(|((x, y), w)| *x += y * w);
                }
            }
            Op::MulConst(a, c) => {
                if let Some(ga) = self.slot(grads, *a) {
                    ga.iter_mut().zip(g).zip(c.iter()).for_each(|((x, y), w)| *x += y * w);
                }
            }
            Op::CMul(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                if let Some(ga) = self.slot(grads, *a) {
                    for k in 0..g.len() / 2 {
                        cadd(ga, k, cget(g, k) * cget(vb, k).conj());
                    }
                }
                if let Some(gb) = self.slot(grads, *b) {
                    for k in 0..g.len() / 2 {
                        cadd(gb, k, cget(g, k) * cget(va, k).conj());
                    }
                }
            }
            Op::CMulConst(a, c) => {
                if let Some(ga) = self.slot(grads, *a) {
                    for (k, ck) in c.iter().enumerate() {
                        cadd(ga, k, cget(g, k) * ck.conj());
                    }
                }
            }
            Op::MatVec(m, a) => {
                if let Some(ga) = self.slot(grads, *a) {
                    ga.iter_mut().zip(m.matvec_t(g)).for_each(|(x, y)| *x += y);
                }
            }
            Op::Fourier { grid, x, inverse } => {
                if let Some(gx) = self.slot(grads, *x) {
                    let mut buf: Vec<Complex64> = (0..grid.len()).map(|k| cget(g, k)).collect();
                    grid.transform(&mut buf, !inverse);
                    let s = if *inverse { grid.inverse_scale() } else { grid.forward_scale() };
                    for (k, z) in buf.iter().enumerate() {
                        cadd(gx, k, z * s);
                    }
                }
            }
            Op::Re(a) => {
                if let Some(ga) = self.slot(grads, *a) {
                    for (k, y) in g.iter().enumerate() {
                        ga[2 * k] += y;
                    }
                }
            }
            Op::ToComplex(a) => {
                if let Some(ga) = self.slot(grads, *a) {
                    for (k, x) in ga.iter_mut().enumerate() {
                        *x += g[2 * k];
                    }
                }
            }
            Op::Swish(a) => {
                let va = self.value(*a);
                if let Some(ga) = self.slot(grads, *a) {
                    for ((x, y), &z) in ga.iter_mut().zip(g).zip(va) {
                        let s = sigmoid(z);
                        *x += y * (s + z * s * (1.0 - s));
                    }
                }
            }
            Op::SumSq(a) => {
                let va = self.value(*a);
                if let Some(ga) = self.slot(grads, *a) {
                    ga.iter_mut().zip(va).for_each(|(x, z)| *x += 2.0 * z * g[0]);
                }
            }
            Op::Sum(a) => {
                if let Some(ga) = self.slot(grads, *a) {
                    ga.iter_mut().for_each(|x| *x += g[0]);
                }
            }
            Op::Slice(a, start) => {
                if let Some(ga) = self.slot(grads, *a) {
                    ga[*start..*start + g.len()].iter_mut().zip(g).for_each(|(x, y)| *x += y);
                }
            }
            Op::Concat(parts) => {
                let mut at = 0;
                for p in parts {
                    let len = self.value(*p).len();
                    if let Some(gp) = self.slot(grads, *p) {
                        gp.iter_mut().zip(&g[at..at + len]).for_each(|(x, y)| *x += y);
                    }
                    at += len;
                }
            }
            Op::Dense { params, offset, n_in, n_out, x } => {
                let (n_in, n_out, offset) = (*n_in, *n_out, *offset);
                let xin = self.value(*x);
                let p = self.value(*params);
                if let Some(gx) = self.slot(grads, *x) {
                    let w = &p[offset..offset + n_in * n_out];
                    for (o, go) in g.iter().enumerate() {
                        if *go != 0.0 {
                            gx.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]).for_each(|(a, b)| *a += go * b);
                        }
                    }
                }
                if let Some(gp) = self.slot(grads, *params) {
                    let (gw, rest) = gp[offset..].split_at_mut(n_in * n_out);
                    for (o, go) in g.iter().enumerate() {
                        gw[o * n_in..(o + 1) * n_in].iter_mut().zip(xin).for_each(|(a, b)| *a += go * b);
                        rest[o] += go;
                    }
                }
            }
            Op::Conv1d { params, offset, shape, x } => self.conv1d_backward(*params, *offset, *shape, *x, g, grads),
            Op::Conv2d { params, offset, shape, x } => self.conv2d_backward(*params, *offset, *shape, *x, g, grads),
            Op::HermExpand { grid, x } => {
                if let Some(gx) = self.slot(grads, *x) {
                    crate::net::hermitian_expand_adjoint(grid, g, gx);
                }
            }
            Op::HermRestrict { grid, x } => {
                if let Some(gx) = self.slot(grads, *x) {
                    crate::net::hermitian_restrict_adjoint(grid, g, gx);
                }
            }
        }
    }

    fn conv1d_backward(
        &self,
        params: Var,
        offset: usize,
        shape: Conv1dShape,
        x: Var,
        g: &[f64],
        grads: &mut [Option<Vec<f64>>],
    ) {
        let Conv1dShape { cin, cout, kernel, len, padding } = shape;
        let xin = self.value(x);
        let p = self.value(params);
        let nw = cout * cin * kernel;
        let half = (kernel / 2) as isize;
        let index = |i: usize, t: usize| -> Option<usize> {
            let j = i as isize + t as isize - half;
            match padding {
                Padding::Circular => Some(wrap(j, len)),
                Padding::Zero if j < 0 || j >= len as isize => None,
                Padding::Zero => Some(j as usize),
            }
        };
        if let Some(gx) = self.slot(grads, x) {
            let w = &p[offset..offset + nw];
            for o in 0..cout {
                let go = &g[o * len..(o + 1) * len];
                for c in 0..cin {
                    let gxc = &mut gx[c * len..(c + 1) * len];
                    for t in 0..kernel {
                        let wt = w[(o * cin + c) * kernel + t];
                        for (i, gi) in go.iter().enumerate() {
                            if let Some(j) = index(i, t) {
                                gxc[j] += wt * gi;
                            }
                        }
                    }
                }
            }
        }
        if let Some(gp) = self.slot(grads, params) {
            let (gw, gb) = gp[offset..offset + nw + cout].split_at_mut(nw);
            for o in 0..cout {
                let go = &g[o * len..(o + 1) * len];
                gb[o] += go.iter().sum::<f64>();
                for c in 0..cin {
                    let xc = &xin[c * len..(c + 1) * len];
                    for t in 0..kernel {
                        let mut acc = 0.0;
                        for (i, gi) in go.iter().enumerate() {
                            if let Some(j) = index(i, t) {
                                acc += gi * xc[j];
                            }
                        }
                        gw[(o * cin + c) * kernel + t] += acc;
                    }
                }
            }
        }
    }

    fn conv2d_backward(
        &self,
        params: Var,
        offset: usize,
        shape: Conv2dShape,
        x: Var,
        g: &[f64],
        grads: &mut [Option<Vec<f64>>],
    ) {
        let Conv2dShape { cin, cout, kernel, n } = shape;
        let xin = self.value(x);
        let p = self.value(params);
        let kk = kernel * kernel;
        let nw = cout * cin * kk;
        let nn = n * n;
        let half = (kernel / 2) as isize;
        if let Some(gx) = self.slot(grads, x) {
            let w = &p[offset..offset + nw];
            for o in 0..cout {
                let go = &g[o * nn..(o + 1) * nn];
                for c in 0..cin {
                    let gxc = &mut gx[c * nn..(c + 1) * nn];
                    for s in 0..kernel {
                        for t in 0..kernel {
                            let wt = w[(o * cin + c) * kk + s * kernel + t];
                            for i in 0..n {
                                let ii = wrap(i as isize + s as isize - half, n);
                                for j in 0..n {
                                    let jj = wrap(j as isize + t as isize - half, n);
                                    gxc[ii * n + jj] += wt * go[i * n + j];
                                }
                            }
                        }
                    }
                }
            }
        }
        if let Some(gp) = self.slot(grads, params) {
            let (gw, gb) = gp[offset..offset + nw + cout].split_at_mut(nw);
            for o in 0..cout {
                let go = &g[o * nn..(o + 1) * nn];
                gb[o] += go.iter().sum::<f64>();
                for c in 0..cin {
                    let xc = &xin[c * nn..(c + 1) * nn];
                    for s in 0..kernel {
                        for t in 0..kernel {
                            let mut acc = 0.0;
                            for i in 0..n {
                                let ii = wrap(i as isize + s as isize - half, n);
                                for j in 0..n {
                                    let jj = wrap(j as isize + t as isize - half, n);
                                    acc += go[i * n + j] * xc[ii * n + jj];
                                }
                            }
                            gw[(o * cin + c) * kk + s * kernel + t] += acc;
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo(n: usize, seed: u64) -> Vec<f64> {
        (0..n).map(|i| math::sin(1.3 * i as f64 + seed as f64) * 0.8 + 0.1 * math::cos(0.37 * (i * i) as f64)).collect()
    }

    /// Central-difference check of `f` at `x0` along every coordinate.
    fn check(x0: Vec<f64>, f: impl Fn(&mut Tape, Var) -> Var) {
        let mut tape = Tape::new();
        let x = tape.leaf(x0.clone());
        let y = f(&mut tape, x);
        let g = tape.backward(y).wrt(x);
        for i in 0..x0.len() {
            let eval = |d: f64| {
                let mut xs = x0.clone();
                xs[i] += d;
                let mut t = Tape::new();
                let v = t.leaf(xs);
                let out = f(&mut t, v);
                t.scalar(out)
            };
            let h = 1e-6;
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + fd.abs()), "coord {i}: fd {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn elementwise_ops() {
        check(pseudo(6, 1), |t, x| {
            let c = t.constant(pseudo(6, 2));
            let a = t.mul(x, x);
            let b = t.sub(a, c);
            let s = t.swish(b);
            let m = t.mul_const(s, Arc::from(pseudo(6, 3)));
            let z = t.axpy(m, -0.7, x);
            t.sum_sq(z)
        });
    }

    #[test]
    fn complex_ops_and_transforms() {
        let grid = Arc::new(FourierGrid::new(8, 1).unwrap());
        let c: Arc<[Complex64]> = (0..8).map(|k| Complex64::new(0.3 * k as f64, 1.0 - 0.1 * k as f64)).collect();
        check(pseudo(16, 4), move |t, x| {
            let f = t.dft(grid.clone(), x);
            let m = t.cmul_const(f, c.clone());
            let p = t.cmul(m, x);
            let u = t.idft(grid.clone(), p);
            let h = t.herm_restrict(grid.clone(), u);
            let e = t.herm_expand(grid.clone(), h);
            let u = t.add(u, e);
            let r = t.re(u);
            let back = t.to_complex(r);
            let s = t.add(back, f);
            t.sum_sq(s)
        });
    }

    #[test]
    fn transforms_2d() {
        let grid = Arc::new(FourierGrid::new(4, 2).unwrap());
        check(pseudo(32, 5), move |t, x| {
            let f = t.dft(grid.clone(), x);
            let y = t.cmul(f, f);
            let u = t.idft(grid.clone(), y);
            t.sum_sq(u)
        });
    }

    #[test]
    fn matvec_slice_concat() {
        let m = Arc::new(Matrix::from_fn(3, 5, |i, j| (i as f64 + 1.0) * 0.1 - j as f64 * 0.05));
        check(pseudo(5, 6), move |t, x| {
            let y = t.matvec(m.clone(), x);
            let a = t.slice(x, 1, 3);
            let b = t.mul(a, y);
            let c = t.concat(&[b, x]);
            let s = t.sum(c);
            let q = t.sum_sq(c);
            t.add(s, q)
        });
    }

    #[test]
    fn layers() {
        // params: conv1d(2→3, k3, len 4) + dense(12→2)
        let shape = Conv1dShape { cin: 2, cout: 3, kernel: 3, len: 4, padding: Padding::Zero };
        let nconv = 3 * 2 * 3 + 3;
        let ndense = 12 * 2 + 2;
        let input = pseudo(8, 7);
        for padding in [Padding::Zero, Padding::Circular] {
            let input = input.clone();
            check(pseudo(nconv + ndense, 8), move |t, p| {
                let x = t.constant(input.clone());
                let h = t.conv1d(p, 0, Conv1dShape { padding, ..shape }, x);
                let h = t.swish(h);
                let y = t.dense(p, nconv, 12, 2, h);
                t.sum_sq(y)
            });
        }
        // input gradient too
        let params = pseudo(nconv + ndense, 9);
        check(input, move |t, x| {
            let p = t.constant(params.clone());
            let h = t.conv1d(p, 0, shape, x);
            let y = t.dense(p, nconv, 12, 2, h);
            t.sum_sq(y)
        });
    }

    #[test]
    fn conv2d_layer() {
        let shape = Conv2dShape { cin: 2, cout: 2, kernel: 3, n: 4 };
        let np = 2 * 2 * 9 + 2;
        let input = pseudo(32, 10);
        let inp = input.clone();
        check(pseudo(np, 11), move |t, p| {
            let x = t.constant(inp.clone());
            let y = t.conv2d(p, 0, shape, x);
            t.sum_sq(y)
        });
        let params = pseudo(np, 12);
        check(input, move |t, x| {
            let p = t.constant(params.clone());
            let y = t.conv2d(p, 0, shape, x);
            t.sum_sq(y)
        });
    }

    #[test]
    fn constants_receive_no_gradient() {
        let mut t = Tape::new();
        let c = t.constant(vec![1.0, 2.0]);
        let x = t.leaf(vec![3.0, 4.0]);
        let y = t.mul(c, x);
        let s = t.sum(y);
        let g = t.backward(s);
        assert_eq!(g.wrt(c), vec![0.0, 0.0]);
        assert_eq!(g.wrt(x), vec![1.0, 2.0]);
    }
}
