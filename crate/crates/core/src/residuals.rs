//! Discrete weak-residual losses.
//!
//! Each residual is the defect of the matching solver's time step, evaluated
//! on an arbitrary coefficient trajectory. Plugging in the solver's own
//! trajectory gives zero up to rounding, which is the property the tests pin
//! down. Where a printed loss and its scheme disagree the scheme wins:
//!
//! * Burgers / advection: textbook RK4 (stage states in every slot, `Δt` on
//!   the last stage).
//! * Boundary layer: implicit Euler with implicit convection `-μC`, all
//!   `N + 1` rows including the corrector row.
//! * KSE: ETDRK4 with the `e^{cΔt}` propagation of `αʳ` kept.
//!
//! Scaling follows the schemes: the Legendre and vorticity defects are the
//! per-unit-time forms (divided by `Δt`), the RK4 and ETDRK4 defects are the
//! plain update differences.
//!
//! The anchor (the state the segment starts from) is always a constant.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::problem::{Family, InputSample, PdeProblem, Trajectory};
use crate::solvers::{etd_coefficients, kse_symbol};
use crate::spectral::FourierGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// Sum of squared defect entries over all steps.
    pub total: f64,
    pub per_step: Vec<f64>,
    /// `|defect|²` per step and basis index / mode.
    pub per_term: Option<Vec<Vec<f64>>>,
}

/// Per-sample constants entering a residual.
#[derive(Debug, Clone, Default)]
pub struct SampleData {
    /// Forcing on the Gauss–Lobatto nodes (diffusion–reaction).
    forcing: Option<Arc<[f64]>>,
    /// Transport coefficient on the grid (advection).
    coefficient: Option<Arc<[f64]>>,
}

/// Interleave a real per-mode vector so it scales both parts of a complex entry.
fn doubled(v: impl IntoIterator<Item = f64>) -> Arc<[f64]> {
    v.into_iter().flat_map(|x| [x, x]).collect()
}

#[derive(Debug, Clone)]
struct Spectral {
    grid: Arc<FourierGrid>,
    mask: Option<Arc<[f64]>>,
    /// `iξ` along each axis.
    deriv: Vec<Arc<[Complex64]>>,
}

impl Spectral {
    fn new(n: usize, dims: usize, dealias: bool) -> Result<Self> {
        let grid = FourierGrid::new(n, dims)?;
        let mask = dealias.then(|| doubled(grid.two_thirds_mask()));
        let deriv = (0..dims)
            .map(|axis| {
                (0..grid.len())
                    .map(|idx| {
                        let slot = if dims == 1 {
                            idx
                        } else if axis == 0 {
                            idx / n
                        } else {
                            idx % n
                        };
                        Complex64::new(0.0, grid.deriv_symbol(slot))
                    })
                    .collect()
            })
            .collect();
        Ok(Self { grid: Arc::new(grid), mask, deriv })
    }

    fn to_grid(&self, t: &mut Tape, alpha: Var) -> Var {
        let u = t.idft(self.grid.clone(), alpha);
        t.re(u)
    }

    fn nonlinear(&self, t: &mut Tape, values: Var) -> Var {
        let c = t.to_complex(values);
        let f = t.dft(self.grid.clone(), c);
        match &self.mask {
            Some(m) => t.mul_const(f, m.clone()),
            None => f,
        }
    }

    fn deriv(&self, t: &mut Tape, alpha: Var, axis: usize) -> Var {
        t.cmul_const(alpha, self.deriv[axis].clone())
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Dre { system: Arc<Matrix>, mass_dt: Arc<Matrix>, synth: Arc<Matrix>, load: Arc<Matrix>, mu: f64 },
    Cde { system: Arc<Matrix>, mass_dt: Arc<Matrix> },
    Burgers { sp: Spectral, lin: Arc<[f64]>, mu: f64 },
    Advection { sp: Spectral },
    Kse { sp: Spectral, e: Arc<[f64]>, e2: Arc<[f64]>, q: Arc<[f64]>, f1: Arc<[f64]>, f2x2: Arc<[f64]>, f3: Arc<[f64]> },
    Nse(NseKernel),
}

#[derive(Debug, Clone)]
struct NseKernel {
    sp: Spectral,
    inv_dt: f64,
    /// `|k|²/(2Re)`.
    d: Arc<[f64]>,
    /// `1/Δt - d`.
    explicit: Arc<[f64]>,
    /// `1/(1/Δt + d)`.
    implicit_inv: Arc<[f64]>,
    /// `û = -iξ_y/|k|² ŵ` and `v̂ = iξ_x/|k|² ŵ`.
    u_sym: Arc<[Complex64]>,
    v_sym: Arc<[Complex64]>,
    forcing: Arc<[f64]>,
}

/// Residual functional for one problem, with its operators precomputed.
#[derive(Debug, Clone)]
pub struct Residual {
    problem: PdeProblem,
    kernel: Kernel,
}

impl Residual {
    pub fn new(problem: &PdeProblem) -> Result<Self> {
        problem.validate()?;
        let dt = problem.dt;
        let kernel = match problem.family {
            Family::DiffusionReaction | Family::ConvectionDiffusionBL => {
                let basis = crate::solvers::legendre_basis(problem)?;
                let mass = basis.mass();
                let mut system = mass.scaled(1.0 / dt).add_scaled(problem.nu, &basis.stiffness());
                let mass_dt = Arc::new(mass.scaled(1.0 / dt));
                if problem.family == Family::DiffusionReaction {
                    Kernel::Dre {
                        system: Arc::new(system),
                        mass_dt,
                        synth: Arc::new(basis.synthesis()),
                        load: Arc::new(basis.load()),
                        mu: problem.mu,
                    }
                } else {
                    system = system.add_scaled(-problem.mu, &basis.convection());
                    Kernel::Cde { system: Arc::new(system), mass_dt }
                }
            }
            Family::Burgers => {
                let sp = Spectral::new(problem.n, 1, problem.dealias)?;
                let lin = doubled((0..sp.grid.len()).map(|i| -problem.nu * sp.grid.k_squared(i)));
                Kernel::Burgers { sp, lin, mu: problem.mu }
            }
            Family::Advection => Kernel::Advection { sp: Spectral::new(problem.n, 1, problem.dealias)? },
            Family::Kse2d => {
                let sp = Spectral::new(problem.n, 2, problem.dealias)?;
                let co = etd_coefficients(&kse_symbol(&sp.grid, problem.kse_symbol), dt);
                Kernel::Kse {
                    sp,
                    e: doubled(co.e),
                    e2: doubled(co.e2),
                    q: doubled(co.q),
                    f1: doubled(co.f1),
                    f2x2: doubled(co.f2.iter().map(|v| 2.0 * v)),
                    f3: doubled(co.f3),
                }
            }
            Family::Nse2d => {
                let sp = Spectral::new(problem.n, 2, problem.dealias)?;
                let re = problem.re.expect("validated");
                let len = sp.grid.len();
                let inv_dt = 1.0 / dt;
                let d: Vec<f64> = (0..len).map(|i| sp.grid.k_squared(i) / (2.0 * re)).collect();
                let inv_k2 = |i: usize| {
                    let k2 = sp.grid.k_squared(i);
                    if k2 == 0.0 {
                        0.0
                    } else {
                        1.0 / k2
                    }
                };
                let u_sym = (0..len).map(|i| -sp.deriv[1][i] * inv_k2(i)).collect();
                let v_sym = (0..len).map(|i| sp.deriv[0][i] * inv_k2(i)).collect();
                let forcing = crate::problem::to_interleaved(&sp.grid.dft(&problem.forcing_field())?.values);
                Kernel::Nse(NseKernel {
                    inv_dt,
                    explicit: doubled(d.iter().map(|d| inv_dt - d)),
                    implicit_inv: doubled(d.iter().map(|d| 1.0 / (inv_dt + d))),
                    d: doubled(d),
                    u_sym,
                    v_sym,
                    forcing: forcing.into(),
                    sp,
                })
            }
        };
        Ok(Self { problem: problem.clone(), kernel })
    }

    pub fn problem(&self) -> &PdeProblem {
        &self.problem
    }

    /// Extracts the per-sample constants. Diffusion–reaction needs the forcing
    /// and advection the coefficient; other families ignore `input`.
    pub fn sample_data(&self, input: Option<&InputSample>) -> Result<SampleData> {
        let need = |input: Option<&InputSample>| -> Result<Arc<[f64]>> {
            let s = input.ok_or_else(|| {
                Error::Shape(alloc::format!("the {} residual needs its input sample", self.problem.family))
            })?;
            if s.family != self.problem.family || s.values.len() != self.problem.input_len() {
                return Err(Error::Shape(alloc::format!(
                    "input sample does not match the {} problem",
                    self.problem.family
                )));
            }
            Ok(s.values.clone().into())
        };
        Ok(match self.kernel {
            Kernel::Dre { .. } => SampleData { forcing: Some(need(input)?), coefficient: None },
            Kernel::Advection { .. } => SampleData { forcing: None, coefficient: Some(need(input)?) },
            _ => SampleData::default(),
        })
    }

    /// Defect vectors, one per step. `steps[r]` is the state one step after
    /// `steps[r - 1]` (or after `anchor` for `r = 0`).
    pub fn defects(&self, t: &mut Tape, data: &SampleData, anchor: Var, steps: &[Var]) -> Vec<Var> {
        let mut out = Vec::with_capacity(steps.len());
        let mut prev = anchor;
        let forcing = data.forcing.as_ref().map(|f| t.constant(f.to_vec()));
        for &next in steps {
            let d = match &self.kernel {
                Kernel::Dre { system, mass_dt, synth, load, mu } => {
                    let lhs = t.matvec(system.clone(), next);
                    let m = t.matvec(mass_dt.clone(), prev);
                    let u = t.matvec(synth.clone(), prev);
                    let u2 = t.mul(u, u);
                    let f = forcing.expect("checked by sample_data");
                    let nodal = t.axpy(f, -mu, u2);
                    let b = t.matvec(load.clone(), nodal);
                    let rhs = t.add(m, b);
                    t.sub(lhs, rhs)
                }
                Kernel::Cde { system, mass_dt } => {
                    let lhs = t.matvec(system.clone(), next);
                    let rhs = t.matvec(mass_dt.clone(), prev);
                    t.sub(lhs, rhs)
                }
                Kernel::Burgers { sp, lin, mu } => {
                    let rhs = |t: &mut Tape, a: Var| {
                        let u = sp.to_grid(t, a);
                        let da = sp.deriv(t, a, 0);
                        let ux = sp.to_grid(t, da);
                        let prod = t.mul(u, ux);
                        let g = sp.nonlinear(t, prod);
                        let l = t.mul_const(a, lin.clone());
                        t.axpy(l, -mu, g)
                    };
                    self.rk4_defect(t, prev, next, rhs)
                }
                Kernel::Advection { sp } => {
                    let a = data.coefficient.clone().expect("checked by sample_data");
                    let rhs = |t: &mut Tape, alpha: Var| {
                        let da = sp.deriv(t, alpha, 0);
                        let ux = sp.to_grid(t, da);
                        let prod = t.mul_const(ux, a.clone());
                        let g = sp.nonlinear(t, prod);
                        t.scale(g, -1.0)
                    };
                    self.rk4_defect(t, prev, next, rhs)
                }
                Kernel::Kse { sp, e, e2, q, f1, f2x2, f3 } => {
                    let nonlin = |t: &mut Tape, a: Var| {
                        let dx = sp.deriv(t, a, 0);
                        let dy = sp.deriv(t, a, 1);
                        let ux = sp.to_grid(t, dx);
                        let uy = sp.to_grid(t, dy);
                        let ux2 = t.mul(ux, ux);
                        let uy2 = t.mul(uy, uy);
                        let g = t.add(ux2, uy2);
                        let f = sp.nonlinear(t, g);
                        t.scale(f, -1.0)
                    };
                    let half = |t: &mut Tape, x: Var, n: Var| {
                        let a = t.mul_const(x, e2.clone());
                        let b = t.mul_const(n, q.clone());
                        t.add(a, b)
                    };
                    let nv = nonlin(t, prev);
                    let a = half(t, prev, nv);
                    let na = nonlin(t, a);
                    let b = half(t, prev, na);
                    let nb = nonlin(t, b);
                    let two_nb = t.scale(nb, 2.0);
                    let comb = t.sub(two_nb, nv);
                    let c = half(t, a, comb);
                    let nc = nonlin(t, c);
                    let p0 = t.mul_const(prev, e.clone());
                    let p1 = t.mul_const(nv, f1.clone());
                    let nab = t.add(na, nb);
                    let p2 = t.mul_const(nab, f2x2.clone());
                    let p3 = t.mul_const(nc, f3.clone());
                    let s = t.add(p0, p1);
                    let s = t.add(s, p2);
                    let s = t.add(s, p3);
                    t.sub(next, s)
                }
                Kernel::Nse(k) => k.defect(t, prev, next),
            };
            out.push(d);
            prev = next;
        }
        out
    }

    fn rk4_defect(&self, t: &mut Tape, prev: Var, next: Var, rhs: impl Fn(&mut Tape, Var) -> Var) -> Var {
        let dt = self.problem.dt;
        let k1 = rhs(t, prev);
        let s1 = t.axpy(prev, dt / 2.0, k1);
        let k2 = rhs(t, s1);
        let s2 = t.axpy(prev, dt / 2.0, k2);
        let k3 = rhs(t, s2);
        let s3 = t.axpy(prev, dt, k3);
        let k4 = rhs(t, s3);
        let a = t.axpy(k1, 2.0, k2);
        let a = t.axpy(a, 2.0, k3);
        let a = t.add(a, k4);
        let inc = t.axpy(prev, dt / 6.0, a);
        t.sub(next, inc)
    }

    /// Sum of squared defects as one scalar node.
    pub fn loss_on_tape(&self, t: &mut Tape, data: &SampleData, anchor: Var, steps: &[Var]) -> Var {
        let d = self.defects(t, data, anchor, steps);
        let all = t.concat(&d);
        t.sum_sq(all)
    }

    fn check_snapshot(&self, s: &[f64], what: &str) -> Result<()> {
        let len = self.problem.representation().snapshot_len();
        if s.len() != len {
            return Err(Error::Shape(alloc::format!("{what} has {} values, expected {len}", s.len())));
        }
        Ok(())
    }

    /// Evaluates the residual of `steps` (the states after `anchor`).
    pub fn evaluate(&self, input: Option<&InputSample>, anchor: &[f64], steps: &[Vec<f64>]) -> Result<ResidualReport> {
        self.check_snapshot(anchor, "anchor")?;
        for s in steps {
            self.check_snapshot(s, "snapshot")?;
        }
        let data = self.sample_data(input)?;
        let mut t = Tape::new();
        let a = t.constant(anchor.to_vec());
        let vars: Vec<Var> = steps.iter().map(|s| t.constant(s.clone())).collect();
        let defects = self.defects(&mut t, &data, a, &vars);
        let complex = self.problem.representation().is_complex();
        let per_term: Vec<Vec<f64>> = defects
            .iter()
            .map(|d| {
                let v = t.value(*d);
                if complex {
                    v.chunks_exact(2).map(|c| c[0] * c[0] + c[1] * c[1]).collect()
                } else {
                    v.iter().map(|x| x * x).collect()
                }
            })
            .collect();
        let per_step: Vec<f64> = per_term.iter().map(|r| r.iter().sum()).collect();
        Ok(ResidualReport { total: per_step.iter().sum(), per_step, per_term: Some(per_term) })
    }
}

/// Residual of a full trajectory whose first snapshot is the anchor.
pub fn residual_check(problem: &PdeProblem, traj: &Trajectory, input: &InputSample) -> Result<ResidualReport> {
    let (anchor, steps) = traj
        .snapshots
        .split_first()
        .ok_or_else(|| Error::Shape("empty trajectory".into()))?;
    Residual::new(problem)?.evaluate(Some(input), anchor, steps)
}

fn expect(problem: &PdeProblem, family: Family, traj: &Trajectory) -> Result<()> {
    if problem.family != family {
        return Err(Error::InvalidParameter(alloc::format!("expected a {family} problem, got {}", problem.family)));
    }
    if traj.representation != problem.representation() {
        return Err(Error::Shape(alloc::format!(
            "trajectory is {}, problem needs {}",
            traj.representation.name(),
            problem.representation().name()
        )));
    }
    Ok(())
}

/// Diffusion–reaction residual of `traj` (the states after `anchor`).
pub fn residual_dre(problem: &PdeProblem, traj: &Trajectory, f: &InputSample, anchor: &[f64]) -> Result<ResidualReport> {
    expect(problem, Family::DiffusionReaction, traj)?;
    Residual::new(problem)?.evaluate(Some(f), anchor, &traj.snapshots)
}

pub fn residual_burgers(problem: &PdeProblem, traj: &Trajectory, anchor: &[f64]) -> Result<ResidualReport> {
    expect(problem, Family::Burgers, traj)?;
    Residual::new(problem)?.evaluate(None, anchor, &traj.snapshots)
}

pub fn residual_advection(problem: &PdeProblem, traj: &Trajectory, a: &InputSample, anchor: &[f64]) -> Result<ResidualReport> {
    expect(problem, Family::Advection, traj)?;
    Residual::new(problem)?.evaluate(Some(a), anchor, &traj.snapshots)
}

pub fn residual_cde(problem: &PdeProblem, traj: &Trajectory, anchor: &[f64]) -> Result<ResidualReport> {
    expect(problem, Family::ConvectionDiffusionBL, traj)?;
    Residual::new(problem)?.evaluate(None, anchor, &traj.snapshots)
}

pub fn residual_kse(problem: &PdeProblem, traj: &Trajectory, anchor: &[f64]) -> Result<ResidualReport> {
    expect(problem, Family::Kse2d, traj)?;
    Residual::new(problem)?.evaluate(None, anchor, &traj.snapshots)
}

/// Vorticity residual; the forcing comes from `problem.forcing`.
pub fn residual_nse(problem: &PdeProblem, traj: &Trajectory, anchor: &[f64]) -> Result<ResidualReport> {
    expect(problem, Family::Nse2d, traj)?;
    Residual::new(problem)?.evaluate(None, anchor, &traj.snapshots)
}

impl NseKernel {
    /// `i k·(F(uw), F(vw))` with velocities from the streamfunction.
    fn advection(&self, t: &mut Tape, w: Var) -> Var {
        let sp = &self.sp;
        let us = t.cmul_const(w, self.u_sym.clone());
        let vs = t.cmul_const(w, self.v_sym.clone());
        let u = sp.to_grid(t, us);
        let v = sp.to_grid(t, vs);
        let wg = sp.to_grid(t, w);
        let uw = t.mul(u, wg);
        let vw = t.mul(v, wg);
        let fu = sp.nonlinear(t, uw);
        let fv = sp.nonlinear(t, vw);
        let fx = sp.deriv(t, fu, 0);
        let fy = sp.deriv(t, fv, 1);
        t.add(fx, fy)
    }

    fn defect(&self, t: &mut Tape, prev: Var, next: Var) -> Var {
        let f = t.constant(self.forcing.to_vec());
        let n0 = self.advection(t, prev);
        let e = t.mul_const(prev, self.explicit.clone());
        let e = t.sub(e, n0);
        let e = t.add(e, f);
        let pred = t.mul_const(e, self.implicit_inv.clone());
        let n1 = self.advection(t, pred);

        let diff = t.sub(next, prev);
        let diff = t.scale(diff, self.inv_dt);
        let sum = t.add(next, prev);
        let visc = t.mul_const(sum, self.d.clone());
        let nl = t.add(n0, n1);
        let r = t.add(diff, visc);
        let r = t.axpy(r, 0.5, nl);
        t.sub(r, f)
    }
}
