//! Allocation-free per-sample recursions for the loop blocks.

use super::Block;
use crate::lti::{solve_real, zoh_discretize, StateSpaceModel};
use crate::{Error, Result};
use nalgebra::DMatrix;

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

fn mat_vec(m: &[f64], x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o = m[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Controller block advanced by the trapezoidal rule on its state:
/// `x_k = M[(I + Ah/2) x_{k-1} + (Bh/2)(u_{k-1} + u_k)]`, `M = (I - Ah/2)^-1`,
/// which realizes the Tustin transform. Reset blocks jump `x_k <- A_rho x_k`
/// when their input crosses zero, before the output is formed.
pub(crate) struct ControllerStepper {
    ad: Vec<f64>,
    bh: Vec<f64>,
    c: Vec<f64>,
    d: f64,
    reset: Option<Vec<f64>>,
    x: Vec<f64>,
    tmp: Vec<f64>,
    u_prev: f64,
}

impl ControllerStepper {
    pub(crate) fn new(block: &Block, ts: f64) -> Result<Self> {
        let (model, reset): (&StateSpaceModel, Option<&DMatrix<f64>>) = match block {
            Block::Linear(m) => (m, None),
            Block::Reset(rs) => (rs.base(), Some(rs.reset_matrix())),
        };
        if !model.is_continuous() {
            return Err(Error::InvalidModel("controller blocks must be continuous".into()));
        }
        let n = model.order();
        let ident = DMatrix::<f64>::identity(n, n);
        let half = model.a() * (ts / 2.0);
        let m = solve_real(&ident - &half, &ident).ok_or(Error::Singular("I - A Ts/2"))?;
        let ad = &m * (&ident + &half);
        let bh = &m * model.b() * (ts / 2.0);
        Ok(Self {
            ad: row_major(&ad),
            bh: bh.iter().copied().collect(),
            c: model.c().iter().copied().collect(),
            d: model.d(),
            reset: reset.map(row_major),
            x: vec![0.0; n],
            tmp: vec![0.0; n],
            u_prev: 0.0,
        })
    }

    /// Advances one sample; returns the output and whether a reset fired.
    pub(crate) fn step(&mut self, u: f64) -> (f64, bool) {
        mat_vec(&self.ad, &self.x, &mut self.tmp);
        let s = self.u_prev + u;
        for (x, (t, b)) in self.x.iter_mut().zip(self.tmp.iter().zip(&self.bh)) {
            *x = t + b * s;
        }
        let mut fired = false;
        if let Some(r) = &self.reset {
            let crossed = self.u_prev * u < 0.0 || (u == 0.0 && self.u_prev != 0.0);
            if crossed {
                mat_vec(r, &self.x, &mut self.tmp);
                self.x.copy_from_slice(&self.tmp);
                fired = true;
            }
        }
        self.u_prev = u;
        (dot(&self.c, &self.x) + self.d * u, fired)
    }
}

/// Strictly proper plant under zero-order hold: `y_k = C x_k`,
/// `x_{k+1} = Ad x_k + Bd u_k`.
pub(crate) struct PlantStepper {
    ad: Vec<f64>,
    bd: Vec<f64>,
    c: Vec<f64>,
    x: Vec<f64>,
    tmp: Vec<f64>,
}

impl PlantStepper {
    pub(crate) fn new(plant: &StateSpaceModel, ts: f64) -> Result<Self> {
        if plant.d() != 0.0 {
            return Err(Error::InvalidModel("plant must be strictly proper (D = 0)".into()));
        }
        let d = zoh_discretize(plant, ts)?;
        let n = d.order();
        Ok(Self {
            ad: row_major(d.a()),
            bd: d.b().iter().copied().collect(),
            c: d.c().iter().copied().collect(),
            x: vec![0.0; n],
            tmp: vec![0.0; n],
        })
    }

    pub(crate) fn output(&self) -> f64 {
        dot(&self.c, &self.x)
    }

    pub(crate) fn advance(&mut self, u: f64) {
        mat_vec(&self.ad, &self.x, &mut self.tmp);
        for (x, (t, b)) in self.x.iter_mut().zip(self.tmp.iter().zip(&self.bd)) {
            *x = t + b * u;
        }
    }
}
