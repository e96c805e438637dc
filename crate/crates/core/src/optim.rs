//! Derivative-free minimization by linear interpolation over a simplex.
//!
//! This is the unconstrained specialization of Powell's COBYLA: the `n + 1`
//! vertices of a simplex define a linear model of the objective, a step of
//! length `rho` is taken along its steepest descent direction, and `rho`
//! shrinks from `rhobeg` to `rhoend` when steps stop paying off. The simplex
//! is kept well-shaped by occasional geometry-repair steps.

use crate::error::{Error, Result};

const ALPHA: f64 = 0.25;
const BETA: f64 = 2.1;
const GAMMA: f64 = 0.5;
const DELTA: f64 = 1.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimSettings {
    /// Initial trust-region radius and simplex edge length.
    pub rhobeg: f64,
    /// Final trust-region radius.
    pub rhoend: f64,
    pub max_evals: usize,
}

impl Default for OptimSettings {
    fn default() -> Self {
        OptimSettings {
            rhobeg: 0.5,
            rhoend: 1e-6,
            max_evals: 300,
        }
    }
}

impl OptimSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rhobeg > 0.0 && self.rhoend > 0.0 && self.rhoend <= self.rhobeg) {
            return Err(Error::Config(format!(
                "optimizer radii must satisfy 0 < rhoend <= rhobeg, got rhobeg={} rhoend={}",
                self.rhobeg, self.rhoend
            )));
        }
        if self.max_evals == 0 {
            return Err(Error::Config("optimizer needs at least one evaluation".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub f: f64,
    /// Objective value of every evaluation, in order.
    pub history: Vec<f64>,
    /// True when the run stopped because `max_evals` was reached.
    pub budget_exhausted: bool,
}

impl OptimResult {
    pub fn evals(&self) -> usize {
        self.history.len()
    }

    /// Running minimum of `history`.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.history
            .iter()
            .map(|&f| {
                best = best.min(f);
                best
            })
            .collect()
    }
}

struct Budget;

struct Evaluator<F> {
    objective: F,
    history: Vec<f64>,
    max_evals: usize,
    best_x: Vec<f64>,
    best_f: f64,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Evaluator<F> {
    /// `Ok(Err(Budget))` once the budget is spent.
    fn eval(&mut self, x: &[f64]) -> Result<std::result::Result<f64, Budget>> {
        if self.history.len() >= self.max_evals {
            return Ok(Err(Budget));
        }
        let f = (self.objective)(x)?;
        if !f.is_finite() {
            return Err(Error::NonFinite(self.history.len()));
        }
        self.history.push(f);
        if f < self.best_f {
            self.best_f = f;
            self.best_x = x.to_vec();
        }
        Ok(Ok(f))
    }
}

/// The simplex: the best vertex (`pole`), displacements `d[j]` of the other
/// vertices from it, and dual vectors `w[j]` with `d[j] · w[k] = δ_jk`.
struct Simplex {
    pole: Vec<f64>,
    f_pole: f64,
    d: Vec<Vec<f64>>,
    f: Vec<f64>,
    w: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Duals of `d` by Gauss-Jordan elimination with partial pivoting.
fn duals(d: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = d.len();
    let mut a: Vec<Vec<f64>> = d.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    let scale = d.iter().map(|r| norm(r)).fold(0.0, f64::max);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..n {
            if i != col && a[i][col] != 0.0 {
                let factor = a[i][col];
                for j in 0..n {
                    a[i][j] -= factor * a[col][j];
                    inv[i][j] -= factor * inv[col][j];
                }
            }
        }
    }
    // D · inv = I, so column k of inv is the dual of row k of D.
    Some((0..n).map(|k| (0..n).map(|i| inv[i][k]).collect()).collect())
}

impl Simplex {
    fn gradient(&self) -> Vec<f64> {
        let n = self.pole.len();
        let mut g = vec![0.0; n];
        for (w, f) in self.w.iter().zip(&self.f) {
            let df = f - self.f_pole;
            for (gi, wi) in g.iter_mut().zip(w) {
                *gi += df * wi;
            }
        }
        g
    }

    /// Moves the pole to the best vertex. Returns false if the resulting
    /// simplex is numerically degenerate.
    fn select_pole(&mut self) -> bool {
        let mut best = None;
        let mut f_best = self.f_pole;
        for (j, &f) in self.f.iter().enumerate() {
            if f < f_best {
                best = Some(j);
                f_best = f;
            }
        }
        let Some(j) = best else { return true };
        let shift = self.d[j].clone();
        for (p, s) in self.pole.iter_mut().zip(&shift) {
            *p += s;
        }
        for (k, dk) in self.d.iter_mut().enumerate() {
            if k == j {
                dk.iter_mut().for_each(|x| *x = -*x);
            } else {
                dk.iter_mut().zip(&shift).for_each(|(x, s)| *x -= s);
            }
        }
        std::mem::swap(&mut self.f_pole, &mut self.f[j]);
        match duals(&self.d) {
            Some(w) => {
                self.w = w;
                true
            }
            None => false,
        }
    }

    /// Replaces vertex `l` by `pole + dx`. Returns false if `dx` is
    /// (numerically) in the span of the remaining edges.
    fn replace(&mut self, l: usize, dx: Vec<f64>, f: f64) -> bool {
        let t = dot(&self.w[l], &dx);
        if t.abs() <= 1e-12 * norm(&self.w[l]) * norm(&dx) {
            return false;
        }
        let wl: Vec<f64> = self.w[l].iter().map(|x| x / t).collect();
        for (j, wj) in self.w.iter_mut().enumerate() {
            if j != l {
                let c = dot(wj, &dx);
                wj.iter_mut().zip(&wl).for_each(|(x, y)| *x -= c * y);
            }
        }
        self.w[l] = wl;
        self.d[l] = dx;
        self.f[l] = f;
        true
    }
}

/// Builds a fresh axis-aligned simplex of edge `rho` around `x0`.
fn build_simplex<F: FnMut(&[f64]) -> Result<f64>>(
    ev: &mut Evaluator<F>,
    x0: &[f64],
    f0: f64,
    rho: f64,
) -> Result<Option<Simplex>> {
    let n = x0.len();
    let mut s = Simplex {
        pole: x0.to_vec(),
        f_pole: f0,
        d: Vec::with_capacity(n),
        f: Vec::with_capacity(n),
        w: Vec::with_capacity(n),
    };
    for j in 0..n {
        let mut step = vec![0.0; n];
        step[j] = rho;
        let mut dual = vec![0.0; n];
        dual[j] = 1.0 / rho;
        let x = s.pole.iter().zip(&step).map(|(p, q)| p + q).collect::<Vec<_>>();
        let f = match ev.eval(&x)? {
            Ok(f) => f,
            Err(Budget) => return Ok(None),
        };
        s.d.push(step);
        s.f.push(f);
        s.w.push(dual);
    }
    Ok(Some(s))
}

/// Minimizes `objective` starting at `x0`.
///
/// Deterministic given `x0` and `settings`. When the evaluation budget runs
/// out, the best point seen so far is returned with `budget_exhausted` set.
pub fn minimize<F>(objective: F, x0: &[f64], settings: &OptimSettings) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    settings.validate()?;
    let mut ev = Evaluator {
        objective,
        history: Vec::new(),
        max_evals: settings.max_evals,
        best_x: x0.to_vec(),
        best_f: f64::INFINITY,
    };
    let finish = |ev: Evaluator<F>, exhausted: bool| OptimResult {
        x: ev.best_x,
        f: ev.best_f,
        history: ev.history,
        budget_exhausted: exhausted,
    };
    let f0 = match ev.eval(x0)? {
        Ok(f) => f,
        Err(Budget) => unreachable!("budget is at least one evaluation"),
    };
    if x0.is_empty() {
        return Ok(finish(ev, false));
    }
    let mut rho = settings.rhobeg;
    let Some(mut s) = build_simplex(&mut ev, x0, f0, rho)? else {
        return Ok(finish(ev, true));
    };

    let mut take_model_step = true;
    loop {
        if !s.select_pole() {
            let (x, f) = (ev.best_x.clone(), ev.best_f);
            match build_simplex(&mut ev, &x, f, rho)? {
                Some(fresh) => s = fresh,
                None => return Ok(finish(ev, true)),
            }
        }

        // Shape of the simplex: distance of each vertex from the opposite
        // face, and edge length from the pole.
        let vsig: Vec<f64> = s.w.iter().map(|w| 1.0 / norm(w)).collect();
        let veta: Vec<f64> = s.d.iter().map(|d| norm(d)).collect();
        let acceptable = vsig.iter().all(|&v| v >= ALPHA * rho) && veta.iter().all(|&v| v <= BETA * rho);

        if !take_model_step && !acceptable {
            let mut l = None;
            let mut edgmax = DELTA * rho;
            for (j, &v) in veta.iter().enumerate() {
                if v > edgmax {
                    l = Some(j);
                    edgmax = v;
                }
            }
            if l.is_none() {
                let mut parsig = ALPHA * rho;
                for (j, &v) in vsig.iter().enumerate() {
                    if v < parsig {
                        l = Some(j);
                        parsig = v;
                    }
                }
            }
            if let Some(l) = l {
                let g = s.gradient();
                let mut dx: Vec<f64> = s.w[l].iter().map(|x| GAMMA * rho * vsig[l] * x).collect();
                if dot(&g, &dx) > 0.0 {
                    dx.iter_mut().for_each(|x| *x = -*x);
                }
                let x: Vec<f64> = s.pole.iter().zip(&dx).map(|(p, q)| p + q).collect();
                let f = match ev.eval(&x)? {
                    Ok(f) => f,
                    Err(Budget) => return Ok(finish(ev, true)),
                };
                if !s.replace(l, dx, f) {
                    let (x, f) = (ev.best_x.clone(), ev.best_f);
                    match build_simplex(&mut ev, &x, f, rho)? {
                        Some(fresh) => s = fresh,
                        None => return Ok(finish(ev, true)),
                    }
                }
                take_model_step = true;
                continue;
            }
        }

        let mut progress = false;
        let g = s.gradient();
        let gnorm = norm(&g);
        if gnorm > 0.0 {
            let dx: Vec<f64> = g.iter().map(|x| -rho * x / gnorm).collect();
            let prerem = rho * gnorm;
            let x: Vec<f64> = s.pole.iter().zip(&dx).map(|(p, q)| p + q).collect();
            let f = match ev.eval(&x)? {
                Ok(f) => f,
                Err(Budget) => return Ok(finish(ev, true)),
            };
            take_model_step = true;
            let trured = s.f_pole - f;

            // Pick the vertex to drop: the one whose removal keeps the
            // simplex best conditioned, overridden by a far-away vertex.
            let mut ratio = if trured <= 0.0 { 1.0 } else { 0.0 };
            let mut jdrop = None;
            let mut sigbar = vec![0.0; vsig.len()];
            for (j, w) in s.w.iter().enumerate() {
                let t = dot(w, &dx).abs();
                if t > ratio {
                    jdrop = Some(j);
                    ratio = t;
                }
                sigbar[j] = t * vsig[j];
            }
            let mut edgmax = DELTA * rho;
            let mut far = None;
            for j in 0..s.d.len() {
                if sigbar[j] >= ALPHA * rho || sigbar[j] >= vsig[j] {
                    let mut t = veta[j];
                    if trured > 0.0 {
                        t = s.d[j]
                            .iter()
                            .zip(&dx)
                            .map(|(a, b)| (b - a) * (b - a))
                            .sum::<f64>()
                            .sqrt();
                    }
                    if t > edgmax {
                        far = Some(j);
                        edgmax = t;
                    }
                }
            }
            if far.is_some() {
                jdrop = far;
            }
            if let Some(j) = jdrop {
                if s.replace(j, dx, f) {
                    progress = trured > 0.0 && trured >= 0.1 * prerem;
                } else {
                    let (x, f) = (ev.best_x.clone(), ev.best_f);
                    match build_simplex(&mut ev, &x, f, rho)? {
                        Some(fresh) => s = fresh,
                        None => return Ok(finish(ev, true)),
                    }
                    continue;
                }
            }
        }
        if progress {
            continue;
        }
        if !acceptable {
            take_model_step = false;
            continue;
        }
        if rho > settings.rhoend {
            rho *= 0.5;
            if rho <= 1.5 * settings.rhoend {
                rho = settings.rhoend;
            }
            continue;
        }
        return Ok(finish(ev, false));
    }
}
