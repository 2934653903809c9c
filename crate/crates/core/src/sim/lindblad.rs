use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{c64, hermitian_eigenvalues, hermiticity_residual, max_abs, CMat};

/// Relative tolerance on the generator's trace preservation.
pub const TRACE_TOL: f64 = 1e-10;
/// Allowed drift of `tr ρ(t)` along an evolution.
pub const TRACE_DRIFT_TOL: f64 = 1e-9;

/// GKSL generator acting on column-major vectorized density matrices.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    dim: usize,
    matrix: CMat,
}

fn vec_of(m: &CMat) -> CMat {
    CMat::from_column_slice(m.len(), 1, m.as_slice())
}

fn unvec(v: &CMat, dim: usize) -> CMat {
    CMat::from_column_slice(dim, dim, v.as_slice())
}

impl LindbladGenerator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        unvec(&(&self.matrix * vec_of(rho)), self.dim)
    }

    /// `max |vec(I)* 𝓛|`, zero for a trace-preserving generator.
    pub fn trace_residual(&self) -> f64 {
        let id = vec_of(&CMat::identity(self.dim, self.dim));
        max_abs(&(id.adjoint() * &self.matrix))
    }

    /// `max |𝓛(ρ)* − 𝓛(ρ*)|` on the matrix units.
    pub fn hermiticity_preservation_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut e = CMat::zeros(self.dim, self.dim);
                e[(i, j)] = c64(1.0, 0.0);
                let lhs = self.apply(&e).adjoint();
                let rhs = self.apply(&e.adjoint());
                worst = worst.max(max_abs(&(lhs - rhs)));
            }
        }
        worst
    }
}

/// `ρ ↦ −i[H, ρ] + Σ_j (L_j ρ L_j* − ½{L_j* L_j, ρ})`.
pub fn lindblad(h: &CMat, ls: &[CMat]) -> Result<LindbladGenerator> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::Shape("Hamiltonian must be square".into()));
    }
    let scale = max_abs(h);
    let res = hermiticity_residual(h);
    if res > 1e-9 * (1.0 + scale) {
        return Err(Error::NotHermitian { what: "H".into(), residual: res });
    }
    let id = CMat::identity(n, n);
    let mi = c64(0.0, -1.0);
    let mut gen = (id.kronecker(h) - h.transpose().kronecker(&id)) * mi;
    let mut lscale = 0.0f64;
    for l in ls {
        if l.nrows() != n || l.ncols() != n {
            return Err(Error::Shape(format!("jump operator is {}x{}, expected {n}x{n}", l.nrows(), l.ncols())));
        }
        let ldl = l.adjoint() * l;
        lscale = lscale.max(max_abs(&ldl));
        gen += l.conjugate().kronecker(l);
        gen -= (id.kronecker(&ldl) + ldl.transpose().kronecker(&id)) * c64(0.5, 0.0);
    }
    let g = LindbladGenerator { dim: n, matrix: gen };
    let tr = g.trace_residual();
    if tr > TRACE_TOL * (1.0 + scale + lscale) {
        return Err(Error::InvalidArgument(format!("generator is not trace preserving (residual {tr:.3e})")));
    }
    Ok(g)
}

/// Checks that `rho` is a density matrix of the given dimension.
pub fn validate_state(rho: &CMat, dim: usize) -> Result<()> {
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::InvalidState(format!("expected {dim}x{dim}, found {}x{}", rho.nrows(), rho.ncols())));
    }
    let herm = hermiticity_residual(rho);
    if herm > 1e-10 {
        return Err(Error::InvalidState(format!("not Hermitian (residual {herm:.3e})")));
    }
    let tr = rho.trace();
    if (tr - c64(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    let min = min_eigenvalue(rho);
    if min < -1e-10 {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// Smallest eigenvalue of the Hermitian part of `rho`.
pub fn min_eigenvalue(rho: &CMat) -> f64 {
    let h = (rho + rho.adjoint()) * c64(0.5, 0.0);
    hermitian_eigenvalues(&h).into_iter().fold(f64::INFINITY, f64::min)
}

/// `ρ(t) = exp(t 𝓛) ρ₀` on a nondecreasing grid of nonnegative times.
pub fn evolve(gen: &LindbladGenerator, rho0: &CMat, t_grid: &[f64]) -> Result<Vec<CMat>> {
    validate_state(rho0, gen.dim)?;
    let mut prev = 0.0;
    for &t in t_grid {
        if !t.is_finite() || t < prev {
            return Err(Error::InvalidArgument("time grid must be finite, nonnegative and nondecreasing".into()));
        }
        prev = t;
    }
    // Steps of a uniform grid differ in their last bits; they share one propagator.
    let mut cache: HashMap<String, CMat> = HashMap::new();
    let mut out = Vec::with_capacity(t_grid.len());
    let mut v = vec_of(rho0);
    let mut now = 0.0;
    for &t in t_grid {
        let dt = t - now;
        if dt > 0.0 {
            let prop = cache
                .entry(format!("{dt:.12e}"))
                .or_insert_with(|| (&gen.matrix * Complex64::new(dt, 0.0)).exp());
            v = &*prop * v;
        }
        now = t;
        let rho = unvec(&v, gen.dim);
        let drift = (rho.trace() - c64(1.0, 0.0)).norm();
        if drift > TRACE_DRIFT_TOL {
            return Err(Error::InvalidState(format!("trace drift {drift:.3e} at t = {t}")));
        }
        out.push(rho);
    }
    Ok(out)
}

/// Parses `start:stop:step` into an inclusive uniform grid.
pub fn parse_time_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidArgument(format!("time grid `{spec}` is not start:stop:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    time_grid(nums[0], nums[1], nums[2])
}

pub fn time_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start >= 0.0 && stop >= start && step > 0.0 && stop.is_finite()) {
        return Err(Error::InvalidArgument("time grid needs 0 ≤ start ≤ stop and step > 0".into()));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}
