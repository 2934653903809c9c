use crate::blocks::block;
use crate::error::{Error, Result};
use crate::operator::{c64, CMat};
use crate::slh::OscillatorModel;

use super::fock::{fock_dim, ladder, total_excitation};
use super::lindblad::{lindblad, LindbladGenerator};

/// Concrete `H(k)`, `L(k)` of an oscillator model on `ĥ ⊗ Fock(cutoff)^m`.
#[derive(Clone, Debug)]
pub struct FiniteKModel {
    k: f64,
    cutoff: usize,
    dim: usize,
    oscillators: usize,
    h: CMat,
    l: Vec<CMat>,
}

impl FiniteKModel {
    pub fn build(model: &OscillatorModel, k: f64, cutoff: usize) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::InvalidArgument(format!("scaling k = {k} must be finite and nonnegative")));
        }
        if cutoff < 2 {
            return Err(Error::InvalidArgument("Fock cutoff must be at least 2".into()));
        }
        if !model.identities_hold() {
            return Err(Error::Precondition(
                "model has no Hamiltonian form (A + A* = -C*C etc. fail)".into(),
            ));
        }
        let d = model.dim();
        let m = model.oscillators();
        let n = model.channels();
        let f = fock_dim(m, cutoff);
        let idf = CMat::identity(f, f);
        let lad: Vec<CMat> = (0..m).map(|j| ladder(m, cutoff, j)).collect();
        let kc = c64(k, 0.0);

        let omega = model.omega();
        let gamma = model.gamma();
        let theta = model.theta();
        let mut h = theta.kronecker(&idf);
        for j in 0..m {
            let gj = block(&gamma, j, 0, d, d);
            h += (gj.kronecker(&lad[j].adjoint()) + gj.adjoint().kronecker(&lad[j])) * kc;
            for l in 0..m {
                h += block(&omega, j, l, d, d).kronecker(&(lad[j].adjoint() * &lad[l])) * (kc * kc);
            }
        }
        // Remove the rounding-level anti-Hermitian part so the generator check is exact.
        let h = (&h + h.adjoint()) * c64(0.5, 0.0);

        let mut ls = Vec::with_capacity(n);
        for c in 0..n {
            let mut lc = block(model.g(), c, 0, d, d).kronecker(&idf);
            for (j, a) in lad.iter().enumerate() {
                lc += block(model.c(), c, j, d, d).kronecker(a) * kc;
            }
            ls.push(lc);
        }
        Ok(FiniteKModel { k, cutoff, dim: d, oscillators: m, h, l: ls })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn slow_dim(&self) -> usize {
        self.dim
    }

    pub fn joint_dim(&self) -> usize {
        self.dim * fock_dim(self.oscillators, self.cutoff)
    }

    pub fn hamiltonian(&self) -> &CMat {
        &self.h
    }

    /// One coupling operator per output channel.
    pub fn couplings(&self) -> &[CMat] {
        &self.l
    }

    pub fn generator(&self) -> Result<LindbladGenerator> {
        lindblad(&self.h, &self.l)
    }

    /// `ρ ⊗ |0⟩⟨0|` with every oscillator in its ground state.
    pub fn ground_state_extension(&self, rho_slow: &CMat) -> CMat {
        let f = fock_dim(self.oscillators, self.cutoff);
        let mut vac = CMat::zeros(f, f);
        vac[(0, 0)] = c64(1.0, 0.0);
        rho_slow.kronecker(&vac)
    }

    /// Partial trace over the oscillators.
    pub fn reduce_to_slow(&self, rho: &CMat) -> CMat {
        let f = fock_dim(self.oscillators, self.cutoff);
        CMat::from_fn(self.dim, self.dim, |i, j| (0..f).map(|x| rho[(i * f + x, j * f + x)]).sum())
    }

    /// Population of states where some oscillator sits in its top level.
    pub fn top_level_population(&self, rho: &CMat) -> f64 {
        let f = fock_dim(self.oscillators, self.cutoff);
        let top = self.cutoff - 1;
        let mut p = 0.0;
        for x in 0..f {
            let occ = super::fock::occupations(x, self.oscillators, self.cutoff);
            if occ.contains(&top) {
                p += (0..self.dim).map(|h| rho[(h * f + x, h * f + x)].re).sum::<f64>();
            }
        }
        p
    }

    /// Population outside the slow sector.
    pub fn excited_population(&self, rho: &CMat) -> f64 {
        let f = fock_dim(self.oscillators, self.cutoff);
        let mut p = 0.0;
        for x in 0..f {
            if total_excitation(x, self.oscillators, self.cutoff) > 0 {
                p += (0..self.dim).map(|h| rho[(h * f + x, h * f + x)].re).sum::<f64>();
            }
        }
        p
    }
}
