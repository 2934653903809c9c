#![allow(dead_code)]

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use slhnet::operator::{c64, CMat, HilbertSpace};
use slhnet::random;
use slhnet::slh::{OscillatorModel, SlhTriple, Wiring};

pub fn scalar(z: Complex64) -> CMat {
    CMat::from_element(1, 1, z)
}

pub fn space(label: &str, d: usize) -> HilbertSpace {
    HilbertSpace::single(label, d).unwrap()
}

/// Beam splitter `T = [[α, √(1−α²)], [√(1−α²), −α]]` on a trivial factor.
pub fn beam_splitter(alpha: f64) -> OscillatorModel {
    let b = (1.0 - alpha * alpha).sqrt();
    let t = CMat::from_row_slice(2, 2, &[c64(alpha, 0.), c64(b, 0.), c64(b, 0.), c64(-alpha, 0.)]);
    let triple = SlhTriple::new(space("bs", 1), 2, t, CMat::zeros(2, 1), CMat::zeros(1, 1)).unwrap();
    OscillatorModel::from_triple(&triple)
}

/// Undriven, resonant cavity `L = k√γ a`, scattering `S₀`.
pub fn cavity(gamma: f64, s0: Complex64) -> OscillatorModel {
    let z = CMat::zeros(1, 1);
    OscillatorModel::from_hamiltonian(
        space("cav", 1),
        1,
        1,
        scalar(s0),
        scalar(c64(gamma.sqrt(), 0.0)),
        z.clone(),
        z.clone(),
        z.clone(),
        z,
    )
    .unwrap()
}

/// Hand-derived reduced model of the beam-splitter loop with the cavity
/// on the internal arm: scalars (S, C, A) with G = Z = X = R = 0.
pub struct LoopOracle {
    pub s: Complex64,
    pub c: Complex64,
    pub a: Complex64,
    pub s_limit: Complex64,
}

pub fn loop_oracle(alpha: f64, s0: Complex64, gamma: f64) -> LoopOracle {
    let one = c64(1.0, 0.0);
    let b = (1.0 - alpha * alpha).sqrt();
    let den = one + s0 * alpha;
    LoopOracle {
        s: c64(alpha, 0.0) + s0 * (b * b) / den,
        c: c64(b * gamma.sqrt(), 0.0) / den,
        a: -(one - s0 * alpha) / den * (gamma / 2.0),
        s_limit: (c64(alpha, 0.0) - s0) / (one - s0 * alpha),
    }
}

pub fn loop_wiring() -> Wiring {
    Wiring::new(3, vec![(1, 2), (2, 1)]).unwrap()
}

/// Random model in Hamiltonian form. With `n ≥ m` the coupling `C` has full
/// column rank almost surely, so `A` is strictly Hurwitz.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, label: &str, d: usize, n: usize, m: usize) -> OscillatorModel {
    OscillatorModel::from_hamiltonian(
        space(label, d),
        n,
        m,
        random::unitary(rng, n * d),
        random::gaussian(rng, n * d, m * d),
        random::gaussian(rng, n * d, d) * c64(0.5, 0.0),
        random::hermitian(rng, m * d),
        random::gaussian(rng, m * d, d) * c64(0.5, 0.0),
        random::hermitian(rng, d),
    )
    .unwrap()
}

pub fn random_triple<R: Rng + ?Sized>(rng: &mut R, label: &str, d: usize, n: usize) -> SlhTriple {
    SlhTriple::from_hamiltonian(
        space(label, d),
        n,
        random::unitary(rng, n * d),
        random::gaussian(rng, n * d, d),
        random::hermitian(rng, d),
    )
    .unwrap()
}

pub struct RandomNetwork {
    pub components: Vec<OscillatorModel>,
    pub wiring: Wiring,
}

fn has_cycle(edges: &[(usize, usize)], nodes: usize) -> bool {
    // Repeatedly strip nodes without incoming edges.
    let mut alive = vec![true; nodes];
    loop {
        let removable: Vec<usize> = (0..nodes)
            .filter(|&v| alive[v] && !edges.iter().any(|&(a, b)| b == v && alive[a]))
            .collect();
        if removable.is_empty() {
            return alive.iter().any(|&x| x);
        }
        for v in removable {
            alive[v] = false;
        }
    }
}

/// Two or three components on a slow space of dimension at most 3, one or
/// two oscillators each, wired with at least one closed loop and at least
/// one external channel.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R) -> RandomNetwork {
    loop {
        let k = rng.random_range(2..=3);
        let big = rng.random_range(0..k);
        let big_dim = rng.random_range(1..=3);
        let mut components = Vec::new();
        let mut owner = Vec::new();
        for j in 0..k {
            let d = if j == big { big_dim } else { 1 };
            let m = rng.random_range(1..=2);
            let n = rng.random_range(m..=3);
            components.push(random_model(rng, &format!("c{j}"), d, n, m));
            owner.extend(std::iter::repeat_n(j, n));
        }
        let total = owner.len();
        let count = rng.random_range(1..total);
        let mut outs: Vec<usize> = (0..total).collect();
        let mut ins: Vec<usize> = (0..total).collect();
        outs.shuffle(rng);
        ins.shuffle(rng);
        let connections: Vec<(usize, usize)> = outs[..count].iter().copied().zip(ins[..count].iter().copied()).collect();
        let edges: Vec<(usize, usize)> = connections.iter().map(|&(o, i)| (owner[o], owner[i])).collect();
        if !has_cycle(&edges, k) {
            continue;
        }
        let wiring = Wiring::new(total, connections).unwrap();
        return RandomNetwork { components, wiring };
    }
}

/// S₀ ∈ {1, i, e^{iπ/4}}.
pub fn s0_values() -> [Complex64; 3] {
    [c64(1.0, 0.0), c64(0.0, 1.0), Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]
}

pub fn networks_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../networks")
}
