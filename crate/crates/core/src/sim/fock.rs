use serde::Serialize;

use crate::blocks::block;
use crate::error::{Error, Result};
use crate::operator::{annihilator_matrix, is_strictly_hurwitz, max_abs, singular_values, CMat};

/// Dimension of `m` oscillators truncated at `cutoff` levels each.
pub fn fock_dim(m: usize, cutoff: usize) -> usize {
    cutoff.pow(m as u32)
}

/// Occupation numbers of a Fock basis index; oscillator 0 varies slowest.
pub fn occupations(index: usize, m: usize, cutoff: usize) -> Vec<usize> {
    let mut n = vec![0; m];
    let mut rest = index;
    for j in (0..m).rev() {
        n[j] = rest % cutoff;
        rest /= cutoff;
    }
    n
}

pub fn total_excitation(index: usize, m: usize, cutoff: usize) -> usize {
    occupations(index, m, cutoff).iter().sum()
}

/// Annihilator of oscillator `j` on the joint truncated Fock space.
pub fn ladder(m: usize, cutoff: usize, j: usize) -> CMat {
    let a = annihilator_matrix(cutoff);
    let mut out = CMat::identity(1, 1);
    for l in 0..m {
        out = if l == j {
            out.kronecker(&a)
        } else {
            out.kronecker(&CMat::identity(cutoff, cutoff))
        };
    }
    out
}

/// `Σ_jl A_jl ⊗ a_j* a_l` on `ĥ ⊗ Fock(cutoff)^m`.
pub fn y_operator(a: &CMat, d: usize, m: usize, cutoff: usize) -> Result<CMat> {
    if a.nrows() != m * d || a.ncols() != m * d {
        return Err(Error::Shape(format!(
            "A is {}x{}, expected {}x{}",
            a.nrows(),
            a.ncols(),
            m * d,
            m * d
        )));
    }
    let f = fock_dim(m, cutoff);
    let lad: Vec<CMat> = (0..m).map(|j| ladder(m, cutoff, j)).collect();
    let mut y = CMat::zeros(d * f, d * f);
    for j in 0..m {
        for l in 0..m {
            let ajl = block(a, j, l, d, d);
            y += ajl.kronecker(&(lad[j].adjoint() * &lad[l]));
        }
    }
    Ok(y)
}

/// Joint basis indices of the total-excitation-`n` sector.
pub fn sector_indices(n: usize, d: usize, m: usize, cutoff: usize) -> Vec<usize> {
    let f = fock_dim(m, cutoff);
    let fock: Vec<usize> = (0..f).filter(|&i| total_excitation(i, m, cutoff) == n).collect();
    (0..d).flat_map(|h| fock.iter().map(move |&i| h * f + i)).collect()
}

/// Occupation vectors of `m` oscillators with `n` quanta in total.
fn compositions(n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in compositions(n - first, m - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `Y (· ⊗ |occ⟩)` as a list of (target occupation, `d × d` block), using
/// the truncated ladder operators.
fn y_on_basis(a: &CMat, d: usize, m: usize, cutoff: usize, occ: &[usize]) -> Vec<(Vec<usize>, CMat)> {
    let mut out = Vec::new();
    for l in 0..m {
        if occ[l] == 0 {
            continue;
        }
        let mut mid = occ.to_vec();
        let amp_l = (occ[l] as f64).sqrt();
        mid[l] -= 1;
        for j in 0..m {
            if mid[j] + 1 >= cutoff {
                continue;
            }
            let amp = amp_l * ((mid[j] + 1) as f64).sqrt();
            let mut target = mid.clone();
            target[j] += 1;
            out.push((target, block(a, j, l, d, d) * num_complex::Complex64::new(amp, 0.0)));
        }
    }
    out
}

struct SectorScan {
    slow_residual: f64,
    leak: f64,
    sigma_min: Vec<f64>,
}

fn scan(a: &CMat, d: usize, m: usize, cutoff: usize) -> SectorScan {
    let slow_residual = y_on_basis(a, d, m, cutoff, &vec![0; m])
        .iter()
        .map(|(_, b)| max_abs(b))
        .fold(0.0, f64::max);
    let mut leak: f64 = 0.0;
    let mut sigma_min = Vec::new();
    for n in 1..cutoff {
        let states = compositions(n, m);
        let index: std::collections::HashMap<&[usize], usize> =
            states.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
        let mut yn = CMat::zeros(states.len() * d, states.len() * d);
        for (col, occ) in states.iter().enumerate() {
            for (target, blk) in y_on_basis(a, d, m, cutoff, occ) {
                match index.get(target.as_slice()) {
                    Some(&row) => {
                        let mut view = yn.view_mut((row * d, col * d), (d, d));
                        view += &blk;
                    }
                    None => leak = leak.max(max_abs(&blk)),
                }
            }
        }
        sigma_min.push(singular_values(&yn).iter().copied().fold(f64::INFINITY, f64::min));
    }
    SectorScan { slow_residual, leak, sigma_min }
}

#[derive(Clone, Debug, Serialize)]
pub struct YKernelReport {
    pub oscillators: usize,
    pub cutoff: usize,
    pub margin: f64,
    pub strictly_hurwitz: bool,
    /// max |Y (φ ⊗ |0⟩)| over the slow sector.
    pub slow_residual: f64,
    pub slow_residual_adjoint: f64,
    /// max |P_N Y P_N'| over N ≠ N' with N' below the cutoff.
    pub sector_leak: f64,
    /// Smallest singular value of `P_N Y P_N` for N = 1, …, cutoff − 1.
    pub sigma_min: Vec<f64>,
    pub sigma_min_adjoint: Vec<f64>,
}

impl YKernelReport {
    pub fn passes(&self) -> bool {
        self.slow_residual == 0.0
            && self.slow_residual_adjoint == 0.0
            && self.sector_leak == 0.0
            && self.sigma_min.iter().all(|&s| s > self.margin)
            && self.sigma_min_adjoint.iter().all(|&s| s > self.margin)
    }

    /// Passing although `A` is not strictly Hurwitz.
    pub fn non_hurwitz_pass(&self) -> bool {
        self.passes() && !self.strictly_hurwitz
    }
}

/// Checks that `Y = Σ A_jl ⊗ a_j* a_l` has the slow sector as kernel on a
/// truncated Fock space, and the same for `Y*` (built from `A*`).
///
/// Y is applied to the basis of each complete number sector `N < cutoff`,
/// so the cost grows with the sector sizes rather than with `cutoff^m`.
pub fn y_kernel_check(a: &CMat, d: usize, m: usize, cutoff: usize, margin: f64) -> Result<YKernelReport> {
    if cutoff < 2 {
        return Err(Error::InvalidArgument("Fock cutoff must be at least 2".into()));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("slow space dimension must be positive".into()));
    }
    if a.nrows() != m * d || a.ncols() != m * d {
        return Err(Error::Shape(format!(
            "A is {}x{}, expected {}x{}",
            a.nrows(),
            a.ncols(),
            m * d,
            m * d
        )));
    }
    let (fwd, adj) = if m == 0 {
        let empty = || SectorScan { slow_residual: 0.0, leak: 0.0, sigma_min: Vec::new() };
        (empty(), empty())
    } else {
        (scan(a, d, m, cutoff), scan(&a.adjoint(), d, m, cutoff))
    };
    Ok(YKernelReport {
        oscillators: m,
        cutoff,
        margin,
        strictly_hurwitz: is_strictly_hurwitz(a, margin)?,
        slow_residual: fwd.slow_residual,
        slow_residual_adjoint: adj.slow_residual,
        sector_leak: fwd.leak.max(adj.leak),
        sigma_min: fwd.sigma_min,
        sigma_min_adjoint: adj.sigma_min,
    })
}
