use serde::{Deserialize, Serialize};

use super::triple::{ItoMatrix, SlhTriple};
use crate::blocks::{select_block_cols, select_block_rows, select_blocks};
use crate::error::{Error, Result};
use crate::operator::{condition_number, invert_checked, CMat, MAX_CONDITION};
use crate::schur::{BlockMatrix, Partition};

/// Channel wiring of an open-loop network.
///
/// Each connection `(out, in)` feeds output channel `out` back into input
/// channel `in`. The unconnected ports are the external ones; the `k`-th
/// external input pairs with the `k`-th external output in the reduced model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wiring {
    channels: usize,
    connections: Vec<(usize, usize)>,
    external_inputs: Vec<usize>,
    external_outputs: Vec<usize>,
}

impl Wiring {
    /// External ports in ascending channel order.
    pub fn new(channels: usize, connections: Vec<(usize, usize)>) -> Result<Self> {
        let ins: Vec<usize> = (0..channels).filter(|c| !connections.iter().any(|p| p.1 == *c)).collect();
        let outs: Vec<usize> = (0..channels).filter(|c| !connections.iter().any(|p| p.0 == *c)).collect();
        Self::with_externals(channels, connections, ins, outs)
    }

    pub fn open(channels: usize) -> Self {
        Self::new(channels, Vec::new()).expect("no connections")
    }

    pub fn with_externals(
        channels: usize,
        connections: Vec<(usize, usize)>,
        external_inputs: Vec<usize>,
        external_outputs: Vec<usize>,
    ) -> Result<Self> {
        let mut out_used = vec![false; channels];
        let mut in_used = vec![false; channels];
        for &(o, i) in &connections {
            if o >= channels || i >= channels {
                return Err(Error::InvalidArgument(format!(
                    "connection {o} -> {i} refers to a channel outside 0..{channels}"
                )));
            }
            if out_used[o] {
                return Err(Error::InvalidArgument(format!("output {o} is connected twice")));
            }
            if in_used[i] {
                return Err(Error::InvalidArgument(format!("input {i} is connected twice")));
            }
            out_used[o] = true;
            in_used[i] = true;
        }
        let check = |ext: &[usize], used: &[bool], kind: &str| -> Result<()> {
            let mut seen = used.to_vec();
            for &c in ext {
                if c >= channels || seen[c] {
                    return Err(Error::InvalidArgument(format!(
                        "external {kind} {c} is connected, repeated or out of range"
                    )));
                }
                seen[c] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::InvalidArgument(format!(
                    "some unconnected {kind}s are missing from the external list"
                )));
            }
            Ok(())
        };
        check(&external_inputs, &in_used, "input")?;
        check(&external_outputs, &out_used, "output")?;
        Ok(Self {
            channels,
            connections,
            external_inputs,
            external_outputs,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn connections(&self) -> &[(usize, usize)] {
        &self.connections
    }

    pub fn external_inputs(&self) -> &[usize] {
        &self.external_inputs
    }

    pub fn external_outputs(&self) -> &[usize] {
        &self.external_outputs
    }

    pub fn external_count(&self) -> usize {
        self.external_inputs.len()
    }

    pub fn internal_count(&self) -> usize {
        self.connections.len()
    }

    /// External outputs, then the connected outputs in connection order.
    pub fn output_order(&self) -> Vec<usize> {
        self.external_outputs
            .iter()
            .cloned()
            .chain(self.connections.iter().map(|c| c.0))
            .collect()
    }

    /// External inputs, then the connected inputs in connection order, so
    /// the `j`-th internal output column lines up with the input it feeds.
    pub fn input_order(&self) -> Vec<usize> {
        self.external_inputs
            .iter()
            .cloned()
            .chain(self.connections.iter().map(|c| c.1))
            .collect()
    }
}

fn check_channels(t: &SlhTriple, w: &Wiring) -> Result<()> {
    if t.channels() != w.channels() {
        return Err(Error::Shape(format!(
            "wiring is for {} channels but the model has {}",
            w.channels(),
            t.channels()
        )));
    }
    Ok(())
}

/// Instantaneous feedback on the Itô matrix: `G_ee − G_ei (G_ii)⁻¹ G_ie`
/// after aligning connected outputs with the inputs they feed.
pub fn feedback_reduce(g: &ItoMatrix, wiring: &Wiring) -> Result<ItoMatrix> {
    Ok(feedback_reduce_triple(&g.to_triple()?, wiring)?.ito_matrix())
}

pub fn feedback_reduce_triple(t: &SlhTriple, wiring: &Wiring) -> Result<SlhTriple> {
    check_channels(t, wiring)?;
    let aligned = t.reorder_channels(&wiring.output_order(), &wiring.input_order())?;
    if wiring.internal_count() == 0 {
        return Ok(aligned);
    }
    let d = t.dim();
    let ne = wiring.external_count();
    let ni = wiring.internal_count();
    let g = aligned.ito_matrix();
    let partition = Partition::new([("0", d), ("e", ne * d), ("i", ni * d)])?;
    let bm = BlockMatrix::square(partition, g.g().clone())?;
    let g_ii = bm.block(&["i"], &["i"])?;
    let cond = condition_number(&g_ii);
    if !(cond < MAX_CONDITION) {
        return Err(Error::IllPosed(format!(
            "S_ii - I is singular (condition number {cond:.3e})"
        )));
    }
    let reduced = bm.complement_unchecked(&["i"])?;
    ItoMatrix::new(t.space().clone(), ne, reduced.into_entries())?.to_triple()
}

/// Fractional-linear form of the same reduction, used as a cross-check:
///
/// ```text
/// S' = S_ee + S_ei (I − S_ii)⁻¹ S_ie
/// L' = L_e + S_ei (I − S_ii)⁻¹ L_i
/// K' = K − (L*S)_i (I − S_ii)⁻¹ L_i
/// ```
pub fn feedback_reduce_explicit(t: &SlhTriple, wiring: &Wiring) -> Result<SlhTriple> {
    check_channels(t, wiring)?;
    let d = t.dim();
    let ext_out = wiring.external_outputs();
    let ext_in = wiring.external_inputs();
    let int_out: Vec<usize> = wiring.connections().iter().map(|c| c.0).collect();
    let int_in: Vec<usize> = wiring.connections().iter().map(|c| c.1).collect();
    let s = t.s();
    let s_ee = select_blocks(s, ext_out, ext_in, d);
    let s_ei = select_blocks(s, ext_out, &int_in, d);
    let s_ie = select_blocks(s, &int_out, ext_in, d);
    let s_ii = select_blocks(s, &int_out, &int_in, d);
    let l_e = select_block_rows(t.l(), ext_out, d);
    let l_i = select_block_rows(t.l(), &int_out, d);
    let ni = int_in.len() * d;
    let inv = invert_checked(&(CMat::identity(ni, ni) - s_ii), "I - S_ii")
        .map_err(|e| Error::IllPosed(e.to_string()))?;
    let ls_i = select_block_cols(&(t.l().adjoint() * s), &int_in, d);
    let s_red = &s_ee + &s_ei * (&inv * &s_ie);
    let l_red = &l_e + &s_ei * (&inv * &l_i);
    let k_red = t.k() - ls_i * (&inv * &l_i);
    SlhTriple::new(t.space().clone(), ext_in.len(), s_red, l_red, k_red)
}
