use std::collections::HashMap;

use serde::Serialize;

use super::{BlockSet, ComponentDecl, Diagnostics, Direction, Key, NetworkSpec, ParseDiagnostic, PortRef, Value};
use crate::error::{Error, Result};
use crate::operator::{CMat, HilbertSpace};
use crate::slh::{OscillatorModel, SlhTriple, Wiring};

/// Largest accepted `dim`, `inputs` or `oscillators`.
pub const MAX_SIZE: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChannelRef {
    pub component: String,
    pub port: usize,
}

/// An open-loop network ready for reduction.
#[derive(Clone, Debug, Serialize)]
pub struct CompiledNetwork {
    /// All components side by side on the tensor product of their spaces.
    pub open: OscillatorModel,
    /// The same network as a triple when no component has oscillators.
    pub triple: Option<SlhTriple>,
    pub wiring: Wiring,
    /// Each component on its own factor, in declaration order.
    #[serde(skip)]
    pub components: Vec<OscillatorModel>,
    /// Global channel `c` is port `channels[c].port` of its component.
    pub channels: Vec<ChannelRef>,
}

impl CompiledNetwork {
    pub fn has_oscillators(&self) -> bool {
        self.open.oscillators() > 0
    }

    /// Name of reduced channel `k`: its external input and output ports.
    pub fn external_names(&self) -> Vec<(String, String)> {
        let name = |c: usize, dir: &str| format!("{}.{dir}[{}]", self.channels[c].component, self.channels[c].port);
        self.wiring
            .external_inputs()
            .iter()
            .zip(self.wiring.external_outputs())
            .map(|(&i, &o)| (name(i, "in"), name(o, "out")))
            .collect()
    }
}

fn matrix(c: &ComponentDecl, key: Key, rows: usize, cols: usize) -> Result<CMat> {
    match c.get(key) {
        None => Ok(CMat::zeros(rows, cols)),
        Some(Value::Number(x)) if rows == cols => Ok(CMat::identity(rows, cols) * num_complex::Complex64::new(*x, 0.0)),
        Some(Value::Number(x)) if *x == 0.0 => Ok(CMat::zeros(rows, cols)),
        Some(Value::Number(_)) => Err(Error::Shape(format!(
            "{} is {rows}x{cols}; only 0 may be given as a scalar",
            key.name()
        ))),
        Some(Value::Matrix(r)) => {
            let found = (r.len(), r.first().map_or(0, |x| x.len()));
            if found != (rows, cols) {
                return Err(Error::Shape(format!(
                    "{} is {}x{}, expected {rows}x{cols}",
                    key.name(),
                    found.0,
                    found.1
                )));
            }
            Ok(CMat::from_fn(rows, cols, |i, j| r[i][j]))
        }
    }
}

/// The model of a single component on the factor named after it.
pub(crate) fn build_component(c: &ComponentDecl) -> Result<OscillatorModel> {
    let (d, n, m) = (c.dim(), c.channels(), c.oscillators());
    if d == 0 || d > MAX_SIZE || n > MAX_SIZE || m > MAX_SIZE {
        return Err(Error::InvalidArgument(format!("sizes must satisfy 1 <= dim <= {MAX_SIZE}, inputs and oscillators <= {MAX_SIZE}")));
    }
    let space = HilbertSpace::single(c.name.clone(), d)?;
    let (nd, md) = (n * d, m * d);
    let s = match c.get(Key::S) {
        None => CMat::identity(nd, nd),
        Some(_) => matrix(c, Key::S, nd, nd)?,
    };
    match c.block_set() {
        BlockSet::Plain => {
            let t = SlhTriple::from_hamiltonian(space, n, s, matrix(c, Key::L, nd, d)?, matrix(c, Key::H, d, d)?)?;
            Ok(OscillatorModel::from_triple(&t))
        }
        BlockSet::Numeric => OscillatorModel::new(
            space,
            n,
            m,
            s,
            matrix(c, Key::C, nd, md)?,
            matrix(c, Key::G, nd, d)?,
            matrix(c, Key::A, md, md)?,
            matrix(c, Key::Z, md, d)?,
            matrix(c, Key::X, d, md)?,
            matrix(c, Key::R, d, d)?,
        ),
        BlockSet::Hamiltonian => OscillatorModel::from_hamiltonian(
            space,
            n,
            m,
            s,
            matrix(c, Key::C, nd, md)?,
            matrix(c, Key::G, nd, d)?,
            matrix(c, Key::Omega, md, md)?,
            matrix(c, Key::Gamma, md, d)?,
            matrix(c, Key::Theta, d, d)?,
        ),
    }
}

/// Builds the open-loop model and the channel wiring of a parsed network.
pub fn compile(spec: &NetworkSpec) -> Result<CompiledNetwork, Diagnostics> {
    let mut diags = Vec::new();
    let mut models = Vec::new();
    for c in &spec.components {
        match build_component(c) {
            Ok(m) => models.push(m),
            Err(e) => diags.push(ParseDiagnostic::error(c.span, format!("component `{}`: {e}", c.name))),
        }
    }
    if !diags.is_empty() {
        return Err(Diagnostics(diags));
    }
    let mut offsets = HashMap::new();
    let mut channels = Vec::new();
    for (c, m) in spec.components.iter().zip(&models) {
        offsets.insert(c.name.as_str(), channels.len());
        channels.extend((0..m.channels()).map(|port| ChannelRef { component: c.name.clone(), port }));
    }
    let global = |p: &PortRef| offsets.get(p.component.as_str()).map(|o| o + p.index);
    let fail = |p: &PortRef, msg: String| Diagnostics(vec![ParseDiagnostic::error(p.span, msg)]);

    let mut connections = Vec::new();
    for conn in &spec.connections {
        let o = global(&conn.from).ok_or_else(|| fail(&conn.from, format!("unknown port {}", conn.from)))?;
        let i = global(&conn.to).ok_or_else(|| fail(&conn.to, format!("unknown port {}", conn.to)))?;
        connections.push((o, i));
    }
    let total = channels.len();
    let wiring = if spec.externals.is_empty() {
        Wiring::new(total, connections)
    } else {
        let mut ins = Vec::new();
        let mut outs = Vec::new();
        for p in &spec.externals {
            let g = global(p).ok_or_else(|| fail(p, format!("unknown port {p}")))?;
            match p.direction {
                Direction::In => ins.push(g),
                Direction::Out => outs.push(g),
            }
        }
        Wiring::with_externals(total, connections, ins, outs)
    };
    let span = spec.externals.first().map(|p| p.span).unwrap_or_default();
    let wiring = wiring.map_err(|e| Diagnostics(vec![ParseDiagnostic::error(span, e.to_string())]))?;

    let open = if models.is_empty() {
        OscillatorModel::from_triple(&SlhTriple::identity(HilbertSpace::trivial(), 0))
    } else {
        OscillatorModel::concatenate(&models).map_err(|e| Diagnostics(vec![ParseDiagnostic::error(Default::default(), e.to_string())]))?
    };
    let triple = if open.oscillators() == 0 {
        Some(SlhTriple::new_unchecked(open.space().clone(), open.channels(), open.s().clone(), open.g().clone(), open.r().clone()).map_err(
            |e| Diagnostics(vec![ParseDiagnostic::error(Default::default(), e.to_string())]),
        )?)
    } else {
        None
    };
    Ok(CompiledNetwork { open, triple, wiring, components: models, channels })
}
