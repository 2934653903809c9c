use serde::{Deserialize, Serialize};

use super::{within, TOL};
use crate::blocks::{block_diag, grid2, select_block_rows, select_blocks, vstack};
use crate::error::{Error, Result};
use crate::operator::{
    c64, embed_blocks, embed_matrix, hermiticity_residual, is_finite, max_abs, CMat, HilbertSpace,
};

/// Residuals of the two structural constraints on a triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleResiduals {
    /// `max |S*S − I|, |SS* − I|`
    pub unitarity: f64,
    /// `max |K + K* + L*L|`
    pub damping: f64,
}

/// A Markovian component `(S, L, K)` with `n` channels on `ĥ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlhTriple {
    space: HilbertSpace,
    channels: usize,
    s: CMat,
    l: CMat,
    k: CMat,
}

fn check_shape(what: &str, m: &CMat, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::Shape(format!(
            "{what} is {}x{}, expected {rows}x{cols}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !is_finite(m) {
        return Err(Error::InvalidArgument(format!("{what} has non-finite entries")));
    }
    Ok(())
}

pub(crate) fn unitarity_max(s: &CMat) -> f64 {
    let n = s.nrows();
    let id = CMat::identity(n, n);
    max_abs(&(s.adjoint() * s - &id)).max(max_abs(&(s * s.adjoint() - &id)))
}

fn is_permutation(order: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    order.len() == n
        && order.iter().all(|&i| {
            if i >= n || seen[i] {
                false
            } else {
                seen[i] = true;
                true
            }
        })
}

impl SlhTriple {
    /// Validated constructor: shapes, unitary `S`, and `K + K* + L*L = 0`.
    pub fn new(space: HilbertSpace, channels: usize, s: CMat, l: CMat, k: CMat) -> Result<Self> {
        let t = Self::new_unchecked(space, channels, s, l, k)?;
        let r = t.residuals();
        if !within(r.unitarity, 0.0, TOL) {
            return Err(Error::NotUnitary {
                what: "S".into(),
                residual: r.unitarity,
            });
        }
        if !within(r.damping, t.damping_scale(), TOL) {
            return Err(Error::InvalidArgument(format!(
                "K + K* + L*L does not vanish (residual {:.3e})",
                r.damping
            )));
        }
        Ok(t)
    }

    /// Shape-checked constructor without the structural checks.
    pub fn new_unchecked(space: HilbertSpace, channels: usize, s: CMat, l: CMat, k: CMat) -> Result<Self> {
        let d = space.total_dim();
        check_shape("S", &s, channels * d, channels * d)?;
        check_shape("L", &l, channels * d, d)?;
        check_shape("K", &k, d, d)?;
        Ok(Self {
            space,
            channels,
            s,
            l,
            k,
        })
    }

    /// `K = −½ L*L − iH`.
    pub fn from_hamiltonian(space: HilbertSpace, channels: usize, s: CMat, l: CMat, h: CMat) -> Result<Self> {
        let d = space.total_dim();
        check_shape("H", &h, d, d)?;
        let res = hermiticity_residual(&h);
        if !within(res, max_abs(&h), TOL) {
            return Err(Error::NotHermitian {
                what: "H".into(),
                residual: res,
            });
        }
        check_shape("L", &l, channels * d, d)?;
        let k = (l.adjoint() * &l).scale(-0.5) - h * c64(0.0, 1.0);
        Self::new(space, channels, s, l, k)
    }

    /// `(I, 0, 0)`.
    pub fn identity(space: HilbertSpace, channels: usize) -> Self {
        let d = space.total_dim();
        Self {
            space,
            channels,
            s: CMat::identity(channels * d, channels * d),
            l: CMat::zeros(channels * d, d),
            k: CMat::zeros(d, d),
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn s(&self) -> &CMat {
        &self.s
    }

    pub fn l(&self) -> &CMat {
        &self.l
    }

    pub fn k(&self) -> &CMat {
        &self.k
    }

    /// `H = i(K + ½ L*L)`.
    pub fn hamiltonian(&self) -> CMat {
        (&self.k + (self.l.adjoint() * &self.l).scale(0.5)) * c64(0.0, 1.0)
    }

    /// Coupling operator of channel `j`.
    pub fn l_channel(&self, j: usize) -> CMat {
        let d = self.dim();
        self.l.view((j * d, 0), (d, d)).into_owned()
    }

    fn damping_scale(&self) -> f64 {
        max_abs(&self.k) + max_abs(&(self.l.adjoint() * &self.l))
    }

    pub fn residuals(&self) -> TripleResiduals {
        TripleResiduals {
            unitarity: unitarity_max(&self.s),
            damping: max_abs(&(&self.k + self.k.adjoint() + self.l.adjoint() * &self.l)),
        }
    }

    /// True when both residuals are within [`TOL`] (scaled).
    pub fn is_valid(&self) -> bool {
        let r = self.residuals();
        within(r.unitarity, 0.0, TOL) && within(r.damping, self.damping_scale(), TOL)
    }

    /// The same triple acting on a larger (or reordered) space.
    pub fn embed(&self, target: &HilbertSpace) -> Result<SlhTriple> {
        let n = self.channels;
        Ok(Self {
            space: target.clone(),
            channels: n,
            s: embed_blocks(&self.s, n, n, &self.space, target)?,
            l: embed_blocks(&self.l, n, 1, &self.space, target)?,
            k: embed_matrix(&self.k, &self.space, target)?,
        })
    }

    /// `S'[i, j] = S[out_order[i], in_order[j]]`, `L'[i] = L[out_order[i]]`.
    pub fn reorder_channels(&self, out_order: &[usize], in_order: &[usize]) -> Result<SlhTriple> {
        let n = self.channels;
        if !is_permutation(out_order, n) || !is_permutation(in_order, n) {
            return Err(Error::InvalidArgument(format!(
                "channel orders must be permutations of 0..{n}"
            )));
        }
        let d = self.dim();
        Ok(Self {
            space: self.space.clone(),
            channels: n,
            s: select_blocks(&self.s, out_order, in_order, d),
            l: select_block_rows(&self.l, out_order, d),
            k: self.k.clone(),
        })
    }

    /// `G = [[K, −L*S], [L, S − I]]`.
    pub fn ito_matrix(&self) -> ItoMatrix {
        let nd = self.channels * self.dim();
        let top_right = -(self.l.adjoint() * &self.s);
        let g = grid2(
            &self.k,
            &top_right,
            &self.l,
            &(&self.s - CMat::identity(nd, nd)),
        );
        ItoMatrix {
            space: self.space.clone(),
            channels: self.channels,
            g,
            s: self.s.clone(),
        }
    }
}

/// Series product `G₂ ◁ G₁`: the output of `G₁` feeds `G₂`.
///
/// Operators are embedded in the union of both spaces, `G₁`'s factors first.
pub fn series_product(g2: &SlhTriple, g1: &SlhTriple) -> Result<SlhTriple> {
    if g1.channels != g2.channels {
        return Err(Error::Shape(format!(
            "series product needs equal channel counts, got {} and {}",
            g2.channels, g1.channels
        )));
    }
    let space = g1.space.union(&g2.space)?;
    let a = g1.embed(&space)?;
    let b = g2.embed(&space)?;
    let s = &b.s * &a.s;
    let l = &b.l + &b.s * &a.l;
    let k = &a.k + &b.k - b.l.adjoint() * (&b.s * &a.l);
    SlhTriple::new_unchecked(space, g1.channels, s, l, k)
}

/// Open-loop concatenation on the tensor product of the component spaces:
/// block-diagonal `S`, stacked `L`, summed `K`.
pub fn concatenate(components: &[SlhTriple]) -> Result<SlhTriple> {
    if components.is_empty() {
        return Err(Error::InvalidArgument("nothing to concatenate".into()));
    }
    let mut space = HilbertSpace::trivial();
    for c in components {
        space = space.tensor(&c.space)?;
    }
    let d = space.total_dim();
    let embedded: Vec<SlhTriple> = components
        .iter()
        .map(|c| c.embed(&space))
        .collect::<Result<_>>()?;
    let channels = embedded.iter().map(|c| c.channels).sum();
    let s = block_diag(&embedded.iter().map(|c| &c.s).collect::<Vec<_>>());
    let l = vstack(&embedded.iter().map(|c| &c.l).collect::<Vec<_>>(), d);
    let k = embedded.iter().fold(CMat::zeros(d, d), |acc, c| acc + &c.k);
    SlhTriple::new_unchecked(space, channels, s, l, k)
}

/// The `(1+n) × (1+n)` block Itô matrix of a triple.
#[derive(Clone, Debug, PartialEq)]
pub struct ItoMatrix {
    space: HilbertSpace,
    channels: usize,
    g: CMat,
    // `(S − I) + I` is not always `S` in floating point.
    s: CMat,
}

impl ItoMatrix {
    pub fn new(space: HilbertSpace, channels: usize, g: CMat) -> Result<Self> {
        let d = space.total_dim();
        check_shape("G", &g, (1 + channels) * d, (1 + channels) * d)?;
        let nd = channels * d;
        let s = g.view((d, d), (nd, nd)).into_owned() + CMat::identity(nd, nd);
        Ok(Self { space, channels, g, s })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn g(&self) -> &CMat {
        &self.g
    }

    /// Read off `(S, L, K)` from `[[K, −L*S], [L, S − I]]`. The upper right
    /// block must be consistent with the rest.
    pub fn to_triple(&self) -> Result<SlhTriple> {
        let d = self.space.total_dim();
        let nd = self.channels * d;
        let k = self.g.view((0, 0), (d, d)).into_owned();
        let l = self.g.view((d, 0), (nd, d)).into_owned();
        let s = self.s.clone();
        let top_right = self.g.view((0, d), (d, nd)).into_owned();
        let expected = -(l.adjoint() * &s);
        let res = max_abs(&(&top_right - &expected));
        if !within(res, max_abs(&expected), TOL) {
            return Err(Error::Shape(format!(
                "Itô matrix upper right block differs from −L*S by {res:.3e}"
            )));
        }
        SlhTriple::new(self.space.clone(), self.channels, s, l, k)
    }
}

#[derive(Serialize, Deserialize)]
struct TripleJson {
    space: HilbertSpace,
    channels: usize,
    #[serde(rename = "S", with = "crate::json::cmat")]
    s: CMat,
    #[serde(rename = "L", with = "crate::json::cmat")]
    l: CMat,
    #[serde(rename = "K", with = "crate::json::cmat")]
    k: CMat,
    #[serde(rename = "H", default, with = "crate::json::opt_cmat", skip_serializing_if = "Option::is_none")]
    h: Option<CMat>,
}

impl Serialize for SlhTriple {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        // Empty channel lists still need their column count on the way back in.
        let l = if self.channels == 0 { CMat::zeros(0, d) } else { self.l.clone() };
        TripleJson {
            space: self.space.clone(),
            channels: self.channels,
            s: self.s.clone(),
            l,
            k: self.k.clone(),
            h: Some(self.hamiltonian()),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for SlhTriple {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = TripleJson::deserialize(de)?;
        let d = raw.space.total_dim();
        let s = if raw.channels == 0 { CMat::zeros(0, 0) } else { raw.s };
        let l = if raw.channels == 0 { CMat::zeros(0, d) } else { raw.l };
        SlhTriple::new(raw.space, raw.channels, s, l, raw.k).map_err(D::Error::custom)
    }
}

#[derive(Serialize)]
struct ItoJson<'a> {
    space: &'a HilbertSpace,
    channels: usize,
    #[serde(rename = "G", with = "crate::json::cmat")]
    g: &'a CMat,
}

impl Serialize for ItoMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ItoJson {
            space: &self.space,
            channels: self.channels,
            g: &self.g,
        }
        .serialize(ser)
    }
}
