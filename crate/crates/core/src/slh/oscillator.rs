use serde::{Deserialize, Serialize};

use super::feedback::Wiring;
use super::triple::{unitarity_max, ItoMatrix, SlhTriple, TripleResiduals};
use super::{within, TOL};
use crate::blocks::{block_diag, grid2, hstack, select_block_rows, select_blocks, sub, vstack};
use crate::error::{Error, Result};
use crate::operator::{
    c64, condition_number, embed_blocks, embed_matrix, hermiticity_residual, invert_checked,
    is_finite, is_strictly_hurwitz, max_abs, CMat, HilbertSpace, HURWITZ_MARGIN, MAX_CONDITION,
};
use crate::schur::{BlockMatrix, Partition};
use crate::sim::y_kernel_check;

/// Fock cutoff used when a non-Hurwitz `A` falls back to the explicit
/// kernel check on `Y`.
pub const ELIMINATION_KERNEL_CUTOFF: usize = 4;

/// A component (or network) with `m` fast oscillators, scaled by `k`:
///
/// ```text
/// S(k) = S
/// L(k) = k C a + G
/// K(k) = k² a*A a + k a*Z + k X a + R
/// ```
///
/// `C` is `n × m`, `A` is `m × m`, `Z` is `m × 1`, `X` is `1 × m` in blocks of
/// operators on `ĥ`.
#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorModel {
    space: HilbertSpace,
    channels: usize,
    oscillators: usize,
    s: CMat,
    c: CMat,
    g: CMat,
    a: CMat,
    z: CMat,
    x: CMat,
    r: CMat,
}

/// Limit triple of an adiabatic elimination plus the evidence behind it.
#[derive(Clone, Debug, Serialize)]
pub struct Elimination {
    pub triple: SlhTriple,
    pub strictly_hurwitz: bool,
    pub a_condition: f64,
    pub residuals: TripleResiduals,
    pub warnings: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn check_shapes(
    d: usize,
    n: usize,
    m: usize,
    s: &CMat,
    c: &CMat,
    g: &CMat,
    a: &CMat,
    z: &CMat,
    x: &CMat,
    r: &CMat,
) -> Result<()> {
    let expect = [
        ("S", s, n * d, n * d),
        ("C", c, n * d, m * d),
        ("G", g, n * d, d),
        ("A", a, m * d, m * d),
        ("Z", z, m * d, d),
        ("X", x, d, m * d),
        ("R", r, d, d),
    ];
    for (what, mat, rows, cols) in expect {
        if mat.shape() != (rows, cols) {
            return Err(Error::Shape(format!(
                "{what} is {}x{}, expected {rows}x{cols}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if !is_finite(mat) {
            return Err(Error::InvalidArgument(format!("{what} has non-finite entries")));
        }
    }
    Ok(())
}

impl OscillatorModel {
    /// Validated constructor: shapes, unitary `S`, the three identities
    /// `A + A* = −C*C`, `X + Z* = −G*C`, `R + R* = −G*G`, and `A` invertible.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        space: HilbertSpace,
        channels: usize,
        oscillators: usize,
        s: CMat,
        c: CMat,
        g: CMat,
        a: CMat,
        z: CMat,
        x: CMat,
        r: CMat,
    ) -> Result<Self> {
        let model = Self::new_unchecked(space, channels, oscillators, s, c, g, a, z, x, r)?;
        let u = unitarity_max(&model.s);
        if !within(u, 0.0, TOL) {
            return Err(Error::NotUnitary {
                what: "S".into(),
                residual: u,
            });
        }
        model.check_identities()?;
        if oscillators > 0 {
            let cond = model.a_condition();
            if !(cond < MAX_CONDITION) {
                return Err(Error::Singular {
                    what: "A".into(),
                    cond,
                });
            }
        }
        Ok(model)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new_unchecked(
        space: HilbertSpace,
        channels: usize,
        oscillators: usize,
        s: CMat,
        c: CMat,
        g: CMat,
        a: CMat,
        z: CMat,
        x: CMat,
        r: CMat,
    ) -> Result<Self> {
        let d = space.total_dim();
        check_shapes(d, channels, oscillators, &s, &c, &g, &a, &z, &x, &r)?;
        Ok(Self {
            space,
            channels,
            oscillators,
            s,
            c,
            g,
            a,
            z,
            x,
            r,
        })
    }

    /// Blocks from Hamiltonian data `H(k) = k² a*Ωa + k a*Γ + k Γ*a + Θ`:
    ///
    /// ```text
    /// A = −½C*C − iΩ    Z = −½C*G − iΓ
    /// X = −½G*C − iΓ*   R = −½G*G − iΘ
    /// ```
    #[allow(clippy::too_many_arguments)]
    pub fn from_hamiltonian(
        space: HilbertSpace,
        channels: usize,
        oscillators: usize,
        s: CMat,
        c: CMat,
        g: CMat,
        omega: CMat,
        gamma: CMat,
        theta: CMat,
    ) -> Result<Self> {
        let d = space.total_dim();
        let md = oscillators * d;
        for (what, mat, rows, cols) in [
            ("Omega", &omega, md, md),
            ("Gamma", &gamma, md, d),
            ("Theta", &theta, d, d),
            ("C", &c, channels * d, md),
            ("G", &g, channels * d, d),
        ] {
            if mat.shape() != (rows, cols) {
                return Err(Error::Shape(format!(
                    "{what} is {}x{}, expected {rows}x{cols}",
                    mat.nrows(),
                    mat.ncols()
                )));
            }
        }
        for (what, h) in [("Omega", &omega), ("Theta", &theta)] {
            let res = hermiticity_residual(h);
            if !within(res, max_abs(h), TOL) {
                return Err(Error::NotHermitian {
                    what: what.into(),
                    residual: res,
                });
            }
        }
        let i = c64(0.0, 1.0);
        let a = (c.adjoint() * &c).scale(-0.5) - &omega * i;
        let z = (c.adjoint() * &g).scale(-0.5) - &gamma * i;
        let x = (g.adjoint() * &c).scale(-0.5) - gamma.adjoint() * i;
        let r = (g.adjoint() * &g).scale(-0.5) - &theta * i;
        Self::new(space, channels, oscillators, s, c, g, a, z, x, r)
    }

    /// A triple seen as a model without oscillators: `G = L`, `R = K`.
    pub fn from_triple(t: &SlhTriple) -> Self {
        let d = t.dim();
        let n = t.channels();
        Self {
            space: t.space().clone(),
            channels: n,
            oscillators: 0,
            s: t.s().clone(),
            c: CMat::zeros(n * d, 0),
            g: t.l().clone(),
            a: CMat::zeros(0, 0),
            z: CMat::zeros(0, d),
            x: CMat::zeros(d, 0),
            r: t.k().clone(),
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

    pub fn oscillators(&self) -> usize {
        self.oscillators
    }

    pub fn s(&self) -> &CMat {
        &self.s
    }

    pub fn c(&self) -> &CMat {
        &self.c
    }

    pub fn g(&self) -> &CMat {
        &self.g
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn z(&self) -> &CMat {
        &self.z
    }

    pub fn x(&self) -> &CMat {
        &self.x
    }

    pub fn r(&self) -> &CMat {
        &self.r
    }

    /// `Ω = i(A + ½C*C)`
    pub fn omega(&self) -> CMat {
        (&self.a + (self.c.adjoint() * &self.c).scale(0.5)) * c64(0.0, 1.0)
    }

    /// `Γ = i(Z + ½C*G)`
    pub fn gamma(&self) -> CMat {
        (&self.z + (self.c.adjoint() * &self.g).scale(0.5)) * c64(0.0, 1.0)
    }

    /// `Θ = i(R + ½G*G)`
    pub fn theta(&self) -> CMat {
        (&self.r + (self.g.adjoint() * &self.g).scale(0.5)) * c64(0.0, 1.0)
    }

    pub fn a_condition(&self) -> f64 {
        condition_number(&self.a)
    }

    pub fn is_strictly_hurwitz(&self, margin: f64) -> bool {
        is_strictly_hurwitz(&self.a, margin).expect("A is square")
    }

    /// Max-entry residuals of `A + A* + C*C`, `X + Z* + G*C`, `R + R* + G*G`.
    pub fn identity_residuals(&self) -> [f64; 3] {
        let cc = self.c.adjoint() * &self.c;
        let gc = self.g.adjoint() * &self.c;
        let gg = self.g.adjoint() * &self.g;
        [
            max_abs(&(&self.a + self.a.adjoint() + cc)),
            max_abs(&(&self.x + self.z.adjoint() + gc)),
            max_abs(&(&self.r + self.r.adjoint() + gg)),
        ]
    }

    fn identity_scales(&self) -> [f64; 3] {
        let cc = max_abs(&(self.c.adjoint() * &self.c));
        let gc = max_abs(&(self.g.adjoint() * &self.c));
        let gg = max_abs(&(self.g.adjoint() * &self.g));
        [
            cc + max_abs(&self.a),
            gc + max_abs(&self.x) + max_abs(&self.z),
            gg + max_abs(&self.r),
        ]
    }

    pub fn identities_hold(&self) -> bool {
        let res = self.identity_residuals();
        let scale = self.identity_scales();
        (0..3).all(|i| within(res[i], scale[i], TOL))
    }

    fn check_identities(&self) -> Result<()> {
        let res = self.identity_residuals();
        let scale = self.identity_scales();
        let names = ["A + A* = -C*C", "X + Z* = -G*C", "R + R* = -G*G"];
        for i in 0..3 {
            if !within(res[i], scale[i], TOL) {
                return Err(Error::Precondition(format!(
                    "identity {} violated (residual {:.3e})",
                    names[i], res[i]
                )));
            }
        }
        Ok(())
    }

    pub fn embed(&self, target: &HilbertSpace) -> Result<OscillatorModel> {
        let (n, m) = (self.channels, self.oscillators);
        let from = &self.space;
        Ok(Self {
            space: target.clone(),
            channels: n,
            oscillators: m,
            s: embed_blocks(&self.s, n, n, from, target)?,
            c: embed_blocks(&self.c, n, m, from, target)?,
            g: embed_blocks(&self.g, n, 1, from, target)?,
            a: embed_blocks(&self.a, m, m, from, target)?,
            z: embed_blocks(&self.z, m, 1, from, target)?,
            x: embed_blocks(&self.x, 1, m, from, target)?,
            r: embed_matrix(&self.r, from, target)?,
        })
    }

    /// Channel relabeling: `S' = S[out, in]`, `C' = C[out]`, `G' = G[out]`.
    pub fn reorder_channels(&self, out_order: &[usize], in_order: &[usize]) -> Result<OscillatorModel> {
        // Reuse the triple's permutation checks on (S, G, R).
        let t = SlhTriple::new_unchecked(self.space.clone(), self.channels, self.s.clone(), self.g.clone(), self.r.clone())?
            .reorder_channels(out_order, in_order)?;
        let d = self.dim();
        let mut out = self.clone();
        out.s = t.s().clone();
        out.g = t.l().clone();
        out.c = select_block_rows(&self.c, out_order, d);
        Ok(out)
    }

    /// Open-loop assembly on the tensor product of the component spaces.
    pub fn concatenate(models: &[OscillatorModel]) -> Result<OscillatorModel> {
        if models.is_empty() {
            return Err(Error::InvalidArgument("nothing to concatenate".into()));
        }
        let mut space = HilbertSpace::trivial();
        for m in models {
            space = space.tensor(&m.space)?;
        }
        let d = space.total_dim();
        let e: Vec<OscillatorModel> = models.iter().map(|m| m.embed(&space)).collect::<Result<_>>()?;
        let n = e.iter().map(|m| m.channels).sum();
        let m = e.iter().map(|m| m.oscillators).sum();
        let s = block_diag(&e.iter().map(|x| &x.s).collect::<Vec<_>>());
        let c = block_diag(&e.iter().map(|x| &x.c).collect::<Vec<_>>());
        let g = vstack(&e.iter().map(|x| &x.g).collect::<Vec<_>>(), d);
        let a = block_diag(&e.iter().map(|x| &x.a).collect::<Vec<_>>());
        let z = vstack(&e.iter().map(|x| &x.z).collect::<Vec<_>>(), d);
        let x = hstack(&e.iter().map(|x| &x.x).collect::<Vec<_>>(), d);
        let r = e.iter().fold(CMat::zeros(d, d), |acc, x| acc + &x.r);
        Self::new(space, n, m, s, c, g, a, z, x, r)
    }

    /// Series product `m2 ◁ m1` at the level of the scaled coefficients.
    pub fn series_product(m2: &OscillatorModel, m1: &OscillatorModel) -> Result<OscillatorModel> {
        if m1.channels != m2.channels {
            return Err(Error::Shape(format!(
                "series product needs equal channel counts, got {} and {}",
                m2.channels, m1.channels
            )));
        }
        let space = m1.space.union(&m2.space)?;
        let p = m1.embed(&space)?;
        let q = m2.embed(&space)?;
        let d = space.total_dim();
        let (m1d, m2d) = (p.oscillators * d, q.oscillators * d);
        let s2c1 = &q.s * &p.c;
        let s2g1 = &q.s * &p.g;
        let s = &q.s * &p.s;
        let c = hstack(&[&s2c1, &q.c], s.nrows());
        let g = &q.g + &s2g1;
        let a = grid2(
            &p.a,
            &CMat::zeros(m1d, m2d),
            &-(q.c.adjoint() * &s2c1),
            &q.a,
        );
        let z = vstack(&[&p.z, &(&q.z - q.c.adjoint() * &s2g1)], d);
        let x = hstack(&[&(&p.x - q.g.adjoint() * &s2c1), &q.x], d);
        let r = &p.r + &q.r - q.g.adjoint() * &s2g1;
        Self::new(space, p.channels, p.oscillators + q.oscillators, s, c, g, a, z, x, r)
    }

    /// The coefficient matrix `g` with `G(k) = [I, k a*] g [I; k a]`, over
    /// labels `s` (`ĥ`), `s_ch` (channels), `f` (oscillators) and `f_ch`
    /// (oscillators times channels, identically zero).
    pub fn g_matrix(&self) -> BlockMatrix {
        let (d, n, m) = (self.dim(), self.channels, self.oscillators);
        let (nd, md, mnd) = (n * d, m * d, m * n * d);
        let g_ss = grid2(
            &self.r,
            &-(self.g.adjoint() * &self.s),
            &self.g,
            &(&self.s - CMat::identity(nd, nd)),
        );
        let g_sf = grid2(&self.x, &CMat::zeros(d, mnd), &self.c, &CMat::zeros(nd, mnd));
        let g_fs = grid2(
            &self.z,
            &-(self.c.adjoint() * &self.s),
            &CMat::zeros(mnd, d),
            &CMat::zeros(mnd, nd),
        );
        let g_ff = block_diag(&[&self.a, &CMat::zeros(mnd, mnd)]);
        let entries = grid2(&g_ss, &g_sf, &g_fs, &g_ff);
        let p = Partition::new([("s", d), ("s_ch", nd), ("f", md), ("f_ch", mnd)]).expect("distinct labels");
        BlockMatrix::square(p, entries).expect("consistent sizes")
    }

    /// `g` regrouped over the labels
    /// `1` slow external (`ĥ ⊗ (ℂ ⊕ 𝔎_e)`), `2` slow internal,
    /// `3` fast (oscillators) and `4` fast internal (zero),
    /// after aligning channels with `wiring`.
    pub fn four_way_g(&self, wiring: &Wiring) -> Result<BlockMatrix> {
        if wiring.channels() != self.channels {
            return Err(Error::Shape(format!(
                "wiring is for {} channels but the model has {}",
                wiring.channels(),
                self.channels
            )));
        }
        let aligned = self.reorder_channels(&wiring.output_order(), &wiring.input_order())?;
        let g = aligned.g_matrix();
        let (d, m) = (self.dim(), self.oscillators);
        let ne = wiring.external_count();
        let ni = wiring.internal_count();
        let s_ch = g.rows().range("s_ch")?;
        let f = g.rows().range("f")?;
        let f_ch = g.rows().range("f_ch")?;
        let one: Vec<usize> = (0..d).chain(s_ch.start..s_ch.start + ne * d).collect();
        let two: Vec<usize> = (s_ch.start + ne * d..s_ch.end).collect();
        let three: Vec<usize> = f.collect();
        let four: Vec<usize> = (f_ch.start..f_ch.start + m * ni * d).collect();
        let order: Vec<usize> = one.iter().chain(&two).chain(&three).chain(&four).cloned().collect();
        let e = g.entries();
        let entries = CMat::from_fn(order.len(), order.len(), |i, j| e[(order[i], order[j])]);
        let p = Partition::new([
            ("1", one.len()),
            ("2", two.len()),
            ("3", three.len()),
            ("4", four.len()),
        ])?;
        BlockMatrix::square(p, entries)
    }

    /// Instantaneous feedback on the scaled model: complement label `2` of
    /// [`four_way_g`](Self::four_way_g) and read the reduced blocks back off.
    ///
    /// The result is shape- and identity-checked but its `A` may be singular.
    pub fn feedback_reduce(&self, wiring: &Wiring) -> Result<OscillatorModel> {
        let g4 = self.four_way_g(wiring)?;
        let ne = wiring.external_count();
        let (d, m) = (self.dim(), self.oscillators);
        if wiring.internal_count() == 0 {
            return self.reorder_channels(&wiring.output_order(), &wiring.input_order());
        }
        let s_ii = g4.block(&["2"], &["2"])?;
        let cond = condition_number(&s_ii);
        if !(cond < MAX_CONDITION) {
            return Err(Error::IllPosed(format!(
                "S_ii - I is singular (condition number {cond:.3e})"
            )));
        }
        let red = g4.complement_unchecked(&["2"])?;
        let e = red.entries();
        let (ned, md) = (ne * d, m * d);
        let r = sub(e, 0, 0, d, d);
        let top = sub(e, 0, d, d, ned);
        let g = sub(e, d, 0, ned, d);
        let s = sub(e, d, d, ned, ned) + CMat::identity(ned, ned);
        let x = sub(e, 0, (1 + ne) * d, d, md);
        let c = sub(e, d, (1 + ne) * d, ned, md);
        let z = sub(e, (1 + ne) * d, 0, md, d);
        let zs = sub(e, (1 + ne) * d, d, md, ned);
        let a = sub(e, (1 + ne) * d, (1 + ne) * d, md, md);
        let gs = -(g.adjoint() * &s);
        let cs = -(c.adjoint() * &s);
        for (what, got, want) in [("-G*S", &top, &gs), ("-C*S", &zs, &cs)] {
            let res = max_abs(&(got - want));
            if !within(res, max_abs(want), TOL) {
                return Err(Error::Precondition(format!(
                    "reduced {what} block inconsistent (residual {res:.3e})"
                )));
            }
        }
        let model = Self::new_unchecked(self.space.clone(), ne, m, s, c, g, a, z, x, r)?;
        let u = unitarity_max(&model.s);
        if !within(u, 0.0, TOL) {
            return Err(Error::NotUnitary {
                what: "reduced S".into(),
                residual: u,
            });
        }
        model.check_identities()?;
        Ok(model)
    }

    /// Adiabatic elimination:
    ///
    /// ```text
    /// Ŝ = (I + C A⁻¹ C*) S,   L̂ = G − C A⁻¹ Z,   K̂ = R − X A⁻¹ Z
    /// ```
    ///
    /// Requires `A` strictly Hurwitz, or failing that an explicit check that
    /// `ker Y` is the slow sector (reported as a warning).
    pub fn eliminate(&self) -> Result<Elimination> {
        let (d, n) = (self.dim(), self.channels);
        if self.oscillators == 0 {
            let triple = SlhTriple::new(self.space.clone(), n, self.s.clone(), self.g.clone(), self.r.clone())?;
            let residuals = triple.residuals();
            return Ok(Elimination {
                triple,
                strictly_hurwitz: true,
                a_condition: 1.0,
                residuals,
                warnings: Vec::new(),
            });
        }
        self.check_identities()?;
        let a_condition = self.a_condition();
        if !(a_condition < MAX_CONDITION) {
            return Err(Error::Precondition(format!(
                "A is singular (condition number {a_condition:.3e})"
            )));
        }
        let strictly_hurwitz = self.is_strictly_hurwitz(HURWITZ_MARGIN);
        let mut warnings = Vec::new();
        if !strictly_hurwitz {
            let report = y_kernel_check(&self.a, d, self.oscillators, ELIMINATION_KERNEL_CUTOFF, HURWITZ_MARGIN)?;
            if !report.passes() {
                return Err(Error::Precondition(
                    "A is not strictly Hurwitz and ker Y is not the slow sector".into(),
                ));
            }
            warnings.push("non-Hurwitz pass: A is not strictly Hurwitz but ker Y is the slow sector".into());
        }
        let a_inv = invert_checked(&self.a, "A")?;
        let nd = n * d;
        let s_hat = (CMat::identity(nd, nd) + &self.c * (&a_inv * self.c.adjoint())) * &self.s;
        let l_hat = &self.g - &self.c * (&a_inv * &self.z);
        let k_hat = &self.r - &self.x * (&a_inv * &self.z);
        let triple = SlhTriple::new(self.space.clone(), n, s_hat, l_hat, k_hat).map_err(|e| {
            Error::Precondition(format!("limit triple is not valid: {e}"))
        })?;
        let residuals = triple.residuals();
        Ok(Elimination {
            triple,
            strictly_hurwitz,
            a_condition,
            residuals,
            warnings,
        })
    }

    /// The limit Itô matrix as the complement `g / g_ff`.
    pub fn schur_eliminate(&self) -> Result<ItoMatrix> {
        let red = self.g_matrix().complement(&["f", "f_ch"])?;
        ItoMatrix::new(self.space.clone(), self.channels, red.into_entries())
    }

    /// Channel blocks `rows × cols` of `S`.
    pub fn s_blocks(&self, rows: &[usize], cols: &[usize]) -> CMat {
        select_blocks(&self.s, rows, cols, self.dim())
    }
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    space: HilbertSpace,
    channels: usize,
    oscillators: usize,
    #[serde(rename = "S", with = "crate::json::cmat")]
    s: CMat,
    #[serde(rename = "C", with = "crate::json::cmat")]
    c: CMat,
    #[serde(rename = "G", with = "crate::json::cmat")]
    g: CMat,
    #[serde(rename = "A", with = "crate::json::cmat")]
    a: CMat,
    #[serde(rename = "Z", with = "crate::json::cmat")]
    z: CMat,
    #[serde(rename = "X", with = "crate::json::cmat")]
    x: CMat,
    #[serde(rename = "R", with = "crate::json::cmat")]
    r: CMat,
    #[serde(rename = "Omega", default, with = "crate::json::opt_cmat", skip_serializing_if = "Option::is_none")]
    omega: Option<CMat>,
    #[serde(rename = "Gamma", default, with = "crate::json::opt_cmat", skip_serializing_if = "Option::is_none")]
    gamma: Option<CMat>,
    #[serde(rename = "Theta", default, with = "crate::json::opt_cmat", skip_serializing_if = "Option::is_none")]
    theta: Option<CMat>,
}

impl Serialize for OscillatorModel {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ModelJson {
            space: self.space.clone(),
            channels: self.channels,
            oscillators: self.oscillators,
            s: self.s.clone(),
            c: self.c.clone(),
            g: self.g.clone(),
            a: self.a.clone(),
            z: self.z.clone(),
            x: self.x.clone(),
            r: self.r.clone(),
            omega: Some(self.omega()),
            gamma: Some(self.gamma()),
            theta: Some(self.theta()),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for OscillatorModel {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ModelJson::deserialize(de)?;
        let d = raw.space.total_dim();
        let (n, m) = (raw.channels, raw.oscillators);
        // Nested arrays cannot carry the width of an empty matrix.
        let fix = |mat: CMat, rows: usize, cols: usize| {
            if mat.is_empty() {
                CMat::zeros(rows, cols)
            } else {
                mat
            }
        };
        OscillatorModel::new(
            raw.space,
            n,
            m,
            fix(raw.s, n * d, n * d),
            fix(raw.c, n * d, m * d),
            fix(raw.g, n * d, d),
            fix(raw.a, m * d, m * d),
            fix(raw.z, m * d, d),
            fix(raw.x, d, m * d),
            raw.r,
        )
        .map_err(D::Error::custom)
    }
}
