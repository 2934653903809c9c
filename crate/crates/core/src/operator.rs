//! Finite-dimensional complex operator algebra.
//!
//! Operators live on labeled tensor-product spaces. Basis indices follow the
//! declared factor order with the rightmost factor varying fastest, so an
//! operator `x` on factor `"sys"` of `("sys":2, "osc":3)` embeds as `x ⊗ I₃`.
//!
//! Block-structured quantities elsewhere in the crate (scattering matrices,
//! coupling columns, Itô matrices) are plain [`CMat`]s whose `d × d` blocks are
//! operators on a common [`HilbertSpace`] of dimension `d`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Default relative tolerance for subspace inclusion tests.
pub const INCLUSION_TOL: f64 = 1e-9;

/// Relative cutoff (against the largest singular value) used when a
/// numerical rank decision feeds a Schur complement or an inclusion test.
pub const RANK_RTOL: f64 = 1e-11;

/// "Invertible" means a condition number below this bound.
pub const MAX_CONDITION: f64 = 1e12;

/// Default margin for [`is_strictly_hurwitz`].
pub const HURWITZ_MARGIN: f64 = 1e-9;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest absolute entry; zero for empty matrices.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff: shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `‖M − M*‖_F`.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

/// `max(‖U*U − I‖_F, ‖UU* − I‖_F)`.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    let id = CMat::identity(n, n);
    let a = (u.adjoint() * u - &id).norm();
    let b = (u * u.adjoint() - &id).norm();
    a.max(b)
}

/// Singular value decomposition returning `(U, σ, V)` with thin factors.
/// Empty inputs produce empty factors.
fn to_faer(m: &CMat) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

// nalgebra's complex SVD loses accuracy on some nearly singular inputs.
fn thin_svd(m: &CMat) -> (CMat, DVector<f64>, CMat) {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return (CMat::zeros(r, 0), DVector::zeros(0), CMat::zeros(c, 0));
    }
    let svd = to_faer(m).thin_svd().expect("SVD did not converge");
    let s = svd.S().column_vector();
    let s = DVector::from_fn(s.nrows(), |i, _| s[i].re);
    (from_faer(svd.U()), s, from_faer(svd.V()))
}

pub fn singular_values(m: &CMat) -> DVector<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(0);
    }
    let s = to_faer(m).singular_values().expect("SVD did not converge");
    DVector::from_vec(s)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    to_faer(h)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("eigensolver did not converge")
}

pub fn largest_singular_value(m: &CMat) -> f64 {
    singular_values(m).iter().cloned().fold(0.0, f64::max)
}

/// `σ_max / σ_min` for a square matrix; `inf` when singular. Empty matrices
/// are perfectly conditioned.
pub fn condition_number(m: &CMat) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    if m.nrows() == 0 {
        return 1.0;
    }
    let s = singular_values(m);
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse of a square matrix whose condition number is below
/// [`MAX_CONDITION`].
pub fn invert_checked(m: &CMat, what: &str) -> Result<CMat> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "{what}: cannot invert a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let cond = condition_number(m);
    if !(cond < MAX_CONDITION) {
        return Err(Error::Singular {
            what: what.to_string(),
            cond,
        });
    }
    m.clone().try_inverse().ok_or_else(|| Error::Singular {
        what: what.to_string(),
        cond,
    })
}

/// The conventional SVD rank cutoff `max(rows, cols) · ε · σ_max`.
pub fn default_rank_tol(m: &CMat) -> f64 {
    let n = m.nrows().max(m.ncols()) as f64;
    n * f64::EPSILON * largest_singular_value(m)
}

/// Moore-Penrose pseudoinverse, inverting singular values strictly greater
/// than `rank_tol` (default [`default_rank_tol`]).
pub fn moore_penrose(m: &CMat, rank_tol: Option<f64>) -> CMat {
    let (u, s, v) = thin_svd(m);
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let tol = rank_tol.unwrap_or_else(|| m.nrows().max(m.ncols()) as f64 * f64::EPSILON * smax);
    pinv_from_svd(m.shape(), &u, &s, &v, tol)
}

/// Pseudoinverse with the cutoff `rtol · σ_max`.
pub fn pinv_relative(m: &CMat, rtol: f64) -> CMat {
    let (u, s, v) = thin_svd(m);
    let smax = s.iter().cloned().fold(0.0, f64::max);
    pinv_from_svd(m.shape(), &u, &s, &v, rtol * smax)
}

fn pinv_from_svd(shape: (usize, usize), u: &CMat, s: &DVector<f64>, v: &CMat, tol: f64) -> CMat {
    let (r, c) = shape;
    let mut out = CMat::zeros(c, r);
    for (i, &sv) in s.iter().enumerate() {
        if sv > tol && sv > 0.0 {
            let vi = v.column(i);
            let ui = u.column(i);
            out += (vi * ui.adjoint()).scale(1.0 / sv);
        }
    }
    out
}

/// `im B ⊆ im A`, tested as `‖(I − AA⁺)B‖_F ≤ tol · max(1, ‖B‖_F)`.
pub fn image_inclusion(b: &CMat, a: &CMat) -> Result<bool> {
    image_inclusion_tol(b, a, INCLUSION_TOL)
}

pub fn image_inclusion_tol(b: &CMat, a: &CMat, tol: f64) -> Result<bool> {
    if b.nrows() != a.nrows() {
        return Err(Error::Shape(format!(
            "image inclusion needs equal row counts, got {} and {}",
            b.nrows(),
            a.nrows()
        )));
    }
    let bn = b.norm();
    if b.ncols() == 0 || bn == 0.0 {
        return Ok(true);
    }
    let ap = pinv_relative(a, RANK_RTOL);
    let residual = (b - a * (&ap * b)).norm();
    Ok(residual <= tol * bn.max(1.0))
}

/// `ker A ⊆ ker C`, tested as `‖C(I − A⁺A)‖_F ≤ tol · max(1, ‖C‖_F)`.
pub fn kernel_inclusion(a: &CMat, c: &CMat) -> Result<bool> {
    kernel_inclusion_tol(a, c, INCLUSION_TOL)
}

pub fn kernel_inclusion_tol(a: &CMat, c: &CMat, tol: f64) -> Result<bool> {
    if a.ncols() != c.ncols() {
        return Err(Error::Shape(format!(
            "kernel inclusion needs equal column counts, got {} and {}",
            a.ncols(),
            c.ncols()
        )));
    }
    let cn = c.norm();
    if c.nrows() == 0 || cn == 0.0 {
        return Ok(true);
    }
    let ap = pinv_relative(a, RANK_RTOL);
    let residual = (c - (c * &ap) * a).norm();
    Ok(residual <= tol * cn.max(1.0))
}

/// Largest eigenvalue of the Hermitian part `(A + A*)/2`.
pub fn hermitian_part_max_eigenvalue(a: &CMat) -> Result<f64> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let h = hermitian_part(a);
    Ok(hermitian_eigenvalues(&h).into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Strict Hurwitz stability: `Re⟨φ, Aφ⟩ < 0` for all `φ ≠ 0`, i.e. the
/// Hermitian part is negative definite by at least `margin`. Empty matrices
/// are vacuously stable.
pub fn is_strictly_hurwitz(a: &CMat, margin: f64) -> Result<bool> {
    Ok(hermitian_part_max_eigenvalue(a)? < -margin)
}

/// Orthonormal columns spanning a subspace.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    columns: CMat,
}

impl SubspaceBasis {
    pub fn columns(&self) -> &CMat {
        &self.columns
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> CMat {
        &self.columns * self.columns.adjoint()
    }

    /// Deviation of the Gram matrix from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let r = self.dim();
        (self.columns.adjoint() * &self.columns - CMat::identity(r, r)).norm()
    }
}

/// Numerical null space: right singular vectors with `σ ≤ rank_tol`
/// (default [`default_rank_tol`]).
pub fn kernel_basis(a: &CMat, rank_tol: Option<f64>) -> SubspaceBasis {
    let (r, c) = a.shape();
    if c == 0 {
        return SubspaceBasis {
            columns: CMat::zeros(0, 0),
        };
    }
    // Thin SVD only yields min(r, c) right vectors; pad wide inputs with zero rows.
    let padded = if r < c {
        let mut p = CMat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let (_, s, v) = thin_svd(&padded);
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let tol = rank_tol.unwrap_or(r.max(c) as f64 * f64::EPSILON * smax);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= tol).collect();
    let mut columns = CMat::zeros(c, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        columns.set_column(j, &v.column(i));
    }
    SubspaceBasis { columns }
}

/// A labeled tensor factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceFactor {
    pub label: String,
    pub dim: usize,
}

impl SpaceFactor {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: label.into(),
            dim,
        }
    }
}

/// Ordered tensor product of labeled factors. The empty product is the
/// trivial one-dimensional space.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<SpaceFactor>", into = "Vec<SpaceFactor>")]
pub struct HilbertSpace {
    factors: Vec<SpaceFactor>,
}

impl TryFrom<Vec<SpaceFactor>> for HilbertSpace {
    type Error = Error;

    fn try_from(factors: Vec<SpaceFactor>) -> Result<Self> {
        HilbertSpace::new(factors)
    }
}

impl From<HilbertSpace> for Vec<SpaceFactor> {
    fn from(space: HilbertSpace) -> Self {
        space.factors
    }
}

impl HilbertSpace {
    pub fn new(factors: Vec<SpaceFactor>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(Error::InvalidArgument(format!(
                    "factor `{}` has dimension 0",
                    f.label
                )));
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::DuplicateFactor(f.label.clone()));
            }
        }
        Ok(Self { factors })
    }

    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new(vec![SpaceFactor::new(label, dim)])
    }

    pub fn factors(&self) -> &[SpaceFactor] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    /// `self ⊗ other`; labels must be disjoint.
    pub fn tensor(&self, other: &HilbertSpace) -> Result<HilbertSpace> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        HilbertSpace::new(factors)
    }

    /// Factors of `self` followed by those of `other` not already present.
    /// Shared labels must agree in dimension.
    pub fn union(&self, other: &HilbertSpace) -> Result<HilbertSpace> {
        let mut factors = self.factors.clone();
        for f in &other.factors {
            match self.factors.iter().find(|g| g.label == f.label) {
                Some(g) if g.dim != f.dim => {
                    return Err(Error::FactorDim {
                        label: f.label.clone(),
                        expected: g.dim,
                        found: f.dim,
                    })
                }
                Some(_) => {}
                None => factors.push(f.clone()),
            }
        }
        HilbertSpace::new(factors)
    }

    /// True when both spaces hold the same factors, in any order.
    pub fn same_factors(&self, other: &HilbertSpace) -> bool {
        self.factors.len() == other.factors.len()
            && self.factors.iter().all(|f| other.factors.contains(f))
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1].dim;
        }
        strides
    }
}

/// Embed a matrix acting on `from` into `to`, tensoring with identities on the
/// factors of `to` absent from `from` and permuting indices to `to`'s order.
pub fn embed_matrix(m: &CMat, from: &HilbertSpace, to: &HilbertSpace) -> Result<CMat> {
    let dop = from.total_dim();
    if m.shape() != (dop, dop) {
        return Err(Error::Shape(format!(
            "operator is {}x{} but its space has dimension {dop}",
            m.nrows(),
            m.ncols()
        )));
    }
    if from == to {
        return Ok(m.clone());
    }
    let mut pos = Vec::with_capacity(from.factors.len());
    for f in &from.factors {
        let p = to
            .position(&f.label)
            .ok_or_else(|| Error::UnknownFactor(f.label.clone()))?;
        if to.factors[p].dim != f.dim {
            return Err(Error::FactorDim {
                label: f.label.clone(),
                expected: to.factors[p].dim,
                found: f.dim,
            });
        }
        pos.push(p);
    }
    let tstrides = to.strides();
    let fstrides = from.strides();
    let n = to.total_dim();

    // Offset in the target index contributed by each operator index.
    let offsets: Vec<usize> = (0..dop)
        .map(|idx| {
            pos.iter()
                .enumerate()
                .map(|(i, &p)| (idx / fstrides[i]) % from.factors[i].dim * tstrides[p])
                .sum()
        })
        .collect();

    let mut out = CMat::zeros(n, n);
    for r in 0..n {
        let mut op_row = 0;
        let mut own = 0;
        for (i, &p) in pos.iter().enumerate() {
            let digit = (r / tstrides[p]) % to.factors[p].dim;
            op_row += digit * fstrides[i];
            own += digit * tstrides[p];
        }
        let base = r - own;
        for (op_col, off) in offsets.iter().enumerate() {
            let v = m[(op_row, op_col)];
            if v != Complex64::new(0.0, 0.0) {
                out[(r, base + off)] = v;
            }
        }
    }
    Ok(out)
}

/// Embed every `d_from × d_from` block of a block matrix into `to`.
pub fn embed_blocks(
    m: &CMat,
    row_blocks: usize,
    col_blocks: usize,
    from: &HilbertSpace,
    to: &HilbertSpace,
) -> Result<CMat> {
    let df = from.total_dim();
    let dt = to.total_dim();
    if m.shape() != (row_blocks * df, col_blocks * df) {
        return Err(Error::Shape(format!(
            "expected a {}x{} block matrix of {df}x{df} blocks, got {}x{}",
            row_blocks,
            col_blocks,
            m.nrows(),
            m.ncols()
        )));
    }
    if from == to {
        return Ok(m.clone());
    }
    let mut out = CMat::zeros(row_blocks * dt, col_blocks * dt);
    for i in 0..row_blocks {
        for j in 0..col_blocks {
            let block = m.view((i * df, j * df), (df, df)).into_owned();
            let e = embed_matrix(&block, from, to)?;
            out.view_mut((i * dt, j * dt), (dt, dt)).copy_from(&e);
        }
    }
    Ok(out)
}

/// Truncated ladder operator with `a[n−1, n] = √n`.
pub fn annihilator_matrix(cutoff: usize) -> CMat {
    let mut a = CMat::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        a[(n - 1, n)] = c64((n as f64).sqrt(), 0.0);
    }
    a
}

/// A square matrix tagged with the space it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: CMat,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CMat) -> Result<Self> {
        let d = space.total_dim();
        if matrix.shape() != (d, d) {
            return Err(Error::Shape(format!(
                "operator is {}x{} but its space has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !is_finite(&matrix) {
            return Err(Error::InvalidArgument("operator has non-finite entries".into()));
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let d = space.total_dim();
        Self {
            space,
            matrix: CMat::identity(d, d),
        }
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        let d = space.total_dim();
        Self {
            space,
            matrix: CMat::zeros(d, d),
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn adjoint(&self) -> Operator {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// Product `self · rhs`; both must act on the same space.
    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        if self.space != rhs.space {
            return Err(Error::Shape("operators act on different spaces".into()));
        }
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    /// `self ⊗ I` on the remaining factors of `target`, in `target`'s order.
    pub fn tensor_embed(&self, target: &HilbertSpace) -> Result<Operator> {
        Ok(Self {
            space: target.clone(),
            matrix: embed_matrix(&self.matrix, &self.space, target)?,
        })
    }

    /// Truncated annihilator on a single factor of dimension `cutoff`.
    pub fn annihilator(label: impl Into<String>, cutoff: usize) -> Result<Operator> {
        if cutoff < 2 {
            return Err(Error::InvalidArgument(format!(
                "Fock cutoff must be at least 2, got {cutoff}"
            )));
        }
        Ok(Self {
            space: HilbertSpace::single(label, cutoff)?,
            matrix: annihilator_matrix(cutoff),
        })
    }

    pub fn moore_penrose(&self, rank_tol: Option<f64>) -> Operator {
        Self {
            space: self.space.clone(),
            matrix: moore_penrose(&self.matrix, rank_tol),
        }
    }

    pub fn is_strictly_hurwitz(&self, margin: f64) -> bool {
        is_strictly_hurwitz(&self.matrix, margin).expect("operators are square")
    }

    pub fn kernel_basis(&self, rank_tol: Option<f64>) -> SubspaceBasis {
        kernel_basis(&self.matrix, rank_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(vals: &[f64]) -> CMat {
        let n = vals.len();
        CMat::from_fn(n, n, |i, j| if i == j { c64(vals[i], 0.0) } else { c64(0.0, 0.0) })
    }

    fn sigma_x() -> CMat {
        CMat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)])
    }

    fn two_three() -> HilbertSpace {
        HilbertSpace::new(vec![SpaceFactor::new("sys", 2), SpaceFactor::new("osc", 3)]).unwrap()
    }

    #[test]
    fn embed_identity_is_identity() {
        let sys = HilbertSpace::single("sys", 2).unwrap();
        let e = Operator::identity(sys).tensor_embed(&two_three()).unwrap();
        assert_eq!(e.matrix(), &CMat::identity(6, 6));
    }

    #[test]
    fn embed_on_first_factor_is_kronecker() {
        let sys = HilbertSpace::single("sys", 2).unwrap();
        let op = Operator::new(sys, sigma_x()).unwrap();
        let e = op.tensor_embed(&two_three()).unwrap();
        let expected = sigma_x().kronecker(&CMat::identity(3, 3));
        assert_eq!(e.matrix(), &expected);
    }

    #[test]
    fn embed_on_last_factor_is_kronecker() {
        let a = Operator::annihilator("osc", 3).unwrap();
        let e = a.tensor_embed(&two_three()).unwrap();
        let expected = CMat::identity(2, 2).kronecker(&annihilator_matrix(3));
        assert_eq!(e.matrix(), &expected);
    }

    #[test]
    fn embedded_square_matches_square_embedding() {
        let a = Operator::annihilator("osc", 3).unwrap();
        let target = two_three();
        let ea = a.tensor_embed(&target).unwrap();
        let a2 = a.compose(&a).unwrap().tensor_embed(&target).unwrap();
        assert!(max_abs_diff(&(ea.matrix() * ea.matrix()), a2.matrix()) < 1e-12);
    }

    #[test]
    fn embedding_reorders_factors() {
        let swapped =
            HilbertSpace::new(vec![SpaceFactor::new("osc", 3), SpaceFactor::new("sys", 2)]).unwrap();
        let x = CMat::from_fn(6, 6, |i, j| c64(i as f64, j as f64));
        let there = embed_matrix(&x, &two_three(), &swapped).unwrap();
        let back = embed_matrix(&there, &swapped, &two_three()).unwrap();
        assert_eq!(back, x);
        // (s, o) = (0, 1), (1, 2) sit at (o, s) = (1, 0), (2, 1).
        assert_eq!(there[(2, 5)], x[(1, 5)]);
    }

    #[test]
    fn embed_errors() {
        let other = HilbertSpace::single("bath", 2).unwrap();
        let op = Operator::identity(other);
        assert!(matches!(op.tensor_embed(&two_three()), Err(Error::UnknownFactor(_))));
        let wrong = Operator::identity(HilbertSpace::single("sys", 3).unwrap());
        assert!(matches!(wrong.tensor_embed(&two_three()), Err(Error::FactorDim { .. })));
    }

    #[test]
    fn annihilator_truncations() {
        let a2 = annihilator_matrix(2);
        assert_eq!(a2, CMat::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(0., 0.), c64(0., 0.)]));
        let a4 = annihilator_matrix(4);
        for n in 1..4 {
            assert_eq!(a4[(n - 1, n)], c64((n as f64).sqrt(), 0.0));
        }
        let num = a4.adjoint() * &a4;
        for n in 0..4 {
            assert!((num[(n, n)] - c64(n as f64, 0.0)).norm() < 1e-14);
        }
        assert!(Operator::annihilator("osc", 1).is_err());
    }

    #[test]
    fn pseudoinverse_of_diagonal() {
        let p = moore_penrose(&diag(&[2.0, 0.0]), None);
        assert!(max_abs_diff(&p, &diag(&[0.5, 0.0])) < 1e-15);
        let z = moore_penrose(&CMat::zeros(3, 2), None);
        assert_eq!(z, CMat::zeros(2, 3));
    }

    #[test]
    fn pseudoinverse_of_padded_invertible_block() {
        let a = CMat::from_row_slice(2, 2, &[c64(1.0, 1.0), c64(2.0, 0.0), c64(0.0, -1.0), c64(3.0, 0.5)]);
        let mut m = CMat::zeros(4, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(&a);
        let p = moore_penrose(&m, None);
        let ainv = a.try_inverse().unwrap();
        assert!(max_abs_diff(&p.view((0, 0), (2, 2)).into_owned(), &ainv) < 1e-13);
        assert!(max_abs(&p.view((2, 0), (2, 4)).into_owned()) < 1e-13);
        assert!(max_abs(&p.view((0, 2), (4, 2)).into_owned()) < 1e-13);
    }

    #[test]
    fn inclusions_basic() {
        let a = diag(&[1.0, 2.0, 0.0]);
        assert!(image_inclusion(&a, &a).unwrap());
        let e3 = CMat::from_fn(3, 1, |i, _| c64(if i == 2 { 1.0 } else { 0.0 }, 0.0));
        assert!(!image_inclusion(&e3, &a).unwrap());
        assert!(kernel_inclusion(&a, &a).unwrap());
        let inv = diag(&[1.0, 2.0, 3.0]);
        let c = CMat::from_fn(2, 3, |i, j| c64((i + j) as f64, 1.0));
        assert!(kernel_inclusion(&inv, &c).unwrap());
        assert!(!kernel_inclusion(&a, &c).unwrap());
        assert!(image_inclusion(&CMat::zeros(2, 1), &a).is_err());
        assert!(kernel_inclusion(&a, &CMat::zeros(1, 2)).is_err());
    }

    #[test]
    fn hurwitz_checks() {
        let a = CMat::from_element(1, 1, c64(-0.5, 0.0));
        assert!(is_strictly_hurwitz(&a, HURWITZ_MARGIN).unwrap());
        let i = CMat::from_element(1, 1, c64(0.0, 1.0));
        assert!(!is_strictly_hurwitz(&i, HURWITZ_MARGIN).unwrap());
        assert!(is_strictly_hurwitz(&CMat::zeros(1, 2), HURWITZ_MARGIN).is_err());
    }

    #[test]
    fn kernels() {
        assert!(kernel_basis(&CMat::identity(3, 3), None).is_empty());
        assert_eq!(kernel_basis(&CMat::zeros(3, 3), None).dim(), 3);
        let k = kernel_basis(&diag(&[1.0, 0.0, 2.0]), None);
        assert_eq!(k.dim(), 1);
        assert!((k.columns()[(1, 0)].norm() - 1.0).abs() < 1e-14);
        let wide = CMat::from_row_slice(1, 3, &[c64(1., 0.), c64(1., 0.), c64(0., 0.)]);
        let kw = kernel_basis(&wide, None);
        assert_eq!(kw.dim(), 2);
        assert!(kw.orthonormality_residual() < 1e-12);
        assert!(max_abs(&(&wide * kw.columns())) < 1e-12);
    }

    #[test]
    fn space_construction() {
        assert!(HilbertSpace::new(vec![SpaceFactor::new("a", 2), SpaceFactor::new("a", 2)]).is_err());
        assert!(HilbertSpace::single("a", 0).is_err());
        assert_eq!(HilbertSpace::trivial().total_dim(), 1);
        let u = two_three().union(&HilbertSpace::single("q", 2).unwrap()).unwrap();
        assert_eq!(u.total_dim(), 12);
        assert!(two_three().union(&HilbertSpace::single("sys", 3).unwrap()).is_err());
    }
}
