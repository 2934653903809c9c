//! Block matrices over named index sets and generalized Schur complements.
//!
//! For label sets `A, B` with `C ⊆ A`, `D ⊆ B` the complement is
//!
//! ```text
//! M_{A,B} / M_{C,D} = M_{A∖C, B∖D} − M_{A∖C, D} (M_{C,D})⁻ M_{C, B∖D}
//! ```
//!
//! with the Moore-Penrose inverse as the default generalized inverse. The
//! result does not depend on that choice when `im M_{C,B∖D} ⊆ im M_{C,D}` and
//! `ker M_{C,D} ⊆ ker M_{A∖C,D}`; the checked entry points verify both.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{image_inclusion, kernel_inclusion, max_abs_diff, moore_penrose, pinv_relative, CMat, RANK_RTOL};

/// Pseudoinverse used for every complement in the crate.
pub fn schur_pinv(m: &CMat) -> CMat {
    pinv_relative(m, RANK_RTOL)
}

/// Ordered labels tiling `[0, total)` with contiguous ranges. Zero-size
/// blocks are allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<String>,
    starts: Vec<usize>,
    sizes: Vec<usize>,
}

impl Partition {
    pub fn new<S: Into<String>>(blocks: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        let mut starts = Vec::new();
        let mut sizes = Vec::new();
        let mut next = 0;
        for (label, size) in blocks {
            let label = label.into();
            if labels.contains(&label) {
                return Err(Error::InvalidArgument(format!("duplicate block label `{label}`")));
            }
            labels.push(label);
            starts.push(next);
            sizes.push(size);
            next += size;
        }
        Ok(Self { labels, starts, sizes })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn total(&self) -> usize {
        self.starts.last().map_or(0, |s| s + self.sizes[self.sizes.len() - 1])
    }

    fn find(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn range(&self, label: &str) -> Result<Range<usize>> {
        let i = self.find(label)?;
        Ok(self.starts[i]..self.starts[i] + self.sizes[i])
    }

    pub fn size(&self, label: &str) -> Result<usize> {
        Ok(self.sizes[self.find(label)?])
    }

    pub fn ranges(&self) -> Vec<(usize, usize)> {
        self.starts.iter().zip(&self.sizes).map(|(&s, &n)| (s, s + n)).collect()
    }

    fn check_set<S: AsRef<str>>(&self, set: &[S]) -> Result<()> {
        for (i, l) in set.iter().enumerate() {
            self.find(l.as_ref())?;
            if set[..i].iter().any(|m| m.as_ref() == l.as_ref()) {
                return Err(Error::InvalidArgument(format!(
                    "label `{}` repeated in a block set",
                    l.as_ref()
                )));
            }
        }
        Ok(())
    }

    /// Concatenated indices of `set` in argument order.
    pub fn indices<S: AsRef<str>>(&self, set: &[S]) -> Result<Vec<usize>> {
        self.check_set(set)?;
        let mut out = Vec::new();
        for l in set {
            out.extend(self.range(l.as_ref())?);
        }
        Ok(out)
    }

    /// The sub-partition on `set`, in argument order.
    pub fn restrict<S: AsRef<str>>(&self, set: &[S]) -> Result<Partition> {
        self.check_set(set)?;
        let blocks: Result<Vec<(String, usize)>> = set
            .iter()
            .map(|l| Ok((l.as_ref().to_string(), self.size(l.as_ref())?)))
            .collect();
        Partition::new(blocks?)
    }

    /// Labels of `self` not in `set`, in declaration order.
    pub fn without<S: AsRef<str>>(&self, set: &[S]) -> Vec<String> {
        self.labels
            .iter()
            .filter(|l| !set.iter().any(|s| s.as_ref() == l.as_str()))
            .cloned()
            .collect()
    }
}

fn gather(m: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    CMat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn strings<S: AsRef<str>>(set: &[S]) -> Vec<String> {
    set.iter().map(|s| s.as_ref().to_string()).collect()
}

fn subset_of<S: AsRef<str>, T: AsRef<str>>(small: &[S], big: &[T]) -> bool {
    small.iter().all(|s| big.iter().any(|b| b.as_ref() == s.as_ref()))
}

/// Result of the two inclusion tests behind a generalized Schur complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WellDefinedReport {
    /// `im M_{C,B∖D} ⊆ im M_{C,D}`
    pub im_ok: bool,
    /// `ker M_{C,D} ⊆ ker M_{A∖C,D}`
    pub ker_ok: bool,
}

impl WellDefinedReport {
    pub fn ok(&self) -> bool {
        self.im_ok && self.ker_ok
    }
}

/// The six sufficient conditions for successive complementation over a
/// partition `A, B, C`. `conditions[i]` holds condition `i + 1`:
///
/// 1. `ker M_{BC,BC} ⊆ ker [M_AB M_AC]`
/// 2. `im [M_BA; M_CA] ⊆ im M_{BC,BC}`
/// 3. `ker M_CC ⊆ ker M_BC`
/// 4. `im M_CB ⊆ im M_CC`
/// 5. `ker M_BB ⊆ ker M_CB`
/// 6. `im M_BC ⊆ im M_BB`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaNewReport {
    pub conditions: [bool; 6],
}

impl LemmaNewReport {
    pub fn all(&self) -> bool {
        self.conditions.iter().all(|&c| c)
    }

    /// One-based numbers of the failing conditions.
    pub fn failing(&self) -> Vec<usize> {
        (0..6).filter(|&i| !self.conditions[i]).map(|i| i + 1).collect()
    }
}

/// The three sides of the quotient rule, each a matrix over `A`.
#[derive(Clone, Debug)]
pub struct SuccessiveComplement {
    pub one_shot: BlockMatrix,
    pub via_c_then_b: BlockMatrix,
    pub via_b_then_c: BlockMatrix,
}

impl SuccessiveComplement {
    pub fn max_discrepancy(&self) -> f64 {
        let a = self.one_shot.entries();
        let d1 = max_abs_diff(a, self.via_c_then_b.entries());
        let d2 = max_abs_diff(a, self.via_b_then_c.entries());
        d1.max(d2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix {
    rows: Partition,
    cols: Partition,
    entries: CMat,
}

impl BlockMatrix {
    pub fn new(rows: Partition, cols: Partition, entries: CMat) -> Result<Self> {
        if entries.shape() != (rows.total(), cols.total()) {
            return Err(Error::Shape(format!(
                "entries are {}x{} but the partitions cover {}x{}",
                entries.nrows(),
                entries.ncols(),
                rows.total(),
                cols.total()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    /// Same partition on rows and columns.
    pub fn square(partition: Partition, entries: CMat) -> Result<Self> {
        Self::new(partition.clone(), partition, entries)
    }

    /// Assemble a square block matrix from a grid of blocks. `blocks[i][j]`
    /// must be `size_i × size_j`.
    pub fn from_blocks<S: AsRef<str>>(labels: &[S], blocks: &[Vec<CMat>]) -> Result<Self> {
        let n = labels.len();
        if blocks.len() != n || blocks.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("block grid does not match the label count".into()));
        }
        let sizes: Vec<usize> = (0..n).map(|i| blocks[i][i].nrows()).collect();
        let partition = Partition::new(labels.iter().map(|l| l.as_ref().to_string()).zip(sizes.iter().cloned()))?;
        let total = partition.total();
        let mut entries = CMat::zeros(total, total);
        let mut r0 = 0;
        for i in 0..n {
            let mut c0 = 0;
            for j in 0..n {
                let b = &blocks[i][j];
                if b.shape() != (sizes[i], sizes[j]) {
                    return Err(Error::Shape(format!(
                        "block ({}, {}) is {}x{}, expected {}x{}",
                        labels[i].as_ref(),
                        labels[j].as_ref(),
                        b.nrows(),
                        b.ncols(),
                        sizes[i],
                        sizes[j]
                    )));
                }
                entries.view_mut((r0, c0), (sizes[i], sizes[j])).copy_from(b);
                c0 += sizes[j];
            }
            r0 += sizes[i];
        }
        Self::square(partition, entries)
    }

    pub fn rows(&self) -> &Partition {
        &self.rows
    }

    pub fn cols(&self) -> &Partition {
        &self.cols
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }

    fn is_square_partitioned(&self) -> bool {
        self.rows == self.cols
    }

    /// `M_{A,B}` in argument order. Both sets must be nonempty.
    pub fn sub_block<S: AsRef<str>, T: AsRef<str>>(&self, a: &[S], b: &[T]) -> Result<CMat> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidArgument("sub_block needs nonempty label sets".into()));
        }
        self.block(a, b)
    }

    /// Like [`sub_block`](Self::sub_block) but allows empty sets.
    pub fn block<S: AsRef<str>, T: AsRef<str>>(&self, a: &[S], b: &[T]) -> Result<CMat> {
        Ok(gather(&self.entries, &self.rows.indices(a)?, &self.cols.indices(b)?))
    }

    /// `M_{A,B}` as a block matrix partitioned by `A` and `B`.
    pub fn sub_matrix<S: AsRef<str>, T: AsRef<str>>(&self, a: &[S], b: &[T]) -> Result<BlockMatrix> {
        BlockMatrix::new(self.rows.restrict(a)?, self.cols.restrict(b)?, self.block(a, b)?)
    }

    fn validate_complement<S: AsRef<str>>(&self, a: &[S], b: &[S], c: &[S], d: &[S]) -> Result<()> {
        self.rows.check_set(a)?;
        self.cols.check_set(b)?;
        if c.is_empty() || d.is_empty() {
            return Err(Error::InvalidArgument("complemented block sets must be nonempty".into()));
        }
        if !subset_of(c, a) || !subset_of(d, b) {
            return Err(Error::InvalidArgument(
                "complemented labels must be subsets of the outer sets".into(),
            ));
        }
        if c.len() == a.len() || d.len() == b.len() {
            return Err(Error::InvalidArgument(
                "degenerate complement: nothing would remain".into(),
            ));
        }
        Ok(())
    }

    /// Inclusion tests for `M_{A,B} / M_{C,D}`.
    pub fn check_well_defined_in<S: AsRef<str>>(
        &self,
        a: &[S],
        b: &[S],
        c: &[S],
        d: &[S],
    ) -> Result<WellDefinedReport> {
        let a_c: Vec<&str> = a.iter().map(|s| s.as_ref()).filter(|l| !c.iter().any(|x| x.as_ref() == *l)).collect();
        let b_d: Vec<&str> = b.iter().map(|s| s.as_ref()).filter(|l| !d.iter().any(|x| x.as_ref() == *l)).collect();
        let m_cd = self.block(c, d)?;
        let m_cb = self.block(c, &b_d)?;
        let m_ad = self.block(&a_c, d)?;
        Ok(WellDefinedReport {
            im_ok: image_inclusion(&m_cb, &m_cd)?,
            ker_ok: kernel_inclusion(&m_cd, &m_ad)?,
        })
    }

    /// Inclusion tests for the complement over all labels.
    pub fn check_well_defined<S: AsRef<str>>(&self, c: &[S], d: &[S]) -> Result<WellDefinedReport> {
        let a = self.rows.labels().to_vec();
        let b = self.cols.labels().to_vec();
        self.check_well_defined_in(&a, &b, &strings(c), &strings(d))
    }

    /// `M_{A,B} / M_{C,D}` with a caller-supplied generalized inverse and no
    /// well-definedness check.
    pub fn generalized_schur_with<S: AsRef<str>>(
        &self,
        a: &[S],
        b: &[S],
        c: &[S],
        d: &[S],
        ginv: &dyn Fn(&CMat) -> CMat,
    ) -> Result<BlockMatrix> {
        self.validate_complement(a, b, c, d)?;
        let a_c = self.rows.restrict(a)?.without(c);
        let b_d = self.cols.restrict(b)?.without(d);
        let m_cd = self.block(c, d)?;
        let m_ad = self.block(&a_c, d)?;
        let m_cb = self.block(c, &b_d)?;
        let m_ab = self.block(&a_c, &b_d)?;
        let inv = ginv(&m_cd);
        if inv.shape() != (m_cd.ncols(), m_cd.nrows()) {
            return Err(Error::Shape("generalized inverse has the wrong shape".into()));
        }
        let entries = m_ab - m_ad * (inv * m_cb);
        BlockMatrix::new(self.rows.restrict(&a_c)?, self.cols.restrict(&b_d)?, entries)
    }

    pub fn generalized_schur_unchecked<S: AsRef<str>>(
        &self,
        a: &[S],
        b: &[S],
        c: &[S],
        d: &[S],
    ) -> Result<BlockMatrix> {
        // Rank is judged against the whole matrix: a pivot that is zero up to
        // rounding in an intermediate complement must not be inverted.
        let scale = self.block(a, b)?.norm();
        self.generalized_schur_with(a, b, c, d, &|p: &CMat| {
            let smax = p.norm();
            moore_penrose(p, Some(RANK_RTOL * smax.max(scale)))
        })
    }

    /// `M_{A,B} / M_{C,D}` after checking both inclusions.
    pub fn generalized_schur<S: AsRef<str>>(
        &self,
        a: &[S],
        b: &[S],
        c: &[S],
        d: &[S],
    ) -> Result<BlockMatrix> {
        self.validate_complement(a, b, c, d)?;
        let report = self.check_well_defined_in(a, b, c, d)?;
        if !report.im_ok {
            return Err(Error::NotWellDefined(format!(
                "im M[{}; rest] is not contained in im M[{}; {}]",
                strings(c).join(","),
                strings(c).join(","),
                strings(d).join(",")
            )));
        }
        if !report.ker_ok {
            return Err(Error::NotWellDefined(format!(
                "ker M[{}; {}] is not contained in ker M[rest; {}]",
                strings(c).join(","),
                strings(d).join(","),
                strings(d).join(",")
            )));
        }
        self.generalized_schur_unchecked(a, b, c, d)
    }

    /// `M / M_{C,C}` over all labels of a square-partitioned matrix.
    pub fn complement<S: AsRef<str>>(&self, c: &[S]) -> Result<BlockMatrix> {
        let all = self.square_labels()?;
        let c = strings(c);
        self.generalized_schur(&all, &all, &c, &c)
    }

    pub fn complement_unchecked<S: AsRef<str>>(&self, c: &[S]) -> Result<BlockMatrix> {
        let all = self.square_labels()?;
        let c = strings(c);
        self.generalized_schur_unchecked(&all, &all, &c, &c)
    }

    fn square_labels(&self) -> Result<Vec<String>> {
        if !self.is_square_partitioned() {
            return Err(Error::InvalidArgument(
                "complement over all labels needs identical row and column partitions".into(),
            ));
        }
        Ok(self.rows.labels().to_vec())
    }

    /// Conditions (1)-(6) for the partition `A, B, C` of a square-partitioned
    /// matrix.
    pub fn check_lemma_new<S: AsRef<str>>(&self, a: &[S], b: &[S], c: &[S]) -> Result<LemmaNewReport> {
        let all = self.square_labels()?;
        let (a, b, c) = (strings(a), strings(b), strings(c));
        let joined: Vec<String> = a.iter().chain(&b).chain(&c).cloned().collect();
        self.rows.check_set(&joined)?;
        if joined.len() != all.len() {
            return Err(Error::InvalidArgument("A, B, C must partition the labels".into()));
        }
        let bc: Vec<String> = b.iter().chain(&c).cloned().collect();
        let m_bcbc = self.block(&bc, &bc)?;
        let conditions = [
            kernel_inclusion(&m_bcbc, &self.block(&a, &bc)?)?,
            image_inclusion(&self.block(&bc, &a)?, &m_bcbc)?,
            kernel_inclusion(&self.block(&c, &c)?, &self.block(&b, &c)?)?,
            image_inclusion(&self.block(&c, &b)?, &self.block(&c, &c)?)?,
            kernel_inclusion(&self.block(&b, &b)?, &self.block(&c, &b)?)?,
            image_inclusion(&self.block(&b, &c)?, &self.block(&b, &b)?)?,
        ];
        Ok(LemmaNewReport { conditions })
    }

    /// `M / M_{B∪C,B∪C}` evaluated in one shot and in both successive
    /// orders. `A` is every remaining label.
    pub fn successive_complement<S: AsRef<str>>(&self, b: &[S], c: &[S]) -> Result<SuccessiveComplement> {
        let all = self.square_labels()?;
        let (b, c) = (strings(b), strings(c));
        let bc: Vec<String> = b.iter().chain(&c).cloned().collect();
        let a: Vec<String> = all.iter().filter(|l| !bc.contains(l)).cloned().collect();
        let report = self.check_lemma_new(&a, &b, &c)?;
        if !report.all() {
            let failing: Vec<String> = report.failing().iter().map(|i| i.to_string()).collect();
            return Err(Error::NotWellDefined(format!(
                "successive complementation conditions {} fail",
                failing.join(", ")
            )));
        }
        let one_shot = self.complement_unchecked(&bc)?;
        let via_c_then_b = self.complement_unchecked(&c)?.complement_unchecked(&b)?;
        let via_b_then_c = self.complement_unchecked(&b)?.complement_unchecked(&c)?;
        Ok(SuccessiveComplement {
            one_shot,
            via_c_then_b,
            via_b_then_c,
        })
    }
}

/// Generalized inverse of a block matrix via the Banachiewicz formula,
/// pivoting on `P = M_{a_rows, a_cols}`:
///
/// ```text
/// [[P⁻ + P⁻B X⁻ C P⁻, −P⁻B X⁻], [−X⁻ C P⁻, X⁻]],   X = M / P
/// ```
///
/// The result has rows indexed by `m`'s column partition and columns by its
/// row partition, in the original block order.
pub fn banachiewicz_pinv<S: AsRef<str>>(m: &BlockMatrix, a_rows: &[S], a_cols: &[S]) -> Result<BlockMatrix> {
    if a_rows.is_empty() || a_cols.is_empty() {
        return Err(Error::InvalidArgument("pivot block sets must be nonempty".into()));
    }
    let r_rest = m.rows.without(a_rows);
    let c_rest = m.cols.without(a_cols);
    m.rows.check_set(a_rows)?;
    m.cols.check_set(a_cols)?;
    let p = m.block(a_rows, a_cols)?;
    let b = m.block(a_rows, &c_rest)?;
    let c = m.block(&r_rest, a_cols)?;
    let d = m.block(&r_rest, &c_rest)?;
    if !image_inclusion(&b, &p)? {
        return Err(Error::NotWellDefined("im B is not contained in im A".into()));
    }
    if !kernel_inclusion(&p, &c)? {
        return Err(Error::NotWellDefined("ker A is not contained in ker C".into()));
    }
    let pi = schur_pinv(&p);
    let x = &d - &c * (&pi * &b);
    let xi = schur_pinv(&x);
    let pib = &pi * &b;
    let cpi = &c * &pi;
    let top_left = &pi + &pib * (&xi * &cpi);
    let top_right = -(&pib * &xi);
    let bottom_left = -(&xi * &cpi);

    let row_idx: Vec<usize> = m.cols.indices(a_cols)?.into_iter().chain(m.cols.indices(&c_rest)?).collect();
    let col_idx: Vec<usize> = m.rows.indices(a_rows)?.into_iter().chain(m.rows.indices(&r_rest)?).collect();
    let (n1, n2) = (p.ncols(), d.ncols());
    let (k1, k2) = (p.nrows(), d.nrows());
    let mut entries = CMat::zeros(m.cols.total(), m.rows.total());
    for i in 0..n1 + n2 {
        for j in 0..k1 + k2 {
            let v = match (i < n1, j < k1) {
                (true, true) => top_left[(i, j)],
                (true, false) => top_right[(i, j - k1)],
                (false, true) => bottom_left[(i - n1, j)],
                (false, false) => xi[(i - n1, j - k1)],
            };
            entries[(row_idx[i], col_idx[j])] = v;
        }
    }
    BlockMatrix::new(m.cols.clone(), m.rows.clone(), entries)
}

#[derive(Serialize, Deserialize)]
struct BlockMatrixJson {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    ranges: RangesJson,
    #[serde(with = "crate::json::cmat")]
    entries: CMat,
}

#[derive(Serialize, Deserialize)]
struct RangesJson {
    rows: Vec<(usize, usize)>,
    cols: Vec<(usize, usize)>,
}

impl Serialize for BlockMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BlockMatrixJson {
            row_labels: self.rows.labels.clone(),
            col_labels: self.cols.labels.clone(),
            ranges: RangesJson {
                rows: self.rows.ranges(),
                cols: self.cols.ranges(),
            },
            entries: self.entries.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlockMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = BlockMatrixJson::deserialize(d)?;
        let part = |labels: Vec<String>, ranges: Vec<(usize, usize)>| -> Result<Partition> {
            if labels.len() != ranges.len() {
                return Err(Error::Shape("label and range counts differ".into()));
            }
            let mut next = 0;
            for &(s, e) in &ranges {
                if s != next || e < s {
                    return Err(Error::Shape("ranges do not tile the index set".into()));
                }
                next = e;
            }
            Partition::new(labels.into_iter().zip(ranges.iter().map(|(s, e)| e - s)))
        };
        let rows = part(raw.row_labels, raw.ranges.rows).map_err(D::Error::custom)?;
        let cols = part(raw.col_labels, raw.ranges.cols).map_err(D::Error::custom)?;
        BlockMatrix::new(rows, cols, raw.entries).map_err(D::Error::custom)
    }
}
