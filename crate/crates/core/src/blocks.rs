//! Small helpers for matrices made of equally sized square blocks.

use crate::operator::CMat;

/// Block-diagonal matrix from arbitrary rectangular pieces.
pub fn block_diag(parts: &[&CMat]) -> CMat {
    let r: usize = parts.iter().map(|p| p.nrows()).sum();
    let c: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = CMat::zeros(r, c);
    let (mut i, mut j) = (0, 0);
    for p in parts {
        out.view_mut((i, j), p.shape()).copy_from(*p);
        i += p.nrows();
        j += p.ncols();
    }
    out
}

/// Stack vertically; all parts must have `cols` columns.
pub fn vstack(parts: &[&CMat], cols: usize) -> CMat {
    let r: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = CMat::zeros(r, cols);
    let mut i = 0;
    for p in parts {
        assert_eq!(p.ncols(), cols, "vstack: column mismatch");
        out.view_mut((i, 0), p.shape()).copy_from(*p);
        i += p.nrows();
    }
    out
}

/// Stack horizontally; all parts must have `rows` rows.
pub fn hstack(parts: &[&CMat], rows: usize) -> CMat {
    let c: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = CMat::zeros(rows, c);
    let mut j = 0;
    for p in parts {
        assert_eq!(p.nrows(), rows, "hstack: row mismatch");
        out.view_mut((0, j), p.shape()).copy_from(*p);
        j += p.ncols();
    }
    out
}

/// 2×2 block assembly `[[a, b], [c, d]]`.
pub fn grid2(a: &CMat, b: &CMat, c: &CMat, d: &CMat) -> CMat {
    let top = hstack(&[a, b], a.nrows());
    let bottom = hstack(&[c, d], c.nrows());
    vstack(&[&top, &bottom], top.ncols())
}

/// Block rows `idx` (each `bs` rows tall), in the given order.
pub fn select_block_rows(m: &CMat, idx: &[usize], bs: usize) -> CMat {
    let mut out = CMat::zeros(idx.len() * bs, m.ncols());
    for (k, &i) in idx.iter().enumerate() {
        out.view_mut((k * bs, 0), (bs, m.ncols()))
            .copy_from(&m.view((i * bs, 0), (bs, m.ncols())));
    }
    out
}

/// Block columns `idx` (each `bs` wide), in the given order.
pub fn select_block_cols(m: &CMat, idx: &[usize], bs: usize) -> CMat {
    let mut out = CMat::zeros(m.nrows(), idx.len() * bs);
    for (k, &j) in idx.iter().enumerate() {
        out.view_mut((0, k * bs), (m.nrows(), bs))
            .copy_from(&m.view((0, j * bs), (m.nrows(), bs)));
    }
    out
}

pub fn select_blocks(m: &CMat, rows: &[usize], cols: &[usize], bs: usize) -> CMat {
    select_block_cols(&select_block_rows(m, rows, bs), cols, bs)
}

/// The `(i, j)` block of size `rb × cb`.
pub fn block(m: &CMat, i: usize, j: usize, rb: usize, cb: usize) -> CMat {
    m.view((i * rb, j * cb), (rb, cb)).into_owned()
}

pub fn sub(m: &CMat, r0: usize, c0: usize, r: usize, c: usize) -> CMat {
    m.view((r0, c0), (r, c)).into_owned()
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}
