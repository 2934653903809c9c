//! Plain-text renderings for `--format table`.

use std::fmt::Write as _;

use slhnet::operator::CMat;
use slhnet::slh::{OscillatorModel, Preconditions, SlhTriple};

fn entry(z: num_complex::Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

pub fn matrix(name: &str, m: &CMat) -> String {
    let mut s = format!("{name} ({}x{})\n", m.nrows(), m.ncols());
    let cells: Vec<Vec<String>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| entry(m[(i, j)])).collect()).collect();
    let width = cells.iter().flatten().map(|c| c.len()).max().unwrap_or(0);
    for row in cells {
        let padded: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(s, "  {}", padded.join("  "));
    }
    s
}

pub fn triple(title: &str, t: &SlhTriple) -> String {
    let mut s = format!("{title}: {} channel(s), slow dimension {}\n", t.channels(), t.dim());
    s += &matrix("S", t.s());
    s += &matrix("L", t.l());
    s += &matrix("H", &t.hamiltonian());
    s
}

pub fn model(title: &str, m: &OscillatorModel) -> String {
    let mut s = format!(
        "{title}: {} channel(s), {} oscillator(s), slow dimension {}\n",
        m.channels(),
        m.oscillators(),
        m.dim()
    );
    for (name, x) in [("S", m.s()), ("C", m.c()), ("G", m.g()), ("A", m.a()), ("Z", m.z()), ("X", m.x()), ("R", m.r())] {
        s += &matrix(name, x);
    }
    s
}

pub fn warnings(w: &[String]) -> String {
    w.iter().map(|x| format!("warning: {x}\n")).collect()
}

pub fn preconditions(p: &Preconditions) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "identities            {}", p.identities);
    let _ = writeln!(s, "open-loop Hurwitz     {}", p.open_loop_hurwitz);
    let _ = writeln!(s, "reduced Hurwitz       {}", p.reduced_hurwitz);
    let _ = writeln!(s, "cond A                {:.3e}", p.a_condition);
    let _ = writeln!(s, "cond (S_ii - I)       {:.3e}", p.s_ii_minus_i_condition);
    let _ = writeln!(s, "cond loop operator    {:.3e}", p.loop_condition);
    let flags: Vec<&str> = p.successive_conditions.iter().map(|&b| if b { "ok" } else { "FAIL" }).collect();
    let _ = writeln!(s, "complement conditions {}", flags.join(" "));
    for f in &p.failures {
        let _ = writeln!(s, "failed: {f}");
    }
    s += &warnings(&p.warnings);
    s
}
