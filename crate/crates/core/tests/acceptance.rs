//! Acceptance criteria 1-8. Each test prints one PASS/FAIL line.

mod common;

use std::time::{Duration, Instant};

use common::*;
use slhnet::netdsl;
use slhnet::operator::{c64, max_abs, max_abs_diff, moore_penrose, CMat, HilbertSpace, HURWITZ_MARGIN};
use slhnet::random;
use slhnet::schur::{banachiewicz_pinv, schur_pinv, BlockMatrix, Partition};
use slhnet::sim::{convergence_study, time_grid, y_kernel_check, ConvergenceConfig};
use slhnet::slh::{
    check_commutativity, concatenate, feedback_reduce_triple, series_product, OscillatorModel, SlhTriple, Verdict,
    Wiring,
};

const LOOP_TOL: f64 = 1e-10;
const CASCADE_TOL: f64 = 1e-9;
const NETWORK_TOL: f64 = 1e-8;
const LIMIT_TOL: f64 = 1e-9;
const GINV_TOL: f64 = 1e-10;
const QUOTIENT_TOL: f64 = 1e-9;
const INDEPENDENCE_TOL: f64 = 1e-8;
const CONVERGENCE_THRESHOLD: f64 = 5e-2;
const DSL_TOL: f64 = 1e-10;

fn verdict(id: u32, title: &str, ok: bool, detail: String, elapsed: Duration, budget: Duration) {
    let within = elapsed <= budget;
    let status = if ok && within { "PASS" } else { "FAIL" };
    println!(
        "criterion {id} {status}: {title} ({detail}; {:.2}s of {:.0}s)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(within, "criterion {id} exceeded its time budget");
}

fn triple_diff(a: &SlhTriple, b: &SlhTriple) -> f64 {
    max_abs_diff(a.s(), b.s()).max(max_abs_diff(a.l(), b.l())).max(max_abs_diff(a.k(), b.k()))
}

#[test]
fn criterion_1_beam_splitter_loop_both_orders() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for alpha in [0.3, 0.6, 0.9] {
        for s0 in s0_values() {
            for gamma in [1.0, 2.0] {
                let bs = beam_splitter(alpha);
                let cav = cavity(gamma, s0);
                let w = loop_wiring();
                let expect = scalar(loop_oracle(alpha, s0, gamma).s_limit);

                let limits = [
                    SlhTriple::new(bs.space().clone(), 2, bs.s().clone(), bs.g().clone(), bs.r().clone()).unwrap(),
                    cav.eliminate().unwrap().triple,
                ];
                let af = feedback_reduce_triple(&concatenate(&limits).unwrap(), &w).unwrap();
                let open = OscillatorModel::concatenate(&[bs, cav]).unwrap();
                let fa = open.feedback_reduce(&w).unwrap().eliminate().unwrap().triple;
                for t in [&af, &fa] {
                    worst = worst
                        .max(max_abs_diff(t.s(), &expect))
                        .max(max_abs(t.l()))
                        .max(max_abs(t.k()));
                }
                cases += 1;
            }
        }
    }
    verdict(
        1,
        "beam-splitter loop, both orders",
        worst <= LOOP_TOL,
        format!("{cases} parameter sets, max deviation {worst:.2e} <= {LOOP_TOL:e}"),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

/// A = −½C*C − iΩ with square full-rank C on a shared three-dimensional space.
fn cascade_component(rng: &mut impl rand::Rng) -> OscillatorModel {
    let d = 3;
    OscillatorModel::from_hamiltonian(
        space("h", d),
        1,
        1,
        random::unitary(rng, d),
        random::gaussian(rng, d, d),
        random::gaussian(rng, d, d),
        random::hermitian(rng, d),
        random::gaussian(rng, d, d),
        random::hermitian(rng, d),
    )
    .unwrap()
}

#[test]
fn criterion_2_cascade_commutativity() {
    let start = Instant::now();
    let mut rng = random::rng(2002);
    let mut worst: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let mut hurwitz = true;
    for _ in 0..100 {
        let m1 = cascade_component(&mut rng);
        let m2 = cascade_component(&mut rng);
        hurwitz &= m1.is_strictly_hurwitz(HURWITZ_MARGIN) && m2.is_strictly_hurwitz(HURWITZ_MARGIN);
        let af = series_product(&m2.eliminate().unwrap().triple, &m1.eliminate().unwrap().triple).unwrap();
        let fa = OscillatorModel::series_product(&m2, &m1).unwrap().eliminate().unwrap().triple;
        worst = worst.max(triple_diff(&af, &fa));
        // X₂ + G₂*C₂ + Z₂* multiplies the would-be residual in K̂.
        let r = m2.x() + m2.g().adjoint() * m2.c() + m2.z().adjoint();
        residual = residual.max(max_abs(&r));
    }
    verdict(
        2,
        "cascade commutativity",
        hurwitz && worst <= CASCADE_TOL && residual <= CASCADE_TOL,
        format!("100 cascades, max block diff {worst:.2e}, K residual factor {residual:.2e}, components Hurwitz: {hurwitz}"),
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_3_network_commutativity() {
    let start = Instant::now();
    let mut rng = random::rng(3003);
    let (mut included, mut excluded, mut attempts) = (0, 0, 0);
    let mut worst: f64 = 0.0;
    let mut disagreements = 0;
    while included < 200 && attempts < 5000 {
        attempts += 1;
        let net = random_network(&mut rng);
        let rep = check_commutativity(&net.components, &net.wiring, NETWORK_TOL).unwrap();
        match rep.verdict {
            Verdict::HypothesesNotMet => excluded += 1,
            Verdict::Agree | Verdict::Disagree => {
                included += 1;
                let diff = rep.max_block_diff.unwrap().max();
                worst = worst.max(diff);
                if rep.verdict == Verdict::Disagree {
                    disagreements += 1;
                }
            }
        }
    }
    verdict(
        3,
        "commutativity on random networks with loops",
        included == 200 && disagreements == 0,
        format!("{included} networks compared, {excluded} excluded by the guard, max block diff {worst:.2e} <= {NETWORK_TOL:e}"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_4_limit_triple_validity() {
    let start = Instant::now();
    let mut rng = random::rng(4004);
    let mut worst_unitary: f64 = 0.0;
    let mut worst_damping: f64 = 0.0;
    for i in 0..100 {
        let d = 1 + i % 3;
        let m = 1 + (i / 3) % 2;
        let n = m + (i / 6) % 2;
        let model = random_model(&mut rng, "h", d, n, m);
        let t = model.eliminate().unwrap().triple;
        let id = CMat::identity(n * d, n * d);
        worst_unitary = worst_unitary
            .max(max_abs_diff(&(t.s() * t.s().adjoint()), &id))
            .max(max_abs_diff(&(t.s().adjoint() * t.s()), &id));
        worst_damping = worst_damping.max(max_abs(&(t.k() + t.k().adjoint() + t.l().adjoint() * t.l())));
    }
    verdict(
        4,
        "limit triple validity",
        worst_unitary <= LIMIT_TOL && worst_damping <= LIMIT_TOL,
        format!("100 models, unitarity {worst_unitary:.2e}, damping {worst_damping:.2e}"),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

/// Rank-deficient `[[P, PU], [VP, D]]`, which satisfies both inclusions.
fn banachiewicz_instance(rng: &mut impl rand::Rng) -> BlockMatrix {
    let (k1, k2) = (rng.random_range(2..=4), rng.random_range(1..=3));
    let rank = rng.random_range(1..k1);
    let p = random::low_rank(rng, k1, k1, rank);
    let dr = rng.random_range(0..=k2);
    let b = &p * random::gaussian(rng, k1, k2);
    let c = random::gaussian(rng, k2, k1) * &p;
    let d = random::low_rank(rng, k2, k2, dr);
    BlockMatrix::from_blocks(&["a", "b"], &[vec![p, b], vec![c, d]]).unwrap()
}

/// `L W W* R` with block-diagonal invertible `L`, `R`: every range and
/// kernel inclusion of the PSD middle factor survives.
fn quotient_instance(rng: &mut impl rand::Rng) -> BlockMatrix {
    let sizes = [rng.random_range(1..=3), rng.random_range(1..=3), rng.random_range(1..=3)];
    let n: usize = sizes.iter().sum();
    let r = rng.random_range(1..n);
    let w = random::gaussian(rng, n, r);
    let psd = &w * w.adjoint();
    let mut left = CMat::zeros(n, n);
    let mut right = CMat::zeros(n, n);
    let mut off = 0;
    for &s in &sizes {
        left.view_mut((off, off), (s, s)).copy_from(&random::gaussian(rng, s, s));
        right.view_mut((off, off), (s, s)).copy_from(&random::gaussian(rng, s, s));
        off += s;
    }
    let part = Partition::new([("a", sizes[0]), ("b", sizes[1]), ("c", sizes[2])]).unwrap();
    BlockMatrix::square(part, left * psd * right).unwrap()
}

#[test]
fn criterion_5_schur_calculus() {
    let start = Instant::now();
    let mut rng = random::rng(5005);

    let mut ginv_res: f64 = 0.0;
    for _ in 0..100 {
        let m = banachiewicz_instance(&mut rng);
        let g = banachiewicz_pinv(&m, &["a"], &["a"]).unwrap();
        let mm = m.entries();
        ginv_res = ginv_res.max(max_abs_diff(&(mm * g.entries() * mm), mm) / (1.0 + max_abs(mm)));
    }

    let mut quotient: f64 = 0.0;
    for _ in 0..100 {
        let m = quotient_instance(&mut rng);
        let sc = m.successive_complement(&["b"], &["c"]).unwrap();
        quotient = quotient.max(sc.max_discrepancy() / (1.0 + max_abs(sc.one_shot.entries())));
    }

    let mut independence: f64 = 0.0;
    let mut all_non_mp = true;
    for _ in 0..20 {
        let m = quotient_instance(&mut rng);
        let pivot = m.block(&["c"], &["c"]).unwrap();
        let mp = moore_penrose(&pivot, None);
        let k = pivot.nrows();
        let (y, z) = (random::gaussian(&mut rng, k, k), random::gaussian(&mut rng, k, k));
        let id = CMat::identity(k, k);
        let other = &mp + (&id - &mp * &pivot) * y + z * (&id - &pivot * &mp);
        assert!(max_abs_diff(&(&pivot * &other * &pivot), &pivot) < 1e-9 * (1.0 + max_abs(&pivot)));
        all_non_mp &= max_abs_diff(&other, &mp) > 1e-6 || max_abs_diff(&(&mp * &pivot), &id) < 1e-9;
        let labels = ["a", "b", "c"];
        let with_other = m.generalized_schur_with(&labels, &labels, &["c"], &["c"], &|_| other.clone()).unwrap();
        let with_mp = m.generalized_schur_with(&labels, &labels, &["c"], &["c"], &schur_pinv).unwrap();
        independence = independence.max(max_abs_diff(with_other.entries(), with_mp.entries()) / (1.0 + max_abs(with_mp.entries())));
    }

    verdict(
        5,
        "Schur calculus",
        ginv_res <= GINV_TOL && quotient <= QUOTIENT_TOL && independence <= INDEPENDENCE_TOL && all_non_mp,
        format!("M M⁻ M = M {ginv_res:.2e}, quotient rule {quotient:.2e}, inverse independence {independence:.2e}"),
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_6_kernel_lemmas() {
    let start = Instant::now();
    let mut rng = random::rng(6006);
    let mut ok = true;
    let mut smallest = f64::INFINITY;
    let mut cases = 0;
    for m in [1, 2] {
        for d in [2, 3] {
            for _ in 0..5 {
                let c = random::gaussian(&mut rng, m * d, m * d);
                let omega = random::hermitian(&mut rng, m * d);
                let a = (c.adjoint() * &c) * c64(-0.5, 0.0) - omega * c64(0.0, 1.0);
                let rep = y_kernel_check(&a, d, m, 5, 0.0).unwrap();
                ok &= rep.strictly_hurwitz
                    && rep.slow_residual == 0.0
                    && rep.slow_residual_adjoint == 0.0
                    && rep.sector_leak == 0.0
                    && rep.sigma_min.iter().chain(&rep.sigma_min_adjoint).all(|&s| s > 0.0);
                smallest = rep.sigma_min.iter().chain(&rep.sigma_min_adjoint).copied().fold(smallest, f64::min);
                cases += 1;
            }
        }
    }
    verdict(
        6,
        "kernel lemmas for Y and Y*",
        ok,
        format!("{cases} operators, exact slow annihilation and sector invariance, smallest sector singular value {smallest:.3e}"),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

fn sigma(which: char) -> CMat {
    let z = c64(0.0, 0.0);
    match which {
        'z' => CMat::from_row_slice(2, 2, &[c64(1., 0.), z, z, c64(-1., 0.)]),
        _ => CMat::from_row_slice(2, 2, &[z, c64(1., 0.), c64(1., 0.), z]),
    }
}

fn excited() -> CMat {
    let mut r = CMat::zeros(2, 2);
    r[(0, 0)] = c64(1.0, 0.0);
    r
}

fn random_probe_network(seed: u64) -> (OscillatorModel, Wiring) {
    let mut rng = random::rng(seed);
    let src = random_model(&mut rng, "src", 1, 1, 1);
    let probe = SlhTriple::from_hamiltonian(
        space("probe", 2),
        1,
        CMat::identity(2, 2),
        CMat::from_row_slice(2, 2, &[c64(0., 0.), c64(0., 0.), c64(0.6, 0.), c64(0., 0.)]),
        random::hermitian(&mut rng, 2) * c64(0.5, 0.0),
    )
    .unwrap();
    let open = OscillatorModel::concatenate(&[src, OscillatorModel::from_triple(&probe)]).unwrap();
    (open, Wiring::new(2, vec![(0, 1)]).unwrap())
}

#[test]
fn criterion_7_convergence() {
    let start = Instant::now();
    let source = std::fs::read_to_string(networks_dir().join("beam_splitter_probe.slh")).unwrap();
    let net = netdsl::compile(&netdsl::parse(&source).unwrap()).unwrap();
    let cfg = ConvergenceConfig {
        ks: vec![2.0, 4.0, 8.0, 16.0],
        cutoff: 8,
        observables: vec![sigma('z'), sigma('x')],
        t_grid: time_grid(0.0, 5.0, 0.05).unwrap(),
        initial: excited(),
        threshold: CONVERGENCE_THRESHOLD,
    };
    let loop_report = convergence_study(&net.open, &net.wiring, &cfg).unwrap();
    let (open, wiring) = random_probe_network(7007);
    let random_report = convergence_study(&open, &wiring, &cfg).unwrap();
    let ok = [&loop_report, &random_report]
        .iter()
        .all(|r| r.strictly_decreasing == Some(true) && r.below_threshold && r.warnings.is_empty());
    let fmt = |e: Vec<f64>| e.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ");
    verdict(
        7,
        "finite-k convergence to the limit",
        ok,
        format!(
            "beam-splitter loop errors [{}], random network errors [{}]",
            fmt(loop_report.errors()),
            fmt(random_report.errors())
        ),
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_8_dsl() {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();

    for file in ["beam_splitter_loop.slh", "cascade.slh"] {
        let text = std::fs::read_to_string(networks_dir().join(file)).unwrap();
        let spec = netdsl::parse(&text).unwrap();
        let printed = netdsl::print(&spec);
        let same = printed == text && netdsl::print(&netdsl::parse(&printed).unwrap()) == printed;
        ok &= same;
        notes.push(format!("{file} round trip {}", if same { "exact" } else { "differs" }));
    }

    let text = std::fs::read_to_string(networks_dir().join("beam_splitter_loop.slh")).unwrap();
    let net = netdsl::compile(&netdsl::parse(&text).unwrap()).unwrap();
    let red = net.open.feedback_reduce(&net.wiring).unwrap();
    let o = loop_oracle(0.6, c64(1.0, 0.0), 2.0);
    let zero = |m: &CMat| max_abs(m);
    let dev = max_abs_diff(red.s(), &scalar(o.s))
        .max(max_abs_diff(red.c(), &scalar(o.c)))
        .max(max_abs_diff(red.a(), &scalar(o.a)))
        .max(zero(red.g()))
        .max(zero(red.z()))
        .max(zero(red.x()))
        .max(zero(red.r()));
    ok &= dev <= DSL_TOL;
    notes.push(format!("reduced loop coefficients within {dev:.2e}"));

    let cascade = std::fs::read_to_string(networks_dir().join("cascade.slh")).unwrap();
    let net = netdsl::compile(&netdsl::parse(&cascade).unwrap()).unwrap();
    let red = net.open.feedback_reduce(&net.wiring).unwrap();
    let comps: Vec<OscillatorModel> = net_components(&cascade);
    let target: HilbertSpace = red.space().clone();
    let a = comps[0].embed(&target).unwrap();
    let b = comps[1].embed(&target).unwrap();
    let ser = OscillatorModel::series_product(&b, &a).unwrap();
    let dev = [
        max_abs_diff(red.s(), ser.s()),
        max_abs_diff(red.c(), ser.c()),
        max_abs_diff(red.g(), ser.g()),
        max_abs_diff(red.a(), ser.a()),
        max_abs_diff(red.z(), ser.z()),
        max_abs_diff(red.x(), ser.x()),
        max_abs_diff(red.r(), ser.r()),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    ok &= dev <= DSL_TOL;
    notes.push(format!("cascade equals the model series product within {dev:.2e}"));

    verdict(8, "network description language", ok, notes.join(", "), start.elapsed(), Duration::from_secs(5));
}

/// Each component of a source compiled on its own.
fn net_components(source: &str) -> Vec<OscillatorModel> {
    let spec = netdsl::parse(source).unwrap();
    spec.components
        .iter()
        .map(|c| {
            let single = netdsl::NetworkSpec { components: vec![c.clone()], connections: vec![], externals: vec![] };
            netdsl::compile(&single).unwrap().open
        })
        .collect()
}
