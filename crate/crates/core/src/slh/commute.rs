use serde::Serialize;

use super::feedback::{feedback_reduce_triple, Wiring};
use super::oscillator::{OscillatorModel, ELIMINATION_KERNEL_CUTOFF};
use super::triple::{concatenate, SlhTriple};
use crate::error::{Error, Result};
use crate::operator::{condition_number, max_abs_diff, CMat, HURWITZ_MARGIN, MAX_CONDITION};
use crate::sim::y_kernel_check;
use crate::slh::ItoMatrix;

/// The hypotheses under which adiabatic elimination and instantaneous
/// feedback commute, each evaluated on the concrete network.
#[derive(Clone, Debug, Serialize)]
pub struct Preconditions {
    pub identities: bool,
    pub open_loop_hurwitz: bool,
    /// ker Y check, run only when strict Hurwitz stability fails.
    pub open_loop_kernel_ok: Option<bool>,
    pub a_condition: f64,
    pub s_ii_minus_i_condition: f64,
    pub s_ii_minus_i_invertible: bool,
    /// Condition number of `S_ii + C_i A⁻¹ C* S_i − I`.
    pub loop_condition: f64,
    pub loop_invertible: bool,
    pub reduced_hurwitz: bool,
    pub reduced_kernel_ok: Option<bool>,
    /// Well-definedness conditions (1)-(6) for eliminating labels 2, 3, 4.
    pub successive_conditions: [bool; 6],
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl Preconditions {
    pub fn all_hold(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Agree,
    Disagree,
    HypothesesNotMet,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlockDiff {
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "K")]
    pub k: f64,
}

impl BlockDiff {
    pub fn max(&self) -> f64 {
        self.s.max(self.l).max(self.k)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutativityReport {
    pub preconditions: Preconditions,
    /// Per-block max absolute difference between eliminate-then-feedback
    /// and feedback-then-eliminate.
    pub max_block_diff: Option<BlockDiff>,
    /// Difference between the feedback-then-eliminate Itô matrix and the
    /// one-shot complement of labels 2, 3, 4.
    pub one_shot_diff: Option<f64>,
    pub pass: bool,
    pub verdict: Verdict,
    pub tol: f64,
    pub eliminate_then_feedback: Option<SlhTriple>,
    pub feedback_then_eliminate: Option<SlhTriple>,
}

fn evaluate_preconditions(open: &OscillatorModel, wiring: &Wiring) -> Result<(Preconditions, Option<OscillatorModel>)> {
    let d = open.dim();
    let ne = wiring.external_count();
    let n = open.channels();
    let m = open.oscillators();
    let aligned = open.reorder_channels(&wiring.output_order(), &wiring.input_order())?;
    let int: Vec<usize> = (ne..n).collect();
    let nid = int.len() * d;

    let identities = open.identities_hold();
    let open_loop_hurwitz = open.is_strictly_hurwitz(HURWITZ_MARGIN);
    let kernel_ok = |model: &OscillatorModel| -> Result<bool> {
        Ok(y_kernel_check(model.a(), model.dim(), model.oscillators(), ELIMINATION_KERNEL_CUTOFF, HURWITZ_MARGIN)?
            .passes())
    };
    let open_loop_kernel_ok = if open_loop_hurwitz { None } else { Some(kernel_ok(open)?) };
    let a_condition = if m == 0 { 1.0 } else { open.a_condition() };

    let s_ii = aligned.s_blocks(&int, &int);
    let s_ii_minus_i_condition = condition_number(&(&s_ii - CMat::identity(nid, nid)));
    let s_ii_minus_i_invertible = s_ii_minus_i_condition < MAX_CONDITION;

    let loop_condition = if m == 0 {
        s_ii_minus_i_condition
    } else if a_condition < MAX_CONDITION {
        let a_inv = aligned.a().clone().try_inverse().unwrap_or_else(|| CMat::zeros(m * d, m * d));
        let c_i = crate::blocks::select_block_rows(aligned.c(), &int, d);
        let s_i = crate::blocks::select_block_cols(aligned.s(), &int, d);
        let lg = &s_ii + c_i * (a_inv * (aligned.c().adjoint() * s_i)) - CMat::identity(nid, nid);
        condition_number(&lg)
    } else {
        f64::INFINITY
    };
    let loop_invertible = loop_condition < MAX_CONDITION;

    let mut reduced = None;
    let mut reduced_hurwitz = false;
    let mut reduced_kernel_ok = None;
    if s_ii_minus_i_invertible {
        if let Ok(red) = open.feedback_reduce(wiring) {
            reduced_hurwitz = red.is_strictly_hurwitz(HURWITZ_MARGIN);
            if !reduced_hurwitz {
                reduced_kernel_ok = Some(kernel_ok(&red)?);
            }
            reduced = Some(red);
        }
    }

    let g4 = open.four_way_g(wiring)?;
    let successive_conditions = g4.check_lemma_new(&["1"], &["2"], &["3", "4"])?.conditions;

    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    if !identities {
        failures.push("model identities".to_string());
    }
    match open_loop_kernel_ok {
        Some(true) => warnings.push("non-Hurwitz pass: open-loop A is not strictly Hurwitz but ker Y is the slow sector".to_string()),
        Some(false) => failures.push("open-loop A strictly Hurwitz or ker Y equal to the slow sector".to_string()),
        None => {}
    }
    if !(a_condition < MAX_CONDITION) {
        failures.push("A invertible".to_string());
    }
    if !s_ii_minus_i_invertible {
        failures.push("S_ii - I invertible".to_string());
    }
    if !loop_invertible {
        failures.push("S_ii + C_i A^-1 C* S_i - I invertible".to_string());
    }
    match (reduced.is_some(), reduced_kernel_ok) {
        (false, _) => failures.push("feedback reduction of the oscillator model".to_string()),
        (true, Some(true)) => warnings.push("non-Hurwitz pass: reduced A is not strictly Hurwitz but ker Y is the slow sector".to_string()),
        (true, Some(false)) => failures.push("reduced A strictly Hurwitz or ker Y equal to the slow sector".to_string()),
        (true, None) => {}
    }
    for (i, ok) in successive_conditions.iter().enumerate() {
        if !ok {
            failures.push(format!("successive complementation condition {}", i + 1));
        }
    }
    Ok((
        Preconditions {
            identities,
            open_loop_hurwitz,
            open_loop_kernel_ok,
            a_condition,
            s_ii_minus_i_condition,
            s_ii_minus_i_invertible,
            loop_condition,
            loop_invertible,
            reduced_hurwitz,
            reduced_kernel_ok,
            successive_conditions,
            failures,
            warnings,
        },
        reduced,
    ))
}

/// The hypotheses of the commutation check without comparing limits.
pub fn check_preconditions(components: &[OscillatorModel], wiring: &Wiring) -> Result<Preconditions> {
    let open = OscillatorModel::concatenate(components)?;
    if open.channels() != wiring.channels() {
        return Err(Error::Shape(format!(
            "wiring is for {} channels but the network has {}",
            wiring.channels(),
            open.channels()
        )));
    }
    Ok(evaluate_preconditions(&open, wiring)?.0)
}

/// Compare eliminate-then-feedback with feedback-then-eliminate on a network
/// of components (each on its own tensor factor) wired by `wiring`.
///
/// When a hypothesis fails the report says so and carries no verdict on the
/// limits themselves.
pub fn check_commutativity(components: &[OscillatorModel], wiring: &Wiring, tol: f64) -> Result<CommutativityReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let open = OscillatorModel::concatenate(components)?;
    if open.channels() != wiring.channels() {
        return Err(Error::Shape(format!(
            "wiring is for {} channels but the network has {}",
            wiring.channels(),
            open.channels()
        )));
    }
    let (preconditions, reduced) = evaluate_preconditions(&open, wiring)?;
    if !preconditions.all_hold() {
        return Ok(CommutativityReport {
            preconditions,
            max_block_diff: None,
            one_shot_diff: None,
            pass: false,
            verdict: Verdict::HypothesesNotMet,
            tol,
            eliminate_then_feedback: None,
            feedback_then_eliminate: None,
        });
    }
    let reduced = reduced.expect("reduced model exists when preconditions hold");

    let limits: Vec<SlhTriple> = components
        .iter()
        .map(|c| c.eliminate().map(|e| e.triple))
        .collect::<Result<_>>()?;
    let af = feedback_reduce_triple(&concatenate(&limits)?, wiring)?;
    let fa = reduced.eliminate()?.triple;

    let diff = BlockDiff {
        s: max_abs_diff(af.s(), fa.s()),
        l: max_abs_diff(af.l(), fa.l()),
        k: max_abs_diff(af.k(), fa.k()),
    };
    let one_shot = open.four_way_g(wiring)?.complement_unchecked(&["2", "3", "4"])?;
    let one_shot = ItoMatrix::new(open.space().clone(), wiring.external_count(), one_shot.into_entries())?;
    let one_shot_diff = max_abs_diff(one_shot.g(), fa.ito_matrix().g());
    let pass = diff.max() <= tol;
    Ok(CommutativityReport {
        preconditions,
        max_block_diff: Some(diff),
        one_shot_diff: Some(one_shot_diff),
        pass,
        verdict: if pass { Verdict::Agree } else { Verdict::Disagree },
        tol,
        eliminate_then_feedback: Some(af),
        feedback_then_eliminate: Some(fa),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{c64, HilbertSpace};
    use crate::random;
    use num_complex::Complex64;

    fn scalar(z: Complex64) -> CMat {
        CMat::from_element(1, 1, z)
    }

    fn beam_splitter(alpha: f64) -> OscillatorModel {
        let b = (1.0 - alpha * alpha).sqrt();
        let t = CMat::from_row_slice(2, 2, &[c64(alpha, 0.), c64(b, 0.), c64(b, 0.), c64(-alpha, 0.)]);
        let triple = SlhTriple::new(HilbertSpace::single("bs", 1).unwrap(), 2, t, CMat::zeros(2, 1), CMat::zeros(1, 1)).unwrap();
        OscillatorModel::from_triple(&triple)
    }

    fn cavity(gamma: f64, s0: Complex64) -> OscillatorModel {
        let z = CMat::zeros(1, 1);
        OscillatorModel::from_hamiltonian(
            HilbertSpace::single("cav", 1).unwrap(),
            1,
            1,
            scalar(s0),
            scalar(c64(gamma.sqrt(), 0.0)),
            z.clone(),
            z.clone(),
            z.clone(),
            z,
        )
        .unwrap()
    }

    fn random_component(seed: u64, label: &str, d: usize, n: usize, m: usize) -> OscillatorModel {
        let mut r = random::rng(seed);
        OscillatorModel::from_hamiltonian(
            HilbertSpace::single(label, d).unwrap(),
            n,
            m,
            random::unitary(&mut r, n * d),
            random::gaussian(&mut r, n * d, m * d),
            random::gaussian(&mut r, n * d, d),
            random::hermitian(&mut r, m * d),
            random::gaussian(&mut r, m * d, d),
            random::hermitian(&mut r, d),
        )
        .unwrap()
    }

    #[test]
    fn beam_splitter_loop_commutes() {
        let comps = [beam_splitter(0.6), cavity(2.0, c64(1.0, 0.0))];
        let w = Wiring::new(3, vec![(1, 2), (2, 1)]).unwrap();
        let rep = check_commutativity(&comps, &w, 1e-9).unwrap();
        assert_eq!(rep.verdict, Verdict::Agree, "{:?}", rep.preconditions.failures);
        let s = rep.feedback_then_eliminate.unwrap().s()[(0, 0)];
        assert!((s - c64(-1.0, 0.0)).norm() < 1e-12);
        assert!(rep.one_shot_diff.unwrap() < 1e-10);
    }

    #[test]
    fn cascade_commutes_through_kernel_check() {
        let comps = [random_component(1, "a", 1, 1, 1), random_component(2, "b", 1, 1, 1)];
        let w = Wiring::new(2, vec![(0, 1)]).unwrap();
        let rep = check_commutativity(&comps, &w, 1e-9).unwrap();
        assert!(!rep.preconditions.reduced_hurwitz);
        assert_eq!(rep.preconditions.reduced_kernel_ok, Some(true));
        assert!(!rep.preconditions.warnings.is_empty());
        assert_eq!(rep.verdict, Verdict::Agree, "{:?}", rep.max_block_diff);
    }

    #[test]
    fn multi_channel_network_commutes() {
        let comps = [random_component(3, "a", 2, 2, 1), random_component(4, "b", 1, 2, 1)];
        let w = Wiring::new(4, vec![(1, 2), (2, 1)]).unwrap();
        let rep = check_commutativity(&comps, &w, 1e-8).unwrap();
        if rep.verdict != Verdict::HypothesesNotMet {
            assert_eq!(rep.verdict, Verdict::Agree, "{:?}", rep.max_block_diff);
        }
    }

    #[test]
    fn ill_posed_loop_flags_hypothesis() {
        let t = SlhTriple::identity(HilbertSpace::single("w", 1).unwrap(), 1);
        let comps = [OscillatorModel::from_triple(&t), cavity(1.0, c64(1.0, 0.0))];
        let w = Wiring::new(2, vec![(0, 0)]).unwrap();
        let rep = check_commutativity(&comps, &w, 1e-9).unwrap();
        assert_eq!(rep.verdict, Verdict::HypothesesNotMet);
        assert!(!rep.preconditions.s_ii_minus_i_invertible);
    }
}
