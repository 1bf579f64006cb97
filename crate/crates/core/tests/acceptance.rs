//! Acceptance suite: one PASS/FAIL line per criterion at its stated
//! tolerance. The process exits 0 once every criterion has been evaluated;
//! with `ACCEPTANCE_STRICT=1` it exits 1 when any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use husimi_flow::algebra::fock::{block_relative_difference, fock_matrix_oracle, xp_fock_matrix};
use husimi_flow::algebra::reorder::{commutation_oracle, reorder_expansion};
use husimi_flow::algebra::{normal_order, DoubleWellParams, XPPolynomial};
use husimi_flow::experiment::analytic::{oscillator_rotation, quadratic_exactness, source_checks};
use husimi_flow::experiment::{ExperimentConfig, Pipeline, Slice, Verdict, DOUBLE_WELL_LAMBDA};
use husimi_flow::flow::{continuity_oracle, CurrentField, OrderTag};
use husimi_flow::grid::PhaseSpaceGrid;
use husimi_flow::husimi::{coherent_state, husimi_field, z_derivative_stack, DerivativeStack, HusimiField};
use husimi_flow::spectral::Spectral2D;
use husimi_flow::topology::{poincare_index, rectangle_loop, FlowClass};
use husimi_flow::{OscillatorParams, Result};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn from_verdicts(vs: &[Verdict]) -> Outcome {
    let detail = vs.iter().map(|v| format!("{} {:.2e}/{:.0e}", v.name, v.value, v.tolerance)).collect::<Vec<_>>().join("; ");
    outcome(vs.iter().all(|v| v.passed), detail)
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn reordering_identity() -> Outcome {
    let mut worst = None;
    for i in 0..=5u32 {
        for j in 0..=5u32 {
            let expansion: BTreeMap<(u32, u32), i128> = reorder_expansion(i, j)
                .expect("within cap")
                .into_iter()
                .map(|(d, x, c)| ((d, x), c))
                .filter(|&(_, c)| c != 0)
                .collect();
            if expansion != commutation_oracle(i as usize, j as usize) {
                worst.get_or_insert((i, j));
            }
        }
    }
    match worst {
        None => outcome(true, "36 (i, j) pairs equal"),
        Some((i, j)) => outcome(false, format!("mismatch at i={i} j={j}")),
    }
}

fn normal_ordering_oracle() -> Outcome {
    let unit = OscillatorParams { mass: 1.0, omega: 1.0, hbar: 1.0 };
    let well = OscillatorParams { mass: 0.5, omega: 2.0, hbar: 1.0 };
    let cases = [
        ("oscillator", unit, XPPolynomial::harmonic_oscillator(&unit)),
        ("free particle", unit, XPPolynomial::free_particle(&unit)),
        ("double well", well, XPPolynomial::double_well(&well, DOUBLE_WELL_LAMBDA)),
    ];
    let mut parts = Vec::new();
    let mut passed = true;
    for (name, params, poly) in cases {
        let gap = (|| -> Result<f64> {
            let h = normal_order(&poly, &params)?;
            Ok(block_relative_difference(&fock_matrix_oracle(&h, 20)?, &xp_fock_matrix(&poly, &params, 20)?, 12))
        })()
        .unwrap_or(f64::INFINITY);
        passed &= gap < 1e-10;
        parts.push(format!("{name} {gap:.1e}"));
    }
    outcome(passed, parts.join(", "))
}

fn double_well_relations(t0: &Slice, grid: &PhaseSpaceGrid) -> Outcome {
    let params = grid.params;
    let dw = DoubleWellParams::new(params, DOUBLE_WELL_LAMBDA);
    let re_z = dw.center_re_z();
    let relations = (dw.k - 4.0).abs() < 1e-12 && (dw.v0 - 0.25).abs() < 1e-12 && (re_z - 0.8660).abs() < 5e-5;
    let (cx, _) = params.xp_of(C64::new(re_z, 0.0));
    let expected = [(FlowClass::Center, -cx), (FlowClass::Saddle, 0.0), (FlowClass::Center, cx)];
    let mut parts = vec![format!("k={:.4} V0={:.4} Re z=±{re_z:.4}", dw.k, dw.v0)];
    let mut found = true;
    for (class, x) in expected {
        let d = t0
            .classical_points
            .iter()
            .filter(|p| p.class == class)
            .map(|p| grid.cell_distance((p.x, p.p), (x, 0.0)))
            .fold(f64::INFINITY, f64::min);
        found &= d <= 1.0;
        parts.push(format!("{} at x={x:.4}: {d:.2e} cells", class.name()));
    }
    outcome(relations && found, parts.join(", "))
}

fn oracle_gap(pipeline: &Pipeline, stack: &DerivativeStack) -> Result<f64> {
    let j = pipeline.engine.exact_current(stack)?;
    let div = Spectral2D::new(stack.grid()).divergence(&j.jx, &j.jp);
    let sigma = pipeline.engine.source_field(&stack.base).sigma;
    let oracle = continuity_oracle(&pipeline.h, stack)?;
    Ok(max_abs(&(&sigma - &div - &oracle)) / max_abs(&oracle))
}

fn two_path_master(pipeline: &Pipeline, propagated: &HusimiField) -> Outcome {
    let depth = pipeline.engine.required_depth().max(pipeline.h.n_max() as usize);
    let s = FRAC_1_SQRT_2;
    let fields: Vec<(&str, Result<HusimiField>)> = vec![
        ("coherent", husimi_field(&coherent_state(C64::new(0.4, -0.3), pipeline.config.position_grid, pipeline.params), &pipeline.grid)),
        ("Fock superposition", Ok(HusimiField::from_fock(pipeline.grid, &[C64::new(s, 0.0), C64::new(0.0, 0.5), C64::new(0.5, 0.0)]))),
        ("propagated t=3.5", Ok(propagated.clone())),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, field) in fields {
        match field.and_then(|f| z_derivative_stack(&f, depth)).and_then(|st| oracle_gap(pipeline, &st)) {
            Ok(gap) => {
                passed &= gap < 1e-8;
                parts.push(format!("{name} {gap:.1e}"));
            }
            Err(e) => {
                passed = false;
                parts.push(format!("{name} error: {e}"));
            }
        }
    }
    outcome(passed, parts.join(", "))
}

fn continuity(slices: &[Slice]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for s in slices {
        match s.residual {
            Some(r) => {
                passed &= r.rel_l2 < 1e-4 && (3.0..=5.0).contains(&r.ratio);
                parts.push(format!("t={} {:.2e} (×{:.2})", s.t, r.rel_l2, r.ratio));
            }
            None => passed = false,
        }
    }
    outcome(passed, parts.join(", "))
}

fn zero_saddle(slices: &[Slice]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for s in slices {
        let r = &s.report;
        passed &= !s.zeros.is_empty() && r.zeros_without_saddle == 0 && r.orphan_saddles.is_empty();
        parts.push(format!("t={} zeros {} no-saddle {} orphan {}", s.t, s.zeros.len(), r.zeros_without_saddle, r.orphan_saddles.len()));
    }
    outcome(passed, parts.join(", "))
}

fn zero_center(slices: &[Slice]) -> Outcome {
    let passed = slices.iter().all(|s| s.report.unpaired_zeros <= 1);
    let parts: Vec<String> = slices.iter().map(|s| format!("t={} unpaired {}/{}", s.t, s.report.unpaired_zeros, s.zeros.len())).collect();
    outcome(passed, format!("radius {} cells: {}", slices[0].report.pairing_radius, parts.join(", ")))
}

fn momentum_inversion(slices: &[Slice]) -> Outcome {
    let exact = slices.iter().find(|s| s.t == 3.5).map_or(0, |s| s.inversion.count);
    let classical: Vec<usize> = slices.iter().map(|s| s.classical_inversion.count).collect();
    outcome(exact > 0 && classical.iter().all(|&c| c == 0), format!("exact t=3.5 {exact} nodes, classical {classical:?}"))
}

fn synthetic(grid: PhaseSpaceGrid, f: impl Fn(C64) -> C64) -> CurrentField {
    let mut c = CurrentField::zeros(grid, OrderTag::Exact, 0.0);
    for ((i, j), v) in c.jx.indexed_iter_mut() {
        *v = f(C64::new(grid.x(i), grid.p(j))).re;
    }
    for ((i, j), v) in c.jp.indexed_iter_mut() {
        *v = f(C64::new(grid.x(i), grid.p(j))).im;
    }
    c
}

/// Random products of (w − a) and conj(w − b) factors: a rectangle's index
/// is the signed count of enclosed factors, and every split of the
/// rectangle into two halves adds up.
fn additivity_fuzz(cases: usize) -> std::result::Result<usize, String> {
    let grid = PhaseSpaceGrid::square(4.0, 64, OscillatorParams { mass: 1.0, omega: 1.0, hbar: 1.0 }).map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(7);
    let mut done = 0;
    while done < cases {
        let n = rng.gen_range(1..=4);
        let pts: Vec<(C64, bool)> = (0..n).map(|_| (C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)), rng.gen())).collect();
        let (i0, j0) = (rng.gen_range(1..30), rng.gen_range(1..30));
        let (i1, j1) = (i0 + rng.gen_range(6..32), j0 + rng.gen_range(6..32));
        let mid = rng.gen_range(i0 + 2..i1 - 1);
        let cells: Vec<(f64, f64)> = pts.iter().map(|(w, _)| grid.locate(w.re, w.im)).collect();
        let near_line = |u: f64, v: f64| {
            let on_i = [i0, mid, i1].iter().any(|&l| (u - l as f64).abs() < 1.5) && v > j0 as f64 - 1.5 && v < j1 as f64 + 1.5;
            let on_j = [j0, j1].iter().any(|&l| (v - l as f64).abs() < 1.5) && u > i0 as f64 - 1.5 && u < i1 as f64 + 1.5;
            on_i || on_j
        };
        let separated = cells.iter().enumerate().all(|(a, ca)| cells[a + 1..].iter().all(|cb| (ca.0 - cb.0).hypot(ca.1 - cb.1) > 3.0));
        if cells.iter().any(|&(u, v)| near_line(u, v)) || !separated {
            continue;
        }
        let field = synthetic(grid, |w| pts.iter().fold(C64::new(1.0, 0.0), |acc, &(a, plus)| acc * if plus { w - a } else { (w - a).conj() }));
        let inside = |lo: usize, hi: usize| -> i32 {
            pts.iter()
                .zip(&cells)
                .filter(|(_, &(u, v))| u > lo as f64 && u < hi as f64 && v > j0 as f64 && v < j1 as f64)
                .map(|(&(_, plus), _)| if plus { 1 } else { -1 })
                .sum()
        };
        let index = |lo: usize, hi: usize| poincare_index(&field, &rectangle_loop(lo, j0, hi, j1)).map_err(|e| e.to_string());
        let (whole, left, right) = (index(i0, i1)?, index(i0, mid)?, index(mid, i1)?);
        if whole != inside(i0, i1) || left != inside(i0, mid) || right != inside(mid, i1) || whole != left + right {
            return Err(format!("case {done}: whole {whole} left {left} right {right}"));
        }
        done += 1;
    }
    Ok(done)
}

/// Loops around each zero and its companion, enlarged until they hold no
/// other critical point, on the exact double-well flow.
fn pair_loops(slices: &[Slice]) -> (usize, Vec<String>) {
    let mut checked = 0;
    let mut bad = Vec::new();
    for s in slices {
        let g = &s.exact.grid;
        for zp in &s.report.zeros {
            let (Some((c, _)), Some((sd, _))) = (zp.companion, zp.nearest_saddle) else { continue };
            let z = &s.zeros[zp.zero];
            let comp = &s.points[c];
            let (zu, zv) = g.locate(z.x, z.p);
            let (cu, cv) = g.locate(comp.x, comp.p);
            let (i0, i1) = ((zu.min(cu) - 2.0).floor() as usize, (zu.max(cu) + 2.0).ceil() as usize);
            let (j0, j1) = ((zv.min(cv) - 2.0).floor() as usize, (zv.max(cv) + 2.0).ceil() as usize);
            let inside = |x: f64, p: f64| {
                let (u, v) = g.locate(x, p);
                u > i0 as f64 - 1.0 && u < i1 as f64 + 1.0 && v > j0 as f64 - 1.0 && v < j1 as f64 + 1.0
            };
            let others = s.points.iter().enumerate().filter(|&(k, p)| k != c && k != sd && inside(p.x, p.p)).count()
                + s.zeros.iter().enumerate().filter(|&(k, w)| k != zp.zero && inside(w.x, w.p)).count();
            if others > 0 {
                continue;
            }
            match poincare_index(&s.exact, &rectangle_loop(i0, j0, i1, j1)) {
                Ok(0) => checked += 1,
                Ok(k) => bad.push(format!("t={} index {k}", s.t)),
                Err(_) => continue,
            }
        }
    }
    (checked, bad)
}

fn index_arithmetic(slices: &[Slice]) -> Outcome {
    let fuzz = additivity_fuzz(200);
    let grid = PhaseSpaceGrid::square(4.0, 64, OscillatorParams { mass: 1.0, omega: 1.0, hbar: 1.0 }).expect("valid grid");
    let (a, b) = (C64::new(-0.9, 0.4), C64::new(0.8, -0.3));
    let pair = synthetic(grid, |w| (w - a).conj() * (w - b) * C64::new(0.0, 1.0));
    let (u0, _) = grid.locate(-2.0, 0.0);
    let (u1, _) = grid.locate(2.0, 0.0);
    let (_, v0) = grid.locate(0.0, -2.0);
    let (_, v1) = grid.locate(0.0, 2.0);
    let synthetic_pair = poincare_index(&pair, &rectangle_loop(u0 as usize, v0 as usize, u1 as usize, v1 as usize));
    let (checked, bad) = pair_loops(slices);
    let passed = fuzz.is_ok() && matches!(synthetic_pair, Ok(0)) && bad.is_empty();
    let detail = format!(
        "fuzz {}, saddle+center synthetic {:?}, double-well pair loops {checked} at index 0{}",
        fuzz.map_or_else(|e| e, |n| format!("{n} cases")),
        synthetic_pair.map_err(|e| e.to_string()),
        if bad.is_empty() { String::new() } else { format!(", nonzero: {}", bad.join(" ")) }
    );
    outcome(passed, detail)
}

fn analyze_all(pipeline: &Pipeline) -> Result<(Slice, Vec<Slice>)> {
    let run = pipeline.propagate(None)?;
    let wf0 = pipeline.initial_state()?;
    std::thread::scope(|scope| {
        let t0 = scope.spawn(|| pipeline.analyze(&wf0, 0.0, false));
        let handles: Vec<_> = pipeline
            .config
            .record_times
            .iter()
            .map(|&t| {
                let run = &run;
                scope.spawn(move || pipeline.analyze(&run.at(t).expect("recorded").state, t, true))
            })
            .collect();
        let slices = handles.into_iter().map(|h| h.join().expect("worker")).collect::<Result<Vec<_>>>()?;
        Ok((t0.join().expect("worker")?, slices))
    })
}

fn main() {
    let pipeline = Pipeline::new(ExperimentConfig::double_well()).expect("default config is valid");
    let (t0, slices) = analyze_all(&pipeline).expect("double-well pipeline runs");
    let propagated = &slices.iter().find(|s| s.t == 3.5).expect("t = 3.5 recorded").field;

    let results: Vec<(&str, Outcome)> = vec![
        ("reordering identity", reordering_identity()),
        ("normal-ordering oracle", normal_ordering_oracle()),
        ("double-well parameter relations", double_well_relations(&t0, &pipeline.grid)),
        ("source vanishing", from_verdicts(&source_checks())),
        ("two-path master check", two_path_master(&pipeline, propagated)),
        ("continuity under real propagation", continuity(&slices)),
        ("quadratic exactness", from_verdicts(&quadratic_exactness())),
        ("oscillator rigid rotation", from_verdicts(&oscillator_rotation())),
        ("zero-saddle correspondence", zero_saddle(&slices)),
        ("zero-center pairing", zero_center(&slices)),
        ("momentum inversion", momentum_inversion(&slices)),
        ("index arithmetic", index_arithmetic(&slices)),
    ];
    let mut failed = Vec::new();
    for (k, (name, o)) in results.iter().enumerate() {
        println!("{} {:>2} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, k + 1, o.detail);
        if !o.passed {
            failed.push(k + 1);
        }
    }
    println!("acceptance: {}/{} criteria pass{}", results.len() - failed.len(), results.len(),
        if failed.is_empty() { String::new() } else { format!(", failing {failed:?}") });
    if !failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
