//! Acceptance suite. Runs each criterion in turn and prints one PASS/FAIL
//! line per criterion. Set `HYBRID_RCG_ACCEPTANCE_STRICT=1` to exit nonzero
//! when any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use hybrid_rcg::bench::{
    performance_profile, profile_from_table, records_csv, run_suite, GridConfig, Metric, ProfileCurve, ProfileTable,
    RunRecord,
};
use hybrid_rcg::manifolds::{Euclidean, FixedRank, Oblique, Sphere, Stiefel};
use hybrid_rcg::problems::{
    initial_point_rng, instance_rng, random_graph, InstanceSpec, MaskedLowRank, Objective, Params, ProblemId,
    Rayleigh, Stability,
};
use hybrid_rcg::solver::{sigma, BetaInputs, BetaRule, ConjugateGradient, SolverConfig, SolverReport};
use hybrid_rcg::{with_objective, Manifold, TangentVector, TransportKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn normal_vec(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

fn normal_mat(rng: &mut impl Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal))
}

// ---------------------------------------------------------------- 1

fn fd_gradient_error<O: Objective>(obj: &O, seed: u64, probes: usize) -> f64 {
    let m = obj.manifold();
    let x = m.random_point(&mut initial_point_rng(seed));
    let g = obj.gradient(&x).unwrap();
    let rng = &mut ChaCha8Rng::seed_from_u64(1000 + seed);
    let t = 1e-6;
    let mut worst = 0.0_f64;
    for _ in 0..probes {
        let xi = m.random_tangent(&x, rng);
        let analytic = m.inner(&x, &g, &xi).unwrap();
        let up = obj.cost(&m.retract(&x, &xi.scaled(t)).unwrap());
        let down = obj.cost(&m.retract(&x, &xi.scaled(-t)).unwrap());
        let fd = (up - down) / (2.0 * t);
        worst = worst.max((fd - analytic).abs() / analytic.abs().max(1e-8));
    }
    worst
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: Vec<(ProblemId, f64)> = Vec::new();
    for id in ProblemId::ALL {
        let mut w = 0.0_f64;
        for seed in 1..=3 {
            let problem = InstanceSpec::with_defaults(id, seed).build().unwrap();
            w = w.max(with_objective!(&problem, o => fd_gradient_error(o, seed, 20)));
        }
        worst.push((id, w));
    }
    let secs = start.elapsed().as_secs_f64();
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let detail = worst.iter().map(|(id, e)| format!("{id} {e:.1e}")).collect::<Vec<_>>().join(", ");
    outcome(max < 1e-4 && secs < 60.0, format!("max rel. error {max:.2e} in {secs:.1}s [{detail}]"))
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    let rng = &mut ChaCha8Rng::seed_from_u64(2);
    let sig = sigma(0.9);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let n = rng.random_range(1..20);
        let e = Euclidean::new(n);
        let x = normal_vec(rng, n);
        let gp = normal_vec(rng, n);
        let dp = normal_vec(rng, n);
        let g = normal_vec(rng, n);
        let step = normal_vec(rng, n) * rng.random_range(0.01..2.0);
        let y = e.retract(&x, &step).unwrap();
        let td = e.transport_to(&x, &step, &y, &dp).unwrap().vector;
        let tg = e.transport_to(&x, &step, &y, &gp).unwrap().vector;
        let inputs = BetaInputs {
            grad_sq: e.inner(&y, &g, &g).unwrap(),
            prev_grad_sq: e.inner(&x, &gp, &gp).unwrap(),
            grad_dot_transported_dir: e.inner(&y, &g, &td).unwrap(),
            prev_slope: e.inner(&x, &gp, &dp).unwrap(),
            grad_dot_transported_grad: Some(e.inner(&y, &g, &tg).unwrap()),
        };
        // flat formulas with y_k = g_k - g_{k-1}
        let dot = |a: &DVector<f64>, b: &DVector<f64>| a.iter().zip(b.iter()).map(|(u, v)| u * v).sum::<f64>();
        let yk = &g - &gp;
        let flat = [
            (BetaRule::Fr, dot(&g, &g) / dot(&gp, &gp)),
            (BetaRule::Dy, dot(&g, &g) / dot(&dp, &yk)),
            (BetaRule::Prp, dot(&g, &yk) / dot(&gp, &gp)),
            (BetaRule::Hs, dot(&g, &yk) / dot(&dp, &yk)),
        ];
        for (rule, want) in flat {
            let got = rule.compute(&inputs, sig).unwrap();
            worst = worst.max((got - want).abs() / want.abs().max(1.0));
        }
    }
    outcome(worst <= 1e-12, format!("1000 states, max rel. difference {worst:.2e}"))
}

// ---------------------------------------------------------------- 3, 4

struct Run {
    id: ProblemId,
    seed: u64,
    beta: BetaRule,
    manifold: &'static str,
    report: SolverReport,
}

fn solve_grid(rules: &[BetaRule]) -> Vec<Run> {
    let mut runs = Vec::new();
    for spec in GridConfig::default().instances() {
        let problem = spec.build().unwrap();
        for &beta in rules {
            let solver = ConjugateGradient::new(SolverConfig::with_beta(beta)).unwrap();
            let report = with_objective!(&problem, o => {
                let x0 = o.manifold().random_point(&mut initial_point_rng(spec.seed));
                solver.solve(o, x0).unwrap().report
            });
            runs.push(Run { id: spec.problem, seed: spec.seed, beta, manifold: problem.manifold_name(), report });
        }
    }
    runs
}

fn criterion_3(runs: &[Run]) -> Outcome {
    let sig = sigma(0.9);
    let (mut bad_slope, mut bad_restart, mut bad_window, mut bad_expand, mut bad_lk) = (0, 0, 0, 0, 0);
    let (mut rows, mut lk_rows, mut first) = (0usize, 0usize, None);
    for run in runs.iter().filter(|r| r.beta.is_hybrid()) {
        let closed_form = matches!(run.manifold, "sphere" | "oblique");
        let tag = format!("{} seed {} {}", run.id, run.seed, run.beta);
        if closed_form && run.report.restarts > 0 {
            bad_restart += 1;
            first.get_or_insert(format!("{tag}: {} restarts", run.report.restarts));
        }
        for row in &run.report.trace {
            rows += 1;
            if !(row.slope < 0.0) && row.grad_norm > 0.0 {
                bad_slope += 1;
                first.get_or_insert(format!("{tag} k={}: slope {}", row.k, row.slope));
            }
            if let (Some(b), Some(dy), false) = (row.beta, row.beta_dy, row.restarted) {
                if dy > 1e-30 {
                    let r = b / dy;
                    if r < -sig - 1e-12 || r > 1.0 + 1e-12 {
                        bad_window += 1;
                        first.get_or_insert(format!("{tag} k={}: r_k = {r}", row.k));
                    }
                }
            }
            if let (Some(t), Some(p)) = (row.transported_norm, row.prev_direction_norm) {
                if t > p * (1.0 + 1e-12) {
                    bad_expand += 1;
                    first.get_or_insert(format!("{tag} k={}: |T eta| = {t} > |eta| = {p}", row.k));
                }
            }
            if row.transport == Some(TransportKind::Differentiated) {
                lk_rows += 1;
                if let Some(l) = row.l_k {
                    if l.abs() > 0.9 + 1e-10 {
                        bad_lk += 1;
                        first.get_or_insert(format!("{tag} k={}: l_k = {l}", row.k));
                    }
                }
            }
        }
    }
    let pass = bad_slope + bad_restart + bad_window + bad_expand + bad_lk == 0;
    let mut detail = format!(
        "{rows} hybrid iterations ({lk_rows} closed-form): non-descent {bad_slope}, restarts on sphere/oblique \
         {bad_restart}, window {bad_window}, expansion {bad_expand}, |l_k| {bad_lk}"
    );
    if let Some(f) = first {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(pass, detail)
}

fn criterion_4(runs: &[Run]) -> Outcome {
    let (c1, c2, slack) = (1e-4, 0.9, 1e-12);
    let (mut steps, mut bad, mut first) = (0usize, 0usize, None);
    for run in runs {
        for w in run.report.trace.windows(2) {
            let (prev, row) = (&w[0], &w[1]);
            let (Some(alpha), Some(dphi), Some(slope)) = (row.alpha, row.dphi, row.dphi0) else { continue };
            steps += 1;
            // after an in-place restart the search ran along -grad
            let restarted_from = -prev.grad_norm * prev.grad_norm;
            let consistent = slope == prev.slope || (slope - restarted_from).abs() <= 1e-12 * restarted_from.abs();
            let armijo = row.f <= prev.f + c1 * alpha * slope + slack;
            let curvature = dphi.abs() <= c2 * slope.abs() + slack;
            let armijo = armijo && consistent;
            if !(armijo && curvature) {
                bad += 1;
                first.get_or_insert(format!(
                    "{} seed {} {} k={}: armijo {armijo}, curvature {curvature}",
                    run.id, run.seed, run.beta, row.k
                ));
            }
        }
    }
    let mut detail = format!("{steps} accepted steps over {} runs, {bad} violations", runs.len());
    if let Some(f) = first {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(bad == 0, detail)
}

// ---------------------------------------------------------------- 5

fn hybrid1() -> ConjugateGradient {
    ConjugateGradient::new(SolverConfig::with_beta(BetaRule::Hybrid1)).unwrap()
}

fn stability_number(n: usize, edges: &[(usize, usize)]) -> usize {
    (0u32..1 << n)
        .filter(|&s| edges.iter().all(|&(i, j)| s & (1 << i) == 0 || s & (1 << j) == 0))
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap()
}

fn criterion_5() -> Outcome {
    let solver = hybrid1();
    let mut msgs = Vec::new();
    let mut pass = true;

    let mut worst = 0.0_f64;
    for seed in 1..=10 {
        let obj = Rayleigh::generate(100, &mut instance_rng(seed));
        let lmin = obj.matrix().clone().symmetric_eigen().eigenvalues.min();
        let x0 = obj.manifold().random_point(&mut initial_point_rng(seed));
        let sol = solver.solve(&obj, x0).unwrap();
        pass &= sol.report.converged;
        worst = worst.max((sol.report.final_cost - lmin).abs());
    }
    pass &= worst < 1e-6;
    msgs.push(format!("rayleigh |f - lambda_min| <= {worst:.1e}"));

    let mut worst = 0.0_f64;
    for seed in 1..=5 {
        let obj = MaskedLowRank::generate_approximation(30, 24, 4, &mut instance_rng(seed));
        let sv = obj.target().clone().singular_values();
        let mut s: Vec<f64> = sv.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        let tail: f64 = s[4..].iter().map(|v| v * v).sum();
        let x0 = obj.manifold().random_point(&mut initial_point_rng(seed));
        let sol = solver.solve(&obj, x0).unwrap();
        pass &= sol.report.converged;
        worst = worst.max((sol.report.final_cost - tail).abs());
    }
    pass &= worst < 1e-4;
    msgs.push(format!("low-rank |f - tail| <= {worst:.1e}"));

    let mut worst = 0.0_f64;
    for seed in 1..=5 {
        let n = 12;
        let edges = random_graph(n, 0.25, &mut instance_rng(seed));
        let target = 1.0 / stability_number(n, &edges) as f64;
        let obj = Stability::new(n, edges);
        let rng = &mut ChaCha8Rng::seed_from_u64(500 + seed);
        let best = (0..5)
            .map(|_| {
                let x0 = obj.manifold().random_point(rng);
                solver.solve(&obj, x0).unwrap().report.final_cost
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max((best - target).abs());
    }
    pass &= worst < 1e-3;
    msgs.push(format!("stability |f - 1/S(G)| <= {worst:.1e}"));
    outcome(pass, msgs.join(", "))
}

// ---------------------------------------------------------------- 6

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn dominates_from(a: &ProfileCurve, b: &ProfileCurve, tau0: f64) -> bool {
    let mut taus: Vec<f64> = a.points.iter().chain(&b.points).map(|p| p.0).filter(|t| *t >= tau0).collect();
    taus.push(tau0);
    taus.iter().all(|&t| a.value_at(t) >= b.value_at(t))
}

fn criterion_6(records: &[RunRecord], secs: f64) -> Outcome {
    let mut by_alg: BTreeMap<BetaRule, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_alg.entry(r.algorithm).or_default().push(r);
    }
    let rate = |a: BetaRule| {
        let v = &by_alg[&a];
        v.iter().filter(|r| r.converged).count() as f64 / v.len() as f64
    };
    let med = |a: BetaRule| median(by_alg[&a].iter().map(|r| r.iterations as f64).collect());
    let algs = [BetaRule::Dy, BetaRule::Prp, BetaRule::Hybrid1, BetaRule::Hybrid2];
    let overall = records.iter().filter(|r| r.converged).count() as f64 / records.len() as f64;
    let a = algs.iter().all(|&x| rate(x) >= 0.95);
    let (dy, prp, h1, h2) = (med(BetaRule::Dy), med(BetaRule::Prp), med(BetaRule::Hybrid1), med(BetaRule::Hybrid2));
    let b = h1 < prp && prp < dy && h2 < dy;
    let mut c = true;
    for metric in [Metric::Iterations, Metric::Time] {
        let curves = performance_profile(records, metric).unwrap();
        let find = |l: &str| curves.iter().find(|c| c.algorithm == l).unwrap();
        c &= dominates_from(find("Hybrid1"), find("DY"), 2.0);
    }
    let rates = algs.iter().map(|&x| format!("{} {:.1}%", x.label(), 100.0 * rate(x))).collect::<Vec<_>>().join(" ");
    outcome(
        a && b && c && secs <= 1800.0,
        format!(
            "{} runs in {secs:.1}s; (a) {} [{rates}; overall {:.1}%]; (b) {} [medians DY {dy}, PRP {prp}, \
             Hybrid1 {h1}, Hybrid2 {h2}]; (c) {}",
            records.len(),
            if a { "ok" } else { "FAIL" },
            100.0 * overall,
            if b { "ok" } else { "FAIL" },
            if c { "ok" } else { "FAIL" },
        ),
    )
}

// ---------------------------------------------------------------- 7

fn brute_force_profile(rows: &[Vec<Option<f64>>], s: usize, tau: f64) -> f64 {
    let kept: Vec<&Vec<Option<f64>>> = rows.iter().filter(|r| r.iter().any(|c| c.is_some())).collect();
    let hits = kept
        .iter()
        .filter(|r| {
            let best = r.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
            matches!(r[s], Some(t) if t / best <= tau)
        })
        .count();
    hits as f64 / kept.len() as f64
}

fn criterion_7() -> Outcome {
    let hand = ProfileTable {
        solvers: vec!["s1".into(), "s2".into()],
        rows: vec![vec![Some(2.0), Some(4.0)], vec![Some(10.0), Some(5.0)]],
    };
    let (c, _) = profile_from_table(&hand);
    let hand_ok = c[0].value_at(1.0) == 0.5 && c[0].value_at(2.0) == 1.0;

    let rng = &mut ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    let mut checked = 0;
    for _ in 0..200 {
        let rows: Vec<Vec<Option<f64>>> = (0..5)
            .map(|_| (0..3).map(|_| rng.random_bool(0.85).then(|| rng.random_range(0.1..10.0))).collect())
            .collect();
        let table = ProfileTable { solvers: vec!["a".into(), "b".into(), "c".into()], rows: rows.clone() };
        let (curves, _) = profile_from_table(&table);
        let mut taus: Vec<f64> = vec![0.5, 1.0, 1e9];
        for r in &rows {
            let best = r.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
            for t in r.iter().flatten() {
                let tau = t / best;
                taus.extend([tau, tau * (1.0 - 1e-9), tau * (1.0 + 1e-9)]);
            }
        }
        if rows.iter().all(|r| r.iter().all(|c| c.is_none())) {
            continue;
        }
        for (s, curve) in curves.iter().enumerate() {
            for &tau in &taus {
                checked += 1;
                if curve.value_at(tau) != brute_force_profile(&rows, s, tau) {
                    mismatches += 1;
                }
            }
        }
    }

    // the same through benchmark records
    let rows = [vec![Some(2.0), Some(4.0)], vec![Some(10.0), Some(5.0)]];
    let records: Vec<RunRecord> = rows
        .iter()
        .enumerate()
        .flat_map(|(p, row)| {
            row.iter().zip([BetaRule::Dy, BetaRule::Hybrid1]).map(move |(t, alg)| RunRecord {
                problem: ProblemId::Rayleigh,
                seed: p as u64,
                algorithm: alg,
                converged: t.is_some(),
                iterations: 0,
                elapsed_s: t.unwrap_or(0.0),
                final_grad_norm: 0.0,
                restarts: 0,
            })
        })
        .collect();
    let curves = performance_profile(&records, Metric::Time).unwrap();
    let via_records = curves[0].value_at(1.0) == 0.5 && curves[0].value_at(2.0) == 1.0;
    outcome(
        hand_ok && via_records && mismatches == 0,
        format!("hand example ok = {}, {checked} brute-force comparisons, {mismatches} mismatches", hand_ok && via_records),
    )
}

// ---------------------------------------------------------------- 8

fn rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// Rigidity, transport against a central difference of the retraction
/// (closed forms only), projection idempotence. Returns the worst errors.
fn geometry_trials<M, F, L>(m: &M, seed: u64, ambient: F, lift: L) -> (f64, f64, f64)
where
    M: Manifold,
    F: Fn(&mut ChaCha8Rng) -> M::Ambient,
    L: Fn(&M::Point, &M::Tangent) -> M::Ambient,
{
    let rng = &mut ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let (mut rig, mut tr, mut idem) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let x = m.random_point(rng);
        let eta = m.random_tangent(&x, rng).scaled(rng.random_range(0.05..1.0));
        let xi = m.random_tangent(&x, rng);
        let curve = |t: f64, v: &M::Tangent| {
            let mut s = eta.scaled(0.0);
            s.axpy(t, v);
            m.embed_point(&m.retract(&x, &s).unwrap())
        };
        let fd = (curve(h, &eta) - curve(-h, &eta)) / (2.0 * h);
        rig = rig.max(rel(&fd, &m.embed_tangent(&x, &eta)));

        let z = ambient(rng);
        let p = m.project(&x, &z).unwrap();
        let pp = m.project(&x, &lift(&x, &p)).unwrap();
        idem = idem.max(rel(&m.embed_tangent(&x, &pp), &m.embed_tangent(&x, &p)));

        if m.transport_kind() == TransportKind::Differentiated {
            let y = m.retract(&x, &eta).unwrap();
            let t = m.transport_to(&x, &eta, &y, &xi).unwrap().vector;
            let shifted = |s: f64| {
                let mut v = eta.clone();
                v.axpy(s, &xi);
                m.embed_point(&m.retract(&x, &v).unwrap())
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            tr = tr.max(rel(&fd, &m.embed_tangent(&y, &t)));
        }
    }
    (rig, tr, idem)
}

fn dense_truncation(a: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let svd = a.clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut out = DMatrix::zeros(a.nrows(), a.ncols());
    for &i in &order[..k] {
        out += u.column(i) * vt.row(i) * svd.singular_values[i];
    }
    out
}

fn criterion_8() -> Outcome {
    let mut rows = Vec::new();
    let vec_amb = |n: usize| move |rng: &mut ChaCha8Rng| normal_vec(rng, n);
    let mat_amb = |a: usize, b: usize| move |rng: &mut ChaCha8Rng| normal_mat(rng, a, b);
    rows.push(("euclidean", geometry_trials(&Euclidean::new(6), 81, vec_amb(6), |_, v| v.clone())));
    rows.push(("sphere", geometry_trials(&Sphere::new(8), 82, vec_amb(8), |_, v| v.clone())));
    rows.push(("oblique", geometry_trials(&Oblique::new(5, 4), 83, mat_amb(5, 4), |_, v| v.clone())));
    rows.push(("stiefel", geometry_trials(&Stiefel::new(9, 4), 84, mat_amb(9, 4), |_, v| v.clone())));
    let fr = FixedRank::new(12, 9, 3);
    rows.push(("fixed_rank", geometry_trials(&fr, 85, mat_amb(12, 9), |x, v| fr.ambient(x, v))));

    let rng = &mut ChaCha8Rng::seed_from_u64(86);
    let mut svd_err = 0.0_f64;
    for trial in 0..100 {
        let (m, n) = (rng.random_range(2..=30), rng.random_range(2..=30));
        let k = rng.random_range(1..=m.min(n).min(6));
        let fr = FixedRank::new(m, n, k);
        let x = fr.random_point(rng);
        let smin = x.s[(k - 1, k - 1)];
        let eta = fr.random_tangent(&x, rng).scaled(smin * rng.random_range(0.05..0.9));
        let expected = dense_truncation(&(x.to_dense() + fr.ambient(&x, &eta)), k);
        match fr.retract(&x, &eta) {
            Ok(y) => svd_err = svd_err.max((y.to_dense() - expected).amax()),
            Err(e) => {
                return outcome(false, format!("fixed-rank trial {trial} ({m}x{n}, k={k}): {e}"));
            }
        }
    }

    let mut pass = svd_err < 1e-8;
    let mut parts = Vec::new();
    for (name, (rig, tr, idem)) in rows {
        pass &= rig < 1e-5 && tr < 1e-5 && idem < 1e-10;
        parts.push(format!("{name} rig {rig:.0e} tr {tr:.0e} idem {idem:.0e}"));
    }
    parts.push(format!("fixed-rank vs dense SVD {svd_err:.1e}"));
    outcome(pass, format!("100 trials each: {}", parts.join("; ")))
}

// ---------------------------------------------------------------- 9

fn without_time(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            let mut cells: Vec<&str> = l.split(',').collect();
            cells.remove(5);
            cells.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_9(first: &[RunRecord]) -> Outcome {
    let again = run_suite(&GridConfig::default(), false).unwrap();
    let (a, b) = (without_time(&records_csv(first)), without_time(&records_csv(&again)));
    let mut spec = InstanceSpec::new(ProblemId::Stability, Params::new(), 4);
    spec.params.insert("n".into(), 12.into());
    let same_instance = format!("{:?}", spec.build().unwrap()) == format!("{:?}", spec.build().unwrap());
    outcome(a == b && same_instance, format!("{} records, identical modulo elapsed_s: {}", again.len(), a == b))
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |n: usize, name: &'static str, o: Outcome| {
        println!("{} criterion {n} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };

    report(1, "gradient correctness", criterion_1());
    report(2, "Euclidean reduction", criterion_2());
    let runs = solve_grid(&[BetaRule::Dy, BetaRule::Prp, BetaRule::Hybrid1, BetaRule::Hybrid2]);
    report(3, "theory invariants", criterion_3(&runs));
    report(4, "strong Wolfe post-hoc", criterion_4(&runs));
    drop(runs);
    report(5, "solution quality", criterion_5());
    let start = Instant::now();
    let records = run_suite(&GridConfig::default(), false).unwrap();
    let secs = start.elapsed().as_secs_f64();
    report(6, "benchmark orderings", criterion_6(&records, secs));
    report(7, "performance profiles", criterion_7());
    report(8, "geometry properties", criterion_8());
    report(9, "determinism", criterion_9(&records));

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        if std::env::var_os("HYBRID_RCG_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
            ExitCode::FAILURE
        } else {
            ExitCode::SUCCESS
        }
    }
}
