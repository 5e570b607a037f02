use nalgebra::{DMatrix, DVector};

use hybrid_rcg::manifolds::Euclidean;
use hybrid_rcg::problems::{Objective, Rayleigh};
use hybrid_rcg::solver::{solve, BetaRule, ConjugateGradient, SolverConfig, Termination, TRACE_CSV_HEADER};

/// `f(x) = x^T Q x / 2 - b^T x` on R^n.
struct Quadratic {
    space: Euclidean,
    q: DMatrix<f64>,
    b: DVector<f64>,
}

impl Objective for Quadratic {
    type Space = Euclidean;
    fn manifold(&self) -> &Euclidean {
        &self.space
    }
    fn cost(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.q * x)) - self.b.dot(x)
    }
    fn euclidean_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.q * x - &self.b
    }
}

fn quadratic() -> Quadratic {
    let q = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
    Quadratic { space: Euclidean::new(3), q, b: DVector::from_vec(vec![1.0, -2.0, 0.5]) }
}

fn diag123() -> Rayleigh {
    Rayleigh::new(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0])))
}

#[test]
fn rayleigh_diag_from_uniform_start() {
    let x0 = DVector::from_element(3, 1.0 / 3f64.sqrt());
    for beta in BetaRule::ALL {
        let sol = solve(&diag123(), x0.clone(), SolverConfig::with_beta(beta)).unwrap();
        assert!(sol.report.converged, "{beta}");
        assert!((sol.report.final_cost - 1.0).abs() < 1e-10, "{beta}: {}", sol.report.final_cost);
    }
}

#[test]
fn optimal_start_takes_no_iterations() {
    let x0 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    let sol = solve(&diag123(), x0, SolverConfig::default()).unwrap();
    assert_eq!(sol.report.iterations, 0);
    assert_eq!(sol.report.termination, Termination::Converged);
    assert_eq!(sol.report.trace.len(), 1);
}

#[test]
fn every_rule_solves_a_euclidean_quadratic() {
    let obj = quadratic();
    let exact = obj.q.clone().lu().solve(&obj.b).unwrap();
    for beta in BetaRule::ALL {
        let sol = solve(&obj, DVector::zeros(3), SolverConfig::with_beta(beta)).unwrap();
        assert!(sol.report.converged, "{beta}");
        assert!((&sol.point - &exact).amax() < 1e-6, "{beta}");
    }
}

#[test]
fn iteration_cap_is_reported() {
    let x0 = DVector::from_element(3, 1.0 / 3f64.sqrt());
    let cfg = SolverConfig { max_iters: 1, ..SolverConfig::with_beta(BetaRule::Steepest) };
    let sol = solve(&diag123(), x0, cfg).unwrap();
    assert!(!sol.report.converged);
    assert_eq!(sol.report.termination, Termination::MaxIterations);
    assert_eq!(sol.report.iterations, 1);
}

#[test]
fn invalid_start_is_rejected() {
    let bad = DVector::from_vec(vec![1.0, 1.0, 0.0]);
    assert!(solve(&diag123(), bad, SolverConfig::default()).is_err());
}

#[test]
fn bad_config_is_rejected() {
    let mut cfg = SolverConfig::default();
    cfg.line_search.c2 = 1e-5;
    assert!(ConjugateGradient::new(cfg).is_err());
    let cfg = SolverConfig { tolerance: -1.0, ..SolverConfig::default() };
    assert!(ConjugateGradient::new(cfg).is_err());
}

#[test]
fn trace_csv_has_one_row_per_iterate() {
    let x0 = DVector::from_element(3, 1.0 / 3f64.sqrt());
    let sol = solve(&diag123(), x0, SolverConfig::default()).unwrap();
    let mut buf = Vec::new();
    sol.report.write_trace_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], TRACE_CSV_HEADER);
    assert_eq!(lines.len(), sol.report.iterations + 2);
    let width = TRACE_CSV_HEADER.split(',').count();
    assert!(lines.iter().all(|l| l.split(',').count() == width));
    // no step data before the first step
    assert!(lines[1].split(',').nth(3).unwrap().is_empty());
}

#[test]
fn report_serializes_to_json() {
    let x0 = DVector::from_element(3, 1.0 / 3f64.sqrt());
    let sol = solve(&diag123(), x0, SolverConfig::default()).unwrap();
    let json = serde_json::to_value(&sol.report).unwrap();
    assert_eq!(json["converged"], true);
    assert_eq!(json["termination"]["status"], "converged");
}
