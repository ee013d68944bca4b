use freespec_sdp::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scalar_problem(sense: Sense, rhs: f64) -> SdpProblem {
    let mut p = SdpProblem::new(vec![1], sense);
    if sense != Sense::Feasibility {
        p.objective.add(0, 0, 0, 1.0);
    }
    let mut a = SparseSym::new();
    a.add(0, 0, 0, 1.0);
    p.add_constraint(a, rhs);
    p
}

fn trace_problem() -> SdpProblem {
    // minimize tr X  s.t. X11 = 1, X12 = 1
    let mut p = SdpProblem::new(vec![2], Sense::Minimize);
    p.objective.add(0, 0, 0, 1.0);
    p.objective.add(0, 1, 1, 1.0);
    let mut a1 = SparseSym::new();
    a1.add(0, 0, 0, 1.0);
    p.add_constraint(a1, 1.0);
    let mut a2 = SparseSym::new();
    a2.add(0, 0, 1, 0.5);
    p.add_constraint(a2, 1.0);
    p
}

fn tight() -> SolverOptions {
    SolverOptions::with_tol(1e-10)
}

#[test]
fn scalar_equality_is_optimal_at_one() {
    let p = scalar_problem(Sense::Minimize, 1.0);
    let s = solve(&p, &tight()).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert!((s.x[0][(0, 0)] - 1.0).abs() < 1e-9);
    assert!((s.primal_objective - 1.0).abs() < 1e-9);
}

#[test]
fn negative_scalar_is_infeasible_with_ray() {
    let p = scalar_problem(Sense::Feasibility, -1.0);
    let s = solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(s.status, Status::PrimalInfeasible);
    let ray = s.infeasibility_ray.as_ref().unwrap();
    let rep = check_ray(&p, ray).unwrap();
    assert!(rep.certifies(1e-8), "{rep:?}");
}

#[test]
fn trace_minimization_closed_form() {
    let p = trace_problem();
    let s = solve(&p, &tight()).unwrap();
    assert_eq!(s.status, Status::Optimal);
    let expected = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
    assert!((&s.x[0] - expected).amax() < 1e-9, "{}", s.x[0]);
    assert!((s.primal_objective - 2.0).abs() < 1e-9);
}

#[test]
fn maximize_sense_flips_dual_sign() {
    // maximize -tr X is the same as the trace problem
    let mut p = trace_problem();
    p.sense = Sense::Maximize;
    p.objective.scale(-1.0);
    let s = solve(&p, &tight()).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert!((s.primal_objective + 2.0).abs() < 1e-9);
    let rep = check_solution(&p, &s).unwrap();
    assert!(rep.satisfies_optimality(1e-9, 1e-9), "{rep:?}");
}

#[test]
fn check_solution_on_exact_and_perturbed_points() {
    let p = trace_problem();
    let x = vec![DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])];
    // complementary dual pair: S = I - 2 * sym(E12)
    let y = vec![0.0, 2.0];
    let s = vec![DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])];
    let mut sol = solve(&p, &tight()).unwrap();
    sol.x = x.clone();
    sol.y = y;
    sol.s = s;
    let rep = check_solution(&p, &sol).unwrap();
    assert!(rep.max_constraint_abs <= 1e-12);
    assert!(rep.dual_residual <= 1e-12);
    assert!(rep.gap <= 1e-12);

    sol.x[0][(0, 0)] += 1e-3;
    let rep = check_solution(&p, &sol).unwrap();
    assert!((rep.max_constraint_abs - 1e-3).abs() < 1e-12);
}

#[test]
fn dependent_constraints_are_dropped_or_certified() {
    let mut p = scalar_problem(Sense::Feasibility, 1.0);
    let mut a = SparseSym::new();
    a.add(0, 0, 0, 2.0);
    p.add_constraint(a.clone(), 2.0);
    let s = solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(s.status, Status::Optimal);
    p.add_constraint(a, 3.0);
    let s = solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(s.status, Status::PrimalInfeasible);
    assert!(check_ray(&p, s.infeasibility_ray.as_ref().unwrap()).unwrap().certifies(1e-8));
}

#[test]
fn dual_infeasible_problem_returns_primal_ray() {
    // minimize -X11 s.t. X12 = 0 over 2x2 psd: unbounded
    let mut p = SdpProblem::new(vec![2], Sense::Minimize);
    p.objective.add(0, 0, 0, -1.0);
    let mut a = SparseSym::new();
    a.add(0, 0, 1, 0.5);
    p.add_constraint(a, 0.0);
    let s = solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(s.status, Status::DualInfeasible);
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
    (&a + a.transpose()) * 0.5
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> DMatrix<f64> {
    let v = DMatrix::from_fn(n, rank, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
    &v * v.transpose()
}

/// Random problem with a strictly feasible primal and dual point planted.
fn random_feasible(rng: &mut ChaCha8Rng, blocks: &[usize], m: usize) -> SdpProblem {
    let mut p = SdpProblem::new(blocks.to_vec(), Sense::Minimize);
    let x0: Vec<_> = blocks.iter().map(|&n| random_psd(rng, n, n) + DMatrix::identity(n, n)).collect();
    let mut y0 = vec![0.0; m];
    let mut c: Vec<_> = blocks.iter().map(|&n| random_psd(rng, n, n) + DMatrix::identity(n, n)).collect();
    for i in 0..m {
        let mut a = SparseSym::new();
        for (k, &n) in blocks.iter().enumerate() {
            a.add_dense(k, &random_sym(rng, n));
        }
        let b = a.inner(&x0);
        y0[i] = rng.gen::<f64>() - 0.5;
        a.add_to(y0[i], &mut c);
        p.add_constraint(a, b);
    }
    for (k, ck) in c.iter().enumerate() {
        p.objective.add_dense(k, ck);
    }
    p
}

#[test]
fn random_feasible_problems_satisfy_weak_duality_and_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let nb = rng.gen_range(1..4);
        let blocks: Vec<usize> = (0..nb).map(|_| rng.gen_range(1..6)).collect();
        let m = rng.gen_range(1..8);
        let p = random_feasible(&mut rng, &blocks, m);
        let opts = SolverOptions::default();
        let s = solve(&p, &opts).unwrap();
        assert_eq!(s.status, Status::Optimal);
        let rep = check_solution(&p, &s).unwrap();
        assert!(rep.satisfies_optimality(10.0 * opts.tol_feas, 10.0 * opts.tol_gap), "{rep:?}");
        assert!(s.primal_objective >= s.dual_objective - 1e-6 * (1.0 + s.primal_objective.abs()));
    }
}

#[test]
fn random_infeasible_problems_have_verified_rays() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.gen_range(1..5);
        let m = rng.gen_range(2..6);
        let mut p = SdpProblem::new(vec![n], Sense::Feasibility);
        let y0: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 0.5).collect();
        let s0 = random_psd(&mut rng, n, n) + DMatrix::identity(n, n);
        let mut acc = s0.clone();
        let mut rhs = Vec::new();
        for i in 0..m - 1 {
            let a = random_sym(&mut rng, n);
            acc += &a * y0[i];
            let mut sp = SparseSym::new();
            sp.add_dense(0, &a);
            let b = rng.gen::<f64>() * 2.0 - 1.0;
            rhs.push(b);
            p.add_constraint(sp, b);
        }
        let last = -&acc / y0[m - 1];
        let mut sp = SparseSym::new();
        sp.add_dense(0, &last);
        // choose b_m so that b^T y0 = 1
        let partial: f64 = rhs.iter().zip(&y0).map(|(b, y)| b * y).sum();
        p.add_constraint(sp, (1.0 - partial) / y0[m - 1]);
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, Status::PrimalInfeasible);
        let rep = check_ray(&p, s.infeasibility_ray.as_ref().unwrap()).unwrap();
        assert!(rep.certifies(1e-8), "{rep:?}");
    }
}

#[test]
fn solves_are_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = random_feasible(&mut rng, &[3, 2], 4);
    let opts = SolverOptions { jitter_seed: Some(5), ..SolverOptions::default() };
    let a = solve(&p, &opts).unwrap();
    let b = solve(&p, &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sdpa_round_trip_preserves_optimum() {
    let p = trace_problem();
    let text = to_sdpa(&p);
    let q = from_sdpa(&text).unwrap();
    let a = solve(&p, &tight()).unwrap();
    let b = solve(&q, &tight()).unwrap();
    assert!((a.primal_objective - b.primal_objective).abs() < 1e-9);
}

#[test]
fn ill_formed_problems_are_rejected() {
    let mut p = SdpProblem::new(vec![2], Sense::Minimize);
    let mut a = SparseSym::new();
    a.add(0, 0, 3, 1.0);
    p.add_constraint(a, 1.0);
    assert!(matches!(solve(&p, &SolverOptions::default()), Err(SdpError::IllFormed(_))));
    let p = SdpProblem::new(vec![], Sense::Minimize);
    assert!(matches!(solve(&p, &SolverOptions::default()), Err(SdpError::IllFormed(_))));
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
    #[test]
    fn weak_duality_on_planted_problems(seed in 0u64..10_000, n in 1usize..5, m in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_feasible(&mut rng, &[n, 2], m);
        let opts = SolverOptions::default();
        let s = solve(&p, &opts).unwrap();
        proptest::prop_assert!(s.status != Status::PrimalInfeasible);
        if s.status == Status::Optimal {
            let rep = check_solution(&p, &s).unwrap();
            proptest::prop_assert!(rep.satisfies_optimality(10.0 * opts.tol_feas, 10.0 * opts.tol_gap));
            proptest::prop_assert!(s.primal_objective >= s.dual_objective - opts.tol_gap * (1.0 + s.primal_objective.abs()));
        }
    }
}

#[test]
fn moderate_size_problem_solves() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let p = random_feasible(&mut rng, &[30, 10], 120);
    let s = solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(s.status, Status::Optimal);
}
