//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use freespec::gleich::{check_equality, equivalence_residual, minimal_whole_subpencil, EqualityVerdict};
use freespec::inclusion::{build_inclusion_sdp, check_inclusion, InclusionOptions, InclusionVerdict, KrausCertificate, Mode};
use freespec::linalg::{gaussian, min_eig, random_orthogonal, random_symmetric, sym_fn};
use freespec::psatz::{
    certify, gns_extract, naive_module_sdp, verify_certificate, Functional, PsatzOptions, PsatzVerdict,
};
use freespec::univar::{interval_of, univar_certify, IntervalCase};
use freespec::{basis_words, Boundedness, Error, MatPoly, Pencil, SymTuple, Word};
use freespec_sdp::{
    check_solution, facial_reduction, solve, FacialOutcome, SdpProblem, Sense, SolverOptions, SparseSym, Status,
};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn l1() -> Pencil {
    Pencil::diagonal(&[vec![2.0, 2.0], vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap()
}

fn l2() -> Pencil {
    Pencil::diagonal(&[vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
}

fn interval() -> Pencil {
    Pencil::diagonal(&[vec![1.0], vec![-1.0]]).unwrap()
}

fn uni(c: &[f64]) -> MatPoly {
    MatPoly::scalar(1, &c.iter().enumerate().map(|(k, &v)| (v, Word::new(vec![0; k]))).collect::<Vec<_>>())
}

fn random_pencil(rng: &mut ChaCha8Rng, d: usize, g: usize) -> Pencil {
    Pencil::monic_sized(d, (0..g).map(|_| random_symmetric(rng, d)).collect()).unwrap()
}

fn random_member(rng: &mut ChaCha8Rng, l: &Pencil, n: usize) -> SymTuple {
    let x = SymTuple::with_level(n, (0..l.g()).map(|_| random_symmetric(rng, n)).collect()).unwrap();
    let lam = min_eig(&(l.evaluate(&x).unwrap() - DMatrix::identity(l.d() * n, l.d() * n)));
    let t = if lam < 0.0 { -1.0 / lam } else { 5.0 };
    x.scaled(t * rng.gen_range(0.0..1.0))
}

fn hom_eigs(l: &Pencil, point: &[f64]) -> DVector<f64> {
    let m = l.homogenize().evaluate(&SymTuple::scalar(point)).unwrap();
    SymmetricEigen::new(m).eigenvalues
}

fn criterion_1() -> Outcome {
    let cert = match check_inclusion(&l1(), &l2(), &InclusionOptions::default()).map_err(|e| e.to_string())? {
        InclusionVerdict::Included(c) => c,
        v => return Err(format!("expected Included, got {v:?}")),
    };
    ensure!(cert.mode == Mode::Contraction, "mode {:?}", cert.mode);
    let rep = cert.verify(&l1(), &l2(), 1e-6).map_err(|e| e.to_string())?;
    ensure!(rep.valid && rep.reconstruction <= 1e-6, "reconstruction {:.2e}", rep.reconstruction);
    let iso = build_inclusion_sdp(&l1(), &l2(), Mode::Isometry).map_err(|e| e.to_string())?;
    let sol = solve(&iso.problem, &SolverOptions::default()).map_err(|e| e.to_string())?;
    ensure!(sol.status == Status::PrimalInfeasible, "isometry SDP status {:?}", sol.status);
    let p = [-1.0, 0.5, 0.5];
    let e1 = hom_eigs(&l1(), &p);
    ensure!(e1.min() >= -1e-8, "hL1 min eig {}", e1.min());
    let e2 = hom_eigs(&l2(), &p);
    ensure!(e2.iter().any(|&v| (v + 0.5).abs() <= 1e-8), "hL2 eigenvalues {e2:?}");
    Ok(format!("reconstruction {:.1e}, isometry SDP infeasible, hL2 min eig {}", rep.reconstruction, e2.min()))
}

/// Independent replay of a facial reduction chain on the raw data.
fn verify_chain(p: &SdpProblem, fr: &freespec_sdp::FacialReduction) -> Result<(), String> {
    let dense: Vec<Vec<DMatrix<f64>>> = p.constraints.iter().map(|c| c.matrix.to_dense(&p.blocks)).collect();
    let b = p.rhs();
    let combo = |y: &[f64]| -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = p.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (a, &yi) in dense.iter().zip(y) {
            for (o, ak) in out.iter_mut().zip(a) {
                *o += ak * yi;
            }
        }
        out
    };
    let mut faces: Vec<DMatrix<f64>> = p.blocks.iter().map(|&n| DMatrix::identity(n, n)).collect();
    for (k, step) in fr.steps.iter().enumerate() {
        let ynorm = step.y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let by: f64 = b.iter().zip(&step.y).map(|(a, c)| a * c).sum();
        ensure!(by.abs() <= 1e-9 * (1.0 + ynorm), "step {k}: b^T y = {by:.2e}");
        let s = combo(&step.y);
        let mut next = Vec::new();
        for (blk, (sk, v)) in s.iter().zip(&faces).enumerate() {
            if v.ncols() == 0 {
                next.push(v.clone());
                continue;
            }
            let r = -(v.transpose() * sk * v);
            let eig = SymmetricEigen::new(r);
            let top = eig.eigenvalues.amax();
            ensure!(eig.eigenvalues.min() >= -1e-7 * (1.0 + top), "step {k} block {blk}: exposing matrix not psd");
            let null: Vec<_> = (0..v.ncols())
                .filter(|&i| eig.eigenvalues[i] <= 1e-6 * top)
                .map(|i| eig.eigenvectors.column(i).into_owned())
                .collect();
            next.push(if null.is_empty() { DMatrix::zeros(v.nrows(), 0) } else { v * DMatrix::from_columns(&null) });
        }
        for (blk, (mine, theirs)) in next.iter().zip(&step.faces).enumerate() {
            ensure!(mine.ncols() == theirs.ncols(), "step {k} block {blk}: face dims {} vs {}", mine.ncols(), theirs.ncols());
            if mine.ncols() > 0 {
                let proj = theirs * theirs.transpose();
                ensure!((&proj * mine - mine).amax() <= 1e-6, "step {k} block {blk}: faces differ");
            }
        }
        faces = next;
    }
    let y = match &fr.outcome {
        FacialOutcome::Infeasible { y } => y,
        FacialOutcome::Reduced => return Err("chain does not end in a ray".into()),
    };
    let by: f64 = b.iter().zip(y).map(|(a, c)| a * c).sum();
    let s = combo(y);
    let mut worst = 0.0f64;
    for (sk, v) in s.iter().zip(&faces) {
        if v.ncols() > 0 {
            worst = worst.min(SymmetricEigen::new(-(v.transpose() * sk * v)).eigenvalues.min());
        }
    }
    ensure!(by > 1e-6 && worst >= -1e-7 * by.max(1.0), "final ray b^T y {by:.2e}, min eig {worst:.2e}");
    Ok(())
}

fn criterion_2() -> Outcome {
    let bad = Pencil::new(
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        vec![DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])],
    )
    .map_err(|e| e.to_string())?;
    let f = uni(&[0.0, 1.0]);
    ensure!(
        matches!(check_inclusion(&bad, &interval(), &InclusionOptions::default()), Err(Error::NotMonic)),
        "inclusion accepted the non-monic pencil"
    );
    ensure!(matches!(certify(&bad, &f, &PsatzOptions::default()), Err(Error::NotMonic)), "psatz accepted it");
    // y >= 0 on the spectrahedron of [[1, y], [y, 0]], which is {0}
    for y in [-1.0, -1e-3, 1e-3, 1.0] {
        ensure!(bad.min_eig_at(&SymTuple::scalar(&[y])).unwrap() < 0.0, "y = {y} is in the spectrahedron");
    }
    let mut steps = Vec::new();
    for d in 0..=3 {
        let sdp = naive_module_sdp(&bad, &f, d).map_err(|e| e.to_string())?;
        let fr = facial_reduction(&sdp.problem, &SolverOptions::default()).map_err(|e| e.to_string())?;
        verify_chain(&sdp.problem, &fr).map_err(|e| format!("d = {d}: {e}"))?;
        steps.push(fr.steps.len());
    }
    Ok(format!("NotMonic in both; naive module infeasible for d = 0..3 (reduction steps {steps:?})"))
}

fn planted_pair(rng: &mut ChaCha8Rng) -> (Pencil, Pencil) {
    let (d1, d2, g) = (rng.gen_range(1..=6usize), rng.gen_range(1..=6usize), rng.gen_range(1..=3));
    let la = random_pencil(rng, d1, g);
    let k = rng.gen_range(1..=3usize).max(d2.div_ceil(d1));
    let raw: Vec<DMatrix<f64>> = (0..k).map(|_| DMatrix::from_fn(d1, d2, |_, _| gaussian(rng))).collect();
    let mut gram = DMatrix::zeros(d2, d2);
    for v in &raw {
        gram += v.transpose() * v;
    }
    let isq = sym_fn(&gram, |l| 1.0 / l.sqrt());
    let vs: Vec<DMatrix<f64>> = raw.iter().map(|v| v * &isq).collect();
    let cert = KrausCertificate::new(Mode::Isometry, d1, d2, vs, DMatrix::zeros(d2, d2)).unwrap();
    let lb = Pencil::monic_sized(d2, la.coeffs().iter().map(|a| cert.apply(a)).collect()).unwrap();
    (la, lb)
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let opts = InclusionOptions::default();
    let mut worst = 0.0f64;
    for k in 0..100 {
        let (la, lb) = planted_pair(&mut rng);
        match check_inclusion(&la, &lb, &opts).map_err(|e| format!("pair {k}: {e}"))? {
            InclusionVerdict::Included(c) => {
                let rep = c.verify(&la, &lb, 1e-6).map_err(|e| e.to_string())?;
                ensure!(rep.valid, "pair {k}: certificate invalid {rep:?}");
                worst = worst.max(rep.reconstruction);
            }
            v => return Err(format!("pair {k}: {v:?}")),
        }
    }
    let (mut found, mut failed, mut total) = (0, 0, 0);
    while total < 100 {
        let (d1, d2, g) = (rng.gen_range(1..=6), rng.gen_range(1..=6), rng.gen_range(1..=3));
        let la = random_pencil(&mut rng, d1, g);
        let n = rng.gen_range(1..=d2.min(3));
        let x0 = random_member(&mut rng, &la, n);
        let mut b: Vec<DMatrix<f64>> = (0..g).map(|_| random_symmetric(&mut rng, d2)).collect();
        let lin = Pencil::new(DMatrix::zeros(d2, d2), b.clone()).unwrap();
        let nu = min_eig(&lin.evaluate(&x0).unwrap());
        if nu >= 0.0 {
            for m in &mut b {
                *m = -&*m;
            }
        }
        let s = if nu < 0.0 { -2.0 / nu } else { 1.0 };
        let lb = Pencil::monic_sized(d2, b.iter().map(|m| m * s).collect()).unwrap();
        if lb.min_eig_at(&x0).unwrap() > -1e-3 {
            continue;
        }
        total += 1;
        match check_inclusion(&la, &lb, &opts) {
            Ok(InclusionVerdict::NotIncluded(c)) => {
                ensure!(la.min_eig_at(&c.x).unwrap() >= -1e-7, "witness outside D_L1");
                ensure!(lb.min_eig_at(&c.x).unwrap() <= -1e-6, "witness inside D_L2");
                found += 1;
            }
            Ok(InclusionVerdict::Included(_)) => return Err(format!("false inclusion on violation {total}")),
            Err(Error::SearchFailed) => failed += 1,
            Err(e) => return Err(format!("violation {total}: {e}")),
        }
    }
    ensure!(found >= 95, "only {found}/100 counterexamples ({failed} SearchFailed)");
    Ok(format!("100/100 included (worst residual {worst:.1e}); {found}/100 counterexamples, {failed} SearchFailed"))
}

fn compression(rng: &mut ChaCha8Rng, l: &Pencil, k: usize) -> Pencil {
    let q = random_orthogonal(rng, l.d());
    let v = q.columns(0, k).into_owned();
    Pencil::monic_sized(k, l.coeffs().iter().map(|a| v.transpose() * a * &v).collect()).unwrap()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    let opts = InclusionOptions::default();
    let mut worst = 0.0f64;
    for k in 0..50 {
        let (d, g) = (rng.gen_range(2..=4), rng.gen_range(1..=3));
        let l = random_pencil(&mut rng, d, g);
        let u = random_orthogonal(&mut rng, d);
        let mut other = l.conjugate(&u);
        for _ in 0..rng.gen_range(1..=2) {
            let kk = rng.gen_range(1..d);
            other = other.direct_sum(&compression(&mut rng, &l, kk)).unwrap();
        }
        match check_equality(&l, &other, &opts).map_err(|e| format!("pair {k}: {e}"))? {
            EqualityVerdict::Equal { u, residual, minimal } => {
                let r = equivalence_residual(&minimal.0.pencil, &minimal.1.pencil, &u);
                ensure!(residual <= 1e-7 && r <= 1e-7, "pair {k}: residual {residual:.2e} / {r:.2e}");
                worst = worst.max(r);
            }
            v => return Err(format!("pair {k}: {v:?}")),
        }
    }
    match check_equality(&l1(), &l2(), &opts).map_err(|e| e.to_string())? {
        EqualityVerdict::NotEqual { witness, in_first, .. } => {
            let (a, b) = (l1().min_eig_at(&witness).unwrap(), l2().min_eig_at(&witness).unwrap());
            let ok = if in_first { a >= -1e-7 && b <= -1e-6 } else { b >= -1e-7 && a <= -1e-6 };
            ensure!(ok, "witness does not separate ({a:.2e}, {b:.2e})");
        }
        v => return Err(format!("example pair: {v:?}")),
    }
    let m = minimal_whole_subpencil(&l2(), &opts).map_err(|e| e.to_string())?;
    ensure!(m.pencil.d() == 3, "L2 reduced to size {}", m.pencil.d());
    let rows = [vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]];
    for i in 0..3 {
        let rest: Vec<Vec<f64>> = rows.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, r)| r.clone()).collect();
        let sub = Pencil::diagonal(&rest).unwrap();
        let dropped = Pencil::diagonal(&[rows[i].clone()]).unwrap();
        let hit = m.removal_witnesses.iter().any(|w| {
            w.x.n() == 1 && sub.min_eig_at(&w.x).unwrap() >= -1e-7 && dropped.min_eig_at(&w.x).unwrap() <= -1e-6
        });
        ensure!(hit, "no scalar witness for removing block {i}");
    }
    Ok(format!("50/50 equal (worst residual {worst:.1e}); example NotEqual; L2 sigma-minimal with scalar witnesses"))
}

fn random_symmetric_poly(rng: &mut ChaCha8Rng, g: usize, nu: usize, deg: usize) -> MatPoly {
    let mut p = MatPoly::zero(nu, nu, g);
    for w in basis_words(g, deg) {
        p.add_term(w, DMatrix::from_fn(nu, nu, |_, _| rng.gen_range(-1.0..1.0)));
    }
    p.add(&p.adjoint()).unwrap()
}

fn criterion_5() -> Outcome {
    let l = interval();
    let opts = PsatzOptions::default();
    let f = uni(&[1.0, 0.0, -1.0]);
    match certify(&l, &f, &opts).map_err(|e| e.to_string())? {
        PsatzVerdict::Certified { certificate, .. } => {
            let rep = verify_certificate(&f, &certificate, &l).map_err(|e| e.to_string())?;
            ensure!(rep.valid && rep.relative_residual <= 1e-6, "residual {:.2e}", rep.relative_residual);
            ensure!(rep.max_r_degree <= 2 && rep.max_q_degree <= 2, "degrees {} {}", rep.max_r_degree, rep.max_q_degree);
        }
        v => return Err(format!("1 - y^2: {v:?}")),
    }
    match certify(&l, &uni(&[0.0, 1.0]), &opts).map_err(|e| e.to_string())? {
        PsatzVerdict::Refuted(r) => {
            let x = r.model.x.scalars().ok_or("GNS model is not scalar")?;
            ensure!((x[0] + 1.0).abs() <= 1e-6, "X = {x:?}");
            ensure!((r.value + 1.0).abs() <= 1e-6, "lambda(F) = {}", r.value);
        }
        v => return Err(format!("y: {v:?}")),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let (mut cert, mut refu, mut unres) = (0, 0, 0);
    for k in 0..200 {
        let g = 1 + k % 2;
        let d1 = rng.gen_range(1..=3);
        let lk = random_pencil(&mut rng, d1, g);
        let mut fk = random_symmetric_poly(&mut rng, g, 1 + k % 3 / 2, 2);
        let nu = fk.rows();
        fk.add_term(Word::empty(), DMatrix::identity(nu, nu) * rng.gen_range(0.0..6.0));
        let mut verified_refutation = false;
        let mut certified = false;
        for seed in [k as u64, 1000 + k as u64] {
            match certify(&lk, &fk, &PsatzOptions { seed, ..Default::default() }).map_err(|e| format!("instance {k}: {e}"))? {
                PsatzVerdict::Certified { report, .. } => certified |= report.valid,
                PsatzVerdict::Refuted(r) => {
                    let fx = fk.evaluate(&r.model.x).unwrap();
                    let gm = r.model.gamma() / r.model.gamma().norm();
                    let v = (gm.transpose() * &fx * &gm)[(0, 0)];
                    verified_refutation |= v <= -1e-7 && lk.min_eig_at(&r.model.x).unwrap() >= -1e-7;
                }
                PsatzVerdict::Unresolved(_) => {}
            }
        }
        // sampled violations are refutations too
        for s in 0..30 {
            let x = random_member(&mut rng, &lk, 1 + s % 3);
            if min_eig(&fk.evaluate(&x).unwrap()) < -1e-6 {
                verified_refutation = true;
            }
        }
        ensure!(!(certified && verified_refutation), "instance {k} is both certified and refuted");
        match (certified, verified_refutation) {
            (true, _) => cert += 1,
            (false, true) => refu += 1,
            _ => unres += 1,
        }
    }
    Ok(format!("1 - y^2 certified, y refuted at X = -1; corpus 200: {cert} certified, {refu} refuted, {unres} neither"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let (g, nu, d) = (1 + k % 3, 1 + k % 2, 1 + k % 2);
        let n = rng.gen_range(1..=12);
        let raw: Vec<DMatrix<f64>> = (0..g).map(|_| random_symmetric(&mut rng, n)).collect();
        let x = SymTuple::with_level(n, raw.iter().map(|m| m / (1.0 + m.norm())).collect()).unwrap();
        let mut gm = DVector::from_fn(nu * n, |_, _| gaussian(&mut rng));
        gm /= gm.norm();
        let lam = Functional::from_point(&x, &gm, nu, 2 * d + 1).map_err(|e| e.to_string())?;
        let model = gns_extract(&lam, d).map_err(|e| format!("instance {k}: {e}"))?;
        ensure!(model.x.n() <= nu * freespec::ncpoly::basis_count(g, d), "instance {k}: model too large");
        for w in basis_words(g, 2 * d + 1) {
            for i in 0..nu {
                for j in 0..nu {
                    let mut e = DMatrix::zeros(nu, nu);
                    e[(i, j)] = 1.0;
                    let f = MatPoly::monomial(w.clone(), e, g);
                    let diff = (lam.apply(&f).unwrap() - model.value(&f).unwrap()).abs();
                    worst = worst.max(diff);
                }
            }
        }
    }
    ensure!(worst <= 1e-7, "worst deviation {worst:.2e}");
    Ok(format!("20 planted functionals, worst deviation {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    let opts = SolverOptions::default();
    for k in 0..200 {
        let d = rng.gen_range(1..=5);
        let b = random_symmetric(&mut rng, d);
        let a = match k % 5 {
            0 => &b * &b,
            1 => -(&b * &b),
            2 if d > 1 => {
                let v = DMatrix::from_fn(d, 1, |_, _| gaussian(&mut rng));
                &v * v.transpose()
            }
            _ => b,
        };
        let eig = SymmetricEigen::new(a.clone()).eigenvalues;
        let tol = 1e-12 * (1.0 + eig.amax());
        let indefinite = eig.max() > tol && eig.min() < -tol;
        let l = Pencil::monic(vec![a]).unwrap();
        let bounded = matches!(l.is_bounded(&opts).map_err(|e| format!("pencil {k}: {e}"))?, Boundedness::Bounded);
        ensure!(bounded == indefinite, "pencil {k}: is_bounded {bounded}, eigenvalues {eig:?}");
    }
    for (name, l) in [("L1", l1()), ("L2", l2())] {
        match l.is_bounded(&opts).map_err(|e| e.to_string())? {
            Boundedness::Unbounded(mu) => {
                let lam = min_eig(&l.linear_part(mu.as_slice()));
                ensure!(lam >= -1e-8, "{name}: recession direction fails, min eig {lam:.2e}");
            }
            Boundedness::Bounded => return Err(format!("{name} reported bounded")),
        }
    }
    Ok("200/200 agree with the eigen-sign oracle; example pencils unbounded with verified directions".into())
}

fn criterion_8() -> Outcome {
    let l = interval();
    let f = uni(&[1.0, 0.0, -1.0]);
    match univar_certify(&l, &f, &PsatzOptions::default()).map_err(|e| e.to_string())? {
        PsatzVerdict::Certified { certificate, .. } => {
            let rep = verify_certificate(&f, &certificate, &l).map_err(|e| e.to_string())?;
            ensure!(rep.valid && rep.relative_residual <= 1e-6, "residual {:.2e}", rep.relative_residual);
        }
        v => return Err(format!("{v:?}")),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let d = rng.gen_range(1..=5);
        let a = random_symmetric(&mut rng, d);
        let l = Pencil::monic(vec![a.clone()]).unwrap();
        let ok = |t: f64| min_eig(&(DMatrix::identity(d, d) + &a * t)) >= 0.0;
        let bisect = |dir: f64| -> Option<f64> {
            if ok(dir * 1e8) {
                return None;
            }
            let (mut lo, mut hi) = (0.0, 1e8);
            for _ in 0..300 {
                let mid = 0.5 * (lo + hi);
                if ok(dir * mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(dir * lo)
        };
        let (left, right) = (bisect(-1.0), bisect(1.0));
        let (ca, cb) = match interval_of(&l).map_err(|e| e.to_string())? {
            IntervalCase::Compact { a, b } => (Some(a), Some(b)),
            IntervalCase::HalfLineRight { a } => (Some(a), None),
            IntervalCase::HalfLineLeft { b } => (None, Some(b)),
            IntervalCase::FullLine => (None, None),
        };
        for (x, y) in [(ca, left), (cb, right)] {
            match (x, y) {
                (Some(x), Some(y)) => worst = worst.max((x - y).abs() / (1.0 + x.abs())),
                (None, None) => {}
                other => return Err(format!("pencil {k}: endpoint {other:?}")),
            }
        }
    }
    ensure!(worst <= 1e-8, "worst endpoint deviation {worst:.2e}");
    Ok(format!("1 - y^2 certified through inclusion; endpoints within {worst:.1e}"))
}

fn criterion_9() -> Outcome {
    let tight = SolverOptions::with_tol(1e-10);
    let scalar = |sense: Sense, rhs: f64| {
        let mut p = SdpProblem::new(vec![1], sense);
        if sense != Sense::Feasibility {
            p.objective.add(0, 0, 0, 1.0);
        }
        let mut a = SparseSym::new();
        a.add(0, 0, 0, 1.0);
        p.add_constraint(a, rhs);
        p
    };
    let s = solve(&scalar(Sense::Minimize, 1.0), &tight).map_err(|e| e.to_string())?;
    ensure!(s.status == Status::Optimal && (s.x[0][(0, 0)] - 1.0).abs() <= 1e-9, "x = 1 example: {:?}", s.status);
    let p = scalar(Sense::Feasibility, -1.0);
    let s = solve(&p, &SolverOptions::default()).map_err(|e| e.to_string())?;
    ensure!(s.status == Status::PrimalInfeasible, "x = -1 example: {:?}", s.status);
    let rep = check_solution(&p, &s).map_err(|e| e.to_string())?;
    ensure!(rep.ray.as_ref().is_some_and(|r| r.certifies(1e-8)), "x = -1 ray rejected");
    let mut p = SdpProblem::new(vec![2], Sense::Minimize);
    p.objective.add(0, 0, 0, 1.0);
    p.objective.add(0, 1, 1, 1.0);
    let mut a = SparseSym::new();
    a.add(0, 0, 0, 1.0);
    p.add_constraint(a, 1.0);
    let mut a = SparseSym::new();
    a.add(0, 0, 1, 0.5);
    p.add_constraint(a, 1.0);
    let s = solve(&p, &tight).map_err(|e| e.to_string())?;
    let expected = DMatrix::from_element(2, 2, 1.0);
    ensure!(
        s.status == Status::Optimal && (s.primal_objective - 2.0).abs() <= 1e-9 && (&s.x[0] - expected).amax() <= 1e-9,
        "trace example: {:?} objective {}",
        s.status,
        s.primal_objective
    );
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    for k in 0..50 {
        let n = rng.gen_range(1..5);
        let m = rng.gen_range(2..6);
        let mut p = SdpProblem::new(vec![n], Sense::Feasibility);
        let y0: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 0.5).collect();
        let v = DMatrix::from_fn(n, n, |_, _| gaussian(&mut rng));
        let mut acc = &v * v.transpose() + DMatrix::identity(n, n);
        let mut partial = 0.0;
        for yi in y0.iter().take(m - 1) {
            let a = random_symmetric(&mut rng, n);
            acc += &a * *yi;
            let mut sp = SparseSym::new();
            sp.add_dense(0, &a);
            let b = rng.gen_range(-1.0..1.0);
            partial += b * yi;
            p.add_constraint(sp, b);
        }
        let mut sp = SparseSym::new();
        sp.add_dense(0, &(-&acc / y0[m - 1]));
        p.add_constraint(sp, (1.0 - partial) / y0[m - 1]);
        let s = solve(&p, &SolverOptions::default()).map_err(|e| e.to_string())?;
        ensure!(s.status == Status::PrimalInfeasible, "instance {k}: {:?}", s.status);
        let rep = check_solution(&p, &s).map_err(|e| e.to_string())?;
        ensure!(rep.ray.as_ref().is_some_and(|r| r.certifies(1e-8)), "instance {k}: ray rejected");
    }
    Ok("three closed forms at 1e-9; 50/50 Farkas rays verified".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("example reproduction", criterion_1),
        ("monicity counterexample", criterion_2),
        ("planted inclusion roundtrip", criterion_3),
        ("equality roundtrip", criterion_4),
        ("positivity dichotomy", criterion_5),
        ("GNS fidelity", criterion_6),
        ("boundedness oracle", criterion_7),
        ("univariate composition", criterion_8),
        ("SDP solver sanity", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("PASS criterion {} ({name}, {secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}, {secs:.1}s): {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
