//! Cross-module invariants: tangency and descent of the flows, agreement
//! of the two zero-flow formulations, pseudo-inverse laws, and pattern
//! preservation along trajectories.

use isoflow_core::flows::{
    double_bracket_field, toda_field, zero_flow_field, zero_flow_field_dae, FieldEval,
};
use isoflow_core::integrate::{rk45_integrate, IntegratorConfig, Monitors};
use isoflow_core::matrix::Matrix;
use isoflow_core::parsum::{parallel_sum, projector_of_map, quasi_project};
use isoflow_core::symspace::{
    commutator, double_bracket_operator, frobenius_inner, SparsityPattern, SymMatrix, SymOperator,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    SymMatrix::from_fn(n, |_, _| gauss(rng))
}

fn random_sym_in_pattern(pattern: &SparsityPattern, rng: &mut ChaCha8Rng) -> SymMatrix {
    pattern
        .project(&random_sym(pattern.order(), rng))
        .unwrap()
}

fn random_psd_coeffs(dim: usize, rank: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let g = Matrix::from_fn(dim, rank, |_, _| gauss(rng));
    g.mul(&g.transpose())
}

fn trace_inner(a: &Matrix, b: &Matrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            acc += a[(i, j)] * b[(i, j)];
        }
    }
    acc
}

/// Columns `svec([K_b, X])` over the skew basis: the coordinate matrix of
/// the map `K ↦ [K,X]`, whose range is the tangent space of `Iso(X)`.
fn tangent_map(x: &SymMatrix) -> Matrix {
    let n = x.order();
    let coord_dim = n * (n + 1) / 2;
    let skew_dim = n * (n - 1) / 2;
    let xf = x.to_full();
    let mut l = Matrix::zeros(coord_dim, skew_dim);
    let mut col = 0;
    for d in 1..n {
        for i in 0..n - d {
            let j = i + d;
            let mut k = Matrix::zeros(n, n);
            k[(i, j)] = 1.0;
            k[(j, i)] = -1.0;
            let image = SymMatrix::fold_lower(&commutator(&k, &xf).unwrap());
            l.set_col(col, &image.svec());
            col += 1;
        }
    }
    l
}

#[test]
fn adjoint_identity_of_bracket_maps() {
    // ⟨[K,X], Y⟩ = ⟨K, [Y,X]⟩ for symmetric X, Y and skew K
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..50 {
        let n = 2 + (rng.next_u32() % 5) as usize;
        let x = random_sym(n, &mut rng).to_full();
        let y = random_sym(n, &mut rng).to_full();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                let v = gauss(&mut rng);
                k[(i, j)] = v;
                k[(j, i)] = -v;
            }
        }
        let lhs = trace_inner(&commutator(&k, &x).unwrap(), &y);
        let rhs = trace_inner(&k, &commutator(&y, &x).unwrap());
        assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }
}

#[test]
fn double_bracket_operator_is_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..100 {
        let n = 2 + (rng.next_u32() % 7) as usize;
        let x = random_sym(n, &mut rng);
        let op = double_bracket_operator(&x);
        assert!(op.is_self_adjoint(1e-12));
        let eig = op.eigen().unwrap();
        assert!(eig.min_value() >= -1e-10 * eig.max_value().max(0.0));
    }
}

#[test]
fn pseudo_inverse_satisfies_penrose_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for trial in 0..40 {
        let n = 2 + trial % 3;
        let dim = n * (n + 1) / 2;
        let rank = 1 + (rng.next_u32() as usize) % dim;
        let a = SymOperator::from_coeffs(n, random_psd_coeffs(dim, rank, &mut rng));
        let pinv = a.pseudo_inverse(dim as f64 * f64::EPSILON).unwrap();
        let (am, pm) = (a.coeffs(), pinv.coeffs());
        let scale = am.frob_norm().max(1e-300);
        let apa = am.mul(pm).mul(am);
        assert!(apa.sub(am).frob_norm() <= 1e-10 * scale);
        let pap = pm.mul(am).mul(pm);
        assert!(pap.sub(pm).frob_norm() <= 1e-10 * pm.frob_norm().max(1e-300));
        let ap = am.mul(pm);
        assert!(ap.sub(&ap.transpose()).frob_norm() <= 1e-10 * ap.frob_norm().max(1e-300));
        let pa = pm.mul(am);
        assert!(pa.sub(&pa.transpose()).frob_norm() <= 1e-10 * pa.frob_norm().max(1e-300));
        // A A⁺ acts as identity on Range A
        let y = random_sym(n, &mut rng);
        let ay = a.apply(&y);
        let back = a.apply(&pinv.apply(&ay));
        assert!((&back - &ay).frob_norm() <= 1e-9 * (1.0 + ay.frob_norm()));
    }
}

#[test]
fn quasi_projection_solution_certificates() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for trial in 0..40 {
        let n = 2 + trial % 3;
        let dim = n * (n + 1) / 2;
        let ra = 1 + (rng.next_u32() as usize) % dim;
        let rb = 1 + (rng.next_u32() as usize) % dim;
        let a = SymOperator::from_coeffs(n, random_psd_coeffs(dim, ra, &mut rng));
        let b = SymOperator::from_coeffs(n, random_psd_coeffs(dim, rb, &mut rng));
        let c = random_sym(n, &mut rng);
        let sol = quasi_project(&a, &b, &c).unwrap();
        let scale = 1.0 + c.frob_norm();
        assert!(sol.residual_q1 <= 1e-10 * scale * (1.0 + a.coeffs().frob_norm()));
        assert!(sol.residual_q2 <= 1e-9 * scale * (1.0 + a.coeffs().frob_norm() + b.coeffs().frob_norm()));
        // u ∈ Range A ∩ Range B
        for op in [&a, &b] {
            let p = projector_of_map(op.coeffs()).unwrap();
            let u = sol.u.svec();
            let pu = p.matvec(&u);
            let defect: f64 = u
                .iter()
                .zip(&pu)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            assert!(defect <= 1e-9 * (1.0 + sol.u.frob_norm()));
        }
        // u = !(A,B) c
        let ps = parallel_sum(&a, &b).unwrap();
        assert!((&ps.apply(&c) - &sol.u).frob_norm() <= 1e-10 * scale * (1.0 + ps.coeffs().frob_norm()));
    }
}

#[test]
fn zero_flow_is_tangent_and_pattern_closed() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for trial in 0..30 {
        let n = 3 + trial % 4;
        let pattern = if trial % 2 == 0 {
            SparsityPattern::tridiagonal(n)
        } else {
            SparsityPattern::banded(n, 2)
        };
        let x = random_sym_in_pattern(&pattern, &mut rng);
        let d = SymMatrix::from_diag(&(1..=n).map(|v| v as f64).collect::<Vec<_>>());
        let g = zero_flow_field(&x, &d, &pattern, None).unwrap().derivative;

        // exact zeros outside the pattern
        assert!(pattern.supports(&g));

        // tangency to Iso(X): g lies in span{[K,X] : K skew}
        let p = projector_of_map(&tangent_map(&x)).unwrap();
        let gv = g.svec();
        let pg = p.matvec(&gv);
        let defect: f64 = gv
            .iter()
            .zip(&pg)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(defect <= 1e-9 * (1.0 + g.frob_norm()), "tangency defect {defect:e}");
    }
}

#[test]
fn zero_flow_descends_the_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for trial in 0..30 {
        let n = 3 + trial % 4;
        let pattern = SparsityPattern::banded(n, 1 + trial % 2);
        let x = random_sym_in_pattern(&pattern, &mut rng);
        let d = SymMatrix::from_diag(&(1..=n).map(|v| v as f64).collect::<Vec<_>>());
        let g = zero_flow_field(&x, &d, &pattern, None).unwrap().derivative;
        let slope = frobenius_inner(&(&x - &d), &g).unwrap();
        let scale = 1.0 + (&x - &d).frob_norm() * g.frob_norm();
        assert!(slope <= 1e-10 * scale, "ascent direction: {slope:e}");
    }
}

#[test]
fn zero_flow_formulations_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for trial in 0..30 {
        let n = 3 + trial % 4;
        let pattern = SparsityPattern::banded(n, 1 + trial % 3);
        let x = random_sym_in_pattern(&pattern, &mut rng);
        let d = SymMatrix::from_diag(&(1..=n).map(|v| v as f64).collect::<Vec<_>>());
        let g = zero_flow_field(&x, &d, &pattern, None).unwrap().derivative;
        let g_dae = zero_flow_field_dae(&x, &d, &pattern).unwrap();
        let defect = (&g - &g_dae).frob_norm();
        assert!(defect <= 1e-9 * (1.0 + g.frob_norm()), "formulation gap {defect:e}");
    }
}

#[test]
fn double_bracket_descent_identity() {
    // ⟨X−D, h(X)⟩ = −‖[D,X]‖²
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    for _ in 0..50 {
        let n = 2 + (rng.next_u32() % 6) as usize;
        let x = random_sym(n, &mut rng);
        let d = SymMatrix::from_diag(&(1..=n).map(|v| v as f64).collect::<Vec<_>>());
        let h = double_bracket_field(&x, &d).unwrap();
        let lhs = frobenius_inner(&(&x - &d), &h).unwrap();
        let bracket = commutator(&d.to_full(), &x.to_full()).unwrap();
        let rhs = -bracket.frob_norm() * bracket.frob_norm();
        assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }
}

#[test]
fn tridiagonal_bracket_matches_toda_splitting() {
    // [D,X] = X_l − X_lᵀ for tridiagonal X and D = diag(1..n)
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    for n in 2..=8 {
        let pattern = SparsityPattern::tridiagonal(n);
        let x = random_sym_in_pattern(&pattern, &mut rng);
        let d = Matrix::diagonal(&(1..=n).map(|v| v as f64).collect::<Vec<_>>());
        let lhs = commutator(&d, &x.to_full()).unwrap();
        // [D,X](i,j) = (i−j)X(i,j): +X on the sub-diagonal, −X above
        let rhs = Matrix::from_fn(n, n, |i, j| {
            if i > j {
                x.get(i, j)
            } else if i < j {
                -x.get(i, j)
            } else {
                0.0
            }
        });
        assert!(lhs.sub(&rhs).max_abs() <= 1e-14);
    }
}

#[test]
fn toda_flow_preserves_staircase_patterns() {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let tridiag = SparsityPattern::tridiagonal(5);
    let stair = SparsityPattern::from_pairs(
        5,
        &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 2), (1, 3)],
    )
    .unwrap();
    assert!(stair.is_staircase());
    for pattern in [tridiag, stair] {
        let x0 = random_sym_in_pattern(&pattern, &mut rng);
        let cfg = IntegratorConfig::new(10.0).store_snapshots(true);
        let log = rk45_integrate(
            |x: &SymMatrix| Ok(FieldEval::smooth(toda_field(x))),
            &x0,
            &cfg,
            None,
        )
        .unwrap();
        for snap in log.snapshots.as_ref().unwrap() {
            let outside = (snap - &pattern.project(snap).unwrap()).frob_norm();
            assert!(outside <= 1e-10, "off-pattern mass {outside:e}");
        }
    }
}

#[test]
fn monitors_stay_sane_along_isospectral_flows() {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let pattern = SparsityPattern::tridiagonal(4);
    let x0 = random_sym_in_pattern(&pattern, &mut rng);
    let d = SymMatrix::from_diag(&[1.0, 2.0, 3.0, 4.0]);
    let mon = Monitors::new(&x0, &d).unwrap();
    let cfg = IntegratorConfig::new(20.0);

    let zf = isoflow_core::flows::ZeroFlow::new(&d, &pattern, None).unwrap();
    let zero_log = rk45_integrate(|x: &SymMatrix| zf.eval(x), &x0, &cfg, Some(&mon)).unwrap();
    let db_log = rk45_integrate(
        |x: &SymMatrix| double_bracket_field(x, &d).map(FieldEval::smooth),
        &x0,
        &cfg,
        Some(&mon),
    )
    .unwrap();

    for log in [&zero_log, &db_log] {
        assert!(log.max_d_ev() <= 1e-10, "spectrum drift {:e}", log.max_d_ev());
        let f0 = log.f[0];
        for w in log.f.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * (1.0 + f0), "objective increased");
        }
    }
}

use rand::RngCore;
