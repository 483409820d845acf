//! Seeded property suites over the operator algebra and the flow
//! identities. The `selftest` command runs them all; the acceptance tests
//! reuse them with the same seeds and counts.

use isoflow_core::flows::{
    double_bracket_field, genericity_check, toda_field, zero_flow_field,
};
use isoflow_core::integrate::{rk45_integrate, IntegratorConfig};
use isoflow_core::matrix::Matrix;
use isoflow_core::parsum::{
    congruence_transform, harmonic_mean_coeffs, intersection_projector, parallel_sum_coeffs,
    projector_of_map, quasi_project, quasi_project_by_elimination, quasi_projector_of_map,
    subspace_intersection_basis,
};
use isoflow_core::symspace::{
    commutator, frobenius_inner, kernel_basis, sym_eigen, SparsityPattern, SymMatrix, SymOperator,
};
use isoflow_core::flows::FieldEval;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const PARSUM_TRIALS: usize = 200;
pub const PARSUM_SEED: u64 = 0x5EED_0001;
pub const APPENDIX_TRIALS: usize = 100;
pub const APPENDIX_SEED: u64 = 0x5EED_0002;
pub const FLOW_SEED: u64 = 0x5EED_0003;

/// Accumulated outcome of one named check across all trials.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Worst observed value against its limit, for the report line.
    pub worst: f64,
    pub limit: f64,
}

impl CheckOutcome {
    fn new(name: &'static str, limit: f64) -> Self {
        CheckOutcome {
            name,
            trials: 0,
            failures: 0,
            worst: 0.0,
            limit,
        }
    }

    fn record(&mut self, value: f64) {
        self.trials += 1;
        if value > self.limit || value.is_nan() {
            self.failures += 1;
        }
        if value > self.worst || self.worst.is_nan() {
            self.worst = value;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn print(&self) {
        println!("suite {}: {}", self.name, if self.passed() { "PASS" } else { "FAIL" });
        for c in &self.checks {
            println!(
                "  [{}] {}: {}/{} pass, worst {:.3e} (limit {:.1e})",
                if c.passed() { "ok" } else { "FAIL" },
                c.name,
                c.trials - c.failures,
                c.trials,
                c.worst,
                c.limit
            );
        }
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| gauss(rng))
}

/// Haar-ish random orthogonal matrix by twice-iterated Gram–Schmidt of a
/// Gaussian matrix.
fn random_orthogonal(dim: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut q = random_matrix(dim, dim, rng);
    for j in 0..dim {
        for _ in 0..2 {
            for i in 0..j {
                let dot: f64 = (0..dim).map(|r| q[(r, i)] * q[(r, j)]).sum();
                for r in 0..dim {
                    let delta = dot * q[(r, i)];
                    q[(r, j)] -= delta;
                }
            }
        }
        let norm: f64 = (0..dim).map(|r| q[(r, j)] * q[(r, j)]).sum::<f64>().sqrt();
        for r in 0..dim {
            q[(r, j)] /= norm;
        }
    }
    q
}

/// Random PSD matrix of exact rank `rank` with eigenvalues in `[0.5, 2]`,
/// together with an exact orthonormal basis of its kernel. The clean
/// spectrum keeps ranks and kernels numerically unambiguous.
fn random_psd_with_kernel(
    dim: usize,
    rank: usize,
    rng: &mut ChaCha8Rng,
) -> (Matrix, Matrix, Matrix) {
    let q = random_orthogonal(dim, rng);
    let mut a = Matrix::zeros(dim, dim);
    for k in 0..rank {
        let lam = 0.5 + 1.5 * rng.random::<f64>();
        for i in 0..dim {
            for j in 0..dim {
                a[(i, j)] += lam * q[(i, k)] * q[(j, k)];
            }
        }
    }
    let range = Matrix::from_fn(dim, rank, |i, k| q[(i, k)]);
    let kernel = Matrix::from_fn(dim, dim - rank, |i, k| q[(i, rank + k)]);
    (a, range, kernel)
}

fn random_psd(dim: usize, rank: usize, rng: &mut ChaCha8Rng) -> Matrix {
    random_psd_with_kernel(dim, rank, rng).0
}

/// SPD matrix with spectrum in `[0.5, 2]`, so the harmonic-mean identity
/// is tested away from the singular boundary.
fn random_spd(dim: usize, rng: &mut ChaCha8Rng) -> Matrix {
    random_psd(dim, dim, rng)
}

/// Rank of a PSD matrix whose natural norm scale is 1, so a matrix that
/// is zero up to rounding noise has rank zero.
fn rank_of_psd(a: &Matrix) -> usize {
    let sym = SymMatrix::symmetrize(a).to_full();
    let eig = sym_eigen(&sym).unwrap();
    let cutoff = 64.0 * a.rows() as f64 * f64::EPSILON * eig.max_value().max(1.0);
    eig.rank_above(cutoff)
}

fn fnorm(m: &Matrix) -> f64 {
    m.frob_norm()
}

/// Parallel-sum law suite over seeded random PSD operator pairs
/// (`N ≤ 21`): formula symmetry, positive semi-definiteness, the
/// range/kernel laws, congruence covariance, the harmonic-mean identity
/// on the definite cone, the absorption identity `A = A(A+B)(A+B)⁺`,
/// kernel additivity of `A+B`, and uniqueness of the quasi-projection
/// across two independent solvers.
pub fn parallel_sum_suite(seed: u64, trials: usize) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut symmetry = CheckOutcome::new("formula symmetry 2A(A+B)+B = 2B(A+B)+A", 1e-9);
    let mut psd = CheckOutcome::new("parallel sum is PSD", 1e-9);
    let mut range_law = CheckOutcome::new("rank equals intersection dimension", 0.0);
    let mut kernel_law = CheckOutcome::new("kernel contains Ker A + Ker B", 1e-9);
    let mut congruence = CheckOutcome::new("congruence covariance", 1e-9);
    let mut harmonic = CheckOutcome::new("harmonic mean identity (SPD)", 1e-10);
    let mut absorption = CheckOutcome::new("A = A(A+B)(A+B)+", 1e-9);
    let mut kernel_sum = CheckOutcome::new("Ker(A+B) = Ker A ∩ Ker B", 1e-9);
    let mut uniqueness = CheckOutcome::new("uniqueness across solvers", 1e-9);

    for trial in 0..trials {
        let n = 1 + trial % 6; // N in {1, 3, 6, 10, 15, 21}
        let dim = n * (n + 1) / 2;
        let ra = 1 + rng.next_u32() as usize % dim;
        let rb = 1 + rng.next_u32() as usize % dim;
        // half the trials use full-rank pairs
        let (ra, rb) = if trial % 2 == 0 { (dim, dim) } else { (ra, rb) };
        let (a, range_a, kernel_a) = random_psd_with_kernel(dim, ra, &mut rng);
        let (b, range_b, kernel_b) = random_psd_with_kernel(dim, rb, &mut rng);

        let s1 = parallel_sum_coeffs(&a, &b).unwrap();
        let s2 = parallel_sum_coeffs(&b, &a).unwrap();
        let pair_scale = 1.0 + fnorm(&a) * fnorm(&b);
        symmetry.record(s1.sub(&s2).frob_norm() / pair_scale);

        let eig = sym_eigen(&SymMatrix::symmetrize(&s1).to_full()).unwrap();
        let lam_max = eig.max_value().max(0.0);
        psd.record((-eig.min_value()).max(0.0) / (1e-300_f64).max(lam_max).max(1.0));

        let pa = range_a.mul(&range_a.transpose());
        let pb = range_b.mul(&range_b.transpose());
        let basis = subspace_intersection_basis(&pa, &pb).unwrap();
        range_law.record((rank_of_psd(&s1) as f64 - basis.cols() as f64).abs());

        let mut worst = 0.0_f64;
        let norm_s = fnorm(&s1).max(1.0);
        for x in 0..kernel_a.cols() {
            for y in 0..kernel_b.cols() {
                let z: Vec<f64> =
                    (0..dim).map(|i| kernel_a[(i, x)] + kernel_b[(i, y)]).collect();
                let img = s1.matvec(&z);
                let r = img.iter().map(|v| v * v).sum::<f64>().sqrt();
                worst = worst.max(r / norm_s);
            }
        }
        kernel_law.record(worst);

        // congruence by a generic, well-conditioned invertible map
        let m = {
            let u = random_orthogonal(dim, &mut rng);
            let v = random_orthogonal(dim, &mut rng);
            let sv: Vec<f64> = (0..dim).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
            u.mul(&Matrix::diagonal(&sv)).mul(&v)
        };
        if kernel_basis(&m).unwrap().cols() == 0 {
            let op_a = SymOperator::from_coeffs(n, a.clone());
            let op_b = SymOperator::from_coeffs(n, b.clone());
            let lhs = m
                .mul(isoflow_core::parsum::parallel_sum(&op_a, &op_b).unwrap().coeffs())
                .mul(&m.transpose());
            let rhs = parallel_sum_coeffs(
                congruence_transform(&op_a, &m).unwrap().coeffs(),
                congruence_transform(&op_b, &m).unwrap().coeffs(),
            )
            .unwrap();
            congruence.record(lhs.sub(&rhs).frob_norm() / (1.0 + lhs.frob_norm()));
        }

        let a_spd = random_spd(dim, &mut rng);
        let b_spd = random_spd(dim, &mut rng);
        let hm = harmonic_mean_coeffs(&a_spd, &b_spd).unwrap();
        let ps = parallel_sum_coeffs(&a_spd, &b_spd).unwrap();
        harmonic.record(hm.sub(&ps).frob_norm() / (1.0 + ps.frob_norm()));

        let s = a.add(&b);
        let s_pinv =
            isoflow_core::symspace::psd_pseudo_inverse_matrix(&s, dim as f64 * f64::EPSILON)
                .unwrap();
        let lhs = a.mul(&s).mul(&s_pinv);
        absorption.record(a.sub(&lhs).frob_norm() / (1.0 + fnorm(&a)));

        let ks = kernel_basis(&s).unwrap();
        let k_both = kernel_basis(&a.vstack(&b)).unwrap();
        let mut dim_gap = (ks.cols() as f64 - k_both.cols() as f64).abs();
        for col in 0..ks.cols() {
            let z: Vec<f64> = (0..dim).map(|i| ks[(i, col)]).collect();
            let ra = a.matvec(&z).iter().map(|v| v * v).sum::<f64>().sqrt();
            let rb = b.matvec(&z).iter().map(|v| v * v).sum::<f64>().sqrt();
            dim_gap = dim_gap.max(ra / (1.0 + fnorm(&a))).max(rb / (1.0 + fnorm(&b)));
        }
        kernel_sum.record(dim_gap);

        let op_a = SymOperator::from_coeffs(n, a);
        let op_b = SymOperator::from_coeffs(n, b);
        let c = SymMatrix::from_fn(n, |_, _| gauss(&mut rng));
        let sol1 = quasi_project(&op_a, &op_b, &c).unwrap();
        let sol2 = quasi_project_by_elimination(&op_a, &op_b, &c).unwrap();
        let scale = 1.0 + c.frob_norm() * (1.0 + fnorm(op_a.coeffs()) + fnorm(op_b.coeffs()));
        let gap = (&sol1.u - &sol2.u)
            .frob_norm()
            .max((&op_a.apply(&sol1.lambda) - &op_a.apply(&sol2.lambda)).frob_norm())
            .max((&op_b.apply(&sol1.lambda) - &op_b.apply(&sol2.lambda)).frob_norm());
        uniqueness.record(gap / scale);
    }

    SuiteReport {
        name: "parallel-sum laws",
        checks: vec![
            symmetry, psd, range_law, kernel_law, congruence, harmonic, absorption, kernel_sum,
            uniqueness,
        ],
    }
}

/// Projector-calculus suite: `!(P,Q)` of two orthogonal projectors is the
/// orthogonal projector onto the intersection of their ranges, and the
/// quasi-projector `LLᵀ` has the same rank and kernel as `LL⁺`.
pub fn appendix_a_suite(seed: u64, trials: usize) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idempotent = CheckOutcome::new("!(P,Q) idempotent", 1e-9);
    let mut self_adjoint = CheckOutcome::new("!(P,Q) self-adjoint", 1e-9);
    let mut oracle = CheckOutcome::new("!(P,Q) equals explicit intersection projector", 1e-9);
    let mut rank_match = CheckOutcome::new("rank LLᵀ = rank LL⁺", 0.0);
    let mut kernel_match = CheckOutcome::new("kernel LLᵀ = kernel LL⁺", 1e-9);

    for trial in 0..trials {
        let dim = 3 + trial % 8;
        let kl = 1 + rng.next_u32() as usize % dim;
        let km = 1 + rng.next_u32() as usize % dim;
        // well-conditioned maps of exact rank: orthonormal basis times a
        // bounded mixing factor
        let ql = random_orthogonal(dim, &mut rng);
        let bl = Matrix::from_fn(dim, kl, |i, k| ql[(i, k)]);
        let complement = Matrix::from_fn(dim, dim - kl, |i, k| ql[(i, kl + k)]);
        let mut cl = random_matrix(kl, kl, &mut rng).scaled(0.3);
        for i in 0..kl {
            cl[(i, i)] += 1.0;
        }
        let l = bl.mul(&cl);
        let m = {
            let qm = random_orthogonal(dim, &mut rng);
            let bm = Matrix::from_fn(dim, km, |i, k| qm[(i, k)]);
            let mut cm = random_matrix(km, km, &mut rng).scaled(0.3);
            for i in 0..km {
                cm[(i, i)] += 1.0;
            }
            bm.mul(&cm)
        };
        let p = projector_of_map(&l).unwrap();
        let q = projector_of_map(&m).unwrap();

        let r = intersection_projector(&p, &q).unwrap();
        idempotent.record(r.mul(&r).sub(&r).frob_norm() / (1.0 + r.frob_norm()));
        self_adjoint.record(r.sub(&r.transpose()).frob_norm() / (1.0 + r.frob_norm()));

        let basis = subspace_intersection_basis(&p, &q).unwrap();
        let explicit = basis.mul(&basis.transpose());
        oracle.record(r.sub(&explicit).frob_norm() / (1.0 + explicit.frob_norm()));

        let quasi = quasi_projector_of_map(&l);
        let rank_p: f64 = (0..dim).map(|i| p[(i, i)]).sum();
        rank_match.record((rank_of_psd(&quasi) as f64 - rank_p.round()).abs());

        // both kernels must contain (exactly) the orthogonal complement
        // of Range L, and nothing more given the rank match above
        let mut worst = 0.0_f64;
        for col in 0..complement.cols() {
            let z: Vec<f64> = (0..dim).map(|i| complement[(i, col)]).collect();
            let pz = p.matvec(&z);
            worst = worst.max(pz.iter().map(|v| v * v).sum::<f64>().sqrt());
            let qz = quasi.matvec(&z);
            let r = qz.iter().map(|v| v * v).sum::<f64>().sqrt();
            worst = worst.max(r / (1.0 + fnorm(&quasi)));
        }
        kernel_match.record(worst);
    }

    SuiteReport {
        name: "projector calculus",
        checks: vec![idempotent, self_adjoint, oracle, rank_match, kernel_match],
    }
}

/// Flow-identity suite: the commutator splitting behind the Toda field,
/// the tridiagonal bracket identity, descent of both gradient-like
/// flows, and staircase preservation along integrated Toda trajectories.
pub fn flow_identity_suite(seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut splitting = CheckOutcome::new("[X, X_l − X_lᵀ] = −[X, X_d + 2X_lᵀ]", 1e-12);
    let mut tridiag = CheckOutcome::new("[D,X] = X_l − X_lᵀ on tridiagonal X", 1e-14);
    let mut zero_descent = CheckOutcome::new("zero flow descends f", 1e-10);
    let mut db_descent = CheckOutcome::new("⟨X−D, h(X)⟩ = −‖[D,X]‖²", 1e-10);
    let mut staircase = CheckOutcome::new("Toda flow keeps staircase zeros (t ≤ 10)", 1e-10);

    for trial in 0..50 {
        let n = 2 + trial % 7;
        let x = SymMatrix::from_fn(n, |_, _| gauss(&mut rng));
        let lhs = toda_field(&x);
        let rhs_arg = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                x.get(i, j)
            } else if i < j {
                2.0 * x.get(i, j)
            } else {
                0.0
            }
        });
        let rhs = SymMatrix::fold_lower(&commutator(&x.to_full(), &rhs_arg).unwrap());
        splitting.record((&lhs + &rhs).frob_norm() / (1.0 + lhs.frob_norm()));
    }

    for trial in 0..50 {
        let n = 2 + trial % 7;
        let pattern = SparsityPattern::tridiagonal(n);
        let x = pattern
            .project(&SymMatrix::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0))
            .unwrap();
        let d = Matrix::diagonal(&(1..=n).map(|v| v as f64).collect::<Vec<_>>());
        let lhs = commutator(&d, &x.to_full()).unwrap();
        let rhs = Matrix::from_fn(n, n, |i, j| {
            if i > j {
                x.get(i, j)
            } else if i < j {
                -x.get(i, j)
            } else {
                0.0
            }
        });
        tridiag.record(lhs.sub(&rhs).max_abs());
    }

    for trial in 0..30 {
        let n = 3 + trial % 5;
        let pattern = SparsityPattern::banded(n, 1 + trial % 2);
        let x = pattern
            .project(&SymMatrix::from_fn(n, |_, _| gauss(&mut rng)))
            .unwrap();
        let d = SymMatrix::from_diag(&(1..=n).map(|v| v as f64).collect::<Vec<_>>());
        let g = zero_flow_field(&x, &d, &pattern, None).unwrap().derivative;
        let slope = frobenius_inner(&(&x - &d), &g).unwrap();
        let scale = 1.0 + (&x - &d).frob_norm() * g.frob_norm();
        zero_descent.record(slope.max(0.0) / scale);

        let h = double_bracket_field(&x, &d).unwrap();
        let lhs = frobenius_inner(&(&x - &d), &h).unwrap();
        let bracket = commutator(&d.to_full(), &x.to_full()).unwrap();
        let rhs = -bracket.frob_norm() * bracket.frob_norm();
        db_descent.record((lhs - rhs).abs() / (1.0 + rhs.abs()));
    }

    let stair = SparsityPattern::from_pairs(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 2), (1, 3)])
        .unwrap();
    for pattern in [SparsityPattern::tridiagonal(6), stair] {
        let x0 = pattern
            .project(&SymMatrix::from_fn(pattern.order(), |_, _| gauss(&mut rng)))
            .unwrap();
        let cfg = IntegratorConfig::new(10.0).store_snapshots(true);
        let log = rk45_integrate(
            |x: &SymMatrix| Ok(FieldEval::smooth(toda_field(x))),
            &x0,
            &cfg,
            None,
        )
        .unwrap();
        let mut worst = 0.0_f64;
        for snap in log.snapshots.as_ref().unwrap() {
            worst = worst.max((snap - &pattern.project(snap).unwrap()).frob_norm());
        }
        staircase.record(worst);
    }

    SuiteReport {
        name: "flow identities",
        checks: vec![splitting, tridiag, zero_descent, db_descent, staircase],
    }
}

/// `A.D + m` is invertible for `D = diag(1..n)` over full and tridiagonal
/// patterns, `n = 3..8`.
pub fn genericity_suite() -> SuiteReport {
    let mut invertible = CheckOutcome::new("A.D + m invertible (min eig > 1e-10)", 0.0);
    for n in 3..=8 {
        let d = SymMatrix::from_diag(&(1..=n).map(|v| v as f64).collect::<Vec<_>>());
        for pattern in [SparsityPattern::full(n), SparsityPattern::tridiagonal(n)] {
            let (min_eig, inv) = genericity_check(&d, &pattern).unwrap();
            let ok = inv && min_eig > 1e-10;
            invertible.record(if ok { 0.0 } else { 1.0 });
        }
    }
    SuiteReport {
        name: "genericity",
        checks: vec![invertible],
    }
}

/// Runs every suite with the canonical seeds and counts.
pub fn run_all() -> Vec<SuiteReport> {
    vec![
        parallel_sum_suite(PARSUM_SEED, PARSUM_TRIALS),
        appendix_a_suite(APPENDIX_SEED, APPENDIX_TRIALS),
        flow_identity_suite(FLOW_SEED),
        genericity_suite(),
    ]
}
