use hpvortex::baseflow::{build_mirrored, default_box, make_profile, ProfileFamily};
use hpvortex::fields::calculus::div;
use hpvortex::fields::reflect::{mirror_defect, odd_extend, restrict_half};
use hpvortex::fields::{make_grid, DomainKind, Grid2D, ScalarField};
use hpvortex::greens::{
    biot_savart_half, biot_savart_whole, check_bs_inequalities, PoissonSolver, SolverKind,
};
use hpvortex::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian(grid: Grid2D<f64>, c: (f64, f64), s: f64, amp: f64) -> ScalarField<f64> {
    let mut f = ScalarField::from_fn(grid, |x, y| amp * (-((x - c.0).powi(2) + (y - c.1).powi(2)) / (s * s)).exp());
    if grid.kind() == DomainKind::Half {
        for i in 0..grid.nx() {
            f.set(i, 0, 0.0);
        }
    }
    f
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn zero_vorticity_gives_zero_streamfunction() {
    for kind in [SolverKind::DirectSparse, SolverKind::SineTransform] {
        let g = make_grid(DomainKind::Half, 4.0_f64, 33).unwrap();
        let solver = PoissonSolver::new(g, kind).unwrap();
        let (psi, rep) = solver.solve_dirichlet(&ScalarField::<f64>::zeros(g)).unwrap();
        assert_eq!(psi.max_abs(), 0.0);
        assert_eq!(rep.kind, kind);
        let (v, _) = biot_savart_half(&ScalarField::<f64>::zeros(g), &solver).unwrap();
        assert_eq!(v.max_abs(), 0.0);
        let w = g.to_whole();
        let sw = PoissonSolver::new(w, kind).unwrap();
        let (v, _) = biot_savart_whole(&ScalarField::<f64>::zeros(w), &sw).unwrap();
        assert_eq!(v.max_abs(), 0.0);
    }
}

#[test]
fn direct_and_sine_paths_agree() {
    let g = make_grid(DomainKind::Half, 6.0_f64, 97).unwrap();
    let w = gaussian(g, (0.7, 2.5), 0.6, 1.3).add(&gaussian(g, (-1.5, 3.0), 0.4, -0.8)).unwrap();
    let a = PoissonSolver::new(g, SolverKind::DirectSparse).unwrap();
    let b = PoissonSolver::new(g, SolverKind::SineTransform).unwrap();
    let (pa, ra) = a.solve_dirichlet(&w).unwrap();
    let (pb, rb) = b.solve_dirichlet(&w).unwrap();
    assert!(ra.residual < 1e-10 && rb.residual < 1e-10);
    let d = pa.sub(&pb).unwrap().max_abs() / pa.max_abs();
    assert!(d < 1e-9, "{d}");
}

fn manufactured_error(n: usize) -> f64 {
    let l = 4.0;
    let k = std::f64::consts::PI / l;
    let g = make_grid(DomainKind::Half, l, n).unwrap();
    let exact = ScalarField::from_fn(g, |x, y| y * (l - y) * (k * x).sin());
    let omega = ScalarField::from_fn(g, |x, y| (k * k * y * (l - y) + 2.0) * (k * x).sin());
    let mut omega = omega;
    for i in 0..g.nx() {
        omega.set(i, 0, 0.0);
    }
    let solver = PoissonSolver::new(g, SolverKind::DirectSparse).unwrap();
    let (psi, _) = solver.solve_dirichlet(&omega).unwrap();
    for i in 0..g.nx() {
        assert_eq!(psi.at(i, 0), 0.0);
    }
    psi.sub(&exact).unwrap().max_abs()
}

#[test]
fn manufactured_solution_converges_second_order() {
    let e1 = manufactured_error(33);
    let e2 = manufactured_error(65);
    assert!(e1 < 1e-2);
    let order = (e1 / e2).log2();
    assert!((order - 2.0).abs() < 0.15, "order {order}");
}

#[test]
fn nonzero_trace_is_rejected() {
    let g = make_grid(DomainKind::Half, 4.0_f64, 33).unwrap();
    let solver = PoissonSolver::new(g, SolverKind::SineTransform).unwrap();
    let w = ScalarField::from_fn(g, |_, _| 1.0);
    assert!(matches!(solver.solve_dirichlet(&w), Err(Error::NonzeroTrace(_))));
}

#[test]
fn image_kernel_quadrature_oracle() {
    let (amp, s, c) = (1.0, 0.3, (0.4, 1.2));
    let g = make_grid(DomainKind::Half, 24.0_f64, 961).unwrap();
    let omega = gaussian(g, c, s, amp);
    let solver = PoissonSolver::new(g, SolverKind::SineTransform).unwrap();
    let (psi, rep) = solver.solve_dirichlet(&omega).unwrap();
    assert!(rep.edge_clearance_ok);
    // psi_G(a) - psi_G(b) = int_a^b v(r) dr for the free-space radial vortex
    let v = |r: f64| {
        if r < 1e-12 {
            0.0
        } else {
            amp * s * s / (2.0 * r) * (1.0 - (-r * r / (s * s)).exp())
        }
    };
    let mut worst: f64 = 0.0;
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let (x, y) = (g.x(i), g.y(j));
            let a = ((x - c.0).powi(2) + (y - c.1).powi(2)).sqrt();
            if !(1.0..=4.0).contains(&a) {
                continue;
            }
            let b = ((x - c.0).powi(2) + (y + c.1).powi(2)).sqrt();
            let want = simpson(v, a, b, 400);
            worst = worst.max((psi.at(i, j) - want).abs());
        }
    }
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn radial_vortex_speed_matches_quadrature() {
    let (amp, s) = (1.0, 0.3);
    let g = make_grid(DomainKind::Whole, 16.0_f64, 513).unwrap();
    let omega = gaussian(g, (0.0, 0.0), s, amp);
    let solver = PoissonSolver::new(g, SolverKind::SineTransform).unwrap();
    let (vel, _) = biot_savart_whole(&omega, &solver).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..g.len() {
        let (x, y) = g.xy(k);
        let r = (x * x + y * y).sqrt();
        if !(0.2..=3.0).contains(&r) {
            continue;
        }
        let circ = simpson(|q| q * amp * (-q * q / (s * s)).exp(), 0.0, r, 400) / r;
        let (u1, u2) = (vel.v1.values()[k], vel.v2.values()[k]);
        let az = (-y * u1 + x * u2) / r;
        let radial = (x * u1 + y * u2) / r;
        worst = worst.max((az - circ).abs()).max(radial.abs());
    }
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn odd_vorticity_gives_even_odd_velocity() {
    let g = make_grid(DomainKind::Whole, 6.0_f64, 97).unwrap();
    let w = ScalarField::from_fn(g, |x, y| {
        (-((x - 0.5).powi(2) + (y - 2.0).powi(2))).exp() - (-((x - 0.5).powi(2) + (y + 2.0).powi(2))).exp()
    });
    let solver = PoissonSolver::new(g, SolverKind::SineTransform).unwrap();
    let (v, _) = biot_savart_whole(&w, &solver).unwrap();
    let m = v.max_abs();
    assert!(mirror_defect(&v.v1, false) < 1e-13 * m);
    assert!(mirror_defect(&v.v2, true) < 1e-13 * m);
}

#[test]
fn mirrored_pair_velocity_symmetry() {
    let profile = make_profile(ProfileFamily::GaussianBump { a: 1.0_f64 }).unwrap();
    let grid = default_box(4.0, 2.0, 0.125).unwrap();
    let flow = build_mirrored(&profile, 2.0, 4.0, grid).unwrap();
    let solver = PoissonSolver::new(grid, SolverKind::SineTransform).unwrap();
    let (v, _) = biot_savart_whole(&flow.whole.omega, &solver).unwrap();
    let m = v.max_abs();
    assert!(mirror_defect(&v.v1, false) < 1e-13 * m);
    assert!(mirror_defect(&v.v2, true) < 1e-13 * m);
}

#[test]
fn half_plane_velocity_is_tangent_and_nearly_solenoidal() {
    let g = make_grid(DomainKind::Half, 8.0_f64, 129).unwrap();
    let w = gaussian(g, (1.0, 2.0), 0.7, 1.0);
    let solver = PoissonSolver::new(g, SolverKind::DirectSparse).unwrap();
    let (v, _) = biot_savart_half(&w, &solver).unwrap();
    for i in 0..g.nx() {
        assert_eq!(v.v2.at(i, 0), 0.0);
    }
    let d = div(&v).unwrap();
    let mut worst: f64 = 0.0;
    for j in 1..g.ny() - 1 {
        for i in 1..g.nx() - 1 {
            worst = worst.max(d.at(i, j).abs());
        }
    }
    assert!(worst < 1e-12 * v.max_abs() / g.h(), "{worst}");
}

#[test]
fn image_method_equals_odd_extension() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = make_grid(DomainKind::Half, 8.0_f64, 129).unwrap();
    let half = PoissonSolver::new(g, SolverKind::DirectSparse).unwrap();
    let whole = PoissonSolver::new(g.to_whole(), SolverKind::SineTransform).unwrap();
    for _ in 0..3 {
        let c = (rng.random_range(-3.0..3.0), rng.random_range(1.5..4.0));
        let w = gaussian(g, c, rng.random_range(0.3..0.9), rng.random_range(-2.0..2.0));
        let (vh, _) = biot_savart_half(&w, &half).unwrap();
        let (vw, _) = biot_savart_whole(&odd_extend(&w, 0.0).unwrap(), &whole).unwrap();
        let r1 = restrict_half(&vw.v1).unwrap();
        let r2 = restrict_half(&vw.v2).unwrap();
        let d = vh.v1.sub(&r1).unwrap().max_abs().max(vh.v2.sub(&r2).unwrap().max_abs());
        assert!(d < 1e-6, "{d}");
    }
}

#[test]
fn zero_field_ratios_are_flagged() {
    let g = make_grid(DomainKind::Half, 8.0_f64, 65).unwrap();
    let solver = PoissonSolver::new(g, SolverKind::SineTransform).unwrap();
    let r = check_bs_inequalities(&ScalarField::zeros(g), &solver).unwrap();
    assert!(!r.defined && r.r1.is_nan() && r.r2.is_nan() && r.r3.is_nan());
}

#[test]
fn ratios_are_stable_under_refinement() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let coarse = make_grid(DomainKind::Half, 8.0_f64, 129).unwrap();
    let fine = make_grid(DomainKind::Half, 8.0_f64, 257).unwrap();
    let sc = PoissonSolver::new(coarse, SolverKind::SineTransform).unwrap();
    let sf = PoissonSolver::new(fine, SolverKind::SineTransform).unwrap();
    for _ in 0..5 {
        let c = (rng.random_range(-2.0..2.0), rng.random_range(1.5..3.5));
        let s = rng.random_range(0.4..1.0);
        let a = check_bs_inequalities(&gaussian(coarse, c, s, 1.0), &sc).unwrap();
        let b = check_bs_inequalities(&gaussian(fine, c, s, 1.0), &sf).unwrap();
        assert!(a.r2 <= 1.05 && b.r2 <= 1.05);
        assert!((a.r1 / b.r1 - 1.0).abs() < 0.1, "{} {}", a.r1, b.r1);
        assert!((a.r3 / b.r3 - 1.0).abs() < 0.1, "{} {}", a.r3, b.r3);
    }
}
