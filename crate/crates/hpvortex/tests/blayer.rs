use hpvortex::baseflow::{make_profile, ProfileFamily};
use hpvortex::blayer::slip::{slip_trace, slip_uniformity};
use hpvortex::blayer::*;
use hpvortex::spectra::sweep::half_plane_problem;
use hpvortex::{Error, C64};
use proptest::prelude::*;

fn gaussian(l: f64, n: usize) -> BoundaryData<f64> {
    BoundaryData::from_fn(l, n, |x| (-x * x).exp()).unwrap()
}

/// Physicists' Hermite polynomial by the three-term recurrence.
fn hermite(k: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * x);
    if k == 0 {
        return a;
    }
    for j in 1..k {
        let c = 2.0 * x * b - 2.0 * j as f64 * a;
        a = b;
        b = c;
    }
    b
}

fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Z-norm of `e^{-x^2}` from `d^k e^{-x^2} = (-1)^k H_k e^{-x^2}`.
fn gaussian_z_oracle() -> f64 {
    let d = |k: usize, x: f64| hermite(k, x) * (-x * x).exp();
    let mut sob = 0.0;
    for k in 0..=5 {
        sob += simpson(-12.0, 12.0, 24000, |x| d(k, x).powi(2));
    }
    let mut out = sob.sqrt();
    for l in 0..2 {
        out += simpson(-12.0, 12.0, 24000, |x| (x * d(l + 1, x)).powi(2)).sqrt();
    }
    out
}

#[test]
fn z_norm_of_gaussian_matches_quadrature() {
    let oracle = gaussian_z_oracle();
    let z = z_norm(&gaussian(10.0, 2001));
    assert!((z - oracle).abs() / oracle < 1e-3, "{z} vs {oracle}");
}

#[test]
fn z_norm_of_zero_vanishes() {
    let h = BoundaryData::from_fn(5.0, 101, |_| 0.0).unwrap();
    assert_eq!(z_norm(&h), 0.0);
}

#[test]
fn boundary_data_rejects_short_or_even_samples() {
    assert!(matches!(BoundaryData::from_fn(1.0, 5, |x| x), Err(Error::InvalidArgument(_))));
    assert!(matches!(BoundaryData::<f64>::from_samples(vec![0.0; 10], 0.1), Err(Error::InvalidArgument(_))));
}

#[test]
fn differences_are_exact_for_low_degree_polynomials_in_the_interior() {
    let h = BoundaryData::from_fn(1.0, 41, |x: f64| x.powi(5)).unwrap();
    let i = 20 + 3;
    let x: f64 = h.x(i);
    let exact = [x.powi(5), 5.0 * x.powi(4), 20.0 * x.powi(3), 60.0 * x * x, 120.0 * x, 120.0];
    for k in 1..=5 {
        let tol = 1e-6 * exact[k].abs().max(1.0) + 60.0 * h.dx * h.dx;
        assert!((h.derivs[k][i] - exact[k]).abs() < tol, "order {k}: {} vs {}", h.derivs[k][i], exact[k]);
    }
}

#[test]
fn closed_form_primitive_matches_quadrature() {
    for s in [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
        let q = simpson(0.0, s, 20000, |e| layer_profile(e));
        assert!((q - layer_primitive(s)).abs() < 1e-10, "{s}: {q}");
    }
    let tail = simpson(0.0, 60.0, 200000, |e| layer_profile(e));
    assert!(tail.abs() < 1e-10);
}

#[test]
fn corrector_has_exact_wall_data_and_vanishes_for_zero_data() {
    let h = gaussian(6.0, 121);
    let alpha = 400.0;
    let c = corrector_j(&h, alpha, LayerGrid::resolving(alpha, 8, 30.0)).unwrap();
    for i in 0..c.nx {
        assert_eq!(c.j1[i], h.values()[i]);
        assert_eq!(c.j2[i], 0.0);
    }
    let far = (c.layer.ny - 1) * c.nx;
    assert!(c.j1[far..].iter().chain(&c.j2[far..]).all(|v| v.abs() < 1e-10));
    let z = BoundaryData::from_fn(6.0, 121, |_| 0.0).unwrap();
    let c0 = corrector_j(&z, alpha, LayerGrid::resolving(alpha, 8, 30.0)).unwrap();
    assert!(c0.j1.iter().chain(&c0.j2).all(|&v| v == 0.0));
}

#[test]
fn corrector_refuses_unresolved_layer_and_small_alpha() {
    let h = gaussian(6.0, 121);
    let coarse = LayerGrid { dy: 0.05, ny: 100 };
    assert!(matches!(corrector_j(&h, 1e4, coarse), Err(Error::LayerUnderResolved { .. })));
    assert!(matches!(corrector_j(&h, 0.5, coarse), Err(Error::InvalidArgument(_))));
}

#[test]
fn corrector_scalings_follow_layer_width() {
    let h = gaussian(6.0, 241);
    let r = corrector_scaling(&h, &[1e2, 1e3, 1e4, 1e5], 16, 40.0).unwrap();
    let expected = [-0.25, 0.25, 0.75, -0.25];
    for (s, e) in r.slopes.iter().zip(expected) {
        assert!((s - e).abs() < 0.05, "{:?}", r.slopes);
    }
    assert!(r.wall_exact());
    assert!(r.divergence_ok(10.0), "{:?}", r.rows);
}

#[test]
fn corrector_scaling_needs_two_decades() {
    let h = gaussian(6.0, 121);
    assert!(corrector_scaling(&h, &[1e2, 2e2, 4e2, 8e2], 8, 30.0).is_err());
    assert!(corrector_scaling(&h, &[1e2, 1e4], 8, 30.0).is_err());
}

#[test]
fn slip_trace_of_zero_forcing_is_zero() {
    let p = make_profile(ProfileFamily::GaussianBump { a: 1.0 }).unwrap();
    let hp = half_plane_problem(&p, 2.0, 4.0, 8.0, 33, 2.5).unwrap();
    let g = vec![0.0; hp.restriction.dof()];
    let s = slip_trace(&hp, &g, C64::new(0.3, 0.2), 100.0).unwrap();
    assert!(s.data.values().iter().all(|v| v.norm() == 0.0));
    assert_eq!(s.ratio(), 0.0);
}

#[test]
fn slip_trace_is_bounded_and_decays_at_box_ends() {
    let p = make_profile(ProfileFamily::GaussianBump { a: 1.0 }).unwrap();
    let hp = half_plane_problem(&p, 2.0, 4.0, 8.0, 33, 2.5).unwrap();
    let g: Vec<f64> = (0..hp.restriction.dof())
        .map(|d| {
            let (x, y) = hp.restriction.grid().xy(hp.restriction.node(d));
            (-(x * x + (y - 4.0).powi(2))).exp()
        })
        .collect();
    let s = slip_trace(&hp, &g, C64::new(0.3, 0.2), 100.0).unwrap();
    assert!(s.data.end_magnitude() < 1e-8);
    assert!(s.ratio().is_finite() && s.ratio() > 0.0);
    let table = slip_uniformity(&hp, &g, C64::new(0.3, 0.2), 0.05, 4, &[100.0, 200.0]).unwrap();
    assert_eq!(table.len(), 4);
    assert!(table.iter().all(|row| row.len() == 2 && row.iter().all(|v| v.is_finite())));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn z_norm_is_homogeneous(a in -5.0f64..5.0, w in 0.5f64..2.0) {
        let h = BoundaryData::from_fn(8.0, 201, |x| (-(x / w).powi(2)).exp()).unwrap();
        let z = z_norm(&h);
        let za = z_norm(&h.scale(a));
        prop_assert!((za - a.abs() * z).abs() <= 1e-12 * z.max(1.0) * a.abs().max(1.0));
    }

    #[test]
    fn corrector_is_linear_in_data(a in -3.0f64..3.0) {
        let h = gaussian(5.0, 81);
        let layer = LayerGrid::resolving(100.0, 8, 20.0);
        let c1 = corrector_j(&h, 100.0, layer).unwrap();
        let c2 = corrector_j(&h.scale(a), 100.0, layer).unwrap();
        for (p, q) in c1.j1.iter().zip(&c2.j1).chain(c1.j2.iter().zip(&c2.j2)) {
            prop_assert!((a * p - q).abs() <= 1e-13);
        }
    }
}
