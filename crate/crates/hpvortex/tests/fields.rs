use hpvortex::fields::calculus::{div, grad_perp, laplacian, rot};
use hpvortex::fields::io::{read_binary, read_csv, write_binary, write_csv};
use hpvortex::fields::reflect::{mirror_defect, odd_extend, restrict_half};
use hpvortex::fields::{make_grid, DomainKind, Grid2D, ScalarField, VectorField, WeightKind};
use hpvortex::{Error, C64};
use proptest::prelude::*;

#[test]
fn half_grid_shape_and_spacing() {
    let g = make_grid(DomainKind::Half, 8.0_f64, 129).unwrap();
    assert_eq!(g.h(), 0.125);
    assert_eq!((g.nx(), g.ny()), (129, 65));
    assert_eq!(g.x(0), -8.0);
    assert_eq!(g.x(128), 8.0);
    assert_eq!(g.y(0), 0.0);
    assert_eq!(g.y(64), 8.0);
}

#[test]
fn whole_grid_shape() {
    let g = make_grid(DomainKind::Whole, 8.0_f64, 129).unwrap();
    assert_eq!((g.nx(), g.ny()), (129, 129));
    assert_eq!(g.y(64), 0.0);
    for j in 0..=64 {
        assert_eq!(g.y(64 + j), -g.y(64 - j));
    }
}

#[test]
fn grid_rejects_bad_input() {
    assert!(matches!(make_grid(DomainKind::Half, 8.0_f64, 128), Err(Error::EvenNodeCount(128))));
    assert!(matches!(make_grid(DomainKind::Half, 0.0_f64, 129), Err(Error::NonPositiveLength(_))));
    assert!(matches!(make_grid(DomainKind::Half, -1.0_f64, 129), Err(Error::NonPositiveLength(_))));
    assert!(matches!(make_grid(DomainKind::Whole, 1.0_f64, 15), Err(Error::TooFewNodes(15))));
}

#[test]
fn grid_coordinates_reproducible() {
    let a = make_grid(DomainKind::Whole, 7.3_f64, 97).unwrap();
    let b = make_grid(DomainKind::Whole, 7.3_f64, 97).unwrap();
    for k in 0..a.len() {
        let (x, y) = a.xy(k);
        let (u, v) = b.xy(k);
        assert_eq!(x.to_bits(), u.to_bits());
        assert_eq!(y.to_bits(), v.to_bits());
    }
}

#[test]
fn norm_trivial_cases() {
    let g = make_grid(DomainKind::Half, 8.0_f64, 129).unwrap();
    let z: ScalarField<f64> = ScalarField::zeros(g);
    assert_eq!(z.norm(&WeightKind::Unweighted).unwrap(), 0.0);
    let mut one = z.clone();
    one.set(40, 20, 1.0);
    assert_eq!(one.norm(&WeightKind::Unweighted).unwrap(), g.h());
}

/// Riemann sum of `exp(|x|^2/4 - 2|x|^2)` over `[-8,8]^2` on a fine grid.
fn fine_weighted_gaussian() -> f64 {
    let n = 4001;
    let h = 16.0 / (n - 1) as f64;
    let mut s = 0.0;
    for i in 0..n {
        let x = -8.0 + i as f64 * h;
        for j in 0..n {
            let y = -8.0 + j as f64 * h;
            let r2 = x * x + y * y;
            s += (r2 / 4.0 - 2.0 * r2).exp();
        }
    }
    (s * h * h).sqrt()
}

#[test]
fn weighted_norm_matches_fine_quadrature() {
    let g = make_grid(DomainKind::Whole, 8.0_f64, 129).unwrap();
    let f = ScalarField::from_fn(g, |x, y| (-(x * x + y * y)).exp());
    let got = f.norm(&WeightKind::gaussian()).unwrap();
    let want = fine_weighted_gaussian();
    assert!((got / want - 1.0).abs() < 1e-3, "{got} vs {want}");
    let exact = (4.0 * std::f64::consts::PI / 7.0).sqrt();
    assert!((want / exact - 1.0).abs() < 1e-6);
}

#[test]
fn weight_overflow_is_reported() {
    let g = make_grid(DomainKind::Whole, 60.0_f64, 129).unwrap();
    let f = ScalarField::from_fn(g, |_, _| 1.0);
    assert!(matches!(f.norm(&WeightKind::gaussian_uncapped()), Err(Error::WeightOverflow)));
    assert!(f.norm(&WeightKind::gaussian()).unwrap().is_finite());
}

#[test]
fn rot_of_rigid_rotation_is_two() {
    let g = make_grid(DomainKind::Whole, 4.0_f64, 33).unwrap();
    let v = VectorField::from_fn(g, |x, y| (-y, x));
    let w = rot(&v).unwrap();
    for &val in w.values() {
        assert!((val - 2.0).abs() < 1e-12);
    }
}

#[test]
fn div_of_hyperbolic_flow_vanishes() {
    let g = make_grid(DomainKind::Half, 4.0_f64, 33).unwrap();
    let v = VectorField::from_fn(g, |x, y| (x, -y));
    let d = div(&v).unwrap();
    assert!(d.max_abs() < 1e-12);
}

fn laplacian_eigen_error(n: usize) -> f64 {
    let l = 4.0;
    let k = std::f64::consts::PI / l;
    let g = make_grid(DomainKind::Whole, l, n).unwrap();
    let f = ScalarField::from_fn(g, |x, y| (k * x).sin() * (k * y).sin());
    let lap = laplacian(&f);
    let mut err: f64 = 0.0;
    for j in 1..g.ny() - 1 {
        for i in 1..g.nx() - 1 {
            err = err.max((lap.at(i, j) + 2.0 * k * k * f.at(i, j)).abs());
        }
    }
    err
}

#[test]
fn laplacian_of_sine_mode_is_second_order() {
    let e1 = laplacian_eigen_error(33);
    let e2 = laplacian_eigen_error(65);
    assert!(e1 < 0.01, "{e1}");
    let order = (e1 / e2).log2();
    assert!((order - 2.0).abs() < 0.1, "order {order}");
}

#[test]
fn odd_extension_of_odd_function() {
    let h = make_grid(DomainKind::Half, 6.0_f64, 65).unwrap();
    let f = ScalarField::from_fn(h, |x, y| y * (-(x * x + y * y)).exp());
    let e = odd_extend(&f, 0.0).unwrap();
    let direct = ScalarField::from_fn(h.to_whole(), |x, y| y * (-(x * x + y * y)).exp());
    for (a, b) in e.values().iter().zip(direct.values()) {
        assert!((a - b).abs() <= 1e-15);
    }
    let z: ScalarField<f64> = ScalarField::zeros(h);
    assert_eq!(odd_extend(&z, 0.0).unwrap().max_abs(), 0.0);
}

#[test]
fn odd_extension_rejects_trace() {
    let h = make_grid(DomainKind::Half, 6.0_f64, 65).unwrap();
    let f = ScalarField::from_fn(h, |_, _| 1.0);
    assert!(matches!(odd_extend(&f, 1e-12), Err(Error::NonzeroTrace(_))));
}

fn random_interior(grid: Grid2D<f64>, vals: &[f64]) -> ScalarField<f64> {
    let mut f = ScalarField::zeros(grid);
    let mut it = vals.iter().cycle();
    for j in 1..grid.ny() - 1 {
        for i in 1..grid.nx() - 1 {
            f.set(i, j, *it.next().unwrap());
        }
    }
    f
}

#[test]
fn binary_and_csv_roundtrip_bit_exact() {
    let g = make_grid(DomainKind::Half, 3.7_f64, 17).unwrap();
    let f = ScalarField::from_fn(g, |x, y| (x * 1.3).sin() * y.exp() / 3.0);
    let mut buf = Vec::new();
    write_binary(&f, &mut buf).unwrap();
    let back: ScalarField<f64> = read_binary(buf.as_slice()).unwrap();
    assert_eq!(back.grid(), f.grid());
    for (a, b) in back.values().iter().zip(f.values()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    let mut text = Vec::new();
    write_csv(&f, &mut text).unwrap();
    let back: ScalarField<f64> = read_csv(text.as_slice()).unwrap();
    for (a, b) in back.values().iter().zip(f.values()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    let c = f.map(|v| C64::new(v, -v / 7.0));
    let mut buf = Vec::new();
    write_binary(&c, &mut buf).unwrap();
    let back: ScalarField<f64, C64> = read_binary(buf.as_slice()).unwrap();
    assert_eq!(back, c);
    let mut text = Vec::new();
    write_csv(&c, &mut text).unwrap();
    let back: ScalarField<f64, C64> = read_csv(text.as_slice()).unwrap();
    assert_eq!(back, c);
}

#[test]
fn f32_fields_roundtrip() {
    let g = make_grid(DomainKind::Whole, 2.0f32, 17).unwrap();
    let f = ScalarField::from_fn(g, |x, y| x * 0.1 + y / 3.0);
    let mut buf = Vec::new();
    write_binary(&f, &mut buf).unwrap();
    let back: ScalarField<f32> = read_binary(buf.as_slice()).unwrap();
    assert_eq!(back, f);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn restrict_inverts_odd_extend(vals in prop::collection::vec(-1e3f64..1e3, 1..64)) {
        let g = make_grid(DomainKind::Half, 5.0_f64, 33).unwrap();
        let f = random_interior(g, &vals);
        let e = odd_extend(&f, 0.0).unwrap();
        prop_assert_eq!(mirror_defect(&e, true), 0.0);
        let back = restrict_half(&e).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn weighted_norm_dominates(vals in prop::collection::vec(-10f64..10.0, 1..64)) {
        let g = make_grid(DomainKind::Half, 8.0_f64, 33).unwrap();
        let f = random_interior(g, &vals);
        let w = f.norm(&WeightKind::gaussian()).unwrap();
        let u = f.norm(&WeightKind::Unweighted).unwrap();
        prop_assert!(w >= u);
    }

    #[test]
    fn rot_grad_perp_is_minus_laplacian(
        cx in -1.5f64..1.5, cy in -1.5f64..1.5, s in 0.5f64..1.2, a in -2.0f64..2.0,
    ) {
        let g = make_grid(DomainKind::Whole, 6.0_f64, 97).unwrap();
        let psi = ScalarField::from_fn(g, |x, y| {
            a * (-((x - cx).powi(2) + (y - cy).powi(2)) / (s * s)).exp()
                + (-((x + cy).powi(2) + (y - cx).powi(2)) / (s * s * 1.5)).exp()
        });
        let r = rot(&grad_perp(&psi)).unwrap();
        let lap = laplacian(&psi);
        let scale = lap.max_abs();
        let h = g.h();
        let mut err: f64 = 0.0;
        for j in 2..g.ny() - 2 {
            for i in 2..g.nx() - 2 {
                err = err.max((r.at(i, j) + lap.at(i, j)).abs());
            }
        }
        prop_assert!(err <= 10.0 * h * h * scale, "err {} bound {}", err, 10.0 * h * h * scale);
    }
}
