use super::*;
use crate::quadrature::{integrate_to_infinity, integrate_with_breaks};
use crate::series_engine::{abel_sum_1d, abel_sum_2d, Envelope};
use proptest::prelude::*;
use std::sync::OnceLock;

fn laws(family: ProcessFamily) -> ExtremeLaws {
    ExtremeLaws::new(family).unwrap()
}

fn bridge(nu: f64) -> ExtremeLaws {
    laws(ProcessFamily::bessel_bridge(nu).unwrap())
}

fn excursion() -> &'static ExtremeLaws {
    static L: OnceLock<ExtremeLaws> = OnceLock::new();
    L.get_or_init(|| bridge(0.5))
}

fn classical_meander() -> &'static ExtremeLaws {
    static L: OnceLock<ExtremeLaws> = OnceLock::new();
    L.get_or_init(|| laws(ProcessFamily::meander(2.0, 0.5).unwrap()))
}

/// `int_0^inf joint(z, u) dz`.
fn rho_from_joint(l: &ExtremeLaws, u: f64) -> f64 {
    let mut f = |z: f64| if z <= 0.0 { 0.0 } else { l.joint_density(z, u).unwrap() };
    let head = integrate_with_breaks(&mut f, &[0.0, 0.3, 0.6, 1.0, 1.5, 2.5, 4.0], 1e-14, 1e-11, 2000);
    head.value + integrate_to_infinity(&mut f, 4.0, 1e-14, 1e-11, 1000).value
}

#[test]
fn skew_half_joint_density_closed_form() {
    let l = laws(ProcessFamily::skew_bridge(0.5).unwrap());
    let want = 16.0 / (2.0 * PI).sqrt() * (-2.0f64).exp();
    let got = l.joint_density(1.0, 0.5).unwrap();
    assert!((got - want).abs() < 1e-13 * want, "{got} vs {want}");
}

#[test]
fn skew_half_marginals_are_uniform_and_rayleigh() {
    let l = laws(ProcessFamily::skew_bridge(0.5).unwrap());
    for i in 1..=20 {
        let u = i as f64 / 21.0;
        assert!((l.argmax_density(u).unwrap().value - 1.0).abs() < 1e-12);
        let z = 0.1 * i as f64;
        let want = 4.0 * z * (-2.0 * z * z).exp();
        let got = l.max_density(z).unwrap().value;
        assert!((got - want).abs() < 1e-12 * want, "z={z}: {got} vs {want}");
    }
}

#[test]
fn reflected_skew_max_matches_theta_form() {
    // d/dz of (sqrt(2 pi)/z) sum_k exp(-(2k-1)^2 pi^2 / (8 z^2))
    let l = laws(ProcessFamily::skew_bridge(1.0).unwrap());
    for z in [0.3, 0.5, 0.8, 1.0, 1.4, 2.0] {
        let mut want = 0.0;
        for k in 1..50 {
            let c = ((2 * k - 1) as f64 * PI).powi(2) / 8.0;
            want += (2.0 * PI).sqrt() * (-c / (z * z)).exp() * (-1.0 / (z * z) + 2.0 * c / z.powi(4));
        }
        let got = l.max_density(z).unwrap().value;
        assert!((got - want).abs() < 1e-12 * want.max(1e-3), "z={z}: {got} vs {want}");
    }
}

#[test]
fn skew_argmax_is_symmetric_and_normalized() {
    for beta in [0.3, 0.7, 0.97] {
        let l = laws(ProcessFamily::skew_bridge(beta).unwrap());
        let a = l.argmax_density(0.2).unwrap().value;
        let b = l.argmax_density(0.8).unwrap().value;
        assert!((a - b).abs() < 1e-10 * a);
        let n = l.argmax_normalization(16).unwrap();
        assert!((n.total - 1.0).abs() < 1e-8, "beta={beta}: {n:?}");
    }
}

#[test]
fn abel_max_density_matches_gikhman_kiefer() {
    for nu in [-0.5, 1.0] {
        let l = bridge(nu);
        let t = l.table().unwrap();
        for z in [0.4, 0.7, 1.0, 1.6, 3.0] {
            let a = l.max_density(z).unwrap();
            let g = gikhman_max_density(t.order(), z, t).unwrap();
            assert!(a.converged);
            assert!(((a.value - g) / g).abs() < 1e-6, "nu={nu} z={z}: {} vs {g}", a.value);
        }
    }
}

#[test]
fn conjecture_residuals_vanish() {
    for (nu, tol) in [(-0.6, 1e-8), (0.5, 1e-6)] {
        let l = bridge(nu);
        for n in 1..=3 {
            let r = l.conjecture_residual(n).unwrap();
            assert!(r.converged && r.value.abs() < tol, "nu={nu} n={n}: {r:?}");
        }
    }
}

#[test]
fn corrupted_zero_table_breaks_the_conjecture() {
    let order = BesselOrder::new(-0.6).unwrap();
    let good = ZeroTable::new(order, DEFAULT_CAPACITY).unwrap();
    let mut zeros = good.zeros().to_vec();
    zeros[4] *= 1.0 + 1e-6;
    let bad = ZeroTable::from_parts(order, zeros, good.coeffs().to_vec());
    let l = ExtremeLaws::with_config(ProcessFamily::BesselBridge { order }, LawConfig::default(), Some(&bad)).unwrap();
    assert!(l.conjecture_residual(1).unwrap().value.abs() > 1e-8);
}

#[test]
fn excursion_argmax_matches_integer_series() {
    let l = excursion();
    for u in [0.2f64, 0.5] {
        let v = 1.0 - u;
        let env = Envelope { a: 3.0 / u.min(v).powf(2.5), p: 2.0 };
        let want = abel_sum_2d(
            |m, n| {
                let (m, n) = (m as f64, n as f64);
                let s = if (m + n) as u64 % 2 == 0 { 1.0 } else { -1.0 };
                3.0 * s * m * m * n * n / (m * m * u + n * n * v).powf(2.5)
            },
            env,
            &AbelSchedule::double_default(),
        )
        .unwrap();
        let got = l.argmax_density(u).unwrap();
        assert!((got.value - want.value).abs() < 1e-6, "u={u}: {} vs {}", got.value, want.value);
    }
}

#[test]
fn argmax_series_is_marginal_of_joint_density() {
    let l = excursion();
    for u in [0.3, 0.5] {
        let a = l.argmax_density(u).unwrap().value;
        let b = rho_from_joint(l, u);
        assert!((a - b).abs() < 1e-7, "u={u}: {a} vs {b}");
    }
    let m = classical_meander();
    let a = m.argmax_density(0.4).unwrap().value;
    let b = rho_from_joint(m, 0.4);
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
}

#[test]
fn max_series_is_marginal_of_joint_density() {
    let one = |_: f64, _: f64| 1.0;
    for l in [bridge(0.0), laws(ProcessFamily::meander(1.5, 0.5).unwrap())] {
        for z in [0.7, 1.2] {
            let a = l.max_density(z).unwrap().value;
            let b = l.u_integral(z, 0.0, 1.0, &one, 1e-12).unwrap().value;
            assert!((a - b).abs() < 1e-7 * a.max(1.0), "{:?} z={z}: {a} vs {b}", l.family());
        }
    }
}

#[test]
fn classical_meander_max_matches_integer_series() {
    // corrected reading: n^2 in the single sum
    let l = classical_meander();
    let sched = AbelSchedule::single_default();
    let sign = |k: u64| if k % 2 == 0 { 1.0 } else { -1.0 };
    let rows = 40u64;
    let r1: Vec<f64> = (1..=rows)
        .map(|n| {
            let n2 = (n * n) as f64;
            abel_sum_1d(|m| if m == n { 0.0 } else { (sign(m + n) - sign(m)) * (m * m) as f64 / ((m * m) as f64 - n2) }, 1, &sched)
                .unwrap()
                .value
        })
        .collect();
    // the column sums converge like sum 1/n^2, which polynomial extrapolation
    // cannot resolve; telescoping gives sum_{odd n != m} 1/(m^2 - n^2) = -1/(4 m^2)
    let r2: Vec<f64> = (1..=rows).map(|m| if m % 2 == 1 { -0.5 / (m * m) as f64 } else { 0.0 }).collect();
    let s2pi = (2.0 * PI).sqrt();
    for z in [0.5, 0.9, 1.3, 2.0] {
        let e = |n: u64| (-((n * n) as f64) * PI * PI / (2.0 * z * z)).exp();
        let mut first = 0.0;
        let mut second = 0.0;
        for n in 1..=rows {
            let n2 = (n * n) as f64;
            first += (1.0 - sign(n)) * n2 * e(n);
            second += e(n) * r1[n as usize - 1] - n2 * e(n) * r2[n as usize - 1];
        }
        let want = PI * PI * s2pi / z.powi(4) * first + 2.0 * s2pi / (z * z) * second;
        let got = l.max_density(z).unwrap().value;
        assert!((got - want).abs() < 1e-8 * want + 1e-10, "z={z}: {got} vs {want}");
    }
}

#[test]
fn classical_meander_argmax_matches_integer_series() {
    // the odd index belongs to the terminal time, which pairs with 1-u
    let l = classical_meander();
    for u in [0.3f64, 0.6] {
        let v = 1.0 - u;
        let env = Envelope { a: 2.0 / u.min(v).powf(1.5), p: 2.0 };
        let want = abel_sum_2d(
            |m, n| {
                let s = if m % 2 == 1 { 1.0 } else { -1.0 };
                let (m, o) = (m as f64, (2 * n - 1) as f64);
                2.0 * s * m * m / (m * m * u + o * o * v).powf(1.5)
            },
            env,
            &AbelSchedule::double_default(),
        )
        .unwrap();
        let got = l.argmax_density(u).unwrap();
        assert!((got.value - want.value).abs() < 1e-6, "u={u}: {} vs {}", got.value, want.value);
    }
}

#[test]
fn bessel_process_max_matches_hitting_form() {
    let l = laws(ProcessFamily::meander(2.0, 0.0).unwrap());
    let t = l.table().unwrap();
    for z in [0.5, 0.8, 1.2, 2.0, 3.0] {
        let a = l.max_density(z).unwrap().value;
        let b = bessel_process_max_density(t.order(), z, t).unwrap();
        assert!((a - b).abs() < 1e-6 * b.max(1e-3), "z={z}: {a} vs {b}");
    }
}

#[test]
fn skew_argmax_approaches_reflected_bridge() {
    let reflected = bridge(-0.5);
    for u in [0.1, 0.5, 0.9] {
        let target = reflected.argmax_density(u).unwrap().value;
        let gaps: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|eps| {
                let s = laws(ProcessFamily::skew_bridge(1.0 - eps).unwrap());
                (s.argmax_density(u).unwrap().value - target).abs()
            })
            .collect();
        assert!(gaps[2] < 2e-3 && gaps[1] < gaps[0] && gaps[2] < gaps[1], "u={u}: {gaps:?}");
    }
}

#[test]
fn max_densities_integrate_to_one() {
    for l in [bridge(0.5), laws(ProcessFamily::skew_bridge(0.7).unwrap()), classical_meander_owned()] {
        let n = l.max_normalization().unwrap();
        assert!((n.value - 1.0).abs() < 1e-8, "{:?}: {n:?}", l.family());
    }
}

fn classical_meander_owned() -> ExtremeLaws {
    laws(ProcessFamily::meander(2.0, 0.5).unwrap())
}

#[test]
fn joint_density_has_unit_mass() {
    let n = classical_meander().expectation_of_bounded(|_, _| 1.0, 1.0).unwrap();
    assert!((n.value - 1.0).abs() < 1e-7, "{n:?}");
    let n = bridge(-0.5).expectation_of_bounded(|_, _| 1.0, 1.0).unwrap();
    assert!((n.value - 1.0).abs() < 1e-9, "{n:?}");
}

#[test]
fn meander_head_mass_matches_small_time_law() {
    // phi_2(t) ~ sqrt(2/(pi t)) as t -> 0
    let h = classical_meander().terminal_head;
    let want = 2.0 * (2.0 * TAU0 / PI).sqrt();
    assert!((h - want).abs() < 1e-9 * want, "{h} vs {want}");
}

#[test]
fn argmax_inside_margin_is_rejected() {
    assert!(matches!(excursion().argmax_density(5e-4), Err(Error::Range(_))));
    assert!(matches!(excursion().argmax_density(1.0), Err(Error::Domain(_))));
}

#[test]
fn tables_keep_grid_order() {
    let l = laws(ProcessFamily::skew_bridge(0.5).unwrap());
    let g = grid(0.1, 3.0, 17, true).unwrap();
    let t = l.max_table(&g).unwrap();
    for (i, z) in g.iter().enumerate() {
        assert_eq!(t.grid[i][0], *z);
        assert_eq!(t.values[i], l.max_density(*z).unwrap().value);
    }
    assert!(t.all_converged());
    assert_eq!(default_max_grid().len(), 512);
    assert!(grid(0.0, 1.0, 4, true).is_err());
}

#[test]
fn negative_values_are_clipped_only_within_error() {
    let mut e = SeriesEvaluation::exact(-1e-14, 1);
    e.error_estimate = 1e-13;
    let fam = ProcessFamily::skew_bridge(0.5).unwrap();
    let t = DensityTable::from_evals(fam, Variable::Max, Method::ClosedForm, vec![vec![1.0]], vec![Ok(e.clone())]).unwrap();
    assert_eq!(t.values[0], 0.0);
    assert_eq!(t.clipped, vec![0]);
    e.value = -1.0;
    assert!(DensityTable::from_evals(fam, Variable::Max, Method::ClosedForm, vec![vec![1.0]], vec![Ok(e)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bridge_joint_density_is_time_symmetric(z in 0.3f64..3.0, u in 0.01f64..0.99) {
        let l = excursion();
        let a = l.joint_density(z, u).unwrap();
        let b = l.joint_density(z, 1.0 - u).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs() + 1e-14, "{a} vs {b}");
    }

    #[test]
    fn skew_max_density_is_nonnegative(beta in 0.01f64..1.0, z in 0.05f64..4.0) {
        let l = laws(ProcessFamily::skew_bridge(beta).unwrap());
        prop_assert!(l.max_density(z).unwrap().value >= -1e-15);
    }
}
