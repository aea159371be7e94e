use std::sync::Arc;

use dualgap::energy::{compound_df, compound_dg, dual_energy, primal_energy};
use dualgap::uncertainty::{eind_bounds, eind_exact, report};
use dualgap::verification::{error_equality, LinearSolution};
use dualgap::{
    gap_breakdown, Degree, FeField, Mesh1D, ProblemData, QuadratureRule, ScalarFn, UncertaintySpec,
};
use proptest::prelude::*;

fn mesh(n: usize) -> Arc<Mesh1D> {
    Mesh1D::uniform(0.0, 1.0, n).unwrap().into_shared()
}

fn field(m: Arc<Mesh1D>, deg: Degree, mut c: Vec<f64>, zero: bool) -> FeField {
    c.truncate(deg.n_dofs(m.n_elements()));
    if zero {
        let n = c.len();
        c[0] = 0.0;
        c[n - 1] = 0.0;
    }
    FeField::new(m, deg, c, zero).unwrap()
}

fn data(p: f64, g: (f64, f64), f: (f64, f64)) -> ProblemData {
    ProblemData::new(
        p,
        ScalarFn::new(move |x| g.0 + g.1 * (3.0 * x).sin()),
        ScalarFn::new(move |x| f.0 + f.1 * (5.0 * x).cos()),
    )
    .unwrap()
}

fn degree(k: u8) -> Degree {
    if k == 1 {
        Degree::P1
    } else {
        Degree::P2
    }
}

prop_compose! {
    fn triple()(
        p in 1.1f64..=2.0,
        g0 in 0.5f64..3.0,
        g1 in -0.4f64..0.4,
        f0 in -2.0f64..2.0,
        f1 in -2.0f64..2.0,
        n in 1usize..7,
        k in 1u8..=2,
        cv in prop::collection::vec(-2.0f64..2.0, 13),
        cy in prop::collection::vec(-2.0f64..2.0, 13),
    ) -> (ProblemData, FeField, FeField) {
        let m = mesh(n);
        let deg = degree(k);
        (data(p, (g0, g1), (f0, f1)), field(m.clone(), deg, cv, true), field(m, deg, cy, false))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn gap_identity((d, v, y) in triple()) {
        let g = gap_breakdown(&v, &y, &d).unwrap();
        let tol = 1e-10 * (1.0 + g.j.abs() + g.i_star.abs());
        prop_assert!((g.energy_gap() - g.e).abs() <= tol, "{g:?}");
    }

    #[test]
    fn fenchel_young((d, v, y) in triple()) {
        prop_assert!(compound_df(&v, &y, &d).unwrap() >= -1e-12);
        prop_assert!(compound_dg(&v, &y, &d).unwrap() >= -1e-12);
        prop_assert!(dual_energy(&y, &d).unwrap() <= primal_energy(&v, &d).unwrap() + 1e-12);
    }

    #[test]
    fn sandwich_and_monotone_in_epsilon((d, v, y) in triple(), t in 0.05f64..0.95) {
        let min_g = d.min_gamma0(v.mesh());
        let eps_small = 0.5 * t * min_g;
        let eps_big = t * min_g;
        let mut prev = (0.0, 0.0, 0.0);
        for eps in [eps_small, eps_big] {
            let spec = UncertaintySpec::new(eps).unwrap();
            let (lo, hi) = eind_bounds(&v, &y, &d, &spec).unwrap();
            let ex = eind_exact(&v, &y, &d, &spec).unwrap();
            prop_assert!(lo <= ex + 1e-12 && ex <= hi + 1e-12, "{lo} {ex} {hi}");
            prop_assert!(lo >= prev.0 - 1e-14 && ex >= prev.1 - 1e-14 && hi >= prev.2 - 1e-14);
            prev = (lo, ex, hi);
        }
    }
}

#[test]
fn bound_width_is_third_order() {
    let m = mesh(6);
    let d = ProblemData::new(1.5, 1.0, ScalarFn::new(|x| 1.0 + x * x)).unwrap();
    let v = FeField::interpolate(
        |x| (std::f64::consts::PI * x).sin(),
        m.clone(),
        Degree::P2,
        true,
    )
    .unwrap();
    let y = FeField::interpolate(|x| 0.3 - x, m, Degree::P2, false).unwrap();
    let width = |eps: f64| {
        let (lo, hi) = eind_bounds(&v, &y, &d, &UncertaintySpec::new(eps).unwrap()).unwrap();
        hi - lo
    };
    let mut prev = width(0.1);
    for eps in [0.05, 0.025, 0.0125] {
        let w = width(eps);
        let ratio = prev / w;
        assert!((6.5..=9.5).contains(&ratio), "eps {eps}: ratio {ratio}");
        prev = w;
    }
}

#[test]
fn report_orders_its_bounds() {
    let m = mesh(4);
    let d = data(1.3, (1.0, 0.2), (1.0, 0.5));
    let v = FeField::interpolate(|x| x * (1.0 - x), m.clone(), Degree::P1, true).unwrap();
    let y = FeField::interpolate(|x| 0.5 - x, m, Degree::P1, false).unwrap();
    let r = report(&v, &y, &d, &UncertaintySpec::new(0.3).unwrap()).unwrap();
    assert!(r.eworst_lower <= r.eworst_upper);
    assert!(r.ebest_exact <= r.e_circ);
    assert!(r.ecom_exact <= r.eind_exact + 1e-15);
    assert!((r.eworst_lower - r.e_circ - r.eind_lower).abs() < 1e-14);
}

/// The gap identity is pointwise, so it survives any quadrature; the linear
/// error equality relies on integration by parts and converges with the
/// number of points per element.
#[test]
fn quadrature_points_affect_only_integrated_identities() {
    let m = mesh(2);
    let base = ProblemData::new(2.0, 1.0, ScalarFn::new(|x| (4.0 * x).exp())).unwrap();
    let exact =
        LinearSolution::constant_coefficients(1.0, 1.0, base.load().clone(), 0.0, 1.0, 64).unwrap();
    let v = FeField::interpolate(|x| x * (1.0 - x), m.clone(), Degree::P1, true).unwrap();
    let y = FeField::interpolate(|x| 0.5 - x, m, Degree::P1, false).unwrap();

    let mut residuals = Vec::new();
    for n in [1, 2, 3, 8] {
        let d = base
            .clone()
            .with_quadrature(QuadratureRule::gauss_legendre(n).unwrap());
        let g = gap_breakdown(&v, &y, &d).unwrap();
        assert!(
            (g.energy_gap() - g.e).abs() <= 1e-12 * (1.0 + g.j.abs()),
            "n = {n}"
        );
        residuals.push(error_equality(&v, &y, &d, &exact).unwrap().relative());
    }
    assert!(residuals[0] > 1e-4, "{residuals:?}");
    assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
    assert!(residuals[3] < 1e-9, "{residuals:?}");
}
