mod common;

use common::{adaptive_simpson, de_boor};
use nalgebra::DVector;
use slicegam::splinebasis::{
    eval_bspline_basis, eval_ispline_basis, penalty_matrix, place_knots, place_knots_with, spectral_reparam, KnotGrid,
    KnotPlacement,
};
use slicegam::Error;

fn grid() -> KnotGrid {
    KnotGrid::new(-1.0, 4.0, vec![0.0, 0.7, 2.2, 3.1]).unwrap()
}

fn points(g: &KnotGrid, n: usize) -> Vec<f64> {
    g.linspace(n)
}

#[test]
fn bspline_matches_cox_de_boor() {
    let g = grid();
    let knots = g.full_sequence();
    let x = points(&g, 97);
    let b = eval_bspline_basis(&g, &x).unwrap();
    assert_eq!(b.ncols(), g.n_interior() + 4);
    for (i, &xi) in x.iter().enumerate() {
        let last = xi == g.upper();
        for j in 0..b.ncols() {
            let expected = de_boor(&knots, j, 4, xi, last);
            assert!((b.values[(i, j)] - expected).abs() < 1e-12, "x={xi} j={j}");
        }
    }
}

#[test]
fn ispline_is_integral_of_linear_mspline() {
    let g = grid();
    // Order-3 clamped sequence; column j-1 integrates M_j of order 2.
    let mut t = vec![g.lower(); 3];
    t.extend_from_slice(g.interior());
    t.extend([g.upper(); 3]);
    let x = points(&g, 41);
    let basis = eval_ispline_basis(&g, &x).unwrap();
    assert_eq!(basis.ncols(), g.n_interior() + 2);
    for col in 0..basis.ncols() {
        let j = col + 1;
        let width = t[j + 2] - t[j];
        let m = |s: f64| 2.0 * de_boor(&t, j, 2, s, false) / width;
        for (i, &xi) in x.iter().enumerate() {
            let expected = if xi > g.lower() { adaptive_simpson(&m, g.lower(), xi, 1e-13) } else { 0.0 };
            assert!((basis.values[(i, col)] - expected).abs() < 1e-9, "col={col} x={xi}");
        }
    }
}

#[test]
fn ispline_endpoints_are_exact() {
    let g = grid();
    let b = eval_ispline_basis(&g, &[g.lower(), g.upper()]).unwrap();
    for j in 0..b.ncols() {
        assert_eq!(b.values[(0, j)], 0.0);
        assert_eq!(b.values[(1, j)], 1.0);
    }
}

#[test]
fn quantile_knots_match_order_statistics() {
    let x: Vec<f64> = (0..=100).rev().map(f64::from).collect();
    let g = place_knots(&x, 3).unwrap();
    assert_eq!(g.interior(), &[25.0, 50.0, 75.0]);
    assert_eq!((g.lower(), g.upper()), (0.0, 100.0));

    // Ten points, p = 1/5: position 1.8 interpolates between 1 and 4.
    let x = [0.0, 1.0, 4.0, 9.0, 16.0, 25.0, 36.0, 49.0, 64.0, 81.0];
    let g = place_knots(&x, 4).unwrap();
    assert!((g.interior()[0] - (1.0 + 0.8 * 3.0)).abs() < 1e-12);
}

#[test]
fn equispaced_knots_ignore_data_density() {
    let x = [0.0, 0.1, 0.2, 0.3, 0.4, 10.0];
    let g = place_knots_with(&x, 4, KnotPlacement::Equispaced).unwrap();
    assert_eq!(g.interior(), &[2.0, 4.0, 6.0, 8.0]);
}

#[test]
fn out_of_range_point_is_rejected() {
    let g = grid();
    assert!(matches!(eval_bspline_basis(&g, &[4.5]), Err(Error::OutOfDomain { .. })));
    assert!(matches!(eval_ispline_basis(&g, &[-1.5]), Err(Error::OutOfDomain { .. })));
}

#[test]
fn penalty_annihilates_linear_functions() {
    // Greville abscissae reproduce f(x) = 2 - 3x exactly.
    let g = grid();
    let t = g.full_sequence();
    let k = g.n_interior() + 4;
    let c = DVector::from_iterator(k, (0..k).map(|j| 2.0 - 3.0 * (t[j + 1] + t[j + 2] + t[j + 3]) / 3.0));
    let lambda = penalty_matrix(&g);
    assert!((c.transpose() * &lambda * &c)[(0, 0)].abs() < 1e-9);
}

#[test]
fn penalty_energy_matches_direct_integral() {
    // Least-squares spline fit of sin(x): cᵀΛc against ∫ f''² by quadrature.
    let g = grid();
    let x = points(&g, 400);
    let b = eval_bspline_basis(&g, &x).unwrap();
    let y = DVector::from_iterator(x.len(), x.iter().map(|v| v.sin()));
    let c = (b.values.transpose() * &b.values).lu().solve(&(b.values.transpose() * y)).unwrap();
    let lambda = penalty_matrix(&g);
    let energy = (c.transpose() * &lambda * &c)[(0, 0)];
    let t = g.full_sequence();
    let second = |s: f64| {
        // Numerical second derivative of the fitted spline.
        let h = 1e-4;
        let f = |z: f64| {
            let z = z.clamp(g.lower(), g.upper());
            (0..c.len()).map(|j| c[j] * de_boor(&t, j, 4, z, z == g.upper())).sum::<f64>()
        };
        (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h)
    };
    let mut direct = 0.0;
    let mut knots = vec![g.lower()];
    knots.extend_from_slice(g.interior());
    knots.push(g.upper());
    for w in knots.windows(2) {
        let (a, bnd) = (w[0] + 1e-3, w[1] - 1e-3);
        direct += adaptive_simpson(&|s| second(s).powi(2), a, bnd, 1e-6);
    }
    assert!((energy - direct).abs() / energy < 5e-3, "energy {energy} direct {direct}");
}

#[test]
fn reparameterized_design_spans_the_spline_space() {
    let g = grid();
    let x = points(&g, 50);
    let b = eval_bspline_basis(&g, &x).unwrap();
    let rep = spectral_reparam(&b, &penalty_matrix(&g)).unwrap();
    // X_B lies in span{1, x}.
    let f = &rep.fixed;
    let proj = f * (f.transpose() * f).lu().solve(&(f.transpose() * &rep.null_design)).unwrap();
    assert!((&proj - &rep.null_design).amax() < 1e-10);
    // The penalty seen by the random-effect coefficients is the identity.
    let t = rep.decomposition.random_transform();
    let s = t.transpose() * penalty_matrix(&g) * &t;
    let eye = nalgebra::DMatrix::<f64>::identity(s.nrows(), s.ncols());
    assert!((s - eye).amax() < 1e-9);
}

#[test]
fn quantile_knots_of_uniform_sample_match_sort_and_index() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(52);
    let x: Vec<f64> = (0..200).map(|_| rng.random_range(0.0..20.0)).collect();
    let g = place_knots(&x, 3).unwrap();
    let mut sorted = x.clone();
    sorted.sort_by(f64::total_cmp);
    for (k, knot) in g.interior().iter().enumerate() {
        // Position (n-1)p between order statistics.
        let pos = 199.0 * (k + 1) as f64 / 4.0;
        let (lo, frac) = (pos.floor() as usize, pos.fract());
        let expected = sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
        assert!((knot - expected).abs() < 1e-12);
        assert!((knot - 5.0 * (k + 1) as f64).abs() < 1.5);
    }
    assert_eq!((g.lower(), g.upper()), (sorted[0], sorted[199]));
}

#[test]
fn three_knot_basis_on_eleven_points() {
    let g = KnotGrid::new(0.0, 10.0, vec![2.0, 5.0, 7.5]).unwrap();
    let x = g.linspace(11);
    let b = eval_bspline_basis(&g, &x).unwrap();
    assert_eq!((b.nrows(), b.ncols()), (11, 7));
    let knots = g.full_sequence();
    for (i, &xi) in x.iter().enumerate() {
        for j in 0..7 {
            assert!((b.values[(i, j)] - de_boor(&knots, j, 4, xi, xi == 10.0)).abs() < 1e-10);
        }
    }
}

#[test]
fn least_squares_line_has_zero_curvature_energy() {
    let g = grid();
    let x = points(&g, 80);
    let b = eval_bspline_basis(&g, &x).unwrap();
    let y = DVector::from_iterator(x.len(), x.iter().map(|v| 3.0 + 2.0 * v));
    let c = (b.values.transpose() * &b.values).lu().solve(&(b.values.transpose() * y)).unwrap();
    assert!((c.transpose() * penalty_matrix(&g) * &c)[(0, 0)] < 1e-10);
}

#[test]
fn ridge_fit_on_mixed_model_design_equals_penalized_spline_fit() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(88);
    let x: Vec<f64> = (0..70).map(|_| rng.random_range(0.0..6.0)).collect();
    let y = DVector::from_iterator(70, x.iter().map(|v| v.cos() + rng.random_range(-0.3..0.3)));
    let g = place_knots(&x, 6).unwrap();
    let b = eval_bspline_basis(&g, &x).unwrap();
    let lambda = penalty_matrix(&g);
    let rep = spectral_reparam(&b, &lambda).unwrap();
    for lam in [0.01, 1.0, 100.0] {
        let bm = &b.values;
        let coef = (bm.transpose() * bm + &lambda * lam).lu().solve(&(bm.transpose() * &y)).unwrap();
        let fit_b = bm * coef;
        let q = 2 + rep.random.ncols();
        let c = nalgebra::DMatrix::from_fn(70, q, |i, j| if j < 2 { rep.fixed[(i, j)] } else { rep.random.values[(i, j - 2)] });
        let ridge = nalgebra::DMatrix::from_fn(q, q, |i, j| if i == j && i >= 2 { lam } else { 0.0 });
        let coef_c = (c.transpose() * &c + ridge).lu().solve(&(c.transpose() * &y)).unwrap();
        let fit_c = &c * coef_c;
        assert!((fit_b - fit_c).amax() < 1e-8, "λ = {lam}");
    }
}
