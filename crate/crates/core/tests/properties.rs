use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slicegam::data::{format_number, DataTable};
use slicegam::inference::{joint_band, simbas, FunctionDraws};
use slicegam::model::LinkFamily;
use slicegam::splinebasis::{eval_bspline_basis, eval_ispline_basis, penalty_matrix, KnotGrid};
use slicegam::splinebasis::PenaltyDecomposition;
use slicegam::truncated::{sample_trunc_mvn, LinearConstraintSet};

fn knot_grid() -> impl Strategy<Value = KnotGrid> {
    (-5.0..5.0f64, 0.5..20.0f64, prop::collection::vec(0.02..0.98f64, 1..9)).prop_map(|(lo, width, mut fr)| {
        fr.sort_by(f64::total_cmp);
        fr.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        KnotGrid::new(lo, lo + width, fr.iter().map(|f| lo + f * width).collect()).unwrap()
    })
}

fn family() -> impl Strategy<Value = LinkFamily> {
    prop_oneof![
        Just(LinkFamily::Gaussian),
        Just(LinkFamily::Poisson),
        Just(LinkFamily::Logistic),
        Just(LinkFamily::ExponentialPH)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bspline_rows_sum_to_one(g in knot_grid(), fr in prop::collection::vec(0.0..=1.0f64, 1..30)) {
        let x: Vec<f64> = fr.iter().map(|f| g.lower() + f * (g.upper() - g.lower())).collect();
        let b = eval_bspline_basis(&g, &x).unwrap();
        for i in 0..x.len() {
            prop_assert!((b.values.row(i).sum() - 1.0).abs() < 1e-12);
            prop_assert!(b.values.row(i).iter().all(|v| *v >= -1e-15));
        }
    }

    #[test]
    fn nonnegative_ispline_combinations_are_nondecreasing(
        g in knot_grid(),
        coefs in prop::collection::vec(0.0..5.0f64, 10),
        n in 2usize..300,
    ) {
        let x = g.linspace(n);
        let b = eval_ispline_basis(&g, &x).unwrap();
        prop_assert!(b.values.iter().all(|v| (0.0..=1.0).contains(v)));
        let f: Vec<f64> = (0..n)
            .map(|i| (0..b.ncols()).fold(0.0, |acc, j| acc + coefs[j] * b.values[(i, j)]))
            .collect();
        prop_assert!(f.windows(2).all(|w| w[1] >= w[0]));
        // Centering shifts each column by a constant and keeps the order.
        let (c, _) = b.centered();
        let fc: Vec<f64> = (0..n)
            .map(|i| (0..c.ncols()).fold(0.0, |acc, j| acc + coefs[j] * c.values[(i, j)]))
            .collect();
        let shift = f[0] - fc[0];
        prop_assert!(f.iter().zip(&fc).all(|(a, b)| (a - b - shift).abs() < 1e-9));
    }

    #[test]
    fn penalty_eigendecomposition_reconstructs(g in knot_grid()) {
        let lambda = penalty_matrix(&g);
        let dec = PenaltyDecomposition::new(&lambda).unwrap();
        let scale = lambda.amax();
        prop_assert!((dec.reconstruct() - &lambda).amax() <= 1e-9 * scale);
        prop_assert!(dec.eigenvalues.iter().skip(2).all(|d| *d > 0.0));
    }

    #[test]
    fn slice_interval_contains_the_current_predictor(fam in family(), v in -30.0..30.0f64, e in 0.0..20.0f64) {
        let s = fam.xi(v) + e;
        let (lo, hi) = fam.slice_bound(s).unwrap();
        prop_assert!(lo <= v + 1e-9 * v.abs().max(1.0) && v <= hi + 1e-9 * v.abs().max(1.0), "{lo} {v} {hi}");
    }

    #[test]
    fn truncated_normal_draws_are_feasible(seed in any::<u64>(), k in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let d = 4;
        let x0: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut rows = Vec::new();
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for _ in 0..k {
            let r: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: f64 = r.iter().zip(&x0).map(|(a, b)| a * b).sum();
            lo.push(v - rng.random_range(0.0..1.0));
            hi.push(if rng.random_bool(0.5) { f64::INFINITY } else { v + rng.random_range(0.0..1.0) });
            rows.push(r);
        }
        let cons = LinearConstraintSet::new(d, rows, lo, hi).unwrap();
        let mean: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let l = DMatrix::from_fn(d, d, |i, j| if i >= j { rng.random_range(-1.0..1.0) } else { 0.0 });
        let p = &l * l.transpose() + DMatrix::identity(d, d) * 0.1;
        let mut u = x0;
        for _ in 0..10 {
            u = sample_trunc_mvn(&mean, &p, &cons, &u, 1, &mut rng).unwrap();
            prop_assert!(cons.is_satisfied(&u));
        }
    }

    #[test]
    fn bands_nest_and_simbas_is_a_count(
        values in prop::collection::vec(-5.0..5.0f64, 12..120),
        u1 in 0.01..0.5f64,
        du in 0.0..0.4f64,
    ) {
        let g = 3;
        let r = values.len() / g;
        let m = DMatrix::from_fn(r, g, |i, j| values[i * g + j] + j as f64);
        let fd = FunctionDraws::new("f", vec![0.0, 1.0, 2.0], m).unwrap();
        let wide = joint_band(&fd, u1).unwrap();
        let narrow = joint_band(&fd, u1 + du).unwrap();
        for j in 0..g {
            prop_assert!(wide.lower[j] <= narrow.lower[j] && narrow.upper[j] <= wide.upper[j]);
        }
        for p in simbas(&fd).unwrap() {
            let k = p * r as f64;
            prop_assert!((k - k.round()).abs() < 1e-9 && (0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn csv_numbers_round_trip(values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..50)) {
        for v in &values {
            prop_assert_eq!(format_number(*v).parse::<f64>().unwrap(), *v);
        }
        let table = DataTable::new().with_column("x", values.clone()).unwrap();
        let back = DataTable::from_csv_reader(table.to_csv_string().as_bytes()).unwrap();
        prop_assert_eq!(back.values("x").unwrap(), &values[..]);
    }
}
