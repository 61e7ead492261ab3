//! Knot placement, cubic B-splines, monotone I-splines, the curvature
//! penalty and its mixed-model reparameterization.

use slicegam::splinebasis::{eval_bspline_basis, eval_ispline_basis, penalty_matrix, place_knots, spectral_reparam};

fn main() -> slicegam::Result<()> {
    let x: Vec<f64> = (0..60).map(|i| (i as f64 / 59.0).powi(2) * 10.0).collect();
    let grid = place_knots(&x, 4)?;
    println!("boundary [{}, {}], interior knots {:?}", grid.lower(), grid.upper(), grid.interior());

    let points = grid.linspace(6);
    let b = eval_bspline_basis(&grid, &points)?;
    let i = eval_ispline_basis(&grid, &points)?;
    println!("B-spline basis: {} columns; I-spline basis: {} columns", b.ncols(), i.ncols());
    for (r, t) in points.iter().enumerate() {
        let row: Vec<String> = i.values.row(r).iter().map(|v| format!("{v:.3}")).collect();
        println!("  I(t = {t:>5.2}) = [{}]", row.join(", "));
    }

    let lambda = penalty_matrix(&grid);
    let design = eval_bspline_basis(&grid, &x)?;
    let rep = spectral_reparam(&design, &lambda)?;
    let d: Vec<String> = rep.decomposition.eigenvalues.iter().map(|v| format!("{v:.3e}")).collect();
    println!("penalty eigenvalues: [{}]", d.join(", "));
    println!("random-effect design: {} × {}", rep.random.nrows(), rep.random.ncols());

    // The B-spline fit with penalty λΛ equals the mixed-model fit with
    // ridge λ on the random block.
    let lam = 2.5;
    let bm = &design.values;
    let hat_b = bm * (bm.transpose() * bm + &lambda * lam).lu().try_inverse().expect("invertible") * bm.transpose();
    let c = nalgebra::DMatrix::from_fn(x.len(), 2 + rep.random.ncols(), |r, j| {
        if j < 2 { rep.fixed[(r, j)] } else { rep.random.values[(r, j - 2)] }
    });
    let ridge = nalgebra::DMatrix::from_fn(c.ncols(), c.ncols(), |a, b| if a == b && a >= 2 { lam } else { 0.0 });
    let hat_c = &c * (c.transpose() * &c + ridge).lu().try_inverse().expect("invertible") * c.transpose();
    println!("max |hat difference| at λ = {lam}: {:.2e}", (hat_b - hat_c).amax());
    Ok(())
}
