use jigglekit::grassmannian::{chart_metric, d_proj, is_transverse_planes, AffineFlat, Plane, Quotient};
use jigglekit::linalg::RANK_RTOL;
use jigglekit::lp::{maximize, LpOutcome};
use jigglekit::simplicial::complex::meet_in_shared_face;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn plane_of(cols: &[Vec<f64>], n: usize) -> Plane {
    let v: Vec<DVector<f64>> = cols.iter().map(|c| DVector::from_column_slice(c)).collect();
    Plane::from_spanning(&v, n, RANK_RTOL).unwrap()
}

fn spanning(n: usize, k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0..1.0f64, n), k).prop_filter("full rank", move |c| {
        let m = DMatrix::from_fn(n, k, |i, j| c[j][i]);
        m.svd(false, false).singular_values.min() > 0.05
    })
}

fn rotation(n: usize, seed: &[f64]) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |i, j| seed[i * n + j] + if i == j { 2.0 } else { 0.0 });
    m.qr().q()
}

// Largest principal angle from the singular values of B₁ᵀB₂.
fn sin_largest_angle(v: &Plane, w: &Plane) -> f64 {
    let c = (v.basis().transpose() * w.basis()).svd(false, false).singular_values;
    let cmin = c.iter().copied().fold(1.0f64, f64::min).clamp(0.0, 1.0);
    (1.0 - cmin * cmin).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_proj_is_sine_of_largest_principal_angle(a in spanning(4, 2), b in spanning(4, 2)) {
        let (v, w) = (plane_of(&a, 4), plane_of(&b, 4));
        prop_assert!((d_proj(&v, &w).unwrap() - sin_largest_angle(&v, &w)).abs() < 1e-9);
    }

    #[test]
    fn d_proj_is_one_across_ranks(a in spanning(4, 1), b in spanning(4, 2)) {
        let (v, w) = (plane_of(&a, 4), plane_of(&b, 4));
        prop_assert!((d_proj(&v, &w).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn d_proj_is_a_metric(a in spanning(3, 2), b in spanning(3, 2), c in spanning(3, 2)) {
        let (u, v, w) = (plane_of(&a, 3), plane_of(&b, 3), plane_of(&c, 3));
        let uv = d_proj(&u, &v).unwrap();
        prop_assert!((uv - d_proj(&v, &u).unwrap()).abs() < 1e-12);
        prop_assert!(d_proj(&u, &u).unwrap() < 1e-12);
        prop_assert!(d_proj(&u, &w).unwrap() <= uv + d_proj(&v, &w).unwrap() + 1e-12);
        prop_assert!(uv <= 1.0 + 1e-12);
    }

    #[test]
    fn d_proj_is_rotation_invariant(a in spanning(3, 1), b in spanning(3, 1), seed in prop::collection::vec(-1.0..1.0f64, 9)) {
        let q = rotation(3, &seed);
        let rot = |c: &[Vec<f64>]| -> Vec<Vec<f64>> {
            c.iter().map(|x| (&q * DVector::from_column_slice(x)).iter().copied().collect()).collect()
        };
        let before = d_proj(&plane_of(&a, 3), &plane_of(&b, 3)).unwrap();
        let after = d_proj(&plane_of(&rot(&a), 3), &plane_of(&rot(&b), 3)).unwrap();
        prop_assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn complement_and_quotient(a in spanning(4, 2), x in prop::collection::vec(-3.0..3.0f64, 4)) {
        let v = plane_of(&a, 4);
        let perp = v.complement();
        prop_assert_eq!(perp.dim(), 2);
        prop_assert!((v.basis().transpose() * perp.basis()).amax() < 1e-12);
        let q = Quotient::new(&v);
        for col in &a {
            prop_assert!(q.apply(&DVector::from_column_slice(col)).norm() < 1e-12);
        }
        let x = DVector::from_column_slice(&x);
        let dist = (&x - v.project(&x)).norm();
        prop_assert!((q.apply(&x).norm() - dist).abs() < 1e-9);
    }

    // Least squares through the SVD of the raw spanning vectors.
    #[test]
    fn flat_distance_matches_least_squares(a in spanning(4, 2), base in prop::collection::vec(-2.0..2.0f64, 4), p in prop::collection::vec(-2.0..2.0f64, 4)) {
        let b = DMatrix::from_fn(4, 2, |i, j| a[j][i]);
        let base = DVector::from_column_slice(&base);
        let p = DVector::from_column_slice(&p);
        let rhs = &p - &base;
        let t = b.clone().svd(true, true).solve(&rhs, 1e-14).unwrap();
        let oracle = (&rhs - &b * t).norm();
        let flat = AffineFlat::new(base.clone(), plane_of(&a, 4));
        prop_assert!((flat.distance(&p) - oracle).abs() < 1e-9);
        prop_assert!(flat.distance(&flat.closest_point(&p)) < 1e-9);
    }

    #[test]
    fn generic_planes_are_transverse(a in spanning(3, 1), b in spanning(3, 1)) {
        let (v, w) = (plane_of(&a, 3), plane_of(&b, 3));
        let rank = DMatrix::from_fn(3, 2, |i, j| if j == 0 { a[0][i] } else { b[0][i] }).rank(1e-9);
        prop_assert_eq!(is_transverse_planes(&v, &w, RANK_RTOL).unwrap(), rank == 2);
    }

    #[test]
    fn chart_metric_vanishes_on_the_diagonal(a in spanning(3, 1), c in spanning(3, 1)) {
        let (w, center) = (plane_of(&a, 3), plane_of(&c, 3));
        if let Ok(d) = chart_metric(&center, &w, &w) {
            prop_assert!(d < 1e-12);
        }
    }
}

#[test]
fn planes_sharing_a_line_are_not_transverse() {
    let v = plane_of(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]], 4);
    let w = plane_of(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]], 4);
    assert!(!is_transverse_planes(&v, &w, RANK_RTOL).unwrap());
    let u = plane_of(&[vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]], 4);
    assert!(is_transverse_planes(&v, &u, RANK_RTOL).unwrap());
}

#[test]
fn lp_textbook_optimum() {
    // max x + y, x + 2y ≤ 4, 3x + y ≤ 6.
    let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
    match maximize(&a, &[4.0, 6.0], &[1.0, 1.0, 0.0, 0.0]) {
        LpOutcome::Optimal { value, x } => {
            assert!((value - 2.8).abs() < 1e-12);
            assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn lp_infeasible_and_unbounded() {
    assert_eq!(maximize(&[vec![1.0, 1.0]], &[-1.0], &[1.0, 0.0]), LpOutcome::Infeasible);
    assert_eq!(maximize(&[vec![1.0, -1.0]], &[0.0], &[1.0, 0.0]), LpOutcome::Unbounded);
}

// Vertex enumeration for max c·x over {A x ≤ b, x ≥ 0} in the plane.
fn brute_force_2d(a: &[[f64; 2]], b: &[f64], c: [f64; 2]) -> f64 {
    let mut lines: Vec<([f64; 2], f64)> = a.iter().zip(b).map(|(r, &bi)| (*r, bi)).collect();
    lines.push(([1.0, 0.0], 0.0));
    lines.push(([0.0, 1.0], 0.0));
    let mut best = f64::NEG_INFINITY;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (p, q) = (lines[i], lines[j]);
            let det = p.0[0] * q.0[1] - p.0[1] * q.0[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = (p.1 * q.0[1] - p.0[1] * q.1) / det;
            let y = (p.0[0] * q.1 - p.1 * q.0[0]) / det;
            let feasible = x >= -1e-9 && y >= -1e-9 && a.iter().zip(b).all(|(r, &bi)| r[0] * x + r[1] * y <= bi + 1e-9);
            if feasible {
                best = best.max(c[0] * x + c[1] * y);
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lp_matches_vertex_enumeration(
        rows in prop::collection::vec(((0.1..3.0f64, 0.1..3.0f64), 0.5..5.0f64), 1..5),
        c in (-1.0..2.0f64, -1.0..2.0f64),
    ) {
        let m = rows.len();
        let a: Vec<Vec<f64>> = rows.iter().enumerate().map(|(i, ((x, y), _))| {
            let mut r = vec![0.0; 2 + m];
            r[0] = *x;
            r[1] = *y;
            r[2 + i] = 1.0;
            r
        }).collect();
        let b: Vec<f64> = rows.iter().map(|(_, bi)| *bi).collect();
        let mut cost = vec![0.0; 2 + m];
        cost[0] = c.0;
        cost[1] = c.1;
        let oracle = brute_force_2d(&rows.iter().map(|((x, y), _)| [*x, *y]).collect::<Vec<_>>(), &b, [c.0, c.1]);
        match maximize(&a, &b, &cost) {
            LpOutcome::Optimal { value, x } => {
                prop_assert!((value - oracle).abs() < 1e-9, "{} vs {}", value, oracle);
                prop_assert!(x.iter().all(|&t| t >= -1e-9));
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }
}

type P2 = [f64; 2];

fn orient(a: P2, b: P2, c: P2) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn area2(t: &[P2; 3]) -> f64 {
    orient(t[0], t[1], t[2])
}

fn segments_cross(p: P2, q: P2, r: P2, s: P2) -> bool {
    let d1 = orient(p, q, r);
    let d2 = orient(p, q, s);
    let d3 = orient(r, s, p);
    let d4 = orient(r, s, q);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn inside(t: &[P2; 3], x: P2) -> bool {
    let s = area2(t).signum();
    (0..3).all(|i| orient(t[i], t[(i + 1) % 3], x) * s > 0.0)
}

fn triangles_overlap(a: &[P2; 3], b: &[P2; 3]) -> bool {
    for i in 0..3 {
        for j in 0..3 {
            if segments_cross(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]) {
                return true;
            }
        }
    }
    a.iter().any(|&x| inside(b, x)) || b.iter().any(|&x| inside(a, x))
}

fn seg_dist(p: P2, a: P2, b: P2) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    ((p[0] - a[0] - t * dx).powi(2) + (p[1] - a[1] - t * dy).powi(2)).sqrt()
}

// Smallest distance from a vertex of one triangle to an edge of the other;
// tiny values mark near-touching configurations.
fn clearance(a: &[P2; 3], b: &[P2; 3]) -> f64 {
    let mut d = f64::INFINITY;
    for (s, t) in [(a, b), (b, a)] {
        for &x in s.iter() {
            for j in 0..3 {
                d = d.min(seg_dist(x, t[j], t[(j + 1) % 3]));
            }
        }
    }
    d
}

fn dv(p: P2) -> DVector<f64> {
    DVector::from_column_slice(&p)
}

fn tri() -> impl Strategy<Value = [P2; 3]> {
    prop::array::uniform3(prop::array::uniform2(-1.0..1.0f64)).prop_filter("fat", |t| area2(t).abs() > 0.05)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn disjoint_vertex_sets_agree_with_overlap_oracle(a in tri(), b in tri()) {
        let overlap = triangles_overlap(&a, &b);
        prop_assume!(overlap || clearance(&a, &b) > 1e-6);
        let pa: Vec<DVector<f64>> = a.iter().map(|&p| dv(p)).collect();
        let pb: Vec<DVector<f64>> = b.iter().map(|&p| dv(p)).collect();
        let ok = meet_in_shared_face(&[0, 1, 2], &pa.iter().collect::<Vec<_>>(), &[3, 4, 5], &pb.iter().collect::<Vec<_>>());
        prop_assert_eq!(ok, !overlap);
    }

    // Two triangles sharing an edge meet only along it exactly when the
    // opposite vertices lie on opposite sides of the edge line.
    #[test]
    fn shared_edge_agrees_with_side_test(a in tri(), x in prop::array::uniform2(-1.0..1.0f64)) {
        let side_a = orient(a[0], a[1], a[2]);
        let side_x = orient(a[0], a[1], x);
        prop_assume!(side_x.abs() > 0.05);
        let b = [a[0], a[1], x];
        let pa: Vec<DVector<f64>> = a.iter().map(|&p| dv(p)).collect();
        let pb: Vec<DVector<f64>> = b.iter().map(|&p| dv(p)).collect();
        let ok = meet_in_shared_face(&[0, 1, 2], &pa.iter().collect::<Vec<_>>(), &[0, 1, 3], &pb.iter().collect::<Vec<_>>());
        prop_assert_eq!(ok, side_a * side_x < 0.0);
    }

    // Sharing one vertex: the triangles meet only there exactly when their
    // corner cones at it have disjoint interiors.
    #[test]
    fn shared_vertex_agrees_with_cone_test(a in tri(), y in prop::array::uniform2(-1.0..1.0f64), z in prop::array::uniform2(-1.0..1.0f64)) {
        let b = [a[0], y, z];
        prop_assume!(area2(&b).abs() > 0.05);
        let dirs = |t: &[P2; 3]| [[t[1][0] - t[0][0], t[1][1] - t[0][1]], [t[2][0] - t[0][0], t[2][1] - t[0][1]]];
        let cone_contains = |d: [P2; 2], x: P2| {
            let s = orient([0.0, 0.0], d[0], d[1]).signum();
            orient([0.0, 0.0], d[0], x) * s > 1e-12 && orient([0.0, 0.0], x, d[1]) * s > 1e-12
        };
        let (da, db) = (dirs(&a), dirs(&b));
        let cones_meet = db.iter().any(|&x| cone_contains(da, x)) || da.iter().any(|&x| cone_contains(db, x))
            || (orient([0.0, 0.0], da[0], db[0]).abs() < 1e-12 && orient([0.0, 0.0], da[1], db[1]).abs() < 1e-12);
        let sep = [da[0], da[1], db[0], db[1]];
        let min_angle_gap = sep.iter().enumerate().flat_map(|(i, p)| sep[i + 1..].iter().map(move |q| {
            orient([0.0, 0.0], *p, *q).abs() / ((p[0] * p[0] + p[1] * p[1]).sqrt() * (q[0] * q[0] + q[1] * q[1]).sqrt())
        })).fold(f64::INFINITY, f64::min);
        prop_assume!(min_angle_gap > 1e-6);
        let pa: Vec<DVector<f64>> = a.iter().map(|&p| dv(p)).collect();
        let pb: Vec<DVector<f64>> = b.iter().map(|&p| dv(p)).collect();
        let ok = meet_in_shared_face(&[0, 1, 2], &pa.iter().collect::<Vec<_>>(), &[0, 3, 4], &pb.iter().collect::<Vec<_>>());
        prop_assert_eq!(ok, !cones_meet);
    }
}
