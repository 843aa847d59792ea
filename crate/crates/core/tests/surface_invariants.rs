mod common;

use common::rk4_period;
use dirackit::surface_expr::parse;
use dirackit::surface_poisson::{
    classify, extract_zero_curves, gauge_forward, SurfaceError, SurfaceFunction, SurfaceSpec, ZeroCurve,
};
use rayon::prelude::*;
use std::f64::consts::TAU;

const SPHERE_CORPUS: [&str; 7] = [
    "z",
    "2*z",
    "z - cos(theta)/4",
    "z^2 - 1/4",
    "z*(z^2-1/4)",
    "(z^2-1/4)*(2+sin(theta))",
    "z^2 + (theta - pi)^2 - 0.09",
];

const COEFFICIENTS: [&str; 3] = ["0", "1", "sin(theta)/4"];

fn func(src: &str) -> SurfaceFunction {
    SurfaceFunction::new(parse(src).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Largest distance from a point of `a` to the nearest vertex of `b`, with theta periodic.
fn hausdorff_one_sided(a: &ZeroCurve, b: &ZeroCurve) -> f64 {
    a.points
        .iter()
        .map(|p| {
            b.points
                .iter()
                .map(|q| {
                    let dt = (p.theta - q.theta).rem_euclid(TAU);
                    (p.z - q.z).hypot(dt.min(TAU - dt))
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[test]
fn region_graphs_are_bipartite_trees_on_the_sphere() {
    let s = SurfaceSpec::sphere(256);
    SPHERE_CORPUS.par_iter().for_each(|src| {
        let r = classify(&func(src), &s).unwrap();
        let g = &r.graph;
        assert!(g.is_tree(), "{src}: {g:?}");
        assert_eq!(g.vertices.len(), g.edges.len() + 1, "{src}");
        for e in &g.edges {
            assert_ne!(g.vertices[e.a].sign, g.vertices[e.b].sign, "{src}: edge {e:?}");
        }
    });
}

#[test]
fn torus_graph_is_bipartite_but_cyclic() {
    let s = SurfaceSpec::torus(128);
    let r = classify(&func("sin(2*pi*z)"), &s).unwrap();
    assert_eq!(r.curves.len(), 2);
    assert!(!r.graph.is_tree());
    for e in &r.graph.edges {
        assert_ne!(r.graph.vertices[e.a].sign, r.graph.vertices[e.b].sign);
    }
}

#[test]
fn periods_agree_with_the_flow() {
    let s = SurfaceSpec::sphere(256);
    SPHERE_CORPUS.par_iter().for_each(|src| {
        let f = func(src);
        let r = classify(&f, &s).unwrap();
        for (c, &t) in r.curves.iter().zip(&r.periods) {
            let flow = rk4_period(&f, c.points[0], 1e-3, 3.0 * t).expect("flow returns");
            assert!(rel(t, flow) < 1e-3, "{src}: quadrature {t} vs flow {flow}");
        }
    });
}

#[test]
fn gauge_keeps_zero_sets_and_periods() {
    let s = SurfaceSpec::sphere(256);
    let cell = (s.z_step()).hypot(s.theta_step());
    let cases: Vec<(&str, &str)> = SPHERE_CORPUS
        .iter()
        .flat_map(|f| COEFFICIENTS.iter().map(move |b| (*f, *b)))
        .collect();
    let checked: usize = cases
        .par_iter()
        .map(|(src, b)| {
            let f = func(src);
            let gf = gauge_forward(f.expr(), &parse(b).unwrap(), &s);
            if !gf.valid {
                return 0;
            }
            let g = SurfaceFunction::new(gf.ast.clone());
            let before = classify(&f, &s).unwrap();
            let after = classify(&g, &s).unwrap();
            assert_eq!(before.curves.len(), after.curves.len(), "{src} with b={b}");
            for (c1, c2) in before.curves.iter().zip(&after.curves) {
                let d = hausdorff_one_sided(c2, c1).max(hausdorff_one_sided(c1, c2));
                assert!(d <= cell, "{src} with b={b}: curves {d} apart");
            }
            for (t1, t2) in before.periods.iter().zip(&after.periods) {
                assert!(rel(*t2, *t1) < 1e-3, "{src} with b={b}: {t1} vs {t2}");
            }
            1
        })
        .sum();
    assert!(checked >= 2 * SPHERE_CORPUS.len(), "only {checked} valid gauge cases");
}

#[test]
fn rejected_inputs_name_their_check() {
    let s = SurfaceSpec::sphere(128);
    let cases = [
        ("z^2", "regularity"),
        ("z^2 - 0.999", "pole_margin"),
        ("z*(z - cos(theta)/2)", "regularity"),
    ];
    for (src, check) in cases {
        let err = extract_zero_curves(&func(src), &s).unwrap_err();
        assert_eq!(err.check_name(), Some(check), "{src}: {err}");
    }
    assert!(matches!(SurfaceSpec::sphere(32).validate(), Err(SurfaceError::InvalidSpec(_))));
}

#[test]
fn classification_is_deterministic() {
    let s = SurfaceSpec::sphere(256);
    let a = classify(&func("z*(z^2-1/4)"), &s).unwrap();
    let b = classify(&func("z*(z^2-1/4)"), &s).unwrap();
    assert_eq!(a, b);
}
