mod common;

use common::{maximally_isotropic, Gen};
use dirackit::dirac_linear::{
    backward, compose, dirac_from_bivector, dirac_from_form, dirac_from_kernel_bivector, forward, forward_relation,
    gauge, kernel_vectors, leaf_form, presymp_orthogonal, quotient_bivector, rho_range, LinearMap,
};
use dirackit::exact_linalg::{kernel, rref, solve_row_combination, Mat, Subspace};
use dirackit::pair_groupoid::make_pair_groupoid;
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(128)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn rref_is_idempotent_and_canonical(seed: u64, n in 1usize..=8) {
        let mut g = Gen::new(seed);
        let k = g.int(0, n as i64) as usize;
        let a = g.mat(k, n);
        let r = rref(&a);
        prop_assert_eq!(rref(&r), r.clone());
        // Mixing rows by an invertible matrix keeps the span.
        let b = g.invertible(k).mul(&a).unwrap();
        prop_assert_eq!(rref(&b), r);
        let other = g.mat(k, n);
        let same = Subspace::span(&a) == Subspace::span(&other);
        prop_assert_eq!(same, rref(&a) == rref(&other));
    }

    #[test]
    fn dimension_formula(seed: u64, n in 1usize..=8) {
        let mut g = Gen::new(seed);
        let a = g.subspace(n);
        let b = g.subspace(n);
        let s = a.sum(&b).unwrap();
        let i = a.intersect(&b).unwrap();
        prop_assert_eq!(s.dim() + i.dim(), a.dim() + b.dim());
        prop_assert!(s.contains(&a).unwrap() && a.contains(&i).unwrap());
    }

    #[test]
    fn double_annihilator(seed: u64, n in 1usize..=8) {
        let a = Gen::new(seed).subspace(n);
        prop_assert_eq!(a.annihilator().annihilator(), a);
    }

    #[test]
    fn constructors_are_maximally_isotropic(seed: u64, n in 1usize..=8) {
        let mut g = Gen::new(seed);
        prop_assert!(maximally_isotropic(&g.dirac(n)));
        prop_assert!(maximally_isotropic(&dirac_from_form(&g.skew_form(n))));
        prop_assert!(maximally_isotropic(&dirac_from_bivector(&g.bivector(n))));
    }

    #[test]
    fn kernel_bivector_round_trip(seed: u64, n in 1usize..=6) {
        let l = Gen::new(seed).dirac(n);
        let (k, pi) = quotient_bivector(&l);
        prop_assert_eq!(dirac_from_kernel_bivector(&k, &pi).unwrap(), l);
    }

    #[test]
    fn gauge_is_a_group_action(seed: u64, n in 1usize..=6) {
        let mut g = Gen::new(seed);
        let l = g.dirac(n);
        let b = g.skew_form(n);
        let c = g.skew_form(n);
        let gauged = gauge(&b, &l).unwrap();
        prop_assert_eq!(gauge(&b.neg(), &gauged).unwrap(), l.clone());
        prop_assert_eq!(gauge(&c, &gauged).unwrap(), gauge(&b.add(&c).unwrap(), &l).unwrap());
        prop_assert_eq!(rho_range(&gauged), rho_range(&l));
        // The leaf form shifts by B restricted to the range.
        let (r, before) = leaf_form(&l);
        let (_, after) = leaf_form(&gauged);
        let restricted = r.basis().mul(b.matrix()).unwrap().mul(&r.basis().transpose()).unwrap();
        prop_assert_eq!(after.matrix(), &before.matrix().add(&restricted).unwrap());
    }

    #[test]
    fn functor_laws(seed: u64, n in 1usize..=5, m in 1usize..=5, p in 1usize..=5) {
        let mut g = Gen::new(seed);
        let l = g.dirac(n);
        let psi = g.map(m, n);
        let phi = g.map(p, m);
        let both = phi.compose(&psi).unwrap();
        prop_assert_eq!(
            forward(&both, &l).unwrap(),
            forward(&phi, &forward(&psi, &l).unwrap()).unwrap()
        );
        let lp = g.dirac(p);
        prop_assert_eq!(
            backward(&both, &lp).unwrap(),
            backward(&psi, &backward(&phi, &lp).unwrap()).unwrap()
        );
        prop_assert_eq!(
            compose(&forward_relation(&phi), &forward_relation(&psi)).unwrap(),
            forward_relation(&both)
        );
    }

    #[test]
    fn injective_and_surjective_inverses(seed: u64, small in 1usize..=4, extra in 0usize..=2) {
        let mut g = Gen::new(seed);
        let big = small + extra;
        let inj = g.injective(big, small);
        let l = g.dirac(small);
        prop_assert_eq!(backward(&inj, &forward(&inj, &l).unwrap()).unwrap(), l);
        let sur = g.surjective(small, big);
        let lw = g.dirac(small);
        prop_assert_eq!(forward(&sur, &backward(&sur, &lw).unwrap()).unwrap(), lw);
    }

    #[test]
    fn gauged_kernel_matches_form_kernel(seed: u64, half in 1usize..=3, w in 1usize..=6) {
        let mut g = Gen::new(seed);
        let omega = g.symplectic(half);
        let w = w.min(2 * half);
        let phi = g.surjective(w, 2 * half);
        let pi = omega.inverse_bivector().unwrap().pushforward(&phi).unwrap();
        // phi is Poisson from (V, Omega) onto (W, pi).
        prop_assert_eq!(forward(&phi, &dirac_from_form(&omega)).unwrap(), dirac_from_bivector(&pi));
        let b = g.skew_form(w);
        let shifted = omega.add(&b.pullback(&phi).unwrap()).unwrap();
        let gauged = gauge(&b, &dirac_from_bivector(&pi)).unwrap();
        prop_assert_eq!(shifted.kernel().dim(), kernel_vectors(&gauged).dim());
        prop_assert_eq!(shifted.is_nondegenerate(), gauged.is_bivector_graph());
    }

    #[test]
    fn orthogonal_of_fiber_in_range(seed: u64, n in 1usize..=6, m in 1usize..=6) {
        let mut g = Gen::new(seed);
        let l = g.dirac(n);
        let phi = g.map(m, n);
        let (r, form) = leaf_form(&l);
        // Left side: Omega_L-orthogonal of ker(phi) cap R, inside R.
        let fiber = phi.kernel().intersect(&r).unwrap();
        let mut coords = Mat::zeros(0, r.dim());
        for i in 0..fiber.dim() {
            coords.push_row(&solve_row_combination(r.basis(), fiber.basis().row(i)).unwrap());
        }
        let c = kernel(&coords.mul(&form.matrix().transpose()).unwrap());
        let lhs = Subspace::span(&c.basis().mul(r.basis()).unwrap());
        // Right side: x with (x, phi* eta) in L for some eta.
        let pulled = Subspace::span(&Mat::zeros(m, n).hstack(phi.matrix()).unwrap());
        let allowed = Subspace::coordinate(2 * n, 0..n).sum(&pulled).unwrap();
        let hits = l.space().intersect(&allowed).unwrap();
        let rhs = Subspace::span(&hits.basis().col_range(0, n));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn orthogonal_fibers_keep_forward_map(seed: u64, half in 1usize..=3) {
        let mut g = Gen::new(seed);
        let d = g.dual_pair(half);
        let l = dirac_from_form(&d.omega);
        let orth = presymp_orthogonal(&d.j1.kernel(), &d.omega).unwrap();
        prop_assert_eq!(orth, d.j2.kernel());
        let b = g.skew_form(d.j2.target_dim());
        let shifted = gauge(&b.pullback(&d.j2).unwrap(), &l).unwrap();
        prop_assert_eq!(forward(&d.j1, &shifted).unwrap(), forward(&d.j1, &l).unwrap());
    }

    #[test]
    fn double_orthogonal_contains(seed: u64, n in 1usize..=6) {
        let mut g = Gen::new(seed);
        let omega = g.skew_form(n);
        let w = g.subspace(n);
        let back = presymp_orthogonal(&presymp_orthogonal(&w, &omega).unwrap(), &omega).unwrap();
        prop_assert!(back.contains(&w).unwrap());
        if omega.is_nondegenerate() {
            prop_assert_eq!(back, w);
        }
    }

    #[test]
    fn groupoid_legs_are_forward_dirac(seed: u64, half in 1usize..=2) {
        let mut g = Gen::new(seed);
        let omega = g.symplectic(half);
        let grp = make_pair_groupoid(&omega).unwrap();
        let b = g.skew_form(2 * half);
        let ob = grp.gauge_form(&b).unwrap();
        prop_assert!(grp.check_multiplicative(&ob));
        let graph = dirac_from_form(&ob);
        let base = gauge(&b, &dirac_from_form(&omega)).unwrap();
        prop_assert_eq!(forward(&grp.alpha, &graph).unwrap(), base.clone());
        prop_assert_eq!(forward(&grp.beta, &graph).unwrap(), base.negate());
    }
}

#[test]
fn identity_map_fixes_everything() {
    let mut g = Gen::new(7);
    for n in 1..=6 {
        let l = g.dirac(n);
        let id = LinearMap::identity(n);
        assert_eq!(forward(&id, &l).unwrap(), l);
        assert_eq!(backward(&id, &l).unwrap(), l);
    }
}
