//! Linear pair groupoids `G = V x V` over a symplectic vector space.
//!
//! An arrow `(a, b)` has target `alpha(a, b) = a` and source `beta(a, b) = b`;
//! composable pairs multiply as `(a, b)(b, c) = (a, c)`.

use thiserror::Error;

use crate::dirac_linear::{
    check_dual_pair, dirac_from_form, gauge, gauge_bivector, DiracError, LinearDualPairData, LinearMap, PairMode,
    SkewForm, Verdict,
};
use crate::exact_linalg::{dot, Mat, Rat, Subspace};
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupoidError {
    #[error("base form is degenerate")]
    DegenerateBase,
    #[error("gauged structure is not Poisson: 1 + B Omega^-1 is singular")]
    GaugeNotPoisson,
    #[error(transparent)]
    Dirac(#[from] DiracError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearPairGroupoid {
    pub base_dim: usize,
    pub omega: SkewForm,
    /// `Omega (+) (-Omega)` on `V x V`.
    pub omega_g: SkewForm,
    pub alpha: LinearMap,
    pub beta: LinearMap,
    /// `{((a, b), (b, c), (a, c))}` inside `G^3`.
    pub mult_graph: Subspace,
}

pub fn make_pair_groupoid(omega: &SkewForm) -> Result<LinearPairGroupoid, GroupoidError> {
    if !omega.is_nondegenerate() {
        return Err(GroupoidError::DegenerateBase);
    }
    let n = omega.dim();
    let omega_g = omega.direct_sum(&omega.neg());
    let alpha = LinearMap::new(Mat::identity(n).hstack(&Mat::zeros(n, n)).expect("same rows"));
    let beta = LinearMap::new(Mat::zeros(n, n).hstack(&Mat::identity(n)).expect("same rows"));
    let mut rows = Mat::zeros(0, 6 * n);
    // Free parameters (a, b, c); slots are a, b | b, c | a, c.
    for slots in [[0usize, 4], [1, 2], [3, 5]] {
        for i in 0..n {
            let mut row = vec![Rat::zero(); 6 * n];
            for s in slots {
                row[s * n + i] = Rat::one();
            }
            rows.push_row(&row);
        }
    }
    let mult_graph = Subspace::span(&rows);
    debug_assert_eq!(mult_graph.dim(), 3 * n);
    Ok(LinearPairGroupoid {
        base_dim: n,
        omega: omega.clone(),
        omega_g,
        alpha,
        beta,
        mult_graph,
    })
}

impl LinearPairGroupoid {
    /// `Omega_B = Omega_G + alpha* B - beta* B = (Omega + B) (+) (-Omega - B)`.
    pub fn gauge_form(&self, b: &SkewForm) -> Result<SkewForm, GroupoidError> {
        let pa = b.pullback(&self.alpha)?;
        let pb = b.pullback(&self.beta)?;
        Ok(self.omega_g.add(&pa)?.add(&pb.neg())?)
    }

    /// Whether the multiplication graph is lagrangian for `form (+) form (+) (-form)`.
    pub fn check_multiplicative(&self, form: &SkewForm) -> bool {
        let g = 2 * self.base_dim;
        if form.dim() != g {
            return false;
        }
        let triple = form.direct_sum(form).direct_sum(&form.neg());
        let basis = self.mult_graph.basis();
        let t = triple.matrix();
        let images: Vec<Vec<Rat>> = (0..basis.rows())
            .map(|i| {
                let row = basis.row(i);
                (0..3 * g)
                    .map(|j| (0..3 * g).map(|k| &row[k] * &t[(k, j)]).sum())
                    .collect()
            })
            .collect();
        let isotropic = (0..basis.rows()).all(|i| (i + 1..basis.rows()).all(|j| dot(&images[i], basis.row(j)).is_zero()));
        isotropic && 2 * self.mult_graph.dim() == 3 * g
    }

    /// `Omega^ = Omega_G - beta* B`.
    pub fn bimodule_form(&self, b: &SkewForm) -> Result<SkewForm, GroupoidError> {
        Ok(self.omega_g.add(&b.pullback(&self.beta)?.neg())?)
    }

    /// `Omega^` together with the dual pair verdict for
    /// `graph(Omega) <- G -> graph(-(Omega + B))`.
    pub fn morita_bimodule_form(&self, b: &SkewForm) -> Result<(SkewForm, Verdict), GroupoidError> {
        let pi = self.omega.inverse_bivector().ok_or(GroupoidError::DegenerateBase)?;
        if gauge_bivector(b, &pi)?.is_none() {
            return Err(GroupoidError::GaugeNotPoisson);
        }
        let omega_hat = self.bimodule_form(b)?;
        let base = dirac_from_form(&self.omega);
        let dual = LinearDualPairData {
            omega: omega_hat.clone(),
            j1: self.alpha.clone(),
            j2: self.beta.clone(),
            l1: base.clone(),
            l2: gauge(b, &base)?.negate(),
            full: true,
        };
        let verdict = check_dual_pair(&dual, PairMode::Dual)?;
        Ok((omega_hat, verdict))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac_linear::forward;

    fn std_form() -> SkewForm {
        SkewForm::new(Mat::from_i64(&[&[0, 1], &[-1, 0]])).unwrap()
    }

    #[test]
    fn construction() {
        let g = make_pair_groupoid(&std_form()).unwrap();
        assert_eq!(g.omega_g.dim(), 4);
        assert_eq!(g.mult_graph.dim(), 6);
        for a in [[1i64, 0], [0, 1], [3, -2]] {
            let v: Vec<Rat> = (0..6).flat_map(|_| a.iter().map(|&x| Rat::from_integer(x.into()))).collect();
            assert!(g.mult_graph.contains_vector(&v).unwrap());
        }
        assert!(g.check_multiplicative(&g.omega_g));
        assert_eq!(make_pair_groupoid(&SkewForm::zero(2)), Err(GroupoidError::DegenerateBase));
    }

    #[test]
    fn gauge_forms() {
        let g = make_pair_groupoid(&std_form()).unwrap();
        assert_eq!(g.gauge_form(&SkewForm::zero(2)).unwrap(), g.omega_g);
        let collapse = g.gauge_form(&std_form().neg()).unwrap();
        assert_eq!(collapse, SkewForm::zero(4));
        assert!(g.check_multiplicative(&collapse));
        let b = SkewForm::new(Mat::from_i64(&[&[0, 5], &[-5, 0]])).unwrap();
        let ob = g.gauge_form(&b).unwrap();
        assert_eq!(ob, std_form().add(&b).unwrap().direct_sum(&std_form().add(&b).unwrap().neg()));
        assert!(g.check_multiplicative(&ob));
        // alpha onto the gauged base, beta onto its negative.
        let graph = dirac_from_form(&ob);
        let gauged = gauge(&b, &dirac_from_form(&std_form())).unwrap();
        assert_eq!(forward(&g.alpha, &graph).unwrap(), gauged);
        assert_eq!(forward(&g.beta, &graph).unwrap(), gauged.negate());
    }

    #[test]
    fn wrong_sign_is_not_multiplicative() {
        let g = make_pair_groupoid(&std_form()).unwrap();
        assert!(!g.check_multiplicative(&std_form().direct_sum(&std_form())));
    }

    #[test]
    fn morita_bimodule() {
        let g = make_pair_groupoid(&std_form()).unwrap();
        let (hat, v) = g.morita_bimodule_form(&SkewForm::zero(2)).unwrap();
        assert_eq!(hat, g.omega_g);
        assert!(v.holds());
        let b = SkewForm::new(Mat::from_i64(&[&[0, 2], &[-2, 0]])).unwrap();
        let (hat, v) = g.morita_bimodule_form(&b).unwrap();
        assert!(v.holds(), "{v:?}");
        assert!(hat.is_nondegenerate());
        assert_eq!(g.morita_bimodule_form(&std_form().neg()), Err(GroupoidError::GaugeNotPoisson));
    }
}
