//! Linear Dirac structures over `Q^n` and their functorial calculus.
//!
//! Coordinates on `V (+) V*` are ordered `(x | xi)`. Forms and bivectors are
//! stored as skew matrices and act on row vectors from the right:
//! a form `M` sends `x` to the covector `x M`, so `M[i][j] = Omega(e_i, e_j)`,
//! and a bivector `P` sends `eta` to the vector `eta P`. With that convention
//! `graph(Omega)` is spanned by the rows of `[I | M]` and `graph(pi)` by the
//! rows of `[P | I]`.
//!
//! Linear maps `phi: V -> W` are `dim W x dim V` matrices acting on column
//! vectors; the dual map `phi*` sends a covector `eta` to `eta A` (as a row).

use serde::Serialize;
use thiserror::Error;

use crate::exact_linalg::{check_dim, dot, kernel, LinalgError, Mat, Rat, Subspace};
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiracError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("skew-symmetry violated for {0}")]
    NotSkew(&'static str),
    #[error("{what} is not a Dirac structure: {reason}")]
    NotDirac { what: &'static str, reason: String },
    #[error("relation is not lagrangian: {0}")]
    NotLagrangian(String),
    #[error("precondition violated: {axiom}")]
    Precondition { axiom: Axiom },
}

/// Skew-symmetric bilinear form on `V`; `m[i][j] = Omega(e_i, e_j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewForm(Mat);

/// Bivector on `V`, i.e. a skew form on `V*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bivector(Mat);

/// Linear map `V -> W` stored as a `dim W x dim V` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearMap(Mat);

macro_rules! skew_newtype {
    ($ty:ident, $name:literal) => {
        impl $ty {
            pub fn new(m: Mat) -> Result<Self, DiracError> {
                if !m.is_skew() {
                    return Err(DiracError::NotSkew($name));
                }
                Ok($ty(m))
            }

            pub fn zero(n: usize) -> Self {
                $ty(Mat::zeros(n, n))
            }

            pub fn dim(&self) -> usize {
                self.0.rows()
            }

            pub fn matrix(&self) -> &Mat {
                &self.0
            }

            pub fn into_matrix(self) -> Mat {
                self.0
            }

            pub fn neg(&self) -> Self {
                $ty(self.0.neg())
            }

            pub fn add(&self, other: &Self) -> Result<Self, DiracError> {
                Ok($ty(self.0.add(&other.0)?))
            }

            pub fn scale(&self, s: &Rat) -> Self {
                $ty(self.0.scale(s))
            }

            pub fn is_nondegenerate(&self) -> bool {
                self.0.is_invertible()
            }
        }
    };
}

skew_newtype!(SkewForm, "skew form");
skew_newtype!(Bivector, "bivector");

impl SkewForm {
    /// Pullback `phi* Omega`, the form `(x, y) -> Omega(phi x, phi y)`.
    pub fn pullback(&self, phi: &LinearMap) -> Result<SkewForm, DiracError> {
        check_dim("form pullback", self.dim(), phi.target_dim())?;
        let a = &phi.0;
        Ok(SkewForm(a.transpose().mul(&self.0)?.mul(a)?))
    }

    /// Radical `{x : Omega(x, .) = 0}`.
    pub fn kernel(&self) -> Subspace {
        kernel(&self.0)
    }

    /// Inverse bivector of a nondegenerate form, so that `graph(pi) = graph(Omega)`.
    pub fn inverse_bivector(&self) -> Option<Bivector> {
        self.0.inverse().map(Bivector)
    }

    pub fn direct_sum(&self, other: &SkewForm) -> SkewForm {
        SkewForm(self.0.block_diag(&other.0))
    }
}

impl Bivector {
    /// Pushforward `phi_* pi`, the bivector `(eta, zeta) -> pi(phi* eta, phi* zeta)`.
    pub fn pushforward(&self, phi: &LinearMap) -> Result<Bivector, DiracError> {
        check_dim("bivector pushforward", self.dim(), phi.source_dim())?;
        let a = &phi.0;
        Ok(Bivector(a.mul(&self.0)?.mul(&a.transpose())?))
    }
}

impl LinearMap {
    pub fn new(m: Mat) -> Self {
        LinearMap(m)
    }

    pub fn identity(n: usize) -> Self {
        LinearMap(Mat::identity(n))
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn source_dim(&self) -> usize {
        self.0.cols()
    }

    pub fn target_dim(&self) -> usize {
        self.0.rows()
    }

    pub fn kernel(&self) -> Subspace {
        kernel(&self.0)
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().is_zero()
    }

    pub fn is_surjective(&self) -> bool {
        self.0.rank() == self.target_dim()
    }

    /// `self o other`.
    pub fn compose(&self, other: &LinearMap) -> Result<LinearMap, DiracError> {
        Ok(LinearMap(self.0.mul(&other.0)?))
    }
}

/// A quotient `Q^n / K` with coordinates on the pivot-free columns of `K`'s rref basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    kernel: Subspace,
    free: Vec<usize>,
}

impl Quotient {
    pub fn new(kernel: Subspace) -> Self {
        let free = kernel.free_columns();
        Quotient { kernel, free }
    }

    pub fn kernel(&self) -> &Subspace {
        &self.kernel
    }

    pub fn ambient_dim(&self) -> usize {
        self.kernel.ambient_dim()
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// The projection `V -> V/K` as a `q x n` matrix.
    pub fn projection(&self) -> Mat {
        let n = self.ambient_dim();
        let mut pr = Mat::zeros(self.dim(), n);
        let k = self.kernel.basis();
        for (c, &f) in self.free.iter().enumerate() {
            pr[(c, f)] = Rat::one();
            for (i, &p) in self.kernel.pivots().iter().enumerate() {
                pr[(c, p)] = -k[(i, f)].clone();
            }
        }
        pr
    }

    /// Rows are the lifts of the quotient basis vectors into `V`.
    pub fn section(&self) -> Mat {
        let n = self.ambient_dim();
        let mut s = Mat::zeros(self.dim(), n);
        for (c, &f) in self.free.iter().enumerate() {
            s[(c, f)] = Rat::one();
        }
        s
    }
}

/// A Dirac structure `L` in `V (+) V*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearDirac {
    dim_v: usize,
    space: Subspace,
}

fn isotropy_defect(basis: &Mat, n: usize) -> Option<(usize, usize)> {
    for i in 0..basis.rows() {
        let (xi, ei) = basis.row(i).split_at(n);
        for j in i..basis.rows() {
            let (xj, ej) = basis.row(j).split_at(n);
            if !(dot(ei, xj) + dot(ej, xi)).is_zero() {
                return Some((i, j));
            }
        }
    }
    None
}

impl LinearDirac {
    /// Validates dimension and isotropy.
    pub fn new(dim_v: usize, space: Subspace) -> Result<Self, DiracError> {
        if space.ambient_dim() != 2 * dim_v {
            return Err(DiracError::NotDirac {
                what: "subspace",
                reason: format!("ambient dimension {} != 2*{}", space.ambient_dim(), dim_v),
            });
        }
        if space.dim() != dim_v {
            return Err(DiracError::NotDirac {
                what: "subspace",
                reason: format!("dimension {} != {}", space.dim(), dim_v),
            });
        }
        if let Some((i, j)) = isotropy_defect(space.basis(), dim_v) {
            return Err(DiracError::NotDirac {
                what: "subspace",
                reason: format!("basis rows {i} and {j} pair nontrivially"),
            });
        }
        Ok(LinearDirac { dim_v, space })
    }

    fn from_spanning(dim_v: usize, rows: &Mat) -> Self {
        let space = Subspace::span(rows);
        debug_assert_eq!(space.dim(), dim_v, "constructed subspace has wrong dimension");
        debug_assert!(isotropy_defect(space.basis(), dim_v).is_none(), "constructed subspace not isotropic");
        LinearDirac { dim_v, space }
    }

    pub fn dim_v(&self) -> usize {
        self.dim_v
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    /// True when `L` is maximally isotropic; always holds for constructed values.
    pub fn is_valid(&self) -> bool {
        self.space.ambient_dim() == 2 * self.dim_v
            && self.space.dim() == self.dim_v
            && isotropy_defect(self.space.basis(), self.dim_v).is_none()
    }

    fn x_parts(&self) -> Mat {
        self.space.basis().col_range(0, self.dim_v)
    }

    fn xi_parts(&self) -> Mat {
        self.space.basis().col_range(self.dim_v, 2 * self.dim_v)
    }

    /// `{(x, -xi)}`; sends `graph(pi)` to `graph(-pi)`.
    pub fn negate(&self) -> LinearDirac {
        let n = self.dim_v;
        let mut d = Mat::identity(2 * n);
        for i in n..2 * n {
            d[(i, i)] = -Rat::one();
        }
        LinearDirac::from_spanning(n, &self.space.basis().mul(&d).expect("square"))
    }

    /// `L cap V = {0}`: `L` is the graph of a bivector.
    pub fn is_bivector_graph(&self) -> bool {
        kernel_vectors(self).is_zero()
    }

    /// `L cap V* = {0}`: `L` is the graph of a form.
    pub fn is_form_graph(&self) -> bool {
        conormal(self).is_zero()
    }

    pub fn as_bivector(&self) -> Option<Bivector> {
        self.is_bivector_graph().then(|| quotient_bivector(self).1)
    }

    pub fn as_form(&self) -> Option<SkewForm> {
        self.is_form_graph().then(|| leaf_form(self).1)
    }
}

/// `graph(Omega) = {(x, Omega(x, .))}`.
pub fn dirac_from_form(omega: &SkewForm) -> LinearDirac {
    let n = omega.dim();
    let rows = Mat::identity(n).hstack(omega.matrix()).expect("square");
    LinearDirac::from_spanning(n, &rows)
}

/// `graph(pi) = {(pi(eta, .), eta)}`.
pub fn dirac_from_bivector(pi: &Bivector) -> LinearDirac {
    let n = pi.dim();
    let rows = pi.matrix().hstack(&Mat::identity(n)).expect("square");
    LinearDirac::from_spanning(n, &rows)
}

/// Dirac structure with range `r` and leaf form `omega_r`, given in the rref basis of `r`.
pub fn dirac_from_range_form(r: &Subspace, omega_r: &SkewForm) -> Result<LinearDirac, DiracError> {
    check_dim("leaf form on range", r.dim(), omega_r.dim())?;
    let n = r.ambient_dim();
    let mut rows = Mat::zeros(0, 2 * n);
    for i in 0..r.dim() {
        let mut row = r.basis().row(i).to_vec();
        let mut eta = vec![Rat::zero(); n];
        // eta(r_j) = omega[i][j]; rref rows are unit vectors on the pivot columns.
        for (j, &p) in r.pivots().iter().enumerate() {
            eta[p] = omega_r.matrix()[(i, j)].clone();
        }
        row.extend(eta);
        rows.push_row(&row);
    }
    let ann = r.annihilator();
    for i in 0..ann.dim() {
        let mut row = vec![Rat::zero(); n];
        row.extend_from_slice(ann.basis().row(i));
        rows.push_row(&row);
    }
    Ok(LinearDirac::from_spanning(n, &rows))
}

/// Dirac structure with `L cap V = k` and bivector `pi_q` on `V/k` in the quotient coordinates.
pub fn dirac_from_kernel_bivector(k: &Subspace, pi_q: &Bivector) -> Result<LinearDirac, DiracError> {
    let q = Quotient::new(k.clone());
    check_dim("quotient bivector", q.dim(), pi_q.dim())?;
    let n = k.ambient_dim();
    let pr = q.projection();
    let lifted = pi_q.matrix().mul(&q.section())?;
    let mut rows = Mat::zeros(0, 2 * n);
    for i in 0..k.dim() {
        let mut row = k.basis().row(i).to_vec();
        row.extend(std::iter::repeat(Rat::zero()).take(n));
        rows.push_row(&row);
    }
    for c in 0..q.dim() {
        let mut row = lifted.row(c).to_vec();
        row.extend_from_slice(pr.row(c));
        rows.push_row(&row);
    }
    Ok(LinearDirac::from_spanning(n, &rows))
}

/// `rho(L)`, the projection of `L` to `V`.
pub fn rho_range(l: &LinearDirac) -> Subspace {
    Subspace::span(&l.x_parts())
}

/// `rho*(L)`, the projection of `L` to `V*`.
pub fn rho_star_range(l: &LinearDirac) -> Subspace {
    Subspace::span(&l.xi_parts())
}

/// `L cap V`, as a subspace of `V`.
pub fn kernel_vectors(l: &LinearDirac) -> Subspace {
    let n = l.dim_v;
    let v = Subspace::coordinate(2 * n, 0..n);
    let both = l.space.intersect(&v).expect("same ambient");
    Subspace::span(&both.basis().col_range(0, n))
}

/// `L cap V*`, as a subspace of `V*`.
pub fn conormal(l: &LinearDirac) -> Subspace {
    let n = l.dim_v;
    let vstar = Subspace::coordinate(2 * n, n..2 * n);
    let both = l.space.intersect(&vstar).expect("same ambient");
    Subspace::span(&both.basis().col_range(n, 2 * n))
}

/// Finds some `xi` with `(x, xi) in L`.
fn covector_over(l: &LinearDirac, x: &[Rat]) -> Option<Vec<Rat>> {
    let c = crate::exact_linalg::solve_row_combination(&l.x_parts(), x)?;
    let xi = l.xi_parts();
    Some((0..l.dim_v).map(|j| (0..xi.rows()).map(|i| &c[i] * &xi[(i, j)]).sum()).collect())
}

/// Finds some `x` with `(x, xi) in L`.
fn vector_over(l: &LinearDirac, xi: &[Rat]) -> Option<Vec<Rat>> {
    let c = crate::exact_linalg::solve_row_combination(&l.xi_parts(), xi)?;
    let x = l.x_parts();
    Some((0..l.dim_v).map(|j| (0..x.rows()).map(|i| &c[i] * &x[(i, j)]).sum()).collect())
}

/// The presymplectic form on `R = rho(L)`, expressed in the rref basis of `R`.
pub fn leaf_form(l: &LinearDirac) -> (Subspace, SkewForm) {
    let r = rho_range(l);
    let k = r.dim();
    let mut m = Mat::zeros(k, k);
    for i in 0..k {
        let eta = covector_over(l, r.basis().row(i)).expect("basis vector lies in rho(L)");
        for j in 0..k {
            m[(i, j)] = dot(&eta, r.basis().row(j));
        }
    }
    (r, SkewForm(m))
}

/// The bivector on `V/K`, `K = L cap V`, in the quotient coordinates of [`Quotient`].
pub fn quotient_bivector(l: &LinearDirac) -> (Subspace, Bivector) {
    let k = kernel_vectors(l);
    let q = Quotient::new(k.clone());
    let pr = q.projection();
    let mut m = Mat::zeros(q.dim(), q.dim());
    for c in 0..q.dim() {
        // pr^T f_c lies in K° = rho*(L).
        let x = vector_over(l, pr.row(c)).expect("pr^T f_c lies in rho*(L)");
        let px = pr.apply(&x).expect("dims");
        for d in 0..q.dim() {
            m[(c, d)] = px[d].clone();
        }
    }
    (k, Bivector(m))
}

/// A lagrangian relation inside `(W (+) W*) x (V (+) V*)`, with the second
/// factor's pairing negated. The first factor is the target, the second the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRelation {
    target_dim: usize,
    source_dim: usize,
    space: Subspace,
}

fn relation_defect(basis: &Mat, t: usize, s: usize) -> Option<(usize, usize)> {
    let pair = |u: &[Rat], v: &[Rat]| {
        let (ut, us) = u.split_at(2 * t);
        let (vt, vs) = v.split_at(2 * t);
        let left = dot(&ut[t..], &vt[..t]) + dot(&vt[t..], &ut[..t]);
        let right = dot(&us[s..], &vs[..s]) + dot(&vs[s..], &us[..s]);
        left - right
    };
    for i in 0..basis.rows() {
        for j in i..basis.rows() {
            if !pair(basis.row(i), basis.row(j)).is_zero() {
                return Some((i, j));
            }
        }
    }
    None
}

impl LinearRelation {
    pub fn new(target_dim: usize, source_dim: usize, space: Subspace) -> Result<Self, DiracError> {
        let total = 2 * (target_dim + source_dim);
        check_dim("relation ambient", total, space.ambient_dim())?;
        if space.dim() != target_dim + source_dim {
            return Err(DiracError::NotLagrangian(format!(
                "dimension {} != {}",
                space.dim(),
                target_dim + source_dim
            )));
        }
        if let Some((i, j)) = relation_defect(space.basis(), target_dim, source_dim) {
            return Err(DiracError::NotLagrangian(format!("basis rows {i} and {j} pair nontrivially")));
        }
        Ok(LinearRelation {
            target_dim,
            source_dim,
            space,
        })
    }

    fn from_spanning(target_dim: usize, source_dim: usize, rows: &Mat) -> Self {
        let space = Subspace::span(rows);
        debug_assert_eq!(space.dim(), target_dim + source_dim);
        debug_assert!(relation_defect(space.basis(), target_dim, source_dim).is_none());
        LinearRelation {
            target_dim,
            source_dim,
            space,
        }
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn is_lagrangian(&self) -> bool {
        self.space.dim() == self.target_dim + self.source_dim
            && relation_defect(self.space.basis(), self.target_dim, self.source_dim).is_none()
    }

    /// The diagonal `{(x, xi, x, xi)}`, the identity for composition.
    pub fn diagonal(n: usize) -> Self {
        let i2 = Mat::identity(2 * n);
        LinearRelation::from_spanning(n, n, &i2.hstack(&i2).expect("square"))
    }

    /// A Dirac structure viewed as a relation with the zero space as source.
    pub fn from_dirac(l: &LinearDirac) -> Self {
        LinearRelation {
            target_dim: l.dim_v,
            source_dim: 0,
            space: l.space.clone(),
        }
    }

    pub fn to_dirac(&self) -> Option<LinearDirac> {
        (self.source_dim == 0).then(|| LinearDirac {
            dim_v: self.target_dim,
            space: self.space.clone(),
        })
    }
}

/// `F_phi = {(phi x, eta, x, phi* eta)}`, a relation from `V` to `W`.
pub fn forward_relation(phi: &LinearMap) -> LinearRelation {
    let (m, n) = (phi.target_dim(), phi.source_dim());
    let a = phi.matrix();
    let mut rows = Mat::zeros(0, 2 * (m + n));
    for i in 0..n {
        let mut row = vec![Rat::zero(); 2 * (m + n)];
        for j in 0..m {
            row[j] = a[(j, i)].clone();
        }
        row[2 * m + i] = Rat::one();
        rows.push_row(&row);
    }
    for j in 0..m {
        let mut row = vec![Rat::zero(); 2 * (m + n)];
        row[m + j] = Rat::one();
        for i in 0..n {
            row[2 * m + n + i] = a[(j, i)].clone();
        }
        rows.push_row(&row);
    }
    LinearRelation::from_spanning(m, n, &rows)
}

/// `B_phi = {(x, phi* eta, phi x, eta)}`, a relation from `W` to `V`.
pub fn backward_relation(phi: &LinearMap) -> LinearRelation {
    let (m, n) = (phi.target_dim(), phi.source_dim());
    let a = phi.matrix();
    let mut rows = Mat::zeros(0, 2 * (m + n));
    for i in 0..n {
        let mut row = vec![Rat::zero(); 2 * (m + n)];
        row[i] = Rat::one();
        for j in 0..m {
            row[2 * n + j] = a[(j, i)].clone();
        }
        rows.push_row(&row);
    }
    for j in 0..m {
        let mut row = vec![Rat::zero(); 2 * (m + n)];
        for i in 0..n {
            row[n + i] = a[(j, i)].clone();
        }
        row[2 * n + m + j] = Rat::one();
        rows.push_row(&row);
    }
    LinearRelation::from_spanning(n, m, &rows)
}

/// Composition `r1 o r2 = {(x, y) : exists z, (x, z) in r1, (z, y) in r2}`.
pub fn compose(r1: &LinearRelation, r2: &LinearRelation) -> Result<LinearRelation, DiracError> {
    check_dim("relation composition", r1.source_dim, r2.target_dim)?;
    let (a, b, c) = (r1.target_dim, r1.source_dim, r2.source_dim);
    let total = 2 * (a + b + c);
    // r1 x (free y) and (free x) x r2 inside X x Z x Y.
    let lift1 = r1
        .space
        .basis()
        .hstack(&Mat::zeros(r1.space.dim(), 2 * c))?
        .vstack(&Mat::zeros(2 * c, 2 * (a + b)).hstack(&Mat::identity(2 * c))?)?;
    let lift2 = Mat::zeros(r2.space.dim(), 2 * a)
        .hstack(r2.space.basis())?
        .vstack(&Mat::identity(2 * a).hstack(&Mat::zeros(2 * a, 2 * (b + c)))?)?;
    debug_assert_eq!(lift1.cols(), total);
    let joint = Subspace::span(&lift1).intersect(&Subspace::span(&lift2))?;
    let keep: Vec<usize> = (0..2 * a).chain(2 * (a + b)..total).collect();
    let projected = Subspace::span(&joint.basis().select_cols(&keep));
    if projected.dim() != a + c {
        return Err(DiracError::NotLagrangian(format!(
            "composite has dimension {} but should have {}",
            projected.dim(),
            a + c
        )));
    }
    LinearRelation::new(a, c, projected)
}

/// `F_phi(L) = {(phi x, eta) : (x, phi* eta) in L}`.
pub fn forward(phi: &LinearMap, l: &LinearDirac) -> Result<LinearDirac, DiracError> {
    check_dim("forward image", phi.source_dim(), l.dim_v)?;
    let (m, n) = (phi.target_dim(), phi.source_dim());
    let a = phi.matrix();
    // Constraints on (x, eta): c_x . x + (A c_xi) . eta = 0 for c in L°.
    let ann = l.space.annihilator();
    let mut cons = Mat::zeros(0, n + m);
    for i in 0..ann.dim() {
        let row = ann.basis().row(i);
        let mut c = row[..n].to_vec();
        c.extend(a.apply(&row[n..])?);
        cons.push_row(&c);
    }
    let sol = kernel(&cons);
    // (x, eta) -> (A x, eta)
    let push = a.transpose().block_diag(&Mat::identity(m));
    let image = sol.basis().mul(&push)?;
    let out = Subspace::span(&image);
    if out.dim() != m {
        return Err(DiracError::NotDirac {
            what: "forward image",
            reason: format!("dimension {} != {}", out.dim(), m),
        });
    }
    Ok(LinearDirac::from_spanning(m, &image))
}

/// `B_phi(L) = {(x, phi* eta) : (phi x, eta) in L}`.
pub fn backward(phi: &LinearMap, l: &LinearDirac) -> Result<LinearDirac, DiracError> {
    check_dim("backward image", phi.target_dim(), l.dim_v)?;
    let (m, n) = (phi.target_dim(), phi.source_dim());
    let a = phi.matrix();
    // Constraints on (x, eta): (A^T c_y) . x + c_eta . eta = 0 for c in L°.
    let ann = l.space.annihilator();
    let at = a.transpose();
    let mut cons = Mat::zeros(0, n + m);
    for i in 0..ann.dim() {
        let row = ann.basis().row(i);
        let mut c = at.apply(&row[..m])?;
        c.extend_from_slice(&row[m..]);
        cons.push_row(&c);
    }
    let sol = kernel(&cons);
    // (x, eta) -> (x, A^T eta); as rows, eta -> eta A.
    let pull = Mat::identity(n).block_diag(a);
    let image = sol.basis().mul(&pull)?;
    let out = Subspace::span(&image);
    if out.dim() != n {
        return Err(DiracError::NotDirac {
            what: "backward image",
            reason: format!("dimension {} != {}", out.dim(), n),
        });
    }
    Ok(LinearDirac::from_spanning(n, &image))
}

/// Gauge transformation `tau_B(L) = {(x, xi + B(x))}`.
pub fn gauge(b: &SkewForm, l: &LinearDirac) -> Result<LinearDirac, DiracError> {
    check_dim("gauge transformation", l.dim_v, b.dim())?;
    let n = l.dim_v;
    let mut shear = Mat::identity(2 * n);
    for i in 0..n {
        for j in 0..n {
            shear[(i, n + j)] = b.matrix()[(i, j)].clone();
        }
    }
    Ok(LinearDirac::from_spanning(n, &l.space.basis().mul(&shear)?))
}

/// `pi (1 + B pi)^-1`, or `None` when `1 + B pi` is singular.
pub fn gauge_bivector(b: &SkewForm, pi: &Bivector) -> Result<Option<Bivector>, DiracError> {
    check_dim("gauge of bivector", pi.dim(), b.dim())?;
    let n = pi.dim();
    let shift = Mat::identity(n).add(&b.matrix().mul(pi.matrix())?)?;
    Ok(shift
        .inverse()
        .map(|inv| Bivector(pi.matrix().mul(&inv).expect("square"))))
}

/// `F_phi(lv) = lw`.
pub fn is_forward_dirac(phi: &LinearMap, lv: &LinearDirac, lw: &LinearDirac) -> Result<bool, DiracError> {
    check_dim("forward Dirac target", phi.target_dim(), lw.dim_v)?;
    Ok(forward(phi, lv)? == *lw)
}

/// `w^Omega = {x : Omega(x, y) = 0 for all y in w}`.
pub fn presymp_orthogonal(w: &Subspace, omega: &SkewForm) -> Result<Subspace, DiracError> {
    check_dim("presymplectic orthogonal", omega.dim(), w.ambient_dim())?;
    let functionals = w.basis().mul(&omega.matrix().transpose())?;
    Ok(kernel(&functionals))
}

/// Named axioms reported by dual-pair verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// `Omega` is nondegenerate.
    OmegaNondegenerate,
    J1Surjective,
    J2Surjective,
    /// `J1` is forward Dirac from `graph(Omega)` onto `l1`.
    J1ForwardDirac,
    J2ForwardDirac,
    /// `(ker J1)^Omega = ker J2`.
    Ker1OrthogonalIsKer2,
    /// `(ker J2)^Omega = ker J1`.
    Ker2OrthogonalIsKer1,
    /// `(ker J1)^Omega = ker J2 + ker Omega`.
    Ker1OrthogonalIsKer2PlusRadical,
    /// `(ker J2)^Omega = ker J1 + ker Omega`.
    Ker2OrthogonalIsKer1PlusRadical,
    /// The gauged form is symplectic iff both gauged targets are Poisson.
    SymplecticIffPoisson,
}

impl std::fmt::Display for Axiom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Axiom::OmegaNondegenerate => "omega_nondegenerate",
            Axiom::J1Surjective => "j1_surjective",
            Axiom::J2Surjective => "j2_surjective",
            Axiom::J1ForwardDirac => "j1_forward_dirac",
            Axiom::J2ForwardDirac => "j2_forward_dirac",
            Axiom::Ker1OrthogonalIsKer2 => "ker1_orthogonal_is_ker2",
            Axiom::Ker2OrthogonalIsKer1 => "ker2_orthogonal_is_ker1",
            Axiom::Ker1OrthogonalIsKer2PlusRadical => "ker1_orthogonal_is_ker2_plus_radical",
            Axiom::Ker2OrthogonalIsKer1PlusRadical => "ker2_orthogonal_is_ker1_plus_radical",
            Axiom::SymplecticIffPoisson => "symplectic_iff_poisson",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub holds: bool,
}

/// Outcome of an axiom-by-axiom check.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub checks: Vec<AxiomCheck>,
}

impl Verdict {
    fn push(&mut self, axiom: Axiom, holds: bool) {
        self.checks.push(AxiomCheck { axiom, holds });
    }

    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failed(&self) -> Vec<Axiom> {
        self.checks.iter().filter(|c| !c.holds).map(|c| c.axiom).collect()
    }

    pub fn get(&self, axiom: Axiom) -> Option<bool> {
        self.checks.iter().find(|c| c.axiom == axiom).map(|c| c.holds)
    }

    fn require(&self) -> Result<(), DiracError> {
        match self.failed().first() {
            Some(&axiom) => Err(DiracError::Precondition { axiom }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMode {
    Dual,
    Predual,
}

/// `(S, Omega)` with maps `J_i: S -> M_i` and Dirac structures `l_i` on `M_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearDualPairData {
    pub omega: SkewForm,
    pub j1: LinearMap,
    pub j2: LinearMap,
    pub l1: LinearDirac,
    pub l2: LinearDirac,
    /// Whether `J1`, `J2` are required to be surjective.
    pub full: bool,
}

impl LinearDualPairData {
    fn check_shapes(&self) -> Result<(), DiracError> {
        let s = self.omega.dim();
        check_dim("J1 source", s, self.j1.source_dim())?;
        check_dim("J2 source", s, self.j2.source_dim())?;
        check_dim("J1 target", self.l1.dim_v, self.j1.target_dim())?;
        check_dim("J2 target", self.l2.dim_v, self.j2.target_dim())?;
        Ok(())
    }
}

pub fn check_dual_pair(d: &LinearDualPairData, mode: PairMode) -> Result<Verdict, DiracError> {
    d.check_shapes()?;
    let mut v = Verdict::default();
    let graph = dirac_from_form(&d.omega);
    let k1 = d.j1.kernel();
    let k2 = d.j2.kernel();
    let o1 = presymp_orthogonal(&k1, &d.omega)?;
    let o2 = presymp_orthogonal(&k2, &d.omega)?;
    match mode {
        PairMode::Dual => {
            v.push(Axiom::OmegaNondegenerate, d.omega.is_nondegenerate());
            v.push(Axiom::Ker1OrthogonalIsKer2, o1 == k2);
            v.push(Axiom::Ker2OrthogonalIsKer1, o2 == k1);
        }
        PairMode::Predual => {
            let rad = d.omega.kernel();
            v.push(Axiom::Ker1OrthogonalIsKer2PlusRadical, o1 == k2.sum(&rad)?);
            v.push(Axiom::Ker2OrthogonalIsKer1PlusRadical, o2 == k1.sum(&rad)?);
        }
    }
    v.push(Axiom::J1ForwardDirac, forward(&d.j1, &graph)? == d.l1);
    v.push(Axiom::J2ForwardDirac, forward(&d.j2, &graph)? == d.l2);
    if d.full {
        v.push(Axiom::J1Surjective, d.j1.is_surjective());
        v.push(Axiom::J2Surjective, d.j2.is_surjective());
    }
    Ok(v)
}

/// Result of gauging both legs of a dual pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugedPair {
    pub omega_hat: SkewForm,
    pub verdict: Verdict,
    pub omega_hat_nondegenerate: bool,
    /// Whether `tau_{B_i}(l_i)` is the graph of a bivector.
    pub gauged_poisson: [bool; 2],
    pub l1: LinearDirac,
    pub l2: LinearDirac,
}

fn require_full(d: &LinearDualPairData, mode: PairMode) -> Result<(), DiracError> {
    let mut full = d.clone();
    full.full = true;
    check_dual_pair(&full, mode)?.require()
}

/// `Omega^ = Omega + J1* B1 + J2* B2`, with the three conclusions checked exactly.
pub fn gauge_dual_pair(d: &LinearDualPairData, b1: &SkewForm, b2: &SkewForm) -> Result<GaugedPair, DiracError> {
    require_full(d, PairMode::Dual)?;
    let omega_hat = d.omega.add(&b1.pullback(&d.j1)?)?.add(&b2.pullback(&d.j2)?)?;
    let g1 = gauge(b1, &d.l1)?;
    let g2 = gauge(b2, &d.l2)?;
    let graph = dirac_from_form(&omega_hat);
    let nondeg = omega_hat.is_nondegenerate();
    let poisson = [g1.is_bivector_graph(), g2.is_bivector_graph()];

    let mut v = Verdict::default();
    v.push(Axiom::J1ForwardDirac, forward(&d.j1, &graph)? == g1);
    v.push(Axiom::J2ForwardDirac, forward(&d.j2, &graph)? == g2);
    v.push(Axiom::SymplecticIffPoisson, nondeg == (poisson[0] && poisson[1]));
    let o1 = presymp_orthogonal(&d.j1.kernel(), &omega_hat)?;
    v.push(
        Axiom::Ker1OrthogonalIsKer2PlusRadical,
        o1 == d.j2.kernel().sum(&omega_hat.kernel())?,
    );
    Ok(GaugedPair {
        omega_hat,
        verdict: v,
        omega_hat_nondegenerate: nondeg,
        gauged_poisson: poisson,
        l1: g1,
        l2: g2,
    })
}

/// Quotients a full pre-dual pair by `ker Omega` and `ker Omega_{L_i}`.
pub fn reduce_predual(d: &LinearDualPairData) -> Result<LinearDualPairData, DiracError> {
    require_full(d, PairMode::Predual)?;
    let qs = Quotient::new(d.omega.kernel());
    let section = qs.section();
    let omega_red = SkewForm(section.mul(d.omega.matrix())?.mul(&section.transpose())?);
    let reduce_leg = |j: &LinearMap, l: &LinearDirac| -> Result<(LinearMap, LinearDirac), DiracError> {
        let (k, pi) = quotient_bivector(l);
        let pr = Quotient::new(k).projection();
        let jm = pr.mul(j.matrix())?.mul(&section.transpose())?;
        Ok((LinearMap(jm), dirac_from_bivector(&pi)))
    };
    let (j1, l1) = reduce_leg(&d.j1, &d.l1)?;
    let (j2, l2) = reduce_leg(&d.j2, &d.l2)?;
    Ok(LinearDualPairData {
        omega: omega_red,
        j1,
        j2,
        l1,
        l2,
        full: true,
    })
}
