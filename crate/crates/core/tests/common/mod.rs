#![allow(dead_code)]

use dirackit::dirac_linear::{
    dirac_from_form, dirac_from_kernel_bivector, dirac_from_range_form, forward, Bivector, LinearDirac,
    LinearDualPairData, LinearMap, Quotient, SkewForm,
};
use dirackit::exact_linalg::{rat, Mat, Rat, Subspace};
use dirackit::surface_expr::Point;
use dirackit::surface_poisson::SurfaceFunction;
use dirackit::tree_invariant::WeightedTree;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Gen(pub ChaCha8Rng);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.0.gen_range(lo..=hi)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.0.gen_bool(p)
    }

    pub fn mat(&mut self, rows: usize, cols: usize) -> Mat {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = rat(self.int(-3, 3));
            }
        }
        m
    }

    /// Random matrix of rank at most `r`.
    pub fn low_rank(&mut self, rows: usize, cols: usize, r: usize) -> Mat {
        self.mat(rows, r).mul(&self.mat(r, cols)).unwrap()
    }

    pub fn skew(&mut self, n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = rat(self.int(-3, 3));
                m[(j, i)] = -v.clone();
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn skew_form(&mut self, n: usize) -> SkewForm {
        SkewForm::new(self.skew(n)).unwrap()
    }

    pub fn bivector(&mut self, n: usize) -> Bivector {
        Bivector::new(self.skew(n)).unwrap()
    }

    /// Unit lower times unit upper triangular, then a row shuffle.
    pub fn invertible(&mut self, n: usize) -> Mat {
        let mut l = Mat::identity(n);
        let mut u = Mat::identity(n);
        for i in 0..n {
            for j in 0..i {
                l[(i, j)] = rat(self.int(-2, 2));
                u[(j, i)] = rat(self.int(-2, 2));
            }
        }
        let m = l.mul(&u).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut self.0);
        Mat::from_rows(order.iter().map(|&i| m.row(i).to_vec()).collect(), n).unwrap()
    }

    pub fn map(&mut self, target: usize, source: usize) -> LinearMap {
        let r = self.int(0, target.min(source) as i64) as usize;
        if self.chance(0.5) {
            LinearMap::new(self.mat(target, source))
        } else {
            LinearMap::new(self.low_rank(target, source, r))
        }
    }

    pub fn surjective(&mut self, target: usize, source: usize) -> LinearMap {
        assert!(target <= source);
        let m = self.invertible(source);
        LinearMap::new(Mat::from_rows(m.row_vecs()[..target].to_vec(), source).unwrap())
    }

    pub fn injective(&mut self, target: usize, source: usize) -> LinearMap {
        assert!(target >= source);
        LinearMap::new(self.invertible(target).col_range(0, source))
    }

    pub fn subspace(&mut self, n: usize) -> Subspace {
        let k = self.int(0, n as i64) as usize;
        Subspace::span(&self.mat(k, n))
    }

    /// Mixes the range/form and kernel/bivector descriptions.
    pub fn dirac(&mut self, n: usize) -> LinearDirac {
        let s = self.subspace(n);
        if self.chance(0.5) {
            let form = self.skew_form(s.dim());
            dirac_from_range_form(&s, &form).unwrap()
        } else {
            let pi = self.bivector(n - s.dim());
            dirac_from_kernel_bivector(&s, &pi).unwrap()
        }
    }

    /// `P^T J P` for the standard symplectic `J` on `Q^(2m)`.
    pub fn symplectic(&mut self, m: usize) -> SkewForm {
        let mut j = Mat::zeros(2 * m, 2 * m);
        for i in 0..m {
            j[(2 * i, 2 * i + 1)] = Rat::one();
            j[(2 * i + 1, 2 * i)] = -Rat::one();
        }
        let p = self.invertible(2 * m);
        SkewForm::new(p.transpose().mul(&j).unwrap().mul(&p).unwrap()).unwrap()
    }

    /// A full dual pair: random surjective `J1`, and `J2` with kernel `(ker J1)^Omega`.
    pub fn dual_pair(&mut self, half_dim: usize) -> LinearDualPairData {
        let omega = self.symplectic(half_dim);
        let s = 2 * half_dim;
        let r = self.int(0, s as i64) as usize;
        let j1 = self.surjective(r, s);
        let k2 = dirackit::dirac_linear::presymp_orthogonal(&j1.kernel(), &omega).unwrap();
        let q = Quotient::new(k2);
        let j2 = LinearMap::new(self.invertible(q.dim()).mul(&q.projection()).unwrap());
        let graph = dirac_from_form(&omega);
        LinearDualPairData {
            l1: forward(&j1, &graph).unwrap(),
            l2: forward(&j2, &graph).unwrap(),
            omega,
            j1,
            j2,
            full: true,
        }
    }

    pub fn unit(&mut self) -> f64 {
        self.0.gen::<f64>()
    }

    /// A random tree on `n` vertices with weights on a lattice of spacing `10 * tol`.
    pub fn tree(&mut self, n: usize, tol: f64) -> WeightedTree {
        let mut parent = vec![0usize; n];
        let mut depth = vec![0usize; n];
        let mut edges = Vec::new();
        for v in 1..n {
            parent[v] = self.0.gen_range(0..v);
            depth[v] = depth[parent[v]] + 1;
            let w = 10.0 * tol * self.int(100, 400) as f64;
            edges.push((parent[v], v, w));
        }
        let root: i8 = if self.chance(0.5) { 1 } else { -1 };
        let signs = depth.iter().map(|d| if d % 2 == 0 { root } else { -root }).collect();
        WeightedTree::new(signs, edges).unwrap()
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut self.0);
        p
    }
}

/// Determinant by fraction-free elimination, kept apart from the library's rref.
pub fn det(m: &Mat) -> Rat {
    let n = m.rows();
    let mut a: Vec<Vec<Rat>> = m.row_vecs();
    let mut sign = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Rat::zero();
        };
        if p != c {
            a.swap(p, c);
            sign = -sign;
        }
        for r in c + 1..n {
            let f = &a[r][c] / &a[c][c];
            for k in c..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
            }
        }
    }
    (0..n).fold(sign, |acc, i| acc * &a[i][i])
}

/// Every pair of basis rows `(x, xi)` of `l` pairs to zero, and `dim L = dim V`.
pub fn maximally_isotropic(l: &LinearDirac) -> bool {
    let n = l.dim_v();
    let b = l.space().basis();
    if b.rows() != n || b.cols() != 2 * n || b.rank() != n {
        return false;
    }
    (0..n).all(|i| {
        (0..n).all(|j| {
            let s: Rat = (0..n).map(|k| &b[(i, n + k)] * &b[(j, k)] + &b[(j, n + k)] * &b[(i, k)]).sum();
            s.is_zero()
        })
    })
}

/// Central finite-difference gradient.
pub fn fd_gradient(f: &SurfaceFunction, z: f64, theta: f64) -> (f64, f64) {
    let h = 1e-6;
    let v = |z: f64, theta: f64| f.value(Point { z, theta }).unwrap();
    (
        (v(z + h, theta) - v(z - h, theta)) / (2.0 * h),
        (v(z, theta + h) - v(z, theta - h)) / (2.0 * h),
    )
}

fn wrap_angle(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    a - t * (a / t).round()
}

/// First-return time of the flow of `(-f_theta, f_z)` from `start`, by RK4 with
/// step `dt`. Return is detected when the trajectory crosses the plane through
/// `start` normal to the initial velocity, after leaving a neighborhood of it.
pub fn rk4_period(f: &SurfaceFunction, start: Point, dt: f64, t_max: f64) -> Option<f64> {
    let field = |z: f64, th: f64| {
        let (fz, ft) = fd_gradient(f, z, th);
        (-ft, fz)
    };
    let (z0, t0) = (start.z, start.theta);
    let n0 = field(z0, t0);
    let speed = n0.0.hypot(n0.1);
    let side = |z: f64, th: f64| ((z - z0) * n0.0 + wrap_angle(th - t0) * n0.1) / speed;
    let dist = |z: f64, th: f64| (z - z0).hypot(wrap_angle(th - t0));
    let (mut z, mut th, mut t) = (z0, t0, 0.0);
    let mut left = false;
    let mut prev = side(z, th);
    while t < t_max {
        let k1 = field(z, th);
        let k2 = field(z + 0.5 * dt * k1.0, th + 0.5 * dt * k1.1);
        let k3 = field(z + 0.5 * dt * k2.0, th + 0.5 * dt * k2.1);
        let k4 = field(z + dt * k3.0, th + dt * k3.1);
        z += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        th += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        t += dt;
        let s = side(z, th);
        let near = dist(z, th) < 20.0 * speed * dt;
        if !near {
            left = true;
        }
        if left && near && prev < 0.0 && s >= 0.0 {
            return Some(t - dt * s / (s - prev));
        }
        prev = s;
    }
    None
}
