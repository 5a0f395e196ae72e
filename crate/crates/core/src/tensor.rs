//! Dense complex Hermitian linear algebra and multipartite tensor
//! manipulation: Kronecker products, partial trace/transpose, site
//! permutations, Hermitian eigendecomposition, spectral matrix functions,
//! canonical purifications and seeded random states.
//!
//! Conventions: operators are dense row-major over the computational
//! product basis; site 0 is the leftmost Kronecker factor. Eigenvalues at
//! or below `tol::SUPPORT_REL * lambda_max` count as kernel, and matrix
//! pseudo-functions act as zero there.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Ordered list of local dimensions, with an optional per-site (A,B)
/// bipartition used in separability contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteStructure {
    pub dims: Vec<usize>,
    pub bipartition: Option<Vec<(usize, usize)>>,
}

impl SiteStructure {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidArgument("site dims must be >= 2".into()));
        }
        Ok(Self { dims, bipartition: None })
    }

    pub fn with_bipartition(dims: Vec<usize>, bip: Vec<(usize, usize)>) -> Result<Self> {
        let s = Self::new(dims)?;
        if bip.len() != s.dims.len() || bip.iter().zip(&s.dims).any(|(&(a, b), &d)| a * b != d) {
            return Err(Error::InvalidArgument(
                "bipartition factors must multiply to the site dimension".into(),
            ));
        }
        Ok(Self { bipartition: Some(bip), ..s })
    }

    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Row-major strides: index = sum_k i_k * stride_k.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.dims.len();
        let mut s = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.total_dim() != dim {
            return Err(Error::DimMismatch(format!(
                "site structure dim {} vs operator dim {}",
                self.total_dim(),
                dim
            )));
        }
        Ok(())
    }
}

/// Dense Hermitian matrix; ingestion symmetrizes small deviations and
/// rejects anything larger.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    m: CMat,
}

impl HermitianOperator {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimMismatch("non-square matrix".into()));
        }
        if m.nrows() > tol::CAPACITY_DEFAULT {
            return Err(Error::Capacity(format!("dim {} > {}", m.nrows(), tol::CAPACITY_DEFAULT)));
        }
        let scale = 1.0 + m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut dev = 0.0f64;
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if dev > tol::HERMITIZE_REL * scale {
            return Err(Error::NotHermitian(dev));
        }
        let mh = (&m + m.adjoint()).scale(0.5);
        Ok(Self { m: mh })
    }

    /// For matrices Hermitian by construction; still symmetrizes exactly.
    pub(crate) fn from_exact(m: CMat) -> Self {
        let mh = (&m + m.adjoint()).scale(0.5);
        Self { m: mh }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMat::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: CMat::zeros(dim, dim) }
    }

    /// Largest |eigenvalue| (operator norm).
    pub fn op_norm(&self) -> f64 {
        eigh(self).0.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }

    /// Sum of |eigenvalues| (trace norm).
    pub fn trace_norm(&self) -> f64 {
        eigh(self).0.iter().map(|l| l.abs()).sum()
    }
}

/// Hermitian, PSD within tolerance, unit trace within tolerance.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > tol::DENSITY_TRACE_TOL {
            return Err(Error::NotDensity(format!("trace {tr} != 1")));
        }
        let (evals, _) = eigh(&op);
        if evals.iter().any(|&l| l < tol::DENSITY_EIG_FLOOR) {
            return Err(Error::NotDensity(format!(
                "negative eigenvalue {:.3e}",
                evals.iter().cloned().fold(f64::INFINITY, f64::min)
            )));
        }
        Ok(Self { op })
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    /// Trusted constructor for states produced by this library's own
    /// algebra (still exactly Hermitized, not re-spectrally checked).
    pub(crate) fn from_exact(m: CMat) -> Self {
        Self { op: HermitianOperator::from_exact(m) }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn herm(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: HermitianOperator { m: CMat::identity(dim, dim).scale(1.0 / dim as f64) } }
    }
}

/// Normalized complex vector.
#[derive(Debug, Clone)]
pub struct PureState {
    v: CVec,
}

impl PureState {
    pub fn new(v: CVec) -> Result<Self> {
        if (v.norm() - 1.0).abs() > tol::PURE_NORM_TOL {
            return Err(Error::InvalidArgument(format!("vector norm {} != 1", v.norm())));
        }
        Ok(Self { v })
    }

    pub fn from_unnormalized(v: CVec) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::InvalidArgument("zero vector".into()));
        }
        Ok(Self { v: v.unscale(n) })
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = CVec::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        Self { v }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn vector(&self) -> &CVec {
        &self.v
    }

    pub fn projector(&self) -> DensityOperator {
        DensityOperator::from_exact(&self.v * self.v.adjoint())
    }

    pub fn tensor(states: &[&PureState]) -> PureState {
        let mut v = CVec::from_element(1, C64::new(1.0, 0.0));
        for s in states {
            v = kron_vec(&v, &s.v);
        }
        PureState { v }
    }
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// Kronecker product of Hermitian operators, in input order.
pub fn tensor(ops: &[&HermitianOperator]) -> Result<HermitianOperator> {
    let total: usize = ops.iter().map(|o| o.dim()).product();
    if total > tol::CAPACITY_DEFAULT {
        return Err(Error::Capacity(format!("tensor dim {total} > {}", tol::CAPACITY_DEFAULT)));
    }
    let mut m = CMat::identity(1, 1);
    for o in ops {
        m = kron(&m, o.matrix());
    }
    Ok(HermitianOperator::from_exact(m))
}

/// n-fold tensor power of a density operator.
pub fn tensor_power(rho: &DensityOperator, n: usize) -> Result<DensityOperator> {
    let ops: Vec<&HermitianOperator> = std::iter::repeat(rho.herm()).take(n).collect();
    Ok(DensityOperator::from_exact(tensor(&ops)?.into_matrix()))
}

fn check_sites(sites: &[usize], n: usize) -> Result<()> {
    if sites.iter().any(|&i| i >= n) {
        return Err(Error::InvalidArgument(format!("site index out of range (n={n})")));
    }
    let mut seen = vec![false; n];
    for &i in sites {
        if seen[i] {
            return Err(Error::InvalidArgument("duplicate site index".into()));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Partial trace keeping `keep` (in their original order).
pub fn partial_trace_keep(
    op: &HermitianOperator,
    keep: &[usize],
    s: &SiteStructure,
) -> Result<HermitianOperator> {
    s.check_dim(op.dim())?;
    check_sites(keep, s.n_sites())?;
    let n = s.n_sites();
    let strides = s.strides();
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let drop: Vec<usize> = (0..n).filter(|i| !keep_sorted.contains(i)).collect();

    let dk: usize = keep_sorted.iter().map(|&i| s.dims[i]).product();
    let dd: usize = drop.iter().map(|&i| s.dims[i]).product();

    // Enumerate kept/dropped sub-indices and map back to full flat indices.
    let flat = |subidx: usize, sites: &[usize]| -> usize {
        let mut rem = subidx;
        let mut out = 0usize;
        for &site in sites.iter().rev() {
            let d = s.dims[site];
            out += (rem % d) * strides[site];
            rem /= d;
        }
        out
    };

    let kf: Vec<usize> = (0..dk).map(|k| flat(k, &keep_sorted)).collect();
    let df: Vec<usize> = (0..dd).map(|k| flat(k, &drop)).collect();

    let m = op.matrix();
    let mut out = CMat::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for &d in &df {
                acc += m[(kf[a] + d, kf[b] + d)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(HermitianOperator::from_exact(out))
}

/// Partial trace dropping `drop`.
pub fn partial_trace_drop(
    op: &HermitianOperator,
    drop: &[usize],
    s: &SiteStructure,
) -> Result<HermitianOperator> {
    check_sites(drop, s.n_sites())?;
    let keep: Vec<usize> = (0..s.n_sites()).filter(|i| !drop.contains(i)).collect();
    partial_trace_keep(op, &keep, s)
}

/// Conjugation by the permutation unitary: output site k carries input
/// site `perm[k]`.
pub fn permute_sites(
    op: &HermitianOperator,
    perm: &[usize],
    s: &SiteStructure,
) -> Result<HermitianOperator> {
    s.check_dim(op.dim())?;
    let n = s.n_sites();
    if perm.len() != n {
        return Err(Error::InvalidArgument("permutation length mismatch".into()));
    }
    check_sites(perm, n)?; // bijectivity
    let map = permutation_index_map(perm, s);
    let m = op.matrix();
    let dim = op.dim();
    let mut out = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(HermitianOperator::from_exact(out))
}

/// Flat-index map of `permute_sites`: input basis index -> output index.
pub fn permutation_index_map(perm: &[usize], s: &SiteStructure) -> Vec<usize> {
    let n = s.n_sites();
    let strides_in = s.strides();
    let out_dims: Vec<usize> = perm.iter().map(|&p| s.dims[p]).collect();
    let s_out = SiteStructure { dims: out_dims, bipartition: None };
    let strides_out = s_out.strides();
    let dim = s.total_dim();
    let mut map = vec![0usize; dim];
    for (i, slot) in map.iter_mut().enumerate() {
        let mut out = 0usize;
        for k in 0..n {
            let src = perm[k];
            let idx = (i / strides_in[src]) % s.dims[src];
            out += idx * strides_out[k];
        }
        *slot = out;
    }
    map
}

/// Transpose applied on the listed sites only.
pub fn partial_transpose(
    op: &HermitianOperator,
    sites: &[usize],
    s: &SiteStructure,
) -> Result<HermitianOperator> {
    s.check_dim(op.dim())?;
    check_sites(sites, s.n_sites())?;
    let strides = s.strides();
    let m = op.matrix();
    let dim = op.dim();
    let mut out = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut a = i;
            let mut b = j;
            for &site in sites {
                let st = strides[site];
                let d = s.dims[site];
                let ia = (i / st) % d;
                let ib = (j / st) % d;
                a = a - ia * st + ib * st;
                b = b - ib * st + ia * st;
            }
            out[(a, b)] = m[(i, j)];
        }
    }
    Ok(HermitianOperator::from_exact(out))
}

/// Hermitian eigendecomposition, eigenvalues ascending.
pub fn eigh(op: &HermitianOperator) -> (Vec<f64>, CMat) {
    use faer::complex_native::c64;
    let dim = op.dim();
    let m = op.matrix();
    let fm = faer::Mat::<c64>::from_fn(dim, dim, |i, j| c64::new(m[(i, j)].re, m[(i, j)].im));
    let evd = fm.selfadjoint_eigendecomposition(faer::Side::Lower);
    let u = evd.u();
    let s = evd.s().column_vector();
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.sort_by(|&a, &b| s[a].re.partial_cmp(&s[b].re).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| s[i].re).collect();
    let mut vecs = CMat::zeros(dim, dim);
    for (k, &i) in idx.iter().enumerate() {
        for r in 0..dim {
            vecs[(r, k)] = C64::new(u[(r, i)].re, u[(r, i)].im);
        }
    }
    (vals, vecs)
}

/// Kernel cutoff for the given spectrum.
pub fn support_cutoff(evals: &[f64]) -> f64 {
    let lmax = evals.iter().map(|l| l.abs()).fold(0.0, f64::max);
    tol::SUPPORT_REL * lmax
}

#[derive(Debug, Clone, Copy)]
pub enum MatFn {
    Log,
    Sqrt,
    Power(f64),
}

/// Spectral function on the support; zero on the kernel.
pub fn matrix_function(op: &HermitianOperator, f: MatFn) -> HermitianOperator {
    let (evals, u) = eigh(op);
    let cut = support_cutoff(&evals);
    let mapped: Vec<f64> = evals
        .iter()
        .map(|&l| {
            if l <= cut {
                0.0
            } else {
                match f {
                    MatFn::Log => l.ln(),
                    MatFn::Sqrt => l.sqrt(),
                    MatFn::Power(p) => l.powf(p),
                }
            }
        })
        .collect();
    spectral_build(&mapped, &u)
}

/// Assemble U diag(vals) U^dagger.
pub fn spectral_build(vals: &[f64], u: &CMat) -> HermitianOperator {
    let dim = u.nrows();
    let mut d = CMat::zeros(dim, dim);
    for (k, &v) in vals.iter().enumerate() {
        d[(k, k)] = C64::new(v, 0.0);
    }
    HermitianOperator::from_exact(u * d * u.adjoint())
}

/// Orthogonal projector onto the support of `op` (eigenvalues above cutoff).
pub fn support_projector(op: &HermitianOperator) -> HermitianOperator {
    let (evals, u) = eigh(op);
    let cut = support_cutoff(&evals);
    let vals: Vec<f64> = evals.iter().map(|&l| if l > cut { 1.0 } else { 0.0 }).collect();
    spectral_build(&vals, &u)
}

/// |psi> = sum_k sqrt(lambda_k) |u_k> (x) |u_k*> on H (x) H.
pub fn canonical_purification(rho: &DensityOperator) -> Result<PureState> {
    let d = rho.dim();
    if d * d > tol::CAPACITY_DEFAULT {
        return Err(Error::Capacity(format!("purification dim {}", d * d)));
    }
    let (evals, u) = eigh(rho.herm());
    let cut = support_cutoff(&evals);
    let mut v = CVec::zeros(d * d);
    for k in 0..d {
        if evals[k] <= cut {
            continue;
        }
        let w = evals[k].sqrt();
        for a in 0..d {
            for b in 0..d {
                v[a * d + b] += C64::new(w, 0.0) * u[(a, k)] * u[(b, k)].conj();
            }
        }
    }
    PureState::from_unnormalized(v)
}

pub fn random_pure(dim: usize, seed: u64) -> PureState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = CVec::from_fn(dim, |_, _| gaussian_c64(&mut rng));
    PureState::from_unnormalized(v).expect("nonzero with probability 1")
}

/// Wishart draw G G^dagger / tr with G of shape dim x rank.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!("rank {rank} out of 1..={dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMat::from_fn(dim, rank, |_, _| gaussian_c64(&mut rng));
    let m = &g * g.adjoint();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    Ok(DensityOperator::from_exact(m.unscale(tr)))
}

pub(crate) fn gaussian_c64<R: rand::Rng>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Real part of tr[A B] for Hermitian A, B (their trace inner product).
pub fn herm_inner(a: &CMat, b: &CMat) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Embed an operator living on `sites` (in the listed order) into the full
/// structure, identity elsewhere.
pub fn embed_at_sites(
    op: &HermitianOperator,
    sites: &[usize],
    s: &SiteStructure,
) -> Result<HermitianOperator> {
    check_sites(sites, s.n_sites())?;
    let sub_dim: usize = sites.iter().map(|&i| s.dims[i]).product();
    if op.dim() != sub_dim {
        return Err(Error::DimMismatch("embed operator vs listed sites".into()));
    }
    let rest: Vec<usize> = (0..s.n_sites()).filter(|i| !sites.contains(i)).collect();
    let rest_dim: usize = rest.iter().map(|&i| s.dims[i]).product();
    let big = kron(op.matrix(), &CMat::identity(rest_dim, rest_dim));
    // Current layout: [sites..., rest...]; permute back to natural order.
    let layout: Vec<usize> = sites.iter().chain(rest.iter()).cloned().collect();
    let mut perm = vec![0usize; s.n_sites()];
    for (pos, &site) in layout.iter().enumerate() {
        perm[site] = pos; // output site `site` carries layout slot `pos`
    }
    let dims_layout: Vec<usize> = layout.iter().map(|&i| s.dims[i]).collect();
    let s_layout = SiteStructure { dims: dims_layout, bipartition: None };
    permute_sites(&HermitianOperator::from_exact(big), &perm, &s_layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn herm(entries: &[&[C64]]) -> HermitianOperator {
        let n = entries.len();
        HermitianOperator::new(CMat::from_fn(n, n, |i, j| entries[i][j])).unwrap()
    }

    fn bell() -> DensityOperator {
        let mut v = CVec::zeros(4);
        v[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[3] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        PureState::new(v).unwrap().projector()
    }

    #[test]
    fn tensor_identities() {
        let i2 = HermitianOperator::identity(2);
        let t = tensor(&[&i2, &i2]).unwrap();
        assert_eq!(t.dim(), 4);
        assert!((t.matrix() - CMat::identity(4, 4)).norm() < 1e-14);

        let p0 = herm(&[&[c(1.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(0.0, 0.0)]]);
        let p1 = herm(&[&[c(0.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]]);
        let t = tensor(&[&p0, &p1]).unwrap();
        for k in 0..4 {
            let expect = if k == 1 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(t.matrix()[(k, k)].re, expect, epsilon = 1e-15);
        }
    }

    #[test]
    fn tensor_against_hand_kron_oracle() {
        // Oracle: explicit 4x4 Kronecker by index loops.
        let rho = random_density(2, 2, 7).unwrap();
        let sig = random_density(2, 2, 8).unwrap();
        let t = tensor(&[rho.herm(), sig.herm()]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let expect = rho.matrix()[(i, j)] * sig.matrix()[(k, l)];
                        let got = t.matrix()[(2 * i + k, 2 * j + l)];
                        assert!((got - expect).norm() < 1e-14);
                    }
                }
            }
        }
        assert_abs_diff_eq!(t.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_product_and_bell() {
        let rho = random_density(2, 2, 1).unwrap();
        let sig = random_density(2, 2, 2).unwrap();
        let s = SiteStructure::uniform(2, 2).unwrap();
        let t = tensor(&[rho.herm(), sig.herm()]).unwrap();
        let red = partial_trace_drop(&t, &[1], &s).unwrap();
        assert!((red.matrix() - rho.matrix()).norm() < 1e-12);

        let red_b = partial_trace_drop(bell().herm(), &[1], &s).unwrap();
        assert!((red_b.matrix() - CMat::identity(2, 2).scale(0.5)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_index_loop_oracle() {
        // random 2x3 bipartite state vs elementwise summation oracle
        let s = SiteStructure::new(vec![2, 3]).unwrap();
        let rho = random_density(6, 6, 3).unwrap();
        let red = partial_trace_drop(rho.herm(), &[1], &s).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = c(0.0, 0.0);
                for k in 0..3 {
                    acc += rho.matrix()[(3 * a + k, 3 * b + k)];
                }
                assert!((red.matrix()[(a, b)] - acc).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn permute_identity_and_swap() {
        let s = SiteStructure::uniform(2, 2).unwrap();
        let rho = random_density(2, 2, 4).unwrap();
        let sig = random_density(2, 2, 5).unwrap();
        let t = tensor(&[rho.herm(), sig.herm()]).unwrap();
        let same = permute_sites(&t, &[0, 1], &s).unwrap();
        assert!((same.matrix() - t.matrix()).norm() < 1e-14);
        let swapped = permute_sites(&t, &[1, 0], &s).unwrap();
        let expect = tensor(&[sig.herm(), rho.herm()]).unwrap();
        assert!((swapped.matrix() - expect.matrix()).norm() < 1e-13);
    }

    #[test]
    fn permute_composition_property() {
        let s = SiteStructure::uniform(3, 2).unwrap();
        let rho = random_density(8, 8, 6).unwrap();
        // perm maps output slot k to source perm[k]; composing two permutes
        let p1 = [2usize, 0, 1];
        let p2 = [1usize, 2, 0];
        let a = permute_sites(&permute_sites(rho.herm(), &p1, &s).unwrap(), &p2, &s).unwrap();
        let combined: Vec<usize> = p2.iter().map(|&k| p1[k]).collect();
        let b = permute_sites(rho.herm(), &combined, &s).unwrap();
        assert!((a.matrix() - b.matrix()).norm() < 1e-12);
    }

    #[test]
    fn bell_partial_transpose_eigenvalue() {
        let s = SiteStructure::uniform(2, 2).unwrap();
        let pt = partial_transpose(bell().herm(), &[1], &s).unwrap();
        let (evals, _) = eigh(&pt);
        assert_abs_diff_eq!(evals[0], -0.5, epsilon = 1e-12);
    }

    #[test]
    fn eigh_and_matrix_functions() {
        let i4 = HermitianOperator::identity(4);
        let (evals, u) = eigh(&i4);
        assert!(evals.iter().all(|&l| (l - 1.0).abs() < 1e-12));
        assert!((u.adjoint() * &u - CMat::identity(4, 4)).norm() < 1e-10);

        let d = herm(&[
            &[c(std::f64::consts::E, 0.0), c(0.0, 0.0)],
            &[c(0.0, 0.0), c(std::f64::consts::E.powi(2), 0.0)],
        ]);
        let l = matrix_function(&d, MatFn::Log);
        assert_abs_diff_eq!(l.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l.matrix()[(1, 1)].re, 2.0, epsilon = 1e-12);

        let rho = random_density(5, 5, 11).unwrap();
        let sq = matrix_function(rho.herm(), MatFn::Sqrt);
        let back = sq.matrix() * sq.matrix();
        assert!((back - rho.matrix()).norm() < 1e-9);

        // log(sqrt(rho)) = log(rho)/2 on support
        let lg_sq = matrix_function(&sq, MatFn::Log);
        let lg = matrix_function(rho.herm(), MatFn::Log);
        assert!((lg_sq.matrix() - lg.matrix().scale(0.5)).norm() < 1e-8);
    }

    #[test]
    fn eigh_reconstruction_residual() {
        let rho = random_density(9, 4, 13).unwrap();
        let (evals, u) = eigh(rho.herm());
        let rebuilt = spectral_build(&evals, &u);
        let scale = rho.herm().op_norm();
        assert!((rebuilt.matrix() - rho.matrix()).norm() <= 1e-9 * (1.0 + scale));
        let tr: f64 = evals.iter().sum();
        assert_abs_diff_eq!(tr, 1.0, epsilon = 1e-9 * 9.0);
    }

    #[test]
    fn purification_recovers_state() {
        let rho = random_density(3, 3, 17).unwrap();
        let psi = canonical_purification(&rho).unwrap();
        let s = SiteStructure::new(vec![3, 3]).unwrap();
        let red = partial_trace_drop(psi.projector().herm(), &[1], &s).unwrap();
        assert!((red.matrix() - rho.matrix()).norm() < 1e-9);

        // I/2 purifies to a maximally entangled state
        let half = DensityOperator::maximally_mixed(2);
        let phi = canonical_purification(&half).unwrap();
        let s2 = SiteStructure::uniform(2, 2).unwrap();
        let red2 = partial_trace_drop(phi.projector().herm(), &[1], &s2).unwrap();
        assert!((red2.matrix() - CMat::identity(2, 2).scale(0.5)).norm() < 1e-10);
    }

    #[test]
    fn purification_permutation_invariance_commuting() {
        // Commuting (diagonal) permutation-invariant two-site state: the
        // purification must be invariant under swapping both factors'
        // sites simultaneously.
        let s = SiteStructure::uniform(2, 2).unwrap();
        let p = CMat::from_diagonal(&CVec::from_vec(vec![
            c(0.4, 0.0),
            c(0.1, 0.0),
            c(0.1, 0.0),
            c(0.4, 0.0),
        ]));
        let rho = DensityOperator::from_matrix(p).unwrap();
        let psi = canonical_purification(&rho).unwrap();
        let proj = psi.projector();
        let s4 = SiteStructure::uniform(4, 2).unwrap();
        let _ = s;
        // factors are sites (0,1) and (2,3); swap within both
        let swapped = permute_sites(proj.herm(), &[1, 0, 3, 2], &s4).unwrap();
        assert!((swapped.matrix() - proj.matrix()).norm() < 1e-9);
    }

    #[test]
    fn random_density_properties() {
        let one = random_density(1, 1, 0).unwrap();
        assert_abs_diff_eq!(one.matrix()[(0, 0)].re, 1.0, epsilon = 1e-14);

        let a = random_density(4, 2, 42).unwrap();
        let b = random_density(4, 2, 42).unwrap();
        assert_eq!(a.matrix(), b.matrix());

        let r1 = random_density(4, 1, 9).unwrap();
        let (evals, _) = eigh(r1.herm());
        assert!(evals[2].abs() <= 1e-10);
    }

    #[test]
    fn trace_inner_product_adjointness() {
        // tr[partial_trace(X, drop 1) * Y] = tr[X * (Y (x) I)]
        let s = SiteStructure::uniform(2, 2).unwrap();
        let x = random_density(4, 4, 21).unwrap();
        let y = random_density(2, 2, 22).unwrap();
        let lhs = herm_inner(
            partial_trace_drop(x.herm(), &[1], &s).unwrap().matrix(),
            y.matrix(),
        );
        let y_full = embed_at_sites(y.herm(), &[0], &s).unwrap();
        let rhs = herm_inner(x.matrix(), y_full.matrix());
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn embed_at_middle_site() {
        let s = SiteStructure::uniform(3, 2).unwrap();
        let y = random_density(2, 2, 31).unwrap();
        let e = embed_at_sites(y.herm(), &[1], &s).unwrap();
        let i2 = HermitianOperator::identity(2);
        let expect = tensor(&[&i2, y.herm(), &i2]).unwrap();
        assert!((e.matrix() - expect.matrix()).norm() < 1e-13);
    }

    #[test]
    fn capacity_guard() {
        let i2 = HermitianOperator::identity(2);
        let ops: Vec<&HermitianOperator> = std::iter::repeat(&i2).take(15).collect();
        assert!(matches!(tensor(&ops), Err(Error::Capacity(_))));
    }
}
