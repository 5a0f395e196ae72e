//! Constructive machinery for almost-iid states: defect-pattern bases,
//! symmetrization, seeded ensemble generation, pinching to blocks,
//! type-class states, symmetric-subspace projectors, and the rotation
//! unitary that sends a computational basis vector to a given pure state.
//!
//! An almost-iid state on n sites along a site state sigma_A admits an
//! extension supported on the span of vectors equal to a fixed
//! purification theta on all but at most r sites, and invariant under
//! simultaneous (A_i, E_i) <-> (A_j, E_j) swaps.

use rand::SeedableRng;

use crate::divergence::{ExtendedReal, dmax, fidelity};
use crate::error::{Error, Result};
use crate::tensor::{C64, CMat, CVec, DensityOperator, HermitianOperator, PureState,
    SiteStructure, eigh, partial_trace_keep, permute_sites, tensor_power};
use crate::tol;

/// Multiset of symbol counts over an alphabet, summing to the word length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDistribution {
    counts: Vec<usize>,
}

impl TypeDistribution {
    pub fn new(counts: Vec<usize>, ell: usize) -> Result<Self> {
        if counts.iter().sum::<usize>() != ell {
            return Err(Error::InvalidArgument(format!(
                "type counts sum {} != length {ell}",
                counts.iter().sum::<usize>()
            )));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }
}

/// Unitary with the continuous closed form
/// U = I + (|theta><xi| - |xi><theta|)
///       + (1 + <xi|theta>)^{-1} (|theta><xi| - |xi><theta|)^2,
/// mapping xi to theta after fixing theta's global phase so that
/// <xi|theta> >= 0. Returns (U, phase-fixed theta).
pub fn rotation_unitary(xi: &PureState, theta: &PureState) -> Result<(CMat, PureState)> {
    if xi.dim() != theta.dim() {
        return Err(Error::DimMismatch("rotation endpoints".into()));
    }
    let d = xi.dim();
    let overlap: C64 = xi.vector().dotc(theta.vector());
    let phase = if overlap.norm() > 1e-15 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    let th: CVec = theta.vector().map(|x| x * phase.conj());
    let c = overlap.norm();

    let xiv = xi.vector();
    // K = |theta><xi| - |xi><theta|
    let k = &th * xiv.adjoint() - xiv * th.adjoint();
    let u = CMat::identity(d, d) + &k + (&k * &k).scale(1.0 / (1.0 + c));

    let residual = (&u * u.adjoint() - CMat::identity(d, d)).norm();
    debug_assert!(residual <= 1e-10, "unitarity residual {residual}");
    let mapped = &u * xiv;
    let map_err = (&mapped - &th).norm();
    if map_err > 1e-9 {
        return Err(Error::InvalidArgument(format!("rotation mapping residual {map_err}")));
    }
    Ok((u, PureState::from_unnormalized(th)?))
}

/// Columns: phase-fixed theta followed by an orthonormal completion.
pub fn orthonormal_completion(theta: &PureState) -> Result<CMat> {
    let (u, _) = rotation_unitary(&PureState::basis(theta.dim(), 0), theta)?;
    Ok(u)
}

/// Uniform superposition over the type class of Q, in the computational
/// basis of dim d^ell.
pub fn type_state(ell: usize, d: usize, q: &TypeDistribution) -> Result<PureState> {
    if q.counts.len() != d {
        return Err(Error::InvalidArgument("type alphabet size mismatch".into()));
    }
    let total = d.checked_pow(ell as u32).ok_or_else(|| Error::Capacity("d^ell".into()))?;
    if total > tol::CAPACITY_DEFAULT {
        return Err(Error::Capacity(format!("type state dim {total}")));
    }
    let mut v = CVec::zeros(total);
    let mut count = 0usize;
    let mut word = vec![0usize; ell];
    // enumerate all words, keep those with the requested type
    'outer: loop {
        let mut tally = vec![0usize; d];
        for &w in &word {
            tally[w] += 1;
        }
        if tally == q.counts {
            let idx: usize = word.iter().fold(0, |acc, &w| acc * d + w);
            v[idx] = C64::new(1.0, 0.0);
            count += 1;
        }
        for k in (0..ell).rev() {
            word[k] += 1;
            if word[k] < d {
                continue 'outer;
            }
            word[k] = 0;
        }
        break;
    }
    if count == 0 {
        return Err(Error::InvalidArgument("empty type class".into()));
    }
    PureState::from_unnormalized(v.scale(1.0 / (count as f64).sqrt()))
}

/// Projector onto the span of type states whose distinguished-symbol
/// count is at least ell - r, in the basis whose distinguished element
/// is theta.
pub fn sym_subspace_projector(theta: &PureState, ell: usize, r: usize) -> Result<HermitianOperator> {
    let d = theta.dim();
    let total = d.checked_pow(ell as u32).ok_or_else(|| Error::Capacity("d^ell".into()))?;
    if total > tol::CAPACITY_DEFAULT {
        return Err(Error::Capacity(format!("projector dim {total}")));
    }
    let mut p0 = CMat::zeros(total, total);
    let mut stack = vec![(vec![0usize; d], 0usize, ell)];
    // enumerate types Q with Q[0] >= ell - r
    let mut types: Vec<Vec<usize>> = Vec::new();
    while let Some((mut counts, idx, rem)) = stack.pop() {
        if idx == d - 1 {
            counts[idx] = rem;
            if counts[0] + r >= ell {
                types.push(counts);
            }
            continue;
        }
        for c in 0..=rem {
            let mut next = counts.clone();
            next[idx] = c;
            stack.push((next, idx + 1, rem - c));
        }
    }
    for counts in types {
        let q = TypeDistribution::new(counts, ell)?;
        let ts = type_state(ell, d, &q)?;
        p0 += ts.vector() * ts.vector().adjoint();
    }
    let u = orthonormal_completion(theta)?;
    let mut un = CMat::identity(1, 1);
    for _ in 0..ell {
        un = crate::tensor::kron(&un, &u);
    }
    Ok(HermitianOperator::from_exact(&un * p0 * un.adjoint()))
}

/// (1/n!) sum_pi pi(op); n <= 8.
pub fn symmetrize(op: &HermitianOperator, s: &SiteStructure) -> Result<HermitianOperator> {
    let n = s.n_sites();
    if n > 8 {
        return Err(Error::Capacity(format!("symmetrize over {n}! permutations")));
    }
    let mut acc = CMat::zeros(op.dim(), op.dim());
    let mut count = 0usize;
    let mut perm: Vec<usize> = (0..n).collect();
    // Heap's algorithm
    let mut c = vec![0usize; n];
    acc += permute_sites(op, &perm, s)?.matrix();
    count += 1;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            acc += permute_sites(op, &perm, s)?.matrix();
            count += 1;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(HermitianOperator::from_exact(acc.scale(1.0 / count as f64)))
}

/// Defect-pattern basis together with a coefficient matrix: everything
/// needed to realize an almost-iid extension explicitly.
#[derive(Debug, Clone)]
pub struct AlmostIIDEnsemble {
    pub theta: PureState,
    pub d_a: usize,
    pub d_e: usize,
    pub n: usize,
    pub r: usize,
    /// per-site labels of each basis vector; 0 = theta, k > 0 = k-th
    /// orthonormal completion vector
    pub labels: Vec<Vec<u8>>,
    /// columns are the basis vectors, dim (d_a d_e)^n x |T|
    pub basis: CMat,
    pub beta: CMat,
}

impl AlmostIIDEnsemble {
    pub fn card_t(&self) -> usize {
        self.labels.len()
    }

    /// Site structure of the extension: n sites of dim d_a * d_e.
    pub fn site_structure(&self) -> SiteStructure {
        SiteStructure::uniform(self.n, self.d_a * self.d_e).unwrap()
    }

    /// 2n-site refinement alternating A and E factors.
    pub fn refined_structure(&self) -> SiteStructure {
        let mut dims = Vec::with_capacity(2 * self.n);
        for _ in 0..self.n {
            dims.push(self.d_a);
            dims.push(self.d_e);
        }
        SiteStructure::new(dims).unwrap()
    }

    /// The extension rho_{A^n E^n} = V beta V^dag.
    pub fn extension(&self) -> DensityOperator {
        DensityOperator::from_exact(&self.basis * &self.beta * self.basis.adjoint())
    }

    /// The A^n marginal.
    pub fn a_marginal(&self) -> Result<DensityOperator> {
        let s2 = self.refined_structure();
        let keep: Vec<usize> = (0..self.n).map(|i| 2 * i).collect();
        Ok(DensityOperator::from_exact(
            partial_trace_keep(self.extension().herm(), &keep, &s2)?.into_matrix(),
        ))
    }
}

/// Enumerate per-site label vectors with at most r nonzero entries and
/// build the orthonormal basis of span V(H^(x)n, theta^(x)(n-r)).
pub fn almost_iid_basis(
    theta: &PureState,
    n: usize,
    r: usize,
) -> Result<(Vec<Vec<u8>>, CMat)> {
    if r > n {
        return Err(Error::InvalidArgument(format!("r {r} > n {n}")));
    }
    let d = theta.dim();
    let total = d.checked_pow(n as u32).ok_or_else(|| Error::Capacity("d^n".into()))?;
    if total > tol::CAPACITY_DEFAULT {
        return Err(Error::Capacity(format!("almost-iid basis dim {total}")));
    }
    let u = orthonormal_completion(theta)?;
    let cols: Vec<CVec> = (0..d).map(|k| u.column(k).into_owned()).collect();

    let mut labels: Vec<Vec<u8>> = Vec::new();
    let mut word = vec![0u8; n];
    'outer: loop {
        if word.iter().filter(|&&w| w != 0).count() <= r {
            labels.push(word.clone());
        }
        for k in (0..n).rev() {
            word[k] += 1;
            if (word[k] as usize) < d {
                continue 'outer;
            }
            word[k] = 0;
        }
        break;
    }

    let mut basis = CMat::zeros(total, labels.len());
    for (t, lab) in labels.iter().enumerate() {
        let mut v = CVec::from_element(1, C64::new(1.0, 0.0));
        for &l in lab {
            let col = &cols[l as usize];
            let mut next = CVec::zeros(v.len() * d);
            for (a, va) in v.iter().enumerate() {
                for (b, vb) in col.iter().enumerate() {
                    next[a * d + b] = va * vb;
                }
            }
            v = next;
        }
        basis.set_column(t, &v);
    }
    Ok((labels, basis))
}

/// Number of basis vectors: sum_{f <= r} C(n,f) (d-1)^f.
pub fn almost_iid_basis_size(n: usize, r: usize, d: usize) -> usize {
    let mut total = 0usize;
    for f in 0..=r.min(n) {
        let mut c = 1usize;
        for k in 0..f {
            c = c * (n - k) / (k + 1);
        }
        total += c * (d - 1).pow(f as u32);
    }
    total
}

/// Seeded ensemble: Wishart coefficient matrix on the defect basis,
/// symmetrized exactly through the induced permutation action on basis
/// indices (site permutations map basis vectors to basis vectors).
pub fn random_ensemble(
    theta: &PureState,
    d_a: usize,
    d_e: usize,
    n: usize,
    r: usize,
    seed: u64,
) -> Result<AlmostIIDEnsemble> {
    if d_a * d_e != theta.dim() {
        return Err(Error::DimMismatch("theta vs AE factors".into()));
    }
    let (labels, basis) = almost_iid_basis(theta, n, r)?;
    let t = labels.len();

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut g = CMat::zeros(t, t);
    for v in g.iter_mut() {
        *v = crate::tensor::gaussian_c64(&mut rng);
    }
    let w = &g * g.adjoint();
    let tr: f64 = (0..t).map(|i| w[(i, i)].re).sum();
    let beta_raw = w.scale(1.0 / tr);

    // index lookup for the permutation action
    let index: std::collections::HashMap<Vec<u8>, usize> =
        labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
    let mut beta = CMat::zeros(t, t);
    let mut count = 0usize;
    let mut perm: Vec<usize> = (0..n).collect();
    let apply = |perm: &[usize], beta: &mut CMat, count: &mut usize| {
        let map: Vec<usize> = labels
            .iter()
            .map(|lab| {
                let permuted: Vec<u8> = (0..n).map(|k| lab[perm[k]]).collect();
                index[&permuted]
            })
            .collect();
        for i in 0..t {
            for j in 0..t {
                beta[(map[i], map[j])] += beta_raw[(i, j)];
            }
        }
        *count += 1;
    };
    let mut c = vec![0usize; n];
    apply(&perm, &mut beta, &mut count);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            apply(&perm, &mut beta, &mut count);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    beta = beta.scale(1.0 / count as f64);

    Ok(AlmostIIDEnsemble { theta: theta.clone(), d_a, d_e, n, r, labels, basis, beta })
}

/// Seeded almost-iid state and its A-marginal. The span-support and
/// permutation-invariance defining conditions are re-verified on the
/// constructed state.
pub fn random_almost_iid(
    theta: &PureState,
    d_a: usize,
    d_e: usize,
    n: usize,
    r: usize,
    seed: u64,
) -> Result<(DensityOperator, DensityOperator)> {
    let e = random_ensemble(theta, d_a, d_e, n, r, seed)?;
    let rho = e.extension();
    // support within span V: residual after compressing to the span
    let proj = &e.basis * e.basis.adjoint();
    let residual =
        HermitianOperator::from_exact(rho.matrix() - &proj * rho.matrix() * &proj).trace_norm();
    if residual > 1e-9 {
        return Err(Error::InvalidArgument(format!("span-support residual {residual}")));
    }
    let rho_a = e.a_marginal()?;
    Ok((rho, rho_a))
}

/// Pinch the extension to its basis diagonal. Verifies the operator
/// inequality |T| * pinched - state >= -1e-8 (in basis coordinates,
/// where it reduces to |T| diag(beta) - beta).
pub fn pinch_to_blocks(e: &AlmostIIDEnsemble) -> Result<(DensityOperator, usize)> {
    let t = e.card_t();
    let mut diag = CMat::zeros(t, t);
    for i in 0..t {
        diag[(i, i)] = e.beta[(i, i)];
    }
    let gap = HermitianOperator::from_exact(diag.scale(t as f64) - &e.beta);
    let (ev, _) = eigh(&gap);
    let min_ev = ev.first().copied().unwrap_or(0.0);
    if min_ev < -1e-8 {
        return Err(Error::InvalidArgument(format!("pinching inequality violated: {min_ev}")));
    }
    let sigma_tilde = DensityOperator::from_exact(&e.basis * diag * e.basis.adjoint());
    Ok((sigma_tilde, t))
}

/// Per-copy max-relative entropy of the pinched A-marginal against
/// sigma_site^(x)n, asserted against (r/n) log(1/lambda_min(sigma_site)).
/// sigma_site should be theta's A-marginal for the bound to apply.
pub fn dmax_pinched_vs_iid(e: &AlmostIIDEnsemble, sigma_site: &DensityOperator) -> Result<f64> {
    let (ev, _) = eigh(sigma_site.herm());
    let lmin = ev.first().copied().unwrap_or(0.0);
    if lmin <= 0.0 {
        return Err(Error::InvalidArgument("sigma_site must be full rank".into()));
    }
    let (sigma_tilde, _) = pinch_to_blocks(e)?;
    let s2 = e.refined_structure();
    let keep: Vec<usize> = (0..e.n).map(|i| 2 * i).collect();
    let pinched_a = DensityOperator::from_exact(
        partial_trace_keep(sigma_tilde.herm(), &keep, &s2)?.into_matrix(),
    );
    let iid = tensor_power(sigma_site, e.n)?;
    let val = match dmax(&pinched_a, &iid)? {
        ExtendedReal::Finite(v) => v,
        ExtendedReal::Inf => {
            return Err(Error::InvalidArgument("pinched marginal escapes iid support".into()));
        }
    };
    let per_copy = val / e.n as f64;
    let bound = (e.r as f64 / e.n as f64) * (1.0 / lmin).ln();
    if per_copy > bound + 1e-7 {
        return Err(Error::InvalidArgument(format!(
            "pinched dmax per copy {per_copy} exceeds bound {bound}"
        )));
    }
    Ok(per_copy)
}

#[derive(Debug, Clone)]
pub struct FidelityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub card_t: usize,
    pub pass: bool,
}

/// F(omega_n, rho_n) <= F(omega_{n-r}, rho_site^(x)(n-r)) * |T|^2 for
/// permutation-invariant omega_n on the A^n sites.
pub fn fidelity_almost_iid_check(
    omega_n: &DensityOperator,
    e: &AlmostIIDEnsemble,
    rho_site: &DensityOperator,
) -> Result<FidelityReport> {
    let rho_n = e.a_marginal()?;
    if omega_n.dim() != rho_n.dim() {
        return Err(Error::DimMismatch("fidelity check operands".into()));
    }
    let lhs = fidelity(omega_n, &rho_n)?;
    let s = SiteStructure::uniform(e.n, e.d_a)?;
    let keep: Vec<usize> = (0..e.n - e.r).collect();
    let omega_marg = DensityOperator::from_exact(
        partial_trace_keep(omega_n.herm(), &keep, &s)?.into_matrix(),
    );
    let f_marg = fidelity(&omega_marg, &tensor_power(rho_site, e.n - e.r)?)?;
    let t = e.card_t() as f64;
    let rhs = f_marg * t * t;
    let pass = lhs <= rhs + 1e-7;
    Ok(FidelityReport { lhs, rhs, card_t: e.card_t(), pass })
}

/// log |T| <= n h(r/n) + r log d_AE.
pub fn basis_size_bound(n: usize, r: usize, d_ae: usize) -> f64 {
    let h = crate::divergence::binary_entropy(r as f64 / n as f64).expect("r <= n");
    n as f64 * h + r as f64 * (d_ae as f64).ln()
}
