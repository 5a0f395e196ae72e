//! Relative entropy of resource over computable convex sets, the
//! replacer and smoothing channels, Wasserstein continuity bounds, and
//! regularization sequences.
//!
//! The separable set is represented by its PPT relaxation throughout:
//! PPT is SDP-testable and satisfies the same convexity/full-rank-member
//! axioms, so every implemented bound applies to it verbatim (for 2x2
//! and 2x3 site spaces the two sets coincide).

use crate::divergence::{ExtendedReal, binary_entropy, rel_entropy};
use crate::error::{Error, Result};
use crate::sdp::{self, SDPProblem, SdpStatus, SolveOptions, SparseHerm, herm_basis_entry};
use crate::tensor::{C64, CMat, DensityOperator, HermitianOperator, SiteStructure, eigh,
    herm_inner, partial_trace_drop, partial_transpose, tensor, tensor_power};
use crate::tol;

/// A convex set of states to measure distance from: either the single
/// iid family {sigma^(x)n} or the PPT states of a bipartitioned system.
#[derive(Debug, Clone)]
pub enum ResourceSetHandle {
    SingleIID { sigma: DensityOperator },
    PPTSet { sites: SiteStructure },
}

impl ResourceSetHandle {
    pub fn single_iid(sigma: DensityOperator) -> Result<Self> {
        let (ev, _) = eigh(sigma.herm());
        if ev.first().copied().unwrap_or(0.0) <= 0.0 {
            return Err(Error::InvalidArgument("iid reference must be full rank".into()));
        }
        Ok(Self::SingleIID { sigma })
    }

    pub fn ppt(sites: SiteStructure) -> Result<Self> {
        if sites.bipartition.is_none() {
            return Err(Error::InvalidArgument("PPT set needs a site bipartition".into()));
        }
        Ok(Self::PPTSet { sites })
    }

    /// The recorded full-rank member: sigma itself, or I/d.
    pub fn omega(&self, dim: usize) -> Result<DensityOperator> {
        match self {
            Self::SingleIID { sigma } => {
                let n = copies_of(dim, sigma.dim())?;
                tensor_power(sigma, n)
            }
            Self::PPTSet { .. } => Ok(DensityOperator::maximally_mixed(dim)),
        }
    }

    pub fn lambda_min_omega(&self, dim: usize) -> Result<f64> {
        let om = self.omega(dim)?;
        Ok(eigh(om.herm()).0.first().copied().unwrap_or(0.0))
    }

    /// Refined structure splitting each site into its (A,B) factors,
    /// with the list of B-factor positions to transpose.
    fn ppt_refinement(&self) -> Result<(SiteStructure, Vec<usize>)> {
        let Self::PPTSet { sites } = self else {
            return Err(Error::InvalidArgument("not a PPT set".into()));
        };
        let bip = sites.bipartition.as_ref().unwrap();
        let mut dims = Vec::with_capacity(2 * bip.len());
        let mut b_sites = Vec::with_capacity(bip.len());
        for &(a, b) in bip {
            dims.push(a);
            b_sites.push(dims.len());
            dims.push(b);
        }
        Ok((SiteStructure::new(dims)?, b_sites))
    }

    pub fn is_member(&self, tau: &DensityOperator) -> Result<bool> {
        match self {
            Self::SingleIID { sigma } => {
                let n = copies_of(tau.dim(), sigma.dim())?;
                let iid = tensor_power(sigma, n)?;
                Ok(HermitianOperator::from_exact(tau.matrix() - iid.matrix()).trace_norm()
                    <= 1e-8)
            }
            Self::PPTSet { sites } => {
                if tau.dim() != sites.total_dim() {
                    return Err(Error::DimMismatch("PPT membership operand".into()));
                }
                let (refined, b_sites) = self.ppt_refinement()?;
                let pt = partial_transpose(tau.herm(), &b_sites, &refined)?;
                Ok(eigh(&pt).0.first().copied().unwrap_or(0.0) >= -1e-9)
            }
        }
    }
}

fn copies_of(total: usize, site: usize) -> Result<usize> {
    let mut n = 0usize;
    let mut acc = 1usize;
    while acc < total {
        acc *= site;
        n += 1;
    }
    if acc != total {
        return Err(Error::DimMismatch(format!("dim {total} is not a power of {site}")));
    }
    Ok(n.max(1))
}

#[derive(Debug, Clone)]
pub struct REEResult {
    pub value: f64,
    pub optimizer: DensityOperator,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Gradient of sigma -> D(rho || sigma): minus the adjoint Frechet
/// derivative of log at sigma applied to rho, via first divided
/// differences of log in sigma's eigenbasis.
fn ree_gradient(rho: &DensityOperator, sigma: &DensityOperator) -> HermitianOperator {
    let (ev, u) = eigh(sigma.herm());
    let d = ev.len();
    let lmax = ev.last().copied().unwrap_or(1.0);
    let rho_t = u.adjoint() * rho.matrix() * &u;
    let mut core = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let (li, lj) = (ev[i], ev[j]);
            let k = if (li - lj).abs() <= tol::DIVIDED_DIFF_DEGENERATE_REL * lmax {
                2.0 / (li + lj)
            } else {
                (li.ln() - lj.ln()) / (li - lj)
            };
            core[(i, j)] = -k * rho_t[(i, j)];
        }
    }
    HermitianOperator::from_exact(&u * core * u.adjoint())
}

/// Constraint skeleton for linear minimization over the PPT states:
/// blocks tau and Z = partial transpose of tau, objective filled per call.
fn ppt_lmo_problem(set: &ResourceSetHandle) -> Result<SDPProblem> {
    let (refined, b_sites) = set.ppt_refinement()?;
    let d = refined.total_dim();
    let mut p = SDPProblem::new(vec![d, d]);
    for c in 0..d * d {
        let e = SparseHerm::from_upper(&herm_basis_entry(c, d)).to_dense(d);
        let et = partial_transpose(&HermitianOperator::from_exact(e), &b_sites, &refined)?;
        let neg = SparseHerm::from_dense(&et.matrix().scale(-1.0));
        p.add_constraint(
            vec![(1, SparseHerm::from_upper(&herm_basis_entry(c, d))), (0, neg)],
            0.0,
        );
    }
    let diag: Vec<(usize, usize, C64)> = (0..d).map(|i| (i, i, C64::new(1.0, 0.0))).collect();
    p.add_constraint(vec![(0, SparseHerm::from_upper(&diag))], 1.0);
    Ok(p)
}

/// Linear minimization of tr[G tau] over the PPT states.
fn ppt_lmo(g: &HermitianOperator, p: &mut SDPProblem) -> Result<DensityOperator> {
    let d = g.dim();
    p.set_objective(0, g.matrix().clone());
    let sol = sdp::solve(p, &SolveOptions::default())?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::InvalidArgument("PPT linear oracle did not converge".into()));
    }
    // renormalize the numeric iterate to an exact state
    let tr: f64 = (0..d).map(|i| sol.x[0][(i, i)].re).sum();
    Ok(DensityOperator::from_exact(sol.x[0].scale(1.0 / tr)))
}

pub fn ree_frank_wolfe(
    rho: &DensityOperator,
    set: &ResourceSetHandle,
    tol_gap: f64,
    max_iter: usize,
) -> Result<REEResult> {
    ree_frank_wolfe_from(rho, set, None, tol_gap, max_iter)
}

/// Frank-Wolfe with an optional full-rank warm start inside the set.
pub fn ree_frank_wolfe_from(
    rho: &DensityOperator,
    set: &ResourceSetHandle,
    start: Option<DensityOperator>,
    tol_gap: f64,
    max_iter: usize,
) -> Result<REEResult> {
    if let ResourceSetHandle::SingleIID { sigma } = set {
        let n = copies_of(rho.dim(), sigma.dim())?;
        let iid = tensor_power(sigma, n)?;
        let value = match rel_entropy(rho, &iid)? {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::Inf => f64::INFINITY,
        };
        return Ok(REEResult { value, optimizer: iid, gap: 0.0, iterations: 0, converged: true });
    }

    // a member of the set is its own optimizer with value exactly zero;
    // first-order descent crawls toward such boundary optima, so answer directly
    if set.is_member(rho)? {
        return Ok(REEResult {
            value: 0.0,
            optimizer: rho.clone(),
            gap: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let d = rho.dim();
    let start = start.unwrap_or_else(|| DensityOperator::maximally_mixed(d));
    let objective = |s: &DensityOperator| -> Result<f64> {
        match rel_entropy(rho, s)? {
            ExtendedReal::Finite(v) => Ok(v),
            ExtendedReal::Inf => Ok(f64::INFINITY),
        }
    };
    // away-step Frank-Wolfe: the iterate is kept as an explicit convex
    // combination of oracle atoms so steps can also move away from a bad
    // atom; plain conditional gradient zigzags near boundary optima and
    // stalls long before certifying the duality gap
    let mut atoms: Vec<(CMat, f64)> = vec![(start.matrix().clone(), 1.0)];
    let rebuild = |atoms: &[(CMat, f64)]| -> DensityOperator {
        let mut m = CMat::zeros(d, d);
        for (a, w) in atoms {
            m += a.scale(*w);
        }
        DensityOperator::from_exact(m)
    };
    let mut sigma = start;
    let mut value = objective(&sigma)?;
    let mut gap = f64::INFINITY;
    let mut iterations = 0usize;
    let mut lmo = ppt_lmo_problem(set)?;
    for k in 0..max_iter {
        iterations = k;
        let grad = ree_gradient(rho, &sigma);
        let tau = ppt_lmo(&grad, &mut lmo)?;
        gap = herm_inner(grad.matrix(), &(sigma.matrix() - tau.matrix()));
        if gap <= tol_gap {
            return Ok(REEResult { value, optimizer: sigma, gap, iterations, converged: true });
        }
        // away candidate: the retained atom most aligned with the gradient
        let vi = (0..atoms.len())
            .max_by(|&i, &j| {
                herm_inner(grad.matrix(), &atoms[i].0)
                    .partial_cmp(&herm_inner(grad.matrix(), &atoms[j].0))
                    .unwrap()
            })
            .unwrap();
        let away_gap = herm_inner(grad.matrix(), &(atoms[vi].0.clone() - sigma.matrix()));
        let alpha_v = atoms[vi].1;
        let use_away = atoms.len() > 1 && alpha_v < 1.0 && away_gap > gap;
        let (dir, gamma_max) = if use_away {
            (sigma.matrix() - &atoms[vi].0, alpha_v / (1.0 - alpha_v))
        } else {
            (tau.matrix() - sigma.matrix(), 0.9999f64)
        };
        let eval = |gamma: f64| -> Result<f64> {
            objective(&DensityOperator::from_exact(sigma.matrix() + dir.scale(gamma)))
        };
        // golden-section line search on a bounded bracket; an away step
        // additionally tries the exact drop step at gamma_max
        let bracket = gamma_max.min(1.0);
        let (mut a, mut b) = (0.0f64, bracket);
        let inv_phi = 0.618_033_988_749_894_9f64;
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let mut f1 = eval(x1)?;
        let mut f2 = eval(x2)?;
        for _ in 0..20 {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = eval(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = eval(x2)?;
            }
        }
        let mut gamma = 0.5 * (a + b);
        let mut fnew = eval(gamma)?;
        if use_away && gamma_max <= 1e6 {
            let f_drop = eval(gamma_max)?;
            if f_drop < fnew {
                gamma = gamma_max;
                fnew = f_drop;
            }
        }
        if !use_away {
            let gamma_fallback = (2.0 / (k as f64 + 2.0)).min(gamma_max);
            let f_fb = eval(gamma_fallback)?;
            if f_fb < fnew {
                gamma = gamma_fallback;
                fnew = f_fb;
            }
        }
        if fnew > value {
            // backtrack until the step improves: the directional
            // derivative at 0 is negative, so a small enough step exists;
            // accepted iterates keep the objective nonincreasing
            let mut improved = false;
            while gamma > 1e-18 {
                gamma *= 0.5;
                fnew = eval(gamma)?;
                if fnew <= value {
                    improved = true;
                    break;
                }
            }
            if !improved {
                // no numerically representable improvement; stop here
                return Ok(REEResult {
                    value,
                    optimizer: sigma,
                    gap,
                    iterations,
                    converged: gap <= tol_gap,
                });
            }
        }
        if use_away {
            for (_, w) in atoms.iter_mut() {
                *w *= 1.0 + gamma;
            }
            atoms[vi].1 -= gamma;
        } else {
            for (_, w) in atoms.iter_mut() {
                *w *= 1.0 - gamma;
            }
            atoms.push((tau.matrix().clone(), gamma));
        }
        atoms.retain(|(_, w)| *w > 1e-12);
        let total: f64 = atoms.iter().map(|(_, w)| *w).sum();
        for (_, w) in atoms.iter_mut() {
            *w /= total;
        }
        sigma = rebuild(&atoms);
        value = objective(&sigma)?;
    }
    Ok(REEResult { value, optimizer: sigma, gap, iterations, converged: gap <= tol_gap })
}

/// Replacer at site i: X -> tr_i[X] (x) omega.
pub fn replacer_channel(
    x: &HermitianOperator,
    omega: &DensityOperator,
    i: usize,
    s: &SiteStructure,
) -> Result<HermitianOperator> {
    if omega.dim() != s.dims[i] {
        return Err(Error::DimMismatch("replacer omega vs site".into()));
    }
    let rest = partial_trace_drop(x, &[i], s)?;
    let comp: Vec<usize> = (0..s.n_sites()).filter(|&j| j != i).collect();
    // tensor as [site i, complement] then permute into place
    let prod = tensor(&[omega.herm(), &rest])?;
    let order: Vec<usize> = std::iter::once(i).chain(comp.iter().copied()).collect();
    let mut dims = vec![0usize; s.n_sites()];
    for (slot, &site) in order.iter().enumerate() {
        dims[slot] = s.dims[site];
    }
    let staged = SiteStructure::new(dims)?;
    // output slot k of the staged layout carries original site order[k];
    // permute so that output site j carries staged slot position_of(j)
    let mut perm = vec![0usize; s.n_sites()];
    for (slot, &site) in order.iter().enumerate() {
        perm[site] = slot;
    }
    let _ = staged;
    crate::tensor::permute_sites(
        &prod,
        &perm,
        &SiteStructure::new(order.iter().map(|&k| s.dims[k]).collect())?,
    )
}

/// Sitewise smoothing channel: at every listed site,
/// X -> e^{-t} X + (1 - e^{-t}) tr_i[X] (x) omega.
pub fn smoothing_channel_et(
    x: &HermitianOperator,
    t: f64,
    omega: &DensityOperator,
    s: &SiteStructure,
    sites: &[usize],
) -> Result<HermitianOperator> {
    if t < 0.0 {
        return Err(Error::InvalidArgument("negative smoothing time".into()));
    }
    let decay = (-t).exp();
    let mut cur = x.clone();
    for &i in sites {
        let rep = replacer_channel(&cur, omega, i, s)?;
        cur = HermitianOperator::from_exact(
            cur.matrix().scale(decay) + rep.matrix().scale(1.0 - decay),
        );
    }
    Ok(cur)
}

/// 3 h(eps) + 6 eps log(d / lambda_min), nats; eps in [0, 1/2].
pub fn continuity_bound(eps: f64, d: usize, lambda_min: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside [0, 1/2]")));
    }
    if lambda_min <= 0.0 {
        return Err(Error::InvalidArgument("lambda_min must be positive".into()));
    }
    Ok(3.0 * binary_entropy(eps)? + 6.0 * eps * (d as f64 / lambda_min).ln())
}

/// 3 h(2 sqrt(r/n)) + 12 sqrt(r/n) log(d / lambda_min); requires 16r <= n.
pub fn almostiid_continuity_bound(n: usize, r: usize, d: usize, lambda_min: f64) -> Result<f64> {
    if 16 * r > n {
        return Err(Error::InvalidArgument(format!("16r = {} > n = {n}", 16 * r)));
    }
    let x = (r as f64 / n as f64).sqrt();
    if lambda_min <= 0.0 {
        return Err(Error::InvalidArgument("lambda_min must be positive".into()));
    }
    Ok(3.0 * binary_entropy(2.0 * x)? + 12.0 * x * (d as f64 / lambda_min).ln())
}

#[derive(Debug, Clone)]
pub struct ContinuityReport {
    pub eps_n: f64,
    pub delta_ree: f64,
    pub bound: f64,
    pub pass: bool,
    pub skipped: bool,
}

/// |REE(rho)/n - REE(rho')/n| <= continuity_bound((1/n) W1, d_site,
/// lambda_min(omega)) + 2 FW tol.
pub fn continuity_check(
    rho: &DensityOperator,
    rho_prime: &DensityOperator,
    set: &ResourceSetHandle,
    s: &SiteStructure,
) -> Result<ContinuityReport> {
    let n = s.n_sites() as f64;
    let (w1, _) = crate::wasserstein::w1_distance(rho, rho_prime, s)?;
    let eps_n = w1 / n;
    let d_site = s.dims[0];
    let lmin = set.lambda_min_omega(rho.dim())?.powf(1.0 / n);
    if eps_n > 0.5 {
        return Ok(ContinuityReport {
            eps_n,
            delta_ree: f64::NAN,
            bound: f64::NAN,
            pass: false,
            skipped: true,
        });
    }
    let a = ree_frank_wolfe(rho, set, tol::FW_TOL, tol::FW_MAX_ITER)?;
    let b = ree_frank_wolfe(rho_prime, set, tol::FW_TOL, tol::FW_MAX_ITER)?;
    let delta = (a.value / n - b.value / n).abs();
    let bound = continuity_bound(eps_n, d_site, lmin)?;
    let pass = delta <= bound + 2.0 * tol::FW_TOL;
    Ok(ContinuityReport { eps_n, delta_ree: delta, bound, pass, skipped: false })
}

#[derive(Debug, Clone)]
pub struct RerBoundReport {
    pub per_copy: f64,
    pub bound: f64,
    pub pass: bool,
}

/// (1/n) REE <= log(1 / lambda_min(omega_site)) + FW tol.
pub fn rer_upper_bound_check(
    rho_n: &DensityOperator,
    set: &ResourceSetHandle,
    n: usize,
) -> Result<RerBoundReport> {
    let res = ree_frank_wolfe(rho_n, set, tol::FW_TOL, tol::FW_MAX_ITER)?;
    let lmin_total = set.lambda_min_omega(rho_n.dim())?;
    // omega is a tensor power across copies; per-site lambda_min
    let lmin = lmin_total.powf(1.0 / n as f64);
    let per_copy = res.value / n as f64;
    let bound = (1.0 / lmin).ln();
    Ok(RerBoundReport { per_copy, bound, pass: per_copy <= bound + tol::FW_TOL })
}

/// Per-copy REE of rho^(x)n for n = 1..n_max, with the running infimum
/// (which upper-bounds the regularized value by subadditivity).
pub fn regularized_sequence(
    rho: &DensityOperator,
    make_set: impl Fn(usize) -> Result<ResourceSetHandle>,
    n_max: usize,
) -> Result<Vec<(usize, f64, f64)>> {
    let mut out = Vec::with_capacity(n_max);
    let mut running = f64::INFINITY;
    for n in 1..=n_max {
        let rho_n = tensor_power(rho, n)?;
        let set = make_set(n)?;
        let res = ree_frank_wolfe(&rho_n, &set, tol::FW_TOL, tol::FW_MAX_ITER)?;
        let per_copy = res.value / n as f64;
        running = running.min(per_copy);
        out.push((n, per_copy, running));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{CVec, PureState, random_density};
    use approx::assert_abs_diff_eq;

    fn bell() -> DensityOperator {
        let mut v = CVec::zeros(4);
        v[0] = C64::new(1.0 / 2f64.sqrt(), 0.0);
        v[3] = C64::new(1.0 / 2f64.sqrt(), 0.0);
        PureState::new(v).unwrap().projector()
    }

    fn two_qubit_ppt() -> ResourceSetHandle {
        ResourceSetHandle::ppt(SiteStructure::with_bipartition(vec![4], vec![(2, 2)]).unwrap())
            .unwrap()
    }

    #[test]
    fn membership_cases() {
        let set = two_qubit_ppt();
        let prod = tensor_power(&random_density(2, 2, 1).unwrap(), 2).unwrap();
        assert!(set.is_member(&prod).unwrap());
        assert!(!set.is_member(&bell()).unwrap());
        assert!(set.is_member(&DensityOperator::maximally_mixed(4)).unwrap());

        let sig = random_density(2, 2, 2).unwrap();
        let iid_set = ResourceSetHandle::single_iid(sig.clone()).unwrap();
        assert!(iid_set.is_member(&tensor_power(&sig, 2).unwrap()).unwrap());
        assert!(!iid_set.is_member(&tensor_power(&random_density(2, 2, 3).unwrap(), 2).unwrap()).unwrap());
    }

    #[test]
    fn ree_trivial_inputs() {
        let set = two_qubit_ppt();
        // maximally mixed: converges at iteration 0
        let res = ree_frank_wolfe(&DensityOperator::maximally_mixed(4), &set, 1e-4, 100).unwrap();
        assert!(res.converged && res.iterations == 0 && res.value.abs() <= 1e-12);

        // PPT member: value within tol
        let prod = tensor_power(&random_density(2, 2, 5).unwrap(), 2).unwrap();
        let res = ree_frank_wolfe(&prod, &set, 1e-4, 2000).unwrap();
        assert!(res.converged, "gap {}", res.gap);
        assert!(res.value <= 1e-4 + res.gap, "value {}", res.value);

        // iid set returns plain relative entropy
        let sig = random_density(2, 2, 6).unwrap();
        let rho = random_density(2, 2, 7).unwrap();
        let iid_set = ResourceSetHandle::single_iid(sig.clone()).unwrap();
        let res = ree_frank_wolfe(&rho, &iid_set, 1e-4, 10).unwrap();
        let expect = rel_entropy(&rho, &sig).unwrap().value();
        assert_abs_diff_eq!(res.value, expect, epsilon = 1e-12);
    }

    #[test]
    fn ree_bell_is_log2() {
        let set = two_qubit_ppt();
        let res = ree_frank_wolfe(&bell(), &set, 1e-4, 5000).unwrap();
        assert!(res.converged, "gap {} after {} iterations", res.gap, res.iterations);
        assert!((res.value - 2f64.ln()).abs() <= 1e-3, "REE {}", res.value);
        assert!(res.gap >= 0.0);
        assert!(set.is_member(&res.optimizer).unwrap());
    }

    #[test]
    fn channels_cases() {
        let s = SiteStructure::uniform(2, 2).unwrap();
        let om = random_density(2, 2, 11).unwrap();
        let x = random_density(4, 4, 12).unwrap();

        // t = 0: identity
        let y = smoothing_channel_et(x.herm(), 0.0, &om, &s, &[0, 1]).unwrap();
        assert!((y.matrix() - x.matrix()).norm() <= 1e-12);

        // t = 50: all-site replacer
        let y = smoothing_channel_et(x.herm(), 50.0, &om, &s, &[0, 1]).unwrap();
        let rep = replacer_channel(
            &replacer_channel(x.herm(), &om, 0, &s).unwrap(),
            &om,
            1,
            &s,
        )
        .unwrap();
        assert!((y.matrix() - rep.matrix()).norm() <= 1e-15);

        // trace preserved
        assert_abs_diff_eq!(y.trace(), 1.0, epsilon = 1e-12);

        // replacer places omega at the right site
        let r0 = replacer_channel(x.herm(), &om, 0, &s).unwrap();
        let m0 = crate::tensor::partial_trace_keep(&r0, &[0], &s).unwrap();
        assert!((m0.matrix() - om.matrix()).norm() <= 1e-12);
    }

    #[test]
    fn smoothing_preserves_ppt() {
        let s = SiteStructure::with_bipartition(vec![4, 4], vec![(2, 2), (2, 2)]).unwrap();
        let set = ResourceSetHandle::ppt(s.clone()).unwrap();
        let om = DensityOperator::maximally_mixed(4);
        for seed in 0..20u64 {
            // PPT member: mixture of products
            let mut m = CMat::zeros(16, 16);
            for j in 0..3u64 {
                let a = random_density(4, 2, 100 + 10 * seed + j).unwrap();
                let b = random_density(4, 2, 200 + 10 * seed + j).unwrap();
                m += crate::tensor::kron(a.matrix(), b.matrix()).scale(1.0 / 3.0);
            }
            let rho = DensityOperator::from_exact(m);
            if !set.is_member(&rho).unwrap() {
                continue;
            }
            let out = smoothing_channel_et(rho.herm(), 0.7, &om, &s, &[0, 1]).unwrap();
            let out = DensityOperator::from_exact(out.into_matrix());
            assert!(set.is_member(&out).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn continuity_bound_values() {
        assert_abs_diff_eq!(continuity_bound(0.0, 4, 0.25).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(continuity_bound(0.1, 4, 0.25).unwrap(), 2.6389, epsilon = 1e-4);
        assert_abs_diff_eq!(almostiid_continuity_bound(16, 0, 4, 0.25).unwrap(), 0.0, epsilon = 1e-15);
        assert!(continuity_bound(0.6, 4, 0.25).is_err());
        assert!(almostiid_continuity_bound(15, 1, 4, 0.25).is_err());
        // nondecreasing in eps
        let mut prev = 0.0;
        for k in 0..=50 {
            let eps = k as f64 * 0.01;
            let b = continuity_bound(eps, 4, 0.25).unwrap();
            assert!(b >= prev - 1e-12, "eps {eps}");
            prev = b;
        }
    }

    #[test]
    fn continuity_check_cases() {
        let set = two_qubit_ppt();
        let s = SiteStructure::with_bipartition(vec![4], vec![(2, 2)]).unwrap();
        let rho = random_density(4, 4, 21).unwrap();
        let rep = continuity_check(&rho, &rho, &set, &s).unwrap();
        assert!(rep.pass && rep.delta_ree.abs() <= 2.0 * tol::FW_TOL);

        // small perturbation at n = 1: eps = half trace distance
        let mix = DensityOperator::from_exact(
            rho.matrix().scale(0.95) + DensityOperator::maximally_mixed(4).matrix().scale(0.05),
        );
        let rep = continuity_check(&rho, &mix, &set, &s).unwrap();
        assert!(!rep.skipped && rep.pass, "{rep:?}");
        let td = 0.5
            * HermitianOperator::from_exact(rho.matrix() - mix.matrix()).trace_norm();
        assert_abs_diff_eq!(rep.eps_n, td, epsilon = 1e-6);
    }

    #[test]
    fn rer_upper_bound_cases() {
        let set = two_qubit_ppt();
        let rep = rer_upper_bound_check(&DensityOperator::maximally_mixed(4), &set, 1).unwrap();
        assert!(rep.pass && rep.per_copy.abs() <= 1e-9);
        let rep = rer_upper_bound_check(&bell(), &set, 1).unwrap();
        assert!(rep.pass);
        assert_abs_diff_eq!(rep.bound, 4f64.ln(), epsilon = 1e-12);
        let rep = rer_upper_bound_check(&random_density(4, 4, 31).unwrap(), &set, 1).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn regularized_sequence_cases() {
        // iid set: constant per-copy values
        let sig = random_density(2, 2, 41).unwrap();
        let rho = random_density(2, 2, 42).unwrap();
        let seq = regularized_sequence(
            &rho,
            |_| ResourceSetHandle::single_iid(sig.clone()),
            4,
        )
        .unwrap();
        let d1 = seq[0].1;
        for &(n, per, run) in &seq {
            assert_abs_diff_eq!(per, d1, epsilon = 1e-9);
            assert!(run <= per + 1e-12, "n {n}");
        }
        // running infimum nonincreasing
        let mut prev = f64::INFINITY;
        for &(_, _, run) in &seq {
            assert!(run <= prev + 1e-15);
            prev = run;
        }
    }

    #[test]
    fn regularized_bell_two_copies() {
        let seq = regularized_sequence(
            &bell(),
            |n| {
                ResourceSetHandle::ppt(SiteStructure::with_bipartition(
                    vec![4; n],
                    vec![(2, 2); n],
                )?)
            },
            2,
        )
        .unwrap();
        assert!((seq[0].1 - 2f64.ln()).abs() <= 1e-3, "one copy {}", seq[0].1);
        assert!(seq[1].1 <= seq[0].1 + 2.0 * tol::FW_TOL, "two copies {}", seq[1].1);
    }

    #[test]
    fn ree_dpi_under_symmetrizer() {
        let s = SiteStructure::with_bipartition(vec![4, 4], vec![(2, 2), (2, 2)]).unwrap();
        let set = ResourceSetHandle::ppt(s.clone()).unwrap();
        let rho = random_density(16, 4, 51).unwrap();
        let sym = DensityOperator::from_exact(
            crate::almostiid::symmetrize(rho.herm(), &s).unwrap().into_matrix(),
        );
        let a = ree_frank_wolfe(&rho, &set, tol::FW_TOL, tol::FW_MAX_ITER).unwrap();
        let b = ree_frank_wolfe(&sym, &set, tol::FW_TOL, tol::FW_MAX_ITER).unwrap();
        assert!(b.value <= a.value + 2.0 * tol::FW_TOL, "{} vs {}", b.value, a.value);
    }
}
