//! Hypothesis-testing relative entropy (exact Neyman-Pearson enumeration
//! with an SDP cross-check), an exact classical iid type-class path,
//! smooth max-relative entropy as an SDP, and the D_H / D_max sandwich.
//!
//! Convention: dh(rho, sigma, eps) = -log min{ tr[sigma M] : 0 <= M <= 1,
//! tr[rho M] >= 1 - eps }, in nats. The smoothing ball contains normalized
//! states within purified distance eps.

use statrs::function::gamma::ln_gamma;

use crate::divergence::ExtendedReal;
use crate::error::{Error, Result};
use crate::sdp::{self, SDPProblem, SdpStatus, SolveOptions, SparseHerm, herm_basis_coord,
    herm_basis_entry};
use crate::tensor::{C64, CMat, DensityOperator, HermitianOperator, eigh, spectral_build};

/// A measurement effect: 0 <= M <= 1 within tolerance.
#[derive(Debug, Clone)]
pub struct TestOperator {
    pub m: HermitianOperator,
}

impl TestOperator {
    pub fn new(m: HermitianOperator) -> Result<Self> {
        let (evals, _) = eigh(&m);
        let lo = evals.first().copied().unwrap_or(0.0);
        let hi = evals.last().copied().unwrap_or(0.0);
        if lo < -1e-9 || hi > 1.0 + 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "test operator spectrum [{lo}, {hi}] outside [0,1]"
            )));
        }
        Ok(Self { m })
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside (0,1)")));
    }
    Ok(())
}

// strict positive-part projector of rho - mu*sigma
fn plus_projector(rho: &DensityOperator, sigma: &DensityOperator, mu: f64, ktol: f64) -> (CMat, CMat) {
    let e = HermitianOperator::from_exact(rho.matrix() - sigma.matrix().scale(mu));
    let (evals, u) = eigh(&e);
    let plus: Vec<f64> = evals.iter().map(|&l| if l > ktol { 1.0 } else { 0.0 }).collect();
    let kern: Vec<f64> = evals.iter().map(|&l| if l.abs() <= ktol { 1.0 } else { 0.0 }).collect();
    (
        spectral_build(&plus, &u).into_matrix(),
        spectral_build(&kern, &u).into_matrix(),
    )
}

/// Optimal type-II error at type-I error <= eps, with the optimal test.
///
/// The optimal test has the form {rho - mu*sigma > 0} plus a fractional
/// fill of the kernel at the threshold. tr[rho {rho - mu*sigma > 0}] is
/// nonincreasing in mu (the positive-part trace of the pencil is convex
/// in mu), so the threshold is located by bisection; at a generalized
/// eigenvalue the acceptance weight jumps and the kernel fill interpolates.
pub fn beta_eps(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    eps: f64,
) -> Result<(f64, TestOperator)> {
    check_eps(eps)?;
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch("beta_eps".into()));
    }
    let target = 1.0 - eps;
    let a_of = |p: &CMat| crate::tensor::herm_inner(rho.matrix(), p);
    let b_of = |p: &CMat| crate::tensor::herm_inner(sigma.matrix(), p);

    // mu = infinity test: positive part of rho compressed to ker(sigma).
    // Costs nothing in type-II error, so use it alone whenever feasible.
    let (sev, su) = eigh(sigma.herm());
    let smax = sev.last().copied().unwrap_or(0.0);
    let kvals: Vec<f64> =
        sev.iter().map(|&l| if l <= 1e-12 * (1.0 + smax) { 1.0 } else { 0.0 }).collect();
    let kproj = spectral_build(&kvals, &su).into_matrix();
    let krk = HermitianOperator::from_exact(&kproj * rho.matrix() * &kproj);
    let (kev, ku) = eigh(&krk);
    let kplus: Vec<f64> = kev.iter().map(|&l| if l > 1e-12 { 1.0 } else { 0.0 }).collect();
    let p_inf = spectral_build(&kplus, &ku).into_matrix();
    if a_of(&p_inf) >= target - 1e-9 {
        return Ok((0.0, TestOperator::new(HermitianOperator::from_exact(p_inf))?));
    }

    // bracket the threshold, doubling past the pencil spectrum if needed
    let rmax = eigh(rho.herm()).0.last().copied().unwrap_or(1.0);
    let mut hi = 2.0 * rmax / sev.iter().cloned().filter(|&l| l > 1e-12).fold(1.0, f64::min) + 1.0;
    let ktol_at = |mu: f64| 1e-11 * (1.0 + mu);
    for _ in 0..60 {
        let (p, _) = plus_projector(rho, sigma, hi, ktol_at(hi));
        if a_of(&p) < target {
            break;
        }
        hi *= 2.0;
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + lo) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (p, _) = plus_projector(rho, sigma, mid, ktol_at(mid));
        if a_of(&p) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // at the landing point a crossing eigenvector sits in the numerical
    // kernel; the fill fraction makes the type-I constraint tight
    let mut best: Option<(f64, CMat)> = None;
    for &mu in &[lo, hi] {
        let ktol = (1e-9 * (1.0 + mu)).max(2.0 * (hi - lo) * (smax + 1.0));
        let (p_plus, p_kern) = plus_projector(rho, sigma, mu, ktol);
        let a_plus = a_of(&p_plus);
        let a_kern = a_of(&p_kern);
        let s = if a_kern > 1e-15 { ((target - a_plus) / a_kern).clamp(0.0, 1.0) } else { 0.0 };
        if a_plus + s * a_kern < target - 1e-9 {
            continue;
        }
        let beta = b_of(&p_plus) + s * b_of(&p_kern);
        if best.as_ref().is_none_or(|(b, _)| beta < *b) {
            best = Some((beta, p_plus + p_kern.scale(s)));
        }
    }
    let (beta, m) = best.ok_or_else(|| {
        Error::InvalidArgument("threshold bisection failed to locate a feasible test".into())
    })?;
    Ok((beta.max(0.0), TestOperator::new(HermitianOperator::from_exact(m))?))
}

/// -log beta_eps; +inf when beta underflows.
pub fn dh(rho: &DensityOperator, sigma: &DensityOperator, eps: f64) -> Result<ExtendedReal> {
    let (beta, _) = beta_eps(rho, sigma, eps)?;
    if beta < 1e-300 {
        return Ok(ExtendedReal::Inf);
    }
    Ok(ExtendedReal::Finite(-beta.ln()))
}

/// SDP cross-check of beta_eps: min tr[sigma M], 0 <= M <= I,
/// tr[rho M] >= 1 - eps.
pub fn beta_eps_sdp(rho: &DensityOperator, sigma: &DensityOperator, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let d = rho.dim();
    // blocks: M (d), N = I - M (d), u >= 0 slack (1)
    let mut p = SDPProblem::new(vec![d, d, 1]);
    p.set_objective(0, sigma.matrix().clone());
    for c in 0..d * d {
        let e = herm_basis_entry(c, d);
        let rhs = herm_basis_coord(c, d, &CMat::identity(d, d));
        p.add_constraint(
            vec![(0, SparseHerm::from_upper(&e)), (1, SparseHerm::from_upper(&e))],
            rhs,
        );
    }
    p.add_constraint(
        vec![
            (0, SparseHerm::from_dense(rho.matrix())),
            (2, SparseHerm::from_upper(&[(0, 0, C64::new(-1.0, 0.0))])),
        ],
        1.0 - eps,
    );
    let sol = sdp::solve(&p, &SolveOptions::default())?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::InvalidArgument("beta_eps SDP did not converge".into()));
    }
    Ok(sol.primal_obj)
}

/// Exact classical beta_eps for p^(x)n vs q^(x)n over type classes, in the
/// log domain. Returns -log beta (total, not per copy).
pub fn dh_classical_iid(p: &[f64], q: &[f64], n: usize, eps: f64) -> Result<ExtendedReal> {
    check_eps(eps)?;
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::InvalidArgument("alphabet mismatch".into()));
    }
    if p.iter().any(|&v| v <= 0.0) || q.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("p must be strictly positive".into()));
    }
    if q.iter().zip(p).any(|(&qv, &pv)| qv == 0.0 && pv > 0.0) {
        return Ok(ExtendedReal::Inf);
    }
    let k = p.len();
    let lp: Vec<f64> = p.iter().map(|v| v.ln()).collect();
    let lq: Vec<f64> = q.iter().map(|v| v.ln()).collect();

    // enumerate compositions of n into k parts
    struct Class {
        log_p: f64,
        log_q: f64,
        llr: f64,
    }
    let mut classes: Vec<Class> = Vec::new();
    let mut counts = vec![0usize; k];
    fn rec(
        counts: &mut Vec<usize>,
        idx: usize,
        rem: usize,
        n: usize,
        lp: &[f64],
        lq: &[f64],
        out: &mut Vec<Class>,
    ) {
        if idx == counts.len() - 1 {
            counts[idx] = rem;
            let log_mult = ln_gamma(n as f64 + 1.0)
                - counts.iter().map(|&c| ln_gamma(c as f64 + 1.0)).sum::<f64>();
            let lpv: f64 = counts.iter().zip(lp).map(|(&c, &l)| c as f64 * l).sum();
            let lqv: f64 = counts.iter().zip(lq).map(|(&c, &l)| c as f64 * l).sum();
            out.push(Class {
                log_p: log_mult + lpv,
                log_q: log_mult + lqv,
                llr: lpv - lqv,
            });
            return;
        }
        for c in 0..=rem {
            counts[idx] = c;
            rec(counts, idx + 1, rem - c, n, lp, lq, out);
        }
    }
    rec(&mut counts, 0, n, n, &lp, &lq, &mut classes);

    // accept classes in decreasing likelihood-ratio order
    classes.sort_by(|a, b| b.llr.partial_cmp(&a.llr).unwrap());
    let target = 1.0 - eps;
    let mut cum_p = 0.0f64;
    let mut accepted_lq: Vec<f64> = Vec::new();
    for cl in &classes {
        let pm = cl.log_p.exp();
        if cum_p + pm < target {
            cum_p += pm;
            accepted_lq.push(cl.log_q);
        } else {
            // boundary class: fractional fill (uniform within the class
            // scales both error masses by the same factor)
            let s = if pm > 0.0 { ((target - cum_p) / pm).clamp(0.0, 1.0) } else { 0.0 };
            if s > 0.0 {
                accepted_lq.push(s.ln() + cl.log_q);
            }
            break;
        }
    }
    let beta_log = logsumexp(&accepted_lq);
    if beta_log == f64::NEG_INFINITY {
        return Ok(ExtendedReal::Inf);
    }
    Ok(ExtendedReal::Finite(-beta_log))
}

pub fn logsumexp(vals: &[f64]) -> f64 {
    let mx = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    mx + vals.iter().map(|v| (v - mx).exp()).sum::<f64>().ln()
}

/// Smooth max-relative entropy: log of the optimal m of
///   min m  s.t.  m*sigma - rho_tilde >= 0,  tr rho_tilde = 1,
///                [[rho, X], [X^dag, rho_tilde]] >= 0,
///                Re tr X >= sqrt(1 - eps^2),
/// i.e. minimization over the purified-distance ball of normalized states.
pub fn smooth_dmax(rho: &DensityOperator, sigma: &DensityOperator, eps: f64) -> Result<ExtendedReal> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside [0,1)")));
    }
    if eps == 0.0 {
        return crate::divergence::dmax(rho, sigma);
    }
    let d = rho.dim();
    // blocks: Y (2d, the fidelity block), Z = m sigma - rho_tilde (d),
    // m (1), u >= 0 slack (1)
    let mut p = SDPProblem::new(vec![2 * d, d, 1, 1]);
    let mut c_m = CMat::zeros(1, 1);
    c_m[(0, 0)] = C64::new(1.0, 0.0);
    p.set_objective(2, c_m);

    // (a) pin Y11 = rho
    for c in 0..d * d {
        let (i, j) = (c / d, c % d);
        let e = herm_basis_entry(c, d);
        let shifted: Vec<(usize, usize, C64)> = e.iter().map(|&(a, b, v)| (a, b, v)).collect();
        let _ = (i, j);
        p.add_constraint(
            vec![(0, SparseHerm::from_upper(&shifted))],
            herm_basis_coord(c, d, rho.matrix()),
        );
    }
    // (b) Z + Y22 - m sigma = 0
    for c in 0..d * d {
        let e = herm_basis_entry(c, d);
        let y22: Vec<(usize, usize, C64)> = e.iter().map(|&(a, b, v)| (a + d, b + d, v)).collect();
        let scoef = herm_basis_coord(c, d, sigma.matrix());
        p.add_constraint(
            vec![
                (1, SparseHerm::from_upper(&e)),
                (0, SparseHerm::from_upper(&y22)),
                (2, SparseHerm::from_upper(&[(0, 0, C64::new(-scoef, 0.0))])),
            ],
            0.0,
        );
    }
    // (c) tr Y22 = 1
    let diag22: Vec<(usize, usize, C64)> =
        (0..d).map(|i| (d + i, d + i, C64::new(1.0, 0.0))).collect();
    p.add_constraint(vec![(0, SparseHerm::from_upper(&diag22))], 1.0);
    // (d) 2 Re tr Y12 - u = 2 sqrt(1 - eps^2)
    let offdiag: Vec<(usize, usize, C64)> =
        (0..d).map(|i| (i, d + i, C64::new(1.0, 0.0))).collect();
    p.add_constraint(
        vec![
            (0, SparseHerm::from_upper(&offdiag)),
            (3, SparseHerm::from_upper(&[(0, 0, C64::new(-1.0, 0.0))])),
        ],
        2.0 * (1.0 - eps * eps).sqrt(),
    );

    let sol = sdp::solve(&p, &SolveOptions::default())?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::InvalidArgument("smooth_dmax SDP did not converge".into()));
    }
    let m_opt = sol.primal_obj.max(1e-300);
    Ok(ExtendedReal::Finite(m_opt.ln()))
}

#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Verifies D_H^{1-eps} >= D_max^{sqrt(eps)} - log(1/(1-eps))
///               >= D_H^{1-eps-nu} - log(4/nu^2), slack >= -1e-6.
pub fn buscemi_sandwich_check(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    eps: f64,
    nu: f64,
) -> Result<SandwichReport> {
    if !(eps > 0.0 && eps < 1.0) || !(nu > 0.0 && nu < 1.0 - eps) {
        return Err(Error::InvalidArgument(format!("eps {eps}, nu {nu} out of range")));
    }
    let lhs = dh(rho, sigma, 1.0 - eps)?.value();
    let mid = smooth_dmax(rho, sigma, eps.sqrt())?.value() - (1.0 / (1.0 - eps)).ln();
    let rhs = dh(rho, sigma, 1.0 - eps - nu)?.value() - (4.0 / (nu * nu)).ln();
    let pass = lhs >= mid - 1e-6 && mid >= rhs - 1e-6;
    Ok(SandwichReport { lhs, mid, rhs, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{dmax, purified_distance};
    use crate::tensor::{CVec, DensityOperator, PureState, SiteStructure, partial_trace_drop,
        random_density, tensor};
    use approx::assert_abs_diff_eq;

    fn diag2(p: f64) -> DensityOperator {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(p, 0.0), C64::new(1.0 - p, 0.0)]));
        DensityOperator::from_matrix(m).unwrap()
    }

    #[test]
    fn beta_eps_equal_states_binds() {
        let rho = random_density(3, 3, 1).unwrap();
        let (beta, m) = beta_eps(&rho, &rho, 0.3).unwrap();
        assert_abs_diff_eq!(beta, 0.7, epsilon = 1e-9);
        let trm = crate::tensor::herm_inner(rho.matrix(), m.m.matrix());
        assert!(trm >= 0.7 - 1e-9);
        assert_abs_diff_eq!(dh(&rho, &rho, 0.3).unwrap().value(), -(0.7f64.ln()), epsilon = 1e-9);
    }

    #[test]
    fn beta_eps_orthogonal() {
        let p0 = PureState::basis(2, 0).projector();
        let p1 = PureState::basis(2, 1).projector();
        let (beta, _) = beta_eps(&p0, &p1, 0.5).unwrap();
        assert!(beta <= 1e-12);
        assert!(!dh(&p0, &p1, 0.5).unwrap().is_finite());
    }

    #[test]
    fn beta_eps_classical_neyman_pearson() {
        let (beta, m) = beta_eps(&diag2(0.7), &diag2(0.4), 0.3).unwrap();
        assert_abs_diff_eq!(beta, 0.4, epsilon = 1e-9);
        assert_abs_diff_eq!(m.m.matrix()[(0, 0)].re, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m.m.matrix()[(1, 1)].re, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(
            dh(&diag2(0.7), &diag2(0.4), 0.3).unwrap().value(),
            0.91629,
            epsilon = 1e-5
        );
    }

    #[test]
    fn np_matches_sdp() {
        for seed in 0..20u64 {
            let d = 2 + (seed % 3) as usize;
            let rho = random_density(d, d, 1000 + seed).unwrap();
            let sig = random_density(d, d, 2000 + seed).unwrap();
            let eps = 0.1 + 0.2 * ((seed % 4) as f64);
            let (beta, _) = beta_eps(&rho, &sig, eps).unwrap();
            let beta_sdp = beta_eps_sdp(&rho, &sig, eps).unwrap();
            assert!(
                (beta - beta_sdp).abs() <= 1e-6,
                "seed {seed}: NP {beta} vs SDP {beta_sdp}"
            );
        }
    }

    #[test]
    fn beta_monotone_in_eps() {
        let rho = random_density(3, 3, 5).unwrap();
        let sig = random_density(3, 3, 6).unwrap();
        let mut prev = f64::INFINITY;
        for eps in [0.1, 0.2, 0.3, 0.5, 0.7, 0.9] {
            let (beta, _) = beta_eps(&rho, &sig, eps).unwrap();
            assert!(beta <= prev + 1e-9);
            prev = beta;
        }
    }

    #[test]
    fn dh_dpi_under_partial_trace() {
        let s = SiteStructure::uniform(2, 2).unwrap();
        for seed in 0..10u64 {
            let rho = random_density(4, 4, 3000 + seed).unwrap();
            let sig = random_density(4, 4, 4000 + seed).unwrap();
            let rho_a = DensityOperator::from_exact(
                partial_trace_drop(rho.herm(), &[1], &s).unwrap().into_matrix(),
            );
            let sig_a = DensityOperator::from_exact(
                partial_trace_drop(sig.herm(), &[1], &s).unwrap().into_matrix(),
            );
            let full = dh(&rho, &sig, 0.25).unwrap().value();
            let red = dh(&rho_a, &sig_a, 0.25).unwrap().value();
            assert!(full >= red - 1e-7, "seed {seed}: {full} < {red}");
        }
    }

    #[test]
    fn classical_iid_small_cases() {
        // n=1 agrees with the generic quantum path on diagonal states
        let v = dh_classical_iid(&[0.7, 0.3], &[0.4, 0.6], 1, 0.3).unwrap().value();
        let q = dh(&diag2(0.7), &diag2(0.4), 0.3).unwrap().value();
        assert_abs_diff_eq!(v, q, epsilon = 1e-10);

        // p = q: -log(1 - eps)
        let v = dh_classical_iid(&[0.5, 0.5], &[0.5, 0.5], 10, 0.4).unwrap().value();
        assert_abs_diff_eq!(v, -(0.6f64.ln()), epsilon = 1e-10);
    }

    #[test]
    fn classical_iid_stein_convergence() {
        let d = 0.7 * (0.7f64 / 0.4).ln() + 0.3 * (0.3f64 / 0.6).ln();
        let v = dh_classical_iid(&[0.7, 0.3], &[0.4, 0.6], 1000, 0.5).unwrap().value() / 1000.0;
        assert!((v - d).abs() <= 0.05, "per-copy rate {v} vs {d}");
    }

    #[test]
    fn smooth_dmax_basic() {
        let rho = random_density(2, 2, 11).unwrap();
        let sig = random_density(2, 2, 12).unwrap();
        // eps = 0 equals dmax
        let a = smooth_dmax(&rho, &sig, 0.0).unwrap().value();
        let b = dmax(&rho, &sig).unwrap().value();
        assert_abs_diff_eq!(a, b, epsilon = 1e-6);
        // self-smoothing is free
        let z = smooth_dmax(&rho, &rho, 0.2).unwrap().value();
        assert!(z <= 1e-6 && z >= -0.3, "smooth dmax of equal pair {z}");
        // smoothing helps
        let sm = smooth_dmax(&rho, &sig, 0.1).unwrap().value();
        assert!(sm <= b + 1e-8);
    }

    #[test]
    fn smooth_dmax_grid_oracle() {
        // ball-discretization upper bound: min over sampled feasible
        // rho_tilde of dmax, compared against the SDP value
        let rho = random_density(2, 2, 21).unwrap();
        let sig = random_density(2, 2, 22).unwrap();
        let eps = 0.1;
        let sdp_val = smooth_dmax(&rho, &sig, eps).unwrap().value();
        let mut grid_min = dmax(&rho, &sig).unwrap().value();
        for seed in 0..2500u64 {
            let dir = random_density(2, 2, 50_000 + seed).unwrap();
            // bisect the mixing weight to land near the ball boundary
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..25 {
                let t = 0.5 * (lo + hi);
                let mix = DensityOperator::from_exact(
                    rho.matrix().scale(1.0 - t) + dir.matrix().scale(t),
                );
                if purified_distance(&rho, &mix).unwrap() <= eps {
                    lo = t;
                } else {
                    hi = t;
                }
            }
            for t in [lo, 0.5 * lo] {
                let mix = DensityOperator::from_exact(
                    rho.matrix().scale(1.0 - t) + dir.matrix().scale(t),
                );
                if purified_distance(&rho, &mix).unwrap() <= eps {
                    let v = dmax(&mix, &sig).unwrap().value();
                    grid_min = grid_min.min(v);
                }
            }
        }
        assert!(sdp_val <= grid_min + 1e-6, "SDP {sdp_val} above grid {grid_min}");
        assert!(grid_min - sdp_val <= 2e-2, "grid gap {}", grid_min - sdp_val);
    }

    #[test]
    fn sandwich_cases() {
        let rho = random_density(2, 2, 31).unwrap();
        let rep = buscemi_sandwich_check(&rho, &rho, 0.5, 0.1).unwrap();
        assert!(rep.pass, "{rep:?}");

        let rep = buscemi_sandwich_check(&diag2(0.7), &diag2(0.4), 0.36, 0.1).unwrap();
        assert!(rep.pass, "{rep:?}");

        for seed in 0..10u64 {
            let rho = random_density(2, 2, 6000 + seed).unwrap();
            let sig = random_density(2, 2, 7000 + seed).unwrap();
            let rep = buscemi_sandwich_check(&rho, &sig, 0.1, 0.1).unwrap();
            assert!(rep.pass, "seed {seed}: {rep:?}");
        }
    }

    #[test]
    fn dh_on_product_pairs_adds_up() {
        // sanity against the classical path at n=2
        let rho = diag2(0.7);
        let sig = diag2(0.4);
        let rho2 = DensityOperator::from_exact(
            tensor(&[rho.herm(), rho.herm()]).unwrap().into_matrix(),
        );
        let sig2 = DensityOperator::from_exact(
            tensor(&[sig.herm(), sig.herm()]).unwrap().into_matrix(),
        );
        let v_quantum = dh(&rho2, &sig2, 0.3).unwrap().value();
        let v_classical = dh_classical_iid(&[0.7, 0.3], &[0.4, 0.6], 2, 0.3).unwrap().value();
        assert_abs_diff_eq!(v_quantum, v_classical, epsilon = 1e-8);
    }
}
