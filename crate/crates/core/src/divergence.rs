//! Eigendecomposition-based divergences and distances: relative entropy,
//! binary entropy, fidelity / purified distance, max- and min-relative
//! entropies, the sandwiched Renyi family, and Uhlmann extensions.
//!
//! All quantities are in nats. Support violations and orthogonality yield
//! the distinguished value +infinity; the support cutoff is shared with
//! the tensor module (`tol::SUPPORT_REL`).

use crate::error::{Error, Result};
use crate::tensor::{
    CMat, DensityOperator, HermitianOperator, MatFn, PureState, SiteStructure, eigh,
    matrix_function, partial_trace_drop, support_cutoff, support_projector,
};

/// A value in nats, or +infinity from a support violation / orthogonality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Inf,
}

impl ExtendedReal {
    pub fn value(self) -> f64 {
        match self {
            ExtendedReal::Finite(x) => x,
            ExtendedReal::Inf => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }
}

impl std::fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::Inf => write!(f, "inf"),
        }
    }
}

fn check_dims(a: &DensityOperator, b: &DensityOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch(format!("{} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// Mass of `rho` outside the support of `op` (trace of the projected-out part).
fn support_leak(rho: &DensityOperator, op: &HermitianOperator) -> f64 {
    let pi = support_projector(op);
    let d = rho.dim();
    let compl = CMat::identity(d, d) - pi.matrix();
    // tr[(I - Pi) rho (I - Pi)] = tr[rho (I - Pi)] for a projector
    (&compl * rho.matrix()).diagonal().iter().map(|z| z.re).sum()
}

const SUPPORT_LEAK_TOL: f64 = 1e-9;

/// tr[rho (log rho - log sigma)] on the joint support, +inf if the support
/// of rho is not contained in that of sigma.
pub fn rel_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<ExtendedReal> {
    check_dims(rho, sigma)?;
    if support_leak(rho, sigma.herm()) > SUPPORT_LEAK_TOL {
        return Ok(ExtendedReal::Inf);
    }
    let (evals_r, _) = eigh(rho.herm());
    let cut_r = support_cutoff(&evals_r);
    let s_rho: f64 = evals_r.iter().filter(|&&l| l > cut_r).map(|&l| l * l.ln()).sum();
    let log_sigma = matrix_function(sigma.herm(), MatFn::Log);
    let cross: f64 = (rho.matrix() * log_sigma.matrix()).diagonal().iter().map(|z| z.re).sum();
    Ok(ExtendedReal::Finite(s_rho - cross))
}

/// h(x) = -x log x - (1-x) log(1-x), natural log.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("binary_entropy({x})")));
    }
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.ln() };
    Ok(term(x) + term(1.0 - x))
}

/// F = ||sqrt(rho) sqrt(sigma)||_1^2, clamped into [0,1].
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dims(rho, sigma)?;
    let sq = matrix_function(rho.herm(), MatFn::Sqrt);
    let m = HermitianOperator::from_exact(sq.matrix() * sigma.matrix() * sq.matrix());
    let (evals, _) = eigh(&m);
    let root_sum: f64 = evals.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

/// P = sqrt(1 - F).
pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    Ok((1.0 - fidelity(rho, sigma)?).max(0.0).sqrt())
}

/// log lambda_max(sigma^{-1/2} rho sigma^{-1/2}); +inf on support leak.
pub fn dmax(rho: &DensityOperator, sigma: &DensityOperator) -> Result<ExtendedReal> {
    check_dims(rho, sigma)?;
    if support_leak(rho, sigma.herm()) > SUPPORT_LEAK_TOL {
        return Ok(ExtendedReal::Inf);
    }
    let isq = matrix_function(sigma.herm(), MatFn::Power(-0.5));
    let w = HermitianOperator::from_exact(isq.matrix() * rho.matrix() * isq.matrix());
    let (evals, _) = eigh(&w);
    let lmax = evals.last().copied().unwrap_or(0.0);
    if lmax <= 0.0 {
        return Ok(ExtendedReal::Inf);
    }
    Ok(ExtendedReal::Finite(lmax.ln()))
}

/// -log F(rho, sigma); +inf when F = 0.
pub fn dmin(rho: &DensityOperator, sigma: &DensityOperator) -> Result<ExtendedReal> {
    let f = fidelity(rho, sigma)?;
    if f <= 0.0 {
        return Ok(ExtendedReal::Inf);
    }
    Ok(ExtendedReal::Finite(-f.ln()))
}

/// Sandwiched Renyi relative entropy of order alpha in [1/2,1) or (1,inf).
pub fn renyi_sandwiched(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    alpha: f64,
) -> Result<ExtendedReal> {
    check_dims(rho, sigma)?;
    if !((0.5..1.0).contains(&alpha) || alpha > 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside [1/2,1) u (1,inf)")));
    }
    if alpha > 1.0 && support_leak(rho, sigma.herm()) > SUPPORT_LEAK_TOL {
        return Ok(ExtendedReal::Inf);
    }
    let p = (1.0 - alpha) / (2.0 * alpha);
    let sp = matrix_function(sigma.herm(), MatFn::Power(p));
    let q = HermitianOperator::from_exact(sp.matrix() * rho.matrix() * sp.matrix());
    let (evals, _) = eigh(&q);
    let total: f64 = evals.iter().map(|&l| l.max(0.0).powf(alpha)).sum();
    if total <= 0.0 {
        return Ok(ExtendedReal::Inf);
    }
    Ok(ExtendedReal::Finite(total.ln() / (alpha - 1.0)))
}

/// Extension of sigma_A to the AB system with F(rho_AB, out) = F(rho_A, sigma_A),
/// built from canonical purifications aligned by the polar unitary of their
/// overlap. Site 0 of `s` is A, the remaining sites form B.
pub fn uhlmann_extension(
    rho_ab: &DensityOperator,
    sigma_a: &DensityOperator,
    s: &SiteStructure,
) -> Result<DensityOperator> {
    s.check_dim(rho_ab.dim())?;
    let da = s.dims[0];
    if sigma_a.dim() != da {
        return Err(Error::DimMismatch("sigma_A vs A factor".into()));
    }
    let d = rho_ab.dim();
    let db = d / da;
    let dk = db * d; // K = B (x) R with R ~ AB

    // |psi> on A (x) K purifying rho_AB over R.
    let psi = crate::tensor::canonical_purification(rho_ab)?;
    let psi_m = CMat::from_fn(da, dk, |a, k| psi.vector()[a * dk + k]);

    // |phi0> on A (x) K purifying sigma_A, second factor embedded in K.
    let phi0_small = crate::tensor::canonical_purification(sigma_a)?;
    let mut phi_m = CMat::zeros(da, dk);
    for a in 0..da {
        for a2 in 0..da {
            phi_m[(a, a2)] = phi0_small.vector()[a * da + a2];
        }
    }

    // G[k,k'] = sum_a conj(Psi[a,k]) Phi[a,k']; align by the polar unitary
    // of G^T so the overlap reaches the Uhlmann fidelity.
    let g = psi_m.adjoint() * &phi_m;
    let gt = g.transpose();
    let svd = gt.svd(true, true);
    let v = svd.u.as_ref().expect("svd U");
    let w = svd.v_t.as_ref().expect("svd V^T");
    let u = w.adjoint() * v.adjoint(); // maximizes Re tr[U G^T]

    // |phi> = (I_A (x) U) |phi0>, then trace out R.
    let phi_aligned = &phi_m * u.transpose();
    let mut vec = crate::tensor::CVec::zeros(da * dk);
    for a in 0..da {
        for k in 0..dk {
            vec[a * dk + k] = phi_aligned[(a, k)];
        }
    }
    let phi = PureState::from_unnormalized(vec)?;
    // full layout: (A, B, R) with R of dimension d
    let s_full = SiteStructure::new(vec![da, db, d])?;
    let red = partial_trace_drop(phi.projector().herm(), &[2], &s_full)?;
    Ok(DensityOperator::from_exact(red.into_matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{CVec, C64, random_density, tensor};
    use approx::assert_abs_diff_eq;

    const LN2: f64 = std::f64::consts::LN_2;

    fn pure0() -> DensityOperator {
        PureState::basis(2, 0).projector()
    }

    fn pure1() -> DensityOperator {
        PureState::basis(2, 1).projector()
    }

    fn mixed() -> DensityOperator {
        DensityOperator::maximally_mixed(2)
    }

    fn diag2(p: f64) -> DensityOperator {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(p, 0.0), C64::new(1.0 - p, 0.0)]));
        DensityOperator::from_matrix(m).unwrap()
    }

    #[test]
    fn rel_entropy_cases() {
        let rho = random_density(3, 3, 1).unwrap();
        assert_abs_diff_eq!(rel_entropy(&rho, &rho).unwrap().value(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rel_entropy(&pure0(), &mixed()).unwrap().value(), LN2, epsilon = 1e-10);
        // scalar oracle 0.7 ln(0.7/0.4) + 0.3 ln(0.3/0.6)
        let oracle = 0.7 * (0.7f64 / 0.4).ln() + 0.3 * (0.3f64 / 0.6).ln();
        assert_abs_diff_eq!(
            rel_entropy(&diag2(0.7), &diag2(0.4)).unwrap().value(),
            oracle,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(oracle, 0.18381, epsilon = 5e-5);
        assert!(!rel_entropy(&mixed(), &pure0()).unwrap().is_finite());
    }

    #[test]
    fn binary_entropy_cases() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(binary_entropy(0.5).unwrap(), LN2, epsilon = 1e-14);
        assert_abs_diff_eq!(binary_entropy(0.1).unwrap(), 0.32508, epsilon = 5e-6);
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn fidelity_cases() {
        let rho = random_density(4, 2, 5).unwrap();
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(purified_distance(&rho, &rho).unwrap(), 0.0, epsilon = 1e-4);
        assert_abs_diff_eq!(fidelity(&pure0(), &pure1()).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(purified_distance(&pure0(), &pure1()).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&pure0(), &mixed()).unwrap(), 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(
            purified_distance(&pure0(), &mixed()).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn dmax_dmin_cases() {
        let rho = random_density(3, 3, 2).unwrap();
        assert_abs_diff_eq!(dmax(&rho, &rho).unwrap().value(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(dmin(&rho, &rho).unwrap().value(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(dmax(&pure0(), &mixed()).unwrap().value(), LN2, epsilon = 1e-10);
        assert_abs_diff_eq!(dmin(&pure0(), &mixed()).unwrap().value(), LN2, epsilon = 1e-10);
        assert!(!dmax(&pure0(), &pure1()).unwrap().is_finite());
        assert!(!dmin(&pure0(), &pure1()).unwrap().is_finite());
    }

    #[test]
    fn renyi_cases() {
        let rho = random_density(3, 3, 3).unwrap();
        assert_abs_diff_eq!(renyi_sandwiched(&rho, &rho, 2.0).unwrap().value(), 0.0, epsilon = 1e-9);
        for alpha in [0.5, 2.0, 10.0] {
            assert_abs_diff_eq!(
                renyi_sandwiched(&pure0(), &mixed(), alpha).unwrap().value(),
                LN2,
                epsilon = 1e-9
            );
        }
        assert!(renyi_sandwiched(&rho, &rho, 1.0).is_err());
        assert!(renyi_sandwiched(&rho, &rho, 0.3).is_err());
    }

    #[test]
    fn renyi_approaches_rel_entropy_on_commuting_pair() {
        // classical Renyi scalar formula converges to relative entropy
        let rho = diag2(0.65);
        let sig = diag2(0.35);
        let d1 = renyi_sandwiched(&rho, &sig, 1.0 + 1e-5).unwrap().value();
        let d = rel_entropy(&rho, &sig).unwrap().value();
        assert_abs_diff_eq!(d1, d, epsilon = 1e-4);
    }

    #[test]
    fn renyi_alpha_monotone_and_bounds() {
        let rho = random_density(3, 3, 7).unwrap();
        let sig = random_density(3, 3, 8).unwrap();
        let grid = [0.5, 0.9, 1.5, 2.0, 5.0, 50.0];
        let vals: Vec<f64> =
            grid.iter().map(|&a| renyi_sandwiched(&rho, &sig, a).unwrap().value()).collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        let dm = dmax(&rho, &sig).unwrap().value();
        assert!((vals[5] - dm).abs() < 0.02);
        let dn = dmin(&rho, &sig).unwrap().value();
        let d = rel_entropy(&rho, &sig).unwrap().value();
        assert!(dn <= d + 1e-7 && d <= dm + 1e-7);
    }

    #[test]
    fn purified_distance_triangle() {
        for seed in 0..10u64 {
            let a = random_density(3, 3, 100 + seed).unwrap();
            let b = random_density(3, 3, 200 + seed).unwrap();
            let c = random_density(3, 3, 300 + seed).unwrap();
            let pab = purified_distance(&a, &b).unwrap();
            let pbc = purified_distance(&b, &c).unwrap();
            let pac = purified_distance(&a, &c).unwrap();
            assert!(pac <= pab + pbc + 1e-9);
        }
    }

    #[test]
    fn uhlmann_extension_cases() {
        let s = SiteStructure::uniform(2, 2).unwrap();
        // product input with matching marginal: fidelity 1
        let ra = random_density(2, 2, 11).unwrap();
        let rb = random_density(2, 2, 12).unwrap();
        let prod =
            DensityOperator::from_exact(tensor(&[ra.herm(), rb.herm()]).unwrap().into_matrix());
        let out = uhlmann_extension(&prod, &ra, &s).unwrap();
        assert_abs_diff_eq!(fidelity(&prod, &out).unwrap(), 1.0, epsilon = 1e-7);

        // Bell with sigma_A = I/2: marginals already equal
        let mut v = CVec::zeros(4);
        v[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[3] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let bell = PureState::new(v).unwrap().projector();
        let out = uhlmann_extension(&bell, &mixed(), &s).unwrap();
        assert_abs_diff_eq!(fidelity(&bell, &out).unwrap(), 1.0, epsilon = 1e-7);

        // random pair: fidelity equality with the marginal fidelity oracle
        for seed in 0..20u64 {
            let rho_ab = random_density(4, 4, 400 + seed).unwrap();
            let sig_a = random_density(2, 2, 500 + seed).unwrap();
            let out = uhlmann_extension(&rho_ab, &sig_a, &s).unwrap();
            let marg = partial_trace_drop(out.herm(), &[1], &s).unwrap();
            assert!((marg.matrix() - sig_a.matrix()).norm() < 1e-8);
            let rho_a = DensityOperator::from_exact(
                partial_trace_drop(rho_ab.herm(), &[1], &s).unwrap().into_matrix(),
            );
            let f_marg = fidelity(&rho_a, &sig_a).unwrap();
            let f_full = fidelity(&rho_ab, &out).unwrap();
            assert_abs_diff_eq!(f_full, f_marg, epsilon = 1e-7);
        }
    }
}
