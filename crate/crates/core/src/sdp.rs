//! Dense primal-dual interior-point solver for complex Hermitian
//! semidefinite programs in equality standard form:
//!
//!   min  sum_b Re tr[C_b X_b]
//!   s.t. sum_b Re tr[A_{k,b} X_b] = b_k,   X_b >= 0.
//!
//! The search direction is the dual (HKM) symmetrized direction with a
//! Mehrotra predictor-corrector; the Schur complement is assembled from
//! sparse constraint operators and factored by a dense Cholesky (faer).
//! Complex Hermitian blocks are handled natively rather than realified.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::tensor::{C64, CMat, HermitianOperator, eigh};
use crate::tol;

/// Hermitian constraint coefficient on one block, stored as the full entry
/// list (both triangles present; diagonal entries real).
#[derive(Debug, Clone, Default)]
pub struct SparseHerm {
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseHerm {
    /// Build from upper-triangle entries; mirror entries are implied.
    pub fn from_upper(upper: &[(usize, usize, C64)]) -> Self {
        let mut entries = Vec::with_capacity(upper.len() * 2);
        for &(i, j, v) in upper {
            assert!(i <= j, "from_upper expects i <= j");
            if i == j {
                entries.push((i, i, C64::new(v.re, 0.0)));
            } else {
                entries.push((i, j, v));
                entries.push((j, i, v.conj()));
            }
        }
        Self { entries }
    }

    pub fn from_dense(m: &CMat) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)].norm() > 0.0 {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Self { entries }
    }

    pub fn to_dense(&self, dim: usize) -> CMat {
        let mut m = CMat::zeros(dim, dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    /// Re tr[A W] for dense W.
    fn inner(&self, w: &CMat) -> f64 {
        self.entries.iter().map(|&(i, j, v)| (v * w[(j, i)]).re).sum()
    }

    /// W += y * A (dense accumulation).
    fn add_into(&self, w: &mut CMat, y: f64) {
        for &(i, j, v) in &self.entries {
            w[(i, j)] += v.scale(y);
        }
    }
}

/// One equality constraint: coefficients on the blocks it touches.
#[derive(Debug, Clone, Default)]
pub struct ConstraintOp {
    pub terms: Vec<(usize, SparseHerm)>,
}

#[derive(Debug, Clone)]
pub struct SDPProblem {
    pub block_dims: Vec<usize>,
    pub c: Vec<CMat>,
    pub constraints: Vec<ConstraintOp>,
    pub b: Vec<f64>,
}

impl SDPProblem {
    pub fn new(block_dims: Vec<usize>) -> Self {
        let c = block_dims.iter().map(|&d| CMat::zeros(d, d)).collect();
        Self { block_dims, c, constraints: Vec::new(), b: Vec::new() }
    }

    pub fn set_objective(&mut self, block: usize, c: CMat) {
        self.c[block] = c;
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, SparseHerm)>, rhs: f64) {
        self.constraints.push(ConstraintOp { terms });
        self.b.push(rhs);
    }

    /// Equality `Re tr[B X_block] = rhs` for every element B of a Hermitian
    /// operator basis of the given index set; used to pin a sub-block of a
    /// variable to a given Hermitian matrix via a caller-built closure.
    pub fn n_constraints(&self) -> usize {
        self.b.len()
    }
}

/// Hermitian basis element of a d-dimensional space, enumerated by
/// c in 0..d^2: diagonal E_ii, then (E_ij + E_ji)/sqrt2-style real and
/// imaginary pairs (unnormalized: entries 1 and +/- i).
pub fn herm_basis_entry(c: usize, d: usize) -> Vec<(usize, usize, C64)> {
    // order: c = i*d + j; j == i -> E_ii ; j > i -> real pair; j < i -> imag pair
    let i = c / d;
    let j = c % d;
    if i == j {
        vec![(i, i, C64::new(1.0, 0.0))]
    } else if j > i {
        vec![(i, j, C64::new(1.0, 0.0))]
    } else {
        vec![(j, i, C64::new(0.0, 1.0))]
    }
}

/// Re tr[B M] for the basis element c against a dense Hermitian M: picks
/// out the independent real coordinates of M.
pub fn herm_basis_coord(c: usize, d: usize, m: &CMat) -> f64 {
    let i = c / d;
    let j = c % d;
    if i == j {
        m[(i, i)].re
    } else if j > i {
        2.0 * m[(i, j)].re
    } else {
        -2.0 * m[(j, i)].im
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub iter: usize,
    pub mu: f64,
    pub primal: f64,
    pub dual: f64,
    pub rp_norm: f64,
    pub rd_norm: f64,
}

#[derive(Debug, Clone)]
pub struct SDPSolution {
    pub x: Vec<CMat>,
    pub y: Vec<f64>,
    pub s: Vec<CMat>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    pub collect_trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap_tol: tol::SDP_GAP_TOL,
            feas_tol: tol::SDP_FEAS_TOL,
            max_iter: tol::SDP_MAX_ITER,
            collect_trace: false,
        }
    }
}

static GLOBAL_TRACE: std::sync::Mutex<Option<std::path::PathBuf>> = std::sync::Mutex::new(None);
static TRACE_SOLVE_ID: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);

/// Route per-iteration solver rows from every subsequent solve into a
/// CSV file at `path` (header written once). Used by the CLI trace flag.
pub fn enable_global_trace(path: std::path::PathBuf) -> Result<()> {
    use std::io::Write;
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "solve_id,iter,mu,primal,dual,rp_norm,rd_norm\r")?;
    *GLOBAL_TRACE.lock().unwrap() = Some(path);
    Ok(())
}

fn global_trace_enabled() -> bool {
    GLOBAL_TRACE.lock().unwrap().is_some()
}

fn global_trace_dump(rows: &[TraceRow]) {
    use std::io::Write;
    let guard = GLOBAL_TRACE.lock().unwrap();
    let Some(path) = guard.as_ref() else { return };
    let id = TRACE_SOLVE_ID.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
    if let Ok(mut f) = std::fs::OpenOptions::new().append(true).open(path) {
        for r in rows {
            let _ = writeln!(
                f,
                "{id},{},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\r",
                r.iter, r.mu, r.primal, r.dual, r.rp_norm, r.rd_norm
            );
        }
    }
}

fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest alpha with X + alpha*D >= 0, given the Cholesky factor of X.
fn step_to_boundary(chol: &Cholesky<C64, nalgebra::Dyn>, d: &CMat) -> f64 {
    let l = chol.l();
    let tmp = l.solve_lower_triangular(d).expect("lower solve");
    // G = L^-1 D L^-H  =  (L^-1 (L^-1 D)^H)^H
    let g = l.solve_lower_triangular(&tmp.adjoint()).expect("lower solve").adjoint();
    let (evals, _) = eigh(&HermitianOperator::from_exact(g));
    let lmin = evals.first().copied().unwrap_or(0.0);
    if lmin >= -1e-13 { f64::INFINITY } else { -1.0 / lmin }
}

struct FaerChol {
    inner: faer::linalg::solvers::Cholesky<f64>,
}

impl FaerChol {
    fn new(m: &nalgebra::DMatrix<f64>) -> Option<Self> {
        use faer::Side;
        let n = m.nrows();
        let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
        fm.cholesky(Side::Lower).ok().map(|inner| Self { inner })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        use faer::prelude::*;
        let n = rhs.len();
        let r = faer::Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
        let x = self.inner.solve(&r);
        (0..n).map(|i| x[(i, 0)]).collect()
    }
}

pub fn solve(p: &SDPProblem, opts: &SolveOptions) -> Result<SDPSolution> {
    let nb = p.block_dims.len();
    let m = p.constraints.len();
    if p.b.len() != m || p.c.len() != nb {
        return Err(Error::InvalidArgument("inconsistent SDP problem shape".into()));
    }
    let total_dim: usize = p.block_dims.iter().sum();

    let b_scale = 1.0 + p.b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let c_scale =
        1.0 + p.c.iter().flat_map(|c| c.iter()).map(|z| z.norm()).fold(0.0, f64::max);

    let mut x: Vec<CMat> =
        p.block_dims.iter().map(|&d| CMat::identity(d, d).scale(b_scale.max(1.0))).collect();
    let mut s: Vec<CMat> =
        p.block_dims.iter().map(|&d| CMat::identity(d, d).scale(c_scale.max(1.0))).collect();
    let mut y = vec![0.0f64; m];

    // constraint indices touching each block
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for (k, con) in p.constraints.iter().enumerate() {
        for &(bi, _) in &con.terms {
            touching[bi].push(k);
        }
    }

    let mut trace = Vec::new();
    let mut status = SdpStatus::MaxIter;
    let mut iterations = 0;
    let mut last = (f64::NAN, f64::NAN, f64::NAN, f64::NAN); // primal,dual,rp,rd

    for iter in 0..opts.max_iter {
        iterations = iter + 1;

        // Cholesky of X and S per block (backtracking guarantees PD).
        let chol_x: Vec<Cholesky<C64, nalgebra::Dyn>> = x
            .iter()
            .map(|xb| Cholesky::new(xb.clone()).ok_or(Error::InvalidArgument("X not PD".into())))
            .collect::<Result<_>>()?;
        let chol_s: Vec<Cholesky<C64, nalgebra::Dyn>> = s
            .iter()
            .map(|sb| Cholesky::new(sb.clone()).ok_or(Error::InvalidArgument("S not PD".into())))
            .collect::<Result<_>>()?;
        let s_inv: Vec<CMat> = chol_s
            .iter()
            .zip(&p.block_dims)
            .map(|(c, &d)| hermitize(&c.solve(&CMat::identity(d, d))))
            .collect();

        // residuals
        let mut rp = vec![0.0f64; m];
        for (k, con) in p.constraints.iter().enumerate() {
            let mut ax = 0.0;
            for (bi, sp) in &con.terms {
                ax += sp.inner(&x[*bi]);
            }
            rp[k] = p.b[k] - ax;
        }
        let mut rd: Vec<CMat> = (0..nb).map(|bi| &p.c[bi] - &s[bi]).collect();
        for (k, con) in p.constraints.iter().enumerate() {
            for (bi, sp) in &con.terms {
                sp.add_into(&mut rd[*bi], -y[k]);
            }
        }

        let mu: f64 = x
            .iter()
            .zip(&s)
            .map(|(xb, sb)| (xb * sb).diagonal().iter().map(|z| z.re).sum::<f64>())
            .sum::<f64>()
            / total_dim as f64;

        let primal: f64 = x.iter().zip(&p.c).map(|(xb, cb)| {
            (cb * xb).diagonal().iter().map(|z| z.re).sum::<f64>()
        }).sum();
        let dual: f64 = y.iter().zip(&p.b).map(|(yi, bi)| yi * bi).sum();

        let rp_norm = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / b_scale;
        let rd_norm =
            rd.iter().map(|r| r.norm().powi(2)).sum::<f64>().sqrt() / c_scale;
        let gap = (primal - dual).abs() / (1.0 + primal.abs() + dual.abs());

        if opts.collect_trace || global_trace_enabled() {
            trace.push(TraceRow { iter, mu, primal, dual, rp_norm, rd_norm });
        }
        last = (primal, dual, rp_norm, rd_norm);

        if gap <= opts.gap_tol && rp_norm <= opts.feas_tol && rd_norm <= opts.feas_tol {
            status = SdpStatus::Optimal;
            break;
        }

        // T_k = X A_k S^{-1} per touched block, via outer products.
        // Stored per block as a map constraint -> dense matrix.
        let mut t_blocks: Vec<Vec<CMat>> = Vec::with_capacity(nb);
        for bi in 0..nb {
            let d = p.block_dims[bi];
            let xb = &x[bi];
            let sib = &s_inv[bi];
            let mut tv = Vec::with_capacity(touching[bi].len());
            for &k in &touching[bi] {
                let sp = p.constraints[k]
                    .terms
                    .iter()
                    .find(|(b2, _)| *b2 == bi)
                    .map(|(_, sp)| sp)
                    .unwrap();
                let mut t = CMat::zeros(d, d);
                for &(r, c, v) in &sp.entries {
                    // t += v * (X col r) (S^{-1} row c)
                    let xc = xb.column(r);
                    let sr = sib.row(c);
                    for a in 0..d {
                        let f = v * xc[a];
                        for bcol in 0..d {
                            t[(a, bcol)] += f * sr[bcol];
                        }
                    }
                }
                tv.push(t);
            }
            t_blocks.push(tv);
        }

        // Schur complement M_{jk} = sum_b Re tr[A_j^b T_k^b]
        let mut schur = nalgebra::DMatrix::<f64>::zeros(m, m);
        for bi in 0..nb {
            for (pos_k, &k) in touching[bi].iter().enumerate() {
                let t = &t_blocks[bi][pos_k];
                for &j in &touching[bi] {
                    let spj = p.constraints[j]
                        .terms
                        .iter()
                        .find(|(b2, _)| *b2 == bi)
                        .map(|(_, sp)| sp)
                        .unwrap();
                    schur[(j, k)] += spj.inner(t);
                }
            }
        }
        // exact symmetrization (Re part is symmetric analytically)
        for j in 0..m {
            for k in (j + 1)..m {
                let v = 0.5 * (schur[(j, k)] + schur[(k, j)]);
                schur[(j, k)] = v;
                schur[(k, j)] = v;
            }
        }

        // factor with escalating ridge if needed
        let base = 1.0 + (0..m).map(|i| schur[(i, i)].abs()).fold(0.0, f64::max);
        let mut chol_m = FaerChol::new(&schur);
        let mut ridge = 1e-13 * base;
        while chol_m.is_none() && ridge <= 1e-5 * base {
            let mut sm = schur.clone();
            for i in 0..m {
                sm[(i, i)] += ridge;
            }
            chol_m = FaerChol::new(&sm);
            ridge *= 100.0;
        }
        let chol_m = chol_m
            .ok_or_else(|| Error::InvalidArgument("Schur complement not factorizable".into()))?;

        // helper: given R_c per block, assemble rhs and recover directions
        let solve_direction = |rc: &[CMat]| -> (Vec<f64>, Vec<CMat>, Vec<CMat>) {
            let mut h = vec![0.0f64; m];
            for (k, con) in p.constraints.iter().enumerate() {
                let mut acc = rp[k];
                for (bi, sp) in &con.terms {
                    // - tr[A_k (R_c - X Rd) S^{-1}]
                    let w = (&rc[*bi] - &x[*bi] * &rd[*bi]) * &s_inv[*bi];
                    acc -= sp.inner(&w);
                }
                h[k] = acc;
            }
            let dy = chol_m.solve(&h);
            let mut ds: Vec<CMat> = rd.clone();
            for (k, con) in p.constraints.iter().enumerate() {
                for (bi, sp) in &con.terms {
                    sp.add_into(&mut ds[*bi], -dy[k]);
                }
            }
            let dx: Vec<CMat> = (0..nb)
                .map(|bi| hermitize(&((&rc[bi] - &x[bi] * &ds[bi]) * &s_inv[bi])))
                .collect();
            (dy, dx, ds)
        };

        // predictor (affine scaling): R_c = -X S
        let rc_aff: Vec<CMat> = (0..nb).map(|bi| -(&x[bi] * &s[bi])).collect();
        let (_dy_a, dx_a, ds_a) = solve_direction(&rc_aff);

        let alpha_p_max: f64 = (0..nb)
            .map(|bi| step_to_boundary(&chol_x[bi], &dx_a[bi]))
            .fold(f64::INFINITY, f64::min);
        let alpha_d_max: f64 = (0..nb)
            .map(|bi| step_to_boundary(&chol_s[bi], &ds_a[bi]))
            .fold(f64::INFINITY, f64::min);
        let ap = alpha_p_max.min(1.0);
        let ad = alpha_d_max.min(1.0);

        let mu_aff: f64 = (0..nb)
            .map(|bi| {
                let xn = &x[bi] + dx_a[bi].scale(ap);
                let sn = &s[bi] + ds_a[bi].scale(ad);
                (xn * sn).diagonal().iter().map(|z| z.re).sum::<f64>()
            })
            .sum::<f64>()
            .max(0.0)
            / total_dim as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(1e-10, 1.0);

        // corrector: R_c = sigma*mu*I - X S - dX_aff dS_aff
        let rc: Vec<CMat> = (0..nb)
            .map(|bi| {
                let d = p.block_dims[bi];
                CMat::identity(d, d).scale(sigma * mu) - &x[bi] * &s[bi] - &dx_a[bi] * &ds_a[bi]
            })
            .collect();
        let (dy, dx, ds) = solve_direction(&rc);

        let tau = if iter < 5 { 0.95 } else { 0.98 };
        let ap_max: f64 = (0..nb)
            .map(|bi| step_to_boundary(&chol_x[bi], &dx[bi]))
            .fold(f64::INFINITY, f64::min);
        let ad_max: f64 = (0..nb)
            .map(|bi| step_to_boundary(&chol_s[bi], &ds[bi]))
            .fold(f64::INFINITY, f64::min);
        let mut ap = (tau * ap_max).min(1.0);
        let mut ad = (tau * ad_max).min(1.0);

        // backtrack until Cholesky succeeds (floating-point safety net)
        for _ in 0..40 {
            let ok = (0..nb).all(|bi| {
                Cholesky::new(&x[bi] + dx[bi].scale(ap)).is_some()
            });
            if ok {
                break;
            }
            ap *= 0.5;
        }
        for _ in 0..40 {
            let ok = (0..nb).all(|bi| {
                Cholesky::new(&s[bi] + ds[bi].scale(ad)).is_some()
            });
            if ok {
                break;
            }
            ad *= 0.5;
        }

        for bi in 0..nb {
            x[bi] = hermitize(&(&x[bi] + dx[bi].scale(ap)));
            s[bi] = hermitize(&(&s[bi] + ds[bi].scale(ad)));
        }
        for k in 0..m {
            y[k] += ad * dy[k];
        }
    }

    if status != SdpStatus::Optimal {
        // residual-divergence heuristic: large residuals after max_iter
        let (_, _, rpn, rdn) = last;
        if rpn > 1e-4 || rdn > 1e-4 {
            status = SdpStatus::Infeasible;
        }
    }

    if global_trace_enabled() {
        global_trace_dump(&trace);
    }

    Ok(SDPSolution {
        primal_obj: last.0,
        dual_obj: last.1,
        x,
        y,
        s,
        status,
        iterations,
        trace,
    })
}

/// Random strictly feasible problem with known interior primal/dual pair;
/// the optimal value is certified through the duality gap.
pub fn random_feasible_problem(
    block_dims: &[usize],
    m: usize,
    seed: u64,
) -> SDPProblem {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut p = SDPProblem::new(block_dims.to_vec());

    // strictly feasible X0, S0 (identity plus small random Hermitian), y0
    let rand_herm = |rng: &mut rand_chacha::ChaCha8Rng, d: usize, scale: f64| -> CMat {
        let g = CMat::from_fn(d, d, |_, _| crate::tensor::gaussian_c64(rng));
        hermitize(&g).scale(scale)
    };
    let x0: Vec<CMat> = block_dims
        .iter()
        .map(|&d| {
            let h = rand_herm(&mut rng, d, 0.2 / d as f64);
            CMat::identity(d, d) + &h * h.adjoint()
        })
        .collect();
    let s0: Vec<CMat> = block_dims
        .iter()
        .map(|&d| {
            let h = rand_herm(&mut rng, d, 0.2 / d as f64);
            CMat::identity(d, d) + &h * h.adjoint()
        })
        .collect();
    let y0: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();

    // random sparse-ish Hermitian constraints
    let mut ops: Vec<Vec<(usize, SparseHerm)>> = Vec::new();
    for _ in 0..m {
        let mut terms = Vec::new();
        for (bi, &d) in block_dims.iter().enumerate() {
            let dense = rand_herm(&mut rng, d, 1.0);
            terms.push((bi, SparseHerm::from_dense(&dense)));
        }
        ops.push(terms);
    }

    // b = A(X0); C = A*(y0) + S0
    let mut c: Vec<CMat> = s0.clone();
    for (k, terms) in ops.iter().enumerate() {
        for (bi, sp) in terms {
            sp.add_into(&mut c[*bi], y0[k]);
        }
    }
    for (bi, cb) in c.into_iter().enumerate() {
        p.set_objective(bi, cb);
    }
    for terms in ops {
        let rhs: f64 = terms.iter().map(|(bi, sp)| sp.inner(&x0[*bi])).sum();
        p.add_constraint(terms, rhs);
    }
    p
}
