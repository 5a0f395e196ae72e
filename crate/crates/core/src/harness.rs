//! Batch experiment harness: Stein-exponent tables, robust variants over
//! almost-iid ensembles, converse checks against sandwiched Renyi
//! divergences, proof-parameter schedules, finite-n subadditivity
//! instances, and deterministic CSV emission.

use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::divergence::{binary_entropy, rel_entropy, renyi_sandwiched};
use crate::error::{Error, Result};
use crate::hypothesis::{dh, dh_classical_iid, smooth_dmax};
use crate::resource::{ResourceSetHandle, ree_frank_wolfe, ree_frank_wolfe_from};
use crate::tensor::{CMat, DensityOperator, HermitianOperator, PureState, SiteStructure, eigh,
    kron, partial_trace_keep, tensor_power};
use crate::tol;

/// Format with 12 significant digits, stable across reruns.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

/// Short hex digest of a canonical configuration string; embedded in
/// every emitted row so reruns are auditable.
pub fn config_hash(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }
}

fn csv_field(f: &str) -> String {
    if f.contains(',') || f.contains('"') || f.contains('\n') || f.contains('\r') {
        format!("\"{}\"", f.replace('"', "\"\""))
    } else {
        f.to_string()
    }
}

/// RFC-4180-style CSV: CRLF line endings, header row, quoting only where
/// needed. Deterministic: identical tables yield byte-identical files.
pub fn emit_csv(table: &CsvTable, path: &Path) -> Result<()> {
    let mut buf = String::new();
    let line = |fields: &[String]| -> String {
        fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",")
    };
    buf.push_str(&line(&table.header));
    buf.push_str("\r\n");
    for row in &table.rows {
        buf.push_str(&line(row));
        buf.push_str("\r\n");
    }
    let mut f = std::fs::File::create(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    f.write_all(buf.as_bytes())?;
    Ok(())
}

/// Joint diagonal of a commuting pair, or None if they do not commute.
fn commuting_diagonals(
    rho: &DensityOperator,
    sigma: &DensityOperator,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let a = rho.matrix();
    let b = sigma.matrix();
    let comm = (a * b - b * a).norm();
    if comm > 1e-12 * (a.norm() * b.norm()).max(1.0) {
        return None;
    }
    // a generic real combination separates the joint eigenspaces
    let mix = HermitianOperator::from_exact(a + b.scale(std::f64::consts::E));
    let (_, u) = eigh(&mix);
    let ra = u.adjoint() * a * &u;
    let rb = u.adjoint() * b * &u;
    let d = rho.dim();
    let off = |m: &CMat| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    if off(&ra) > 1e-9 || off(&rb) > 1e-9 {
        return None;
    }
    Some(((0..d).map(|i| ra[(i, i)].re.max(0.0)).collect(),
          (0..d).map(|i| rb[(i, i)].re.max(0.0)).collect()))
}

/// Rows (n, dh/n, single-letter relative entropy, gap). Commuting inputs
/// route through the exact classical type-class path (binary alphabets up
/// to n = 10^4); general inputs are capped at total dimension 2^12.
pub fn stein_table(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    eps: f64,
    n_grid: &[usize],
    seed: u64,
) -> Result<CsvTable> {
    if n_grid.is_empty() {
        return Err(Error::InvalidArgument("empty n grid".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside (0,1)")));
    }
    let d_single = rel_entropy(rho, sigma)?.value();
    let cfg = config_hash(&["stein", &fmt12(eps), &format!("{n_grid:?}"), &format!("d{}", rho.dim())]);
    let mut table =
        CsvTable::new(&["n", "dh_per_n", "rel_entropy", "gap", "config", "seed"]);
    let classical = commuting_diagonals(rho, sigma);
    let rows: Vec<Result<(usize, f64)>> = crate::par::map_batch(n_grid.len(), |k| {
        let n = n_grid[k];
        let dh_n = match &classical {
            Some((p, q)) => {
                if p.len() > 2 && n > 64 {
                    return Err(Error::Capacity(format!(
                        "classical path supports large n only for binary alphabets, got {} outcomes at n={n}",
                        p.len()
                    )));
                }
                if n > 10_000 {
                    return Err(Error::Capacity(format!("classical path capped at n=10000, got {n}")));
                }
                dh_classical_iid(p, q, n, eps)?.value()
            }
            None => {
                let dim_n = (rho.dim() as f64).powi(n as i32);
                if dim_n > (1 << 12) as f64 {
                    return Err(Error::Capacity(format!(
                        "total dimension {}^{n} exceeds 4096",
                        rho.dim()
                    )));
                }
                let rn = tensor_power(rho, n)?;
                let sn = tensor_power(sigma, n)?;
                dh(&rn, &sn, eps)?.value()
            }
        };
        Ok((n, dh_n))
    });
    for row in rows {
        let (n, dh_n) = row?;
        let per = dh_n / n as f64;
        table.push(vec![
            n.to_string(),
            fmt12(per),
            fmt12(d_single),
            fmt12(d_single - per),
            cfg.clone(),
            seed.to_string(),
        ]);
    }
    Ok(table)
}

/// Generator specification for a robust Stein table: almost-iid null and
/// alternative ensembles around fixed site purifications.
#[derive(Debug, Clone)]
pub struct RobustSteinSpec {
    pub theta_rho: PureState,
    pub theta_sigma: PureState,
    pub d_a: usize,
    pub d_e: usize,
    pub eps: f64,
    pub n_grid: Vec<usize>,
    pub r1: usize,
    pub r2: usize,
    pub seeds: Vec<u64>,
}

/// Rows (n, r1, r2, dh/n minimized over sampled almost-iid pairs plus the
/// exact iid pair, the single-letter relative entropy, the iid dh/n upper
/// bound, and the pinching lower-bound chain slack).
pub fn robust_stein_table(spec: &RobustSteinSpec) -> Result<CsvTable> {
    if spec.n_grid.is_empty() || spec.seeds.is_empty() {
        return Err(Error::InvalidArgument("empty grid or seed list".into()));
    }
    let rho_site = DensityOperator::from_exact(
        partial_trace_keep(
            &spec.theta_rho.projector().herm(),
            &[0],
            &SiteStructure::new(vec![spec.d_a, spec.d_e])?,
        )?
        .into_matrix(),
    );
    let sigma_site = DensityOperator::from_exact(
        partial_trace_keep(
            &spec.theta_sigma.projector().herm(),
            &[0],
            &SiteStructure::new(vec![spec.d_a, spec.d_e])?,
        )?
        .into_matrix(),
    );
    let lmin_sigma = eigh(sigma_site.herm()).0.first().copied().unwrap_or(0.0);
    if lmin_sigma <= 0.0 {
        return Err(Error::InvalidArgument("alternative site state must be full rank".into()));
    }
    let d_single = rel_entropy(&rho_site, &sigma_site)?.value();
    let cfg = config_hash(&[
        "robust-stein",
        &fmt12(spec.eps),
        &format!("{:?}", spec.n_grid),
        &format!("r{} {}", spec.r1, spec.r2),
        &format!("{:?}", spec.seeds),
    ]);
    let mut table = CsvTable::new(&[
        "n", "r1", "r2", "dh_per_n", "rel_entropy", "iid_dh_per_n", "chain_slack", "config",
        "seed",
    ]);
    for &n in &spec.n_grid {
        if (spec.d_a as f64).powi(n as i32) > 64.0 {
            return Err(Error::Capacity(format!("ensemble capacity exceeded at n={n}")));
        }
        if spec.r1 > n || spec.r2 > n {
            return Err(Error::Capacity(format!("defect count exceeds n={n}")));
        }
        let sigma_iid = tensor_power(&sigma_site, n)?;
        let rho_iid = tensor_power(&rho_site, n)?;
        let dh_iid = dh(&rho_iid, &sigma_iid, spec.eps)?.value();

        let sampled: Vec<Result<(f64, f64)>> = crate::par::map_batch(spec.seeds.len(), |k| {
            let seed = spec.seeds[k];
            let er = crate::almostiid::random_ensemble(
                &spec.theta_rho, spec.d_a, spec.d_e, n, spec.r1, seed,
            )?;
            let es = crate::almostiid::random_ensemble(
                &spec.theta_sigma, spec.d_a, spec.d_e, n, spec.r2, seed.wrapping_add(0x9e37),
            )?;
            let rho_n = er.a_marginal()?;
            let sigma_n = es.a_marginal()?;
            let dh_pair = dh(&rho_n, &sigma_n, spec.eps)?.value();
            // lower-bound chain for this pair, against the exact iid
            // alternative with pinching corrections for the defects
            let chain = smooth_dmax(&rho_n, &sigma_iid, (1.0 - spec.eps).sqrt())?.value()
                - spec.r2 as f64 * (1.0 / lmin_sigma).ln()
                - (es.card_t() as f64).ln()
                - (1.0 / spec.eps).ln();
            Ok((dh_pair, dh_pair - chain))
        });
        let mut dh_min = dh_iid;
        let mut slack_min = f64::INFINITY;
        for s in sampled {
            let (dh_pair, slack) = s?;
            dh_min = dh_min.min(dh_pair);
            slack_min = slack_min.min(slack);
        }
        let nf = n as f64;
        table.push(vec![
            n.to_string(),
            spec.r1.to_string(),
            spec.r2.to_string(),
            fmt12(dh_min / nf),
            fmt12(d_single),
            fmt12(dh_iid / nf),
            fmt12(slack_min),
            cfg.clone(),
            format!("{:?}", spec.seeds).replace(' ', ""),
        ]);
    }
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct GslReport {
    pub lhs_per_n: f64,
    pub rows: Vec<(f64, f64, f64)>,
    pub tightest_alpha: f64,
    pub pass: bool,
}

/// Strong-converse consistency: per copy, the hypothesis-testing
/// divergence against the set's optimizer never exceeds the sandwiched
/// Renyi divergence plus its order-dependent eps correction.
pub fn gsl_converse_check(
    rho: &DensityOperator,
    set: &ResourceSetHandle,
    eps: f64,
    n: usize,
    alpha_grid: &[f64],
) -> Result<GslReport> {
    if alpha_grid.iter().any(|&a| a <= 1.0) {
        return Err(Error::InvalidArgument("alpha grid must be > 1".into()));
    }
    if rho.dim().pow(n as u32) > 64 {
        return Err(Error::Capacity(format!("converse check capped at total dim 64, n={n}")));
    }
    let rho_n = tensor_power(rho, n)?;
    let opt = ree_frank_wolfe(&rho_n, set, tol::FW_TOL, tol::FW_MAX_ITER)?;
    let sigma_n = opt.optimizer;
    let nf = n as f64;
    let lhs = dh(&rho_n, &sigma_n, eps)?.value() / nf;
    let mut rows = Vec::with_capacity(alpha_grid.len());
    let mut tight = (f64::INFINITY, alpha_grid[0]);
    for &alpha in alpha_grid {
        let d_alpha = renyi_sandwiched(&rho_n, &sigma_n, alpha)?.value();
        let rhs = (d_alpha + alpha / (alpha - 1.0) * (1.0 / (1.0 - eps)).ln()) / nf;
        if rhs < tight.0 {
            tight = (rhs, alpha);
        }
        rows.push((alpha, rhs, rhs - lhs));
    }
    let pass = rows.iter().all(|&(_, _, s)| s >= -1e-6);
    Ok(GslReport { lhs_per_n: lhs, rows, tightest_alpha: tight.1, pass })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RRule {
    Constant(usize),
    SqrtN,
    TwoThirds,
}

impl RRule {
    pub fn apply(&self, n: usize) -> usize {
        match self {
            RRule::Constant(r) => *r,
            RRule::SqrtN => (n as f64).sqrt().ceil() as usize,
            RRule::TwoThirds => (n as f64).powf(2.0 / 3.0).ceil() as usize,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScheduleRow {
    pub n: usize,
    pub r: usize,
    pub nu: f64,
    pub gamma: Option<f64>,
    pub m: Option<f64>,
    pub r_prime: Option<f64>,
    pub xi: f64,
    pub exponent: f64,
    pub admissible: bool,
}

#[derive(Debug, Clone)]
pub struct ScheduleReport {
    pub rows: Vec<ScheduleRow>,
}

/// Proof-parameter schedule: nu = log(1/eps) + 2n h(r/n) + 4r log d,
/// gamma = sqrt(sqrt(n/r)/log(n/r)), m = sqrt(rn),
/// r' = sqrt(rn) log(n/r) gamma, xi = sqrt(2) exp(-m r'/(2(n-r)) + nu/2).
pub fn schedule_eval(
    n_grid: &[usize],
    r_rule: RRule,
    eps: f64,
    d: usize,
) -> Result<ScheduleReport> {
    if n_grid.is_empty() {
        return Err(Error::InvalidArgument("empty n grid".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside (0,1)")));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let r = r_rule.apply(n);
        if r > n {
            return Err(Error::InvalidArgument(format!("r = {r} exceeds n = {n}")));
        }
        let nf = n as f64;
        let rf = r as f64;
        let nu =
            (1.0 / eps).ln() + 2.0 * nf * binary_entropy(rf / nf)? + 4.0 * rf * (d as f64).ln();
        if r == 0 {
            rows.push(ScheduleRow {
                n,
                r,
                nu,
                gamma: None,
                m: None,
                r_prime: None,
                xi: 2f64.sqrt() * (nu / 2.0).exp(),
                exponent: nu,
                admissible: true,
            });
            continue;
        }
        let ratio = nf / rf;
        let gamma = ((ratio.sqrt()) / ratio.ln()).sqrt();
        let m = (rf * nf).sqrt();
        let r_prime = (rf * nf).sqrt() * ratio.ln() * gamma;
        let exponent = -m * r_prime / (nf - rf) + nu;
        let xi = 2f64.sqrt() * (-m * r_prime / (2.0 * (nf - rf)) + nu / 2.0).exp();
        let admissible = m <= nf - rf && r_prime <= nf - rf - m;
        rows.push(ScheduleRow {
            n,
            r,
            nu,
            gamma: Some(gamma),
            m: Some(m),
            r_prime: Some(r_prime),
            xi,
            exponent,
            admissible,
        });
    }
    Ok(ScheduleReport { rows })
}

impl ScheduleReport {
    pub fn to_csv(&self, eps: f64, d: usize) -> CsvTable {
        let cfg = config_hash(&[
            "schedule",
            &fmt12(eps),
            &d.to_string(),
            &format!("{:?}", self.rows.iter().map(|r| r.n).collect::<Vec<_>>()),
        ]);
        let opt = |v: Option<f64>| v.map(fmt12).unwrap_or_else(|| "NA".into());
        let mut t = CsvTable::new(&[
            "n", "r", "nu", "gamma", "m", "r_prime", "xi", "exponent", "admissible", "config",
            "seed",
        ]);
        for row in &self.rows {
            t.push(vec![
                row.n.to_string(),
                row.r.to_string(),
                fmt12(row.nu),
                opt(row.gamma),
                opt(row.m),
                opt(row.r_prime),
                fmt12(row.xi),
                fmt12(row.exponent),
                row.admissible.to_string(),
                cfg.clone(),
                "0".into(),
            ]);
        }
        t
    }
}

#[derive(Debug, Clone)]
pub struct SuperadditivityReport {
    pub ree_one: f64,
    pub ree_two_half: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Finite-n subadditivity on a two-copy state with equal AB marginals:
/// half the two-copy relative entropy of resource never exceeds the
/// single-copy value (plus twice the FW tolerance). The asymptotic
/// reverse direction is reported as data, not asserted.
pub fn superadditivity_check(
    rho2: &DensityOperator,
    s: &SiteStructure,
) -> Result<SuperadditivityReport> {
    let bip = s
        .bipartition
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("two-copy check needs a bipartition".into()))?;
    if s.n_sites() != 2 || bip != &vec![(2, 2), (2, 2)] {
        return Err(Error::InvalidArgument("expected two 2x2-bipartitioned sites".into()));
    }
    let m1 = DensityOperator::from_exact(partial_trace_keep(rho2.herm(), &[0], s)?.into_matrix());
    let m2 = DensityOperator::from_exact(partial_trace_keep(rho2.herm(), &[1], s)?.into_matrix());
    let mism = HermitianOperator::from_exact(m1.matrix() - m2.matrix()).trace_norm();
    if mism > 1e-8 {
        return Err(Error::InvalidArgument(format!("marginal mismatch {mism:.3e}")));
    }
    let set1 = ResourceSetHandle::ppt(SiteStructure::with_bipartition(vec![4], vec![(2, 2)])?)?;
    let one = ree_frank_wolfe(&m1, &set1, tol::FW_TOL, tol::FW_MAX_ITER)?;
    let set2 = ResourceSetHandle::ppt(s.clone())?;
    let warm = DensityOperator::from_exact(
        kron(one.optimizer.matrix(), one.optimizer.matrix()).scale(0.9)
            + DensityOperator::maximally_mixed(16).matrix().scale(0.1),
    );
    let two = ree_frank_wolfe_from(rho2, &set2, Some(warm), tol::FW_TOL, tol::FW_MAX_ITER)?;
    let half = two.value / 2.0;
    let slack = one.value + 2.0 * tol::FW_TOL - half;
    Ok(SuperadditivityReport { ree_one: one.value, ree_two_half: half, slack, pass: slack >= 0.0 })
}
