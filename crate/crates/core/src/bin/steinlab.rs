//! Batch CLI: divergences, hypothesis-testing tables, Wasserstein
//! distances, almost-iid generators, relative entropy of resource, and
//! the CSV experiment harness. Exit code 0 iff all asserted checks pass.

use std::path::PathBuf;

use anyhow::{Context, Result, anyhow, bail};
use clap::{Parser, Subcommand, ValueEnum};

use steinlab::divergence::{dmax, dmin, fidelity, rel_entropy, renyi_sandwiched};
use steinlab::harness::{self, CsvTable, RRule, RobustSteinSpec, fmt12};
use steinlab::hypothesis;
use steinlab::resource::{self, ResourceSetHandle};
use steinlab::stateio;
use steinlab::tensor::{DensityOperator, PureState, SiteStructure, eigh, tensor_power};
use steinlab::{par, tol, wasserstein};

#[derive(Parser)]
#[command(name = "steinlab", version, about = "entropic hypothesis-testing toolbox")]
struct Cli {
    /// Dump per-iteration interior-point rows from every SDP solve to a CSV file.
    #[arg(long, global = true, value_name = "FILE")]
    sdp_trace: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum DivKind {
    Rel,
    Dmax,
    Dmin,
    Renyi,
    Fidelity,
}

#[derive(Clone, Copy, ValueEnum)]
enum W1Mode {
    Exact,
    Bracket,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetKind {
    Ppt,
    Iid,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitKind {
    State,
    W1report,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a divergence between two states.
    Divergence {
        #[arg(long, value_enum)]
        kind: DivKind,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
    },
    /// Hypothesis-testing divergence (optimal-test path, or exact
    /// classical iid path with --classical).
    Dh {
        #[arg(long)]
        rho: Option<PathBuf>,
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = false)]
        classical: bool,
        /// Comma-separated null distribution (classical path).
        #[arg(long)]
        p: Option<String>,
        /// Comma-separated alternative distribution (classical path).
        #[arg(long)]
        q: Option<String>,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Order-1 Wasserstein distance between two states of one site structure.
    W1 {
        #[arg(long)]
        omega: PathBuf,
        #[arg(long)]
        tau: PathBuf,
        #[arg(long, value_enum, default_value_t = W1Mode::Exact)]
        mode: W1Mode,
    },
    /// Sample an almost-iid ensemble around a purification.
    Almostiid {
        /// State file holding the rank-1 site purification on (A, E).
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = EmitKind::State)]
        emit: EmitKind,
    },
    /// Relative entropy of resource over a convex set.
    Ree {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long, value_enum)]
        set: SetKind,
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long, default_value_t = tol::FW_TOL)]
        tol: f64,
    },
    /// Continuity of the relative entropy of resource in Wasserstein distance.
    Continuity {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        rhoprime: PathBuf,
        #[arg(long, value_enum, default_value_t = SetKind::Ppt)]
        set: SetKind,
    },
    /// Stein-exponent table over an n grid.
    Stein {
        #[arg(long)]
        rho: Option<PathBuf>,
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        eps: f64,
        /// Comma-separated n grid.
        #[arg(long)]
        ns: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Robust Stein table over sampled almost-iid ensembles.
    RobustStein {
        #[arg(long)]
        theta_rho: PathBuf,
        #[arg(long)]
        theta_sigma: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        ns: String,
        #[arg(long, default_value_t = 0)]
        r1: usize,
        #[arg(long, default_value_t = 0)]
        r2: usize,
        #[arg(long, default_value_t = 5)]
        nseeds: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Strong-converse consistency against sandwiched Renyi divergences.
    GslConverse {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long, value_enum, default_value_t = SetKind::Ppt)]
        set: SetKind,
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Comma-separated Renyi orders, all > 1.
        #[arg(long, default_value = "1.5,2,3")]
        alphas: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Proof-parameter schedule over an n grid.
    Schedule {
        #[arg(long)]
        ns: String,
        /// const:K, sqrt, or two-thirds.
        #[arg(long, default_value = "two-thirds")]
        r_rule: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Finite-n subadditivity check on a two-copy equal-marginal state.
    Superadd {
        #[arg(long)]
        rho2: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
}

fn read_density(path: &PathBuf) -> Result<(DensityOperator, SiteStructure)> {
    let (_, op, s) =
        stateio::read_state(path).with_context(|| format!("reading {}", path.display()))?;
    let rho = DensityOperator::from_matrix(op.into_matrix())
        .with_context(|| format!("{} is not a density operator", path.display()))?;
    Ok((rho, s))
}

fn read_pure(path: &PathBuf) -> Result<(PureState, SiteStructure)> {
    let (rho, s) = read_density(path)?;
    let (ev, u) = eigh(rho.herm());
    let d = rho.dim();
    if ev[..d - 1].iter().any(|&v| v.abs() > 1e-9) {
        bail!("{} is not rank one", path.display());
    }
    let v = u.column(d - 1).into_owned();
    Ok((PureState::from_unnormalized(v)?, s))
}

fn parse_vec_f64(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("{t}: {e}"))).collect()
}

fn parse_vec_usize(s: &str) -> Result<Vec<usize>> {
    s.split(',').map(|t| t.trim().parse::<usize>().map_err(|e| anyhow!("{t}: {e}"))).collect()
}

fn make_set(
    kind: SetKind,
    sigma: &Option<PathBuf>,
    sites: &SiteStructure,
) -> Result<ResourceSetHandle> {
    Ok(match kind {
        SetKind::Ppt => ResourceSetHandle::ppt(sites.clone())?,
        SetKind::Iid => {
            let path = sigma.as_ref().ok_or_else(|| anyhow!("--set iid requires --sigma"))?;
            let (sig, _) = read_density(path)?;
            ResourceSetHandle::single_iid(sig)?
        }
    })
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(path) = &cli.sdp_trace {
        steinlab::sdp::enable_global_trace(path.clone())?;
    }
    match cli.cmd {
        Cmd::Divergence { kind, alpha, rho, sigma } => {
            let (r, _) = read_density(&rho)?;
            let (s, _) = read_density(&sigma)?;
            let v = match kind {
                DivKind::Rel => rel_entropy(&r, &s)?.to_string(),
                DivKind::Dmax => dmax(&r, &s)?.to_string(),
                DivKind::Dmin => dmin(&r, &s)?.to_string(),
                DivKind::Renyi => renyi_sandwiched(&r, &s, alpha)?.to_string(),
                DivKind::Fidelity => fmt12(fidelity(&r, &s)?),
            };
            println!("{v}");
            Ok(true)
        }
        Cmd::Dh { rho, sigma, eps, classical, p, q, n } => {
            let (n_used, beta_log) = if classical {
                let p = parse_vec_f64(&p.ok_or_else(|| anyhow!("--classical requires --p"))?)?;
                let q = parse_vec_f64(&q.ok_or_else(|| anyhow!("--classical requires --q"))?)?;
                let d = hypothesis::dh_classical_iid(&p, &q, n, eps)?.value();
                (n, -d)
            } else {
                let rho = rho.ok_or_else(|| anyhow!("--rho required"))?;
                let sigma = sigma.ok_or_else(|| anyhow!("--sigma required"))?;
                let (r, _) = read_density(&rho)?;
                let (s, _) = read_density(&sigma)?;
                (1, -hypothesis::dh(&r, &s, eps)?.value())
            };
            print!("n,eps,beta_log,dh_per_n\r\n");
            print!(
                "{n_used},{},{},{}\r\n",
                fmt12(eps),
                fmt12(beta_log),
                fmt12(-beta_log / n_used as f64)
            );
            Ok(true)
        }
        Cmd::W1 { omega, tau, mode } => {
            let (om, s) = read_density(&omega)?;
            let (ta, s2) = read_density(&tau)?;
            if s.dims != s2.dims {
                bail!("site structures differ");
            }
            match mode {
                W1Mode::Exact => {
                    let (v, _) = wasserstein::w1_distance(&om, &ta, &s)?;
                    println!("{}", fmt12(v));
                }
                W1Mode::Bracket => {
                    let (lo, hi) = wasserstein::w1_bracket(&om, &ta, &s)?;
                    println!("{},{}", fmt12(lo), fmt12(hi));
                }
            }
            Ok(true)
        }
        Cmd::Almostiid { theta, n, r, seed, emit } => {
            let (th, s) = read_pure(&theta)?;
            if s.n_sites() != 2 {
                bail!("purification file must have two sites (A, E)");
            }
            let (d_a, d_e) = (s.dims[0], s.dims[1]);
            let e = steinlab::almostiid::random_ensemble(&th, d_a, d_e, n, r, seed)?;
            match emit {
                EmitKind::State => {
                    let ext = e.extension();
                    let sf =
                        stateio::StateFile::from_operator(ext.herm(), &e.refined_structure())?;
                    println!("{}", serde_json::to_string(&sf)?);
                }
                EmitKind::W1report => {
                    let rho_a = e.a_marginal()?;
                    let s2 = SiteStructure::new(vec![s.dims[0], s.dims[1]])?;
                    let site = DensityOperator::from_matrix(
                        steinlab::tensor::partial_trace_keep(
                            &th.projector().herm(),
                            &[0],
                            &s2,
                        )?
                        .into_matrix(),
                    )?;
                    let iid = tensor_power(&site, n)?;
                    let sa = SiteStructure::uniform(n, d_a)?;
                    let (w1, _) = wasserstein::w1_distance(&rho_a, &iid, &sa)?;
                    let per = w1 / n as f64;
                    let bound = 2.0 * (r as f64 / n as f64).sqrt();
                    print!("n,r,w1_over_n,bound\r\n");
                    print!("{n},{r},{},{}\r\n", fmt12(per), fmt12(bound));
                    return Ok(per <= bound + 1e-6);
                }
            }
            Ok(true)
        }
        Cmd::Ree { rho, set, sigma, tol: t } => {
            let (r, s) = read_density(&rho)?;
            let handle = make_set(set, &sigma, &s)?;
            let res = resource::ree_frank_wolfe(&r, &handle, t, tol::FW_MAX_ITER)?;
            print!("value,gap\r\n{},{}\r\n", fmt12(res.value), fmt12(res.gap));
            Ok(res.converged)
        }
        Cmd::Continuity { rho, rhoprime, set } => {
            let (r, s) = read_density(&rho)?;
            let (rp, _) = read_density(&rhoprime)?;
            let handle = make_set(set, &None, &s)?;
            let rep = resource::continuity_check(&r, &rp, &handle, &s)?;
            print!("eps_n,delta_ree,bound,pass\r\n");
            print!(
                "{},{},{},{}\r\n",
                fmt12(rep.eps_n),
                fmt12(rep.delta_ree),
                fmt12(rep.bound),
                if rep.skipped { "skipped".into() } else { rep.pass.to_string() }
            );
            Ok(rep.pass || rep.skipped)
        }
        Cmd::Stein { rho, sigma, p, q, eps, ns, out, seed, workers } => {
            let grid = parse_vec_usize(&ns)?;
            let (r, s) = match (&rho, &sigma, &p, &q) {
                (Some(rp), Some(sp), _, _) => (read_density(rp)?.0, read_density(sp)?.0),
                (_, _, Some(pv), Some(qv)) => {
                    let pv = parse_vec_f64(pv)?;
                    let qv = parse_vec_f64(qv)?;
                    (diag_state(&pv)?, diag_state(&qv)?)
                }
                _ => bail!("provide --rho/--sigma or --p/--q"),
            };
            let table =
                par::with_workers(workers, || harness::stein_table(&r, &s, eps, &grid, seed))?;
            harness::emit_csv(&table, &out)?;
            Ok(true)
        }
        Cmd::RobustStein {
            theta_rho,
            theta_sigma,
            eps,
            ns,
            r1,
            r2,
            nseeds,
            out,
            seed,
            workers,
        } => {
            let (tr, s) = read_pure(&theta_rho)?;
            let (ts, _) = read_pure(&theta_sigma)?;
            if s.n_sites() != 2 {
                bail!("purification files must have two sites (A, E)");
            }
            let spec = RobustSteinSpec {
                theta_rho: tr,
                theta_sigma: ts,
                d_a: s.dims[0],
                d_e: s.dims[1],
                eps,
                n_grid: parse_vec_usize(&ns)?,
                r1,
                r2,
                seeds: (seed..seed + nseeds).collect(),
            };
            let table = par::with_workers(workers, || harness::robust_stein_table(&spec))?;
            harness::emit_csv(&table, &out)?;
            let mut ok = true;
            for row in &table.rows {
                let slack: f64 = row[6].parse().unwrap_or(f64::NEG_INFINITY);
                let dh_min: f64 = row[3].parse().unwrap_or(f64::INFINITY);
                let iid: f64 = row[5].parse().unwrap_or(f64::NEG_INFINITY);
                if slack < -1e-6 || dh_min > iid + 1e-9 {
                    eprintln!("failing row: {}", row.join(","));
                    ok = false;
                }
            }
            Ok(ok)
        }
        Cmd::GslConverse { rho, set, sigma, eps, n, alphas, out, seed, workers } => {
            let (r, s) = read_density(&rho)?;
            let sites = if n > 1 {
                let bip = s
                    .bipartition
                    .clone()
                    .ok_or_else(|| anyhow!("PPT converse needs a bipartition"))?;
                SiteStructure::with_bipartition(
                    s.dims.iter().cloned().cycle().take(s.n_sites() * n).collect(),
                    bip.iter().cloned().cycle().take(s.n_sites() * n).collect(),
                )?
            } else {
                s.clone()
            };
            let handle = make_set(set, &sigma, &sites)?;
            let alpha_grid = parse_vec_f64(&alphas)?;
            let rep = par::with_workers(workers, || {
                harness::gsl_converse_check(&r, &handle, eps, n, &alpha_grid)
            })?;
            let cfg = harness::config_hash(&["gsl", &fmt12(eps), &n.to_string(), &alphas]);
            let mut t = CsvTable::new(&[
                "alpha", "lhs_per_n", "rhs_per_n", "slack", "tightest", "config", "seed",
            ]);
            for &(a, rhs, slack) in &rep.rows {
                t.push(vec![
                    fmt12(a),
                    fmt12(rep.lhs_per_n),
                    fmt12(rhs),
                    fmt12(slack),
                    (a == rep.tightest_alpha).to_string(),
                    cfg.clone(),
                    seed.to_string(),
                ]);
            }
            harness::emit_csv(&t, &out)?;
            if !rep.pass {
                for &(a, _, slack) in rep.rows.iter().filter(|r| r.2 < -1e-6) {
                    eprintln!("failing alpha {a}: slack {slack}");
                }
            }
            Ok(rep.pass)
        }
        Cmd::Schedule { ns, r_rule, eps, d, out, seed, workers } => {
            let rule = if let Some(k) = r_rule.strip_prefix("const:") {
                RRule::Constant(k.parse()?)
            } else if r_rule == "sqrt" {
                RRule::SqrtN
            } else if r_rule == "two-thirds" {
                RRule::TwoThirds
            } else {
                bail!("unknown r rule {r_rule}");
            };
            let grid = parse_vec_usize(&ns)?;
            let rep = par::with_workers(workers, || harness::schedule_eval(&grid, rule, eps, d))?;
            let mut t = rep.to_csv(eps, d);
            for row in &mut t.rows {
                let last = row.len() - 1;
                row[last] = seed.to_string();
            }
            harness::emit_csv(&t, &out)?;
            Ok(true)
        }
        Cmd::Superadd { rho2, out, seed, workers } => {
            let (r2, s) = read_density(&rho2)?;
            let rep = par::with_workers(workers, || resource_superadd(&r2, &s))?;
            let cfg = harness::config_hash(&["superadd", &format!("{:?}", s.dims)]);
            let mut t = CsvTable::new(&[
                "ree_one", "ree_two_half", "slack", "pass", "config", "seed",
            ]);
            t.push(vec![
                fmt12(rep.ree_one),
                fmt12(rep.ree_two_half),
                fmt12(rep.slack),
                rep.pass.to_string(),
                cfg,
                seed.to_string(),
            ]);
            harness::emit_csv(&t, &out)?;
            if !rep.pass {
                eprintln!("failing row: slack {}", rep.slack);
            }
            Ok(rep.pass)
        }
    }
}

fn resource_superadd(
    r2: &DensityOperator,
    s: &SiteStructure,
) -> steinlab::Result<harness::SuperadditivityReport> {
    harness::superadditivity_check(r2, s)
}

fn diag_state(p: &[f64]) -> Result<DensityOperator> {
    use steinlab::tensor::{C64, CVec};
    let v: Vec<C64> = p.iter().map(|&x| C64::new(x, 0.0)).collect();
    Ok(DensityOperator::from_matrix(steinlab::tensor::CMat::from_diagonal(&CVec::from_vec(v)))?)
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => {}
        Ok(false) => std::process::exit(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
