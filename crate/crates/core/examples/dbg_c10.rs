use std::time::Instant;
use steinlab::resource::{ResourceSetHandle, ree_frank_wolfe, ree_frank_wolfe_from};
use steinlab::tensor::{
    DensityOperator, SiteStructure, kron, partial_trace_keep, random_density,
};
use steinlab::tol;

fn main() {
    let s = SiteStructure::with_bipartition(vec![4, 4], vec![(2, 2), (2, 2)]).unwrap();
    let s1 = SiteStructure::with_bipartition(vec![4], vec![(2, 2)]).unwrap();
    for seed in 0..20u64 {
        let rho2 = if seed < 16 {
            let tau = random_density(4, 3 + (seed % 2) as usize, 17_000 + seed).unwrap();
            DensityOperator::from_matrix(kron(tau.matrix(), tau.matrix())).unwrap()
        } else {
            let a = random_density(4, 4, 18_000 + seed).unwrap();
            let b = random_density(4, 4, 19_000 + seed).unwrap();
            DensityOperator::from_matrix(
                (kron(a.matrix(), b.matrix()) + kron(b.matrix(), a.matrix())).scale(0.5),
            )
            .unwrap()
        };
        let m1 =
            DensityOperator::from_matrix(partial_trace_keep(rho2.herm(), &[0], &s).unwrap().into_matrix()).unwrap();
        let set1 = ResourceSetHandle::ppt(s1.clone()).unwrap();
        let t = Instant::now();
        let one = ree_frank_wolfe(&m1, &set1, tol::FW_TOL, tol::FW_MAX_ITER).unwrap();
        let t1 = t.elapsed().as_secs_f64();
        let set2 = ResourceSetHandle::ppt(s.clone()).unwrap();
        let warm = DensityOperator::from_matrix(
            kron(one.optimizer.matrix(), one.optimizer.matrix()).scale(0.9)
                + DensityOperator::maximally_mixed(16).matrix().scale(0.1),
        )
        .unwrap();
        let t = Instant::now();
        let two = ree_frank_wolfe_from(&rho2, &set2, Some(warm), tol::FW_TOL, tol::FW_MAX_ITER).unwrap();
        let t2 = t.elapsed().as_secs_f64();
        println!(
            "seed {seed}: ree1 {:.6} (it {} cv {} {t1:.1}s) ree2/2 {:.6} (it {} cv {} gap {:.1e} {t2:.1}s)",
            one.value,
            one.iterations,
            one.converged,
            two.value / 2.0,
            two.iterations,
            two.converged,
            two.gap,
        );
    }
}
