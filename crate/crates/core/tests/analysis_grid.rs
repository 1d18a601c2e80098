//! Quadrature convergence and bound ordering over the Fig. 2 parameter grid.

use rasm_core::analysis::{
    pep_closed_bound, pep_quadrature_with, AnalysisOptions, CrossExponent, GaussLegendre,
    MgfModel, UnionBound,
};
use rasm_core::montecarlo::{noise_power, Simulator, SystemConfig};

fn grid() -> Vec<f64> {
    (-5..=5).map(|i| 2.0 * i as f64).collect()
}

#[test]
fn doubling_nodes_changes_little_and_closed_bound_dominates() {
    let g64 = GaussLegendre::new(64).unwrap();
    let g128 = GaussLegendre::new(128).unwrap();
    for (n, n_rx, m) in [(8, 4, 2), (16, 4, 2), (16, 4, 4), (8, 5, 2)] {
        let cfg = SystemConfig::rasm(n, n_rx, m);
        let sim = Simulator::new(cfg).unwrap();
        for model in [MgfModel::CaseSplit(CrossExponent::Printed), MgfModel::PerAntenna] {
            let opts = AnalysisOptions {
                model,
                ..AnalysisOptions::default()
            };
            let ub = UnionBound::new(&cfg, sim.table(), sim.symbols(), sim.constellation(), &opts)
                .unwrap();
            let (r, k) = (0, 0);
            for r_hat in 0..sim.table().len() {
                for k_hat in 0..m {
                    if (r_hat, k_hat) == (r, k) {
                        continue;
                    }
                    let mgf = rasm_core::analysis::pair_mgf(
                        model,
                        n,
                        sim.table(),
                        sim.constellation(),
                        1.0,
                        (r, k),
                        (r_hat, k_hat),
                    )
                    .unwrap();
                    for snr in grid() {
                        let n0 = noise_power(snr);
                        let a = pep_quadrature_with(&g64, |t| mgf.eval(t), n0).unwrap();
                        let b = pep_quadrature_with(&g128, |t| mgf.eval(t), n0).unwrap();
                        assert!((a - b).abs() <= 1e-6 * b, "N={n} {model:?} snr={snr}: {a} vs {b}");
                        let c = pep_closed_bound(|t| mgf.eval(t), n0).unwrap();
                        assert!(c >= a, "closed bound below quadrature at snr={snr}");
                    }
                }
            }
            assert!(ub.pair_count() > 0);
        }
    }
}
