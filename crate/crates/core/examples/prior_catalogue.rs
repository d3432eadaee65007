//! Stick-breaking catalogue: expected spike probabilities of several CUSP
//! priors, and Monte Carlo shrinkage curves `P(theta_h <= eps)` under the
//! triple-gamma spike and slab.

use cusp::distributions::{derive_stream, tag_word, Rng};
use cusp::shrinkage::{verify_increasing_shrinkage, ShrinkagePrior, SpikeSlabSpec, StickBreakingSpec, StickFamily};

fn main() -> cusp::Result<()> {
    let h = 12;
    let families = [
        ("Legnaro(5)", StickFamily::LegnaroCusp { alpha: 5.0 }),
        ("two-parameter IBP(5, 2)", StickFamily::TwoParamIbp { alpha: 5.0, beta: 2.0 }),
        ("Ohn-Kim(5, 1)", StickFamily::OhnKim { alpha: 5.0, kappa: 1.0 }),
        ("Pitman-Yor(5, 0.25)", StickFamily::PyPositive { alpha: 5.0, discount: 0.25 }),
        ("Pitman-Yor(-0.5)", StickFamily::PyNegativeFinite { discount: -0.5 }),
        ("finite 1PB(5)", StickFamily::FiniteEspDerived { alpha: 5.0 }),
    ];
    println!("E[pi_h] for h = 1, 4, 8, 12");
    for (name, family) in families {
        let spec = StickBreakingSpec::new(family, h, true)?;
        let pi: Vec<f64> = spec.expected_slab_probs()?.iter().map(|s| 1.0 - s).collect();
        println!("  {name:<24} {:.3} {:.3} {:.3} {:.3}", pi[0], pi[3], pi[7], pi[11]);
    }

    let mut rng = Rng::new(7, derive_stream(&[tag_word("catalogue")]));
    let prior = ShrinkagePrior::Cusp(StickBreakingSpec::legnaro(5.0, 30)?);
    let ss = SpikeSlabSpec::triple_gamma(2.5, 2.5, 0.01)?;
    let report = verify_increasing_shrinkage(&mut rng, &prior, &ss, &[0.05, 0.5], 20_000)?;
    for eps in [0.05, 0.5] {
        let curve: Vec<String> = report.curve(eps).iter().step_by(5).map(|r| format!("{:.2}", r.estimate)).collect();
        println!("P(theta_h <= {eps}) at h = 1, 6, ..., 26: {}", curve.join(" "));
    }
    println!("monotone up to noise: {}", report.violations.is_empty());
    Ok(())
}
