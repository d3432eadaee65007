//! An exchangeable 1PB draw and its CUSP representation, then a Monte Carlo
//! check of the stick law of the decreasing order statistics.

use cusp::distributions::{derive_stream, tag_word, Rng};
use cusp::shrinkage::{
    esp_to_cusp, hstar_prior_moments, onepb_stick_law, order_statistic_ratios, sample_esp, AlphaPrior, EspSpec,
};

fn main() -> cusp::Result<()> {
    let (alpha, h) = (5.0, 10);
    let spec = EspSpec::one_pb(h, AlphaPrior::Fixed { value: alpha });
    let mut rng = Rng::new(11, derive_stream(&[tag_word("esp")]));

    let draw = sample_esp(&mut rng, &spec, alpha)?;
    let (cusp, rho) = esp_to_cusp(&draw)?;
    println!("tau         {:.3?}", draw.slab_probs);
    println!("order       {rho:?}");
    println!("pi          {:.3?}", cusp.spike_probs);

    let ratios = order_statistic_ratios(&mut rng, &spec, alpha, 50_000)?;
    println!("\n h   mean of tau_(h)/tau_(h-1)   law mean");
    for (j, law) in onepb_stick_law(alpha, h)?.iter().enumerate() {
        let mc = ratios.iter().map(|r| r[j]).sum::<f64>() / ratios.len() as f64;
        // nu_h ~ Beta(1, b) so the ratio 1 - nu_h is Beta(b, 1)
        println!("{:>2}   {mc:.4}                     {:.4}", j + 1, law.b() / (law.b() + 1.0));
    }
    let (mean, var) = hstar_prior_moments(&spec, alpha)?;
    println!("\nprior H*: mean {mean:.3}, variance {var:.3}");
    Ok(())
}
