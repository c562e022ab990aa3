//! Matching a chi-square-type mixture by two and three cumulants and
//! checking the tails against Monte Carlo draws.

use hdnr::chi2mix::{pvalue, threec_match, ws_match};
use hdnr::sim::mixture_mc_draws;
use hdnr::ChiSquareMixture;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let positive = ChiSquareMixture::new(vec![5.0, 2.0, 1.0, 0.5, 0.25], vec![1, 1, 2, 3, 4])?;
    // the shape of a centered test statistic: positive and negative terms
    let signed = ChiSquareMixture::new(vec![3.0, 1.0, -0.6, -0.4], vec![1, 2, 3, 5])?;

    for (name, mix) in [("nonnegative", &positive), ("mixed-sign", &signed)] {
        let k = mix.cumulants();
        println!("{name}: K1 = {:.4}, K2 = {:.4}, K3 = {:.4}", k.k1, k.k2, k.k3);
        let ws = ws_match(k.k1, k.k2).ok();
        let tc = threec_match(k)?;
        println!("  3-c fit: {tc:?}");

        let mut draws = mixture_mc_draws(mix, 400_000, 7)?;
        draws.sort_by(|a, b| a.total_cmp(b));
        println!("  {:>8} {:>10} {:>8} {:>8} {:>8}", "level", "t", "MC", "2-c", "3-c");
        for level in [0.10, 0.05, 0.01] {
            let t = draws[((1.0 - level) * draws.len() as f64) as usize];
            let two = match &ws {
                Some(w) => format!("{:.4}", pvalue(t, w)?),
                None => "-".into(),
            };
            println!("  {level:>8} {t:>10.4} {level:>8.4} {two:>8} {:>8.4}", pvalue(t, &tc)?);
        }
    }
    Ok(())
}
