//! Which subset ERU picks at each shot on the GHZ preparation, at two
//! sampling rates.

use dss::library::ghz_protocol;
use dss::noise::NoiseParams;
use dss::sampler::{eru_scores, Criterion, DssConfig, DssSampler};

fn main() -> dss::Result<()> {
    let protocol = ghz_protocol()?;
    for p in [1e-3, 1e-2] {
        let noise = NoiseParams::uniform(p)?;
        let mut sampler = DssSampler::new(
            &protocol,
            &noise,
            DssConfig::new(vec![p], Criterion::Eru, 100, 2024),
        )?;
        let mut picks = Vec::new();
        for _ in 0..100 {
            let scores = eru_scores(sampler.tree(), &[], "GHZ", 0, &[p])?.unwrap_or_default();
            let best = scores
                .iter()
                .fold(None::<&(Vec<usize>, f64)>, |b, s| {
                    if b.is_none_or(|b| s.1 > b.1) {
                        Some(s)
                    } else {
                        b
                    }
                })
                .map_or(0, |b| b.0[0]);
            picks.push(best);
            sampler.run_shot()?;
        }
        let line: String = picks
            .iter()
            .map(|w| char::from_digit(*w as u32, 10).unwrap_or('+'))
            .collect();
        println!("p_max {p:.0e}: {line}");
        for ((_, w), n) in sampler.choices() {
            println!("  w={w:?} chosen {n} times");
        }
        println!("  eta {:.3e}", sampler.bounds()?.eta);
    }
    Ok(())
}
