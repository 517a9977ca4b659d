//! Residual suites for the bracket algebra of the invariant families:
//! the ladder relation `{I1_k, I_j} = j I_{j+k}` and the centerless
//! Virasoro relation `{I1_k, I1_j} = (j - k) I1_{k+j}`.
//!
//! ```bash
//! cargo run -p rrs-lab --example bracket_algebra
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rrs_lab::poisson::{mixed_bracket_suite, virasoro_bracket_suite, IndexRange};
use rrs_lab::{ModelConfig, Result};

fn main() -> Result<()> {
    let cfg = ModelConfig::new(3, 1.0)?;
    let range = IndexRange::default();

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mixed = mixed_bracket_suite(&cfg, &range, 50, &mut rng)?;
    println!(
        "{} over {} points: max normalized residual {:.3e} (tolerance {:.0e}) -> {}",
        mixed.suite,
        mixed.samples,
        mixed.max_residual,
        mixed.tolerance,
        if mixed.pass { "pass" } else { "FAIL" }
    );
    println!("worst pairs:");
    let mut pairs = mixed.pairs.clone();
    pairs.sort_by(|a, b| b.max_residual.partial_cmp(&a.max_residual).unwrap());
    for p in pairs.iter().take(5) {
        println!("  (j, k) = ({:>2}, {:>2}): {:.3e}", p.j, p.k, p.max_residual);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let virasoro = virasoro_bracket_suite(&cfg, &range, 50, &mut rng)?;
    println!(
        "{} over {} points: max normalized residual {:.3e} -> {}",
        virasoro.suite,
        virasoro.samples,
        virasoro.max_residual,
        if virasoro.pass { "pass" } else { "FAIL" }
    );
    Ok(())
}
