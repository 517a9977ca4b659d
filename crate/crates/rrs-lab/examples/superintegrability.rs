//! The explicit superintegrability constructions: extra constants of
//! motion, their commutation residuals, the exact invariant-coordinate
//! Jacobian determinants, and the independence ranks.
//!
//! ```bash
//! cargo run -p rrs-lab --example superintegrability
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rrs_lab::observable::Observable;
use rrs_lab::superint::{
    commutation_check, eval_constant, independence_rank, jacobian_invariant_coords_at,
    jacobian_phase_space, ConstantFamily, InvariantCoordMode,
};
use rrs_lab::{ModelConfig, PhasePoint, Result};

fn main() -> Result<()> {
    let cfg = ModelConfig::new(3, 1.0)?;
    let point = PhasePoint::new(vec![2.2, 0.1, -2.0], vec![0.5, -0.2, 0.7], &cfg)?;

    println!("extra constants at a generic point:");
    for fam in [
        ConstantFamily::C { k: 2, j: 1 },
        ConstantFamily::C { k: 3, j: 1 },
        ConstantFamily::K { j: 2 },
        ConstantFamily::K { j: 3 },
        ConstantFamily::L { j: 2 },
    ] {
        let value = eval_constant(&fam, &point, &cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let rep = commutation_check(&fam, &cfg, 25, &mut rng)?;
        println!(
            "  {:>10} = {value:>14.6}   max |bracket| residual over {} points: {:.2e}",
            rep.family.split(" vs ").next().unwrap(),
            rep.samples,
            rep.max_residual
        );
    }

    println!();
    println!("exact Jacobian determinants in invariant coordinates:");
    for j in 1..=3 {
        let jac = jacobian_invariant_coords_at(InvariantCoordMode::C { j }, &point, &cfg)?;
        println!(
            "  C-mode j = {j}: det = {:>14.6} vs (I_{})^2 = {:>14.6}  (rel err {:.2e})",
            jac.det,
            2 * j,
            jac.reference,
            jac.relative_error
        );
    }
    let jac = jacobian_invariant_coords_at(InvariantCoordMode::K, &point, &cfg)?;
    println!(
        "  K-mode:       det = {:>14.6} vs (I_2 - n)^2 = {:>12.6}  (rel err {:.2e})",
        jac.det, jac.reference, jac.relative_error
    );

    println!();
    let full: Vec<Observable> = (1..=3)
        .map(Observable::PowerTrace)
        .chain((1..=3).map(Observable::WeightedTrace))
        .collect();
    println!(
        "rank of d(I_1..I_3, I1_1..I1_3) = {} (expect 2n = 6)",
        independence_rank(&full, &point, &cfg)?
    );
    let mut with_c: Vec<Observable> = (1..=3).map(Observable::PowerTrace).collect();
    with_c.push(Observable::ExtraC { k: 2, j: 1 });
    with_c.push(Observable::ExtraC { k: 3, j: 1 });
    println!(
        "rank of d(I_1..I_3, C_21, C_31) = {} (expect 2n - 1 = 5)",
        independence_rank(&with_c, &point, &cfg)?
    );
    let pj = jacobian_phase_space(&point, &cfg)?;
    println!(
        "phase-space Jacobian det = {:.6e} (decoupled scale {:.6e})",
        pj.det, pj.scale
    );
    Ok(())
}
