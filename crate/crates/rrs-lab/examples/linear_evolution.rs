//! The weighted traces evolve linearly along any flow generated by a
//! function of the commuting invariants; the slope equals the initial
//! Poisson bracket, and for the `I_j` flow it is `j I_{j+k}` in closed form.
//!
//! ```bash
//! cargo run -p rrs-lab --example linear_evolution
//! ```

use rrs_lab::flow::{linearity_check_multi, StepControl};
use rrs_lab::model::lax_power_trace;
use rrs_lab::observable::Observable;
use rrs_lab::{ModelConfig, PhasePoint, Result};

fn main() -> Result<()> {
    let cfg = ModelConfig::new(2, 1.0)?;
    let start = PhasePoint::new(vec![1.0, -1.0], vec![0.3, -0.5], &cfg)?;
    let t_end = 10.0;
    let ks: Vec<i32> = (-2..=2).collect();

    for generator in [
        Observable::PowerTrace(1),
        Observable::PowerTrace(2),
        Observable::Hamiltonian,
    ] {
        println!("flow generator {}:", generator.label());
        let checks = linearity_check_multi(&generator, &ks, &start, &cfg, t_end, &StepControl::default())?;
        for c in &checks {
            println!(
                "  I1_{:>2}(t): slope {:>13.8} vs bracket {:>13.8} (diff {:.2e}), line residual {:.2e}",
                c.k, c.slope, c.bracket_slope, c.slope_error, c.max_residual
            );
        }
        // closed-form slope for the I_j flows
        if let Observable::PowerTrace(j) = generator {
            for c in &checks {
                let expect = j as f64 * lax_power_trace(&start, &cfg, j + c.k)?.value;
                assert!((c.slope - expect).abs() < 1e-6 * (1.0 + expect.abs()));
            }
            println!("  slopes agree with j * I_(j+k) at the start point");
        }
    }
    Ok(())
}
