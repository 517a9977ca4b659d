//! Build the Lax matrix at a hand-checkable point and evaluate the
//! invariant families.
//!
//! ```bash
//! cargo run -p rrs-lab --example lax_invariants
//! ```

use rrs_lab::model::{
    build_lax, build_u, lax_power_trace, principal_hamiltonian_audit, total_momentum,
    weighted_trace,
};
use rrs_lab::{ModelConfig, PhasePoint, Result};

fn main() -> Result<()> {
    let cfg = ModelConfig::new(2, 1.0)?;
    let point = PhasePoint::new(vec![1.0, -1.0], vec![0.0, 0.0], &cfg)?;

    let u = build_u(&point, &cfg)?;
    println!("dressing vector u = {u:?}");

    let lax = build_lax(&point, &cfg)?;
    println!("Lax matrix (Hermitian, positive definite):");
    for i in 0..cfg.n {
        let row: Vec<String> = (0..cfg.n)
            .map(|j| {
                let z = lax.entries().get(i, j);
                format!("{:+.7}{:+.7}i", z.re, z.im)
            })
            .collect();
        println!("  [{}]", row.join(", "));
    }
    println!("eigenvalues   = {:?}", lax.eigenvalues());
    println!("det L         = {:.12}  (exp(2 s sum p) = 1 at p = 0)", lax.det());

    for k in [-2, -1, 0, 1, 2, 3] {
        let ik = lax_power_trace(&point, &cfg, k)?.value;
        let wk = weighted_trace(&point, &cfg, k)?.value;
        println!("I_{k:>2} = {ik:>12.8}    I1_{k:>2} = {wk:>12.8}");
    }

    let audit = principal_hamiltonian_audit(&point, &cfg)?;
    println!(
        "h (Lax route) = {:.12}, cosh sum = {:.12}, residual = {:.3e}",
        audit.lax_value, audit.direct_sum, audit.residual
    );
    println!("total momentum = {:.3e}", total_momentum(&point, &cfg)?);
    Ok(())
}
