// Random audit of the entry-function and Čech diagram stability bounds.

use weighted_persistence::audit::{run_stability_audit, StabilityAuditConfig};
use weighted_persistence::Result;

pub fn run_example() -> Result<(bool, String)> {
    let config = StabilityAuditConfig {
        trials: 30,
        seed: 11,
        grid: 32,
        ..Default::default()
    };
    let audit = run_stability_audit(&config)?;
    Ok((audit.holds(), audit.report()))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let (_, report) = run_example()?;
    print!("{report}");
    Ok(())
}
