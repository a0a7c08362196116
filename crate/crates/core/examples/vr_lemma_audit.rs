// Random audit of VR(t'r) ⊆ Čech(tr) ⊆ VR(tr).

use weighted_persistence::audit::{run_vr_audit, VrAuditConfig};
use weighted_persistence::Result;

pub fn run_example() -> Result<(bool, String)> {
    let audit = run_vr_audit(&VrAuditConfig {
        trials: 50,
        seed: 11,
        ..Default::default()
    })?;
    Ok((audit.holds(), audit.report()))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let (_, report) = run_example()?;
    print!("{report}");
    Ok(())
}
