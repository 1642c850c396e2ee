//! Feed a ramped sinusoid through the inverse map and watch how well the
//! trailer follows it, for both hitch positions and both directions.
//!
//! Pass a directory to also write the per-sample CSVs.

use std::fs::File;
use std::io::BufWriter;

use trailer_advisory::tracking::{ramped_sinusoid, run_tracking_experiment, TimeSeries};
use trailer_advisory::VehicleTrailerParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args().nth(1);
    let dt = 0.001;
    let duration = 40.0;
    let desired = TimeSeries::sampled(dt, duration, ramped_sinusoid(0.2, 0.3, 4.0));
    let base = VehicleTrailerParams::default();

    for lh in [0.3, -0.3, 1.0, -1.0, 0.0] {
        for v in [-1.0, 1.0] {
            let r = run_tracking_experiment(
                &base.with_hitch_offset(lh),
                &desired,
                &TimeSeries::constant(v),
                dt,
                duration,
            )?;
            println!(
                "L_H {lh:+.1} v {v:+.0}: max {:.2e} rms {:.2e} corr {:.4} saturated {}",
                r.max_mismatch,
                r.rms_mismatch,
                r.correlation(),
                r.saturated_steps
            );
            if let Some(dir) = &out_dir {
                let path = format!("{dir}/track_lh{lh:+.1}_v{v:+.0}.csv");
                r.write_csv(BufWriter::new(File::create(&path)?))?;
            }
        }
    }
    Ok(())
}
