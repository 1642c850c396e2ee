//! Ask for a trailer steer and get the front wheel angle that produces it,
//! for every hitch position and direction of travel.

use trailer_advisory::inverse::{actual_from_virtual, virtual_from_actual};
use trailer_advisory::{MotionDirection, VehicleTrailerParams, VirtualSteer};

fn main() -> trailer_advisory::Result<()> {
    let base = VehicleTrailerParams::default();
    let hitch_angle = 0.1;
    let wanted = VirtualSteer(0.2);

    for lh in [1.0, -1.0] {
        let params = base.with_hitch_offset(lh);
        for dir in [MotionDirection::Reverse, MotionDirection::Forward] {
            let cmd = actual_from_virtual(&params, wanted, hitch_angle, dir)?;
            let back = virtual_from_actual(&params, cmd.delta_f, hitch_angle, dir)?;
            println!(
                "L_H = {lh:+.1} {:<8} delta_f = {:+.5} rad{}  -> delta_T = {:+.5}",
                format!("{dir:?}"),
                cmd.delta_f,
                if cmd.saturated { " (clamped)" } else { "" },
                back.0,
            );
        }
    }

    // Beyond what the wheels can do the command saturates.
    let params = base.with_hitch_offset(0.3);
    let cmd = actual_from_virtual(&params, VirtualSteer(1.2), 0.0, MotionDirection::Reverse)?;
    println!(
        "L_H = 0.3, delta_T = 1.2: wanted {:+.3}, got {:+.3}",
        cmd.unclamped, cmd.delta_f
    );
    Ok(())
}
