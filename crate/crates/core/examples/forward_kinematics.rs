//! Back the default rig along a constant steer for five seconds and print
//! the pose every half second, then show how fast the hitch angle grows
//! in reverse compared with forward.

use trailer_advisory::kinematics::{integrate, key_points};
use trailer_advisory::{ControlInput, SystemState, VehicleTrailerParams};

fn main() -> trailer_advisory::Result<()> {
    let params = VehicleTrailerParams::default();
    let input = ControlInput::new(-1.0, 0.15);
    let mut state = SystemState::aligned(0.0, 0.0, 0.0);

    println!("{:>5} {:>9} {:>9} {:>9} {:>9}", "t", "x_R", "y_R", "psi_1", "hitch");
    for _ in 0..10 {
        state = integrate(&params, &state, &input, 0.01, 50)?;
        println!(
            "{:5.2} {:9.4} {:9.4} {:9.4} {:9.4}",
            state.t,
            state.x,
            state.y,
            state.psi1,
            state.hitch_angle()
        );
    }

    let kp = key_points(&params, &state);
    println!("trailer axle at ({:.3}, {:.3})", kp.trailer_axle[0], kp.trailer_axle[1]);

    // Same small kink, no steering: reverse amplifies it, forward removes it.
    let kinked = SystemState::new(0.0, 0.0, 0.05, 0.0);
    for v in [-1.0, 1.0] {
        let end = integrate(&params, &kinked, &ControlInput::new(v, 0.0), 0.01, 500)?;
        println!("v_R = {v:+}: hitch 0.0500 -> {:.4} after 5 s", end.hitch_angle());
    }
    Ok(())
}
