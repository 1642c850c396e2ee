//! The what-if query a driver makes at a pause: for each candidate steer,
//! where would the trailer point one second from now?

use trailer_advisory::advisory::{candidate_grid, steer_sweep};
use trailer_advisory::{SystemState, VehicleTrailerParams};

fn main() {
    let params = VehicleTrailerParams::default();
    // Trailer already swung 0.2 rad to the right of the car.
    let state = SystemState::new(0.0, 0.0, 0.3, 0.1);

    println!("psi_2 now {:.4}", state.psi2);
    let candidates = candidate_grid(&params, 9);
    for (c, p) in candidates.iter().zip(steer_sweep(&params, &state, &candidates)) {
        match p {
            Ok(p) => println!(
                "delta_f {:+.3}: delta_T {:+.4}, psi_2 in 1 s {:+.4}, line to ({:.2}, {:.2})",
                c, p.implied_delta_t, p.predicted_psi_2, p.advisory_segment[1][0], p.advisory_segment[1][1]
            ),
            Err(e) => println!("delta_f {c:+.3}: {e}"),
        }
    }
}
