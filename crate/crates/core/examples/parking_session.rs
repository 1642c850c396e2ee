//! Drive the shipped 2.5 m demo script one segment at a time, asking for
//! advice at every stop, then check the trailer is in the bay and prove the
//! log replays exactly.

use std::path::Path;

use trailer_advisory::scenario::load_scenario;
use trailer_advisory::session::{replay_str, Session};
use trailer_advisory::trajectory::InputProfile;

fn main() -> trailer_advisory::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let scenario = load_scenario(dir.join("lt2_5.json"))?;
    let script = InputProfile::load(dir.join("lt2_5_inputs.csv"), false)?;
    let mut session = Session::new(scenario)?;

    for k in 0..60 {
        let input = script.at(k as f64);
        if input.v_r == 0.0 {
            let p = session.query_prediction(0.0)?;
            println!("t {:4.1}: stopped, straight wheels would give psi_2 {:+.3}", session.state().t, p.predicted_psi_2);
        }
        let out = session.advance_segment(input)?;
        if out.jackknife {
            println!("t {:4.1}: hitch angle past the warning threshold", out.state.t);
        }
    }

    let m = session.check_parked()?;
    println!(
        "inside: {}, orientation error {:+.4} rad, lateral offset {:+.3} m",
        m.trailer_inside, m.orientation_error, m.lateral_offset
    );

    let text = session.log().to_ndjson()?;
    let replay = replay_str(&text)?;
    println!(
        "log: {} records, replay ends at t = {} with identical state: {}",
        session.log().records.len(),
        replay.final_state.t,
        replay.final_state == *session.state()
    );
    Ok(())
}
