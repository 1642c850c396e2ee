//! Start the gateway on a free port, connect as the driver over WebSocket,
//! try a steer, run one segment and print what comes back.

use futures::{SinkExt, StreamExt};
use tokio_tungstenite::{connect_async, tungstenite::Message};

use trailer_advisory::gateway::protocol::PredictPayload;
use trailer_advisory::gateway::{spawn, Body, ServeConfig, WireMessage};
use trailer_advisory::scenario::load_scenario;
use trailer_advisory::ControlInput;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/lt2_5.json");
    let config = ServeConfig {
        pacing: 0.0,
        ..ServeConfig::default()
    };
    let gateway = spawn(load_scenario(path)?, "127.0.0.1:0", config).await?;
    let (mut ws, _) = connect_async(format!("ws://{}/ws?role=driver", gateway.local_addr)).await?;

    let outgoing = [
        Body::Predict(PredictPayload { delta_f: 0.3 }),
        Body::SetInput(ControlInput::new(-1.0, 0.3)),
    ];
    for (seq, body) in outgoing.into_iter().enumerate() {
        let msg = WireMessage { seq: seq as u64, corr: None, body };
        ws.send(Message::Text(msg.encode())).await?;
    }

    while let Some(frame) = ws.next().await {
        let Message::Text(text) = frame? else { continue };
        let msg = WireMessage::decode(&text).map_err(|(_, reason)| reason)?;
        match &msg.body {
            Body::Hello(h) => println!("#{} hello, client {} on '{}'", msg.seq, h.client_id, h.scenario.name),
            Body::PredictionResult(p) => println!("#{} prediction: psi_2 -> {:+.4}", msg.seq, p.predicted_psi_2),
            Body::StateTick(t) => println!("#{} tick t = {:.2} hitch {:+.4}", msg.seq, t.t, t.hitch_angle),
            Body::PauseRequestInput(s) => {
                println!("#{} paused at t = {}, waiting for input", msg.seq, s.t);
                break;
            }
            other => println!("#{} {}", msg.seq, other.kind()),
        }
    }
    ws.close(None).await?;
    gateway.shutdown().await;
    Ok(())
}
