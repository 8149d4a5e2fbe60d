//! Scripted websocket client for `faceatlas serve`.
//!
//! ```text
//! cargo run -- serve --port 8080 &
//! cargo run --example live_client -- ws://127.0.0.1:8080/ws
//! ```

use futures_util::{SinkExt, StreamExt};
use tokio_tungstenite::tungstenite::Message;

use faceatlas::fixture;
use faceatlas::service::ClientMessage;

#[tokio::main(flavor = "current_thread")]
async fn main() -> anyhow::Result<()> {
    let url = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "ws://127.0.0.1:8080/ws".to_string());
    let (mut ws, _) = tokio_tungstenite::connect_async(url.as_str()).await?;

    let mut outgoing = vec![
        ClientMessage::Hello,
        ClientMessage::Select {
            channels: vec!["ST".into()],
        },
    ];
    outgoing.extend(
        fixture::jittered_stream(5, 33_333, 1)
            .iter()
            .map(|f| ClientMessage::Frame(f.to_record())),
    );
    for msg in &outgoing {
        ws.send(Message::Text(serde_json::to_string(msg)?.into())).await?;
    }

    let mut answered = 0;
    while answered < 5 {
        let Some(msg) = ws.next().await else { break };
        let text = msg?.into_text()?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        match value["type"].as_str() {
            Some("atlas") | Some("dropped") => {
                answered += 1;
                println!(
                    "{} ts={} points={}",
                    value["type"],
                    value["ts"],
                    value["points"].as_array().map_or(0, Vec::len)
                );
            }
            _ => println!("{}", text.chars().take(120).collect::<String>()),
        }
    }
    ws.close(None).await?;
    Ok(())
}
