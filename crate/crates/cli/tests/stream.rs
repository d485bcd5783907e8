mod support;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use futures_util::StreamExt;
use gcs_cli::service::{FrameHeader, Telemetry};
use gcs_core::store::FrameBuffer;
use tokio_tungstenite::tungstenite::Message;

use support::*;

#[derive(Debug)]
enum Msg {
    Telemetry(Telemetry, Instant),
    Frame(u64, Vec<u8>, Instant),
}

async fn collect(url: String, dur: Duration) -> Vec<Msg> {
    let (mut ws, _) = tokio_tungstenite::connect_async(url).await.unwrap();
    let end = tokio::time::Instant::now() + dur;
    let mut out = Vec::new();
    let mut header: Option<FrameHeader> = None;
    while let Ok(Some(msg)) = tokio::time::timeout_at(end, ws.next()).await {
        match msg.unwrap() {
            Message::Text(t) => {
                if let Ok(h) = serde_json::from_str::<FrameHeader>(t.as_str()) {
                    header = Some(h);
                } else {
                    out.push(Msg::Telemetry(serde_json::from_str(t.as_str()).unwrap(), Instant::now()));
                }
            }
            Message::Binary(b) => {
                let h = header.take().expect("binary frame without a header");
                out.push(Msg::Frame(h.seq, b.to_vec(), Instant::now()));
            }
            Message::Close(_) => break,
            other => panic!("unexpected message {other:?}"),
        }
    }
    out
}

fn frames(msgs: &[Msg]) -> Vec<(u64, &[u8])> {
    msgs.iter()
        .filter_map(|m| match m {
            Msg::Frame(seq, b, _) => Some((*seq, b.as_slice())),
            _ => None,
        })
        .collect()
}

fn ws_url(svc: &gcs_cli::service::Service) -> String {
    format!("ws://{}/stream", svc.addr())
}

fn rt() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap()
}

#[test]
fn one_client_keeps_up_with_five_fps() {
    let dir = tempfile::tempdir().unwrap();
    let (svc, c) = start(sim_config(dir.path(), 5));
    c.connect(None).unwrap();
    c.command("streamon").unwrap();
    wait_for_frame(&c, None);

    let secs = 3;
    let msgs = rt().block_on(collect(ws_url(&svc), Duration::from_secs(secs)));
    let fr = frames(&msgs);
    assert!(fr.len() as u64 >= 4 * secs, "{} frames in {secs}s", fr.len());
    assert!(fr.len() as u64 <= 5 * secs + 2, "{} frames in {secs}s", fr.len());
    assert!(fr.windows(2).all(|w| w[0].0 < w[1].0), "seq not increasing");

    let check = FrameBuffer::new();
    for (_, rec) in &fr {
        let f = check.ingest(rec).unwrap();
        assert_eq!((f.image.width(), f.image.height()), (128, 128));
    }
    assert!(msgs.iter().any(|m| matches!(m, Msg::Telemetry(t, _) if t.streaming && t.connected)));
}

#[test]
fn telemetry_only_until_streamon() {
    let dir = tempfile::tempdir().unwrap();
    let (svc, c) = start(sim_config(dir.path(), 10));
    c.connect(None).unwrap();
    let rt = rt();
    let task = rt.spawn(collect(ws_url(&svc), Duration::from_millis(2500)));
    std::thread::sleep(Duration::from_millis(800));
    let streamon_at = Instant::now();
    c.command("streamon").unwrap();
    let msgs = rt.block_on(task).unwrap();

    let first_frame = msgs.iter().position(|m| matches!(m, Msg::Frame(..))).expect("frames arrive");
    assert!(first_frame >= 2, "expected telemetry before the stream started");
    for m in &msgs[..first_frame] {
        match m {
            Msg::Telemetry(t, _) => assert!(t.connected),
            Msg::Frame(..) => unreachable!(),
        }
    }
    if let Msg::Frame(_, _, at) = &msgs[first_frame] {
        assert!(*at >= streamon_at);
    }
    assert!(msgs[..first_frame]
        .iter()
        .any(|m| matches!(m, Msg::Telemetry(t, at) if !t.streaming && t.frame_seq.is_none() && *at < streamon_at)));
}

#[test]
fn two_clients_see_identical_frames() {
    let dir = tempfile::tempdir().unwrap();
    let (svc, c) = start(sim_config(dir.path(), 10));
    c.connect(None).unwrap();
    c.command("streamon").unwrap();
    wait_for_frame(&c, None);

    let rt = rt();
    let a = rt.spawn(collect(ws_url(&svc), Duration::from_secs(2)));
    let b = rt.spawn(collect(ws_url(&svc), Duration::from_secs(2)));
    let (a, b) = (rt.block_on(a).unwrap(), rt.block_on(b).unwrap());
    let by_seq = |m: &[Msg]| -> BTreeMap<u64, Vec<u8>> {
        frames(m).into_iter().map(|(s, b)| (s, b.to_vec())).collect()
    };
    let (a, b) = (by_seq(&a), by_seq(&b));
    let shared: Vec<u64> = a.keys().filter(|s| b.contains_key(s)).copied().collect();
    assert!(shared.len() >= 10, "only {} shared frames", shared.len());
    for s in shared {
        assert_eq!(a[&s], b[&s], "frame {s} differs between clients");
    }
}

#[test]
fn stream_closes_on_service_stop() {
    let dir = tempfile::tempdir().unwrap();
    let (svc, _c) = sim_service(dir.path());
    let rt = rt();
    let url = ws_url(&svc);
    let task = rt.spawn(collect(url, Duration::from_secs(10)));
    std::thread::sleep(Duration::from_millis(300));
    let t0 = Instant::now();
    svc.stop().unwrap();
    let msgs = rt.block_on(task).unwrap();
    assert!(t0.elapsed() < Duration::from_secs(5));
    assert!(msgs.iter().all(|m| matches!(m, Msg::Telemetry(..))));
}
