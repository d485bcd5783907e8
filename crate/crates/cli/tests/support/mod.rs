#![allow(dead_code)]

use std::net::{Ipv4Addr, SocketAddr, SocketAddrV4, UdpSocket};
use std::path::Path;
use std::thread;
use std::time::{Duration, Instant};

use gcs_cli::client::Client;
use gcs_cli::service::{Service, ServiceConfig};
use gcs_core::mission::MissionOptions;

pub fn sim_config(data_dir: &Path, fps: u32) -> ServiceConfig {
    ServiceConfig {
        sim_mode: true,
        http_bind: SocketAddr::from(([127, 0, 0, 1], 0)),
        data_dir: data_dir.to_path_buf(),
        fps,
        reply_timeout: Duration::from_millis(1500),
        mission: MissionOptions {
            settle: Duration::ZERO,
            capture_timeout: Duration::from_secs(3),
        },
        telemetry_every: Duration::from_millis(100),
        ..ServiceConfig::default()
    }
}

pub fn start(cfg: ServiceConfig) -> (Service, Client) {
    let svc = Service::start(cfg).expect("service starts");
    let client = Client::new(svc.url()).unwrap();
    (svc, client)
}

pub fn sim_service(data_dir: &Path) -> (Service, Client) {
    start(sim_config(data_dir, 25))
}

/// A service pointed at a loopback port that never answers.
pub fn dead_service(data_dir: &Path, retries: u32) -> (Service, Client, UdpSocket) {
    let hole = UdpSocket::bind((Ipv4Addr::LOCALHOST, 0)).unwrap();
    let drone = match hole.local_addr().unwrap() {
        SocketAddr::V4(a) => a,
        SocketAddr::V6(_) => unreachable!(),
    };
    let cfg = ServiceConfig {
        sim_mode: false,
        drone_addr: drone,
        local_bind: SocketAddrV4::new(Ipv4Addr::LOCALHOST, 0),
        frame_bind: SocketAddrV4::new(Ipv4Addr::LOCALHOST, 0),
        reply_timeout: Duration::from_millis(300),
        connect_retries: retries,
        ..sim_config(data_dir, 5)
    };
    let (svc, client) = start(cfg);
    (svc, client, hole)
}

/// Waits until the service has ingested a frame newer than `after`.
pub fn wait_for_frame(c: &Client, after: Option<u64>) -> u64 {
    let deadline = Instant::now() + Duration::from_secs(5);
    loop {
        let seq = c.state().unwrap().frames.latest_seq;
        if let Some(s) = seq {
            if after.is_none_or(|a| s > a) {
                return s;
            }
        }
        assert!(Instant::now() < deadline, "no frame arrived");
        thread::sleep(Duration::from_millis(20));
    }
}

pub fn streaming_service(data_dir: &Path) -> (Service, Client) {
    let (svc, c) = sim_service(data_dir);
    c.connect(None).unwrap();
    c.command("streamon").unwrap();
    wait_for_frame(&c, None);
    (svc, c)
}
