use std::net::{Ipv4Addr, SocketAddrV4, UdpSocket};
use std::sync::Arc;
use std::time::Duration;

use gcs_core::link::LinkEndpoint;
use gcs_core::sim::{serve_endpoint, SimConfig, SimHandle};
use gcs_core::store::{FrameBuffer, FrameReceiver};

pub const FAST_TIMEOUT: Duration = Duration::from_millis(400);

/// Endpoint aimed at `drone`, bound to an ephemeral loopback port.
pub fn endpoint(drone: SocketAddrV4) -> LinkEndpoint {
    LinkEndpoint {
        drone_addr: drone,
        local_bind: SocketAddrV4::new(Ipv4Addr::LOCALHOST, 0),
        reply_timeout: FAST_TIMEOUT,
        max_retries: 3,
    }
}

pub fn sim(cfg: SimConfig) -> (SimHandle, LinkEndpoint) {
    let sim = serve_endpoint(cfg).unwrap();
    let ep = endpoint(sim.drone_addr());
    (sim, ep)
}

/// A loopback port with nothing answering on it.
pub fn dead_port() -> (UdpSocket, SocketAddrV4) {
    let s = UdpSocket::bind("127.0.0.1:0").unwrap();
    let addr = match s.local_addr().unwrap() {
        std::net::SocketAddr::V4(a) => a,
        _ => unreachable!(),
    };
    (s, addr)
}

/// Simulator streaming into a local frame buffer.
pub struct Rig {
    pub sim: SimHandle,
    pub ep: LinkEndpoint,
    pub frames: Arc<FrameBuffer>,
    pub rx: FrameReceiver,
}

pub fn rig(cfg: SimConfig) -> Rig {
    let frames = Arc::new(FrameBuffer::new());
    let socket = UdpSocket::bind("127.0.0.1:0").unwrap();
    let rx = FrameReceiver::spawn(socket, frames.clone(), |_| {}).unwrap();
    let (sim, ep) = sim(SimConfig {
        frame_dest: Some(rx.local_addr()),
        fps: 25,
        ..cfg
    });
    Rig { sim, ep, frames, rx }
}
