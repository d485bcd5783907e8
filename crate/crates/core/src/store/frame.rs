use std::io;
use std::net::UdpSocket;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use log::{debug, warn};
use thiserror::Error;

use crate::imaging::RgbImage;

/// First four payload bytes of every frame record.
pub const FRAME_MAGIC: &[u8; 4] = b"SIMF";
/// Payload header: magic, u16 width, u16 height (big-endian).
pub const FRAME_HEADER_LEN: usize = 8;
/// Largest record that fits in one UDP datagram.
pub const MAX_RECORD_LEN: usize = 65_507;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("malformed frame record: {0}")]
    Malformed(String),
    #[error("frame {width}x{height} does not fit the transport")]
    TooLarge { width: usize, height: usize },
}

/// Frame transport record: `u32` big-endian payload length, then the payload
/// `"SIMF" | u16 width | u16 height | RGB24 row-major pixels`.
pub fn encode_record(img: &RgbImage) -> Result<Vec<u8>, FrameError> {
    let (w, h) = (img.width(), img.height());
    if w > u16::MAX as usize || h > u16::MAX as usize {
        return Err(FrameError::TooLarge {
            width: w,
            height: h,
        });
    }
    let payload_len = FRAME_HEADER_LEN + img.as_bytes().len();
    let mut out = Vec::with_capacity(4 + payload_len);
    out.extend_from_slice(&(payload_len as u32).to_be_bytes());
    out.extend_from_slice(FRAME_MAGIC);
    out.extend_from_slice(&(w as u16).to_be_bytes());
    out.extend_from_slice(&(h as u16).to_be_bytes());
    out.extend_from_slice(img.as_bytes());
    Ok(out)
}

pub fn decode_record(record: &[u8]) -> Result<RgbImage, FrameError> {
    let bad = |msg: String| Err(FrameError::Malformed(msg));
    if record.len() < 4 + FRAME_HEADER_LEN {
        return bad(format!("{} bytes is shorter than the header", record.len()));
    }
    let declared = u32::from_be_bytes(record[0..4].try_into().unwrap()) as usize;
    let payload = &record[4..];
    if declared != payload.len() {
        return bad(format!(
            "length prefix says {declared} bytes, record carries {}",
            payload.len()
        ));
    }
    if &payload[0..4] != FRAME_MAGIC {
        return bad("bad magic".into());
    }
    let w = u16::from_be_bytes([payload[4], payload[5]]) as usize;
    let h = u16::from_be_bytes([payload[6], payload[7]]) as usize;
    let pixels = &payload[FRAME_HEADER_LEN..];
    if pixels.len() != w * h * 3 {
        return bad(format!(
            "{w}x{h} frame needs {} pixel bytes, got {}",
            w * h * 3,
            pixels.len()
        ));
    }
    RgbImage::new(w, h, pixels.to_vec()).map_err(|e| FrameError::Malformed(e.to_string()))
}

/// A decoded frame stamped on arrival.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub image: RgbImage,
    /// Strictly increasing per buffer.
    pub seq: u64,
    /// Milliseconds since the buffer was created.
    pub timestamp_ms: u64,
}

/// Single-slot, latest-wins frame holder shared by one writer and many readers.
///
/// Frames are handed out as `Arc`s, so a reader always sees a complete frame
/// even while the writer replaces it.
#[derive(Debug)]
pub struct FrameBuffer {
    slot: Mutex<Slot>,
    fresh: Condvar,
    started: Instant,
    malformed: AtomicU64,
}

#[derive(Debug, Default)]
struct Slot {
    latest: Option<Arc<Frame>>,
    next_seq: u64,
}

impl Default for FrameBuffer {
    fn default() -> Self {
        Self::new()
    }
}

impl FrameBuffer {
    pub fn new() -> Self {
        Self {
            slot: Mutex::new(Slot {
                latest: None,
                next_seq: 1,
            }),
            fresh: Condvar::new(),
            started: Instant::now(),
            malformed: AtomicU64::new(0),
        }
    }

    /// Decodes a transport record and makes it the latest frame.
    /// Malformed records are counted and leave the held frame untouched.
    pub fn ingest(&self, record: &[u8]) -> Result<Arc<Frame>, FrameError> {
        match decode_record(record) {
            Ok(img) => Ok(self.publish(img)),
            Err(e) => {
                self.malformed.fetch_add(1, Ordering::Relaxed);
                Err(e)
            }
        }
    }

    pub fn publish(&self, image: RgbImage) -> Arc<Frame> {
        let timestamp_ms = self.started.elapsed().as_millis() as u64;
        let mut slot = self.slot.lock().unwrap();
        let frame = Arc::new(Frame {
            image,
            seq: slot.next_seq,
            timestamp_ms,
        });
        slot.next_seq += 1;
        slot.latest = Some(frame.clone());
        drop(slot);
        self.fresh.notify_all();
        frame
    }

    pub fn latest(&self) -> Option<Arc<Frame>> {
        self.slot.lock().unwrap().latest.clone()
    }

    /// Blocks until a frame with `seq > after_seq` is held, or the timeout passes.
    pub fn wait_newer(&self, after_seq: u64, timeout: Duration) -> Option<Arc<Frame>> {
        let slot = self.slot.lock().unwrap();
        let (slot, _) = self
            .fresh
            .wait_timeout_while(slot, timeout, |s| {
                s.latest.as_ref().is_none_or(|f| f.seq <= after_seq)
            })
            .unwrap();
        slot.latest.clone().filter(|f| f.seq > after_seq)
    }

    pub fn ingested(&self) -> u64 {
        self.slot.lock().unwrap().next_seq - 1
    }

    pub fn malformed(&self) -> u64 {
        self.malformed.load(Ordering::Relaxed)
    }
}

/// Background thread feeding a [`FrameBuffer`] from a UDP socket.
pub struct FrameReceiver {
    local_addr: std::net::SocketAddr,
    running: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl FrameReceiver {
    /// Starts receiving on `socket`. `on_frame` runs on the receiver thread
    /// after each successful ingest.
    pub fn spawn(
        socket: UdpSocket,
        buffer: Arc<FrameBuffer>,
        on_frame: impl Fn(&Arc<Frame>) + Send + 'static,
    ) -> io::Result<Self> {
        socket.set_read_timeout(Some(Duration::from_millis(50)))?;
        let local_addr = socket.local_addr()?;
        let running = Arc::new(AtomicBool::new(true));
        let flag = running.clone();
        let thread = std::thread::Builder::new()
            .name("frame-rx".into())
            .spawn(move || {
                let mut buf = vec![0u8; 65_536];
                while flag.load(Ordering::Relaxed) {
                    match socket.recv_from(&mut buf) {
                        Ok((n, _)) => match buffer.ingest(&buf[..n]) {
                            Ok(frame) => on_frame(&frame),
                            Err(e) => debug!("dropping record: {e}"),
                        },
                        Err(e)
                            if matches!(
                                e.kind(),
                                io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut
                            ) => {}
                        Err(e) => {
                            warn!("frame socket error: {e}");
                            std::thread::sleep(Duration::from_millis(50));
                        }
                    }
                }
            })?;
        Ok(Self {
            local_addr,
            running,
            thread: Some(thread),
        })
    }

    pub fn local_addr(&self) -> std::net::SocketAddr {
        self.local_addr
    }

    pub fn stop(&mut self) {
        self.running.store(false, Ordering::Relaxed);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for FrameReceiver {
    fn drop(&mut self) {
        self.stop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(w: usize, h: usize, v: u8) -> RgbImage {
        RgbImage::filled(w, h, [v, v.wrapping_add(1), v.wrapping_add(2)]).unwrap()
    }

    #[test]
    fn record_layout() {
        let rec = encode_record(&img(2, 1, 10)).unwrap();
        assert_eq!(
            rec,
            vec![0, 0, 0, 14, b'S', b'I', b'M', b'F', 0, 2, 0, 1, 10, 11, 12, 10, 11, 12]
        );
        assert_eq!(decode_record(&rec).unwrap(), img(2, 1, 10));
    }

    #[test]
    fn ingest_16x16() {
        let buf = FrameBuffer::new();
        let f = buf.ingest(&encode_record(&img(16, 16, 0)).unwrap()).unwrap();
        assert_eq!(f.image.as_bytes().len(), 768);
        assert_eq!(f.seq, 1);
    }

    #[test]
    fn truncated_record_keeps_previous_frame() {
        let buf = FrameBuffer::new();
        let good = encode_record(&img(4, 4, 1)).unwrap();
        buf.ingest(&good).unwrap();
        let mut short = encode_record(&img(4, 4, 2)).unwrap();
        short.truncate(short.len() - 3);
        assert!(matches!(buf.ingest(&short), Err(FrameError::Malformed(_))));
        let mut magic = encode_record(&img(4, 4, 3)).unwrap();
        magic[4] = b'X';
        assert!(buf.ingest(&magic).is_err());
        assert_eq!(buf.malformed(), 2);
        assert_eq!(buf.latest().unwrap().image, img(4, 4, 1));
    }

    #[test]
    fn inconsistent_dimensions_rejected() {
        let mut rec = encode_record(&img(4, 4, 1)).unwrap();
        rec[9] = 5; // width 5 with 4x4 pixel bytes
        assert!(decode_record(&rec).is_err());
    }

    #[test]
    fn latest_wins() {
        let buf = FrameBuffer::new();
        assert!(buf.latest().is_none());
        buf.ingest(&encode_record(&img(2, 2, 1)).unwrap()).unwrap();
        buf.ingest(&encode_record(&img(2, 2, 2)).unwrap()).unwrap();
        let f = buf.latest().unwrap();
        assert_eq!(f.seq, 2);
        assert_eq!(f.image, img(2, 2, 2));
    }

    #[test]
    fn wait_newer_wakes_on_publish() {
        let buf = Arc::new(FrameBuffer::new());
        assert!(buf.wait_newer(0, Duration::from_millis(10)).is_none());
        let writer = buf.clone();
        let t = std::thread::spawn(move || {
            std::thread::sleep(Duration::from_millis(20));
            writer.publish(img(1, 1, 9));
        });
        let f = buf.wait_newer(0, Duration::from_secs(2)).unwrap();
        assert_eq!(f.seq, 1);
        t.join().unwrap();
    }

    #[test]
    fn readers_never_see_torn_frames() {
        let buf = Arc::new(FrameBuffer::new());
        let writer = buf.clone();
        let t = std::thread::spawn(move || {
            for i in 0..500u32 {
                writer.publish(img(32, 32, (i % 250) as u8));
            }
        });
        let mut last = 0;
        while !t.is_finished() {
            if let Some(f) = buf.latest() {
                let first = f.image.as_bytes()[0];
                assert!(f.image.as_bytes().chunks(3).all(|p| p[0] == first));
                assert!(f.seq >= last);
                last = f.seq;
            }
        }
        t.join().unwrap();
    }
}
