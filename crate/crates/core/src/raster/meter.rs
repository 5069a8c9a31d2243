use std::ops::{Deref, DerefMut};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

/// Shared byte counter for working buffers. Tracks the live total and its
/// high-water mark.
#[derive(Debug, Clone, Default)]
pub struct MemoryMeter {
    inner: Arc<Counters>,
}

#[derive(Debug, Default)]
struct Counters {
    current: AtomicUsize,
    peak: AtomicUsize,
}

impl MemoryMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn acquire(&self, bytes: usize) {
        let now = self.inner.current.fetch_add(bytes, Ordering::SeqCst) + bytes;
        self.inner.peak.fetch_max(now, Ordering::SeqCst);
    }

    pub fn release(&self, bytes: usize) {
        self.inner.current.fetch_sub(bytes, Ordering::SeqCst);
    }

    pub fn current(&self) -> usize {
        self.inner.current.load(Ordering::SeqCst)
    }

    pub fn peak(&self) -> usize {
        self.inner.peak.load(Ordering::SeqCst)
    }
}

/// Fixed-length buffer whose footprint is reported to a [`MemoryMeter`]
/// for as long as it lives.
#[derive(Debug)]
pub struct TrackedBuf<T> {
    data: Vec<T>,
    meter: Option<MemoryMeter>,
}

impl<T: Clone> TrackedBuf<T> {
    pub fn new(len: usize, fill: T, meter: Option<&MemoryMeter>) -> Self {
        let data = vec![fill; len];
        let meter = meter.cloned();
        if let Some(m) = &meter {
            m.acquire(len * std::mem::size_of::<T>());
        }
        TrackedBuf { data, meter }
    }
}

impl<T> TrackedBuf<T> {
    pub fn bytes(&self) -> usize {
        self.data.len() * std::mem::size_of::<T>()
    }
}

impl<T> Drop for TrackedBuf<T> {
    fn drop(&mut self) {
        if let Some(m) = &self.meter {
            m.release(self.bytes());
        }
    }
}

impl<T> Deref for TrackedBuf<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.data
    }
}

impl<T> DerefMut for TrackedBuf<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
}
