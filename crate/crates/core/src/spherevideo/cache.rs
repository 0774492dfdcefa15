use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use super::{CubeMapFrame, SourceError};

/// Bounded least-recently-used frame cache.
///
/// Entries are reference counted; eviction only drops the cache's handle.
pub struct FrameCache {
    capacity: usize,
    inner: Mutex<CacheState>,
}

#[derive(Default)]
struct CacheState {
    frames: HashMap<usize, Arc<CubeMapFrame>>,
    order: VecDeque<usize>,
}

impl FrameCache {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            inner: Mutex::new(CacheState::default()),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock").frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Returns the cached frame or loads it with `load`. The loader runs
    /// without holding the lock, so two readers may load the same index
    /// concurrently; the first insert wins.
    pub fn get_or_load(
        &self,
        index: usize,
        load: impl FnOnce() -> Result<CubeMapFrame, SourceError>,
    ) -> Result<Arc<CubeMapFrame>, SourceError> {
        if let Some(hit) = self.touch(index) {
            return Ok(hit);
        }
        let frame = Arc::new(load()?);
        let mut st = self.inner.lock().expect("cache lock");
        if let Some(existing) = st.frames.get(&index) {
            return Ok(existing.clone());
        }
        while st.frames.len() >= self.capacity {
            match st.order.pop_front() {
                Some(old) => {
                    st.frames.remove(&old);
                }
                None => break,
            }
        }
        st.frames.insert(index, frame.clone());
        st.order.push_back(index);
        Ok(frame)
    }

    fn touch(&self, index: usize) -> Option<Arc<CubeMapFrame>> {
        let mut st = self.inner.lock().expect("cache lock");
        let hit = st.frames.get(&index).cloned()?;
        if let Some(pos) = st.order.iter().position(|&i| i == index) {
            st.order.remove(pos);
        }
        st.order.push_back(index);
        Some(hit)
    }
}
