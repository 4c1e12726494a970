use std::collections::VecDeque;

use super::Event;

/// The last `depth + 1` events of a channel: the current sample plus `depth`
/// past ones.
#[derive(Debug, Clone)]
pub struct StreamWindow {
    channel: String,
    depth: usize,
    buffer: VecDeque<Event>,
}

impl StreamWindow {
    pub fn new(channel: impl Into<String>, depth: usize) -> Self {
        StreamWindow {
            channel: channel.into(),
            depth,
            buffer: VecDeque::with_capacity(depth + 1),
        }
    }

    pub fn channel(&self) -> &str {
        &self.channel
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Records a new sample, evicting the oldest when full. Ordering is the
    /// caller's responsibility; windows are fed from validated streams.
    pub fn push(&mut self, e: Event) {
        debug_assert!(self.buffer.back().is_none_or(|last| last.t < e.t));
        if self.buffer.len() == self.depth + 1 {
            self.buffer.pop_front();
        }
        self.buffer.push_back(e);
    }

    pub fn latest(&self) -> Option<&Event> {
        self.buffer.back()
    }

    /// The event immediately before the most recent one.
    pub fn prev(&self) -> Option<&Event> {
        self.buffer.len().checked_sub(2).map(|i| &self.buffer[i])
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Event> {
        self.buffer.iter()
    }
}
