use std::collections::VecDeque;

use super::{AccelError, Depth};
use crate::flow::Residual;
use crate::grid::{MacGrid, VelocityField};

/// An iterate together with its nonlinear residual.
#[derive(Debug, Clone)]
pub struct HistoryEntry {
    pub u: VelocityField,
    pub residual: Residual,
}

/// The last `m_k + 1` iterates, oldest first, plus the Picard candidate.
///
/// Coefficient vectors address the window in the opposite order: index 0 is
/// the candidate, index 1 the newest iterate `u_k`, and the last index the
/// oldest stored iterate.
#[derive(Debug, Clone)]
pub struct HistoryWindow {
    grid: MacGrid,
    depth: Depth,
    entries: VecDeque<HistoryEntry>,
    candidate: Option<HistoryEntry>,
}

impl HistoryWindow {
    pub fn new(grid: MacGrid, depth: Depth) -> Self {
        Self {
            grid,
            depth,
            entries: VecDeque::new(),
            candidate: None,
        }
    }

    pub fn grid(&self) -> &MacGrid {
        &self.grid
    }

    pub fn depth(&self) -> Depth {
        self.depth
    }

    /// Change the depth, evicting the oldest iterates that no longer fit.
    pub fn set_depth(&mut self, depth: Depth) {
        self.depth = depth;
        self.evict();
    }

    fn evict(&mut self) {
        while self.entries.len() > self.depth.capacity() {
            self.entries.pop_front();
        }
    }

    /// Append the newest iterate `u_k`; clears any previous candidate.
    pub fn push(&mut self, entry: HistoryEntry) {
        self.candidate = None;
        self.entries.push_back(entry);
        self.evict();
    }

    pub fn set_candidate(&mut self, entry: HistoryEntry) {
        self.candidate = Some(entry);
    }

    pub fn candidate(&self) -> Option<&HistoryEntry> {
        self.candidate.as_ref()
    }

    /// Stored iterates, oldest first (candidate excluded).
    pub fn iterates(&self) -> impl DoubleEndedIterator<Item = &HistoryEntry> + ExactSizeIterator {
        self.entries.iter()
    }

    /// Stored iterates plus the candidate, if present.
    pub fn len(&self) -> usize {
        self.entries.len() + usize::from(self.candidate.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries in coefficient order: candidate, `u_k`, `u_{k-1}`, ... oldest.
    pub fn in_coefficient_order(&self) -> Result<Vec<&HistoryEntry>, AccelError> {
        let cand = self.candidate.as_ref().ok_or(AccelError::NoCandidate)?;
        Ok(std::iter::once(cand).chain(self.entries.iter().rev()).collect())
    }

    /// A copy without the `count` oldest iterates.
    pub fn without_oldest(&self, count: usize) -> Self {
        let mut out = self.clone();
        for _ in 0..count.min(out.entries.len()) {
            out.entries.pop_front();
        }
        out
    }
}
