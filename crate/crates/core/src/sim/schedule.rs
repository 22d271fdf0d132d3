use std::collections::BTreeSet;

use crate::time::SimTime;

/// Children's next-event times ordered by `(tn, index)`.
///
/// Indices follow ascending `ModelId`, so the first entry is the imminent
/// child under the lowest-id rule.
#[derive(Debug, Clone)]
pub(crate) struct EventList {
    tn: Vec<SimTime>,
    order: BTreeSet<(SimTime, usize)>,
}

impl EventList {
    pub(crate) fn new(n: usize) -> Self {
        let tn = vec![SimTime::INFINITY; n];
        let order = (0..n).map(|i| (SimTime::INFINITY, i)).collect();
        EventList { tn, order }
    }

    pub(crate) fn set(&mut self, idx: usize, t: SimTime) {
        let old = self.tn[idx];
        if old == t {
            return;
        }
        self.order.remove(&(old, idx));
        self.order.insert((t, idx));
        self.tn[idx] = t;
    }

    pub(crate) fn min(&self) -> SimTime {
        self.order.first().map_or(SimTime::INFINITY, |&(t, _)| t)
    }

    pub(crate) fn first(&self) -> Option<usize> {
        self.order.first().map(|&(_, i)| i)
    }

    /// Indices of all children scheduled at the minimum time, ascending.
    pub(crate) fn tied(&self) -> Vec<usize> {
        let min = self.min();
        self.order.iter().take_while(|&&(t, _)| t == min).map(|&(_, i)| i).collect()
    }
}
