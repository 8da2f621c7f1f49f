use super::instance::TriageInstance;

/// Slot occupancy used while building plans outside the 0-1 model.
///
/// Inside the horizon the calendar is authoritative; past it a slot is busy
/// up to its `busy_until` day and free afterwards.
pub(crate) struct Board {
    horizon: usize,
    rows: Vec<Vec<Vec<bool>>>,
    busy_until: Vec<Vec<usize>>,
}

impl Board {
    pub fn new(instance: &TriageInstance) -> Self {
        Board {
            horizon: instance.horizon,
            rows: instance.developers.iter().map(|d| d.calendar.rows().to_vec()).collect(),
            busy_until: instance.developers.iter().map(|d| d.busy_until.clone()).collect(),
        }
    }

    pub fn slots(&self, d: usize) -> usize {
        self.rows[d].len()
    }

    pub fn is_free(&self, d: usize, j: usize, u: usize) -> bool {
        if j >= self.rows[d].len() {
            return true;
        }
        if u <= self.horizon {
            self.rows[d][j][u - 1]
        } else {
            u > self.busy_until[d][j]
        }
    }

    /// First day `t >= from` such that `t..t+len-1` is free.
    pub fn earliest_start(&self, d: usize, j: usize, from: usize, len: usize) -> usize {
        let mut t = from.max(1);
        while let Some(u) = (t..t + len).rev().find(|&u| !self.is_free(d, j, u)) {
            t = u + 1;
        }
        t
    }

    pub fn claim(&mut self, d: usize, j: usize, t: usize, len: usize) {
        while j >= self.rows[d].len() {
            self.rows[d].push(vec![true; self.horizon]);
            self.busy_until[d].push(0);
        }
        let end = t + len - 1;
        for u in t..=end.min(self.horizon) {
            self.rows[d][j][u - 1] = false;
        }
        if end > self.horizon {
            self.busy_until[d][j] = self.busy_until[d][j].max(end);
        }
    }

    pub fn free_days(&self, d: usize, j: usize) -> usize {
        self.rows[d][j].iter().filter(|&&f| f).count()
    }

    /// Slot among the first `limit` with the most free days in the horizon;
    /// the lowest index wins ties.
    pub fn roomiest_slot(&self, d: usize, limit: usize) -> usize {
        let mut best = 0;
        for j in 1..limit.min(self.slots(d)) {
            if self.free_days(d, j) > self.free_days(d, best) {
                best = j;
            }
        }
        best
    }

    /// Slot among the first `limit` where a job of `len` days can start
    /// earliest; the lowest index wins ties.
    pub fn least_loaded_slot(&self, d: usize, limit: usize, len: usize) -> (usize, usize) {
        (0..limit.min(self.slots(d)))
            .map(|j| (j, self.earliest_start(d, j, 1, len)))
            .min_by_key(|&(j, t)| (t, j))
            .expect("developer has a slot")
    }
}
