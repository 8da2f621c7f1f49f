use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::DevId;

/// Binary availability matrix: one row per slot, one column per day of the
/// planning horizon. Column `t` (1-based) is day `t` of the current frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Calendar {
    horizon: usize,
    rows: Vec<Vec<bool>>,
}

impl Calendar {
    /// A calendar where every slot is free on every day.
    pub fn free(slots: usize, horizon: usize) -> Self {
        assert!(slots >= 1, "a developer has at least one slot");
        assert!(horizon >= 1, "horizon must be positive");
        Calendar { horizon, rows: vec![vec![true; horizon]; slots] }
    }

    pub fn from_rows(rows: Vec<Vec<bool>>) -> Self {
        let horizon = rows.first().map_or(0, |r| r.len());
        assert!(!rows.is_empty() && horizon >= 1);
        assert!(rows.iter().all(|r| r.len() == horizon), "ragged calendar");
        Calendar { horizon, rows }
    }

    pub fn slots(&self) -> usize {
        self.rows.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Whether `slot` is free on horizon day `t` (1-based). Days past the
    /// horizon are reported busy.
    pub fn is_free(&self, slot: usize, t: usize) -> bool {
        t >= 1 && t <= self.horizon && self.rows[slot][t - 1]
    }

    pub fn set(&mut self, slot: usize, t: usize, free: bool) {
        self.rows[slot][t - 1] = free;
    }

    /// True when `slot` is free for the whole run `t..t+len-1` and the run
    /// ends inside the horizon.
    pub fn run_free(&self, slot: usize, t: usize, len: usize) -> bool {
        len >= 1 && t >= 1 && t + len - 1 <= self.horizon && (t..t + len).all(|u| self.rows[slot][u - 1])
    }

    pub fn free_days(&self, slot: usize) -> usize {
        self.rows[slot].iter().filter(|&&f| f).count()
    }

    pub fn total_free_days(&self) -> usize {
        (0..self.slots()).map(|j| self.free_days(j)).sum()
    }

    /// Shifts every row left by one day and appends `appended[j]` as the new
    /// last column of slot `j`.
    pub fn shift(&mut self, appended: &[bool]) {
        assert_eq!(appended.len(), self.rows.len());
        for (row, &next) in self.rows.iter_mut().zip(appended) {
            row.remove(0);
            row.push(next);
        }
    }

    /// Adds a slot row at the bottom.
    pub fn push_slot(&mut self, row: Vec<bool>) {
        assert_eq!(row.len(), self.horizon, "row width must match the horizon");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }
}

/// A developer as the optimizers see them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeveloperProfile {
    pub id: DevId,
    pub slot_count: usize,
    pub calendar: Calendar,
    pub experienced_components: BTreeSet<String>,
    /// Estimated fixing days per topic.
    pub topic_cost: Vec<f64>,
    pub fix_count_training: u32,
}

impl DeveloperProfile {
    pub fn new(id: DevId, slot_count: usize, horizon: usize) -> Self {
        DeveloperProfile {
            id,
            slot_count,
            calendar: Calendar::free(slot_count, horizon),
            experienced_components: BTreeSet::new(),
            topic_cost: Vec::new(),
            fix_count_training: 0,
        }
    }

    /// Checks the profile invariants against horizon `horizon`.
    pub fn is_well_formed(&self, horizon: usize) -> bool {
        self.slot_count >= 1
            && self.calendar.slots() == self.slot_count
            && self.calendar.horizon() == horizon
            && self.topic_cost.iter().all(|&c| c >= 1.0 && c.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_drops_first_day() {
        let mut c = Calendar::free(1, 4);
        for t in 1..=3 {
            c.set(0, t, false);
        }
        c.shift(&[true]);
        assert_eq!(c.rows()[0], vec![false, false, true, true]);
    }

    #[test]
    fn free_calendar_stays_free() {
        let mut c = Calendar::free(2, 3);
        c.shift(&[true, true]);
        assert_eq!(c.total_free_days(), 6);
    }

    #[test]
    fn off_day_appends_busy_column() {
        let mut c = Calendar::free(1, 3);
        c.shift(&[false]);
        assert!(!c.is_free(0, 3));
        assert!(c.is_free(0, 2));
    }

    #[test]
    fn runs_respect_horizon() {
        let c = Calendar::free(1, 3);
        assert!(c.run_free(0, 2, 2));
        assert!(!c.run_free(0, 2, 3));
        assert!(!c.is_free(0, 4));
    }
}
