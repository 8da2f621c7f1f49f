use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::program::{BinaryProgram, Comparator, SolverError};
use crate::par::{self, Execution};

const EPS: f64 = 1e-9;

/// Search limits. The node budget is checked on every node, the time budget
/// every 1024 nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_nodes: u64,
    pub max_time: Option<Duration>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_nodes: 5_000_000, max_time: None }
    }
}

/// How to choose among several optimal assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Prefer `1` on earlier-declared variables: the winning assignment is
    /// the first optimum in declaration order with ones before zeros.
    #[default]
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub budget: Budget,
    pub tie_break: TieBreak,
    /// Number of leading branching levels fanned out as independent
    /// subtrees. 0 keeps the search on one thread.
    pub split_depth: u32,
    pub execution: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { budget: Budget::default(), tie_break: TieBreak::Lexicographic, split_depth: 0, execution: Execution::Parallel }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// Budget ran out; the incumbent is feasible but not proven optimal.
    TimeoutBestFeasible,
    /// Budget ran out before any feasible assignment was found.
    TimeoutNoIncumbent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub assignment: Vec<bool>,
    pub objective: f64,
    pub nodes_explored: u64,
    pub wall_time: Duration,
}

impl SolveResult {
    pub fn has_incumbent(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::TimeoutBestFeasible)
    }
}

/// Solves `program` to optimality within `options.budget`.
pub fn solve(program: &BinaryProgram, options: &SolveOptions) -> Result<SolveResult, SolverError> {
    program.validate()?;
    let started = Instant::now();
    let compiled = Compiled::new(program);
    let deadline = options.budget.max_time.map(|d| started + d);

    let mut root = Search::new(&compiled);
    if !root.propagate_all() {
        return Ok(SolveResult {
            status: SolveStatus::Infeasible,
            assignment: vec![false; program.num_vars()],
            objective: 0.0,
            nodes_explored: 1,
            wall_time: started.elapsed(),
        });
    }
    let heuristic = root.greedy_dive();

    let outcome = if options.split_depth == 0 || !options.execution.is_parallel() {
        let mut s = root;
        s.incumbent = heuristic.map(|(v, a)| Incumbent { value: v, assignment: a, from_search: false });
        s.run(options.budget.max_nodes, deadline)
    } else {
        let prefixes = root.prefixes(options.split_depth);
        let per_tree = (options.budget.max_nodes / prefixes.len().max(1) as u64).max(1);
        let results = par::map(options.execution, &prefixes, |prefix| {
            let mut s = Search::new(&compiled);
            let ok = s.propagate_all() && prefix.iter().all(|&(v, val)| s.value[v] == val as i8 || s.assign(v, val));
            if !ok {
                return Outcome { incumbent: None, nodes: 1, exhausted: false };
            }
            s.incumbent = heuristic.clone().map(|(v, a)| Incumbent { value: v, assignment: a, from_search: false });
            s.run(per_tree, deadline)
        });
        merge(results, heuristic.clone())
    };

    let (status, assignment, objective) = match (outcome.incumbent, outcome.exhausted) {
        (Some(inc), false) => (SolveStatus::Optimal, inc.assignment, inc.value),
        (Some(inc), true) => (SolveStatus::TimeoutBestFeasible, inc.assignment, inc.value),
        (None, false) => (SolveStatus::Infeasible, vec![false; program.num_vars()], 0.0),
        (None, true) => (SolveStatus::TimeoutNoIncumbent, vec![false; program.num_vars()], 0.0),
    };
    let objective = if status == SolveStatus::Optimal || status == SolveStatus::TimeoutBestFeasible {
        program.objective_value(&assignment)
    } else {
        objective
    };
    Ok(SolveResult { status, assignment, objective, nodes_explored: outcome.nodes, wall_time: started.elapsed() })
}

/// Combines subtree outcomes listed in DFS order.
fn merge(results: Vec<Outcome>, heuristic: Option<(f64, Vec<bool>)>) -> Outcome {
    let nodes = results.iter().map(|o| o.nodes).sum();
    let exhausted = results.iter().any(|o| o.exhausted);
    let mut best: Option<Incumbent> = None;
    for inc in results.into_iter().filter_map(|o| o.incumbent).filter(|i| i.from_search) {
        if best.as_ref().is_none_or(|b| inc.value > b.value + EPS) {
            best = Some(inc);
        }
    }
    let incumbent = match (best, heuristic) {
        (Some(b), Some((hv, _))) if b.value >= hv - EPS => Some(b),
        (_, Some((hv, ha))) => Some(Incumbent { value: hv, assignment: ha, from_search: false }),
        (b, None) => b,
    };
    Outcome { incumbent, nodes, exhausted }
}

#[derive(Debug, Clone)]
struct Incumbent {
    value: f64,
    assignment: Vec<bool>,
    /// Found by the ordered search (as opposed to the greedy dive). Only
    /// search incumbents are known to be first in tie-break order.
    from_search: bool,
}

struct Outcome {
    incumbent: Option<Incumbent>,
    nodes: u64,
    exhausted: bool,
}

/// All constraints rewritten as `sum a_v x_v <= b`, with column access.
struct Compiled {
    obj: Vec<f64>,
    rows: Vec<Row>,
    cols: Vec<Vec<(usize, f64)>>,
    /// Disjoint variable sets, each covered by a row allowing at most one.
    groups: Vec<Vec<usize>>,
    /// Rows with nonnegative coefficients and positive rhs used by the
    /// packing bound, with each variable's normalized load across them.
    pack_rows: Vec<usize>,
    pack_load: Vec<f64>,
    ungrouped: Vec<usize>,
    unpacked: Vec<usize>,
}

struct Row {
    terms: Vec<(usize, f64)>,
    rhs: f64,
    max_abs: f64,
    nonneg: bool,
}

impl Compiled {
    fn new(p: &BinaryProgram) -> Self {
        let n = p.num_vars();
        let mut rows = Vec::new();
        let mut push = |terms: Vec<(usize, f64)>, rhs: f64| {
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
            let mut sorted = terms;
            sorted.sort_by_key(|t| t.0);
            for (v, a) in sorted {
                match merged.last_mut() {
                    Some(last) if last.0 == v => last.1 += a,
                    _ => merged.push((v, a)),
                }
            }
            merged.retain(|t| t.1 != 0.0);
            let max_abs = merged.iter().map(|t| t.1.abs()).fold(0.0, f64::max);
            let nonneg = merged.iter().all(|t| t.1 > 0.0);
            rows.push(Row { terms: merged, rhs, max_abs, nonneg });
        };
        for c in p.constraints() {
            let neg: Vec<(usize, f64)> = c.terms.iter().map(|&(v, a)| (v, -a)).collect();
            match c.cmp {
                Comparator::Le => push(c.terms.clone(), c.rhs),
                Comparator::Ge => push(neg, -c.rhs),
                Comparator::Eq => {
                    push(c.terms.clone(), c.rhs);
                    push(neg, -c.rhs);
                }
            }
        }
        let mut cols = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for &(v, a) in &row.terms {
                cols[v].push((r, a));
            }
        }

        // clique rows: unit coefficients, 1 <= rhs < 2
        let is_clique = |row: &Row| row.nonneg && row.rhs >= 1.0 - EPS && row.rhs < 2.0 - EPS && row.terms.iter().all(|t| (t.1 - 1.0).abs() < EPS);
        let mut group_of = vec![None; n];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut clique_used = vec![false; rows.len()];
        for (r, row) in rows.iter().enumerate() {
            if !is_clique(row) {
                continue;
            }
            let members: Vec<usize> = row.terms.iter().map(|t| t.0).filter(|&v| group_of[v].is_none()).collect();
            if members.is_empty() {
                continue;
            }
            for &v in &members {
                group_of[v] = Some(groups.len());
            }
            clique_used[r] = true;
            groups.push(members);
        }
        let ungrouped = (0..n).filter(|&v| group_of[v].is_none()).collect();

        let pack_rows: Vec<usize> = (0..rows.len())
            .filter(|&r| rows[r].nonneg && rows[r].rhs > EPS && !rows[r].terms.is_empty() && !clique_used[r])
            .collect();
        let mut pack_load = vec![0.0; n];
        for &r in &pack_rows {
            for &(v, a) in &rows[r].terms {
                pack_load[v] += a / rows[r].rhs;
            }
        }
        let unpacked = (0..n).filter(|&v| pack_load[v] == 0.0).collect();

        Compiled { obj: p.objective().to_vec(), rows, cols, groups, pack_rows, pack_load, ungrouped, unpacked }
    }
}

#[derive(Debug, Clone, Copy)]
enum Next {
    One,
    Zero,
    Done,
}

struct Frame {
    var: usize,
    mark: usize,
    next: Next,
}

struct Search<'a> {
    c: &'a Compiled,
    /// -1 free, 0 or 1 fixed.
    value: Vec<i8>,
    min_activity: Vec<f64>,
    trail: Vec<usize>,
    fixed_obj: f64,
    queue: Vec<usize>,
    incumbent: Option<Incumbent>,
}

impl<'a> Search<'a> {
    fn new(c: &'a Compiled) -> Self {
        let min_activity = c.rows.iter().map(|r| r.terms.iter().map(|t| t.1.min(0.0)).sum()).collect();
        Search {
            c,
            value: vec![-1; c.obj.len()],
            min_activity,
            trail: Vec::new(),
            fixed_obj: 0.0,
            queue: Vec::new(),
            incumbent: None,
        }
    }

    fn set(&mut self, v: usize, val: bool) {
        self.value[v] = val as i8;
        self.trail.push(v);
        if val {
            self.fixed_obj += self.c.obj[v];
        }
        for &(r, a) in &self.c.cols[v] {
            if (a > 0.0 && val) || (a < 0.0 && !val) {
                self.min_activity[r] += a.abs();
            }
            self.queue.push(r);
        }
    }

    /// Fixes `v` and propagates. Returns false on conflict; the caller undoes.
    fn assign(&mut self, v: usize, val: bool) -> bool {
        self.set(v, val);
        self.propagate()
    }

    fn propagate_all(&mut self) -> bool {
        self.queue.extend(0..self.c.rows.len());
        self.propagate()
    }

    fn propagate(&mut self) -> bool {
        let c = self.c;
        while let Some(r) = self.queue.pop() {
            let row = &c.rows[r];
            let slack = row.rhs - self.min_activity[r];
            if slack < -EPS {
                self.queue.clear();
                return false;
            }
            if slack + EPS >= row.max_abs {
                continue;
            }
            for &(u, a) in &row.terms {
                if self.value[u] != -1 {
                    continue;
                }
                let slack = row.rhs - self.min_activity[r];
                if a > 0.0 && a > slack + EPS {
                    self.set(u, false);
                } else if a < 0.0 && -a > slack + EPS {
                    self.set(u, true);
                    if row.rhs - self.min_activity[r] < -EPS {
                        self.queue.clear();
                        return false;
                    }
                }
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            let val = self.value[v] == 1;
            if val {
                self.fixed_obj -= self.c.obj[v];
            }
            for &(r, a) in &self.c.cols[v] {
                if (a > 0.0 && val) || (a < 0.0 && !val) {
                    self.min_activity[r] -= a.abs();
                }
            }
            self.value[v] = -1;
        }
        self.queue.clear();
    }

    /// Upper bound on the objective reachable from the current node.
    fn bound(&self) -> f64 {
        let free_pos = |v: usize| if self.value[v] == -1 { self.c.obj[v].max(0.0) } else { 0.0 };

        // clique bound: one variable per clique row at most
        let mut clique = 0.0;
        for g in &self.c.groups {
            clique += g.iter().map(|&v| free_pos(v)).fold(0.0, f64::max);
        }
        clique += self.c.ungrouped.iter().map(|&v| free_pos(v)).sum::<f64>();

        // packing bound from a dual-feasible point of the LP relaxation
        if self.c.pack_rows.is_empty() {
            return self.fixed_obj + clique;
        }
        let mut packing = self.c.unpacked.iter().map(|&v| free_pos(v)).sum::<f64>();
        if packing >= clique {
            return self.fixed_obj + clique;
        }
        for &r in &self.c.pack_rows {
            let row = &self.c.rows[r];
            let residual = (row.rhs - self.min_activity[r]).max(0.0) / row.rhs;
            if residual == 0.0 {
                continue;
            }
            let best = row.terms.iter().map(|&(v, _)| free_pos(v) / self.c.pack_load[v]).fold(0.0, f64::max);
            packing += residual * best;
        }
        self.fixed_obj + clique.min(packing)
    }

    fn prunable(&self, bound: f64) -> bool {
        match &self.incumbent {
            None => false,
            Some(inc) if inc.from_search => bound <= inc.value + EPS,
            Some(inc) => bound < inc.value - EPS,
        }
    }

    fn record_leaf(&mut self) {
        let value = self.fixed_obj;
        let better = match &self.incumbent {
            None => true,
            Some(inc) if inc.from_search => value > inc.value + EPS,
            Some(inc) => value >= inc.value - EPS,
        };
        if better {
            self.incumbent = Some(Incumbent { value, assignment: self.value.iter().map(|&x| x == 1).collect(), from_search: true });
        }
    }

    fn next_free(&self, from: usize) -> Option<usize> {
        (from..self.value.len()).find(|&v| self.value[v] == -1)
    }

    fn try_next(&mut self, frame: &mut Frame) -> bool {
        loop {
            let val = match frame.next {
                Next::One => {
                    frame.next = Next::Zero;
                    true
                }
                Next::Zero => {
                    frame.next = Next::Done;
                    false
                }
                Next::Done => return false,
            };
            if self.assign(frame.var, val) {
                return true;
            }
            self.undo(frame.mark);
        }
    }

    fn run(&mut self, max_nodes: u64, deadline: Option<Instant>) -> Outcome {
        let mut stack: Vec<Frame> = Vec::new();
        let mut nodes = 0u64;
        let mut exhausted = false;
        let mut descend = true;
        loop {
            if descend {
                nodes += 1;
                if nodes > max_nodes || (nodes.is_multiple_of(1024) && deadline.is_some_and(|d| Instant::now() >= d)) {
                    exhausted = true;
                    break;
                }
                if self.prunable(self.bound()) {
                    descend = false;
                    continue;
                }
                let from = stack.last().map_or(0, |f| f.var + 1);
                match self.next_free(from) {
                    None => {
                        self.record_leaf();
                        descend = false;
                    }
                    Some(var) => {
                        let mut frame = Frame { var, mark: self.trail.len(), next: Next::One };
                        descend = self.try_next(&mut frame);
                        stack.push(frame);
                    }
                }
            } else {
                let Some(mut frame) = stack.pop() else { break };
                self.undo(frame.mark);
                if self.try_next(&mut frame) {
                    stack.push(frame);
                    descend = true;
                }
            }
        }
        Outcome { incumbent: self.incumbent.take(), nodes, exhausted }
    }

    /// Greedy dive on objective coefficients, used only as a starting
    /// incumbent. Leaves the search state as it found it.
    fn greedy_dive(&mut self) -> Option<(f64, Vec<bool>)> {
        let mark = self.trail.len();
        let mut order: Vec<usize> = (0..self.value.len()).filter(|&v| self.c.obj[v] > 0.0).collect();
        order.sort_by(|&a, &b| self.c.obj[b].total_cmp(&self.c.obj[a]).then(a.cmp(&b)));
        let mut ok = true;
        for v in order.into_iter().chain(0..self.value.len()) {
            if self.value[v] != -1 {
                continue;
            }
            let prefer = self.c.obj[v] > 0.0;
            let m = self.trail.len();
            if self.assign(v, prefer) {
                continue;
            }
            self.undo(m);
            if !self.assign(v, !prefer) {
                ok = false;
                break;
            }
        }
        let result = ok.then(|| (self.fixed_obj, self.value.iter().map(|&x| x == 1).collect()));
        self.undo(mark);
        result
    }

    /// Fixings that define the first `depth` branching levels, in DFS order.
    fn prefixes(&mut self, depth: u32) -> Vec<Vec<(usize, bool)>> {
        let mut out = Vec::new();
        self.collect_prefixes(depth, 0, &mut Vec::new(), &mut out);
        if out.is_empty() {
            out.push(Vec::new());
        }
        out
    }

    fn collect_prefixes(&mut self, depth: u32, from: usize, path: &mut Vec<(usize, bool)>, out: &mut Vec<Vec<(usize, bool)>>) {
        let Some(var) = (depth > 0).then(|| self.next_free(from)).flatten() else {
            out.push(path.clone());
            return;
        };
        for val in [true, false] {
            let mark = self.trail.len();
            if self.assign(var, val) {
                path.push((var, val));
                self.collect_prefixes(depth - 1, var + 1, path, out);
                path.pop();
            }
            self.undo(mark);
        }
    }
}
