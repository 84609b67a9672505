use crate::solution::{Fitness, Scoring};
use std::cmp::Ordering;

/// Directed route edges with the iteration until which they are tabu.
#[derive(Debug, Clone)]
pub struct TabuList {
    size: usize,
    expiry: Vec<u64>,
    tenure: u64,
}

impl TabuList {
    pub fn new(vertices: usize, tenure: u64) -> Self {
        Self { size: vertices, expiry: vec![0; vertices * vertices], tenure }
    }

    pub fn tenure(&self) -> u64 {
        self.tenure
    }

    /// Whether edge `(from, to)` is tabu at `iteration`.
    #[inline]
    pub fn is_tabu(&self, from: usize, to: usize, iteration: u64) -> bool {
        iteration < self.expiry[from * self.size + to]
    }

    /// Protects `(from, to)` for `tenure` iterations after `iteration`.
    pub fn protect(&mut self, from: usize, to: usize, iteration: u64) {
        self.expiry[from * self.size + to] = iteration + self.tenure;
    }

    pub fn clear(&mut self) {
        self.expiry.iter_mut().for_each(|e| *e = 0);
    }
}

/// Fitness of the local optimum reached in each outer iteration.
#[derive(Debug, Clone, Default)]
pub struct SolutionLog {
    entries: Vec<Fitness>,
}

impl SolutionLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of logged entries equal to `f` within the fitness tolerance.
    pub fn repeats(&self, f: &Fitness, scoring: &Scoring) -> usize {
        self.entries.iter().filter(|e| scoring.compare(e, f) == Ordering::Equal).count()
    }

    pub fn push(&mut self, f: Fitness) {
        self.entries.push(f);
    }

    pub fn entries(&self) -> &[Fitness] {
        &self.entries
    }
}
