//! The tutor's knowledge matrix: selection probabilities over
//! (topic, difficulty level) cells.
//!
//! Rows are topics ordered by difficulty (`if` first, `reflection` last),
//! columns are the ten difficulty levels. The matrix is the tutor's belief
//! about which cell suits the student, not the student's actual knowledge.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_TOPICS: usize = 8;
pub const NUM_LEVELS: usize = 10;
pub const NUM_CELLS: usize = NUM_TOPICS * NUM_LEVELS;

pub const TOPIC_NAMES: [&str; NUM_TOPICS] = [
    "if",
    "for",
    "while",
    "methods",
    "classes",
    "exceptions",
    "gui",
    "reflection",
];

/// Allowed drift of the total mass for a matrix to count as normalized.
pub const MASS_TOLERANCE: f64 = 1e-6;

/// A task coordinate: topic row `0..8`, difficulty column `0..10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TaskCell {
    topic: u8,
    level: u8,
}

impl TaskCell {
    pub fn new(topic: usize, level: usize) -> Result<Self> {
        if topic >= NUM_TOPICS || level >= NUM_LEVELS {
            return Err(Error::CellOutOfBounds { topic, level });
        }
        Ok(Self {
            topic: topic as u8,
            level: level as u8,
        })
    }

    pub const ORIGIN: TaskCell = TaskCell { topic: 0, level: 0 };

    #[inline]
    pub fn topic(self) -> usize {
        self.topic as usize
    }

    /// Zero-based difficulty column.
    #[inline]
    pub fn level(self) -> usize {
        self.level as usize
    }

    /// Row-major position in the flattened grid.
    #[inline]
    pub fn index(self) -> usize {
        self.topic() * NUM_LEVELS + self.level()
    }

    #[inline]
    pub fn from_index(index: usize) -> Self {
        debug_assert!(index < NUM_CELLS);
        Self {
            topic: (index / NUM_LEVELS) as u8,
            level: (index % NUM_LEVELS) as u8,
        }
    }

    /// All 80 cells in row-major order.
    pub fn all() -> impl Iterator<Item = TaskCell> {
        (0..NUM_CELLS).map(TaskCell::from_index)
    }

    pub fn topic_name(self) -> &'static str {
        TOPIC_NAMES[self.topic()]
    }

    /// Skill required to solve this cell; see [`cell_skill`].
    #[inline]
    pub fn skill(self) -> f64 {
        cell_skill(self)
    }
}

impl fmt::Display for TaskCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.topic_name(), self.level() + 1)
    }
}

/// Expected skill needed to solve `cell`: `((level + 1) / 10) * (topic + 1)`.
///
/// Ranges from 0.1 at the origin to 8.0 at the hardest cell and grows
/// strictly along both axes.
#[inline]
pub fn cell_skill(cell: TaskCell) -> f64 {
    (cell.level() + 1) as f64 / NUM_LEVELS as f64 * (cell.topic() + 1) as f64
}

const fn cell_table(skill: bool) -> [f64; NUM_CELLS] {
    let mut table = [0.0; NUM_CELLS];
    let mut i = 0;
    while i < NUM_CELLS {
        let (topic, level) = (i / NUM_LEVELS, i % NUM_LEVELS);
        table[i] = if skill {
            (level + 1) as f64 / NUM_LEVELS as f64 * (topic + 1) as f64
        } else {
            (level + 1) as f64
        };
        i += 1;
    }
    table
}

/// [`cell_skill`] of every cell, row-major.
static SKILL_TABLE: [f64; NUM_CELLS] = cell_table(true);
/// One-based level of every cell, row-major.
static LEVEL_TABLE: [f64; NUM_CELLS] = cell_table(false);

#[derive(Clone, PartialEq)]
pub struct KnowledgeMatrix {
    cells: [f64; NUM_CELLS],
}

impl Default for KnowledgeMatrix {
    fn default() -> Self {
        Self::new()
    }
}

impl KnowledgeMatrix {
    /// Fresh matrix with all mass on the easiest cell.
    pub fn new() -> Self {
        let mut cells = [0.0; NUM_CELLS];
        cells[TaskCell::ORIGIN.index()] = 1.0;
        Self { cells }
    }

    /// Builds a matrix from topic rows, checking bounds and normalization.
    pub fn from_rows(rows: [[f64; NUM_LEVELS]; NUM_TOPICS]) -> Result<Self> {
        let m = Self::from_rows_unchecked(rows);
        if m.cells.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid(
                "cell probability",
                format!("{:?}", m.cells.iter().find(|p| !(0.0..=1.0).contains(*p))),
                "must lie in [0, 1]",
            ));
        }
        m.check_mass()?;
        Ok(m)
    }

    /// Builds a matrix without validation. Intended for fixtures.
    pub fn from_rows_unchecked(rows: [[f64; NUM_LEVELS]; NUM_TOPICS]) -> Self {
        let mut cells = [0.0; NUM_CELLS];
        for (topic, row) in rows.iter().enumerate() {
            cells[topic * NUM_LEVELS..(topic + 1) * NUM_LEVELS].copy_from_slice(row);
        }
        Self { cells }
    }

    /// Builds a normalized matrix from `(cell, mass)` pairs; unspecified cells are zero.
    pub fn from_masses(masses: &[(TaskCell, f64)]) -> Result<Self> {
        let mut rows = [[0.0; NUM_LEVELS]; NUM_TOPICS];
        for &(cell, p) in masses {
            rows[cell.topic()][cell.level()] += p;
        }
        Self::from_rows(rows)
    }

    #[inline]
    pub fn get(&self, cell: TaskCell) -> f64 {
        self.cells[cell.index()]
    }

    #[inline]
    pub(crate) fn set(&mut self, cell: TaskCell, p: f64) {
        self.cells[cell.index()] = p;
    }

    /// Flattened row-major cell values.
    pub fn as_slice(&self) -> &[f64; NUM_CELLS] {
        &self.cells
    }

    pub fn rows(&self) -> [[f64; NUM_LEVELS]; NUM_TOPICS] {
        let mut rows = [[0.0; NUM_LEVELS]; NUM_TOPICS];
        for (topic, row) in rows.iter_mut().enumerate() {
            row.copy_from_slice(&self.cells[topic * NUM_LEVELS..(topic + 1) * NUM_LEVELS]);
        }
        rows
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().sum()
    }

    fn check_mass(&self) -> Result<f64> {
        let total = self.total_mass();
        if (total - 1.0).abs() > MASS_TOLERANCE || !total.is_finite() {
            return Err(Error::DegenerateMass { total });
        }
        Ok(total)
    }

    /// Probability-weighted mean of [`cell_skill`] over the grid.
    pub fn user_skill(&self) -> Result<f64> {
        self.check_mass()?;
        Ok(self.weighted_sum(&SKILL_TABLE))
    }

    /// Probability-weighted mean difficulty column on the 1..=10 scale.
    pub fn expected_level(&self) -> Result<f64> {
        self.check_mass()?;
        Ok(self.weighted_sum(&LEVEL_TABLE))
    }

    #[inline]
    fn weighted_sum(&self, values: &[f64; NUM_CELLS]) -> f64 {
        self.cells.iter().zip(values).map(|(p, v)| p * v).sum()
    }

    /// Cell holding the most mass; ties go to the earliest cell in row-major order.
    pub fn mode(&self) -> TaskCell {
        let mut best = 0;
        for (i, &p) in self.cells.iter().enumerate() {
            if p > self.cells[best] {
                best = i;
            }
        }
        TaskCell::from_index(best)
    }
}

impl fmt::Debug for KnowledgeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "KnowledgeMatrix [")?;
        for (topic, row) in self.rows().iter().enumerate() {
            write!(f, "  {:>10}:", TOPIC_NAMES[topic])?;
            for p in row {
                write!(f, " {p:.4}")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
