//! Seeded random corpora of loop files.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use monoterm_core::multipath::{case_row, MultiPathLoop};
use monoterm_core::{Bound, Env, Gap, IntVal, LoopProgram, RelOp, Shape, Update, VarName};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::print::print;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenShape {
    Single,
    Diagonal,
    Multipath,
    Mix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    pub count: usize,
    pub shape: GenShape,
    /// Largest magnitude of constants, bounds and initial values.
    pub bound: i64,
    /// Start with one multipath loop per table row.
    pub cover_rows: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub name: String,
    pub text: String,
    pub program: LoopProgram,
}

/// Largest additive step; keeps switch-point searches within budget when
/// `bound` is large.
const MAX_STEP: i64 = 1000;

/// Attempts per loop before accepting one whose guard fails initially.
const GUARD_TRIES: usize = 8;

/// Random loops over one seeded stream.
pub struct Sampler {
    rng: ChaCha8Rng,
    bound: i64,
}

impl Sampler {
    pub fn new(seed: u64, bound: i64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), bound: bound.max(1) }
    }

    fn constant(&mut self) -> i64 {
        self.rng.gen_range(-self.bound..=self.bound)
    }

    fn step(&mut self) -> i64 {
        let m = self.rng.gen_range(1..=self.bound.clamp(1, MAX_STEP));
        if self.rng.gen() {
            m
        } else {
            -m
        }
    }

    fn op(&mut self) -> RelOp {
        RelOp::ALL[self.rng.gen_range(0..4)]
    }

    /// Constant, additive, geometric or affine, evenly.
    fn update(&mut self) -> Update {
        match self.rng.gen_range(0..4) {
            0 => Update::constant(self.constant()),
            1 => Update::additive(self.step()),
            2 => Update::new(self.rng.gen_range(2..=3), 0),
            _ => Update::new(self.rng.gen_range(2..=3), self.step()),
        }
    }

    fn env(&self, pairs: &[(&str, i64)]) -> Env {
        pairs.iter().map(|(k, v)| (VarName::from(*k), IntVal::from(*v))).collect()
    }

    pub fn single(&mut self) -> LoopProgram {
        let guard = Bound::new("x", self.op(), self.constant());
        let update = self.update();
        let mut x0 = self.constant();
        for _ in 0..GUARD_TRIES {
            if guard.holds_at(&IntVal::from(x0)) {
                break;
            }
            x0 = self.constant();
        }
        LoopProgram::new(self.env(&[("x", x0)]), Shape::SinglePath { guard, update }).expect("bound variable")
    }

    pub fn diagonal(&mut self) -> LoopProgram {
        let guard = Gap::new("x", "y", self.op(), self.constant());
        let (lhs_update, rhs_update) = (self.update(), self.update());
        let (mut x0, mut y0) = (self.constant(), self.constant());
        for _ in 0..GUARD_TRIES {
            if guard.holds_at(&IntVal::from(x0), &IntVal::from(y0)) {
                break;
            }
            (x0, y0) = (self.constant(), self.constant());
        }
        LoopProgram::new(self.env(&[("x", x0), ("y", y0)]), Shape::Diagonal { guard, lhs_update, rhs_update })
            .expect("bound variables")
    }

    fn multipath_raw(&mut self) -> MultiPathLoop {
        let guard = Bound::new("x", self.op(), self.constant());
        let cond = Bound::new("x", self.op(), self.constant());
        let (then_update, else_update) = (self.update(), self.update());
        let mut x0 = self.constant();
        for _ in 0..GUARD_TRIES {
            if guard.holds_at(&IntVal::from(x0)) {
                break;
            }
            x0 = self.constant();
        }
        MultiPathLoop { guard, cond, then_update, else_update, x0: IntVal::from(x0) }
    }

    /// A two-branch loop whose branches classify on their regions, or the
    /// last candidate if none does within a few tries.
    pub fn multipath(&mut self) -> LoopProgram {
        program_of(self.classified_multipath())
    }

    /// A two-branch loop falling in table row `row`, with the guard true
    /// initially. `row` must be in `1..=36`.
    pub fn multipath_row(&mut self, row: u8) -> LoopProgram {
        program_of(self.multipath_in_row(row))
    }

    fn classified_multipath(&mut self) -> MultiPathLoop {
        let mut m = self.multipath_raw();
        for _ in 0..100 {
            if matches!(case_row(&m), Ok(Some(_))) {
                break;
            }
            m = self.multipath_raw();
        }
        m
    }

    fn multipath_in_row(&mut self, row: u8) -> MultiPathLoop {
        loop {
            let m = self.multipath_raw();
            if m.guard.holds_at(&m.x0) && matches!(case_row(&m), Ok(Some(r)) if r == row) {
                return m;
            }
        }
    }
}

fn program_of(m: MultiPathLoop) -> LoopProgram {
    let init = [(m.guard.var.clone(), m.x0)].into_iter().collect();
    let shape = Shape::MultiPath {
        guard: m.guard,
        cond: m.cond,
        then_update: m.then_update,
        else_update: m.else_update,
    };
    LoopProgram::new(init, shape).expect("bound variable")
}

fn shape_name(p: &LoopProgram) -> &'static str {
    match p.shape {
        Shape::SinglePath { .. } => "single",
        Shape::Diagonal { .. } => "diagonal",
        Shape::MultiPath { .. } => "multipath",
    }
}

/// Generates `cfg.count` loops; the same config always yields the same loops.
pub fn generate(cfg: &GenConfig) -> Vec<Generated> {
    let mut s = Sampler::new(cfg.seed, cfg.bound);
    (0..cfg.count)
        .map(|i| {
            let target = (cfg.cover_rows && i < 36).then(|| i as u8 + 1);
            let program = match (target, cfg.shape) {
                (Some(row), _) => s.multipath_row(row),
                (None, GenShape::Single) => s.single(),
                (None, GenShape::Diagonal) => s.diagonal(),
                (None, GenShape::Multipath) => s.multipath(),
                (None, GenShape::Mix) => match s.rng.gen_range(0..3) {
                    0 => s.single(),
                    1 => s.diagonal(),
                    _ => s.multipath(),
                },
            };
            let mut header =
                format!("# generated: seed={} index={} shape={}", cfg.seed, i, shape_name(&program));
            if let Some(row) = target {
                header.push_str(&format!(" row={row}"));
            }
            let text = format!("{header}\n{}", print(&program));
            Generated { name: format!("loop_{i:04}.loop"), text, program }
        })
        .collect()
}

/// Writes the corpus into `dir`, creating it if needed.
pub fn write_corpus(cfg: &GenConfig, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    generate(cfg)
        .into_iter()
        .map(|g| {
            let path = dir.join(&g.name);
            fs::write(&path, g.text)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn cfg(shape: GenShape, count: usize) -> GenConfig {
        GenConfig { seed: 7, count, shape, bound: 20, cover_rows: false }
    }

    #[test]
    fn same_seed_same_corpus() {
        assert_eq!(generate(&cfg(GenShape::Mix, 10)), generate(&cfg(GenShape::Mix, 10)));
        let other = GenConfig { seed: 8, ..cfg(GenShape::Mix, 10) };
        assert_ne!(generate(&cfg(GenShape::Mix, 10)), generate(&other));
    }

    #[test]
    fn long_corpora() {
        assert_eq!(generate(&cfg(GenShape::Single, 300)).len(), 300);
        let c = GenConfig { cover_rows: true, ..cfg(GenShape::Mix, 300) };
        assert_eq!(generate(&c)[299].name, "loop_0299.loop");
    }

    #[test]
    fn files_parse_back() {
        for g in generate(&cfg(GenShape::Mix, 60)) {
            assert_eq!(parse(&g.text).unwrap(), g.program, "{}", g.text);
        }
    }

    #[test]
    fn cover_rows_hits_every_row() {
        let c = GenConfig { cover_rows: true, ..cfg(GenShape::Multipath, 36) };
        let rows: Vec<u8> = generate(&c)
            .iter()
            .map(|g| case_row(&MultiPathLoop::from_program(&g.program).unwrap().unwrap()).unwrap().unwrap())
            .collect();
        assert_eq!(rows, (1..=36).collect::<Vec<u8>>());
    }
}
