use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{BitString, Seed};
use crate::error::{Error, Result};

/// Self-inverse reversible gates. Controls come first, the target last.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    Not(usize),
    Cnot(usize, usize),
    Toffoli(usize, usize, usize),
}

impl Gate {
    fn operands(&self) -> Vec<usize> {
        match *self {
            Gate::Not(t) => vec![t],
            Gate::Cnot(c, t) => vec![c, t],
            Gate::Toffoli(a, b, t) => vec![a, b, t],
        }
    }

    pub fn validate(&self, width: usize) -> Result<()> {
        let ops = self.operands();
        if let Some(&index) = ops.iter().find(|&&i| i >= width) {
            return Err(Error::GateIndexOutOfRange { index, width });
        }
        for (k, i) in ops.iter().enumerate() {
            if ops[k + 1..].contains(i) {
                return Err(Error::InvalidArgument(format!("{self} repeats bit {i}")));
            }
        }
        Ok(())
    }

    /// Shifts every operand by `offset`.
    pub fn shifted(&self, offset: usize) -> Gate {
        match *self {
            Gate::Not(t) => Gate::Not(t + offset),
            Gate::Cnot(c, t) => Gate::Cnot(c + offset, t + offset),
            Gate::Toffoli(a, b, t) => Gate::Toffoli(a + offset, b + offset, t + offset),
        }
    }

    #[inline]
    pub fn apply(&self, tape: &mut BitString) {
        match *self {
            Gate::Not(t) => tape.flip(t),
            Gate::Cnot(c, t) => {
                if tape.get(c) {
                    tape.flip(t)
                }
            }
            Gate::Toffoli(a, b, t) => {
                if tape.get(a) && tape.get(b) {
                    tape.flip(t)
                }
            }
        }
    }

    /// The same gate on a tape of at most 64 bits held in a word.
    #[inline]
    pub fn apply_word(&self, w: u64) -> u64 {
        match *self {
            Gate::Not(t) => w ^ (1 << t),
            Gate::Cnot(c, t) => w ^ (((w >> c) & 1) << t),
            Gate::Toffoli(a, b, t) => w ^ (((w >> a) & (w >> b) & 1) << t),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Not(t) => write!(f, "NOT({t})"),
            Gate::Cnot(c, t) => write!(f, "CNOT({c},{t})"),
            Gate::Toffoli(a, b, t) => write!(f, "TOFFOLI({a},{b},{t})"),
        }
    }
}

/// Tape machine executing one gate per step.
#[derive(Clone, Debug)]
pub struct ReversibleMachine {
    tape: BitString,
    program: Vec<Gate>,
    pc: usize,
    /// Program positions applied so far, in order.
    history: Vec<usize>,
}

impl ReversibleMachine {
    pub fn new(tape: BitString, program: Vec<Gate>) -> Result<Self> {
        for g in &program {
            g.validate(tape.len())?;
        }
        Ok(ReversibleMachine { tape, program, pc: 0, history: Vec::new() })
    }

    pub fn tape(&self) -> &BitString {
        &self.tape
    }

    pub fn program(&self) -> &[Gate] {
        &self.program
    }

    pub fn pc(&self) -> usize {
        self.pc
    }

    pub fn history(&self) -> &[usize] {
        &self.history
    }

    pub fn is_halted(&self) -> bool {
        self.pc == self.program.len()
    }

    /// Applies the next gate; false once the program has finished.
    pub fn step(&mut self) -> bool {
        let Some(g) = self.program.get(self.pc) else {
            return false;
        };
        g.apply(&mut self.tape);
        self.history.push(self.pc);
        self.pc += 1;
        true
    }

    /// Undoes the most recent gate; false when nothing is left to undo.
    pub fn step_back(&mut self) -> bool {
        let Some(at) = self.history.pop() else {
            return false;
        };
        self.program[at].apply(&mut self.tape);
        self.pc = at;
        true
    }

    /// Runs to the end, recording the tape before the first and after every step.
    pub fn run(&mut self) -> Trace {
        let mut trace = Trace { snapshots: vec![(self.history.len(), self.tape.clone())] };
        while self.step() {
            trace.snapshots.push((self.history.len(), self.tape.clone()));
        }
        trace
    }

    /// Runs to the end without recording.
    pub fn run_silent(&mut self) {
        while self.step() {}
    }

    /// Undoes every applied gate and returns the restored tape.
    pub fn invert(&mut self) -> BitString {
        while self.step_back() {}
        self.tape.clone()
    }
}

/// Program applied to a tape of at most 64 bits held in a word.
pub fn run_word(program: &[Gate], w: u64) -> u64 {
    program.iter().fold(w, |w, g| g.apply_word(w))
}

/// Inverse of [`run_word`]: the gates in reverse order.
pub fn invert_word(program: &[Gate], w: u64) -> u64 {
    program.iter().rev().fold(w, |w, g| g.apply_word(w))
}

/// Uniformly chosen gate kinds and distinct operands.
pub fn random_program(width: usize, len: usize, seed: &Seed) -> Vec<Gate> {
    assert!(width >= 3, "random programs need at least three tape bits");
    let mut rng = seed.rng();
    let mut distinct = |k: usize| {
        let mut picks: Vec<usize> = Vec::with_capacity(k);
        while picks.len() < k {
            let i = rng.random_range(0..width);
            if !picks.contains(&i) {
                picks.push(i);
            }
        }
        picks
    };
    (0..len)
        .map(|i| match i % 3 {
            0 => {
                let p = distinct(1);
                Gate::Not(p[0])
            }
            1 => {
                let p = distinct(2);
                Gate::Cnot(p[0], p[1])
            }
            _ => {
                let p = distinct(3);
                Gate::Toffoli(p[0], p[1], p[2])
            }
        })
        .collect()
}

/// Tape snapshots with the number of steps taken when each was recorded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub snapshots: Vec<(usize, BitString)>,
}

impl Trace {
    /// One line per snapshot: the step index, a tab, then the tape in ascii01.
    pub fn write(&self, mut out: impl Write) -> Result<()> {
        for (step, tape) in &self.snapshots {
            writeln!(out, "{step}\t{tape}")?;
        }
        Ok(())
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(f)
    }

    pub fn read(input: impl BufRead) -> Result<Self> {
        let mut snapshots = Vec::new();
        for line in input.lines() {
            let line = line?;
            let (step, bits) =
                line.split_once('\t').ok_or_else(|| Error::MalformedFile(format!("trace line without tab: {line:?}")))?;
            let step = step.parse().map_err(|_| Error::MalformedFile(format!("bad step index {step:?}")))?;
            snapshots.push((step, BitString::parse(bits)?));
        }
        Ok(Trace { snapshots })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn not_twice_is_identity() {
        let tape = BitString::parse("0110").unwrap();
        let mut m = ReversibleMachine::new(tape.clone(), vec![Gate::Not(0), Gate::Not(0)]).unwrap();
        m.run_silent();
        assert_eq!(m.tape(), &tape);
    }

    #[test]
    fn toffoli_truth_table() {
        let mut m = ReversibleMachine::new(BitString::parse("1100").unwrap(), vec![Gate::Toffoli(0, 1, 2)]).unwrap();
        m.run_silent();
        assert_eq!(m.tape().to_ascii(), "1110");
        for w in 0..8u64 {
            let out = Gate::Toffoli(0, 1, 2).apply_word(w);
            assert_eq!(out, if w & 3 == 3 { w ^ 4 } else { w });
        }
    }

    #[test]
    fn invalid_gates_rejected() {
        let t = BitString::zeros(4);
        assert!(matches!(
            ReversibleMachine::new(t.clone(), vec![Gate::Cnot(0, 4)]),
            Err(Error::GateIndexOutOfRange { index: 4, width: 4 })
        ));
        assert!(ReversibleMachine::new(t, vec![Gate::Cnot(1, 1)]).is_err());
    }

    #[test]
    fn word_and_tape_semantics_agree() {
        let prog = random_program(20, 300, &Seed::from_u64(1));
        let w = 0xA5A5Fu64;
        let mut m = ReversibleMachine::new(BitString::from_fn(20, |i| (w >> i) & 1 == 1), prog.clone()).unwrap();
        m.run_silent();
        assert_eq!(m.tape().words()[0], run_word(&prog, w));
        assert_eq!(invert_word(&prog, run_word(&prog, w)), w);
    }

    #[test]
    fn trace_file_round_trip() {
        let mut m = ReversibleMachine::new(BitString::parse("101").unwrap(), vec![Gate::Cnot(0, 1), Gate::Not(2)]).unwrap();
        let trace = m.run();
        assert_eq!(trace.snapshots.len(), 3);
        let mut buf = Vec::new();
        trace.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "0\t101\n1\t111\n2\t110\n");
        assert_eq!(Trace::read(&buf[..]).unwrap(), trace);
    }
}
