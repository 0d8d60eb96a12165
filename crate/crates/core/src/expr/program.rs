//! Flat evaluation tape compiled from expression DAGs.
//!
//! Grid sweeps evaluate the same expressions at hundreds of points; walking
//! the `Arc` graph with a hash map each time is the dominant cost. Compiling
//! once into a topologically ordered slot tape makes per-point evaluation a
//! linear scan with array indexing.

use std::collections::HashMap;
use std::sync::Arc;

use super::{excerpt, is_int, BinaryOp, EvalError, Expr, Node, Params, Point, UnaryOp};

#[derive(Debug, Clone, Copy)]
enum Instr {
    Const(f64),
    Coord(u8),
    Param(u32),
    Unary(UnaryOp, u32),
    Binary(BinaryOp, u32, u32),
}

/// Compiled batch of expressions sharing one tape.
pub struct Program {
    tape: Vec<Instr>,
    /// Node handle per slot, for domain-error reporting.
    nodes: Vec<Expr>,
    param_names: Vec<Arc<str>>,
    outputs: Vec<u32>,
}

impl Program {
    /// Compiles the expressions, deduplicating shared subtrees (by pointer,
    /// then by structural hash).
    pub fn compile(exprs: &[Expr]) -> Program {
        let mut slots: HashMap<usize, u32> = HashMap::new();
        let mut by_hash: HashMap<u64, Vec<u32>> = HashMap::new();
        let mut prog = Program {
            tape: Vec::new(),
            nodes: Vec::new(),
            param_names: Vec::new(),
            outputs: Vec::new(),
        };
        let mut param_slots: HashMap<Arc<str>, u32> = HashMap::new();
        for e in exprs {
            let slot = prog.emit(e, &mut slots, &mut by_hash, &mut param_slots);
            prog.outputs.push(slot);
        }
        prog
    }

    fn emit(
        &mut self,
        root: &Expr,
        slots: &mut HashMap<usize, u32>,
        by_hash: &mut HashMap<u64, Vec<u32>>,
        param_slots: &mut HashMap<Arc<str>, u32>,
    ) -> u32 {
        // Iterative post-order; expression trees can be deep.
        enum Task<'a> {
            Visit(&'a Expr),
            Emit(&'a Expr),
        }
        let mut stack = vec![Task::Visit(root)];
        while let Some(task) = stack.pop() {
            match task {
                Task::Visit(e) => {
                    if slots.contains_key(&(Arc::as_ptr(&e.0) as usize)) {
                        continue;
                    }
                    stack.push(Task::Emit(e));
                    match &e.0.node {
                        Node::Unary(_, a) => stack.push(Task::Visit(a)),
                        Node::Binary(_, a, b) => {
                            stack.push(Task::Visit(a));
                            stack.push(Task::Visit(b));
                        }
                        _ => {}
                    }
                }
                Task::Emit(e) => {
                    let ptr = Arc::as_ptr(&e.0) as usize;
                    if slots.contains_key(&ptr) {
                        continue;
                    }
                    // Structural dedup across threads of origin.
                    if let Some(cands) = by_hash.get(&e.0.hash) {
                        if let Some(&s) = cands.iter().find(|&&s| self.nodes[s as usize] == *e) {
                            slots.insert(ptr, s);
                            continue;
                        }
                    }
                    let instr = match &e.0.node {
                        Node::Const(c) => Instr::Const(*c),
                        Node::Coord(i) => Instr::Coord(*i),
                        Node::Param(name) => {
                            let next = param_slots.len() as u32;
                            let idx = *param_slots.entry(name.clone()).or_insert(next);
                            if idx == next {
                                self.param_names.push(name.clone());
                            }
                            Instr::Param(idx)
                        }
                        Node::Unary(op, a) => {
                            Instr::Unary(*op, slots[&(Arc::as_ptr(&a.0) as usize)])
                        }
                        Node::Binary(op, a, b) => Instr::Binary(
                            *op,
                            slots[&(Arc::as_ptr(&a.0) as usize)],
                            slots[&(Arc::as_ptr(&b.0) as usize)],
                        ),
                    };
                    let slot = self.tape.len() as u32;
                    self.tape.push(instr);
                    self.nodes.push(e.clone());
                    slots.insert(ptr, slot);
                    by_hash.entry(e.0.hash).or_default().push(slot);
                }
            }
        }
        slots[&(Arc::as_ptr(&root.0) as usize)]
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn n_slots(&self) -> usize {
        self.tape.len()
    }

    /// Evaluates all outputs at one point.
    pub fn eval(&self, point: Point, params: &Params) -> Result<Vec<f64>, EvalError> {
        let mut out = vec![0.0; self.outputs.len()];
        self.eval_into(point, params, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(
        &self,
        point: Point,
        params: &Params,
        out: &mut [f64],
    ) -> Result<(), EvalError> {
        let mut values = vec![0.0f64; self.tape.len()];
        self.eval_slots(point, params, &mut values)?;
        for (o, &slot) in out.iter_mut().zip(&self.outputs) {
            *o = values[slot as usize];
        }
        Ok(())
    }

    fn eval_slots(&self, point: Point, params: &Params, values: &mut [f64]) -> Result<(), EvalError> {
        let mut bound = Vec::with_capacity(self.param_names.len());
        for name in &self.param_names {
            match params.get(name) {
                Some(v) => bound.push(*v),
                None => return Err(EvalError::UnboundParameter(name.to_string())),
            }
        }
        for (i, instr) in self.tape.iter().enumerate() {
            let v = match *instr {
                Instr::Const(c) => c,
                Instr::Coord(k) => point[k as usize],
                Instr::Param(k) => bound[k as usize],
                Instr::Unary(op, a) => {
                    let x = values[a as usize];
                    match op {
                        UnaryOp::Log if x <= 0.0 => {
                            return Err(EvalError::LogNonPositive(excerpt(&self.nodes[i]), x))
                        }
                        UnaryOp::Sqrt if x < 0.0 => {
                            return Err(EvalError::SqrtNegative(excerpt(&self.nodes[i]), x))
                        }
                        _ => op.apply(x),
                    }
                }
                Instr::Binary(op, a, b) => {
                    let x = values[a as usize];
                    let y = values[b as usize];
                    match op {
                        BinaryOp::Add => x + y,
                        BinaryOp::Sub => x - y,
                        BinaryOp::Mul => x * y,
                        BinaryOp::Div => {
                            if y == 0.0 {
                                return Err(EvalError::DivisionByZero(excerpt(&self.nodes[i])));
                            }
                            x / y
                        }
                        BinaryOp::Pow => {
                            if is_int(y) {
                                if x == 0.0 && y < 0.0 {
                                    return Err(EvalError::DivisionByZero(excerpt(
                                        &self.nodes[i],
                                    )));
                                }
                                x.powi(y as i32)
                            } else {
                                if x < 0.0 {
                                    return Err(EvalError::PowNegativeBase(
                                        excerpt(&self.nodes[i]),
                                        x,
                                    ));
                                }
                                x.powf(y)
                            }
                        }
                    }
                }
            };
            if !v.is_finite() {
                return Err(EvalError::NonFinite(excerpt(&self.nodes[i])));
            }
            values[i] = v;
        }
        Ok(())
    }
}
