//! Closed-form scalar expressions on a three-coordinate chart.
//!
//! Expressions are immutable DAG nodes (`Arc`-shared, hash-consed per thread)
//! over the chart coordinates, named real parameters, and a fixed function
//! set. They are closed under exact symbolic differentiation, which is what
//! lets curvature residuals distinguish a true zero from truncation error.
//!
//! Construction folds constants and the trivial identities (`x+0`, `x*0`,
//! `x*1`, `x^1`, `x^0`, double negation, `x-x`). Nothing beyond that: no
//! canonical forms, no trig rewriting. Evaluation is pure and reports domain
//! errors (log/sqrt of a negative, division by zero, unbound parameter) with
//! the offending subtree.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

mod complex;
mod parse;
mod print;
mod program;

pub use complex::ComplexField;
pub use parse::{parse_expression, ParseError, ParseErrorKind};
pub use program::Program;

/// Parameter bindings used at evaluation time.
pub type Params = BTreeMap<Arc<str>, f64>;

/// A point of the chart.
pub type Point = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Tanh => "tanh",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            UnaryOp::Neg => -x,
            UnaryOp::Sin => x.sin(),
            UnaryOp::Cos => x.cos(),
            UnaryOp::Tan => x.tan(),
            UnaryOp::Exp => x.exp(),
            UnaryOp::Log => x.ln(),
            UnaryOp::Sqrt => x.sqrt(),
            UnaryOp::Sinh => x.sinh(),
            UnaryOp::Cosh => x.cosh(),
            UnaryOp::Tanh => x.tanh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Expression node. Children are shared `Expr` handles.
#[derive(Debug)]
pub enum Node {
    Const(f64),
    /// Chart coordinate by index (0, 1, 2).
    Coord(u8),
    /// Named parameter, resolved against the binding table at evaluation.
    Param(Arc<str>),
    Unary(UnaryOp, Expr),
    Binary(BinaryOp, Expr, Expr),
}

#[derive(Debug)]
pub struct Inner {
    hash: u64,
    node: Node,
}

/// Immutable shared expression handle.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::to_string(self))
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        match (&self.0.node, &other.0.node) {
            (Node::Const(a), Node::Const(b)) => a.to_bits() == b.to_bits(),
            (Node::Coord(a), Node::Coord(b)) => a == b,
            (Node::Param(a), Node::Param(b)) => a == b,
            (Node::Unary(oa, a), Node::Unary(ob, b)) => oa == ob && a == b,
            (Node::Binary(oa, a1, a2), Node::Binary(ob, b1, b2)) => {
                oa == ob && a1 == b1 && a2 == b2
            }
            _ => false,
        }
    }
}

impl Eq for Expr {}

fn mix(seed: u64, v: u64) -> u64 {
    // FNV-style mixing; stable across runs for deterministic reports.
    let mut h = seed ^ v.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    h ^= h >> 29;
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^= h >> 32;
    h
}

fn node_hash(node: &Node) -> u64 {
    match node {
        Node::Const(c) => mix(1, c.to_bits()),
        Node::Coord(i) => mix(2, *i as u64),
        Node::Param(name) => {
            let mut h = 3u64;
            for b in name.as_bytes() {
                h = mix(h, *b as u64);
            }
            h
        }
        Node::Unary(op, a) => mix(mix(4, *op as u64), a.0.hash),
        Node::Binary(op, a, b) => mix(mix(mix(5, *op as u64), a.0.hash), b.0.hash),
    }
}

/// Interner key; child identity is by pointer, valid because interned
/// expressions are kept alive by the table itself.
#[derive(PartialEq, Eq, Hash)]
enum Key {
    Const(u64),
    Coord(u8),
    Param(Arc<str>),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
}

thread_local! {
    static INTERNER: RefCell<HashMap<Key, Expr>> = RefCell::new(HashMap::new());
    static DIFF_CACHE: RefCell<HashMap<(usize, u8), (Expr, Expr)>> = RefCell::new(HashMap::new());
}

/// Drops this thread's interning and derivative tables. Live expressions
/// keep their own references; call between independent large builds to
/// bound memory.
pub fn clear_thread_caches() {
    INTERNER.with(|t| t.borrow_mut().clear());
    DIFF_CACHE.with(|t| t.borrow_mut().clear());
}

fn ptr(e: &Expr) -> usize {
    Arc::as_ptr(&e.0) as usize
}

fn intern(node: Node) -> Expr {
    let key = match &node {
        Node::Const(c) => Key::Const(c.to_bits()),
        Node::Coord(i) => Key::Coord(*i),
        Node::Param(n) => Key::Param(n.clone()),
        Node::Unary(op, a) => Key::Unary(*op, ptr(a)),
        Node::Binary(op, a, b) => Key::Binary(*op, ptr(a), ptr(b)),
    };
    INTERNER.with(|t| {
        let mut t = t.borrow_mut();
        if let Some(e) = t.get(&key) {
            return e.clone();
        }
        let hash = node_hash(&node);
        let e = Expr(Arc::new(Inner { hash, node }));
        t.insert(key, e.clone());
        e
    })
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        intern(Node::Const(c))
    }

    /// Coordinate reference; index must be 0, 1 or 2.
    pub fn coord(i: usize) -> Expr {
        assert!(i < 3, "coordinate index out of range");
        intern(Node::Coord(i as u8))
    }

    pub fn param(name: &str) -> Expr {
        intern(Node::Param(Arc::from(name)))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.0.node {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    fn is_const(&self, v: f64) -> bool {
        matches!(self.0.node, Node::Const(c) if c == v)
    }

    pub fn add(&self, rhs: &Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            let r = a + b;
            if r.is_finite() {
                return Expr::constant(r);
            }
        }
        if self.is_const(0.0) {
            return rhs.clone();
        }
        if rhs.is_const(0.0) {
            return self.clone();
        }
        intern(Node::Binary(BinaryOp::Add, self.clone(), rhs.clone()))
    }

    pub fn sub(&self, rhs: &Expr) -> Expr {
        if Arc::ptr_eq(&self.0, &rhs.0) {
            return Expr::zero();
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            let r = a - b;
            if r.is_finite() {
                return Expr::constant(r);
            }
        }
        if rhs.is_const(0.0) {
            return self.clone();
        }
        if self.is_const(0.0) {
            return rhs.neg();
        }
        intern(Node::Binary(BinaryOp::Sub, self.clone(), rhs.clone()))
    }

    pub fn mul(&self, rhs: &Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            let r = a * b;
            if r.is_finite() {
                return Expr::constant(r);
            }
        }
        if self.is_const(0.0) || rhs.is_const(0.0) {
            return Expr::zero();
        }
        if self.is_const(1.0) {
            return rhs.clone();
        }
        if rhs.is_const(1.0) {
            return self.clone();
        }
        intern(Node::Binary(BinaryOp::Mul, self.clone(), rhs.clone()))
    }

    pub fn div(&self, rhs: &Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            if b != 0.0 {
                let r = a / b;
                if r.is_finite() {
                    return Expr::constant(r);
                }
            }
        }
        if self.is_const(0.0) {
            return Expr::zero();
        }
        if rhs.is_const(1.0) {
            return self.clone();
        }
        intern(Node::Binary(BinaryOp::Div, self.clone(), rhs.clone()))
    }

    pub fn pow(&self, rhs: &Expr) -> Expr {
        if let Some(e) = rhs.as_const() {
            if e == 1.0 {
                return self.clone();
            }
            if e == 0.0 {
                return Expr::one();
            }
            if let Some(b) = self.as_const() {
                let r = if is_int(e) { b.powi(e as i32) } else { b.powf(e) };
                if r.is_finite() {
                    return Expr::constant(r);
                }
            }
        }
        intern(Node::Binary(BinaryOp::Pow, self.clone(), rhs.clone()))
    }

    pub fn powi(&self, n: i32) -> Expr {
        self.pow(&Expr::constant(n as f64))
    }

    pub fn neg(&self) -> Expr {
        if let Some(c) = self.as_const() {
            return Expr::constant(-c);
        }
        if let Node::Unary(UnaryOp::Neg, inner) = &self.0.node {
            return inner.clone();
        }
        intern(Node::Unary(UnaryOp::Neg, self.clone()))
    }

    pub fn unary(op: UnaryOp, arg: &Expr) -> Expr {
        if op == UnaryOp::Neg {
            return arg.neg();
        }
        if let Some(c) = arg.as_const() {
            let r = op.apply(c);
            if r.is_finite() {
                return Expr::constant(r);
            }
        }
        intern(Node::Unary(op, arg.clone()))
    }

    pub fn sin(&self) -> Expr {
        Expr::unary(UnaryOp::Sin, self)
    }
    pub fn cos(&self) -> Expr {
        Expr::unary(UnaryOp::Cos, self)
    }
    pub fn tan(&self) -> Expr {
        Expr::unary(UnaryOp::Tan, self)
    }
    pub fn exp(&self) -> Expr {
        Expr::unary(UnaryOp::Exp, self)
    }
    pub fn log(&self) -> Expr {
        Expr::unary(UnaryOp::Log, self)
    }
    pub fn sqrt(&self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self)
    }
    pub fn sinh(&self) -> Expr {
        Expr::unary(UnaryOp::Sinh, self)
    }
    pub fn cosh(&self) -> Expr {
        Expr::unary(UnaryOp::Cosh, self)
    }
    pub fn tanh(&self) -> Expr {
        Expr::unary(UnaryOp::Tanh, self)
    }

    /// Exact partial derivative with respect to coordinate `coord`.
    /// Memoized per thread, so repeated differentiation of shared subtrees
    /// is cheap; valid to any order.
    pub fn diff(&self, coord: usize) -> Expr {
        assert!(coord < 3, "coordinate index out of range");
        let key = (ptr(self), coord as u8);
        if let Some(hit) = DIFF_CACHE.with(|t| {
            let t = t.borrow();
            t.get(&key).and_then(|(holder, d)| {
                if Arc::ptr_eq(&holder.0, &self.0) {
                    Some(d.clone())
                } else {
                    None
                }
            })
        }) {
            return hit;
        }
        let d = self.diff_uncached(coord);
        DIFF_CACHE.with(|t| {
            t.borrow_mut().insert(key, (self.clone(), d.clone()));
        });
        d
    }

    fn diff_uncached(&self, coord: usize) -> Expr {
        match &self.0.node {
            Node::Const(_) | Node::Param(_) => Expr::zero(),
            Node::Coord(i) => {
                if *i as usize == coord {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Unary(op, a) => {
                let da = a.diff(coord);
                if da.is_const(0.0) {
                    return Expr::zero();
                }
                let outer = match op {
                    UnaryOp::Neg => return da.neg(),
                    UnaryOp::Sin => a.cos(),
                    UnaryOp::Cos => a.sin().neg(),
                    // d tan = 1/cos^2
                    UnaryOp::Tan => Expr::one().div(&a.cos().powi(2)),
                    UnaryOp::Exp => self.clone(),
                    UnaryOp::Log => Expr::one().div(a),
                    // d sqrt(u) = u' / (2 sqrt(u))
                    UnaryOp::Sqrt => Expr::one().div(&Expr::constant(2.0).mul(self)),
                    UnaryOp::Sinh => a.cosh(),
                    UnaryOp::Cosh => a.sinh(),
                    UnaryOp::Tanh => Expr::one().div(&a.cosh().powi(2)),
                };
                outer.mul(&da)
            }
            Node::Binary(op, a, b) => match op {
                BinaryOp::Add => a.diff(coord).add(&b.diff(coord)),
                BinaryOp::Sub => a.diff(coord).sub(&b.diff(coord)),
                BinaryOp::Mul => {
                    let da = a.diff(coord);
                    let db = b.diff(coord);
                    da.mul(b).add(&a.mul(&db))
                }
                BinaryOp::Div => {
                    let da = a.diff(coord);
                    let db = b.diff(coord);
                    // (a'b - ab') / b^2
                    da.mul(b).sub(&a.mul(&db)).div(&b.powi(2))
                }
                BinaryOp::Pow => {
                    let da = a.diff(coord);
                    let db = b.diff(coord);
                    if let Some(n) = b.as_const() {
                        // n * a^(n-1) * a'
                        return Expr::constant(n)
                            .mul(&a.pow(&Expr::constant(n - 1.0)))
                            .mul(&da);
                    }
                    // a^b * (b' log a + b a'/a)
                    let term = db.mul(&a.log()).add(&b.mul(&da.div(a)));
                    self.mul(&term)
                }
            },
        }
    }

    /// Evaluates at a chart point with the given parameter bindings.
    pub fn eval(&self, point: Point, params: &Params) -> Result<f64, EvalError> {
        let prog = Program::compile(std::slice::from_ref(self));
        let mut out = [0.0];
        prog.eval_into(point, params, &mut out)?;
        Ok(out[0])
    }
}

pub(crate) fn is_int(x: f64) -> bool {
    x.fract() == 0.0 && x.abs() <= i32::MAX as f64
}

/// Evaluation failure, carrying the offending subtree (printed, truncated).
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("log of non-positive value {1} in `{0}`")]
    LogNonPositive(String, f64),
    #[error("square root of negative value {1} in `{0}`")]
    SqrtNegative(String, f64),
    #[error("non-integer power of negative base {1} in `{0}`")]
    PowNegativeBase(String, f64),
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("non-finite result in `{0}`")]
    NonFinite(String),
}

pub(crate) fn excerpt(e: &Expr) -> String {
    let s = print::to_string(e);
    if s.len() > 160 {
        let mut cut = 157;
        while !s.is_char_boundary(cut) {
            cut -= 1;
        }
        format!("{}...", &s[..cut])
    } else {
        s
    }
}
