//! Canonical printer. Output re-parses to the identical tree, which the
//! round-trip property test relies on.

use super::{BinaryOp, Expr, Node, UnaryOp};

/// Names used when printing coordinate references back out.
pub const CANONICAL_COORDS: [&str; 3] = ["x", "y", "z"];

// Precedence levels: 1 add/sub, 2 mul/div, 3 unary minus, 4 pow.
fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Const(c) if *c < 0.0 => 3,
        Node::Const(_) | Node::Coord(_) | Node::Param(_) => 5,
        Node::Unary(UnaryOp::Neg, _) => 3,
        Node::Unary(_, _) => 5,
        Node::Binary(BinaryOp::Add | BinaryOp::Sub, _, _) => 1,
        Node::Binary(BinaryOp::Mul | BinaryOp::Div, _, _) => 2,
        Node::Binary(BinaryOp::Pow, _, _) => 4,
    }
}

fn write_child(out: &mut String, e: &Expr, min_prec: u8) {
    if prec(e) < min_prec {
        out.push('(');
        write(out, e);
        out.push(')');
    } else {
        write(out, e);
    }
}

fn write(out: &mut String, e: &Expr) {
    match e.node() {
        Node::Const(c) => {
            // `{}` on f64 is shortest round-trip, so parse(print(x)) == x.
            out.push_str(&format!("{}", c));
        }
        Node::Coord(i) => out.push_str(CANONICAL_COORDS[*i as usize]),
        Node::Param(name) => out.push_str(name),
        Node::Unary(UnaryOp::Neg, a) => {
            out.push('-');
            write_child(out, a, 4);
        }
        Node::Unary(op, a) => {
            out.push_str(op.name());
            out.push('(');
            write(out, a);
            out.push(')');
        }
        Node::Binary(op, a, b) => match op {
            BinaryOp::Add => {
                write_child(out, a, 1);
                out.push_str(" + ");
                write_child(out, b, 2);
            }
            BinaryOp::Sub => {
                write_child(out, a, 1);
                out.push_str(" - ");
                write_child(out, b, 2);
            }
            BinaryOp::Mul => {
                write_child(out, a, 2);
                out.push('*');
                write_child(out, b, 3);
            }
            BinaryOp::Div => {
                write_child(out, a, 2);
                out.push('/');
                write_child(out, b, 3);
            }
            BinaryOp::Pow => {
                write_child(out, a, 5);
                out.push('^');
                // Right-associative; `x^y^z` re-parses as `x^(y^z)`.
                write_child(out, b, 3);
            }
        },
    }
}

pub fn to_string(e: &Expr) -> String {
    let mut s = String::new();
    write(&mut s, e);
    s
}
