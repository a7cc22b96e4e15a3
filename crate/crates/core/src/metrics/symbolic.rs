//! Symbolic differentiation and substitution on expression trees.
//!
//! Independent of the jet engine, so it doubles as the reference the jets
//! are tested against.

use super::expr::{Expr, Func, Var};

fn is_num(e: &Expr, c: f64) -> bool {
    matches!(e, Expr::Num(v) if *v == c)
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
        _ if is_num(&a, 0.0) => b,
        _ if is_num(&b, 0.0) => a,
        _ => a + b,
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
        _ if is_num(&b, 0.0) => a,
        _ if is_num(&a, 0.0) => neg(b),
        _ => a - b,
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
        _ if is_num(&a, 0.0) || is_num(&b, 0.0) => Expr::Num(0.0),
        _ if is_num(&a, 1.0) => b,
        _ if is_num(&b, 1.0) => a,
        _ => a * b,
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) {
        return Expr::Num(0.0);
    }
    if is_num(&b, 1.0) {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(x) => Expr::Num(-x),
        Expr::Neg(inner) => *inner,
        other => -other,
    }
}

impl Expr {
    /// Partial derivative with respect to `var`.
    pub fn derivative(&self, var: Var) -> Expr {
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(v) => Expr::Num(if *v == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.derivative(var)),
            Expr::Add(a, b) => add(a.derivative(var), b.derivative(var)),
            Expr::Sub(a, b) => sub(a.derivative(var), b.derivative(var)),
            Expr::Mul(a, b) => add(
                mul(a.derivative(var), (**b).clone()),
                mul((**a).clone(), b.derivative(var)),
            ),
            Expr::Div(a, b) => {
                let num = sub(
                    mul(a.derivative(var), (**b).clone()),
                    mul((**a).clone(), b.derivative(var)),
                );
                div(num, (**b).clone().pow(Expr::Num(2.0)))
            }
            Expr::Pow(base, exponent) => {
                let da = base.derivative(var);
                match exponent.constant_value() {
                    Some(c) => {
                        if c == 0.0 {
                            return Expr::Num(0.0);
                        }
                        let lowered = if c == 1.0 {
                            Expr::Num(1.0)
                        } else {
                            (**base).clone().pow(Expr::Num(c - 1.0))
                        };
                        mul(mul(Expr::Num(c), lowered), da)
                    }
                    None => {
                        let de = exponent.derivative(var);
                        let inner = add(
                            mul(de, Expr::call(Func::Log, (**base).clone())),
                            div(mul((**exponent).clone(), da), (**base).clone()),
                        );
                        mul(self.clone(), inner)
                    }
                }
            }
            Expr::Call(f, a) => {
                let da = a.derivative(var);
                if is_num(&da, 0.0) {
                    return Expr::Num(0.0);
                }
                let a = (**a).clone();
                let outer = match f {
                    Func::Sqrt => div(Expr::Num(0.5), Expr::call(Func::Sqrt, a)),
                    Func::Exp => Expr::call(Func::Exp, a),
                    Func::Log => div(Expr::Num(1.0), a),
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => neg(Expr::call(Func::Sin, a)),
                };
                mul(outer, da)
            }
        }
    }

    /// Replace variables for which `f` returns an expression.
    pub fn substitute(&self, f: &dyn Fn(Var) -> Option<Expr>) -> Expr {
        match self {
            Expr::Num(_) => self.clone(),
            Expr::Var(v) => f(*v).unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => -a.substitute(f),
            Expr::Add(a, b) => a.substitute(f) + b.substitute(f),
            Expr::Sub(a, b) => a.substitute(f) - b.substitute(f),
            Expr::Mul(a, b) => a.substitute(f) * b.substitute(f),
            Expr::Div(a, b) => Expr::Div(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Pow(a, b) => a.substitute(f).pow(b.substitute(f)),
            Expr::Call(func, a) => Expr::call(*func, a.substitute(f)),
        }
    }
}
