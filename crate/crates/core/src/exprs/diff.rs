use super::{Expr, Func};

impl Expr {
    /// Symbolic `d/dt`. `eps` and literals are constants; `abs` differentiates
    /// to `sign(u)·u'`, which is `0` where `u = 0`.
    pub fn diff(&self) -> Expr {
        match self {
            Expr::Num(_) | Expr::Eps => Expr::Num(0.0),
            Expr::T => Expr::Num(1.0),
            Expr::Neg(u) => -u.diff(),
            Expr::Add(a, b) => a.diff() + b.diff(),
            Expr::Sub(a, b) => a.diff() - b.diff(),
            Expr::Mul(a, b) => a.diff() * (**b).clone() + (**a).clone() * b.diff(),
            Expr::Div(a, b) => {
                let (u, v) = ((**a).clone(), (**b).clone());
                let num = a.diff() * v.clone() - u * b.diff();
                num / v.pow(Expr::Num(2.0))
            }
            Expr::Pow(base, exponent) => {
                let c = (**exponent).clone();
                let lowered = c.clone() - Expr::Num(1.0);
                c * (**base).clone().pow(lowered) * base.diff()
            }
            Expr::Call(f, u) => {
                let du = u.diff();
                let u = (**u).clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, u),
                    Func::Cos => -Expr::call(Func::Sin, u),
                    Func::Exp => Expr::call(Func::Exp, u),
                    Func::Log => return du / u,
                    Func::Sqrt => return du / (Expr::Num(2.0) * Expr::call(Func::Sqrt, u)),
                    Func::Abs => Expr::call(Func::Sign, u),
                    Func::Sign => Expr::Num(0.0),
                };
                outer * du
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::exprs::parse;

    fn d_at(src: &str, t: f64) -> f64 {
        parse(src).unwrap().diff().eval::<f64>(t, 0.0).unwrap().re
    }

    #[test]
    fn elementary_rules() {
        assert_eq!(d_at("t^3", 2.0), 12.0);
        assert_eq!(d_at("sin(t)", 0.0), 1.0);
        assert_eq!(parse("7").unwrap().diff(), super::Expr::Num(0.0));
        assert_eq!(parse("eps^2").unwrap().diff(), super::Expr::Num(0.0));
        assert_eq!(d_at("abs(t)", -3.0), -1.0);
        assert_eq!(d_at("abs(t)", 0.0), 0.0);
        assert!((d_at("log(t)", 4.0) - 0.25).abs() < 1e-15);
        assert!((d_at("sqrt(t)", 4.0) - 0.25).abs() < 1e-15);
        assert!((d_at("1/t", 2.0) + 0.25).abs() < 1e-15);
        assert!((d_at("exp(2*t)", 0.0) - 2.0).abs() < 1e-15);
        assert!((d_at("cos(t)", 1.0) + 1f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn higher_derivatives() {
        let e = parse("t^2").unwrap();
        assert_eq!(e.diff().diff(), super::Expr::Num(2.0));
        assert_eq!(e.diff().diff().diff(), super::Expr::Num(0.0));
    }
}
