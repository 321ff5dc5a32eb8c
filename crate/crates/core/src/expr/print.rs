use super::Expr;

const LAT: u8 = 0;
const ADD: u8 = 1;
const MUL: u8 = 2;
const UNARY: u8 = 3;

pub(super) fn print(e: &Expr) -> String {
    let mut out = String::new();
    write(e, LAT, false, &mut out);
    out
}

/// Writes `e` so that it re-parses at grammar level `level`.
///
/// `star_follows` is set on the right spine of a product's left operand: a
/// bare `0` there would otherwise be read as the literal of a scaling.
fn write(e: &Expr, level: u8, star_follows: bool, out: &mut String) {
    let natural = match e {
        Expr::Add(..) => ADD,
        Expr::Mul(..) => MUL,
        Expr::Join(..) | Expr::Meet(..) => LAT,
        _ => UNARY,
    };
    if natural < level {
        out.push('(');
        write(e, natural, false, out);
        out.push(')');
        return;
    }
    match e {
        Expr::Zero => out.push_str(if star_follows { "(0)" } else { "0" }),
        Expr::Var(v) => out.push_str(v),
        Expr::Scale(c, a) => {
            out.push_str(&format!("{c}*"));
            write(a, UNARY, star_follows, out);
        }
        Expr::Neg(a) => {
            out.push_str("-1*");
            write(a, UNARY, star_follows, out);
        }
        Expr::Add(a, b) => {
            write(a, ADD, false, out);
            match &**b {
                Expr::Scale(c, inner) if *c == -1.0 && c.is_sign_negative() => {
                    out.push_str(" - ");
                    write(inner, MUL, star_follows, out);
                }
                _ => {
                    out.push_str(" + ");
                    write(b, MUL, star_follows, out);
                }
            }
        }
        Expr::Mul(a, b) => {
            write(a, MUL, true, out);
            out.push('*');
            write(b, UNARY, star_follows, out);
        }
        Expr::Join(a, b) | Expr::Meet(a, b) => {
            write(a, LAT, false, out);
            out.push_str(if matches!(e, Expr::Join(..)) {
                " \\/ "
            } else {
                " /\\ "
            });
            write(b, ADD, star_follows, out);
        }
        Expr::Pos(a) | Expr::NegPart(a) | Expr::Abs(a) => {
            out.push_str(match e {
                Expr::Pos(_) => "pos(",
                Expr::NegPart(_) => "neg(",
                _ => "abs(",
            });
            write(a, LAT, false, out);
            out.push(')');
        }
    }
}
