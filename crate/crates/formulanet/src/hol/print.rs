//! Canonical printer. Compound subterms are parenthesized so that
//! `parse(tokenize(print(ast)))` reproduces the tree exactly.

use super::{Ast, APP_SENTINEL, INFIX_OPS};

pub fn print(ast: &Ast) -> String {
    let mut out = String::new();
    write_term(ast, &mut out);
    out
}

fn write_term(ast: &Ast, out: &mut String) {
    match ast {
        Ast::Leaf { name } => out.push_str(name),
        Ast::Quantifier { binder, var, body } => {
            out.push_str(binder);
            out.push_str(var);
            out.push_str(". ");
            write_term(body, out);
        }
        Ast::Apply { head, args } => {
            if INFIX_OPS.contains(&head.as_str()) && args.len() == 2 {
                write_arg(&args[0], out);
                out.push(' ');
                out.push_str(head);
                out.push(' ');
                write_arg(&args[1], out);
            } else if head == APP_SENTINEL && !args.is_empty() {
                write_arg(&args[0], out);
                for arg in &args[1..] {
                    out.push(' ');
                    write_arg(arg, out);
                }
            } else {
                out.push_str(head);
                for arg in args {
                    out.push(' ');
                    write_arg(arg, out);
                }
            }
        }
    }
}

fn write_arg(ast: &Ast, out: &mut String) {
    if matches!(ast, Ast::Leaf { .. }) {
        write_term(ast, out);
    } else {
        out.push('(');
        write_term(ast, out);
        out.push(')');
    }
}
