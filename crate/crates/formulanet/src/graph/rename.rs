//! Random renaming of bound variables, used to generate the renamed
//! validation sets and to test rename invariance.

use crate::hol::Ast;
use crate::rng::SplitMix64;
use std::collections::{HashMap, HashSet};

/// Replaces bound-variable names via a random injective map into fresh
/// identifiers. Binding structure is unchanged (all binders sharing a name
/// map to the same fresh name, so shadowing is preserved); constants and
/// free names are untouched. Deterministic per seed.
pub fn rename_ast_variables(ast: &Ast, seed: u64) -> Ast {
    let mut existing = HashSet::new();
    ast.all_names(&mut existing);

    let mut bound_names = Vec::new();
    collect_bound_names(ast, &mut bound_names, &mut HashSet::new());

    let mut rng = SplitMix64::new(seed);
    let mut map: HashMap<String, String> = HashMap::new();
    let mut taken = existing.clone();
    for name in bound_names {
        loop {
            let candidate = format!("v{}", rng.next_below(9_000_000) + 1_000_000);
            if !taken.contains(&candidate) {
                taken.insert(candidate.clone());
                map.insert(name.clone(), candidate);
                break;
            }
        }
    }
    rewrite(ast, &map, &mut Vec::new())
}

fn collect_bound_names(ast: &Ast, out: &mut Vec<String>, seen: &mut HashSet<String>) {
    match ast {
        Ast::Leaf { .. } => {}
        Ast::Apply { args, .. } => {
            for arg in args {
                collect_bound_names(arg, out, seen);
            }
        }
        Ast::Quantifier { var, body, .. } => {
            if seen.insert(var.clone()) {
                out.push(var.clone());
            }
            collect_bound_names(body, out, seen);
        }
    }
}

/// Renames only occurrences that are actually bound, so a constant sharing
/// a name with a binder elsewhere survives.
fn rewrite(ast: &Ast, map: &HashMap<String, String>, scope: &mut Vec<String>) -> Ast {
    let renamed = |name: &str, scope: &[String]| -> String {
        if scope.iter().any(|v| v == name) {
            map.get(name).cloned().unwrap_or_else(|| name.to_string())
        } else {
            name.to_string()
        }
    };
    match ast {
        Ast::Leaf { name } => Ast::Leaf {
            name: renamed(name, scope),
        },
        Ast::Apply { head, args } => Ast::Apply {
            head: renamed(head, scope),
            args: args.iter().map(|a| rewrite(a, map, scope)).collect(),
        },
        Ast::Quantifier { binder, var, body } => {
            scope.push(var.clone());
            let new_body = rewrite(body, map, scope);
            scope.pop();
            Ast::Quantifier {
                binder: binder.clone(),
                var: map.get(var).cloned().unwrap_or_else(|| var.clone()),
                body: Box::new(new_body),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, canonical_hash, GraphMode};
    use crate::hol::{parse_text, print};

    #[test]
    fn renames_single_binder() {
        let ast = parse_text("!x. P x").unwrap();
        let renamed = rename_ast_variables(&ast, 3);
        match &renamed {
            Ast::Quantifier { var, body, .. } => {
                assert_ne!(var, "x");
                assert_eq!(print(body), format!("P {var}"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constants_never_renamed() {
        let ast = parse_text("!x. P x c").unwrap();
        let renamed = rename_ast_variables(&ast, 9);
        let text = print(&renamed);
        assert!(text.contains('c'), "{text}");
        assert!(text.contains('P'), "{text}");
        assert!(!text.contains("x c"), "x should be gone: {text}");
    }

    #[test]
    fn deterministic_per_seed() {
        let ast = parse_text("!x. ?y. P x /\\ Q x y").unwrap();
        assert_eq!(
            rename_ast_variables(&ast, 7),
            rename_ast_variables(&ast, 7)
        );
        assert_ne!(
            rename_ast_variables(&ast, 7),
            rename_ast_variables(&ast, 8)
        );
    }

    #[test]
    fn full_mode_graphs_hash_equal_after_renaming() {
        for (i, text) in [
            "!x. ?y. P x /\\ Q x y",
            "!f. ?x. f x c /\\ P f",
            "!x. P x /\\ (!x. Q x)",
            "!a b. a = b ==> b = a",
        ]
        .iter()
        .enumerate()
        {
            let ast = parse_text(text).unwrap();
            let renamed = rename_ast_variables(&ast, 1000 + i as u64);
            let g = build_graph(&ast, GraphMode::Full);
            let h = build_graph(&renamed, GraphMode::Full);
            assert_eq!(canonical_hash(&g), canonical_hash(&h), "{text}");
        }
    }

    #[test]
    fn old_name_graphs_hash_differently_after_renaming() {
        let ast = parse_text("!x. ?y. P x /\\ Q x y").unwrap();
        let renamed = rename_ast_variables(&ast, 5);
        let g = build_graph(&ast, GraphMode::GraphOldNames);
        let h = build_graph(&renamed, GraphMode::GraphOldNames);
        assert_ne!(canonical_hash(&g), canonical_hash(&h));
    }

    #[test]
    fn binding_structure_preserved_under_shadowing() {
        let ast = parse_text("!x. P x /\\ (!x. Q x)").unwrap();
        let renamed = rename_ast_variables(&ast, 11);
        let g = build_graph(&ast, GraphMode::Full);
        let h = build_graph(&renamed, GraphMode::Full);
        assert_eq!(canonical_hash(&g), canonical_hash(&h));
    }

    #[test]
    fn constant_sharing_a_binder_name_survives() {
        // The unbound trailing x is a constant; only the bound occurrences
        // under !x change.
        let ast = parse_text("(!x. P x) /\\ Q x").unwrap();
        let renamed = rename_ast_variables(&ast, 13);
        let text = print(&renamed);
        assert!(text.contains("Q x"), "free x untouched: {text}");
        assert!(!text.contains("P x"), "bound x renamed: {text}");
    }
}
