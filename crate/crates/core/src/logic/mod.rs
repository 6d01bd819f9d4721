//! Logical contexts: conjunctions of linear inequalities over program
//! variables, entailment by rational LP, and forward inference per label.

mod ctx;
mod infer;
mod linexpr;

pub use ctx::{entails_facts, LinCtx};
pub use infer::{dump_contexts, infer_contexts, stmt_head, Contexts, WIDEN_AFTER};
pub use linexpr::LinExpr;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_expr, parse_program, CmdKind, Dist, SampleOp};
    use crate::rat::{frac, rat};

    fn lin(s: &str) -> LinExpr {
        LinExpr::from_expr(&parse_expr(s).unwrap()).unwrap()
    }

    fn ctx(facts: &[&str]) -> LinCtx {
        LinCtx::from_facts(facts.iter().map(|f| lin(f)))
    }

    #[test]
    fn entailment_basics() {
        assert!(ctx(&["x - 2"]).entails(&lin("x - 1")));
        assert!(!LinCtx::top().entails(&lin("x")));
        // x >= 2 justifies the guard of the two-step shift rewrite.
        assert!(ctx(&["x - 2"]).entails(&lin("x - 2")));
        assert!(LinCtx::bottom().entails(&lin("0 - 1")));
    }

    #[test]
    fn assume_translations() {
        let c = LinCtx::top().assume(&parse_expr("x > 0").unwrap());
        assert_eq!(c, ctx(&["x - 1"]));
        let c = ctx(&["y"]).assume(&parse_expr("x < n && y < m").unwrap());
        assert_eq!(c, ctx(&["y", "n - x - 1", "m - y - 1"]));
        let c = LinCtx::top().assume(&parse_expr("x * x > 3").unwrap());
        assert_eq!(c, LinCtx::top());
        assert!(ctx(&["x - 1"])
            .assume(&parse_expr("x < 1").unwrap())
            .is_bottom());
    }

    #[test]
    fn assignment_posts() {
        let c = ctx(&["x - 2"]).assign("x", &parse_expr("x - 1").unwrap());
        assert_eq!(c, ctx(&["x - 1"]));
        let c = ctx(&["x"]).assign("x", &parse_expr("y").unwrap());
        assert!(c.entails(&lin("x - y")) && c.entails(&lin("y - x")));
        let c = ctx(&["x - 5"]).assign("x", &parse_expr("x * x").unwrap());
        assert_eq!(c, LinCtx::top());
    }

    #[test]
    fn sample_post_is_weakest_extreme() {
        let c = ctx(&["n - x - 1"]).sample(
            "x",
            &parse_expr("x").unwrap(),
            SampleOp::Add,
            &Dist::Uniform(0, 3),
        );
        assert!(c.entails(&lin("n - x + 2")));
        assert!(!c.entails(&lin("n - x + 1")));
        // Exact posts of every support value entail the result.
        for v in 0..=3 {
            let exact = ctx(&["n - x - 1"]).assign("x", &parse_expr(&format!("x + {v}")).unwrap());
            assert!(exact.entails_ctx(&c));
        }
        let c = ctx(&["x"]).sample(
            "x",
            &parse_expr("x").unwrap(),
            SampleOp::Add,
            &Dist::Bernoulli(frac(1, 2)),
        );
        assert!(c.entails(&lin("x")));
        assert!(LinCtx::bottom()
            .sample(
                "x",
                &parse_expr("x").unwrap(),
                SampleOp::Add,
                &Dist::Uniform(0, 3)
            )
            .is_bottom());
    }

    #[test]
    fn loop_contexts() {
        let p =
            parse_program("var x; while (x >= 2) { x = x - 1 [1/3] x = x - 2; tick(1); }").unwrap();
        let c = infer_contexts(&p);
        let CmdKind::While(_, body) = &p.main.kind else {
            panic!()
        };
        assert!(c.pre[body.label].entails(&lin("x - 2")));

        let p = parse_program("var x, y; x = 1; y = x;").unwrap();
        let c = infer_contexts(&p);
        assert!(c.post[p.main.label].entails(&lin("x - 1")));
        assert!(c.post[p.main.label].entails(&lin("y - 1")));

        let p = parse_program("var x; while (1) skip;").unwrap();
        assert!(infer_contexts(&p).post[p.main.label].is_bottom());
    }

    #[test]
    fn procedure_summary() {
        let p = parse_program(
            "var x; proc p { if (x > 0) { x = x - 1; call p; } } main { call p; tick(1); }",
        )
        .unwrap();
        let c = infer_contexts(&p);
        assert!(c.proc_exit["p"].entails(&lin("0 - x")));
        assert_eq!(c.pre.len(), p.label_count());
        let _ = rat(0);
    }
}
