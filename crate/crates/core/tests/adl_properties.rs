mod common;

use faceatlas::adl::{
    compile_atlas, load_atlas, parse_atlas, parse_expression, Axis, CompileError, Complexity,
    Expr, Reference, ATLAS_HEADER,
};
use faceatlas::fixture;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn printed_expressions_reparse_to_the_same_tree(e in common::expr()) {
        let text = e.to_string();
        prop_assert!(!text.contains(' '));
        let back = parse_expression(&text).unwrap();
        prop_assert_eq!(&back, &e, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parser_never_panics(s in "\\PC{0,40}") {
        let _ = parse_expression(&s);
    }

    #[test]
    fn parser_never_panics_on_grammar_soup(s in "[GetXY()MU_HAIRLNST0-9.+*\\- ]{0,40}") {
        if let Err(e) = parse_expression(&s) {
            prop_assert!(e.offset() <= s.len());
        }
    }

    #[test]
    fn atlas_parser_never_panics(body in "[A-Z0-9,\"\\n.+*()_ -]{0,120}") {
        let text = format!("{}\n{body}", ATLAS_HEADER.join(","));
        let _ = parse_atlas(&text).map(compile_atlas);
    }
}

fn random_atlas(choices: &[(Vec<usize>, Vec<u32>, bool)]) -> String {
    let mut text = ATLAS_HEADER.join(",");
    text.push('\n');
    for (i, (deps, mesh, cun)) in choices.iter().enumerate() {
        let mut terms: Vec<String> = Vec::new();
        for &d in deps.iter().filter(|&&d| d < i) {
            terms.push(format!("GetX(GB{})", d + 1));
        }
        for m in mesh {
            terms.push(format!("GetX(M{m})"));
        }
        if terms.is_empty() {
            terms.push("GetX(M1)".into());
        }
        let weighted: Vec<String> = terms
            .iter()
            .map(|t| format!("{:.3}*{t}", 1.0 / terms.len() as f64))
            .collect();
        let mut x = weighted.join("+");
        if *cun {
            x.push_str("+0.5*U");
        }
        let y = x.replace("GetX", "GetY");
        text.push_str(&format!("GB,{},P{i},face,{x},{y},FALSE,-\n", i + 1));
    }
    text
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn classifier_matches_depth_oracle(
        choices in prop::collection::vec(
            (prop::collection::vec(0usize..20, 0..3), prop::collection::vec(0u32..468, 0..3), any::<bool>()),
            1..20,
        )
    ) {
        let text = random_atlas(&choices);
        let program = load_atlas(&text).unwrap();
        let oracle = common::complexity_oracle(&text);
        for def in program.definitions() {
            let expected = match oracle[&def.id.to_string()] {
                0 => Complexity::Direct,
                1 => Complexity::OneTimeProportional,
                _ => Complexity::MultiTimeProportional,
            };
            prop_assert_eq!(program.complexity(&def.id), Some(expected), "{}", def.id);
        }
        // evaluation order respects every dependency
        let order: Vec<String> = program.evaluation_order_ids().map(|i| i.to_string()).collect();
        for (i, (deps, _, _)) in choices.iter().enumerate() {
            let me = order.iter().position(|o| *o == format!("GB{}", i + 1)).unwrap();
            for &d in deps.iter().filter(|&&d| d < i) {
                let dep = order.iter().position(|o| *o == format!("GB{}", d + 1)).unwrap();
                prop_assert!(dep < me);
            }
        }
    }
}

#[test]
fn classifier_matches_oracle_on_bundled_atlases() {
    for text in [fixture::SAMPLE_ATLAS_CSV, fixture::BENCH_ATLAS_CSV] {
        let program = load_atlas(text).unwrap();
        let oracle = common::complexity_oracle(text);
        assert_eq!(oracle.len(), program.len());
        for def in program.definitions() {
            let got = Complexity::ALL
                .iter()
                .position(|c| Some(*c) == program.complexity(&def.id))
                .unwrap() as u8;
            assert_eq!(got, oracle[&def.id.to_string()], "{}", def.id);
        }
    }
}

#[test]
fn sibai_row_parses_to_documented_tree() {
    let e = parse_expression("GetY(ST1)+0.5*U").unwrap();
    let st1 = Reference::Point {
        id: "ST1".parse().unwrap(),
        side: None,
    };
    assert_eq!(
        e,
        Expr::add(
            Expr::get(Axis::Y, st1),
            Expr::mul(Expr::Num(0.5), Expr::Cun)
        )
    );
    assert_eq!(e.to_string(), "GetY(ST1)+0.5*U");
}

#[test]
fn cycle_is_reported_with_its_members() {
    let text = format!(
        "{}\nGB,1,A,face,GetX(GB2),GetY(M1),FALSE,-\nGB,2,B,face,GetX(GB1),GetY(M1),FALSE,-\n",
        ATLAS_HEADER.join(",")
    );
    let err = compile_atlas(parse_atlas(&text).unwrap()).unwrap_err();
    let CompileError::Cycle(ids) = &err.0[0] else {
        panic!("expected a cycle, got {err}");
    };
    let mut names: Vec<String> = ids.iter().map(ToString::to_string).collect();
    names.sort();
    assert_eq!(names, ["GB1", "GB2"]);
}
