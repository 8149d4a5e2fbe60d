//! Parse an ADL coordinate expression and print its tree and canonical form.
//!
//! ```text
//! cargo run --example parse_expression -- "GetY(ST1) + 0.5 * U"
//! ```

use faceatlas::adl::parse_expression;

fn main() {
    let src = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "GetY(ST1)+0.5*U".to_string());
    match parse_expression(&src) {
        Ok(expr) => {
            println!("canonical: {expr}");
            println!("uses cun:  {}", expr.uses_cun());
            let refs: Vec<String> = expr.references().iter().map(|r| r.to_string()).collect();
            println!("refs:      {}", refs.join(", "));
            println!("{expr:#?}");
        }
        Err(e) => {
            eprintln!("{src}");
            eprintln!("{}^ {e}", " ".repeat(e.offset()));
            std::process::exit(1);
        }
    }
}
