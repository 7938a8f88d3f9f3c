use chiquad::checks;

fn main() {
    for (name, suite) in [
        ("table1", checks::table1_suite()),
        ("closed-forms", checks::closed_forms_suite()),
        ("oracles", checks::oracles_suite(42)),
    ] {
        let t0 = std::time::Instant::now();
        match suite {
            Ok(cases) => {
                let fails: Vec<_> = cases.iter().filter(|c| !c.pass()).collect();
                println!("{name}: {}/{} pass in {:?}", cases.len() - fails.len(), cases.len(), t0.elapsed());
                for c in fails {
                    println!("  {}", c.line());
                }
            }
            Err(e) => println!("{name}: suite error {e}"),
        }
    }
}
