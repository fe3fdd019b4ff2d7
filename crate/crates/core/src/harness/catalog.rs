//! Problem files shipped with the crate.

use super::problem::{parse_problem, HarnessError, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub source: &'static str,
}

macro_rules! fixture {
    ($name:literal, $desc:literal) => {
        Fixture {
            name: $name,
            description: $desc,
            source: include_str!(concat!("../../fixtures/", $name, ".json")),
        }
    };
}

static CATALOG: &[Fixture] = &[
    fixture!(
        "constant_orthant",
        "constant nonnegative orthant in R^2, parameterized quadratic pair"
    ),
    fixture!(
        "rotation",
        "orthant rotated by angle a (continuous), trigonometric objective"
    ),
    fixture!(
        "jump",
        "generator (1,0) jumps to (2,0) for a > 0; both semicontinuities fail at a = 0"
    ),
    fixture!(
        "pinch",
        "extra generator (1,1) only at a = 0; lower semicontinuity fails there"
    ),
    fixture!(
        "expand",
        "extra generator (1,1) everywhere except a = 0; upper semicontinuity fails there"
    ),
    fixture!(
        "scalar_classic",
        "single generator {1}: scalar steepest descent on 0.5 |x|^2"
    ),
    fixture!(
        "biobjective_orthant",
        "two quadratics centered at (0,0) and (2,0) under the orthant order"
    ),
    fixture!(
        "jump_descent",
        "orthant for a <= 0, half-plane {(1,0)} for a > 0, with the bi-objective quadratics"
    ),
];

pub fn catalog() -> &'static [Fixture] {
    CATALOG
}

pub fn fixture(name: &str) -> Option<&'static Fixture> {
    CATALOG.iter().find(|f| f.name == name)
}

pub fn load_fixture(name: &str) -> Result<Problem, HarnessError> {
    let f = fixture(name).ok_or_else(|| HarnessError::Io {
        path: name.to_string(),
        message: "no bundled fixture with this name".to_string(),
    })?;
    parse_problem(f.source)
}
