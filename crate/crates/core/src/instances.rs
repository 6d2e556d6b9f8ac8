//! Small named systems used by the tests, the benches and the command line.

use crate::system::PolySystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Instance {
    pub name: &'static str,
    pub p: u64,
    pub n: usize,
    pub constraints: &'static [&'static str],
    pub target: &'static str,
    pub good_reduction: bool,
}

impl Instance {
    pub fn system(&self) -> PolySystem {
        PolySystem::parse(self.p, self.n, self.constraints, self.target).expect("bundled instance parses")
    }
}

pub const BUNDLED: &[Instance] = &[
    Instance { name: "square-line", p: 3, n: 2, constraints: &["x1"], target: "x2^2", good_reduction: true },
    Instance { name: "cube-line", p: 3, n: 2, constraints: &["x1"], target: "x2^3", good_reduction: true },
    Instance { name: "linear-line", p: 3, n: 2, constraints: &["x1"], target: "x2", good_reduction: true },
    Instance { name: "parabola", p: 3, n: 2, constraints: &["x1 - x2^2"], target: "x2", good_reduction: true },
    Instance {
        name: "three-var",
        p: 3,
        n: 3,
        constraints: &["x1 - x2*x3"],
        target: "x2^2 + x3^3",
        good_reduction: true,
    },
    Instance { name: "p2-curve", p: 2, n: 2, constraints: &["x1 + x2^2 + x2"], target: "x2", good_reduction: true },
    Instance { name: "p5-circle", p: 5, n: 2, constraints: &["x1^2 + x2^2 - 1"], target: "x1", good_reduction: true },
    Instance {
        name: "p7-twisted-cubic",
        p: 7,
        n: 3,
        constraints: &["x1 - x3^2", "x2 - x3^3"],
        target: "x3",
        good_reduction: true,
    },
    Instance { name: "bad-line", p: 3, n: 2, constraints: &["3*x1 - 9*x2"], target: "x2^2", good_reduction: false },
];

pub fn by_name(name: &str) -> Option<Instance> {
    BUNDLED.iter().copied().find(|i| i.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::Budget;
    use crate::variety::good_reduction_test;

    #[test]
    fn flags_match_the_test() {
        let b = Budget::default();
        for inst in BUNDLED {
            assert_eq!(good_reduction_test(&inst.system(), &b).unwrap().is_good(), inst.good_reduction, "{}", inst.name);
        }
        assert!(by_name("parabola").is_some());
        assert!(by_name("nope").is_none());
    }
}
