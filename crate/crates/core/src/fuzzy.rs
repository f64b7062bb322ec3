//! A small Mamdani inference engine.
//!
//! Rules fire with the minimum of their antecedent degrees, consequents are
//! clipped at the firing strength, clipped sets are aggregated by pointwise
//! maximum, and the aggregate is defuzzified by its centroid over uniform
//! samples of the output range.

use std::collections::HashSet;

use thiserror::Error;

pub const DEFAULT_DEFUZZ_SAMPLES: usize = 1001;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuzzyError {
    #[error("membership breakpoints must satisfy a <= b <= c <= d, got ({0}, {1}, {2}, {3})")]
    InvalidBreakpoints(f64, f64, f64, f64),
    #[error("variable {name}: {reason}")]
    InvalidVariable { name: String, reason: String },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("variable {variable} has no term {term}")]
    UnknownTerm { variable: String, term: String },
    #[error("rule has an empty antecedent")]
    EmptyAntecedent,
    #[error("rule mentions variable {0} more than once")]
    DuplicateAntecedent(String),
    #[error("duplicate input variable {0}")]
    DuplicateInput(String),
    #[error("expected {expected} input values, got {got}")]
    InputArity { expected: usize, got: usize },
    #[error("defuzzification needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("no rule fired")]
    NoRuleFired,
}

/// Trapezoid with breakpoints `a <= b <= c <= d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipFunction {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl MembershipFunction {
    pub fn trapezoid(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FuzzyError> {
        let finite = [a, b, c, d].iter().all(|v| v.is_finite());
        if !finite || !(a <= b && b <= c && c <= d) {
            return Err(FuzzyError::InvalidBreakpoints(a, b, c, d));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn triangle(a: f64, peak: f64, c: f64) -> Result<Self, FuzzyError> {
        Self::trapezoid(a, peak, peak, c)
    }

    pub fn breakpoints(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Midpoint of the plateau.
    pub fn center(&self) -> f64 {
        (self.b + self.c) / 2.0
    }

    pub fn degree(&self, x: f64) -> f64 {
        if x < self.a || x > self.d {
            0.0
        } else if x < self.b {
            (x - self.a) / (self.b - self.a)
        } else if x <= self.c {
            1.0
        } else {
            (self.d - x) / (self.d - self.c)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub label: String,
    pub mf: MembershipFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticVariable {
    name: String,
    lo: f64,
    hi: f64,
    terms: Vec<Term>,
}

impl LinguisticVariable {
    /// Checks range and label uniqueness. Coverage is checked separately by
    /// [`check_coverage`](Self::check_coverage) because class-output variables
    /// made of disjoint triangles deliberately leave gaps between classes.
    pub fn new(
        name: impl Into<String>,
        lo: f64,
        hi: f64,
        terms: impl IntoIterator<Item = (String, MembershipFunction)>,
    ) -> Result<Self, FuzzyError> {
        let name = name.into();
        let invalid = |reason: String| FuzzyError::InvalidVariable {
            name: name.clone(),
            reason,
        };
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(format!("range [{lo}, {hi}] is empty")));
        }
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(invalid("name must be a nonempty token".into()));
        }
        let terms: Vec<Term> = terms
            .into_iter()
            .map(|(label, mf)| Term { label, mf })
            .collect();
        if terms.is_empty() {
            return Err(invalid("no terms".into()));
        }
        let mut seen = HashSet::new();
        for t in &terms {
            if t.label.is_empty() || t.label.contains(char::is_whitespace) || t.label == "-" {
                return Err(invalid(format!("bad term label {:?}", t.label)));
            }
            if !seen.insert(t.label.as_str()) {
                return Err(invalid(format!("duplicate term {}", t.label)));
            }
        }
        Ok(Self {
            name,
            lo,
            hi,
            terms,
        })
    }

    /// Every point of `[lo, hi]` must have positive degree under some term.
    ///
    /// Degrees are piecewise linear with kinks only at breakpoints, so testing
    /// the breakpoints and the midpoints between them is exact.
    pub fn check_coverage(&self) -> Result<(), FuzzyError> {
        let mut pts: Vec<f64> = vec![self.lo, self.hi];
        for t in &self.terms {
            pts.extend(
                t.mf.breakpoints()
                    .into_iter()
                    .filter(|p| (self.lo..=self.hi).contains(p)),
            );
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mids: Vec<f64> = pts.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
        for x in pts.into_iter().chain(mids) {
            if self.terms.iter().all(|t| t.mf.degree(x) <= 0.0) {
                return Err(FuzzyError::InvalidVariable {
                    name: self.name.clone(),
                    reason: format!("no term covers {x}"),
                });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term_index(&self, label: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.label == label)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// Index of the term with the highest degree at `x` (clamped into range);
    /// ties go to the earliest term.
    pub fn argmax_index(&self, x: f64) -> usize {
        let x = self.clamp(x);
        let mut best = 0;
        let mut best_deg = f64::NEG_INFINITY;
        for (i, t) in self.terms.iter().enumerate() {
            let d = t.mf.degree(x);
            if d > best_deg {
                best = i;
                best_deg = d;
            }
        }
        best
    }

    pub fn argmax_term(&self, x: f64) -> &str {
        &self.terms[self.argmax_index(x)].label
    }
}

/// `IF var1 IS term1 AND ... THEN output IS consequent`. Inputs not listed
/// in the antecedent do not participate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub antecedent: Vec<(String, String)>,
    pub consequent: String,
}

impl Rule {
    pub fn new<V: Into<String>, T: Into<String>>(
        antecedent: impl IntoIterator<Item = (V, T)>,
        consequent: impl Into<String>,
    ) -> Self {
        Self {
            antecedent: antecedent
                .into_iter()
                .map(|(v, t)| (v.into(), t.into()))
                .collect(),
            consequent: consequent.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct CompiledRule {
    // (input index, term index)
    antecedent: Vec<(usize, usize)>,
    consequent: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisDefinition {
    inputs: Vec<LinguisticVariable>,
    output: LinguisticVariable,
    rules: Vec<Rule>,
    compiled: Vec<CompiledRule>,
    defuzz_samples: usize,
}

/// Result of one inference.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceOutcome {
    pub crisp: f64,
    pub rule_strengths: Vec<f64>,
    pub max_strength: f64,
}

impl FisDefinition {
    pub fn new(
        inputs: Vec<LinguisticVariable>,
        output: LinguisticVariable,
        rules: Vec<Rule>,
    ) -> Result<Self, FuzzyError> {
        let mut seen = HashSet::new();
        for v in &inputs {
            if !seen.insert(v.name()) {
                return Err(FuzzyError::DuplicateInput(v.name().to_string()));
            }
            v.check_coverage()?;
        }
        let mut fis = Self {
            inputs,
            output,
            rules: Vec::new(),
            compiled: Vec::new(),
            defuzz_samples: DEFAULT_DEFUZZ_SAMPLES,
        };
        for rule in rules {
            fis.add_rule(rule)?;
        }
        Ok(fis)
    }

    pub fn with_defuzz_samples(mut self, samples: usize) -> Result<Self, FuzzyError> {
        if samples < 2 {
            return Err(FuzzyError::TooFewSamples(samples));
        }
        self.defuzz_samples = samples;
        Ok(self)
    }

    pub fn inputs(&self) -> &[LinguisticVariable] {
        &self.inputs
    }

    pub fn output(&self) -> &LinguisticVariable {
        &self.output
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn defuzz_samples(&self) -> usize {
        self.defuzz_samples
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|v| v.name() == name)
    }

    fn compile(&self, rule: &Rule) -> Result<CompiledRule, FuzzyError> {
        if rule.antecedent.is_empty() {
            return Err(FuzzyError::EmptyAntecedent);
        }
        let mut used = HashSet::new();
        let mut antecedent = Vec::with_capacity(rule.antecedent.len());
        for (var, term) in &rule.antecedent {
            let vi = self
                .input_index(var)
                .ok_or_else(|| FuzzyError::UnknownVariable(var.clone()))?;
            if !used.insert(vi) {
                return Err(FuzzyError::DuplicateAntecedent(var.clone()));
            }
            let ti = self.inputs[vi]
                .term_index(term)
                .ok_or_else(|| FuzzyError::UnknownTerm {
                    variable: var.clone(),
                    term: term.clone(),
                })?;
            antecedent.push((vi, ti));
        }
        let consequent =
            self.output
                .term_index(&rule.consequent)
                .ok_or_else(|| FuzzyError::UnknownTerm {
                    variable: self.output.name().to_string(),
                    term: rule.consequent.clone(),
                })?;
        Ok(CompiledRule {
            antecedent,
            consequent,
        })
    }

    pub fn add_rule(&mut self, rule: Rule) -> Result<(), FuzzyError> {
        let compiled = self.compile(&rule)?;
        self.rules.push(rule);
        self.compiled.push(compiled);
        Ok(())
    }

    fn check_arity(&self, inputs: &[f64]) -> Result<(), FuzzyError> {
        if inputs.len() != self.inputs.len() {
            return Err(FuzzyError::InputArity {
                expected: self.inputs.len(),
                got: inputs.len(),
            });
        }
        Ok(())
    }

    fn strength_of(&self, rule: &CompiledRule, inputs: &[f64]) -> f64 {
        rule.antecedent
            .iter()
            .map(|&(vi, ti)| {
                let var = &self.inputs[vi];
                var.terms[ti].mf.degree(var.clamp(inputs[vi]))
            })
            .fold(1.0, f64::min)
    }

    /// Firing strength of an arbitrary rule against this system's variables.
    /// `inputs` are crisp values in input declaration order.
    pub fn fire_strength(&self, rule: &Rule, inputs: &[f64]) -> Result<f64, FuzzyError> {
        self.check_arity(inputs)?;
        let compiled = self.compile(rule)?;
        Ok(self.strength_of(&compiled, inputs))
    }

    /// Strength of every rule, in rule order.
    pub fn rule_strengths(&self, inputs: &[f64]) -> Result<Vec<f64>, FuzzyError> {
        self.check_arity(inputs)?;
        Ok(self
            .compiled
            .iter()
            .map(|r| self.strength_of(r, inputs))
            .collect())
    }

    pub fn infer(&self, inputs: &[f64]) -> Result<InferenceOutcome, FuzzyError> {
        let rule_strengths = self.rule_strengths(inputs)?;
        let max_strength = rule_strengths.iter().copied().fold(0.0, f64::max);
        if max_strength <= 0.0 {
            return Err(FuzzyError::NoRuleFired);
        }

        // Clipping one consequent at several strengths and taking the max is
        // the same as clipping once at the largest.
        let mut clip = vec![0.0f64; self.output.terms.len()];
        for (rule, &s) in self.compiled.iter().zip(&rule_strengths) {
            clip[rule.consequent] = clip[rule.consequent].max(s);
        }
        let active: Vec<(&MembershipFunction, f64)> = self
            .output
            .terms
            .iter()
            .zip(&clip)
            .filter(|(_, &s)| s > 0.0)
            .map(|(t, &s)| (&t.mf, s))
            .collect();

        let (lo, hi) = self.output.range();
        let n = self.defuzz_samples;
        let step = (hi - lo) / (n - 1) as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let x = lo + step * i as f64;
            let mu = active
                .iter()
                .map(|(mf, s)| mf.degree(x).min(*s))
                .fold(0.0, f64::max);
            num += x * mu;
            den += mu;
        }
        let crisp = if den > 0.0 {
            num / den
        } else {
            // Every active consequent is narrower than the sample spacing.
            let w: f64 = active.iter().map(|(_, s)| s).sum();
            active.iter().map(|(mf, s)| mf.center() * s).sum::<f64>() / w
        };
        Ok(InferenceOutcome {
            crisp: crisp.clamp(lo, hi),
            rule_strengths,
            max_strength,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trap(a: f64, b: f64, c: f64, d: f64) -> MembershipFunction {
        MembershipFunction::trapezoid(a, b, c, d).unwrap()
    }

    fn var(
        name: &str,
        lo: f64,
        hi: f64,
        terms: &[(&str, MembershipFunction)],
    ) -> LinguisticVariable {
        LinguisticVariable::new(name, lo, hi, terms.iter().map(|(l, m)| (l.to_string(), *m)))
            .unwrap()
    }

    fn three_level(name: &str) -> LinguisticVariable {
        var(
            name,
            0.0,
            10.0,
            &[
                ("lo", trap(0.0, 0.0, 2.0, 5.0)),
                ("mid", trap(2.0, 5.0, 5.0, 8.0)),
                ("hi", trap(5.0, 8.0, 10.0, 10.0)),
            ],
        )
    }

    #[test]
    fn trapezoid_degrees() {
        let mf = trap(0.0, 2.0, 4.0, 6.0);
        assert_eq!(mf.degree(3.0), 1.0);
        assert_eq!(mf.degree(1.0), 0.5);
        assert_eq!(mf.degree(7.0), 0.0);
        assert_eq!(mf.degree(5.0), 0.5);
        assert_eq!(mf.degree(-0.1), 0.0);
        assert_eq!(mf.degree(2.0), 1.0);
        assert_eq!(mf.degree(4.0), 1.0);
    }

    #[test]
    fn degenerate_shapes() {
        let shoulder = trap(0.0, 0.0, 4.0, 8.0);
        assert_eq!(shoulder.degree(0.0), 1.0);
        assert_eq!(shoulder.degree(-1.0), 0.0);
        let spike = trap(3.0, 3.0, 3.0, 3.0);
        assert_eq!(spike.degree(3.0), 1.0);
        assert_eq!(spike.degree(3.0001), 0.0);
        assert!(MembershipFunction::trapezoid(1.0, 0.0, 2.0, 3.0).is_err());
        assert!(MembershipFunction::trapezoid(0.0, f64::NAN, 2.0, 3.0).is_err());
    }

    #[test]
    fn variable_validation() {
        let m = trap(0.0, 0.0, 1.0, 1.0);
        assert!(LinguisticVariable::new("x", 1.0, 1.0, [("a".to_string(), m)]).is_err());
        assert!(LinguisticVariable::new(
            "x",
            0.0,
            1.0,
            [("a".to_string(), m), ("a".to_string(), m)]
        )
        .is_err());
        let gappy = var(
            "x",
            0.0,
            10.0,
            &[
                ("a", trap(0.0, 0.0, 2.0, 4.0)),
                ("b", trap(5.0, 7.0, 10.0, 10.0)),
            ],
        );
        assert!(gappy.check_coverage().is_err());
        // touching supports leave the shared endpoint uncovered
        let touching = var(
            "x",
            0.0,
            10.0,
            &[
                ("a", trap(0.0, 0.0, 0.0, 5.0)),
                ("b", trap(5.0, 10.0, 10.0, 10.0)),
            ],
        );
        assert!(touching.check_coverage().is_err());
        assert!(three_level("x").check_coverage().is_ok());
    }

    #[test]
    fn argmax_prefers_first_on_ties() {
        let v = three_level("x");
        assert_eq!(v.argmax_term(0.0), "lo");
        assert_eq!(v.argmax_term(3.5), "lo");
        assert_eq!(v.argmax_term(5.0), "mid");
        assert_eq!(v.argmax_term(9.0), "hi");
        assert_eq!(v.argmax_term(42.0), "hi");
    }

    fn system(rules: Vec<Rule>, out_terms: &[(&str, MembershipFunction)]) -> FisDefinition {
        FisDefinition::new(
            vec![three_level("x"), three_level("y"), three_level("z")],
            var("out", 0.0, 40.0, out_terms),
            rules,
        )
        .unwrap()
    }

    #[test]
    fn fire_strength_is_min() {
        let fis = system(vec![], &[("a", trap(0.0, 5.0, 5.0, 10.0))]);
        // degrees: x=3 -> lo 2/3? use exact points: x=2.6 lo=0.8, y=5 mid=1, z=6.5 hi=0.5
        let rule = Rule::new([("x", "lo"), ("y", "mid"), ("z", "hi")], "a");
        let s = fis.fire_strength(&rule, &[2.6, 5.0, 6.5]).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
        let single = Rule::new([("y", "mid")], "a");
        assert_eq!(fis.fire_strength(&single, &[0.0, 5.0, 0.0]).unwrap(), 1.0);
        let zero = Rule::new([("x", "hi"), ("y", "mid")], "a");
        assert_eq!(fis.fire_strength(&zero, &[0.0, 5.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn rule_validation_errors() {
        let mut fis = system(vec![], &[("a", trap(0.0, 5.0, 5.0, 10.0))]);
        let empty: Vec<(&str, &str)> = vec![];
        assert_eq!(
            fis.add_rule(Rule::new(empty, "a")),
            Err(FuzzyError::EmptyAntecedent)
        );
        assert_eq!(
            fis.add_rule(Rule::new([("w", "lo")], "a")),
            Err(FuzzyError::UnknownVariable("w".into()))
        );
        assert!(matches!(
            fis.add_rule(Rule::new([("x", "huge")], "a")),
            Err(FuzzyError::UnknownTerm { .. })
        ));
        assert!(matches!(
            fis.add_rule(Rule::new([("x", "lo")], "b")),
            Err(FuzzyError::UnknownTerm { .. })
        ));
        assert!(matches!(
            fis.add_rule(Rule::new([("x", "lo"), ("x", "hi")], "a")),
            Err(FuzzyError::DuplicateAntecedent(_))
        ));
        assert!(fis.rules().is_empty());
        assert!(matches!(
            fis.infer(&[1.0]),
            Err(FuzzyError::InputArity { .. })
        ));
    }

    #[test]
    fn symmetric_consequent_centroid() {
        let fis = system(
            vec![Rule::new([("x", "lo")], "c")],
            &[("c", trap(30.0, 35.0, 35.0, 40.0))],
        );
        let out = fis.infer(&[0.0, 0.0, 0.0]).unwrap();
        assert!((out.crisp - 35.0).abs() < 1e-9);
        assert_eq!(out.max_strength, 1.0);
    }

    #[test]
    fn two_equal_rules_average() {
        let fis = system(
            vec![Rule::new([("x", "lo")], "p"), Rule::new([("y", "lo")], "q")],
            &[
                ("p", trap(5.0, 10.0, 10.0, 15.0)),
                ("q", trap(25.0, 30.0, 30.0, 35.0)),
            ],
        );
        let out = fis.infer(&[0.0, 0.0, 0.0]).unwrap();
        assert!((out.crisp - 20.0).abs() < 1e-9);
    }

    #[test]
    fn no_rule_fired() {
        let fis = system(
            vec![Rule::new([("x", "hi")], "c")],
            &[("c", trap(0.0, 5.0, 5.0, 10.0))],
        );
        assert_eq!(fis.infer(&[0.0, 0.0, 0.0]), Err(FuzzyError::NoRuleFired));
        assert_eq!(fis.rule_strengths(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn inputs_are_clamped() {
        let fis = system(
            vec![Rule::new([("x", "hi")], "c")],
            &[("c", trap(0.0, 5.0, 5.0, 10.0))],
        );
        assert_eq!(fis.infer(&[100.0, -3.0, 0.0]).unwrap().max_strength, 1.0);
    }

    #[test]
    fn narrow_consequent_falls_back_to_center() {
        let fis = system(
            vec![Rule::new([("x", "lo")], "c")],
            &[("c", trap(10.01, 10.015, 10.015, 10.02))],
        );
        let out = fis.infer(&[0.0, 0.0, 0.0]).unwrap();
        assert!((out.crisp - 10.015).abs() < 1e-12);
    }

    #[test]
    fn defuzz_samples_validation() {
        let fis = system(vec![], &[("c", trap(0.0, 5.0, 5.0, 10.0))]);
        assert_eq!(
            fis.clone().with_defuzz_samples(1),
            Err(FuzzyError::TooFewSamples(1))
        );
        assert_eq!(fis.with_defuzz_samples(11).unwrap().defuzz_samples(), 11);
    }
}
