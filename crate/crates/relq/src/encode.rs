//! Abstract state and action vectors.
//!
//! A layout fixes a feature list over a domain. States encode to the vector
//! of feature values; actions encode to a one-hot schema name followed by
//! one membership block per parameter slot, each block holding, per
//! feature, whether the argument object is in the feature's denotation.
//! The combined input length `|F| + |A| + N*|F|` depends only on the
//! domain's vocabulary and the feature list, never on the object count, so
//! one network serves instances of every size.

use fixedbitset::FixedBitSet;

use crate::dl::{Feature, FeatureKind, Interpretation, parse_feature_line, serialize_feature_set};
use crate::relational::{
    ActionSchema, Domain, GroundAction, ObjectUniverse, Predicate, RelationalState,
};
use crate::{Error, Result};

/// Feature list plus action vocabulary: everything needed to encode states
/// and actions of one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingLayout {
    domain: Domain,
    features: Vec<Feature>,
    max_params: usize,
}

impl EncodingLayout {
    /// Builds a layout, checking every feature against the domain
    /// vocabulary.
    pub fn new(domain: Domain, features: Vec<Feature>) -> Result<EncodingLayout> {
        for f in &features {
            validate_feature(&domain, f)?;
        }
        let max_params = domain.max_action_arity();
        Ok(EncodingLayout { domain, features, max_params })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn num_actions(&self) -> usize {
        self.domain.action_schemas().len()
    }

    pub fn max_params(&self) -> usize {
        self.max_params
    }

    /// Length of the concatenated network input:
    /// `|F| + |A| + max_params * |F|`.
    pub fn input_len(&self) -> usize {
        self.num_features() + self.num_actions() + self.max_params * self.num_features()
    }

    /// Errors unless the instance's domain matches the layout's.
    pub fn check_domain(&self, other: &Domain) -> Result<()> {
        if &self.domain != other {
            return Err(Error::validation(format!(
                "layout was built for domain '{}', instance uses '{}'",
                self.domain.name(),
                other.name()
            )));
        }
        Ok(())
    }

    /// Evaluates all features on a state once; encoding any number of
    /// actions of that state reuses the result.
    pub fn abstract_state(
        &self,
        state: &RelationalState,
        universe: &ObjectUniverse,
    ) -> Result<StateAbstraction> {
        let interp = Interpretation::build(&self.domain, universe, state);
        let mut values = Vec::with_capacity(self.features.len());
        let mut members = Vec::with_capacity(self.features.len());
        for f in &self.features {
            match &f.kind {
                FeatureKind::Concept(c) => {
                    let bits = interp.concept_bits(c)?;
                    values.push(bits.count_ones(..) as u32);
                    members.push(bits);
                }
                FeatureKind::Distance(c1, r, c2) => {
                    let from = interp.concept_bits(c1)?;
                    let to = interp.concept_bits(c2)?;
                    values.push(interp.distance_bits(&from, r, &to)? as u32);
                    // distance features never have object members
                    members.push(FixedBitSet::with_capacity(universe.len()));
                }
            }
        }
        Ok(StateAbstraction { state_vector: AbstractStateVector { values }, members })
    }

    /// Encodes one action against a prepared state abstraction.
    pub fn encode_action_with(
        &self,
        abstraction: &StateAbstraction,
        action: &GroundAction,
        universe: &ObjectUniverse,
    ) -> Result<AbstractActionVector> {
        let name_index = self.domain.schema_index(&action.schema).ok_or_else(|| {
            Error::validation(format!("action schema '{}' not in layout", action.schema))
        })?;
        let nf = self.features.len();
        let mut membership = vec![0u8; self.max_params * nf];
        for (slot, arg) in action.args.iter().enumerate().take(self.max_params) {
            let obj = universe
                .index_of(arg)
                .ok_or_else(|| Error::validation(format!("object '{arg}' not declared")))?;
            for (j, bits) in abstraction.members.iter().enumerate() {
                membership[slot * nf + j] = bits.contains(obj) as u8;
            }
        }
        Ok(AbstractActionVector { name_index, num_actions: self.num_actions(), membership })
    }

    /// Concatenates `(state, action)` into the network input.
    pub fn write_input(
        &self,
        state: &AbstractStateVector,
        action: &AbstractActionVector,
        out: &mut Vec<f64>,
    ) {
        out.clear();
        out.reserve(self.input_len());
        out.extend(state.values.iter().map(|&v| v as f64));
        for i in 0..action.num_actions {
            out.push((i == action.name_index) as u8 as f64);
        }
        out.extend(action.membership.iter().map(|&b| b as f64));
    }

    /// Serializes the layout (domain vocabulary plus feature list) as text,
    /// the form embedded in checkpoints.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("domain {}\n", self.domain.name()));
        for p in self.domain.predicates() {
            out.push_str(&format!("predicate {} {}\n", p.name, p.arity));
        }
        for a in self.domain.action_schemas() {
            out.push_str(&format!("action {} {}\n", a.name, a.arity));
        }
        out.push_str("features\n");
        out.push_str(&serialize_feature_set(&self.features));
        out
    }

    /// Parses the textual form produced by [`EncodingLayout::to_text`].
    pub fn from_text(text: &str) -> Result<EncodingLayout> {
        let mut domain_name: Option<String> = None;
        let mut predicates = Vec::new();
        let mut actions = Vec::new();
        let mut features = Vec::new();
        let mut in_features = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if in_features {
                features.push(parse_feature_line(line, line_no)?);
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("domain") => {
                    domain_name = Some(
                        parts
                            .next()
                            .ok_or_else(|| Error::parse(line_no, 1, "missing domain name"))?
                            .to_string(),
                    );
                }
                Some("predicate") => {
                    let (name, arity) = name_arity(&mut parts, line_no)?;
                    predicates.push(Predicate { name, arity });
                }
                Some("action") => {
                    let (name, arity) = name_arity(&mut parts, line_no)?;
                    actions.push(ActionSchema { name, arity });
                }
                Some("features") => in_features = true,
                _ => return Err(Error::parse(line_no, 1, format!("unexpected line '{line}'"))),
            }
        }
        let name =
            domain_name.ok_or_else(|| Error::parse(1, 1, "layout is missing its domain"))?;
        let domain = Domain::new(name, predicates, actions)
            .map_err(|e| Error::parse(1, 1, e.to_string()))?;
        EncodingLayout::new(domain, features)
    }
}

fn name_arity(
    parts: &mut std::str::SplitWhitespace<'_>,
    line_no: usize,
) -> Result<(String, usize)> {
    let name = parts
        .next()
        .ok_or_else(|| Error::parse(line_no, 1, "missing name"))?
        .to_string();
    let arity: usize = parts
        .next()
        .ok_or_else(|| Error::parse(line_no, 1, "missing arity"))?
        .parse()
        .map_err(|_| Error::parse(line_no, 1, "invalid arity"))?;
    Ok((name, arity))
}

fn validate_feature(domain: &Domain, feature: &Feature) -> Result<()> {
    use crate::dl::{Concept, Role};
    fn check_role(domain: &Domain, r: &Role) -> Result<()> {
        match domain.predicate(r.predicate()) {
            Some(p) if p.arity == 2 => Ok(()),
            _ => Err(Error::validation(format!(
                "'{}' is not a binary predicate of domain '{}'",
                r.predicate(),
                domain.name()
            ))),
        }
    }
    fn check_concept(domain: &Domain, c: &Concept) -> Result<()> {
        match c {
            Concept::Top => Ok(()),
            Concept::Primitive(p) => match domain.predicate(p) {
                Some(d) if d.arity == 1 => Ok(()),
                _ => Err(Error::validation(format!(
                    "'{p}' is not a unary predicate of domain '{}'",
                    domain.name()
                ))),
            },
            Concept::Not(inner) => check_concept(domain, inner),
            Concept::And(a, b) => {
                check_concept(domain, a)?;
                check_concept(domain, b)
            }
            Concept::Forall(r, inner) | Concept::Exists(r, inner) => {
                check_role(domain, r)?;
                check_concept(domain, inner)
            }
            Concept::RoleEq(a, b) => {
                check_role(domain, a)?;
                check_role(domain, b)
            }
        }
    }
    match &feature.kind {
        FeatureKind::Concept(c) => check_concept(domain, c),
        FeatureKind::Distance(c1, r, c2) => {
            check_concept(domain, c1)?;
            check_role(domain, r)?;
            check_concept(domain, c2)
        }
    }
}

/// Per-feature values of one state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractStateVector {
    pub values: Vec<u32>,
}

/// One-hot action name plus per-parameter feature-membership blocks.
/// Blocks for parameter slots the action does not fill are all zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractActionVector {
    pub name_index: usize,
    pub num_actions: usize,
    /// `max_params` blocks of `|F|` bits each, flattened.
    pub membership: Vec<u8>,
}

/// A state's feature values together with the denotation bitsets that
/// action encoding reads membership from.
pub struct StateAbstraction {
    pub state_vector: AbstractStateVector,
    members: Vec<FixedBitSet>,
}

/// Encodes a state: component `i` is the value of feature `i`.
pub fn encode_state(
    layout: &EncodingLayout,
    state: &RelationalState,
    universe: &ObjectUniverse,
) -> Result<AbstractStateVector> {
    Ok(layout.abstract_state(state, universe)?.state_vector)
}

/// Encodes a ground action in the context of a state (membership bits are
/// state-dependent).
pub fn encode_action(
    layout: &EncodingLayout,
    action: &GroundAction,
    state: &RelationalState,
    universe: &ObjectUniverse,
) -> Result<AbstractActionVector> {
    let abstraction = layout.abstract_state(state, universe)?;
    layout.encode_action_with(&abstraction, action, universe)
}

/// Optional per-feature running-max scaling of the state vector portion of
/// the input. Disabled scalers pass values through unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct InputScaler {
    enabled: bool,
    maxes: Vec<f64>,
}

impl InputScaler {
    pub fn new(enabled: bool, num_features: usize) -> InputScaler {
        InputScaler { enabled, maxes: vec![1.0; num_features] }
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn maxes(&self) -> &[f64] {
        &self.maxes
    }

    pub fn from_parts(enabled: bool, maxes: Vec<f64>) -> InputScaler {
        InputScaler { enabled, maxes }
    }

    /// Updates running maxima from a state vector.
    pub fn observe(&mut self, state: &AbstractStateVector) {
        if !self.enabled {
            return;
        }
        for (m, &v) in self.maxes.iter_mut().zip(&state.values) {
            *m = m.max(v as f64);
        }
    }

    /// Scales the first `|F|` components of an assembled input in place.
    pub fn apply(&self, input: &mut [f64]) {
        if !self.enabled {
            return;
        }
        for (x, m) in input.iter_mut().zip(&self.maxes) {
            *x /= m.max(1.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dl::{Concept, Role};
    use crate::env::DomainKind;
    use crate::relational::GroundFact;

    /// Layout of the worked example: the sysadmin domain with the single
    /// feature counting running computers.
    fn example_layout() -> EncodingLayout {
        EncodingLayout::new(
            DomainKind::Sysadmin.domain(),
            vec![Feature::concept(Concept::primitive("running"))],
        )
        .unwrap()
    }

    fn example_state() -> (ObjectUniverse, RelationalState) {
        let universe = ObjectUniverse::new(vec!["c0".into(), "c1".into()]).unwrap();
        let state = RelationalState::new([
            GroundFact::new("running", &["c0"]),
            GroundFact::new("link", &["c0", "c1"]),
            GroundFact::new("link", &["c1", "c0"]),
        ]);
        (universe, state)
    }

    #[test]
    fn worked_example_state_vector() {
        let layout = example_layout();
        let (universe, state) = example_state();
        let s = encode_state(&layout, &state, &universe).unwrap();
        assert_eq!(s.values, vec![1]);

        // the same abstract state when c1 is running instead of c0
        let swapped = RelationalState::new([
            GroundFact::new("running", &["c1"]),
            GroundFact::new("link", &["c0", "c1"]),
            GroundFact::new("link", &["c1", "c0"]),
        ]);
        assert_eq!(encode_state(&layout, &swapped, &universe).unwrap(), s);
    }

    #[test]
    fn worked_example_action_vectors() {
        let layout = example_layout();
        let (universe, state) = example_state();
        let mut input = Vec::new();

        let nop = encode_action(&layout, &GroundAction::nop(), &state, &universe).unwrap();
        let s = encode_state(&layout, &state, &universe).unwrap();
        layout.write_input(&s, &nop, &mut input);
        assert_eq!(input, vec![1.0, 1.0, 0.0, 0.0]); // <1> | <1,0 | 0>

        let reboot_c0 =
            encode_action(&layout, &GroundAction::new("reboot", &["c0"]), &state, &universe)
                .unwrap();
        layout.write_input(&s, &reboot_c0, &mut input);
        assert_eq!(input, vec![1.0, 0.0, 1.0, 1.0]); // <1> | <0,1 | 1>

        let reboot_c1 =
            encode_action(&layout, &GroundAction::new("reboot", &["c1"]), &state, &universe)
                .unwrap();
        layout.write_input(&s, &reboot_c1, &mut input);
        assert_eq!(input, vec![1.0, 0.0, 1.0, 0.0]); // <1> | <0,1 | 0>
    }

    #[test]
    fn input_length_contract() {
        let layout = example_layout();
        assert_eq!(layout.input_len(), 1 + 2 + 1);

        let wf = DomainKind::Wildfire.domain();
        let features = vec![
            Feature::concept(Concept::primitive("burning")),
            Feature::concept(Concept::Top),
            Feature::distance(
                Concept::primitive("burning"),
                Role::primitive("neighbor"),
                Concept::primitive("fuel"),
            ),
        ];
        let layout = EncodingLayout::new(wf, features).unwrap();
        // 3 features, 3 actions (cut_out, nop, put_out), max 1 parameter
        assert_eq!(layout.input_len(), 3 + 3 + 3);
    }

    #[test]
    fn empty_state_encodes_to_zeros() {
        let layout = example_layout();
        let universe = ObjectUniverse::new(vec!["c0".into()]).unwrap();
        let s = encode_state(&layout, &RelationalState::default(), &universe).unwrap();
        assert_eq!(s.values, vec![0]);
    }

    #[test]
    fn unknown_schema_is_rejected() {
        let layout = example_layout();
        let (universe, state) = example_state();
        let err = encode_action(&layout, &GroundAction::new("paint", &["c0"]), &state, &universe)
            .unwrap_err();
        assert!(err.to_string().contains("not in layout"));
    }

    #[test]
    fn layout_rejects_foreign_features() {
        let err = EncodingLayout::new(
            DomainKind::Sysadmin.domain(),
            vec![Feature::concept(Concept::primitive("alive"))],
        )
        .unwrap_err();
        assert!(err.to_string().contains("alive"));
    }

    #[test]
    fn layout_text_round_trip() {
        let layout = EncodingLayout::new(
            DomainKind::Wildfire.domain(),
            vec![
                Feature::concept(Concept::primitive("burning")),
                Feature::distance(
                    Concept::primitive("burning"),
                    Role::inverse(Role::primitive("neighbor")),
                    Concept::Top,
                ),
            ],
        )
        .unwrap();
        let text = layout.to_text();
        let parsed = EncodingLayout::from_text(&text).unwrap();
        assert_eq!(parsed, layout);
    }

    #[test]
    fn renaming_invariance_spot_check() {
        let layout = example_layout();
        let (universe, state) = example_state();
        let renamed_universe = ObjectUniverse::new(vec!["m1".into(), "m0".into()]).unwrap();
        let rename = |o: &str| match o {
            "c0" => "m0".to_string(),
            "c1" => "m1".to_string(),
            other => other.to_string(),
        };
        let renamed_state = state.rename(&rename);
        assert_eq!(
            encode_state(&layout, &state, &universe).unwrap(),
            encode_state(&layout, &renamed_state, &renamed_universe).unwrap()
        );
        let action = GroundAction::new("reboot", &["c0"]);
        let renamed_action = GroundAction::new("reboot", &["m0"]);
        assert_eq!(
            encode_action(&layout, &action, &state, &universe).unwrap(),
            encode_action(&layout, &renamed_action, &renamed_state, &renamed_universe).unwrap()
        );
    }

    #[test]
    fn repeated_arguments_duplicate_their_membership_block() {
        use crate::relational::{ActionSchema, Domain, Predicate};
        let domain = Domain::new(
            "pairs",
            vec![
                Predicate { name: "mark".into(), arity: 1 },
                Predicate { name: "edge".into(), arity: 2 },
            ],
            vec![ActionSchema { name: "join".into(), arity: 2 }],
        )
        .unwrap();
        let layout = EncodingLayout::new(
            domain,
            vec![
                Feature::concept(Concept::primitive("mark")),
                Feature::concept(Concept::Top),
            ],
        )
        .unwrap();
        let universe = ObjectUniverse::new(vec!["a".into(), "b".into()]).unwrap();
        let state = RelationalState::new([GroundFact::new("mark", &["a"])]);
        let doubled =
            encode_action(&layout, &GroundAction::new("join", &["a", "a"]), &state, &universe)
                .unwrap();
        let nf = layout.num_features();
        assert_eq!(doubled.membership[..nf], doubled.membership[nf..]);
        assert_eq!(doubled.membership, vec![1, 1, 1, 1]);
        let mixed =
            encode_action(&layout, &GroundAction::new("join", &["a", "b"]), &state, &universe)
                .unwrap();
        assert_eq!(mixed.membership, vec![1, 1, 0, 1]);
    }

    #[test]
    fn scaler_divides_by_running_max() {
        let mut scaler = InputScaler::new(true, 2);
        scaler.observe(&AbstractStateVector { values: vec![4, 1] });
        scaler.observe(&AbstractStateVector { values: vec![2, 0] });
        let mut input = vec![2.0, 1.0, 1.0, 0.0];
        scaler.apply(&mut input);
        assert_eq!(input, vec![0.5, 1.0, 1.0, 0.0]);

        let off = InputScaler::new(false, 2);
        let mut input = vec![2.0, 1.0];
        off.apply(&mut input);
        assert_eq!(input, vec![2.0, 1.0]);
    }
}
