//! The component catalog: every algorithm component the framework can place
//! on a graph vertex, with its role, the encodings it applies to and the
//! schema of its hyperparameters.
//!
//! The hyperparameter lists and ranges are a reconstruction; the catalog only
//! names the components. Integer ranges whose natural bound depends on the
//! problem (n-point cut counts, archive capacities) are clamped at execution
//! time to what the instance allows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The stage of the iteration loop a component occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Choose,
    Search,
    Update,
    Archive,
}

/// Solution representation of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Continuous,
    Discrete,
    Permutation,
}

impl Encoding {
    pub const ALL: [Encoding; 3] = [Encoding::Continuous, Encoding::Discrete, Encoding::Permutation];

    pub fn as_str(self) -> &'static str {
        match self {
            Encoding::Continuous => "continuous",
            Encoding::Discrete => "discrete",
            Encoding::Permutation => "permutation",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Encoding {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "continuous" => Ok(Encoding::Continuous),
            "discrete" => Ok(Encoding::Discrete),
            "permutation" => Ok(Encoding::Permutation),
            other => Err(UnknownName(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown name `{0}`")]
pub struct UnknownName(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamKind {
    Real,
    Integer,
}

/// Schema of one hyperparameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperparamSchema {
    pub name: &'static str,
    pub kind: ParamKind,
    pub lower: f64,
    pub upper: f64,
    pub default: f64,
    /// Sampled and normalized on a log scale.
    pub log_scale: bool,
}

impl HyperparamSchema {
    const fn real(name: &'static str, lower: f64, upper: f64, default: f64) -> Self {
        Self { name, kind: ParamKind::Real, lower, upper, default, log_scale: false }
    }

    const fn int(name: &'static str, lower: f64, upper: f64, default: f64) -> Self {
        Self { name, kind: ParamKind::Integer, lower, upper, default, log_scale: false }
    }

    const fn log(name: &'static str, lower: f64, upper: f64, default: f64) -> Self {
        Self { name, kind: ParamKind::Real, lower, upper, default, log_scale: true }
    }

    /// Maps a value in `[lower, upper]` to `[0, 1]`.
    pub fn normalize(&self, value: f64, lower: f64, upper: f64) -> f64 {
        if upper <= lower {
            return 0.0;
        }
        let t = if self.log_scale {
            (value.ln() - lower.ln()) / (upper.ln() - lower.ln())
        } else {
            (value - lower) / (upper - lower)
        };
        t.clamp(0.0, 1.0)
    }

    /// Inverse of [`normalize`](Self::normalize); integer kinds are rounded.
    pub fn denormalize(&self, t: f64, lower: f64, upper: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let v = if self.log_scale {
            (lower.ln() + t * (upper.ln() - lower.ln())).exp()
        } else {
            lower + t * (upper - lower)
        };
        let v = match self.kind {
            ParamKind::Real => v,
            ParamKind::Integer => v.round(),
        };
        v.clamp(lower, upper)
    }
}

macro_rules! components {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        /// Every component in the catalog.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Component {
            $($variant),+
        }

        impl Component {
            pub const ALL: &'static [Component] = &[$(Component::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $(Component::$variant => $name),+
                }
            }
        }

        impl FromStr for Component {
            type Err = UnknownName;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(Component::$variant),)+
                    other => Err(UnknownName(other.to_string())),
                }
            }
        }
    };
}

components! {
    CrossArithmetic => "cross_arithmetic",
    CrossSimBinary => "cross_sim_binary",
    CrossPointOne => "cross_point_one",
    CrossPointTwo => "cross_point_two",
    CrossPointN => "cross_point_n",
    CrossPointUniform => "cross_point_uniform",
    SearchCma => "search_cma",
    SearchEda => "search_eda",
    SearchMuCauchy => "search_mu_cauchy",
    SearchMuGaussian => "search_mu_gaussian",
    SearchMuPolynomial => "search_mu_polynomial",
    SearchMuUniform => "search_mu_uniform",
    SearchPso => "search_pso",
    SearchDeRandom => "search_de_random",
    SearchDeCurrent => "search_de_current",
    SearchDeCurrentBest => "search_de_current_best",
    ReinitContinuous => "reinit_continuous",
    SearchResetOne => "search_reset_one",
    SearchResetRand => "search_reset_rand",
    SearchResetCreep => "search_reset_creep",
    ReinitDiscrete => "reinit_discrete",
    CrossOrderTwo => "cross_order_two",
    CrossOrderN => "cross_order_n",
    SearchSwap => "search_swap",
    SearchSwapMulti => "search_swap_multi",
    SearchScramble => "search_scramble",
    SearchInsert => "search_insert",
    ReinitPermutation => "reinit_permutation",
    ChooseRouletteWheel => "choose_roulette_wheel",
    ChooseTournament => "choose_tournament",
    ChooseTraverse => "choose_traverse",
    ChooseCluster => "choose_cluster",
    ChooseNich => "choose_nich",
    UpdateAlways => "update_always",
    UpdateGreedy => "update_greedy",
    UpdatePairwise => "update_pairwise",
    UpdateRoundRobin => "update_round_robin",
    UpdateSimulatedAnnealing => "update_simulated_annealing",
    ArchiveBest => "archive_best",
    ArchiveDiversity => "archive_diversity",
    ArchiveTabu => "archive_tabu",
}

const CONTINUOUS: &[Encoding] = &[Encoding::Continuous];
const DISCRETE: &[Encoding] = &[Encoding::Discrete];
const PERMUTATION: &[Encoding] = &[Encoding::Permutation];
const REAL_OR_INT: &[Encoding] = &[Encoding::Continuous, Encoding::Discrete];

const RATE: HyperparamSchema = HyperparamSchema::real("rate", 0.0, 1.0, 0.5);
const MUTATION_RATE: HyperparamSchema = HyperparamSchema::real("rate", 0.0, 1.0, 0.1);
const DE_PARAMS: &[HyperparamSchema] = &[
    HyperparamSchema::real("f", 0.0, 1.0, 0.5),
    HyperparamSchema::real("cr", 0.0, 1.0, 0.9),
];

impl Component {
    pub fn role(self) -> Role {
        use Component::*;
        match self {
            ChooseRouletteWheel | ChooseTournament | ChooseTraverse | ChooseCluster | ChooseNich => {
                Role::Choose
            }
            UpdateAlways | UpdateGreedy | UpdatePairwise | UpdateRoundRobin
            | UpdateSimulatedAnnealing => Role::Update,
            ArchiveBest | ArchiveDiversity | ArchiveTabu => Role::Archive,
            _ => Role::Search,
        }
    }

    /// Encodings a search component applies to. Empty for encoding-agnostic
    /// components (choose, update and archive roles).
    pub fn encodings(self) -> &'static [Encoding] {
        use Component::*;
        match self {
            CrossPointOne | CrossPointTwo | CrossPointN | CrossPointUniform => REAL_OR_INT,
            CrossArithmetic | CrossSimBinary | SearchCma | SearchEda | SearchMuCauchy
            | SearchMuGaussian | SearchMuPolynomial | SearchMuUniform | SearchPso
            | SearchDeRandom | SearchDeCurrent | SearchDeCurrentBest | ReinitContinuous => {
                CONTINUOUS
            }
            SearchResetOne | SearchResetRand | SearchResetCreep | ReinitDiscrete => DISCRETE,
            CrossOrderTwo | CrossOrderN | SearchSwap | SearchSwapMulti | SearchScramble
            | SearchInsert | ReinitPermutation => PERMUTATION,
            _ => &[],
        }
    }

    pub fn supports(self, encoding: Encoding) -> bool {
        let encs = self.encodings();
        encs.is_empty() || encs.contains(&encoding)
    }

    /// Crossovers consume parents in consecutive pairs.
    pub fn is_crossover(self) -> bool {
        use Component::*;
        matches!(
            self,
            CrossArithmetic
                | CrossSimBinary
                | CrossPointOne
                | CrossPointTwo
                | CrossPointN
                | CrossPointUniform
                | CrossOrderTwo
                | CrossOrderN
        )
    }

    pub fn params(self) -> &'static [HyperparamSchema] {
        use Component::*;
        use HyperparamSchema as H;
        match self {
            CrossArithmetic => const { &[H::real("rate", 0.0, 1.0, 0.9)] },
            CrossSimBinary => const { &[H::real("eta", 1.0, 100.0, 20.0)] },
            CrossPointN | CrossOrderN => const { &[H::int("n", 1.0, 10.0, 3.0)] },
            CrossPointUniform => &[RATE],
            SearchCma => const { &[H::real("sigma", 0.01, 1.0, 0.3)] },
            SearchMuCauchy => const { &[H::real("scale", 0.0, 1.0, 0.1)] },
            SearchMuGaussian => const { &[H::real("sigma", 0.0, 1.0, 0.1)] },
            SearchMuPolynomial => const { &[H::real("eta", 1.0, 100.0, 20.0), MUTATION_RATE] },
            SearchMuUniform | SearchResetRand => &[MUTATION_RATE],
            SearchPso => const {
                &[H::real("w", 0.0, 1.0, 0.7), H::real("c1", 0.0, 2.0, 1.5), H::real("c2", 0.0, 2.0, 1.5)]
            },
            SearchDeRandom | SearchDeCurrent | SearchDeCurrentBest => DE_PARAMS,
            SearchResetCreep => const { &[MUTATION_RATE, H::int("step", 1.0, 3.0, 1.0)] },
            ChooseTournament => const { &[H::int("k", 2.0, 10.0, 2.0)] },
            ChooseCluster => const { &[H::int("k", 2.0, 10.0, 3.0)] },
            UpdateRoundRobin => const { &[H::int("q", 1.0, 10.0, 10.0)] },
            UpdateSimulatedAnnealing => const { &[H::log("t0", 0.01, 100.0, 1.0)] },
            ArchiveBest | ArchiveDiversity => const { &[H::int("capacity", 1.0, 50.0, 10.0)] },
            ArchiveTabu => const { &[H::int("tenure", 1.0, 50.0, 10.0)] },
            _ => &[],
        }
    }

    pub fn param(self, name: &str) -> Option<&'static HyperparamSchema> {
        self.params().iter().find(|p| p.name == name)
    }

    /// Catalog components of one role that apply to `encoding`.
    pub fn of_role(role: Role, encoding: Encoding) -> Vec<Component> {
        Component::ALL
            .iter()
            .copied()
            .filter(|c| c.role() == role && c.supports(encoding))
            .collect()
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Component {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Component {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize)]
struct RegistryEntry {
    name: &'static str,
    role: Role,
    encoding: Vec<&'static str>,
    params: &'static [HyperparamSchema],
}

/// The whole catalog as a JSON array of `{name, role, encoding, params}`.
/// An empty `encoding` list means the component is encoding-agnostic.
pub fn registry_json() -> String {
    let entries: Vec<RegistryEntry> = Component::ALL
        .iter()
        .map(|c| RegistryEntry {
            name: c.name(),
            role: c.role(),
            encoding: c.encodings().iter().map(|e| e.as_str()).collect(),
            params: c.params(),
        })
        .collect();
    serde_json::to_string_pretty(&entries).expect("registry serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip_and_are_unique() {
        let mut seen = std::collections::HashSet::new();
        for &c in Component::ALL {
            assert!(seen.insert(c.name()));
            assert_eq!(c.name().parse::<Component>().unwrap(), c);
        }
        assert_eq!(Component::ALL.len(), 41);
    }

    #[test]
    fn schemas_have_default_inside_range() {
        for &c in Component::ALL {
            for p in c.params() {
                assert!(p.lower <= p.default && p.default <= p.upper, "{c}.{}", p.name);
            }
        }
    }

    #[test]
    fn role_group_sizes() {
        for enc in Encoding::ALL {
            assert_eq!(Component::of_role(Role::Choose, enc).len(), 5);
            assert_eq!(Component::of_role(Role::Update, enc).len(), 5);
            assert_eq!(Component::of_role(Role::Archive, enc).len(), 3);
        }
        assert_eq!(Component::of_role(Role::Search, Encoding::Continuous).len(), 17);
        assert_eq!(Component::of_role(Role::Search, Encoding::Discrete).len(), 8);
        assert_eq!(Component::of_role(Role::Search, Encoding::Permutation).len(), 7);
    }

    #[test]
    fn log_scale_normalization_inverts() {
        let t0 = Component::UpdateSimulatedAnnealing.param("t0").unwrap();
        let t = t0.normalize(1.0, t0.lower, t0.upper);
        assert!((t - 0.5).abs() < 1e-12);
        assert!((t0.denormalize(t, t0.lower, t0.upper) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn registry_lists_every_component() {
        let v: serde_json::Value = serde_json::from_str(&registry_json()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), Component::ALL.len());
    }
}
