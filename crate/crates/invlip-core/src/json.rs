//! JSON instance formats: groups, functions, action spaces, matrices.
//!
//! Words are arrays of `[generator_index, sign]` pairs and rationals are
//! `"p/q"` strings throughout; no floats appear in any persisted artifact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::{FiniteCayley, Permutation, TabularOracle};
use crate::kernel::RationalMatrix;
use crate::lipschitz::LipFn;
use crate::orbit::FiniteActionSpace;
use crate::presentation::Presentation;
use crate::rational::{format_rat, parse_rat, Rat};
use crate::space::GroupSpace;
use crate::word::Word;

/// Group instance: named generators, optional relators, and a metric backend.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupSpec {
    pub generators: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relators: Vec<Word>,
    pub backend: String,
    /// Generator permutations for the `finite_cayley` backend. A single
    /// power relator `sⁿ` may be given instead; the cyclic group is then
    /// built directly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutations: Option<Vec<Vec<usize>>>,
    /// Tabulated oracle data for the `oracle` backend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<TabularOracle>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub pseudometric: bool,
}

impl GroupSpec {
    pub fn build(&self, element_cap: usize) -> Result<GroupSpace> {
        let names = self.generators.clone();
        if names.is_empty() {
            return Err(Error::Parse("instance needs at least one generator".into()));
        }
        let space = match self.backend.as_str() {
            "free" => GroupSpace::free(names),
            "free_abelian" => GroupSpace::free_abelian(names),
            "finite_cayley" => {
                let group = if let Some(perms) = &self.permutations {
                    let perms: Vec<Permutation> =
                        perms.iter().map(|p| Permutation(p.clone())).collect();
                    FiniteCayley::from_permutations(&perms, element_cap)?
                } else if let Some(n) = self.single_power_relator() {
                    let rotation = Permutation((0..n).map(|x| (x + 1) % n).collect());
                    FiniteCayley::from_permutations(&[rotation], element_cap)?
                } else {
                    return Err(Error::Parse(
                        "finite_cayley backend needs \"permutations\" (or a single power relator)"
                            .into(),
                    ));
                };
                GroupSpace::finite_cayley(names, group)?
            }
            "oracle" => {
                let oracle = self.oracle.clone().ok_or_else(|| {
                    Error::Parse("oracle backend needs an \"oracle\" table".into())
                })?;
                oracle.validate()?;
                GroupSpace::oracle(names, std::sync::Arc::new(oracle), self.pseudometric)?
            }
            other => {
                return Err(Error::Parse(format!(
                    "unknown backend {other:?}; expected free | free_abelian | finite_cayley | oracle"
                )))
            }
        };
        Ok(space.with_element_cap(element_cap))
    }

    pub fn presentation(&self) -> Result<Presentation> {
        Presentation::new(self.generators.clone(), self.relators.clone())
    }

    fn single_power_relator(&self) -> Option<usize> {
        if self.generators.len() != 1 || self.relators.len() != 1 {
            return None;
        }
        let r = &self.relators[0];
        let n = r.exponent_sum(0).unsigned_abs() as usize;
        (r.len() == n && n > 0).then_some(n)
    }
}

/// Function instance: structured (`hom` + `support`) or tabulated (`values`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hom: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub support: Vec<(Word, String)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<(Word, String)>,
    /// Tabulated only: whether `f(e) = 0` is enforced (default true).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub based: Option<bool>,
}

impl FunctionSpec {
    pub fn build(&self, space: &GroupSpace) -> Result<LipFn> {
        let parse_pairs = |pairs: &[(Word, String)]| -> Result<Vec<(Word, Rat)>> {
            pairs
                .iter()
                .map(|(w, v)| Ok((w.clone(), parse_rat(v)?)))
                .collect()
        };
        match self.kind.as_str() {
            "structured" => {
                let hom: Vec<Rat> = self.hom.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?;
                LipFn::structured_on(space, hom, parse_pairs(&self.support)?)
            }
            "tabulated" => {
                let values = parse_pairs(&self.values)?;
                if self.based.unwrap_or(true) {
                    LipFn::tabulated_on(space, values)
                } else {
                    LipFn::tabulated_unbased_on(space, values)
                }
            }
            other => Err(Error::Parse(format!(
                "unknown function kind {other:?}; expected structured | tabulated"
            ))),
        }
    }

    pub fn from_lipfn(f: &LipFn) -> Result<FunctionSpec> {
        match f {
            LipFn::Structured { hom, perturbation } => Ok(FunctionSpec {
                kind: "structured".into(),
                hom: hom.iter().map(format_rat).collect(),
                support: perturbation
                    .iter()
                    .map(|(w, v)| (w.clone(), format_rat(v)))
                    .collect(),
                values: Vec::new(),
                based: None,
            }),
            LipFn::Tabulated { values, based } => Ok(FunctionSpec {
                kind: "tabulated".into(),
                hom: Vec::new(),
                support: Vec::new(),
                values: values.iter().map(|(w, v)| (w.clone(), format_rat(v))).collect(),
                based: if *based { None } else { Some(false) },
            }),
            LipFn::Lifted { .. } => Err(Error::Parse(
                "lifted functions have no standalone serialization".into(),
            )),
        }
    }
}

/// Seeded sampler: a random function with invariance defect at most `delta`,
/// supported in `ball(support_radius)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub delta: String,
    pub support_radius: i64,
}

/// A full pipeline instance: a group and either a concrete function or a
/// sampler to derive one per seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub group: GroupSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerSpec>,
}

impl InstanceSpec {
    pub fn build(&self, element_cap: usize, seed: Option<u64>) -> Result<(GroupSpace, LipFn)> {
        let space = self.group.build(element_cap)?;
        let f = match (&self.function, &self.sampler, seed) {
            (Some(spec), _, _) => spec.build(&space)?,
            (None, Some(sampler), Some(seed)) => crate::lipschitz::random_delta_invariant(
                &space,
                &parse_rat(&sampler.delta)?,
                &crate::rational::rat_int(sampler.support_radius),
                seed,
            )?,
            (None, Some(_), None) => {
                return Err(Error::Parse(
                    "instance has a sampler; pass --seed or --seeds".into(),
                ))
            }
            (None, None, _) => {
                return Err(Error::Parse(
                    "instance needs a \"function\" or a \"sampler\"".into(),
                ))
            }
        };
        Ok((space, f))
    }
}

/// Orbit-collapse instance: finite metric, acting finite group, generator
/// actions, fundamental domain, distortion constant, and point values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitInstanceSpec {
    #[serde(with = "crate::rational::rat_string_mat")]
    pub dist: Vec<Vec<Rat>>,
    pub group: GroupSpec,
    pub actions: Vec<Vec<usize>>,
    pub fundamental_domain: Vec<usize>,
    pub alpha: String,
    /// Point values; omitted when seeds drive random sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<Vec<String>>,
}

impl OrbitInstanceSpec {
    pub fn build(
        &self,
        element_cap: usize,
        seed: Option<u64>,
    ) -> Result<(FiniteActionSpace, Vec<Rat>)> {
        let group = self.group.build(element_cap)?;
        let actions: Vec<Permutation> = self.actions.iter().map(|p| Permutation(p.clone())).collect();
        let space = FiniteActionSpace::new(
            self.dist.clone(),
            group,
            actions,
            self.fundamental_domain.clone(),
            parse_rat(&self.alpha)?,
        )?;
        let f: Vec<Rat> = match (&self.function, seed) {
            (Some(values), _) => values.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?,
            (None, Some(seed)) => {
                crate::instances::random_point_function(space.point_count(), seed)
            }
            (None, None) => {
                return Err(Error::Parse(
                    "orbit instance needs \"function\" values or a seed".into(),
                ))
            }
        };
        Ok((space, f))
    }
}

/// Matrix file: `{"entries": [["p/q", ..], ..]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixSpec {
    #[serde(with = "crate::rational::rat_string_mat")]
    pub entries: Vec<Vec<Rat>>,
}

impl MatrixSpec {
    pub fn build(&self) -> Result<RationalMatrix> {
        RationalMatrix::new(self.entries.clone())
    }
}

/// Vector file: `{"entries": ["p/q", ..]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VectorSpec {
    #[serde(with = "crate::rational::rat_string_vec")]
    pub entries: Vec<Rat>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    #[test]
    fn round_trip_group_and_function() {
        let text = r#"{
            "group": {
                "generators": ["a", "b"],
                "relators": [[[0,1],[1,1],[0,-1],[1,-1]]],
                "backend": "free_abelian"
            },
            "function": {
                "kind": "structured",
                "hom": ["1/2", "-1/3"],
                "support": [[[[0,1]], "2"]]
            }
        }"#;
        let spec: InstanceSpec = serde_json::from_str(text).unwrap();
        let (space, f) = spec.build(1000, None).unwrap();
        assert_eq!(space.generator_count(), 2);
        assert_eq!(f.eval(&space, &Word::generator(0)).unwrap(), crate::rational::rat(5, 2));
        let back = FunctionSpec::from_lipfn(&f).unwrap();
        assert_eq!(back.hom, vec!["1/2", "-1/3"]);
    }

    #[test]
    fn cyclic_from_power_relator() {
        let text = r#"{"generators": ["s"], "relators": [[[0,1],[0,1],[0,1],[0,1],[0,1]]], "backend": "finite_cayley"}"#;
        let spec: GroupSpec = serde_json::from_str(text).unwrap();
        let space = spec.build(100).unwrap();
        assert_eq!(space.group_order(), Some(5));
        assert_eq!(
            space.normal_form(&Word::power(0, 7)).unwrap(),
            Word::power(0, 2)
        );
    }

    #[test]
    fn finite_cayley_without_data_is_rejected() {
        let text = r#"{"generators": ["a", "b"], "backend": "finite_cayley"}"#;
        let spec: GroupSpec = serde_json::from_str(text).unwrap();
        assert!(spec.build(100).is_err());
    }

    #[test]
    fn matrix_and_vector_files() {
        let m: MatrixSpec = serde_json::from_str(r#"{"entries": [["1", "-3/2"]]}"#).unwrap();
        let a = m.build().unwrap();
        assert_eq!(a.rows, 1);
        let v: VectorSpec = serde_json::from_str(r#"{"entries": ["2", "0"]}"#).unwrap();
        assert_eq!(a.apply(&v.entries).unwrap(), vec![rat_int(2)]);
    }
}
