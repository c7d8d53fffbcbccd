use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::mesh::Mesh;
use crate::{Error, Point, Result};

#[derive(Clone)]
pub struct BoundaryFn(Arc<dyn Fn(Point) -> f64 + Send + Sync>);

impl BoundaryFn {
    pub fn new(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn eval(&self, p: Point) -> f64 {
        (self.0)(p)
    }
}

impl fmt::Debug for BoundaryFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BoundaryFn(..)")
    }
}

/// Condition applied on one tagged boundary segment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundaryCondition {
    Dirichlet {
        value: f64,
    },
    #[serde(skip)]
    DirichletFn(BoundaryFn),
    /// Prescribed flux `α∇u·n` into the domain; `0` is insulated.
    Neumann {
        flux: f64,
    },
}

impl BoundaryCondition {
    pub fn dirichlet(value: f64) -> Self {
        BoundaryCondition::Dirichlet { value }
    }

    pub fn insulated() -> Self {
        BoundaryCondition::Neumann { flux: 0.0 }
    }

    pub fn is_dirichlet(&self) -> bool {
        !matches!(self, BoundaryCondition::Neumann { .. })
    }

    pub fn value_at(&self, p: Point) -> Option<f64> {
        match self {
            BoundaryCondition::Dirichlet { value } => Some(*value),
            BoundaryCondition::DirichletFn(f) => Some(f.eval(p)),
            BoundaryCondition::Neumann { .. } => None,
        }
    }
}

/// One condition per boundary tag.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoundaryConditions(BTreeMap<String, BoundaryCondition>);

impl BoundaryConditions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, tag: &str, bc: BoundaryCondition) -> Self {
        self.0.insert(tag.to_string(), bc);
        self
    }

    pub fn get(&self, tag: &str) -> Option<&BoundaryCondition> {
        self.0.get(tag)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BoundaryCondition)> {
        self.0.iter()
    }

    /// Every mesh tag must be assigned and every assigned tag must exist.
    pub fn check_against(&self, mesh: &Mesh) -> Result<()> {
        for tag in mesh.boundary_tags().keys() {
            if !self.0.contains_key(tag) {
                return Err(Error::Config(format!(
                    "boundary tag `{tag}` has no condition"
                )));
            }
        }
        for tag in self.0.keys() {
            if !mesh.boundary_tags().contains_key(tag) {
                return Err(Error::Config(format!("unknown boundary tag `{tag}`")));
            }
        }
        Ok(())
    }

    /// Prescribed nodal values. Dirichlet takes precedence over Neumann at shared
    /// corners; between Dirichlet tags the first tag in name order wins.
    pub fn dirichlet_values(&self, mesh: &Mesh) -> Result<Vec<Option<f64>>> {
        self.check_against(mesh)?;
        let mut fixed = vec![None; mesh.node_count()];
        for (tag, bc) in &self.0 {
            if !bc.is_dirichlet() {
                continue;
            }
            for n in mesh.tagged_nodes(tag) {
                if fixed[n].is_none() {
                    let v = bc.value_at(mesh.nodes()[n]).expect("dirichlet");
                    if !v.is_finite() {
                        return Err(Error::Config(format!(
                            "non-finite Dirichlet value on `{tag}`"
                        )));
                    }
                    fixed[n] = Some(v);
                }
            }
        }
        Ok(fixed)
    }
}
