use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::map::{MapExpr, Node};
use super::MapError;
use crate::scalar::{dist, lift, norm, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// The set `T(B(0, r))` for an exactly invertible `T`.
///
/// Membership is tested as `|T⁻¹(x)| < r`. The optional bounding ball is a
/// cheap rejection test and must contain the region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionDescriptor {
    pub transform: Arc<Node>,
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<Ball>,
    #[serde(skip)]
    dim: usize,
}

impl RegionDescriptor {
    pub fn new(transform: &MapExpr, radius: f64, bound: Option<Ball>) -> Self {
        RegionDescriptor {
            transform: Arc::new(transform.node().clone()),
            radius,
            bound,
            dim: transform.dim(),
        }
    }

    pub fn dim(&self) -> usize {
        if self.dim == 0 {
            self.bound.as_ref().map_or(0, |b| b.center.len())
        } else {
            self.dim
        }
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool, MapError> {
        self.contains_scalar(x)
    }

    pub(crate) fn contains_scalar<S: Scalar>(&self, x: &[S]) -> Result<bool, MapError> {
        if let Some(b) = &self.bound {
            let c: Vec<S> = lift(&b.center);
            if dist(x, &c) > S::from_f64(b.radius) {
                return Ok(false);
            }
        }
        let z = self.transform.apply_inverse(x)?;
        Ok(norm(&z) < S::from_f64(self.radius))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionPart {
    pub region: RegionDescriptor,
    pub map: Arc<Node>,
}

impl UnionPart {
    pub(crate) fn new(region: RegionDescriptor, map: Arc<Node>) -> Self {
        UnionPart { region, map }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomaps::Profile;

    #[test]
    fn membership_through_transform() {
        let half = MapExpr::radial(2, Profile::new(vec![(0.0, 0.0), (2.0, 1.0), (4.0, 4.0)]).unwrap()).unwrap();
        let r = RegionDescriptor::new(&half, 1.0, None);
        assert!(r.contains(&[0.4, 0.0]).unwrap());
        assert!(!r.contains(&[0.6, 0.0]).unwrap());
        let bounded = RegionDescriptor::new(
            &half,
            1.0,
            Some(Ball {
                center: vec![0.0, 0.0],
                radius: 0.3,
            }),
        );
        assert!(!bounded.contains(&[0.4, 0.0]).unwrap());
    }

    #[test]
    fn overlapping_union_errors() {
        let id = MapExpr::identity(1);
        let shift = MapExpr::translation(vec![-0.7], vec![0.1], 0.1, 0.25).unwrap();
        let a = RegionDescriptor::new(&id, 1.0, None);
        let b = RegionDescriptor::new(&MapExpr::affine(1.0, vec![0.5]).unwrap(), 1.0, None);
        let u = MapExpr::piecewise_union(1, vec![(a, shift.clone()), (b, id.clone())]).unwrap();
        assert!(matches!(
            u.apply(&[0.7]),
            Err(MapError::RegionOverlap { first: 0, second: 1 })
        ));
        assert_eq!(u.apply(&[-0.99]).unwrap(), vec![-0.99]);
        assert_eq!(u.apply(&[-0.7]).unwrap(), vec![-0.6]);
    }
}
