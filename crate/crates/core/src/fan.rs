//! Smooth fans in `Z^n`, their dual frames, star subdivisions and morphisms.
//!
//! A fan is stored by its rays and maximal cones only. Every maximal cone has
//! exactly `dim` rays forming a lattice basis; lower-dimensional cones are
//! subsets of a maximal cone's ray indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, IntMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fan {
    pub dim: usize,
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
}

/// Linear forms dual to the generators of one maximal cone: `forms[i]`
/// evaluates to 1 on the `i`-th generator and 0 on the others.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualFrame {
    pub cone: usize,
    pub forms: IntMatrix,
}

impl DualFrame {
    /// The dual form attached to ray `ray`, if the ray is a generator of this cone.
    pub fn form_for_ray<'a>(&'a self, fan: &Fan, ray: usize) -> Option<&'a [i64]> {
        let pos = fan.max_cones[self.cone].iter().position(|&r| r == ray)?;
        Some(&self.forms[pos])
    }
}

impl Fan {
    /// Builds a fan and rejects it unless `validate` is clean.
    pub fn new(dim: usize, rays: Vec<Vec<i64>>, max_cones: Vec<Vec<usize>>) -> Result<Self> {
        let fan = Self {
            dim,
            rays,
            max_cones,
        };
        let problems = fan.validate();
        if problems.is_empty() {
            Ok(fan)
        } else {
            Err(Error::InvalidFan(problems))
        }
    }

    /// The single cone spanned by the standard basis (affine space).
    pub fn affine(dim: usize) -> Self {
        Self {
            dim,
            rays: lattice::identity(dim),
            max_cones: vec![(0..dim).collect()],
        }
    }

    /// Projective space: rays `e_1..e_n, -(e_1 + .. + e_n)`.
    pub fn projective(dim: usize) -> Self {
        let mut rays = lattice::identity(dim);
        rays.push(vec![-1; dim]);
        let max_cones = (0..=dim)
            .map(|skip| (0..=dim).filter(|&i| i != skip).collect())
            .collect();
        Self {
            dim,
            rays,
            max_cones,
        }
    }

    /// Product fan; rays of `self` come first, padded with zeros.
    pub fn product(&self, other: &Fan) -> Self {
        let dim = self.dim + other.dim;
        let mut rays: Vec<Vec<i64>> = self
            .rays
            .iter()
            .map(|r| {
                r.iter()
                    .copied()
                    .chain(std::iter::repeat_n(0, other.dim))
                    .collect()
            })
            .collect();
        rays.extend(other.rays.iter().map(|r| {
            std::iter::repeat_n(0, self.dim)
                .chain(r.iter().copied())
                .collect()
        }));
        let shift = self.rays.len();
        let max_cones = self
            .max_cones
            .iter()
            .flat_map(|a| {
                other.max_cones.iter().map(move |b| {
                    a.iter()
                        .copied()
                        .chain(b.iter().map(|&j| j + shift))
                        .collect()
                })
            })
            .collect();
        Self {
            dim,
            rays,
            max_cones,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: Fan =
            serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("fan JSON: {e}")))?;
        Self::new(raw.dim, raw.rays, raw.max_cones)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("fan serializes")
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn num_max_cones(&self) -> usize {
        self.max_cones.len()
    }

    /// Generator matrix (generators as columns) of maximal cone `k`.
    pub fn generators(&self, k: usize) -> IntMatrix {
        let cols: Vec<&[i64]> = self.max_cones[k]
            .iter()
            .map(|&r| self.rays[r].as_slice())
            .collect();
        lattice::from_columns(&cols)
    }

    /// Every violated fan invariant, as human-readable diagnostics.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.dim == 0 {
            out.push("dimension must be positive".to_string());
            return out;
        }
        for (i, r) in self.rays.iter().enumerate() {
            if r.len() != self.dim {
                out.push(format!("ray {i} has length {} != {}", r.len(), self.dim));
            } else if !lattice::is_primitive(r) {
                out.push(format!("ray {i} not primitive"));
            }
        }
        for i in 0..self.rays.len() {
            for j in i + 1..self.rays.len() {
                if self.rays[i] == self.rays[j] {
                    out.push(format!("rays {i} and {j} coincide"));
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        let mut smooth = true;
        for (k, cone) in self.max_cones.iter().enumerate() {
            if cone.len() != self.dim {
                out.push(format!(
                    "cone {k} has {} rays, expected {}",
                    cone.len(),
                    self.dim
                ));
                smooth = false;
                continue;
            }
            if let Some(&bad) = cone.iter().find(|&&r| r >= self.rays.len()) {
                out.push(format!("cone {k} references missing ray {bad}"));
                smooth = false;
                continue;
            }
            let mut sorted = cone.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != cone.len() {
                out.push(format!("cone {k} repeats a ray"));
                smooth = false;
                continue;
            }
            let d = lattice::det(&self.generators(k));
            if d.abs() != 1 {
                out.push(format!("cone {k} not smooth, |det| = {}", d.abs()));
                smooth = false;
            }
        }
        if !smooth {
            return out;
        }
        let frames: Vec<IntMatrix> = (0..self.max_cones.len())
            .map(|k| lattice::unimodular_inverse(&self.generators(k)).expect("smooth"))
            .collect();
        for i in 0..self.max_cones.len() {
            for j in i + 1..self.max_cones.len() {
                if same_set(&self.max_cones[i], &self.max_cones[j]) {
                    out.push(format!("cones {i} and {j} coincide"));
                } else if !self.meet_in_common_face(i, j, &frames[i], &frames[j]) {
                    out.push(format!("cones {i} and {j} do not meet in a common face"));
                }
            }
        }
        out
    }

    /// Checks that the intersection of cones `i` and `j` is the cone on their
    /// shared rays, by enumerating the extreme rays of the intersection.
    fn meet_in_common_face(&self, i: usize, j: usize, fi: &IntMatrix, fj: &IntMatrix) -> bool {
        let n = self.dim;
        let ineqs: Vec<&Vec<i64>> = fi.iter().chain(fj.iter()).collect();
        let outside: Vec<usize> = self.max_cones[i]
            .iter()
            .enumerate()
            .filter(|(_, r)| !self.max_cones[j].contains(r))
            .map(|(p, _)| p)
            .collect();
        let eval = |form: &[i64], v: &[i128]| -> i128 {
            form.iter().zip(v).map(|(&a, &b)| a as i128 * b).sum()
        };
        for subset in combinations(ineqs.len(), n - 1) {
            let rows: IntMatrix = subset.iter().map(|&s| ineqs[s].clone()).collect();
            let line = lattice::kernel_line(&rows, n);
            if line.iter().all(|&x| x == 0) {
                continue;
            }
            for sign in [1i128, -1] {
                let v: Vec<i128> = line.iter().map(|&x| sign * x).collect();
                if ineqs.iter().all(|f| eval(f, &v) >= 0)
                    && outside.iter().any(|&p| eval(&fi[p], &v) != 0)
                {
                    return false;
                }
            }
        }
        true
    }

    pub fn dual_frame(&self, k: usize) -> Result<DualFrame> {
        if k >= self.max_cones.len() {
            return Err(Error::InvalidInput(format!("no maximal cone {k}")));
        }
        let g = self.generators(k);
        let forms = lattice::unimodular_inverse(&g).ok_or(Error::NotSmooth {
            cone: k,
            det: lattice::det(&g),
        })?;
        Ok(DualFrame { cone: k, forms })
    }

    pub fn dual_frames(&self) -> Result<Vec<DualFrame>> {
        (0..self.max_cones.len())
            .map(|k| self.dual_frame(k))
            .collect()
    }

    /// Maximal cones whose ray set contains `cone`.
    pub fn cones_containing(&self, cone: &[usize]) -> Vec<usize> {
        (0..self.max_cones.len())
            .filter(|&k| cone.iter().all(|r| self.max_cones[k].contains(r)))
            .collect()
    }

    pub fn has_cone(&self, cone: &[usize]) -> bool {
        !self.cones_containing(cone).is_empty()
    }

    /// Whether the point lies in maximal cone `k` (on its boundary included).
    pub fn cone_contains(&self, k: usize, point: &[i64]) -> Result<bool> {
        Ok(self
            .dual_frame(k)?
            .forms
            .iter()
            .all(|f| lattice::dot(f, point) >= 0))
    }

    /// Star subdivision at the ray through the sum of the generators of `cone`.
    pub fn star_subdivide(&self, cone: &[usize]) -> Result<Fan> {
        if cone.is_empty() || !self.has_cone(cone) {
            return Err(Error::ConeNotFound(cone.to_vec()));
        }
        if cone.len() == 1 {
            return Ok(self.clone());
        }
        let new_ray: Vec<i64> = (0..self.dim)
            .map(|i| cone.iter().map(|&r| self.rays[r][i]).sum())
            .collect();
        let mut rays = self.rays.clone();
        let new_index = rays.len();
        rays.push(new_ray);
        let mut max_cones = Vec::with_capacity(self.max_cones.len() + cone.len());
        for sigma in &self.max_cones {
            if cone.iter().all(|r| sigma.contains(r)) {
                for &dropped in cone {
                    max_cones.push(
                        sigma
                            .iter()
                            .map(|&r| if r == dropped { new_index } else { r })
                            .collect(),
                    );
                }
            } else {
                max_cones.push(sigma.clone());
            }
        }
        Ok(Fan {
            dim: self.dim,
            rays,
            max_cones,
        })
    }
}

fn same_set(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.contains(x))
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// A map of fans induced by a lattice map `N_source -> N_target` sending
/// every source maximal cone into one target maximal cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FanMorphism {
    pub source: Fan,
    pub target: Fan,
    /// Columns are the images of the source basis vectors.
    pub lattice_map: IntMatrix,
    /// Target maximal cone of each source maximal cone.
    pub cone_assignment: Vec<usize>,
    /// Covering degree over each target stratum.
    pub multiplicity: u64,
    /// `[N_target : image of N_source]`.
    pub lattice_index: u64,
}

impl FanMorphism {
    pub fn new(
        source: Fan,
        target: Fan,
        lattice_map: IntMatrix,
        multiplicity: u64,
    ) -> Result<Self> {
        if source.dim != target.dim
            || lattice_map.len() != target.dim
            || lattice_map.iter().any(|r| r.len() != source.dim)
        {
            return Err(Error::InvalidInput(
                "lattice map shape does not match the fans".into(),
            ));
        }
        let index = lattice::det(&lattice_map).unsigned_abs();
        if index == 0 || multiplicity == 0 {
            return Err(Error::InvalidInput(
                "lattice map must be injective and multiplicity positive".into(),
            ));
        }
        let frames = target.dual_frames()?;
        let mut cone_assignment = Vec::with_capacity(source.max_cones.len());
        for (k, sigma) in source.max_cones.iter().enumerate() {
            let images: Vec<Vec<i64>> = sigma
                .iter()
                .map(|&r| lattice::mat_vec(&lattice_map, &source.rays[r]))
                .collect();
            let hosts: Vec<usize> = frames
                .iter()
                .filter(|f| {
                    images
                        .iter()
                        .all(|v| f.forms.iter().all(|row| lattice::dot(row, v) >= 0))
                })
                .map(|f| f.cone)
                .collect();
            match hosts.as_slice() {
                [only] => cone_assignment.push(*only),
                _ => return Err(Error::Straddle(k)),
            }
        }
        Ok(Self {
            source,
            target,
            lattice_map,
            cone_assignment,
            multiplicity,
            lattice_index: index as u64,
        })
    }

    pub fn identity(fan: &Fan) -> Self {
        Self {
            source: fan.clone(),
            target: fan.clone(),
            lattice_map: lattice::identity(fan.dim),
            cone_assignment: (0..fan.max_cones.len()).collect(),
            multiplicity: 1,
            lattice_index: 1,
        }
    }

    /// Morphism from a refinement to a coarser fan on the same lattice.
    pub fn refinement(fine: &Fan, coarse: &Fan) -> Result<Self> {
        Self::new(fine.clone(), coarse.clone(), lattice::identity(fine.dim), 1)
    }

    pub fn is_refinement(&self) -> bool {
        self.lattice_index == 1
            && self.multiplicity == 1
            && self.lattice_map == lattice::identity(self.source.dim)
    }

    /// Source maximal cones assigned to target cone `k`.
    pub fn preimage(&self, k: usize) -> Vec<usize> {
        (0..self.cone_assignment.len())
            .filter(|&i| self.cone_assignment[i] == k)
            .collect()
    }
}

pub fn refinement_morphism(fine: &Fan, coarse: &Fan) -> Result<FanMorphism> {
    FanMorphism::refinement(fine, coarse)
}

/// Expresses the dual coordinates `v` of the ALE lattice in terms of the
/// coordinates `u` of the covering torus: row `i` is `v_i` as a form in `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSubstitution {
    pub rows: IntMatrix,
}

impl WeightSubstitution {
    /// Rewrites a form in the `v` coordinates as a form in `u`.
    pub fn apply(&self, form: &[i64]) -> Vec<i64> {
        lattice::row_mat(form, &self.rows)
    }
}

/// Minimal resolution of `C^2 / Z_n` for the action `(zeta x, zeta^-1 y)`:
/// rays `(k, 1)` for `k = 0..=n`, cones between consecutive rays, and the
/// substitution `v_1 = n u_1`, `v_2 = u_1 + u_2`.
pub fn ale_fan(n: usize) -> Result<(Fan, WeightSubstitution)> {
    if n < 1 {
        return Err(Error::InvalidInput("ALE fan needs n >= 1".into()));
    }
    let rays = (0..=n as i64).map(|k| vec![k, 1]).collect();
    let max_cones = (0..n).map(|k| vec![k, k + 1]).collect();
    let fan = Fan::new(2, rays, max_cones)?;
    let subst = WeightSubstitution {
        rows: vec![vec![n as i64, 0], vec![1, 1]],
    };
    Ok((fan, subst))
}

/// Tangent weights `(x_1, x_2)` in `u` coordinates at each fixed point of the
/// ALE resolution.
pub fn ale_tangent_weights(n: usize) -> Result<Vec<[Vec<i64>; 2]>> {
    let (fan, subst) = ale_fan(n)?;
    fan.dual_frames()?
        .into_iter()
        .map(|f| Ok([subst.apply(&f.forms[0]), subst.apply(&f.forms[1])]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2() -> Fan {
        Fan::affine(2)
    }

    #[test]
    fn p2_is_valid() {
        assert!(Fan::projective(2).validate().is_empty());
        assert!(Fan::projective(3).validate().is_empty());
        assert!(Fan::projective(1)
            .product(&Fan::projective(1))
            .validate()
            .is_empty());
    }

    #[test]
    fn diagnostics() {
        let f = Fan {
            dim: 2,
            rays: vec![vec![1, 0], vec![0, 2]],
            max_cones: vec![vec![0, 1]],
        };
        assert_eq!(f.validate(), vec!["ray 1 not primitive".to_string()]);
        let f = Fan {
            dim: 2,
            rays: vec![vec![1, 0], vec![1, 2]],
            max_cones: vec![vec![0, 1]],
        };
        assert_eq!(
            f.validate(),
            vec!["cone 0 not smooth, |det| = 2".to_string()]
        );
    }

    #[test]
    fn overlapping_cones_rejected() {
        // <e1, e2> and <e1 + e2, -e1 + 2 e2> overlap in their interiors
        let f = Fan {
            dim: 2,
            rays: vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![-1, 2]],
            max_cones: vec![vec![0, 1], vec![2, 3]],
        };
        let d = lattice::det(&f.generators(1));
        assert_eq!(d.abs(), 3);
        let f = Fan {
            dim: 2,
            rays: vec![
                vec![1, 0],
                vec![0, 1],
                vec![1, 1],
                vec![0, -1],
                vec![-1, -1],
            ],
            max_cones: vec![vec![0, 1], vec![2, 1], vec![3, 4]],
        };
        assert!(f.validate().iter().any(|m| m.contains("common face")));
    }

    #[test]
    fn dual_frames() {
        assert_eq!(
            c2().dual_frame(0).unwrap().forms,
            vec![vec![1, 0], vec![0, 1]]
        );
        let f = Fan::new(2, vec![vec![1, 0], vec![1, 1]], vec![vec![0, 1]]).unwrap();
        assert_eq!(
            f.dual_frame(0).unwrap().forms,
            vec![vec![1, -1], vec![0, 1]]
        );
    }

    #[test]
    fn blow_up_of_plane() {
        let b = c2().star_subdivide(&[0, 1]).unwrap();
        assert_eq!(b.rays[2], vec![1, 1]);
        assert_eq!(b.max_cones, vec![vec![2, 1], vec![0, 2]]);
        assert!(b.validate().is_empty());
        assert_eq!(c2().star_subdivide(&[1]).unwrap(), c2());
        assert!(matches!(
            c2().star_subdivide(&[0, 5]),
            Err(Error::ConeNotFound(_))
        ));
    }

    #[test]
    fn subdivided_p2() {
        let p2 = Fan::projective(2);
        let b = p2.star_subdivide(&p2.max_cones[0].clone()).unwrap();
        assert_eq!(b.num_max_cones(), 4);
        assert!(b.validate().is_empty());
        let bb = b.star_subdivide(&b.max_cones[0].clone()).unwrap();
        assert_eq!(bb.num_max_cones(), 5);
        let m = refinement_morphism(&bb, &p2).unwrap();
        assert_eq!(m.cone_assignment.iter().filter(|&&k| k == 0).count(), 3);
        let p3 = Fan::projective(3);
        let edge = p3.star_subdivide(&[0, 1]).unwrap();
        assert!(edge.validate().is_empty());
        assert_eq!(edge.num_max_cones(), 6);
    }

    #[test]
    fn refinement_assignments() {
        let b = c2().star_subdivide(&[0, 1]).unwrap();
        let m = refinement_morphism(&b, &c2()).unwrap();
        assert_eq!(m.cone_assignment, vec![0, 0]);
        assert!(m.is_refinement());
        let id = refinement_morphism(&c2(), &c2()).unwrap();
        assert_eq!(id, FanMorphism::identity(&c2()));
        let p2 = Fan::projective(2);
        assert!(matches!(
            refinement_morphism(&p2, &c2()),
            Err(Error::Straddle(_))
        ));
    }

    #[test]
    fn ale_weights() {
        let w = ale_tangent_weights(1).unwrap();
        assert_eq!(w, vec![[vec![0, 1], vec![1, 0]]]);
        let w = ale_tangent_weights(2).unwrap();
        assert_eq!(
            w,
            vec![[vec![-1, 1], vec![2, 0]], [vec![0, 2], vec![1, -1]]]
        );
        for n in 1..=6 {
            let (fan, _) = ale_fan(n).unwrap();
            assert_eq!(fan.num_max_cones(), n);
            for (k, [x1, x2]) in ale_tangent_weights(n).unwrap().into_iter().enumerate() {
                let k = k as i64;
                let n = n as i64;
                assert_eq!(x1, vec![k + 1 - n, k + 1]);
                assert_eq!(x2, vec![n - k, -k]);
                assert_eq!(vec![x1[0] + x2[0], x1[1] + x2[1]], vec![1, 1]);
            }
        }
        assert!(ale_fan(0).is_err());
    }

    #[test]
    fn json_round_trip_and_validation_on_load() {
        let p2 = Fan::projective(2);
        assert_eq!(Fan::from_json(&p2.to_json()).unwrap(), p2);
        let bad = r#"{"dim": 2, "rays": [[1,0],[0,2]], "max_cones": [[0,1]]}"#;
        assert!(matches!(Fan::from_json(bad), Err(Error::InvalidFan(_))));
        assert!(Fan::from_json("{").is_err());
    }
}
