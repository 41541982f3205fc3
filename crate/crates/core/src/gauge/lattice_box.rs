//! Finite boxes Λ = corner + [0, L_1 − 1] × … × [0, L_d − 1] with free boundary.

use serde::Serialize;

use crate::error::GaugeError;
use crate::lattice::{DirectedEdge, LatticeVector, Step};
use crate::loops::{check_dim, Loop, LoopSequence};
use crate::ops::positive_plaquette;

/// A positive edge id and whether it is traversed backwards.
pub type EdgeRef = (usize, bool);

/// A box of vertices together with its positive edges and positive plaquettes.
#[derive(Clone, Debug)]
pub struct LatticeBox {
    corner: LatticeVector,
    sides: Vec<usize>,
    edges: Vec<DirectedEdge>,
    /// `slot[vertex_index * d + axis − 1]` is the id of the positive edge leaving the vertex.
    slot: Vec<Option<usize>>,
    plaquettes: Vec<[EdgeRef; 4]>,
    plaquette_loops: Vec<Loop>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxShape {
    pub corner: Vec<i32>,
    pub sides: Vec<usize>,
}

impl LatticeBox {
    /// The cube with `side` vertices per axis and the given lower corner.
    pub fn cube(dim: usize, side: usize, corner: LatticeVector) -> Result<Self, GaugeError> {
        LatticeBox::new(corner, vec![side; dim])
    }

    pub fn new(corner: LatticeVector, sides: Vec<usize>) -> Result<Self, GaugeError> {
        let d = sides.len();
        check_dim(d)?;
        if corner.dim() != d {
            return Err(GaugeError::InvalidParameter(format!("corner {corner} does not have {d} coordinates")));
        }
        if sides.iter().any(|&l| l < 2) {
            return Err(GaugeError::InvalidParameter("every side needs at least 2 vertices".into()));
        }
        let volume: usize = sides.iter().product();
        let mut b = LatticeBox {
            corner,
            sides,
            edges: Vec::new(),
            slot: vec![None; volume * d],
            plaquettes: Vec::new(),
            plaquette_loops: Vec::new(),
        };
        for idx in 0..volume {
            let v = b.vertex_at(idx);
            for a in 1..=d {
                let e = DirectedEdge::new(v.clone(), Step::plus(a));
                if b.contains(&e.head()) {
                    b.slot[idx * d + a - 1] = Some(b.edges.len());
                    b.edges.push(e);
                }
            }
        }
        for idx in 0..volume {
            let v = b.vertex_at(idx);
            for a in 1..=d {
                for c in a + 1..=d {
                    let p = positive_plaquette(&v, a, c);
                    if p.vertices().iter().all(|w| b.contains(w)) {
                        let refs = b.compile_loop(&p).expect("plaquette inside the box");
                        b.plaquettes.push([refs[0], refs[1], refs[2], refs[3]]);
                        b.plaquette_loops.push(p);
                    }
                }
            }
        }
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[usize] {
        &self.sides
    }

    pub fn corner(&self) -> &LatticeVector {
        &self.corner
    }

    pub fn shape(&self) -> BoxShape {
        BoxShape { corner: self.corner.coords().to_vec(), sides: self.sides.clone() }
    }

    pub fn volume(&self) -> usize {
        self.sides.iter().product()
    }

    /// E⁺_Λ in id order.
    pub fn edges(&self) -> &[DirectedEdge] {
        &self.edges
    }

    /// 𝒫⁺_Λ as edge references, in the same order as [`LatticeBox::plaquette_loops`].
    pub fn plaquettes(&self) -> &[[EdgeRef; 4]] {
        &self.plaquettes
    }

    pub fn plaquette_loops(&self) -> &[Loop] {
        &self.plaquette_loops
    }

    /// Σ_a (L_a − 1) ∏_{b≠a} L_b.
    pub fn expected_edge_count(&self) -> usize {
        (0..self.dim())
            .map(|a| (0..self.dim()).map(|b| if a == b { self.sides[b] - 1 } else { self.sides[b] }).product::<usize>())
            .sum()
    }

    /// Σ_{a<b} (L_a − 1)(L_b − 1) ∏_{c≠a,b} L_c.
    pub fn expected_plaquette_count(&self) -> usize {
        let d = self.dim();
        let mut total = 0;
        for a in 0..d {
            for b in a + 1..d {
                total += (0..d)
                    .map(|c| if c == a || c == b { self.sides[c] - 1 } else { self.sides[c] })
                    .product::<usize>();
            }
        }
        total
    }

    pub fn contains(&self, v: &LatticeVector) -> bool {
        self.local(v).is_some()
    }

    fn local(&self, v: &LatticeVector) -> Option<usize> {
        if v.dim() != self.dim() {
            return None;
        }
        let mut idx = 0usize;
        for ((&x, &c), &l) in v.coords().iter().zip(self.corner.coords()).zip(&self.sides).rev() {
            let off = x - c;
            if off < 0 || off as usize >= l {
                return None;
            }
            idx = idx * l + off as usize;
        }
        Some(idx)
    }

    fn vertex_at(&self, mut idx: usize) -> LatticeVector {
        let coords: Vec<i32> = self
            .sides
            .iter()
            .zip(self.corner.coords())
            .map(|(&l, &c)| {
                let off = idx % l;
                idx /= l;
                c + off as i32
            })
            .collect();
        LatticeVector::new(&coords)
    }

    pub fn edge_ref(&self, e: &DirectedEdge) -> Result<EdgeRef, GaugeError> {
        let p = e.positive();
        let id = self
            .local(&p.base)
            .and_then(|idx| self.slot[idx * self.dim() + p.axis() - 1])
            .ok_or_else(|| GaugeError::EdgeOutsideBox { edge: format!("{}{}", e.base, e.step) })?;
        Ok((id, !e.is_positive()))
    }

    /// Edge references of a loop in traversal order.
    pub fn compile_loop(&self, l: &Loop) -> Result<Vec<EdgeRef>, GaugeError> {
        l.edges().iter().map(|e| self.edge_ref(e)).collect()
    }

    /// Checks that every vertex within graph distance 1 of the loops lies in the box.
    pub fn check_margin(&self, s: &LoopSequence) -> Result<(), GaugeError> {
        if s.dim() != self.dim() {
            return Err(GaugeError::InvalidParameter(format!(
                "sequence dimension {} does not match box dimension {}",
                s.dim(),
                self.dim()
            )));
        }
        for v in s.vertices() {
            for a in 1..=self.dim() {
                for w in [v.shifted(Step::plus(a)), v.shifted(Step::minus(a))] {
                    if !self.contains(&w) {
                        return Err(GaugeError::OutsideMargin { vertex: w.to_string() });
                    }
                }
            }
        }
        Ok(())
    }

    /// The translate of `s` whose bounding box sits in the middle of this box.
    pub fn centered(&self, s: &LoopSequence) -> LoopSequence {
        if s.is_null() {
            return s.clone();
        }
        let d = self.dim();
        let verts = s.vertices();
        let shift: Vec<i32> = (0..d)
            .map(|a| {
                let lo = verts.iter().map(|v| v.coords()[a]).min().unwrap();
                let hi = verts.iter().map(|v| v.coords()[a]).max().unwrap();
                let target = self.corner.coords()[a] + (self.sides[a] as i32 - 1 - (hi - lo)) / 2;
                target - lo
            })
            .collect();
        s.translated(&LatticeVector::new(&shift))
    }
}
