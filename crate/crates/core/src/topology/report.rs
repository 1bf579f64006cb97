//! Zero–saddle–center pairing and point tracking between snapshots.

use serde::{Deserialize, Serialize};

use super::stagnation::{FlowClass, StagnationPoint};
use super::zeros::HusimiZero;
use crate::grid::PhaseSpaceGrid;

/// One row of the topology dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyRecord {
    pub t: f64,
    pub kind: String,
    pub x: f64,
    pub p: f64,
    pub index: i32,
    pub eigenvalues: Vec<[f64; 2]>,
    /// Position of the partner in the same record list.
    pub paired_with: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroPairing {
    pub zero: usize,
    /// Nearest saddle and its distance in grid cells.
    pub nearest_saddle: Option<(usize, f64)>,
    /// Index +1 stagnation point matched to this zero, with its distance.
    pub companion: Option<(usize, f64)>,
    pub saddle_within_cell: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingReport {
    pub t: f64,
    pub pairing_radius: f64,
    pub zeros: Vec<ZeroPairing>,
    pub zeros_without_saddle: usize,
    pub unpaired_zeros: usize,
    /// Saddles farther than the pairing radius from every zero.
    pub orphan_saddles: Vec<usize>,
}

impl PairingReport {
    pub fn records(&self, zeros: &[HusimiZero], points: &[StagnationPoint]) -> Vec<TopologyRecord> {
        let offset = zeros.len();
        let mut partner_of_point = vec![None; points.len()];
        let mut out = Vec::with_capacity(zeros.len() + points.len());
        for (k, z) in zeros.iter().enumerate() {
            let companion = self.zeros.get(k).and_then(|zp| zp.companion).map(|(s, _)| s);
            if let Some(s) = companion {
                partner_of_point[s] = Some(k);
            }
            out.push(TopologyRecord {
                t: z.t,
                kind: "zero".into(),
                x: z.x,
                p: z.p,
                index: z.winding,
                eigenvalues: Vec::new(),
                paired_with: companion.map(|s| s + offset),
            });
        }
        for (s, pt) in points.iter().enumerate() {
            out.push(TopologyRecord {
                t: pt.t,
                kind: pt.class.name().into(),
                x: pt.x,
                p: pt.p,
                index: pt.index,
                eigenvalues: pt.eigenvalues.iter().map(|&(re, im)| [re, im]).collect(),
                paired_with: partner_of_point[s],
            });
        }
        out
    }
}

fn is_companion(p: &StagnationPoint) -> bool {
    p.converged && p.index == 1 && p.class != FlowClass::Degenerate
}

/// For every zero: its nearest saddle and a one-to-one companion among the
/// index +1 points within `pairing_radius` cells, matched closest first.
pub fn zero_saddle_center_report(
    zeros: &[HusimiZero],
    points: &[StagnationPoint],
    grid: &PhaseSpaceGrid,
    pairing_radius: f64,
) -> PairingReport {
    let t = zeros.first().map(|z| z.t).or(points.first().map(|p| p.t)).unwrap_or(0.0);
    let dist = |z: &HusimiZero, p: &StagnationPoint| grid.cell_distance((z.x, z.p), (p.x, p.p));
    let saddles: Vec<usize> = (0..points.len()).filter(|&s| points[s].class == FlowClass::Saddle).collect();

    let mut pairs = Vec::new();
    for (k, z) in zeros.iter().enumerate() {
        for (s, p) in points.iter().enumerate() {
            let d = dist(z, p);
            if is_companion(p) && d <= pairing_radius {
                pairs.push((d, k, s));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut companion = vec![None; zeros.len()];
    let mut taken = vec![false; points.len()];
    for (d, k, s) in pairs {
        if companion[k].is_none() && !taken[s] {
            companion[k] = Some((s, d));
            taken[s] = true;
        }
    }

    let pairings: Vec<ZeroPairing> = zeros
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let nearest_saddle = saddles
                .iter()
                .map(|&s| (s, dist(z, &points[s])))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            ZeroPairing {
                zero: k,
                nearest_saddle,
                companion: companion[k],
                saddle_within_cell: nearest_saddle.is_some_and(|(_, d)| d <= 1.0),
            }
        })
        .collect();
    let orphan_saddles = saddles
        .into_iter()
        .filter(|&s| zeros.iter().all(|z| dist(z, &points[s]) > pairing_radius))
        .collect();
    PairingReport {
        t,
        pairing_radius,
        zeros_without_saddle: pairings.iter().filter(|p| !p.saddle_within_cell).count(),
        unpaired_zeros: pairings.iter().filter(|p| p.companion.is_none()).count(),
        zeros: pairings,
        orphan_saddles,
    }
}

/// Matches each point of `prev` to the nearest point of the same class in
/// `next` when the two are mutual nearest neighbours within `max_step` cells.
pub fn track_points(
    prev: &[StagnationPoint],
    next: &[StagnationPoint],
    grid: &PhaseSpaceGrid,
    max_step: f64,
) -> Vec<Option<usize>> {
    let nearest = |a: &StagnationPoint, set: &[StagnationPoint]| {
        set.iter()
            .enumerate()
            .filter(|(_, b)| b.class == a.class)
            .map(|(k, b)| (k, grid.cell_distance((a.x, a.p), (b.x, b.p))))
            .min_by(|u, v| u.1.total_cmp(&v.1))
    };
    prev.iter()
        .enumerate()
        .map(|(k, a)| {
            let (m, d) = nearest(a, next)?;
            let back = nearest(&next[m], prev)?.0;
            (d <= max_step && back == k).then_some(m)
        })
        .collect()
}
