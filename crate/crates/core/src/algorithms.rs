//! Greedy edge-walks over MECs: turn phase, edge phase, Greedy CIM, Skeletal
//! Greedy CIM and the recurrent phased variant.
//!
//! Every phase restarts candidate enumeration after each applied move and
//! only accepts strictly larger BIC. Candidates are scored in parallel but
//! the winner is chosen in enumeration order, so a run is deterministic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ci_tests::{pc_skeleton, DEFAULT_ALPHA};
use crate::error::{Error, Result};
use crate::graph::{consistent_extension, mec_of, Dag, Mec};
use crate::imset::ImsetDelta;
use crate::moves::{default_cap, edge_candidates, tree_candidates, turn_candidates, verify_dags, Candidate, MoveKind, MoveParams};
use crate::scoring::{score_dag, LocalScoreCache, SufficientStats};

/// Applied moves between sampled full-imset audits.
pub const AUDIT_EVERY: u64 = 10;

/// Candidates scored together before first-improvement checks for a winner.
const CHUNK: usize = 32;

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    FirstImprovement,
    BestImprovement,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    #[default]
    PaperFaithful,
    RecurrentPhased,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    GreedyCim,
    SkeletalGreedyCim,
    RecurrentCim,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub strategy: Strategy,
    pub phase_mode: PhaseMode,
    /// Largest `|S|` enumerated around a node; `None` picks [`default_cap`].
    pub subset_cap: Option<usize>,
    /// Adds shifts and splits to the turn phase when the skeleton's
    /// components are all trees or cycles.
    pub tree_moves_enabled: bool,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            strategy: Strategy::FirstImprovement,
            phase_mode: PhaseMode::PaperFaithful,
            subset_cap: None,
            tree_moves_enabled: false,
            alpha: DEFAULT_ALPHA,
            seed: 0,
        }
    }
}

impl SearchConfig {
    fn cap(&self, p: usize) -> Option<usize> {
        self.subset_cap.or_else(|| default_cap(p))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub phase: String,
    pub kind: MoveKind,
    pub params: MoveParams,
    pub delta: ImsetDelta,
    pub score_before: f64,
    pub score_after: f64,
    pub score_delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseRecord {
    pub label: String,
    /// Index into `steps` of the phase's first move.
    pub first_step: usize,
    pub moves: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SearchTrace {
    pub steps: Vec<TraceStep>,
    pub phases: Vec<PhaseRecord>,
    pub initial_score: f64,
    pub final_score: f64,
}

impl SearchTrace {
    fn append(&mut self, other: SearchTrace) {
        let offset = self.steps.len();
        self.steps.extend(other.steps);
        self.phases.extend(other.phases.into_iter().map(|mut ph| {
            ph.first_step += offset;
            ph
        }));
        self.final_score = other.final_score;
    }

    pub fn is_monotone(&self) -> bool {
        self.steps.iter().all(|s| s.score_after > s.score_before)
            && self.steps.windows(2).all(|w| w[0].score_after == w[1].score_before)
    }
}

/// Which candidates a phase considers.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Family {
    Turn,
    Edge,
    Additions,
    Deletions,
}

impl Family {
    fn label(self) -> &'static str {
        match self {
            Family::Turn => "turn",
            Family::Edge => "edge",
            Family::Additions => "forward",
            Family::Deletions => "backward",
        }
    }
}

struct Walker<'a> {
    stats: &'a SufficientStats,
    config: &'a SearchConfig,
    cache: LocalScoreCache,
    applied: u64,
}

impl<'a> Walker<'a> {
    fn new(stats: &'a SufficientStats, config: &'a SearchConfig) -> Self {
        Walker {
            stats,
            config,
            cache: LocalScoreCache::new(),
            applied: 0,
        }
    }

    fn candidates(&self, mec: &Mec, dag: &Dag, fam: Family) -> Vec<Candidate> {
        let cap = self.config.cap(mec.p());
        match fam {
            Family::Turn => {
                let mut c = turn_candidates(mec, dag, cap);
                if self.config.tree_moves_enabled {
                    if let Ok(t) = tree_candidates(mec, dag) {
                        let seen: std::collections::HashSet<Mec> = c.iter().map(|x| x.target.clone()).collect();
                        c.extend(t.into_iter().filter(|x| !seen.contains(&x.target)));
                    }
                }
                c
            }
            Family::Edge => edge_candidates(mec, dag, cap),
            Family::Additions => edge_candidates(mec, dag, cap).into_iter().filter(|c| c.mv.edge_change() > 0).collect(),
            Family::Deletions => edge_candidates(mec, dag, cap).into_iter().filter(|c| c.mv.edge_change() < 0).collect(),
        }
    }

    fn score_all(&self, cands: &[Candidate]) -> Result<Vec<f64>> {
        cands
            .par_iter()
            .map(|c| score_dag(&c.target_dag, self.stats, &self.cache))
            .collect()
    }

    /// Index and score of the move to apply, or `None` at a fixpoint.
    fn pick(&self, cands: &[Candidate], current: f64, strategy: Strategy) -> Result<Option<(usize, f64)>> {
        match strategy {
            Strategy::FirstImprovement => {
                for (k, chunk) in cands.chunks(CHUNK).enumerate() {
                    let scores = self.score_all(chunk)?;
                    if let Some(i) = scores.iter().position(|&s| s > current) {
                        return Ok(Some((k * CHUNK + i, scores[i])));
                    }
                }
                Ok(None)
            }
            Strategy::BestImprovement => {
                let scores = self.score_all(cands)?;
                let mut best: Option<(usize, f64)> = None;
                for (i, &s) in scores.iter().enumerate() {
                    if s > best.map_or(current, |b| b.1) {
                        best = Some((i, s));
                    }
                }
                Ok(best)
            }
        }
    }

    fn audit(&mut self, from: &Dag, cand: &Candidate) -> Result<()> {
        self.applied += 1;
        if (self.applied + self.config.seed) % AUDIT_EVERY == 0 && !verify_dags(from, &cand.target_dag, &cand.mv.delta) {
            return Err(Error::InconsistentImset(format!(
                "applied {:?} move does not match the recomputed full imsets",
                cand.mv.kind
            )));
        }
        Ok(())
    }

    fn phase(&mut self, mec: Mec, fam: Family, strategy: Strategy) -> Result<(Mec, SearchTrace)> {
        let mut dag = consistent_extension(&mec).ok_or(Error::NotRealizable)?;
        let mut mec = mec;
        let mut score = score_dag(&dag, self.stats, &self.cache)?;
        let mut trace = SearchTrace {
            initial_score: score,
            final_score: score,
            phases: vec![PhaseRecord {
                label: fam.label().into(),
                first_step: 0,
                moves: 0,
            }],
            ..Default::default()
        };
        loop {
            let cands = self.candidates(&mec, &dag, fam);
            let Some((k, new_score)) = self.pick(&cands, score, strategy)? else {
                break;
            };
            let cand = cands.into_iter().nth(k).expect("picked index in range");
            self.audit(&dag, &cand)?;
            log::debug!("{} {:?}: {score} -> {new_score}", fam.label(), cand.mv.kind);
            trace.steps.push(TraceStep {
                phase: fam.label().into(),
                kind: cand.mv.kind,
                params: cand.mv.params,
                delta: cand.mv.delta,
                score_before: score,
                score_after: new_score,
                score_delta: new_score - score,
            });
            mec = cand.target;
            dag = cand.target_dag;
            score = new_score;
        }
        trace.phases[0].moves = trace.steps.len();
        trace.final_score = score;
        Ok((mec, trace))
    }
}

fn check_start(mec: &Mec, stats: &SufficientStats) -> Result<()> {
    if mec.p() != stats.p() {
        return Err(Error::InvalidArgument(format!(
            "MEC has {} nodes but data has {}",
            mec.p(),
            stats.p()
        )));
    }
    Ok(())
}

/// Turn pairs (and optionally shifts and splits) to a fixpoint. The skeleton
/// never changes.
pub fn turn_phase(mec: &Mec, stats: &SufficientStats, config: &SearchConfig) -> Result<(Mec, SearchTrace)> {
    check_start(mec, stats)?;
    Walker::new(stats, config).phase(mec.clone(), Family::Turn, config.strategy)
}

/// Edge pairs in both directions to a fixpoint.
pub fn edge_phase(mec: &Mec, stats: &SufficientStats, config: &SearchConfig) -> Result<(Mec, SearchTrace)> {
    check_start(mec, stats)?;
    Walker::new(stats, config).phase(mec.clone(), Family::Edge, config.strategy)
}

/// Alternate `phases` from `start` until a full round applies no move.
fn cycle_phases(
    w: &mut Walker<'_>,
    start: Mec,
    phases: &[(Family, Strategy)],
) -> Result<(Mec, SearchTrace)> {
    let mut mec = start;
    let mut trace: Option<SearchTrace> = None;
    loop {
        let mut changed = false;
        for &(fam, strategy) in phases {
            let (next, t) = w.phase(mec, fam, strategy)?;
            changed |= !t.steps.is_empty();
            mec = next;
            match trace.as_mut() {
                Some(tr) => tr.append(t),
                None => trace = Some(t),
            }
        }
        if !changed {
            break;
        }
    }
    Ok((mec, trace.expect("at least one phase ran")))
}

/// Greedy CIM from the empty graph: edge phase, then turn phase, repeated
/// until neither moves. With [`PhaseMode::RecurrentPhased`] this runs
/// [`recurrent_phased_greedy_cim`] instead.
pub fn greedy_cim(stats: &SufficientStats, config: &SearchConfig) -> Result<(Mec, SearchTrace)> {
    if config.phase_mode == PhaseMode::RecurrentPhased {
        return recurrent_phased_greedy_cim(stats, config);
    }
    let mut w = Walker::new(stats, config);
    let s = config.strategy;
    cycle_phases(&mut w, Mec::empty(stats.p()), &[(Family::Edge, s), (Family::Turn, s)])
}

/// Skeletal Greedy CIM: PC skeleton at `config.alpha`, oriented low to high
/// index, then the turn phase.
pub fn skeletal_greedy_cim(stats: &SufficientStats, config: &SearchConfig) -> Result<(Mec, SearchTrace)> {
    let skel = pc_skeleton(stats, config.alpha)?;
    let start = mec_of(&Dag::low_to_high(&skel));
    turn_phase(&start, stats, config)
}

/// Forward (edge additions), backward (edge removals) and turn phases, each
/// best-improvement, cycled until a full round applies no move.
pub fn recurrent_phased_greedy_cim(stats: &SufficientStats, config: &SearchConfig) -> Result<(Mec, SearchTrace)> {
    let mut w = Walker::new(stats, config);
    let b = Strategy::BestImprovement;
    cycle_phases(
        &mut w,
        Mec::empty(stats.p()),
        &[(Family::Additions, b), (Family::Deletions, b), (Family::Turn, b)],
    )
}

pub fn discover(algo: Algorithm, stats: &SufficientStats, config: &SearchConfig) -> Result<(Mec, SearchTrace)> {
    match algo {
        Algorithm::GreedyCim => greedy_cim(stats, config),
        Algorithm::SkeletalGreedyCim => skeletal_greedy_cim(stats, config),
        Algorithm::RecurrentCim => recurrent_phased_greedy_cim(stats, config),
    }
}
