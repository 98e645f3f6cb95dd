//! Monte-Carlo evaluation of a scenario with and without the surface.
//!
//! Every realization draws its channels from seeds derived from the master
//! seed and fixed indices (link kind, operator, UE, realization), never from
//! the sweep point or the thread that runs it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{RisArray, ScatteringState};
use crate::channels::{derive_seed, effective_channel, los_channel, CMatrix, ChannelSet};
use crate::engine::config::{PrecoderKind, Role, SweepSpec};
use crate::engine::scenario::Scenario;
use crate::precoding::{condition_number, dbm_to_w, link_metrics, most_correlated_pair, mrt_precoder, zf_power_penalty, zf_precoder, PrecodeResult};
use crate::tuning::{evaluate_off_frequency, tune, TuningResult};
use crate::{Error, Result, C64};

const LINK_DIRECT: u64 = 0;
const LINK_ILLUMINATION: u64 = 1;
const LINK_RERADIATION: u64 = 2;

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStat {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanStat {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: 0.0, stderr: 0.0 };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeMetrics {
    pub id: String,
    pub operator: String,
    pub role: Role,
    pub se_ris: MeanStat,
    pub se_noris: MeanStat,
    /// Mean linear SINR.
    pub sinr_ris: f64,
    pub sinr_noris: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningDiagnostics {
    /// Fraction of elements whose ideal phase was out of the varactor's reach.
    pub clamped_fraction: MeanStat,
    /// Realized over ideal target objective.
    pub realization_efficiency: MeanStat,
    pub converged_fraction: f64,
    pub mean_sweeps: f64,
    /// Condition number of the owner's stacked effective channel.
    pub owner_condition: MeanStat,
    /// Condition number of the owner's stacked surface-only channel.
    pub ris_path_condition: MeanStat,
    /// Realizations whose stacks were numerically singular (excluded above).
    pub singular_realizations: usize,
    pub correlation_threshold: f64,
    /// Mean condition number above the threshold.
    pub correlated: bool,
    /// Most correlated owner UEs in the first realization.
    pub correlated_pair: Option<[String; 2]>,
    /// Worst per-UE zero-forcing SNR loss of the owner (dB).
    pub zf_penalty_db: Option<MeanStat>,
}

/// Aggregate outcome of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseMetrics {
    pub n_elements: usize,
    pub ris_position: [f64; 3],
    pub realizations: usize,
    pub ues: Vec<UeMetrics>,
    pub sumse_target_ris: MeanStat,
    pub sumse_target_noris: MeanStat,
    pub sumse_nontarget_ris: MeanStat,
    pub sumse_nontarget_noris: MeanStat,
    /// Paired per-realization loss `noris - ris` of the non-target sum SE.
    pub nontarget_loss: MeanStat,
    /// `1 - sumse_nontarget_ris / sumse_nontarget_noris` on the means (0 without non-targets).
    pub degradation_ratio: f64,
    pub tuning: Option<TuningDiagnostics>,
}

struct Realization {
    se_ris: Vec<f64>,
    se_noris: Vec<f64>,
    sinr_ris: Vec<f64>,
    sinr_noris: Vec<f64>,
    tuning: Option<RealizedTuning>,
}

struct RealizedTuning {
    clamped_fraction: f64,
    efficiency: f64,
    converged: bool,
    sweeps: usize,
    owner_condition: f64,
    ris_path_condition: f64,
    pair: Option<(usize, usize)>,
    zf_penalty_db: Option<f64>,
}

struct Served {
    se: Vec<f64>,
    sinr: Vec<f64>,
    precoder: Option<(Vec<usize>, PrecodeResult)>,
}

/// Precode on `design`, score on `actual`. UEs whose design channel is
/// identically zero are not scheduled and get zero SE.
fn serve(design: &CMatrix, actual: &CMatrix, kind: PrecoderKind, power_w: f64, noise_w: f64, external: &[f64]) -> Result<Served> {
    let k = design.nrows();
    let served: Vec<usize> = (0..k).filter(|&u| design.row(u).iter().any(|z| *z != C64::new(0.0, 0.0))).collect();
    let mut se = vec![0.0; k];
    let mut sinr = vec![0.0; k];
    if served.is_empty() {
        return Ok(Served { se, sinr, precoder: None });
    }
    let h = design.select_rows(&served);
    let pre = match kind {
        PrecoderKind::Mrt => mrt_precoder(&h, power_w)?,
        PrecoderKind::Zf => zf_precoder(&h, power_w)?,
    };
    let ext: Vec<f64> = served.iter().map(|&u| external[u]).collect();
    let m = link_metrics(&actual.select_rows(&served), &pre, noise_w, &ext)?;
    for (i, &u) in served.iter().enumerate() {
        se[u] = m.se[i];
        sinr[u] = m.sinr[i];
    }
    Ok(Served {
        se,
        sinr,
        precoder: Some((served, pre)),
    })
}

/// Channels of every operator's UEs at its own carrier.
pub(crate) fn synthesize(s: &Scenario, array: &RisArray, r: usize) -> Result<Vec<ChannelSet>> {
    let c = &s.config;
    let seed = c.seed;
    let fading = c.channel.fading;
    let elements: &[crate::Vec3] = if c.ris.enabled { &array.positions } else { &[] };
    c.operators
        .iter()
        .enumerate()
        .map(|(o, op)| {
            let f = op.carrier_hz;
            let bs = s.bs_node(o)?.antenna_positions();
            let m = bs.len();
            let k = op.ues.len();
            let mut direct = CMatrix::zeros(k, m);
            let mut ris_to_ue = CMatrix::zeros(k, elements.len());
            for (u, ue) in op.ues.iter().enumerate() {
                let pos = [crate::Vec3::from(ue.position)];
                let d = los_channel(&bs, &pos, f, fading, derive_seed(seed, &[LINK_DIRECT, o as u64, u as u64, r as u64]))?;
                direct.row_mut(u).copy_from(&d.row(0));
                if !elements.is_empty() {
                    let g = los_channel(elements, &pos, f, fading, derive_seed(seed, &[LINK_RERADIATION, o as u64, u as u64, r as u64]))?;
                    ris_to_ue.row_mut(u).copy_from(&g.row(0));
                }
            }
            let bs_to_ris = if elements.is_empty() {
                CMatrix::zeros(0, m)
            } else {
                los_channel(&bs, elements, f, fading, derive_seed(seed, &[LINK_ILLUMINATION, o as u64, 0, r as u64]))?
            };
            let blocked = op.ues.iter().map(|u| u.direct_blocked).collect();
            ChannelSet::new(direct, bs_to_ris, ris_to_ue, f, blocked)
        })
        .collect()
}

fn targets_of(s: &Scenario) -> (Vec<usize>, Vec<f64>) {
    let owner = s.owner();
    let idx: Vec<usize> = (0..owner.ues.len()).filter(|&u| owner.ues[u].role == Role::Target).collect();
    let w = idx.iter().map(|&u| owner.ues[u].weight).collect();
    (idx, w)
}

/// Tune the surface for the owner's targets in realization `r` channels.
pub(crate) fn tune_owner(s: &Scenario, chs: &[ChannelSet]) -> Result<TuningResult> {
    let (idx, w) = targets_of(s);
    let targets = chs[s.owner_index()].select(&idx);
    let t = &s.config.tuning;
    tune(&targets, &w, &s.config.circuit, &t.ascent(), t.phase_bits)
}

fn realization(s: &Scenario, array: &RisArray, r: usize) -> Result<Realization> {
    let c = &s.config;
    let chs = synthesize(s, array, r)?;
    let noise = c.noise.power_w();
    let owner = s.owner_index();

    let tuned = if c.ris.enabled { Some(tune_owner(s, &chs)?) } else { None };

    let mut out = Realization {
        se_ris: Vec::new(),
        se_noris: Vec::new(),
        sinr_ris: Vec::new(),
        sinr_noris: Vec::new(),
        tuning: None,
    };
    for (o, (op, set)) in c.operators.iter().zip(&chs).enumerate() {
        let power = dbm_to_w(op.bs.tx_power_dbm);
        let ext: Vec<f64> = op.ues.iter().map(|u| u.external_interference_w).collect();
        let direct = set.direct_unblocked();
        let base = serve(&direct, &direct, op.precoder, power, noise, &ext)?;
        let Some(result) = &tuned else {
            out.se_ris.extend_from_slice(&base.se);
            out.sinr_ris.extend_from_slice(&base.sinr);
            out.se_noris.extend(base.se);
            out.sinr_noris.extend(base.sinr);
            continue;
        };
        let state = if c.ris.ideal_narrowband && o != owner {
            ScatteringState::zeros(set.elements(), op.carrier_hz)
        } else {
            evaluate_off_frequency(result, op.carrier_hz, &c.circuit)?
        };
        let actual = effective_channel(set, &state)?;
        let design = if op.ris_aware() { actual.clone() } else { direct.clone() };
        let with = serve(&design, &actual, op.precoder, power, noise, &ext)?;

        if o == owner {
            let ris_path = set.cascaded(&state)?;
            let owner_condition = with.precoder.as_ref().map_or(f64::INFINITY, |(served, _)| condition_number(&actual.select_rows(served)));
            let zf_penalty_db = match (&with.precoder, op.precoder) {
                (Some((served, pre)), PrecoderKind::Zf) => {
                    let p = zf_power_penalty(&design.select_rows(served), pre);
                    Some(10.0 * p.iter().cloned().fold(1.0, f64::max).log10())
                }
                _ => None,
            };
            let ideal = result.ideal_objective;
            out.tuning = Some(RealizedTuning {
                clamped_fraction: result.clamped_fraction(),
                efficiency: if ideal > 0.0 { result.achieved_objective / ideal } else { 0.0 },
                converged: result.converged,
                sweeps: result.objective_trace.len().saturating_sub(1),
                owner_condition,
                ris_path_condition: condition_number(&ris_path),
                pair: most_correlated_pair(&ris_path).map(|(a, b, _)| (a, b)),
                zf_penalty_db,
            });
        }
        out.se_ris.extend(with.se);
        out.sinr_ris.extend(with.sinr);
        out.se_noris.extend(base.se);
        out.sinr_noris.extend(base.sinr);
    }
    Ok(out)
}

fn finite_stat(xs: impl Iterator<Item = f64>) -> (MeanStat, usize) {
    let all: Vec<f64> = xs.collect();
    let finite: Vec<f64> = all.iter().cloned().filter(|x| x.is_finite()).collect();
    (MeanStat::of(&finite), all.len() - finite.len())
}

fn aggregate(s: &Scenario, array: &RisArray, runs: &[Realization]) -> CaseMetrics {
    let c = &s.config;
    let n = runs.len();
    let mut ues = Vec::new();
    let mut index = 0;
    let mut target_cols = Vec::new();
    let mut nontarget_cols = Vec::new();
    for op in &c.operators {
        for ue in &op.ues {
            let col = |f: fn(&Realization) -> &Vec<f64>| runs.iter().map(|r| f(r)[index]).collect::<Vec<f64>>();
            let se_ris = col(|r| &r.se_ris);
            let se_noris = col(|r| &r.se_noris);
            ues.push(UeMetrics {
                id: ue.id.clone(),
                operator: op.name.clone(),
                role: ue.role,
                se_ris: MeanStat::of(&se_ris),
                se_noris: MeanStat::of(&se_noris),
                sinr_ris: col(|r| &r.sinr_ris).iter().sum::<f64>() / n as f64,
                sinr_noris: col(|r| &r.sinr_noris).iter().sum::<f64>() / n as f64,
            });
            match ue.role {
                Role::Target => target_cols.push(index),
                Role::NonTarget => nontarget_cols.push(index),
            }
            index += 1;
        }
    }
    let sum_over = |cols: &[usize], f: fn(&Realization) -> &Vec<f64>| -> Vec<f64> { runs.iter().map(|r| cols.iter().map(|&i| f(r)[i]).sum()).collect() };
    let t_ris = sum_over(&target_cols, |r| &r.se_ris);
    let t_noris = sum_over(&target_cols, |r| &r.se_noris);
    let nt_ris = sum_over(&nontarget_cols, |r| &r.se_ris);
    let nt_noris = sum_over(&nontarget_cols, |r| &r.se_noris);
    let loss: Vec<f64> = nt_noris.iter().zip(&nt_ris).map(|(a, b)| a - b).collect();
    let nt_ris_stat = MeanStat::of(&nt_ris);
    let nt_noris_stat = MeanStat::of(&nt_noris);
    let degradation_ratio = if nt_noris_stat.mean > 0.0 { 1.0 - nt_ris_stat.mean / nt_noris_stat.mean } else { 0.0 };

    let tuning = if runs.iter().all(|r| r.tuning.is_some()) && n > 0 {
        let t: Vec<&RealizedTuning> = runs.iter().map(|r| r.tuning.as_ref().unwrap()).collect();
        let (owner_condition, singular_a) = finite_stat(t.iter().map(|x| x.owner_condition));
        let (ris_path_condition, singular_b) = finite_stat(t.iter().map(|x| x.ris_path_condition));
        let threshold = c.precoding.correlation_threshold;
        let correlated = singular_a + singular_b > 0 || owner_condition.mean > threshold || ris_path_condition.mean > threshold;
        let owner = s.owner();
        let correlated_pair = t[0].pair.map(|(a, b)| [owner.ues[a].id.clone(), owner.ues[b].id.clone()]);
        let penalties: Option<Vec<f64>> = t.iter().map(|x| x.zf_penalty_db).collect();
        Some(TuningDiagnostics {
            clamped_fraction: MeanStat::of(&t.iter().map(|x| x.clamped_fraction).collect::<Vec<_>>()),
            realization_efficiency: MeanStat::of(&t.iter().map(|x| x.efficiency).collect::<Vec<_>>()),
            converged_fraction: t.iter().filter(|x| x.converged).count() as f64 / n as f64,
            mean_sweeps: t.iter().map(|x| x.sweeps as f64).sum::<f64>() / n as f64,
            owner_condition,
            ris_path_condition,
            singular_realizations: singular_a.max(singular_b),
            correlation_threshold: threshold,
            correlated,
            correlated_pair,
            zf_penalty_db: penalties.map(|p| MeanStat::of(&p)),
        })
    } else {
        None
    };

    CaseMetrics {
        n_elements: array.len(),
        ris_position: c.ris.placement.center,
        realizations: n,
        ues,
        sumse_target_ris: MeanStat::of(&t_ris),
        sumse_target_noris: MeanStat::of(&t_noris),
        sumse_nontarget_ris: nt_ris_stat,
        sumse_nontarget_noris: nt_noris_stat,
        nontarget_loss: MeanStat::of(&loss),
        degradation_ratio,
        tuning,
    }
}

/// Evaluate every realization (in parallel) and reduce in realization order.
pub fn run_case(s: &Scenario) -> Result<CaseMetrics> {
    let array = s.array()?;
    let runs = (0..s.config.realizations)
        .into_par_iter()
        .map(|r| realization(s, &array, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(s, &array, &runs))
}

/// One case per (position, element count), positions outermost. All points
/// share the master seed, so curves differ only by the swept variable.
pub fn sweep(s: &Scenario, spec: &SweepSpec) -> Result<Vec<CaseMetrics>> {
    if spec.element_counts.is_empty() || spec.ris_positions.is_empty() {
        return Err(Error::config("sweep", "element_counts and ris_positions must be non-empty"));
    }
    let points: Vec<Scenario> = spec
        .ris_positions
        .iter()
        .flat_map(|p| spec.element_counts.iter().map(move |&n| (n, *p)))
        .map(|(n, p)| s.with_surface(n, p))
        .collect::<Result<_>>()?;
    points.par_iter().map(run_case).collect()
}
