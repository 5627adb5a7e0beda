use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde_json::json;

use crate::ck_cover::{
    build_ck_cover, build_ckx_cover, certify_ck_sample, certify_ckx_sample, ckx_transfer, complementation_pair,
    convergent_retraction, pibasis_witness_search, rigged_covering, BumpFamily, CkCoverConfig, CkxForm, SampleOutcome,
};
use crate::op_cover::{
    certify_lp_operator, columns_as_linf_sum, hilbert_rank_one_certify, linf_sum_cover, lp_operator_covering,
    operator_cover_transfer, operator_norm, rows_as_linf_sum, DualBallNet, LpConstants, Operator, SphereNet,
    TransferConfig,
};
use crate::seed::rng;
use crate::spaces::{
    certify_point_best, classify_covering, norm_of, rescale_covering, sample_sphere, scaling_margin, standard_covering,
    Exponent, SpaceModel,
};
use crate::topology::{is_pibasis, minimal_open_sets, FiniteSpace, PiBasis, PointSet};
use crate::{Covering, Space};

use super::{
    run_trials, FormKind, GridKind, HarnessError, Outcome, Params, Scenario, ScenarioConfig, TrialRecord, TrialStatus,
    Verdict,
};

type Res = Result<Outcome, HarnessError>;

fn cfg_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn to_value<S: serde::Serialize>(v: &S) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}

fn range_usize(name: &str, v: usize, lo: usize, hi: usize) -> Result<usize, HarnessError> {
    if v < lo || v > hi {
        return Err(cfg_err(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(v)
}

fn range_f64(name: &str, v: f64, ok: bool, what: &str) -> Result<f64, HarnessError> {
    if !v.is_finite() || !ok {
        return Err(cfg_err(format!("{name} = {v} must be {what}")));
    }
    Ok(v)
}

fn trials(p: &Params, default: usize) -> Result<usize, HarnessError> {
    range_usize("trials", p.trials.unwrap_or(default), 1, 10_000_000)
}

fn exponent(p: Option<Exponent<f64>>, default: f64) -> Exponent<f64> {
    p.unwrap_or_else(|| Exponent::finite(default))
}

fn finite_exponent(name: &str, e: Exponent<f64>) -> Result<f64, HarnessError> {
    let v = e.value();
    range_f64(name, v, v > 1.0, "in (1, ∞)")
}

pub(super) fn dispatch(cfg: &ScenarioConfig) -> Res {
    let p = &cfg.params;
    let seed = cfg.seed;
    match cfg.scenario {
        Scenario::Topology => topology(p),
        Scenario::CkCover => ck_cover(p, seed),
        Scenario::CkxCover => ckx_cover(p, seed),
        Scenario::CkFalsify => ck_falsify(p),
        Scenario::LpOperator => lp_operator(p, seed),
        Scenario::Hilbert => hilbert(p, seed),
        Scenario::TransferOp => transfer_op(p, seed),
        Scenario::TransferCkx => transfer_ckx(p, seed),
        Scenario::LinfSum => linf_sum(p, seed),
        Scenario::LemmaScaling => lemma_scaling(p, seed),
        Scenario::Rescale => rescale(p, seed),
        Scenario::Complementation => complementation(p),
    }
}

fn topology(p: &Params) -> Res {
    let m = range_usize("m", p.m.unwrap_or(3), 0, 16)?;
    let big_n = range_usize("N", p.big_n.unwrap_or(8), 1, 1 << 16)?;
    let cube = FiniteSpace::discrete_cube(m).map_err(|e| cfg_err(e.to_string()))?;
    let conv = FiniteSpace::convergent_model(big_n, m).map_err(|e| cfg_err(e.to_string()))?;
    let mc = minimal_open_sets(&cube);
    let mv = minimal_open_sets(&conv);
    let verdict = is_pibasis(&conv, &PiBasis::new(mv.family.clone())).map_err(|e| cfg_err(e.to_string()))?;
    let ok = mc.pi_weight == 1 << m && mv.pi_weight == big_n && verdict.holds;
    let details = json!({
        "discrete_cube": {"points": cube.len(), "pi_weight": mc.pi_weight, "expected": 1usize << m},
        "convergent_model": {
            "points": conv.len(),
            "pi_weight": mv.pi_weight,
            "expected": big_n,
            "minimal_opens": mv.family.iter().map(PointSet::to_hex).collect::<Vec<_>>(),
            "minimal_family_is_pibasis": verdict.holds,
        },
    });
    Ok(Outcome {
        details,
        trials: Vec::new(),
        forced: Some(if ok { Verdict::Pass } else { Verdict::Falsified }),
    })
}

fn grid(p: &Params, n: usize) -> Result<(Space, BumpFamily), HarnessError> {
    match p.mode.unwrap_or(GridKind::Discrete) {
        GridKind::Discrete => Ok((SpaceModel::sup_grid(n), BumpFamily::singletons(n))),
        GridKind::Lipschitz => {
            let slope = p.slope.unwrap_or(4.0);
            range_f64("Lambda", slope, slope > 0.0, "positive")?;
            if n < 2 {
                return Err(cfg_err("lipschitz grid needs n >= 2"));
            }
            let fam = BumpFamily::dyadic(n, slope).map_err(|e| cfg_err(e.to_string()))?;
            Ok((SpaceModel::lipschitz_grid(n, slope), fam))
        }
    }
}

fn outcome_record(trial: usize, seed: u64, out: SampleOutcome<f64>) -> TrialRecord {
    match out {
        SampleOutcome::Certified(c) => TrialRecord::covered(trial, seed, c.ball_index, c.distance, c.radius),
        SampleOutcome::OutsideHypothesis { min_excess } => TrialRecord {
            note: Some(format!("not covered, outside hypothesis (excess {min_excess})")),
            ..TrialRecord::new(trial, seed, TrialStatus::OutsideHypothesis)
        },
        SampleOutcome::Falsified { min_excess } => {
            TrialRecord::failed(trial, seed, format!("not covered (excess {min_excess})"))
        }
    }
}

fn covering_summary(c: &Covering) -> serde_json::Value {
    let k = classify_covering(c);
    json!({"balls": c.len(), "classification": to_value(&k)})
}

fn ck_cover(p: &Params, seed: u64) -> Res {
    let n = range_usize("n", p.n.unwrap_or(8), 1, 4096)?;
    let lambda = p.lambda.unwrap_or(1.2);
    range_f64("lambda", lambda, lambda > 1.0 && lambda <= 1.5, "in (1, 3/2]")?;
    let trials = trials(p, 1000)?;
    let (k, family) = grid(p, n)?;
    let cfg = CkCoverConfig { lambda, family };
    let cover = build_ck_cover(&k, &cfg).map_err(|e| cfg_err(e.to_string()))?;
    let records = run_trials(trials, seed, 0, |i, s| {
        let g = sample_sphere(&k, s).point;
        match certify_ck_sample(&cover, &cfg.family, &g) {
            Ok(out) => outcome_record(i, s, out),
            Err(e) => TrialRecord::failed(i, s, e.to_string()),
        }
    });
    Ok(Outcome {
        details: json!({
            "covering": covering_summary(&cover),
            "origin_gap": cover.origin_gap,
            "expected_gap": (lambda - 1.0).min(0.5),
            "radius": cover.radius_bound,
            "family_size": cfg.family.len(),
        }),
        trials: records,
        forced: None,
    })
}

/// Rescaled standard covering of `ℓ_p^m` with `r* = gap`, and the form.
fn x_covering(p: &Params) -> Result<(Covering, CkxForm<f64>), HarnessError> {
    let m = range_usize("m", p.m.unwrap_or(2), 1, 8)?;
    let e = exponent(p.p, 2.0);
    let x = SpaceModel::Lp { n: m, p: e };
    let std = standard_covering(&x).map_err(|e| cfg_err(e.to_string()))?;
    let r_star = std.origin_gap;
    let r2 = 3.0 + 2.0 * std.radius_bound;
    let resc = rescale_covering(&std, r_star).map_err(|e| cfg_err(e.to_string()))?;
    let form = match p.form.unwrap_or(FormKind::Bcp) {
        FormKind::Bcp => CkxForm::Bcp,
        FormKind::Ubcp => CkxForm::Ubcp {
            r_star,
            r_double_star: r2,
        },
    };
    Ok((resc, form))
}

fn ckx_cover(p: &Params, seed: u64) -> Res {
    let n = range_usize("n", p.n.unwrap_or(4), 1, 1024)?;
    let trials = trials(p, 1000)?;
    let (k, family) = grid(p, n)?;
    let (xcov, form) = x_covering(p)?;
    let cover = build_ckx_cover(&k, &family, &xcov, form).map_err(|e| cfg_err(e.to_string()))?;
    let records = run_trials(trials, seed, 0, |i, s| {
        let g = sample_sphere(&cover.space, s).point;
        match certify_ckx_sample(&cover, &family, &xcov, &g) {
            Ok(out) => outcome_record(i, s, out),
            Err(e) => TrialRecord::failed(i, s, e.to_string()),
        }
    });
    Ok(Outcome {
        details: json!({
            "covering": covering_summary(&cover),
            "x_covering": covering_summary(&xcov),
            "form": to_value(&form),
        }),
        trials: records,
        forced: None,
    })
}

fn ck_falsify(p: &Params) -> Res {
    let n = range_usize("n", p.n.unwrap_or(4), 2, 4096)?;
    let dead = range_usize("dead_node", p.dead_node.unwrap_or(n - 1), 0, n - 1)?;
    let lambda = p.lambda.unwrap_or(1.2);
    range_f64("lambda", lambda, lambda > 1.0 && lambda <= 1.5, "in (1, 3/2]")?;
    let k_max = range_usize("k_max", p.k_max.unwrap_or(3), 1, 1 << 20)?;
    let cover = if p.rigged.unwrap_or(true) {
        rigged_covering(n, dead, lambda)
    } else {
        build_ck_cover(&SpaceModel::sup_grid(n), &CkCoverConfig::discrete(n, lambda))
    }
    .map_err(|e| cfg_err(e.to_string()))?;
    let opens: Vec<PointSet> = (0..n).map(|i| PointSet::singleton(n, i)).collect();
    let v = pibasis_witness_search(&cover, &opens, k_max).map_err(|e| cfg_err(e.to_string()))?;
    let forced = match &v.witness {
        Some(w) if w.defeats_all() => Verdict::Falsified,
        Some(_) => Verdict::Error,
        None => Verdict::Pass,
    };
    Ok(Outcome {
        details: json!({
            "covering": covering_summary(&cover),
            "witness_defeats_all": v.witness.as_ref().map(|w| w.defeats_all()),
            "verdict": to_value(&v),
        }),
        trials: Vec::new(),
        forced: Some(forced),
    })
}

fn lp_operator(p: &Params, seed: u64) -> Res {
    let n = range_usize("n", p.n.unwrap_or(3), 1, 8)?;
    let m = range_usize("m", p.m.unwrap_or(n), 1, 8)?;
    let e = exponent(p.p, 2.0);
    let pv = finite_exponent("p", e)?;
    let q = p.q.unwrap_or(e);
    let lambda = p.lambda.unwrap_or(1.1);
    range_f64("lambda", lambda, lambda > 1.0, "> 1")?;
    let trials = trials(p, 100)?;
    let consts = LpConstants::new(pv, lambda).map_err(|e| cfg_err(e.to_string()))?;
    let k_max = range_usize("k_max", p.k_max.unwrap_or(m), 1, 64)?;
    let net = DualBallNet::for_window(n, q.conjugate(), consts.c, k_max).map_err(|e| cfg_err(e.to_string()))?;
    let space = SpaceModel::operator(m, n, q, e);
    let records = run_trials(trials, seed, 0, |i, s| {
        let a = sample_sphere(&space, s).point;
        let op = Operator::new(m, n, a, q, e).expect("dimensions");
        match certify_lp_operator(&op, lambda, &net) {
            Ok(c) => {
                let mut r = TrialRecord::covered(i, s, c.t0, c.distance, c.radius);
                r.gap = Some(c.gap);
                if !c.holds() {
                    r.status = TrialStatus::Failed;
                    r.note = Some("certificate inequality without slack".into());
                }
                r.ball_index = None;
                r.note = r.note.or(Some(format!("t0={} t0_first={}", c.t0, c.t0_first)));
                r
            }
            Err(e) => TrialRecord::failed(i, s, e.to_string()),
        }
    });
    Ok(Outcome {
        details: json!({"constants": to_value(&consts), "net_delta": net.delta(), "k_max": k_max}),
        trials: records,
        forced: None,
    })
}

fn hilbert(p: &Params, seed: u64) -> Res {
    let n = range_usize("n", p.n.unwrap_or(4), 1, 16)?;
    let m = range_usize("m", p.m.unwrap_or(n), 1, 16)?;
    let lambda = p.lambda.unwrap_or(1.5);
    range_f64("lambda", lambda, lambda > 1.0 && lambda < 2.0, "in (1, 2)")?;
    let delta = p.delta.unwrap_or((lambda - 1.0) / (4.0 * lambda + 4.0));
    range_f64("delta", delta, delta > 0.0, "positive")?;
    let trials = trials(p, 1000)?;
    let left = SphereNet::euclidean(m, delta).map_err(|e| cfg_err(e.to_string()))?;
    let right = SphereNet::euclidean(n, delta).map_err(|e| cfg_err(e.to_string()))?;
    let e2 = Exponent::finite(2.0);
    let space = SpaceModel::operator(m, n, e2, e2);
    let records = run_trials(trials, seed, 0, |i, s| {
        let a = sample_sphere(&space, s).point;
        let op = Operator::new(m, n, a, e2, e2).expect("dimensions");
        match hilbert_rank_one_certify(&op, lambda, &left, &right) {
            Ok(c) => {
                let mut r = TrialRecord::covered(i, s, 0, c.distance, c.radius);
                r.ball_index = None;
                r.gap = Some(c.gap);
                r
            }
            Err(e) => TrialRecord::failed(i, s, e.to_string()),
        }
    });
    Ok(Outcome {
        details: json!({
            "radius": (1.0 + lambda) / 2.0,
            "bound": 1.0 + (2.0 * lambda + 2.0) * delta,
            "delta": delta,
        }),
        trials: records,
        forced: None,
    })
}

fn certify_records(cover: &Covering, count: usize, seed: u64, offset: usize, part: &str) -> Vec<TrialRecord> {
    run_trials(count, seed, offset, |i, s| {
        let v = sample_sphere(&cover.space, s).point;
        match certify_point_best(cover, &v) {
            Ok(c) => TrialRecord::covered(i, s, c.ball_index, c.distance, c.radius),
            Err(e) => TrialRecord::failed(i, s, e.to_string()),
        }
        .part(part)
    })
}

fn transfer_op(p: &Params, seed: u64) -> Res {
    let n = range_usize("n", p.n.unwrap_or(2), 1, 3)?;
    let m = range_usize("m", p.m.unwrap_or(n), 1, 3)?;
    let e = exponent(p.p, 2.0);
    finite_exponent("p", e)?;
    let q = p.q.unwrap_or(e);
    let lambda = p.lambda.unwrap_or(1.1);
    range_f64("lambda", lambda, lambda > 1.0, "> 1")?;
    let h = p.grid_step.unwrap_or(0.5);
    range_f64("grid_step", h, h > 0.0 && h <= 2.0, "in (0, 2]")?;
    let trials = trials(p, 1000)?;
    let lc = lp_operator_covering(m, n, q, e, lambda, h).map_err(|e| cfg_err(e.to_string()))?;
    let tcfg = TransferConfig {
        seed,
        ..TransferConfig::default()
    };
    let t = match operator_cover_transfer(&lc.covering, &tcfg) {
        Ok(t) => t,
        Err(err) => {
            return Ok(Outcome {
                details: json!({"error": err.to_string(), "operator_covering_balls": lc.covering.len()}),
                trials: Vec::new(),
                forced: Some(Verdict::Falsified),
            })
        }
    };
    let mut records = certify_records(&t.y_cover, trials, seed, 0, "y");
    records.extend(certify_records(&t.xdual_cover, trials, seed, trials, "xdual"));
    let forced = (!t.admissible).then_some(Verdict::Falsified);
    Ok(Outcome {
        details: json!({
            "operator_covering": {
                "balls": lc.covering.len(),
                "grid_points": lc.grid_points,
                "mesh_bound": lc.mesh_bound,
                "min_margin": lc.min_margin,
                "coverage_proven": lc.coverage_proven,
            },
            "g_separation": t.g_separation,
            "y_separation": t.y_separation,
            "admissible": t.admissible,
            "y_cover": covering_summary(&t.y_cover),
            "xdual_cover": covering_summary(&t.xdual_cover),
        }),
        trials: records,
        forced,
    })
}

fn transfer_ckx(p: &Params, seed: u64) -> Res {
    let n = range_usize("n", p.n.unwrap_or(4), 1, 1024)?;
    let m_max = range_usize("m_max", p.m_max.unwrap_or(64), 1, 1 << 20)?;
    let trials = trials(p, 1000)?;
    let (k, family) = grid(p, n)?;
    let (xcov, form) = x_covering(p)?;
    let cover = build_ckx_cover(&k, &family, &xcov, form).map_err(|e| cfg_err(e.to_string()))?;
    let t = ckx_transfer(&cover, m_max).map_err(|e| cfg_err(e.to_string()))?;
    let mut records = certify_records(&t.x_cover, trials, seed, 0, "x");
    records.extend(run_trials(trials, seed, trials, |i, s| {
        let f = sample_sphere(&t.scalar_space, s).point;
        match t.certify_scalar(&cover, &f) {
            Ok(c) => {
                let mut r = TrialRecord::covered(i, s, c.ball, c.distance, c.center_norm);
                r.note = Some(format!("m={} sign={}", c.m, c.sign));
                r
            }
            Err(e) => TrialRecord::failed(i, s, e.to_string()),
        }
        .part("scalar")
    }));
    let xk = classify_covering(&t.x_cover);
    Ok(Outcome {
        details: json!({
            "covering": covering_summary(&cover),
            "x_cover": covering_summary(&t.x_cover),
            "x_cover_admissible": xk.admissible,
            "m_max": m_max,
        }),
        trials: records,
        forced: (!xk.admissible).then_some(Verdict::Falsified),
    })
}

fn linf_sum(p: &Params, seed: u64) -> Res {
    let m = range_usize("m", p.m.unwrap_or(2), 1, 8)?;
    let blocks = range_usize("blocks", p.blocks.unwrap_or(2), 1, 64)?;
    let e = exponent(p.p, 2.0);
    let trials = trials(p, 1000)?;
    let block = standard_covering(&SpaceModel::Lp { n: m, p: e }).map_err(|e| cfg_err(e.to_string()))?;
    let cover = linf_sum_cover(&vec![block.clone(); blocks]).map_err(|e| cfg_err(e.to_string()))?;
    let records = certify_records(&cover, trials, seed, 0, "sum");
    // identification of B(ℓ_1^k) and B(ℓ_∞^k) norms with ℓ_∞-sum norms
    let mut rng = rng(seed ^ 0x1d);
    let mut identities_exact = true;
    for _ in 0..trials {
        let rows = rng.gen_range(1..=4);
        let cols = rng.gen_range(1..=4);
        let data: Vec<f64> = (0..rows * cols).map(|_| StandardNormal.sample(&mut rng)).collect();
        for e in [Exponent::finite(1.0), Exponent::infinity()] {
            let a = Operator::new(rows, cols, data.clone(), e, e).expect("dims");
            let (s, v) = if e.is_infinite() {
                rows_as_linf_sum(&a)
            } else {
                columns_as_linf_sum(&a)
            };
            identities_exact &= norm_of(&s, &v).expect("dims") == operator_norm(&a).value;
        }
    }
    Ok(Outcome {
        details: json!({
            "covering": covering_summary(&cover),
            "block_gap": block.origin_gap,
            "sum_gap": cover.origin_gap,
            "gap_preserved": block.origin_gap == cover.origin_gap,
            "identities_exact": identities_exact,
        }),
        trials: records,
        forced: (!identities_exact || block.origin_gap != cover.origin_gap).then_some(Verdict::Falsified),
    })
}

fn lemma_scaling(p: &Params, seed: u64) -> Res {
    let n = range_usize("n", p.n.unwrap_or(3), 1, 64)?;
    let e = exponent(p.p, 2.0);
    let tol = p.tolerance.unwrap_or(1e-12);
    range_f64("tolerance", tol, tol >= 0.0, "nonnegative")?;
    let trials = trials(p, 1000)?;
    let space = SpaceModel::Lp { n, p: e };
    let records = run_trials(trials, seed, 0, |i, s| {
        let mut r = rng(s);
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
        let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
        let a: f64 = r.gen_range(0.01..3.0);
        let b: f64 = r.gen_range(0.01..3.0);
        let (s_, t_) = if a < b { (a, b) } else { (b, a + 1e-3) };
        match scaling_margin(&x, &y, s_, t_, &space) {
            Ok((ms, mt)) => {
                let diff = mt - ms;
                let status = if diff >= -tol {
                    TrialStatus::Certified
                } else {
                    TrialStatus::Failed
                };
                TrialRecord {
                    margin: Some(diff),
                    ..TrialRecord::new(i, s, status)
                }
            }
            Err(e) => TrialRecord::failed(i, s, e.to_string()),
        }
    });
    Ok(Outcome {
        details: json!({"tolerance": tol}),
        trials: records,
        forced: None,
    })
}

fn rescale(p: &Params, seed: u64) -> Res {
    let n = range_usize("n", p.n.unwrap_or(2), 1, 8)?;
    let e = exponent(p.p, 2.0);
    let trials = trials(p, 1000)?;
    let std = standard_covering(&SpaceModel::Lp { n, p: e }).map_err(|e| cfg_err(e.to_string()))?;
    let r_star = std.origin_gap;
    let target = 3.0 + 2.0 * std.radius_bound;
    let resc = rescale_covering(&std, r_star).map_err(|e| cfg_err(e.to_string()))?;
    let deviation = (0..resc.len())
        .map(|i| (resc.center_norm(i) - target).abs())
        .fold(0.0, f64::max);
    let records = run_trials(trials, seed, 0, |i, s| {
        let v = sample_sphere(&std.space, s).point;
        if certify_point_best(&std, &v).is_err() {
            return TrialRecord {
                note: Some("not covered by the input covering".into()),
                ..TrialRecord::new(i, s, TrialStatus::OutsideHypothesis)
            };
        }
        match certify_point_best(&resc, &v) {
            Ok(c) => TrialRecord::covered(i, s, c.ball_index, c.distance, c.radius),
            Err(e) => TrialRecord::failed(i, s, e.to_string()),
        }
    });
    Ok(Outcome {
        details: json!({
            "r_star": r_star,
            "r_double_star": target,
            "max_center_norm_deviation": deviation,
            "input": covering_summary(&std),
            "output": covering_summary(&resc),
        }),
        trials: records,
        forced: (deviation > 1e-12 * target).then_some(Verdict::Falsified),
    })
}

fn complementation(p: &Params) -> Res {
    let big_n = range_usize("N", p.big_n.unwrap_or(4), 1, 4096)?;
    let m = range_usize("m", p.m.unwrap_or(2), 0, 10)?;
    let (a, b) = convergent_retraction(big_n, m).map_err(|e| cfg_err(e.to_string()))?;
    let (forced, details) = match complementation_pair(&a, &b) {
        Ok(r) => (
            if r.holds() { Verdict::Pass } else { Verdict::Falsified },
            json!({"record": to_value(&r)}),
        ),
        Err(e) => (Verdict::Falsified, json!({"error": e.to_string()})),
    };
    Ok(Outcome {
        details,
        trials: Vec::new(),
        forced: Some(forced),
    })
}
