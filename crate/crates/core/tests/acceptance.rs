//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines are printed on success too; exits nonzero if any
//! criterion fails or overruns its time limit.

mod common;

use std::time::{Duration, Instant};

use bcplab::ck_cover::{complementation_pair, convergent_retraction, pibasis_witness_search, rigged_covering};
use bcplab::harness::{run_scenario, Params, Report, Scenario, ScenarioConfig, Verdict};
use bcplab::op_cover::{
    ascent_operator_norm, certify_lp_operator, hilbert_rank_one_certify, top_singular_triple, AscentConfig,
    DualBallNet, LpConstants, Operator, SphereNet,
};
use bcplab::seed::{rng, trial_seed};
use bcplab::spaces::{
    certify_point_best, rescale_covering, sample_sphere, scaling_margin, standard_covering, Exponent, SpaceModel,
};
use bcplab::topology::{minimal_open_sets, FiniteSpace, PointSet};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

type Criterion = (&'static str, fn() -> Line, u64);

struct Line {
    ok: bool,
    detail: String,
}

fn line(ok: bool, detail: impl Into<String>) -> Line {
    Line {
        ok,
        detail: detail.into(),
    }
}

fn scenario(scenario: Scenario, params: Params, seed: u64) -> Report {
    run_scenario(&ScenarioConfig { scenario, params, seed }, 0).expect("scenario runs")
}

fn all_certified(r: &Report) -> bool {
    r.verdict == Verdict::Pass && r.aggregates.certified == r.aggregates.trials && r.aggregates.failed == 0
}

fn c1() -> Line {
    let mut ok = true;
    for m in 1..=4 {
        let w = minimal_open_sets(&FiniteSpace::discrete_cube(m).unwrap()).pi_weight;
        ok &= w == 1 << m;
    }
    let mut cases = 0;
    for big_n in 1..=8 {
        for m in 0..=3 {
            let w = minimal_open_sets(&FiniteSpace::convergent_model(big_n, m).unwrap()).pi_weight;
            ok &= w == big_n;
            cases += 1;
        }
    }
    line(ok, format!("cubes m=1..4 and {cases} convergent models"))
}

fn c2() -> Line {
    let tol = 1e-12;
    let exps = [
        Exponent::<f64>::finite(1.0),
        Exponent::finite(1.7),
        Exponent::finite(2.0),
        Exponent::infinity(),
    ];
    let mut r = rng(2);
    let mut worst = f64::INFINITY;
    let total = 100_000;
    for i in 0..total {
        let n = 1 + i % 4;
        let space = SpaceModel::Lp {
            n,
            p: exps[(i / 4) % 4],
        };
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
        let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
        let s: f64 = r.gen_range(0.01..3.0);
        let t = s + r.gen_range(1e-3..3.0);
        let (ms, mt) = scaling_margin(&x, &y, s, t, &space).unwrap();
        worst = worst.min(mt - ms);
    }
    line(worst >= -tol, format!("{total} tuples, min (m_t - m_s) = {worst:e}"))
}

fn c3() -> Line {
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [8, 64] {
        let r = scenario(
            Scenario::CkCover,
            Params {
                n: Some(n),
                lambda: Some(1.2),
                trials: Some(10_000),
                ..Params::default()
            },
            3,
        );
        let gap = r.details["origin_gap"].as_f64().unwrap();
        let margin = r.aggregates.min_margin.unwrap();
        ok &= all_certified(&r) && margin >= 0.0 && gap == 1.2 - 1.0;
        detail.push(format!(
            "n={n}: {}/{} min margin {margin:.4} gap {gap}",
            r.aggregates.certified, r.aggregates.trials
        ));
    }
    line(ok, detail.join("; "))
}

fn c4() -> Line {
    let n = 8;
    let c = rigged_covering::<f64>(n, 5, 1.2).unwrap();
    let opens: Vec<PointSet> = (0..n).map(|i| PointSet::singleton(n, i)).collect();
    let v = pibasis_witness_search(&c, &opens, 3).unwrap();
    match v.witness {
        Some(w) => {
            let exact = w.distances.iter().zip(&w.center_norms).all(|(d, g)| d >= g);
            line(
                exact && w.defeats_all() && w.open == PointSet::singleton(n, 5),
                format!("witness bump on node 5 defeats all {} centers", c.len()),
            )
        }
        None => line(false, "no witness found"),
    }
}

fn c5() -> Line {
    let base = Params {
        n: Some(4),
        m: Some(2),
        p: Some(Exponent::finite(2.0)),
        trials: Some(1000),
        ..Params::default()
    };
    let build = scenario(Scenario::CkxCover, base.clone(), 5);
    let transfer = scenario(
        Scenario::TransferCkx,
        Params {
            m_max: Some(64),
            ..base
        },
        5,
    );
    let parts = |part: &str| {
        transfer
            .trials
            .iter()
            .filter(|t| t.part.as_deref() == Some(part))
            .filter(|t| t.status == bcplab::harness::TrialStatus::Certified)
            .count()
    };
    let (x, s) = (parts("x"), parts("scalar"));
    line(
        all_certified(&build) && all_certified(&transfer) && x == 1000 && s == 1000,
        format!(
            "C(K,X) {}/1000, S_X {x}/1000, S_C(K) {s}/1000",
            build.aggregates.certified
        ),
    )
}

fn c6() -> Line {
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, e) in [
        ("1", Exponent::<f64>::finite(1.0)),
        ("2", Exponent::finite(2.0)),
        ("inf", Exponent::infinity()),
    ] {
        let std = standard_covering(&SpaceModel::Lp { n: 2, p: e }).unwrap();
        let target = 3.0 + 2.0 * std.radius_bound;
        let resc = rescale_covering(&std, std.origin_gap).unwrap();
        let exact = (0..resc.len()).all(|i| resc.center_norm(i) == target);
        let mut covered = 0;
        let mut recertified = 0;
        let mut i = 0u64;
        while covered < 1000 {
            let v = sample_sphere(&std.space, trial_seed(6, i)).point;
            i += 1;
            if certify_point_best(&std, &v).is_ok() {
                covered += 1;
                recertified += certify_point_best(&resc, &v).is_ok() as usize;
            }
        }
        ok &= exact && recertified == 1000;
        detail.push(format!("p={label}: norms exact {exact}, {recertified}/1000"));
    }
    line(ok, detail.join("; "))
}

fn c7() -> Line {
    let k = LpConstants::<f64>::new(2.0, 1.1).unwrap();
    let consts_ok =
        (k.c - 0.890724).abs() < 1e-6 && (k.radius - 1.039898).abs() < 1e-6 && (k.gap_bound - 0.020034).abs() < 1e-6;
    let mut ok = consts_ok;
    let mut certified = 0;
    let mut total = 0;
    let mut worst_gap_slack = f64::INFINITY;
    for p in [1.5, 2.0, 3.0] {
        let e = Exponent::finite(p);
        for lambda in [1.05, 1.1] {
            let k = LpConstants::<f64>::new(p, lambda).unwrap();
            for n in 2..=4 {
                let net = DualBallNet::for_window(n, e.conjugate(), k.c, n).unwrap();
                let space = SpaceModel::operator(n, n, e, e);
                for i in 0..1000 {
                    total += 1;
                    let a = sample_sphere(&space, trial_seed(7 + n as u64, i)).point;
                    let op = Operator::new(n, n, a, e, e).unwrap();
                    let Ok(cert) = certify_lp_operator(&op, lambda, &net) else {
                        ok = false;
                        continue;
                    };
                    let eps_bound = lambda * (k.c + cert.epsilon);
                    let fine = cert.holds()
                        && eps_bound - cert.distance > 1e-9
                        && (cert.radius - lambda * (1.0 + k.c) / 2.0).abs() <= 1e-15
                        && cert.gap - lambda * (1.0 - k.c) / 6.0 > 1e-9;
                    worst_gap_slack = worst_gap_slack.min(cert.gap - k.gap_bound);
                    certified += fine as usize;
                    ok &= fine;
                }
            }
        }
    }
    line(
        ok,
        format!(
            "constants(2,1.1) c={:.6} radius={:.6} gap={:.6}; {certified}/{total} certified, min gap slack {worst_gap_slack:.4e}",
            k.c, k.radius, k.gap_bound
        ),
    )
}

fn c8() -> Line {
    let mut r = rng(8);
    let mut worst_net: f64 = 0.0;
    let cfg = AscentConfig::default();
    for p in [1.5, 2.5] {
        let e = Exponent::finite(p);
        for _ in 0..50 {
            let op = Operator::new(3, 3, common::uniform_matrix(&mut r, 3, 3), e, e).unwrap();
            let ascent = ascent_operator_norm(&op, &cfg).value;
            let brute = common::dense_net_norm(&op, p, 0.01);
            worst_net = worst_net.max((ascent - brute).abs());
        }
    }
    let mut worst_svd: f64 = 0.0;
    let e2 = Exponent::finite(2.0);
    for _ in 0..1000 {
        let rows = r.gen_range(1..=4);
        let cols = r.gen_range(1..=4);
        let op = Operator::new(rows, cols, common::uniform_matrix(&mut r, rows, cols), e2, e2).unwrap();
        let ascent = ascent_operator_norm(&op, &cfg).value;
        let (sigma, _, _) = top_singular_triple(&op);
        worst_svd = worst_svd.max((ascent - sigma).abs());
    }
    line(
        worst_net <= 1e-3 && worst_svd <= 1e-8,
        format!("max |ascent - net| = {worst_net:.2e}, max |ascent - svd| = {worst_svd:.2e}"),
    )
}

fn c9() -> Line {
    let r = scenario(
        Scenario::Hilbert,
        Params {
            n: Some(4),
            lambda: Some(1.5),
            delta: Some(0.05),
            trials: Some(1000),
            ..Params::default()
        },
        9,
    );
    let max_distance = r.trials.iter().filter_map(|t| t.distance).fold(0.0, f64::max);
    let net = SphereNet::euclidean(4, 0.05).unwrap();
    let e2 = Exponent::finite(2.0);
    let id = hilbert_rank_one_certify(&Operator::identity(4, e2, e2), 1.5, &net, &net);
    let id_ok = id.as_ref().is_ok_and(|c| c.distance <= 1.25);
    line(
        all_certified(&r) && max_distance <= 1.25 && id_ok,
        format!(
            "{}/1000, max distance {max_distance:.4}, identity distance {:?}",
            r.aggregates.certified,
            id.map(|c| c.distance).ok()
        ),
    )
}

fn c10() -> Line {
    let r = scenario(
        Scenario::TransferOp,
        Params {
            n: Some(2),
            p: Some(Exponent::finite(2.0)),
            lambda: Some(1.1),
            trials: Some(1000),
            ..Params::default()
        },
        10,
    );
    let admissible = r.details["admissible"].as_bool() == Some(true);
    line(
        all_certified(&r) && admissible && r.aggregates.trials == 2000,
        format!(
            "{}/2000 Y and X* samples, admissible {admissible}",
            r.aggregates.certified
        ),
    )
}

fn c11() -> Line {
    let r = scenario(
        Scenario::LinfSum,
        Params {
            m: Some(2),
            blocks: Some(2),
            p: Some(Exponent::finite(2.0)),
            trials: Some(1000),
            ..Params::default()
        },
        11,
    );
    let exact = r.details["identities_exact"].as_bool() == Some(true);
    line(
        all_certified(&r) && exact,
        format!(
            "{}/1000 sum-sphere samples, identities exact {exact}",
            r.aggregates.certified
        ),
    )
}

fn c12() -> Line {
    let (a, b) = convergent_retraction(4, 2).unwrap();
    let rec = complementation_pair(&a, &b).unwrap();
    let ok = rec.product_is_identity && rec.norm_alpha == 1 && rec.norm_beta == 1 && rec.idempotent;
    line(
        ok,
        format!(
            "T_b T_a = I {}, norms {} {}, P^2 = P {}",
            rec.product_is_identity, rec.norm_alpha, rec.norm_beta, rec.idempotent
        ),
    )
}

fn c13() -> Line {
    let all = [
        Scenario::Topology,
        Scenario::CkCover,
        Scenario::CkxCover,
        Scenario::CkFalsify,
        Scenario::LpOperator,
        Scenario::Hilbert,
        Scenario::TransferOp,
        Scenario::TransferCkx,
        Scenario::LinfSum,
        Scenario::LemmaScaling,
        Scenario::Rescale,
        Scenario::Complementation,
    ];
    let mut differing = Vec::new();
    for s in all {
        let cfg = ScenarioConfig {
            scenario: s,
            params: Params {
                trials: Some(50),
                ..Params::default()
            },
            seed: 13,
        };
        let a = run_scenario(&cfg, 1).unwrap().to_json_without_wall_time();
        let b = run_scenario(&cfg, 2).unwrap().to_json_without_wall_time();
        let c = run_scenario(&cfg, 1).unwrap().to_json_without_wall_time();
        if a != b || a != c {
            differing.push(format!("{s:?}"));
        }
    }
    line(
        differing.is_empty(),
        format!("12 scenarios rerun at 1 and 2 jobs, differing: {differing:?}"),
    )
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("pi-weight exactness", c1, 1),
        ("scaling lemma", c2, 5),
        ("C(K) bump covering", c3, 10),
        ("C(K) falsifier", c4, 1),
        ("C(K,X) covering and transfer", c5, 30),
        ("rescaled covering", c6, 5),
        ("B(l_p) rank truncation", c7, 300),
        ("operator-norm oracles", c8, 120),
        ("Hilbert rank-one", c9, 60),
        ("operator covering transfers", c10, 60),
        ("l_inf sums and identifications", c11, 60),
        ("complementation", c12, 1),
        ("reproducibility", c13, 600),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let l = check();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*limit);
        let ok = l.ok && in_time;
        println!(
            "criterion {:>2} {}: {} ({}; {:.2}s of {}s)",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            l.detail,
            took.as_secs_f64(),
            limit
        );
        if !ok {
            failed.push(i + 1);
        }
    }
    println!("acceptance: {} of 13 criteria pass", 13 - failed.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
