//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use num_traits::Zero;
use urngame::analysis::{
    expected_hitting_time, expected_sojourn, hitting_time_cdf, p_safe, partition, safe_probability_series,
    sojourn_operator, sojourn_time_cdf, stationary_distribution,
};
use urngame::export::write_printed_form_audit;
use urngame::incarnation::{
    current_incarnation, derive_id, valid_incarnations, validate_peer_id, CertificateFields, IncarnationParams, Time,
};
use urngame::metrics::Beta;
use urngame::model::class_indices_for;
use urngame::sim::{binomial_stderr, estimate_metrics, MonteCarloConfig, Start, StopRule};
use urngame::*;

const CS: [usize; 3] = [4, 7, 10];
const SS: [usize; 4] = [1, 5, 20, 50];
const MUS: [f64; 3] = [0.1, 0.25, 0.5];

type Outcome = Result<String, String>;

fn grid() -> impl Iterator<Item = (usize, usize, f64)> {
    CS.into_iter()
        .flat_map(|c| SS.into_iter().flat_map(move |s| MUS.into_iter().map(move |mu| (c, s, mu))))
}

fn params(c: usize, s: usize, mu: f64) -> Params {
    Params::new(c, s, mu).expect("grid parameters are valid")
}

fn constrained() -> [GameVariant; 2] {
    [GameVariant::GAME1_CONSTRAINED, GameVariant::GAME2_CONSTRAINED]
}

fn kernel_stochasticity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (c, s, mu) in grid() {
        for v in GameVariant::ALL {
            let dev = build_kernel(v, &params(c, s, mu)).max_row_sum_deviation();
            worst = worst.max(dev);
            if dev >= 1e-12 {
                failures.push(format!("{v} c={c} s={s} mu={mu}: {dev:e}"));
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("max |row sum - 1| = {worst:e} over 144 kernels"))
    } else {
        Err(failures.join("; "))
    }
}

fn alpha_is_stationary() -> Outcome {
    let (mut worst_fixed, mut worst_solved): (f64, f64) = (0.0, 0.0);
    let mut failures = Vec::new();
    for (c, s, mu) in grid() {
        let pr = params(c, s, mu);
        let alpha = initial_distribution(&pr);
        for v in constrained() {
            let k = build_kernel(v, &pr);
            let fixed = alpha.max_abs_diff(&k.matrix().left_mul(alpha.as_slice()));
            let solved = match stationary_distribution(&k) {
                Ok(pi) => alpha.max_abs_diff(pi.as_slice()),
                Err(e) => {
                    failures.push(format!("{v} c={c} s={s} mu={mu}: {e}"));
                    continue;
                }
            };
            worst_fixed = worst_fixed.max(fixed);
            worst_solved = worst_solved.max(solved);
            if fixed >= 1e-12 || solved >= 1e-10 {
                failures.push(format!("{v} c={c} s={s} mu={mu}: |aP-a|={fixed:e} |pi-a|={solved:e}"));
            }
        }
    }
    let summary = format!("max |aP - a| = {worst_fixed:e}, max |pi - a| = {worst_solved:e}");
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.join("; ")))
    }
}

fn structural_absorption() -> Outcome {
    let mut failures = Vec::new();
    let mut check = |label: &str, ok: bool| {
        if !ok {
            failures.push(label.to_string());
        }
    };
    for (c, s, mu) in grid() {
        let pr = params(c, s, mu);
        let g1 = partition(&build_kernel(GameVariant::GAME1_UNCONSTRAINED, &pr), false);
        let p_ba = g1.block(StateClass::Polluted, StateClass::Safe).expect("two-way split");
        check(&format!("game1 P_BA c={c} s={s} mu={mu}"), p_ba.entries().all(|(_, _, v)| *v == 0.0));

        let g2 = build_kernel(GameVariant::GAME2_UNCONSTRAINED, &pr);
        let closed: BTreeSet<usize> = class_indices_for(&pr, StateClass::PollutedClosed).into_iter().collect();
        let leaks = g2.matrix().entries().any(|(i, j, v)| closed.contains(&i) && !closed.contains(&j) && *v != 0.0);
        check(&format!("game2 D closed c={c} s={s} mu={mu}"), !leaks);
    }
    // The same facts in exact arithmetic.
    let exact = ExactParams::new(4, 2, Exact::new(1.into(), 4.into())).expect("valid");
    let g1 = partition(&build_kernel(GameVariant::GAME1_UNCONSTRAINED, &exact), false);
    let p_ba = g1.block(StateClass::Polluted, StateClass::Safe).expect("two-way split");
    check("exact game1 P_BA", p_ba.entries().all(|(_, _, v)| v.is_zero()));
    let g2 = build_kernel(GameVariant::GAME2_UNCONSTRAINED, &exact);
    let closed: BTreeSet<usize> = class_indices_for(&exact, StateClass::PollutedClosed).into_iter().collect();
    check(
        "exact game2 D closed",
        !g2.matrix().entries().any(|(i, j, v)| closed.contains(&i) && !closed.contains(&j) && !v.is_zero()),
    );
    if failures.is_empty() {
        Ok("P_BA = 0 for game 1 and D closed for game 2 on 36 cells plus an exact rational cell".into())
    } else {
        Err(failures.join("; "))
    }
}

fn safety_independent_of_spares() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (c, s, mu) in grid() {
        let pr = params(c, s, mu);
        let target = p_safe(&pr);
        let safe = class_indices_for(&pr, StateClass::Safe);
        for v in constrained() {
            match stationary_distribution(&build_kernel(v, &pr)) {
                Ok(pi) => {
                    let gap = (pi.mass_on(&safe) - target).abs();
                    worst = worst.max(gap);
                    if gap >= 1e-10 {
                        failures.push(format!("{v} c={c} s={s} mu={mu}: gap {gap:e}"));
                    }
                }
                Err(e) => failures.push(format!("{v} c={c} s={s} mu={mu}: {e}")),
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("max |pi(A) - P_safe| = {worst:e}"))
    } else {
        Err(failures.join("; "))
    }
}

fn monte_carlo_agreement() -> Outcome {
    const TRIALS: u64 = 100_000;
    const SEED: u64 = 20_240_601;
    let pr = params(4, 2, 0.25);
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut judge = |label: String, z: f64, limit: f64| {
        worst = worst.max(z.abs());
        if z.abs() > limit {
            failures.push(format!("{label}: z = {z:.2}"));
        }
    };
    for v in GameVariant::ALL {
        let kernel = build_kernel(v, &pr);
        let two_way = partition(&kernel, false);
        let stop = if v.is_constrained() { StopRule::FirstPollution } else { StopRule::Absorption };
        let config = MonteCarloConfig { stop, start: Start::SampleInitial, ..MonteCarloConfig::new(TRIALS, SEED) };
        let est = match estimate_metrics(v, &pr, &config) {
            Ok(e) => e,
            Err(e) => return Err(format!("{v}: {e}")),
        };
        let et = expected_hitting_time(&two_way).map_err(|e| e.to_string())?;
        judge(format!("{v} E(T)"), est.hitting_time.z_score(et), 3.0);
        lines.push(format!("{v}: E(T) {et:.4} vs {:.4}", est.hitting_time.mean));
        let cdf = hitting_time_cdf(&two_way, 50);
        for k in [1u64, 5, 10, 50] {
            let p = cdf[k as usize];
            let z = urngame::sim::z_score(est.hitting_cdf(k), p, binomial_stderr(p, TRIALS));
            judge(format!("{v} P(T<={k})"), z, 4.0);
        }
        if !v.is_constrained() {
            let op = sojourn_operator(&partition(&kernel, true)).map_err(|e| e.to_string())?;
            let eta = expected_sojourn(&op).map_err(|e| e.to_string())?;
            judge(format!("{v} E(T_A)"), est.safe_time.z_score(eta), 3.0);
            lines.push(format!("{v}: E(T_A) {eta:.4} vs {:.4}", est.safe_time.mean));
            let cdf = sojourn_time_cdf(&op, 50);
            for k in [1u64, 5, 10, 50] {
                let p = cdf[k as usize];
                let z = urngame::sim::z_score(est.safe_time_cdf(k), p, binomial_stderr(p, TRIALS));
                judge(format!("{v} P(T_A<={k})"), z, 4.0);
            }
        }
    }
    let summary = format!("max |z| = {worst:.2}; {}", lines.join("; "));
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", failures.join("; ")))
    }
}

fn games_agree_with_one_spare() -> Outcome {
    let mut worst: f64 = 0.0;
    for c in CS {
        for mu in MUS {
            let pr = params(c, 1, mu);
            for adversary in [Adversary::Unconstrained, Adversary::Constrained] {
                let a = build_kernel(GameVariant::new(Game::One, adversary), &pr);
                let b = build_kernel(GameVariant::new(Game::Two, adversary), &pr);
                let d = kernel_diff(&a, &b, 0.0).map_err(|e| e.to_string())?;
                worst = d.iter().map(EntryDiff::magnitude).fold(worst, f64::max);
            }
        }
    }
    if worst < 1e-12 {
        Ok(format!("max entry gap {worst:e}"))
    } else {
        Err(format!("max entry gap {worst:e}"))
    }
}

fn game1_outlasts_game2() -> Outcome {
    let mut failures = Vec::new();
    let mut table = Vec::new();
    for mu in MUS {
        let mut prev: Option<f64> = None;
        for s in SS {
            let pr = params(7, s, mu);
            let et = expected_hitting_time(&partition(&build_kernel(GameVariant::GAME1_UNCONSTRAINED, &pr), false))
                .map_err(|e| e.to_string())?;
            let op = sojourn_operator(&partition(&build_kernel(GameVariant::GAME2_UNCONSTRAINED, &pr), true))
                .map_err(|e| e.to_string())?;
            let eta = expected_sojourn(&op).map_err(|e| e.to_string())?;
            let ratio = et / eta;
            table.push(format!("mu={mu} s={s}: {et:.3}/{eta:.3}={ratio:.3}"));
            if et < eta {
                failures.push(format!("mu={mu} s={s}: E(T) {et:.4} < E(T_A) {eta:.4}"));
            }
            if let Some(p) = prev {
                if ratio < p {
                    failures.push(format!("mu={mu}: ratio falls to {ratio:.4} at s={s}"));
                }
            }
            prev = Some(ratio);
        }
    }
    if failures.is_empty() {
        Ok(table.join("; "))
    } else {
        Err(format!("{} violations: {}; values: {}", failures.len(), failures.join("; "), table.join("; ")))
    }
}

fn safe_cluster_limits() -> Outcome {
    const ELL: f64 = 100.0;
    const HORIZON: usize = 1000;
    const WINDOW: usize = 100;
    let pr = params(7, 5, 0.25);
    let limit = ELL * p_safe(&pr);
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for v in GameVariant::ALL {
        let k = build_kernel(v, &pr);
        for beta in [Beta::Origin, Beta::Initial] {
            let series: Vec<f64> = safe_probability_series(&k, &beta.distribution(&pr), HORIZON)
                .map_err(|e| e.to_string())?
                .into_iter()
                .map(|p| ELL * p)
                .collect();
            let label = format!("{v} from {beta:?}");
            if v.is_constrained() {
                let settled = (0..=HORIZON - WINDOW)
                    .find(|&n| ((series[n + WINDOW] - series[n]) / series[n]).abs() < 1e-6);
                match settled {
                    Some(n) if ((series[n] - limit) / limit).abs() < 1e-6 => {
                        notes.push(format!("{label}: settled by n={n} at {:.4}", series[n]))
                    }
                    Some(n) => failures.push(format!("{label}: settled at {:.6}, limit {limit:.6}", series[n])),
                    None => failures.push(format!("{label}: no 1e-6 plateau within {HORIZON} rounds")),
                }
            } else {
                match series.iter().position(|&e| e < 0.5) {
                    Some(n) => notes.push(format!("{label}: below 0.5 at n={n}")),
                    None => failures.push(format!("{label}: E(N_n) stays >= 0.5, final {:.4}", series[HORIZON])),
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("limit {limit:.4}; {}", notes.join("; ")))
    } else {
        Err(failures.join("; "))
    }
}

/// Whether a peer with local clock `t_holder` presents an id the verifier at
/// `t_verifier` accepts.
fn accepts(p: &IncarnationParams, cert: &CertificateFields, t_holder: Time, t_verifier: Time) -> bool {
    let k = current_incarnation(p, t_holder).expect("holder clock after validity start");
    let id = derive_id(cert, k, 160).expect("valid id length");
    validate_peer_id(&id, cert, p, t_verifier).is_accept()
}

fn incarnation_properties() -> Outcome {
    let mut failures = Vec::new();
    let a = CertificateFields::new(*b"CN=a", 0);
    let b = CertificateFields::new(*b"CN=b", 0);
    for il in [1, 7, 100] {
        for gw in [0, 1, il / 2, il] {
            let p = IncarnationParams::new(0, il, gw).expect("valid params");
            let start = (gw + 1) / 2;
            let mut prev_k = 0;
            for t in start..start + 5 * il {
                let set = valid_incarnations(&p, t).expect("t after validity start");
                let k = current_incarnation(&p, t).expect("t after validity start");
                if !(1..=2).contains(&set.len()) {
                    failures.push(format!("il={il} gw={gw} t={t}: {} valid", set.len()));
                }
                if set.len() == 2 && set.iter().max().unwrap() - set.iter().min().unwrap() != 1 {
                    failures.push(format!("il={il} gw={gw} t={t}: non-adjacent {set:?}"));
                }
                if gw == 0 && set != BTreeSet::from([k]) {
                    failures.push(format!("il={il} t={t}: gw=0 gives {set:?}"));
                }
                if k < prev_k {
                    failures.push(format!("il={il} t={t}: k decreased"));
                }
                prev_k = k;
            }
        }
    }
    // Two correct peers, 100 skews spread over [-GW, GW], at every phase of an incarnation.
    let p = IncarnationParams::new(0, 100, 40).expect("valid params");
    for i in 0..100 {
        let skew = -40 + (80 * i) / 99;
        for t in 100..400 {
            let (ta, tb) = (t, t + skew);
            if !accepts(&p, &a, ta, tb) && !accepts(&p, &b, tb, ta) {
                failures.push(format!("skew {skew} t={t}: mutual rejection"));
            }
        }
    }
    // Replay of an id after both accepting incarnations have expired.
    let k = current_incarnation(&p, 150).expect("valid");
    let stale = derive_id(&a, k, 160).expect("valid");
    let expired = p.expiry(k + 1) + p.gw() / 2 + 1;
    if validate_peer_id(&stale, &a, &p, expired).is_accept() {
        failures.push(format!("id of incarnation {k} replayed at t={expired} accepted"));
    }
    if !validate_peer_id(&stale, &a, &p, 150).is_accept() {
        failures.push("fresh id rejected".into());
    }
    if failures.is_empty() {
        Ok("validity sets, monotonicity, 100-skew grid and replay all hold".into())
    } else {
        failures.truncate(10);
        Err(failures.join("; "))
    }
}

fn printed_forms_audit() -> Outcome {
    let mut failures = Vec::new();
    for (c, s, mu) in grid() {
        let pr = params(c, s, mu);
        for v in [GameVariant::GAME1_UNCONSTRAINED, GameVariant::GAME1_CONSTRAINED] {
            let d = kernel_diff(&printed_kernel(v, &pr), &build_kernel(v, &pr), 1e-9).map_err(|e| e.to_string())?;
            if !d.is_empty() {
                failures.push(format!("{v} c={c} s={s} mu={mu}: {} entries differ", d.len()));
            }
        }
    }
    let pr = params(4, 2, 0.25);
    let mut regenerated = Vec::new();
    let counts = write_printed_form_audit(
        &mut regenerated,
        &pr,
        &[GameVariant::GAME2_UNCONSTRAINED, GameVariant::GAME2_CONSTRAINED],
        1e-9,
    )
    .map_err(|e| e.to_string())?;
    if counts.contains(&0) {
        failures.push(format!("game 2 report unexpectedly empty: {counts:?}"));
    }
    let artifact = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/game2-discrepancies.csv");
    match std::fs::read(&artifact) {
        Ok(committed) if committed == regenerated => {}
        Ok(_) => failures.push(format!("{} is stale", artifact.display())),
        Err(e) => failures.push(format!("{}: {e}", artifact.display())),
    }
    if failures.is_empty() {
        Ok(format!("game 1 printed forms match on 36 cells; game 2 report rows {counts:?}"))
    } else {
        Err(failures.join("; "))
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("kernel rows are stochastic", kernel_stochasticity),
        ("fresh-urn law is stationary for constrained games", alpha_is_stationary),
        ("absorbing structure of unconstrained games", structural_absorption),
        ("long-run safety does not depend on s", safety_independent_of_spares),
        ("Monte Carlo agrees with exact metrics", monte_carlo_agreement),
        ("games coincide when s = 1", games_agree_with_one_spare),
        ("game 1 E(T) outlasts game 2 E(T_A), ratio rising in s", game1_outlasts_game2),
        ("safe-cluster expectation limits", safe_cluster_limits),
        ("incarnation validity properties", incarnation_properties),
        ("printed-form audit", printed_forms_audit),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
