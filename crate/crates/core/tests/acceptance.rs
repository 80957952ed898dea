//! Acceptance criteria. Each test prints one `criterion NN PASS|FAIL` line and
//! then asserts. Run with `cargo test --release --test acceptance -- --nocapture`.

use coop_outage::analytics::{
    bound_set, chernoff_conditional_bound, chernoff_multicast_bound, chernoff_unicast_bound,
    exact_outage, optimal_chernoff_eps, solve_gamma_star, term_exponent,
};
use coop_outage::exponent::{asymptotic_exponent, empirical_slope, network_size_gap};
use coop_outage::montecarlo::{estimate_direct_outage, estimate_outage};
use coop_outage::numerics::erlang_tails;
use coop_outage::protocol::{
    achievability_schedule, converse_outage_floor, rate_profile, CastMode, ProtocolParams,
};

const SNR: f64 = 1.0;

fn fig2() -> ProtocolParams {
    ProtocolParams::from_threshold(0.5, 0.5, SNR).unwrap()
}

fn verdict(n: u32, name: &str, ok: bool, detail: &str) {
    println!("criterion {n:02} {}: {name} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {name}: {detail}");
}

fn linspace_open(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[test]
fn c01_monte_carlo_matches_exact() {
    let settings = [
        fig2(),
        ProtocolParams::new(0.3, 0.3, SNR).unwrap(),
        ProtocolParams::new(0.8, 0.7, SNR).unwrap(),
    ];
    let mut worst = 0.0f64;
    let mut misses = Vec::new();
    for (s, params) in settings.iter().enumerate() {
        for k in [2, 5, 20, 50, 100] {
            let pair = estimate_outage(params, k, 1_000_000, 1000 + s as u64, workers()).unwrap();
            for mode in CastMode::BOTH {
                let exact = exact_outage(params, k, mode).unwrap();
                let est = pair.get(mode);
                if est.std_err > 0.0 {
                    worst = worst.max((est.p_hat - exact).abs() / est.std_err);
                }
                if !est.agrees_with(exact, 3.0) {
                    misses.push(format!("setting {s} K={k} {mode}: sim {} exact {exact}", est.p_hat));
                }
            }
        }
    }
    verdict(
        1,
        "Monte Carlo within 3 standard errors of exact outage",
        misses.is_empty(),
        &format!("30 comparisons, worst {worst:.2} sigma; misses {misses:?}"),
    );
}

#[test]
fn c02_two_node_closed_form() {
    let mut err = 0.0f64;
    for (alpha, beta) in [(fig2().alpha(), 0.5), (0.2, 0.1), (0.9, 0.8), (0.5, 0.99)] {
        let p = ProtocolParams::new(alpha, beta, SNR).unwrap();
        let miss = 1.0 - (-2.0 * alpha * (1.0 - beta)).exp();
        let uc = (1.0 - alpha) * (alpha * miss + (1.0 - alpha));
        let mc = (1.0 - alpha).powi(2) + 2.0 * alpha * (1.0 - alpha) * miss;
        err = err.max((exact_outage(&p, 2, CastMode::Unicast).unwrap() - uc).abs());
        err = err.max((exact_outage(&p, 2, CastMode::Multicast).unwrap() - mc).abs());
    }
    let uc = exact_outage(&fig2(), 2, CastMode::Unicast).unwrap();
    let mc = exact_outage(&fig2(), 2, CastMode::Multicast).unwrap();
    // quoted anchors are given to six decimals (the mc one truncated)
    let anchors = (uc - 0.263347).abs() < 1e-6 && (mc - 0.371876).abs() < 1e-6;
    verdict(
        2,
        "K = 2 exact outage matches hand expansion",
        err < 1e-9 && anchors,
        &format!("max abs error {err:.2e}; uc {uc:.6}, mc {mc:.6}"),
    );
}

#[test]
fn c03_bounds_dominate_exact() {
    let grid = linspace_open(10);
    let mut checked = 0;
    let mut violations = Vec::new();
    for &alpha in &grid {
        for &beta in &grid {
            let p = ProtocolParams::new(alpha, beta, SNR).unwrap();
            for k in [5, 20, 100, 500, 2000] {
                let eps = optimal_chernoff_eps(&p, k).unwrap();
                for mode in CastMode::BOTH {
                    let bound = match mode {
                        CastMode::Unicast => chernoff_unicast_bound(&p, k, eps),
                        CastMode::Multicast => chernoff_multicast_bound(&p, k, eps),
                    }
                    .unwrap();
                    if bound.ln() > 0.0 {
                        continue;
                    }
                    checked += 1;
                    let exact = coop_outage::analytics::ln_exact_outage(&p, k, mode).unwrap().ln();
                    if exact > bound.ln() + 1e-12 {
                        violations.push(format!("a={alpha:.2} b={beta:.2} K={k} {mode}"));
                    }
                }
            }
        }
    }
    let mut cond_checked = 0;
    for alpha_k in [0.5f64, 3.0, 17.0, 120.0, 900.0] {
        for beta in [0.05, 0.5, 0.95] {
            let x = alpha_k * (1.0 - beta);
            let start = x.ceil().max(1.0) as u64;
            for k1 in (start..start + 200).step_by(7) {
                let bound = chernoff_conditional_bound(alpha_k, beta, k1).unwrap().ln();
                let cdf = erlang_tails(k1, x).unwrap().ln_lower;
                cond_checked += 1;
                if cdf > bound + 1e-12 {
                    violations.push(format!("conditional aK={alpha_k} b={beta} k1={k1}"));
                }
            }
        }
    }
    verdict(
        3,
        "Chernoff bounds are never below the exact values",
        violations.is_empty() && checked > 0,
        &format!("{checked} mixture bounds <= 1 and {cond_checked} conditional bounds checked; violations {violations:?}"),
    );
}

#[test]
fn c04_multicast_is_about_k_times_unicast() {
    let k = 500;
    let uc = exact_outage(&fig2(), k, CastMode::Unicast).unwrap();
    let mc = exact_outage(&fig2(), k, CastMode::Multicast).unwrap();
    let ratio = mc / uc;
    let kf = k as f64;
    verdict(
        4,
        "exact_mc / exact_uc at K = 500 lies in [K/2, 2K]",
        ratio >= kf / 2.0 && ratio <= 2.0 * kf,
        &format!("ratio {ratio:.2}"),
    );
}

#[test]
fn c05_approximation_within_factor_five() {
    let mut ratios = Vec::new();
    for k in [200, 300, 500, 1000, 2000, 5000] {
        let b = bound_set(&fig2(), k).unwrap();
        ratios.push((k, (b.approx_uc.ln() - b.exact_uc.ln()).exp()));
    }
    let ok = ratios.iter().all(|&(_, r)| (0.2..=5.0).contains(&r));
    verdict(
        5,
        "approx_uc / exact_uc in [1/5, 5] for K >= 200",
        ok,
        &format!("{ratios:.3?}"),
    );
}

#[test]
fn c06_slopes_match_exponent() {
    let p = fig2();
    let e = asymptotic_exponent(&p).unwrap();
    let su = empirical_slope(&p, 2000, CastMode::Unicast).unwrap();
    let sm = empirical_slope(&p, 2000, CastMode::Multicast).unwrap();
    let modes_agree = (su - sm).abs() / su.abs().max(sm.abs()) < 0.05;
    let near_e = (su - e).abs() / e < 0.1 && (sm - e).abs() / e < 0.1;
    verdict(
        6,
        "uc and mc slopes between K = 2000 and 4000 agree and match the exponent",
        modes_agree && near_e,
        &format!("slope uc {su:.6}, mc {sm:.6}, exponent {e:.6}"),
    );
}

#[test]
fn c07_stationary_point() {
    let grid = linspace_open(50);
    let mut worst_residual = 0.0f64;
    let mut bad = Vec::new();
    for &alpha in &grid {
        for &beta in &grid {
            let s = solve_gamma_star(alpha, beta).unwrap();
            let g = s.gamma_star;
            let residual = (g * g / (1.0 - g) - s.mu).abs();
            worst_residual = worst_residual.max(residual);
            if residual >= 1e-10 || !(g > alpha * (1.0 - beta) && g < 1.0) {
                bad.push(format!("a={alpha:.3} b={beta:.3} gamma={g}"));
                continue;
            }
            // brute force over 10^4 points of (alpha (1 - beta), 1)
            let lo = alpha * (1.0 - beta);
            let n = 10_000;
            let step = (1.0 - lo) / (n + 1) as f64;
            let (mut best_g, mut best_e) = (f64::NAN, f64::INFINITY);
            for i in 1..=n {
                let gi = lo + step * i as f64;
                let e = term_exponent(alpha, beta, gi).unwrap();
                if e < best_e {
                    (best_g, best_e) = (gi, e);
                }
            }
            if (best_g - g).abs() > step {
                bad.push(format!("a={alpha:.3} b={beta:.3} brute {best_g} vs {g}"));
            }
        }
    }
    verdict(
        7,
        "gamma* is the stationary point and the brute-force optimum",
        bad.is_empty(),
        &format!("2500 cells, worst residual {worst_residual:.2e}; failures {bad:?}"),
    );
}

/// With beta = 1/K each listener's phase-2 gain has mean about 1 against a
/// threshold of 1 - 1/K, so each misses with probability near 1/2 and
/// multicast outage tends to 1. This criterion is expected to fail.
#[test]
fn c08_achievability_schedule() {
    let mut rows = Vec::new();
    for k in [100usize, 1000, 10_000, 100_000] {
        let p = achievability_schedule(k, SNR).unwrap();
        rows.push((
            k,
            exact_outage(&p, k, CastMode::Multicast).unwrap(),
            rate_profile(&p).unwrap().rate_fraction,
        ));
    }
    let mc_decreasing = rows.windows(2).all(|w| w[1].1 < w[0].1);
    let rate_increasing = rows.windows(2).all(|w| w[1].2 > w[0].2);
    let small_tail = rows[3].1 < 1e-2;
    let detail = rows
        .iter()
        .map(|(k, mc, r)| format!("K={k}: mc {mc:.4e}, r {r:.4}"))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(
        8,
        "alpha = 1/ln K, beta = 1/K drives multicast outage to 0 as the rate fraction grows",
        mc_decreasing && rate_increasing && small_tail,
        &detail,
    );
}

#[test]
fn c09_converse_and_direct_link() {
    let floor = converse_outage_floor(1.25, SNR).unwrap();
    let a = estimate_direct_outage(1.25, SNR, 10, 200_000, 91, workers()).unwrap();
    let b = estimate_direct_outage(1.25, SNR, 1000, 200_000, 92, workers()).unwrap();
    let z = (a.p_hat - b.p_hat).abs() / (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
    verdict(
        9,
        "converse floor 0.2 at R = 1.25, direct-link outage independent of K",
        floor == 0.2 && z <= 3.0,
        &format!("floor {floor}; K=10 {:.5}, K=1000 {:.5}, z {z:.2}", a.p_hat, b.p_hat),
    );
}

#[test]
fn c10_network_size_gap() {
    let g = network_size_gap(&fig2(), 1e-3).unwrap();
    verdict(
        10,
        "K_mc - K_uc within 25% of ln(K_uc) / E at eps = 1e-3",
        g.relative_error <= 0.25,
        &format!(
            "K_uc {}, K_mc {}, gap {}, predicted {:.2}, relative error {:.3}",
            g.k_uc, g.k_mc, g.measured_gap, g.predicted_gap, g.relative_error
        ),
    );
}

fn cli_output(args: &[&str], workers: usize, dir: &std::path::Path) -> Vec<u8> {
    let out = dir.join(format!("out-{workers}.csv"));
    let env = dir.join(format!("env-{workers}.csv"));
    let w = workers.to_string();
    let mut full: Vec<&str> = vec!["coop-outage"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--workers", &w]);
    let figure3 = args[0] == "figure3";
    let (o, e) = (out.to_str().unwrap().to_owned(), env.to_str().unwrap().to_owned());
    if figure3 {
        full.extend_from_slice(&["--out", &o, "--envelope-out", &e]);
    }
    let mut buf = Vec::new();
    coop_outage::cli::run_from(&full, &mut buf).unwrap();
    if figure3 {
        buf.extend(std::fs::read(&out).unwrap());
        buf.extend(std::fs::read(&env).unwrap());
    }
    buf
}

#[test]
fn c11_cli_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let commands: &[&[&str]] = &[
        &["rates", "--g", "0.5"],
        &["capacity", "--rate", "1.25", "--antennas", "2,1,3"],
        &["simulate", "--k-list", "5,40", "--trials", "30000", "--seed", "4"],
        &["exact", "--k-list", "5,40,300"],
        &["bounds", "--k-list", "5,40,300"],
        &["figure2", "--k-list", "10,30", "--trials", "20000", "--seed", "9"],
        &["figure3", "--grid", "30", "--bins", "20"],
        &["required-k", "--eps", "1e-3"],
        &["exponent", "--alpha", "0.4", "--beta", "0.3", "--k", "500"],
    ];
    let mut differing = Vec::new();
    for args in commands {
        let base = cli_output(args, 1, dir.path());
        for w in [2, 8] {
            if cli_output(args, w, dir.path()) != base {
                differing.push(format!("{} with {w} workers", args[0]));
            }
        }
    }
    verdict(
        11,
        "every CLI command is byte-identical across 1, 2 and 8 workers",
        differing.is_empty(),
        &format!("{} commands; differing {differing:?}", commands.len()),
    );
}

#[test]
fn c12_phase2_power_budget() {
    let pair = estimate_outage(&fig2(), 100, 100_000, 12, workers()).unwrap();
    let m = pair.phase2_power;
    let z = (m.mean - 1.0).abs() / m.std_err;
    verdict(
        12,
        "mean phase-2 sum power within 3 standard errors of P at K = 100",
        z <= 3.0,
        &format!("mean {:.5} P, std err {:.5}, z {z:.2}", m.mean, m.std_err),
    );
}
