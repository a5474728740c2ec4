//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one `PASS`/`FAIL` line each; exits nonzero if any fails.
//!
//! Expected values come from oracles written here, independent of the code
//! under test: hand-computed channel algebra, a closed-form single-user
//! optimum, and a dual search with Burer–Monteiro inner solves for small
//! SDPs.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::Rng;

use irs_sop::ao::AoResult;
use irs_sop::channel::{sample_channels, ChannelSet, PhaseShift, SystemConfig};
use irs_sop::dinkelbach::{dinkelbach_solve, DinkelbachSettings};
use irs_sop::lift::{build_lift, eval_ratio_forms, homogenize, LiftedQ, RatioObjective};
use irs_sop::linalg::herm_eig;
use irs_sop::metrics::z_value;
use irs_sop::receiver::optimize_receivers;
use irs_sop::rng::{complex_normal, stream, Purpose, SimRng};
use irs_sop::sdp::{solve, SdpInstance, DEFAULT_MAX_ITER, DEFAULT_TOL};
use irs_sop::{CMatrix, CVector, ReceiveMatrix, C64};
use irs_sop_cli::commands::{run_trial, validate_sop, TrialSummary};
use irs_sop_cli::config::{ExperimentSpec, Receivers, Scheme};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(tag: u64) -> SimRng {
    stream(0xACCE_0000 + tag, 0, Purpose::Auxiliary)
}

fn random_unit(rng: &mut SimRng, n: usize) -> CVector {
    let v = CVector::new((0..n).map(|_| complex_normal(rng)).collect());
    v.normalized().expect("nonzero draw")
}

// ---- hand-written channel algebra ----------------------------------------

/// `h_i + G Φ f_i`, entry by entry.
fn composite(chs: &ChannelSet, phi: &PhaseShift, i: usize) -> Vec<C64> {
    let nt = chs.h.rows();
    let ns = chs.f.rows();
    (0..nt)
        .map(|r| {
            let mut x = chs.h[(r, i)];
            for n in 0..ns {
                x += chs.g[(r, n)] * C64::from_polar(1.0, phi.angles()[n]) * chs.f[(n, i)];
            }
            x
        })
        .collect()
}

fn gain(w: &[C64], a: &[C64]) -> f64 {
    w.iter().zip(a).map(|(w, a)| w.conj() * a).sum::<C64>().norm_sqr()
}

/// `z_k` at receive vector `w`, from the SINR definition.
fn z_oracle(cfg: &SystemConfig, chs: &ChannelSet, comp: &[Vec<C64>], w: &[C64], k: usize) -> f64 {
    let wn: f64 = w.iter().map(|x| x.norm_sqr()).sum();
    let interference: f64 = (0..cfg.users)
        .filter(|&i| i != k)
        .map(|i| cfg.rho[i] * gain(w, &comp[i]))
        .sum();
    let sinr = cfg.rho[k] * gain(w, &comp[k]) / (interference + cfg.sigma2_b * wn);
    let fk: f64 = (0..chs.f.rows()).map(|n| chs.f[(n, k)].norm_sqr()).sum();
    cfg.sigma2_e * ((1.0 + sinr) / 2f64.powf(cfg.rate[k]) - 1.0) / cfg.rho[k] / (1.0 + fk)
}

// ---- criteria ---------------------------------------------------------------

fn criterion_1() -> Outcome {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    let mut nontrivial = 0;
    for c in 0..10 {
        let mut spec = ExperimentSpec {
            users: [1, 2, 4][r.random_range(0..3)],
            nt: [2, 4, 10][r.random_range(0..3)],
            ns: [4, 8, 16][r.random_range(0..3)],
            ne: [1, 2, 4][r.random_range(0..3)],
            snr_db: 1.0,
            rate: 2.0,
            seed: 100 + c,
            samples: 100_000,
            ..Default::default()
        };
        // random receivers almost always give certain outage; the optimal
        // ones for the random phase exercise the interior of (0, 1)
        for receivers in [Receivers::Random, Receivers::Optimal] {
            spec.receivers = receivers;
            let start = Instant::now();
            let (table, _) = validate_sop(&spec).map_err(|e| e.to_string())?;
            slowest = slowest.max(start.elapsed());
            let (cf, gap) = (table.column("closed_form_sop").unwrap(), table.column("gap").unwrap());
            for row in &table.rows {
                let p: f64 = row[cf].parse().unwrap();
                worst = worst.max(row[gap].parse().unwrap());
                nontrivial += usize::from(p > 0.01 && p < 0.99);
            }
        }
    }
    check(
        worst <= 0.01 && slowest <= Duration::from_secs(60) && nontrivial > 0,
        format!("max |closed form − empirical| = {worst:.4} (≤ 0.01), {nontrivial} users with SOP in (0.01, 0.99), slowest config {slowest:.1?}"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let mut worst_margin = f64::INFINITY;
    for inst in 0..50u64 {
        let users = r.random_range(1..=4);
        let nt = r.random_range(1..=8);
        let ns = r.random_range(1..=8);
        let cfg = SystemConfig::from_snr_db(users, nt, ns, 2, 1.0, 2.0, inst);
        let chs = sample_channels(&cfg, &mut stream(inst, 2, Purpose::Channels));
        let phi = PhaseShift::random(ns, &mut stream(inst, 2, Purpose::Optimizer));
        let w = optimize_receivers(&chs, &phi, &cfg).map_err(|e| e.to_string())?;
        let comp: Vec<Vec<C64>> = (0..users).map(|i| composite(&chs, &phi, i)).collect();
        for k in 0..users {
            let best = z_oracle(&cfg, &chs, &comp, w.w(k), k);
            let mut top = f64::NEG_INFINITY;
            for _ in 0..10_000 {
                let v = random_unit(&mut r, nt);
                top = top.max(z_oracle(&cfg, &chs, &comp, &v, k));
            }
            worst_margin = worst_margin.min(best - top);
        }
    }
    let elapsed = start.elapsed();
    // Nt = 1 draws tie exactly (z ignores the phase of w), so allow roundoff
    check(
        worst_margin >= -1e-12 && elapsed <= Duration::from_secs(120),
        format!("min over users of z(w*) − max z(random) = {worst_margin:.3e} (≥ −1e-12 roundoff), {elapsed:.1?}"),
    )
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let (mut gain_err, mut z_err): (f64, f64) = (0.0, 0.0);
    for inst in 0..100u64 {
        let users = r.random_range(1..=4);
        let nt = r.random_range(1..=6);
        let ns = r.random_range(1..=12);
        let cfg = SystemConfig::from_snr_db(
            users,
            nt,
            ns,
            r.random_range(1..=4),
            r.random_range(-5.0..10.0),
            2.0,
            inst,
        );
        let chs = sample_channels(&cfg, &mut stream(inst, 3, Purpose::Channels));
        let phi = PhaseShift::random(ns, &mut stream(inst, 3, Purpose::Optimizer));
        let w: Vec<CVector> = (0..users).map(|_| random_unit(&mut r, nt)).collect();
        let w = ReceiveMatrix::new(w).map_err(|e| e.to_string())?;
        let lp = build_lift(&chs, &w, &cfg).map_err(|e| e.to_string())?;
        let q_hat = homogenize(&phi);
        for k in 0..users {
            for i in 0..users {
                let want = gain(w.w(k), &composite(&chs, &phi, i));
                let via_matrix = lp.m(i, k).quad_form(&q_hat).re + lp.v(i, k);
                let via_generator = lp.lifted_gain(i, k, &q_hat);
                for got in [via_matrix, via_generator] {
                    gain_err = gain_err.max((got - want).abs() / want.max(f64::MIN_POSITIVE));
                }
            }
            let (num, den) = eval_ratio_forms(&lp, &LiftedQ::rank_one(&q_hat), k, RatioObjective::SecrecyOutage)
                .map_err(|e| e.to_string())?;
            let z = z_value(&chs, &phi, &w, &cfg, k).map_err(|e| e.to_string())?;
            z_err = z_err.max((num / den - z).abs() / z.abs().max(1.0));
        }
    }
    check(
        gain_err <= 1e-9 && z_err <= 1e-8,
        format!("lifted gain rel. error {gain_err:.2e} (≤ 1e-9), N/D vs z error {z_err:.2e} (≤ 1e-8)"),
    )
}

fn dinkelbach_ok(state: &irs_sop::dinkelbach::DinkelbachState, tau: f64) -> bool {
    state.lambdas().windows(2).all(|p| p[1] >= p[0]) && state.f <= tau
}

fn criterion_4() -> Outcome {
    let settings = DinkelbachSettings::default();
    let tau = settings.tau;
    let mut slowest = Duration::ZERO;
    let mut count = 0;
    for (inst, (users, ns)) in [(1, 4), (2, 8), (4, 8), (3, 16), (4, 16)].into_iter().enumerate() {
        for objective in [RatioObjective::SecrecyOutage, RatioObjective::Sinr] {
            let seed = 40 + inst as u64;
            let cfg = SystemConfig::from_snr_db(users, 6, ns, 2, 1.0, 2.0, seed);
            let chs = sample_channels(&cfg, &mut stream(seed, 4, Purpose::Channels));
            let phi = PhaseShift::random(ns, &mut stream(seed, 4, Purpose::Optimizer));
            let w = optimize_receivers(&chs, &phi, &cfg).map_err(|e| e.to_string())?;
            let lp = build_lift(&chs, &w, &cfg).map_err(|e| e.to_string())?;
            let start = Instant::now();
            let out = dinkelbach_solve(&lp, objective, &settings, None).map_err(|e| format!("instance {inst}: {e}"))?;
            slowest = slowest.max(start.elapsed());
            if !dinkelbach_ok(&out.state, tau) {
                return Err(format!(
                    "instance {inst} ({objective:?}): λ {:?}, F {}",
                    out.state.lambdas(),
                    out.state.f
                ));
            }
            count += 1;
        }
    }

    // single user, one BS antenna, all-ones channels: every path adds in
    // phase at θ = 0, so |h + Σ_n e^{jθ_n}|² ≤ (Ns+1)² is attained and the
    // relaxation is tight
    let ns = 7;
    let cfg = SystemConfig::from_snr_db(1, 1, ns, 2, 1.0, 2.0, 0);
    let one = C64::new(1.0, 0.0);
    let chs = ChannelSet {
        h: CMatrix::from_fn(1, 1, |_, _| one),
        g: CMatrix::from_fn(1, ns, |_, _| one),
        f: CMatrix::from_fn(ns, 1, |_, _| one),
    };
    let w = optimize_receivers(&chs, &PhaseShift::zeros(ns), &cfg).map_err(|e| e.to_string())?;
    let lp = build_lift(&chs, &w, &cfg).map_err(|e| e.to_string())?;
    let out = dinkelbach_solve(&lp, RatioObjective::SecrecyOutage, &settings, None).map_err(|e| e.to_string())?;
    let rho = cfg.rho[0];
    let sinr = rho * ((ns + 1) * (ns + 1)) as f64 / cfg.sigma2_b;
    let want = cfg.sigma2_e * ((1.0 + sinr) / 4.0 - 1.0) / rho / (1.0 + ns as f64);
    let err = (out.state.lambda - want).abs();
    check(
        dinkelbach_ok(&out.state, tau) && err <= 1e-4 && slowest <= Duration::from_secs(60),
        format!("{count} instances monotone with F ≤ τ (slowest {slowest:.1?}); certificate λ = {:.6} vs {want:.6} (|Δ| = {err:.1e} ≤ 1e-4)", out.state.lambda),
    )
}

// Oracle for max_Q min_k(a_k + ⟨C_k, Q⟩) over diag(Q) = 1, Q ⪰ 0, by
// minimax duality: the optimum is min over the simplex of the convex
//   φ(ν) = Σ ν_k a_k + max_Q ⟨Σ ν_k C_k, Q⟩,
// minimized here by nested ternary search (K ≤ 3). The inner problem is
// solved on Q = VVᴴ with unit-norm rows v_i ∈ ℂ^{n+1} by exact block
// ascent, v_i ← g_i/‖g_i‖ with g_i = Σ_{j≠i} M_ij v_j.
fn elliptope_max(m: &CMatrix, v: &mut CMatrix) -> f64 {
    let (n, rank) = (v.rows(), v.cols());
    let value = |v: &CMatrix| m.frobenius_inner(&v.matmul(&v.adjoint()));
    let mut current = value(v);
    for _ in 0..20_000 {
        for i in 0..n {
            let mut g = vec![C64::new(0.0, 0.0); rank];
            for j in (0..n).filter(|&j| j != i) {
                for (t, gt) in g.iter_mut().enumerate() {
                    *gt += m[(i, j)] * v[(j, t)];
                }
            }
            let norm = g.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (t, gt) in g.iter().enumerate() {
                    v[(i, t)] = gt / norm;
                }
            }
        }
        let next = value(v);
        let done = next - current <= 1e-15 * next.abs().max(1.0);
        current = next;
        if done {
            break;
        }
    }
    current
}

fn ternary(lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..45 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi))
}

fn random_rows(n: usize, r: &mut SimRng) -> CMatrix {
    let mut v = CMatrix::from_fn(n, n + 1, |_, _| complex_normal(r));
    for i in 0..n {
        let norm = (0..=n).map(|t| v[(i, t)].norm_sqr()).sum::<f64>().sqrt();
        for t in 0..=n {
            v[(i, t)] /= norm;
        }
    }
    v
}

fn dual_oracle(c: &[CMatrix], a: &[f64], r: &mut SimRng) -> f64 {
    let n = c[0].rows();
    let starts: Vec<CMatrix> = (0..4).map(|_| random_rows(n, r)).collect();
    // block ascent can stall near saddles, so each evaluation keeps the best
    // of several fixed starting points
    let phi = |nu: &[f64]| {
        let mut m = CMatrix::zeros(n, n);
        for (ck, w) in c.iter().zip(nu) {
            m.add_scaled(*w, ck);
        }
        let inner = starts
            .iter()
            .map(|v0| elliptope_max(&m, &mut v0.clone()))
            .fold(f64::NEG_INFINITY, f64::max);
        nu.iter().zip(a).map(|(w, ak)| w * ak).sum::<f64>() + inner
    };
    match c.len() {
        1 => phi(&[1.0]),
        2 => ternary(0.0, 1.0, |t| phi(&[t, 1.0 - t])),
        3 => ternary(0.0, 1.0, |t| {
            ternary(0.0, 1.0, |s| phi(&[t, (1.0 - t) * s, (1.0 - t) * (1.0 - s)]))
        }),
        k => unreachable!("oracle handles up to 3 constraints, got {k}"),
    }
}

fn random_hermitian(r: &mut SimRng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| complex_normal(r)).hermitian_part()
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let (mut worst_gap, mut worst_residual): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let n = 4;
        let k = r.random_range(1..=3);
        let c: Vec<CMatrix> = (0..k).map(|_| random_hermitian(&mut r, n)).collect();
        let a: Vec<f64> = (0..k).map(|_| r.random_range(-1.0..1.0)).collect();
        let inst = SdpInstance::new(n, c.clone(), a.clone()).map_err(|e| e.to_string())?;
        let sol = solve(&inst, DEFAULT_TOL, DEFAULT_MAX_ITER).map_err(|e| e.to_string())?;
        let oracle = dual_oracle(&c, &a, &mut r);
        worst_gap = worst_gap.max((sol.u - oracle).abs());
        let diag = (0..n).map(|i| (sol.q[(i, i)] - 1.0).norm()).fold(0.0, f64::max);
        let min_eig = herm_eig(&sol.q).map_err(|e| e.to_string())?.values[0];
        let ineq = (0..k)
            .map(|j| sol.u - (a[j] + c[j].frobenius_inner(&sol.q)))
            .fold(0.0, f64::max);
        worst_residual = worst_residual.max(diag).max(-min_eig).max(ineq);
    }
    check(
        worst_gap <= 1e-3 && worst_residual <= 1e-6,
        format!("max |u − oracle| = {worst_gap:.2e} (≤ 1e-3), max residual {worst_residual:.2e} (≤ 1e-6)"),
    )
}

// ---- AO experiments, shared between criteria --------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct RunKey {
    nt: usize,
    ns: usize,
    ne: usize,
    trial: u64,
    scheme: Scheme,
}

/// Summary and per-round P_out curve of each AO run, shared by criteria 6–8.
type RunCache = HashMap<RunKey, (TrialSummary, Vec<f64>)>;

static RUNS: Mutex<Option<RunCache>> = Mutex::new(None);

const TRIALS: u64 = 20;

fn base_spec() -> ExperimentSpec {
    // K = 4, Nt = 10, Ne = 2, SNR = 1 dB, R = 2, Ns = 32
    ExperimentSpec::default()
}

/// Incumbent summary and `P_out` after rounds 0..=20 (carried forward).
fn ao_run(key: RunKey) -> Result<(TrialSummary, Vec<f64>), String> {
    if let Some(hit) = RUNS.lock().unwrap().get_or_insert_with(HashMap::new).get(&key) {
        return Ok(hit.clone());
    }
    let spec = ExperimentSpec {
        nt: key.nt,
        ns: key.ns,
        ne: key.ne,
        ..base_spec()
    };
    let result: AoResult = run_trial(&spec, None, key.trial, key.scheme).map_err(|e| e.to_string())?;
    let curve = (0..=spec.iter_max).map(|i| result.trace.p_out_at(i)).collect();
    let entry = (TrialSummary::from_result(&result), curve);
    RUNS.lock().unwrap().as_mut().unwrap().insert(key, entry.clone());
    Ok(entry)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn base_key(trial: u64, scheme: Scheme) -> RunKey {
    let s = base_spec();
    RunKey {
        nt: s.nt,
        ns: s.ns,
        ne: s.ne,
        trial,
        scheme,
    }
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut at1 = Vec::new();
    let mut at10 = Vec::new();
    let mut initial = Vec::new();
    let mut incumbent = Vec::new();
    for t in 0..TRIALS {
        let (summary, curve) = ao_run(base_key(t, Scheme::MmSop))?;
        initial.push(curve[0]);
        at1.push(curve[1]);
        at10.push(curve[10]);
        incumbent.push(summary.max_sop);
    }
    let (m1, m10, m0, mi) = (mean(&at1), mean(&at10), mean(&initial), mean(&incumbent));
    let elapsed = start.elapsed();
    check(
        m10 <= m1 && mi <= m0 - 0.05 && elapsed <= Duration::from_secs(1800),
        format!("mean P_out: start {m0:.4}, round 1 {m1:.4}, round 10 {m10:.4}, incumbent {mi:.4} (≤ start − 0.05), {elapsed:.0?}"),
    )
}

fn criterion_7() -> Outcome {
    let mut sop = Vec::new();
    let mut sinr = Vec::new();
    for t in 0..TRIALS {
        sop.push(ao_run(base_key(t, Scheme::MmSop))?.0.max_sop);
        sinr.push(ao_run(base_key(t, Scheme::MmSinr))?.0.max_sop);
    }
    let nonneg = sop.iter().zip(&sinr).filter(|(a, b)| *b - *a >= 0.0).count();
    let (ms, mr) = (mean(&sop), mean(&sinr));
    check(
        ms <= mr && nonneg >= 16,
        format!(
            "mean max-SOP MM-SOP {ms:.4} vs MM-SINR {mr:.4}; MM-SINR ≥ MM-SOP in {nonneg}/{TRIALS} paired draws (≥ 16)"
        ),
    )
}

/// At most one adjacent-pair violation, of at most 0.005.
fn monotone(means: &[f64], increasing: bool) -> bool {
    let drops: Vec<f64> = means
        .windows(2)
        .map(|p| if increasing { p[0] - p[1] } else { p[1] - p[0] })
        .filter(|&d| d > 0.0)
        .collect();
    drops.is_empty() || (drops.len() == 1 && drops[0] <= 0.005)
}

fn sweep_means(values: &[usize], key: impl Fn(usize, u64) -> RunKey) -> Result<Vec<f64>, String> {
    values
        .iter()
        .map(|&v| {
            let xs: Result<Vec<f64>, String> = (0..TRIALS).map(|t| ao_run(key(v, t)).map(|r| r.0.max_sop)).collect();
            xs.map(|xs| mean(&xs))
        })
        .collect()
}

fn criterion_8() -> Outcome {
    let b = base_key(0, Scheme::MmSop);
    let ne = sweep_means(&[1, 2, 4, 6], |v, trial| RunKey { ne: v, trial, ..b })?;
    let ns = sweep_means(&[8, 16, 32], |v, trial| RunKey { ns: v, trial, ..b })?;
    let nt = sweep_means(&[4, 8, 12], |v, trial| RunKey { nt: v, trial, ..b })?;
    let fmt = |m: &[f64]| m.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    check(
        monotone(&ne, true) && monotone(&ns, false) && monotone(&nt, false),
        format!(
            "mean max-SOP: Ne 1,2,4,6 → [{}] (non-decreasing); Ns 8,16,32 → [{}], Nt 4,8,12 → [{}] (non-increasing)",
            fmt(&ne),
            fmt(&ns),
            fmt(&nt)
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = dir.join("out.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_irs-sop"))
        .args(args)
        .args(["--threads", threads, "-o"])
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr)));
    }
    std::fs::read(&out).map_err(|e| e.to_string())
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let commands: [&[&str]; 4] = [
        &[
            "validate-sop",
            "--samples",
            "20000",
            "--set",
            "receivers=optimal",
            "--seed",
            "3",
        ],
        &["optimize", "--set", "ns=8", "--set", "iter_max=4", "--seed", "5"],
        &[
            "sweep",
            "--trials",
            "2",
            "--set",
            "sweep=ne",
            "--set",
            "sweep_values=1,3",
            "--set",
            "ns=6",
            "--set",
            "iter_max=3",
        ],
        &[
            "compare",
            "--trials",
            "3",
            "--set",
            "ns=4",
            "--set",
            "iter_max=3",
            "--seed",
            "9",
        ],
    ];
    for args in commands {
        let first = run_cli(dir.path(), args, "1")?;
        let second = run_cli(dir.path(), args, "1")?;
        let parallel = run_cli(dir.path(), args, "3")?;
        if first != second || first != parallel {
            return Err(format!("{} output differs between reruns", args[0]));
        }
    }
    Ok("validate-sop, optimize, sweep, compare: byte-identical CSV across reruns and thread counts".into())
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "closed-form vs sampled outage", criterion_1),
        (2, "receiver optimality", criterion_2),
        (3, "lift identity", criterion_3),
        (4, "Dinkelbach correctness", criterion_4),
        (5, "SDP solver vs oracle", criterion_5),
        (6, "AO convergence trend", criterion_6),
        (7, "scheme comparison", criterion_7),
        (8, "sweep trends", criterion_8),
        (9, "determinism", criterion_9),
    ];
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {id} ({name}): {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id} ({name}): {detail} [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
