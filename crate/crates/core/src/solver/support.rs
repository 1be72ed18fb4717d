use nalgebra::{DMatrix, DVector};

use crate::chi::Chi;
use crate::error::{Error, Result};
use crate::game::{cursed_bayes_update, Assessment, BeliefSystem, ReceiverStrategy, SenderStrategy, SignalingGame};

use super::{
    deterring_response, verify_cse, BeliefRegion, EquilibriumRecord, PureResponse, SupportSpec, OPT_TOL,
};

/// Smallest probability a declared support member may carry.
const SUPPORT_MIN: f64 = 1e-9;
const ROOT_TOL: f64 = 1e-10;
const SCAN_INTERVALS: usize = 2000;
const NEWTON_BUDGET: usize = 100_000;
const NEWTON_STARTS: usize = 64;
const NEWTON_MAX_STEPS: usize = 500;

/// Equilibria whose supports are exactly `spec` at `chi`.
///
/// With a finite action set the indifference conditions are linear in the
/// sender mix (after clearing the posterior's denominator) and linear in the
/// receiver mix, so both are solved directly; a rank-deficient system has a
/// continuum of solutions and fails with [`Error::Indeterminate`]. Wage games
/// are nonlinear in the sender mix: one unknown is bracketed by a scan and
/// bisection, several by multi-start damped Newton.
///
/// Every returned record has passed [`verify_cse`]. Messages outside all
/// sender supports are off path and get a deterring pure response regardless
/// of the declared receiver support.
pub fn solve_support_cse(game: &SignalingGame, chi: Chi, spec: &SupportSpec) -> Result<Vec<EquilibriumRecord>> {
    spec.check(game)?;
    if game.is_wage() {
        solve_wage(game, chi, spec)
    } else {
        solve_finite(game, chi, spec)
    }
}

fn solve_finite(game: &SignalingGame, chi: Chi, spec: &SupportSpec) -> Result<Vec<EquilibriumRecord>> {
    let (nt, nm) = (game.n_types(), game.n_messages());
    let x = chi.value();
    let prior = game.prior().weights();
    let sent = spec.sent_messages();

    // sender unknowns sigma(m | t), m in S_t
    let svars: Vec<(usize, usize)> = (0..nt).flat_map(|t| spec.sender[t].iter().map(move |&m| (t, m))).collect();
    let sidx = |t: usize, m: usize| svars.iter().position(|&v| v == (t, m));
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for &m in &sent {
        let acts = &spec.receiver[m];
        for &aj in &acts[1..] {
            let d: Vec<f64> = (0..nt).map(|t| game.receiver_payoff(t, m, acts[0]) - game.receiver_payoff(t, m, aj)).collect();
            let total: f64 = (0..nt).map(|t| prior[t] * d[t]).sum();
            let mut row = vec![0.0; svars.len()];
            for tp in 0..nt {
                if let Some(i) = sidx(tp, m) {
                    row[i] = x * prior[tp] * total + (1.0 - x) * prior[tp] * d[tp];
                }
            }
            rows.push(row);
            rhs.push(0.0);
        }
    }
    for t in 0..nt {
        let mut row = vec![0.0; svars.len()];
        for &m in &spec.sender[t] {
            row[sidx(t, m).unwrap()] = 1.0;
        }
        rows.push(row);
        rhs.push(1.0);
    }
    let Some(sigma) = solve_linear(&rows, &rhs, "sender")? else { return Ok(Vec::new()) };

    // receiver unknowns rho(a | m), m sent, a in A_m
    let rvars: Vec<(usize, usize)> = sent.iter().flat_map(|&m| spec.receiver[m].iter().map(move |&a| (m, a))).collect();
    let ridx = |m: usize, a: usize| rvars.iter().position(|&v| v == (m, a)).unwrap();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for t in 0..nt {
        let s = &spec.sender[t];
        for &mk in &s[1..] {
            let mut row = vec![0.0; rvars.len()];
            for &a in &spec.receiver[s[0]] {
                row[ridx(s[0], a)] += game.sender_action_payoff(t, s[0], a) + game.sender_cost(t, s[0]);
            }
            for &a in &spec.receiver[mk] {
                row[ridx(mk, a)] -= game.sender_action_payoff(t, mk, a) + game.sender_cost(t, mk);
            }
            rows.push(row);
            rhs.push(game.sender_cost(t, s[0]) - game.sender_cost(t, mk));
        }
    }
    for &m in &sent {
        let mut row = vec![0.0; rvars.len()];
        for &a in &spec.receiver[m] {
            row[ridx(m, a)] = 1.0;
        }
        rows.push(row);
        rhs.push(1.0);
    }
    let Some(rho) = solve_linear(&rows, &rhs, "receiver")? else { return Ok(Vec::new()) };

    if sigma.iter().chain(&rho).any(|&p| !(SUPPORT_MIN..=1.0 + OPT_TOL).contains(&p)) {
        return Ok(Vec::new());
    }
    let mut srows = vec![vec![0.0; nm]; nt];
    for (i, &(t, m)) in svars.iter().enumerate() {
        srows[t][m] = sigma[i].min(1.0);
    }
    let mut mixes: Vec<Option<Vec<f64>>> = vec![None; nm];
    for (i, &(m, a)) in rvars.iter().enumerate() {
        mixes[m].get_or_insert_with(|| vec![0.0; game.n_actions()])[a] = rho[i].min(1.0);
    }
    let sender = SenderStrategy::new(renormalize(srows))?;
    let mixes = mixes.into_iter().map(|m| m.map(|row| renormalize(vec![row]).remove(0))).collect();
    Ok(complete(game, chi, sender, Some(mixes))?.into_iter().collect())
}

fn renormalize(rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    rows.into_iter()
        .map(|row| {
            let s: f64 = row.iter().sum();
            row.into_iter().map(|p| p / s).collect()
        })
        .collect()
}

/// Least-squares solve; `None` when the system is inconsistent.
fn solve_linear(rows: &[Vec<f64>], rhs: &[f64], what: &str) -> Result<Option<Vec<f64>>> {
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if ncols == 0 {
        return Ok(Some(Vec::new()));
    }
    let a = DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(rhs);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = 1e-10 * smax.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    if rank < ncols {
        return Err(Error::Indeterminate(format!(
            "{what} indifference system has rank {rank} for {ncols} unknowns"
        )));
    }
    let x = svd.solve(&b, eps).map_err(|e| Error::Indeterminate(e.to_string()))?;
    let resid = (&a * &x - &b).amax();
    let scale = a.amax().max(b.amax()).max(1.0);
    if resid > 1e-9 * scale {
        return Ok(None);
    }
    Ok(Some(x.iter().copied().collect()))
}

/// Unknown layout for wage games: per type with support `[m0, m1, ..]`, the
/// probabilities of `m1, ..` are free and `m0` takes the rest.
struct WageLayout<'a> {
    spec: &'a SupportSpec,
    free: Vec<(usize, usize)>,
}

impl<'a> WageLayout<'a> {
    fn new(spec: &'a SupportSpec) -> Self {
        let free = spec
            .sender
            .iter()
            .enumerate()
            .flat_map(|(t, s)| s[1..].iter().map(move |&m| (t, m)))
            .collect();
        WageLayout { spec, free }
    }

    fn dim(&self) -> usize {
        self.free.len()
    }

    fn rows(&self, nm: usize, x: &[f64]) -> Vec<Vec<f64>> {
        let mut rows = vec![vec![0.0; nm]; self.spec.sender.len()];
        for (t, s) in self.spec.sender.iter().enumerate() {
            rows[t][s[0]] = 1.0;
        }
        for (i, &(t, m)) in self.free.iter().enumerate() {
            rows[t][m] = x[i];
            rows[t][self.spec.sender[t][0]] -= x[i];
        }
        rows
    }

    fn interior(&self, nm: usize, x: &[f64]) -> bool {
        self.rows(nm, x).iter().flatten().all(|&p| p >= 0.0) && x.iter().all(|&p| p > 0.0)
    }
}

/// Posterior-mean wage at every sent message.
fn wages(game: &SignalingGame, chi: Chi, rows: &[Vec<f64>]) -> Vec<Option<f64>> {
    let nm = game.n_messages();
    let x = chi.value();
    let prior = game.prior().weights();
    let prod = game.productivity().expect("wage game");
    let avg: Vec<f64> = (0..nm).map(|m| rows.iter().zip(prior).map(|(r, f)| f * r[m]).sum()).collect();
    (0..nm)
        .map(|m| {
            if avg[m] <= 0.0 {
                return None;
            }
            let joint: Vec<f64> = (0..rows.len()).map(|t| prior[t] * (x * avg[m] + (1.0 - x) * rows[t][m])).collect();
            let total: f64 = joint.iter().sum();
            Some(joint.iter().zip(prod).map(|(j, th)| j * th).sum::<f64>() / total)
        })
        .collect()
}

fn wage_residual(game: &SignalingGame, chi: Chi, layout: &WageLayout, x: &[f64]) -> Vec<f64> {
    let rows = layout.rows(game.n_messages(), x);
    let w = wages(game, chi, &rows);
    layout
        .free
        .iter()
        .map(|&(t, m)| {
            let m0 = layout.spec.sender[t][0];
            let u0 = w[m0].unwrap_or(f64::NAN) - game.sender_cost(t, m0);
            let u1 = w[m].unwrap_or(f64::NAN) - game.sender_cost(t, m);
            u0 - u1
        })
        .collect()
}

fn solve_wage(game: &SignalingGame, chi: Chi, spec: &SupportSpec) -> Result<Vec<EquilibriumRecord>> {
    let layout = WageLayout::new(spec);
    let nm = game.n_messages();
    let scale = game.productivity().unwrap().iter().fold(1.0_f64, |a, b| a.max(b.abs()));
    let tol = ROOT_TOL * scale;
    let roots: Vec<Vec<f64>> = match layout.dim() {
        0 => vec![Vec::new()],
        1 => scan_roots(|v| wage_residual(game, chi, &layout, &[v])[0], tol)
            .into_iter()
            .map(|r| vec![r])
            .collect(),
        _ => newton_roots(game, chi, &layout, tol)?,
    };
    let mut out = Vec::new();
    for x in roots {
        let rows = layout.rows(nm, &x);
        if rows.iter().flatten().any(|&p| p != 0.0 && p < SUPPORT_MIN) || x.iter().any(|&p| p < SUPPORT_MIN) {
            continue;
        }
        let sender = SenderStrategy::new(renormalize(rows))?;
        if let Some(record) = complete(game, chi, sender, None)? {
            out.push(record);
        }
    }
    Ok(out)
}

/// Roots of `f` on the open unit interval, by sign-change scan and bisection.
fn scan_roots(f: impl Fn(f64) -> f64, tol: f64) -> Vec<f64> {
    let (lo, hi) = (1e-12, 1.0 - 1e-12);
    let step = (hi - lo) / SCAN_INTERVALS as f64;
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.last().is_none_or(|&p| (r - p).abs() > 1e-9) {
            roots.push(r);
        }
    };
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=SCAN_INTERVALS {
        let b = if i == SCAN_INTERVALS { hi } else { lo + step * i as f64 };
        let fb = f(b);
        if fa.abs() <= tol {
            push(a, &mut roots);
        } else if fa.is_finite() && fb.is_finite() && fa.signum() != fb.signum() && fb.abs() > tol {
            let (mut l, mut r, mut fl) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (l + r);
                let fm = f(mid);
                if fm.abs() <= tol * 1e-3 || r - l < 1e-16 {
                    l = mid;
                    r = mid;
                    break;
                }
                if fm.signum() == fl.signum() {
                    l = mid;
                    fl = fm;
                } else {
                    r = mid;
                }
            }
            let root = 0.5 * (l + r);
            if f(root).abs() <= tol {
                push(root, &mut roots);
            }
        }
        a = b;
        fa = fb;
    }
    if fa.abs() <= tol {
        push(a, &mut roots);
    }
    roots
}

fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [usize; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn newton_roots(game: &SignalingGame, chi: Chi, layout: &WageLayout, tol: f64) -> Result<Vec<Vec<f64>>> {
    let nm = game.n_messages();
    let d = layout.dim();
    let spec = layout.spec;
    let start = |s: usize| -> Vec<f64> {
        // split each type's mass across its support
        let mut x = Vec::with_capacity(d);
        let mut j = 0;
        for sup in &spec.sender {
            let k = sup.len();
            let raw: Vec<f64> = (0..k)
                .map(|i| if s == 0 { 1.0 } else { 0.05 + halton(s, PRIMES[(j + i) % PRIMES.len()]) })
                .collect();
            j += k;
            let total: f64 = raw.iter().sum();
            x.extend(raw[1..].iter().map(|v| v / total));
        }
        x
    };
    let norm = |v: &[f64]| v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let mut roots: Vec<Vec<f64>> = Vec::new();
    let mut spent = 0usize;
    let mut best = f64::INFINITY;
    for s in 0..NEWTON_STARTS {
        let mut x = start(s);
        let mut fx = wage_residual(game, chi, layout, &x);
        for _ in 0..NEWTON_MAX_STEPS {
            spent += 1;
            let n = norm(&fx);
            best = best.min(n);
            if n <= tol {
                if !roots.iter().any(|r| norm(&r.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-7) {
                    roots.push(x.clone());
                }
                break;
            }
            let mut jac = DMatrix::<f64>::zeros(d, d);
            for j in 0..d {
                let h = 1e-7 * x[j].max(1e-3);
                let mut xp = x.clone();
                xp[j] += h;
                let mut xm = x.clone();
                xm[j] -= h;
                let (fp, fm) = (wage_residual(game, chi, layout, &xp), wage_residual(game, chi, layout, &xm));
                for i in 0..d {
                    jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
                }
            }
            let rhs = -DVector::from_column_slice(&fx);
            let Some(step) = jac.clone().lu().solve(&rhs).or_else(|| jac.svd(true, true).solve(&rhs, 1e-12).ok()) else {
                break;
            };
            let mut lambda = 1.0;
            let mut moved = false;
            while lambda > 1e-10 {
                let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + lambda * s).collect();
                if layout.interior(nm, &cand) {
                    let fc = wage_residual(game, chi, layout, &cand);
                    if fc.iter().all(|v| v.is_finite()) && norm(&fc) < n {
                        x = cand;
                        fx = fc;
                        moved = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if spent >= NEWTON_BUDGET {
            break;
        }
    }
    if roots.is_empty() && spent >= NEWTON_BUDGET {
        return Err(Error::NoConvergence { iterations: spent, residual: best });
    }
    Ok(roots)
}

/// Fills in beliefs and receiver behavior around a candidate sender strategy
/// and keeps it if it is an equilibrium.
fn complete(
    game: &SignalingGame,
    chi: Chi,
    sender: SenderStrategy,
    mixes: Option<Vec<Option<Vec<f64>>>>,
) -> Result<Option<EquilibriumRecord>> {
    let (nt, nm) = (game.n_types(), game.n_messages());
    let mut posteriors = Vec::with_capacity(nm);
    for m in 0..nm {
        posteriors.push(cursed_bayes_update(game, &sender, chi, m)?);
    }
    let onpath: Vec<usize> = (0..nm).filter(|&m| posteriors[m].is_some()).collect();
    let mut mix_rows: Vec<Vec<f64>> = vec![vec![0.0; game.n_actions()]; nm];
    let mut wage_row: Vec<f64> = vec![0.0; nm];
    for &m in &onpath {
        match &mixes {
            Some(mx) => mix_rows[m] = mx[m].clone().expect("sent message has a receiver mix"),
            None => wage_row[m] = game.mean_productivity(posteriors[m].as_ref().unwrap()),
        }
    }
    let onpath_payoff = |t: usize, m: usize| match &mixes {
        Some(_) => game.sender_payoff(t, m, crate::game::Response::Mixed(&mix_rows[m])),
        None => wage_row[m] - game.sender_cost(t, m),
    };
    let u_star: Vec<f64> = (0..nt)
        .map(|t| onpath.iter().map(|&m| sender.prob(t, m) * onpath_payoff(t, m)).sum())
        .collect();
    for t in 0..nt {
        if onpath.iter().any(|&m| onpath_payoff(t, m) > u_star[t] + OPT_TOL) {
            return Ok(None);
        }
    }
    let floor = BeliefRegion::consistent(game.prior(), chi);
    let mut beliefs = Vec::with_capacity(nm);
    for m in 0..nm {
        match &posteriors[m] {
            Some(p) => beliefs.push(p.clone()),
            None => {
                let Some(d) = deterring_response(game, m, &floor, &u_star) else { return Ok(None) };
                match d.response {
                    PureResponse::Action(a) => mix_rows[m][a] = 1.0,
                    PureResponse::Wage(w) => wage_row[m] = w,
                }
                beliefs.push(d.belief);
            }
        }
    }
    let receiver = if game.is_wage() { ReceiverStrategy::wages(wage_row)? } else { ReceiverStrategy::mixed(mix_rows)? };
    let assessment = Assessment { sender, receiver, beliefs: BeliefSystem::new(beliefs)?, chi };
    let verdict = verify_cse(game, &assessment);
    if let Some(v) = verdict.first() {
        log::debug!("support candidate rejected: {}: {}", v.condition, v.detail);
        return Ok(None);
    }
    Ok(Some(EquilibriumRecord::new(game, assessment)))
}
