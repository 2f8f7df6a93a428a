//! Brute-force reference implementation. Shares no code with the library:
//! states are lists of labelled basis states, marginals are built by hashing
//! the kept labels, and Gibbs weights come from Boltzmann factors.

#![allow(dead_code)]

use std::collections::HashMap;

/// Basis label `(s_Q, s_D, n)` with its probability.
pub type Table = Vec<((u8, u8, u8), f64)>;

/// Which of `(Q, D, C)` a marginal keeps.
pub type Keep = [bool; 3];

pub const Q: Keep = [true, false, false];
pub const D: Keep = [false, true, false];
pub const C: Keep = [false, false, true];
pub const QC: Keep = [true, false, true];
pub const QD: Keep = [true, true, false];
pub const DC: Keep = [false, true, true];
pub const QDC: Keep = [true, true, true];

pub fn marginal(table: &Table, keep: Keep) -> HashMap<Vec<u8>, f64> {
    let mut out = HashMap::new();
    for &((q, d, n), p) in table {
        let key: Vec<u8> = [q, d, n]
            .iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(v, _)| *v)
            .collect();
        *out.entry(key).or_insert(0.0) += p;
    }
    out
}

pub fn entropy_of(dist: impl IntoIterator<Item = f64>) -> f64 {
    dist.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum()
}

pub fn entropy(table: &Table, keep: Keep) -> f64 {
    entropy_of(marginal(table, keep).into_values())
}

pub fn union(a: Keep, b: Keep) -> Keep {
    [a[0] || b[0], a[1] || b[1], a[2] || b[2]]
}

pub fn mutual_information(table: &Table, a: Keep, b: Keep) -> f64 {
    entropy(table, a) + entropy(table, b) - entropy(table, union(a, b))
}

pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).ln())
        .sum()
}

/// Boltzmann weights `exp(-beta k)` over `0..levels`, normalized.
pub fn boltzmann(beta: f64, levels: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..levels).map(|k| (-beta * k as f64).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

pub fn beta_qubit(p_e: f64) -> f64 {
    ((1.0 - p_e) / p_e).ln()
}

pub fn beta_cavity(n_th: f64) -> f64 {
    ((1.0 + n_th) / n_th).ln()
}

/// Physical atom levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    F,
    G,
    E,
}

fn logical(a: Atom) -> (u8, u8) {
    match a {
        Atom::E => (1, 0),
        Atom::G => (0, 0),
        Atom::F => (0, 1),
    }
}

pub type Physical = HashMap<(Atom, u8), f64>;

pub fn to_table(state: &Physical) -> Table {
    let mut t: Table = state
        .iter()
        .map(|(&(a, n), &p)| {
            let (q, d) = logical(a);
            ((q, d, n), p)
        })
        .collect();
    t.sort_by_key(|x| x.0);
    t
}

pub fn initial(p_e: f64, n_th: f64, n_max: usize) -> Physical {
    let qubit = boltzmann(beta_qubit(p_e), 2);
    let cavity = boltzmann(beta_cavity(n_th), n_max + 1);
    let mut s = Physical::new();
    for (n, &pc) in cavity.iter().enumerate() {
        s.insert((Atom::G, n as u8), qubit[0] * pc);
        s.insert((Atom::E, n as u8), qubit[1] * pc);
        s.insert((Atom::F, n as u8), 0.0);
    }
    s
}

pub fn readout(state: &Physical, eta: f64) -> Physical {
    let mut out = Physical::new();
    for (&(a, n), &p) in state {
        match a {
            Atom::E => *out.entry((Atom::E, n)).or_insert(0.0) += p,
            Atom::G | Atom::F => {
                let other = if a == Atom::G { Atom::F } else { Atom::G };
                *out.entry((a, n)).or_insert(0.0) += (1.0 - eta) * p;
                *out.entry((other, n)).or_insert(0.0) += eta * p;
            }
        }
    }
    out
}

pub fn swap(state: &Physical, n_max: usize) -> Physical {
    let n_max = n_max as u8;
    state
        .iter()
        .map(|(&(a, n), &p)| {
            let target = match a {
                Atom::E if n < n_max => (Atom::G, n + 1),
                Atom::G if n > 0 => (Atom::E, n - 1),
                _ => (a, n),
            };
            (target, p)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub readout: Table,
    pub feedback: Table,
    pub heat_q: f64,
    pub heat_c: f64,
    pub delta_i_qc_d: f64,
    pub d_q: f64,
    pub d_c: f64,
    pub d_qc: f64,
    pub delta_beta: f64,
}

impl OracleReport {
    pub fn residual(&self) -> f64 {
        self.heat_c * self.delta_beta - self.delta_i_qc_d - self.d_qc
    }
}

fn mean(table: &Table, f: impl Fn(u8, u8, u8) -> f64) -> f64 {
    table.iter().map(|&((q, d, n), p)| p * f(q, d, n)).sum()
}

/// Relative entropies of the QC parts of `table` to the initial Gibbs states.
pub fn gibbs_divergences(table: &Table, p_e: f64, n_th: f64, n_max: usize) -> (f64, f64, f64) {
    let gq = boltzmann(beta_qubit(p_e), 2);
    let gc = boltzmann(beta_cavity(n_th), n_max + 1);
    let mq = marginal(table, Q);
    let mc = marginal(table, C);
    let mqc = marginal(table, QC);
    let rho_q: Vec<f64> = (0..2u8).map(|q| *mq.get(&vec![q]).unwrap_or(&0.0)).collect();
    let rho_c: Vec<f64> = (0..=n_max as u8).map(|n| *mc.get(&vec![n]).unwrap_or(&0.0)).collect();
    let mut rho_qc = Vec::new();
    let mut gibbs_qc = Vec::new();
    for q in 0..2u8 {
        for n in 0..=n_max as u8 {
            rho_qc.push(*mqc.get(&vec![q, n]).unwrap_or(&0.0));
            gibbs_qc.push(gq[q as usize] * gc[n as usize]);
        }
    }
    (kl(&rho_q, &gq), kl(&rho_c, &gc), kl(&rho_qc, &gibbs_qc))
}

/// The ideal protocol with read-out mixing `eta`, end to end.
pub fn protocol(p_e: f64, n_th: f64, n_max: usize, eta: f64, demon_on: bool) -> OracleReport {
    let start = initial(p_e, n_th, n_max);
    let before = if demon_on { readout(&start, eta) } else { start };
    let after = swap(&before, n_max);
    let readout = to_table(&before);
    let feedback = to_table(&after);
    let excited = |t: &Table| mean(t, |q, _, _| q as f64);
    let photons = |t: &Table| mean(t, |_, _, n| n as f64);
    let info = |t: &Table| mutual_information(t, QC, D);
    let (d_q, d_c, d_qc) = gibbs_divergences(&feedback, p_e, n_th, n_max);
    OracleReport {
        heat_q: excited(&feedback) - excited(&readout),
        heat_c: photons(&feedback) - photons(&readout),
        delta_i_qc_d: info(&feedback) - info(&readout),
        d_q,
        d_c,
        d_qc,
        delta_beta: beta_cavity(n_th) - beta_qubit(p_e),
        readout,
        feedback,
    }
}

/// Flattens a table into the library's `(s_Q, s_D, n)` layout.
pub fn dense(table: &Table, n_max: usize) -> Vec<f64> {
    let d = n_max + 1;
    let mut out = vec![0.0; 4 * d];
    for &((q, s, n), p) in table {
        out[(q as usize * 2 + s as usize) * d + n as usize] += p;
    }
    out
}

/// Random table over the three populated logical sectors.
pub fn random_table(n_max: usize, rng: &mut impl rand::Rng) -> Table {
    let mut t = Table::new();
    for (q, d) in [(0u8, 0u8), (0, 1), (1, 0)] {
        for n in 0..=n_max as u8 {
            let x: f64 = rng.gen();
            // leave some cells empty to exercise the zero-probability branch
            t.push(((q, d, n), if x < 0.15 { 0.0 } else { x }));
        }
    }
    let z: f64 = t.iter().map(|e| e.1).sum();
    t.iter_mut().for_each(|e| e.1 /= z);
    t
}

/// Largest absolute disagreement between a library report and the oracle.
pub fn report_gap(lib: &maxwell_demon::thermo::ThermoReport, o: &OracleReport) -> f64 {
    let stage = |s: &maxwell_demon::thermo::StageQuantities, t: &Table| {
        [
            (s.s_q - entropy(t, Q)).abs(),
            (s.s_d - entropy(t, D)).abs(),
            (s.s_c - entropy(t, C)).abs(),
            (s.s_qc - entropy(t, QC)).abs(),
            (s.s_qdc - entropy(t, QDC)).abs(),
            (s.i_qc_d - mutual_information(t, QC, D)).abs(),
            (s.i_q_c - mutual_information(t, Q, C)).abs(),
            (s.mean_photon_number - mean(t, |_, _, n| n as f64)).abs(),
            (s.excited_population - mean(t, |q, _, _| q as f64)).abs(),
        ]
    };
    let mut gaps: Vec<f64> = stage(&lib.readout, &o.readout).to_vec();
    gaps.extend(stage(&lib.feedback, &o.feedback));
    gaps.extend([
        (lib.heat_q - o.heat_q).abs(),
        (lib.heat_c - o.heat_c).abs(),
        (lib.delta_i_qc_d - o.delta_i_qc_d).abs(),
        (lib.d_q - o.d_q).abs(),
        (lib.d_c - o.d_c).abs(),
        (lib.d_qc - o.d_qc).abs(),
        (lib.betas.delta_beta - o.delta_beta).abs(),
        (lib.residual - o.residual()).abs(),
    ]);
    gaps.into_iter().fold(0.0, f64::max)
}

/// `(p_e, n_th, n_max)` points small enough to enumerate by hand.
pub fn small_cases() -> Vec<(f64, f64, usize)> {
    let mut out = Vec::new();
    for (n_th, n_max) in [(1e-5, 2), (1e-4, 3), (5e-4, 3)] {
        for p_e in [1e-3, 0.05, 0.2, 0.37, 0.5, 0.71, 0.9, 0.999] {
            out.push((p_e, n_th, n_max));
        }
    }
    out
}
