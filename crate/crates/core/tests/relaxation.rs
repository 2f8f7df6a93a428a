use maxwell_demon::dynamics::{relax, ImperfectionSpec};
use maxwell_demon::statespace::{compose_initial, JointState, ThermalSpec};

/// Full rate matrix on `(level, n)` with levels ordered `(f, g, e)`,
/// written out transition by transition.
fn generator(imp: &ImperfectionSpec, n_max: usize) -> Vec<Vec<f64>> {
    let d = n_max + 1;
    let dim = 3 * d;
    let mut l = vec![vec![0.0; dim]; dim];
    let mut jump = |from: usize, to: usize, rate: f64| {
        l[to][from] += rate;
        l[from][from] -= rate;
    };
    for level in 0..3 {
        for n in 0..d {
            let i = level * d + n;
            if imp.atom_relaxation && level > 0 {
                jump(i, (level - 1) * d + n, 1.0 / imp.t_atom);
            }
            if imp.cavity_relaxation {
                if n > 0 {
                    jump(i, i - 1, (1.0 + imp.n_env) * n as f64 / imp.t_cav);
                }
                if n < n_max {
                    jump(i, i + 1, imp.n_env * (n + 1) as f64 / imp.t_cav);
                }
            }
        }
    }
    l
}

fn rk4(l: &[Vec<f64>], p: &[f64], t: f64, steps: usize) -> Vec<f64> {
    let h = t / steps as f64;
    let apply = |v: &[f64]| -> Vec<f64> { l.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect() };
    let axpy = |v: &[f64], k: &[f64], s: f64| -> Vec<f64> { v.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let mut p = p.to_vec();
    for _ in 0..steps {
        let k1 = apply(&p);
        let k2 = apply(&axpy(&p, &k1, h / 2.0));
        let k3 = apply(&axpy(&p, &k2, h / 2.0));
        let k4 = apply(&axpy(&p, &k3, h));
        for i in 0..p.len() {
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    p
}

fn check(imp: ImperfectionSpec, state: &JointState, t: f64) {
    let got = relax(state, &imp, t).unwrap();
    let want = rk4(&generator(&imp, state.n_max()), state.populations(), t, 4000);
    let gap = got
        .populations()
        .iter()
        .zip(&want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-10, "t={t}: gap {gap:e}");
}

#[test]
fn relax_matches_direct_integration() {
    let spec = ThermalSpec::new(0.4, 0.63, 25).unwrap();
    let start = compose_initial(&spec).unwrap();
    let full = ImperfectionSpec::default();
    for t in [1e-4, 0.6e-3, 5e-3, 40e-3] {
        check(full, &start, t);
        check(
            ImperfectionSpec {
                atom_relaxation: false,
                ..full
            },
            &start,
            t,
        );
        check(
            ImperfectionSpec {
                cavity_relaxation: false,
                ..full
            },
            &start,
            t,
        );
    }
}

#[test]
fn relax_matches_direct_integration_from_fock_states() {
    let imp = ImperfectionSpec {
        n_env: 0.9,
        t_cav: 5e-3,
        ..ImperfectionSpec::default()
    };
    for n in [0, 3, 10] {
        let start = JointState::pure(maxwell_demon::statespace::Level::E, n, 12).unwrap();
        check(imp, &start, 2e-3);
    }
}

#[test]
fn relax_composes_over_time() {
    let spec = ThermalSpec::new(0.7, 1.0, 35).unwrap();
    let start = compose_initial(&spec).unwrap();
    let imp = ImperfectionSpec::default();
    let once = relax(&start, &imp, 3e-3).unwrap();
    let twice = relax(&relax(&start, &imp, 1e-3).unwrap(), &imp, 2e-3).unwrap();
    for (a, b) in once.populations().iter().zip(twice.populations()) {
        assert!((a - b).abs() < 1e-13);
    }
    assert!((once.total() - 1.0).abs() < 1e-12);
}
