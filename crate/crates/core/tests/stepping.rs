use isoflow::eos::{EosModel, Phase};
use isoflow::mesh::{Cell, Mesh, MeshParams};
use isoflow::riemann_classical::euler::{exact_euler_gamma, GasState};
use isoflow::riemann_classical::PhaseState;
use isoflow::stepping::{
    absolute_totals, conservation_drift, dual_time_update, BlockInput, EulerModel, Mode, Model,
    OuterEdge, StepConfig, Stepper, ThetaRule, TwoPhaseModel,
};

const GAMMA: f64 = 1.4;

fn two_phase_mesh(cells: usize, left: PhaseState, right: PhaseState) -> Mesh<2> {
    let mut mesh = Mesh::uniform(
        -0.01 * cells as f64 / 2.0,
        0.01 * cells as f64 / 2.0,
        cells,
        |x| {
            let s = if x < 0.0 { left } else { right };
            (s.conserved(), s.phase)
        },
    )
    .unwrap();
    mesh.flag_tiny();
    mesh
}

fn cavitation_mesh(cells: usize) -> Mesh<2> {
    let e = EosModel::default();
    let l = PhaseState::from_pressure(60000.0, -4.0, Phase::Liquid, &e).unwrap();
    let r = PhaseState::from_pressure(60000.0, 4.0, Phase::Liquid, &e).unwrap();
    two_phase_mesh(cells, l, r)
}

fn nucleation_mesh(cells: usize) -> Mesh<2> {
    let e = EosModel::default();
    let l = PhaseState::from_pressure(70000.0, 2.7, Phase::Vapor, &e).unwrap();
    let r = PhaseState::from_pressure(70000.0, -2.7, Phase::Vapor, &e).unwrap();
    two_phase_mesh(cells, l, r)
}

/// Lax-type mesh on `[-5, 5]` with an extra cell of width `alpha h` at the
/// origin that is always treated as tiny.
fn lax_mesh(cells: usize, alpha: f64, left: GasState, right: GasState) -> Mesh<3> {
    let h = 10.0 / cells as f64;
    let n_left = cells / 2;
    let (l, r) = (left.conserved(GAMMA), right.conserved(GAMMA));
    let mut out = Vec::new();
    for i in 0..n_left {
        let xr = if i + 1 == n_left {
            0.0
        } else {
            -5.0 + (i + 1) as f64 * h
        };
        out.push(Cell::new(-5.0 + i as f64 * h, xr, l, Phase::Neutral));
    }
    let mut tiny = Cell::new(0.0, alpha * h, r, Phase::Neutral);
    tiny.tiny = true;
    out.push(tiny);
    let edge = |i: usize| alpha * h + i as f64 * h;
    for i in 0..cells - n_left {
        out.push(Cell::new(edge(i), edge(i + 1), r, Phase::Neutral));
    }
    Mesh::from_cells(out, MeshParams::new(h)).unwrap()
}

fn lax_data() -> (GasState, GasState) {
    (
        GasState::new(0.445, 0.698, 3.528),
        GasState::new(0.5, 0.0, 0.571),
    )
}

fn euler_config(mode: Mode) -> StepConfig {
    StepConfig {
        mode,
        cfl: 0.8,
        adapt_mesh: false,
        creation: false,
        ..StepConfig::default()
    }
}

fn two_phase_config(mode: Mode) -> StepConfig {
    StepConfig {
        mode,
        ..StepConfig::default()
    }
}

/// Runs `steps` steps and returns the worst relative drift and the stepper.
fn drift_after<const N: usize, M: Model<N>>(
    mesh: &mut Mesh<N>,
    model: M,
    cfg: StepConfig,
    steps: usize,
) -> (f64, Stepper<N, M>) {
    let initial = mesh.totals();
    let scale = absolute_totals(mesh);
    let mut stepper = Stepper::new(model, cfg);
    for _ in 0..steps {
        stepper.step(mesh, f64::INFINITY).unwrap();
        mesh.check_tiling().unwrap();
    }
    let d = conservation_drift(&initial, &mesh.totals(), &stepper.boundary_inflow, &scale);
    (d.iter().copied().fold(0.0, f64::max), stepper)
}

fn assert_phases_admissible(mesh: &Mesh<2>) {
    let e = EosModel::default();
    for (i, c) in mesh.cells().iter().enumerate() {
        assert!(
            matches!(c.phase, Phase::Vapor | Phase::Liquid),
            "cell {i} has phase {:?}",
            c.phase
        );
        assert_eq!(e.classify(c.state[0]).unwrap(), c.phase, "cell {i}");
    }
}

#[test]
fn cavitation_conserves_in_every_mode() {
    for mode in [Mode::Explicit, Mode::MixedEi, Mode::ExplicitLts] {
        let mut mesh = cavitation_mesh(60);
        let (drift, stepper) = drift_after(
            &mut mesh,
            TwoPhaseModel::new(EosModel::default()),
            two_phase_config(mode),
            30,
        );
        assert!(drift < 1e-10, "{mode:?}: drift {drift:e}");
        assert!(
            mesh.cells().iter().any(|c| c.phase == Phase::Vapor),
            "{mode:?}: no vapor created"
        );
        assert_phases_admissible(&mesh);
        assert!(stepper.local_iterations > 0 || mode == Mode::Explicit);
    }
}

#[test]
fn nucleation_conserves_in_implicit_and_lts_modes() {
    for mode in [Mode::MixedEi, Mode::ExplicitLts] {
        let mut mesh = nucleation_mesh(40);
        let (drift, _) = drift_after(
            &mut mesh,
            TwoPhaseModel::new(EosModel::default()),
            two_phase_config(mode),
            6,
        );
        assert!(drift < 1e-10, "{mode:?}: drift {drift:e}");
        assert!(
            mesh.cells().iter().any(|c| c.phase == Phase::Liquid),
            "{mode:?}: no liquid created"
        );
        assert_phases_admissible(&mesh);
    }
}

#[test]
fn lax_model_mesh_conserves_in_every_mode() {
    let (l, r) = lax_data();
    for mode in [Mode::Explicit, Mode::MixedEi, Mode::ExplicitLts] {
        let mut mesh = lax_mesh(100, 1e-3, l, r);
        let (drift, _) = drift_after(&mut mesh, EulerModel::new(GAMMA), euler_config(mode), 20);
        assert!(drift < 1e-10, "{mode:?}: drift {drift:e}");
    }
}

#[test]
fn modes_coincide_without_tiny_cells() {
    let e = EosModel::default();
    let v = PhaseState::from_pressure(e.p0 - 500.0, 3.0, Phase::Vapor, &e).unwrap();
    let l = PhaseState::from_pressure(e.p0 + 500.0, -1.0, Phase::Liquid, &e).unwrap();
    let run = |mode| {
        let mut mesh = two_phase_mesh(40, v, l);
        assert!(mesh.cells().iter().all(|c| !c.tiny));
        let mut stepper = Stepper::new(TwoPhaseModel::new(e), two_phase_config(mode));
        for _ in 0..25 {
            let report = stepper.step(&mut mesh, f64::INFINITY).unwrap();
            assert_eq!(report.implicit_blocks, 0);
        }
        mesh
    };
    let explicit = run(Mode::Explicit);
    assert_eq!(explicit.cells(), run(Mode::MixedEi).cells());
    assert_eq!(explicit.cells(), run(Mode::ExplicitLts).cells());
}

#[test]
fn single_substep_lts_matches_explicit() {
    let (l, _) = lax_data();
    // Diverging data: both edge waves are rarefactions, so no wave outruns
    // the cell speeds that set the step.
    let r = GasState::new(0.445, 0.75, 3.528);
    let mut lts = lax_mesh(50, 1.0, l, r);
    let mut explicit = lts.clone();
    for c in explicit.cells_mut() {
        c.tiny = false;
    }
    let mut a = Stepper::new(EulerModel::new(GAMMA), euler_config(Mode::ExplicitLts));
    let mut b = Stepper::new(EulerModel::new(GAMMA), euler_config(Mode::Explicit));
    let ra = a.step(&mut lts, f64::INFINITY).unwrap();
    b.step(&mut explicit, f64::INFINITY).unwrap();
    assert_eq!(ra.local_iterations, 1);
    for (x, y) in lts.cells().iter().zip(explicit.cells()) {
        assert!((x.x_left - y.x_left).abs() < 1e-12);
        for k in 0..3 {
            assert!((x.state[k] - y.state[k]).abs() <= 1e-12 * y.state[k].abs().max(1.0));
        }
    }
}

#[test]
fn steady_triple_converges_in_one_iteration() {
    let s = GasState::new(1.0, 0.0, 1.0);
    let mut mesh = lax_mesh(20, 1e-4, s, s);
    let before = mesh.clone();
    let mut stepper = Stepper::new(EulerModel::new(GAMMA), euler_config(Mode::MixedEi));
    let report = stepper.step(&mut mesh, f64::INFINITY).unwrap();
    assert_eq!(report.implicit_blocks, 1);
    assert_eq!(report.local_iterations, 1);
    for (x, y) in mesh.cells().iter().zip(before.cells()) {
        for k in 0..3 {
            assert!((x.state[k] - y.state[k]).abs() <= 1e-15 * y.state[k].abs().max(1.0));
        }
    }
}

#[test]
fn implicit_block_keeps_the_frozen_outer_fluxes() {
    let (l, r) = lax_data();
    let mesh = lax_mesh(20, 1e-3, l, r);
    let model = EulerModel::new(GAMMA);
    let cfg = euler_config(Mode::MixedEi);
    let cells = &mesh.cells()[9..12];
    assert!(cells[1].tiny);
    let frozen_left = model.edge_flux(&mesh.cells()[8], &cells[0], None).unwrap();
    let frozen_right = model.edge_flux(&cells[2], &mesh.cells()[12], None).unwrap();
    let interior = [
        model.edge_flux(&cells[0], &cells[1], None).unwrap(),
        model.edge_flux(&cells[1], &cells[2], None).unwrap(),
    ];
    let input = BlockInput {
        cells,
        left: OuterEdge::Frozen(frozen_left),
        right: OuterEdge::Frozen(frozen_right),
        interior: &interior,
        dt: 0.8 * 0.5 / 3.2,
        h_ref: 0.5,
        s_max: 3.2,
    };
    let out = dual_time_update(&model, &cfg, &input).unwrap();
    assert_eq!(out.fluxes[0].flux, frozen_left.flux);
    assert_eq!(out.fluxes[3].flux, frozen_right.flux);
    assert!(out.residual < 1.0);
    assert!(out.iterations > 1);

    // The block update is conservative given its outer fluxes.
    let dt = input.dt;
    for k in 0..3 {
        let before: f64 = cells.iter().map(|c| c.width() * c.state[k]).sum();
        let after: f64 = cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                (c.width() + out.displacement[i + 1] - out.displacement[i]) * out.states[i][k]
            })
            .sum();
        let expected = before - dt * (frozen_right.flux[k] - frozen_left.flux[k]);
        assert!((after - expected).abs() <= 1e-13 * before.abs().max(1.0));
    }
}

fn lax_average_iterations(alpha: f64, theta: ThetaRule, t_end: f64) -> f64 {
    let (l, r) = lax_data();
    let mut mesh = lax_mesh(100, alpha, l, r);
    let cfg = StepConfig {
        theta_neighbors: theta,
        ..euler_config(Mode::MixedEi)
    };
    let mut stepper = Stepper::new(EulerModel::new(GAMMA), cfg);
    while stepper.time < t_end {
        stepper.step(&mut mesh, t_end).unwrap();
    }
    stepper.local_iterations as f64 / stepper.steps as f64
}

#[test]
fn dual_iterations_grow_slowly_with_the_cell_ratio() {
    let coarse = lax_average_iterations(1e-2, ThetaRule::Fixed(0.9), 0.3);
    let fine = lax_average_iterations(1e-4, ThetaRule::Fixed(0.9), 0.3);
    let uniform = lax_average_iterations(1e-2, ThetaRule::SmallCellRatio, 0.3);
    assert!(fine > coarse, "{fine} vs {coarse}");
    assert!(
        fine < 10.0 * coarse,
        "growth {fine} / {coarse} is not sub-linear"
    );
    assert!(uniform > 5.0 * coarse, "{uniform} vs {coarse}");
}

/// Plain single-rate Godunov loop on fixed cells with transmissive ends.
fn reference_godunov(widths: &[f64], mut u: Vec<[f64; 3]>, cfl: f64, t_end: f64) -> Vec<[f64; 3]> {
    let gas = |c: &[f64; 3]| GasState::from_conserved(*c, GAMMA).unwrap();
    let flux = |a: &[f64; 3], b: &[f64; 3]| {
        exact_euler_gamma(&gas(a), &gas(b), GAMMA)
            .unwrap()
            .godunov_flux()
    };
    let h_min = widths.iter().copied().fold(f64::INFINITY, f64::min);
    let mut t = 0.0;
    while t < t_end {
        let s = u
            .iter()
            .map(|c| gas(c).u.abs() + gas(c).sound_speed(GAMMA))
            .fold(0.0, f64::max);
        let dt = (cfl * h_min / s).min(t_end - t);
        let n = u.len();
        let f: Vec<[f64; 3]> = (0..=n)
            .map(|e| flux(&u[e.saturating_sub(1)], &u[e.min(n - 1)]))
            .collect();
        for i in 0..n {
            for k in 0..3 {
                u[i][k] = (widths[i] * u[i][k] - dt * (f[i + 1][k] - f[i][k])) / widths[i];
            }
        }
        t += dt;
    }
    u
}

#[test]
fn explicit_mode_matches_a_plain_godunov_loop() {
    let (l, r) = lax_data();
    let mut mesh = lax_mesh(100, 1.0, l, r);
    let widths: Vec<f64> = mesh.cells().iter().map(Cell::width).collect();
    let initial: Vec<[f64; 3]> = mesh.cells().iter().map(|c| c.state).collect();
    let mut stepper = Stepper::new(EulerModel::new(GAMMA), euler_config(Mode::Explicit));
    while stepper.time < 1.0 {
        stepper.step(&mut mesh, 1.0).unwrap();
    }
    let reference = reference_godunov(&widths, initial, 0.8, 1.0);
    for (c, want) in mesh.cells().iter().zip(&reference) {
        for k in 0..3 {
            assert!(
                (c.state[k] - want[k]).abs() <= 1e-12 * want[k].abs().max(1.0),
                "{:?} vs {want:?}",
                c.state
            );
        }
    }
}
