// temporary timing probe
use mslab_core::flow::{FlowEngine, FlowParams};
use mslab_core::geometry::{hausdorff_distance, InterfaceCurve, PhaseSet, Rect, Vec2};

fn main() {
    let t0 = std::time::Instant::now();
    let phase = PhaseSet::single(
        InterfaceCurve::circle(Vec2::zeros(), 1.0, 256),
        Rect::new(-4.0, -4.0, 4.0, 4.0),
    )
    .unwrap();
    let mut engine = FlowEngine::new(FlowParams::default());
    let traj = engine.run(&phase, 0.5, &[0.25]).unwrap();
    let (v, _) = engine.ms_velocity(&traj.final_state().phase).unwrap();
    println!(
        "circle t=0.5 n=256: {:.1}s, steps {}, rejected {}, drift {:.3e}, vmax {:.3e}",
        t0.elapsed().as_secs_f64(),
        traj.accepted_steps,
        traj.rejected_steps,
        hausdorff_distance(&traj.final_state().phase, &phase),
        v[0].max_abs()
    );
}
