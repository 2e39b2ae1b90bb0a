//! Binary checkpoints: save a state, load it back bit for bit.

use flowmap_mhd::checkpoint;
use flowmap_mhd::initial::generate_taylor_green;
use flowmap_mhd::kinematics::Physics;
use flowmap_mhd::spectral::Grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::periodic_2pi(32)?;
    let state = generate_taylor_green(0.05, &grid)?.into_state(Physics::viscous(0.05, 20.0));
    let path = std::env::temp_dir().join("flowmap_mhd_example.mhd2");
    checkpoint::save(&path, &state)?;
    let back = checkpoint::load(&path)?;
    let bytes = std::fs::metadata(&path)?.len();
    println!("wrote {} ({bytes} bytes)", path.display());
    println!("identical fields: {}", back.eta == state.eta && back.u == state.u);
    println!("physics: {:?}, t = {}", back.physics, back.t);
    std::fs::remove_file(&path)?;
    Ok(())
}
