//! Generates a synthetic task file plus one mock screenshot, the inputs the
//! `groundzoom` binary works on.

use groundzoom::gbt::{
    generate_tasks, load_dataset, render_screenshot, resolution_cluster, write_dataset, SyntheticOptions,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("groundzoom-synthetic");
    std::fs::create_dir_all(&dir)?;

    let opts = SyntheticOptions { n_tasks: 20, seed: 11, infeasible_fraction: 0.15, ..Default::default() };
    let mut tasks = generate_tasks(&opts);

    let shot = render_screenshot(&tasks[0], 12, opts.seed);
    let png = dir.join("syn-00000.png");
    std::fs::write(&png, shot.encode_png()?)?;
    tasks[0].image_path = Some(png);

    let path = dir.join("tasks.jsonl");
    write_dataset(&path, &tasks)?;
    let loaded = load_dataset(&path)?;
    assert_eq!(loaded.len(), tasks.len());

    for t in loaded.iter().take(8) {
        let (w, h) = t.metadata.resolution;
        println!(
            "{} {:>4}x{:<4} {:<10} feasible={:<5} {}",
            t.id,
            w,
            h,
            resolution_cluster(w, h).label(),
            t.feasible,
            t.instruction
        );
    }
    println!("wrote {} tasks to {}", loaded.len(), path.display());
    Ok(())
}
