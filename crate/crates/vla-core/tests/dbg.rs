#[test]
fn expert_stress() {
    use vla_core::sim::*;
    use vla_core::config::*;
    let sim = SimConfig::default();
    let nav = NavConfig::default();
    for dr in [DrConfig::off(), DrConfig::on()] {
        for task in task_catalogue(&sim) {
            let mut ok = 0;
            let mut lens = Vec::new();
            let mut resets_failed = 0;
            for seed in 0..100u64 {
                let Ok(mut w) = reset(&task, &dr, seed, &sim) else { resets_failed += 1; continue };
                for t in 0..task.horizon {
                    let a = scripted_expert(&w, &task, &sim, &nav).unwrap();
                    step(&mut w, &a, &sim, &nav).unwrap();
                    if success(&w, &task, &sim) { ok += 1; lens.push(t + 1); break; }
                }
            }
            let mean_len = lens.iter().sum::<usize>() as f64 / lens.len().max(1) as f64;
            let max_len = lens.iter().max().copied().unwrap_or(0);
            eprintln!("dr={} task={:<22} ok={ok}/100 reset_fail={resets_failed} mean_len={mean_len:.1} max_len={max_len}", dr.enabled, task.name);
        }
    }
}
