use fdsi::{run_si, run_sinr, Direction, ExperimentConfig, Mode, RicianSpec, SystemGeometry};

fn in_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(job)
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let cfg = ExperimentConfig::new(SystemGeometry::new(8, 4, 2).with_cells(2), RicianSpec::new(0.5, 1.0).unwrap())
        .with_trials(30_000)
        .with_seed(31);
    for mode in [Mode::Empirical, Mode::Theoretical] {
        let cfg = cfg.with_mode(mode);
        let a = in_pool(1, || run_si(&cfg).unwrap());
        let b = in_pool(4, || run_si(&cfg).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.emp_m1.to_bits(), b.emp_m1.to_bits());
    }
    for direction in [Direction::Downlink, Direction::Uplink] {
        let cfg = cfg.with_direction(direction);
        let a = in_pool(1, || run_sinr(&cfg).unwrap());
        let b = in_pool(4, || run_sinr(&cfg).unwrap());
        assert_eq!(a, b);
    }
}
