fn main() {
    // LERW_THREADS caps the worker pool; all parallel reductions are
    // integer counts, so results do not depend on the thread count.
    if let Ok(threads) = std::env::var("LERW_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    std::process::exit(lerw::cli::run(std::env::args_os()));
}
