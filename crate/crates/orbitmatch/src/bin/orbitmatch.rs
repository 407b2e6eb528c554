use std::process::exit;

fn main() {
    // ORBITMATCH_THREADS caps the rayon worker count (default: all cores)
    if let Ok(threads) = std::env::var("ORBITMATCH_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    exit(orbitmatch::cli::dispatch(std::env::args_os()));
}
