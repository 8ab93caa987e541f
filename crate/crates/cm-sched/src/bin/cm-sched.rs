fn main() {
    std::process::exit(cm_sched::cli::run(std::env::args_os()));
}
