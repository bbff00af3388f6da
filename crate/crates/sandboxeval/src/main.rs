fn main() {
    // behave like an ordinary unix tool when stdout is a closed pipe
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(sandboxeval::cli::main_impl());
}
