use std::process::ExitCode;

/// The Rust runtime ignores SIGPIPE, so `latdens ... | head` panics on the
/// first write after the reader closes. Restore the default disposition.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    latdens::cli::main_entry()
}
