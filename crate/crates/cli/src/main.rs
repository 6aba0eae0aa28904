use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::process::ExitCode;

use clap::Parser;
use moralplan::Error;
use moralplan_cli::commands::{run, Cli, Command, Status};
use moralplan_cli::server;

fn fail(e: &Error) -> ExitCode {
    let body = serde_json::json!({ "error": e.code(), "message": e.to_string() });
    let _ = writeln!(std::io::stderr(), "{body}");
    ExitCode::FAILURE
}

/// Remembers whether the reader went away, so `moralplan ... | head` exits
/// quietly instead of reporting an I/O error.
struct Stdout<W> {
    inner: W,
    closed: bool,
}

impl<W: Write> Write for Stdout<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.inner.write(buf).inspect_err(|e| self.closed |= e.kind() == std::io::ErrorKind::BrokenPipe)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush().inspect_err(|e| self.closed |= e.kind() == std::io::ErrorKind::BrokenPipe)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Serve { port, host } = cli.command {
        let ip: IpAddr = match host.parse() {
            Ok(ip) => ip,
            Err(_) => return fail(&Error::Syntax(format!("invalid host address `{host}`"))),
        };
        let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
        return match runtime.block_on(server::serve(SocketAddr::new(ip, port))) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(&Error::from(e)),
        };
    }
    let stdin = std::io::stdin();
    let mut out = Stdout {
        inner: std::io::stdout().lock(),
        closed: false,
    };
    match run(cli.command, &mut stdin.lock(), &mut out) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Negative) => ExitCode::FAILURE,
        Err(_) if out.closed => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
