use std::io::{self, BufRead, Write};

/// Source of interactive answers. Tests substitute canned input.
pub trait Prompter {
    fn secret(&mut self, prompt: &str) -> io::Result<String>;
    fn line(&mut self, prompt: &str) -> io::Result<String>;
}

/// Reads secrets from the terminal without echo and plain lines from stdin.
pub struct Terminal;

impl Prompter for Terminal {
    fn secret(&mut self, prompt: &str) -> io::Result<String> {
        rpassword::prompt_password(prompt)
    }

    fn line(&mut self, prompt: &str) -> io::Result<String> {
        eprint!("{prompt}");
        io::stderr().flush()?;
        let mut buf = String::new();
        if io::stdin().lock().read_line(&mut buf)? == 0 {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "no input"));
        }
        Ok(buf.trim_end_matches(['\r', '\n']).to_owned())
    }
}

/// Answers prompts from a fixed list, failing once it runs out.
pub struct Scripted(pub Vec<String>);

impl Prompter for Scripted {
    fn secret(&mut self, prompt: &str) -> io::Result<String> {
        self.line(prompt)
    }

    fn line(&mut self, _prompt: &str) -> io::Result<String> {
        if self.0.is_empty() {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "no scripted input left"));
        }
        Ok(self.0.remove(0))
    }
}
