use std::fmt::Display;

pub const USAGE: u8 = 2;
pub const FAILED: u8 = 3;

/// Why the process stops early; `message` goes to stderr.
#[derive(Debug)]
pub struct Exit {
    pub code: u8,
    pub message: String,
}

impl Exit {
    pub fn usage(message: impl Display) -> Self {
        Exit {
            code: USAGE,
            message: format!("error: {message}"),
        }
    }

    pub fn failed(message: impl Display) -> Self {
        Exit {
            code: FAILED,
            message: message.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Exit>;

pub trait OrUsage<T> {
    fn or_usage(self) -> Result<T>;
}

impl<T, E: Display> OrUsage<T> for std::result::Result<T, E> {
    fn or_usage(self) -> Result<T> {
        self.map_err(Exit::usage)
    }
}
