use std::fmt;
use std::process::ExitCode;

/// Error families, each with its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Io,
    Parse,
    Config,
    Training,
    Prediction,
    Bundle,
    Evaluation,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Usage => "usage",
            Category::Io => "io",
            Category::Parse => "parse",
            Category::Config => "config",
            Category::Training => "training",
            Category::Prediction => "prediction",
            Category::Bundle => "bundle",
            Category::Evaluation => "evaluation",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Category::Usage => 2,
            Category::Io => 3,
            Category::Parse => 4,
            Category::Config => 5,
            Category::Training => 6,
            Category::Prediction => 7,
            Category::Bundle => 8,
            Category::Evaluation => 9,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    category: Category,
    message: String,
}

impl CliError {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        CliError {
            category,
            message: message.into(),
        }
    }

    /// Prints `error[category]: message` on one line and returns the exit code.
    pub fn report(&self) -> ExitCode {
        eprintln!("{self}");
        ExitCode::from(self.category.code())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_line: String = self
            .message
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        write!(f, "error[{}]: {one_line}", self.category.name())
    }
}
