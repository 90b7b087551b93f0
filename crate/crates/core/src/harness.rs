//! Compiling and running Java programs and their tests with an external JDK.

use std::env;
use std::fs::{self, File};
use std::io;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{SourceText, SyntaxTree};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

const POLL_INTERVAL: Duration = Duration::from_millis(10);

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no Java toolchain found (tried {0})")]
    ToolchainNotFound(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error("failed to start {program}: {source}")]
    Spawn {
        program: String,
        #[source]
        source: io::Error,
    },
    #[error("cannot determine the class declared in {0}")]
    NoClass(String),
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> HarnessError {
    let context = context.into();
    move |source| HarnessError::Io { context, source }
}

/// A `javac`/`java` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Toolchain {
    pub javac: PathBuf,
    pub java: PathBuf,
}

impl Toolchain {
    /// A JDK home containing `bin/javac` and `bin/java`.
    pub fn from_home(home: &Path) -> Option<Self> {
        let javac = home.join("bin").join("javac");
        let java = home.join("bin").join("java");
        (javac.is_file() && java.is_file()).then_some(Toolchain { javac, java })
    }

    /// Looks in `explicit`, then `$JDK_HOME`, `$JAVA_HOME`, then `PATH`.
    pub fn discover(explicit: Option<&Path>) -> Result<Self, HarnessError> {
        let mut tried = Vec::new();
        if let Some(home) = explicit {
            // An explicit home that does not work is an error, not a fallback.
            return Toolchain::from_home(home)
                .ok_or_else(|| HarnessError::ToolchainNotFound(format!("--jdk-home {}", home.display())));
        }
        for var in ["JDK_HOME", "JAVA_HOME"] {
            if let Some(home) = env::var_os(var).filter(|v| !v.is_empty()) {
                if let Some(tc) = Toolchain::from_home(Path::new(&home)) {
                    return Ok(tc);
                }
                tried.push(format!("${var}"));
            }
        }
        if let Some(path) = env::var_os("PATH") {
            let find = |name: &str| env::split_paths(&path).map(|d| d.join(name)).find(|p| p.is_file());
            if let (Some(javac), Some(java)) = (find("javac"), find("java")) {
                return Ok(Toolchain { javac, java });
            }
        }
        tried.push("PATH".into());
        Err(HarnessError::ToolchainNotFound(tried.join(", ")))
    }
}

/// How a compiled test class is executed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TestRunner {
    /// `java <TestClass>`; exit status 0 means every test passed.
    #[default]
    MainClass,
    /// `java org.junit.runner.JUnitCore <TestClass>` with the given jars.
    JUnit4 { classpath: Vec<PathBuf> },
}

impl TestRunner {
    fn classpath(&self) -> &[PathBuf] {
        match self {
            TestRunner::MainClass => &[],
            TestRunner::JUnit4 { classpath } => classpath,
        }
    }
}

/// One compilation unit, written to disk as `name`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub name: String,
    pub content: String,
}

impl SourceFile {
    pub fn new(name: impl Into<String>, content: impl Into<String>) -> Self {
        SourceFile {
            name: name.into(),
            content: content.into(),
        }
    }

    /// Names the file after its public top-level type (or the first one).
    pub fn infer(content: impl Into<String>) -> Result<Self, HarnessError> {
        let content = content.into();
        let class = primary_class_name(&content).ok_or_else(|| HarnessError::NoClass(first_line(&content)))?;
        Ok(SourceFile::new(format!("{class}.java"), content))
    }

    pub fn class_name(&self) -> &str {
        self.name.strip_suffix(".java").unwrap_or(&self.name)
    }
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or("").chars().take(60).collect()
}

/// Public top-level type name, else the first top-level type name.
pub fn primary_class_name(content: &str) -> Option<String> {
    let text = SourceText::new(content);
    let tree: SyntaxTree = crate::syntax::parse_source(&text).ok()?;
    let types: Vec<_> = tree
        .root()
        .named_children()
        .filter(|n| {
            matches!(
                n.kind(),
                "class_declaration" | "interface_declaration" | "enum_declaration" | "record_declaration"
            )
        })
        .collect();
    let is_public = |n: &&&crate::syntax::SyntaxNode| {
        n.child_of_kind("modifiers")
            .is_some_and(|m| m.children().iter().any(|c| c.kind() == "public"))
    };
    let chosen = types.iter().find(is_public).or(types.first())?;
    Some(chosen.child_by_field("name")?.text(&text).to_string())
}

#[derive(Debug, Clone)]
pub struct CompileResult {
    pub success: bool,
    pub diagnostics: String,
    pub artifacts_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestStatus {
    Pass,
    Fail,
    CompileError,
    Timeout,
    Crash,
}

impl TestStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TestStatus::Pass => "pass",
            TestStatus::Fail => "fail",
            TestStatus::CompileError => "compile-error",
            TestStatus::Timeout => "timeout",
            TestStatus::Crash => "crash",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub status: TestStatus,
    pub duration: Duration,
    /// Compiler diagnostics or captured test output.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchVerdict {
    pub instance_id: String,
    pub ordinal: usize,
    pub verdict: TestVerdict,
}

enum Outcome {
    Exited(ExitStatus),
    TimedOut,
}

fn wait_with_timeout(child: &mut Child, timeout: Duration) -> io::Result<Outcome> {
    let start = Instant::now();
    loop {
        if let Some(status) = child.try_wait()? {
            return Ok(Outcome::Exited(status));
        }
        if start.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Ok(Outcome::TimedOut);
        }
        thread::sleep(POLL_INTERVAL);
    }
}

#[cfg(unix)]
fn killed_by_signal(status: &ExitStatus) -> bool {
    use std::os::unix::process::ExitStatusExt;
    status.signal().is_some()
}

#[cfg(not(unix))]
fn killed_by_signal(_: &ExitStatus) -> bool {
    false
}

fn classpath_string(entries: &[PathBuf]) -> Result<String, HarnessError> {
    env::join_paths(entries)
        .map(|s| s.to_string_lossy().into_owned())
        .map_err(|e| HarnessError::Io {
            context: "building classpath".into(),
            source: io::Error::new(io::ErrorKind::InvalidInput, e),
        })
}

/// Runs `cmd` with output captured to files in `dir`.
fn run_captured(cmd: &mut Command, dir: &Path, tag: &str, timeout: Duration) -> Result<(Outcome, String, Duration), HarnessError> {
    let out_path = dir.join(format!("{tag}.out"));
    let out = File::create(&out_path).map_err(io_err(format!("creating {}", out_path.display())))?;
    let err = out.try_clone().map_err(io_err("duplicating output handle"))?;
    let start = Instant::now();
    let program = cmd.get_program().to_string_lossy().into_owned();
    let mut child = cmd
        .stdin(Stdio::null())
        .stdout(Stdio::from(out))
        .stderr(Stdio::from(err))
        .spawn()
        .map_err(|source| HarnessError::Spawn { program, source })?;
    let outcome = wait_with_timeout(&mut child, timeout).map_err(io_err("waiting for child process"))?;
    let elapsed = start.elapsed();
    let bytes = fs::read(&out_path).map_err(io_err(format!("reading {}", out_path.display())))?;
    Ok((outcome, String::from_utf8_lossy(&bytes).into_owned(), elapsed))
}

/// Compiles and runs tests in private temporary directories.
#[derive(Debug, Clone)]
pub struct Harness {
    pub toolchain: Toolchain,
    pub runner: TestRunner,
    pub timeout: Duration,
}

impl Harness {
    pub fn new(toolchain: Toolchain) -> Self {
        Harness {
            toolchain,
            runner: TestRunner::default(),
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_runner(mut self, runner: TestRunner) -> Self {
        self.runner = runner;
        self
    }

    /// Writes `files` under `workdir/src` and compiles them into `workdir/classes`.
    pub fn compile(&self, files: &[SourceFile], workdir: &Path) -> Result<CompileResult, HarnessError> {
        let src = workdir.join("src");
        let classes = workdir.join("classes");
        fs::create_dir_all(&src).map_err(io_err(format!("creating {}", src.display())))?;
        fs::create_dir_all(&classes).map_err(io_err(format!("creating {}", classes.display())))?;
        let mut paths = Vec::with_capacity(files.len());
        for f in files {
            let path = src.join(&f.name);
            fs::write(&path, &f.content).map_err(io_err(format!("writing {}", path.display())))?;
            paths.push(path);
        }
        let mut cmd = Command::new(&self.toolchain.javac);
        cmd.current_dir(workdir).arg("-d").arg(&classes);
        if !self.runner.classpath().is_empty() {
            cmd.arg("-classpath").arg(classpath_string(self.runner.classpath())?);
        }
        cmd.args(&paths);
        let (outcome, diagnostics, _) = run_captured(&mut cmd, workdir, "javac", self.timeout)?;
        let success = matches!(outcome, Outcome::Exited(s) if s.success());
        Ok(CompileResult {
            success,
            diagnostics,
            artifacts_dir: classes,
        })
    }

    /// Runs `test_class` from a successful compilation.
    pub fn run_tests(&self, compiled: &CompileResult, test_class: &str, timeout: Duration) -> Result<TestVerdict, HarnessError> {
        if !compiled.success {
            return Ok(TestVerdict {
                status: TestStatus::CompileError,
                duration: Duration::ZERO,
                detail: compiled.diagnostics.clone(),
            });
        }
        let mut cp = vec![compiled.artifacts_dir.clone()];
        cp.extend(self.runner.classpath().iter().cloned());
        let workdir = compiled.artifacts_dir.parent().unwrap_or(&compiled.artifacts_dir);
        let mut cmd = Command::new(&self.toolchain.java);
        cmd.current_dir(workdir).arg("-cp").arg(classpath_string(&cp)?);
        if matches!(self.runner, TestRunner::JUnit4 { .. }) {
            cmd.arg("org.junit.runner.JUnitCore");
        }
        cmd.arg(test_class);
        let (outcome, detail, duration) = run_captured(&mut cmd, workdir, "test", timeout)?;
        let status = match outcome {
            Outcome::TimedOut => TestStatus::Timeout,
            Outcome::Exited(s) if s.success() => TestStatus::Pass,
            Outcome::Exited(s) if killed_by_signal(&s) => TestStatus::Crash,
            Outcome::Exited(_) => TestStatus::Fail,
        };
        Ok(TestVerdict { status, duration, detail })
    }

    /// Compiles `program` with `tests` in a fresh temporary directory and
    /// runs the tests.
    pub fn run_suite(&self, program: &SourceFile, tests: &SourceFile) -> Result<TestVerdict, HarnessError> {
        let dir = tempfile::Builder::new()
            .prefix("repairbench-")
            .tempdir()
            .map_err(io_err("creating work directory"))?;
        let compiled = self.compile(&[program.clone(), tests.clone()], dir.path())?;
        self.run_tests(&compiled, tests.class_name(), self.timeout)
    }

    /// Evaluates one candidate patch, a complete replacement for the buggy file.
    pub fn evaluate_patch(
        &self,
        instance_id: &str,
        ordinal: usize,
        patch: &SourceFile,
        tests: &SourceFile,
    ) -> Result<PatchVerdict, HarnessError> {
        Ok(PatchVerdict {
            instance_id: instance_id.to_string(),
            ordinal,
            verdict: self.run_suite(patch, tests)?,
        })
    }
}

/// `<patches_root>/<instance_id>/NN.java`
pub fn patch_path(patches_root: &Path, instance_id: &str, ordinal: usize) -> PathBuf {
    patches_root.join(instance_id).join(format!("{ordinal:02}.java"))
}

/// Patch files present for an instance, as (ordinal, path), sorted by ordinal.
pub fn list_patches(patches_root: &Path, instance_id: &str) -> Result<Vec<(usize, PathBuf)>, HarnessError> {
    let dir = patches_root.join(instance_id);
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(&dir).map_err(io_err(format!("listing {}", dir.display())))? {
        let path = entry.map_err(io_err(format!("listing {}", dir.display())))?.path();
        let ordinal = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_suffix(".java"))
            .filter(|s| s.len() == 2)
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&n| n >= 1);
        if let Some(n) = ordinal {
            out.push((n, path));
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_name_prefers_public_type() {
        assert_eq!(primary_class_name("class B {}\npublic class A {}").as_deref(), Some("A"));
        assert_eq!(primary_class_name("class B {} class C {}").as_deref(), Some("B"));
        assert_eq!(primary_class_name("int x;"), None);
        assert_eq!(SourceFile::infer("public class Foo {}").unwrap().name, "Foo.java");
    }

    #[test]
    fn explicit_home_without_binaries_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            Toolchain::discover(Some(dir.path())),
            Err(HarnessError::ToolchainNotFound(_))
        ));
    }

    #[test]
    fn patch_layout_is_zero_padded() {
        let root = tempfile::tempdir().unwrap();
        assert_eq!(
            patch_path(root.path(), "p1-LoopExchange-0", 3),
            root.path().join("p1-LoopExchange-0").join("03.java")
        );
        let dir = root.path().join("x");
        fs::create_dir_all(&dir).unwrap();
        for name in ["10.java", "02.java", "1.java", "00.java", "notes.txt"] {
            fs::write(dir.join(name), "").unwrap();
        }
        let found: Vec<usize> = list_patches(root.path(), "x").unwrap().into_iter().map(|(n, _)| n).collect();
        assert_eq!(found, vec![2, 10]);
        assert!(list_patches(root.path(), "missing").unwrap().is_empty());
    }

    #[cfg(unix)]
    #[test]
    fn timeout_kills_the_process() {
        let dir = tempfile::tempdir().unwrap();
        let mut cmd = Command::new("sleep");
        cmd.arg("5");
        let (outcome, _, elapsed) = run_captured(&mut cmd, dir.path(), "t", Duration::from_millis(200)).unwrap();
        assert!(matches!(outcome, Outcome::TimedOut));
        assert!(elapsed < Duration::from_secs(2));
    }
}
