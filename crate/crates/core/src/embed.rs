//! Semantic fingerprint providers.
//!
//! The built-in provider is a signed feature-hashing embedder over token
//! unigrams and adjacent bigrams. Index and sign come from 64-bit FNV-1a,
//! so output is bit-exact across platforms. An external provider can be
//! plugged in as a subprocess speaking a line protocol: one normalized query
//! per stdin line, one line of `dim` space-separated floats per query on
//! stdout.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sql::NormalizedTokens;

pub const DEFAULT_DIM: usize = 64;
pub const BUILTIN_PROVIDER_ID: &str = "builtin-fnv1a-v1";
pub const EXTERNAL_PROVIDER_ID: &str = "external-v1";

const FNV_OFFSET_BASIS: u64 = 14695981039346656037;
const FNV_PRIME: u64 = 1099511628211;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET_BASIS;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Bucket index in `[0, dim)` and sign (`+1.0`/`-1.0`) for a token.
pub fn hash_token(token: &str, dim: usize) -> (usize, f64) {
    let index = (fnv1a64(token.as_bytes()) % dim as u64) as usize;
    let mut salted = Vec::with_capacity(token.len() + 1);
    salted.push(b'#');
    salted.extend_from_slice(token.as_bytes());
    let sign = if fnv1a64(&salted) >> 63 == 0 { 1.0 } else { -1.0 };
    (index, sign)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub provider_id: String,
}

impl EmbeddingVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &EmbeddingVector) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }
}

fn l2_normalize(values: &mut [f64]) {
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        values.iter_mut().for_each(|v| *v /= norm);
    }
}

pub trait Embedder: Send + Sync {
    fn dim(&self) -> usize;

    fn provider_id(&self) -> &str;

    fn embed_batch(&self, batch: &[NormalizedTokens]) -> Result<Vec<EmbeddingVector>>;

    fn embed(&self, tokens: &NormalizedTokens) -> Result<EmbeddingVector> {
        let mut out = self.embed_batch(std::slice::from_ref(tokens))?;
        out.pop().ok_or_else(|| Error::Provider("provider returned no vector".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuiltinEmbedder {
    dim: usize,
}

impl Default for BuiltinEmbedder {
    fn default() -> Self {
        BuiltinEmbedder { dim: DEFAULT_DIM }
    }
}

impl BuiltinEmbedder {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        Ok(BuiltinEmbedder { dim })
    }

    pub fn embed_tokens(&self, tokens: &NormalizedTokens) -> EmbeddingVector {
        let mut values = vec![0.0; self.dim];
        let toks = &tokens.tokens;
        for tok in toks {
            let (i, s) = hash_token(tok, self.dim);
            values[i] += s;
        }
        for pair in toks.windows(2) {
            let bigram = format!("{}_{}", pair[0], pair[1]);
            let (i, s) = hash_token(&bigram, self.dim);
            values[i] += s;
        }
        l2_normalize(&mut values);
        EmbeddingVector { values, provider_id: BUILTIN_PROVIDER_ID.to_string() }
    }
}

impl Embedder for BuiltinEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn provider_id(&self) -> &str {
        BUILTIN_PROVIDER_ID
    }

    fn embed_batch(&self, batch: &[NormalizedTokens]) -> Result<Vec<EmbeddingVector>> {
        Ok(batch.iter().map(|t| self.embed_tokens(t)).collect())
    }
}

/// Built-in embedding of a token stream at the default width.
pub fn embed(tokens: &NormalizedTokens) -> EmbeddingVector {
    BuiltinEmbedder::default().embed_tokens(tokens)
}

/// Subprocess-backed provider. One batch in flight per handle.
#[derive(Debug)]
pub struct ExternalEmbedder {
    program: PathBuf,
    dim: usize,
    in_flight: Mutex<()>,
}

impl ExternalEmbedder {
    pub fn new(program: impl Into<PathBuf>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        Ok(ExternalEmbedder { program: program.into(), dim, in_flight: Mutex::new(()) })
    }

    fn run(&self, input: String) -> Result<String> {
        let mut child = Command::new(&self.program)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Provider(format!("cannot start {}: {e}", self.program.display())))?;
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
        let output = child
            .wait_with_output()
            .map_err(|e| Error::Provider(format!("provider did not complete: {e}")))?;
        // A provider may legitimately exit before draining stdin; its exit
        // status decides.
        let _ = writer.join();
        if !output.status.success() {
            return Err(Error::Provider(format!(
                "provider exited with {}: {}",
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        String::from_utf8(output.stdout).map_err(|_| Error::Provider("provider output is not UTF-8".into()))
    }

    fn parse_line(&self, line_no: usize, line: &str) -> Result<EmbeddingVector> {
        let mut values = line
            .split_whitespace()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Provider(format!("line {line_no}: `{v}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != self.dim {
            return Err(Error::Provider(format!(
                "line {line_no}: expected {} values, got {}",
                self.dim,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Provider(format!("line {line_no}: non-finite value")));
        }
        l2_normalize(&mut values);
        Ok(EmbeddingVector { values, provider_id: EXTERNAL_PROVIDER_ID.to_string() })
    }
}

impl Embedder for ExternalEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn provider_id(&self) -> &str {
        EXTERNAL_PROVIDER_ID
    }

    fn embed_batch(&self, batch: &[NormalizedTokens]) -> Result<Vec<EmbeddingVector>> {
        if batch.is_empty() {
            return Ok(Vec::new());
        }
        let _guard = self.in_flight.lock().unwrap_or_else(|p| p.into_inner());
        let mut input = String::new();
        for tokens in batch {
            input.push_str(&tokens.detokenize());
            input.push('\n');
        }
        let stdout = self.run(input)?;
        let lines: Vec<&str> = stdout.split_terminator('\n').collect();
        if lines.len() != batch.len() {
            return Err(Error::Provider(format!(
                "expected {} output lines, got {}",
                batch.len(),
                lines.len()
            )));
        }
        lines.iter().enumerate().map(|(i, l)| self.parse_line(i + 1, l)).collect()
    }
}
