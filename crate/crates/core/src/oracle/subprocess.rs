//! Out-of-process oracles over newline-delimited JSON on the child's
//! stdin/stdout.
//!
//! Request: `{"id": 1, "op": "decode", "name": "", "inputs": [[0.1, ...]], "refs": []}`
//! Reply:   `{"id": 1, "values": ["CCO"]}` or `{"id": 1, "error": "..."}`
//!
//! One request is in flight at a time and replies are matched by id. A
//! protocol failure (exit, malformed line, wrong id) breaks the channel and
//! every later call fails immediately.
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::OracleBackend;
use crate::error::{QmoError, Result};
use crate::types::{LatentVector, ReferenceSet, Sequence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub id: u64,
    pub op: String,
    #[serde(default)]
    pub name: String,
    pub inputs: Vec<Value>,
    #[serde(default)]
    pub refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReply {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// How to launch a child oracle and what it provides.
#[derive(Debug, Clone, PartialEq)]
pub struct SubprocessSpec {
    /// Run through `sh -c`.
    pub command: String,
    pub dim: usize,
    pub properties: Vec<String>,
    pub similarities: Vec<String>,
}

struct Channel {
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    next_id: u64,
    broken: Option<String>,
}

pub struct SubprocessOracle {
    spec: SubprocessSpec,
    child: Mutex<Child>,
    channel: Mutex<Channel>,
}

impl SubprocessOracle {
    pub fn spawn(spec: SubprocessSpec) -> Result<Self> {
        if spec.dim == 0 {
            return Err(QmoError::Config("subprocess oracle dim must be >= 1".into()));
        }
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&spec.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| QmoError::oracle(format!("failed to spawn {:?}: {e}", spec.command)))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(SubprocessOracle {
            spec,
            child: Mutex::new(child),
            channel: Mutex::new(Channel {
                stdin,
                stdout,
                next_id: 1,
                broken: None,
            }),
        })
    }

    fn receive(ch: &mut Channel, id: u64) -> Result<(OracleReply, String)> {
        loop {
            let mut buf = String::new();
            let read = ch
                .stdout
                .read_line(&mut buf)
                .map_err(|e| QmoError::oracle(format!("read from oracle child failed: {e}")))?;
            if read == 0 {
                return Err(QmoError::oracle("oracle child closed its output"));
            }
            let raw = buf.trim_end().to_owned();
            if raw.is_empty() {
                continue;
            }
            let reply: OracleReply = serde_json::from_str(&raw).map_err(|e| {
                QmoError::oracle_with_payload(format!("malformed oracle reply: {e}"), raw.clone())
            })?;
            if reply.id == id {
                return Ok((reply, raw));
            }
            return Err(QmoError::oracle_with_payload(
                format!("reply id {} does not match request {id}", reply.id),
                raw,
            ));
        }
    }

    fn call(&self, op: &str, name: &str, inputs: Vec<Value>, refs: Vec<String>) -> Result<Vec<Value>> {
        let n = inputs.len();
        let mut ch = self.channel.lock().unwrap();
        if let Some(e) = &ch.broken {
            return Err(QmoError::oracle(format!("oracle channel unusable after earlier failure: {e}")));
        }
        let id = ch.next_id;
        ch.next_id += 1;
        let req = OracleRequest {
            id,
            op: op.to_owned(),
            name: name.to_owned(),
            inputs,
            refs,
        };
        let mut line = serde_json::to_string(&req).expect("request serializes");
        line.push('\n');
        if let Err(e) = ch.stdin.write_all(line.as_bytes()).and_then(|_| ch.stdin.flush()) {
            let e = QmoError::oracle(format!("write to oracle child failed: {e}"));
            ch.broken = Some(e.to_string());
            return Err(e);
        }

        let received = Self::receive(&mut ch, id);
        if let Err(e) = &received {
            ch.broken = Some(e.to_string());
        }
        let (reply, raw) = received?;
        drop(ch);

        match reply {
            OracleReply { error: Some(e), .. } => Err(QmoError::oracle_with_payload(
                format!("oracle {op} {name:?} failed: {e}"),
                raw,
            )),
            OracleReply { values: Some(v), .. } if v.len() == n => Ok(v),
            OracleReply { values: Some(v), .. } => Err(QmoError::oracle_with_payload(
                format!("oracle {op} returned {} values for {n} inputs", v.len()),
                raw,
            )),
            _ => Err(QmoError::oracle_with_payload(
                "oracle reply has neither values nor error",
                raw,
            )),
        }
    }

    fn numbers(&self, op: &str, name: &str, values: Vec<Value>) -> Result<Vec<f64>> {
        values
            .into_iter()
            .map(|v| {
                v.as_f64().ok_or_else(|| {
                    QmoError::oracle_with_payload(
                        format!("oracle {op} {name:?} returned a non-numeric value"),
                        v.to_string(),
                    )
                })
            })
            .collect()
    }
}

impl OracleBackend for SubprocessOracle {
    fn dim(&self) -> usize {
        self.spec.dim
    }

    fn property_names(&self) -> Vec<String> {
        self.spec.properties.clone()
    }

    fn similarity_names(&self) -> Vec<String> {
        self.spec.similarities.clone()
    }

    fn decode_batch(&self, zs: &[&LatentVector]) -> Result<Vec<Sequence>> {
        let inputs = zs.iter().map(|z| Value::from(z.as_slice().to_vec())).collect();
        self.call("decode", "", inputs, Vec::new())?
            .into_iter()
            .map(|v| match v {
                Value::String(s) if !s.is_empty() => Ok(Sequence::new(s)?),
                other => Err(QmoError::oracle_with_payload(
                    "decoder returned a non-string or empty value",
                    other.to_string(),
                )),
            })
            .collect()
    }

    fn property_batch(&self, name: &str, xs: &[&Sequence]) -> Result<Vec<f64>> {
        let inputs = xs.iter().map(|x| Value::from(x.as_str())).collect();
        let values = self.call("property", name, inputs, Vec::new())?;
        self.numbers("property", name, values)
    }

    fn similarity_batch(&self, name: &str, xs: &[&Sequence], refs: &ReferenceSet) -> Result<Vec<f64>> {
        let inputs = xs.iter().map(|x| Value::from(x.as_str())).collect();
        let refs = refs.sequences().iter().map(|s| s.as_str().to_owned()).collect();
        let values = self.call("similarity", name, inputs, refs)?;
        self.numbers("similarity", name, values)
    }
}

impl Drop for SubprocessOracle {
    fn drop(&mut self) {
        if let Ok(mut child) = self.child.lock() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// Answers requests from `input` with `backend` until end of input.
pub fn serve<R: BufRead, W: Write>(input: R, mut output: W, backend: &dyn OracleBackend) -> Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match serde_json::from_str::<OracleRequest>(&line) {
            Ok(req) => {
                let id = req.id;
                match answer(req, backend) {
                    Ok(values) => OracleReply {
                        id,
                        values: Some(values),
                        error: None,
                    },
                    Err(e) => OracleReply {
                        id,
                        values: None,
                        error: Some(e.to_string()),
                    },
                }
            }
            Err(e) => OracleReply {
                id: serde_json::from_str::<Value>(&line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(Value::as_u64))
                    .unwrap_or(0),
                values: None,
                error: Some(format!("malformed request: {e}")),
            },
        };
        serde_json::to_writer(&mut output, &reply).map_err(std::io::Error::from)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}

fn answer(req: OracleRequest, backend: &dyn OracleBackend) -> Result<Vec<Value>> {
    let text_inputs = || -> Result<Vec<Sequence>> {
        req.inputs
            .iter()
            .map(|v| match v.as_str() {
                Some(s) => Sequence::new(s),
                None => Err(QmoError::Config(format!("expected a sequence string, got {v}"))),
            })
            .collect()
    };
    match req.op.as_str() {
        "decode" => {
            let zs = req
                .inputs
                .iter()
                .map(|v| {
                    let coords: Vec<f64> = serde_json::from_value(v.clone())
                        .map_err(|e| QmoError::Config(format!("expected a float array: {e}")))?;
                    LatentVector::new(coords)
                })
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&LatentVector> = zs.iter().collect();
            for z in &refs {
                z.check_dim(backend.dim())?;
            }
            Ok(backend
                .decode_batch(&refs)?
                .into_iter()
                .map(|s| Value::from(String::from(s)))
                .collect())
        }
        "property" => {
            let xs = text_inputs()?;
            let xs: Vec<&Sequence> = xs.iter().collect();
            Ok(backend.property_batch(&req.name, &xs)?.into_iter().map(Value::from).collect())
        }
        "similarity" => {
            let xs = text_inputs()?;
            let xs: Vec<&Sequence> = xs.iter().collect();
            let refs = ReferenceSet::new(
                req.refs.iter().map(Sequence::new).collect::<Result<Vec<_>>>()?,
            )?;
            Ok(backend
                .similarity_batch(&req.name, &xs, &refs)?
                .into_iter()
                .map(Value::from)
                .collect())
        }
        other => Err(QmoError::Config(format!("unknown op {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testbed::{CodebookDecoder, TestbedOracle, ToyProperty};

    fn backend() -> TestbedOracle {
        TestbedOracle::new(CodebookDecoder::new("AC", 2).unwrap())
            .with_property("frac_A", ToyProperty::FracOfSymbol('A'))
    }

    fn roundtrip(lines: &str) -> Vec<OracleReply> {
        let mut out = Vec::new();
        serve(lines.as_bytes(), &mut out, &backend()).unwrap();
        String::from_utf8(out)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect()
    }

    #[test]
    fn serves_each_op() {
        let replies = roundtrip(concat!(
            r#"{"id": 4, "op": "decode", "name": "", "inputs": [[1, 0, 0, 1]], "refs": []}"#,
            "\n",
            r#"{"id": 5, "op": "property", "name": "frac_A", "inputs": ["AC", "AA"]}"#,
            "\n",
        ));
        assert_eq!(replies[0].id, 4);
        assert_eq!(replies[0].values.as_ref().unwrap()[0], Value::from("AC"));
        assert_eq!(replies[1].values.as_ref().unwrap(), &vec![Value::from(0.5), Value::from(1.0)]);
    }

    #[test]
    fn serve_reports_errors_with_id() {
        let replies = roundtrip(concat!(
            r#"{"id": 9, "op": "property", "name": "missing", "inputs": ["A"]}"#,
            "\n",
            r#"{"id": 10, "op": "decode", "inputs": [[1.0]]}"#,
            "\n",
            "not json\n",
        ));
        assert_eq!(replies[0].id, 9);
        assert!(replies[0].error.is_some());
        assert!(replies[1].error.as_ref().unwrap().contains("dimension"));
        assert_eq!(replies[2].id, 0);
        assert!(replies[2].error.as_ref().unwrap().contains("malformed"));
    }

    fn script_oracle(script: &str) -> SubprocessOracle {
        SubprocessOracle::spawn(SubprocessSpec {
            command: script.into(),
            dim: 2,
            properties: vec!["p".into()],
            similarities: vec![],
        })
        .unwrap()
    }

    #[test]
    fn protocol_failure_breaks_the_channel() {
        // The child goes quiet after its garbage line; later calls must not wait.
        let oracle = script_oracle(r#"read a; echo 'garbage'; cat > /dev/null"#);
        let z = LatentVector::new(vec![1.0, 0.0]).unwrap();
        assert!(oracle.decode_batch(&[&z]).unwrap_err().is_oracle());
        let err = oracle.decode_batch(&[&z]).unwrap_err();
        assert!(err.to_string().contains("earlier failure"), "{err}");
    }

    #[test]
    fn client_rejects_unknown_reply_id() {
        let oracle = script_oracle(r#"while read l; do echo '{"id":1,"values":["AC"]}'; done"#);
        let z = LatentVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(oracle.decode_batch(&[&z]).unwrap()[0].as_str(), "AC");
        match oracle.decode_batch(&[&z]).unwrap_err() {
            QmoError::Oracle { message, payload } => {
                assert!(message.contains("does not match"), "{message}");
                assert!(payload.unwrap().contains("\"id\":1"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn client_surfaces_malformed_payload() {
        let oracle = script_oracle(r#"read a; echo 'garbage reply'; sleep 1"#);
        let z = LatentVector::new(vec![1.0, 0.0]).unwrap();
        match oracle.decode_batch(&[&z]).unwrap_err() {
            QmoError::Oracle { payload, .. } => assert_eq!(payload.as_deref(), Some("garbage reply")),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn client_reports_child_exit_and_error_replies() {
        let z = LatentVector::new(vec![1.0, 0.0]).unwrap();
        assert!(script_oracle("exit 0").decode_batch(&[&z]).unwrap_err().is_oracle());
        let oracle = script_oracle(r#"read a; echo '{"id":1,"error":"boom"}'; sleep 1"#);
        let err = oracle.decode_batch(&[&z]).unwrap_err();
        assert!(err.to_string().contains("boom"));
    }
}
