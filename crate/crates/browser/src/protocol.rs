//! JSON command/response transport over the browser's remote-debugging
//! WebSocket. One [`Connection`] multiplexes any number of flat sessions.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio::sync::{broadcast, mpsc, oneshot};
use tokio_tungstenite::tungstenite::Message;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ProtocolError {
    #[error("cannot connect to {endpoint}: {reason}")]
    Connect { endpoint: String, reason: String },
    #[error("connection closed")]
    Closed,
    #[error("{method} failed ({code}): {message}")]
    Remote { method: String, code: i64, message: String },
    #[error("{0} timed out after {1:?}")]
    Timeout(String, Duration),
    #[error("malformed reply to {method}: {detail}")]
    Malformed { method: String, detail: String },
}

/// An unsolicited message from the browser.
#[derive(Debug, Clone)]
pub struct Event {
    pub method: String,
    pub session_id: Option<String>,
    pub params: Value,
}

type Pending = Arc<Mutex<HashMap<u64, (String, oneshot::Sender<Result<Value, ProtocolError>>)>>>;

pub struct Connection {
    out: mpsc::UnboundedSender<Message>,
    pending: Pending,
    events: broadcast::Sender<Event>,
    next_id: AtomicU64,
}

impl Connection {
    pub async fn connect(endpoint: &str) -> Result<Arc<Connection>, ProtocolError> {
        let fail = |reason: String| ProtocolError::Connect {
            endpoint: endpoint.to_string(),
            reason,
        };
        let parsed = url::Url::parse(endpoint).map_err(|e| fail(e.to_string()))?;
        if !matches!(parsed.scheme(), "ws" | "wss") {
            return Err(fail(format!("scheme {:?} is not ws or wss", parsed.scheme())));
        }
        let (ws, _) = tokio_tungstenite::connect_async(endpoint)
            .await
            .map_err(|e| fail(e.to_string()))?;
        let (mut sink, mut stream) = ws.split();

        let (out, mut rx) = mpsc::unbounded_channel::<Message>();
        tokio::spawn(async move {
            while let Some(msg) = rx.recv().await {
                if sink.send(msg).await.is_err() {
                    break;
                }
            }
            let _ = sink.close().await;
        });

        let pending: Pending = Arc::default();
        let (events, _) = broadcast::channel(256);
        let conn = Arc::new(Connection {
            out,
            pending: pending.clone(),
            events: events.clone(),
            next_id: AtomicU64::new(1),
        });

        tokio::spawn(async move {
            while let Some(Ok(msg)) = stream.next().await {
                let text = match &msg {
                    Message::Text(t) => t.as_str(),
                    Message::Close(_) => break,
                    _ => continue,
                };
                let Ok(v) = serde_json::from_str::<Value>(text) else {
                    tracing::warn!("dropping non-JSON frame from browser");
                    continue;
                };
                dispatch(v, &pending, &events);
            }
            for (_, (_, tx)) in pending.lock().unwrap().drain() {
                let _ = tx.send(Err(ProtocolError::Closed));
            }
        });
        Ok(conn)
    }

    pub fn subscribe(&self) -> broadcast::Receiver<Event> {
        self.events.subscribe()
    }

    /// Sends one command and waits for its reply.
    pub async fn call(
        &self,
        session_id: Option<&str>,
        method: &str,
        params: Value,
        timeout: Duration,
    ) -> Result<Value, ProtocolError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let mut msg = json!({"id": id, "method": method, "params": params});
        if let Some(s) = session_id {
            msg["sessionId"] = json!(s);
        }
        let (tx, rx) = oneshot::channel();
        self.pending.lock().unwrap().insert(id, (method.to_string(), tx));
        if self.out.send(Message::text(msg.to_string())).is_err() {
            self.pending.lock().unwrap().remove(&id);
            return Err(ProtocolError::Closed);
        }
        match tokio::time::timeout(timeout, rx).await {
            Ok(Ok(reply)) => reply,
            Ok(Err(_)) => Err(ProtocolError::Closed),
            Err(_) => {
                self.pending.lock().unwrap().remove(&id);
                Err(ProtocolError::Timeout(method.to_string(), timeout))
            }
        }
    }
}

fn dispatch(v: Value, pending: &Pending, events: &broadcast::Sender<Event>) {
    if let Some(id) = v.get("id").and_then(Value::as_u64) {
        let Some((method, tx)) = pending.lock().unwrap().remove(&id) else {
            return;
        };
        let reply = match v.get("error") {
            Some(err) => Err(ProtocolError::Remote {
                method,
                code: err.get("code").and_then(Value::as_i64).unwrap_or(0),
                message: err.get("message").and_then(Value::as_str).unwrap_or("").to_string(),
            }),
            None => Ok(v.get("result").cloned().unwrap_or(Value::Null)),
        };
        let _ = tx.send(reply);
    } else if let Some(method) = v.get("method").and_then(Value::as_str) {
        let _ = events.send(Event {
            method: method.to_string(),
            session_id: v.get("sessionId").and_then(Value::as_str).map(String::from),
            params: v.get("params").cloned().unwrap_or(Value::Null),
        });
    }
}

/// A page target attached in flat mode. Commands take `&mut self`, so a
/// session never has more than one command in flight.
pub struct Session {
    conn: Arc<Connection>,
    target_id: String,
    session_id: String,
    pub command_timeout: Duration,
}

impl Session {
    pub async fn open(conn: Arc<Connection>, command_timeout: Duration) -> Result<Session, ProtocolError> {
        let created = conn
            .call(
                None,
                "Target.createTarget",
                json!({"url": "about:blank"}),
                command_timeout,
            )
            .await?;
        let target_id = str_field(&created, "targetId", "Target.createTarget")?;
        let attached = conn
            .call(
                None,
                "Target.attachToTarget",
                json!({"targetId": target_id, "flatten": true}),
                command_timeout,
            )
            .await?;
        let session_id = str_field(&attached, "sessionId", "Target.attachToTarget")?;
        Ok(Session {
            conn,
            target_id,
            session_id,
            command_timeout,
        })
    }

    pub fn id(&self) -> &str {
        &self.session_id
    }

    pub async fn call(&mut self, method: &str, params: Value) -> Result<Value, ProtocolError> {
        self.conn
            .call(Some(&self.session_id), method, params, self.command_timeout)
            .await
    }

    /// Events for this session only. Subscribe before issuing the command
    /// that triggers them.
    pub fn events(&self) -> SessionEvents {
        SessionEvents {
            rx: self.conn.subscribe(),
            session_id: self.session_id.clone(),
        }
    }

    pub async fn close(self) {
        let _ = self
            .conn
            .call(
                None,
                "Target.closeTarget",
                json!({"targetId": self.target_id}),
                self.command_timeout,
            )
            .await;
    }
}

pub struct SessionEvents {
    rx: broadcast::Receiver<Event>,
    session_id: String,
}

impl SessionEvents {
    pub async fn wait_for(&mut self, method: &str, timeout: Duration) -> Result<Event, ProtocolError> {
        let wait = async {
            loop {
                match self.rx.recv().await {
                    Ok(ev) if ev.method == method && ev.session_id.as_deref() == Some(&self.session_id) => {
                        return Ok(ev)
                    }
                    Ok(_) | Err(broadcast::error::RecvError::Lagged(_)) => continue,
                    Err(broadcast::error::RecvError::Closed) => return Err(ProtocolError::Closed),
                }
            }
        };
        tokio::time::timeout(timeout, wait)
            .await
            .unwrap_or_else(|_| Err(ProtocolError::Timeout(method.to_string(), timeout)))
    }
}

pub(crate) fn str_field(v: &Value, field: &str, method: &str) -> Result<String, ProtocolError> {
    v.get(field)
        .and_then(Value::as_str)
        .map(String::from)
        .ok_or_else(|| ProtocolError::Malformed {
            method: method.to_string(),
            detail: format!("missing string field {field:?}"),
        })
}
