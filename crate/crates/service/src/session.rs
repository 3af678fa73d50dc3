use std::fs;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::Mutex;
use std::thread::JoinHandle;

use serde::{Deserialize, Serialize};
use story_core::{Archive, Dimension, DimensionSpec, Individual, NarrativeGraph, Snapshot};
use tokio::sync::{oneshot, watch};

use crate::docs::{describe, DimensionsBody, EliteView, SessionInfo, Status, TargetAck};
use crate::error::ServiceError;

/// Persisted form of a session.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SessionState {
    pub id: String,
    pub created: u64,
    pub status: Status,
    pub archive: Archive,
}

impl SessionState {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("session state serializes")
    }
}

pub fn state_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.session.json"))
}

/// Projection shown by default: step x interestingness when both are
/// selected, otherwise the first two selected dimensions.
pub fn default_projection(dims: &DimensionSpec) -> [Dimension; 2] {
    let sel = dims.selected();
    let has = |d| sel.contains(&d);
    if has(Dimension::Step) && has(Dimension::Interestingness) {
        return [Dimension::Step, Dimension::Interestingness];
    }
    match sel {
        [x, y, ..] => [*x, *y],
        [x] if *x == Dimension::Interestingness => [Dimension::Step, *x],
        [x] => [*x, Dimension::Interestingness],
        [] => [Dimension::Step, Dimension::Interestingness],
    }
}

/// Archive state owned by a session's worker thread.
pub struct Worker {
    state: SessionState,
    snapshots: watch::Sender<Snapshot>,
    state_dir: Option<PathBuf>,
    checkpoint_every: u64,
}

impl Worker {
    pub fn archive(&self) -> &Archive {
        &self.state.archive
    }

    pub fn info(&self) -> SessionInfo {
        let a = &self.state.archive;
        SessionInfo {
            id: self.state.id.clone(),
            status: self.state.status,
            generation: a.generation(),
            created: self.state.created,
            dims: DimensionsBody::from(a.dims()),
            constraints: a.config().constraints,
            individuals: a.len(),
            feasible: a.individuals().filter(|i| i.is_feasible()).count(),
            uniques: a.uniques(),
        }
    }

    pub fn projection(&self, requested: Option<[Dimension; 2]>) -> [Dimension; 2] {
        requested.unwrap_or_else(|| default_projection(self.state.archive.dims()))
    }

    pub fn snapshot(&self, requested: Option<[Dimension; 2]>) -> Snapshot {
        let [x, y] = self.projection(requested);
        self.state.archive.snapshot(x, y)
    }

    pub fn target_ack(&self) -> TargetAck {
        let a = &self.state.archive;
        let target = a.target();
        let eval = a.context().evaluate::<f64>(target);
        let (graph, evaluation, patterns) = describe(target, &eval);
        TargetAck {
            generation: a.generation(),
            graph,
            digest: target.canonical_hash(),
            evaluation,
            patterns,
        }
    }

    pub fn update_target(&mut self, graph: NarrativeGraph) -> TargetAck {
        self.state.archive.inject_target(graph);
        self.target_ack()
    }

    fn elite(&self, requested: Option<[Dimension; 2]>, cell: [usize; 2]) -> Result<(&Individual, [Dimension; 2]), ServiceError> {
        let [x, y] = self.projection(requested);
        self.state
            .archive
            .elite_at(x, y, cell)
            .map(|e| (e, [x, y]))
            .ok_or(ServiceError::NoElite(cell))
    }

    pub fn elite_view(&self, requested: Option<[Dimension; 2]>, cell: [usize; 2]) -> Result<EliteView, ServiceError> {
        let (elite, projection) = self.elite(requested, cell)?;
        let g = &elite.phenotype;
        let eval = self.state.archive.context().evaluate::<f64>(g);
        let (graph, evaluation, patterns) = describe(g, &eval);
        Ok(EliteView {
            cell,
            projection,
            graph,
            digest: g.canonical_hash(),
            fitness: eval.fitness,
            coherence: eval.coherence,
            interestingness: evaluation.interestingness,
            evaluation,
            patterns,
        })
    }

    pub fn adopt(&mut self, requested: Option<[Dimension; 2]>, cell: [usize; 2]) -> Result<TargetAck, ServiceError> {
        let phenotype = self.elite(requested, cell)?.0.phenotype.clone();
        Ok(self.update_target(phenotype))
    }

    pub fn set_dimensions(&mut self, dims: DimensionSpec) -> SessionInfo {
        self.state.archive.set_dimensions(dims);
        self.info()
    }

    pub fn set_constraints(&mut self, constraints: Option<story_core::LevelConstraints>) -> SessionInfo {
        self.state.archive.set_constraints(constraints);
        self.info()
    }

    pub fn set_status(&mut self, status: Status) -> Result<SessionInfo, ServiceError> {
        self.state.status = status;
        if status == Status::Paused {
            self.persist()?;
        }
        Ok(self.info())
    }

    pub fn state_json(&self) -> String {
        self.state.to_json()
    }

    /// Writes the session state atomically when a state directory is set.
    pub fn persist(&self) -> Result<(), ServiceError> {
        let Some(dir) = &self.state_dir else {
            return Ok(());
        };
        let path = state_path(dir, &self.state.id);
        let tmp = path.with_extension("json.tmp");
        let fail = |e: std::io::Error| ServiceError::Persistence {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        fs::write(&tmp, self.state_json()).map_err(fail)?;
        fs::rename(&tmp, &path).map_err(fail)
    }

    fn evolve(&mut self) {
        self.state.archive.step_generation();
        self.snapshots.send_replace(self.snapshot(None));
        if self.checkpoint_every > 0 && self.state.archive.generation() % self.checkpoint_every == 0 {
            // Periodic saves are best effort; explicit ones report errors.
            let _ = self.persist();
        }
    }
}

type Job = Box<dyn FnOnce(&mut Worker) + Send>;

enum Message {
    Job(Job),
    Shutdown,
}

fn run(mut worker: Worker, inbox: mpsc::Receiver<Message>) {
    loop {
        let message = if worker.state.status == Status::Running {
            match inbox.try_recv() {
                Ok(m) => Some(m),
                Err(mpsc::TryRecvError::Empty) => None,
                Err(mpsc::TryRecvError::Disconnected) => break,
            }
        } else {
            match inbox.recv() {
                Ok(m) => Some(m),
                Err(_) => break,
            }
        };
        match message {
            Some(Message::Job(job)) => job(&mut worker),
            Some(Message::Shutdown) => break,
            None => worker.evolve(),
        }
    }
    let _ = worker.persist();
}

/// Handle to a session's evolution worker. All archive access goes through
/// messages to the worker thread.
pub struct Session {
    id: String,
    outbox: mpsc::Sender<Message>,
    snapshots: watch::Receiver<Snapshot>,
    thread: Mutex<Option<JoinHandle<()>>>,
}

impl Session {
    pub fn spawn(state: SessionState, state_dir: Option<PathBuf>, checkpoint_every: u64) -> Session {
        let id = state.id.clone();
        let [x, y] = default_projection(state.archive.dims());
        let (tx, rx) = watch::channel(state.archive.snapshot(x, y));
        let worker = Worker {
            state,
            snapshots: tx,
            state_dir,
            checkpoint_every,
        };
        let (outbox, inbox) = mpsc::channel();
        let thread = std::thread::Builder::new()
            .name(format!("session-{id}"))
            .spawn(move || run(worker, inbox))
            .expect("spawn session worker");
        Session {
            id,
            outbox,
            snapshots: rx,
            thread: Mutex::new(Some(thread)),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Runs `f` on the worker and waits for its result.
    pub async fn call<T, F>(&self, f: F) -> Result<T, ServiceError>
    where
        T: Send + 'static,
        F: FnOnce(&mut Worker) -> T + Send + 'static,
    {
        let (tx, rx) = oneshot::channel();
        let job: Job = Box::new(move |w| {
            let _ = tx.send(f(w));
        });
        self.outbox.send(Message::Job(job)).map_err(|_| ServiceError::WorkerGone)?;
        rx.await.map_err(|_| ServiceError::WorkerGone)
    }

    /// Latest snapshot of the default projection, updated after each generation.
    pub fn subscribe(&self) -> watch::Receiver<Snapshot> {
        self.snapshots.clone()
    }

    /// Stops the worker after it saves its state.
    pub fn stop(&self) {
        let _ = self.outbox.send(Message::Shutdown);
        let handle = self.thread.lock().expect("thread lock").take();
        if let Some(h) = handle {
            let _ = h.join();
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        self.stop();
    }
}
